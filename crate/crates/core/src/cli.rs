//! Command-line front end of the `pdmkit` binary.
//!
//! Exit codes: `0` on success, `1` when a computation fails, `2` for usage
//! errors, which include malformed or inconsistent configuration documents.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits::{pack_bits, unpack_bytes};
use crate::constellation::{LabelKind, Labeling};
use crate::error::{Error, Result};
use crate::infotheory::{bicm_rate, bmd_rate, bmd_rate_product, db_to_linear, linear_to_db, InputDistribution};
use crate::pas::{peg_ira, AmplitudeMatcher, PasConfig, SystematicCode};
use crate::pdm::{ExtendedPdmPlan, PdmConfig, PlanDocument};
use crate::planner::search::{best_rate_with, Family};
use crate::planner::{
    choose_constellations, design_distribution, leading_levels, optimize_mb_amplitudes, optimize_product_levels,
    optimize_with_rate_loss, plan_parallel_pdm, required_snr_table, waterfill, ChannelProfile, DmConfiguration,
    RateAccounting,
};
use crate::sim::{run_fer, PasSystem, SimRun, FER_COLUMNS};

/// Version accepted in configuration documents.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pdmkit", version, about = "Probabilistic amplitude shaping toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Achievable rates over an SNR grid.
    Rates(RatesArgs),
    /// Power-optimal distributions and required-SNR tables.
    Optimize(OptimizeArgs),
    /// Waterfilling and extended PDM plan for parallel channels.
    Plan(PlanArgs),
    /// Map a payload file to amplitude symbols.
    Match(MatchArgs),
    /// Recover a payload file from amplitude symbols.
    Dematch(DematchArgs),
    /// Monte Carlo frame error rates of a PAS link.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RateDistribution {
    /// Uniform points.
    Uniform,
    /// Best distribution of each family at every SNR.
    Shaped,
}

#[derive(Debug, Args)]
struct RatesArgs {
    /// Bits per symbol.
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "brgc")]
    labeling: Label,
    /// SNR grid `start:step:stop` or a comma list, in dB unless suffixed `lin`.
    #[arg(long)]
    snr: String,
    #[arg(long, value_enum, default_value = "uniform")]
    distribution: RateDistribution,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Label {
    Brgc,
    Nbbc,
}

impl From<Label> for LabelKind {
    fn from(l: Label) -> Self {
        match l {
            Label::Brgc => LabelKind::Brgc,
            Label::Nbbc => LabelKind::Nbbc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizeFamily {
    Mb,
    Product,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// Required SNR of the amplitude DM and of PDM with 1 to m − 1 shaped levels.
    #[arg(long)]
    required_snr_table: bool,
    #[arg(long, default_value_t = 6)]
    m: usize,
    /// Amplitude entropy `R_dm` in bits; derived from `--target-se` and
    /// `--code-rate` when omitted.
    #[arg(long)]
    rate: Option<String>,
    #[arg(long, default_value = "4.5")]
    target_se: String,
    #[arg(long, default_value = "9/10")]
    code_rate: String,
    #[arg(long, value_enum, default_value = "mb")]
    family: OptimizeFamily,
    /// Leading shaped levels of the product family; all when omitted.
    #[arg(long)]
    shaped: Option<usize>,
    /// Matcher length for rate-loss-aware product designs.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// JSON document `{version, gains, power_db, n, code_rate, target_se}`.
    #[arg(long, conflicts_with_all = ["gains", "power_db", "n", "code_rate", "target_se"])]
    config: Option<PathBuf>,
    /// Comma-separated channel gains.
    #[arg(long)]
    gains: Option<String>,
    #[arg(long)]
    power_db: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    code_rate: Option<String>,
    #[arg(long)]
    target_se: Option<String>,
    /// Design against matcher rates instead of entropies.
    #[arg(long, value_enum, default_value = "rate-loss")]
    accounting: Accounting,
    /// Plan file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Accounting {
    RateLoss,
    Entropy,
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// Plan JSON as written by `plan`, or a bare PDM plan document.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct DematchArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON document `{version, system, code?, run}`.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

/// Configuration document of `plan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub version: u32,
    pub gains: Vec<f64>,
    pub power_db: f64,
    pub n: usize,
    pub code_rate: f64,
    pub target_se: f64,
}

/// Configuration document of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub version: u32,
    pub system: SystemConfig,
    /// The shipped code when omitted.
    #[serde(default)]
    pub code: Option<CodeSource>,
    pub run: SimRun,
}

/// LDPC code of a simulated link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSource {
    /// Alist file.
    Alist(PathBuf),
    /// IRA code built by progressive edge growth.
    Peg {
        n: usize,
        k: usize,
        #[serde(default = "default_info_degree")]
        info_degree: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_info_degree() -> usize {
    3
}

/// Link simulated by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    /// Single channel with uniform amplitudes.
    Uniform { m: usize, n: usize },
    /// Single channel with a rate-loss-aware PDM shaping the leading levels.
    Pdm { m: usize, n: usize, shaped: usize, rate_dm: f64 },
    /// Parallel channels with an extended PDM; the grid is the mean power.
    Extended { gains: Vec<f64>, channel_bits: Vec<usize>, n: usize, target_se: f64 },
}

/// Tabular result with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub config: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(config: Value, columns: &[&str]) -> Self {
        Self {
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// CSV with the configuration echoed as a leading `#` line when present.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.config.is_null() {
            out.push_str(&format!("# {}\n", self.config));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Null => String::new(),
                    Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes `report` in `format` to `out`, or standard output.
pub fn emit_report(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `x`, `a/b`, `xdB` or `xlin`. Bare numbers are returned as written;
/// a `dB` suffix converts to linear when `linear` is requested and a `lin`
/// suffix converts to dB otherwise.
pub fn parse_number(text: &str, want_db: bool) -> Result<f64> {
    let t = text.trim();
    let (body, unit) = if let Some(b) = t.strip_suffix("dB").or_else(|| t.strip_suffix("db")) {
        (b, Some(true))
    } else if let Some(b) = t.strip_suffix("lin") {
        (b, Some(false))
    } else {
        (t, None)
    };
    let value = match body.split_once('/') {
        Some((a, b)) => parse_plain(a)? / parse_plain(b)?,
        None => parse_plain(body)?,
    };
    if !value.is_finite() {
        return Err(Error::Parse(format!("{text:?} is not a finite number")));
    }
    Ok(match (unit, want_db) {
        (Some(false), true) => linear_to_db(value),
        (Some(true), false) => db_to_linear(value),
        _ => value,
    })
}

fn parse_plain(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("{s:?} is not a number")))
}

/// SNR grid in dB from `start:step:stop` or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [start, step, stop] => {
            let linear = [start, stop].iter().all(|p| p.trim().ends_with("lin"));
            let (a, s, b) = if linear {
                let strip = |p: &str| parse_number(p.trim().trim_end_matches("lin"), false);
                (strip(start)?, strip(step)?, strip(stop)?)
            } else {
                (parse_number(start, true)?, parse_number(step.trim_end_matches("dB"), true)?, parse_number(stop, true)?)
            };
            if s.is_nan() || s <= 0.0 || b < a {
                return Err(Error::Parse(format!("grid {text:?} needs a positive step and start ≤ stop")));
            }
            let count = ((b - a) / s + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| {
                    let v = a + s * i as f64;
                    let v = (v * 1e9).round() / 1e9;
                    if linear {
                        linear_to_db(v)
                    } else {
                        v
                    }
                })
                .collect())
        }
        [_] => text.split(',').map(|p| parse_number(p, true)).collect(),
        _ => Err(Error::Parse(format!("grid {text:?} is neither start:step:stop nor a list"))),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Rates(a) => rates(a),
        Command::Optimize(a) => optimize(a),
        Command::Plan(a) => plan(a),
        Command::Match(a) => match_file(a),
        Command::Dematch(a) => dematch_file(a),
        Command::Simulate(a) => simulate(a),
    }
}

/// Rates CSV columns.
pub const RATE_COLUMNS: [&str; 4] = ["snr_db", "r_bmd", "r_bmd_product", "r_bicm"];

fn rates(a: RatesArgs) -> Result<()> {
    if a.m < 2 {
        return Err(Error::config("rates need at least 4-ASK"));
    }
    let grid = parse_grid(&a.snr)?;
    let fec = Labeling::new(a.labeling.into(), a.m)?;
    let dm = Labeling::nbbc(a.m)?;
    let rows = grid
        .par_iter()
        .map(|&db| -> Result<Vec<Value>> {
            let snr = db_to_linear(db);
            let (r_bmd, r_product, r_bicm) = match a.distribution {
                RateDistribution::Uniform => {
                    let u = InputDistribution::uniform(a.m)?;
                    (
                        bmd_rate(&u, &fec, snr)?,
                        bmd_rate_product(&dm, &vec![0.5; a.m - 1], &fec, snr)?,
                        bicm_rate(&u, &fec, snr)?,
                    )
                }
                RateDistribution::Shaped => {
                    let full = if a.m <= 4 { Family::Full } else { Family::MaxwellBoltzmann };
                    let kind = a.labeling.into();
                    (
                        best_rate_with(a.m, full, kind, snr)?.0,
                        best_rate_with(a.m, Family::Product, kind, snr)?.0,
                        best_rate_with(a.m, Family::BicmProduct, kind, snr)?.0,
                    )
                }
            };
            Ok(vec![json!(db), json!(r_bmd), json!(r_product), json!(r_bicm)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new(
        json!({"command": "rates", "m": a.m, "labeling": a.labeling, "snr": a.snr, "distribution": a.distribution}),
        &RATE_COLUMNS,
    );
    report.rows = rows;
    emit_report(&report, a.output.format, a.output.out.as_deref())
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let target_se = parse_number(&a.target_se, false)?;
    let code_rate = parse_number(&a.code_rate, false)?;
    if a.required_snr_table {
        let mut configurations = vec![DmConfiguration::Amplitude];
        configurations.extend((1..a.m).map(|shaped| DmConfiguration::Pdm { shaped }));
        let rows = required_snr_table(a.m, target_se, code_rate, &configurations)?;
        let mut report = Report::new(
            json!({"command": "optimize", "required_snr_table": true, "m": a.m, "target_se": target_se, "code_rate": code_rate}),
            &["configuration", "shaped_levels", "required_snr_db"],
        );
        report.rows = rows
            .iter()
            .map(|r| {
                let shaped = match r.configuration {
                    DmConfiguration::Amplitude => Value::Null,
                    DmConfiguration::Pdm { shaped } => json!(shaped),
                };
                vec![json!(r.configuration.to_string()), shaped, json!(r.required_snr_db)]
            })
            .collect();
        return emit_report(&report, a.output.format, a.output.out.as_deref());
    }
    let rate_dm = match &a.rate {
        Some(r) => parse_number(r, false)?,
        None => target_se - crate::planner::derive_gamma(a.m as f64, code_rate)?,
    };
    let shaped = a.shaped.unwrap_or(a.m - 1);
    let (dist, p0s, input_len) = match (a.family, a.n) {
        (OptimizeFamily::Mb, _) => (optimize_mb_amplitudes(a.m, rate_dm)?, None, None),
        (OptimizeFamily::Product, None) => {
            let q = optimize_product_levels(a.m, &leading_levels(shaped), rate_dm)?;
            (design_distribution(a.m, DmConfiguration::Pdm { shaped }, rate_dm)?, Some(q), None)
        }
        (OptimizeFamily::Product, Some(n)) => {
            let pdm = optimize_with_rate_loss(a.m, &leading_levels(shaped), rate_dm, n)?;
            (pdm.amplitude_distribution()?, Some(pdm.level_p0s()), Some(pdm.level_input_lengths()))
        }
    };
    let mut report = Report::new(
        json!({"command": "optimize", "m": a.m, "rate_dm": rate_dm, "family": format!("{:?}", a.family).to_lowercase(), "shaped": shaped, "n": a.n}),
        &["amplitude", "probability"],
    );
    report.rows = dist
        .amplitude_probs()
        .iter()
        .enumerate()
        .map(|(v, &p)| vec![json!(2 * v + 1), json!(p)])
        .collect();
    if a.output.format == Format::Json {
        let doc = json!({
            "config": report.config,
            "amplitude_probs": dist.amplitude_probs(),
            "level_p0": p0s,
            "level_input_lengths": input_len,
            "entropy": dist.amplitude_entropy(),
            "second_moment": dist.second_moment(),
        });
        return write_text(&(serde_json::to_string_pretty(&doc)? + "\n"), a.output.out.as_deref());
    }
    emit_report(&report, Format::Csv, a.output.out.as_deref())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn check_version(version: u32) -> Result<()> {
    if version != CONFIG_VERSION {
        return Err(Error::config(format!("unsupported config version {version}, expected {CONFIG_VERSION}")));
    }
    Ok(())
}

/// Plan document written by `plan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOutput {
    pub config: PlanConfig,
    pub lambda: f64,
    pub powers: Vec<f64>,
    pub capacities: Vec<f64>,
    pub channel_bits: Vec<usize>,
    pub gamma: f64,
    pub rate_dm: f64,
    pub n_j: Vec<usize>,
    pub k_j: Vec<usize>,
    pub p0: Vec<f64>,
    pub entropies: Vec<f64>,
    pub rate_loss: f64,
    pub pdm: PlanDocument,
}

/// Extended PDM plan for parallel channels.
pub fn build_plan(cfg: &PlanConfig, accounting: RateAccounting) -> Result<PlanOutput> {
    check_version(cfg.version)?;
    let profile = ChannelProfile::new(cfg.gains.clone(), db_to_linear(cfg.power_db), cfg.n)?;
    let wf = waterfill(&profile);
    let bits = choose_constellations(&wf);
    if bits.iter().any(Option::is_none) {
        return Err(Error::domain("waterfilling leaves a channel inactive; drop it from the gains"));
    }
    let bits: Vec<usize> = bits.into_iter().flatten().collect();
    let plan = plan_parallel_pdm(&profile, &bits, cfg.target_se, cfg.code_rate, accounting)?;
    Ok(PlanOutput {
        config: cfg.clone(),
        lambda: wf.lambda,
        powers: wf.channels.iter().map(|c| c.power).collect(),
        capacities: wf.channels.iter().map(|c| c.capacity).collect(),
        channel_bits: bits,
        gamma: plan.gamma,
        rate_dm: plan.r_dm,
        n_j: plan.plan.output_lengths(),
        k_j: plan.plan.level_input_lengths(),
        p0: plan.plan.level_p0s(),
        entropies: plan.entropies.clone(),
        rate_loss: plan.rate_loss(),
        pdm: plan.plan.to_document(),
    })
}

fn plan(a: PlanArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(path) => read_json::<PlanConfig>(path)?,
        None => {
            let missing = |name: &str| Error::config(format!("--{name} is required without --config"));
            PlanConfig {
                version: CONFIG_VERSION,
                gains: a
                    .gains
                    .as_deref()
                    .ok_or_else(|| missing("gains"))?
                    .split(',')
                    .map(|g| {
                        let g = g.trim();
                        // a dB gain describes the power gain h²
                        if g.ends_with("dB") {
                            Ok(parse_number(g, false)?.sqrt())
                        } else {
                            parse_number(g, false)
                        }
                    })
                    .collect::<Result<_>>()?,
                power_db: parse_number(a.power_db.as_deref().ok_or_else(|| missing("power-db"))?, true)?,
                n: a.n.ok_or_else(|| missing("n"))?,
                code_rate: parse_number(a.code_rate.as_deref().ok_or_else(|| missing("code-rate"))?, false)?,
                target_se: parse_number(a.target_se.as_deref().ok_or_else(|| missing("target-se"))?, false)?,
            }
        }
    };
    let accounting = match a.accounting {
        Accounting::RateLoss => RateAccounting::RateLoss,
        Accounting::Entropy => RateAccounting::Entropy,
    };
    let out = build_plan(&cfg, accounting)?;
    eprintln!("lambda {:.4}", out.lambda);
    eprintln!("{:>7} {:>9} {:>9} {:>4}", "gain", "power", "C", "m");
    for (((h, p), c), m) in cfg.gains.iter().zip(&out.powers).zip(&out.capacities).zip(&out.channel_bits) {
        eprintln!("{h:>7.3} {p:>9.3} {c:>9.3} {m:>4}");
    }
    eprintln!("gamma {:.4}  R_dm {:.4}  rate loss {:.4}", out.gamma, out.rate_dm, out.rate_loss);
    eprintln!("{:>3} {:>7} {:>7} {:>8} {:>8}", "j", "n_j", "k_j", "p0", "H");
    for (i, (((n_j, k_j), p0), h)) in out.n_j.iter().zip(&out.k_j).zip(&out.p0).zip(&out.entropies).enumerate() {
        eprintln!("{:>3} {n_j:>7} {k_j:>7} {p0:>8.4} {h:>8.4}", i + 2);
    }
    write_text(&(serde_json::to_string_pretty(&out)? + "\n"), a.out.as_deref())
}

fn load_plan(path: &Path) -> Result<ExtendedPdmPlan> {
    let value: Value = read_json(path)?;
    let doc: PlanDocument = match value.get("pdm") {
        Some(inner) => serde_json::from_value(inner.clone())?,
        None => serde_json::from_value(value)?,
    };
    ExtendedPdmPlan::from_document(&doc)
}

/// Bits of the length header preceding the payload.
const LENGTH_BITS: usize = 64;

fn symbol_width_check(plan: &ExtendedPdmPlan) -> Result<()> {
    if plan.channel_bits().iter().any(|&m| m > 9) {
        return Err(Error::config("symbol files store one byte per amplitude, so m ≤ 9"));
    }
    Ok(())
}

/// Matches `payload` with a 64-bit big-endian length header, zero-padded to
/// whole frames; one byte `(a − 1) / 2` per amplitude, channel by channel
/// within each frame.
pub fn match_payload(plan: &ExtendedPdmPlan, payload: &[u8]) -> Result<Vec<u8>> {
    symbol_width_check(plan)?;
    let k = plan.input_len();
    if k == 0 {
        return Err(Error::config("plan carries no data bits"));
    }
    let mut bits = unpack_bytes(&(payload.len() as u64).to_be_bytes());
    bits.extend(unpack_bytes(payload));
    bits.resize(bits.len().div_ceil(k) * k, 0);
    let frames = bits
        .par_chunks(k)
        .map(|chunk| plan.match_bits(chunk))
        .collect::<Result<Vec<_>>>()?;
    Ok(frames
        .into_iter()
        .flatten()
        .flatten()
        .map(|a| ((a - 1) / 2) as u8)
        .collect())
}

/// Inverse of [`match_payload`].
pub fn dematch_payload(plan: &ExtendedPdmPlan, symbols: &[u8]) -> Result<Vec<u8>> {
    symbol_width_check(plan)?;
    let n = plan.uses_per_channel();
    let frame = n * plan.num_channels();
    if symbols.is_empty() || !symbols.len().is_multiple_of(frame) {
        return Err(Error::decode(None, format!("symbol file is not a whole number of {frame}-symbol frames")));
    }
    let chunks = symbols
        .par_chunks(frame)
        .map(|chunk| {
            let seqs: Vec<Vec<u32>> = chunk.chunks(n).map(|c| c.iter().map(|&s| 2 * s as u32 + 1).collect()).collect();
            plan.dematch(&seqs)
        })
        .collect::<Result<Vec<_>>>()?;
    let bits: Vec<u8> = chunks.into_iter().flatten().collect();
    if bits.len() < LENGTH_BITS {
        return Err(Error::decode(None, "symbol file too short for the length header"));
    }
    let header: [u8; 8] = pack_bits(&bits[..LENGTH_BITS]).try_into().expect("eight bytes");
    let len = u64::from_be_bytes(header) as usize;
    let available = (bits.len() - LENGTH_BITS) / 8;
    if len > available {
        return Err(Error::decode(None, format!("header announces {len} bytes, only {available} present")));
    }
    Ok(pack_bits(&bits[LENGTH_BITS..LENGTH_BITS + 8 * len]))
}

fn match_file(a: MatchArgs) -> Result<()> {
    let plan = load_plan(&a.plan)?;
    let payload = fs::read(&a.input)?;
    fs::write(&a.output, match_payload(&plan, &payload)?)?;
    Ok(())
}

fn dematch_file(a: DematchArgs) -> Result<()> {
    let plan = load_plan(&a.plan)?;
    let symbols = fs::read(&a.input)?;
    fs::write(&a.output, dematch_payload(&plan, &symbols)?)?;
    Ok(())
}

/// Builds the PAS link described by `cfg`.
pub fn build_system(cfg: &SimulateConfig) -> Result<PasSystem> {
    check_version(cfg.version)?;
    let code = match &cfg.code {
        Some(CodeSource::Alist(path)) => SystematicCode::from_alist(&fs::read_to_string(path)?)?,
        Some(CodeSource::Peg { n, k, info_degree, seed }) => SystematicCode::new(peg_ira(*n, *k, *info_degree, *seed)?)?,
        None => SystematicCode::shipped(),
    };
    match &cfg.system {
        SystemConfig::Uniform { m, n } => {
            let pas = PasConfig::new(AmplitudeMatcher::Pdm(PdmConfig::uniform(*m, *n)?), &code)?;
            PasSystem::single(pas, code)
        }
        SystemConfig::Pdm { m, n, shaped, rate_dm } => {
            if *shaped == 0 || shaped + 1 > *m {
                return Err(Error::config(format!("cannot shape {shaped} of {} amplitude bits", m.saturating_sub(1))));
            }
            let pdm = optimize_with_rate_loss(*m, &leading_levels(*shaped), *rate_dm, *n)?;
            let pas = PasConfig::new(AmplitudeMatcher::Pdm(pdm), &code)?;
            PasSystem::single(pas, code)
        }
        SystemConfig::Extended { gains, channel_bits, n, target_se } => {
            let profile = ChannelProfile::new(gains.clone(), 1.0, *n)?;
            let plan = plan_parallel_pdm(&profile, channel_bits, *target_se, code.rate(), RateAccounting::RateLoss)?;
            let pas = PasConfig::new(AmplitudeMatcher::Extended(plan.plan), &code)?;
            PasSystem::parallel(pas, code, gains.clone())
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg: SimulateConfig = read_json(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.run.seed = seed;
    }
    let system = build_system(&cfg)?;
    let table = run_fer(&system, &cfg.run)?;
    let mut columns = FER_COLUMNS;
    if matches!(cfg.system, SystemConfig::Extended { .. }) {
        columns[0] = "power_db";
    }
    let mut report = Report::new(serde_json::to_value(&cfg)?, &columns);
    report.rows = table
        .iter()
        .map(|p| {
            vec![
                json!(p.snr_db),
                json!(p.frames),
                json!(p.frame_errors),
                json!(p.fer),
                json!(p.ci_low),
                json!(p.ci_high),
            ]
        })
        .collect();
    emit_report(&report, a.output.format, a.output.out.as_deref())
}
