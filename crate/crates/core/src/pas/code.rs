//! Binary LDPC codes: alist I/O, systematic encoding and sum-product decoding.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest LLR magnitude handed to or produced by the decoder.
pub const LLR_MAX: f64 = 40.0;

/// Sparse parity-check matrix with `checks` rows and `n` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// `rows[c]` lists the variable nodes of check `c`.
    pub fn new(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        for (c, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::config(format!("check {c} repeats a variable")));
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(Error::config(format!("check {c} references variable {v} of {n}")));
                }
                cols[v].push(c);
            }
        }
        Ok(Self { n, rows, cols })
    }

    /// Parses MacKay's alist format.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut numbers = |what: &str| -> Result<Vec<usize>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("alist ends before {what}")))?;
            line.split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number {t:?} in {what}"))))
                .collect()
        };
        let dims = numbers("dimensions")?;
        let [n, m] = dims[..] else {
            return Err(Error::Parse("first line must hold N M".into()));
        };
        let _max_degrees = numbers("maximum degrees")?;
        let col_degrees = numbers("column degrees")?;
        let row_degrees = numbers("row degrees")?;
        if col_degrees.len() != n || row_degrees.len() != m {
            return Err(Error::Parse("degree lists do not match N M".into()));
        }
        let mut read_lists = |count: usize, degrees: &[usize], bound: usize, what: &str| -> Result<Vec<Vec<usize>>> {
            (0..count)
                .map(|i| {
                    let list: Vec<usize> = numbers(what)?.into_iter().filter(|&v| v != 0).collect();
                    if list.len() != degrees[i] {
                        return Err(Error::Parse(format!("{what} {} has {} entries, expected {}", i + 1, list.len(), degrees[i])));
                    }
                    if list.iter().any(|&v| v > bound) {
                        return Err(Error::Parse(format!("{what} {} has an index above {bound}", i + 1)));
                    }
                    Ok(list.into_iter().map(|v| v - 1).collect())
                })
                .collect()
        };
        let col_lists = read_lists(n, &col_degrees, m, "column")?;
        let row_lists = read_lists(m, &row_degrees, n, "row")?;
        let h = Self::new(n, row_lists)?;
        for (v, list) in col_lists.into_iter().enumerate() {
            let mut list = list;
            list.sort_unstable();
            if list != h.cols[v] {
                return Err(Error::Parse(format!("column {} disagrees with the row lists", v + 1)));
            }
        }
        Ok(h)
    }

    /// Writes MacKay's alist format, zero-padding every list to the maximum degree.
    pub fn to_alist(&self) -> String {
        let max_col = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{} {}", self.n, self.rows.len());
        let _ = writeln!(out, "{max_col} {max_row}");
        let _ = writeln!(out, "{}", join(&mut self.cols.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(&mut self.rows.iter().map(Vec::len)));
        for (lists, width) in [(&self.cols, max_col), (&self.rows, max_row)] {
            for list in lists {
                let padded = list.iter().map(|&x| x + 1).chain(std::iter::repeat(0)).take(width);
                let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    /// Whether `bits` satisfies every check.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n && self.rows.iter().all(|row| row.iter().fold(0u8, |acc, &v| acc ^ bits[v]) == 0)
    }
}

/// LDPC code with information bits in the first `k` positions and parity in
/// the last `n − k`, encoded as `[u | u Pᵀ]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystematicCode {
    h: ParityCheckMatrix,
    k: usize,
    words: usize,
    /// Row `i` selects the information bits summed into parity bit `i`.
    parity: Vec<Vec<u64>>,
}

impl SystematicCode {
    /// Requires the square block of the last `checks` columns to be
    /// invertible over GF(2).
    pub fn new(h: ParityCheckMatrix) -> Result<Self> {
        let n = h.len();
        let r = h.num_checks();
        if r == 0 || r >= n {
            return Err(Error::config(format!("{r} checks on {n} bits do not form a code")));
        }
        let k = n - r;
        let words = k.div_ceil(64);
        let pw = r.div_ceil(64);
        // each row holds [H_p | H_u] packed; reduce H_p to the identity
        let mut rows: Vec<(Vec<u64>, Vec<u64>)> = h
            .rows
            .iter()
            .map(|row| {
                let mut p = vec![0u64; pw];
                let mut u = vec![0u64; words];
                for &v in row {
                    if v >= k {
                        p[(v - k) / 64] |= 1 << ((v - k) % 64);
                    } else {
                        u[v / 64] |= 1 << (v % 64);
                    }
                }
                (p, u)
            })
            .collect();
        for col in 0..r {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let pivot = (col..r)
                .find(|&i| rows[i].0[w] & b != 0)
                .ok_or_else(|| Error::config("parity part of the check matrix is singular"))?;
            rows.swap(col, pivot);
            let pivot_row = rows[col].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != col && row.0[w] & b != 0 {
                    row.0.iter_mut().zip(&pivot_row.0).for_each(|(a, p)| *a ^= p);
                    row.1.iter_mut().zip(&pivot_row.1).for_each(|(a, p)| *a ^= p);
                }
            }
        }
        Ok(Self {
            h,
            k,
            words,
            parity: rows.into_iter().map(|(_, u)| u).collect(),
        })
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        Self::new(ParityCheckMatrix::from_alist(text)?)
    }

    /// The 1512-bit rate-5/6 code shipped with the crate.
    pub fn shipped() -> Self {
        Self::from_alist(include_str!("../../data/ira_1512_r56.alist")).expect("shipped code is valid")
    }

    pub fn check_matrix(&self) -> &ParityCheckMatrix {
        &self.h
    }

    /// Codeword length.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Information bits.
    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::domain(format!("encoder needs {} bits, got {}", self.k, info.len())));
        }
        let mut packed = vec![0u64; self.words];
        for (i, &b) in info.iter().enumerate() {
            packed[i / 64] |= u64::from(b & 1) << (i % 64);
        }
        let mut out = info.to_vec();
        out.extend(self.parity.iter().map(|row| {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            (ones & 1) as u8
        }));
        Ok(out)
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.h.is_codeword(bits)
    }

    /// Flooding sum-product decoding; `llrs[i] > 0` favours bit `0`.
    pub fn decode(&self, llrs: &[f64], max_iters: usize) -> Result<BpOutcome> {
        if llrs.len() != self.len() {
            return Err(Error::domain(format!("decoder needs {} LLRs, got {}", self.len(), llrs.len())));
        }
        Ok(BpDecoder::new(&self.h).run(llrs, max_iters))
    }
}

/// Hard decisions of a BP run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpOutcome {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

struct BpDecoder<'a> {
    h: &'a ParityCheckMatrix,
    /// Edge index ranges per check; edges are stored check-major.
    starts: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl<'a> BpDecoder<'a> {
    fn new(h: &'a ParityCheckMatrix) -> Self {
        let mut starts = Vec::with_capacity(h.num_checks() + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); h.len()];
        starts.push(0);
        for row in &h.rows {
            for &v in row {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            starts.push(edge_var.len());
        }
        Self {
            h,
            starts,
            edge_var,
            var_edges,
        }
    }

    fn run(&self, llrs: &[f64], max_iters: usize) -> BpOutcome {
        let channel: Vec<f64> = llrs.iter().map(|l| l.clamp(-LLR_MAX, LLR_MAX)).collect();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| channel[v]).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut bits: Vec<u8> = channel.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut tanhs = Vec::new();
        let mut prefix = Vec::new();
        for iter in 1..=max_iters {
            for c in 0..self.h.num_checks() {
                let range = self.starts[c]..self.starts[c + 1];
                tanhs.clear();
                tanhs.extend(v2c[range.clone()].iter().map(|&l| (0.5 * l).tanh()));
                // exclusive products via prefix and running suffix
                prefix.clear();
                let mut acc = 1.0;
                for &t in &tanhs {
                    prefix.push(acc);
                    acc *= t;
                }
                let mut suffix = 1.0;
                for (i, e) in range.enumerate().rev() {
                    let t = (prefix[i] * suffix).clamp(-0.999_999_999_999, 0.999_999_999_999);
                    c2v[e] = (2.0 * t.atanh()).clamp(-LLR_MAX, LLR_MAX);
                    suffix *= tanhs[i];
                }
            }
            for (v, edges) in self.var_edges.iter().enumerate() {
                let total = channel[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                bits[v] = u8::from(total < 0.0);
                for &e in edges {
                    v2c[e] = (total - c2v[e]).clamp(-LLR_MAX, LLR_MAX);
                }
            }
            if self.h.is_codeword(&bits) {
                return BpOutcome {
                    bits,
                    converged: true,
                    iterations: iter,
                };
            }
        }
        BpOutcome {
            bits,
            converged: false,
            iterations: max_iters,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Hamming (7,4) with parity in the last three positions.
    fn hamming() -> SystematicCode {
        let h = ParityCheckMatrix::new(7, vec![vec![0, 1, 3, 4], vec![0, 2, 3, 5], vec![1, 2, 3, 6]]).unwrap();
        SystematicCode::new(h).unwrap()
    }

    #[test]
    fn alist_round_trip() {
        let code = hamming();
        let text = code.check_matrix().to_alist();
        assert!(text.starts_with("7 3\n3 4\n"));
        assert_eq!(ParityCheckMatrix::from_alist(&text).unwrap(), *code.check_matrix());
    }

    #[test]
    fn alist_errors() {
        assert!(matches!(ParityCheckMatrix::from_alist("7"), Err(Error::Parse(_))));
        let bad = "2 1\n1 2\n1 1\n2\n1\n2\n1 1\n";
        assert!(matches!(ParityCheckMatrix::from_alist(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn encodes_codewords() {
        let code = hamming();
        assert_eq!(code.dimension(), 4);
        for u in 0..16u8 {
            let info: Vec<u8> = (0..4).map(|i| (u >> i) & 1).collect();
            let cw = code.encode(&info).unwrap();
            assert_eq!(&cw[..4], &info[..]);
            assert!(code.is_codeword(&cw));
        }
    }

    #[test]
    fn singular_parity_part() {
        let h = ParityCheckMatrix::new(4, vec![vec![0, 2, 3], vec![1, 2, 3]]).unwrap();
        assert!(matches!(SystematicCode::new(h), Err(Error::Config(_))));
    }

    #[test]
    fn bp_basics() {
        let code = hamming();
        let out = code.decode(&[10.0; 7], 50).unwrap();
        assert!(out.converged && out.iterations == 1 && out.bits == vec![0; 7]);

        let cw = code.encode(&[1, 0, 1, 1]).unwrap();
        let mut llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        llrs[2] = -llrs[2] * 0.5;
        let out = code.decode(&llrs, 50).unwrap();
        assert!(out.converged);
        assert_eq!(out.bits, cw);
    }

    #[test]
    fn shipped_code_shape() {
        let code = SystematicCode::shipped();
        assert_eq!(code.len(), 1512);
        assert_eq!(code.dimension(), 1260);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let info: Vec<u8> = (0..1260).map(|_| rng.gen_range(0..2)).collect();
            assert!(code.is_codeword(&code.encode(&info).unwrap()));
        }
        let llrs: Vec<f64> = (0..1512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(!code.decode(&llrs, 20).unwrap().converged);
    }

    #[test]
    fn shipped_code_corrects_single_errors() {
        let code = SystematicCode::shipped();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let info: Vec<u8> = (0..1260).map(|_| rng.gen_range(0..2)).collect();
        let cw = code.encode(&info).unwrap();
        // the final staircase parity bit has a single check and is left out
        for pos in [0, 700, 1259, 1260, 1510] {
            let mut llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect();
            llrs[pos] = -llrs[pos];
            let out = code.decode(&llrs, 50).unwrap();
            assert!(out.converged);
            assert_eq!(out.bits, cw, "flip at {pos}");
        }
    }
}
