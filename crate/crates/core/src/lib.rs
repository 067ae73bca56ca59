//! Probabilistic amplitude shaping with product distribution matching.
//!
//! The crate is organized bottom-up:
//!
//! - [`constellation`]: ASK points and the BRGC / NBBC label functions.
//! - [`matcher`]: exact constant-composition distribution matching.
//! - [`pdm`]: product distribution matching on top of binary matchers, and the
//!   extended variant that shares bit levels across parallel channels.
//! - [`infotheory`]: entropies, bit-metric achievable rates and required SNRs.
//! - [`planner`]: distribution optimization, waterfilling and plan generation.
//! - [`pas`]: the shaped transmitter and bit-metric receiver around a
//!   systematic LDPC code.
//! - [`sim`]: reproducible Monte Carlo frame error rate measurement.
//! - [`cli`]: the command-line front end used by the `pdmkit` binary.
//!
//! A noiseless shaped 8-ASK frame through the bundled rate-5/6 code:
//!
//! ```
//! use pdmkit::pas::{pas_decode, pas_encode, AmplitudeMatcher, PasConfig, SystematicCode};
//! use pdmkit::planner::{leading_levels, optimize_with_rate_loss};
//!
//! let code = SystematicCode::shipped();
//! let pdm = optimize_with_rate_loss(3, &leading_levels(2), 7.0 / 6.0, 504)?;
//! let cfg = PasConfig::new(AmplitudeMatcher::Pdm(pdm), &code)?;
//! let data: Vec<u8> = (0..cfg.data_len()).map(|i| (i % 3 == 0) as u8).collect();
//! let x = pas_encode(&cfg, &code, &data)?;
//! let y: Vec<f64> = x.iter().map(|&v| 4.0 * v as f64).collect();
//! assert_eq!(pas_decode(&cfg, &code, &y, 4.0, 50)?.data, data);
//! # Ok::<(), pdmkit::Error>(())
//! ```

pub mod bits;
pub mod cli;
pub mod constellation;
pub mod error;
pub mod infotheory;
pub mod matcher;
pub mod pas;
pub mod pdm;
pub mod planner;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result};
