//! Gauss–Hermite rules for expectations over a standard normal variable.

use std::sync::OnceLock;

/// Nodes and weights such that `E[f(Z)] ≈ Σ w_i f(z_i)` for `Z ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds an `n`-point rule from the eigen-decomposition of the Jacobi
    /// matrix of the probabilists' Hermite polynomials (Golub–Welsch).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut d = vec![0.0; n];
        let mut e: Vec<f64> = (1..=n).map(|k| if k < n { (k as f64).sqrt() } else { 0.0 }).collect();
        // first components of the eigenvectors
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        tridiagonal_ql(&mut d, &mut e, &mut z);
        let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // symmetrize against rounding
        for i in 0..n / 2 {
            let (a, b) = (pairs[i], pairs[n - 1 - i]);
            let x = 0.5 * (b.0 - a.0);
            let w = 0.5 * (a.1 + b.1);
            pairs[i] = (-x, w);
            pairs[n - 1 - i] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    /// Cached rule with `64 · 2^i` nodes, `i < 4`.
    pub fn cached(level: usize) -> &'static GaussHermite {
        static RULES: [OnceLock<GaussHermite>; 4] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        RULES[level].get_or_init(|| GaussHermite::new(64 << level))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Implicit QL iteration on a symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e[i]` couples `i` and `i + 1`). On return `d`
/// holds the eigenvalues and `z` the rotated first row.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        for n in [8, 64, 128, 256, 512] {
            let gh = GaussHermite::new(n);
            assert!((gh.expect(|_| 1.0) - 1.0).abs() < 1e-12, "n={n}");
            assert!(gh.expect(|z| z).abs() < 1e-12);
            assert!((gh.expect(|z| z * z) - 1.0).abs() < 1e-10, "n={n}");
            assert!((gh.expect(|z| z.powi(4)) - 3.0).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn smooth_function() {
        // E[cos Z] = exp(-1/2)
        let gh = GaussHermite::cached(0);
        assert_eq!(gh.len(), 64);
        assert!((gh.expect(f64::cos) - (-0.5f64).exp()).abs() < 1e-13);
    }
}
