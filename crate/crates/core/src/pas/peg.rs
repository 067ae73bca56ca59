//! Progressive edge growth for irregular repeat-accumulate check matrices.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::code::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Check matrix `[H_u | H_p]` of length `n` and dimension `k`: every
/// information column has `info_degree` edges placed by progressive edge
/// growth, and `H_p` is the dual-diagonal staircase, so the parity part is
/// always invertible.
pub fn peg_ira(n: usize, k: usize, info_degree: usize, seed: u64) -> Result<ParityCheckMatrix> {
    if k == 0 || k >= n {
        return Err(Error::config(format!("dimension {k} invalid for length {n}")));
    }
    let r = n - k;
    if info_degree == 0 || info_degree > r {
        return Err(Error::config(format!("column degree {info_degree} invalid for {r} checks")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); r];
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..r {
        let v = k + i;
        for c in [i, i + 1].into_iter().filter(|&c| c < r) {
            check_adj[c].push(v);
            var_adj[v].push(c);
        }
    }
    for v in 0..k {
        for _ in 0..info_degree {
            let candidates = if var_adj[v].is_empty() {
                (0..r).collect()
            } else {
                farthest_checks(v, &check_adj, &var_adj)
            };
            let min = candidates.iter().map(|&c| check_adj[c].len()).min().unwrap();
            let lightest: Vec<usize> = candidates.into_iter().filter(|&c| check_adj[c].len() == min).collect();
            let &c = lightest.choose(&mut rng).unwrap();
            check_adj[c].push(v);
            var_adj[v].push(c);
        }
    }
    ParityCheckMatrix::new(n, check_adj)
}

/// Checks outside the deepest reachable level of the tree spanned from `v`,
/// or, when every check is reachable, those first reached at the last level.
fn farthest_checks(v: usize, check_adj: &[Vec<usize>], var_adj: &[Vec<usize>]) -> Vec<usize> {
    let r = check_adj.len();
    let mut reached = vec![false; r];
    let mut seen = vec![false; var_adj.len()];
    seen[v] = true;
    let mut frontier = var_adj[v].clone();
    for &c in &frontier {
        reached[c] = true;
    }
    let mut count = frontier.len();
    loop {
        let mut next = Vec::new();
        for &c in &frontier {
            for &u in &check_adj[c] {
                if seen[u] {
                    continue;
                }
                seen[u] = true;
                for &c2 in &var_adj[u] {
                    if !reached[c2] {
                        reached[c2] = true;
                        next.push(c2);
                    }
                }
            }
        }
        if next.is_empty() {
            return (0..r).filter(|&c| !reached[c]).collect();
        }
        if count + next.len() == r {
            return next;
        }
        count += next.len();
        frontier = next;
    }
}
