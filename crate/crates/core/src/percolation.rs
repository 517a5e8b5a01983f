//! 2D bond percolation on the square lattice of wire nodes, with bonds
//! either drawn at a fixed probability or from the B-undo success rate.

use crate::walk::success_probability;
use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Threshold quoted for the construction.
pub const QUOTED_THRESHOLD: f64 = 0.593;

/// `L×L` nodes; `horizontal[r·(L−1)+c]` joins (r, c)–(r, c+1) and
/// `vertical[r·L+c]` joins (r, c)–(r+1, c).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BondLattice {
    pub l: usize,
    pub horizontal: Vec<bool>,
    pub vertical: Vec<bool>,
    pub p: f64,
    pub seed: u64,
}

impl BondLattice {
    pub fn bond_count(&self) -> usize {
        self.horizontal.len() + self.vertical.len()
    }

    pub fn open_count(&self) -> usize {
        self.horizontal.iter().chain(&self.vertical).filter(|b| **b).count()
    }

    fn open_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let l = self.l;
        let h = self.horizontal.iter().enumerate().filter(|(_, o)| **o).map(move |(i, _)| {
            let (r, c) = (i / (l - 1), i % (l - 1));
            (r * l + c, r * l + c + 1)
        });
        let v = self.vertical.iter().enumerate().filter(|(_, o)| **o).map(move |(i, _)| (i, i + l));
        h.chain(v)
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn check_args(l: usize, p: f64) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("side length {l} below 2")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn generate_with<R: Rng>(l: usize, p: f64, seed: u64, rng: &mut R) -> BondLattice {
    let n = l * (l - 1);
    let horizontal = (0..n).map(|_| rng.random::<f64>() < p).collect();
    let vertical = (0..n).map(|_| rng.random::<f64>() < p).collect();
    BondLattice { l, horizontal, vertical, p, seed }
}

/// Each bond open independently with probability `p`.
pub fn generate(l: usize, p: f64, seed: u64) -> Result<BondLattice> {
    check_args(l, p)?;
    Ok(generate_with(l, p, seed, &mut trial_rng(seed, 0)))
}

/// Left–right crossing by union-find with two virtual boundary nodes.
pub fn spans(lat: &BondLattice) -> bool {
    let l = lat.l;
    let (left, right) = (l * l, l * l + 1);
    let mut uf = UnionFind::new(l * l + 2);
    for r in 0..l {
        uf.union(left, r * l);
        uf.union(right, r * l + l - 1);
    }
    for (a, b) in lat.open_edges() {
        uf.union(a, b);
    }
    uf.equiv(left, right)
}

/// Breadth-first reference implementation of [`spans`].
pub fn spans_bfs(lat: &BondLattice) -> bool {
    let l = lat.l;
    let mut adj = vec![Vec::new(); l * l];
    for (a, b) in lat.open_edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; l * l];
    let mut q: VecDeque<usize> = (0..l).map(|r| r * l).collect();
    for &s in &q {
        seen[s] = true;
    }
    while let Some(v) = q.pop_front() {
        if v % l == l - 1 {
            return true;
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationEstimate {
    pub l: usize,
    pub p: f64,
    pub trials: usize,
    pub spanning_fraction: f64,
    pub stderr: f64,
}

impl PercolationEstimate {
    fn from_hits(l: usize, p: f64, trials: usize, hits: usize) -> Self {
        let f = hits as f64 / trials as f64;
        Self { l, p, trials, spanning_fraction: f, stderr: (f * (1.0 - f) / trials as f64).sqrt() }
    }
}

/// Spanning fraction per grid point; trial `t` at grid index `i` uses
/// stream `i·trials + t` of the master seed.
pub fn spanning_curve(l: usize, grid: &[f64], trials: usize, seed: u64) -> Result<Vec<PercolationEstimate>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial required".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(i, &p)| {
            check_args(l, p)?;
            let hits = (0..trials)
                .into_par_iter()
                .filter(|&t| spans(&generate_with(l, p, seed, &mut trial_rng(seed, (i * trials + t) as u64))))
                .count();
            Ok(PercolationEstimate::from_hits(l, p, trials, hits))
        })
        .collect()
}

/// Linear interpolation of the first crossing of `level` along a curve.
pub fn crossing_of(curve: &[PercolationEstimate], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if (a.spanning_fraction - level) * (b.spanning_fraction - level) <= 0.0 && a.spanning_fraction != b.spanning_fraction {
            Some(a.p + (level - a.spanning_fraction) * (b.p - a.p) / (b.spanning_fraction - a.spanning_fraction))
        } else if a.spanning_fraction == level {
            Some(a.p)
        } else {
            None
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondSource {
    /// Bonds open with the exact walker success probability `p_n(λ)`.
    Formula,
    /// Each bond runs its own walker for `n` even measurements.
    Walker,
}

/// Bond lattice whose bonds survive when the vertical-chain walker is
/// absorbed within `n_budget` even measurements.
pub fn from_bundo(l: usize, lambda: f64, n_budget: usize, seed: u64, source: BondSource) -> Result<BondLattice> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} outside (0, 1)")));
    }
    let p = success_probability(lambda, n_budget);
    check_args(l, p)?;
    let mut rng = trial_rng(seed, 0);
    match source {
        BondSource::Formula => Ok(generate_with(l, p, seed, &mut rng)),
        BondSource::Walker => {
            let n = l * (l - 1);
            let mut draw = || walker_succeeds(lambda, n_budget, &mut rng);
            let horizontal = (0..n).map(|_| draw()).collect();
            let vertical = (0..n).map(|_| draw()).collect();
            Ok(BondLattice { l, horizontal, vertical, p, seed })
        }
    }
}

fn walker_succeeds<R: Rng>(lambda: f64, n: usize, rng: &mut R) -> bool {
    let mut k = 1usize;
    for _ in 0..n {
        let (_, toward) = crate::walk::step_probs(lambda, k);
        if rng.random::<f64>() < toward {
            k -= 1;
            if k == 0 {
                return true;
            }
        } else {
            k += 1;
        }
    }
    false
}

/// Spanning fraction of lattices generated by [`from_bundo`].
pub fn bundo_spanning(l: usize, lambda: f64, n_budget: usize, trials: usize, seed: u64, source: BondSource) -> Result<PercolationEstimate> {
    let hits: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| from_bundo(l, lambda, n_budget, seed.wrapping_add(t as u64), source).map(|lat| spans(&lat)))
        .collect();
    let hits = hits?.into_iter().filter(|h| *h).count();
    Ok(PercolationEstimate::from_hits(l, success_probability(lambda, n_budget), trials, hits))
}

/// Site percolation: every node open with probability `p`, crossing through
/// open nearest neighbours.
pub fn site_spans(l: usize, p: f64, rng: &mut impl Rng) -> bool {
    let open: Vec<bool> = (0..l * l).map(|_| rng.random::<f64>() < p).collect();
    let (left, right) = (l * l, l * l + 1);
    let mut uf = UnionFind::new(l * l + 2);
    for r in 0..l {
        for c in 0..l {
            let v = r * l + c;
            if !open[v] {
                continue;
            }
            if c == 0 {
                uf.union(left, v);
            }
            if c == l - 1 {
                uf.union(right, v);
            }
            if c + 1 < l && open[v + 1] {
                uf.union(v, v + 1);
            }
            if r + 1 < l && open[v + l] {
                uf.union(v, v + l);
            }
        }
    }
    uf.equiv(left, right)
}

pub fn site_spanning_curve(l: usize, grid: &[f64], trials: usize, seed: u64) -> Result<Vec<PercolationEstimate>> {
    grid.iter()
        .enumerate()
        .map(|(i, &p)| {
            check_args(l, p)?;
            let hits = (0..trials).into_par_iter().filter(|&t| site_spans(l, p, &mut trial_rng(seed, (i * trials + t) as u64))).count();
            Ok(PercolationEstimate::from_hits(l, p, trials, hits))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        assert!(spans(&generate(8, 1.0, 1).unwrap()));
        assert!(!spans(&generate(8, 0.0, 1).unwrap()));
        assert_eq!(generate(5, 0.3, 2).unwrap().bond_count(), 2 * 5 * 4);
    }

    #[test]
    fn single_row() {
        let mut lat = generate(6, 0.0, 0).unwrap();
        for c in 0..5 {
            lat.horizontal[2 * 5 + c] = true;
        }
        assert!(spans(&lat));
        assert!(spans_bfs(&lat));
    }
}
