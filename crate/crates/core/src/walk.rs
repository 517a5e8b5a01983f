//! The position-dependent walker of the vertical-chain B-undo procedure:
//! exact success probabilities by trajectory enumeration and by dynamic
//! programming, per-step decompositions and threshold crossings.

use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest budget accepted by trajectory enumeration.
pub const ENUMERATION_LIMIT: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkParams<T> {
    pub lambda: T,
    pub n_max: usize,
}

impl<T: Real> WalkParams<T> {
    pub fn new(lambda: T, n_max: usize) -> Result<Self> {
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(Error::InvalidArgument(format!("lambda {} outside (0, 1)", lambda)));
        }
        Ok(Self { lambda, n_max })
    }
}

/// Outcome probabilities `(p0, p1)` at walker position `k ≥ 1`:
///
/// `p0 = (1 + λ^{2k+2}) / (1 + λ² + λ^{2k} + λ^{2k+2})`,
/// `p1 = (λ² + λ^{2k}) / (1 + λ² + λ^{2k} + λ^{2k+2})`.
///
/// Outcome 1 moves the walker one step towards the origin.
pub fn step_probs<T: Real>(lambda: T, k: usize) -> (T, T) {
    let l2 = lambda * lambda;
    let l2k = l2.powi(k as i32);
    let den = T::one() + l2 + l2k + l2k * l2;
    let p1 = (l2 + l2k) / den;
    (T::one() - p1, p1)
}

/// First-passage decomposition: `per_k[j]` is the probability of reaching
/// the origin at exactly `j + 1` steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessDecomposition<T> {
    pub lambda: T,
    pub per_k: Vec<T>,
}

impl<T: Real> SuccessDecomposition<T> {
    pub fn total(&self) -> T {
        self.per_k.iter().copied().sum()
    }

    pub fn cumulative(&self) -> Vec<T> {
        self.per_k
            .iter()
            .scan(T::zero(), |acc, p| {
                *acc = *acc + *p;
                Some(*acc)
            })
            .collect()
    }
}

/// Dynamic programming over (position, steps used), absorbing at 0.
pub fn success_dp<T: Real>(lambda: T, n: usize) -> SuccessDecomposition<T> {
    let mut dist = vec![T::zero(); n + 2];
    dist[1] = T::one();
    let mut per_k = Vec::with_capacity(n);
    for step in 0..n {
        let mut next = vec![T::zero(); n + 2];
        let mut absorbed = T::zero();
        for k in 1..=(step + 1).min(n) {
            let w = dist[k];
            if w == T::zero() {
                continue;
            }
            let (away, toward) = step_probs(lambda, k);
            if k == 1 {
                absorbed = absorbed + w * toward;
            } else {
                next[k - 1] = next[k - 1] + w * toward;
            }
            next[k + 1] = next[k + 1] + w * away;
        }
        per_k.push(absorbed);
        dist = next;
    }
    SuccessDecomposition { lambda, per_k }
}

/// Explicit enumeration of every trajectory that starts at 1, ends at 0
/// and stays strictly positive in between, within `n` steps.
pub fn success_enumerated<T: Real>(lambda: T, n: usize) -> Result<SuccessDecomposition<T>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::BudgetTooLarge(n));
    }
    let mut per_k = vec![T::zero(); n];
    let mut path = Vec::with_capacity(n + 1);
    path.push(1usize);
    enumerate(lambda, n, T::one(), &mut path, &mut per_k);
    Ok(SuccessDecomposition { lambda, per_k })
}

fn enumerate<T: Real>(lambda: T, n: usize, weight: T, path: &mut Vec<usize>, per_k: &mut [T]) {
    let k = *path.last().expect("nonempty path");
    let used = path.len() - 1;
    if k == 0 {
        per_k[used - 1] = per_k[used - 1] + weight;
        return;
    }
    if k > n - used {
        return;
    }
    let (away, toward) = step_probs(lambda, k);
    path.push(k - 1);
    enumerate(lambda, n, weight * toward, path, per_k);
    path.pop();
    path.push(k + 1);
    enumerate(lambda, n, weight * away, path, per_k);
    path.pop();
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dp,
    Enumerate,
    Both,
}

/// Exact success probability `p_n(λ)` with its first-passage decomposition.
/// With [`Method::Both`] the two computations must agree to 1e-12 and the
/// DP result is returned.
pub fn exact_success<T: Real>(params: &WalkParams<T>, method: Method) -> Result<SuccessDecomposition<T>> {
    match method {
        Method::Dp => Ok(success_dp(params.lambda, params.n_max)),
        Method::Enumerate => success_enumerated(params.lambda, params.n_max),
        Method::Both => {
            let a = success_dp(params.lambda, params.n_max);
            let b = success_enumerated(params.lambda, params.n_max)?;
            let gap = a.per_k.iter().zip(&b.per_k).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max);
            if gap.f64() > 1e-12 {
                return Err(Error::InvalidArgument(format!("enumeration and DP differ by {:e}", gap.f64())));
            }
            Ok(a)
        }
    }
}

pub fn success_probability<T: Real>(lambda: T, n: usize) -> T {
    success_dp(lambda, n).total()
}

/// λ with `p_n(λ) = target`, by bisection to 1e-10 in λ.
pub fn crossing<T: Real>(n: usize, target: T) -> Result<T> {
    let hi_edge = T::one() - T::lit(1e-12);
    let p_max = success_probability(hi_edge, n);
    if p_max < target {
        return Err(Error::NoCrossing { p_max: p_max.f64(), target: target.f64() });
    }
    let (mut lo, mut hi) = (T::zero(), hi_edge);
    if success_probability(lo, n) >= target {
        return Ok(lo);
    }
    while hi - lo > T::lit(1e-10) {
        let mid = (lo + hi) * T::lit(0.5);
        if success_probability(mid, n) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// `(λ, p_n(λ))` samples for fixed n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve<T> {
    pub n: usize,
    pub points: Vec<(T, T)>,
}

/// 200 uniform points on [0.01, 0.99].
pub fn default_lambda_grid<T: Real>() -> Vec<T> {
    (0..200).map(|i| T::lit(0.01 + 0.98 * i as f64 / 199.0)).collect()
}

pub fn success_curve<T: Real>(n: usize, lambdas: &[T]) -> SuccessCurve<T> {
    SuccessCurve { n, points: lambdas.par_iter().map(|&l| (l, success_probability(l, n))).collect() }
}

/// Family `{p_k(λ)}` for k = 1..n on the given grid.
pub fn per_k_curves<T: Real>(n: usize, lambdas: &[T]) -> Vec<SuccessDecomposition<T>> {
    lambdas.par_iter().map(|&l| success_dp(l, n)).collect()
}

/// First passage from 1 to 0 of the simple symmetric walk at exactly
/// `k` steps: `C_j / 2^{2j+1}` for `k = 2j + 1`, zero for even k.
pub fn symmetric_first_passage(k: usize) -> f64 {
    if k % 2 == 0 {
        return 0.0;
    }
    let j = (k - 1) / 2;
    let mut catalan = 1.0f64;
    for i in 0..j {
        catalan = catalan * 2.0 * (2 * i + 1) as f64 / (i + 2) as f64;
    }
    catalan / 2f64.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_value() {
        let l: f64 = 0.45;
        let p = success_dp(l, 1).total();
        let want = 2.0 * l * l / (1.0 + 2.0 * l * l + l.powi(4));
        assert!((p - want).abs() < 1e-15);
    }

    #[test]
    fn dp_matches_enumeration() {
        for &l in &[0.1f64, 0.37, 0.8] {
            let a = success_dp(l, 12);
            let b = success_enumerated(l, 12).unwrap();
            for (x, y) in a.per_k.iter().zip(&b.per_k) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn catalan_oracle() {
        assert_eq!(symmetric_first_passage(1), 0.5);
        assert_eq!(symmetric_first_passage(3), 0.125);
        assert!((symmetric_first_passage(5) - 2.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn too_large() {
        assert_eq!(success_enumerated(0.5f64, 41).unwrap_err(), Error::BudgetTooLarge(41));
    }
}
