//! Resonance module `M = { k in Z^l : k . lambda = 0 }`, restricted to
//! `|k| = sum |k_i| <= N`, and the numerical non-resonance margin.

use std::cmp::Ordering;

use crate::error::{ErknError, Result};
use crate::scalar::Scalar;

/// Largest order accepted by [`resonance_scan`].
pub const MAX_SCAN_ORDER: u32 = 12;

const MAX_ENUMERATED: u64 = 20_000_000;

/// Result of enumerating the integer lattice up to `|k| <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan<T> {
    /// Non-zero `k` with `|k . lambda| <= tol`.
    pub module_vectors: Vec<Vec<i64>>,
    /// One minimal-`|k|` representative per non-resonant class `k + M`,
    /// closed under negation.
    pub representatives: Vec<Vec<i64>>,
    pub order: u32,
    pub tol: T,
}

impl<T: Scalar> ResonanceScan<T> {
    pub fn is_resonant(&self, k: &[i64]) -> bool {
        self.module_vectors.iter().any(|m| m == k)
    }
}

/// `|k| = sum |k_i|`.
pub fn l1_norm(k: &[i64]) -> u64 {
    k.iter().map(|x| x.unsigned_abs()).sum()
}

pub(crate) fn dot<T: Scalar>(k: &[i64], lambda: &[T]) -> T {
    k.iter()
        .zip(lambda)
        .map(|(&ki, &li)| T::from_i64(ki).expect("small integer") * li)
        .sum()
}

/// Number of `k in Z^l` with `|k| <= n`.
fn lattice_ball_size(l: usize, n: u32) -> u64 {
    // count[d][r] = number of vectors in Z^d with |k| <= r, built by d
    let n = n as usize;
    let mut count = vec![1u64; n + 1];
    for _ in 0..l {
        let prev = count.clone();
        for r in 0..=n {
            let mut c = prev[r];
            for a in 1..=r {
                c = c.saturating_add(prev[r - a].saturating_mul(2));
            }
            count[r] = c;
        }
    }
    count[n]
}

/// Every `k in Z^l` with `|k| <= n`, in lexicographic order.
pub(crate) fn enumerate_ball(l: usize, n: u32) -> Vec<Vec<i64>> {
    fn rec(prefix: &mut Vec<i64>, left: i64, l: usize, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == l {
            out.push(prefix.clone());
            return;
        }
        for v in -left..=left {
            prefix.push(v);
            rec(prefix, left - v.abs(), l, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(l), n as i64, l, &mut out);
    out
}

/// Default tolerance `1e-9 * max_j lambda_j`.
pub fn default_tolerance<T: Scalar>(lambda: &[T]) -> T {
    let m = lambda.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    T::lit(1e-9) * m
}

/// Enumerates `|k| <= order`, collecting the resonance module and a
/// representative set for the remaining classes.
///
/// Two vectors lie in the same class `k + M` exactly when their dot products
/// with `lambda` agree, so classes are formed by clustering `k . lambda`
/// values that lie within `tol` of each other.
pub fn resonance_scan<T: Scalar>(lambda: &[T], order: u32, tol: T) -> Result<ResonanceScan<T>> {
    if order == 0 {
        return Err(ErknError::InvalidArgument(
            "scan order must be at least 1".into(),
        ));
    }
    if order > MAX_SCAN_ORDER {
        return Err(ErknError::Resource(format!(
            "scan order {order} exceeds the limit {MAX_SCAN_ORDER}"
        )));
    }
    if !(tol > T::zero()) {
        return Err(ErknError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let size = lattice_ball_size(lambda.len(), order);
    if size > MAX_ENUMERATED {
        return Err(ErknError::Resource(format!(
            "{size} lattice points for l = {} and N = {order}",
            lambda.len()
        )));
    }

    let mut points: Vec<(T, Vec<i64>)> = enumerate_ball(lambda.len(), order)
        .into_iter()
        .filter(|k| k.iter().any(|&x| x != 0))
        .map(|k| (dot(&k, lambda), k))
        .collect();

    let module_vectors: Vec<Vec<i64>> = points
        .iter()
        .filter(|(d, _)| d.abs() <= tol)
        .map(|(_, k)| k.clone())
        .collect();

    // Classes with positive dot product; each pairs with its negation.
    points.retain(|(d, _)| *d > tol);
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut representatives = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let mut end = start + 1;
        while end < points.len() && points[end].0 - points[end - 1].0 <= tol {
            end += 1;
        }
        let class = &points[start..end];
        let min_norm = class.iter().map(|(_, k)| l1_norm(k)).min().unwrap_or(0);
        // candidates from the class and its mirror, lexicographically smallest wins
        let best = class
            .iter()
            .filter(|(_, k)| l1_norm(k) == min_norm)
            .flat_map(|(_, k)| [k.clone(), negate(k)])
            .min()
            .expect("class is non-empty");
        representatives.push(negate(&best));
        representatives.push(best);
        start = end;
    }
    representatives.sort();

    Ok(ResonanceScan {
        module_vectors,
        representatives,
        order,
        tol,
    })
}

fn negate(k: &[i64]) -> Vec<i64> {
    k.iter().map(|x| -x).collect()
}

/// `min |sin(h/(2 eps) k . lambda)| / sqrt(h)` over non-zero, non-resonant
/// `k` with `|k| <= scan.order`.
///
/// The caller compares this against its own constant `c`.
pub fn nonresonance_margin<T: Scalar>(
    h: T,
    epsilon: T,
    lambda: &[T],
    scan: &ResonanceScan<T>,
) -> Result<T> {
    if !(h > T::zero()) || !(epsilon > T::zero()) {
        return Err(ErknError::InvalidArgument(format!(
            "h and epsilon must be positive, got h = {h}, epsilon = {epsilon}"
        )));
    }
    let scale = h / (epsilon + epsilon);
    let sqrt_h = h.sqrt();
    enumerate_ball(lambda.len(), scan.order)
        .into_iter()
        .filter(|k| k.iter().any(|&x| x != 0))
        .map(|k| (dot(&k, lambda), k))
        .filter(|(d, k)| d.abs() > scan.tol && !scan.is_resonant(k))
        .map(|(d, _)| (scale * d).sin().abs() / sqrt_h)
        .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .ok_or_else(|| ErknError::Domain("no non-resonant candidate vectors".into()))
}
