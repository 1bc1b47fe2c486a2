//! Real symmetric tridiagonal eigensolver: Sturm-count bisection for
//! eigenvalues, inverse iteration for eigenvectors, and an inertia-count
//! solver for the generalized pencil (A, M) with M positive definite.
//!
//! This is the workhorse behind the discretized model problems, where
//! matrices reach dimension ~10^4 and only low-lying eigenpairs matter.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Gershgorin bounds [lo, hi] enclosing the whole spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

fn pivmin(diag: &[f64], off: &[f64]) -> f64 {
    let mut scale: f64 = 1.0;
    for &d in diag {
        scale = scale.max(d.abs());
    }
    for &e in off {
        scale = scale.max(e.abs());
    }
    f64::EPSILON * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

/// Number of eigenvalues strictly below `x` (Sturm pivot count).
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let guard = pivmin(diag, off);
    let mut count = 0usize;
    let mut p = 1.0f64;
    for i in 0..diag.len() {
        let sub = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / p };
        p = diag[i] - x - sub;
        if p.abs() < guard {
            p = -guard;
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th eigenvalue (ascending, 0-based) by bisection.
pub fn eigenvalue_at(diag: &[f64], off: &[f64], index: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 1e-300 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues in ascending order.
pub fn all_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    (0..diag.len())
        .map(|k| eigenvalue_at(diag, off, k))
        .collect()
}

/// Solve (T - lambda) x = b with partial pivoting; overwrites and returns x.
fn solve_shifted(diag: &[f64], off: &[f64], lambda: f64, b: &mut [f64]) {
    let n = diag.len();
    let guard = pivmin(diag, off);
    // Factor on the fly: rows carry (d, u1, u2) after elimination.
    let mut d: Vec<f64> = diag.iter().map(|&x| x - lambda).collect();
    let mut u1: Vec<f64> = off.to_vec();
    let mut u2: Vec<f64> = vec![0.0; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        let sub = off[i];
        if d[i].abs() >= sub.abs() {
            let pivot = if d[i].abs() < guard {
                guard.copysign(if d[i] == 0.0 { 1.0 } else { d[i] })
            } else {
                d[i]
            };
            let m = sub / pivot;
            d[i + 1] -= m * u1[i];
            b[i + 1] -= m * b[i];
        } else {
            // swap rows i and i+1
            let m = d[i] / sub;
            let di1 = d[i + 1];
            d[i] = sub;
            let old_u1 = u1[i];
            u1[i] = di1;
            if i + 1 < n - 1 {
                u2[i] = u1[i + 1];
                u1[i + 1] = -m * u1[i + 1];
            }
            d[i + 1] = old_u1 - m * di1;
            b.swap(i, i + 1);
            b[i + 1] -= m * b[i];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * b[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * b[i + 2];
        }
        let pivot = if d[i].abs() < guard {
            guard.copysign(if d[i] == 0.0 { 1.0 } else { d[i] })
        } else {
            d[i]
        };
        b[i] = s / pivot;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn orthogonalize(v: &mut [f64], others: &[Vec<f64>]) {
    for w in others {
        let dot: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        for (x, y) in v.iter_mut().zip(w.iter()) {
            *x -= dot * y;
        }
    }
}

/// Eigenvector for a precomputed eigenvalue by inverse iteration.
///
/// `cluster` holds already-computed vectors of nearby eigenvalues; the
/// iterate is re-orthogonalized against them so degenerate groups come out
/// orthonormal.
pub fn eigenvector_for(diag: &[f64], off: &[f64], lambda: f64, cluster: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let n = diag.len();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, cluster);
    normalize(&mut v);
    for _ in 0..6 {
        solve_shifted(diag, off, lambda, &mut v);
        orthogonalize(&mut v, cluster);
        normalize(&mut v);
        let res = residual(diag, off, lambda, &v);
        let scale = gershgorin(diag, off);
        let scale = scale.0.abs().max(scale.1.abs()).max(1.0);
        if res <= 1e3 * f64::EPSILON * scale * (n as f64).sqrt() {
            break;
        }
    }
    v
}

fn residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut s = (diag[i] - lambda) * v[i];
        if i > 0 {
            s += off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            s += off[i] * v[i + 1];
        }
        worst = worst.max(s.abs());
    }
    worst
}

/// Lowest `k` eigenpairs, values ascending, vectors unit-norm.
pub fn lowest_eigenpairs(diag: &[f64], off: &[f64], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (lo, hi) = gershgorin(diag, off);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for idx in 0..k.min(diag.len()) {
        let lambda = eigenvalue_at(diag, off, idx);
        let cluster_start = values
            .iter()
            .position(|&v: &f64| (lambda - v).abs() <= 1e-8 * scale)
            .unwrap_or(values.len());
        let cluster = &vectors[cluster_start..];
        let v = eigenvector_for(diag, off, lambda, cluster, 0x5eed ^ idx as u64);
        values.push(lambda);
        vectors.push(v);
    }
    (values, vectors)
}

fn generalized_count_below(
    a_diag: &[f64],
    a_off: &[f64],
    m_diag: &[f64],
    m_off: &[f64],
    x: f64,
) -> usize {
    let n = a_diag.len();
    let mut guard_scale: f64 = 1.0;
    for i in 0..n {
        guard_scale = guard_scale.max((a_diag[i] - x * m_diag[i]).abs());
    }
    let guard = f64::EPSILON * f64::EPSILON * guard_scale;
    let mut count = 0usize;
    let mut p = 1.0f64;
    for i in 0..n {
        let sub = if i == 0 {
            0.0
        } else {
            let e = a_off[i - 1] - x * m_off[i - 1];
            e * e / p
        };
        p = a_diag[i] - x * m_diag[i] - sub;
        if p.abs() < guard {
            p = -guard;
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of the pencil A v = lambda M v (M positive definite),
/// by inertia-count bisection on det(A - x M).
pub fn generalized_lowest(a_diag: &[f64], a_off: &[f64], m_diag: &[f64], m_off: &[f64]) -> f64 {
    let mut lo = -1.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        if generalized_count_below(a_diag, a_off, m_diag, m_off, lo) == 0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..200 {
        if generalized_count_below(a_diag, a_off, m_diag, m_off, hi) >= 1 {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if generalized_count_below(a_diag, a_off, m_diag, m_off, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) + 1e-300 {
            break;
        }
    }
    0.5 * (lo + hi)
}
