//! Divergent-series tooling: Pade approximants, Borel summation of order
//! m with Pade or Taylor continuation of the transform, Stieltjes-moment
//! Hankel tests, the quartic-oscillator ground-state series with its
//! factorial asymptotics, and the product-formula limits (Lie-Trotter
//! error decay, alternating projections).

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::operators::{self, C64, HermitianMatrix, OrthogonalProjection};
use crate::tridiag;

/// Truncated power series a_0 + a_1 z + ... + a_N z^N.
#[derive(Clone, Debug)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument {
                reason: "series needs at least a constant term",
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument {
                reason: "series coefficients must be finite",
            });
        }
        Ok(PowerSeries { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient a_k, zero beyond the stored order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }
}

/// P(z)/Q(z) with Q(0) = 1.
#[derive(Clone, Debug)]
pub struct RationalApproximant {
    p_coeffs: Vec<f64>,
    q_coeffs: Vec<f64>,
}

impl RationalApproximant {
    pub fn numerator(&self) -> &[f64] {
        &self.p_coeffs
    }

    pub fn denominator(&self) -> &[f64] {
        &self.q_coeffs
    }

    pub fn eval(&self, z: f64) -> f64 {
        horner(&self.p_coeffs, z) / horner(&self.q_coeffs, z)
    }
}

fn horner(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

/// Pade approximant f^[n,m] with denominator degree `n` and numerator
/// degree `m`, matching the series through order n + m.
///
/// The Toeplitz system is solved in exact rational arithmetic (every f64
/// coefficient is a dyadic rational), so contact holds identically and
/// block degeneracy is detected as genuine singularity rather than by a
/// pivot threshold; the ill-scaled systems that factorially growing
/// coefficients produce would otherwise drown the contact residual in
/// roundoff.
pub fn pade(series: &PowerSeries, n: usize, m: usize) -> Result<RationalApproximant> {
    if series.coeffs.len() < n + m + 1 {
        return Err(Error::SeriesTooShort {
            needed: n + m + 1,
            have: series.coeffs.len(),
        });
    }
    if series.coeffs.iter().all(|&c| c == 0.0) {
        return Ok(RationalApproximant {
            p_coeffs: vec![0.0],
            q_coeffs: vec![1.0],
        });
    }
    let exact: Vec<BigRational> = series
        .coeffs
        .iter()
        .map(|&c| BigRational::from_float(c).expect("finite by construction"))
        .collect();
    let a = |k: isize| -> BigRational {
        if k < 0 || k as usize >= exact.len() {
            BigRational::zero()
        } else {
            exact[k as usize].clone()
        }
    };
    let mut q_exact = vec![BigRational::one()];
    if n > 0 {
        let rows: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..n)
                    .map(|j| a(m as isize + i as isize - j as isize))
                    .collect();
                row.push(-a((m + i + 1) as isize));
                row
            })
            .collect();
        let solution = solve_exact(rows).ok_or(Error::PadeBlockDegeneracy {
            n,
            m,
            pivot: 0.0,
        })?;
        q_exact.extend(solution);
    }
    let mut p_exact = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut acc = BigRational::zero();
        for j in 0..=k.min(n) {
            acc += &q_exact[j] * a(k as isize - j as isize);
        }
        p_exact.push(acc);
    }
    verify_contact(&exact, &p_exact, &q_exact, n, m)?;
    Ok(RationalApproximant {
        p_coeffs: p_exact.iter().map(rational_to_f64).collect(),
        q_coeffs: q_exact.iter().map(rational_to_f64).collect(),
    })
}

/// Exact Gaussian elimination on an augmented system; None when singular.
fn solve_exact(mut aug: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = aug.len();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot_row);
        for r in col + 1..n {
            if aug[r][col].is_zero() {
                continue;
            }
            let factor = &aug[r][col] / &aug[col][col];
            for c in col..=n {
                let delta = &factor * &aug[col][c];
                aug[r][c] -= delta;
            }
        }
    }
    let mut solution = vec![BigRational::zero(); n];
    for row in (0..n).rev() {
        let mut acc = aug[row][n].clone();
        for c in row + 1..n {
            acc -= &aug[row][c] * &solution[c];
        }
        solution[row] = acc / &aug[row][row];
    }
    Some(solution)
}

/// Taylor coefficients of P/Q by division, compared against the input
/// through order n + m in exact arithmetic.
fn verify_contact(
    a: &[BigRational],
    p: &[BigRational],
    q: &[BigRational],
    n: usize,
    m: usize,
) -> Result<()> {
    let mut c: Vec<BigRational> = Vec::with_capacity(n + m + 1);
    for k in 0..=(n + m) {
        let mut value = p.get(k).cloned().unwrap_or_else(BigRational::zero);
        for j in 1..=k.min(n) {
            value -= &q[j] * &c[k - j];
        }
        if value != a[k] {
            return Err(Error::PadeBlockDegeneracy { n, m, pivot: 0.0 });
        }
        c.push(value);
    }
    Ok(())
}

/// How the Borel transform is continued beyond its disc of convergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BorelContinuation {
    /// Taylor summation when the transform tail has provably converged at
    /// every quadrature argument, diagonal Pade otherwise.
    Auto,
    /// Diagonal Pade of the transform, stepping down in degree past block
    /// degeneracies.
    DiagonalPade,
    /// Plain Taylor summation of the transform.
    TaylorSum,
}

/// Borel sum with the node-doubling quadrature error estimate.
#[derive(Clone, Copy, Debug)]
pub struct BorelSum {
    pub value: f64,
    pub quadrature_error: f64,
}

enum TransformEval {
    Taylor(Vec<f64>),
    Pade(RationalApproximant),
}

impl TransformEval {
    fn eval(&self, w: f64) -> f64 {
        match self {
            TransformEval::Taylor(b) => horner(b, w),
            TransformEval::Pade(r) => r.eval(w),
        }
    }
}

/// Sum of the series at `z` through the order-m Borel transform
/// b_n = a_n/(mn)! and the integral over e^{-t} g(z t^m) dt.
pub fn borel_sum(
    series: &PowerSeries,
    z: f64,
    order_m: usize,
    continuation: BorelContinuation,
) -> Result<BorelSum> {
    if order_m < 1 {
        return Err(Error::InvalidArgument {
            reason: "Borel order must be at least 1",
        });
    }
    if series.coeffs.iter().all(|&c| c == 0.0) {
        return Ok(BorelSum {
            value: 0.0,
            quadrature_error: 0.0,
        });
    }
    let transform: Vec<f64> = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &a)| a / factorial(order_m * k))
        .collect();
    let (nodes, weights) = gauss_laguerre(128);
    let w_max = nodes
        .iter()
        .map(|&t| (z * t.powi(order_m as i32)).abs())
        .fold(0.0, f64::max);
    let evaluator = match continuation {
        BorelContinuation::TaylorSum => TransformEval::Taylor(transform),
        BorelContinuation::DiagonalPade => TransformEval::Pade(continued_transform(
            &transform, z, w_max,
        )?),
        BorelContinuation::Auto => {
            if taylor_tail_negligible(&transform, z, order_m, &nodes, &weights) {
                TransformEval::Taylor(transform)
            } else {
                TransformEval::Pade(continued_transform(&transform, z, w_max)?)
            }
        }
    };
    let quad = |nodes: &[f64], weights: &[f64]| -> f64 {
        nodes
            .iter()
            .zip(weights)
            .map(|(&t, &w)| w * evaluator.eval(z * t.powi(order_m as i32)))
            .sum()
    };
    let (nodes_64, weights_64) = gauss_laguerre(64);
    let coarse = quad(&nodes_64, &weights_64);
    let fine = quad(&nodes, &weights);
    Ok(BorelSum {
        value: fine,
        quadrature_error: (fine - coarse).abs(),
    })
}

/// Whether direct summation of the transform has converged under the
/// quadrature weights: the trailing terms, integrated against e^{-t},
/// must be negligible next to the integral itself.
fn taylor_tail_negligible(
    transform: &[f64],
    z: f64,
    order_m: usize,
    nodes: &[f64],
    weights: &[f64],
) -> bool {
    if transform.len() < 8 {
        return false;
    }
    let mut weighted_value = 0.0f64;
    let mut weighted_tail = 0.0f64;
    for (&t, &w) in nodes.iter().zip(weights) {
        let arg = z * t.powi(order_m as i32);
        let mut partial = 0.0f64;
        let mut power = 1.0f64;
        let mut tail = 0.0f64;
        for (k, &b) in transform.iter().enumerate() {
            let term = b * power;
            partial += term;
            power *= arg;
            if k + 4 >= transform.len() {
                tail += term.abs();
            }
        }
        weighted_value += w * partial;
        weighted_tail += w * tail;
    }
    weighted_tail <= 1e-12 * (weighted_value.abs() + 1.0)
}

/// Diagonal Pade of the transform, stepping down in degree on block
/// degeneracy, with a pole scan along the evaluation ray.
fn continued_transform(transform: &[f64], z: f64, w_max: f64) -> Result<RationalApproximant> {
    let series = PowerSeries::new(transform.to_vec())?;
    let top = (transform.len() - 1) / 2;
    if top == 0 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            have: transform.len(),
        });
    }
    let mut last_err = None;
    for k in (1..=top.min(10)).rev() {
        match pade(&series, k, k) {
            Ok(approx) => {
                scan_for_poles(&approx, z, w_max)?;
                return Ok(approx);
            }
            Err(e @ Error::PadeBlockDegeneracy { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("loop ran at least once"))
}

/// Reject denominator sign changes along the ray of evaluation
/// arguments, locating the offending zero by bisection.
fn scan_for_poles(approx: &RationalApproximant, z: f64, w_max: f64) -> Result<()> {
    let samples = 4096;
    let direction = if z < 0.0 { -1.0 } else { 1.0 };
    let q = |w: f64| horner(&approx.q_coeffs, w);
    let mut previous_w = 0.0;
    let mut previous = q(0.0);
    for i in 1..=samples {
        let w = direction * w_max * i as f64 / samples as f64;
        let value = q(w);
        if value == 0.0 || value.signum() != previous.signum() {
            let (mut lo, mut hi) = (previous_w, w);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if q(mid).signum() == previous.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Err(Error::BorelContinuationObstructed {
                pole: 0.5 * (lo + hi),
            });
        }
        previous_w = w;
        previous = value;
    }
    Ok(())
}

fn factorial(k: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 2..=k {
        acc *= i as f64;
    }
    acc
}

/// Gauss-Laguerre nodes and weights for weight e^{-x} on (0, inf).
/// Nodes come from the Jacobi matrix of the Laguerre recurrence; weights
/// from w_i = x_i / ((n+1) L_{n+1}(x_i))^2, which stays accurate for the
/// extreme nodes where the weights are far below machine epsilon.
fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64).collect();
    let off: Vec<f64> = (1..n).map(|i| i as f64).collect();
    let nodes = tridiag::all_eigenvalues(&diag, &off);
    let weights = nodes
        .iter()
        .map(|&x| {
            let mut prev = 1.0f64;
            let mut cur = 1.0 - x;
            for k in 1..=n {
                let next = ((2 * k + 1) as f64 - x) * cur - k as f64 * prev;
                prev = cur;
                cur = next / (k + 1) as f64;
            }
            let scaled = (n + 1) as f64 * cur;
            x / (scaled * scaled)
        })
        .collect();
    (nodes, weights)
}

/// Strict positive definiteness of the Hankel matrices [mu_{i+j}] with
/// mu_n = (-1)^n a_n, for sizes 1..=k_max.
pub fn hankel_stieltjes_test(series: &PowerSeries, k_max: usize) -> Result<Vec<bool>> {
    if 2 * k_max > series.order() {
        return Err(Error::SeriesTooShort {
            needed: 2 * k_max + 1,
            have: series.coeffs.len(),
        });
    }
    let mu: Vec<f64> = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, &a)| if n % 2 == 0 { a } else { -a })
        .collect();
    let mut verdicts = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let hankel = DMatrix::from_fn(k, k, |i, j| mu[i + j]);
        let h = HermitianMatrix::from_real(hankel)?;
        let d = operators::eig(&h, None)?;
        let smallest = d.eigenvalues[0];
        let scale = d.spectral_radius().max(1.0);
        verdicts.push(smallest > 1e-10 * scale);
    }
    Ok(verdicts)
}

/// Ground-state series E_0(beta) = 1 + sum a_n beta^n of p^2 + x^2 +
/// beta x^4, exact in rational arithmetic.
///
/// The oscillator basis is conjugated by diag(sqrt(n!) 2^{-n/2}), which
/// turns the position operator into the rational two-band T with
/// (Tv)_m = (m/2) v_{m-1} + v_{m+1}; the quartic coupling is T^4 and the
/// eigenvalues are unchanged.
pub fn bender_wu_exact(n_order: usize, basis_size: usize) -> Result<Vec<BigRational>> {
    let required = 4 * n_order + 8;
    if basis_size < required {
        return Err(Error::TruncationContaminatesOrder {
            order: n_order,
            basis: basis_size,
            required,
        });
    }
    let apply_t = |v: &[BigRational]| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); basis_size];
        for (m, slot) in out.iter_mut().enumerate() {
            let mut acc = BigRational::zero();
            if m >= 1 {
                acc += BigRational::new(BigInt::from(m), BigInt::from(2)) * &v[m - 1];
            }
            if m + 1 < basis_size {
                acc += v[m + 1].clone();
            }
            *slot = acc;
        }
        out
    };
    let apply_quartic = |v: &[BigRational]| -> Vec<BigRational> {
        let mut out = v.to_vec();
        for _ in 0..4 {
            out = apply_t(&out);
        }
        out
    };
    let mut psi: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); basis_size]];
    psi[0][0] = BigRational::one();
    let mut energies = vec![BigRational::one()];
    for k in 1..=n_order {
        let coupled = apply_quartic(&psi[k - 1]);
        energies.push(coupled[0].clone());
        let mut rhs: Vec<BigRational> = coupled.iter().map(|x| -x.clone()).collect();
        for j in 1..k {
            for m in 0..basis_size {
                rhs[m] += &energies[j] * &psi[k - j][m];
            }
        }
        let mut next = vec![BigRational::zero(); basis_size];
        for m in 1..basis_size {
            next[m] = &rhs[m] / BigRational::from_integer(BigInt::from(2 * m));
        }
        psi.push(next);
    }
    Ok(energies)
}

/// Float view of `bender_wu_exact`.
pub fn bender_wu(n_order: usize, basis_size: usize) -> Result<PowerSeries> {
    let exact = bender_wu_exact(n_order, basis_size)?;
    PowerSeries::new(exact.iter().map(rational_to_f64).collect())
}

/// Conversion that stays accurate for arbitrarily large numerators and
/// denominators: shift each down to the f64 mantissa range separately
/// and restore the exponent difference afterwards.
fn rational_to_f64(value: &BigRational) -> f64 {
    if value.numer().is_zero() {
        return 0.0;
    }
    let shift_n = value.numer().bits().saturating_sub(53);
    let shift_d = value.denom().bits().saturating_sub(53);
    let scaled_numer = (value.numer() >> shift_n).to_f64().unwrap_or(f64::NAN);
    let scaled_denom = (value.denom() >> shift_d).to_f64().unwrap_or(f64::NAN);
    (scaled_numer / scaled_denom) * (shift_n as f64 - shift_d as f64).exp2()
}

/// A quantity of factorial size, carried in log space alongside the f64
/// value (infinite when the magnitude overflows).
#[derive(Clone, Copy, Debug)]
pub struct FactorialGrowth {
    pub value: f64,
    pub sign: i32,
    pub ln_magnitude: f64,
}

/// Leading large-order growth 4 pi^{-3/2} (-1)^{n+1} (3/2)^{n+1/2}
/// Gamma(n+1/2) of the quartic ground-state coefficients.
pub fn bender_wu_asymptotic(n: usize) -> Result<FactorialGrowth> {
    if n < 1 {
        return Err(Error::InvalidArgument {
            reason: "asymptotic order starts at n = 1",
        });
    }
    let pi = std::f64::consts::PI;
    let mut ln_gamma_half = 0.5 * pi.ln();
    for k in 1..=n {
        ln_gamma_half += (k as f64 - 0.5).ln();
    }
    let ln_magnitude =
        (4.0f64).ln() - 1.5 * pi.ln() + (n as f64 + 0.5) * 1.5f64.ln() + ln_gamma_half;
    let sign = if n % 2 == 1 { 1 } else { -1 };
    Ok(FactorialGrowth {
        value: sign as f64 * ln_magnitude.exp(),
        sign,
        ln_magnitude,
    })
}

fn expm_hermitian(h: &HermitianMatrix, t: f64) -> Result<DMatrix<C64>> {
    Ok(operators::eig(h, None)?.map_eigenvalues(|lam| (t * lam).exp()))
}

fn matrix_power(m: &DMatrix<C64>, mut n: usize) -> DMatrix<C64> {
    let mut result = DMatrix::<C64>::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n % 2 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        n /= 2;
    }
    result
}

/// Splitting error |e^{t(A+B)} - (e^{tA/n} e^{tB/n})^n|_2.
pub fn lie_trotter_error(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    t: f64,
    n: usize,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument {
            reason: "Trotter step count must be at least 1",
        });
    }
    let sum = a.plus_scaled(1.0, b)?;
    let exact = expm_hermitian(&sum, t)?;
    let step = expm_hermitian(a, t / n as f64)? * expm_hermitian(b, t / n as f64)?;
    let split = matrix_power(&step, n);
    Ok(operators::operator_norm_2(&(exact - split)))
}

/// (PQ)^n together with its distance to the projection R onto
/// ran P intersect ran Q.
pub fn alternating_projection_limit(
    p: &OrthogonalProjection,
    q: &OrthogonalProjection,
    n: usize,
) -> Result<(DMatrix<C64>, f64)> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidArgument {
            reason: "projection dimensions differ",
        });
    }
    if n < 1 {
        return Err(Error::InvalidArgument {
            reason: "power must be at least 1",
        });
    }
    let sum = HermitianMatrix::with_tol(p.to_dense() + q.to_dense(), 1e-9)?;
    let d = operators::eig(&sum, None)?;
    let shared: Vec<usize> = (0..p.dim())
        .filter(|&k| d.eigenvalues[k] >= 2.0 - 1e-8)
        .collect();
    let intersection = d.outer_sum(&shared);
    let power = matrix_power(&(p.to_dense() * q.to_dense()), n);
    let distance = operators::operator_norm_2(&(&power - &intersection));
    Ok((power, distance))
}
