//! Model problems with closed-form spectral targets: an oscillating
//! potential that embeds an eigenvalue in its continuum, hydrogen cusp
//! diagnostics, sharp Hardy and Rellich constants, bound-state shell counts
//! under a finite nuclear mass, rank-one secular equations, and the
//! log-kernel whose top eigenvalue climbs toward pi/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{radial_channel, Grid1D};
use crate::tridiag;

/// Radial profile `u` on its grid, solving -u'' + V u = E u for the stored
/// energy.
#[derive(Clone, Debug)]
pub struct RadialSolution {
    pub grid: Grid1D,
    pub u: Vec<f64>,
    pub energy: f64,
}

fn wvn_g(r: f64) -> f64 {
    2.0 * r - (2.0 * r).sin()
}

/// Even Taylor series of the closed-form potential, usable below r ~ 1e-2.
fn wvn_series(r: f64) -> f64 {
    let c4 = -224.0 / 3.0;
    let c6 = 2624.0 / 45.0;
    let c8 = -1952.0 / 105.0;
    let c10 = 5_155_648.0 / 14_175.0;
    let c12 = -26_723_648.0 / 66_825.0;
    let c14 = 2_963_868_032.0 / 14_189_175.0;
    let r2 = r * r;
    r2 * r2 * (c4 + r2 * (c6 + r2 * (c8 + r2 * (c10 + r2 * (c12 + r2 * c14)))))
}

fn wvn_closed(r: f64) -> f64 {
    let g = wvn_g(r);
    let s = r.sin();
    let c = r.cos();
    let d = 1.0 + g * g;
    -32.0 * s * (g * g * g * c - 3.0 * g * g * s * s * s + g * c + s * s * s) / (d * d)
}

/// Oscillating long-range potential with the bound state
/// u(r) = sin(r) / (1 + g(r)^2), g = 2r - sin(2r), at energy 1 inside the
/// continuum.  Decays like -8 sin(2r)/r, so it is neither short range nor of
/// one sign.  Defined for r >= 0.
///
/// The closed form cancels catastrophically near the origin, so the even
/// Taylor series takes over below r = 1e-3; the leading term is
/// -(224/3) r^4.
pub fn wvn_potential(r: f64) -> f64 {
    if r < 1e-3 {
        wvn_series(r)
    } else {
        wvn_closed(r)
    }
}

fn wvn_u(r: f64) -> f64 {
    let g = wvn_g(r);
    r.sin() / (1.0 + g * g)
}

/// Sample the embedded bound state on a grid, tagged with its energy 1.
pub fn wvn_eigenfunction(grid: &Grid1D) -> RadialSolution {
    RadialSolution {
        grid: *grid,
        u: grid.sample(wvn_u),
        energy: 1.0,
    }
}

/// Pointwise defect |(-d^2/dr^2 + V - 1) u| of the embedded bound state,
/// evaluated from the exact derivatives of u rather than differences.
pub fn wvn_residual(r: f64) -> f64 {
    let g = wvn_g(r);
    let gp = 2.0 - 2.0 * (2.0 * r).cos();
    let gpp = 4.0 * (2.0 * r).sin();
    let w = 1.0 / (1.0 + g * g);
    let wp = -2.0 * g * gp * w * w;
    let wpp = -2.0 * (gp * gp + g * gpp) * w * w + 8.0 * g * g * gp * gp * w * w * w;
    let s = r.sin();
    let c = r.cos();
    let u = s * w;
    let upp = -s * w + 2.0 * c * wp + s * wpp;
    (-upp + (wvn_potential(r) - 1.0) * u).abs()
}

/// Invert the discrete eigenvalue equation: the unique potential on the grid
/// for which (-Delta_h + V) psi = E psi with Dirichlet ends, namely
/// V_i = E + (psi_{i+1} - 2 psi_i + psi_{i-1}) / (h^2 psi_i).
///
/// Refuses nodes: a sample below 1e-13 of the sup leaves V there a 0/0
/// limit, reported with the offending index.
pub fn eigenfunction_to_potential(grid: &Grid1D, psi: &[f64], energy: f64) -> Result<Vec<f64>> {
    if psi.len() != grid.n() {
        return Err(Error::InvalidArgument {
            reason: "trial state length must match the grid",
        });
    }
    let sup = psi.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    if sup == 0.0 || !sup.is_finite() {
        return Err(Error::InvalidArgument {
            reason: "trial state must be finite and nonzero",
        });
    }
    let h2 = grid.h() * grid.h();
    let n = psi.len();
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        if psi[i].abs() < 1e-13 * sup {
            return Err(Error::NodeInTrialEigenfunction { index: i });
        }
        let left = if i == 0 { 0.0 } else { psi[i - 1] };
        let right = if i + 1 == n { 0.0 } else { psi[i + 1] };
        v.push(energy + (left - 2.0 * psi[i] + right) / (h2 * psi[i]));
    }
    Ok(v)
}

/// Logarithmic slope of a radial wave function at the origin, extrapolated
/// from its first three samples at r = h, 2h, 3h.  The two difference
/// quotients estimate the slope at 3h/2 and 5h/2; eliminating the linear
/// drift leaves an O(h^2) estimate of the slope at 0.
pub fn cusp_ratio(psi: &[f64], h: f64) -> Result<f64> {
    if psi.len() < 3 {
        return Err(Error::InvalidArgument {
            reason: "cusp ratio needs samples at r = h, 2h, 3h",
        });
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGrid {
            reason: "need a positive grid spacing",
        });
    }
    if psi[..3].iter().any(|&p| !(p > 0.0)) {
        return Err(Error::GroundStateIsolationFailed {
            reason: "wave function not positive near the origin",
        });
    }
    let f0 = psi[0].ln();
    let f1 = psi[1].ln();
    let f2 = psi[2].ln();
    let s1 = (f1 - f0) / h;
    let s2 = (f2 - f1) / h;
    Ok(s1 - 1.5 * (s2 - s1))
}

/// Ground-state cusp of a hydrogenic atom in the s-wave channel: the
/// extrapolated logarithmic slope of psi = u/r at the nucleus, paired with
/// the exact target -Z/2.  Convergence is O(h) at the singular endpoint, so
/// agreement within a few multiples of h is the honest expectation.
pub fn hydrogen_cusp(r_max: f64, n: usize, z: f64) -> Result<(f64, f64)> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument {
            reason: "nuclear charge must be positive",
        });
    }
    let grid = Grid1D::new(0.0, r_max, n)?;
    if r_max * z < 40.0 {
        return Err(Error::InvalidGrid {
            reason: "radial box too small to isolate the ground state",
        });
    }
    if grid.h() > 1e-2 {
        return Err(Error::InvalidGrid {
            reason: "grid too coarse for a cusp estimate",
        });
    }
    let ham = radial_channel(&grid, 3, 0, |r| -z / r)?;
    let (d, e) = ham.as_tridiagonal().expect("radial channel is tridiagonal");
    let (energies, mut states) = tridiag::lowest_eigenpairs(d, e, 1);
    if energies[0] >= 0.0 {
        return Err(Error::GroundStateIsolationFailed {
            reason: "lowest channel energy is not a bound state",
        });
    }
    let mut u = states.remove(0);
    if u[0] < 0.0 {
        for x in &mut u {
            *x = -*x;
        }
    }
    let sup = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if u.iter().any(|&x| x < -1e-12 * sup) {
        return Err(Error::GroundStateIsolationFailed {
            reason: "lowest channel state changes sign",
        });
    }
    let psi: Vec<f64> = (0..3).map(|i| u[i] / grid.node(i)).collect();
    Ok((cusp_ratio(&psi, grid.h())?, -z / 2.0))
}

/// Outcome of the shell count: either every shell up to `k_max` binds,
/// carrying k^2 states each, or (at infinite nuclear mass) infinitely many
/// do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShellCount {
    Bounded { k_max: u32, count: u64 },
    Unbounded,
}

/// Bound shells surviving a finite nuclear mass.  With
/// alpha = 1/(mass_ratio + 1), shell k binds while
/// k < sqrt((1 - alpha)/(4 alpha)), which is sqrt(mass_ratio)/2; the total
/// state count is the sum of k^2 up to `k_max`.
pub fn helium_shells(mass_ratio: f64) -> Result<ShellCount> {
    if mass_ratio.is_nan() || mass_ratio <= 0.0 {
        return Err(Error::InvalidMasses { ratio: mass_ratio });
    }
    if mass_ratio.is_infinite() {
        return Ok(ShellCount::Unbounded);
    }
    let alpha = 1.0 / (mass_ratio + 1.0);
    let bound = ((1.0 - alpha) / (4.0 * alpha)).sqrt();
    let floor = bound.floor();
    let k_max = if floor == bound { floor - 1.0 } else { floor }.max(0.0) as u64;
    let count = k_max * (k_max + 1) * (2 * k_max + 1) / 6;
    Ok(ShellCount::Bounded {
        k_max: k_max as u32,
        count,
    })
}

/// Profile of the rank-one attraction, labeled by how the surviving
/// eigenvalue leaves -1 as the quadratic confinement beta x^2 switches on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiKind {
    /// psi^2 = 1/(pi (1 + x^2)); the shift opens like sqrt(beta).
    InvSqrt,
    /// psi^2 = |x|/(1 + x^2)^2; the shift opens like beta ln(1/beta).
    LogCase,
    /// psi^2 = 2/(pi (1 + x^2)^2); the shift opens linearly in beta.
    Inv,
}

/// Secular function F(E) = integral of psi^2 / (beta x^2 - E) for E < 0.
/// F is strictly increasing on the negative axis, diverges as E -> 0-, and
/// never exceeds 1/2 at E = -2, so F(E) = 1 pins the surviving eigenvalue
/// of beta x^2 - |psi><psi| uniquely inside (-2, 0).
pub fn rank_one_secular(beta: f64, kind: PsiKind, energy: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument {
            reason: "coupling beta must be positive and finite",
        });
    }
    if !(energy < 0.0) {
        return Err(Error::InvalidArgument {
            reason: "secular function is defined below the continuum edge",
        });
    }
    // Substituting x = tan t folds the line onto (0, pi/2); the envelope
    // below is psi^2 (1 + x^2), absorbing the Jacobian.
    let f = |t: f64| {
        let x = t.tan();
        let envelope = match kind {
            PsiKind::InvSqrt => 1.0 / PI,
            PsiKind::LogCase => x.abs() / (1.0 + x * x),
            PsiKind::Inv => 2.0 / (PI * (1.0 + x * x)),
        };
        envelope / (beta * x * x - energy)
    };
    Ok(2.0 * adaptive_simpson(&f, 0.0, PI / 2.0, 1e-12, 60))
}

/// Root of the secular equation in (-2, 0) by bisection; the integrand is
/// resolved to 1e-12 at every probe, so the root inherits that accuracy.
pub fn rank_one_eigenvalue(beta: f64, kind: PsiKind) -> Result<f64> {
    let mut lo = -2.0;
    if rank_one_secular(beta, kind, lo)? >= 1.0 {
        return Err(Error::EigenvalueAbsorbed {
            beta,
            lo,
            hi: 0.0,
        });
    }
    // Walk the upper bracket toward the continuum edge until the secular
    // function crosses 1.  Probing at a fixed tiny energy instead would pin
    // an integral of size 1/|E| down to absolute 1e-12, which f64 cannot do.
    let mut hi = -0.5;
    while rank_one_secular(beta, kind, hi)? <= 1.0 {
        hi *= 0.5;
        if hi > -1e-13 {
            return Err(Error::EigenvalueAbsorbed {
                beta,
                lo: -2.0,
                hi: 0.0,
            });
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if rank_one_secular(beta, kind, mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss-Legendre nodes and weights on [-1, 1] from the Jacobi matrix of the
/// three-term recurrence.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; m];
    let off: Vec<f64> = (1..m)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let nodes = tridiag::all_eigenvalues(&diag, &off);
    let weights = nodes
        .iter()
        .map(|&x| {
            let v = tridiag::eigenvector_for(&diag, &off, x, &[], 11);
            2.0 * v[0] * v[0]
        })
        .collect();
    (nodes, weights)
}

fn integrate_panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let center = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (x, w) in nodes.iter().zip(&weights) {
            total += w * half * f(center + half * x);
        }
    }
    total
}

fn odd_reciprocal_square_sum(terms: u64) -> f64 {
    let mut sum = 0.0;
    for k in (1..=terms).rev() {
        let d = (2 * k - 1) as f64;
        sum += 1.0 / (d * d);
    }
    // Trigamma tail: sum beyond N is psi'(N + 1/2) / 4.
    let x = terms as f64 + 0.5;
    sum + 0.25 * (1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x))
}

/// Numerical side of the pi/2 commutator bound.  Discretizes the positive
/// symmetrized kernel (1/pi) ln coth(|s - s'|/2) in log momentum on
/// [k_min, k_max] with n_log points and returns its top eigenvalue, bundled
/// with quadrature evaluations of the two classical constants the bound
/// rests on: the dilogarithm integral equal to pi^2/4 and the odd
/// reciprocal-square sum equal to pi^2/8.
///
/// The top eigenvalue increases with the window and converges to pi/2 from
/// below as the window and resolution grow; windows narrower than
/// [1e-3, 1e3] are rejected as truncating visible spectrum.
pub fn kato_half_pi(k_min: f64, k_max: f64, n_log: usize) -> Result<(f64, f64, f64)> {
    if !(k_min > 0.0 && k_max > k_min) || !k_max.is_finite() {
        return Err(Error::InvalidArgument {
            reason: "momentum window must satisfy 0 < k_min < k_max",
        });
    }
    if n_log < 2 {
        return Err(Error::InvalidArgument {
            reason: "log grid needs at least two points",
        });
    }
    if k_min > 1e-3 || k_max < 1e3 {
        return Err(Error::SpectralTruncation { k_min, k_max });
    }
    let n = n_log;
    let dt = (k_max.ln() - k_min.ln()) / (n as f64 - 1.0);

    // Toeplitz row of cell integrals.  Off-diagonal cells use the midpoint
    // value; the singular diagonal cell integrates ln(2/tau) exactly and the
    // smooth remainder by Gauss-Legendre.
    let mut row = vec![0.0; n];
    let delta = 0.5 * dt;
    let remainder = integrate_panels(
        &|tau: f64| (1.0 / (0.5 * tau).tanh()).ln() - (2.0 / tau).ln(),
        0.0,
        delta,
        1,
        24,
    );
    row[0] = (2.0 / PI) * (delta * ((2.0 / delta).ln() + 1.0) + remainder);
    for (m, slot) in row.iter_mut().enumerate().skip(1) {
        *slot = (dt / PI) * (1.0 / (0.5 * m as f64 * dt).tanh()).ln();
    }

    // Endpoint half-weights keep the Nystrom matrix symmetric.
    let sqrt_half = 0.5f64.sqrt();
    let dvec: Vec<f64> = (0..n)
        .map(|i| if i == 0 || i == n - 1 { sqrt_half } else { 1.0 })
        .collect();

    // The kernel is entrywise positive, so power iteration from a positive
    // vector converges geometrically in the spectral gap.
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut top = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..5000 {
        let mut w = vec![0.0; n];
        for (i, slot) in w.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &vj) in v.iter().enumerate() {
                acc += row[i.abs_diff(j)] * dvec[j] * vj;
            }
            *slot = dvec[i] * acc;
        }
        let rq: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        top = rq;
        if (rq - prev).abs() < 1e-13 * rq.abs().max(1.0) {
            break;
        }
        prev = rq;
    }

    // x = tanh y turns the endpoint-singular dilogarithm integral into a
    // smooth, exponentially decaying one.
    let quarter = integrate_panels(
        &|y: f64| {
            let ratio = if y < 1e-12 { 2.0 } else { 2.0 * y / y.tanh() };
            let sech = 1.0 / y.cosh();
            ratio * sech * sech
        },
        0.0,
        30.0,
        16,
        16,
    );
    let eighth = odd_reciprocal_square_sum(1_000_000);
    Ok((top, quarter, eighth))
}

/// Sharp Hardy constant (nu - 2)^2 / 4 of the s-wave channel in nu >= 3
/// dimensions, bounded from above by a P1 finite element Rayleigh quotient
/// on a log-uniform radial grid spanning [r_max * 1e-22, r_max].
///
/// Element integrals of both the stiffness and the 1/r^2 weighted mass are
/// exact, so the value is variational: it can overshoot the constant but
/// never undershoots it beyond roundoff.  The quotient is scale invariant,
/// hence independent of r_max.
pub fn hardy_constant(nu: u32, r_max: f64, n: usize) -> Result<f64> {
    if nu < 3 {
        return Err(Error::InvalidArgument {
            reason: "Hardy constant needs nu >= 3",
        });
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidGrid {
            reason: "need a positive outer radius",
        });
    }
    if n < 10 {
        return Err(Error::InvalidGrid {
            reason: "log-uniform grid needs at least 10 nodes",
        });
    }
    let c = ((nu - 1) * (nu - 3)) as f64 / 4.0;
    let t0 = (r_max * 1e-22).ln();
    let t1 = r_max.ln();
    let r: Vec<f64> = (0..n)
        .map(|i| (t0 + (t1 - t0) * i as f64 / (n as f64 - 1.0)).exp())
        .collect();
    let nd = n - 2;
    let mut a_diag = vec![0.0; nd];
    let mut a_off = vec![0.0; nd - 1];
    let mut b_diag = vec![0.0; nd];
    let mut b_off = vec![0.0; nd - 1];
    for e in 0..n - 1 {
        let p = r[e];
        let q = r[e + 1];
        let h = q - p;
        let lg = (q / p).ln();
        let k = 1.0 / h;
        let wii = (q * q / p - p - 2.0 * q * lg) / (h * h);
        let wjj = (q - p * p / q - 2.0 * p * lg) / (h * h);
        let wij = ((p + q) * lg - 2.0 * h) / (h * h);
        // Element e couples interior unknowns e-1 and e; contributions that
        // land on the Dirichlet boundary nodes are dropped.
        if e >= 1 {
            a_diag[e - 1] += k + c * wii;
            b_diag[e - 1] += wii;
        }
        if e < nd {
            a_diag[e] += k + c * wjj;
            b_diag[e] += wjj;
        }
        if e >= 1 && e < nd {
            a_off[e - 1] += -k + c * wij;
            b_off[e - 1] += wij;
        }
    }
    Ok(tridiag::generalized_lowest(
        &a_diag, &a_off, &b_diag, &b_off,
    ))
}

/// Quintic smoothstep and its first two derivatives on [0, 1]; C^2 flat at
/// both ends.
fn smoothstep(u: f64) -> (f64, f64, f64) {
    let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    let sp = 30.0 * u * u * (1.0 - u) * (1.0 - u);
    let spp = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
    (s, sp, spp)
}

/// Rellich quotient ||Delta phi|| / ||phi / r^2|| minimized over radial
/// trials phi = r^sigma s(ln r), where s is a C^2 window that is 1 across
/// the bulk of [r_max * 1e-30, r_max] and a short ladder of exponents
/// brackets the optimizer sigma = (4 - nu)/2.  Every trial is admissible,
/// so the result sits above the sharp constant nu (nu - 4) / 4 and
/// approaches it as the window widens.  Below nu = 5 the quotient has no
/// positive lower bound and the request is refused.
pub fn rellich_constant(nu: u32, r_max: f64, n: usize) -> Result<f64> {
    if nu < 5 {
        return Err(Error::RellichNonpositiveRegime { nu });
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidGrid {
            reason: "need a positive outer radius",
        });
    }
    if n < 51 {
        return Err(Error::InvalidGrid {
            reason: "Rellich scan needs at least 51 points",
        });
    }
    let m = if n % 2 == 1 { n } else { n + 1 };
    let t0 = (r_max * 1e-30).ln();
    let t1 = r_max.ln();
    let ht = (t1 - t0) / (m as f64 - 1.0);
    let ramp = ((m - 1) as f64 * 0.15).round().max(4.0);
    let ell = ramp * ht;
    let window = |t: f64| -> (f64, f64, f64) {
        let tau_l = t - t0;
        let tau_r = t1 - t;
        if tau_l < ell {
            let (s, sp, spp) = smoothstep(tau_l / ell);
            (s, sp / ell, spp / (ell * ell))
        } else if tau_r < ell {
            let (s, sp, spp) = smoothstep(tau_r / ell);
            (s, -sp / ell, spp / (ell * ell))
        } else {
            (1.0, 0.0, 0.0)
        }
    };
    let nu_f = f64::from(nu);
    let sigma_star = (4.0 - nu_f) / 2.0;
    let mut best = f64::INFINITY;
    for step in -5i32..=5 {
        let sigma = sigma_star + 0.02 * f64::from(step);
        // In t = ln r both integrals carry the same exponential weight
        // e^(eta t), eta = 2 sigma + nu - 4, and Delta phi reduces to
        // r^(sigma - 2) times the bracket below.
        let eta = 2.0 * sigma + nu_f - 4.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..m {
            let t = t0 + k as f64 * ht;
            let (s, sp, spp) = window(t);
            let weight = (eta * (t - t0)).exp();
            let lap = sigma * (sigma + nu_f - 2.0) * s + (2.0 * sigma + nu_f - 2.0) * sp + spp;
            let simpson = if k == 0 || k == m - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            num += simpson * lap * lap * weight;
            den += simpson * s * s * weight;
        }
        best = best.min((num / den).sqrt());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wvn_series_matches_closed_form_across_the_crossover() {
        for r in [1e-3, 2e-3, 5e-3] {
            let series = wvn_series(r);
            let closed = wvn_closed(r);
            assert!(
                ((series - closed) / series).abs() < 1e-9,
                "r = {r}: series {series:e} vs closed {closed:e}"
            );
        }
    }

    #[test]
    fn wvn_potential_is_quartically_flat_at_the_origin() {
        let v = wvn_potential(1e-4);
        assert!(v.abs() < 1e-14);
        let leading = -224.0 / 3.0 * 1e-16;
        assert!(((v - leading) / leading).abs() < 1e-4);
        assert_eq!(wvn_potential(0.0), 0.0);
    }

    #[test]
    fn wvn_potential_spot_value() {
        assert!((wvn_potential(0.5) - (-3.5694511699789483)).abs() < 1e-12);
    }

    #[test]
    fn wvn_tail_oscillates_like_minus_eight_sin_2r_over_r() {
        let at = |r: f64| r * r * (wvn_potential(r) + 8.0 * (2.0 * r).sin() / r).abs();
        let max = (0..=9000)
            .map(|i| at(10.0 + 0.01 * i as f64))
            .fold(0.0f64, f64::max);
        assert!((max - 23.99952444).abs() < 1e-5);
        assert!((at(20.0) - 15.10069195).abs() < 1e-7);
        assert!((at(40.0) - 3.264096144).abs() < 1e-7);
        assert!((at(80.0) - 23.29354021).abs() < 1e-7);
    }

    #[test]
    fn wvn_eigenfunction_solves_the_equation_at_energy_one() {
        let mut worst = 0.0f64;
        for k in 1..=100_000 {
            worst = worst.max(wvn_residual(1e-3 * k as f64));
        }
        assert!(worst < 1e-6, "max residual {worst:e}");
    }

    #[test]
    fn gaussian_recovers_the_harmonic_potential() {
        let grid = Grid1D::new(-6.0, 6.0, 1200).unwrap();
        let psi = grid.sample(|x| (-0.5 * x * x).exp());
        let v = eigenfunction_to_potential(&grid, &psi, 1.0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..grid.n() {
            let x = grid.node(i);
            if x.abs() <= 4.0 {
                worst = worst.max((v[i] - x * x).abs());
            }
        }
        assert!(worst < 0.01, "worst deviation {worst:e}");
    }

    #[test]
    fn potential_recovery_converges_at_second_order() {
        let err = |n: usize| {
            let grid = Grid1D::new(-6.0, 6.0, n).unwrap();
            let psi = grid.sample(|x| (-0.5 * x * x).exp());
            let v = eigenfunction_to_potential(&grid, &psi, 1.0).unwrap();
            let mut worst = 0.0f64;
            for i in 0..grid.n() {
                let x = grid.node(i);
                if x.abs() <= 3.0 {
                    worst = worst.max((v[i] - x * x).abs());
                }
            }
            worst
        };
        let ratio = err(600) / err(1200);
        assert!(
            (3.0..5.0).contains(&ratio),
            "error ratio {ratio} not O(h^2)"
        );
    }

    #[test]
    fn smoothed_exponential_sees_a_flat_potential_away_from_its_kink() {
        let grid = Grid1D::new(-8.0, 8.0, 1600).unwrap();
        let psi = grid.sample(|x| (-(x * x + 0.25).sqrt()).exp());
        let v = eigenfunction_to_potential(&grid, &psi, -1.0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..grid.n() {
            let x = grid.node(i).abs();
            if (3.0..=6.0).contains(&x) {
                worst = worst.max(v[i].abs());
            }
        }
        assert!(worst < 0.05, "potential plateau off by {worst:e}");
    }

    #[test]
    fn vanishing_sample_is_reported_with_its_index() {
        let grid = Grid1D::new(-5.0, 5.0, 999).unwrap();
        let psi = grid.sample(|x| x);
        match eigenfunction_to_potential(&grid, &psi, 0.0) {
            Err(Error::NodeInTrialEigenfunction { index }) => assert_eq!(index, 499),
            other => panic!("expected a node error, got {other:?}"),
        }
    }

    #[test]
    fn wvn_state_round_trips_through_potential_recovery() {
        let grid = Grid1D::new(0.0, 30.0, 5999).unwrap();
        let sol = wvn_eigenfunction(&grid);
        let v = eigenfunction_to_potential(&grid, &sol.u, sol.energy).unwrap();
        let sup = sol.u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let mut worst = 0.0f64;
        for i in 0..grid.n() {
            if sol.u[i].abs() >= 0.05 * sup {
                worst = worst.max((v[i] - wvn_potential(grid.node(i))).abs());
            }
        }
        assert!(worst < 0.01, "recovered potential off by {worst:e}");
    }

    #[test]
    fn cusp_ratio_is_exact_for_a_pure_exponential() {
        let h = 5e-3;
        let psi: Vec<f64> = (1..=3).map(|i| (-(i as f64) * h).exp()).collect();
        let ratio = cusp_ratio(&psi, h).unwrap();
        assert!((ratio + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hydrogen_cusp_hits_minus_z_over_two() {
        let (ratio, target) = hydrogen_cusp(40.0, 7999, 1.0).unwrap();
        assert_eq!(target, -0.5);
        assert!((ratio - target).abs() < 1e-5, "ratio {ratio}");

        let (ratio, target) = hydrogen_cusp(25.0, 4999, 2.0).unwrap();
        assert_eq!(target, -1.0);
        assert!((ratio - target).abs() < 2e-5, "ratio {ratio}");
    }

    #[test]
    fn hydrogen_ground_energies_match_the_discretized_channel() {
        let grid = Grid1D::new(0.0, 40.0, 7999).unwrap();
        let ham = radial_channel(&grid, 3, 0, |r| -1.0 / r).unwrap();
        let (d, e) = ham.as_tridiagonal().unwrap();
        let (vals, _) = tridiag::lowest_eigenpairs(d, e, 1);
        assert!((vals[0] + 0.24999961).abs() < 1e-7, "E0 = {}", vals[0]);

        let grid = Grid1D::new(0.0, 25.0, 4999).unwrap();
        let ham = radial_channel(&grid, 3, 0, |r| -2.0 / r).unwrap();
        let (d, e) = ham.as_tridiagonal().unwrap();
        let (vals, _) = tridiag::lowest_eigenpairs(d, e, 1);
        assert!((vals[0] + 0.99999375).abs() < 1e-7, "E0 = {}", vals[0]);
    }

    #[test]
    fn angular_barrier_suppresses_the_p_wave_near_the_origin() {
        let grid = Grid1D::new(0.0, 30.0, 5999).unwrap();
        let h = grid.h();

        let psi_near_origin = |ell: u32| {
            let ham = radial_channel(&grid, 3, ell, |r| -1.0 / r).unwrap();
            let (d, e) = ham.as_tridiagonal().unwrap();
            let (_, mut states) = tridiag::lowest_eigenpairs(d, e, 1);
            let u = states.remove(0);
            let psi: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(i, x)| (x / grid.node(i)).abs())
                .collect();
            let sup = psi.iter().fold(0.0f64, |a, &x| a.max(x));
            psi[0] / sup
        };

        assert!(psi_near_origin(0) > 0.5);
        assert!(psi_near_origin(1) < 3.0 * h);
    }

    #[test]
    fn cusp_guards_reject_hopeless_grids() {
        assert!(matches!(
            hydrogen_cusp(40.0, 7999, 0.0),
            Err(Error::InvalidArgument { .. })
        ));
        assert!(matches!(
            hydrogen_cusp(10.0, 1999, 1.0),
            Err(Error::InvalidGrid { .. })
        ));
        assert!(matches!(
            hydrogen_cusp(40.0, 399, 1.0),
            Err(Error::InvalidGrid { .. })
        ));
    }

    #[test]
    fn shell_counts_for_reference_mass_ratios() {
        assert_eq!(
            helium_shells(7294.29954).unwrap(),
            ShellCount::Bounded {
                k_max: 42,
                count: 25585
            }
        );
        assert_eq!(
            helium_shells(99.0).unwrap(),
            ShellCount::Bounded { k_max: 4, count: 30 }
        );
        assert_eq!(helium_shells(f64::INFINITY).unwrap(), ShellCount::Unbounded);
    }

    #[test]
    fn shell_bound_is_strict_at_the_threshold() {
        assert_eq!(
            helium_shells(16.0 - 1e-6).unwrap(),
            ShellCount::Bounded { k_max: 1, count: 1 }
        );
        assert_eq!(
            helium_shells(16.0 + 1e-6).unwrap(),
            ShellCount::Bounded { k_max: 2, count: 5 }
        );
    }

    #[test]
    fn shell_count_grows_with_the_mass_ratio() {
        let mut last = 0u64;
        for ratio in [1.0, 10.0, 99.0, 1000.0, 7294.29954, 1e6] {
            match helium_shells(ratio).unwrap() {
                ShellCount::Bounded { count, .. } => {
                    assert!(count >= last);
                    last = count;
                }
                ShellCount::Unbounded => panic!("finite ratio counted as unbounded"),
            }
        }
    }

    #[test]
    fn invalid_mass_ratios_are_rejected() {
        for bad in [0.0, -3.0, f64::NAN] {
            assert!(matches!(
                helium_shells(bad),
                Err(Error::InvalidMasses { .. })
            ));
        }
    }

    #[test]
    fn rank_one_matches_the_algebraic_root_for_the_slow_profile() {
        for beta in [1e-6, 1e-4, 1e-3, 1e-2] {
            let e = rank_one_eigenvalue(beta, PsiKind::InvSqrt).unwrap();
            let a = ((beta + 4.0).sqrt() - beta.sqrt()) / 2.0;
            let exact = -a * a;
            assert!((e - exact).abs() < 1e-10, "beta {beta:e}: {e} vs {exact}");
        }
    }

    #[test]
    fn rank_one_reference_eigenvalues() {
        let cases = [
            (PsiKind::InvSqrt, 1e-2, -0.90487507802749607),
            (PsiKind::Inv, 1e-5, -0.99999006284837743),
            (PsiKind::Inv, 1e-3, -0.99905950981294312),
            (PsiKind::LogCase, 1e-4, -0.99917819845866130),
            (PsiKind::LogCase, 1e-2, -0.96203467344765703),
        ];
        for (kind, beta, expected) in cases {
            let e = rank_one_eigenvalue(beta, kind).unwrap();
            assert!(
                (e - expected).abs() < 1e-11,
                "{kind:?} at beta {beta:e}: {e} vs {expected}"
            );
        }
    }

    #[test]
    fn secular_function_increases_toward_the_continuum_edge() {
        for kind in [PsiKind::InvSqrt, PsiKind::LogCase, PsiKind::Inv] {
            let mut last = f64::NEG_INFINITY;
            for e in [-1.9, -1.5, -1.0, -0.5, -0.1] {
                let f = rank_one_secular(1e-4, kind, e).unwrap();
                assert!(f > last, "{kind:?}: F({e}) = {f} did not increase");
                last = f;
            }
            assert!(rank_one_secular(1e-4, kind, -2.0).unwrap() < 1.0);
        }
    }

    #[test]
    fn weak_coupling_opens_at_the_advertised_rates() {
        let e = rank_one_eigenvalue(1e-10, PsiKind::InvSqrt).unwrap();
        assert!((e + 1.0 - 1e-5).abs() < 1e-9);
        let e = rank_one_eigenvalue(1e-10, PsiKind::Inv).unwrap();
        assert!((e + 1.0).abs() < 1e-9);
    }

    #[test]
    fn rank_one_guards() {
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                rank_one_eigenvalue(bad, PsiKind::Inv),
                Err(Error::InvalidArgument { .. })
            ));
        }
        assert!(matches!(
            rank_one_secular(1e-3, PsiKind::Inv, 0.5),
            Err(Error::InvalidArgument { .. })
        ));
    }

    #[test]
    fn classical_constants_come_out_to_quadrature_accuracy() {
        let (_, quarter, eighth) = kato_half_pi(1e-3, 1e3, 200).unwrap();
        assert!((quarter - PI * PI / 4.0).abs() < 1e-6);
        assert!((eighth - PI * PI / 8.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_top_eigenvalue_climbs_toward_half_pi_with_the_window() {
        let (narrow, _, _) = kato_half_pi(1e-3, 1e3, 1000).unwrap();
        let (middle, _, _) = kato_half_pi(1e-5, 1e5, 1500).unwrap();
        let (wide, _, _) = kato_half_pi(1e-7, 1e7, 2000).unwrap();
        assert!((narrow - 1.5206590336).abs() < 1e-6, "narrow {narrow}");
        assert!((middle - 1.5499528648).abs() < 1e-6, "middle {middle}");
        assert!((wide - 1.5592328305).abs() < 1e-6, "wide {wide}");
        assert!(narrow < middle && middle < wide && wide < PI / 2.0);
    }

    #[test]
    fn narrow_momentum_windows_are_rejected() {
        assert!(matches!(
            kato_half_pi(1e-2, 1e4, 100),
            Err(Error::SpectralTruncation { .. })
        ));
        assert!(matches!(
            kato_half_pi(1e-4, 500.0, 100),
            Err(Error::SpectralTruncation { .. })
        ));
        assert!(matches!(
            kato_half_pi(0.0, 1e4, 100),
            Err(Error::InvalidArgument { .. })
        ));
        assert!(matches!(
            kato_half_pi(1e-4, 1e4, 1),
            Err(Error::InvalidArgument { .. })
        ));
    }

    #[test]
    fn hardy_constants_for_low_dimensions() {
        let cases = [(3u32, 0.25384957), (4, 1.00384957), (5, 2.25384957)];
        for (nu, expected) in cases {
            let v = hardy_constant(nu, 1e4, 2000).unwrap();
            assert!((v - expected).abs() < 1e-6, "nu = {nu}: {v}");
        }
    }

    #[test]
    fn hardy_value_never_undershoots_the_sharp_constant() {
        for (nu, target) in [(3u32, 0.25), (4, 1.0), (5, 2.25)] {
            for (r_max, n) in [(1e4, 2000), (100.0, 600), (1e6, 1500)] {
                let v = hardy_constant(nu, r_max, n).unwrap();
                assert!(v >= target - 1e-6, "nu {nu}, grid ({r_max}, {n}): {v}");
            }
        }
    }

    #[test]
    fn hardy_quotient_is_scale_invariant_and_tightens_with_resolution() {
        let a = hardy_constant(3, 1.0, 2000).unwrap();
        let b = hardy_constant(3, 1e4, 2000).unwrap();
        assert!((a - b).abs() < 1e-9);
        let coarse = hardy_constant(3, 1e4, 500).unwrap();
        assert!(b < coarse);
    }

    #[test]
    fn hardy_guards() {
        assert!(matches!(
            hardy_constant(2, 1e4, 2000),
            Err(Error::InvalidArgument { .. })
        ));
        assert!(matches!(
            hardy_constant(3, 1e4, 5),
            Err(Error::InvalidGrid { .. })
        ));
        assert!(matches!(
            hardy_constant(3, -1.0, 2000),
            Err(Error::InvalidGrid { .. })
        ));
    }

    #[test]
    fn rellich_quotients_sit_just_above_the_sharp_constants() {
        for (nu, target) in [(5u32, 1.25), (6, 3.0), (8, 8.0)] {
            let v = rellich_constant(nu, 1e4, 4001).unwrap();
            assert!(v >= target - 1e-6, "nu {nu}: {v} dipped below {target}");
            assert!(v <= target * 1.05, "nu {nu}: {v} more than 5% above {target}");
        }
    }

    #[test]
    fn rellich_is_scale_invariant() {
        let a = rellich_constant(5, 1.0, 2001).unwrap();
        let b = rellich_constant(5, 1e4, 2001).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn rellich_refuses_dimensions_without_a_positive_constant() {
        assert!(matches!(
            rellich_constant(4, 1e4, 4001),
            Err(Error::RellichNonpositiveRegime { nu: 4 })
        ));
        assert!(matches!(
            rellich_constant(5, 1e4, 10),
            Err(Error::InvalidGrid { .. })
        ));
        assert!(matches!(
            rellich_constant(5, 0.0, 4001),
            Err(Error::InvalidGrid { .. })
        ));
    }
}
