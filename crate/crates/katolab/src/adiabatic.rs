//! Kato dynamics along a one-parameter Hamiltonian family: the transport
//! W' = [P', P] W intertwining spectral projections, Schrodinger evolution
//! at scaled time, the O(1/T) adiabatic defect, and Berry-phase extraction
//! for closed rank-1 paths.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{self, max_abs, C64, HermitianMatrix};

/// Selector for the tracked eigenvalue band.
#[derive(Clone, Copy, Debug)]
pub enum Band {
    /// The cluster containing the k-th eigenvalue in ascending order.
    Index(usize),
    /// All eigenvalues strictly inside (lo, hi).
    Interval(f64, f64),
}

/// A family s in [0,1] -> H(s) with a tracked isolated band.
pub struct OperatorPath {
    h: Box<dyn Fn(f64) -> HermitianMatrix + Send + Sync>,
    pub band: Band,
    pub gap_floor: f64,
    pub derivative_step: Option<f64>,
}

/// Kato transport sampled on the integration grid.
#[derive(Clone, Debug)]
pub struct TransportResult {
    pub s_grid: Vec<f64>,
    /// W(s_i), unitary to 1e-8 at every grid point.
    pub w: Vec<DMatrix<C64>>,
    /// sup_s of the evolution leak out of the band, when an evolution was
    /// compared against.
    pub defect: Option<f64>,
    /// Unit holonomy overlap for closed rank-1 paths.
    pub phase: Option<C64>,
}

impl OperatorPath {
    pub fn new(
        h: impl Fn(f64) -> HermitianMatrix + Send + Sync + 'static,
        band: Band,
    ) -> Self {
        OperatorPath {
            h: Box::new(h),
            band,
            gap_floor: 1e-6,
            derivative_step: None,
        }
    }

    pub fn with_gap_floor(mut self, floor: f64) -> Self {
        self.gap_floor = floor;
        self
    }

    pub fn with_derivative_step(mut self, h_s: f64) -> Self {
        self.derivative_step = Some(h_s);
        self
    }

    pub fn hamiltonian(&self, s: f64) -> HermitianMatrix {
        (self.h)(s)
    }
}

/// Band data at one parameter value.
#[derive(Debug)]
struct BandSample {
    projector: DMatrix<C64>,
    lambda: f64,
    rank: usize,
    vector: DVector<C64>,
}

fn sample_band(path: &OperatorPath, s: f64) -> Result<BandSample> {
    let h = path.hamiltonian(s);
    let d = operators::eig(&h, None)?;
    let n = h.dim();
    let indices: Vec<usize> = match path.band {
        Band::Index(k) => {
            if k >= n {
                return Err(Error::InvalidArgument {
                    reason: "band index out of range",
                });
            }
            d.clusters
                .iter()
                .find(|c| c.contains(&k))
                .expect("clusters partition the index range")
                .clone()
        }
        Band::Interval(lo, hi) => (0..n)
            .filter(|&i| lo < d.eigenvalues[i] && d.eigenvalues[i] < hi)
            .collect(),
    };
    if indices.is_empty() {
        return Err(Error::InvalidArgument {
            reason: "band selector matches no eigenvalue",
        });
    }
    let mut gap = f64::INFINITY;
    for (j, &mu) in d.eigenvalues.iter().enumerate() {
        if indices.contains(&j) {
            continue;
        }
        for &i in &indices {
            gap = gap.min((d.eigenvalues[i] - mu).abs());
        }
    }
    if gap < path.gap_floor {
        return Err(Error::BandCollision {
            s,
            gap,
            floor: path.gap_floor,
        });
    }
    let lambda = indices.iter().map(|&i| d.eigenvalues[i]).sum::<f64>() / indices.len() as f64;
    Ok(BandSample {
        projector: d.outer_sum(&indices),
        lambda,
        rank: indices.len(),
        vector: d.vectors.column(indices[0]).into_owned(),
    })
}

/// Central-difference derivative of the band projector.
fn projector_derivative(path: &OperatorPath, s: f64, h_s: f64) -> Result<DMatrix<C64>> {
    let plus = sample_band(path, s + h_s)?;
    let minus = sample_band(path, s - h_s)?;
    if plus.rank != minus.rank {
        return Err(Error::InvalidArgument {
            reason: "band rank changes along the path",
        });
    }
    Ok((plus.projector - minus.projector) / C64::new(2.0 * h_s, 0.0))
}

fn default_step(path: &OperatorPath, steps: usize) -> f64 {
    path.derivative_step
        .unwrap_or_else(|| (1e-4f64).min(0.01 / steps as f64))
}

/// Transport generator A(s) with iA = [P'(s), P(s)]; Hermitian, traceless,
/// and off-diagonal with respect to the band splitting.
pub fn kato_generator(path: &OperatorPath, s: f64) -> Result<HermitianMatrix> {
    let h_s = default_step(path, 100);
    let p = sample_band(path, s)?.projector;
    let dp = projector_derivative(path, s, h_s)?;
    let commutator = &dp * &p - &p * &dp;
    HermitianMatrix::with_tol(commutator * C64::new(0.0, -1.0), 1e-7)
}

/// One classical 4th-order step of V' = K(s) V followed by polar
/// re-unitarization, with K evaluated through the supplied closure.
fn rk4_unitary_step(
    k: &mut impl FnMut(f64) -> Result<DMatrix<C64>>,
    k_left: &DMatrix<C64>,
    s: f64,
    ds: f64,
    v: &DMatrix<C64>,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let k_mid = k(s + 0.5 * ds)?;
    let k_right = k(s + ds)?;
    let half = C64::new(0.5 * ds, 0.0);
    let k1 = k_left * v;
    let k2 = &k_mid * (v + &k1 * half);
    let k3 = &k_mid * (v + &k2 * half);
    let k4 = &k_right * (v + &k3 * C64::new(ds, 0.0));
    let sixth = C64::new(ds / 6.0, 0.0);
    let raw = v + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * sixth;
    Ok((reunitarize(&raw)?, k_right))
}

/// Nearest unitary: W (W*W)^{-1/2}, with the residual drift checked.
fn reunitarize(w: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = w.nrows();
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::IntegratorFailure {
            drift: f64::INFINITY,
        });
    }
    let gram = w.adjoint() * w;
    let sym = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let h = HermitianMatrix::with_tol(sym, f64::INFINITY)?;
    let d = operators::eig(&h, None)?;
    let inv_sqrt = d.map_eigenvalues(|lam| 1.0 / lam.max(0.0).sqrt());
    let fixed = w * inv_sqrt;
    let drift = max_abs(&(fixed.adjoint() * &fixed - DMatrix::<C64>::identity(n, n)));
    if !(drift <= 1e-6) {
        return Err(Error::IntegratorFailure { drift });
    }
    Ok(fixed)
}

/// Drive V' = K(s) V from s = 0 to 1 on a uniform grid, returning V at
/// every grid point.
fn evolve_unitary(
    mut k: impl FnMut(f64) -> Result<DMatrix<C64>>,
    n: usize,
    steps: usize,
) -> Result<(Vec<f64>, Vec<DMatrix<C64>>)> {
    let ds = 1.0 / steps as f64;
    let mut s_grid = Vec::with_capacity(steps + 1);
    let mut out = Vec::with_capacity(steps + 1);
    let mut v = DMatrix::<C64>::identity(n, n);
    let mut k_left = k(0.0)?;
    s_grid.push(0.0);
    out.push(v.clone());
    for i in 0..steps {
        let s = i as f64 * ds;
        let (next, k_right) = rk4_unitary_step(&mut k, &k_left, s, ds, &v)?;
        v = next;
        k_left = k_right;
        s_grid.push((i + 1) as f64 * ds);
        out.push(v.clone());
    }
    Ok((s_grid, out))
}

/// Integrate W' = [P'(s), P(s)] W across [0,1].
pub fn kato_transport(path: &OperatorPath, steps: usize) -> Result<TransportResult> {
    if steps < 10 {
        return Err(Error::InvalidArgument {
            reason: "steps must be at least 10",
        });
    }
    let h_s = default_step(path, steps);
    let start = sample_band(path, 0.0)?;
    let n = start.projector.nrows();
    let rank0 = start.rank;
    let generator = |s: f64| -> Result<DMatrix<C64>> {
        let p = sample_band(path, s)?;
        if p.rank != rank0 {
            return Err(Error::InvalidArgument {
                reason: "band rank changes along the path",
            });
        }
        let dp = projector_derivative(path, s, h_s)?;
        Ok(&dp * &p.projector - &p.projector * &dp)
    };
    let (s_grid, w) = evolve_unitary(generator, n, steps)?;
    let h0 = path.hamiltonian(0.0).to_dense();
    let h1 = path.hamiltonian(1.0).to_dense();
    let closed = max_abs(&(h1 - h0)) <= 1e-10;
    let phase = if closed && rank0 == 1 {
        let overlap = start.vector.dotc(&(w.last().expect("nonempty grid") * &start.vector));
        let norm = overlap.norm();
        (norm > 1e-12).then(|| overlap / C64::new(norm, 0.0))
    } else {
        None
    };
    Ok(TransportResult {
        s_grid,
        w,
        defect: None,
        phase,
    })
}

/// Solve dU/ds = -i T H(s) U on [0,1], returning U at every grid point.
pub fn schrodinger_evolve(
    path: &OperatorPath,
    t_scale: f64,
    steps: usize,
) -> Result<Vec<DMatrix<C64>>> {
    if steps < 10 {
        return Err(Error::InvalidArgument {
            reason: "steps must be at least 10",
        });
    }
    if !(t_scale >= 0.0) {
        return Err(Error::InvalidArgument {
            reason: "time scale T must be nonnegative",
        });
    }
    let n = path.hamiltonian(0.0).dim();
    let factor = C64::new(0.0, -t_scale);
    let (_, u) = evolve_unitary(|s| Ok(path.hamiltonian(s).to_dense() * factor), n, steps)?;
    Ok(u)
}

/// sup over the grid of the leak norm |(1 - P(s)) U_T(s) P(0)|_2, with the
/// band eigenvalue removed from the generator so only inter-band error
/// remains in the integration.
pub fn adiabatic_defect(path: &OperatorPath, t_scale: f64, steps: usize) -> Result<f64> {
    if steps < 10 {
        return Err(Error::InvalidArgument {
            reason: "steps must be at least 10",
        });
    }
    if !(t_scale >= 0.0) {
        return Err(Error::InvalidArgument {
            reason: "time scale T must be nonnegative",
        });
    }
    let start = sample_band(path, 0.0)?;
    let n = start.projector.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let generator = |s: f64| -> Result<DMatrix<C64>> {
        let band = sample_band(path, s)?;
        let shifted = path.hamiltonian(s).to_dense() - &id * C64::new(band.lambda, 0.0);
        Ok(shifted * C64::new(0.0, -t_scale))
    };
    let (s_grid, u) = evolve_unitary(generator, n, steps)?;
    let mut worst = 0.0f64;
    for (i, s) in s_grid.iter().enumerate() {
        let p_s = sample_band(path, *s)?.projector;
        let leak = (&id - &p_s) * &u[i] * &start.projector;
        worst = worst.max(operators::operator_norm_2(&leak));
    }
    Ok(worst)
}

/// Holonomy angle arg<phi(0), W(1) phi(0)> in (-pi, pi] for a closed path
/// with a rank-1 band; Kato transport carries no dynamical phase, so no
/// subtraction is needed.
pub fn berry_phase(path: &OperatorPath, steps: usize) -> Result<f64> {
    let h0 = path.hamiltonian(0.0).to_dense();
    let h1 = path.hamiltonian(1.0).to_dense();
    let deviation = max_abs(&(h1 - h0));
    if deviation > 1e-10 {
        return Err(Error::PathNotClosed { deviation });
    }
    let start = sample_band(path, 0.0)?;
    if start.rank != 1 {
        return Err(Error::HolonomyIsAMatrix { rank: start.rank });
    }
    let transport = kato_transport(path, steps)?;
    let overlap = transport.phase.ok_or(Error::InvalidArgument {
        reason: "holonomy overlap vanished",
    })?;
    let angle = overlap.arg();
    if angle <= -std::f64::consts::PI {
        Ok(angle + 2.0 * std::f64::consts::PI)
    } else {
        Ok(angle)
    }
}

/// H(s) = cos(pi s) sigma_z + sin(pi s) sigma_x with the lower band
/// tracked; open path rotating the quantization axis by pi.
pub fn two_level_rotation() -> OperatorPath {
    OperatorPath::new(
        |s| {
            let a = std::f64::consts::PI * s;
            HermitianMatrix::from_real(DMatrix::from_row_slice(
                2,
                2,
                &[a.cos(), a.sin(), a.sin(), -a.cos()],
            ))
            .expect("real symmetric 2x2")
        },
        Band::Index(0),
    )
    .with_gap_floor(0.5)
}

/// Closed loop n(s).sigma at Bloch colatitude theta, upper band tracked.
pub fn colatitude_loop(theta: f64) -> OperatorPath {
    OperatorPath::new(
        move |s| {
            let phi = 2.0 * std::f64::consts::PI * s;
            let (nx, ny, nz) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            HermitianMatrix::new(DMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(nz, 0.0),
                    C64::new(nx, -ny),
                    C64::new(nx, ny),
                    C64::new(-nz, 0.0),
                ],
            ))
            .expect("Pauli combination is Hermitian")
        },
        Band::Index(1),
    )
    .with_gap_floor(0.5)
}

/// Two-level rotation extended by a third level at energy 1 + gap with a
/// fixed 0.1 coupling to the second level; middle band tracked.
pub fn three_level_gap(gap: f64) -> OperatorPath {
    OperatorPath::new(
        move |s| {
            let a = std::f64::consts::PI * s;
            HermitianMatrix::from_real(DMatrix::from_row_slice(
                3,
                3,
                &[
                    a.cos(),
                    a.sin(),
                    0.0,
                    a.sin(),
                    -a.cos(),
                    0.1,
                    0.0,
                    0.1,
                    1.0 + gap,
                ],
            ))
            .expect("real symmetric 3x3")
        },
        Band::Index(1),
    )
    .with_gap_floor(1e-3)
}
