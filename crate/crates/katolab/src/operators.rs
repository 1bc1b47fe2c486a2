//! Dense Hermitian operator algebra: eigendecomposition, spectral
//! projections, resolvents and reduced resolvents, plus the 1D and radial
//! Schrodinger discretizers every model problem is built on.
//!
//! Matrices built by the discretizers carry an explicit tridiagonal storage
//! so large grids route to the bisection solver instead of the dense path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tridiag;

pub type C64 = Complex64;

/// Default relative Hermiticity tolerance.
pub const DEFAULT_HERM_TOL: f64 = 1e-12;

/// Default cluster tolerance is this multiple of the spectral radius.
pub const CLUSTER_TOL_FACTOR: f64 = 1e-9;

#[derive(Clone, Debug)]
enum Storage {
    Dense(DMatrix<C64>),
    Tridiagonal { diag: Vec<f64>, off: Vec<f64> },
}

/// Square complex matrix certified Hermitian within a relative tolerance.
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    storage: Storage,
    herm_tol: f64,
}

impl HermitianMatrix {
    /// Certify and wrap a dense complex matrix, symmetrizing the roundoff
    /// part so later algebra sees an exactly Hermitian operator.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tol(m, DEFAULT_HERM_TOL)
    }

    pub fn with_tol(m: DMatrix<C64>, herm_tol: f64) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c || r == 0 {
            return Err(Error::InvalidArgument {
                reason: "matrix must be square and nonempty",
            });
        }
        let mut deviation = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                scale = scale.max(m[(i, j)].norm());
                deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        let tol = herm_tol * scale.max(1.0);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        let half = C64::new(0.5, 0.0);
        let sym = (&m + m.adjoint()) * half;
        Ok(Self {
            storage: Storage::Dense(sym),
            herm_tol,
        })
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    /// Real symmetric tridiagonal matrix given by its diagonal and
    /// off-diagonal; `off.len()` must be `diag.len() - 1`.
    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument {
                reason: "tridiagonal needs off.len() == diag.len() - 1",
            });
        }
        if let Some(i) = diag.iter().chain(off.iter()).position(|x| !x.is_finite()) {
            return Err(Error::InvalidPotentialSample { index: i });
        }
        Ok(Self {
            storage: Storage::Tridiagonal { diag, off },
            herm_tol: DEFAULT_HERM_TOL,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Tridiagonal { diag, .. } => diag.len(),
        }
    }

    pub fn herm_tol(&self) -> f64 {
        self.herm_tol
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Tridiagonal { diag, off } => {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else if i.abs_diff(j) == 1 {
                    C64::new(off[i.min(j)], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Tridiagonal { diag, off } => {
                let n = diag.len();
                DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        C64::new(diag[i], 0.0)
                    } else if i.abs_diff(j) == 1 {
                        C64::new(off[i.min(j)], 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            }
        }
    }

    pub fn as_tridiagonal(&self) -> Option<(&[f64], &[f64])> {
        match &self.storage {
            Storage::Tridiagonal { diag, off } => Some((diag, off)),
            Storage::Dense(_) => None,
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        match &self.storage {
            Storage::Dense(m) => m * v,
            Storage::Tridiagonal { diag, off } => {
                let n = diag.len();
                DVector::from_fn(n, |i, _| {
                    let mut s = v[i] * diag[i];
                    if i > 0 {
                        s += v[i - 1] * off[i - 1];
                    }
                    if i + 1 < n {
                        s += v[i + 1] * off[i];
                    }
                    s
                })
            }
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Storage::Tridiagonal { diag, off } => diag
                .iter()
                .chain(off.iter())
                .map(|x| x.abs())
                .fold(0.0, f64::max),
        }
    }

    /// `self + beta * other`, staying tridiagonal when both operands are.
    pub fn plus_scaled(&self, beta: f64, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidArgument {
                reason: "dimension mismatch in plus_scaled",
            });
        }
        match (&self.storage, &other.storage) {
            (
                Storage::Tridiagonal { diag: d1, off: o1 },
                Storage::Tridiagonal { diag: d2, off: o2 },
            ) => {
                let diag = d1.iter().zip(d2).map(|(a, b)| a + beta * b).collect();
                let off = o1.iter().zip(o2).map(|(a, b)| a + beta * b).collect();
                HermitianMatrix::tridiagonal(diag, off)
            }
            _ => {
                let b = C64::new(beta, 0.0);
                HermitianMatrix::with_tol(self.to_dense() + other.to_dense() * b, 1e-10)
            }
        }
    }
}

/// Ascending eigenvalues with an orthonormal frame and a gap clustering.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector of `eigenvalues[k]`.
    pub vectors: DMatrix<C64>,
    /// Consecutive index groups whose internal gaps are <= `cluster_tol`.
    pub clusters: Vec<Vec<usize>>,
    pub cluster_tol: f64,
}

impl SpectralDecomposition {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    /// Sum of v v* over the given eigenvector indices.
    pub fn outer_sum(&self, indices: &[usize]) -> DMatrix<C64> {
        let n = self.vectors.nrows();
        let mut p = DMatrix::zeros(n, n);
        for &k in indices {
            let v = self.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        p
    }

    /// Index of the cluster whose nearest eigenvalue is within `tol` of
    /// `value`, if any.
    pub fn cluster_near(&self, value: f64, tol: f64) -> Option<usize> {
        self.clusters.iter().position(|c| {
            c.iter()
                .any(|&k| (self.eigenvalues[k] - value).abs() <= tol)
        })
    }

    /// V f(Lambda) V*: apply a real function to the eigenvalues.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        self.map_eigenvalues_complex(|x| C64::new(f(x), 0.0))
    }

    /// Same with a complex symbol, e.g. the phase exp(-i t lambda).
    pub fn map_eigenvalues_complex(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let n = self.vectors.nrows();
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            let w = f(self.eigenvalues[k]);
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let v = self.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }
}

/// Make the largest-magnitude component of each column real and positive.
fn fix_phases(vectors: &mut DMatrix<C64>) {
    let (n, cols) = vectors.shape();
    for k in 0..cols {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for i in 0..n {
            let mag = vectors[(i, k)].norm();
            if mag > best_mag + 1e-15 {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let phase = vectors[(best, k)] / best_mag;
            let correction = phase.conj();
            for i in 0..n {
                vectors[(i, k)] *= correction;
            }
        }
    }
}

fn cluster_indices(eigenvalues: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..eigenvalues.len() {
        match clusters.last_mut() {
            Some(c) if eigenvalues[i] - eigenvalues[*c.last().unwrap()] <= tol => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Full eigendecomposition with ascending eigenvalues and the phase
/// convention of `fix_phases`. `cluster_tol: None` uses
/// `CLUSTER_TOL_FACTOR * spectral radius`.
pub fn eig(h: &HermitianMatrix, cluster_tol: Option<f64>) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let (eigenvalues, mut vectors) = match &h.storage {
        Storage::Dense(m) => {
            let se = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
                .ok_or(Error::DecompositionFailed)?;
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
            let values: Vec<f64> = idx.iter().map(|&k| se.eigenvalues[k]).collect();
            let mut sorted = DMatrix::zeros(n, n);
            for (col, &k) in idx.iter().enumerate() {
                sorted.set_column(col, &se.eigenvectors.column(k));
            }
            (values, sorted)
        }
        Storage::Tridiagonal { diag, off } => {
            let (values, vecs) = tridiag::lowest_eigenpairs(diag, off, n);
            let mut m = DMatrix::zeros(n, n);
            for (col, v) in vecs.iter().enumerate() {
                for i in 0..n {
                    m[(i, col)] = C64::new(v[i], 0.0);
                }
            }
            (values, m)
        }
    };
    fix_phases(&mut vectors);
    let radius = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = cluster_tol.unwrap_or(CLUSTER_TOL_FACTOR * radius);
    let clusters = cluster_indices(&eigenvalues, tol);
    let decomposition = SpectralDecomposition {
        eigenvalues,
        vectors,
        clusters,
        cluster_tol: tol,
    };
    if n <= 256 {
        validate_decomposition(h, &decomposition)?;
    }
    Ok(decomposition)
}

fn validate_decomposition(h: &HermitianMatrix, d: &SpectralDecomposition) -> Result<()> {
    let v = &d.vectors;
    let gram = v.adjoint() * v;
    let n = h.dim();
    let mut ortho_dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            ortho_dev = ortho_dev.max((gram[(i, j)] - C64::new(expected, 0.0)).norm());
        }
    }
    if ortho_dev > 1e-10 {
        return Err(Error::DecompositionFailed);
    }
    let mut recon = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let col = v.column(k);
        let lam = d.eigenvalues[k];
        for i in 0..n {
            for j in 0..n {
                recon[(i, j)] += col[i] * col[j].conj() * lam;
            }
        }
    }
    let mut recon_dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            recon_dev = recon_dev.max((recon[(i, j)] - h.entry(i, j)).norm());
        }
    }
    if recon_dev > 1e-9 * h.max_abs().max(1.0) {
        return Err(Error::DecompositionFailed);
    }
    Ok(())
}

/// Orthogonal projection with cached rank.
#[derive(Clone, Debug)]
pub struct OrthogonalProjection {
    pub matrix: HermitianMatrix,
    pub rank: usize,
}

impl OrthogonalProjection {
    /// Certify an arbitrary Hermitian matrix as a projection (P^2 = P).
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let m = matrix.to_dense();
        let sq = &m * &m;
        let mut dev = 0.0f64;
        let mut trace = C64::new(0.0, 0.0);
        let n = m.nrows();
        for i in 0..n {
            trace += m[(i, i)];
            for j in 0..n {
                dev = dev.max((sq[(i, j)] - m[(i, j)]).norm());
            }
        }
        if dev > 1e-10 {
            return Err(Error::NotAProjectionPair {
                reason: "matrix is not idempotent",
            });
        }
        let rank = trace.re.round();
        if (trace.re - rank).abs() > 1e-8 || trace.im.abs() > 1e-10 || rank < 0.0 {
            return Err(Error::NotAProjectionPair {
                reason: "trace is not a nonnegative integer",
            });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    /// Projection onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(cols: &DMatrix<C64>) -> Result<Self> {
        let p = cols * cols.adjoint();
        Self::new(HermitianMatrix::with_tol(p, 1e-10)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }

    /// Complementary projection 1 - P.
    pub fn complement(&self) -> Result<Self> {
        let n = self.dim();
        let m = DMatrix::<C64>::identity(n, n) - self.to_dense();
        Self::new(HermitianMatrix::with_tol(m, 1e-10)?)
    }
}

/// Spectral projection onto the open interval (a, b).
pub fn spectral_projection(h: &HermitianMatrix, interval: (f64, f64)) -> Result<OrthogonalProjection> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::InvalidArgument {
            reason: "interval must satisfy a < b",
        });
    }
    let d = eig(h, None)?;
    let guard = d.cluster_tol.max(f64::MIN_POSITIVE);
    for &lam in &d.eigenvalues {
        for endpoint in [a, b] {
            if (lam - endpoint).abs() <= guard {
                return Err(Error::EndpointHitsSpectrum {
                    endpoint,
                    tol: guard,
                });
            }
        }
    }
    let indices: Vec<usize> = (0..d.eigenvalues.len())
        .filter(|&k| a < d.eigenvalues[k] && d.eigenvalues[k] < b)
        .collect();
    let p = d.outer_sum(&indices);
    Ok(OrthogonalProjection {
        matrix: HermitianMatrix::with_tol(p, 1e-10)?,
        rank: indices.len(),
    })
}

/// Reduced resolvent at eigenvalue E0: zero on the E0 eigenspace,
/// (lambda - E0)^{-1} on every other eigenspace.
pub fn reduced_resolvent(h: &HermitianMatrix, e0: f64) -> Result<HermitianMatrix> {
    let d = eig(h, None)?;
    let guard = d.cluster_tol.max(f64::MIN_POSITIVE);
    let cluster = d
        .cluster_near(e0, guard)
        .ok_or(Error::E0NotInSpectrum { e0, tol: guard })?;
    let n = h.dim();
    let mut s = DMatrix::<C64>::zeros(n, n);
    for (ci, c) in d.clusters.iter().enumerate() {
        if ci == cluster {
            continue;
        }
        for &k in c {
            let w = 1.0 / (d.eigenvalues[k] - e0);
            let col = d.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    s[(i, j)] += col[i] * col[j].conj() * w;
                }
            }
        }
    }
    HermitianMatrix::with_tol(s, 1e-10)
}

/// Resolvent (H - z)^{-1} for z off the spectrum.
pub fn resolvent(h: &HermitianMatrix, z: C64) -> Result<DMatrix<C64>> {
    let d = eig(h, None)?;
    let dist = d
        .eigenvalues
        .iter()
        .map(|&lam| (C64::new(lam, 0.0) - z).norm())
        .fold(f64::INFINITY, f64::min);
    if dist <= 1e-12 {
        return Err(Error::ResolventPole { dist });
    }
    let n = h.dim();
    let mut r = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let w = C64::new(1.0, 0.0) / (C64::new(d.eigenvalues[k], 0.0) - z);
        let col = d.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                r[(i, j)] += col[i] * col[j].conj() * w;
            }
        }
    }
    Ok(r)
}

/// Spectral norm of a general complex matrix (largest singular value),
/// computed from the Hermitian product.
pub fn operator_norm_2(m: &DMatrix<C64>) -> f64 {
    let gram = m.adjoint() * m;
    let h = match HermitianMatrix::with_tol(gram, 1e-8) {
        Ok(h) => h,
        Err(_) => return f64::NAN,
    };
    match eig(&h, None) {
        Ok(d) => d
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt(),
        Err(_) => f64::NAN,
    }
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm_2(h: &HermitianMatrix) -> Result<f64> {
    Ok(eig(h, None)?.spectral_radius())
}

/// Largest entry magnitude of a dense complex matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Uniform Dirichlet grid: n interior nodes x_min + i h, h = (x_max - x_min)/(n+1).
#[derive(Clone, Copy, Debug)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid {
                reason: "need finite x_min < x_max",
            });
        }
        if n < 2 {
            return Err(Error::InvalidGrid {
                reason: "need at least 2 interior points",
            });
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n as f64 + 1.0)
    }

    /// Interior node i in 0..n.
    pub fn node(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.node(i))).collect()
    }
}

/// Second-order Dirichlet discretization of -d^2/dx^2 + V on the grid.
pub fn discretize_1d(grid: &Grid1D, v: &[f64]) -> Result<HermitianMatrix> {
    if v.len() != grid.n() {
        return Err(Error::InvalidArgument {
            reason: "potential sample count must match grid size",
        });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidPotentialSample { index: i });
    }
    let h2 = grid.h() * grid.h();
    let diag: Vec<f64> = v.iter().map(|&vi| 2.0 / h2 + vi).collect();
    let off = vec![-1.0 / h2; grid.n() - 1];
    HermitianMatrix::tridiagonal(diag, off)
}

/// Radial channel operator -d^2/dr^2 + (nu-1)(nu-3)/(4r^2)
/// + ell(ell+nu-2)/r^2 + q(r) on a Dirichlet grid over (0, R).
pub fn radial_channel(
    grid: &Grid1D,
    nu: u32,
    ell: u32,
    q: impl Fn(f64) -> f64,
) -> Result<HermitianMatrix> {
    if grid.x_min() < 0.0 {
        return Err(Error::NegativeRadius {
            x_min: grid.x_min(),
        });
    }
    if nu < 2 {
        return Err(Error::InvalidArgument {
            reason: "radial channel needs nu >= 2",
        });
    }
    let nu_f = nu as f64;
    let ell_f = ell as f64;
    let channel_coeff = (nu_f - 1.0) * (nu_f - 3.0) / 4.0 + ell_f * (ell_f + nu_f - 2.0);
    let samples: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| channel_coeff / (r * r) + q(r))
        .collect();
    discretize_1d(grid, &samples)
}
