//! Seeded random inputs shared by the test suites and the CLI: Hermitian
//! matrices, unit vectors, and orthogonal projections of chosen rank.
//!
//! Everything here is a pure function of the supplied RNG, so a fixed seed
//! reproduces an experiment bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::operators::{HermitianMatrix, OrthogonalProjection, C64};

/// Complex standard Gaussian entry.
fn gaussian(rng: &mut impl Rng) -> C64 {
    // Box-Muller on two uniforms; good enough for test matrices.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * u2.cos(), r * u2.sin())
}

pub fn complex_gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random Hermitian matrix (G + G*)/2 scaled to unit max entry.
pub fn hermitian(rng: &mut impl Rng, n: usize) -> HermitianMatrix {
    let g = complex_gaussian_matrix(rng, n, n);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    HermitianMatrix::new(h / C64::new(scale, 0.0)).expect("symmetrized matrix is Hermitian")
}

/// Random real diagonal matrix with entries spread over [lo, hi].
pub fn real_diagonal(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> HermitianMatrix {
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(rng.gen_range(lo..hi), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    HermitianMatrix::new(d).expect("diagonal matrix is Hermitian")
}

/// Random unit vector.
pub fn unit_vector(rng: &mut impl Rng, n: usize) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(n, |_, _| gaussian(rng));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// Orthonormalize columns in place by modified Gram-Schmidt; returns the
/// number of columns kept (deficient columns are dropped).
pub fn orthonormal_columns(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (rows, cols) = m.shape();
    let mut q: Vec<DVector<C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = DVector::from_column_slice(m.column(j).as_slice());
        for u in &q {
            let coef = u.dotc(&v);
            v -= u * coef;
        }
        let norm = v.norm();
        if norm > 1e-10 {
            q.push(v / C64::new(norm, 0.0));
        }
    }
    let mut out = DMatrix::zeros(rows, q.len());
    for (j, u) in q.iter().enumerate() {
        out.set_column(j, u);
    }
    out
}

/// Random orthogonal projection of the given rank.
pub fn projection(rng: &mut impl Rng, n: usize, rank: usize) -> OrthogonalProjection {
    assert!(rank <= n, "rank must not exceed dimension");
    if rank == 0 {
        let z = DMatrix::<C64>::zeros(n, n);
        return OrthogonalProjection::new(HermitianMatrix::new(z).unwrap()).unwrap();
    }
    loop {
        let g = complex_gaussian_matrix(rng, n, rank);
        let q = orthonormal_columns(&g);
        if q.ncols() == rank {
            return OrthogonalProjection::from_orthonormal_columns(&q)
                .expect("orthonormal columns give a projection");
        }
    }
}

/// A pair (P, Q) of rank-k projections with ||P - Q|| roughly `closeness`:
/// Q is P conjugated by exp of a small random anti-Hermitian generator.
pub fn near_projection_pair(
    rng: &mut impl Rng,
    n: usize,
    rank: usize,
    closeness: f64,
) -> (OrthogonalProjection, OrthogonalProjection) {
    let p = projection(rng, n, rank);
    let g = complex_gaussian_matrix(rng, n, n);
    let anti = (&g - g.adjoint()) * C64::new(0.5, 0.0);
    let scale = crate::operators::operator_norm_2(&anti).max(1e-300);
    let gen = anti * C64::new(closeness / scale, 0.0);
    let u = matrix_exp_antihermitian(&gen);
    let q_dense = &u * p.to_dense() * u.adjoint();
    let q = OrthogonalProjection::new(HermitianMatrix::with_tol(q_dense, 1e-9).unwrap()).unwrap();
    (p, q)
}

/// exp(G) for anti-Hermitian G via the eigendecomposition of -iG.
fn matrix_exp_antihermitian(g: &DMatrix<C64>) -> DMatrix<C64> {
    let minus_i = C64::new(0.0, -1.0);
    let herm = HermitianMatrix::with_tol(g * minus_i, 1e-8).expect("-iG is Hermitian");
    let d = crate::operators::eig(&herm, None).expect("eig of Hermitian generator");
    let n = herm.dim();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let phase = C64::new(0.0, d.eigenvalues[k]).exp();
        let col = d.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj() * phase;
            }
        }
    }
    out
}
