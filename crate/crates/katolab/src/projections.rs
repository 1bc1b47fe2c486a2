//! Pairs of orthogonal projections: the A = P - Q, B = 1 - P - Q algebra,
//! norm-close and sign unitaries conjugating P into Q, trace index,
//! spectral symmetry of A, corner subspaces, the Halmos two-projection
//! decomposition, and oblique-projection norm identities.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::{self, max_abs, C64, HermitianMatrix, OrthogonalProjection};

/// Eigenvalues of A within this distance of {-1, 0, +1} (and of B within
/// it of {-1, 0, +1}) are assigned to corner subspaces.
pub const CORNER_TOL: f64 = 1e-8;

/// A validated pair of projections with the cached difference A = P - Q
/// and complement-sum B = 1 - P - Q.
#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pub p: OrthogonalProjection,
    pub q: OrthogonalProjection,
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub norm_pq: f64,
}

/// Dimensions of the four corner subspaces of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CornerDims {
    /// ran P intersect ker Q (A = +1).
    pub in_p_out_q: usize,
    /// ker P intersect ran Q (A = -1).
    pub out_p_in_q: usize,
    /// ran P intersect ran Q (B = -1).
    pub in_both: usize,
    /// ker P intersect ker Q (B = +1).
    pub out_both: usize,
}

/// Halmos decomposition: corner dimensions plus, when the generic part is
/// nonempty, bases of B1 = ran P and B2 = ker P inside it together with
/// the commuting positive C = |B|, S = |A| on B1 and the unitary W: B1 ->
/// B2 that assemble Q as [[C^2, CSW*], [WCS, WS^2W*]].
#[derive(Clone, Debug)]
pub struct HalmosDecomposition {
    pub corners: CornerDims,
    pub generic: Option<HalmosGenericPart>,
}

#[derive(Clone, Debug)]
pub struct HalmosGenericPart {
    /// Orthonormal columns spanning ran P in the generic part.
    pub basis_b1: DMatrix<C64>,
    /// Orthonormal columns spanning ker P in the generic part.
    pub basis_b2: DMatrix<C64>,
    /// |B| restricted to B1 in the `basis_b1` coordinates.
    pub c: DMatrix<C64>,
    /// |A| restricted to B1 in the `basis_b1` coordinates.
    pub s: DMatrix<C64>,
    /// Unitary B1 -> B2 in the basis coordinates.
    pub w: DMatrix<C64>,
}

/// Validate (P, Q) and cache A, B and ||P - Q||.
pub fn pair(p: OrthogonalProjection, q: OrthogonalProjection) -> Result<ProjectionPair> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidArgument {
            reason: "projection dimensions differ",
        });
    }
    let n = p.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let pd = p.to_dense();
    let qd = q.to_dense();
    let a_dense = &pd - &qd;
    let b_dense = &id - &pd - &qd;
    let a2 = &a_dense * &a_dense;
    let pythagoras = max_abs(&(&a2 + &b_dense * &b_dense - &id));
    let anticommutator = max_abs(&(&a_dense * &b_dense + &b_dense * &a_dense));
    let p_comm = max_abs(&(&pd * &a2 - &a2 * &pd));
    let q_comm = max_abs(&(&qd * &a2 - &a2 * &qd));
    let a = HermitianMatrix::with_tol(a_dense, 1e-9)?;
    let b = HermitianMatrix::with_tol(b_dense, 1e-9)?;
    let norm_pq = operators::hermitian_norm_2(&a)?;
    if pythagoras > 1e-10 {
        return Err(Error::NotAProjectionPair {
            reason: "A^2 + B^2 != 1",
        });
    }
    if anticommutator > 1e-10 {
        return Err(Error::NotAProjectionPair {
            reason: "A and B do not anticommute",
        });
    }
    if p_comm > 1e-10 || q_comm > 1e-10 {
        return Err(Error::NotAProjectionPair {
            reason: "A^2 does not commute with P and Q",
        });
    }
    if norm_pq > 1.0 + 1e-12 {
        return Err(Error::NotAProjectionPair {
            reason: "|P-Q| exceeds one",
        });
    }
    Ok(ProjectionPair {
        p,
        q,
        a,
        b,
        norm_pq,
    })
}

/// Unitary U = W (1 - A^2)^{-1/2}, W = QP + (1-Q)(1-P), conjugating P
/// into Q; requires ||P - Q|| < 1.
pub fn kato_unitary(pair: &ProjectionPair) -> Result<DMatrix<C64>> {
    if pair.norm_pq >= 1.0 - 1e-10 {
        return Err(Error::ProjectionsNotNormClose {
            norm: pair.norm_pq,
        });
    }
    let n = pair.p.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let pd = pair.p.to_dense();
    let qd = pair.q.to_dense();
    let w = &qd * &pd + (&id - &qd) * (&id - &pd);
    let d = operators::eig(&pair.a, None)?;
    let inv_sqrt = d.map_eigenvalues(|lam| 1.0 / (1.0 - lam * lam).sqrt());
    Ok(w * inv_sqrt)
}

/// Self-adjoint unitary sgn(B) with U^2 = I conjugating P into Q and Q
/// into P; requires B nonsingular, i.e. ||P - Q|| < 1.
pub fn sgn_unitary(pair: &ProjectionPair) -> Result<DMatrix<C64>> {
    let d = operators::eig(&pair.b, None)?;
    let min_abs = d.eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x.abs()));
    if min_abs < 1e-10 {
        return Err(Error::BSingular { min_abs });
    }
    Ok(d.map_eigenvalues(f64::signum))
}

/// Integer trace of P - Q, equal to rank P - rank Q.
pub fn trace_index(pair: &ProjectionPair) -> Result<i64> {
    let trace: f64 = (0..pair.p.dim()).map(|i| pair.a.entry(i, i).re).sum();
    let rounded = trace.round();
    let dist = (trace - rounded).abs();
    if dist > 1e-6 {
        return Err(Error::NumericalDegradation { trace, dist });
    }
    Ok(rounded as i64)
}

/// Eigenvalue symmetry of A = P - Q: every cluster at lambda outside
/// {-1, 0, 1} is listed with its dimension and the dimension found at
/// -lambda.
pub fn spectral_symmetry(pair: &ProjectionPair) -> Result<Vec<(f64, usize, usize)>> {
    let d = operators::eig(&pair.a, None)?;
    let mut out = Vec::new();
    for cluster in &d.clusters {
        let lam = d.eigenvalues[cluster[0]];
        if lam <= CORNER_TOL || (lam - 1.0).abs() <= CORNER_TOL {
            continue;
        }
        let mirror = d
            .clusters
            .iter()
            .find(|c| (d.eigenvalues[c[0]] + lam).abs() <= CORNER_TOL)
            .map(|c| c.len())
            .unwrap_or(0);
        out.push((lam, cluster.len(), mirror));
    }
    Ok(out)
}

/// Dimensions of the four corner subspaces, read off the +-1 eigenspaces
/// of A and B.
pub fn corner_subspaces(pair: &ProjectionPair) -> Result<CornerDims> {
    let da = operators::eig(&pair.a, None)?;
    let db = operators::eig(&pair.b, None)?;
    let count = |values: &[f64], target: f64| {
        values
            .iter()
            .filter(|&&x| (x - target).abs() <= CORNER_TOL)
            .count()
    };
    Ok(CornerDims {
        in_p_out_q: count(&da.eigenvalues, 1.0),
        out_p_in_q: count(&da.eigenvalues, -1.0),
        in_both: count(&db.eigenvalues, -1.0),
        out_both: count(&db.eigenvalues, 1.0),
    })
}

/// Self-adjoint involution U with UPU = Q and UQU = P: sgn(B) off ker B
/// plus a swap of the two A = +-1 corners. Exists iff those corners have
/// equal dimension.
pub fn symmetry_conjugator(pair: &ProjectionPair) -> Result<DMatrix<C64>> {
    let da = operators::eig(&pair.a, None)?;
    let db = operators::eig(&pair.b, None)?;
    let plus: Vec<usize> = (0..pair.p.dim())
        .filter(|&k| (da.eigenvalues[k] - 1.0).abs() <= CORNER_TOL)
        .collect();
    let minus: Vec<usize> = (0..pair.p.dim())
        .filter(|&k| (da.eigenvalues[k] + 1.0).abs() <= CORNER_TOL)
        .collect();
    if plus.len() != minus.len() {
        return Err(Error::CornerDimensionsDiffer {
            dim_pq: plus.len(),
            dim_cpq: minus.len(),
        });
    }
    let n = pair.p.dim();
    let mut u = db.map_eigenvalues(|lam| {
        if lam.abs() <= CORNER_TOL {
            0.0
        } else {
            lam.signum()
        }
    });
    for (&kp, &km) in plus.iter().zip(&minus) {
        let vp = da.vectors.column(kp);
        let vm = da.vectors.column(km);
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += vp[i] * vm[j].conj() + vm[i] * vp[j].conj();
            }
        }
    }
    Ok(u)
}

/// Halmos two-projection decomposition with respect to P.
pub fn halmos(pair: &ProjectionPair) -> Result<HalmosDecomposition> {
    let corners = corner_subspaces(pair)?;
    let da = operators::eig(&pair.a, None)?;
    let n = pair.p.dim();
    let generic_proj = da.map_eigenvalues(|lam| {
        if lam.abs() > CORNER_TOL && lam.abs() < 1.0 - CORNER_TOL {
            1.0
        } else {
            0.0
        }
    });
    let pd = pair.p.to_dense();
    let basis_b1 = eigenbasis_near_one(&(&pd * &generic_proj))?;
    let basis_b2 = eigenbasis_near_one(
        &((DMatrix::<C64>::identity(n, n) - &pd) * &generic_proj),
    )?;
    if basis_b1.ncols() == 0 {
        return Ok(HalmosDecomposition {
            corners,
            generic: None,
        });
    }
    let db = operators::eig(&pair.b, None)?;
    let abs_a = da.map_eigenvalues(f64::abs);
    let abs_b = db.map_eigenvalues(f64::abs);
    let c = basis_b1.adjoint() * &abs_b * &basis_b1;
    let s = basis_b1.adjoint() * &abs_a * &basis_b1;
    let q21 = basis_b2.adjoint() * pair.q.to_dense() * &basis_b1;
    let cs = &c * &s;
    let w = q21
        * cs.clone()
            .try_inverse()
            .ok_or(Error::InvalidArgument {
                reason: "generic part too close to a corner to invert CS",
            })?;
    Ok(HalmosDecomposition {
        corners,
        generic: Some(HalmosGenericPart {
            basis_b1,
            basis_b2,
            c,
            s,
            w,
        }),
    })
}

impl HalmosDecomposition {
    /// Reassemble Q on the generic part from (C, S, W).
    pub fn reconstruct_generic_q(&self) -> Option<DMatrix<C64>> {
        let g = self.generic.as_ref()?;
        let u1 = &g.basis_b1;
        let u2 = &g.basis_b2;
        let cs = &g.c * &g.s;
        let block11 = u1 * (&g.c * &g.c) * u1.adjoint();
        let block21 = u2 * &g.w * &cs * u1.adjoint();
        let block12 = u1 * &cs * g.w.adjoint() * u2.adjoint();
        let block22 = u2 * &g.w * (&g.s * &g.s) * g.w.adjoint() * u2.adjoint();
        Some(block11 + block21 + block12 + block22)
    }
}

/// Orthonormal eigenbasis of the eigenvalue-1 space of a Hermitian
/// product of commuting projections.
fn eigenbasis_near_one(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let h = HermitianMatrix::with_tol(m.clone(), 1e-8)?;
    let d = operators::eig(&h, None)?;
    let keep: Vec<usize> = (0..d.eigenvalues.len())
        .filter(|&k| d.eigenvalues[k] > 0.5)
        .collect();
    let n = d.vectors.nrows();
    let mut out = DMatrix::<C64>::zeros(n, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        out.set_column(col, &d.vectors.column(k));
    }
    Ok(out)
}

/// Spectral norms (||Pi||, ||1 - Pi||, Ljance prediction
/// (1 - ||PQ||^2)^{-1/2}) for an idempotent Pi, where P projects onto
/// ran Pi and Q onto ker Pi.
pub fn oblique_norms(pi: &DMatrix<C64>) -> Result<(f64, f64, f64)> {
    let n = pi.nrows();
    if pi.ncols() != n {
        return Err(Error::InvalidArgument {
            reason: "projection matrix must be square",
        });
    }
    let id = DMatrix::<C64>::identity(n, n);
    if max_abs(&(pi * pi - pi)) > 1e-10 {
        return Err(Error::InvalidArgument {
            reason: "input is not idempotent",
        });
    }
    if max_abs(pi) <= 1e-10 || max_abs(&(pi - &id)) <= 1e-10 {
        return Err(Error::TrivialProjectionExcluded);
    }
    let complement = &id - pi;
    let p = column_space_projection(pi);
    let q = column_space_projection(&complement);
    let cross = operators::operator_norm_2(&(&p * &q));
    Ok((
        operators::operator_norm_2(pi),
        operators::operator_norm_2(&complement),
        1.0 / (1.0 - cross * cross).sqrt(),
    ))
}

/// Orthogonal projection onto the column space, by modified Gram-Schmidt
/// with a relative rank cutoff.
fn column_space_projection(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let cutoff = 1e-10 * max_abs(m).max(1.0) * n as f64;
    let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
    for col in 0..m.ncols() {
        let mut v = nalgebra::DVector::from_column_slice(m.column(col).as_slice());
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v.axpy(-overlap, b, C64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm > cutoff {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut p = DMatrix::<C64>::zeros(n, n);
    for b in &basis {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += b[i] * b[j].conj();
            }
        }
    }
    p
}
