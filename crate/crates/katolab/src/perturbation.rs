//! Rayleigh-Schrodinger perturbation series for a simple isolated
//! eigenvalue of H0 + beta*B: explicit corrections through third order,
//! the recursion for arbitrary order, and the relative-bound probe
//! kappa -> ||B (H0 + i kappa)^{-1}||.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{self, C64, HermitianMatrix, SpectralDecomposition};

/// Energy coefficients for one perturbed eigenvalue, with the first-order
/// eigenvector correction.
///
/// `energies[k]` multiplies beta^k. Vectors follow intermediate
/// normalization <phi0, psi(beta)> = 1, so the eigenvector through first
/// order is phi0 + beta * psi1 and psi1 is orthogonal to phi0.
#[derive(Clone, Debug)]
pub struct RsReport {
    pub energies: Vec<f64>,
    pub psi1: DVector<C64>,
    pub index: usize,
    pub normalization: &'static str,
}

/// Norms ||B (A + i kappa)^{-1}|| with the least-squares fit
/// norm ~ bound_a + bound_b / kappa over the supplied kappa grid.
#[derive(Clone, Debug)]
pub struct RelativeBoundCurve {
    pub kappas: Vec<f64>,
    pub norms: Vec<f64>,
    pub bound_a: f64,
    pub bound_b: f64,
}

struct SimpleLevel {
    e0: f64,
    phi0: DVector<C64>,
    /// Reduced resolvent: zero on the phi0 line, (H0 - E0)^{-1} elsewhere.
    s: DMatrix<C64>,
}

fn simple_level(h0: &HermitianMatrix, index: usize) -> Result<SimpleLevel> {
    let d = operators::eig(h0, None)?;
    if index >= d.eigenvalues.len() {
        return Err(Error::InvalidArgument {
            reason: "eigenvalue index out of range",
        });
    }
    let cluster = d
        .clusters
        .iter()
        .find(|c| c.contains(&index))
        .expect("every index belongs to a cluster");
    if cluster.len() != 1 {
        return Err(Error::DegenerateEigenvalue {
            index,
            cluster_size: cluster.len(),
        });
    }
    let e0 = d.eigenvalues[index];
    let phi0 = DVector::from_column_slice(d.vectors.column(index).as_slice());
    Ok(SimpleLevel {
        e0,
        phi0,
        s: reduced_resolvent_dense(&d, index),
    })
}

fn reduced_resolvent_dense(d: &SpectralDecomposition, index: usize) -> DMatrix<C64> {
    let n = d.vectors.nrows();
    let e0 = d.eigenvalues[index];
    let mut s = DMatrix::<C64>::zeros(n, n);
    for k in 0..d.eigenvalues.len() {
        if k == index {
            continue;
        }
        let w = 1.0 / (d.eigenvalues[k] - e0);
        let col = d.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += col[i] * col[j].conj() * w;
            }
        }
    }
    s
}

fn check_same_dim(h0: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if h0.dim() != b.dim() {
        return Err(Error::InvalidArgument {
            reason: "operator dimensions differ",
        });
    }
    Ok(())
}

/// Corrections E0..E3 and psi1 for the eigenvalue at `index`.
///
/// With S the reduced resolvent and t = S B phi0:
/// E1 = <phi0, B phi0>, E2 = -<B phi0, t>,
/// E3 = <t, B t> - E1 <t, t>, psi1 = -t.
pub fn rs_low_order(h0: &HermitianMatrix, b: &HermitianMatrix, index: usize) -> Result<RsReport> {
    check_same_dim(h0, b)?;
    let level = simple_level(h0, index)?;
    let b_phi0 = b.apply(&level.phi0);
    let t = &level.s * &b_phi0;
    let e1 = level.phi0.dotc(&b_phi0).re;
    let e2 = -b_phi0.dotc(&t).re;
    let e3 = t.dotc(&b.apply(&t)).re - e1 * t.dotc(&t).re;
    Ok(RsReport {
        energies: vec![level.e0, e1, e2, e3],
        psi1: -t,
        index,
        normalization: "intermediate",
    })
}

/// Coefficients E0..EN of the perturbation series by the standard
/// recursion: Ek = <phi0, B psi_{k-1}> and
/// psi_k = S(sum_{j=1}^{k-1} Ej psi_{k-j} - B psi_{k-1}).
pub fn rs_series(
    h0: &HermitianMatrix,
    b: &HermitianMatrix,
    index: usize,
    order: usize,
) -> Result<RsReport> {
    check_same_dim(h0, b)?;
    if order < 1 {
        return Err(Error::InvalidArgument {
            reason: "series order must be at least 1",
        });
    }
    let level = simple_level(h0, index)?;
    let mut energies = vec![level.e0];
    let mut psis = vec![level.phi0.clone()];
    for k in 1..=order {
        let b_psi = b.apply(&psis[k - 1]);
        energies.push(level.phi0.dotc(&b_psi).re);
        let mut rhs = -b_psi;
        for j in 1..k {
            rhs.axpy(C64::new(energies[j], 0.0), &psis[k - j], C64::new(1.0, 0.0));
        }
        psis.push(&level.s * rhs);
    }
    Ok(RsReport {
        energies,
        psi1: psis[1].clone(),
        index,
        normalization: "intermediate",
    })
}

/// Norm curve kappa -> ||B (A + i kappa)^{-1}||_2 with its a + b/kappa
/// least-squares fit; the intercept estimates the relative bound of B
/// with respect to A.
pub fn relative_bound_curve(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    kappas: &[f64],
) -> Result<RelativeBoundCurve> {
    check_same_dim(a, b)?;
    if kappas.len() < 2 {
        return Err(Error::InvalidArgument {
            reason: "need at least two kappa values for the fit",
        });
    }
    if let Some(&bad) = kappas.iter().find(|&&k| !(k > 0.0)) {
        return Err(Error::KappaMustBePositive { kappa: bad });
    }
    let b_dense = b.to_dense();
    let mut norms = Vec::with_capacity(kappas.len());
    for &kappa in kappas {
        let r = operators::resolvent(a, C64::new(0.0, -kappa))?;
        norms.push(operators::operator_norm_2(&(&b_dense * r)));
    }
    let (bound_a, bound_b) = fit_affine(
        &kappas.iter().map(|&k| 1.0 / k).collect::<Vec<_>>(),
        &norms,
    );
    Ok(RelativeBoundCurve {
        kappas: kappas.to_vec(),
        norms,
        bound_a,
        bound_b,
    })
}

/// Least-squares (intercept, slope) for y ~ intercept + slope * x.
pub(crate) fn fit_affine(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| u * v).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Log-log slope of |y| against x by least squares; points with y = 0
/// are excluded.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(_, &v)| v != 0.0)
        .map(|(&u, &v)| (u.ln(), v.abs().ln()))
        .unzip();
    fit_affine(&lx, &ly).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn diag(values: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
            .unwrap()
    }

    fn two_level() -> (HermitianMatrix, HermitianMatrix) {
        let h0 = diag(&[0.0, 1.0]);
        let b = HermitianMatrix::from_real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
            .unwrap();
        (h0, b)
    }

    #[test]
    fn low_order_two_level_cross_term() {
        let (h0, b) = two_level();
        let report = rs_low_order(&h0, &b, 0).unwrap();
        assert!(report.energies[0].abs() < 1e-14);
        assert!(report.energies[1].abs() < 1e-12);
        assert!((report.energies[2] + 1.0).abs() < 1e-12);
        assert!(report.energies[3].abs() < 1e-12);
        assert_eq!(report.normalization, "intermediate");
    }

    #[test]
    fn low_order_commuting_perturbation_is_linear() {
        let h0 = diag(&[-1.0, 0.5, 2.0]);
        let report = rs_low_order(&h0, &h0, 1).unwrap();
        assert!((report.energies[1] - 0.5).abs() < 1e-12);
        assert!(report.energies[2].abs() < 1e-12);
        assert!(report.energies[3].abs() < 1e-12);
        assert!(report.psi1.norm() < 1e-12);
    }

    #[test]
    fn low_order_three_level_third_order() {
        // H0 = diag(0,1,2) with B coupling the ground state to both
        // excited states; exact eigenvalue expansion pins E3 = -5/4.
        let h0 = diag(&[0.0, 1.0, 2.0]);
        let b = HermitianMatrix::from_real(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        ))
        .unwrap();
        let report = rs_low_order(&h0, &b, 0).unwrap();
        assert!((report.energies[1] - 1.0).abs() < 1e-12);
        assert!((report.energies[2] + 1.5).abs() < 1e-12);
        assert!((report.energies[3] + 1.25).abs() < 1e-12);
    }

    #[test]
    fn low_order_matches_brute_force_eigenvalue() {
        let mut rng = StdRng::seed_from_u64(41);
        let h0 = diag(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = sampling::hermitian(&mut rng, 6);
        let index = 2;
        let report = rs_low_order(&h0, &b, index).unwrap();
        let e4 = rs_series(&h0, &b, index, 4).unwrap().energies[4];
        let beta = 1e-3;
        let perturbed = h0.plus_scaled(beta, &b).unwrap();
        let exact = operators::eig(&perturbed, None).unwrap().eigenvalues[index];
        let partial: f64 = report
            .energies
            .iter()
            .enumerate()
            .map(|(k, e)| e * beta.powi(k as i32))
            .sum();
        assert!((exact - partial).abs() <= 10.0 * e4.abs() * beta.powi(4));
    }

    #[test]
    fn low_order_rejects_degenerate_level() {
        let h0 = diag(&[0.0, 0.0, 1.0]);
        let b = diag(&[0.1, 0.2, 0.3]);
        let err = rs_low_order(&h0, &b, 0).unwrap_err();
        assert!(err
            .to_string()
            .starts_with("degenerate eigenvalue: RS simple-case only"));
    }

    #[test]
    fn series_two_level_matches_closed_form_taylor() {
        // Lower eigenvalue of [[0, b],[b, 1]] is (1 - sqrt(1+4b^2))/2 with
        // Taylor coefficients [0, 0, -1, 0, 1, 0, -2].
        let (h0, b) = two_level();
        let report = rs_series(&h0, &b, 0, 6).unwrap();
        let expected = [0.0, 0.0, -1.0, 0.0, 1.0, 0.0, -2.0];
        for (k, &want) in expected.iter().enumerate() {
            assert!(
                (report.energies[k] - want).abs() < 1e-10,
                "order {k}: {} vs {want}",
                report.energies[k]
            );
        }
    }

    #[test]
    fn series_zero_perturbation_is_flat() {
        let h0 = diag(&[0.0, 1.0, 2.5]);
        let b = diag(&[0.0, 0.0, 0.0]);
        let report = rs_series(&h0, &b, 1, 5).unwrap();
        assert_eq!(report.energies[0], 1.0);
        for k in 1..=5 {
            assert_eq!(report.energies[k], 0.0);
        }
    }

    #[test]
    fn series_agrees_with_low_order() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let h0 = diag(&[0.0, 0.7, 1.9, 3.2, 4.1]);
            let b = sampling::hermitian(&mut rng, 5);
            let low = rs_low_order(&h0, &b, 2).unwrap();
            let series = rs_series(&h0, &b, 2, 3).unwrap();
            for k in 0..=3 {
                assert!((low.energies[k] - series.energies[k]).abs() < 1e-10);
            }
            assert!((&low.psi1 - &series.psi1).norm() < 1e-10);
        }
    }

    #[test]
    fn series_remainder_has_expected_order() {
        let mut rng = StdRng::seed_from_u64(1234);
        for trial in 0..20 {
            let h0 = diag(&[0.0, 1.0, 2.0, 3.0, 4.0]);
            let b = sampling::hermitian(&mut rng, 5);
            let order = 3 + (trial % 2);
            let report = rs_series(&h0, &b, 1, order + 1).unwrap();
            let next = report.energies[order + 1].abs().max(1e-6);
            for beta in [1e-2, 1e-3] {
                let perturbed = h0.plus_scaled(beta, &b).unwrap();
                let exact = operators::eig(&perturbed, None).unwrap().eigenvalues[1];
                let partial: f64 = report.energies[..=order]
                    .iter()
                    .enumerate()
                    .map(|(k, e)| e * beta.powi(k as i32))
                    .sum();
                // 1e-13 absorbs the eigensolver roundoff floor, which the
                // order-4 remainder at beta = 1e-3 sits below.
                assert!(
                    (exact - partial).abs() <= 10.0 * next * beta.powi(order as i32 + 1) + 1e-13,
                    "trial {trial} beta {beta}"
                );
            }
        }
    }

    #[test]
    fn series_remainder_slope_matches_truncation_order() {
        let mut rng = StdRng::seed_from_u64(99);
        let h0 = diag(&[0.0, 1.0, 2.0, 3.0]);
        let b = sampling::hermitian(&mut rng, 4);
        let order = 3;
        let report = rs_series(&h0, &b, 0, order).unwrap();
        let betas = [1e-2, 5e-3, 2e-3, 1e-3];
        let remainders: Vec<f64> = betas
            .iter()
            .map(|&beta| {
                let perturbed = h0.plus_scaled(beta, &b).unwrap();
                let exact = operators::eig(&perturbed, None).unwrap().eigenvalues[0];
                let partial: f64 = report
                    .energies
                    .iter()
                    .enumerate()
                    .map(|(k, e)| e * beta.powi(k as i32))
                    .sum();
                (exact - partial).abs()
            })
            .collect();
        let slope = log_log_slope(&betas, &remainders);
        assert!(
            (slope - (order as f64 + 1.0)).abs() <= 0.1,
            "slope {slope}"
        );
    }

    #[test]
    fn series_odd_coefficients_flip_with_perturbation_sign() {
        let mut rng = StdRng::seed_from_u64(5150);
        let h0 = diag(&[0.0, 1.3, 2.1, 3.7]);
        let b = sampling::hermitian(&mut rng, 4);
        let minus_b = HermitianMatrix::new(-b.to_dense()).unwrap();
        let plus = rs_series(&h0, &b, 1, 6).unwrap();
        let minus = rs_series(&h0, &minus_b, 1, 6).unwrap();
        for k in 0..=6 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(plus.energies[k], sign * minus.energies[k], "order {k}");
        }
    }

    #[test]
    fn psi1_recovers_eigenvector_to_first_order() {
        let mut rng = StdRng::seed_from_u64(314);
        let h0 = diag(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let b = sampling::hermitian(&mut rng, 5);
        let report = rs_series(&h0, &b, 2, 1).unwrap();
        let phi0 = DVector::from_fn(5, |i, _| {
            if i == 2 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(phi0.dotc(&report.psi1).norm() < 1e-10);

        let betas = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
        let errs: Vec<f64> = betas
            .iter()
            .map(|&beta| {
                let perturbed = h0.plus_scaled(beta, &b).unwrap();
                let d = operators::eig(&perturbed, None).unwrap();
                let mut v = DVector::from_column_slice(d.vectors.column(2).as_slice());
                let overlap = phi0.dotc(&v);
                v *= overlap.conj() / overlap.norm();
                let first_order = &phi0 + &report.psi1 * C64::new(beta, 0.0);
                (v - first_order).norm()
            })
            .collect();
        let slope = log_log_slope(&betas, &errs);
        assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn relative_bound_of_operator_against_itself_is_one() {
        let a = diag(&[1.0, 3.0, 10.0, 30.0, 100.0]);
        let kappas: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let curve = relative_bound_curve(&a, &a, &kappas).unwrap();
        for w in curve.norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!((curve.bound_a - 1.0).abs() <= 0.01, "a {}", curve.bound_a);
    }

    #[test]
    fn relative_bound_of_bounded_perturbation_is_zero() {
        let a = diag(&[1.0, 2.0, 5.0]);
        let b = diag(&[1.0, 1.0, 1.0]);
        let kappas: Vec<f64> = (1..=10).map(|k| 4.0 * k as f64).collect();
        let curve = relative_bound_curve(&a, &b, &kappas).unwrap();
        for (norm, &kappa) in curve.norms.iter().zip(&kappas) {
            let expected = 1.0 / (1.0 + kappa * kappa).sqrt();
            assert!((norm - expected).abs() < 1e-9);
        }
        assert!(curve.bound_a.abs() <= 0.02, "a {}", curve.bound_a);
    }

    #[test]
    fn relative_bound_shrinks_with_masked_window() {
        let grid = operators::Grid1D::new(-1.0, 1.0, 101).unwrap();
        let a = operators::discretize_1d(&grid, &vec![0.0; 101]).unwrap();
        let masked = |w: f64| {
            let v = grid.sample(|x| if x.abs() <= w { x.abs() } else { 0.0 });
            HermitianMatrix::from_real(DMatrix::from_diagonal(&DVector::from_vec(v))).unwrap()
        };
        let kappas = [20.0, 40.0, 80.0, 160.0];
        let wide = relative_bound_curve(&a, &masked(1.0), &kappas).unwrap();
        let narrow = relative_bound_curve(&a, &masked(0.3), &kappas).unwrap();
        assert!(narrow.bound_a < wide.bound_a);
    }

    #[test]
    fn relative_bound_rejects_nonpositive_kappa() {
        let a = diag(&[1.0, 2.0]);
        let err = relative_bound_curve(&a, &a, &[1.0, 0.0]).unwrap_err();
        assert!(err.to_string().starts_with("kappa must be positive"));
    }
}
