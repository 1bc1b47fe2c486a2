//! Temple-Kato eigenvalue enclosures: Rayleigh quotients, residuals,
//! two-sided bounds from a spectral window, spectrum-hitting tests, and
//! the eigenvector error bound.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operators::{self, C64, HermitianMatrix};

/// Largest dimension at which the single-eigenvalue window hypothesis is
/// verified by a full decomposition instead of trusted.
pub const WINDOW_VERIFY_DIM: usize = 2000;

/// Enclosure data for one trial vector.
///
/// `gamma0 <= kappa0` bracket the spectral point in the window (alpha,
/// zeta). `vec_bound` is the eigenvector distance bound when the residual
/// is smaller than the distance from eta to the window edge, and
/// `window_verified` records whether an eigendecomposition confirmed that
/// the window contains exactly one spectral point.
#[derive(Clone, Debug)]
pub struct TrialReport {
    pub eta: f64,
    pub eps2: f64,
    pub alpha: f64,
    pub zeta: f64,
    pub gamma0: f64,
    pub kappa0: f64,
    pub vec_bound: Option<f64>,
    pub window_verified: bool,
}

fn check_unit(phi: &DVector<C64>) -> Result<()> {
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::TrialNotNormalized { norm });
    }
    Ok(())
}

/// Rayleigh quotient <phi, H phi> for a unit trial vector.
pub fn rayleigh(h: &HermitianMatrix, phi: &DVector<C64>) -> Result<f64> {
    check_unit(phi)?;
    Ok(phi.dotc(&h.apply(phi)).re)
}

/// Residual norm ||(H - eta) phi|| at the trial's own Rayleigh quotient.
pub fn residual(h: &HermitianMatrix, phi: &DVector<C64>) -> Result<f64> {
    check_unit(phi)?;
    let eta = phi.dotc(&h.apply(phi)).re;
    let mut r = h.apply(phi);
    r.axpy(C64::new(-eta, 0.0), phi, C64::new(1.0, 0.0));
    Ok(r.norm())
}

/// Two-sided enclosure for the spectral point in (alpha, zeta):
/// gamma0 = eta - eps^2/(zeta - eta), kappa0 = eta + eps^2/(eta - alpha),
/// valid under eps^2 < (eta - alpha)(zeta - eta).
pub fn enclosure(
    h: &HermitianMatrix,
    phi: &DVector<C64>,
    alpha: f64,
    zeta: f64,
) -> Result<TrialReport> {
    let eta = rayleigh(h, phi)?;
    if alpha >= eta || zeta <= eta {
        return Err(Error::WindowExcludesRayleigh { eta, alpha, zeta });
    }
    let eps = residual(h, phi)?;
    let eps2 = eps * eps;
    if eps2 >= (eta - alpha) * (zeta - eta) {
        return Err(Error::TempleKatoHypothesisFails {
            eps2,
            window: (eta - alpha) * (zeta - eta),
        });
    }
    let gamma0 = eta - eps2 / (zeta - eta);
    let kappa0 = eta + eps2 / (eta - alpha);
    let delta = (eta - alpha).min(zeta - eta);
    let vec_bound = if eps < delta {
        Some(eigenvector_gap_bound(eps, delta)?.0)
    } else {
        None
    };
    let window_verified = h.dim() <= WINDOW_VERIFY_DIM && {
        let eigenvalues = operators::eig(h, None)?.eigenvalues;
        let inside = eigenvalues
            .iter()
            .filter(|&&x| alpha < x && x < zeta)
            .count();
        let lower_hit = eigenvalues.iter().any(|&x| alpha < x && x <= kappa0);
        let upper_hit = eigenvalues.iter().any(|&x| gamma0 <= x && x < zeta);
        inside == 1 && lower_hit && upper_hit
    };
    Ok(TrialReport {
        eta,
        eps2,
        alpha,
        zeta,
        gamma0,
        kappa0,
        vec_bound,
        window_verified,
    })
}

/// True iff <phi, (H - alpha)(H - zeta) phi> < 0, which forces spectrum
/// inside (alpha, zeta).
pub fn spectrum_hit(
    h: &HermitianMatrix,
    phi: &DVector<C64>,
    alpha: f64,
    zeta: f64,
) -> Result<bool> {
    check_unit(phi)?;
    let h_phi = h.apply(phi);
    let mut upper = h_phi.clone();
    upper.axpy(C64::new(-zeta, 0.0), phi, C64::new(1.0, 0.0));
    let mut lower = h_phi;
    lower.axpy(C64::new(-alpha, 0.0), phi, C64::new(1.0, 0.0));
    Ok(lower.dotc(&upper).re < 0.0)
}

/// Eigenvector distance bound from residual eps and spectral gap delta:
/// returns ([2 - 2 sqrt(1 - eps^2/delta^2)]^{1/2}, majorant
/// (eps/delta)(1 - eps^2/delta^2)^{-1/4}).
pub fn eigenvector_gap_bound(eps: f64, delta: f64) -> Result<(f64, f64)> {
    if !(eps >= 0.0) || eps >= delta {
        return Err(Error::EigenvectorBoundUndefined { eps, delta });
    }
    let ratio2 = (eps / delta) * (eps / delta);
    let root = (1.0 - ratio2).sqrt();
    let bound = (2.0 - 2.0 * root).sqrt();
    let majorant = (eps / delta) / root.sqrt().sqrt();
    debug_assert!(bound <= majorant + 1e-12);
    Ok((bound, majorant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::log_log_slope;
    use crate::sampling;
    use crate::tridiag;
    use nalgebra::DMatrix;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn diag(values: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
            .unwrap()
    }

    fn tilted_trial() -> DVector<C64> {
        DVector::from_vec(vec![
            C64::new(0.9f64.sqrt(), 0.0),
            C64::new(0.1f64.sqrt(), 0.0),
        ])
    }

    #[test]
    fn rayleigh_of_eigenvector_is_eigenvalue() {
        let h = diag(&[-2.0, 0.5, 3.0]);
        let phi = DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        assert!((rayleigh(&h, &phi).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_tilted_two_level() {
        let h = diag(&[0.0, 1.0]);
        assert!((rayleigh(&h, &tilted_trial()).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_stays_inside_spectrum() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..20 {
            let h = sampling::hermitian(&mut rng, 7);
            let phi = sampling::unit_vector(&mut rng, 7);
            let eta = rayleigh(&h, &phi).unwrap();
            let d = operators::eig(&h, None).unwrap();
            assert!(eta >= d.eigenvalues[0] - 1e-10);
            assert!(eta <= d.eigenvalues[6] + 1e-10);
        }
    }

    #[test]
    fn rayleigh_rejects_unnormalized_trial() {
        let h = diag(&[0.0, 1.0]);
        let phi = DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        let err = rayleigh(&h, &phi).unwrap_err();
        assert!(err.to_string().starts_with("trial vector not normalized"));
    }

    #[test]
    fn residual_vanishes_on_eigenvector() {
        let h = diag(&[-1.0, 2.0]);
        let phi = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(residual(&h, &phi).unwrap() < 1e-12);
    }

    #[test]
    fn residual_tilted_two_level() {
        let h = diag(&[0.0, 1.0]);
        let eps = residual(&h, &tilted_trial()).unwrap();
        assert!((eps * eps - 0.09).abs() < 1e-13);
    }

    #[test]
    fn residual_bounded_by_operator_norm() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..20 {
            let h = sampling::hermitian(&mut rng, 6);
            let phi = sampling::unit_vector(&mut rng, 6);
            let eps = residual(&h, &phi).unwrap();
            let norm = operators::hermitian_norm_2(&h).unwrap();
            assert!(eps >= 0.0);
            assert!(eps * eps <= norm * norm + 1e-12);
        }
    }

    #[test]
    fn enclosure_two_level_brackets_true_eigenvalue() {
        let h = diag(&[0.0, 1.0]);
        let report = enclosure(&h, &tilted_trial(), -0.5, 0.5).unwrap();
        assert!((report.eta - 0.1).abs() < 1e-13);
        assert!((report.eps2 - 0.09).abs() < 1e-13);
        assert!((report.gamma0 + 0.125).abs() < 1e-12);
        assert!((report.kappa0 - 0.25).abs() < 1e-12);
        assert!(report.gamma0 <= 0.0 && 0.0 <= report.kappa0);
        assert!(report.window_verified);
    }

    #[test]
    fn enclosure_temple_lower_bound_is_exact_for_two_levels() {
        // With zeta at the second eigenvalue's midpoint-free value 1 and a
        // distant alpha, gamma0 collapses onto the true ground state 0.
        let h = diag(&[0.0, 1.0]);
        let report = enclosure(&h, &tilted_trial(), -100.0, 1.0 - 1e-9).unwrap();
        assert!(report.gamma0.abs() < 1e-7);
        assert!(report.kappa0 >= 0.0);
    }

    #[test]
    fn enclosure_collapses_for_eigenvector_trial() {
        let h = diag(&[0.0, 1.0]);
        let phi = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let report = enclosure(&h, &phi, -0.5, 0.5).unwrap();
        assert!((report.gamma0 - report.eta).abs() < 1e-12);
        assert!((report.kappa0 - report.eta).abs() < 1e-12);
        assert_eq!(report.vec_bound, Some(0.0));
    }

    #[test]
    fn enclosure_rejects_window_that_misses_eta() {
        let h = diag(&[0.0, 1.0]);
        let err = enclosure(&h, &tilted_trial(), 0.2, 0.5).unwrap_err();
        assert!(err
            .to_string()
            .starts_with("window excludes Rayleigh quotient"));
    }

    #[test]
    fn enclosure_rejects_oversized_residual() {
        let h = diag(&[0.0, 1.0]);
        // eps^2 = 0.09 exceeds (eta - alpha)(zeta - eta) = 0.02.
        let err = enclosure(&h, &tilted_trial(), 0.0, 0.3).unwrap_err();
        assert!(err.to_string().starts_with("Temple-Kato hypothesis fails"));
    }

    #[test]
    fn enclosure_contains_eigenvalue_on_seeded_trials() {
        let mut rng = StdRng::seed_from_u64(650);
        let mut produced = 0usize;
        while produced < 50 {
            let n = rng.gen_range(4..10);
            let h = sampling::hermitian(&mut rng, n);
            let d = operators::eig(&h, None).unwrap();
            let index = rng.gen_range(0..n);
            let alpha = if index == 0 {
                d.eigenvalues[0] - 1.0
            } else {
                0.5 * (d.eigenvalues[index - 1] + d.eigenvalues[index])
            };
            let zeta = if index == n - 1 {
                d.eigenvalues[n - 1] + 1.0
            } else {
                0.5 * (d.eigenvalues[index] + d.eigenvalues[index + 1])
            };
            let mut phi = DVector::from_column_slice(d.vectors.column(index).as_slice());
            let noise = sampling::unit_vector(&mut rng, n);
            phi.axpy(C64::new(0.02, 0.0), &noise, C64::new(1.0, 0.0));
            phi /= C64::new(phi.norm(), 0.0);
            let report = match enclosure(&h, &phi, alpha, zeta) {
                Ok(r) => r,
                Err(_) => continue,
            };
            if !report.window_verified {
                continue;
            }
            produced += 1;
            let truth = d.eigenvalues[index];
            assert!(
                report.gamma0 - 1e-12 <= truth && truth <= report.kappa0 + 1e-12,
                "containment failed: {truth} outside [{}, {}]",
                report.gamma0,
                report.kappa0
            );
        }
    }

    #[test]
    fn enclosure_tightens_as_window_widens() {
        let h = diag(&[0.0, 1.0]);
        let phi = tilted_trial();
        let narrow = enclosure(&h, &phi, -0.2, 0.5).unwrap();
        let wide = enclosure(&h, &phi, -0.8, 0.9).unwrap();
        let narrow_width = narrow.kappa0 - narrow.gamma0;
        let wide_width = wide.kappa0 - wide.gamma0;
        assert!(wide_width <= narrow_width + 1e-14);
    }

    #[test]
    fn fixed_trial_rayleigh_error_is_second_order() {
        // Gaussian-type trial: the unperturbed ground vector of a
        // discretized oscillator, held fixed while beta*x perturbs it.
        let grid = operators::Grid1D::new(-8.0, 8.0, 200).unwrap();
        let h0 = operators::discretize_1d(&grid, &grid.sample(|x| x * x)).unwrap();
        let b = HermitianMatrix::tridiagonal(grid.sample(|x| x), vec![0.0; 199]).unwrap();
        let (diag0, off0) = h0.as_tridiagonal().unwrap();
        let (values0, vectors0) = tridiag::lowest_eigenpairs(diag0, off0, 1);
        let phi0 = DVector::from_fn(200, |i, _| C64::new(vectors0[0][i], 0.0));
        let eta0 = values0[0];
        let e1 = rayleigh(&b, &phi0).unwrap();

        let betas = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
        let errs: Vec<f64> = betas
            .iter()
            .map(|&beta| {
                let h = h0.plus_scaled(beta, &b).unwrap();
                let (hd, ho) = h.as_tridiagonal().unwrap();
                let exact = tridiag::eigenvalue_at(hd, ho, 0);
                let eta = eta0 + beta * e1;
                (exact - eta).abs()
            })
            .collect();
        let slope = log_log_slope(&betas, &errs);
        assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn spectrum_hit_two_level_bracket() {
        let h = diag(&[0.0, 1.0]);
        assert!(spectrum_hit(&h, &tilted_trial(), -0.5, 0.5).unwrap());
    }

    #[test]
    fn spectrum_hit_rejects_gap_window() {
        let h = diag(&[0.0, 1.0]);
        // (0.4, 0.6) sits in the spectral gap; the form value must be >= 0
        // for every unit trial.
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let phi = sampling::unit_vector(&mut rng, 2);
            assert!(!spectrum_hit(&h, &phi, 0.4, 0.6).unwrap());
        }
    }

    #[test]
    fn spectrum_hit_implies_spectrum_in_window() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..40 {
            let h = sampling::hermitian(&mut rng, 6);
            let phi = sampling::unit_vector(&mut rng, 6);
            let alpha = rng.gen_range(-1.5..0.0);
            let zeta = alpha + rng.gen_range(0.1..2.0);
            if spectrum_hit(&h, &phi, alpha, zeta).unwrap() {
                let d = operators::eig(&h, None).unwrap();
                assert!(d.eigenvalues.iter().any(|&x| alpha < x && x < zeta));
            }
        }
    }

    #[test]
    fn gap_bound_zero_residual() {
        let (bound, majorant) = eigenvector_gap_bound(0.0, 0.5).unwrap();
        assert_eq!(bound, 0.0);
        assert_eq!(majorant, 0.0);
    }

    #[test]
    fn gap_bound_dominates_true_vector_distance() {
        let (bound, majorant) = eigenvector_gap_bound(0.3, 0.4).unwrap();
        assert!((bound - 0.823).abs() < 1e-3);
        assert!(bound <= majorant);

        // diag(0,1) scenario: trial tilted by 0.1 against ground state,
        // actual distance sqrt(2 - 2 sqrt(0.9)) = 0.320, true gap 0.9.
        let actual = (2.0 - 2.0 * 0.9f64.sqrt()).sqrt();
        assert!((actual - 0.320).abs() < 1e-3);
        assert!(actual <= bound);
        let (tight, _) = eigenvector_gap_bound(0.3, 0.9).unwrap();
        assert!(actual <= tight);
    }

    #[test]
    fn gap_bound_approaches_sqrt_two() {
        let delta = 0.7;
        let (bound, _) = eigenvector_gap_bound(delta * (1.0 - 1e-6), delta).unwrap();
        assert!((bound - 2.0f64.sqrt()).abs() < 2e-3);
    }

    #[test]
    fn gap_bound_rejects_residual_at_gap() {
        let err = eigenvector_gap_bound(0.5, 0.5).unwrap_err();
        assert!(err
            .to_string()
            .starts_with("eigenvector bound requires eps < delta"));
    }
}
