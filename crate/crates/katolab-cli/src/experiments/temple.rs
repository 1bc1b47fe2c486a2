use anyhow::{ensure, Context, Result};
use katolab::operators::{self, C64};
use katolab::{sampling, temple_kato};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::params::Params;
use crate::record::{ResultRecord, TargetCheck};

/// Random Hermitian matrix, trial vector = chosen eigenvector plus noise,
/// spectral window = midpoints to the neighbouring eigenvalues.
pub fn run(p: &mut Params) -> Result<ResultRecord> {
    let seed = p.seed()?;
    let dim = p.usize("dim", 6)?;
    ensure!(dim >= 2, "invalid value for `dim`: need at least 2");
    let index = p.usize("index", 0)?;
    ensure!(index < dim, "invalid value for `index`: out of range");
    let noise = p.f64("noise", 0.02)?;

    let mut rng = StdRng::seed_from_u64(seed);
    let h = sampling::hermitian(&mut rng, dim);
    let d = operators::eig(&h, None).context("diagonalizing the sample")?;
    let alpha = if index == 0 {
        d.eigenvalues[0] - 1.0
    } else {
        0.5 * (d.eigenvalues[index - 1] + d.eigenvalues[index])
    };
    let zeta = if index == dim - 1 {
        d.eigenvalues[dim - 1] + 1.0
    } else {
        0.5 * (d.eigenvalues[index] + d.eigenvalues[index + 1])
    };
    let mut phi = DVector::from_column_slice(d.vectors.column(index).as_slice());
    let direction = sampling::unit_vector(&mut rng, dim);
    phi.axpy(C64::new(noise, 0.0), &direction, C64::new(1.0, 0.0));
    phi /= C64::new(phi.norm(), 0.0);

    let report =
        temple_kato::enclosure(&h, &phi, alpha, zeta).context("enclosure hypothesis")?;
    let truth = d.eigenvalues[index];

    let mut record = ResultRecord::new("temple", seed);
    record.scalar("alpha", alpha);
    record.scalar("zeta", zeta);
    record.scalar("eta", report.eta);
    record.scalar("eps2", report.eps2);
    record.scalar("gamma0", report.gamma0);
    record.scalar("kappa0", report.kappa0);
    record.scalar("truth", truth);
    record.integer("window_verified", report.window_verified as i64);
    if report.window_verified {
        let overshoot = (report.gamma0 - truth).max(truth - report.kappa0).max(0.0);
        record
            .targets
            .push(TargetCheck::new("enclosure-contains-eigenvalue", overshoot, 0.0, 1e-12));
    }
    Ok(record)
}
