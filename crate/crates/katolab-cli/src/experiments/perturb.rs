use anyhow::{ensure, Context, Result};
use katolab::{operators, perturbation, sampling};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::params::Params;
use crate::record::ResultRecord;

pub fn run(p: &mut Params) -> Result<ResultRecord> {
    let seed = p.seed()?;
    let dim = p.usize("dim", 8)?;
    ensure!(dim >= 2, "invalid value for `dim`: need at least 2");
    let index = p.usize("index", 0)?;
    let order = p.usize("order", 3)?;
    let beta = p.f64("beta", 0.01)?;

    let mut rng = StdRng::seed_from_u64(seed);
    let h0 = sampling::hermitian(&mut rng, dim);
    let b = sampling::hermitian(&mut rng, dim);
    let report =
        perturbation::rs_series(&h0, &b, index, order).context("perturbation series")?;
    let partial = report
        .energies
        .iter()
        .rev()
        .fold(0.0, |acc, &e| acc * beta + e);
    let h = h0.plus_scaled(beta, &b).context("assembling H0 + beta B")?;
    let exact = operators::eig(&h, None).context("exact eigenvalue")?.eigenvalues[index];

    let mut record = ResultRecord::new("perturb", seed);
    record.array("energies", &report.energies);
    record.scalar("partial_sum", partial);
    record.scalar("exact", exact);
    record.scalar("error", (partial - exact).abs());
    Ok(record)
}
