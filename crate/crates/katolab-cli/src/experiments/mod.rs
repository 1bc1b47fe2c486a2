//! One module per subcommand; `run` dispatches, stamps the echoed inputs,
//! and fills in the wall time.

mod adiabatic;
mod models;
mod perturb;
mod projections;
mod resum;
mod temple;

use std::time::Instant;

use anyhow::Result;

use crate::params::Params;
use crate::record::ResultRecord;

pub fn run(params: &mut Params) -> Result<ResultRecord> {
    let clock = Instant::now();
    let mut record = match params.subcommand() {
        "perturb" => perturb::run(params)?,
        "temple" => temple::run(params)?,
        "projections" => projections::run(params)?,
        "adiabatic" => adiabatic::run(params)?,
        "resum" => resum::run(params)?,
        "models" => models::run(params)?,
        other => unreachable!("unknown subcommand {other}"),
    };
    record.inputs = params.echo().clone();
    record.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}
