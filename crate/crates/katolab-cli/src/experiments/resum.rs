use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use katolab::asymptotics::{self, BorelContinuation, PowerSeries};
use katolab::operators::{C64, OrthogonalProjection};
use katolab::sampling;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::matrices;
use crate::params::Params;
use crate::record::{ResultRecord, Table};

const EULER_TRUTH_AT_ONE: f64 = 0.5963473623231940743;

fn usize_pair(p: &mut Params, key: &str) -> Result<Option<(usize, usize)>> {
    match p.colon_pair(key)? {
        None => Ok(None),
        Some((a, b)) => {
            ensure!(
                a.fract() == 0.0 && b.fract() == 0.0 && a >= 0.0 && b >= 0.0,
                "invalid value for `{key}`: orders must be nonnegative integers"
            );
            Ok(Some((a as usize, b as usize)))
        }
    }
}

pub fn run(p: &mut Params) -> Result<ResultRecord> {
    let seed = p.seed()?;
    let source = p.text("series", "euler");
    let order = p.usize("order", 12)?;
    let coeffs: Vec<f64> = match source.as_str() {
        "euler" => {
            let mut factorial = 1.0f64;
            (0..=order)
                .map(|k| {
                    if k > 0 {
                        factorial *= k as f64;
                    }
                    if k % 2 == 0 {
                        factorial
                    } else {
                        -factorial
                    }
                })
                .collect()
        }
        "quartic" => asymptotics::bender_wu(order, 4 * order + 10)
            .context("quartic ground-state series")?
            .coeffs()
            .to_vec(),
        "zero" => vec![0.0; order + 1],
        file if file.ends_with(".json") => matrices::load_series(Path::new(file))?,
        other => bail!("invalid value for `series`: {other}"),
    };
    let series = PowerSeries::new(coeffs.clone()).context("building the series")?;

    let mut record = ResultRecord::new("resum", seed);
    record.array("coefficients", &coeffs);
    record.integer("series_order", series.order() as i64);

    if let Some((n, m)) = usize_pair(p, "pade")? {
        let at = p.f64("at", 1.0)?;
        let approx = asymptotics::pade(&series, n, m).context("Pade solve")?;
        record.scalar("pade_value", approx.eval(at));
    }

    if let Some(max_order) = p.usize_opt("pade-table")? {
        let at = p.f64("at", 1.0)?;
        let orders: Vec<f64> = (1..=max_order).map(|k| k as f64).collect();
        let values: Result<Vec<f64>> = (1..=max_order)
            .map(|k| {
                Ok(asymptotics::pade(&series, k, k)
                    .with_context(|| format!("diagonal Pade at order {k}"))?
                    .eval(at))
            })
            .collect();
        let values = values?;
        record.array("pade_order", &orders);
        record.array("pade_diagonal", &values);
        record.table = Some(Table {
            columns: vec!["order", "pade_value"],
            rows: orders.iter().zip(&values).map(|(&n, &v)| vec![n, v]).collect(),
        });
    }

    if let Some(max_order) = p.usize_opt("partial-table")? {
        ensure!(
            max_order <= series.order(),
            "invalid value for `partial-table`: series stops at order {}",
            series.order()
        );
        let at = p.f64("at", 1.0)?;
        let truth = match p.f64_opt("truth")? {
            Some(t) => t,
            None if source == "euler" && at == 1.0 => EULER_TRUTH_AT_ONE,
            None => bail!("partial-sum errors need `truth` for this series"),
        };
        let mut partial = 0.0;
        let mut power = 1.0;
        let mut orders = Vec::with_capacity(max_order + 1);
        let mut errors = Vec::with_capacity(max_order + 1);
        for (k, &a_k) in coeffs.iter().take(max_order + 1).enumerate() {
            partial += a_k * power;
            power *= at;
            orders.push(k as f64);
            errors.push((partial - truth).abs());
        }
        record.array("partial_order", &orders);
        record.array("partial_error", &errors);
        record.table = Some(Table {
            columns: vec!["order", "error"],
            rows: orders.iter().zip(&errors).map(|(&n, &e)| vec![n, e]).collect(),
        });
    }

    if let Some(z) = p.f64_opt("borel-z")? {
        let m = p.usize("borel-order", 1)?;
        let sum = asymptotics::borel_sum(&series, z, m, BorelContinuation::Auto)
            .context("Borel summation")?;
        record.scalar("borel_value", sum.value);
        record.scalar("borel_quadrature_error", sum.quadrature_error);
    }

    if let Some(k_max) = p.usize_opt("hankel-k")? {
        let verdicts =
            asymptotics::hankel_stieltjes_test(&series, k_max).context("Hankel test")?;
        record.outputs.insert(
            "hankel_verdicts".to_string(),
            serde_json::Value::from(verdicts),
        );
    }

    if let Some(n) = p.usize_opt("trotter-n")? {
        let t = p.f64("trotter-t", 1.0)?;
        let dim = p.usize("trotter-dim", 4)?;
        ensure!(dim >= 2, "invalid value for `trotter-dim`: need at least 2");
        let mut rng = StdRng::seed_from_u64(seed);
        let a = sampling::hermitian(&mut rng, dim);
        let b = sampling::hermitian(&mut rng, dim);
        let error =
            asymptotics::lie_trotter_error(&a, &b, t, n).context("splitting error")?;
        record.scalar("trotter_error", error);
    }

    if let Some(n) = p.usize_opt("alt-n")? {
        let angle = p.f64("alt-theta", 0.3)?;
        let p_line = OrthogonalProjection::from_orthonormal_columns(&DMatrix::from_column_slice(
            2,
            1,
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ))
        .context("first line")?;
        let q_line = OrthogonalProjection::from_orthonormal_columns(&DMatrix::from_column_slice(
            2,
            1,
            &[C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0)],
        ))
        .context("second line")?;
        let (_, distance) = asymptotics::alternating_projection_limit(&p_line, &q_line, n)
            .context("alternating projections")?;
        record.scalar("alternating_distance", distance);
    }

    Ok(record)
}
