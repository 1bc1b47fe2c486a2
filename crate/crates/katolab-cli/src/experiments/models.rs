use anyhow::{bail, ensure, Context, Result};
use katolab::models::{self, PsiKind, ShellCount};

use crate::params::Params;
use crate::record::{ResultRecord, TargetCheck};

const REFERENCE_MASS_RATIO: f64 = 7294.29954;

fn grid_arg(p: &mut Params, default_r: f64, default_n: usize) -> Result<(f64, usize)> {
    match p.colon_pair("grid")? {
        None => Ok((default_r, default_n)),
        Some((r, n)) => {
            ensure!(
                n.fract() == 0.0 && n > 0.0,
                "invalid value for `grid`: point count must be a positive integer"
            );
            Ok((r, n as usize))
        }
    }
}

pub fn run(p: &mut Params) -> Result<ResultRecord> {
    let seed = p.seed()?;
    let name = p.text("name", "");
    let mut record = ResultRecord::new("models", seed);
    match name.as_str() {
        "helium" => {
            let ratio = p.f64("mass-ratio", REFERENCE_MASS_RATIO)?;
            match models::helium_shells(ratio).context("shell count")? {
                ShellCount::Bounded { k_max, count } => {
                    record.integer("k_max", k_max as i64);
                    record.integer("count", count as i64);
                    if (ratio - REFERENCE_MASS_RATIO).abs() < 1e-9 {
                        record
                            .targets
                            .push(TargetCheck::new("highest-shell", k_max as f64, 42.0, 0.0));
                        record
                            .targets
                            .push(TargetCheck::new("bound-state-count", count as f64, 25585.0, 0.0));
                    }
                }
                ShellCount::Unbounded => {
                    record.integer("bounded", 0);
                }
            }
        }
        "cusp" => {
            let z = p.f64("Z", 1.0)?;
            ensure!(z > 0.0, "invalid value for `Z`: must be positive");
            let default_r = 40.0 / z;
            let default_n = (default_r / 5e-3).round() as usize - 1;
            let (r_max, n) = grid_arg(p, default_r, default_n)?;
            let (ratio, expected) =
                models::hydrogen_cusp(r_max, n, z).context("cusp estimate")?;
            let h = r_max / (n + 1) as f64;
            record.scalar("cusp_ratio", ratio);
            record.scalar("expected", expected);
            record.scalar("grid_spacing", h);
            record
                .targets
                .push(TargetCheck::new("cusp-slope-is-half-charge", ratio, expected, 5.0 * h));
        }
        "wvn" => {
            let mut residual = 0.0f64;
            for k in 1..=100_000usize {
                residual = residual.max(models::wvn_residual(k as f64 * 1e-3));
            }
            let mut tail = 0.0f64;
            for k in 0..=90_000usize {
                let r = 10.0 + k as f64 * 1e-3;
                let envelope =
                    r * r * (models::wvn_potential(r) + 8.0 * (2.0 * r).sin() / r).abs();
                tail = tail.max(envelope);
            }
            record.scalar("residual_sup", residual);
            record.scalar("tail_envelope_sup", tail);
            record
                .targets
                .push(TargetCheck::new("eigenfunction-residual", residual, 0.0, 1e-6));
            record
                .targets
                .push(TargetCheck::new("tail-envelope-bounded", tail, 0.0, 30.0));
        }
        "threshold" => {
            let kind = match p.text("psi-kind", "inv-sqrt").as_str() {
                "inv-sqrt" => PsiKind::InvSqrt,
                "log" => PsiKind::LogCase,
                "inv" => PsiKind::Inv,
                other => bail!("invalid value for `psi-kind`: {other}"),
            };
            let beta = p.f64("beta", 1e-3)?;
            let energy = models::rank_one_eigenvalue(beta, kind).context("secular root")?;
            record.scalar("eigenvalue", energy);
            record.scalar("edge_distance", energy + 1.0);
        }
        "hardy" => {
            let nu = p.usize("nu", 3)? as u32;
            let (r_max, n) = grid_arg(p, 1e4, 2000)?;
            let value = models::hardy_constant(nu, r_max, n).context("Hardy quotient")?;
            let target = ((nu as f64 - 2.0) / 2.0).powi(2);
            record.scalar("constant", value);
            record
                .targets
                .push(TargetCheck::new("hardy-constant", value, target, 0.02 * target));
        }
        "rellich" => {
            let nu = p.usize("nu", 5)? as u32;
            let (r_max, n) = grid_arg(p, 1e4, 4001)?;
            let value = models::rellich_constant(nu, r_max, n).context("Rellich quotient")?;
            let target = nu as f64 * (nu as f64 - 4.0) / 4.0;
            record.scalar("constant", value);
            record
                .targets
                .push(TargetCheck::new("rellich-constant", value, target, 0.05 * target));
        }
        "half-pi" => {
            let k_min = p.f64("kmin", 1e-7)?;
            let k_max = p.f64("kmax", 1e7)?;
            let n_log = p.usize("klog", 2000)?;
            let (top, quarter, eighth) =
                models::kato_half_pi(k_min, k_max, n_log).context("kernel constants")?;
            let half_pi = std::f64::consts::FRAC_PI_2;
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            record.scalar("kernel_top", top);
            record.scalar("quarter_integral", quarter);
            record.scalar("odd_sum", eighth);
            record
                .targets
                .push(TargetCheck::new("kernel-top-half-pi", top, half_pi, 0.01 * half_pi));
            record
                .targets
                .push(TargetCheck::new("quarter-integral", quarter, pi2 / 4.0, 1e-6));
            record
                .targets
                .push(TargetCheck::new("odd-reciprocal-sum", eighth, pi2 / 8.0, 1e-8));
        }
        "" => bail!("`models` needs --name"),
        other => bail!("invalid value for `name`: {other}"),
    }
    Ok(record)
}
