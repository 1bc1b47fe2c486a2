use std::path::Path;

use anyhow::{Context, Result};
use katolab::{adiabatic, perturbation};

use crate::matrices;
use crate::params::Params;
use crate::record::{ResultRecord, Table, TargetCheck};

pub fn run(p: &mut Params) -> Result<ResultRecord> {
    let seed = p.seed()?;
    let name = p.text("path", "two-level");
    let mut theta = None;
    let path = match name.as_str() {
        "two-level" => adiabatic::two_level_rotation(),
        "colatitude" => {
            let angle = p.f64("theta", 0.75)?;
            theta = Some(angle);
            adiabatic::colatitude_loop(angle)
        }
        "three-level" => adiabatic::three_level_gap(p.f64("gap", 0.5)?),
        file if file.ends_with(".json") => {
            let band = p.usize("band", 0)?;
            matrices::load_path(Path::new(file), band)?
        }
        other => anyhow::bail!("invalid value for `path`: {other}"),
    };

    let t_scales = p.f64_list("T", "25,50,100,200")?;
    let steps_flag = p.usize("steps", 0)?;
    let mut defects = Vec::with_capacity(t_scales.len());
    for &t in &t_scales {
        let steps = if steps_flag == 0 {
            2000usize.max((40.0 * t.max(0.0)) as usize)
        } else {
            steps_flag
        };
        let defect = adiabatic::adiabatic_defect(&path, t, steps)
            .with_context(|| format!("leak defect at T = {t}"))?;
        defects.push(defect);
    }

    let mut record = ResultRecord::new("adiabatic", seed);
    record.array("t_scale", &t_scales);
    record.array("defect", &defects);
    record.table = Some(Table {
        columns: vec!["t_scale", "defect"],
        rows: t_scales
            .iter()
            .zip(&defects)
            .map(|(&t, &d)| vec![t, d])
            .collect(),
    });
    if t_scales.len() >= 2 {
        let slope = perturbation::log_log_slope(&t_scales, &defects);
        record.scalar("defect_slope", slope);
        record
            .targets
            .push(TargetCheck::new("leak-decays-first-order", slope, -1.0, 0.15));
    }

    if let Some(angle) = theta {
        let berry_steps = steps_flag.max(2000);
        let phase = adiabatic::berry_phase(&path, berry_steps).context("Berry phase")?;
        record.scalar("berry_phase", phase);
        let solid_angle = -(1.0 - angle.cos()) * std::f64::consts::PI;
        record
            .targets
            .push(TargetCheck::new("holonomy-matches-solid-angle", phase, solid_angle, 1e-6));
    }
    Ok(record)
}
