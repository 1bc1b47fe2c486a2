use std::path::Path;

use anyhow::{ensure, Context, Result};
use katolab::operators::{self, C64};
use katolab::{projections, sampling};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::matrices;
use crate::params::Params;
use crate::record::{ResultRecord, TargetCheck};

pub fn run(p: &mut Params) -> Result<ResultRecord> {
    let seed = p.seed()?;
    let (proj_p, proj_q, ranks) = match p.text_opt("pair") {
        Some(file) => {
            let (a, b) = matrices::load_pair(Path::new(&file))?;
            (a, b, None)
        }
        None => {
            let dim = p.usize("dim", 6)?;
            ensure!(dim >= 2, "invalid value for `dim`: need at least 2");
            let mut rng = StdRng::seed_from_u64(seed);
            match p.f64_opt("near")? {
                Some(strength) => {
                    let rank = p.usize("rank-p", dim / 2)?;
                    ensure!(rank <= dim, "invalid value for `rank-p`: exceeds dim");
                    let (a, b) = sampling::near_projection_pair(&mut rng, dim, rank, strength);
                    (a, b, Some((rank, rank)))
                }
                None => {
                    let rank_p = p.usize("rank-p", dim / 2)?;
                    let rank_q = p.usize("rank-q", dim / 2)?;
                    ensure!(rank_p <= dim, "invalid value for `rank-p`: exceeds dim");
                    ensure!(rank_q <= dim, "invalid value for `rank-q`: exceeds dim");
                    let a = sampling::projection(&mut rng, dim, rank_p);
                    let b = sampling::projection(&mut rng, dim, rank_q);
                    (a, b, Some((rank_p, rank_q)))
                }
            }
        }
    };

    let pr = projections::pair(proj_p, proj_q).context("validating the pair")?;
    let n = pr.p.dim();
    let pd = pr.p.to_dense();
    let qd = pr.q.to_dense();
    let a = &pd - &qd;
    let b = DMatrix::<C64>::identity(n, n) - &pd - &qd;
    let pythagoras = operators::max_abs(&(&a * &a + &b * &b - DMatrix::identity(n, n)));
    let anticommutator = operators::max_abs(&(&a * &b + &b * &a));
    let index = projections::trace_index(&pr).context("difference trace")?;

    let mut record = ResultRecord::new("projections", seed);
    record.scalar("norm_pq", pr.norm_pq);
    record.scalar("pythagoras_defect", pythagoras);
    record.scalar("anticommutator_defect", anticommutator);
    record.integer("trace_index", index);
    record
        .targets
        .push(TargetCheck::new("difference-squares-sum-to-one", pythagoras, 0.0, 1e-10));
    record
        .targets
        .push(TargetCheck::new("difference-anticommutes", anticommutator, 0.0, 1e-10));
    if let Some((rank_p, rank_q)) = ranks {
        record.targets.push(TargetCheck::new(
            "index-counts-rank-difference",
            index as f64,
            rank_p as f64 - rank_q as f64,
            0.0,
        ));
    }

    if pr.norm_pq < 1.0 - 1e-6 {
        let u = projections::kato_unitary(&pr).context("direct rotation")?;
        let kato_defect = operators::max_abs(&(&u * &pd * u.adjoint() - &qd));
        let s = projections::sgn_unitary(&pr).context("sign symmetry")?;
        let sgn_defect = operators::max_abs(&(&s * &pd * s.adjoint() - &qd))
            .max(operators::max_abs(&(&s * &qd * s.adjoint() - &pd)));
        record.scalar("kato_conjugation_defect", kato_defect);
        record.scalar("sgn_conjugation_defect", sgn_defect);
        record
            .targets
            .push(TargetCheck::new("rotation-carries-p-to-q", kato_defect, 0.0, 1e-9));
        record
            .targets
            .push(TargetCheck::new("symmetry-swaps-p-and-q", sgn_defect, 0.0, 1e-9));
    }

    let halmos = projections::halmos(&pr).context("two-by-two decomposition")?;
    if let Some(rebuilt) = halmos.reconstruct_generic_q() {
        let da = operators::eig(&pr.a, None).context("difference spectrum")?;
        let generic = da.map_eigenvalues(|lam| {
            if lam.abs() > projections::CORNER_TOL && lam.abs() < 1.0 - projections::CORNER_TOL {
                1.0
            } else {
                0.0
            }
        });
        let q_generic = &generic * &qd * &generic;
        let defect = operators::max_abs(&(rebuilt - q_generic));
        record.scalar("halmos_defect", defect);
        record
            .targets
            .push(TargetCheck::new("block-form-reconstructs-q", defect, 0.0, 1e-8));
    }
    Ok(record)
}
