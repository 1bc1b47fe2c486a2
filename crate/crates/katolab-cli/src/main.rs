//! katolab: configuration-driven experiments on the katolab library.
//!
//! Every subcommand reads an optional flat TOML config, applies
//! command-line overrides, runs once or sweeps the single comma-ranged
//! parameter, and writes a deterministic JSON or CSV result record.
//! Exit codes: 0 all targets met, 1 error, 2 at least one target missed.

mod experiments;
mod matrices;
mod params;
mod record;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use record::ResultRecord;

#[derive(Parser)]
#[command(name = "katolab", version, about = "Spectral perturbation laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat TOML config; command-line flags override its keys
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for randomized inputs (KATOLAB_SEED overrides the config value)
    #[arg(long)]
    seed: Option<String>,
    /// Output file; stdout when omitted
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
    /// Output format: json or csv
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rayleigh-Schrodinger series for a seeded Hermitian pencil
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Matrix dimension
        #[arg(long)]
        dim: Option<String>,
        /// Eigenvalue index (ascending order)
        #[arg(long)]
        index: Option<String>,
        /// Series order
        #[arg(long)]
        order: Option<String>,
        /// Coupling where the series is summed
        #[arg(long)]
        beta: Option<String>,
    },
    /// Temple-Kato eigenvalue enclosure for a noisy seeded trial vector
    Temple {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<String>,
        #[arg(long)]
        index: Option<String>,
        /// Size of the random perturbation mixed into the trial vector
        #[arg(long)]
        noise: Option<String>,
    },
    /// Pairs-of-projections identities, conjugating unitaries, index
    Projections {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<String>,
        #[arg(long)]
        rank_p: Option<String>,
        #[arg(long)]
        rank_q: Option<String>,
        /// Rotation strength: derive Q from P instead of sampling it
        #[arg(long)]
        near: Option<String>,
        /// JSON file with the pair {"p": [[..]], "q": [[..]]}
        #[arg(long, value_name = "FILE")]
        pair: Option<String>,
    },
    /// Transport along an operator path: leak defects, Berry phase
    Adiabatic {
        #[command(flatten)]
        common: Common,
        /// two-level | colatitude | three-level | FILE.json
        #[arg(long)]
        path: Option<String>,
        /// Colatitude of the Bloch loop
        #[arg(long)]
        theta: Option<String>,
        /// Gap of the three-level path
        #[arg(long)]
        gap: Option<String>,
        /// Band index for paths loaded from files
        #[arg(long)]
        band: Option<String>,
        /// Time scales for the leak defect, e.g. 25,50,100
        #[arg(long = "T")]
        t_scales: Option<String>,
        /// Evolution steps; 0 picks max(2000, 40 T)
        #[arg(long)]
        steps: Option<String>,
    },
    /// Series tools: Pade, Borel, Hankel tests, product-formula errors
    Resum {
        #[command(flatten)]
        common: Common,
        /// euler | quartic | zero | FILE.json
        #[arg(long)]
        series: Option<String>,
        /// Truncation order for built-in series
        #[arg(long)]
        order: Option<String>,
        /// Evaluation point
        #[arg(long)]
        at: Option<String>,
        /// Reference value for partial-sum error tables
        #[arg(long)]
        truth: Option<String>,
        /// Pade orders N:M (denominator:numerator)
        #[arg(long)]
        pade: Option<String>,
        /// Emit (order, value) for diagonal Pade up to this order
        #[arg(long)]
        pade_table: Option<String>,
        /// Emit (order, error) for partial sums up to this order
        #[arg(long)]
        partial_table: Option<String>,
        /// Borel-sum the series at this point
        #[arg(long)]
        borel_z: Option<String>,
        /// Order-m Borel variant
        #[arg(long)]
        borel_order: Option<String>,
        /// Hankel determinant test up to this size
        #[arg(long)]
        hankel_k: Option<String>,
        /// Trotter step count for a seeded Hermitian pair
        #[arg(long)]
        trotter_n: Option<String>,
        /// Time for the Trotter comparison
        #[arg(long)]
        trotter_t: Option<String>,
        #[arg(long)]
        trotter_dim: Option<String>,
        /// Alternating-projection power for two lines
        #[arg(long)]
        alt_n: Option<String>,
        /// Angle between the two lines
        #[arg(long)]
        alt_theta: Option<String>,
    },
    /// Named model problems with reference targets
    Models {
        #[command(flatten)]
        common: Common,
        /// helium | cusp | wvn | threshold | hardy | rellich | half-pi
        #[arg(long)]
        name: String,
        #[arg(long)]
        mass_ratio: Option<String>,
        /// Radial grid R:n (box radius, interior points)
        #[arg(long)]
        grid: Option<String>,
        /// Nuclear charge
        #[arg(long = "Z")]
        z: Option<String>,
        /// inv-sqrt | log | inv
        #[arg(long)]
        psi_kind: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        /// Dimension for Hardy/Rellich constants
        #[arg(long)]
        nu: Option<String>,
        #[arg(long)]
        kmin: Option<String>,
        #[arg(long)]
        kmax: Option<String>,
        /// Log-grid size for the half-pi kernel
        #[arg(long)]
        klog: Option<String>,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli.cmd) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn execute(cmd: Cmd) -> Result<bool> {
    let (common, schema, flags) = split(cmd);
    let base = params::load(&schema, common.config.as_deref(), flags)?;
    let points = params::expand(&schema, &base)?;
    let records: Vec<ResultRecord> = points
        .into_par_iter()
        .map(|mut point| experiments::run(&mut point))
        .collect::<Result<Vec<_>>>()?;

    let mut sink = base.clone();
    let format = sink.text("format", "json");
    let text = match format.as_str() {
        "json" => record::to_json(&records)?,
        "csv" => record::to_csv(&records),
        other => anyhow::bail!("invalid value for `format`: {other}"),
    };
    match sink.text_opt("out") {
        Some(path) => record::write_atomic(std::path::Path::new(&path), &text)?,
        None => print!("{text}"),
    }
    Ok(records.iter().all(|r| r.all_pass()))
}

type Flags = Vec<(&'static str, Option<String>)>;

fn split(cmd: Cmd) -> (Common, params::Schema, Flags) {
    match cmd {
        Cmd::Perturb {
            common,
            dim,
            index,
            order,
            beta,
        } => {
            let flags = with_common(
                &common,
                vec![("dim", dim), ("index", index), ("order", order), ("beta", beta)],
            );
            (common, params::schema_for("perturb"), flags)
        }
        Cmd::Temple {
            common,
            dim,
            index,
            noise,
        } => {
            let flags = with_common(
                &common,
                vec![("dim", dim), ("index", index), ("noise", noise)],
            );
            (common, params::schema_for("temple"), flags)
        }
        Cmd::Projections {
            common,
            dim,
            rank_p,
            rank_q,
            near,
            pair,
        } => {
            let flags = with_common(
                &common,
                vec![
                    ("dim", dim),
                    ("rank-p", rank_p),
                    ("rank-q", rank_q),
                    ("near", near),
                    ("pair", pair),
                ],
            );
            (common, params::schema_for("projections"), flags)
        }
        Cmd::Adiabatic {
            common,
            path,
            theta,
            gap,
            band,
            t_scales,
            steps,
        } => {
            let flags = with_common(
                &common,
                vec![
                    ("path", path),
                    ("theta", theta),
                    ("gap", gap),
                    ("band", band),
                    ("T", t_scales),
                    ("steps", steps),
                ],
            );
            (common, params::schema_for("adiabatic"), flags)
        }
        Cmd::Resum {
            common,
            series,
            order,
            at,
            truth,
            pade,
            pade_table,
            partial_table,
            borel_z,
            borel_order,
            hankel_k,
            trotter_n,
            trotter_t,
            trotter_dim,
            alt_n,
            alt_theta,
        } => {
            let flags = with_common(
                &common,
                vec![
                    ("series", series),
                    ("order", order),
                    ("at", at),
                    ("truth", truth),
                    ("pade", pade),
                    ("pade-table", pade_table),
                    ("partial-table", partial_table),
                    ("borel-z", borel_z),
                    ("borel-order", borel_order),
                    ("hankel-k", hankel_k),
                    ("trotter-n", trotter_n),
                    ("trotter-t", trotter_t),
                    ("trotter-dim", trotter_dim),
                    ("alt-n", alt_n),
                    ("alt-theta", alt_theta),
                ],
            );
            (common, params::schema_for("resum"), flags)
        }
        Cmd::Models {
            common,
            name,
            mass_ratio,
            grid,
            z,
            psi_kind,
            beta,
            nu,
            kmin,
            kmax,
            klog,
        } => {
            let flags = with_common(
                &common,
                vec![
                    ("name", Some(name)),
                    ("mass-ratio", mass_ratio),
                    ("grid", grid),
                    ("Z", z),
                    ("psi-kind", psi_kind),
                    ("beta", beta),
                    ("nu", nu),
                    ("kmin", kmin),
                    ("kmax", kmax),
                    ("klog", klog),
                ],
            );
            (common, params::schema_for("models"), flags)
        }
    }
}

fn with_common(common: &Common, mut flags: Flags) -> Flags {
    flags.push(("seed", common.seed.clone()));
    flags.push(("out", common.out.clone()));
    flags.push(("format", common.format.clone()));
    flags
}
