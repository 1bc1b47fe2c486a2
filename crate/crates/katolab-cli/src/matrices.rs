//! JSON input files: series coefficients as a plain array, matrices as
//! row-major arrays whose entries are either a real number or an
//! [re, im] pair.

use std::path::Path;

use anyhow::{bail, Context, Result};
use katolab::adiabatic::{Band, OperatorPath};
use katolab::operators::{C64, HermitianMatrix, OrthogonalProjection};
use nalgebra::DMatrix;
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(*re, 0.0),
            Entry::Complex([re, im]) => C64::new(*re, *im),
        }
    }
}

#[derive(Deserialize)]
struct PairFile {
    p: Vec<Vec<Entry>>,
    q: Vec<Vec<Entry>>,
}

#[derive(Deserialize)]
struct PathFile {
    samples: Vec<Vec<Vec<Entry>>>,
}

fn dense(rows: &[Vec<Entry>], what: &str) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if n == 0 {
        bail!("{what}: matrix has no rows");
    }
    if rows.iter().any(|r| r.len() != n) {
        bail!("{what}: matrix must be square");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

pub fn load_series(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read series file {}", path.display()))?;
    let coeffs: Vec<f64> = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected a JSON array of numbers", path.display()))?;
    Ok(coeffs)
}

pub fn load_pair(path: &Path) -> Result<(OrthogonalProjection, OrthogonalProjection)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read pair file {}", path.display()))?;
    let file: PairFile = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected {{\"p\": [[..]], \"q\": [[..]]}}", path.display()))?;
    let build = |rows: &[Vec<Entry>], what: &str| -> Result<OrthogonalProjection> {
        let m = HermitianMatrix::with_tol(dense(rows, what)?, 1e-8)
            .with_context(|| format!("{what} is not Hermitian"))?;
        OrthogonalProjection::new(m).with_context(|| format!("{what} is not a projection"))
    };
    Ok((build(&file.p, "p")?, build(&file.q, "q")?))
}

/// A path from uniformly spaced Hermitian samples on [0, 1], linearly
/// interpolated between neighbours.
pub fn load_path(path: &Path, band: usize) -> Result<OperatorPath> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read path file {}", path.display()))?;
    let file: PathFile = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected {{\"samples\": [[[..]], ..]}}", path.display()))?;
    if file.samples.len() < 2 {
        bail!("{}: need at least two samples", path.display());
    }
    let mut denses = Vec::with_capacity(file.samples.len());
    for (k, rows) in file.samples.iter().enumerate() {
        let m = dense(rows, &format!("sample {k}"))?;
        HermitianMatrix::with_tol(m.clone(), 1e-8)
            .with_context(|| format!("sample {k} is not Hermitian"))?;
        if m.nrows() != file.samples[0].len() {
            bail!("sample {k} differs in dimension");
        }
        denses.push(m);
    }
    let segments = denses.len() - 1;
    Ok(OperatorPath::new(
        move |s: f64| {
            let x = s.clamp(0.0, 1.0) * segments as f64;
            let i = (x.floor() as usize).min(segments - 1);
            let w = x - i as f64;
            let m = &denses[i] * C64::new(1.0 - w, 0.0) + &denses[i + 1] * C64::new(w, 0.0);
            HermitianMatrix::with_tol(m, 1e-8)
                .expect("convex combination of Hermitian samples stays Hermitian")
        },
        Band::Index(band),
    ))
}
