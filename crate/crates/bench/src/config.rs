use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::scenario::{relative_std, PlantScenario, DEFAULT_RICCATI_HORIZON};

fn default_fraction() -> f64 {
    0.05
}

fn default_floor() -> f64 {
    0.01
}

fn default_riccati() -> usize {
    DEFAULT_RICCATI_HORIZON
}

/// File form of a [`PlantScenario`]. Matrices are row-major nested arrays.
/// The reference is either inline (`o` rows of length `T`) or a CSV file
/// with one row per time step and one column per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    /// Perturbation std as a fraction of each nominal entry's magnitude.
    #[serde(default = "default_fraction")]
    pub perturbation_fraction: f64,
    #[serde(default = "default_floor")]
    pub perturbation_floor: f64,
    /// Explicit per-entry std for `A`, overriding the relative rule.
    #[serde(default)]
    pub std_a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub std_b: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub reference: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub reference_csv: Option<PathBuf>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_riccati")]
    pub riccati_horizon: usize,
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(BenchError::Dimension(format!("{name} is empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(BenchError::Dimension(format!("{name} has rows of unequal length")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Reads a headerless numeric CSV (`#` starts a comment) into `o × T`.
pub fn read_reference_csv(path: &Path) -> Result<DMatrix<f64>> {
    let io = |e: std::io::Error| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io(e.into()))?;
    let mut steps: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io(e.into()))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| BenchError::Invalid(format!("{} row {}: {e}", path.display(), line + 1)))?;
        steps.push(row);
    }
    Ok(matrix("reference_csv", &steps)?.transpose())
}

impl ScenarioConfig {
    /// Build the scenario; relative paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<PlantScenario> {
        let a = matrix("a", &self.a)?;
        let b = matrix("b", &self.b)?;
        let c = matrix("c", &self.c)?;
        if !(self.perturbation_fraction >= 0.0 && self.perturbation_floor >= 0.0) {
            return Err(BenchError::Invalid(
                "perturbation_fraction and perturbation_floor must be >= 0".into(),
            ));
        }
        let std_a = match &self.std_a {
            Some(m) => matrix("std_a", m)?,
            None => relative_std(&a, self.perturbation_fraction, self.perturbation_floor),
        };
        let std_b = match &self.std_b {
            Some(m) => matrix("std_b", m)?,
            None => relative_std(&b, self.perturbation_fraction, self.perturbation_floor),
        };
        let reference = match (&self.reference, &self.reference_csv) {
            (Some(r), None) => matrix("reference", r)?,
            (None, Some(p)) => read_reference_csv(&base_dir.join(p))?,
            _ => {
                return Err(BenchError::Invalid(
                    "exactly one of reference and reference_csv must be given".into(),
                ))
            }
        };
        let x0 = match &self.x0 {
            Some(v) => DVector::from_vec(v.clone()),
            None => DVector::zeros(a.nrows()),
        };
        PlantScenario::new(a, b, c, std_a, std_b, reference, x0, self.riccati_horizon)
    }
}
