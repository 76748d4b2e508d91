use nalgebra::{DMatrix, DVector};

use crate::controller::finite_horizon_gain;
use crate::error::{BenchError, Result};

/// Default Riccati recursion length for controller gains.
pub const DEFAULT_RICCATI_HORIZON: usize = 40;

/// A nominal plant `x⁺ = Ax + Bu`, `y = Cx`, the standard deviations of the
/// entry-wise perturbations applied to `A` and `B`, and the tracking task.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantScenario {
    pub nominal_a: DMatrix<f64>,
    pub nominal_b: DMatrix<f64>,
    pub output_c: DMatrix<f64>,
    pub std_a: DMatrix<f64>,
    pub std_b: DMatrix<f64>,
    /// `o × T` output reference.
    pub reference: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub riccati_horizon: usize,
    /// `C⁺`, used to map the output reference to a state target.
    pub(crate) c_pinv: DMatrix<f64>,
    /// Spectral radius of `A - BK` under the reference gain `Q = I`, `R = I`.
    pub reference_spectral_radius: f64,
}

impl PlantScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        nominal_a: DMatrix<f64>,
        nominal_b: DMatrix<f64>,
        output_c: DMatrix<f64>,
        std_a: DMatrix<f64>,
        std_b: DMatrix<f64>,
        reference: DMatrix<f64>,
        x0: DVector<f64>,
        riccati_horizon: usize,
    ) -> Result<Self> {
        let s = nominal_a.nrows();
        let u = nominal_b.ncols();
        let o = output_c.nrows();
        let dim = |what: &str, got: (usize, usize), want: (usize, usize)| {
            if got == want {
                Ok(())
            } else {
                Err(BenchError::Dimension(format!(
                    "{what} is {}x{}, expected {}x{}",
                    got.0, got.1, want.0, want.1
                )))
            }
        };
        if s == 0 || u == 0 || o == 0 {
            return Err(BenchError::Dimension("states, inputs and outputs must be >= 1".into()));
        }
        dim("A", nominal_a.shape(), (s, s))?;
        dim("B", nominal_b.shape(), (s, u))?;
        dim("C", output_c.shape(), (o, s))?;
        dim("std_a", std_a.shape(), (s, s))?;
        dim("std_b", std_b.shape(), (s, u))?;
        if reference.nrows() != o || reference.ncols() == 0 {
            return Err(BenchError::Dimension(format!(
                "reference must have {o} rows and at least one column, got {}x{}",
                reference.nrows(),
                reference.ncols()
            )));
        }
        if x0.len() != s {
            return Err(BenchError::Dimension(format!("x0 has {} entries, expected {s}", x0.len())));
        }
        if riccati_horizon == 0 {
            return Err(BenchError::Invalid("riccati_horizon must be >= 1".into()));
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        if ![&nominal_a, &nominal_b, &output_c, &reference].into_iter().all(finite)
            || !x0.iter().all(|v| v.is_finite())
        {
            return Err(BenchError::Invalid("matrices must be finite".into()));
        }
        if std_a.iter().chain(std_b.iter()).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(BenchError::Invalid("perturbation std must be finite and >= 0".into()));
        }
        let c_pinv = output_c
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|_| BenchError::Singular("pseudo-inverse of C"))?;
        let k = finite_horizon_gain(
            &nominal_a,
            &nominal_b,
            &DMatrix::identity(s, s),
            &DMatrix::identity(u, u),
            riccati_horizon,
        )?;
        let radius = spectral_radius(&(&nominal_a - &nominal_b * k));
        if !(radius < 1.0) {
            return Err(BenchError::Unstable(radius));
        }
        Ok(Self {
            nominal_a,
            nominal_b,
            output_c,
            std_a,
            std_b,
            reference,
            x0,
            riccati_horizon,
            c_pinv,
            reference_spectral_radius: radius,
        })
    }

    /// The shipped 4-state, 2-input, 2-output scenario with `T = 120` and
    /// perturbations at 5% of each nominal entry (floor 0.01).
    pub fn default_scenario() -> Self {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.9, 0.1, 0.0, 0.0, //
                0.0, 0.85, 0.1, 0.0, //
                0.05, 0.0, 0.8, 0.1, //
                0.0, 0.05, 0.0, 0.9,
            ],
        );
        let b = DMatrix::from_row_slice(4, 2, &[0.5, 0.0, 0.2, 0.1, 0.0, 0.4, 0.1, 0.5]);
        let c = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let reference = DMatrix::from_fn(2, 120, |i, t| match (i, t) {
            (0, t) if t < 40 => 1.0,
            (0, t) if t < 80 => -0.5,
            (0, _) => 0.5,
            (_, t) if t < 60 => 0.0,
            _ => 1.0,
        });
        let std_a = relative_std(&a, 0.05, 0.01);
        let std_b = relative_std(&b, 0.05, 0.01);
        Self::new(a, b, c, std_a, std_b, reference, DVector::zeros(4), DEFAULT_RICCATI_HORIZON)
            .expect("default scenario is valid")
    }

    pub fn states(&self) -> usize {
        self.nominal_a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.nominal_b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.output_c.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.reference.ncols()
    }

    /// Copy with a different output reference (any horizon).
    pub fn with_reference(&self, reference: DMatrix<f64>) -> Result<Self> {
        if reference.nrows() != self.outputs() || reference.ncols() == 0 {
            return Err(BenchError::Dimension(format!(
                "reference must have {} rows and at least one column",
                self.outputs()
            )));
        }
        Ok(Self {
            reference,
            ..self.clone()
        })
    }

    /// Copy with every perturbation standard deviation set to zero.
    pub fn without_perturbation(&self) -> Self {
        Self {
            std_a: DMatrix::zeros(self.states(), self.states()),
            std_b: DMatrix::zeros(self.states(), self.inputs()),
            ..self.clone()
        }
    }
}

/// `max(fraction·|m_ij|, floor)` entry-wise.
pub fn relative_std(m: &DMatrix<f64>, fraction: f64, floor: f64) -> DMatrix<f64> {
    m.map(|v| (fraction * v.abs()).max(floor))
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
