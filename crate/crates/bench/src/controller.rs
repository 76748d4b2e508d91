use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};

use crate::error::{BenchError, Result};
use crate::scenario::PlantScenario;

/// Rate of the exponential distribution of the state-weight eigenvalues.
pub const Q_RATE: f64 = 1.0;
/// Rate of the exponential distribution of the input-weight eigenvalues.
pub const R_RATE: f64 = 100.0;

/// Randomised quadratic weights and the state-feedback gain they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSample {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub seed: u64,
}

impl ControllerSample {
    /// Controller for given weights; checks symmetry and positive definiteness.
    pub fn from_weights(scenario: &PlantScenario, q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        check_spd("Q", &q, scenario.states())?;
        check_spd("R", &r, scenario.inputs())?;
        let k = finite_horizon_gain(
            &scenario.nominal_a,
            &scenario.nominal_b,
            &q,
            &r,
            scenario.riccati_horizon,
        )?;
        Ok(Self { q, r, k, seed: 0 })
    }
}

fn check_spd(name: &str, m: &DMatrix<f64>, dim: usize) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(BenchError::Dimension(format!("{name} must be {dim}x{dim}")));
    }
    if (m - m.transpose()).amax() > 1e-10 * m.amax().max(1.0) {
        return Err(BenchError::Invalid(format!("{name} is not symmetric")));
    }
    let min_eig = m.clone().symmetric_eigenvalues().min();
    if !(min_eig > 0.0) {
        return Err(BenchError::Invalid(format!(
            "{name} is not positive definite (smallest eigenvalue {min_eig})"
        )));
    }
    Ok(())
}

/// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
/// the signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn positive_exp<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let dist = Exp::new(rate).expect("positive rate");
    loop {
        let v: f64 = rng.sample(dist);
        if v > 0.0 {
            return v;
        }
    }
}

/// `W diag(d) Wᵀ` with Haar `W` and i.i.d. `Exp(rate)` diagonal.
pub fn random_weight<R: Rng + ?Sized>(dim: usize, rate: f64, rng: &mut R) -> DMatrix<f64> {
    let w = random_orthogonal(dim, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |_, _| positive_exp(rate, rng)));
    let m = &w * d * w.transpose();
    // symmetrise away rounding
    (&m + m.transpose()) * 0.5
}

/// Draw `Q ~ W_Q D_Q W_Qᵀ` with `D_Q ~ Exp(1)` and `R` likewise with
/// `Exp(100)`, and derive the feedback gain on the nominal plant.
pub fn sample_controller(scenario: &PlantScenario, seed: u64) -> ControllerSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_weight(scenario.states(), Q_RATE, &mut rng);
    let r = random_weight(scenario.inputs(), R_RATE, &mut rng);
    let k = finite_horizon_gain(
        &scenario.nominal_a,
        &scenario.nominal_b,
        &q,
        &r,
        scenario.riccati_horizon,
    )
    .expect("R positive definite keeps the recursion well posed");
    ControllerSample { q, r, k, seed }
}

/// First-step gain of the finite-horizon LQR recursion
/// `P ← Q + Aᵀ P (A - B K)`, `K = (R + Bᵀ P B)⁻¹ Bᵀ P A`, started at `P = Q`
/// and run for `horizon` steps.
pub fn finite_horizon_gain(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    horizon: usize,
) -> Result<DMatrix<f64>> {
    let mut p = q.clone();
    let mut k = DMatrix::zeros(b.ncols(), a.nrows());
    for _ in 0..horizon {
        let bt_p = b.transpose() * &p;
        let gram = r + &bt_p * b;
        let chol = gram
            .cholesky()
            .ok_or(BenchError::Singular("R + B'PB in the Riccati recursion"))?;
        k = chol.solve(&(&bt_p * a));
        let next = q + a.transpose() * &p * (a - b * &k);
        p = (&next + next.transpose()) * 0.5;
    }
    Ok(k)
}
