//! Trajectory average of the noisy von Neumann equation.
//!
//! Each realization evolves a pure state with the exact unitary of every
//! step, the white-noise increment `ΔW ~ N(0, dt)` entering the step
//! generator as
//!
//! * phase noise: `(Ω dt + √γ_d ΔW) S_z + 2η dt S_x`
//! * amplitude noise: `Ω dt S_z + (2η dt + 2√γ_a ΔW) S_x`
//!
//! Within a step the noise is constant, which is the Stratonovich
//! (midpoint) reading of the multiplicative noise.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::spin::{self, Basis, CollectiveState, DickeBasis, Preparation, SpinOp};
use crate::C64;

/// Number of bootstrap resamples for the standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Largest tolerated `|‖ψ‖² − 1|` of a trajectory.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Largest allowed `dt · rate`.
pub const MAX_STEP_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Phase,
    Amplitude,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Phase => "phase",
            NoiseKind::Amplitude => "amplitude",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub n_trajectories: usize,
    pub dt: f64,
    pub seed: u64,
    pub kind: NoiseKind,
}

impl TrajectoryConfig {
    pub fn validate(&self, rate: f64) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::invalid("need at least one trajectory"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {}", self.dt)));
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("noise rate must be non-negative, got {rate}")));
        }
        if self.dt * rate > MAX_STEP_RATE {
            return Err(Error::invalid(format!(
                "dt * rate = {:.3e} exceeds {MAX_STEP_RATE}",
                self.dt * rate
            )));
        }
        Ok(())
    }
}

/// Trajectory-averaged density matrix with elementwise bootstrap standard
/// errors (`√(SE_re² + SE_im²)` per element).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub state: CollectiveState,
    pub standard_error: DMatrix<f64>,
    pub n_trajectories: usize,
}

impl EnsembleAverage {
    /// Largest elementwise `|ρ − reference| / (SE + floor)`; `floor` keeps
    /// elements that are constant across trajectories from dividing by zero.
    pub fn worst_z_score(&self, reference: &DMatrix<C64>, floor: f64) -> f64 {
        let rho = self.state.matrix();
        let mut worst = 0.0_f64;
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                let z = (rho[(i, j)] - reference[(i, j)]).norm() / (self.standard_error[(i, j)] + floor);
                worst = worst.max(z);
            }
        }
        worst
    }
}

#[allow(clippy::too_many_arguments)]
fn step_generator(
    sz: &DMatrix<f64>,
    sx: &DMatrix<f64>,
    detuning: f64,
    drive: f64,
    kind: NoiseKind,
    rate: f64,
    dt: f64,
    dw: f64,
) -> DMatrix<f64> {
    let kick = rate.sqrt() * dw;
    match kind {
        NoiseKind::Phase => sz * (detuning * dt + kick) + sx * (2.0 * drive * dt),
        NoiseKind::Amplitude => sz * (detuning * dt) + sx * (2.0 * drive * dt + 2.0 * kick),
    }
}

/// Averages `n_trajectories` noisy unitary evolutions of a single ensemble
/// under `Ω S_z + 2η S_x` for a time `tau`.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_ensemble_average(
    n_atoms: usize,
    detuning: f64,
    drive: f64,
    rate: f64,
    tau: f64,
    preparation: Preparation,
    cfg: &TrajectoryConfig,
) -> Result<EnsembleAverage> {
    cfg.validate(rate)?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("evolution time must be non-negative, got {tau}")));
    }
    let dicke = DickeBasis::new(n_atoms)?;
    let basis = Basis::Dicke(dicke);
    let sz = spin::build_operator(SpinOp::Sz, &dicke).map(|z| z.re);
    let sx = spin::build_operator(SpinOp::Sx, &dicke).map(|z| z.re);
    let psi0 = spin::prepare_vector(&basis, preparation);
    let steps = (tau / cfg.dt).ceil().max(if tau > 0.0 { 1.0 } else { 0.0 }) as usize;
    let dt = if steps == 0 { 0.0 } else { tau / steps as f64 };
    let sqrt_dt = dt.sqrt();

    let states: Vec<DMatrix<C64>> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|index| {
            let mut rng = super::stream(cfg.seed, index as u64);
            let mut psi: DVector<C64> = psi0.clone();
            for _ in 0..steps {
                let dw = if rate > 0.0 {
                    sqrt_dt * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                let g = step_generator(&sz, &sx, detuning, drive, cfg.kind, rate, dt, dw);
                psi = linalg::unitary_from_real_symmetric(&g, 1.0) * psi;
            }
            let drift = (psi.norm_squared() - 1.0).abs();
            if drift > NORM_DRIFT_TOL {
                return Err(Error::TrajectoryIntegrity {
                    trajectory: index,
                    drift,
                });
            }
            Ok(linalg::outer(&psi))
        })
        .collect::<Result<_>>()?;

    let n = states.len() as f64;
    let mean = linalg::pairwise_sum(&states) / C64::new(n, 0.0);
    let standard_error = bootstrap_standard_error(&states, cfg.seed);
    Ok(EnsembleAverage {
        state: CollectiveState::from_parts(basis, mean),
        standard_error,
        n_trajectories: cfg.n_trajectories,
    })
}

fn bootstrap_standard_error(samples: &[DMatrix<C64>], seed: u64) -> DMatrix<f64> {
    let n = samples.len();
    let (r, c) = samples[0].shape();
    if n < 2 {
        return DMatrix::zeros(r, c);
    }
    // A stream index no trajectory uses.
    let mut rng = super::stream(seed, u64::MAX);
    let draws: Vec<Vec<usize>> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
        .collect();
    let means: Vec<DMatrix<C64>> = draws
        .par_iter()
        .map(|idx| {
            let picked: Vec<DMatrix<C64>> = idx.iter().map(|&i| samples[i].clone()).collect();
            linalg::pairwise_sum(&picked) / C64::new(n as f64, 0.0)
        })
        .collect();
    let b = BOOTSTRAP_RESAMPLES as f64;
    let centre = linalg::pairwise_sum(&means) / C64::new(b, 0.0);
    DMatrix::from_fn(r, c, |i, j| {
        let (mut vr, mut vi) = (0.0, 0.0);
        for m in &means {
            let d = m[(i, j)] - centre[(i, j)];
            vr += d.re * d.re;
            vi += d.im * d.im;
        }
        ((vr + vi) / (b - 1.0)).sqrt()
    })
}
