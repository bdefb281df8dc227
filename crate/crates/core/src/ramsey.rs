//! Ramsey spectroscopy: π/2 pulse, free evolution for `τ`, π/2 pulse, then a
//! measurement of the total inversion.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dynamics::{self, Engine, HamiltonianSpec, NoiseModel, Scheme};
use crate::error::{Error, Result};
use crate::moments::{MomentModel, SpinMoments};
use crate::sensitivity::{self, uniform_grid, SensitivityPoint};
use crate::spin::{self, Basis, CollectiveState, Preparation, SpinOp, Subensemble};
use crate::C64;

/// Integrator tolerance for runs with amplitude noise.
pub const AMPLITUDE_TOL: f64 = 1e-9;

/// Measured moments at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyOutcome {
    pub detuning: f64,
    pub tau: f64,
    pub signal: f64,
    pub second_moment: f64,
    pub std_dev: f64,
}

impl RamseyOutcome {
    pub fn new(detuning: f64, tau: f64, signal: f64, second_moment: f64) -> Self {
        Self {
            detuning,
            tau,
            signal,
            second_moment,
            std_dev: sensitivity::std_dev(signal, second_moment),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyOptions {
    pub engine: Engine,
    /// Integrator tolerance, only used when density matrices are integrated.
    pub tol: f64,
}

impl Default for RamseyOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Auto,
            tol: AMPLITUDE_TOL,
        }
    }
}

impl RamseyOptions {
    pub fn with_engine(engine: Engine) -> Self {
        Self {
            engine,
            ..Self::default()
        }
    }
}

/// Detuning grid specification, resolved against the interrogation time.
#[derive(Debug, Clone, PartialEq)]
pub enum DetuningGrid {
    /// `points` uniform detunings over one fringe period `[−π/τ, π/τ]`.
    Fringe { points: usize },
    Range { min: f64, max: f64, count: usize },
    Explicit(Vec<f64>),
}

impl Default for DetuningGrid {
    fn default() -> Self {
        DetuningGrid::Fringe {
            points: Self::DEFAULT_FRINGE_POINTS,
        }
    }
}

impl DetuningGrid {
    pub const DEFAULT_FRINGE_POINTS: usize = 801;

    pub fn resolve(&self, tau: f64) -> Result<Vec<f64>> {
        match self {
            DetuningGrid::Fringe { points } => {
                if !(tau > 0.0) {
                    return Err(Error::invalid("a fringe grid needs a positive interrogation time"));
                }
                let half = std::f64::consts::PI / tau;
                uniform_grid(-half, half, *points)
            }
            DetuningGrid::Range { min, max, count } => uniform_grid(*min, *max, *count),
            DetuningGrid::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::invalid("detuning grid is empty"));
                }
                if v.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("detuning grid must be strictly increasing"));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Final `⟨S_z⟩ = (N/2) e^{−γ_d τ/2} cos(Ωτ)`, shared by all schemes.
pub fn ramsey_signal_analytic(n_atoms: usize, detuning: f64, gamma_d: f64, tau: f64) -> f64 {
    0.5 * n_atoms as f64 * (-0.5 * gamma_d * tau).exp() * (detuning * tau).cos()
}

/// Final `⟨S_z²⟩` for two arms of `N/2` atoms with detunings `Ω₁`, `Ω₂`
/// under collective phase noise. `Ω₁ = Ω₂` is the single-ensemble result and
/// holds for any `N`; distinct detunings need even `N`.
pub fn ramsey_second_moment_analytic(n_atoms: usize, omega1: f64, omega2: f64, gamma_d: f64, tau: f64) -> Result<f64> {
    if n_atoms == 0 {
        return Err(Error::invalid("need at least one atom"));
    }
    if omega1 != omega2 && !n_atoms.is_multiple_of(2) {
        return Err(Error::invalid(format!("distinct arm detunings need an even atom number, got {n_atoms}")));
    }
    let n = n_atoms as f64;
    let (c11, c22) = ((2.0 * omega1 * tau).cos(), (2.0 * omega2 * tau).cos());
    let sum = ((omega1 + omega2) * tau).cos();
    let diff = ((omega1 - omega2) * tau).cos();
    let decay = 0.5 * (-2.0 * gamma_d * tau).exp();
    Ok(n / 8.0 * (decay * ((n / 2.0 - 1.0) * (c11 + c22) + n * sum) + n / 2.0 * (diff + 1.0) + 1.0))
}

/// Closed-form phase-noise outcome of `scheme`; the phase-conjugate scheme
/// has the same moments as the twin-detuning one.
pub fn ramsey_outcome_analytic(n_atoms: usize, detuning: f64, gamma_d: f64, tau: f64, scheme: Scheme) -> Result<RamseyOutcome> {
    let omega2 = if scheme.is_split() { -detuning } else { detuning };
    let second = ramsey_second_moment_analytic(n_atoms, detuning, omega2, gamma_d, tau)?;
    Ok(RamseyOutcome::new(
        detuning,
        tau,
        ramsey_signal_analytic(n_atoms, detuning, gamma_d, tau),
        second,
    ))
}

/// Closed-form sensitivity under phase noise:
/// `√(N sinh γτ + cosh γτ)/(τ√N)` for one ensemble and `√cosh γτ/(τ√N)` for
/// the split schemes.
pub fn ramsey_sensitivity_analytic(n_atoms: usize, gamma_d: f64, tau: f64, scheme: Scheme) -> Result<f64> {
    if n_atoms == 0 {
        return Err(Error::invalid("need at least one atom"));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("sensitivity needs a positive interrogation time, got {tau}")));
    }
    if !(gamma_d >= 0.0) || !gamma_d.is_finite() {
        return Err(Error::invalid(format!("gamma_d must be non-negative, got {gamma_d}")));
    }
    let n = n_atoms as f64;
    let x = gamma_d * tau;
    let var = match scheme {
        Scheme::Standard => n * x.sinh() + x.cosh(),
        Scheme::TwinDetuning | Scheme::PhaseConjugate => x.cosh(),
    };
    Ok(var.sqrt() / (tau * n.sqrt()))
}

/// Free-evolution dynamics of one Ramsey run.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Free {
    Scheme(Scheme, f64),
    /// Split ensemble with independent arm detunings, collective noise.
    Arms(f64, f64),
}

impl Free {
    fn basis(&self, n_atoms: usize) -> Result<Basis> {
        match self {
            Free::Scheme(s, _) => s.basis(n_atoms),
            Free::Arms(..) => Basis::split(n_atoms),
        }
    }

    fn label(&self) -> f64 {
        match self {
            Free::Scheme(_, w) => *w,
            Free::Arms(w, _) => *w,
        }
    }

    fn moment_model(&self, noise: &NoiseModel) -> Result<MomentModel> {
        match *self {
            Free::Scheme(s, w) => Ok(MomentModel::from_spec(&HamiltonianSpec::free(w, s), noise)),
            Free::Arms(w1, w2) => {
                let mut jumps = Vec::new();
                if noise.gamma_d > 0.0 {
                    jumps.push((noise.gamma_d / 2.0, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]));
                }
                if noise.gamma_a > 0.0 {
                    jumps.push((2.0 * noise.gamma_a, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
                }
                MomentModel::new(2, vec![0.0, 0.0, w1, 0.0, 0.0, w2], jumps)
            }
        }
    }
}

/// Operators shared by every density-matrix run on one basis.
struct DensityKernel {
    basis: Basis,
    initial: CollectiveState,
    pulse: DMatrix<C64>,
    sz: DMatrix<C64>,
    sz2: DMatrix<C64>,
}

impl DensityKernel {
    fn new(basis: Basis) -> Self {
        let sz = spin::collective_operator(SpinOp::Sz, &basis);
        Self {
            initial: spin::coherent_state_after_first_pulse(&basis),
            pulse: spin::rotation_y(&basis, FRAC_PI_2),
            sz2: &sz * &sz,
            sz,
            basis,
        }
    }

    fn run(&self, free: Free, noise: &NoiseModel, tau: f64, tol: f64) -> Result<(f64, f64)> {
        let evolved = if noise.gamma_a == 0.0 {
            match free {
                Free::Scheme(s, w) => dynamics::free_propagate(&self.initial, &HamiltonianSpec::free(w, s), noise.gamma_d, tau)?,
                Free::Arms(w1, w2) => dynamics::split_dephasing_propagate(&self.initial, w1, w2, noise.gamma_d, tau)?,
            }
        } else {
            let (h, jumps) = match free {
                Free::Scheme(s, w) => {
                    let spec = HamiltonianSpec::free(w, s);
                    (spec.hamiltonian(&self.basis)?, spec.jumps(noise, &self.basis)?)
                }
                Free::Arms(w1, w2) => {
                    let Basis::Split(split) = self.basis else {
                        unreachable!("arm detunings always use the split basis")
                    };
                    let sz = spin::build_operator(SpinOp::Sz, &split.sub_basis());
                    let h = spin::embed(&sz, Subensemble::First, &split)? * C64::new(w1, 0.0)
                        + spin::embed(&sz, Subensemble::Second, &split)? * C64::new(w2, 0.0);
                    let jumps = HamiltonianSpec::free(0.0, Scheme::TwinDetuning).jumps(noise, &self.basis)?;
                    (h, jumps)
                }
            };
            dynamics::evolve(&self.initial, &h, &jumps, tau, tol)?
        };
        let fin = evolved.transform(&self.pulse)?;
        Ok((fin.mean(&self.sz)?, fin.mean(&self.sz2)?))
    }
}

fn check_inputs(noise: &NoiseModel, tau: f64) -> Result<()> {
    NoiseModel::new(noise.gamma_d, noise.gamma_a)?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("interrogation time must be non-negative, got {tau}")));
    }
    Ok(())
}

fn moments_run(free: Free, n_atoms: usize, noise: &NoiseModel, tau: f64) -> Result<(f64, f64)> {
    let scheme = match free {
        Free::Scheme(s, _) => s,
        Free::Arms(..) => Scheme::TwinDetuning,
    };
    let model = free.moment_model(noise)?;
    let m = SpinMoments::prepared(scheme, n_atoms, Preparation::Ground)?
        .rotate_y(FRAC_PI_2)
        .evolve(&model, tau)?
        .rotate_y(FRAC_PI_2);
    Ok(m.total_sz())
}

fn simulate_many(n_atoms: usize, free: &[Free], noise: &NoiseModel, tau: f64, opts: &RamseyOptions) -> Result<Vec<RamseyOutcome>> {
    check_inputs(noise, tau)?;
    let Some(first) = free.first() else {
        return Ok(Vec::new());
    };
    let basis = first.basis(n_atoms)?;
    let engine = opts.engine.resolve(basis.dim(), noise.gamma_a > 0.0);
    let kernel = (engine == Engine::DensityMatrix).then(|| DensityKernel::new(basis));
    free.par_iter()
        .map(|&f| {
            let (signal, second) = match &kernel {
                Some(k) => k.run(f, noise, tau, opts.tol),
                None => moments_run(f, n_atoms, noise, tau),
            }
            .map_err(|e| at_detuning(e, f.label()))?;
            Ok(RamseyOutcome::new(f.label(), tau, signal, second))
        })
        .collect()
}

fn at_detuning(err: Error, detuning: f64) -> Error {
    match err {
        Error::IntegrationFailure {
            achieved_time,
            target_time,
            reason,
        } => Error::IntegrationFailure {
            achieved_time,
            target_time,
            reason: format!("detuning {detuning}: {reason}"),
        },
        other => other,
    }
}

/// Runs the full pulse sequence for one detuning, starting from the ground
/// state.
pub fn ramsey_simulate(
    n_atoms: usize,
    detuning: f64,
    noise: &NoiseModel,
    tau: f64,
    scheme: Scheme,
    opts: &RamseyOptions,
) -> Result<RamseyOutcome> {
    Ok(simulate_many(n_atoms, &[Free::Scheme(scheme, detuning)], noise, tau, opts)?[0])
}

/// Pulse sequence on a split ensemble with independent arm detunings and
/// collective noise. `detuning` of the outcome reports `Ω₁`.
pub fn ramsey_simulate_arms(
    n_atoms: usize,
    omega1: f64,
    omega2: f64,
    noise: &NoiseModel,
    tau: f64,
    opts: &RamseyOptions,
) -> Result<RamseyOutcome> {
    Ok(simulate_many(n_atoms, &[Free::Arms(omega1, omega2)], noise, tau, opts)?[0])
}

/// [`ramsey_simulate`] over a detuning grid; rows keep the grid order.
pub fn ramsey_scan(
    n_atoms: usize,
    grid: &[f64],
    noise: &NoiseModel,
    tau: f64,
    scheme: Scheme,
    opts: &RamseyOptions,
) -> Result<Vec<RamseyOutcome>> {
    let free: Vec<Free> = grid.iter().map(|&w| Free::Scheme(scheme, w)).collect();
    simulate_many(n_atoms, &free, noise, tau, opts)
}

/// Sensitivity functional applied to a simulated scan.
pub fn sensitivity_of(outcomes: &[RamseyOutcome]) -> Result<SensitivityPoint> {
    let grid: Vec<f64> = outcomes.iter().map(|o| o.detuning).collect();
    let signal: Vec<f64> = outcomes.iter().map(|o| o.signal).collect();
    let second: Vec<f64> = outcomes.iter().map(|o| o.second_moment).collect();
    sensitivity::sensitivity_functional(&grid, &signal, &second)
}

/// Simulated `δΩ` at one interrogation time; `control` is the optimal
/// detuning.
pub fn ramsey_sensitivity(
    n_atoms: usize,
    noise: &NoiseModel,
    tau: f64,
    scheme: Scheme,
    grid: &DetuningGrid,
    opts: &RamseyOptions,
) -> Result<SensitivityPoint> {
    let omegas = grid.resolve(tau)?;
    sensitivity_of(&ramsey_scan(n_atoms, &omegas, noise, tau, scheme, opts)?)
}

fn require_amplitude(gamma_a: f64) -> Result<NoiseModel> {
    if !(gamma_a > 0.0) {
        return Err(Error::invalid(format!("amplitude-noise rate must be positive, got {gamma_a}")));
    }
    NoiseModel::amplitude(gamma_a)
}

/// `δΩ(τ)` of a single ensemble under amplitude noise; `control` is `τ`.
pub fn amplitude_noise_sensitivity_curve(
    n_atoms: usize,
    gamma_a: f64,
    taus: &[f64],
    grid: &DetuningGrid,
    opts: &RamseyOptions,
) -> Result<Vec<SensitivityPoint>> {
    let noise = require_amplitude(gamma_a)?;
    if taus.is_empty() {
        return Err(Error::invalid("interrogation-time grid is empty"));
    }
    taus.par_iter()
        .map(|&tau| {
            let p = ramsey_sensitivity(n_atoms, &noise, tau, Scheme::Standard, grid, opts)?;
            Ok(SensitivityPoint {
                control: tau,
                delta: p.delta,
            })
        })
        .collect()
}

/// `δΩ(N)` of a single ensemble under amplitude noise at fixed `τ`;
/// `control` is `N`.
pub fn amplitude_noise_atom_scaling(
    atom_numbers: &[usize],
    gamma_a: f64,
    tau: f64,
    grid: &DetuningGrid,
    opts: &RamseyOptions,
) -> Result<Vec<SensitivityPoint>> {
    let noise = require_amplitude(gamma_a)?;
    if atom_numbers.is_empty() {
        return Err(Error::invalid("atom-number list is empty"));
    }
    atom_numbers
        .par_iter()
        .map(|&n| {
            let p = ramsey_sensitivity(n, &noise, tau, Scheme::Standard, grid, opts)?;
            Ok(SensitivityPoint {
                control: n as f64,
                delta: p.delta,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const DENSITY: RamseyOptions = RamseyOptions {
        engine: Engine::DensityMatrix,
        tol: 1e-10,
    };
    const MOMENTS: RamseyOptions = RamseyOptions {
        engine: Engine::Moments,
        tol: 1e-10,
    };

    #[test]
    fn closed_form_examples() {
        assert_eq!(ramsey_signal_analytic(10, 0.0, 0.0, 0.0), 5.0);
        assert_relative_eq!(ramsey_signal_analytic(2, PI, 0.0, 1.0), -1.0, epsilon = 1e-15);
        assert_relative_eq!(ramsey_signal_analytic(10, 0.0, 1.0, 1.0), 5.0 * (-0.5f64).exp(), epsilon = 1e-15);
        assert!((ramsey_signal_analytic(10, 0.0, 1.0, 1.0) - 3.0327).abs() < 1e-4);

        for n in [1, 2, 7, 10] {
            let m = ramsey_second_moment_analytic(n, 0.4, 0.4, 0.9, 0.0).unwrap();
            assert_relative_eq!(m, (n * n) as f64 / 4.0, epsilon = 1e-12);
        }
        let e1 = (-1.0f64).exp();
        let std = ramsey_second_moment_analytic(10, PI / 2.0, PI / 2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(std, 2.5 * e1 * (10.0 * 1f64.sinh() + 1f64.cosh()), epsilon = 1e-12);
        let twin = ramsey_second_moment_analytic(10, PI / 2.0, -PI / 2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(twin, 2.5 * e1 * 1f64.cosh(), epsilon = 1e-12);
        assert!((twin - 1.4191).abs() < 1e-4);
        assert!(ramsey_second_moment_analytic(5, 1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_sensitivities() {
        for scheme in Scheme::ALL {
            for n in [1, 4, 9] {
                let d = ramsey_sensitivity_analytic(n, 0.0, 0.7, scheme).unwrap();
                assert_relative_eq!(d, 1.0 / (0.7 * (n as f64).sqrt()), epsilon = 1e-14);
            }
            assert!(ramsey_sensitivity_analytic(4, 1.0, 0.0, scheme).is_err());
        }
        let std = ramsey_sensitivity_analytic(10, 1.0, 1.0, Scheme::Standard).unwrap();
        let twin = ramsey_sensitivity_analytic(10, 1.0, 1.0, Scheme::TwinDetuning).unwrap();
        assert!((std - 1.1531).abs() < 2e-4);
        assert!((twin - 0.3928).abs() < 1e-4);
    }

    #[test]
    fn simulated_sequence_reproduces_closed_forms() {
        for engine in [DENSITY, MOMENTS] {
            for n in 1..=12usize {
                for scheme in Scheme::ALL {
                    if scheme.is_split() && n % 2 == 1 {
                        continue;
                    }
                    for x in [0.2, 0.5, 1.0, 2.0] {
                        let noise = NoiseModel::phase(x).unwrap();
                        for wt in [0.0, 0.3, PI / 4.0, PI / 2.0, 2.2] {
                            let sim = ramsey_simulate(n, wt, &noise, 1.0, scheme, &engine).unwrap();
                            let exact = ramsey_outcome_analytic(n, wt, x, 1.0, scheme).unwrap();
                            assert!((sim.signal - exact.signal).abs() < 1e-9, "{n} {scheme} {x} {wt}");
                            assert!((sim.second_moment - exact.second_moment).abs() < 1e-9, "{n} {scheme} {x} {wt}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn general_arm_detunings_match_closed_form() {
        for engine in [DENSITY, MOMENTS] {
            for n in [2, 4, 8] {
                let noise = NoiseModel::phase(0.6).unwrap();
                let sim = ramsey_simulate_arms(n, 0.3, 1.1, &noise, 1.3, &engine).unwrap();
                let second = ramsey_second_moment_analytic(n, 0.3, 1.1, 0.6, 1.3).unwrap();
                let signal = 0.25 * n as f64 * (-0.3f64 * 1.3).exp() * ((0.3f64 * 1.3).cos() + (1.1f64 * 1.3).cos());
                assert!((sim.signal - signal).abs() < 1e-10);
                assert!((sim.second_moment - second).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn simulated_sensitivity_matches_closed_form() {
        let grid = DetuningGrid::default();
        for (scheme, n) in [(Scheme::Standard, 10), (Scheme::TwinDetuning, 10), (Scheme::Standard, 3)] {
            let noise = NoiseModel::phase(1.0).unwrap();
            let p = ramsey_sensitivity(n, &noise, 1.0, scheme, &grid, &DENSITY).unwrap();
            let exact = ramsey_sensitivity_analytic(n, 1.0, 1.0, scheme).unwrap();
            assert!((p.delta / exact - 1.0).abs() < 1e-9, "{scheme}: {} vs {exact}", p.delta);
        }
    }

    #[test]
    fn noiseless_resonance_gives_full_contrast() {
        for scheme in Scheme::ALL {
            let out = ramsey_simulate(6, 0.0, &NoiseModel::noiseless(), 2.0, scheme, &DENSITY).unwrap();
            assert_relative_eq!(out.signal.abs(), 3.0, epsilon = 1e-12);
            assert!(out.std_dev < 1e-6);
        }
    }

    #[test]
    fn fringes_are_periodic_and_symmetric() {
        let tau = 0.8;
        let noise = NoiseModel::phase(0.5).unwrap();
        for scheme in Scheme::ALL {
            for w in [0.1, 0.9, 2.5] {
                let a = ramsey_simulate(4, w, &noise, tau, scheme, &DENSITY).unwrap();
                let b = ramsey_simulate(4, w + 2.0 * PI / tau, &noise, tau, scheme, &DENSITY).unwrap();
                let c = ramsey_simulate(4, -w, &noise, tau, scheme, &DENSITY).unwrap();
                assert!((a.signal - b.signal).abs() < 1e-10);
                assert!((a.signal - c.signal).abs() < 1e-12);
                let exact = ramsey_signal_analytic(4, w, 0.5, tau);
                assert_eq!(exact, ramsey_signal_analytic(4, -w, 0.5, tau));
            }
        }
    }

    #[test]
    fn twin_arms_reduce_the_fluctuations() {
        for n in (2..=40).step_by(2) {
            for x in [0.05, 0.5, 1.0, 3.0] {
                let wt = PI / 2.0;
                let std = ramsey_outcome_analytic(n, wt, x, 1.0, Scheme::Standard).unwrap();
                let twin = ramsey_outcome_analytic(n, wt, x, 1.0, Scheme::TwinDetuning).unwrap();
                assert!(twin.std_dev < std.std_dev);
                let (ds, dt) = (
                    ramsey_sensitivity_analytic(n, x, 1.0, Scheme::Standard).unwrap(),
                    ramsey_sensitivity_analytic(n, x, 1.0, Scheme::TwinDetuning).unwrap(),
                );
                assert!(ds > dt);
            }
        }
        let noise = NoiseModel::phase(0.7).unwrap();
        let std = ramsey_simulate(6, PI / 2.0, &noise, 1.0, Scheme::Standard, &DENSITY).unwrap();
        let twin = ramsey_simulate(6, PI / 2.0, &noise, 1.0, Scheme::TwinDetuning, &DENSITY).unwrap();
        assert!(twin.std_dev < std.std_dev);
    }

    #[test]
    fn amplitude_noise_engines_agree() {
        let noise = NoiseModel::new(0.3, 0.8).unwrap();
        for (scheme, n) in [(Scheme::Standard, 5), (Scheme::TwinDetuning, 4), (Scheme::PhaseConjugate, 4)] {
            for w in [0.0, 0.7, -1.9] {
                let a = ramsey_simulate(n, w, &noise, 1.2, scheme, &DENSITY).unwrap();
                let b = ramsey_simulate(n, w, &noise, 1.2, scheme, &MOMENTS).unwrap();
                assert!((a.signal - b.signal).abs() < 1e-8);
                assert!((a.second_moment - b.second_moment).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn amplitude_noise_stays_above_projection_limit() {
        let tau = 1.0;
        let curve = amplitude_noise_sensitivity_curve(10, 5.0, &[tau], &DetuningGrid::default(), &RamseyOptions::default()).unwrap();
        assert!(curve[0].delta > 1.0 / (tau * 10f64.sqrt()));
        assert!(amplitude_noise_sensitivity_curve(10, 0.0, &[tau], &DetuningGrid::default(), &RamseyOptions::default()).is_err());
        assert!(amplitude_noise_sensitivity_curve(10, 1.0, &[], &DetuningGrid::default(), &RamseyOptions::default()).is_err());
    }

    #[test]
    fn outcome_invariants_hold_along_scans() {
        let noise = NoiseModel::new(0.4, 0.2).unwrap();
        let grid = uniform_grid(-3.0, 3.0, 41).unwrap();
        for scheme in Scheme::ALL {
            for o in ramsey_scan(8, &grid, &noise, 1.5, scheme, &RamseyOptions::default()).unwrap() {
                assert!(o.second_moment >= o.signal * o.signal - 1e-10);
                assert!(o.signal.abs() <= 4.0 + 1e-10);
                assert!(o.second_moment >= 0.0 && o.second_moment <= 16.0 + 1e-9);
            }
        }
    }
}
