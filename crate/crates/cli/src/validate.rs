//! Oracle cross-checks: exact propagators against the integrator, engines
//! against each other, full product space against the collective basis,
//! noise trajectories against the master equation and a scalar SDE against
//! its closed-form mean.

use lasernoise::dynamics::{self, conjugate_dephasing_propagate, dephasing_propagate, split_dephasing_propagate, DEFAULT_TOL};
use lasernoise::oracles::{full_space_propagate, scalar_sde_check, stochastic_ensemble_average, NoiseKind, TrajectoryConfig};
use lasernoise::ramsey::{ramsey_outcome_analytic, ramsey_simulate};
use lasernoise::spin::{coherent_state_after_first_pulse, prepare};
use lasernoise::{Basis, CollectiveState, Engine, HamiltonianSpec, NoiseModel, Preparation, RamseyOptions, Scheme};
use rayon::prelude::*;

use crate::error::CliResult;
use crate::output::{Cell, Document, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Level {
    #[default]
    Fast,
    Full,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Fast => "fast",
            Level::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub level: Level,
    pub seed: u64,
    /// Integrator tolerance of the numeric side of the exact-propagator and
    /// engine checks.
    pub tol: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            level: Level::Fast,
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }
}

/// Trajectory and SDE checks pass below this many standard errors.
pub const Z_LIMIT: f64 = 4.0;
const EXACT_LIMIT: f64 = 1e-8;
const ENGINE_LIMIT: f64 = 1e-7;
const ANALYTIC_LIMIT: f64 = 1e-9;
const FULL_SPACE_LIMIT: f64 = 1e-8;
const TRAJECTORY_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub discrepancy: f64,
    pub threshold: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.discrepancy.is_finite() && self.discrepancy <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub options: ValidateOptions,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn document(&self) -> Document {
        let mut doc = Document::new("validate");
        doc.meta("level", self.options.level.name());
        doc.meta("seed", self.options.seed);
        doc.meta("tol", format!("{:?}", self.options.tol));
        doc.meta("z_limit", format!("{Z_LIMIT:?}"));
        let mut t = Table::new("checks", &["suite", "name", "discrepancy", "threshold", "passed"]);
        for c in &self.checks {
            t.push(vec![
                c.suite.into(),
                c.name.as_str().into(),
                c.discrepancy.into(),
                c.threshold.into(),
                c.passed().into(),
            ]);
        }
        doc.tables.push(t);
        let mut s = Table::new("summary", &["checks", "failed", "all_passed"]);
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        s.push(vec![self.checks.len().into(), failed.into(), Cell::from(failed == 0)]);
        doc.tables.push(s);
        doc
    }
}

fn check(suite: &'static str, name: String, discrepancy: f64, threshold: f64) -> Check {
    Check {
        suite,
        name,
        discrepancy,
        threshold,
    }
}

fn integrate(rho0: &CollectiveState, spec: &HamiltonianSpec, noise: &NoiseModel, tau: f64, tol: f64) -> lasernoise::Result<CollectiveState> {
    let basis = *rho0.basis();
    dynamics::evolve(rho0, &spec.hamiltonian(&basis)?, &spec.jumps(noise, &basis)?, tau, tol)
}

/// Integrated dephasing runs against the exact elementwise propagators.
fn exact_vs_numeric(opts: &ValidateOptions) -> CliResult<Vec<Check>> {
    let cases: &[(Scheme, usize, f64)] = match opts.level {
        Level::Fast => &[(Scheme::Standard, 4, 1.0), (Scheme::Standard, 10, 2.0), (Scheme::TwinDetuning, 4, 1.0), (Scheme::PhaseConjugate, 4, 0.5)],
        Level::Full => &[
            (Scheme::Standard, 4, 1.0),
            (Scheme::Standard, 10, 0.2),
            (Scheme::Standard, 10, 2.0),
            (Scheme::Standard, 20, 1.0),
            (Scheme::TwinDetuning, 4, 1.0),
            (Scheme::TwinDetuning, 8, 2.0),
            (Scheme::PhaseConjugate, 4, 0.5),
            (Scheme::PhaseConjugate, 8, 2.0),
        ],
    };
    let omega = 0.7;
    let tau = 1.0;
    cases
        .iter()
        .map(|&(scheme, n, gamma_tau)| {
            let gamma = gamma_tau / tau;
            let basis = scheme.basis(n)?;
            let rho0 = coherent_state_after_first_pulse(&basis);
            let exact = match scheme {
                Scheme::Standard => dephasing_propagate(&rho0, omega, gamma, tau)?,
                Scheme::TwinDetuning => split_dephasing_propagate(&rho0, omega, -omega, gamma, tau)?,
                Scheme::PhaseConjugate => conjugate_dephasing_propagate(&rho0, omega, gamma, tau)?,
            };
            let spec = HamiltonianSpec::free(omega, scheme);
            let numeric = integrate(&rho0, &spec, &NoiseModel::phase(gamma)?, tau, opts.tol)?;
            Ok(check(
                "exact_vs_numeric",
                format!("{scheme} n={n} gamma_tau={gamma_tau}"),
                exact.max_deviation(&numeric)?,
                EXACT_LIMIT,
            ))
        })
        .collect()
}

/// Density-matrix and moment engines on runs that need integration, plus
/// simulated Ramsey moments against the closed forms.
fn engines(opts: &ValidateOptions) -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    let density = RamseyOptions {
        engine: Engine::DensityMatrix,
        tol: opts.tol,
    };
    let moments = RamseyOptions::with_engine(Engine::Moments);
    let amp_cases: &[(Scheme, usize)] = match opts.level {
        Level::Fast => &[(Scheme::Standard, 4)],
        Level::Full => &[(Scheme::Standard, 4), (Scheme::Standard, 9), (Scheme::TwinDetuning, 4)],
    };
    for &(scheme, n) in amp_cases {
        let noise = NoiseModel::new(0.3, 0.5)?;
        let a = ramsey_simulate(n, 0.4, &noise, 1.0, scheme, &density)?;
        let b = ramsey_simulate(n, 0.4, &noise, 1.0, scheme, &moments)?;
        let diff = (a.signal - b.signal).abs().max((a.second_moment - b.second_moment).abs());
        out.push(check("engines", format!("density_vs_moments {scheme} n={n}"), diff, ENGINE_LIMIT));
    }
    let analytic_cases: &[(Scheme, usize)] = match opts.level {
        Level::Fast => &[(Scheme::Standard, 10), (Scheme::TwinDetuning, 10)],
        Level::Full => &[(Scheme::Standard, 2), (Scheme::Standard, 10), (Scheme::TwinDetuning, 4), (Scheme::TwinDetuning, 10), (Scheme::PhaseConjugate, 10)],
    };
    for &(scheme, n) in analytic_cases {
        let mut worst = 0.0_f64;
        for omega_tau in [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
            let noise = NoiseModel::phase(1.0)?;
            let sim = ramsey_simulate(n, omega_tau, &noise, 1.0, scheme, &RamseyOptions::default())?;
            let exact = ramsey_outcome_analytic(n, omega_tau, 1.0, 1.0, scheme)?;
            worst = worst
                .max((sim.signal - exact.signal).abs())
                .max((sim.second_moment - exact.second_moment).abs());
        }
        out.push(check("engines", format!("simulated_vs_closed_form {scheme} n={n}"), worst, ANALYTIC_LIMIT));
    }
    Ok(out)
}

/// Full `2^N` product-space evolution compressed onto the collective basis.
fn full_space(opts: &ValidateOptions) -> CliResult<Vec<Check>> {
    let atoms: &[usize] = match opts.level {
        Level::Fast => &[3],
        Level::Full => &[3, 4],
    };
    let cases = [
        ("free", 0.6, 0.0, 0.0, 0.0, Preparation::AfterFirstPulse),
        ("dephasing", 0.6, 0.0, 1.0, 0.0, Preparation::AfterFirstPulse),
        ("amplitude", 0.6, 0.0, 0.0, 0.5, Preparation::Ground),
        ("driven", 0.3, 0.8, 0.7, 0.0, Preparation::Ground),
    ];
    let mut out = Vec::new();
    for &n in atoms {
        for &(label, omega, eta, gd, ga, prep) in &cases {
            let noise = NoiseModel::new(gd, ga)?;
            let full = full_space_propagate(n, omega, eta, &noise, 1.0, Scheme::Standard, prep)?;
            let basis = Basis::dicke(n)?;
            let spec = HamiltonianSpec::driven(omega, eta, Scheme::Standard);
            let dicke = integrate(&prepare(&basis, prep), &spec, &noise, 1.0, 1e-12)?;
            let diff = full.projected.max_deviation(&dicke)?.max(full.leakage.abs());
            out.push(check("full_space_vs_dicke", format!("{label} n={n}"), diff, FULL_SPACE_LIMIT));
        }
    }
    Ok(out)
}

/// Trajectory averages against the master equation, in bootstrap standard
/// errors.
fn trajectories(opts: &ValidateOptions) -> CliResult<Vec<Check>> {
    let (n, count) = match opts.level {
        Level::Fast => (2, 2_000),
        Level::Full => (4, 10_000),
    };
    let cases = [
        (NoiseKind::Phase, 0.4, 0.5, 1.0, Preparation::AfterFirstPulse),
        (NoiseKind::Amplitude, 0.4, 0.0, 0.5, Preparation::Ground),
    ];
    let mut out = Vec::new();
    for (i, &(kind, omega, eta, rate, prep)) in cases.iter().enumerate() {
        let cfg = TrajectoryConfig {
            n_trajectories: count,
            dt: TRAJECTORY_DT,
            seed: opts.seed.wrapping_add(i as u64),
            kind,
        };
        let avg = stochastic_ensemble_average(n, omega, eta, rate, 1.0, prep, &cfg)?;
        let noise = match kind {
            NoiseKind::Phase => NoiseModel::phase(rate)?,
            NoiseKind::Amplitude => NoiseModel::amplitude(rate)?,
        };
        let basis = Basis::dicke(n)?;
        let spec = HamiltonianSpec::driven(omega, eta, Scheme::Standard);
        let reference = integrate(&prepare(&basis, prep), &spec, &noise, 1.0, 1e-12)?;
        out.push(check(
            "trajectories_vs_master_equation",
            format!("{} n={n} trajectories={count}", kind.name()),
            avg.worst_z_score(reference.matrix(), 1e-12),
            Z_LIMIT,
        ));
    }
    Ok(out)
}

/// Sample means of `dx = a₀x dt + b₀x ∘ dW` against `e^{(a₀ + b₀²/2)T}`.
fn sde(opts: &ValidateOptions) -> CliResult<Vec<Check>> {
    let paths = match opts.level {
        Level::Fast => 20_000,
        Level::Full => 100_000,
    };
    let triples = [(0.0, 1.0, 1.0), (-1.0, 1.0, 2.0), (0.5, 0.5, 1.0)];
    triples
        .par_iter()
        .enumerate()
        .map(|(i, &(a0, b0, t))| {
            let c = scalar_sde_check(a0, b0, t, paths, opts.seed.wrapping_add(100 + i as u64))?;
            Ok(check("scalar_sde", format!("a0={a0} b0={b0} t={t}"), c.z_score(), Z_LIMIT))
        })
        .collect()
}

/// Runs every suite. Numeric errors inside a suite abort the run; failed
/// comparisons are reported in the returned report.
pub fn cmd_validate(opts: &ValidateOptions) -> CliResult<ValidationReport> {
    let mut checks = Vec::new();
    checks.extend(exact_vs_numeric(opts)?);
    checks.extend(engines(opts)?);
    checks.extend(full_space(opts)?);
    checks.extend(trajectories(opts)?);
    checks.extend(sde(opts)?);
    Ok(ValidationReport { options: *opts, checks })
}
