//! Rabi spectroscopy: a single π pulse of duration `τ = π/(2η)` applied to
//! the ground state while the laser phase diffuses.

use rayon::prelude::*;

use crate::dynamics::{self, Engine, HamiltonianSpec, NoiseModel, Scheme, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::moments::{MomentModel, SpinMoments};
use crate::sensitivity::{self, loglog_fit, uniform_grid, PowerLawFit, SensitivityPoint};
use crate::spin::{self, Preparation, SpinOp};

/// Grid points on either side of a steepest-slope detuning searched for the
/// sensitivity minimum.
pub const FLANK_RADIUS: usize = 5;
pub const DEFAULT_GRID_POINTS: usize = 401;

/// Excitation profile over a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiProfile {
    pub n_atoms: usize,
    pub drive: f64,
    pub gamma_d: f64,
    /// Pulse duration `π/(2η)`.
    pub duration: f64,
    pub scheme: Scheme,
    pub detunings: Vec<f64>,
    pub signal: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl RabiProfile {
    pub fn std_devs(&self) -> Vec<f64> {
        self.signal
            .iter()
            .zip(&self.second_moment)
            .map(|(&s, &m)| sensitivity::std_dev(s, m))
            .collect()
    }
}

/// `δΩ` per atom number with the fitted power law.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    /// `control` holds `N`.
    pub points: Vec<SensitivityPoint>,
    pub fit: PowerLawFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiOptions {
    pub engine: Engine,
    pub tol: f64,
}

impl Default for RabiOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Auto,
            tol: DEFAULT_TOL,
        }
    }
}

impl RabiOptions {
    pub fn with_engine(engine: Engine) -> Self {
        Self {
            engine,
            ..Self::default()
        }
    }
}

pub fn pulse_duration(drive: f64) -> f64 {
    std::f64::consts::PI / (2.0 * drive)
}

/// 401 points over `[−6η′, 6η′]` with `η′ = max(η, γ_d)`.
pub fn default_detuning_grid(drive: f64, gamma_d: f64) -> Result<Vec<f64>> {
    let width = 6.0 * drive.max(gamma_d);
    uniform_grid(-width, width, DEFAULT_GRID_POINTS)
}

fn check_request(n_atoms: usize, drive: f64, gamma_d: f64, scheme: Scheme) -> Result<()> {
    if !(drive > 0.0) || !drive.is_finite() {
        return Err(Error::invalid(format!("drive strength must be positive, got {drive}")));
    }
    NoiseModel::phase(gamma_d)?;
    if scheme == Scheme::PhaseConjugate {
        return Err(Error::invalid("Rabi spectroscopy supports the standard and twin schemes only"));
    }
    scheme.basis(n_atoms)?;
    Ok(())
}

/// Evolves the ground state under the driven Hamiltonian for every detuning
/// of `grid` and records the final `⟨S_z⟩` and `⟨S_z²⟩`.
pub fn rabi_profile(
    n_atoms: usize,
    drive: f64,
    gamma_d: f64,
    grid: &[f64],
    scheme: Scheme,
    opts: &RabiOptions,
) -> Result<RabiProfile> {
    check_request(n_atoms, drive, gamma_d, scheme)?;
    if grid.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 detunings, got {}", grid.len())));
    }
    if grid.iter().any(|w| !w.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("detuning grid must be finite and strictly increasing"));
    }
    let basis = scheme.basis(n_atoms)?;
    let noise = NoiseModel::phase(gamma_d)?;
    let tau = pulse_duration(drive);
    let half = 0.5 * n_atoms as f64;

    let rows: Vec<(f64, f64)> = match opts.engine.resolve(basis.dim(), true) {
        Engine::DensityMatrix => {
            let ground = spin::ground_state(&basis);
            let sz = spin::collective_operator(SpinOp::Sz, &basis);
            let sz2 = &sz * &sz;
            grid.par_iter()
                .map(|&w| {
                    let spec = HamiltonianSpec::driven(w, drive, scheme);
                    let state = dynamics::evolve(
                        &ground,
                        &spec.hamiltonian(&basis)?,
                        &spec.jumps(&noise, &basis)?,
                        tau,
                        opts.tol,
                    )
                    .map_err(|e| match e {
                        Error::IntegrationFailure {
                            achieved_time,
                            target_time,
                            reason,
                        } => Error::IntegrationFailure {
                            achieved_time,
                            target_time,
                            reason: format!("detuning {w}: {reason}"),
                        },
                        other => other,
                    })?;
                    state.check_invariants_within(1e3 * opts.tol)?;
                    Ok((state.mean(&sz)?, state.mean(&sz2)?))
                })
                .collect::<Result<_>>()?
        }
        _ => {
            let start = SpinMoments::prepared(scheme, n_atoms, Preparation::Ground)?;
            grid.par_iter()
                .map(|&w| {
                    let model = MomentModel::from_spec(&HamiltonianSpec::driven(w, drive, scheme), &noise);
                    let (signal, second) = start.evolve(&model, tau)?.total_sz();
                    if signal.abs() > half + 1e-9 || second < signal * signal - 1e-9 {
                        return Err(Error::invalid(format!(
                            "unphysical moments at detuning {w}: <S_z> = {signal}, <S_z^2> = {second}"
                        )));
                    }
                    Ok((signal, second))
                })
                .collect::<Result<_>>()?
        }
    };

    Ok(RabiProfile {
        n_atoms,
        drive,
        gamma_d,
        duration: tau,
        scheme,
        detunings: grid.to_vec(),
        signal: rows.iter().map(|r| r.0).collect(),
        second_moment: rows.iter().map(|r| r.1).collect(),
    })
}

/// `δΩ` from the steepest flanks left and right of resonance; `control` is
/// the detuning where it is attained.
pub fn rabi_sensitivity(profile: &RabiProfile) -> Result<SensitivityPoint> {
    sensitivity::steepest_flank_sensitivity(
        &profile.detunings,
        &profile.signal,
        &profile.second_moment,
        1e-12 * profile.n_atoms as f64,
        FLANK_RADIUS,
    )
}

/// Profile plus sensitivity for each atom number, with a log-log fit of
/// `δΩ(N)`. `grid = None` uses [`default_detuning_grid`].
pub fn rabi_scaling_study(
    atom_numbers: &[usize],
    drive: f64,
    gamma_d: f64,
    scheme: Scheme,
    grid: Option<&[f64]>,
    opts: &RabiOptions,
) -> Result<ScalingStudy> {
    if atom_numbers.len() < 4 {
        return Err(Error::invalid(format!(
            "a scaling study needs at least 4 atom numbers, got {}",
            atom_numbers.len()
        )));
    }
    let default;
    let grid = match grid {
        Some(g) => g,
        None => {
            default = default_detuning_grid(drive, gamma_d)?;
            &default
        }
    };
    let points = atom_numbers
        .iter()
        .map(|&n| {
            let profile = rabi_profile(n, drive, gamma_d, grid, scheme, opts)?;
            Ok(SensitivityPoint {
                control: n as f64,
                delta: rabi_sensitivity(&profile)?.delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = loglog_fit(&points.iter().map(|p| (p.control, p.delta)).collect::<Vec<_>>())?;
    Ok(ScalingStudy { points, fit })
}
