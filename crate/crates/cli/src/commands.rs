//! The `ramsey`, `rabi` and `optimize` sweeps.

use lasernoise::dynamics::DEFAULT_TOL;
use lasernoise::rabi::{self, rabi_profile, rabi_sensitivity};
use lasernoise::ramsey::{self, ramsey_scan, sensitivity_of, AMPLITUDE_TOL};
use lasernoise::sensitivity::{local_sensitivity, loglog_fit, optimize_tau, saturation_bound};
use lasernoise::{DetuningGrid, NoiseModel, RabiOptions, RabiProfile, RamseyOptions, RamseyOutcome, Scheme};

use crate::config::{Protocol, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Document, Table};

/// Columns of the Ramsey `profile` table.
pub const RAMSEY_PROFILE_COLUMNS: &[&str] = &["n", "tau", "omega", "signal", "second_moment", "std_dev", "delta"];
/// Columns of the Ramsey `sensitivity` table. `delta_closed_form` is `nan`
/// when amplitude noise is present.
pub const RAMSEY_SENSITIVITY_COLUMNS: &[&str] = &["n", "tau", "omega_star", "delta", "delta_closed_form", "projection_limit"];
pub const RABI_PROFILE_COLUMNS: &[&str] = &["n", "omega", "signal", "second_moment", "std_dev", "delta"];
pub const RABI_SENSITIVITY_COLUMNS: &[&str] = &["n", "tau", "omega_star", "delta"];
pub const FIT_COLUMNS: &[&str] = &["label", "slope", "intercept", "residual"];

fn header(command: &str, cfg: &SweepConfig) -> Document {
    let mut doc = Document::new(command);
    doc.metadata.extend(cfg.metadata());
    doc
}

pub(crate) fn ramsey_options(cfg: &SweepConfig) -> RamseyOptions {
    RamseyOptions {
        engine: cfg.engine,
        tol: cfg.tol.unwrap_or(AMPLITUDE_TOL),
    }
}

pub(crate) fn rabi_options(cfg: &SweepConfig) -> RabiOptions {
    RabiOptions {
        engine: cfg.engine,
        tol: cfg.tol.unwrap_or(DEFAULT_TOL),
    }
}

fn derivative_threshold(signal: &[f64]) -> f64 {
    1e-12 * signal.iter().fold(1.0_f64, |m, s| m.max(s.abs()))
}

/// Per-detuning `ΔS_z / |∂_Ω⟨S_z⟩|`, `None` where undefined.
pub(crate) fn local_deltas(outcomes: &[RamseyOutcome]) -> CliResult<Vec<Option<f64>>> {
    let grid: Vec<f64> = outcomes.iter().map(|o| o.detuning).collect();
    let signal: Vec<f64> = outcomes.iter().map(|o| o.signal).collect();
    let second: Vec<f64> = outcomes.iter().map(|o| o.second_moment).collect();
    Ok(local_sensitivity(&grid, &signal, &second, derivative_threshold(&signal))?)
}

fn ramsey_grid(cfg: &SweepConfig) -> DetuningGrid {
    match cfg.omega {
        Some(o) => DetuningGrid::Range {
            min: o.min,
            max: o.max,
            count: o.count,
        },
        None => DetuningGrid::default(),
    }
}

pub fn cmd_ramsey(cfg: &SweepConfig) -> CliResult<Document> {
    if cfg.protocol != Protocol::Ramsey {
        return Err(CliError::Config("cmd_ramsey needs a ramsey configuration".into()));
    }
    let mut doc = header("ramsey", cfg);
    let noise = NoiseModel::new(cfg.gamma_d, cfg.gamma_a)?;
    let opts = ramsey_options(cfg);
    let grid = ramsey_grid(cfg);
    let mut profile = Table::new("profile", RAMSEY_PROFILE_COLUMNS);
    let mut summary = Table::new("sensitivity", RAMSEY_SENSITIVITY_COLUMNS);
    for &n in &cfg.atoms {
        for tau in cfg.tau.values() {
            let omegas = grid.resolve(tau)?;
            let outcomes = ramsey_scan(n, &omegas, &noise, tau, cfg.scheme, &opts)?;
            let best = sensitivity_of(&outcomes)?;
            let closed = if cfg.gamma_a == 0.0 {
                Some(ramsey::ramsey_sensitivity_analytic(n, cfg.gamma_d, tau, cfg.scheme)?)
            } else {
                None
            };
            summary.push(vec![
                n.into(),
                tau.into(),
                best.control.into(),
                best.delta.into(),
                closed.into(),
                (1.0 / (tau * (n as f64).sqrt())).into(),
            ]);
            if cfg.profiles {
                for (o, d) in outcomes.iter().zip(local_deltas(&outcomes)?) {
                    profile.push(vec![
                        n.into(),
                        tau.into(),
                        o.detuning.into(),
                        o.signal.into(),
                        o.second_moment.into(),
                        o.std_dev.into(),
                        d.into(),
                    ]);
                }
            }
        }
    }
    if cfg.profiles {
        doc.tables.push(profile);
    }
    doc.tables.push(summary);
    Ok(doc)
}

pub(crate) fn rabi_profile_rows(table: &mut Table, lead: &[Cell], p: &RabiProfile) -> CliResult<()> {
    let deltas = local_sensitivity(&p.detunings, &p.signal, &p.second_moment, 1e-12 * p.n_atoms as f64)?;
    for (i, sd) in p.std_devs().into_iter().enumerate() {
        let mut row = lead.to_vec();
        row.extend([
            p.detunings[i].into(),
            p.signal[i].into(),
            p.second_moment[i].into(),
            sd.into(),
            deltas[i].into(),
        ]);
        table.push(row);
    }
    Ok(())
}

pub fn cmd_rabi(cfg: &SweepConfig) -> CliResult<Document> {
    if cfg.protocol != Protocol::Rabi {
        return Err(CliError::Config("cmd_rabi needs a rabi configuration".into()));
    }
    let mut doc = header("rabi", cfg);
    let opts = rabi_options(cfg);
    let grid = match cfg.omega {
        Some(o) => lasernoise::sensitivity::uniform_grid(o.min, o.max, o.count)?,
        None => rabi::default_detuning_grid(cfg.eta, cfg.gamma_d)?,
    };
    let mut profile = Table::new("profile", RABI_PROFILE_COLUMNS);
    let mut summary = Table::new("sensitivity", RABI_SENSITIVITY_COLUMNS);
    let mut points = Vec::new();
    for &n in &cfg.atoms {
        let p = rabi_profile(n, cfg.eta, cfg.gamma_d, &grid, cfg.scheme, &opts)?;
        let best = rabi_sensitivity(&p)?;
        summary.push(vec![n.into(), p.duration.into(), best.control.into(), best.delta.into()]);
        points.push((n as f64, best.delta));
        if cfg.profiles {
            rabi_profile_rows(&mut profile, &[n.into()], &p)?;
        }
    }
    if cfg.profiles {
        doc.tables.push(profile);
    }
    doc.tables.push(summary);
    if points.len() >= 4 {
        let fit = loglog_fit(&points)?;
        let mut t = Table::new("fit", FIT_COLUMNS);
        t.push(vec!["delta_vs_n".into(), fit.slope.into(), fit.intercept.into(), fit.residual.into()]);
        doc.tables.push(t);
    }
    Ok(doc)
}

/// Optimal interrogation time of the closed-form Ramsey sensitivity under
/// phase noise, per atom number.
pub fn cmd_optimize(cfg: &SweepConfig) -> CliResult<Document> {
    if cfg.gamma_a != 0.0 {
        return Err(CliError::Config("optimize covers phase noise only (gamma_a must be 0)".into()));
    }
    let mut doc = header("optimize", cfg);
    doc.tables.push(optimum_table(&cfg.atoms, cfg.gamma_d, cfg.scheme)?);
    let mut bound = Table::new("bound", &["gamma_d", "saturation_bound"]);
    bound.push(vec![cfg.gamma_d.into(), saturation_bound(cfg.gamma_d)?.into()]);
    doc.tables.push(bound);
    Ok(doc)
}

pub(crate) fn optimum_table(atoms: &[usize], gamma_d: f64, scheme: Scheme) -> CliResult<Table> {
    let mut t = Table::new("optimum", &["scheme", "n", "tau", "gamma_tau", "delta", "delta_sqrt_n"]);
    for &n in atoms {
        let opt = optimize_tau(n, gamma_d, scheme)?;
        t.push(vec![
            scheme.name().into(),
            n.into(),
            opt.tau.into(),
            (gamma_d * opt.tau).into(),
            opt.delta.into(),
            (opt.delta * (n as f64).sqrt()).into(),
        ]);
    }
    Ok(t)
}
