//! Named figure presets. Rates are in units of `γ_d` (or `γ_a` where only
//! amplitude noise acts).

use std::fmt;
use std::str::FromStr;

use lasernoise::rabi::{self, rabi_profile, rabi_scaling_study};
use lasernoise::ramsey::{
    amplitude_noise_atom_scaling, amplitude_noise_sensitivity_curve, ramsey_outcome_analytic, ramsey_scan,
    ramsey_sensitivity_analytic, sensitivity_of,
};
use lasernoise::sensitivity::{large_n_sensitivity, loglog_fit, optimize_tau, saturation_bound, uniform_grid};
use lasernoise::{DetuningGrid, Engine, NoiseModel, RabiOptions, RamseyOptions, Scheme};

use crate::commands::{local_deltas, rabi_profile_rows, FIT_COLUMNS};
use crate::error::CliResult;
use crate::output::{Document, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Recipe {
    Fig1,
    Fig2,
    Fig5,
    Fig6,
    Fig7,
}

impl Recipe {
    pub const ALL: [Recipe; 5] = [Recipe::Fig1, Recipe::Fig2, Recipe::Fig5, Recipe::Fig6, Recipe::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Fig1 => "fig1",
            Recipe::Fig2 => "fig2",
            Recipe::Fig5 => "fig5",
            Recipe::Fig6 => "fig6",
            Recipe::Fig7 => "fig7",
        }
    }

    pub fn run(self) -> CliResult<Document> {
        match self {
            Recipe::Fig1 => fig1(),
            Recipe::Fig2 => fig2(),
            Recipe::Fig5 => fig5(),
            Recipe::Fig6 => fig6(),
            Recipe::Fig7 => fig7(),
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Recipe as clap::ValueEnum>::from_str(s, true)
    }
}

fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let (a, b) = (min.ln(), max.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn doc_for(recipe: Recipe, params: &[(&str, String)]) -> Document {
    let mut doc = Document::new("recipe");
    doc.meta("recipe", recipe.name());
    for (k, v) in params {
        doc.meta(k, v);
    }
    doc
}

fn fit_row(t: &mut Table, label: &str, points: &[(f64, f64)]) -> CliResult<()> {
    let fit = loglog_fit(points)?;
    t.push(vec![label.into(), fit.slope.into(), fit.intercept.into(), fit.residual.into()]);
    Ok(())
}

/// Closed-form Ramsey sensitivity of the standard scheme versus `τ`, and its
/// optimum versus `N` against the atom-number independent floor.
pub fn fig1() -> CliResult<Document> {
    const GAMMA_D: f64 = 1.0;
    let atoms_curve = [1usize, 10, 100, 1000, 10_000];
    let taus = log_grid(0.01, 10.0, 61);
    let atoms_opt: Vec<usize> = (0..=6)
        .flat_map(|e| [1usize, 2, 5].map(|m| m * 10usize.pow(e)))
        .filter(|&n| n <= 1_000_000)
        .collect();
    let mut doc = doc_for(
        Recipe::Fig1,
        &[
            ("scheme", "standard".into()),
            ("gamma_d", format!("{GAMMA_D:?}")),
            ("tau_grid", "log,0.01,10,61".into()),
        ],
    );
    let mut curve = Table::new("delta_vs_tau", &["n", "tau", "delta", "large_n_limit"]);
    for &n in &atoms_curve {
        for &tau in &taus {
            curve.push(vec![
                n.into(),
                tau.into(),
                ramsey_sensitivity_analytic(n, GAMMA_D, tau, Scheme::Standard)?.into(),
                large_n_sensitivity(GAMMA_D, tau).into(),
            ]);
        }
    }
    let bound = saturation_bound(GAMMA_D)?;
    let mut opt = Table::new("optimum_vs_n", &["n", "tau", "delta", "saturation_bound", "relative_gap"]);
    for &n in &atoms_opt {
        let o = optimize_tau(n, GAMMA_D, Scheme::Standard)?;
        opt.push(vec![
            n.into(),
            o.tau.into(),
            o.delta.into(),
            bound.into(),
            ((o.delta - bound) / bound).into(),
        ]);
    }
    doc.tables.push(curve);
    doc.tables.push(opt);
    Ok(doc)
}

/// Simulated Ramsey sensitivity under amplitude noise: versus `τ` at `N = 10`
/// and versus `N` at `γ_a τ = 20`, with power-law fits of the asymptotes.
pub fn fig2() -> CliResult<Document> {
    const GAMMA_A: f64 = 1.0;
    const N: usize = 10;
    const TAU_C: f64 = 20.0;
    let taus = log_grid(0.01, 100.0, 41);
    let atoms: Vec<usize> = (4..=40).step_by(2).collect();
    let opts = RamseyOptions::with_engine(Engine::Moments);
    let grid = DetuningGrid::default();
    let mut doc = doc_for(
        Recipe::Fig2,
        &[
            ("scheme", "standard".into()),
            ("gamma_a", format!("{GAMMA_A:?}")),
            ("gamma_d", "0.0".into()),
            ("n", N.to_string()),
            ("tau_grid", "log,0.01,100,41".into()),
            ("tau_c", format!("{TAU_C:?}")),
            ("atoms", "4:40:2".into()),
            ("omega_grid", format!("fringe,{}", DetuningGrid::DEFAULT_FRINGE_POINTS)),
            ("engine", "moments".into()),
        ],
    );
    let curve = amplitude_noise_sensitivity_curve(N, GAMMA_A, &taus, &grid, &opts)?;
    let mut t = Table::new("delta_vs_tau", &["n", "tau", "gamma_a_tau", "delta", "projection_limit"]);
    for p in &curve {
        t.push(vec![
            N.into(),
            p.control.into(),
            (GAMMA_A * p.control).into(),
            p.delta.into(),
            (1.0 / (p.control * (N as f64).sqrt())).into(),
        ]);
    }
    let scaling = amplitude_noise_atom_scaling(&atoms, GAMMA_A, TAU_C, &grid, &opts)?;
    let mut s = Table::new("delta_vs_n", &["n", "tau", "delta"]);
    for p in &scaling {
        s.push(vec![(p.control as usize).into(), TAU_C.into(), p.delta.into()]);
    }
    let pts = |r: std::ops::RangeInclusive<usize>| curve[r].iter().map(|p| (p.control, p.delta)).collect::<Vec<_>>();
    let mut fits = Table::new("fit", FIT_COLUMNS);
    // Ten points per decade: indices 0..=10 span γ_aτ ∈ [0.01, 0.1], 30..=40 span [10, 100].
    fit_row(&mut fits, "delta_vs_tau_short", &pts(0..=10))?;
    fit_row(&mut fits, "delta_vs_tau_long", &pts(30..=40))?;
    fit_row(
        &mut fits,
        "delta_vs_n",
        &scaling.iter().map(|p| (p.control, p.delta)).collect::<Vec<_>>(),
    )?;
    doc.tables.extend([t, s, fits]);
    Ok(doc)
}

/// Central Ramsey fringe at `N = 100`, `γ_d τ = 0.5` for the standard and
/// twin schemes, next to the closed forms.
pub fn fig5() -> CliResult<Document> {
    const N: usize = 100;
    const GAMMA_D: f64 = 1.0;
    const TAU: f64 = 0.5;
    const POINTS: usize = 801;
    let half = 2.0 * std::f64::consts::PI / (2.0 * TAU);
    let omegas = uniform_grid(-half, half, POINTS)?;
    // Ωτ = π/2 sits three quarters into the grid.
    let quadrature = 3 * (POINTS - 1) / 4;
    let noise = NoiseModel::phase(GAMMA_D)?;
    let opts = RamseyOptions::with_engine(Engine::Moments);
    let mut doc = doc_for(
        Recipe::Fig5,
        &[
            ("schemes", "standard,twin".into()),
            ("n", N.to_string()),
            ("gamma_d", format!("{GAMMA_D:?}")),
            ("tau", format!("{TAU:?}")),
            ("omega_grid", format!("{:?},{half:?},{POINTS}", -half)),
            ("engine", "moments".into()),
        ],
    );
    let mut profile = Table::new(
        "profile",
        &["scheme", "omega", "tau", "signal", "second_moment", "std_dev", "delta", "signal_closed_form", "std_dev_closed_form"],
    );
    let mut quad = Table::new(
        "quadrature",
        &["scheme", "omega", "omega_tau", "std_dev", "std_dev_closed_form", "abs_diff"],
    );
    let mut summary = Table::new("sensitivity", &["scheme", "omega_star", "delta", "delta_closed_form"]);
    for scheme in [Scheme::Standard, Scheme::TwinDetuning] {
        let outcomes = ramsey_scan(N, &omegas, &noise, TAU, scheme, &opts)?;
        let deltas = local_deltas(&outcomes)?;
        for (o, d) in outcomes.iter().zip(deltas) {
            let c = ramsey_outcome_analytic(N, o.detuning, GAMMA_D, TAU, scheme)?;
            profile.push(vec![
                scheme.name().into(),
                o.detuning.into(),
                TAU.into(),
                o.signal.into(),
                o.second_moment.into(),
                o.std_dev.into(),
                d.into(),
                c.signal.into(),
                c.std_dev.into(),
            ]);
        }
        let o = outcomes[quadrature];
        let c = ramsey_outcome_analytic(N, o.detuning, GAMMA_D, TAU, scheme)?;
        quad.push(vec![
            scheme.name().into(),
            o.detuning.into(),
            (o.detuning * TAU).into(),
            o.std_dev.into(),
            c.std_dev.into(),
            (o.std_dev - c.std_dev).abs().into(),
        ]);
        let best = sensitivity_of(&outcomes)?;
        summary.push(vec![
            scheme.name().into(),
            best.control.into(),
            best.delta.into(),
            ramsey_sensitivity_analytic(N, GAMMA_D, TAU, scheme)?.into(),
        ]);
    }
    doc.tables.extend([profile, quad, summary]);
    Ok(doc)
}

/// Weak-drive Rabi resonance at `N = 10`, `η = 0.2 γ_d` for both schemes.
pub fn fig6() -> CliResult<Document> {
    const N: usize = 10;
    const GAMMA_D: f64 = 1.0;
    const ETA: f64 = 0.2;
    let grid = rabi::default_detuning_grid(ETA, GAMMA_D)?;
    let opts = RabiOptions::default();
    let mut doc = doc_for(
        Recipe::Fig6,
        &[
            ("schemes", "standard,twin".into()),
            ("n", N.to_string()),
            ("gamma_d", format!("{GAMMA_D:?}")),
            ("eta", format!("{ETA:?}")),
            ("omega_grid", format!("{:?},{:?},{}", grid[0], grid[grid.len() - 1], grid.len())),
            ("engine", "auto".into()),
        ],
    );
    let mut profile = Table::new("profile", &["scheme", "omega", "signal", "second_moment", "std_dev", "delta"]);
    let mut summary = Table::new("sensitivity", &["scheme", "tau", "omega_star", "delta"]);
    for scheme in [Scheme::Standard, Scheme::TwinDetuning] {
        let p = rabi_profile(N, ETA, GAMMA_D, &grid, scheme, &opts)?;
        rabi_profile_rows(&mut profile, &[scheme.name().into()], &p)?;
        let best = rabi::rabi_sensitivity(&p)?;
        summary.push(vec![scheme.name().into(), p.duration.into(), best.control.into(), best.delta.into()]);
    }
    doc.tables.extend([profile, summary]);
    Ok(doc)
}

/// Rabi sensitivity versus `N ∈ {4, …, 40}` at `η = γ_d` with fitted
/// exponents.
pub fn fig7() -> CliResult<Document> {
    const GAMMA_D: f64 = 1.0;
    const ETA: f64 = 1.0;
    let atoms: Vec<usize> = (4..=40).step_by(2).collect();
    let opts = RabiOptions::default();
    let mut doc = doc_for(
        Recipe::Fig7,
        &[
            ("schemes", "standard,twin".into()),
            ("atoms", "4:40:2".into()),
            ("gamma_d", format!("{GAMMA_D:?}")),
            ("eta", format!("{ETA:?}")),
            ("omega_grid", "default".into()),
            ("engine", "auto".into()),
        ],
    );
    let mut scaling = Table::new("delta_vs_n", &["scheme", "n", "delta"]);
    let mut fits = Table::new("fit", FIT_COLUMNS);
    for scheme in [Scheme::Standard, Scheme::TwinDetuning] {
        let study = rabi_scaling_study(&atoms, ETA, GAMMA_D, scheme, None, &opts)?;
        let pts: Vec<(f64, f64)> = study.points.iter().map(|p| (p.control, p.delta)).collect();
        for p in &study.points {
            scaling.push(vec![scheme.name().into(), (p.control as usize).into(), p.delta.into()]);
        }
        fits.push(vec![
            format!("{}_4_40", scheme.name()).as_str().into(),
            study.fit.slope.into(),
            study.fit.intercept.into(),
            study.fit.residual.into(),
        ]);
        let upper: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 >= 20.0).collect();
        fit_row(&mut fits, &format!("{}_20_40", scheme.name()), &upper)?;
    }
    doc.tables.extend([scaling, fits]);
    Ok(doc)
}
