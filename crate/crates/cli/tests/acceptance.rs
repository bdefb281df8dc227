//! Acceptance criteria 1 to 10. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured values before asserting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use lasernoise::dynamics::{self, free_propagate};
use lasernoise::oracles::{full_space_propagate, scalar_sde_check, stochastic_ensemble_average, NoiseKind, TrajectoryConfig};
use lasernoise::rabi::{self, pulse_duration, rabi_profile, rabi_scaling_study, rabi_sensitivity};
use lasernoise::ramsey::{
    amplitude_noise_atom_scaling, amplitude_noise_sensitivity_curve, ramsey_outcome_analytic, ramsey_scan,
    ramsey_sensitivity, ramsey_simulate, sensitivity_of,
};
use lasernoise::sensitivity::{loglog_fit, optimize_tau, saturation_bound};
use lasernoise::spin::prepare;
use lasernoise::{
    CollectiveState, DetuningGrid, Engine, HamiltonianSpec, NoiseModel, Preparation, RabiOptions, RabiProfile, RamseyOptions,
    Scheme,
};
use lasernoise_cli::{cmd_validate, with_threads, Format, Level, Recipe, ValidateOptions};

fn verdict(id: &str, pass: bool, detail: String) {
    println!("criterion {id}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let (a, b) = (min.ln(), max.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn schemes_for(n: usize) -> Vec<Scheme> {
    if n.is_multiple_of(2) {
        Scheme::ALL.to_vec()
    } else {
        vec![Scheme::Standard]
    }
}

#[test]
fn criterion_01_analytic_numeric_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for n in [2, 4, 10] {
        for gamma_tau in [0.2, 1.0, 2.0] {
            for omega_tau in [0.0, FRAC_PI_4, FRAC_PI_2] {
                let noise = NoiseModel::phase(gamma_tau).unwrap();
                for scheme in schemes_for(n) {
                    let exact = ramsey_outcome_analytic(n, omega_tau, gamma_tau, 1.0, scheme).unwrap();
                    for engine in [Engine::Auto, Engine::DensityMatrix, Engine::Moments] {
                        let sim = ramsey_simulate(n, omega_tau, &noise, 1.0, scheme, &RamseyOptions::with_engine(engine)).unwrap();
                        worst = worst
                            .max((sim.signal - exact.signal).abs())
                            .max((sim.second_moment - exact.second_moment).abs());
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict("1", worst <= 1e-9 && secs < 10.0, format!("max deviation {worst:.3e}, {secs:.2} s"));
}

#[test]
fn criterion_02_saturation_bound() {
    let start = Instant::now();
    let opt = optimize_tau(10_000, 1.0, Scheme::Standard).unwrap();
    let bound = saturation_bound(1.0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let gap = (opt.delta - 0.951).abs() / 0.951;
    verdict(
        "2",
        gap < 0.01 && (bound - 0.951).abs() <= 0.001 && secs < 1.0,
        format!("delta*(1e4) = {:.7}, bound = {bound:.7}, {secs:.3} s", opt.delta),
    );
}

#[test]
fn criterion_03_twin_optimum() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [4, 16, 64] {
        let opt = optimize_tau(n, 1.0, Scheme::TwinDetuning).unwrap();
        let scaled = opt.delta * (n as f64).sqrt();
        ok &= (scaled - 0.969).abs() <= 0.001 && (opt.tau - 2.0).abs() <= 0.2;
        detail.push(format!("N={n}: delta*sqrt(N) = {scaled:.7}, tau* = {:.4}", opt.tau));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict("3", ok && secs < 1.0, format!("{}; {secs:.3} s", detail.join("; ")));
}

#[test]
fn criterion_04_projection_limit_ramsey() {
    let mut worst = 0.0_f64;
    for n in 1..=10 {
        for tau in [0.5, 1.0, 2.0] {
            let limit = 1.0 / (tau * (n as f64).sqrt());
            for scheme in schemes_for(n) {
                let p = ramsey_sensitivity(n, &NoiseModel::noiseless(), tau, scheme, &DetuningGrid::default(), &RamseyOptions::default())
                    .unwrap();
                worst = worst.max((p.delta - limit).abs());
            }
        }
    }
    verdict("4 (ramsey)", worst <= 1e-9, format!("max |delta - 1/(tau sqrt N)| = {worst:.3e}"));
}

/// The criterion read literally for the Rabi protocol: noise-free `δΩ` equal
/// to `1/(τ√N)` with `τ = π/(2η)`. A π pulse has a detuning response about
/// 1.6 times weaker than a Ramsey fringe, so this is expected to fail.
#[test]
fn criterion_04_projection_limit_rabi_literal() {
    let eta = 1.0;
    let tau = pulse_duration(eta);
    let grid = rabi::default_detuning_grid(eta, 0.0).unwrap();
    let mut worst = 0.0_f64;
    let mut ratio = 0.0;
    for n in 1..=10 {
        let p = rabi_profile(n, eta, 0.0, &grid, Scheme::Standard, &RabiOptions::default()).unwrap();
        let d = rabi_sensitivity(&p).unwrap().delta;
        let limit = 1.0 / (tau * (n as f64).sqrt());
        worst = worst.max((d - limit).abs());
        ratio = d / limit;
    }
    verdict(
        "4 (rabi, literal)",
        worst <= 1e-9,
        format!("max |delta - 1/(tau sqrt N)| = {worst:.3e}, delta/(1/(tau sqrt N)) = {ratio:.4}"),
    );
}

/// Noise-free Rabi sensitivity is projection-noise limited: `δΩ·√N` equals
/// the single-atom value computed from the closed-form excitation
/// probability on the same grid.
#[test]
fn criterion_04_projection_limit_rabi_single_atom_scaling() {
    let eta = 1.0;
    let tau = pulse_duration(eta);
    let grid = rabi::default_detuning_grid(eta, 0.0).unwrap();
    let p_exc = |w: f64| {
        let big = (w * w + 4.0 * eta * eta).sqrt();
        4.0 * eta * eta / (big * big) * (0.5 * big * tau).sin().powi(2)
    };
    let closed_form = RabiProfile {
        n_atoms: 1,
        drive: eta,
        gamma_d: 0.0,
        duration: tau,
        scheme: Scheme::Standard,
        signal: grid.iter().map(|&w| p_exc(w) - 0.5).collect(),
        second_moment: vec![0.25; grid.len()],
        detunings: grid.clone(),
    };
    let single = rabi_sensitivity(&closed_form).unwrap().delta;
    let mut worst = 0.0_f64;
    for n in 1..=10 {
        let p = rabi_profile(n, eta, 0.0, &grid, Scheme::Standard, &RabiOptions::default()).unwrap();
        let d = rabi_sensitivity(&p).unwrap().delta;
        worst = worst.max((d * (n as f64).sqrt() - single).abs());
    }
    verdict(
        "4 (rabi, projection-noise scaling)",
        worst <= 1e-9,
        format!("single-atom delta = {single:.9}, max |delta sqrt N - delta_1| = {worst:.3e}"),
    );
}

#[test]
fn criterion_05_amplitude_noise_scalings() {
    let start = Instant::now();
    let opts = RamseyOptions::default();
    let grid = DetuningGrid::default();
    let fit = |taus: &[f64]| {
        let pts = amplitude_noise_sensitivity_curve(10, 1.0, taus, &grid, &opts).unwrap();
        loglog_fit(&pts.iter().map(|p| (p.control, p.delta)).collect::<Vec<_>>())
            .unwrap()
            .slope
    };
    let short = fit(&log_grid(0.01, 0.1, 11));
    let long = fit(&log_grid(10.0, 100.0, 11));
    let atoms: Vec<usize> = (4..=40).collect();
    let scaling = amplitude_noise_atom_scaling(&atoms, 1.0, 20.0, &grid, &opts).unwrap();
    let n_slope = loglog_fit(&scaling.iter().map(|p| (p.control, p.delta)).collect::<Vec<_>>())
        .unwrap()
        .slope;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "5",
        (short + 1.0).abs() <= 0.05 && (long + 0.5).abs() <= 0.05 && (n_slope + 0.5).abs() <= 0.05 && secs < 600.0,
        format!("slopes: short tau {short:.4}, long tau {long:.4}, N {n_slope:.4}; {secs:.1} s"),
    );
}

#[test]
fn criterion_06_rabi_scaling() {
    let start = Instant::now();
    let opts = RabiOptions::default();
    let atoms: Vec<usize> = (4..=40).step_by(2).collect();
    let twin = rabi_scaling_study(&atoms, 1.0, 1.0, Scheme::TwinDetuning, None, &opts).unwrap();
    let standard_atoms: Vec<usize> = (20..=40).collect();
    let standard = rabi_scaling_study(&standard_atoms, 1.0, 1.0, Scheme::Standard, None, &opts).unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "6",
        (twin.fit.slope + 0.483).abs() <= 0.05 && standard.fit.slope.abs() < 0.25 && secs < 900.0,
        format!(
            "twin exponent {:.4}, standard local slope over 20..40 {:.4}; {secs:.1} s",
            twin.fit.slope, standard.fit.slope
        ),
    );
}

fn dicke_reference(n: usize, omega: f64, eta: f64, noise: &NoiseModel, scheme: Scheme, prep: Preparation) -> CollectiveState {
    let basis = scheme.basis(n).unwrap();
    let rho0 = prepare(&basis, prep);
    let spec = HamiltonianSpec::driven(omega, eta, scheme);
    if eta == 0.0 && noise.gamma_a == 0.0 {
        return free_propagate(&rho0, &spec, noise.gamma_d, 1.0).unwrap();
    }
    dynamics::evolve(
        &rho0,
        &spec.hamiltonian(&basis).unwrap(),
        &spec.jumps(noise, &basis).unwrap(),
        1.0,
        1e-12,
    )
    .unwrap()
}

#[test]
fn criterion_07_oracle_agreement() {
    let start = Instant::now();
    // (a) full product space against the collective basis.
    let cases = [
        ("free", 0.6, 0.0, 0.0, 0.0, Preparation::AfterFirstPulse),
        ("dephasing", 0.6, 0.0, 1.0, 0.0, Preparation::AfterFirstPulse),
        ("amplitude", 0.6, 0.0, 0.0, 0.5, Preparation::Ground),
        ("driven", 0.3, 0.8, 0.7, 0.0, Preparation::Ground),
    ];
    let mut full_worst = 0.0_f64;
    for n in [3, 4] {
        for scheme in schemes_for(n) {
            for &(_, omega, eta, gd, ga, prep) in &cases {
                if scheme.is_split() && eta != 0.0 {
                    continue;
                }
                let noise = NoiseModel::new(gd, ga).unwrap();
                let full = full_space_propagate(n, omega, eta, &noise, 1.0, scheme, prep).unwrap();
                let reference = dicke_reference(n, omega, eta, &noise, scheme, prep);
                full_worst = full_worst
                    .max(full.projected.max_deviation(&reference).unwrap())
                    .max(full.leakage.abs());
            }
        }
    }

    // (b) trajectory averages against the master equation.
    let traj = [
        (NoiseKind::Phase, 0.4, 0.5, 1.0, Preparation::AfterFirstPulse, NoiseModel::phase(1.0).unwrap()),
        (NoiseKind::Amplitude, 0.4, 0.0, 0.5, Preparation::Ground, NoiseModel::amplitude(0.5).unwrap()),
    ];
    let mut z_worst = 0.0_f64;
    for (i, (kind, omega, eta, rate, prep, noise)) in traj.into_iter().enumerate() {
        let cfg = TrajectoryConfig {
            n_trajectories: 10_000,
            dt: 0.01,
            seed: 2024 + i as u64,
            kind,
        };
        let avg = stochastic_ensemble_average(4, omega, eta, rate, 1.0, prep, &cfg).unwrap();
        let reference = dicke_reference(4, omega, eta, &noise, Scheme::Standard, prep);
        z_worst = z_worst.max(avg.worst_z_score(reference.matrix(), 1e-12));
    }

    // (c) scalar SDE means.
    let mut sde_worst = 0.0_f64;
    for (i, (a0, b0, t)) in [(0.0, 1.0, 1.0), (-1.0, 1.0, 2.0), (0.5, 0.5, 1.0)].into_iter().enumerate() {
        let c = scalar_sde_check(a0, b0, t, 100_000, 77 + i as u64).unwrap();
        sde_worst = sde_worst.max(c.z_score());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "7",
        full_worst <= 1e-8 && z_worst <= 3.0 && sde_worst <= 3.0 && secs < 300.0,
        format!("full space {full_worst:.3e}, trajectories {z_worst:.2} SE, SDE {sde_worst:.2} SE; {secs:.1} s"),
    );
}

#[test]
fn criterion_08_scheme_equivalence() {
    let mut worst = 0.0_f64;
    for n in [4, 10] {
        for gamma_tau in [0.5, 1.0, 2.0] {
            let noise = NoiseModel::phase(gamma_tau).unwrap();
            let grid = DetuningGrid::default().resolve(1.0).unwrap();
            let opts = RamseyOptions::default();
            let twin = ramsey_scan(n, &grid, &noise, 1.0, Scheme::TwinDetuning, &opts).unwrap();
            let conj = ramsey_scan(n, &grid, &noise, 1.0, Scheme::PhaseConjugate, &opts).unwrap();
            for (a, b) in twin.iter().zip(&conj) {
                worst = worst.max((a.signal - b.signal).abs());
            }
            let (da, db) = (sensitivity_of(&twin).unwrap().delta, sensitivity_of(&conj).unwrap().delta);
            worst = worst.max((da - db).abs());
        }
    }
    verdict("8", worst <= 1e-9, format!("max signal/delta difference {worst:.3e}"));
}

#[test]
fn criterion_09_noise_reduction_ordering() {
    let mut ordered = true;
    let mut tightest = f64::INFINITY;
    for n in [2, 4, 10, 20, 50, 100] {
        for gamma_tau in [0.05, 0.5, 1.0, 2.0, 5.0] {
            let noise = NoiseModel::phase(gamma_tau).unwrap();
            let opts = RamseyOptions::default();
            let s = ramsey_simulate(n, FRAC_PI_2, &noise, 1.0, Scheme::Standard, &opts).unwrap();
            let t = ramsey_simulate(n, FRAC_PI_2, &noise, 1.0, Scheme::TwinDetuning, &opts).unwrap();
            ordered &= t.std_dev < s.std_dev;
            tightest = tightest.min(s.std_dev - t.std_dev);
        }
    }
    let doc = Recipe::Fig5.run().unwrap();
    let quad = doc.table("quadrature").unwrap();
    let col = |c: &str| -> Vec<f64> { quad.column(c).unwrap().into_iter().map(|x| x.as_f64().unwrap()).collect() };
    let emitted = col("std_dev");
    let standard = (25.0 * (-0.5f64).exp() * (100.0 * 0.5f64.sinh() + 0.5f64.cosh())).sqrt();
    let twin = (25.0 * (-0.5f64).exp() * 0.5f64.cosh()).sqrt();
    let preset_err = (emitted[0] - standard).abs().max((emitted[1] - twin).abs());
    let omega_tau_err = col("omega_tau").iter().map(|w| (w - PI / 2.0).abs()).fold(0.0, f64::max);
    let profile = doc.table("profile").unwrap();
    let pcol = |c: &str| -> Vec<f64> { profile.column(c).unwrap().into_iter().map(|x| x.as_f64().unwrap()).collect() };
    let profile_err = pcol("std_dev")
        .iter()
        .zip(pcol("std_dev_closed_form"))
        .chain(pcol("signal").iter().zip(pcol("signal_closed_form")))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    verdict(
        "9",
        ordered && preset_err <= 1e-9 && profile_err <= 1e-9 && omega_tau_err < 1e-12,
        format!(
            "twin below standard everywhere: {ordered} (smallest gap {tightest:.3e}); preset quadrature error {preset_err:.3e}, profile error {profile_err:.3e}"
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: usize| {
        let opts = ValidateOptions {
            level: Level::Fast,
            seed: 4242,
            ..ValidateOptions::default()
        };
        let report = with_threads(Some(threads), || cmd_validate(&opts)).unwrap().unwrap();
        let path = dir.path().join(name);
        report.document().write(Some(&path), Format::Csv).unwrap();
        let traj = with_threads(Some(threads), || {
            let cfg = TrajectoryConfig {
                n_trajectories: 500,
                dt: 0.01,
                seed: 4242,
                kind: NoiseKind::Amplitude,
            };
            stochastic_ensemble_average(3, 0.3, 0.4, 0.5, 1.0, Preparation::Ground, &cfg).unwrap()
        })
        .unwrap();
        let traj_path = dir.path().join(format!("{name}.traj"));
        std::fs::write(&traj_path, format!("{:?}\n{:?}", traj.state.matrix().as_slice(), traj.standard_error.as_slice())).unwrap();
        (std::fs::read(path).unwrap(), std::fs::read(traj_path).unwrap())
    };
    let a = run("a.csv", 4);
    let b = run("b.csv", 4);
    let c = run("c.csv", 1);
    verdict(
        "10",
        a == b && a == c,
        format!("repeat identical: {}, across thread counts identical: {}", a == b, a == c),
    );
}
