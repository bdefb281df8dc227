//! Frequency sensitivity `δΩ = min_Ω ΔS_z / |∂_Ω⟨S_z⟩|`, interrogation-time
//! optimization and log-log power-law fits.

use crate::dynamics::Scheme;
use crate::error::{Error, Result};
use crate::ramsey::ramsey_sensitivity_analytic;

/// A sensitivity value together with the control parameter it belongs to
/// (a detuning, an interrogation time or an atom number).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityPoint {
    pub control: f64,
    pub delta: f64,
}

/// Result of [`optimize_tau`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauOptimum {
    pub tau: f64,
    pub delta: f64,
}

/// Least-squares line through `(ln x, ln y)`; `residual` is the RMS of the
/// log residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Standard deviation from first and second moments, clamping rounding
/// noise below zero.
pub fn std_dev(signal: f64, second_moment: f64) -> f64 {
    (second_moment - signal * signal).max(0.0).sqrt()
}

/// `count` evenly spaced points on `[min, max]`. Symmetric ranges give
/// exactly antisymmetric grids.
pub fn uniform_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !min.is_finite() || !max.is_finite() || !(max > min) {
        return Err(Error::invalid(format!("grid range [{min}, {max}] must be finite and increasing")));
    }
    if count < 2 {
        return Err(Error::invalid(format!("grid needs at least two points, got {count}")));
    }
    let centre = 0.5 * (min + max);
    let half = 0.5 * (max - min);
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| centre + half * (2.0 * i as f64 - last) / last)
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    Ok(())
}

fn is_uniform(grid: &[f64]) -> bool {
    let n = grid.len();
    let mean = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    grid.windows(2).all(|w| ((w[1] - w[0]) - mean).abs() <= 1e-9 * mean)
}

/// Central finite-difference derivative of `values` on a strictly increasing
/// grid.
///
/// Uniform grids use the five-point stencil in the interior and the
/// three-point one next to the ends; non-uniform grids use the three-point
/// formula throughout. The two end points have no central derivative.
pub fn central_derivative(grid: &[f64], values: &[f64]) -> Result<Vec<Option<f64>>> {
    if grid.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    if grid.len() < 3 {
        return Err(Error::invalid("need at least three grid points for a central difference"));
    }
    check_grid(grid)?;
    let n = grid.len();
    let mut out = vec![None; n];
    if is_uniform(grid) {
        let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
        for i in 1..n - 1 {
            out[i] = Some(if i >= 2 && i + 2 < n {
                (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            });
        }
    } else {
        for i in 1..n - 1 {
            let h1 = grid[i] - grid[i - 1];
            let h2 = grid[i + 1] - grid[i];
            out[i] = Some(
                -h2 / (h1 * (h1 + h2)) * values[i - 1]
                    + (h2 - h1) / (h1 * h2) * values[i]
                    + h1 / (h2 * (h1 + h2)) * values[i + 1],
            );
        }
    }
    Ok(out)
}

/// Pointwise ratio `ΔS_z / |∂_Ω⟨S_z⟩|`; `None` where the derivative is
/// undefined or not above `threshold`.
pub fn local_sensitivity(grid: &[f64], signal: &[f64], second: &[f64], threshold: f64) -> Result<Vec<Option<f64>>> {
    if second.len() != signal.len() {
        return Err(Error::DimensionMismatch {
            expected: signal.len(),
            found: second.len(),
        });
    }
    let slope = central_derivative(grid, signal)?;
    Ok(slope
        .iter()
        .enumerate()
        .map(|(i, d)| match d {
            Some(d) if d.abs() > threshold => Some(std_dev(signal[i], second[i]) / d.abs()),
            _ => None,
        })
        .collect())
}

/// Index of the smallest ratio among `candidates`; near-ties (relative
/// 1e−12) go to the smallest `|Ω|`, then to the lowest index.
fn best_index(grid: &[f64], ratios: &[Option<f64>], candidates: impl Iterator<Item = usize> + Clone) -> Option<usize> {
    let min = candidates
        .clone()
        .filter_map(|i| ratios[i])
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let cut = min + 1e-12 * min.abs();
    candidates
        .filter(|&i| matches!(ratios[i], Some(r) if r <= cut))
        .min_by(|&a, &b| grid[a].abs().total_cmp(&grid[b].abs()).then(a.cmp(&b)))
}

fn derivative_threshold(signal: &[f64]) -> f64 {
    1e-12 * signal.iter().fold(1.0_f64, |m, s| m.max(s.abs()))
}

/// Minimizes `ΔS_z / |∂_Ω⟨S_z⟩|` over the grid. Returns `δΩ` and the
/// detuning `Ω*` where it is attained.
pub fn sensitivity_functional(grid: &[f64], signal: &[f64], second: &[f64]) -> Result<SensitivityPoint> {
    if grid.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 grid points, got {}", grid.len())));
    }
    let ratios = local_sensitivity(grid, signal, second, derivative_threshold(signal))?;
    let best = best_index(grid, &ratios, 0..grid.len())
        .ok_or_else(|| Error::DegenerateProfile("signal derivative vanishes on the whole grid".into()))?;
    finish(grid, &ratios, best)
}

pub(crate) fn finish(grid: &[f64], ratios: &[Option<f64>], best: usize) -> Result<SensitivityPoint> {
    let delta = ratios[best].expect("best index carries a ratio");
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::DegenerateProfile(format!(
            "sensitivity {delta} at detuning {} is not positive and finite",
            grid[best]
        )));
    }
    Ok(SensitivityPoint {
        control: grid[best],
        delta,
    })
}

/// Minimum of a ratio restricted to `±radius` points around the steepest
/// slope on each side of zero.
pub(crate) fn steepest_flank_sensitivity(
    grid: &[f64],
    signal: &[f64],
    second: &[f64],
    threshold: f64,
    radius: usize,
) -> Result<SensitivityPoint> {
    let slope = central_derivative(grid, signal)?;
    let ratios = local_sensitivity(grid, signal, second, threshold)?;
    let steepest = |pred: &dyn Fn(f64) -> bool| {
        (0..grid.len())
            .filter(|&i| pred(grid[i]))
            .filter_map(|i| slope[i].filter(|d| d.abs() > threshold).map(|d| (i, d.abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
    };
    let mut candidates = Vec::new();
    for centre in [steepest(&|x| x < 0.0), steepest(&|x| x > 0.0)].into_iter().flatten() {
        let lo = centre.saturating_sub(radius);
        let hi = (centre + radius).min(grid.len() - 1);
        candidates.extend(lo..=hi);
    }
    candidates.sort_unstable();
    candidates.dedup();
    let best = best_index(grid, &ratios, candidates.iter().copied())
        .ok_or_else(|| Error::DegenerateProfile("signal derivative below threshold on the whole grid".into()))?;
    finish(grid, &ratios, best)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is below `rtol` relative to its midpoint.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rtol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= rtol * 0.5 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Minimizes `f` on `[lo, hi]` (both positive): a 64-point log-spaced scan
/// brackets the minimum, golden-section search refines it.
pub fn minimize_bracketed<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rtol: f64) -> (f64, f64) {
    const SCAN: usize = 64;
    let ratio = (hi / lo).ln();
    let xs: Vec<f64> = (0..SCAN)
        .map(|i| lo * (ratio * i as f64 / (SCAN - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = (0..SCAN).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(SCAN - 1)];
    golden_section(f, a, b, rtol)
}

/// Upper end of the searched `γ_d τ` interval.
pub const MAX_GAMMA_TAU: f64 = 10.0;
const MIN_GAMMA_TAU: f64 = 1e-3;
const TAU_RTOL: f64 = 1e-8;

/// Interrogation time minimizing the closed-form Ramsey sensitivity under
/// phase noise, searched over `γ_d τ ∈ (0, 10]`.
pub fn optimize_tau(n_atoms: usize, gamma_d: f64, scheme: Scheme) -> Result<TauOptimum> {
    if !(gamma_d > 0.0) || !gamma_d.is_finite() {
        return Err(Error::invalid(format!("gamma_d must be positive, got {gamma_d}")));
    }
    if n_atoms == 0 {
        return Err(Error::invalid("need at least one atom"));
    }
    let f = |x: f64| ramsey_sensitivity_analytic(n_atoms, gamma_d, x / gamma_d, scheme).unwrap_or(f64::INFINITY);
    let (x, delta) = minimize_bracketed(f, MIN_GAMMA_TAU, MAX_GAMMA_TAU, TAU_RTOL);
    Ok(TauOptimum {
        tau: x / gamma_d,
        delta,
    })
}

/// Large-`N` Ramsey sensitivity `√sinh(γ_d τ) / τ`.
pub fn large_n_sensitivity(gamma_d: f64, tau: f64) -> f64 {
    (gamma_d * tau).sinh().sqrt() / tau
}

/// `min_τ √sinh(γ_d τ) / τ`, the atom-number independent floor of the
/// standard scheme.
pub fn saturation_bound(gamma_d: f64) -> Result<f64> {
    if !(gamma_d > 0.0) || !gamma_d.is_finite() {
        return Err(Error::invalid(format!("gamma_d must be positive, got {gamma_d}")));
    }
    let (_, value) = minimize_bracketed(|x| large_n_sensitivity(1.0, x), MIN_GAMMA_TAU, MAX_GAMMA_TAU, TAU_RTOL);
    Ok(gamma_d * value)
}

/// Least-squares fit of `ln y = intercept + slope · ln x`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid(format!("log-log fit needs positive finite values, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("log-log fit needs at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerLawFit {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramsey::{ramsey_second_moment_analytic, ramsey_signal_analytic};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        uniform_grid(a, b, n).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(a) < 0.0) == (f(m) < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn analytic_profile(n: usize, gamma: f64, tau: f64, twin: bool, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let sig = grid.iter().map(|&w| ramsey_signal_analytic(n, w, gamma, tau)).collect();
        let sec = grid
            .iter()
            .map(|&w| ramsey_second_moment_analytic(n, w, if twin { -w } else { w }, gamma, tau).unwrap())
            .collect();
        (sig, sec)
    }

    #[test]
    fn symmetric_grids_are_antisymmetric() {
        let g = uniform_grid(-PI, PI, 801).unwrap();
        assert!((0..801).all(|i| g[i] == -g[800 - i]));
        assert_eq!(g[400], 0.0);
        assert_eq!((g[0], g[800]), (-PI, PI));
        assert!(uniform_grid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn five_point_stencil_is_exact_for_quartics() {
        let grid = linspace(-2.0, 3.0, 21);
        let vals: Vec<f64> = grid.iter().map(|x| x.powi(4) - 2.0 * x.powi(3) + x).collect();
        let d = central_derivative(&grid, &vals).unwrap();
        assert!(d[0].is_none() && d[20].is_none());
        for i in 2..19 {
            let x = grid[i];
            assert_relative_eq!(d[i].unwrap(), 4.0 * x.powi(3) - 6.0 * x * x + 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn nonuniform_stencil_is_exact_for_quadratics() {
        let grid = [0.0, 0.1, 0.35, 0.4, 1.0, 1.7];
        let vals: Vec<f64> = grid.iter().map(|x| 3.0 * x * x - x).collect();
        let d = central_derivative(&grid, &vals).unwrap();
        for i in 1..5 {
            assert_relative_eq!(d[i].unwrap(), 6.0 * grid[i] - 1.0, epsilon = 1e-12);
        }
        assert!(central_derivative(&[0.0, 1.0, 1.0], &[0.0; 3]).is_err());
    }

    #[test]
    fn analytic_ramsey_profile_reproduces_closed_forms() {
        let (n, tau) = (10, 1.0);
        let grid = linspace(-PI / tau, PI / tau, 801);
        let (sig, sec) = analytic_profile(n, 1.0, tau, false, &grid);
        let p = sensitivity_functional(&grid, &sig, &sec).unwrap();
        let exact = ramsey_sensitivity_analytic(n, 1.0, tau, Scheme::Standard).unwrap();
        assert!((p.delta / exact - 1.0).abs() < 5e-3);
        assert_relative_eq!(p.control.abs(), PI / 2.0, epsilon = 1e-12);

        let (sig, sec) = analytic_profile(n, 0.0, tau, false, &grid);
        let p = sensitivity_functional(&grid, &sig, &sec).unwrap();
        assert!((p.delta * tau * (n as f64).sqrt() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn flat_profiles_are_degenerate() {
        let grid = linspace(-1.0, 1.0, 11);
        let r = sensitivity_functional(&grid, &[2.0; 11], &[5.0; 11]);
        assert!(matches!(r, Err(Error::DegenerateProfile(_))));
        assert!(sensitivity_functional(&grid[..4], &[0.0; 4], &[0.0; 4]).is_err());
    }

    #[test]
    fn ties_prefer_small_detunings() {
        let grid = linspace(-4.0, 4.0, 9);
        let signal = grid.clone();
        // Unit standard deviation at Ω = −3 and Ω = 1, larger elsewhere.
        let second: Vec<f64> = grid
            .iter()
            .map(|&w| w * w + if w == -3.0 || w == 1.0 { 1.0 } else { 4.0 })
            .collect();
        let p = sensitivity_functional(&grid, &signal, &second).unwrap();
        assert_eq!(p.control, 1.0);
        assert_relative_eq!(p.delta, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_refinement_converges_at_second_order() {
        let (n, tau) = (10, 1.0);
        let exact = ramsey_sensitivity_analytic(n, 0.7, tau, Scheme::Standard).unwrap();
        let err = |count: usize| {
            // The optimum Ωτ = π/2 always sits 0.37 spacings from a grid point.
            let h = 2.0 * PI / (count - 1) as f64;
            let grid: Vec<f64> = (0..count).map(|i| -PI + h * (i as f64 + 0.37)).collect();
            let (sig, sec) = analytic_profile(n, 0.7, tau, false, &grid);
            (sensitivity_functional(&grid, &sig, &sec).unwrap().delta - exact).abs()
        };
        let errors: Vec<f64> = [101, 201, 401, 801].iter().map(|&c| err(c)).collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "observed order {order}, errors {errors:?}");
        }
    }

    #[test]
    fn large_n_floor_matches_its_stationarity_condition() {
        // d/dx [sinh x / x²] = 0  ⇔  tanh x = x/2.
        let x = bisect(|x| x.tanh() - x / 2.0, 1.0, 3.0);
        let floor = large_n_sensitivity(1.0, x);
        assert_relative_eq!(saturation_bound(1.0).unwrap(), floor, epsilon = 1e-12);
        assert!((floor - 0.951).abs() < 1e-3);
        assert_relative_eq!(saturation_bound(2.0).unwrap(), 2.0 * saturation_bound(1.0).unwrap(), max_relative = 1e-12);
        assert!(saturation_bound(0.0).is_err());
    }

    #[test]
    fn twin_optimum_matches_its_stationarity_condition() {
        let x = bisect(|x| x * x.tanh() - 2.0, 1.0, 3.0);
        let value = x.cosh().sqrt() / x;
        for n in [4, 16, 64] {
            let opt = optimize_tau(n, 1.0, Scheme::TwinDetuning).unwrap();
            assert_relative_eq!(opt.tau, x, max_relative = 1e-7);
            assert_relative_eq!(opt.delta * (n as f64).sqrt(), value, max_relative = 1e-12);
        }
        assert!((value - 0.969).abs() < 1e-3);
    }

    #[test]
    fn single_atom_optimum_matches_dense_scan() {
        let opt = optimize_tau(1, 1.0, Scheme::Standard).unwrap();
        let scan = (1..=1_000_000)
            .map(|i| i as f64 * 1e-5)
            .map(|t| ((t.sinh() + t.cosh()).sqrt()) / t)
            .fold(f64::INFINITY, f64::min);
        assert!((opt.delta - scan).abs() < 1e-6);
        // N = 1: δΩ = e^{x/2}/τ, minimized at γτ = 2.
        assert_relative_eq!(opt.tau, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn standard_optimum_decreases_toward_the_floor() {
        let floor = saturation_bound(1.0).unwrap();
        let vals: Vec<f64> = [10, 100, 1000, 10_000]
            .iter()
            .map(|&n| optimize_tau(n, 1.0, Scheme::Standard).unwrap().delta)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(vals.iter().all(|&v| v > floor));
        assert!(vals[3] / floor - 1.0 < 0.01);
        let big = optimize_tau(1_000_000, 1.0, Scheme::Standard).unwrap().delta;
        assert!(big / floor - 1.0 < 1e-3);
    }

    #[test]
    fn optimum_grows_with_noise_and_scales_covariantly() {
        let mut last = 0.0;
        for g in [0.1, 0.5, 1.0, 2.0, 7.0] {
            let opt = optimize_tau(25, g, Scheme::Standard).unwrap();
            assert!(opt.delta >= last);
            last = opt.delta;
        }
        for scheme in [Scheme::Standard, Scheme::TwinDetuning] {
            for (n, g, tau) in [(4, 0.3, 2.0), (10, 2.5, 0.4), (64, 1.7, 1.1)] {
                let lhs = ramsey_sensitivity_analytic(n, g, tau, scheme).unwrap();
                let rhs = g * ramsey_sensitivity_analytic(n, 1.0, g * tau, scheme).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
            }
        }
        assert!(optimize_tau(4, 0.0, Scheme::Standard).is_err());
    }

    #[test]
    fn power_law_fits() {
        let pts: Vec<(f64, f64)> = (1..8).map(|i| (i as f64, 3.0 / (i as f64).sqrt())).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert_relative_eq!(fit.intercept.exp(), 3.0, max_relative = 1e-12);
        assert!(fit.residual < 1e-12);
        let pts: Vec<(f64, f64)> = (1..8).map(|i| (i as f64, 2.0 / i as f64)).collect();
        assert!((loglog_fit(&pts).unwrap().slope + 1.0).abs() < 1e-12);
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 1.0)]).is_err());

        let pts: Vec<(f64, f64)> = (2..=32)
            .map(|k| 2 * k)
            .map(|n| (n as f64, optimize_tau(n, 1.0, Scheme::TwinDetuning).unwrap().delta))
            .collect();
        assert!((loglog_fit(&pts).unwrap().slope + 0.5).abs() < 1e-3);
    }
}
