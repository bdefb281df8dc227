//! Scalar Stratonovich SDE `dx = a₀ x dt + b₀ x ∘ dW`, `x(0) = 1`, whose
//! mean obeys `d⟨x⟩ = (a₀ + b₀²/2) ⟨x⟩ dt`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Target Heun step size.
pub const SDE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeCheck {
    pub empirical_mean: f64,
    pub predicted_mean: f64,
    pub standard_error: f64,
}

impl SdeCheck {
    /// `|empirical − predicted|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        let diff = (self.empirical_mean - self.predicted_mean).abs();
        if self.standard_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / self.standard_error
        }
    }
}

/// Heun (Stratonovich) integration of `n_trajectories` paths up to `t_end`.
pub fn scalar_sde_check(a0: f64, b0: f64, t_end: f64, n_trajectories: usize, seed: u64) -> Result<SdeCheck> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!("final time must be positive, got {t_end}")));
    }
    if n_trajectories == 0 {
        return Err(Error::invalid("need at least one trajectory"));
    }
    if !a0.is_finite() || !b0.is_finite() {
        return Err(Error::invalid("drift and noise coefficients must be finite"));
    }
    let steps = (t_end / SDE_STEP).ceil() as usize;
    let dt = t_end / steps as f64;
    let sqrt_dt = dt.sqrt();
    let finals: Vec<f64> = (0..n_trajectories)
        .into_par_iter()
        .map(|index| {
            let mut rng = super::stream(seed, index as u64);
            let mut x = 1.0_f64;
            for _ in 0..steps {
                let dw = if b0 != 0.0 {
                    sqrt_dt * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                let predictor = x + a0 * x * dt + b0 * x * dw;
                x += 0.5 * (a0 * (x + predictor) * dt + b0 * (x + predictor) * dw);
            }
            x
        })
        .collect();
    let n = finals.len() as f64;
    let mean = pairwise(&finals) / n;
    let var = if finals.len() > 1 {
        pairwise(&finals.iter().map(|x| (x - mean).powi(2)).collect::<Vec<_>>()) / (n - 1.0)
    } else {
        0.0
    };
    Ok(SdeCheck {
        empirical_mean: mean,
        predicted_mean: ((a0 + 0.5 * b0 * b0) * t_end).exp(),
        standard_error: (var / n).sqrt(),
    })
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise(&v[..n / 2]) + pairwise(&v[n / 2..]),
    }
}
