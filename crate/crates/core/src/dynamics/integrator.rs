//! Adaptive Dormand–Prince 5(4) integration of autonomous linear-algebra ODEs
//! on flat complex buffers.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Bound on the scaled local error estimate of every accepted step.
    pub tol: f64,
    /// First trial step; defaults to `t_end / 1000`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            initial_step: None,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `dy/dt = f(y)` from `t = 0` to `t_end`, overwriting `y`.
///
/// The local error of every accepted step satisfies
/// `max_i |err_i| / (1 + max(|y_i|, |y_new_i|)) ≤ tol`.
pub fn integrate<F>(mut rhs: F, y: &mut [C64], t_end: f64, opts: IntegratorOptions) -> Result<IntegrationStats>
where
    F: FnMut(&[C64], &mut [C64]),
{
    if !(opts.tol > 0.0) || !opts.tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!("integration time must be non-negative, got {t_end}")));
    }
    let mut stats = IntegrationStats::default();
    if t_end == 0.0 {
        return Ok(stats);
    }

    let n = y.len();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];

    let mut t = 0.0;
    let mut h = opts.initial_step.unwrap_or(t_end / 1000.0).min(t_end);
    let h_min = 16.0 * f64::EPSILON * t_end.max(1.0);
    rhs(y, &mut k[0]);

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                achieved_time: t,
                target_time: t_end,
                reason: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let (k1, rest) = k.split_first_mut().unwrap();
        let (k2, rest) = rest.split_first_mut().unwrap();
        let (k3, rest) = rest.split_first_mut().unwrap();
        let (k4, rest) = rest.split_first_mut().unwrap();
        let (k5, rest) = rest.split_first_mut().unwrap();
        let (k6, rest) = rest.split_first_mut().unwrap();
        let k7 = &mut rest[0];

        combine(&mut stage, y, h, &[(A21, k1)]);
        rhs(&stage, k2);
        combine(&mut stage, y, h, &[(A31, k1), (A32, k2)]);
        rhs(&stage, k3);
        combine(&mut stage, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs(&stage, k4);
        combine(&mut stage, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs(&stage, k5);
        combine(&mut stage, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
        rhs(&stage, k6);
        combine(&mut y_new, y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        rhs(&y_new, k7);

        let mut err = 0.0_f64;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = 1.0 + y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / scale);
        }
        let ratio = err / opts.tol;
        if !ratio.is_finite() {
            return Err(Error::IntegrationFailure {
                achieved_time: t,
                target_time: t_end,
                reason: "non-finite error estimate".into(),
            });
        }

        if ratio <= 1.0 {
            stats.accepted += 1;
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&y_new);
            std::mem::swap(k1, k7);
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            stats.rejected += 1;
            h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(Error::IntegrationFailure {
                    achieved_time: t,
                    target_time: t_end,
                    reason: format!("step size underflow (h = {h:.3e})"),
                });
            }
        }
    }
    Ok(stats)
}
