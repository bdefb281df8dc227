//! Exact closed equations for first and second moments of collective spins.
//!
//! When the Hamiltonian and every jump operator are linear in the spin
//! components `S_x, S_y, S_z` of one or two arms, the Heisenberg-picture
//! generator
//!
//! `A ↦ i[H, A] + Σ rate (2LAL − L²A − AL²) = i[H, A] − Σ rate [L, [L, A]]`
//!
//! acts on an ordered product `g_a g_b` of generators through the Leibniz rule
//! alone, so `⟨g_a⟩` and `⟨g_a g_b⟩` obey closed linear ODEs with
//! `N`-independent coefficients. `N` only enters through the initial values.
//! Both systems are solved exactly by matrix exponentials, which makes sweeps
//! at large `N` (where the split basis has `(N/2 + 1)²` states) cheap.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{HamiltonianSpec, NoiseModel, Scheme};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spin::{self, Basis, CollectiveState, Preparation, SpinOp, Subensemble};
use crate::C64;

const EPS: [[[f64; 3]; 3]; 3] = {
    let mut e = [[[0.0; 3]; 3]; 3];
    e[0][1][2] = 1.0;
    e[1][2][0] = 1.0;
    e[2][0][1] = 1.0;
    e[0][2][1] = -1.0;
    e[2][1][0] = -1.0;
    e[1][0][2] = -1.0;
    e
};

/// Hamiltonian and jump operators as real coefficient vectors over the
/// generators `(S_x, S_y, S_z)` of each arm.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentModel {
    arms: usize,
    hamiltonian: Vec<f64>,
    jumps: Vec<(f64, Vec<f64>)>,
}

impl MomentModel {
    pub fn new(arms: usize, hamiltonian: Vec<f64>, jumps: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if arms == 0 || arms > 2 {
            return Err(Error::invalid(format!("moment model supports one or two arms, got {arms}")));
        }
        let k = 3 * arms;
        if hamiltonian.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: hamiltonian.len(),
            });
        }
        for (rate, op) in &jumps {
            if !(*rate >= 0.0) || !rate.is_finite() {
                return Err(Error::invalid(format!("jump rate must be non-negative, got {rate}")));
            }
            if op.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: op.len(),
                });
            }
        }
        Ok(Self {
            arms,
            hamiltonian,
            jumps,
        })
    }

    /// The same dynamics as [`HamiltonianSpec::hamiltonian`] and
    /// [`HamiltonianSpec::jumps`], in coefficient form.
    pub fn from_spec(spec: &HamiltonianSpec, noise: &NoiseModel) -> Self {
        let drive = 2.0 * spec.drive;
        let (hamiltonian, phase, amplitude) = match spec.scheme {
            Scheme::Standard => (vec![drive, 0.0, spec.detuning], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]),
            Scheme::TwinDetuning => (
                vec![drive, 0.0, spec.detuning, drive, 0.0, -spec.detuning],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
                vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            ),
            Scheme::PhaseConjugate => (
                vec![drive, 0.0, spec.detuning, drive, 0.0, spec.detuning],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, -1.0],
                vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            ),
        };
        let mut jumps = Vec::new();
        if noise.gamma_d > 0.0 {
            jumps.push((noise.gamma_d / 2.0, phase));
        }
        if noise.gamma_a > 0.0 {
            jumps.push((2.0 * noise.gamma_a, amplitude));
        }
        Self {
            arms: if spec.scheme.is_split() { 2 } else { 1 },
            hamiltonian,
            jumps,
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    /// `[Σ_i x_i g_i, g_j] = Σ_k C[j, k] g_k`; the entries are purely imaginary,
    /// so the returned real matrix is `C / i`.
    fn adjoint_action(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let k = 3 * self.arms;
        let mut c = DMatrix::zeros(k, k);
        for arm in 0..self.arms {
            for i in 0..3 {
                let x = coeffs[3 * arm + i];
                if x == 0.0 {
                    continue;
                }
                for j in 0..3 {
                    for l in 0..3 {
                        c[(3 * arm + j, 3 * arm + l)] += x * EPS[i][j][l];
                    }
                }
            }
        }
        c
    }

    /// Generators of the first-moment and ordered-second-moment equations.
    pub fn generators(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = 3 * self.arms;
        let id = DMatrix::<f64>::identity(k, k);
        let leibniz = |c: &DMatrix<f64>| c.kronecker(&id) + id.kronecker(c);

        // With C = i·c: i[H, ·] → i·(i c_H) = −c_H and −r[L,[L,·]] → −r (i c_L)² = r c_L².
        let c_h = self.adjoint_action(&self.hamiltonian);
        let mut first = -&c_h;
        let mut second = -leibniz(&c_h);
        for (rate, op) in &self.jumps {
            let c_l = self.adjoint_action(op);
            first += &c_l * &c_l * *rate;
            let k_l = leibniz(&c_l);
            second += &k_l * &k_l * *rate;
        }
        (first, second)
    }
}

fn apply_real(m: &DMatrix<f64>, v: &DVector<C64>) -> DVector<C64> {
    let re = m * v.map(|z| z.re);
    let im = m * v.map(|z| z.im);
    DVector::from_iterator(v.len(), re.iter().zip(im.iter()).map(|(&a, &b)| C64::new(a, b)))
}

/// First moments `⟨g_a⟩` and ordered second moments `⟨g_a g_b⟩` of the spin
/// generators of one or two arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMoments {
    arms: usize,
    first: DVector<C64>,
    second: DMatrix<C64>,
}

impl SpinMoments {
    /// Spin-`s` coherent state along the unit vector `direction` in every arm
    /// (arms are uncorrelated).
    pub fn coherent(arms: usize, spin: f64, direction: [f64; 3]) -> Self {
        let n = direction;
        let mut single = DMatrix::<C64>::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                let mut im = 0.0;
                for (c, nc) in n.iter().enumerate() {
                    im += 0.5 * spin * EPS[a][b][c] * nc;
                }
                let re = spin * spin * n[a] * n[b] + 0.5 * spin * (delta - n[a] * n[b]);
                single[(a, b)] = C64::new(re, im);
            }
        }
        let m1 = DVector::from_iterator(3, n.iter().map(|&x| C64::new(spin * x, 0.0)));
        let k = 3 * arms;
        let mut first = DVector::zeros(k);
        let mut second = DMatrix::zeros(k, k);
        for e in 0..arms {
            first.rows_mut(3 * e, 3).copy_from(&m1);
            for f in 0..arms {
                let block = if e == f { single.clone() } else { &m1 * m1.transpose() };
                second.view_mut((3 * e, 3 * f), (3, 3)).copy_from(&block);
            }
        }
        Self { arms, first, second }
    }

    /// Moments of the prepared state of `n_atoms` for the given scheme.
    pub fn prepared(scheme: Scheme, n_atoms: usize, preparation: Preparation) -> Result<Self> {
        let basis = scheme.basis(n_atoms)?;
        let (arms, spin) = match basis {
            Basis::Dicke(b) => (1, b.total_spin()),
            Basis::Split(b) => (2, b.sub_spin()),
        };
        let direction = match preparation {
            Preparation::Ground => [0.0, 0.0, -1.0],
            Preparation::AfterFirstPulse => [1.0, 0.0, 0.0],
        };
        Ok(Self::coherent(arms, spin, direction))
    }

    /// Moments of an explicit density matrix.
    pub fn from_state(state: &CollectiveState) -> Self {
        let ops: Vec<DMatrix<C64>> = match state.basis() {
            Basis::Dicke(b) => [SpinOp::Sx, SpinOp::Sy, SpinOp::Sz]
                .iter()
                .map(|&k| spin::build_operator(k, b))
                .collect(),
            Basis::Split(b) => {
                let mut v = Vec::with_capacity(6);
                for which in [Subensemble::First, Subensemble::Second] {
                    for kind in [SpinOp::Sx, SpinOp::Sy, SpinOp::Sz] {
                        let op = spin::build_operator(kind, &b.sub_basis());
                        v.push(spin::embed(&op, which, b).expect("arm dimension"));
                    }
                }
                v
            }
        };
        let k = ops.len();
        let rho = state.matrix();
        let first = DVector::from_iterator(k, ops.iter().map(|g| linalg::trace_product(g, rho)));
        let second = DMatrix::from_fn(k, k, |a, b| linalg::trace_product(&(&ops[a] * &ops[b]), rho));
        Self {
            arms: k / 3,
            first,
            second,
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn first(&self) -> &DVector<C64> {
        &self.first
    }

    pub fn second(&self) -> &DMatrix<C64> {
        &self.second
    }

    /// Moments after `ρ → U ρ U†` with `U = exp(i·angle·S_y)` on every arm.
    pub fn rotate_y(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        // U† S U = R S, rows indexed by (x, y, z).
        let single = DMatrix::from_row_slice(3, 3, &[c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c]);
        let k = 3 * self.arms;
        let mut r = DMatrix::<f64>::zeros(k, k);
        for e in 0..self.arms {
            r.view_mut((3 * e, 3 * e), (3, 3)).copy_from(&single);
        }
        let rc = linalg::real_to_complex(&r);
        Self {
            arms: self.arms,
            first: &rc * &self.first,
            second: &rc * &self.second * rc.transpose(),
        }
    }

    /// Exact evolution for a time `tau` under `model`.
    pub fn evolve(&self, model: &MomentModel, tau: f64) -> Result<Self> {
        if model.arms != self.arms {
            return Err(Error::DimensionMismatch {
                expected: 3 * self.arms,
                found: 3 * model.arms,
            });
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::invalid(format!("evolution time must be non-negative, got {tau}")));
        }
        let (g1, g2) = model.generators();
        let p1 = (g1 * tau).exp();
        let p2 = (g2 * tau).exp();
        let k = 3 * self.arms;
        // Flattened index a·k + b, matching the Kronecker layout of `g2`.
        let flat = DVector::from_iterator(k * k, (0..k * k).map(|idx| self.second[(idx / k, idx % k)]));
        let evolved = apply_real(&p2, &flat);
        Ok(Self {
            arms: self.arms,
            first: apply_real(&p1, &self.first),
            second: DMatrix::from_fn(k, k, |a, b| evolved[a * k + b]),
        })
    }

    /// `(⟨S_z⟩, ⟨S_z²⟩)` of the total inversion summed over arms.
    pub fn total_sz(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut second = 0.0;
        for e in 0..self.arms {
            mean += self.first[3 * e + 2].re;
            for f in 0..self.arms {
                second += self.second[(3 * e + 2, 3 * f + 2)].re;
            }
        }
        (mean, second)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, free_propagate};
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &SpinMoments, b: &SpinMoments, tol: f64) -> bool {
        let d1 = a.first.iter().zip(b.first.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let d2 = linalg::max_abs_diff(&a.second, &b.second);
        d1 < tol && d2 < tol
    }

    #[test]
    fn coherent_moments_match_density_matrices() {
        for n in [1, 2, 5, 9] {
            for prep in [Preparation::Ground, Preparation::AfterFirstPulse] {
                let basis = Basis::dicke(n).unwrap();
                let from_state = SpinMoments::from_state(&spin::prepare(&basis, prep));
                let analytic = SpinMoments::prepared(Scheme::Standard, n, prep).unwrap();
                assert!(close(&from_state, &analytic, 1e-12), "N = {n}, {prep:?}");
            }
        }
        for n in [2, 4, 6] {
            let basis = Basis::split(n).unwrap();
            let from_state = SpinMoments::from_state(&spin::prepare(&basis, Preparation::AfterFirstPulse));
            let analytic = SpinMoments::prepared(Scheme::TwinDetuning, n, Preparation::AfterFirstPulse).unwrap();
            assert!(close(&from_state, &analytic, 1e-12));
        }
    }

    #[test]
    fn rotation_matches_unitary_conjugation() {
        let basis = Basis::dicke(4).unwrap();
        let state = spin::coherent_state_after_first_pulse(&basis).transform(&spin::rotation_y(&basis, 0.4)).unwrap();
        let moments = SpinMoments::from_state(&state);
        for angle in [0.3, FRAC_PI_2, -1.1] {
            let rotated = state.transform(&spin::rotation_y(&basis, angle)).unwrap();
            assert!(close(&moments.rotate_y(angle), &SpinMoments::from_state(&rotated), 1e-12));
        }
    }

    #[test]
    fn dephasing_moments_match_exact_propagators() {
        for scheme in Scheme::ALL {
            let basis = scheme.basis(6).unwrap();
            let rho = spin::coherent_state_after_first_pulse(&basis);
            let spec = HamiltonianSpec::free(0.9, scheme);
            let noise = NoiseModel::phase(0.7).unwrap();
            let exact = free_propagate(&rho, &spec, 0.7, 1.3).unwrap();
            let moments = SpinMoments::from_state(&rho)
                .evolve(&MomentModel::from_spec(&spec, &noise), 1.3)
                .unwrap();
            assert!(close(&moments, &SpinMoments::from_state(&exact), 1e-12), "{scheme}");
        }
    }

    #[test]
    fn driven_noisy_moments_match_lindblad_integration() {
        let noise = NoiseModel::new(0.8, 0.3).unwrap();
        for scheme in Scheme::ALL {
            let basis = scheme.basis(4).unwrap();
            let rho = spin::ground_state(&basis);
            let spec = HamiltonianSpec::driven(0.6, 0.9, scheme);
            let numeric = evolve(
                &rho,
                &spec.hamiltonian(&basis).unwrap(),
                &spec.jumps(&noise, &basis).unwrap(),
                1.7,
                1e-12,
            )
            .unwrap();
            let moments = SpinMoments::from_state(&rho)
                .evolve(&MomentModel::from_spec(&spec, &noise), 1.7)
                .unwrap();
            assert!(close(&moments, &SpinMoments::from_state(&numeric), 1e-9), "{scheme}");
        }
    }

    #[test]
    fn model_validation() {
        assert!(MomentModel::new(3, vec![0.0; 9], vec![]).is_err());
        assert!(MomentModel::new(1, vec![0.0; 6], vec![]).is_err());
        assert!(MomentModel::new(1, vec![0.0; 3], vec![(-1.0, vec![0.0; 3])]).is_err());
        let m = SpinMoments::coherent(1, 1.0, [1.0, 0.0, 0.0]);
        let two_arm = MomentModel::new(2, vec![0.0; 6], vec![]).unwrap();
        assert!(m.evolve(&two_arm, 1.0).is_err());
    }
}
