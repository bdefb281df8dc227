//! Shared fixtures for the benchmarks.

use lasernoise::spin::coherent_state_after_first_pulse;
use lasernoise::{CollectiveState, HamiltonianSpec, Jump, NoiseModel, Scheme};

/// The state after the first pulse with the free Hamiltonian and noise of
/// one Ramsey dark period.
pub struct FreeProblem {
    pub start: CollectiveState,
    pub spec: HamiltonianSpec,
    pub noise: NoiseModel,
}

impl FreeProblem {
    pub fn new(n_atoms: usize, scheme: Scheme, omega: f64, gamma_d: f64, gamma_a: f64) -> Self {
        let basis = scheme.basis(n_atoms).expect("valid atom number");
        Self {
            start: coherent_state_after_first_pulse(&basis),
            spec: HamiltonianSpec::free(omega, scheme),
            noise: NoiseModel::new(gamma_d, gamma_a).expect("valid rates"),
        }
    }

    pub fn jumps(&self) -> Vec<Jump> {
        self.spec.jumps(&self.noise, self.start.basis()).expect("jumps build")
    }
}
