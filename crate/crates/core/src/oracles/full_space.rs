//! Master-equation evolution of `N ≤ 4` atoms in the full product space.
//!
//! Collective operators are sums of single-atom operators. The evolved state
//! is compressed onto the symmetric (Dicke) subspace, or onto the product of
//! the two arms' symmetric subspaces for split schemes.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{integrator, IntegratorOptions, Jump, Liouvillian, NoiseModel, Scheme};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spin::{Basis, CollectiveState, Preparation, SpinOp};
use crate::C64;

pub const MAX_FULL_SPACE_ATOMS: usize = 4;
/// Integrator tolerance of the product-space runs.
pub const FULL_SPACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FullSpaceResult {
    /// Compression `V† ρ V` onto the symmetric subspace.
    pub projected: CollectiveState,
    /// Population outside the symmetric subspace, `tr ρ − tr(V† ρ V)`.
    pub leakage: f64,
}

/// Single-atom spin-1/2 operator in the basis `(|↓⟩, |↑⟩)`.
fn single(kind: SpinOp) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 0.5);
    let entries = match kind {
        SpinOp::Sz => [-h, z, z, h],
        SpinOp::Sx => [z, h, h, z],
        SpinOp::Sy => [z, i, -i, z],
        SpinOp::Splus => [z, z, one, z],
        SpinOp::Sminus => [z, one, z, z],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

fn check_atoms(n_atoms: usize) -> Result<()> {
    if n_atoms == 0 || n_atoms > MAX_FULL_SPACE_ATOMS {
        return Err(Error::invalid(format!(
            "product-space propagation supports 1 to {MAX_FULL_SPACE_ATOMS} atoms, got {n_atoms}"
        )));
    }
    Ok(())
}

/// `Σ_{i ∈ atoms} 1 ⊗ … ⊗ s_i ⊗ … ⊗ 1` on `2^N` states; atom 0 is the most
/// significant tensor factor.
pub fn product_space_operator(kind: SpinOp, n_atoms: usize, atoms: Range<usize>) -> Result<DMatrix<C64>> {
    check_atoms(n_atoms)?;
    if atoms.end > n_atoms || atoms.start > atoms.end {
        return Err(Error::invalid(format!("atom range {atoms:?} outside 0..{n_atoms}")));
    }
    let dim = 1usize << n_atoms;
    let mut total = DMatrix::<C64>::zeros(dim, dim);
    let s = single(kind);
    for atom in atoms {
        let left = linalg::identity(1 << atom);
        let right = linalg::identity(1 << (n_atoms - atom - 1));
        total += left.kronecker(&s).kronecker(&right);
    }
    Ok(total)
}

fn dicke_isometry(n_atoms: usize) -> DMatrix<C64> {
    let dim = 1usize << n_atoms;
    let mut v = DMatrix::<C64>::zeros(dim, n_atoms + 1);
    for idx in 0..dim {
        v[(idx, idx.count_ones() as usize)] = C64::new(1.0, 0.0);
    }
    for k in 0..=n_atoms {
        let norm = v.column(k).norm();
        v.column_mut(k).unscale_mut(norm);
    }
    v
}

/// Columns are the symmetric basis states of `basis` written in the product
/// space (`|↑⟩` counts as an excitation).
pub fn symmetric_isometry(basis: &Basis) -> Result<DMatrix<C64>> {
    check_atoms(basis.n_atoms())?;
    Ok(match basis {
        Basis::Dicke(b) => dicke_isometry(b.n_atoms()),
        Basis::Split(b) => {
            let half = dicke_isometry(b.n_atoms() / 2);
            half.kronecker(&half)
        }
    })
}

fn product_state(n_atoms: usize, preparation: Preparation) -> DVector<C64> {
    let one = match preparation {
        Preparation::Ground => DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        Preparation::AfterFirstPulse => DVector::from_element(2, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
    };
    let mut psi = DVector::from_element(1, C64::new(1.0, 0.0));
    for _ in 0..n_atoms {
        psi = psi.kronecker(&one);
    }
    psi
}

/// Evolves the prepared product state of `n_atoms ≤ 4` atoms for a time
/// `tau` under the scheme's Hamiltonian and noise, then compresses onto the
/// collective basis of that scheme.
pub fn full_space_propagate(
    n_atoms: usize,
    detuning: f64,
    drive: f64,
    noise: &NoiseModel,
    tau: f64,
    scheme: Scheme,
    preparation: Preparation,
) -> Result<FullSpaceResult> {
    check_atoms(n_atoms)?;
    let basis = scheme.basis(n_atoms)?;
    NoiseModel::new(noise.gamma_d, noise.gamma_a)?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("evolution time must be non-negative, got {tau}")));
    }
    let op = |kind, atoms| product_space_operator(kind, n_atoms, atoms);
    let half = n_atoms / 2;
    let c = |x: f64| C64::new(x, 0.0);
    let sx = op(SpinOp::Sx, 0..n_atoms)?;
    let (h, phase) = match scheme {
        Scheme::Standard => {
            let sz = op(SpinOp::Sz, 0..n_atoms)?;
            (&sz * c(detuning) + &sx * c(2.0 * drive), sz)
        }
        Scheme::TwinDetuning | Scheme::PhaseConjugate => {
            let z1 = op(SpinOp::Sz, 0..half)?;
            let z2 = op(SpinOp::Sz, half..n_atoms)?;
            if scheme == Scheme::TwinDetuning {
                ((&z1 - &z2) * c(detuning) + &sx * c(2.0 * drive), z1 + z2)
            } else {
                ((&z1 + &z2) * c(detuning) + &sx * c(2.0 * drive), z1 - z2)
            }
        }
    };
    let mut jumps = Vec::new();
    if noise.gamma_d > 0.0 {
        jumps.push(Jump::new(noise.gamma_d / 2.0, phase)?);
    }
    if noise.gamma_a > 0.0 {
        jumps.push(Jump::new(2.0 * noise.gamma_a, sx)?);
    }

    let rho0 = linalg::outer(&product_state(n_atoms, preparation));
    let rho = if jumps.is_empty() {
        let u = linalg::unitary_from_real_symmetric(&h.map(|z| z.re), tau);
        &u * rho0 * u.adjoint()
    } else {
        let mut generator = Liouvillian::new(&h, &jumps)?;
        let mut rho = rho0;
        integrator::integrate(
            |y, dy| generator.apply(y, dy),
            rho.as_mut_slice(),
            tau,
            IntegratorOptions::with_tol(FULL_SPACE_TOL),
        )?;
        rho
    };
    let v = symmetric_isometry(&basis)?;
    let projected = v.adjoint() * &rho * &v;
    let leakage = rho.trace().re - projected.trace().re;
    Ok(FullSpaceResult {
        projected: CollectiveState::from_parts(basis, projected),
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{self, free_propagate, HamiltonianSpec};
    use crate::spin::{self, Subensemble};

    #[test]
    fn collective_operators_are_compressed_product_operators() {
        let kinds = [SpinOp::Sz, SpinOp::Sx, SpinOp::Sy, SpinOp::Splus, SpinOp::Sminus];
        for n in 1..=4 {
            let basis = Basis::dicke(n).unwrap();
            let v = symmetric_isometry(&basis).unwrap();
            assert!(linalg::max_abs_diff(&(v.adjoint() * &v), &linalg::identity(n + 1)) < 1e-14);
            for kind in kinds {
                let full = product_space_operator(kind, n, 0..n).unwrap();
                let dicke = spin::collective_operator(kind, &basis);
                assert!(linalg::max_abs_diff(&(v.adjoint() * &full * &v), &dicke) < 1e-12, "{kind:?} N={n}");
                // The symmetric subspace is invariant.
                assert!(linalg::max_abs_diff(&(&full * &v), &(&v * &dicke)) < 1e-12);
            }
        }
        for n in [2, 4] {
            let basis = Basis::split(n).unwrap();
            let Basis::Split(split) = basis else { unreachable!() };
            let v = symmetric_isometry(&basis).unwrap();
            for kind in kinds {
                let arm = spin::build_operator(kind, &split.sub_basis());
                for (which, atoms) in [(Subensemble::First, 0..n / 2), (Subensemble::Second, n / 2..n)] {
                    let full = product_space_operator(kind, n, atoms).unwrap();
                    let embedded = spin::embed(&arm, which, &split).unwrap();
                    assert!(linalg::max_abs_diff(&(v.adjoint() * &full * &v), &embedded) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn prepared_product_states_compress_to_collective_states() {
        for n in 1..=4 {
            for prep in [Preparation::Ground, Preparation::AfterFirstPulse] {
                let r = full_space_propagate(n, 0.0, 0.0, &NoiseModel::noiseless(), 0.0, Scheme::Standard, prep).unwrap();
                let expected = spin::prepare(&Basis::dicke(n).unwrap(), prep);
                assert!(linalg::max_abs_diff(r.projected.matrix(), expected.matrix()) < 1e-14);
            }
        }
    }

    #[test]
    fn free_phases_match() {
        let r = full_space_propagate(2, 1.3, 0.0, &NoiseModel::noiseless(), 0.8, Scheme::Standard, Preparation::AfterFirstPulse)
            .unwrap();
        let start = spin::coherent_state_after_first_pulse(&Basis::dicke(2).unwrap());
        let exact = dynamics::dephasing_propagate(&start, 1.3, 0.0, 0.8).unwrap();
        assert!(linalg::max_abs_diff(r.projected.matrix(), exact.matrix()) < 1e-12);
    }

    #[test]
    fn collective_dephasing_stays_symmetric() {
        let noise = NoiseModel::phase(1.0).unwrap();
        let r = full_space_propagate(3, 0.4, 0.0, &noise, 1.0, Scheme::Standard, Preparation::AfterFirstPulse).unwrap();
        let start = spin::coherent_state_after_first_pulse(&Basis::dicke(3).unwrap());
        let exact = dynamics::dephasing_propagate(&start, 0.4, 1.0, 1.0).unwrap();
        assert!(linalg::max_abs_diff(r.projected.matrix(), exact.matrix()) < 1e-10);
        assert!(r.leakage.abs() < 1e-12);

        for scheme in [Scheme::TwinDetuning, Scheme::PhaseConjugate] {
            let r = full_space_propagate(4, 0.9, 0.0, &noise, 0.5, scheme, Preparation::AfterFirstPulse).unwrap();
            let start = spin::coherent_state_after_first_pulse(&Basis::split(4).unwrap());
            let exact = free_propagate(&start, &HamiltonianSpec::free(0.9, scheme), 1.0, 0.5).unwrap();
            assert!(linalg::max_abs_diff(r.projected.matrix(), exact.matrix()) < 1e-10);
            assert!(r.leakage.abs() < 1e-12);
        }
    }

    #[test]
    fn driven_and_amplitude_noise_runs_match_collective_integration() {
        let cases = [
            (Scheme::Standard, 4, NoiseModel::phase(1.0).unwrap(), 1.0, 1.0),
            (Scheme::Standard, 3, NoiseModel::amplitude(0.5).unwrap(), 0.2, 0.0),
            (Scheme::TwinDetuning, 4, NoiseModel::new(0.5, 0.3).unwrap(), 0.7, 1.0),
            (Scheme::PhaseConjugate, 4, NoiseModel::amplitude(0.4).unwrap(), 0.7, 0.5),
        ];
        for (scheme, n, noise, w, eta) in cases {
            let tau = 1.2;
            let r = full_space_propagate(n, w, eta, &noise, tau, scheme, Preparation::Ground).unwrap();
            let basis = scheme.basis(n).unwrap();
            let spec = HamiltonianSpec::driven(w, eta, scheme);
            let exact = dynamics::evolve(
                &spin::ground_state(&basis),
                &spec.hamiltonian(&basis).unwrap(),
                &spec.jumps(&noise, &basis).unwrap(),
                tau,
                1e-12,
            )
            .unwrap();
            assert!(linalg::max_abs_diff(r.projected.matrix(), exact.matrix()) < 1e-8, "{scheme} N={n}");
            assert!(r.leakage.abs() < 1e-12);
        }
    }

    #[test]
    fn large_ensembles_are_rejected() {
        assert!(full_space_propagate(5, 0.0, 0.0, &NoiseModel::noiseless(), 1.0, Scheme::Standard, Preparation::Ground).is_err());
        assert!(full_space_propagate(3, 0.0, 0.0, &NoiseModel::noiseless(), 1.0, Scheme::TwinDetuning, Preparation::Ground).is_err());
    }
}
