//! Time evolution under collective laser noise.
//!
//! Pure phase noise admits exact element-wise propagators for all three
//! interrogation schemes; these are used for every pure-dephasing Ramsey
//! path. Amplitude noise and continuous driving go through the adaptive
//! integrator in [`evolve`].
//!
//! Rate conventions follow the dissipators exactly as written in the crate
//! docs: phase noise is the jump `(γ_d/2, S_z)` and amplitude noise the jump
//! `(2γ_a, S_x)`, each entering as `rate · (2LρL† − L†Lρ − ρL†L)`.

pub mod integrator;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};
use crate::linalg;
use crate::spin::{self, Basis, CollectiveState, SpinOp, Subensemble};
use crate::C64;

pub use integrator::{IntegrationStats, IntegratorOptions};

/// Default integrator tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// White-noise strengths of the interrogation laser.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Phase-diffusion rate `γ_d`.
    pub gamma_d: f64,
    /// Amplitude-noise rate `γ_a`.
    pub gamma_a: f64,
}

impl NoiseModel {
    pub fn new(gamma_d: f64, gamma_a: f64) -> Result<Self> {
        for (name, v) in [("gamma_d", gamma_d), ("gamma_a", gamma_a)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(Self { gamma_d, gamma_a })
    }

    pub fn phase(gamma_d: f64) -> Result<Self> {
        Self::new(gamma_d, 0.0)
    }

    pub fn amplitude(gamma_a: f64) -> Result<Self> {
        Self::new(0.0, gamma_a)
    }

    pub fn noiseless() -> Self {
        Self::default()
    }
}

/// Interrogation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// One ensemble, one detuning.
    Standard,
    /// Two arms with opposite detunings `±Ω`; the phase noise stays collective.
    TwinDetuning,
    /// Two arms with equal detunings; the laser phase is conjugated on the
    /// second arm, so phase noise couples through `S_z⁽¹⁾ − S_z⁽²⁾`.
    PhaseConjugate,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Standard, Scheme::TwinDetuning, Scheme::PhaseConjugate];

    pub fn is_split(self) -> bool {
        !matches!(self, Scheme::Standard)
    }

    pub fn basis(self, n_atoms: usize) -> Result<Basis> {
        if self.is_split() {
            Basis::split(n_atoms)
        } else {
            Basis::dicke(n_atoms)
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Standard => "standard",
            Scheme::TwinDetuning => "twin",
            Scheme::PhaseConjugate => "conjugate",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" | "std" => Ok(Scheme::Standard),
            "twin" | "twin-detuning" | "twin_detuning" => Ok(Scheme::TwinDetuning),
            "conjugate" | "phase-conjugate" | "phase_conjugate" => Ok(Scheme::PhaseConjugate),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Which solver backs protocol simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    /// Density matrices for exactly solvable runs (pure dephasing between
    /// instantaneous pulses) on at most [`Engine::AUTO_DENSITY_LIMIT`] states,
    /// closed moment equations for everything else.
    #[default]
    Auto,
    /// Density matrices; runs that need numeric integration use [`evolve`].
    DensityMatrix,
    /// Exact first- and second-moment equations, see [`crate::moments`].
    Moments,
}

impl Engine {
    pub const AUTO_DENSITY_LIMIT: usize = 64;

    /// Resolves `Auto` for a state of dimension `dim`. `needs_integration`
    /// marks runs without a closed-form density-matrix propagator.
    pub fn resolve(self, dim: usize, needs_integration: bool) -> Engine {
        match self {
            Engine::Auto if dim <= Self::AUTO_DENSITY_LIMIT && !needs_integration => Engine::DensityMatrix,
            Engine::Auto => Engine::Moments,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::DensityMatrix => "density",
            Engine::Moments => "moments",
        }
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Engine::Auto),
            "density" | "density-matrix" => Ok(Engine::DensityMatrix),
            "moments" => Ok(Engine::Moments),
            other => Err(Error::invalid(format!("unknown engine '{other}'"))),
        }
    }
}

/// A Lindblad jump operator with its rate prefactor.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub rate: f64,
    pub op: DMatrix<C64>,
}

impl Jump {
    pub fn new(rate: f64, op: DMatrix<C64>) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("jump rate must be finite and non-negative, got {rate}")));
        }
        if op.nrows() != op.ncols() {
            return Err(Error::DimensionMismatch {
                expected: op.nrows(),
                found: op.ncols(),
            });
        }
        Ok(Self { rate, op })
    }
}

/// Detuning, drive strength and scheme of a (piecewise) constant Hamiltonian.
///
/// * standard: `Ω S_z + 2η S_x`
/// * twin detuning: `Ω S_z⁽¹⁾ − Ω S_z⁽²⁾ + 2η (S_x⁽¹⁾ + S_x⁽²⁾)`
/// * phase conjugate: `Ω (S_z⁽¹⁾ + S_z⁽²⁾) + 2η (S_x⁽¹⁾ + S_x⁽²⁾)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub detuning: f64,
    pub drive: f64,
    pub scheme: Scheme,
}

impl HamiltonianSpec {
    pub fn free(detuning: f64, scheme: Scheme) -> Self {
        Self {
            detuning,
            drive: 0.0,
            scheme,
        }
    }

    pub fn driven(detuning: f64, drive: f64, scheme: Scheme) -> Self {
        Self {
            detuning,
            drive,
            scheme,
        }
    }

    /// Per-arm detunings `(Ω₁, Ω₂)`; `None` for the single-ensemble scheme.
    pub fn arm_detunings(&self) -> Option<(f64, f64)> {
        match self.scheme {
            Scheme::Standard => None,
            Scheme::TwinDetuning => Some((self.detuning, -self.detuning)),
            Scheme::PhaseConjugate => Some((self.detuning, self.detuning)),
        }
    }

    fn check_basis(&self, basis: &Basis) -> Result<()> {
        match (self.scheme.is_split(), basis) {
            (false, Basis::Dicke(_)) | (true, Basis::Split(_)) => Ok(()),
            (false, other) => Err(Error::BasisMismatch {
                expected: "Dicke basis",
                found: other.kind(),
            }),
            (true, other) => Err(Error::BasisMismatch {
                expected: "split basis",
                found: other.kind(),
            }),
        }
    }

    pub fn hamiltonian(&self, basis: &Basis) -> Result<DMatrix<C64>> {
        self.check_basis(basis)?;
        let drive = spin::collective_operator(SpinOp::Sx, basis) * C64::new(2.0 * self.drive, 0.0);
        let free = match (basis, self.arm_detunings()) {
            (Basis::Split(b), Some((o1, o2))) => {
                let sz = spin::build_operator(SpinOp::Sz, &b.sub_basis());
                spin::embed(&sz, Subensemble::First, b)? * C64::new(o1, 0.0)
                    + spin::embed(&sz, Subensemble::Second, b)? * C64::new(o2, 0.0)
            }
            _ => spin::collective_operator(SpinOp::Sz, basis) * C64::new(self.detuning, 0.0),
        };
        Ok(free + drive)
    }

    /// Noise channels of this scheme: `(γ_d/2, S_z-type)` and `(2γ_a, S_x)`.
    /// Zero-rate channels are omitted.
    pub fn jumps(&self, noise: &NoiseModel, basis: &Basis) -> Result<Vec<Jump>> {
        self.check_basis(basis)?;
        let mut jumps = Vec::new();
        if noise.gamma_d > 0.0 {
            let op = match (self.scheme, basis) {
                (Scheme::PhaseConjugate, Basis::Split(b)) => {
                    let sz = spin::build_operator(SpinOp::Sz, &b.sub_basis());
                    spin::embed(&sz, Subensemble::First, b)? - spin::embed(&sz, Subensemble::Second, b)?
                }
                _ => spin::collective_operator(SpinOp::Sz, basis),
            };
            jumps.push(Jump::new(noise.gamma_d / 2.0, op)?);
        }
        if noise.gamma_a > 0.0 {
            jumps.push(Jump::new(2.0 * noise.gamma_a, spin::collective_operator(SpinOp::Sx, basis))?);
        }
        Ok(jumps)
    }
}

fn check_time(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("evolution time must be finite and non-negative, got {tau}")));
    }
    Ok(())
}

fn check_rate(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::invalid(format!("dephasing rate must be finite and non-negative, got {gamma}")));
    }
    Ok(())
}

fn propagate_elementwise<F>(rho0: &CollectiveState, factor: F) -> CollectiveState
where
    F: Fn(usize, usize) -> C64,
{
    let mut m = rho0.matrix().clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= factor(i, j);
        }
    }
    CollectiveState::from_parts(*rho0.basis(), m)
}

/// Exact free evolution of a single ensemble under `Ω S_z` with collective
/// dephasing: `ρ_{M,M'}(τ) = ρ_{M,M'}(0) e^{iΩτ(M'−M)} e^{−γ_d τ (M'−M)²/2}`.
pub fn dephasing_propagate(rho0: &CollectiveState, omega: f64, gamma_d: f64, tau: f64) -> Result<CollectiveState> {
    rho0.require_dicke()?;
    check_time(tau)?;
    check_rate(gamma_d)?;
    Ok(propagate_elementwise(rho0, |i, j| {
        let delta = j as f64 - i as f64;
        C64::new(-0.5 * gamma_d * tau * delta * delta, omega * tau * delta).exp()
    }))
}

/// Exact free evolution of a split ensemble with arm detunings `Ω₁`, `Ω₂` and
/// collective dephasing through `S_z⁽¹⁾ + S_z⁽²⁾`.
pub fn split_dephasing_propagate(
    rho0: &CollectiveState,
    omega1: f64,
    omega2: f64,
    gamma_d: f64,
    tau: f64,
) -> Result<CollectiveState> {
    let basis = rho0.require_split()?;
    check_time(tau)?;
    check_rate(gamma_d)?;
    Ok(propagate_elementwise(rho0, |i, j| {
        let (k1, k2) = basis.split_index(i);
        let (l1, l2) = basis.split_index(j);
        let d1 = l1 as f64 - k1 as f64;
        let d2 = l2 as f64 - k2 as f64;
        let total = d1 + d2;
        C64::new(-0.5 * gamma_d * tau * total * total, tau * (omega1 * d1 + omega2 * d2)).exp()
    }))
}

/// Exact free evolution of a split ensemble under `Ω (S_z⁽¹⁾ + S_z⁽²⁾)` with
/// dephasing through `S_z⁽¹⁾ − S_z⁽²⁾` (phase conjugated on the second arm).
pub fn conjugate_dephasing_propagate(
    rho0: &CollectiveState,
    omega: f64,
    gamma_d: f64,
    tau: f64,
) -> Result<CollectiveState> {
    let basis = rho0.require_split()?;
    check_time(tau)?;
    check_rate(gamma_d)?;
    Ok(propagate_elementwise(rho0, |i, j| {
        let (k1, k2) = basis.split_index(i);
        let (l1, l2) = basis.split_index(j);
        let d1 = l1 as f64 - k1 as f64;
        let d2 = l2 as f64 - k2 as f64;
        let diff = d1 - d2;
        C64::new(-0.5 * gamma_d * tau * diff * diff, omega * tau * (d1 + d2)).exp()
    }))
}

/// Exact free evolution of `rho0` for the scheme in `spec` (drive must be zero).
pub fn free_propagate(rho0: &CollectiveState, spec: &HamiltonianSpec, gamma_d: f64, tau: f64) -> Result<CollectiveState> {
    if spec.drive != 0.0 {
        return Err(Error::invalid("exact propagators only cover free evolution (drive = 0)"));
    }
    match spec.scheme {
        Scheme::Standard => dephasing_propagate(rho0, spec.detuning, gamma_d, tau),
        Scheme::TwinDetuning => split_dephasing_propagate(rho0, spec.detuning, -spec.detuning, gamma_d, tau),
        Scheme::PhaseConjugate => conjugate_dephasing_propagate(rho0, spec.detuning, gamma_d, tau),
    }
}

struct PreparedJump {
    rate: f64,
    op: DMatrix<C64>,
    op_dag: DMatrix<C64>,
    op_dag_op: DMatrix<C64>,
}

/// Lindblad generator with precomputed operator products and scratch space.
pub struct Liouvillian {
    dim: usize,
    hamiltonian: DMatrix<C64>,
    jumps: Vec<PreparedJump>,
    scratch: DMatrix<C64>,
}

impl Liouvillian {
    pub fn new(hamiltonian: &DMatrix<C64>, jumps: &[Jump]) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.ncols(),
            });
        }
        let mut prepared = Vec::with_capacity(jumps.len());
        for j in jumps {
            if j.op.nrows() != dim || j.op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: j.op.nrows(),
                });
            }
            if !(j.rate >= 0.0) || !j.rate.is_finite() {
                return Err(Error::invalid(format!("jump rate must be non-negative, got {}", j.rate)));
            }
            if j.rate == 0.0 {
                continue;
            }
            let op_dag = j.op.adjoint();
            prepared.push(PreparedJump {
                rate: j.rate,
                op_dag_op: &op_dag * &j.op,
                op: j.op.clone(),
                op_dag,
            });
        }
        Ok(Self {
            dim,
            hamiltonian: hamiltonian.clone(),
            jumps: prepared,
            scratch: DMatrix::zeros(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `i[ρ, H] + Σ rate (2LρL† − L†Lρ − ρL†L)` into `out`; both slices
    /// hold column-major `dim × dim` matrices.
    pub fn apply(&mut self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let rho = DMatrixView::from_slice(rho, d, d);
        let mut out = DMatrixViewMut::from_slice(out, d, d);
        let i = C64::new(0.0, 1.0);
        out.gemm(i, &rho, &self.hamiltonian, C64::new(0.0, 0.0));
        out.gemm(-i, &self.hamiltonian, &rho, C64::new(1.0, 0.0));
        for j in &self.jumps {
            let r = C64::new(j.rate, 0.0);
            self.scratch.gemm(C64::new(1.0, 0.0), &j.op, &rho, C64::new(0.0, 0.0));
            out.gemm(r * 2.0, &self.scratch, &j.op_dag, C64::new(1.0, 0.0));
            out.gemm(-r, &j.op_dag_op, &rho, C64::new(1.0, 0.0));
            out.gemm(-r, &rho, &j.op_dag_op, C64::new(1.0, 0.0));
        }
    }
}

/// Right-hand side of the master equation,
/// `i[ρ, H] + Σ rate (2LρL† − L†Lρ − ρL†L)`.
pub fn lindblad_rhs(rho: &DMatrix<C64>, hamiltonian: &DMatrix<C64>, jumps: &[Jump]) -> Result<DMatrix<C64>> {
    let mut generator = Liouvillian::new(hamiltonian, jumps)?;
    if rho.nrows() != generator.dim() || rho.ncols() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            found: rho.nrows(),
        });
    }
    let mut out = DMatrix::zeros(generator.dim(), generator.dim());
    generator.apply(rho.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// Integrates the master equation from `rho0` for a time `tau` with the
/// adaptive Dormand–Prince pair.
///
/// The result is re-Hermitized and renormalized to unit trace; if either
/// correction exceeds `10·tol` the run is reported as an integration failure.
pub fn evolve(
    rho0: &CollectiveState,
    hamiltonian: &DMatrix<C64>,
    jumps: &[Jump],
    tau: f64,
    tol: f64,
) -> Result<CollectiveState> {
    evolve_with(rho0, hamiltonian, jumps, tau, IntegratorOptions::with_tol(tol)).map(|(s, _)| s)
}

pub fn evolve_with(
    rho0: &CollectiveState,
    hamiltonian: &DMatrix<C64>,
    jumps: &[Jump],
    tau: f64,
    opts: IntegratorOptions,
) -> Result<(CollectiveState, IntegrationStats)> {
    check_time(tau)?;
    let mut generator = Liouvillian::new(hamiltonian, jumps)?;
    if generator.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: generator.dim(),
        });
    }
    let mut rho = rho0.matrix().clone();
    let stats = integrator::integrate(|y, dy| generator.apply(y, dy), rho.as_mut_slice(), tau, opts)?;

    let bound = 10.0 * opts.tol;
    let fail = |reason: String| Error::IntegrationFailure {
        achieved_time: tau,
        target_time: tau,
        reason,
    };
    let herm_defect = linalg::hermiticity_defect(&rho) / 2.0;
    if herm_defect > bound {
        return Err(fail(format!("Hermiticity correction {herm_defect:.3e} exceeds {bound:.1e}")));
    }
    let mut rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > bound {
        return Err(fail(format!("trace correction {:.3e} exceeds {bound:.1e}", (trace - 1.0).abs())));
    }
    rho /= C64::new(trace, 0.0);
    Ok((CollectiveState::from_parts(*rho0.basis(), rho), stats))
}
