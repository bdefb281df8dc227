//! Dicke bases, collective spin operators, rotations and collective states.
//!
//! Index convention: the Dicke state `|S, M⟩` of a single ensemble with
//! `S = N/2` is stored at array index `k = M + S`, so index 0 is the ground
//! state `M = −S`. A split ensemble uses the product basis of two Dicke bases
//! for `N/2` atoms each, ordered as `(sub-ensemble 1) ⊗ (sub-ensemble 2)`,
//! with flat index `k₁·(N/2 + 1) + k₂`.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::C64;

/// Permutation-symmetric basis of `N` two-level atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DickeBasis {
    n_atoms: usize,
}

impl DickeBasis {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::invalid("a Dicke basis needs at least one atom"));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Total spin `S = N/2`.
    pub fn total_spin(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// Projection quantum number `M` stored at index `k`.
    pub fn projection(&self, k: usize) -> f64 {
        k as f64 - self.total_spin()
    }

    /// Array index of projection `M`, if `M` belongs to `{−S, …, S}`.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let k = m + self.total_spin();
        let rounded = k.round();
        if (k - rounded).abs() > 1e-9 || rounded < 0.0 || rounded > self.n_atoms as f64 {
            return None;
        }
        Some(rounded as usize)
    }

    pub fn projections(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim()).map(move |k| self.projection(k))
    }
}

/// Product basis of two equal sub-ensembles of `N/2` atoms each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitBasis {
    n_atoms: usize,
}

impl SplitBasis {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms < 2 || !n_atoms.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "splitting requires an even atom number, got {n_atoms}"
            )));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Dicke basis of one arm (`N/2` atoms).
    pub fn sub_basis(&self) -> DickeBasis {
        DickeBasis {
            n_atoms: self.n_atoms / 2,
        }
    }

    /// Spin `s = N/4` of each arm.
    pub fn sub_spin(&self) -> f64 {
        self.n_atoms as f64 / 4.0
    }

    pub fn sub_dim(&self) -> usize {
        self.n_atoms / 2 + 1
    }

    pub fn dim(&self) -> usize {
        self.sub_dim() * self.sub_dim()
    }

    pub fn index(&self, k1: usize, k2: usize) -> usize {
        k1 * self.sub_dim() + k2
    }

    pub fn split_index(&self, index: usize) -> (usize, usize) {
        (index / self.sub_dim(), index % self.sub_dim())
    }

    /// Projections `(m₁, m₂)` of the product state at a flat index.
    pub fn projections(&self, index: usize) -> (f64, f64) {
        let (k1, k2) = self.split_index(index);
        let sub = self.sub_basis();
        (sub.projection(k1), sub.projection(k2))
    }
}

/// Basis descriptor carried by every [`CollectiveState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Dicke(DickeBasis),
    Split(SplitBasis),
}

impl Basis {
    pub fn dicke(n_atoms: usize) -> Result<Self> {
        DickeBasis::new(n_atoms).map(Basis::Dicke)
    }

    pub fn split(n_atoms: usize) -> Result<Self> {
        SplitBasis::new(n_atoms).map(Basis::Split)
    }

    pub fn dim(&self) -> usize {
        match self {
            Basis::Dicke(b) => b.dim(),
            Basis::Split(b) => b.dim(),
        }
    }

    pub fn n_atoms(&self) -> usize {
        match self {
            Basis::Dicke(b) => b.n_atoms(),
            Basis::Split(b) => b.n_atoms(),
        }
    }

    pub(crate) fn kind(&self) -> &'static str {
        match self {
            Basis::Dicke(_) => "Dicke basis",
            Basis::Split(_) => "split basis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinOp {
    Sz,
    Sx,
    Sy,
    Splus,
    Sminus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subensemble {
    First,
    Second,
}

/// How the ensemble is prepared before free evolution or driving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Preparation {
    /// All atoms in the ground state, `M = −S`.
    #[default]
    Ground,
    /// Coherent spin state produced by a perfect π/2 pulse from the ground state.
    AfterFirstPulse,
}

fn ladder_coefficient(s: f64, m: f64) -> f64 {
    // ⟨s, m+1| S⁺ |s, m⟩
    (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

fn real_operator(kind: SpinOp, basis: &DickeBasis) -> Option<DMatrix<f64>> {
    let d = basis.dim();
    let s = basis.total_spin();
    let mut m = DMatrix::zeros(d, d);
    match kind {
        SpinOp::Sz => {
            for k in 0..d {
                m[(k, k)] = basis.projection(k);
            }
        }
        SpinOp::Splus | SpinOp::Sminus | SpinOp::Sx => {
            let scale = if kind == SpinOp::Sx { 0.5 } else { 1.0 };
            for k in 0..d - 1 {
                let c = scale * ladder_coefficient(s, basis.projection(k));
                if kind != SpinOp::Sminus {
                    m[(k + 1, k)] = c;
                }
                if kind != SpinOp::Splus {
                    m[(k, k + 1)] = c;
                }
            }
        }
        SpinOp::Sy => return None,
    }
    Some(m)
}

/// Collective spin operator of a single ensemble in the Dicke basis.
///
/// `S_z` is diagonal with entries `M`, `S±` carry `√(S(S+1) − M(M±1))`,
/// `S_x = (S⁺ + S⁻)/2` and `S_y = (S⁺ − S⁻)/(2i)`.
pub fn build_operator(kind: SpinOp, basis: &DickeBasis) -> DMatrix<C64> {
    match real_operator(kind, basis) {
        Some(m) => linalg::real_to_complex(&m),
        None => {
            let sp = build_operator(SpinOp::Splus, basis);
            let sm = build_operator(SpinOp::Sminus, basis);
            (sp - sm) * C64::new(0.0, -0.5)
        }
    }
}

/// Tensor an arm operator with the identity on the other arm.
pub fn embed(op: &DMatrix<C64>, which: Subensemble, basis: &SplitBasis) -> Result<DMatrix<C64>> {
    let d = basis.sub_dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.nrows().max(op.ncols()),
        });
    }
    let id = linalg::identity(d);
    Ok(match which {
        Subensemble::First => op.kronecker(&id),
        Subensemble::Second => id.kronecker(op),
    })
}

/// Total collective operator: the single-ensemble operator for a Dicke
/// basis, or the sum over both arms for a split basis.
pub fn collective_operator(kind: SpinOp, basis: &Basis) -> DMatrix<C64> {
    match basis {
        Basis::Dicke(b) => build_operator(kind, b),
        Basis::Split(b) => {
            let op = build_operator(kind, &b.sub_basis());
            // Dimensions agree by construction.
            embed(&op, Subensemble::First, b).unwrap() + embed(&op, Subensemble::Second, b).unwrap()
        }
    }
}

fn single_rotation_y(basis: &DickeBasis, angle: f64) -> DMatrix<C64> {
    // S_y = P S_x P† with P = diag((−i)^k); S_x is real symmetric, so the
    // exponential follows from an orthogonal eigendecomposition. Eigenvalues
    // are snapped to the exact half-integer spectrum {−S, …, S}.
    let sx = real_operator(SpinOp::Sx, basis).expect("S_x is real");
    let eig = sx.symmetric_eigen();
    let d = basis.dim();
    let v = &eig.eigenvectors;
    let mut u = DMatrix::<C64>::zeros(d, d);
    for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
        let exact = (2.0 * lambda).round() / 2.0;
        let phase = C64::from_polar(1.0, angle * exact);
        for i in 0..d {
            let vi = v[(i, col)] * phase;
            for j in 0..d {
                u[(i, j)] += vi * v[(j, col)];
            }
        }
    }
    let p = |k: usize| -> C64 {
        match k % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, -1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 1.0),
        }
    };
    for i in 0..d {
        for j in 0..d {
            u[(i, j)] *= p(i) * p(j).conj();
        }
    }
    u
}

/// `exp(i·angle·S_y)`; for a split basis the same rotation acts on both arms.
pub fn rotation_y(basis: &Basis, angle: f64) -> DMatrix<C64> {
    match basis {
        Basis::Dicke(b) => single_rotation_y(b, angle),
        Basis::Split(b) => {
            let r = single_rotation_y(&b.sub_basis(), angle);
            r.kronecker(&r)
        }
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for j in 1..=n {
        acc += (j as f64).ln();
        table.push(acc);
    }
    table
}

/// Dicke-basis amplitudes `√(C(N, k) / 2^N)` of the coherent state along +x.
///
/// Binomials are evaluated in log space, so large `N` does not overflow.
pub fn coherent_amplitudes(basis: &DickeBasis) -> DVector<f64> {
    let n = basis.n_atoms();
    let lf = ln_factorials(n);
    DVector::from_iterator(
        n + 1,
        (0..=n).map(|k| (0.5 * (lf[n] - lf[k] - lf[n - k] - n as f64 * LN_2)).exp()),
    )
}

/// State vector after a perfect π/2 pulse applied to the ground state.
pub fn coherent_state_vector(basis: &Basis) -> DVector<C64> {
    let amps = match basis {
        Basis::Dicke(b) => coherent_amplitudes(b),
        Basis::Split(b) => {
            let a = coherent_amplitudes(&b.sub_basis());
            a.kronecker(&a)
        }
    };
    amps.map(|x| C64::new(x, 0.0))
}

pub fn ground_state_vector(basis: &Basis) -> DVector<C64> {
    let mut psi = DVector::zeros(basis.dim());
    psi[0] = C64::new(1.0, 0.0);
    psi
}

/// Density matrix after the first π/2 pulse:
/// `ρ_{M,M'} = 2^{−N} [C(N, M+S) C(N, M'+S)]^{1/2}`, and the four-binomial
/// product for a split ensemble.
pub fn coherent_state_after_first_pulse(basis: &Basis) -> CollectiveState {
    let psi = coherent_state_vector(basis);
    CollectiveState {
        basis: *basis,
        matrix: linalg::outer(&psi),
    }
}

pub fn ground_state(basis: &Basis) -> CollectiveState {
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    m[(0, 0)] = C64::new(1.0, 0.0);
    CollectiveState {
        basis: *basis,
        matrix: m,
    }
}

pub fn prepare(basis: &Basis, preparation: Preparation) -> CollectiveState {
    match preparation {
        Preparation::Ground => ground_state(basis),
        Preparation::AfterFirstPulse => coherent_state_after_first_pulse(basis),
    }
}

pub fn prepare_vector(basis: &Basis, preparation: Preparation) -> DVector<C64> {
    match preparation {
        Preparation::Ground => ground_state_vector(basis),
        Preparation::AfterFirstPulse => coherent_state_vector(basis),
    }
}

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Density matrix tagged with the basis it is expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    basis: Basis,
    matrix: DMatrix<C64>,
}

impl CollectiveState {
    /// Checked constructor: dimension, Hermiticity and unit trace.
    pub fn new(basis: Basis, matrix: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "density matrix is not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace is {tr}")));
        }
        Ok(Self { basis, matrix })
    }

    pub fn from_pure(basis: Basis, psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::invalid("zero state vector"));
        }
        Self::new(basis, linalg::outer(&(psi / C64::new(norm, 0.0))))
    }

    /// Wraps a matrix produced by a trace- and Hermiticity-preserving map.
    pub(crate) fn from_parts(basis: Basis, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), basis.dim());
        Self { basis, matrix }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `tr(A ρ)`.
    pub fn expectation(&self, op: &DMatrix<C64>) -> Result<C64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok(linalg::trace_product(op, &self.matrix))
    }

    /// Real part of `tr(A ρ)` for a Hermitian observable.
    pub fn mean(&self, op: &DMatrix<C64>) -> Result<f64> {
        self.expectation(op).map(|z| z.re)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Full invariant check: Hermitian, unit trace and positive within tolerance.
    pub fn check_invariants(&self) -> Result<()> {
        self.check_invariants_within(POSITIVITY_TOL)
    }

    /// As [`CollectiveState::check_invariants`] with a caller-chosen bound on
    /// negative eigenvalues, for states carrying integration error.
    pub fn check_invariants_within(&self, positivity_tol: f64) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid(format!("Hermiticity defect {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::invalid(format!("trace {tr}")));
        }
        let low = self.min_eigenvalue();
        if low < -positivity_tol {
            return Err(Error::invalid(format!("negative eigenvalue {low:.3e}")));
        }
        Ok(())
    }

    /// Largest elementwise deviation `max |ρ − σ|` from a state on the same
    /// basis.
    pub fn max_deviation(&self, other: &CollectiveState) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis.kind(),
                found: other.basis.kind(),
            });
        }
        Ok(linalg::max_abs_diff(&self.matrix, &other.matrix))
    }

    /// Conjugate by a unitary: `U ρ U†`.
    pub fn transform(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self {
            basis: self.basis,
            matrix: u * &self.matrix * u.adjoint(),
        })
    }

    pub(crate) fn require_dicke(&self) -> Result<DickeBasis> {
        match self.basis {
            Basis::Dicke(b) => Ok(b),
            other => Err(Error::BasisMismatch {
                expected: "Dicke basis",
                found: other.kind(),
            }),
        }
    }

    pub(crate) fn require_split(&self) -> Result<SplitBasis> {
        match self.basis {
            Basis::Split(b) => Ok(b),
            other => Err(Error::BasisMismatch {
                expected: "split basis",
                found: other.kind(),
            }),
        }
    }
}
