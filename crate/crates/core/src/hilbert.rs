//! Tensor-product linear algebra on small, dense composite Hilbert spaces.
//!
//! Every operator and state is bound to a [`CompositeSpace`], an ordered list
//! of labelled subsystems. Basis indices are row-major over that order: the
//! first subsystem is the most significant digit, so `embed(X, first)` is
//! `X ⊗ 1 ⊗ … ⊗ 1` in the usual Kronecker convention.
//!
//! Units: ħ = 1, so `exp(-i H t)` is the propagator for a Hamiltonian `H`.

use std::fmt;

use ndarray::{linalg::kron, Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, EigValsh, UPLO};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MASS1: &str = "Mass1";
pub const MASS2: &str = "Mass2";
pub const FIELD: &str = "Field";

/// Tolerance on `max |M - M^dag|` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on norm / trace / smallest eigenvalue for a valid state.
pub const STATE_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled subsystems. Labels are unique and every dimension
/// is at least one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Subsystem>", into = "Vec<Subsystem>")]
pub struct CompositeSpace {
    subsystems: Vec<Subsystem>,
}

impl TryFrom<Vec<Subsystem>> for CompositeSpace {
    type Error = Error;

    fn try_from(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidSpace("no subsystems".into()));
        }
        for (i, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::InvalidSpace(format!("subsystem `{}` has dimension 0", s.label)));
            }
            if subsystems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::InvalidSpace(format!("duplicate label `{}`", s.label)));
            }
        }
        Ok(Self { subsystems })
    }
}

impl From<CompositeSpace> for Vec<Subsystem> {
    fn from(space: CompositeSpace) -> Self {
        space.subsystems
    }
}

impl CompositeSpace {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        subsystems
            .into_iter()
            .map(|(label, dim)| Subsystem { label: label.into(), dim })
            .collect::<Vec<_>>()
            .try_into()
    }

    /// `Mass1 (2) ⊗ Mass2 (2) ⊗ Field (n_cut)`.
    pub fn canonical(n_cut: usize) -> Result<Self> {
        Self::new([(MASS1, 2), (MASS2, 2), (FIELD, n_cut)])
    }

    /// `Mass1 (2) ⊗ Mass2 (2)`.
    pub fn masses() -> Self {
        Self::new([(MASS1, 2), (MASS2, 2)]).expect("static space is valid")
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.label.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    /// Subspace made of the given labels, kept in this space's order.
    pub fn subspace(&self, keep: &[&str]) -> Result<Self> {
        for label in keep {
            self.position(label)?;
        }
        let subs: Vec<Subsystem> = self
            .subsystems
            .iter()
            .filter(|s| keep.contains(&s.label.as_str()))
            .cloned()
            .collect();
        subs.try_into()
    }

    /// Space with the given labels removed.
    pub fn without(&self, drop: &[&str]) -> Result<Self> {
        for label in drop {
            self.position(label)?;
        }
        let keep: Vec<&str> = self.labels().filter(|l| !drop.contains(l)).collect();
        self.subspace(&keep)
    }

    /// Per-index digit decomposition: `digits(i)[k]` is the level of subsystem `k`.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.subsystems.len()];
        for (k, s) in self.subsystems.iter().enumerate().rev() {
            out[k] = index % s.dim;
            index /= s.dim;
        }
        out
    }

    /// For every full basis index, its index within the `selected` positions
    /// and within the complementary positions.
    fn split_indices(&self, selected: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.total_dim();
        let mut sel = Vec::with_capacity(n);
        let mut rest = Vec::with_capacity(n);
        for i in 0..n {
            let digits = self.digits(i);
            let (mut a, mut b) = (0, 0);
            for (k, s) in self.subsystems.iter().enumerate() {
                if selected.contains(&k) {
                    a = a * s.dim + digits[k];
                } else {
                    b = b * s.dim + digits[k];
                }
            }
            sel.push(a);
            rest.push(b);
        }
        (sel, rest)
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.subsystems.iter().map(|s| format!("{}({})", s.label, s.dim)).collect();
        f.write_str(&parts.join(" ⊗ "))
    }
}

/// Largest element of `|M - M^dag|`.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

fn is_diagonal(m: &Array2<C64>) -> bool {
    m.indexed_iter().all(|((i, j), z)| i == j || *z == ZERO)
}

/// Dense complex operator bound to a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: CompositeSpace,
    matrix: Array2<C64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(space: CompositeSpace, matrix: Array2<C64>) -> Result<Self> {
        let n = space.total_dim();
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix, hermitian: false })
    }

    /// Operator carrying a Hermitian claim; the claim is checked.
    pub fn hermitian(space: CompositeSpace, matrix: Array2<C64>) -> Result<Self> {
        let mut op = Self::new(space, matrix)?;
        let deviation = hermiticity_defect(&op.matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let n = space.total_dim();
        Self { space, matrix: Array2::eye(n), hermitian: true }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: dagger(&self.matrix), hermitian: self.hermitian }
    }

    pub fn dot(&self, other: &Operator) -> Result<Operator> {
        if self.space != other.space {
            return Err(Error::InvalidSpace(format!("{} vs {}", self.space, other.space)));
        }
        Operator::new(self.space.clone(), self.matrix.dot(&other.matrix))
    }

    /// Real spectrum in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        Ok(self.matrix.eigvalsh(UPLO::Lower)?.to_vec())
    }

    fn require_hermitian(&self) -> Result<()> {
        let deviation = hermiticity_defect(&self.matrix);
        if !self.hermitian || deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Single-subsystem constructors

/// Truncated bosonic lowering operator: `A[m-1, m] = sqrt(m)`.
pub fn annihilation(n_cut: usize) -> Result<Operator> {
    if n_cut < 2 {
        return Err(Error::InvalidParams(format!("n_cut must be at least 2, got {n_cut}")));
    }
    let mut a = Array2::zeros((n_cut, n_cut));
    for m in 1..n_cut {
        a[[m - 1, m]] = C64::new((m as f64).sqrt(), 0.0);
    }
    Operator::new(CompositeSpace::single(FIELD, n_cut)?, a)
}

pub fn creation(n_cut: usize) -> Result<Operator> {
    Ok(annihilation(n_cut)?.dagger())
}

/// `a^dag a = diag(0, 1, …, n_cut - 1)`, exact under truncation.
pub fn number(n_cut: usize) -> Result<Operator> {
    let diag = Array1::from_iter((0..n_cut).map(|m| C64::new(m as f64, 0.0)));
    Operator::hermitian(CompositeSpace::single(FIELD, n_cut)?, Array2::from_diag(&diag))
}

/// `X = (a + a^dag) / sqrt(2)`.
pub fn quadrature(n_cut: usize) -> Result<Operator> {
    let a = annihilation(n_cut)?;
    let x = (a.matrix() + &dagger(a.matrix())).mapv(|z| z / 2f64.sqrt());
    Operator::hermitian(CompositeSpace::single(FIELD, n_cut)?, x)
}

/// Branch-occupation projector `|1><1|` of a two-path mass.
pub fn branch_projector() -> Array2<C64> {
    let mut n = Array2::zeros((2, 2));
    n[[1, 1]] = ONE;
    n
}

pub fn pauli_x() -> Array2<C64> {
    ndarray::array![[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Array2<C64> {
    let i = C64::new(0.0, 1.0);
    ndarray::array![[ZERO, -i], [i, ZERO]]
}

pub fn pauli_z() -> Array2<C64> {
    ndarray::array![[ONE, ZERO], [ZERO, -ONE]]
}

// ---------------------------------------------------------------------------
// Embedding

/// Tensor `factor` into `space` at `target`, identity elsewhere.
pub fn embed(factor: &Array2<C64>, target: &str, space: &CompositeSpace) -> Result<Operator> {
    let matrix = embed_factors([(target, factor)], space)?;
    let hermitian = hermiticity_defect(factor) <= HERMITIAN_TOL;
    let mut op = Operator::new(space.clone(), matrix)?;
    op.hermitian = hermitian && hermiticity_defect(&op.matrix) <= HERMITIAN_TOL;
    Ok(op)
}

/// Kronecker product over `space` with the listed factors, identity on every
/// subsystem that is not named.
pub fn embed_factors<'a>(
    factors: impl IntoIterator<Item = (&'a str, &'a Array2<C64>)>,
    space: &CompositeSpace,
) -> Result<Array2<C64>> {
    let mut slots: Vec<Option<&Array2<C64>>> = vec![None; space.subsystems().len()];
    for (label, factor) in factors {
        let pos = space.position(label)?;
        let dim = space.subsystems()[pos].dim;
        if factor.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: factor.nrows() });
        }
        slots[pos] = Some(factor);
    }
    let mut out = Array2::from_elem((1, 1), ONE);
    for (slot, sub) in slots.into_iter().zip(space.subsystems()) {
        out = match slot {
            Some(f) => kron(&out, f),
            None => kron(&out, &Array2::<C64>::eye(sub.dim)),
        };
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// States

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Pure(Array1<C64>),
    Mixed(Array2<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: CompositeSpace,
    repr: Representation,
}

impl QuantumState {
    /// Pure state; norm must be one within [`STATE_TOL`].
    pub fn pure(space: CompositeSpace, psi: Array1<C64>) -> Result<Self> {
        let n = space.total_dim();
        if psi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: psi.len() });
        }
        let norm = vector_norm(&psi);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { space, repr: Representation::Pure(psi) })
    }

    pub fn pure_normalized(space: CompositeSpace, psi: Array1<C64>) -> Result<Self> {
        let norm = vector_norm(&psi);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::pure(space, psi.mapv(|z| z / norm))
    }

    /// Density matrix; trace, hermiticity and positivity are checked.
    pub fn mixed(space: CompositeSpace, rho: Array2<C64>) -> Result<Self> {
        let n = space.total_dim();
        if rho.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: rho.nrows() });
        }
        validate_density(&rho)?;
        Ok(Self { space, repr: Representation::Mixed(rho) })
    }

    pub fn basis(space: CompositeSpace, index: usize) -> Result<Self> {
        let n = space.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index });
        }
        let mut psi = Array1::zeros(n);
        psi[index] = ONE;
        Self::pure(space, psi)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Representation::Pure(_))
    }

    pub fn vector(&self) -> Option<&Array1<C64>> {
        match &self.repr {
            Representation::Pure(v) => Some(v),
            Representation::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Array2<C64> {
        match &self.repr {
            Representation::Pure(v) => outer(v, v),
            Representation::Mixed(rho) => rho.clone(),
        }
    }

    /// Tensor product, `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        let mut subs = self.space.subsystems().to_vec();
        subs.extend_from_slice(other.space.subsystems());
        let space: CompositeSpace = subs.try_into()?;
        match (&self.repr, &other.repr) {
            (Representation::Pure(a), Representation::Pure(b)) => {
                let psi = Array1::from_iter(a.iter().flat_map(|x| b.iter().map(move |y| x * y)));
                Self::pure(space, psi)
            }
            _ => Self::mixed(space, kron(&self.density_matrix(), &other.density_matrix())),
        }
    }

    /// `<A>` for an operator on the same space.
    pub fn expectation(&self, op: &Array2<C64>) -> C64 {
        match &self.repr {
            Representation::Pure(v) => {
                let av = op.dot(v);
                v.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum()
            }
            Representation::Mixed(rho) => (0..rho.nrows()).map(|i| op.row(i).dot(&rho.column(i))).sum(),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Representation::Pure(v) => vector_norm(v).powi(2),
            Representation::Mixed(rho) => rho.diag().iter().map(|z| z.re).sum(),
        }
    }
}

pub fn vector_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn outer(a: &Array1<C64>, b: &Array1<C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j].conj())
}

fn validate_density(rho: &Array2<C64>) -> Result<()> {
    let deviation = hermiticity_defect(rho);
    if deviation > STATE_TOL {
        return Err(Error::InvalidState(format!("density matrix not Hermitian ({deviation:e})")));
    }
    let trace: C64 = rho.diag().sum();
    if (trace - ONE).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
    }
    let smallest = rho.eigvalsh(UPLO::Lower)?[0];
    if smallest < -STATE_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {smallest:e}")));
    }
    Ok(())
}

/// Coherent state `|alpha>` in a truncated Fock space, renormalized after
/// truncation.
pub fn coherent_vector(alpha: C64, n_cut: usize) -> Array1<C64> {
    let mut out = Array1::zeros(n_cut);
    let mut coeff = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 0..n_cut {
        if m > 0 {
            coeff *= alpha / (m as f64).sqrt();
        }
        out[m] = coeff;
    }
    let norm = vector_norm(&out);
    out.mapv(|z| z / norm)
}

/// Haar-like random pure state from complex Gaussian amplitudes.
pub fn random_pure_state<R: Rng + ?Sized>(space: CompositeSpace, rng: &mut R) -> Result<QuantumState> {
    let n = space.total_dim();
    let psi = Array1::from_iter((0..n).map(|_| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    }));
    QuantumState::pure_normalized(space, psi)
}

/// Random unitary from the QR-free construction `exp(-i G)` with a random
/// Hermitian generator `G`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Array2<C64>> {
    let mut g = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        g[[i, i]] = C64::new(rng.sample::<f64, _>(StandardNormal), 0.0);
        for j in (i + 1)..dim {
            let z = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
            g[[i, j]] = z;
            g[[j, i]] = z.conj();
        }
    }
    hermitian_exp(&g, 3.0)
}

// ---------------------------------------------------------------------------
// Partial trace

/// Reduced density matrix on `keep`. The result lists the kept subsystems in
/// this space's order, whatever the order of `keep`.
pub fn partial_trace(state: &QuantumState, keep: &[&str]) -> Result<QuantumState> {
    if keep.is_empty() {
        return Err(Error::InvalidSpace("partial trace needs at least one kept label".into()));
    }
    let space = state.space();
    let kept_space = space.subspace(keep)?;
    let positions: Vec<usize> = keep.iter().map(|l| space.position(l)).collect::<Result<_>>()?;
    let (kidx, tidx) = space.split_indices(&positions);
    let dk = kept_space.total_dim();
    let dt = space.total_dim() / dk;

    let rho = match state.representation() {
        Representation::Pure(psi) => {
            let mut m = Array2::<C64>::zeros((dk, dt));
            for (i, z) in psi.iter().enumerate() {
                m[[kidx[i], tidx[i]]] = *z;
            }
            m.dot(&dagger(&m))
        }
        Representation::Mixed(full) => {
            let mut out = Array2::<C64>::zeros((dk, dk));
            let n = space.total_dim();
            for i in 0..n {
                for j in 0..n {
                    if tidx[i] == tidx[j] {
                        out[[kidx[i], kidx[j]]] += full[[i, j]];
                    }
                }
            }
            out
        }
    };
    QuantumState::mixed(kept_space, rho)
}

// ---------------------------------------------------------------------------
// Time evolution

/// Cached eigendecomposition of a Hermitian operator, so `exp(-i H t)` is
/// cheap for many `t`.
#[derive(Clone, Debug)]
pub struct Propagator {
    space: CompositeSpace,
    energies: Array1<f64>,
    // `None` when the generator is diagonal and the basis is the identity.
    vectors: Option<Array2<C64>>,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        h.require_hermitian()?;
        let (energies, vectors) = eigh_or_diag(h.matrix())?;
        Ok(Self { space: h.space().clone(), energies, vectors })
    }

    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    /// `exp(-i H t)` as a dense matrix.
    pub fn unitary(&self, t: f64) -> Array2<C64> {
        let phases = self.energies.mapv(|e| C64::from_polar(1.0, -e * t));
        match &self.vectors {
            None => Array2::from_diag(&phases),
            Some(v) => {
                let mut scaled = v.clone();
                for (mut col, p) in scaled.columns_mut().into_iter().zip(phases.iter()) {
                    col.mapv_inplace(|z| z * p);
                }
                scaled.dot(&dagger(v))
            }
        }
    }

    pub fn apply(&self, t: f64, state: &QuantumState) -> Result<QuantumState> {
        if state.space() != &self.space {
            return Err(Error::InvalidSpace(format!("state on {} vs operator on {}", state.space(), self.space)));
        }
        let phases = self.energies.mapv(|e| C64::from_polar(1.0, -e * t));
        match state.representation() {
            Representation::Pure(psi) => {
                let evolved = match &self.vectors {
                    None => psi * &phases,
                    Some(v) => {
                        let coeffs = dagger(v).dot(psi) * &phases;
                        v.dot(&coeffs)
                    }
                };
                QuantumState::pure(self.space.clone(), evolved)
            }
            Representation::Mixed(rho) => {
                let u = self.unitary(t);
                QuantumState::mixed(self.space.clone(), u.dot(rho).dot(&dagger(&u)))
            }
        }
    }
}

fn eigh_or_diag(m: &Array2<C64>) -> Result<(Array1<f64>, Option<Array2<C64>>)> {
    if is_diagonal(m) {
        return Ok((m.diag().mapv(|z| z.re), None));
    }
    let (e, v) = eigh(m)?;
    Ok((e, Some(v)))
}

/// Eigendecomposition `m = V diag(e) V^dag` of a Hermitian matrix, eigenvalues
/// ascending, eigenvectors in the columns of `V`.
///
/// LAPACK is handed a column-major copy: for row-major input the backend
/// returns the eigenvectors of the transpose, i.e. the complex conjugates.
pub fn eigh(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let mut fortran = Array2::zeros(m.raw_dim().f());
    fortran.assign(m);
    Ok(fortran.eigh(UPLO::Lower)?)
}

/// `exp(-i H t)` for Hermitian `H` via its eigendecomposition.
pub fn hermitian_exp(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let deviation = hermiticity_defect(h);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let space = CompositeSpace::single("generator", h.nrows())?;
    Ok(Propagator::new(&Operator::hermitian(space, h.clone())?)?.unitary(t))
}

/// Applies `exp(-i H t)` to `state`.
pub fn evolve_unitary(h: &Operator, t: f64, state: &QuantumState) -> Result<QuantumState> {
    Propagator::new(h)?.apply(t, state)
}
