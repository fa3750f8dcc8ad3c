//! Entanglement witnesses and truncation diagnostics.
//!
//! Negativity is the primary witness. On the mass-mass cut the reduced state is
//! a 2×2 system, where a positive partial transpose is both necessary and
//! sufficient for separability, so a zero negativity there certifies a
//! separable state.

use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    dagger, eigh, partial_trace, pauli_y, CompositeSpace, QuantumState, Representation, FIELD, MASS1, MASS2,
};

/// Eigenvalues below this are dropped from entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Two disjoint label sets that together cover a state's space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    side_a: Vec<String>,
    side_b: Vec<String>,
}

impl Bipartition {
    pub fn new<S: Into<String>>(side_a: impl IntoIterator<Item = S>, side_b: impl IntoIterator<Item = S>) -> Result<Self> {
        let side_a: Vec<String> = side_a.into_iter().map(Into::into).collect();
        let side_b: Vec<String> = side_b.into_iter().map(Into::into).collect();
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::InvalidSpace("both sides of a bipartition must be non-empty".into()));
        }
        if let Some(l) = side_a.iter().find(|l| side_b.contains(l)) {
            return Err(Error::InvalidSpace(format!("label `{l}` on both sides of the cut")));
        }
        Ok(Self { side_a, side_b })
    }

    /// `Mass1 | Mass2`.
    pub fn masses() -> Self {
        Self::new([MASS1], [MASS2]).expect("static cut is valid")
    }

    pub fn side_a(&self) -> &[String] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[String] {
        &self.side_b
    }

    fn check_covers(&self, space: &CompositeSpace) -> Result<()> {
        for l in self.side_a.iter().chain(&self.side_b) {
            space.position(l)?;
        }
        if self.side_a.len() + self.side_b.len() != space.subsystems().len() {
            return Err(Error::InvalidSpace(format!("cut does not cover {space}")));
        }
        Ok(())
    }
}

/// `rho^{T_A}`: transposes the digits of the `side_a` subsystems.
pub fn partial_transpose(rho: &Array2<C64>, space: &CompositeSpace, side_a: &[&str]) -> Result<Array2<C64>> {
    let n = space.total_dim();
    if rho.dim() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: rho.nrows() });
    }
    let positions: Vec<usize> = side_a.iter().map(|l| space.position(l)).collect::<Result<_>>()?;
    let dims = space.dims();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| space.digits(i)).collect();
    let compose = |d: &[usize]| d.iter().zip(&dims).fold(0, |acc, (x, dim)| acc * dim + x);

    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut di = digits[i].clone();
            let mut dj = digits[j].clone();
            for &p in &positions {
                std::mem::swap(&mut di[p], &mut dj[p]);
            }
            out[[compose(&di), compose(&dj)]] = rho[[i, j]];
        }
    }
    Ok(out)
}

/// `N = (||rho^{T_A}||_1 - tr rho) / 2`, i.e. the total weight of the negative
/// eigenvalues of the partial transpose.
pub fn negativity(rho: &QuantumState, cut: &Bipartition) -> Result<f64> {
    cut.check_covers(rho.space())?;
    let side_a: Vec<&str> = cut.side_a.iter().map(String::as_str).collect();
    let pt = partial_transpose(&rho.density_matrix(), rho.space(), &side_a)?;
    let eigs = pt.eigvalsh(UPLO::Lower)?;
    Ok(eigs.iter().filter(|e| **e < 0.0).map(|e| -e).sum())
}

/// Mass-mass negativity of a state that contains both masses; other subsystems
/// are traced out first.
pub fn mass_negativity(state: &QuantumState) -> Result<f64> {
    let reduced = if state.space().subsystems().len() == 2 {
        state.clone()
    } else {
        partial_trace(state, &[MASS1, MASS2])?
    };
    negativity(&reduced, &Bipartition::masses())
}

/// Base-2 von Neumann entropy of a density matrix.
pub fn von_neumann_entropy(rho: &Array2<C64>) -> Result<f64> {
    let eigs = rho.eigvalsh(UPLO::Lower)?;
    Ok(eigs.iter().filter(|p| **p > ENTROPY_CUTOFF).map(|p| -p * p.log2()).sum())
}

/// Entropy (bits) of the reduced state on `side` of a pure state.
pub fn entanglement_entropy(psi: &QuantumState, side: &[&str]) -> Result<f64> {
    if !psi.is_pure() {
        return Err(Error::InvalidState("entanglement entropy needs a pure state".into()));
    }
    let reduced = partial_trace(psi, side)?;
    von_neumann_entropy(&reduced.density_matrix())
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_two_qubit(rho: &Array2<C64>) -> Result<f64> {
    if rho.dim() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.nrows() });
    }
    let yy = ndarray::linalg::kron(&pauli_y(), &pauli_y());
    let flipped = yy.dot(&rho.mapv(|z| z.conj())).dot(&yy);
    let sqrt_rho = hermitian_sqrt(rho)?;
    let r = sqrt_rho.dot(&flipped).dot(&sqrt_rho);
    let mut s: Vec<f64> = r.eigvalsh(UPLO::Lower)?.iter().map(|m| m.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

fn hermitian_sqrt(m: &Array2<C64>) -> Result<Array2<C64>> {
    let (e, v) = eigh(m)?;
    let roots: Array1<C64> = e.mapv(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let mut scaled = v.clone();
    for (mut col, r) in scaled.columns_mut().into_iter().zip(roots.iter()) {
        col.mapv_inplace(|z| z * r);
    }
    Ok(scaled.dot(&dagger(&v)))
}

/// Population of the `top_k` highest Fock levels of the field marginal.
pub fn fock_tail_population(state: &QuantumState, top_k: usize) -> Result<f64> {
    let space = state.space();
    let pos = space.position(FIELD)?;
    let n_cut = space.subsystems()[pos].dim;
    if top_k >= n_cut {
        return Err(Error::InvalidParams(format!("top_k = {top_k} must be below n_cut = {n_cut}")));
    }
    let in_tail = |i: usize| space.digits(i)[pos] >= n_cut - top_k;
    let total = match state.representation() {
        Representation::Pure(psi) => psi.iter().enumerate().filter(|(i, _)| in_tail(*i)).map(|(_, z)| z.norm_sqr()).sum(),
        Representation::Mixed(rho) => (0..rho.nrows()).filter(|i| in_tail(*i)).map(|i| rho[[i, i]].re).sum(),
    };
    Ok(total)
}
