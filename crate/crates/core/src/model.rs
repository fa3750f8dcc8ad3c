//! Hamiltonians for two branch-superposed masses and one mediator mode.
//!
//! Local form:
//!
//! ```text
//! H = ω a†a + λ n₁ (a + a†) + λ n₂ (a + a†)
//! ```
//!
//! With `S = n₁ + n₂` and `ã = a + (λ/ω) S` the square completes to
//!
//! ```text
//! H = ω ã†ã − (λ²/ω) S² = ω ã†ã − (λ²/ω) n₁ − (λ²/ω) n₂ − (2λ²/ω) n₁ n₂
//! ```
//!
//! using `nᵢ² = nᵢ` for branch projectors. The shift is implemented by the
//! conditional displacement `D = exp[(λ/ω) S (a† − a)]`, for which
//! `D† a D = ã` and therefore `D H_local D† = H_diagonalized` term by term in
//! the untransformed operators. The diagonalized form carries a term acting on
//! both masses at once; the local form never does.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, branch_projector, dagger, eigh, embed_factors, hermitian_exp, number, CompositeSpace, Operator,
    FIELD, MASS1, MASS2,
};

/// Number of top Fock levels treated as the truncation edge.
pub const EDGE_LEVELS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub lambda: f64,
    pub n_cut: usize,
}

impl ModelParams {
    pub fn new(omega: f64, lambda: f64, n_cut: usize) -> Result<Self> {
        let p = Self { omega, lambda, n_cut };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParams(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda must be finite, got {}", self.lambda)));
        }
        if self.n_cut < 2 {
            return Err(Error::InvalidParams(format!("n_cut must be at least 2, got {}", self.n_cut)));
        }
        Ok(())
    }

    /// Displacement per unit mass occupation, `λ/ω`.
    pub fn shift(&self) -> f64 {
        self.lambda / self.omega
    }

    pub fn space(&self) -> Result<CompositeSpace> {
        CompositeSpace::canonical(self.n_cut)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { omega: 1.0, lambda: 0.5, n_cut: 32 }
    }
}

/// Where a [`HamiltonianSpec`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Local,
    Diagonalized,
    ClassicalizedLocal,
    ClassicalizedDiagonalized,
    Custom,
}

/// `coefficient × ⊗ factors`, identity on every subsystem not listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "TermRecord", into = "TermRecord")]
pub struct HamiltonianTerm {
    pub coefficient: f64,
    pub factors: BTreeMap<String, Array2<C64>>,
}

impl HamiltonianTerm {
    pub fn new<'a>(coefficient: f64, factors: impl IntoIterator<Item = (&'a str, Array2<C64>)>) -> Self {
        Self { coefficient, factors: factors.into_iter().map(|(l, m)| (l.to_string(), m)).collect() }
    }

    /// Labels on which the term acts non-trivially. Factors proportional to
    /// the identity do not count, and a zero coefficient has empty support.
    pub fn support(&self) -> BTreeSet<&str> {
        if self.coefficient == 0.0 {
            return BTreeSet::new();
        }
        self.factors
            .iter()
            .filter(|(_, m)| !is_scalar_identity(m))
            .map(|(l, _)| l.as_str())
            .collect()
    }

    pub fn assemble(&self, space: &CompositeSpace) -> Result<Array2<C64>> {
        let m = embed_factors(self.factors.iter().map(|(l, m)| (l.as_str(), m)), space)?;
        Ok(m.mapv(|z| z * self.coefficient))
    }
}

fn is_scalar_identity(m: &Array2<C64>) -> bool {
    let d = m[[0, 0]];
    let scale = d.norm().max(1.0);
    m.indexed_iter().all(|((i, j), z)| {
        let target = if i == j { d } else { C64::new(0.0, 0.0) };
        (z - target).norm() <= 1e-12 * scale
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRecord")]
pub struct HamiltonianSpec {
    pub space: CompositeSpace,
    pub terms: Vec<HamiltonianTerm>,
    pub provenance: Provenance,
}

impl HamiltonianSpec {
    /// Checks factor labels and dimensions and that the sum is Hermitian.
    pub fn new(space: CompositeSpace, terms: Vec<HamiltonianTerm>, provenance: Provenance) -> Result<Self> {
        let spec = Self { space, terms, provenance };
        spec.assemble()?;
        Ok(spec)
    }

    pub fn assemble(&self) -> Result<Operator> {
        let n = self.space.total_dim();
        let mut total = Array2::<C64>::zeros((n, n));
        for term in &self.terms {
            total += &term.assemble(&self.space)?;
        }
        Operator::hermitian(self.space.clone(), total)
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn field_matrices(n_cut: usize) -> Result<(Array2<C64>, Array2<C64>, Array2<C64>)> {
    let a = annihilation(n_cut)?.into_matrix();
    let ad = dagger(&a);
    let num = number(n_cut)?.into_matrix();
    Ok((a, ad, num))
}

fn push_nonzero(terms: &mut Vec<HamiltonianTerm>, term: HamiltonianTerm) {
    if term.coefficient != 0.0 {
        terms.push(term);
    }
}

/// `ω a†a + λ n₁(a + a†) + λ n₂(a + a†)`.
pub fn build_local_hamiltonian(p: &ModelParams) -> Result<HamiltonianSpec> {
    p.validate()?;
    let (a, ad, num) = field_matrices(p.n_cut)?;
    let x = &a + &ad;
    let n = branch_projector();
    let mut terms = vec![HamiltonianTerm::new(p.omega, [(FIELD, num)])];
    push_nonzero(&mut terms, HamiltonianTerm::new(p.lambda, [(MASS1, n.clone()), (FIELD, x.clone())]));
    push_nonzero(&mut terms, HamiltonianTerm::new(p.lambda, [(MASS2, n), (FIELD, x)]));
    HamiltonianSpec::new(p.space()?, terms, Provenance::Local)
}

/// `ω ã†ã − (λ²/ω)(n₁ + n₂)²`, expanded into two single-mass self-energies and
/// the cross term `−(2λ²/ω) n₁ n₂`. The field operator in the first term is
/// the displaced mode, written in its own frame as `a†a`.
pub fn build_diagonalized_hamiltonian(p: &ModelParams) -> Result<HamiltonianSpec> {
    p.validate()?;
    let (_, _, num) = field_matrices(p.n_cut)?;
    let n = branch_projector();
    let self_energy = -p.lambda * p.lambda / p.omega;
    let mut terms = vec![HamiltonianTerm::new(p.omega, [(FIELD, num)])];
    push_nonzero(&mut terms, HamiltonianTerm::new(self_energy, [(MASS1, n.clone())]));
    push_nonzero(&mut terms, HamiltonianTerm::new(self_energy, [(MASS2, n.clone())]));
    push_nonzero(&mut terms, HamiltonianTerm::new(2.0 * self_energy, [(MASS1, n.clone()), (MASS2, n)]));
    HamiltonianSpec::new(p.space()?, terms, Provenance::Diagonalized)
}

/// Coefficient of the `n₁ n₂` term of the diagonalized Hamiltonian.
pub fn cross_coefficient(p: &ModelParams) -> f64 {
    -2.0 * p.lambda * p.lambda / p.omega
}

/// `D = exp[(λ/ω)(n₁ + n₂)(a† − a)]`, computed as `exp(−i G)` for the
/// Hermitian generator `G = i (λ/ω)(n₁ + n₂)(a† − a)`.
pub fn displacement_unitary(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    let space = p.space()?;
    let (a, ad, _) = field_matrices(p.n_cut)?;
    let n = branch_projector();
    let gen_field = (&ad - &a).mapv(|z| z * C64::new(0.0, p.shift()));
    let generator = embed_factors([(MASS1, &n), (FIELD, &gen_field)], &space)?
        + embed_factors([(MASS2, &n), (FIELD, &gen_field)], &space)?;
    Operator::new(space, hermitian_exp(&generator, 1.0)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalizationReport {
    /// Largest `|D H_local D† − H_diagonalized|` entry on the interior block.
    pub max_deviation: f64,
    /// Number of top Fock levels left out of the comparison.
    pub edge_excluded: usize,
}

impl DiagonalizationReport {
    pub fn within(&self, threshold: f64) -> bool {
        self.max_deviation <= threshold
    }
}

/// Fock levels excluded from the interior block by default: the hard edge of
/// [`EDGE_LEVELS`] plus the upper half of the space. Conjugation by `D` mixes
/// a level `m` with a band of width growing like `√m` on either side, so
/// the comparison stays clear of the levels whose band reaches the cutoff.
pub fn default_edge_excluded(n_cut: usize) -> usize {
    (n_cut / 2 + EDGE_LEVELS).min(n_cut - 1)
}

pub fn verify_diagonalization(p: &ModelParams) -> Result<DiagonalizationReport> {
    verify_diagonalization_with(p, default_edge_excluded(p.n_cut))
}

/// Compares `D H_local D†` with the diagonalized Hamiltonian entrywise on rows
/// and columns whose Fock level is below `n_cut − edge_excluded`.
pub fn verify_diagonalization_with(p: &ModelParams, edge_excluded: usize) -> Result<DiagonalizationReport> {
    p.validate()?;
    if edge_excluded >= p.n_cut {
        return Err(Error::InvalidParams(format!(
            "edge_excluded = {edge_excluded} leaves no interior block at n_cut = {}",
            p.n_cut
        )));
    }
    let d = displacement_unitary(p)?.into_matrix();
    let local = build_local_hamiltonian(p)?.assemble()?.into_matrix();
    let diag = build_diagonalized_hamiltonian(p)?.assemble()?.into_matrix();
    let transformed = d.dot(&local).dot(&dagger(&d));

    let space = p.space()?;
    let field = space.position(FIELD)?;
    let interior: Vec<usize> =
        (0..space.total_dim()).filter(|&i| space.digits(i)[field] < p.n_cut - edge_excluded).collect();
    let mut max_deviation = 0.0f64;
    for &i in &interior {
        for &j in &interior {
            max_deviation = max_deviation.max((transformed[[i, j]] - diag[[i, j]]).norm());
        }
    }
    Ok(DiagonalizationReport { max_deviation, edge_excluded })
}

/// Eigenvalues (ascending) of the eigenvectors whose population on the top
/// [`EDGE_LEVELS`] Fock levels is below `tail_tol`. Eigenvectors with more
/// weight there are truncation artefacts rather than interior states.
pub fn interior_spectrum(op: &Operator, tail_tol: f64) -> Result<Vec<f64>> {
    let space = op.space();
    let field = space.position(FIELD)?;
    let n_cut = space.subsystems()[field].dim;
    if n_cut <= EDGE_LEVELS {
        return Err(Error::InvalidParams(format!("n_cut = {n_cut} has no interior")));
    }
    let (energies, vectors) = eigh(op.matrix())?;
    let tail_rows: Vec<usize> =
        (0..space.total_dim()).filter(|&i| space.digits(i)[field] >= n_cut - EDGE_LEVELS).collect();
    Ok(energies
        .iter()
        .enumerate()
        .filter(|(k, _)| tail_rows.iter().map(|&i| vectors[[i, *k]].norm_sqr()).sum::<f64>() < tail_tol)
        .map(|(_, e)| *e)
        .collect())
}

/// Field factors that [`classicalize`] knows how to replace by numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldPolynomial {
    Identity,
    Lowering,
    Raising,
    Position,
    Number,
}

impl FieldPolynomial {
    const ALL: [FieldPolynomial; 5] = [Self::Identity, Self::Lowering, Self::Raising, Self::Position, Self::Number];

    fn matrix(self, n_cut: usize) -> Result<Array2<C64>> {
        let (a, ad, num) = field_matrices(n_cut)?;
        Ok(match self {
            Self::Identity => Array2::eye(n_cut),
            Self::Lowering => a,
            Self::Raising => ad,
            Self::Position => &a + &ad,
            Self::Number => num,
        })
    }

    /// Value after `a → α`, `a† → α*`.
    pub fn substitute(self, alpha: C64) -> C64 {
        match self {
            Self::Identity => c(1.0),
            Self::Lowering => alpha,
            Self::Raising => alpha.conj(),
            Self::Position => alpha + alpha.conj(),
            Self::Number => c(alpha.norm_sqr()),
        }
    }

    /// Finds `(p, s)` with `m = s · p`, if any.
    pub fn recognize(m: &Array2<C64>) -> Result<Option<(Self, C64)>> {
        let n = m.nrows();
        for poly in Self::ALL {
            let w = poly.matrix(n)?;
            let (pivot, _) = w
                .indexed_iter()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("non-empty matrix");
            let scale = m[pivot] / w[pivot];
            let tol = 1e-12 * scale.norm().max(1.0);
            if m.iter().zip(w.iter()).all(|(x, y)| (x - scale * y).norm() <= tol) {
                return Ok(Some((poly, scale)));
            }
        }
        Ok(None)
    }
}

/// Replaces the mediator by a classical amplitude: `a → α`, `a† → α*` in every
/// field factor. Returns the induced Hamiltonian on the remaining subsystems
/// and the pure-number part (terms left with no operator content).
pub fn classicalize(spec: &HamiltonianSpec, alpha: C64) -> Result<(HamiltonianSpec, f64)> {
    let mass_space = spec.space.without(&[FIELD])?;
    let mut terms = Vec::new();
    let mut scalar = c(0.0);
    for (index, term) in spec.terms.iter().enumerate() {
        let mut factors = term.factors.clone();
        let mut value = c(1.0);
        if let Some(field_factor) = factors.remove(FIELD) {
            let (poly, scale) = FieldPolynomial::recognize(&field_factor)?.ok_or_else(|| {
                Error::UnrecognizedFieldFactor {
                    term: index,
                    reason: "not a multiple of 1, a, a†, a + a† or a†a".into(),
                }
            })?;
            value = scale * poly.substitute(alpha);
        }
        if factors.is_empty() {
            scalar += value * term.coefficient;
            continue;
        }
        if value == c(0.0) || term.coefficient == 0.0 {
            continue;
        }
        // Real part goes into the coefficient; a complex phase rides on the
        // first remaining factor so the coefficient stays real.
        let magnitude = value.norm();
        let phase = value / magnitude;
        let (coefficient, phase) = if phase.im.abs() <= 1e-15 {
            (term.coefficient * value.re, c(1.0))
        } else {
            (term.coefficient * magnitude, phase)
        };
        if phase != c(1.0) {
            let first = factors.values_mut().next().expect("non-empty");
            first.mapv_inplace(|z| z * phase);
        }
        terms.push(HamiltonianTerm { coefficient, factors });
    }
    if scalar.im.abs() > 1e-12 * scalar.norm().max(1.0) {
        return Err(Error::NumericalGuard {
            guard: "classicalize",
            detail: format!("scalar part {scalar} is not real"),
        });
    }
    let provenance = match spec.provenance {
        Provenance::Local => Provenance::ClassicalizedLocal,
        Provenance::Diagonalized => Provenance::ClassicalizedDiagonalized,
        _ => Provenance::Custom,
    };
    Ok((HamiltonianSpec::new(mass_space, terms, provenance)?, scalar.re))
}

#[derive(Deserialize)]
struct SpecRecord {
    space: CompositeSpace,
    terms: Vec<HamiltonianTerm>,
    provenance: Provenance,
}

impl TryFrom<SpecRecord> for HamiltonianSpec {
    type Error = Error;

    fn try_from(r: SpecRecord) -> Result<Self> {
        for (index, term) in r.terms.iter().enumerate() {
            for (label, m) in &term.factors {
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidData(format!("term {index}: factor {label} is ragged or not finite")));
                }
            }
        }
        HamiltonianSpec::new(r.space, r.terms, r.provenance)
    }
}

// ---------------------------------------------------------------------------
// Serialized form of a term: labels → nested [re, im] rows.

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coefficient: f64,
    factors: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl From<HamiltonianTerm> for TermRecord {
    fn from(t: HamiltonianTerm) -> Self {
        let factors = t
            .factors
            .into_iter()
            .map(|(l, m)| (l, m.rows().into_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()))
            .collect();
        Self { coefficient: t.coefficient, factors }
    }
}

impl From<TermRecord> for HamiltonianTerm {
    fn from(r: TermRecord) -> Self {
        let factors = r
            .factors
            .into_iter()
            .map(|(l, rows)| {
                let n = rows.len();
                let m = Array2::from_shape_fn((n, n), |(i, j)| {
                    rows[i].get(j).map(|[re, im]| C64::new(*re, *im)).unwrap_or(C64::new(f64::NAN, 0.0))
                });
                (l, m)
            })
            .collect();
        Self { coefficient: r.coefficient, factors }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HERMITIAN_TOL;

    fn params(omega: f64, lambda: f64, n_cut: usize) -> ModelParams {
        ModelParams::new(omega, lambda, n_cut).unwrap()
    }

    /// `E(s, m) = m ω − λ² s² / ω` with degeneracies 1, 2, 1 for s = 0, 1, 2.
    fn closed_form(p: &ModelParams, max_m: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (s, deg) in [(0.0, 1), (1.0, 2), (2.0, 1)] {
            for m in 0..=max_m {
                for _ in 0..deg {
                    out.push(m as f64 * p.omega - p.lambda * p.lambda * s * s / p.omega);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 0.5, 8).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 8).is_err());
        assert!(ModelParams::new(1.0, 0.5, 1).is_err());
    }

    #[test]
    fn decoupled_local_spectrum() {
        let p = params(1.3, 0.0, 6);
        let h = build_local_hamiltonian(&p).unwrap();
        assert_eq!(h.terms.len(), 1);
        let e = h.assemble().unwrap().eigenvalues().unwrap();
        for (k, chunk) in e.chunks(4).enumerate() {
            for x in chunk {
                assert!((x - k as f64 * 1.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn local_ground_state_energy() {
        let p = params(1.0, 0.5, 32);
        let e = build_local_hamiltonian(&p).unwrap().assemble().unwrap().eigenvalues().unwrap();
        assert!((e[0] + 1.0).abs() < 1e-10, "{}", e[0]);
    }

    #[test]
    fn local_spectrum_matches_displaced_oscillator() {
        for (omega, lambda) in [(1.0, 0.25), (1.0, 0.5), (2.0, 0.5)] {
            let p = params(omega, lambda, 64);
            let e = build_local_hamiltonian(&p).unwrap().assemble().unwrap().eigenvalues().unwrap();
            let max_m = p.n_cut / 2;
            let expected = closed_form(&p, max_m + 2);
            let limit = max_m as f64 * omega - 4.0 * lambda * lambda / omega + 1e-9;
            let wanted: Vec<f64> = expected.iter().copied().filter(|x| *x <= limit).collect();
            for (x, y) in e.iter().zip(&wanted) {
                assert!((x - y).abs() < 1e-8, "omega={omega} lambda={lambda}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn diagonalized_terms() {
        let p = params(1.0, 0.5, 8);
        let h = build_diagonalized_hamiltonian(&p).unwrap();
        assert_eq!(h.terms.len(), 4);
        let cross: Vec<_> = h.terms.iter().filter(|t| t.support().len() == 2).collect();
        assert_eq!(cross.len(), 1);
        assert!((cross[0].coefficient - (-0.5)).abs() < 1e-15);
        assert_eq!(cross_coefficient(&p), -0.5);

        let free = build_diagonalized_hamiltonian(&params(1.0, 0.0, 8)).unwrap();
        assert_eq!(free.terms.len(), 1);
        assert_eq!(free.terms[0].support(), BTreeSet::from([FIELD]));
    }

    #[test]
    fn isospectral_on_interior_states() {
        for lambda in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let p = params(1.0, lambda, 32);
            let local = build_local_hamiltonian(&p).unwrap().assemble().unwrap();
            let diag = build_diagonalized_hamiltonian(&p).unwrap().assemble().unwrap();
            let a = interior_spectrum(&local, 1e-10).unwrap();
            let b = diag.eigenvalues().unwrap();
            assert!(a.len() >= 40, "lambda={lambda}: only {} interior states", a.len());
            // every interior eigenvalue of the local form sits on a distinct
            // eigenvalue of the diagonalized form
            let mut used = vec![false; b.len()];
            for x in &a {
                let k = (0..b.len())
                    .filter(|k| !used[*k])
                    .min_by(|i, j| (b[*i] - x).abs().total_cmp(&(b[*j] - x).abs()))
                    .unwrap();
                assert!((b[k] - x).abs() < 1e-6, "lambda={lambda}: {x} vs {}", b[k]);
                used[k] = true;
            }
        }
    }

    #[test]
    fn displacement_limits() {
        let zero = displacement_unitary(&params(1.0, 0.0, 10)).unwrap();
        assert_eq!(zero.matrix(), &Array2::<C64>::eye(40));

        let p = params(1.0, 0.5, 32);
        let d = displacement_unitary(&p).unwrap().into_matrix();
        let unit = d.dot(&dagger(&d));
        assert!((&unit - &Array2::<C64>::eye(128)).iter().all(|z| z.norm() < 1e-10));
        // n1 = n2 = 0 block: rows/cols 0..32 are the identity
        for i in 0..32 {
            for j in 0..32 {
                let e = if i == j { c(1.0) } else { c(0.0) };
                assert!((d[[i, j]] - e).norm() < 1e-12);
            }
        }
        // n1 = n2 = 1 block starts at 96; coherent amplitude 2 λ / ω = 1
        let overlap = d[[96, 96]].norm();
        assert!((overlap - (-0.5f64).exp()).abs() < 1e-12, "{overlap}");
    }

    #[test]
    fn diagonalization_identity() {
        let r0 = verify_diagonalization(&params(1.0, 0.0, 16)).unwrap();
        assert_eq!(r0.max_deviation, 0.0);

        let r = verify_diagonalization(&params(1.0, 0.5, 32)).unwrap();
        assert_eq!(r.edge_excluded, 20);
        assert!(r.within(1e-8), "{}", r.max_deviation);

        let devs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| verify_diagonalization(&params(1.0, 0.5, n)).unwrap().max_deviation)
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");

        assert!(verify_diagonalization_with(&params(1.0, 0.5, 8), 8).is_err());
        // too narrow a margin reports a large deviation instead of failing
        let edge = verify_diagonalization_with(&params(1.0, 0.5, 32), EDGE_LEVELS).unwrap();
        assert!(!edge.within(1e-8));
    }

    #[test]
    fn classicalize_local() {
        let p = params(1.0, 0.5, 8);
        let local = build_local_hamiltonian(&p).unwrap();
        let (mass, scalar) = classicalize(&local, c(1.0)).unwrap();
        assert_eq!(mass.provenance, Provenance::ClassicalizedLocal);
        assert_eq!(mass.space, CompositeSpace::masses());
        assert!((scalar - 1.0).abs() < 1e-15);
        let h = mass.assemble().unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((h.matrix()[[i, i]] - c(*e)).norm() < 1e-14);
        }

        let (imag, scalar) = classicalize(&local, C64::new(0.0, 1.0)).unwrap();
        assert!(imag.assemble().unwrap().matrix().iter().all(|z| z.norm() == 0.0));
        assert!((scalar - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classicalize_keeps_cross_term() {
        let p = params(1.0, 0.5, 8);
        let diag = build_diagonalized_hamiltonian(&p).unwrap();
        for alpha in [c(0.0), c(2.0), C64::new(-0.3, 1.7)] {
            let (mass, scalar) = classicalize(&diag, alpha).unwrap();
            assert_eq!(mass.provenance, Provenance::ClassicalizedDiagonalized);
            let cross: Vec<_> = mass.terms.iter().filter(|t| t.support().len() == 2).collect();
            assert_eq!(cross.len(), 1);
            assert_eq!(cross[0].coefficient, -0.5);
            assert!((scalar - alpha.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn classicalize_complex_and_rejects_unknown() {
        let p = params(1.0, 0.5, 6);
        let (a, ad, _) = field_matrices(6).unwrap();
        let n = branch_projector();
        let spec = HamiltonianSpec::new(
            p.space().unwrap(),
            vec![
                HamiltonianTerm::new(0.7, [(MASS1, n.clone()), (FIELD, a.clone())]),
                HamiltonianTerm::new(0.7, [(MASS1, n.clone()), (FIELD, ad)]),
            ],
            Provenance::Custom,
        )
        .unwrap();
        let alpha = C64::new(0.4, -1.1);
        let (mass, _) = classicalize(&spec, alpha).unwrap();
        let h = mass.assemble().unwrap();
        assert!((h.matrix()[[2, 2]] - c(0.7 * 2.0 * 0.4)).norm() < 1e-14);

        let squeezed = a.dot(&a);
        let bad = HamiltonianSpec {
            space: p.space().unwrap(),
            terms: vec![HamiltonianTerm::new(1.0, [(FIELD, squeezed)])],
            provenance: Provenance::Custom,
        };
        assert!(matches!(classicalize(&bad, c(1.0)), Err(Error::UnrecognizedFieldFactor { term: 0, .. })));
    }

    #[test]
    fn every_builder_is_hermitian() {
        for lambda in [-0.7, 0.0, 0.3, 1.0] {
            let p = params(0.8, lambda, 12);
            for spec in [build_local_hamiltonian(&p).unwrap(), build_diagonalized_hamiltonian(&p).unwrap()] {
                let h = spec.assemble().unwrap();
                assert!(crate::hilbert::hermiticity_defect(h.matrix()) <= HERMITIAN_TOL);
            }
        }
    }

    #[test]
    fn support_ignores_identity_factors() {
        let t = HamiltonianTerm::new(2.0, [(MASS1, Array2::eye(2).mapv(|z: C64| z * 3.0)), (FIELD, number(3).unwrap().into_matrix())]);
        assert_eq!(t.support(), BTreeSet::from([FIELD]));
        let z = HamiltonianTerm::new(0.0, [(MASS1, branch_projector())]);
        assert!(z.support().is_empty());
    }
}
