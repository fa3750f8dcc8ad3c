//! Syntactic locality audit on term supports.
//!
//! A Hamiltonian is judged in the form it is written in. `H_local` and
//! `H_diagonalized` are unitarily equivalent yet audit differently, because
//! the diagonalized form has a term whose support holds both masses.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{FIELD, MASS1, MASS2};
use crate::model::HamiltonianSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Each mass couples to the mediator and no term touches both masses.
    MediatedLocal,
    /// Some term acts on both masses at once.
    DirectCoupled,
    Decoupled,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::MediatedLocal => "MediatedLocal",
            Verdict::DirectCoupled => "DirectCoupled",
            Verdict::Decoupled => "Decoupled",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffendingTerm {
    pub index: usize,
    pub coefficient: f64,
    pub support: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub offending: Vec<OffendingTerm>,
}

/// Classifies `spec` from its term supports. The mass labels must be in the
/// space; the mediator may be absent, as in a classicalized mass-only model,
/// in which case nothing can couple to it.
pub fn classify(spec: &HamiltonianSpec, masses: [&str; 2], mediator: &str) -> Result<Classification> {
    for label in masses {
        if !spec.space.contains(label) {
            return Err(Error::UnknownLabel(label.to_string()));
        }
    }
    if masses[0] == masses[1] || masses.contains(&mediator) {
        return Err(Error::InvalidParams("mass and mediator labels must be distinct".into()));
    }
    let mut offending = Vec::new();
    let mut mediated = [false, false];
    for (index, term) in spec.terms.iter().enumerate() {
        let support = term.support();
        if masses.iter().all(|m| support.contains(m)) {
            offending.push(OffendingTerm {
                index,
                coefficient: term.coefficient,
                support: ordered_support(spec, &support),
            });
        }
        if support.contains(mediator) {
            for (k, m) in masses.iter().enumerate() {
                mediated[k] |= support.contains(m);
            }
        }
    }
    let verdict = if !offending.is_empty() {
        Verdict::DirectCoupled
    } else if mediated.iter().all(|x| *x) {
        Verdict::MediatedLocal
    } else {
        Verdict::Decoupled
    };
    Ok(Classification { verdict, offending })
}

fn ordered_support(spec: &HamiltonianSpec, support: &BTreeSet<&str>) -> Vec<String> {
    spec.space.labels().filter(|l| support.contains(l)).map(str::to_string).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermRow {
    pub index: usize,
    pub coefficient: f64,
    pub support: Vec<String>,
    pub joint_mass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub space: String,
    pub provenance: String,
    pub classification: Classification,
    pub terms: Vec<TermRow>,
}

impl AuditReport {
    pub fn verdict(&self) -> Verdict {
        self.classification.verdict
    }

    pub fn joint_terms(&self) -> usize {
        self.terms.iter().filter(|t| t.joint_mass).count()
    }

    /// Flat `key=value` pairs for machine consumption.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("space".to_string(), self.space.clone()),
            ("provenance".to_string(), self.provenance.clone()),
            ("verdict".to_string(), self.verdict().to_string()),
            ("terms".to_string(), self.terms.len().to_string()),
            ("joint_mass_terms".to_string(), self.joint_terms().to_string()),
        ];
        for t in &self.classification.offending {
            out.push((format!("offending.{}", t.index), format!("{:e} [{}]", t.coefficient, t.support.join(","))));
        }
        out
    }
}

/// Audits with the canonical labels `Mass1`, `Mass2` and mediator `Field`.
pub fn audit_report(spec: &HamiltonianSpec) -> Result<AuditReport> {
    let classification = classify(spec, [MASS1, MASS2], FIELD)?;
    let terms = spec
        .terms
        .iter()
        .enumerate()
        .map(|(index, term)| {
            let support = term.support();
            TermRow {
                index,
                coefficient: term.coefficient,
                joint_mass: support.contains(MASS1) && support.contains(MASS2),
                support: ordered_support(spec, &support),
            }
        })
        .collect();
    let provenance = serde_plain_name(&spec.provenance);
    Ok(AuditReport { space: spec.space.to_string(), provenance, classification, terms })
}

fn serde_plain_name(p: &crate::model::Provenance) -> String {
    use crate::model::Provenance::*;
    match p {
        Local => "local",
        Diagonalized => "diagonalized",
        ClassicalizedLocal => "classicalized-local",
        ClassicalizedDiagonalized => "classicalized-diagonalized",
        Custom => "custom",
    }
    .to_string()
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "space:      {}", self.space)?;
        writeln!(f, "provenance: {}", self.provenance)?;
        writeln!(f, "verdict:    {}", self.verdict())?;
        writeln!(f)?;
        writeln!(f, "{:>4}  {:>14}  {:<24}  joint-mass", "term", "coefficient", "support")?;
        for t in &self.terms {
            let support = if t.support.is_empty() { "-".to_string() } else { t.support.join(" ⊗ ") };
            writeln!(
                f,
                "{:>4}  {:>14.6e}  {:<24}  {}",
                t.index,
                t.coefficient,
                support,
                if t.joint_mass { "YES" } else { "no" }
            )?;
        }
        if !self.classification.offending.is_empty() {
            writeln!(f)?;
            writeln!(f, "{} term(s) act on both masses directly.", self.classification.offending.len())?;
        }
        Ok(())
    }
}
