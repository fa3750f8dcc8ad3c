//! Time evolution of the two masses under a quantum, classical, mean-field or
//! repeatedly measured mediator.
//!
//! Every run samples at `t_k = k · t_max / n_steps`, `k = 0..=n_steps`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    branch_projector, coherent_vector, dagger, eigh, embed_factors, hermitian_exp, partial_trace, quadrature,
    vector_norm, CompositeSpace, Propagator, QuantumState, FIELD, MASS1, MASS2,
};
use crate::metrics::{entanglement_entropy, fock_tail_population, mass_negativity};
use crate::model::{
    build_diagonalized_hamiltonian, build_local_hamiltonian, classicalize, ModelParams, EDGE_LEVELS,
};

/// Largest population allowed on the top [`EDGE_LEVELS`] Fock levels.
pub const TRUNCATION_TOL: f64 = 1e-8;
/// Largest allowed `|‖ψ‖ − 1|` in the mean-field integrator.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Largest `ω · dt` accepted by the measured-mediator run.
pub const MAX_OMEGA_DT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    QuantumLocal,
    ClassicalLocal,
    ClassicalNonlocal,
    MeanFieldLocal,
    MeasuredMediator,
}

/// How a classical amplitude moves once the field operators are replaced by
/// numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryRule {
    /// `α(t) = α₀ e^{−iωt}`.
    FreeRotation,
    /// Ehrenfest feedback from the masses.
    MeanField,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldInit {
    Vacuum,
    Coherent { re: f64, im: f64 },
}

/// Basis in which the mediator is dephased after every step of the measured
/// run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingBasis {
    /// Eigenbasis of `X = (a + a†)/√2`, the quadrature the masses couple to.
    Quadrature,
    Fock,
    Disabled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub regime: Regime,
    pub t_max: f64,
    pub n_steps: usize,
    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩` of the two masses.
    pub mass_init: Array1<C64>,
    pub field_init: FieldInit,
    /// Initial classical amplitude for the classical and mean-field regimes.
    pub alpha0: C64,
    pub field_rule: TrajectoryRule,
    pub dephasing: DephasingBasis,
}

/// `|+⟩ ⊗ |+⟩`.
pub fn plus_plus() -> Array1<C64> {
    Array1::from_elem(4, C64::new(0.5, 0.0))
}

impl EvolutionConfig {
    pub fn new(regime: Regime, t_max: f64, n_steps: usize) -> Self {
        Self {
            regime,
            t_max,
            n_steps,
            mass_init: plus_plus(),
            field_init: FieldInit::Vacuum,
            alpha0: C64::new(0.0, 0.0),
            field_rule: TrajectoryRule::FreeRotation,
            dephasing: DephasingBasis::Quadrature,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidConfig(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidConfig("n_steps must be at least 1".into()));
        }
        if self.mass_init.len() != 4 {
            return Err(Error::InvalidConfig(format!("mass state needs 4 amplitudes, got {}", self.mass_init.len())));
        }
        let norm = vector_norm(&self.mass_init);
        if (norm - 1.0).abs() > crate::hilbert::STATE_TOL {
            return Err(Error::InvalidConfig(format!("mass state norm {norm} differs from 1")));
        }
        if !(self.alpha0.re.is_finite() && self.alpha0.im.is_finite()) {
            return Err(Error::InvalidConfig("alpha0 must be finite".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.t_max / self.n_steps as f64).collect()
    }

    fn expect(&self, regime: Regime) -> Result<()> {
        self.validate()?;
        if self.regime != regime {
            return Err(Error::InvalidConfig(format!("expected regime {regime:?}, got {:?}", self.regime)));
        }
        Ok(())
    }

    fn mass_state(&self) -> Result<QuantumState> {
        QuantumState::pure(CompositeSpace::masses(), self.mass_init.clone())
    }

    fn initial_state(&self, n_cut: usize) -> Result<QuantumState> {
        let field = match self.field_init {
            FieldInit::Vacuum => coherent_vector(C64::new(0.0, 0.0), n_cut),
            FieldInit::Coherent { re, im } => coherent_vector(C64::new(re, im), n_cut),
        };
        let field = QuantumState::pure(CompositeSpace::single(FIELD, n_cut)?, field)?;
        self.mass_state()?.tensor(&field)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalFieldTrajectory {
    samples: Vec<(f64, C64)>,
    rule: TrajectoryRule,
}

impl ClassicalFieldTrajectory {
    /// Times must start at 0 and increase strictly.
    pub fn new(samples: Vec<(f64, C64)>, rule: TrajectoryRule) -> Result<Self> {
        match samples.first() {
            Some((t, _)) if *t == 0.0 => {}
            _ => return Err(Error::InvalidData("trajectory must start at t = 0".into())),
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidData("trajectory times must increase strictly".into()));
        }
        Ok(Self { samples, rule })
    }

    pub fn samples(&self) -> &[(f64, C64)] {
        &self.samples
    }

    pub fn rule(&self) -> TrajectoryRule {
        self.rule
    }
}

/// One sample of a run. `masses` is the reduced state of the two masses.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub masses: QuantumState,
    pub negativity: f64,
    pub entropy_masses_vs_field: Option<f64>,
    pub fock_tail: Option<f64>,
    pub alpha: Option<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub regime: Regime,
    pub samples: Vec<Sample>,
    pub field: Option<ClassicalFieldTrajectory>,
    /// Full mass-and-field states, kept by the quantum-local run only.
    pub states: Option<Vec<QuantumState>>,
}

impl Trajectory {
    pub fn max_negativity(&self) -> f64 {
        self.samples.iter().map(|s| s.negativity).fold(0.0, f64::max)
    }

    pub fn negativities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.negativity).collect()
    }
}

pub fn run(p: &ModelParams, cfg: &EvolutionConfig) -> Result<Trajectory> {
    match cfg.regime {
        Regime::QuantumLocal => run_quantum_local(p, cfg),
        Regime::ClassicalLocal => run_classical_local(p, cfg),
        Regime::ClassicalNonlocal => run_classical_nonlocal(p, cfg),
        Regime::MeanFieldLocal => run_meanfield_local(p, cfg),
        Regime::MeasuredMediator => run_measured_mediator(p, cfg),
    }
}

fn truncation_guard(state: &QuantumState, t: f64) -> Result<f64> {
    let population = fock_tail_population(state, EDGE_LEVELS)?;
    if population >= TRUNCATION_TOL {
        return Err(Error::TruncationOverflow { population, top_k: EDGE_LEVELS, time: t });
    }
    Ok(population)
}

fn mass_sample(t: f64, masses: QuantumState) -> Result<Sample> {
    let negativity = mass_negativity(&masses)?;
    Ok(Sample { t, masses, negativity, entropy_masses_vs_field: None, fock_tail: None, alpha: None })
}

/// Exact evolution under the local Hamiltonian from its eigendecomposition.
pub fn run_quantum_local(p: &ModelParams, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.expect(Regime::QuantumLocal)?;
    p.validate()?;
    let propagator = Propagator::new(&build_local_hamiltonian(p)?.assemble()?)?;
    let psi0 = cfg.initial_state(p.n_cut)?;
    let mut samples = Vec::with_capacity(cfg.n_steps + 1);
    let mut states = Vec::with_capacity(cfg.n_steps + 1);
    for t in cfg.times() {
        let psi = propagator.apply(t, &psi0)?;
        let tail = truncation_guard(&psi, t)?;
        let mut sample = mass_sample(t, partial_trace(&psi, &[MASS1, MASS2])?)?;
        sample.entropy_masses_vs_field = Some(entanglement_entropy(&psi, &[MASS1, MASS2])?);
        sample.fock_tail = Some(tail);
        samples.push(sample);
        states.push(psi);
    }
    Ok(Trajectory { regime: Regime::QuantumLocal, samples, field: None, states: Some(states) })
}

fn classical_amplitude(rule: TrajectoryRule, alpha0: C64, omega: f64, t: f64) -> Result<C64> {
    match rule {
        TrajectoryRule::FreeRotation => Ok(alpha0 * C64::from_polar(1.0, -omega * t)),
        TrajectoryRule::Constant => Ok(alpha0),
        TrajectoryRule::MeanField => {
            Err(Error::InvalidConfig("mean-field amplitudes come from the mean-field run".into()))
        }
    }
}

/// Masses driven by a prescribed classical amplitude through the local
/// coupling. Each step uses the amplitude at the step midpoint.
pub fn run_classical_local(p: &ModelParams, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.expect(Regime::ClassicalLocal)?;
    p.validate()?;
    let spec = build_local_hamiltonian(p)?;
    let dt = cfg.dt();
    let mut psi = cfg.mass_state()?;
    let mut samples = Vec::with_capacity(cfg.n_steps + 1);
    let mut field = Vec::with_capacity(cfg.n_steps + 1);
    let times = cfg.times();
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let mid = times[k - 1] + 0.5 * dt;
            let alpha = classical_amplitude(cfg.field_rule, cfg.alpha0, p.omega, mid)?;
            // the scalar part is a global phase
            let (mass_h, _) = classicalize(&spec, alpha)?;
            let u = hermitian_exp(mass_h.assemble()?.matrix(), dt)?;
            let next = u.dot(psi.vector().expect("pure"));
            psi = QuantumState::pure(CompositeSpace::masses(), next)?;
        }
        let alpha = classical_amplitude(cfg.field_rule, cfg.alpha0, p.omega, t)?;
        let mut sample = mass_sample(t, psi.clone())?;
        sample.alpha = Some(alpha);
        samples.push(sample);
        field.push((t, alpha));
    }
    Ok(Trajectory {
        regime: Regime::ClassicalLocal,
        samples,
        field: Some(ClassicalFieldTrajectory::new(field, cfg.field_rule)?),
        states: None,
    })
}

/// Masses under the diagonalized Hamiltonian with the field replaced by a
/// number. The field only contributes `ω|α|²`, a global phase, so the mass
/// evolution is time-independent and exact.
pub fn run_classical_nonlocal(p: &ModelParams, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.expect(Regime::ClassicalNonlocal)?;
    p.validate()?;
    let rule = match cfg.field_rule {
        TrajectoryRule::MeanField => TrajectoryRule::FreeRotation,
        r => r,
    };
    let (mass_h, _) = classicalize(&build_diagonalized_hamiltonian(p)?, cfg.alpha0)?;
    let propagator = Propagator::new(&mass_h.assemble()?)?;
    let psi0 = cfg.mass_state()?;
    let mut samples = Vec::with_capacity(cfg.n_steps + 1);
    let mut field = Vec::with_capacity(cfg.n_steps + 1);
    for t in cfg.times() {
        let alpha = classical_amplitude(rule, cfg.alpha0, p.omega, t)?;
        let mut sample = mass_sample(t, propagator.apply(t, &psi0)?)?;
        sample.alpha = Some(alpha);
        samples.push(sample);
        field.push((t, alpha));
    }
    Ok(Trajectory {
        regime: Regime::ClassicalNonlocal,
        samples,
        field: Some(ClassicalFieldTrajectory::new(field, rule)?),
        states: None,
    })
}

/// Mass state after the accumulated branch phase `φ`:
/// `exp(−iφ n₁) ⊗ exp(−iφ n₂) ψ₀`.
fn phased(psi0: &Array1<C64>, phi: f64) -> Array1<C64> {
    let r = C64::from_polar(1.0, -phi);
    Array1::from_iter(psi0.iter().enumerate().map(|(i, z)| {
        let occupied = (i >> 1) + (i & 1);
        z * r.powi(occupied as i32)
    }))
}

/// Classical amplitude with Ehrenfest feedback,
///
/// ```text
/// dα/dt = −iωα − iλ⟨n₁ + n₂⟩,   H_masses(t) = λ(α + α*)(n₁ + n₂),
/// ```
///
/// integrated with classic fixed-step RK4 on `(e^{iωt} α, φ)`, where `φ` is the
/// branch phase `∫ λ(α + α*) dt` each mass picks up per unit occupation.
/// Carrying the phase instead of the four mass amplitudes keeps the propagator
/// an exact product of single-mass rotations.
pub fn run_meanfield_local(p: &ModelParams, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.expect(Regime::MeanFieldLocal)?;
    p.validate()?;
    let psi0 = cfg.mass_init.clone();
    let s_diag = [0.0, 1.0, 1.0, 2.0];
    let mean_s = |phi: f64| -> f64 {
        phased(&psi0, phi).iter().zip(s_diag).map(|(z, s)| z.norm_sqr() * s).sum()
    };
    let (omega, lambda) = (p.omega, p.lambda);
    let rotation = |t: f64| C64::from_polar(1.0, -omega * t);
    // β = e^{iωt} α, so the free rotation is carried exactly
    let rhs = |t: f64, beta: C64, phi: f64| -> (C64, f64) {
        let d_beta = C64::new(0.0, -lambda * mean_s(phi)) / rotation(t);
        (d_beta, 2.0 * lambda * (rotation(t) * beta).re)
    };

    let dt = cfg.dt();
    let mut beta = cfg.alpha0;
    let mut phi = 0.0f64;
    let mut samples = Vec::with_capacity(cfg.n_steps + 1);
    let mut field = Vec::with_capacity(cfg.n_steps + 1);
    let times = cfg.times();
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let t0 = times[k - 1];
            let (b1, p1) = rhs(t0, beta, phi);
            let (b2, p2) = rhs(t0 + dt / 2.0, beta + b1 * (dt / 2.0), phi + p1 * dt / 2.0);
            let (b3, p3) = rhs(t0 + dt / 2.0, beta + b2 * (dt / 2.0), phi + p2 * dt / 2.0);
            let (b4, p4) = rhs(t0 + dt, beta + b3 * dt, phi + p3 * dt);
            beta += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (dt / 6.0);
            phi += (p1 + 2.0 * p2 + 2.0 * p3 + p4) * dt / 6.0;
        }
        let alpha = rotation(t) * beta;
        let psi = phased(&psi0, phi);
        let drift = (vector_norm(&psi) - 1.0).abs();
        if !(drift <= NORM_DRIFT_TOL) || !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::NumericalGuard {
                guard: "norm drift",
                detail: format!("|‖ψ‖ − 1| = {drift:e}, α = {alpha} at t = {t}"),
            });
        }
        let mut sample = mass_sample(t, QuantumState::pure(CompositeSpace::masses(), psi)?)?;
        sample.alpha = Some(alpha);
        samples.push(sample);
        field.push((t, alpha));
    }
    Ok(Trajectory {
        regime: Regime::MeanFieldLocal,
        samples,
        field: Some(ClassicalFieldTrajectory::new(field, TrajectoryRule::MeanField)?),
        states: None,
    })
}

/// Exact step `exp(−i H_local dt)` on the full density matrix, then the field
/// is dephased in the configured basis, erasing every coherence between
/// distinct mediator outcomes. The truncation guard applies to the Fock and
/// disabled variants; quadrature eigenvectors of a truncated mode reach the
/// top Fock levels by construction, so for that basis the tail is reported
/// but not enforced.
///
/// `H_local` conserves `n₁` and `n₂`, so the density matrix is held as 4×4
/// field blocks `ρ_{mm'}` over the mass basis and each step maps
/// `ρ_{mm'} → U_m ρ_{mm'} U_{m'}†`. After dephasing every block is diagonal in
/// the measurement basis.
pub fn run_measured_mediator(p: &ModelParams, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.expect(Regime::MeasuredMediator)?;
    p.validate()?;
    let dt = cfg.dt();
    if p.omega * dt > MAX_OMEGA_DT * (1.0 + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "omega * dt = {:.4} exceeds {MAX_OMEGA_DT}; raise n_steps",
            p.omega * dt
        )));
    }
    let n_cut = p.n_cut;
    let h = build_local_hamiltonian(p)?.assemble()?.into_matrix();
    let block = |m: usize, k: usize| h.slice(ndarray::s![m * n_cut..(m + 1) * n_cut, k * n_cut..(k + 1) * n_cut]);
    for m in 0..4 {
        for k in (0..4).filter(|k| *k != m) {
            if block(m, k).iter().any(|z| z.norm() != 0.0) {
                return Err(Error::NumericalGuard {
                    guard: "mass conservation",
                    detail: format!("local Hamiltonian couples mass states {m} and {k}"),
                });
            }
        }
    }

    // columns of W: measurement basis in Fock coordinates
    let w = match cfg.dephasing {
        DephasingBasis::Quadrature => eigh(quadrature(n_cut)?.matrix())?.1,
        DephasingBasis::Fock | DephasingBasis::Disabled => Array2::eye(n_cut),
    };
    let w_dag = dagger(&w);
    let steps: Vec<Array2<C64>> = (0..4)
        .map(|m| Ok(w_dag.dot(&hermitian_exp(&block(m, m).to_owned(), dt)?).dot(&w)))
        .collect::<Result<_>>()?;
    let steps_dag: Vec<Array2<C64>> = steps.iter().map(dagger).collect();
    let tail_weight: Array1<f64> = Array1::from_iter(
        (0..n_cut).map(|x| (n_cut - EDGE_LEVELS..n_cut).map(|i| w[[i, x]].norm_sqr()).sum::<f64>()),
    );

    let field0 = match cfg.field_init {
        FieldInit::Vacuum => coherent_vector(C64::new(0.0, 0.0), n_cut),
        FieldInit::Coherent { re, im } => coherent_vector(C64::new(re, im), n_cut),
    };
    let phi = w_dag.dot(&field0);
    let phi_outer = Array2::from_shape_fn((n_cut, n_cut), |(i, j)| phi[i] * phi[j].conj());
    let c = &cfg.mass_init;
    let mut blocks: Vec<Vec<Array2<C64>>> =
        (0..4).map(|m| (0..4).map(|k| phi_outer.mapv(|z| z * c[m] * c[k].conj())).collect()).collect();
    let mut diagonal = false;

    let mut samples = Vec::with_capacity(cfg.n_steps + 1);
    for (k, t) in cfg.times().into_iter().enumerate() {
        if k > 0 {
            for m in 0..4 {
                for l in 0..4 {
                    let b = &mut blocks[m][l];
                    *b = if diagonal {
                        // diagonal of U_m diag(d) U_l†
                        let d = b.diag().to_owned();
                        let diag = Array1::from_shape_fn(n_cut, |x| {
                            (0..n_cut).map(|y| steps[m][[x, y]] * d[y] * steps[l][[x, y]].conj()).sum::<C64>()
                        });
                        Array2::from_diag(&diag)
                    } else {
                        let full = steps[m].dot(b).dot(&steps_dag[l]);
                        match cfg.dephasing {
                            DephasingBasis::Disabled => full,
                            _ => Array2::from_diag(&full.diag()),
                        }
                    };
                }
            }
            diagonal = cfg.dephasing != DephasingBasis::Disabled;
        }
        let rho_masses = Array2::from_shape_fn((4, 4), |(m, l)| blocks[m][l].diag().sum());
        // ⟨i|W ρ W†|i⟩ summed over the tail rows
        let tail: f64 = (0..4)
            .map(|m| {
                let b = &blocks[m][m];
                if diagonal {
                    b.diag().iter().zip(tail_weight.iter()).map(|(d, wt)| d.re * wt).sum::<f64>()
                } else {
                    let fock = w.dot(b).dot(&w_dag);
                    (n_cut - EDGE_LEVELS..n_cut).map(|i| fock[[i, i]].re).sum::<f64>()
                }
            })
            .sum();
        if cfg.dephasing != DephasingBasis::Quadrature && tail >= TRUNCATION_TOL {
            return Err(Error::TruncationOverflow { population: tail, top_k: EDGE_LEVELS, time: t });
        }
        let mut sample = mass_sample(t, QuantumState::mixed(CompositeSpace::masses(), rho_masses)?)?;
        sample.fock_tail = Some(tail.max(0.0));
        samples.push(sample);
    }
    Ok(Trajectory { regime: Regime::MeasuredMediator, samples, field: None, states: None })
}

/// `n₁ + n₂` on the two-mass space, handy for expectation values.
pub fn total_occupation() -> Result<Array2<C64>> {
    let n = branch_projector();
    let space = CompositeSpace::masses();
    Ok(embed_factors([(MASS1, &n)], &space)? + embed_factors([(MASS2, &n)], &space)?)
}
