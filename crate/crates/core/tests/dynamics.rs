use std::f64::consts::PI;

use gie_core::dynamics::*;
use gie_core::hilbert::{annihilation, branch_projector, dagger, CompositeSpace, QuantumState};
use gie_core::metrics::mass_negativity;
use gie_core::model::ModelParams;
use gie_core::{Error, C64};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn params(omega: f64, lambda: f64, n_cut: usize) -> ModelParams {
    ModelParams::new(omega, lambda, n_cut).unwrap()
}

fn cfg(regime: Regime, t_max: f64, n_steps: usize) -> EvolutionConfig {
    EvolutionConfig::new(regime, t_max, n_steps)
}

/// Reduced state of the masses for |++⟩|0⟩ under the local Hamiltonian, from
/// the conditional-displacement solution: sector `s = n₁ + n₂` carries phase
/// `Φ s²` with `Φ = (λ/ω)²(ωt − sin ωt)` and field amplitude `s b`,
/// `b = −(λ/ω)(1 − e^{−iωt})`.
fn closed_form_masses(omega: f64, lambda: f64, t: f64) -> Array2<C64> {
    let g = lambda / omega;
    let phi = g * g * (omega * t - (omega * t).sin());
    let b2 = 2.0 * g * g * (1.0 - (omega * t).cos());
    let s = [0.0, 1.0, 1.0, 2.0];
    Array2::from_shape_fn((4, 4), |(a, b)| {
        let d = s[a] - s[b];
        C64::from_polar(0.25 * (-b2 * d * d / 2.0).exp(), phi * (s[a] * s[a] - s[b] * s[b]))
    })
}

fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    ndarray::linalg::kron(a, b)
}

/// `exp(−i H t)` by Taylor series, summed until the terms vanish.
fn taylor_exp(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let n = h.nrows();
    let mut out = Array2::<C64>::eye(n);
    let mut term = Array2::<C64>::eye(n);
    for k in 1..200 {
        term = term.dot(h).mapv(|z| z * C64::new(0.0, -t / k as f64));
        out += &term;
        if term.iter().all(|z| z.norm() < 1e-18) {
            break;
        }
    }
    out
}

/// Fourth-order Suzuki–Trotter evolution of |++⟩|0⟩ built from scratch:
/// kinetic part `ω a†a` is diagonal, the coupling part goes through
/// [`taylor_exp`]. Shares no code with the library propagator.
fn trotter_masses(omega: f64, lambda: f64, n_cut: usize, t: f64, steps: usize) -> Array2<C64> {
    let i2 = Array2::<C64>::eye(2);
    let n = branch_projector();
    let a = annihilation(n_cut).unwrap().into_matrix();
    let x = &a + &dagger(&a);
    let if_ = Array2::<C64>::eye(n_cut);
    let coupling = (kron(&kron(&n, &i2), &x) + kron(&kron(&i2, &n), &x)).mapv(|z| z * lambda);
    let free_diag: Vec<f64> = (0..4 * n_cut).map(|i| omega * (i % n_cut) as f64).collect();
    let _ = if_;

    let dt = t / steps as f64;
    let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    let w0 = 1.0 - 2.0 * w1;
    // Strang step S(τ) = A(τ/2) B(τ) A(τ/2), composed as S(w1) S(w0) S(w1)
    let strang = |tau: f64| -> Array2<C64> {
        let half = Array2::from_diag(&Array1::from_iter(free_diag.iter().map(|e| C64::from_polar(1.0, -e * tau / 2.0))));
        half.dot(&taylor_exp(&coupling, tau)).dot(&half)
    };
    let step = strang(w1 * dt).dot(&strang(w0 * dt)).dot(&strang(w1 * dt));

    let mut psi = Array1::<C64>::zeros(4 * n_cut);
    for m in 0..4 {
        psi[m * n_cut] = C64::new(0.5, 0.0);
    }
    for _ in 0..steps {
        psi = step.dot(&psi);
    }
    Array2::from_shape_fn((4, 4), |(p, q)| (0..n_cut).map(|f| psi[p * n_cut + f] * psi[q * n_cut + f].conj()).sum())
}

#[test]
fn quantum_local_matches_closed_form() {
    let p = params(1.0, 0.5, 32);
    let traj = run_quantum_local(&p, &cfg(Regime::QuantumLocal, 2.0 * PI, 64)).unwrap();
    for s in &traj.samples {
        let err = max_diff(&s.masses.density_matrix(), &closed_form_masses(1.0, 0.5, s.t));
        assert!(err < 1e-9, "t = {}: {err}", s.t);
    }
    let last = traj.samples.last().unwrap();
    assert!((last.negativity - 0.5).abs() < 1e-6, "{}", last.negativity);
    // field back in the vacuum: masses and field disentangle
    assert!(last.entropy_masses_vs_field.unwrap() < 1e-6);
    let psi = traj.states.as_ref().unwrap().last().unwrap().vector().unwrap().clone();
    let vac: f64 = (0..4).map(|m| psi[m * 32].norm_sqr()).sum();
    assert!((vac - 1.0).abs() < 1e-6);
}

#[test]
fn quantum_local_at_half_period() {
    let p = params(1.0, 0.5, 32);
    let traj = run_quantum_local(&p, &cfg(Regime::QuantumLocal, PI, 8)).unwrap();
    let n = traj.samples.last().unwrap().negativity;
    let oracle = QuantumState::mixed(CompositeSpace::masses(), closed_form_masses(1.0, 0.5, PI)).unwrap();
    let expected = mass_negativity(&oracle).unwrap();
    assert!(n > 0.0 && n < 0.5, "{n}");
    assert!((n - expected).abs() < 1e-8, "{n} vs {expected}");
}

#[test]
fn quantum_local_matches_trotter() {
    for (omega, lambda, t) in [(1.0, 0.5, PI), (2.0, 0.3, 1.7)] {
        let p = params(omega, lambda, 24);
        let traj = run_quantum_local(&p, &cfg(Regime::QuantumLocal, t, 1)).unwrap();
        let ours = traj.samples[1].masses.density_matrix();
        let reference = trotter_masses(omega, lambda, 24, t, 200);
        assert!(max_diff(&ours, &reference) < 1e-8, "omega={omega}: {}", max_diff(&ours, &reference));
    }
}

#[test]
fn quantum_local_decoupled_is_static() {
    let p = params(1.0, 0.0, 8);
    let traj = run_quantum_local(&p, &cfg(Regime::QuantumLocal, 5.0, 20)).unwrap();
    let first = traj.samples[0].masses.density_matrix();
    for s in &traj.samples {
        assert!(max_diff(&s.masses.density_matrix(), &first) < 1e-12);
        assert!(s.negativity < 1e-12);
    }
}

#[test]
fn quantum_local_truncation_guard() {
    let p = params(1.0, 1.0, 8);
    match run_quantum_local(&p, &cfg(Regime::QuantumLocal, PI, 4)) {
        Err(Error::TruncationOverflow { top_k: 4, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn quantum_local_entropy_is_periodic() {
    let p = params(1.0, 0.5, 32);
    let traj = run_quantum_local(&p, &cfg(Regime::QuantumLocal, 4.0 * PI, 64)).unwrap();
    for k in 0..=32 {
        let a = traj.samples[k].entropy_masses_vs_field.unwrap();
        let b = traj.samples[k + 32].entropy_masses_vs_field.unwrap();
        assert!((a - b).abs() < 1e-6, "k = {k}: {a} vs {b}");
    }
    // the mass-mass negativity is not periodic in general: the cross phase
    // keeps accumulating, here 0 at t = 0 and maximal after one period
    assert!(traj.samples[0].negativity < 1e-12);
    assert!((traj.samples[32].negativity - 0.5).abs() < 1e-6);
}

#[test]
fn quantum_local_negativity_periodic_when_cross_phase_is_whole_turn() {
    // 2 λ²/ω² = 1: the cross phase per period is 2π
    let lambda = 0.5f64.sqrt();
    let p = params(1.0, lambda, 40);
    let traj = run_quantum_local(&p, &cfg(Regime::QuantumLocal, 4.0 * PI, 64)).unwrap();
    for k in 0..=32 {
        let a = traj.samples[k].negativity;
        let b = traj.samples[k + 32].negativity;
        assert!((a - b).abs() < 1e-6, "k = {k}: {a} vs {b}");
    }
}

#[test]
fn classical_local_branch_phase() {
    let p = params(1.0, 0.5, 8);
    let mut c = cfg(Regime::ClassicalLocal, 2.0 * PI, 512);
    c.alpha0 = C64::new(1.0, 0.0);
    let traj = run_classical_local(&p, &c).unwrap();
    for s in &traj.samples {
        // mass 1 marginal coherence ⟨0|ρ|1⟩ = e^{iφ}/2, φ = 2λ sin(ωt)/ω
        let rho = s.masses.density_matrix();
        let coherence = rho[[0, 2]] + rho[[1, 3]];
        let phi = 2.0 * 0.5 * s.t.sin();
        assert!((coherence - C64::from_polar(0.5, phi)).norm() < 1e-4, "t = {}", s.t);
        assert!(s.negativity <= 1e-12);
        let alpha = s.alpha.unwrap();
        assert!((alpha - C64::from_polar(1.0, -s.t)).norm() < 1e-12);
    }
    let field = traj.field.unwrap();
    assert_eq!(field.rule(), TrajectoryRule::FreeRotation);
    assert_eq!(field.samples().len(), 513);
}

#[test]
fn classical_local_constant_zero_is_identity() {
    let p = params(1.0, 0.5, 8);
    let mut c = cfg(Regime::ClassicalLocal, 3.0, 30);
    c.field_rule = TrajectoryRule::Constant;
    let traj = run_classical_local(&p, &c).unwrap();
    let first = traj.samples[0].masses.vector().unwrap().clone();
    for s in &traj.samples {
        let v = s.masses.vector().unwrap();
        assert!(v.iter().zip(first.iter()).all(|(a, b)| (a - b).norm() < 1e-14));
    }
}

#[test]
fn classical_nonlocal_closed_form() {
    for (omega, lambda) in [(1.0, 0.5), (1.0, 0.1), (2.0, 0.7), (0.5, -0.3)] {
        let p = params(omega, lambda, 4);
        let traj = run_classical_nonlocal(&p, &cfg(Regime::ClassicalNonlocal, 10.0, 200)).unwrap();
        for s in &traj.samples {
            let theta = 2.0 * lambda * lambda * s.t / omega;
            let expected = (theta / 2.0).sin().abs() / 2.0;
            assert!((s.negativity - expected).abs() < 1e-8, "t = {}", s.t);
        }
    }
    let p = params(1.0, 0.5, 4);
    let traj = run_classical_nonlocal(&p, &cfg(Regime::ClassicalNonlocal, 2.0 * PI, 4)).unwrap();
    assert!((traj.samples[4].negativity - 0.5).abs() < 1e-10);
    let zero = run_classical_nonlocal(&params(1.0, 0.0, 4), &cfg(Regime::ClassicalNonlocal, 5.0, 10)).unwrap();
    assert!(zero.max_negativity() < 1e-12);
}

#[test]
fn meanfield_matches_linear_ode() {
    for (omega, lambda, alpha0) in [(1.0, 0.5, C64::new(0.0, 0.0)), (1.3, 0.8, C64::new(0.4, -1.1))] {
        let p = params(omega, lambda, 4);
        let mut c = cfg(Regime::MeanFieldLocal, 2.0 * PI, 512);
        c.alpha0 = alpha0;
        let traj = run_meanfield_local(&p, &c).unwrap();
        // ⟨n₁ + n₂⟩ = 1 for |++⟩
        let shift = lambda / omega;
        for s in &traj.samples {
            let expected = (alpha0 + shift) * C64::from_polar(1.0, -omega * s.t) - shift;
            assert!((s.alpha.unwrap() - expected).norm() < 1e-8, "t = {}", s.t);
            assert!(s.negativity <= 1e-12);
        }
        assert_eq!(traj.field.unwrap().rule(), TrajectoryRule::MeanField);
    }
    let p = params(1.0, 0.0, 4);
    let mut c = cfg(Regime::MeanFieldLocal, 2.0, 7);
    c.alpha0 = C64::new(0.3, 0.2);
    let traj = run_meanfield_local(&p, &c).unwrap();
    for s in &traj.samples {
        let expected = c.alpha0 * C64::from_polar(1.0, -s.t);
        assert!((s.alpha.unwrap() - expected).norm() < 1e-10);
    }
}

#[test]
fn measured_mediator_basics() {
    let p = params(1.0, 0.5, 16);
    let short = run_measured_mediator(&p, &cfg(Regime::MeasuredMediator, 2.0 * PI, 32));
    assert!(matches!(short, Err(Error::InvalidConfig(_))));

    let free = run_measured_mediator(&params(1.0, 0.0, 8), &cfg(Regime::MeasuredMediator, 1.0, 10)).unwrap();
    let first = free.samples[0].masses.density_matrix();
    for s in &free.samples {
        assert!(max_diff(&s.masses.density_matrix(), &first) < 1e-12);
    }
}

#[test]
fn measured_mediator_without_dephasing_is_quantum_local() {
    let p = params(1.0, 0.5, 32);
    let mut c = cfg(Regime::MeasuredMediator, 2.0 * PI, 128);
    c.dephasing = DephasingBasis::Disabled;
    let measured = run_measured_mediator(&p, &c).unwrap();
    let exact = run_quantum_local(&p, &cfg(Regime::QuantumLocal, 2.0 * PI, 128)).unwrap();
    for (a, b) in measured.samples.iter().zip(&exact.samples) {
        assert!((a.negativity - b.negativity).abs() < 1e-4, "t = {}", a.t);
    }
}

/// Full density-matrix evolution: one exact step, then `ρ → Σ_x P_x ρ P_x`
/// with `P_x` projecting the field onto column `x` of `basis`.
fn brute_force_measured(p: &ModelParams, t_max: f64, steps: usize, basis: &Array2<C64>) -> Vec<Array2<C64>> {
    let n = p.n_cut;
    let a = annihilation(n).unwrap().into_matrix();
    let x = &a + &dagger(&a);
    let proj = branch_projector();
    let eye2 = Array2::<C64>::eye(2);
    let s = kron(&proj, &eye2) + kron(&eye2, &proj);
    let h = kron(&Array2::eye(4), &dagger(&a).dot(&a)).mapv(|z| z * p.omega)
        + kron(&s, &x).mapv(|z| z * p.lambda);
    let u = taylor_exp(&h, t_max / steps as f64);
    let mut psi = Array1::<C64>::zeros(4 * n);
    for m in 0..4 {
        psi[m * n] = C64::new(0.5, 0.0);
    }
    let mut rho = Array2::from_shape_fn((4 * n, 4 * n), |(i, j)| psi[i] * psi[j].conj());
    let masses = |rho: &Array2<C64>| Array2::from_shape_fn((4, 4), |(m, l)| (0..n).map(|k| rho[[m * n + k, l * n + k]]).sum::<C64>());
    let mut out = vec![masses(&rho)];
    for _ in 0..steps {
        rho = u.dot(&rho).dot(&dagger(&u));
        let mut next = Array2::<C64>::zeros((4 * n, 4 * n));
        for col in basis.columns() {
            let w = Array2::from_shape_fn((n, n), |(i, j)| col[i] * col[j].conj());
            let pr = kron(&Array2::eye(4), &w);
            next += &pr.dot(&rho).dot(&pr);
        }
        rho = next;
        out.push(masses(&rho));
    }
    out
}

#[test]
fn measured_mediator_matches_brute_force() {
    let p = params(1.0, 0.5, 16);
    let a = annihilation(16).unwrap().into_matrix();
    let x = (&a + &dagger(&a)).mapv(|z| z / 2f64.sqrt());
    let (_, quad) = gie_core::hilbert::eigh(&x).unwrap();
    for (dephasing, basis) in [(DephasingBasis::Quadrature, quad), (DephasingBasis::Fock, Array2::eye(16))] {
        let mut c = cfg(Regime::MeasuredMediator, 2.0, 20);
        c.dephasing = dephasing;
        let traj = run_measured_mediator(&p, &c).unwrap();
        let oracle = brute_force_measured(&p, 2.0, 20, &basis);
        for (s, o) in traj.samples.iter().zip(&oracle) {
            assert!(max_diff(&s.masses.density_matrix(), o) < 1e-10, "{dephasing:?} t = {}", s.t);
        }
    }
}

#[test]
fn measured_mediator_ceiling_falls_with_dt() {
    let p = params(1.0, 0.5, 32);
    for basis in [DephasingBasis::Quadrature, DephasingBasis::Fock] {
        let ceilings: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| {
                let mut c = cfg(Regime::MeasuredMediator, 2.0 * PI, n);
                c.dephasing = basis;
                run_measured_mediator(&p, &c).unwrap().max_negativity()
            })
            .collect();
        assert!(ceilings[0] > ceilings[1] && ceilings[1] > ceilings[2], "{basis:?}: {ceilings:?}");
        assert!(ceilings[2] < 1e-3, "{basis:?}: {ceilings:?}");
    }
}

#[test]
fn every_regime_keeps_valid_mass_states() {
    let p = params(1.0, 0.5, 24);
    for regime in [
        Regime::QuantumLocal,
        Regime::ClassicalLocal,
        Regime::ClassicalNonlocal,
        Regime::MeanFieldLocal,
        Regime::MeasuredMediator,
    ] {
        let mut c = cfg(regime, 2.0 * PI, 64);
        c.alpha0 = C64::new(0.7, 0.2);
        let traj = run(&p, &c).unwrap();
        assert_eq!(traj.regime, regime);
        assert_eq!(traj.samples.len(), 65);
        for s in &traj.samples {
            let rho = s.masses.density_matrix();
            let trace: C64 = rho.diag().sum();
            assert!((trace - C64::new(1.0, 0.0)).norm() < 1e-8, "{regime:?}");
            let eigs = s.masses.space().clone();
            assert_eq!(eigs, CompositeSpace::masses());
            // mixed() validates positivity within tolerance
            QuantumState::mixed(CompositeSpace::masses(), rho).unwrap();
        }
    }
}

#[test]
fn config_and_trajectory_validation() {
    let p = params(1.0, 0.5, 8);
    assert!(run(&p, &cfg(Regime::QuantumLocal, 0.0, 4)).is_err());
    assert!(run(&p, &cfg(Regime::QuantumLocal, 1.0, 0)).is_err());
    assert!(run_classical_local(&p, &cfg(Regime::QuantumLocal, 1.0, 4)).is_err());
    let mut bad = cfg(Regime::ClassicalLocal, 1.0, 4);
    bad.mass_init = Array1::from_elem(4, C64::new(1.0, 0.0));
    assert!(run(&p, &bad).is_err());

    assert!(ClassicalFieldTrajectory::new(vec![], TrajectoryRule::Constant).is_err());
    assert!(ClassicalFieldTrajectory::new(vec![(0.1, C64::new(0.0, 0.0))], TrajectoryRule::Constant).is_err());
    let repeated = vec![(0.0, C64::new(0.0, 0.0)), (0.0, C64::new(0.0, 0.0))];
    assert!(ClassicalFieldTrajectory::new(repeated, TrajectoryRule::Constant).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn classical_fields_never_entangle(
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
        lambda in -2.0..2.0f64,
        omega in 0.2..3.0f64,
    ) {
        let p = params(omega, lambda, 4);
        for regime in [Regime::ClassicalLocal, Regime::MeanFieldLocal] {
            let mut c = cfg(regime, 2.0 * PI / omega, 128);
            c.alpha0 = C64::new(re, im);
            let traj = run(&p, &c).unwrap();
            prop_assert!(traj.max_negativity() <= 1e-12, "{:?}: {}", regime, traj.max_negativity());
        }
    }
}
