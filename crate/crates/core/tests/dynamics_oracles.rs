use std::sync::Arc;

use ddrab::dynamics::{
    evolve_master, evolve_master_periodic, evolve_unitary, periodic_steady_state, steady_residual,
    steady_state, PhysicalityLimits, SteadyMethod, SteadyOptions, TimeGrid,
};
use ddrab::qcore::{Basis, DrivenHamiltonian, Ket, Operator, Tone, C64};
use ddrab::Error;

fn qubit() -> Arc<Basis> {
    Arc::new(Basis::single(&["g", "e"]).unwrap())
}

fn raise(b: &Arc<Basis>) -> Operator {
    Operator::transition(b, &["e"], &["g"]).unwrap()
}

fn excited(b: &Arc<Basis>) -> Operator {
    Operator::transition(b, &["e"], &["e"]).unwrap()
}

fn ground(b: &Arc<Basis>) -> Ket {
    Ket::basis_state(b, &["g"]).unwrap()
}

// Lab-frame two-level atom, `omega0 |e><e| + (rabi/2)(e^{-i nu t}|e><g| + h.c.)`.
fn lab_atom(omega0: f64, rabi: f64, nu: f64) -> DrivenHamiltonian {
    let b = qubit();
    DrivenHamiltonian::new(excited(&b).scale_re(omega0))
        .with_term(
            raise(&b),
            vec![Tone {
                amplitude: C64::new(rabi / 2.0, 0.0),
                freq: -nu,
            }],
        )
        .unwrap()
}

fn rabi_excited(rabi: f64, detuning: f64, t: f64) -> f64 {
    let w = (rabi * rabi + detuning * detuning).sqrt();
    rabi * rabi / (w * w) * (0.5 * w * t).sin().powi(2)
}

#[test]
fn detuned_rabi_oscillation_in_the_lab_frame() {
    let (omega0, rabi, nu) = (300.0, 4.0, 301.5);
    let h = lab_atom(omega0, rabi, nu);
    let grid = TimeGrid::for_hamiltonian(0.0, 3.0, &h, 50).unwrap();
    let tr = evolve_unitary(&h, &ground(&qubit()), &grid).unwrap();
    let pe = tr
        .population_of(&Ket::basis_state(&qubit(), &["e"]).unwrap())
        .unwrap();
    for (t, p) in tr.times.iter().zip(&pe) {
        assert!(
            (p - rabi_excited(rabi, nu - omega0, *t)).abs() < 1e-8,
            "t = {t}: {p}"
        );
    }
}

#[test]
fn closed_master_equation_follows_the_ket() {
    let h = lab_atom(80.0, 3.0, 79.0);
    let b = qubit();
    let grid = TimeGrid::for_hamiltonian(0.0, 2.0, &h, 100).unwrap();
    let kets = evolve_unitary(&h, &ground(&b), &grid).unwrap();
    let rhos = evolve_master(&h, &[], &Operator::projector(&ground(&b)), &grid).unwrap();
    let diff = kets
        .final_density()
        .max_diff(&rhos.final_density())
        .unwrap();
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn spontaneous_decay_is_exponential() {
    let b = qubit();
    let gamma: f64 = 0.7;
    let h = DrivenHamiltonian::new(excited(&b).scale_re(5.0));
    let l = Operator::transition(&b, &["g"], &["e"])
        .unwrap()
        .scale_re(gamma.sqrt());
    let e = Ket::basis_state(&b, &["e"]).unwrap();
    let grid = TimeGrid::new(0.0, 4.0, 0.002, 100, h.max_frequency()).unwrap();
    let tr = evolve_master(&h, &[l], &Operator::projector(&e), &grid).unwrap();
    let pe = tr.population_of(&e).unwrap();
    for (t, p) in tr.times.iter().zip(&pe) {
        assert!((p - (-gamma * t).exp()).abs() < 1e-10, "t = {t}");
    }
}

// Resonance-fluorescence steady state: rho_ee = (O^2/4) / (d^2 + g^2/4 + O^2/2).
fn bloch_rho_ee(rabi: f64, detuning: f64, gamma: f64) -> f64 {
    0.25 * rabi * rabi / (detuning * detuning + 0.25 * gamma * gamma + 0.5 * rabi * rabi)
}

fn rotating_atom(rabi: f64, detuning: f64) -> Operator {
    let b = qubit();
    let x = raise(&b);
    &(&x + &x.dagger()).scale_re(rabi / 2.0) - &excited(&b).scale_re(detuning)
}

#[test]
fn optical_bloch_steady_state() {
    let (rabi, detuning, gamma): (f64, f64, f64) = (1.3, 0.4, 0.9);
    let h = rotating_atom(rabi, detuning);
    let l = Operator::transition(h.basis(), &["g"], &["e"])
        .unwrap()
        .scale_re(gamma.sqrt());
    let want = bloch_rho_ee(rabi, detuning, gamma);
    for method in [SteadyMethod::Nullspace, SteadyMethod::LongTime] {
        let rho = steady_state(&h, std::slice::from_ref(&l), method).unwrap();
        assert!(
            (rho[(1, 1)].re - want).abs() < 1e-9,
            "{method:?}: {} vs {want}",
            rho[(1, 1)].re
        );
        assert!(steady_residual(&h, std::slice::from_ref(&l), &rho) < 1e-9);
    }
}

#[test]
fn stroboscopic_fixed_point_of_a_lab_frame_drive() {
    let (omega0, rabi, gamma): (f64, f64, f64) = (200.0, 1.3, 0.9);
    let detuning = 0.4;
    let h = lab_atom(omega0, rabi, omega0 + detuning);
    let b = qubit();
    let l = Operator::transition(&b, &["g"], &["e"])
        .unwrap()
        .scale_re(gamma.sqrt());
    let period = 2.0 * std::f64::consts::PI / (omega0 + detuning);
    let rho = periodic_steady_state(&h, &[l], period, &SteadyOptions::default()).unwrap();
    // one co-rotating term only, so the rotating frame is exact for populations
    assert!((rho[(1, 1)].re - bloch_rho_ee(rabi, detuning, gamma)).abs() < 1e-8);
}

#[test]
fn periodic_propagator_matches_direct_integration() {
    let (omega0, rabi, nu) = (60.0, 2.0, 60.0);
    let h = lab_atom(omega0, rabi, nu);
    let b = qubit();
    let l = Operator::transition(&b, &["g"], &["e"])
        .unwrap()
        .scale_re(0.3);
    let period = 2.0 * std::f64::consts::PI / nu;
    let t1 = 40.0 * period + 0.3 * period;
    let dt = period / 200.0;
    let grid = TimeGrid::new(0.0, t1, dt, 400, h.max_frequency()).unwrap();
    let rho0 = Operator::projector(&ground(&b));
    let direct = evolve_master(&h, std::slice::from_ref(&l), &rho0, &grid).unwrap();
    let fast = evolve_master_periodic(
        &h,
        &[l],
        &rho0,
        &grid,
        period,
        &PhysicalityLimits::default(),
    )
    .unwrap();
    assert!((fast.times.last().unwrap() - t1).abs() < 1e-12);
    let diff = direct
        .final_density()
        .max_diff(&fast.final_density())
        .unwrap();
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn unnormalized_input_is_rejected() {
    let b = qubit();
    let h = lab_atom(10.0, 1.0, 10.0);
    let grid = TimeGrid::for_hamiltonian(0.0, 1.0, &h, 10).unwrap();
    let bad = ground(&b).scale(C64::new(2.0, 0.0));
    assert!(evolve_unitary(&h, &bad, &grid).is_err());
    let rho = Operator::projector(&ground(&b)).scale_re(1.5);
    assert!(matches!(
        evolve_master(&h, &[], &rho, &grid),
        Err(Error::Physicality { .. })
    ));
}

#[test]
fn coarse_grids_are_refused() {
    let h = lab_atom(100.0, 1.0, 100.0);
    assert!(matches!(
        TimeGrid::new(0.0, 1.0, 0.05, 1, h.max_frequency()),
        Err(Error::StepTooLarge { .. })
    ));
}
