use dicke_core::analysis::{obe_excited_population, steady_window_average, TimeTrace, TraceKind};
use dicke_core::dynamics::uniform_times;
use dicke_core::geometry::{cooperativity_mu, CloudGeometry};
use dicke_core::integrate::OdeOptions;
use dicke_core::meanfield::mf_steady;
use dicke_core::{evolve, evolve_sampled, g2_zero, liouvillian_rhs, observables, steady_state, DickeLadderState, ModelParams};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn random_state(n: usize, entries: &[(f64, f64)]) -> DickeLadderState {
    let d = n + 1;
    let a = DMatrix::from_fn(d, d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        C64::new(re + 0.1 * i as f64, im - 0.05 * j as f64)
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    DickeLadderState::from_matrix(n, rho / tr).unwrap()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rhs_is_trace_free_and_hermitian(
        n in 1usize..12,
        rabi in 0.0f64..20.0,
        detuning in -5.0f64..5.0,
        entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..40),
    ) {
        let state = random_state(n, &entries);
        let params = ModelParams::new(n, rabi).unwrap().with_detuning(detuning).unwrap();
        let d = liouvillian_rhs(&state, &params).unwrap();
        let scale = 1.0 + rabi + detuning.abs() + (n * n) as f64;
        prop_assert!(d.trace().norm() < 1e-12 * scale);
        prop_assert!(max_abs(&(&d - d.adjoint())) < 1e-12 * scale);
    }

    #[test]
    fn evolution_keeps_a_density_matrix(
        n in 1usize..8,
        rabi in 0.0f64..10.0,
        entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..40),
    ) {
        let state = random_state(n, &entries);
        let traj = evolve(&state, &ModelParams::new(n, rabi).unwrap(), 2.0, 1e-9).unwrap();
        prop_assert!(traj.max_trace_drift() < 1e-9);
        let diag = traj.last().diagnostics();
        prop_assert!(diag.hermiticity_error < 1e-9);
        prop_assert!(diag.min_eigenvalue > -1e-8);
    }
}

#[test]
fn single_atom_rhs_matches_bloch_equations() {
    let (om, delta) = (1.3, 0.6);
    let params = ModelParams::new(1, om).unwrap().with_detuning(delta).unwrap();
    let i = C64::i();
    let (gg, ee) = (C64::new(0.7, 0.0), C64::new(0.3, 0.0));
    let eg = C64::new(0.2, 0.15);
    let ge = eg.conj();
    let mut rho = DMatrix::zeros(2, 2);
    rho[(0, 0)] = gg;
    rho[(1, 1)] = ee;
    rho[(1, 0)] = eg;
    rho[(0, 1)] = ge;
    // H = (Ω/2)σ_x − Δ|e⟩⟨e|, Γ = 1.
    let d_ee = -i * 0.5 * om * (ge - eg) - ee;
    let d_eg = -i * (0.5 * om * (gg - ee) - delta * eg) - 0.5 * eg;
    let d = liouvillian_rhs(&DickeLadderState::from_matrix(1, rho).unwrap(), &params).unwrap();
    assert!((d[(1, 1)] - d_ee).norm() < 1e-15);
    assert!((d[(1, 0)] - d_eg).norm() < 1e-15);
    assert!((d[(0, 0)] + d_ee).norm() < 1e-15);
}

#[test]
fn single_atom_follows_closed_form() {
    let times = uniform_times(8.0, 80);
    let traj = evolve_sampled(
        &DickeLadderState::ground(1).unwrap(),
        &ModelParams::new(1, 5.0).unwrap(),
        &times,
        &OdeOptions::with_tol(1e-10),
    )
    .unwrap();
    for (t, obs) in times.iter().zip(traj.observables()) {
        assert!((obs.n_e - obe_excited_population(5.0, 1.0, *t)).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn undriven_ground_state_is_stationary() {
    for n in [1, 5, 20] {
        let g = DickeLadderState::ground(n).unwrap();
        let traj = evolve(&g, &ModelParams::new(n, 0.0).unwrap(), 10.0, 1e-8).unwrap();
        assert!(traj.states.iter().all(|s| s == &g));
    }
}

#[test]
fn collective_oscillations_are_damped() {
    // Peak-to-valley swing after the first maximum is smaller for ten atoms.
    let times = uniform_times(6.0, 600);
    let swing = |n: usize| {
        let traj = evolve_sampled(
            &DickeLadderState::ground(n).unwrap(),
            &ModelParams::new(n, 4.5).unwrap(),
            &times,
            &OdeOptions::with_tol(1e-9),
        )
        .unwrap();
        let ne: Vec<f64> = traj.observables().iter().map(|o| o.n_e).collect();
        let peak = (1..ne.len() - 1).find(|&k| ne[k] > ne[k - 1] && ne[k] >= ne[k + 1]).unwrap_or(ne.len() - 1);
        let valley = ne[peak..].iter().cloned().fold(f64::INFINITY, f64::min);
        ne[peak] - valley
    };
    let (one, ten) = (swing(1), swing(10));
    assert!(ten < 0.5 * one, "N=1 swing {one}, N=10 swing {ten}");
}

#[test]
fn steady_state_is_a_fixed_point_of_the_dynamics() {
    for (n, rabi) in [(3, 0.8), (6, 4.0), (10, 2.0)] {
        let params = ModelParams::new(n, rabi).unwrap();
        let rho = steady_state(&params).unwrap();
        let traj = evolve(&rho, &params, 5.0, 1e-11).unwrap();
        let drift = max_abs(&(traj.last().rho() - rho.rho()));
        assert!(drift < 1e-8, "N={n} Ω={rabi}: {drift:e}");
    }
}

#[test]
fn long_trace_window_average_matches_steady_state() {
    let params = ModelParams::new(4, 3.0).unwrap();
    let times = uniform_times(60.0, 3000);
    let traj = evolve_sampled(&DickeLadderState::ground(4).unwrap(), &params, &times, &OdeOptions::with_tol(1e-11)).unwrap();
    let ne = traj.observables().iter().map(|o| o.n_e).collect();
    let trace = TimeTrace::new(times, ne, TraceKind::Population).unwrap();
    let avg = steady_window_average(&trace, 1.885).unwrap();
    let target = observables(&steady_state(&params).unwrap()).n_e;
    assert!((avg - target).abs() < 1e-6, "{avg} vs {target}");
}

/// ⟨S⁺S⁺S⁻S⁻⟩/⟨S⁺S⁻⟩² with equal weight on every level, by direct summation.
fn uniform_g2(n: usize) -> f64 {
    let s = n as f64 / 2.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..=n {
        let m = k as f64 - s;
        let a1 = (s + m) * (s - m + 1.0);
        den += a1;
        num += a1 * (s + m - 1.0) * (s - m + 2.0);
    }
    (n + 1) as f64 * num / (den * den)
}

#[test]
fn g2_of_uniform_diagonal() {
    for n in [2, 3, 7, 12] {
        let d = n + 1;
        let rho = DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(1.0 / d as f64, 0.0) } else { C64::new(0.0, 0.0) });
        let g2 = g2_zero(&DickeLadderState::from_matrix(n, rho).unwrap()).unwrap();
        assert!((g2 - uniform_g2(n)).abs() < 1e-13, "N={n}");
    }
    assert!((uniform_g2(7) - 8.0 / 7.0).abs() < 1e-14);
}

#[test]
fn mean_field_matches_quantum_limits() {
    // Deep in the magnetized phase both give ⟨S⁻⟩ = −iΩ.
    let n = 30;
    let params = ModelParams::from_beta(n, 0.2).unwrap();
    let q = observables(&steady_state(&params).unwrap());
    let mf = mf_steady(0.2, n as f64);
    assert!((q.dipole - mf.dipole).norm() < 1e-6 * params.rabi);
    // Far above threshold both sit near s_z = 0.
    let q = observables(&steady_state(&ModelParams::from_beta(n, 20.0).unwrap()).unwrap());
    let mf = mf_steady(20.0, n as f64);
    assert!(q.s_z.abs() < 0.05 && mf.s_z().abs() < 1e-12);
}

#[test]
fn cooperativity_decreases_with_cloud_size() {
    let sizes: Vec<f64> = (0..5).map(|k| 0.3 * 3f64.powi(k)).collect();
    let grid: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&ax| sizes.iter().map(|&rad| cooperativity_mu(&CloudGeometry::new(ax, rad).unwrap()).unwrap()).collect())
        .collect();
    for i in 0..5 {
        for j in 0..5 {
            assert!(grid[i][j] > 0.0 && grid[i][j] <= 1.0);
            if i + 1 < 5 {
                assert!(grid[i + 1][j] < grid[i][j], "ax {i} rad {j}");
            }
            if j + 1 < 5 {
                assert!(grid[i][j + 1] < grid[i][j], "ax {i} rad {j}");
            }
        }
    }
}
