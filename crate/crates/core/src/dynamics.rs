//! Time evolution of the Dicke ladder under the collective master equation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::integrate::{dopri5, OdeOptions, Output};
use crate::ladder::{ladder_coeffs, observables, rhs_flat, DickeLadderState, ObservableSet};
use crate::params::ModelParams;

/// A sampled trajectory; `times[k]` belongs to `states[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DickeLadderState>,
}

impl Trajectory {
    pub fn observables(&self) -> Vec<ObservableSet> {
        self.states.iter().map(observables).collect()
    }

    pub fn last(&self) -> &DickeLadderState {
        self.states.last().expect("trajectories are never empty")
    }

    /// Largest |Tr ρ − 1| along the trajectory.
    pub fn max_trace_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.trace() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max)
    }
}

fn check(state0: &DickeLadderState, params: &ModelParams) -> Result<()> {
    params.validate()?;
    if state0.n_levels() != params.n_levels() {
        return Err(Error::DimensionMismatch { expected: params.n_levels(), found: state0.n_levels() });
    }
    Ok(())
}

fn run(state0: &DickeLadderState, params: &ModelParams, t_final: f64, output: Output<'_>, opts: &OdeOptions) -> Result<Trajectory> {
    check(state0, params)?;
    let a = ladder_coeffs(params.n_atoms);
    let sol = dopri5(
        |_, y, dy| rhs_flat(&a, params, y, dy),
        0.0,
        state0.rho().as_slice(),
        t_final,
        output,
        opts,
    )?;
    let n = params.n_atoms;
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.iter().map(|v| DickeLadderState::from_column_slice(n, v)).collect(),
    })
}

/// Evolves `state0` to `t_final` (units of 1/Γ), recording every accepted
/// integrator step. `tol` is the relative tolerance; the absolute tolerance
/// is `tol/100`. The trace is never renormalized.
pub fn evolve(state0: &DickeLadderState, params: &ModelParams, t_final: f64, tol: f64) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be positive, got {tol}")));
    }
    run(state0, params, t_final, Output::EveryStep, &OdeOptions::with_tol(tol))
}

/// Evolves `state0` and records the state at each of `times` (increasing,
/// non-negative). Integration starts at t = 0.
pub fn evolve_sampled(state0: &DickeLadderState, params: &ModelParams, times: &[f64], opts: &OdeOptions) -> Result<Trajectory> {
    let t_final = *times.last().ok_or_else(|| Error::InvalidParams("no sample times".into()))?;
    run(state0, params, t_final, Output::At(times), opts)
}

/// `n + 1` equally spaced times on `[0, t_final]`.
pub fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_final * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_ground_state_is_stationary() {
        for n in [1, 5, 12] {
            let p = ModelParams::new(n, 0.0).unwrap();
            let g = DickeLadderState::ground(n).unwrap();
            let traj = evolve(&g, &p, 4.0, 1e-8).unwrap();
            assert_eq!(*traj.times.last().unwrap(), 4.0);
            assert!(traj.states.iter().all(|s| *s == g));
        }
    }

    #[test]
    fn invariants_along_trajectory() {
        for (n, rabi) in [(3, 2.0), (8, 6.0), (20, 20.0)] {
            let p = ModelParams::new(n, rabi).unwrap();
            let g = DickeLadderState::ground(n).unwrap();
            let traj = evolve(&g, &p, 3.0, 1e-8).unwrap();
            assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(*traj.times.last().unwrap(), 3.0);
            for st in traj.states.iter().step_by(7) {
                let d = st.diagnostics();
                assert!(d.trace_error < 1e-10, "trace {d:?}");
                assert!(d.hermiticity_error < 1e-12, "herm {d:?}");
                assert!(d.min_eigenvalue > -1e-8, "psd {d:?}");
            }
        }
    }

    #[test]
    fn sampled_matches_requested_times() {
        let p = ModelParams::new(4, 3.0).unwrap();
        let g = DickeLadderState::ground(4).unwrap();
        let ts = uniform_times(2.0, 40);
        let traj = evolve_sampled(&g, &p, &ts, &OdeOptions::default()).unwrap();
        assert_eq!(traj.times, ts);
        assert_eq!(traj.states[0], g);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let p = ModelParams::new(2, 1.0).unwrap();
        let g = DickeLadderState::ground(2).unwrap();
        assert!(evolve(&g, &p, 1.0, 0.0).is_err());
        assert!(evolve(&g, &p, -1.0, 1e-8).is_err());
    }
}
