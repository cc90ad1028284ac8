//! Semi-classical (large-N) limit of the driven Dicke model.
//!
//! With ⟨S_x⟩(0) = 0 the collective dipole stays purely imaginary and the
//! spin-conserving mean-field equations are
//!
//! ```text
//! d⟨S⁻⟩/dt = (iΩ + Γ⟨S⁻⟩)⟨S_z⟩
//! d⟨S_z⟩/dt = iΩ⟨S⁻⟩ − Γ(N²/4 − ⟨S_z⟩²)
//! ```
//!
//! The atom number is real here so that the effective number Ñ = Nμ can be
//! used directly. Γ = 1 throughout.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::integrate::{dopri5, OdeOptions, Output};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    /// ⟨S⁻⟩.
    pub dipole: C64,
    /// ⟨S_z⟩ (not normalized; −N/2 in the ground state).
    pub sz: f64,
    pub n_atoms: f64,
}

impl MeanFieldState {
    pub fn ground(n_atoms: f64) -> Self {
        Self { dipole: C64::new(0.0, 0.0), sz: -0.5 * n_atoms, n_atoms }
    }

    /// |⟨S⁻⟩|² + ⟨S_z⟩², equal to (N/2)² on the Bloch sphere.
    pub fn spin_length_sq(&self) -> f64 {
        self.dipole.norm_sqr() + self.sz * self.sz
    }

    /// ⟨S_z⟩/(N/2).
    pub fn s_z(&self) -> f64 {
        self.sz / (0.5 * self.n_atoms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldDerivative {
    pub d_dipole: C64,
    pub d_sz: f64,
}

/// Right-hand side of the mean-field equations at Rabi frequency `rabi`.
///
/// ⟨S_z⟩ is real, so only the real part of iΩ⟨S⁻⟩ enters its equation; the
/// two coincide whenever the dipole is purely imaginary.
pub fn mf_rhs(state: &MeanFieldState, rabi: f64) -> MeanFieldDerivative {
    let n = state.n_atoms;
    let d_dipole = (I * rabi + state.dipole) * state.sz;
    let d_sz = (I * rabi * state.dipole).re - (0.25 * n * n - state.sz * state.sz);
    MeanFieldDerivative { d_dipole, d_sz }
}

/// Analytic steady state at β = 2Ω/(NΓ).
///
/// Below threshold the dipole is phase-locked to the drive, ⟨S⁻⟩ = −iΩ/Γ,
/// and ⟨S_z⟩ = −(N/2)√(1 − β²) (the branch connected to the ground state).
/// At and above threshold ⟨S_z⟩ = 0 and ⟨S⁻⟩ = −iN/(2β).
pub fn mf_steady(beta: f64, n_atoms: f64) -> MeanFieldState {
    let half_n = 0.5 * n_atoms;
    if beta < 1.0 {
        MeanFieldState {
            dipole: C64::new(0.0, -beta * half_n),
            sz: -half_n * (1.0 - beta * beta).sqrt(),
            n_atoms,
        }
    } else {
        MeanFieldState { dipole: C64::new(0.0, -half_n / beta), sz: 0.0, n_atoms }
    }
}

/// Effective Rabi frequency inside the cloud, Ω_Eff = Ω − iΓ⟨S⁻⟩.
pub fn omega_eff(omega: f64, dipole: C64) -> C64 {
    omega - I * dipole
}

/// Drive at which β = 1 for `n_eff` atoms: Ω_c/Γ = Ñ/2.
pub fn critical_drive(n_eff: f64) -> f64 {
    0.5 * n_eff
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    BelowThreshold,
    AboveThreshold,
}

/// Root of the self-consistent screening equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreeningSolution {
    pub beta: f64,
    /// x = 2Ω_Eff/(NΓ).
    pub x: f64,
    pub branch: Branch,
    /// |f(x)| at the returned root.
    pub residual: f64,
}

/// f(x) = x² + (N²x²/2)/(1 + N²x²/2) − β², increasing on x ≥ 0.
pub fn screening_residual(x: f64, beta: f64, n_atoms: f64) -> f64 {
    let y = 0.5 * n_atoms * n_atoms * x * x;
    x * x + y / (1.0 + y) - beta * beta
}

fn screening_slope(x: f64, n_atoms: f64) -> f64 {
    let n2 = n_atoms * n_atoms;
    let y = 0.5 * n2 * x * x;
    2.0 * x + n2 * x / ((1.0 + y) * (1.0 + y))
}

/// Solves β² = x² + (N²x²/2)/(1 + N²x²/2) for x ∈ [0, β].
///
/// Bisection brackets the root and Newton polishes it.
pub fn solve_x(beta: f64, n_atoms: f64) -> Result<ScreeningSolution> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
    }
    if !(n_atoms >= 1.0) || !n_atoms.is_finite() {
        return Err(Error::InvalidParams(format!("n_atoms must be >= 1, got {n_atoms}")));
    }
    let f = |x: f64| screening_residual(x, beta, n_atoms);
    let (mut lo, mut hi) = (0.0, beta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 * hi {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / screening_slope(x, n_atoms);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
    }
    // Best of the final iterate and the bracket ends.
    let x = [x, lo, hi].into_iter().min_by(|a, b| f(*a).abs().total_cmp(&f(*b).abs())).unwrap_or(x);
    let branch = if beta < 1.0 { Branch::BelowThreshold } else { Branch::AboveThreshold };
    Ok(ScreeningSolution { beta, x, branch, residual: f(x).abs() })
}

/// Mean-field trajectory sampled at every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldState>,
}

fn mf_run(state0: &MeanFieldState, rabi: f64, t_final: f64, output: Output<'_>, opts: &OdeOptions) -> Result<MeanFieldTrajectory> {
    if !(state0.n_atoms > 0.0) || !rabi.is_finite() || rabi < 0.0 {
        return Err(Error::InvalidParams("mean-field run needs n_atoms > 0 and rabi >= 0".into()));
    }
    let n = state0.n_atoms;
    let y0 = [state0.dipole, C64::new(state0.sz, 0.0)];
    let sol = dopri5(
        |_, y, dy| {
            let st = MeanFieldState { dipole: y[0], sz: y[1].re, n_atoms: n };
            let d = mf_rhs(&st, rabi);
            dy[0] = d.d_dipole;
            dy[1] = C64::new(d.d_sz, 0.0);
        },
        0.0,
        &y0,
        t_final,
        output,
        opts,
    )?;
    let states = sol.states.iter().map(|y| MeanFieldState { dipole: y[0], sz: y[1].re, n_atoms: n }).collect();
    Ok(MeanFieldTrajectory { times: sol.times, states })
}

/// Integrates the mean-field equations to `t_final` with relative tolerance `tol`.
pub fn mf_evolve(state0: &MeanFieldState, rabi: f64, t_final: f64, tol: f64) -> Result<MeanFieldTrajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be positive, got {tol}")));
    }
    mf_run(state0, rabi, t_final, Output::EveryStep, &OdeOptions::with_tol(tol))
}

/// Mean-field trajectory sampled at `times` (starting from t = 0).
pub fn mf_evolve_sampled(state0: &MeanFieldState, rabi: f64, times: &[f64], opts: &OdeOptions) -> Result<MeanFieldTrajectory> {
    let t_final = *times.last().ok_or_else(|| Error::InvalidParams("no sample times".into()))?;
    mf_run(state0, rabi, t_final, Output::At(times), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn locked_dipole_has_no_drive() {
        let rabi = 1.7;
        for sz in [-3.0, 0.0, 2.5] {
            let st = MeanFieldState { dipole: C64::new(0.0, -rabi), sz, n_atoms: 10.0 };
            assert_eq!(mf_rhs(&st, rabi).d_dipole, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn superradiant_fixed_point() {
        let (n, beta) = (10.0, 2.0);
        let rabi = beta * n / 2.0;
        let st = MeanFieldState { dipole: C64::new(0.0, -n / (2.0 * beta)), sz: 0.0, n_atoms: n };
        let d = mf_rhs(&st, rabi);
        assert_eq!(d.d_dipole, C64::new(0.0, 0.0));
        assert_abs_diff_eq!(d.d_sz, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn undriven_ground_is_fixed() {
        let d = mf_rhs(&MeanFieldState::ground(12.0), 0.0);
        assert_eq!(d.d_dipole, C64::new(0.0, 0.0));
        assert_eq!(d.d_sz, 0.0);
    }

    #[test]
    fn steady_branches() {
        let c = mf_steady(1.0, 8.0);
        assert_eq!(c.dipole.norm(), 4.0);
        assert_eq!(c.sz, 0.0);
        let m = mf_steady(0.6, 10.0);
        assert_abs_diff_eq!(m.sz, -4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.dipole.norm(), 3.0, epsilon = 1e-14);
        let s = mf_steady(2.0, 10.0);
        assert_eq!(s.dipole, C64::new(0.0, -2.5));
        assert_eq!(s.sz, 0.0);
    }

    #[test]
    fn steady_states_are_fixed_points() {
        for n in [3.0, 10.0, 57.5] {
            for k in 1..60 {
                let beta = 0.05 * k as f64;
                let st = mf_steady(beta, n);
                let d = mf_rhs(&st, beta * n / 2.0);
                let scale = n * n;
                assert!(d.d_dipole.norm() < 1e-13 * scale, "{beta} {n} {d:?}");
                assert!(d.d_sz.abs() < 1e-13 * scale, "{beta} {n} {d:?}");
                assert!(st.spin_length_sq() <= 0.25 * n * n + 1e-9);
            }
        }
    }

    #[test]
    fn bloch_angle() {
        for beta in [0.1, 0.4, 0.75, 0.99] {
            let st = mf_steady(beta, 20.0);
            let tan = st.dipole.norm() / st.sz.abs();
            assert_abs_diff_eq!(tan, beta / (1.0 - beta * beta).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn effective_rabi() {
        assert_eq!(omega_eff(3.0, C64::new(0.0, -3.0)), C64::new(0.0, 0.0));
        assert_eq!(omega_eff(3.0, C64::new(0.0, 0.0)), C64::new(3.0, 0.0));
        let st = mf_steady(2.0, 10.0);
        assert_abs_diff_eq!(omega_eff(10.0, st.dipole).re, 7.5, epsilon = 1e-14);
    }

    #[test]
    fn critical_drive_values() {
        assert_eq!(critical_drive(10.0), 5.0);
        assert_eq!(critical_drive(7.0), 3.5);
        let n = 13.0;
        assert_eq!(2.0 * critical_drive(n) / n, 1.0);
    }

    #[test]
    fn screening_root_examples() {
        // Plain bisection oracle on [0, β].
        let bisect = |beta: f64, n: f64| {
            let (mut lo, mut hi) = (0.0f64, beta);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                let y = 0.5 * n * n * mid * mid;
                if mid * mid + y / (1.0 + y) < beta * beta {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let s = solve_x(2.0, 20.0).unwrap();
        assert!(s.residual < 1e-12);
        assert_abs_diff_eq!(s.x, bisect(2.0, 20.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.x, 1.7326, epsilon = 1e-4);
        assert!((s.x - 3f64.sqrt()).abs() < 1e-3);
        assert_eq!(s.branch, Branch::AboveThreshold);

        let s = solve_x(0.5, 1000.0).unwrap();
        assert!(s.residual < 1e-10);
        let small_x = 2f64.sqrt() * 0.5 / (1000.0 * 0.75f64.sqrt());
        assert!((s.x / small_x - 1.0).abs() < 1e-3, "{} vs {small_x}", s.x);
        assert_eq!(s.branch, Branch::BelowThreshold);

        let s = solve_x(1.5, 1e6).unwrap();
        assert!((s.x - 1.25f64.sqrt()).abs() < 1e-5);
        assert_eq!(solve_x(1.0, 5.0).unwrap().branch, Branch::AboveThreshold);
    }

    #[test]
    fn screening_rejects_bad_input() {
        assert!(solve_x(0.0, 10.0).is_err());
        assert!(solve_x(1.0, 0.5).is_err());
        assert!(solve_x(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn relaxes_to_magnetized_branch() {
        let (n, beta) = (50.0, 0.5);
        let rabi = beta * n / 2.0;
        let t_final = 20.0 / (n * beta) + 10.0;
        let traj = mf_evolve(&MeanFieldState::ground(n), rabi, t_final, 1e-10).unwrap();
        let end = traj.states.last().unwrap();
        let target = mf_steady(beta, n);
        assert!((end.dipole - target.dipole).norm() < 1e-6);
        assert!((end.sz - target.sz).abs() < 1e-6);
        for st in &traj.states {
            assert!((st.spin_length_sq() - 0.25 * n * n).abs() < 1e-6 * n * n);
        }
    }

    #[test]
    fn undriven_mean_field_is_constant() {
        let g = MeanFieldState::ground(9.0);
        let traj = mf_evolve(&g, 0.0, 5.0, 1e-8).unwrap();
        assert!(traj.states.iter().all(|s| *s == g));
    }
}
