//! Exact steady state of the collective master equation.
//!
//! The Liouvillian is assembled as a sparse superoperator over the flat index
//! `j·(N+1) + i` of ρ_{ij}, which gives it a bandwidth of N + 2. The equation
//! for ρ_{−S,−S} is linearly dependent on the other population equations
//! (trace preservation), so it is replaced by the pin ρ_{−S,−S} = 1. The
//! banded system is then solved directly and the solution rescaled to unit
//! trace.

use num_complex::Complex64 as C64;

use crate::banded::{BandedLu, BandedMatrix};
use crate::dynamics::evolve_sampled;
use crate::error::{Error, Result};
use crate::integrate::OdeOptions;
use crate::ladder::{for_each_liouvillian_entry, ladder_coeffs, rhs_flat, DickeLadderState};
use crate::params::ModelParams;

/// Largest atom number accepted by [`steady_state`]. The banded factorization
/// needs about `16·(N+1)²·(3N+7)` bytes (≈ 0.4 GB at the bound).
pub const MAX_STEADY_ATOMS: usize = 200;

/// Required max-norm of dρ/dt at the returned state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

// Pivot ratio below which the pinned system is treated as singular, meaning
// the Liouvillian has more than one stationary state.
const DEGENERATE_PIVOT_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Direct banded solve (with iterative refinement).
    Direct,
    /// Long-time integration after the direct solve missed the tolerance.
    Integrated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: DickeLadderState,
    /// max |dρ/dt| at `state`.
    pub residual: f64,
    pub method: SteadyMethod,
}

/// The unique stationary state of the driven collective spin.
pub fn steady_state(params: &ModelParams) -> Result<DickeLadderState> {
    steady_state_report(params).map(|s| s.state)
}

/// Like [`steady_state`] but also reports the residual and the method used.
pub fn steady_state_report(params: &ModelParams) -> Result<SteadyState> {
    params.validate()?;
    if params.n_atoms > MAX_STEADY_ATOMS {
        return Err(Error::Capacity(format!(
            "steady state supports N <= {MAX_STEADY_ATOMS}, got {}",
            params.n_atoms
        )));
    }
    let d = params.n_levels();
    let dim = d * d;
    let mut matrix = BandedMatrix::zeros(dim, d + 1, d + 1);
    for_each_liouvillian_entry(params, |r, c, v| {
        if r != 0 {
            matrix.add(r, c, v);
        }
    });
    let (lu, mut x) = pinned_null_vector(matrix, dim)?;
    normalize(&mut x, d);
    let a = ladder_coeffs(params.n_atoms);

    let mut deriv = vec![C64::new(0.0, 0.0); dim];
    let mut residual = f64::INFINITY;
    for _ in 0..4 {
        rhs_flat(&a, params, &x, &mut deriv);
        residual = max_norm(&deriv);
        if residual < STEADY_RESIDUAL_TOL {
            break;
        }
        // Newton-type refinement: solve L δ = −L x with the pin row δ_0 = 0.
        let mut delta: Vec<C64> = deriv.iter().map(|v| -v).collect();
        delta[0] = C64::new(0.0, 0.0);
        lu.solve(&mut delta);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        normalize(&mut x, d);
    }
    if residual < STEADY_RESIDUAL_TOL {
        let state = DickeLadderState::from_column_slice(params.n_atoms, &x);
        return Ok(SteadyState { state, residual, method: SteadyMethod::Direct });
    }

    // Fallback: relax from the best direct estimate.
    let beta = params.beta().max(1e-3);
    let t_relax = 50.0 / (beta * params.gamma * params.n_atoms as f64) + 20.0 / params.gamma;
    let start = DickeLadderState::from_column_slice(params.n_atoms, &x);
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..OdeOptions::default() };
    let traj = evolve_sampled(&start, params, &[t_relax], &opts)?;
    let mut x = traj.last().rho().as_slice().to_vec();
    normalize(&mut x, d);
    rhs_flat(&a, params, &x, &mut deriv);
    let residual = max_norm(&deriv);
    if residual < STEADY_RESIDUAL_TOL {
        let state = DickeLadderState::from_column_slice(params.n_atoms, &x);
        Ok(SteadyState { state, residual, method: SteadyMethod::Integrated })
    } else {
        Err(Error::SteadyStateResidual { residual, tolerance: STEADY_RESIDUAL_TOL })
    }
}

/// Solves the generator with its row 0 replaced by the pin x_0 = 1.
fn pinned_null_vector(mut matrix: BandedMatrix, dim: usize) -> Result<(BandedLu, Vec<C64>)> {
    matrix.set_unit_row(0);
    let lu = matrix.factor();
    if lu.pivot_ratio() < DEGENERATE_PIVOT_RATIO {
        return Err(Error::DegenerateNullSpace);
    }
    let mut x = vec![C64::new(0.0, 0.0); dim];
    x[0] = C64::new(1.0, 0.0);
    lu.solve(&mut x);
    Ok((lu, x))
}

/// Unit trace and exact Hermiticity.
fn normalize(x: &mut [C64], d: usize) {
    let trace: C64 = (0..d).map(|i| x[i * d + i]).sum();
    for v in x.iter_mut() {
        *v /= trace;
    }
    for j in 0..d {
        for i in 0..j {
            let avg = 0.5 * (x[j * d + i] + x[i * d + j].conj());
            x[j * d + i] = avg;
            x[i * d + j] = avg.conj();
        }
        x[j * d + j].im = 0.0;
    }
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
