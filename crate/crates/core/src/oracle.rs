//! Brute-force reference: the collective master equation on the full 2^N
//! tensor-product space, with no use of permutation symmetry.
//!
//! Basis index bit i set means atom i is excited. Everything here is dense
//! and deliberately naive; it exists to check the ladder reduction.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ladder::{DickeLadderState, ObservableSet};
use crate::params::ModelParams;

/// Largest atom number the oracle accepts (Hilbert dimension 16).
pub const MAX_ORACLE_ATOMS: usize = 4;

type Mat = DMatrix<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_atoms(n_atoms: usize) -> Result<()> {
    if n_atoms == 0 {
        return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
    }
    if n_atoms > MAX_ORACLE_ATOMS {
        return Err(Error::Capacity(format!("oracle supports N <= {MAX_ORACLE_ATOMS}, got {n_atoms}")));
    }
    Ok(())
}

/// Single-atom lowering operator |g⟩⟨e| in the basis (g, e).
fn sigma_minus() -> Mat {
    let mut m = Mat::zeros(2, 2);
    m[(0, 1)] = c(1.0);
    m
}

/// `op` acting on atom `site`, identity elsewhere. Atom 0 is the least
/// significant bit, so it is the rightmost Kronecker factor.
fn embed(op: &Mat, site: usize, n_atoms: usize) -> Mat {
    let id = Mat::identity(2, 2);
    let mut out = Mat::identity(1, 1);
    for k in (0..n_atoms).rev() {
        out = if k == site { out.kronecker(op) } else { out.kronecker(&id) };
    }
    out
}

/// Collective lowering operator S⁻ = Σᵢ σᵢ⁻.
pub fn collective_lowering(n_atoms: usize) -> Result<Mat> {
    check_atoms(n_atoms)?;
    let dim = 1usize << n_atoms;
    let sm = sigma_minus();
    Ok((0..n_atoms).fold(Mat::zeros(dim, dim), |acc, i| acc + embed(&sm, i, n_atoms)))
}

/// Σᵢ |e⟩⟨e|ᵢ.
fn excitation_number(n_atoms: usize) -> Mat {
    let dim = 1usize << n_atoms;
    let mut pe = Mat::zeros(2, 2);
    pe[(1, 1)] = c(1.0);
    (0..n_atoms).fold(Mat::zeros(dim, dim), |acc, i| acc + embed(&pe, i, n_atoms))
}

/// Density matrix on the full tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    n_atoms: usize,
    rho: Mat,
}

impl FullState {
    pub fn ground(n_atoms: usize) -> Result<Self> {
        check_atoms(n_atoms)?;
        let dim = 1usize << n_atoms;
        let mut rho = Mat::zeros(dim, dim);
        rho[(0, 0)] = c(1.0);
        Ok(Self { n_atoms, rho })
    }

    /// Pure state |ψ⟩⟨ψ|; `psi` is normalized here.
    pub fn pure(n_atoms: usize, psi: &[C64]) -> Result<Self> {
        check_atoms(n_atoms)?;
        let dim = 1usize << n_atoms;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParams("zero state vector".into()));
        }
        let v = v / c(norm);
        Ok(Self { n_atoms, rho: &v * v.adjoint() })
    }

    pub fn from_matrix(n_atoms: usize, rho: Mat) -> Result<Self> {
        check_atoms(n_atoms)?;
        let dim = 1usize << n_atoms;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: rho.nrows().max(rho.ncols()) });
        }
        Ok(Self { n_atoms, rho })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn rho(&self) -> &Mat {
        &self.rho
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * c(0.5);
        h.symmetric_eigenvalues().min()
    }
}

/// Collective operators and Hamiltonian for one parameter set.
struct Operators {
    sm: Mat,
    sp: Mat,
    sp_sm: Mat,
    ham: Mat,
}

impl Operators {
    fn new(n_atoms: usize, params: &ModelParams) -> Result<Self> {
        let sm = collective_lowering(n_atoms)?;
        let sp = sm.adjoint();
        let sp_sm = &sp * &sm;
        let ham = (&sp + &sm) * c(0.5 * params.rabi) - excitation_number(n_atoms) * c(params.detuning);
        Ok(Self { sm, sp, sp_sm, ham })
    }

    fn rhs(&self, rho: &Mat, gamma: f64) -> Mat {
        let i = C64::i();
        let comm = &self.ham * rho - rho * &self.ham;
        let jump = &self.sm * rho * &self.sp;
        let anti = &self.sp_sm * rho + rho * &self.sp_sm;
        comm * (-i) + (jump - anti * c(0.5)) * c(gamma)
    }
}

/// dρ/dt = −i[H, ρ] + Γ(S⁻ρS⁺ − ½{S⁺S⁻, ρ}) with H = (Ω/2)(S⁺ + S⁻) − Δ Σᵢ|e⟩⟨e|ᵢ.
pub fn full_lindblad_rhs(state: &FullState, params: &ModelParams) -> Result<Mat> {
    params.validate()?;
    if params.n_atoms != state.n_atoms {
        return Err(Error::DimensionMismatch { expected: params.n_atoms, found: state.n_atoms });
    }
    Ok(Operators::new(state.n_atoms, params)?.rhs(&state.rho, params.gamma))
}

/// Fixed-step classical RK4, sampled at `times` (which must start at or after
/// 0 and increase). Step size is at most `h`.
pub fn full_evolve(state0: &FullState, params: &ModelParams, times: &[f64], h: f64) -> Result<Vec<FullState>> {
    params.validate()?;
    if params.n_atoms != state0.n_atoms {
        return Err(Error::DimensionMismatch { expected: params.n_atoms, found: state0.n_atoms });
    }
    if !(h > 0.0) || times.iter().any(|t| *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("times must be non-negative and sorted, h > 0".into()));
    }
    let ops = Operators::new(state0.n_atoms, params)?;
    let g = params.gamma;
    let mut rho = state0.rho.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let steps = (span / h).ceil() as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            for _ in 0..steps {
                let k1 = ops.rhs(&rho, g);
                let k2 = ops.rhs(&(&rho + &k1 * c(dt / 2.0)), g);
                let k3 = ops.rhs(&(&rho + &k2 * c(dt / 2.0)), g);
                let k4 = ops.rhs(&(&rho + &k3 * c(dt)), g);
                rho += (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0);
            }
        }
        t = target;
        out.push(FullState { n_atoms: state0.n_atoms, rho: rho.clone() });
    }
    Ok(out)
}

/// Collective observables computed as traces against the explicit operators.
pub fn full_observables(state: &FullState) -> Result<ObservableSet> {
    let n = state.n_atoms;
    let sm = collective_lowering(n)?;
    let sp = sm.adjoint();
    let s = n as f64 / 2.0;
    let sz = excitation_number(n) - Mat::identity(1 << n, 1 << n) * c(s);
    let rho = &state.rho;
    let s_z = (rho * sz).trace().re / s;
    Ok(ObservableSet {
        s_z,
        n_e: 0.5 * (s_z + 1.0),
        dipole: (rho * &sm).trace(),
        gamma_sr: (rho * &sp * &sm).trace().re,
        g2_numerator: (rho * &sp * &sp * &sm * &sm).trace().re,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Symmetric Dicke vector with `k` excitations: equal-weight superposition
/// of all basis states with k bits set.
pub fn dicke_vector(n_atoms: usize, k: usize) -> Result<Vec<C64>> {
    check_atoms(n_atoms)?;
    if k > n_atoms {
        return Err(Error::Domain { s: n_atoms as f64 / 2.0, m: k as f64 - n_atoms as f64 / 2.0 });
    }
    let amp = 1.0 / binomial(n_atoms, k).sqrt();
    Ok((0..1usize << n_atoms).map(|b| if b.count_ones() as usize == k { c(amp) } else { c(0.0) }).collect())
}

/// Restriction to the symmetric sector, ρ_ladder[k, k'] = ⟨D_k|ρ|D_k'⟩, and
/// the leakage 1 − Tr ρ_ladder.
pub fn project_to_ladder(state: &FullState) -> Result<(DickeLadderState, f64)> {
    let n = state.n_atoms;
    let dim = 1usize << n;
    let mut basis = Mat::zeros(dim, n + 1);
    for k in 0..=n {
        basis.set_column(k, &nalgebra::DVector::from_vec(dicke_vector(n, k)?));
    }
    let reduced = basis.adjoint() * &state.rho * &basis;
    let leakage = 1.0 - reduced.trace().re;
    Ok((DickeLadderState::from_matrix(n, reduced)?, leakage))
}
