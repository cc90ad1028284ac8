//! The permutation-symmetric Dicke ladder |S = N/2, m⟩, m = −S, …, S.
//!
//! Density matrices are stored densely with storage index `i = m + S`, so
//! `i = 0` is the ground state |S, −S⟩ (all atoms in |g⟩) and `i = N` the
//! fully inverted state.
//!
//! Collective operators act as
//!
//! ```text
//! S⁺|S,m⟩ = A_m |S,m+1⟩,    S⁻|S,m⟩ = A_{m-1} |S,m-1⟩,
//! A_m = sqrt(S(S+1) − m(m+1)).
//! ```

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::ModelParams;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Ladder coefficient A_m = sqrt(S(S+1) − m(m+1)) for half-integer `s` and `m`.
pub fn coupling_coeff(s: f64, m: f64) -> Result<f64> {
    let two_s = 2.0 * s;
    let valid_s = s > 0.0 && two_s.fract() == 0.0;
    let valid_m = (s - m).fract() == 0.0 && m >= -s && m <= s;
    if !valid_s || !valid_m {
        return Err(Error::Domain { s, m });
    }
    Ok((s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt())
}

/// A_{m_i} for every storage index `i`; the last entry (m = S) is zero.
pub(crate) fn ladder_coeffs(n_atoms: usize) -> Vec<f64> {
    let s = n_atoms as f64 / 2.0;
    (0..=n_atoms)
        .map(|i| {
            let m = i as f64 - s;
            (s * (s + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
        })
        .collect()
}

/// Density matrix restricted to the symmetric sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeLadderState {
    n_atoms: usize,
    rho: DMatrix<C64>,
}

/// Numerical health of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    /// |Tr ρ − 1|.
    pub trace_error: f64,
    /// max |ρ_ij − conj(ρ_ji)|.
    pub hermiticity_error: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl DickeLadderState {
    /// |S, −S⟩⟨S, −S|: every atom in the ground state.
    pub fn ground(n_atoms: usize) -> Result<Self> {
        Self::dicke(n_atoms, 0)
    }

    /// Projector onto the Dicke state with `excitations` atoms excited,
    /// i.e. m = excitations − S.
    pub fn dicke(n_atoms: usize, excitations: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
        }
        if excitations > n_atoms {
            return Err(Error::Domain { s: n_atoms as f64 / 2.0, m: excitations as f64 - n_atoms as f64 / 2.0 });
        }
        let d = n_atoms + 1;
        let mut rho = DMatrix::zeros(d, d);
        rho[(excitations, excitations)] = C64::new(1.0, 0.0);
        Ok(Self { n_atoms, rho })
    }

    /// Wraps an (N+1)×(N+1) matrix. No positivity or trace check is made;
    /// see [`DickeLadderState::diagnostics`].
    pub fn from_matrix(n_atoms: usize, rho: DMatrix<C64>) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
        }
        let d = n_atoms + 1;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows().max(rho.ncols()) });
        }
        Ok(Self { n_atoms, rho })
    }

    pub(crate) fn from_column_slice(n_atoms: usize, data: &[C64]) -> Self {
        let d = n_atoms + 1;
        Self { n_atoms, rho: DMatrix::from_column_slice(d, d, data) }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_levels(&self) -> usize {
        self.n_atoms + 1
    }

    /// Collective spin length S = N/2.
    pub fn spin(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn rho(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Diagonal populations ρ_{m,m}, ground state first.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_levels()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let d = self.n_levels();
        let mut herm = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                herm = herm.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        let hermitian_part = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        let min_eigenvalue = SymmetricEigen::new(hermitian_part).eigenvalues.min();
        StateDiagnostics {
            trace_error: (self.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity_error: herm,
            min_eigenvalue,
        }
    }
}

/// dρ/dt of the collective Lindblad equation on flat column-major storage.
///
/// ```text
/// dρ_{m,m'}/dt = −i(Ω/2)(A_{m−1}ρ_{m−1,m'} + A_m ρ_{m+1,m'} − A_{m'−1}ρ_{m,m'−1} − A_{m'}ρ_{m,m'+1})
///              + (Γ/2)(2A_m A_{m'} ρ_{m+1,m'+1} − (A²_{m−1} + A²_{m'−1}) ρ_{m,m'})
///              + iΔ(m − m') ρ_{m,m'}
/// ```
pub(crate) fn rhs_flat(a: &[f64], params: &ModelParams, rho: &[C64], out: &mut [C64]) {
    let d = a.len();
    let half_rabi = 0.5 * params.rabi;
    let half_gamma = 0.5 * params.gamma;
    let at = |i: usize, j: usize| rho[j * d + i];
    // A_{m-1} for storage index i; zero below the ladder.
    let a_below = |i: usize| if i == 0 { 0.0 } else { a[i - 1] };
    for j in 0..d {
        for i in 0..d {
            let mut drive = C64::new(0.0, 0.0);
            if i > 0 {
                drive += a[i - 1] * at(i - 1, j);
            }
            if i + 1 < d {
                drive += a[i] * at(i + 1, j);
            }
            if j > 0 {
                drive -= a[j - 1] * at(i, j - 1);
            }
            if j + 1 < d {
                drive -= a[j] * at(i, j + 1);
            }
            let mut decay = -(a_below(i).powi(2) + a_below(j).powi(2)) * at(i, j);
            if i + 1 < d && j + 1 < d {
                decay += 2.0 * a[i] * a[j] * at(i + 1, j + 1);
            }
            let mut value = -I * half_rabi * drive + half_gamma * decay;
            if params.detuning != 0.0 {
                value += I * params.detuning * (i as f64 - j as f64) * at(i, j);
            }
            out[j * d + i] = value;
        }
    }
}

/// Visits every non-zero entry of the Liouvillian superoperator as
/// `(row, col, coefficient)` in the flat column-major index `j·d + i`.
pub(crate) fn for_each_liouvillian_entry(params: &ModelParams, mut visit: impl FnMut(usize, usize, C64)) {
    let a = ladder_coeffs(params.n_atoms);
    let d = a.len();
    let idx = |i: usize, j: usize| j * d + i;
    let drive = -I * (0.5 * params.rabi);
    let half_gamma = 0.5 * params.gamma;
    for j in 0..d {
        for i in 0..d {
            let row = idx(i, j);
            if i > 0 {
                visit(row, idx(i - 1, j), drive * a[i - 1]);
            }
            if i + 1 < d {
                visit(row, idx(i + 1, j), drive * a[i]);
            }
            if j > 0 {
                visit(row, idx(i, j - 1), -drive * a[j - 1]);
            }
            if j + 1 < d {
                visit(row, idx(i, j + 1), -drive * a[j]);
            }
            if i + 1 < d && j + 1 < d {
                visit(row, idx(i + 1, j + 1), C64::new(2.0 * half_gamma * a[i] * a[j], 0.0));
            }
            let below = |k: usize| if k == 0 { 0.0 } else { a[k - 1] * a[k - 1] };
            let diag = C64::new(-half_gamma * (below(i) + below(j)), params.detuning * (i as f64 - j as f64));
            visit(row, row, diag);
        }
    }
}

/// Time derivative dρ/dt of the driven-dissipative collective spin.
pub fn liouvillian_rhs(state: &DickeLadderState, params: &ModelParams) -> Result<DMatrix<C64>> {
    params.validate()?;
    if state.n_levels() != params.n_levels() {
        return Err(Error::DimensionMismatch { expected: params.n_levels(), found: state.n_levels() });
    }
    let d = state.n_levels();
    let a = ladder_coeffs(state.n_atoms);
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    rhs_flat(&a, params, state.rho.as_slice(), &mut out);
    Ok(DMatrix::from_column_slice(d, d, &out))
}

/// Collective observables of a ladder state (Γ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    /// ⟨S_z⟩/S; −1 in the ground state.
    pub s_z: f64,
    /// Excited fraction (s_z + 1)/2.
    pub n_e: f64,
    /// ⟨S⁻⟩.
    pub dipole: C64,
    /// Γ⟨S⁺S⁻⟩.
    pub gamma_sr: f64,
    /// ⟨S⁺S⁺S⁻S⁻⟩.
    pub g2_numerator: f64,
}

impl ObservableSet {
    /// g²(0) = ⟨S⁺S⁺S⁻S⁻⟩ / ⟨S⁺S⁻⟩².
    ///
    /// With Ñ = Nμ standing in for an extended cloud this is only indicative:
    /// the reduction is built to reproduce mean emission, not photon statistics.
    pub fn g2(&self) -> Result<f64> {
        if self.gamma_sr < 1e-14 {
            return Err(Error::UndefinedCorrelation { denominator: self.gamma_sr });
        }
        Ok(self.g2_numerator / (self.gamma_sr * self.gamma_sr))
    }
}

pub fn observables(state: &DickeLadderState) -> ObservableSet {
    let d = state.n_levels();
    let s = state.spin();
    let a = ladder_coeffs(state.n_atoms);
    let rho = &state.rho;
    let mut sz = 0.0;
    let mut dipole = C64::new(0.0, 0.0);
    let mut pm = 0.0;
    let mut ppmm = 0.0;
    for i in 0..d {
        let p = rho[(i, i)].re;
        sz += (i as f64 - s) * p;
        if i >= 1 {
            let a1 = a[i - 1];
            dipole += a1 * rho[(i, i - 1)];
            pm += a1 * a1 * p;
            if i >= 2 {
                ppmm += a1 * a1 * a[i - 2] * a[i - 2] * p;
            }
        }
    }
    let s_z = sz / s;
    ObservableSet { s_z, n_e: 0.5 * (s_z + 1.0), dipole, gamma_sr: pm, g2_numerator: ppmm }
}

/// Equal-time second-order correlation g²(0) of the collectively emitted light.
pub fn g2_zero(state: &DickeLadderState) -> Result<f64> {
    observables(state).g2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coupling_coeff_values() {
        assert_eq!(coupling_coeff(1.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(coupling_coeff(1.0, 0.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(coupling_coeff(5.0, -5.0).unwrap(), 10f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(coupling_coeff(0.5, -0.5).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coupling_coeff_domain() {
        assert!(coupling_coeff(1.0, 2.0).is_err());
        assert!(coupling_coeff(1.0, 0.5).is_err());
        assert!(coupling_coeff(0.75, 0.25).is_err());
        assert!(coupling_coeff(1.5, -2.5).is_err());
    }

    #[test]
    fn dark_ground_state() {
        let p = ModelParams::new(6, 0.0).unwrap();
        let g = DickeLadderState::ground(6).unwrap();
        let rhs = liouvillian_rhs(&g, &p).unwrap();
        assert!(rhs.iter().all(|z| z.norm() == 0.0));
        let driven = ModelParams::new(6, 0.3).unwrap();
        let rhs = liouvillian_rhs(&g, &driven).unwrap();
        assert!(rhs.iter().any(|z| z.norm() > 0.1));
    }

    #[test]
    fn dimension_mismatch() {
        let p = ModelParams::new(4, 1.0).unwrap();
        let g = DickeLadderState::ground(3).unwrap();
        assert!(matches!(liouvillian_rhs(&g, &p), Err(Error::DimensionMismatch { .. })));
        assert!(DickeLadderState::from_matrix(3, DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn ground_observables() {
        let g = DickeLadderState::ground(8).unwrap();
        let o = observables(&g);
        assert_eq!(o.s_z, -1.0);
        assert_eq!(o.n_e, 0.0);
        assert_eq!(o.dipole, C64::new(0.0, 0.0));
        assert_eq!(o.gamma_sr, 0.0);
        assert!(matches!(g2_zero(&g), Err(Error::UndefinedCorrelation { .. })));
    }

    #[test]
    fn single_excitation_is_superradiant_and_antibunched() {
        for n in 1..12 {
            let w = DickeLadderState::dicke(n, 1).unwrap();
            let o = observables(&w);
            assert_abs_diff_eq!(o.gamma_sr, n as f64, epsilon = 1e-12);
            assert_eq!(g2_zero(&w).unwrap(), 0.0);
        }
    }

    #[test]
    fn uniform_diagonal_rate() {
        let n = 10;
        let d = n + 1;
        let rho = DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        let st = DickeLadderState::from_matrix(n, rho).unwrap();
        let o = observables(&st);
        assert_abs_diff_eq!(o.gamma_sr, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.s_z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn diagnostics_of_pure_state() {
        let d = DickeLadderState::dicke(5, 2).unwrap().diagnostics();
        assert_eq!(d.trace_error, 0.0);
        assert_eq!(d.hermiticity_error, 0.0);
        assert!(d.min_eigenvalue.abs() < 1e-14);
    }
}
