//! Cooperativity of a Gaussian pencil-shaped cloud with its forward
//! diffraction mode.
//!
//! Lengths are in units of the wavelength λ, so k = 2π. The cloud is
//! elongated along x̂ and driven along the same axis. The fraction of
//! single-atom power scattered coherently into the forward lobe defines
//! μ, and Ñ = Nμ is the effective atom number of the collective model.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadResult};

/// Wavenumber in units of 1/λ.
pub const WAVENUMBER: f64 = 2.0 * PI;

/// ∫ dΩ I₁ over the full sphere.
pub const SINGLE_DIPOLE_POWER: f64 = 8.0 * PI / 3.0;

/// Default relative accuracy of [`coherent_power`].
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudGeometry {
    /// r.m.s. size along the cloud axis x̂.
    pub ell_ax: f64,
    /// r.m.s. size along ŷ and ẑ.
    pub ell_rad: f64,
    /// Propagation direction of the drive.
    pub drive_axis: [f64; 3],
}

impl CloudGeometry {
    pub fn new(ell_ax: f64, ell_rad: f64) -> Result<Self> {
        let g = Self { ell_ax, ell_rad, drive_axis: [1.0, 0.0, 0.0] };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell_ax > 0.0 && self.ell_ax.is_finite()) || !(self.ell_rad > 0.0 && self.ell_rad.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "cloud sizes must be positive, got ell_ax = {}, ell_rad = {}",
                self.ell_ax, self.ell_rad
            )));
        }
        let norm = self.drive_axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("drive axis must be a unit vector (norm {norm})")));
        }
        Ok(())
    }

    fn is_axial(&self) -> bool {
        (self.drive_axis[0].abs() - 1.0).abs() <= 1e-12
    }
}

/// Emission pattern of a circular dipole with quantization axis x̂,
/// I₁(φ, θ) = (1 + cos²φ sin²θ)/2, where k̂ = (cosθ, sinθ cosφ, sinθ sinφ).
pub fn dipole_pattern(theta: f64, phi: f64) -> f64 {
    let s = theta.sin();
    let c = phi.cos();
    0.5 * (1.0 + c * c * s * s)
}

/// |∫ d³r ρ(r) e^{iq·r}|² for the Gaussian density, q = k − k_L.
pub fn structure_factor(q: [f64; 3], geom: &CloudGeometry) -> f64 {
    let ax = q[0] * geom.ell_ax;
    let rad2 = (q[1] * q[1] + q[2] * q[2]) * geom.ell_rad * geom.ell_rad;
    (-(ax * ax) - rad2).exp()
}

/// Power scattered coherently into the forward lobe (same normalization as
/// [`SINGLE_DIPOLE_POWER`]), integrated over the polar angle θ measured from
/// the drive axis. The azimuthal integral is done analytically.
///
/// The substitution u = 1 − cosθ maps the forward lobe of width
/// ~1/(kℓ_ax)² onto the start of [0, 2].
pub fn coherent_power(geom: &CloudGeometry) -> Result<QuadResult> {
    coherent_power_with_tol(geom, DEFAULT_REL_TOL)
}

pub fn coherent_power_with_tol(geom: &CloudGeometry, rel_tol: f64) -> Result<QuadResult> {
    geom.validate()?;
    if !geom.is_axial() {
        return Err(Error::InvalidParams("only a drive along the cloud axis is supported".into()));
    }
    let k = WAVENUMBER;
    let integrand = |u: f64| {
        let sin2 = (u * (2.0 - u)).max(0.0);
        let q = [-k * u, k * sin2.sqrt(), 0.0];
        PI * (1.0 + 0.5 * sin2) * structure_factor(q, geom)
    };
    integrate(integrand, 0.0, 2.0, 0.0, rel_tol, 10_000)
}

/// μ = P_coh / P₁.
pub fn cooperativity_mu(geom: &CloudGeometry) -> Result<f64> {
    Ok(coherent_power(geom)?.value / SINGLE_DIPOLE_POWER)
}

/// Order-of-magnitude estimate μ ≈ λ/(2πℓ_ax).
pub fn small_angle_mu(geom: &CloudGeometry) -> f64 {
    1.0 / (WAVENUMBER * geom.ell_ax)
}
