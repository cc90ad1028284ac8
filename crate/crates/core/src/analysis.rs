//! Single-atom reference solution and the fits used to compare collective
//! traces against it.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lm;

/// Default Γ/2π in MHz used to translate laboratory durations.
pub const DEFAULT_GAMMA_MHZ: f64 = 6.0;

/// Averaging window before the end of a pulse, in nanoseconds.
pub const STEADY_WINDOW_NS: f64 = 50.0;

const MAX_FIT_ITERATIONS: usize = 400;

/// Converts a laboratory duration in ns to units of 1/Γ, with Γ = 2π·`gamma_mhz` MHz.
pub fn ns_to_gamma_units(ns: f64, gamma_mhz: f64) -> f64 {
    ns * 1e-9 * 2.0 * std::f64::consts::PI * gamma_mhz * 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Excited fraction n_e ∈ [0, 1].
    Population,
    /// γ_SR ≥ 0.
    EmissionRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    times: Vec<f64>,
    values: Vec<f64>,
    kind: TraceKind,
}

impl TimeTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kind: TraceKind) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        if times.is_empty() {
            return Err(Error::InvalidTrace("trace is empty".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace("trace contains non-finite entries".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrace("times must be strictly increasing".into()));
        }
        let slack = 1e-9;
        let in_range = match kind {
            TraceKind::Population => values.iter().all(|&v| (-slack..=1.0 + slack).contains(&v)),
            TraceKind::EmissionRate => values.iter().all(|&v| v >= -slack),
        };
        if !in_range {
            return Err(Error::InvalidTrace(format!("values out of range for {kind:?} trace")));
        }
        Ok(Self { times, values, kind })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }
}

/// (cos ωt, sin(ωt)/ω) as functions of w = ω², continued to w < 0
/// (hyperbolic) and expanded in series around w = 0. The cosine part is
/// scaled by `e^{-a t}`, combined before exponentiating to avoid overflow.
fn damped_cos_sinc(w: f64, t: f64, a: f64) -> (f64, f64) {
    let z = w * t * t;
    if z.abs() < 1e-3 {
        let (mut c, mut s) = (0.0, 0.0);
        let mut term = 1.0;
        for k in 0..10 {
            let kk = k as f64;
            if k > 0 {
                term *= -z / ((2.0 * kk - 1.0) * (2.0 * kk));
            }
            c += term;
            s += term / (2.0 * kk + 1.0);
        }
        let damp = (-a * t).exp();
        return (damp * c, damp * s * t);
    }
    if w > 0.0 {
        let om = w.sqrt();
        let damp = (-a * t).exp();
        (damp * (om * t).cos(), damp * (om * t).sin() / om)
    } else {
        let kappa = (-w).sqrt();
        let grow = ((kappa - a) * t).exp();
        let decay = (-(kappa + a) * t).exp();
        (0.5 * (grow + decay), 0.5 * (grow - decay) / kappa)
    }
}

/// Excited-state population of a resonantly driven two-level atom starting
/// in the ground state:
///
/// n_e(t) = n∞ [1 − e^{−3Γt/4} (cos Ω't + (3Γ/4Ω') sin Ω't)],
/// Ω' = √(Ω² − Γ²/16), n∞ = Ω²/(Γ² + 2Ω²).
///
/// Below Ω = Γ/4 the frequency is imaginary and the oscillation turns into
/// an overdamped approach.
pub fn obe_excited_population(omega: f64, gamma: f64, t: f64) -> f64 {
    let n_inf = omega * omega / (gamma * gamma + 2.0 * omega * omega);
    let w = omega * omega - gamma * gamma / 16.0;
    let a = 0.75 * gamma;
    let (c, s) = damped_cos_sinc(w, t, a);
    (n_inf * (1.0 - c - a * s)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub omega_eff: f64,
    pub decay: f64,
    pub residual_rms: f64,
    /// Parameter covariance in the order (omega_eff, decay).
    pub covariance: [[f64; 2]; 2],
    pub iterations: usize,
}

fn first_peak_time(trace: &TimeTrace) -> Option<f64> {
    let v = &trace.values;
    let range = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    (1..v.len() - 1)
        .find(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] - v[i + 1..].iter().cloned().fold(v[i], f64::min) > 1e-3 * range)
        .map(|i| trace.times[i] - trace.times[0])
}

fn psd_covariance(jtj: &DMatrix<f64>, sigma2: f64) -> [[f64; 2]; 2] {
    let eig = SymmetricEigen::new(jtj.clone());
    let scale = eig.eigenvalues.amax();
    let mut inv = DMatrix::<f64>::zeros(2, 2);
    for k in 0..2 {
        let lam = eig.eigenvalues[k];
        if lam > 1e-14 * scale && lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / lam;
        }
    }
    let off = 0.5 * (inv[(0, 1)] + inv[(1, 0)]) * sigma2;
    [[inv[(0, 0)] * sigma2, off], [off, inv[(1, 1)] * sigma2]]
}

/// Least-squares fit of `obe_excited_population(Ω_f, γ_f, t − t₀)` to a
/// population trace, with t₀ the first sample time. Ω_f and γ_f are both
/// free. Several starting points are tried (the first-peak estimate
/// Ω₀ = π/t_peak with γ₀ = Γ, the saturation estimate and a coarse grid) and
/// the lowest minimum is kept.
pub fn fit_omega_eff(trace: &TimeTrace) -> Result<FitResult> {
    if trace.kind != TraceKind::Population {
        return Err(Error::InvalidTrace("fit_omega_eff needs a population trace".into()));
    }
    if trace.len() < 10 {
        return Err(Error::InvalidTrace(format!("need at least 10 samples, got {}", trace.len())));
    }
    if trace.span() < 1.0 {
        return Err(Error::InvalidTrace(format!("trace spans {} < 1/Γ", trace.span())));
    }
    let v = &trace.values;
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min < 1e-6 {
        return Err(Error::Underdetermined(format!("trace is flat (range {:.3e})", max - min)));
    }

    let t0 = trace.times[0];
    let residuals = |p: &[f64]| -> Option<Vec<f64>> {
        if !(p[1] > 0.0) || !p[0].is_finite() || p[1] > 1e6 {
            return None;
        }
        Some(trace.times.iter().zip(v).map(|(t, y)| obe_excited_population(p[0].abs(), p[1], t - t0) - y).collect())
    };
    let cost = |p: &[f64]| residuals(p).map(|r| r.iter().map(|x| x * x).sum::<f64>()).unwrap_or(f64::INFINITY);

    let mut starts: Vec<[f64; 2]> = Vec::new();
    if let Some(tp) = first_peak_time(trace) {
        starts.push([std::f64::consts::PI / tp, 1.0]);
    }
    let last = v[v.len() - 1];
    if last > 0.0 && last < 0.49 {
        starts.push([(last / (1.0 - 2.0 * last)).sqrt(), 1.0]);
    }
    starts.push([1.0, 1.0]);
    let mut grid: Vec<([f64; 2], f64)> = Vec::new();
    for i in 0..14 {
        let om = 0.1 * 1.6f64.powi(i);
        for g in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let p = [om, g];
            grid.push((p, cost(&p)));
        }
    }
    grid.sort_by(|a, b| a.1.total_cmp(&b.1));
    starts.extend(grid.iter().take(3).map(|(p, _)| *p));

    let mut best: Option<lm::LmOutcome> = None;
    for s in &starts {
        let Some(out) = lm::minimize(residuals, s, MAX_FIT_ITERATIONS) else { continue };
        let better = match &best {
            None => true,
            Some(b) => (out.converged && !b.converged) || (out.converged == b.converged && out.cost < b.cost),
        };
        if better {
            best = Some(out);
        }
    }
    let best = best.ok_or(Error::FitNonConvergence { iterations: 0, best_omega: f64::NAN, best_decay: f64::NAN })?;
    if !best.converged {
        return Err(Error::FitNonConvergence {
            iterations: best.iterations,
            best_omega: best.params[0].abs(),
            best_decay: best.params[1],
        });
    }
    let m = trace.len() as f64;
    let ssr = 2.0 * best.cost;
    Ok(FitResult {
        omega_eff: best.params[0].abs(),
        decay: best.params[1],
        residual_rms: (ssr / m).sqrt(),
        covariance: psd_covariance(&best.jtj, ssr / (m - 2.0)),
        iterations: best.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub prefactor: f64,
    pub alpha_stderr: f64,
}

fn check_power_law_input(n_values: &[f64], y_values: &[f64]) -> Result<()> {
    if n_values.len() != y_values.len() {
        return Err(Error::DimensionMismatch { expected: n_values.len(), found: y_values.len() });
    }
    if n_values.len() < 3 {
        return Err(Error::Underdetermined(format!("power-law fit needs at least 3 points, got {}", n_values.len())));
    }
    if n_values.iter().chain(y_values).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParams("power-law fit needs positive finite inputs".into()));
    }
    Ok(())
}

/// y ≈ c·Ñ^α by linear regression of ln y on ln Ñ.
pub fn fit_power_law(n_values: &[f64], y_values: &[f64]) -> Result<PowerLawFit> {
    check_power_law_input(n_values, y_values)?;
    let xs: Vec<f64> = n_values.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y_values.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx <= 0.0 {
        return Err(Error::Underdetermined("all Ñ values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let alpha = sxy / sxx;
    let intercept = ym - alpha * xm;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    Ok(PowerLawFit { alpha, prefactor: intercept.exp(), alpha_stderr: (ssr / (m - 2.0) / sxx).sqrt() })
}

/// y ≈ c·Ñ^α by unweighted least squares on y itself, started from the
/// log-log regression. Large-Ñ points carry more weight than in
/// [`fit_power_law`].
pub fn fit_power_law_direct(n_values: &[f64], y_values: &[f64]) -> Result<PowerLawFit> {
    let start = fit_power_law(n_values, y_values)?;
    let residuals = |p: &[f64]| -> Option<Vec<f64>> {
        let r: Vec<f64> = n_values.iter().zip(y_values).map(|(n, y)| p[0].exp() * n.powf(p[1]) - y).collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    };
    let out = lm::minimize(residuals, &[start.prefactor.ln(), start.alpha], MAX_FIT_ITERATIONS)
        .ok_or(Error::FitNonConvergence { iterations: 0, best_omega: f64::NAN, best_decay: f64::NAN })?;
    if !out.converged {
        return Err(Error::FitNonConvergence { iterations: out.iterations, best_omega: out.params[1], best_decay: out.params[0] });
    }
    let m = n_values.len() as f64;
    let cov = psd_covariance(&out.jtj, 2.0 * out.cost / (m - 2.0));
    Ok(PowerLawFit { alpha: out.params[1], prefactor: out.params[0].exp(), alpha_stderr: cov[1][1].sqrt() })
}

/// Time average of the trace over its final `window`, by the trapezoid rule
/// with linear interpolation at the left edge of the window.
pub fn steady_window_average(trace: &TimeTrace, window: f64) -> Result<f64> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidTrace(format!("empty averaging window {window}")));
    }
    let span = trace.span();
    if window > span * (1.0 + 1e-12) {
        return Err(Error::InvalidTrace(format!("window {window} exceeds trace span {span}")));
    }
    let t = &trace.times;
    let v = &trace.values;
    let end = t[t.len() - 1];
    let start = (end - window).max(t[0]);
    let k = t.partition_point(|&x| x <= start).max(1);
    let frac = (start - t[k - 1]) / (t[k] - t[k - 1]);
    let v_start = v[k - 1] + frac * (v[k] - v[k - 1]);
    let mut acc = 0.5 * (v_start + v[k]) * (t[k] - start);
    for i in k..t.len() - 1 {
        acc += 0.5 * (v[i] + v[i + 1]) * (t[i + 1] - t[i]);
    }
    Ok(acc / (end - start))
}
