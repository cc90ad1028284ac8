//! Sweep execution: one independent computation per grid point, run on a
//! worker pool and collected in grid order.

use dicke_core::analysis::{
    fit_omega_eff, fit_power_law, fit_power_law_direct, steady_window_average, TimeTrace, TraceKind,
};
use dicke_core::dynamics::uniform_times;
use dicke_core::geometry::{coherent_power, small_angle_mu, CloudGeometry, SINGLE_DIPOLE_POWER};
use dicke_core::integrate::OdeOptions;
use dicke_core::meanfield::{mf_steady, omega_eff, solve_x, Branch};
use dicke_core::{evolve_sampled, observables, steady_state_report, DickeLadderState, ModelParams, SteadyMethod};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, SweepSpec};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Float(v) => format_float(*v),
            Value::Int(v) => v.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Float(v) => Some(v),
            Value::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

/// Shortest representation that parses back to the same value, in
/// scientific notation outside [1e-4, 1e15).
fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub schema_version: u32,
    pub mode: &'static str,
    pub spec_hash: String,
    pub code_version: &'static str,
    /// Seconds since the epoch from SOURCE_DATE_EPOCH, otherwise null so
    /// that identical sweeps produce identical files.
    pub timestamp: Option<i64>,
    pub gamma_mhz: f64,
    pub points: usize,
    pub failed_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Named values produced for one output row.
type Record = Vec<(&'static str, Value)>;

fn param_columns(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Dynamics => &["n_eff", "rabi", "beta", "t", "t_ns"],
        Mode::SteadyState | Mode::FitOmegaEff => &["n_eff", "rabi", "beta"],
        Mode::PhaseDiagram => &["n_eff", "beta", "rabi"],
        Mode::ScreeningCurve => &["n_atoms", "beta"],
        Mode::Cooperativity => &["ell_ax", "ell_rad"],
        Mode::FitAlpha => &["rabi"],
    }
}

fn diagnostic_columns(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Dynamics => &["status", "trace_drift"],
        Mode::SteadyState | Mode::PhaseDiagram => &["status", "residual", "method"],
        Mode::ScreeningCurve => &["status", "residual"],
        Mode::Cooperativity => &["status", "quad_error"],
        Mode::FitOmegaEff => &["status", "residual_rms"],
        Mode::FitAlpha => &["status", "n_points", "max_residual"],
    }
}

/// Column order of the output table for `spec`.
pub fn columns(spec: &SweepSpec) -> Vec<String> {
    let mode = spec.mode;
    param_columns(mode)
        .iter()
        .map(|s| s.to_string())
        .chain(spec.outputs.iter().cloned())
        .chain(diagnostic_columns(mode).iter().map(|s| s.to_string()))
        .collect()
}

fn f(v: f64) -> Value {
    Value::Float(v)
}

fn points(spec: &SweepSpec) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for name in spec.mode.point_grids() {
        let grid = &spec.grids[*name];
        out = out.iter().flat_map(|p| grid.iter().map(move |v| [p.as_slice(), &[*v]].concat())).collect();
    }
    out
}

fn model_err(e: dicke_core::Error) -> String {
    e.to_string()
}

fn ladder_params(n_eff: f64, rabi: f64) -> std::result::Result<ModelParams, String> {
    ModelParams::new(n_eff as usize, rabi).map_err(model_err)
}

fn dynamics_point(spec: &SweepSpec, n_eff: f64, rabi: f64) -> std::result::Result<Vec<Record>, String> {
    let params = ladder_params(n_eff, rabi)?;
    let times = uniform_times(spec.dynamics.t_final, spec.dynamics.samples - 1);
    let traj = evolve_sampled(&DickeLadderState::ground(params.n_atoms).map_err(model_err)?, &params, &times, &OdeOptions::with_tol(spec.tolerance))
        .map_err(model_err)?;
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, st)| {
            let o = observables(st);
            vec![
                ("n_eff", Value::Int(n_eff as i64)),
                ("rabi", f(rabi)),
                ("beta", f(params.beta())),
                ("t", f(t)),
                ("t_ns", f(t / (2.0 * std::f64::consts::PI * spec.gamma_mhz * 1e-3))),
                ("n_e", f(o.n_e)),
                ("s_z", f(o.s_z)),
                ("gamma_sr", f(o.gamma_sr)),
                ("dipole_re", f(o.dipole.re)),
                ("dipole_im", f(o.dipole.im)),
                ("g2", o.g2().map(f).unwrap_or(Value::Missing)),
                ("trace_drift", f((st.trace().re - 1.0).abs().max(st.trace().im.abs()))),
            ]
        })
        .collect())
}

fn steady_point(n_eff: f64, rabi: f64) -> std::result::Result<Vec<Record>, String> {
    let params = ladder_params(n_eff, rabi)?;
    let report = steady_state_report(&params).map_err(model_err)?;
    let o = observables(&report.state);
    let beta = params.beta();
    let mf = mf_steady(beta, n_eff);
    Ok(vec![vec![
        ("n_eff", Value::Int(n_eff as i64)),
        ("rabi", f(rabi)),
        ("beta", f(beta)),
        ("s_z", f(o.s_z)),
        ("n_e", f(o.n_e)),
        ("gamma_sr", f(o.gamma_sr)),
        ("dipole_re", f(o.dipole.re)),
        ("dipole_im", f(o.dipole.im)),
        ("g2", o.g2().map(f).unwrap_or(Value::Missing)),
        ("omega_eff", f(omega_eff(rabi, o.dipole).norm())),
        ("mf_s_z", f(mf.s_z())),
        ("mf_omega_eff", f(omega_eff(rabi, mf.dipole).norm())),
        ("residual", f(report.residual)),
        (
            "method",
            Value::Text(
                match report.method {
                    SteadyMethod::Direct => "direct",
                    SteadyMethod::Integrated => "integrated",
                }
                .into(),
            ),
        ),
    ]])
}

fn screening_point(n_atoms: f64, beta: f64) -> std::result::Result<Vec<Record>, String> {
    let sol = solve_x(beta, n_atoms).map_err(model_err)?;
    Ok(vec![vec![
        ("n_atoms", f(n_atoms)),
        ("beta", f(beta)),
        ("x", f(sol.x)),
        ("asymptote", f((beta * beta - 1.0).max(0.0).sqrt())),
        ("omega_eff", f(0.5 * n_atoms * sol.x)),
        (
            "branch",
            Value::Text(
                match sol.branch {
                    Branch::BelowThreshold => "below",
                    Branch::AboveThreshold => "above",
                }
                .into(),
            ),
        ),
        ("residual", f(sol.residual)),
    ]])
}

fn cooperativity_point(ell_ax: f64, ell_rad: f64) -> std::result::Result<Vec<Record>, String> {
    let geom = CloudGeometry::new(ell_ax, ell_rad).map_err(model_err)?;
    let q = coherent_power(&geom).map_err(model_err)?;
    Ok(vec![vec![
        ("ell_ax", f(ell_ax)),
        ("ell_rad", f(ell_rad)),
        ("mu", f(q.value / SINGLE_DIPOLE_POWER)),
        ("small_angle_mu", f(small_angle_mu(&geom))),
        ("quad_error", f(q.error / SINGLE_DIPOLE_POWER)),
    ]])
}

fn fit_omega_point(spec: &SweepSpec, n_eff: f64, rabi: f64) -> std::result::Result<Vec<Record>, String> {
    let params = ladder_params(n_eff, rabi)?;
    let times = uniform_times(spec.dynamics.t_final, spec.dynamics.samples - 1);
    let traj = evolve_sampled(&DickeLadderState::ground(params.n_atoms).map_err(model_err)?, &params, &times, &OdeOptions::with_tol(spec.tolerance))
        .map_err(model_err)?;
    let ne = traj.observables().iter().map(|o| o.n_e).collect();
    let trace = TimeTrace::new(traj.times.clone(), ne, TraceKind::Population).map_err(model_err)?;
    let fit = fit_omega_eff(&trace).map_err(model_err)?;
    let window = steady_window_average(&trace, spec.dynamics.window).map_err(model_err)?;
    let steady = steady_state_report(&params).map_err(model_err)?;
    let dipole = observables(&steady.state).dipole;
    Ok(vec![vec![
        ("n_eff", Value::Int(n_eff as i64)),
        ("rabi", f(rabi)),
        ("beta", f(params.beta())),
        ("omega_eff", f(fit.omega_eff)),
        ("decay", f(fit.decay)),
        ("omega_eff_stderr", f(fit.covariance[0][0].sqrt())),
        ("decay_stderr", f(fit.covariance[1][1].sqrt())),
        ("omega_eff_steady", f(omega_eff(rabi, dipole).norm())),
        ("n_e_window", f(window)),
        ("residual_rms", f(fit.residual_rms)),
    ]])
}

fn fit_alpha_point(spec: &SweepSpec, rabi: f64) -> std::result::Result<Vec<Record>, String> {
    let ns = &spec.grids["n_eff"];
    let mut rates = Vec::with_capacity(ns.len());
    let mut worst = 0.0f64;
    for &n in ns {
        let report = steady_state_report(&ladder_params(n, rabi)?).map_err(model_err)?;
        worst = worst.max(report.residual);
        rates.push(observables(&report.state).gamma_sr);
    }
    let direct = fit_power_law_direct(ns, &rates).map_err(model_err)?;
    let loglog = fit_power_law(ns, &rates).map_err(model_err)?;
    Ok(vec![vec![
        ("rabi", f(rabi)),
        ("alpha", f(direct.alpha)),
        ("alpha_stderr", f(direct.alpha_stderr)),
        ("prefactor", f(direct.prefactor)),
        ("alpha_loglog", f(loglog.alpha)),
        ("alpha_loglog_stderr", f(loglog.alpha_stderr)),
        ("n_points", Value::Int(ns.len() as i64)),
        ("max_residual", f(worst)),
    ]])
}

fn compute(spec: &SweepSpec, p: &[f64]) -> std::result::Result<Vec<Record>, String> {
    match spec.mode {
        Mode::Dynamics => dynamics_point(spec, p[0], p[1]),
        Mode::SteadyState => steady_point(p[0], p[1]),
        Mode::PhaseDiagram => {
            let rabi = 0.5 * p[1] * p[0];
            steady_point(p[0], rabi).map(|mut recs| {
                // β is the sweep axis here; keep it exact rather than recomputed.
                for r in &mut recs {
                    for (k, v) in r.iter_mut() {
                        if *k == "beta" {
                            *v = f(p[1]);
                        }
                    }
                }
                recs
            })
        }
        Mode::ScreeningCurve => screening_point(p[0], p[1]),
        Mode::Cooperativity => cooperativity_point(p[0], p[1]),
        Mode::FitOmegaEff => fit_omega_point(spec, p[0], p[1]),
        Mode::FitAlpha => fit_alpha_point(spec, p[0]),
    }
}

fn project(record: &Record, columns: &[String], status: &str) -> Vec<Value> {
    columns
        .iter()
        .map(|c| {
            if c == "status" {
                return Value::Text(status.to_string());
            }
            record.iter().find(|(k, _)| k == c).map(|(_, v)| v.clone()).unwrap_or(Value::Missing)
        })
        .collect()
}

/// Runs every grid point of `spec`. Per-point failures become rows with an
/// `error: ...` status; only pool construction can fail here.
pub fn run(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepResult> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let grid = points(spec);
    let outcomes: Vec<std::result::Result<Vec<Record>, String>> =
        pool.install(|| grid.par_iter().map(|p| compute(spec, p)).collect());

    let columns = columns(spec);
    let mut rows = Vec::new();
    let mut failed = 0;
    for (p, outcome) in grid.iter().zip(outcomes) {
        match outcome {
            Ok(records) => rows.extend(records.iter().map(|r| project(r, &columns, "ok"))),
            Err(msg) => {
                failed += 1;
                let names = spec.mode.point_grids();
                let record: Record = names.iter().zip(p).map(|(k, v)| (*k, f(*v))).collect();
                let status = format!("error: {}", msg.replace(['\n', '\r'], " "));
                rows.push(project(&record, &columns, &status));
            }
        }
    }
    let timestamp = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok());
    Ok(SweepResult {
        header: Header {
            schema_version: spec.schema_version,
            mode: spec.mode.name(),
            spec_hash: spec.hash(),
            code_version: CODE_VERSION,
            timestamp,
            gamma_mhz: spec.gamma_mhz,
            points: grid.len(),
            failed_points: failed,
        },
        columns,
        rows,
    })
}
