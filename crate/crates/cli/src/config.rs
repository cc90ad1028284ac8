//! Sweep configuration: a versioned TOML file, built-in defaults per mode and
//! command-line overrides, resolved into a [`SweepSpec`].
//!
//! ```toml
//! schema_version = 1
//! mode = "phase_diagram"
//! outputs = ["s_z", "gamma_sr", "g2"]
//! output_path = "phase.csv"
//! tolerance = 1e-10
//!
//! [grids]
//! n_eff = [3, 7, 10]
//! beta = { linspace = [0.1, 3.0, 30] }
//!
//! [dynamics]
//! pulse_ns = 150.0
//! samples = 301
//! window_ns = 50.0
//!
//! [units]
//! gamma_mhz = 6.0
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dicke_core::analysis::{ns_to_gamma_units, DEFAULT_GAMMA_MHZ, STEADY_WINDOW_NS};
use dicke_core::steady::MAX_STEADY_ATOMS;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_PULSE_NS: f64 = 150.0;
pub const DEFAULT_SAMPLES: usize = 301;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dynamics,
    SteadyState,
    PhaseDiagram,
    ScreeningCurve,
    Cooperativity,
    FitOmegaEff,
    FitAlpha,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Dynamics => "dynamics",
            Mode::SteadyState => "steady_state",
            Mode::PhaseDiagram => "phase_diagram",
            Mode::ScreeningCurve => "screening_curve",
            Mode::Cooperativity => "cooperativity",
            Mode::FitOmegaEff => "fit_omega_eff",
            Mode::FitAlpha => "fit_alpha",
        }
    }

    /// Grids the mode reads, outermost loop first.
    pub fn grid_names(self) -> &'static [&'static str] {
        match self {
            Mode::Dynamics | Mode::SteadyState | Mode::FitOmegaEff => &["n_eff", "rabi"],
            Mode::PhaseDiagram => &["n_eff", "beta"],
            Mode::ScreeningCurve => &["n_atoms", "beta"],
            Mode::Cooperativity => &["ell_ax", "ell_rad"],
            // n_eff is the abscissa of each fit, not a sweep axis.
            Mode::FitAlpha => &["rabi", "n_eff"],
        }
    }

    /// Grids that span the sweep points.
    pub fn point_grids(self) -> &'static [&'static str] {
        match self {
            Mode::FitAlpha => &["rabi"],
            other => other.grid_names(),
        }
    }

    pub fn known_outputs(self) -> &'static [&'static str] {
        match self {
            Mode::Dynamics => &["n_e", "s_z", "gamma_sr", "dipole_re", "dipole_im", "g2"],
            Mode::SteadyState | Mode::PhaseDiagram => {
                &["s_z", "n_e", "gamma_sr", "dipole_re", "dipole_im", "g2", "omega_eff", "mf_s_z", "mf_omega_eff"]
            }
            Mode::ScreeningCurve => &["x", "asymptote", "omega_eff", "branch"],
            Mode::Cooperativity => &["mu", "small_angle_mu"],
            Mode::FitOmegaEff => &["omega_eff", "decay", "omega_eff_stderr", "decay_stderr", "omega_eff_steady", "n_e_window"],
            Mode::FitAlpha => &["alpha", "alpha_stderr", "prefactor", "alpha_loglog", "alpha_loglog_stderr"],
        }
    }

    fn default_grids(self) -> BTreeMap<String, Vec<f64>> {
        let ints = |lo: i64, hi: i64| (lo..=hi).map(|v| v as f64).collect::<Vec<_>>();
        let grids: Vec<(&str, Vec<f64>)> = match self {
            Mode::Dynamics => vec![("n_eff", vec![1.0, 3.0, 6.0, 9.0]), ("rabi", vec![4.5])],
            Mode::SteadyState => vec![("n_eff", vec![3.0, 7.0, 10.0]), ("rabi", linspace(0.25, 15.0, 60))],
            Mode::PhaseDiagram => vec![("n_eff", vec![3.0, 7.0, 10.0]), ("beta", linspace(0.1, 3.0, 59))],
            Mode::ScreeningCurve => vec![("n_atoms", vec![20.0]), ("beta", linspace(0.05, 3.0, 60))],
            Mode::Cooperativity => vec![("ell_ax", logspace(5.0, 100.0, 14)), ("ell_rad", vec![0.25, 0.5, 1.0])],
            Mode::FitOmegaEff => vec![("n_eff", ints(1, 10)), ("rabi", vec![4.5])],
            Mode::FitAlpha => vec![("rabi", linspace(1.0, 20.0, 20)), ("n_eff", ints(2, 10))],
        };
        grids.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` geometrically spaced values from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
    if let Some(first) = v.first_mut() {
        *first = a;
    }
    if n > 1 {
        v[n - 1] = b;
    }
    v
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Linspace { linspace: (f64, f64, usize) },
    Logspace { logspace: (f64, f64, usize) },
    Range { range: (i64, i64) },
}

impl GridSpec {
    fn expand(&self, name: &str) -> Result<Vec<f64>> {
        Ok(match *self {
            GridSpec::List(ref v) => v.clone(),
            GridSpec::Linspace { linspace: (a, b, n) } => linspace(a, b, n),
            GridSpec::Logspace { logspace: (a, b, n) } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(CliError::Config(format!("grid {name}: logspace bounds must be positive")));
                }
                logspace(a, b, n)
            }
            GridSpec::Range { range: (a, b) } => (a..=b).map(|v| v as f64).collect(),
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsSection {
    pulse_ns: Option<f64>,
    t_final: Option<f64>,
    samples: Option<usize>,
    window_ns: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitsSection {
    gamma_mhz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    mode: Option<Mode>,
    #[serde(default)]
    grids: BTreeMap<String, GridSpec>,
    outputs: Option<Vec<String>>,
    output_path: Option<PathBuf>,
    tolerance: Option<f64>,
    #[serde(default)]
    dynamics: DynamicsSection,
    #[serde(default)]
    units: UnitsSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub gamma_mhz: Option<f64>,
}

/// Time settings for modes that integrate the dynamics. Times in 1/Γ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsSettings {
    pub t_final: f64,
    pub samples: usize,
    pub window: f64,
}

/// A fully resolved, validated sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub schema_version: u32,
    pub mode: Mode,
    pub grids: BTreeMap<String, Vec<f64>>,
    pub outputs: Vec<String>,
    pub tolerance: f64,
    pub dynamics: DynamicsSettings,
    pub gamma_mhz: f64,
    /// Where to write the table; `None` means stdout. Not part of the hash.
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
}

impl SweepSpec {
    /// The built-in sweep for `mode`.
    pub fn default_for(mode: Mode, overrides: &Overrides) -> Result<Self> {
        Self::resolve(
            ConfigFile {
                schema_version: SCHEMA_VERSION,
                mode: Some(mode),
                grids: BTreeMap::new(),
                outputs: None,
                output_path: None,
                tolerance: None,
                dynamics: DynamicsSection::default(),
                units: UnitsSection::default(),
            },
            mode,
            overrides,
        )
    }

    pub fn from_toml(text: &str, mode: Mode, overrides: &Overrides) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::resolve(file, mode, overrides)
    }

    pub fn load(path: &Path, mode: Mode, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, mode, overrides)
    }

    fn resolve(file: ConfigFile, mode: Mode, overrides: &Overrides) -> Result<Self> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if file.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", file.schema_version));
        }
        if let Some(m) = file.mode {
            if m != mode {
                return bad(format!("config is for mode {} but the {} command was run", m.name(), mode.name()));
            }
        }

        let mut grids = mode.default_grids();
        if !file.grids.is_empty() {
            for name in file.grids.keys() {
                if !mode.grid_names().contains(&name.as_str()) {
                    return bad(format!("grid {name} is not used by mode {} (expected {:?})", mode.name(), mode.grid_names()));
                }
            }
            for name in mode.grid_names() {
                let Some(g) = file.grids.get(*name) else {
                    return bad(format!("missing grid {name} for mode {}", mode.name()));
                };
                grids.insert(name.to_string(), g.expand(name)?);
            }
        }

        let outputs = match file.outputs {
            Some(list) => list,
            None => mode.known_outputs().iter().map(|s| s.to_string()).collect(),
        };

        let gamma_mhz = overrides.gamma_mhz.or(file.units.gamma_mhz).unwrap_or(DEFAULT_GAMMA_MHZ);
        if !(gamma_mhz > 0.0 && gamma_mhz.is_finite()) {
            return bad(format!("gamma_mhz must be positive, got {gamma_mhz}"));
        }
        let d = &file.dynamics;
        let t_final = match (d.t_final, d.pulse_ns) {
            (Some(_), Some(_)) => return bad("set either dynamics.t_final or dynamics.pulse_ns, not both".into()),
            (Some(t), None) => t,
            (None, p) => ns_to_gamma_units(p.unwrap_or(DEFAULT_PULSE_NS), gamma_mhz),
        };
        let window = ns_to_gamma_units(d.window_ns.unwrap_or(STEADY_WINDOW_NS), gamma_mhz);
        let spec = SweepSpec {
            schema_version: SCHEMA_VERSION,
            mode,
            grids,
            outputs,
            tolerance: overrides.tol.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE),
            dynamics: DynamicsSettings { t_final, samples: d.samples.unwrap_or(DEFAULT_SAMPLES), window },
            gamma_mhz,
            output_path: overrides.out.clone().or(file.output_path),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for name in self.mode.grid_names() {
            let Some(values) = self.grids.get(*name) else {
                return bad(format!("missing grid {name}"));
            };
            if values.is_empty() {
                return bad(format!("grid {name} is empty"));
            }
            for &v in values {
                let ok = match *name {
                    "n_eff" => v >= 1.0 && v.fract() == 0.0 && v <= MAX_STEADY_ATOMS as f64,
                    "rabi" | "beta" => v >= 0.0 && v.is_finite(),
                    _ => v > 0.0 && v.is_finite(),
                };
                if !ok {
                    return bad(format!("grid {name}: invalid value {v}"));
                }
            }
        }
        if self.mode == Mode::FitAlpha && self.grids["n_eff"].len() < 3 {
            return bad("fit_alpha needs at least 3 n_eff values".into());
        }
        if self.outputs.is_empty() {
            return bad("outputs must not be empty".into());
        }
        for (i, o) in self.outputs.iter().enumerate() {
            if !self.mode.known_outputs().contains(&o.as_str()) {
                return bad(format!("unknown output {o} for mode {} (known: {:?})", self.mode.name(), self.mode.known_outputs()));
            }
            if self.outputs[..i].contains(o) {
                return bad(format!("output {o} listed twice"));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return bad(format!("tolerance must lie in (0, 1e-2], got {}", self.tolerance));
        }
        let dy = &self.dynamics;
        if !(dy.t_final > 0.0 && dy.t_final.is_finite()) {
            return bad(format!("dynamics duration must be positive, got {}", dy.t_final));
        }
        let min_samples = if self.mode == Mode::FitOmegaEff { 10 } else { 2 };
        if dy.samples < min_samples {
            return bad(format!("dynamics.samples must be at least {min_samples}"));
        }
        if self.mode == Mode::FitOmegaEff && !(dy.window > 0.0 && dy.window <= dy.t_final) {
            return bad(format!("averaging window {} must lie in (0, {}]", dy.window, dy.t_final));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved spec.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, mode: Mode) -> Result<SweepSpec> {
        SweepSpec::from_toml(text, mode, &Overrides::default())
    }

    #[test]
    fn grid_forms() {
        let spec = parse(
            r#"
            schema_version = 1
            [grids]
            n_eff = { range = [2, 5] }
            beta = { linspace = [0, 1, 3] }
            "#,
            Mode::PhaseDiagram,
        )
        .unwrap();
        assert_eq!(spec.grids["n_eff"], vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(spec.grids["beta"], vec![0.0, 0.5, 1.0]);
        let spec = parse(
            "schema_version = 1\n[grids]\nell_ax = { logspace = [1, 100, 3] }\nell_rad = [0.5]\n",
            Mode::Cooperativity,
        )
        .unwrap();
        assert!((spec.grids["ell_ax"][1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn defaults_are_valid() {
        for mode in [
            Mode::Dynamics,
            Mode::SteadyState,
            Mode::PhaseDiagram,
            Mode::ScreeningCurve,
            Mode::Cooperativity,
            Mode::FitOmegaEff,
            Mode::FitAlpha,
        ] {
            let spec = SweepSpec::default_for(mode, &Overrides::default()).unwrap();
            assert_eq!(spec.outputs.len(), mode.known_outputs().len());
        }
    }

    #[test]
    fn overrides_win() {
        let o = Overrides { out: Some("x.csv".into()), tol: Some(1e-6), gamma_mhz: Some(3.0) };
        let spec = SweepSpec::from_toml(
            "schema_version = 1\ntolerance = 1e-9\noutput_path = \"y.csv\"\n[units]\ngamma_mhz = 6.0\n",
            Mode::Dynamics,
            &o,
        )
        .unwrap();
        assert_eq!(spec.tolerance, 1e-6);
        assert_eq!(spec.output_path, Some(PathBuf::from("x.csv")));
        assert!((spec.dynamics.t_final - ns_to_gamma_units(150.0, 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            ("schema_version = 2", Mode::Dynamics),
            ("schema_version = 1\nmode = \"dynamics\"", Mode::SteadyState),
            ("schema_version = 1\nmode = \"warp\"", Mode::Dynamics),
            ("schema_version = 1\noutputs = [\"nope\"]", Mode::Dynamics),
            ("schema_version = 1\noutputs = []", Mode::Dynamics),
            ("schema_version = 1\noutputs = [\"s_z\", \"s_z\"]", Mode::Dynamics),
            ("schema_version = 1\n[grids]\nn_eff = [1]", Mode::Dynamics),
            ("schema_version = 1\n[grids]\nn_eff = []\nrabi = [1]", Mode::Dynamics),
            ("schema_version = 1\n[grids]\nn_eff = [1.5]\nrabi = [1]", Mode::Dynamics),
            ("schema_version = 1\n[grids]\nn_eff = [1]\nrabi = [1]\nbeta = [1]", Mode::Dynamics),
            ("schema_version = 1\n[grids]\nn_eff = [1, 2]\nrabi = [1]", Mode::FitAlpha),
            ("schema_version = 1\n[dynamics]\nt_final = 3.0\npulse_ns = 10.0", Mode::Dynamics),
            ("schema_version = 1\n[dynamics]\nsamples = 5", Mode::FitOmegaEff),
            ("schema_version = 1\n[dynamics]\nwindow_ns = 500.0", Mode::FitOmegaEff),
            ("schema_version = 1\ntolerance = 0.0", Mode::Dynamics),
            ("schema_version = 1\nbogus = 1", Mode::Dynamics),
            ("schema_version = 1\n[units]\ngamma_mhz = -1.0", Mode::Dynamics),
            ("not toml at all = = =", Mode::Dynamics),
        ];
        for (text, mode) in cases {
            assert!(matches!(parse(text, mode), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = parse("schema_version = 1\noutput_path = \"a.csv\"", Mode::Dynamics).unwrap();
        let b = parse("schema_version = 1\noutput_path = \"b.csv\"", Mode::Dynamics).unwrap();
        let c = parse("schema_version = 1\ntolerance = 1e-9", Mode::Dynamics).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
