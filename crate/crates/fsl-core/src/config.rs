//! Run configuration: flat key = value text with strict validation.
//!
//! Unknown keys are rejected, defaults are filled in, and the resolved
//! configuration has a canonical digest so run directories can be
//! content-addressed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolve::SchemeConfig;
use crate::farfield::FarFieldProfile;
use crate::flux::FluxFunction;
use crate::grid::Grid;

/// Either a preset name or explicit polynomial coefficients (constant
/// term first).  In two dimensions the same component is used on every
/// axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FluxSpec {
    Preset(String),
    Polynomial(Vec<f64>),
}

impl FluxSpec {
    pub fn build(&self, dim: usize) -> Result<FluxFunction> {
        match self {
            FluxSpec::Preset(name) => match name.as_str() {
                "zero" => Ok(FluxFunction::zero(dim)),
                "burgers" => {
                    if dim == 1 {
                        Ok(FluxFunction::burgers())
                    } else {
                        FluxFunction::new(vec![
                            crate::flux::FluxComponent::Burgers;
                            dim
                        ])
                    }
                }
                "abs" => {
                    FluxFunction::new(vec![crate::flux::FluxComponent::Abs; dim])
                }
                "abs_quadratic" => {
                    FluxFunction::new(vec![crate::flux::FluxComponent::AbsQuadratic; dim])
                }
                other => Err(Error::Config(format!(
                    "unknown flux preset \"{other}\" (expected zero, burgers, abs, abs_quadratic, or coefficients)"
                ))),
            },
            FluxSpec::Polynomial(coeffs) => {
                let comp = crate::flux::FluxComponent::Polynomial(coeffs.clone());
                FluxFunction::new(vec![comp; dim])
            }
        }
    }

    fn canonical(&self) -> String {
        match self {
            FluxSpec::Preset(name) => format!("preset:{name}"),
            FluxSpec::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| format!("{v:e}")).collect();
                format!("poly:[{}]", parts.join(","))
            }
        }
    }
}

/// On-disk schema; every field optional except the experiment id.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    flux: Option<FluxSpec>,
    n: Option<usize>,
    #[serde(rename = "N")]
    points: Option<usize>,
    #[serde(rename = "X")]
    half_width: Option<f64>,
    #[serde(rename = "Y")]
    frame_half_width: Option<f64>,
    a: Option<f64>,
    mu: Option<f64>,
    tau: Option<f64>,
    #[serde(alias = "CFL")]
    cfl: Option<f64>,
    viscosity: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<String>,
    h_table: Option<String>,
    params: Option<toml::Table>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub experiment: String,
    pub flux: FluxSpec,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "X")]
    pub half_width: f64,
    #[serde(rename = "Y")]
    pub frame_half_width: f64,
    pub a: f64,
    pub mu: f64,
    pub tau: f64,
    pub cfl: f64,
    pub viscosity: f64,
    pub seed: u64,
    pub output_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_table: Option<String>,
    pub params: toml::Table,
}

pub fn parse_config(text: &str) -> Result<ResolvedConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
    let resolved = ResolvedConfig {
        experiment: raw.experiment,
        flux: raw.flux.unwrap_or_else(|| FluxSpec::Preset("burgers".into())),
        n: raw.n.unwrap_or(1),
        points: raw.points.unwrap_or(4096),
        half_width: raw.half_width.unwrap_or(128.5),
        frame_half_width: raw.frame_half_width.or(raw.half_width).unwrap_or(128.5),
        a: raw.a.unwrap_or(1.0),
        mu: raw.mu.unwrap_or(0.0),
        tau: raw.tau.unwrap_or(1.0),
        cfl: raw.cfl.unwrap_or(0.4),
        viscosity: raw.viscosity.unwrap_or(0.0),
        seed: raw.seed.unwrap_or(1),
        output_dir: raw.output_dir.unwrap_or_else(|| "runs".into()),
        h_table: raw.h_table,
        params: raw.params.unwrap_or_default(),
    };
    resolved.validate()?;
    Ok(resolved)
}

pub fn load_config(path: &Path) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(table) = &cfg.h_table {
        // Referenced paths are resolved relative to the config file.
        let resolved = path.parent().map(|d| d.join(table)).unwrap_or_else(|| table.into());
        if !resolved.exists() {
            return Err(Error::Config(format!("h_table file not found: {}", resolved.display())));
        }
        cfg.h_table = Some(resolved.to_string_lossy().into_owned());
    }
    Ok(cfg)
}

impl ResolvedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(Error::Config("experiment id must not be empty".into()));
        }
        self.scheme().validate()?;
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !self.a.is_finite() || !self.mu.is_finite() {
            return Err(Error::Config("a and mu must be finite".into()));
        }
        if !(self.frame_half_width > 0.0) {
            return Err(Error::Config(format!("Y must be positive, got {}", self.frame_half_width)));
        }
        // Grid policies (dimension, power-of-two size) checked eagerly so
        // errors name the key before any work starts.
        self.physical_grid()?;
        if self.n == 2 && self.h_table.is_none() {
            return Err(Error::Config("n = 2 requires h_table (angular data file)".into()));
        }
        Ok(())
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig { cfl: self.cfl, viscosity: self.viscosity, ..SchemeConfig::default() }
    }

    pub fn physical_grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.points, self.half_width)
    }

    pub fn frame_grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.points, self.frame_half_width)
    }

    pub fn flux_function(&self) -> Result<FluxFunction> {
        self.flux.build(self.n)
    }

    /// Far-field profile from (a, mu, tau) in one dimension, or from the
    /// angular table in two.  Errors when a = 0 in one dimension; callers
    /// that can run without a background should check `has_background`.
    pub fn background(&self) -> Result<FarFieldProfile> {
        if self.n == 1 {
            FarFieldProfile::step(self.a, self.mu, self.tau)
        } else {
            let path = self
                .h_table
                .as_ref()
                .ok_or_else(|| Error::Config("n = 2 requires h_table".into()))?;
            let h = load_angular_table(Path::new(path))?;
            FarFieldProfile::angular(h, self.tau)
        }
    }

    pub fn has_background(&self) -> bool {
        self.n == 2 || self.a != 0.0
    }

    /// Digest of everything that influences the computation.  The output
    /// directory is excluded so moving a runs tree does not change run
    /// identities; params are serialized in sorted key order.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!(
            "experiment={}\nflux={}\nn={}\nN={}\nX={:e}\nY={:e}\na={:e}\nmu={:e}\ntau={:e}\ncfl={:e}\nviscosity={:e}\nseed={}\n",
            self.experiment,
            self.flux.canonical(),
            self.n,
            self.points,
            self.half_width,
            self.frame_half_width,
            self.a,
            self.mu,
            self.tau,
            self.cfl,
            self.viscosity,
            self.seed,
        ));
        if let Some(table) = &self.h_table {
            hasher.update(format!("h_table={table}\n"));
        }
        let mut keys: Vec<&String> = self.params.keys().collect();
        keys.sort();
        for key in keys {
            hasher.update(format!("params.{key}={}\n", self.params[key]));
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir_name(&self) -> String {
        format!("{}-{}", self.experiment, &self.digest()[..12])
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("config serialization: {e}")))
    }

    /// Rejects parameter keys outside the experiment's declared set.
    pub fn check_params(&self, allowed: &[&str]) -> Result<()> {
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown parameter \"{key}\" for experiment {} (allowed: {})",
                    self.experiment,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(v)) => Ok(*v),
            Some(toml::Value::Integer(v)) => Ok(*v as f64),
            Some(other) => {
                Err(Error::Config(format!("parameter \"{key}\" must be a number, got {other}")))
            }
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            Some(other) => {
                Err(Error::Config(format!("parameter \"{key}\" must be a nonnegative integer, got {other}")))
            }
        }
    }

    pub fn param_str(&self, key: &str, default: &str) -> Result<String> {
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(toml::Value::String(v)) => Ok(v.clone()),
            Some(other) => {
                Err(Error::Config(format!("parameter \"{key}\" must be a string, got {other}")))
            }
        }
    }

    pub fn param_str_list(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        match self.params.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => Ok(s.clone()),
                    other => Err(Error::Config(format!(
                        "parameter \"{key}\" must be a list of strings, got {other}"
                    ))),
                })
                .collect(),
            Some(other) => {
                Err(Error::Config(format!("parameter \"{key}\" must be a list, got {other}")))
            }
        }
    }

    pub fn param_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(f) => Ok(*f),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    other => Err(Error::Config(format!(
                        "parameter \"{key}\" must be a list of numbers, got {other}"
                    ))),
                })
                .collect(),
            Some(other) => {
                Err(Error::Config(format!("parameter \"{key}\" must be a list, got {other}")))
            }
        }
    }
}

/// One angular sample per line; blank lines and # comments ignored.
pub fn load_angular_table(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|e| {
            Error::Config(format!("{}:{}: bad angular sample: {e}", path.display(), lineno + 1))
        })?;
        values.push(v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("experiment = \"decay_rates\"\nflux = \"burgers\"\na = 1.0\n").unwrap();
        assert_eq!(cfg.points, 4096);
        assert_eq!(cfg.half_width, 128.5);
        assert_eq!(cfg.cfl, 0.4);
        assert_eq!(cfg.n, 1);
        assert_eq!(cfg.flux, FluxSpec::Preset("burgers".into()));
    }

    #[test]
    fn cfl_range_is_enforced_with_alias() {
        let err = parse_config("experiment = \"x\"\nCFL = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("CFL out of (0, 1]"), "{err}");
        let cfg = parse_config("experiment = \"x\"\nCFL = 0.8\n").unwrap();
        assert_eq!(cfg.cfl, 0.8);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config("experiment = \"x\"\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_information() {
        let err = parse_config("experiment = \"x\"\nN = \"many\"\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn digest_ignores_output_dir_but_not_values() {
        let a = parse_config("experiment = \"x\"\noutput_dir = \"one\"\n").unwrap();
        let b = parse_config("experiment = \"x\"\noutput_dir = \"two\"\n").unwrap();
        let c = parse_config("experiment = \"x\"\nseed = 9\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert!(a.run_dir_name().starts_with("x-"));
    }

    #[test]
    fn digest_sorts_params() {
        let a = parse_config("experiment = \"x\"\n[params]\nalpha = 1\nbeta = 2\n").unwrap();
        let b = parse_config("experiment = \"x\"\n[params]\nbeta = 2\nalpha = 1\n").unwrap();
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn polynomial_flux_builds() {
        let cfg = parse_config("experiment = \"x\"\nflux = [0.0, 0.0, 0.5]\n").unwrap();
        let f = cfg.flux_function().unwrap();
        assert!((f.eval(0, 2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_dimensions_need_a_table() {
        let err = parse_config("experiment = \"x\"\nn = 2\nN = 64\nX = 16.0\n").unwrap_err();
        assert!(err.to_string().contains("h_table"), "{err}");
    }

    #[test]
    fn params_are_typed_and_checked() {
        let cfg = parse_config("experiment = \"x\"\n[params]\nt_max = 100\n").unwrap();
        assert_eq!(cfg.param_f64("t_max", 1.0).unwrap(), 100.0);
        assert_eq!(cfg.param_f64("absent", 2.5).unwrap(), 2.5);
        assert!(cfg.check_params(&["t_max"]).is_ok());
        let err = cfg.check_params(&["other"]).unwrap_err();
        assert!(err.to_string().contains("t_max"), "{err}");
    }
}
