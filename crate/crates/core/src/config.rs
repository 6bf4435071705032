//! Plain-text run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Lists (such as
//! `snapshot_times`) are comma-separated. Settings are layered: defaults,
//! then the config file, then `HOPF_CRF_<KEY>` environment variables, then
//! command-line flags.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{FlowControl, GridSpec, InitialData, InitialFamily};
use crate::geometry::HopfModuli;
use crate::tensors::HessianVariant;
use crate::verify::VerifyConfig;

pub const ENV_PREFIX: &str = "HOPF_CRF_";

/// Every recognised key, in the order they are documented.
pub const KEYS: [&str; 23] = [
    "abs_alpha",
    "abs_beta",
    "n_u",
    "n_sigma",
    "t_max",
    "cfl",
    "monitor_cadence",
    "snapshot_times",
    "max_retries",
    "initial",
    "epsilon",
    "initial_path",
    "A",
    "B",
    "out_dir",
    "seed",
    "hessian_variant",
    "samples",
    "fd_samples",
    "static_n_u",
    "static_n_sigma",
    "sweep_values",
    "threads",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `|α| = |β| = 2`
    Round,
    /// `|α| = 2, |β| = 4`
    Asym,
}

impl Preset {
    pub fn moduli(self) -> (f64, f64) {
        match self {
            Preset::Round => (2.0, 2.0),
            Preset::Asym => (2.0, 4.0),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "round" => Ok(Preset::Round),
            "asym" => Ok(Preset::Asym),
            other => Err(format!("unknown preset `{other}` (expected round|asym)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub abs_alpha: f64,
    pub abs_beta: f64,
    pub n_u: usize,
    pub n_sigma: usize,
    pub t_max: f64,
    pub cfl: f64,
    pub monitor_cadence: f64,
    pub snapshot_times: Vec<f64>,
    pub max_retries: usize,
    pub initial: InitialFamily,
    pub epsilon: f64,
    pub initial_path: Option<PathBuf>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub hessian_variant: HessianVariant,
    pub samples: usize,
    pub fd_samples: usize,
    pub static_n_u: usize,
    pub static_n_sigma: usize,
    pub sweep_values: Vec<f64>,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
}

impl Default for RunConfig {
    /// Defaults for everything except the moduli, which are NaN until set.
    fn default() -> Self {
        RunConfig {
            abs_alpha: f64::NAN,
            abs_beta: f64::NAN,
            n_u: 64,
            n_sigma: 64,
            t_max: 0.49,
            cfl: 0.2,
            monitor_cadence: 0.01,
            snapshot_times: Vec::new(),
            max_retries: 20,
            initial: InitialFamily::Zero,
            epsilon: 0.0,
            initial_path: None,
            a: 10.0,
            b: 10.0,
            out_dir: PathBuf::from("out"),
            seed: 42,
            hessian_variant: HessianVariant::Corrected,
            samples: 1000,
            fd_samples: 100,
            static_n_u: 16,
            static_n_sigma: 16,
            sweep_values: vec![1.5, 2.0, 3.0],
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Errors when the moduli were never set; `sweep` is the only command
    /// that runs without them.
    pub fn moduli(&self) -> Result<HopfModuli> {
        if self.abs_alpha.is_nan() && self.abs_beta.is_nan() {
            return Err(Error::ConfigRange {
                key: "abs_alpha".into(),
                message: "moduli are required (set abs_alpha and abs_beta or use a preset)".into(),
            });
        }
        HopfModuli::new(self.abs_alpha, self.abs_beta)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::for_moduli(&self.moduli()?, self.n_u, self.n_sigma)
    }

    pub fn control(&self) -> FlowControl {
        FlowControl {
            t_max: self.t_max,
            cfl: self.cfl,
            monitor_cadence: self.monitor_cadence,
            snapshot_times: self.snapshot_times.clone(),
            max_retries: self.max_retries,
            a: self.a,
            b: self.b,
        }
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData { family: self.initial, epsilon: self.epsilon, path: self.initial_path.clone() }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            samples: self.samples,
            fd_samples: self.fd_samples,
            seed: self.seed,
            variant: self.hessian_variant,
            ..VerifyConfig::default()
        }
    }

    /// Range checks. Errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        self.check(true)
    }

    /// As [`RunConfig::validate`], but moduli may be left unset. A sweep
    /// supplies its own.
    pub fn validate_without_moduli(&self) -> Result<()> {
        self.check(false)
    }

    fn check(&self, require_moduli: bool) -> Result<()> {
        fn bad(key: &str, message: impl Into<String>) -> Result<()> {
            Err(Error::ConfigRange { key: key.into(), message: message.into() })
        }
        match (self.abs_alpha.is_nan(), self.abs_beta.is_nan()) {
            (true, true) if require_moduli => {
                return bad("abs_alpha", "moduli are required (set abs_alpha and abs_beta or use a preset)")
            }
            (true, true) => {}
            (false, true) => return bad("abs_beta", "must be set together with abs_alpha"),
            (true, false) => return bad("abs_alpha", "must be set together with abs_beta"),
            (false, false) => {
                if !(self.abs_alpha > 1.0 && self.abs_alpha.is_finite()) {
                    return bad("abs_alpha", format!("must be > 1, got {}", self.abs_alpha));
                }
                if !(self.abs_beta >= self.abs_alpha && self.abs_beta.is_finite()) {
                    return bad(
                        "abs_beta",
                        format!("must be finite and >= abs_alpha = {}, got {}", self.abs_alpha, self.abs_beta),
                    );
                }
            }
        }
        for (key, n) in [
            ("n_u", self.n_u),
            ("n_sigma", self.n_sigma),
            ("static_n_u", self.static_n_u),
            ("static_n_sigma", self.static_n_sigma),
        ] {
            if n < crate::flow::grid::MIN_POINTS {
                return bad(key, format!("must be at least {}, got {n}", crate::flow::grid::MIN_POINTS));
            }
        }
        if !(self.t_max > 0.0 && self.t_max < 0.5) {
            return bad("t_max", format!("must lie in (0, 0.5), the flow ends at T = 1/2; got {}", self.t_max));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return bad("cfl", format!("must be positive, got {}", self.cfl));
        }
        if !(self.monitor_cadence > 0.0 && self.monitor_cadence.is_finite()) {
            return bad("monitor_cadence", format!("must be positive, got {}", self.monitor_cadence));
        }
        if let Some(s) = self.snapshot_times.iter().find(|s| !(**s >= 0.0 && **s <= self.t_max)) {
            return bad("snapshot_times", format!("{s} is outside [0, t_max = {}]", self.t_max));
        }
        if !self.epsilon.is_finite() {
            return bad("epsilon", format!("must be finite, got {}", self.epsilon));
        }
        if self.initial == InitialFamily::File && self.initial_path.is_none() {
            return bad("initial_path", "required when initial = file");
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("A", format!("must be positive, got {}", self.a));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad("B", format!("must be positive, got {}", self.b));
        }
        if self.samples == 0 {
            return bad("samples", "must be at least 1");
        }
        if self.fd_samples == 0 {
            return bad("fd_samples", "must be at least 1");
        }
        if self.sweep_values.iter().any(|v| !(*v > 1.0 && v.is_finite())) {
            return bad("sweep_values", "every value must be finite and > 1");
        }
        Ok(())
    }
}

/// Accumulates settings from the layered sources, then validates once.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    cfg: RunConfig,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("invalid value `{value}` for `{key}`: {e}"))
}

fn parse_list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_num(key, v.trim())).collect()
}

impl ConfigBuilder {
    pub fn new() -> Self {
        ConfigBuilder::default()
    }

    /// Set one key. The error message is meant to be wrapped with its source.
    fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let c = &mut self.cfg;
        let v = value.trim();
        match key {
            "abs_alpha" => c.abs_alpha = parse_num(key, v)?,
            "abs_beta" => c.abs_beta = parse_num(key, v)?,
            "n_u" => c.n_u = parse_num(key, v)?,
            "n_sigma" => c.n_sigma = parse_num(key, v)?,
            "t_max" => c.t_max = parse_num(key, v)?,
            "cfl" => c.cfl = parse_num(key, v)?,
            "monitor_cadence" => c.monitor_cadence = parse_num(key, v)?,
            "snapshot_times" => c.snapshot_times = parse_list(key, v)?,
            "max_retries" => c.max_retries = parse_num(key, v)?,
            "initial" => c.initial = v.parse()?,
            "epsilon" => c.epsilon = parse_num(key, v)?,
            "initial_path" => c.initial_path = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "A" => c.a = parse_num(key, v)?,
            "B" => c.b = parse_num(key, v)?,
            "out_dir" => c.out_dir = PathBuf::from(v),
            "seed" => c.seed = parse_num(key, v)?,
            "hessian_variant" => c.hessian_variant = v.parse()?,
            "samples" => c.samples = parse_num(key, v)?,
            "fd_samples" => c.fd_samples = parse_num(key, v)?,
            "static_n_u" => c.static_n_u = parse_num(key, v)?,
            "static_n_sigma" => c.static_n_sigma = parse_num(key, v)?,
            "sweep_values" => c.sweep_values = parse_list(key, v)?,
            "threads" => c.threads = parse_num(key, v)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Set a key from a non-file source such as a flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.apply(key, value).map_err(|message| Error::ConfigRange { key: key.into(), message })
    }

    pub fn parse_text(mut self, text: &str) -> Result<Self> {
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigParse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::ConfigParse { line, message: "empty key".into() });
            }
            self.apply(key, value).map_err(|message| Error::ConfigParse { line, message })?;
        }
        Ok(self)
    }

    /// Apply `HOPF_CRF_<KEY>` variables. The key part is matched without
    /// regard to case; unknown names are rejected.
    pub fn apply_env<I, K, V>(mut self, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut pairs: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| k.as_ref().strip_prefix(ENV_PREFIX).map(|s| (s.to_string(), v.as_ref().to_string())))
            .collect();
        pairs.sort();
        for (name, value) in pairs {
            let key = KEYS.iter().find(|k| k.eq_ignore_ascii_case(&name)).ok_or_else(|| Error::ConfigRange {
                key: format!("{ENV_PREFIX}{name}"),
                message: "unknown environment override".into(),
            })?;
            self.set(key, &value)?;
        }
        Ok(self)
    }

    pub fn preset(mut self, p: Preset) -> Self {
        let (a, b) = p.moduli();
        self.cfg.abs_alpha = a;
        self.cfg.abs_beta = b;
        self
    }

    pub fn build(self) -> Result<RunConfig> {
        self.cfg.validate()?;
        Ok(self.cfg)
    }

    /// For `sweep`, which sets the moduli per cell.
    pub fn build_without_moduli(self) -> Result<RunConfig> {
        self.cfg.validate_without_moduli()?;
        Ok(self.cfg)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigBuilder::new().parse_text(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli_only() {
        let c = parse_config("abs_alpha = 2\nabs_beta = 4").unwrap();
        assert_eq!((c.abs_alpha, c.abs_beta), (2.0, 4.0));
        let d = RunConfig::default();
        assert_eq!((c.n_u, c.n_sigma, c.t_max, c.cfl, c.a, c.b, c.seed), (64, 64, 0.49, 0.2, 10.0, 10.0, 42));
        assert_eq!(c.sweep_values, d.sweep_values);
    }

    #[test]
    fn t_max_range() {
        let e = parse_config("abs_alpha = 2\nabs_beta = 4\nt_max = 0.6").unwrap_err();
        assert!(matches!(e, Error::ConfigRange { ref key, .. } if key == "t_max"), "{e}");
    }

    #[test]
    fn empty_needs_moduli() {
        let e = parse_config("").unwrap_err();
        assert!(matches!(e, Error::ConfigRange { ref key, .. } if key == "abs_alpha"), "{e}");
    }

    #[test]
    fn sweep_builds_without_moduli() {
        let c = ConfigBuilder::new().parse_text("sweep_values = 2, 3").unwrap().build_without_moduli().unwrap();
        assert!(c.moduli().is_err());
        assert!(ConfigBuilder::new().parse_text("abs_alpha = 2").unwrap().build_without_moduli().is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config("# header\n\nabs_alpha = 1.5 # inline\nabs_beta=3\nsnapshot_times = 0.1, 0.2\n").unwrap();
        assert_eq!(c.abs_alpha, 1.5);
        assert_eq!(c.snapshot_times, vec![0.1, 0.2]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("abs_alpha = 2\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }), "{e}");
        let e = parse_config("abs_alpha = 2\n\nn_u = many\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 3, .. }), "{e}");
        let e = parse_config("just words").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 1, .. }), "{e}");
    }

    #[test]
    fn moduli_order_enforced() {
        let e = parse_config("abs_alpha = 4\nabs_beta = 2").unwrap_err();
        assert!(matches!(e, Error::ConfigRange { ref key, .. } if key == "abs_beta"));
    }

    #[test]
    fn env_and_preset_layers() {
        let b = ConfigBuilder::new()
            .parse_text("abs_alpha = 1.5\nabs_beta = 3\nn_u = 32")
            .unwrap()
            .apply_env([("HOPF_CRF_N_U", "16"), ("HOPF_CRF_a", "5"), ("PATH", "/bin")])
            .unwrap();
        let c = b.clone().build().unwrap();
        assert_eq!((c.n_u, c.a), (16, 5.0));
        let c = b.preset(Preset::Round).build().unwrap();
        assert_eq!((c.abs_alpha, c.abs_beta), (2.0, 2.0));
        assert!(ConfigBuilder::new().apply_env([("HOPF_CRF_NOPE", "1")]).is_err());
    }

    #[test]
    fn file_family_needs_path() {
        let e = parse_config("abs_alpha = 2\nabs_beta = 4\ninitial = file").unwrap_err();
        assert!(matches!(e, Error::ConfigRange { ref key, .. } if key == "initial_path"));
    }
}
