//! Scenario configuration: flat `key = value` text files, preset
//! lookup, and resolution into validated domain inputs.
//!
//! Recognized keys:
//!
//! ```text
//! rates.k1  rates.k_minus1  rates.k2
//! init.s0   init.e0  init.c0  init.p0        (c0, p0 default 0)
//! time.t_end                                 (seconds, or "5*t2" style)
//! integrator.rel_tol  integrator.abs_tol
//! regime.eps_lo  regime.eps_hi
//! grid.kind (log|linear)  grid.count
//! output.dir
//! sir.beta  sir.gamma  sir.n0
//! ```
//!
//! Unknown keys are rejected. `#` starts a comment. A preset is just a
//! config file shipped under the preset directory; an explicit config
//! file is applied on top of the preset key by key.

use qssa_core::kinetics::{
    derive_constants, DerivedConstants, InitialState, RateConstants, RegimeKind, DEFAULT_EPS_HI,
    DEFAULT_EPS_LO,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable overriding the preset search directory.
pub const PRESETS_DIR_ENV: &str = "QSSA_PRESETS_DIR";
/// Default preset directory, relative to the working directory.
pub const PRESETS_DIR_DEFAULT: &str = "presets";

pub const DEFAULT_GRID_COUNT: usize = 2000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected `key = value`, got `{text}`")]
    Syntax {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("{path}:{line}: unknown key `{key}`")]
    UnknownKey {
        path: PathBuf,
        line: usize,
        key: String,
    },
    #[error("{path}:{line}: invalid value for `{key}`: {reason}")]
    BadValue {
        path: PathBuf,
        line: usize,
        key: String,
        reason: String,
    },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("config mixes enzyme keys (rates.*) with epidemic keys (sir.*)")]
    MixedSystems,
    #[error("preset `{name}` not found at {path}")]
    PresetNotFound { name: String, path: PathBuf },
    #[error("invalid domain values: {0}")]
    Domain(#[from] qssa_core::kinetics::KineticsError),
    #[error("t_end resolves to {value}, but it must be positive and finite")]
    BadTEnd { value: f64 },
    #[error("time scale `{name}` is undefined for this scenario (requires enzyme material)")]
    UndefinedTimeScale { name: &'static str },
    #[error("grid lower bound {t_min} is not below t_end {t_end}")]
    DegenerateGrid { t_min: f64, t_end: f64 },
}

/// End time, either absolute or as a multiple of a named time scale of
/// the classified regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TEnd {
    Seconds(f64),
    MultipleOfT1(f64),
    MultipleOfT2(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            kind: GridKind::Log,
            count: DEFAULT_GRID_COUNT,
        }
    }
}

/// Raw key/value pairs with provenance, before domain validation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "rates.k1",
    "rates.k_minus1",
    "rates.k2",
    "init.s0",
    "init.e0",
    "init.c0",
    "init.p0",
    "time.t_end",
    "integrator.rel_tol",
    "integrator.abs_tol",
    "regime.eps_lo",
    "regime.eps_hi",
    "grid.kind",
    "grid.count",
    "output.dir",
    "sir.beta",
    "sir.gamma",
    "sir.n0",
];

impl RawConfig {
    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut raw = Self::default();
        raw.merge_text(&text, path)?;
        Ok(raw)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn merge_text(&mut self, text: &str, path: &Path) -> Result<(), ConfigError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    path: path.to_owned(),
                    line: lineno + 1,
                    text: line.to_owned(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    path: path.to_owned(),
                    line: lineno + 1,
                    key: key.to_owned(),
                });
            }
            self.values.insert(key.to_owned(), value.to_owned());
        }
        Ok(())
    }

    /// Apply another raw config on top of this one.
    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn get_f64(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|e| ConfigError::BadValue {
                    path: PathBuf::from("<config>"),
                    line: 0,
                    key: key.to_owned(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    pub fn into_scenario(self) -> Result<ScenarioConfig, ConfigError> {
        let has_rates = ["rates.k1", "rates.k_minus1", "rates.k2"]
            .iter()
            .any(|k| self.get(k).is_some());
        let has_sir = ["sir.beta", "sir.gamma", "sir.n0"]
            .iter()
            .any(|k| self.get(k).is_some());
        if has_rates && has_sir {
            return Err(ConfigError::MixedSystems);
        }

        let enzyme = if has_rates {
            let k1 = self
                .get_f64("rates.k1")?
                .ok_or(ConfigError::MissingKey("rates.k1"))?;
            let k_minus1 = self
                .get_f64("rates.k_minus1")?
                .ok_or(ConfigError::MissingKey("rates.k_minus1"))?;
            let k2 = self
                .get_f64("rates.k2")?
                .ok_or(ConfigError::MissingKey("rates.k2"))?;
            let s0 = self
                .get_f64("init.s0")?
                .ok_or(ConfigError::MissingKey("init.s0"))?;
            let e0 = self
                .get_f64("init.e0")?
                .ok_or(ConfigError::MissingKey("init.e0"))?;
            let c0 = self.get_f64("init.c0")?.unwrap_or(0.0);
            let p0 = self.get_f64("init.p0")?.unwrap_or(0.0);
            Some(EnzymeSpec {
                rates: RateConstants::new(k1, k_minus1, k2)?,
                init: InitialState::new(s0, e0, c0, p0)?,
            })
        } else {
            None
        };

        let sir = if has_sir {
            let beta = self
                .get_f64("sir.beta")?
                .ok_or(ConfigError::MissingKey("sir.beta"))?;
            let gamma = self
                .get_f64("sir.gamma")?
                .ok_or(ConfigError::MissingKey("sir.gamma"))?;
            let n0 = self
                .get_f64("sir.n0")?
                .ok_or(ConfigError::MissingKey("sir.n0"))?;
            Some(SirSpec { beta, gamma, n0 })
        } else {
            None
        };

        let t_end = match self.get("time.t_end") {
            None => None,
            Some(text) => Some(parse_t_end(text).ok_or_else(|| ConfigError::BadValue {
                path: PathBuf::from("<config>"),
                line: 0,
                key: "time.t_end".to_owned(),
                reason: format!("`{text}` is not a number or `<number>*t1|t2`"),
            })?),
        };

        let grid_kind = match self.get("grid.kind") {
            None => GridKind::Log,
            Some("log") => GridKind::Log,
            Some("linear") => GridKind::Linear,
            Some(other) => {
                return Err(ConfigError::BadValue {
                    path: PathBuf::from("<config>"),
                    line: 0,
                    key: "grid.kind".to_owned(),
                    reason: format!("`{other}` is not `log` or `linear`"),
                })
            }
        };
        let grid_count = match self.get("grid.count") {
            None => DEFAULT_GRID_COUNT,
            Some(v) => v.parse::<usize>().map_err(|e| ConfigError::BadValue {
                path: PathBuf::from("<config>"),
                line: 0,
                key: "grid.count".to_owned(),
                reason: e.to_string(),
            })?,
        };

        Ok(ScenarioConfig {
            enzyme,
            sir,
            t_end,
            rel_tol: self.get_f64("integrator.rel_tol")?,
            abs_tol: self.get_f64("integrator.abs_tol")?,
            eps_lo: self.get_f64("regime.eps_lo")?.unwrap_or(DEFAULT_EPS_LO),
            eps_hi: self.get_f64("regime.eps_hi")?.unwrap_or(DEFAULT_EPS_HI),
            grid: GridSpec {
                kind: grid_kind,
                count: grid_count.max(2),
            },
            out_dir: self.get("output.dir").map(PathBuf::from),
        })
    }
}

fn parse_t_end(text: &str) -> Option<TEnd> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Some(TEnd::Seconds(v));
    }
    if t == "t1" {
        return Some(TEnd::MultipleOfT1(1.0));
    }
    if t == "t2" {
        return Some(TEnd::MultipleOfT2(1.0));
    }
    let (num, scale) = t.split_once('*')?;
    let factor: f64 = num.trim().parse().ok()?;
    match scale.trim() {
        "t1" => Some(TEnd::MultipleOfT1(factor)),
        "t2" => Some(TEnd::MultipleOfT2(factor)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnzymeSpec {
    pub rates: RateConstants,
    pub init: InitialState,
}

#[derive(Debug, Clone, Copy)]
pub struct SirSpec {
    pub beta: f64,
    pub gamma: f64,
    pub n0: f64,
}

/// Fully parsed configuration, before time-scale resolution.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub enzyme: Option<EnzymeSpec>,
    pub sir: Option<SirSpec>,
    pub t_end: Option<TEnd>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub grid: GridSpec,
    pub out_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn enzyme(&self) -> Result<&EnzymeSpec, ConfigError> {
        self.enzyme
            .as_ref()
            .ok_or(ConfigError::MissingKey("rates.k1"))
    }

    /// Resolve `t_end`, interpreting `t1`/`t2` through the classified
    /// regime (the standard pair is used for intermediate epsilon).
    pub fn resolve_t_end(
        &self,
        dc: &DerivedConstants,
        kind: RegimeKind,
    ) -> Result<f64, ConfigError> {
        let spec = self.t_end.ok_or(ConfigError::MissingKey("time.t_end"))?;
        let value = match spec {
            TEnd::Seconds(v) => v,
            TEnd::MultipleOfT1(f) => f * regime_pair(dc, kind)?.0,
            TEnd::MultipleOfT2(f) => f * regime_pair(dc, kind)?.1,
        };
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(ConfigError::BadTEnd { value })
        }
    }
}

/// The fast/slow pair belonging to a regime; the intermediate case
/// falls back to the standard pair (at epsilon near one the two pairs
/// coincide up to the saturation factor).
pub fn regime_pair(dc: &DerivedConstants, kind: RegimeKind) -> Result<(f64, f64), ConfigError> {
    match kind {
        RegimeKind::ReverseQssa => Ok((
            dc.t1_reverse
                .ok_or(ConfigError::UndefinedTimeScale { name: "t1" })?,
            dc.t2_reverse,
        )),
        _ => Ok((
            dc.t1_standard,
            dc.t2_standard
                .ok_or(ConfigError::UndefinedTimeScale { name: "t2" })?,
        )),
    }
}

/// Output sample times (positive, strictly increasing, ending exactly
/// at `t_end`; the implicit `t = 0` row is added by the writers).
pub fn sample_grid(spec: &GridSpec, t1: f64, t_end: f64) -> Result<Vec<f64>, ConfigError> {
    let n = spec.count;
    match spec.kind {
        GridKind::Linear => Ok((1..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()),
        GridKind::Log => {
            let t_min = t1 / 100.0;
            if !(t_min > 0.0 && t_min < t_end) {
                return Err(ConfigError::DegenerateGrid { t_min, t_end });
            }
            let span = (t_end / t_min).ln();
            let mut g: Vec<f64> = (0..n)
                .map(|i| t_min * (span * i as f64 / (n - 1) as f64).exp())
                .collect();
            *g.last_mut().unwrap() = t_end;
            for i in 1..g.len() {
                debug_assert!(g[i] > g[i - 1]);
            }
            Ok(g)
        }
    }
}

/// Locate the preset directory (environment override, else
/// `./presets`).
pub fn presets_dir() -> PathBuf {
    std::env::var_os(PRESETS_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(PRESETS_DIR_DEFAULT))
}

/// Load a named preset from the preset directory.
pub fn load_preset(name: &str) -> Result<RawConfig, ConfigError> {
    let path = presets_dir().join(format!("{name}.txt"));
    if !path.is_file() {
        return Err(ConfigError::PresetNotFound {
            name: name.to_owned(),
            path,
        });
    }
    RawConfig::parse_file(&path)
}

/// Load the scenario from an optional preset plus an optional explicit
/// config file (the file's keys win).
pub fn load_scenario(
    preset: Option<&str>,
    config_path: Option<&Path>,
) -> Result<ScenarioConfig, ConfigError> {
    let mut raw = RawConfig::default();
    if let Some(name) = preset {
        raw.merge(&load_preset(name)?);
    }
    if let Some(path) = config_path {
        raw.merge(&RawConfig::parse_file(path)?);
    }
    raw.into_scenario()
}

/// Derived constants of the enzyme scenario.
pub fn enzyme_constants(spec: &EnzymeSpec) -> DerivedConstants {
    derive_constants(&spec.rates, &spec.init)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut raw = RawConfig::default();
        raw.merge_text(text, Path::new("<test>"))?;
        raw.into_scenario()
    }

    #[test]
    fn parses_enzyme_scenario_with_defaults() {
        let cfg = parse(
            "rates.k1 = 4e6\nrates.k_minus1 = 25\nrates.k2 = 15\n\
             init.s0 = 1e-5\ninit.e0 = 1e-8\ntime.t_end = 5*t2\n",
        )
        .unwrap();
        let enzyme = cfg.enzyme().unwrap();
        assert_eq!(enzyme.init.c0(), 0.0);
        assert_eq!(cfg.grid.kind, GridKind::Log);
        assert_eq!(cfg.grid.count, DEFAULT_GRID_COUNT);
        assert_eq!(cfg.t_end, Some(TEnd::MultipleOfT2(5.0)));
        let dc = enzyme_constants(enzyme);
        let t_end = cfg.resolve_t_end(&dc, RegimeKind::StandardQssa).unwrap();
        assert!((t_end - 125.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_syntax() {
        let mut raw = RawConfig::default();
        let err = raw
            .merge_text("rates.k1 = 1\nbogus.key = 2\n", Path::new("<t>"))
            .unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 2, .. }));
        let err = raw
            .merge_text("rates.k1 4e6\n", Path::new("<t>"))
            .unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse(
            "# reference scenario\nrates.k1 = 1 # binding\nrates.k_minus1 = 2\nrates.k2 = 3\n\n\
             init.s0 = 1\ninit.e0 = 1\n",
        )
        .unwrap();
        assert!(cfg.enzyme().is_ok());
    }

    #[test]
    fn t_end_forms() {
        assert_eq!(parse_t_end("12.5"), Some(TEnd::Seconds(12.5)));
        assert_eq!(parse_t_end("5*t2"), Some(TEnd::MultipleOfT2(5.0)));
        assert_eq!(parse_t_end("0.5 * t1"), Some(TEnd::MultipleOfT1(0.5)));
        assert_eq!(parse_t_end("t2"), Some(TEnd::MultipleOfT2(1.0)));
        assert_eq!(parse_t_end("5*t3"), None);
    }

    #[test]
    fn mixed_systems_are_rejected() {
        let err = parse("rates.k1 = 1\nsir.beta = 0.5\n").unwrap_err();
        assert!(matches!(err, ConfigError::MixedSystems));
    }

    #[test]
    fn sir_only_scenario() {
        let cfg = parse("sir.beta = 0.5\nsir.gamma = 0.25\nsir.n0 = 4\n").unwrap();
        assert!(cfg.enzyme.is_none());
        let sir = cfg.sir.unwrap();
        assert_eq!((sir.beta, sir.gamma, sir.n0), (0.5, 0.25, 4.0));
    }

    #[test]
    fn invalid_domain_values_are_rejected() {
        let err =
            parse("rates.k1 = -1\nrates.k_minus1 = 2\nrates.k2 = 3\ninit.s0 = 1\ninit.e0 = 1\n")
                .unwrap_err();
        assert!(matches!(err, ConfigError::Domain(_)));
    }

    #[test]
    fn later_keys_override_earlier_ones() {
        let mut raw = RawConfig::default();
        raw.merge_text(
            "rates.k1 = 1\nrates.k_minus1 = 1\nrates.k2 = 1\ninit.s0 = 1\ninit.e0 = 1\n",
            Path::new("<a>"),
        )
        .unwrap();
        let mut overlay = RawConfig::default();
        overlay
            .merge_text("init.e0 = 9\n", Path::new("<b>"))
            .unwrap();
        raw.merge(&overlay);
        let cfg = raw.into_scenario().unwrap();
        assert_eq!(cfg.enzyme().unwrap().init.e0(), 9.0);
    }

    #[test]
    fn log_grid_shape() {
        let spec = GridSpec {
            kind: GridKind::Log,
            count: 100,
        };
        let g = sample_grid(&spec, 1e-2, 10.0).unwrap();
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 1e-4);
        assert_eq!(*g.last().unwrap(), 10.0);
        for w in g.windows(2) {
            assert!(w[1] > w[0]);
        }
        let lin = sample_grid(
            &GridSpec {
                kind: GridKind::Linear,
                count: 5,
            },
            1e-2,
            8.0,
        )
        .unwrap();
        assert_eq!(lin, vec![2.0, 4.0, 6.0, 8.0]);
    }
}
