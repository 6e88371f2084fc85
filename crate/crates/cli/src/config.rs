//! Experiment configuration: a TOML document with a `schema_version` key,
//! an experiment `kind`, and `[model]`, `[sampling]`, `[fit]`, `[output]`
//! tables.

use serde::Deserialize;
use std::fmt;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Xx,
    Chern,
    Metal,
    Rs,
    Toric,
    Double,
    Mera,
    OracleCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Xx => "xx",
            Kind::Chern => "chern",
            Kind::Metal => "metal",
            Kind::Rs => "rs",
            Kind::Toric => "toric",
            Kind::Double => "double",
            Kind::Mera => "mera",
            Kind::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StateLabel {
    StringNet,
    Mes,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BasisName {
    X,
    Z,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub sizes: Option<Vec<usize>>,
    pub l: Option<usize>,
    pub l2: Option<usize>,
    pub n_f: Option<f64>,
    pub mu: Option<f64>,
    pub length_divisor: Option<usize>,
    pub separations: Option<Vec<usize>>,
    pub etas: Option<Vec<f64>>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub v: Option<f64>,
    pub twist: Option<f64>,
    pub width: Option<usize>,
    pub interval: Option<usize>,
    pub p: Option<u32>,
    pub primes: Option<Vec<u32>>,
    pub state: Option<StateLabel>,
    pub labels: Option<[u32; 2]>,
    pub basis: Option<BasisName>,
    pub windows: Option<Vec<[usize; 2]>>,
    pub log_d: Option<f64>,
    pub instances: Option<usize>,
    pub max_modes: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub threads: Option<usize>,
    #[serde(default = "default_outcome_seeds")]
    pub outcome_seeds: usize,
}

fn default_samples() -> usize {
    10_000
}

fn default_seed() -> u64 {
    1
}

fn default_outcome_seeds() -> usize {
    16
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { n_samples: default_samples(), seed: default_seed(), threads: None, outcome_seeds: default_outcome_seeds() }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub window: Option<[f64; 2]>,
    pub tail_window: Option<[f64; 2]>,
    pub collapse_threshold: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub name: Option<String>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of `key = …` inside `[table]` (or the top level for `None`).
fn line_of(text: &str, table: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        if k.trim() == key && current.as_deref() == table {
            return Some(i + 1);
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, table: Option<&str>, key: &str, message: impl Into<String>) -> ConfigError {
        let line = line_of(self.text, table, key).or_else(|| table.and_then(|t| line_of_table(self.text, t)));
        ConfigError { line, message: message.into() }
    }

    fn model(&self, key: &str, message: impl Into<String>) -> ConfigError {
        self.fail(Some("model"), key, format!("model.{key}: {}", message.into()))
    }
}

fn line_of_table(text: &str, table: &str) -> Option<usize> {
    text.lines().position(|l| l.trim() == format!("[{table}]")).map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates. Errors carry the offending line when known.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            ConfigError { line, message: e.message().to_string() }
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str) -> Result<(), ConfigError> {
        let c = Checker { text };
        if self.schema_version != SCHEMA_VERSION {
            return Err(c.fail(None, "schema_version", format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", self.schema_version)));
        }
        let s = &self.sampling;
        if s.n_samples == 0 {
            return Err(c.fail(Some("sampling"), "n_samples", "sampling.n_samples must be positive"));
        }
        if s.threads == Some(0) {
            return Err(c.fail(Some("sampling"), "threads", "sampling.threads must be positive"));
        }
        if s.outcome_seeds == 0 {
            return Err(c.fail(Some("sampling"), "outcome_seeds", "sampling.outcome_seeds must be positive"));
        }
        for (key, w) in [("window", self.fit.window), ("tail_window", self.fit.tail_window)] {
            if let Some([lo, hi]) = w {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(c.fail(Some("fit"), key, format!("fit.{key} must be [lo, hi] with lo < hi")));
                }
            }
        }
        if let Some(t) = self.fit.collapse_threshold {
            if !(t > 0.0) {
                return Err(c.fail(Some("fit"), "collapse_threshold", "fit.collapse_threshold must be positive"));
            }
        }
        if let Some(name) = &self.output.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(c.fail(Some("output"), "name", "output.name must be a plain file stem"));
            }
        }
        let m = &self.model;
        let positive_f = |key: &str, v: Option<f64>| -> Result<(), ConfigError> {
            match v {
                Some(x) if !x.is_finite() => Err(c.model(key, "must be finite")),
                _ => Ok(()),
            }
        };
        for (k, v) in [("t1", m.t1), ("t2", m.t2), ("v", m.v), ("twist", m.twist), ("log_d", m.log_d)] {
            positive_f(k, v)?;
        }
        match self.kind {
            Kind::Xx => {
                let sizes = self.xx_sizes();
                let d = m.length_divisor.unwrap_or(32);
                for &l in &sizes {
                    if l < 8 || l % 2 != 0 {
                        return Err(c.model("sizes", format!("chain length {l} must be even and ≥ 8")));
                    }
                    if l % d != 0 || l / d == 0 {
                        return Err(c.model("length_divisor", format!("{d} does not divide L = {l}")));
                    }
                    if l % sizes[0] != 0 {
                        return Err(c.model("sizes", format!("{l} is not a multiple of the smallest size {}", sizes[0])));
                    }
                }
                if sizes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(c.model("sizes", "sizes must be strictly increasing"));
                }
                if m.n_f.is_some() && m.mu.is_some() {
                    return Err(c.model("mu", "give either n_f or mu, not both"));
                }
                if let Some(nf) = m.n_f {
                    if !(nf > 0.0 && nf < 1.0) {
                        return Err(c.model("n_f", format!("filling {nf} outside (0, 1)")));
                    }
                }
                if let Some(mu) = m.mu {
                    if !(mu > -1.0 && mu < 1.0) {
                        return Err(c.model("mu", format!("chemical potential {mu} outside (-1, 1)")));
                    }
                }
                self.check_separations(&c, 1)?;
                if let Some(etas) = &m.etas {
                    if etas.is_empty() || etas.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                        return Err(c.model("etas", "cross ratios must lie in (0, 1)"));
                    }
                    if m.separations.is_some() {
                        return Err(c.model("etas", "give either etas or separations, not both"));
                    }
                }
            }
            Kind::Chern | Kind::Metal => {
                let l = self.model.l.unwrap_or(if self.kind == Kind::Chern { 24 } else { 32 });
                if l < 4 {
                    return Err(c.model("l", format!("cylinder size {l} must be ≥ 4")));
                }
                if m.width == Some(0) {
                    return Err(c.model("width", "ring width must be positive"));
                }
                let w = m.width.unwrap_or(2);
                self.check_separations(&c, 1)?;
                if let Some(r) = self.separations().iter().find(|&&r| 2 * w + r > l) {
                    return Err(c.model("separations", format!("separation {r} does not fit two rings of width {w} in {l} rows")));
                }
            }
            Kind::Rs => {
                let l = m.l.unwrap_or(1024);
                if l < 4 || l % 2 != 0 {
                    return Err(c.model("l", format!("ring length {l} must be even and ≥ 4")));
                }
                let len = m.interval.unwrap_or(2);
                if len == 0 {
                    return Err(c.model("interval", "interval length must be positive"));
                }
                self.check_separations(&c, 1)?;
                for &r in &self.separations() {
                    if 2 * len + r > l || r % 2 != 0 {
                        return Err(c.model("separations", format!("separation {r} must be even and fit two intervals of {len} in {l} sites")));
                    }
                }
            }
            Kind::Toric | Kind::Double => {
                let l = m.l.unwrap_or(6);
                if l < 2 || m.l2.is_some_and(|l2| l2 < 2) {
                    return Err(c.model("l", "torus sides must be ≥ 2"));
                }
                let primes = self.primes();
                if primes.is_empty() {
                    return Err(c.model("primes", "need at least one prime"));
                }
                if let Some(&p) = primes.iter().find(|&&p| !mieflow_core::stabilizer::is_prime(p)) {
                    return Err(c.model(if self.kind == Kind::Toric { "p" } else { "primes" }, format!("{p} is not prime")));
                }
                if let Some([a, b]) = m.labels {
                    if primes.iter().any(|&p| a >= p || b >= p) {
                        return Err(c.model("labels", "labels must lie in Z_p for every layer"));
                    }
                }
                for [start, width] in self.windows() {
                    if width == 0 || start >= l || width > l {
                        return Err(c.model("windows", format!("window [{start}, {width}] invalid on {l} columns")));
                    }
                }
            }
            Kind::Mera => {
                let sizes = m.sizes.clone().unwrap_or_else(|| vec![64, 128]);
                if let Some(&l) = sizes.iter().find(|&&l| l < 16 || !l.is_power_of_two()) {
                    return Err(c.model("sizes", format!("MERA size {l} must be a power of two ≥ 16")));
                }
                if m.log_d.is_some_and(|d| d <= 0.0) {
                    return Err(c.model("log_d", "log_d must be positive"));
                }
            }
            Kind::OracleCheck => {
                if m.instances == Some(0) {
                    return Err(c.model("instances", "need at least one instance"));
                }
                if let Some(n) = m.max_modes {
                    if !(4..=12).contains(&n) {
                        return Err(c.model("max_modes", format!("max_modes {n} outside 4..=12")));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_separations(&self, c: &Checker, min: usize) -> Result<(), ConfigError> {
        if let Some(rs) = &self.model.separations {
            if rs.is_empty() {
                return Err(c.model("separations", "list is empty"));
            }
            if rs.iter().any(|&r| r < min) {
                return Err(c.model("separations", format!("separations must be ≥ {min}")));
            }
            if rs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(c.model("separations", "separations must be strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn xx_sizes(&self) -> Vec<usize> {
        self.model.sizes.clone().or(self.model.l.map(|l| vec![l])).unwrap_or_else(|| vec![64, 128])
    }

    /// Separations, with defaults per experiment.
    pub fn separations(&self) -> Vec<usize> {
        if let Some(rs) = &self.model.separations {
            return rs.clone();
        }
        match self.kind {
            Kind::Xx => {
                let l = self.xx_sizes()[0];
                let la = l / self.model.length_divisor.unwrap_or(32);
                let mut rs = Vec::new();
                let mut r = (la / 2).max(1);
                while r + la <= l / 2 {
                    rs.push(r);
                    r = ((r as f64) * 1.5).ceil() as usize;
                }
                rs
            }
            Kind::Chern | Kind::Metal => vec![1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16],
            Kind::Rs => vec![8, 16, 32, 64, 128, 256],
            _ => Vec::new(),
        }
    }

    pub fn primes(&self) -> Vec<u32> {
        match self.kind {
            Kind::Double => self.model.primes.clone().unwrap_or_else(|| vec![2, 3]),
            _ => vec![self.model.p.unwrap_or(2)],
        }
    }

    pub fn windows(&self) -> Vec<[usize; 2]> {
        let l = self.model.l.unwrap_or(6);
        self.model.windows.clone().unwrap_or_else(|| vec![[0, 1], [l / 2, 1]])
    }

    pub fn name(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::parse("schema_version = 1\nkind = \"xx\"\n").unwrap();
        assert_eq!(c.xx_sizes(), vec![64, 128]);
        assert_eq!(c.sampling.n_samples, 10_000);
        assert_eq!(c.separations()[0], 1);
    }

    #[test]
    fn negative_size_reports_line() {
        let text = "schema_version = 1\nkind = \"chern\"\n\n[model]\nl = -24\n";
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(e.line, Some(5), "{e}");
    }

    #[test]
    fn validation_reports_line() {
        let text = "schema_version = 1\nkind = \"xx\"\n[model]\nsizes = [64, 128]\nn_f = 1.5\n";
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(e.line, Some(5), "{e}");
        let text = "schema_version = 1\nkind = \"toric\"\n[model]\np = 4\n";
        assert_eq!(ExperimentConfig::parse(text).unwrap_err().line, Some(4));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "schema_version = 1\nkind = \"rs\"\n[model]\nlength = 3\n";
        let e = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(e.line, Some(4), "{e}");
        assert!(ExperimentConfig::parse("schema_version = 2\nkind = \"rs\"\n").is_err());
        assert!(ExperimentConfig::parse("schema_version = 1\nkind = \"spin-glass\"\n").is_err());
    }
}
