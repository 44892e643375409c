//! Flat `key = value` experiment configuration. List-valued keys are given
//! by repeating the key; a key present in the file replaces its default.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::graph::validate_epsilon;
use crate::traffic::DestinationRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Direct,
    Hierarchical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub gamma: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub uniform: bool,
    pub beta: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub trials: usize,
    pub hierarchical_trials: usize,
    pub seeds: Vec<u64>,
    pub c_r: f64,
    pub c1: f64,
    pub delta: f64,
    /// Sources sampled for the empirical level sizes (0 = all users).
    pub kbar_sources: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: (10..=14).map(|e| 1usize << e).collect(),
            gamma: vec![2.5],
            epsilon: vec![2.4, 2.7, 3.0],
            uniform: true,
            beta: vec![0.0, 1.0, 2.0, 2.5, 3.0, 4.0],
            policies: vec![PolicyKind::Direct, PolicyKind::Hierarchical],
            trials: 10_000,
            hierarchical_trials: 400,
            seeds: vec![1],
            c_r: 1.0,
            c1: 1.0,
            delta: 1.0,
            kbar_sources: 1000,
            output: None,
        }
    }
}

const KEYS: &[&str] = &[
    "n",
    "gamma",
    "epsilon",
    "rule",
    "beta",
    "policy",
    "trials",
    "hierarchical_trials",
    "seed",
    "c_r",
    "c1",
    "delta",
    "kbar_sources",
    "output",
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, Vec<(usize, &str)>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::parse(i + 1, format!("unknown key `{key}`")));
            };
            entries.entry(known).or_default().push((i + 1, value.trim()));
        }

        let mut cfg = Self::default();
        if let Some(v) = entries.get("n") {
            cfg.n = parse_all(v)?;
        }
        if let Some(v) = entries.get("gamma") {
            cfg.gamma = parse_all(v)?;
        }
        if let Some(v) = entries.get("epsilon") {
            cfg.epsilon = parse_all(v)?;
        }
        if let Some(v) = entries.get("beta") {
            cfg.beta = parse_all(v)?;
        }
        if let Some(v) = entries.get("rule") {
            let mut uniform = false;
            let mut powerlaw = false;
            for &(line, value) in v {
                match value {
                    "uniform" => uniform = true,
                    "powerlaw" => powerlaw = true,
                    other => return Err(Error::parse(line, format!("unknown rule `{other}`"))),
                }
            }
            cfg.uniform = uniform;
            if !powerlaw {
                cfg.beta.clear();
            }
        }
        if let Some(v) = entries.get("policy") {
            cfg.policies = v
                .iter()
                .map(|&(line, value)| match value {
                    "direct" => Ok(PolicyKind::Direct),
                    "hierarchical" => Ok(PolicyKind::Hierarchical),
                    other => Err(Error::parse(line, format!("unknown policy `{other}`"))),
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = entries.get("seed") {
            cfg.seeds = parse_all(v)?;
        }
        macro_rules! scalar {
            ($key:literal, $field:ident) => {
                if let Some(v) = entries.get($key) {
                    cfg.$field = parse_one($key, v)?;
                }
            };
        }
        scalar!("trials", trials);
        scalar!("hierarchical_trials", hierarchical_trials);
        scalar!("c_r", c_r);
        scalar!("c1", c1);
        scalar!("delta", delta);
        scalar!("kbar_sources", kbar_sources);
        if let Some(v) = entries.get("output") {
            cfg.output = Some(PathBuf::from(parse_one::<String>("output", v)?));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.gamma.is_empty() || self.epsilon.is_empty() {
            return Err(Error::param("config", "n, gamma and epsilon need at least one value"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seed", "need at least one seed"));
        }
        if self.policies.is_empty() {
            return Err(Error::param("policy", "need at least one policy"));
        }
        if self.rules().is_empty() {
            return Err(Error::param("rule", "need the uniform rule or at least one beta"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 3) {
            return Err(Error::param("n", format!("need n ≥ 3, got {n}")));
        }
        if let Some(&g) = self.gamma.iter().find(|&&g| !(g > 2.0 && g.is_finite())) {
            return Err(Error::param("gamma", format!("must exceed 2, got {g}")));
        }
        for &e in &self.epsilon {
            validate_epsilon(e)?;
        }
        if let Some(&b) = self.beta.iter().find(|&&b| !(b >= 0.0 && b.is_finite())) {
            return Err(Error::param("beta", format!("must be finite and ≥ 0, got {b}")));
        }
        if self.trials == 0 || self.hierarchical_trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        if !(self.c_r > 0.0 && self.c1 > 0.0 && self.delta >= 0.0) {
            return Err(Error::param("c_r", "grid constants must satisfy c_r > 0, c1 > 0, delta ≥ 0"));
        }
        Ok(())
    }

    /// Destination rules in sweep order: uniform first, then each β.
    pub fn rules(&self) -> Vec<DestinationRule> {
        let mut out = Vec::new();
        if self.uniform {
            out.push(DestinationRule::Uniform);
        }
        out.extend(self.beta.iter().map(|&beta| DestinationRule::PowerLaw { beta }));
        out
    }
}

fn parse_all<T: FromStr>(values: &[(usize, &str)]) -> Result<Vec<T>> {
    values
        .iter()
        .map(|&(line, v)| v.parse().map_err(|_| Error::parse(line, format!("cannot parse `{v}`"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, values: &[(usize, &str)]) -> Result<T> {
    if values.len() > 1 {
        return Err(Error::parse(values[1].0, format!("`{key}` takes a single value")));
    }
    parse_all(values).map(|mut v| v.remove(0))
}
