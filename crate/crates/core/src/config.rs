//! Simulation parameters, the node weight table and the flat key-value
//! config format.
//!
//! A config file is a list of `key = value` lines. `#` starts a comment.
//! Keys are exactly the field names used by [`SimConfig::set`]:
//!
//! ```text
//! N = 100
//! s = 0.9
//! theta = 0.66
//! srrs_enabled = true
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NodeId;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Node count, adversary included.
    pub n: usize,
    /// Zipf exponent of the honest weight distribution.
    pub s: f64,
    /// Confirmation threshold as a fraction of total weight.
    pub theta: f64,
    /// Parent references per block.
    pub n_p: usize,
    /// Network-wide blocks per second.
    pub bps: f64,
    /// Per-transmission loss probability.
    pub l: f64,
    /// Watts–Strogatz rewiring probability.
    pub gamma: f64,
    /// Ring-lattice degree.
    pub k: usize,
    /// Adversary weight fraction; 0 disables the adversary.
    pub q: f64,
    pub d_min: u64,
    pub d_max: u64,
    pub t_max: u64,
    pub srrs_enabled: bool,
    /// Common-coin epoch length.
    pub epoch: u64,
    /// Delay from conflict creation to the first coin evaluation.
    pub d_start: u64,
    /// Hash constant multiplying the coin value.
    pub c: u64,
    /// Fraction of `q` an honest-supported color must reach before the adversary baits again.
    pub adv_trigger: f64,
    pub solidification_interval: u64,
    pub reattach_interval: u64,
    pub seed: u64,
    /// When the adversary injects the initial double spend.
    pub attack_start: u64,
    /// End the run as soon as every honest node has confirmed the same color of every conflict set.
    pub stop_on_resolution: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            s: 0.9,
            theta: 0.66,
            n_p: 8,
            bps: 100.0,
            l: 0.0,
            gamma: 1.0,
            k: 8,
            q: 0.05,
            d_min: 100,
            d_max: 100,
            t_max: 60_000,
            srrs_enabled: false,
            epoch: 5_000,
            d_start: 5_000,
            c: 1000,
            adv_trigger: 0.8,
            solidification_interval: 5_000,
            reattach_interval: 5_000,
            seed: 0,
            attack_start: 10_000,
            stop_on_resolution: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("N must be at least 2")]
    TooFewNodes,
    #[error("s must be a finite non-negative number")]
    BadZipf,
    #[error("theta must exceed 0.5 and be at most 1")]
    BadTheta,
    #[error("n_p must be at least 1")]
    NoParents,
    #[error("bps must be positive")]
    BadRate,
    #[error("{0} must lie in [0, 1]")]
    NotProbability(&'static str),
    #[error("k must be even for ring lattice")]
    OddDegree,
    #[error("k must satisfy 2 <= k < N")]
    DegreeRange,
    #[error("q must lie in [0, 1)")]
    BadAdversaryWeight,
    #[error("d_min must not exceed d_max")]
    DelayBounds,
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

/// Keys accepted by [`SimConfig::set`], in canonical output order.
pub const CONFIG_KEYS: &[&str] = &[
    "N",
    "s",
    "theta",
    "n_p",
    "bps",
    "l",
    "gamma",
    "k",
    "q",
    "d_min",
    "d_max",
    "t_max",
    "srrs_enabled",
    "D",
    "D_start",
    "c",
    "adv_trigger",
    "solidification_interval",
    "reattach_interval",
    "seed",
    "attack_start",
    "stop_on_resolution",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        }),
    }
}

/// Splits a config line into `(key, value)`, dropping comments. `Ok(None)` for blank lines.
pub(crate) fn split_line(raw: &str, line: usize) -> Result<Option<(&str, &str)>, ConfigError> {
    let content = raw.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let (key, value) = content
        .split_once('=')
        .ok_or(ConfigError::Syntax { line })?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() || value.is_empty() {
        return Err(ConfigError::Syntax { line });
    }
    Ok(Some((key, value)))
}

impl SimConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "N" => self.n = parse(key, value)?,
            "s" => self.s = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "n_p" => self.n_p = parse(key, value)?,
            "bps" => self.bps = parse(key, value)?,
            "l" => self.l = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "d_min" => self.d_min = parse(key, value)?,
            "d_max" => self.d_max = parse(key, value)?,
            "t_max" => self.t_max = parse(key, value)?,
            "srrs_enabled" => self.srrs_enabled = parse_bool(key, value)?,
            "D" => self.epoch = parse(key, value)?,
            "D_start" => self.d_start = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "adv_trigger" => self.adv_trigger = parse(key, value)?,
            "solidification_interval" => self.solidification_interval = parse(key, value)?,
            "reattach_interval" => self.reattach_interval = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "attack_start" => self.attack_start = parse(key, value)?,
            "stop_on_resolution" => self.stop_on_resolution = parse_bool(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Renders the value of `key` in the same form [`SimConfig::set`] accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "N" => self.n.to_string(),
            "s" => self.s.to_string(),
            "theta" => self.theta.to_string(),
            "n_p" => self.n_p.to_string(),
            "bps" => self.bps.to_string(),
            "l" => self.l.to_string(),
            "gamma" => self.gamma.to_string(),
            "k" => self.k.to_string(),
            "q" => self.q.to_string(),
            "d_min" => self.d_min.to_string(),
            "d_max" => self.d_max.to_string(),
            "t_max" => self.t_max.to_string(),
            "srrs_enabled" => self.srrs_enabled.to_string(),
            "D" => self.epoch.to_string(),
            "D_start" => self.d_start.to_string(),
            "c" => self.c.to_string(),
            "adv_trigger" => self.adv_trigger.to_string(),
            "solidification_interval" => self.solidification_interval.to_string(),
            "reattach_interval" => self.reattach_interval.to_string(),
            "seed" => self.seed.to_string(),
            "attack_start" => self.attack_start.to_string(),
            "stop_on_resolution" => self.stop_on_resolution.to_string(),
            _ => return None,
        })
    }

    /// Applies an override of the form `KEY=VALUE`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        match split_line(assignment, 1)? {
            Some((key, value)) => self.set(key, value),
            None => Err(ConfigError::Syntax { line: 1 }),
        }
    }

    /// Parses config text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut config = SimConfig::default();
        for (i, raw) in text.lines().enumerate() {
            if let Some((key, value)) = split_line(raw, i + 1)? {
                config.set(key, value)?;
            }
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_str(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("known key"));
        }
        out
    }

    /// Returns every violated constraint; an empty list means the config is runnable.
    pub fn validate(&self) -> Vec<ConfigError> {
        let mut errors = Vec::new();
        if self.n < 2 {
            errors.push(ConfigError::TooFewNodes);
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            errors.push(ConfigError::BadZipf);
        }
        if !(self.theta > 0.5 && self.theta <= 1.0) {
            errors.push(ConfigError::BadTheta);
        }
        if self.n_p == 0 {
            errors.push(ConfigError::NoParents);
        }
        if !(self.bps.is_finite() && self.bps > 0.0) {
            errors.push(ConfigError::BadRate);
        }
        if !(0.0..=1.0).contains(&self.l) {
            errors.push(ConfigError::NotProbability("l"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            errors.push(ConfigError::NotProbability("gamma"));
        }
        if !self.k.is_multiple_of(2) {
            errors.push(ConfigError::OddDegree);
        }
        if self.k < 2 || self.k >= self.n {
            errors.push(ConfigError::DegreeRange);
        }
        if !(self.q >= 0.0 && self.q < 1.0) {
            errors.push(ConfigError::BadAdversaryWeight);
        }
        if self.d_min > self.d_max {
            errors.push(ConfigError::DelayBounds);
        }
        if self.t_max == 0 {
            errors.push(ConfigError::NotPositive("t_max"));
        }
        if self.epoch == 0 {
            errors.push(ConfigError::NotPositive("D"));
        }
        if !(self.adv_trigger.is_finite() && self.adv_trigger > 0.0) {
            errors.push(ConfigError::NotPositive("adv_trigger"));
        }
        if self.solidification_interval == 0 {
            errors.push(ConfigError::NotPositive("solidification_interval"));
        }
        if self.reattach_interval == 0 {
            errors.push(ConfigError::NotPositive("reattach_interval"));
        }
        errors
    }

    pub fn has_adversary(&self) -> bool {
        self.q > 0.0
    }

    pub fn adversary(&self) -> Option<NodeId> {
        self.has_adversary().then(|| NodeId::from_index(self.n - 1))
    }

    pub fn honest_count(&self) -> usize {
        if self.has_adversary() {
            self.n - 1
        } else {
            self.n
        }
    }

    pub fn weights<S: Scalar>(&self) -> WeightTable<S> {
        build_weights(self.n, self.s, self.q)
    }
}

/// Per-node share of the total weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable<S> {
    weights: Vec<S>,
    adversary: Option<NodeId>,
}

impl<S: Scalar> WeightTable<S> {
    /// Builds a table from explicit weights, for scripted scenarios.
    pub fn from_weights(weights: Vec<S>, adversary: Option<NodeId>) -> Self {
        Self { weights, adversary }
    }

    pub fn weight(&self, node: NodeId) -> S {
        self.weights[node.index()]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.weights
    }

    pub fn adversary(&self) -> Option<NodeId> {
        self.adversary
    }

    pub fn is_honest(&self, node: NodeId) -> bool {
        self.adversary != Some(node)
    }

    pub fn honest_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.weights.len())
            .map(NodeId::from_index)
            .filter(|&n| self.is_honest(n))
    }

    pub fn total(&self) -> S {
        self.weights.iter().copied().sum()
    }
}

/// Zipf weights over honest ranks, with the adversary (weight `q`) appended last.
///
/// Honest rank `i` (1-based) receives `(1 - q) * i^-s / sum_j j^-s`. With
/// `s == 0` every honest term is exactly one, so the split is exactly uniform.
pub fn build_weights<S: Scalar>(n: usize, s: f64, q: f64) -> WeightTable<S> {
    let adversarial = q > 0.0;
    let honest = if adversarial { n - 1 } else { n };
    let terms: Vec<S> = (1..=honest)
        .map(|rank| {
            if s == 0.0 {
                S::one()
            } else {
                S::from_real((rank as f64).powf(-s))
            }
        })
        .collect();
    let norm: S = terms.iter().copied().sum();
    let q_s = if adversarial {
        S::from_real(q)
    } else {
        S::zero()
    };
    let honest_share = S::one() - q_s;
    let mut weights: Vec<S> = terms.into_iter().map(|t| honest_share * t / norm).collect();
    let adversary = adversarial.then(|| {
        weights.push(q_s);
        NodeId::from_index(n - 1)
    });
    WeightTable { weights, adversary }
}
