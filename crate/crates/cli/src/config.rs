//! Protocol configuration: a JSON document with strict key checking.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Equilibrium,
    SingleKick,
    KickGrid,
    KickPeriodic,
    GlobalQuench,
    BeyondSc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickKindSpec {
    SpinFlip,
    MajoranaOdd,
    MajoranaEven,
    SigmaX,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub h: f64,
    #[serde(default = "one")]
    pub gamma: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemSpec {
    /// Block `[-r, r]` around the centre.
    #[serde(default)]
    pub half_width: Option<usize>,
    /// Block lengths |A| (equilibrium and quench).
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickSpec {
    pub kind: KickKindSpec,
    /// Kick sites relative to the block centre (single_kick, kick_periodic).
    #[serde(default)]
    pub offsets: Option<Vec<i64>>,
    /// Distance between simultaneous kicks (kick_grid).
    #[serde(default)]
    pub spacing: Option<usize>,
    /// Time between kicks (kick_periodic); the first kick is at t = 0.
    #[serde(default)]
    pub period: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// Extra Wigner–Yanase–Dyson orders as [re, im] pairs.
    #[serde(default)]
    pub alphas: Vec<[f64; 2]>,
    #[serde(default = "default_b_max")]
    pub beta_max: f64,
    #[serde(default = "default_spacing")]
    pub beta_spacing: f64,
    #[serde(default = "default_domains")]
    pub fit_domains: usize,
}

fn default_b_max() -> f64 {
    3.0
}

fn default_spacing() -> f64 {
    0.1
}

fn default_domains() -> usize {
    12
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec { alphas: Vec::new(), beta_max: 3.0, beta_spacing: 0.1, fit_domains: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSpec {
    /// Pre-quench transverse field; the post-quench model is `model`.
    pub h0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    pub model: ModelSpec,
    #[serde(default)]
    pub subsystem: SubsystemSpec,
    #[serde(default)]
    pub times: Vec<f64>,
    /// Inverse temperatures (equilibrium); `null` is the ground state.
    #[serde(default)]
    pub betas: Vec<Option<f64>>,
    /// Finite open chain for equilibrium runs; the infinite chain otherwise.
    #[serde(default)]
    pub chain_length: Option<usize>,
    #[serde(default)]
    pub kick: Option<KickSpec>,
    #[serde(default)]
    pub quench: Option<QuenchSpec>,
    #[serde(default)]
    pub measure: MeasureSpec,
    /// Also emit exact-diagonalization values (equilibrium with chain_length ≤ 14).
    #[serde(default)]
    pub oracle: bool,
    /// Output directory; one CSV per source is written inside.
    pub output: PathBuf,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl ProtocolConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ProtocolConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        let cfg: ProtocolConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    /// Identifies the physics; the output directory is left out.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output");
        }
        let canonical = serde_json::to_string(&v).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn half_width(&self) -> Result<usize, CliError> {
        self.subsystem.half_width.ok_or_else(|| invalid("subsystem.half_width", "required for this protocol"))
    }

    fn sizes(&self) -> Result<&[usize], CliError> {
        match &self.subsystem.sizes {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(invalid("subsystem.sizes", "a non-empty list is required for this protocol")),
        }
    }

    pub fn block_half_width(&self) -> usize {
        self.subsystem.half_width.unwrap_or(0)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.subsystem.sizes.clone().unwrap_or_default()
    }

    fn kick_spec(&self) -> Result<&KickSpec, CliError> {
        self.kick.as_ref().ok_or_else(|| invalid("kick", "required for this protocol"))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !self.model.h.is_finite() || !self.model.gamma.is_finite() {
            return Err(invalid("model", "h and gamma must be finite"));
        }
        if !(self.measure.beta_max > 0.0 && self.measure.beta_spacing > 0.0)
            || self.measure.beta_spacing > self.measure.beta_max
            || self.measure.fit_domains < 3
        {
            return Err(invalid("measure", "need beta_max ≥ beta_spacing > 0 and fit_domains ≥ 3"));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("times", "must be sorted"));
        }
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(invalid("times", "must be finite and nonnegative"));
        }
        if self.oracle && !(self.protocol == Protocol::Equilibrium && self.chain_length.is_some_and(|l| l <= 14)) {
            return Err(invalid("oracle", "available for equilibrium runs with chain_length ≤ 14"));
        }
        let needs_times = self.protocol != Protocol::Equilibrium;
        if needs_times && self.times.is_empty() {
            return Err(invalid("times", "a non-empty list is required for this protocol"));
        }
        match self.protocol {
            Protocol::Equilibrium => {
                if self.betas.is_empty() {
                    return Err(invalid("betas", "a non-empty list is required"));
                }
                if self.betas.iter().flatten().any(|b| !(*b >= 0.0)) {
                    return Err(invalid("betas", "inverse temperatures must be nonnegative"));
                }
                let sizes = self.sizes()?;
                if let Some(l) = self.chain_length {
                    if sizes.iter().any(|&a| a == 0 || a > l) {
                        return Err(invalid("subsystem.sizes", format!("blocks must fit in the chain of {l} sites")));
                    }
                } else if sizes.contains(&0) {
                    return Err(invalid("subsystem.sizes", "blocks must be nonempty"));
                }
            }
            Protocol::SingleKick | Protocol::KickPeriodic | Protocol::KickGrid => {
                self.half_width()?;
                let k = self.kick_spec()?;
                if self.times.iter().any(|&t| t <= 0.0) {
                    return Err(invalid("times", "sample times after a kick must be positive"));
                }
                match self.protocol {
                    Protocol::KickGrid => {
                        if !k.spacing.is_some_and(|s| s > 0) {
                            return Err(invalid("kick.spacing", "a positive spacing is required for kick_grid"));
                        }
                    }
                    Protocol::KickPeriodic => {
                        if !k.period.is_some_and(|p| p > 0.0) {
                            return Err(invalid("kick.period", "a positive period is required for kick_periodic"));
                        }
                    }
                    _ => {}
                }
                if let Some(off) = &k.offsets {
                    if off.is_empty() {
                        return Err(invalid("kick.offsets", "must not be empty"));
                    }
                }
            }
            Protocol::GlobalQuench => {
                let q = self.quench.as_ref().ok_or_else(|| invalid("quench", "required for global_quench"))?;
                if !q.h0.is_finite() {
                    return Err(invalid("quench.h0", "must be finite"));
                }
                if self.sizes()?.contains(&0) {
                    return Err(invalid("subsystem.sizes", "blocks must be nonempty"));
                }
            }
            Protocol::BeyondSc => {
                self.half_width()?;
                if self.times.iter().any(|&t| t <= 0.0) {
                    return Err(invalid("times", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Dotted path of a sweep axis; short names are accepted for common axes.
pub fn axis_path(axis: &str) -> String {
    match axis {
        "h" => "model.h".into(),
        "gamma" => "model.gamma".into(),
        "h0" => "quench.h0".into(),
        "r" | "half_width" => "subsystem.half_width".into(),
        "period" => "kick.period".into(),
        "spacing" => "kick.spacing".into(),
        "chain_length" => "chain_length".into(),
        other => other.into(),
    }
}
