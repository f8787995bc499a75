use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::averaging::{to_standard_form, OriginalSystem};
use crate::certify::{AlphaGrid, ConvexSet};
use crate::error::{Error, Result};
use crate::expr;
use crate::numkit::{matrix_from_rows, WeightedNorm};
use crate::system::StandardSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Standard,
    Original,
}

/// A period given as a number or as a constant expression such as `"2*pi"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Period {
    Value(f64),
    Expr(String),
}

impl Period {
    pub fn value(&self) -> Result<f64> {
        match self {
            Period::Value(v) => Ok(*v),
            Period::Expr(s) => {
                let e = expr::parse(s, 0)?;
                if e.references_time() {
                    return Err(Error::Config(format!("period {s:?} must not depend on t")));
                }
                Ok(e.eval(0.0, &[], 0.0)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub form: Form,
    pub n: usize,
    #[serde(rename = "T")]
    pub period: Period,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<String>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Single(f64),
    Sweep(Vec<f64>),
}

impl Epsilon {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Epsilon::Single(e) => vec![*e],
            Epsilon::Sweep(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
}

fn default_grid() -> usize {
    33
}
fn default_samples() -> usize {
    200
}
fn default_horizon() -> usize {
    50
}
fn default_parallel() -> bool {
    true
}
fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub system: SystemConfig,
    pub epsilon: Epsilon,
    pub set: ConvexSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaGrid>,
    #[serde(default = "default_grid")]
    pub grid_per_dim: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// Starting point of the zero search; the center of the set otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default = "default_parallel", skip_serializing_if = "is_true")]
    pub parallel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or("system")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.system.n;
        if n == 0 {
            return Err(Error::Config("system.n must be positive".into()));
        }
        let s = &self.system;
        match s.form {
            Form::Standard => {
                if s.a.is_some() || s.h.is_some() {
                    return Err(Error::Config("standard form takes g only, not A or h".into()));
                }
                let g = s.g.as_ref().ok_or_else(|| Error::Config("standard form needs system.g".into()))?;
                if g.len() != n {
                    return Err(Error::Config(format!("system.g has {} entries, expected n = {n}", g.len())));
                }
            }
            Form::Original => {
                if s.g.is_some() {
                    return Err(Error::Config("original form takes A and h, not g".into()));
                }
                let a = s.a.as_ref().ok_or_else(|| Error::Config("original form needs system.A".into()))?;
                let h = s.h.as_ref().ok_or_else(|| Error::Config("original form needs system.h".into()))?;
                if a.len() != n || a.iter().any(|r| r.len() != n) {
                    return Err(Error::Config(format!("system.A must be {n}x{n}")));
                }
                if h.len() != n {
                    return Err(Error::Config(format!("system.h has {} entries, expected n = {n}", h.len())));
                }
            }
        }
        let eps = self.epsilon.values();
        if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Config("epsilon must be a positive number or a nonempty list of them".into()));
        }
        self.set.validate().map_err(|e| Error::Config(format!("set: {e}")))?;
        if self.set.dim() != n {
            return Err(Error::Config(format!("set has dimension {}, expected n = {n}", self.set.dim())));
        }
        if let Some(p) = &self.norm {
            let w = WeightedNorm::from_rows(&p.p).map_err(|e| Error::Config(format!("norm.P: {e}")))?;
            if w.dim() != n {
                return Err(Error::Config(format!("norm.P must be {n}x{n}")));
            }
        }
        if let Some(a) = &self.alpha {
            a.values().map_err(|e| Error::Config(format!("alpha: {e}")))?;
        }
        if self.grid_per_dim < 3 {
            return Err(Error::Config("grid_per_dim must be at least 3".into()));
        }
        if let Some(v) = &self.start {
            if v.len() != n {
                return Err(Error::Config(format!("start has {} entries, expected n = {n}", v.len())));
            }
        }
        Ok(())
    }

    /// The system in standard form, transforming an original-form system.
    pub fn build_system(&self) -> Result<StandardSystem> {
        let s = &self.system;
        let period = s.period.value()?;
        match s.form {
            Form::Standard => StandardSystem::parse(self.label(), period, s.g.as_deref().unwrap_or_default()),
            Form::Original => {
                let a = matrix_from_rows(s.a.as_deref().unwrap_or_default())?;
                let orig = OriginalSystem::parse(self.label(), a, s.h.as_deref().unwrap_or_default(), period)?;
                to_standard_form(&orig)
            }
        }
    }

    pub fn norm(&self) -> Result<Option<WeightedNorm>> {
        self.norm.as_ref().map(|p| WeightedNorm::from_rows(&p.p)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VDP: &str = r#"{
        "system": {"form": "standard", "n": 1, "T": "2*pi", "g": ["x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2"]},
        "epsilon": 0.05,
        "set": {"type": "box", "lo": [1.5], "hi": [2.5]}
    }"#;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = JobConfig::from_json(VDP).unwrap();
        assert_eq!((cfg.grid_per_dim, cfg.samples, cfg.horizon, cfg.seed), (33, 200, 50, 0));
        assert!(cfg.parallel);
        assert!((cfg.system.period.value().unwrap() - std::f64::consts::TAU).abs() < 1e-15);
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(JobConfig::from_json(&echo).unwrap(), cfg);
        assert_eq!(cfg.build_system().unwrap().dim(), 1);
    }

    #[test]
    fn epsilon_sweep() {
        let cfg = JobConfig::from_json(&VDP.replace("0.05", "[0.04, 0.02]")).unwrap();
        assert_eq!(cfg.epsilon.values(), vec![0.04, 0.02]);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        assert!(JobConfig::from_json(&VDP.replace("\"n\": 1", "\"n\": 2")).is_err());
        assert!(JobConfig::from_json(&VDP.replace("0.05", "-1")).is_err());
        assert!(JobConfig::from_json(&VDP.replace("\"standard\"", "\"original\"")).is_err());
        assert!(JobConfig::from_json(&VDP.replace("\"epsilon\"", "\"epsilom\"")).is_err());
        let bad_expr = JobConfig::from_json(&VDP.replace("x1*sin(t)^2 -", "x1*sin(t)^2 -*")).unwrap();
        assert!(matches!(bad_expr.build_system(), Err(Error::Parse(_))));
    }

    #[test]
    fn original_form() {
        let text = r#"{
            "system": {"form": "original", "n": 2, "T": 6.283185307179586,
                       "A": [[0, 1], [-1, 0]], "h": ["0", "(1 - u1^2)*u2"]},
            "epsilon": [0.05],
            "set": {"type": "ball", "center": [2, 0], "radius": 0.5}
        }"#;
        let cfg = JobConfig::from_json(text).unwrap();
        assert_eq!(cfg.build_system().unwrap().dim(), 2);
        let rotated = JobConfig::from_json(&text.replace("[[0, 1], [-1, 0]]", "[[1, 0], [0, 1]]")).unwrap();
        assert!(matches!(rotated.build_system(), Err(Error::NotPeriodic { .. })));
    }
}
