//! Run configuration: a single JSON document, plus the bundled presets.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};

use antiphase_core::{RingParams, DEFAULT_FLOQUET_STEPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log2,
}

/// `count` points from `min` to `max` inclusive, evenly spaced in either the
/// value or its base-2 logarithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "linear")]
    pub scale: Scale,
}

fn linear() -> Scale {
    Scale::Linear
}

impl Grid {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn log2(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            scale: Scale::Log2,
        }
    }

    pub fn validate(&self, field: &str) -> Result<(), ConfigError> {
        let bad = |msg: String| {
            Err(ConfigError::Invalid {
                field: field.to_string(),
                msg,
            })
        };
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return bad("min and max must be finite".into());
        }
        if self.min > self.max {
            return bad(format!("min {} exceeds max {}", self.min, self.max));
        }
        if self.scale == Scale::Log2 && self.min <= 0.0 {
            return bad(format!("log2 grid needs min > 0, got {}", self.min));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        match self.scale {
            Scale::Linear => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / last)
                .collect(),
            Scale::Log2 => {
                let (lo, hi) = (self.min.log2(), self.max.log2());
                (0..self.count)
                    .map(|i| (lo + (hi - lo) * i as f64 / last).exp2())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub psi0: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default = "default_floquet_steps")]
    pub floquet_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_dt() -> f64 {
    0.01
}

fn default_steps() -> usize {
    10_000
}

fn default_stride() -> usize {
    10
}

fn default_floquet_steps() -> usize {
    DEFAULT_FLOQUET_STEPS
}

#[derive(Debug)]
pub enum ConfigError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Parse(serde_json::Error),
    Invalid {
        field: String,
        msg: String,
    },
    Ring(antiphase_core::Error),
    UnknownPreset(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            // serde_json already reports "at line L column C"
            ConfigError::Parse(e) => write!(f, "malformed config: {e}"),
            ConfigError::Invalid { field, msg } => write!(f, "invalid `{field}`: {msg}"),
            ConfigError::Ring(e) => write!(f, "invalid ring parameters: {e}"),
            ConfigError::UnknownPreset(name) => {
                write!(
                    f,
                    "unknown preset `{name}` (available: {})",
                    PRESETS.join(", ")
                )
            }
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            ConfigError::Parse(e) => Some(e),
            ConfigError::Ring(e) => Some(e),
            _ => None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text).map_err(ConfigError::Parse)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Single-line JSON for CSV provenance headers.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ring()?;
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    field: field.into(),
                    msg: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("dt", self.dt)?;
        for (field, v) in [("theta0", self.theta0), ("psi0", self.psi0)] {
            if !v.is_finite() {
                return Err(ConfigError::Invalid {
                    field: field.into(),
                    msg: format!("must be finite, got {v}"),
                });
            }
        }
        for (field, v) in [
            ("n_steps", self.n_steps),
            ("sample_stride", self.sample_stride),
            ("floquet_steps", self.floquet_steps),
        ] {
            if v == 0 {
                return Err(ConfigError::Invalid {
                    field: field.into(),
                    msg: "must be at least 1".into(),
                });
            }
        }
        for (field, grid) in [
            ("psi_grid", &self.psi_grid),
            ("omega_grid", &self.omega_grid),
            ("alpha_grid", &self.alpha_grid),
        ] {
            if let Some(g) = grid {
                g.validate(field)?;
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<RingParams, ConfigError> {
        RingParams::new(self.n, self.alpha, self.beta, self.omega, self.detuning)
            .map_err(ConfigError::Ring)
    }

    pub fn grid(&self, field: &'static str) -> Result<&Grid, ConfigError> {
        let g = match field {
            "psi_grid" => &self.psi_grid,
            "omega_grid" => &self.omega_grid,
            "alpha_grid" => &self.alpha_grid,
            _ => unreachable!("unknown grid field {field}"),
        };
        g.as_ref().ok_or_else(|| ConfigError::Invalid {
            field: field.into(),
            msg: "required by this command".into(),
        })
    }

    fn base(alpha: f64, detuning: f64) -> Self {
        Self {
            n: 8,
            alpha,
            beta: 1.0,
            omega: 2.0,
            detuning,
            theta0: 0.0,
            psi0: 0.0,
            dt: default_dt(),
            n_steps: default_steps(),
            sample_stride: default_stride(),
            floquet_steps: DEFAULT_FLOQUET_STEPS,
            psi_grid: None,
            omega_grid: None,
            alpha_grid: None,
            output: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let psi_axis = Grid::linear(0.0, TAU, 201);
        let config = match name {
            "fig1b" => Self {
                psi0: 1.0,
                ..Self::base(0.1, 0.0)
            },
            "fig1c" => Self {
                psi0: 1.0,
                ..Self::base(0.1, 0.2)
            },
            "fig3a" => Self {
                psi_grid: Some(psi_axis),
                ..Self::base(0.25, 0.0)
            },
            "fig3b" => Self {
                psi_grid: Some(psi_axis),
                ..Self::base(0.5, 0.0)
            },
            "fig3c" => Self {
                psi_grid: Some(Grid::linear(0.0, TAU, 101)),
                alpha_grid: Some(Grid::linear(0.0, 1.0, 101)),
                ..Self::base(0.0, 0.0)
            },
            "fig4" => Self {
                omega_grid: Some(Grid::log2(0.0625, 2.0, 64)),
                alpha_grid: Some(Grid::linear(0.0, 1.0, 64)),
                ..Self::base(0.0, 0.2)
            },
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        Ok(config)
    }
}

pub const PRESETS: [&str; 6] = ["fig1b", "fig1c", "fig3a", "fig3b", "fig3c", "fig4"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        }
        assert!(matches!(
            RunConfig::preset("fig9"),
            Err(ConfigError::UnknownPreset(_))
        ));
    }

    #[test]
    fn rejects_unknown_keys_with_position() {
        let err = RunConfig::from_json(
            "{\n  \"n\": 8, \"alpha\": 0.1, \"beta\": 1, \"omega\": 2,\n  \"detunnig\": 0.2\n}",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("detunnig") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rejects_bad_ring_size() {
        let err =
            RunConfig::from_json(r#"{"n": 6, "alpha": 0.1, "beta": 1, "omega": 2}"#).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Ring(antiphase_core::Error::BadRingSize(6))
        ));
    }

    #[test]
    fn grid_values() {
        assert_eq!(
            Grid::linear(0.0, 1.0, 5).values(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(Grid::linear(0.3, 0.3, 1).values(), vec![0.3]);
        let g = Grid::log2(0.0625, 2.0, 6).values();
        for (v, e) in g.iter().zip([0.0625, 0.125, 0.25, 0.5, 1.0, 2.0]) {
            assert!((v - e).abs() < 1e-15);
        }
        assert!(Grid::linear(0.0, 1.0, 0).validate("x").is_err());
        assert!(Grid::log2(0.0, 1.0, 3).validate("x").is_err());
        assert!(Grid::linear(2.0, 1.0, 3).validate("x").is_err());
    }
}
