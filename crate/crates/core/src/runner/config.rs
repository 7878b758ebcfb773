//! Experiment configuration: TOML schema, defaults and validation.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::emergent::EmergentVariant;
use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, Mask, MAX_SITES};
use crate::observables::NamedState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig2Entropy,
    Fig2HammingSchmidt,
    Fig3SingleParticle,
    Fig4Overlap,
    Fig5OverlapJcross,
    Fig6Spectral,
    Fig7Ghz,
    FreezeDemo,
    Custom,
}

impl ExperimentKind {
    /// The named reproductions, excluding `custom`.
    pub const NAMED: [ExperimentKind; 8] = [
        ExperimentKind::Fig2Entropy,
        ExperimentKind::Fig2HammingSchmidt,
        ExperimentKind::Fig3SingleParticle,
        ExperimentKind::Fig4Overlap,
        ExperimentKind::Fig5OverlapJcross,
        ExperimentKind::Fig6Spectral,
        ExperimentKind::Fig7Ghz,
        ExperimentKind::FreezeDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig2Entropy => "fig2_entropy",
            ExperimentKind::Fig2HammingSchmidt => "fig2_hamming_schmidt",
            ExperimentKind::Fig3SingleParticle => "fig3_single_particle",
            ExperimentKind::Fig4Overlap => "fig4_overlap",
            ExperimentKind::Fig5OverlapJcross => "fig5_overlap_jcross",
            ExperimentKind::Fig6Spectral => "fig6_spectral",
            ExperimentKind::Fig7Ghz => "fig7_ghz",
            ExperimentKind::FreezeDemo => "freeze_demo",
            ExperimentKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial product state: a named pattern, an explicit bitmask, or a list of
/// occupied sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    Mask { mask: u64 },
    Sites { sites: Vec<usize> },
}

impl InitialState {
    pub fn mask(&self, geometry: LatticeGeometry) -> Result<Mask> {
        match self {
            InitialState::Named(n) => n.mask(geometry),
            InitialState::Mask { mask } => Ok(*mask as Mask),
            InitialState::Sites { sites } => {
                let ns = geometry.n_sites();
                sites.iter().try_fold(0 as Mask, |acc, &s| {
                    if s < ns {
                        Ok(acc | (1 as Mask) << s)
                    } else {
                        Err(config_err("system.initial_state.sites", format!("site {s} outside {geometry}")))
                    }
                })
            }
        }
    }
}

/// Either `count` evenly spaced samples on `[start, stop]` or explicit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Range { start: f64, stop: f64, count: usize },
    Points { points: Vec<f64> },
}

impl TimeGrid {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        TimeGrid::Range { start, stop, count }
    }

    pub fn samples(&self) -> Vec<f64> {
        match self {
            TimeGrid::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect(),
            },
            TimeGrid::Points { points } => points.clone(),
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        let s = self.samples();
        if s.is_empty() {
            return Err(config_err(path, "time grid is empty"));
        }
        if s.iter().any(|t| !t.is_finite()) {
            return Err(config_err(path, "time grid contains non-finite values"));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err(path, "time grid must be strictly increasing"));
        }
        Ok(())
    }
}

/// Lattice sizes, initial state and couplings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Chain lengths to sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_lengths: Option<Vec<usize>>,
    /// Rectangles `[Lx, Ly]` to sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectangles: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    /// Particle number, for experiments that need a sector but no state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    /// Diagonal hopping strengths to sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_cross: Option<Vec<f64>>,
    /// One-axis-twisting strength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Qubit counts for one-axis twisting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
}

/// A parsed experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<EmergentVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_freeze: Option<f64>,
    /// Histogram bin count; Freedman-Diaconis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeGrid>,
    /// `fig6_spectral`: time stamps at which full histograms are written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Parse and validate TOML text; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
        path: "<document>".into(),
        message: e.message().to_string(),
    })?;
    let cfg: ExperimentConfig =
        serde_path_to_error::deserialize(toml::Value::Table(value)).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path: if path.is_empty() || path == "." { "<document>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serialize back to TOML; `parse_config` of the result gives the same value.
pub fn serialize_config(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| config_err("<document>", e.to_string()))
}

/// Fully defaulted parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentKind,
    pub chain_lengths: Vec<usize>,
    pub rectangles: Vec<[usize; 2]>,
    pub initial_state: Option<InitialState>,
    pub particles: Option<usize>,
    pub j_cross: Vec<f64>,
    pub lambda: f64,
    pub qubits: Vec<usize>,
    pub variant: Option<EmergentVariant>,
    pub t_freeze: Option<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<f64>,
    pub bins: Option<usize>,
}

impl ExperimentConfig {
    pub fn minimal(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            output_dir: None,
            variant: None,
            t_freeze: None,
            bins: None,
            system: SystemConfig::default(),
            time: None,
            snapshots: None,
        }
    }

    /// Check experiment-specific requirements.
    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    /// Fill defaults and check consistency.
    pub fn resolve(&self) -> Result<Resolved> {
        use ExperimentKind as E;
        let e = self.experiment;
        let sys = &self.system;
        let default_time = match e {
            E::Fig2Entropy | E::Fig3SingleParticle => TimeGrid::range(0.0, 4.0 * PI, 481),
            E::Fig2HammingSchmidt => TimeGrid::Points {
                points: vec![0.0, PI / 4.0, PI / 2.0, PI],
            },
            E::Fig4Overlap | E::Fig5OverlapJcross => TimeGrid::range(0.0, 3.0, 200),
            E::Fig6Spectral => TimeGrid::range(0.0, 40.0, 80),
            E::Fig7Ghz => TimeGrid::range(0.0, 4.0 * PI, 600),
            E::FreezeDemo | E::Custom => TimeGrid::range(0.0, 20.0, 201),
        };
        let time = self.time.clone().unwrap_or(default_time);
        time.validate("time")?;

        let chain_lengths = sys.chain_lengths.clone().unwrap_or_else(|| match e {
            E::Fig2Entropy => vec![16],
            E::Fig2HammingSchmidt | E::FreezeDemo => vec![8],
            _ => vec![],
        });
        let rectangles = sys.rectangles.clone().unwrap_or_else(|| match e {
            E::Fig3SingleParticle | E::Fig6Spectral => vec![[4, 4]],
            E::Fig4Overlap => vec![[6, 6], [10, 10]],
            E::Fig5OverlapJcross => vec![[4, 4], [6, 6]],
            _ => vec![],
        });
        let j_cross = sys.j_cross.clone().unwrap_or_else(|| match e {
            E::Fig5OverlapJcross => vec![0.0, 0.2, 0.4, 0.6],
            E::Fig6Spectral => vec![0.6],
            _ => vec![0.0],
        });
        let initial_state = sys.initial_state.clone().or(match e {
            E::Fig2Entropy | E::Fig2HammingSchmidt | E::FreezeDemo => {
                Some(InitialState::Named(NamedState::DensityWave))
            }
            E::Fig3SingleParticle => Some(InitialState::Named(NamedState::SingleCorner)),
            E::Fig4Overlap => Some(InitialState::Named(NamedState::TwoCorners)),
            E::Fig5OverlapJcross => Some(InitialState::Named(NamedState::ThreeCornerCluster)),
            _ => None,
        });
        let particles = sys.particles.or(match e {
            E::Fig6Spectral => Some(3),
            _ => None,
        });
        let qubits = sys.qubits.clone().unwrap_or_else(|| match e {
            E::Fig7Ghz => vec![4, 8, 12],
            _ => vec![],
        });
        let lambda = sys.lambda.unwrap_or(1.0);
        let t_freeze = self.t_freeze.or(match e {
            E::Fig2Entropy | E::FreezeDemo => Some(1.5 * PI),
            _ => None,
        });
        let variant = self.variant.or(match e {
            E::Fig5OverlapJcross => Some(EmergentVariant::Trunc2),
            E::FreezeDemo => Some(EmergentVariant::Exact1d),
            _ => None,
        });
        let snapshots = self.snapshots.clone().unwrap_or_else(|| match e {
            E::Fig6Spectral => vec![0.0, 0.5, 5.0, 40.0],
            _ => vec![],
        });

        for (k, &l) in chain_lengths.iter().enumerate() {
            LatticeGeometry::chain(l)
                .map_err(|err| config_err(&format!("system.chain_lengths[{k}]"), err.to_string()))?;
        }
        for (k, &[lx, ly]) in rectangles.iter().enumerate() {
            LatticeGeometry::rectangle(lx, ly)
                .map_err(|err| config_err(&format!("system.rectangles[{k}]"), err.to_string()))?;
        }
        if j_cross.iter().any(|j| !j.is_finite()) {
            return Err(config_err("system.j_cross", "values must be finite"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(config_err("system.lambda", "must be positive"));
        }
        if let Some(tf) = t_freeze {
            if !(tf >= 0.0) || !tf.is_finite() {
                return Err(config_err("t_freeze", "must be finite and >= 0"));
            }
        }
        if let Some(0) = self.bins {
            return Err(config_err("bins", "must be at least 1"));
        }
        if snapshots.windows(2).any(|w| w[1] <= w[0]) || snapshots.iter().any(|t| !t.is_finite()) {
            return Err(config_err("snapshots", "must be finite and strictly increasing"));
        }
        for (k, &q) in qubits.iter().enumerate() {
            if !(1..=4096).contains(&q) {
                return Err(config_err(&format!("system.qubits[{k}]"), "must be in 1..=4096"));
            }
        }

        let need = |ok: bool, path: &str, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(config_err(path, format!("{e} requires {what}")))
            }
        };
        match e {
            E::Fig2Entropy | E::Fig2HammingSchmidt => {
                need(!chain_lengths.is_empty(), "system.chain_lengths", "at least one chain")?;
                need(rectangles.is_empty(), "system.rectangles", "chains only")?;
                if e == E::Fig2HammingSchmidt {
                    for (k, &l) in chain_lengths.iter().enumerate() {
                        if l > 20 {
                            return Err(config_err(
                                &format!("system.chain_lengths[{k}]"),
                                "at most 20 sites for full Schmidt spectra",
                            ));
                        }
                    }
                }
            }
            E::Fig3SingleParticle => {
                need(rectangles.len() == 1, "system.rectangles", "exactly one rectangle")?;
            }
            E::Fig4Overlap | E::Fig5OverlapJcross => {
                need(!rectangles.is_empty(), "system.rectangles", "at least one rectangle")?;
                need(!j_cross.is_empty(), "system.j_cross", "at least one value")?;
            }
            E::Fig6Spectral => {
                need(!rectangles.is_empty(), "system.rectangles", "at least one rectangle")?;
                need(particles.is_some(), "system.particles", "a particle number")?;
            }
            E::Fig7Ghz => {
                need(!qubits.is_empty(), "system.qubits", "at least one qubit count")?;
            }
            E::FreezeDemo | E::Custom => {
                need(
                    chain_lengths.len() + rectangles.len() == 1,
                    "system",
                    "exactly one lattice (one chain length or one rectangle)",
                )?;
                need(initial_state.is_some(), "system.initial_state", "an initial state")?;
                if e == E::FreezeDemo {
                    need(t_freeze.is_some(), "t_freeze", "a freeze time")?;
                    need(variant.is_some(), "variant", "an emergent variant")?;
                }
                if rectangles.is_empty() {
                    need(j_cross.iter().all(|&j| j == 0.0), "system.j_cross", "no diagonal hopping on a chain")?;
                }
                need(j_cross.len() == 1, "system.j_cross", "a single value")?;
            }
        }
        if let Some(v) = variant {
            if v == EmergentVariant::Oat && e != E::Fig7Ghz {
                return Err(config_err("variant", "oat applies to fig7_ghz only"));
            }
        }
        if let Some(InitialState::Sites { sites }) = &initial_state {
            if sites.iter().any(|&s| s >= MAX_SITES) {
                return Err(config_err(
                    "system.initial_state.sites",
                    format!("site index must be below {MAX_SITES}"),
                ));
            }
        }
        Ok(Resolved {
            experiment: e,
            chain_lengths,
            rectangles,
            initial_state,
            particles,
            j_cross,
            lambda,
            qubits,
            variant,
            t_freeze,
            times: time.samples(),
            snapshots,
            bins: self.bins,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_fig2_defaults() {
        let cfg = parse_config("experiment = \"fig2_entropy\"\n").unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.chain_lengths, vec![16]);
        assert_eq!(r.times.len(), 481);
        assert_eq!(r.times[0], 0.0);
        assert!((r.times[480] - 4.0 * PI).abs() < 1e-12);
        assert_eq!(r.t_freeze, Some(1.5 * PI));
        assert_eq!(r.initial_state, Some(InitialState::Named(NamedState::DensityWave)));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("experiment = \"fig7_ghz\"\n[system]\nlamda = 2.0\n").unwrap_err();
        match err {
            Error::Config { path, message } => {
                assert!(path.contains("system"), "{path}");
                assert!(message.contains("lamda"), "{message}");
            }
            e => panic!("unexpected {e}"),
        }
        let err = parse_config("experiment = \"fig9\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "experiment"), "{err}");
    }

    #[test]
    fn fig5_sweep() {
        let cfg = parse_config(
            "experiment = \"fig5_overlap_jcross\"\n[system]\nj_cross = [0.0, 0.2, 0.4, 0.6]\n",
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.j_cross, vec![0.0, 0.2, 0.4, 0.6]);
        assert_eq!(r.rectangles, vec![[4, 4], [6, 6]]);
        assert_eq!(r.variant, Some(EmergentVariant::Trunc2));
    }

    #[test]
    fn semantic_errors_carry_paths() {
        let bad = [
            ("experiment = \"fig2_entropy\"\n[time]\nstart = 1.0\nstop = 0.0\ncount = 5\n", "time"),
            ("experiment = \"fig7_ghz\"\n[system]\nlambda = -1.0\n", "system.lambda"),
            ("experiment = \"fig2_entropy\"\n[system]\nchain_lengths = [1]\n", "system.chain_lengths[0]"),
            ("experiment = \"custom\"\n", "system"),
        ];
        for (text, want) in bad {
            match parse_config(text).unwrap_err() {
                Error::Config { path, .. } => assert_eq!(path, want, "{text}"),
                e => panic!("{e}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        let text = r#"
experiment = "custom"
variant = "trunc2"
t_freeze = 0.3
[system]
rectangles = [[3, 4]]
initial_state = { sites = [0, 5] }
j_cross = [0.25]
[time]
points = [0.0, 0.5, 1.0]
"#;
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&serialize_config(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
        for k in ExperimentKind::NAMED {
            let c = ExperimentConfig::minimal(k);
            assert_eq!(parse_config(&serialize_config(&c).unwrap()).unwrap(), c);
        }
    }
}
