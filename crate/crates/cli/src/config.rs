use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Corrlength,
    Walk,
    Percolation,
    Protocol,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Corrlength => "corrlength",
            Experiment::Walk => "walk",
            Experiment::Percolation => "percolation",
            Experiment::Protocol => "protocol",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub corrlength: Option<CorrConfig>,
    pub walk: Option<WalkConfig>,
    pub percolation: Option<PercConfig>,
    pub protocol: Option<ProtocolConfig>,
}

/// Explicit values or an evenly spaced grid.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(RangeGrid),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Sample cell midpoints instead of both end points.
    #[serde(default)]
    pub midpoint: bool,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) if r.midpoint => {
                let h = (r.stop - r.start) / r.count as f64;
                (0..r.count).map(|k| r.start + (k as f64 + 0.5) * h).collect()
            }
            Grid::Range(r) if r.count == 1 => vec![r.start],
            Grid::Range(r) => {
                let h = (r.stop - r.start) / (r.count - 1) as f64;
                (0..r.count).map(|k| r.start + k as f64 * h).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrConfig {
    #[serde(default = "default_ring")]
    pub ring: usize,
    pub thetas: Grid,
    pub gammas: Grid,
}

fn default_ring() -> usize {
    1000
}

impl Default for CorrConfig {
    fn default() -> Self {
        Self {
            ring: default_ring(),
            thetas: Grid::Values(vec![0.1, 0.25, 0.4, 0.55, 0.7]),
            gammas: Grid::Range(RangeGrid { start: 0.0, stop: std::f64::consts::PI, count: 50, midpoint: true }),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    pub lambdas: Option<Grid>,
    #[serde(default = "default_target")]
    pub target: f64,
}

fn default_n() -> usize {
    10
}

fn default_target() -> f64 {
    slocc_mbqc::percolation::QUOTED_THRESHOLD
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { n: default_n(), lambdas: None, target: default_target() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercMode {
    Bond,
    Site,
    Bundo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondSourceName {
    Formula,
    Walker,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercConfig {
    #[serde(default = "default_mode")]
    pub mode: PercMode,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Bond or site probabilities, or λ values in `bundo` mode.
    pub grid: Grid,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_n")]
    pub n_budget: usize,
    #[serde(default = "default_source")]
    pub source: BondSourceName,
}

fn default_mode() -> PercMode {
    PercMode::Bond
}

fn default_sizes() -> Vec<usize> {
    vec![32, 64, 128]
}

fn default_trials() -> usize {
    200
}

fn default_source() -> BondSourceName {
    BondSourceName::Formula
}

impl Default for PercConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            sizes: default_sizes(),
            grid: Grid::Range(RangeGrid { start: 0.40, stop: 0.70, count: 31, midpoint: false }),
            trials: default_trials(),
            n_budget: default_n(),
            source: default_source(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolConfig {
    Nun {
        sites: usize,
        /// Fixed θ for every N site; drawn from `theta_range` when absent.
        theta: Option<f64>,
        #[serde(default)]
        gamma: f64,
        theta_range: Option<[f64; 2]>,
        /// `[ζ, η, ξ]` for `Rx(ζ)·Rz(η)·Rx(ξ)`.
        target: [f64; 3],
        #[serde(default)]
        input: Option<[f64; 2]>,
        outcomes: Option<Vec<u8>>,
        #[serde(default)]
        on_exhausted: Restart,
        /// Chains tried before giving up; only read by `fresh` and `continue`.
        #[serde(default = "one")]
        attempts: usize,
    },
    Bub {
        thetas: Vec<f64>,
        eta: f64,
        #[serde(default)]
        input: Option<[f64; 2]>,
        outcomes: Option<Vec<u8>>,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Bundo {
        lambda: f64,
        #[serde(default = "default_n")]
        max_even: usize,
        /// Dense simulation on this many qubits instead of the walker formulas.
        statevec_sites: Option<usize>,
    },
    Entangle {
        #[serde(default)]
        outcomes: [u8; 3],
        theta1: Option<f64>,
        theta3: Option<f64>,
    },
}

/// What a nun rotation does when its chain runs out before success.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restart {
    #[default]
    Stop,
    /// Start over from the input state on a new chain.
    Fresh,
    /// Extend the chain and carry on with the same run.
    Continue,
}

fn one() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| {
            let line = text[..s.start].matches('\n').count() + 1;
            format!("line {line}: ")
        });
        ConfigError(format!("{}{}", at.unwrap_or_default(), e.message()))
    })
}

impl ExperimentConfig {
    /// Rejects a config written for a different experiment.
    pub fn expect(&self, kind: Experiment) -> Result<(), ConfigError> {
        match self.experiment {
            Some(k) if k != kind => Err(ConfigError(format!("config is for experiment `{k}`, not `{kind}`"))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_reports_line() {
        let e = parse("experiment = \"walk\"\n[walk]\nn = 4\nbogus = 1\n").unwrap_err();
        assert!(e.0.starts_with("line 4"), "{}", e.0);
    }

    #[test]
    fn midpoint_grid() {
        let g = Grid::Range(RangeGrid { start: 0.0, stop: 1.0, count: 4, midpoint: true });
        assert_eq!(g.points(), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn protocol_sections_parse() {
        let c = parse("[protocol]\nkind = \"nun\"\nsites = 21\ntheta = 0.5\ntarget = [0.1, 0.2, 0.3]\n").unwrap();
        assert!(matches!(c.protocol, Some(ProtocolConfig::Nun { sites: 21, .. })));
        assert!(parse("[protocol]\nkind = \"bundo\"\nlambda = 0.5\nextra = 2\n").is_err());
    }
}
