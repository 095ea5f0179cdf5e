//! Run configuration: one JSON file per run.

use std::path::PathBuf;

use cookiezeta::levels::DEFAULT_DEPTH;
use cookiezeta::zeta::ZetaConfig;
use cookiezeta::{fixtures, BranchSpec, CookieCutterMap, Potential};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Largest accepted config file, in bytes.
pub const MAX_CONFIG_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSpec,
    pub potential: PotentialSpec,
    /// Transfer-matrix depth `m`.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Highest level `N` of cylinder enumerations.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub sigma_grid: Vec<f64>,
    #[serde(default)]
    pub q_grid: Vec<f64>,
    #[serde(default)]
    pub alpha_grid: Vec<f64>,
    /// Levels of the box-counting estimate of `τ`.
    #[serde(default)]
    pub tau_levels: Vec<usize>,
    /// Offsets `σ - δ_α` for `growth`.
    #[serde(default)]
    pub growth_offsets: Vec<f64>,
    /// Levels of the combinatorial oracle used by `growth` on the Cantor map
    /// with a Bernoulli measure; `None` uses the cylinder tables.
    #[serde(default)]
    pub oracle_levels: Option<usize>,
    /// Output directory, overridden by `--out`.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    /// Cache directory, overridden by `COOKIEZETA_CACHE` and `--cache`.
    #[serde(default, skip_serializing)]
    pub cache: Option<PathBuf>,
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_levels() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `cantor`, `moebius` or `two_contractions`.
    Fixture(String),
    Branches(Vec<BranchConfig>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    #[serde(flatten)]
    pub kind: BranchKind,
    #[serde(default)]
    pub image: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum BranchKind {
    /// `x -> slope x + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `x -> (a x + b) / (c x + d)`.
    Moebius { a: f64, b: f64, c: f64, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `log p_i` on branch `i`.
    Bernoulli {
        probabilities: Vec<f64>,
    },
    LocallyConstant {
        values: Vec<f64>,
    },
    /// `scale · log|g'|`.
    LogDerivative {
        scale: f64,
    },
}

impl RunConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        if bytes.len() > MAX_CONFIG_BYTES {
            return Err(CliError::Config(format!(
                "config exceeds {MAX_CONFIG_BYTES} bytes"
            )));
        }
        let config: RunConfig =
            serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))?;
        config.check_shape()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&bytes)
    }

    /// Checks that need no numerics; the map and the potential are checked
    /// when built.
    fn check_shape(&self) -> Result<(), CliError> {
        let finite = |name: &str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} contains a non-finite value"
                )))
            }
        };
        finite("sigma_grid", &self.sigma_grid)?;
        finite("q_grid", &self.q_grid)?;
        finite("alpha_grid", &self.alpha_grid)?;
        finite("growth_offsets", &self.growth_offsets)?;
        if self.depth == 0 {
            return Err(CliError::Config("depth must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(CliError::Config("levels must be at least 1".into()));
        }
        if self.tau_levels.contains(&0) {
            return Err(CliError::Config("tau_levels must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization; paths are excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn build_map(&self) -> Result<CookieCutterMap, CliError> {
        match &self.map {
            MapSpec::Fixture(name) => match name.as_str() {
                "cantor" => Ok(fixtures::cantor()),
                "moebius" => Ok(fixtures::moebius()),
                "two_contractions" => Ok(fixtures::two_contractions()),
                other => Err(CliError::Config(format!("unknown fixture {other:?}"))),
            },
            MapSpec::Branches(branches) => {
                let specs: Vec<BranchSpec> = branches
                    .iter()
                    .map(|b| {
                        let spec = match b.kind {
                            BranchKind::Affine { slope, intercept } => {
                                BranchSpec::affine(slope, intercept)
                            }
                            BranchKind::Moebius { a, b, c, d } => BranchSpec::moebius(a, b, c, d),
                        };
                        match b.image {
                            Some([lo, hi]) => spec.with_image(lo, hi),
                            None => spec,
                        }
                    })
                    .collect();
                Ok(CookieCutterMap::new(&specs)?)
            }
        }
    }

    pub fn build_potential(&self, map: &CookieCutterMap) -> Result<Potential, CliError> {
        let psi = match &self.potential {
            PotentialSpec::Bernoulli { probabilities } => {
                if probabilities.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                    return Err(CliError::Config("probabilities must lie in (0, 1]".into()));
                }
                Potential::bernoulli(probabilities)
            }
            PotentialSpec::LocallyConstant { values } => Potential::LocallyConstant(values.clone()),
            PotentialSpec::LogDerivative { scale } => Potential::combination(
                *scale,
                Potential::LogDerivative,
                0.0,
                Potential::constant(0.0),
                0.0,
            ),
        };
        psi.validate(map)?;
        Ok(psi)
    }

    pub fn zeta_config(&self) -> Result<ZetaConfig, CliError> {
        match (self.alpha, self.a, self.b) {
            (Some(alpha), Some(a), Some(b)) => Ok(ZetaConfig::new(alpha, a, b)?),
            _ => Err(CliError::Config("alpha, a and b are required".into())),
        }
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.alpha
            .ok_or_else(|| CliError::Config("alpha is required".into()))
    }

    /// Bernoulli parameter `p` when the run is the middle-third Cantor map
    /// with a two-symbol Bernoulli measure.
    pub fn cantor_bernoulli(&self, map: &CookieCutterMap) -> Option<f64> {
        let cantor = fixtures::cantor();
        match &self.potential {
            PotentialSpec::Bernoulli { probabilities }
                if probabilities.len() == 2
                    && map.branches() == cantor.branches()
                    && (probabilities[0] + probabilities[1] - 1.0).abs() < 1e-15 =>
            {
                Some(probabilities[0])
            }
            _ => None,
        }
    }
}
