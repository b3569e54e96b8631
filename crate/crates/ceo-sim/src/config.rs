//! Experiment configuration: a flat TOML file with one section per module.
//!
//! ```toml
//! [model]
//! source = "gaussian"
//! var = 1.0
//! observation = "additive_gaussian"
//! noise_var = 1.0
//!
//! [channel]
//! kind = "additive_gaussian"
//! var_v = 1000.0
//!
//! [estimator]
//! rule = "median"
//!
//! [run]
//! r = 2.0
//! l_grid = [101, 301, 1001, 3001, 10001]
//! trials = 20000
//! seed = 1
//! ```

use std::path::{Path, PathBuf};

use ceo_core::estimators::EstimatorRule;
use ceo_core::models::{JointModel, ObservationKind, ObservationSpec, SourceSpec};
use ceo_core::testchannels::{Certificate, TestChannelKind, TestChannelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};

pub const DEFAULT_L_GRID: [usize; 5] = [101, 301, 1001, 3001, 10001];
pub const DEFAULT_TRIALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationName {
    AdditiveGaussian,
    AdditiveUniform,
    AdditiveLogistic,
    Clayton,
    UniformScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelName {
    AdditiveGaussian,
    AdditiveUniform,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Median,
    Midrange,
    Mean,
    PosteriorGaussian,
}

impl From<RuleName> for EstimatorRule {
    fn from(r: RuleName) -> Self {
        match r {
            RuleName::Median => Self::Median,
            RuleName::Midrange => Self::Midrange,
            RuleName::Mean => Self::Mean,
            RuleName::PosteriorGaussian => Self::PosteriorGaussian,
        }
    }
}

impl RuleName {
    pub fn label(self) -> &'static str {
        match self {
            Self::Median => "median",
            Self::Midrange => "midrange",
            Self::Mean => "mean",
            Self::PosteriorGaussian => "posterior_gaussian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerMode {
    #[default]
    Auto,
    Fixed,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub source: SourceName,
    pub mean: Option<f64>,
    pub var: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub observation: ObservationName,
    pub noise_var: Option<f64>,
    pub width: Option<f64>,
    pub scale: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub kind: ChannelName,
    pub var_v: Option<f64>,
    pub width_v: Option<f64>,
    /// Values of `var_v` (or `width_v`) for bound sweeps.
    pub sweep: Option<Vec<f64>>,
    pub k_u: Option<f64>,
    pub alpha_u: Option<f64>,
    pub delta_u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub rule: RuleName,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self { rule: RuleName::Median }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub r: f64,
    #[serde(default = "default_grid")]
    pub l_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quantizer: QuantizerMode,
    pub quantizer_step: Option<f64>,
}

fn default_grid() -> Vec<usize> {
    DEFAULT_L_GRID.to_vec()
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Distortion levels at which the Shannon lower bound is tabulated.
    pub distortions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceSection {
    pub slope: Option<f64>,
    pub slope_tol: Option<f64>,
    pub beta_lo: Option<f64>,
    pub beta_hi: Option<f64>,
    pub gap_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// The file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    pub channel: Option<ChannelSection>,
    #[serde(default)]
    pub estimator: EstimatorSection,
    pub run: RunSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub acceptance: AcceptanceSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// How codewords are discretized before decoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantizerPolicy {
    /// [`ceo_core::quantizer::default_step`] at the largest `L` of the grid.
    Auto,
    Fixed(f64),
    Off,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: JointModel,
    pub channel: Option<TestChannelSpec>,
    pub channel_sweep: Vec<TestChannelSpec>,
    pub rule: RuleName,
    pub r: f64,
    pub l_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub quantizer: QuantizerPolicy,
    pub distortions: Option<Vec<f64>>,
    pub acceptance: AcceptanceSection,
    pub output_dir: Option<PathBuf>,
    /// SHA-256 of the canonical JSON form of the file.
    pub hash: String,
}

fn need(value: Option<f64>, section: &str, key: &str) -> Result<f64> {
    value.ok_or_else(|| SimError::config(format!("[{section}] needs `{key}`")))
}

impl ModelSection {
    fn build(&self) -> Result<JointModel> {
        let source = match self.source {
            SourceName::Gaussian => SourceSpec::gaussian(self.mean.unwrap_or(0.0), self.var.unwrap_or(1.0))?,
            SourceName::Uniform => SourceSpec::uniform(self.lo.unwrap_or(0.0), self.hi.unwrap_or(1.0))?,
        };
        let kind = match self.observation {
            ObservationName::AdditiveGaussian => {
                ObservationKind::AdditiveGaussian { noise_var: need(self.noise_var, "model", "noise_var")? }
            }
            ObservationName::AdditiveUniform => {
                ObservationKind::AdditiveUniform { width: need(self.width, "model", "width")? }
            }
            ObservationName::AdditiveLogistic => {
                ObservationKind::AdditiveLogistic { scale: need(self.scale, "model", "scale")? }
            }
            ObservationName::Clayton => ObservationKind::ClaytonCopula { theta: need(self.theta, "model", "theta")? },
            ObservationName::UniformScale => ObservationKind::UniformScale,
        };
        Ok(JointModel::new(source, ObservationSpec::new(kind)?)?)
    }
}

impl ChannelSection {
    fn kind_with(&self, param: Option<f64>) -> Result<TestChannelKind> {
        Ok(match self.kind {
            ChannelName::AdditiveGaussian => TestChannelKind::AdditiveGaussian { var_v: need(param, "channel", "var_v")? },
            ChannelName::AdditiveUniform => TestChannelKind::AdditiveUniform { width_v: need(param, "channel", "width_v")? },
            ChannelName::Identity => TestChannelKind::Identity,
        })
    }

    fn param(&self) -> Option<f64> {
        match self.kind {
            ChannelName::AdditiveGaussian => self.var_v,
            ChannelName::AdditiveUniform => self.width_v,
            ChannelName::Identity => None,
        }
    }

    fn certificate(&self) -> Result<Option<Certificate>> {
        match (self.k_u, self.alpha_u, self.delta_u) {
            (None, None, None) => Ok(None),
            (Some(k_u), Some(alpha_u), None) => Ok(Some(Certificate::Regular { k_u, alpha_u })),
            (Some(k_u), None, Some(delta_u)) => Ok(Some(Certificate::NonRegular { k_u, delta_u })),
            _ => Err(SimError::config("[channel] certificate needs k_u with exactly one of alpha_u, delta_u")),
        }
    }

    fn spec(&self, param: Option<f64>) -> Result<TestChannelSpec> {
        let spec = TestChannelSpec::new(self.kind_with(param)?)?;
        match self.certificate()? {
            Some(c) => Ok(spec.with_certificate(c)?),
            None => Ok(spec),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<(Self, String)> {
        let value: toml::Value =
            toml::from_str(text).map_err(|source| SimError::Parse { path: path.to_path_buf(), source })?;
        let hash = canonical_hash(&value)?;
        let file = value.try_into().map_err(|source| SimError::Parse { path: path.to_path_buf(), source })?;
        Ok((file, hash))
    }

    pub fn validate(&self, hash: String) -> Result<ExperimentConfig> {
        let model = self.model.build()?;
        let regular = model.regularity_class().is_regular();
        let (channel, channel_sweep) = match &self.channel {
            None => (None, Vec::new()),
            Some(c) => {
                let sweep = match &c.sweep {
                    Some(values) => values.iter().map(|&v| c.spec(Some(v))).collect::<Result<_>>()?,
                    None => Vec::new(),
                };
                let main = match (c.param(), c.kind, sweep.last()) {
                    (None, ChannelName::Identity, _) | (Some(_), _, _) => c.spec(c.param())?,
                    (None, _, Some(last)) => *last,
                    (None, _, None) => return Err(SimError::config("[channel] needs its noise parameter or a sweep")),
                };
                (Some(main), sweep)
            }
        };
        let run = &self.run;
        let min_r = if regular { 2.0 } else { 1.0 };
        if !(run.r >= min_r && run.r.is_finite()) {
            return Err(SimError::config(format!(
                "r = {} is below {min_r}, the smallest order covered for this regularity class",
                run.r
            )));
        }
        if run.l_grid.is_empty() || run.l_grid.contains(&0) {
            return Err(SimError::config("[run] l_grid must list positive agent counts"));
        }
        if run.l_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimError::config("[run] l_grid must be strictly increasing"));
        }
        if run.trials < 16 {
            return Err(SimError::config("[run] trials must be at least 16 (one per batch)"));
        }
        let quantizer = match (run.quantizer, run.quantizer_step) {
            (QuantizerMode::Auto, None) => QuantizerPolicy::Auto,
            (QuantizerMode::Off, None) => QuantizerPolicy::Off,
            (QuantizerMode::Fixed, Some(step)) if step > 0.0 && step.is_finite() => QuantizerPolicy::Fixed(step),
            (QuantizerMode::Fixed, _) => {
                return Err(SimError::config("quantizer = \"fixed\" needs a positive quantizer_step"))
            }
            (_, Some(_)) => return Err(SimError::config("quantizer_step is only read with quantizer = \"fixed\"")),
        };
        Ok(ExperimentConfig {
            model,
            channel,
            channel_sweep,
            rule: self.estimator.rule,
            r: run.r,
            l_grid: run.l_grid.clone(),
            trials: run.trials,
            seed: run.seed,
            quantizer,
            distortions: self.bounds.distortions.clone(),
            acceptance: self.acceptance.clone(),
            output_dir: self.output.dir.clone(),
            hash,
        })
    }
}

/// Hex SHA-256 of the value rendered as JSON with sorted keys.
pub fn canonical_hash(value: &toml::Value) -> Result<String> {
    let json: serde_json::Value = serde_json::to_value(value)?;
    let text = serde_json::to_string(&sort_keys(json))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_str(text: &str, path: &Path) -> Result<Self> {
        let (file, hash) = ConfigFile::parse(text, path)?;
        file.validate(hash)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_str(&text, path)
    }

    pub fn channel(&self) -> Result<&TestChannelSpec> {
        self.channel.as_ref().ok_or_else(|| SimError::config("this command needs a [channel] section"))
    }

    pub fn l_max(&self) -> usize {
        self.l_grid.last().copied().unwrap_or(1)
    }

    pub fn is_regular(&self) -> bool {
        self.model.regularity_class().is_regular()
    }

    /// Exponent `e` in `β = lim R_sum^e D`.
    pub fn rate_exponent(&self) -> f64 {
        if self.is_regular() {
            0.5 * self.r
        } else {
            self.r
        }
    }
}
