//! Central-decoder estimators and the order-statistic laws behind them.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models::{JointModel, ObservationKind, SourceSpec};
use crate::numerics::special::{gamma, gaussian_entropy, ln_beta};
use crate::numerics::stats::mean;
use crate::testchannels::{inverse_map, TestChannelSpec};

pub use crate::testchannels::InverseMap;

/// Smallest `L` for which the large-sample median moment bound is reported.
pub const LARGE_L_POLICY: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorRule {
    Median,
    Midrange,
    Mean,
    PosteriorGaussian,
}

/// Conjugate prior and per-codeword noise for the Gaussian posterior rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPosterior {
    pub prior_mean: f64,
    pub prior_var: f64,
    /// Variance of `U_i - X`.
    pub codeword_var: f64,
}

impl GaussianPosterior {
    /// Posterior variance after `agents` codewords; it does not depend on
    /// the codeword values.
    pub fn variance(&self, agents: usize) -> f64 {
        1.0 / (1.0 / self.prior_var + agents as f64 / self.codeword_var)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub rule: EstimatorRule,
    pub inverse_map: InverseMap,
    pub posterior: Option<GaussianPosterior>,
}

impl EstimatorSpec {
    /// A point-estimate rule with an explicit `ℓ⁻¹`.
    pub fn point(rule: EstimatorRule, inverse_map: InverseMap) -> Result<Self> {
        if rule == EstimatorRule::PosteriorGaussian {
            return Err(Error::EstimatorPrecondition("the posterior rule needs prior parameters"));
        }
        Ok(Self { rule, inverse_map, posterior: None })
    }

    pub fn posterior_gaussian(posterior: GaussianPosterior) -> Result<Self> {
        let GaussianPosterior { prior_mean, prior_var, codeword_var } = posterior;
        if !(prior_var > 0.0 && codeword_var > 0.0 && prior_mean.is_finite()) {
            return Err(Error::InvalidParameter { name: "posterior", reason: "variances must be positive" });
        }
        Ok(Self { rule: EstimatorRule::PosteriorGaussian, inverse_map: InverseMap::IDENTITY, posterior: Some(posterior) })
    }

    /// Builds the rule for a model/channel pair, checking its preconditions.
    pub fn for_model(rule: EstimatorRule, model: &JointModel, channel: &TestChannelSpec) -> Result<Self> {
        match rule {
            EstimatorRule::PosteriorGaussian => {
                let (SourceSpec::Gaussian { mean, var }, ObservationKind::AdditiveGaussian { noise_var }) =
                    (model.source, model.observation.kind())
                else {
                    return Err(Error::EstimatorPrecondition("posterior_gaussian needs a Gaussian/Gaussian model"));
                };
                let channel_var = match channel.kind {
                    crate::testchannels::TestChannelKind::AdditiveGaussian { var_v } => var_v,
                    crate::testchannels::TestChannelKind::Identity => 0.0,
                    _ => return Err(Error::EstimatorPrecondition("posterior_gaussian needs a Gaussian channel")),
                };
                Self::posterior_gaussian(GaussianPosterior {
                    prior_mean: mean,
                    prior_var: var,
                    codeword_var: noise_var + channel_var,
                })
            }
            EstimatorRule::Midrange => {
                let kernel = crate::testchannels::ComposedKernel::new(model, channel)?;
                if !kernel.support(model.source.mean()).is_bounded() {
                    return Err(Error::EstimatorPrecondition("midrange needs a bounded conditional support"));
                }
                Self::point(rule, inverse_map(model, channel)?)
            }
            EstimatorRule::Median | EstimatorRule::Mean => Self::point(rule, inverse_map(model, channel)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimate {
    Point(f64),
    Posterior { mean: f64, var: f64, entropy: f64 },
}

impl Estimate {
    /// The point estimate, or the posterior mean.
    pub fn value(&self) -> f64 {
        match *self {
            Self::Point(x) => x,
            Self::Posterior { mean, .. } => mean,
        }
    }
}

/// Sorted codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStats {
    sorted: Vec<f64>,
}

impl OrderStats {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// `U_(m+1)` for `L = 2m + 1`.
    pub fn median(&self) -> Result<f64> {
        median_of_sorted(&self.sorted)
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EstimatorPrecondition("no decoded codewords"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::EstimatorPrecondition("decoded codewords contain NaN"));
    }
    Ok(())
}

fn median_of_sorted(sorted: &[f64]) -> Result<f64> {
    if sorted.len() % 2 == 0 {
        return Err(Error::EvenAgentCount(sorted.len()));
    }
    Ok(sorted[sorted.len() / 2])
}

/// Applies the rule to decoded codewords, leaving the input untouched.
pub fn estimate(spec: &EstimatorSpec, decoded: &[f64]) -> Result<Estimate> {
    match spec.rule {
        EstimatorRule::Median => estimate_in_place(spec, &mut decoded.to_vec()),
        _ => {
            check_values(decoded)?;
            Ok(summarize(spec, decoded))
        }
    }
}

/// Like [`estimate`] but partially reorders `decoded` for the median rule.
pub fn estimate_in_place(spec: &EstimatorSpec, decoded: &mut [f64]) -> Result<Estimate> {
    check_values(decoded)?;
    if spec.rule == EstimatorRule::Median {
        if decoded.len() % 2 == 0 {
            return Err(Error::EvenAgentCount(decoded.len()));
        }
        let (_, &mut mid, _) = decoded.select_nth_unstable_by(decoded.len() / 2, f64::total_cmp);
        return Ok(Estimate::Point(spec.inverse_map.apply(mid)));
    }
    Ok(summarize(spec, decoded))
}

fn summarize(spec: &EstimatorSpec, decoded: &[f64]) -> Estimate {
    match spec.rule {
        EstimatorRule::Midrange => {
            let (lo, hi) = decoded
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)));
            Estimate::Point(spec.inverse_map.apply(0.5 * (lo + hi)))
        }
        EstimatorRule::Mean => Estimate::Point(spec.inverse_map.apply(mean(decoded))),
        EstimatorRule::PosteriorGaussian => {
            let p = spec.posterior.expect("posterior rule is built with parameters");
            let var = p.variance(decoded.len());
            let sum: f64 = mean(decoded) * decoded.len() as f64;
            let post_mean = var * (p.prior_mean / p.prior_var + sum / p.codeword_var);
            Estimate::Posterior { mean: post_mean, var, entropy: gaussian_entropy(var) }
        }
        EstimatorRule::Median => unreachable!("median handled by the caller"),
    }
}

/// Exact density of the sample median of `L = 2m + 1` i.i.d. draws:
/// `F(v)^m (1 - F(v))^m f(v) / B(m+1, m+1)`.
pub fn median_density<F, P>(agents: usize, cdf: F, pdf: P, v: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    if agents % 2 == 0 {
        return Err(Error::EvenAgentCount(agents));
    }
    let m = ((agents - 1) / 2) as f64;
    let f = pdf(v);
    if f <= 0.0 {
        return Ok(0.0);
    }
    if m == 0.0 {
        return Ok(f);
    }
    let p = cdf(v);
    if p <= 0.0 || p >= 1.0 {
        return Ok(0.0);
    }
    Ok((m * p.ln() + m * (1.0 - p).ln() - ln_beta(m + 1.0, m + 1.0)).exp() * f)
}

/// Large-`L` bound on `E|U_(m+1) - med|^r`:
/// `(1/(2 L f²))^{r/2} Γ((r+1)/2)/√π`.
pub fn median_abs_moment_bound(agents: usize, r: f64, f_at_median: f64) -> Result<f64> {
    if agents % 2 == 0 {
        return Err(Error::EvenAgentCount(agents));
    }
    if agents < LARGE_L_POLICY {
        return Err(Error::OutOfRange { value: agents as f64, lo: LARGE_L_POLICY as f64, hi: f64::INFINITY });
    }
    if !(f_at_median > 0.0) {
        return Err(Error::InvalidParameter { name: "f_at_median", reason: "median density must be positive" });
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter { name: "r", reason: "order must be at least one" });
    }
    Ok((1.0 / (2.0 * agents as f64 * f_at_median * f_at_median)).powf(0.5 * r) * gamma(0.5 * (r + 1.0)) / PI.sqrt())
}

/// `E|Z - μ|^r` for `Z ~ N(μ, var)`.
pub fn gaussian_abs_central_moment(var: f64, r: f64) -> f64 {
    (2.0 * var).powf(0.5 * r) * gamma(0.5 * (r + 1.0)) / PI.sqrt()
}

/// Exact laws of the scaled extreme gaps `ξ = L·U_(1)` and `η = L·(1 - U_(L))`
/// of `L` uniform draws on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremeGapLaw {
    agents: usize,
}

impl ExtremeGapLaw {
    pub fn new(agents: usize) -> Result<Self> {
        if agents < 2 {
            return Err(Error::InvalidParameter { name: "L", reason: "extreme gaps need at least two agents" });
        }
        Ok(Self { agents })
    }

    fn check(&self, s: f64) -> Result<()> {
        let l = self.agents as f64;
        if !(0.0..=l).contains(&s) {
            return Err(Error::OutOfRange { value: s, lo: 0.0, hi: l });
        }
        Ok(())
    }

    /// `f_ξ(s) = f_η(s) = (1 - s/L)^{L-1}`.
    pub fn marginal_density(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        let l = self.agents as f64;
        Ok((1.0 - s / l).powi(self.agents as i32 - 1))
    }

    /// `f_{ξ,η}(s₁, s₂) = ((L-1)/L)(1 - (s₁+s₂)/L)^{L-2}` on `s₁ + s₂ ≤ L`.
    pub fn joint_density(&self, s1: f64, s2: f64) -> Result<f64> {
        self.check(s1)?;
        self.check(s2)?;
        let l = self.agents as f64;
        let rest = 1.0 - (s1 + s2) / l;
        if rest < 0.0 {
            return Ok(0.0);
        }
        Ok((l - 1.0) / l * rest.powi(self.agents as i32 - 2))
    }

    /// `E[ξ] = L/(L+1)`.
    pub fn mean(&self) -> f64 {
        let l = self.agents as f64;
        l / (l + 1.0)
    }

    /// Pointwise limit `e^{-s}` of the marginal.
    pub fn limit_density(s: f64) -> f64 {
        (-s).exp()
    }
}

/// `E[(midrange - (a+b)/2)²] = (b-a)²/(2(L+1)(L+2))` for `L` draws from
/// `unif[a, b]`.
pub fn midrange_mse_uniform(agents: usize, a: f64, b: f64) -> f64 {
    let l = agents as f64;
    (b - a) * (b - a) / (2.0 * (l + 1.0) * (l + 2.0))
}
