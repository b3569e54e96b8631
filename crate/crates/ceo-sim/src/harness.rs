//! Monte-Carlo distortion estimates, scaling studies and bound tables.
//!
//! Every trial draws a fresh source value, `L` observations and `L` codewords
//! from its own counter-based stream `(seed, trial_stream_id(L, trial))`, so
//! results do not depend on the thread count or on the order of the grid.

use std::collections::BTreeMap;

use ceo_core::bounds::{
    achievability_coefficient, clarke_barron_mi, converse_coefficient, czz_lower_bound_shift_invariant,
    median_achievability, midrange_achievability, nonregular_converse, regular_converse, shannon_lower_bound,
    slb_zero_crossing, uniform_location_p_min, BoundReport,
};
use ceo_core::estimators::{estimate_in_place, Estimate, EstimatorRule, EstimatorSpec};
use ceo_core::models::{JointModel, ObservationKind, SourceSpec};
use ceo_core::numerics::fit::{fit_loglog_slope, LogLogFit};
use ceo_core::numerics::quadrature::GaussLegendre;
use ceo_core::numerics::rng::{trial_stream_id, RngStream};
use ceo_core::numerics::stats::{batch_means_ci, MeanCi, DEFAULT_BATCHES};
use ceo_core::quantizer::{default_step, quantized_conditional_entropy, QuantizerSpec};
use ceo_core::testchannels::{
    conditional_mutual_information, regularity_certificate, source_average, RateAccount,
    TestChannelKind, TestChannelSpec,
};
use ceo_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, QuantizerPolicy, RuleName};
use crate::error::{Result, SimError};

/// Minimum span of the agent grid, in decades, for a slope fit.
pub const MIN_GRID_DECADES: f64 = 1.5;
/// Relative slack below which a negative equivalence gap still counts as the
/// entropy-power inequality holding.
pub const EPI_SLACK: f64 = 1e-12;

/// Sampling, quantization and decoding for one model/channel/rule triple.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub model: JointModel,
    pub channel: TestChannelSpec,
    pub estimator: EstimatorSpec,
    pub quantizer: Option<QuantizerSpec>,
    /// Nats per agent: `I(Y;U|X)`, or `H(Ũ|X)` when the former is infinite.
    pub rate: f64,
    pub seed: u64,
}

/// Per-trial outcome of one agent count.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub agents: usize,
    pub abs_errors: Vec<f64>,
    pub estimates: Vec<Estimate>,
    pub clamped: usize,
}

impl TrialBatch {
    /// `D̂ = mean |X - X̂|^r` with its batch-means interval.
    pub fn distortion(&self, r: f64) -> MeanCi {
        let v: Vec<f64> = self.abs_errors.iter().map(|e| e.powf(r)).collect();
        batch_means_ci(&v, DEFAULT_BATCHES)
    }
}

impl Pipeline {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        Self::for_channel(config, *config.channel()?)
    }

    pub fn for_channel(config: &ExperimentConfig, channel: TestChannelSpec) -> Result<Self> {
        let model = config.model;
        let estimator = EstimatorSpec::for_model(config.rule.into(), &model, &channel)?;
        let quantizer = match config.quantizer {
            QuantizerPolicy::Off => None,
            QuantizerPolicy::Fixed(step) => Some(QuantizerSpec::for_codewords(&model, &channel, step)?),
            QuantizerPolicy::Auto => {
                let step = default_step(&model, &channel, config.l_max())?;
                Some(QuantizerSpec::for_codewords(&model, &channel, step)?)
            }
        };
        let rate = match (conditional_mutual_information(&model, &channel), &quantizer) {
            (Ok(i), _) => i,
            (Err(CoreError::UnboundedRate), Some(q)) => quantized_conditional_entropy(&model, &channel, q)?,
            (Err(CoreError::UnboundedRate), None) => f64::INFINITY,
            (Err(e), _) => return Err(e.into()),
        };
        Ok(Self { model, channel, estimator, quantizer, rate, seed: config.seed })
    }

    pub fn rate_account(&self, agents: usize) -> RateAccount {
        RateAccount {
            i_yu_given_x: self.rate,
            agents,
            r_sum: agents as f64 * self.rate,
            r_ind: self.rate,
        }
    }

    fn trial(&self, agents: usize, trial: usize, buf: &mut [f64]) -> Result<(f64, Estimate, usize)> {
        let mut rng = RngStream::new(self.seed, trial_stream_id(agents as u64, trial as u64));
        let x = self.model.sample_source(&mut rng);
        self.model.sample_observations_into(x, buf, &mut rng);
        self.channel.apply_in_place(buf, &mut rng)?;
        let clamped = self.quantizer.as_ref().map_or(0, |q| q.quantize_slice(buf));
        let est = estimate_in_place(&self.estimator, buf)?;
        Ok(((x - est.value()).abs(), est, clamped))
    }

    /// Runs `trials` independent trials at `agents` agents.
    pub fn run_trials(&self, agents: usize, trials: usize) -> Result<TrialBatch> {
        if agents == 0 {
            return Err(SimError::config("agent count must be positive"));
        }
        if self.estimator.rule == EstimatorRule::Median && agents % 2 == 0 {
            return Err(CoreError::EvenAgentCount(agents).into());
        }
        let outcomes: Vec<(f64, Estimate, usize)> = (0..trials)
            .into_par_iter()
            .map_init(|| vec![0.0; agents], |buf, t| self.trial(agents, t, buf))
            .collect::<Result<_>>()?;
        let mut batch = TrialBatch { agents, abs_errors: Vec::with_capacity(trials), estimates: Vec::with_capacity(trials), clamped: 0 };
        for (e, est, c) in outcomes {
            batch.abs_errors.push(e);
            batch.estimates.push(est);
            batch.clamped += c;
        }
        Ok(batch)
    }
}

/// One row of a distortion sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionPoint {
    pub agents: usize,
    pub r_sum: f64,
    pub d_hat: MeanCi,
    pub clamped: usize,
}

/// `D̂` and its interval at `agents` agents for the configured order.
pub fn run_distortion_point(config: &ExperimentConfig, agents: usize) -> Result<DistortionPoint> {
    let pipeline = Pipeline::new(config)?;
    let batch = pipeline.run_trials(agents, config.trials)?;
    Ok(DistortionPoint {
        agents,
        r_sum: pipeline.rate_account(agents).r_sum,
        d_hat: batch.distortion(config.r),
        clamped: batch.clamped,
    })
}

/// Every grid point of the configuration, in grid order.
pub fn run_distortion_sweep(config: &ExperimentConfig) -> Result<Vec<DistortionPoint>> {
    let pipeline = Pipeline::new(config)?;
    config
        .l_grid
        .iter()
        .map(|&l| {
            let batch = pipeline.run_trials(l, config.trials)?;
            Ok(DistortionPoint {
                agents: l,
                r_sum: pipeline.rate_account(l).r_sum,
                d_hat: batch.distortion(config.r),
                clamped: batch.clamped,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub rows_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub r: f64,
    /// `e` in `R_sum^e · D̂`.
    pub exponent: f64,
    pub rows: Vec<DistortionPoint>,
    pub fit: LogLogFit,
    pub beta: BetaEstimate,
}

fn check_grid(config: &ExperimentConfig) -> Result<()> {
    if config.l_grid.len() < ceo_core::numerics::fit::MIN_POINTS {
        return Err(SimError::config(format!(
            "scaling studies need at least {} grid points",
            ceo_core::numerics::fit::MIN_POINTS
        )));
    }
    let (lo, hi) = (config.l_grid[0] as f64, config.l_max() as f64);
    if (hi / lo).log10() < MIN_GRID_DECADES {
        return Err(SimError::config(format!("scaling studies need an L grid spanning {MIN_GRID_DECADES} decades")));
    }
    Ok(())
}

fn summarize(r: f64, exponent: f64, rows: Vec<DistortionPoint>) -> Result<ScalingResult> {
    if rows.iter().any(|p| !p.r_sum.is_finite()) {
        return Err(CoreError::UnboundedRate.into());
    }
    let fit = fit_loglog_slope(&rows.iter().map(|p| (p.r_sum, p.d_hat.mean)).collect::<Vec<_>>())?;
    let top = rows.len().div_ceil(3);
    let tail = &rows[rows.len() - top..];
    let scaled = |f: fn(&MeanCi) -> f64| tail.iter().map(|p| p.r_sum.powf(exponent) * f(&p.d_hat)).sum::<f64>() / top as f64;
    let beta = BetaEstimate { mean: scaled(|c| c.mean), lo: scaled(|c| c.lo), hi: scaled(|c| c.hi), rows_used: top };
    Ok(ScalingResult { r, exponent, rows, fit, beta })
}

/// Scaling studies for several distortion orders from one set of trials.
pub fn run_scaling_study_orders(config: &ExperimentConfig, orders: &[f64]) -> Result<Vec<ScalingResult>> {
    check_grid(config)?;
    let pipeline = Pipeline::new(config)?;
    let batches: Vec<TrialBatch> =
        config.l_grid.iter().map(|&l| pipeline.run_trials(l, config.trials)).collect::<Result<_>>()?;
    orders
        .iter()
        .map(|&r| {
            let exponent = if config.is_regular() { 0.5 * r } else { r };
            let rows = batches
                .iter()
                .map(|b| DistortionPoint {
                    agents: b.agents,
                    r_sum: pipeline.rate_account(b.agents).r_sum,
                    d_hat: b.distortion(r),
                    clamped: b.clamped,
                })
                .collect();
            summarize(r, exponent, rows)
        })
        .collect()
}

pub fn run_scaling_study(config: &ExperimentConfig) -> Result<ScalingResult> {
    Ok(run_scaling_study_orders(config, &[config.r])?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceRow {
    #[serde(rename = "L")]
    pub agents: usize,
    /// Mean posterior variance.
    pub d_q: f64,
    /// Mean posterior differential entropy.
    pub d_log: f64,
    /// `D_Q - e^{2 D_Log} / (2πe)`.
    pub gap: f64,
    pub epi_holds: bool,
    /// Monte-Carlo squared error of the posterior mean.
    pub mse_hat: f64,
    pub mse_ci_lo: f64,
    pub mse_ci_hi: f64,
}

/// Quadratic versus logarithmic distortion under the Gaussian posterior rule.
pub fn run_equivalence_study(config: &ExperimentConfig) -> Result<Vec<EquivalenceRow>> {
    if config.rule != RuleName::PosteriorGaussian {
        return Err(SimError::config("the equivalence study needs rule = \"posterior_gaussian\""));
    }
    if !matches!(
        (config.model.source, config.model.observation.kind()),
        (SourceSpec::Gaussian { .. }, ObservationKind::AdditiveGaussian { .. })
    ) {
        return Err(SimError::config("the equivalence study is restricted to the Gaussian/Gaussian model"));
    }
    let pipeline = Pipeline::new(config)?;
    config
        .l_grid
        .iter()
        .map(|&l| {
            let batch = pipeline.run_trials(l, config.trials)?;
            let n = batch.estimates.len() as f64;
            let (var_sum, ent_sum) = batch.estimates.iter().fold((0.0, 0.0), |(v, h), e| match *e {
                Estimate::Posterior { var, entropy, .. } => (v + var, h + entropy),
                Estimate::Point(_) => (v, h),
            });
            let (d_q, d_log) = (var_sum / n, ent_sum / n);
            let gap = d_q - (2.0 * d_log).exp() / (2.0 * std::f64::consts::PI * std::f64::consts::E);
            let mse = batch.distortion(2.0);
            Ok(EquivalenceRow {
                agents: l,
                d_q,
                d_log,
                gap,
                epi_holds: gap >= -EPI_SLACK * d_q,
                mse_hat: mse.mean,
                mse_ci_lo: mse.lo,
                mse_ci_hi: mse.hi,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlbRow {
    pub distortion: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    #[serde(rename = "L")]
    pub agents: usize,
    pub value: f64,
}

/// Serializable view of a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub kind: &'static str,
    pub value: f64,
    pub quadrature_residual: f64,
    pub inputs: BTreeMap<&'static str, f64>,
}

impl From<BoundReport> for BoundEntry {
    fn from(b: BoundReport) -> Self {
        Self {
            kind: b.kind.label(),
            value: b.value,
            quadrature_residual: b.quadrature_residual,
            inputs: b.inputs.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `var_v` or `width_v`; absent for the identity channel.
    pub channel_param: Option<f64>,
    pub mi: f64,
    pub converse: Option<BoundEntry>,
    pub converse_jensen: Option<BoundEntry>,
    pub achievability: Option<BoundEntry>,
    pub beta_hat: Option<BetaEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CzzRow {
    #[serde(rename = "L")]
    pub agents: usize,
    pub report: BoundEntry,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BoundComparison {
    pub r: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub source_entropy: f64,
    pub slb_zero_crossing: f64,
    pub slb: Vec<SlbRow>,
    pub clarke_barron: Vec<CurveRow>,
    pub sweep: Vec<SweepRow>,
    pub czz: Vec<CzzRow>,
    /// Failures of individual items; the rest of the report is still valid.
    pub errors: Vec<String>,
}

fn channel_param(channel: &TestChannelSpec) -> Option<f64> {
    match channel.kind {
        TestChannelKind::AdditiveGaussian { var_v } => Some(var_v),
        TestChannelKind::AdditiveUniform { width_v } => Some(width_v),
        TestChannelKind::Identity => None,
    }
}

fn default_distortions(var: f64) -> Vec<f64> {
    (0..=12).map(|k| var * 10f64.powf(-0.25 * f64::from(k))).collect()
}

fn sweep_row(config: &ExperimentConfig, channel: TestChannelSpec, simulate: bool) -> Result<SweepRow> {
    let model = &config.model;
    let pipeline = Pipeline::for_channel(config, channel)?;
    let mi = pipeline.rate;
    let mut row = SweepRow {
        channel_param: channel_param(&channel),
        mi,
        converse: None,
        converse_jensen: None,
        achievability: None,
        beta_hat: None,
    };
    let certificate = regularity_certificate(&channel, model)?;
    if config.is_regular() {
        let conv = regular_converse(model, &channel, config.r)?;
        row.converse = Some(conv.exp_log.into());
        row.converse_jensen = Some(conv.jensen.into());
        row.achievability = Some(median_achievability(certificate, config.r, mi)?.into());
    } else {
        row.converse = Some(nonregular_converse(model, &channel, config.r, mi)?.into());
        row.achievability = Some(midrange_achievability(certificate, config.r, mi)?.into());
    }
    if simulate {
        let mut single = config.clone();
        single.channel = Some(channel);
        row.beta_hat = Some(run_scaling_study(&single)?.beta);
    }
    Ok(row)
}

/// `X ~ unif[0, 1]` observed through `unif[x, x + w]` with the identity channel,
/// the setting where the finite-`L` CZZ bound has a closed-form `P_min`.
pub fn uniform_location_width(config: &ExperimentConfig) -> Option<f64> {
    match (config.model.source, config.model.observation.kind(), config.channel.map(|c| c.kind)) {
        (SourceSpec::Uniform { lo, hi }, ObservationKind::AdditiveUniform { width }, Some(TestChannelKind::Identity))
            if lo == 0.0 && hi == 1.0 =>
        {
            Some(width)
        }
        _ => None,
    }
}

/// Finite-`L` CZZ bound for [`uniform_location_width`] models.
pub fn czz_uniform(width: f64, agents: usize, r: f64) -> Result<BoundReport> {
    let f = |x: f64| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 };
    Ok(czz_lower_bound_shift_invariant(f, r, |h| uniform_location_p_min(h, width, agents))?)
}

fn record<T>(errors: &mut Vec<String>, what: &str, r: Result<T>) -> Option<T> {
    r.map_err(|e| errors.push(format!("{what}: {e}"))).ok()
}

/// Every bound the configuration supports, with simulated `β̂` per sweep point
/// when `simulate` is set.
pub fn run_bound_comparison(config: &ExperimentConfig, simulate: bool) -> BoundComparison {
    let model = &config.model;
    let h = model.source.differential_entropy();
    let mut out = BoundComparison {
        r: config.r,
        source_entropy: h,
        slb_zero_crossing: slb_zero_crossing(h, config.r),
        ..Default::default()
    };
    let distortions = config.distortions.clone().unwrap_or_else(|| default_distortions(model.source.variance()));
    for d in distortions {
        if let Some(value) = record(&mut out.errors, "slb", shannon_lower_bound(h, config.r, d).map_err(Into::into)) {
            out.slb.push(SlbRow { distortion: d, value });
        }
    }
    if config.is_regular() {
        out.c1 = record(&mut out.errors, "c1", converse_coefficient(config.r).map_err(Into::into));
        out.c2 = record(&mut out.errors, "c2", achievability_coefficient(config.r).map_err(Into::into));
        let mean_log = source_average(model, |x| model.fisher_information(x).map(f64::ln));
        if let Some(ml) = record(&mut out.errors, "fisher", mean_log.map_err(Into::into)) {
            for &l in &config.l_grid {
                if let Some(value) = record(&mut out.errors, "clarke_barron", clarke_barron_mi(h, ml, l).map_err(Into::into)) {
                    out.clarke_barron.push(CurveRow { agents: l, value });
                }
            }
        }
    }
    let Some(main) = config.channel else {
        return out;
    };
    let channels = if config.channel_sweep.is_empty() { vec![main] } else { config.channel_sweep.clone() };
    for channel in channels {
        if let Some(row) = record(&mut out.errors, "sweep", sweep_row(config, channel, simulate)) {
            out.sweep.push(row);
        }
    }
    if let Some(width) = uniform_location_width(config) {
        for &l in &config.l_grid {
            if let Some(report) = record(&mut out.errors, "czz", czz_uniform(width, l, config.r)) {
                out.czz.push(CzzRow { agents: l, report: report.into() });
            }
        }
    }
    out
}

/// Equal-prior error probability of `x` against `x + h` from `L` codewords
/// `unif[x, x + w]`, by quadrature of `½ ∫∫ min(f₀, f₁)` over the joint law of
/// the sample minimum and maximum.
///
/// The integrand is a polynomial of degree `L - 2` on each cell cut out by the
/// support edges, so a rule with more than `L/2` nodes per cell is exact.
pub fn p_min_brute_force(h: f64, width: f64, agents: usize) -> f64 {
    assert!(agents >= 2, "the min/max statistic needs two codewords");
    let l = agents as f64;
    let density = |x: f64, m: f64, big_m: f64| {
        if m >= x && big_m <= x + width && m <= big_m {
            l * (l - 1.0) * ((big_m - m) / width).powi(agents as i32 - 2) / (width * width)
        } else {
            0.0
        }
    };
    let (x0, x1) = (0.0, h);
    let mut cuts = vec![x0, x1, x0 + width, x1 + width];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rule = GaussLegendre::new(agents / 2 + 2);
    let inner = |m: f64| {
        let mut total = 0.0;
        let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| c > m).collect();
        pts.insert(0, m);
        for w in pts.windows(2) {
            total += rule.integrate(|big_m| density(x0, m, big_m).min(density(x1, m, big_m)), w[0], w[1]);
        }
        total
    };
    let outer: f64 = cuts.windows(2).map(|w| rule.integrate(inner, w[0], w[1])).sum();
    0.5 * outer
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_str(text, Path::new("test.toml")).unwrap()
    }

    const GAUSS: &str = r#"
[model]
source = "gaussian"
var = 1.0
observation = "additive_gaussian"
noise_var = 1.0

[channel]
kind = "additive_gaussian"
var_v = 1.0

[run]
r = 2.0
l_grid = [11, 41, 161, 641]
trials = 2000
seed = 9
"#;

    #[test]
    fn noiseless_identity_is_exact() {
        let c = cfg(r#"
[model]
source = "gaussian"
observation = "additive_gaussian"
noise_var = 0.0

[channel]
kind = "identity"

[estimator]
rule = "median"

[run]
r = 2.0
l_grid = [5]
trials = 64
quantizer = "off"
"#);
        let p = run_distortion_point(&c, 5).unwrap();
        assert_eq!(p.d_hat.mean, 0.0);
        assert!(p.r_sum.is_infinite());
    }

    #[test]
    fn results_independent_of_thread_count() {
        let c = cfg(GAUSS);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run_distortion_point(&c, 41)).unwrap();
        let b = three.install(|| run_distortion_point(&c, 41)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn even_median_surfaces_precondition() {
        let c = cfg(GAUSS);
        let err = run_distortion_point(&c, 40).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::ESTIMATOR_PRECONDITION);
    }

    #[test]
    fn distortion_decreases_in_l() {
        let c = cfg(GAUSS);
        let rows = run_distortion_sweep(&c).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].d_hat.mean <= w[0].d_hat.hi);
        }
    }

    #[test]
    fn median_variance_matches_asymptotics() {
        // Var(median) ≈ 1/(4 L f²) with f = (4π)^{-1/2}: L·D ≈ π
        let c = cfg(&GAUSS.replace("trials = 2000", "trials = 8000"));
        let p = run_distortion_point(&c, 641).unwrap();
        let scaled = 641.0 * p.d_hat.mean;
        assert!((scaled / std::f64::consts::PI - 1.0).abs() < 0.05, "{scaled}");
    }

    #[test]
    fn scaling_needs_decades() {
        let c = cfg(&GAUSS.replace("[11, 41, 161, 641]", "[11, 21, 41, 81]"));
        assert!(matches!(run_scaling_study(&c), Err(SimError::Config(_))));
    }

    #[test]
    fn p_min_brute_force_matches_closed_form() {
        for &(h, w, l) in &[(0.1, 1.0, 2), (0.3, 1.0, 11), (0.05, 1.0, 101), (0.2, 0.5, 7), (1.2, 1.0, 5)] {
            let brute = p_min_brute_force(h, w, l);
            let exact = uniform_location_p_min(h, w, l);
            assert!((brute - exact).abs() < 1e-12, "h={h} w={w} L={l}: {brute} vs {exact}");
        }
    }

    #[test]
    fn gaussian_bound_table() {
        let c = cfg(&GAUSS.replace("var_v = 1.0", "sweep = [1.0, 10.0, 100.0, 1000.0]"));
        let t = run_bound_comparison(&c, false);
        assert!(t.errors.is_empty(), "{:?}", t.errors);
        assert!((t.c1.unwrap() - 1.0).abs() < 1e-14);
        assert!((t.c2.unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(t.sweep.len(), 4);
        for row in &t.sweep {
            assert!(row.converse_jensen.as_ref().unwrap().value <= row.achievability.as_ref().unwrap().value);
        }
        assert!(t.czz.is_empty());
    }

    #[test]
    fn slb_only_without_channel() {
        let c = cfg(&GAUSS.replace("[channel]\nkind = \"additive_gaussian\"\nvar_v = 1.0\n", ""));
        assert!(c.channel.is_none());
        let t = run_bound_comparison(&c, false);
        assert!(!t.slb.is_empty() && t.sweep.is_empty() && t.errors.is_empty());
    }
}
