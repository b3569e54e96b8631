//! Uniform scalar quantization of codewords and checks of its fineness.
//!
//! Cells are `(lo + kΔ, lo + (k+1)Δ]`, so a value on a cell boundary goes to
//! the lower cell. Values outside `[lo, hi]` land in the nearest edge cell and
//! are counted as clamped.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models::{Interval, JointModel, SourceSpec};
use crate::numerics::quadrature::{integrate_piecewise, GaussLegendre};
use crate::numerics::rng::{trial_stream_id, RngStream};
use crate::numerics::special::{gaussian_entropy, xlogx};
use crate::numerics::stats::{batch_means_ci, MeanCi, DEFAULT_BATCHES};
use crate::testchannels::{source_average, ComposedKernel, TestChannelSpec};

/// Minimum Monte-Carlo trials accepted by [`verify_fineness`].
pub const MIN_FINENESS_TRIALS: usize = 1000;
/// Offsets averaged by [`quantized_conditional_entropy`] for location kernels.
pub const CELL_OFFSETS: usize = 16;
/// Fraction of the conditional codeword deviation used as the default step.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    step: f64,
    lo: f64,
    cells: usize,
}

/// A quantized value and whether it was clamped into an edge cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantized {
    pub value: f64,
    pub index: usize,
    pub clamped: bool,
}

impl QuantizerSpec {
    /// Cells of width `step` starting at `lo` and covering `hi`.
    pub fn new(step: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter { name: "step", reason: "quantizer step must be positive" });
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter { name: "range", reason: "quantizer range needs lo < hi" });
        }
        let cells = ((hi - lo) / step).ceil().max(1.0);
        if cells > u32::MAX as f64 {
            return Err(Error::InvalidParameter { name: "step", reason: "too many quantizer cells" });
        }
        Ok(Self { step, lo, cells: cells as usize })
    }

    /// Range covering every codeword of the pair over the truncated source.
    pub fn for_codewords(model: &JointModel, channel: &TestChannelSpec, step: f64) -> Result<Self> {
        let kernel = ComposedKernel::new(model, channel)?;
        let src = model.source.quadrature_support().range;
        let (a, b) = (kernel.quadrature_support(src.lo), kernel.quadrature_support(src.hi));
        Self::new(step, a.lo.min(b.lo), a.hi.max(b.hi))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.cells as f64 * self.step
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Edge `k` for `k` in `0..=cells`.
    pub fn edge(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    pub fn midpoint(&self, index: usize) -> f64 {
        self.lo + (index as f64 + 0.5) * self.step
    }

    pub fn quantize(&self, u: f64) -> Quantized {
        let clamped = u < self.lo || u > self.hi();
        let raw = ((u - self.lo) / self.step).ceil() - 1.0;
        let index = if raw <= 0.0 || raw.is_nan() { 0 } else { (raw as usize).min(self.cells - 1) };
        Quantized { value: self.midpoint(index), index, clamped }
    }

    /// Quantizes in place and returns the number of clamped values.
    pub fn quantize_slice(&self, values: &mut [f64]) -> usize {
        values.iter_mut().fold(0, |clamped, v| {
            let q = self.quantize(*v);
            *v = q.value;
            clamped + usize::from(q.clamped)
        })
    }

    /// Cell probabilities under `cdf`, restricted to the cells meeting
    /// `window`; mass outside the window is assigned to the cells at its ends.
    /// Returns the first cell index and the probabilities.
    fn cell_masses<F: Fn(f64) -> f64>(&self, cdf: F, window: Interval) -> (usize, Vec<f64>) {
        let first = self.quantize(window.lo).index;
        let last = self.quantize(window.hi).index;
        let mut masses = Vec::with_capacity(last - first + 1);
        let mut prev = 0.0;
        for k in first..last {
            let f = cdf(self.edge(k + 1)).clamp(prev, 1.0);
            masses.push(f - prev);
            prev = f;
        }
        masses.push(1.0 - prev);
        (first, masses)
    }
}

/// Default step for a sweep topping out at `l_max` agents: `1e-2` of the
/// conditional codeword deviation, divided by `√l_max` for regular pairs and
/// by `l_max` otherwise, so that quantization error stays two orders below
/// the estimator error at every agent count in the sweep.
pub fn default_step(model: &JointModel, channel: &TestChannelSpec, l_max: usize) -> Result<f64> {
    let kernel = ComposedKernel::new(model, channel)?;
    let x = model.source.mean();
    let pts = kernel.breakpoints(x);
    let mean = integrate_piecewise(|u| u * kernel.density(u, x), &pts, 1e-12).value;
    let var = integrate_piecewise(|u| (u - mean) * (u - mean) * kernel.density(u, x), &pts, 1e-12).value;
    let l = l_max.max(1) as f64;
    let scale = if model.regularity_class().is_regular() { l.sqrt() } else { l };
    Ok(DEFAULT_STEP_FRACTION * var.sqrt() / scale)
}

/// `H(Ũ | X)` in nats: the entropy of the quantized codeword given the source,
/// averaged over `f_X`.
pub fn quantized_conditional_entropy(
    model: &JointModel,
    channel: &TestChannelSpec,
    spec: &QuantizerSpec,
) -> Result<f64> {
    let kernel = ComposedKernel::new(model, channel)?;
    let entropy_at = |x: f64| {
        let (_, masses) = spec.cell_masses(|u| kernel.cdf(u, x), kernel.quadrature_support(x));
        masses.iter().map(|&p| -xlogx(p)).sum::<f64>()
    };
    if kernel.is_location() {
        // shifting x by one cell shifts the cell masses, so average one cell of offsets
        let x0 = spec.midpoint(spec.cells() / 2);
        let total: f64 = (0..CELL_OFFSETS)
            .map(|i| entropy_at(x0 + spec.step() * (i as f64 + 0.5) / CELL_OFFSETS as f64))
            .sum();
        return Ok(total / CELL_OFFSETS as f64);
    }
    source_average(model, |x| Ok(entropy_at(x)))
}

/// A continuous mutual information, its discretized counterpart and their gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiGap {
    pub continuous: f64,
    pub discrete: f64,
    pub gap: f64,
    /// Change of the discrete value when the per-cell rule is halved.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinenessReport {
    /// `E|U_(m+1) - q(U_(m+1))|^j` for `j = 1..=2r` (every codeword when `L` is even).
    pub delta0: Vec<MeanCi>,
    /// `|med(Ũ) - q(U_(m+1))|`; identically zero for a monotone quantizer.
    pub median_gap: MeanCi,
    /// `|I(Y;U) - I(Ỹ;Ũ)|`, absent when `I(Y;U)` is infinite.
    pub delta1: Option<MiGap>,
    /// `|I(X;U) - I(X̃;Ũ)|`.
    pub delta2: MiGap,
    pub clamped: usize,
}

/// Monte-Carlo and quadrature checks that `spec` is fine enough for the
/// pair at `agents` agents and distortion order `r`.
pub fn verify_fineness(
    spec: &QuantizerSpec,
    model: &JointModel,
    channel: &TestChannelSpec,
    agents: usize,
    r: u32,
    trials: usize,
    seed: u64,
) -> Result<FinenessReport> {
    if trials < MIN_FINENESS_TRIALS {
        return Err(Error::OutOfRange { value: trials as f64, lo: MIN_FINENESS_TRIALS as f64, hi: f64::INFINITY });
    }
    if agents == 0 || r == 0 {
        return Err(Error::InvalidParameter { name: "L", reason: "need at least one agent and r >= 1" });
    }
    let orders = 2 * r as usize;
    let mut samples: Vec<Vec<f64>> = (0..orders).map(|_| Vec::with_capacity(trials)).collect();
    let mut gaps = Vec::with_capacity(trials);
    let mut clamped = 0;
    let mut buf = alloc::vec![0.0; agents];
    let odd = agents % 2 == 1;
    for t in 0..trials {
        let mut rng = RngStream::new(seed, trial_stream_id(0, t as u64));
        let x = model.sample_source(&mut rng);
        model.sample_observations_into(x, &mut buf, &mut rng);
        channel.apply_in_place(&mut buf, &mut rng)?;
        buf.sort_unstable_by(f64::total_cmp);
        let errors: Vec<f64> = if odd {
            let med = buf[agents / 2];
            alloc::vec![(med - spec.quantize(med).value).abs()]
        } else {
            buf.iter().map(|&u| (u - spec.quantize(u).value).abs()).collect()
        };
        for (j, s) in samples.iter_mut().enumerate() {
            let m = errors.iter().map(|e| e.powi(j as i32 + 1)).sum::<f64>() / errors.len() as f64;
            s.push(m);
        }
        if odd {
            let q_med = spec.quantize(buf[agents / 2]).value;
            clamped += spec.quantize_slice(&mut buf);
            gaps.push((buf[agents / 2] - q_med).abs());
        } else {
            clamped += spec.quantize_slice(&mut buf);
            gaps.push(0.0);
        }
    }
    let delta0 = samples.iter().map(|s| batch_means_ci(s, DEFAULT_BATCHES)).collect();
    let median_gap = batch_means_ci(&gaps, DEFAULT_BATCHES);
    let kernel = ComposedKernel::new(model, channel)?;
    let h_u = codeword_entropy(model, channel)?;

    let delta1 = match channel.noise() {
        Some(noise) => {
            let continuous = h_u - noise.entropy();
            let y_grid = observation_grid(model, spec.step())?;
            let discrete = |nodes| {
                discrete_mutual_information(
                    &y_grid,
                    |y| model.observation_marginal_density(y),
                    spec,
                    |u, y| noise.cdf(u - y),
                    |y| {
                        let s = noise.quadrature_support().range;
                        Interval::new(y + s.lo, y + s.hi)
                    },
                    nodes,
                )
            };
            Some(mi_gap(continuous, discrete(4), discrete(2)))
        }
        None => None,
    };

    let continuous = h_u - crate::testchannels::source_average(model, |x| kernel.entropy(x))?;
    let src = model.source.quadrature_support().range;
    let x_grid = QuantizerSpec::new(spec.step(), src.lo, src.hi)?;
    let discrete = |nodes| {
        discrete_mutual_information(
            &x_grid,
            |x| model.source.density(x),
            spec,
            |u, x| kernel.cdf(u, x),
            |x| kernel.quadrature_support(x),
            nodes,
        )
    };
    let delta2 = mi_gap(continuous, discrete(4), discrete(2));
    Ok(FinenessReport { delta0, median_gap, delta1, delta2, clamped })
}

fn mi_gap(continuous: f64, fine: f64, coarse: f64) -> MiGap {
    MiGap { continuous, discrete: fine, gap: (continuous - fine).abs(), residual: (fine - coarse).abs() }
}

fn observation_grid(model: &JointModel, step: f64) -> Result<QuantizerSpec> {
    let src = model.source.quadrature_support().range;
    let a = model.observation.quadrature_support(src.lo).range;
    let b = model.observation.quadrature_support(src.hi).range;
    QuantizerSpec::new(step, a.lo.min(b.lo), a.hi.max(b.hi))
}

/// Differential entropy `h(U)` of a single codeword.
pub fn codeword_entropy(model: &JointModel, channel: &TestChannelSpec) -> Result<f64> {
    let kernel = ComposedKernel::new(model, channel)?;
    if let (SourceSpec::Gaussian { var, .. }, Some(crate::models::LocationNoise::Gaussian { var: n })) =
        (model.source, model.observation.location_noise())
    {
        let v = match channel.noise() {
            None => 0.0,
            Some(crate::models::LocationNoise::Gaussian { var }) => var,
            Some(_) => f64::NAN,
        };
        if !v.is_nan() {
            return Ok(gaussian_entropy(var + n + v));
        }
    }
    let src = model.source.quadrature_support().range;
    let lo = kernel.quadrature_support(src.lo);
    let hi = kernel.quadrature_support(src.hi);
    let mut pts: Vec<f64> = kernel.breakpoints(src.lo);
    pts.extend(kernel.breakpoints(src.hi));
    pts.extend([lo.lo.min(hi.lo), lo.hi.max(hi.hi)]);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let gl = GaussLegendre::new(96);
    let kinks: Vec<f64> = if kernel.is_location() {
        kernel.breakpoints(0.0)
    } else {
        let w = match channel.noise() {
            Some(crate::models::LocationNoise::Uniform { width }) => width,
            _ => 0.0,
        };
        alloc::vec![0.0, w]
    };
    let marginal = |u: f64| {
        let mut inner = alloc::vec![src.lo, src.hi];
        inner.extend(kinks.iter().map(|k| u - k));
        inner.retain(|p| *p >= src.lo && *p <= src.hi);
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        inner
            .windows(2)
            .map(|w| gl.integrate(|x| model.source.density(x) * kernel.density(u, x), w[0], w[1]))
            .sum::<f64>()
    };
    let r = integrate_piecewise(|u| -xlogx(marginal(u)), &pts, 1e-9);
    Ok(r.value)
}

/// `I(A;B)` of the pmf induced on two quantizer grids by a density on `A`
/// and a conditional CDF of `B`, using `nodes` Gauss–Legendre points per
/// `A` cell. `window(a)` bounds the conditional support of `B`.
fn discrete_mutual_information<D, C, W>(
    a_grid: &QuantizerSpec,
    density: D,
    b_grid: &QuantizerSpec,
    cond_cdf: C,
    window: W,
    nodes: usize,
) -> f64
where
    D: Fn(f64) -> f64,
    C: Fn(f64, f64) -> f64,
    W: Fn(f64) -> Interval,
{
    let gl = GaussLegendre::new(nodes);
    let mut marginal_b = alloc::vec![0.0; b_grid.cells()];
    let mut total = 0.0;
    let mut conditional_entropy = 0.0;
    let mut row: Vec<f64> = Vec::new();
    for i in 0..a_grid.cells() {
        let (lo, hi) = (a_grid.edge(i), a_grid.edge(i + 1));
        let pieces: Vec<(f64, usize, Vec<f64>)> = gl
            .mapped(lo, hi)
            .filter_map(|(a, w)| {
                let weight = w * density(a);
                (weight > 0.0).then(|| {
                    let (first, masses) = b_grid.cell_masses(|b| cond_cdf(b, a), window(a));
                    (weight, first, masses)
                })
            })
            .collect();
        let p_i: f64 = pieces.iter().map(|p| p.0).sum();
        if p_i <= 0.0 {
            continue;
        }
        let row_first = pieces.iter().map(|p| p.1).min().unwrap_or(0);
        let row_last = pieces.iter().map(|p| p.1 + p.2.len()).max().unwrap_or(row_first);
        row.clear();
        row.resize(row_last - row_first, 0.0);
        for (weight, first, masses) in &pieces {
            for (k, &m) in masses.iter().enumerate() {
                row[first - row_first + k] += weight * m;
            }
        }
        total += p_i;
        let h_row: f64 = row.iter().map(|&p| -xlogx(p / p_i)).sum();
        conditional_entropy += p_i * h_row;
        for (k, &p) in row.iter().enumerate() {
            marginal_b[row_first + k] += p;
        }
    }
    let h_b: f64 = marginal_b.iter().map(|&p| -xlogx(p / total)).sum();
    h_b - conditional_entropy / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ObservationKind, ObservationSpec};
    use crate::testchannels::{conditional_mutual_information, TestChannelKind};

    fn q01() -> QuantizerSpec {
        QuantizerSpec::new(0.1, 0.0, 1.0).unwrap()
    }

    fn gauss_pair(var_v: f64) -> (JointModel, TestChannelSpec) {
        (
            JointModel::new(
                SourceSpec::gaussian(0.0, 1.0).unwrap(),
                ObservationSpec::new(ObservationKind::AdditiveGaussian { noise_var: 1.0 }).unwrap(),
            )
            .unwrap(),
            TestChannelSpec::new(TestChannelKind::AdditiveGaussian { var_v }).unwrap(),
        )
    }

    #[test]
    fn quantize_examples() {
        let q = q01();
        let a = q.quantize(0.234);
        assert!((a.value - 0.25).abs() < 1e-15 && !a.clamped);
        assert_eq!(q.quantize(a.value).value, a.value);
        let c = q.quantize(-5.0);
        assert!((c.value - 0.05).abs() < 1e-15 && c.clamped);
        let c = q.quantize(7.0);
        assert!((c.value - 0.95).abs() < 1e-15 && c.clamped);
        let mut v = [-5.0, 0.5, 2.0];
        assert_eq!(q.quantize_slice(&mut v), 2);
    }

    #[test]
    fn boundary_ties_go_down() {
        let q = QuantizerSpec::new(0.25, 0.0, 1.0).unwrap();
        assert_eq!(q.quantize(0.5).index, 1);
        assert_eq!(q.quantize(0.0).index, 0);
        assert!(!q.quantize(1.0).clamped);
    }

    #[test]
    fn rounding_error_is_half_a_step() {
        let q = QuantizerSpec::new(0.037, -2.0, 3.0).unwrap();
        for i in 0..10_000 {
            let u = -2.0 + 5.0 * f64::from(i) / 9999.0;
            assert!((q.quantize(u).value - u).abs() <= 0.5 * q.step() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(QuantizerSpec::new(0.0, 0.0, 1.0).is_err());
        assert!(QuantizerSpec::new(0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn fineness_gaussian() {
        let (model, ch) = gauss_pair(1.0);
        let spec = QuantizerSpec::for_codewords(&model, &ch, 0.01).unwrap();
        let rep = verify_fineness(&spec, &model, &ch, 11, 2, 2000, 5).unwrap();
        assert_eq!(rep.delta0.len(), 4);
        for (j, ci) in rep.delta0.iter().enumerate() {
            assert!(ci.mean <= (0.005_f64).powi(j as i32 + 1) * (1.0 + 1e-9));
        }
        assert_eq!(rep.median_gap.mean, 0.0);
        let d1 = rep.delta1.unwrap();
        assert!((d1.continuous - 0.5 * 3.0_f64.ln()).abs() < 1e-9);
        assert!(d1.gap < 1e-3, "{d1:?}");
        assert!(rep.delta2.gap < 1e-3, "{:?}", rep.delta2);
        // data processing: the discretized source cannot carry more information
        assert!(rep.delta2.discrete <= rep.delta2.continuous + 1e-6);
        assert_eq!(rep.clamped, 0);
    }

    #[test]
    fn delta0_is_quadratic_in_step() {
        let (model, ch) = gauss_pair(1.0);
        let d = |step: f64| {
            let spec = QuantizerSpec::for_codewords(&model, &ch, step).unwrap();
            verify_fineness(&spec, &model, &ch, 11, 1, 20_000, 8).unwrap().delta0[1].mean
        };
        let ratio = d(0.1) / d(0.05);
        assert!(ratio > 3.5, "{ratio}");
    }

    #[test]
    fn fineness_improves_with_step() {
        let (model, ch) = gauss_pair(1.0);
        let gaps: Vec<(f64, f64)> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&s| {
                let spec = QuantizerSpec::for_codewords(&model, &ch, s).unwrap();
                let rep = verify_fineness(&spec, &model, &ch, 11, 1, 1000, 1).unwrap();
                (rep.delta1.unwrap().gap, rep.delta2.gap)
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1), "{gaps:?}");
    }

    #[test]
    fn too_few_trials() {
        let (model, ch) = gauss_pair(1.0);
        assert!(verify_fineness(&q01(), &model, &ch, 3, 1, 10, 0).is_err());
    }

    #[test]
    fn quantized_entropy_of_identity_uniform_channel() {
        // U | x ~ unif[x, x+1]: an interior cell has mass Δ, so H ≈ log(1/Δ)
        let model = JointModel::new(
            SourceSpec::uniform(0.0, 1.0).unwrap(),
            ObservationSpec::new(ObservationKind::AdditiveUniform { width: 1.0 }).unwrap(),
        )
        .unwrap();
        let ch = TestChannelSpec::identity();
        let step = 1e-3;
        let spec = QuantizerSpec::for_codewords(&model, &ch, step).unwrap();
        let h = quantized_conditional_entropy(&model, &ch, &spec).unwrap();
        assert!((h - (1.0 / step).ln()).abs() < 2.0 * step, "{h}");
    }

    #[test]
    fn quantized_entropy_gaussian_matches_differential_entropy() {
        // H(Ũ|X) ≈ h(U|X) - log Δ for fine cells
        let (model, ch) = gauss_pair(3.0);
        let step = 0.01;
        let spec = QuantizerSpec::for_codewords(&model, &ch, step).unwrap();
        let h = quantized_conditional_entropy(&model, &ch, &spec).unwrap();
        assert!((h - (gaussian_entropy(4.0) - step.ln())).abs() < 1e-5);
        let _ = conditional_mutual_information(&model, &ch).unwrap();
    }

    #[test]
    fn default_step_scales_with_regime() {
        let (model, ch) = gauss_pair(3.0);
        let s = default_step(&model, &ch, 100).unwrap();
        assert!((s - 0.01 * 2.0 / 10.0).abs() < 1e-8);
        let unif = JointModel::new(
            SourceSpec::uniform(0.0, 1.0).unwrap(),
            ObservationSpec::new(ObservationKind::AdditiveUniform { width: 1.0 }).unwrap(),
        )
        .unwrap();
        let s = default_step(&unif, &TestChannelSpec::identity(), 100).unwrap();
        assert!((s - 0.01 * (1.0_f64 / 12.0).sqrt() / 100.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_codeword_entropy_matches_gaussian() {
        // route a Gaussian source with Gaussian channel through the numeric path via a
        // logistic-free comparison: uniform channel on Gaussian obs against direct convolution
        let model = JointModel::new(
            SourceSpec::uniform(0.0, 1.0).unwrap(),
            ObservationSpec::new(ObservationKind::AdditiveUniform { width: 1.0 }).unwrap(),
        )
        .unwrap();
        // U = X + N with X, N ~ unif[0,1]: triangular on [0,2], entropy 1/2
        let h = codeword_entropy(&model, &TestChannelSpec::identity()).unwrap();
        assert!((h - 0.5).abs() < 1e-7, "{h}");
    }
}
