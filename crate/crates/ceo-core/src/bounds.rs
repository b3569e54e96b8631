//! Numerical evaluation of the achievability and converse bounds on the
//! distortion decay, together with the information measures they rest on.
//!
//! The regular-regime bounds scale as `R_sum^{-r/2}`, the non-regular ones as
//! `R_sum^{-r}`. Every value here is for a fixed test channel; the open
//! minimizations over channel classes are left to the caller's sweep.

use alloc::vec::Vec;
use core::f64::consts::{E, PI};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models::{JointModel, SourceSpec};
use crate::numerics::minimize::minimize_1d;
use crate::numerics::quadrature::{integrate_piecewise, GaussLegendre};
use crate::numerics::special::gamma;
use crate::testchannels::{
    conditional_mutual_information, source_average, Certificate, ComposedKernel, TestChannelSpec,
};

/// Interval width to which the Chernoff exponent is minimized over `s`.
pub const CHERNOFF_S_TOLERANCE: f64 = 1e-10;
/// Finite-difference steps for `g(x)`, coarsest first.
pub const G_STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// Gauss–Legendre nodes per dimension of the CZZ double integral.
pub const CZZ_NODES: usize = 256;
/// Relative residual above which a CZZ evaluation is rejected.
pub const CZZ_TOLERANCE: f64 = 1e-6;
/// Source nodes at which `g(x)` is evaluated for non-location kernels.
pub const G_SOURCE_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    ShannonLower,
    ClarkeBarron,
    MedianAchievability,
    RegularConverse,
    RegularConverseJensen,
    MidrangeAchievability,
    NonRegularConverse,
    ChazanZakaiZiv,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::ShannonLower => "slb",
            Self::ClarkeBarron => "clarke_barron",
            Self::MedianAchievability => "median_achievability",
            Self::RegularConverse => "regular_converse",
            Self::RegularConverseJensen => "regular_converse_jensen",
            Self::MidrangeAchievability => "midrange_achievability",
            Self::NonRegularConverse => "nonregular_converse",
            Self::ChazanZakaiZiv => "czz",
        }
    }

    pub fn is_achievability(self) -> bool {
        matches!(self, Self::MedianAchievability | Self::MidrangeAchievability)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub quadrature_residual: f64,
    pub inputs: Vec<(&'static str, f64)>,
}

impl BoundReport {
    fn exact(kind: BoundKind, value: f64, inputs: Vec<(&'static str, f64)>) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter { name: "bound", reason: "bound evaluated to a non-finite value" });
        }
        Ok(Self { kind, value, quadrature_residual: 0.0, inputs })
    }
}

fn check_order(r: f64, min: f64) -> Result<()> {
    if !(r >= min && r.is_finite()) {
        return Err(Error::OutOfRange { value: r, lo: min, hi: f64::INFINITY });
    }
    Ok(())
}

/// Shannon lower bound on the rate-distortion function of a scalar source
/// under `|x - x̂|^r`: `h - (1/r) log(r e D (2Γ(1 + 1/r))^r)`. Negative
/// values are vacuous.
pub fn shannon_lower_bound(h_source: f64, r: f64, distortion: f64) -> Result<f64> {
    check_order(r, 1.0)?;
    if !(distortion > 0.0) {
        return Err(Error::InvalidParameter { name: "D", reason: "distortion must be positive" });
    }
    Ok(h_source - (r * E * distortion * (2.0 * gamma(1.0 + 1.0 / r)).powf(r)).ln() / r)
}

/// Distortion at which [`shannon_lower_bound`] crosses zero.
pub fn slb_zero_crossing(h_source: f64, r: f64) -> f64 {
    (r * h_source).exp() / (r * E * (2.0 * gamma(1.0 + 1.0 / r)).powf(r))
}

/// Large-`L` mutual information between a scalar parameter and `L` i.i.d.
/// observations, `½ log(L/2πe) + h(X) + ½ E[log I(X)]`, with the `o(1)`
/// term dropped.
pub fn clarke_barron_mi(h_source: f64, mean_log_fisher: f64, agents: usize) -> Result<f64> {
    if agents < 2 {
        return Err(Error::InvalidParameter { name: "L", reason: "need at least two observations" });
    }
    Ok(0.5 * (agents as f64 / (2.0 * PI * E)).ln() + h_source + 0.5 * mean_log_fisher)
}

/// `C₁ = (1/(re)) (√(πe) / (√2 Γ(1 + 1/r)))^r`, the converse prefactor.
pub fn converse_coefficient(r: f64) -> Result<f64> {
    check_order(r, 2.0)?;
    Ok((PI * E).sqrt().powf(r) / (2.0_f64.sqrt() * gamma(1.0 + 1.0 / r)).powf(r) / (r * E))
}

/// `C₂ = 2^{-r/2} Γ((r+1)/2)/√π`, the median achievability prefactor.
pub fn achievability_coefficient(r: f64) -> Result<f64> {
    check_order(r, 2.0)?;
    Ok(0.5_f64.powf(0.5 * r) * gamma(0.5 * (r + 1.0)) / PI.sqrt())
}

/// `C₂ (K_U² I / α_U²)^{r/2}`: the sample-median achievability bound on
/// `lim R_sum^{r/2} D` for one regular test channel.
pub fn median_achievability(certificate: Certificate, r: f64, mi: f64) -> Result<BoundReport> {
    let Certificate::Regular { k_u, alpha_u } = certificate else {
        return Err(Error::RegularityMismatch("median achievability needs a regular certificate"));
    };
    let c2 = achievability_coefficient(r)?;
    let value = c2 * (k_u * k_u * mi / (alpha_u * alpha_u)).powf(0.5 * r);
    BoundReport::exact(
        BoundKind::MedianAchievability,
        value,
        alloc::vec![("r", r), ("mi", mi), ("k_u", k_u), ("alpha_u", alpha_u)],
    )
}

/// Both forms of the regular converse for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularConverse {
    /// `C₁ (I / e^{E log I_U(X)})^{r/2}`.
    pub exp_log: BoundReport,
    /// `C₁ (I / E[I_U(X)])^{r/2}`, never above `exp_log`.
    pub jensen: BoundReport,
}

/// Regular converse from a rate and the Fisher-information summaries of
/// `f_{U|X}`.
pub fn regular_converse_from_fisher(r: f64, mi: f64, mean_log_fisher: f64, mean_fisher: f64) -> Result<RegularConverse> {
    let c1 = converse_coefficient(r)?;
    let inputs = alloc::vec![("r", r), ("mi", mi), ("mean_log_fisher", mean_log_fisher), ("mean_fisher", mean_fisher)];
    Ok(RegularConverse {
        exp_log: BoundReport::exact(
            BoundKind::RegularConverse,
            c1 * (mi / mean_log_fisher.exp()).powf(0.5 * r),
            inputs.clone(),
        )?,
        jensen: BoundReport::exact(BoundKind::RegularConverseJensen, c1 * (mi / mean_fisher).powf(0.5 * r), inputs)?,
    })
}

pub fn regular_converse(model: &JointModel, channel: &TestChannelSpec, r: f64) -> Result<RegularConverse> {
    if !model.regularity_class().is_regular() {
        return Err(Error::RegularityMismatch("the regular converse needs a regular model"));
    }
    let kernel = ComposedKernel::new(model, channel)?;
    let mi = conditional_mutual_information(model, channel)?;
    let (mean_log, mean) = if kernel.is_location() {
        let i = kernel.fisher_information(model.source.mean())?;
        (i.ln(), i)
    } else {
        (
            source_average(model, |x| kernel.fisher_information(x).map(f64::ln))?,
            source_average(model, |x| kernel.fisher_information(x))?,
        )
    };
    regular_converse_from_fisher(r, mi, mean_log, mean)
}

/// `2 r! (K_U I / δ_U)^r`: the midrange achievability bound on
/// `lim R_sum^r D` for one non-regular test channel.
pub fn midrange_achievability(certificate: Certificate, r: f64, mi: f64) -> Result<BoundReport> {
    let Certificate::NonRegular { k_u, delta_u } = certificate else {
        return Err(Error::RegularityMismatch("midrange achievability needs a non-regular certificate"));
    };
    check_order(r, 1.0)?;
    if !(delta_u > 0.0) {
        return Err(Error::InvalidParameter { name: "delta_u", reason: "endpoint density floor must be positive" });
    }
    let value = 2.0 * gamma(r + 1.0) * (k_u * mi / delta_u).powf(r);
    BoundReport::exact(
        BoundKind::MidrangeAchievability,
        value,
        alloc::vec![("r", r), ("mi", mi), ("k_u", k_u), ("delta_u", delta_u)],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chernoff {
    /// `max_s -log ∫ f0^s f1^{1-s}`, in nats.
    pub value: f64,
    pub s_star: f64,
    pub converged: bool,
}

/// `a^s` with `0^0 = 1`.
fn pow0(a: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if a <= 0.0 {
        0.0
    } else {
        (s * a.ln()).exp()
    }
}

/// Chernoff information between two densities. `breakpoints` must bracket
/// the joint support and include every jump of either density.
pub fn chernoff_information<F0, F1>(f0: F0, f1: F1, breakpoints: &[f64]) -> Result<Chernoff>
where
    F0: Fn(f64) -> f64,
    F1: Fn(f64) -> f64,
{
    let mut converged = true;
    let objective = |s: f64| {
        let r = integrate_piecewise(|u| pow0(f0(u), s) * pow0(f1(u), 1.0 - s), breakpoints, 1e-13);
        r.value.ln()
    };
    let m = minimize_1d(objective, 0.0, 1.0, CHERNOFF_S_TOLERANCE);
    converged &= m.converged;
    if !m.value.is_finite() {
        return Err(Error::SupportCollapse(m.value));
    }
    Ok(Chernoff { value: (-m.value).max(0.0), s_star: m.x, converged })
}

/// `g(x)` with the Richardson residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEstimate {
    pub value: f64,
    pub residual: f64,
}

/// Right-derivative at `Δ = 0` of the Chernoff information between
/// `f_{U|x}` and `f_{U|x+Δ}`.
///
/// The difference quotients `C(Δ)/Δ` at the three [`G_STEPS`] are combined by
/// two Richardson levels. Shifts straddle `x` when both ends stay inside the
/// source support and are one-sided otherwise.
pub fn g_of_x(model: &JointModel, channel: &TestChannelSpec, x: f64) -> Result<GEstimate> {
    if model.regularity_class().is_regular() {
        return Err(Error::RegularityMismatch("g(x) is defined for non-regular models"));
    }
    let kernel = ComposedKernel::new(model, channel)?;
    let support = model.source.support();
    let quotient = |delta: f64| -> Result<f64> {
        let (a, b) = if support.contains(x - 0.5 * delta) && support.contains(x + 0.5 * delta) {
            (x - 0.5 * delta, x + 0.5 * delta)
        } else if support.contains(x + delta) {
            (x, x + delta)
        } else {
            (x - delta, x)
        };
        let mut pts = kernel.breakpoints(a);
        pts.extend(kernel.breakpoints(b));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let c = chernoff_information(|u| kernel.density(u, a), |u| kernel.density(u, b), &pts)?;
        let q = c.value / delta;
        if !q.is_finite() {
            return Err(Error::SupportCollapse(delta));
        }
        Ok(q)
    };
    let d: Vec<f64> = G_STEPS.iter().map(|&h| quotient(h)).collect::<Result<_>>()?;
    // D(Δ) = g + aΔ + bΔ² + ...; each level removes one power for step ratio 2
    let r1 = [2.0 * d[1] - d[0], 2.0 * d[2] - d[1]];
    let r2 = (4.0 * r1[1] - r1[0]) / 3.0;
    Ok(GEstimate { value: r2, residual: (r2 - r1[1]).abs() })
}

/// `(r/2^r) ∫₀¹ h̃^{r-1} ∫ f_X(x) I^r e^{-h̃ g(x)} dx dh̃` with `g` supplied.
pub fn nonregular_converse_from_g<G: Fn(f64) -> f64>(
    source: &SourceSpec,
    r: f64,
    mi: f64,
    g: G,
) -> Result<BoundReport> {
    check_order(r, 1.0)?;
    let range = source.quadrature_support().range;
    let gl = GaussLegendre::new(64);
    let xs: Vec<(f64, f64)> = gl.mapped(range.lo, range.hi).map(|(x, w)| (w * source.density(x), g(x))).collect();
    let value_with = |rule: &GaussLegendre| {
        rule.integrate(
            |h| h.powf(r - 1.0) * xs.iter().map(|&(w, gx)| w * (-h * gx).exp()).sum::<f64>(),
            0.0,
            1.0,
        )
    };
    let fine = value_with(&gl);
    let coarse = value_with(&GaussLegendre::new(32));
    let scale = r / 2.0_f64.powf(r) * mi.powf(r);
    Ok(BoundReport {
        kind: BoundKind::NonRegularConverse,
        value: scale * fine,
        quadrature_residual: scale * (fine - coarse).abs(),
        inputs: alloc::vec![("r", r), ("mi", mi)],
    })
}

/// The non-regular converse for one channel, with `g` computed from the
/// composed kernel.
pub fn nonregular_converse(model: &JointModel, channel: &TestChannelSpec, r: f64, mi: f64) -> Result<BoundReport> {
    let kernel = ComposedKernel::new(model, channel)?;
    let range = model.source.quadrature_support().range;
    if kernel.is_location() {
        let g = g_of_x(model, channel, range.midpoint())?;
        let mut report = nonregular_converse_from_g(&model.source, r, mi, |_| g.value)?;
        report.inputs.push(("g", g.value));
        return Ok(report);
    }
    let gl = GaussLegendre::new(G_SOURCE_NODES);
    let knots: Vec<(f64, f64)> =
        gl.mapped(range.lo, range.hi).map(|(x, _)| g_of_x(model, channel, x).map(|g| (x, g.value))).collect::<Result<_>>()?;
    let interpolate = |x: f64| {
        let i = knots.partition_point(|k| k.0 < x).clamp(1, knots.len() - 1);
        let (a, b) = (knots[i - 1], knots[i]);
        a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1)
    };
    nonregular_converse_from_g(&model.source, r, mi, interpolate)
}

/// Chazan–Zakai–Ziv lower bound on `E|X - X̂|^r` for `X` on `[0, 1]`:
/// `∫₀¹ r 2^{-r} h^{r-1} ∫₀^{1-h} ((f(x) + f(x+h))/2) P_min(x, x+h) dx dh`.
///
/// `p_min(x0, x1)` is the minimum error probability of the equal-prior test
/// between the two hypotheses. Nested Gauss–Legendre with [`CZZ_NODES`] nodes;
/// the reported value uses twice as many and the residual is their gap.
pub fn czz_lower_bound<F, P>(source_density: F, r: f64, p_min: P) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
    P: Fn(f64, f64) -> f64,
{
    czz_nested(r, |h, rule: &GaussLegendre| {
        rule.integrate(|x| 0.5 * (source_density(x) + source_density(x + h)) * p_min(x, x + h), 0.0, 1.0 - h)
    })
}

/// [`czz_lower_bound`] when `P_min` depends only on the separation `h`.
pub fn czz_lower_bound_shift_invariant<F, P>(source_density: F, r: f64, p_min: P) -> Result<BoundReport>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    czz_nested(r, |h, rule: &GaussLegendre| {
        p_min(h) * rule.integrate(|x| 0.5 * (source_density(x) + source_density(x + h)), 0.0, 1.0 - h)
    })
}

fn czz_nested<I: Fn(f64, &GaussLegendre) -> f64>(r: f64, inner: I) -> Result<BoundReport> {
    check_order(r, 1.0)?;
    let at = |n: usize| {
        let rule = GaussLegendre::new(n);
        rule.integrate(|h| r * 2.0_f64.powf(-r) * h.powf(r - 1.0) * inner(h, &rule), 0.0, 1.0)
    };
    let coarse = at(CZZ_NODES);
    let fine = at(2 * CZZ_NODES);
    let residual = (fine - coarse).abs();
    if !fine.is_finite() || residual > CZZ_TOLERANCE * fine.abs().max(1e-300) {
        return Err(Error::QuadratureNonConvergence { value: fine, residual, tolerance: CZZ_TOLERANCE });
    }
    Ok(BoundReport {
        kind: BoundKind::ChazanZakaiZiv,
        value: fine,
        quadrature_residual: residual,
        inputs: alloc::vec![("r", r)],
    })
}

/// Equal-prior error of testing `X = x` against `X = x + h` from `L` codewords
/// with `U | x ~ unif[x, x + w]`: `½ (1 - h/w)^L`.
pub fn uniform_location_p_min(h: f64, width: f64, agents: usize) -> f64 {
    0.5 * (1.0 - h / width).max(0.0).powi(agents as i32)
}
