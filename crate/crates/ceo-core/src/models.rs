//! Source and observation models.
//!
//! A [`JointModel`] pairs a source density `f_X` with a common observation
//! kernel `f_{Y|X}`. Every family carries the analytic metadata the decoders
//! and bounds need: supports, conditional medians, Fisher information for the
//! regular families and endpoint densities for the non-regular ones.
//!
//! Unbounded supports are truncated for quadrature where the tail mass drops
//! below `1e-15`: `±8` standard deviations for Gaussian laws and `±36` scale
//! units for the logistic law.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, integrate_piecewise, GaussLegendre};
use crate::numerics::special::{
    gaussian_entropy, logistic_cdf, logistic_pdf, normal_pdf, std_normal_cdf, INV_SQRT_2PI,
};
use crate::numerics::RngStream;

/// Gaussian truncation half-width in standard deviations.
pub const GAUSSIAN_TRUNCATION_SDS: f64 = 8.0;
/// Logistic truncation half-width in scale units.
pub const LOGISTIC_TRUNCATION_SCALES: f64 = 36.0;
/// Gauss–Legendre nodes for numerically evaluated Fisher information.
pub const FISHER_QUADRATURE_NODES: usize = 201;

/// A real interval, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Integration range for a density together with the probability mass it
/// leaves out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSupport {
    pub range: Interval,
    pub tail_mass: f64,
}

fn gaussian_tail_mass() -> f64 {
    2.0 * std_normal_cdf(-GAUSSIAN_TRUNCATION_SDS)
}

fn logistic_tail_mass() -> f64 {
    2.0 * logistic_cdf(-LOGISTIC_TRUNCATION_SCALES, 1.0)
}

// ---------------------------------------------------------------------------
// Source

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Gaussian { mean: f64, var: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl SourceSpec {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0 && var.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidParameter { name: "source.var", reason: "gaussian variance must be positive" });
        }
        Ok(Self::Gaussian { mean, var })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter { name: "source.lo", reason: "uniform source needs lo < hi" });
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, var } => normal_pdf(x, mean, var),
            Self::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, var } => std_normal_cdf((x - mean) / var.sqrt()),
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    pub fn support(&self) -> Interval {
        match *self {
            Self::Gaussian { .. } => Interval::REAL_LINE,
            Self::Uniform { lo, hi } => Interval::new(lo, hi),
        }
    }

    pub fn quadrature_support(&self) -> TruncatedSupport {
        match *self {
            Self::Gaussian { mean, var } => {
                let h = GAUSSIAN_TRUNCATION_SDS * var.sqrt();
                TruncatedSupport { range: Interval::new(mean - h, mean + h), tail_mass: gaussian_tail_mass() }
            }
            Self::Uniform { lo, hi } => TruncatedSupport { range: Interval::new(lo, hi), tail_mass: 0.0 },
        }
    }

    /// Differential entropy in nats.
    pub fn differential_entropy(&self) -> f64 {
        match *self {
            Self::Gaussian { var, .. } => gaussian_entropy(var),
            Self::Uniform { lo, hi } => (hi - lo).ln(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gaussian { var, .. } => var,
            Self::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Self::Gaussian { mean, var } => mean + var.sqrt() * rng.standard_normal(),
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
        }
    }
}

// ---------------------------------------------------------------------------
// Observation kernel

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationKind {
    /// `Y = x + N(0, noise_var)`; `noise_var = 0` is the noiseless flag.
    AdditiveGaussian { noise_var: f64 },
    /// `Y = x + unif[0, width]`.
    AdditiveUniform { width: f64 },
    /// `Y = x + Logistic(0, scale)`; closed-form Fisher information `1/(3 s²)`.
    AdditiveLogistic { scale: f64 },
    /// `(X, Y)` joined by a Clayton copula with parameter `theta > 0`.
    ClaytonCopula { theta: f64 },
    /// `Y ~ unif[0, x]`.
    UniformScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityClass {
    /// Common conditional support, finite positive Fisher information.
    Regular,
    /// Conditional support moves with `x` and the density jumps at both ends.
    NonRegular,
    /// Only the upper endpoint moves with `x` (e.g. `Y ~ unif[0, x]`).
    PartiallyNonRegular,
}

impl RegularityClass {
    pub fn is_regular(self) -> bool {
        self == Self::Regular
    }
}

/// Additive noise law of a location family `f_{Y|x}(y) = f_N(y - x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocationNoise {
    Gaussian { var: f64 },
    Uniform { width: f64 },
    Logistic { scale: f64 },
}

impl LocationNoise {
    pub fn density(&self, z: f64) -> f64 {
        match *self {
            Self::Gaussian { var } => {
                if var == 0.0 {
                    0.0
                } else {
                    normal_pdf(z, 0.0, var)
                }
            }
            Self::Uniform { width } => {
                if (0.0..=width).contains(&z) {
                    1.0 / width
                } else {
                    0.0
                }
            }
            Self::Logistic { scale } => logistic_pdf(z, scale),
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            Self::Gaussian { var } => {
                if var == 0.0 {
                    if z >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    std_normal_cdf(z / var.sqrt())
                }
            }
            Self::Uniform { width } => (z / width).clamp(0.0, 1.0),
            Self::Logistic { scale } => logistic_cdf(z, scale),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Self::Gaussian { var } => var.sqrt() * std_normal_quantile(p),
            Self::Uniform { width } => p * width,
            Self::Logistic { scale } => scale * (p / (1.0 - p)).ln(),
        }
    }

    /// Median; every shipped noise law is symmetric about it.
    pub fn median(&self) -> f64 {
        match *self {
            Self::Gaussian { .. } | Self::Logistic { .. } => 0.0,
            Self::Uniform { width } => 0.5 * width,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gaussian { var } => var,
            Self::Uniform { width } => width * width / 12.0,
            Self::Logistic { scale } => scale * scale * PI * PI / 3.0,
        }
    }

    pub fn entropy(&self) -> f64 {
        match *self {
            Self::Gaussian { var } => gaussian_entropy(var),
            Self::Uniform { width } => width.ln(),
            Self::Logistic { scale } => scale.ln() + 2.0,
        }
    }

    /// Truncated support of the noise, relative to the location.
    pub fn quadrature_support(&self) -> TruncatedSupport {
        match *self {
            Self::Gaussian { var } => {
                let h = GAUSSIAN_TRUNCATION_SDS * var.sqrt();
                TruncatedSupport { range: Interval::new(-h, h), tail_mass: gaussian_tail_mass() }
            }
            Self::Uniform { width } => TruncatedSupport { range: Interval::new(0.0, width), tail_mass: 0.0 },
            Self::Logistic { scale } => {
                let h = LOGISTIC_TRUNCATION_SCALES * scale;
                TruncatedSupport { range: Interval::new(-h, h), tail_mass: logistic_tail_mass() }
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Self::Gaussian { var } => var.sqrt() * rng.standard_normal(),
            Self::Uniform { width } => width * rng.uniform(),
            Self::Logistic { scale } => {
                let p = rng.uniform_open();
                scale * (p / (1.0 - p)).ln()
            }
        }
    }
}

/// Standard normal quantile (Acklam's rational approximation refined by one
/// Halley step against the erfc-based CDF).
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    let plow = 0.024_25;
    let x = if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = std_normal_cdf(x) - p;
    let u = e / (INV_SQRT_2PI * (-0.5 * x * x).exp());
    x - u / (1.0 + 0.5 * x * u)
}

/// A validated observation kernel `f_{Y|X}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationSpec {
    kind: ObservationKind,
}

impl ObservationSpec {
    pub fn new(kind: ObservationKind) -> Result<Self> {
        let ok = match kind {
            ObservationKind::AdditiveGaussian { noise_var } => noise_var >= 0.0 && noise_var.is_finite(),
            ObservationKind::AdditiveUniform { width } => width > 0.0 && width.is_finite(),
            ObservationKind::AdditiveLogistic { scale } => scale > 0.0 && scale.is_finite(),
            ObservationKind::ClaytonCopula { theta } => theta > 0.0 && theta.is_finite(),
            ObservationKind::UniformScale => true,
        };
        if !ok {
            return Err(Error::InvalidParameter { name: "observation", reason: "family parameter out of range" });
        }
        Ok(Self { kind })
    }

    pub fn kind(&self) -> ObservationKind {
        self.kind
    }

    pub fn regularity_class(&self) -> RegularityClass {
        match self.kind {
            ObservationKind::AdditiveGaussian { .. }
            | ObservationKind::AdditiveLogistic { .. }
            | ObservationKind::ClaytonCopula { .. } => RegularityClass::Regular,
            ObservationKind::AdditiveUniform { .. } => RegularityClass::NonRegular,
            ObservationKind::UniformScale => RegularityClass::PartiallyNonRegular,
        }
    }

    /// The noise law when the kernel is a location family.
    pub fn location_noise(&self) -> Option<LocationNoise> {
        match self.kind {
            ObservationKind::AdditiveGaussian { noise_var } => Some(LocationNoise::Gaussian { var: noise_var }),
            ObservationKind::AdditiveUniform { width } => Some(LocationNoise::Uniform { width }),
            ObservationKind::AdditiveLogistic { scale } => Some(LocationNoise::Logistic { scale }),
            _ => None,
        }
    }

    pub fn conditional_support(&self, x: f64) -> Interval {
        match self.kind {
            ObservationKind::AdditiveGaussian { .. } | ObservationKind::AdditiveLogistic { .. } => {
                Interval::REAL_LINE
            }
            ObservationKind::AdditiveUniform { width } => Interval::new(x, x + width),
            ObservationKind::ClaytonCopula { .. } => Interval::new(0.0, 1.0),
            ObservationKind::UniformScale => Interval::new(0.0, x),
        }
    }

    pub fn quadrature_support(&self, x: f64) -> TruncatedSupport {
        match self.location_noise() {
            Some(noise) => {
                let t = noise.quadrature_support();
                TruncatedSupport { range: Interval::new(x + t.range.lo, x + t.range.hi), tail_mass: t.tail_mass }
            }
            None => TruncatedSupport { range: self.conditional_support(x), tail_mass: 0.0 },
        }
    }

    /// `f_{Y|X}(y | x)`; zero outside the conditional support.
    pub fn density(&self, y: f64, x: f64) -> f64 {
        if let Some(noise) = self.location_noise() {
            return noise.density(y - x);
        }
        match self.kind {
            ObservationKind::ClaytonCopula { theta } => clayton_density(theta, x, y),
            ObservationKind::UniformScale => {
                if x > 0.0 && (0.0..=x).contains(&y) {
                    1.0 / x
                } else {
                    0.0
                }
            }
            _ => unreachable!("location families handled above"),
        }
    }

    pub fn cdf(&self, y: f64, x: f64) -> f64 {
        if let Some(noise) = self.location_noise() {
            return noise.cdf(y - x);
        }
        match self.kind {
            ObservationKind::ClaytonCopula { theta } => clayton_conditional_cdf(theta, x, y),
            ObservationKind::UniformScale => {
                if x <= 0.0 {
                    1.0
                } else {
                    (y / x).clamp(0.0, 1.0)
                }
            }
            _ => unreachable!("location families handled above"),
        }
    }

    pub fn quantile(&self, p: f64, x: f64) -> f64 {
        if let Some(noise) = self.location_noise() {
            return x + noise.quantile(p);
        }
        match self.kind {
            ObservationKind::ClaytonCopula { theta } => clayton_conditional_quantile(theta, x, p),
            ObservationKind::UniformScale => p * x,
            _ => unreachable!("location families handled above"),
        }
    }

    /// `med(Y | x)`.
    pub fn median(&self, x: f64) -> f64 {
        match self.location_noise() {
            Some(noise) => x + noise.median(),
            None => self.quantile(0.5, x),
        }
    }

    pub fn conditional_mean(&self, x: f64) -> f64 {
        match self.kind {
            ObservationKind::AdditiveGaussian { .. } | ObservationKind::AdditiveLogistic { .. } => x,
            ObservationKind::AdditiveUniform { width } => x + 0.5 * width,
            ObservationKind::UniformScale => 0.5 * x,
            ObservationKind::ClaytonCopula { .. } => {
                integrate(|y| y * self.density(y, x), 0.0, 1.0, 1e-12).value
            }
        }
    }

    pub fn sample(&self, x: f64, rng: &mut RngStream) -> f64 {
        if let Some(noise) = self.location_noise() {
            return x + noise.sample(rng);
        }
        match self.kind {
            ObservationKind::ClaytonCopula { theta } => clayton_conditional_quantile(theta, x, rng.uniform_open()),
            ObservationKind::UniformScale => x * rng.uniform(),
            _ => unreachable!("location families handled above"),
        }
    }

    /// `∂/∂x log f_{Y|X}(y | x)` for the regular families.
    pub fn score(&self, y: f64, x: f64) -> Result<f64> {
        match self.kind {
            ObservationKind::AdditiveGaussian { noise_var } if noise_var > 0.0 => Ok((y - x) / noise_var),
            ObservationKind::AdditiveLogistic { scale } => Ok(((y - x) / (2.0 * scale)).tanh() / scale),
            ObservationKind::ClaytonCopula { theta } => {
                let s = x.powf(-theta) + y.powf(-theta) - 1.0;
                Ok(-(theta + 1.0) / x + (1.0 + 2.0 * theta) * x.powf(-theta - 1.0) / s)
            }
            ObservationKind::AdditiveGaussian { .. } => {
                Err(Error::InvalidParameter { name: "noise_var", reason: "noiseless observation has no score" })
            }
            _ => Err(Error::FisherUndefined),
        }
    }

    /// `I_Y(x)`: closed form where available, quadrature otherwise.
    pub fn fisher_information(&self, x: f64) -> Result<f64> {
        match self.kind {
            ObservationKind::AdditiveGaussian { noise_var } if noise_var > 0.0 => Ok(1.0 / noise_var),
            ObservationKind::AdditiveLogistic { scale } => Ok(1.0 / (3.0 * scale * scale)),
            _ => self.fisher_information_quadrature(x),
        }
    }

    /// `E_{Y|x}[score²]` by 201-node Gauss–Legendre quadrature over the
    /// truncated conditional support.
    pub fn fisher_information_quadrature(&self, x: f64) -> Result<f64> {
        if !self.regularity_class().is_regular() {
            return Err(Error::FisherUndefined);
        }
        // surface the noiseless error before integrating
        self.score(x, x)?;
        let range = self.quadrature_support(x).range;
        let gl = GaussLegendre::new(FISHER_QUADRATURE_NODES);
        let mut acc = 0.0;
        for (y, w) in gl.mapped(range.lo, range.hi) {
            let f = self.density(y, x);
            if f > 0.0 {
                let s = self.score(y, x)?;
                acc += w * s * s * f;
            }
        }
        Ok(acc)
    }

    /// Densities just inside the two conditional endpoints `(e_ℓ(x), e_u(x))`.
    pub fn endpoint_densities(&self, x: f64) -> Result<(f64, f64)> {
        match self.kind {
            ObservationKind::AdditiveUniform { width } => Ok((1.0 / width, 1.0 / width)),
            ObservationKind::UniformScale if x > 0.0 => Ok((1.0 / x, 1.0 / x)),
            ObservationKind::UniformScale => Err(Error::OutOfRange { value: x, lo: 0.0, hi: f64::INFINITY }),
            _ => Err(Error::RegularityMismatch("endpoint densities exist only for non-regular kernels")),
        }
    }
}

fn clayton_density(theta: f64, x: f64, y: f64) -> f64 {
    if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
        return 0.0;
    }
    let s = x.powf(-theta) + y.powf(-theta) - 1.0;
    // log-domain to stay finite near the corners
    let log_c = (1.0 + theta).ln() - (theta + 1.0) * (x.ln() + y.ln()) - (1.0 / theta + 2.0) * s.ln();
    log_c.exp()
}

fn clayton_conditional_cdf(theta: f64, x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let s = x.powf(-theta) + y.powf(-theta) - 1.0;
    (-(theta + 1.0) * x.ln() - (1.0 / theta + 1.0) * s.ln()).exp()
}

fn clayton_conditional_quantile(theta: f64, x: f64, p: f64) -> f64 {
    let t = (p.powf(-theta / (1.0 + theta)) - 1.0) * x.powf(-theta) + 1.0;
    t.powf(-1.0 / theta)
}

// ---------------------------------------------------------------------------
// Joint model

/// Which density [`JointModel::density`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Source,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointModel {
    pub source: SourceSpec,
    pub observation: ObservationSpec,
}

impl JointModel {
    pub fn new(source: SourceSpec, observation: ObservationSpec) -> Result<Self> {
        match (observation.kind(), source) {
            (ObservationKind::ClaytonCopula { .. }, SourceSpec::Uniform { lo, hi }) if lo == 0.0 && hi == 1.0 => {}
            (ObservationKind::ClaytonCopula { .. }, _) => {
                return Err(Error::NotComposable("the Clayton copula needs a unif[0,1] source"))
            }
            (ObservationKind::UniformScale, SourceSpec::Uniform { lo, .. }) if lo >= 0.0 => {}
            (ObservationKind::UniformScale, _) => {
                return Err(Error::NotComposable("unif[0, X] observations need a nonnegative uniform source"))
            }
            _ => {}
        }
        Ok(Self { source, observation })
    }

    /// `f_X(point)` or `f_{Y|X}(point | condition)`.
    pub fn density(&self, which: DensityKind, point: f64, condition: f64) -> f64 {
        match which {
            DensityKind::Source => self.source.density(point),
            DensityKind::Conditional => self.observation.density(point, condition),
        }
    }

    pub fn regularity_class(&self) -> RegularityClass {
        self.observation.regularity_class()
    }

    pub fn sample_source(&self, rng: &mut RngStream) -> f64 {
        self.source.sample(rng)
    }

    /// `L` conditionally i.i.d. draws from `f_{Y|x}`.
    pub fn sample_observations(&self, x: f64, agents: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        if agents == 0 {
            return Err(Error::InvalidParameter { name: "L", reason: "need at least one agent" });
        }
        let mut out = alloc::vec![0.0; agents];
        self.sample_observations_into(x, &mut out, rng);
        Ok(out)
    }

    /// Fills `out` with draws from `f_{Y|x}`.
    pub fn sample_observations_into(&self, x: f64, out: &mut [f64], rng: &mut RngStream) {
        for y in out.iter_mut() {
            *y = self.observation.sample(x, rng);
        }
    }

    pub fn conditional_median(&self, x: f64) -> f64 {
        self.observation.median(x)
    }

    pub fn fisher_information(&self, x: f64) -> Result<f64> {
        self.observation.fisher_information(x)
    }

    /// Strict monotonicity of the identifying map on `grid`: `med(Y|x)` for
    /// regular kernels, `e_ℓ(x) + e_u(x)` otherwise.
    pub fn identifiability_holds(&self, grid: &[f64]) -> bool {
        let map = |x: f64| {
            if self.regularity_class().is_regular() {
                self.conditional_median(x)
            } else {
                let s = self.observation.conditional_support(x);
                s.lo + s.hi
            }
        };
        let values: Vec<f64> = grid.iter().map(|&x| map(x)).collect();
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        up || down
    }

    /// Marginal density `f_Y(y) = ∫ f_X(x) f_{Y|X}(y|x) dx`.
    pub fn observation_marginal_density(&self, y: f64) -> f64 {
        match (self.source, self.observation.location_noise()) {
            (SourceSpec::Gaussian { mean, var }, Some(LocationNoise::Gaussian { var: nv })) => {
                normal_pdf(y, mean, var + nv)
            }
            (SourceSpec::Uniform { lo, hi }, Some(LocationNoise::Uniform { width })) => {
                // trapezoid: overlap length of [y - width, y] with [lo, hi]
                let overlap = (y.min(hi) - (y - width).max(lo)).max(0.0);
                overlap / ((hi - lo) * width)
            }
            (_, Some(noise)) => {
                // x ranges where y - x falls inside the noise support
                let src = self.source.quadrature_support().range;
                let ns = noise.quadrature_support().range;
                let lo = src.lo.max(y - ns.hi);
                let hi = src.hi.min(y - ns.lo);
                if lo >= hi {
                    return 0.0;
                }
                integrate(|x| self.source.density(x) * noise.density(y - x), lo, hi, 1e-13).value
            }
            (_, None) => {
                let src = self.source.quadrature_support().range;
                let mut pts = alloc::vec![src.lo, src.hi];
                if self.observation.kind() == ObservationKind::UniformScale && y > src.lo && y < src.hi {
                    pts.insert(1, y);
                }
                integrate_piecewise(|x| self.source.density(x) * self.observation.density(y, x), &pts, 1e-12).value
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    fn all_models() -> Vec<JointModel> {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        let u = SourceSpec::uniform(0.0, 1.0).unwrap();
        let obs = |k| ObservationSpec::new(k).unwrap();
        alloc::vec![
            JointModel::new(g, obs(ObservationKind::AdditiveGaussian { noise_var: 2.0 })).unwrap(),
            JointModel::new(u, obs(ObservationKind::AdditiveUniform { width: 1.0 })).unwrap(),
            JointModel::new(g, obs(ObservationKind::AdditiveLogistic { scale: 0.5 })).unwrap(),
            JointModel::new(u, obs(ObservationKind::ClaytonCopula { theta: 2.0 })).unwrap(),
            JointModel::new(u, obs(ObservationKind::UniformScale)).unwrap(),
        ]
    }

    #[test]
    fn density_examples() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        assert!((g.density(0.0) - 0.39894).abs() < 1e-5);
        let u = SourceSpec::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.density(0.5), 1.0);
        assert_eq!(u.density(1.5), 0.0);
        let m = JointModel::new(u, ObservationSpec::new(ObservationKind::AdditiveUniform { width: 1.0 }).unwrap())
            .unwrap();
        assert_eq!(m.density(DensityKind::Conditional, 1.7, 1.0), 1.0);
        assert_eq!(m.density(DensityKind::Conditional, 0.7, 1.0), 0.0);
    }

    #[test]
    fn every_density_integrates_to_one() {
        for m in all_models() {
            let s = m.source.quadrature_support();
            let r = integrate(|x| m.source.density(x), s.range.lo, s.range.hi, 1e-12);
            assert!((r.value + s.tail_mass - 1.0).abs() < 1e-8, "{m:?}");
            for &x in &[0.1, 0.35, 0.8] {
                let t = m.observation.quadrature_support(x);
                let r = integrate_piecewise(|y| m.observation.density(y, x), &[t.range.lo, x, t.range.hi], 1e-12);
                assert!((r.value + t.tail_mass - 1.0).abs() < 1e-8, "{m:?} at x={x}: {}", r.value);
            }
        }
    }

    #[test]
    fn source_entropies_match_closed_forms() {
        let g = SourceSpec::gaussian(3.0, 2.0).unwrap();
        assert!((g.differential_entropy() - 0.5 * (2.0 * PI * E * 2.0).ln()).abs() < 1e-12);
        let u = SourceSpec::uniform(-1.0, 3.0).unwrap();
        assert!((u.differential_entropy() - 4.0_f64.ln()).abs() < 1e-12);
        let s = g.quadrature_support();
        let h = integrate(|x| -crate::numerics::special::xlogx(g.density(x)), s.range.lo, s.range.hi, 1e-13);
        assert!((h.value - g.differential_entropy()).abs() < 1e-10);
    }

    #[test]
    fn constructors_validate() {
        assert!(SourceSpec::gaussian(0.0, 0.0).is_err());
        assert!(SourceSpec::uniform(1.0, 1.0).is_err());
        assert!(ObservationSpec::new(ObservationKind::ClaytonCopula { theta: -1.0 }).is_err());
        let clayton = ObservationSpec::new(ObservationKind::ClaytonCopula { theta: 1.0 }).unwrap();
        assert!(JointModel::new(SourceSpec::gaussian(0.0, 1.0).unwrap(), clayton).is_err());
    }

    #[test]
    fn conditional_median_examples() {
        let obs = |k| ObservationSpec::new(k).unwrap();
        assert_eq!(obs(ObservationKind::AdditiveGaussian { noise_var: 3.0 }).median(1.5), 1.5);
        assert_eq!(obs(ObservationKind::AdditiveUniform { width: 1.0 }).median(0.0), 0.5);
        let scale = obs(ObservationKind::UniformScale);
        assert!((scale.median(0.8) - 0.4).abs() < 1e-15);
        // CDF inversion oracle: bisection on the conditional CDF
        for m in all_models() {
            for &x in &[0.2, 0.6] {
                let t = m.observation.quadrature_support(x).range;
                let (mut lo, mut hi) = (t.lo, t.hi);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if m.observation.cdf(mid, x) < 0.5 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                assert!((m.conditional_median(x) - 0.5 * (lo + hi)).abs() < 1e-9, "{m:?}");
            }
        }
    }

    #[test]
    fn location_median_offset_is_constant() {
        for m in all_models().into_iter().filter(|m| m.observation.location_noise().is_some()) {
            let c = m.conditional_median(-3.0) + 3.0;
            for i in 0..100 {
                let x = -3.0 + 0.06 * f64::from(i);
                assert!((m.conditional_median(x) - x - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identifiability_on_grid() {
        let grid: Vec<f64> = (1..100).map(|i| f64::from(i) / 100.0).collect();
        for m in all_models() {
            assert!(m.identifiability_holds(&grid), "{m:?}");
        }
    }

    #[test]
    fn fisher_information_examples() {
        let obs = |k| ObservationSpec::new(k).unwrap();
        let g2 = obs(ObservationKind::AdditiveGaussian { noise_var: 2.0 });
        assert_eq!(g2.fisher_information(0.3).unwrap(), 0.5);
        assert_eq!(obs(ObservationKind::AdditiveGaussian { noise_var: 1.0 }).fisher_information(3.0).unwrap(), 1.0);
        assert!((g2.fisher_information_quadrature(0.3).unwrap() - 0.5).abs() < 1e-10);
        assert_eq!(
            obs(ObservationKind::AdditiveUniform { width: 1.0 }).fisher_information(0.3),
            Err(Error::FisherUndefined)
        );
        assert_eq!(obs(ObservationKind::UniformScale).fisher_information(0.3), Err(Error::FisherUndefined));
        assert!(obs(ObservationKind::AdditiveGaussian { noise_var: 0.0 }).fisher_information(0.0).is_err());
    }

    #[test]
    fn logistic_fisher_quadrature_matches_closed_form() {
        for &s in &[0.3, 1.0, 2.5] {
            let obs = ObservationSpec::new(ObservationKind::AdditiveLogistic { scale: s }).unwrap();
            let q = obs.fisher_information_quadrature(0.7).unwrap();
            assert!((q - 1.0 / (3.0 * s * s)).abs() < 1e-6, "s={s}: {q}");
        }
    }

    #[test]
    fn clayton_fisher_is_positive_finite() {
        let obs = ObservationSpec::new(ObservationKind::ClaytonCopula { theta: 2.0 }).unwrap();
        for &x in &[0.1, 0.5, 0.9] {
            let i = obs.fisher_information(x).unwrap();
            assert!(i > 0.0 && i.is_finite());
        }
    }

    #[test]
    fn non_regular_endpoints_are_positive() {
        let u = ObservationSpec::new(ObservationKind::AdditiveUniform { width: 2.0 }).unwrap();
        assert_eq!(u.endpoint_densities(0.3).unwrap(), (0.5, 0.5));
        let s = ObservationSpec::new(ObservationKind::UniformScale).unwrap();
        assert_eq!(s.regularity_class(), RegularityClass::PartiallyNonRegular);
        assert!(s.endpoint_densities(0.5).unwrap().1 > 0.0);
        let g = ObservationSpec::new(ObservationKind::AdditiveGaussian { noise_var: 1.0 }).unwrap();
        assert!(g.endpoint_densities(0.0).is_err());
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let z = std_normal_quantile(p);
            assert!((std_normal_cdf(z) - p).abs() < 1e-14 * p.max(1e-3) / 1e-3, "p={p}");
        }
    }

    #[test]
    fn marginal_observation_density_integrates_to_one() {
        for m in all_models() {
            let (lo, hi) = match m.source {
                SourceSpec::Gaussian { .. } => (-20.0, 20.0),
                SourceSpec::Uniform { .. } => (-0.5, 2.5),
            };
            let pts = [lo, 0.0, 1.0, 2.0, hi];
            let r = integrate_piecewise(|y| m.observation_marginal_density(y), &pts, 1e-10);
            assert!((r.value - 1.0).abs() < 1e-6, "{m:?}: {}", r.value);
        }
    }

    #[test]
    fn sampling_examples() {
        let g = SourceSpec::gaussian(0.0, 1.0).unwrap();
        let u = SourceSpec::uniform(0.0, 1.0).unwrap();
        let gauss = JointModel::new(g, ObservationSpec::new(ObservationKind::AdditiveGaussian { noise_var: 1.0 }).unwrap())
            .unwrap();
        let mut rng = RngStream::new(11, 0);
        let ys = gauss.sample_observations(0.0, 100_000, &mut rng).unwrap();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!(mean.abs() < 4.0 / (1e5_f64).sqrt());

        let scale = JointModel::new(u, ObservationSpec::new(ObservationKind::UniformScale).unwrap()).unwrap();
        let ys = scale.sample_observations(0.5, 10_000, &mut rng).unwrap();
        assert!(ys.iter().all(|&y| (0.0..=0.5).contains(&y)));

        let unif = JointModel::new(u, ObservationSpec::new(ObservationKind::AdditiveUniform { width: 1.0 }).unwrap())
            .unwrap();
        let ys = unif.sample_observations(0.3, 100_000, &mut rng).unwrap();
        let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // gaps are Exp(L) so exceed 1e-3 with probability e^{-100}
        assert!(min >= 0.3 && min - 0.3 < 1e-3);
        assert!(max <= 1.3 && 1.3 - max < 1e-3);

        assert!(gauss.sample_observations(0.0, 0, &mut rng).is_err());
    }

    #[test]
    fn clayton_sampling_matches_cdf() {
        let obs = ObservationSpec::new(ObservationKind::ClaytonCopula { theta: 1.5 }).unwrap();
        let mut rng = RngStream::new(3, 9);
        let x = 0.4;
        let mut ys: Vec<f64> = (0..20_000).map(|_| obs.sample(x, &mut rng)).collect();
        ys.sort_by(f64::total_cmp);
        let d = crate::numerics::stats::ks_statistic(&ys, |y| obs.cdf(y, x));
        assert!(d < 1.63 / (20_000_f64).sqrt(), "KS {d}");
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let m = all_models()[2];
        let a = m.sample_observations(0.1, 500, &mut RngStream::new(5, 77)).unwrap();
        let b = m.sample_observations(0.1, 500, &mut RngStream::new(5, 77)).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
