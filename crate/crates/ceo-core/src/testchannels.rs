//! Forward test channels `f_{U|Y}`, the composed kernel `f_{U|X}`, their
//! certificates and the per-agent rate `I(Y;U|X)`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models::{Interval, JointModel, LocationNoise, ObservationKind, ObservationSpec, RegularityClass};
use crate::numerics::quadrature::{integrate, integrate_piecewise, GaussLegendre, QuadratureResult};
use crate::numerics::special::{gaussian_entropy, normal_pdf, std_normal_cdf, std_normal_pdf, xlogx};
use crate::numerics::RngStream;

/// Absolute tolerance of the adaptive integrals in this module.
pub const KERNEL_TOLERANCE: f64 = 1e-12;
/// Source nodes used to average `h(U|x)` over `f_X` when it depends on `x`.
pub const SOURCE_AVERAGE_NODES: usize = 48;
/// Grid size for tabulated median and endpoint maps.
pub const MAP_GRID: usize = 513;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestChannelKind {
    /// `U = Y + N(0, var_v)`; `var_v = ∞` is the limit where `U` ignores `Y`.
    AdditiveGaussian { var_v: f64 },
    /// `U = Y + unif[0, width_v]`.
    AdditiveUniform { width_v: f64 },
    /// `U = Y`.
    Identity,
}

/// Constants certifying membership of a channel in the good class of its
/// regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certificate {
    /// `k_u`: Lipschitz constant of `ℓ⁻¹`; `alpha_u`: `inf_x f_{U|x}(med(U|x))`.
    Regular { k_u: f64, alpha_u: f64 },
    /// `k_u`: Lipschitz constant of `ℓ⁻¹`; `delta_u`: floor on the endpoint densities.
    NonRegular { k_u: f64, delta_u: f64 },
}

impl Certificate {
    pub fn k_u(&self) -> f64 {
        match *self {
            Self::Regular { k_u, .. } | Self::NonRegular { k_u, .. } => k_u,
        }
    }

    fn validate(self) -> Result<Self> {
        let (k, floor) = match self {
            Self::Regular { k_u, alpha_u } => (k_u, alpha_u),
            Self::NonRegular { k_u, delta_u } => (k_u, delta_u),
        };
        if !(k > 0.0 && k.is_finite() && floor > 0.0 && floor.is_finite()) {
            return Err(Error::InvalidParameter { name: "certificate", reason: "constants must be positive and finite" });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestChannelSpec {
    pub kind: TestChannelKind,
    /// User-supplied constants; they take precedence over derived ones.
    pub supplied_certificate: Option<Certificate>,
}

impl TestChannelSpec {
    pub fn new(kind: TestChannelKind) -> Result<Self> {
        let ok = match kind {
            TestChannelKind::AdditiveGaussian { var_v } => var_v > 0.0,
            TestChannelKind::AdditiveUniform { width_v } => width_v > 0.0 && width_v.is_finite(),
            TestChannelKind::Identity => true,
        };
        if !ok {
            return Err(Error::InvalidParameter { name: "channel", reason: "channel parameter must be positive" });
        }
        Ok(Self { kind, supplied_certificate: None })
    }

    pub fn identity() -> Self {
        Self { kind: TestChannelKind::Identity, supplied_certificate: None }
    }

    pub fn with_certificate(mut self, certificate: Certificate) -> Result<Self> {
        self.supplied_certificate = Some(certificate.validate()?);
        Ok(self)
    }

    /// `U` carries no information about `Y`.
    pub fn is_independent(&self) -> bool {
        matches!(self.kind, TestChannelKind::AdditiveGaussian { var_v } if var_v.is_infinite())
    }

    /// Additive noise law, `None` for the identity channel.
    pub fn noise(&self) -> Option<LocationNoise> {
        match self.kind {
            TestChannelKind::AdditiveGaussian { var_v } => Some(LocationNoise::Gaussian { var: var_v }),
            TestChannelKind::AdditiveUniform { width_v } => Some(LocationNoise::Uniform { width: width_v }),
            TestChannelKind::Identity => None,
        }
    }

    /// Draws `U_i ~ f_{U|Y}(· | Y_i)` for each observation.
    pub fn sample_codeword_surrogates(&self, observations: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        let mut out = observations.to_vec();
        self.apply_in_place(&mut out, rng)?;
        Ok(out)
    }

    /// Replaces each observation with its codeword surrogate.
    pub fn apply_in_place(&self, values: &mut [f64], rng: &mut RngStream) -> Result<()> {
        if self.is_independent() {
            return Err(Error::InvalidParameter { name: "var_v", reason: "an infinite-variance channel cannot be sampled" });
        }
        if let Some(noise) = self.noise() {
            for v in values.iter_mut() {
                *v += noise.sample(rng);
            }
        }
        Ok(())
    }
}

/// Per-agent and aggregate rate of a symmetric scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateAccount {
    /// `I(Y;U|X)` in nats per agent.
    pub i_yu_given_x: f64,
    pub agents: usize,
    /// `L · I(Y;U|X)`.
    pub r_sum: f64,
    /// Per-agent rate `r_sum / L`.
    pub r_ind: f64,
}

impl RateAccount {
    pub fn new(i_yu_given_x: f64, agents: usize) -> Result<Self> {
        if !(i_yu_given_x >= 0.0 && i_yu_given_x.is_finite()) {
            return Err(Error::InvalidParameter { name: "i_yu_given_x", reason: "rate must be finite and nonnegative" });
        }
        if agents == 0 {
            return Err(Error::InvalidParameter { name: "L", reason: "need at least one agent" });
        }
        Ok(Self { i_yu_given_x, agents, r_sum: agents as f64 * i_yu_given_x, r_ind: i_yu_given_x })
    }
}

/// The decoder-side map `ℓ⁻¹` from codeword statistics back to the source.
#[derive(Debug, Clone, PartialEq)]
pub enum InverseMap {
    /// `x = slope · u + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// Piecewise-linear interpolation through increasing `(u, x)` knots,
    /// extended linearly past both ends.
    Tabulated { u: Vec<f64>, x: Vec<f64> },
}

impl InverseMap {
    pub const IDENTITY: InverseMap = InverseMap::Affine { slope: 1.0, intercept: 0.0 };

    pub fn apply(&self, u: f64) -> f64 {
        match self {
            Self::Affine { slope, intercept } => slope * u + intercept,
            Self::Tabulated { u: us, x: xs } => {
                let n = us.len();
                let i = us.partition_point(|&k| k < u).clamp(1, n - 1);
                let t = (u - us[i - 1]) / (us[i] - us[i - 1]);
                xs[i - 1] + t * (xs[i] - xs[i - 1])
            }
        }
    }

    /// Lipschitz constant on the represented range.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Affine { slope, .. } => slope.abs(),
            Self::Tabulated { u, x } => u
                .windows(2)
                .zip(x.windows(2))
                .map(|(du, dx)| ((dx[1] - dx[0]) / (du[1] - du[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Inverts an increasing map tabulated on `grid`.
    pub fn from_forward_map<F: Fn(f64) -> f64>(grid: &[f64], forward: F) -> Result<Self> {
        let u: Vec<f64> = grid.iter().map(|&x| forward(x)).collect();
        if u.len() < 2 || u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::RegularityMismatch("identifying map is not strictly increasing on the grid"));
        }
        Ok(Self::Tabulated { u, x: grid.to_vec() })
    }
}

/// `f_{U|X}` for a model/channel pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedKernel {
    pub observation: ObservationSpec,
    pub channel: Option<LocationNoise>,
}

impl ComposedKernel {
    pub fn new(model: &JointModel, channel: &TestChannelSpec) -> Result<Self> {
        if channel.is_independent() {
            return Err(Error::NotComposable("an infinite-variance channel has no conditional density"));
        }
        Ok(Self { observation: model.observation, channel: channel.noise() })
    }

    /// True when `f_{U|x}(u) = f_W(u - x)` for a fixed law `W`.
    pub fn is_location(&self) -> bool {
        self.observation.location_noise().is_some()
    }

    pub fn support(&self, x: f64) -> Interval {
        let s = self.observation.conditional_support(x);
        match self.channel {
            None => s,
            Some(LocationNoise::Uniform { width }) => Interval::new(s.lo, s.hi + width),
            Some(_) => Interval::REAL_LINE,
        }
    }

    pub fn quadrature_support(&self, x: f64) -> Interval {
        let s = self.observation.quadrature_support(x).range;
        match self.channel {
            None => s,
            Some(noise) => {
                let n = noise.quadrature_support().range;
                Interval::new(s.lo + n.lo, s.hi + n.hi)
            }
        }
    }

    /// Abscissae where the density may have kinks or jumps, including the
    /// quadrature range ends, sorted.
    pub fn breakpoints(&self, x: f64) -> Vec<f64> {
        let range = self.quadrature_support(x);
        let s = self.observation.conditional_support(x);
        let mut pts = alloc::vec![range.lo, range.hi];
        if s.is_bounded() {
            match self.channel {
                None => pts.extend([s.lo, s.hi]),
                Some(LocationNoise::Uniform { width }) => pts.extend([s.lo, s.hi, s.lo + width, s.hi + width]),
                Some(_) => {}
            }
        }
        pts.retain(|p| p.is_finite() && *p >= range.lo && *p <= range.hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn density(&self, u: f64, x: f64) -> f64 {
        let obs = &self.observation;
        match (obs.kind(), self.channel) {
            (_, None) => obs.density(u, x),
            (_, Some(LocationNoise::Uniform { width })) => (obs.cdf(u, x) - obs.cdf(u - width, x)).max(0.0) / width,
            (ObservationKind::AdditiveGaussian { noise_var }, Some(LocationNoise::Gaussian { var })) => {
                normal_pdf(u, x, noise_var + var)
            }
            (ObservationKind::AdditiveUniform { width }, Some(LocationNoise::Gaussian { var })) => {
                let sd = var.sqrt();
                (std_normal_cdf((u - x) / sd) - std_normal_cdf((u - x - width) / sd)) / width
            }
            (_, Some(noise)) => self.convolve(u, x, noise, false),
        }
    }

    pub fn cdf(&self, u: f64, x: f64) -> f64 {
        let obs = &self.observation;
        match (obs.kind(), self.channel) {
            (_, None) => obs.cdf(u, x),
            (ObservationKind::AdditiveGaussian { noise_var }, Some(LocationNoise::Gaussian { var })) => {
                std_normal_cdf((u - x) / (noise_var + var).sqrt())
            }
            (ObservationKind::AdditiveUniform { width }, Some(LocationNoise::Gaussian { var })) => {
                // (1/w) ∫_0^w Φ((u - x - s)/σ) ds via the antiderivative tΦ(t) + φ(t)
                let sd = var.sqrt();
                let g = |t: f64| t * std_normal_cdf(t) + std_normal_pdf(t);
                sd / width * (g((u - x) / sd) - g((u - x - width) / sd))
            }
            (_, Some(noise)) => self.convolve(u, x, noise, true),
        }
    }

    /// `∫ f_{Y|x}(y) k(u - y) dy` with `k` the noise density, or its CDF
    /// when `cumulative` is set.
    fn convolve(&self, u: f64, x: f64, noise: LocationNoise, cumulative: bool) -> f64 {
        let ys = self.observation.quadrature_support(x).range;
        let ns = noise.quadrature_support().range;
        let k = |z: f64| if cumulative { noise.cdf(z) } else { noise.density(z) };
        let lo = ys.lo.max(u - ns.hi);
        let hi = ys.hi.min(u - ns.lo);
        let mut total = if lo < hi {
            integrate(|y| self.observation.density(y, x) * k(u - y), lo, hi, KERNEL_TOLERANCE).value
        } else {
            0.0
        };
        if cumulative && lo > ys.lo {
            // y below u - ns.hi: the noise CDF is one there
            total += self.observation.cdf(lo, x) - self.observation.cdf(ys.lo, x);
        }
        total
    }

    /// `med(U | x)`.
    pub fn median(&self, x: f64) -> f64 {
        match (self.observation.location_noise(), self.channel) {
            (Some(obs), Some(ch)) => x + obs.median() + ch.median(),
            (_, None) => self.observation.median(x),
            _ => {
                let s = self.quadrature_support(x);
                let (mut lo, mut hi) = (s.lo, s.hi);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid, x) < 0.5 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// `h(U | X = x)` in nats.
    pub fn entropy(&self, x: f64) -> Result<f64> {
        match (self.observation.location_noise(), self.channel) {
            (Some(obs), None) => Ok(obs.entropy()),
            (Some(LocationNoise::Gaussian { var: a }), Some(LocationNoise::Gaussian { var: b })) => {
                Ok(gaussian_entropy(a + b))
            }
            (Some(LocationNoise::Uniform { width: a }), Some(LocationNoise::Uniform { width: b })) => {
                Ok(trapezoid_entropy(a, b))
            }
            _ => self.entropy_quadrature(x).map(|r| r.value),
        }
    }

    /// `-∫ f log f` by adaptive quadrature between breakpoints.
    pub fn entropy_quadrature(&self, x: f64) -> Result<QuadratureResult> {
        let pts = self.breakpoints(x);
        let r = integrate_piecewise(|u| -xlogx(self.density(u, x)), &pts, 1e-11);
        checked(r, 1e-11)
    }

    /// Fisher information of `f_{U|x}` in the location `x`.
    pub fn fisher_information(&self, x: f64) -> Result<f64> {
        if !self.observation.regularity_class().is_regular() {
            return Err(Error::FisherUndefined);
        }
        match (self.observation.kind(), self.channel) {
            (_, None) => self.observation.fisher_information(x),
            (ObservationKind::AdditiveGaussian { noise_var }, Some(LocationNoise::Gaussian { var })) => {
                Ok(1.0 / (noise_var + var))
            }
            _ => Ok(self.fisher_information_quadrature(x)),
        }
    }

    /// `∫ (∂_x f)² / f du` with a central difference in `x` and 401-node
    /// Gauss–Legendre quadrature.
    pub fn fisher_information_quadrature(&self, x: f64) -> f64 {
        let s = self.quadrature_support(x);
        let h = 1e-5 * (s.width() / 16.0).max(1e-3);
        let gl = GaussLegendre::new(401);
        gl.mapped(s.lo, s.hi)
            .map(|(u, w)| {
                let f = self.density(u, x);
                if f < 1e-300 {
                    return 0.0;
                }
                let d = (self.density(u, x + h) - self.density(u, x - h)) / (2.0 * h);
                w * d * d / f
            })
            .sum()
    }

    /// `(a(x), b(x))`, the ends of the conditional support.
    pub fn endpoints(&self, x: f64) -> Result<(f64, f64)> {
        let s = self.support(x);
        if !s.is_bounded() {
            return Err(Error::RegularityMismatch("unbounded conditional support has no endpoints"));
        }
        Ok((s.lo, s.hi))
    }

    /// One-sided limits of `f_{U|x}` at `a(x)` and `b(x)`.
    pub fn endpoint_densities(&self, x: f64) -> Result<(f64, f64)> {
        self.endpoints(x)?;
        match self.channel {
            None => self.observation.endpoint_densities(x),
            // the cdf difference vanishes at both ends of a sum with a uniform
            _ => Ok((0.0, 0.0)),
        }
    }
}

/// Entropy of the sum of independent `unif[0,a]` and `unif[0,b]` draws.
pub fn trapezoid_entropy(a: f64, b: f64) -> f64 {
    let (small, large) = if a <= b { (a, b) } else { (b, a) };
    large.ln() + small / (2.0 * large)
}

fn checked(r: QuadratureResult, tolerance: f64) -> Result<QuadratureResult> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::QuadratureNonConvergence { value: r.value, residual: r.residual_estimate, tolerance })
    }
}

/// `I(Y;U|X) = E_X[h(U|X)] - h(V)` for additive channels, in nats.
pub fn conditional_mutual_information(model: &JointModel, channel: &TestChannelSpec) -> Result<f64> {
    if channel.is_independent() {
        return Ok(0.0);
    }
    let noise = channel.noise().ok_or(Error::UnboundedRate)?;
    let kernel = ComposedKernel::new(model, channel)?;
    if kernel.is_location() {
        return Ok(kernel.entropy(0.0)? - noise.entropy());
    }
    Ok(source_average(model, |x| kernel.entropy(x))? - noise.entropy())
}

/// Same quantity with every entropy evaluated by quadrature, returning the
/// accumulated residual estimate.
pub fn conditional_mutual_information_quadrature(
    model: &JointModel,
    channel: &TestChannelSpec,
) -> Result<QuadratureResult> {
    if channel.is_independent() {
        return Ok(QuadratureResult { value: 0.0, residual_estimate: 0.0, nodes_used: 0, converged: true });
    }
    let noise = channel.noise().ok_or(Error::UnboundedRate)?;
    let kernel = ComposedKernel::new(model, channel)?;
    let hv = {
        let s = noise.quadrature_support().range;
        let pts = [s.lo, s.hi];
        checked(integrate_piecewise(|z| -xlogx(noise.density(z)), &pts, 1e-12), 1e-12)?
    };
    let hu = if kernel.is_location() {
        kernel.entropy_quadrature(0.0)?
    } else {
        let mut residual = 0.0;
        let mut nodes = 0;
        let value = source_average(model, |x| {
            let r = kernel.entropy_quadrature(x)?;
            residual += r.residual_estimate;
            nodes += r.nodes_used;
            Ok(r.value)
        })?;
        QuadratureResult { value, residual_estimate: residual, nodes_used: nodes, converged: true }
    };
    Ok(QuadratureResult {
        value: hu.value - hv.value,
        residual_estimate: hu.residual_estimate + hv.residual_estimate,
        nodes_used: hu.nodes_used + hv.nodes_used,
        converged: true,
    })
}

/// `E_X[φ(X)]` by Gauss–Legendre over the truncated source support.
pub fn source_average<F: FnMut(f64) -> Result<f64>>(model: &JointModel, mut phi: F) -> Result<f64> {
    let range = model.source.quadrature_support().range;
    let gl = GaussLegendre::new(SOURCE_AVERAGE_NODES);
    let mut acc = 0.0;
    for (x, w) in gl.mapped(range.lo, range.hi) {
        acc += w * model.source.density(x) * phi(x)?;
    }
    Ok(acc)
}

/// Grid over the truncated source support used for tabulated maps.
pub fn source_grid(model: &JointModel, points: usize) -> Vec<f64> {
    let r = model.source.quadrature_support().range;
    let (lo, hi) = match model.observation.kind() {
        // keep clear of the degenerate corner x = 0
        ObservationKind::UniformScale | ObservationKind::ClaytonCopula { .. } => {
            (r.lo.max(1e-6 * r.width()), r.hi - if r.hi == 1.0 { 1e-6 } else { 0.0 })
        }
        _ => (r.lo, r.hi),
    };
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Derived certificate constants, or the supplied ones when present.
pub fn regularity_certificate(channel: &TestChannelSpec, model: &JointModel) -> Result<Certificate> {
    if let Some(c) = channel.supplied_certificate {
        return Ok(c);
    }
    let kernel = ComposedKernel::new(model, channel)?;
    match model.regularity_class() {
        RegularityClass::Regular => {
            if !kernel.is_location() {
                return Err(Error::CertificateUnavailable("no derived constants for this pair; supply K_U and alpha_U"));
            }
            let m = kernel.median(0.0);
            Ok(Certificate::Regular { k_u: 1.0, alpha_u: kernel.density(m, 0.0) })
        }
        RegularityClass::NonRegular | RegularityClass::PartiallyNonRegular => {
            if kernel.channel.is_some() {
                return Err(Error::CertificateUnavailable(
                    "composed endpoint density is not bounded away from zero; supply K_U and delta_U",
                ));
            }
            let grid = source_grid(model, MAP_GRID);
            let delta_u = grid
                .iter()
                .map(|&x| kernel.endpoint_densities(x).map(|(a, b)| a.min(b)))
                .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d)))?;
            let k_u = inverse_map(model, channel)?.lipschitz();
            Certificate::NonRegular { k_u, delta_u }.validate()
        }
    }
}

/// `ℓ⁻¹`: inverse of the median map for regular pairs and of the endpoint
/// midpoint map `(a(x) + b(x))/2` for non-regular ones.
pub fn inverse_map(model: &JointModel, channel: &TestChannelSpec) -> Result<InverseMap> {
    let kernel = ComposedKernel::new(model, channel)?;
    let regular = model.regularity_class().is_regular();
    if kernel.is_location() {
        let offset = if regular {
            kernel.median(0.0)
        } else {
            let (a, b) = kernel.endpoints(0.0)?;
            0.5 * (a + b)
        };
        return Ok(InverseMap::Affine { slope: 1.0, intercept: -offset });
    }
    if regular {
        return InverseMap::from_forward_map(&source_grid(model, MAP_GRID), |x| kernel.median(x));
    }
    // the endpoint maps of the shipped non-regular kernels are affine in x
    let (a0, b0) = kernel.endpoints(0.0)?;
    let (a1, b1) = kernel.endpoints(1.0)?;
    let (m0, m1) = (0.5 * (a0 + b0), 0.5 * (a1 + b1));
    let slope = m1 - m0;
    if slope <= 0.0 {
        return Err(Error::RegularityMismatch("endpoint midpoint map is not increasing"));
    }
    Ok(InverseMap::Affine { slope: 1.0 / slope, intercept: -m0 / slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SourceSpec;
    use core::f64::consts::PI;

    fn gauss_model(noise_var: f64) -> JointModel {
        JointModel::new(
            SourceSpec::gaussian(0.0, 1.0).unwrap(),
            ObservationSpec::new(ObservationKind::AdditiveGaussian { noise_var }).unwrap(),
        )
        .unwrap()
    }

    fn unif_model(width: f64) -> JointModel {
        JointModel::new(
            SourceSpec::uniform(0.0, 1.0).unwrap(),
            ObservationSpec::new(ObservationKind::AdditiveUniform { width }).unwrap(),
        )
        .unwrap()
    }

    fn gaussian_channel(var_v: f64) -> TestChannelSpec {
        TestChannelSpec::new(TestChannelKind::AdditiveGaussian { var_v }).unwrap()
    }

    fn uniform_channel(width_v: f64) -> TestChannelSpec {
        TestChannelSpec::new(TestChannelKind::AdditiveUniform { width_v }).unwrap()
    }

    #[test]
    fn identity_surrogates_are_unchanged() {
        let ys = [0.3, -1.0, 2.5];
        let us = TestChannelSpec::identity().sample_codeword_surrogates(&ys, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(us, ys);
    }

    #[test]
    fn gaussian_surrogate_variance_adds() {
        let model = gauss_model(1.0);
        let ch = gaussian_channel(3.0);
        let mut rng = RngStream::new(9, 1);
        let ys = model.sample_observations(0.7, 200_000, &mut rng).unwrap();
        let us = ch.sample_codeword_surrogates(&ys, &mut rng).unwrap();
        let n = us.len() as f64;
        let mean = us.iter().sum::<f64>() / n;
        let var = us.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / (n - 1.0);
        assert!((var / 4.0 - 1.0).abs() < 0.02, "{var}");
        assert!((mean - 0.7).abs() < 4.0 * (4.0 / n).sqrt());
    }

    #[test]
    fn uniform_on_uniform_is_triangular() {
        let model = unif_model(1.0);
        let ch = uniform_channel(1.0);
        let kernel = ComposedKernel::new(&model, &ch).unwrap();
        let x = 0.25;
        let mut rng = RngStream::new(4, 4);
        let ys = model.sample_observations(x, 400_000, &mut rng).unwrap();
        let us = ch.sample_codeword_surrogates(&ys, &mut rng).unwrap();
        assert!(us.iter().all(|&u| (x..=x + 2.0).contains(&u)));
        // histogram against the direct convolution ∫ 1[y∈[x,x+1]] 1[u-y∈[0,1]] dy
        let bins = 20;
        let mut counts = alloc::vec![0usize; bins];
        for &u in &us {
            counts[(((u - x) / 2.0) * bins as f64).min(bins as f64 - 1.0) as usize] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let (lo, hi) = (x + 2.0 * i as f64 / bins as f64, x + 2.0 * (i + 1) as f64 / bins as f64);
            let conv = |u: f64| (u.min(x + 1.0) - (u - 1.0).max(x)).max(0.0);
            let p = integrate(conv, lo, hi, 1e-13).value;
            assert!((kernel.density(0.5 * (lo + hi), x) - conv(0.5 * (lo + hi))).abs() < 1e-12);
            let expect = p * us.len() as f64;
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt(), "bin {i}: {c} vs {expect}");
        }
    }

    #[test]
    fn gaussian_rate_closed_form() {
        let i = conditional_mutual_information(&gauss_model(1.0), &gaussian_channel(3.0)).unwrap();
        assert!((i - 0.5 * (4.0_f64 / 3.0).ln()).abs() < 1e-12);
        assert!((i - 0.14384).abs() < 1e-5);
        let q = conditional_mutual_information_quadrature(&gauss_model(1.0), &gaussian_channel(3.0)).unwrap();
        assert!((q.value - i).abs() < 1e-6, "{}", q.value);
    }

    #[test]
    fn independent_channel_has_zero_rate() {
        let ch = gaussian_channel(f64::INFINITY);
        assert_eq!(conditional_mutual_information(&gauss_model(1.0), &ch).unwrap(), 0.0);
        assert!(ch.sample_codeword_surrogates(&[1.0], &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn identity_rate_is_unbounded() {
        assert_eq!(
            conditional_mutual_information(&gauss_model(1.0), &TestChannelSpec::identity()),
            Err(Error::UnboundedRate)
        );
    }

    #[test]
    fn uniform_widths_rate_matches_double_quadrature() {
        let model = unif_model(1.0);
        let ch = uniform_channel(1.0);
        let i = conditional_mutual_information(&model, &ch).unwrap();
        // I(Y;U|X=x) = ∫∫ f(y|x) f(u|y) log(f(u|y)/f(u|x)) du dy, location invariant in x
        let kernel = ComposedKernel::new(&model, &ch).unwrap();
        let x = 0.4;
        let inner = |y: f64| {
            integrate(|u| {
                let fu = kernel.density(u, x);
                if fu > 0.0 { (1.0 / fu).ln() } else { 0.0 }
            }, y, y + 1.0, 1e-12)
            .value
        };
        let brute = integrate(inner, x, x + 1.0, 1e-10).value;
        assert!((i - brute).abs() < 1e-4, "{i} vs {brute}");
        assert!((i - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_entropy_matches_quadrature() {
        for &(a, b) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)] {
            let model = unif_model(a);
            let kernel = ComposedKernel::new(&model, &uniform_channel(b)).unwrap();
            let q = kernel.entropy_quadrature(0.0).unwrap().value;
            assert!((q - trapezoid_entropy(a, b)).abs() < 1e-9, "({a},{b})");
        }
    }

    #[test]
    fn mixed_kernels_integrate_to_one_and_agree_with_cdf() {
        let u01 = SourceSpec::uniform(0.0, 1.0).unwrap();
        let models = [
            JointModel::new(u01, ObservationSpec::new(ObservationKind::UniformScale).unwrap()).unwrap(),
            JointModel::new(u01, ObservationSpec::new(ObservationKind::ClaytonCopula { theta: 2.0 }).unwrap()).unwrap(),
            unif_model(1.0),
            JointModel::new(
                SourceSpec::gaussian(0.0, 1.0).unwrap(),
                ObservationSpec::new(ObservationKind::AdditiveLogistic { scale: 0.5 }).unwrap(),
            )
            .unwrap(),
        ];
        for m in &models {
            for ch in [gaussian_channel(0.05), uniform_channel(0.3)] {
                let k = ComposedKernel::new(m, &ch).unwrap();
                let x = 0.6;
                let pts = k.breakpoints(x);
                let mass = integrate_piecewise(|u| k.density(u, x), &pts, 1e-11).value;
                assert!((mass - 1.0).abs() < 1e-7, "{m:?} {ch:?}: {mass}");
                let mid = k.median(x);
                assert!((k.cdf(mid, x) - 0.5).abs() < 1e-8);
                let partial = integrate_piecewise(
                    |u| k.density(u, x),
                    &pts.iter().copied().filter(|&p| p < mid).chain([mid]).collect::<Vec<_>>(),
                    1e-11,
                )
                .value;
                assert!((partial - 0.5).abs() < 1e-7, "{m:?} {ch:?}: {partial}");
            }
        }
    }

    #[test]
    fn gaussian_certificate() {
        let c = regularity_certificate(&gaussian_channel(1.0), &gauss_model(1.0)).unwrap();
        match c {
            Certificate::Regular { k_u, alpha_u } => {
                assert_eq!(k_u, 1.0);
                assert!((alpha_u - (4.0 * PI).powf(-0.5)).abs() < 1e-12);
                assert!((alpha_u - 0.28209).abs() < 1e-5);
            }
            _ => panic!("wrong regime"),
        }
        let c = regularity_certificate(&TestChannelSpec::identity(), &gauss_model(2.0)).unwrap();
        assert_eq!(c, Certificate::Regular { k_u: 1.0, alpha_u: (2.0 * PI * 2.0).powf(-0.5) });
    }

    #[test]
    fn uniform_identity_certificate_uses_midpoint_map() {
        let model = unif_model(1.0);
        let ch = TestChannelSpec::identity();
        let c = regularity_certificate(&ch, &model).unwrap();
        // ℓ(x) = (a(x) + b(x))/2 = x + 1/2, so ℓ⁻¹ has slope one
        assert_eq!(c, Certificate::NonRegular { k_u: 1.0, delta_u: 1.0 });
        let inv = inverse_map(&model, &ch).unwrap();
        assert!((inv.apply(0.8) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn uniform_scale_certificate() {
        let model =
            JointModel::new(SourceSpec::uniform(0.0, 1.0).unwrap(), ObservationSpec::new(ObservationKind::UniformScale).unwrap())
                .unwrap();
        let c = regularity_certificate(&TestChannelSpec::identity(), &model).unwrap();
        match c {
            Certificate::NonRegular { k_u, delta_u } => {
                assert!((k_u - 2.0).abs() < 1e-12);
                assert!((delta_u - 1.0).abs() < 1e-5);
            }
            _ => panic!("wrong regime"),
        }
    }

    #[test]
    fn unknown_pairs_need_supplied_constants() {
        let model = unif_model(1.0);
        let ch = uniform_channel(1.0);
        assert!(matches!(regularity_certificate(&ch, &model), Err(Error::CertificateUnavailable(_))));
        let supplied = ch.with_certificate(Certificate::NonRegular { k_u: 1.0, delta_u: 0.5 }).unwrap();
        assert_eq!(
            regularity_certificate(&supplied, &model).unwrap(),
            Certificate::NonRegular { k_u: 1.0, delta_u: 0.5 }
        );
        assert!(ch.with_certificate(Certificate::Regular { k_u: 1.0, alpha_u: 0.0 }).is_err());
    }

    #[test]
    fn clayton_inverse_median_map_roundtrips() {
        let model = JointModel::new(
            SourceSpec::uniform(0.0, 1.0).unwrap(),
            ObservationSpec::new(ObservationKind::ClaytonCopula { theta: 2.0 }).unwrap(),
        )
        .unwrap();
        let ch = TestChannelSpec::identity();
        let inv = inverse_map(&model, &ch).unwrap();
        for &x in &[0.1, 0.5, 0.9] {
            assert!((inv.apply(model.conditional_median(x)) - x).abs() < 1e-4);
        }
        assert!(matches!(regularity_certificate(&ch, &model), Err(Error::CertificateUnavailable(_))));
    }

    #[test]
    fn composed_fisher_information() {
        let k = ComposedKernel::new(&gauss_model(1.0), &gaussian_channel(3.0)).unwrap();
        assert_eq!(k.fisher_information(0.0).unwrap(), 0.25);
        assert!((k.fisher_information_quadrature(0.0) - 0.25).abs() < 1e-6);
        // Gaussian plus uniform noise is less informative than the Gaussian alone
        let k = ComposedKernel::new(&gauss_model(1.0), &uniform_channel(1.0)).unwrap();
        let i = k.fisher_information(0.0).unwrap();
        assert!(i > 0.0 && i < 1.0);
        let k = ComposedKernel::new(&unif_model(1.0), &TestChannelSpec::identity()).unwrap();
        assert_eq!(k.fisher_information(0.3), Err(Error::FisherUndefined));
    }

    #[test]
    fn markov_chain_holds_empirically() {
        // within narrow Y bins, X and U are uncorrelated
        let model = gauss_model(1.0);
        let ch = gaussian_channel(1.0);
        let mut rng = RngStream::new(21, 0);
        let n = 200_000;
        let mut triples = Vec::with_capacity(n);
        for _ in 0..n {
            let x = model.sample_source(&mut rng);
            let y = model.sample_observations(x, 1, &mut rng).unwrap()[0];
            let u = ch.sample_codeword_surrogates(&[y], &mut rng).unwrap()[0];
            triples.push((x, y, u));
        }
        let mut pooled = 0.0;
        let mut weight = 0.0;
        for b in -10..10 {
            let (lo, hi) = (f64::from(b) * 0.1, f64::from(b + 1) * 0.1);
            let cell: Vec<_> = triples.iter().filter(|t| t.1 >= lo && t.1 < hi).collect();
            let m = cell.len() as f64;
            let mx = cell.iter().map(|t| t.0).sum::<f64>() / m;
            let mu = cell.iter().map(|t| t.2).sum::<f64>() / m;
            let sxu: f64 = cell.iter().map(|t| (t.0 - mx) * (t.2 - mu)).sum();
            let sxx: f64 = cell.iter().map(|t| (t.0 - mx).powi(2)).sum();
            let suu: f64 = cell.iter().map(|t| (t.2 - mu).powi(2)).sum();
            pooled += m * sxu / (sxx * suu).sqrt();
            weight += m;
        }
        let corr = pooled / weight;
        assert!(corr.abs() < 4.0 / weight.sqrt(), "{corr}");
    }

    #[test]
    fn rate_account_identities() {
        let a = RateAccount::new(0.125, 9).unwrap();
        assert_eq!(a.r_sum, 9.0 * a.r_ind);
        assert_eq!(a.r_ind, 0.125);
        assert!(RateAccount::new(-1.0, 3).is_err());
        assert!(RateAccount::new(1.0, 0).is_err());
    }

    #[test]
    fn tabulated_inverse_interpolates() {
        let grid: Vec<f64> = (0..11).map(|i| f64::from(i) / 10.0).collect();
        let inv = InverseMap::from_forward_map(&grid, |x| 3.0 * x + 1.0).unwrap();
        assert!((inv.apply(2.5) - 0.5).abs() < 1e-12);
        assert!((inv.apply(5.0) - 4.0 / 3.0).abs() < 1e-12);
        assert!((inv.lipschitz() - 1.0 / 3.0).abs() < 1e-12);
        assert!(InverseMap::from_forward_map(&grid, |x| -x).is_err());
    }
}
