//! Built-in oracle checks for the order-statistic lemmas and the bound
//! machinery.

use ceo_core::bounds::{chernoff_information, clarke_barron_mi, czz_lower_bound, shannon_lower_bound, uniform_location_p_min};
use ceo_core::estimators::{
    estimate_in_place, gaussian_abs_central_moment, median_abs_moment_bound, midrange_mse_uniform, EstimatorRule,
    EstimatorSpec,
};
use ceo_core::numerics::rng::{trial_stream_id, RngStream};
use ceo_core::numerics::special::{gaussian_entropy, normal_pdf, std_normal_cdf, INV_SQRT_2PI};
use ceo_core::numerics::stats::{ks_statistic, mean};
use ceo_core::testchannels::InverseMap;
use rayon::prelude::*;
use serde::Serialize;

const SEED: u64 = 0x00c0_ffee;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn abs(name: &'static str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: (value - target).abs() <= tolerance,
            value,
            target,
            tolerance,
            detail: format!("|{value:.6e} - {target:.6e}| <= {tolerance:e}"),
        }
    }

    fn rel(name: &'static str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: (value / target - 1.0).abs() <= tolerance,
            value,
            target,
            tolerance,
            detail: format!("{value:.6} within {:.1}% of {target:.6}", 100.0 * tolerance),
        }
    }

    fn below(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, passed: value < limit, value, target: limit, tolerance: 0.0, detail: format!("{value:.5} < {limit}") }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Trial counts for the Monte-Carlo checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub ks_trials: usize,
    pub moment_trials: usize,
}

impl Scale {
    pub const FULL: Self = Self { ks_trials: 100_000, moment_trials: 60_000 };
    pub const QUICK: Self = Self { ks_trials: 10_000, moment_trials: 10_000 };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parent {
    Uniform,
    Gaussian,
}

impl Parent {
    fn draw(self, rng: &mut RngStream) -> f64 {
        match self {
            Self::Uniform => rng.uniform(),
            Self::Gaussian => rng.standard_normal(),
        }
    }

    fn median(self) -> f64 {
        match self {
            Self::Uniform => 0.5,
            Self::Gaussian => 0.0,
        }
    }

    fn density_at_median(self) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::Gaussian => INV_SQRT_2PI,
        }
    }
}

/// Sample medians of `agents` draws, one per trial, in trial order.
pub fn sample_medians(parent: Parent, agents: usize, trials: usize, stream: u64) -> Vec<f64> {
    let spec = EstimatorSpec::point(EstimatorRule::Median, InverseMap::IDENTITY).expect("median rule");
    (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; agents],
            |buf, t| {
                let mut rng = RngStream::new(SEED, trial_stream_id(stream, t as u64));
                buf.iter_mut().for_each(|v| *v = parent.draw(&mut rng));
                estimate_in_place(&spec, buf).expect("odd agent count").value()
            },
        )
        .collect()
}

/// KS distance between standardized sample medians and `N(0, 1)`.
pub fn median_normality(parent: Parent, agents: usize, trials: usize) -> Check {
    let f = parent.density_at_median();
    let sd = (1.0 / (4.0 * agents as f64 * f * f)).sqrt();
    let mut z: Vec<f64> =
        sample_medians(parent, agents, trials, 1 + parent as u64).iter().map(|m| (m - parent.median()) / sd).collect();
    z.sort_by(f64::total_cmp);
    let name = match parent {
        Parent::Uniform => "median_normality_uniform",
        Parent::Gaussian => "median_normality_gaussian",
    };
    Check::below(name, ks_statistic(&z, std_normal_cdf), 0.02)
}

/// `L · E[(median - 1/2)²]` for `unif[0, 1]` against `1/(4 f²) = 1/4`.
pub fn median_second_moment(agents: usize, trials: usize) -> Check {
    let m = sample_medians(Parent::Uniform, agents, trials, 3);
    let scaled = agents as f64 * mean(&m.iter().map(|v| (v - 0.5) * (v - 0.5)).collect::<Vec<_>>());
    Check::rel("median_second_moment", scaled, 0.25, 0.03)
}

/// `E|median - med|^r` against the large-`L` Gaussian value.
pub fn median_moment_bound(agents: usize, trials: usize, r: f64) -> Check {
    let m = sample_medians(Parent::Gaussian, agents, trials, 4);
    let emp = mean(&m.iter().map(|v| v.abs().powf(r)).collect::<Vec<_>>());
    let bound = median_abs_moment_bound(agents, r, INV_SQRT_2PI).expect("valid arguments");
    Check::rel("median_abs_moment", emp, bound, 0.05)
}

pub fn gaussian_moment(trials: usize) -> Check {
    let mut rng = RngStream::new(SEED, 5);
    let emp = mean(&(0..trials).map(|_| (3.0 * rng.standard_normal()).abs().powi(3)).collect::<Vec<_>>());
    Check::rel("gaussian_abs_moment", emp, gaussian_abs_central_moment(9.0, 3.0), 0.03)
}

pub fn midrange_law(agents: usize, trials: usize) -> Check {
    let spec = EstimatorSpec::point(EstimatorRule::Midrange, InverseMap::IDENTITY).expect("midrange rule");
    let errs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; agents],
            |buf, t| {
                let mut rng = RngStream::new(SEED, trial_stream_id(6, t as u64));
                buf.iter_mut().for_each(|v| *v = rng.uniform());
                let e = estimate_in_place(&spec, buf).expect("nonempty").value() - 0.5;
                e * e
            },
        )
        .collect();
    Check::rel("midrange_mse", mean(&errs), midrange_mse_uniform(agents, 0.0, 1.0), 0.05)
}

pub fn chernoff_gaussian_pair() -> Check {
    let c = chernoff_information(|u| normal_pdf(u, 0.0, 1.0), |u| normal_pdf(u, 1.0, 1.0), &[-12.0, 13.0]);
    Check::abs("chernoff_gaussian_pair", c.map_or(f64::NAN, |c| c.value), 0.125, 1e-6)
}

fn unit_density(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

pub fn czz_without_observations(r: f64) -> Check {
    let target = if r == 1.0 { 0.125 } else { 1.0 / 24.0 };
    let name = if r == 1.0 { "czz_no_observation_r1" } else { "czz_no_observation_r2" };
    let v = czz_lower_bound(unit_density, r, |_, _| 0.5).map_or(f64::NAN, |b| b.value);
    Check::abs(name, v, target, 1e-6)
}

/// Brute-force `P_min` against the closed form on a grid of separations.
pub fn p_min_oracle(agents: usize) -> Check {
    let worst = (1..=19)
        .map(|k| {
            let h = 0.05 * f64::from(k);
            (crate::harness::p_min_brute_force(h, 1.0, agents) - uniform_location_p_min(h, 1.0, agents)).abs()
        })
        .fold(0.0, f64::max);
    Check::abs("p_min_brute_force", worst, 0.0, 1e-12)
}

/// `(a + b)^r <= 2^r (a^r + b^r)` on random triples.
pub fn power_sum_inequality(triples: usize) -> Check {
    let mut rng = RngStream::new(SEED, 8);
    let violations = (0..triples)
        .filter(|_| {
            let (a, b) = (1e3 * rng.uniform(), 1e3 * rng.uniform());
            let r = f64::from(1 + (rng.uniform() * 6.0) as u32 % 6);
            (a + b).powf(r) > 2f64.powf(r) * (a.powf(r) + b.powf(r))
        })
        .count();
    Check::abs("power_sum_inequality", violations as f64, 0.0, 0.0)
}

/// Largest gap between the Shannon lower bound and `½ log(σ²/D)` for a
/// Gaussian source under squared error.
pub fn slb_gaussian(var: f64) -> Check {
    let h = gaussian_entropy(var);
    let worst = (0..=60)
        .map(|k| var * 10f64.powf(-0.05 * f64::from(k)))
        .map(|d| (shannon_lower_bound(h, 2.0, d).unwrap_or(f64::NAN) - 0.5 * (var / d).ln()).abs())
        .fold(0.0, f64::max);
    Check::abs("slb_gaussian_identity", worst, 0.0, 1e-9)
}

/// Clarke–Barron against the exact `½ log(1 + L σ_X²/σ²)` for a Gaussian prior
/// and Gaussian likelihood of variance `σ²`.
pub fn clarke_barron_gaussian(agents: usize) -> Check {
    let (var_x, var_n): (f64, f64) = (1.0, 0.5);
    let approx = clarke_barron_mi(gaussian_entropy(var_x), (1.0 / var_n).ln(), agents).unwrap_or(f64::NAN);
    let exact = 0.5 * (1.0 + agents as f64 * var_x / var_n).ln();
    Check::abs("clarke_barron_gaussian", approx, exact, 0.01)
}

pub fn run_suite(scale: Scale) -> Vec<Check> {
    vec![
        median_normality(Parent::Uniform, 1001, scale.ks_trials),
        median_normality(Parent::Gaussian, 1001, scale.ks_trials),
        median_second_moment(2001, scale.moment_trials),
        median_moment_bound(1001, scale.moment_trials, 3.0),
        gaussian_moment(scale.moment_trials * 4),
        midrange_law(101, scale.moment_trials),
        chernoff_gaussian_pair(),
        czz_without_observations(1.0),
        czz_without_observations(2.0),
        p_min_oracle(101),
        power_sum_inequality(10_000),
        slb_gaussian(2.0),
        clarke_barron_gaussian(10_000),
    ]
}
