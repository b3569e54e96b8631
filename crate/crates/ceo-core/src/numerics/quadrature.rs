//! Adaptive Gauss–Kronrod and fixed Gauss–Legendre quadrature.

use alloc::vec::Vec;
use num_traits::Float;

/// Maximum number of integrand evaluations for [`integrate`].
pub const NODE_CAP: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Nonnegative estimate of `|value - truth|`.
    pub residual_estimate: f64,
    pub nodes_used: usize,
    /// False when the node cap was hit before reaching the tolerance, or the
    /// integrand produced a non-finite value.
    pub converged: bool,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self { value: 0.0, residual_estimate: 0.0, nodes_used: 0, converged: true }
    }

    /// Sum of two results over adjacent intervals.
    pub fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            residual_estimate: self.residual_estimate + other.residual_estimate,
            nodes_used: self.nodes_used + other.nodes_used,
            converged: self.converged && other.converged,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (Panel, bool) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut finite = fc.is_finite();
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs_sum = (WGK[7] * fc).abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        finite &= f1.is_finite() && f2.is_finite();
        k += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = k * h;
    let floor = 50.0 * f64::EPSILON * abs_sum * h.abs();
    let err = ((k - g) * h).abs().max(floor);
    (Panel { a, b, value, err }, finite)
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Refinement stops once the summed Kronrod–Gauss discrepancy falls below
/// `tol` (absolute) or `NODE_CAP` evaluations have been spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadratureResult {
    if a == b {
        return QuadratureResult::zero();
    }
    let (first, mut finite) = kronrod15(&f, a, b);
    let mut panels: Vec<Panel> = alloc::vec![first];
    let mut nodes = 15;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let target = tol.max(4.0 * f64::EPSILON * total.abs());
        if total_err <= target || nodes + 30 > NODE_CAP || !finite {
            return QuadratureResult {
                value: total,
                residual_estimate: total_err,
                nodes_used: nodes,
                converged: finite && total_err <= target,
            };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p.err > best.1 { (i, p.err) } else { best });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        let (left, fl) = kronrod15(&f, p.a, mid);
        let (right, fr) = kronrod15(&f, mid, p.b);
        finite &= fl && fr;
        nodes += 30;
        panels.push(left);
        panels.push(right);
    }
}

/// [`integrate`] over consecutive segments `points[i]..points[i+1]`, used for
/// integrands with known kinks or jumps.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> QuadratureResult {
    let segments = points.len().saturating_sub(1).max(1) as f64;
    points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(&f, w[0], w[1], tol / segments))
        .fold(QuadratureResult::zero(), QuadratureResult::combine)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Fixed `n`-node Gauss–Legendre value with the residual estimated by node
/// doubling: the reported value is the `2n` rule, the residual `|Q_n - Q_2n|`.
pub fn gauss_legendre_doubling<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> QuadratureResult {
    let coarse = GaussLegendre::new(n).integrate(&f, a, b);
    let fine = GaussLegendre::new(2 * n).integrate(&f, a, b);
    QuadratureResult {
        value: fine,
        residual_estimate: (fine - coarse).abs(),
        nodes_used: 3 * n,
        converged: fine.is_finite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::std_normal_pdf;

    #[test]
    fn constant_and_polynomials() {
        let r = integrate(|_| 1.0, 0.0, 1.0, 1e-12);
        assert!((r.value - 1.0).abs() <= r.residual_estimate.max(1e-15));
        assert!(r.converged);
        let r = integrate(|x| x.powi(7), -1.0, 2.0, 1e-12);
        assert!((r.value - (256.0 - 1.0) / 8.0).abs() < 1e-10);
    }

    #[test]
    fn truncated_exponential_moment() {
        let r = integrate(|s: f64| s * (-s).exp(), 0.0, 60.0, 1e-12);
        assert!((r.value - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn normal_density_integrates_to_one() {
        let r = integrate(std_normal_pdf, -8.0, 8.0, 1e-12);
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn node_cap_flags_non_convergence() {
        let r = integrate(|x: f64| (1.0 / x).sin() / x, 1e-6, 1.0, 1e-14);
        assert!(!r.converged);
        assert!(r.nodes_used <= NODE_CAP);
    }

    #[test]
    fn nan_is_flagged() {
        let r = integrate(|x: f64| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, 1e-10);
        assert!(!r.converged);
    }

    #[test]
    fn piecewise_handles_jumps() {
        let r = integrate_piecewise(|x| if x < 0.3 { 2.0 } else { 1.0 }, &[0.0, 0.3, 1.0], 1e-12);
        assert!((r.value - 1.3).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        for n in [1, 2, 5, 64, 201, 256] {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            let deg = (2 * n - 1).min(40) as i32;
            let v = gl.integrate(|x| x.powi(deg) + 1.0, 0.0, 1.0);
            assert!((v - (1.0 / f64::from(deg + 1) + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn doubling_residual_does_not_grow_on_smooth_integrands() {
        let cases: [(fn(f64) -> f64, f64, f64); 3] = [
            (|x: f64| (-x * x).exp(), -3.0, 3.0),
            (|x: f64| x.powi(9) - x, 0.0, 2.0),
            (|x: f64| (3.0 * x).exp(), 0.0, 1.0),
        ];
        for (f, a, b) in cases {
            let mut last = f64::INFINITY;
            for n in [2, 4, 8, 16] {
                let r = gauss_legendre_doubling(f, a, b, n);
                assert!(r.residual_estimate <= last.max(1e-12), "n={n}");
                last = r.residual_estimate;
            }
        }
    }
}
