//! Compensated accumulation and Monte-Carlo summaries.

use num_traits::Float;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated mean, accumulated in slice order.
pub fn mean(values: &[f64]) -> f64 {
    let mut s = CompensatedSum::new();
    s.extend(values.iter().copied());
    s.value() / values.len() as f64
}

/// Mean with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl MeanCi {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

pub const DEFAULT_BATCHES: usize = 16;

/// Two-sided 97.5% Student-t quantiles for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
    2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

fn t_quantile_975(dof: usize) -> f64 {
    match dof {
        0 => f64::INFINITY,
        1..=30 => T975[dof - 1],
        _ => 1.96,
    }
}

/// Batch-means 95% interval: the values are split in order into `batches`
/// contiguous groups (trailing remainder folded into the last) and a Student-t
/// interval is formed from the batch averages.
pub fn batch_means_ci(values: &[f64], batches: usize) -> MeanCi {
    let m = mean(values);
    let batches = batches.min(values.len()).max(1);
    if batches < 2 {
        return MeanCi { mean: m, lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    }
    let size = values.len() / batches;
    let mut var = CompensatedSum::new();
    for b in 0..batches {
        let end = if b + 1 == batches { values.len() } else { (b + 1) * size };
        let bm = mean(&values[b * size..end]);
        var.add((bm - m) * (bm - m));
    }
    let sd = (var.value() / (batches - 1) as f64).sqrt();
    let hw = t_quantile_975(batches - 1) * sd / (batches as f64).sqrt();
    MeanCi { mean: m, lo: m - hw, hi: m + hw }
}

/// Kolmogorov–Smirnov distance between the empirical law of `sorted` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}
