//! Bracketed one-dimensional minimization.


/// Points in the coarse grid that seeds golden-section refinement.
pub const COARSE_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// False when golden-section refinement hit its iteration cap or saw a
    /// non-finite value; `x`/`value` are then the best grid point.
    pub converged: bool,
}

/// Minimizes `f` on `[a, b]`: a 64-point grid scan followed by golden-section
/// search on the bracket around the best grid point, to interval width `tol`.
///
/// The grid keeps the search honest for non-unimodal objectives; the result
/// is never worse than the best grid point.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Minimum {
    let step = (b - a) / (COARSE_GRID - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    let mut all_finite = true;
    for i in 0..COARSE_GRID {
        let v = f(a + step * i as f64);
        if !v.is_finite() {
            all_finite = false;
            continue;
        }
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let grid_x = a + step * best_i as f64;
    let mut lo = a + step * best_i.saturating_sub(1) as f64;
    let mut hi = (a + step * (best_i + 1) as f64).min(b);

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < 200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let (gx, gv) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let refined_ok = gv.is_finite() && hi - lo <= tol;
    if refined_ok && gv <= best_v {
        Minimum { x: gx, value: gv, converged: true }
    } else {
        Minimum { x: grid_x, value: best_v, converged: refined_ok && all_finite }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        (0..1024).map(|i| f(a + (b - a) * i as f64 / 1023.0)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn quadratic() {
        let m = minimize_1d(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((m.x - 0.3).abs() < 1e-8);
        assert!(m.converged);
    }

    #[test]
    fn absolute_value_kink() {
        let m = minimize_1d(|x: f64| (x - 0.5).abs(), 0.0, 1.0, 1e-10);
        assert!((m.x - 0.5).abs() < 1e-9);
    }

    #[test]
    fn multimodal_never_worse_than_grid() {
        let f = |x: f64| (17.0 * x).sin() + 0.3 * x;
        let m = minimize_1d(f, -2.0, 3.0, 1e-10);
        assert!(m.value <= grid_min(f, -2.0, 3.0) + 1e-10);
    }

    #[test]
    fn minimum_at_boundary() {
        let m = minimize_1d(|x| x, 0.0, 1.0, 1e-10);
        assert!(m.x < 1e-9);
    }
}
