//! One-dimensional minimization used by every infimum in the bounds.

/// Location and value of a minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a local minimum of `f` on `[lo, hi]`, stopping
/// once the bracket is narrower than `rel_tol * max(|x|, 1e-300)`.
pub fn golden_section<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Minimum
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        let mid = 0.5 * (a + b);
        if b - a <= rel_tol * mid.abs().max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        Minimum { x: c, value: fc }
    } else {
        Minimum { x: d, value: fd }
    }
}

/// Minimizes `f` on `[lo, hi]`: a uniform scan of `scan_points` points
/// (endpoints included) locates the best cell, golden-section search refines
/// inside the neighbouring cells, and the better of the two is returned.
pub fn scan_then_golden<F>(f: F, lo: f64, hi: f64, scan_points: usize, rel_tol: f64) -> Minimum
where
    F: Fn(f64) -> f64,
{
    let n = scan_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = Minimum { x: lo, value: f64::INFINITY };
    let mut best_idx = 0;
    for k in 0..n {
        let x = if k == n - 1 { hi } else { lo + step * k as f64 };
        let value = f(x);
        if value < best.value || best.value.is_nan() {
            best = Minimum { x, value };
            best_idx = k;
        }
    }
    let left = if best_idx == 0 { lo } else { lo + step * (best_idx - 1) as f64 };
    let right = if best_idx + 1 >= n { hi } else { lo + step * (best_idx + 1) as f64 };
    let refined = golden_section(&f, left, right, rel_tol);
    if refined.value < best.value {
        refined
    } else {
        best
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]` in geometric steps,
/// for positive brackets spanning many orders of magnitude.
pub(crate) fn log_bisect<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let (flo, fhi) = (f(lo), f(hi));
    if !(lo > 0.0 && hi > lo) || flo.signum() == fhi.signum() {
        return None;
    }
    let rising = fhi > flo;
    for _ in 0..400 {
        if hi - lo <= rel_tol * lo {
            break;
        }
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let below = f(mid) < 0.0;
        if below == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
