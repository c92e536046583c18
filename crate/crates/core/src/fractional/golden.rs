//! Golden-section search for the maximum of a concave function on a closed
//! interval.

/// `1/φ`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` over `[lo, hi]` until the bracket is narrower than `xtol`.
///
/// Both endpoints are evaluated as well, so a maximum sitting on the
/// boundary is returned exactly rather than to within `xtol`.
pub fn maximize<F>(f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi);
    let f_lo = f(lo);
    if hi <= lo {
        return (lo, f_lo);
    }
    let f_hi = f(hi);

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for cand in [(x1, f1), (x2, f2), (lo, f_lo), (hi, f_hi)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_quadratic() {
        let (x, fx) = maximize(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 4.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_maximum_is_exact() {
        let (x, _) = maximize(|x| x.ln_1p(), 0.0, 5.0, 1e-9);
        assert_eq!(x, 5.0);
        let (x, _) = maximize(|x| -x, 2.0, 3.0, 1e-9);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(maximize(|x| x * x, 1.5, 1.5, 1e-9), (1.5, 2.25));
    }
}
