//! Small numerical helpers shared across solvers.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with `f(lo)` and
/// `f(hi)` of opposite sign. `eval` returns `(f(x), f'(x))`. Falls back to
/// bisection whenever the Newton step leaves the bracket or stalls.
pub fn newton_bisect<F>(mut eval: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut f_lo, _) = eval(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let (f_hi, _) = eval(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(f_lo.signum() != f_hi.signum(), "root not bracketed");

    let mut x = 0.5 * (lo + hi);
    // bracket widths from the previous two iterations; Newton must at least
    // halve the bracket every two steps or we bisect
    let mut widths = [hi - lo; 2];
    for _ in 0..max_iter {
        let (fx, dfx) = eval(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= tol * (1.0 + x.abs()) {
            break;
        }
        let newton = x - fx / dfx;
        let use_newton =
            dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi && width <= 0.5 * widths[0];
        widths = [widths[1], width];
        let next = if use_newton { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= tol * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Plain bisection for sign-only functions; returns the midpoint of the
/// final bracket.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
