//! Thin wrappers over `libm` plus the few quadrature helpers shared by the
//! modules.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `x^k` for a small non-negative integer `k` by repeated squaring.
#[inline]
pub fn powi(mut x: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= x;
        }
        x *= x;
        k >>= 1;
    }
    acc
}

pub const PI: f64 = core::f64::consts::PI;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new(value: f64) -> Self {
        Self {
            sum: value,
            carry: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Signed integral of `g` over `[a, b]`: the interval is split into
/// `panels` equal pieces and each is refined by adaptive Simpson.
pub fn integrate<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let per_panel = tol / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { lo + width };
        total += simpson_panel(g, lo, hi, per_panel);
    }
    total
}

fn simpson_panel<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = g(a);
    let fb = g(b);
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(g, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_refine(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_refine(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_handles_kinks() {
        let g = |s: f64| s.abs();
        let v = integrate(&g, -1.0, 2.0, 3, 1e-13);
        assert!((v - 2.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn signed_orientation() {
        let g = |s: f64| s * s;
        let fwd = integrate(&g, 0.0, 2.0, 4, 1e-13);
        let back = integrate(&g, 2.0, 0.0, 4, 1e-13);
        assert!((fwd - 8.0 / 3.0).abs() < 1e-12);
        assert!((fwd + back).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(powi(2.0, 0), 1.0);
        assert_eq!(powi(2.0, 10), 1024.0);
        assert_eq!(powi(-1.5, 3), -3.375);
    }
}
