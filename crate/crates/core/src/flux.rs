//! The convective nonlinearity `f`, its C¹ truncation and the sampled
//! screen for the well-posedness hypotheses.

use alloc::boxed::Box;

use crate::error::{Error, Result};
use crate::graph::StarGraph;
use crate::math;

/// Convective flux `f` with `f(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxFunction {
    Zero,
    /// `f(s) = |s|^{q-1} s` with `q > 1`.
    PowerLaw { q: f64 },
    /// `θ(s)·base(s)`, where `θ = 1` on `[lower, upper]`, `θ = 0` outside
    /// `(lower - 1, upper + 1)` and a cubic smoothstep ramp in between.
    Truncated {
        base: Box<FluxFunction>,
        lower: f64,
        upper: f64,
    },
}

/// Cubic smoothstep `3w² - 2w³` on `[0, 1]` and its derivative.
fn smoothstep(w: f64) -> (f64, f64) {
    (w * w * (3.0 - 2.0 * w), 6.0 * w * (1.0 - w))
}

impl FluxFunction {
    pub fn power_law(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidPower { q });
        }
        Ok(FluxFunction::PowerLaw { q })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FluxFunction::Zero => true,
            FluxFunction::PowerLaw { .. } => false,
            FluxFunction::Truncated { base, .. } => base.is_zero(),
        }
    }

    /// `f(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            FluxFunction::Zero => 0.0,
            FluxFunction::PowerLaw { q } => power_abs(s, q - 1.0) * s,
            FluxFunction::Truncated { base, lower, upper } => {
                if s >= *lower && s <= *upper {
                    return base.eval(s);
                }
                let (theta, _) = cutoff(s, *lower, *upper);
                if theta == 0.0 {
                    0.0
                } else {
                    theta * base.eval(s)
                }
            }
        }
    }

    /// `f'(s)`.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            FluxFunction::Zero => 0.0,
            FluxFunction::PowerLaw { q } => q * power_abs(s, q - 1.0),
            FluxFunction::Truncated { base, lower, upper } => {
                if s >= *lower && s <= *upper {
                    return base.derivative(s);
                }
                let (theta, dtheta) = cutoff(s, *lower, *upper);
                if theta == 0.0 && dtheta == 0.0 {
                    0.0
                } else {
                    theta * base.derivative(s) + dtheta * base.eval(s)
                }
            }
        }
    }

    /// `∫_0^r f(s) ds`.
    pub fn antiderivative(&self, r: f64) -> f64 {
        match self {
            FluxFunction::Zero => 0.0,
            FluxFunction::PowerLaw { q } => power_abs(r, q + 1.0) / (q + 1.0),
            FluxFunction::Truncated { .. } => {
                math::integrate(&|s| self.eval(s), 0.0, r, 64, 1e-14)
            }
        }
    }

    /// Truncates `self` to `[lower, upper]` with a unit-width C¹ ramp.
    pub fn truncate(&self, lower: f64, upper: f64) -> Result<FluxFunction> {
        if !(lower <= 0.0 && upper >= 0.0) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidTruncation { lower, upper });
        }
        Ok(FluxFunction::Truncated {
            base: Box::new(self.clone()),
            lower,
            upper,
        })
    }

    /// Whether `f` is known to be nondecreasing on `[lo, hi]`.
    pub fn nondecreasing_on(&self, lo: f64, hi: f64) -> bool {
        match self {
            FluxFunction::Zero | FluxFunction::PowerLaw { .. } => true,
            FluxFunction::Truncated { base, lower, upper } => {
                lo >= *lower && hi <= *upper && base.nondecreasing_on(lo, hi)
            }
        }
    }

    /// `max |f'|` over `[lo, hi]`, in closed form for the power law and by
    /// dense sampling otherwise.
    pub fn max_abs_derivative(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        match self {
            FluxFunction::Zero => 0.0,
            FluxFunction::PowerLaw { q } => q * power_abs(lo.abs().max(hi.abs()), q - 1.0),
            FluxFunction::Truncated { .. } => {
                const SAMPLES: usize = 2048;
                let mut best = self.derivative(lo).abs().max(self.derivative(hi).abs());
                for i in 1..SAMPLES {
                    let s = lo + (hi - lo) * i as f64 / SAMPLES as f64;
                    best = best.max(self.derivative(s).abs());
                }
                best
            }
        }
    }
}

fn power_abs(s: f64, exponent: f64) -> f64 {
    let a = s.abs();
    if exponent == 0.0 {
        return 1.0;
    }
    if libm::trunc(exponent) == exponent && exponent > 0.0 && exponent <= 32.0 {
        return math::powi(a, exponent as u32);
    }
    if a == 0.0 {
        return 0.0;
    }
    math::powf(a, exponent)
}

/// `(θ(s), θ'(s))` outside the plateau.
fn cutoff(s: f64, lower: f64, upper: f64) -> (f64, f64) {
    if s > upper {
        if s >= upper + 1.0 {
            return (0.0, 0.0);
        }
        let (v, dv) = smoothstep(upper + 1.0 - s);
        (v, -dv)
    } else if s < lower {
        if s <= lower - 1.0 {
            return (0.0, 0.0);
        }
        let (v, dv) = smoothstep(s - (lower - 1.0));
        (v, dv)
    } else {
        (1.0, 0.0)
    }
}

/// Well-posedness hypotheses on `(n, m, f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hypothesis {
    /// `n = m`.
    H1,
    /// `n < m` and `f(s)s >= 0`.
    H2,
    /// `n > m` and `f(s)s <= 0`.
    H3,
    /// `f` vanishes outside `(lower, upper)`.
    H4,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 4] = [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3, Hypothesis::H4];

    fn bit(self) -> u8 {
        match self {
            Hypothesis::H1 => 1,
            Hypothesis::H2 => 2,
            Hypothesis::H3 => 4,
            Hypothesis::H4 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct HypothesisSet(u8);

impl HypothesisSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, h: Hypothesis) {
        self.0 |= h.bit();
    }

    pub fn contains(&self, h: Hypothesis) -> bool {
        self.0 & h.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Hypothesis> + '_ {
        Hypothesis::ALL.into_iter().filter(|h| self.contains(*h))
    }
}

impl FromIterator<Hypothesis> for HypothesisSet {
    fn from_iter<I: IntoIterator<Item = Hypothesis>>(iter: I) -> Self {
        let mut set = HypothesisSet::empty();
        for h in iter {
            set.insert(h);
        }
        set
    }
}

/// Symmetric uniform sample set `[-half_width, half_width]` used to screen
/// the sign conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub samples: usize,
    /// Defaults to `10·max(1, |lower|, upper)` when `None`.
    pub half_width: Option<f64>,
}

impl Default for Probe {
    fn default() -> Self {
        Self {
            samples: 10_000,
            half_width: None,
        }
    }
}

/// Sampled screen of the hypotheses. A hypothesis in the result passed every
/// probe; this is a necessary condition, not a proof.
pub fn check_hypotheses(
    f: &FluxFunction,
    graph: StarGraph,
    lower: f64,
    upper: f64,
    probe: Probe,
) -> HypothesisSet {
    let (n, m) = (graph.n_in(), graph.m_out());
    let half = probe
        .half_width
        .unwrap_or_else(|| 10.0 * 1f64.max(lower.abs()).max(upper.abs()));
    let count = probe.samples.max(2);
    let point = |i: usize| -half + 2.0 * half * i as f64 / (count - 1) as f64;

    let mut nonneg = true;
    let mut nonpos = true;
    let mut vanishes = true;
    for i in 0..count {
        let s = point(i);
        let fs = f.eval(s);
        let sign = fs * s;
        nonneg &= sign >= 0.0;
        nonpos &= sign <= 0.0;
        if !(s > lower && s < upper) {
            vanishes &= fs == 0.0;
        }
    }

    let mut set = HypothesisSet::empty();
    if n == m {
        set.insert(Hypothesis::H1);
    }
    if n < m && nonneg {
        set.insert(Hypothesis::H2);
    }
    if n > m && nonpos {
        set.insert(Hypothesis::H3);
    }
    if vanishes {
        set.insert(Hypothesis::H4);
    }
    set
}
