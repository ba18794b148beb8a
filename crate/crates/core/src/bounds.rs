//! Certified intervals and bound reports.
//!
//! Floating endpoints are rounded outward at every operation so that a
//! certified lower endpoint never exceeds the true value and a certified
//! upper endpoint never falls below it.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    #[serde(rename = "rho")]
    Rho,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "gr")]
    Gr,
    #[serde(rename = "p_c")]
    Pc,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Rho => "rho",
            Quantity::H => "h",
            Quantity::Phi => "phi",
            Quantity::Gr => "gr",
            Quantity::Pc => "p_c",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    CertifiedExact,
    CertifiedBound,
    Heuristic,
}

impl Provenance {
    pub fn is_certified(self) -> bool {
        !matches!(self, Provenance::Heuristic)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::CertifiedExact => "certified-exact",
            Provenance::CertifiedBound => "certified-bound",
            Provenance::Heuristic => "heuristic",
        })
    }
}

#[inline]
pub fn round_down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
pub fn round_up(x: f64) -> f64 {
    x.next_up()
}

/// Directed rounding of `x`, where `err` is the exact residual `true - x`.
fn down_by(x: f64, err: f64) -> f64 {
    if err < 0.0 {
        round_down(x)
    } else {
        x
    }
}

fn up_by(x: f64, err: f64) -> f64 {
    if err > 0.0 {
        round_up(x)
    } else {
        x
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn sum_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    down_by(s, e)
}

fn sum_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    up_by(s, e)
}

fn prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Closed interval with outward-rounded arithmetic. Results that are exact
/// in `f64` are not widened.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[allow(clippy::should_implement_trait)]
impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is inverted");
        Interval { lo, hi }
    }

    /// A value exactly representable as `f64`.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Encloses `p / q` for integers that may not be exactly representable.
    pub fn ratio(p: u128, q: u128) -> Self {
        let x = p as f64 / q as f64;
        if crate::exact::rational(x) == crate::exact::ratio(p, q) {
            Interval::point(x)
        } else {
            Interval::new(round_down(x), round_up(x))
        }
    }

    /// Encloses `sqrt(n)`.
    pub fn sqrt_of(n: f64) -> Self {
        Interval::point(n).sqrt()
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval::new(sum_down(self.lo, o.lo), sum_up(self.hi, o.hi))
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval::new(sum_down(self.lo, -o.hi), sum_up(self.hi, -o.lo))
    }

    pub fn mul(self, o: Interval) -> Interval {
        let c = [
            prod(self.lo, o.lo),
            prod(self.lo, o.hi),
            prod(self.hi, o.lo),
            prod(self.hi, o.hi),
        ];
        let lo = c
            .iter()
            .map(|&(p, e)| down_by(p, e))
            .fold(f64::INFINITY, f64::min);
        let hi = c
            .iter()
            .map(|&(p, e)| up_by(p, e))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    /// Division by an interval that excludes zero.
    pub fn div(self, o: Interval) -> Interval {
        assert!(
            o.lo > 0.0 || o.hi < 0.0,
            "division by an interval containing zero"
        );
        let q = |a: f64, b: f64| {
            let x = a / b;
            // sign of a/b - x is sign(a - x*b) * sign(b)
            let r = (-x).mul_add(b, a) * b.signum();
            (x, r)
        };
        let c = [
            q(self.lo, o.lo),
            q(self.lo, o.hi),
            q(self.hi, o.lo),
            q(self.hi, o.hi),
        ];
        let lo = c
            .iter()
            .map(|&(p, e)| down_by(p, e))
            .fold(f64::INFINITY, f64::min);
        let hi = c
            .iter()
            .map(|&(p, e)| up_by(p, e))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    pub fn scale(self, k: f64) -> Interval {
        self.mul(Interval::point(k))
    }

    /// Square root of a nonnegative interval (negative parts clamp to 0).
    pub fn sqrt(self) -> Interval {
        let root = |x: f64| {
            let s = x.max(0.0).sqrt();
            (s, (-s).mul_add(s, x.max(0.0)))
        };
        let (l, el) = root(self.lo);
        let (h, eh) = root(self.hi);
        Interval::new(down_by(l, el).max(0.0), up_by(h, eh))
    }

    pub fn powi(self, k: u32) -> Interval {
        (0..k).fold(Interval::point(1.0), |acc, _| acc.mul(self))
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Interval {
        Interval::new(self.lo.clamp(lo, hi), self.hi.clamp(lo, hi))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Endpoint {
    pub value: f64,
    pub provenance: Provenance,
    /// Where the value came from, e.g. `"catalog"` or `"walk horizon 24"`.
    pub source: String,
}

impl Endpoint {
    pub fn new(value: f64, provenance: Provenance, source: impl Into<String>) -> Self {
        Endpoint {
            value,
            provenance,
            source: source.into(),
        }
    }
}

/// Interval for one quantity with per-endpoint provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub lower: Option<Endpoint>,
    pub upper: Option<Endpoint>,
    /// Heuristic point estimate, never used by certified logic.
    pub estimate: Option<Endpoint>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn empty(quantity: Quantity) -> Self {
        BoundReport {
            quantity,
            lower: None,
            upper: None,
            estimate: None,
            notes: Vec::new(),
        }
    }

    /// Both endpoints certified-exact, enclosing a known closed-form value.
    pub fn exact(quantity: Quantity, value: Interval, source: &str) -> Self {
        BoundReport {
            lower: Some(Endpoint::new(value.lo, Provenance::CertifiedExact, source)),
            upper: Some(Endpoint::new(value.hi, Provenance::CertifiedExact, source)),
            ..BoundReport::empty(quantity)
        }
    }

    pub fn with_lower(mut self, value: f64, provenance: Provenance, source: &str) -> Self {
        self.lower = Some(Endpoint::new(value, provenance, source));
        self
    }

    pub fn with_upper(mut self, value: f64, provenance: Provenance, source: &str) -> Self {
        self.upper = Some(Endpoint::new(value, provenance, source));
        self
    }

    pub fn with_estimate(mut self, value: f64, source: &str) -> Self {
        self.estimate = Some(Endpoint::new(value, Provenance::Heuristic, source));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn certified_lower(&self) -> Option<f64> {
        self.lower
            .as_ref()
            .filter(|e| e.provenance.is_certified())
            .map(|e| e.value)
    }

    pub fn certified_upper(&self) -> Option<f64> {
        self.upper
            .as_ref()
            .filter(|e| e.provenance.is_certified())
            .map(|e| e.value)
    }

    /// True when both endpoints are certified-exact.
    pub fn is_exact(&self) -> bool {
        matches!(
            (&self.lower, &self.upper),
            (Some(l), Some(u)) if l.provenance == Provenance::CertifiedExact
                && u.provenance == Provenance::CertifiedExact
        )
    }

    /// Keeps the tighter certified endpoint on each side.
    pub fn tighten(mut self, other: &BoundReport) -> Self {
        if let Some(o) = other.lower.as_ref().filter(|e| e.provenance.is_certified()) {
            if self.certified_lower().is_none_or(|v| o.value > v) {
                self.lower = Some(o.clone());
            }
        }
        if let Some(o) = other.upper.as_ref().filter(|e| e.provenance.is_certified()) {
            if self.certified_upper().is_none_or(|v| o.value < v) {
                self.upper = Some(o.clone());
            }
        }
        self
    }

    /// Certified endpoints never cross.
    pub fn is_consistent(&self) -> bool {
        match (self.certified_lower(), self.certified_upper()) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outward_rounding_encloses_sqrt() {
        let r = Interval::sqrt_of(3.0).scale(0.5);
        assert!(r.lo < r.hi);
        assert!(r.contains(3f64.sqrt() / 2.0));
        assert_eq!(Interval::sqrt_of(4.0), Interval::point(2.0));
    }

    #[test]
    fn ratio_is_exact_when_representable() {
        assert_eq!(Interval::ratio(1, 4), Interval::point(0.25));
        let third = Interval::ratio(1, 3);
        assert!(third.lo < third.hi);
    }

    #[test]
    fn tighten_prefers_certified() {
        let a = BoundReport::empty(Quantity::Rho)
            .with_lower(0.5, Provenance::CertifiedBound, "a")
            .with_upper(0.9, Provenance::Heuristic, "a");
        let b = BoundReport::empty(Quantity::Rho)
            .with_lower(0.4, Provenance::CertifiedBound, "b")
            .with_upper(0.95, Provenance::CertifiedBound, "b");
        let t = a.tighten(&b);
        assert_eq!(t.certified_lower(), Some(0.5));
        assert_eq!(t.certified_upper(), Some(0.95));
        assert!(t.is_consistent());
    }
}
