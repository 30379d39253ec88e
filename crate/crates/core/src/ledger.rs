//! Nonnegative reals that stay exact when they are rational, and the
//! inequality ledger built from comparisons between them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::field::Prime;

/// Slack used when a comparison has to fall back to floating point.
pub const FLOAT_SLACK: f64 = 1e-9;

/// How a comparison was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Float => write!(f, "float"),
        }
    }
}

/// A real number, exact when it lies in `Q(sqrt 2)`.
///
/// Squared moduli of sums of eighth roots of unity land in `Z[sqrt 2]`, so
/// this covers every exact quantity met for `p = 2` up to cubic phases.
#[derive(Debug, Clone, PartialEq)]
pub struct Real {
    exact: Option<(BigRational, BigRational)>,
    approx: f64,
}

fn surd_sign(a: &BigRational, b: &BigRational) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    let sa = a.cmp(&BigRational::zero());
    let sb = b.cmp(&BigRational::zero());
    match (sa, sb) {
        (Equal, s) | (s, Equal) => s,
        (Greater, Greater) => Greater,
        (Less, Less) => Less,
        // opposite signs: compare a^2 with 2 b^2
        (Greater, Less) => (a * a).cmp(&(b * b * BigRational::from_integer(2.into()))),
        (Less, Greater) => (b * b * BigRational::from_integer(2.into())).cmp(&(a * a)),
    }
}

impl Real {
    pub fn exact(q: BigRational) -> Real {
        let approx = ratio_to_f64(&q);
        Real { exact: Some((q, BigRational::zero())), approx }
    }

    /// `a + b sqrt 2`.
    pub fn surd(a: BigRational, b: BigRational) -> Real {
        let approx = ratio_to_f64(&a) + ratio_to_f64(&b) * std::f64::consts::SQRT_2;
        Real { exact: Some((a, b)), approx }
    }

    pub fn float(x: f64) -> Real {
        Real { exact: None, approx: x }
    }

    pub fn zero() -> Real {
        Real::exact(BigRational::zero())
    }

    pub fn one() -> Real {
        Real::exact(BigRational::one())
    }

    pub fn ratio(num: i128, den: &BigInt) -> Real {
        Real::exact(BigRational::new(BigInt::from(num), den.clone()))
    }

    /// `p^e` for a possibly negative exponent.
    pub fn prime_power(p: Prime, e: i64) -> Real {
        let base = BigInt::from(p.get()).pow(e.unsigned_abs() as u32);
        if e >= 0 {
            Real::exact(BigRational::from_integer(base))
        } else {
            Real::exact(BigRational::new(BigInt::one(), base))
        }
    }

    /// The value when it is rational.
    pub fn as_exact(&self) -> Option<&BigRational> {
        match &self.exact {
            Some((a, b)) if b.is_zero() => Some(a),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn mul(&self, o: &Real) -> Real {
        match (&self.exact, &o.exact) {
            (Some((a, b)), Some((c, d))) => {
                let two = BigRational::from_integer(2.into());
                Real::surd(a * c + b * d * two, a * d + b * c)
            }
            _ => Real::float(self.approx * o.approx),
        }
    }

    pub fn pow(&self, mut e: u32) -> Real {
        let mut acc = Real::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn cmp_exact(&self, o: &Real) -> Option<std::cmp::Ordering> {
        match (&self.exact, &o.exact) {
            (Some((a, b)), Some((c, d))) => Some(surd_sign(&(a - c), &(b - d))),
            _ => None,
        }
    }

    /// `self >= o`, exactly when both sides are exact.
    pub fn ge(&self, o: &Real) -> (bool, Mode) {
        match self.cmp_exact(o) {
            Some(ord) => (ord != std::cmp::Ordering::Less, Mode::Exact),
            None => (self.approx >= o.approx - FLOAT_SLACK * o.approx.abs().max(1.0), Mode::Float),
        }
    }

    pub fn le(&self, o: &Real) -> (bool, Mode) {
        o.ge(self)
    }

    /// Exact equality, or agreement within slack in float mode.
    pub fn eq_value(&self, o: &Real) -> (bool, Mode) {
        match self.cmp_exact(o) {
            Some(ord) => (ord == std::cmp::Ordering::Equal, Mode::Exact),
            None => ((self.approx - o.approx).abs() <= FLOAT_SLACK * o.approx.abs().max(1.0), Mode::Float),
        }
    }

    /// Least integer `r >= 0` with `p^{-r} <= self` (for `0 < self <= 1`),
    /// i.e. `ceil(log_p(1/self))`. `None` for zero.
    pub fn ceil_log_inv(&self, p: Prime) -> Option<usize> {
        if self.is_exact() {
            if Real::zero().ge(self).0 {
                return None;
            }
            let mut r = 0usize;
            while !self.ge(&Real::prime_power(p, -(r as i64))).0 {
                r += 1;
            }
            Some(r)
        } else {
            if self.approx <= 0.0 {
                return None;
            }
            let x = -self.approx.ln() / (p.get() as f64).ln();
            Some((x - FLOAT_SLACK).ceil().max(0.0) as usize)
        }
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::MAX);
        let d = q.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

fn small(q: &BigRational) -> bool {
    q.denom().bits() <= 64 && q.numer().bits() <= 64
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some((a, b)) if b.is_zero() && small(a) => write!(f, "{a} (~{:.6})", self.approx),
            Some((a, b)) if small(a) && small(b) => write!(f, "{a} + {b}*sqrt2 (~{:.6})", self.approx),
            Some(_) => write!(f, "~{:.6e} (exact)", self.approx),
            None => write!(f, "~{:.9}", self.approx),
        }
    }
}

/// One checked inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    pub claim: String,
    pub measured: String,
    pub holds: bool,
    pub mode: Mode,
}

/// An ordered list of checked inequalities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    pub entries: Vec<Entry>,
}

impl Ledger {
    pub fn new() -> Ledger {
        Ledger::default()
    }

    pub fn push(&mut self, name: &str, claim: String, measured: String, holds: bool, mode: Mode) -> bool {
        self.entries.push(Entry { name: name.into(), claim, measured, holds, mode });
        holds
    }

    /// Records `lhs >= rhs`.
    pub fn ge(&mut self, name: &str, claim: &str, lhs: &Real, rhs: &Real) -> bool {
        let (holds, mode) = lhs.ge(rhs);
        self.push(name, claim.into(), format!("{lhs} vs {rhs}"), holds, mode)
    }

    /// Records an integer inequality `value <= bound`.
    pub fn le_int(&mut self, name: &str, claim: &str, value: usize, bound: usize) -> bool {
        self.push(name, claim.into(), format!("{value} <= {bound}"), value <= bound, Mode::Exact)
    }

    pub fn check(&mut self, name: &str, claim: &str, holds: bool) -> bool {
        self.push(name, claim.into(), if holds { "yes".into() } else { "no".into() }, holds, Mode::Exact)
    }

    pub fn extend(&mut self, other: Ledger) {
        self.entries.extend(other.entries);
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    pub fn failures(&self) -> Vec<&Entry> {
        self.entries.iter().filter(|e| !e.holds).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let status = if e.holds { "ok  " } else { "FAIL" };
            s.push_str(&format!("[{status}] {:<28} {}  ({}; {})\n", e.name, e.claim, e.measured, e.mode));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_float_comparisons() {
        let a = Real::ratio(1, &BigInt::from(4));
        let b = Real::prime_power(Prime::TWO, -2);
        assert_eq!(a.ge(&b), (true, Mode::Exact));
        assert_eq!(a.pow(2).ge(&b), (false, Mode::Exact));
        let f = Real::float(0.25 + 1e-12);
        assert_eq!(f.eq_value(&a), (true, Mode::Float));
        assert_eq!(Real::ratio(3, &BigInt::from(4)).ceil_log_inv(Prime::TWO), Some(1));
        assert_eq!(Real::one().ceil_log_inv(Prime::THREE), Some(0));
        assert_eq!(Real::ratio(1, &BigInt::from(9)).ceil_log_inv(Prime::THREE), Some(2));
        assert_eq!(Real::zero().ceil_log_inv(Prime::TWO), None);
    }

    #[test]
    fn surds_compare_exactly() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        // 1/2 + sqrt2/4 ~ 0.8536
        let x = Real::surd(q(1, 2), q(1, 4));
        assert_eq!(x.ge(&Real::exact(q(85, 100))), (true, Mode::Exact));
        assert_eq!(x.ge(&Real::exact(q(86, 100))), (false, Mode::Exact));
        // (sqrt2 - 1)^2 = 3 - 2 sqrt2
        let y = Real::surd(q(-1, 1), q(1, 1));
        assert_eq!(y.pow(2), Real::surd(q(3, 1), q(-2, 1)));
        assert!(y.ge(&Real::zero()).0);
        assert_eq!(Real::surd(q(1, 1), q(-1, 1)).ge(&Real::zero()), (false, Mode::Exact));
    }

    #[test]
    fn ledger_records_failures() {
        let mut l = Ledger::new();
        assert!(l.le_int("codim", "codim <= 5r", 3, 5));
        assert!(!l.ge("bias", "bias >= delta^8", &Real::zero(), &Real::one()));
        assert!(!l.all_hold());
        assert_eq!(l.failures().len(), 1);
        assert!(l.to_text().contains("FAIL"));
    }
}
