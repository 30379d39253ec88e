//! Exact elements of (1/p^m)Z / Z.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::Prime;

/// `numerator / p^depth` modulo 1, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusValue {
    p: Prime,
    numerator: u64,
    depth: u32,
}

impl TorusValue {
    pub fn zero(p: Prime) -> TorusValue {
        TorusValue { p, numerator: 0, depth: 0 }
    }

    /// `numerator / p^depth mod 1`, reduced.
    pub fn new(p: Prime, numerator: i64, depth: u32) -> TorusValue {
        let den = p.get() as i64;
        let modulus = den.checked_pow(depth).expect("torus depth overflow");
        let mut num = numerator.rem_euclid(modulus) as u64;
        let mut depth = depth;
        while depth > 0 && num % p.get() as u64 == 0 {
            num /= p.get() as u64;
            depth -= 1;
        }
        TorusValue { p, numerator: num, depth }
    }

    /// The image of `c in F_p` at `c / p`.
    pub fn from_fp(p: Prime, c: u8) -> TorusValue {
        TorusValue::new(p, c as i64, 1)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    /// Minimal `m` with `p^m * self = 0`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// Numerator over the common denominator `p^depth` (`depth >= self.depth()`).
    pub fn numerator_at(&self, depth: u32) -> u64 {
        assert!(depth >= self.depth);
        self.numerator * (self.p.get() as u64).pow(depth - self.depth)
    }

    /// For a value on the (1/p)-grid, the corresponding element of F_p.
    pub fn to_fp(&self) -> Result<u8> {
        match self.depth {
            0 => Ok(0),
            1 => Ok(self.numerator as u8),
            _ => Err(Error::Internal(format!("{self} is not on the 1/{} grid", self.p))),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / (self.p.get() as f64).powi(self.depth as i32)
    }

    /// Integer multiple.
    pub fn times(&self, k: i64) -> TorusValue {
        let modulus = (self.p.get() as i64).pow(self.depth);
        TorusValue::new(self.p, self.numerator as i64 * k.rem_euclid(modulus), self.depth)
    }

    /// Parses `num/den` with `den` a power of `p`, or a bare integer.
    pub fn parse(p: Prime, s: &str) -> Result<TorusValue> {
        let bad = || Error::Parse { line: 0, msg: format!("bad torus value '{s}'") };
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().parse::<i64>().map_err(|_| bad())?),
            None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
        };
        let mut depth = 0;
        let mut d = den;
        while d > 1 && d % p.get() as i64 == 0 {
            d /= p.get() as i64;
            depth += 1;
        }
        if d != 1 {
            return Err(bad());
        }
        Ok(TorusValue::new(p, num, depth))
    }
}

impl Add for TorusValue {
    type Output = TorusValue;
    fn add(self, rhs: TorusValue) -> TorusValue {
        let d = self.depth.max(rhs.depth);
        TorusValue::new(self.p, (self.numerator_at(d) + rhs.numerator_at(d)) as i64, d)
    }
}

impl Neg for TorusValue {
    type Output = TorusValue;
    fn neg(self) -> TorusValue {
        TorusValue::new(self.p, -(self.numerator as i64), self.depth)
    }
}

impl Sub for TorusValue {
    type Output = TorusValue;
    fn sub(self, rhs: TorusValue) -> TorusValue {
        self + (-rhs)
    }
}

impl fmt::Display for TorusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, (self.p.get() as u64).pow(self.depth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_arithmetic() {
        let p = Prime::TWO;
        let a = TorusValue::new(p, 2, 3);
        assert_eq!((a.numerator(), a.depth()), (1, 2));
        let b = TorusValue::new(p, 3, 2);
        assert_eq!(a + b, TorusValue::zero(p));
        assert_eq!(-TorusValue::new(p, 1, 3), TorusValue::new(p, 7, 3));
        assert_eq!(TorusValue::new(p, 1, 1).to_fp().unwrap(), 1);
        assert!(TorusValue::new(p, 1, 2).to_fp().is_err());
        assert_eq!(TorusValue::parse(p, "3/8").unwrap(), TorusValue::new(p, 3, 3));
        assert!(TorusValue::parse(p, "1/3").is_err());
        assert_eq!(TorusValue::new(Prime::THREE, 2, 1).times(2), TorusValue::new(Prime::THREE, 1, 1));
    }
}
