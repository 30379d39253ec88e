//! Exact arithmetic in the cyclotomic integers `Z[zeta_N]` for `N = p^m`.
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^{phi(N)-1}`,
//! which is a Z-basis, so equality is coefficientwise.

use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::field::Prime;

pub type Coeffs = SmallVec<[i128; 8]>;

/// An element of `Z[zeta_{p^m}]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cyclo {
    p: Prime,
    m: u32,
    c: Coeffs,
}

pub(crate) fn order(p: Prime, m: u32) -> usize {
    p.as_usize().pow(m)
}

pub(crate) fn phi(p: Prime, m: u32) -> usize {
    if m == 0 {
        1
    } else {
        order(p, m) / p.as_usize() * (p.as_usize() - 1)
    }
}

/// Adds `v * zeta^k` (any `k`) into a canonical coefficient vector.
#[inline]
pub(crate) fn add_power(c: &mut [i128], p: usize, n: usize, ph: usize, k: usize, v: i128) {
    let k = k % n;
    if k < ph {
        c[k] += v;
    } else {
        // zeta^{phi + r} = -sum_{i < p-1} zeta^{r + i N/p}
        let step = n / p;
        let r = k - ph;
        for i in 0..p - 1 {
            c[r + i * step] -= v;
        }
    }
}

impl Cyclo {
    pub fn zero(p: Prime, m: u32) -> Cyclo {
        Cyclo { p, m, c: SmallVec::from_elem(0, phi(p, m)) }
    }

    pub fn one(p: Prime, m: u32) -> Cyclo {
        Cyclo::integer(p, m, 1)
    }

    pub fn integer(p: Prime, m: u32, v: i128) -> Cyclo {
        let mut z = Cyclo::zero(p, m);
        z.c[0] = v;
        z
    }

    /// `zeta_{p^m}^e`.
    pub fn root(p: Prime, m: u32, e: u64) -> Cyclo {
        let mut z = Cyclo::zero(p, m);
        let n = order(p, m);
        let ph = z.c.len();
        add_power(&mut z.c, p.as_usize(), n, ph, (e % n as u64) as usize, 1);
        z
    }

    /// Builds from coefficients of `zeta^0, zeta^1, ...` (any length), reducing.
    pub fn from_powers(p: Prime, m: u32, coeffs: &[i128]) -> Cyclo {
        let mut z = Cyclo::zero(p, m);
        let n = order(p, m);
        let ph = z.c.len();
        for (k, &v) in coeffs.iter().enumerate() {
            if v != 0 {
                add_power(&mut z.c, p.as_usize(), n, ph, k, v);
            }
        }
        z
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// The exponent `m` with `N = p^m`.
    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    /// `Some(v)` when the element is the integer `v`.
    pub fn as_integer(&self) -> Option<i128> {
        self.c[1..].iter().all(|&v| v == 0).then_some(self.c[0])
    }

    /// Same element viewed in `Z[zeta_{p^level}]`, `level >= self.level()`.
    pub fn lift(&self, level: u32) -> Cyclo {
        assert!(level >= self.m);
        if level == self.m {
            return self.clone();
        }
        let mult = order(self.p, level - self.m);
        let mut z = Cyclo::zero(self.p, level);
        let n = order(self.p, level);
        let ph = z.c.len();
        for (k, &v) in self.c.iter().enumerate() {
            if v != 0 {
                add_power(&mut z.c, self.p.as_usize(), n, ph, k * mult, v);
            }
        }
        z
    }

    fn aligned(&self, other: &Cyclo) -> (Cyclo, Cyclo) {
        let l = self.m.max(other.m);
        (self.lift(l), other.lift(l))
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        if self.m == other.m {
            let mut z = self.clone();
            z.add_assign(other);
            return z;
        }
        let (a, b) = self.aligned(other);
        a.add(&b)
    }

    /// In-place sum; both operands must share the level.
    #[inline]
    pub fn add_assign(&mut self, other: &Cyclo) {
        debug_assert_eq!(self.m, other.m);
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { p: self.p, m: self.m, c: self.c.iter().map(|v| -v).collect() }
    }

    pub fn scale(&self, k: i128) -> Cyclo {
        Cyclo { p: self.p, m: self.m, c: self.c.iter().map(|v| v * k).collect() }
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        if self.m != other.m {
            let (a, b) = self.aligned(other);
            return a.mul(&b);
        }
        let ph = self.c.len();
        if ph == 1 {
            return Cyclo::integer(self.p, self.m, self.c[0] * other.c[0]);
        }
        let mut full: SmallVec<[i128; 16]> = SmallVec::from_elem(0, 2 * ph - 1);
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                full[i + j] += a * b;
            }
        }
        let mut z = Cyclo::zero(self.p, self.m);
        let n = order(self.p, self.m);
        z.c.copy_from_slice(&full[..ph]);
        for (k, &v) in full.iter().enumerate().skip(ph) {
            if v != 0 {
                add_power(&mut z.c, self.p.as_usize(), n, ph, k, v);
            }
        }
        z
    }

    /// Multiplies by `zeta^e`.
    pub fn rotate(&self, e: u64) -> Cyclo {
        let n = order(self.p, self.m);
        let ph = self.c.len();
        let mut z = Cyclo::zero(self.p, self.m);
        for (k, &v) in self.c.iter().enumerate() {
            if v != 0 {
                add_power(&mut z.c, self.p.as_usize(), n, ph, k + (e % n as u64) as usize, v);
            }
        }
        z
    }

    /// Complex conjugate: `zeta^k -> zeta^{-k}`.
    pub fn conj(&self) -> Cyclo {
        let n = order(self.p, self.m);
        let ph = self.c.len();
        let mut z = Cyclo::zero(self.p, self.m);
        for (k, &v) in self.c.iter().enumerate() {
            if v != 0 {
                add_power(&mut z.c, self.p.as_usize(), n, ph, (n - k) % n, v);
            }
        }
        z
    }

    /// `|z|^2 = z * conj(z)`.
    pub fn norm_sq(&self) -> Cyclo {
        self.mul(&self.conj())
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = order(self.p, self.m) as f64;
        self.c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(k, &v)| Complex64::from_polar(v as f64, std::f64::consts::TAU * k as f64 / n))
            .sum()
    }

    /// Largest absolute coefficient, used to guard against overflow.
    pub fn height(&self) -> i128 {
        self.c.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// `out += a * b` for flat coefficient slices at level `m`.
pub(crate) fn mul_add_flat(p: Prime, m: u32, a: &[i128], b: &[i128], out: &mut [i128]) {
    let n = order(p, m);
    let ph = a.len();
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                add_power(out, p.as_usize(), n, ph, i + j, x * y);
            }
        }
    }
}

/// `out += zeta^k * a` for flat coefficient slices at level `m`.
#[inline]
pub(crate) fn add_rotated_flat(p: Prime, m: u32, a: &[i128], k: usize, out: &mut [i128]) {
    let n = order(p, m);
    let ph = a.len();
    for (i, &x) in a.iter().enumerate() {
        if x != 0 {
            add_power(out, p.as_usize(), n, ph, i + k, x);
        }
    }
}

/// `out = conj(a)` for flat coefficient slices at level `m`.
pub(crate) fn conj_flat(p: Prime, m: u32, a: &[i128], out: &mut [i128]) {
    let n = order(p, m);
    out.iter_mut().for_each(|v| *v = 0);
    for (i, &x) in a.iter().enumerate() {
        if x != 0 {
            add_power(out, p.as_usize(), n, a.len(), (n - i) % n, x);
        }
    }
}

impl Cyclo {
    /// Wraps an already reduced coefficient slice.
    pub(crate) fn from_flat(p: Prime, m: u32, c: &[i128]) -> Cyclo {
        debug_assert_eq!(c.len(), phi(p, m));
        Cyclo { p, m, c: c.iter().copied().collect() }
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(k, v)| if k == 0 { v.to_string() } else { format!("{v}*z^{k}") })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Values a bounded function may take: exact cyclotomic integers or floats.
pub trait Amp: Clone + Send + Sync {
    fn amp_zero(&self) -> Self;
    fn amp_add(&self, o: &Self) -> Self;
    fn amp_mul(&self, o: &Self) -> Self;
    fn amp_conj(&self) -> Self;
    fn amp_complex(&self) -> Complex64;
}

impl Amp for Cyclo {
    fn amp_zero(&self) -> Self {
        Cyclo::zero(self.p, self.m)
    }
    fn amp_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn amp_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn amp_conj(&self) -> Self {
        self.conj()
    }
    fn amp_complex(&self) -> Complex64 {
        self.to_complex()
    }
}

impl Amp for Complex64 {
    fn amp_zero(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn amp_add(&self, o: &Self) -> Self {
        self + o
    }
    fn amp_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn amp_conj(&self) -> Self {
        self.conj()
    }
    fn amp_complex(&self) -> Complex64 {
        *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn roots_sum_to_zero() {
        for (p, m) in [(Prime::TWO, 1), (Prime::TWO, 3), (Prime::THREE, 2), (Prime::FIVE, 1)] {
            let n = order(p, m) as u64;
            let mut s = Cyclo::zero(p, m);
            for e in 0..n {
                s = s.add(&Cyclo::root(p, m, e));
            }
            assert!(s.is_zero());
            assert_eq!(Cyclo::root(p, m, 1).mul(&Cyclo::root(p, m, n - 1)), Cyclo::one(p, m));
        }
    }

    #[test]
    fn arithmetic_matches_floats() {
        let p = Prime::TWO;
        let a = Cyclo::from_powers(p, 3, &[1, -2, 0, 3, 5, 0, 1, 7]);
        let b = Cyclo::from_powers(p, 2, &[2, 1, -1]);
        let prod = a.mul(&b);
        assert!(close(prod.to_complex(), a.to_complex() * b.to_complex()));
        assert!(close(a.conj().to_complex(), a.to_complex().conj()));
        assert!(close(a.rotate(5).to_complex(), a.to_complex() * Cyclo::root(p, 3, 5).to_complex()));
        let z = Cyclo::root(Prime::THREE, 1, 1);
        assert_eq!(z.norm_sq().as_integer(), Some(1));
        assert_eq!(b.lift(4).to_complex().re, b.to_complex().re);
    }

    #[test]
    fn integers_at_level_zero() {
        let a = Cyclo::integer(Prime::FIVE, 0, 3);
        assert_eq!(a.mul(&a).as_integer(), Some(9));
        assert_eq!(a.lift(1).as_integer(), Some(3));
        assert_eq!(Cyclo::root(Prime::TWO, 1, 1).as_integer(), Some(-1));
    }
}
