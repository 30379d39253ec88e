//! The ambient space V = F_p^n: vectors, linear forms and subspaces.
//!
//! Vectors are plain coordinate slices. Whenever a whole space is enumerated,
//! a vector is identified with the integer whose base-p digits are its
//! coordinates, coordinate 0 being the most significant digit. This is the
//! lexicographic order used everywhere else in the crate (value tables of
//! functions and polynomials are indexed the same way).

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{self, Prime};

/// A vector of V. Coordinates are in `{0, ..., p-1}`.
pub type Vector = Vec<u8>;

/// Default cap on the number of elements any single enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// The space F_p^n together with its index arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    pub p: Prime,
    pub n: usize,
}

impl Space {
    pub fn new(p: Prime, n: usize) -> Space {
        Space { p, n }
    }

    /// Number of elements `p^n`. Panics if it does not fit in a `usize`.
    pub fn size(&self) -> usize {
        self.p.pow(self.n as u32).and_then(|v| usize::try_from(v).ok()).expect("space too large to index")
    }

    /// Checks that `p^(n * copies)` does not exceed `cap`.
    pub fn check_budget(&self, copies: usize, cap: u128) -> Result<()> {
        let needed = self.p.pow((self.n * copies) as u32).unwrap_or(u128::MAX);
        if needed > cap {
            return Err(Error::BudgetExceeded { needed, cap });
        }
        Ok(())
    }

    pub fn index(&self, v: &[u8]) -> usize {
        let p = self.p.as_usize();
        v.iter().fold(0usize, |acc, &d| acc * p + d as usize)
    }

    pub fn vector(&self, mut idx: usize) -> Vector {
        let p = self.p.as_usize();
        let mut v = vec![0u8; self.n];
        for slot in v.iter_mut().rev() {
            *slot = (idx % p) as u8;
            idx /= p;
        }
        v
    }

    /// Index of `a + b`.
    #[inline]
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        if self.p == Prime::TWO {
            return a ^ b;
        }
        let p = self.p.as_usize();
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            let d = (a % p + b % p) % p;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    /// Index of `a - b`.
    #[inline]
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    #[inline]
    pub fn neg_idx(&self, a: usize) -> usize {
        if self.p == Prime::TWO {
            return a;
        }
        let p = self.p.as_usize();
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            let d = (p - a % p) % p;
            out += d * place;
            place *= p;
            a /= p;
        }
        out
    }

    /// Precomputed addition table, `table[a * size + b] = a + b`.
    pub fn addition_table(&self) -> Vec<u32> {
        let size = self.size();
        let mut t = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                t.push(self.add_idx(a, b) as u32);
            }
        }
        t
    }

    pub fn add(&self, a: &[u8], b: &[u8]) -> Vector {
        a.iter().zip(b).map(|(&x, &y)| self.p.add(x, y)).collect()
    }

    pub fn scale(&self, c: u8, a: &[u8]) -> Vector {
        a.iter().map(|&x| self.p.mul(c, x)).collect()
    }

    pub fn unit(&self, i: usize) -> Vector {
        let mut v = vec![0u8; self.n];
        v[i] = 1;
        v
    }
}

/// A linear form `x -> sum_i coeffs[i] x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub coeffs: Vec<u8>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<u8>) -> LinearForm {
        LinearForm { coeffs }
    }

    pub fn zero(n: usize) -> LinearForm {
        LinearForm { coeffs: vec![0; n] }
    }

    pub fn eval(&self, p: Prime, x: &[u8]) -> u8 {
        p.dot(&self.coeffs, x)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// A subspace of F_p^n stored canonically: its basis is in reduced echelon
/// form and so are the linear forms cutting it out. Two equal subspaces have
/// equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    pub p: Prime,
    pub n: usize,
    basis: Vec<Vector>,
    vanishing: Vec<LinearForm>,
}

impl Subspace {
    pub fn full(p: Prime, n: usize) -> Subspace {
        Subspace::span(p, n, (0..n).map(|i| Space::new(p, n).unit(i)).collect()).unwrap()
    }

    pub fn zero(p: Prime, n: usize) -> Subspace {
        Subspace::span(p, n, Vec::new()).unwrap()
    }

    /// Span of the given vectors.
    pub fn span(p: Prime, n: usize, vectors: Vec<Vector>) -> Result<Subspace> {
        for v in &vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let mut basis: Vec<Vector> = vectors.into_iter().filter(|v| v.iter().any(|&c| c != 0)).collect();
        field::rref(p, &mut basis);
        let vanishing = field::null_space(p, &basis, n).into_iter().map(LinearForm::new).collect();
        Ok(Subspace { p, n, basis, vanishing })
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn vanishing_forms(&self) -> &[LinearForm] {
        &self.vanishing
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.basis.len()
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.vanishing.iter().all(|a| a.eval(self.p, v) == 0)
    }

    /// Pivot coordinates of the echelon basis.
    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.iter().position(|&c| c != 0).unwrap()).collect()
    }

    /// Intersection with another subspace of the same ambient space.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let rows: Vec<Vec<u8>> =
            self.vanishing.iter().chain(&other.vanishing).map(|a| a.coeffs.clone()).collect();
        kernel(self.p, self.n, &rows.into_iter().map(LinearForm::new).collect::<Vec<_>>()).unwrap()
    }

    /// Vector with the given coordinates in the echelon basis.
    pub fn combine(&self, coords: &[u8]) -> Vector {
        let mut v = vec![0u8; self.n];
        for (b, &c) in self.basis.iter().zip(coords) {
            if c != 0 {
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = self.p.add(*vi, self.p.mul(c, bi));
                }
            }
        }
        v
    }

    /// Coordinates of `v` in the echelon basis, or `None` if `v` is not in the subspace.
    pub fn coordinates(&self, v: &[u8]) -> Option<Vec<u8>> {
        if !self.contains(v) {
            return None;
        }
        // In reduced echelon form the coordinate on basis vector i is the entry at its pivot.
        Some(self.pivots().iter().map(|&c| v[c]).collect())
    }
}

/// Common zero set of the given linear forms.
pub fn kernel(p: Prime, n: usize, rows: &[LinearForm]) -> Result<Subspace> {
    for r in rows {
        if r.coeffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r.coeffs.len() });
        }
    }
    let m: Vec<Vec<u8>> = rows.iter().map(|r| r.coeffs.clone()).collect();
    let basis = field::null_space(p, &m, n);
    Subspace::span(p, n, basis)
}

/// The complement spanned by the standard basis vectors at the non-pivot
/// coordinates of `u`'s echelon basis.
pub fn complement(u: &Subspace) -> Subspace {
    let space = Space::new(u.p, u.n);
    let pivots = u.pivots();
    let vectors = (0..u.n).filter(|c| !pivots.contains(c)).map(|c| space.unit(c)).collect();
    Subspace::span(u.p, u.n, vectors).unwrap()
}

/// Every element of `space`, lexicographic in the basis coefficients (the
/// last coefficient varies fastest).
pub fn enumerate(space: &Subspace, cap: u128) -> Result<Vec<Vector>> {
    coset_shift(space, &vec![0; space.n], cap)
}

/// Every element of `x0 + space`, in the order of [`enumerate`].
pub fn coset_shift(space: &Subspace, x0: &[u8], cap: u128) -> Result<Vec<Vector>> {
    if x0.len() != space.n {
        return Err(Error::DimensionMismatch { expected: space.n, got: x0.len() });
    }
    let coeff_space = Space::new(space.p, space.dim());
    coeff_space.check_budget(1, cap)?;
    Ok((0..coeff_space.size())
        .map(|i| {
            let v = space.combine(&coeff_space.vector(i));
            v.iter().zip(x0).map(|(&a, &b)| space.p.add(a, b)).collect()
        })
        .collect())
}

/// Writes `p=<p> n=<n>` followed by one vector per line. For `n = 0` the
/// lines are blank and do not survive [`parse_vectors`].
pub fn format_vectors(p: Prime, n: usize, vectors: &[Vector]) -> String {
    let mut s = format!("p={} n={}\n", p, n);
    for v in vectors {
        let line: Vec<String> = v.iter().map(|d| d.to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Parses the format written by [`format_vectors`].
pub fn parse_vectors(text: &str) -> Result<(Prime, usize, Vec<Vector>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let mut p = None;
    let mut n = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("p=") {
            p = v.parse::<u64>().ok();
        } else if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse::<usize>().ok();
        }
    }
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.into() };
    let p = Prime::new(p.ok_or_else(|| bad("missing p="))?)?;
    let n = n.ok_or_else(|| bad("missing n="))?;
    let mut out = Vec::new();
    for (ln, line) in lines {
        let v: Vector = line
            .split_whitespace()
            .map(|t| t.parse::<u8>().ok().filter(|&d| d < p.get()))
            .collect::<Option<_>>()
            .ok_or(Error::Parse { line: ln + 1, msg: "bad digit".into() })?;
        if v.len() != n {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected {n} coordinates") });
        }
        out.push(v);
    }
    Ok((p, n, out))
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_vectors(self.p, self.n, &self.basis))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CAP: u128 = DEFAULT_ENUMERATION_CAP;

    #[test]
    fn kernel_examples() {
        let p = Prime::TWO;
        let u = kernel(p, 2, &[LinearForm::new(vec![1, 0])]).unwrap();
        assert_eq!(u.basis(), &[vec![0, 1]]);
        let full = kernel(p, 2, &[]).unwrap();
        assert_eq!(full.codim(), 0);
        let p3 = Prime::THREE;
        let u = kernel(p3, 3, &[LinearForm::new(vec![1, 1, 0]), LinearForm::new(vec![0, 1, 1])]).unwrap();
        assert_eq!(u.basis(), &[vec![1, 2, 1]]);
        // exhaustive oracle over all 27 vectors
        let sp = Space::new(p3, 3);
        let zeros: Vec<Vector> = (0..27)
            .map(|i| sp.vector(i))
            .filter(|v| (v[0] + v[1]) % 3 == 0 && (v[1] + v[2]) % 3 == 0)
            .collect();
        assert_eq!(zeros.len(), 3);
        assert!(zeros.iter().all(|v| u.contains(v)));
    }

    #[test]
    fn kernel_rejects_ragged_rows() {
        assert!(kernel(Prime::TWO, 2, &[LinearForm::new(vec![1])]).is_err());
    }

    #[test]
    fn complement_examples() {
        let p = Prime::TWO;
        assert_eq!(complement(&Subspace::zero(p, 3)), Subspace::full(p, 3));
        assert_eq!(complement(&Subspace::full(p, 3)), Subspace::zero(p, 3));
        let u = Subspace::span(p, 2, vec![vec![1, 1]]).unwrap();
        assert_eq!(complement(&u).basis(), &[vec![0, 1]]);
    }

    #[test]
    fn enumeration_order_and_size() {
        let p = Prime::THREE;
        let u = Subspace::full(p, 2);
        let all = enumerate(&u, CAP).unwrap();
        assert_eq!(all.len(), 9);
        assert_eq!(&all[..3], &[vec![0, 0], vec![0, 1], vec![0, 2]]);
        assert_eq!(enumerate(&Subspace::zero(p, 2), CAP).unwrap(), vec![vec![0, 0]]);
        assert_eq!(enumerate(&Subspace::full(Prime::TWO, 3), CAP).unwrap().len(), 8);
        assert!(enumerate(&Subspace::full(Prime::TWO, 5), 16).is_err());
    }

    #[test]
    fn coset_examples() {
        let p = Prime::TWO;
        let u = Subspace::span(p, 2, vec![vec![1, 0]]).unwrap();
        assert_eq!(coset_shift(&u, &[0, 1], CAP).unwrap(), vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(coset_shift(&Subspace::zero(p, 2), &[1, 1], CAP).unwrap(), vec![vec![1, 1]]);
        assert_eq!(coset_shift(&u, &[0, 0], CAP).unwrap(), enumerate(&u, CAP).unwrap());
    }

    fn random_subspace(rng: &mut ChaCha8Rng, p: Prime, n: usize) -> Subspace {
        let m = rng.gen_range(0..=n + 1);
        let vs = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..p.get())).collect()).collect();
        Subspace::span(p, n, vs).unwrap()
    }

    #[test]
    fn random_subspaces_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, nmax) in [(Prime::TWO, 6), (Prime::THREE, 4)] {
            for n in 1..=nmax {
                for _ in 0..100 {
                    let u = random_subspace(&mut rng, p, n);
                    assert_eq!(u.dim() + u.vanishing_forms().len(), n);
                    for b in u.basis() {
                        assert!(u.vanishing_forms().iter().all(|a| a.eval(p, b) == 0));
                    }
                    let w = complement(&u);
                    let mut both: Vec<Vec<u8>> = u.basis().iter().chain(w.basis()).cloned().collect();
                    assert_eq!(field::rank(p, &both), n, "U + W = V");
                    both.truncate(u.dim());
                    assert_eq!(u.dim() + w.dim(), n);
                    assert_eq!(u.intersect(&w).dim(), 0);
                    if n <= 4 {
                        let elems = enumerate(&u, CAP).unwrap();
                        let mut sorted = elems.clone();
                        sorted.sort();
                        sorted.dedup();
                        assert_eq!(sorted.len(), (p.get() as usize).pow(u.dim() as u32));
                    }
                }
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let p = Prime::THREE;
        let u = Subspace::span(p, 3, vec![vec![1, 2, 0], vec![0, 1, 1]]).unwrap();
        for v in enumerate(&u, CAP).unwrap() {
            assert_eq!(u.combine(&u.coordinates(&v).unwrap()), v);
        }
        assert!(u.coordinates(&[0, 0, 1]).is_none() || u.contains(&[0, 0, 1]));
    }

    #[test]
    fn text_format_round_trip() {
        let p = Prime::THREE;
        let vs = vec![vec![1, 2, 0], vec![0, 0, 2]];
        let text = format_vectors(p, 3, &vs);
        assert_eq!(parse_vectors(&text).unwrap(), (p, 3, vs));
        assert!(parse_vectors("p=3 n=2\n1 3\n").is_err());
    }

    #[test]
    fn index_arithmetic() {
        let sp = Space::new(Prime::FIVE, 3);
        for a in [0, 7, 31, 124] {
            for b in [0, 3, 88] {
                let s = sp.add(&sp.vector(a), &sp.vector(b));
                assert_eq!(sp.index(&s), sp.add_idx(a, b));
                assert_eq!(sp.add_idx(sp.sub_idx(a, b), b), a);
            }
        }
    }
}
