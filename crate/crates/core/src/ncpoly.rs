//! Non-classical polynomials `P: F_p^n -> R/Z`.
//!
//! A polynomial of degree at most `k` has a unique expansion
//!
//! ```text
//! P(x) = alpha + sum c_{i,j} |x_1|^{i_1} ... |x_n|^{i_n} / p^{j+1}   (mod 1)
//! ```
//!
//! over exponent tuples `0 <= i_l < p` and depths `j >= 0` with
//! `0 < i_1 + ... + i_n <= k - j(p-1)`, coefficients `c` in `{0, ..., p-1}`.
//! Here `|.|` lifts `F_p` to `{0, ..., p-1}`. Operations that change the
//! polynomial (derivatives, sums, shifts) work on value tables and then
//! recover the expansion with [`interpolate`].

use std::cmp::Reverse;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::fpspace::Space;
use crate::torus::TorusValue;

/// Largest monomial depth `j` the crate represents.
pub const MAX_DEPTH: u32 = 6;

/// `coeff * |x_1|^{exps[0]} ... |x_n|^{exps[n-1]} / p^{depth+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub exps: Vec<u8>,
    pub depth: u32,
    pub coeff: u8,
}

impl Monomial {
    pub fn degree(&self, p: Prime) -> usize {
        self.exps.iter().map(|&e| e as usize).sum::<usize>() + self.depth as usize * (p.as_usize() - 1)
    }

    fn sort_key(&self, p: Prime) -> (Reverse<usize>, Vec<u8>, u32) {
        (Reverse(self.degree(p)), self.exps.clone(), self.depth)
    }

    /// Numerator of the value at `x` over the denominator `p^den_depth`.
    fn numerator_at(&self, p: Prime, x: &[u8], den_depth: u32) -> u64 {
        let modulus = (p.get() as u64).pow(den_depth);
        let mut prod = self.coeff as u64;
        for (&xi, &e) in x.iter().zip(&self.exps) {
            for _ in 0..e {
                prod = prod * xi as u64 % modulus;
            }
        }
        prod * (p.get() as u64).pow(den_depth - self.depth - 1) % modulus
    }
}

/// Exponent/depth pairs `(i, j)` of the canonical basis for degree `<= k`.
/// With `depth_allowed == false` only `j = 0` (the classical basis).
pub fn basis_tuples(p: Prime, n: usize, k: usize, depth_allowed: bool) -> Vec<(Vec<u8>, u32)> {
    let space = Space::new(p, n);
    let mut out = Vec::new();
    for j in 0..=MAX_DEPTH {
        if !depth_allowed && j > 0 {
            break;
        }
        let shift = j as usize * (p.as_usize() - 1);
        if shift >= k.max(1) && j > 0 {
            break;
        }
        for idx in 1..space.size() {
            let exps = space.vector(idx);
            let s: usize = exps.iter().map(|&e| e as usize).sum();
            if s + shift <= k {
                out.push((exps, j));
            }
        }
    }
    out
}

/// A non-classical polynomial in its canonical expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NcPoly {
    p: Prime,
    n: usize,
    constant: TorusValue,
    monomials: Vec<Monomial>,
}

impl NcPoly {
    pub fn zero(p: Prime, n: usize) -> NcPoly {
        NcPoly { p, n, constant: TorusValue::zero(p), monomials: Vec::new() }
    }

    pub fn constant(p: Prime, n: usize, alpha: TorusValue) -> NcPoly {
        NcPoly { p, n, constant: alpha, monomials: Vec::new() }
    }

    /// Builds a polynomial from canonical data. Monomials with zero
    /// coefficient are dropped; duplicates and out-of-range data are rejected.
    pub fn new(p: Prime, n: usize, constant: TorusValue, monomials: Vec<Monomial>) -> Result<NcPoly> {
        let mut ms: Vec<Monomial> = Vec::with_capacity(monomials.len());
        for m in monomials {
            if m.exps.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.exps.len() });
            }
            if m.exps.iter().any(|&e| e >= p.get()) || m.coeff >= p.get() || m.depth > MAX_DEPTH {
                return Err(Error::Precondition(format!("monomial out of range: {m:?}")));
            }
            if m.exps.iter().all(|&e| e == 0) {
                return Err(Error::Precondition("monomial with zero exponent sum".into()));
            }
            if m.coeff != 0 {
                ms.push(m);
            }
        }
        ms.sort_by_key(|m| m.sort_key(p));
        if ms.windows(2).any(|w| w[0].exps == w[1].exps && w[0].depth == w[1].depth) {
            return Err(Error::Precondition("duplicate monomial".into()));
        }
        Ok(NcPoly { p, n, constant, monomials: ms })
    }

    /// Sum of arbitrary (possibly repeated) terms, canonicalized through the
    /// value table.
    pub fn from_terms(p: Prime, n: usize, constant: TorusValue, terms: &[Monomial]) -> Result<NcPoly> {
        let space = Space::new(p, n);
        let mut table = vec![constant; space.size()];
        for t in terms {
            let single = NcPoly::new(p, n, TorusValue::zero(p), vec![t.clone()])?;
            for (idx, v) in table.iter_mut().enumerate() {
                *v = *v + single.evaluate_unchecked(&space.vector(idx));
            }
        }
        let bound = terms.iter().map(|t| t.degree(p)).max().unwrap_or(0);
        interpolate(p, n, &table, bound)
    }

    /// The classical monomial `c * x^exps` viewed in `(1/p)Z/Z`.
    pub fn classical_monomial(p: Prime, exps: Vec<u8>, coeff: u8) -> Result<NcPoly> {
        let n = exps.len();
        NcPoly::new(p, n, TorusValue::zero(p), vec![Monomial { exps, depth: 0, coeff }])
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn constant_term(&self) -> TorusValue {
        self.constant
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// Largest denominator exponent appearing in any value.
    pub fn value_depth(&self) -> u32 {
        self.monomials.iter().map(|m| m.depth + 1).max().unwrap_or(0).max(self.constant.depth())
    }

    fn evaluate_unchecked(&self, x: &[u8]) -> TorusValue {
        let d = self.value_depth();
        if d == 0 {
            return TorusValue::zero(self.p);
        }
        let modulus = (self.p.get() as u64).pow(d);
        let mut acc = self.constant.numerator_at(d);
        for m in &self.monomials {
            acc = (acc + m.numerator_at(self.p, x, d)) % modulus;
        }
        TorusValue::new(self.p, acc as i64, d)
    }

    pub fn evaluate(&self, x: &[u8]) -> Result<TorusValue> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Values on all of F_p^n in index order.
    pub fn value_table(&self) -> Vec<TorusValue> {
        let space = Space::new(self.p, self.n);
        (0..space.size()).map(|i| self.evaluate_unchecked(&space.vector(i))).collect()
    }

    /// Numerators of the value table over `p^depth`, `depth >= value_depth()`.
    pub fn numerator_table(&self, depth: u32) -> Vec<u64> {
        self.value_table().iter().map(|v| v.numerator_at(depth)).collect()
    }

    /// `max (i_1 + ... + i_n) + j(p-1)` over the monomials; 0 for constants.
    pub fn degree(&self) -> usize {
        self.monomials.iter().map(|m| m.degree(self.p)).max().unwrap_or(0)
    }

    pub fn is_classical(&self) -> bool {
        self.monomials.iter().all(|m| m.depth == 0) && self.constant.depth() <= 1
    }

    /// `x -> P(x + h) - P(x)`.
    pub fn add_derivative(&self, h: &[u8]) -> Result<NcPoly> {
        if h.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: h.len() });
        }
        let space = Space::new(self.p, self.n);
        let table = self.value_table();
        let hi = space.index(h);
        let diff: Vec<TorusValue> = (0..space.size()).map(|x| table[space.add_idx(x, hi)] - table[x]).collect();
        interpolate(self.p, self.n, &diff, self.degree())
    }

    /// Pointwise sum.
    pub fn add(&self, other: &NcPoly) -> Result<NcPoly> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &NcPoly) -> Result<NcPoly> {
        self.combine(other, |a, b| a - b)
    }

    pub fn neg(&self) -> NcPoly {
        let table: Vec<TorusValue> = self.value_table().into_iter().map(|v| -v).collect();
        interpolate(self.p, self.n, &table, self.degree()).expect("negation preserves degree")
    }

    fn combine(&self, other: &NcPoly, op: impl Fn(TorusValue, TorusValue) -> TorusValue) -> Result<NcPoly> {
        if other.n != self.n || other.p != self.p {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let a = self.value_table();
        let b = other.value_table();
        let t: Vec<TorusValue> = a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect();
        interpolate(self.p, self.n, &t, self.degree().max(other.degree()))
    }

    /// Same polynomial without its constant term.
    pub fn without_constant(&self) -> NcPoly {
        NcPoly { constant: TorusValue::zero(self.p), ..self.clone() }
    }

    /// Text form: `p n k`, `const a/b`, then `i_1 .. i_n j c` per monomial.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\nconst {}\n", self.p, self.n, self.degree(), self.constant);
        for m in &self.monomials {
            let mut parts: Vec<String> = m.exps.iter().map(|e| e.to_string()).collect();
            parts.push(m.depth.to_string());
            parts.push(m.coeff.to_string());
            s.push_str(&parts.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<NcPoly> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.into() };
        let (l0, header) = lines.next().ok_or_else(|| perr(0, "missing header"))?;
        let h: Vec<u64> =
            header.split_whitespace().map(|t| t.parse().map_err(|_| perr(l0, "bad header"))).collect::<Result<_>>()?;
        if h.len() != 3 {
            return Err(perr(l0, "header must be `p n k`"));
        }
        let p = Prime::new(h[0])?;
        let n = h[1] as usize;
        let k = h[2] as usize;
        let (l1, cline) = lines.next().ok_or_else(|| perr(l0 + 1, "missing const line"))?;
        let cval = cline.trim().strip_prefix("const").ok_or_else(|| perr(l1, "expected `const`"))?;
        let constant = TorusValue::parse(p, cval.trim()).map_err(|_| perr(l1, "bad constant"))?;
        let mut ms = Vec::new();
        for (ln, line) in lines {
            let v: Vec<u32> =
                line.split_whitespace().map(|t| t.parse().map_err(|_| perr(ln, "bad number"))).collect::<Result<_>>()?;
            if v.len() != n + 2 {
                return Err(perr(ln, "monomial line needs n + 2 numbers"));
            }
            ms.push(Monomial { exps: v[..n].iter().map(|&e| e as u8).collect(), depth: v[n], coeff: v[n + 1] as u8 });
        }
        let poly = NcPoly::new(p, n, constant, ms)?;
        if poly.degree() > k {
            return Err(Error::Precondition(format!("declared degree {k} but monomials have degree {}", poly.degree())));
        }
        Ok(poly)
    }
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for m in &self.monomials {
            write!(f, " + {}", m.coeff)?;
            for (l, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    write!(f, "|x{}|", l + 1)?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
            write!(f, "/{}", (self.p.get() as u64).pow(m.depth + 1))?;
        }
        Ok(())
    }
}

/// Inverse of the Vandermonde matrix `[t^i]_{t,i < p}` modulo `p^depth`.
/// Its determinant is a product of differences of distinct residues, hence a
/// unit, so the inverse exists for every depth.
fn vandermonde_inverse(p: Prime, depth: u32) -> Vec<Vec<i64>> {
    let q = p.as_usize();
    let m = (p.get() as i64).pow(depth);
    let mut a: Vec<Vec<i64>> = (0..q)
        .map(|t| {
            let mut row: Vec<i64> = (0..q).map(|i| (t as i64).pow(i as u32) % m).collect();
            row.extend((0..q).map(|j| i64::from(j == t)));
            row
        })
        .collect();
    for c in 0..q {
        let r = (c..q).find(|&r| a[r][c] % p.get() as i64 != 0).expect("Vandermonde pivot is a unit");
        a.swap(c, r);
        let inv = mod_inverse(a[c][c], m);
        for v in a[c].iter_mut() {
            *v = *v * inv % m;
        }
        for r in 0..q {
            if r != c && a[r][c] != 0 {
                let f = a[r][c];
                for j in 0..2 * q {
                    a[r][j] = (a[r][j] - f * a[c][j]).rem_euclid(m);
                }
            }
        }
    }
    // inverse maps values (indexed by t) to coefficients (indexed by i)
    a.into_iter().map(|row| row[q..].to_vec()).collect::<Vec<_>>()
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let a = a.rem_euclid(m);
    (1..m).find(|&b| a * b % m == 1).expect("unit modulo p^depth")
}

/// Recovers the canonical expansion from a value table (indexed as in
/// [`Space`]). Fails with a nonzero `(k+1)`-fold difference as witness if the
/// table is not a polynomial of degree at most `k`.
pub fn interpolate(p: Prime, n: usize, table: &[TorusValue], k: usize) -> Result<NcPoly> {
    let space = Space::new(p, n);
    if table.len() != space.size() {
        return Err(Error::DimensionMismatch { expected: space.size(), got: table.len() });
    }
    let depth = table.iter().map(|v| v.depth()).max().unwrap_or(0);
    if depth == 0 {
        return Ok(NcPoly::zero(p, n));
    }
    if depth > MAX_DEPTH + 1 {
        return Err(not_polynomial(p, n, table, k));
    }
    let modulus = (p.get() as i64).pow(depth);
    let vinv = vandermonde_inverse(p, depth);
    let q = p.as_usize();
    let mut a: Vec<i64> = table.iter().map(|v| v.numerator_at(depth) as i64).collect();
    // apply the inverse along each coordinate axis
    for axis in 0..n {
        let stride = q.pow((n - 1 - axis) as u32);
        let block = stride * q;
        let mut line = vec![0i64; q];
        for base in (0..a.len()).step_by(block) {
            for off in 0..stride {
                for t in 0..q {
                    line[t] = a[base + off + t * stride];
                }
                for i in 0..q {
                    let s: i64 = (0..q).map(|t| vinv[i][t] * line[t]).sum();
                    a[base + off + i * stride] = s.rem_euclid(modulus);
                }
            }
        }
    }
    let constant = TorusValue::new(p, a[0], depth);
    let mut monomials = Vec::new();
    for (idx, &coef) in a.iter().enumerate().skip(1) {
        let exps = space.vector(idx);
        let mut rest = coef as u64;
        for t in 0..depth {
            let digit = (rest % p.get() as u64) as u8;
            rest /= p.get() as u64;
            if digit != 0 {
                let m = Monomial { exps: exps.clone(), depth: depth - 1 - t, coeff: digit };
                if m.degree(p) > k || m.depth > MAX_DEPTH {
                    return Err(not_polynomial(p, n, table, k));
                }
                monomials.push(m);
            }
        }
    }
    NcPoly::new(p, n, constant, monomials)
}

fn not_polynomial(p: Prime, n: usize, table: &[TorusValue], k: usize) -> Error {
    let witness = match difference_witness(p, n, table, k + 1) {
        Some(w) => w.to_string(),
        None => "no witness found among standard-basis directions".into(),
    };
    Error::NotPolynomial { bound: k, witness }
}

/// A nonzero iterated difference `Delta_{e_{s_1}} ... Delta_{e_{s_m}} P (x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceWitness {
    /// Standard-basis directions (0-based coordinates), nondecreasing.
    pub directions: Vec<usize>,
    pub point: Vec<u8>,
    pub value: TorusValue,
}

impl fmt::Display for DifferenceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hs: Vec<String> = self.directions.iter().map(|d| format!("e{}", d + 1)).collect();
        write!(f, "h=({}) x={:?} difference={}", hs.join(","), self.point, self.value)
    }
}

/// `m`-fold difference of a table along standard-basis directions.
pub fn iterated_difference(p: Prime, n: usize, table: &[TorusValue], directions: &[usize]) -> Vec<TorusValue> {
    let space = Space::new(p, n);
    let mut t = table.to_vec();
    for &d in directions {
        let h = space.index(&space.unit(d));
        t = (0..t.len()).map(|x| t[space.add_idx(x, h)] - t[x]).collect();
    }
    t
}

/// Searches standard-basis direction multisets of size `m` (in lexicographic
/// order) and all points for a nonzero `m`-fold difference. Every difference
/// along arbitrary directions is a sum of shifted differences along basis
/// directions, so `None` means all `m`-fold differences vanish.
pub fn difference_witness(p: Prime, n: usize, table: &[TorusValue], m: usize) -> Option<DifferenceWitness> {
    if n == 0 {
        return None;
    }
    let space = Space::new(p, n);
    let mut dirs = vec![0usize; m];
    loop {
        let diff = iterated_difference(p, n, table, &dirs);
        if let Some(x) = diff.iter().position(|v| !v.is_zero()) {
            return Some(DifferenceWitness { directions: dirs, point: space.vector(x), value: diff[x] });
        }
        // next nondecreasing sequence
        let mut i = m;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if dirs[i] + 1 < n {
                let v = dirs[i] + 1;
                for d in dirs[i..].iter_mut() {
                    *d = v;
                }
                break;
            }
        }
    }
}

/// Degree computed only from the table: the least `k` whose `(k+1)`-fold
/// differences all vanish.
pub fn degree_by_differencing(p: Prime, n: usize, table: &[TorusValue]) -> usize {
    let max = (p.as_usize() - 1) * (n + MAX_DEPTH as usize) + 1;
    (0..=max).find(|&k| difference_witness(p, n, table, k + 1).is_none()).unwrap_or(max)
}

/// Uniformly random canonical polynomial of degree at most `k`.
/// The constant term is uniform on the finest grid the basis uses.
pub fn random_poly(p: Prime, n: usize, k: usize, depth_allowed: bool, seed: u64) -> NcPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_poly_with(p, n, k, depth_allowed, &mut rng)
}

pub fn random_poly_with<R: Rng>(p: Prime, n: usize, k: usize, depth_allowed: bool, rng: &mut R) -> NcPoly {
    let tuples = basis_tuples(p, n, k, depth_allowed);
    let const_depth = tuples.iter().map(|(_, j)| j + 1).max().unwrap_or(1);
    let constant = TorusValue::new(p, rng.gen_range(0..(p.get() as i64).pow(const_depth)), const_depth);
    let monomials = tuples
        .into_iter()
        .map(|(exps, depth)| Monomial { exps, depth, coeff: rng.gen_range(0..p.get()) })
        .collect();
    NcPoly::new(p, n, constant, monomials).expect("basis tuples are canonical")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(exps: &[u8], depth: u32, coeff: u8) -> Monomial {
        Monomial { exps: exps.to_vec(), depth, coeff }
    }

    #[test]
    fn evaluate_examples() {
        let p = Prime::TWO;
        let zero = NcPoly::zero(p, 2);
        assert!(zero.evaluate(&[1, 1]).unwrap().is_zero());
        let q = NcPoly::new(p, 1, TorusValue::zero(p), vec![mono(&[1], 1, 1)]).unwrap();
        assert_eq!(q.evaluate(&[1]).unwrap(), TorusValue::new(p, 1, 2));
        let r = NcPoly::new(p, 2, TorusValue::zero(p), vec![mono(&[1, 1], 0, 1), mono(&[1, 0], 1, 1)]).unwrap();
        assert_eq!(r.evaluate(&[1, 1]).unwrap(), TorusValue::new(p, 3, 2));
        assert!(r.evaluate(&[1]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let p = Prime::TWO;
        let c = NcPoly::constant(p, 1, TorusValue::new(p, 1, 3));
        assert_eq!(c.add_derivative(&[1]).unwrap(), NcPoly::zero(p, 1));
        let q = NcPoly::new(p, 1, TorusValue::zero(p), vec![mono(&[1], 1, 1)]).unwrap();
        let d = q.add_derivative(&[1]).unwrap();
        assert_eq!(d.evaluate(&[0]).unwrap(), TorusValue::new(p, 1, 2));
        assert_eq!(d.evaluate(&[1]).unwrap(), TorusValue::new(p, 3, 2));
        let expected = NcPoly::new(p, 1, TorusValue::new(p, 1, 2), vec![mono(&[1], 0, 1)]).unwrap();
        assert_eq!(d, expected);
        let xy = NcPoly::classical_monomial(p, vec![1, 1], 1).unwrap();
        assert_eq!(xy.add_derivative(&[1, 0]).unwrap(), NcPoly::classical_monomial(p, vec![0, 1], 1).unwrap());
    }

    #[test]
    fn degree_examples() {
        let p = Prime::TWO;
        assert_eq!(NcPoly::constant(p, 1, TorusValue::new(p, 1, 2)).degree(), 0);
        let q4 = NcPoly::new(p, 1, TorusValue::zero(p), vec![mono(&[1], 1, 1)]).unwrap();
        assert_eq!(q4.degree(), 2);
        let q8 = NcPoly::new(p, 1, TorusValue::zero(p), vec![mono(&[1], 2, 1)]).unwrap();
        assert_eq!(q8.degree(), 3);
        assert_eq!(degree_by_differencing(p, 1, &q8.value_table()), 3);
    }

    #[test]
    fn classicality() {
        let p3 = Prime::THREE;
        assert!(NcPoly::classical_monomial(p3, vec![2, 1], 1).unwrap().is_classical());
        let p = Prime::TWO;
        assert!(!NcPoly::new(p, 1, TorusValue::zero(p), vec![mono(&[1], 1, 1)]).unwrap().is_classical());
    }

    #[test]
    fn interpolate_examples() {
        let p = Prime::TWO;
        assert_eq!(interpolate(p, 2, &[TorusValue::zero(p); 4], 3).unwrap(), NcPoly::zero(p, 2));
        let table = vec![TorusValue::zero(p), TorusValue::new(p, 1, 2)];
        let q = interpolate(p, 1, &table, 2).unwrap();
        assert_eq!(q.monomials(), &[mono(&[1], 1, 1)]);
        // x1 x2 is not linear: the witness is the second difference along e1, e2
        let xy = NcPoly::classical_monomial(p, vec![1, 1], 1).unwrap();
        match interpolate(p, 2, &xy.value_table(), 1) {
            Err(Error::NotPolynomial { witness, .. }) => assert!(witness.starts_with("h=(e1,e2) x=[0, 0]"), "{witness}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn basis_count_matches_tuple_enumeration() {
        // p=2, n=2, k=3: j=0 gives 3, j=1 gives 3, j=2 gives 2
        let t = basis_tuples(Prime::TWO, 2, 3, true);
        assert_eq!(t.len(), 8);
        let r = random_poly(Prime::TWO, 2, 3, true, 11);
        assert!(r.monomials().len() <= 8);
        assert_eq!(random_poly(Prime::TWO, 2, 3, true, 11), r);
        assert!(random_poly(Prime::THREE, 2, 0, true, 3).monomials().is_empty());
    }

    #[test]
    fn round_trip_and_degree_drop() {
        let mut seed = 0;
        for (p, nmax, kmax) in [(Prime::TWO, 3, 4), (Prime::THREE, 2, 3)] {
            for n in 1..=nmax {
                for k in 0..=kmax {
                    for _ in 0..200 {
                        seed += 1;
                        let poly = random_poly(p, n, k, true, seed);
                        let table = poly.value_table();
                        assert_eq!(interpolate(p, n, &table, poly.degree()).unwrap(), poly);
                        assert!(difference_witness(p, n, &table, k + 1).is_none());
                        if seed % 10 == 0 {
                            let space = Space::new(p, n);
                            let h = space.vector(1 + seed as usize % (space.size() - 1));
                            let d = poly.add_derivative(&h).unwrap();
                            assert!(d.degree() + 1 <= poly.degree().max(1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn classical_values_on_grid() {
        for seed in 0..50 {
            let poly = random_poly(Prime::THREE, 2, 4, false, seed);
            assert!(poly.is_classical());
            assert!(poly.value_table().iter().all(|v| v.depth() <= 1));
        }
    }

    #[test]
    fn text_round_trip() {
        let poly = random_poly(Prime::TWO, 3, 3, true, 5);
        assert_eq!(NcPoly::parse(&poly.to_text()).unwrap(), poly);
        assert!(NcPoly::parse("2 1 1\nconst 0/1\n1 1 1\n").is_err());
    }
}
