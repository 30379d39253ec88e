//! Multilinear and multiaffine forms over F_p as dense coefficient tensors.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{self, Prime};
use crate::fpspace::{Space, Subspace};
use crate::ncpoly::NcPoly;
use crate::torus::TorusValue;

/// Largest supported arity.
pub const MAX_ARITY: usize = 4;
/// Largest number of stored coefficients, `n^k`.
pub const MAX_COEFFS: usize = 1 << 24;

/// `T(x_1, ..., x_k) = sum T[j_1..j_k] x_{1,j_1} ... x_{k,j_k}`.
///
/// Coefficients are stored with `j_1` most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultilinearForm {
    p: Prime,
    n: usize,
    k: usize,
    coeffs: Vec<u8>,
}

/// Bilinear forms are the `k = 2` case; `T[i][j]` is the matrix entry.
pub type BilinearForm = MultilinearForm;

fn tensor_len(n: usize, k: usize) -> Result<usize> {
    if k > MAX_ARITY {
        return Err(Error::Precondition(format!("arity {k} exceeds {MAX_ARITY}")));
    }
    match n.checked_pow(k as u32) {
        Some(len) if len <= MAX_COEFFS => Ok(len),
        _ => Err(Error::BudgetExceeded { needed: (n as u128).pow(k as u32), cap: MAX_COEFFS as u128 }),
    }
}

/// Multiplicity vector `i(j)` of an index tuple.
pub fn multiplicities(n: usize, j: &[usize]) -> Vec<usize> {
    let mut m = vec![0; n];
    for &t in j {
        m[t] += 1;
    }
    m
}

/// The reduced pattern `i'`: zero stays zero, otherwise the representative
/// in `1..=p-1` modulo `p-1`.
pub fn reduced_pattern(p: Prime, mult: &[usize]) -> Vec<usize> {
    let q = p.as_usize() - 1;
    mult.iter().map(|&i| if i == 0 { 0 } else { (i - 1) % q + 1 }).collect()
}

impl MultilinearForm {
    pub fn zero(p: Prime, n: usize, k: usize) -> Result<MultilinearForm> {
        Ok(MultilinearForm { p, n, k, coeffs: vec![0; tensor_len(n, k)?] })
    }

    pub fn new(p: Prime, n: usize, k: usize, coeffs: Vec<u8>) -> Result<MultilinearForm> {
        let len = tensor_len(n, k)?;
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: coeffs.len() });
        }
        if coeffs.iter().any(|&c| c >= p.get()) {
            return Err(Error::Precondition("coefficient outside F_p".into()));
        }
        Ok(MultilinearForm { p, n, k, coeffs })
    }

    pub fn from_fn(p: Prime, n: usize, k: usize, mut f: impl FnMut(&[usize]) -> u8) -> Result<MultilinearForm> {
        let mut t = MultilinearForm::zero(p, n, k)?;
        for idx in 0..t.coeffs.len() {
            let j = t.tuple(idx);
            t.coeffs[idx] = f(&j) % p.get();
        }
        Ok(t)
    }

    /// Product of linear forms `l_1(x_1) ... l_k(x_k)`.
    pub fn product(p: Prime, factors: &[&[u8]]) -> Result<MultilinearForm> {
        let n = factors.first().map_or(0, |f| f.len());
        MultilinearForm::from_fn(p, n, factors.len(), |j| {
            j.iter().zip(factors).fold(1, |acc, (&t, f)| p.mul(acc, f[t]))
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Index tuple of a flat position.
    pub fn tuple(&self, mut idx: usize) -> Vec<usize> {
        let mut j = vec![0; self.k];
        for s in (0..self.k).rev() {
            j[s] = idx % self.n.max(1);
            idx /= self.n.max(1);
        }
        j
    }

    pub fn flat(&self, j: &[usize]) -> usize {
        j.iter().fold(0, |acc, &t| acc * self.n + t)
    }

    pub fn get(&self, j: &[usize]) -> u8 {
        self.coeffs[self.flat(j)]
    }

    pub fn set(&mut self, j: &[usize], c: u8) {
        let i = self.flat(j);
        self.coeffs[i] = c % self.p.get();
    }

    fn check_args(&self, args: &[&[u8]]) -> Result<()> {
        if args.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: args.len() });
        }
        if let Some(a) = args.iter().find(|a| a.len() != self.n) {
            return Err(Error::DimensionMismatch { expected: self.n, got: a.len() });
        }
        Ok(())
    }

    pub fn eval(&self, args: &[&[u8]]) -> Result<u8> {
        self.check_args(args)?;
        Ok(self.eval_unchecked(args))
    }

    /// Evaluation by contracting the last slot repeatedly.
    pub fn eval_unchecked(&self, args: &[&[u8]]) -> u8 {
        let p = self.p.get() as u32;
        if self.n == 0 {
            return if self.k == 0 { self.coeffs[0] } else { 0 };
        }
        let mut cur: Vec<u32> = self.coeffs.iter().map(|&c| c as u32).collect();
        for s in (0..self.k).rev() {
            let x = args[s];
            cur = cur.chunks(self.n).map(|ch| ch.iter().zip(x).map(|(&c, &v)| c * v as u32).sum::<u32>() % p).collect();
        }
        cur.first().map_or(0, |&c| (c % p) as u8)
    }

    /// Fixes slot `slot` to `x`, leaving a form of arity `k - 1`.
    pub fn contract(&self, slot: usize, x: &[u8]) -> MultilinearForm {
        let p = self.p;
        let inner = self.n.pow((self.k - 1 - slot) as u32);
        let outer = self.n.pow(slot as u32);
        let mut out = vec![0u8; outer * inner];
        for o in 0..outer {
            for i in 0..inner {
                let mut acc = 0u32;
                for (t, &xv) in x.iter().enumerate() {
                    acc += self.coeffs[(o * self.n + t) * inner + i] as u32 * xv as u32;
                }
                out[o * inner + i] = (acc % p.get() as u32) as u8;
            }
        }
        MultilinearForm { p, n: self.n, k: self.k - 1, coeffs: out }
    }

    /// Rows of the matrix of a bilinear form.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        assert_eq!(self.k, 2);
        self.coeffs.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    /// `S(x_1..x_k) = T(x_{pi(1)}, ..., x_{pi(k)})` (0-based permutation).
    pub fn permute(&self, pi: &[usize]) -> Result<MultilinearForm> {
        if pi.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: pi.len() });
        }
        let mut seen = vec![false; self.k];
        for &s in pi {
            if s >= self.k || seen[s] {
                return Err(Error::Precondition(format!("{pi:?} is not a permutation")));
            }
            seen[s] = true;
        }
        MultilinearForm::from_fn(self.p, self.n, self.k, |j| {
            let i: Vec<usize> = pi.iter().map(|&s| j[s]).collect();
            self.get(&i)
        })
    }

    pub fn transpose(&self) -> MultilinearForm {
        self.permute(&[1, 0]).expect("bilinear transpose")
    }

    fn zip(&self, other: &MultilinearForm, f: impl Fn(u8, u8) -> u8) -> Result<MultilinearForm> {
        if (self.p, self.n) != (other.p, other.n) {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        if self.k != other.k {
            return Err(Error::ArityMismatch { expected: self.k, got: other.k });
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Ok(MultilinearForm { coeffs, ..self.clone() })
    }

    pub fn add(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        let p = self.p;
        self.zip(other, |a, b| p.add(a, b))
    }

    pub fn sub(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        let p = self.p;
        self.zip(other, |a, b| p.sub(a, b))
    }

    pub fn scale(&self, c: u8) -> MultilinearForm {
        let p = self.p;
        MultilinearForm { coeffs: self.coeffs.iter().map(|&a| p.mul(a, c)).collect(), ..self.clone() }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.coeffs.len()).all(|idx| {
            let mut j = self.tuple(idx);
            j.sort_unstable();
            self.coeffs[idx] == self.get(&j)
        })
    }

    /// Symmetric, and coefficients agree on index tuples with equal `i'`
    /// patterns. Only tuples whose multiplicities differ by multiples of
    /// `p - 1` can share a pattern, which needs `k >= p + 1`, so the
    /// condition is automatically vacuous for `k <= p`.
    pub fn is_ncsm(&self) -> bool {
        self.ncsm_violation().is_none()
    }

    /// First pair of sorted index tuples violating the nCSM condition.
    pub fn ncsm_violation(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        if !self.is_symmetric() {
            return Some((vec![], vec![]));
        }
        let mut seen: std::collections::HashMap<Vec<usize>, (Vec<usize>, u8)> = Default::default();
        for j in sorted_tuples(self.n, self.k) {
            let pat = reduced_pattern(self.p, &multiplicities(self.n, &j));
            let c = self.get(&j);
            match seen.get(&pat) {
                Some((j0, c0)) if *c0 != c => return Some((j0.clone(), j)),
                Some(_) => {}
                None => {
                    seen.insert(pat, (j, c));
                }
            }
        }
        None
    }

    /// nCSM, and every coefficient with some multiplicity `>= p` vanishes.
    pub fn is_csm(&self) -> bool {
        self.is_ncsm()
            && sorted_tuples(self.n, self.k)
                .all(|j| self.get(&j) == 0 || multiplicities(self.n, &j).iter().all(|&i| i < self.p.as_usize()))
    }

    /// Coordinates of `T` in the basis `u_1, ..., u_d` of `U`.
    pub fn restrict(&self, u: &Subspace) -> Result<MultilinearForm> {
        if u.basis().first().is_some_and(|b| b.len() != self.n) {
            return Err(Error::DimensionMismatch { expected: self.n, got: u.basis()[0].len() });
        }
        let cols: Vec<Vec<u8>> = (0..self.n).map(|t| u.basis().iter().map(|b| b[t]).collect()).collect();
        self.substitute(&cols, u.dim())
    }

    /// `S[a] = sum_j T[j] prod_s m[j_s][a_s]`, i.e. substitute `x_s = M y_s`
    /// where `m` is `n x d`.
    pub fn substitute(&self, m: &[Vec<u8>], d: usize) -> Result<MultilinearForm> {
        let p = self.p.get() as u32;
        let len = tensor_len(d, self.k)?;
        // contract slot by slot, most significant first; each step replaces
        // one n-index by a d-index
        let mut cur: Vec<u32> = self.coeffs.iter().map(|&c| c as u32).collect();
        let mut dims = vec![self.n; self.k];
        for s in 0..self.k {
            let outer: usize = dims[..s].iter().product();
            let inner: usize = dims[s + 1..].iter().product();
            let mut next = vec![0u32; outer * d * inner];
            for o in 0..outer {
                for (t, row) in m.iter().enumerate() {
                    for (a, &mv) in row.iter().enumerate() {
                        if mv == 0 {
                            continue;
                        }
                        let src = (o * self.n + t) * inner;
                        let dst = (o * d + a) * inner;
                        for i in 0..inner {
                            next[dst + i] = (next[dst + i] + cur[src + i] * mv as u32) % p;
                        }
                    }
                }
            }
            dims[s] = d;
            cur = next;
        }
        debug_assert_eq!(cur.len(), len);
        MultilinearForm::new(self.p, d, self.k, cur.into_iter().map(|c| c as u8).collect())
    }

    /// Extension of a form given in `U`-coordinates to `V = U + W`:
    /// `S(u_1 + w_1, ...) = S_U(u_1, ...)`.
    pub fn extend(&self, u: &Subspace, w: &Subspace) -> Result<MultilinearForm> {
        let n = u.basis().first().or(w.basis().first()).map_or(0, |b| b.len());
        if self.n != u.dim() {
            return Err(Error::DimensionMismatch { expected: u.dim(), got: self.n });
        }
        if u.dim() + w.dim() != n || u.intersect(w).dim() != 0 {
            return Err(Error::Precondition("U and W are not complementary".into()));
        }
        let mut rows: Vec<Vec<u8>> = u.basis().to_vec();
        rows.extend(w.basis().iter().cloned());
        let inv = field::inverse(self.p, &rows).ok_or_else(|| Error::Internal("singular basis".into()))?;
        // v = c B  =>  c_a = sum_t v_t inv[t][a]; keep the U-coordinates a < dim U
        let m: Vec<Vec<u8>> = (0..u.dim()).map(|a| (0..n).map(|t| inv[t][a]).collect()).collect();
        let s = self.substitute(&m, n)?;
        if self.is_symmetric() && !s.is_symmetric() {
            return Err(Error::Internal("extension lost symmetry".into()));
        }
        if self.is_ncsm() && !s.is_ncsm() {
            return Err(Error::Internal("extension lost nCSM membership".into()));
        }
        if self.is_csm() && !s.is_csm() {
            return Err(Error::Internal("extension lost CSM membership".into()));
        }
        Ok(s)
    }

    /// Symmetrization by averaging over the six slot permutations (p = 5).
    pub fn green_tao_average(&self) -> Result<MultilinearForm> {
        if self.k != 3 {
            return Err(Error::ArityMismatch { expected: 3, got: self.k });
        }
        if self.p.get() % 2 == 0 || self.p.get() % 3 == 0 {
            return Err(Error::Precondition(format!("6 is not invertible in F_{}", self.p)));
        }
        let mut acc = MultilinearForm::zero(self.p, self.n, 3)?;
        for pi in PERMS3 {
            acc = acc.add(&self.permute(&pi)?)?;
        }
        Ok(acc.scale(self.p.inv(6 % self.p.get())))
    }

    /// Lines of the form file format, one per nonzero coefficient, using
    /// `mask` as the slot mask and 1-based indices.
    fn write_lines(&self, mask: usize, out: &mut String) {
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let j: Vec<String> = self.tuple(idx).iter().map(|t| (t + 1).to_string()).collect();
                let sep = if j.is_empty() { "" } else { " " };
                out.push_str(&format!("{mask}{sep}{} : {c}\n", j.join(" ")));
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.p, self.n, self.k);
        self.write_lines((1 << self.k) - 1, &mut s);
        s
    }

    pub fn parse(text: &str) -> Result<MultilinearForm> {
        let phi = MultiaffineForm::parse(text)?;
        if phi.components.iter().enumerate().any(|(mask, c)| mask != phi.full_mask() && !c.is_zero()) {
            return Err(Error::Parse { line: 0, msg: "multilinear form has lower-order components".into() });
        }
        Ok(phi.multilinear_part())
    }
}

impl fmt::Display for MultilinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = ['x', 'y', 'z', 'w'];
        let mut terms = Vec::new();
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let mono: String = self.tuple(idx).iter().enumerate().map(|(s, t)| format!("{}{}", vars[s], t + 1)).collect();
                terms.push(if c == 1 && !mono.is_empty() { mono } else { format!("{c}{mono}") });
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// All permutations of three slots.
pub const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Nondecreasing index tuples of length `k` over `0..n`.
pub fn sorted_tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if n == 0 && k > 0 { None } else { Some(vec![0; k]) };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = k;
        cur = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            if next[i] + 1 < n {
                let v = next[i] + 1;
                for t in next[i..].iter_mut() {
                    *t = v;
                }
                break Some(next);
            }
        };
        Some(out)
    })
}

/// Checks the defining identities by direct evaluation: symmetry, then for
/// every `h_1..h_{k-p+1}` that `T(h_1^p, h_2, ..) = T(h_1, h_2^p, ..)` (when
/// there are at least two free variables) and, if `classical`, that
/// `T(h_1^p, h_2, ..) = 0` (at least one free variable). Here `h^p` means
/// `h` repeated `p` times.
pub fn ncsm_by_evaluation(t: &MultilinearForm, classical: bool, cap: u128) -> Result<bool> {
    let p = t.prime();
    let k = t.arity();
    if !t.is_symmetric() {
        return Ok(false);
    }
    let free = (k + 1).saturating_sub(p.as_usize());
    let space = Space::new(p, t.dim());
    space.check_budget(free, cap)?;
    let count = space.size().pow(free as u32);
    for code in 0..count {
        let mut c = code;
        let hs: Vec<Vec<u8>> = (0..free)
            .map(|_| {
                let v = space.vector(c % space.size());
                c /= space.size();
                v
            })
            .collect();
        let args_with = |rep: usize| -> Vec<&[u8]> {
            let mut a: Vec<&[u8]> = Vec::new();
            for (i, h) in hs.iter().enumerate() {
                let times = if i == rep { p.as_usize() } else { 1 };
                for _ in 0..times {
                    a.push(h);
                }
            }
            a
        };
        if classical && free >= 1 && t.eval_unchecked(&args_with(0)) != 0 {
            return Ok(false);
        }
        if free >= 2 && t.eval_unchecked(&args_with(0)) != t.eval_unchecked(&args_with(1)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `d^k P(h_1, ..., h_k) = (Delta_{h_1} ... Delta_{h_k} P)(0)` as a form over F_p.
pub fn total_derivative(poly: &NcPoly, k: usize) -> Result<MultilinearForm> {
    let p = poly.prime();
    let n = poly.dim();
    if poly.degree() > k {
        return Err(Error::Precondition(format!("degree {} exceeds {k}", poly.degree())));
    }
    let space = Space::new(p, n);
    let table = poly.value_table();
    let alt = |hs: &[usize]| -> TorusValue {
        let mut acc = TorusValue::zero(p);
        for s in 0..(1usize << hs.len()) {
            let mut idx = 0;
            for (b, &h) in hs.iter().enumerate() {
                if s >> b & 1 == 1 {
                    idx = space.add_idx(idx, h);
                }
            }
            let v = table[idx];
            acc = if (hs.len() - s.count_ones() as usize) % 2 == 0 { acc + v } else { acc - v };
        }
        acc
    };
    let units: Vec<usize> = (0..n).map(|t| space.index(&space.unit(t))).collect();
    let mut t = MultilinearForm::zero(p, n, k)?;
    for idx in 0..t.coeffs.len() {
        let j = t.tuple(idx);
        let hs: Vec<usize> = j.iter().map(|&s| units[s]).collect();
        let v = alt(&hs);
        t.coeffs[idx] = v.to_fp().map_err(|e| Error::Internal(format!("total derivative off the 1/p grid: {e}")))?;
    }
    // spot-check multilinearity and base-point independence on a few tuples
    if space.size() > 1 {
        for trial in 0..4usize {
            let hs: Vec<usize> = (0..k).map(|s| (trial * 7 + s * 5 + 1) % space.size()).collect();
            let args: Vec<Vec<u8>> = hs.iter().map(|&h| space.vector(h)).collect();
            let refs: Vec<&[u8]> = args.iter().map(|a| a.as_slice()).collect();
            let x = (trial * 3 + 2) % space.size();
            let mut at_x = TorusValue::zero(p);
            for s in 0..(1usize << k) {
                let mut idx = x;
                for (b, &h) in hs.iter().enumerate() {
                    if s >> b & 1 == 1 {
                        idx = space.add_idx(idx, h);
                    }
                }
                let v = table[idx];
                at_x = if (k - s.count_ones() as usize) % 2 == 0 { at_x + v } else { at_x - v };
            }
            if alt(&hs) != TorusValue::from_fp(p, t.eval_unchecked(&refs)) || at_x != alt(&hs) {
                return Err(Error::Internal("total derivative is not multilinear".into()));
            }
        }
    }
    Ok(t)
}

/// A map `V^k -> F_p` affine in each slot, stored as one multilinear
/// component per slot subset (bit `s` of the mask is slot `s`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiaffineForm {
    p: Prime,
    n: usize,
    k: usize,
    components: Vec<MultilinearForm>,
}

impl MultiaffineForm {
    pub fn zero(p: Prime, n: usize, k: usize) -> Result<MultiaffineForm> {
        let components = (0..1usize << k)
            .map(|mask| MultilinearForm::zero(p, n, (mask as u32).count_ones() as usize))
            .collect::<Result<_>>()?;
        Ok(MultiaffineForm { p, n, k, components })
    }

    /// From one component per slot mask; component `mask` has arity
    /// `popcount(mask)`.
    pub fn from_components(p: Prime, n: usize, k: usize, components: Vec<MultilinearForm>) -> Result<MultiaffineForm> {
        let mut phi = MultiaffineForm::zero(p, n, k)?;
        if components.len() != 1 << k {
            return Err(Error::ArityMismatch { expected: 1 << k, got: components.len() });
        }
        for (mask, c) in components.into_iter().enumerate() {
            phi.set_component(mask, c)?;
        }
        Ok(phi)
    }

    pub fn from_multilinear(t: &MultilinearForm) -> MultiaffineForm {
        let mut phi = MultiaffineForm::zero(t.p, t.n, t.k).expect("arity already validated");
        let full = phi.full_mask();
        phi.components[full] = t.clone();
        phi
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn full_mask(&self) -> usize {
        (1 << self.k) - 1
    }

    pub fn component(&self, mask: usize) -> &MultilinearForm {
        &self.components[mask]
    }

    pub fn set_component(&mut self, mask: usize, t: MultilinearForm) -> Result<()> {
        let want = (mask as u32).count_ones() as usize;
        if t.k != want || t.n != self.n || t.p != self.p {
            return Err(Error::ArityMismatch { expected: want, got: t.k });
        }
        self.components[mask] = t;
        Ok(())
    }

    pub fn eval(&self, args: &[&[u8]]) -> Result<u8> {
        if args.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: args.len() });
        }
        let mut acc = 0;
        for (mask, c) in self.components.iter().enumerate() {
            let sub: Vec<&[u8]> = (0..self.k).filter(|s| mask >> s & 1 == 1).map(|s| args[s]).collect();
            acc = self.p.add(acc, c.eval(&sub)?);
        }
        Ok(acc)
    }

    pub fn multilinear_part(&self) -> MultilinearForm {
        self.components[self.full_mask()].clone()
    }

    pub fn add(&self, other: &MultiaffineForm) -> Result<MultiaffineForm> {
        if other.k != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: other.k });
        }
        let components =
            self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(MultiaffineForm { components, ..self.clone() })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} affine\n", self.p, self.n, self.k);
        for (mask, c) in self.components.iter().enumerate() {
            c.write_lines(mask, &mut s);
        }
        s
    }

    /// Parses the form file format; plain multilinear files are accepted too.
    pub fn parse(text: &str) -> Result<MultiaffineForm> {
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.into() };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (l0, header) = lines.next().ok_or_else(|| perr(0, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if !(h.len() == 3 || (h.len() == 4 && h[3] == "affine")) {
            return Err(perr(l0, "header must be `p n k [affine]`"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| perr(l0, "bad header number"));
        let p = Prime::new(num(h[0])? as u64)?;
        let n = num(h[1])?;
        let k = num(h[2])?;
        let affine = h.len() == 4;
        let mut phi = MultiaffineForm::zero(p, n, k)?;
        for (ln, line) in lines {
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| perr(ln, "expected `:`"))?;
            let c: u64 = rhs.trim().parse().map_err(|_| perr(ln, "bad coefficient"))?;
            let v: Vec<usize> =
                lhs.split_whitespace().map(|t| t.parse().map_err(|_| perr(ln, "bad index"))).collect::<Result<_>>()?;
            let (&mask, js) = v.split_first().ok_or_else(|| perr(ln, "missing mask"))?;
            if mask > phi.full_mask() || (!affine && mask != phi.full_mask()) {
                return Err(perr(ln, "mask out of range"));
            }
            if js.len() != mask.count_ones() as usize || js.iter().any(|&j| j == 0 || j > n) {
                return Err(perr(ln, "index count or range does not match mask"));
            }
            let j: Vec<usize> = js.iter().map(|&j| j - 1).collect();
            let comp = &mut phi.components[mask];
            let cur = comp.get(&j);
            comp.set(&j, p.add(cur, (c % p.get() as u64) as u8));
        }
        Ok(phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpspace::Subspace;
    use crate::ncpoly::{random_poly, Monomial};

    fn form(p: Prime, n: usize, k: usize, entries: &[(&[usize], u8)]) -> MultilinearForm {
        let mut t = MultilinearForm::zero(p, n, k).unwrap();
        for (j, c) in entries {
            t.set(j, *c);
        }
        t
    }

    fn symmetric(p: Prime, n: usize, k: usize, entries: &[(&[usize], u8)]) -> MultilinearForm {
        let mut t = MultilinearForm::zero(p, n, k).unwrap();
        for (j, c) in entries {
            for pi in PERMS3.iter().filter(|_| k == 3) {
                let q: Vec<usize> = pi.iter().map(|&s| j[s]).collect();
                t.set(&q, *c);
            }
        }
        t
    }

    #[test]
    fn eval_examples() {
        let t = form(Prime::TWO, 1, 3, &[(&[0, 0, 0], 1)]);
        assert_eq!(t.eval(&[&[1], &[1], &[1]]).unwrap(), 1);
        assert_eq!(t.eval(&[&[0], &[1], &[1]]).unwrap(), 0);
        let b = form(Prime::THREE, 2, 2, &[(&[0, 1], 1)]);
        assert_eq!(b.eval(&[&[1, 0], &[0, 2]]).unwrap(), 2);
        assert!(b.eval(&[&[1, 0]]).is_err());
    }

    #[test]
    fn permute_examples() {
        let t = form(Prime::TWO, 2, 2, &[(&[0, 1], 1)]);
        assert_eq!(t.permute(&[0, 1]).unwrap(), t);
        assert_eq!(t.permute(&[1, 0]).unwrap(), form(Prime::TWO, 2, 2, &[(&[1, 0], 1)]));
        let t3 = MultilinearForm::from_fn(Prime::THREE, 2, 3, |j| (j[0] * 3 + j[1] * 2 + j[2] + 1) as u8).unwrap();
        for pi in PERMS3 {
            for sigma in PERMS3 {
                let lhs = t3.permute(&pi).unwrap().permute(&sigma).unwrap();
                let comp: Vec<usize> = (0..3).map(|s| sigma[pi[s]]).collect();
                assert_eq!(lhs, t3.permute(&comp).unwrap());
            }
        }
    }

    #[test]
    fn predicate_examples() {
        let z = MultilinearForm::zero(Prime::TWO, 2, 3).unwrap();
        assert!(z.is_symmetric() && z.is_ncsm() && z.is_csm());
        let t = symmetric(Prime::TWO, 2, 3, &[(&[0, 0, 1], 1)]);
        assert!(t.is_symmetric());
        assert!(!t.is_ncsm());
        // T(e1,e1,e2) = 1 but T(e1,e2,e2) = 0
        assert_ne!(t.eval(&[&[1, 0], &[1, 0], &[0, 1]]).unwrap(), t.eval(&[&[1, 0], &[0, 1], &[0, 1]]).unwrap());
        let s = form(Prime::THREE, 1, 3, &[(&[0, 0, 0], 1)]);
        assert!(s.is_symmetric() && s.is_ncsm() && !s.is_csm());
    }

    #[test]
    fn predicates_agree_with_evaluation_exhaustively() {
        for code in 0..256u32 {
            let t = MultilinearForm::from_fn(Prime::TWO, 2, 3, |j| (code >> (j[0] * 4 + j[1] * 2 + j[2]) & 1) as u8)
                .unwrap();
            assert_eq!(t.is_ncsm(), ncsm_by_evaluation(&t, false, 1 << 24).unwrap(), "{t}");
            assert_eq!(t.is_csm(), ncsm_by_evaluation(&t, true, 1 << 24).unwrap(), "{t}");
            assert!(!t.is_csm() || t.is_ncsm());
            assert!(!t.is_ncsm() || t.is_symmetric());
        }
        for (p, n, k, seeds) in [(Prime::THREE, 2, 3, 300u64), (Prime::TWO, 2, 4, 300), (Prime::THREE, 1, 4, 81)] {
            for seed in 0..seeds {
                // random symmetric tensors, half of them built from derivatives
                let t = if seed % 2 == 0 {
                    total_derivative(&random_poly(p, n, k, seed % 4 == 0, seed), k).unwrap()
                } else {
                    let mut vals = std::collections::HashMap::new();
                    MultilinearForm::from_fn(p, n, k, |j| {
                        let mut s = j.to_vec();
                        s.sort_unstable();
                        let h = s.iter().fold(seed, |a, &v| a.wrapping_mul(31).wrapping_add(v as u64 + 7));
                        *vals.entry(s).or_insert((h >> 3) as u8 % p.get())
                    })
                    .unwrap()
                };
                assert_eq!(t.is_ncsm(), ncsm_by_evaluation(&t, false, 1 << 24).unwrap(), "p={p} {t}");
                assert_eq!(t.is_csm(), ncsm_by_evaluation(&t, true, 1 << 24).unwrap(), "p={p} {t}");
            }
        }
    }

    #[test]
    fn total_derivative_examples() {
        let p = Prime::TWO;
        let q = NcPoly::new(p, 1, TorusValue::zero(p), vec![Monomial { exps: vec![1], depth: 1, coeff: 1 }]).unwrap();
        assert_eq!(total_derivative(&q, 2).unwrap(), form(p, 1, 2, &[(&[0, 0], 1)]));
        let xy = NcPoly::classical_monomial(p, vec![1, 1], 1).unwrap();
        assert_eq!(total_derivative(&xy, 2).unwrap(), form(p, 2, 2, &[(&[0, 1], 1), (&[1, 0], 1)]));
        assert!(total_derivative(&xy, 3).unwrap().is_zero());
        assert!(total_derivative(&xy, 1).is_err());
    }

    #[test]
    fn total_derivative_membership_and_linearity() {
        for seed in 0..200u64 {
            for (p, n, k) in [(Prime::TWO, 3, 3), (Prime::THREE, 2, 3), (Prime::TWO, 2, 4)] {
                let c = random_poly(p, n, k, false, seed);
                assert!(total_derivative(&c, k).unwrap().is_csm());
                let nc = random_poly(p, n, k, true, seed + 1000);
                let d = total_derivative(&nc, k).unwrap();
                assert!(d.is_ncsm());
                let low = random_poly(p, n, k - 1, true, seed + 2000);
                assert!(total_derivative(&low, k).unwrap().is_zero());
                let sum = nc.add(&c).unwrap();
                assert_eq!(total_derivative(&sum, k).unwrap(), d.add(&total_derivative(&c, k).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn restrict_and_extend() {
        let p = Prime::TWO;
        let t = form(p, 2, 2, &[(&[0, 0], 1), (&[0, 1], 1)]);
        assert_eq!(t.restrict(&Subspace::full(p, 2)).unwrap(), t);
        assert_eq!(t.restrict(&Subspace::zero(p, 2)).unwrap().dim(), 0);
        let u = Subspace::span(p, 2, vec![vec![1, 1]]).unwrap();
        let r = t.restrict(&u).unwrap();
        assert_eq!(r.coeffs(), &[0]);
        let p3 = Prime::THREE;
        let u = Subspace::span(p3, 3, vec![vec![1, 2, 0], vec![0, 1, 1]]).unwrap();
        let w = crate::fpspace::complement(&u);
        let su = symmetric(p3, 2, 3, &[(&[0, 0, 1], 2), (&[1, 1, 1], 1)]);
        let s = su.extend(&u, &w).unwrap();
        assert_eq!(s.restrict(&u).unwrap(), su);
        assert!(s.is_symmetric());
        for wv in w.basis() {
            assert_eq!(s.eval(&[wv, &[1, 1, 1], &[2, 0, 1]]).unwrap(), 0);
        }
        assert_eq!(su.extend(&Subspace::full(p3, 2), &Subspace::zero(p3, 2)).unwrap(), su);
    }

    #[test]
    fn multiaffine_parts() {
        let p = Prime::TWO;
        let mut phi = MultiaffineForm::zero(p, 1, 3).unwrap();
        phi.set_component(7, form(p, 1, 3, &[(&[0, 0, 0], 1)])).unwrap();
        phi.set_component(3, form(p, 1, 2, &[(&[0, 0], 1)])).unwrap();
        phi.set_component(0, form(p, 1, 0, &[(&[], 1)])).unwrap();
        assert_eq!(phi.multilinear_part(), form(p, 1, 3, &[(&[0, 0, 0], 1)]));
        assert_eq!(phi.eval(&[&[1], &[1], &[0]]).unwrap(), 0);
        assert_eq!(MultiaffineForm::parse(&phi.to_text()).unwrap(), phi);
        // the alternating sum over all slot subsets isolates the multilinear part
        let space = Space::new(p, 1);
        for code in 0..64usize {
            let v: Vec<Vec<u8>> = (0..6).map(|b| space.vector(code >> b & 1)).collect();
            let mut acc = 0u8;
            for s in 0..8usize {
                let args: Vec<&[u8]> = (0..3).map(|i| if s >> i & 1 == 1 { &v[i][..] } else { &v[i + 3][..] }).collect();
                acc = p.add(acc, phi.eval(&args).unwrap());
            }
            let diff: Vec<Vec<u8>> = (0..3).map(|i| space.add(&v[i], &space.scale(1, &v[i + 3]))).collect();
            let refs: Vec<&[u8]> = diff.iter().map(|d| d.as_slice()).collect();
            assert_eq!(acc, phi.multilinear_part().eval(&refs).unwrap());
        }
    }

    #[test]
    fn green_tao_average_examples() {
        let p = Prime::FIVE;
        let t = form(p, 3, 3, &[(&[0, 1, 2], 1)]);
        let s = t.green_tao_average().unwrap();
        assert!(s.is_symmetric());
        assert_eq!(s.get(&[2, 1, 0]), p.inv(6 % 5));
        assert_eq!(s.green_tao_average().unwrap(), s);
        assert!(form(Prime::THREE, 1, 3, &[]).green_tao_average().is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = form(Prime::THREE, 2, 3, &[(&[0, 1, 1], 2), (&[1, 0, 0], 1)]);
        assert_eq!(MultilinearForm::parse(&t.to_text()).unwrap(), t);
        assert!(MultilinearForm::parse("2 2 2\n3 1 3 : 1\n").is_err());
    }
}
#[cfg(test)]
mod extension_tests {
    use super::*;
    use crate::fpspace::{complement, Subspace};
    use rand::{Rng, SeedableRng};

    #[test]
    fn extension_restricts_back() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = if rng.gen_bool(0.5) { Prime::TWO } else { Prime::THREE };
            let n = rng.gen_range(1..=4);
            let d = rng.gen_range(0..=n);
            let vs: Vec<Vec<u8>> = (0..d).map(|_| (0..n).map(|_| rng.gen_range(0..p.get())).collect()).collect();
            let u = Subspace::span(p, n, vs).unwrap();
            let w = complement(&u);
            let su = MultilinearForm::from_fn(p, u.dim(), 2, |_| rng.gen_range(0..p.get())).unwrap();
            let s = su.extend(&u, &w).unwrap();
            assert_eq!(s.restrict(&u).unwrap(), su);
            for wv in w.basis() {
                let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..p.get())).collect();
                assert_eq!(s.eval(&[wv, &x]).unwrap(), 0);
            }
        }
    }
}
