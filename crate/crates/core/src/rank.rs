//! Analytic rank, matrix rank and certified partition-rank decompositions.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::field::{self, Prime};
use crate::fpspace::{self, Space, Subspace, DEFAULT_ENUMERATION_CAP};
use crate::mforms::MultilinearForm;
use crate::par::{self, Exec};

/// Exact bias `E omega^{T(h_1..h_k)}` and `arank = -log_p(bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRank {
    pub bias: BigRational,
    pub arank: f64,
}

impl AnalyticRank {
    fn from_bias(p: Prime, bias: BigRational) -> AnalyticRank {
        let arank = -bias.to_f64().unwrap_or(0.0).ln() / (p.get() as f64).ln();
        AnalyticRank { bias, arank: if arank == 0.0 { 0.0 } else { arank } }
    }

    /// `ceil(arank)`, exactly: the least `r` with `bias * p^r >= 1`.
    pub fn ceil(&self, p: Prime) -> usize {
        let mut r = 0;
        let mut v = self.bias.clone();
        let one = BigRational::one();
        while v < one {
            v *= BigRational::from_integer(BigInt::from(p.get()));
            r += 1;
        }
        r
    }
}

pub fn pow_p(p: Prime, e: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(p.get()).pow(e as u32))
}

/// Bias via the slice identity: for `k >= 2`, fixing the first `k - 2`
/// slots leaves a bilinear form `B` with `E omega^B = p^{-rank B}`.
pub fn analytic_rank(t: &MultilinearForm, exec: Exec) -> Result<AnalyticRank> {
    analytic_rank_with_cap(t, DEFAULT_ENUMERATION_CAP, exec)
}

pub fn analytic_rank_with_cap(t: &MultilinearForm, cap: u128, exec: Exec) -> Result<AnalyticRank> {
    let p = t.prime();
    let k = t.arity();
    let bias = match k {
        0 => {
            if !t.is_zero() {
                return Err(Error::Precondition("bias of a nonzero constant is not real".into()));
            }
            BigRational::one()
        }
        1 => {
            if t.is_zero() {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }
        _ => {
            let space = Space::new(p, t.dim());
            space.check_budget(k - 2, cap)?;
            let slices = space.size().pow((k - 2) as u32);
            let n = t.dim();
            let counts = par::map_reduce(
                exec,
                slices,
                vec![0u64; n + 1],
                |code| {
                    let mut m = t.clone();
                    let mut c = code;
                    let mut hs = Vec::with_capacity(k - 2);
                    for _ in 0..k - 2 {
                        hs.push(space.vector(c % space.size()));
                        c /= space.size();
                    }
                    for h in hs.iter().rev() {
                        m = m.contract(0, h);
                    }
                    let mut out = vec![0u64; n + 1];
                    out[field::rank(p, &m.matrix())] += 1;
                    out
                },
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
            let mut num = BigInt::zero();
            for (r, &c) in counts.iter().enumerate() {
                num += BigInt::from(c) * BigInt::from(p.get()).pow((n - r) as u32);
            }
            BigRational::new(num, BigInt::from(p.get()).pow((n * (k - 2) + n) as u32))
        }
    };
    Ok(AnalyticRank::from_bias(p, bias))
}

/// Bias by summing `omega^T` over every tuple. Test oracle for the slice
/// identity.
pub fn bias_naive(t: &MultilinearForm, cap: u128) -> Result<BigRational> {
    let p = t.prime();
    let k = t.arity();
    let space = Space::new(p, t.dim());
    space.check_budget(k, cap)?;
    let total = space.size().pow(k as u32);
    let vectors: Vec<Vec<u8>> = (0..space.size()).map(|i| space.vector(i)).collect();
    let mut counts = vec![0i128; p.as_usize()];
    for code in 0..total {
        let mut c = code;
        let mut args: Vec<&[u8]> = vec![&[]; k];
        for s in (0..k).rev() {
            args[s] = &vectors[c % space.size()];
            c /= space.size();
        }
        counts[t.eval_unchecked(&args) as usize] += 1;
    }
    let sum = Cyclo::from_powers(p, 1, &counts);
    let num = sum.as_integer().ok_or_else(|| Error::Internal("character sum is not an integer".into()))?;
    Ok(BigRational::new(BigInt::from(num), BigInt::from(total)))
}

/// Matrix rank together with both null spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearRank {
    pub rank: usize,
    /// `{x : B(x, .) = 0}`
    pub left_null: Subspace,
    /// `{y : B(., y) = 0}`
    pub right_null: Subspace,
}

pub fn bilinear_rank(b: &MultilinearForm) -> Result<BilinearRank> {
    if b.arity() != 2 {
        return Err(Error::ArityMismatch { expected: 2, got: b.arity() });
    }
    let p = b.prime();
    let n = b.dim();
    let rows = b.matrix();
    let cols = b.transpose().matrix();
    Ok(BilinearRank {
        rank: field::rank(p, &rows),
        left_null: Subspace::span(p, n, field::null_space(p, &cols, n))?,
        right_null: Subspace::span(p, n, field::null_space(p, &rows, n))?,
    })
}

/// One partition-rank-one term `R(x_I) S(x_{[k] \ I})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    /// Bit `s` set when slot `s` belongs to `I`.
    pub mask: usize,
    pub r: MultilinearForm,
    pub s: MultilinearForm,
}

impl Term {
    /// The term as a `k`-linear form.
    pub fn tensor(&self, k: usize) -> Result<MultilinearForm> {
        let p = self.r.prime();
        let n = self.r.dim();
        let inside: Vec<usize> = (0..k).filter(|s| self.mask >> s & 1 == 1).collect();
        let outside: Vec<usize> = (0..k).filter(|s| self.mask >> s & 1 == 0).collect();
        if inside.is_empty() || outside.is_empty() {
            return Err(Error::Precondition(format!("slot set {:#b} is not a proper nonempty subset", self.mask)));
        }
        if self.r.arity() != inside.len() || self.s.arity() != outside.len() {
            return Err(Error::ArityMismatch { expected: inside.len(), got: self.r.arity() });
        }
        MultilinearForm::from_fn(p, n, k, |j| {
            let ji: Vec<usize> = inside.iter().map(|&s| j[s]).collect();
            let jo: Vec<usize> = outside.iter().map(|&s| j[s]).collect();
            p.mul(self.r.get(&ji), self.s.get(&jo))
        })
    }
}

/// A sum of partition-rank-one terms claimed to equal `claimed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCertificate {
    pub terms: Vec<Term>,
    pub claimed: MultilinearForm,
}

/// Outcome of checking a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    /// How the check was carried out.
    pub mode: &'static str,
    /// Basis-vector index tuple where the sum and the claimed form differ.
    pub witness: Option<Vec<usize>>,
}

impl RankCertificate {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sum(&self) -> Result<MultilinearForm> {
        let c = &self.claimed;
        let mut acc = MultilinearForm::zero(c.prime(), c.dim(), c.arity())?;
        for t in &self.terms {
            acc = acc.add(&t.tensor(c.arity())?)?;
        }
        Ok(acc)
    }

    /// Serialized as form files: `certificate p n k m`, then per term a line
    /// `term <mask>` followed by the two factor blocks, then `claimed` and the
    /// claimed form.
    pub fn to_text(&self) -> String {
        let c = &self.claimed;
        let mut s = format!("certificate {} {} {} {}\n", c.prime(), c.dim(), c.arity(), self.terms.len());
        for t in &self.terms {
            s.push_str(&format!("term {}\n", t.mask));
            s.push_str(&t.r.to_text());
            s.push_str(&t.s.to_text());
        }
        s.push_str("claimed\n");
        s.push_str(&c.to_text());
        s
    }

    pub fn parse(text: &str) -> Result<RankCertificate> {
        let perr = |msg: &str| Error::Parse { line: 0, msg: msg.into() };
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')).collect();
        let header: Vec<&str> = lines.first().ok_or_else(|| perr("empty certificate"))?.split_whitespace().collect();
        if header.len() != 5 || header[0] != "certificate" {
            return Err(perr("expected `certificate p n k m`"));
        }
        // split into form blocks at header lines (lines without ':')
        let mut terms = Vec::new();
        let mut claimed = None;
        let mut i = 1;
        let block = |start: usize| -> (String, usize) {
            let mut end = start + 1;
            while end < lines.len() && lines[end].contains(':') {
                end += 1;
            }
            (lines[start..end].join("\n"), end)
        };
        while i < lines.len() {
            let words: Vec<&str> = lines[i].split_whitespace().collect();
            match words.as_slice() {
                ["term", mask] => {
                    let mask: usize = mask.parse().map_err(|_| perr("bad term mask"))?;
                    let (rt, next) = block(i + 1);
                    let (st, next) = block(next);
                    terms.push(Term { mask, r: MultilinearForm::parse(&rt)?, s: MultilinearForm::parse(&st)? });
                    i = next;
                }
                ["claimed"] => {
                    let (ct, next) = block(i + 1);
                    claimed = Some(MultilinearForm::parse(&ct)?);
                    i = next;
                }
                _ => return Err(perr(&format!("unexpected line `{}`", lines[i]))),
            }
        }
        let claimed = claimed.ok_or_else(|| perr("missing claimed form"))?;
        let m: usize = header[4].parse().map_err(|_| perr("bad term count"))?;
        if m != terms.len() {
            return Err(perr("term count does not match header"));
        }
        Ok(RankCertificate { terms, claimed })
    }
}

/// Compares the summed coefficient tensor with the claimed one. Both sides
/// are multilinear, so agreement on basis tuples is agreement everywhere.
pub fn verify_certificate(cert: &RankCertificate) -> Verification {
    let mode = "exact coefficient comparison";
    let sum = match cert.sum() {
        Ok(s) => s,
        Err(_) => return Verification { ok: false, mode, witness: None },
    };
    match sum.coeffs().iter().zip(cert.claimed.coeffs()).position(|(a, b)| a != b) {
        None => Verification { ok: true, mode, witness: None },
        Some(idx) => Verification { ok: false, mode, witness: Some(sum.tuple(idx)) },
    }
}

/// Linear form as a 1-linear form.
fn linear(p: Prime, coeffs: Vec<u8>) -> MultilinearForm {
    let n = coeffs.len();
    MultilinearForm::new(p, n, 1, coeffs).expect("linear form")
}

/// Decomposition of `T` into at most `k * codim U` terms, given that `T`
/// vanishes on `U^k`.
///
/// With a basis `w_1..w_r, u_1..u_d` adapted to `V = W + U` and dual basis
/// `alpha`, every nonzero coefficient of `T` in that basis has some slot
/// indexed by a `w`. Grouping by the first such slot `j` and index `l` gives
/// `alpha_l(x_j) beta_{j,l}(x_{others})`.
pub fn vanishing_decomposition(t: &MultilinearForm, u: &Subspace) -> Result<RankCertificate> {
    let p = t.prime();
    let n = t.dim();
    let k = t.arity();
    if k < 2 {
        return Err(Error::Precondition("partition rank needs arity at least 2".into()));
    }
    let restricted = t.restrict(u)?;
    if let Some(idx) = restricted.coeffs().iter().position(|&c| c != 0) {
        let j = restricted.tuple(idx);
        return Err(Error::Precondition(format!("T does not vanish on U: T(u_{:?}) != 0", j)));
    }
    let w = fpspace::complement(u);
    let r = w.dim();
    let mut basis: Vec<Vec<u8>> = w.basis().to_vec();
    basis.extend(u.basis().iter().cloned());
    let inv = field::inverse(p, &basis).ok_or_else(|| Error::Internal("adapted basis is singular".into()))?;
    // coefficients in the adapted basis: x = sum_a y_a b_a
    let to_new: Vec<Vec<u8>> = (0..n).map(|t| basis.iter().map(|b| b[t]).collect()).collect();
    let tn = t.substitute(&to_new, n)?;
    // y = x B^{-1}, so substituting y_a = sum_t inv[t][a] x_t returns to V
    let back: Vec<Vec<u8>> = (0..n).map(|a| (0..n).map(|t| inv[t][a]).collect()).collect();
    let mut terms = Vec::new();
    for j in 0..k {
        for l in 0..r {
            let beta = MultilinearForm::from_fn(p, n, k - 1, |rest| {
                let mut a = Vec::with_capacity(k);
                a.extend_from_slice(&rest[..j]);
                a.push(l);
                a.extend_from_slice(&rest[j..]);
                if a[..j].iter().any(|&x| x < r) {
                    0
                } else {
                    tn.get(&a)
                }
            })?;
            if beta.is_zero() {
                continue;
            }
            let alpha = linear(p, (0..n).map(|t| inv[t][l]).collect());
            terms.push(Term { mask: 1 << j, r: alpha, s: beta.substitute(&back, n)? });
        }
    }
    let cert = RankCertificate { terms, claimed: t.clone() };
    if !verify_certificate(&cert).ok {
        return Err(Error::Internal("vanishing decomposition does not reproduce T".into()));
    }
    Ok(cert)
}

/// Minimum over slots of the flattening decomposition: with the matrix
/// `M_s[j_s][rest]` of rank `r_s`, `T = sum_l alpha_l(x_s) V_l(x_rest)` over
/// a row basis `V_l`.
pub fn flattening_certificate(t: &MultilinearForm) -> Result<RankCertificate> {
    let p = t.prime();
    let n = t.dim();
    let k = t.arity();
    if k < 2 {
        return Err(Error::Precondition("partition rank needs arity at least 2".into()));
    }
    let mut best: Option<RankCertificate> = None;
    for s in 0..k {
        let mut order: Vec<usize> = vec![s];
        order.extend((0..k).filter(|&x| x != s));
        // slot s moved to the front: u(y) = t(y_{inv...}) with y_0 = x_s
        let mut pi = vec![0; k];
        for (pos, &slot) in order.iter().enumerate() {
            pi[slot] = pos;
        }
        let moved = t.permute(&pi)?;
        let stride = n.pow((k - 1) as u32);
        let rows: Vec<Vec<u8>> = moved.coeffs().chunks(stride.max(1)).take(n).map(|c| c.to_vec()).collect();
        let mut basis = rows.clone();
        let pivots = field::rref(p, &mut basis);
        let mut terms = Vec::new();
        for (v, &pc) in basis.iter().zip(&pivots) {
            let alpha = linear(p, rows.iter().map(|row| row[pc]).collect());
            let beta = MultilinearForm::new(p, n, k - 1, v.clone())?;
            terms.push(Term { mask: 1 << s, r: alpha, s: beta });
        }
        if best.as_ref().is_none_or(|b| terms.len() < b.len()) {
            best = Some(RankCertificate { terms, claimed: t.clone() });
        }
    }
    let cert = best.expect("k >= 2");
    if !verify_certificate(&cert).ok {
        return Err(Error::Internal("flattening certificate does not reproduce T".into()));
    }
    Ok(cert)
}

/// Result of an exact partition-rank search.
#[derive(Debug, Clone, PartialEq)]
pub enum PrankResult {
    Exact { rank: usize, certificate: RankCertificate },
    /// Search exhausted its cap; `lower_bound = ceil(arank)`.
    Unknown { lower_bound: usize, cap: usize },
}

/// All partition-rank-one forms, deduplicated. Slot 0 is always placed in
/// `I` (the roles of `I` and its complement are symmetric) and `R` is scaled
/// to have leading coefficient 1.
pub fn rank_one_generators(p: Prime, n: usize, k: usize) -> Result<Vec<(Term, MultilinearForm)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in (1..(1usize << k) - 1).filter(|m| m & 1 == 1) {
        let ki = mask.count_ones() as usize;
        let len_r = n.pow(ki as u32);
        let len_s = n.pow((k - ki) as u32);
        let space_r = Space::new(p, len_r);
        let space_s = Space::new(p, len_s);
        for ri in 1..space_r.size() {
            let rc = space_r.vector(ri);
            if rc.iter().find(|&&c| c != 0) != Some(&1) {
                continue;
            }
            for si in 1..space_s.size() {
                let term = Term {
                    mask,
                    r: MultilinearForm::new(p, n, ki, rc.clone())?,
                    s: MultilinearForm::new(p, n, k - ki, space_s.vector(si))?,
                };
                let tensor = term.tensor(k)?;
                if seen.insert(tensor.coeffs().to_vec()) {
                    out.push((term, tensor));
                }
            }
        }
    }
    Ok(out)
}

/// Exact partition rank, if at most `cap`.
///
/// When the whole tensor space has at most `budget` elements a breadth-first
/// search from zero labels every tensor with its rank; otherwise iterative
/// deepening over generator sequences in nondecreasing order with memoized
/// failed residuals is used, and running out of `budget` nodes yields
/// `Unknown`.
pub fn prank_search(t: &MultilinearForm, cap: usize, budget: u128) -> Result<PrankResult> {
    let p = t.prime();
    let n = t.dim();
    let k = t.arity();
    if t.is_zero() {
        return Ok(PrankResult::Exact { rank: 0, certificate: RankCertificate { terms: vec![], claimed: t.clone() } });
    }
    if k < 2 {
        return Err(Error::Precondition("partition rank needs arity at least 2".into()));
    }
    let states = p.pow(n.pow(k as u32) as u32).unwrap_or(u128::MAX);
    let gen_count = generator_count(p, n, k);
    if gen_count > budget {
        return unknown(t, cap);
    }
    let gens = rank_one_generators(p, n, k)?;
    if states <= budget {
        let table = PrankTable::build(p, n, k, &gens)?;
        return Ok(match table.certificate(t, &gens) {
            Some(c) if c.len() <= cap => PrankResult::Exact { rank: c.len(), certificate: c },
            _ => unknown(t, cap)?,
        });
    }
    let mut nodes: u128 = 0;
    let mut failed: HashSet<(Vec<u8>, usize, usize)> = HashSet::new();
    for depth in 1..=cap {
        let mut chosen = Vec::new();
        match iddfs(t.coeffs(), depth, 0, &gens, p, &mut chosen, &mut nodes, budget, &mut failed) {
            Some(true) => {
                let terms = chosen.iter().map(|&g| gens[g].0.clone()).collect();
                let certificate = RankCertificate { terms, claimed: t.clone() };
                debug_assert!(verify_certificate(&certificate).ok);
                return Ok(PrankResult::Exact { rank: depth, certificate });
            }
            Some(false) => {}
            None => break,
        }
    }
    unknown(t, cap)
}

fn generator_count(p: Prime, n: usize, k: usize) -> u128 {
    (1..(1usize << k) - 1)
        .filter(|m| m & 1 == 1)
        .map(|mask| {
            let ki = mask.count_ones();
            let a = p.pow(n.pow(ki) as u32).unwrap_or(u128::MAX / 4);
            let b = p.pow(n.pow(k as u32 - ki) as u32).unwrap_or(u128::MAX / 4);
            a.saturating_mul(b)
        })
        .fold(0u128, |x, y| x.saturating_add(y))
}

fn unknown(t: &MultilinearForm, cap: usize) -> Result<PrankResult> {
    let ar = analytic_rank(t, Exec::default())?;
    Ok(PrankResult::Unknown { lower_bound: ar.ceil(t.prime()), cap })
}

#[allow(clippy::too_many_arguments)]
fn iddfs(
    residual: &[u8],
    depth: usize,
    start: usize,
    gens: &[(Term, MultilinearForm)],
    p: Prime,
    chosen: &mut Vec<usize>,
    nodes: &mut u128,
    budget: u128,
    failed: &mut HashSet<(Vec<u8>, usize, usize)>,
) -> Option<bool> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    if depth == 0 {
        return Some(residual.iter().all(|&c| c == 0));
    }
    if failed.contains(&(residual.to_vec(), depth, start)) {
        return Some(false);
    }
    for g in start..gens.len() {
        let next: Vec<u8> = residual.iter().zip(gens[g].1.coeffs()).map(|(&a, &b)| p.sub(a, b)).collect();
        chosen.push(g);
        match iddfs(&next, depth - 1, g, gens, p, chosen, nodes, budget, failed)? {
            true => return Some(true),
            false => {
                chosen.pop();
            }
        }
    }
    failed.insert((residual.to_vec(), depth, start));
    Some(false)
}

/// Breadth-first partition-rank labels for every tensor of a given shape.
pub struct PrankTable {
    p: Prime,
    /// `(rank, parent state, generator)` per state; states are coefficient
    /// tensors read as base-p integers.
    label: HashMap<u64, (usize, u64, usize)>,
}

impl PrankTable {
    pub fn build(p: Prime, n: usize, k: usize, gens: &[(Term, MultilinearForm)]) -> Result<PrankTable> {
        let len = n.pow(k as u32);
        if p.pow(len as u32).is_none_or(|s| s > u64::MAX as u128) {
            return Err(Error::BudgetExceeded { needed: u128::MAX, cap: u64::MAX as u128 });
        }
        let encode = |c: &[u8]| c.iter().fold(0u64, |acc, &d| acc * p.get() as u64 + d as u64);
        let decode = |mut v: u64| {
            let mut c = vec![0u8; len];
            for d in c.iter_mut().rev() {
                *d = (v % p.get() as u64) as u8;
                v /= p.get() as u64;
            }
            c
        };
        let gen_codes: Vec<Vec<u8>> = gens.iter().map(|(_, g)| g.coeffs().to_vec()).collect();
        let mut label = HashMap::new();
        label.insert(0u64, (0usize, 0u64, usize::MAX));
        let mut queue = VecDeque::from([0u64]);
        while let Some(s) = queue.pop_front() {
            let rank = label[&s].0;
            let cur = decode(s);
            for (gi, g) in gen_codes.iter().enumerate() {
                let next: Vec<u8> = cur.iter().zip(g).map(|(&a, &b)| p.add(a, b)).collect();
                let code = encode(&next);
                if let std::collections::hash_map::Entry::Vacant(e) = label.entry(code) {
                    e.insert((rank + 1, s, gi));
                    queue.push_back(code);
                }
            }
        }
        Ok(PrankTable { p, label })
    }

    pub fn rank(&self, t: &MultilinearForm) -> Option<usize> {
        self.label.get(&self.code(t)).map(|l| l.0)
    }

    fn code(&self, t: &MultilinearForm) -> u64 {
        t.coeffs().iter().fold(0u64, |acc, &d| acc * self.p.get() as u64 + d as u64)
    }

    pub fn certificate(&self, t: &MultilinearForm, gens: &[(Term, MultilinearForm)]) -> Option<RankCertificate> {
        let mut s = self.code(t);
        let mut terms = Vec::new();
        loop {
            let &(rank, parent, g) = self.label.get(&s)?;
            if rank == 0 {
                break;
            }
            terms.push(gens[g].0.clone());
            s = parent;
        }
        Some(RankCertificate { terms, claimed: t.clone() })
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }
}

/// `arank(T) <= length` for a verified certificate, checked exactly as
/// `bias * p^length >= 1`.
pub fn arank_below_length(ar: &AnalyticRank, p: Prime, length: usize) -> bool {
    ar.bias.clone() * pow_p(p, length) >= BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn random_form(p: Prime, n: usize, k: usize, rng: &mut ChaCha8Rng) -> MultilinearForm {
        MultilinearForm::from_fn(p, n, k, |_| rng.gen_range(0..p.get())).unwrap()
    }

    #[test]
    fn bias_examples() {
        let p = Prime::TWO;
        let z = MultilinearForm::zero(p, 2, 3).unwrap();
        assert_eq!(analytic_rank(&z, Exec::Sequential).unwrap().bias, rat(1, 1));
        let id = MultilinearForm::from_fn(p, 2, 2, |j| u8::from(j[0] == j[1])).unwrap();
        let ar = analytic_rank(&id, Exec::Sequential).unwrap();
        assert_eq!(ar.bias, rat(1, 4));
        assert!((ar.arank - 2.0).abs() < 1e-12);
        let t = MultilinearForm::from_fn(p, 1, 3, |_| 1).unwrap();
        let ar = analytic_rank(&t, Exec::Sequential).unwrap();
        assert_eq!(ar.bias, rat(3, 4));
        assert!((ar.arank - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        assert_eq!(ar.ceil(p), 1);
    }

    #[test]
    fn slice_identity_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..100 {
            let n = 1 + i % 4;
            let t = random_form(Prime::TWO, n, 3, &mut rng);
            assert_eq!(analytic_rank(&t, Exec::Sequential).unwrap().bias, bias_naive(&t, 1 << 24).unwrap());
        }
        for i in 0..20 {
            let t = random_form(Prime::THREE, 1 + i % 2, 3, &mut rng);
            assert_eq!(analytic_rank(&t, Exec::Parallel).unwrap().bias, bias_naive(&t, 1 << 24).unwrap());
        }
    }

    #[test]
    fn bilinear_examples() {
        let p = Prime::TWO;
        let anti = MultilinearForm::from_fn(p, 2, 2, |j| u8::from(j[0] != j[1])).unwrap();
        let r = bilinear_rank(&anti).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.left_null.dim(), 0);
        let p3 = Prime::THREE;
        let b = MultilinearForm::from_fn(p3, 3, 2, |j| u8::from(j == [0, 0])).unwrap();
        let r = bilinear_rank(&b).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.right_null.contains(&[0, 1, 2]) && !r.right_null.contains(&[1, 0, 0]));
        let r0 = bilinear_rank(&MultilinearForm::zero(p3, 3, 2).unwrap()).unwrap();
        assert_eq!((r0.rank, r0.left_null.dim()), (0, 3));
    }

    #[test]
    fn vanishing_examples() {
        let p = Prime::TWO;
        let t = MultilinearForm::from_fn(p, 2, 3, |j| u8::from(j == [0, 0, 0])).unwrap();
        let u = fpspace::kernel(p, 2, &[fpspace::LinearForm::new(vec![1, 0])]).unwrap();
        let c = vanishing_decomposition(&t, &u).unwrap();
        assert!(c.len() <= 3 && verify_certificate(&c).ok);
        let z = MultilinearForm::zero(p, 2, 3).unwrap();
        assert!(vanishing_decomposition(&z, &Subspace::full(p, 2)).unwrap().is_empty());
        assert!(vanishing_decomposition(&t, &Subspace::full(p, 2)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p3 = Prime::THREE;
            let u = Subspace::span(p3, 3, vec![vec![1, rng.gen_range(0..3), rng.gen_range(0..3)]]).unwrap();
            // f vanishes on u, so f(x_2) g(x_1, x_3) vanishes on U^3
            let f = fpspace::LinearForm::new(u.vanishing_forms()[0].coeffs.clone());
            let g = random_form(p3, 3, 2, &mut rng);
            let t = MultilinearForm::from_fn(p3, 3, 3, |j| p3.mul(f.coeffs[j[1]], g.get(&[j[0], j[2]]))).unwrap();
            let c = vanishing_decomposition(&t, &u).unwrap();
            assert!(c.len() <= 3 * u.codim());
            assert!(verify_certificate(&c).ok);
        }
    }

    #[test]
    fn corrupted_certificate_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_form(Prime::THREE, 2, 3, &mut rng);
        let mut c = flattening_certificate(&t).unwrap();
        assert!(verify_certificate(&c).ok);
        let r = &c.terms[0].r;
        let mut coeffs = r.coeffs().to_vec();
        coeffs[0] = (coeffs[0] + 1) % 3;
        c.terms[0].r = MultilinearForm::new(Prime::THREE, 2, 1, coeffs).unwrap();
        let v = verify_certificate(&c);
        assert!(!v.ok && v.witness.is_some());
        let empty = RankCertificate { terms: vec![], claimed: MultilinearForm::zero(Prime::TWO, 2, 3).unwrap() };
        assert!(verify_certificate(&empty).ok);
    }

    #[test]
    fn certificate_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_form(Prime::TWO, 3, 3, &mut rng);
        let c = flattening_certificate(&t).unwrap();
        assert_eq!(RankCertificate::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn prank_small_cases() {
        let p = Prime::TWO;
        let z = MultilinearForm::zero(p, 2, 3).unwrap();
        assert!(matches!(prank_search(&z, 4, 1 << 20).unwrap(), PrankResult::Exact { rank: 0, .. }));
        let one = MultilinearForm::from_fn(p, 2, 3, |j| u8::from(j[0] == 1 && j[1] != j[2])).unwrap();
        assert!(matches!(prank_search(&one, 4, 1 << 20).unwrap(), PrankResult::Exact { rank: 1, .. }));
        // p=2, n=3 exceeds the breadth-first budget, so deepening is used
        let t = MultilinearForm::from_fn(p, 3, 3, |j| u8::from(j[0] == j[1] && j[1] == j[2])).unwrap();
        match prank_search(&t, 3, 1 << 22).unwrap() {
            PrankResult::Exact { rank, certificate } => {
                assert!(rank <= 3 && verify_certificate(&certificate).ok);
            }
            PrankResult::Unknown { lower_bound, .. } => assert!(lower_bound >= 1),
        }
    }
}
