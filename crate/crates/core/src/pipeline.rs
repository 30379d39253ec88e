//! From a function correlating with a triaffine phase to a cubic polynomial
//! correlating with the function: symmetrization, integration, two rounds of
//! derandomization, bilinear cleanup, the eight-function average and the
//! U^3 oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::kernels::{Acc, Uniform};
use crate::analysis::{Average, BoundedFunction};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::fpspace::{self, Subspace};
use crate::integrate::{integrate_csm, integrate_ncsm};
use crate::ledger::{Ledger, Real};
use crate::mforms::{total_derivative, MultiaffineForm, MultilinearForm};
use crate::ncpoly::NcPoly;
use crate::par::{self, Exec};
use crate::rank::{self, RankCertificate, Term};
use crate::symmetrize::{gt_defect, GtDefect};

mod run;
pub use run::*;

/// Cap on `p^{4n}` for the four-variable averages.
pub const TRIAFFINE_CAP: u128 = 1 << 26;

fn check_cap(p: Prime, n: usize, power: u32, cap: u128) -> Result<()> {
    match p.pow(power * n as u32) {
        Some(v) if v <= cap => Ok(()),
        v => Err(Error::BudgetExceeded { needed: v.unwrap_or(u128::MAX), cap }),
    }
}

/// `E_{x,h} (d_{h1} d_{h2} d_{h3} g)(x) omega^{psi(h)}` split by `code(h)`:
/// bucket `c` sums only the `h` with code `c`, all divided by `|V|^4`.
pub fn triaffine_buckets(
    g: &BoundedFunction,
    psi: &MultiaffineForm,
    code: &[usize],
    buckets: usize,
    exec: Exec,
) -> Result<Vec<Average>> {
    let p = g.prime();
    let n = g.dim();
    if psi.arity() != 3 || psi.dim() != n || psi.prime() != p {
        return Err(Error::Precondition("phase must be a triaffine form on the space of g".into()));
    }
    check_cap(p, n, 4, TRIAFFINE_CAP)?;
    let sp = g.space();
    let size = sp.size();
    if code.len() != size * size * size {
        return Err(Error::DimensionMismatch { expected: size * size * size, got: code.len() });
    }
    let vecs: Vec<Vec<u8>> = (0..size).map(|i| sp.vector(i)).collect();
    let phase: Vec<u8> = (0..size * size * size)
        .map(|i| psi.eval(&[&vecs[i / (size * size)], &vecs[i / size % size], &vecs[i % size]]).expect("dimensions checked"))
        .collect();
    let u = Uniform::new(&[g], 1);
    let fresh = || (0..buckets).map(|_| Acc::new(&u, p)).collect::<Vec<_>>();
    let accs = par::map_reduce(
        exec,
        size,
        fresh(),
        |h1| {
            let mut accs = fresh();
            let mut picks = [(0usize, 0usize, false); 8];
            for h2 in 0..size {
                let h12 = sp.add_idx(h1, h2);
                for h3 in 0..size {
                    let i = (h1 * size + h2) * size + h3;
                    let shifts = [0, h1, h2, h12, h3, sp.add_idx(h1, h3), sp.add_idx(h2, h3), sp.add_idx(h12, h3)];
                    for x in 0..size {
                        for (w, pick) in picks.iter_mut().enumerate() {
                            *pick = (0, sp.add_idx(x, shifts[w]), w.count_ones() % 2 == 0);
                        }
                        accs[code[i]].term(&u, p, &picks, phase[i] as u32);
                    }
                }
            }
            accs
        },
        |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    );
    Ok(accs.into_iter().map(|a| a.finish(&u, p, size.pow(4), &[0; 8])).collect())
}

/// `E_{x,h} (d_{h1} d_{h2} d_{h3} g)(x) omega^{psi(h)}`.
pub fn triaffine_correlation(g: &BoundedFunction, psi: &MultiaffineForm, exec: Exec) -> Result<Average> {
    let size = g.space().size();
    let zero = vec![0; size * size * size];
    Ok(triaffine_buckets(g, psi, &zero, 1, exec)?.remove(0))
}

/// How to obtain the triaffine phase.
#[derive(Debug, Clone)]
pub enum Strategy {
    Supplied(MultiaffineForm),
    /// `phi = -d^3 P_0`, so that `f = omega^{P_0}` gives correlation 1.
    FromPolynomialGuess(NcPoly),
    /// Best of `budget` random trilinear forms.
    RandomSearch { budget: usize, seed: u64 },
    /// Every trilinear form, for `n <= 2`.
    ExhaustiveTrilinear,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Supplied(_) => "supplied",
            Strategy::FromPolynomialGuess(_) => "from_polynomial_guess",
            Strategy::RandomSearch { .. } => "random_search",
            Strategy::ExhaustiveTrilinear => "exhaustive_trilinear",
        }
    }
}

fn better(best: &Option<(Real, MultiaffineForm, Average)>, sq: &Real) -> bool {
    best.as_ref().is_none_or(|(b, _, _)| !b.ge(sq).0)
}

/// A triaffine phase and its measured correlation with the third derivative of `f`.
pub fn find_triaffine(f: &BoundedFunction, strategy: &Strategy, exec: Exec) -> Result<(MultiaffineForm, Average)> {
    let p = f.prime();
    let n = f.dim();
    let candidates: Box<dyn Iterator<Item = Result<MultiaffineForm>>> = match strategy {
        Strategy::Supplied(phi) => Box::new(std::iter::once(Ok(phi.clone()))),
        Strategy::FromPolynomialGuess(poly) => {
            let d = total_derivative(poly, 3)?.scale(p.get() - 1);
            Box::new(std::iter::once(Ok(MultiaffineForm::from_multilinear(&d))))
        }
        Strategy::RandomSearch { budget, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let forms: Vec<_> = (0..*budget)
                .map(|_| MultilinearForm::from_fn(p, n, 3, |_| rng.gen_range(0..p.get())).map(|t| MultiaffineForm::from_multilinear(&t)))
                .collect();
            Box::new(forms.into_iter())
        }
        Strategy::ExhaustiveTrilinear => {
            if n > 2 {
                return Err(Error::BudgetExceeded { needed: p.pow((n * n * n) as u32).unwrap_or(u128::MAX), cap: p.pow(8).unwrap() });
            }
            let len = n * n * n;
            let total = p.get() as u64;
            Box::new((0..total.pow(len as u32)).map(move |mut code| {
                let coeffs = (0..len)
                    .map(|_| {
                        let c = (code % total) as u8;
                        code /= total;
                        c
                    })
                    .collect();
                MultilinearForm::new(p, n, 3, coeffs).map(|t| MultiaffineForm::from_multilinear(&t))
            }))
        }
    };
    let mut best: Option<(Real, MultiaffineForm, Average)> = None;
    for phi in candidates {
        let phi = phi?;
        let avg = triaffine_correlation(f, &phi, exec)?;
        let sq = avg.modulus_sq();
        if better(&best, &sq) {
            best = Some((sq, phi, avg));
        }
    }
    match best {
        Some((sq, phi, avg)) if !Real::zero().ge(&sq).0 => Ok((phi, avg)),
        _ => Err(Error::NotFound(format!("no triaffine phase with positive correlation ({})", strategy.name()))),
    }
}

/// A linear or bilinear form on the slots in `mask`.
pub type Factor = (usize, MultilinearForm);

/// The two factors of each term, in slot positions.
pub fn term_factors(terms: &[Term]) -> Vec<Factor> {
    let full = 7usize;
    terms.iter().flat_map(|t| [(t.mask, t.r.clone()), (full ^ t.mask, t.s.clone())]).collect()
}

/// A term of a bilinear certificate on slots `(a, b)`, as factors in the triple.
fn embed_bilinear_term(t: &Term, a: usize, b: usize) -> [Factor; 2] {
    let (ra, sa) = if t.mask == 1 { (a, b) } else { (b, a) };
    [(1 << ra, t.r.clone()), (1 << sa, t.s.clone())]
}

fn eval_factor(f: &Factor, h: [&[u8]; 3]) -> u8 {
    let args: Vec<&[u8]> = (0..3).filter(|s| f.0 >> s & 1 == 1).map(|s| h[s]).collect();
    f.1.eval_unchecked(&args)
}

/// `psi + sum_k xi_k Gamma_k`.
fn add_factors(psi: &MultiaffineForm, factors: &[Factor], xi: &[u8]) -> Result<MultiaffineForm> {
    let mut out = psi.clone();
    for (f, &c) in factors.iter().zip(xi) {
        if c != 0 {
            let comp = out.component(f.0).add(&f.1.scale(c))?;
            out.set_component(f.0, comp)?;
        }
    }
    Ok(out)
}

/// Result of removing the indicator of `Gamma(h) = c`.
#[derive(Debug, Clone)]
pub struct Derandomized {
    /// Argmax bucket.
    pub c: Vec<u8>,
    /// `E b 1(Gamma = c) d^3 g`.
    pub bucket: Average,
    /// Argmax frequency.
    pub xi0: Vec<u8>,
    /// `psi + xi0 . Gamma`.
    pub psi: MultiaffineForm,
    /// `E omega^{psi} d^3 g`.
    pub value: Average,
}

fn digits(p: Prime, mut v: usize, len: usize) -> Vec<u8> {
    (0..len)
        .map(|_| {
            let d = (v % p.as_usize()) as u8;
            v /= p.as_usize();
            d
        })
        .collect()
}

/// Splits by the value of `Gamma`, keeps the best value `c`, then replaces
/// the indicator by its best Fourier character.
pub fn derandomize_indicator(
    g: &BoundedFunction,
    psi: &MultiaffineForm,
    factors: &[Factor],
    max_factors: usize,
    exec: Exec,
) -> Result<Derandomized> {
    let p = g.prime();
    let m = factors.len();
    if m == 0 {
        let value = triaffine_correlation(g, psi, exec)?;
        return Ok(Derandomized { c: vec![], bucket: value.clone(), xi0: vec![], psi: psi.clone(), value });
    }
    if m > max_factors {
        return Err(Error::BudgetExceeded { needed: m as u128, cap: max_factors as u128 });
    }
    let buckets = p.pow(m as u32).expect("m is small") as usize;
    let sp = g.space();
    let size = sp.size();
    let vecs: Vec<Vec<u8>> = (0..size).map(|i| sp.vector(i)).collect();
    let code: Vec<usize> = (0..size * size * size)
        .map(|i| {
            let h = [&vecs[i / (size * size)][..], &vecs[i / size % size][..], &vecs[i % size][..]];
            factors.iter().rev().fold(0, |acc, f| acc * p.as_usize() + eval_factor(f, h) as usize)
        })
        .collect();
    let d = triaffine_buckets(g, psi, &code, buckets, exec)?;
    let (ci, bucket) = argmax(d.into_iter())?;
    let mut best: Option<(Real, Vec<u8>, MultiaffineForm, Average)> = None;
    for xi in 0..buckets {
        let xi = digits(p, xi, m);
        let cand = add_factors(psi, factors, &xi)?;
        let value = triaffine_correlation(g, &cand, exec)?;
        let sq = value.modulus_sq();
        if best.as_ref().is_none_or(|(b, ..)| !b.ge(&sq).0) {
            best = Some((sq, xi, cand, value));
        }
    }
    let (_, xi0, psi, value) = best.expect("at least one frequency");
    Ok(Derandomized { c: digits(p, ci, m), bucket, xi0, psi, value })
}

fn argmax(it: impl Iterator<Item = Average>) -> Result<(usize, Average)> {
    let mut best: Option<(Real, usize, Average)> = None;
    for (i, a) in it.enumerate() {
        let sq = a.modulus_sq();
        if best.as_ref().is_none_or(|(b, ..)| !b.ge(&sq).0) {
            best = Some((sq, i, a));
        }
    }
    best.map(|(_, i, a)| (i, a)).ok_or_else(|| Error::Internal("empty maximization".into()))
}

/// Slot mask of `beta_i`: the two slots other than `i`.
pub fn beta_mask(i: usize) -> usize {
    7 ^ (1 << i)
}

/// `E_{u,v} b1(u) b2(v) b3(u+v) omega^{A(u,v)}` equal to the slice of
/// `E omega^{psi} d^3 g(x)` with `h_j` fixed, `u, v` the other two slots.
fn bilinear_slice(g: &BoundedFunction, psi: &MultiaffineForm, j: usize, x: usize, hj: usize) -> Result<(MultilinearForm, Vec<BoundedFunction>)> {
    let p = g.prime();
    let n = g.dim();
    let sp = g.space();
    let size = sp.size();
    let (a, b) = match j {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let zero = vec![0u8; n];
    let hjv = sp.vector(hj);
    let at = |u: &[u8], v: &[u8]| {
        let mut h: [&[u8]; 3] = [&zero, &zero, &zero];
        h[j] = &hjv;
        h[a] = u;
        h[b] = v;
        psi.eval(&h).expect("dimensions checked")
    };
    let c = at(&zero, &zero);
    let fa: Vec<u32> = (0..size).map(|u| p.sub(at(&sp.vector(u), &zero), c) as u32).collect();
    let fb: Vec<u32> = (0..size).map(|v| p.sub(at(&zero, &sp.vector(v)), c) as u32).collect();
    let mut b1 = BoundedFunction::from_phase_exponents(p, n, 1, fa);
    let mut b2 = BoundedFunction::from_phase_exponents(p, n, 1, fb);
    let mut b3 = BoundedFunction::from_phase_exponents(p, n, 1, vec![c as u32; size]);
    for s in 0..8usize {
        let base = if s >> j & 1 == 1 { sp.add_idx(x, hj) } else { x };
        let mut part = g.shift(base);
        if s.count_ones() % 2 == 0 {
            part = part.conj();
        }
        match (s >> a & 1, s >> b & 1) {
            (0, 0) => b3 = b3.mul(&part.compose(|_| 0))?,
            (1, 0) => b1 = b1.mul(&part)?,
            (0, 1) => b2 = b2.mul(&part)?,
            _ => b3 = b3.mul(&part)?,
        }
    }
    Ok((psi.component((1 << a) | (1 << b)).clone(), vec![b1, b2, b3]))
}

/// Cleanup of one bilinear component.
#[derive(Debug, Clone)]
pub struct CleanedBilinear {
    /// Slot not in the component.
    pub slot: usize,
    pub beta: MultilinearForm,
    pub beta_sym: MultilinearForm,
    /// The fixed `(x, h_slot)` and its bilinear defect bound.
    pub x: Vec<u8>,
    pub h: Vec<u8>,
    pub gt: GtDefect,
    pub subspace: Subspace,
    /// Certificate for `beta - beta_sym`.
    pub certificate: RankCertificate,
    /// `d^2 Q = beta_sym`.
    pub q: NcPoly,
}

/// Replaces each bilinear component `beta_i` of `psi` by a symmetric
/// `beta_i'` agreeing with it on the nullspace of `beta_i - beta_i^T`, and
/// integrates `beta_i'`.
pub fn bilinear_cleanup(g: &BoundedFunction, psi: &MultiaffineForm, exec: Exec) -> Result<Vec<CleanedBilinear>> {
    if !psi.multilinear_part().is_zero() {
        return Err(Error::Precondition("cleanup needs a phase without trilinear part".into()));
    }
    let p = g.prime();
    let sp = g.space();
    let size = sp.size();
    check_cap(p, g.dim(), 4, TRIAFFINE_CAP)?;
    (0..3)
        .map(|j| {
            let mut best: Option<(GtDefect, usize, usize, MultilinearForm)> = None;
            for x in 0..size {
                for hj in 0..size {
                    let (beta, b) = bilinear_slice(g, psi, j, x, hj)?;
                    let gt = gt_defect(&beta, &b, exec)?;
                    if best.as_ref().is_none_or(|(bg, ..)| !bg.delta_sq.ge(&gt.delta_sq).0) {
                        best = Some((gt, x, hj, beta));
                    }
                }
            }
            let (gt, x, hj, beta) = best.expect("nonempty space");
            let defect = beta.sub(&beta.transpose())?;
            let subspace = rank::bilinear_rank(&defect)?.left_null;
            let beta_sym = beta.restrict(&subspace)?.extend(&subspace, &fpspace::complement(&subspace))?;
            if !beta_sym.is_symmetric() {
                return Err(Error::Internal("extension of the symmetric restriction is not symmetric".into()));
            }
            let certificate = rank::vanishing_decomposition(&beta.sub(&beta_sym)?, &subspace)?;
            let q = if p == Prime::TWO { integrate_ncsm(&beta_sym, exec)? } else { integrate_csm(&beta_sym, exec)? };
            Ok(CleanedBilinear { slot: j, beta, beta_sym, x: sp.vector(x), h: sp.vector(hj), gt, subspace, certificate, q })
        })
        .collect()
}

/// The linear factors of all cleanup certificates, placed in their slots.
pub fn cleanup_factors(cleaned: &[CleanedBilinear]) -> Vec<Factor> {
    cleaned
        .iter()
        .flat_map(|c| {
            let (a, b) = match c.slot {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            c.certificate.terms.iter().flat_map(move |t| embed_bilinear_term(t, a, b)).collect::<Vec<_>>()
        })
        .collect()
}

/// Least `r >= 0` with `p^{-2r} <= eps_sq`, i.e. `ceil(log_p(1/eps))`.
pub fn ceil_log_inv_sqrt(eps_sq: &Real, p: Prime) -> Option<usize> {
    if Real::zero().ge(eps_sq).0 {
        return None;
    }
    let mut r = 0usize;
    while !eps_sq.ge(&Real::prime_power(p, -2 * r as i64)).0 {
        r += 1;
    }
    Some(r)
}

/// Records `|value| >= eps p^{-e}` as `|value|^2 >= eps^2 p^{-2e}`.
fn ledger_scaled(ledger: &mut Ledger, name: &str, claim: &str, value: &Average, eps_sq: &Real, p: Prime, e: usize) -> bool {
    let rhs = eps_sq.mul(&Real::prime_power(p, -2 * e as i64));
    ledger.ge(name, claim, &value.modulus_sq(), &rhs)
}

