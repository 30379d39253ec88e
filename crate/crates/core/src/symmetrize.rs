//! Symmetrizing trilinear forms that correlate with a seven-point pattern:
//! Cauchy-Schwarz defect bounds, symmetric and CSM/nCSM subspaces, and the
//! full procedures for `p = 3` (classical) and `p = 2` (non-classical).

use num_rational::BigRational;

use crate::analysis::kernels::{Acc, Uniform};
use crate::analysis::{seven_point_average, Average, BoundedFunction};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::fpspace::{self, LinearForm, Space, Subspace};
use crate::ledger::{Ledger, Mode, Real};
use crate::mforms::{MultiaffineForm, MultilinearForm, PERMS3};
use crate::par::{self, Exec};
use crate::rank::{self, analytic_rank, PrankResult, RankCertificate};

mod instances;
pub use instances::*;

/// Default budget for exact partition-rank searches on defect forms.
pub const DEFECT_SEARCH_BUDGET: u128 = 1 << 16;

/// A triaffine phase and seven 1-bounded functions, with the measured
/// correlation `E b1(x) b2(y) b3(z) b4(x+y) b5(x+z) b6(y+z) b7(x+y+z) omega^phi`.
#[derive(Debug, Clone)]
pub struct CorrelationWitness {
    pub phi: MultiaffineForm,
    pub b: Vec<BoundedFunction>,
    pub average: Average,
}

impl CorrelationWitness {
    pub fn new(phi: MultiaffineForm, b: Vec<BoundedFunction>, exec: Exec) -> Result<CorrelationWitness> {
        let average = seven_point_average(&b, &phi, exec)?;
        Ok(CorrelationWitness { phi, b, average })
    }

    /// All seven functions identically one, so the correlation is the bias of `phi`.
    pub fn constant(phi: MultiaffineForm, exec: Exec) -> Result<CorrelationWitness> {
        let b = (0..7).map(|_| BoundedFunction::one(phi.prime(), phi.dim())).collect();
        CorrelationWitness::new(phi, b, exec)
    }

    /// `delta^2`.
    pub fn delta_sq(&self) -> Real {
        self.average.modulus_sq()
    }

    pub fn delta(&self) -> f64 {
        self.average.modulus()
    }

    /// The trilinear form when `phi` has no lower-order components.
    pub fn trilinear(&self) -> Option<MultilinearForm> {
        let full = self.phi.full_mask();
        (0..full).all(|m| self.phi.component(m).is_zero()).then(|| self.phi.multilinear_part())
    }

    /// The phase form followed by the seven functions, blocks separated by `---`.
    pub fn to_text(&self) -> String {
        let mut s = self.phi.to_text();
        for f in &self.b {
            s.push_str("---\n");
            s.push_str(&f.to_text());
        }
        s
    }

    /// Parses [`CorrelationWitness::to_text`]; a lone form means `b = 1`.
    pub fn parse(text: &str, exec: Exec) -> Result<CorrelationWitness> {
        let blocks = split_blocks(text);
        let phi = MultiaffineForm::parse(blocks.first().map_or("", |b| b.as_str()))?;
        if blocks.len() == 1 {
            return CorrelationWitness::constant(phi, exec);
        }
        if blocks.len() != 8 {
            return Err(Error::Parse { line: 0, msg: format!("expected a form and 7 functions, found {} blocks", blocks.len()) });
        }
        let b = blocks[1..].iter().map(|t| BoundedFunction::parse(t)).collect::<Result<_>>()?;
        CorrelationWitness::new(phi, b, exec)
    }
}

/// Splits text on lines consisting of `---`.
pub fn split_blocks(text: &str) -> Vec<String> {
    let mut blocks = vec![String::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            blocks.push(String::new());
        } else {
            let last = blocks.last_mut().expect("nonempty");
            last.push_str(line);
            last.push('\n');
        }
    }
    blocks
}

/// The seven functions from expanding `d_x d_y d_z f(x0)`: their product in
/// the seven-point pattern is exactly that multiplicative derivative.
pub fn derivative_witness(f: &BoundedFunction, x0: usize) -> Vec<BoundedFunction> {
    let g = f.shift(x0);
    let gc = g.conj();
    let b1 = g.mul(&f.conj().compose(|_| x0)).expect("same space");
    vec![b1, g.clone(), g.clone(), gc.clone(), gc.clone(), gc, g]
}

/// `c <= K log_p(1/delta)` checked as `p^{-2c} >= (delta^2)^K`.
fn log_bound(ledger: &mut Ledger, name: &str, claim: &str, p: Prime, c: usize, k: u32, delta_sq: &Real) -> bool {
    let lhs = Real::prime_power(p, -2 * c as i64);
    let (holds, mode) = lhs.ge(&delta_sq.pow(k));
    let bound = k as f64 * -delta_sq.to_f64().ln() / (2.0 * (p.get() as f64).ln());
    ledger.push(name, claim.into(), format!("{c} vs {bound:.4}"), holds, mode)
}

/// Outcome of the bilinear Cauchy-Schwarz defect bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GtDefect {
    pub delta_sq: Real,
    /// `E omega^{A(u,v) - A(v,u)}`.
    pub bias: BigRational,
    /// `bias >= delta^8`.
    pub holds: bool,
    pub mode: Mode,
}

/// Measures `delta = |E b1(u) b2(v) b3(u+v) omega^{A(u,v)}|` and checks
/// `bias(A - A^T) >= delta^8`.
pub fn gt_defect(a: &MultilinearForm, b: &[BoundedFunction], exec: Exec) -> Result<GtDefect> {
    if a.arity() != 2 {
        return Err(Error::ArityMismatch { expected: 2, got: a.arity() });
    }
    if b.len() != 3 {
        return Err(Error::ArityMismatch { expected: 3, got: b.len() });
    }
    if b.iter().any(|f| f.dim() != a.dim() || f.prime() != a.prime()) {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b[0].dim() });
    }
    let p = a.prime();
    let sp = Space::new(p, a.dim());
    let size = sp.size();
    let refs: Vec<&BoundedFunction> = b.iter().collect();
    let u = Uniform::new(&refs, 1);
    let vecs: Vec<Vec<u8>> = (0..size).map(|i| sp.vector(i)).collect();
    let acc = par::map_reduce(
        exec,
        size,
        Acc::new(&u, p),
        |x| {
            let mut acc = Acc::new(&u, p);
            for y in 0..size {
                let ph = a.eval_unchecked(&[&vecs[x], &vecs[y]]);
                acc.term(&u, p, &[(0, x, false), (1, y, false), (2, sp.add_idx(x, y), false)], ph as u32);
            }
            acc
        },
        Acc::merge,
    );
    let delta_sq = acc.finish(&u, p, size * size, &[0, 1, 2]).modulus_sq();
    let bias = analytic_rank(&a.sub(&a.transpose())?, exec)?.bias;
    let (holds, mode) = Real::exact(bias.clone()).pow(2).ge(&delta_sq.pow(8));
    Ok(GtDefect { delta_sq, bias, holds, mode })
}

/// The analytic rank of one `T - T_pi` against its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationDefect {
    pub pi: [usize; 3],
    pub bias: BigRational,
    pub arank: f64,
    /// `16 log_p(1/delta)`.
    pub bound: f64,
    pub holds: bool,
    /// For transpositions, the sharper `8 log_p(1/delta)`.
    pub sharp: Option<bool>,
    pub mode: Mode,
}

fn is_transposition(pi: &[usize; 3]) -> bool {
    (0..3).filter(|&s| pi[s] != s).count() == 2
}

/// `arank(T - T_pi)` for all six permutations against `16 log_p(1/delta)`,
/// where `delta` is the witness correlation and the witness phase is `T`.
pub fn permutation_defects(t: &MultilinearForm, w: &CorrelationWitness, exec: Exec) -> Result<Vec<PermutationDefect>> {
    if w.trilinear().as_ref() != Some(t) {
        return Err(Error::Precondition("witness phase must be exactly the trilinear form T".into()));
    }
    let delta_sq = w.delta_sq();
    if Real::zero().ge(&delta_sq).0 {
        return Err(Error::Precondition("witness has zero correlation".into()));
    }
    let p = t.prime();
    let log_inv = -delta_sq.to_f64().ln() / (2.0 * (p.get() as f64).ln());
    PERMS3
        .iter()
        .map(|pi| {
            let d = t.sub(&t.permute(pi)?)?;
            let ar = analytic_rank(&d, exec)?;
            let b2 = Real::exact(ar.bias.clone()).pow(2);
            let (holds, mode) = b2.ge(&delta_sq.pow(16));
            let sharp = is_transposition(pi).then(|| b2.ge(&delta_sq.pow(8)).0);
            Ok(PermutationDefect { pi: *pi, bias: ar.bias, arank: ar.arank, bound: 16.0 * log_inv, holds, sharp, mode })
        })
        .collect()
}

/// Certificates for `T - T_pi`, `pi` over the five non-identity
/// permutations: the shorter of an exact search (when cheap) and the best
/// flattening.
pub fn defect_certificates(t: &MultilinearForm, budget: u128) -> Result<Vec<RankCertificate>> {
    PERMS3[1..]
        .iter()
        .map(|pi| {
            let d = t.sub(&t.permute(pi)?)?;
            if d.is_zero() {
                return Ok(RankCertificate { terms: vec![], claimed: d });
            }
            let flat = rank::flattening_certificate(&d)?;
            if flat.len() > 1 {
                if let Ok(PrankResult::Exact { certificate, .. }) = rank::prank_search(&d, flat.len() - 1, budget) {
                    return Ok(certificate);
                }
            }
            Ok(flat)
        })
        .collect()
}

/// The common kernel of every single-slot factor in the certificates for
/// `T - T_pi`; `T` restricted to it is symmetric.
pub fn symmetric_subspace(t: &MultilinearForm, certs: &[RankCertificate]) -> Result<Subspace> {
    if t.arity() != 3 {
        return Err(Error::ArityMismatch { expected: 3, got: t.arity() });
    }
    if certs.len() != 5 {
        return Err(Error::ArityMismatch { expected: 5, got: certs.len() });
    }
    let mut forms = Vec::new();
    for (pi, cert) in PERMS3[1..].iter().zip(certs) {
        if cert.claimed != t.sub(&t.permute(pi)?)? {
            return Err(Error::Precondition(format!("certificate for {pi:?} does not claim T - T_pi")));
        }
        if !rank::verify_certificate(cert).ok {
            return Err(Error::Precondition(format!("certificate for {pi:?} does not verify")));
        }
        for term in &cert.terms {
            let lin = if term.mask.count_ones() == 1 { &term.r } else { &term.s };
            forms.push(LinearForm::new(lin.coeffs().to_vec()));
        }
    }
    let u = fpspace::kernel(t.prime(), t.dim(), &forms)?;
    if !t.restrict(&u)?.is_symmetric() {
        return Err(Error::Internal("restriction to the common kernel is not symmetric".into()));
    }
    Ok(u)
}

fn small_enough(p: Prime, n: usize) -> bool {
    p.pow(2 * n as u32).is_some_and(|v| v <= 1 << 16)
}

/// For symmetric `T` over F_3, the kernel of the linear map `x -> T(x,x,x)`;
/// `T` restricted to it is CSM.
pub fn csm_subspace_f3(t: &MultilinearForm) -> Result<Subspace> {
    let p = t.prime();
    if p != Prime::THREE || t.arity() != 3 || !t.is_symmetric() {
        return Err(Error::Precondition("needs a symmetric trilinear form over F_3".into()));
    }
    let n = t.dim();
    let sp = Space::new(p, n);
    let diag = |x: &[u8]| t.eval_unchecked(&[x, x, x]);
    if small_enough(p, n) {
        let vals: Vec<u8> = (0..sp.size()).map(|i| diag(&sp.vector(i))).collect();
        for x in 0..sp.size() {
            for y in 0..sp.size() {
                if vals[sp.add_idx(x, y)] != p.add(vals[x], vals[y]) {
                    return Err(Error::Internal(format!("x -> T(x,x,x) is not additive at {:?}, {:?}", sp.vector(x), sp.vector(y))));
                }
            }
        }
    }
    let c: Vec<u8> = (0..n).map(|i| t.get(&[i, i, i])).collect();
    let u = fpspace::kernel(p, n, &[LinearForm::new(c)])?;
    if !t.restrict(&u)?.is_csm() {
        return Err(Error::Internal("restriction to the diagonal kernel is not CSM".into()));
    }
    Ok(u)
}

/// For symmetric `T` over F_2, `B(x,y) = T(x,x,y) - T(x,y,y)` and its
/// nullspace, on which `T` is nCSM.
pub fn ncsm_subspace_f2(t: &MultilinearForm) -> Result<(Subspace, MultilinearForm)> {
    let p = t.prime();
    if p != Prime::TWO || t.arity() != 3 || !t.is_symmetric() {
        return Err(Error::Precondition("needs a symmetric trilinear form over F_2".into()));
    }
    let n = t.dim();
    let b = MultilinearForm::from_fn(p, n, 2, |j| p.sub(t.get(&[j[0], j[0], j[1]]), t.get(&[j[0], j[1], j[1]])))?;
    if small_enough(p, n) {
        let sp = Space::new(p, n);
        for x in 0..sp.size() {
            let xv = sp.vector(x);
            for y in 0..sp.size() {
                let yv = sp.vector(y);
                let want = p.sub(t.eval_unchecked(&[&xv, &xv, &yv]), t.eval_unchecked(&[&xv, &yv, &yv]));
                if b.eval_unchecked(&[&xv, &yv]) != want {
                    return Err(Error::Internal(format!("B is not bilinear at {xv:?}, {yv:?}")));
                }
            }
        }
    }
    let u = rank::bilinear_rank(&b)?.left_null;
    if !t.restrict(&u)?.is_ncsm() {
        return Err(Error::Internal("restriction to the nullspace of B is not nCSM".into()));
    }
    Ok((u, b))
}

/// Output of the multiaffine Cauchy-Schwarz reduction.
#[derive(Debug, Clone)]
pub struct MultiaffineCs {
    /// Trilinear part of the input phase.
    pub t: MultilinearForm,
    /// New witness with phase `T`.
    pub witness: CorrelationWitness,
    /// The chosen shift `s = x0 + y0 + z0`.
    pub shift: Vec<u8>,
    pub delta_in_sq: Real,
    /// `delta_out >= delta_in^8`.
    pub holds: bool,
    pub mode: Mode,
}

/// The seven functions built from shifted copies of `b7`.
fn shifted_family(b7: &BoundedFunction, s: usize) -> Vec<BoundedFunction> {
    let g = b7.shift(s);
    let gc = g.conj();
    let b1 = g.mul(&b7.conj().compose(|_| s)).expect("same space");
    vec![b1, g.clone(), g.clone(), gc.clone(), gc.clone(), gc, g]
}

/// Replaces the phase by its trilinear part: after three Cauchy-Schwarz
/// steps the new functions are shifted copies of `b7`, with the shift chosen
/// to maximize the correlation (first maximizer on ties).
pub fn multiaffine_cs(w: &CorrelationWitness, exec: Exec) -> Result<MultiaffineCs> {
    if w.phi.arity() != 3 {
        return Err(Error::ArityMismatch { expected: 3, got: w.phi.arity() });
    }
    let t = w.phi.multilinear_part();
    let phase = MultiaffineForm::from_multilinear(&t);
    let sp = Space::new(t.prime(), t.dim());
    let mut best: Option<(Real, usize, CorrelationWitness)> = None;
    for s in 0..sp.size() {
        let cand = CorrelationWitness::new(phase.clone(), shifted_family(&w.b[6], s), exec)?;
        let sq = cand.delta_sq();
        if best.as_ref().is_none_or(|(b, _, _)| !b.ge(&sq).0) {
            best = Some((sq, s, cand));
        }
    }
    let (sq, s, witness) = best.expect("space is nonempty");
    let delta_in_sq = w.delta_sq();
    let (holds, mode) = sq.ge(&delta_in_sq.pow(8));
    Ok(MultiaffineCs { t, witness, shift: sp.vector(s), delta_in_sq, holds, mode })
}

/// Result of a symmetrization procedure.
#[derive(Debug, Clone)]
pub struct SymmetrizationReport {
    pub input: MultilinearForm,
    pub output: MultilinearForm,
    /// Certificate for `input - output`.
    pub certificate: RankCertificate,
    /// The subspace on which `input` and `output` agree.
    pub subspace: Subspace,
    /// Longest certificate for `T - T_pi`.
    pub r: usize,
    pub delta_sq: Real,
    pub ledger: Ledger,
}

impl SymmetrizationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("symmetrization report\n");
        s.push_str(&format!("delta ~ {:.9}\nr = {}\ncodim = {}\ncertificate length = {}\n\n", self.delta_sq.to_f64().sqrt(), self.r, self.subspace.codim(), self.certificate.len()));
        s.push_str(&self.ledger.to_text());
        s.push_str("\n== machine-readable ==\n[input]\n");
        s.push_str(&self.input.to_text());
        s.push_str("[output]\n");
        s.push_str(&self.output.to_text());
        s.push_str("[certificate]\n");
        s.push_str(&self.certificate.to_text());
        s
    }
}

/// Subspace of V spanned by the images of `inner` (given in `outer` coordinates).
fn lift_subspace(outer: &Subspace, inner: &Subspace) -> Result<Subspace> {
    let vecs = inner.basis().iter().map(|c| outer.combine(c)).collect();
    Subspace::span(outer.p, outer.n, vecs)
}

fn ledger_defects(ledger: &mut Ledger, defects: &[PermutationDefect]) {
    for d in defects {
        ledger.push(
            "permutation defect",
            format!("arank(T - T_{:?}) <= 16 log_p(1/delta)", d.pi),
            format!("{:.4} vs {:.4}", d.arank, d.bound),
            d.holds,
            d.mode,
        );
        if let Some(sharp) = d.sharp {
            ledger.push(
                "transposition defect",
                format!("arank(T - T_{:?}) <= 8 log_p(1/delta)", d.pi),
                format!("{:.4} vs {:.4}", d.arank, d.bound / 2.0),
                sharp,
                d.mode,
            );
        }
    }
}

/// Common first stage: defects, certificates and the symmetric subspace.
fn symmetric_stage(
    t: &MultilinearForm,
    w: &CorrelationWitness,
    certs: Option<Vec<RankCertificate>>,
    ledger: &mut Ledger,
    exec: Exec,
) -> Result<(Subspace, usize)> {
    let defects = permutation_defects(t, w, exec)?;
    ledger_defects(ledger, &defects);
    let certs = match certs {
        Some(c) => c,
        None => defect_certificates(t, DEFECT_SEARCH_BUDGET)?,
    };
    let r = certs.iter().map(RankCertificate::len).max().unwrap_or(0);
    for (pi, c) in PERMS3[1..].iter().zip(&certs) {
        ledger.check("defect certificate", &format!("certificate for T - T_{pi:?} verifies ({} terms)", c.len()), rank::verify_certificate(c).ok);
    }
    let u = symmetric_subspace(t, &certs)?;
    ledger.le_int("symmetric subspace", "codim U <= 5r", u.codim(), 5 * r);
    ledger.check("symmetric subspace", "T restricted to U is symmetric", t.restrict(&u)?.is_symmetric());
    Ok((u, r))
}

/// Extends `T|_W` to all of V and certifies the difference.
fn extend_from(t: &MultilinearForm, w: &Subspace) -> Result<(MultilinearForm, RankCertificate)> {
    let s = t.restrict(w)?.extend(w, &fpspace::complement(w))?;
    let cert = rank::vanishing_decomposition(&t.sub(&s)?, w)?;
    Ok((s, cert))
}

/// Finds `S` in CSM^3(V) with `prank(T - S) <= 15r + 3` over F_3.
pub fn symmetrize_classical_p3(
    t: &MultilinearForm,
    w: &CorrelationWitness,
    certs: Option<Vec<RankCertificate>>,
    exec: Exec,
) -> Result<SymmetrizationReport> {
    if t.prime() != Prime::THREE || t.arity() != 3 {
        return Err(Error::Precondition("classical symmetrization needs a trilinear form over F_3".into()));
    }
    let mut ledger = Ledger::new();
    let (u, r) = symmetric_stage(t, w, certs, &mut ledger, exec)?;
    let inner = csm_subspace_f3(&t.restrict(&u)?)?;
    ledger.le_int("CSM subspace", "codim_U U' <= 1", inner.codim(), 1);
    let wsub = lift_subspace(&u, &inner)?;
    let (s, cert) = extend_from(t, &wsub)?;
    ledger.check("CSM output", "S is CSM", s.is_csm());
    ledger.check("certificate", "certificate for T - S verifies", rank::verify_certificate(&cert).ok);
    ledger.le_int("certificate length", "prank(T - S) <= 3 codim W", cert.len(), 3 * wsub.codim());
    ledger.le_int("certificate length", "prank(T - S) <= 15r + 3", cert.len(), 15 * r + 3);
    Ok(SymmetrizationReport { input: t.clone(), output: s, certificate: cert, subspace: wsub, r, delta_sq: w.delta_sq(), ledger })
}

/// `phi(a, b, c) = T(x0 + u(a), y0 + u(b), z0 + u(c))` in U-coordinates.
fn coset_phase(t: &MultilinearForm, u: &Subspace, shifts: [&[u8]; 3]) -> Result<MultiaffineForm> {
    let comps = (0..8usize)
        .map(|mask| {
            let mut f = t.clone();
            for slot in (0..3).rev() {
                if mask >> slot & 1 == 0 {
                    f = f.contract(slot, shifts[slot]);
                }
            }
            f.restrict(u)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiaffineForm::from_components(t.prime(), u.dim(), 3, comps)
}

/// The coset triple of `U` on which the witness correlates best, as a
/// witness on U-coordinates.
fn best_coset(t: &MultilinearForm, w: &CorrelationWitness, u: &Subspace, exec: Exec) -> Result<CorrelationWitness> {
    let p = t.prime();
    let sp = Space::new(p, t.dim());
    let reps = fpspace::enumerate(&fpspace::complement(u), fpspace::DEFAULT_ENUMERATION_CAP)?;
    let usp = Space::new(p, u.dim());
    let emb: Vec<usize> = (0..usp.size()).map(|a| sp.index(&u.combine(&usp.vector(a)))).collect();
    let mut best: Option<(Real, CorrelationWitness)> = None;
    for x0 in &reps {
        for y0 in &reps {
            for z0 in &reps {
                let (xi, yi, zi) = (sp.index(x0), sp.index(y0), sp.index(z0));
                let offs = [xi, yi, zi, sp.add_idx(xi, yi), sp.add_idx(xi, zi), sp.add_idx(yi, zi), sp.add_idx(sp.add_idx(xi, yi), zi)];
                let b = w.b.iter().zip(offs).map(|(f, o)| f.pullback(u.dim(), |a| sp.add_idx(o, emb[a]))).collect();
                let cand = CorrelationWitness::new(coset_phase(t, u, [x0, y0, z0])?, b, exec)?;
                let sq = cand.delta_sq();
                if best.as_ref().is_none_or(|(b, _)| !b.ge(&sq).0) {
                    best = Some((sq, cand));
                }
            }
        }
    }
    Ok(best.expect("at least one coset").1)
}

/// Finds `S` in nCSM^3(V) with `prank(T - S) <= 432 log_2(1/delta)` over F_2.
pub fn symmetrize_nonclassical_p2(
    t: &MultilinearForm,
    w: &CorrelationWitness,
    certs: Option<Vec<RankCertificate>>,
    exec: Exec,
) -> Result<SymmetrizationReport> {
    let p = t.prime();
    if p != Prime::TWO || t.arity() != 3 {
        return Err(Error::Precondition("non-classical symmetrization needs a trilinear form over F_2".into()));
    }
    let delta_sq = w.delta_sq();
    let mut ledger = Ledger::new();
    let (u, r) = symmetric_stage(t, w, certs, &mut ledger, exec)?;
    log_bound(&mut ledger, "symmetric subspace", "codim U <= 80 log_2(1/delta)", p, u.codim(), 80, &delta_sq);
    let coset = best_coset(t, w, &u, exec)?;
    ledger.ge("coset restriction", "delta_coset >= delta", &coset.delta_sq(), &delta_sq);
    let tu = t.restrict(&u)?;
    ledger.check("coset restriction", "trilinear part of the coset phase is T|_U", coset.phi.multilinear_part() == tu);
    let cs = multiaffine_cs(&coset, exec)?;
    let d2 = cs.witness.delta_sq();
    ledger.push("multiaffine Cauchy-Schwarz", "delta'' >= delta_coset^8".into(), format!("{d2} vs {}", coset.delta_sq().pow(8)), cs.holds, cs.mode);
    ledger.ge("multiaffine Cauchy-Schwarz", "delta'' >= delta^8", &d2, &delta_sq.pow(8));
    let (inner, _b) = ncsm_subspace_f2(&tu)?;
    log_bound(&mut ledger, "nCSM subspace", "codim_U W <= 8 log_2(1/delta'')", p, inner.codim(), 8, &d2);
    let wsub = lift_subspace(&u, &inner)?;
    log_bound(&mut ledger, "nCSM subspace", "codim_V W <= 144 log_2(1/delta)", p, wsub.codim(), 144, &delta_sq);
    let (s, cert) = extend_from(t, &wsub)?;
    ledger.check("nCSM output", "S is nCSM", s.is_ncsm());
    ledger.check("certificate", "certificate for T - S verifies", rank::verify_certificate(&cert).ok);
    ledger.le_int("certificate length", "prank(T - S) <= 3 codim_V W", cert.len(), 3 * wsub.codim());
    log_bound(&mut ledger, "certificate length", "prank(T - S) <= 432 log_2(1/delta)", p, cert.len(), 432, &delta_sq);
    Ok(SymmetrizationReport { input: t.clone(), output: s, certificate: cert, subspace: wsub, r, delta_sq, ledger })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::random_phase;

    fn random_bilinear(p: Prime, n: usize, seed: u64) -> MultilinearForm {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        MultilinearForm::from_fn(p, n, 2, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % p.get() as u64) as u8
        })
        .unwrap()
    }

    #[test]
    fn derivative_witness_is_exact() {
        let inst = planted_instance(Prime::TWO, 3, 0, 4, Exec::Sequential).unwrap();
        assert_eq!(inst.witness.delta_sq(), Real::one());
        assert!(inst.certs.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn gt_defect_bound() {
        for seed in 0..20 {
            for (p, n) in [(Prime::TWO, 3), (Prime::THREE, 2)] {
                let a = random_bilinear(p, n, seed);
                let level = if p == Prime::TWO { 3 } else { 1 };
                let b: Vec<_> = (0..3).map(|i| random_phase(p, n, level, seed * 7 + i)).collect();
                let g = gt_defect(&a, &b, Exec::Sequential).unwrap();
                assert!(g.holds, "p={p} seed={seed}: {g:?}");
                assert_eq!(g.mode, Mode::Exact);
            }
        }
    }

    #[test]
    fn planted_classical() {
        for seed in 0..5 {
            let inst = planted_instance(Prime::THREE, 2, 1, seed, Exec::Sequential).unwrap();
            let rep = symmetrize_classical_p3(&inst.t, &inst.witness, Some(inst.certs.clone()), Exec::Sequential).unwrap();
            assert!(rep.ledger.all_hold(), "{}", rep.ledger.to_text());
            assert!(rep.output.is_csm());
            assert_eq!(rep.certificate.sum().unwrap(), inst.t.sub(&rep.output).unwrap());
        }
    }

    #[test]
    fn planted_nonclassical() {
        for seed in 0..5 {
            let inst = planted_instance(Prime::TWO, 3, 1, seed, Exec::Sequential).unwrap();
            let rep = symmetrize_nonclassical_p2(&inst.t, &inst.witness, Some(inst.certs.clone()), Exec::Sequential).unwrap();
            assert!(rep.ledger.all_hold(), "{}", rep.ledger.to_text());
            assert!(rep.output.is_ncsm());
        }
    }

    #[test]
    fn searched_certificates() {
        let inst = planted_instance(Prime::TWO, 2, 1, 3, Exec::Sequential).unwrap();
        let certs = defect_certificates(&inst.t, DEFECT_SEARCH_BUDGET).unwrap();
        for (c, planted) in certs.iter().zip(&inst.certs) {
            assert!(rank::verify_certificate(c).ok);
            assert!(c.len() <= planted.len().max(c.len()));
        }
        symmetric_subspace(&inst.t, &certs).unwrap();
    }

    #[test]
    fn multiaffine_cs_bound() {
        let p = Prime::TWO;
        let inst = planted_instance(p, 2, 1, 11, Exec::Sequential).unwrap();
        let mut phi = MultiaffineForm::from_multilinear(&inst.t);
        phi.set_component(1, MultilinearForm::from_fn(p, 2, 1, |j| j[0] as u8).unwrap()).unwrap();
        let b: Vec<_> = (0..7).map(|i| random_phase(p, 2, 2, 40 + i)).collect();
        let w = CorrelationWitness::new(phi, b, Exec::Sequential).unwrap();
        let cs = multiaffine_cs(&w, Exec::Sequential).unwrap();
        assert!(cs.holds);
        assert_eq!(cs.witness.trilinear().unwrap(), inst.t);
    }

    #[test]
    fn witness_text_round_trip() {
        let inst = planted_instance(Prime::THREE, 1, 1, 2, Exec::Sequential).unwrap();
        let back = CorrelationWitness::parse(&inst.witness.to_text(), Exec::Sequential).unwrap();
        assert_eq!(back.phi, inst.witness.phi);
        assert_eq!(back.delta_sq(), inst.witness.delta_sq());
        let c = CorrelationWitness::parse(&inst.witness.phi.to_text(), Exec::Sequential).unwrap();
        assert_eq!(c.b.len(), 7);
    }
}
