//! Planted instances: the derivative of a random cubic plus a few
//! partition-rank-one perturbations, with certificates for every `T - T_pi`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derivative_witness, CorrelationWitness};
use crate::analysis::BoundedFunction;
use crate::error::Result;
use crate::field::Prime;
use crate::mforms::{total_derivative, MultiaffineForm, MultilinearForm, PERMS3};
use crate::ncpoly::{random_poly_with, NcPoly};
use crate::par::Exec;
use crate::rank::{RankCertificate, Term};

/// A trilinear form with known certificates and a correlation witness.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    /// The cubic whose derivative is perturbed.
    pub base: NcPoly,
    /// `d^3 base + sum alpha_i(x_{s_i}) beta_i(other slots)`.
    pub t: MultilinearForm,
    /// Perturbation terms.
    pub terms: Vec<Term>,
    /// Witness built from `e(-base)` at the origin.
    pub witness: CorrelationWitness,
    /// Certificates for `T - T_pi`, `pi` over `PERMS3[1..]`.
    pub certs: Vec<RankCertificate>,
}

/// A random nonzero form.
fn random_form<R: Rng>(p: Prime, n: usize, k: usize, rng: &mut R) -> Result<MultilinearForm> {
    loop {
        let t = MultilinearForm::from_fn(p, n, k, |_| rng.gen_range(0..p.get()))?;
        if !t.is_zero() {
            return Ok(t);
        }
    }
}

/// `gamma_pi` for a single-slot term `gamma = R(x_s) S(x_a, x_b)`.
fn permuted_term(term: &Term, pi: &[usize; 3]) -> Term {
    let s = term.mask.trailing_zeros() as usize;
    let rest: Vec<usize> = (0..3).filter(|&t| t != s).collect();
    let ss = if pi[rest[0]] < pi[rest[1]] { term.s.clone() } else { term.s.transpose() };
    Term { mask: 1 << pi[s], r: term.r.clone(), s: ss }
}

/// Certificate for `T - T_pi` when `T - sum gamma_i` is symmetric.
pub fn planted_certificate(t: &MultilinearForm, terms: &[Term], pi: &[usize; 3]) -> Result<RankCertificate> {
    let p = t.prime();
    let mut out = Vec::with_capacity(2 * terms.len());
    for g in terms {
        out.push(g.clone());
        let mut neg = permuted_term(g, pi);
        neg.r = neg.r.scale(p.get() - 1);
        out.push(neg);
    }
    Ok(RankCertificate { terms: out, claimed: t.sub(&t.permute(pi)?)? })
}

/// Random planted instance: a non-classical cubic for `p = 2`, a classical
/// one otherwise, plus `count` single-slot perturbations.
pub fn planted_instance(p: Prime, n: usize, count: usize, seed: u64, exec: Exec) -> Result<PlantedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_poly_with(p, n, 3, p == Prime::TWO, &mut rng);
    let mut t = total_derivative(&base, 3)?;
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let slot = rng.gen_range(0..3usize);
        let term = Term { mask: 1 << slot, r: random_form(p, n, 1, &mut rng)?, s: random_form(p, n, 2, &mut rng)? };
        t = t.add(&term.tensor(3)?)?;
        terms.push(term);
    }
    let f = BoundedFunction::phase(&base).conj();
    let witness = CorrelationWitness::new(MultiaffineForm::from_multilinear(&t), derivative_witness(&f, 0), exec)?;
    let certs = PERMS3[1..].iter().map(|pi| planted_certificate(&t, &terms, pi)).collect::<Result<_>>()?;
    Ok(PlantedInstance { base, t, terms, witness, certs })
}
