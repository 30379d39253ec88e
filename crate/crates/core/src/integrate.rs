//! Solving `d^k P = T` for classical and non-classical polynomials.

use crate::error::{Error, Result};
use crate::field::{self, Prime};
use crate::mforms::{multiplicities, ncsm_by_evaluation, reduced_pattern, sorted_tuples, total_derivative, MultilinearForm};
use crate::ncpoly::{basis_tuples, Monomial, NcPoly, MAX_DEPTH};
use crate::par::{self, Exec};
use crate::torus::TorusValue;

/// Solves for a combination of `basis` monomials whose `k`-th total
/// derivative is `t`.
///
/// `d^k` is additive on functions and a monomial with coefficient `c < p` is
/// the `c`-fold sum of the coefficient-one monomial, so the derivative of
/// `sum c_m m` is `sum c_m d^k m` and the system is linear over F_p.
fn solve_for(t: &MultilinearForm, basis: Vec<(Vec<u8>, u32)>, exec: Exec) -> Result<NcPoly> {
    let p = t.prime();
    let n = t.dim();
    let k = t.arity();
    let columns: Vec<MultilinearForm> = par::map_collect(exec, basis.len(), |c| {
        let (exps, depth) = &basis[c];
        let m = NcPoly::new(p, n, TorusValue::zero(p), vec![Monomial { exps: exps.clone(), depth: *depth, coeff: 1 }])
            .expect("basis monomial");
        total_derivative(&m, k).expect("basis monomial has degree k")
    });
    let rows: Vec<Vec<usize>> = sorted_tuples(n, k).collect();
    let a: Vec<Vec<u8>> = rows.iter().map(|j| columns.iter().map(|col| col.get(j)).collect()).collect();
    let b: Vec<u8> = rows.iter().map(|j| t.get(j)).collect();
    let x = field::solve(p, &a, &b, basis.len())
        .ok_or_else(|| Error::Internal(format!("linear system inconsistent for an admissible input: {t}")))?;
    let monomials = basis
        .into_iter()
        .zip(x)
        .filter(|(_, c)| *c != 0)
        .map(|((exps, depth), coeff)| Monomial { exps, depth, coeff })
        .collect();
    let poly = NcPoly::new(p, n, TorusValue::zero(p), monomials)?;
    if total_derivative(&poly, k)? != *t {
        return Err(Error::Internal(format!("integration failed verification for {t}")));
    }
    Ok(poly)
}

/// Classical polynomial of degree `<= k` with `d^k P = T`, for `T` in CSM.
pub fn integrate_csm(t: &MultilinearForm, exec: Exec) -> Result<NcPoly> {
    if !t.is_csm() {
        return Err(Error::NotInClass(csm_witness(t)));
    }
    let k = t.arity();
    let basis: Vec<(Vec<u8>, u32)> = basis_tuples(t.prime(), t.dim(), k, false)
        .into_iter()
        .filter(|(e, _)| e.iter().map(|&v| v as usize).sum::<usize>() == k)
        .collect();
    solve_for(t, basis, exec)
}

/// Non-classical polynomial with `d^k P = T`, for `T` in nCSM. Only
/// monomials of degree exactly `k` are used.
pub fn integrate_ncsm(t: &MultilinearForm, exec: Exec) -> Result<NcPoly> {
    if let Some((a, b)) = t.ncsm_violation() {
        let msg = if a.is_empty() {
            "not symmetric".to_string()
        } else {
            format!("coefficients at {} and {} differ but share a reduced pattern", fmt_tuple(&a), fmt_tuple(&b))
        };
        return Err(Error::NotInClass(msg));
    }
    let p = t.prime();
    let k = t.arity();
    let basis: Vec<(Vec<u8>, u32)> =
        basis_tuples(p, t.dim(), k, true).into_iter().filter(|(e, j)| degree_of(p, e, *j) == k).collect();
    solve_for(t, basis, exec)
}

fn degree_of(p: Prime, exps: &[u8], depth: u32) -> usize {
    exps.iter().map(|&v| v as usize).sum::<usize>() + depth as usize * (p.as_usize() - 1)
}

fn fmt_tuple(j: &[usize]) -> String {
    let parts: Vec<String> = j.iter().map(|t| (t + 1).to_string()).collect();
    format!("({})", parts.join(","))
}

fn csm_witness(t: &MultilinearForm) -> String {
    if !t.is_ncsm() {
        return "not an nCSM form".into();
    }
    let p = t.prime().as_usize();
    match sorted_tuples(t.dim(), t.arity()).find(|j| t.get(j) != 0 && multiplicities(t.dim(), j).iter().any(|&i| i >= p)) {
        Some(j) => format!("coefficient at {} is nonzero with a repeated index of multiplicity >= {p}", fmt_tuple(&j)),
        None => "not a CSM form".into(),
    }
}

/// Both sides of the counting identity for nCSM forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcsmCount {
    /// Number of monomial tuples `(i, j)` with `|i| = k - j(p-1)`.
    pub c_k: usize,
    /// Number of reduced patterns realized by index tuples of length `k`.
    pub d_k: usize,
    /// `log_p |nCSM^k(F_p^n)|` by enumerating all symmetric tensors, when
    /// that enumeration fits the budget.
    pub brute_log: Option<usize>,
}

impl NcsmCount {
    pub fn agreement(&self) -> bool {
        self.c_k == self.d_k && self.brute_log.is_none_or(|b| b == self.c_k)
    }
}

pub fn ncsm_count(p: Prime, n: usize, k: usize, budget: u128) -> Result<NcsmCount> {
    let q = p.as_usize() - 1;
    let mut c_k = 0;
    if k >= 1 {
        for j in 0..=((k - 1) / q).min(MAX_DEPTH as usize + 8) {
            let target = k - j * q;
            c_k += count_exponents(p, n, target);
        }
    }
    let mut patterns = std::collections::HashSet::new();
    let tuples: Vec<Vec<usize>> = sorted_tuples(n, k).collect();
    for j in &tuples {
        patterns.insert(reduced_pattern(p, &multiplicities(n, j)));
    }
    let d_k = if k == 0 { 0 } else { patterns.len() };
    let total = p.pow(tuples.len() as u32).unwrap_or(u128::MAX);
    let brute_log = if total <= budget {
        let mut count: u128 = 0;
        for code in 0..total {
            let mut c = code;
            let mut vals = std::collections::HashMap::new();
            for j in &tuples {
                vals.insert(j.clone(), (c % p.get() as u128) as u8);
                c /= p.get() as u128;
            }
            let t = MultilinearForm::from_fn(p, n, k, |j| {
                let mut s = j.to_vec();
                s.sort_unstable();
                vals[&s]
            })?;
            if ncsm_by_evaluation(&t, false, budget)? {
                count += 1;
            }
        }
        let mut log = 0;
        let mut v = count;
        while v > 1 && v % p.get() as u128 == 0 {
            v /= p.get() as u128;
            log += 1;
        }
        if v != 1 {
            return Err(Error::Internal(format!("nCSM count {count} is not a power of {p}")));
        }
        Some(log)
    } else {
        None
    };
    Ok(NcsmCount { c_k, d_k, brute_log })
}

/// Number of `(i_1..i_n)` with `0 <= i_l < p` summing to `target`.
fn count_exponents(p: Prime, n: usize, target: usize) -> usize {
    let mut ways = vec![0usize; target + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0usize; target + 1];
        for (s, &w) in ways.iter().enumerate() {
            for i in 0..p.as_usize() {
                if s + i <= target {
                    next[s + i] += w;
                }
            }
        }
        ways = next;
    }
    ways[target]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::random_poly;

    #[test]
    fn csm_examples() {
        let p = Prime::TWO;
        let z = MultilinearForm::zero(p, 2, 2).unwrap();
        assert_eq!(integrate_csm(&z, Exec::Sequential).unwrap(), NcPoly::zero(p, 2));
        let t = MultilinearForm::from_fn(p, 2, 2, |j| u8::from(j[0] != j[1])).unwrap();
        assert_eq!(integrate_csm(&t, Exec::Sequential).unwrap(), NcPoly::classical_monomial(p, vec![1, 1], 1).unwrap());
        let p3 = Prime::THREE;
        let t = MultilinearForm::from_fn(p3, 1, 2, |_| 2).unwrap();
        assert_eq!(integrate_csm(&t, Exec::Sequential).unwrap(), NcPoly::classical_monomial(p3, vec![2], 1).unwrap());
        let s = MultilinearForm::from_fn(p3, 1, 3, |_| 1).unwrap();
        assert!(matches!(integrate_csm(&s, Exec::Sequential), Err(Error::NotInClass(_))));
    }

    #[test]
    fn ncsm_examples() {
        let p = Prime::TWO;
        let t = MultilinearForm::from_fn(p, 1, 2, |_| 1).unwrap();
        let q = integrate_ncsm(&t, Exec::Sequential).unwrap();
        assert_eq!(q.monomials(), &[Monomial { exps: vec![1], depth: 1, coeff: 1 }]);
        let t = MultilinearForm::from_fn(p, 2, 3, |j| {
            let ones = j.iter().filter(|&&v| v == 0).count();
            u8::from(ones == 1 || ones == 2)
        })
        .unwrap();
        let q = integrate_ncsm(&t, Exec::Sequential).unwrap();
        assert_eq!(total_derivative(&q, 3).unwrap(), t);
    }

    #[test]
    fn integration_inverts_derivative() {
        for seed in 0..100u64 {
            for (p, n, k) in [(Prime::TWO, 3, 3), (Prime::TWO, 2, 4), (Prime::THREE, 2, 3)] {
                let orig = random_poly(p, n, k, true, seed);
                let t = total_derivative(&orig, k).unwrap();
                let q = integrate_ncsm(&t, Exec::Sequential).unwrap();
                assert!(orig.sub(&q).unwrap().degree() < k.max(1));
                let c = random_poly(p, n, k, false, seed + 500);
                let tc = total_derivative(&c, k).unwrap();
                let qc = integrate_csm(&tc, Exec::Parallel).unwrap();
                assert!(qc.is_classical());
                let qn = integrate_ncsm(&tc, Exec::Parallel).unwrap();
                assert!(qc.sub(&qn).unwrap().degree() < k);
            }
        }
    }

    #[test]
    fn counting_identity() {
        let c = ncsm_count(Prime::TWO, 2, 3, 1 << 20).unwrap();
        assert_eq!(c, NcsmCount { c_k: 3, d_k: 3, brute_log: Some(3) });
        assert_eq!(ncsm_count(Prime::THREE, 1, 3, 1 << 20).unwrap().c_k, 1);
        assert_eq!(ncsm_count(Prime::FIVE, 4, 1, 1 << 20).unwrap().c_k, 4);
        for p in [Prime::TWO, Prime::THREE] {
            for k in 1..=4 {
                for n in 1..=3 {
                    let c = ncsm_count(p, n, k, 1 << 12).unwrap();
                    assert!(c.agreement(), "p={p} n={n} k={k}: {c:?}");
                }
            }
        }
    }
}
