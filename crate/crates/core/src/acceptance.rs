//! The acceptance suite: ten checks shared by `gowers selftest` and the
//! `acceptance` integration test. Quick mode shrinks the sample counts.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::kernels::{gowers_direct, gowers_norm};
use crate::analysis::{correlation, random_phase, BoundedFunction};
use crate::error::Result;
use crate::field::Prime;
use crate::integrate::{integrate_ncsm, ncsm_count};
use crate::ledger::Real;
use crate::mforms::{multiplicities, reduced_pattern, total_derivative, MultilinearForm};
use crate::ncpoly::{random_poly, Monomial, NcPoly};
use crate::par::Exec;
use crate::pipeline::{run_inverse_pipeline, PipelineOptions, Strategy};
use crate::rank::{self, analytic_rank, PrankResult};
use crate::symmetrize::{planted_instance, symmetrize_classical_p3, symmetrize_nonclassical_p2, SymmetrizationReport};
use crate::torus::TorusValue;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("[{status}] {:>2}. {} ({:.2}s): {}", self.id, self.name, self.elapsed.as_secs_f64(), self.detail)
    }
}

pub const NAMES: [&str; 10] = [
    "counting identity",
    "integration exactness",
    "total-derivative membership",
    "bilinear defect inequality",
    "symmetrization ledgers",
    "symmetrization certificates",
    "rank consistency",
    "end-to-end pipeline",
    "perturbation robustness",
    "U4 performance",
];

/// `log_p |nCSM^k(F_p^n)|` and `C_k`, frozen from a brute-force enumeration.
pub const COUNTS: [(u8, usize, usize, usize); 5] = [(2, 3, 1, 1), (2, 3, 2, 3), (2, 4, 2, 3), (3, 3, 1, 1), (3, 3, 2, 4)];

fn timed(id: usize, limit: Option<Duration>, body: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (mut passed, mut detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; over the {}s limit", limit.as_secs());
        }
    }
    Outcome { id, name: NAMES[id - 1], passed, detail, elapsed }
}

/// Runs one criterion (1-based).
pub fn run(id: usize, quick: bool, exec: Exec) -> Outcome {
    let secs = |s| Some(Duration::from_secs(s));
    match id {
        1 => timed(1, secs(10), counting),
        2 => timed(2, secs(60), || integration(quick, exec)),
        3 => timed(3, None, || membership(quick)),
        4 => timed(4, secs(120), || bilinear_defect(quick, exec)),
        5 => timed(5, None, || symmetrization(quick, exec).map(|(a, _)| a)),
        6 => timed(6, None, || symmetrization(quick, exec).map(|(_, b)| b)),
        7 => timed(7, secs(600), || rank_consistency(quick)),
        8 => timed(8, secs(600), || pipeline_fixtures(exec)),
        9 => timed(9, secs(300), || perturbation(exec)),
        10 => timed(10, secs(10), || performance(exec)),
        _ => Outcome { id, name: "unknown", passed: false, detail: "no such criterion".into(), elapsed: Duration::ZERO },
    }
}

pub fn run_all(quick: bool, exec: Exec) -> Vec<Outcome> {
    (1..=10).map(|id| run(id, quick, exec)).collect()
}

fn counting() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, k, n, want) in COUNTS {
        let p = Prime::new(p as u64)?;
        let c = ncsm_count(p, n, k, 1 << 24)?;
        let good = c.c_k == c.d_k && c.brute_log == Some(c.c_k) && c.c_k == want;
        ok &= good;
        parts.push(format!("(p={p},k={k},n={n}) C={} D={} brute={:?}", c.c_k, c.d_k, c.brute_log));
    }
    let f2 = ncsm_count(Prime::TWO, 2, 3, 1 << 24)?;
    let eight = f2.brute_log.map(|l| 2u64.pow(l as u32)) == Some(8);
    ok &= eight;
    parts.push(format!("|nCSM^3(F_2^2)| = 8: {eight}"));
    Ok((ok, parts.join("; ")))
}

/// A random nCSM form: symmetric, one random value per reduced pattern.
pub fn random_ncsm(p: Prime, n: usize, k: usize, rng: &mut impl Rng) -> Result<MultilinearForm> {
    let mut values: HashMap<Vec<usize>, u8> = HashMap::new();
    let mut tuples: Vec<Vec<usize>> = crate::mforms::sorted_tuples(n, k).collect();
    tuples.sort();
    for j in &tuples {
        let pat = reduced_pattern(p, &multiplicities(n, j));
        values.entry(pat).or_insert_with(|| rng.gen_range(0..p.get()));
    }
    MultilinearForm::from_fn(p, n, k, |j| values[&reduced_pattern(p, &multiplicities(n, j))])
}

const SETTINGS: [(u8, usize, usize); 3] = [(2, 3, 3), (2, 4, 2), (3, 3, 2)];

fn integration(quick: bool, exec: Exec) -> Result<(bool, String)> {
    let count = if quick { 10 } else { 100 };
    let mut failures = 0;
    let mut total = 0;
    for (p, k, nmax) in SETTINGS {
        let p = Prime::new(p as u64)?;
        for n in 1..=nmax {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * k as u64 + 10 * n as u64 + p.get() as u64);
            for _ in 0..count {
                let t = random_ncsm(p, n, k, &mut rng)?;
                total += 1;
                let ok = t.is_ncsm() && integrate_ncsm(&t, exec).and_then(|q| total_derivative(&q, k)).is_ok_and(|d| d == t);
                failures += usize::from(!ok);
            }
        }
    }
    Ok((failures == 0, format!("{total} inputs, {failures} failures")))
}

fn membership(quick: bool) -> Result<(bool, String)> {
    let count = if quick { 20 } else { 200 };
    let mut failures = 0;
    let mut total = 0;
    for (p, k, nmax) in SETTINGS {
        let p = Prime::new(p as u64)?;
        for n in 1..=nmax {
            for seed in 0..count {
                let c = random_poly(p, n, k, false, seed);
                let nc = random_poly(p, n, k, true, seed + 100_000);
                total += 2;
                failures += usize::from(!total_derivative(&c, k)?.is_csm());
                failures += usize::from(!total_derivative(&nc, k)?.is_ncsm());
            }
        }
    }
    Ok((failures == 0, format!("{total} polynomials, {failures} failures")))
}

fn bilinear_defect(quick: bool, exec: Exec) -> Result<(bool, String)> {
    let count = if quick { 60 } else { 500 };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = 0;
    let mut inexact = 0;
    for i in 0..count {
        let (p, n, level) = if i % 2 == 0 { (Prime::TWO, 1 + (i / 2) % 4, 3) } else { (Prime::THREE, 1 + (i / 2) % 3, 1) };
        let a = MultilinearForm::from_fn(p, n, 2, |_| rng.gen_range(0..p.get()))?;
        let b: Vec<BoundedFunction> = (0..3).map(|_| random_phase(p, n, level, rng.gen())).collect();
        let g = crate::symmetrize::gt_defect(&a, &b, exec)?;
        failures += usize::from(!g.holds);
        inexact += usize::from(g.mode != crate::ledger::Mode::Exact);
    }
    Ok((failures == 0 && inexact == 0, format!("{count} instances, {failures} failures, {inexact} inexact comparisons")))
}

const SYM_BOUNDS: [&str; 4] = ["<= 16 log_p(1/delta)", "codim U <= 5r", "codim_U U' <= 1", "<= 8 log_2(1/delta'')"];

/// Planted instances for both primes; returns (ledger check, certificate check).
fn symmetrization(quick: bool, exec: Exec) -> Result<((bool, String), (bool, String))> {
    let count = if quick { 8 } else { 50 };
    let mut ledger_fail = 0;
    let mut bound_hits = [0usize; 4];
    let mut cert_fail = 0;
    let mut max_len = [0usize; 2];
    for (pi, p, n) in [(0, Prime::THREE, 2), (1, Prime::TWO, 3)] {
        for seed in 0..count as u64 {
            let inst = planted_instance(p, n, 1 + (seed % 2) as usize, 7000 + seed, exec)?;
            let rep: SymmetrizationReport = if p == Prime::TWO {
                symmetrize_nonclassical_p2(&inst.t, &inst.witness, Some(inst.certs.clone()), exec)?
            } else {
                symmetrize_classical_p3(&inst.t, &inst.witness, Some(inst.certs.clone()), exec)?
            };
            ledger_fail += usize::from(!rep.ledger.all_hold());
            for e in &rep.ledger.entries {
                for (b, hits) in SYM_BOUNDS.iter().zip(bound_hits.iter_mut()) {
                    if e.claim.contains(b) && e.holds {
                        *hits += 1;
                    }
                }
            }
            let bound_ok = rep.ledger.entries.iter().filter(|e| e.name == "certificate length").all(|e| e.holds);
            let verified = rank::verify_certificate(&rep.certificate).ok && inst.certs.iter().all(|c| rank::verify_certificate(c).ok);
            let sum_ok = rep.certificate.sum()? == inst.t.sub(&rep.output)?;
            let class_ok = if p == Prime::TWO { rep.output.is_ncsm() } else { rep.output.is_csm() };
            cert_fail += usize::from(!(bound_ok && verified && sum_ok && class_ok));
            max_len[pi] = max_len[pi].max(rep.certificate.len());
        }
    }
    let a = (
        ledger_fail == 0 && bound_hits.iter().all(|&h| h > 0),
        format!("{} instances, {ledger_fail} with a failing entry; bounds checked {:?}", 2 * count, bound_hits),
    );
    let b = (
        cert_fail == 0,
        format!("{} instances, {cert_fail} failures; longest certificate p=3: {}, p=2: {}", 2 * count, max_len[0], max_len[1]),
    );
    Ok((a, b))
}

fn rank_consistency(quick: bool) -> Result<(bool, String)> {
    let p = Prime::TWO;
    let mut failures = 0;
    let mut max_rank = 0;
    let step = if quick { 17 } else { 1 };
    for code in (0..256usize).step_by(step) {
        let t = MultilinearForm::new(p, 2, 3, (0..8).map(|i| (code >> i & 1) as u8).collect())?;
        let ar = analytic_rank(&t, Exec::Sequential)?;
        match rank::prank_search(&t, 8, 1 << 20)? {
            PrankResult::Exact { rank, certificate } => {
                max_rank = max_rank.max(rank);
                let ok = rank::arank_below_length(&ar, p, rank) && rank::verify_certificate(&certificate).ok && certificate.len() == rank;
                failures += usize::from(!ok);
            }
            PrankResult::Unknown { .. } => failures += 1,
        }
    }
    let mut bilinear = 0;
    for q in [Prime::TWO, Prime::THREE] {
        let total = q.pow(4).unwrap() as usize;
        for code in 0..total {
            let mut c = code;
            let coeffs = (0..4)
                .map(|_| {
                    let v = (c % q.as_usize()) as u8;
                    c /= q.as_usize();
                    v
                })
                .collect();
            let b = MultilinearForm::new(q, 2, 2, coeffs)?;
            let rk = rank::bilinear_rank(&b)?.rank;
            let bias = analytic_rank(&b, Exec::Sequential)?.bias;
            let want = BigRational::new(BigInt::from(1), BigInt::from(q.get()).pow(rk as u32));
            failures += usize::from(bias != want);
            bilinear += 1;
        }
    }
    Ok((failures == 0, format!("{} trilinear (max prank {max_rank}), {bilinear} bilinear, {failures} failures", 256 / step + usize::from(step > 1))))
}

/// `|x_1| / 8` on F_2^n: the monomial `x_1` at depth 2.
pub fn eighth_cubic(n: usize) -> Result<NcPoly> {
    let mut exps = vec![0; n];
    exps[0] = 1;
    NcPoly::new(Prime::TWO, n, TorusValue::zero(Prime::TWO), vec![Monomial { exps, depth: 2, coeff: 1 }])
}

fn pipeline_fixtures(exec: Exec) -> Result<(bool, String)> {
    let p0 = eighth_cubic(3)?;
    let f = BoundedFunction::phase(&p0);
    let u4 = gowers_norm(&f, 4, exec)?;
    let mut opts = PipelineOptions::new(Strategy::FromPolynomialGuess(p0));
    opts.exec = exec;
    let start = Instant::now();
    let rep = run_inverse_pipeline(&f, 0.5, &opts)?;
    let t1 = start.elapsed();
    let recomputed = correlation(&f, &rep.polynomial)?.modulus_sq();
    let ok1 = u4.power == Real::one() && rep.ledger.all_hold() && rep.final_correlation.modulus_sq() == Real::one() && recomputed == Real::one();

    let c0 = NcPoly::classical_monomial(Prime::THREE, vec![2, 1], 1)?;
    let g = BoundedFunction::phase(&c0);
    opts.strategy = Strategy::FromPolynomialGuess(c0);
    let start = Instant::now();
    let rep3 = run_inverse_pipeline(&g, 0.5, &opts)?;
    let t3 = start.elapsed();
    let ok3 = rep3.classical && rep3.ledger.all_hold() && correlation(&g, &rep3.polynomial)?.modulus_sq() == Real::one();
    let limit = Duration::from_secs(300);
    Ok((
        ok1 && ok3 && t1 < limit && t3 < limit,
        format!(
            "F_2^3 |x1|/8: correlation^2 {} ledger {}/{} green ({:.2}s); F_3^2 x1^2 x2: classical {} correlation^2 {} ({:.2}s)",
            rep.final_correlation.modulus_sq(),
            rep.ledger.entries.len() - rep.ledger.failures().len(),
            rep.ledger.entries.len(),
            t1.as_secs_f64(),
            rep3.classical,
            rep3.final_correlation.modulus_sq(),
            t3.as_secs_f64()
        ),
    ))
}

/// `f = omega^{P_0}` with `ceil(5% of |V|)` values replaced by random
/// eighth roots of unity other than the original value, and the lower bound `1 - 2k/|V|` on `|E f e(-P_0)|`.
pub fn noisy_instance(seed: u64) -> Result<(NcPoly, BoundedFunction, Vec<usize>, BigRational)> {
    let p0 = eighth_cubic(3)?;
    let mut f = BoundedFunction::phase(&p0);
    let size = f.len();
    let k = (size * 5).div_ceil(100);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = Vec::new();
    while points.len() < k {
        let x = rng.gen_range(0..size);
        if !points.contains(&x) {
            points.push(x);
        }
    }
    for &x in &points {
        let old = f.phase_exponents().map(|(level, e)| e[x] << (3 - level)).expect("phase");
        f = f.with_phase_value(x, 3, (old as u64 + rng.gen_range(1..8)) % 8);
    }
    let bound = BigRational::new(BigInt::from(size as i64 - 2 * k as i64), BigInt::from(size as i64));
    Ok((p0, f, points, bound))
}

fn perturbation(exec: Exec) -> Result<(bool, String)> {
    let (p0, f, points, bound) = noisy_instance(9)?;
    let phi = crate::mforms::MultiaffineForm::from_multilinear(&total_derivative(&p0, 3)?);
    let mut opts = PipelineOptions::new(Strategy::Supplied(phi));
    opts.exec = exec;
    let rep = run_inverse_pipeline(&f, 0.1, &opts)?;
    let got = correlation(&f, &rep.polynomial)?.modulus_sq();
    let planted = correlation(&f, &p0)?.modulus_sq();
    let b2 = Real::exact(&bound * &bound);
    let (above_bound, mode) = got.ge(&b2);
    let (above_half, _) = got.ge(&Real::exact(BigRational::new(1.into(), 4.into())));
    let (planted_ok, _) = planted.ge(&b2);
    Ok((
        above_bound && above_half && planted_ok && rep.ledger.all_hold() && got == rep.final_correlation.modulus_sq(),
        format!(
            "{} noisy points; correlation^2 {got} vs bound^2 {} ({mode}); ledger green {}",
            points.len(),
            b2,
            rep.ledger.all_hold()
        ),
    ))
}

fn performance(exec: Exec) -> Result<(bool, String)> {
    let f = random_phase(Prime::TWO, 8, 3, 10);
    let start = Instant::now();
    let v = gowers_norm(&f, 4, exec)?;
    let t = start.elapsed();
    let small = random_phase(Prime::TWO, 3, 3, 11);
    let inductive = gowers_norm(&small, 4, exec)?.power;
    let direct = gowers_direct(&small, 4, 1 << 30)?;
    let (same, mode) = inductive.eq_value(&direct);
    Ok((
        v.power.is_exact() && same && mode == crate::ledger::Mode::Exact && t < Duration::from_secs(10),
        format!("F_2^8 U4 = {:.9} exact {} in {:.2}s; F_2^3 inductive = direct: {same}", v.norm, v.power.is_exact(), t.as_secs_f64()),
    ))
}
