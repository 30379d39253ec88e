//! The full run and its report.

use num_rational::BigRational;
use num_traits::FromPrimitive;
use sha2::{Digest, Sha256};

use super::*;
use crate::analysis::kernels::{gowers_norm, u3_octolinear, GowersValue};
use crate::analysis::{correlation, linear_poly, u3_inverse_bruteforce};
use crate::fpspace::LinearForm;
use crate::ledger::Mode;
use crate::mforms::PERMS3;
use crate::symmetrize::{
    derivative_witness, multiaffine_cs, symmetrize_classical_p3, symmetrize_nonclassical_p2, CorrelationWitness,
    SymmetrizationReport,
};

/// Knobs of [`run_inverse_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub strategy: Strategy,
    /// Restrict the U^3 oracle to classical quadratics.
    pub classical_only: bool,
    /// Cap on the number of quadratic candidates the U^3 oracle enumerates.
    pub budget: u128,
    /// Largest certificate length whose factors are enumerated.
    pub derandomize_cap: usize,
    pub exec: Exec,
}

impl PipelineOptions {
    pub fn new(strategy: Strategy) -> PipelineOptions {
        PipelineOptions { strategy, classical_only: false, budget: 1 << 24, derandomize_cap: 3, exec: Exec::default() }
    }
}

/// Everything a run produced, with its ledger.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub digest: String,
    pub p: Prime,
    pub n: usize,
    pub strategy: &'static str,
    pub u4: GowersValue,
    pub phi: MultiaffineForm,
    pub eps: Average,
    pub symmetrization: SymmetrizationReport,
    /// Cubic with `d^3 P = S`.
    pub cubic: NcPoly,
    pub r: usize,
    pub first: Derandomized,
    pub cleaned: Vec<CleanedBilinear>,
    pub second: Derandomized,
    pub linear: Vec<LinearForm>,
    /// `||f omega^P||_{U^3}`.
    pub u3: GowersValue,
    /// U^3 oracle output `Q` maximizing `|E f omega^P e(-Q)|`.
    pub oracle: NcPoly,
    /// `Q - P`.
    pub polynomial: NcPoly,
    pub final_correlation: Average,
    pub classical: bool,
    pub ledger: Ledger,
}

fn hex_digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn fmt_vec(v: &[u8]) -> String {
    let s: Vec<String> = v.iter().map(u8::to_string).collect();
    format!("({})", s.join(","))
}

impl PipelineReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("inverse pipeline report\n");
        s.push_str(&format!("input sha256 = {}\np = {}, n = {}\nstrategy = {}\n", self.digest, self.p, self.n, self.strategy));
        s.push_str(&format!("||f||_U4^16 = {}\n", self.u4.power));
        s.push_str(&format!("eps^2 = {}\n", self.eps.modulus_sq()));
        s.push_str(&format!("r = {}\n", self.r));
        s.push_str(&format!("c = {}, xi0 = {}\n", fmt_vec(&self.first.c), fmt_vec(&self.first.xi0)));
        s.push_str(&format!("c' = {}, xi0' = {}\n", fmt_vec(&self.second.c), fmt_vec(&self.second.xi0)));
        s.push_str(&format!("||f omega^P||_U3^8 = {}\n", self.u3.power));
        s.push_str(&format!("final correlation^2 = {}\n", self.final_correlation.modulus_sq()));
        s.push_str(&format!("classical = {}\n", self.classical));
        s.push_str(&format!("ledger: {} entries, {} failing\n\n", self.ledger.entries.len(), self.ledger.failures().len()));
        s.push_str(&self.ledger.to_text());
        s.push_str("\n== machine-readable ==\n");
        s.push_str(&format!("digest {}\nfinal_correlation_sq {}\nclassical {}\nall_hold {}\n", self.digest, self.final_correlation.modulus_sq().to_f64(), self.classical, self.ledger.all_hold()));
        s.push_str("[phi]\n");
        s.push_str(&self.phi.to_text());
        s.push_str("[S]\n");
        s.push_str(&self.symmetrization.output.to_text());
        s.push_str("[certificate T-S]\n");
        s.push_str(&self.symmetrization.certificate.to_text());
        s.push_str("[P]\n");
        s.push_str(&self.cubic.to_text());
        for c in &self.cleaned {
            s.push_str(&format!("[Q{}]\n", c.slot + 1));
            s.push_str(&c.q.to_text());
        }
        for (i, l) in self.linear.iter().enumerate() {
            s.push_str(&format!("[L{}]\n{}\n", i + 1, l.coeffs.iter().map(u8::to_string).collect::<Vec<_>>().join(" ")));
        }
        s.push_str("[U3 oracle]\n");
        s.push_str(&self.oracle.to_text());
        s.push_str("[polynomial]\n");
        s.push_str(&self.polynomial.to_text());
        s
    }
}

/// `||f||_{U^4} >= threshold`, checked as `||f||^16 >= threshold^16`.
fn u4_gate(u4: &GowersValue, threshold: f64) -> (bool, String) {
    let t = BigRational::from_f64(threshold).map(Real::exact).unwrap_or_else(|| Real::float(threshold));
    let (holds, _) = u4.power.ge(&t.pow(16));
    (holds, format!("||f||_U4 = {:.9} vs threshold {threshold}", u4.norm))
}

/// Best `x0` for the seven-function witness of `f`.
fn best_witness(f: &BoundedFunction, phi: &MultiaffineForm, exec: Exec) -> Result<(usize, CorrelationWitness)> {
    let mut best: Option<(Real, usize, CorrelationWitness)> = None;
    for x0 in 0..f.space().size() {
        let w = CorrelationWitness::new(phi.clone(), derivative_witness(f, x0), exec)?;
        let sq = w.delta_sq();
        if best.as_ref().is_none_or(|(b, ..)| !b.ge(&sq).0) {
            best = Some((sq, x0, w));
        }
    }
    let (_, x0, w) = best.expect("nonempty space");
    Ok((x0, w))
}

/// `phi - S` as a triaffine form.
fn minus_trilinear(phi: &MultiaffineForm, s: &MultilinearForm) -> Result<MultiaffineForm> {
    let neg = MultiaffineForm::from_multilinear(&s.scale(s.prime().get() - 1));
    phi.add(&neg)
}

/// `psi` with its trilinear component removed.
fn lower_part(psi: &MultiaffineForm) -> Result<MultiaffineForm> {
    let mut out = psi.clone();
    let full = out.full_mask();
    out.set_component(full, MultilinearForm::zero(psi.prime(), psi.dim(), 3)?)?;
    Ok(out)
}

/// Runs every stage, ledgering each inequality; stages that cannot run
/// return an error, while inequalities that fail are recorded and the run
/// continues.
pub fn run_inverse_pipeline(f: &BoundedFunction, delta_threshold: f64, opts: &PipelineOptions) -> Result<PipelineReport> {
    let p = f.prime();
    let n = f.dim();
    let exec = opts.exec;
    if p == Prime::FIVE {
        return Err(Error::UnsupportedPrime(5));
    }
    let mut ledger = Ledger::new();
    let u4 = gowers_norm(f, 4, exec)?;
    let (gate, msg) = u4_gate(&u4, delta_threshold);
    if !gate {
        return Err(Error::Precondition(format!("refusing to run: {msg}")));
    }
    let mode = if u4.power.is_exact() { Mode::Exact } else { Mode::Float };
    ledger.push("U4 gate", "||f||_U4 >= delta".into(), msg, true, mode);

    // triaffine phase
    let (phi, eps) = find_triaffine(f, &opts.strategy, exec)?;
    let eps_sq = eps.modulus_sq();
    ledger.check("triaffine correlation", "eps > 0", !Real::zero().ge(&eps_sq).0);
    let t = phi.multilinear_part();

    // seven functions and the permutation defects
    let (_x0, w) = best_witness(f, &phi, exec)?;
    ledger.ge("seven-function witness", "delta >= eps", &w.delta_sq(), &eps_sq);
    let cs = multiaffine_cs(&w, exec)?;
    ledger.push("multiaffine Cauchy-Schwarz", "delta'' >= delta^8".into(), format!("{} vs {}", cs.witness.delta_sq(), w.delta_sq().pow(8)), cs.holds, cs.mode);
    for pi in &PERMS3[1..] {
        let ar = rank::analytic_rank(&t.sub(&t.permute(pi)?)?, exec)?;
        ledger.ge(
            "permutation defect",
            &format!("arank(T - T_{pi:?}) <= 128 log_p(1/eps)"),
            &Real::exact(ar.bias.clone()).pow(2),
            &eps_sq.pow(128),
        );
    }

    // symmetrize and integrate
    let sym = if p == Prime::TWO {
        symmetrize_nonclassical_p2(&t, &cs.witness, None, exec)?
    } else {
        symmetrize_classical_p3(&t, &cs.witness, None, exec)?
    };
    ledger.extend(sym.ledger.clone());
    let s = sym.output.clone();
    let cubic = if p == Prime::TWO { integrate_ncsm(&s, exec)? } else { integrate_csm(&s, exec)? };
    ledger.check("integration", "d^3 P = S", total_derivative(&cubic, 3)? == s);
    let cert = &sym.certificate;
    let ar = rank::analytic_rank(&cert.claimed, exec)?;
    ledger.check("rank", "arank(T - S) <= certificate length", rank::arank_below_length(&ar, p, cert.len()));
    let r = cert.len().max(ceil_log_inv_sqrt(&eps_sq, p).expect("eps > 0"));
    ledger.push("r", "r = max(prank(T - S), ceil log_p(1/eps))".into(), format!("{} = max({}, ..)", r, cert.len()), true, Mode::Exact);

    // g = f omega^P
    let g = f.times_phase(&cubic, 1)?;
    let psi0 = minus_trilinear(&phi, &s)?;
    let v0 = triaffine_correlation(&g, &psi0, exec)?;
    ledger.check("twist by P", "E d^3(f omega^P) omega^{phi - S} = eps", v0.modulus_sq() == eps_sq);

    // first derandomization
    let base = lower_part(&psi0)?;
    let first = derandomize_indicator(&g, &base, &term_factors(&cert.terms), 2 * opts.derandomize_cap, exec)?;
    ledger_scaled(&mut ledger, "derandomization", "|E b 1(Gamma = c) d^3 g| >= eps p^{-2r}", &first.bucket, &eps_sq, p, 2 * r);
    ledger.ge("derandomization", "|E b omega^{xi0.Gamma} d^3 g| >= |E b 1(Gamma = c) d^3 g|", &first.value.modulus_sq(), &first.bucket.modulus_sq());
    ledger_scaled(&mut ledger, "derandomization", "|E b' d^3 g| >= eps p^{-2r}", &first.value, &eps_sq, p, 2 * r);

    // bilinear cleanup
    let cleaned = bilinear_cleanup(&g, &first.psi, exec)?;
    let mut second_base = first.psi.clone();
    for c in &cleaned {
        let i = c.slot + 1;
        let rhs = eps_sq.mul(&Real::prime_power(p, -4 * r as i64));
        ledger.ge("bilinear slice", &format!("delta_{i} >= eps p^(-2r)"), &c.gt.delta_sq, &rhs);
        ledger.push(
            "bilinear defect",
            format!("bias(beta_{i} - beta_{i}^T) >= delta_{i}^8"),
            format!("{} vs delta^2 = {}", c.gt.bias, c.gt.delta_sq),
            c.gt.holds,
            c.gt.mode,
        );
        ledger.ge(
            "bilinear defect",
            &format!("arank(beta_{i} - beta_{i}^T) <= 24r"),
            &Real::exact(c.gt.bias.clone()).pow(2),
            &Real::prime_power(p, -48 * r as i64),
        );
        ledger.le_int("bilinear nullspace", &format!("codim U_{i} <= 24r"), c.subspace.codim(), 24 * r);
        ledger.check("bilinear cleanup", &format!("beta_{i}' symmetric"), c.beta_sym.is_symmetric());
        ledger.check("bilinear cleanup", &format!("certificate for beta_{i} - beta_{i}' verifies"), rank::verify_certificate(&c.certificate).ok);
        ledger.le_int("bilinear cleanup", &format!("prank(beta_{i} - beta_{i}') <= 48r"), c.certificate.len(), 48 * r);
        ledger.check("bilinear cleanup", &format!("d^2 Q_{i} = beta_{i}'"), total_derivative(&c.q, 2)? == c.beta_sym);
        second_base.set_component(beta_mask(c.slot), c.beta_sym.clone())?;
    }

    // second derandomization
    let factors = cleanup_factors(&cleaned);
    let second = derandomize_indicator(&g, &second_base, &factors, 4 * opts.derandomize_cap, exec)?;
    ledger_scaled(&mut ledger, "second derandomization", "|E b'' omega^{beta'} d^3 g| >= eps p^{-290r}", &second.value, &eps_sq, p, 290 * r);
    let actual = 2 * r + factors.len();
    ledger_scaled(&mut ledger, "second derandomization", &format!("|E b'' omega^{{beta'}} d^3 g| >= eps p^(-{actual}) (enumerated factors)"), &second.value, &eps_sq, p, actual);
    let quad_ok = cleaned.iter().all(|c| second.psi.component(beta_mask(c.slot)) == &c.beta_sym);
    ledger.check("second derandomization", "bilinear part of the phase is beta_1' + beta_2' + beta_3'", quad_ok);
    let linear: Vec<LinearForm> = (0..3).map(|i| LinearForm::new(second.psi.component(1 << i).coeffs().to_vec())).collect();

    // the eight functions
    let qs: Vec<&NcPoly> = cleaned.iter().map(|c| &c.q).collect();
    let gs = (0..8usize)
        .map(|wv| {
            let mut poly = NcPoly::zero(p, n);
            for i in 0..3 {
                if wv >> i & 1 == 1 {
                    poly = poly.add(qs[i])?;
                }
                let others = 7 ^ (1 << i);
                if wv & others == others {
                    poly = poly.add(&linear_poly(p, &linear[i]))?;
                }
            }
            g.times_phase(&poly, 1)
        })
        .collect::<Result<Vec<_>>>()?;
    let oct = u3_octolinear(&gs, exec)?;
    ledger.check("eight functions", "|octolinear average| = |E b'' omega^{beta'} d^3 g|", oct.average.modulus_sq().eq_value(&second.value.modulus_sq()).0);
    ledger.push("Gowers-Cauchy-Schwarz", "|average|^8 <= prod ||g_w||_U3^8".into(), format!("{} vs {}", oct.lhs, oct.rhs), oct.gcs_holds, oct.mode);
    let u3 = oct.u3[0].clone();
    ledger.check("Gowers-Cauchy-Schwarz", "||g_w||_U3 equal for all w", oct.u3.iter().all(|v| v.power.eq_value(&u3.power).0));
    let target = eps_sq.mul(&Real::prime_power(p, -580 * r as i64)).pow(8);
    ledger.ge("Gowers-Cauchy-Schwarz", "||f omega^P||_U3 >= eps p^{-290r}", &u3.power.pow(2), &target);
    ledger.ge("Gowers-Cauchy-Schwarz", "||f omega^P||_U3^8 >= |average|", &u3.power.pow(2), &oct.average.modulus_sq());

    // U^3 oracle
    let classical_only = opts.classical_only || p != Prime::TWO;
    let (oracle, oracle_avg) = u3_inverse_bruteforce(&g, classical_only, opts.budget, exec)?;
    let polynomial = oracle.sub(&cubic)?;
    let final_correlation = correlation(f, &polynomial)?;
    ledger.check("U3 oracle", "|E f e(-(Q - P))| = |E f omega^P e(-Q)|", final_correlation.modulus_sq() == oracle_avg.modulus_sq());
    ledger.check("U3 oracle", "final correlation > 0", !Real::zero().ge(&final_correlation.modulus_sq()).0);
    let classical = polynomial.is_classical();
    if p != Prime::TWO {
        ledger.check("classical output", "P classical for p >= 3", classical);
    }
    ledger.le_int("degree", "deg P <= 3", polynomial.degree(), 3);
    Ok(PipelineReport {
        digest: hex_digest(&f.to_text()),
        p,
        n,
        strategy: opts.strategy.name(),
        u4,
        phi,
        eps,
        symmetrization: sym,
        cubic,
        r,
        first,
        cleaned,
        second,
        linear,
        u3,
        oracle,
        polynomial,
        final_correlation,
        classical,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::Monomial;
    use crate::torus::TorusValue;

    fn eighth(n: usize) -> NcPoly {
        let mut exps = vec![0; n];
        exps[0] = 1;
        NcPoly::new(Prime::TWO, n, TorusValue::zero(Prime::TWO), vec![Monomial { exps, depth: 2, coeff: 1 }]).unwrap()
    }

    #[test]
    fn exact_nonclassical_cubic() {
        let p0 = eighth(3);
        let f = BoundedFunction::phase(&p0);
        let opts = PipelineOptions::new(Strategy::FromPolynomialGuess(p0.clone()));
        let rep = run_inverse_pipeline(&f, 0.5, &opts).unwrap();
        assert!(rep.ledger.all_hold(), "{}", rep.ledger.to_text());
        assert_eq!(rep.final_correlation.modulus_sq(), Real::one());
        assert_eq!(correlation(&f, &rep.polynomial).unwrap().modulus_sq(), Real::one());
        assert_eq!(rep.to_text(), run_inverse_pipeline(&f, 0.5, &opts).unwrap().to_text());
    }

    #[test]
    fn classical_cubic_over_f3() {
        let p0 = NcPoly::classical_monomial(Prime::THREE, vec![2, 1], 1).unwrap();
        let f = BoundedFunction::phase(&p0);
        let rep = run_inverse_pipeline(&f, 0.5, &PipelineOptions::new(Strategy::FromPolynomialGuess(p0))).unwrap();
        assert!(rep.ledger.all_hold(), "{}", rep.ledger.to_text());
        assert!(rep.classical);
        assert_eq!(rep.final_correlation.modulus_sq(), Real::one());
    }

    #[test]
    fn exhaustive_matches_guess() {
        let p0 = NcPoly::classical_monomial(Prime::TWO, vec![1, 1], 1).unwrap();
        let f = BoundedFunction::phase(&p0).with_phase_value(3, 2, 1);
        let (_, eps) = find_triaffine(&f, &Strategy::ExhaustiveTrilinear, Exec::Sequential).unwrap();
        let (_, zero) = find_triaffine(&f, &Strategy::Supplied(MultiaffineForm::zero(Prime::TWO, 2, 3).unwrap()), Exec::Sequential).unwrap();
        assert!(eps.modulus_sq().ge(&zero.modulus_sq()).0);
    }

    #[test]
    fn constant_function() {
        let f = BoundedFunction::one(Prime::TWO, 2);
        let (phi, eps) = find_triaffine(&f, &Strategy::FromPolynomialGuess(NcPoly::zero(Prime::TWO, 2)), Exec::Sequential).unwrap();
        assert!(phi.multilinear_part().is_zero());
        assert_eq!(eps.modulus_sq(), Real::one());
    }

    #[test]
    fn noise_is_refused() {
        let f = crate::analysis::random_phase(Prime::TWO, 3, 3, 9);
        let err = run_inverse_pipeline(&f, 0.99, &PipelineOptions::new(Strategy::ExhaustiveTrilinear)).unwrap_err();
        assert!(err.to_string().contains("||f||_U4"), "{err}");
    }

    #[test]
    fn planted_derandomization() {
        let inst = crate::symmetrize::planted_instance(Prime::TWO, 2, 1, 5, Exec::Sequential).unwrap();
        let g = BoundedFunction::phase(&inst.base).conj();
        let psi = MultiaffineForm::from_multilinear(&inst.t);
        let eps = triaffine_correlation(&g, &psi, Exec::Sequential).unwrap();
        let zero = MultiaffineForm::zero(Prime::TWO, 2, 3).unwrap();
        let d = derandomize_indicator(&g, &zero, &term_factors(&inst.terms), 6, Exec::Sequential).unwrap();
        let rhs = eps.modulus_sq().mul(&Real::prime_power(Prime::TWO, -4));
        assert!(d.value.modulus_sq().ge(&rhs).0);
        assert!(d.value.modulus_sq().ge(&d.bucket.modulus_sq()).0);
    }

    #[test]
    fn cleanup_of_asymmetric_form() {
        let p = Prime::TWO;
        let beta = MultilinearForm::from_fn(p, 2, 2, |j| u8::from(j == [0, 1])).unwrap();
        let mut psi = MultiaffineForm::zero(p, 2, 3).unwrap();
        psi.set_component(beta_mask(0), beta).unwrap();
        let g = BoundedFunction::one(p, 2);
        let c = bilinear_cleanup(&g, &psi, Exec::Sequential).unwrap();
        assert_eq!(c[0].subspace.dim(), 0);
        assert!(c[0].beta_sym.is_zero());
        assert!(c[0].certificate.len() <= 4);
        assert!(c[1].certificate.is_empty());
    }

    #[test]
    fn planted_phase_through_pipeline() {
        for seed in 0..4 {
            let inst = crate::symmetrize::planted_instance(Prime::TWO, 3, 1, seed, Exec::Sequential).unwrap();
            let f = BoundedFunction::phase(&inst.base).conj();
            let mut opts = PipelineOptions::new(Strategy::Supplied(MultiaffineForm::from_multilinear(&inst.t)));
            opts.derandomize_cap = 5;
            let rep = run_inverse_pipeline(&f, 0.1, &opts).unwrap();
            assert!(rep.ledger.all_hold(), "seed {seed}\n{}", rep.ledger.to_text());
            eprintln!("seed {seed}: r={} final={}", rep.r, rep.final_correlation.modulus_sq());
        }
    }
}
