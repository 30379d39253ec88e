use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;

use super::{real_of, Average, BoundedFunction, Table};
use crate::cyclo::{self, Cyclo};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::fpspace::LinearForm;
use crate::ledger::{Mode, Real};
use crate::mforms::MultiaffineForm;
use crate::par::{self, Exec};

/// Default cap on the work of one norm evaluation, in point operations.
pub const NORM_CAP: u128 = 1 << 34;

/// `||f||_{U^d}^{2^d}` and the norm itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GowersValue {
    pub d: usize,
    pub power: Real,
    pub norm: f64,
}

impl GowersValue {
    fn new(d: usize, power: Real) -> GowersValue {
        let norm = power.to_f64().max(0.0).powf(1.0 / (1u64 << d) as f64);
        GowersValue { d, power, norm }
    }
}

/// Flat table of cyclotomic coefficients, `phi` entries per point.
struct Flat {
    p: Prime,
    level: u32,
    phi: usize,
    data: Vec<i128>,
}

impl Flat {
    fn zeros(p: Prime, level: u32, size: usize) -> Flat {
        let phi = cyclo::phi(p, level);
        Flat { p, level, phi, data: vec![0; size * phi] }
    }

    fn from_cyclos(p: Prime, level: u32, vals: &[Cyclo]) -> Flat {
        let mut f = Flat::zeros(p, level, vals.len());
        for (x, v) in vals.iter().enumerate() {
            f.data[x * f.phi..(x + 1) * f.phi].copy_from_slice(v.lift(level).coeffs());
        }
        f
    }

    fn from_exps(p: Prime, level: u32, exps: &[u32], roots: &[Vec<i128>]) -> Flat {
        let mut f = Flat::zeros(p, level, exps.len());
        for (x, &e) in exps.iter().enumerate() {
            f.data[x * f.phi..(x + 1) * f.phi].copy_from_slice(&roots[e as usize]);
        }
        f
    }

    fn at(&self, x: usize) -> &[i128] {
        &self.data[x * self.phi..(x + 1) * self.phi]
    }
}

/// Coefficient vectors of `zeta_N^e` for all `e`.
fn root_table(p: Prime, level: u32) -> Vec<Vec<i128>> {
    (0..cyclo::order(p, level)).map(|e| Cyclo::root(p, level, e as u64).coeffs().to_vec()).collect()
}

/// In-place unnormalized transform `F(xi) = sum_x f(x) zeta_p^{-xi.x}`.
fn transform_flat(f: &mut Flat, n: usize, scratch: &mut Vec<i128>) {
    let p = f.p.as_usize();
    let phi = f.phi;
    let size = f.data.len() / phi;
    if p == 2 {
        let mut half = 1;
        while half < size {
            for start in (0..size).step_by(2 * half) {
                for i in start..start + half {
                    let (a, b) = (i * phi, (i + half) * phi);
                    for c in 0..phi {
                        let u = f.data[a + c];
                        let v = f.data[b + c];
                        f.data[a + c] = u + v;
                        f.data[b + c] = u - v;
                    }
                }
            }
            half *= 2;
        }
        return;
    }
    let order = cyclo::order(f.p, f.level);
    let step = order / p;
    scratch.resize(p * phi, 0);
    let mut stride = 1;
    for _ in 0..n {
        for block in (0..size).step_by(stride * p) {
            for off in 0..stride {
                scratch.iter_mut().for_each(|v| *v = 0);
                for xi in 0..p {
                    for t in 0..p {
                        let src = (block + off + t * stride) * phi;
                        let k = step * ((p - (xi * t) % p) % p);
                        let (out, rest) = (&mut scratch[xi * phi..(xi + 1) * phi], &f.data[src..src + phi]);
                        cyclo::add_rotated_flat(f.p, f.level, rest, k, out);
                    }
                }
                for xi in 0..p {
                    let dst = (block + off + xi * stride) * phi;
                    f.data[dst..dst + phi].copy_from_slice(&scratch[xi * phi..(xi + 1) * phi]);
                }
            }
        }
        stride *= p;
    }
}

fn transform_float(v: &mut [Complex64], p: Prime, n: usize) {
    let p = p.as_usize();
    let size = v.len();
    let w: Vec<Complex64> = (0..p).map(|k| Complex64::from_polar(1.0, -std::f64::consts::TAU * k as f64 / p as f64)).collect();
    let mut tmp = vec![Complex64::new(0.0, 0.0); p];
    let mut stride = 1;
    for _ in 0..n {
        for block in (0..size).step_by(stride * p) {
            for off in 0..stride {
                for (xi, slot) in tmp.iter_mut().enumerate() {
                    *slot = (0..p).map(|t| v[block + off + t * stride] * w[(xi * t) % p]).sum();
                }
                for (xi, val) in tmp.iter().enumerate() {
                    v[block + off + xi * stride] = *val;
                }
            }
        }
        stride *= p;
    }
}

/// `sum_xi |F(xi)|^4` for an exact flat table, as coefficients.
fn fourth_moment(f: &mut Flat, n: usize, scratch: &mut Vec<i128>) -> Vec<i128> {
    transform_flat(f, n, scratch);
    let phi = f.phi;
    let size = f.data.len() / phi;
    let mut acc = vec![0i128; phi];
    let mut zc = vec![0i128; phi];
    let mut w = vec![0i128; phi];
    for xi in 0..size {
        let z = &f.data[xi * phi..(xi + 1) * phi];
        if z.iter().all(|&c| c == 0) {
            continue;
        }
        cyclo::conj_flat(f.p, f.level, z, &mut zc);
        w.iter_mut().for_each(|v| *v = 0);
        cyclo::mul_add_flat(f.p, f.level, z, &zc, &mut w);
        cyclo::mul_add_flat(f.p, f.level, &w, &w, &mut acc);
    }
    acc
}

fn check_cap(p: Prime, n: usize, d: usize, cap: u128) -> Result<()> {
    let outer = p.pow((n * d.saturating_sub(1)) as u32).unwrap_or(u128::MAX);
    let work = outer.saturating_mul(n.max(1) as u128);
    if work > cap {
        return Err(Error::BudgetExceeded { needed: work, cap });
    }
    Ok(())
}

/// `||f||_{U^d}^{2^d}` through `E_h ||d_h f||_{U^{d-1}}^{2^{d-1}}`, bottoming
/// out in a fast character transform at `d = 2`.
pub fn gowers_norm(f: &BoundedFunction, d: usize, exec: Exec) -> Result<GowersValue> {
    gowers_norm_with_cap(f, d, NORM_CAP, exec)
}

pub fn gowers_norm_with_cap(f: &BoundedFunction, d: usize, cap: u128, exec: Exec) -> Result<GowersValue> {
    if d == 0 {
        return Err(Error::Precondition("Gowers norms need d >= 1".into()));
    }
    let p = f.prime();
    let n = f.dim();
    if d == 1 {
        return Ok(GowersValue::new(1, f.mean().modulus_sq()));
    }
    check_cap(p, n, d, cap)?;
    let sp = f.space();
    let size = sp.size();
    let shifts = sp.size().pow((d - 2) as u32);
    let hs = |code: usize| -> Vec<usize> {
        let mut c = code;
        (0..d - 2)
            .map(|_| {
                let h = c % size;
                c /= size;
                h
            })
            .collect()
    };
    let base = size * size * size * size;
    let outer = BigInt::from(shifts) * BigInt::from(base);
    match &f.table {
        Table::Float(v) => {
            let total = par::map_reduce(
                exec,
                shifts,
                0.0f64,
                |code| {
                    let mut g = v.clone();
                    for h in hs(code) {
                        g = (0..size).map(|x| g[sp.add_idx(x, h)] * g[x].conj()).collect();
                    }
                    transform_float(&mut g, p, n);
                    g.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>()
                },
                |a, b| a + b,
            );
            let denom: f64 = outer.to_string().parse().unwrap_or(f64::INFINITY);
            Ok(GowersValue::new(d, Real::float(total / denom)))
        }
        Table::Exact { level, den, vals } => {
            let level = (*level).max(1);
            let phi = cyclo::phi(p, level);
            let total: Vec<i128> = if let Some((lv, exps)) = f.phase_exponents() {
                let order = cyclo::order(p, level) as u32;
                let scale = order / cyclo::order(p, lv) as u32;
                let exps: Vec<u32> = exps.iter().map(|&e| e * scale).collect();
                let roots = root_table(p, level);
                par::map_reduce(
                    exec,
                    shifts,
                    vec![0i128; phi],
                    |code| {
                        let mut e = exps.clone();
                        for h in hs(code) {
                            e = (0..size).map(|x| (e[sp.add_idx(x, h)] + order - e[x]) % order).collect();
                        }
                        let mut fl = Flat::from_exps(p, level, &e, &roots);
                        fourth_moment(&mut fl, n, &mut Vec::new())
                    },
                    add_vec,
                )
            } else {
                let start = Flat::from_cyclos(p, level, vals);
                par::map_reduce(
                    exec,
                    shifts,
                    vec![0i128; phi],
                    |code| {
                        let mut g = Flat { p, level, phi, data: start.data.clone() };
                        let mut conj = vec![0i128; phi];
                        for h in hs(code) {
                            let mut next = Flat::zeros(p, level, size);
                            for x in 0..size {
                                cyclo::conj_flat(p, level, g.at(x), &mut conj);
                                cyclo::mul_add_flat(p, level, g.at(sp.add_idx(x, h)), &conj, &mut next.data[x * phi..(x + 1) * phi]);
                            }
                            g = next;
                        }
                        fourth_moment(&mut g, n, &mut Vec::new())
                    },
                    add_vec,
                )
            };
            let z = Cyclo::from_flat(p, level, &total);
            let denom = outer * BigInt::from(*den).pow(1u32 << d);
            Ok(GowersValue::new(d, real_of(&z, &denom)))
        }
    }
}

fn add_vec(mut a: Vec<i128>, b: Vec<i128>) -> Vec<i128> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Functions brought to a common representation for product averages.
pub(crate) enum Uniform {
    Phase { level: u32, exps: Vec<Vec<u32>> },
    Exact { level: u32, dens: Vec<i128>, vals: Vec<Vec<Cyclo>>, conj: Vec<Vec<Cyclo>> },
    Float(Vec<Vec<Complex64>>),
}

impl Uniform {
    /// Common form; `min_level` lets callers reserve roots of unity of order `p`.
    pub(crate) fn new(fs: &[&BoundedFunction], min_level: u32) -> Uniform {
        let p = fs[0].prime();
        if fs.iter().all(|f| f.phase_exponents().is_some()) {
            let level = fs.iter().map(|f| f.phase_exponents().unwrap().0).max().unwrap_or(0).max(min_level);
            let order = cyclo::order(p, level) as u32;
            let exps = fs
                .iter()
                .map(|f| {
                    let (lv, e) = f.phase_exponents().unwrap();
                    let s = order / cyclo::order(p, lv) as u32;
                    e.iter().map(|&v| v * s).collect()
                })
                .collect();
            return Uniform::Phase { level, exps };
        }
        if fs.iter().all(|f| f.is_exact()) {
            let level = fs.iter().map(|f| f.exact_values().unwrap().0).max().unwrap_or(0).max(min_level);
            let vals: Vec<Vec<Cyclo>> = fs.iter().map(|f| f.exact_values().unwrap().2.iter().map(|v| v.lift(level)).collect()).collect();
            let conj = vals.iter().map(|v| v.iter().map(Cyclo::conj).collect()).collect();
            let dens = fs.iter().map(|f| f.exact_values().unwrap().1).collect();
            return Uniform::Exact { level, dens, vals, conj };
        }
        Uniform::Float(fs.iter().map(|f| f.values()).collect())
    }
}

/// Running sum of products of values of a [`Uniform`] family.
#[derive(Clone)]
pub(crate) enum Acc {
    Hist(Vec<i64>),
    Exact(Cyclo),
    Float(Complex64),
}

impl Acc {
    pub(crate) fn new(u: &Uniform, p: Prime) -> Acc {
        match u {
            Uniform::Phase { level, .. } => Acc::Hist(vec![0; cyclo::order(p, *level)]),
            Uniform::Exact { level, .. } => Acc::Exact(Cyclo::zero(p, *level)),
            Uniform::Float(_) => Acc::Float(Complex64::new(0.0, 0.0)),
        }
    }

    /// Adds `prod_i f_{fi}(x_i)^{(conj)} * zeta_p^{extra}`.
    #[inline]
    pub(crate) fn term(&mut self, u: &Uniform, p: Prime, picks: &[(usize, usize, bool)], extra: u32) {
        match (self, u) {
            (Acc::Hist(h), Uniform::Phase { exps, .. }) => {
                let order = h.len() as u32;
                let mut e = extra as u64 * (order / p.get() as u32) as u64;
                for &(fi, x, c) in picks {
                    let v = exps[fi][x];
                    e += if c { (order - v) as u64 } else { v as u64 };
                }
                h[(e % order as u64) as usize] += 1;
            }
            (Acc::Exact(s), Uniform::Exact { level, vals, conj, .. }) => {
                let mut prod = Cyclo::one(p, *level);
                for &(fi, x, c) in picks {
                    prod = prod.mul(if c { &conj[fi][x] } else { &vals[fi][x] });
                }
                if extra != 0 {
                    let order = cyclo::order(p, *level) as u64;
                    prod = prod.rotate(extra as u64 * order / p.get() as u64);
                }
                s.add_assign(&prod);
            }
            (Acc::Float(s), Uniform::Float(v)) => {
                let mut prod = Complex64::from_polar(1.0, std::f64::consts::TAU * extra as f64 / p.get() as f64);
                for &(fi, x, c) in picks {
                    prod *= if c { v[fi][x].conj() } else { v[fi][x] };
                }
                *s += prod;
            }
            _ => unreachable!("accumulator matches its family"),
        }
    }

    pub(crate) fn merge(self, o: Acc) -> Acc {
        match (self, o) {
            (Acc::Hist(a), Acc::Hist(b)) => Acc::Hist(a.into_iter().zip(b).map(|(x, y)| x + y).collect()),
            (Acc::Exact(a), Acc::Exact(b)) => Acc::Exact(a.add(&b)),
            (Acc::Float(a), Acc::Float(b)) => Acc::Float(a + b),
            _ => unreachable!("accumulators of one family"),
        }
    }

    /// The average over `count` terms, each a product over `picks`.
    pub(crate) fn finish(self, u: &Uniform, p: Prime, count: usize, picks: &[usize]) -> Average {
        match self {
            Acc::Hist(h) => {
                let level = match u {
                    Uniform::Phase { level, .. } => *level,
                    _ => unreachable!(),
                };
                let coeffs: Vec<i128> = h.into_iter().map(|v| v as i128).collect();
                Average::exact(Cyclo::from_powers(p, level, &coeffs), BigInt::from(count))
            }
            Acc::Exact(s) => {
                let dens = match u {
                    Uniform::Exact { dens, .. } => dens,
                    _ => unreachable!(),
                };
                let d = picks.iter().fold(BigInt::one(), |a, &i| a * BigInt::from(dens[i]));
                Average::exact(s, BigInt::from(count) * d)
            }
            Acc::Float(s) => Average::float(s / count as f64),
        }
    }
}

/// `||f||_{U^d}^{2^d}` straight from the definition, as an oracle.
pub fn gowers_direct(f: &BoundedFunction, d: usize, cap: u128) -> Result<Real> {
    let p = f.prime();
    let sp = f.space();
    let size = sp.size();
    let terms = (size as u128).checked_pow(d as u32 + 1).unwrap_or(u128::MAX);
    if terms.saturating_mul(1 << d) > cap {
        return Err(Error::BudgetExceeded { needed: terms, cap });
    }
    let u = Uniform::new(&[f], 0);
    let mut acc = Acc::new(&u, p);
    let mut picks = vec![(0usize, 0usize, false); 1 << d];
    let mut h = vec![0usize; d];
    for code in 0..terms as usize {
        let mut c = code;
        let x = c % size;
        c /= size;
        for hi in h.iter_mut() {
            *hi = c % size;
            c /= size;
        }
        for (w, pick) in picks.iter_mut().enumerate() {
            let mut pt = x;
            for (i, &hi) in h.iter().enumerate() {
                if w >> i & 1 == 1 {
                    pt = sp.add_idx(pt, hi);
                }
            }
            *pick = (0, pt, (d - (w.count_ones() as usize)) % 2 == 1);
        }
        acc.term(&u, p, &picks, 0);
    }
    let avg = acc.finish(&u, p, terms as usize, &vec![0; 1 << d]);
    let z = avg.sum.clone();
    Ok(match z {
        Some(z) => real_of(&z, &avg.denom),
        None => Real::float(avg.approx.re),
    })
}

/// The character `x -> omega^{xi.x}` best correlated with `f`, with the
/// correlation `E f(x) omega^{-xi.x}`. Ties go to the smallest index.
pub fn u2_inverse(f: &BoundedFunction, exec: Exec) -> Result<(LinearForm, Average)> {
    let p = f.prime();
    let n = f.dim();
    let sp = f.space();
    let size = sp.size();
    let corr: Vec<Average> = match &f.table {
        Table::Float(v) => {
            let mut g = v.clone();
            transform_float(&mut g, p, n);
            g.into_iter().map(|z| Average::float(z / size as f64)).collect()
        }
        Table::Exact { level, den, vals } => {
            let level = (*level).max(1);
            let mut fl = Flat::from_cyclos(p, level, vals);
            transform_flat(&mut fl, n, &mut Vec::new());
            let denom = BigInt::from(size) * BigInt::from(*den);
            (0..size).map(|xi| Average::exact(Cyclo::from_flat(p, level, fl.at(xi)), denom.clone())).collect()
        }
    };
    let sq: Vec<Real> = corr.iter().map(Average::modulus_sq).collect();
    let mut best = 0;
    for xi in 1..size {
        if !sq[best].ge(&sq[xi]).0 {
            best = xi;
        }
    }
    let u2 = gowers_norm(f, 2, exec)?;
    if !sq[best].ge(&u2.power).0 {
        return Err(Error::Internal(format!("largest Fourier coefficient {} below U2 power {}", sq[best], u2.power)));
    }
    Ok((LinearForm::new(sp.vector(best)), corr[best].clone()))
}

/// Result of the eight-function average and its Gowers-Cauchy-Schwarz check.
#[derive(Debug, Clone)]
pub struct Octolinear {
    pub average: Average,
    /// `||g_w||_{U^3}^8` for each of the eight functions.
    pub u3: Vec<GowersValue>,
    /// `|average|^8`.
    pub lhs: Real,
    /// `prod_w ||g_w||_{U^3}^8`.
    pub rhs: Real,
    pub gcs_holds: bool,
    pub mode: Mode,
}

/// `E_{x,h} prod_{w in {0,1}^3} C^{|w|+1} g_w(x + w.h)` where `w = 4a + 2b + c`,
/// bit `c` pairs with `h_1`, `b` with `h_2`, `a` with `h_3`, and `C`
/// conjugates; then checks Gowers-Cauchy-Schwarz.
pub fn u3_octolinear(g: &[BoundedFunction], exec: Exec) -> Result<Octolinear> {
    if g.len() != 8 {
        return Err(Error::ArityMismatch { expected: 8, got: g.len() });
    }
    for w in &g[1..] {
        g[0].check_same(w)?;
    }
    let p = g[0].prime();
    let sp = g[0].space();
    let size = sp.size();
    let refs: Vec<&BoundedFunction> = g.iter().collect();
    let u = Uniform::new(&refs, 0);
    let acc = par::map_reduce(
        exec,
        size,
        Acc::new(&u, p),
        |x| {
            let mut acc = Acc::new(&u, p);
            let mut picks = [(0usize, 0usize, false); 8];
            for h1 in 0..size {
                for h2 in 0..size {
                    let x12 = [x, sp.add_idx(x, h1), sp.add_idx(x, h2), sp.add_idx(sp.add_idx(x, h1), h2)];
                    for h3 in 0..size {
                        for (w, pick) in picks.iter_mut().enumerate() {
                            let base = x12[w & 3];
                            let pt = if w & 4 != 0 { sp.add_idx(base, h3) } else { base };
                            *pick = (w, pt, w.count_ones() % 2 == 0);
                        }
                        acc.term(&u, p, &picks, 0);
                    }
                }
            }
            acc
        },
        Acc::merge,
    );
    let average = acc.finish(&u, p, size.pow(4), &[0, 1, 2, 3, 4, 5, 6, 7]);
    let u3: Vec<GowersValue> = g.iter().map(|w| gowers_norm(w, 3, exec)).collect::<Result<_>>()?;
    let lhs = average.modulus_sq().pow(4);
    let rhs = u3.iter().fold(Real::one(), |a, v| a.mul(&v.power));
    let (gcs_holds, mode) = rhs.ge(&lhs);
    Ok(Octolinear { average, u3, lhs, rhs, gcs_holds, mode })
}

/// `E_{x,y,z} b1(x) b2(y) b3(z) b4(x+y) b5(x+z) b6(y+z) b7(x+y+z) omega^{phi(x,y,z)}`.
pub fn seven_point_average(b: &[BoundedFunction], phi: &MultiaffineForm, exec: Exec) -> Result<Average> {
    if b.len() != 7 {
        return Err(Error::ArityMismatch { expected: 7, got: b.len() });
    }
    if phi.arity() != 3 || phi.dim() != b[0].dim() || phi.prime() != b[0].prime() {
        return Err(Error::Precondition("phase must be a triaffine form on the same space".into()));
    }
    for w in &b[1..] {
        b[0].check_same(w)?;
    }
    let p = b[0].prime();
    let sp = b[0].space();
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
                let xy = sp.add_idx(x, y);
                for z in 0..size {
                    let ph = phi.eval(&[&vecs[x], &vecs[y], &vecs[z]]).expect("dimensions checked");
                    let picks = [
                        (0, x, false),
                        (1, y, false),
                        (2, z, false),
                        (3, xy, false),
                        (4, sp.add_idx(x, z), false),
                        (5, sp.add_idx(y, z), false),
                        (6, sp.add_idx(xy, z), false),
                    ];
                    acc.term(&u, p, &picks, ph as u32);
                }
            }
            acc
        },
        Acc::merge,
    );
    Ok(acc.finish(&u, p, size.pow(3), &[0, 1, 2, 3, 4, 5, 6]))
}
