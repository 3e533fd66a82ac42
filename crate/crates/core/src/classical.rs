//! Algebraic special values `L(η, -j)`: Bernoulli numbers, generalized
//! Bernoulli numbers and the rational-function generating series `F_η`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dirichlet::{gauss_sum, DirichletChar};
use crate::error::{Error, Result};
use crate::padic::{PadicContext, PadicElem};

fn bernoulli_store() -> &'static RwLock<Vec<BigRational>> {
    static STORE: OnceLock<RwLock<Vec<BigRational>>> = OnceLock::new();
    STORE.get_or_init(|| RwLock::new(vec![BigRational::one()]))
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one(); n + 1];
    for k in 1..n {
        row[k] = &row[k - 1] * BigInt::from(n - k + 1) / BigInt::from(k);
    }
    row
}

/// `B_n` with `B_1 = -1/2`, from the recurrence `Σ_{k≤n} C(n+1,k) B_k = 0`.
pub fn bernoulli(n: usize) -> BigRational {
    if let Some(b) = bernoulli_store().read().unwrap().get(n) {
        return b.clone();
    }
    let mut store = bernoulli_store().write().unwrap();
    while store.len() <= n {
        let m = store.len();
        let row = binomial_row(m + 1);
        let mut s = BigRational::zero();
        for (k, b) in store.iter().enumerate() {
            if !b.is_zero() {
                s += BigRational::from_integer(row[k].clone()) * b;
            }
        }
        store.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    store[n].clone()
}

pub fn bernoulli_elem(ctx: &PadicContext, n: usize) -> PadicElem {
    PadicElem::from_rational(ctx, &bernoulli(n))
}

/// Inserts externally loaded values after checking them against the
/// in-memory recurrence where already known.
fn seed_bernoulli(values: &BTreeMap<usize, BigRational>) {
    let mut store = bernoulli_store().write().unwrap();
    for (&n, v) in values {
        if n < store.len() {
            debug_assert_eq!(&store[n], v);
        } else if n == store.len() {
            store.push(v.clone());
        }
    }
}

/// Truncated series `Σ_{j≤K} c_j t^j / j!`, stored by exponential
/// coefficients `c_j`.
#[derive(Clone, Debug)]
pub struct TruncExpSeries {
    pub coeffs: Vec<PadicElem>,
}

fn binom_elem(ctx: &PadicContext, n: usize) -> Vec<PadicElem> {
    binomial_row(n).iter().map(|b| PadicElem::from_bigint(ctx, b)).collect()
}

impl TruncExpSeries {
    pub fn new(coeffs: Vec<PadicElem>) -> TruncExpSeries {
        assert!(!coeffs.is_empty());
        TruncExpSeries { coeffs }
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ctx(&self) -> &PadicContext {
        self.coeffs[0].ctx()
    }

    /// `c · e^{a t}`.
    pub fn exponential(ctx: &PadicContext, a: &PadicElem, c: &PadicElem, k: usize) -> TruncExpSeries {
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut acc = c.clone();
        for _ in 0..=k {
            coeffs.push(acc.clone());
            acc = &acc * a;
        }
        let _ = ctx;
        TruncExpSeries { coeffs }
    }

    pub fn add(&self, other: &TruncExpSeries) -> TruncExpSeries {
        let k = self.order().min(other.order());
        TruncExpSeries { coeffs: (0..=k).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect() }
    }

    pub fn scale(&self, c: &PadicElem) -> TruncExpSeries {
        TruncExpSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, other: &TruncExpSeries) -> TruncExpSeries {
        let ctx = self.ctx().clone();
        let k = self.order().min(other.order());
        let mut out = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let row = binom_elem(&ctx, n);
            let mut s = PadicElem::zero(&ctx);
            for i in 0..=n {
                s = &s + &(&row[i] * &(&self.coeffs[i] * &other.coeffs[n - i]));
            }
            out.push(s);
        }
        TruncExpSeries { coeffs: out }
    }

    /// `self / other`; the constant term of `other` must be nonzero.
    pub fn div(&self, other: &TruncExpSeries) -> Result<TruncExpSeries> {
        let ctx = self.ctx().clone();
        let k = self.order().min(other.order());
        let inv0 = other.coeffs[0].inv()?;
        let mut q: Vec<PadicElem> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let row = binom_elem(&ctx, n);
            let mut s = self.coeffs[n].clone();
            for i in 0..n {
                s = &s - &(&row[i] * &(&q[i] * &other.coeffs[n - i]));
            }
            let qn = &s * &inv0;
            if qn.prec() <= 0 && !qn.is_exact_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "series division lost all digits at order {n}"
                )));
            }
            q.push(qn);
        }
        Ok(TruncExpSeries { coeffs: q })
    }
}

/// `B_{n,χ}` for `n = 0..=nmax`, from `Σ_a χ(a) t e^{at} / (e^{dt} - 1)`.
pub fn gen_bernoulli_all(chi: &DirichletChar, nmax: usize, ctx: &PadicContext) -> Result<Vec<PadicElem>> {
    let d = chi.modulus();
    let vals = chi.value_table(ctx)?;
    // numerator Σ_a χ(a) e^{a t}
    let mut num = vec![PadicElem::zero(ctx); nmax + 1];
    for (a, v) in vals.iter().enumerate().skip(1).chain(std::iter::once((d as usize, &vals[0]))) {
        if v.is_zero() {
            continue;
        }
        let a_el = PadicElem::from_i64(ctx, a as i64);
        let mut pw = v.clone();
        for c in num.iter_mut() {
            *c = &*c + &pw;
            pw = &pw * &a_el;
        }
    }
    // (e^{dt} - 1)/t has exponential coefficients d^{k+1}/(k+1)
    let d_el = PadicElem::from_i64(ctx, d as i64);
    let mut den = Vec::with_capacity(nmax + 1);
    let mut pw = d_el.clone();
    for k in 0..=nmax {
        den.push(pw.checked_div(&PadicElem::from_i64(ctx, k as i64 + 1))?);
        pw = &pw * &d_el;
    }
    let q = TruncExpSeries::new(num).div(&TruncExpSeries::new(den))?;
    Ok(q.coeffs)
}

pub fn gen_bernoulli(chi: &DirichletChar, n: usize, ctx: &PadicContext) -> Result<PadicElem> {
    Ok(gen_bernoulli_all(chi, n, ctx)?.swap_remove(n))
}

/// `B_{n,χ} = d^{n-1} Σ_{a=1}^{d} χ(a) B_n(a/d)` with exact Bernoulli
/// polynomials; an independent check of [`gen_bernoulli`].
pub fn gen_bernoulli_by_polynomials(chi: &DirichletChar, n: usize, ctx: &PadicContext) -> Result<PadicElem> {
    let d = chi.modulus() as i64;
    let row = binomial_row(n);
    let mut acc = PadicElem::zero(ctx);
    for a in 1..=d {
        let v = chi.eval(a, ctx)?;
        if v.is_zero() {
            continue;
        }
        // d^{n-1} B_n(a/d) = Σ_k C(n,k) B_k a^{n-k} d^{k-1}
        let mut s = BigRational::zero();
        for (k, c) in row.iter().enumerate() {
            let b = bernoulli(k);
            if b.is_zero() {
                continue;
            }
            let term = BigRational::from_integer(c * BigInt::from(a).pow((n - k) as u32))
                * b
                * BigRational::new(BigInt::from(d).pow(k as u32), BigInt::from(d));
            s += term;
        }
        acc = &acc + &(&v * &PadicElem::from_rational(ctx, &s));
    }
    Ok(acc)
}

/// Exponential coefficients of `F_η(t) = τ(η̄)^{-1} Σ_a η̄(a)/(1 - ζ_N^a e^t)`
/// through order `k`.
pub fn f_eta_series(eta: &DirichletChar, k: usize, ctx: &PadicContext) -> Result<TruncExpSeries> {
    let n = eta.modulus();
    if eta.is_trivial() {
        return Err(Error::TrivialCharacter);
    }
    let etab = eta.conj();
    let tau = gauss_sum(&etab, ctx)?;
    let vals = etab.value_table(ctx)?;
    let zn = ctx.root_of_unity(n)?;
    let mut acc = vec![PadicElem::zero(ctx); k + 1];
    let mut za = PadicElem::one(ctx);
    for v in vals.iter() {
        let c = za.clone();
        za = &za * &zn;
        if v.is_zero() {
            continue;
        }
        // 1/(1 - c e^t): denominator coefficients 1 - c, then -c
        let mut den = vec![-&c; k + 1];
        den[0] = &PadicElem::one(ctx) - &c;
        let mut one = vec![PadicElem::zero(ctx); k + 1];
        one[0] = PadicElem::one(ctx);
        let g = TruncExpSeries::new(one).div(&TruncExpSeries::new(den))?;
        for (o, x) in acc.iter_mut().zip(&g.coeffs) {
            *o = &*o + &(v * x);
        }
    }
    let inv_tau = tau.inv()?;
    Ok(TruncExpSeries::new(acc).scale(&inv_tau))
}

/// Both routes to `L(η, -j)`: the `j`-th exponential coefficient of `F_η`
/// and `-B_{j+1,η}/(j+1)`.
pub fn l_value_neg_routes(eta: &DirichletChar, j: usize, ctx: &PadicContext) -> Result<(PadicElem, PadicElem)> {
    if !eta.is_primitive() {
        return Err(Error::NotPrimitive { conductor: eta.conductor(), modulus: eta.modulus() });
    }
    let a = f_eta_series(eta, j, ctx)?.coeffs.swap_remove(j);
    let b = gen_bernoulli(eta, j + 1, ctx)?;
    let b = -(b.checked_div(&PadicElem::from_i64(ctx, j as i64 + 1))?);
    Ok((a, b))
}

/// `L(η, -j)` for nontrivial primitive `η`, computed two ways; the routes
/// must agree up to two digits below their common precision.
pub fn l_value_neg(eta: &DirichletChar, j: usize, ctx: &PadicContext) -> Result<PadicElem> {
    let (a, b) = l_value_neg_routes(eta, j, ctx)?;
    let need = a.prec().min(b.prec()) - 2;
    if a.agreement(&b) < need {
        return Err(Error::Disagreement(format!(
            "L({}, -{j}): generating series gives {a}, Bernoulli route gives {b}",
            eta.label()
        )));
    }
    Ok(if a.prec() >= b.prec() { a } else { b })
}

/// `L(η, 0) = τ(η̄)^{-1} Σ_a η̄(a)/(1 - ζ_N^a)` for odd primitive `η`.
pub fn l0_gauss_sum_formula(eta: &DirichletChar, ctx: &PadicContext) -> Result<PadicElem> {
    if !eta.is_odd() {
        return Err(Error::Domain("the closed form needs an odd character".into()));
    }
    let etab = eta.conj();
    let tau = gauss_sum(&etab, ctx)?;
    let vals = etab.value_table(ctx)?;
    let zn = ctx.root_of_unity(eta.modulus())?;
    let one = PadicElem::one(ctx);
    let mut acc = PadicElem::zero(ctx);
    let mut za = PadicElem::one(ctx);
    for v in vals.iter() {
        if !v.is_zero() {
            acc = &acc + &v.checked_div(&(&one - &za))?;
        }
        za = &za * &zn;
    }
    acc.checked_div(&tau)
}

/// `W_η^2 = (-1)^δ τ(η)^2 / N`, the square of the root number (the square
/// root of `N` need not lie in `Q_q`).
pub fn root_number_squared(eta: &DirichletChar, ctx: &PadicContext) -> Result<PadicElem> {
    let t = gauss_sum(eta, ctx)?;
    let sign = if eta.is_odd() { -1 } else { 1 };
    (&t * &t).mul_int(sign).checked_div(&PadicElem::from_i64(ctx, eta.modulus() as i64))
}

const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BernoulliFile {
    version: u32,
    checksum: String,
    values: BTreeMap<String, [String; 2]>,
}

fn checksum(values: &BTreeMap<String, [String; 2]>) -> String {
    let body = serde_json::to_string(values).expect("string map serializes");
    let digest = Sha256::digest(body.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `B_0..B_n` to `path` atomically (temporary file plus rename).
pub fn save_bernoulli_cache(path: &Path, n: usize) -> Result<()> {
    let mut values = BTreeMap::new();
    for k in 0..=n {
        let b = bernoulli(k);
        values.insert(format!("{k:06}"), [b.numer().to_string(), b.denom().to_string()]);
    }
    let file = BernoulliFile { version: CACHE_VERSION, checksum: checksum(&values), values };
    let tmp = path.with_extension("json.tmp");
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&tmp, serde_json::to_vec_pretty(&file)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a cache file; any version, checksum or parse problem is an error.
pub fn load_bernoulli_cache(path: &Path) -> Result<BTreeMap<usize, BigRational>> {
    let bytes = std::fs::read(path)?;
    let file: BernoulliFile =
        serde_json::from_slice(&bytes).map_err(|e| Error::Cache(format!("unreadable Bernoulli cache: {e}")))?;
    if file.version != CACHE_VERSION {
        return Err(Error::Cache(format!("cache version {} unsupported", file.version)));
    }
    if checksum(&file.values) != file.checksum {
        return Err(Error::Cache("Bernoulli cache checksum mismatch".into()));
    }
    let mut out = BTreeMap::new();
    for (k, [num, den]) in &file.values {
        let n: usize = k.parse().map_err(|_| Error::Cache(format!("bad key {k}")))?;
        let num: BigInt = num.parse().map_err(|_| Error::Cache(format!("bad numerator at {k}")))?;
        let den: BigUint = den.parse().map_err(|_| Error::Cache(format!("bad denominator at {k}")))?;
        if den.is_zero() {
            return Err(Error::Cache(format!("zero denominator at {k}")));
        }
        out.insert(n, BigRational::new(num, den.into()));
    }
    Ok(out)
}

/// Outcome of [`ensure_bernoulli_cache`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Loaded,
    Created,
    Recomputed,
}

/// Loads `B_0..B_n` from `path` if the file is intact and long enough;
/// otherwise recomputes and rewrites it.
pub fn ensure_bernoulli_cache(path: &Path, n: usize) -> Result<CacheStatus> {
    if !path.exists() {
        save_bernoulli_cache(path, n)?;
        return Ok(CacheStatus::Created);
    }
    match load_bernoulli_cache(path) {
        Ok(values) if values.len() > n => {
            seed_bernoulli(&values);
            Ok(CacheStatus::Loaded)
        }
        _ => {
            save_bernoulli_cache(path, n)?;
            Ok(CacheStatus::Recomputed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{character_context_modulus, primitive_chars};
    use crate::padic::make_context;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bernoulli_numbers() {
        assert_eq!(bernoulli(0), q(1, 1));
        assert_eq!(bernoulli(1), q(-1, 2));
        assert_eq!(bernoulli(2), q(1, 6));
        assert_eq!(bernoulli(12), q(-691, 2730));
        for n in (3..40).step_by(2) {
            assert!(bernoulli(n).is_zero());
        }
    }

    #[test]
    fn quadratic_three() {
        let ctx = make_context(7, character_context_modulus(3, 7), 20).unwrap();
        let eta = DirichletChar::parse("quad3").unwrap();
        let b1 = gen_bernoulli(&eta, 1, &ctx).unwrap();
        assert_eq!(b1, PadicElem::from_ratio(&ctx, -1, 3));
        assert_eq!(l_value_neg(&eta, 0, &ctx).unwrap(), PadicElem::from_ratio(&ctx, 1, 3));
        let triv = DirichletChar::trivial(1);
        assert_eq!(gen_bernoulli(&triv, 2, &ctx).unwrap(), PadicElem::from_ratio(&ctx, 1, 6));
    }

    #[test]
    fn parity_vanishing() {
        for n in 1..=7u64 {
            let ctx = make_context(11, character_context_modulus(n, 11), 12).unwrap();
            for chi in DirichletChar::all(n) {
                for k in 2..=6usize {
                    let odd_sign = if chi.is_odd() { -1 } else { 1 };
                    if odd_sign * if k % 2 == 0 { 1 } else { -1 } == -1 {
                        assert!(gen_bernoulli(&chi, k, &ctx).unwrap().is_zero(), "{chi:?} n={k}");
                    }
                }
            }
        }
        // even nontrivial character: L(η, 0) = 0
        let ctx = make_context(7, character_context_modulus(5, 7), 12).unwrap();
        let even = primitive_chars(5).into_iter().find(|c| !c.is_odd()).unwrap();
        assert!(l_value_neg(&even, 0, &ctx).unwrap().is_zero());
    }

    #[test]
    fn polynomial_oracle() {
        for n in [3u64, 4, 5, 7, 8] {
            let ctx = make_context(13, character_context_modulus(n, 13), 14).unwrap();
            for chi in DirichletChar::all(n) {
                for k in 1..=6 {
                    let a = gen_bernoulli(&chi, k, &ctx).unwrap();
                    let b = gen_bernoulli_by_polynomials(&chi, k, &ctx).unwrap();
                    assert!(a.agreement(&b) >= a.prec().min(b.prec()) - 1, "{chi:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn routes_agree() {
        for p in [5u64, 7] {
            for n in 3..=12u64 {
                if n % p == 0 {
                    continue;
                }
                let ctx = make_context(p, character_context_modulus(n, p), 12).unwrap();
                for eta in primitive_chars(n).into_iter().filter(|c| !c.is_trivial() && c.realizable_at(p)) {
                    for j in 0..=8 {
                        let (a, b) = l_value_neg_routes(&eta, j, &ctx).unwrap();
                        assert!(a.agreement(&b) >= 10, "{} j={j}: {a} vs {b}", eta.label());
                        let vanishes = (j % 2 == 0) != eta.is_odd();
                        assert_eq!(a.is_zero(), vanishes, "{} j={j}", eta.label());
                    }
                }
            }
        }
    }

    #[test]
    fn gauss_sum_formula_at_zero() {
        for p in [5u64, 7, 11, 13] {
            for n in 3..=12u64 {
                if n % p == 0 {
                    continue;
                }
                let ctx = make_context(p, character_context_modulus(n, p), 12).unwrap();
                for eta in primitive_chars(n).into_iter().filter(|c| c.is_odd() && c.realizable_at(p)) {
                    let lhs = l0_gauss_sum_formula(&eta, &ctx).unwrap();
                    let rhs = l_value_neg(&eta, 0, &ctx).unwrap();
                    assert!(lhs.agreement(&rhs) >= 10, "{} p={p}", eta.label());
                }
            }
        }
    }

    #[test]
    fn root_number_squares() {
        let ctx = make_context(7, character_context_modulus(5, 7), 12).unwrap();
        for eta in primitive_chars(5) {
            let w = root_number_squared(&eta, &ctx).unwrap();
            let wb = root_number_squared(&eta.conj(), &ctx).unwrap();
            assert_eq!(&w * &wb, PadicElem::one(&ctx));
        }
        // quadratic mod 3: τ² = -3, odd, so W² = 1
        let ctx = make_context(7, character_context_modulus(3, 7), 12).unwrap();
        let q3 = DirichletChar::parse("quad3").unwrap();
        assert_eq!(root_number_squared(&q3, &ctx).unwrap(), PadicElem::one(&ctx));
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bernoulli.json");
        assert_eq!(ensure_bernoulli_cache(&path, 30).unwrap(), CacheStatus::Created);
        assert_eq!(ensure_bernoulli_cache(&path, 30).unwrap(), CacheStatus::Loaded);
        let loaded = load_bernoulli_cache(&path).unwrap();
        assert_eq!(loaded[&12], q(-691, 2730));
        let text = std::fs::read_to_string(&path).unwrap().replace("-691", "-692");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load_bernoulli_cache(&path), Err(Error::Cache(_))));
        assert_eq!(ensure_bernoulli_cache(&path, 30).unwrap(), CacheStatus::Recomputed);
        assert_eq!(load_bernoulli_cache(&path).unwrap()[&12], q(-691, 2730));
    }
}
