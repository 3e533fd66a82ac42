//! Bounded measures on `Z_p` through truncated Amice transforms.
//!
//! A measure is stored as `Σ_{n≤K} a_n X^n` with `a_n = ∫ binom(x, n) dμ`.
//! Integration of a continuous function uses its Mahler coefficients,
//! computed as exact finite differences of its values at `0, 1, 2, ...`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dirichlet::{gauss_sum, DirichletChar};
use crate::error::{Error, Result};
use crate::padic::{iwasawa_log, Jet, Modulus, PadicContext, PadicElem, PadicElemJson, Res};

/// `Σ_{n≤K} b_n X^n` over `Z_q`, exact through order `K`.
#[derive(Clone, Debug)]
pub struct TruncSeries {
    pub coeffs: Vec<PadicElem>,
}

impl TruncSeries {
    pub fn new(coeffs: Vec<PadicElem>) -> TruncSeries {
        assert!(!coeffs.is_empty(), "a series needs at least its constant term");
        TruncSeries { coeffs }
    }

    pub fn zero(ctx: &PadicContext, k: usize) -> TruncSeries {
        TruncSeries { coeffs: vec![PadicElem::zero(ctx); k + 1] }
    }

    /// The monomial `X^n` truncated at `K`.
    pub fn monomial(ctx: &PadicContext, n: usize, k: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(ctx, k);
        if n <= k {
            s.coeffs[n] = PadicElem::one(ctx);
        }
        s
    }

    /// `(1+X)^c` for `c ≥ 0`.
    pub fn one_plus_x_pow(ctx: &PadicContext, c: u64, k: usize) -> TruncSeries {
        let mut b = BigInt::one();
        let mut coeffs = Vec::with_capacity(k + 1);
        for n in 0..=k as u64 {
            if n > 0 {
                b = if n > c { BigInt::zero() } else { b * BigInt::from(c - n + 1) / BigInt::from(n) };
            }
            coeffs.push(PadicElem::from_bigint(ctx, &b));
        }
        TruncSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ctx(&self) -> &PadicContext {
        self.coeffs[0].ctx()
    }

    pub fn coeff(&self, n: usize) -> &PadicElem {
        &self.coeffs[n]
    }

    pub fn truncate(&self, k: usize) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs[..=k.min(self.order())].to_vec() }
    }

    pub fn add(&self, o: &TruncSeries) -> TruncSeries {
        let k = self.order().min(o.order());
        TruncSeries { coeffs: (0..=k).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect() }
    }

    pub fn sub(&self, o: &TruncSeries) -> TruncSeries {
        let k = self.order().min(o.order());
        TruncSeries { coeffs: (0..=k).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect() }
    }

    pub fn scale(&self, c: &PadicElem) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn mul(&self, o: &TruncSeries) -> TruncSeries {
        let k = self.order().min(o.order());
        let mut out = vec![PadicElem::zero(self.ctx()); k + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(k + 1) {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(k + 1 - i) {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        TruncSeries { coeffs: out }
    }

    /// Coefficientwise Frobenius (or its inverse).
    pub fn frobenius(&self, inverse: bool) -> TruncSeries {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if inverse { c.frobenius_inv() } else { c.frobenius() })
            .collect();
        TruncSeries { coeffs }
    }

    /// `f((1+X)^c - 1)`, without touching the coefficients.
    pub fn subst_power(&self, c: u64) -> TruncSeries {
        let ctx = self.ctx().clone();
        let k = self.order();
        let table = power_table(&ctx, c, k);
        let coords: Vec<Vec<Res>> = self.coeffs.iter().map(|x| x.coords()).collect();
        let prec = self.coeffs.iter().map(|x| x.prec()).min().unwrap();
        let out = compose_coords(&ctx, &coords, &table, k);
        TruncSeries { coeffs: out.into_iter().map(|c| PadicElem::from_raw(&ctx, c, 0, prec)).collect() }
    }

    /// Sum of the coefficients' valuations test: all stored coefficients
    /// are integral.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero() || c.val() >= 0)
    }
}

/// Rows `n = 0..=K` of `((1+X)^c - 1)^n`, row `n` holding the coefficients of
/// `X^n..X^K`.
struct PowerTable {
    rows: Vec<Vec<Res>>,
}

type TableKey = (u64, u64, usize, u32);

fn power_table(ctx: &PadicContext, c: u64, k: usize) -> Arc<PowerTable> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<PowerTable>>>> = OnceLock::new();
    let md = ctx.md();
    let key = (ctx.p(), c, k, md.digits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    // ((1+X)^c - 1) coefficients, starting at X^1
    let mut b = BigInt::one();
    let mut base = Vec::new();
    for n in 1..=(c as usize).min(k) {
        b = b * BigInt::from(c - n as u64 + 1) / BigInt::from(n);
        base.push(md.from_biguint(&(b.clone() % BigInt::from(md.modulus().clone())).to_biguint().unwrap()));
    }
    let mut rows = Vec::with_capacity(k + 1);
    rows.push({
        let mut r = vec![Res::ZERO; k + 1];
        r[0] = md.one();
        r
    });
    for n in 1..=k {
        let prev: &Vec<Res> = &rows[n - 1];
        // prev covers X^{n-1}..X^K; the product covers X^n..X^K
        let mut row = vec![Res::ZERO; k + 1 - n];
        for (i, &a) in prev.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &bj) in base.iter().enumerate() {
                let idx = i + j; // degree (n-1+i) + (j+1) - n
                if idx >= row.len() {
                    break;
                }
                row[idx] = md.add(row[idx], md.mul(a, bj));
            }
        }
        rows.push(row);
    }
    let t = Arc::new(PowerTable { rows });
    let mut guard = cache.lock().unwrap();
    if guard.len() >= 6 {
        guard.clear();
    }
    guard.insert(key, t.clone());
    t
}

/// `Σ_n g_n · ((1+X)^c - 1)^n` through order `K`, on coordinate vectors.
fn compose_coords(ctx: &PadicContext, g: &[Vec<Res>], table: &PowerTable, k: usize) -> Vec<Vec<Res>> {
    let md = ctx.md();
    let f = ctx.f();
    let mut out = vec![vec![Res::ZERO; f]; k + 1];
    for (n, gn) in g.iter().enumerate().take(k + 1) {
        if gn.iter().all(|c| c.is_zero()) {
            continue;
        }
        for (off, &t) in table.rows[n].iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            let o = &mut out[n + off];
            for (x, &y) in o.iter_mut().zip(gn) {
                *x = md.add(*x, md.mul(t, y));
            }
        }
    }
    out
}

/// `∂ = (1+X) d/dX`; the result is exact through order `K-1`.
pub fn partial_op(f: &TruncSeries) -> TruncSeries {
    let k = f.order();
    assert!(k >= 1, "∂ needs K ≥ 1");
    let coeffs = (0..k)
        .map(|i| &f.coeffs[i + 1].mul_int(i as i64 + 1) + &f.coeffs[i].mul_int(i as i64))
        .collect();
    TruncSeries { coeffs }
}

/// `φ(f) = f^σ((1+X)^p - 1)`.
pub fn phi_op(f: &TruncSeries) -> TruncSeries {
    f.frobenius(false).subst_power(f.ctx().p())
}

/// Integer matrix `Ψ[l][n]` with `ψ_lin(X^n) = Σ_l Ψ[l][n] X^l`, reduced
/// mod `p^W`, for `l ≤ K/p` and `n ≤ K`.
fn psi_matrix(md: &Modulus, k: usize) -> Arc<Vec<Vec<Res>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize, u32), Arc<Vec<Vec<Res>>>>>> = OnceLock::new();
    let p = md.p() as usize;
    let key = (md.p(), k, md.digits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let modulus = BigInt::from(md.modulus().clone());
    let to_res = |x: &BigInt| {
        let r = ((x % &modulus) + &modulus) % &modulus;
        md.from_biguint(&r.to_biguint().unwrap())
    };
    // Pascal rows of binomials up to K
    let mut pascal: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for n in 1..=k {
        let prev = &pascal[n - 1];
        let mut row = vec![BigInt::one(); n + 1];
        for j in 1..n {
            row[j] = &prev[j - 1] + &prev[j];
        }
        pascal.push(row);
    }
    let lmax = k / p;
    let mut m = vec![vec![Res::ZERO; k + 1]; lmax + 1];
    for (l, row) in m.iter_mut().enumerate() {
        for (n, slot) in row.iter_mut().enumerate() {
            // Σ_i (-1)^{n-pi} C(n, pi) C(i, l)
            let mut s = BigInt::zero();
            let mut i = l;
            while p * i <= n {
                let t = &pascal[n][p * i] * &pascal[i][l];
                if (n - p * i).is_multiple_of(2) {
                    s += t;
                } else {
                    s -= t;
                }
                i += 1;
            }
            *slot = to_res(&s);
        }
    }
    let t = Arc::new(m);
    cache.lock().unwrap().insert(key, t.clone());
    t
}

/// Lower bound for `v_p(Ψ[l][n])`, used to certify `ψ` of a truncated
/// series: unknown coefficients beyond `K` contribute at most this much.
pub fn psi_tail_bound(p: u64, l: usize, n: usize) -> i64 {
    let d = n as i64 - (p as i64) * l as i64;
    if d <= 0 {
        return 0;
    }
    let pm = p as i64 - 1;
    ((d + pm - 1) / pm - 1).max(0)
}

/// `ψ(f) = σ^{-1}(ψ_lin f)`, where `ψ_lin(f)(φ(X)) = p^{-1} Σ_{ζ^p=1} f(ζ(1+X) - 1)`.
///
/// The trace is expanded with `Σ_ζ ζ^j = p·[p | j]`, so no `p`-th roots of
/// unity are needed. Coefficient `l` is returned for `l ≤ K/p`, with its
/// precision lowered to what the truncation at `K` certifies, assuming the
/// input is integral.
pub fn psi_op(f: &TruncSeries) -> TruncSeries {
    let ctx = f.ctx().clone();
    let md = ctx.md();
    let k = f.order();
    let p = ctx.p();
    let mat = psi_matrix(md, k);
    let coords: Vec<Vec<Res>> = f.coeffs.iter().map(|c| c.coords()).collect();
    let prec = f.coeffs.iter().map(|c| c.prec()).min().unwrap();
    let mut out = Vec::with_capacity(mat.len());
    for (l, row) in mat.iter().enumerate() {
        let mut acc = vec![Res::ZERO; ctx.f()];
        for (n, &t) in row.iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            for (a, &c) in acc.iter_mut().zip(&coords[n]) {
                *a = md.add(*a, md.mul(t, c));
            }
        }
        let cert = prec.min(psi_tail_bound(p, l, k + 1));
        let lin = PadicElem::from_raw(&ctx, acc, 0, cert);
        out.push(lin.frobenius_inv());
    }
    TruncSeries { coeffs: out }
}

/// Default truncation order for precision `M` at `p`.
pub fn default_truncation(p: u64, m: u32) -> usize {
    let base = (4 * m as u64 * p).div_ceil(p - 1) as usize;
    base.max(64).max(((p - 1) * (m as u64 + 4)) as usize)
}

/// A bounded measure, given by its truncated Amice transform.
#[derive(Clone, Debug)]
pub struct Measure {
    pub amice: TruncSeries,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct MeasureJson {
    pub p: u64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub amice: Vec<PadicElemJson>,
}

impl Measure {
    pub fn new(amice: TruncSeries) -> Result<Measure> {
        if !amice.is_integral() {
            return Err(Error::InvalidData("a bounded measure needs integral Amice coefficients".into()));
        }
        Ok(Measure { amice })
    }

    pub fn ctx(&self) -> &PadicContext {
        self.amice.ctx()
    }

    pub fn truncation(&self) -> usize {
        self.amice.order()
    }

    /// `∫ x^j dμ = ∂^j 𝒜(0)`.
    pub fn moment(&self, j: usize) -> Result<PadicElem> {
        if j > self.truncation() {
            return Err(Error::TruncationTooSmall { required: j, have: self.truncation() });
        }
        let mut s = self.amice.clone();
        for _ in 0..j {
            s = partial_op(&s);
        }
        Ok(s.coeffs[0].clone())
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            p: self.ctx().p(),
            k: self.truncation(),
            m: self.ctx().precision(),
            amice: self.amice.coeffs.iter().map(|c| c.to_json()).collect(),
        }
    }

    pub fn from_json(ctx: &PadicContext, j: &MeasureJson) -> Result<Measure> {
        if j.p != ctx.p() || j.amice.len() != j.k + 1 {
            return Err(Error::InvalidData("measure JSON does not match the context".into()));
        }
        let coeffs = j.amice.iter().map(|c| PadicElem::from_json(ctx, c)).collect::<Result<Vec<_>>>()?;
        Measure::new(TruncSeries::new(coeffs))
    }

    /// `∫ f dμ` from precomputed Mahler data.
    pub fn integrate(&self, data: &MahlerData) -> Result<Integral> {
        let ctx = self.ctx();
        if data.p != ctx.p() || data.digits != ctx.precision() {
            return Err(Error::ContextMismatch);
        }
        let used = data.coeffs.len();
        if used > self.truncation() + 1 {
            return Err(Error::TruncationTooSmall { required: used - 1, have: self.truncation() });
        }
        let md = ctx.md();
        let f = ctx.f();
        let mut v = vec![Res::ZERO; f];
        let mut d = vec![Res::ZERO; f];
        let mut prec = data.certified;
        for (k, (cv, cd)) in data.coeffs.iter().enumerate() {
            let a = &self.amice.coeffs[k];
            if a.is_zero() {
                prec = prec.min(a.prec());
                continue;
            }
            prec = prec.min(a.prec());
            let ac = a.coords();
            for i in 0..f {
                v[i] = md.add(v[i], md.mul(*cv, ac[i]));
                d[i] = md.add(d[i], md.mul(*cd, ac[i]));
            }
        }
        let value = PadicElem::from_raw(ctx, v, 0, prec);
        let deriv = PadicElem::from_raw(ctx, d, 0, prec);
        Ok(Integral { value: Jet::new(value, deriv), certified_prec: prec, terms: used })
    }
}

/// `μ_η`, whose Amice transform is
/// `-τ(η̄)^{-1} Σ_a [η̄(a)/((1+X)ζ_N^a - 1) - η̄(a)/((1+X)^p ζ_N^{pa} - 1)]`.
///
/// Writing `G(X) = Σ_a η̄(a)/((1+X)ζ_N^a - 1)`, the second sum is
/// `η(p)·G(φ(X))`. Expanding `η̄(a)/τ(η̄)` by the Gauss-sum identity and
/// summing the geometric series over `a` gives
/// `G/τ(η̄) = H = Σ_c η(c)(1+X)^c / ((1+X)^N - 1)`, so the transform is
/// `-(H - η(p) H∘φ)`. `H` needs only the values of `η`, not `ζ_N`, which
/// keeps the residue degree small; [`build_mu_eta_gauss`] is the literal
/// construction.
pub fn build_mu_eta(eta: &DirichletChar, ctx: &PadicContext, k: usize) -> Result<Measure> {
    build_mu_eta_signed(eta, ctx, k, false)
}

fn check_mu_eta(eta: &DirichletChar, p: u64) -> Result<()> {
    let n = eta.modulus();
    if n.is_multiple_of(p) {
        return Err(Error::PDividesN { p, n });
    }
    if eta.is_trivial() {
        return Err(Error::TrivialCharacter);
    }
    if !eta.is_primitive() {
        return Err(Error::NotPrimitive { conductor: eta.conductor(), modulus: n });
    }
    Ok(())
}

/// [`build_mu_eta`] with an optional global sign flip, used by mutation
/// tests of the verification suite.
pub fn build_mu_eta_signed(eta: &DirichletChar, ctx: &PadicContext, k: usize, flip: bool) -> Result<Measure> {
    let p = ctx.p();
    check_mu_eta(eta, p)?;
    let n = eta.modulus() as usize;
    let md = ctx.md();
    let ops = ctx.ops();
    let zero = vec![Res::ZERO; ctx.f()];
    let vals: Vec<Vec<Res>> = eta.value_table(ctx)?.iter().map(|v| v.coords()).collect();
    let mut binom = vec![vec![Res::ZERO; n + 1]; n + 1];
    for c in 0..=n {
        binom[c][0] = md.one();
        for i in 1..=c {
            binom[c][i] = md.add(binom[c - 1][i - 1], binom[c - 1][i]);
        }
    }
    // numerator and denominator of H, both divided by X
    let num: Vec<Vec<Res>> = (0..n)
        .map(|i| {
            let mut acc = zero.clone();
            for (c, v) in vals.iter().enumerate() {
                let b = binom[c][i + 1];
                if !b.is_zero() {
                    for (a, &x) in acc.iter_mut().zip(v) {
                        *a = md.add(*a, md.mul(b, x));
                    }
                }
            }
            acc
        })
        .collect();
    let den: Vec<Res> = (0..n).map(|i| binom[n][i + 1]).collect();
    let d0 = md.inv_unit(den[0]);
    let mut h: Vec<Vec<Res>> = Vec::with_capacity(k + 1);
    for m in 0..=k {
        let mut acc = num.get(m).cloned().unwrap_or_else(|| zero.clone());
        for i in 1..n.min(m + 1) {
            for (a, &x) in acc.iter_mut().zip(&h[m - i]) {
                *a = md.sub(*a, md.mul(den[i], x));
            }
        }
        h.push(acc.into_iter().map(|x| md.mul(x, d0)).collect());
    }
    let table = power_table(ctx, p, k);
    let hp = compose_coords(ctx, &h, &table, k);
    let eta_p = eta.eval(p as i64, ctx)?.coords();
    let sign = if flip { md.one() } else { md.neg(md.one()) };
    let coeffs = h
        .iter()
        .zip(&hp)
        .map(|(a, b)| {
            let x = ops.sub(a, &ops.mul(&eta_p, b));
            PadicElem::from_raw(ctx, x.into_iter().map(|c| md.mul(c, sign)).collect(), 0, ctx.w())
        })
        .collect();
    Measure::new(TruncSeries::new(coeffs))
}

/// `μ_η` from the Gauss-sum form of its transform. Needs `ζ_N` in the
/// context.
pub fn build_mu_eta_gauss(eta: &DirichletChar, ctx: &PadicContext, k: usize) -> Result<Measure> {
    let p = ctx.p();
    check_mu_eta(eta, p)?;
    let n = eta.modulus();
    let etab = eta.conj();
    let tau = gauss_sum(&etab, ctx)?;
    let vals = etab.value_table(ctx)?;
    let ops = ctx.ops();
    let md = ctx.md();
    let f = ctx.f();
    let one = {
        let mut o = vec![Res::ZERO; f];
        o[0] = md.one();
        o
    };
    let zn = ctx.root_of_unity(n)?.coords();
    // G_n = Σ_a η̄(a)/(c-1) · (-c/(c-1))^n with c = ζ^a
    let mut terms = Vec::new();
    let mut c = one.clone();
    for v in vals.iter() {
        let cur = c.clone();
        c = ops.mul(&c, &zn);
        if v.is_zero() {
            continue;
        }
        let inv = ops.inv_unit(&ops.sub(&cur, &one)).ok_or(Error::NotAUnit("ζ^a - 1".into()))?;
        let start = ops.mul(&v.coords(), &inv);
        let ratio = ops.mul(&ops.sub(&vec![Res::ZERO; f], &cur), &inv);
        terms.push((start, ratio));
    }
    let mut g = vec![vec![Res::ZERO; f]; k + 1];
    for gn in g.iter_mut() {
        for (t, r) in terms.iter_mut() {
            *gn = ops.add(gn, t);
            *t = ops.mul(t, r);
        }
    }
    let table = power_table(ctx, p, k);
    let h = compose_coords(ctx, &g, &table, k);
    let eta_p = eta.eval(p as i64, ctx)?.coords();
    let scale = ops.sub(&vec![Res::ZERO; f], &tau.inv()?.coords());
    let coeffs = g
        .iter()
        .zip(&h)
        .map(|(gn, hn)| {
            let a = ops.sub(gn, &ops.mul(&eta_p, hn));
            PadicElem::from_raw(ctx, ops.mul(&a, &scale), 0, ctx.w())
        })
        .collect();
    Measure::new(TruncSeries::new(coeffs))
}

/// Functions on `Z_p` that can be integrated against a measure.
#[derive(Clone, Debug)]
pub enum Integrand {
    /// `binom(x, n)` on all of `Z_p`.
    Binomial(usize),
    /// `x^j` on all of `Z_p`.
    Monomial(u32),
    /// The indicator of `Z_p^*`.
    Indicator,
    /// `ω^i(x) ⟨x⟩^s x^j` on `Z_p^*`, zero on `pZ_p`.
    Character { i: i64, s: Jet, j: u32 },
}

impl Integrand {
    /// Degree for polynomial integrands, whose Mahler expansion is finite.
    fn degree(&self) -> Option<usize> {
        match self {
            Integrand::Binomial(n) => Some(*n),
            Integrand::Monomial(j) => Some(*j as usize),
            _ => None,
        }
    }

    fn restricted(&self) -> bool {
        matches!(self, Integrand::Indicator | Integrand::Character { .. })
    }

    /// A cache key; equal keys denote the same function.
    pub fn key(&self) -> String {
        match self {
            Integrand::Binomial(n) => format!("binom{n}"),
            Integrand::Monomial(j) => format!("mono{j}"),
            Integrand::Indicator => "ind".into(),
            Integrand::Character { i, s, j } => {
                let pm = s.ctx().p() as i64 - 1;
                format!("chr{}:{}:{}:{j}", i.rem_euclid(pm), s.value, s.deriv)
            }
        }
    }
}

/// Mahler coefficients `c_k` (value and derivative part) of an integrand,
/// cut where `p-1` consecutive coefficients vanish modulo `p^W`.
#[derive(Clone, Debug)]
pub struct MahlerData {
    pub p: u64,
    pub digits: u32,
    pub coeffs: Vec<(Res, Res)>,
    pub valuations: Vec<u32>,
    pub certified: i64,
}

/// The integral together with the number of Mahler terms used.
#[derive(Clone, Debug)]
pub struct Integral {
    pub value: Jet,
    pub certified_prec: i64,
    pub terms: usize,
}

fn integrand_value(f: &Integrand, x: u64, base: &PadicContext) -> Result<(Res, Res, i64)> {
    let md = base.md();
    let p = base.p();
    let w = base.w();
    if f.restricted() && x.is_multiple_of(p) {
        return Ok((Res::ZERO, Res::ZERO, w));
    }
    Ok(match f {
        Integrand::Binomial(n) => {
            let mut b = BigInt::one();
            for t in 0..*n as u64 {
                if t >= x {
                    b = BigInt::zero();
                    break;
                }
                b = b * BigInt::from(x - t) / BigInt::from(t + 1);
            }
            (md.from_biguint(&b.to_biguint().unwrap()), Res::ZERO, w)
        }
        Integrand::Monomial(j) => (md.pow_u64(md.from_u64(x), *j as u64), Res::ZERO, w),
        Integrand::Indicator => (md.one(), Res::ZERO, w),
        Integrand::Character { i, s, j } => {
            let e = i.rem_euclid(p as i64 - 1) as u64;
            let om = md.pow_u64(base.teich_res(x % p), e);
            let xj = md.pow_u64(md.from_u64(x), *j as u64);
            let scale = PadicElem::from_raw(base, vec![md.mul(om, xj)], 0, w);
            let lg = iwasawa_log(&PadicElem::from_i64(base, x as i64))?;
            let jet = Jet::exp_scaled(&lg, s)?.scale(&scale);
            let prec = jet.value.prec().min(jet.deriv.prec());
            (jet.value.coords()[0], jet.deriv.coords()[0], prec)
        }
    })
}

/// Mahler data of `f`, adding values one at a time (Newton's forward
/// differences) until the stopping rule fires or `kmax` is reached.
pub fn mahler_data(f: &Integrand, ctx: &PadicContext, kmax: usize) -> Result<MahlerData> {
    let base = ctx.base();
    let md = base.md();
    let p = base.p();
    let w = md.digits();
    let s = match f {
        Integrand::Character { s, .. } => Some(Jet::new(s.value.to_base()?, s.deriv.to_base()?)),
        _ => None,
    };
    let f = match (f, s) {
        (Integrand::Character { i, j, .. }, Some(s)) => Integrand::Character { i: *i, s, j: *j },
        (g, _) => g.clone(),
    };
    let window = (p - 1) as usize;
    let mut diag: Vec<(Res, Res)> = Vec::new();
    let mut coeffs = Vec::new();
    let mut vals = Vec::new();
    let mut prec = base.w();
    let mut run = 0usize;
    for x in 0..=kmax as u64 {
        let (fv, fd, pr) = integrand_value(&f, x, &base)?;
        prec = prec.min(pr);
        let mut e = (fv, fd);
        let mut next = Vec::with_capacity(diag.len() + 1);
        next.push(e);
        for &(a, b) in &diag {
            e = (md.sub(e.0, a), md.sub(e.1, b));
            next.push(e);
        }
        diag = next;
        let v = md.valuation(e.0).min(md.valuation(e.1));
        coeffs.push(e);
        vals.push(v);
        run = if v >= w { run + 1 } else { 0 };
        let done = match f.degree() {
            Some(d) => x as usize == d,
            None => run >= window,
        };
        if done {
            return Ok(MahlerData { p, digits: w, coeffs, valuations: vals, certified: prec.min(w as i64) });
        }
    }
    let achieved = vals.iter().rev().take(window).copied().min().unwrap_or(0);
    Err(Error::NoConvergence { k: kmax, achieved: achieved as i64, wanted: w as i64 })
}

/// `∫ f dμ` by Mahler expansion.
pub fn mahler_integrate(f: &Integrand, mu: &Measure) -> Result<Integral> {
    let data = mahler_data(f, mu.ctx(), mu.truncation())?;
    mu.integrate(&data)
}

/// Memo of Mahler data keyed by `(p, W, integrand)`; integrands do not
/// depend on the measure, so one table serves a whole character grid.
#[derive(Default)]
pub struct MahlerCache {
    map: Mutex<HashMap<(u64, u32, String), Arc<MahlerData>>>,
}

impl MahlerCache {
    pub fn new() -> MahlerCache {
        MahlerCache::default()
    }

    pub fn get(&self, f: &Integrand, ctx: &PadicContext, kmax: usize) -> Result<Arc<MahlerData>> {
        let key = (ctx.p(), ctx.precision(), f.key());
        if let Some(d) = self.map.lock().unwrap().get(&key) {
            return Ok(d.clone());
        }
        let d = Arc::new(mahler_data(f, ctx, kmax)?);
        self.map.lock().unwrap().insert(key, d.clone());
        Ok(d)
    }

    pub fn integrate(&self, f: &Integrand, mu: &Measure) -> Result<Integral> {
        mu.integrate(&*self.get(f, mu.ctx(), mu.truncation())?)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::l_value_neg;
    use crate::dirichlet::character_context_modulus;
    use crate::padic::make_context;

    fn series(ctx: &PadicContext, c: &[i64], k: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(ctx, k);
        for (i, &x) in c.iter().enumerate() {
            s.coeffs[i] = PadicElem::from_i64(ctx, x);
        }
        s
    }

    #[test]
    fn partial_examples() {
        let ctx = make_context(7, 1, 10).unwrap();
        let d = partial_op(&series(&ctx, &[0, 1], 6));
        assert_eq!(d.coeffs[0], PadicElem::one(&ctx));
        assert_eq!(d.coeffs[1], PadicElem::one(&ctx));
        assert!(d.coeffs[2..].iter().all(|c| c.is_zero()));
        for c in 0..=5 {
            let f = TruncSeries::one_plus_x_pow(&ctx, c, 10);
            let d = partial_op(&f);
            for i in 0..10 {
                assert_eq!(d.coeffs[i], f.coeffs[i].mul_int(c as i64));
            }
        }
    }

    #[test]
    fn psi_left_inverse_and_trace() {
        for p in [3u64, 5, 7] {
            let ctx = make_context(p, 1, 10).unwrap();
            let k = 6 * p as usize;
            let f = series(&ctx, &[1, 1, 1], k);
            let back = psi_op(&phi_op(&f));
            for (l, c) in back.coeffs.iter().enumerate() {
                if c.prec() < 5 {
                    continue;
                }
                let want = if l < 3 { PadicElem::one(&ctx) } else { PadicElem::zero(&ctx) };
                assert!(c.agreement(&want) >= c.prec(), "p={p} l={l}");
            }
            for j in 1..=3 * p {
                let s = psi_op(&TruncSeries::one_plus_x_pow(&ctx, j, k));
                let want = if j % p == 0 {
                    TruncSeries::one_plus_x_pow(&ctx, j / p, k / p as usize)
                } else {
                    TruncSeries::zero(&ctx, k / p as usize)
                };
                for (l, c) in s.coeffs.iter().enumerate() {
                    assert!(c.agreement(&want.coeffs[l]) >= c.prec().min(10), "p={p} j={j} l={l}");
                }
            }
        }
    }

    #[test]
    fn psi_semilinear() {
        let ctx = make_context(5, 3, 10).unwrap();
        assert_eq!(ctx.f(), 2);
        let k = 20;
        let a = PadicElem::from_coords(&ctx, &[2, 3]);
        let mut f = TruncSeries::zero(&ctx, k);
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            *c = PadicElem::from_coords(&ctx, &[i as i64 + 1, (i * i) as i64]);
        }
        let lhs = psi_op(&f.scale(&a));
        let rhs = psi_op(&f).scale(&a.frobenius_inv());
        for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
            assert!(x.agreement(y) >= x.prec().min(y.prec()));
        }
    }

    #[test]
    fn psi_tail_bound_holds() {
        for p in [3u64, 5, 7] {
            let md = Modulus::new(p, 30).unwrap();
            let k = 12 * p as usize;
            let m = psi_matrix(&md, k);
            for (l, row) in m.iter().enumerate() {
                for (n, &t) in row.iter().enumerate() {
                    assert!(md.valuation(t) as i64 >= psi_tail_bound(p, l, n), "p={p} l={l} n={n}");
                }
            }
        }
    }

    #[test]
    fn binomial_integrand_picks_coefficient() {
        let ctx = make_context(7, 1, 10).unwrap();
        let k = default_truncation(7, 10);
        for n in [0usize, 1, 4, 9] {
            let mu = Measure::new(TruncSeries::monomial(&ctx, n, k)).unwrap();
            let r = mahler_integrate(&Integrand::Binomial(n), &mu).unwrap();
            assert_eq!(r.value.value, PadicElem::one(&ctx));
        }
    }

    #[test]
    fn quadratic_three_measure() {
        let p = 7;
        let ctx = make_context(p, character_context_modulus(3, p), 12).unwrap();
        let eta = DirichletChar::parse("quad3").unwrap();
        let k = default_truncation(p, 12);
        let mu = build_mu_eta(&eta, &ctx, k).unwrap();
        // supported on Z_p^*: ψ vanishes where certified
        let psi = psi_op(&mu.amice);
        for c in &psi.coeffs {
            assert!(c.is_zero(), "{c}");
        }
        // η(7) = 1: total mass 0
        assert!(mu.moment(0).unwrap().is_zero());
        for j in 0..=6 {
            let l = l_value_neg(&eta, j, &ctx).unwrap();
            let euler = &PadicElem::one(&ctx) - &PadicElem::from_i64(&ctx, (p as i64).pow(j as u32));
            assert_eq!(mu.moment(j).unwrap(), &euler * &l, "j={j}");
        }
        let ind = mahler_integrate(&Integrand::Indicator, &mu).unwrap();
        assert!(ind.value.value.is_zero());
        let s0 = Jet::constant(PadicElem::zero(&ctx));
        let same = mahler_integrate(&Integrand::Character { i: 0, s: s0, j: 0 }, &mu).unwrap();
        assert_eq!(same.value.value, ind.value.value);
        for m in 0..=4u32 {
            let a = mahler_integrate(&Integrand::Monomial(m), &mu).unwrap();
            assert!(a.value.value.agreement(&mu.moment(m as usize).unwrap()) >= a.certified_prec);
        }
    }

    #[test]
    fn gauss_and_descended_forms_agree() {
        for p in [5u64, 7, 11] {
            for n in [3u64, 4, 7, 8, 9] {
                if n % p == 0 {
                    continue;
                }
                let ctx = make_context(p, character_context_modulus(n, p), 10).unwrap();
                let k = default_truncation(p, 10);
                for eta in crate::dirichlet::primitive_chars(n).into_iter().filter(|e| e.realizable_at(p)) {
                    if eta.is_trivial() {
                        continue;
                    }
                    let a = build_mu_eta(&eta, &ctx, k).unwrap();
                    let b = build_mu_eta_gauss(&eta, &ctx, k).unwrap();
                    for (x, y) in a.amice.coeffs.iter().zip(&b.amice.coeffs) {
                        assert_eq!(x, y, "{} p={p}", eta.label());
                    }
                }
            }
        }
        // only the character values are needed: ζ_7 is absent here
        let eta = crate::dirichlet::primitive_chars(7).into_iter().find(|e| e.order() == 2).unwrap();
        let small = make_context(13, 12, 10).unwrap();
        let mu = build_mu_eta(&eta, &small, default_truncation(13, 10)).unwrap();
        let l = l_value_neg(&eta, 3, &make_context(13, character_context_modulus(7, 13), 10).unwrap()).unwrap();
        let euler = &PadicElem::one(&small) - &eta.eval(13, &small).unwrap().shift(3);
        let want = &euler * &l.to_base().unwrap().embed(&small);
        assert_eq!(mu.moment(3).unwrap(), want);
    }

    #[test]
    fn subst_power_matches_product() {
        let ctx = make_context(5, 1, 10).unwrap();
        let f = series(&ctx, &[1, 2, 3], 12);
        let phi = TruncSeries::one_plus_x_pow(&ctx, 3, 12).sub(&series(&ctx, &[1], 12));
        let want = series(&ctx, &[1], 12).add(&phi.scale(&PadicElem::from_i64(&ctx, 2))).add(&phi.mul(&phi).scale(&PadicElem::from_i64(&ctx, 3)));
        let got = f.subst_power(3);
        for (a, b) in got.coeffs.iter().zip(&want.coeffs) {
            assert_eq!(a, b);
        }
    }
}
