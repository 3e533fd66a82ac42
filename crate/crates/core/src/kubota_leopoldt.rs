//! The Kubota–Leopoldt p-adic L-function `L_p(ηω^m, s)`.
//!
//! Two routes: integration of `ω^{m-1}(x)⟨x⟩^{-s}` against `μ_η`, and the
//! classical Bernoulli expansion over the period `F = lcm(N, p)`. Both carry
//! the derivative in `s` through [`Jet`] arithmetic.

use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::amice::{build_mu_eta, default_truncation, Integrand, MahlerCache, Measure};
use crate::classical::{bernoulli, gen_bernoulli, gen_bernoulli_all};
use crate::dirichlet::{twist_by_teichmuller, DirichletChar};
use crate::error::{Error, Result};
use crate::gamma::GammaTable;
use crate::padic::{iwasawa_log, Jet, PadicContext, PadicElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Measure,
    Series,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Measure => "measure",
            Route::Series => "series",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LpValue {
    pub value: Jet,
    pub route: Route,
    pub certified_prec: i64,
}

impl LpValue {
    /// Digits on which two values agree, capped by both certificates.
    pub fn agreement(&self, other: &LpValue) -> i64 {
        let cap = self.certified_prec.min(other.certified_prec);
        self.value
            .value
            .agreement(&other.value.value)
            .min(self.value.deriv.agreement(&other.value.deriv))
            .min(cap)
    }
}

/// A measure `μ_η` together with shared Mahler data, for evaluating
/// `L_p(ηω^m, s)` at many points.
pub struct LpEngine {
    eta: DirichletChar,
    ctx: PadicContext,
    measure: Measure,
    cache: Arc<MahlerCache>,
}

impl LpEngine {
    pub fn new(eta: &DirichletChar, ctx: &PadicContext, k: usize, cache: Arc<MahlerCache>) -> Result<LpEngine> {
        let measure = build_mu_eta(eta, ctx, k)?;
        Ok(LpEngine { eta: eta.clone(), ctx: ctx.clone(), measure, cache })
    }

    pub fn with_measure(eta: &DirichletChar, measure: Measure, cache: Arc<MahlerCache>) -> LpEngine {
        let ctx = measure.ctx().clone();
        LpEngine { eta: eta.clone(), ctx, measure, cache }
    }

    pub fn eta(&self) -> &DirichletChar {
        &self.eta
    }

    pub fn ctx(&self) -> &PadicContext {
        &self.ctx
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// `∫ ω^{m-1}(x) ⟨x⟩^{-s} dμ_η`.
    pub fn measure_route(&self, m: i64, s: &Jet) -> Result<LpValue> {
        check_disk(s)?;
        let neg = Jet::new(-&s.value, -&s.deriv);
        let f = Integrand::Character { i: m - 1, s: neg, j: 0 };
        let r = self.cache.integrate(&f, &self.measure)?;
        Ok(LpValue { value: r.value, route: Route::Measure, certified_prec: r.certified_prec })
    }
}

fn check_disk(s: &Jet) -> Result<()> {
    if !s.value.is_zero() && s.value.val() < 0 {
        return Err(Error::Domain("s must satisfy v_p(s) ≥ 0".into()));
    }
    Ok(())
}

/// `L_p(ηω^m, s)` through `μ_η`, with default truncation.
pub fn lp_measure_route(eta: &DirichletChar, m: i64, s: &Jet, ctx: &PadicContext) -> Result<LpValue> {
    let k = default_truncation(ctx.p(), ctx.precision());
    LpEngine::new(eta, ctx, k, Arc::new(MahlerCache::new()))?.measure_route(m, s)
}

/// `L_p(χ, s) = (F (s-1))^{-1} Σ_{a≤F, p∤a} χ(a) ⟨a⟩^{1-s} Σ_j binom(1-s, j) (F/a)^j B_j`
/// with `χ = ηω^m` and `F = lcm(N, p)`.
pub fn lp_series_route(eta: &DirichletChar, m: i64, s: &Jet, ctx: &PadicContext) -> Result<LpValue> {
    check_disk(s)?;
    let base = ctx.base();
    let p = ctx.p();
    let w = ctx.w();
    let n = eta.modulus();
    let f = num_integer::lcm(n, p);
    let s_b = Jet::new(s.value.to_base()?, s.deriv.to_base()?);
    let one = Jet::from_i64(&base, 1);
    let one_minus_s = &one - &s_b;
    let sm1 = &s_b - &one;
    if sm1.value.is_zero() {
        return Err(Error::Domain("the series route needs s ≠ 1".into()));
    }
    let loss = sm1.value.val().max(0);
    // terms j > J have valuation ≥ j - 1 - log_p(j) before dividing by F(s-1)
    let mut jmax = (w + loss + 4) as usize;
    while ((jmax as i64) - 1 - ilog(p, jmax as u64)) < w + loss + 2 {
        jmax += 1;
    }
    // c_j = binom(1-s, j) F^j B_j as jets over Z_p
    let mut c = Vec::with_capacity(jmax + 1);
    let mut binom = one.clone();
    let fe = PadicElem::from_i64(&base, f as i64);
    let mut fpow = PadicElem::one(&base);
    for j in 0..=jmax {
        let bj = PadicElem::from_rational(&base, &bernoulli(j));
        c.push(binom.scale(&(&fpow * &bj)));
        let step = &one_minus_s - &Jet::from_i64(&base, j as i64);
        binom = (&binom * &step).scale(&PadicElem::from_ratio(&base, 1, j as i64 + 1));
        fpow = &fpow * &fe;
    }
    let omega = |a: u64| PadicElem::from_raw(&base, vec![base.teich_res(a % p)], 0, w);
    let mut total = Jet::constant(PadicElem::zero(ctx));
    for a in 1..=f {
        if a % p == 0 {
            continue;
        }
        let eta_a = eta.eval(a as i64, ctx)?;
        if eta_a.is_zero() {
            continue;
        }
        let inv_a = PadicElem::from_ratio(&base, 1, a as i64);
        let mut inner = Jet::constant(PadicElem::zero(&base));
        for cj in c.iter().rev() {
            inner = &inner.scale(&inv_a) + cj;
        }
        let lg = iwasawa_log(&PadicElem::from_i64(&base, a as i64))?;
        let pw = Jet::exp_scaled(&lg, &one_minus_s)?;
        let term = &pw * &inner;
        let chi = &eta_a * &omega(a).pow(m.rem_euclid(p as i64 - 1)).embed(ctx);
        total = &total + &Jet::new(term.value.embed(ctx), term.deriv.embed(ctx)).scale(&chi);
    }
    let denom = sm1.scale(&fe);
    let denom = Jet::new(denom.value.embed(ctx), denom.deriv.embed(ctx));
    let value = total.checked_div(&denom)?;
    let tail = jmax as i64 - ilog(p, jmax as u64) - 1 - loss - 1;
    let cert = value.value.prec().min(value.deriv.prec()).min(tail).min(w);
    Ok(LpValue { value: value.with_prec(cert), route: Route::Series, certified_prec: cert })
}

fn ilog(p: u64, n: u64) -> i64 {
    let mut k = 0;
    let mut x = n;
    while x >= p {
        x /= p;
        k += 1;
    }
    k
}

/// The interpolation value
/// `L_p(ηω^m, 1-j) = (1 - χ(p) p^{j-1}) · (-B_{j,χ}/j)` with `χ` the
/// primitive character attached to `ηω^{m-j}`.
pub fn interpolation_value(eta: &DirichletChar, m: i64, j: usize, ctx: &PadicContext) -> Result<PadicElem> {
    if j == 0 {
        return Err(Error::Domain("interpolation points are s = 1 - j with j ≥ 1".into()));
    }
    let chi = twist_by_teichmuller(eta, m - j as i64, ctx)?.primitivize();
    interpolation_from(&chi, j, &gen_bernoulli(&chi, j, ctx)?, ctx)
}

fn interpolation_from(chi: &DirichletChar, j: usize, b: &PadicElem, ctx: &PadicContext) -> Result<PadicElem> {
    let p = ctx.p() as i64;
    let chip = chi.eval(p, ctx)?;
    let euler = &PadicElem::one(ctx) - &(&chip * &PadicElem::from_i64(ctx, 1).shift(j as i64 - 1));
    let l = -(b.checked_div(&PadicElem::from_i64(ctx, j as i64))?);
    Ok(&euler * &l)
}

/// Interpolation values for `j = 1..=jmax` and every `m mod (p-1)`, sharing
/// the Bernoulli computation per twisted character. Indexed `[m][j-1]`.
pub fn interpolation_table(eta: &DirichletChar, jmax: usize, ctx: &PadicContext) -> Result<Vec<Vec<PadicElem>>> {
    let pm = ctx.p() as i64 - 1;
    let mut by_twist = Vec::with_capacity(pm as usize);
    for k in 0..pm {
        let chi = twist_by_teichmuller(eta, k, ctx)?.primitivize();
        let b = gen_bernoulli_all(&chi, jmax, ctx)?;
        by_twist.push((chi, b));
    }
    let mut out = Vec::with_capacity(pm as usize);
    for m in 0..pm {
        let mut row = Vec::with_capacity(jmax);
        for j in 1..=jmax {
            let (chi, b) = &by_twist[(m - j as i64).rem_euclid(pm) as usize];
            row.push(interpolation_from(chi, j, &b[j], ctx)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Result of the trivial-zero derivative computation for one `(η, p)`.
#[derive(Clone, Debug)]
pub struct LInvariantReport {
    pub eta: DirichletChar,
    pub p: u64,
    pub l_measured: PadicElem,
    pub l_value: PadicElem,
    pub lp_value: PadicElem,
    pub lp_deriv: PadicElem,
    pub series_deriv: Option<PadicElem>,
    pub fg_prediction: Option<PadicElem>,
    pub certified_prec: i64,
    pub route_agreement: Option<i64>,
}

impl LInvariantReport {
    /// `L'_p(ηω, 0) + ℒ L(η, 0)`, zero by construction.
    pub fn identity_residual(&self) -> PadicElem {
        &self.lp_deriv + &(&self.l_measured * &self.l_value)
    }
}

/// Derivative of `L_p(ηω, s)` at the trivial zero `s = 0` and the measured
/// invariant `ℒ = -L'_p(ηω, 0)/L(η, 0)`.
pub fn lp_derivative(engine: &LpEngine, with_series: bool) -> Result<LInvariantReport> {
    let eta = engine.eta();
    let ctx = engine.ctx();
    let p = ctx.p();
    if !eta.is_odd() || !eta.is_primitive() {
        return Err(Error::Domain(format!("{} must be odd and primitive", eta.label())));
    }
    if eta.eval(p as i64, ctx)? != PadicElem::one(ctx) {
        return Err(Error::Domain(format!("{}({p}) ≠ 1: no trivial zero", eta.label())));
    }
    let s = Jet::variable(PadicElem::zero(ctx));
    let lm = engine.measure_route(1, &s)?;
    if !lm.value.value.is_zero() {
        return Err(Error::Disagreement(format!(
            "L_p({}ω, 0) = {} is not zero at a trivial zero",
            eta.label(),
            lm.value.value
        )));
    }
    let (series_deriv, agreement) = if with_series {
        let ls = lp_series_route(eta, 1, &s, ctx)?;
        (Some(ls.value.deriv.clone()), Some(lm.agreement(&ls)))
    } else {
        (None, None)
    };
    // L(η, 0) = -B_{1,η}; this form needs no ζ_N in the context
    let l0 = -gen_bernoulli(eta, 1, ctx)?;
    if l0.is_zero() {
        return Err(Error::Domain(format!("L({}, 0) vanishes", eta.label())));
    }
    let d = lm.value.deriv.clone();
    let l_measured = -(d.checked_div(&l0)?);
    let cert = lm.certified_prec.min(l_measured.prec());
    Ok(LInvariantReport {
        eta: eta.clone(),
        p,
        l_measured,
        l_value: l0,
        lp_value: lm.value.value.clone(),
        lp_deriv: d,
        series_deriv,
        fg_prediction: None,
        certified_prec: cert,
        route_agreement: agreement,
    })
}

/// Frozen constants of the `Γ_p` formula
/// `A Σ_{a≤N} η(a) log_p Γ_p(a/N) + B B_{1,η} log_p N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FgCalibration {
    pub a: (i64, i64),
    pub b: (i64, i64),
}

impl FgCalibration {
    fn a(&self, ctx: &PadicContext) -> PadicElem {
        PadicElem::from_ratio(ctx, self.a.0, self.a.1)
    }

    fn b(&self, ctx: &PadicContext) -> PadicElem {
        PadicElem::from_ratio(ctx, self.b.0, self.b.1)
    }

    /// The same constants with `B` shifted by `delta`.
    pub fn perturbed(&self, delta: i64) -> FgCalibration {
        FgCalibration { a: self.a, b: (self.b.0 + delta * self.b.1, self.b.1) }
    }
}

/// The two sums entering the `Γ_p` formula.
pub fn fg_terms(eta: &DirichletChar, ctx: &PadicContext, gamma: &GammaTable) -> Result<(PadicElem, PadicElem)> {
    let n = eta.modulus();
    let mut s1 = PadicElem::zero(ctx);
    for a in 1..=n {
        let e = eta.eval(a as i64, ctx)?;
        if e.is_zero() {
            continue;
        }
        let g = gamma.eval_rational(a as i64, n)?;
        let lg = iwasawa_log(&g)?.embed(ctx);
        s1 = &s1 + &(&e * &lg);
    }
    let b1 = gen_bernoulli(eta, 1, ctx)?;
    let ln = iwasawa_log(&PadicElem::from_i64(&ctx.base(), n as i64))?.embed(ctx);
    Ok((s1, &b1 * &ln))
}

/// Prediction for `L'_p(ηω, 0)` from the calibrated `Γ_p` formula.
pub fn fg_gamma_oracle(eta: &DirichletChar, ctx: &PadicContext, gamma: &GammaTable, cal: &FgCalibration) -> Result<PadicElem> {
    if !eta.is_odd() || !eta.is_primitive() {
        return Err(Error::Domain(format!("{} must be odd and primitive", eta.label())));
    }
    let (s1, s2) = fg_terms(eta, ctx, gamma)?;
    Ok(&(&cal.a(ctx) * &s1) + &(&cal.b(ctx) * &s2))
}

/// Calibrates `(A, B)` among halves in `[-2, 2]` against a measured
/// derivative; exactly one candidate may match to `digits` digits.
pub fn calibrate_fg(
    eta: &DirichletChar,
    ctx: &PadicContext,
    gamma: &GammaTable,
    target: &PadicElem,
    digits: i64,
) -> Result<FgCalibration> {
    let (s1, s2) = fg_terms(eta, ctx, gamma)?;
    let mut hits = Vec::new();
    for an in -4..=4i64 {
        for bn in -4..=4i64 {
            let cal = FgCalibration { a: reduce(an, 2), b: reduce(bn, 2) };
            let pred = &(&cal.a(ctx) * &s1) + &(&cal.b(ctx) * &s2);
            if pred.agreement(target) >= digits {
                hits.push(cal);
            }
        }
    }
    match hits.len() {
        1 => Ok(hits.pop().unwrap()),
        0 => Err(Error::Calibration(format!(
            "no candidate (A, B) reproduces L'_p for {} at p = {}",
            eta.label(),
            ctx.p()
        ))),
        n => Err(Error::Calibration(format!("{n} candidate pairs match; the calibration is not identifiable"))),
    }
}

fn reduce(n: i64, d: i64) -> (i64, i64) {
    let q = BigRational::new(n.into(), d.into());
    (
        num_traits::ToPrimitive::to_i64(q.numer()).unwrap(),
        num_traits::ToPrimitive::to_i64(q.denom()).unwrap(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::character_context_modulus;
    use crate::padic::make_context;

    fn quad3(p: u64, m: u32) -> (DirichletChar, PadicContext) {
        let ctx = make_context(p, character_context_modulus(3, p), m).unwrap();
        (DirichletChar::parse("quad3").unwrap(), ctx)
    }

    #[test]
    fn trivial_zero_and_nonvanishing() {
        let (eta, ctx) = quad3(7, 12);
        let s = Jet::constant(PadicElem::zero(&ctx));
        let v = lp_measure_route(&eta, 1, &s, &ctx).unwrap();
        assert!(v.value.value.is_zero());
        assert_eq!(v.certified_prec, 12);
        let (eta, ctx) = quad3(5, 12);
        let s = Jet::constant(PadicElem::zero(&ctx));
        let v = lp_measure_route(&eta, 1, &s, &ctx).unwrap();
        assert_eq!(v.value.value, PadicElem::from_ratio(&ctx, 2, 3));
        let w = lp_series_route(&eta, 1, &s, &ctx).unwrap();
        assert!(v.agreement(&w) >= 10);
    }

    #[test]
    fn interpolation_quad3() {
        let (eta, ctx) = quad3(7, 14);
        let k = default_truncation(7, 14);
        let engine = LpEngine::new(&eta, &ctx, k, Arc::new(MahlerCache::new())).unwrap();
        let table = interpolation_table(&eta, 6, &ctx).unwrap();
        for m in 0..6i64 {
            for j in 1..=6usize {
                let s = Jet::from_i64(&ctx, 1 - j as i64);
                let v = engine.measure_route(m, &s).unwrap();
                let want = &table[m as usize][j - 1];
                assert!(v.value.value.agreement(want) >= v.certified_prec - 2, "m={m} j={j}");
                assert_eq!(*want, interpolation_value(&eta, m, j, &ctx).unwrap());
                let w = lp_series_route(&eta, m, &s, &ctx).unwrap();
                assert!(v.agreement(&w) >= 10, "m={m} j={j}: {} vs {}", v.value.value, w.value.value);
            }
        }
    }

    #[test]
    fn odd_branch_vanishes() {
        let (eta, ctx) = quad3(7, 10);
        for s in [0i64, 3, -2] {
            let v = lp_measure_route(&eta, 2, &Jet::variable(PadicElem::from_i64(&ctx, s)), &ctx).unwrap();
            assert!(v.value.value.is_zero() && v.value.deriv.is_zero());
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (eta, ctx) = quad3(7, 16);
        let k = default_truncation(7, 16);
        let engine = LpEngine::new(&eta, &ctx, k, Arc::new(MahlerCache::new())).unwrap();
        let rep = lp_derivative(&engine, true).unwrap();
        assert!(rep.route_agreement.unwrap() >= 12);
        assert!(rep.identity_residual().is_zero());
        let h = PadicElem::from_i64(&ctx, 343);
        let plus = engine.measure_route(1, &Jet::constant(h.clone())).unwrap();
        let minus = engine.measure_route(1, &Jet::constant(-&h)).unwrap();
        let fd = (&plus.value.value - &minus.value.value).checked_div(&h.mul_int(2)).unwrap();
        // the error is O(h^2) = O(p^6) relative to the second derivative
        assert!(fd.agreement(&rep.lp_deriv) >= 6, "{fd} vs {}", rep.lp_deriv);
    }
}
