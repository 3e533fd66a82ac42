//! Teichmüller lifts, the Iwasawa logarithm, the exponential and Hensel
//! lifting.


use super::{PadicContext, PadicElem};
use crate::error::{Error, Result};

/// Floor of `log_p(n)` for `n >= 1`.
fn ilog(n: u64, p: u64) -> i64 {
    let mut k = 0;
    let mut x = n;
    while x >= p {
        x /= p;
        k += 1;
    }
    k
}

/// `ω(x)`: the `(q-1)`-st root of unity congruent to the unit `x` mod `p`.
pub fn teichmuller(x: &PadicElem) -> Result<PadicElem> {
    if !x.is_unit() {
        return Err(Error::NotAUnit(x.to_string()));
    }
    let ctx = x.ctx();
    let res = x.residue();
    if ctx.f() == 1 {
        let mut c = vec![crate::padic::Res::ZERO; 1];
        c[0] = ctx.teich_res(res[0]);
        return Ok(PadicElem::from_unit_coords(ctx, c, 0));
    }
    teichmuller_of_residue(ctx, &res)
}

pub(crate) fn teichmuller_of_residue(ctx: &PadicContext, res: &[u64]) -> Result<PadicElem> {
    let ops = ctx.ops();
    if res.iter().all(|&c| c == 0) {
        return Err(Error::NotAUnit("zero residue".into()));
    }
    let qm1 = ctx.q() - 1u32;
    let inv_qm1 = PadicElem::from_bigint(ctx, &qm1.clone().into()).inv()?;
    let one = PadicElem::one(ctx);
    let mut y = PadicElem::from_unit_coords(ctx, ops.lift(res), 0);
    for _ in 0..64 {
        let h = y.pow_big(&qm1) - &one;
        if h.is_zero() {
            return Ok(y);
        }
        y = &y - &(&(&y * &h) * &inv_qm1);
    }
    Err(Error::PrecisionExhausted("Teichmüller iteration did not settle".into()))
}

/// `⟨x⟩ = x / ω(x)` for a unit of `Z_p`.
pub fn angle_bracket(x: &PadicElem) -> Result<PadicElem> {
    if !x.is_unit() || !x.is_rational() {
        return Err(Error::NotAUnit(x.to_string()));
    }
    let w = teichmuller(x)?;
    x.checked_div(&w)
}

/// `log(1 + z)` for `v(z) >= 1`.
fn log1p(z: &PadicElem) -> PadicElem {
    let ctx = z.ctx();
    if z.is_zero() {
        return PadicElem::zero_with_prec(ctx, z.prec());
    }
    let p = ctx.p();
    let vz = z.val();
    let target = z.prec();
    let mut acc = PadicElem::zero(ctx);
    let mut zn = PadicElem::one(ctx);
    let mut n: u64 = 1;
    while (n as i64) * vz - ilog(n, p) < target {
        zn = &zn * z;
        let term = zn.checked_div(&PadicElem::from_i64(ctx, n as i64)).unwrap();
        acc = if n % 2 == 1 { &acc + &term } else { &acc - &term };
        n += 1;
    }
    acc.with_prec(target)
}

/// Iwasawa logarithm: `log_p(p) = 0`, and `log_p(u) = log(u^{q-1}) / (q-1)`
/// on units.
pub fn iwasawa_log(u: &PadicElem) -> Result<PadicElem> {
    if u.is_zero() {
        return Err(Error::Domain("log of zero".into()));
    }
    let ctx = u.ctx();
    let w = u.shift(-u.val());
    if ctx.f() == 1 {
        let t = teichmuller(&w)?;
        let z = &w.checked_div(&t)? - &PadicElem::one(ctx);
        return Ok(log1p(&z));
    }
    let qm1 = ctx.q() - 1u32;
    let z = &w.pow_big(&qm1) - &PadicElem::one(ctx);
    log1p(&z).checked_div(&PadicElem::from_bigint(ctx, &qm1.into()))
}

/// `exp(x)` for `v(x) >= 1`.
pub fn padic_exp(x: &PadicElem) -> Result<PadicElem> {
    let ctx = x.ctx();
    if x.is_zero() {
        return Ok(PadicElem::one(ctx).with_prec(x.prec()));
    }
    if x.val() < 1 {
        return Err(Error::Domain(format!("exp diverges at valuation {}", x.val())));
    }
    let p = ctx.p() as i64;
    let target = x.prec().min(ctx.w());
    let mut acc = PadicElem::one(ctx);
    let mut term = PadicElem::one(ctx);
    let mut n: i64 = 1;
    // v(x^n/n!) >= n v(x) - (n-1)/(p-1)
    while n * x.val() - (n - 1) / (p - 1) < target {
        term = (&term * x).checked_div(&PadicElem::from_i64(ctx, n))?;
        acc = &acc + &term;
        n += 1;
    }
    Ok(acc.with_prec(target))
}

/// `σ`, the lift of `x ↦ x^p`.
pub fn frobenius(u: &PadicElem) -> PadicElem {
    u.frobenius()
}

fn eval_poly(poly: &[PadicElem], x: &PadicElem) -> PadicElem {
    let ctx = x.ctx();
    poly.iter().rev().fold(PadicElem::zero(ctx), |acc, c| &(&acc * x) + c)
}

/// The root of `poly` (coefficients lowest degree first) congruent to the
/// simple residue root `seed`.
pub fn hensel_root(poly: &[PadicElem], seed: &PadicElem) -> Result<PadicElem> {
    let ctx = seed.ctx();
    if poly.is_empty() {
        return Err(Error::InvalidData("empty polynomial".into()));
    }
    let deriv: Vec<PadicElem> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_int(i as i64))
        .collect();
    if eval_poly(poly, seed).val() < 1 {
        return Err(Error::HenselBadSeed);
    }
    if eval_poly(&deriv, seed).val() != 0 {
        return Err(Error::HenselNonSimple);
    }
    let data_prec = poly.iter().map(|c| c.prec()).min().unwrap().min(ctx.w());
    // restart from the residue so that a low-precision seed does not cap the root
    let mut y = PadicElem::from_unit_coords(ctx, ctx.lift(&seed.residue()), 0);
    if seed.val() > 0 {
        y = PadicElem::zero(ctx);
    }
    for _ in 0..64 {
        let fy = eval_poly(poly, &y);
        if fy.val() >= data_prec {
            return Ok(y.with_prec(data_prec));
        }
        let dy = eval_poly(&deriv, &y);
        y = &y - &fy.checked_div(&dy)?;
    }
    Err(Error::PrecisionExhausted("Newton iteration did not settle".into()))
}
