use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::context::{PadicContext, INF};
use super::modint::Res;
use crate::error::{Error, Result};

/// An element `p^val · u` of `Q_q`, with `u` a unit known modulo
/// `p^(prec - val)`.
///
/// The relative precision `prec - val` never exceeds the context precision
/// `M`. An element with `val >= prec` is indistinguishable from zero; the
/// exact zero carries infinite precision.
#[derive(Clone)]
pub struct PadicElem {
    ctx: PadicContext,
    val: i64,
    prec: i64,
    unit: Vec<Res>,
}

fn clamp(x: i64) -> i64 {
    if x >= INF / 2 {
        INF
    } else {
        x
    }
}

impl PadicElem {
    pub fn zero(ctx: &PadicContext) -> PadicElem {
        PadicElem { ctx: ctx.clone(), val: INF, prec: INF, unit: vec![Res::ZERO; ctx.f()] }
    }

    /// Zero known only modulo `p^prec`.
    pub fn zero_with_prec(ctx: &PadicContext, prec: i64) -> PadicElem {
        let prec = clamp(prec);
        PadicElem { ctx: ctx.clone(), val: prec, prec, unit: vec![Res::ZERO; ctx.f()] }
    }

    pub fn one(ctx: &PadicContext) -> PadicElem {
        PadicElem::from_i64(ctx, 1)
    }

    pub fn from_i64(ctx: &PadicContext, n: i64) -> PadicElem {
        if n == 0 {
            return PadicElem::zero(ctx);
        }
        let p = ctx.p();
        let mut v = 0;
        let mut m = n;
        while m % p as i64 == 0 {
            m /= p as i64;
            v += 1;
        }
        let mut unit = vec![Res::ZERO; ctx.f()];
        unit[0] = ctx.md().from_i64(m);
        PadicElem { ctx: ctx.clone(), val: v, prec: v + ctx.w(), unit }
    }

    pub fn from_bigint(ctx: &PadicContext, n: &BigInt) -> PadicElem {
        if n.is_zero() {
            return PadicElem::zero(ctx);
        }
        let p = BigInt::from(ctx.p());
        let mut v = 0;
        let mut m = n.clone();
        loop {
            let (q, r) = m.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            m = q;
            v += 1;
        }
        let md = ctx.md();
        let mag = md.from_biguint(m.magnitude());
        let r = if m.sign() == Sign::Minus { md.neg(mag) } else { mag };
        let mut unit = vec![Res::ZERO; ctx.f()];
        unit[0] = r;
        PadicElem { ctx: ctx.clone(), val: v, prec: v + ctx.w(), unit }
    }

    pub fn from_rational(ctx: &PadicContext, q: &BigRational) -> PadicElem {
        let num = PadicElem::from_bigint(ctx, q.numer());
        let den = PadicElem::from_bigint(ctx, q.denom());
        num.checked_div(&den).expect("denominator is nonzero")
    }

    pub fn from_ratio(ctx: &PadicContext, num: i64, den: i64) -> PadicElem {
        PadicElem::from_rational(ctx, &BigRational::new(num.into(), den.into()))
    }

    /// An element from integer coordinates in the power basis.
    pub fn from_coords(ctx: &PadicContext, coords: &[i64]) -> PadicElem {
        assert!(coords.len() <= ctx.f(), "too many coordinates");
        // Strip the common power of p while the integers are still exact, so
        // the unit part keeps all `M` digits.
        let p = ctx.p() as i64;
        let mut ints = coords.to_vec();
        let mut v = 0;
        while ints.iter().any(|&x| x != 0) && ints.iter().all(|&x| x % p == 0) {
            ints.iter_mut().for_each(|x| *x /= p);
            v += 1;
        }
        let md = ctx.md();
        let mut c = vec![Res::ZERO; ctx.f()];
        for (o, &x) in c.iter_mut().zip(&ints) {
            *o = md.from_i64(x);
        }
        PadicElem::from_raw(ctx, c, v, INF)
    }

    /// Coordinates known to the full working precision, scaled by `p^val`.
    pub(crate) fn from_unit_coords(ctx: &PadicContext, coords: Vec<Res>, val: i64) -> PadicElem {
        PadicElem::from_raw(ctx, coords, val, INF)
    }

    /// Normalizing constructor: strips common factors of `p` from `coords`
    /// and caps the relative precision at `M`.
    pub(crate) fn from_raw(ctx: &PadicContext, coords: Vec<Res>, val: i64, prec: i64) -> PadicElem {
        let w = ctx.w();
        let prec = clamp(prec);
        let cap = (prec - val).min(w);
        if cap <= 0 {
            return PadicElem::zero_with_prec(ctx, prec.min(val + w));
        }
        let ops = ctx.ops();
        let t = ops.val(&coords) as i64;
        if t >= cap {
            return PadicElem::zero_with_prec(ctx, (val + cap).min(prec));
        }
        let md = ctx.md();
        let unit = if t == 0 {
            coords
        } else {
            coords.into_iter().map(|c| md.div_p_pow(c, t as u32)).collect()
        };
        // coords are known mod p^w at scale p^val; dividing out p^t does not
        // add digits
        PadicElem { ctx: ctx.clone(), val: val + t, prec: prec.min(val + w), unit }
    }

    pub fn ctx(&self) -> &PadicContext {
        &self.ctx
    }

    /// Valuation; for elements indistinguishable from zero this is `prec`.
    pub fn val(&self) -> i64 {
        self.val
    }

    /// Absolute precision: the element is known modulo `p^prec`.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.val >= self.prec
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec >= INF
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }


    /// Coordinates of the element itself (requires `val >= 0`), mod `p^M`.
    pub(crate) fn coords(&self) -> Vec<Res> {
        assert!(self.val >= 0 || self.is_zero(), "element is not integral");
        if self.is_zero() {
            return vec![Res::ZERO; self.ctx.f()];
        }
        let s = self.ctx.p_pow_res(self.val);
        let md = self.ctx.md();
        self.unit.iter().map(|&c| md.mul(c, s)).collect()
    }

    /// Lowers the precision to at most `prec`.
    pub fn with_prec(&self, prec: i64) -> PadicElem {
        let prec = prec.min(self.prec);
        if self.val >= prec {
            return PadicElem::zero_with_prec(&self.ctx, prec);
        }
        PadicElem { prec, ..self.clone() }
    }

    /// Multiplication by `p^k`.
    pub fn shift(&self, k: i64) -> PadicElem {
        if self.is_exact_zero() {
            return self.clone();
        }
        PadicElem { val: self.val + k, prec: self.prec + k, ..self.clone() }
    }

    fn check_ctx(&self, other: &PadicElem) {
        assert!(self.ctx.same(&other.ctx), "elements come from different contexts");
    }

    pub fn add_ref(&self, other: &PadicElem) -> PadicElem {
        self.check_ctx(other);
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let prec = self.prec.min(other.prec);
        let v = self.val.min(other.val);
        if v >= prec {
            return PadicElem::zero_with_prec(&self.ctx, prec);
        }
        let md = self.ctx.md();
        let mut acc = vec![Res::ZERO; self.ctx.f()];
        for x in [self, other] {
            if x.is_zero() {
                continue;
            }
            let s = x.val - v;
            if s >= self.ctx.w() || x.val >= prec {
                continue;
            }
            let sc = self.ctx.p_pow_res(s);
            for (a, &c) in acc.iter_mut().zip(&x.unit) {
                *a = md.add(*a, if s == 0 { c } else { md.mul(c, sc) });
            }
        }
        PadicElem::from_raw(&self.ctx, acc, v, prec)
    }

    pub fn neg_ref(&self) -> PadicElem {
        let md = self.ctx.md();
        PadicElem { unit: self.unit.iter().map(|&c| md.neg(c)).collect(), ..self.clone() }
    }

    pub fn sub_ref(&self, other: &PadicElem) -> PadicElem {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &PadicElem) -> PadicElem {
        self.check_ctx(other);
        if self.is_exact_zero() || other.is_exact_zero() {
            return PadicElem::zero(&self.ctx);
        }
        let v = self.val + other.val;
        let prec = clamp((self.prec + other.val).min(other.prec + self.val));
        if self.is_zero() || other.is_zero() || v >= prec {
            return PadicElem::zero_with_prec(&self.ctx, prec);
        }
        let unit = self.ctx.ops().mul(&self.unit, &other.unit);
        PadicElem { ctx: self.ctx.clone(), val: v, prec, unit }
    }

    pub fn inv(&self) -> Result<PadicElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let unit = self.ctx.ops().inv_unit(&self.unit).expect("normalized unit part");
        let rel = self.prec - self.val;
        Ok(PadicElem { ctx: self.ctx.clone(), val: -self.val, prec: -self.val + rel, unit })
    }

    pub fn checked_div(&self, other: &PadicElem) -> Result<PadicElem> {
        Ok(self.mul_ref(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> PadicElem {
        if e < 0 {
            return self.inv().expect("negative power of zero").pow(-e);
        }
        let mut acc = PadicElem::one(&self.ctx);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    pub fn pow_big(&self, e: &BigUint) -> PadicElem {
        let mut acc = PadicElem::one(&self.ctx);
        for i in (0..e.bits()).rev() {
            acc = acc.mul_ref(&acc);
            if e.bit(i) {
                acc = acc.mul_ref(self);
            }
        }
        acc
    }

    pub fn mul_int(&self, n: i64) -> PadicElem {
        self.mul_ref(&PadicElem::from_i64(&self.ctx, n))
    }

    /// Number of agreeing p-adic digits with `other`, i.e. `v_p(self - other)`
    /// capped by the common precision.
    pub fn agreement(&self, other: &PadicElem) -> i64 {
        let d = self.sub_ref(other);
        d.val.min(d.prec)
    }

    /// Whether the element lies in `Q_p` (all non-constant coordinates vanish).
    pub fn is_rational(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let rel = (self.prec - self.val) as u32;
        let md = self.ctx.md();
        self.unit[1..].iter().all(|&c| md.valuation(c) >= rel)
    }

    /// The same value in the `Z_p` context; requires `is_rational`.
    pub fn to_base(&self) -> Result<PadicElem> {
        if !self.is_rational() {
            return Err(Error::Domain("element does not lie in Q_p".into()));
        }
        let base = self.ctx.base();
        if self.is_exact_zero() {
            return Ok(PadicElem::zero(&base));
        }
        if self.is_zero() {
            return Ok(PadicElem::zero_with_prec(&base, self.prec));
        }
        Ok(PadicElem { ctx: base, val: self.val, prec: self.prec, unit: vec![self.unit[0]] })
    }

    /// Embeds an element of the `Z_p` context into `ctx`.
    pub fn embed(&self, ctx: &PadicContext) -> PadicElem {
        assert!(self.ctx.f() == 1 && self.ctx.p() == ctx.p() && self.ctx.w() == ctx.w());
        let mut unit = vec![Res::ZERO; ctx.f()];
        unit[0] = self.unit[0];
        PadicElem { ctx: ctx.clone(), val: self.val, prec: self.prec, unit }
    }

    /// The same element in another context over the same `Z_q` (equal `p`
    /// and defining polynomial), e.g. one built for a different `M`.
    pub fn transfer(&self, ctx: &PadicContext) -> Result<PadicElem> {
        if ctx.p() != self.ctx.p() || ctx.defining_poly() != self.ctx.defining_poly() {
            return Err(Error::ContextMismatch);
        }
        if self.is_exact_zero() {
            return Ok(PadicElem::zero(ctx));
        }
        let cap = self.val + ctx.w();
        if self.is_zero() {
            return Ok(PadicElem::zero_with_prec(ctx, self.prec.min(cap)));
        }
        let rel = (self.prec - self.val).min(ctx.w()) as u32;
        let unit = PadicElem { ctx: self.ctx.clone(), val: 0, prec: rel as i64, unit: self.unit.clone() };
        let mut acc = PadicElem::zero(ctx);
        let mut theta_i = PadicElem::one(ctx);
        let theta = if ctx.f() > 1 { Some(PadicElem::from_coords(ctx, &[0, 1])) } else { None };
        for c in unit.coords_mod(rel) {
            acc = &acc + &(&theta_i * &PadicElem::from_bigint(ctx, &c.into()));
            if let Some(t) = &theta {
                theta_i = &theta_i * t;
            }
        }
        Ok(acc.shift(self.val).with_prec(self.prec.min(cap)))
    }

    /// Reduction into the residue field (requires `val >= 0`).
    pub fn residue(&self) -> Vec<u64> {
        if self.val > 0 || self.is_zero() {
            return vec![0; self.ctx.f()];
        }
        assert!(self.val == 0, "element is not integral");
        self.ctx.ops().residue(&self.unit)
    }

    /// Coordinates as integers modulo `p^k` (requires `val >= 0`, `k <= prec`).
    pub fn coords_mod(&self, k: u32) -> Vec<BigUint> {
        let md = self.ctx.md();
        let m = BigUint::from(self.ctx.p()).pow(k);
        self.coords().into_iter().map(|c| md.to_biguint(c) % &m).collect()
    }

    /// For elements of `Z_p`: the integer representative mod `p^k`.
    pub fn to_biguint_mod(&self, k: u32) -> BigUint {
        self.coords_mod(k).swap_remove(0)
    }

    /// Balanced representative in `(-p^k/2, p^k/2]` of a `Z_p` element.
    pub fn to_bigint_mod(&self, k: u32) -> BigInt {
        let m = BigInt::from(self.ctx.p()).pow(k);
        let r = BigInt::from(self.to_biguint_mod(k));
        if &r * 2 > m {
            r - m
        } else {
            r
        }
    }

    pub fn frobenius(&self) -> PadicElem {
        PadicElem { unit: self.ctx.frobenius_coords(&self.unit, false), ..self.clone() }
    }

    pub fn frobenius_inv(&self) -> PadicElem {
        PadicElem { unit: self.ctx.frobenius_coords(&self.unit, true), ..self.clone() }
    }

    /// Base-p digits of each unit coordinate, `M` digits each; digits beyond
    /// the relative precision are zero.
    pub fn unit_digits(&self) -> Vec<Vec<u32>> {
        let p = self.ctx.p();
        let w = self.ctx.w() as usize;
        let rel = if self.is_zero() { 0 } else { (self.prec - self.val).min(w as i64) as usize };
        let md = self.ctx.md();
        self.unit
            .iter()
            .map(|&c| {
                let mut x = md.to_biguint(c);
                let mut d = vec![0u32; w];
                for slot in d.iter_mut().take(rel) {
                    let (q, r) = x.div_rem(&BigUint::from(p));
                    *slot = r.to_u32().unwrap();
                    x = q;
                }
                d
            })
            .collect()
    }

    pub fn to_json(&self) -> PadicElemJson {
        let exact = self.is_exact_zero();
        PadicElemJson {
            p: self.ctx.p(),
            f: self.ctx.f(),
            m: self.ctx.precision(),
            val: if exact { self.ctx.w() } else { self.val },
            prec: if exact { None } else { Some(self.prec) },
            coeffs: self.unit_digits(),
        }
    }

    pub fn from_json(ctx: &PadicContext, j: &PadicElemJson) -> Result<PadicElem> {
        if j.p != ctx.p() || j.f != ctx.f() || j.m != ctx.precision() {
            return Err(Error::ContextMismatch);
        }
        if j.coeffs.len() != ctx.f() || j.coeffs.iter().any(|c| c.len() != j.m as usize) {
            return Err(Error::InvalidData("coefficient array shape".into()));
        }
        let Some(prec) = j.prec else {
            return Ok(PadicElem::zero(ctx));
        };
        if prec < j.val || prec - j.val > ctx.w() {
            return Err(Error::InvalidData("precision out of range".into()));
        }
        let md = ctx.md();
        let p = BigUint::from(ctx.p());
        let mut unit = Vec::with_capacity(ctx.f());
        for digits in &j.coeffs {
            let mut x = BigUint::zero();
            for &d in digits.iter().rev() {
                if d as u64 >= ctx.p() {
                    return Err(Error::InvalidData(format!("digit {d} out of range")));
                }
                x = x * &p + BigUint::from(d);
            }
            unit.push(md.from_biguint(&x));
        }
        if prec == j.val {
            return Ok(PadicElem::zero_with_prec(ctx, prec));
        }
        if ctx.ops().residue(&unit).iter().all(|&c| c == 0) {
            return Err(Error::InvalidData("unit part is divisible by p".into()));
        }
        Ok(PadicElem { ctx: ctx.clone(), val: j.val, prec, unit })
    }

    /// The element as a rational number when it lies in `Q_p`, using the
    /// balanced representative of the unit part.
    pub fn to_rational_repr(&self) -> Option<BigRational> {
        if !self.is_rational() || self.is_zero() {
            return None;
        }
        let rel = (self.prec - self.val) as u32;
        let md = self.ctx.md();
        let m = BigInt::from(self.ctx.p()).pow(rel);
        let mut u = BigInt::from(md.to_biguint(self.unit[0])) % &m;
        if &u * 2 > m {
            u -= &m;
        }
        let pv = BigInt::from(self.ctx.p()).pow(self.val.unsigned_abs() as u32);
        Some(if self.val >= 0 {
            BigRational::from_integer(u * pv)
        } else {
            BigRational::new(u, pv)
        })
    }
}

/// Serialized form: the unit part as `f` arrays of `M` base-p digits
/// (least significant first), scaled by `p^val`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicElemJson {
    pub p: u64,
    pub f: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub val: i64,
    /// Absolute precision; `null` for the exact zero.
    pub prec: Option<i64>,
    pub coeffs: Vec<Vec<u32>>,
}

impl PartialEq for PadicElem {
    fn eq(&self, other: &PadicElem) -> bool {
        self.ctx.same(&other.ctx) && self.sub_ref(other).is_zero()
    }
}

impl fmt::Debug for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx.p();
        if self.is_exact_zero() {
            return write!(f, "0");
        }
        if self.is_zero() {
            return write!(f, "O({p}^{})", self.prec);
        }
        let rel = (self.prec - self.val) as u32;
        let m = BigUint::from(p).pow(rel);
        let md = self.ctx.md();
        let parts: Vec<String> = self
            .unit
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| {
                let x = md.to_biguint(c) % &m;
                if x.is_zero() {
                    return None;
                }
                Some(match i {
                    0 => x.to_string(),
                    1 => format!("{x}*t"),
                    _ => format!("{x}*t^{i}"),
                })
            })
            .collect();
        let body = if parts.len() == 1 { parts[0].clone() } else { format!("({})", parts.join(" + ")) };
        if self.val == 0 {
            write!(f, "{body} + O({p}^{})", self.prec)
        } else {
            write!(f, "{p}^{} * {body} + O({p}^{})", self.val, self.prec)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl $tr<&PadicElem> for &PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: &PadicElem) -> PadicElem {
                self.$imp(rhs)
            }
        }
        impl $tr<PadicElem> for PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: PadicElem) -> PadicElem {
                (&self).$imp(&rhs)
            }
        }
        impl $tr<&PadicElem> for PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: &PadicElem) -> PadicElem {
                (&self).$imp(rhs)
            }
        }
        impl $tr<PadicElem> for &PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: PadicElem) -> PadicElem {
                self.$imp(&rhs)
            }
        }
    };
}

impl PadicElem {
    fn div_panicking(&self, rhs: &PadicElem) -> PadicElem {
        self.checked_div(rhs).expect("p-adic division by zero")
    }
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);
binop!(Div, div, div_panicking);

impl Neg for PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        self.neg_ref()
    }
}

impl Neg for &PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        self.neg_ref()
    }
}

/// Convenience: `v_p` of a nonzero rational.
pub fn rational_valuation(q: &BigRational, p: u64) -> i64 {
    let pb = BigInt::from(p);
    let v = |mut x: BigInt| {
        let mut v = 0i64;
        x = x.abs();
        while (&x % &pb).is_zero() {
            x /= &pb;
            v += 1;
        }
        v
    };
    v(q.numer().clone()) - v(q.denom().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_context;

    #[test]
    fn coordinates_divisible_by_p_stay_exact() {
        let ctx = make_context(7, 48, 20).unwrap();
        let x = PadicElem::from_coords(&ctx, &[7, 0]);
        assert_eq!(x.val(), 1);
        assert_eq!(x.prec(), 21);
        assert_eq!(x.unit_digits()[0][..3], [1, 0, 0]);
        assert_eq!(x.unit_digits()[0][19], 0);
        let y = PadicElem::from_coords(&ctx, &[49 * 3, -49 * 5]);
        assert_eq!(y, &PadicElem::from_coords(&ctx, &[3, -5]) * &PadicElem::from_i64(&ctx, 49));
    }

    #[test]
    fn normalization_does_not_invent_digits() {
        let ctx = make_context(5, 1, 10).unwrap();
        let md = ctx.md();
        // 25 known mod 5^10 only pins the unit part mod 5^8
        let x = PadicElem::from_raw(&ctx, vec![md.from_i64(25)], 0, INF);
        assert_eq!((x.val(), x.prec()), (2, 10));
    }
}
