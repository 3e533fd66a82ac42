use std::ops::{Add, Mul, Neg, Sub};

use super::analytic::{iwasawa_log, padic_exp};
use super::{PadicContext, PadicElem};
use crate::error::Result;

/// A dual number `value + deriv·ε` with `ε² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: PadicElem,
    pub deriv: PadicElem,
}

impl Jet {
    pub fn new(value: PadicElem, deriv: PadicElem) -> Jet {
        Jet { value, deriv }
    }

    pub fn constant(value: PadicElem) -> Jet {
        let z = PadicElem::zero(value.ctx());
        Jet { value, deriv: z }
    }

    /// `s0 + ε`.
    pub fn variable(s0: PadicElem) -> Jet {
        let one = PadicElem::one(s0.ctx());
        Jet { value: s0, deriv: one }
    }

    pub fn from_i64(ctx: &PadicContext, n: i64) -> Jet {
        Jet::constant(PadicElem::from_i64(ctx, n))
    }

    pub fn ctx(&self) -> &PadicContext {
        self.value.ctx()
    }

    pub fn scale(&self, c: &PadicElem) -> Jet {
        Jet { value: &self.value * c, deriv: &self.deriv * c }
    }

    pub fn inv(&self) -> Result<Jet> {
        let iv = self.value.inv()?;
        let d = -(&(&self.deriv * &iv) * &iv);
        Ok(Jet { value: iv, deriv: d })
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.inv()?)
    }

    pub fn exp(&self) -> Result<Jet> {
        let e = padic_exp(&self.value)?;
        let d = &e * &self.deriv;
        Ok(Jet { value: e, deriv: d })
    }

    pub fn log(&self) -> Result<Jet> {
        let l = iwasawa_log(&self.value)?;
        let d = self.deriv.checked_div(&self.value)?;
        Ok(Jet { value: l, deriv: d })
    }

    /// `exp(s · log_a)` where `log_a` has positive valuation; with
    /// `log_a = log_p⟨a⟩` this is `⟨a⟩^s`.
    pub fn exp_scaled(log_a: &PadicElem, s: &Jet) -> Result<Jet> {
        let e = padic_exp(&(&s.value * log_a))?;
        let d = &(&e * log_a) * &s.deriv;
        Ok(Jet { value: e, deriv: d })
    }

    pub fn with_prec(&self, prec: i64) -> Jet {
        Jet { value: self.value.with_prec(prec), deriv: self.deriv.with_prec(prec) }
    }
}

/// Evaluates `family` at `s0 + ε`, returning the value and the exact
/// derivative at `s0`.
pub fn jet_eval<F>(family: F, s0: &PadicElem) -> Result<Jet>
where
    F: Fn(&Jet) -> Result<Jet>,
{
    family(&Jet::variable(s0.clone()))
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet { value: &self.value + &o.value, deriv: &self.deriv + &o.deriv }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet { value: &self.value - &o.value, deriv: &self.deriv - &o.deriv }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let value = &self.value * &o.value;
        let deriv = &(&self.value * &o.deriv) + &(&self.deriv * &o.value);
        Jet { value, deriv }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { value: -&self.value, deriv: -&self.deriv }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        &self + &o
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        &self - &o
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{angle_bracket, make_context};
    use num_bigint::BigUint;

    #[test]
    fn angle_power_derivative() {
        let ctx = make_context(5, 1, 20).unwrap();
        let la = iwasawa_log(&angle_bracket(&PadicElem::from_i64(&ctx, 6)).unwrap()).unwrap();
        let j = jet_eval(|s| Jet::exp_scaled(&la, s), &PadicElem::zero(&ctx)).unwrap();
        assert_eq!(j.value, PadicElem::one(&ctx));
        assert_eq!(j.deriv.to_biguint_mod(4), BigUint::from(555u32));
    }

    #[test]
    fn constant_and_cancellation() {
        let ctx = make_context(7, 1, 20).unwrap();
        let c = jet_eval(|_| Ok(Jet::from_i64(&ctx, 3)), &PadicElem::zero(&ctx)).unwrap();
        assert!(c.deriv.is_zero());
        let la = iwasawa_log(&PadicElem::from_i64(&ctx, 8)).unwrap();
        let j = jet_eval(
            |s| {
                let a = Jet::exp_scaled(&la, s)?;
                let b = Jet::exp_scaled(&la, &-s)?;
                Ok(&a * &b)
            },
            &PadicElem::from_i64(&ctx, 3),
        )
        .unwrap();
        assert_eq!(j.value, PadicElem::one(&ctx));
        assert!(j.deriv.is_zero());
    }

    #[test]
    fn polynomial_derivative() {
        let ctx = make_context(11, 1, 20).unwrap();
        // f(s) = 3s^3 - 2s + 5 ; f'(s) = 9s^2 - 2
        let s0 = PadicElem::from_i64(&ctx, 4);
        let j = jet_eval(
            |s| {
                let s2 = s * s;
                let s3 = &s2 * s;
                Ok(&(&s3.scale(&PadicElem::from_i64(&ctx, 3)) - &s.scale(&PadicElem::from_i64(&ctx, 2)))
                    + &Jet::from_i64(&ctx, 5))
            },
            &s0,
        )
        .unwrap();
        assert_eq!(j.value, PadicElem::from_i64(&ctx, 3 * 64 - 8 + 5));
        assert_eq!(j.deriv, PadicElem::from_i64(&ctx, 9 * 16 - 2));
    }
}
