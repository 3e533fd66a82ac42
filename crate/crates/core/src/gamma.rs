//! Morita's p-adic Gamma function.
//!
//! `Γ_p(x0 + p t)` is evaluated through its Mahler expansion in `t`, whose
//! coefficients come from exact finite differences of the integer values
//! `Γ_p(x0), Γ_p(x0 + p), ...`.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{PadicContext, PadicElem};

fn vp_big(x: &BigUint, p: &BigUint) -> u64 {
    if x.is_zero() {
        return u64::MAX;
    }
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

/// Mahler coefficients of `t ↦ Γ_p(x0 + p t)` modulo `p^w`.
fn mahler_coeffs(p: u64, x0: u64, w: u32) -> Vec<BigUint> {
    let pb = BigUint::from(p);
    let modulus = pb.pow(w);
    let mut d = (w as usize + 8).max(16);
    if p == 3 {
        d *= 2;
    }
    let window = (p as usize).max(6);
    loop {
        // integer values Γ_p(n) for n up to x0 + p d
        let top = x0 + p * d as u64;
        let mut vals = Vec::with_capacity(d + 1);
        let mut g = BigInt::from(-1); // Γ_p(1)
        let m = BigInt::from(modulus.clone());
        if x0 == 1 {
            vals.push(g.clone());
        }
        for n in 1..top {
            g = if n % p == 0 { -g } else { -(g * BigInt::from(n)) };
            g = g.mod_floor(&m);
            let k = n + 1;
            if k >= x0 && (k - x0).is_multiple_of(p) {
                vals.push(g.clone());
            }
        }
        let mut diffs: Vec<BigInt> = vals;
        let mut coeffs = Vec::with_capacity(d + 1);
        while !diffs.is_empty() {
            coeffs.push(diffs[0].mod_floor(&m).to_biguint().unwrap());
            diffs = diffs.windows(2).map(|w| (&w[1] - &w[0]).mod_floor(&m)).collect();
        }
        let tail_ok = coeffs
            .iter()
            .rev()
            .take(window)
            .all(|c| c.is_zero() || vp_big(c, &pb) >= w as u64);
        if tail_ok {
            return coeffs;
        }
        d *= 2;
    }
}

/// Morita's `Γ_p` on `Z_p`. The argument must be integral and lie in `Q_p`.
pub fn gamma_p(x: &PadicElem) -> Result<PadicElem> {
    GammaTable::new(x.ctx()).eval(x)
}

/// Cache of Mahler data per residue class and of values at rational points.
pub struct GammaTable {
    ctx: PadicContext,
    coeffs: RwLock<HashMap<u64, std::sync::Arc<Vec<BigUint>>>>,
    values: RwLock<HashMap<(i64, u64), PadicElem>>,
}

impl GammaTable {
    pub fn new(ctx: &PadicContext) -> GammaTable {
        GammaTable {
            ctx: ctx.base(),
            coeffs: RwLock::new(HashMap::new()),
            values: RwLock::new(HashMap::new()),
        }
    }

    pub fn ctx(&self) -> &PadicContext {
        &self.ctx
    }

    fn coeffs_for(&self, x0: u64) -> std::sync::Arc<Vec<BigUint>> {
        if let Some(c) = self.coeffs.read().unwrap().get(&x0) {
            return c.clone();
        }
        let c = std::sync::Arc::new(mahler_coeffs(self.ctx.p(), x0, self.ctx.precision()));
        self.coeffs.write().unwrap().entry(x0).or_insert(c).clone()
    }

    /// `Γ_p(x)` for `x` in `Z_p` (context of this table or its extension).
    pub fn eval(&self, x: &PadicElem) -> Result<PadicElem> {
        let x = x.to_base()?;
        if !x.is_zero() && x.val() < 0 {
            return Err(Error::Domain("Γ_p needs an argument in Z_p".into()));
        }
        let p = self.ctx.p();
        let w = self.ctx.precision();
        let out_prec = x.prec().min(w as i64);
        let pb = BigUint::from(p);
        let modulus = pb.pow(w);
        let xr = if x.is_zero() { BigUint::zero() } else { x.to_biguint_mod(w) };
        let mut x0 = (&xr % p).to_u64().unwrap();
        if x0 == 0 {
            x0 = p;
        }
        let t = ((&xr + &modulus - BigUint::from(x0)) % &modulus) / &pb;
        let coeffs = self.coeffs_for(x0);
        let mut acc = BigUint::zero();
        let mut binom = BigUint::one();
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                let kk = BigUint::from(k as u64);
                if t < kk {
                    break;
                }
                binom = binom * (&t - &kk + 1u32) / kk;
            }
            acc = (acc + c * (&binom % &modulus)) % &modulus;
        }
        let g = PadicElem::from_bigint(&self.ctx, &BigInt::from(acc));
        Ok(g.with_prec(out_prec))
    }

    /// `Γ_p(a/d)` with `p ∤ d`, memoized.
    pub fn eval_rational(&self, a: i64, d: u64) -> Result<PadicElem> {
        if d.is_multiple_of(self.ctx.p()) {
            return Err(Error::Domain("denominator divisible by p".into()));
        }
        let g = num_integer::gcd(a.unsigned_abs(), d).max(1);
        let key = (a / g as i64, d / g);
        if let Some(v) = self.values.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let x = PadicElem::from_ratio(&self.ctx, key.0, key.1 as i64);
        let v = self.eval(&x)?;
        self.values.write().unwrap().entry(key).or_insert(v.clone());
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.values.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_context;

    #[test]
    fn integer_values() {
        for p in [3u64, 5, 7, 11] {
            let ctx = make_context(p, 1, 12).unwrap();
            let g = gamma_p(&PadicElem::one(&ctx)).unwrap();
            assert_eq!(g, PadicElem::from_i64(&ctx, -1));
        }
        let ctx = make_context(5, 1, 12).unwrap();
        assert_eq!(gamma_p(&PadicElem::from_i64(&ctx, 3)).unwrap(), PadicElem::from_i64(&ctx, -2));
        // Γ_5(7) = (-1)^7 · 1·2·3·4·6
        assert_eq!(gamma_p(&PadicElem::from_i64(&ctx, 7)).unwrap(), PadicElem::from_i64(&ctx, -144));
    }

    #[test]
    fn functional_equation_at_small_points() {
        let ctx = make_context(7, 1, 15).unwrap();
        let g = |n: i64| gamma_p(&PadicElem::from_i64(&ctx, n)).unwrap();
        assert_eq!(g(3), &g(2) * &PadicElem::from_i64(&ctx, -2));
        assert_eq!(g(8), -g(7));
    }
}
