//! Montgomery arithmetic modulo `p^W` on at most four 64-bit limbs.
//!
//! Residues are kept in Montgomery form. Multiplying by the unit `R` does not
//! change the p-adic valuation, so valuations and exact divisions by `p` can
//! be read off the Montgomery representative directly.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

pub(crate) const LIMBS: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Res(pub(crate) [u64; LIMBS]);

impl Res {
    pub const ZERO: Res = Res([0; LIMBS]);

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0 == [0; LIMBS]
    }
}

#[inline(always)]
fn mac(acc: u64, a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = (acc as u128) + (a as u128) * (b as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub((b as u128) + (borrow as u128));
    (t as u64, ((t >> 64) as u64) & 1)
}

/// The ring `Z / p^digits`.
#[derive(Clone, Debug)]
pub struct Modulus {
    m: [u64; LIMBS],
    n: usize,
    m_inv: u64,
    r2: [u64; LIMBS],
    one: Res,
    p: u64,
    digits: u32,
    /// `R^{-1} mod p`, used to read residues mod p out of Montgomery form.
    r_inv_mod_p: u64,
    big: BigUint,
}

impl Modulus {
    /// Largest supported modulus in bits.
    pub const MAX_BITS: u64 = 64 * LIMBS as u64 - 1;

    pub fn new(p: u64, digits: u32) -> Option<Modulus> {
        let big = BigUint::from(p).pow(digits);
        let bits = big.bits();
        if bits > Self::MAX_BITS || digits == 0 {
            return None;
        }
        let n = bits.div_ceil(64).max(1) as usize;
        let m = to_limbs(&big);
        let mut inv: u64 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m[0].wrapping_mul(inv)));
        }
        let m_inv = inv.wrapping_neg();
        let r = BigUint::one() << (64 * n);
        let r2 = to_limbs(&((&r * &r) % &big));
        let one = Res(to_limbs(&(&r % &big)));
        let r_mod_p = (&r % BigUint::from(p)).to_u64().unwrap();
        let r_inv_mod_p = inv_mod_u64(r_mod_p, p);
        Some(Modulus { m, n, m_inv, r2, one, p, digits, r_inv_mod_p, big })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn modulus(&self) -> &BigUint {
        &self.big
    }

    #[inline]
    pub fn one(&self) -> Res {
        self.one
    }

    #[inline]
    fn geq_m(&self, a: &[u64; LIMBS]) -> bool {
        for i in (0..self.n).rev() {
            if a[i] != self.m[i] {
                return a[i] > self.m[i];
            }
        }
        true
    }

    #[inline]
    fn sub_m(&self, a: &mut [u64; LIMBS]) {
        let mut borrow = 0;
        for i in 0..self.n {
            let (d, b) = sbb(a[i], self.m[i], borrow);
            a[i] = d;
            borrow = b;
        }
    }

    #[inline]
    pub fn add(&self, a: Res, b: Res) -> Res {
        let mut r = [0u64; LIMBS];
        let mut carry = 0;
        for i in 0..self.n {
            let (s, c) = adc(a.0[i], b.0[i], carry);
            r[i] = s;
            carry = c;
        }
        if carry != 0 || self.geq_m(&r) {
            self.sub_m(&mut r);
        }
        Res(r)
    }

    #[inline]
    pub fn sub(&self, a: Res, b: Res) -> Res {
        let mut r = [0u64; LIMBS];
        let mut borrow = 0;
        for i in 0..self.n {
            let (d, bb) = sbb(a.0[i], b.0[i], borrow);
            r[i] = d;
            borrow = bb;
        }
        if borrow != 0 {
            let mut carry = 0;
            for i in 0..self.n {
                let (s, c) = adc(r[i], self.m[i], carry);
                r[i] = s;
                carry = c;
            }
        }
        Res(r)
    }

    #[inline]
    pub fn neg(&self, a: Res) -> Res {
        self.sub(Res::ZERO, a)
    }

    /// Montgomery product `a * b * R^{-1}`.
    #[inline]
    pub fn mul(&self, a: Res, b: Res) -> Res {
        let n = self.n;
        let mut t = [0u64; LIMBS + 2];
        for i in 0..n {
            let mut carry = 0;
            for j in 0..n {
                let (lo, hi) = mac(t[j], a.0[i], b.0[j], carry);
                t[j] = lo;
                carry = hi;
            }
            let (s, c) = adc(t[n], carry, 0);
            t[n] = s;
            t[n + 1] = c;

            let u = t[0].wrapping_mul(self.m_inv);
            let (_, mut carry) = mac(t[0], u, self.m[0], 0);
            for j in 1..n {
                let (lo, hi) = mac(t[j], u, self.m[j], carry);
                t[j - 1] = lo;
                carry = hi;
            }
            let (s, c) = adc(t[n], carry, 0);
            t[n - 1] = s;
            t[n] = t[n + 1] + c;
        }
        let mut r = [0u64; LIMBS];
        r[..n].copy_from_slice(&t[..n]);
        if t[n] != 0 || self.geq_m(&r) {
            self.sub_m(&mut r);
        }
        Res(r)
    }

    pub fn from_u64(&self, x: u64) -> Res {
        let mut plain = [0u64; LIMBS];
        plain[0] = x;
        if self.n == 1 {
            plain[0] = x % self.m[0];
        }
        self.mul(Res(plain), Res(self.r2))
    }

    pub fn from_i64(&self, x: i64) -> Res {
        let r = self.from_u64(x.unsigned_abs());
        if x < 0 {
            self.neg(r)
        } else {
            r
        }
    }

    pub fn from_biguint(&self, x: &BigUint) -> Res {
        let reduced = x % &self.big;
        self.mul(Res(to_limbs(&reduced)), Res(self.r2))
    }

    /// Canonical representative in `[0, p^digits)`.
    pub fn to_biguint(&self, a: Res) -> BigUint {
        let mut plain = [0u64; LIMBS];
        plain[0] = 1;
        let r = self.mul(a, Res(plain));
        from_limbs(&r.0[..self.n])
    }

    /// Integer value of the stored limbs mod a small number.
    #[inline]
    fn limbs_mod(&self, a: &Res, d: u64) -> u64 {
        let mut r: u128 = 0;
        for i in (0..self.n).rev() {
            r = ((r << 64) | a.0[i] as u128) % d as u128;
        }
        r as u64
    }

    /// The residue mod `p` of the represented value.
    #[inline]
    pub fn mod_p(&self, a: Res) -> u64 {
        let raw = self.limbs_mod(&a, self.p);
        ((raw as u128 * self.r_inv_mod_p as u128) % self.p as u128) as u64
    }

    /// p-adic valuation, capped at `digits`.
    pub fn valuation(&self, a: Res) -> u32 {
        if a.is_zero() {
            return self.digits;
        }
        let mut v = 0;
        let mut x = a;
        while v < self.digits && self.limbs_mod(&x, self.p) == 0 {
            x = self.div_p_exact(x);
            v += 1;
        }
        v
    }

    /// Exact integer division of the representative by `p`.
    #[inline]
    pub fn div_p_exact(&self, a: Res) -> Res {
        let mut r = [0u64; LIMBS];
        let mut rem: u128 = 0;
        for i in (0..self.n).rev() {
            let cur = (rem << 64) | a.0[i] as u128;
            r[i] = (cur / self.p as u128) as u64;
            rem = cur % self.p as u128;
        }
        debug_assert_eq!(rem, 0);
        Res(r)
    }

    pub fn div_p_pow(&self, a: Res, k: u32) -> Res {
        let mut x = a;
        for _ in 0..k {
            x = self.div_p_exact(x);
        }
        x
    }

    pub fn pow_u64(&self, a: Res, mut e: u64) -> Res {
        let mut base = a;
        let mut acc = self.one;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit by Newton iteration from the inverse mod p.
    pub fn inv_unit(&self, a: Res) -> Res {
        let a0 = self.mod_p(a);
        debug_assert!(a0 != 0, "inverse of non-unit");
        let mut y = self.from_u64(inv_mod_u64(a0, self.p));
        let two = self.from_u64(2);
        let mut correct = 1u32;
        while correct < self.digits {
            let ay = self.mul(a, y);
            y = self.mul(y, self.sub(two, ay));
            correct *= 2;
        }
        y
    }
}

fn to_limbs(x: &BigUint) -> [u64; LIMBS] {
    let mut out = [0u64; LIMBS];
    for (i, d) in x.to_u64_digits().into_iter().enumerate().take(LIMBS) {
        out[i] = d;
    }
    out
}

fn from_limbs(l: &[u64]) -> BigUint {
    let mut x = BigUint::zero();
    for &d in l.iter().rev() {
        x = (x << 64) + BigUint::from(d);
    }
    x
}

pub(crate) fn inv_mod_u64(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "not invertible");
    if t < 0 {
        t += m as i128;
    }
    t as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_products() {
        for &(p, d) in &[(3u64, 5u32), (7, 20), (13, 30), (47, 26), (97, 38)] {
            let md = Modulus::new(p, d).unwrap();
            let big = md.modulus().clone();
            let a = BigUint::from(123456789u64) * BigUint::from(987654321u64) + 17u32;
            let b = BigUint::from(p).pow(d / 2) + 5u32;
            let ra = md.from_biguint(&a);
            let rb = md.from_biguint(&b);
            assert_eq!(md.to_biguint(md.mul(ra, rb)), (&a * &b) % &big);
            assert_eq!(md.to_biguint(md.add(ra, rb)), (&a + &b) % &big);
            assert_eq!(md.to_biguint(md.sub(rb, ra)), ((&b + &big) - (&a % &big)) % &big);
            assert_eq!(md.mod_p(ra), (&a % p).to_u64().unwrap());
        }
    }

    #[test]
    fn valuation_in_montgomery_form() {
        let md = Modulus::new(5, 10).unwrap();
        let x = md.from_u64(250);
        assert_eq!(md.valuation(x), 3);
        assert_eq!(md.to_biguint(md.div_p_pow(x, 3)) % 25u32, BigUint::from(2u32));
        assert_eq!(md.valuation(Res::ZERO), 10);
    }

    #[test]
    fn unit_inverse() {
        let md = Modulus::new(11, 25).unwrap();
        let x = md.from_u64(1234567);
        let y = md.inv_unit(x);
        assert_eq!(md.mul(x, y), md.one());
    }

    #[test]
    fn rejects_oversized_modulus() {
        assert!(Modulus::new(97, 60).is_none());
    }
}
