//! The residue field `F_q = F_p[x]/(g)` with dense `u64` coefficient vectors.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub(crate) type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    if a.is_empty() {
        a.push(0);
    }
    a
}

fn is_zero_poly(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn mulmod_u64(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod_u64(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod_u64(acc, a, p);
        }
        a = mulmod_u64(a, a, p);
        e >>= 1;
    }
    acc
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(out)
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Poly {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = super::modint::inv_mod_u64(b[db], p);
    let mut r = a.to_vec();
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mulmod_u64(r[dr], lead_inv, p);
        for i in 0..=db {
            let t = mulmod_u64(c, b[i], p);
            r[dr - db + i] = (r[dr - db + i] + p - t) % p;
        }
    }
    trim(r)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !is_zero_poly(&y) {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `F_p[x]/(g)` for a monic irreducible `g` of degree `f`.
#[derive(Clone, Debug)]
pub(crate) struct ResidueField {
    pub p: u64,
    pub f: usize,
    /// Monic modulus, `f + 1` coefficients, lowest degree first.
    pub g: Poly,
}

impl ResidueField {
    /// The lexicographically first monic irreducible polynomial of degree `f`.
    pub fn first_irreducible(p: u64, f: usize) -> ResidueField {
        if f == 1 {
            return ResidueField { p, f, g: vec![0, 1] };
        }
        let mut idx: u128 = 1;
        loop {
            let mut coeffs = vec![0u64; f + 1];
            let mut t = idx;
            for c in coeffs.iter_mut().take(f) {
                *c = (t % p as u128) as u64;
                t /= p as u128;
            }
            coeffs[f] = 1;
            if coeffs[0] != 0 && is_irreducible(&coeffs, p) {
                return ResidueField { p, f, g: coeffs };
            }
            idx += 1;
        }
    }

    pub fn zero(&self) -> Poly {
        vec![0; self.f]
    }

    pub fn one(&self) -> Poly {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn reduce(&self, a: &[u64]) -> Poly {
        let r = poly_rem(a, &self.g, self.p);
        let mut out = self.zero();
        for (i, c) in r.into_iter().enumerate().take(self.f) {
            out[i] = c;
        }
        out
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Poly {
        let p = self.p;
        let mut prod = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mulmod_u64(x, y, p)) % p;
            }
        }
        self.reduce(&prod)
    }

    pub fn pow(&self, a: &[u64], e: &BigUint) -> Poly {
        let mut acc = self.one();
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        is_zero_poly(a)
    }

    pub fn is_one(&self, a: &[u64]) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    /// Inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: &[u64]) -> Option<Poly> {
        if self.is_zero(a) {
            return None;
        }
        let p = self.p;
        let (mut r0, mut r1) = (trim(self.g.clone()), trim(a.to_vec()));
        let (mut t0, mut t1): (Poly, Poly) = (vec![0], vec![1]);
        while !is_zero_poly(&r1) {
            let (q, r) = poly_divmod(&r0, &r1, p);
            let qt = poly_mul_plain(&q, &t1, p);
            let t2 = poly_sub(&t0, &qt, p);
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t2;
        }
        // r0 is a nonzero constant
        let c = super::modint::inv_mod_u64(r0[0], p);
        let t: Poly = t0.iter().map(|&x| mulmod_u64(x, c, p)).collect();
        Some(self.reduce(&t))
    }

    pub fn order_q(&self) -> BigUint {
        BigUint::from(self.p).pow(self.f as u32)
    }

    /// Elements of `F_q^*` enumerated in a fixed order (by base-p index).
    pub fn nth_element(&self, idx: u128) -> Poly {
        let mut v = self.zero();
        let mut t = idx;
        for c in v.iter_mut() {
            *c = (t % self.p as u128) as u64;
            t /= self.p as u128;
        }
        v
    }

    /// A primitive `n`-th root of unity; requires `n | q - 1`.
    pub fn primitive_root_of_unity(&self, n: u64) -> Option<Poly> {
        let qm1 = self.order_q() - 1u32;
        if !(&qm1 % n).is_zero() {
            return None;
        }
        let cof = &qm1 / n;
        let primes = prime_factors(n);
        let mut idx: u128 = 1;
        loop {
            let y = self.nth_element(idx);
            idx += 1;
            if self.is_zero(&y) {
                continue;
            }
            let z = self.pow(&y, &cof);
            let ok = primes
                .iter()
                .all(|&r| !self.is_one(&self.pow(&z, &BigUint::from(n / r))));
            if ok {
                return Some(z);
            }
        }
    }

    /// Square root, when one exists in `F_q` (Tonelli-Shanks).
    pub fn sqrt(&self, a: &[u64]) -> Option<Poly> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        let q = self.order_q();
        let qm1 = &q - 1u32;
        let half = &qm1 >> 1;
        if !self.is_one(&self.pow(a, &half)) {
            return None;
        }
        let mut s = 0u64;
        let mut t = qm1.clone();
        while (&t % 2u32).is_zero() {
            t >>= 1;
            s += 1;
        }
        // non-residue
        let mut idx: u128 = 1;
        let z = loop {
            let c = self.nth_element(idx);
            idx += 1;
            if !self.is_zero(&c) && !self.is_one(&self.pow(&c, &half)) {
                break c;
            }
        };
        let mut m = s;
        let mut c = self.pow(&z, &t);
        let mut tt = self.pow(a, &t);
        let mut r = self.pow(a, &((&t + BigUint::one()) >> 1));
        while !self.is_one(&tt) {
            let mut i = 0;
            let mut t2 = tt.clone();
            while !self.is_one(&t2) {
                t2 = self.mul(&t2, &t2);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.mul(&b, &b);
            }
            m = i;
            c = self.mul(&b, &b);
            tt = self.mul(&tt, &c);
            r = self.mul(&r, &b);
        }
        Some(r)
    }
}

fn poly_mul_plain(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mulmod_u64(x, y, p)) % p;
        }
    }
    trim(prod)
}

fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = super::modint::inv_mod_u64(b[db], p);
    let mut r = a.to_vec();
    let mut q = vec![0u64; a.len().max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mulmod_u64(r[dr], lead_inv, p);
        q[dr - db] = c;
        for i in 0..=db {
            let t = mulmod_u64(c, b[i], p);
            r[dr - db + i] = (r[dr - db + i] + p - t) % p;
        }
    }
    (trim(q), trim(r))
}

/// `x^{p^k} mod g` by repeated p-th powering.
fn x_pow_p_iter(g: &[u64], p: u64, k: usize) -> Poly {
    let f = g.len() - 1;
    let field = ResidueField { p, f, g: g.to_vec() };
    let mut x = field.zero();
    if f > 1 {
        x[1] = 1;
    } else {
        x = field.reduce(&[0, 1]);
    }
    let pe = BigUint::from(p);
    for _ in 0..k {
        x = field.pow(&x, &pe);
    }
    x
}

/// Rabin's irreducibility test.
pub(crate) fn is_irreducible(g: &[u64], p: u64) -> bool {
    let f = g.len() - 1;
    if f == 1 {
        return true;
    }
    let mut xpoly = vec![0u64; f];
    xpoly[1] = 1;
    if x_pow_p_iter(g, p, f) != xpoly {
        return false;
    }
    for r in prime_factors(f as u64) {
        let h = x_pow_p_iter(g, p, f / r as usize);
        let diff = poly_sub(&h, &[0, 1], p);
        let d = poly_gcd(g, &diff, p);
        if degree(&d) != Some(0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility() {
        // x^2 + 1 is irreducible mod 3 and reducible mod 5
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        let f = ResidueField::first_irreducible(5, 2);
        assert_eq!(f.g.len(), 3);
        assert!(is_irreducible(&f.g, 5));
    }

    #[test]
    fn roots_of_unity_and_inverse() {
        let f = ResidueField::first_irreducible(5, 2);
        let z = f.primitive_root_of_unity(3).unwrap();
        assert!(f.is_one(&f.pow(&z, &BigUint::from(3u32))));
        assert!(!f.is_one(&z));
        let zi = f.inv(&z).unwrap();
        assert!(f.is_one(&f.mul(&z, &zi)));
    }

    #[test]
    fn square_roots() {
        let f = ResidueField::first_irreducible(7, 3);
        for idx in 1..60u128 {
            let a = f.nth_element(idx);
            let sq = f.mul(&a, &a);
            let r = f.sqrt(&sq).unwrap();
            assert_eq!(f.mul(&r, &r), sq);
        }
    }
}
