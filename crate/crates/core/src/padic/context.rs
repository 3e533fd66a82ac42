use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::field::{Poly, ResidueField};
use super::modint::{Modulus, Res};
use super::PadicElem;
use crate::arith;
use crate::error::{Error, Result};

/// Sentinel for "known exactly".
pub(crate) const INF: i64 = i64::MAX / 4;

/// The ring `Z_q = Z_p[θ]/(g)` containing the `N`-th roots of unity, at
/// working precision `M`.
///
/// Cheap to clone: all data sits behind an `Arc`.
#[derive(Clone)]
pub struct PadicContext(Arc<Inner>);

struct Inner {
    p: u64,
    n: u64,
    f: usize,
    m: u32,
    md: Modulus,
    field: ResidueField,
    g: Vec<Res>,
    zeta: Vec<Res>,
    frob: Vec<Vec<Res>>,
    frob_inv: Vec<Vec<Res>>,
    p_pows: Vec<Res>,
    teich: Vec<Res>,
    base: Option<PadicContext>,
}

impl fmt::Debug for PadicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PadicContext")
            .field("p", &self.0.p)
            .field("N", &self.0.n)
            .field("f", &self.0.f)
            .field("M", &self.0.m)
            .field("defining_poly", &self.0.field.g)
            .finish()
    }
}

/// Builds `Z_q` for the odd prime `p`, containing `μ_N`, at precision `M`.
pub fn make_context(p: u64, n: u64, m: u32) -> Result<PadicContext> {
    if p < 3 || !arith::is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    if n == 0 {
        return Err(Error::BadModulus);
    }
    if n.is_multiple_of(p) {
        return Err(Error::PDividesN { p, n });
    }
    if m < 2 {
        return Err(Error::PrecisionTooSmall(m));
    }
    let md = Modulus::new(p, m).ok_or(Error::PrecisionTooLarge { p, m })?;
    let f = arith::multiplicative_order(p % n, n) as usize;
    let base = if f == 1 { None } else { Some(make_context(p, p - 1, m)?) };
    let field = ResidueField::first_irreducible(p, f);
    let g: Vec<Res> = field.g[..f].iter().map(|&c| md.from_u64(c)).collect();
    let mut p_pows = Vec::with_capacity(m as usize + 1);
    let mut acc = md.one();
    let pr = md.from_u64(p);
    for _ in 0..=m {
        p_pows.push(acc);
        acc = md.mul(acc, pr);
    }
    let mut inner = Inner {
        p,
        n,
        f,
        m,
        md,
        field,
        g,
        zeta: Vec::new(),
        frob: Vec::new(),
        frob_inv: Vec::new(),
        p_pows,
        teich: Vec::new(),
        base,
    };
    inner.teich = teich_table(&inner.md, p);
    let (frob, frob_inv) = frobenius_matrices(&inner);
    inner.frob = frob;
    inner.frob_inv = frob_inv;
    let zres = if n == 1 {
        inner.field.one()
    } else {
        inner
            .field
            .primitive_root_of_unity(n)
            .expect("N divides q - 1 by construction")
    };
    let ops = QOps { md: &inner.md, g: &inner.g, f, field: &inner.field };
    let zeta = lift_root_of_unity(&ops, &ops.lift(&zres), n);
    inner.zeta = zeta;
    Ok(PadicContext(Arc::new(inner)))
}

/// Hensel-lifts a residue root of unity of order `n`.
fn lift_root_of_unity(ops: &QOps<'_>, seed: &[Res], n: u64) -> Vec<Res> {
    let md = ops.md;
    let inv_n = md.inv_unit(md.from_u64(n));
    let mut y = seed.to_vec();
    loop {
        let mut h = ops.pow(&y, n);
        h[0] = md.sub(h[0], md.one());
        if ops.is_zero(&h) {
            break;
        }
        let corr: Vec<Res> = ops.mul(&y, &h).into_iter().map(|c| md.mul(c, inv_n)).collect();
        y = ops.sub(&y, &corr);
    }
    y
}

fn teich_table(md: &Modulus, p: u64) -> Vec<Res> {
    let mut out = vec![Res::ZERO; p as usize];
    let inv_pm1 = md.inv_unit(md.from_u64(p - 1));
    for a in 1..p {
        let mut y = md.from_u64(a);
        loop {
            let h = md.sub(md.pow_u64(y, p - 1), md.one());
            if h.is_zero() {
                break;
            }
            y = md.sub(y, md.mul(md.mul(y, h), inv_pm1));
        }
        out[a as usize] = y;
    }
    out
}

fn frobenius_matrices(inner: &Inner) -> (Vec<Vec<Res>>, Vec<Vec<Res>>) {
    let f = inner.f;
    let md = &inner.md;
    if f == 1 {
        return (vec![vec![md.one()]], vec![vec![md.one()]]);
    }
    // Borrow the arithmetic through a temporary context-free helper.
    let ops = QOps { md, g: &inner.g, f, field: &inner.field };
    let mut theta = vec![Res::ZERO; f];
    theta[1] = md.one();
    // σ(θ): the root of g congruent to θ^p.
    let mut y = ops.pow(&theta, inner.p);
    let gpoly: Vec<Res> = {
        let mut v = inner.g.clone();
        v.push(md.one());
        v
    };
    let dpoly: Vec<Res> = (1..gpoly.len())
        .map(|i| md.mul(gpoly[i], md.from_u64(i as u64)))
        .collect();
    loop {
        let gy = ops.eval_poly(&gpoly, &y);
        if gy.iter().all(|c| c.is_zero()) {
            break;
        }
        let dy = ops.eval_poly(&dpoly, &y);
        let inv = ops.inv_unit(&dy).expect("g is separable mod p");
        let corr = ops.mul(&gy, &inv);
        y = ops.sub(&y, &corr);
    }
    let powers = |x: &Vec<Res>| -> Vec<Vec<Res>> {
        let mut out = Vec::with_capacity(f);
        let mut acc = vec![Res::ZERO; f];
        acc[0] = md.one();
        for _ in 0..f {
            out.push(acc.clone());
            acc = ops.mul(&acc, x);
        }
        out
    };
    let frob = powers(&y);
    // σ^{-1} = σ^{f-1}
    let mut z = theta.clone();
    for _ in 0..f - 1 {
        z = apply_matrix(md, &frob, &z);
    }
    let frob_inv = powers(&z);
    (frob, frob_inv)
}

fn apply_matrix(md: &Modulus, mat: &[Vec<Res>], a: &[Res]) -> Vec<Res> {
    let f = a.len();
    let mut out = vec![Res::ZERO; f];
    for (i, &ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (o, &c) in out.iter_mut().zip(mat[i].iter()) {
            *o = md.add(*o, md.mul(ai, c));
        }
    }
    out
}

/// Arithmetic on coordinate vectors, shared by context construction and
/// element operations.
pub(crate) struct QOps<'a> {
    pub md: &'a Modulus,
    pub g: &'a [Res],
    pub f: usize,
    pub field: &'a ResidueField,
}

impl QOps<'_> {
    pub fn add(&self, a: &[Res], b: &[Res]) -> Vec<Res> {
        a.iter().zip(b).map(|(&x, &y)| self.md.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[Res], b: &[Res]) -> Vec<Res> {
        a.iter().zip(b).map(|(&x, &y)| self.md.sub(x, y)).collect()
    }

    pub fn mul(&self, a: &[Res], b: &[Res]) -> Vec<Res> {
        let md = self.md;
        let f = self.f;
        if f == 1 {
            return vec![md.mul(a[0], b[0])];
        }
        let mut t = vec![Res::ZERO; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                t[i + j] = md.add(t[i + j], md.mul(x, y));
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = t[k];
            if c.is_zero() {
                continue;
            }
            for j in 0..f {
                t[k - f + j] = md.sub(t[k - f + j], md.mul(c, self.g[j]));
            }
        }
        t.truncate(f);
        t
    }

    pub fn pow(&self, a: &[Res], mut e: u64) -> Vec<Res> {
        let mut acc = vec![Res::ZERO; self.f];
        acc[0] = self.md.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn residue(&self, a: &[Res]) -> Poly {
        a.iter().map(|&x| self.md.mod_p(x)).collect()
    }

    pub fn lift(&self, a: &[u64]) -> Vec<Res> {
        a.iter().map(|&x| self.md.from_u64(x)).collect()
    }

    /// Inverse of a unit of `Z_q`; `None` when the residue vanishes.
    pub fn inv_unit(&self, a: &[Res]) -> Option<Vec<Res>> {
        let r = self.field.inv(&self.residue(a))?;
        let mut y = self.lift(&r);
        let mut two = vec![Res::ZERO; self.f];
        two[0] = self.md.from_u64(2);
        let mut correct = 1;
        while correct < self.md.digits() {
            let ay = self.mul(a, &y);
            y = self.mul(&y, &self.sub(&two, &ay));
            correct *= 2;
        }
        Some(y)
    }

    /// Horner evaluation of a polynomial with `Z_p` coefficients.
    pub fn eval_poly(&self, coeffs: &[Res], x: &[Res]) -> Vec<Res> {
        let mut acc = vec![Res::ZERO; self.f];
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc[0] = self.md.add(acc[0], c);
        }
        acc
    }

    pub fn is_zero(&self, a: &[Res]) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    /// Minimum valuation of the coordinates, capped at `W`.
    pub fn val(&self, a: &[Res]) -> u32 {
        a.iter()
            .map(|&c| self.md.valuation(c))
            .min()
            .unwrap_or(self.md.digits())
    }
}

impl PadicContext {
    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// The order of the distinguished root of unity.
    pub fn n(&self) -> u64 {
        self.0.n
    }

    /// Residue degree.
    pub fn f(&self) -> usize {
        self.0.f
    }

    /// Working precision in p-adic digits.
    pub fn precision(&self) -> u32 {
        self.0.m
    }

    pub(crate) fn w(&self) -> i64 {
        self.0.m as i64
    }

    pub fn modulus(&self) -> &Modulus {
        &self.0.md
    }

    pub(crate) fn md(&self) -> &Modulus {
        &self.0.md
    }

    /// Monic defining polynomial, lowest degree first.
    pub fn defining_poly(&self) -> Vec<u64> {
        self.0.field.g.clone()
    }

    pub(crate) fn field(&self) -> &ResidueField {
        &self.0.field
    }

    pub(crate) fn ops(&self) -> QOps<'_> {
        QOps { md: &self.0.md, g: &self.0.g, f: self.0.f, field: &self.0.field }
    }

    pub(crate) fn p_pow_res(&self, k: i64) -> Res {
        if k >= self.w() {
            Res::ZERO
        } else {
            self.0.p_pows[k as usize]
        }
    }

    /// `q = p^f`.
    pub fn q(&self) -> BigUint {
        BigUint::from(self.0.p).pow(self.0.f as u32)
    }

    /// Whether two handles describe the same ring.
    pub fn same(&self, other: &PadicContext) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.m == other.0.m
                && self.0.f == other.0.f
                && self.0.field.g == other.0.field.g)
    }

    /// The context of `Z_p` at the same precision.
    pub fn base(&self) -> PadicContext {
        match &self.0.base {
            Some(b) => b.clone(),
            None => self.clone(),
        }
    }

    /// The same ring at a different working precision.
    pub fn with_precision(&self, m: u32) -> Result<PadicContext> {
        make_context(self.0.p, self.0.n, m)
    }

    /// The distinguished primitive `N`-th root of unity.
    pub fn zeta(&self) -> PadicElem {
        PadicElem::from_unit_coords(self, self.0.zeta.clone(), 0)
    }

    /// `ζ_N^k`.
    pub fn zeta_pow(&self, k: u64) -> PadicElem {
        let e = k % self.0.n;
        PadicElem::from_unit_coords(self, self.ops().pow(&self.0.zeta, e), 0)
    }

    /// `ζ_d := ζ_N^{N/d}` for `d | N` (and `ζ_2 = -1`).
    pub fn root_of_unity(&self, d: u64) -> Result<PadicElem> {
        if d == 2 && self.0.n % 2 == 1 {
            return Ok(PadicElem::from_i64(self, -1));
        }
        if d == 0 || !self.0.n.is_multiple_of(d) {
            return Err(Error::MissingRootsOfUnity {
                have: self.0.n,
                needed: arith::lcm(self.0.n, d.max(1)),
            });
        }
        Ok(self.zeta_pow(self.0.n / d))
    }

    /// `ω(a)` for a residue `0 < a < p`, as a raw residue.
    pub(crate) fn teich_res(&self, a: u64) -> Res {
        self.0.teich[(a % self.0.p) as usize]
    }

    pub(crate) fn frobenius_coords(&self, a: &[Res], inverse: bool) -> Vec<Res> {
        let mat = if inverse { &self.0.frob_inv } else { &self.0.frob };
        apply_matrix(&self.0.md, mat, a)
    }

    pub(crate) fn lift(&self, a: &[u64]) -> Vec<Res> {
        self.ops().lift(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_degrees() {
        assert_eq!(make_context(7, 3, 20).unwrap().f(), 1);
        assert_eq!(make_context(5, 3, 20).unwrap().f(), 2);
        assert!(matches!(make_context(5, 5, 20), Err(Error::PDividesN { .. })));
        assert!(matches!(make_context(4, 3, 20), Err(Error::BadPrime(4))));
        assert!(matches!(make_context(5, 3, 1), Err(Error::PrecisionTooSmall(1))));
    }

    #[test]
    fn zeta_is_primitive() {
        for &(p, n) in &[(7u64, 3u64), (5, 3), (5, 12), (13, 20), (3, 10)] {
            let ctx = make_context(p, n, 12).unwrap();
            let ops = ctx.ops();
            let one = {
                let mut v = vec![Res::ZERO; ctx.f()];
                v[0] = ctx.md().one();
                v
            };
            assert_eq!(ops.pow(&ctx.0.zeta, n), one);
            for d in arith::divisors(n) {
                if d < n {
                    assert_ne!(ops.pow(&ctx.0.zeta, d), one, "p={p} n={n} d={d}");
                }
            }
        }
    }
}
