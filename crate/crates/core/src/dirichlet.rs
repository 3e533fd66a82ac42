//! Dirichlet characters with values in `Z_q`.
//!
//! A character mod `N` is stored context-free: with `L` the exponent of
//! `(Z/N)^*`, it records `e(a)` such that `χ(a) = ζ_L^{e(a)}`. Values are
//! realized in a context containing `ζ_L`, as `ζ_L = ζ_{N'}^{N'/L}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, lcm};
use crate::error::{Error, Result};
use crate::padic::{PadicContext, PadicElem};

/// `(Z/N)^*` with a fixed generating set and discrete logarithms.
#[derive(Debug)]
struct UnitGroup {
    n: u64,
    exponent: u64,
    /// `(generator, order)`
    gens: Vec<(u64, u64)>,
    /// `logs[a]` = exponents of `a` on the generators, or `None` if `gcd(a, N) > 1`.
    logs: Vec<Option<Vec<u64>>>,
}

fn crt_lift(residue: u64, modulus: u64, other: u64) -> u64 {
    // x ≡ residue mod modulus, x ≡ 1 mod other
    let n = modulus * other;
    (0..n)
        .find(|&x| x % modulus == residue % modulus && x % other == 1 % other)
        .expect("coprime moduli")
}

impl UnitGroup {
    fn new(n: u64) -> UnitGroup {
        let mut gens = Vec::new();
        for (q, k) in arith::factorize(n) {
            let qk = q.pow(k);
            let other = n / qk;
            if q == 2 {
                if k >= 2 {
                    gens.push((crt_lift(qk - 1, qk, other), 2));
                }
                if k >= 3 {
                    gens.push((crt_lift(5, qk, other), qk / 4));
                }
            } else {
                let g = arith::primitive_root(qk);
                gens.push((crt_lift(g, qk, other), (q - 1) * q.pow(k - 1)));
            }
        }
        let mut logs: Vec<Option<Vec<u64>>> = vec![None; n as usize];
        // enumerate all products of generator powers
        let mut idx = vec![0u64; gens.len()];
        loop {
            let mut a = 1 % n;
            for (i, &(g, _)) in gens.iter().enumerate() {
                a = a * arith::powmod(g, idx[i], n) % n;
            }
            logs[a as usize] = Some(idx.clone());
            let mut i = 0;
            loop {
                if i == gens.len() {
                    let exponent = arith::unit_group_exponent(n);
                    return UnitGroup { n, exponent, gens, logs };
                }
                idx[i] += 1;
                if idx[i] < gens[i].1 {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
}

fn unit_group(n: u64) -> Arc<UnitGroup> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&n) {
        return g.clone();
    }
    let g = Arc::new(UnitGroup::new(n));
    cache.lock().unwrap().entry(n).or_insert(g).clone()
}

/// A Dirichlet character modulo `N`.
#[derive(Clone)]
pub struct DirichletChar {
    group: Arc<UnitGroup>,
    /// `χ(g_i) = ζ_L^{k_i}` for the fixed generators.
    ks: Vec<u64>,
    /// `e(a)` with `χ(a) = ζ_L^{e(a)}`; `None` off the units.
    exps: Arc<Vec<Option<u64>>>,
}

impl PartialEq for DirichletChar {
    fn eq(&self, other: &Self) -> bool {
        self.group.n == other.group.n && self.ks == other.ks
    }
}

impl Eq for DirichletChar {}

impl std::hash::Hash for DirichletChar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.group.n.hash(state);
        self.ks.hash(state);
    }
}

impl fmt::Debug for DirichletChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletChar({})", self.label())
    }
}

/// `{modulus, order, generator_images: [(g, k)]}` with `χ(g) = ζ_order^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterJson {
    pub modulus: u64,
    pub order: u64,
    pub generator_images: Vec<(u64, u64)>,
}

impl DirichletChar {
    fn from_ks(group: Arc<UnitGroup>, ks: Vec<u64>) -> DirichletChar {
        let l = group.exponent;
        let exps: Vec<Option<u64>> = group
            .logs
            .iter()
            .map(|lg| {
                lg.as_ref()
                    .map(|xs| xs.iter().zip(&ks).fold(0u64, |acc, (&x, &k)| (acc + x * k) % l))
            })
            .collect();
        DirichletChar { group, ks, exps: Arc::new(exps) }
    }

    /// Builds the character mod `n` whose value at `a` is `ζ_src^{e(a)}`.
    fn from_fn(n: u64, src_order: u64, e: impl Fn(u64) -> u64) -> DirichletChar {
        let group = unit_group(n);
        let l = group.exponent;
        let ks = group
            .gens
            .iter()
            .map(|&(g, _)| {
                let num = (e(g) % src_order) * l;
                assert!(num.is_multiple_of(src_order), "character order does not divide the group exponent");
                (num / src_order) % l
            })
            .collect();
        DirichletChar::from_ks(group, ks)
    }

    pub fn trivial(n: u64) -> DirichletChar {
        let group = unit_group(n);
        let ks = vec![0; group.gens.len()];
        DirichletChar::from_ks(group, ks)
    }

    /// All `φ(N)` characters mod `N` in a deterministic order.
    pub fn all(n: u64) -> Vec<DirichletChar> {
        let group = unit_group(n);
        let l = group.exponent;
        let mut out = Vec::new();
        let mut idx = vec![0u64; group.gens.len()];
        loop {
            let ks = idx.iter().zip(&group.gens).map(|(&j, &(_, o))| j * (l / o)).collect();
            out.push(DirichletChar::from_ks(group.clone(), ks));
            let mut i = idx.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < group.gens[i].1 {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    pub fn modulus(&self) -> u64 {
        self.group.n
    }

    /// `L`, the exponent of `(Z/N)^*`; values are powers of `ζ_L`.
    pub fn value_order(&self) -> u64 {
        self.group.exponent
    }

    /// `e(a)` with `χ(a) = ζ_L^{e(a)}`, or `None` when `gcd(a, N) > 1`.
    pub fn exponent_at(&self, a: i64) -> Option<u64> {
        let n = self.group.n as i64;
        self.exps[a.rem_euclid(n) as usize]
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        let l = self.group.exponent;
        self.ks.iter().fold(1, |acc, &k| lcm(acc, l / gcd(k, l)))
    }

    pub fn is_trivial(&self) -> bool {
        self.ks.iter().all(|&k| k == 0)
    }

    /// `δ = 0` for even characters, `1` for odd ones.
    pub fn parity(&self) -> u32 {
        let e = self.exponent_at(-1).unwrap();
        if e == 0 {
            0
        } else {
            1
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }

    pub fn conj(&self) -> DirichletChar {
        let l = self.group.exponent;
        let ks = self.ks.iter().map(|&k| (l - k) % l).collect();
        DirichletChar::from_ks(self.group.clone(), ks)
    }

    pub fn pow(&self, m: i64) -> DirichletChar {
        let l = self.group.exponent as i64;
        let ks = self.ks.iter().map(|&k| ((k as i64 * m).rem_euclid(l)) as u64).collect();
        DirichletChar::from_ks(self.group.clone(), ks)
    }

    /// The character induced on a multiple `m` of the modulus.
    pub fn lift_to(&self, m: u64) -> DirichletChar {
        assert!(m.is_multiple_of(self.group.n), "lift to a non-multiple");
        if m == self.group.n {
            return self.clone();
        }
        let n = self.group.n;
        DirichletChar::from_fn(m, self.group.exponent, |a| self.exps[(a % n) as usize].unwrap())
    }

    /// Product, realized modulo the lcm of the moduli.
    pub fn mul(&self, other: &DirichletChar) -> DirichletChar {
        let m = lcm(self.modulus(), other.modulus());
        let a = self.lift_to(m);
        let b = other.lift_to(m);
        let l = a.group.exponent;
        let ks = a.ks.iter().zip(&b.ks).map(|(&x, &y)| (x + y) % l).collect();
        DirichletChar::from_ks(a.group.clone(), ks)
    }

    /// Smallest modulus through which the character factors.
    pub fn conductor(&self) -> u64 {
        let n = self.group.n;
        for d in arith::divisors(n) {
            let ok = (1..n).all(|a| {
                a % d != 1 % d || gcd(a, n) != 1 || self.exps[a as usize] == Some(0)
            });
            if ok {
                return d;
            }
        }
        n
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// The primitive character inducing this one.
    pub fn primitivize(&self) -> DirichletChar {
        let n = self.group.n;
        let d = self.conductor();
        if d == n {
            return self.clone();
        }
        let l = self.group.exponent;
        DirichletChar::from_fn(d, l, |b| {
            let a = (0..n)
                .map(|t| b + t * d)
                .find(|&a| gcd(a, n) == 1)
                .expect("every class mod d lifts to a unit");
            self.exps[(a % n) as usize].unwrap()
        })
    }

    /// `ζ_o` for the order `o` of the character, from `ctx`.
    fn value_root(&self, ctx: &PadicContext) -> Result<(PadicElem, u64)> {
        let o = self.order();
        if o.is_multiple_of(ctx.p()) {
            return Err(Error::Domain(format!(
                "character {} has order divisible by p = {}; its values are ramified",
                self.label(),
                ctx.p()
            )));
        }
        Ok((ctx.root_of_unity(o)?, self.group.exponent / o))
    }

    /// Whether the values lie in an unramified extension of `Q_p`.
    pub fn realizable_at(&self, p: u64) -> bool {
        !self.order().is_multiple_of(p)
    }

    /// `χ(a)` in `ctx`, which must contain `ζ_o` for the order `o`.
    pub fn eval(&self, a: i64, ctx: &PadicContext) -> Result<PadicElem> {
        let (z, scale) = self.value_root(ctx)?;
        Ok(match self.exponent_at(a) {
            None => PadicElem::zero(ctx),
            Some(e) => z.pow((e / scale) as i64),
        })
    }

    /// `χ(a)` for `a = 0..N-1`.
    pub fn value_table(&self, ctx: &PadicContext) -> Result<Vec<PadicElem>> {
        let (z, scale) = self.value_root(ctx)?;
        let o = self.order();
        let mut pw = Vec::with_capacity(o as usize);
        let mut acc = PadicElem::one(ctx);
        for _ in 0..o {
            pw.push(acc.clone());
            acc = &acc * &z;
        }
        Ok(self
            .exps
            .iter()
            .map(|e| match e {
                None => PadicElem::zero(ctx),
                Some(e) => pw[(*e / scale) as usize].clone(),
            })
            .collect())
    }

    /// Canonical label `N.k1.k2...` (images relative to `ζ_L`).
    pub fn label(&self) -> String {
        let mut s = self.group.n.to_string();
        for k in &self.ks {
            s.push('.');
            s.push_str(&k.to_string());
        }
        s
    }

    /// Parses a canonical label, or `quadN` for the quadratic character of
    /// an odd prime `N` (and `quad4`).
    pub fn parse(label: &str) -> Result<DirichletChar> {
        let bad = || Error::InvalidData(format!("unrecognized character label {label:?}"));
        if let Some(rest) = label.strip_prefix("quad") {
            let n: u64 = rest.parse().map_err(|_| bad())?;
            if n != 4 && (n < 3 || !arith::is_prime(n)) {
                return Err(bad());
            }
            let group = unit_group(n);
            let l = group.exponent;
            return Ok(DirichletChar::from_ks(group, vec![l / 2]));
        }
        let mut parts = label.split('.');
        let n: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if n == 0 {
            return Err(bad());
        }
        let ks: Vec<u64> = parts.map(|s| s.parse().map_err(|_| bad())).collect::<Result<_>>()?;
        DirichletChar::from_generator_images(n, &ks)
    }

    fn from_generator_images(n: u64, ks: &[u64]) -> Result<DirichletChar> {
        let group = unit_group(n);
        let l = group.exponent;
        if ks.len() != group.gens.len() {
            return Err(Error::InvalidData(format!(
                "modulus {n} has {} generators, got {} images",
                group.gens.len(),
                ks.len()
            )));
        }
        for (&k, &(_, o)) in ks.iter().zip(&group.gens) {
            if k >= l || (k * o) % l != 0 {
                return Err(Error::InvalidData(format!("image {k} incompatible with generator order {o}")));
            }
        }
        Ok(DirichletChar::from_ks(group, ks.to_vec()))
    }

    pub fn to_json(&self) -> CharacterJson {
        CharacterJson {
            modulus: self.group.n,
            order: self.group.exponent,
            generator_images: self.group.gens.iter().map(|g| g.0).zip(self.ks.iter().copied()).collect(),
        }
    }

    pub fn from_json(j: &CharacterJson) -> Result<DirichletChar> {
        let group = unit_group(j.modulus);
        if j.order != group.exponent {
            return Err(Error::InvalidData("order must equal the group exponent".into()));
        }
        let gens: Vec<u64> = j.generator_images.iter().map(|g| g.0).collect();
        let expected: Vec<u64> = group.gens.iter().map(|g| g.0).collect();
        if gens != expected {
            return Err(Error::InvalidData(format!("generators must be {expected:?}")));
        }
        let ks: Vec<u64> = j.generator_images.iter().map(|g| g.1).collect();
        DirichletChar::from_generator_images(j.modulus, &ks)
    }
}

/// `N'` such that one context serves characters mod `N`, their Gauss sums
/// and Teichmüller twists at `p`.
pub fn character_context_modulus(n: u64, p: u64) -> u64 {
    let mut e = arith::unit_group_exponent(n);
    while e.is_multiple_of(p) {
        e /= p;
    }
    lcm(lcm(n, e), p - 1)
}

/// All characters mod `N`; `ctx` must contain the roots of unity they need.
pub fn enumerate_chars(n: u64, ctx: &PadicContext) -> Result<Vec<DirichletChar>> {
    let mut e = arith::unit_group_exponent(n);
    while e.is_multiple_of(ctx.p()) {
        e /= ctx.p();
    }
    let needed = lcm(n, e);
    if !ctx.n().is_multiple_of(needed) {
        return Err(Error::MissingRootsOfUnity { have: ctx.n(), needed: lcm(ctx.n(), needed) });
    }
    Ok(DirichletChar::all(n))
}

/// Primitive characters of conductor exactly `n`.
pub fn primitive_chars(n: u64) -> Vec<DirichletChar> {
    DirichletChar::all(n).into_iter().filter(|c| c.is_primitive()).collect()
}

/// The Teichmüller character `ω` mod `p`, expressed through the context's
/// `ζ_{p-1}`.
pub fn teichmuller_char(ctx: &PadicContext) -> Result<DirichletChar> {
    let p = ctx.p();
    let zp = ctx.root_of_unity(p - 1)?;
    let g = arith::primitive_root(p);
    let target = g % p;
    let mut acc = PadicElem::one(ctx);
    for r in 0..p - 1 {
        let res = acc.residue();
        if res[0] == target && res[1..].iter().all(|&c| c == 0) {
            return Ok(DirichletChar::from_fn(p, p - 1, |a| {
                // ω(g^x) = ζ^{r x}
                let x = (0..p - 1).find(|&x| arith::powmod(g, x, p) == a % p).unwrap();
                r * x
            }));
        }
        acc = &acc * &zp;
    }
    unreachable!("ζ_(p-1) generates the Teichmüller lifts")
}

/// `η ω^m` as a character mod `lcm(N, p)`.
pub fn twist_by_teichmuller(eta: &DirichletChar, m: i64, ctx: &PadicContext) -> Result<DirichletChar> {
    let omega = teichmuller_char(ctx)?;
    Ok(eta.mul(&omega.pow(m)))
}

/// `τ(η) = Σ_a η(a) ζ_N^a` for primitive `η`.
pub fn gauss_sum(eta: &DirichletChar, ctx: &PadicContext) -> Result<PadicElem> {
    let n = eta.modulus();
    if !eta.is_primitive() {
        return Err(Error::NotPrimitive { conductor: eta.conductor(), modulus: n });
    }
    if n == 1 {
        return Ok(PadicElem::one(ctx));
    }
    let zn = ctx.root_of_unity(n)?;
    let vals = eta.value_table(ctx)?;
    let mut acc = PadicElem::zero(ctx);
    let mut z = PadicElem::one(ctx);
    for v in vals.iter() {
        acc = &acc + &(v * &z);
        z = &z * &zn;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_context;

    #[test]
    fn counts() {
        assert_eq!(DirichletChar::all(3).len(), 2);
        let c5 = DirichletChar::all(5);
        assert_eq!(c5.len(), 4);
        assert_eq!(c5.iter().filter(|c| c.is_odd()).count(), 2);
        assert_eq!(DirichletChar::all(8).len(), 4);
        assert!(DirichletChar::all(8).iter().all(|c| c.order() <= 2));
        for n in 3..40 {
            let all = DirichletChar::all(n);
            assert_eq!(all.len() as u64, arith::euler_phi(n));
            assert_eq!(all.iter().filter(|c| c.is_odd()).count() as u64, arith::euler_phi(n) / 2);
        }
    }

    #[test]
    fn quadratic_mod_three() {
        let eta = DirichletChar::parse("quad3").unwrap();
        let ctx = make_context(7, 3, 10).unwrap();
        assert_eq!(eta.eval(2, &ctx).unwrap(), PadicElem::from_i64(&ctx, -1));
        assert!(eta.is_odd());
        assert_eq!(eta.conductor(), 3);
    }

    #[test]
    fn conductors() {
        assert_eq!(DirichletChar::trivial(15).conductor(), 1);
        let eta6 = DirichletChar::parse("quad3").unwrap().lift_to(6);
        assert_eq!(eta6.modulus(), 6);
        assert_eq!(eta6.conductor(), 3);
        assert_eq!(eta6.primitivize(), DirichletChar::parse("quad3").unwrap());
    }

    #[test]
    fn gauss_sums() {
        let eta = DirichletChar::parse("quad3").unwrap();
        let ctx = make_context(5, 3, 12).unwrap();
        let t = gauss_sum(&eta, &ctx).unwrap();
        assert_eq!(&t * &t, PadicElem::from_i64(&ctx, -3));
        for n in 1..=12u64 {
            for p in [5u64, 7, 11, 13] {
                if n % p == 0 {
                    continue;
                }
                let ctx = make_context(p, character_context_modulus(n, p), 8).unwrap();
                for eta in primitive_chars(n).into_iter().filter(|c| c.realizable_at(p)) {
                    let a = gauss_sum(&eta, &ctx).unwrap();
                    let b = gauss_sum(&eta.conj(), &ctx).unwrap();
                    let sign = if eta.is_odd() { -1 } else { 1 };
                    assert_eq!(&a * &b, PadicElem::from_i64(&ctx, sign * n as i64), "{eta:?} p={p}");
                }
            }
        }
        let ctx = make_context(7, 1, 8).unwrap();
        assert_eq!(gauss_sum(&DirichletChar::trivial(1), &ctx).unwrap(), PadicElem::one(&ctx));
        assert!(gauss_sum(&DirichletChar::trivial(5), &ctx).is_err());
    }

    #[test]
    fn teichmuller_twists() {
        let p = 7;
        let eta = DirichletChar::parse("quad3").unwrap();
        let ctx = make_context(p, character_context_modulus(3, p), 12).unwrap();
        let omega = teichmuller_char(&ctx).unwrap();
        for a in 1..p as i64 {
            let w = crate::padic::teichmuller(&PadicElem::from_i64(&ctx, a)).unwrap();
            assert_eq!(omega.eval(a, &ctx).unwrap(), w);
        }
        let t0 = twist_by_teichmuller(&eta, 6, &ctx).unwrap();
        assert_eq!(t0.primitivize(), eta);
        let t1 = twist_by_teichmuller(&eta, 1, &ctx).unwrap();
        assert!(!t1.is_odd());
        assert_eq!(t1.modulus(), 21);
        let t3 = twist_by_teichmuller(&eta, 3, &ctx).unwrap();
        let t5 = t1.mul(&omega.pow(4));
        assert_eq!(t3.mul(&omega.pow(2)), t5);
    }

    #[test]
    fn json_round_trip() {
        for c in DirichletChar::all(24) {
            let j = c.to_json();
            let s = serde_json::to_string(&j).unwrap();
            let back = DirichletChar::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
            assert_eq!(back, c);
            assert_eq!(DirichletChar::parse(&c.label()).unwrap(), c);
        }
    }
}
