//! Trivial zeros of p-adic L-functions of modular forms, from local data at
//! `p`: Hecke roots, the interpolation factors, the case classifier, twist
//! reduction and the Tate-curve `ℒ`-invariant.

use std::fmt;

use num_bigint::BigInt;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, lcm, vp_u64};
use crate::dirichlet::DirichletChar;
use crate::error::{Error, Result};
use crate::padic::{hensel_root, iwasawa_log, make_context, teichmuller, PadicContext, PadicElem, PadicElemJson};

/// A value of local data: an integer, a root of unity `ζ_d^e`, or a
/// serialized p-adic element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LocalValue {
    Int(i64),
    Zeta { zeta: (u64, u64) },
    Padic(PadicElemJson),
}

impl LocalValue {
    fn root_order(&self) -> u64 {
        match self {
            LocalValue::Zeta { zeta } => zeta.0,
            _ => 1,
        }
    }

    fn to_elem(&self, ctx: &PadicContext) -> Result<PadicElem> {
        match self {
            LocalValue::Int(n) => Ok(PadicElem::from_i64(ctx, *n)),
            LocalValue::Zeta { zeta: (d, e) } => Ok(ctx.root_of_unity(*d)?.pow(*e as i64)),
            LocalValue::Padic(j) => PadicElem::from_json(ctx, j),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewformLocalDataJson {
    pub level: u64,
    pub weight: u32,
    pub p: u64,
    pub a_p: LocalValue,
    pub eps_p: LocalValue,
    pub ord_p_cond_eps: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Local data at `p` of a newform of level `N` and weight `k`.
#[derive(Clone, Debug)]
pub struct NewformLocalData {
    pub level: u64,
    pub weight: u32,
    pub p: u64,
    pub a_p: PadicElem,
    pub eps_p: PadicElem,
    pub ord_p_cond_eps: u32,
    pub n_val: u32,
    pub label: Option<String>,
}

/// The local shape of the form at `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroCase {
    Semistable,
    Crystalline,
    PotentiallyCrystalline,
    None,
}

impl fmt::Display for ZeroCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZeroCase::Semistable => "semistable",
            ZeroCase::Crystalline => "crystalline",
            ZeroCase::PotentiallyCrystalline => "potentially_crystalline",
            ZeroCase::None => "none",
        })
    }
}

fn is_root_of_unity(u: &PadicElem) -> Result<bool> {
    if !u.is_unit() {
        return Ok(false);
    }
    Ok(teichmuller(u)?.agreement(u) >= u.prec())
}

impl NewformLocalData {
    pub fn new(
        ctx: &PadicContext,
        level: u64,
        weight: u32,
        a_p: PadicElem,
        eps_p: PadicElem,
        ord_p_cond_eps: u32,
        label: Option<String>,
    ) -> Result<NewformLocalData> {
        let p = ctx.p();
        let d = NewformLocalData {
            level,
            weight,
            p,
            a_p,
            eps_p,
            ord_p_cond_eps,
            n_val: vp_u64(level, p),
            label,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn ctx(&self) -> &PadicContext {
        self.a_p.ctx()
    }

    pub fn from_json(j: &NewformLocalDataJson, m: u32) -> Result<NewformLocalData> {
        let n = lcm(lcm(j.p - 1, j.a_p.root_order()), j.eps_p.root_order());
        let ctx = make_context(j.p, n, m)?;
        NewformLocalData::from_json_in(&ctx, j)
    }

    pub fn from_json_in(ctx: &PadicContext, j: &NewformLocalDataJson) -> Result<NewformLocalData> {
        if j.p != ctx.p() {
            return Err(Error::ContextMismatch);
        }
        NewformLocalData::new(
            ctx,
            j.level,
            j.weight,
            j.a_p.to_elem(ctx)?,
            j.eps_p.to_elem(ctx)?,
            j.ord_p_cond_eps,
            j.label.clone(),
        )
    }

    pub fn to_json(&self) -> NewformLocalDataJson {
        let enc = |x: &PadicElem| match x.to_rational_repr() {
            Some(q) if q.is_integer() && q.numer().bits() < 63 => {
                LocalValue::Int(num_traits::ToPrimitive::to_i64(q.numer()).unwrap())
            }
            _ => LocalValue::Padic(x.to_json()),
        };
        NewformLocalDataJson {
            level: self.level,
            weight: self.weight,
            p: self.p,
            a_p: enc(&self.a_p),
            eps_p: enc(&self.eps_p),
            ord_p_cond_eps: self.ord_p_cond_eps,
            label: self.label.clone(),
        }
    }

    fn bad(&self, why: &str) -> Error {
        let tag = self.label.clone().unwrap_or_else(|| format!("level {} weight {}", self.level, self.weight));
        Error::InvalidData(format!("{tag}: {why}"))
    }

    fn validate(&self) -> Result<()> {
        let p = self.p;
        let k = self.weight as i64;
        if p == 2 || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        if self.weight < 2 {
            return Err(self.bad("weight must be at least 2"));
        }
        if self.level == 0 {
            return Err(Error::BadModulus);
        }
        if self.ord_p_cond_eps > self.n_val {
            return Err(self.bad("ord_p(cond ε) exceeds ord_p(N)"));
        }
        if self.n_val == 0 {
            if !is_root_of_unity(&self.eps_p)? {
                return Err(self.bad("p ∤ N needs ε(p) a root of unity"));
            }
            // p-adic shadow of the Weil bound: a root of the form ξ p^e with
            // ξ a root of unity must have 2e = k - 1
            for r in hecke_roots(self)?.roots {
                let u = r.value.shift(-r.value.val());
                if is_root_of_unity(&u)? && 2 * r.value.val() != k - 1 {
                    return Err(self.bad("a Hecke root ξ·p^e with 2e ≠ k−1 contradicts the Weil bound"));
                }
            }
            return Ok(());
        }
        if !self.eps_p.is_zero() {
            return Err(self.bad("p | N forces ε(p) = 0"));
        }
        if self.n_val == 1 && self.ord_p_cond_eps == 0 {
            // a_p^2 = ε̃(p) p^{k-2}
            if self.a_p.is_zero() || 2 * self.a_p.val() != k - 2 {
                return Err(self.bad("p ∥ N with ε unramified needs v_p(a_p) = k/2 − 1"));
            }
            if !is_root_of_unity(&self.a_p.shift(-self.a_p.val()))? {
                return Err(self.bad("a_p / p^{k/2−1} must be a root of unity"));
            }
        } else if self.n_val == self.ord_p_cond_eps {
            if self.a_p.is_zero() || 2 * self.a_p.val() != k - 1 {
                return Err(self.bad("ord_p N = ord_p cond ε needs |a_p| = p^{(k−1)/2}"));
            }
        } else if !self.a_p.is_zero() {
            return Err(self.bad("ord_p N ≥ 2 with ord_p cond ε < ord_p N forces a_p = 0"));
        }
        Ok(())
    }

    /// The case of the trivial-zero analysis this data falls into.
    pub fn case(&self) -> ZeroCase {
        let k = self.weight;
        if self.n_val == 1 && self.ord_p_cond_eps == 0 && k.is_multiple_of(2) {
            ZeroCase::Semistable
        } else if self.n_val == 0 && k % 2 == 1 {
            ZeroCase::Crystalline
        } else if self.n_val >= 1 && self.n_val == self.ord_p_cond_eps && k % 2 == 1 {
            ZeroCase::PotentiallyCrystalline
        } else {
            ZeroCase::None
        }
    }

    fn hecke_poly(&self) -> [PadicElem; 3] {
        let ctx = self.ctx();
        let c0 = self.eps_p.shift(self.weight as i64 - 1);
        [c0, -&self.a_p, PadicElem::one(ctx)]
    }
}

/// How much is known about the roots of `X² − a_p X + ε(p)p^{k−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// Both roots found in `Z_q`.
    Exact,
    /// `ε(p) = 0`: the single root `a_p` (the zero root is discarded).
    Degenerate,
    /// The roots live in a ramified extension.
    SlopesOnlyRamified,
    /// The roots live in the unramified quadratic extension of `Q_q`.
    SlopesOnlyUnramified,
}

#[derive(Clone, Debug)]
pub struct HeckeRoot {
    pub value: PadicElem,
    pub critical: bool,
}

#[derive(Clone, Debug)]
pub struct RootReport {
    pub slopes: Vec<Rational64>,
    pub kind: RootKind,
    pub roots: Vec<HeckeRoot>,
}

fn slope_of(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

/// Newton slopes and, when possible, exact roots of the Hecke polynomial.
pub fn hecke_roots(d: &NewformLocalData) -> Result<RootReport> {
    let ctx = d.ctx();
    let k = d.weight as i64;
    let crit = |v: i64| v >= k - 1;
    let [c0, c1, _] = d.hecke_poly();
    if c0.is_zero() {
        if d.a_p.is_zero() {
            return Ok(RootReport { slopes: vec![], kind: RootKind::Degenerate, roots: vec![] });
        }
        let v = d.a_p.val();
        return Ok(RootReport {
            slopes: vec![slope_of(v)],
            kind: RootKind::Degenerate,
            roots: vec![HeckeRoot { value: d.a_p.clone(), critical: crit(v) }],
        });
    }
    let v0 = c0.val();
    let exact = |a: PadicElem| {
        let v = a.val();
        HeckeRoot { value: a, critical: crit(v) }
    };
    // distinct slopes: v(a_p) < v(c0)/2
    if !d.a_p.is_zero() && 2 * d.a_p.val() < v0 {
        let s1 = d.a_p.val();
        let s2 = v0 - s1;
        // X = p^{s1} Y: Y^2 - (a_p/p^{s1}) Y + c0/p^{2 s1}
        let poly = [c0.shift(-2 * s1), c1.shift(-s1), PadicElem::one(ctx)];
        let seed = d.a_p.shift(-s1);
        let y = hensel_root(&poly, &seed)?;
        let a1 = y.shift(s1);
        let a2 = c0.checked_div(&a1)?;
        return Ok(RootReport {
            slopes: vec![slope_of(s1), slope_of(s2)],
            kind: RootKind::Exact,
            roots: vec![exact(a1), exact(a2)],
        });
    }
    let half = Rational64::new(v0, 2);
    let slopes = vec![half, half];
    if v0 % 2 == 1 {
        return Ok(RootReport { slopes, kind: RootKind::SlopesOnlyRamified, roots: vec![] });
    }
    let s = v0 / 2;
    let b = c1.shift(-s);
    let c = c0.shift(-2 * s);
    let disc = &(&b * &b) - &c.mul_int(4);
    if disc.is_zero() {
        // double root -b/2
        let r = (-&b).checked_div(&PadicElem::from_i64(ctx, 2))?.shift(s);
        return Ok(RootReport { slopes, kind: RootKind::Exact, roots: vec![exact(r.clone()), exact(r)] });
    }
    if disc.val() > 0 {
        return Ok(RootReport { slopes, kind: RootKind::SlopesOnlyRamified, roots: vec![] });
    }
    let field = ctx.field();
    let res = disc.residue();
    match field.sqrt(&res) {
        None => Ok(RootReport { slopes, kind: RootKind::SlopesOnlyUnramified, roots: vec![] }),
        Some(sq) => {
            let sq = PadicElem::from_coords(ctx, &sq.iter().map(|&x| x as i64).collect::<Vec<_>>());
            let two = PadicElem::from_i64(ctx, 2);
            let seed = (&(-&b) + &sq).checked_div(&two)?;
            let poly = [c.clone(), b.clone(), PadicElem::one(ctx)];
            let y1 = hensel_root(&poly, &seed)?;
            let y2 = c.checked_div(&y1)?;
            Ok(RootReport {
                slopes,
                kind: RootKind::Exact,
                roots: vec![exact(y1.shift(s)), exact(y2.shift(s))],
            })
        }
    }
}

/// `η(p)` for a character of conductor prime to `p`.
#[derive(Clone, Debug)]
pub struct EtaLocal {
    pub eta_p: PadicElem,
}

impl EtaLocal {
    pub fn trivial(ctx: &PadicContext) -> EtaLocal {
        EtaLocal { eta_p: PadicElem::one(ctx) }
    }

    pub fn from_char(eta: &DirichletChar, ctx: &PadicContext) -> Result<EtaLocal> {
        let p = ctx.p();
        if eta.conductor().is_multiple_of(p) {
            return Err(Error::PDividesN { p, n: eta.conductor() });
        }
        Ok(EtaLocal { eta_p: eta.primitivize().eval(p as i64, ctx)? })
    }

    pub fn eta_bar_p(&self) -> Result<PadicElem> {
        self.eta_p.inv()
    }
}

/// The interpolation factor at `(j, m)`.
#[derive(Clone, Debug)]
pub enum EulerFactor {
    Value(PadicElem),
    /// `p^j η̄(p) / (α τ(ω^{j−m}))`, a unit multiple of a power of `p`; the
    /// ramified Gauss sum is not evaluated.
    GaussSumBranch { j: u32, m: u32 },
}

impl EulerFactor {
    pub fn vanishes(&self) -> bool {
        matches!(self, EulerFactor::Value(v) if v.is_zero())
    }
}

pub fn euler_like_factor(d: &NewformLocalData, alpha: &PadicElem, eta: &EtaLocal, j: u32, m: u32) -> Result<EulerFactor> {
    let k = d.weight;
    if j < 1 || j > k - 1 {
        return Err(Error::Domain(format!("j = {j} outside 1..{}", k - 1)));
    }
    let pm = (d.p - 1) as u32;
    if m >= pm {
        return Err(Error::Domain(format!("m = {m} outside 0..{}", pm - 1)));
    }
    if (j % pm) != m {
        return Ok(EulerFactor::GaussSumBranch { j, m });
    }
    let ctx = d.ctx();
    let one = PadicElem::one(ctx);
    let pj = |e: i64| PadicElem::one(ctx).shift(e);
    let f1 = &one - &(&eta.eta_bar_p()? * &pj(j as i64 - 1)).checked_div(alpha)?;
    let f2 = &one - &(&(&eta.eta_p * &d.eps_p) * &pj((k - j) as i64 - 1)).checked_div(alpha)?;
    Ok(EulerFactor::Value(&f1 * &f2))
}

#[derive(Clone, Debug)]
pub struct TrivialZeroFinding {
    pub case: ZeroCase,
    pub alpha: PadicElem,
    pub j: u32,
    pub m: u32,
    pub condition: String,
}

impl TrivialZeroFinding {
    /// `(j, m, α)` in a form that can be compared and sorted.
    pub fn key(&self) -> (u32, u32, String) {
        (self.j, self.m, self.alpha.to_string())
    }
}

/// Trivial zeros prescribed by the case analysis for `L_{p,α}(f, ηω^m, s)`.
pub fn classify_trivial_zeros(d: &NewformLocalData, eta: &EtaLocal) -> Result<Vec<TrivialZeroFinding>> {
    let ctx = d.ctx();
    let k = d.weight;
    let pm = (d.p - 1) as u32;
    let eta_bar = eta.eta_bar_p()?;
    let mut out = Vec::new();
    let is_root = |a: &PadicElem| {
        let [c0, c1, _] = d.hecke_poly();
        (&(&(a * a) + &(&c1 * a)) + &c0).is_zero()
    };
    match d.case() {
        ZeroCase::Semistable => {
            let h = k / 2;
            let xi = d.a_p.shift(-(h as i64 - 1));
            if eta_bar == xi {
                out.push(TrivialZeroFinding {
                    case: ZeroCase::Semistable,
                    alpha: d.a_p.clone(),
                    j: h,
                    m: h % pm,
                    condition: "η̄(p) = ξ with a_p = ξ p^{k/2−1}".into(),
                });
            }
        }
        ZeroCase::Crystalline => {
            let e = (k as i64 - 1) / 2;
            let upper = eta_bar.shift(e);
            if is_root(&upper) {
                out.push(TrivialZeroFinding {
                    case: ZeroCase::Crystalline,
                    alpha: upper,
                    j: k.div_ceil(2),
                    m: k.div_ceil(2) % pm,
                    condition: "α = η̄(p) p^{(k−1)/2}".into(),
                });
            }
            let lower = (&eta.eta_p * &d.eps_p).shift(e);
            if is_root(&lower) {
                out.push(TrivialZeroFinding {
                    case: ZeroCase::Crystalline,
                    alpha: lower,
                    j: (k - 1) / 2,
                    m: ((k - 1) / 2) % pm,
                    condition: "α = η(p) ε(p) p^{(k−1)/2}".into(),
                });
            }
            let _ = ctx;
        }
        ZeroCase::PotentiallyCrystalline => {
            let e = (k as i64 - 1) / 2;
            if d.a_p == eta_bar.shift(e) {
                let j = k.div_ceil(2);
                out.push(TrivialZeroFinding {
                    case: ZeroCase::PotentiallyCrystalline,
                    alpha: d.a_p.clone(),
                    j,
                    m: j % pm,
                    condition: "a_p = η̄(p) p^{(k−1)/2}".into(),
                });
            }
        }
        ZeroCase::None => {}
    }
    out.sort_by_key(|f| f.key());
    Ok(out)
}

/// All `(α, j, m)` with `α` a non-critical Hecke root, `j ≡ m mod (p−1)`
/// and a vanishing interpolation factor.
pub fn brute_force_zeros(d: &NewformLocalData, eta: &EtaLocal) -> Result<Vec<(u32, u32, String)>> {
    let pm = (d.p - 1) as u32;
    let mut out = Vec::new();
    let roots = hecke_roots(d)?;
    let mut seen: Vec<PadicElem> = Vec::new();
    for r in roots.roots.iter().filter(|r| !r.critical) {
        if seen.contains(&r.value) {
            continue;
        }
        seen.push(r.value.clone());
        for j in 1..d.weight {
            for m in 0..pm {
                if euler_like_factor(d, &r.value, eta, j, m)?.vanishes() {
                    out.push((j, m, r.value.to_string()));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Local data of `f ⊗ η` at `p`: `a_p ↦ η(p) a_p`, `ε(p) ↦ ε(p) η(p)²`.
pub fn twist_reduce(d: &NewformLocalData, eta: &DirichletChar) -> Result<NewformLocalData> {
    let ctx = d.ctx();
    let el = EtaLocal::from_char(eta, ctx)?;
    let cond = eta.conductor();
    let e2 = &el.eta_p * &el.eta_p;
    NewformLocalData::new(
        ctx,
        lcm(d.level, cond * cond),
        d.weight,
        &el.eta_p * &d.a_p,
        &d.eps_p * &e2,
        d.ord_p_cond_eps,
        d.label.as_ref().map(|l| format!("{l}⊗{}", eta.label())),
    )
}

/// Coefficients of `j(q)` from `q^{-1}` through `q^{16}`.
pub const J_COEFFS: [u128; 18] = [
    1,
    744,
    196884,
    21493760,
    864299970,
    20245856256,
    333202640600,
    4252023300096,
    44656994071935,
    401490886656000,
    3176440229784420,
    22567393309593600,
    146211911499519294,
    874313719685775360,
    4872010111798142520,
    25497827389410525184,
    126142916465781843075,
    593121772421445058560,
];

/// Sum of [`J_COEFFS`], guarding the table against edits.
pub const J_CHECKSUM: u128 = 750681246607398758259;

fn j_table_ok() -> Result<()> {
    if J_COEFFS.iter().sum::<u128>() != J_CHECKSUM {
        return Err(Error::InvalidData("j-series table fails its checksum".into()));
    }
    Ok(())
}

/// `q j(q) = 1 + 744 q + 196884 q^2 + ...` through `q^{17}`.
fn qj(q: &PadicElem) -> PadicElem {
    let ctx = q.ctx();
    let mut acc = PadicElem::zero(ctx);
    for c in J_COEFFS.iter().rev() {
        acc = &(&acc * q) + &PadicElem::from_bigint(ctx, &BigInt::from(*c));
    }
    acc
}

fn qj_deriv(q: &PadicElem) -> PadicElem {
    let ctx = q.ctx();
    let mut acc = PadicElem::zero(ctx);
    for (i, c) in J_COEFFS.iter().enumerate().skip(1).rev() {
        acc = &(&acc * q) + &PadicElem::from_bigint(ctx, &(BigInt::from(*c) * BigInt::from(i)));
    }
    acc
}

/// `j(q)` from the truncated series; the error is `O(q^{17})`.
pub fn j_invariant(q: &PadicElem) -> Result<PadicElem> {
    j_table_ok()?;
    if q.is_zero() || q.val() <= 0 {
        return Err(Error::Domain("j(q) needs v_p(q) > 0".into()));
    }
    let v = q.val();
    let j = qj(q).checked_div(q)?;
    // omitted terms are O(q^17), i.e. relative size p^{18 v(q)}
    Ok(j.with_prec(17 * v))
}

/// The Tate parameter `q` with `j(q) = j_inv`, for `v_p(j_inv) < 0`.
pub fn tate_parameter(j_inv: &PadicElem) -> Result<PadicElem> {
    j_table_ok()?;
    if j_inv.is_zero() || j_inv.val() >= 0 {
        return Err(Error::Domain("the Tate range needs v_p(j) < 0".into()));
    }
    let ctx = j_inv.ctx();
    let w = ctx.w();
    let v = -j_inv.val();
    let jj = j_inv.inv()?;
    // q = J · P(q): a contraction gaining v digits per step, then Newton
    let mut q = jj.clone();
    for _ in 0..3 {
        q = &jj * &qj(&q);
    }
    let one = PadicElem::one(ctx);
    for _ in 0..64 {
        let phi = &q - &(&jj * &qj(&q));
        if phi.is_zero() {
            break;
        }
        let dphi = &one - &(&jj * &qj_deriv(&q));
        q = &q - &phi.checked_div(&dphi)?;
    }
    // the table stops at q^17 in P(q), so q is certified to 19 v digits
    let cert = (19 * v).min(v + w);
    Ok(q.with_prec(cert))
}

/// `ℒ_FM = log_p(q) / v_p(q)` with `log_p(p) = 0`.
pub fn fm_linvariant(q: &PadicElem) -> Result<PadicElem> {
    if q.is_zero() || q.val() <= 0 {
        return Err(Error::Domain("a Tate parameter has v_p(q) > 0".into()));
    }
    let v = q.val();
    let u = q.shift(-v);
    iwasawa_log(&u)?.checked_div(&PadicElem::from_i64(q.ctx(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::primitive_chars;

    fn ctx(p: u64, n: u64) -> PadicContext {
        make_context(p, n, 16).unwrap()
    }

    fn data(c: &PadicContext, level: u64, k: u32, a_p: PadicElem, eps: PadicElem, oc: u32) -> NewformLocalData {
        NewformLocalData::new(c, level, k, a_p, eps, oc, None).unwrap()
    }

    #[test]
    fn root_reports() {
        let c = ctx(7, 6);
        let one = PadicElem::one(&c);
        // semistable: single root a_p
        let d = data(&c, 14, 2, one.clone(), PadicElem::zero(&c), 0);
        let r = hecke_roots(&d).unwrap();
        assert_eq!(r.kind, RootKind::Degenerate);
        assert_eq!(r.slopes, vec![Rational64::from_integer(0)]);
        // ordinary k = 2: slopes {0, 1}, unit root of X^2 - X + 7
        let d = NewformLocalData { level: 11, n_val: 0, ..d.clone() };
        let d = NewformLocalData { eps_p: one.clone(), ..d };
        let r = hecke_roots(&d).unwrap();
        assert_eq!(r.slopes, vec![Rational64::from_integer(0), Rational64::from_integer(1)]);
        let a = &r.roots[0].value;
        assert!((&(&(a * a) - a) + &PadicElem::from_i64(&c, 7)).is_zero());
        assert_eq!(a.residue()[0], 1);
        // supersingular
        let d = NewformLocalData { a_p: PadicElem::zero(&c), ..d };
        let r = hecke_roots(&d).unwrap();
        assert_eq!(r.kind, RootKind::SlopesOnlyRamified);
        assert_eq!(r.slopes, vec![Rational64::new(1, 2), Rational64::new(1, 2)]);
        // equal integral slopes that split: X^2 - 7X + 49, roots 7·ζ_6^{±1}
        let d = data(&c, 5, 3, PadicElem::from_i64(&c, 7), one.clone(), 0);
        let r = hecke_roots(&d).unwrap();
        assert_eq!(r.kind, RootKind::Exact);
        let z6 = c.root_of_unity(6).unwrap();
        for x in &r.roots {
            let [c0, c1, _] = d.hecke_poly();
            let a = &x.value;
            assert!((&(&(a * a) + &(&c1 * a)) + &c0).is_zero());
            let u = a.shift(-1);
            assert!(u == z6 || u == z6.pow(5));
        }
        assert_ne!(r.roots[0].value, r.roots[1].value);
    }

    #[test]
    fn factor_examples() {
        let c = ctx(7, 6);
        let d = data(&c, 14, 2, PadicElem::one(&c), PadicElem::zero(&c), 0);
        let t = EtaLocal::trivial(&c);
        assert!(euler_like_factor(&d, &PadicElem::one(&c), &t, 1, 1).unwrap().vanishes());
        assert!(matches!(
            euler_like_factor(&d, &PadicElem::one(&c), &t, 1, 2).unwrap(),
            EulerFactor::GaussSumBranch { .. }
        ));
        assert!(euler_like_factor(&d, &PadicElem::one(&c), &t, 2, 2).is_err());
        // crystalline k = 3, α = p: a_p = 2p, ε = 1
        let p7 = PadicElem::from_i64(&c, 7);
        let d = data(&c, 5, 3, p7.mul_int(2), PadicElem::one(&c), 0);
        assert!(euler_like_factor(&d, &p7, &t, 2, 2).unwrap().vanishes());
        let found = classify_trivial_zeros(&d, &t).unwrap();
        let js: Vec<u32> = found.iter().map(|f| f.j).collect();
        assert_eq!(js, vec![1, 2]);
        assert_eq!(found.iter().map(|f| f.key()).collect::<Vec<_>>(), brute_force_zeros(&d, &t).unwrap());
    }

    #[test]
    fn semistable_sign() {
        let c = ctx(5, 4);
        let t = EtaLocal::trivial(&c);
        let plus = data(&c, 15, 2, PadicElem::one(&c), PadicElem::zero(&c), 0);
        assert_eq!(classify_trivial_zeros(&plus, &t).unwrap().len(), 1);
        let minus = data(&c, 15, 2, PadicElem::from_i64(&c, -1), PadicElem::zero(&c), 0);
        assert!(classify_trivial_zeros(&minus, &t).unwrap().is_empty());
        assert!(brute_force_zeros(&minus, &t).unwrap().is_empty());
        // twisting by the quadratic character mod 3 (η(5) = -1) moves the zero
        let eta = DirichletChar::parse("quad3").unwrap();
        let tw = twist_reduce(&minus, &eta).unwrap();
        let el = EtaLocal::from_char(&eta, &c).unwrap();
        let direct: Vec<_> = classify_trivial_zeros(&minus, &el).unwrap().iter().map(|f| (f.j, f.m)).collect();
        let reduced: Vec<_> = classify_trivial_zeros(&tw, &t).unwrap().iter().map(|f| (f.j, f.m)).collect();
        assert_eq!(direct, vec![(1, 1)]);
        assert_eq!(direct, reduced);
    }

    #[test]
    fn validation_errors() {
        let c = ctx(5, 4);
        let one = PadicElem::one(&c);
        assert!(NewformLocalData::new(&c, 15, 2, one.clone(), one.clone(), 0, None).is_err());
        assert!(NewformLocalData::new(&c, 15, 2, PadicElem::from_i64(&c, 5), PadicElem::zero(&c), 0, None).is_err());
        assert!(NewformLocalData::new(&c, 11, 2, one.clone(), PadicElem::zero(&c), 0, None).is_err());
        // α = 1 for k = 2 would violate the Weil bound
        assert!(NewformLocalData::new(&c, 11, 2, PadicElem::from_i64(&c, 6), one, 0, None).is_err());
    }

    #[test]
    fn twist_properties() {
        let c = ctx(7, 6);
        let d = data(&c, 11, 3, PadicElem::from_i64(&c, 3), PadicElem::from_i64(&c, -1), 0);
        let t = twist_reduce(&d, &DirichletChar::trivial(1)).unwrap();
        assert_eq!(t.a_p, d.a_p);
        assert_eq!(t.eps_p, d.eps_p);
        for eta in primitive_chars(9).into_iter().filter(|e| e.realizable_at(7)) {
            let tw = twist_reduce(&d, &eta).unwrap();
            let back = twist_reduce(&tw, &eta.conj()).unwrap();
            assert_eq!(back.a_p, d.a_p);
            assert_eq!(back.eps_p, d.eps_p);
            let el = EtaLocal::from_char(&eta, &c).unwrap();
            for r in hecke_roots(&d).unwrap().roots {
                let a = &r.value * &el.eta_p;
                let [c0, c1, _] = tw.hecke_poly();
                assert!((&(&(&a * &a) + &(&c1 * &a)) + &c0).is_zero());
            }
        }
    }

    #[test]
    fn j_table_matches_eisenstein_quotient() {
        // j = E4^3 / Δ with exact integer series
        let n = 18usize;
        let sigma3 = |m: usize| (1..=m).filter(|d| m.is_multiple_of(*d)).map(|d| BigInt::from(d).pow(3)).sum::<BigInt>();
        let mut e4 = vec![BigInt::from(0); n + 1];
        e4[0] = BigInt::from(1);
        for (m, c) in e4.iter_mut().enumerate().skip(1) {
            *c = sigma3(m) * 240;
        }
        let mul = |a: &[BigInt], b: &[BigInt]| {
            let mut c = vec![BigInt::from(0); n + 1];
            for i in 0..=n {
                for j in 0..=n - i {
                    c[i + j] += &a[i] * &b[j];
                }
            }
            c
        };
        let e4c = mul(&mul(&e4, &e4), &e4);
        // Δ/q = Π (1 - q^m)^24
        let mut delta = vec![BigInt::from(0); n + 1];
        delta[0] = BigInt::from(1);
        for m in 1..=n {
            for _ in 0..24 {
                for i in (m..=n).rev() {
                    let t = delta[i - m].clone();
                    delta[i] -= t;
                }
            }
        }
        // q j = E4^3 / (Δ/q)
        let mut qj = vec![BigInt::from(0); n + 1];
        for i in 0..=n {
            let mut s = e4c[i].clone();
            for k in 1..=i {
                s -= &delta[k] * &qj[i - k];
            }
            qj[i] = s;
        }
        for (i, c) in J_COEFFS.iter().enumerate() {
            assert_eq!(qj[i], BigInt::from(*c), "index {i}");
        }
        assert_eq!(J_COEFFS.iter().sum::<u128>(), J_CHECKSUM);
    }

    #[test]
    fn tate_round_trip() {
        for p in [5u64, 7, 11] {
            let c = make_context(p, 1, 20).unwrap();
            for v in 1..=4i64 {
                let j0 = PadicElem::from_ratio(&c, 2 + p as i64 * v, 3).shift(-v) + PadicElem::from_i64(&c, 17);
                let q = tate_parameter(&j0).unwrap();
                assert_eq!(q.val(), v);
                let back = j_invariant(&q).unwrap();
                assert!(back.agreement(&j0) - j0.val() >= 18, "p={p} v={v}");
            }
            let q = PadicElem::from_i64(&c, p as i64);
            assert!(fm_linvariant(&q).unwrap().is_zero());
        }
        let c = make_context(7, 1, 20).unwrap();
        assert!(tate_parameter(&PadicElem::from_i64(&c, 3)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let j: NewformLocalDataJson = serde_json::from_str(
            r#"{"level":11,"weight":2,"p":5,"a_p":1,"eps_p":1,"ord_p_cond_eps":0,"label":"11.2.a.a"}"#,
        )
        .unwrap();
        let d = NewformLocalData::from_json(&j, 12).unwrap();
        assert_eq!(d.to_json(), j);
        let z: NewformLocalDataJson = serde_json::from_str(
            r#"{"level":7,"weight":3,"p":5,"a_p":0,"eps_p":{"zeta":[2,1]},"ord_p_cond_eps":0}"#,
        )
        .unwrap();
        let d = NewformLocalData::from_json(&z, 12).unwrap();
        assert_eq!(d.eps_p, PadicElem::from_i64(d.ctx(), -1));
    }
}
