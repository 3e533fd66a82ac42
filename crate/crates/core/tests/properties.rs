//! Property tests for the arithmetic layers and the round trips built on them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use lpadic::classical::bernoulli;
use lpadic::dirichlet::{primitive_chars, DirichletChar};
use lpadic::gamma::gamma_p;
use lpadic::harness::load_fixtures;
use lpadic::modular::{fm_linvariant, j_invariant, tate_parameter, twist_reduce, NewformLocalData};
use lpadic::dirichlet::gauss_sum;
use lpadic::padic::{hensel_root, iwasawa_log, padic_exp, rational_valuation, teichmuller};
use lpadic::{make_context, PadicContext, PadicElem};

fn ctx_49() -> PadicContext {
    // 48 | 7^2 - 1, so ζ_48 lives in the unramified quadratic extension
    make_context(7, 48, 20).unwrap()
}

fn elem(ctx: &PadicContext, coords: &[i64], shift: i64) -> PadicElem {
    PadicElem::from_coords(ctx, coords).shift(shift)
}

fn coords() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1_000_000i64..1_000_000, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in coords(), b in coords(), c in coords(), sa in 0i64..3, sb in 0i64..3) {
        let ctx = ctx_49();
        prop_assert_eq!(ctx.f(), 2);
        let (a, b, c) = (elem(&ctx, &a, sa), elem(&ctx, &b, sb), elem(&ctx, &c, 0));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !b.is_zero() {
            let q = (&a * &b).checked_div(&b).unwrap();
            prop_assert_eq!(q, a.clone());
        }
    }

    #[test]
    fn product_precision_bound(a in coords(), b in coords(), sa in -2i64..3, sb in -2i64..3, pa in 3i64..15, pb in 3i64..15) {
        let ctx = ctx_49();
        let x = elem(&ctx, &a, sa);
        let y = elem(&ctx, &b, sb);
        let (x, y) = (x.with_prec(x.val() + pa), y.with_prec(y.val() + pb));
        let xy = &x * &y;
        prop_assert!(xy.prec() >= (x.prec() + y.val()).min(y.prec() + x.val()));
    }

    #[test]
    fn teichmuller_lifts(a in coords()) {
        let ctx = ctx_49();
        let x = elem(&ctx, &a, 0);
        prop_assume!(x.is_unit());
        let t = teichmuller(&x).unwrap();
        prop_assert_eq!(t.pow(48), PadicElem::one(&ctx));
        prop_assert_eq!(t.residue(), x.residue());
    }

    #[test]
    fn log_is_a_homomorphism(a in coords(), b in coords()) {
        let ctx = ctx_49();
        let (u, v) = (elem(&ctx, &a, 0), elem(&ctx, &b, 0));
        prop_assume!(u.is_unit() && v.is_unit());
        let lhs = iwasawa_log(&(&u * &v)).unwrap();
        let rhs = &iwasawa_log(&u).unwrap() + &iwasawa_log(&v).unwrap();
        prop_assert!(lhs.agreement(&rhs) >= 19, "{} vs {}", lhs, rhs);
        // exp inverts log on 1 + pZ_q
        let w = &PadicElem::one(&ctx) + &u.shift(1);
        prop_assert!(padic_exp(&iwasawa_log(&w).unwrap()).unwrap().agreement(&w) >= 19);
    }

    #[test]
    fn hensel_square_roots(c in 1i64..1_000_000, p in prop::sample::select(vec![5u64, 7, 11, 13])) {
        let ctx = make_context(p, 1, 20).unwrap();
        let seed = (1..p as i64).find(|s| (s * s - c).rem_euclid(p as i64) == 0);
        prop_assume!(seed.is_some());
        let c = PadicElem::from_i64(&ctx, c);
        let poly = [c.neg_ref(), PadicElem::zero(&ctx), PadicElem::one(&ctx)];
        let r = hensel_root(&poly, &PadicElem::from_i64(&ctx, seed.unwrap())).unwrap();
        prop_assert_eq!(&r * &r, c);
    }

    #[test]
    fn gamma_on_random_arguments(a in any::<i64>(), d in 1i64..1000, b in any::<i64>()) {
        let p = 7i64;
        prop_assume!(d % p != 0);
        let ctx = make_context(7, 1, 15).unwrap();
        let x = PadicElem::from_ratio(&ctx, a / 2, d);
        let one = PadicElem::one(&ctx);
        let gx = gamma_p(&x).unwrap();
        // Γ_p(x+1) = -x Γ_p(x) on units, -Γ_p(x) on pZ_p
        let g1 = gamma_p(&(&x + &one)).unwrap();
        let want = if x.val() == 0 { (&x * &gx).neg_ref() } else { gx.neg_ref() };
        prop_assert!(g1.agreement(&want) >= 13);
        // Γ_p(x) Γ_p(1-x) = (-1)^{x0}, x0 in 1..=p the residue of x
        let refl = &gx * &gamma_p(&(&one - &x)).unwrap();
        let x0 = match x.to_bigint_mod(1).to_string().parse::<i64>().unwrap().rem_euclid(p) {
            0 => p,
            r => r,
        };
        let sign = PadicElem::from_i64(&ctx, if x0 % 2 == 0 { 1 } else { -1 });
        prop_assert!(refl.agreement(&sign) >= 13);
        // 1-Lipschitz
        let y = PadicElem::from_i64(&ctx, b / 2);
        let gy = gamma_p(&y).unwrap();
        prop_assert!(gx.agreement(&gy) >= x.agreement(&y).min(13));
    }

    #[test]
    fn frobenius_is_a_ring_map(a in coords(), b in coords()) {
        let ctx = ctx_49();
        let (a, b) = (elem(&ctx, &a, 0), elem(&ctx, &b, 0));
        prop_assert_eq!((&a * &b).frobenius(), &a.frobenius() * &b.frobenius());
        prop_assert_eq!(a.frobenius().frobenius_inv(), a.clone());
        prop_assert_eq!(a.frobenius().frobenius(), a);
    }

    #[test]
    fn rationals_embed_faithfully(num in -10_000_000i64..10_000_000, den in 1i64..100_000) {
        let ctx = make_context(5, 4, 20).unwrap();
        let x = PadicElem::from_ratio(&ctx, num, den);
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        if num != 0 {
            prop_assert_eq!(x.val(), rational_valuation(&q, 5));
        }
        prop_assert_eq!(x.mul_int(den), PadicElem::from_i64(&ctx, num));
        prop_assert!(x.is_rational());
    }

    #[test]
    fn transfer_between_precisions(a in coords(), s in 0i64..4) {
        let lo = ctx_49();
        let hi = make_context(7, 48, 25).unwrap();
        let x = elem(&lo, &a, s);
        let y = x.transfer(&hi).unwrap();
        prop_assert_eq!(y.prec(), x.prec());
        prop_assert_eq!(y.transfer(&lo).unwrap(), x.clone());
        prop_assert_eq!(elem(&hi, &a, s).transfer(&lo).unwrap(), x);
    }

    #[test]
    fn json_round_trip(a in coords(), s in -3i64..3) {
        let ctx = ctx_49();
        let x = elem(&ctx, &a, s);
        let back = PadicElem::from_json(&ctx, &x.to_json()).unwrap();
        prop_assert_eq!(back.prec(), x.prec());
        prop_assert_eq!(back, x);
    }

    #[test]
    fn gamma_functional_equation(n in 1i64..5_000) {
        let ctx = make_context(7, 1, 15).unwrap();
        let x = PadicElem::from_i64(&ctx, n);
        let g = gamma_p(&x).unwrap();
        let g1 = gamma_p(&PadicElem::from_i64(&ctx, n + 1)).unwrap();
        let want = if n % 7 == 0 { g.neg_ref() } else { (&x * &g).neg_ref() };
        prop_assert_eq!(g1, want);
    }

    #[test]
    fn tate_round_trip(v in 1i64..4, u in 1i64..1_000_000, p in prop::sample::select(vec![3u64, 5, 7, 11])) {
        prop_assume!(u % p as i64 != 0);
        let ctx = make_context(p, 1, 20).unwrap();
        let q = PadicElem::from_i64(&ctx, u).shift(v);
        let j = j_invariant(&q).unwrap();
        prop_assert_eq!(j.val(), -v);
        let q2 = tate_parameter(&j).unwrap();
        // q is recovered to the relative precision j carries
        prop_assert!(q2.agreement(&q) - v >= j.prec() - j.val() - 1, "{} vs {}", q2, q);
        let l = fm_linvariant(&q).unwrap();
        prop_assert_eq!(fm_linvariant(&(&q * &q)).unwrap(), l);
    }
}

#[test]
fn character_labels_round_trip() {
    for n in 1..=40u64 {
        for eta in DirichletChar::all(n) {
            let back = DirichletChar::parse(&eta.label()).unwrap();
            assert_eq!(back.label(), eta.label());
            assert!(eta.mul(&eta.conj()).is_trivial(), "{}", eta.label());
            assert_eq!(eta.conj().conj().label(), eta.label());
        }
    }
}

#[test]
fn characters_are_multiplicative() {
    let ctx = make_context(13, 12 * 35, 10).unwrap();
    for n in [12u64, 35, 7, 9] {
        for eta in DirichletChar::all(n).into_iter().filter(|e| e.realizable_at(13)) {
            for a in -20i64..20 {
                for b in 1i64..15 {
                    let lhs = eta.eval(a * b, &ctx).unwrap();
                    let rhs = &eta.eval(a, &ctx).unwrap() * &eta.eval(b, &ctx).unwrap();
                    assert_eq!(lhs, rhs, "{} at {a}*{b}", eta.label());
                }
            }
        }
    }
}

#[test]
fn von_staudt_clausen() {
    for k in 1..=40usize {
        let mut s = bernoulli(2 * k);
        for p in 2..=(2 * k as u64 + 1) {
            let prime = (2..p).all(|d| p % d != 0);
            if prime && (2 * k as u64).is_multiple_of(p - 1) {
                s += BigRational::new(BigInt::one(), BigInt::from(p));
            }
        }
        assert!(s.is_integer(), "B_{}", 2 * k);
        assert!(bernoulli(2 * k + 1).is_zero());
    }
}

#[test]
fn twisting_is_invertible_on_fixtures() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/newform_fixtures.json")).unwrap();
    let fixtures = load_fixtures(&text).unwrap();
    assert!(fixtures.len() >= 10);
    for fx in &fixtures {
        let p = fx.data.p;
        let d = NewformLocalData::from_json(&fx.data, 20).unwrap();
        for n in [3u64, 4, 7, 8, 9] {
            for eta in primitive_chars(n).into_iter().filter(|e| n % p != 0 && e.realizable_at(p)) {
                let Ok(tw) = twist_reduce(&d, &eta) else { continue };
                let back = twist_reduce(&tw, &eta.conj()).unwrap();
                assert_eq!(back.a_p, d.a_p, "{:?} ⊗ {}", fx.data.label, eta.label());
                assert_eq!(back.eps_p, d.eps_p);
                assert_eq!(back.case(), d.case());
            }
        }
    }
}

#[test]
fn character_orthogonality_and_gauss_twists() {
    for n in 3..=15u64 {
        let p = [5u64, 7, 11, 13, 17]
            .into_iter()
            .find(|&p| n % p != 0 && DirichletChar::all(n).iter().all(|e| e.realizable_at(p)))
            .unwrap();
        let ctx = lpadic::harness::context_for(n, p, 12).unwrap();
        for eta in DirichletChar::all(n) {
            let sum = (0..n as i64).fold(PadicElem::zero(&ctx), |acc, a| &acc + &eta.eval(a, &ctx).unwrap());
            assert_eq!(sum.is_zero(), !eta.is_trivial(), "{}", eta.label());
            if !eta.is_primitive() || eta.is_trivial() {
                continue;
            }
            let tau = gauss_sum(&eta, &ctx).unwrap();
            let zeta = ctx.zeta_pow(ctx.n() / n);
            for b in (1..n as i64).filter(|&b| num_integer::gcd(b, n as i64) == 1) {
                let twisted = (1..n as i64).fold(PadicElem::zero(&ctx), |acc, a| {
                    &acc + &(&eta.eval(a, &ctx).unwrap() * &zeta.pow(a * b))
                });
                assert_eq!(twisted, &eta.conj().eval(b, &ctx).unwrap() * &tau, "{} b={b}", eta.label());
            }
        }
    }
}
