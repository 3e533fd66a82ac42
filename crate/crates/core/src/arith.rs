//! Small integer helpers.

use num_integer::Integer;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (q, _)| acc / q * (q - 1))
}

pub fn powmod(a: u64, e: u64, m: u64) -> u64 {
    crate::padic::field::powmod_u64(a, e, m)
}

/// Multiplicative order of `a` modulo `n` (`gcd(a, n) = 1`).
pub fn multiplicative_order(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 1;
    }
    let phi = euler_phi(n);
    let mut ord = phi;
    for (q, _) in factorize(phi) {
        while ord.is_multiple_of(q) && powmod(a, ord / q, n) == 1 {
            ord /= q;
        }
    }
    ord
}

/// Exponent of the group `(Z/n)^*`.
pub fn unit_group_exponent(n: u64) -> u64 {
    let mut e = 1;
    for (q, k) in factorize(n) {
        let part = if q == 2 {
            match k {
                1 => 1,
                2 => 2,
                _ => 1 << (k - 2),
            }
        } else {
            (q - 1) * q.pow(k - 1)
        };
        e = lcm(e, part);
    }
    e
}

/// Smallest primitive root modulo an odd prime power or 2, 4.
pub fn primitive_root(n: u64) -> u64 {
    let phi = euler_phi(n);
    let fs = factorize(phi);
    (1..n)
        .find(|&g| gcd(g, n) == 1 && fs.iter().all(|&(q, _)| powmod(g, phi / q, n) != 1))
        .expect("modulus has a primitive root")
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    out.sort_unstable();
    out
}

pub fn vp_u64(mut n: u64, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// `v_p(n!)` by Legendre's formula.
pub fn vp_factorial(n: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = p;
    while q <= n {
        v += n / q;
        match q.checked_mul(p) {
            Some(x) => q = x,
            None => break,
        }
    }
    v
}
