//! Exact integer and modular arithmetic.
//!
//! Homogenized cyclotomic values, multiplicative orders, the `n = d * p^r`
//! split, Bernoulli-number regularity tests and small prime utilities.
//! Everything here is a pure function.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest prime accepted as the residue characteristic `q`.
pub const MAX_Q: u64 = 1 << 31;

/// Default upper bound for [`is_regular`].
pub const DEFAULT_REGULARITY_BOUND: u64 = 2000;

/// `n = d * p^r` with `gcd(d, p) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimePower {
    pub n: u64,
    pub d: u64,
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub p: u64,
    pub regular: bool,
    /// Even indices `2k <= p - 3` with `p | numerator(B_2k)`.
    pub irregular_indices: Vec<u64>,
}

// ---------------------------------------------------------------------------
// modular helpers

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128 % m as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// `a mod m` as a non-negative residue, for signed `a`.
pub fn residue(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

pub fn big_residue(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue fits in u64")
}

// ---------------------------------------------------------------------------
// primes, divisors, Mobius

/// Deterministic Miller-Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &sp in &SMALL {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (lo..=hi).filter(|&n| is_prime(n))
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (prime, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= prime;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (prime, _)| acc / prime * (prime - 1))
}

/// Trial division of `|n|` by primes up to `bound`.
///
/// Returns the found prime powers and the unfactored cofactor (1 when the
/// factorization is complete).
pub fn trial_factor(n: &BigInt, bound: u64) -> (Vec<(u64, u32)>, BigUint) {
    let mut rest = n.magnitude().clone();
    let mut found = Vec::new();
    if rest.is_zero() {
        return (found, rest);
    }
    let mut d = 2u64;
    let mut exhausted = false;
    while d <= bound {
        let bd = BigUint::from(d);
        if &bd * &bd > rest {
            exhausted = true;
            break;
        }
        let mut e = 0;
        while (&rest % &bd).is_zero() {
            rest /= &bd;
            e += 1;
        }
        if e > 0 {
            found.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    // no factor up to sqrt(rest): the cofactor is itself prime
    if exhausted && rest > BigUint::one() {
        if let Some(last) = rest.to_u64() {
            found.push((last, 1));
            rest = BigUint::one();
        }
    }
    (found, rest)
}

/// Least primitive root modulo the prime `q`.
pub fn primitive_root(q: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let factors = factorize(q - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&(l, _)| mod_pow(g, (q - 1) / l, q) != 1))
        .expect("every prime has a primitive root")
}

// ---------------------------------------------------------------------------
// cyclotomic values

fn pow_big(b: &BigInt, e: u64) -> BigInt {
    num_traits::pow(b.clone(), e as usize)
}

/// Coefficients of the cyclotomic polynomial `Phi_n(x)`, constant term first.
pub fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    assert!(n >= 1, "cyclotomic_poly needs n >= 1");
    // numerator and denominator of prod (x^e - 1)^{mu(n/e)}
    let mut num: Vec<BigInt> = vec![BigInt::one()];
    let mut dens: Vec<u64> = Vec::new();
    for e in divisors(n) {
        match mobius(n / e) {
            1 => num = poly_mul_binomial(&num, e),
            -1 => dens.push(e),
            _ => {}
        }
    }
    for e in dens {
        num = poly_div_binomial(&num, e);
    }
    num
}

/// `a(x) * (x^e - 1)`.
fn poly_mul_binomial(a: &[BigInt], e: u64) -> Vec<BigInt> {
    let e = e as usize;
    let mut out = vec![BigInt::zero(); a.len() + e];
    for (i, c) in a.iter().enumerate() {
        out[i + e] += c;
        out[i] -= c;
    }
    out
}

/// Exact quotient `a(x) / (x^e - 1)`.
fn poly_div_binomial(a: &[BigInt], e: u64) -> Vec<BigInt> {
    let e = e as usize;
    let deg = a.len() - 1;
    let mut rem: Vec<BigInt> = a.to_vec();
    let mut quot = vec![BigInt::zero(); deg + 1 - e];
    for i in (e..=deg).rev() {
        let c = rem[i].clone();
        quot[i - e] = c.clone();
        rem[i - e] += &c;
        rem[i] = BigInt::zero();
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "division by x^e - 1 not exact");
    quot
}

/// `Phi_n(u, v) = v^phi(n) * Phi_n(u / v)`, exactly.
pub fn cyclotomic_value(n: u64, u: &BigInt, v: &BigInt) -> BigInt {
    assert!(n >= 1, "cyclotomic_value needs n >= 1");
    assert!(!(u.is_zero() && v.is_zero()), "(u, v) = (0, 0)");
    let divs = divisors(n);
    let factors: Vec<(BigInt, i8)> = divs
        .iter()
        .map(|&e| (pow_big(u, e) - pow_big(v, e), mobius(n / e)))
        .filter(|(_, m)| *m != 0)
        .collect();
    if factors.iter().all(|(f, _)| !f.is_zero()) {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (f, m) in factors {
            if m > 0 {
                num *= f;
            } else {
                den *= f;
            }
        }
        debug_assert!((&num % &den).is_zero());
        num / den
    } else {
        homogenized_value(&cyclotomic_poly(n), u, v)
    }
}

/// `sum c_i u^i v^(deg - i)` for a coefficient list with constant term first.
pub fn homogenized_value(coeffs: &[BigInt], u: &BigInt, v: &BigInt) -> BigInt {
    let deg = coeffs.len() - 1;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * pow_big(u, i as u64) * pow_big(v, (deg - i) as u64))
        .sum()
}

/// The norm `(u^p + v^p) / (u + v)` of `u + v*zeta`, computed as the
/// alternating sum so it is defined even when `u + v = 0`.
pub fn norm_u_plus_v_zeta(p: u64, u: &BigInt, v: &BigInt) -> BigInt {
    let neg_v = -v;
    (0..p)
        .map(|i| pow_big(u, p - 1 - i) * pow_big(&neg_v, i))
        .sum()
}

// ---------------------------------------------------------------------------
// orders

/// Multiplicative order of `a` modulo the prime `q`.
pub fn mult_order(a: i64, q: u64) -> Result<u64> {
    let a = residue(a, q);
    if a == 0 {
        return Err(Error::NotCoprime {
            a: a.to_string(),
            q,
        });
    }
    Ok(order_mod(a, q, q - 1))
}

/// Order of `a` in a cyclic group of exponent `group_order`, by stripping
/// prime factors of `group_order` while the power stays 1.
pub fn order_mod(a: u64, modulus: u64, group_order: u64) -> u64 {
    let mut ord = group_order;
    for (l, e) in factorize(group_order) {
        for _ in 0..e {
            if mod_pow(a, ord / l, modulus) == 1 {
                ord /= l;
            } else {
                break;
            }
        }
    }
    ord
}

pub fn decompose_n(n: u64, p: u64) -> PrimePower {
    assert!(n >= 1 && p >= 2);
    let mut d = n;
    let mut r = 0;
    while d % p == 0 {
        d /= p;
        r += 1;
    }
    PrimePower { n, d, r }
}

/// `(q^f - 1) / p`, exactly.
pub fn kappa(q: u64, f: u64, p: u64) -> Result<BigUint> {
    let qf = num_traits::pow(BigUint::from(q), f as usize);
    let m = qf - BigUint::one();
    let bp = BigUint::from(p);
    if !(&m % &bp).is_zero() {
        return Err(Error::NotDivisible { q, f, p });
    }
    Ok(m / bp)
}

// ---------------------------------------------------------------------------
// regularity

fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidArgument(format!("p = {p} is not an odd prime")));
    }
    Ok(())
}

/// Bernoulli numbers `B_0 .. B_m` reduced mod `p`, for `m <= p - 3`.
///
/// Uses `sum_{j=0}^{m} C(m+1, j) B_j = 0` in `Z/p`; every `m + 1` involved
/// is below `p`, and the denominators of `B_j` are prime to `p`.
pub fn bernoulli_mod_p(p: u64, m: u64) -> Vec<u64> {
    assert!(m + 3 <= p || m == 0, "index {m} too large for p = {p}");
    let len = (m + 2) as usize;
    let mut fact = vec![1u64; len + 1];
    for i in 1..=len {
        fact[i] = mod_mul(fact[i - 1], i as u64, p);
    }
    let mut inv_fact = vec![1u64; len + 1];
    inv_fact[len] = mod_inv(fact[len], p).expect("factorial below p is invertible");
    for i in (1..=len).rev() {
        inv_fact[i - 1] = mod_mul(inv_fact[i], i as u64, p);
    }
    let binom = |a: usize, b: usize| mod_mul(fact[a], mod_mul(inv_fact[b], inv_fact[a - b], p), p);

    let mut b = vec![0u64; (m + 1) as usize];
    b[0] = 1;
    for k in 1..=m as usize {
        let mut s = 0u64;
        for (j, &bj) in b.iter().enumerate().take(k) {
            s = (s + mod_mul(binom(k + 1, j), bj, p)) % p;
        }
        let inv = mod_inv((k + 1) as u64, p).expect("k + 1 < p");
        b[k] = (p - mod_mul(s, inv, p)) % p;
    }
    b
}

pub fn is_regular(p: u64) -> Result<RegularityReport> {
    is_regular_bounded(p, DEFAULT_REGULARITY_BOUND)
}

pub fn is_regular_bounded(p: u64, bound: u64) -> Result<RegularityReport> {
    check_odd_prime(p)?;
    if p > bound {
        return Err(Error::OutOfRange { p, bound });
    }
    let irregular_indices = if p < 5 {
        Vec::new()
    } else {
        let b = bernoulli_mod_p(p, p - 3);
        (2..=p - 3)
            .step_by(2)
            .filter(|&k| b[k as usize] == 0)
            .collect::<Vec<_>>()
    };
    Ok(RegularityReport {
        p,
        regular: irregular_indices.is_empty(),
        irregular_indices,
    })
}

// ---------------------------------------------------------------------------
// Minkowski bound

/// `B_p = (4/pi)^((p-1)/2) * (p-1)! / (p-1)^(p-1) * sqrt(p^(p-2))`, kept as a
/// base-10 logarithm so large `p` does not overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinkowskiBound {
    pub p: u64,
    pub log10: f64,
}

impl MinkowskiBound {
    /// The bound as an `f64`; infinite once it exceeds the float range.
    pub fn value(&self) -> f64 {
        10f64.powf(self.log10)
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_scientific(&self, digits: usize) -> String {
        let exp = self.log10.floor();
        let mantissa = 10f64.powf(self.log10 - exp);
        format!("{:.*}e{}", digits.saturating_sub(1), mantissa, exp as i64)
    }
}

pub fn minkowski_bound(p: u64) -> MinkowskiBound {
    assert!(p >= 3, "minkowski_bound needs p >= 3");
    let pf = p as f64;
    let ln_fact: f64 = (2..p).map(|k| (k as f64).ln()).sum();
    let ln_b = (pf - 1.0) / 2.0 * (4.0 / std::f64::consts::PI).ln() + ln_fact
        - (pf - 1.0) * (pf - 1.0).ln()
        + (pf - 2.0) / 2.0 * pf.ln();
    MinkowskiBound {
        p,
        log10: ln_b / std::f64::consts::LN_10,
    }
}

// ---------------------------------------------------------------------------

/// `x` such that `x^p = n`, if one exists (odd `p`, any sign).
pub fn exact_pth_root(n: &BigInt, p: u64) -> Option<BigInt> {
    let root = n.magnitude().nth_root(p as u32);
    if num_traits::pow(root.clone(), p as usize) != *n.magnitude() {
        return None;
    }
    let root = BigInt::from(root);
    Some(if n.is_negative() { -root } else { root })
}
