//! Finite fields `F_{q^f}` built from a deterministic modulus search, roots of
//! unity of order `p`, and evaluation of cyclotomic elements at a prime.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{big_residue, factorize, is_prime, mod_inv, mod_mul, mod_pow, MAX_Q};
use crate::cyc::{CycElem, RadicalWord};
use crate::error::{Error, Result};

/// Polynomial coefficients over `Z/q`, constant term first.
type Poly = Vec<u64>;

fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_sub(a: &[u64], b: &[u64], q: u64) -> Poly {
    let len = a.len().max(b.len());
    let mut out: Poly = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + q - y) % q
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_mul(a: &[u64], b: &[u64], q: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mod_mul(x, y, q)) % q;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` by a nonzero `b`.
fn poly_rem(mut a: Poly, b: &[u64], q: u64) -> Poly {
    trim(&mut a);
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], q).expect("nonzero leading coefficient");
    while a.len() > db {
        let top = a.len() - 1;
        let c = mod_mul(a[top], lead_inv, q);
        let shift = top - db;
        for (k, &bk) in b.iter().enumerate() {
            a[shift + k] = (a[shift + k] + q - mod_mul(c, bk, q)) % q;
        }
        trim(&mut a);
    }
    a
}

fn poly_gcd(mut a: Poly, mut b: Poly, q: u64) -> Poly {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(a, &b, q);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], q: u64) -> Poly {
    let mut acc: Poly = vec![1];
    let mut b = poly_rem(base.to_vec(), m, q);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(poly_mul(&acc, &b, q), m, q);
        }
        b = poly_rem(poly_mul(&b, &b, q), m, q);
        e >>= 1;
    }
    acc
}

/// Distinct-degree test: `g` monic of degree `f` is irreducible iff
/// `gcd(t^{q^i} - t, g) = 1` for `i < f` and `t^{q^f} = t mod g`.
fn is_irreducible(g: &[u64], q: u64) -> bool {
    let f = g.len() - 1;
    let t: Poly = vec![0, 1];
    let mut h = poly_rem(t.clone(), g, q);
    for i in 1..=f {
        h = poly_powmod(&h, q, g, q);
        let diff = poly_sub(&h, &t, q);
        if i < f {
            let gg = poly_gcd(g.to_vec(), diff, q);
            if gg.len() > 1 {
                return false;
            }
        } else {
            return diff.is_empty();
        }
    }
    unreachable!()
}

/// An element of `F_{q^f}`: `f` coefficients in `[0, q)`, constant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FfElem(Vec<u64>);

impl FfElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// The value as a residue when it lies in the prime field.
    pub fn as_prime_field(&self) -> Option<u64> {
        if self.0[1..].iter().all(|&c| c == 0) {
            Some(self.0[0])
        } else {
            None
        }
    }
}

impl fmt::Display for FfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "{c}*t")?,
                (_, 1) => write!(f, "t^{i}")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FqfField {
    q: u64,
    f: usize,
    /// Monic, length `f + 1`, constant term first.
    modulus: Vec<u64>,
}

/// Builds `F_{q^f}`.
///
/// The modulus is the first irreducible monic `t^f + a_{f-1} t^{f-1} + ... + a_0`
/// in lexicographic order of `(a_0, a_1, ..., a_{f-1})`. For `f > 1` the
/// candidates with `a_0 = 0` are skipped since `t` divides them.
pub fn build_field(q: u64, f: usize) -> Result<FqfField> {
    if q >= MAX_Q || !is_prime(q) {
        return Err(Error::InvalidArgument(format!("q = {q} is not a prime below 2^31")));
    }
    if f == 0 {
        return Err(Error::InvalidArgument("field degree must be positive".into()));
    }
    if f == 1 {
        return Ok(FqfField { q, f, modulus: vec![0, 1] });
    }
    // digits[0] = a_0 is the most significant position of the counter
    let mut digits = vec![0u64; f];
    digits[0] = 1;
    loop {
        let mut g = digits.clone();
        g.push(1);
        if is_irreducible(&g, q) {
            return Ok(FqfField { q, f, modulus: g });
        }
        let mut pos = f - 1;
        loop {
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
            if pos == 0 {
                return Err(Error::Internal(format!("no irreducible of degree {f} over F_{q}")));
            }
            pos -= 1;
        }
    }
}

impl FqfField {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// `q^f`.
    pub fn order(&self) -> BigUint {
        BigUint::from(self.q).pow(self.f as u32)
    }

    /// Human form of the modulus, e.g. `t^2+t+1`.
    pub fn modulus_string(&self) -> String {
        let mut parts = Vec::new();
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            parts.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        parts.join("+")
    }

    pub fn zero(&self) -> FfElem {
        FfElem(vec![0; self.f])
    }

    pub fn one(&self) -> FfElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> FfElem {
        let mut v = vec![0; self.f];
        v[0] = c % self.q;
        FfElem(v)
    }

    pub fn from_i64(&self, c: i64) -> FfElem {
        self.from_u64(crate::arith::residue(c, self.q))
    }

    /// Element from an explicit coefficient list (shorter lists are padded).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FfElem> {
        if coeffs.len() > self.f {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a degree-{} field",
                coeffs.len(),
                self.f
            )));
        }
        let mut v: Vec<u64> = coeffs.iter().map(|c| c % self.q).collect();
        v.resize(self.f, 0);
        Ok(FfElem(v))
    }

    /// The generator `t` of the extension (equal to 0 when `f = 1`).
    pub fn gen(&self) -> FfElem {
        if self.f == 1 {
            return self.zero();
        }
        self.from_coeffs(&[0, 1]).expect("f >= 2")
    }

    /// Element whose base-`q` digits `c_0 + c_1 q + ...` equal `idx`.
    pub fn element_from_index(&self, mut idx: u64) -> FfElem {
        let mut v = vec![0; self.f];
        for c in v.iter_mut() {
            *c = idx % self.q;
            idx /= self.q;
        }
        FfElem(v)
    }

    pub fn add(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + y) % self.q).collect())
    }

    pub fn sub(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + self.q - y) % self.q).collect())
    }

    pub fn neg(&self, a: &FfElem) -> FfElem {
        self.sub(&self.zero(), a)
    }

    pub fn scale(&self, c: u64, a: &FfElem) -> FfElem {
        FfElem(a.0.iter().map(|&x| mod_mul(x, c, self.q)).collect())
    }

    pub fn mul(&self, a: &FfElem, b: &FfElem) -> FfElem {
        let q = self.q;
        if self.f == 1 {
            return FfElem(vec![mod_mul(a.0[0], b.0[0], q)]);
        }
        let f = self.f;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mod_mul(x, y, q)) % q;
            }
        }
        // t^f = -(a_0 + ... + a_{f-1} t^{f-1})
        for top in (f..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for k in 0..f {
                let sub = mod_mul(c, self.modulus[k], q);
                prod[top - f + k] = (prod[top - f + k] + q - sub) % q;
            }
        }
        prod.truncate(f);
        FfElem(prod)
    }

    pub fn pow(&self, a: &FfElem, e: &BigUint) -> FfElem {
        if self.f == 1 {
            let r = BigUint::from(a.0[0]).modpow(e, &BigUint::from(self.q));
            return self.from_u64(big_residue(&r.into(), self.q));
        }
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &FfElem, e: u64) -> FfElem {
        if self.f == 1 {
            return self.from_u64(mod_pow(a.0[0], e, self.q));
        }
        self.pow(a, &BigUint::from(e))
    }

    pub fn inv(&self, a: &FfElem) -> Result<FfElem> {
        if a.is_zero() {
            return Err(Error::DivideByZero);
        }
        if self.f == 1 {
            return Ok(self.from_u64(mod_inv(a.0[0], self.q).expect("nonzero residue")));
        }
        let e = self.order() - 2u32;
        Ok(self.pow(a, &e))
    }

    pub fn frobenius(&self, a: &FfElem) -> FfElem {
        self.pow_u64(a, self.q)
    }
}

/// A deterministic element of exact order `p`: the first `h^{(q^f-1)/p} != 1`
/// over nonzero `h` in ascending index order.
pub fn mu_p_root(field: &FqfField, p: u64) -> Result<FfElem> {
    let qf1 = field.order() - 1u32;
    let pb = BigUint::from(p);
    if p < 2 || !(&qf1 % &pb).is_zero() {
        return Err(Error::NoRoot { q: field.q(), f: field.degree(), p });
    }
    let e = qf1 / pb;
    let one = field.one();
    let mut idx = 1u64;
    loop {
        let w = field.pow(&field.element_from_index(idx), &e);
        if w != one {
            return Ok(w);
        }
        idx += 1;
    }
}

/// Reduces elements of `Z[xi, zeta]` into `F_{q^f}` at a fixed `(xi_bar, zeta_bar)`.
///
/// Elements of the ring with `xi` of order `m` are accepted whenever `m | n`;
/// their `xi` maps to `xi_bar^{n/m}`.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    field: &'a FqfField,
    p: u64,
    n: u64,
    xi_bar: u64,
    zeta_pows: Vec<FfElem>,
}

fn has_order(x: u64, n: u64, q: u64) -> bool {
    if mod_pow(x, n, q) != 1 {
        return false;
    }
    factorize(n).iter().all(|&(l, _)| mod_pow(x, n / l, q) != 1)
}

impl<'a> Evaluator<'a> {
    pub fn new(
        field: &'a FqfField,
        p: u64,
        n: u64,
        xi_bar: u64,
        zeta_bar: &FfElem,
        zeta_pin: Option<u64>,
    ) -> Result<Self> {
        let q = field.q();
        if n == 0 || !has_order(xi_bar % q, n, q) {
            return Err(Error::InvalidArgument(format!(
                "xi_bar = {xi_bar} does not have order {n} modulo {q}"
            )));
        }
        let one = field.one();
        if *zeta_bar == one || field.pow_u64(zeta_bar, p) != one {
            return Err(Error::InvalidArgument(format!("zeta_bar = {zeta_bar} does not have order {p}")));
        }
        if let Some(e) = zeta_pin {
            if field.from_u64(mod_pow(xi_bar, e, q)) != *zeta_bar {
                return Err(Error::PinMismatch { pin: e });
            }
        }
        let mut zeta_pows = Vec::with_capacity(p as usize);
        let mut acc = one;
        for _ in 0..p {
            zeta_pows.push(acc.clone());
            acc = field.mul(&acc, zeta_bar);
        }
        Ok(Evaluator { field, p, n, xi_bar: xi_bar % q, zeta_pows })
    }

    pub fn field(&self) -> &FqfField {
        self.field
    }

    pub fn zeta_bar(&self) -> &FfElem {
        &self.zeta_pows[1]
    }

    /// `zeta_bar^j` for `j mod p`.
    pub fn zeta_pow(&self, j: u64) -> &FfElem {
        &self.zeta_pows[(j % self.p) as usize]
    }

    pub fn eval_elem(&self, e: &CycElem) -> Result<FfElem> {
        let ring = e.ring();
        if ring.p != self.p || self.n % ring.n != 0 {
            return Err(Error::RingMismatch(format!(
                "element ring (p={}, n={}) does not embed in (p={}, n={})",
                ring.p, ring.n, self.p, self.n
            )));
        }
        let q = self.field.q();
        let scale = self.n / ring.n;
        let xi = mod_pow(self.xi_bar, scale, q);
        // collect the F_q coefficient of each zeta power first
        let mut by_j = vec![0u64; self.p as usize];
        for (i, j, c) in e.terms() {
            let term = mod_mul(big_residue(c, q), mod_pow(xi, i, q), q);
            by_j[j as usize] = (by_j[j as usize] + term) % q;
        }
        let mut acc = self.field.zero();
        for (j, &s) in by_j.iter().enumerate() {
            if s != 0 {
                acc = self.field.add(&acc, &self.field.scale(s, &self.zeta_pows[j]));
            }
        }
        Ok(acc)
    }

    /// Product of the factor values raised to their exponents.
    pub fn eval_word(&self, w: &RadicalWord) -> Result<FfElem> {
        let mut acc = self.field.one();
        for (index, (e, k)) in w.factors().iter().enumerate() {
            let mut v = self.eval_elem(e)?;
            if v.is_zero() {
                return Err(Error::ZeroFactor { index });
            }
            if *k < 0 {
                v = self.field.inv(&v)?;
            }
            acc = self.field.mul(&acc, &self.field.pow_u64(&v, k.unsigned_abs()));
        }
        Ok(acc)
    }
}
