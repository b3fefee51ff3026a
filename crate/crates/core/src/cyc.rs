//! Exact elements of `Z[xi, zeta]`, the Galois action on `zeta`, the unit
//! families built from them, and formal radical words.
//!
//! An element is a table of integer coefficients indexed by the exponent
//! pair `(i mod n, j mod p)` of the monomial `xi^i * zeta^j`. Tables are not
//! reduced modulo the cyclotomic relations, so two different tables may
//! denote the same element of the ring; nothing downstream needs equality in
//! the ring, only evaluation in residue fields.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{decompose_n, is_prime, residue};
use crate::error::{Error, Result};

/// The ambient ring `Z[xi, zeta]` with `xi` of order `n` and `zeta` of order `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CycRing {
    pub p: u64,
    pub n: u64,
    pub d: u64,
    pub r: u32,
}

impl CycRing {
    pub fn new(p: u64, n: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("p = {p} is not an odd prime")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let pp = decompose_n(n, p);
        Ok(CycRing { p, n, d: pp.d, r: pp.r })
    }

    /// Ring with `xi = 1`, for elements that only involve `zeta`.
    pub fn zeta_only(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycElem {
    ring: CycRing,
    coeffs: BTreeMap<(u64, u64), BigInt>,
}

impl CycElem {
    pub fn zero(ring: CycRing) -> Self {
        CycElem { ring, coeffs: BTreeMap::new() }
    }

    pub fn int_embed(ring: CycRing, c: impl Into<BigInt>) -> Self {
        Self::monomial(ring, c, 0, 0)
    }

    pub fn one(ring: CycRing) -> Self {
        Self::int_embed(ring, 1)
    }

    /// `c * xi^i * zeta^j`, exponents reduced on entry.
    pub fn monomial(ring: CycRing, c: impl Into<BigInt>, i: i64, j: i64) -> Self {
        let mut e = Self::zero(ring);
        e.add_term(residue(i, ring.n), residue(j, ring.p), c.into());
        e
    }

    pub fn xi(ring: CycRing) -> Self {
        Self::monomial(ring, 1, 1, 0)
    }

    pub fn zeta(ring: CycRing) -> Self {
        Self::monomial(ring, 1, 0, 1)
    }

    /// Builds an element from `(i, j, c)` terms; repeated exponents add up.
    pub fn make<C: Into<BigInt>>(ring: CycRing, terms: impl IntoIterator<Item = (i64, i64, C)>) -> Self {
        let mut e = Self::zero(ring);
        for (i, j, c) in terms {
            e.add_term(residue(i, ring.n), residue(j, ring.p), c.into());
        }
        e
    }

    fn add_term(&mut self, i: u64, j: u64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry((i, j)).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn ring(&self) -> CycRing {
        self.ring
    }

    /// `(i, j, c)` triples in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, u64, &BigInt)> {
        self.coeffs.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// True when the table is empty. A nonempty table can still be zero in the ring.
    pub fn is_zero_table(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!(
                "(p={}, n={}) vs (p={}, n={})",
                self.ring.p, self.ring.n, other.ring.p, other.ring.n
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (&(i, j), c) in &other.coeffs {
            out.add_term(i, j, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let (n, p) = (self.ring.n, self.ring.p);
        let mut out = Self::zero(self.ring);
        for (&(i1, j1), c1) in &self.coeffs {
            for (&(i2, j2), c2) in &other.coeffs {
                out.add_term((i1 + i2) % n, (j1 + j2) % p, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        CycElem {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.ring);
        for _ in 0..k {
            acc = acc.try_mul(self).expect("same ring");
        }
        acc
    }

    /// The automorphism `s_k: zeta -> zeta^k`, fixing `xi`.
    pub fn galois_zeta(&self, k: i64) -> Result<Self> {
        let p = self.ring.p;
        let k = residue(k, p);
        if k == 0 {
            return Err(Error::ZeroUnitIndex { k: k as i64, p });
        }
        let mut out = Self::zero(self.ring);
        for (&(i, j), c) in &self.coeffs {
            out.add_term(i, j * k % p, c.clone());
        }
        Ok(out)
    }
}

impl std::ops::Add for &CycElem {
    type Output = CycElem;
    fn add(self, rhs: &CycElem) -> CycElem {
        self.try_add(rhs).expect("ring mismatch in CycElem addition")
    }
}

impl std::ops::Sub for &CycElem {
    type Output = CycElem;
    fn sub(self, rhs: &CycElem) -> CycElem {
        self.try_sub(rhs).expect("ring mismatch in CycElem subtraction")
    }
}

impl std::ops::Mul for &CycElem {
    type Output = CycElem;
    fn mul(self, rhs: &CycElem) -> CycElem {
        self.try_mul(rhs).expect("ring mismatch in CycElem multiplication")
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, i: u64, j: u64) -> fmt::Result {
    let mut parts = Vec::new();
    match i {
        0 => {}
        1 => parts.push("xi".to_string()),
        _ => parts.push(format!("xi^{i}")),
    }
    match j {
        0 => {}
        1 => parts.push("zeta".to_string()),
        _ => parts.push(format!("zeta^{j}")),
    }
    write!(f, "{}", parts.join("*"))
}

/// Canonical text form, accepted back by [`crate::expr::parse_element`].
impl fmt::Display for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (idx, (&(i, j), c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            if c.is_negative() {
                write!(f, "-")?;
            } else if idx > 0 {
                write!(f, "+")?;
            }
            let constant = i == 0 && j == 0;
            if constant {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_monomial(f, i, j)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Vandiver units and their classification

/// `1 + xi * zeta^k`.
pub fn vandiver_unit(ring: CycRing, k: u64) -> CycElem {
    CycElem::make(ring, [(0, 0, 1), (1, k as i64, 1)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitClass {
    CyclotomicUnit,
    /// A unit times the prime above `p` (of `Z[zeta]` or `Z[zeta_r]`).
    UnitTimesPrimeAboveP,
    Zero,
    RationalTwo,
}

/// What `1 + xi * zeta^k` is when `xi` has order `d * p^r`.
///
/// Writing `xi = psi * zeta_r`, the element is `1 + psi * zeta_r^t` with
/// `t = 1 + k p^(r-1)` (or `1 + psi * zeta^k` when `r = 0`). The zeta part
/// disappears exactly for `(r, k) = (0, 0)` and `(1, p - 1)`, leaving
/// `1 + psi`, which is 2, 0 or a unit according to `d`.
pub fn classify_unit(p: u64, d: u64, r: u32, k: u64) -> UnitClass {
    let only_psi = (r == 0 && k == 0) || (r == 1 && k == p - 1);
    match (only_psi, d) {
        (true, 1) => UnitClass::RationalTwo,
        (true, 2) => UnitClass::Zero,
        (false, 2) => UnitClass::UnitTimesPrimeAboveP,
        _ => UnitClass::CyclotomicUnit,
    }
}

// ---------------------------------------------------------------------------
// radical words

/// A formal product `prod elem_i^{e_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RadicalWord {
    factors: Vec<(CycElem, i64)>,
}

impl RadicalWord {
    pub fn empty() -> Self {
        RadicalWord { factors: Vec::new() }
    }

    pub fn new(factors: Vec<(CycElem, i64)>) -> Result<Self> {
        let mut out = Self::empty();
        for (e, k) in factors {
            out.push(e, k)?;
        }
        Ok(out)
    }

    pub fn single(e: CycElem) -> Result<Self> {
        Self::new(vec![(e, 1)])
    }

    /// Appends `e^k`; a zero exponent is dropped.
    pub fn push(&mut self, e: CycElem, k: i64) -> Result<()> {
        if e.is_zero_table() {
            return Err(Error::InvalidArgument("radical word factor is the zero table".into()));
        }
        if k != 0 {
            self.factors.push((e, k));
        }
        Ok(())
    }

    pub fn factors(&self) -> &[(CycElem, i64)] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        RadicalWord { factors }
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    pub fn pow(&self, k: i64) -> Self {
        if k == 0 {
            return Self::empty();
        }
        RadicalWord {
            factors: self.factors.iter().map(|(e, x)| (e.clone(), x * k)).collect(),
        }
    }

    pub fn galois_zeta(&self, k: i64) -> Result<Self> {
        let factors = self
            .factors
            .iter()
            .map(|(e, x)| Ok((e.galois_zeta(k)?, *x)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RadicalWord { factors })
    }
}

impl fmt::Display for RadicalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (idx, (e, k)) in self.factors.iter().enumerate() {
            if idx > 0 {
                write!(f, "*")?;
            }
            if *k == 1 {
                write!(f, "({e})")?;
            } else {
                write!(f, "({e})^{k}")?;
            }
        }
        Ok(())
    }
}

impl From<CycElem> for RadicalWord {
    fn from(e: CycElem) -> Self {
        RadicalWord::single(e).expect("nonzero element")
    }
}

// ---------------------------------------------------------------------------
// totally real units

/// `zeta^{1/2}` exponent convention: `(1 - a) / 2` read as `(1 - a)(p + 1)/2 mod p`.
pub fn half_exponent(p: u64, a: i64) -> u64 {
    let inv2 = (p + 1) / 2;
    residue((1 - a) * inv2 as i64, p)
}

fn real_unit(ring: CycRing, a: u64, sign: i64) -> Result<RadicalWord> {
    let p = ring.p;
    if a == 0 || a >= p {
        return Err(Error::InvalidArgument(format!("a = {a} outside 1..p-1")));
    }
    if a == 1 {
        return Ok(RadicalWord::empty());
    }
    let shift = half_exponent(p, a as i64);
    RadicalWord::new(vec![
        (CycElem::monomial(ring, 1, 0, shift as i64), 1),
        (CycElem::make(ring, [(0, 0, 1), (0, a as i64, sign)]), 1),
        (CycElem::make(ring, [(0, 0, 1), (0, 1, sign)]), -1),
    ])
}

/// `zeta^{(1-a)/2} (1 + zeta^a) / (1 + zeta)`.
pub fn real_unit_eps(ring: CycRing, a: u64) -> Result<RadicalWord> {
    real_unit(ring, a, 1)
}

/// `zeta^{(1-a)/2} (1 - zeta^a) / (1 - zeta)`.
pub fn real_unit_varpi(ring: CycRing, a: u64) -> Result<RadicalWord> {
    real_unit(ring, a, -1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, n: u64) -> CycRing {
        CycRing::new(p, n).unwrap()
    }

    #[test]
    fn basic_tables() {
        let r = ring(5, 3);
        assert!(CycElem::int_embed(r, 0).is_zero_table());
        let one_plus = CycElem::make(r, [(0, 0, 1), (1, 0, 1)]);
        let one_minus = CycElem::make(r, [(0, 0, 1), (1, 0, -1)]);
        assert_eq!(&one_plus * &one_minus, CycElem::make(r, [(0, 0, 1), (2, 0, -1)]));
        let xi = CycElem::xi(r);
        assert_eq!(&xi * &xi.pow(2), CycElem::one(r));
        assert!(matches!(
            CycElem::one(r).try_add(&CycElem::one(ring(5, 4))),
            Err(Error::RingMismatch(_))
        ));
    }

    #[test]
    fn galois_action() {
        let r = ring(7, 4);
        let z = CycElem::zeta(r);
        assert_eq!(z.galois_zeta(3).unwrap(), CycElem::monomial(r, 1, 0, 3));
        let e = vandiver_unit(r, 1);
        assert_eq!(e.galois_zeta(6).unwrap(), vandiver_unit(r, 6));
        assert!(e.galois_zeta(14).is_err());
        for k in 1..7 {
            for k2 in 1..7 {
                let lhs = e.galois_zeta(k).unwrap().galois_zeta(k2).unwrap();
                assert_eq!(lhs, e.galois_zeta(k * k2 % 7).unwrap());
            }
        }
    }

    #[test]
    fn classification_cases() {
        assert_eq!(classify_unit(7, 5, 0, 3), UnitClass::CyclotomicUnit);
        assert_eq!(classify_unit(7, 2, 0, 2), UnitClass::UnitTimesPrimeAboveP);
        assert_eq!(classify_unit(7, 1, 0, 0), UnitClass::RationalTwo);
        assert_eq!(classify_unit(7, 2, 1, 6), UnitClass::Zero);
        assert_eq!(classify_unit(7, 2, 2, 6), UnitClass::UnitTimesPrimeAboveP);
        assert_eq!(classify_unit(7, 1, 1, 6), UnitClass::RationalTwo);
        assert_eq!(classify_unit(7, 2, 0, 0), UnitClass::Zero);
        for p in [3u64, 5, 7, 11] {
            for d in 1..=6 {
                if d % p == 0 {
                    continue;
                }
                for r in 0..=2 {
                    for k in 1..p {
                        let zero = classify_unit(p, d, r, k) == UnitClass::Zero;
                        assert_eq!(zero, (d, r, k) == (2, 1, p - 1));
                    }
                }
            }
        }
    }

    #[test]
    fn real_unit_words() {
        let r = ring(5, 1);
        assert!(real_unit_eps(r, 1).unwrap().is_empty());
        assert!(real_unit_varpi(r, 1).unwrap().is_empty());
        let w = real_unit_eps(r, 2).unwrap();
        assert_eq!(w.to_string(), "(zeta^2)*(1+zeta^2)*(1+zeta)^-1");
        let w = real_unit_varpi(r, 3).unwrap();
        assert_eq!(w.factors()[0].0, CycElem::monomial(r, 1, 0, 4));
        assert_eq!(w.to_string(), "(zeta^4)*(1-zeta^3)*(1-zeta)^-1");
        assert!(real_unit_eps(r, 5).is_err());
    }

    #[test]
    fn display_forms() {
        let r = ring(3, 4);
        assert_eq!(vandiver_unit(r, 2).to_string(), "1+xi*zeta^2");
        assert_eq!(CycElem::make(r, [(2, 1, -3), (0, 0, -1)]).to_string(), "-1-3*xi^2*zeta");
        assert_eq!(CycElem::zero(r).to_string(), "0");
        let w = RadicalWord::from(vandiver_unit(r, 2)).mul(&RadicalWord::from(vandiver_unit(r, 1)).inv());
        assert_eq!(w.to_string(), "(1+xi*zeta^2)*(1+xi*zeta)^-1");
        assert_eq!(RadicalWord::empty().to_string(), "1");
    }

    #[test]
    fn word_algebra() {
        let r = ring(5, 2);
        let w = RadicalWord::new(vec![(vandiver_unit(r, 1), 2), (CycElem::zeta(r), -1)]).unwrap();
        assert_eq!(w.mul(&RadicalWord::empty()), w);
        assert_eq!(w.inv().inv(), w);
        assert!(RadicalWord::new(vec![(CycElem::zero(r), 1)]).is_err());
    }

    fn small_elem(p: u64, n: u64) -> impl Strategy<Value = CycElem> {
        prop::collection::vec((0..n as i64, 0..p as i64, -4i64..=4), 0..5)
            .prop_map(move |terms| CycElem::make(CycRing::new(p, n).unwrap(), terms))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small_elem(5, 6), b in small_elem(5, 6), c in small_elem(5, 6)) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero_table());
        }

        #[test]
        fn galois_is_multiplicative(a in small_elem(7, 3), b in small_elem(7, 3), k in 1i64..7) {
            let lhs = (&a * &b).galois_zeta(k).unwrap();
            let rhs = &a.galois_zeta(k).unwrap() * &b.galois_zeta(k).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
