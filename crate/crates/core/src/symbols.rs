//! Arithmetic contexts at a prime `q` and p-th power residue symbols.
//!
//! A context fixes `xi_bar`, the image of `xi` at the prime `(q, u xi - v)`
//! of `Z[xi]`, the residue field `F_{q^f}` of the primes above it in
//! `Q(xi, zeta)`, and one image `zeta_bar` of `zeta` per such prime. Symbols
//! are returned additively: `mu` in `[0, p)` stands for `zeta^mu`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::{
    big_residue, decompose_n, is_prime, kappa, mod_inv, mod_mul, mod_pow, mult_order, primitive_root, residue,
    MAX_Q,
};
use crate::cyc::RadicalWord;
use crate::error::{Error, Result};
use crate::resfield::{build_field, mu_p_root, Evaluator, FfElem, FqfField};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitContext {
    p: u64,
    q: u64,
    uv: Option<(i64, i64)>,
    n: u64,
    d: u64,
    r: u32,
    f: usize,
    kappa: BigUint,
    xi_bar: u64,
    field: FqfField,
    coset_reps: Vec<u64>,
    zetas: Vec<FfElem>,
    zeta_pin: Option<u64>,
}

/// Smallest positive representatives of the cosets of `<q mod p>` in `(Z/p)^x`.
pub fn coset_representatives(p: u64, q: u64) -> Vec<u64> {
    let qm = q % p;
    let mut seen = vec![false; p as usize];
    let mut reps = Vec::new();
    for m in 1..p {
        if seen[m as usize] {
            continue;
        }
        reps.push(m);
        let mut x = m;
        while !seen[x as usize] {
            seen[x as usize] = true;
            x = x * qm % p;
        }
    }
    reps
}

/// Exponent `e` with `zeta = xi^e` when `p | n`: `e = c p^{r-1} mod n` where
/// `c = 1 mod p^r` and `c = 0 mod d`.
pub fn pin_exponent(n: u64, p: u64) -> Option<u64> {
    let pp = decompose_n(n, p);
    if pp.r == 0 {
        return None;
    }
    let pr = p.pow(pp.r);
    let c = pp.d * mod_inv(pp.d % pr, pr).expect("gcd(d, p) = 1") % n;
    Some(c * p.pow(pp.r - 1) % n)
}

fn check_pq(p: u64, q: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidArgument(format!("p = {p} is not an odd prime")));
    }
    if q >= MAX_Q || !is_prime(q) {
        return Err(Error::InvalidArgument(format!("q = {q} is not a prime below 2^31")));
    }
    Ok(())
}

impl SplitContext {
    /// Context for the prime `(q, u xi - v)`, so `xi_bar = v / u mod q`.
    pub fn build(p: u64, q: u64, u: i64, v: i64) -> Result<Self> {
        check_pq(p, q)?;
        if q == p || residue(u, q) == 0 || residue(v, q) == 0 {
            return Err(Error::DividesPuv { q });
        }
        if u.gcd(&v) != 1 {
            return Err(Error::InvalidArgument(format!("gcd({u}, {v}) != 1")));
        }
        let xi = mod_mul(residue(v, q), mod_inv(residue(u, q), q).expect("q does not divide u"), q);
        Self::from_xi(p, q, xi, Some((u, v)))
    }

    /// Context without a `(u, v)` pair: `xi_bar = g^{(q-1)/n * s}` with `g`
    /// the least primitive root and `s` the `index`-th unit mod `n`.
    pub fn build_free(p: u64, q: u64, n: u64, index: usize) -> Result<Self> {
        check_pq(p, q)?;
        if n <= 2 {
            return Err(Error::BadN { n, q, reason: "n must exceed 2".into() });
        }
        if (q - 1) % n != 0 {
            return Err(Error::BadN { n, q, reason: "n does not divide q - 1".into() });
        }
        if q == p {
            return Err(Error::DividesPuv { q });
        }
        let s = (1..n)
            .filter(|s| s.gcd(&n) == 1)
            .nth(index)
            .ok_or_else(|| Error::InvalidArgument(format!("xi index {index} out of range for n = {n}")))?;
        let g = primitive_root(q);
        let xi = mod_pow(g, (q - 1) / n * s, q);
        Self::from_xi(p, q, xi, None)
    }

    /// Context from an explicit `xi_bar`; `n` is its order mod `q`.
    pub fn from_xi(p: u64, q: u64, xi_bar: u64, uv: Option<(i64, i64)>) -> Result<Self> {
        check_pq(p, q)?;
        if q == p {
            return Err(Error::DividesPuv { q });
        }
        let xi_bar = xi_bar % q;
        let n = mult_order(xi_bar as i64, q)?;
        let pp = decompose_n(n, p);
        let f = if pp.r >= 1 { 1 } else { mult_order(q as i64, p)? as usize };
        let kappa = kappa(q, f as u64, p)?;
        let field = build_field(q, f)?;
        let (coset_reps, zetas, zeta_pin) = match pin_exponent(n, p) {
            Some(e) => (vec![1], vec![field.from_u64(mod_pow(xi_bar, e, q))], Some(e)),
            None => {
                let w = mu_p_root(&field, p)?;
                let reps = coset_representatives(p, q);
                let zetas = reps.iter().map(|&m| field.pow_u64(&w, m)).collect();
                (reps, zetas, None)
            }
        };
        Ok(SplitContext {
            p,
            q,
            uv,
            n,
            d: pp.d,
            r: pp.r,
            f,
            kappa,
            xi_bar,
            field,
            coset_reps,
            zetas,
            zeta_pin,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn uv(&self) -> Option<(i64, i64)> {
        self.uv
    }
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn d(&self) -> u64 {
        self.d
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn f(&self) -> usize {
        self.f
    }
    pub fn kappa(&self) -> &BigUint {
        &self.kappa
    }
    pub fn xi_bar(&self) -> u64 {
        self.xi_bar
    }
    pub fn field(&self) -> &FqfField {
        &self.field
    }
    /// One `zeta_bar` per prime above `q`.
    pub fn zetas(&self) -> &[FfElem] {
        &self.zetas
    }
    pub fn zeta_pin(&self) -> Option<u64> {
        self.zeta_pin
    }
    pub fn num_primes(&self) -> usize {
        self.zetas.len()
    }

    pub fn evaluator(&self, qi: usize) -> Result<Evaluator<'_>> {
        let zeta = self
            .zetas
            .get(qi)
            .ok_or_else(|| Error::InvalidArgument(format!("prime index {qi} out of range")))?;
        self.evaluator_at(zeta)
    }

    /// Evaluator at an arbitrary order-`p` root, used to change the Frobenius base.
    pub fn evaluator_at(&self, zeta_bar: &FfElem) -> Result<Evaluator<'_>> {
        Evaluator::new(&self.field, self.p, self.n, self.xi_bar, zeta_bar, self.zeta_pin)
    }

    pub fn summary(&self) -> ContextSummary {
        ContextSummary {
            p: self.p,
            q: self.q,
            u: self.uv.map(|(u, _)| u.to_string()),
            v: self.uv.map(|(_, v)| v.to_string()),
            n: self.n,
            d: self.d,
            r: self.r,
            f: self.f,
            kappa: self.kappa.to_string(),
            xi_bar: self.xi_bar,
            modulus: self.field.modulus_string(),
            coset_reps: self.coset_reps.clone(),
            zetas: self.zetas.iter().map(|z| z.to_string()).collect(),
            zeta_pin: self.zeta_pin,
        }
    }
}

/// Free-function form of [`SplitContext::build`].
pub fn build_context(p: u64, q: u64, u: i64, v: i64) -> Result<SplitContext> {
    SplitContext::build(p, q, u, v)
}

/// Free-function form of [`SplitContext::build_free`].
pub fn build_context_free(p: u64, q: u64, n: u64, index: usize) -> Result<SplitContext> {
    SplitContext::build_free(p, q, n, index)
}

/// Report record of a context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextSummary {
    pub p: u64,
    pub q: u64,
    pub u: Option<String>,
    pub v: Option<String>,
    pub n: u64,
    pub d: u64,
    pub r: u32,
    pub f: usize,
    pub kappa: String,
    pub xi_bar: u64,
    pub modulus: String,
    pub coset_reps: Vec<u64>,
    pub zetas: Vec<String>,
    pub zeta_pin: Option<u64>,
}

/// `mu` with `value^kappa = zeta_bar^mu`, by scanning the `p` candidates.
pub fn discrete_mu(ctx: &SplitContext, ev: &Evaluator<'_>, value: &FfElem) -> Result<u64> {
    let x = ctx.field.pow(value, &ctx.kappa);
    (0..ctx.p).find(|&j| *ev.zeta_pow(j) == x).ok_or(Error::NotInMuP)
}

pub fn residue_symbol(ctx: &SplitContext, qi: usize, w: &RadicalWord) -> Result<u64> {
    let ev = ctx.evaluator(qi)?;
    discrete_mu(ctx, &ev, &ev.eval_word(w)?)
}

/// Symbol with `zeta_bar` replaced by an arbitrary root of order `p`, used
/// both for evaluation and as the logarithm base.
pub fn residue_symbol_at(ctx: &SplitContext, zeta_bar: &FfElem, w: &RadicalWord) -> Result<u64> {
    let ev = ctx.evaluator_at(zeta_bar)?;
    discrete_mu(ctx, &ev, &ev.eval_word(w)?)
}

/// Symbols of `w` at every prime above `q`.
pub fn residue_symbols(ctx: &SplitContext, w: &RadicalWord) -> Result<Vec<u64>> {
    (0..ctx.num_primes()).map(|qi| residue_symbol(ctx, qi, w)).collect()
}

/// `kappa mod p`, the same at every prime.
pub fn symbol_of_zeta(ctx: &SplitContext) -> u64 {
    (&ctx.kappa % ctx.p).to_u64().expect("below p")
}

pub fn symbol_of_int(ctx: &SplitContext, qi: usize, a: &BigInt) -> Result<u64> {
    let ev = ctx.evaluator(qi)?;
    let x = big_residue(a, ctx.q);
    if x == 0 {
        return Err(Error::ZeroFactor { index: 0 });
    }
    discrete_mu(ctx, &ev, &ctx.field.from_u64(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyc::{vandiver_unit, CycElem, CycRing};
    use crate::arith::norm_u_plus_v_zeta;

    fn u_times(ctx: &SplitContext, k: u64) -> RadicalWord {
        let ring = CycRing::new(ctx.p(), ctx.n()).unwrap();
        let u = ctx.uv().unwrap().0;
        RadicalWord::new(vec![(CycElem::int_embed(ring, u), 1), (vandiver_unit(ring, k), 1)]).unwrap()
    }

    #[test]
    fn worked_contexts() {
        let c = build_context(3, 5, 19, 18).unwrap();
        assert_eq!((c.n(), c.d(), c.r(), c.xi_bar(), c.f()), (4, 4, 0, 2, 2));
        assert_eq!(c.kappa(), &BigUint::from(8u32));
        assert_eq!(c.num_primes(), 1);
        assert_eq!(c.field().modulus_string(), "t^2+t+1");
        assert_eq!(residue_symbol(&c, 0, &u_times(&c, 1)).unwrap(), 0);
        assert_eq!(symbol_of_zeta(&c), 2);

        let c = build_context(3, 13, 19, 18).unwrap();
        assert_eq!((c.n(), c.d(), c.r(), c.xi_bar(), c.f()), (3, 1, 1, 3, 1));
        assert_eq!(c.kappa(), &BigUint::from(4u32));
        assert_eq!(c.zeta_pin(), Some(1));
        assert_eq!(c.zetas(), &[c.field().from_u64(3)]);
        let ev = c.evaluator(0).unwrap();
        let ring = CycRing::new(3, 3).unwrap();
        assert_eq!(ev.eval_word(&u_times(&c, 1)).unwrap(), c.field().from_u64(8));
        assert_eq!(residue_symbol(&c, 0, &u_times(&c, 1)).unwrap(), 0);
        assert_eq!(residue_symbol(&c, 0, &vandiver_unit(ring, 1).into()).unwrap(), 1);
        assert_eq!(symbol_of_int(&c, 0, &BigInt::from(2)).unwrap(), 1);
        assert_eq!(symbol_of_int(&c, 0, &BigInt::from(19)).unwrap(), 2);
        assert_eq!(symbol_of_int(&c, 0, &BigInt::from(14)).unwrap(), 0);
        assert_eq!(symbol_of_int(&c, 0, &BigInt::from(26)), Err(Error::ZeroFactor { index: 0 }));
        assert_eq!(symbol_of_zeta(&c), 1);

        assert_eq!(build_context(3, 3, 19, 18), Err(Error::DividesPuv { q: 3 }));
        assert_eq!(build_context(5, 3, 1, 9), Err(Error::DividesPuv { q: 3 }));
    }

    #[test]
    fn free_contexts() {
        let c = build_context_free(5, 11, 5, 0).unwrap();
        assert_eq!(c.xi_bar(), 4);
        assert_eq!(c.n(), 5);
        assert!(matches!(build_context_free(5, 11, 3, 0), Err(Error::BadN { .. })));
        assert!(matches!(build_context_free(5, 11, 2, 0), Err(Error::BadN { .. })));
        let xis: Vec<u64> = (0..4).map(|i| build_context_free(5, 11, 5, i).unwrap().xi_bar()).collect();
        assert_eq!(xis, vec![4, 5, 9, 3]);
        assert!(build_context_free(5, 11, 5, 4).is_err());
    }

    #[test]
    fn pins_and_cosets() {
        assert_eq!(pin_exponent(3, 3), Some(1));
        assert_eq!(pin_exponent(10, 5), Some(6));
        assert_eq!(pin_exponent(4, 3), None);
        // n = 12 = 4 * 3: c = 4 (1 mod 3, 0 mod 4)
        assert_eq!(pin_exponent(12, 3), Some(4));
        // n = 18 = 2 * 9: c = 10, e = 30 mod 18 = 12
        assert_eq!(pin_exponent(18, 3), Some(12));
        assert_eq!(coset_representatives(7, 2), vec![1, 3]);
        assert_eq!(coset_representatives(7, 29), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(coset_representatives(5, 2), vec![1]);
        for (p, q) in [(5u64, 11u64), (7, 2), (7, 11), (11, 3), (13, 5)] {
            let f = mult_order(q as i64, p).unwrap() as usize;
            assert_eq!(coset_representatives(p, q).len(), (p as usize - 1) / f);
        }
    }

    #[test]
    fn primes_above_q_cover_all_roots() {
        // p = 7, q = 2: f = 3, two primes; the orbits of the two roots cover mu_7 \ {1}
        let c = SplitContext::from_xi(7, 2, 1, None).unwrap();
        assert_eq!((c.f(), c.num_primes()), (3, 2));
        let field = c.field();
        let mut seen = Vec::new();
        for z in c.zetas() {
            let mut x = z.clone();
            for _ in 0..c.f() {
                assert!(!seen.contains(&x));
                seen.push(x.clone());
                x = field.frobenius(&x);
            }
            assert_eq!(&x, z);
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn pinned_root_matches_xi_power() {
        for (p, q, u, v) in [(3u64, 7u64, 1i64, 2i64), (5, 11, 1, 3), (5, 31, 2, 7), (3, 19, 1, 7)] {
            let c = build_context(p, q, u, v).unwrap();
            if let Some(e) = c.zeta_pin() {
                assert_eq!(c.zetas()[0], c.field().from_u64(mod_pow(c.xi_bar(), e, q)));
                assert_eq!(c.field().pow_u64(&c.zetas()[0], p), c.field().one());
                assert_ne!(c.zetas()[0], c.field().one());
            }
        }
    }

    #[test]
    fn norm_identity_fixed_vector() {
        let c = build_context(5, 7, 2, 3).unwrap();
        let mut acc = c.field().one();
        let ev = c.evaluator(0).unwrap();
        for j in 1..5 {
            acc = c.field().mul(&acc, &ev.eval_word(&u_times(&c, j)).unwrap());
        }
        let rhs = norm_u_plus_v_zeta(5, &BigInt::from(2), &BigInt::from(3));
        assert_eq!(rhs, BigInt::from(55));
        assert_eq!(acc, c.field().from_u64(6));
    }

    #[test]
    fn frobenius_base_invariance() {
        let c = SplitContext::from_xi(7, 2, 1, None).unwrap();
        let ring = CycRing::new(7, 1).unwrap();
        for a in 1..7 {
            let w: RadicalWord = CycElem::make(ring, [(0, 0, 1), (0, a, 1)]).into();
            for (qi, z) in c.zetas().iter().enumerate() {
                let base = residue_symbol(&c, qi, &w);
                let moved = residue_symbol_at(&c, &c.field().frobenius(z), &w);
                assert_eq!(base, moved);
            }
        }
    }
}
