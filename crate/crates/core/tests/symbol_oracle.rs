//! Symbols recomputed by a deliberately naive evaluator: plain polynomial
//! arithmetic modulo the field's modulus, powers by repeated squaring over
//! the bits of `kappa`, and `zeta_bar^j` by repeated multiplication.

use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cycsplit::arith::{is_prime, primes_in};
use cycsplit::cyc::{vandiver_unit, CycElem, CycRing, RadicalWord};
use cycsplit::kummer::{family_thm1, is_totally_split};
use cycsplit::scenarios::{verify_corollary, Corollary, Policy};
use cycsplit::symbols::{build_context, residue_symbol, SplitContext};
use cycsplit::Error;

struct Naive {
    q: u128,
    g: Vec<u128>,
}

impl Naive {
    fn new(ctx: &SplitContext) -> Self {
        Naive { q: ctx.q() as u128, g: ctx.field().modulus().iter().map(|&c| c as u128).collect() }
    }
    fn f(&self) -> usize {
        self.g.len() - 1
    }
    fn mul(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        let f = self.f();
        let mut prod = vec![0u128; 2 * f];
        for i in 0..f {
            for j in 0..f {
                prod[i + j] = (prod[i + j] + a[i] * b[j]) % self.q;
            }
        }
        for top in (f..2 * f).rev() {
            let c = prod[top];
            prod[top] = 0;
            for k in 0..f {
                prod[top - f + k] = (prod[top - f + k] + self.q * self.q - c * self.g[k] % self.q) % self.q;
            }
        }
        prod.truncate(f);
        prod
    }
    fn constant(&self, c: u128) -> Vec<u128> {
        let mut v = vec![0; self.f()];
        v[0] = c % self.q;
        v
    }
    fn pow(&self, a: &[u128], e: &BigUint) -> Vec<u128> {
        let mut acc = self.constant(1);
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
}

fn reduce(c: &BigInt, q: u128) -> u128 {
    let r = c % BigInt::from(q);
    let r = if r < BigInt::from(0) { r + BigInt::from(q) } else { r };
    u128::try_from(r).unwrap()
}

/// `mu` at prime `qi`, or `None` if a factor vanishes.
fn oracle_mu(ctx: &SplitContext, qi: usize, w: &RadicalWord) -> Option<u64> {
    let nv = Naive::new(ctx);
    let zeta: Vec<u128> = ctx.zetas()[qi].coeffs().iter().map(|&c| c as u128).collect();
    let p = ctx.p() as usize;
    let mut zpow = vec![nv.constant(1)];
    for j in 1..p {
        zpow.push(nv.mul(&zpow[j - 1], &zeta));
    }
    let order = BigUint::from(ctx.q()).pow(ctx.f() as u32);
    let mut acc = nv.constant(1);
    for (e, k) in w.factors() {
        let scale = ctx.n() / e.ring().n;
        let mut val = vec![0u128; nv.f()];
        for (i, j, c) in e.terms() {
            let mut xi = 1u128;
            for _ in 0..i * scale {
                xi = xi * ctx.xi_bar() as u128 % nv.q;
            }
            let coef = reduce(c, nv.q) * xi % nv.q;
            for (t, z) in zpow[j as usize].iter().enumerate() {
                val[t] = (val[t] + coef * z) % nv.q;
            }
        }
        if val.iter().all(|&x| x == 0) {
            return None;
        }
        let exp = if *k >= 0 {
            BigUint::from(*k as u64)
        } else {
            (&order - 2u32) * BigUint::from(k.unsigned_abs())
        };
        acc = nv.mul(&acc, &nv.pow(&val, &exp));
    }
    let kappa = (&order - 1u32) / BigUint::from(ctx.p());
    let x = nv.pow(&acc, &kappa);
    (0..p).find(|&j| zpow[j] == x).map(|j| j as u64)
}

fn random_word(rng: &mut ChaCha8Rng, ring: CycRing, u: i64) -> RadicalWord {
    let mut factors = Vec::new();
    for _ in 0..rng.gen_range(1..4) {
        let e = match rng.gen_range(0..3) {
            0 => vandiver_unit(ring, rng.gen_range(0..ring.p)),
            1 => CycElem::int_embed(ring, if rng.gen_bool(0.5) { u } else { rng.gen_range(2..50) }),
            _ => CycElem::make(
                ring,
                (0..3).map(|_| {
                    (rng.gen_range(0..ring.n as i64), rng.gen_range(0..ring.p as i64), rng.gen_range(-9i64..=9))
                }),
            ),
        };
        if !e.is_zero_table() {
            factors.push((e, rng.gen_range(-3i64..=3)));
        }
    }
    RadicalWord::new(factors).unwrap()
}

fn random_context(rng: &mut ChaCha8Rng) -> SplitContext {
    loop {
        let p = [3u64, 5, 7, 11][rng.gen_range(0..4)];
        let q = loop {
            let q = rng.gen_range(2..400);
            if is_prime(q) {
                break q;
            }
        };
        let u = rng.gen_range(-300i64..300);
        let v = rng.gen_range(-300i64..300);
        if let Ok(ctx) = build_context(p, q, u, v) {
            return ctx;
        }
    }
}

#[test]
fn symbols_agree_with_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..300 {
        let ctx = random_context(&mut rng);
        let ring = CycRing::new(ctx.p(), ctx.n()).unwrap();
        let (u, _) = ctx.uv().unwrap();
        for qi in 0..ctx.num_primes() {
            let w = random_word(&mut rng, ring, u);
            let lib = residue_symbol(&ctx, qi, &w);
            match oracle_mu(&ctx, qi, &w) {
                Some(mu) => {
                    assert_eq!(lib, Ok(mu), "{w} at {:?}", ctx.summary());
                    checked += 1;
                }
                None => assert!(matches!(lib, Err(Error::ZeroFactor { .. }))),
            }
        }
    }
    assert!(checked > 250);
}

#[test]
fn split_reports_agree_with_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nonsplit = 0;
    for _ in 0..40 {
        let u = rng.gen_range(1i64..1000);
        let v = 5 * rng.gen_range(1i64..200);
        for q in primes_in(7, 120) {
            let Ok(ctx) = build_context(5, q, u, v) else { continue };
            let fam = family_thm1(&ctx).unwrap();
            let rep = is_totally_split(&ctx, &fam).unwrap();
            for (qi, row) in rep.matrix.iter().enumerate() {
                for (g, mu) in row.iter().enumerate() {
                    assert_eq!(*mu, oracle_mu(&ctx, qi, &fam.generators[g].word));
                }
            }
            nonsplit += usize::from(!rep.totally_split);
        }
    }
    assert!(nonsplit > 0);
}

/// Every condition in a C4 report agrees with symbols recomputed by the oracle.
#[test]
fn corollary_conditions_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut reports = 0;
    let mut compared = 0;
    while reports < 30 {
        let p = [5u64, 7][rng.gen_range(0..2)];
        let u = rng.gen_range(1i64..500);
        let v = p as i64 * rng.gen_range(1i64..100);
        let phi = cycsplit::arith::cyclotomic_value(2 * p, &BigInt::from(u), &BigInt::from(v));
        let (fs, _) = cycsplit::arith::trial_factor(&phi, 5000);
        for (q, _) in fs {
            let Ok(rep) = verify_corollary(Corollary::C4, p, u, v, q, &Policy::RegularAutomatic) else { continue };
            let ctx = build_context(p, q, u, v).unwrap();
            let ring = CycRing::zeta_only(p).unwrap();
            let sym = |e: CycElem| oracle_mu(&ctx, 0, &RadicalWord::from(e));
            let su = sym(CycElem::int_embed(ring, u)).unwrap();
            let show = |m: Option<u64>| m.map_or("undefined".to_string(), |x| x.to_string());
            for c in &rep.conditions {
                let d = &c.description;
                let observed = if d.starts_with("sym(v)") {
                    show(sym(CycElem::int_embed(ring, v)))
                } else if d.starts_with("sym(p)") {
                    show(sym(CycElem::int_embed(ring, p as i64)))
                } else if let Some(rest) = d.strip_prefix("-sym(1-zeta^") {
                    let j: i64 = rest.split(')').next().unwrap().parse().unwrap();
                    show(sym(CycElem::make(ring, [(0, 0, 1), (0, j, -1)])).map(|m| (p - m) % p))
                } else if d.starts_with("q = 1") {
                    (q % (p * p)).to_string()
                } else {
                    continue;
                };
                assert_eq!(c.observed, observed, "{d}");
                compared += 1;
                if d.contains("= sym(u)") {
                    assert_eq!(c.expected, su.to_string());
                }
            }
            reports += 1;
        }
    }
    assert!(compared > 30 * 4);
}
