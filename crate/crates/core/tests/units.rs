use cycsplit::arith::{is_prime, mod_pow, primitive_root};
use cycsplit::cyc::{classify_unit, real_unit_eps, real_unit_varpi, vandiver_unit, CycRing, UnitClass};
use cycsplit::symbols::SplitContext;

/// Odd primes `q = 1 mod n` with `q != p`, skipping the first `skip`.
fn prime_1_mod(n: u64, p: u64, skip: usize) -> u64 {
    (1..).map(|t| t * n + 1).filter(|&q| q > 2 && is_prime(q) && q != p).nth(skip).unwrap()
}

fn context_of_order(p: u64, n: u64, skip: usize) -> SplitContext {
    let q = prime_1_mod(n, p, skip);
    let xi = mod_pow(primitive_root(q), (q - 1) / n, q);
    SplitContext::from_xi(p, q, xi, None).unwrap()
}

#[test]
fn real_unit_reflections_hold_in_residue_fields() {
    for p in [5u64, 7, 11, 13] {
        let ring = CycRing::zeta_only(p).unwrap();
        for skip in 0..4 {
            let ctx = context_of_order(p, p, skip);
            let field = ctx.field();
            for qi in 0..ctx.num_primes() {
                let ev = ctx.evaluator(qi).unwrap();
                for a in 1..p {
                    let e = |w| ev.eval_word(&w).unwrap();
                    assert_eq!(
                        e(real_unit_eps(ring, p - a).unwrap()),
                        e(real_unit_eps(ring, a).unwrap()),
                        "eps p={p} a={a}"
                    );
                    assert_eq!(
                        e(real_unit_varpi(ring, p - a).unwrap()),
                        field.neg(&e(real_unit_varpi(ring, a).unwrap())),
                        "varpi p={p} a={a}"
                    );
                }
            }
        }
    }
}

#[test]
fn vandiver_units_vanish_exactly_when_classified_zero() {
    let mut zeros = 0;
    for p in [3u64, 5, 7] {
        for d in 1..=6u64 {
            if d % p == 0 {
                continue;
            }
            for r in 0..=2u32 {
                let n = d * p.pow(r);
                let ring = CycRing::new(p, n).unwrap();
                for skip in 0..3 {
                    let ctx = context_of_order(p, n, skip);
                    for qi in 0..ctx.num_primes() {
                        let ev = ctx.evaluator(qi).unwrap();
                        for k in 0..p {
                            let value = ev.eval_elem(&vandiver_unit(ring, k)).unwrap();
                            let class = classify_unit(p, d, r, k);
                            assert_eq!(value.is_zero(), class == UnitClass::Zero, "p={p} d={d} r={r} k={k}");
                            if class == UnitClass::RationalTwo {
                                assert_eq!(value, ctx.field().from_u64(2));
                            }
                            zeros += usize::from(value.is_zero());
                        }
                    }
                }
            }
        }
    }
    assert!(zeros > 0);
}
