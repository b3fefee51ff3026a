//! Radical families and their splitting behaviour at the primes above `q`.
//!
//! A prime `Q` unramified in a Kummer p-extension splits totally exactly when
//! every generator of the radical has trivial symbol at `Q`, so the test is a
//! matrix of symbols. A generator that vanishes at `Q` lies outside that
//! setting; it is reported and forces a negative verdict.

use rayon::prelude::*;
use serde::Serialize;

use crate::cyc::{classify_unit, vandiver_unit, CycElem, CycRing, RadicalWord, UnitClass};
use crate::error::{Error, Result};
use crate::symbols::{discrete_mu, ContextSummary, SplitContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "m", rename_all = "snake_case")]
pub enum FamilyLabel {
    Thm1,
    CritM(u64),
    Cj3,
    C2,
    C4,
}

impl std::fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyLabel::Thm1 => write!(f, "thm1"),
            FamilyLabel::CritM(m) => write!(f, "crit_m{m}"),
            FamilyLabel::Cj3 => write!(f, "cj3"),
            FamilyLabel::C2 => write!(f, "c2"),
            FamilyLabel::C4 => write!(f, "c4"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    /// The `k` (or `j`) the generator is indexed by.
    pub index: u64,
    pub word: RadicalWord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadicalFamily {
    pub label: FamilyLabel,
    pub generators: Vec<Generator>,
    /// Indices left out because the element is zero, with the reason.
    pub omitted: Vec<(u64, String)>,
}

fn ctx_ring(ctx: &SplitContext) -> Result<CycRing> {
    CycRing::new(ctx.p(), ctx.n())
}

/// `eps_k / eps_1` with `eps_k = 1 + xi zeta^k`.
fn vandiver_ratio(ring: CycRing, k: u64) -> RadicalWord {
    RadicalWord::new(vec![(vandiver_unit(ring, k), 1), (vandiver_unit(ring, 1), -1)]).expect("nonzero units")
}

fn nonempty(fam: RadicalFamily, what: &str) -> Result<RadicalFamily> {
    if fam.generators.is_empty() {
        return Err(Error::EmptyFamily(what.to_string()));
    }
    Ok(fam)
}

/// `eps_k / eps_1` for `k = 2..p-2`, and `k = p-1` unless `eps_{p-1}` is zero.
pub fn family_thm1(ctx: &SplitContext) -> Result<RadicalFamily> {
    let ring = ctx_ring(ctx)?;
    let p = ctx.p();
    let mut generators: Vec<Generator> =
        (2..p - 1).map(|k| Generator { index: k, word: vandiver_ratio(ring, k) }).collect();
    let mut omitted = Vec::new();
    if classify_unit(p, ctx.d(), ctx.r(), p - 1) == UnitClass::Zero {
        omitted.push((p - 1, format!("1+xi*zeta^{} is zero (d = 2, r = 1)", p - 1)));
    } else {
        generators.push(Generator { index: p - 1, word: vandiver_ratio(ring, p - 1) });
    }
    nonempty(
        RadicalFamily { label: FamilyLabel::Thm1, generators, omitted },
        &format!("thm1 at p = {p}, d = {}, r = {}", ctx.d(), ctx.r()),
    )
}

/// `(1 + xi zeta^k) zeta^{-(k^m mod p)} / ((1 + xi zeta) zeta^{-1})` for `k = 2..p-2`.
pub fn family_crit_m(ctx: &SplitContext, m: i64) -> Result<RadicalFamily> {
    let p = ctx.p();
    if m.rem_euclid(p as i64) == 0 {
        return Err(Error::BadM { m, p });
    }
    if m < 0 {
        return Err(Error::InvalidArgument(format!("m = {m} must be positive")));
    }
    let ring = ctx_ring(ctx)?;
    let zeta = CycElem::zeta(ring);
    let generators = (2..p - 1)
        .map(|k| {
            let km = crate::arith::mod_pow(k, m as u64, p);
            let word = RadicalWord::new(vec![
                (vandiver_unit(ring, k), 1),
                (zeta.clone(), -(km as i64)),
                (vandiver_unit(ring, 1), -1),
                (zeta.clone(), 1),
            ])?;
            Ok(Generator { index: k, word })
        })
        .collect::<Result<Vec<_>>>()?;
    nonempty(
        RadicalFamily { label: FamilyLabel::CritM(m as u64), generators, omitted: Vec::new() },
        &format!("crit_m at p = {p}"),
    )
}

/// `eps_k / eps_1` for `k = 2..p-2`.
pub fn family_cj3(ctx: &SplitContext) -> Result<RadicalFamily> {
    let ring = ctx_ring(ctx)?;
    let p = ctx.p();
    let generators = (2..p - 1).map(|k| Generator { index: k, word: vandiver_ratio(ring, k) }).collect();
    nonempty(
        RadicalFamily { label: FamilyLabel::Cj3, generators, omitted: Vec::new() },
        &format!("cj3 at p = {p}"),
    )
}

/// `1 + zeta^j` for `j = 0..p-2`; `j = 0` is the integer 2.
pub fn family_c2(p: u64) -> Result<RadicalFamily> {
    let ring = CycRing::zeta_only(p)?;
    let generators = (0..p - 1)
        .map(|j| Generator {
            index: j,
            word: CycElem::make(ring, [(0, 0, 1), (0, j as i64, 1)]).into(),
        })
        .collect();
    Ok(RadicalFamily { label: FamilyLabel::C2, generators, omitted: Vec::new() })
}

/// `(1 - zeta^j) / (1 - zeta)` for `j = 2..p-1`.
pub fn family_c4(p: u64) -> Result<RadicalFamily> {
    let ring = CycRing::zeta_only(p)?;
    let one_minus = |j: u64| CycElem::make(ring, [(0, 0, 1), (0, j as i64, -1)]);
    let generators = (2..p)
        .map(|j| Generator {
            index: j,
            word: RadicalWord::new(vec![(one_minus(j), 1), (one_minus(1), -1)]).expect("nonzero"),
        })
        .collect();
    Ok(RadicalFamily { label: FamilyLabel::C4, generators, omitted: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedCell {
    pub q_index: usize,
    pub generator: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    pub context: ContextSummary,
    pub family: String,
    pub generators: Vec<String>,
    pub generator_indices: Vec<u64>,
    /// `matrix[q_index][generator]`, `None` where the generator vanishes.
    pub matrix: Vec<Vec<Option<u64>>>,
    pub totally_split: bool,
    pub omitted: Vec<(u64, String)>,
    pub skipped: Vec<SkippedCell>,
}

impl SplitReport {
    /// First `(q_index, generator, mu)` with `mu != 0`.
    pub fn first_nonzero(&self) -> Option<(usize, usize, u64)> {
        self.matrix.iter().enumerate().find_map(|(qi, row)| {
            row.iter().enumerate().find_map(|(g, mu)| match mu {
                Some(m) if *m != 0 => Some((qi, g, *m)),
                _ => None,
            })
        })
    }
}

/// Fills the symbol matrix of `fam` at every prime above `q`.
pub fn is_totally_split(ctx: &SplitContext, fam: &RadicalFamily) -> Result<SplitReport> {
    let rows: Vec<Result<(Vec<Option<u64>>, Vec<SkippedCell>)>> = (0..ctx.num_primes())
        .into_par_iter()
        .map(|qi| {
            let ev = ctx.evaluator(qi)?;
            let mut row = Vec::with_capacity(fam.generators.len());
            let mut skipped = Vec::new();
            for (g, gen) in fam.generators.iter().enumerate() {
                match ev.eval_word(&gen.word) {
                    Ok(val) => row.push(Some(discrete_mu(ctx, &ev, &val)?)),
                    Err(Error::ZeroFactor { index }) => {
                        row.push(None);
                        skipped.push(SkippedCell {
                            q_index: qi,
                            generator: g,
                            reason: format!("factor {index} vanishes at the prime"),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok((row, skipped))
        })
        .collect();
    let mut matrix = Vec::new();
    let mut skipped = Vec::new();
    for r in rows {
        let (row, s) = r?;
        matrix.push(row);
        skipped.extend(s);
    }
    let totally_split = skipped.is_empty() && matrix.iter().flatten().all(|mu| *mu == Some(0));
    Ok(SplitReport {
        context: ctx.summary(),
        family: fam.label.to_string(),
        generators: fam.generators.iter().map(|g| g.word.to_string()).collect(),
        generator_indices: fam.generators.iter().map(|g| g.index).collect(),
        matrix,
        totally_split,
        omitted: fam.omitted.clone(),
        skipped,
    })
}

/// Row space of vectors over `Z/p`, kept in echelon form.
#[derive(Debug, Clone)]
pub struct RankAccumulator {
    p: u64,
    width: usize,
    /// Echelon rows with their pivot column; pivots are normalized to 1.
    basis: Vec<(usize, Vec<u64>)>,
}

impl RankAccumulator {
    pub fn new(p: u64, width: usize) -> Self {
        RankAccumulator { p, width, basis: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Adds a row, returning whether the rank grew.
    pub fn insert(&mut self, row: &[u64]) -> bool {
        assert_eq!(row.len(), self.width);
        let p = self.p;
        let mut v: Vec<u64> = row.iter().map(|x| x % p).collect();
        for (piv, b) in &self.basis {
            let c = v[*piv];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + p - c * y % p) % p;
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(piv) => {
                let inv = crate::arith::mod_inv(v[piv], p).expect("p prime");
                for x in v.iter_mut() {
                    *x = *x * inv % p;
                }
                // keep the basis fully reduced so later rows see every pivot
                for (_, b) in self.basis.iter_mut() {
                    let c = b[piv];
                    if c != 0 {
                        for (x, y) in b.iter_mut().zip(&v) {
                            *x = (*x + p - c * y % p) % p;
                        }
                    }
                }
                self.basis.push((piv, v));
                true
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub p: u64,
    pub rank: usize,
    pub columns: Vec<u64>,
    pub rows_used: usize,
    pub rows_skipped: usize,
    /// Rank after each context.
    pub trace: Vec<usize>,
    /// Number of trailing contexts that left the rank unchanged.
    pub stable_for: usize,
}

/// Lower bound for the radical rank: the rank mod `p` of the per-prime
/// symbol vectors of the family over all contexts.
///
/// Columns are the generator indices seen in any context; rows missing a
/// column or holding a vanishing generator are not used.
pub fn radical_rank_lower_bound<F>(contexts: &[SplitContext], family: F) -> Result<RankReport>
where
    F: Fn(&SplitContext) -> Result<RadicalFamily> + Sync,
{
    let first = contexts.first().ok_or_else(|| Error::InvalidArgument("no contexts".into()))?;
    let p = first.p();
    if contexts.iter().any(|c| c.p() != p) {
        return Err(Error::InvalidArgument("contexts have different p".into()));
    }
    let reports = contexts
        .par_iter()
        .map(|c| is_totally_split(c, &family(c)?))
        .collect::<Result<Vec<_>>>()?;
    let mut columns: Vec<u64> = reports.iter().flat_map(|r| r.generator_indices.iter().copied()).collect();
    columns.sort_unstable();
    columns.dedup();
    let mut acc = RankAccumulator::new(p, columns.len());
    let (mut used, mut skipped) = (0, 0);
    let mut trace = Vec::with_capacity(reports.len());
    for rep in &reports {
        for row in &rep.matrix {
            let mut full = vec![None; columns.len()];
            for (g, mu) in rep.generator_indices.iter().zip(row) {
                let pos = columns.binary_search(g).expect("column present");
                full[pos] = *mu;
            }
            match full.into_iter().collect::<Option<Vec<u64>>>() {
                Some(vals) => {
                    used += 1;
                    acc.insert(&vals);
                }
                None => skipped += 1,
            }
        }
        trace.push(acc.rank());
    }
    let rank = acc.rank();
    let stable_for = trace.iter().rev().take_while(|&&r| r == rank).count().saturating_sub(1);
    Ok(RankReport { p, rank, columns, rows_used: used, rows_skipped: skipped, trace, stable_for })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{build_context, build_context_free, residue_symbol, symbol_of_zeta};

    #[test]
    fn family_shapes() {
        let c = build_context(3, 5, 19, 18).unwrap();
        let fam = family_thm1(&c).unwrap();
        assert_eq!(fam.generators.len(), 1);
        assert_eq!(fam.generators[0].word.to_string(), "(1+xi*zeta^2)*(1+xi*zeta)^-1");

        let c5 = build_context(5, 11, 1, 3).unwrap();
        let idx: Vec<u64> = family_thm1(&c5).unwrap().generators.iter().map(|g| g.index).collect();
        assert_eq!(idx, vec![2, 3, 4]);
        assert_eq!(family_cj3(&c5).unwrap().generators.len(), 2);
        let c7 = build_context(7, 29, 1, 3).unwrap();
        assert_eq!(family_cj3(&c7).unwrap().generators.len(), 4);

        // p = 3 with xi of order 6: eps_2 = 1 + xi zeta^2 = 0
        let q = 7;
        let c = build_context_free(3, q, 6, 0).unwrap();
        assert_eq!((c.d(), c.r()), (2, 1));
        assert!(matches!(family_thm1(&c), Err(Error::EmptyFamily(_))));
        assert!(matches!(family_cj3(&c), Err(Error::EmptyFamily(_))));

        assert_eq!(family_c2(5).unwrap().generators[0].word.to_string(), "(2)");
        assert_eq!(family_c4(7).unwrap().generators.len(), 5);
        assert_eq!(family_c4(7).unwrap().generators[0].index, 2);
    }

    #[test]
    fn crit_m_generators() {
        let c = build_context(5, 11, 1, 3).unwrap();
        assert_eq!(family_crit_m(&c, 5), Err(Error::BadM { m: 5, p: 5 }));
        let fam = family_crit_m(&c, 2).unwrap();
        let g3 = &fam.generators[1];
        assert_eq!(g3.index, 3);
        assert_eq!(g3.word.factors()[1].1, -4);
        // symbol decomposes additively
        for (qi, _) in c.zetas().iter().enumerate() {
            let sz = symbol_of_zeta(&c);
            for g in &fam.generators {
                let k = g.index;
                let ring = CycRing::new(5, c.n()).unwrap();
                let ek = residue_symbol(&c, qi, &vandiver_unit(ring, k).into()).unwrap();
                let e1 = residue_symbol(&c, qi, &vandiver_unit(ring, 1).into()).unwrap();
                let km = crate::arith::mod_pow(k, 2, 5);
                let expect = (ek + 5 * 5 - km * sz % 5 + 5 - e1 + sz) % 5;
                assert_eq!(residue_symbol(&c, qi, &g.word).unwrap(), expect);
            }
        }
        // m = 1: each generator equals eps_k/eps_1 * zeta^{1-k}
        let fam1 = family_crit_m(&c, 1).unwrap();
        for g in &fam1.generators {
            let ring = CycRing::new(5, c.n()).unwrap();
            let alt = vandiver_ratio(ring, g.index)
                .mul(&RadicalWord::new(vec![(CycElem::zeta(ring), 1 - g.index as i64)]).unwrap());
            assert_eq!(residue_symbol(&c, 0, &g.word).unwrap(), residue_symbol(&c, 0, &alt).unwrap());
        }
    }

    #[test]
    fn worked_split_reports() {
        for q in [5u64, 13] {
            let c = build_context(3, q, 19, 18).unwrap();
            let rep = is_totally_split(&c, &family_thm1(&c).unwrap()).unwrap();
            assert!(rep.totally_split, "q = {q}: {rep:?}");
            assert!(rep.first_nonzero().is_none());
        }
    }

    #[test]
    fn zero_factor_forces_negative_verdict() {
        // q = 2, xi = 1: 1 + xi*zeta^k never vanishes, but 1 + zeta^0 = 2 does
        let c = SplitContext::from_xi(7, 2, 1, None).unwrap();
        let rep = is_totally_split(&c, &family_c2(7).unwrap()).unwrap();
        assert!(!rep.totally_split);
        assert_eq!(rep.skipped.len(), c.num_primes());
        assert!(rep.skipped.iter().all(|s| s.generator == 0));
    }

    #[test]
    fn rank_accumulator() {
        let mut acc = RankAccumulator::new(5, 3);
        assert!(!acc.insert(&[0, 0, 0]));
        assert!(acc.insert(&[1, 2, 3]));
        assert!(!acc.insert(&[2, 4, 6]));
        assert!(acc.insert(&[0, 1, 1]));
        assert!(!acc.insert(&[1, 3, 4]));
        assert!(acc.insert(&[0, 0, 4]));
        assert_eq!(acc.rank(), 3);
        assert!(!acc.insert(&[3, 1, 4]));
    }

    #[test]
    fn rank_bounds() {
        let c = build_context(3, 5, 19, 18).unwrap();
        let rep = radical_rank_lower_bound(&[c], family_thm1).unwrap();
        assert_eq!(rep.rank, 0);

        let ctxs: Vec<SplitContext> = crate::arith::primes_in(11, 400)
            .filter_map(|q| build_context(5, q, 7, 10).ok())
            .collect();
        let rep = radical_rank_lower_bound(&ctxs, family_thm1).unwrap();
        assert!(rep.rank <= rep.columns.len());
        assert!(rep.trace.windows(2).all(|w| w[0] <= w[1]));
        let half = radical_rank_lower_bound(&ctxs[..ctxs.len() / 2], family_thm1).unwrap();
        assert!(half.rank <= rep.rank);
    }
}
