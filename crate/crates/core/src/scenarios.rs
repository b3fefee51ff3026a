//! Data generators, checks of the corollary conclusions, and the witness
//! searches for the three conjectures.
//!
//! The verifiers never assume their hypotheses. Every stated conclusion
//! becomes a [`Condition`] with the expected and observed values, and the
//! hypotheses that could be established are listed separately so a reader
//! can tell whether a failed conclusion means anything.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{
    big_residue, cyclotomic_value, divisors, euler_phi, exact_pth_root, is_prime, is_regular, mod_inv, mod_pow,
    mult_order, primes_in, residue,
};
use crate::cyc::{classify_unit, real_unit_eps, real_unit_varpi, vandiver_unit, CycElem, CycRing, RadicalWord, UnitClass};
use crate::error::{Error, Result};
use crate::kummer::{family_c2, family_c4, family_crit_m, family_cj3, family_thm1, is_totally_split, SplitReport};
use crate::symbols::{build_context, build_context_free, residue_symbol, symbol_of_zeta, ContextSummary, SplitContext};

// ---------------------------------------------------------------------------
// p-principality

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Every prime is p-principal when `p` is regular.
    RegularAutomatic,
    /// Explicit table `q -> p-principal`.
    SuppliedTable(BTreeMap<u64, bool>),
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Principality {
    Principal,
    NotPrincipal,
    Unknown,
}

impl fmt::Display for Principality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Principality::Principal => "principal",
            Principality::NotPrincipal => "not principal",
            Principality::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

impl Policy {
    /// Parses lines `q 0|1`; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Policy> {
        let mut table = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| Error::PolicyFile { line: idx + 1, message: message.to_string() };
            let mut parts = line.split_whitespace();
            let q: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("expected a prime"))?;
            if !is_prime(q) {
                return Err(err("not a prime"));
            }
            let flag = match parts.next() {
                Some("1") => true,
                Some("0") => false,
                _ => return Err(err("expected 0 or 1")),
            };
            if parts.next().is_some() {
                return Err(err("trailing input"));
            }
            table.insert(q, flag);
        }
        Ok(Policy::SuppliedTable(table))
    }

    pub fn from_table_file(path: &Path) -> Result<Policy> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::PolicyFile { line: 0, message: format!("{}: {e}", path.display()) })?;
        Self::parse_table(&text)
    }

    /// Fails early when automatic principality is requested for an irregular `p`.
    pub fn check(&self, p: u64) -> Result<()> {
        if *self == Policy::RegularAutomatic && !is_regular(p)?.regular {
            return Err(Error::PolicyMisuse(format!("p = {p} is irregular")));
        }
        Ok(())
    }
}

pub fn p_principality(q: u64, p: u64, policy: &Policy) -> Result<Principality> {
    if q == p || !is_prime(q) {
        return Err(Error::InvalidArgument(format!("q = {q} must be a prime other than p")));
    }
    Ok(match policy {
        Policy::RegularAutomatic => {
            policy.check(p)?;
            Principality::Principal
        }
        Policy::SuppliedTable(t) => match t.get(&q) {
            Some(true) => Principality::Principal,
            Some(false) => Principality::NotPrincipal,
            None => Principality::Unknown,
        },
        Policy::Unknown => Principality::Unknown,
    })
}

// ---------------------------------------------------------------------------
// generators

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum P3Rejection {
    VZero,
    CommonFactor(i64),
}

/// `(u, v)` with `u + zeta v = (s + zeta t)^3` in `Z[zeta_3]`.
pub fn p3_solutions(s: i64, t: i64) -> std::result::Result<(i64, i64), P3Rejection> {
    let u = s * s * s + t * t * t - 3 * s * t * t;
    let v = 3 * s * s * t - 3 * s * t * t;
    if v == 0 {
        return Err(P3Rejection::VZero);
    }
    let g = u.gcd(&v);
    if g != 1 {
        return Err(P3Rejection::CommonFactor(g));
    }
    Ok((u, v))
}

fn coprime_pairs(total: &BigInt, xs: impl Iterator<Item = i64>) -> Vec<(i64, i64)> {
    xs.filter_map(|x| {
        let y = total - BigInt::from(x);
        let y: i64 = y.try_into().ok()?;
        (x != 0 && y != 0 && x.gcd(&y) == 1).then_some((x, y))
    })
    .collect()
}

/// Pairs `(x, y)` with `x + y = z0^p`, `gcd(x, y) = 1`, `xy != 0`.
pub fn pth_power_pairs(p: u64, z0: i64, xs: impl IntoIterator<Item = i64>) -> Result<Vec<(i64, i64)>> {
    if z0 == 0 {
        return Err(Error::InvalidArgument("z0 must be nonzero".into()));
    }
    Ok(coprime_pairs(&num_traits::pow(BigInt::from(z0), p as usize), xs.into_iter()))
}

/// Pairs with `x + y = p^{nu p - 1} c^p`, `nu >= 1`.
pub fn shifted_power_pairs(p: u64, nu: u32, c: i64, xs: impl IntoIterator<Item = i64>) -> Result<Vec<(i64, i64)>> {
    if nu == 0 || c == 0 {
        return Err(Error::InvalidArgument("need nu >= 1 and c != 0".into()));
    }
    let total = num_traits::pow(BigInt::from(p), (nu as u64 * p - 1) as usize)
        * num_traits::pow(BigInt::from(c), p as usize);
    Ok(coprime_pairs(&total, xs.into_iter()))
}

/// `Some(nu)` when `n = p^{nu p - 1} c^p` with `nu >= 1`.
fn shifted_power_exponent(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut rest = n.clone();
    let mut val = 0u64;
    while (&rest % &pb).is_zero() {
        rest /= &pb;
        val += 1;
    }
    if (val + 1) % p != 0 || exact_pth_root(&rest, p).is_none() {
        return None;
    }
    Some((val + 1) / p)
}

// ---------------------------------------------------------------------------
// reports

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub description: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Condition {
    pub fn new(description: impl Into<String>, expected: impl ToString, observed: impl ToString) -> Self {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        Condition { description: description.into(), pass: expected == observed, expected, observed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub case: String,
    pub p: u64,
    pub q: u64,
    pub context: Option<ContextSummary>,
    /// Hypotheses that could be checked; all must hold for `probative`.
    pub preconditions: Vec<Condition>,
    pub conditions: Vec<Condition>,
    pub pass: bool,
    pub probative: bool,
}

impl VerifyReport {
    fn new(case: impl Into<String>, p: u64, q: u64) -> Self {
        VerifyReport {
            case: case.into(),
            p,
            q,
            context: None,
            preconditions: Vec::new(),
            conditions: Vec::new(),
            pass: true,
            probative: true,
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.conditions.iter().all(|c| c.pass);
        self.probative = self.preconditions.iter().all(|c| c.pass);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.pass)
    }
}

/// A symbol, or `None` when the word vanishes at the prime.
fn sym(ctx: &SplitContext, qi: usize, w: &RadicalWord) -> Result<Option<u64>> {
    match residue_symbol(ctx, qi, w) {
        Ok(mu) => Ok(Some(mu)),
        Err(Error::ZeroFactor { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn show(mu: Option<u64>) -> String {
    mu.map_or_else(|| "undefined".to_string(), |m| m.to_string())
}

/// `a * b mod p` on optional symbols.
fn lin(p: u64, terms: &[(u64, Option<u64>)]) -> Option<u64> {
    terms.iter().try_fold(0u64, |acc, &(c, mu)| Some((acc + c % p * mu?) % p))
}

struct KElems {
    ring: CycRing,
}

impl KElems {
    fn new(p: u64) -> Result<Self> {
        Ok(KElems { ring: CycRing::zeta_only(p)? })
    }
    fn int(&self, a: i64) -> RadicalWord {
        RadicalWord::from(CycElem::int_embed(self.ring, a))
    }
    /// `a + b zeta^j`.
    fn binom(&self, a: i64, b: i64, j: u64) -> Result<RadicalWord> {
        let e = CycElem::make(self.ring, [(0, 0, a), (0, j as i64, b)]);
        if e.is_zero_table() {
            return Err(Error::InvalidArgument(format!("{a} + {b}*zeta^{j} is zero")));
        }
        Ok(RadicalWord::from(e))
    }
}

fn divides(q: u64, n: &BigInt) -> bool {
    big_residue(n, q) == 0
}

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidArgument(format!("p = {p} is not an odd prime")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// corollaries

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Corollary {
    C2,
    C3,
    C4,
    C6,
    C5Extra,
}

impl fmt::Display for Corollary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Corollary::C2 => "C2",
            Corollary::C3 => "C3",
            Corollary::C4 => "C4",
            Corollary::C6 => "C6",
            Corollary::C5Extra => "C5extra",
        };
        write!(f, "{s}")
    }
}

/// Checks the conclusions of the corollary for `(p, u, v)` at `q`.
pub fn verify_corollary(case: Corollary, p: u64, u: i64, v: i64, q: u64, policy: &Policy) -> Result<VerifyReport> {
    check_p(p)?;
    if !is_prime(q) {
        return Err(Error::InvalidArgument(format!("q = {q} is not prime")));
    }
    if q == p || residue(u, q) == 0 || residue(v, q) == 0 {
        return Err(Error::DividesPuv { q });
    }
    let (ub, vb) = (BigInt::from(u), BigInt::from(v));
    let (target, label) = match case {
        Corollary::C2 => (cyclotomic_value(p, &ub, &vb), "Phi_p(u, v)"),
        Corollary::C3 => (&ub - &vb, "u - v"),
        Corollary::C4 | Corollary::C5Extra => (cyclotomic_value(2 * p, &ub, &vb), "Phi_2p(u, v)"),
        Corollary::C6 => (&ub + &vb, "u + v"),
    };
    if !divides(q, &target) {
        return Err(Error::WrongDivisor { q, expected: label.to_string() });
    }
    let ctx = build_context(p, q, u, v)?;
    let mut rep = VerifyReport::new(case.to_string(), p, q);
    rep.context = Some(ctx.summary());

    rep.preconditions.push(Condition::new("p divides v", true, v % p as i64 == 0));
    if case != Corollary::C3 {
        rep.preconditions.push(Condition::new("p > 3", true, p > 3));
    }
    let principality = p_principality(q, p, policy)?;
    rep.preconditions.push(Condition::new("q is p-principal", Principality::Principal, principality));

    let k = KElems::new(p)?;
    let p2 = p * p;
    let pinned = matches!(case, Corollary::C2 | Corollary::C4 | Corollary::C5Extra);
    if pinned {
        rep.conditions.push(Condition::new("q = 1 mod p^2", 1, q % p2));
    } else {
        let qf = mod_pow(q % p2, ctx.f() as u64, p2);
        rep.conditions.push(Condition::new(format!("q^f = 1 mod p^2 (f = {})", ctx.f()), 1, qf));
    }
    let primes: Vec<usize> = if pinned { vec![0] } else { (0..ctx.num_primes()).collect() };
    let at = |qi: usize| if pinned { "at q_K".to_string() } else { format!("at prime #{qi}") };

    match case {
        Corollary::C2 | Corollary::C3 => {
            for &qi in &primes {
                for (name, w) in [("u", k.int(u)), ("v", k.int(v)), ("2", k.int(2))] {
                    rep.conditions.push(Condition::new(format!("sym({name}) {}", at(qi)), 0, show(sym(&ctx, qi, &w)?)));
                }
                for j in 0..p {
                    let w = k.binom(1, 1, j)?;
                    rep.conditions.push(Condition::new(
                        format!("sym(1+zeta^{j}) {}", at(qi)),
                        0,
                        show(sym(&ctx, qi, &w)?),
                    ));
                }
            }
            if case == Corollary::C2 {
                // q splits completely in K here, so this runs over all zeta_bar
                let kctx = SplitContext::from_xi(p, q, 1, None)?;
                let split = is_totally_split(&kctx, &family_c2(p)?)?;
                for (qi, row) in split.matrix.iter().enumerate() {
                    let obs: Vec<String> = row.iter().map(|m| show(*m)).collect();
                    let exp = vec!["0"; row.len()];
                    rep.conditions.push(Condition::new(
                        format!("family c2 symbols at prime #{qi} over q"),
                        exp.join(","),
                        obs.join(","),
                    ));
                }
            }
        }
        Corollary::C4 | Corollary::C6 | Corollary::C5Extra => {
            for &qi in &primes {
                let su = sym(&ctx, qi, &k.int(u))?;
                let anchor = if case == Corollary::C5Extra { Some(0) } else { su };
                let expect = show(anchor);
                let mut chain = vec![("sym(u)".to_string(), su), ("sym(v)".to_string(), sym(&ctx, qi, &k.int(v))?)];
                chain.push(("sym(p)".to_string(), sym(&ctx, qi, &k.int(p as i64))?));
                for j in 1..p {
                    let s = sym(&ctx, qi, &k.binom(1, -1, j)?)?;
                    if case == Corollary::C5Extra {
                        chain.push((format!("sym(1-zeta^{j})"), s));
                    } else {
                        chain.push((format!("-sym(1-zeta^{j})"), lin(p, &[(p - 1, s)])));
                    }
                }
                for (name, val) in chain {
                    if case != Corollary::C5Extra && name == "sym(u)" {
                        continue;
                    }
                    let rhs = if case == Corollary::C5Extra { "0" } else { "sym(u)" };
                    rep.conditions.push(Condition::new(format!("{name} = {rhs} {}", at(qi)), &expect, show(val)));
                }
                for g in family_c4(p)?.generators {
                    rep.conditions.push(Condition::new(
                        format!("sym({}) {}", g.word, at(qi)),
                        0,
                        show(sym(&ctx, qi, &g.word)?),
                    ));
                }
            }
        }
    }
    Ok(rep.finish())
}

// ---------------------------------------------------------------------------
// lemma relations

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaVariant {
    Eps,
    Varpi,
    EpsPShift,
}

impl fmt::Display for LemmaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LemmaVariant::Eps => "eps",
            LemmaVariant::Varpi => "varpi",
            LemmaVariant::EpsPShift => "eps_p_shift",
        };
        write!(f, "{s}")
    }
}

/// Checks `sym(x + zeta^k y) [+ sym(p)] = (k/2) sym(zeta) + sym(U_{k+1})`
/// for `k = 1..p-2`, with `U` the real unit of the variant.
pub fn verify_lemma_relation(variant: LemmaVariant, p: u64, x: i64, y: i64, q: u64) -> Result<VerifyReport> {
    check_p(p)?;
    let (xb, yb) = (BigInt::from(x), BigInt::from(y));
    let sum = &xb + &yb;
    match variant {
        LemmaVariant::Eps | LemmaVariant::Varpi => {
            if exact_pth_root(&sum, p).is_none() {
                return Err(Error::Hypothesis(format!("x + y = {sum} is not a {p}-th power")));
            }
        }
        LemmaVariant::EpsPShift => {
            if shifted_power_exponent(&sum, p).is_none() {
                return Err(Error::Hypothesis(format!("x + y = {sum} is not p^(nu p - 1) c^p")));
            }
        }
    }
    if q == 2 {
        return Err(Error::DividesPuv { q });
    }
    let (n, label) = match variant {
        LemmaVariant::Varpi => (2 * p, "Phi_2p(x, y)"),
        _ => (p, "Phi_p(x, y)"),
    };
    if !divides(q, &cyclotomic_value(n, &xb, &yb)) {
        return Err(Error::WrongDivisor { q, expected: label.to_string() });
    }
    let ctx = build_context(p, q, x, y)?;
    // the prime q_K is the one where x zeta -+ y vanishes
    let sign: i64 = if variant == LemmaVariant::Varpi { -1 } else { 1 };
    let expected_zeta = residue(sign * y, q) * mod_inv(residue(x, q), q).expect("q does not divide x") % q;
    if ctx.zetas()[0] != ctx.field().from_u64(expected_zeta) {
        return Err(Error::Internal("pinned zeta does not match x zeta -+ y = 0".into()));
    }
    let mut rep = VerifyReport::new(format!("lemma_{variant}"), p, q);
    rep.context = Some(ctx.summary());
    let k = KElems::new(p)?;
    let sz = symbol_of_zeta(&ctx);
    let inv2 = (p + 1) / 2;
    let sp = if variant == LemmaVariant::EpsPShift { sym(&ctx, 0, &k.int(p as i64))? } else { Some(0) };
    let s_sum = sym(&ctx, 0, &RadicalWord::from(CycElem::int_embed(k.ring, sum.clone())))?;
    rep.conditions.push(Condition::new(
        if variant == LemmaVariant::EpsPShift { "sym(x+y) + sym(p)" } else { "sym(x+y)" },
        0,
        show(lin(p, &[(1, s_sum), (1, sp)])),
    ));
    for kk in 1..p - 1 {
        let lhs = lin(p, &[(1, sym(&ctx, 0, &k.binom(x, y, kk)?)?), (1, sp)]);
        let unit = match variant {
            LemmaVariant::Varpi => real_unit_varpi(k.ring, kk + 1)?,
            _ => real_unit_eps(k.ring, kk + 1)?,
        };
        let rhs = lin(p, &[(kk * inv2 % p, Some(sz)), (1, sym(&ctx, 0, &unit)?)]);
        let name = if variant == LemmaVariant::Varpi { "varpi" } else { "eps" };
        rep.conditions.push(Condition::new(
            format!("k = {kk}: sym(x+zeta^{kk} y) vs (k/2) sym(zeta) + sym({name}_{})", kk + 1),
            show(rhs),
            show(lhs),
        ));
    }
    Ok(rep.finish())
}

// ---------------------------------------------------------------------------
// predicted symbols

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Prediction {
    T32i,
    T32ii,
    T31,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Prediction::T32i => "T32_i",
            Prediction::T32ii => "T32_ii",
            Prediction::T31 => "T31",
        };
        write!(f, "{s}")
    }
}

/// Evaluates the symbol values predicted for FLT data at `q_K`.
pub fn verify_predicted_symbols(case: Prediction, p: u64, x: i64, y: i64, q: u64) -> Result<VerifyReport> {
    check_p(p)?;
    let (xb, yb) = (BigInt::from(x), BigInt::from(y));
    let (n, label) = match case {
        Prediction::T31 => (2 * p, "Phi_2p(x, y)"),
        _ => (p, "Phi_p(x, y)"),
    };
    if !is_prime(q) || !divides(q, &cyclotomic_value(n, &xb, &yb)) {
        return Err(Error::WrongDivisor { q, expected: label.to_string() });
    }
    let ctx = build_context(p, q, x, y)?;
    let mut rep = VerifyReport::new(case.to_string(), p, q);
    rep.context = Some(ctx.summary());
    let k = KElems::new(p)?;
    let p2_divides = (q - 1) % (p * p) == 0;
    match case {
        Prediction::T32i => {
            rep.preconditions.push(Condition::new("p^2 does not divide q - 1", true, !p2_divides));
            let sz = Some(symbol_of_zeta(&ctx));
            let inv4 = mod_inv(4, p).expect("p odd");
            for kp in 1..=(p - 3) / 2 {
                let a = p - 2 * kp - 1;
                let e1 = (p * p - kp * (kp + 1) % p) % p;
                rep.conditions.push(Condition::new(
                    format!("sym(eps_{a}) = -{kp}*{} sym(zeta)", kp + 1),
                    show(lin(p, &[(e1, sz)])),
                    show(sym(&ctx, 0, &real_unit_eps(k.ring, a)?)?),
                ));
                let a = p - 2 * kp;
                let e2 = (inv4 + p * p - kp * kp % p) % p;
                rep.conditions.push(Condition::new(
                    format!("sym(eps_{a}) = (1/4 - {kp}^2) sym(zeta)"),
                    show(lin(p, &[(e2, sz)])),
                    show(sym(&ctx, 0, &real_unit_eps(k.ring, a)?)?),
                ));
            }
        }
        Prediction::T32ii => {
            rep.preconditions.push(Condition::new("p^2 divides q - 1", true, p2_divides));
            for j in 1..p {
                rep.conditions.push(Condition::new(
                    format!("sym(1+zeta^{j})"),
                    0,
                    show(sym(&ctx, 0, &k.binom(1, 1, j)?)?),
                ));
            }
        }
        Prediction::T31 => {
            rep.conditions.push(Condition::new("sym(p)", 0, show(sym(&ctx, 0, &k.int(p as i64))?)));
            for j in 1..p {
                rep.conditions.push(Condition::new(
                    format!("sym(1-zeta^{j})"),
                    0,
                    show(sym(&ctx, 0, &k.binom(1, -1, j)?)?),
                ));
            }
        }
    }
    Ok(rep.finish())
}

// ---------------------------------------------------------------------------
// p = 3 solution scan

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct P3Failure {
    pub s: i64,
    pub t: i64,
    pub q: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct P3ScanReport {
    pub smax: i64,
    pub qmax: u64,
    pub pairs: Vec<(i64, i64, i64, i64)>,
    pub contexts: usize,
    pub symbols_checked: usize,
    pub families_checked: usize,
    /// Contexts where the family is empty (`eps_2 = 0`).
    pub empty_families: usize,
    pub failures: Vec<P3Failure>,
    pub all_split: bool,
}

/// Runs every accepted `(s, t)` with `|s|, |t| <= smax` against every prime
/// `q <= qmax` prime to `3uv`: the symbols of `u (1 + xi zeta^k)` must vanish
/// at every prime above `q` and the first family must split totally.
pub fn scan_p3(smax: i64, qmax: u64) -> Result<P3ScanReport> {
    let mut pairs = Vec::new();
    for s in -smax..=smax {
        for t in -smax..=smax {
            if s.gcd(&t) != 1 || (s + t).rem_euclid(3) == 0 {
                continue;
            }
            if let Ok((u, v)) = p3_solutions(s, t) {
                pairs.push((s, t, u, v));
            }
        }
    }
    let primes: Vec<u64> = primes_in(2, qmax).filter(|&q| q != 3).collect();
    type Row = (usize, usize, usize, usize, Vec<P3Failure>);
    let rows: Vec<Result<Row>> = pairs
        .par_iter()
        .map(|&(s, t, u, v)| {
            let (mut ctxs, mut syms, mut fams, mut empty) = (0, 0, 0, 0);
            let mut fails = Vec::new();
            for &q in &primes {
                if residue(u, q) == 0 || residue(v, q) == 0 {
                    continue;
                }
                let ctx = build_context(3, q, u, v)?;
                ctxs += 1;
                let ring = CycRing::new(3, ctx.n())?;
                for kk in 1..=2u64 {
                    if classify_unit(3, ctx.d(), ctx.r(), kk) == UnitClass::Zero {
                        continue;
                    }
                    let w = RadicalWord::new(vec![(CycElem::int_embed(ring, u), 1), (vandiver_unit(ring, kk), 1)])?;
                    for qi in 0..ctx.num_primes() {
                        syms += 1;
                        match sym(&ctx, qi, &w)? {
                            Some(0) => {}
                            other => fails.push(P3Failure {
                                s,
                                t,
                                q,
                                detail: format!("sym(u(1+xi*zeta^{kk})) at prime #{qi} = {}", show(other)),
                            }),
                        }
                    }
                }
                match family_thm1(&ctx) {
                    Ok(fam) => {
                        fams += 1;
                        let rep = is_totally_split(&ctx, &fam)?;
                        if !rep.totally_split {
                            fails.push(P3Failure { s, t, q, detail: "family thm1 not totally split".into() });
                        }
                    }
                    Err(Error::EmptyFamily(_)) => empty += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((ctxs, syms, fams, empty, fails))
        })
        .collect();
    let mut rep = P3ScanReport {
        smax,
        qmax,
        pairs,
        contexts: 0,
        symbols_checked: 0,
        families_checked: 0,
        empty_families: 0,
        failures: Vec::new(),
        all_split: true,
    };
    for row in rows {
        let (c, s, f, e, fails) = row?;
        rep.contexts += c;
        rep.symbols_checked += s;
        rep.families_checked += f;
        rep.empty_families += e;
        rep.failures.extend(fails);
    }
    rep.all_split = rep.failures.is_empty();
    Ok(rep)
}

// ---------------------------------------------------------------------------
// witness searches

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkipRecord {
    pub q: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessResult {
    pub driver: String,
    pub found: bool,
    pub q: Option<u64>,
    /// The witness holds only because there was nothing to test.
    pub vacuous: bool,
    /// Set when the driver declined to run.
    pub refused: Option<String>,
    pub detail: Vec<SplitReport>,
    pub primes_scanned: usize,
    pub primes_skipped: Vec<SkipRecord>,
}

impl WitnessResult {
    fn new(driver: &str) -> Self {
        WitnessResult {
            driver: driver.to_string(),
            found: false,
            q: None,
            vacuous: false,
            refused: None,
            detail: Vec::new(),
            primes_scanned: 0,
            primes_skipped: Vec::new(),
        }
    }
}

enum Outcome {
    Skip(String),
    Pass,
    Hit { reports: Vec<SplitReport>, vacuous: bool },
}

const CHUNK: usize = 32;

/// Evaluates `f` over `primes` in parallel chunks and walks the outcomes in
/// order, stopping after the first hit. The result does not depend on the
/// number of worker threads.
fn ordered_scan<F>(primes: &[u64], res: &mut WitnessResult, f: F) -> Result<()>
where
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    for chunk in primes.chunks(CHUNK) {
        let outs: Vec<Result<Outcome>> = chunk.par_iter().map(|&q| f(q)).collect();
        for (&q, out) in chunk.iter().zip(outs) {
            res.primes_scanned += 1;
            match out? {
                Outcome::Skip(reason) => res.primes_skipped.push(SkipRecord { q, reason }),
                Outcome::Pass => {}
                Outcome::Hit { reports, vacuous } => {
                    res.found = true;
                    res.q = Some(q);
                    res.vacuous = vacuous;
                    res.detail = reports;
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

fn principality_skip(q: u64, p: u64, policy: &Policy) -> Result<Option<String>> {
    Ok(match p_principality(q, p, policy)? {
        Principality::Principal => None,
        Principality::NotPrincipal => Some("not p-principal".into()),
        Principality::Unknown => Some("principality unknown".into()),
    })
}

/// First prime `q <= q_max` whose prime `(q, u xi - v)` is not totally split
/// in the Kummer extension of the Vandiver ratios.
pub fn witness_search_cj2(p: u64, u: i64, v: i64, q_max: u64, policy: &Policy) -> Result<WitnessResult> {
    check_p(p)?;
    policy.check(p)?;
    if u.gcd(&v) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({u}, {v}) != 1")));
    }
    let mut res = WitnessResult::new("cj2");
    let primes: Vec<u64> = primes_in(2, q_max).collect();
    ordered_scan(&primes, &mut res, |q| {
        if q == p || residue(u, q) == 0 || residue(v, q) == 0 {
            return Ok(Outcome::Skip("divides puv".into()));
        }
        if let Some(reason) = principality_skip(q, p, policy)? {
            return Ok(Outcome::Skip(reason));
        }
        let ctx = build_context(p, q, u, v)?;
        let fam = if p == 3 { family_thm1(&ctx) } else { family_cj3(&ctx) };
        let fam = match fam {
            Ok(f) => f,
            Err(Error::EmptyFamily(why)) => return Ok(Outcome::Skip(format!("empty family: {why}"))),
            Err(e) => return Err(e),
        };
        let rep = is_totally_split(&ctx, &fam)?;
        Ok(if rep.first_nonzero().is_some() {
            Outcome::Hit { reports: vec![rep], vacuous: false }
        } else {
            Outcome::Pass
        })
    })?;
    Ok(res)
}

/// Units modulo `n` in ascending order, one per `xi` index.
fn unit_count(n: u64) -> usize {
    euler_phi(n) as usize
}

/// First p-principal `q = 3 mod 4` with `p` prime to `kappa` such that no
/// prime above any `(q, xi - xi_bar)`, `n | q - 1`, `n > 2`, splits totally.
pub fn witness_search_cj3(p: u64, q_max: u64, policy: &Policy, require_nonvacuous: bool) -> Result<WitnessResult> {
    check_p(p)?;
    if p <= 3 {
        return Err(Error::InvalidArgument("the search needs p > 3".into()));
    }
    policy.check(p)?;
    let mut res = WitnessResult::new("cj3");
    let primes: Vec<u64> = primes_in(3, q_max).filter(|q| q % 4 == 3).collect();
    ordered_scan(&primes, &mut res, |q| {
        if q == p {
            return Ok(Outcome::Skip("q = p".into()));
        }
        if let Some(reason) = principality_skip(q, p, policy)? {
            return Ok(Outcome::Skip(reason));
        }
        let f = mult_order(q as i64, p)?;
        if mod_pow(q % (p * p), f, p * p) == 1 {
            return Ok(Outcome::Skip("p not prime to kappa".into()));
        }
        let ns: Vec<u64> = divisors(q - 1).into_iter().filter(|&n| n > 2).collect();
        if ns.is_empty() {
            if require_nonvacuous {
                return Ok(Outcome::Skip("no divisor n > 2 of q - 1".into()));
            }
            return Ok(Outcome::Hit { reports: Vec::new(), vacuous: true });
        }
        let mut reports = Vec::new();
        for n in ns {
            for idx in 0..unit_count(n) {
                let ctx = build_context_free(p, q, n, idx)?;
                let rep = is_totally_split(&ctx, &family_cj3(&ctx)?)?;
                if rep.totally_split {
                    return Ok(Outcome::Pass);
                }
                reports.push(rep);
            }
        }
        Ok(Outcome::Hit { reports, vacuous: false })
    })?;
    Ok(res)
}

/// Tests the criterion families on every `(q, n, xi index, m)` for `q` in `s`;
/// `found` reports a total split, which is what the criterion excludes.
pub fn witness_search_crit(p: u64, s: &[u64], m_values: &[i64]) -> Result<WitnessResult> {
    check_p(p)?;
    if s.is_empty() {
        return Err(Error::BadS);
    }
    for &m in m_values {
        if m.rem_euclid(p as i64) == 0 {
            return Err(Error::BadM { m, p });
        }
        if m < 1 || m as u64 >= p {
            return Err(Error::InvalidArgument(format!("m = {m} outside 1..p-1")));
        }
    }
    let mut res = WitnessResult::new("crit");
    if is_regular(p)?.regular {
        res.refused = Some(format!("p = {p} is regular; the criterion is vacuous"));
        return Ok(res);
    }
    for &q in s {
        if !is_prime(q) || q == p {
            return Err(Error::InvalidArgument(format!("q = {q} in S must be a prime other than p")));
        }
    }
    let per_q: Vec<Result<(Vec<SkipRecord>, Vec<SplitReport>)>> = s
        .par_iter()
        .map(|&q| {
            let mut skips = Vec::new();
            let mut hits = Vec::new();
            for n in divisors(q - 1) {
                if n <= 2 {
                    skips.push(SkipRecord { q, reason: format!("n = {n} <= 2") });
                    continue;
                }
                for idx in 0..unit_count(n) {
                    let ctx = build_context_free(p, q, n, idx)?;
                    for &m in m_values {
                        let rep = is_totally_split(&ctx, &family_crit_m(&ctx, m)?)?;
                        if rep.totally_split {
                            hits.push(rep);
                        }
                    }
                }
            }
            Ok((skips, hits))
        })
        .collect();
    for r in per_q {
        let (skips, hits) = r?;
        res.primes_scanned += 1;
        res.primes_skipped.extend(skips);
        if !hits.is_empty() && !res.found {
            res.q = Some(hits[0].context.q);
        }
        res.found |= !hits.is_empty();
        res.detail.extend(hits);
    }
    Ok(res)
}

/// `BigInt` helper for callers holding `i64` pairs.
pub fn norm_mod_q(p: u64, u: i64, v: i64, q: u64) -> u64 {
    let n = crate::arith::norm_u_plus_v_zeta(p, &BigInt::from(u), &BigInt::from(v));
    big_residue(&n, q)
}
