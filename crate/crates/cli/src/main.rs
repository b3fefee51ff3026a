//! `cycsplit`: residue symbols, Kummer splitting tests and witness searches
//! from the command line. Reports go to stdout, diagnostics to stderr.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use cycsplit::arith::{
    cyclotomic_value, decompose_n, is_prime, is_regular_bounded, kappa, minkowski_bound, mod_inv, mult_order,
    primes_in, residue, trial_factor,
};
use cycsplit::cyc::{CycElem, CycRing, RadicalWord};
use cycsplit::expr::parse_element;
use cycsplit::kummer::{
    family_c2, family_c4, family_cj3, family_crit_m, family_thm1, is_totally_split, radical_rank_lower_bound,
    RadicalFamily,
};
use cycsplit::scenarios::{
    scan_p3, verify_corollary, verify_lemma_relation, verify_predicted_symbols, witness_search_cj2,
    witness_search_cj3, witness_search_crit, Corollary, LemmaVariant, Policy, Prediction, VerifyReport,
};
use cycsplit::symbols::{build_context, build_context_free, residue_symbol, symbol_of_zeta, SplitContext};
use cycsplit::Error;

use config::Config;
use report::{Envelope, ErrorRecord, Table, Timing};

#[derive(Parser, Debug)]
#[command(name = "cycsplit", version, about = "p-th power residue symbols and Kummer splitting in Q(xi, zeta)")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Bounds file with `q_max`, `p_max`, `factor_bound`
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Record wall-clock time in the report
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Phi_n(u, v) and its small prime factors
    Phi(PhiArgs),
    /// Residue degree of q mod p and the order of v/u mod q
    Order(OrderArgs),
    /// Bernoulli regularity of p, or of every prime up to p_max
    Regular(RegularArgs),
    /// The residue field data at the primes above q
    Context(CtxArgs),
    /// Power residue symbols of an element at every prime above q
    Symbol(SymbolArgs),
    /// Symbol matrix of a radical family
    Split(SplitArgs),
    /// Check a corollary or a predicted-symbol statement at q
    Verify(VerifyArgs),
    /// Check the linear symbol relations for x + zeta^k y
    Lemma(LemmaArgs),
    /// Search for a prime witnessing one of the conjectures
    Witness(WitnessArgs),
    /// Exhaustive check of the p = 3 solution family
    #[command(name = "scan-p3")]
    ScanP3(ScanArgs),
    /// Lower bound for the radical rank of a family over many primes
    Rank(RankArgs),
}

#[derive(Args, Debug, Serialize)]
struct PhiArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, allow_hyphen_values = true)]
    u: i64,
    #[arg(long, allow_hyphen_values = true)]
    v: i64,
}

#[derive(Args, Debug, Serialize)]
struct OrderArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<i64>,
}

#[derive(Args, Debug, Serialize)]
struct RegularArgs {
    #[arg(long)]
    p: Option<u64>,
    /// Overrides `p_max` from the config
    #[arg(long)]
    p_max: Option<u64>,
}

/// A context comes from `(u, v)` or from a free `xi_bar` of order `n`.
#[derive(Args, Debug, Serialize)]
struct CtxArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    q: u64,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<i64>,
    #[arg(long, conflicts_with_all = ["u", "v"])]
    n: Option<u64>,
    /// Which element of order n (by rank of its exponent)
    #[arg(long, default_value_t = 0)]
    index: usize,
}

#[derive(Args, Debug, Serialize)]
struct SymbolArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ctx: CtxArgs,
    /// Element or radical word, e.g. "(1+xi*zeta^2)/(1+xi*zeta)"
    #[arg(long, allow_hyphen_values = true)]
    elem: String,
    /// Multiply the word by u
    #[arg(long)]
    times_u: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FamilyKind {
    Thm1,
    Crit,
    Cj3,
    C2,
    C4,
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ctx: CtxArgs,
    #[arg(long, value_enum, default_value_t = FamilyKind::Thm1)]
    family: FamilyKind,
    /// Exponent for the crit family
    #[arg(long)]
    m: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Case {
    C2,
    C3,
    C4,
    C6,
    C5extra,
    T32i,
    T32ii,
    T31,
}

/// For the predicted-symbol cases `--u` and `--v` carry `x` and `y`.
#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    case: Case,
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    u: i64,
    #[arg(long, allow_hyphen_values = true)]
    v: i64,
    #[arg(long)]
    q: u64,
    /// regular | unknown | table:PATH
    #[arg(long, default_value = "regular")]
    policy: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    Eps,
    Varpi,
    EpsPShift,
}

/// `--u`, `--v` are `x`, `y`. Without `--q` every prime up to `--qmax`
/// dividing the relevant cyclotomic value is checked.
#[derive(Args, Debug, Serialize)]
struct LemmaArgs {
    #[arg(long, value_enum, default_value_t = Variant::Eps)]
    variant: Variant,
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    u: i64,
    #[arg(long, allow_hyphen_values = true)]
    v: i64,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    qmax: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WitnessKind {
    Cj2,
    Cj3,
    Crit,
}

#[derive(Args, Debug, Serialize)]
struct WitnessArgs {
    #[arg(long, value_enum)]
    kind: WitnessKind,
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<i64>,
    #[arg(long)]
    qmax: Option<u64>,
    /// regular | unknown | table:PATH
    #[arg(long, default_value = "regular")]
    policy: String,
    /// cj3: skip primes with no admissible n instead of accepting them
    #[arg(long)]
    nonvacuous: bool,
    /// crit: comma-separated primes
    #[arg(long)]
    s_list: Option<String>,
    /// crit: exponents to test (default 1..p-1)
    #[arg(long)]
    m: Vec<i64>,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    #[arg(long, default_value_t = 5)]
    smax: i64,
    #[arg(long)]
    qmax: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct RankArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<i64>,
    #[arg(long, conflicts_with_all = ["u", "v"])]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, value_enum, default_value_t = FamilyKind::Thm1)]
    family: FamilyKind,
    #[arg(long)]
    m: Option<i64>,
    #[arg(long)]
    qmax: Option<u64>,
}

// ---------------------------------------------------------------------------

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(Error::Parse { .. } | Error::Semantic { .. }) => 2,
            Failure::Lib(e) if e.is_internal() => 4,
            Failure::Lib(_) => 3,
        }
    }

    fn record(&self) -> ErrorRecord {
        let (kind, message) = match self {
            Failure::Usage(m) => ("Usage".to_string(), m.clone()),
            Failure::Lib(e) => {
                let dbg = format!("{e:?}");
                let kind = dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string();
                (kind, e.to_string())
            }
        };
        ErrorRecord { exit_code: i32::from(self.exit_code()), kind, message }
    }
}

type Res<T> = std::result::Result<T, Failure>;

struct Output {
    results: Value,
    table: Option<Table>,
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn check_p(p: u64, cfg: &Config) -> Res<()> {
    if p > cfg.p_max {
        return Err(Error::OutOfRange { p, bound: cfg.p_max }.into());
    }
    Ok(())
}

fn parse_policy(s: &str) -> Res<Policy> {
    match s {
        "regular" => Ok(Policy::RegularAutomatic),
        "unknown" => Ok(Policy::Unknown),
        _ => match s.strip_prefix("table:") {
            Some(path) => Ok(Policy::from_table_file(Path::new(path))?),
            None => Err(Failure::Usage(format!("--policy {s}: expected regular, unknown or table:PATH"))),
        },
    }
}

fn opt(x: Option<u64>) -> String {
    x.map_or_else(String::new, |m| m.to_string())
}

impl CtxArgs {
    fn build(&self, cfg: &Config) -> Res<SplitContext> {
        check_p(self.p, cfg)?;
        match (self.u, self.v, self.n) {
            (Some(u), Some(v), None) => Ok(build_context(self.p, self.q, u, v)?),
            (None, None, Some(n)) => Ok(build_context_free(self.p, self.q, n, self.index)?),
            _ => Err(Failure::Usage("give both --u and --v, or --n".into())),
        }
    }
}

fn family_for(ctx: &SplitContext, kind: FamilyKind, m: Option<i64>) -> cycsplit::Result<RadicalFamily> {
    match kind {
        FamilyKind::Thm1 => family_thm1(ctx),
        FamilyKind::Crit => family_crit_m(ctx, m.expect("m checked by caller")),
        FamilyKind::Cj3 => family_cj3(ctx),
        FamilyKind::C2 => family_c2(ctx.p()),
        FamilyKind::C4 => family_c4(ctx.p()),
    }
}

fn need_m(kind: FamilyKind, m: Option<i64>) -> Res<()> {
    if kind == FamilyKind::Crit && m.is_none() {
        return Err(Failure::Usage("--family crit needs --m".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// commands

fn cmd_phi(a: &PhiArgs, cfg: &Config) -> Res<Output> {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let value = cyclotomic_value(a.n, &BigInt::from(a.u), &BigInt::from(a.v));
    let (factors, cofactor) = trial_factor(&value, cfg.factor_bound);
    let mut table = Table::new(&["prime", "exponent"]);
    for (q, e) in &factors {
        table.push(vec![q.to_string(), e.to_string()]);
    }
    let factors: Vec<Value> = factors.iter().map(|(q, e)| json!({"prime": q.to_string(), "exponent": e})).collect();
    Ok(Output {
        results: json!({
            "value": value.to_string(),
            "factors": factors,
            "cofactor": cofactor.to_string(),
            "factor_bound": cfg.factor_bound,
        }),
        table: Some(table),
    })
}

fn cmd_order(a: &OrderArgs, cfg: &Config) -> Res<Output> {
    if !is_prime(a.q) {
        return Err(Error::InvalidArgument(format!("q = {} is not prime", a.q)).into());
    }
    let mut out = serde_json::Map::new();
    if let Some(p) = a.p {
        check_p(p, cfg)?;
        if !is_prime(p) || p == a.q {
            return Err(Error::InvalidArgument(format!("p = {p} must be a prime other than q")).into());
        }
        let f = mult_order(a.q as i64, p)?;
        out.insert("f".into(), json!(f));
        out.insert("kappa".into(), json!(kappa(a.q, f, p)?.to_string()));
    }
    match (a.u, a.v) {
        (Some(u), Some(v)) => {
            let ui = mod_inv(residue(u, a.q), a.q).ok_or(Error::NotCoprime { a: u.to_string(), q: a.q })?;
            let xi = residue(v, a.q) * ui % a.q;
            let n = mult_order(xi as i64, a.q)?;
            out.insert("xi_bar".into(), json!(xi));
            out.insert("n".into(), json!(n));
            if let Some(p) = a.p {
                let pp = decompose_n(n, p);
                out.insert("d".into(), json!(pp.d));
                out.insert("r".into(), json!(pp.r));
            }
        }
        (None, None) if a.p.is_some() => {}
        _ => return Err(Failure::Usage("give --p, or both --u and --v".into())),
    }
    Ok(Output { results: Value::Object(out), table: None })
}

fn cmd_regular(a: &RegularArgs, cfg: &Config) -> Res<Output> {
    let p_max = a.p_max.unwrap_or(cfg.p_max);
    let row = |r: &cycsplit::arith::RegularityReport| {
        let idx: Vec<String> = r.irregular_indices.iter().map(u64::to_string).collect();
        vec![r.p.to_string(), r.regular.to_string(), idx.join(";")]
    };
    let mut table = Table::new(&["p", "regular", "irregular_indices"]);
    if let Some(p) = a.p {
        if p > p_max {
            return Err(Error::OutOfRange { p, bound: p_max }.into());
        }
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("p = {p} is not an odd prime")).into());
        }
        let rep = is_regular_bounded(p, p_max.max(p))?;
        let mb = minkowski_bound(p);
        table.push(row(&rep));
        return Ok(Output {
            results: json!({
                "report": rep,
                "minkowski_bound": {"log10": mb.log10, "value": mb.to_scientific(10)},
            }),
            table: Some(table),
        });
    }
    let reports = primes_in(3, p_max).map(|p| is_regular_bounded(p, p_max)).collect::<cycsplit::Result<Vec<_>>>()?;
    let irregular: Vec<u64> = reports.iter().filter(|r| !r.regular).map(|r| r.p).collect();
    reports.iter().for_each(|r| table.push(row(r)));
    Ok(Output {
        results: json!({"p_max": p_max, "irregular": irregular, "reports": reports}),
        table: Some(table),
    })
}

fn cmd_context(a: &CtxArgs, cfg: &Config) -> Res<Output> {
    let ctx = a.build(cfg)?;
    Ok(Output {
        results: json!({
            "context": ctx.summary(),
            "num_primes": ctx.num_primes(),
            "zeta_symbol": symbol_of_zeta(&ctx),
        }),
        table: None,
    })
}

fn cmd_symbol(a: &SymbolArgs, cfg: &Config) -> Res<Output> {
    let ctx = a.ctx.build(cfg)?;
    let mut word = parse_element(&a.elem, ctx.n(), ctx.p())?;
    if a.times_u {
        let (u, _) = ctx.uv().ok_or_else(|| Failure::Usage("--times-u needs --u and --v".into()))?;
        let ring = CycRing::zeta_only(ctx.p())?;
        word = word.mul(&RadicalWord::from(CycElem::int_embed(ring, u)));
    }
    let mut mu = Vec::new();
    let mut vanishing = Vec::new();
    let mut table = Table::new(&["q_index", "zeta", "mu"]);
    for qi in 0..ctx.num_primes() {
        let m = match residue_symbol(&ctx, qi, &word) {
            Ok(m) => Some(m),
            Err(Error::ZeroFactor { index }) => {
                vanishing.push(json!({"q_index": qi, "factor": index}));
                None
            }
            Err(e) => return Err(e.into()),
        };
        table.push(vec![qi.to_string(), ctx.zetas()[qi].to_string(), opt(m)]);
        mu.push(m);
    }
    Ok(Output {
        results: json!({
            "word": word.to_string(),
            "context": ctx.summary(),
            "mu": mu,
            "vanishing": vanishing,
            "zeta_symbol": symbol_of_zeta(&ctx),
        }),
        table: Some(table),
    })
}

fn cmd_split(a: &SplitArgs, cfg: &Config) -> Res<Output> {
    need_m(a.family, a.m)?;
    let ctx = a.ctx.build(cfg)?;
    let rep = is_totally_split(&ctx, &family_for(&ctx, a.family, a.m)?)?;
    let mut table = Table::new(&["q_index", "generator_index", "generator", "mu"]);
    for (qi, row) in rep.matrix.iter().enumerate() {
        for (g, mu) in row.iter().enumerate() {
            table.push(vec![
                qi.to_string(),
                rep.generator_indices[g].to_string(),
                rep.generators[g].clone(),
                opt(*mu),
            ]);
        }
    }
    Ok(Output { results: to_json(&rep), table: Some(table) })
}

fn verify_table(reps: &[VerifyReport]) -> Table {
    let mut t = Table::new(&["q", "section", "description", "expected", "observed", "pass"]);
    for rep in reps {
        let sections = [("precondition", &rep.preconditions), ("condition", &rep.conditions)];
        for (section, conds) in sections {
            for c in conds {
                t.push(vec![
                    rep.q.to_string(),
                    section.to_string(),
                    c.description.clone(),
                    c.expected.clone(),
                    c.observed.clone(),
                    c.pass.to_string(),
                ]);
            }
        }
    }
    t
}

fn cmd_verify(a: &VerifyArgs, cfg: &Config) -> Res<Output> {
    check_p(a.p, cfg)?;
    let policy = parse_policy(&a.policy)?;
    let (p, u, v, q) = (a.p, a.u, a.v, a.q);
    let rep = match a.case {
        Case::C2 => verify_corollary(Corollary::C2, p, u, v, q, &policy)?,
        Case::C3 => verify_corollary(Corollary::C3, p, u, v, q, &policy)?,
        Case::C4 => verify_corollary(Corollary::C4, p, u, v, q, &policy)?,
        Case::C6 => verify_corollary(Corollary::C6, p, u, v, q, &policy)?,
        Case::C5extra => verify_corollary(Corollary::C5Extra, p, u, v, q, &policy)?,
        Case::T32i => verify_predicted_symbols(Prediction::T32i, p, u, v, q)?,
        Case::T32ii => verify_predicted_symbols(Prediction::T32ii, p, u, v, q)?,
        Case::T31 => verify_predicted_symbols(Prediction::T31, p, u, v, q)?,
    };
    let table = verify_table(std::slice::from_ref(&rep));
    Ok(Output { results: to_json(&rep), table: Some(table) })
}

fn cmd_lemma(a: &LemmaArgs, cfg: &Config) -> Res<Output> {
    check_p(a.p, cfg)?;
    let variant = match a.variant {
        Variant::Eps => LemmaVariant::Eps,
        Variant::Varpi => LemmaVariant::Varpi,
        Variant::EpsPShift => LemmaVariant::EpsPShift,
    };
    let (n, divisor) = if variant == LemmaVariant::Varpi { (2 * a.p, "Phi_2p(x, y)") } else { (a.p, "Phi_p(x, y)") };
    let value = cyclotomic_value(n, &BigInt::from(a.u), &BigInt::from(a.v));
    let primes: Vec<u64> = match a.q {
        Some(q) => vec![q],
        None => {
            let bound = a.qmax.unwrap_or(cfg.q_max).min(cfg.factor_bound);
            trial_factor(&value, bound).0.into_iter().map(|(q, _)| q).filter(|&q| q <= bound).collect()
        }
    };
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for q in primes {
        match verify_lemma_relation(variant, a.p, a.u, a.v, q) {
            Ok(rep) => reports.push(rep),
            // a single explicit q must satisfy every precondition
            Err(e) if a.q.is_none() && !e.is_internal() && !matches!(e, Error::Hypothesis(_)) => {
                skipped.push(json!({"q": q, "reason": e.to_string()}))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let all_pass = reports.iter().all(|r| r.pass);
    let table = verify_table(&reports);
    Ok(Output {
        results: json!({
            "divisor": divisor,
            "value": value.to_string(),
            "checked": reports.len(),
            "all_pass": all_pass,
            "reports": reports,
            "skipped": skipped,
        }),
        table: Some(table),
    })
}

fn cmd_witness(a: &WitnessArgs, cfg: &Config) -> Res<Output> {
    check_p(a.p, cfg)?;
    let q_max = a.qmax.unwrap_or(cfg.q_max);
    let res = match a.kind {
        WitnessKind::Cj2 => {
            let (Some(u), Some(v)) = (a.u, a.v) else {
                return Err(Failure::Usage("--kind cj2 needs --u and --v".into()));
            };
            witness_search_cj2(a.p, u, v, q_max, &parse_policy(&a.policy)?)?
        }
        WitnessKind::Cj3 => witness_search_cj3(a.p, q_max, &parse_policy(&a.policy)?, a.nonvacuous)?,
        WitnessKind::Crit => {
            let list = a.s_list.as_deref().ok_or_else(|| Failure::Usage("--kind crit needs --s-list".into()))?;
            let s = list
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(format!("--s-list: {e}")))?;
            let m: Vec<i64> = if a.m.is_empty() { (1..a.p as i64).collect() } else { a.m.clone() };
            witness_search_crit(a.p, &s, &m)?
        }
    };
    Ok(Output { results: to_json(&res), table: None })
}

fn cmd_scan_p3(a: &ScanArgs, cfg: &Config) -> Res<Output> {
    let rep = scan_p3(a.smax, a.qmax.unwrap_or(cfg.q_max))?;
    let mut table = Table::new(&["s", "t", "q", "detail"]);
    for f in &rep.failures {
        table.push(vec![f.s.to_string(), f.t.to_string(), f.q.to_string(), f.detail.clone()]);
    }
    Ok(Output { results: to_json(&rep), table: Some(table) })
}

fn cmd_rank(a: &RankArgs, cfg: &Config) -> Res<Output> {
    check_p(a.p, cfg)?;
    need_m(a.family, a.m)?;
    let q_max = a.qmax.unwrap_or(cfg.q_max);
    let mut contexts = Vec::new();
    let mut skipped = 0usize;
    for q in primes_in(3, q_max) {
        let ctx = match (a.u, a.v, a.n) {
            (Some(u), Some(v), None) => build_context(a.p, q, u, v),
            (None, None, Some(n)) if (q - 1) % n == 0 => build_context_free(a.p, q, n, a.index),
            (None, None, Some(_)) => continue,
            _ => return Err(Failure::Usage("give both --u and --v, or --n".into())),
        };
        match ctx.and_then(|c| family_for(&c, a.family, a.m).map(|_| c)) {
            Ok(c) => contexts.push(c),
            Err(e) if e.is_internal() => return Err(e.into()),
            Err(_) => skipped += 1,
        }
    }
    if contexts.is_empty() {
        return Err(Error::InvalidArgument(format!("no usable context with q <= {q_max}")).into());
    }
    let rep = radical_rank_lower_bound(&contexts, |c| family_for(c, a.family, a.m))?;
    let mut table = Table::new(&["context", "q", "rank"]);
    for (i, (c, r)) in contexts.iter().zip(&rep.trace).enumerate() {
        table.push(vec![i.to_string(), c.q().to_string(), r.to_string()]);
    }
    Ok(Output {
        results: json!({
            "report": rep,
            "contexts_used": contexts.len(),
            "contexts_skipped": skipped,
        }),
        table: Some(table),
    })
}

// ---------------------------------------------------------------------------

fn dispatch(cmd: &Command, cfg: &Config) -> (&'static str, Value, Res<Output>) {
    match cmd {
        Command::Phi(a) => ("phi", to_json(a), cmd_phi(a, cfg)),
        Command::Order(a) => ("order", to_json(a), cmd_order(a, cfg)),
        Command::Regular(a) => ("regular", to_json(a), cmd_regular(a, cfg)),
        Command::Context(a) => ("context", to_json(a), cmd_context(a, cfg)),
        Command::Symbol(a) => ("symbol", to_json(a), cmd_symbol(a, cfg)),
        Command::Split(a) => ("split", to_json(a), cmd_split(a, cfg)),
        Command::Verify(a) => ("verify", to_json(a), cmd_verify(a, cfg)),
        Command::Lemma(a) => ("lemma", to_json(a), cmd_lemma(a, cfg)),
        Command::Witness(a) => ("witness", to_json(a), cmd_witness(a, cfg)),
        Command::ScanP3(a) => ("scan-p3", to_json(a), cmd_scan_p3(a, cfg)),
        Command::Rank(a) => ("rank", to_json(a), cmd_rank(a, cfg)),
    }
}

fn run(cli: Cli) -> u8 {
    let cfg = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return 2;
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: thread pool: {e}");
            return 4;
        }
    }
    let start = Instant::now();
    let (command, mut inputs, outcome) = dispatch(&cli.cmd, &cfg);
    if let Value::Object(m) = &mut inputs {
        m.insert("bounds".into(), json!({"q_max": cfg.q_max, "p_max": cfg.p_max, "factor_bound": cfg.factor_bound}));
    }
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    eprintln!("{command}: {elapsed_ms:.1} ms");
    let timing = cli.timing.then_some(Timing { elapsed_ms });
    let (results, table, error, code) = match outcome {
        Ok(out) => (out.results, out.table, None, 0),
        Err(f) => {
            let rec = f.record();
            eprintln!("error: {}", rec.message);
            (Value::Null, None, Some(rec), f.exit_code())
        }
    };
    let mut stdout = std::io::stdout().lock();
    let written = match cli.format {
        Format::Csv if code != 0 => Ok(()),
        Format::Csv => {
            let table = table.unwrap_or_else(|| report::flatten(&results));
            report::write_csv(&mut stdout, &table).map_err(|e| e.to_string())
        }
        Format::Json => {
            let env = Envelope {
                schema_version: report::SCHEMA_VERSION,
                command: command.to_string(),
                inputs,
                results,
                error,
                timing,
                library_version: cycsplit::VERSION,
            };
            report::write_json(&mut stdout, &env).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return 4;
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    ExitCode::from(run(cli))
}
