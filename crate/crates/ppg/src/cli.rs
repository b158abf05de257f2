//! The `ppg` command line.
//!
//! Every run prints a header line (version, command, config hash, seed) and
//! then its result as JSON on stdout. Exit codes: 0 success, 1 a well-posed
//! negative answer (rejection, obstruction, failed check, mismatch), 2 usage
//! or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use ppg_core::groups::{coproduct, demushkin, free, Presentation};
use ppg_core::magnus::{check_mild, cup_value, MildError, MonomialOrder, DEFAULT_MILD_DEGREE};
use ppg_core::massey::{
    cup_chain_ok, defining_system, full_rank_surjection, strong_massey_lift, verify_witness, CharacterTuple,
    LiftConfig, MasseyError, DEFAULT_BUDGET,
};
use ppg_core::numtheory::{
    is_irreducible, q_ray_structure, rank_report, signature, wieferich_scan, wieferich_test, NumError, SMode,
    TameScanner, ZPoly,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::format::{parse_factor_arg, FactorJson, Int, ObstructionJson, PresentationJson, SolverJson, WitnessJson};
use crate::scan::{sharded, thread_count};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ppg", version, about = "Pro-p group presentations, unipotent lifts and tame-prime scans")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Recorded in the header; every algorithm is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result artifact to this file as well.
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Certify mildness of a presentation from its quadratic leading terms.
    Mild(MildArgs),
    /// Cup products of consecutive characters, evaluated on the relators.
    Cup(CupArgs),
    /// Lift a character tuple (or a full-rank tuple with --n) to U_{n+1}(Z/p^m).
    Lift(LiftArgs),
    /// Re-check a witness file.
    Verify(VerifyArgs),
    /// Search for a defining system of an n-fold Massey product (n >= 3).
    Defined(DefinedArgs),
    /// Primes l <= bound with a prime above l of tame level >= m, as JSON lines.
    TameScan(TameScanArgs),
    /// Signature (r1, r2) of the field defined by a polynomial.
    Signature(PolyArgs),
    /// Z_p-rank delta_S - (r1 + r2 - 1 + |T|) and the predicted unipotent size.
    Rank(RankArgs),
    /// p-part of (Z/(p^B l_1 ... l_r))^x against its predicted structure.
    Qray(QrayArgs),
    /// Wieferich test (--p) or scan up to --bound, sharded over threads.
    Wieferich(WieferichArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Mild(_) => "mild",
            Cmd::Cup(_) => "cup",
            Cmd::Lift(_) => "lift",
            Cmd::Verify(_) => "verify",
            Cmd::Defined(_) => "defined",
            Cmd::TameScan(_) => "tame-scan",
            Cmd::Signature(_) => "signature",
            Cmd::Rank(_) => "rank",
            Cmd::Qray(_) => "qray",
            Cmd::Wieferich(_) => "wieferich",
        }
    }
}

/// A group given by factors or by a presentation file.
///
/// Demushkin factors are `<x1, x2 | x2 x1 x2^-1 x1^-q>`; in a coproduct the
/// generators of factor `i` are `xi_1`, `xi_2`.
#[derive(Debug, Args, Serialize)]
struct GroupArgs {
    #[arg(long)]
    p: Option<u64>,
    /// Comma-separated factors: `q=19` (Demushkin) or `free=2`.
    #[arg(long, value_delimiter = ',')]
    factors: Vec<String>,
    /// Presentation JSON file.
    #[arg(short = 'i', long = "json-in", alias = "presentation")]
    json_in: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MildArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Variables from greatest to least, 1-based (default: X_d > ... > X_1).
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_MILD_DEGREE)]
    degree: u32,
}

#[derive(Debug, Args, Serialize)]
struct CupArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Characters separated by `;`, values by `,`, one value per generator.
    #[arg(long)]
    chis: String,
}

#[derive(Debug, Args, Serialize)]
struct LiftArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Build the full-rank surjection onto U_{n+1}.
    #[arg(long, conflicts_with = "chis")]
    n: Option<usize>,
    /// Explicit character tuple, `;`-separated.
    #[arg(long)]
    chis: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// Witness JSON file.
    #[arg(short = 'i', long = "json-in")]
    json_in: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DefinedArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[arg(long)]
    chis: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Debug, Args, Serialize)]
struct PolyArgs {
    /// `x^8-32*x^6+...` or a descending coefficient list `[1,0,1]`.
    #[arg(long)]
    poly: String,
}

#[derive(Debug, Args, Serialize)]
struct TameScanArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long)]
    bound: u64,
}

#[derive(Debug, Args, Serialize)]
struct RankArgs {
    #[command(flatten)]
    poly: PolyArgs,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 0)]
    t_size: usize,
    /// 0-based indices of factors of f mod p forming S ∩ S_p (default: all of S_p).
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
}

#[derive(Debug, Args, Serialize)]
struct QrayArgs {
    #[arg(long)]
    p: u64,
    /// Tame primes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    ells: Vec<u64>,
    #[arg(long)]
    b: u32,
}

#[derive(Debug, Args, Serialize)]
struct WieferichArgs {
    #[arg(long, default_value_t = 2)]
    base: u64,
    /// Test a single prime.
    #[arg(long, conflicts_with = "bound")]
    p: Option<u64>,
    /// Scan primes up to this bound.
    #[arg(long)]
    bound: Option<u64>,
    #[arg(long, default_value_t = 2)]
    from: u64,
}

/// What a command produced.
struct Outcome {
    code: i32,
    /// JSON documents, one per output line.
    lines: Vec<Value>,
}

impl Outcome {
    fn ok(v: Value) -> Self {
        Outcome { code: 0, lines: vec![v] }
    }

    fn negative(v: Value) -> Self {
        Outcome { code: 1, lines: vec![v] }
    }
}

#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

/// Canonical hash of the command and its parameters (output path excluded).
fn config_hash(cmd: &Cmd, seed: u64) -> String {
    let cfg = json!({ "command": cmd.name(), "params": cmd, "seed": seed });
    let digest = Sha256::digest(serde_json::to_vec(&cfg).expect("config serializes"));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs the CLI with `args` (including the program name), writing to `out`
/// and `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let header = json!({
        "ppg": VERSION,
        "command": cli.cmd.name(),
        "config_hash": config_hash(&cli.cmd, cli.seed),
        "seed": cli.seed,
    });
    let _ = writeln!(out, "{header}");
    let outcome = match execute(&cli.cmd) {
        Ok(o) => o,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    for line in &outcome.lines {
        let _ = writeln!(out, "{line}");
    }
    if let Some(path) = &cli.output {
        if let Err(e) = write_artifact(path, &cli.cmd, &outcome) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    outcome.code
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn write_artifact(path: &Path, cmd: &Cmd, outcome: &Outcome) -> std::io::Result<()> {
    let mut text = String::new();
    if matches!(cmd, Cmd::TameScan(_)) {
        for line in &outcome.lines {
            text.push_str(&line.to_string());
            text.push('\n');
        }
    } else {
        for line in &outcome.lines {
            text.push_str(&serde_json::to_string_pretty(line).expect("value serializes"));
            text.push('\n');
        }
    }
    std::fs::write(path, text)
}

fn execute(cmd: &Cmd) -> Result<Outcome, Usage> {
    match cmd {
        Cmd::Mild(a) => mild(a),
        Cmd::Cup(a) => cup(a),
        Cmd::Lift(a) => lift(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Defined(a) => defined(a),
        Cmd::TameScan(a) => tame_scan(a),
        Cmd::Signature(a) => sig(a),
        Cmd::Rank(a) => rank(a),
        Cmd::Qray(a) => qray(a),
        Cmd::Wieferich(a) => wieferich(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Usage> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load_group(a: &GroupArgs) -> Result<Presentation, Usage> {
    match (&a.json_in, a.factors.is_empty()) {
        (Some(_), false) => Err(Usage("give either --factors or --json-in, not both".into())),
        (None, true) => Err(Usage("a group is required: --factors or --json-in".into())),
        (Some(path), true) => {
            let pj: PresentationJson = read_json(path)?;
            if a.p.is_some_and(|p| p != pj.p) {
                return Err(Usage(format!("--p disagrees with the presentation prime {}", pj.p)));
            }
            Ok(pj.to_presentation()?)
        }
        (None, false) => {
            let p = a.p.ok_or_else(|| Usage("--p is required with --factors".into()))?;
            let mut parts = Vec::with_capacity(a.factors.len());
            for arg in &a.factors {
                let part = match parse_factor_arg(arg) {
                    Some(FactorJson::Demushkin { q }) => demushkin(&q.to_biguint()?, p)?,
                    Some(FactorJson::Free { rank }) => free(rank, p)?,
                    None => return Err(Usage(format!("bad factor {arg:?}: expected q=<int> or free=<rank>"))),
                };
                parts.push(part);
            }
            if parts.len() == 1 {
                Ok(parts.pop().expect("one part"))
            } else {
                Ok(coproduct(&parts)?)
            }
        }
    }
}

fn parse_chis(s: &str, p: u64, d: usize) -> Result<CharacterTuple, Usage> {
    let mut chis = Vec::new();
    for part in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
        let mut chi = Vec::new();
        for v in part.split(',') {
            let v: i128 = v.trim().parse().map_err(|_| Usage(format!("bad character value {v:?}")))?;
            chi.push(v.rem_euclid(p as i128) as u64);
        }
        chis.push(chi);
    }
    Ok(CharacterTuple::new(p, d, chis)?)
}

fn mild(a: &MildArgs) -> Result<Outcome, Usage> {
    let pres = load_group(&a.group)?;
    let d = pres.num_generators();
    let order = if a.order.is_empty() {
        MonomialOrder::natural(d)
    } else {
        let zero_based = a
            .order
            .iter()
            .map(|&v| v.checked_sub(1).ok_or_else(|| Usage("order variables are 1-based".into())))
            .collect::<Result<Vec<_>, _>>()?;
        MonomialOrder::from_descending(&zero_based)?
    };
    let order_json: Vec<usize> = order.descending().iter().map(|v| v + 1).collect();
    match check_mild(&pres, &order, a.degree) {
        Ok(cert) => Ok(Outcome::ok(json!({
            "mild": true,
            "order": order_json,
            "degree": cert.degree,
            "leading": cert.leading.iter().map(|&(h, t)| format!("X{}X{}", h + 1, t + 1)).collect::<Vec<_>>(),
            "heads": cert.heads.iter().map(|v| v + 1).collect::<Vec<_>>(),
            "tails": cert.tails.iter().map(|v| v + 1).collect::<Vec<_>>(),
            "p_two_convention": cert.p_two_convention,
        }))),
        Err(MildError::Rejected(r)) => Ok(Outcome::negative(json!({
            "mild": false,
            "order": order_json,
            "relator": r.relator,
            "leading": r.leading.as_ref().map(|(m, _)| m.to_string()),
            "coefficient": r.leading.as_ref().map(|(_, c)| *c),
            "reason": r.reason.to_string(),
        }))),
        Err(MildError::Magnus(e)) => Err(Usage(e.to_string())),
    }
}

fn cup(a: &CupArgs) -> Result<Outcome, Usage> {
    let pres = load_group(&a.group)?;
    let chis = parse_chis(&a.chis, pres.p(), pres.num_generators())?;
    if chis.n() < 2 {
        return Err(Usage("--chis needs at least two characters".into()));
    }
    let mut cups = Vec::new();
    for u in 0..chis.n() - 1 {
        let v = cup_value(&chis.chis()[u], &chis.chis()[u + 1], &pres)?;
        cups.push(json!({ "pair": [u + 1, u + 2], "components": v.components, "zero": v.is_zero() }));
    }
    let chain = cup_chain_ok(&pres, &chis)?;
    Ok(Outcome::ok(json!({
        "cups": cups,
        "chain_ok": chain.ok(),
        "first_failure": chain.first_failure.map(|i| [i + 1, i + 2]),
        "p_two_convention": chain.p_two_convention,
    })))
}

fn massey_negative(e: MasseyError) -> Result<Outcome, Usage> {
    match e {
        MasseyError::Obstruction(o) => {
            Ok(Outcome::negative(json!({ "obstruction": ObstructionJson::from(o.as_ref()), "message": o.to_string() })))
        }
        MasseyError::PreconditionCup { index } => Ok(Outcome::negative(json!({
            "precondition_failed": { "cup": [index + 1, index + 2] },
            "message": e.to_string(),
        }))),
        MasseyError::NoSurjectiveTuple => Ok(Outcome::negative(json!({ "no_surjection": true, "message": e.to_string() }))),
        other => Err(Usage(other.to_string())),
    }
}

fn lift(a: &LiftArgs) -> Result<Outcome, Usage> {
    let pres = load_group(&a.group)?;
    let config = LiftConfig { budget: a.budget };
    let result = match (&a.n, &a.chis) {
        (Some(n), None) => full_rank_surjection(&pres, *n, a.m, config),
        (None, Some(s)) => strong_massey_lift(&pres, &parse_chis(s, pres.p(), pres.num_generators())?, a.m, config),
        _ => return Err(Usage("give exactly one of --n or --chis".into())),
    };
    match result {
        Ok(w) => Ok(Outcome::ok(serde_json::to_value(WitnessJson::from_witness(&w))?)),
        Err(e) => massey_negative(e),
    }
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Usage> {
    let wj: WitnessJson = read_json(&a.json_in)?;
    let w = wj.to_witness()?;
    let report = verify_witness(&w);
    let body = json!({
        "all_passed": report.all_passed(),
        "surjective": report.surjective,
        "checks": report.checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed })).collect::<Vec<_>>(),
    });
    Ok(if report.all_passed() { Outcome::ok(body) } else { Outcome::negative(body) })
}

fn defined(a: &DefinedArgs) -> Result<Outcome, Usage> {
    let pres = load_group(&a.group)?;
    let chis = parse_chis(&a.chis, pres.p(), pres.num_generators())?;
    match defining_system(&pres, &chis, LiftConfig { budget: a.budget }) {
        Ok(ds) => Ok(Outcome::ok(json!({
            "defined": true,
            "n": chis.n(),
            "images": ds.images.iter().map(|q| q.representative().strict_upper()).collect::<Vec<_>>(),
            "solver": SolverJson::from(&ds.stats),
        }))),
        Err(e) => massey_negative(e),
    }
}

fn parse_poly(s: &str) -> Result<ZPoly, Usage> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
        let coeffs = inner
            .split(',')
            .map(|c| c.trim().parse::<BigInt>().map_err(|_| Usage(format!("bad coefficient {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(ZPoly::from_descending(&coeffs));
    }
    Ok(ZPoly::parse(t)?)
}

fn tame_scan(a: &TameScanArgs) -> Result<Outcome, Usage> {
    let f = parse_poly(&a.poly.poly)?;
    let scanner = TameScanner::new(f, a.p, a.m)?;
    let reports = sharded(2, a.bound, 4096, thread_count(), |lo, hi| scanner.scan_range(lo, hi));
    let lines = reports
        .iter()
        .map(|r| {
            json!({
                "ell": r.ell,
                "degrees": r.degrees,
                "norms": r.norms.iter().map(|n| Int::from_big(&BigInt::from(n.clone()))).collect::<Vec<_>>(),
                "levels": r.levels,
                "max_level": r.max_level(),
                "untrusted": r.untrusted,
                "ramified": r.ramified,
            })
        })
        .collect();
    Ok(Outcome { code: 0, lines })
}

fn sig(a: &PolyArgs) -> Result<Outcome, Usage> {
    let f = parse_poly(&a.poly)?;
    match signature(&f) {
        Ok((r1, r2)) => Ok(Outcome::ok(json!({
            "poly": f.to_string(),
            "degree": f.degree(),
            "discriminant": Int::from_big(&f.discriminant()),
            "irreducible": if f.is_monic() { is_irreducible(&f).ok() } else { None },
            "r1": r1,
            "r2": r2,
        }))),
        Err(NumError::NotSquarefree) => {
            Ok(Outcome::negative(json!({ "poly": f.to_string(), "error": NumError::NotSquarefree.to_string() })))
        }
        Err(e) => Err(Usage(e.to_string())),
    }
}

fn rank(a: &RankArgs) -> Result<Outcome, Usage> {
    let f = parse_poly(&a.poly.poly)?;
    let mode = match &a.subset {
        Some(ix) => SMode::Subset(ix.clone()),
        None => SMode::AllOfSp,
    };
    match rank_report(&f, a.p, &mode, a.t_size) {
        Ok(r) => Ok(Outcome::ok(json!({
            "p": r.p,
            "delta": r.delta,
            "t_size": r.t_size,
            "r1": r.r1,
            "r2": r.r2,
            "rank": r.rank,
            "unipotent_size": r.unipotent_size,
        }))),
        Err(e @ (NumError::NotSquarefree | NumError::PDividesDisc { .. })) => {
            Ok(Outcome::negative(json!({ "error": e.to_string() })))
        }
        Err(e) => Err(Usage(e.to_string())),
    }
}

fn qray(a: &QrayArgs) -> Result<Outcome, Usage> {
    let s = q_ray_structure(a.p, &a.ells, a.b)?;
    let body = json!({
        "p": s.p,
        "ells": s.ells,
        "exponents": s.exponents,
        "b": s.b,
        "computed": s.computed,
        "predicted": s.predicted,
        "matches": s.matches(),
    });
    Ok(if s.matches() { Outcome::ok(body) } else { Outcome::negative(body) })
}

fn wieferich(a: &WieferichArgs) -> Result<Outcome, Usage> {
    match (a.p, a.bound) {
        (Some(p), None) => {
            let ok = wieferich_test(a.base, p)?;
            Ok(Outcome::ok(json!({ "base": a.base, "p": p, "wieferich": ok })))
        }
        (None, Some(bound)) => {
            // validates the base once; shards cannot fail afterwards
            wieferich_scan(a.base, 0, 0)?;
            let primes = sharded(a.from, bound, 1 << 16, thread_count(), |lo, hi| {
                wieferich_scan(a.base, lo, hi).expect("base validated")
            });
            Ok(Outcome::ok(json!({ "base": a.base, "from": a.from, "bound": bound, "primes": primes })))
        }
        _ => Err(Usage("give exactly one of --p or --bound".into())),
    }
}
