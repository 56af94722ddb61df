//! `supq`: q-characters, tableaux, identity checks and the graded spin chain
//! from the command line. Every run prints one JSON document on stdout.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use supq::coeff_ring::{parse_monomial, symbol_name, Q_HALF};
use supq::identities::{run_suite, Suite, SuiteParams, VerificationReport};
use supq::qchar::{eval_qchar_capped, kr_qchar_capped, Variant};
use supq::spinchain::{
    baxter_analysis, commutator_norm, default_b, qybe_residual, random_points, spectrum_basis, ChainConfig, Twist,
};
use supq::tableaux::{enumerate_capped, shape_young, transpose_tableau, Sign, DEFAULT_CAP};
use supq::{Error, Rank, WeightLatticeVector};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "supq", version, about = "q-characters, tableaux and spin chains for quantum affine gl(M|N)")]
struct Cli {
    /// TOML run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RankArgs {
    #[arg(long = "M")]
    big_m: Option<usize>,
    #[arg(long = "N")]
    big_n: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// q-character of an evaluation module or a KR module.
    Qchar {
        #[command(flatten)]
        rank: RankArgs,
        /// Comma-separated coordinates of λ; missing trailing entries are 0.
        #[arg(long, conflicts_with = "kr")]
        lambda: Option<String>,
        /// `i,m` for the KR module W^{(i)}_{m,a}.
        #[arg(long)]
        kr: Option<String>,
        #[arg(long, default_value = "plus")]
        variant: String,
        /// Tableau sign; must agree with the variant when given.
        #[arg(long)]
        sign: Option<String>,
        /// Spectral parameter, e.g. `q^3` or `a*q^-1`.
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Super semistandard tableaux of one shape.
    Tableaux {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "minus")]
        sign: String,
        /// Also emit the transposed tableaux (sign minus only).
        #[arg(long)]
        transpose: bool,
        /// Report only the count.
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Exact identity checks.
    Verify {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        suite: String,
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        s: Option<usize>,
    },
    /// Numeric graded spin chain.
    Chain {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, default_value_t = 2)]
        ell: usize,
        #[arg(long, default_value = "1.13")]
        q: String,
        /// Comma-separated inhomogeneities; their count overrides --ell.
        #[arg(long)]
        b: Option<String>,
        /// `seed:<n>` or `none`; defaults to the run seed.
        #[arg(long)]
        twist: Option<String>,
        /// Number of random triples (qybe) or pairs (commute).
        #[arg(long, default_value_t = 20)]
        samples: usize,
        action: ChainAction,
    },
    /// Replays every worked example exactly.
    PaperExamples,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ChainAction {
    Qybe,
    Commute,
    Spectrum,
    Baxter,
    Bae,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct Tolerances {
    qybe: f64,
    commute: f64,
    tq_fit: f64,
    bae: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { qybe: 1e-12, commute: 1e-10, tq_fit: 1e-8, bae: 1e-7 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    /// Formal symbols allowed in spectral parameters besides `q`.
    generators: Vec<String>,
    cap: usize,
    seed: u64,
    tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: None,
            n: None,
            generators: ["a", "c", "d"].map(String::from).to_vec(),
            cap: DEFAULT_CAP,
            seed: 42,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    fn load(path: Option<&PathBuf>) -> anyhow::Result<Self> {
        let cfg: RunConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        let t = &cfg.tolerances;
        if [t.qybe, t.commute, t.tq_fit, t.bae].iter().any(|&x| !(x > 0.0)) {
            anyhow::bail!("tolerances must be positive");
        }
        if cfg.cap == 0 {
            anyhow::bail!("cap must be positive");
        }
        Ok(cfg)
    }

    fn rank(&self, args: &RankArgs) -> Result<Rank, Usage> {
        let m = args.big_m.or(self.m).ok_or_else(|| Usage("--M is required".into()))?;
        let n = args.big_n.or(self.n).ok_or_else(|| Usage("--N is required".into()))?;
        Rank::new(m, n).map_err(|e| Usage(e.to_string()))
    }
}

/// A usage error: exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Errors in the inputs count as usage errors; the rest are run failures.
fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::Parse(_)
        | Error::Precondition(_)
        | Error::IndexOutOfRange { .. }
        | Error::RankMismatch { .. }
        | Error::NotInP(_)
        | Error::MissingSymbol(_)
        | Error::DimensionCap(..) => Usage(e.to_string()).into(),
        other => other.into(),
    }
}

struct Outcome {
    pass: bool,
    params: Value,
    result: Value,
}

fn parse_lambda(rank: Rank, s: &str) -> Result<WeightLatticeVector, Usage> {
    let mut v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Usage(format!("bad --lambda `{s}`")))?;
    if v.len() > rank.kappa() {
        return Err(Usage(format!("--lambda has {} entries, rank has {}", v.len(), rank.kappa())));
    }
    v.resize(rank.kappa(), 0);
    Ok(WeightLatticeVector::new(v))
}

fn parse_pair(s: &str, flag: &str) -> Result<(usize, usize), Usage> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Usage(format!("bad {flag} `{s}`")))?;
    match parts[..] {
        [x, y] => Ok((x, y)),
        _ => Err(Usage(format!("{flag} takes two integers"))),
    }
}

fn parse_complex(s: &str) -> Result<C, Usage> {
    s.trim().parse::<C>().map_err(|_| Usage(format!("bad complex number `{s}`")))
}

fn qchar_cmd(
    cfg: &RunConfig,
    rank: Rank,
    lambda: Option<&str>,
    kr: Option<&str>,
    variant: &str,
    sign: Option<&str>,
    a: &str,
    cap: Option<usize>,
) -> anyhow::Result<Outcome> {
    let variant: Variant = variant.parse().map_err(classify)?;
    if let Some(s) = sign {
        let s: Sign = s.parse().map_err(classify)?;
        if s != variant.tableau_sign() {
            return Err(Usage(format!("--sign {s:?} does not match the {variant:?} variant")).into());
        }
    }
    let a_mon = parse_monomial(a).map_err(classify)?;
    for sym in a_mon.symbols() {
        let name = symbol_name(sym);
        if sym != Q_HALF && !cfg.generators.contains(&name) {
            return Err(Usage(format!("undeclared generator `{name}` in --a")).into());
        }
    }
    let cap = cap.unwrap_or(cfg.cap);
    let (x, params) = match (lambda, kr) {
        (Some(l), None) => {
            let lam = parse_lambda(rank, l)?;
            let x = eval_qchar_capped(rank, variant, &lam, &a_mon, cap).map_err(classify)?;
            (x, json!({"lambda": lam.coords, "variant": variant, "a": a_mon.to_string()}))
        }
        (None, Some(k)) => {
            let (i, m) = parse_pair(k, "--kr")?;
            let x = kr_qchar_capped(rank, i, m, &a_mon, cap).map_err(classify)?;
            (x, json!({"kr": {"i": i, "m": m}, "a": a_mon.to_string()}))
        }
        _ => return Err(Usage("give exactly one of --lambda or --kr".into()).into()),
    };
    let result = json!({
        "terms": x.len(),
        "dim": x.dim(),
        "multiplicity_free": x.is_multiplicity_free(),
        "qchar": x,
    });
    Ok(Outcome { pass: true, params, result })
}

fn tableaux_cmd(
    cfg: &RunConfig,
    rank: Rank,
    lambda: &str,
    sign: &str,
    transpose: bool,
    count_only: bool,
    cap: Option<usize>,
) -> anyhow::Result<Outcome> {
    let lam = parse_lambda(rank, lambda)?;
    let sign: Sign = sign.parse().map_err(classify)?;
    if transpose && sign != Sign::Minus {
        return Err(Usage("--transpose applies to sign minus".into()).into());
    }
    let ts = enumerate_capped(rank, &lam, sign, cap.unwrap_or(cfg.cap)).map_err(classify)?;
    let shape = ts.first().map(|t| shape_young(t.diagram()));
    let mut result = json!({"count": ts.len(), "shape": shape});
    if !count_only {
        result["tableaux"] = json!(ts);
        if transpose {
            let tp: Vec<_> = ts.iter().map(transpose_tableau).collect::<supq::Result<_>>().map_err(classify)?;
            result["transposed"] = json!(tp);
        }
    }
    Ok(Outcome { pass: true, params: json!({"lambda": lam.coords, "sign": sign}), result })
}

fn reports_outcome(reports: Vec<VerificationReport>, params: Value) -> Outcome {
    let pass = reports.iter().all(VerificationReport::passed);
    let failed = reports.iter().filter(|r| !r.passed()).count();
    Outcome { pass, params, result: json!({"checks": reports.len(), "failed": failed, "reports": reports}) }
}

fn chain_cmd(
    cfg: &RunConfig,
    rank: Rank,
    ell: usize,
    q: &str,
    b: Option<&str>,
    twist: Option<&str>,
    samples: usize,
    action: ChainAction,
) -> anyhow::Result<Outcome> {
    let q = parse_complex(q)?;
    let b = match b {
        Some(s) => s.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?,
        None => default_b(ell),
    };
    let twist_spec = twist.map(String::from).unwrap_or_else(|| format!("seed:{}", cfg.seed));
    let tw = Twist::parse(&twist_spec, rank.kappa()).map_err(classify)?;
    let chain = ChainConfig::new(rank.m, rank.n, q, b, tw).map_err(classify)?;
    let params = json!({
        "ell": chain.ell(), "q": chain.q, "b": chain.b, "twist": twist_spec,
        "action": action, "samples": samples,
    });
    let tol = &cfg.tolerances;
    let (pass, result) = match action {
        ChainAction::Qybe => {
            let pts = random_points(3 * samples, cfg.seed);
            let res: Vec<f64> = pts
                .chunks(3)
                .map(|t| qybe_residual(rank.m, rank.n, q, [t[0], t[1], t[2]], true).abs)
                .collect();
            let max = res.iter().copied().fold(0.0, f64::max);
            let plain = qybe_residual(rank.m, rank.n, q, [pts[0], pts[1], pts[2]], false);
            (max < tol.qybe, json!({"max_residual": max, "tolerance": tol.qybe, "ungraded_residual": plain.abs}))
        }
        ChainAction::Commute => {
            let pts = random_points(2 * samples, cfg.seed);
            let res: Vec<f64> = pts
                .chunks(2)
                .map(|p| commutator_norm(&chain, p[0], p[1], chain.q))
                .collect::<supq::Result<_>>()
                .map_err(classify)?;
            let max = res.iter().copied().fold(0.0, f64::max);
            (max < tol.commute, json!({"max_commutator": max, "tolerance": tol.commute}))
        }
        ChainAction::Spectrum => {
            let u0 = random_points(1, cfg.seed)[0];
            let spec = spectrum_basis(&chain, chain.q, u0).map_err(classify)?;
            let (funcs, lower) = spec.sample(&chain, &[u0]).map_err(classify)?;
            let sectors: Vec<Value> = funcs
                .iter()
                .map(|f| json!({"content": f.content, "eigenvalue": f.values[0]}))
                .collect();
            (lower < tol.commute, json!({"u": u0, "aux_a": chain.q, "triangularity": lower, "eigenvalues": sectors}))
        }
        ChainAction::Baxter | ChainAction::Bae => {
            let s = baxter_analysis(&chain, cfg.seed).map_err(classify)?;
            let fit_ok = s.all_fitted() && s.max_fit_residual() < tol.tq_fit;
            let pass = match action {
                ChainAction::Bae => fit_ok && s.max_bae_residual() < tol.bae,
                _ => fit_ok,
            };
            let result = json!({
                "max_fit_residual": s.max_fit_residual(),
                "max_bae_residual": s.max_bae_residual(),
                "tolerances": {"tq_fit": tol.tq_fit, "bae": tol.bae},
                "summary": s,
            });
            (pass, result)
        }
    };
    Ok(Outcome { pass, params, result })
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Qchar { .. } => "qchar",
        Cmd::Tableaux { .. } => "tableaux",
        Cmd::Verify { .. } => "verify",
        Cmd::Chain { .. } => "chain",
        Cmd::PaperExamples => "paper-examples",
    }
}

fn run(cli: &Cli) -> anyhow::Result<(RunConfig, Outcome)> {
    let cfg = RunConfig::load(cli.config.as_ref()).map_err(|e| Usage(format!("{e:#}")))?;
    let out = match &cli.cmd {
        Cmd::Qchar { rank, lambda, kr, variant, sign, a, cap } => qchar_cmd(
            &cfg,
            cfg.rank(rank)?,
            lambda.as_deref(),
            kr.as_deref(),
            variant,
            sign.as_deref(),
            a,
            *cap,
        )?,
        Cmd::Tableaux { rank, lambda, sign, transpose, count_only, cap } => {
            tableaux_cmd(&cfg, cfg.rank(rank)?, lambda, sign, *transpose, *count_only, *cap)?
        }
        Cmd::Verify { rank, suite, i, m, s } => {
            let rk = cfg.rank(rank)?;
            let suite: Suite = suite.parse().map_err(classify)?;
            let reports = run_suite(rk, suite, SuiteParams { i: *i, m: *m, s: *s }).map_err(classify)?;
            if reports.is_empty() {
                return Err(Usage(format!("no {suite:?} check applies to these parameters")).into());
            }
            reports_outcome(reports, json!({"suite": format!("{suite:?}"), "i": i, "m": m, "s": s}))
        }
        Cmd::Chain { rank, ell, q, b, twist, samples, action } => {
            chain_cmd(&cfg, cfg.rank(rank)?, *ell, q, b.as_deref(), twist.as_deref(), *samples, *action)?
        }
        Cmd::PaperExamples => reports_outcome(supq::worked::all_examples().map_err(classify)?, json!({})),
    };
    Ok((cfg, out))
}

fn emit(pretty: bool, v: &Value) {
    let s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) };
    println!("{}", s.expect("JSON values always serialize"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = command_name(&cli.cmd);
    match run(&cli) {
        Ok((cfg, out)) => {
            let status = if out.pass { "PASS" } else { "FAIL" };
            emit(
                cli.pretty,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": command,
                    "status": status,
                    "seed": cfg.seed,
                    "params": out.params,
                    "result": out.result,
                }),
            );
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            let usage = e.downcast_ref::<Usage>().is_some();
            emit(
                cli.pretty,
                &json!({"schema_version": SCHEMA_VERSION, "command": command, "status": "ERROR", "error": format!("{e:#}")}),
            );
            eprintln!("supq {command}: {e:#}");
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
