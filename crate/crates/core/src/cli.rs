//! Command-line front end: configuration parsing, dispatch and output.
//!
//! Flags override config-file values, which override the defaults
//! (`R = 9`, `ε = 1/2`, `d = 42`, `K = 1`, reduced tower, seed 0).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diophantine::{
    block_ends, count_fast, count_naive, difference_spectrum, diophantine_profile, write_profile_csv,
    EquationParams, DEFAULT_PAIR_BUDGET,
};
use crate::dyadic::{decomposition_terms, window_weights, write_trace_csv, DyadicPoint, TraceRow, TrigPolySpec, GUARD_BITS};
use crate::error::Error;
use crate::sequence::{parse_rational, ConstructionParams, SequenceSpec, TowerSpec, DEFAULT_BIT_CAP};
use crate::stats::{
    block_large_value_probability, block_periodicity_check, clt_experiment, equal_weights, erdos_fortet_identity_trials,
    expand_weights, gaposhkin_experiment, lil_ratio_scan, lil_ratio_scan_at, local_variance_amplification,
    refine_point, sample_point, write_samples_csv, ExperimentReport, VERSION,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LACUNARY_OUT_DIR";

/// Naive cross-checks of `count` run up to this many terms.
const VERIFY_LIMIT: u64 = 5000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Lib(#[from] Error),
    #[error("check failed: {0}")]
    AssertFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::AssertFailed(_) => 1,
            CliError::Clap(e) if !e.use_stderr() => 0,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "lacunary", version, about = "Exact and Monte-Carlo experiments on lacunary sums")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the first N terms of a sequence.
    Generate(Opts),
    /// Count solutions of a·n_k − b·n_l = c with k, l ≤ N.
    Count(Opts),
    /// Multiset of differences a·n_k − b·n_l ≥ 0.
    Spectrum(Opts),
    /// Max count over c ≥ 1 and its normalized ratio, per N.
    Profile(Opts),
    /// Kolmogorov distance of normalized lacunary sums to Φ.
    Clt(Opts),
    /// Weighted dyadic cosine sums against Φ.
    Gaposhkin(Opts),
    /// |S_N| / √(2N log log N) across N.
    Lil(Opts),
    /// Split a reduced block sum into main, drag, sine and error terms.
    Decompose(Opts),
    /// Residual of the Erdős–Fortet factorization at random points.
    ErdosFortetCheck(Opts),
    /// Large-value probability and local variance of a block sum.
    Blockprob(Opts),
    /// Periodicity of a block sum under x → x + 2^{-T(i)}.
    Periodicity(Opts),
}

impl Cmd {
    fn parts(self) -> (&'static str, Opts) {
        match self {
            Cmd::Generate(o) => ("generate", o),
            Cmd::Count(o) => ("count", o),
            Cmd::Spectrum(o) => ("spectrum", o),
            Cmd::Profile(o) => ("profile", o),
            Cmd::Clt(o) => ("clt", o),
            Cmd::Gaposhkin(o) => ("gaposhkin", o),
            Cmd::Lil(o) => ("lil", o),
            Cmd::Decompose(o) => ("decompose", o),
            Cmd::ErdosFortetCheck(o) => ("erdos-fortet-check", o),
            Cmd::Blockprob(o) => ("blockprob", o),
            Cmd::Periodicity(o) => ("periodicity", o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Default, Clone)]
struct Opts {
    /// Config file (`key = value` lines, optional `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// geometric | erdos-fortet | paper | explicit
    #[arg(long)]
    seq: Option<String>,
    /// Base of the geometric sequence.
    #[arg(long)]
    q: Option<u64>,
    /// Comma-separated terms of an explicit sequence.
    #[arg(long)]
    terms: Option<String>,
    #[arg(long = "R")]
    r: Option<u64>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long = "K")]
    k: Option<String>,
    /// paper | reduced | explicit:T1,T2,...
    #[arg(long)]
    tower: Option<String>,
    #[arg(long = "bit-cap")]
    bit_cap: Option<u64>,
    /// N values: `10`, `10,100`, `2^10`, `1..5`.
    #[arg(long = "N")]
    n: Option<String>,
    /// Block range `i..j`; profile uses the block ends N(i).
    #[arg(long)]
    blocks: Option<String>,
    /// Block index.
    #[arg(long)]
    i: Option<u32>,
    #[arg(long)]
    a: Option<u64>,
    #[arg(long)]
    b: Option<u64>,
    #[arg(long)]
    c: Option<String>,
    /// Monte-Carlo sample count.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// poly:D | erdos-fortet | cos:F | sin:F
    #[arg(long)]
    f: Option<String>,
    /// equal:N | single | window:A | comma-separated list
    #[arg(long)]
    weights: Option<String>,
    /// Fixed point for `lil`: top 64 bits of this real, seeded low bits.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

const CONFIG_KEYS: &[&str] = &[
    "seq", "q", "terms", "R", "eps", "d", "K", "tower", "bit_cap", "N", "blocks", "i", "a", "b", "c", "M", "trials",
    "seed", "f", "weights", "x", "budget", "tolerance", "out", "format", "workers",
];

/// Sequence part of a [`RunConfig`], kept as given so it echoes back exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub kind: String,
    pub q: u64,
    pub terms: Vec<String>,
    pub r: u64,
    pub eps: String,
    pub d: u32,
    pub k: String,
    pub tower: String,
    pub bit_cap: u64,
}

impl SequenceConfig {
    pub fn params(&self) -> crate::Result<ConstructionParams> {
        let eps = parse_rational(&self.eps)?;
        let k = parse_rational(&self.k)?;
        let tower: TowerSpec = self.tower.parse()?;
        Ok(ConstructionParams::new(self.r, eps, self.d, k, tower)?.with_bit_cap(self.bit_cap))
    }

    pub fn spec(&self) -> crate::Result<SequenceSpec> {
        let spec = match self.kind.as_str() {
            "geometric" => SequenceSpec::Geometric { q: self.q },
            "erdos-fortet" => SequenceSpec::ErdosFortet,
            "paper" => SequenceSpec::Paper(self.params()?),
            "explicit" => SequenceSpec::Explicit(
                self.terms
                    .iter()
                    .map(|t| t.parse().map_err(|_| Error::InvalidParameter(format!("bad term {t:?}"))))
                    .collect::<crate::Result<_>>()?,
            ),
            other => return Err(Error::InvalidParameter(format!("unknown sequence {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub sequence: SequenceConfig,
    pub a: u64,
    pub b: u64,
    pub c: String,
    pub ns: Vec<u64>,
    pub blocks: Option<(u32, u32)>,
    pub i: u32,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub f: Option<String>,
    pub weights: String,
    pub x: Option<f64>,
    pub budget: u64,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Not echoed: output must not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn spec(&self) -> crate::Result<SequenceSpec> {
        self.sequence.spec()
    }

    pub fn params(&self) -> crate::Result<ConstructionParams> {
        self.sequence.params()
    }

    /// The trigonometric polynomial, defaulting to the natural one for the
    /// sequence family.
    pub fn function(&self) -> crate::Result<TrigPolySpec> {
        match &self.f {
            Some(s) => s.parse(),
            None => Ok(match self.sequence.kind.as_str() {
                "erdos-fortet" => TrigPolySpec::erdos_fortet(),
                "paper" => TrigPolySpec::dyadic_polynomial(self.sequence.d),
                _ => TrigPolySpec::dyadic_polynomial(1),
            }),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Parses `10`, `2^10`, `1..5` and comma lists of those.
pub fn parse_n_list(s: &str) -> CliResult<Vec<u64>> {
    let one = |t: &str| -> CliResult<u64> {
        let t = t.trim();
        if let Some((base, exp)) = t.split_once('^') {
            let base: u64 = base.trim().parse().map_err(|_| usage(format!("bad N value {t:?}")))?;
            let exp: u32 = exp.trim().parse().map_err(|_| usage(format!("bad N value {t:?}")))?;
            return base.checked_pow(exp).ok_or_else(|| usage(format!("{t} overflows")));
        }
        t.parse().map_err(|_| usage(format!("bad N value {t:?}")))
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (one(lo)?, one(hi)?);
            if lo > hi {
                return Err(usage(format!("empty range {part:?}")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(one(part)?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(usage("N values must be positive"));
    }
    Ok(out)
}

fn parse_blocks(s: &str) -> CliResult<(u32, u32)> {
    let bad = || usage(format!("bad block range {s:?} (expected i..j)"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let ini = ini::Ini::load_from_file(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (_, props) in &ini {
        for (k, v) in props.iter() {
            if !CONFIG_KEYS.contains(&k) {
                return Err(usage(format!("unknown config key {k:?} in {}", path.display())));
            }
            out.insert(k.to_string(), v.trim().to_string());
        }
    }
    Ok(out)
}

fn merge<T: std::str::FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(v) => v.parse().map(Some).map_err(|_| usage(format!("bad value {v:?} for {key}"))),
        None => Ok(None),
    }
}

fn resolve(command: &str, o: Opts) -> CliResult<RunConfig> {
    let file = match &o.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let format_from_file = match file.get("format").map(String::as_str) {
        None => None,
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        Some(v) => return Err(usage(format!("bad format {v:?}"))),
    };
    let kind = merge(o.seq, &file, "seq")?.unwrap_or_else(|| "paper".into());
    let terms: Vec<String> = merge(o.terms, &file, "terms")?
        .map(|s: String| s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect())
        .unwrap_or_default();
    let sequence = SequenceConfig {
        kind,
        q: merge(o.q, &file, "q")?.unwrap_or(2),
        terms,
        r: merge(o.r, &file, "R")?.unwrap_or(9),
        eps: merge(o.eps, &file, "eps")?.unwrap_or_else(|| "1/2".into()),
        d: merge(o.d, &file, "d")?.unwrap_or(42),
        k: merge(o.k, &file, "K")?.unwrap_or_else(|| "1".into()),
        tower: merge(o.tower, &file, "tower")?.unwrap_or_else(|| "reduced".into()),
        bit_cap: merge(o.bit_cap, &file, "bit_cap")?.unwrap_or(DEFAULT_BIT_CAP),
    };
    let eps = parse_rational(&sequence.eps).map_err(|e| usage(e.to_string()))?;
    if *eps.numer() == 0 || eps.numer() >= eps.denom() {
        return Err(usage(format!("eps = {} is not in (0, 1)", sequence.eps)));
    }
    sequence.params().map_err(|e| usage(e.to_string()))?;
    if !["geometric", "erdos-fortet", "paper", "explicit"].contains(&sequence.kind.as_str()) {
        return Err(usage(format!("unknown sequence {:?}", sequence.kind)));
    }

    let n_default = match command {
        "lil" => "2^4,2^6,2^8,2^10,2^12,2^14,2^16",
        "erdos-fortet-check" => "20",
        "clt" => "16",
        _ => "10",
    };
    let ns = parse_n_list(&merge(o.n, &file, "N")?.unwrap_or_else(|| n_default.into()))?;
    let blocks = merge(o.blocks, &file, "blocks")?.map(|s: String| parse_blocks(&s)).transpose()?;
    let default_format = match command {
        "generate" | "spectrum" | "profile" => Format::Csv,
        _ => Format::Json,
    };
    let c = merge(o.c, &file, "c")?.unwrap_or_else(|| "1".into());
    c.parse::<BigUint>().map_err(|_| usage(format!("c = {c:?} is not a non-negative integer")))?;
    let cfg = RunConfig {
        command: command.to_string(),
        sequence,
        a: merge(o.a, &file, "a")?.unwrap_or(1),
        b: merge(o.b, &file, "b")?.unwrap_or(1),
        c,
        ns,
        blocks,
        i: merge(o.i, &file, "i")?.unwrap_or(3),
        m: merge(o.m, &file, "M")?.unwrap_or(10_000),
        trials: merge(o.trials, &file, "trials")?.unwrap_or(100),
        seed: merge(o.seed, &file, "seed")?.unwrap_or(0),
        f: merge(o.f, &file, "f")?,
        weights: merge(o.weights, &file, "weights")?.unwrap_or_else(|| "equal:16".into()),
        x: merge(o.x, &file, "x")?,
        budget: merge(o.budget, &file, "budget")?.unwrap_or(DEFAULT_PAIR_BUDGET as u64),
        tolerance: merge(o.tolerance, &file, "tolerance")?.unwrap_or(1e-9),
        out: merge(o.out, &file, "out")?,
        format: o.format.or(format_from_file).unwrap_or(default_format),
        workers: merge(o.workers, &file, "workers")?,
    };
    if cfg.a == 0 || cfg.b == 0 {
        return Err(usage("a and b must be positive"));
    }
    if cfg.i == 0 {
        return Err(usage("block index i must be >= 1"));
    }
    if cfg.m == 0 || cfg.trials == 0 {
        return Err(usage("M and trials must be positive"));
    }
    if let Some(x) = cfg.x {
        if !(0.0..1.0).contains(&x) {
            return Err(usage(format!("x = {x} is not in [0, 1)")));
        }
    }
    if let Some(f) = &cfg.f {
        f.parse::<TrigPolySpec>().map_err(|e| usage(e.to_string()))?;
    }
    Ok(cfg)
}

/// Parses arguments (and the config file they name) into a [`RunConfig`].
pub fn parse_config<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (name, opts) = cli.command.parts();
    resolve(name, opts)
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// Printed to stdout when no output file is set.
    pub body: String,
    pub extension: &'static str,
    /// Set when a hard check failed; the body is still written.
    pub failure: Option<String>,
    /// `count` prints its bare value regardless of the destination.
    pub stdout_line: Option<String>,
}

impl Output {
    fn new(body: String, extension: &'static str) -> Self {
        Output { body, extension, failure: None, stdout_line: None }
    }
}

fn header_line(cfg: &RunConfig) -> String {
    format!("# lacunary {VERSION} config={}\n", cfg.to_json())
}

fn json_body(cfg: &RunConfig, result: Value) -> String {
    let doc = json!({ "header": { "lacunary": VERSION, "config": cfg.to_json() }, "result": result });
    serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n"
}

fn report_value(r: &ExperimentReport) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

fn csv_body(cfg: &RunConfig, write: impl FnOnce(&mut Vec<u8>) -> crate::Result<()>) -> CliResult<String> {
    let mut buf = header_line(cfg).into_bytes();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).unwrap_or_default())
}

fn max_n(cfg: &RunConfig) -> u64 {
    cfg.ns.iter().copied().max().unwrap_or(1)
}

fn run_generate(cfg: &RunConfig) -> CliResult<Output> {
    let prefix = cfg.spec()?.prefix(max_n(cfg))?;
    Ok(match cfg.format {
        Format::Csv => Output::new(
            csv_body(cfg, |w| {
                writeln!(w, "k,n_k")?;
                for (k, n) in prefix.iter().enumerate() {
                    writeln!(w, "{},{n}", k + 1)?;
                }
                Ok(())
            })?,
            "csv",
        ),
        Format::Json => {
            let terms: Vec<String> = prefix.iter().map(ToString::to_string).collect();
            Output::new(json_body(cfg, json!({ "terms": terms })), "json")
        }
    })
}

fn run_count(cfg: &RunConfig) -> CliResult<Output> {
    let n = max_n(cfg);
    let prefix = cfg.spec()?.prefix(n)?;
    let c: BigUint = cfg.c.parse().map_err(|_| usage("bad c"))?;
    let eq = EquationParams::new(cfg.a, cfg.b, c);
    eq.validate()?;
    let fast = count_fast(&prefix, &eq);
    let naive = (n <= VERIFY_LIMIT).then(|| count_naive(&prefix, &eq));
    let mut out = match cfg.format {
        Format::Csv => Output::new(
            csv_body(cfg, |w| {
                writeln!(w, "N,a,b,c,count")?;
                writeln!(w, "{n},{},{},{},{fast}", cfg.a, cfg.b, cfg.c)?;
                Ok(())
            })?,
            "csv",
        ),
        Format::Json => Output::new(json_body(cfg, json!({ "N": n, "count": fast, "naive": naive })), "json"),
    };
    out.stdout_line = Some(fast.to_string());
    if let Some(v) = naive.filter(|&v| v != fast) {
        out.failure = Some(format!("fast count {fast} differs from naive count {v}"));
    }
    Ok(out)
}

fn run_spectrum(cfg: &RunConfig) -> CliResult<Output> {
    let prefix = cfg.spec()?.prefix(max_n(cfg))?;
    let spec = difference_spectrum(&prefix, cfg.a, cfg.b, cfg.budget as u128)?;
    Ok(match cfg.format {
        Format::Csv => Output::new(
            csv_body(cfg, |w| {
                writeln!(w, "c,count")?;
                for (c, k) in &spec.counts {
                    writeln!(w, "{c},{k}")?;
                }
                Ok(())
            })?,
            "csv",
        ),
        Format::Json => {
            let counts: Vec<Value> = spec.counts.iter().map(|(c, k)| json!([c.to_string(), k])).collect();
            Output::new(json_body(cfg, json!({ "N": spec.n, "counts": counts })), "json")
        }
    })
}

fn run_profile(cfg: &RunConfig) -> CliResult<Output> {
    let spec = cfg.spec()?;
    let ns = match (cfg.blocks, spec.params()) {
        (Some((lo, hi)), Some(p)) => block_ends(p, lo..=hi)?,
        (Some(_), None) => return Err(usage("--blocks needs the paper sequence")),
        (None, _) => cfg.ns.clone(),
    };
    let eps = cfg.params()?.eps_f64();
    let rows = diophantine_profile(&spec, cfg.a, cfg.b, &ns, eps, cfg.budget as u128)?;
    Ok(match cfg.format {
        Format::Csv => Output::new(csv_body(cfg, |w| write_profile_csv(w, &rows))?, "csv"),
        Format::Json => Output::new(json_body(cfg, serde_json::to_value(&rows).unwrap_or(Value::Null)), "json"),
    })
}

fn run_clt(cfg: &RunConfig) -> CliResult<Output> {
    let n = *cfg.ns.first().unwrap_or(&16);
    let out = clt_experiment(&cfg.function()?, &cfg.spec()?, n, cfg.m, cfg.seed)?;
    Ok(match cfg.format {
        Format::Csv => Output::new(csv_body(cfg, |w| write_samples_csv(w, &out.samples))?, "csv"),
        Format::Json => Output::new(json_body(cfg, report_value(&out.report)), "json"),
    })
}

fn weights_from(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let w = cfg.weights.trim();
    if w == "single" {
        return Ok(vec![1.0]);
    }
    if let Some(n) = w.strip_prefix("equal:") {
        let n: usize = n.parse().map_err(|_| usage(format!("bad weights {w:?}")))?;
        if n == 0 {
            return Err(usage("equal:N needs N >= 1"));
        }
        return Ok(equal_weights(n));
    }
    if let Some(a) = w.strip_prefix("window:") {
        let a: u64 = a.parse().map_err(|_| usage(format!("bad weights {w:?}")))?;
        let ww = window_weights(a, cfg.i, &cfg.params()?)?;
        return Ok(expand_weights(&ww.lambda, &ww.sizes));
    }
    w.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("bad weight {v:?}"))))
        .collect()
}

fn run_gaposhkin(cfg: &RunConfig) -> CliResult<Output> {
    let out = gaposhkin_experiment(&weights_from(cfg)?, cfg.m, cfg.seed)?;
    Ok(match cfg.format {
        Format::Csv => Output::new(csv_body(cfg, |w| write_samples_csv(w, &out.samples))?, "csv"),
        Format::Json => Output::new(json_body(cfg, report_value(&out.report)), "json"),
    })
}

fn run_lil(cfg: &RunConfig) -> CliResult<Output> {
    let f = cfg.function()?;
    let spec = cfg.spec()?;
    let report = match cfg.x {
        Some(x) => {
            let top = max_n(cfg);
            let p = spec.term(top)?.bits() + f.max_frequency().bits() + GUARD_BITS;
            let point = refine_point(&DyadicPoint::from_f64(x, 64)?, p.max(64), cfg.seed)?;
            lil_ratio_scan_at(&f, &spec, &cfg.ns, &point)?
        }
        None => lil_ratio_scan(&f, &spec, &cfg.ns, cfg.m, cfg.seed)?,
    };
    Ok(match cfg.format {
        Format::Csv => Output::new(
            csv_body(cfg, |w| {
                writeln!(w, "N,max_ratio,mean_ratio,running_max")?;
                for row in &report.table {
                    let g = |k: &str| row.get(k).copied().unwrap_or(f64::NAN);
                    writeln!(w, "{},{},{},{}", g("N"), g("max_ratio"), g("mean_ratio"), g("running_max"))?;
                }
                Ok(())
            })?,
            "csv",
        ),
        Format::Json => Output::new(json_body(cfg, report_value(&report)), "json"),
    })
}

fn run_decompose(cfg: &RunConfig) -> CliResult<Output> {
    let params = cfg.params()?;
    let block = params.block(cfg.i)?;
    let p = block.hi + params.d as u64 + 64 + GUARD_BITS;
    let rows: Vec<(DyadicPoint, crate::dyadic::DecompositionReport)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| {
            let x = sample_point(cfg.seed, k, p);
            let r = decomposition_terms(&params, cfg.i, &x)?;
            Ok((x, r))
        })
        .collect::<crate::Result<_>>()?;
    let max_residual = rows.iter().map(|r| r.1.residual).fold(0.0, f64::max);
    let max_error = rows.iter().map(|r| r.1.error.abs()).fold(0.0, f64::max);
    let bound = (params.d as f64).powi(2) * cfg.i as f64;
    let mut report = ExperimentReport::new("decompose", Some(cfg.seed))
        .param("i", cfg.i)
        .param("d", params.d)
        .param("trials", cfg.trials)
        .param("precision", p)
        .param("error_summands", rows.first().map(|r| r.1.error_summands).unwrap_or(0));
    report.stat("max_residual", max_residual);
    report.stat("max_abs_error_term", max_error);
    report.threshold("tolerance", cfg.tolerance);
    report.threshold("error_bound", bound);
    report.check("residual_within_tolerance", max_residual <= cfg.tolerance);
    report.check("error_within_bound", max_error <= bound);
    let mut out = match cfg.format {
        Format::Csv => {
            let trace: Vec<TraceRow> =
                rows.iter().map(|(x, r)| TraceRow { x: x.clone(), n: block.hi, value: r.direct }).collect();
            Output::new(csv_body(cfg, |w| write_trace_csv(w, &trace))?, "csv")
        }
        Format::Json => Output::new(json_body(cfg, report_value(&report)), "json"),
    };
    if !report.passed() {
        out.failure = Some(format!("decomposition residual {max_residual:e} or error term {max_error} out of bounds"));
    }
    Ok(out)
}

fn run_erdos_fortet_check(cfg: &RunConfig) -> CliResult<Output> {
    let n = max_n(cfg);
    let report = erdos_fortet_identity_trials(n, cfg.trials, cfg.seed, cfg.tolerance);
    let mut out = Output::new(json_body(cfg, report_value(&report)), "json");
    if !report.passed() {
        out.failure = Some(format!("identity residual {:e} above {:e}", report.statistics["max_residual"], cfg.tolerance));
    }
    Ok(out)
}

fn run_blockprob(cfg: &RunConfig) -> CliResult<Output> {
    let params = cfg.params()?;
    let large = block_large_value_probability(&params, cfg.i, cfg.m, cfg.seed)?;
    let local = local_variance_amplification(&params, cfg.i, cfg.m, cfg.seed)?;
    Ok(match cfg.format {
        Format::Csv => Output::new(csv_body(cfg, |w| write_samples_csv(w, &large.samples))?, "csv"),
        Format::Json => Output::new(
            json_body(cfg, json!({ "large_value": report_value(&large.report), "local_variance": report_value(&local) })),
            "json",
        ),
    })
}

fn run_periodicity(cfg: &RunConfig) -> CliResult<Output> {
    let params = cfg.params()?;
    let (lo, hi) = cfg.blocks.unwrap_or((cfg.i, cfg.i));
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for i in lo..=hi {
        let r = block_periodicity_check(&params, i, cfg.trials, cfg.seed)?.to_report(cfg.seed, cfg.tolerance);
        if !r.passed() {
            failed.push(i);
        }
        reports.push(report_value(&r));
    }
    let mut out = Output::new(json_body(cfg, Value::Array(reports)), "json");
    if !failed.is_empty() {
        out.failure = Some(format!("blocks {failed:?} are not periodic"));
    }
    Ok(out)
}

/// Runs the command, returning its output without writing anything.
pub fn execute(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.command.as_str() {
        "generate" => run_generate(cfg),
        "count" => run_count(cfg),
        "spectrum" => run_spectrum(cfg),
        "profile" => run_profile(cfg),
        "clt" => run_clt(cfg),
        "gaposhkin" => run_gaposhkin(cfg),
        "lil" => run_lil(cfg),
        "decompose" => run_decompose(cfg),
        "erdos-fortet-check" => run_erdos_fortet_check(cfg),
        "blockprob" => run_blockprob(cfg),
        "periodicity" => run_periodicity(cfg),
        other => Err(usage(format!("unknown command {other:?}"))),
    }
}

/// Where the output goes: `--out`, else `$LACUNARY_OUT_DIR/<command>.<ext>`,
/// else stdout.
pub fn destination(cfg: &RunConfig, extension: &str) -> Option<PathBuf> {
    if let Some(p) = &cfg.out {
        return Some(p.clone());
    }
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| Path::new(&d).join(format!("{}.{extension}", cfg.command)))
}

fn write_output(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    match destination(cfg, out.extension) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Error::from)?;
            }
            fs::write(&path, &out.body).map_err(Error::from)?;
            if let Some(line) = &out.stdout_line {
                println!("{line}");
            }
        }
        None => match &out.stdout_line {
            Some(line) => println!("{line}"),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(out.body.as_bytes()).map_err(Error::from)?;
            }
        },
    }
    Ok(())
}

fn run_inner<I, T>(argv: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = parse_config(argv)?;
    let work = || -> CliResult<()> {
        let out = execute(&cfg)?;
        write_output(&cfg, &out)?;
        match out.failure {
            Some(msg) => Err(CliError::AssertFailed(msg)),
            None => Ok(()),
        }
    };
    match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| usage(format!("cannot start {n} workers: {e}")))?;
            pool.install(work)
        }
        None => work(),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_inner(argv) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            // help and version go to stdout with exit 0
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("lacunary: {e}");
            e.exit_code()
        }
    }
}
