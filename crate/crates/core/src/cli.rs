//! Command-line front end. Exit codes: 0 success, 1 failed verification,
//! 2 parse/validation/cache-file errors, 3 internal assertion or corrupt memo.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use crate::cache::{EngineKind, MemoCache};
use crate::engine::{Engine, EvalConfig, StatsSnapshot};
use crate::error::{Error, Result};
use crate::genus0::Genus0Engine;
use crate::picard::DivisorClass;
use crate::quadruple::Quadruple;
use crate::splitter::GenusOffset;
use crate::tangency::TangencyVector;
use crate::verify::{run_suite, Suite};

#[derive(Parser, Debug)]
#[command(name = "dp6", version, about = "Exact relative invariants of the plane blown up at six points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EngineArg {
    General,
    Genus0,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args, Debug, Clone)]
pub struct QueryArgs {
    /// Divisor class, e.g. `6L-2E1-2E2-2E3-2E4-2E5-2E6`.
    #[arg(long = "D", value_name = "CLASS")]
    pub class: String,
    /// Genus, or `all` for every genus up to the arithmetic genus.
    #[arg(long = "g", value_name = "INT|all", allow_hyphen_values = true)]
    pub genus: String,
    /// Fixed tangencies as `j:m` pairs; empty by default.
    #[arg(long, default_value = "", value_name = "VEC")]
    pub alpha: String,
    /// Moving tangencies as `j:m` pairs; defaults to `(D.E) e1`.
    #[arg(long, value_name = "VEC")]
    pub beta: Option<String>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long, value_enum, default_value = "general")]
    pub engine: EngineArg,
    /// Memo file, loaded if present and rewritten afterwards.
    #[arg(long, env = "DP6_CACHE", value_name = "PATH")]
    pub cache: Option<PathBuf>,
    /// Genus-ledger offset: -1 (default) or +1.
    #[arg(long = "genus-offset", default_value = "-1", allow_hyphen_values = true)]
    pub genus_offset: String,
    /// Worker threads; more than one enables parallel splitting evaluation.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one invariant (or one per genus with `--g all`).
    Compute {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// Print the top-level recursion terms after the value.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Gromov-Witten invariants for every genus of a class.
    Table {
        #[arg(long = "D", value_name = "CLASS")]
        class: String,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteArg,
        #[arg(long)]
        json: bool,
    },
    /// Show every first-sum and second-sum term of one evaluation.
    Trace {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long = "genus-offset", default_value = "-1", allow_hyphen_values = true)]
        genus_offset: String,
        #[arg(long)]
        json: bool,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Assertion(_) | Error::CacheCorruption(_) => 3,
        Error::Parse(_) | Error::Validation(_) | Error::CacheMismatch(_) | Error::Io(_) => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
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
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Compute { query, eval, trace, json } => compute(&query, &eval, trace, json, out, err),
        Command::Table { class, eval, format } => table(&class, &eval, format, out),
        Command::Verify { suite, json } => verify(suite, json, out),
        Command::Trace { query, genus_offset, json } => {
            let offset = GenusOffset::from_tag(&genus_offset)?;
            let engine = Engine::new(EvalConfig { genus_offset: offset, ..EvalConfig::default() });
            let genera = parse_genera(&query)?;
            for q in build_queries(&query, &genera)? {
                let t = engine.trace(&q)?;
                if json {
                    writeln!(out, "{}", serde_json::to_string(&t).expect("trace serializes"))?;
                } else {
                    write!(out, "{}", t.render())?;
                }
            }
            Ok(0)
        }
    }
}

fn parse_class(s: &str) -> Result<DivisorClass> {
    s.parse()
}

fn parse_genera(query: &QueryArgs) -> Result<Option<Vec<i32>>> {
    if query.genus == "all" {
        return Ok(None);
    }
    query
        .genus
        .trim()
        .parse::<i32>()
        .map(|g| Some(vec![g]))
        .map_err(|_| Error::Parse(format!("genus `{}`: expected an integer or `all`", query.genus)))
}

fn build_queries(query: &QueryArgs, genera: &Option<Vec<i32>>) -> Result<Vec<Quadruple>> {
    let class = parse_class(&query.class)?;
    let alpha: TangencyVector = query.alpha.parse()?;
    let beta: TangencyVector = match &query.beta {
        Some(b) => b.parse()?,
        None => {
            let free = class.e_degree() - alpha.weight() as i64;
            if free < 0 {
                return Err(Error::Validation(format!(
                    "Iα={} exceeds DE={} for {class}",
                    alpha.weight(),
                    class.e_degree()
                )));
            }
            if free == 0 {
                TangencyVector::zero()
            } else {
                TangencyVector::unit_multiple(1, free as u32)
            }
        }
    };
    let genera = match genera {
        Some(g) => g.clone(),
        None => (0..=class.arith_genus().max(0) as i32).collect(),
    };
    genera
        .into_iter()
        .map(|g| {
            let q = Quadruple::new(class, g, alpha.clone(), beta.clone());
            q.ensure_weight()?;
            Ok(q)
        })
        .collect()
}

enum AnyEngine {
    General(Engine),
    Genus0(Genus0Engine),
}

impl AnyEngine {
    fn evaluate(&self, q: &Quadruple) -> Result<BigUint> {
        match self {
            AnyEngine::General(e) => e.evaluate(q),
            AnyEngine::Genus0(e) => e.evaluate(q),
        }
    }

    fn stats(&self) -> StatsSnapshot {
        match self {
            AnyEngine::General(e) => e.stats(),
            AnyEngine::Genus0(e) => e.stats(),
        }
    }

    fn memo(&self) -> &Arc<MemoCache> {
        match self {
            AnyEngine::General(e) => e.memo(),
            AnyEngine::Genus0(e) => e.memo(),
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            AnyEngine::General(_) => EngineKind::General.tag(),
            AnyEngine::Genus0(_) => EngineKind::Genus0.tag(),
        }
    }
}

fn build_engine(eval: &EvalArgs) -> Result<(AnyEngine, GenusOffset)> {
    let offset = GenusOffset::from_tag(&eval.genus_offset)?;
    let parallel = match eval.threads {
        Some(n) if n >= 1 => {
            // A second call in the same process keeps the first pool.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            n > 1
        }
        Some(_) => return Err(Error::Validation("--threads must be at least 1".into())),
        None => false,
    };
    let kind = match eval.engine {
        EngineArg::General => EngineKind::General,
        EngineArg::Genus0 => EngineKind::Genus0,
    };
    let memo_offset = if kind == EngineKind::Genus0 { GenusOffset::Corrected } else { offset };
    let memo = match &eval.cache {
        Some(path) => MemoCache::open(path, kind, memo_offset)?,
        None => MemoCache::new(kind, memo_offset),
    };
    let memo = Arc::new(memo);
    let engine = match kind {
        EngineKind::General => AnyEngine::General(Engine::with_memo(
            EvalConfig { genus_offset: offset, parallel, ..EvalConfig::default() },
            memo,
        )?),
        EngineKind::Genus0 => AnyEngine::Genus0(Genus0Engine::with_memo(memo)?),
    };
    Ok((engine, offset))
}

#[derive(Serialize)]
struct JsonStats {
    memo_hits: u64,
    memo_size: u64,
    splittings_enumerated: u64,
    wall_ms: u128,
}

fn compute(
    query: &QueryArgs,
    eval: &EvalArgs,
    trace: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let genera = parse_genera(query)?;
    let queries = build_queries(query, &genera)?;
    let (engine, offset) = build_engine(eval)?;
    let mut records = Vec::new();
    for q in &queries {
        let v = q.validate();
        if !v.genus_in_range {
            writeln!(
                err,
                "warning: genus {} is outside 0..={} for {}; the invariant is 0",
                q.genus, v.arith_genus, q.class
            )?;
        }
        let start = Instant::now();
        let value = engine.evaluate(q)?;
        let wall_ms = start.elapsed().as_millis();
        let trace_text = if trace {
            match &engine {
                AnyEngine::General(e) => Some(e.trace(q)?),
                AnyEngine::Genus0(_) => {
                    return Err(Error::Validation("--trace is only available for the general engine".into()))
                }
            }
        } else {
            None
        };
        let s = engine.stats();
        if json {
            let mut obj = json!({
                "query": q.key(),
                "engine": engine.tag(),
                "genus_offset": offset.value(),
                "value": value.to_string(),
                "stats": JsonStats {
                    memo_hits: s.memo_hits,
                    memo_size: s.memo_size,
                    splittings_enumerated: s.splittings_enumerated,
                    wall_ms,
                },
            });
            if let Some(t) = &trace_text {
                obj["trace"] = serde_json::to_value(t).expect("trace serializes");
            }
            records.push(obj);
        } else {
            if queries.len() > 1 {
                writeln!(out, "g={} {value}", q.genus)?;
            } else {
                writeln!(out, "{value}")?;
            }
            if let Some(t) = &trace_text {
                write!(out, "{}", t.render())?;
            }
        }
    }
    if json {
        let doc = if records.len() == 1 { records.pop().expect("one record") } else { records.into() };
        writeln!(out, "{}", serde_json::to_string(&doc).expect("json serializes"))?;
    }
    if let Some(path) = &eval.cache {
        engine.memo().save(path)?;
    }
    Ok(0)
}

fn table(class: &str, eval: &EvalArgs, format: FormatArg, out: &mut dyn Write) -> Result<i32> {
    let class = parse_class(class)?;
    if class.e_degree() < 0 {
        return Err(Error::Validation(format!("D.E = {} < 0 for {class}", class.e_degree())));
    }
    let (engine, offset) = build_engine(eval)?;
    let mut rows = Vec::new();
    for g in 0..=class.arith_genus().max(0) as i32 {
        let q = Quadruple::gromov_witten(class, g)?;
        rows.push((g, engine.evaluate(&q)?));
    }
    match format {
        FormatArg::Csv => {
            writeln!(out, "g,value")?;
            for (g, v) in &rows {
                writeln!(out, "{g},{v}")?;
            }
        }
        FormatArg::Json => {
            let doc = json!({
                "class": class.to_string(),
                "engine": engine.tag(),
                "genus_offset": offset.value(),
                "rows": rows.iter().map(|(g, v)| json!({"g": g, "value": v.to_string()})).collect::<Vec<_>>(),
            });
            writeln!(out, "{}", serde_json::to_string(&doc).expect("json serializes"))?;
        }
    }
    if let Some(path) = &eval.cache {
        engine.memo().save(path)?;
    }
    Ok(0)
}

fn verify(suite: SuiteArg, json: bool, out: &mut dyn Write) -> Result<i32> {
    let suite = match suite {
        SuiteArg::Quick => Suite::Quick,
        SuiteArg::Full => Suite::Full,
    };
    let reports = run_suite(suite);
    if json {
        writeln!(out, "{}", serde_json::to_string(&reports).expect("json serializes"))?;
    } else {
        for r in &reports {
            writeln!(out, "{}", r.line())?;
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}
