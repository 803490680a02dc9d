//! Argument handling for the `termwpo` command.

use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use thiserror::Error;

use termwpo::nonterm::LoopConfig;
use termwpo::order::OrderParams;
use termwpo::pipeline::{
    default_strategy, validate_strategy, PipelineConfig, ProcessorSpec, SessionMode, StrategyError,
};
use termwpo::smt::{SolverConfig, DEFAULT_SOLVER};

const PROCESSOR_HELP: &str = "\
Processors (applied in the order given; orders before EDG remove rules and must be monotone):
  POLO       linear polynomial interpretation
  MAX        max interpretation
  MAXPOLO    mixed max/sum interpretation with integer constants
  LPO        lexicographic path order with status and argument filter
  KBO        Knuth-Bendix order (admissible weights)
  TKBO       KBO with positive natural coefficients
  WPO        weighted path order over the mixed interpretation, partial status
  MATRIX     2x2 matrix interpretation
  any preset name: POLO-linear-mono LPO-mono KBO TKBO POLO-linear MaxPOLO LPO-AF KBO-AF Matrix Matrix(d) WPO-ms
  UNCURRY    uncurry applicative systems
  EDG        dependency pairs and the estimated dependency graph
  LOOP       loop search when a component resists every order

Order options follow the order name as key=value tokens:
  template=sum|max|maxsum   coeff=1|01|12|pos|nat   const=0|nat|int
  prec=none|quasi|strict    status=empty|total|partial
  filter=yes|no   mono=yes|no   admissible=yes|no   dim=N   bound=N

Without processors the default strategy is used:
  POLO coeff=12  UNCURRY  EDG  POLO coeff=01  MAX coeff=01  LPO  MAXPOLO coeff=01 const=int
  WPO  MATRIX coeff=01  LOOP";

#[derive(Debug, Parser)]
#[command(
    name = "termwpo",
    version,
    about = "Proves or disproves termination of term rewrite systems in TPDB format",
    override_usage = "termwpo [FILE] [OPTION]... [PROCESSOR]...",
    after_help = PROCESSOR_HELP
)]
struct RawArgs {
    /// Solver command line; it must speak SMT-LIB 2.0 on standard input
    #[arg(long, value_name = "COMMAND", default_value = DEFAULT_SOLVER)]
    smt: String,
    /// Seconds allowed for each satisfiability check
    #[arg(long, value_name = "SECONDS", default_value_t = 10.0)]
    timeout: f64,
    /// Step bound of the loop search
    #[arg(long, value_name = "N", default_value_t = termwpo::nonterm::DEFAULT_DEPTH)]
    depth: usize,
    /// Append every solver command and response to PATH
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
    /// Start a new solver process for every check instead of reusing sessions
    #[arg(long)]
    fresh: bool,
    /// Allow non-linear arithmetic and hand products to the solver
    #[arg(long)]
    nonlinear: bool,
    /// Input file (standard input when absent or `-`), then processors
    #[arg(value_name = "ARGS", allow_hyphen_values = false)]
    rest: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ArgsError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("unknown processor `{0}`")]
    UnknownProcessor(String),
    #[error("option `{0}` does not follow an order")]
    DanglingOption(String),
    #[error("bad value `{value}` for `{key}` of {order}")]
    BadValue { order: String, key: String, value: String },
    #[error("unknown option `{key}` for {order}")]
    UnknownKey { order: String, key: String },
    #[error("timeout must be a positive number of seconds")]
    BadTimeout,
    #[error("depth must be at least 1")]
    BadDepth,
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl ArgsError {
    /// Help and version requests are not failures.
    pub fn is_informational(&self) -> bool {
        matches!(self, ArgsError::Clap(e) if !e.use_stderr())
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub input: Option<PathBuf>,
    pub config: PipelineConfig,
    pub strategy: Vec<ProcessorSpec>,
}

fn order_family(word: &str) -> Option<OrderParams> {
    let preset = match word {
        "POLO" => "POLO-linear",
        "MAX" => {
            let mut p = OrderParams::preset("POLO-linear").ok()?;
            p.name = "MAX".into();
            p.template = termwpo::order::Template::Max;
            return Some(p);
        }
        "MAXPOLO" => "MaxPOLO",
        "LPO" => "LPO-AF",
        "WPO" => "WPO-ms",
        "MATRIX" => "Matrix",
        other => other,
    };
    let mut p = OrderParams::preset(preset).ok()?;
    if preset != word {
        p.name = word.to_string();
    }
    Some(p)
}

fn yes_no(v: &str) -> Option<bool> {
    match v {
        "yes" | "true" | "1" => Some(true),
        "no" | "false" | "0" => Some(false),
        _ => None,
    }
}

fn set_option(p: &mut OrderParams, key: &str, value: &str) -> Result<(), ArgsError> {
    let bad = || ArgsError::BadValue {
        order: p.name.clone(),
        key: key.to_string(),
        value: value.to_string(),
    };
    match key {
        "template" => p.template = value.parse().map_err(|_| bad())?,
        "coeff" => p.coeff = value.parse().map_err(|_| bad())?,
        "const" => p.constant = value.parse().map_err(|_| bad())?,
        "prec" => p.precedence = value.parse().map_err(|_| bad())?,
        "status" => p.status = value.parse().map_err(|_| bad())?,
        "filter" => p.collapse = yes_no(value).ok_or_else(bad)?,
        "mono" => p.monotone = yes_no(value).ok_or_else(bad)?,
        "admissible" => p.admissible = yes_no(value).ok_or_else(bad)?,
        "dim" => p.dimension = value.parse().ok().filter(|&d| d >= 1).ok_or_else(bad)?,
        "bound" => p.bound = value.parse().ok().filter(|&b| b >= 1).ok_or_else(bad)?,
        _ => {
            return Err(ArgsError::UnknownKey {
                order: p.name.clone(),
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

fn processor_word(word: &str) -> Option<ProcessorSpec> {
    match word {
        "UNCURRY" => Some(ProcessorSpec::Uncurry),
        "EDG" => Some(ProcessorSpec::Edg),
        "LOOP" => Some(ProcessorSpec::Loop),
        _ => order_family(word).map(ProcessorSpec::Order),
    }
}

/// Parses processor tokens. Orders before `EDG` start from their monotone variant.
pub fn parse_strategy(tokens: &[String]) -> Result<Vec<ProcessorSpec>, ArgsError> {
    let mut out: Vec<ProcessorSpec> = Vec::new();
    let mut seen_edg = false;
    for tok in tokens {
        if let Some((key, value)) = tok.split_once('=') {
            match out.last_mut() {
                Some(ProcessorSpec::Order(p)) => set_option(p, key, value)?,
                _ => return Err(ArgsError::DanglingOption(tok.clone())),
            }
            continue;
        }
        let spec = processor_word(tok).ok_or_else(|| ArgsError::UnknownProcessor(tok.clone()))?;
        let spec = match spec {
            ProcessorSpec::Order(p) if !seen_edg => ProcessorSpec::Order(p.to_monotone()),
            ProcessorSpec::Edg => {
                seen_edg = true;
                spec
            }
            other => other,
        };
        out.push(spec);
    }
    validate_strategy(&out)?;
    Ok(out)
}

fn looks_like_processor(tok: &str) -> bool {
    tok.contains('=') || processor_word(tok).is_some()
}

/// Parses the full command line, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, ArgsError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let raw = RawArgs::try_parse_from(argv)?;
    if !(raw.timeout.is_finite() && raw.timeout > 0.0) {
        return Err(ArgsError::BadTimeout);
    }
    if raw.depth == 0 {
        return Err(ArgsError::BadDepth);
    }
    let mut rest = raw.rest.as_slice();
    let mut input = None;
    if let Some(first) = rest.first() {
        if !looks_like_processor(first) {
            if first != "-" {
                input = Some(PathBuf::from(first));
            }
            rest = &rest[1..];
        }
    }
    let mut strategy = if rest.is_empty() {
        default_strategy()
    } else {
        parse_strategy(rest)?
    };
    if raw.nonlinear {
        for p in &mut strategy {
            if let ProcessorSpec::Order(o) = p {
                o.nonlinear = true;
            }
        }
    }
    let config = PipelineConfig {
        solver: SolverConfig {
            command: raw.smt,
            timeout: Duration::from_secs_f64(raw.timeout),
            nonlinear: raw.nonlinear,
            transcript: raw.transcript,
        },
        mode: if raw.fresh {
            SessionMode::Fresh
        } else {
            SessionMode::Incremental
        },
        loop_search: LoopConfig {
            depth: raw.depth,
            ..LoopConfig::default()
        },
    };
    Ok(Invocation {
        input,
        config,
        strategy,
    })
}

/// Names of all processors accepted on the command line.
pub fn processor_names() -> Vec<&'static str> {
    vec!["POLO", "MAX", "MAXPOLO", "LPO", "KBO", "TKBO", "WPO", "MATRIX", "UNCURRY", "EDG", "LOOP"]
}
