//! Interactive solver subprocess speaking SMT-LIB 2.0 over stdin/stdout.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::expr::{Assignment, Expr, Sort, Value};
use super::linearize::{Linearizer, NameGen, NonlinearResidual};
use super::print::{definitions, inline_single_use, print_define_fun, print_expr};
use super::sexp::{is_complete, parse_get_value, SExpError};

pub const DEFAULT_SOLVER: &str = "z3 -in -smt2";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
/// Fraction of initialised rules that may be unusable before the session is rebuilt.
pub const STALE_THRESHOLD: f64 = 1.0 / 3.0;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot start solver `{command}`: {reason}")]
    Spawn { command: String, reason: String },
    #[error("solver handshake failed: {0}")]
    Handshake(String),
    #[error("solver i/o error: {0}")]
    Io(String),
    #[error("solver protocol error: {0}")]
    Protocol(String),
    #[error("malformed solver response: {0}")]
    Response(#[from] SExpError),
    #[error(transparent)]
    Nonlinear(#[from] NonlinearResidual),
    #[error("solver session is dead")]
    Dead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub command: String,
    pub timeout: Duration,
    /// Use QF_NIA and keep products that cannot be linearised.
    pub nonlinear: bool,
    pub transcript: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            command: DEFAULT_SOLVER.to_string(),
            timeout: DEFAULT_TIMEOUT,
            nonlinear: false,
            transcript: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub spawns: usize,
    pub asserts: usize,
    pub check_sats: usize,
    pub pushes: usize,
    pub pops: usize,
    pub resets: usize,
    pub inits: usize,
    pub tries: usize,
    /// Tries answered on a context left over from an earlier try.
    pub reuses: usize,
    pub timeouts: usize,
}

impl std::ops::AddAssign for SessionStats {
    fn add_assign(&mut self, o: Self) {
        self.spawns += o.spawns;
        self.asserts += o.asserts;
        self.check_sats += o.check_sats;
        self.pushes += o.pushes;
        self.pops += o.pops;
        self.resets += o.resets;
        self.inits += o.inits;
        self.tries += o.tries;
        self.reuses += o.reuses;
        self.timeouts += o.timeouts;
    }
}

struct Process {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    lines: Receiver<String>,
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "(exit)");
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Default)]
struct Scope {
    names: HashSet<String>,
    vars: Vec<(String, Sort)>,
}

pub struct SolverSession {
    config: SolverConfig,
    process: Option<Process>,
    dead: bool,
    scopes: Vec<Scope>,
    names: NameGen,
    stats: SessionStats,
    transcript: Option<BufWriter<File>>,
    init_rules: Option<BTreeSet<usize>>,
    fresh_context: bool,
}

impl SolverSession {
    /// Creates a session; the subprocess is started on first use.
    pub fn new(config: SolverConfig) -> Self {
        SolverSession {
            config,
            process: None,
            dead: false,
            scopes: vec![Scope::default()],
            names: NameGen::new(),
            stats: SessionStats::default(),
            transcript: None,
            init_rules: None,
            fresh_context: true,
        }
    }

    /// Creates a session and starts the solver immediately.
    pub fn start(config: SolverConfig) -> Result<Self, SolverError> {
        let mut s = SolverSession::new(config);
        s.ensure_started()?;
        Ok(s)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn stats(&self) -> SessionStats {
        self.stats
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }

    /// Number of open `push` scopes.
    pub fn depth(&self) -> usize {
        self.scopes.len() - 1
    }

    /// Fresh-name source shared with the encoder so that names never clash.
    pub fn names(&mut self) -> &mut NameGen {
        &mut self.names
    }

    fn logic(&self) -> &'static str {
        if self.config.nonlinear {
            "QF_NIA"
        } else {
            "QF_LIA"
        }
    }

    fn ensure_started(&mut self) -> Result<(), SolverError> {
        if self.dead {
            return Err(SolverError::Dead);
        }
        if self.process.is_some() {
            return Ok(());
        }
        if self.transcript.is_none() {
            if let Some(path) = &self.config.transcript {
                let f = File::options()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))?;
                self.transcript = Some(BufWriter::new(f));
            }
        }
        let argv = shell_words::split(&self.config.command).map_err(|e| SolverError::Spawn {
            command: self.config.command.clone(),
            reason: e.to_string(),
        })?;
        let (prog, args) = argv.split_first().ok_or_else(|| SolverError::Spawn {
            command: self.config.command.clone(),
            reason: "empty command".into(),
        })?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Spawn {
                command: self.config.command.clone(),
                reason: e.to_string(),
            })?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.process = Some(Process {
            child,
            stdin,
            lines: rx,
        });
        self.stats.spawns += 1;
        self.preamble()
            .map_err(|e| {
                self.kill();
                SolverError::Handshake(e.to_string())
            })?;
        Ok(())
    }

    fn preamble(&mut self) -> Result<(), SolverError> {
        self.send("(set-option :print-success false)")?;
        let logic = format!("(set-logic {})", self.logic());
        self.send(&logic)?;
        self.send("(check-sat)")?;
        match self.read_response()? {
            Some(r) if r == "sat" => Ok(()),
            Some(r) => Err(SolverError::Protocol(format!("unexpected reply `{r}`"))),
            None => Err(SolverError::Protocol("no reply".into())),
        }
    }

    fn kill(&mut self) {
        self.process = None;
        self.dead = true;
    }

    fn log(&mut self, line: &str) {
        if let Some(t) = &mut self.transcript {
            let _ = writeln!(t, "{line}");
            let _ = t.flush();
        }
    }

    fn send(&mut self, cmd: &str) -> Result<(), SolverError> {
        self.log(cmd);
        let p = self.process.as_mut().ok_or(SolverError::Dead)?;
        let res = writeln!(p.stdin, "{cmd}").and_then(|_| p.stdin.flush());
        if let Err(e) = res {
            self.kill();
            return Err(SolverError::Io(e.to_string()));
        }
        Ok(())
    }

    /// Reads one complete response. `None` means the watchdog fired.
    fn read_response(&mut self) -> Result<Option<String>, SolverError> {
        let deadline = Instant::now() + self.config.timeout;
        let mut buf = String::new();
        loop {
            let p = self.process.as_ref().ok_or(SolverError::Dead)?;
            let left = deadline.saturating_duration_since(Instant::now());
            match p.lines.recv_timeout(left) {
                Ok(line) => {
                    if line.trim().is_empty() && buf.is_empty() {
                        continue;
                    }
                    buf.push_str(&line);
                    buf.push('\n');
                    if is_complete(&buf) {
                        let out = buf.trim().to_string();
                        self.log(&format!("; {}", out.replace('\n', "\n; ")));
                        if out.starts_with("(error") {
                            self.kill();
                            return Err(SolverError::Protocol(out));
                        }
                        return Ok(Some(out));
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.log("; timeout");
                    self.kill();
                    self.stats.timeouts += 1;
                    return Ok(None);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.kill();
                    return Err(SolverError::Io("solver exited".into()));
                }
            }
        }
    }

    fn visible(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.names.contains(name))
    }

    /// Asserts a boolean expression, declaring variables and emitting
    /// shared definitions that are not yet visible in the current context.
    pub fn assert(&mut self, e: &Expr) -> Result<(), SolverError> {
        self.ensure_started()?;
        if e.is_true() {
            return Ok(());
        }
        let lin = Linearizer::new(&mut self.names)
            .allow_nonlinear(self.config.nonlinear)
            .run(e)?;
        let lin = inline_single_use(&lin, &|n| self.visible(n));
        let mut script = Vec::new();
        for (name, sort) in lin.free_vars() {
            if !self.visible(&name) {
                script.push(format!("(declare-fun {name} () {sort})"));
                let top = self.scopes.last_mut().expect("base scope");
                top.names.insert(name.clone());
                top.vars.push((name, sort));
            }
        }
        for d in definitions(&lin) {
            if !self.visible(&d.name) {
                script.push(print_define_fun(&d));
                let top = self.scopes.last_mut().expect("base scope");
                top.names.insert(d.name.clone());
            }
        }
        script.push(format!("(assert {})", print_expr(&lin)));
        for cmd in &script {
            self.send(cmd)?;
        }
        self.stats.asserts += 1;
        Ok(())
    }

    pub fn push(&mut self) -> Result<(), SolverError> {
        self.ensure_started()?;
        self.send("(push 1)")?;
        self.scopes.push(Scope::default());
        self.stats.pushes += 1;
        Ok(())
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        if self.depth() == 0 {
            return Err(SolverError::Protocol("pop at depth 0".into()));
        }
        self.ensure_started()?;
        self.send("(pop 1)")?;
        self.scopes.pop();
        self.stats.pops += 1;
        Ok(())
    }

    /// Clears all assertions and declarations. A dead session is restarted.
    pub fn reset(&mut self) -> Result<(), SolverError> {
        self.scopes = vec![Scope::default()];
        self.init_rules = None;
        self.fresh_context = true;
        self.stats.resets += 1;
        if self.dead || self.process.is_none() {
            self.dead = false;
            self.process = None;
            return self.ensure_started();
        }
        self.send("(reset)")?;
        self.preamble()
    }

    pub fn check_sat(&mut self) -> Result<CheckResult, SolverError> {
        self.ensure_started()?;
        self.send("(check-sat)")?;
        self.stats.check_sats += 1;
        match self.read_response()? {
            None => Ok(CheckResult::Unknown),
            Some(r) => match r.as_str() {
                "sat" => Ok(CheckResult::Sat),
                "unsat" => Ok(CheckResult::Unsat),
                "unknown" => Ok(CheckResult::Unknown),
                _ => {
                    self.kill();
                    Err(SolverError::Protocol(format!("unexpected reply `{r}`")))
                }
            },
        }
    }

    /// Values of the given variables in the last model.
    pub fn get_value(&mut self, vars: &[String]) -> Result<Assignment, SolverError> {
        self.ensure_started()?;
        if vars.is_empty() {
            return Ok(Assignment::new());
        }
        self.send(&format!("(get-value ({}))", vars.join(" ")))?;
        let Some(r) = self.read_response()? else {
            return Err(SolverError::Protocol("get-value timed out".into()));
        };
        let vals = parse_get_value(&r).map_err(|e| {
            self.kill();
            e
        })?;
        let out: Assignment = vals.into_iter().collect();
        if let Some(missing) = vars.iter().find(|v| !out.contains_key(*v)) {
            self.kill();
            return Err(SolverError::Protocol(format!("no value for {missing}")));
        }
        Ok(out)
    }

    /// Values for every listed variable; those never declared in the
    /// current context are unconstrained and get a default.
    pub fn model(&mut self, vars: &[(String, Sort)]) -> Result<Assignment, SolverError> {
        let known: Vec<String> = vars
            .iter()
            .filter(|(n, _)| self.visible(n))
            .map(|(n, _)| n.clone())
            .collect();
        let mut out = self.get_value(&known)?;
        for (n, s) in vars {
            out.entry(n.clone()).or_insert_with(|| match s {
                Sort::Int => Value::Int(0.into()),
                Sort::Bool => Value::Bool(false),
            });
        }
        Ok(out)
    }

    /// Every variable declared in the current context.
    pub fn declared(&self) -> Vec<(String, Sort)> {
        self.scopes.iter().flat_map(|s| s.vars.iter().cloned()).collect()
    }

    /// Rules whose guarded orientation constraints form the base context.
    pub fn initialized_rules(&self) -> Option<&BTreeSet<usize>> {
        self.init_rules.as_ref()
    }

    /// Resets (when anything was asserted before) and asserts the rule
    /// constraints at base level.
    pub fn init_rules(
        &mut self,
        rules: BTreeSet<usize>,
        assertions: impl IntoIterator<Item = Expr>,
    ) -> Result<(), SolverError> {
        if self.init_rules.is_some() || self.stats.asserts > 0 || self.dead {
            self.reset()?;
        }
        for a in assertions {
            self.assert(&a)?;
        }
        self.init_rules = Some(rules);
        self.fresh_context = true;
        self.stats.inits += 1;
        Ok(())
    }

    /// Whether the base context must be rebuilt before serving an SCC whose
    /// usable rules are `usable`.
    pub fn is_stale(&self, usable: &BTreeSet<usize>) -> bool {
        let Some(init) = &self.init_rules else {
            return true;
        };
        if self.dead || !usable.is_subset(init) {
            return true;
        }
        unusable_fraction(init, usable) > STALE_THRESHOLD
    }

    /// Resets the session when [`is_stale`](Self::is_stale) holds. Returns
    /// whether a reset happened; the caller must then re-initialise.
    pub fn reset_if_stale(&mut self, usable: &BTreeSet<usize>) -> Result<bool, SolverError> {
        if !self.is_stale(usable) {
            return Ok(false);
        }
        if self.init_rules.is_some() || self.dead {
            self.reset()?;
        }
        self.init_rules = None;
        Ok(true)
    }

    /// Opens a scope, asserts the SCC constraints and checks. The caller
    /// reads the model if wanted and then calls [`pop`](Self::pop).
    pub fn try_scc(
        &mut self,
        assertions: impl IntoIterator<Item = Expr>,
    ) -> Result<CheckResult, SolverError> {
        if self.init_rules.is_none() {
            return Err(SolverError::Protocol("try before init".into()));
        }
        self.stats.tries += 1;
        if !self.fresh_context {
            self.stats.reuses += 1;
        }
        self.fresh_context = false;
        self.push()?;
        for a in assertions {
            self.assert(&a)?;
        }
        self.check_sat()
    }
}

/// `|init \ usable| / |init|`, zero for an empty base.
pub fn unusable_fraction(init: &BTreeSet<usize>, usable: &BTreeSet<usize>) -> f64 {
    if init.is_empty() {
        return 0.0;
    }
    init.difference(usable).count() as f64 / init.len() as f64
}
