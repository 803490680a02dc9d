//! The processor pipeline: rule removal, uncurrying, the dependency graph
//! and reduction pairs on its strongly connected components.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::dp::{estimated_edg, sccs, usable_rules, DependencyGraph, DpProblem};
use crate::nonterm::{find_loop_with, LoopConfig, LoopWitness};
use crate::order::{choose_shapes, CoeffRange, ConcreteOrder, ConstRange, Encoder, OrderParams, Template};
use crate::smt::{Assignment, CheckResult, Expr, SessionStats, SolverConfig, SolverError, SolverSession};
use crate::trs::{parse_trs, ParseError, Rule, Symbol, Trs};
use crate::uncurry::{uncurry, UncurryPlan};

#[derive(Clone, Debug, PartialEq)]
pub enum ProcessorSpec {
    Order(OrderParams),
    Uncurry,
    Edg,
    Loop,
}

impl fmt::Display for ProcessorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessorSpec::Order(p) => write!(f, "{}", p.name),
            ProcessorSpec::Uncurry => f.write_str("UNCURRY"),
            ProcessorSpec::Edg => f.write_str("EDG"),
            ProcessorSpec::Loop => f.write_str("LOOP"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("EDG given more than once")]
    DuplicateEdg,
    #[error("UNCURRY given more than once")]
    DuplicateUncurry,
    #[error("UNCURRY must come before EDG")]
    UncurryAfterEdg,
    #[error("order {0} comes before EDG but is not monotone")]
    NotMonotone(String),
    #[error("order {name}: {reason}")]
    InvalidOrder { name: String, reason: String },
}

/// Checks the ordering rules of a processor list.
pub fn validate_strategy(strategy: &[ProcessorSpec]) -> Result<(), StrategyError> {
    let mut seen_edg = false;
    let mut seen_uncurry = false;
    for p in strategy {
        match p {
            ProcessorSpec::Edg if seen_edg => return Err(StrategyError::DuplicateEdg),
            ProcessorSpec::Edg => seen_edg = true,
            ProcessorSpec::Uncurry if seen_uncurry => return Err(StrategyError::DuplicateUncurry),
            ProcessorSpec::Uncurry if seen_edg => return Err(StrategyError::UncurryAfterEdg),
            ProcessorSpec::Uncurry => seen_uncurry = true,
            ProcessorSpec::Order(o) => {
                o.validate().map_err(|e| StrategyError::InvalidOrder {
                    name: o.name.clone(),
                    reason: e.to_string(),
                })?;
                if !seen_edg && !o.monotone {
                    return Err(StrategyError::NotMonotone(o.name.clone()));
                }
            }
            ProcessorSpec::Loop => {}
        }
    }
    Ok(())
}

fn with(
    name: &str,
    base: &str,
    template: Template,
    coeff: CoeffRange,
    constant: ConstRange,
) -> ProcessorSpec {
    let mut p = OrderParams::preset(base).expect("known preset");
    p.name = name.to_string();
    p.template = template;
    p.coeff = coeff;
    p.constant = constant;
    ProcessorSpec::Order(p)
}

/// The strategy used when none is given.
pub fn default_strategy() -> Vec<ProcessorSpec> {
    use CoeffRange as C;
    use ConstRange as K;
    use Template as T;
    vec![
        with("POLO{1,2}", "POLO-linear-mono", T::Pol, C::OneTwo, K::Nat),
        ProcessorSpec::Uncurry,
        ProcessorSpec::Edg,
        with("POLO{0,1}", "POLO-linear", T::Pol, C::ZeroOne, K::Nat),
        with("MAX{0,1}", "POLO-linear", T::Max, C::ZeroOne, K::Nat),
        ProcessorSpec::Order(OrderParams::preset("LPO-AF").expect("known preset")),
        with("MAXPOLO{0,1}", "MaxPOLO", T::MaxPol, C::ZeroOne, K::Int),
        ProcessorSpec::Order(OrderParams::preset("WPO-ms").expect("known preset")),
        with("MATRIX{0,1}^2", "Matrix", T::Pol, C::ZeroOne, K::Nat),
        ProcessorSpec::Loop,
    ]
}

/// Whether every check reuses one solver process per processor or gets a new one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SessionMode {
    #[default]
    Incremental,
    Fresh,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    pub mode: SessionMode,
    pub loop_search: LoopConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Maybe,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
            Answer::Maybe => "MAYBE",
        })
    }
}

/// One successful application of an order.
#[derive(Clone, Debug)]
pub struct OrderStep {
    pub processor: String,
    pub order: ConcreteOrder,
    /// Strictly decreasing, hence removed.
    pub strict: Vec<Rule>,
    /// Everything that had to decrease weakly.
    pub weak: Vec<Rule>,
}

#[derive(Clone, Debug)]
pub enum ProofEntry {
    RuleRemoval(OrderStep),
    Uncurry {
        plans: Vec<UncurryPlan>,
        rules: Trs,
    },
    DependencyPairs {
        pairs: Vec<Rule>,
        sccs: Vec<BTreeSet<usize>>,
    },
    ReductionPair {
        scc: BTreeSet<usize>,
        usable: BTreeSet<usize>,
        step: OrderStep,
        remaining: Vec<BTreeSet<usize>>,
    },
    /// A processor that gave up for a reason other than unsatisfiability.
    Failed {
        processor: String,
        reason: String,
    },
    Loop(LoopWitness),
    Unresolved {
        scc: Option<BTreeSet<usize>>,
    },
    /// The input uses a feature outside the supported fragment.
    Unsupported(String),
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub answer: Answer,
    pub proof: Vec<ProofEntry>,
    pub stats: SessionStats,
}

impl Verdict {
    pub fn order_steps(&self) -> impl Iterator<Item = &OrderStep> {
        self.proof.iter().filter_map(|e| match e {
            ProofEntry::RuleRemoval(s) | ProofEntry::ReductionPair { step: s, .. } => Some(s),
            _ => None,
        })
    }

    /// Ids of pairs removed by reduction pairs, in proof order.
    pub fn removed_pairs(&self) -> Vec<usize> {
        self.proof
            .iter()
            .filter_map(|e| match e {
                ProofEntry::ReductionPair { step, .. } => Some(step.strict.iter().map(|p| p.id)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Ids of rules removed before dependency pairs were formed.
    pub fn removed_rules(&self) -> Vec<usize> {
        self.proof
            .iter()
            .filter_map(|e| match e {
                ProofEntry::RuleRemoval(step) => Some(step.strict.iter().map(|p| p.id)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn witness(&self) -> Option<&LoopWitness> {
        self.proof.iter().find_map(|e| match e {
            ProofEntry::Loop(w) => Some(w),
            _ => None,
        })
    }
}

fn show_set(s: &BTreeSet<usize>) -> String {
    let items: Vec<String> = s.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn show_rules(f: &mut fmt::Formatter<'_>, rules: &[Rule]) -> fmt::Result {
    for r in rules {
        writeln!(f, "    [{}] {}", r.id, r)?;
    }
    Ok(())
}

fn show_order(f: &mut fmt::Formatter<'_>, order: &ConcreteOrder) -> fmt::Result {
    for line in order.to_string().lines() {
        writeln!(f, "  {line}")?;
    }
    Ok(())
}

impl fmt::Display for ProofEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofEntry::RuleRemoval(step) => {
                writeln!(f, "RULE REMOVAL by {}", step.processor)?;
                show_order(f, &step.order)?;
                writeln!(f, "  removed rules:")?;
                show_rules(f, &step.strict)
            }
            ProofEntry::Uncurry { plans, rules } => {
                writeln!(f, "UNCURRY")?;
                for p in plans {
                    writeln!(f, "  {p}")?;
                }
                writeln!(f, "  result:")?;
                show_rules(f, &rules.rules)
            }
            ProofEntry::DependencyPairs { pairs, sccs } => {
                writeln!(f, "EDG (estimated by TCAP unifiability)")?;
                writeln!(f, "  dependency pairs:")?;
                show_rules(f, pairs)?;
                let shown: Vec<String> = sccs.iter().map(show_set).collect();
                writeln!(f, "  SCCs: {}", shown.join(" "))
            }
            ProofEntry::ReductionPair {
                scc,
                usable,
                step,
                remaining,
            } => {
                writeln!(f, "REDUCTION PAIR {} on SCC {}", step.processor, show_set(scc))?;
                writeln!(f, "  usable rules: {}", show_set(usable))?;
                show_order(f, &step.order)?;
                writeln!(f, "  removed pairs:")?;
                show_rules(f, &step.strict)?;
                let shown: Vec<String> = remaining.iter().map(show_set).collect();
                if shown.is_empty() {
                    writeln!(f, "  remaining SCCs: none")
                } else {
                    writeln!(f, "  remaining SCCs: {}", shown.join(" "))
                }
            }
            ProofEntry::Failed { processor, reason } => writeln!(f, "{processor} failed: {reason}"),
            ProofEntry::Loop(w) => writeln!(f, "LOOP\n  {w}"),
            ProofEntry::Unresolved { scc: Some(scc) } => {
                writeln!(f, "no processor applies to SCC {} and no loop was found", show_set(scc))
            }
            ProofEntry::Unresolved { scc: None } => {
                writeln!(f, "rules remain and no loop was found")
            }
            ProofEntry::Unsupported(what) => writeln!(f, "unsupported input: {what}"),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.answer)?;
        for e in &self.proof {
            write!(f, "\n{e}")?;
        }
        Ok(())
    }
}

/// A session used incrementally, or a new solver process for every check.
enum Checker {
    Session(SolverSession),
    Fresh(FreshChecker),
}

struct FreshChecker {
    config: SolverConfig,
    base: Vec<Expr>,
    scopes: Vec<Vec<Expr>>,
    last: Option<SolverSession>,
    stats: SessionStats,
}

impl FreshChecker {
    fn retire(&mut self) {
        if let Some(s) = self.last.take() {
            self.stats += s.stats();
        }
    }
}

impl Checker {
    fn new(config: &SolverConfig, mode: SessionMode) -> Self {
        match mode {
            SessionMode::Incremental => Checker::Session(SolverSession::new(config.clone())),
            SessionMode::Fresh => Checker::Fresh(FreshChecker {
                config: config.clone(),
                base: Vec::new(),
                scopes: Vec::new(),
                last: None,
                stats: SessionStats::default(),
            }),
        }
    }

    fn init(&mut self, rules: BTreeSet<usize>, assertions: Vec<Expr>) -> Result<(), SolverError> {
        match self {
            Checker::Session(s) => s.init_rules(rules, assertions),
            Checker::Fresh(c) => {
                c.retire();
                c.base = assertions;
                c.scopes.clear();
                c.stats.inits += 1;
                Ok(())
            }
        }
    }

    fn push(&mut self) -> Result<(), SolverError> {
        match self {
            Checker::Session(s) => s.push(),
            Checker::Fresh(c) => {
                c.scopes.push(Vec::new());
                c.stats.pushes += 1;
                Ok(())
            }
        }
    }

    fn assert(&mut self, e: Expr) -> Result<(), SolverError> {
        match self {
            Checker::Session(s) => s.assert(&e),
            Checker::Fresh(c) => {
                match c.scopes.last_mut() {
                    Some(scope) => scope.push(e),
                    None => c.base.push(e),
                }
                Ok(())
            }
        }
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        match self {
            Checker::Session(s) => s.pop(),
            Checker::Fresh(c) => {
                c.scopes
                    .pop()
                    .ok_or_else(|| SolverError::Protocol("pop at base level".into()))?;
                c.stats.pops += 1;
                Ok(())
            }
        }
    }

    fn check(&mut self) -> Result<CheckResult, SolverError> {
        match self {
            Checker::Session(s) => s.check_sat(),
            Checker::Fresh(c) => {
                c.retire();
                let mut s = SolverSession::new(c.config.clone());
                for e in c.base.iter().chain(c.scopes.iter().flatten()) {
                    s.assert(e)?;
                }
                let r = s.check_sat();
                c.last = Some(s);
                r
            }
        }
    }

    fn try_scc(&mut self, assertions: Vec<Expr>) -> Result<CheckResult, SolverError> {
        match self {
            Checker::Session(s) => s.try_scc(assertions),
            Checker::Fresh(c) => {
                c.stats.tries += 1;
                c.scopes.push(assertions);
                c.stats.pushes += 1;
                self.check()
            }
        }
    }

    fn model(&mut self, vars: &[(String, crate::smt::Sort)]) -> Result<Assignment, SolverError> {
        match self {
            Checker::Session(s) => s.model(vars),
            Checker::Fresh(c) => match &mut c.last {
                Some(s) => s.model(vars),
                None => Err(SolverError::Protocol("model before check".into())),
            },
        }
    }

    /// Drops every scope above the base level.
    fn unwind(&mut self) {
        match self {
            Checker::Session(s) => {
                while s.depth() > 0 && !s.is_dead() {
                    if s.pop().is_err() {
                        break;
                    }
                }
            }
            Checker::Fresh(c) => {
                c.stats.pops += c.scopes.len();
                c.scopes.clear();
            }
        }
    }

    fn stats(&self) -> SessionStats {
        match self {
            Checker::Session(s) => s.stats(),
            Checker::Fresh(c) => {
                let mut st = c.stats;
                if let Some(s) = &c.last {
                    st += s.stats();
                }
                st
            }
        }
    }
}

/// Why an order could not be applied.
enum Failure {
    /// The constraints are unsatisfiable.
    NoOrder,
    /// Something else went wrong; reported in the proof log.
    Error(String),
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<crate::order::OrderError> for Failure {
    fn from(e: crate::order::OrderError) -> Self {
        Failure::Error(e.to_string())
    }
}

fn usable_var(id: usize) -> Expr {
    Expr::bool_var(format!("_u{id}"))
}

/// Keeps the strict constraints that can be added one by one, in order.
/// The outcome only depends on satisfiability, not on the models returned.
fn greedy(
    checker: &mut Checker,
    enc: &Encoder,
    strict: &[(usize, Expr)],
) -> Result<(BTreeSet<usize>, Assignment), SolverError> {
    let mut model = checker.model(enc.vars())?;
    let mut accepted = BTreeSet::new();
    for (k, gt) in strict {
        if gt.eval_bool(&model) == Ok(true) {
            checker.push()?;
            checker.assert(gt.clone())?;
            accepted.insert(*k);
            continue;
        }
        checker.push()?;
        checker.assert(gt.clone())?;
        match checker.check()? {
            CheckResult::Sat => {
                model = checker.model(enc.vars())?;
                accepted.insert(*k);
            }
            CheckResult::Unsat => checker.pop()?,
            CheckResult::Unknown => break,
        }
    }
    Ok((accepted, model))
}

/// Orients `weak` weakly and as many of `strict` strictly as possible,
/// re-checking the outcome on the decoded order.
fn orient(
    checker: &mut Checker,
    enc: &mut Encoder,
    init: Option<(BTreeSet<usize>, Vec<Expr>)>,
    scope: Vec<Expr>,
    strict: &[Rule],
    weak: &[Rule],
) -> Result<(BTreeSet<usize>, ConcreteOrder), Failure> {
    let mut gts = Vec::new();
    for r in strict {
        gts.push((r.id, enc.gt(&r.lhs, &r.rhs)?));
    }
    let mut assertions = scope;
    assertions.push(Expr::or(gts.iter().map(|(_, e)| e.clone())));
    if let Some((rules, base)) = init {
        checker.init(rules, base)?;
    }
    let outcome = match checker.try_scc(assertions) {
        Ok(CheckResult::Sat) => greedy(checker, enc, &gts).map_err(Failure::from),
        Ok(CheckResult::Unsat) => Err(Failure::NoOrder),
        Ok(CheckResult::Unknown) => Err(Failure::Error("solver timed out".into())),
        Err(e) => Err(e.into()),
    };
    checker.unwind();
    let (accepted, model) = outcome?;
    let order = ConcreteOrder::decode(enc, &model)?;
    for r in strict {
        let ok = if accepted.contains(&r.id) {
            order.gt(&r.lhs, &r.rhs)?
        } else {
            order.ge(&r.lhs, &r.rhs)?
        };
        if !ok {
            return Err(Failure::Error(format!("decoded order does not orient {r}")));
        }
    }
    for r in weak {
        if !order.ge(&r.lhs, &r.rhs)? {
            return Err(Failure::Error(format!("decoded order does not orient {r}")));
        }
    }
    Ok((accepted, order))
}

fn rule_removal(
    params: &OrderParams,
    checker: &mut Checker,
    r: &Trs,
) -> Result<Option<OrderStep>, Failure> {
    let mut enc = Encoder::new(params, r.signature(), &choose_shapes(&r.rules))?;
    let mut base = enc.constraints().to_vec();
    for rule in &r.rules {
        base.push(enc.ge(&rule.lhs, &rule.rhs)?);
    }
    let ids = r.rules.iter().map(|x| x.id).collect();
    match orient(checker, &mut enc, Some((ids, base)), Vec::new(), &r.rules, &[]) {
        Ok((accepted, order)) => Ok(Some(OrderStep {
            processor: params.name.clone(),
            order,
            strict: r.rules.iter().filter(|x| accepted.contains(&x.id)).cloned().collect(),
            weak: r.rules.clone(),
        })),
        Err(Failure::NoOrder) => Ok(None),
        Err(e) => Err(e),
    }
}

/// An order used as reduction pair, with its solver context.
struct PairProcessor {
    params: OrderParams,
    encoder: Option<Encoder>,
    checker: Checker,
}

impl PairProcessor {
    fn apply(
        &mut self,
        signature: &BTreeSet<Symbol>,
        shapes: &std::collections::BTreeMap<Symbol, crate::order::Shape>,
        rules: &Trs,
        pairs: &[Rule],
        usable: &BTreeSet<usize>,
        relevant: &BTreeSet<usize>,
    ) -> Result<Option<OrderStep>, Failure> {
        if self.encoder.is_none() {
            self.encoder = Some(Encoder::new(&self.params, signature.iter().cloned(), shapes)?);
        }
        let enc = self.encoder.as_mut().expect("just built");
        let usable_rules: Vec<Rule> = rules
            .rules
            .iter()
            .filter(|x| usable.contains(&x.id))
            .cloned()
            .collect();
        let rebuild = match &self.checker {
            Checker::Session(s) => s.is_stale(usable) && s.initialized_rules() != Some(relevant),
            Checker::Fresh(_) => true,
        };
        let init = if rebuild {
            let mut base = enc.constraints().to_vec();
            for rule in rules.rules.iter().filter(|x| relevant.contains(&x.id)) {
                base.push(Expr::implies(usable_var(rule.id), enc.ge(&rule.lhs, &rule.rhs)?));
            }
            Some((relevant.clone(), base))
        } else {
            None
        };
        let initialised: BTreeSet<usize> = match (&init, &self.checker) {
            (Some((ids, _)), _) => ids.clone(),
            (None, Checker::Session(s)) => s.initialized_rules().cloned().unwrap_or_default(),
            (None, Checker::Fresh(_)) => relevant.clone(),
        };
        let mut scope: Vec<Expr> = initialised
            .iter()
            .map(|id| {
                if usable.contains(id) {
                    usable_var(*id)
                } else {
                    Expr::not(usable_var(*id))
                }
            })
            .collect();
        for p in pairs {
            scope.push(enc.ge(&p.lhs, &p.rhs)?);
        }
        match orient(&mut self.checker, enc, init, scope, pairs, &usable_rules) {
            Ok((accepted, order)) => {
                let mut weak: Vec<Rule> = pairs.to_vec();
                weak.extend(usable_rules);
                Ok(Some(OrderStep {
                    processor: self.params.name.clone(),
                    order,
                    strict: pairs.iter().filter(|p| accepted.contains(&p.id)).cloned().collect(),
                    weak,
                }))
            }
            Err(Failure::NoOrder) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

fn sort_worklist(w: &mut [BTreeSet<usize>]) {
    w.sort_by_key(|s| (s.len(), s.iter().next().copied()));
}

/// Runs `strategy` on `r`. Solver problems make single processors fail;
/// they never abort the run.
pub fn run_pipeline(r: &Trs, strategy: &[ProcessorSpec], config: &PipelineConfig) -> Verdict {
    let mut proof = Vec::new();
    let mut stats = SessionStats::default();
    let answer = run(r, strategy, config, &mut proof, &mut stats);
    Verdict {
        answer,
        proof,
        stats,
    }
}

/// Parses `src` and runs `strategy` on it. Input outside the supported
/// fragment gives MAYBE; other syntax errors are returned.
pub fn analyze_source(
    src: &str,
    strategy: &[ProcessorSpec],
    config: &PipelineConfig,
) -> Result<Verdict, ParseError> {
    match parse_trs(src) {
        Ok(r) => Ok(run_pipeline(&r, strategy, config)),
        Err(ParseError::Unsupported(what)) => Ok(Verdict {
            answer: Answer::Maybe,
            proof: vec![ProofEntry::Unsupported(what)],
            stats: SessionStats::default(),
        }),
        Err(e) => Err(e),
    }
}

fn run(
    r: &Trs,
    strategy: &[ProcessorSpec],
    config: &PipelineConfig,
    proof: &mut Vec<ProofEntry>,
    stats: &mut SessionStats,
) -> Answer {
    let edg_at = strategy.iter().position(|p| *p == ProcessorSpec::Edg);
    let before = &strategy[..edg_at.unwrap_or(strategy.len())];
    let after = edg_at.map_or(&[][..], |i| &strategy[i + 1..]);
    let loop_enabled = strategy.contains(&ProcessorSpec::Loop);

    let mut r = r.clone();
    for p in before {
        let ProcessorSpec::Order(params) = p else { continue };
        let mut checker = Checker::new(&config.solver, config.mode);
        while !r.is_empty() {
            match rule_removal(params, &mut checker, &r) {
                Ok(Some(step)) if !step.strict.is_empty() => {
                    let gone: BTreeSet<usize> = step.strict.iter().map(|x| x.id).collect();
                    r = Trs::new(r.rules.iter().filter(|x| !gone.contains(&x.id)).cloned().collect());
                    proof.push(ProofEntry::RuleRemoval(step));
                }
                Ok(_) => break,
                Err(Failure::NoOrder) => break,
                Err(Failure::Error(reason)) => {
                    proof.push(ProofEntry::Failed {
                        processor: params.name.clone(),
                        reason,
                    });
                    break;
                }
            }
        }
        *stats += checker.stats();
    }
    if r.is_empty() {
        return Answer::Yes;
    }
    if before.contains(&ProcessorSpec::Uncurry) {
        let (u, plans) = uncurry(&r);
        if !plans.is_empty() {
            proof.push(ProofEntry::Uncurry {
                plans,
                rules: u.clone(),
            });
            r = u;
        }
    }
    if edg_at.is_none() {
        let prob = DpProblem {
            pairs: Vec::new(),
            rules: r,
        };
        return stuck(&prob, None, loop_enabled, config, proof);
    }

    let prob = DpProblem::from_trs(r.clone());
    let graph: DependencyGraph = estimated_edg(&prob.pairs, &prob.rules);
    let mut worklist = sccs(&graph);
    sort_worklist(&mut worklist);
    proof.push(ProofEntry::DependencyPairs {
        pairs: prob.pairs.clone(),
        sccs: worklist.clone(),
    });
    let mut signature = r.signature();
    for p in &prob.pairs {
        signature.extend(p.lhs.symbols());
        signature.extend(p.rhs.symbols());
    }
    let shapes = choose_shapes(prob.pairs.iter().chain(&r.rules));
    let mut processors: Vec<PairProcessor> = after
        .iter()
        .filter_map(|p| match p {
            ProcessorSpec::Order(params) => Some(PairProcessor {
                params: params.clone(),
                encoder: None,
                checker: Checker::new(&config.solver, config.mode),
            }),
            _ => None,
        })
        .collect();

    let mut answer = Answer::Yes;
    while !worklist.is_empty() {
        let scc = worklist.remove(0);
        let pairs: Vec<Rule> = prob
            .pairs
            .iter()
            .filter(|p| scc.contains(&p.id))
            .cloned()
            .collect();
        let usable = usable_rules(&pairs, &r);
        let mut relevant = usable.clone();
        for pending in &worklist {
            let members = prob.pairs.iter().filter(|p| pending.contains(&p.id));
            relevant.extend(usable_rules(members, &r));
        }
        let mut solved = false;
        for proc in &mut processors {
            match proc.apply(&signature, &shapes, &r, &pairs, &usable, &relevant) {
                Ok(Some(step)) => {
                    let rest: BTreeSet<usize> = scc
                        .iter()
                        .copied()
                        .filter(|id| !step.strict.iter().any(|p| p.id == *id))
                        .collect();
                    let remaining = sccs(&graph.restrict(&rest));
                    worklist.extend(remaining.iter().cloned());
                    sort_worklist(&mut worklist);
                    proof.push(ProofEntry::ReductionPair {
                        scc: scc.clone(),
                        usable: usable.clone(),
                        step,
                        remaining,
                    });
                    solved = true;
                    break;
                }
                Ok(None) | Err(Failure::NoOrder) => {}
                Err(Failure::Error(reason)) => proof.push(ProofEntry::Failed {
                    processor: proc.params.name.clone(),
                    reason,
                }),
            }
        }
        if !solved {
            let sub = DpProblem {
                pairs,
                rules: r.clone(),
            };
            answer = stuck(&sub, Some(scc), loop_enabled, config, proof);
            break;
        }
    }
    for proc in &processors {
        *stats += proc.checker.stats();
    }
    answer
}

fn stuck(
    prob: &DpProblem,
    scc: Option<BTreeSet<usize>>,
    loop_enabled: bool,
    config: &PipelineConfig,
    proof: &mut Vec<ProofEntry>,
) -> Answer {
    if loop_enabled {
        if let Some(w) = find_loop_with(prob, config.loop_search).witness {
            if w.verify() {
                proof.push(ProofEntry::Loop(w));
                return Answer::No;
            }
        }
    }
    proof.push(ProofEntry::Unresolved { scc });
    Answer::Maybe
}
