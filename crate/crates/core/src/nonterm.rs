//! Naive loop detection by forward narrowing.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::dp::DpProblem;
use crate::trs::{match_term, rewrite_at, unify, Position, Rule, Substitution, Term, Var};

pub const DEFAULT_DEPTH: usize = 3;
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoopConfig {
    pub depth: usize,
    /// Hard cap on the number of search nodes generated.
    pub budget: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            depth: DEFAULT_DEPTH,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopStep {
    pub rule: Rule,
    pub position: Position,
}

/// `start ->* C[start θ]`, where the instance sits at `position` of the last term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopWitness {
    pub start: Term,
    pub steps: Vec<LoopStep>,
    pub position: Position,
    pub matcher: Substitution,
}

impl LoopWitness {
    /// Every term of the rewrite sequence, or `None` if some step does not
    /// apply or the last term holds no instance of the start term.
    pub fn replay(&self) -> Option<Vec<Term>> {
        let mut terms = vec![self.start.clone()];
        for step in &self.steps {
            let next = rewrite_at(terms.last()?, &step.rule, &step.position)?;
            terms.push(next);
        }
        let sub = terms.last()?.at(&self.position)?;
        let theta = match_term(&self.start, sub)?;
        (theta.apply(&self.start) == *sub && !self.steps.is_empty()).then_some(terms)
    }

    pub fn verify(&self) -> bool {
        self.replay().is_some()
    }
}

impl fmt::Display for LoopWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(terms) = self.replay() else {
            return write!(f, "invalid loop from {}", self.start);
        };
        let shown: Vec<String> = terms.iter().map(ToString::to_string).collect();
        write!(f, "{}", shown.join(" -> "))?;
        if !self.position.is_empty() {
            let pos: Vec<String> = self.position.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, " (instance at position {})", pos.join("."))?;
        }
        Ok(())
    }
}

/// Outcome of a search together with the number of nodes it generated.
#[derive(Clone, Debug)]
pub struct LoopSearch {
    pub witness: Option<LoopWitness>,
    pub nodes: usize,
}

struct Node {
    start: Term,
    current: Term,
    steps: Vec<LoopStep>,
}

fn check_loop(node: &Node) -> Option<LoopWitness> {
    for (pos, sub) in node.current.subterms() {
        if let Some(theta) = match_term(&node.start, sub) {
            return Some(LoopWitness {
                start: node.start.clone(),
                steps: node.steps.clone(),
                position: pos,
                matcher: theta,
            });
        }
    }
    None
}

/// Renames the variables of the witness to plain names.
fn tidy(w: LoopWitness) -> LoopWitness {
    let vars = w.start.vars();
    let mut taken: BTreeMap<String, usize> = BTreeMap::new();
    for v in &vars {
        *taken.entry(v.name().to_string()).or_default() += 1;
    }
    let mut used: Vec<String> = Vec::new();
    let mut rename = Substitution::new();
    for v in &vars {
        let mut name = v.name().to_string();
        if taken[v.name()] > 1 || used.contains(&name) {
            let mut k = 1;
            while used.contains(&format!("{}{k}", v.name())) || taken.contains_key(&format!("{}{k}", v.name())) {
                k += 1;
            }
            name = format!("{}{k}", v.name());
        }
        used.push(name.clone());
        rename.insert(v.clone(), Term::Var(Var::new(&name)));
    }
    let start = rename.apply(&w.start);
    let mut out = LoopWitness { start, ..w };
    if let Some(terms) = out.replay() {
        if let Some(theta) = terms.last().and_then(|t| t.at(&out.position)).and_then(|s| match_term(&out.start, s)) {
            out.matcher = theta;
        }
    }
    out
}

fn search(
    seeds: &[Rule],
    rules: &[Rule],
    config: LoopConfig,
    nodes: &mut usize,
) -> Option<LoopWitness> {
    let mut queue: VecDeque<Node> = seeds
        .iter()
        .map(|s| Node {
            start: s.lhs.clone(),
            current: s.rhs.clone(),
            steps: vec![LoopStep {
                rule: s.clone(),
                position: Vec::new(),
            }],
        })
        .collect();
    *nodes += queue.len();
    while let Some(node) = queue.pop_front() {
        if let Some(w) = check_loop(&node) {
            let w = tidy(w);
            if w.verify() {
                return Some(w);
            }
        }
        if node.steps.len() >= config.depth {
            continue;
        }
        let tag = node.steps.len() as u32 + 1;
        for (pos, sub) in node.current.subterms() {
            if sub.is_var() {
                continue;
            }
            for rule in rules {
                let renamed = rule.retag(tag);
                let Some(sigma) = unify(sub, &renamed.lhs) else {
                    continue;
                };
                if *nodes >= config.budget {
                    return None;
                }
                *nodes += 1;
                let current = sigma.apply(&node.current.replace_at(&pos, renamed.rhs.clone())?);
                let mut steps = node.steps.clone();
                steps.push(LoopStep {
                    rule: rule.clone(),
                    position: pos.clone(),
                });
                queue.push_back(Node {
                    start: sigma.apply(&node.start),
                    current,
                    steps,
                });
            }
        }
    }
    None
}

/// Searches chains seeded by the pairs of `prob` using `P ∪ R`, then
/// sequences seeded by the rules of `R` using `R` alone.
pub fn find_loop_with(prob: &DpProblem, config: LoopConfig) -> LoopSearch {
    let mut nodes = 0;
    let mut both = prob.pairs.clone();
    both.extend(prob.rules.rules.iter().cloned());
    let witness = search(&prob.pairs, &both, config, &mut nodes)
        .or_else(|| search(&prob.rules.rules, &prob.rules.rules, config, &mut nodes));
    LoopSearch { witness, nodes }
}

pub fn find_loop(prob: &DpProblem, depth: usize) -> Option<LoopWitness> {
    find_loop_with(
        prob,
        LoopConfig {
            depth,
            ..LoopConfig::default()
        },
    )
    .witness
}
