use std::collections::{BTreeMap, BTreeSet};

use crate::trs::{unify, Rule, Symbol, Term, Trs, Var};

/// Nodes are pair ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<usize>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl DependencyGraph {
    pub fn new(nodes: impl IntoIterator<Item = usize>) -> Self {
        DependencyGraph {
            nodes: nodes.into_iter().collect(),
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.nodes.insert(from);
        self.nodes.insert(to);
        self.edges.insert((from, to));
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((from, 0)..=(from, usize::MAX))
            .map(|&(_, to)| to)
    }

    /// The subgraph induced by `keep`.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> DependencyGraph {
        DependencyGraph {
            nodes: self.nodes.intersection(keep).copied().collect(),
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .copied()
                .collect(),
        }
    }

    pub fn sccs(&self) -> Vec<BTreeSet<usize>> {
        sccs(self)
    }
}

/// Fresh-variable source for capping; tags 0 and 1 are left to callers.
struct Fresh(u32);

impl Fresh {
    fn var(&mut self) -> Term {
        self.0 += 1;
        Term::Var(Var::new("_").with_tag(self.0))
    }
}

/// Replaces by fresh variables every variable and every defined-rooted
/// subterm that could become a redex.
pub fn tcap(t: &Term, rules: &Trs) -> Term {
    let defined = rules.defined_symbols();
    tcap_with(t, rules, &defined, &mut Fresh(1))
}

fn tcap_with(t: &Term, rules: &Trs, defined: &BTreeSet<Symbol>, fresh: &mut Fresh) -> Term {
    match t {
        Term::Var(_) => fresh.var(),
        Term::App(f, args) => {
            let capped = Term::App(
                f.clone(),
                args.iter()
                    .map(|a| tcap_with(a, rules, defined, fresh))
                    .collect(),
            );
            if defined.contains(f)
                && rules
                    .rules
                    .iter()
                    .any(|r| r.lhs.root() == Some(f) && unify(&r.lhs, &capped).is_some())
            {
                fresh.var()
            } else {
                capped
            }
        }
    }
}

/// Estimated dependency graph: an edge `s -> t` to `u -> v` whenever
/// `TCAP(t)` unifies with `u`.
pub fn estimated_edg(pairs: &[Rule], rules: &Trs) -> DependencyGraph {
    let defined = rules.defined_symbols();
    let mut g = DependencyGraph::new(pairs.iter().map(|p| p.id));
    let mut fresh = Fresh(1);
    let caps: Vec<Term> = pairs
        .iter()
        .map(|p| tcap_with(&p.rhs, rules, &defined, &mut fresh))
        .collect();
    for (p, cap) in pairs.iter().zip(&caps) {
        for q in pairs {
            if cap.root() == q.lhs.root() && unify(cap, &q.lhs).is_some() {
                g.add_edge(p.id, q.id);
            }
        }
    }
    g
}

/// Nontrivial strongly connected components, smallest first, ties by
/// smallest member.
pub fn sccs(g: &DependencyGraph) -> Vec<BTreeSet<usize>> {
    let nodes: Vec<usize> = g.nodes.iter().copied().collect();
    let index_of: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let adj: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&n| g.successors(n).filter_map(|m| index_of.get(&m).copied()).collect())
        .collect();
    let mut t = Tarjan {
        adj: &adj,
        index: vec![None; nodes.len()],
        low: vec![0; nodes.len()],
        on_stack: vec![false; nodes.len()],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..nodes.len() {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut comps: Vec<BTreeSet<usize>> = t
        .out
        .into_iter()
        .filter(|c| c.len() > 1 || adj[c[0]].contains(&c[0]))
        .map(|c| c.into_iter().map(|i| nodes[i]).collect())
        .collect();
    comps.sort_by_key(|c: &BTreeSet<usize>| (c.len(), c.first().copied()));
    comps
}

struct Tarjan<'a> {
    adj: &'a [Vec<usize>],
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    out: Vec<Vec<usize>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.next);
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for &w in &self.adj[v] {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(self.low[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("tarjan stack");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.out.push(comp);
        }
    }
}
