//! Cost-model-driven extraction.
//!
//! Class costs are computed as a fixpoint starting from infinity, so classes
//! that only reach themselves through cycles (as `persist` does through
//! `old`/`prev` under the persist laws) stay infinite and are never chosen.
//! Ties between equal-cost terms go to the lexicographically smallest
//! canonical printing.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::egraph::{EGraph, ENode, Id};
use crate::ir::{Op, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub default_weight: f64,
    pub overrides: BTreeMap<Op, f64>,
    /// Count a diamond's shared input once rather than once per edge.
    pub diamond_shared_once: bool,
}

pub const DELTA_WEIGHT: f64 = 100.0;
/// Above 3, so `(chain (old x) x)` (cost 4 over `x`) beats `(persist x)`.
pub const PERSIST_WEIGHT: f64 = 4.0;
pub const STRUCTURAL_WEIGHT: f64 = 0.01;

impl Default for CostModel {
    fn default() -> Self {
        let mut overrides = BTreeMap::new();
        overrides.insert(Op::Delta, DELTA_WEIGHT);
        overrides.insert(Op::Persist, PERSIST_WEIGHT);
        for op in Op::ALL.into_iter().filter(|op| op.is_structural()) {
            overrides.insert(op, STRUCTURAL_WEIGHT);
        }
        CostModel {
            default_weight: 1.0,
            overrides,
            diamond_shared_once: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostModelError {
    #[error("weight for `{0}` must be a positive number")]
    NonPositive(String),
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("line {line}: expected `op = weight`")]
    Syntax { line: usize },
}

impl CostModel {
    /// Every node weighs 1.
    pub fn node_count() -> CostModel {
        CostModel {
            default_weight: 1.0,
            overrides: BTreeMap::new(),
            diamond_shared_once: true,
        }
    }

    pub fn weight(&self, op: Op) -> f64 {
        self.overrides
            .get(&op)
            .copied()
            .unwrap_or(self.default_weight)
    }

    pub fn set_weight(&mut self, op: Op, w: f64) -> Result<(), CostModelError> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(CostModelError::NonPositive(op.to_string()));
        }
        self.overrides.insert(op, w);
        Ok(())
    }

    /// Applies an `op=weight` override as given on the command line.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CostModelError> {
        let (op, w) = spec
            .split_once('=')
            .ok_or(CostModelError::Syntax { line: 0 })?;
        self.apply_pair(op.trim(), w.trim())
    }

    fn apply_pair(&mut self, op: &str, w: &str) -> Result<(), CostModelError> {
        let w: f64 = w
            .parse()
            .map_err(|_| CostModelError::NonPositive(op.to_string()))?;
        if op == "default" {
            if !(w > 0.0 && w.is_finite()) {
                return Err(CostModelError::NonPositive(op.to_string()));
            }
            self.default_weight = w;
            return Ok(());
        }
        let op = Op::from_name(op).ok_or_else(|| CostModelError::UnknownOp(op.to_string()))?;
        self.set_weight(op, w)
    }

    /// Reads `op = weight` lines (`#` or `;` comments) on top of `self`.
    /// The name `default` sets the default weight.
    pub fn apply_config(&mut self, text: &str) -> Result<(), CostModelError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (op, w) = line
                .split_once('=')
                .ok_or(CostModelError::Syntax { line: i + 1 })?;
            self.apply_pair(op.trim(), w.trim())?;
        }
        Ok(())
    }

    /// Cost of a node given its children's costs, in child order.
    fn node_cost(&self, op: Op, child_costs: &[f64]) -> f64 {
        let mut total = self.weight(op);
        for &c in child_costs {
            total += c;
        }
        if op == Op::Diamond && !self.diamond_shared_once {
            total += child_costs[0];
        }
        total
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "default = {}", self.default_weight)?;
        for (op, w) in &self.overrides {
            writeln!(f, "{op} = {w}")?;
        }
        Ok(())
    }
}

/// Weighted node count of a term.
pub fn term_cost(t: &Term, m: &CostModel) -> f64 {
    let child_costs: Vec<f64> = t.children().iter().map(|c| term_cost(c, m)).collect();
    m.node_cost(t.op(), &child_costs)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("class {0} has no finite-cost term")]
    InfiniteCost(Id),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub term: Term,
    pub cost: f64,
}

/// Per-class minimum costs of a graph under a model.
pub struct Extractor<'g> {
    graph: &'g EGraph,
    model: CostModel,
    costs: HashMap<Id, f64>,
    chosen: HashMap<Id, Term>,
}

impl<'g> Extractor<'g> {
    pub fn new(graph: &'g EGraph, model: &CostModel) -> Self {
        let mut ex = Extractor {
            graph,
            model: model.clone(),
            costs: HashMap::new(),
            chosen: HashMap::new(),
        };
        ex.compute_costs();
        ex
    }

    fn enode_cost(&self, n: &ENode) -> Option<f64> {
        let child_costs = n
            .children
            .iter()
            .map(|&c| self.costs.get(&self.graph.find(c)).copied())
            .collect::<Option<Vec<f64>>>()?;
        Some(self.model.node_cost(n.op, &child_costs))
    }

    fn compute_costs(&mut self) {
        loop {
            let mut changed = false;
            for class in self.graph.classes() {
                for n in &class.nodes {
                    if let Some(c) = self.enode_cost(n) {
                        let better = self.costs.get(&class.id).is_none_or(|&old| c < old);
                        if better {
                            self.costs.insert(class.id, c);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Minimum cost of the class, if finite.
    pub fn cost(&self, id: Id) -> Option<f64> {
        self.costs.get(&self.graph.find(id)).copied()
    }

    /// A minimum-cost term with the smallest printing among ties.
    pub fn best(&mut self, id: Id) -> Result<Extracted, ExtractError> {
        let id = self.graph.find(id);
        let cost = self.cost(id).ok_or(ExtractError::InfiniteCost(id))?;
        let term = self.build(id);
        Ok(Extracted { term, cost })
    }

    fn build(&mut self, id: Id) -> Term {
        let id = self.graph.find(id);
        if let Some(t) = self.chosen.get(&id) {
            return t.clone();
        }
        let target = self.costs[&id];
        let tight: Vec<ENode> = self
            .graph
            .class(id)
            .nodes
            .iter()
            .filter(|n| self.enode_cost(n) == Some(target))
            .cloned()
            .collect();
        // Children of a tight node are strictly cheaper, so this recursion
        // terminates.
        let mut best: Option<(String, Term)> = None;
        for n in tight {
            let children = n.children.iter().map(|&c| self.build(c)).collect();
            let t = Term::new(n.op, n.symbol.clone(), children);
            let printed = t.to_string();
            if best.as_ref().is_none_or(|(p, _)| printed < *p) {
                best = Some((printed, t));
            }
        }
        let (_, t) = best.expect("a finite class has a tight node");
        self.chosen.insert(id, t.clone());
        t
    }
}

/// Extracts a minimum-cost term for `root`.
pub fn extract_best(g: &EGraph, root: Id, m: &CostModel) -> Result<Extracted, ExtractError> {
    Extractor::new(g, m).best(root)
}
