//! Equality-saturation engine.
//!
//! E-nodes are hashconsed into e-classes tracked by a union-find. Unions
//! defer congruence repair to [`EGraph::rebuild`], which restores the
//! invariant that no two canonical classes hold the same canonical e-node.

mod pattern;
mod rewrite;
mod saturate;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

pub use pattern::{Pattern, PatternError, Subst, SymVar, Var};
pub use rewrite::{Applier, Condition, CustomApplier, Rewrite};
pub use saturate::{Application, IterationStats, Limits, SaturationReport, StopReason};

use crate::ir::{Op, Symbol, Term};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(u32);

impl Id {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ENode {
    pub op: Op,
    pub symbol: Option<Symbol>,
    pub children: Vec<Id>,
}

impl ENode {
    pub fn new(op: Op, symbol: Option<Symbol>, children: Vec<Id>) -> Self {
        debug_assert_eq!(op.arity(), children.len());
        ENode {
            op,
            symbol,
            children,
        }
    }

    pub fn leaf(op: Op, symbol: Option<Symbol>) -> Self {
        ENode::new(op, symbol, vec![])
    }
}

#[derive(Debug, Clone)]
pub struct EClass {
    pub id: Id,
    pub nodes: Vec<ENode>,
    /// Nodes that use this class as a child, with the class they live in.
    parents: Vec<(ENode, Id)>,
}

impl EClass {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EGraph {
    parent: Vec<u32>,
    classes: BTreeMap<Id, EClass>,
    memo: HashMap<ENode, Id>,
    pending: Vec<(ENode, Id)>,
    dirty: bool,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, id: Id) -> Id {
        let mut cur = id.0;
        while self.parent[cur as usize] != cur {
            cur = self.parent[cur as usize];
        }
        Id(cur)
    }

    fn find_compress(&mut self, id: Id) -> Id {
        let root = self.find(id);
        let mut cur = id.0;
        while self.parent[cur as usize] != root.0 {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root.0;
            cur = next;
        }
        root
    }

    pub fn canonicalize(&self, node: &ENode) -> ENode {
        ENode {
            op: node.op,
            symbol: node.symbol.clone(),
            children: node.children.iter().map(|&c| self.find(c)).collect(),
        }
    }

    /// Number of canonical classes.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Number of e-nodes across all classes.
    pub fn node_count(&self) -> usize {
        self.classes.values().map(EClass::len).sum()
    }

    pub fn classes(&self) -> impl Iterator<Item = &EClass> {
        self.classes.values()
    }

    pub fn class(&self, id: Id) -> &EClass {
        &self.classes[&self.find(id)]
    }

    pub fn is_clean(&self) -> bool {
        !self.dirty && self.pending.is_empty()
    }

    /// Looks up a node without inserting it.
    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo
            .get(&self.canonicalize(node))
            .map(|&id| self.find(id))
    }

    /// Adds one e-node whose children are existing classes.
    pub fn add_node(&mut self, node: ENode) -> Id {
        let node = self.canonicalize(&node);
        if let Some(&id) = self.memo.get(&node) {
            return self.find(id);
        }
        let id = Id(self.parent.len() as u32);
        self.parent.push(id.0);
        for &child in &node.children {
            self.classes
                .get_mut(&child)
                .expect("children are canonical")
                .parents
                .push((node.clone(), id));
        }
        self.classes.insert(
            id,
            EClass {
                id,
                nodes: vec![node.clone()],
                parents: Vec::new(),
            },
        );
        self.memo.insert(node, id);
        id
    }

    /// Adds a whole term bottom-up.
    pub fn add(&mut self, t: &Term) -> Id {
        let children = t.children().iter().map(|c| self.add(c)).collect();
        self.add_node(ENode::new(t.op(), t.symbol().cloned(), children))
    }

    /// Merges two classes; returns the surviving canonical id.
    pub fn union(&mut self, a: Id, b: Id) -> Id {
        self.union_report(a, b).0
    }

    /// Like [`union`](Self::union), also reporting whether anything changed.
    pub fn union_report(&mut self, a: Id, b: Id) -> (Id, bool) {
        let a = self.find_compress(a);
        let b = self.find_compress(b);
        if a == b {
            return (a, false);
        }
        let size = |g: &EGraph, id: Id| {
            let c = &g.classes[&id];
            c.nodes.len() + c.parents.len()
        };
        let (root, child) = if size(self, a) >= size(self, b) {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[child.index()] = root.0;
        let absorbed = self.classes.remove(&child).expect("canonical class");
        self.pending.extend(absorbed.parents.iter().cloned());
        let target = self.classes.get_mut(&root).expect("canonical class");
        target.nodes.extend(absorbed.nodes);
        target.parents.extend(absorbed.parents);
        self.dirty = true;
        (root, true)
    }

    /// Restores congruence closure and canonical node lists.
    ///
    /// Returns the number of unions performed during repair.
    pub fn rebuild(&mut self) -> usize {
        if self.is_clean() {
            return 0;
        }
        let mut repairs = 0;
        loop {
            while let Some((node, class)) = self.pending.pop() {
                let node = self.canonicalize(&node);
                let class = self.find(class);
                if let Some(old) = self.memo.insert(node, class) {
                    if self.union_report(old, class).1 {
                        repairs += 1;
                    }
                }
            }
            // Re-key the memo from scratch; any collision is a missed congruence.
            self.memo.clear();
            let mut collisions = Vec::new();
            let ids: Vec<Id> = self.classes.keys().copied().collect();
            for id in ids {
                let class = self.classes.get_mut(&id).unwrap();
                let nodes = std::mem::take(&mut class.nodes);
                let mut canon: Vec<ENode> = nodes
                    .into_iter()
                    .map(|n| ENode {
                        op: n.op,
                        symbol: n.symbol,
                        children: n
                            .children
                            .iter()
                            .map(|&c| find_in(&self.parent, c))
                            .collect(),
                    })
                    .collect();
                canon.sort();
                canon.dedup();
                for n in &canon {
                    if let Some(other) = self.memo.insert(n.clone(), id) {
                        if other != id {
                            collisions.push((other, id));
                        }
                    }
                }
                self.classes.get_mut(&id).unwrap().nodes = canon;
            }
            if collisions.is_empty() && self.pending.is_empty() {
                break;
            }
            for (a, b) in collisions {
                if self.union_report(a, b).1 {
                    repairs += 1;
                }
            }
        }
        for class in self.classes.values_mut() {
            let mut parents: Vec<(ENode, Id)> = class
                .parents
                .drain(..)
                .map(|(n, p)| {
                    let n = ENode {
                        op: n.op,
                        symbol: n.symbol,
                        children: n
                            .children
                            .iter()
                            .map(|&c| find_in(&self.parent, c))
                            .collect(),
                    };
                    (n, find_in(&self.parent, p))
                })
                .collect();
            parents.sort();
            parents.dedup();
            class.parents = parents;
        }
        self.dirty = false;
        repairs
    }

    /// Ids of classes holding a node with the given operator.
    pub fn classes_with_op(&self, op: Op) -> Vec<Id> {
        self.classes
            .values()
            .filter(|c| c.nodes.iter().any(|n| n.op == op))
            .map(|c| c.id)
            .collect()
    }

    /// Whether `t` is represented, and in which class. Does not insert.
    pub fn lookup_term(&self, t: &Term) -> Option<Id> {
        let children = t
            .children()
            .iter()
            .map(|c| self.lookup_term(c))
            .collect::<Option<Vec<_>>>()?;
        self.lookup(&ENode::new(t.op(), t.symbol().cloned(), children))
    }

    /// Whether `a` and `b` are both represented in the same class.
    pub fn equiv(&self, a: &Term, b: &Term) -> bool {
        match (self.lookup_term(a), self.lookup_term(b)) {
            (Some(x), Some(y)) => self.find(x) == self.find(y),
            _ => false,
        }
    }

    /// Smallest term (by node count) in the class, over whatever nodes are
    /// reachable from it. Works on a graph that has not been rebuilt.
    pub fn smallest_term(&self, root: Id) -> Option<Term> {
        let root = self.find(root);
        let mut reachable = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            reachable.push(id);
            for n in &self.classes[&id].nodes {
                for &c in &n.children {
                    stack.push(self.find(c));
                }
            }
        }
        let mut best: HashMap<Id, (usize, &ENode)> = HashMap::new();
        loop {
            let mut changed = false;
            for &id in &reachable {
                for n in &self.classes[&id].nodes {
                    let size = n.children.iter().try_fold(1usize, |acc, &c| {
                        best.get(&self.find(c)).map(|(s, _)| acc + s)
                    });
                    if let Some(size) = size {
                        if best.get(&id).is_none_or(|(s, _)| size < *s) {
                            best.insert(id, (size, n));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        fn build(g: &EGraph, best: &HashMap<Id, (usize, &ENode)>, id: Id) -> Term {
            let (_, n) = best[&g.find(id)];
            let children = n.children.iter().map(|&c| build(g, best, c)).collect();
            Term::new(n.op, n.symbol.clone(), children)
        }
        best.contains_key(&root).then(|| build(self, &best, root))
    }

    /// Debug serialization, one `(class ...)` form per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for class in self.classes.values() {
            out.push_str(&format!("(class {}", class.id));
            for n in &class.nodes {
                out.push_str(&format!(" (node {}", n.op));
                if let Some(s) = &n.symbol {
                    out.push_str(&format!(" {s}"));
                }
                for c in &n.children {
                    out.push_str(&format!(" {}", self.find(*c)));
                }
                out.push(')');
            }
            out.push_str(")\n");
        }
        out
    }

    /// Brute-force check of the congruence invariant on canonical nodes.
    pub fn check_congruence(&self) -> Result<(), String> {
        let mut seen: HashMap<ENode, Id> = HashMap::new();
        for class in self.classes.values() {
            for n in &class.nodes {
                let canon = self.canonicalize(n);
                if let Some(other) = seen.insert(canon.clone(), class.id) {
                    if other != class.id {
                        return Err(format!(
                            "node {canon:?} in classes {other} and {}",
                            class.id
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn find_in(parent: &[u32], id: Id) -> Id {
    let mut cur = id.0;
    while parent[cur as usize] != cur {
        cur = parent[cur as usize];
    }
    Id(cur)
}
