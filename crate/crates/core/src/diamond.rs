//! Diamonds: one shared input feeding two edges that re-merge.
//!
//! `(diamond shared edge1 edge2 merge)` carries each edge as a zipper
//! `(zipper front back)`. The front half is written in the usual
//! orientation (inputs as children, ending in the hole `in`); the back half
//! is reversed (consumers as children, ending in `out`), so its outermost
//! operator is the first one applied after the cursor. The merge refers to
//! the two edge outputs through the holes `first` and `second`.
//!
//! Cursor shifts move one operator across the cursor. Inlining moves the
//! last operator of an edge into the merge; hoisting moves an operator that
//! starts both edges into the shared input.

use std::sync::Arc;

use crate::egraph::{CustomApplier, EGraph, ENode, Id, Rewrite};
use crate::ir::{Op, Symbol, Term};
use crate::rules::RuleSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiamondError {
    #[error("expected {expected}, found {found}")]
    Shape {
        expected: &'static str,
        found: String,
    },
    #[error("zipper half `{half}` must be a chain of unary operators ending in one `{hole}`")]
    Edge { half: String, hole: &'static str },
    #[error("merge `{0}` must use both `first` and `second`")]
    Merge(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zipper {
    pub front: Term,
    pub back: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiamondTerm {
    pub shared: Term,
    pub edge1: Zipper,
    pub edge2: Zipper,
    pub merge: Term,
}

/// Checks that `half` is a straight line of edge operators ending in `hole`.
fn check_half(half: &Term, hole: Op) -> Result<(), DiamondError> {
    let mut cur = half;
    loop {
        if cur.op() == hole {
            return Ok(());
        }
        if !cur.op().is_edge_op() {
            return Err(DiamondError::Edge {
                half: half.to_string(),
                hole: hole.name(),
            });
        }
        cur = cur.child(0);
    }
}

impl Zipper {
    pub fn new(front: Term, back: Term) -> Result<Zipper, DiamondError> {
        check_half(&front, Op::HoleIn)?;
        check_half(&back, Op::HoleOut)?;
        Ok(Zipper { front, back })
    }

    pub fn from_term(t: &Term) -> Result<Zipper, DiamondError> {
        if t.op() != Op::Zipper {
            return Err(DiamondError::Shape {
                expected: "a zipper",
                found: t.to_string(),
            });
        }
        Zipper::new(t.child(0).clone(), t.child(1).clone())
    }

    pub fn to_term(&self) -> Term {
        Term::zipper(self.front.clone(), self.back.clone())
    }

    /// The edge applied to `input`: front first, then back un-reversed.
    pub fn apply(&self, input: &Term) -> Term {
        let mut acc = self.front.fill_hole(Op::HoleIn, input);
        let mut cur = &self.back;
        while cur.op() != Op::HoleOut {
            acc = Term::new(cur.op(), cur.symbol().cloned(), vec![acc]);
            cur = cur.child(0);
        }
        acc
    }
}

impl DiamondTerm {
    pub fn from_term(t: &Term) -> Result<DiamondTerm, DiamondError> {
        if t.op() != Op::Diamond {
            return Err(DiamondError::Shape {
                expected: "a diamond",
                found: t.to_string(),
            });
        }
        let merge = t.child(3).clone();
        if !merge.contains_op(Op::HoleFirst) || !merge.contains_op(Op::HoleSecond) {
            return Err(DiamondError::Merge(merge.to_string()));
        }
        Ok(DiamondTerm {
            shared: t.child(0).clone(),
            edge1: Zipper::from_term(t.child(1))?,
            edge2: Zipper::from_term(t.child(2))?,
            merge,
        })
    }

    pub fn to_term(&self) -> Term {
        Term::diamond(
            self.shared.clone(),
            self.edge1.to_term(),
            self.edge2.to_term(),
            self.merge.clone(),
        )
    }

    /// The equivalent plain term, with the shared input duplicated.
    pub fn desugar(&self) -> Term {
        let first = self.edge1.apply(&self.shared);
        let second = self.edge2.apply(&self.shared);
        self.merge
            .fill_hole(Op::HoleFirst, &first)
            .fill_hole(Op::HoleSecond, &second)
    }
}

/// Desugars one diamond term.
pub fn desugar(t: &Term) -> Result<Term, DiamondError> {
    Ok(DiamondTerm::from_term(t)?.desugar())
}

/// Replaces every diamond in `t`, innermost first.
pub fn desugar_all(t: &Term) -> Result<Term, DiamondError> {
    if !t.contains_op(Op::Diamond) {
        return Ok(t.clone());
    }
    let mut err = None;
    let out = t.map_bottom_up(&mut |node| {
        if node.op() != Op::Diamond || err.is_some() {
            return node;
        }
        match desugar(&node) {
            Ok(d) => d,
            Err(e) => {
                err = Some(e);
                node
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Unary operators as `(name, pattern head)`; `?fn` binds map/filter symbols.
const EDGE_OPS: [(&str, &str); 6] = [
    ("map", "map ?fn"),
    ("filter", "filter ?fn"),
    ("persist", "persist"),
    ("delta", "delta"),
    ("old", "old"),
    ("prev", "prev"),
];

pub const SHIFT_GROUP: &str = "shift";

/// Cursor shifts for every edge operator, both directions, rate-limited to
/// one effective shift per zipper class per iteration.
pub fn shift_rules() -> RuleSet {
    let mut rules = Vec::new();
    for (name, head) in EDGE_OPS {
        let back_heavy = format!("(zipper ?front ({head} ?back))");
        let front_heavy = format!("(zipper ({head} ?front) ?back)");
        let pair = Rewrite::bidirectional(&format!("shift-{name}"), &back_heavy, &front_heavy)
            .expect("static rule parses");
        rules.extend(pair.into_iter().map(|r| r.rate_limited(SHIFT_GROUP)));
    }
    RuleSet::new("shift", rules)
}

fn hole_id(g: &EGraph, hole: Op) -> Option<Id> {
    g.lookup(&ENode::leaf(hole, None))
}

/// `(op child)` nodes of a class whose child is the class `child`.
fn unary_over(g: &EGraph, class: Id, child: Id) -> Vec<(Op, Option<Symbol>)> {
    g.class(class)
        .nodes
        .iter()
        .filter(|n| n.op.is_edge_op() && g.find(n.children[0]) == g.find(child))
        .map(|n| (n.op, n.symbol.clone()))
        .collect()
}

fn zippers(g: &EGraph, class: Id) -> Vec<(Id, Id)> {
    g.class(class)
        .nodes
        .iter()
        .filter(|n| n.op == Op::Zipper)
        .map(|n| (n.children[0], n.children[1]))
        .collect()
}

const DIAMOND_LHS: &str = "(diamond ?shared ?edge1 ?edge2 ?merge)";

/// Moves an edge's last operator into the merge: a back half `(op out)`
/// becomes `out` and the edge's hole in the merge becomes `(op hole)`.
pub fn inline_rule() -> Rewrite {
    let lhs = crate::egraph::Pattern::parse(DIAMOND_LHS).expect("static pattern");
    let [s, e1, e2, m] = ["shared", "edge1", "edge2", "merge"].map(|v| lhs.var(v).unwrap());
    let applier: CustomApplier = Arc::new(move |g: &mut EGraph, _class: Id, subst| {
        let (Some(out), Some(shared), Some(merge)) =
            (hole_id(g, Op::HoleOut), subst.get(s), subst.get(m))
        else {
            return vec![];
        };
        let edges = [subst.get(e1).unwrap(), subst.get(e2).unwrap()];
        let mut created = Vec::new();
        let mut merge_term = None;
        for (k, &edge) in edges.iter().enumerate() {
            for (front, back) in zippers(g, edge) {
                for (op, symbol) in unary_over(g, back, out) {
                    let merge_t = merge_term
                        .get_or_insert_with(|| {
                            g.smallest_term(merge).expect("merge is extractable")
                        })
                        .clone();
                    let hole = if k == 0 {
                        Op::HoleFirst
                    } else {
                        Op::HoleSecond
                    };
                    let wrapped = Term::new(op, symbol, vec![Term::hole(hole)]);
                    let new_merge = g.add(&merge_t.fill_hole(hole, &wrapped));
                    let new_zipper = g.add_node(ENode::new(Op::Zipper, None, vec![front, out]));
                    let mut kids = vec![shared, edges[0], edges[1], new_merge];
                    kids[k + 1] = new_zipper;
                    created.push(g.add_node(ENode::new(Op::Diamond, None, kids)));
                }
            }
        }
        created
    });
    Rewrite::custom("inline", DIAMOND_LHS, applier).expect("static pattern")
}

/// Moves an operator that starts both edges into the shared input: fronts
/// `(op in)` on both edges become `in` and the shared input becomes
/// `(op shared)`.
pub fn hoist_rule() -> Rewrite {
    let lhs = crate::egraph::Pattern::parse(DIAMOND_LHS).expect("static pattern");
    let [s, e1, e2, m] = ["shared", "edge1", "edge2", "merge"].map(|v| lhs.var(v).unwrap());
    let applier: CustomApplier = Arc::new(move |g: &mut EGraph, _class: Id, subst| {
        let Some(hole_in) = hole_id(g, Op::HoleIn) else {
            return vec![];
        };
        let (shared, merge) = (subst.get(s).unwrap(), subst.get(m).unwrap());
        let mut created = Vec::new();
        for (front1, back1) in zippers(g, subst.get(e1).unwrap()) {
            for (op1, sym1) in unary_over(g, front1, hole_in) {
                for (front2, back2) in zippers(g, subst.get(e2).unwrap()) {
                    if !unary_over(g, front2, hole_in).contains(&(op1, sym1.clone())) {
                        continue;
                    }
                    let new_shared = g.add_node(ENode::new(op1, sym1.clone(), vec![shared]));
                    let z1 = g.add_node(ENode::new(Op::Zipper, None, vec![hole_in, back1]));
                    let z2 = g.add_node(ENode::new(Op::Zipper, None, vec![hole_in, back2]));
                    created.push(g.add_node(ENode::new(
                        Op::Diamond,
                        None,
                        vec![new_shared, z1, z2, merge],
                    )));
                }
            }
        }
        created
    });
    Rewrite::custom("hoist", DIAMOND_LHS, applier).expect("static pattern")
}

/// Inline and hoist first, shifts last.
pub fn diamond_rules() -> RuleSet {
    let mut rules = vec![inline_rule(), hoist_rule()];
    rules.extend(shift_rules().rules);
    RuleSet::new("diamond", rules)
}
