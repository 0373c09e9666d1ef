use std::fmt;

use crate::ir::{is_valid_name, Op, Symbol, Term};
use crate::sexp::{self, Sexp, SexpKind};

use super::{EGraph, ENode, Id};

/// Index of a class variable within its pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

/// Index of a function-symbol variable within its pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymVar(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymPat {
    None,
    Lit(Symbol),
    Var(SymVar),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatNode {
    Var(Var),
    Node {
        op: Op,
        sym: SymPat,
        children: Vec<PatNode>,
    },
}

/// A term-shaped tree whose leaves may be `?x` variables. In the function
/// position of `map`/`filter`, `?f` binds the function symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    root: PatNode,
    vars: Vec<String>,
    sym_vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error(transparent)]
    Syntax(#[from] sexp::SyntaxError),
    #[error("bad pattern at {pos}: {msg}")]
    Malformed { pos: sexp::Pos, msg: String },
    #[error("variable `{0}` is not bound by the left-hand side")]
    UnboundVar(String),
}

/// Bindings produced by a match.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subst {
    classes: Vec<Option<Id>>,
    syms: Vec<Option<Symbol>>,
}

impl Subst {
    pub fn new(vars: usize, sym_vars: usize) -> Self {
        Subst {
            classes: vec![None; vars],
            syms: vec![None; sym_vars],
        }
    }

    pub fn get(&self, v: Var) -> Option<Id> {
        self.classes.get(v.0).copied().flatten()
    }

    pub fn sym(&self, v: SymVar) -> Option<&Symbol> {
        self.syms.get(v.0).and_then(Option::as_ref)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (Var, Id)> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter_map(|(i, id)| id.map(|id| (Var(i), id)))
    }

    fn canonical(&self, g: &EGraph) -> Subst {
        Subst {
            classes: self
                .classes
                .iter()
                .map(|c| c.map(|id| g.find(id)))
                .collect(),
            syms: self.syms.clone(),
        }
    }
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, PatternError> {
        let sexp = sexp::read_one(text)?;
        let mut p = Pattern {
            root: PatNode::Var(Var(0)),
            vars: Vec::new(),
            sym_vars: Vec::new(),
        };
        p.root = p.lower(&sexp, true)?;
        Ok(p)
    }

    /// Parses `text` reusing the variable numbering of `lhs`, rejecting
    /// variables that `lhs` does not bind.
    pub fn parse_rhs(text: &str, lhs: &Pattern) -> Result<Pattern, PatternError> {
        let sexp = sexp::read_one(text)?;
        let mut p = Pattern {
            root: PatNode::Var(Var(0)),
            vars: lhs.vars.clone(),
            sym_vars: lhs.sym_vars.clone(),
        };
        p.root = p.lower(&sexp, false)?;
        Ok(p)
    }

    pub fn root(&self) -> &PatNode {
        &self.root
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        let name = name.strip_prefix('?').unwrap_or(name);
        self.vars.iter().position(|v| v == name).map(Var)
    }

    pub fn sym_var(&self, name: &str) -> Option<SymVar> {
        let name = name.strip_prefix('?').unwrap_or(name);
        self.sym_vars.iter().position(|v| v == name).map(SymVar)
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn sym_var_count(&self) -> usize {
        self.sym_vars.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    fn lower(&mut self, sexp: &Sexp, binding: bool) -> Result<PatNode, PatternError> {
        let bad = |msg: String| PatternError::Malformed { pos: sexp.pos, msg };
        match &sexp.kind {
            SexpKind::Atom(a) => {
                if let Some(name) = a.strip_prefix('?') {
                    if let Some(i) = self.vars.iter().position(|v| v == name) {
                        return Ok(PatNode::Var(Var(i)));
                    }
                    if !binding {
                        return Err(PatternError::UnboundVar(a.clone()));
                    }
                    self.vars.push(name.to_string());
                    return Ok(PatNode::Var(Var(self.vars.len() - 1)));
                }
                match Op::from_name(a) {
                    Some(op) if op.is_hole() => Ok(PatNode::Node {
                        op,
                        sym: SymPat::None,
                        children: vec![],
                    }),
                    Some(_) => Err(bad(format!("operator `{a}` without arguments"))),
                    None if is_valid_name(a) => Ok(PatNode::Node {
                        op: Op::Source,
                        sym: SymPat::Lit(Symbol::new(a)),
                        children: vec![],
                    }),
                    None => Err(bad(format!("invalid atom `{a}`"))),
                }
            }
            SexpKind::List(items) => {
                let head = items
                    .first()
                    .and_then(Sexp::as_atom)
                    .ok_or_else(|| bad("expected an operator".into()))?;
                let op = Op::from_name(head)
                    .filter(|op| *op != Op::Source && !op.is_hole())
                    .ok_or_else(|| bad(format!("unknown operator `{head}`")))?;
                let mut rest = &items[1..];
                let sym = if op.has_symbol() {
                    let f = rest
                        .first()
                        .and_then(Sexp::as_atom)
                        .ok_or_else(|| bad(format!("`{op}` expects a function")))?;
                    rest = &rest[1..];
                    if let Some(name) = f.strip_prefix('?') {
                        match self.sym_vars.iter().position(|v| v == name) {
                            Some(i) => SymPat::Var(SymVar(i)),
                            None if binding => {
                                self.sym_vars.push(name.to_string());
                                SymPat::Var(SymVar(self.sym_vars.len() - 1))
                            }
                            None => return Err(PatternError::UnboundVar(f.to_string())),
                        }
                    } else {
                        SymPat::Lit(Symbol::new(f))
                    }
                } else {
                    SymPat::None
                };
                if rest.len() != op.arity() {
                    return Err(bad(format!("`{op}` takes {} children", op.arity())));
                }
                let children = rest
                    .iter()
                    .map(|c| self.lower(c, binding))
                    .collect::<Result<_, _>>()?;
                Ok(PatNode::Node { op, sym, children })
            }
        }
    }

    /// All matches, one per distinct (class, substitution), in class order.
    pub fn search(&self, g: &EGraph) -> Vec<(Id, Subst)> {
        let candidates: Vec<Id> = match &self.root {
            PatNode::Var(_) => g.classes().map(|c| c.id).collect(),
            PatNode::Node { op, .. } => g.classes_with_op(*op),
        };
        let mut out = Vec::new();
        for id in candidates {
            for s in self.search_class(g, id) {
                out.push((id, s));
            }
        }
        out
    }

    /// Matches rooted at one class.
    pub fn search_class(&self, g: &EGraph, id: Id) -> Vec<Subst> {
        let start = Subst::new(self.vars.len(), self.sym_vars.len());
        let mut out = Vec::new();
        match_node(g, &self.root, g.find(id), start, &mut out);
        let mut out: Vec<Subst> = out.into_iter().map(|s| s.canonical(g)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Adds the instantiated pattern, returning its class.
    pub fn instantiate(&self, g: &mut EGraph, subst: &Subst) -> Id {
        instantiate_node(g, &self.root, subst)
    }

    /// Builds the pattern as a term, with variables replaced by `terms`.
    pub fn instantiate_term(&self, subst: &Subst, term_of: &mut impl FnMut(Id) -> Term) -> Term {
        fn go(p: &PatNode, subst: &Subst, term_of: &mut impl FnMut(Id) -> Term) -> Term {
            match p {
                PatNode::Var(v) => term_of(subst.get(*v).expect("bound variable")),
                PatNode::Node { op, sym, children } => {
                    let symbol = resolve_sym(sym, subst);
                    let children = children.iter().map(|c| go(c, subst, term_of)).collect();
                    Term::new(*op, symbol, children)
                }
            }
        }
        go(&self.root, subst, term_of)
    }
}

fn resolve_sym(sym: &SymPat, subst: &Subst) -> Option<Symbol> {
    match sym {
        SymPat::None => None,
        SymPat::Lit(s) => Some(s.clone()),
        SymPat::Var(v) => Some(subst.sym(*v).expect("bound symbol variable").clone()),
    }
}

fn match_node(g: &EGraph, p: &PatNode, class: Id, subst: Subst, out: &mut Vec<Subst>) {
    match p {
        PatNode::Var(v) => match subst.classes[v.0] {
            Some(bound) if g.find(bound) != class => {}
            Some(_) => out.push(subst),
            None => {
                let mut s = subst;
                s.classes[v.0] = Some(class);
                out.push(s);
            }
        },
        PatNode::Node { op, sym, children } => {
            for node in &g.class(class).nodes {
                if node.op != *op {
                    continue;
                }
                let mut s = subst.clone();
                let sym_ok = match sym {
                    SymPat::None => true,
                    SymPat::Lit(l) => node.symbol.as_ref() == Some(l),
                    SymPat::Var(v) => match (&s.syms[v.0], &node.symbol) {
                        (Some(bound), Some(actual)) => bound == actual,
                        (None, Some(actual)) => {
                            s.syms[v.0] = Some(actual.clone());
                            true
                        }
                        (_, None) => false,
                    },
                };
                if !sym_ok {
                    continue;
                }
                let mut partial = vec![s];
                for (cp, &cid) in children.iter().zip(&node.children) {
                    let mut next = Vec::new();
                    for s in partial {
                        match_node(g, cp, g.find(cid), s, &mut next);
                    }
                    partial = next;
                    if partial.is_empty() {
                        break;
                    }
                }
                out.extend(partial);
            }
        }
    }
}

fn instantiate_node(g: &mut EGraph, p: &PatNode, subst: &Subst) -> Id {
    match p {
        PatNode::Var(v) => subst.get(*v).expect("bound variable"),
        PatNode::Node { op, sym, children } => {
            let ids = children
                .iter()
                .map(|c| instantiate_node(g, c, subst))
                .collect();
            g.add_node(ENode::new(*op, resolve_sym(sym, subst), ids))
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(p: &Pattern, n: &PatNode, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                PatNode::Var(v) => write!(f, "?{}", p.vars[v.0]),
                PatNode::Node { op, sym, children } => {
                    if children.is_empty() && !op.has_symbol() {
                        return write!(f, "{op}");
                    }
                    if *op == Op::Source {
                        if let SymPat::Lit(s) = sym {
                            return write!(f, "{s}");
                        }
                    }
                    write!(f, "({op}")?;
                    match sym {
                        SymPat::None => {}
                        SymPat::Lit(s) => write!(f, " {s}")?,
                        SymPat::Var(v) => write!(f, " ?{}", p.sym_vars[v.0])?,
                    }
                    for c in children {
                        f.write_str(" ")?;
                        go(p, c, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        go(self, &self.root, f)
    }
}
