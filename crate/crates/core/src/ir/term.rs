use std::fmt;
use std::sync::Arc;

use crate::sexp::{self, Pos, Sexp, SexpKind};

use super::ParseError;

/// An interned-by-value name: a source stream, def, or opaque function symbol.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Source,
    Persist,
    Delta,
    Old,
    Prev,
    Chain,
    Cross,
    Join,
    Map,
    Filter,
    Diamond,
    Zipper,
    HoleFirst,
    HoleSecond,
    HoleIn,
    HoleOut,
}

impl Op {
    pub const ALL: [Op; 16] = [
        Op::Source,
        Op::Persist,
        Op::Delta,
        Op::Old,
        Op::Prev,
        Op::Chain,
        Op::Cross,
        Op::Join,
        Op::Map,
        Op::Filter,
        Op::Diamond,
        Op::Zipper,
        Op::HoleFirst,
        Op::HoleSecond,
        Op::HoleIn,
        Op::HoleOut,
    ];

    /// The textual name. Holes print as their bare keyword.
    pub fn name(self) -> &'static str {
        match self {
            Op::Source => "source",
            Op::Persist => "persist",
            Op::Delta => "delta",
            Op::Old => "old",
            Op::Prev => "prev",
            Op::Chain => "chain",
            Op::Cross => "cross",
            Op::Join => "join",
            Op::Map => "map",
            Op::Filter => "filter",
            Op::Diamond => "diamond",
            Op::Zipper => "zipper",
            Op::HoleFirst => "first",
            Op::HoleSecond => "second",
            Op::HoleIn => "in",
            Op::HoleOut => "out",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.iter().copied().find(|op| op.name() == name)
    }

    /// Number of term children, not counting the function symbol of map/filter.
    pub fn arity(self) -> usize {
        match self {
            Op::Source | Op::HoleFirst | Op::HoleSecond | Op::HoleIn | Op::HoleOut => 0,
            Op::Persist | Op::Delta | Op::Old | Op::Prev | Op::Map | Op::Filter => 1,
            Op::Chain | Op::Cross | Op::Join | Op::Zipper => 2,
            Op::Diamond => 4,
        }
    }

    pub fn has_symbol(self) -> bool {
        matches!(self, Op::Source | Op::Map | Op::Filter)
    }

    pub fn is_hole(self) -> bool {
        matches!(
            self,
            Op::HoleFirst | Op::HoleSecond | Op::HoleIn | Op::HoleOut
        )
    }

    /// Single-input operators that may appear along a zipper edge.
    pub fn is_edge_op(self) -> bool {
        matches!(
            self,
            Op::Persist | Op::Delta | Op::Old | Op::Prev | Op::Map | Op::Filter
        )
    }

    /// Operators that only shape a diamond and never run as dataflow.
    pub fn is_structural(self) -> bool {
        matches!(self, Op::Diamond | Op::Zipper) || self.is_hole()
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether `name` may be used as a source, def, sink or function name.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Keywords that can never name a stream.
pub fn is_reserved(name: &str) -> bool {
    Op::from_name(name).is_some()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    op: Op,
    symbol: Option<Symbol>,
    children: Vec<Term>,
}

impl Term {
    /// Builds a term, panicking on an arity or symbol mismatch.
    pub fn new(op: Op, symbol: Option<Symbol>, children: Vec<Term>) -> Term {
        assert_eq!(op.arity(), children.len(), "arity mismatch for {op}");
        assert_eq!(
            op.has_symbol(),
            symbol.is_some(),
            "symbol mismatch for {op}"
        );
        Term {
            op,
            symbol,
            children,
        }
    }

    pub fn source(name: &str) -> Term {
        Term::new(Op::Source, Some(Symbol::new(name)), vec![])
    }

    pub fn unary(op: Op, child: Term) -> Term {
        Term::new(op, None, vec![child])
    }

    pub fn binary(op: Op, a: Term, b: Term) -> Term {
        Term::new(op, None, vec![a, b])
    }

    pub fn map(f: &str, child: Term) -> Term {
        Term::new(Op::Map, Some(Symbol::new(f)), vec![child])
    }

    pub fn filter(p: &str, child: Term) -> Term {
        Term::new(Op::Filter, Some(Symbol::new(p)), vec![child])
    }

    pub fn hole(op: Op) -> Term {
        assert!(op.is_hole());
        Term::new(op, None, vec![])
    }

    pub fn zipper(front: Term, back: Term) -> Term {
        Term::binary(Op::Zipper, front, back)
    }

    pub fn diamond(shared: Term, edge1: Term, edge2: Term, merge: Term) -> Term {
        Term::new(Op::Diamond, None, vec![shared, edge1, edge2, merge])
    }

    pub fn op(&self) -> Op {
        self.op
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        self.symbol.as_ref()
    }

    pub fn children(&self) -> &[Term] {
        &self.children
    }

    pub fn child(&self, i: usize) -> &Term {
        &self.children[i]
    }

    /// Name of a `source` leaf.
    pub fn source_name(&self) -> Option<&str> {
        match self.op {
            Op::Source => self.symbol.as_ref().map(Symbol::as_str),
            _ => None,
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Term::depth).max().unwrap_or(0)
    }

    /// Number of nodes with the given operator.
    pub fn count_op(&self, op: Op) -> usize {
        let here = usize::from(self.op == op);
        here + self.children.iter().map(|c| c.count_op(op)).sum::<usize>()
    }

    pub fn contains_op(&self, op: Op) -> bool {
        self.op == op || self.children.iter().any(|c| c.contains_op(op))
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// Source names in first-occurrence order.
    pub fn sources(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |t| {
            if let Some(name) = t.source_name() {
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        });
        out
    }

    /// Bottom-up rebuild: `f` sees each node after its children were rewritten.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let children = self.children.iter().map(|c| c.map_bottom_up(f)).collect();
        f(Term {
            op: self.op,
            symbol: self.symbol.clone(),
            children,
        })
    }

    /// Replaces every leaf equal to `hole` with `with`.
    pub fn fill_hole(&self, hole: Op, with: &Term) -> Term {
        if self.op == hole {
            return with.clone();
        }
        Term {
            op: self.op,
            symbol: self.symbol.clone(),
            children: self
                .children
                .iter()
                .map(|c| c.fill_hole(hole, with))
                .collect(),
        }
    }

    /// Checks that holes and zippers sit where they are allowed.
    pub fn check_structure(&self) -> Result<(), String> {
        self.check_ctx(Ctx::Plain)
    }

    fn check_ctx(&self, ctx: Ctx) -> Result<(), String> {
        match self.op {
            Op::HoleIn | Op::HoleOut if ctx != Ctx::Edge => {
                return Err(format!("`{}` outside a zipper", self.op))
            }
            Op::HoleFirst | Op::HoleSecond if ctx != Ctx::Merge => {
                return Err(format!("`{}` outside a diamond merge", self.op))
            }
            Op::Zipper if ctx != Ctx::DiamondEdge => {
                return Err("`zipper` outside a diamond edge".into())
            }
            _ => {}
        }
        match self.op {
            Op::Diamond => {
                self.children[0].check_ctx(Ctx::Plain)?;
                self.children[1].check_ctx(Ctx::DiamondEdge)?;
                self.children[2].check_ctx(Ctx::DiamondEdge)?;
                self.children[3].check_ctx(Ctx::Merge)
            }
            Op::Zipper => {
                self.children[0].check_ctx(Ctx::Edge)?;
                self.children[1].check_ctx(Ctx::Edge)
            }
            _ => {
                let inner = if ctx == Ctx::DiamondEdge {
                    Ctx::Plain
                } else {
                    ctx
                };
                self.children.iter().try_for_each(|c| c.check_ctx(inner))
            }
        }
    }

    pub(crate) fn from_sexp(sexp: &Sexp) -> Result<Term, ParseError> {
        let term = Term::from_sexp_unchecked(sexp)?;
        term.check_structure()
            .map_err(|msg| ParseError::Structure { pos: sexp.pos, msg })?;
        Ok(term)
    }

    fn from_sexp_unchecked(sexp: &Sexp) -> Result<Term, ParseError> {
        match &sexp.kind {
            SexpKind::Atom(name) => {
                if let Some(op) = Op::from_name(name) {
                    if op.is_hole() {
                        return Ok(Term::hole(op));
                    }
                    return Err(ParseError::Malformed {
                        pos: sexp.pos,
                        msg: format!("operator `{name}` used without arguments"),
                    });
                }
                check_name(name, sexp.pos)?;
                Ok(Term::source(name))
            }
            SexpKind::List(items) => {
                let (head, rest) = items.split_first().ok_or(ParseError::Malformed {
                    pos: sexp.pos,
                    msg: "empty form".into(),
                })?;
                let name = head.as_atom().ok_or(ParseError::Malformed {
                    pos: head.pos,
                    msg: "operator must be an atom".into(),
                })?;
                let op = match Op::from_name(name) {
                    Some(op) if op != Op::Source && !op.is_hole() => op,
                    _ => {
                        return Err(ParseError::UnknownOperator {
                            pos: head.pos,
                            name: name.to_string(),
                        })
                    }
                };
                let (symbol, args) = if op.has_symbol() {
                    let (f, args) = rest.split_first().ok_or(ParseError::Arity {
                        pos: sexp.pos,
                        op,
                        expected: 2,
                        found: 0,
                    })?;
                    let fname = f.as_atom().ok_or(ParseError::Malformed {
                        pos: f.pos,
                        msg: format!("`{op}` expects a function name"),
                    })?;
                    check_name(fname, f.pos)?;
                    if args.len() != op.arity() {
                        return Err(ParseError::Arity {
                            pos: sexp.pos,
                            op,
                            expected: op.arity() + 1,
                            found: rest.len(),
                        });
                    }
                    (Some(Symbol::new(fname)), args)
                } else {
                    if rest.len() != op.arity() {
                        return Err(ParseError::Arity {
                            pos: sexp.pos,
                            op,
                            expected: op.arity(),
                            found: rest.len(),
                        });
                    }
                    (None, rest)
                };
                let children = args
                    .iter()
                    .map(Term::from_sexp_unchecked)
                    .collect::<Result<_, _>>()?;
                Ok(Term {
                    op,
                    symbol,
                    children,
                })
            }
        }
    }

    /// Parses a single term.
    pub fn parse(text: &str) -> Result<Term, ParseError> {
        Term::from_sexp(&sexp::read_one(text)?)
    }

    /// Parses a term without the hole and zipper placement checks, for
    /// fragments such as a lone zipper or a zipper half.
    pub fn parse_fragment(text: &str) -> Result<Term, ParseError> {
        Term::from_sexp_unchecked(&sexp::read_one(text)?)
    }

    /// Canonical multi-line rendering, indented by nesting depth.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        self.pretty_into(&mut out, 0);
        out
    }

    fn pretty_into(&self, out: &mut String, indent: usize) {
        let flat = self.to_string();
        if flat.len() + indent <= 72 || self.children.is_empty() {
            out.push_str(&flat);
            return;
        }
        out.push('(');
        out.push_str(self.op.name());
        if let Some(s) = &self.symbol {
            out.push(' ');
            out.push_str(s.as_str());
        }
        for c in &self.children {
            out.push('\n');
            out.push_str(&" ".repeat(indent + 2));
            c.pretty_into(out, indent + 2);
        }
        out.push(')');
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Plain,
    DiamondEdge,
    Edge,
    Merge,
}

fn check_name(name: &str, pos: Pos) -> Result<(), ParseError> {
    if is_reserved(name) || !is_valid_name(name) {
        return Err(ParseError::InvalidName {
            pos,
            name: name.to_string(),
        });
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Op::Source => write!(f, "{}", self.symbol.as_ref().expect("source has a name")),
            op if op.is_hole() => f.write_str(op.name()),
            op => {
                write!(f, "({op}")?;
                if let Some(s) = &self.symbol {
                    write!(f, " {s}")?;
                }
                for c in &self.children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Term, ParseError> {
        Term::parse(s)
    }
}

/// Parses a single term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    Term::parse(text)
}

/// Canonical single-line printing.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}
