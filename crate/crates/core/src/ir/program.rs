use std::collections::HashSet;
use std::fmt;

use indexmap::{IndexMap, IndexSet};

use crate::sexp::{self, Sexp};

use super::{is_reserved, is_valid_name, Op, ParseError, Term};

/// Named pipelines plus sinks. A def referenced more than once is a tee.
///
/// Def bodies and sinks refer to a def by using its name as a source leaf.
/// Any other leaf name is an external source, whether or not it was declared
/// with `(source name)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProgramFile {
    sources: IndexSet<String>,
    defs: IndexMap<String, Term>,
    sinks: IndexMap<String, Term>,
}

impl ProgramFile {
    pub fn new() -> Self {
        Self::default()
    }

    /// A program with only sinks.
    pub fn from_sinks<I, S>(sinks: I) -> Result<Self, ParseError>
    where
        I: IntoIterator<Item = (S, Term)>,
        S: Into<String>,
    {
        let mut p = ProgramFile::new();
        for (name, t) in sinks {
            p.add_sink(name.into(), t)?;
        }
        Ok(p)
    }

    /// A single sink named `out`.
    pub fn single(t: Term) -> Self {
        let mut p = ProgramFile::new();
        p.sinks.insert("out".into(), t);
        p
    }

    pub fn sources(&self) -> &IndexSet<String> {
        &self.sources
    }

    pub fn defs(&self) -> &IndexMap<String, Term> {
        &self.defs
    }

    pub fn sinks(&self) -> &IndexMap<String, Term> {
        &self.sinks
    }

    pub fn declare_source(&mut self, name: String) -> Result<(), ParseError> {
        self.check_fresh(&name, None)?;
        if self.defs.contains_key(&name) {
            return Err(ParseError::DuplicateName { name });
        }
        self.sources.insert(name);
        Ok(())
    }

    pub fn add_def(&mut self, name: String, body: Term) -> Result<(), ParseError> {
        self.check_fresh(&name, None)?;
        if self.defs.contains_key(&name) || self.sources.contains(&name) {
            return Err(ParseError::DuplicateName { name });
        }
        for r in body.sources() {
            if r == name {
                return Err(ParseError::CyclicReference { name });
            }
        }
        // A def may not be used as a plain source before it is defined.
        let used_before = self
            .defs
            .values()
            .chain(self.sinks.values())
            .any(|t| t.sources().contains(&name.as_str()));
        if used_before {
            return Err(ParseError::ForwardReference { name });
        }
        self.defs.insert(name, body);
        Ok(())
    }

    pub fn add_sink(&mut self, name: String, body: Term) -> Result<(), ParseError> {
        if !is_valid_name(&name) {
            return Err(ParseError::InvalidName {
                pos: sexp::Pos { line: 0, col: 0 },
                name,
            });
        }
        if self.sinks.contains_key(&name) {
            return Err(ParseError::DuplicateName { name });
        }
        self.sinks.insert(name, body);
        Ok(())
    }

    fn check_fresh(&self, name: &str, pos: Option<sexp::Pos>) -> Result<(), ParseError> {
        if is_reserved(name) || !is_valid_name(name) {
            return Err(ParseError::InvalidName {
                pos: pos.unwrap_or(sexp::Pos { line: 0, col: 0 }),
                name: name.to_string(),
            });
        }
        Ok(())
    }

    /// Leaf names that are not defs, in first-occurrence order, including
    /// declared-but-unused sources.
    pub fn external_sources(&self) -> Vec<String> {
        let mut out: IndexSet<String> = self.sources.clone();
        for t in self.defs.values().chain(self.sinks.values()) {
            for s in t.sources() {
                if !self.defs.contains_key(s) {
                    out.insert(s.to_string());
                }
            }
        }
        out.into_iter().collect()
    }

    /// Inlines every def into every sink, duplicating shared pipelines.
    pub fn flatten(&self) -> IndexMap<String, Term> {
        let mut expanded: IndexMap<&str, Term> = IndexMap::new();
        for (name, body) in &self.defs {
            let t = inline_defs(body, &expanded);
            expanded.insert(name, t);
        }
        self.sinks
            .iter()
            .map(|(name, t)| (name.clone(), inline_defs(t, &expanded)))
            .collect()
    }

    /// True when some term uses the given operator.
    pub fn contains_op(&self, op: Op) -> bool {
        self.defs
            .values()
            .chain(self.sinks.values())
            .any(|t| t.contains_op(op))
    }

    pub fn parse(text: &str) -> Result<ProgramFile, ParseError> {
        let forms = sexp::read_all(text)?;
        let mut p = ProgramFile::new();
        for form in &forms {
            p.parse_form(form)?;
        }
        Ok(p)
    }

    fn parse_form(&mut self, form: &Sexp) -> Result<(), ParseError> {
        let malformed = |msg: &str| ParseError::Malformed {
            pos: form.pos,
            msg: msg.to_string(),
        };
        let items = form
            .as_list()
            .ok_or_else(|| malformed("expected `(def ...)`, `(sink ...)` or `(source ...)`"))?;
        let keyword = items.first().and_then(Sexp::as_atom);
        // Sink names live in their own namespace, so operator names are fine.
        let sink = keyword == Some("sink");
        let name_at = |i: usize| -> Result<String, ParseError> {
            let s = items
                .get(i)
                .and_then(Sexp::as_atom)
                .ok_or_else(|| malformed("expected a name"))?;
            if (is_reserved(s) && !sink) || !is_valid_name(s) {
                return Err(ParseError::InvalidName {
                    pos: items[i].pos,
                    name: s.to_string(),
                });
            }
            Ok(s.to_string())
        };
        match keyword {
            Some("source") if items.len() == 2 => self.declare_source(name_at(1)?),
            Some("def") if items.len() == 3 => {
                let name = name_at(1)?;
                let body = Term::from_sexp(&items[2])?;
                self.add_def(name, body)
            }
            Some("sink") if items.len() == 3 => {
                let name = name_at(1)?;
                let body = Term::from_sexp(&items[2])?;
                self.add_sink(name, body)
            }
            Some("source" | "def" | "sink") => Err(malformed("wrong number of arguments")),
            _ => Err(malformed(
                "expected `(def ...)`, `(sink ...)` or `(source ...)`",
            )),
        }
    }
}

fn inline_defs(t: &Term, expanded: &IndexMap<&str, Term>) -> Term {
    t.map_bottom_up(
        &mut |node| match node.source_name().and_then(|n| expanded.get(n)) {
            Some(body) => body.clone(),
            None => node,
        },
    )
}

impl fmt::Display for ProgramFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sources {
            writeln!(f, "(source {s})")?;
        }
        for (name, t) in &self.defs {
            writeln!(f, "(def {name} {t})")?;
        }
        for (name, t) in &self.sinks {
            writeln!(f, "(sink {name} {t})")?;
        }
        Ok(())
    }
}

/// Parses a program file.
pub fn parse_program(text: &str) -> Result<ProgramFile, ParseError> {
    ProgramFile::parse(text)
}

/// Inlines every def, yielding one standalone tree per sink.
pub fn flatten(p: &ProgramFile) -> IndexMap<String, Term> {
    p.flatten()
}

/// Re-forms shared pipelines: every subtree of at least `min_size` nodes
/// that occurs twice or more becomes a def.
///
/// Hoisting runs bottom-up. Each round hoists the smallest repeated
/// subtrees, so a repeat nested inside a larger repeat becomes its own def
/// first and the outer repeat is then counted with references as leaves.
pub fn reform_cse(trees: &IndexMap<String, Term>, min_size: usize) -> ProgramFile {
    assert!(min_size >= 1, "min_size must be positive");
    let mut taken: HashSet<String> = HashSet::new();
    for t in trees.values() {
        for s in t.sources() {
            taken.insert(s.to_string());
        }
    }
    let mut sinks: IndexMap<String, Term> = trees.clone();
    let mut defs: IndexMap<String, Term> = IndexMap::new();
    let mut next = 0usize;

    loop {
        let mut counts: IndexMap<Term, usize> = IndexMap::new();
        for t in sinks.values() {
            count_subtrees(t, true, &defs, min_size, &mut counts);
        }
        for t in defs.values() {
            count_subtrees(t, false, &defs, min_size, &mut counts);
        }
        let repeated: Vec<(&Term, usize)> = counts
            .iter()
            .filter(|(_, &n)| n >= 2)
            .map(|(t, _)| (t, t.size()))
            .collect();
        let Some(smallest) = repeated.iter().map(|(_, s)| *s).min() else {
            break;
        };
        let mut batch: Vec<Term> = repeated
            .iter()
            .filter(|(_, s)| *s == smallest)
            .map(|(t, _)| (*t).clone())
            .collect();
        batch.sort_by_cached_key(|t| t.to_string());

        let mut replacements: IndexMap<Term, Term> = IndexMap::new();
        for t in batch {
            let name = loop {
                let candidate = format!("d{next}");
                next += 1;
                if !taken.contains(&candidate) {
                    break candidate;
                }
            };
            taken.insert(name.clone());
            replacements.insert(t.clone(), Term::source(&name));
            defs.insert(name, t);
        }
        let replace =
            |t: &Term, keep_root: bool| -> Term { replace_subtrees(t, keep_root, &replacements) };
        for t in sinks.values_mut() {
            *t = replace(t, false);
        }
        for (name, body) in defs.iter_mut() {
            let is_new = replacements
                .get(body)
                .is_some_and(|r| r.source_name() == Some(name.as_str()));
            *body = replace(body, is_new);
        }
    }

    ProgramFile {
        sources: IndexSet::new(),
        defs,
        sinks,
    }
}

/// Subtrees that may become a def: large enough, not already a bare def
/// reference, and free of diamond holes whose meaning depends on context.
fn count_subtrees(
    t: &Term,
    count_root: bool,
    defs: &IndexMap<String, Term>,
    min_size: usize,
    counts: &mut IndexMap<Term, usize>,
) {
    for c in t.children() {
        count_subtrees(c, true, defs, min_size, counts);
    }
    if !count_root {
        return;
    }
    let is_ref = t.source_name().is_some_and(|n| defs.contains_key(n));
    let hoistable = !is_ref
        && t.size() >= min_size
        && !t.contains_op(Op::Zipper)
        && !t.contains_op(Op::HoleFirst)
        && !t.contains_op(Op::HoleSecond)
        && !t.contains_op(Op::HoleIn)
        && !t.contains_op(Op::HoleOut);
    if hoistable {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
}

fn replace_subtrees(t: &Term, keep_root: bool, replacements: &IndexMap<Term, Term>) -> Term {
    if !keep_root {
        if let Some(r) = replacements.get(t) {
            return r.clone();
        }
    }
    let children = t
        .children()
        .iter()
        .map(|c| replace_subtrees(c, false, replacements))
        .collect();
    Term::new(t.op(), t.symbol().cloned(), children)
}
