//! Generators and oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;

use flowsat::interp::{random_trace, terms_equivalent, UdfRegistry, ValueShape, Verdict};
use flowsat::{Op, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub const SOURCES: [&str; 3] = ["a", "b", "c"];
pub const INT_MAPS: [&str; 4] = ["f", "h", "inc", "double"];
pub const FILTERS: [&str; 5] = ["p", "g", "q", "even", "odd"];

/// Which values the generated terms must handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grammar {
    /// Integers; uses cross, map and filter.
    Ints,
    /// `(tuple key payload)`; uses join, filter and only shape-keeping maps.
    Keyed,
}

impl Grammar {
    pub fn shape(self) -> ValueShape {
        match self {
            Grammar::Ints => ValueShape::Ints,
            Grammar::Keyed => ValueShape::Keyed,
        }
    }
}

/// A random plain term over `SOURCES` of depth at most `depth`.
pub fn gen_term(rng: &mut impl Rng, depth: usize, g: Grammar) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        return Term::source(SOURCES.choose(rng).unwrap());
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Term::unary(Op::Persist, gen_term(rng, d, g)),
        1 => Term::unary(Op::Delta, gen_term(rng, d, g)),
        2 => Term::unary(Op::Old, gen_term(rng, d, g)),
        3 => Term::unary(Op::Prev, gen_term(rng, d, g)),
        4 => Term::binary(Op::Chain, gen_term(rng, d, g), gen_term(rng, d, g)),
        5 => match g {
            Grammar::Ints => Term::binary(Op::Cross, gen_term(rng, d, g), gen_term(rng, d, g)),
            Grammar::Keyed => Term::binary(Op::Join, gen_term(rng, d, g), gen_term(rng, d, g)),
        },
        6 => Term::filter(FILTERS.choose(rng).unwrap(), gen_term(rng, d, g)),
        _ => match g {
            Grammar::Ints => Term::map(INT_MAPS.choose(rng).unwrap(), gen_term(rng, d, g)),
            // `h` pairs a value with itself, so the result is still keyed.
            Grammar::Keyed => Term::map("h", gen_term(rng, d, g)),
        },
    }
}

/// Replaces every `?name` in a rule pattern with its binding.
pub fn fill_pattern(pattern: &str, bindings: &HashMap<String, String>) -> String {
    let mut out = String::new();
    let mut chars = pattern.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '?' {
            out.push(c);
            continue;
        }
        let mut name = String::new();
        while let Some(&n) = chars.peek() {
            if n.is_ascii_alphanumeric() || n == '_' {
                name.push(n);
                chars.next();
            } else {
                break;
            }
        }
        out.push_str(&bindings[&name]);
    }
    out
}

/// Variable names used in a pattern, without the `?`.
pub fn pattern_vars(pattern: &str) -> Vec<String> {
    let mut vars: Vec<String> = pattern
        .split(|c: char| c.is_whitespace() || c == '(' || c == ')')
        .filter_map(|tok| tok.strip_prefix('?'))
        .map(str::to_string)
        .collect();
    vars.sort();
    vars.dedup();
    vars
}

/// Compares two single-sink terms on `count` random traces, seeds
/// `seed..seed+count`. Returns the first failure as text.
pub fn check_terms(
    a: &Term,
    b: &Term,
    count: usize,
    ticks: usize,
    seed: u64,
    shape: ValueShape,
) -> Result<(), String> {
    let udfs = UdfRegistry::standard();
    for i in 0..count as u64 {
        let trace = random_trace(&SOURCES, ticks, seed + i, 3, shape);
        match terms_equivalent(a, b, &trace, &udfs) {
            Ok(Verdict::Equivalent) => {}
            Ok(Verdict::Diverged(d)) => return Err(format!("{a} vs {b}, seed {}: {d}", seed + i)),
            Err(e) => return Err(format!("{a} vs {b}: {e}")),
        }
    }
    Ok(())
}
