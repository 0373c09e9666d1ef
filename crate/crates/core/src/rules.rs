//! Rewrite catalogs.
//!
//! Bidirectional laws are registered as two directed rewrites named
//! `<law>=>` and `<law><=`. The incrementalization rule `R8` is directed and
//! conditional: it fires on `(chain (prev ?a) ?b)` only when the matched
//! class is the class bound to `?a`, i.e. the chain feeds its own previous
//! tick.

use std::sync::Arc;

use crate::egraph::{Condition, Rewrite};

#[derive(Debug, Clone)]
pub struct RuleSet {
    pub name: String,
    pub rules: Vec<Rewrite>,
}

impl RuleSet {
    pub fn new(name: &str, rules: Vec<Rewrite>) -> RuleSet {
        let set = RuleSet {
            name: name.to_string(),
            rules,
        };
        let mut names: Vec<&str> = set.rules.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(before, names.len(), "duplicate rule names in `{name}`");
        set
    }

    /// Concatenates sets, keeping the first occurrence of each rule name.
    pub fn union(name: &str, sets: &[RuleSet]) -> RuleSet {
        let mut rules: Vec<Rewrite> = Vec::new();
        for set in sets {
            for r in &set.rules {
                if !rules.iter().any(|x| x.name == r.name) {
                    rules.push(r.clone());
                }
            }
        }
        RuleSet::new(name, rules)
    }

    pub fn get(&self, name: &str) -> Option<&Rewrite> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.rules.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Only the rules whose names start with one of `prefixes`.
    pub fn only(&self, prefixes: &[&str]) -> RuleSet {
        let rules = self
            .rules
            .iter()
            .filter(|r| prefixes.iter().any(|p| r.name.starts_with(p)))
            .cloned()
            .collect();
        RuleSet::new(&self.name, rules)
    }
}

fn bi(name: &str, lhs: &str, rhs: &str) -> [Rewrite; 2] {
    Rewrite::bidirectional(name, lhs, rhs).expect("static rule parses")
}

/// Bidirectional laws as `(name, lhs, rhs)`.
pub const CORE_LAWS: [(&str, &str, &str); 7] = [
    ("R1", "(delta (persist ?a))", "?a"),
    ("R2", "(persist ?a)", "(chain (old ?a) ?a)"),
    (
        "R3",
        "(cross (chain ?a ?b) ?c)",
        "(chain (cross ?a ?c) (cross ?b ?c))",
    ),
    (
        "R4",
        "(cross ?a (chain ?b ?c))",
        "(chain (cross ?a ?b) (cross ?a ?c))",
    ),
    ("R5", "(chain (chain ?a ?b) ?c)", "(chain ?a (chain ?b ?c))"),
    ("R6", "(old ?a)", "(prev (persist ?a))"),
    ("R7", "(cross (prev ?a) (prev ?b))", "(prev (cross ?a ?b))"),
];

pub const R8_LHS: &str = "(chain (prev ?a) ?b)";
pub const R8_RHS: &str = "(persist ?b)";

pub const JOIN_LAWS: [(&str, &str, &str); 3] = [
    (
        "R3j",
        "(join (chain ?a ?b) ?c)",
        "(chain (join ?a ?c) (join ?b ?c))",
    ),
    (
        "R4j",
        "(join ?a (chain ?b ?c))",
        "(chain (join ?a ?b) (join ?a ?c))",
    ),
    ("R7j", "(join (prev ?a) (prev ?b))", "(prev (join ?a ?b))"),
];

pub const UNARY_LAWS: [(&str, &str, &str); 4] = [
    (
        "U-map-chain",
        "(map ?f (chain ?a ?b))",
        "(chain (map ?f ?a) (map ?f ?b))",
    ),
    (
        "U-filter-chain",
        "(filter ?f (chain ?a ?b))",
        "(chain (filter ?f ?a) (filter ?f ?b))",
    ),
    ("U-map-prev", "(map ?f (prev ?a))", "(prev (map ?f ?a))"),
    (
        "U-filter-prev",
        "(filter ?f (prev ?a))",
        "(prev (filter ?f ?a))",
    ),
];

/// The R8 condition: the chain's class equals the class inside `prev`.
pub fn feeds_itself() -> Condition {
    let lhs = crate::egraph::Pattern::parse(R8_LHS).expect("static pattern");
    let a = lhs.var("a").expect("R8 binds ?a");
    Arc::new(move |g, class, subst| {
        subst
            .get(a)
            .is_some_and(|bound| g.find(bound) == g.find(class))
    })
}

/// R8 with an arbitrary condition, for testing the guard.
pub fn r8_with(condition: Condition) -> Rewrite {
    Rewrite::new("R8", R8_LHS, R8_RHS)
        .expect("static rule parses")
        .with_condition(condition)
}

pub fn r8() -> Rewrite {
    r8_with(feeds_itself())
}

/// R1–R7 in both directions plus the conditional R8.
pub fn core_rules() -> RuleSet {
    let mut rules: Vec<Rewrite> = CORE_LAWS.iter().flat_map(|(n, l, r)| bi(n, l, r)).collect();
    rules.push(r8());
    RuleSet::new("core", rules)
}

/// Join distributes over chain on either side and commutes with `prev`.
pub fn join_rules() -> RuleSet {
    let rules = JOIN_LAWS.iter().flat_map(|(n, l, r)| bi(n, l, r)).collect();
    RuleSet::new("join", rules)
}

/// `map` and `filter` distribute over chain and commute with `prev`.
pub fn unary_rules() -> RuleSet {
    let rules = UNARY_LAWS
        .iter()
        .flat_map(|(n, l, r)| bi(n, l, r))
        .collect();
    RuleSet::new("unary", rules)
}

/// Every set that works on plain trees.
pub fn all_rules() -> RuleSet {
    RuleSet::union(
        "all",
        &[
            core_rules(),
            join_rules(),
            unary_rules(),
            crate::diamond::diamond_rules(),
        ],
    )
}

/// Resolves a CLI rule-set name.
pub fn by_name(name: &str) -> Option<RuleSet> {
    match name {
        "core" => Some(core_rules()),
        "join" => Some(join_rules()),
        "unary" => Some(unary_rules()),
        "diamond" => Some(crate::diamond::diamond_rules()),
        "all" => Some(all_rules()),
        "none" => Some(RuleSet::new("none", vec![])),
        _ => None,
    }
}
