//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails unexpectedly.

mod common;

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use flowsat::diamond::{self, diamond_rules};
use flowsat::egraph::{EGraph, ENode, Id, Limits, StopReason};
use flowsat::extract::{term_cost, CostModel, Extractor};
use flowsat::interp::{random_trace, run, UdfRegistry, ValueShape};
use flowsat::ir::reform_cse;
use flowsat::optimize::{optimize_program, random_check, OptimizeConfig};
use flowsat::rules::{self, RuleSet, CORE_LAWS, JOIN_LAWS, UNARY_LAWS};
use flowsat::{parse_term, Op, ProgramFile, Term};
use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_terms, fill_pattern, gen_term, pattern_vars, Grammar, FILTERS, INT_MAPS};

/// Costs are sums of integer or hundredth weights; compared exactly up to
/// float rounding.
const COST_TOL: f64 = 1e-9;
const TWO_WAY_BUDGET: Duration = Duration::from_secs(5);
const THREE_WAY_BUDGET: Duration = Duration::from_secs(30);

const TWO_WAY: &str = "(delta (cross (persist add_member) (persist messages)))";
const TWO_WAY_LISTING: &str = "(chain (cross (old add_member) messages) \
    (chain (cross add_member (old messages)) (cross add_member messages)))";
const THREE_WAY: &str =
    "(delta (cross (persist add_member) (cross (persist messages) (persist platforms))))";
const THREE_WAY_LISTING: &str = "(chain (cross add_member (cross (old messages) (old platforms))) \
    (cross (persist add_member) (chain (cross messages (old platforms)) \
    (cross (persist messages) platforms))))";
const JOIN: &str = "(delta (join (persist a) (persist b)))";
const DIAMOND_INITIAL: &str = "(diamond (persist add_member) \
    (zipper in (map with_school (filter berkeley out))) \
    (zipper (filter stanford (map with_school in)) out) \
    (cross first second))";
const DIAMOND_FINAL: &str = "(diamond (map with_school (persist add_member)) \
    (zipper in out) (zipper in (filter stanford out)) \
    (cross (filter berkeley first) second))";

struct Outcome {
    id: &'static str,
    pass: bool,
    /// A criterion that cannot hold; reported but not fatal.
    known_failure: bool,
    detail: String,
}

fn outcome(id: &'static str, checks: Vec<(String, bool)>) -> Outcome {
    let pass = checks.iter().all(|(_, ok)| *ok);
    let detail = checks
        .iter()
        .map(|(what, ok)| format!("{}{what}", if *ok { "" } else { "NOT " }))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        id,
        pass,
        known_failure: false,
        detail,
    }
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn same_cost(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOL
}

struct Optimized {
    graph: EGraph,
    root: Id,
    term: Term,
    cost: f64,
    stop: StopReason,
    elapsed: Duration,
}

fn optimize(input: &Term, rules: &RuleSet) -> Optimized {
    let start = Instant::now();
    let mut graph = EGraph::new();
    let root = graph.add(input);
    let report = graph.saturate(&rules.rules, &Limits::default());
    let best = Extractor::new(&graph, &CostModel::default())
        .best(root)
        .unwrap();
    Optimized {
        root: graph.find(root),
        graph,
        term: best.term,
        cost: best.cost,
        stop: report.stop_reason,
        elapsed: start.elapsed(),
    }
}

fn traces_agree(
    a: &Term,
    b: &Term,
    count: usize,
    ticks: usize,
    shape: ValueShape,
) -> (String, bool) {
    match check_terms(a, b, count, ticks, 0, shape) {
        Ok(()) => (
            format!("equivalent on {count} traces of {ticks} ticks"),
            true,
        ),
        Err(e) => (format!("equivalent on all traces ({e})"), false),
    }
}

fn in_class(g: &EGraph, root: Id, term: &Term) -> bool {
    g.lookup_term(term).is_some_and(|id| g.find(id) == root)
}

/// Re-associates every chain to the right, to compare terms up to R5.
fn right_assoc(t: &Term) -> Term {
    fn items(t: &Term, out: &mut Vec<Term>) {
        if t.op() == Op::Chain {
            items(t.child(0), out);
            items(t.child(1), out);
        } else {
            out.push(right_assoc(t));
        }
    }
    if t.op() != Op::Chain {
        let kids = t.children().iter().map(right_assoc).collect();
        return Term::new(t.op(), t.symbol().cloned(), kids);
    }
    let mut parts = Vec::new();
    items(t, &mut parts);
    let mut acc = parts.pop().unwrap();
    while let Some(p) = parts.pop() {
        acc = Term::binary(Op::Chain, p, acc);
    }
    acc
}

fn criterion_1() -> Vec<Outcome> {
    let input = t(TWO_WAY);
    let o = optimize(&input, &rules::core_rules());
    let checks = vec![
        (
            format!("zero delta ({})", o.term.count_op(Op::Delta)),
            o.term.count_op(Op::Delta) == 0,
        ),
        (
            format!("zero persist ({})", o.term.count_op(Op::Persist)),
            o.term.count_op(Op::Persist) == 0,
        ),
        (format!("cost {} = 11", o.cost), same_cost(o.cost, 11.0)),
        (
            "term_cost matches class cost".into(),
            same_cost(term_cost(&o.term, &CostModel::default()), o.cost),
        ),
        traces_agree(&input, &o.term, 20, 10, ValueShape::Ints),
        (
            "reference listing in root class".into(),
            in_class(&o.graph, o.root, &t(TWO_WAY_LISTING)),
        ),
        (
            format!("runtime {:?} < {TWO_WAY_BUDGET:?}", o.elapsed),
            o.elapsed < TWO_WAY_BUDGET,
        ),
    ];
    let mut main = outcome("1", checks);
    main.detail = format!("{} -> {}; {}", TWO_WAY, o.term, main.detail);

    // The listing has 13 nodes, so no 11-cost term equals it up to R5.
    let listing = t(TWO_WAY_LISTING);
    let shape_ok = right_assoc(&o.term) == right_assoc(&listing);
    let mut shape = outcome(
        "1-listing",
        vec![(
            format!(
                "extracted term equals the reference listing up to R5 (listing cost {}, extracted {})",
                term_cost(&listing, &CostModel::default()),
                o.cost
            ),
            shape_ok,
        )],
    );
    shape.known_failure = !shape_ok;
    vec![main, shape]
}

fn criterion_2() -> Outcome {
    let input = t(THREE_WAY);
    let o = optimize(&input, &rules::core_rules());
    let listing = t(THREE_WAY_LISTING);
    let listing_cost = term_cost(&listing, &CostModel::default());
    let listing_nodes = term_cost(&listing, &CostModel::node_count());
    let checks = vec![
        (
            format!("zero delta ({})", o.term.count_op(Op::Delta)),
            o.term.count_op(Op::Delta) == 0,
        ),
        (
            format!(
                "cost {} <= listing cost {listing_cost} ({listing_nodes} nodes)",
                o.cost
            ),
            o.cost <= listing_cost + COST_TOL,
        ),
        traces_agree(&input, &o.term, 20, 8, ValueShape::Ints),
        (
            format!("runtime {:?} < {THREE_WAY_BUDGET:?}", o.elapsed),
            o.elapsed < THREE_WAY_BUDGET,
        ),
        (
            format!("stopped by {}", o.stop),
            o.stop != StopReason::TimeLimit,
        ),
    ];
    let mut out = outcome("2", checks);
    out.detail = format!("-> {}; {}", o.term, out.detail);
    out
}

fn criterion_3() -> Outcome {
    let input = t(JOIN);
    let rules = RuleSet::union("core+join", &[rules::core_rules(), rules::join_rules()]);
    let o = optimize(&input, &rules);
    let checks = vec![
        (
            format!("zero delta ({})", o.term.count_op(Op::Delta)),
            o.term.count_op(Op::Delta) == 0,
        ),
        traces_agree(&input, &o.term, 20, 8, ValueShape::Keyed),
    ];
    let mut out = outcome("3", checks);
    out.detail = format!("-> {}; {}", o.term, out.detail);
    out
}

const INSTANTIATIONS: usize = 100;
const TRACES_PER_INSTANCE: usize = 5;
const SOUNDNESS_TICKS: usize = 8;

fn law_soundness(name: &str, lhs: &str, rhs: &str, g: Grammar, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = pattern_vars(lhs);
    for i in 0..INSTANTIATIONS {
        let mut b: HashMap<String, String> = HashMap::new();
        for v in &vars {
            let value = if v == "f" && name.starts_with("U-map") {
                INT_MAPS.choose(&mut rng).unwrap().to_string()
            } else if v == "f" && name.starts_with("U-filter") {
                FILTERS.choose(&mut rng).unwrap().to_string()
            } else {
                gen_term(&mut rng, 2, g).to_string()
            };
            b.insert(v.clone(), value);
        }
        let l = t(&fill_pattern(lhs, &b));
        let r = t(&fill_pattern(rhs, &b));
        let trace_seed = seed * 10_000 + (i * TRACES_PER_INSTANCE) as u64;
        check_terms(
            &l,
            &r,
            TRACES_PER_INSTANCE,
            SOUNDNESS_TICKS,
            trace_seed,
            g.shape(),
        )
        .map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut laws: Vec<(&str, &str, &str, Grammar)> = Vec::new();
    laws.extend(CORE_LAWS.iter().map(|&(n, l, r)| (n, l, r, Grammar::Ints)));
    // R8 through its inductive construction.
    laws.push((
        "R8",
        "(chain (prev (persist ?b)) ?b)",
        "(persist ?b)",
        Grammar::Ints,
    ));
    laws.extend(JOIN_LAWS.iter().map(|&(n, l, r)| (n, l, r, Grammar::Keyed)));
    laws.extend(UNARY_LAWS.iter().map(|&(n, l, r)| (n, l, r, Grammar::Ints)));
    let mut checks = Vec::new();
    for (i, (name, l, r, g)) in laws.iter().enumerate() {
        let res = law_soundness(name, l, r, *g, i as u64 + 1);
        checks.push(match res {
            Ok(()) => (name.to_string(), true),
            Err(e) => (e, false),
        });
    }
    let failures = checks.iter().filter(|(_, ok)| !ok).count();
    let mut out = outcome("4", checks);
    out.detail = format!(
        "{} laws x {INSTANTIATIONS} instantiations x {TRACES_PER_INSTANCE} traces, {failures} failures; {}",
        laws.len(),
        out.detail
    );
    out
}

/// Brute-force congruence closure over explicit terms.
struct Closure {
    terms: Vec<Term>,
    parent: Vec<usize>,
}

impl Closure {
    fn new(terms: Vec<Term>) -> Self {
        let parent = (0..terms.len()).collect();
        Closure { terms, parent }
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a] = b;
        true
    }

    fn index(&self, t: &Term) -> usize {
        self.terms.iter().position(|x| x == t).unwrap()
    }

    fn close(&mut self) {
        loop {
            let mut changed = false;
            for i in 0..self.terms.len() {
                for j in i + 1..self.terms.len() {
                    let (a, b) = (&self.terms[i], &self.terms[j]);
                    let congruent = a.op() == b.op()
                        && a.symbol() == b.symbol()
                        && !a.children().is_empty()
                        && a.children()
                            .iter()
                            .zip(b.children())
                            .all(|(x, y)| self.find(self.index(x)) == self.find(self.index(y)));
                    if congruent && self.union(i, j) {
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
}

fn subterms(t: &Term, out: &mut Vec<Term>) {
    for c in t.children() {
        subterms(c, out);
    }
    if !out.contains(t) {
        out.push(t.clone());
    }
}

const CONGRUENCE_GRAPHS: usize = 200;
const MAX_GRAPH_NODES: usize = 50;

fn congruence_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (roots, terms) = loop {
        let roots: Vec<Term> = (0..rng.gen_range(2..=4))
            .map(|_| gen_term(rng, 3, Grammar::Ints))
            .collect();
        let mut terms = Vec::new();
        for r in &roots {
            subterms(r, &mut terms);
        }
        if terms.len() <= MAX_GRAPH_NODES {
            break (roots, terms);
        }
    };
    let mut g = EGraph::new();
    for r in &roots {
        g.add(r);
    }
    let mut oracle = Closure::new(terms.clone());
    for _ in 0..rng.gen_range(1..=4) {
        let a = terms.choose(rng).unwrap();
        let b = terms.choose(rng).unwrap();
        let (ia, ib) = (g.add(a), g.add(b));
        g.union(ia, ib);
        oracle.union(oracle.index(a), oracle.index(b));
    }
    g.rebuild();
    oracle.close();
    if g.node_count() > MAX_GRAPH_NODES {
        return Err(format!("graph has {} nodes", g.node_count()));
    }
    for (i, a) in terms.iter().enumerate() {
        for (j, b) in terms.iter().enumerate().skip(i + 1) {
            let want = oracle.find(i) == oracle.find(j);
            let got = g.equiv(a, b);
            if want != got {
                return Err(format!("{a} ~ {b}: engine {got}, oracle {want}"));
            }
        }
    }
    // Hashcons: every canonical node appears once and looks up to its class.
    let mut seen: HashSet<ENode> = HashSet::new();
    for class in g.classes() {
        for n in &class.nodes {
            let canon = g.canonicalize(n);
            if !seen.insert(canon.clone()) {
                return Err(format!("duplicate node {canon:?}"));
            }
            if g.lookup(&canon).map(|id| g.find(id)) != Some(class.id) {
                return Err(format!("memo misses {canon:?}"));
            }
        }
    }
    g.check_congruence()
}

/// Minimum cost over all trees of depth at most `depth` rooted in each
/// class, by enumerating every node choice level by level.
fn depth_bounded_min(g: &EGraph, m: &CostModel, depth: usize) -> HashMap<Id, f64> {
    let mut best: HashMap<Id, f64> = HashMap::new();
    for _ in 0..depth {
        let mut next = HashMap::new();
        for class in g.classes() {
            let mut min = f64::INFINITY;
            for n in &class.nodes {
                let mut total = m.weight(n.op);
                for c in &n.children {
                    total += best.get(&g.find(*c)).copied().unwrap_or(f64::INFINITY);
                }
                if n.op == Op::Diamond && !m.diamond_shared_once {
                    total += best
                        .get(&g.find(n.children[0]))
                        .copied()
                        .unwrap_or(f64::INFINITY);
                }
                min = min.min(total);
            }
            if min.is_finite() {
                next.insert(class.id, min);
            }
        }
        best = next;
    }
    best
}

const EXTRACTION_GRAPHS: usize = 200;
const MAX_EXTRACTION_CLASSES: usize = 12;
const ENUMERATION_DEPTH: usize = 8;

fn extraction_case(rng: &mut ChaCha8Rng, all: &RuleSet) -> Option<Result<(), String>> {
    let input = gen_term(rng, 3, Grammar::Ints);
    let picked: Vec<_> = all
        .rules
        .iter()
        .filter(|_| rng.gen_bool(0.4))
        .cloned()
        .collect();
    let mut g = EGraph::new();
    let root = g.add(&input);
    let limits = Limits {
        max_iters: rng.gen_range(1..=4),
        ..Limits::default()
    };
    g.saturate(&picked, &limits);
    if g.class_count() > MAX_EXTRACTION_CLASSES {
        return None;
    }
    let m = if rng.gen_bool(0.5) {
        CostModel::default()
    } else {
        CostModel::node_count()
    };
    let best = match Extractor::new(&g, &m).best(root) {
        Ok(b) => b,
        Err(e) => return Some(Err(format!("{input}: {e}"))),
    };
    let bounded = depth_bounded_min(&g, &m, ENUMERATION_DEPTH);
    let enumerated = bounded[&g.find(root)];
    let check = || {
        if !in_class(&g, g.find(root), &best.term) {
            return Err(format!("{} not in the root class of {input}", best.term));
        }
        if !same_cost(term_cost(&best.term, &m), best.cost) {
            return Err(format!("{}: term cost differs from class cost", best.term));
        }
        if enumerated < best.cost - COST_TOL {
            return Err(format!(
                "{input}: enumeration found {enumerated} < {}",
                best.cost
            ));
        }
        if best.term.depth() <= ENUMERATION_DEPTH && !same_cost(enumerated, best.cost) {
            return Err(format!(
                "{input}: enumeration {enumerated} != {}",
                best.cost
            ));
        }
        Ok(())
    };
    Some(check())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut congruence = Ok(());
    for _ in 0..CONGRUENCE_GRAPHS {
        congruence = congruence_case(&mut rng);
        if congruence.is_err() {
            break;
        }
    }
    let all = RuleSet::union("trees", &[rules::core_rules(), rules::unary_rules()]);
    let mut tested = 0;
    let mut extraction = Ok(());
    while tested < EXTRACTION_GRAPHS {
        if let Some(res) = extraction_case(&mut rng, &all) {
            tested += 1;
            if res.is_err() {
                extraction = res;
                break;
            }
        }
    }
    let show = |name: &str, r: &Result<(), String>| match r {
        Ok(()) => (name.to_string(), true),
        Err(e) => (format!("{name}: {e}"), false),
    };
    outcome(
        "5",
        vec![
            show(
                &format!("congruence and hashcons match brute force on {CONGRUENCE_GRAPHS} graphs"),
                &congruence,
            ),
            show(
                &format!(
                    "extraction optimal on {EXTRACTION_GRAPHS} graphs of <= {MAX_EXTRACTION_CLASSES} classes"
                ),
                &extraction,
            ),
        ],
    )
}

fn criterion_6() -> Outcome {
    let initial = t(DIAMOND_INITIAL);
    let fin = t(DIAMOND_FINAL);
    let mut g = EGraph::new();
    let root = g.add(&initial);
    let report = g.saturate(&diamond_rules().rules, &Limits::default());
    let root = g.find(root);

    let flat = diamond::desugar(&initial).unwrap();
    let program = |t: &Term| ProgramFile::single(t.clone());
    let udfs = UdfRegistry::standard();
    let mut agree = true;
    for seed in 0..10 {
        let trace = random_trace(&["add_member"], 8, seed, 3, ValueShape::Ints);
        let outs: Vec<_> = [&initial, &fin, &flat]
            .iter()
            .map(|t| run(&program(t), &trace, &udfs).unwrap().sorted_dump())
            .collect();
        agree &= outs.iter().all(|o| *o == outs[0]);
    }

    let m = CostModel::default();
    let (hoisted, flattened) = (term_cost(&fin, &m), term_cost(&flat, &m));
    outcome(
        "6",
        vec![
            (
                format!(
                    "final listing in root class ({} iterations, {})",
                    report.iterations, report.stop_reason
                ),
                in_class(&g, root, &fin),
            ),
            ("desugared outputs match on 10 traces".into(), agree),
            (
                format!("hoisted cost {hoisted} < flattened cost {flattened}"),
                hoisted < flattened,
            ),
        ],
    )
}

const GENERATED_PROGRAMS: usize = 50;

/// A program whose sinks share defs, so flattening duplicates subtrees.
fn gen_program(rng: &mut ChaCha8Rng) -> ProgramFile {
    fn with_refs(rng: &mut ChaCha8Rng, depth: usize, defs: &[String]) -> Term {
        if depth == 0 || rng.gen_bool(0.25) {
            return if rng.gen_bool(0.6) {
                Term::source(defs.choose(rng).unwrap())
            } else {
                gen_term(rng, 1, Grammar::Ints)
            };
        }
        let d = depth - 1;
        match rng.gen_range(0..5) {
            0 => Term::unary(Op::Delta, with_refs(rng, d, defs)),
            1 => Term::unary(Op::Persist, with_refs(rng, d, defs)),
            2 => Term::binary(Op::Cross, with_refs(rng, d, defs), with_refs(rng, d, defs)),
            3 => Term::binary(Op::Chain, with_refs(rng, d, defs), with_refs(rng, d, defs)),
            _ => Term::filter(FILTERS.choose(rng).unwrap(), with_refs(rng, d, defs)),
        }
    }
    let mut p = ProgramFile::new();
    let defs: Vec<String> = (0..rng.gen_range(1..=2)).map(|i| format!("s{i}")).collect();
    for name in &defs {
        let body = loop {
            let b = gen_term(rng, 2, Grammar::Ints);
            if b.size() >= 2 {
                break b;
            }
        };
        p.add_def(name.clone(), body).unwrap();
    }
    for i in 0..rng.gen_range(2..=3) {
        p.add_sink(format!("o{i}"), with_refs(rng, 2, &defs))
            .unwrap();
    }
    p
}

/// Every subtree of at least `min_size` nodes that occurs twice across the
/// trees, counting nested occurrences.
fn repeated_subtrees(trees: &IndexMap<String, Term>, min_size: usize) -> Vec<Term> {
    fn walk(t: &Term, counts: &mut HashMap<Term, usize>) {
        *counts.entry(t.clone()).or_insert(0) += 1;
        for c in t.children() {
            walk(c, counts);
        }
    }
    let mut counts = HashMap::new();
    for t in trees.values() {
        walk(t, &mut counts);
    }
    counts
        .into_iter()
        .filter(|(t, n)| *n >= 2 && t.size() >= min_size)
        .map(|(t, _)| t)
        .collect()
}

fn round_trip_case(rng: &mut ChaCha8Rng, seed: u64) -> Result<(), String> {
    let input = gen_program(rng);
    let cfg = OptimizeConfig::default();
    let o = optimize_program(&input, &cfg).map_err(|e| e.to_string())?;
    let optimized: IndexMap<String, Term> = o
        .sinks
        .iter()
        .map(|(n, s)| (n.clone(), s.after.clone()))
        .collect();
    let reformed = reform_cse(&optimized, cfg.cse_min_size);
    if reformed.flatten() != optimized {
        return Err(format!("re-flattening changed the trees of\n{input}"));
    }
    let verdicts = random_check(&input, &reformed, 5, 8, seed, 3, &UdfRegistry::standard())
        .map_err(|e| e.to_string())?;
    if let Some(d) = verdicts.iter().find_map(|v| v.divergence()) {
        return Err(format!("{input}\nvs\n{reformed}\n{d}"));
    }
    let hoisted: Vec<Term> = reformed
        .defs()
        .keys()
        .map(|name| {
            let mut only = ProgramFile::new();
            for (n, body) in reformed.defs() {
                only.add_def(n.clone(), body.clone()).unwrap();
            }
            only.add_sink("x".into(), Term::source(name)).unwrap();
            only.flatten()["x"].clone()
        })
        .collect();
    for s in repeated_subtrees(&optimized, cfg.cse_min_size) {
        if !hoisted.contains(&s) {
            return Err(format!("repeated {s} not hoisted in\n{reformed}"));
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut result = Ok(());
    for i in 0..GENERATED_PROGRAMS {
        result = round_trip_case(&mut rng, i as u64);
        if result.is_err() {
            break;
        }
    }
    let what =
        format!("{GENERATED_PROGRAMS} programs re-flatten equivalently with every repeat hoisted");
    outcome(
        "7",
        vec![match result {
            Ok(()) => (what, true),
            Err(e) => (format!("{what}: {e}"), false),
        }],
    )
}

fn main() {
    let criteria: [fn() -> Vec<Outcome>; 7] = [
        criterion_1,
        || vec![criterion_2()],
        || vec![criterion_3()],
        || vec![criterion_4()],
        || vec![criterion_5()],
        || vec![criterion_6()],
        || vec![criterion_7()],
    ];
    let mut unexpected = 0;
    for run_criterion in criteria {
        for o in run_criterion() {
            let status = match (o.pass, o.known_failure) {
                (true, _) => "PASS",
                (false, true) => "FAIL (expected)",
                (false, false) => {
                    unexpected += 1;
                    "FAIL"
                }
            };
            println!("criterion {}: {status}: {}", o.id, o.detail);
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
