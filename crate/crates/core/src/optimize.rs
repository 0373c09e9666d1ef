//! The end-to-end pipeline: flatten, saturate, extract, re-form shared
//! subterms, and optionally check the result on random traces.

use indexmap::IndexMap;

use crate::egraph::{EGraph, Limits, SaturationReport, StopReason};
use crate::extract::{term_cost, CostModel, ExtractError, Extractor};
use crate::interp::{
    equivalent, random_trace, shape_for, EquivError, Mode, UdfRegistry, ValueShape, Verdict,
};
use crate::ir::{reform_cse, ProgramFile, Term};
use crate::rules::{self, RuleSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown rule set `{0}` (expected core, join, unary, diamond, all or none)")]
    UnknownRuleSet(String),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub rule_sets: Vec<String>,
    pub limits: Limits,
    pub cost: CostModel,
    pub cse_min_size: usize,
    /// Random traces to check the result on; 0 disables the check.
    pub check_traces: usize,
    pub ticks: usize,
    pub seed: u64,
    pub batch_max: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            rule_sets: vec!["core".to_string()],
            limits: Limits::default(),
            cost: CostModel::default(),
            cse_min_size: 2,
            check_traces: 0,
            ticks: 10,
            seed: 0,
            batch_max: 3,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.limits;
        if l.max_iters == 0 {
            return Err(ConfigError::NonPositive("max-iters"));
        }
        if l.max_nodes == 0 {
            return Err(ConfigError::NonPositive("max-nodes"));
        }
        if l.max_millis == 0 {
            return Err(ConfigError::NonPositive("max-millis"));
        }
        if self.ticks == 0 {
            return Err(ConfigError::NonPositive("ticks"));
        }
        if self.cse_min_size == 0 {
            return Err(ConfigError::NonPositive("cse-min-size"));
        }
        Ok(())
    }

    /// The union of the named rule sets.
    pub fn rules(&self) -> Result<RuleSet, ConfigError> {
        let sets = self
            .rule_sets
            .iter()
            .map(|n| rules::by_name(n).ok_or_else(|| ConfigError::UnknownRuleSet(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RuleSet::union(&self.rule_sets.join("+"), &sets))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkResult {
    pub before: Term,
    pub after: Term,
    pub cost_before: f64,
    pub cost_after: f64,
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub program: ProgramFile,
    pub sinks: IndexMap<String, SinkResult>,
    pub report: SaturationReport,
}

impl Optimized {
    pub fn hit_limit(&self) -> bool {
        self.report.stop_reason != StopReason::Saturated
    }

    pub fn cost_before(&self) -> f64 {
        self.sinks.values().map(|s| s.cost_before).sum()
    }

    pub fn cost_after(&self) -> f64 {
        self.sinks.values().map(|s| s.cost_after).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("sink `{sink}`: {source}")]
    Extract { sink: String, source: ExtractError },
}

/// Saturates every flattened sink in one shared e-graph and extracts each
/// root. Sharing the graph keeps the choice for a common subterm identical
/// across sinks, which is what lets `reform_cse` find it again.
pub fn optimize_trees(
    trees: &IndexMap<String, Term>,
    rules: &RuleSet,
    limits: &Limits,
    cost: &CostModel,
) -> Result<(IndexMap<String, SinkResult>, SaturationReport), OptimizeError> {
    let mut g = EGraph::new();
    let roots: Vec<_> = trees.values().map(|t| g.add(t)).collect();
    let report = g.saturate(&rules.rules, limits);
    let mut ex = Extractor::new(&g, cost);
    let mut out = IndexMap::new();
    for ((name, before), root) in trees.iter().zip(roots) {
        let best = ex.best(root).map_err(|source| OptimizeError::Extract {
            sink: name.clone(),
            source,
        })?;
        out.insert(
            name.clone(),
            SinkResult {
                before: before.clone(),
                cost_before: term_cost(before, cost),
                after: best.term,
                cost_after: best.cost,
            },
        );
    }
    Ok((out, report))
}

/// Optimizes a single term; returns the extracted term and its cost.
pub fn optimize_term(
    t: &Term,
    rules: &RuleSet,
    limits: &Limits,
    cost: &CostModel,
) -> Result<(SinkResult, SaturationReport), OptimizeError> {
    let trees = IndexMap::from([("out".to_string(), t.clone())]);
    let (mut sinks, report) = optimize_trees(&trees, rules, limits, cost)?;
    Ok((sinks.swap_remove("out").expect("one sink"), report))
}

/// flatten → saturate → extract → reform_cse.
pub fn optimize_program(p: &ProgramFile, cfg: &OptimizeConfig) -> Result<Optimized, OptimizeError> {
    cfg.validate()?;
    let rules = cfg.rules()?;
    let (sinks, report) = optimize_trees(&p.flatten(), &rules, &cfg.limits, &cfg.cost)?;
    let trees: IndexMap<String, Term> = sinks
        .iter()
        .map(|(n, s)| (n.clone(), s.after.clone()))
        .collect();
    let mut program = reform_cse(&trees, cfg.cse_min_size);
    for s in p.sources() {
        if !program.sources().contains(s) {
            program
                .declare_source(s.clone())
                .expect("source names were valid in the input");
        }
    }
    Ok(Optimized {
        program,
        sinks,
        report,
    })
}

/// Runs both programs on `count` random traces with seeds `seed..seed+count`
/// and returns one verdict per trace, in seed order.
pub fn random_check(
    a: &ProgramFile,
    b: &ProgramFile,
    count: usize,
    ticks: usize,
    seed: u64,
    batch_max: usize,
    udfs: &UdfRegistry,
) -> Result<Vec<Verdict>, EquivError> {
    let mut sources = a.external_sources();
    for s in b.external_sources() {
        if !sources.contains(&s) {
            sources.push(s);
        }
    }
    let names: Vec<&str> = sources.iter().map(String::as_str).collect();
    let shape = match (shape_for(a), shape_for(b)) {
        (ValueShape::Ints, ValueShape::Ints) => ValueShape::Ints,
        _ => ValueShape::Keyed,
    };
    (0..count as u64)
        .map(|i| {
            let trace = random_trace(&names, ticks, seed.wrapping_add(i), batch_max, shape);
            equivalent(a, b, &trace, udfs, Mode::Multiset)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_program, parse_term, Op};

    #[test]
    fn already_optimal_is_unchanged() {
        let t = parse_term("(chain a b)").unwrap();
        let (r, _) = optimize_term(
            &t,
            &rules::core_rules(),
            &Limits::default(),
            &CostModel::default(),
        )
        .unwrap();
        assert_eq!(r.after, t);
        assert_eq!(r.cost_after, r.cost_before);
    }

    #[test]
    fn r1_collapses() {
        let t = parse_term("(delta (persist a))").unwrap();
        let (r, _) = optimize_term(
            &t,
            &rules::core_rules(),
            &Limits::default(),
            &CostModel::default(),
        )
        .unwrap();
        assert_eq!(r.after, parse_term("a").unwrap());
    }

    #[test]
    fn program_pipeline_keeps_sinks_and_sources() {
        let p = parse_program(
            "(source unused)\n(def s (persist a))\n(sink x (delta s))\n(sink y (cross s b))",
        )
        .unwrap();
        let cfg = OptimizeConfig::default();
        let o = optimize_program(&p, &cfg).unwrap();
        assert_eq!(o.program.sinks().keys().collect::<Vec<_>>(), vec!["x", "y"]);
        assert!(o.program.sources().contains("unused"));
        assert!(!o.program.contains_op(Op::Delta));
        let verdicts = random_check(&p, &o.program, 5, 6, 1, 3, &UdfRegistry::standard()).unwrap();
        assert!(verdicts.iter().all(Verdict::is_equivalent));
    }

    #[test]
    fn bad_config_is_rejected() {
        let p = parse_program("(sink o a)").unwrap();
        let cfg = OptimizeConfig {
            rule_sets: vec!["nope".into()],
            ..OptimizeConfig::default()
        };
        assert!(matches!(
            optimize_program(&p, &cfg),
            Err(OptimizeError::Config(ConfigError::UnknownRuleSet(_)))
        ));
        let mut cfg = OptimizeConfig::default();
        cfg.limits.max_iters = 0;
        assert!(optimize_program(&p, &cfg).is_err());
    }
}
