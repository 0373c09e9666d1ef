use std::collections::HashSet;
use std::fmt;
use std::time::{Duration, Instant};

use indexmap::IndexMap;

use crate::ir::Term;

use super::{Applier, EGraph, Id, Rewrite};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_iters: usize,
    pub max_nodes: usize,
    pub max_millis: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iters: 16,
            max_nodes: 50_000,
            max_millis: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Saturated,
    IterationLimit,
    NodeLimit,
    TimeLimit,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Saturated => "saturated",
            StopReason::IterationLimit => "iteration-limit",
            StopReason::NodeLimit => "node-limit",
            StopReason::TimeLimit => "time-limit",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationStats {
    pub nodes: usize,
    pub classes: usize,
    /// Effective applications in this iteration.
    pub applied: usize,
}

/// One effective rule application, recorded when logging is on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub rule: String,
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationReport {
    pub iterations: usize,
    pub nodes: usize,
    pub classes: usize,
    pub stop_reason: StopReason,
    /// Cumulative effective applications per rule, in rule order.
    pub rule_counts: IndexMap<String, usize>,
    pub history: Vec<IterationStats>,
    pub applications: Vec<Application>,
    pub elapsed: Duration,
}

impl SaturationReport {
    pub fn count(&self, rule: &str) -> usize {
        self.rule_counts.get(rule).copied().unwrap_or(0)
    }

    /// Sum over all rules whose name starts with `prefix`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.rule_counts
            .iter()
            .filter(|(n, _)| n.starts_with(prefix))
            .map(|(_, c)| c)
            .sum()
    }
}

impl fmt::Display for SaturationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "iterations={}", self.iterations)?;
        writeln!(f, "enodes={}", self.nodes)?;
        writeln!(f, "eclasses={}", self.classes)?;
        writeln!(f, "stop_reason={}", self.stop_reason)?;
        writeln!(f, "elapsed_ms={}", self.elapsed.as_millis())?;
        for (rule, n) in &self.rule_counts {
            writeln!(f, "rule.{rule}={n}")?;
        }
        Ok(())
    }
}

impl EGraph {
    /// Runs rules to a fixpoint or until a limit is hit.
    pub fn saturate(&mut self, rules: &[Rewrite], limits: &Limits) -> SaturationReport {
        self.run_rules(rules, limits, false)
    }

    /// Like [`saturate`](Self::saturate), also recording a representative
    /// term pair for every effective application.
    pub fn saturate_logged(&mut self, rules: &[Rewrite], limits: &Limits) -> SaturationReport {
        self.run_rules(rules, limits, true)
    }

    fn run_rules(&mut self, rules: &[Rewrite], limits: &Limits, log: bool) -> SaturationReport {
        assert!(
            limits.max_iters > 0 && limits.max_nodes > 0 && limits.max_millis > 0,
            "limits must be positive"
        );
        let start = Instant::now();
        let deadline = Duration::from_millis(limits.max_millis);
        let mut report = SaturationReport {
            iterations: 0,
            nodes: 0,
            classes: 0,
            stop_reason: StopReason::IterationLimit,
            rule_counts: rules.iter().map(|r| (r.name.clone(), 0)).collect(),
            history: Vec::new(),
            applications: Vec::new(),
            elapsed: Duration::ZERO,
        };
        self.rebuild();

        'outer: for _ in 0..limits.max_iters {
            report.iterations += 1;

            // Search against the rebuilt graph; conditions see canonical ids.
            let mut matches = Vec::new();
            for rule in rules {
                for (class, subst) in rule.lhs.search(self) {
                    if rule.check(self, class, &subst) {
                        matches.push((rule, class, subst));
                    }
                }
                if start.elapsed() > deadline {
                    report.stop_reason = StopReason::TimeLimit;
                    break 'outer;
                }
            }

            let mut applied = 0;
            let mut limited: HashSet<(&str, Id)> = HashSet::new();
            let mut stop = None;
            for (rule, class, subst) in &matches {
                if let Some(group) = &rule.rate_group {
                    if limited.contains(&(group.as_str(), self.find(*class))) {
                        continue;
                    }
                }
                let lhs_term = log.then(|| {
                    rule.lhs.instantiate_term(subst, &mut |id| {
                        self.smallest_term(id).expect("extractable")
                    })
                });
                let ids = rule.apply(self, *class, subst);
                for id in ids {
                    let rhs_term = log.then(|| match &rule.applier {
                        Applier::Pattern(p) => p.instantiate_term(subst, &mut |id| {
                            self.smallest_term(id).expect("extractable")
                        }),
                        Applier::Custom(_) => self.smallest_term(id).expect("extractable"),
                    });
                    let (root, changed) = self.union_report(*class, id);
                    if !changed {
                        continue;
                    }
                    applied += 1;
                    *report.rule_counts.get_mut(&rule.name).unwrap() += 1;
                    if let Some(group) = &rule.rate_group {
                        limited.insert((group.as_str(), root));
                        limited.insert((group.as_str(), self.find(*class)));
                    }
                    if let (Some(lhs), Some(rhs)) = (&lhs_term, rhs_term) {
                        report.applications.push(Application {
                            rule: rule.name.clone(),
                            lhs: lhs.clone(),
                            rhs,
                        });
                    }
                }
                if self.id_count() > limits.max_nodes {
                    stop = Some(StopReason::NodeLimit);
                    break;
                }
                if start.elapsed() > deadline {
                    stop = Some(StopReason::TimeLimit);
                    break;
                }
            }
            self.rebuild();
            report.history.push(IterationStats {
                nodes: self.node_count(),
                classes: self.class_count(),
                applied,
            });
            if let Some(reason) = stop {
                report.stop_reason = reason;
                break;
            }
            if applied == 0 {
                report.stop_reason = StopReason::Saturated;
                break;
            }
            if self.node_count() > limits.max_nodes {
                report.stop_reason = StopReason::NodeLimit;
                break;
            }
        }
        self.rebuild();
        report.nodes = self.node_count();
        report.classes = self.class_count();
        report.elapsed = start.elapsed();
        report
    }

    /// Ids ever allocated; an upper bound on the live node count.
    fn id_count(&self) -> usize {
        self.parent.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn empty_rules_saturate_immediately() {
        let mut g = EGraph::new();
        g.add(&t("(delta (persist a))"));
        let before = g.dump();
        let r = g.saturate(&[], &Limits::default());
        assert_eq!(r.iterations, 1);
        assert_eq!(r.stop_reason, StopReason::Saturated);
        assert_eq!(g.dump(), before);
    }

    #[test]
    fn single_rule_merges_root() {
        let mut g = EGraph::new();
        let root = g.add(&t("(delta (persist a))"));
        let rule = Rewrite::new("R1=>", "(delta (persist ?a))", "?a").unwrap();
        let r = g.saturate(&[rule], &Limits::default());
        assert_eq!(g.find(root), g.find(g.lookup_term(&t("a")).unwrap()));
        assert_eq!(r.count("R1=>"), 1);
        assert_eq!(r.stop_reason, StopReason::Saturated);
    }

    #[test]
    fn associativity_enumerates_all_shapes() {
        let mut g = EGraph::new();
        let root = g.add(&t("(chain (chain (chain a b) c) d)"));
        let rules =
            Rewrite::bidirectional("R5", "(chain (chain ?a ?b) ?c)", "(chain ?a (chain ?b ?c))")
                .unwrap();
        let r = g.saturate(&rules, &Limits::default());
        assert_eq!(r.stop_reason, StopReason::Saturated);
        for shape in [
            "(chain (chain (chain a b) c) d)",
            "(chain (chain a (chain b c)) d)",
            "(chain (chain a b) (chain c d))",
            "(chain a (chain (chain b c) d))",
            "(chain a (chain b (chain c d)))",
        ] {
            assert_eq!(
                g.lookup_term(&t(shape)).map(|id| g.find(id)),
                Some(g.find(root)),
                "{shape}"
            );
        }
    }

    #[test]
    fn node_limit_stops() {
        let mut g = EGraph::new();
        g.add(&t("(chain (chain (chain (chain (chain a b) c) d) e) f)"));
        let rules =
            Rewrite::bidirectional("R5", "(chain (chain ?a ?b) ?c)", "(chain ?a (chain ?b ?c))")
                .unwrap();
        let limits = Limits {
            max_nodes: 20,
            ..Limits::default()
        };
        let r = g.saturate(&rules, &limits);
        assert_eq!(r.stop_reason, StopReason::NodeLimit);
    }

    #[test]
    fn iteration_limit_stops() {
        let mut g = EGraph::new();
        g.add(&t("(persist a)"));
        // Every class gains a fresh `(persist x)` child class, forever.
        let rules = [Rewrite::new("grow", "?a", "(delta (persist ?a))").unwrap()];
        let limits = Limits {
            max_iters: 3,
            ..Limits::default()
        };
        let r = g.saturate(&rules, &limits);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.stop_reason, StopReason::IterationLimit);
    }

    #[test]
    fn report_lines() {
        let mut g = EGraph::new();
        g.add(&t("a"));
        let r = g.saturate(&[], &Limits::default());
        let text = r.to_string();
        assert!(text.contains("iterations=1\n"));
        assert!(text.contains("stop_reason=saturated\n"));
    }
}
