use std::fmt;
use std::sync::Arc;

use super::{EGraph, Id, Pattern, PatternError, Subst};

/// A predicate over a match: the graph, the matched class and the bindings.
/// It must not mutate the graph.
pub type Condition = Arc<dyn Fn(&EGraph, Id, &Subst) -> bool + Send + Sync>;

/// Builds new terms for a match and returns the classes to union with it.
pub type CustomApplier = Arc<dyn Fn(&mut EGraph, Id, &Subst) -> Vec<Id> + Send + Sync>;

#[derive(Clone)]
pub enum Applier {
    Pattern(Pattern),
    Custom(CustomApplier),
}

#[derive(Clone)]
pub struct Rewrite {
    pub name: String,
    pub lhs: Pattern,
    pub applier: Applier,
    pub condition: Option<Condition>,
    /// Rewrites sharing a group apply at most once per matched class per
    /// iteration.
    pub rate_group: Option<String>,
}

impl Rewrite {
    /// A directed rewrite from pattern strings.
    pub fn new(name: &str, lhs: &str, rhs: &str) -> Result<Rewrite, PatternError> {
        let lhs = Pattern::parse(lhs)?;
        let rhs = Pattern::parse_rhs(rhs, &lhs)?;
        Ok(Rewrite {
            name: name.to_string(),
            lhs,
            applier: Applier::Pattern(rhs),
            condition: None,
            rate_group: None,
        })
    }

    /// Both directions, named `<name>=>` and `<name><=`.
    pub fn bidirectional(name: &str, lhs: &str, rhs: &str) -> Result<[Rewrite; 2], PatternError> {
        Ok([
            Rewrite::new(&format!("{name}=>"), lhs, rhs)?,
            Rewrite::new(&format!("{name}<="), rhs, lhs)?,
        ])
    }

    pub fn custom(name: &str, lhs: &str, applier: CustomApplier) -> Result<Rewrite, PatternError> {
        Ok(Rewrite {
            name: name.to_string(),
            lhs: Pattern::parse(lhs)?,
            applier: Applier::Custom(applier),
            condition: None,
            rate_group: None,
        })
    }

    pub fn with_condition(mut self, condition: Condition) -> Rewrite {
        self.condition = Some(condition);
        self
    }

    pub fn rate_limited(mut self, group: &str) -> Rewrite {
        self.rate_group = Some(group.to_string());
        self
    }

    pub fn rhs_pattern(&self) -> Option<&Pattern> {
        match &self.applier {
            Applier::Pattern(p) => Some(p),
            Applier::Custom(_) => None,
        }
    }

    /// Instantiates the right-hand side for one match.
    pub fn apply(&self, g: &mut EGraph, class: Id, subst: &Subst) -> Vec<Id> {
        match &self.applier {
            Applier::Pattern(p) => vec![p.instantiate(g, subst)],
            Applier::Custom(f) => f(g, class, subst),
        }
    }

    pub fn check(&self, g: &EGraph, class: Id, subst: &Subst) -> bool {
        self.condition.as_ref().is_none_or(|c| c(g, class, subst))
    }
}

impl fmt::Debug for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = match &self.applier {
            Applier::Pattern(p) => p.to_string(),
            Applier::Custom(_) => "<custom>".to_string(),
        };
        write!(f, "{}: {} => {}", self.name, self.lhs, rhs)?;
        if self.condition.is_some() {
            f.write_str(" if <condition>")?;
        }
        Ok(())
    }
}
