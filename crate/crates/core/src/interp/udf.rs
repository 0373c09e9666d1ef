use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::ir::Value;

pub type MapFn = Arc<dyn Fn(&Value) -> Value + Send + Sync>;
pub type FilterFn = Arc<dyn Fn(&Value) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Udf {
    Map(MapFn),
    Filter(FilterFn),
}

/// Semantics for the opaque function symbols of `map` and `filter`.
#[derive(Clone, Default)]
pub struct UdfRegistry {
    fns: HashMap<String, Udf>,
}

impl fmt::Debug for UdfRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.fns.keys().collect();
        names.sort();
        f.debug_struct("UdfRegistry").field("fns", &names).finish()
    }
}

const SCHOOLS: [&str; 3] = ["berkeley", "stanford", "mit"];

/// Stable FNV-1a hash over the printed value.
pub fn stable_hash(v: &Value) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in v.to_string().bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn school_of(v: &Value) -> Option<&str> {
    match v.as_tuple()?.last()? {
        Value::Sym(s) => Some(s.as_str()),
        _ => None,
    }
}

impl UdfRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_map(
        &mut self,
        name: &str,
        f: impl Fn(&Value) -> Value + Send + Sync + 'static,
    ) {
        self.fns.insert(name.to_string(), Udf::Map(Arc::new(f)));
    }

    pub fn register_filter(
        &mut self,
        name: &str,
        f: impl Fn(&Value) -> bool + Send + Sync + 'static,
    ) {
        self.fns.insert(name.to_string(), Udf::Filter(Arc::new(f)));
    }

    pub fn get(&self, name: &str) -> Option<&Udf> {
        self.fns.get(name)
    }

    /// Functions available to the CLI and the test corpus. All are total on
    /// every value.
    ///
    /// Maps: `f` (fold into 0..3, not injective), `h` (pair with itself),
    /// `inc`, `double`, `key` (first tuple field), `with_school`.
    /// Filters: `p`, `g`, `q` (hash buckets), `even`, `odd`, `berkeley`,
    /// `stanford`.
    pub fn standard() -> Self {
        let mut r = UdfRegistry::new();
        r.register_map("f", |v| match v {
            Value::Int(n) => Value::Int(n.rem_euclid(3)),
            other => Value::Int((stable_hash(other) % 3) as i64),
        });
        r.register_map("h", |v| Value::pair(v.clone(), v.clone()));
        r.register_map("inc", |v| match v {
            Value::Int(n) => Value::Int(n.wrapping_add(1)),
            other => other.clone(),
        });
        r.register_map("double", |v| match v {
            Value::Int(n) => Value::Int(n.wrapping_mul(2)),
            other => Value::pair(other.clone(), other.clone()),
        });
        r.register_map("key", |v| match v.as_tuple() {
            Some([k, ..]) => k.clone(),
            _ => v.clone(),
        });
        r.register_map("with_school", |v| {
            let school = SCHOOLS[(stable_hash(v) % 3) as usize];
            Value::pair(v.clone(), Value::sym(school))
        });
        r.register_filter("p", |v| stable_hash(v).is_multiple_of(2));
        r.register_filter("g", |v| !stable_hash(v).is_multiple_of(3));
        r.register_filter("q", |v| stable_hash(v).is_multiple_of(3));
        r.register_filter("even", |v| match v {
            Value::Int(n) => n % 2 == 0,
            other => stable_hash(other).is_multiple_of(2),
        });
        r.register_filter("odd", |v| match v {
            Value::Int(n) => n % 2 != 0,
            other => !stable_hash(other).is_multiple_of(2),
        });
        r.register_filter("berkeley", |v| school_of(v) == Some("berkeley"));
        r.register_filter("stanford", |v| school_of(v) == Some("stanford"));
        r
    }

    pub fn map_names(&self) -> Vec<&str> {
        self.names(|u| matches!(u, Udf::Map(_)))
    }

    pub fn filter_names(&self) -> Vec<&str> {
        self.names(|u| matches!(u, Udf::Filter(_)))
    }

    fn names(&self, pred: impl Fn(&Udf) -> bool) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .fns
            .iter()
            .filter(|(_, u)| pred(u))
            .map(|(n, _)| n.as_str())
            .collect();
        out.sort_unstable();
        out
    }
}
