use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{is_valid_name, ParseError, Value};
use crate::sexp::{self, Sexp};

/// The values one source delivers in one tick, in delivery order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Batch(pub Vec<Value>);

impl Batch {
    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Multiset view of a sequence of values.
pub fn multiset(values: &[Value]) -> HashMap<&Value, usize> {
    let mut m = HashMap::new();
    for v in values {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}

/// Input batches per tick. Tick `i` (1-based) is `ticks[i - 1]`; a source
/// missing from a tick delivers an empty batch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TickTrace {
    pub ticks: Vec<IndexMap<String, Batch>>,
}

impl TickTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Appends a tick given as `(source, values)` pairs.
    pub fn push_tick<I, S>(&mut self, batches: I)
    where
        I: IntoIterator<Item = (S, Vec<Value>)>,
        S: Into<String>,
    {
        self.ticks.push(
            batches
                .into_iter()
                .map(|(s, vs)| (s.into(), Batch(vs)))
                .collect(),
        );
    }

    /// Values delivered by `source` at 0-based tick index `t`.
    pub fn batch(&self, t: usize, source: &str) -> &[Value] {
        self.ticks[t].get(source).map(Batch::values).unwrap_or(&[])
    }

    pub fn parse(text: &str) -> Result<TickTrace, ParseError> {
        let mut trace = TickTrace::new();
        for form in sexp::read_all(text)? {
            trace.ticks.push(parse_tick(&form)?);
        }
        Ok(trace)
    }
}

fn parse_tick(form: &Sexp) -> Result<IndexMap<String, Batch>, ParseError> {
    let malformed = |pos, msg: &str| ParseError::Malformed {
        pos,
        msg: msg.to_string(),
    };
    let items = form
        .as_list()
        .filter(|items| items.first().and_then(Sexp::as_atom) == Some("tick"))
        .ok_or_else(|| malformed(form.pos, "expected `(tick ...)`"))?;
    let mut tick = IndexMap::new();
    for entry in &items[1..] {
        let parts = entry
            .as_list()
            .ok_or_else(|| malformed(entry.pos, "expected `(name value...)`"))?;
        let name = parts
            .first()
            .and_then(Sexp::as_atom)
            .filter(|n| is_valid_name(n))
            .ok_or_else(|| malformed(entry.pos, "expected a stream name"))?;
        let values = parts[1..]
            .iter()
            .map(Value::from_sexp)
            .collect::<Result<Vec<_>, _>>()?;
        let batch: &mut Batch = tick.entry(name.to_string()).or_default();
        batch.0.extend(values);
    }
    Ok(tick)
}

impl fmt::Display for TickTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for tick in &self.ticks {
            f.write_str("(tick")?;
            for (name, batch) in tick {
                write!(f, " ({name}")?;
                for v in batch.values() {
                    write!(f, " {v}")?;
                }
                f.write_str(")")?;
            }
            f.write_str(")\n")?;
        }
        Ok(())
    }
}

/// Sink outputs per tick, in emission order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutputTrace {
    pub ticks: Vec<IndexMap<String, Vec<Value>>>,
}

impl OutputTrace {
    /// Values emitted by `sink` at 1-based tick `t`.
    pub fn at(&self, t: usize, sink: &str) -> &[Value] {
        self.ticks[t - 1]
            .get(sink)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Canonical dump with each sink's values sorted, for multiset comparison.
    pub fn sorted_dump(&self) -> String {
        let mut out = String::new();
        for tick in &self.ticks {
            out.push_str("(tick");
            for (sink, values) in tick {
                let mut vs = values.clone();
                vs.sort();
                out.push_str(&format!(" ({sink}"));
                for v in vs {
                    out.push_str(&format!(" {v}"));
                }
                out.push(')');
            }
            out.push_str(")\n");
        }
        out
    }
}

/// Shape of generated values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueShape {
    /// Integers in `0..=5`.
    #[default]
    Ints,
    /// `(tuple key payload)` with key in `0..=3` and payload in `0..=5`.
    Keyed,
}

pub const INT_DOMAIN: i64 = 6;
pub const KEY_DOMAIN: i64 = 4;

/// A seeded random trace. Batch sizes are uniform in `0..=batch_max` and
/// values come from a small domain so crosses and joins see collisions.
pub fn random_trace(
    sources: &[&str],
    ticks: usize,
    seed: u64,
    batch_max: usize,
    shape: ValueShape,
) -> TickTrace {
    assert!(ticks >= 1, "a trace needs at least one tick");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = TickTrace::new();
    for _ in 0..ticks {
        let mut tick = IndexMap::new();
        for &s in sources {
            let n = rng.gen_range(0..=batch_max);
            let values = (0..n)
                .map(|_| match shape {
                    ValueShape::Ints => Value::Int(rng.gen_range(0..INT_DOMAIN)),
                    ValueShape::Keyed => Value::pair(
                        Value::Int(rng.gen_range(0..KEY_DOMAIN)),
                        Value::Int(rng.gen_range(0..INT_DOMAIN)),
                    ),
                })
                .collect();
            tick.insert(s.to_string(), Batch(values));
        }
        trace.ticks.push(tick);
    }
    trace
}
