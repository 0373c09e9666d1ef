//! Reference tick semantics for the operator algebra.
//!
//! Every operator is stateless within a tick except `persist`, `old`,
//! `prev` and `delta`, which carry state across ticks. A def referenced by
//! several consumers is evaluated once per tick and its output handed to
//! each consumer (a tee). Diamonds run through their desugaring.

mod trace;
mod udf;

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;

pub use trace::{multiset, random_trace, Batch, OutputTrace, TickTrace, ValueShape};
pub use trace::{INT_DOMAIN, KEY_DOMAIN};
pub use udf::{stable_hash, FilterFn, MapFn, Udf, UdfRegistry};

use crate::diamond::{self, DiamondError};
use crate::ir::{Op, ProgramFile, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("unregistered function `{0}`")]
    UnknownFunction(String),
    #[error("`{name}` is registered as a {registered}, used as a {used}")]
    WrongFunctionKind {
        name: String,
        registered: &'static str,
        used: &'static str,
    },
    #[error("join input {0} is not a tuple of arity >= 2")]
    JoinInput(Value),
    #[error(transparent)]
    Diamond(#[from] DiamondError),
    #[error("unexpected `{0}` outside a diamond")]
    Structural(Op),
}

enum Kind {
    Source(String),
    Persist,
    Delta,
    Old,
    Prev,
    Chain,
    Cross,
    Join,
    Map(MapFn),
    Filter(FilterFn),
}

struct Node {
    kind: Kind,
    inputs: Vec<usize>,
}

#[derive(Default)]
enum State {
    #[default]
    None,
    /// persist / old: everything seen so far.
    History(Vec<Value>),
    /// prev / delta: the upstream's output in the previous tick.
    Last(Vec<Value>),
}

/// A program lowered to a node arena in topological order.
struct Plan {
    nodes: Vec<Node>,
    sinks: IndexMap<String, usize>,
}

impl Plan {
    fn compile(program: &ProgramFile, udfs: &UdfRegistry) -> Result<Plan, RunError> {
        let mut plan = Plan {
            nodes: Vec::new(),
            sinks: IndexMap::new(),
        };
        let mut env: HashMap<String, usize> = HashMap::new();
        for (name, body) in program.defs() {
            let body = diamond::desugar_all(body)?;
            let id = plan.lower(&body, &env, udfs)?;
            env.insert(name.clone(), id);
        }
        for (name, body) in program.sinks() {
            let body = diamond::desugar_all(body)?;
            let id = plan.lower(&body, &env, udfs)?;
            plan.sinks.insert(name.clone(), id);
        }
        Ok(plan)
    }

    fn lower(
        &mut self,
        t: &Term,
        env: &HashMap<String, usize>,
        udfs: &UdfRegistry,
    ) -> Result<usize, RunError> {
        if let Some(name) = t.source_name() {
            if let Some(&id) = env.get(name) {
                return Ok(id);
            }
        }
        let inputs = t
            .children()
            .iter()
            .map(|c| self.lower(c, env, udfs))
            .collect::<Result<Vec<_>, _>>()?;
        let lookup = |used: &'static str| -> Result<&Udf, RunError> {
            let name = t.symbol().expect("map/filter carry a symbol").as_str();
            let udf = udfs
                .get(name)
                .ok_or_else(|| RunError::UnknownFunction(name.to_string()))?;
            let registered = match udf {
                Udf::Map(_) => "map",
                Udf::Filter(_) => "filter",
            };
            if registered != used {
                return Err(RunError::WrongFunctionKind {
                    name: name.to_string(),
                    registered,
                    used,
                });
            }
            Ok(udf)
        };
        let kind = match t.op() {
            Op::Source => Kind::Source(t.source_name().unwrap().to_string()),
            Op::Persist => Kind::Persist,
            Op::Delta => Kind::Delta,
            Op::Old => Kind::Old,
            Op::Prev => Kind::Prev,
            Op::Chain => Kind::Chain,
            Op::Cross => Kind::Cross,
            Op::Join => Kind::Join,
            Op::Map => match lookup("map")? {
                Udf::Map(f) => Kind::Map(f.clone()),
                Udf::Filter(_) => unreachable!(),
            },
            Op::Filter => match lookup("filter")? {
                Udf::Filter(f) => Kind::Filter(f.clone()),
                Udf::Map(_) => unreachable!(),
            },
            op => return Err(RunError::Structural(op)),
        };
        self.nodes.push(Node { kind, inputs });
        Ok(self.nodes.len() - 1)
    }
}

fn join_split(v: &Value) -> Result<(Value, Value), RunError> {
    match v.as_tuple() {
        Some([k, rest @ ..]) if !rest.is_empty() => {
            let payload = if rest.len() == 1 {
                rest[0].clone()
            } else {
                Value::Tuple(rest.to_vec())
            };
            Ok((k.clone(), payload))
        }
        _ => Err(RunError::JoinInput(v.clone())),
    }
}

/// Multiset difference `current \ previous`, saturating at zero, in the
/// order of `current`.
fn multiset_minus(current: &[Value], previous: &[Value]) -> Vec<Value> {
    let mut budget = multiset(previous);
    current
        .iter()
        .filter(|v| match budget.get_mut(v) {
            Some(n) if *n > 0 => {
                *n -= 1;
                false
            }
            _ => true,
        })
        .cloned()
        .collect()
}

/// Runs `program` over `inputs`, recording every sink's output per tick.
pub fn run(
    program: &ProgramFile,
    inputs: &TickTrace,
    udfs: &UdfRegistry,
) -> Result<OutputTrace, RunError> {
    let plan = Plan::compile(program, udfs)?;
    let mut states: Vec<State> = plan.nodes.iter().map(|_| State::None).collect();
    let mut trace = OutputTrace::default();

    for t in 0..inputs.len() {
        let mut out: Vec<Vec<Value>> = Vec::with_capacity(plan.nodes.len());
        for (i, node) in plan.nodes.iter().enumerate() {
            let input = |k: usize| -> &[Value] { &out[node.inputs[k]] };
            let values = match &node.kind {
                Kind::Source(name) => inputs.batch(t, name).to_vec(),
                Kind::Chain => {
                    let mut v = input(0).to_vec();
                    v.extend_from_slice(input(1));
                    v
                }
                Kind::Cross => {
                    let (a, b) = (input(0), input(1));
                    let mut v = Vec::with_capacity(a.len() * b.len());
                    for x in a {
                        for y in b {
                            v.push(Value::pair(x.clone(), y.clone()));
                        }
                    }
                    v
                }
                Kind::Join => {
                    let left = input(0)
                        .iter()
                        .map(join_split)
                        .collect::<Result<Vec<_>, _>>()?;
                    let right = input(1)
                        .iter()
                        .map(join_split)
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut v = Vec::new();
                    for (k1, v1) in &left {
                        for (k2, v2) in &right {
                            if k1 == k2 {
                                v.push(Value::Tuple(vec![k1.clone(), v1.clone(), v2.clone()]));
                            }
                        }
                    }
                    v
                }
                Kind::Map(f) => input(0).iter().map(|v| f(v)).collect(),
                Kind::Filter(p) => input(0).iter().filter(|v| p(v)).cloned().collect(),
                Kind::Persist => {
                    if !matches!(states[i], State::History(_)) {
                        states[i] = State::History(Vec::new());
                    }
                    let State::History(h) = &mut states[i] else {
                        unreachable!()
                    };
                    h.extend_from_slice(input(0));
                    h.clone()
                }
                Kind::Old => {
                    let state = std::mem::take(&mut states[i]);
                    let mut h = match state {
                        State::History(h) => h,
                        _ => Vec::new(),
                    };
                    let emitted = h.clone();
                    h.extend_from_slice(input(0));
                    states[i] = State::History(h);
                    emitted
                }
                Kind::Prev => {
                    let state = std::mem::replace(&mut states[i], State::Last(input(0).to_vec()));
                    match state {
                        State::Last(v) => v,
                        _ => Vec::new(),
                    }
                }
                Kind::Delta => {
                    let current = input(0).to_vec();
                    let emitted = match &states[i] {
                        State::Last(prev) => multiset_minus(&current, prev),
                        _ => current.clone(),
                    };
                    states[i] = State::Last(current);
                    emitted
                }
            };
            out.push(values);
        }
        trace.ticks.push(
            plan.sinks
                .iter()
                .map(|(name, &id)| (name.clone(), out[id].clone()))
                .collect(),
        );
    }
    Ok(trace)
}

/// How outputs are compared per tick and sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Multiset,
    Ordered,
}

/// The earliest point where two runs disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// 1-based.
    pub tick: usize,
    pub sink: String,
    pub left: Vec<Value>,
    pub right: Vec<Value>,
    /// Values the left run emitted beyond the right (multiset difference).
    pub only_left: Vec<Value>,
    pub only_right: Vec<Value>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |vs: &[Value]| {
            let mut vs = vs.to_vec();
            vs.sort();
            vs.iter()
                .map(Value::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "tick {} sink {}: only-left=[{}] only-right=[{}]",
            self.tick,
            self.sink,
            show(&self.only_left),
            show(&self.only_right)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Diverged(Divergence),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }

    pub fn divergence(&self) -> Option<&Divergence> {
        match self {
            Verdict::Diverged(d) => Some(d),
            Verdict::Equivalent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error("sink names differ: {left:?} vs {right:?}")]
    SinkMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error(transparent)]
    Run(#[from] RunError),
}

/// Compares two output traces tick by tick and sink by sink.
pub fn compare_outputs(a: &OutputTrace, b: &OutputTrace, mode: Mode) -> Verdict {
    for (t, (ta, tb)) in a.ticks.iter().zip(&b.ticks).enumerate() {
        for (sink, va) in ta {
            let vb = tb.get(sink).map(Vec::as_slice).unwrap_or(&[]);
            let same = match mode {
                Mode::Ordered => va.as_slice() == vb,
                Mode::Multiset => multiset(va) == multiset(vb),
            };
            if !same {
                return Verdict::Diverged(Divergence {
                    tick: t + 1,
                    sink: sink.clone(),
                    left: va.clone(),
                    right: vb.to_vec(),
                    only_left: multiset_minus(va, vb),
                    only_right: multiset_minus(vb, va),
                });
            }
        }
    }
    Verdict::Equivalent
}

/// Runs both programs on `inputs` and compares every sink at every tick.
pub fn equivalent(
    p1: &ProgramFile,
    p2: &ProgramFile,
    inputs: &TickTrace,
    udfs: &UdfRegistry,
    mode: Mode,
) -> Result<Verdict, EquivError> {
    let names = |p: &ProgramFile| -> Vec<String> {
        let mut v: Vec<String> = p.sinks().keys().cloned().collect();
        v.sort();
        v
    };
    if names(p1) != names(p2) {
        return Err(EquivError::SinkMismatch {
            left: names(p1),
            right: names(p2),
        });
    }
    let a = run(p1, inputs, udfs)?;
    let b = run(p2, inputs, udfs)?;
    Ok(compare_outputs(&a, &b, mode))
}

/// Convenience: single-sink terms compared in multiset mode.
pub fn terms_equivalent(
    a: &Term,
    b: &Term,
    inputs: &TickTrace,
    udfs: &UdfRegistry,
) -> Result<Verdict, EquivError> {
    equivalent(
        &ProgramFile::single(a.clone()),
        &ProgramFile::single(b.clone()),
        inputs,
        udfs,
        Mode::Multiset,
    )
}

/// Picks the value shape a program needs: keyed tuples when it joins.
pub fn shape_for(program: &ProgramFile) -> ValueShape {
    if program.contains_op(Op::Join) {
        ValueShape::Keyed
    } else {
        ValueShape::Ints
    }
}
