use std::fmt;

use crate::sexp::{Sexp, SexpKind};

use super::{ParseError, Symbol};

/// A stream element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(Symbol),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(Symbol::new(s))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Tuple(vec![a, b])
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(items) => Some(items),
            _ => None,
        }
    }

    pub(crate) fn from_sexp(sexp: &Sexp) -> Result<Value, ParseError> {
        match &sexp.kind {
            SexpKind::Atom(a) => {
                if let Ok(n) = a.parse::<i64>() {
                    Ok(Value::Int(n))
                } else if super::is_valid_name(a) {
                    Ok(Value::sym(a))
                } else {
                    Err(ParseError::Malformed {
                        pos: sexp.pos,
                        msg: format!("invalid value `{a}`"),
                    })
                }
            }
            SexpKind::List(items) => match items.split_first() {
                Some((head, rest)) if head.as_atom() == Some("tuple") => Ok(Value::Tuple(
                    rest.iter()
                        .map(Value::from_sexp)
                        .collect::<Result<_, _>>()?,
                )),
                _ => Err(ParseError::Malformed {
                    pos: sexp.pos,
                    msg: "expected `(tuple ...)`".into(),
                }),
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Tuple(items) => {
                f.write_str("(tuple")?;
                for v in items {
                    write!(f, " {v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Value {
        Value::Int(n)
    }
}
