use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::sexpr::{format_bv, Atom, SExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
    BitVec(u32),
}

impl Sort {
    /// SyGuS-IF v1 spelling, e.g. `(BitVec 32)`.
    pub fn to_sexpr(self) -> SExpr {
        match self {
            Sort::Int => SExpr::symbol("Int"),
            Sort::Bool => SExpr::symbol("Bool"),
            Sort::BitVec(w) => SExpr::list(vec![SExpr::symbol("BitVec"), SExpr::int(w)]),
        }
    }

    /// SMT-LIB 2 spelling, e.g. `(_ BitVec 32)`.
    pub fn to_smtlib(self) -> String {
        match self {
            Sort::Int => "Int".into(),
            Sort::Bool => "Bool".into(),
            Sort::BitVec(w) => format!("(_ BitVec {w})"),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

pub(crate) fn bv_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    BitVec { width: u32, bits: u64 },
}

impl Value {
    pub fn int(v: impl Into<BigInt>) -> Value {
        Value::Int(v.into())
    }

    /// Bit-vector value; `bits` is reduced modulo 2^width.
    pub fn bv(width: u32, bits: u64) -> Value {
        Value::BitVec { width, bits: bits & bv_mask(width) }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
            Value::BitVec { width, .. } => Sort::BitVec(*width),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_bits(&self) -> Option<u64> {
        match self {
            Value::BitVec { bits, .. } => Some(*bits),
            _ => None,
        }
    }

    /// Zero of the given sort (false for Bool).
    pub fn default_of(sort: Sort) -> Value {
        match sort {
            Sort::Int => Value::int(0),
            Sort::Bool => Value::Bool(false),
            Sort::BitVec(w) => Value::bv(w, 0),
        }
    }

    /// Concrete syntax; negative integers use the SMT-LIB `(- n)` form.
    pub fn to_sexpr(&self) -> SExpr {
        match self {
            Value::Int(i) if i.is_negative() => {
                SExpr::list(vec![SExpr::symbol("-"), SExpr::int(-i)])
            }
            Value::Int(i) => SExpr::int(i.clone()),
            Value::Bool(b) => SExpr::Atom(Atom::Bool(*b)),
            Value::BitVec { width, bits } => SExpr::Atom(Atom::BitVec { width: *width, bits: *bits }),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::BitVec { width, bits } => f.write_str(&format_bv(*width, *bits)),
        }
    }
}

/// Assignment of values to the universally quantified variables.
pub type Valuation = BTreeMap<String, Value>;

pub fn format_valuation(v: &Valuation) -> String {
    v.iter().map(|(k, x)| format!("{k}={x}")).collect::<Vec<_>>().join(", ")
}
