//! Built-in operator table: typing rules and concrete semantics for the
//! Int, Bool and fixed-width bit-vector theories.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::eval::EvalError;
use crate::value::{bv_mask, Sort, Value};

/// True for every symbol with built-in meaning.
pub fn is_builtin(op: &str) -> bool {
    family(op).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    /// Bool^n -> Bool, n within bounds.
    BoolNary(usize),
    BoolUnary,
    /// S x S ... -> Bool for any sort S.
    Equality,
    Ite,
    IntNary(usize),
    IntBinary,
    IntUnary,
    IntCompare,
    IntMinus,
    BvUnary,
    BvBinary,
    BvNary,
    BvCompare,
}

fn family(op: &str) -> Option<Family> {
    use Family::*;
    Some(match op {
        "not" => BoolUnary,
        "and" | "or" => BoolNary(1),
        "=>" | "xor" => BoolNary(2),
        "xnor" | "nand" | "nor" | "iff" => BoolNary(2),
        "=" | "distinct" => Equality,
        "ite" => Ite,
        "+" | "*" => IntNary(2),
        "-" => IntMinus,
        "div" | "mod" => IntBinary,
        "abs" => IntUnary,
        "<=" | "<" | ">=" | ">" => IntCompare,
        "bvnot" | "bvneg" => BvUnary,
        "bvand" | "bvor" | "bvxor" | "bvadd" | "bvmul" => BvNary,
        "bvsub" | "bvudiv" | "bvurem" | "bvsdiv" | "bvsrem" | "bvsmod" | "bvshl" | "bvlshr"
        | "bvashr" | "bvshr" | "bvnand" | "bvnor" | "bvxnor" => BvBinary,
        "bvult" | "bvule" | "bvugt" | "bvuge" | "bvslt" | "bvsle" | "bvsgt" | "bvsge" => BvCompare,
        _ => return None,
    })
}

/// Ways a built-in application can be ill-typed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpTypeError {
    Arity { expected: String, found: usize },
    /// Argument `index` has sort `found` where `expected` was required.
    Arg { index: usize, expected: String, found: Sort },
}

/// Result sort of applying built-in `op` to arguments of the given sorts.
/// Returns `None` when `op` is not a built-in.
pub fn result_sort(op: &str, args: &[Sort]) -> Option<Result<Sort, OpTypeError>> {
    let fam = family(op)?;
    Some(check(fam, op, args))
}

fn arity(expected: &str, found: usize) -> OpTypeError {
    OpTypeError::Arity { expected: expected.to_string(), found }
}

fn want(args: &[Sort], index: usize, expected: Sort) -> Result<(), OpTypeError> {
    if args[index] == expected {
        Ok(())
    } else {
        Err(OpTypeError::Arg { index, expected: expected.to_string(), found: args[index] })
    }
}

fn want_same_bv(args: &[Sort]) -> Result<u32, OpTypeError> {
    let width = match args[0] {
        Sort::BitVec(w) => w,
        other => {
            return Err(OpTypeError::Arg { index: 0, expected: "(BitVec _)".into(), found: other })
        }
    };
    for i in 1..args.len() {
        want(args, i, Sort::BitVec(width))?;
    }
    Ok(width)
}

fn check(fam: Family, op: &str, args: &[Sort]) -> Result<Sort, OpTypeError> {
    use Family::*;
    let n = args.len();
    match fam {
        BoolUnary => {
            if n != 1 {
                return Err(arity("1", n));
            }
            want(args, 0, Sort::Bool)?;
            Ok(Sort::Bool)
        }
        BoolNary(min) => {
            let exact2 = matches!(op, "xnor" | "nand" | "nor" | "iff");
            if exact2 && n != 2 {
                return Err(arity("2", n));
            }
            if n < min {
                return Err(arity(&format!("at least {min}"), n));
            }
            for i in 0..n {
                want(args, i, Sort::Bool)?;
            }
            Ok(Sort::Bool)
        }
        Equality => {
            if n < 2 {
                return Err(arity("at least 2", n));
            }
            for i in 1..n {
                want(args, i, args[0])?;
            }
            Ok(Sort::Bool)
        }
        Ite => {
            if n != 3 {
                return Err(arity("3", n));
            }
            want(args, 0, Sort::Bool)?;
            want(args, 2, args[1])?;
            Ok(args[1])
        }
        IntNary(min) => {
            if n < min {
                return Err(arity(&format!("at least {min}"), n));
            }
            for i in 0..n {
                want(args, i, Sort::Int)?;
            }
            Ok(Sort::Int)
        }
        IntMinus => {
            if n < 1 {
                return Err(arity("at least 1", n));
            }
            for i in 0..n {
                want(args, i, Sort::Int)?;
            }
            Ok(Sort::Int)
        }
        IntBinary => {
            if n != 2 {
                return Err(arity("2", n));
            }
            want(args, 0, Sort::Int)?;
            want(args, 1, Sort::Int)?;
            Ok(Sort::Int)
        }
        IntUnary => {
            if n != 1 {
                return Err(arity("1", n));
            }
            want(args, 0, Sort::Int)?;
            Ok(Sort::Int)
        }
        IntCompare => {
            if n != 2 {
                return Err(arity("2", n));
            }
            want(args, 0, Sort::Int)?;
            want(args, 1, Sort::Int)?;
            Ok(Sort::Bool)
        }
        BvUnary => {
            if n != 1 {
                return Err(arity("1", n));
            }
            Ok(Sort::BitVec(want_same_bv(args)?))
        }
        BvBinary => {
            if n != 2 {
                return Err(arity("2", n));
            }
            Ok(Sort::BitVec(want_same_bv(args)?))
        }
        BvNary => {
            if n < 2 {
                return Err(arity("at least 2", n));
            }
            Ok(Sort::BitVec(want_same_bv(args)?))
        }
        BvCompare => {
            if n != 2 {
                return Err(arity("2", n));
            }
            want_same_bv(args)?;
            Ok(Sort::Bool)
        }
    }
}

fn bool_arg(v: &Value) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| EvalError::Mismatch(format!("expected Bool, got {v}")))
}

fn int_arg(v: &Value) -> Result<&BigInt, EvalError> {
    v.as_int().ok_or_else(|| EvalError::Mismatch(format!("expected Int, got {v}")))
}

fn bv_arg(v: &Value) -> Result<(u32, u64), EvalError> {
    match v {
        Value::BitVec { width, bits } => Ok((*width, *bits)),
        _ => Err(EvalError::Mismatch(format!("expected bit-vector, got {v}"))),
    }
}

/// Euclidean quotient and remainder: `x = d*q + r` with `0 <= r < |d|`.
pub fn euclid_div_mod(x: &BigInt, d: &BigInt) -> Result<(BigInt, BigInt), EvalError> {
    if d.is_zero() {
        return Err(EvalError::DivisionByZero);
    }
    let r = x.mod_floor(&d.abs());
    let q = (x - &r) / d;
    Ok((q, r))
}

fn to_signed(width: u32, bits: u64) -> i128 {
    let sign = 1u64 << (width - 1);
    if bits & sign != 0 {
        bits as i128 - (1i128 << width)
    } else {
        bits as i128
    }
}

fn udiv(width: u32, a: u64, b: u64) -> u64 {
    if b == 0 {
        bv_mask(width)
    } else {
        a / b
    }
}

fn urem(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        a % b
    }
}

fn neg(width: u32, a: u64) -> u64 {
    a.wrapping_neg() & bv_mask(width)
}

fn msb(width: u32, a: u64) -> bool {
    a >> (width - 1) & 1 == 1
}

fn bv_binary(op: &str, width: u32, a: u64, b: u64) -> u64 {
    let mask = bv_mask(width);
    let r = match op {
        "bvand" => a & b,
        "bvor" => a | b,
        "bvxor" => a ^ b,
        "bvnand" => !(a & b),
        "bvnor" => !(a | b),
        "bvxnor" => !(a ^ b),
        "bvadd" => a.wrapping_add(b),
        "bvsub" => a.wrapping_sub(b),
        "bvmul" => a.wrapping_mul(b),
        "bvudiv" => udiv(width, a, b),
        "bvurem" => urem(a, b),
        "bvsdiv" => match (msb(width, a), msb(width, b)) {
            (false, false) => udiv(width, a, b),
            (true, false) => neg(width, udiv(width, neg(width, a), b)),
            (false, true) => neg(width, udiv(width, a, neg(width, b))),
            (true, true) => udiv(width, neg(width, a), neg(width, b)),
        },
        "bvsrem" => match (msb(width, a), msb(width, b)) {
            (false, false) => urem(a, b),
            (true, false) => neg(width, urem(neg(width, a), b)),
            (false, true) => urem(a, neg(width, b)),
            (true, true) => neg(width, urem(neg(width, a), neg(width, b))),
        },
        "bvsmod" => {
            let abs_a = if msb(width, a) { neg(width, a) } else { a };
            let abs_b = if msb(width, b) { neg(width, b) } else { b };
            let u = urem(abs_a, abs_b);
            if u == 0 {
                u
            } else {
                match (msb(width, a), msb(width, b)) {
                    (false, false) => u,
                    (true, false) => neg(width, u).wrapping_add(b),
                    (false, true) => u.wrapping_add(b),
                    (true, true) => neg(width, u),
                }
            }
        }
        "bvshl" => {
            if b >= width as u64 {
                0
            } else {
                a << b
            }
        }
        "bvlshr" | "bvshr" => {
            if b >= width as u64 {
                0
            } else {
                a >> b
            }
        }
        "bvashr" => {
            let fill = msb(width, a);
            if b >= width as u64 {
                if fill {
                    mask
                } else {
                    0
                }
            } else {
                let shifted = a >> b;
                if fill {
                    shifted | (mask & !(mask >> b))
                } else {
                    shifted
                }
            }
        }
        _ => unreachable!("not a binary bit-vector operator: {op}"),
    };
    r & mask
}

fn bv_compare(op: &str, width: u32, a: u64, b: u64) -> bool {
    let (sa, sb) = (to_signed(width, a), to_signed(width, b));
    match op {
        "bvult" => a < b,
        "bvule" => a <= b,
        "bvugt" => a > b,
        "bvuge" => a >= b,
        "bvslt" => sa < sb,
        "bvsle" => sa <= sb,
        "bvsgt" => sa > sb,
        "bvsge" => sa >= sb,
        _ => unreachable!("not a bit-vector comparison: {op}"),
    }
}

/// Applies built-in `op` to already-evaluated arguments.
///
/// `ite` is strict here; callers wanting lazy branches must special-case it.
pub fn apply(op: &str, args: &[Value]) -> Result<Value, EvalError> {
    let fam = family(op).ok_or_else(|| EvalError::UnknownFunction(op.to_string()))?;
    use Family::*;
    Ok(match fam {
        BoolUnary => Value::Bool(!bool_arg(&args[0])?),
        BoolNary(_) => {
            let bs = args.iter().map(bool_arg).collect::<Result<Vec<_>, _>>()?;
            Value::Bool(match op {
                "and" => bs.iter().all(|b| *b),
                "or" => bs.iter().any(|b| *b),
                // Right-associative: a => b => c is a => (b => c).
                "=>" => bs.iter().rev().skip(1).fold(bs[bs.len() - 1], |acc, a| !a || acc),
                "xor" => bs.iter().fold(false, |acc, b| acc ^ b),
                "xnor" | "iff" => bs[0] == bs[1],
                "nand" => !(bs[0] && bs[1]),
                "nor" => !(bs[0] || bs[1]),
                _ => unreachable!(),
            })
        }
        Equality => match op {
            "=" => Value::Bool(args.windows(2).all(|w| w[0] == w[1])),
            _ => {
                let mut distinct = true;
                for i in 0..args.len() {
                    for j in i + 1..args.len() {
                        distinct &= args[i] != args[j];
                    }
                }
                Value::Bool(distinct)
            }
        },
        Ite => {
            if bool_arg(&args[0])? {
                args[1].clone()
            } else {
                args[2].clone()
            }
        }
        IntNary(_) => {
            let xs = args.iter().map(int_arg).collect::<Result<Vec<_>, _>>()?;
            let mut acc = xs[0].clone();
            for x in &xs[1..] {
                if op == "+" {
                    acc += *x;
                } else {
                    acc *= *x;
                }
            }
            Value::Int(acc)
        }
        IntMinus => {
            let xs = args.iter().map(int_arg).collect::<Result<Vec<_>, _>>()?;
            if xs.len() == 1 {
                Value::Int(-xs[0])
            } else {
                let mut acc = xs[0].clone();
                for x in &xs[1..] {
                    acc -= *x;
                }
                Value::Int(acc)
            }
        }
        IntBinary => {
            let (q, r) = euclid_div_mod(int_arg(&args[0])?, int_arg(&args[1])?)?;
            Value::Int(if op == "div" { q } else { r })
        }
        IntUnary => Value::Int(int_arg(&args[0])?.abs()),
        IntCompare => {
            let (a, b) = (int_arg(&args[0])?, int_arg(&args[1])?);
            Value::Bool(match op {
                "<=" => a <= b,
                "<" => a < b,
                ">=" => a >= b,
                ">" => a > b,
                _ => unreachable!(),
            })
        }
        BvUnary => {
            let (w, a) = bv_arg(&args[0])?;
            Value::bv(w, if op == "bvnot" { !a } else { neg(w, a) })
        }
        BvBinary => {
            let (w, a) = bv_arg(&args[0])?;
            let (_, b) = bv_arg(&args[1])?;
            Value::bv(w, bv_binary(op, w, a, b))
        }
        BvNary => {
            let (w, mut acc) = bv_arg(&args[0])?;
            for v in &args[1..] {
                acc = bv_binary(op, w, acc, bv_arg(v)?.1);
            }
            Value::bv(w, acc)
        }
        BvCompare => {
            let (w, a) = bv_arg(&args[0])?;
            let (_, b) = bv_arg(&args[1])?;
            Value::Bool(bv_compare(op, w, a, b))
        }
    })
}
