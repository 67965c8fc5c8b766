//! Branch distance rules.
//!
//! Every rule yields the predicate's value together with the raw distance
//! to making it true and to making it false. The distance to the arm taken
//! is zero and the distance to the other arm is strictly positive.

use crate::lang::ast::BinOp;

use super::Value;

/// Added to every non-zero distance so that flipping is never free.
pub const K: f64 = 1.0;

/// `(value, distance to TRUE, distance to FALSE)`
pub type Outcome = (bool, f64, f64);

pub fn atom(value: bool) -> Outcome {
    if value {
        (true, 0.0, K)
    } else {
        (false, K, 0.0)
    }
}

pub fn not((value, to_true, to_false): Outcome) -> Outcome {
    (!value, to_false, to_true)
}

/// `a && b` where both operands have been evaluated.
pub fn and(a: Outcome, b: Outcome) -> Outcome {
    (a.0 && b.0, a.1 + b.1, a.2.min(b.2))
}

/// `a || b` where both operands have been evaluated.
pub fn or(a: Outcome, b: Outcome) -> Outcome {
    (a.0 || b.0, a.1.min(b.1), a.2 + b.2)
}

fn int_cmp(op: BinOp, a: i64, b: i64) -> Outcome {
    let (a, b) = (a as f64, b as f64);
    // Everything reduces to `x == y`, `x != y`, `x < y` or `x <= y`.
    let (op, x, y) = match op {
        BinOp::Gt => (BinOp::Lt, b, a),
        BinOp::Ge => (BinOp::Le, b, a),
        op => (op, a, b),
    };
    match op {
        BinOp::Eq => {
            if x == y {
                (true, 0.0, K)
            } else {
                (false, (x - y).abs() + K, 0.0)
            }
        }
        BinOp::Ne => {
            if x != y {
                (true, 0.0, (x - y).abs() + K)
            } else {
                (false, K, 0.0)
            }
        }
        BinOp::Lt => {
            if x < y {
                (true, 0.0, y - x + K)
            } else {
                (false, x - y + K, 0.0)
            }
        }
        BinOp::Le => {
            if x <= y {
                (true, 0.0, y - x + K)
            } else {
                (false, x - y + K, 0.0)
            }
        }
        _ => unreachable!("not a comparison: {op:?}"),
    }
}

/// Distance for a comparison between two evaluated operands.
pub fn compare(op: BinOp, lhs: &Value, rhs: &Value) -> Outcome {
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => int_cmp(op, *a, *b),
        _ => {
            // Strings, booleans and references compare flat.
            let equal = lhs == rhs;
            match op {
                BinOp::Eq => atom(equal),
                BinOp::Ne => atom(!equal),
                _ => unreachable!("ordering on non-int values"),
            }
        }
    }
}
