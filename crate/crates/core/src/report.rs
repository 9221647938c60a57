//! JSON conventions shared by all reports.

use serde_json::{json, Value};

use crate::qcore::{ComplexMatrix, ComplexVector, ExtendedReal};

pub fn vector_json(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// Finite numbers as JSON numbers; `+∞` as the string `"inf"`.
pub fn extended_json(x: ExtendedReal) -> Value {
    match x {
        ExtendedReal::Finite(v) => number_json(v),
        ExtendedReal::Infinite => json!("inf"),
    }
}

pub fn number_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}
