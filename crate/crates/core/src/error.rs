use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("metric not positive definite (A = {a}, B = {b})")]
    NotPositiveDefinite { a: f64, b: f64 },
    #[error("w is q-fixed or zero: {0}")]
    DegenerateVector(String),
    #[error("cos(phi) = {0} lies outside [-1/2, 1]")]
    CosineOutOfRange(f64),
    #[error("requires 0 < beta < alpha (alpha = {alpha}, beta = {beta})")]
    InvalidParams { alpha: f64, beta: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("metric g_{step} lost positive definiteness (A = {a}, B = {b})")]
    PositivityLost { step: usize, a: f64, b: f64 },
    #[error("metric g_{step} overflowed; enable normalization for long runs")]
    Overflow { step: usize },
    #[error("singular metric at ({}, {}, {}): A = {a}, B = {b}", point[0], point[1], point[2])]
    SingularMetric { point: [f64; 3], a: f64, b: f64 },
    #[error("metric field not positive definite at ({}, {}, {}): A = {a}, B = {b}", point[0], point[1], point[2])]
    FieldPrecondition { point: [f64; 3], a: f64, b: f64 },
    #[error("field '{field}' at ({}, {}, {}): {source}", point[0], point[1], point[2])]
    FieldEval {
        field: String,
        point: [f64; 3],
        #[source]
        source: ExprError,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
