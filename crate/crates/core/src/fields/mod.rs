//! Scalar fields on a box F ⊂ R³ and their finite-difference gradients.
//!
//! When the coefficients A, B of the metric (and α, β of the transform) vary
//! from point to point, parallelism of q is governed by gradient conditions
//! of the form grad L = grad R · S. This module checks such conditions on a
//! sample grid and cross-checks them against ∇q computed from Christoffel
//! symbols.

mod condition;
mod connection;

use std::ops::Sub;

use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::metric::{CirculantMetric, S_MATRIX};

pub use condition::{
    check_condition, transform_consistency, ConditionReport, ResidualSample, Rule, TransformConsistency,
};
pub use connection::{
    christoffel, metric_compatibility_residual, metric_derivatives, nabla_q, nabla_q_sweep, Christoffel, NablaSweep,
    ThreeIndex,
};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Default tolerance for condition residuals and |∇q|.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub name: String,
    pub expr: Expr,
}

impl ScalarField {
    pub fn new(name: impl Into<String>, expr: Expr) -> Self {
        Self {
            name: name.into(),
            expr,
        }
    }

    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self> {
        Ok(Self::new(name, source.parse::<Expr>()?))
    }

    pub fn constant(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, Expr::Const(value))
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        self.expr.eval(p).map_err(|source| GeometryError::FieldEval {
            field: self.name.clone(),
            point: p,
            source,
        })
    }

    /// Evaluates the field on every point of the grid inflated by `h` in
    /// each axis direction, i.e. everywhere a central-difference stencil
    /// will touch.
    pub fn check_on_grid(&self, region: &Region, h: f64) -> Result<()> {
        for p in region.points() {
            self.eval(p)?;
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut q = p;
                    q[axis] += sign * h;
                    self.eval(q)?;
                }
            }
        }
        Ok(())
    }
}

/// The coefficient fields (A₁, B₁) = (αA + 2βB, βA + (α+β)B) of the
/// transformed metric αg + βf, built as expressions.
pub fn transformed_fields(
    a: &ScalarField,
    b: &ScalarField,
    alpha: &ScalarField,
    beta: &ScalarField,
) -> (ScalarField, ScalarField) {
    let (a, b, al, be) = (&a.expr, &b.expr, &alpha.expr, &beta.expr);
    let a1 = al.clone() * a.clone() + Expr::Const(2.0) * be.clone() * b.clone();
    let b1 = be.clone() * a.clone() + (al.clone() + be.clone()) * b.clone();
    (ScalarField::new("A1", a1), ScalarField::new("B1", b1))
}

/// Evaluates the metric (A(p), B(p)).
pub fn metric_at(a: &ScalarField, b: &ScalarField, p: Point) -> Result<CirculantMetric> {
    Ok(CirculantMetric::new(a.eval(p)?, b.eval(p)?))
}

/// An axis-aligned box sampled by an n × n × n grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lower: Point,
    upper: Point,
    n: usize,
}

impl Region {
    pub fn new(lower: Point, upper: Point, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::Config(format!(
                "grid resolution must be at least 2, got {n}"
            )));
        }
        for axis in 0..3 {
            if !(lower[axis] < upper[axis]) || !lower[axis].is_finite() || !upper[axis].is_finite() {
                return Err(GeometryError::Config(format!(
                    "region bounds must satisfy lower < upper on every axis (axis {axis}: {} .. {})",
                    lower[axis], upper[axis]
                )));
            }
        }
        Ok(Self { lower, upper, n })
    }

    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::new([0.0; 3], [1.0; 3], n)
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i == self.n - 1 {
            return self.upper[axis];
        }
        let t = i as f64 / (self.n - 1) as f64;
        self.lower[axis] + t * (self.upper[axis] - self.lower[axis])
    }

    /// Grid points in x-major order (x slowest, z fastest), boundary included.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let n = self.n;
        (0..n * n * n).map(move |idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            [self.coordinate(0, i), self.coordinate(1, j), self.coordinate(2, k)]
        })
    }
}

/// A row vector of partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covector3(pub [f64; 3]);

impl Covector3 {
    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// c·S: component i is −cᵢ plus the sum of the other two.
    pub fn s_transform(&self) -> Covector3 {
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|i| self.0[i] * S_MATRIX[i][j]).sum();
        }
        Covector3(out)
    }
}

impl Sub for Covector3 {
    type Output = Covector3;
    fn sub(self, o: Covector3) -> Covector3 {
        Covector3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// Central differences: [F(p + h·eᵢ) − F(p − h·eᵢ)] / 2h.
pub fn gradient(field: &ScalarField, p: Point, h: f64) -> Result<Covector3> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeometryError::Config(format!("step h must be positive, got {h}")));
    }
    let mut out = [0.0; 3];
    for (axis, o) in out.iter_mut().enumerate() {
        let mut fwd = p;
        let mut back = p;
        fwd[axis] += h;
        back[axis] -= h;
        *o = (field.eval(fwd)? - field.eval(back)?) / (2.0 * h);
    }
    Ok(Covector3(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::S_SQUARED;

    fn f(src: &str) -> ScalarField {
        ScalarField::parse("F", src).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(&f("x+2*y+3*z"), [0.3, -1.7, 2.2], 1e-4).unwrap();
        for (got, want) in g.0.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-8);
        }
        assert_eq!(gradient(&f("5"), [1.0, 2.0, 3.0], 1e-4).unwrap(), Covector3([0.0; 3]));
        let g = gradient(&f("x^2"), [3.0, 0.0, 0.0], 1e-4).unwrap();
        assert!((g.0[0] - 6.0).abs() < 1e-8 && g.0[1] == 0.0 && g.0[2] == 0.0);
    }

    #[test]
    fn gradient_rejects_bad_step_and_propagates_eval_errors() {
        assert!(matches!(
            gradient(&f("x"), [0.0; 3], 0.0),
            Err(GeometryError::Config(_))
        ));
        assert!(matches!(
            gradient(&f("x"), [0.0; 3], -1.0),
            Err(GeometryError::Config(_))
        ));
        let err = gradient(&f("ln(x)"), [0.0; 3], 1e-4).unwrap_err();
        assert!(matches!(err, GeometryError::FieldEval { .. }));
    }

    #[test]
    fn gradient_error_is_second_order() {
        // f = x³ + x·y² − 2z³, analytic gradient (3x² + y², 2xy, −6z²)
        let field = f("x^3 + x*y^2 - 2*z^3");
        let p = [0.7, -0.4, 1.1];
        let exact = [3.0 * 0.49 + 0.16, 2.0 * 0.7 * -0.4, -6.0 * 1.21];
        let err = |h: f64| {
            let g = gradient(&field, p, h).unwrap();
            g.0.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        for h in [1e-2, 5e-3, 2e-3] {
            let ratio = err(h) / err(h / 2.0);
            assert!((3.9..4.1).contains(&ratio), "h = {h}: ratio {ratio}");
        }
    }

    #[test]
    fn s_transform_examples() {
        assert_eq!(Covector3([1.0, 1.0, 1.0]).s_transform(), Covector3([1.0, 1.0, 1.0]));
        assert_eq!(Covector3([1.0, 0.0, 0.0]).s_transform(), Covector3([-1.0, 1.0, 1.0]));
        assert_eq!(Covector3([0.0; 3]).s_transform(), Covector3([0.0; 3]));
    }

    #[test]
    fn s_transform_squared_matches_constant() {
        for c in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.3, -2.0, 5.5]] {
            let twice = Covector3(c).s_transform().s_transform();
            for j in 0..3 {
                let expected: f64 = (0..3).map(|i| c[i] * S_SQUARED[i][j]).sum();
                assert!((twice.0[j] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn region_grid() {
        let r = Region::new([0.0, 1.0, -1.0], [1.0, 3.0, 1.0], 3).unwrap();
        let pts: Vec<_> = r.points().collect();
        assert_eq!(pts.len(), 27);
        assert_eq!(pts[0], [0.0, 1.0, -1.0]);
        assert_eq!(pts[1], [0.0, 1.0, 0.0]);
        assert_eq!(pts[26], [1.0, 3.0, 1.0]);
        assert!(Region::new([0.0; 3], [1.0; 3], 1).is_err());
        assert!(Region::new([0.0; 3], [1.0, 0.0, 1.0], 4).is_err());
        assert!(Region::new([0.0; 3], [1.0, f64::INFINITY, 1.0], 4).is_err());
    }

    #[test]
    fn grid_evaluability_covers_the_stencil() {
        let r = Region::unit_cube(3).unwrap();
        assert!(f("sqrt(x)").check_on_grid(&r, 1e-4).is_err());
        assert!(f("sqrt(x + 0.001)").check_on_grid(&r, 1e-4).is_ok());
    }

    #[test]
    fn transformed_fields_match_pointwise_formula() {
        let (a, b, al, be) = (f("x+y+z+5"), f("x*y + 1"), f("2 + z"), f("sin(x)"));
        let (a1, b1) = transformed_fields(&a, &b, &al, &be);
        for p in Region::unit_cube(3).unwrap().points() {
            let g = metric_at(&a, &b, p).unwrap();
            let params = crate::conformal::ConformalParams::new(al.eval(p).unwrap(), be.eval(p).unwrap());
            let g1 = crate::conformal::almost_conformal(&g, &params);
            assert!((a1.eval(p).unwrap() - g1.a()).abs() < 1e-12);
            assert!((b1.eval(p).unwrap() - g1.b()).abs() < 1e-12);
        }
    }
}
