use std::fmt;

use super::{gradient, metric_at, transformed_fields, Point, Region, ScalarField};
use crate::error::{GeometryError, Result};

/// Which gradient coupling a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// grad A = grad B · S
    AB,
    /// grad α = grad β · S
    AlphaBeta,
    /// grad(αA + 2βB) = grad(βA + (α+β)B) · S
    Combined,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::AB => "grad A = grad B . S",
            Rule::AlphaBeta => "grad alpha = grad beta . S",
            Rule::Combined => "grad (alpha A + 2 beta B) = grad (beta A + (alpha + beta) B) . S",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Rule::AB => "A_B",
            Rule::AlphaBeta => "alpha_beta",
            Rule::Combined => "combined",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub point: Point,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub rule: Rule,
    pub samples: Vec<ResidualSample>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConditionReport {
    fn from_samples(rule: Rule, samples: Vec<ResidualSample>, tolerance: f64) -> Self {
        let max_residual = samples.iter().fold(0.0f64, |m, s| m.max(s.residual));
        let mean_residual = samples.iter().map(|s| s.residual).sum::<f64>() / samples.len() as f64;
        Self {
            rule,
            samples,
            max_residual,
            mean_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }

    pub fn worst_point(&self) -> Option<Point> {
        self.samples
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .map(|s| s.point)
    }
}

/// Checks grad(left) = grad(right) · S at every grid point.
///
/// The residual at a point is the max-norm of grad(left) − grad(right)·S.
/// For [`Rule::Combined`] pass the pair from [`transformed_fields`].
pub fn check_condition(
    left: &ScalarField,
    right: &ScalarField,
    rule: Rule,
    region: &Region,
    h: f64,
    tol: f64,
) -> Result<ConditionReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeometryError::Config(format!("step h must be positive, got {h}")));
    }
    if !(tol >= 0.0) {
        return Err(GeometryError::Config(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let mut samples = Vec::with_capacity(region.len());
    for point in region.points() {
        let gl = gradient(left, point, h)?;
        let gr = gradient(right, point, h)?;
        samples.push(ResidualSample {
            point,
            residual: (gl - gr.s_transform()).max_norm(),
        });
    }
    Ok(ConditionReport::from_samples(rule, samples, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformConsistency {
    pub report_ab: ConditionReport,
    pub report_alpha_beta: ConditionReport,
    pub report_combined: ConditionReport,
    /// c with residual(combined) ≤ c·tol whenever the other two pass.
    pub amplification: f64,
    pub implied_tolerance: f64,
    /// False only if both premises pass and the combined residual still
    /// exceeds `implied_tolerance`.
    pub implication_holds: bool,
}

impl TransformConsistency {
    pub fn reports(&self) -> [&ConditionReport; 3] {
        [&self.report_ab, &self.report_alpha_beta, &self.report_combined]
    }

    pub fn all_pass(&self) -> bool {
        self.reports().iter().all(|r| r.pass)
    }
}

/// Evaluates all three couplings for the metric field (A, B) and the
/// transform coefficients (α, β).
///
/// With eA, eα the residuals of the first two conditions, the residual of
/// the combined one equals α·eA − β·eA·S + A·eα − B·eα·S (the S-terms in
/// grad B and grad β cancel because S² + S = 2E). Its max-norm is therefore
/// bounded by (|α| + 3|β|)·|eA| + (|A| + 3|B|)·|eα|, which fixes the
/// reported amplification c = 1 + max(|α| + 3|β|) + max(|A| + 3|B|) over
/// the grid.
pub fn transform_consistency(
    a: &ScalarField,
    b: &ScalarField,
    alpha: &ScalarField,
    beta: &ScalarField,
    region: &Region,
    h: f64,
    tol: f64,
) -> Result<TransformConsistency> {
    let mut coupling_ab = 0.0f64;
    let mut coupling_alpha_beta = 0.0f64;
    for p in region.points() {
        let g = metric_at(a, b, p)?;
        if !g.is_positive_definite() {
            return Err(GeometryError::FieldPrecondition {
                point: p,
                a: g.a(),
                b: g.b(),
            });
        }
        let (al, be) = (alpha.eval(p)?, beta.eval(p)?);
        coupling_ab = coupling_ab.max(al.abs() + 3.0 * be.abs());
        coupling_alpha_beta = coupling_alpha_beta.max(g.a().abs() + 3.0 * g.b().abs());
    }

    let report_ab = check_condition(a, b, Rule::AB, region, h, tol)?;
    let report_alpha_beta = check_condition(alpha, beta, Rule::AlphaBeta, region, h, tol)?;
    let (a1, b1) = transformed_fields(a, b, alpha, beta);
    let report_combined = check_condition(&a1, &b1, Rule::Combined, region, h, tol)?;

    let amplification = 1.0 + coupling_ab + coupling_alpha_beta;
    let implied_tolerance = amplification * tol;
    let implication_holds =
        !(report_ab.pass && report_alpha_beta.pass) || report_combined.max_residual <= implied_tolerance;
    Ok(TransformConsistency {
        report_ab,
        report_alpha_beta,
        report_combined,
        amplification,
        implied_tolerance,
        implication_holds,
    })
}
