//! Levi-Civita connection of a circulant metric field and the covariant
//! derivative of the affinor q.

use super::{gradient, metric_at, Point, Region, ScalarField};
use crate::error::{GeometryError, Result};
use crate::metric::{CirculantMetric, Q_MATRIX};

pub type ThreeIndex = [[[f64; 3]; 3]; 3];

const SINGULAR_TOL: f64 = 1e-12;

/// Γᵏᵢⱼ stored as `gamma[k][i][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub ThreeIndex);

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }
}

fn max_abs(t: &ThreeIndex) -> f64 {
    t.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn inverse_or_singular(g: &CirculantMetric, p: Point) -> Result<(f64, f64)> {
    let (l1, l2) = g.eigenvalues();
    let (a, b) = (g.a(), g.b());
    let scale = 1.0 + a.abs() + b.abs();
    if l1.abs() <= SINGULAR_TOL * scale || l2.abs() <= SINGULAR_TOL * scale {
        return Err(GeometryError::SingularMetric { point: p, a, b });
    }
    g.inverse_entries()
        .ok_or(GeometryError::SingularMetric { point: p, a, b })
}

/// ∂ₗ g_ij stored as `dg[l][i][j]`: ∂ₗA on the diagonal, ∂ₗB off it.
pub fn metric_derivatives(a: &ScalarField, b: &ScalarField, p: Point, h: f64) -> Result<ThreeIndex> {
    let da = gradient(a, p, h)?;
    let db = gradient(b, p, h)?;
    let mut dg = [[[0.0; 3]; 3]; 3];
    for (l, plane) in dg.iter_mut().enumerate() {
        for (i, row) in plane.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { da.0[l] } else { db.0[l] };
            }
        }
    }
    Ok(dg)
}

/// Γᵏᵢⱼ = ½ gᵏˡ (∂ᵢ g_jl + ∂ⱼ g_il − ∂ₗ g_ij), derivatives by central
/// differences with step `h`. Symmetric in (i, j) exactly.
pub fn christoffel(a: &ScalarField, b: &ScalarField, p: Point, h: f64) -> Result<Christoffel> {
    let g = metric_at(a, b, p)?;
    let (inv_d, inv_o) = inverse_or_singular(&g, p)?;
    let dg = metric_derivatives(a, b, p, h)?;

    // first kind: Γ_l,ij
    let mut first = [[[0.0; 3]; 3]; 3];
    for (l, plane) in first.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                plane[i][j] = 0.5 * ((dg[i][j][l] + dg[j][i][l]) - dg[l][i][j]);
            }
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for (k, plane) in gamma.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                plane[i][j] = (0..3)
                    .map(|l| if k == l { inv_d } else { inv_o } * first[l][i][j])
                    .sum();
            }
        }
    }
    Ok(Christoffel(gamma))
}

/// max |∇ₖ g_ij| with ∇ₖ g_ij = ∂ₖ g_ij − Γˡₖᵢ g_lj − Γˡₖⱼ g_il.
pub fn metric_compatibility_residual(a: &ScalarField, b: &ScalarField, p: Point, h: f64) -> Result<f64> {
    let gm = metric_at(a, b, p)?.matrix();
    let gamma = christoffel(a, b, p, h)?.0;
    let dg = metric_derivatives(a, b, p, h)?;
    let mut worst = 0.0f64;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let corr: f64 = (0..3)
                    .map(|l| gamma[l][k][i] * gm[l][j] + gamma[l][k][j] * gm[i][l])
                    .sum();
                worst = worst.max((dg[k][i][j] - corr).abs());
            }
        }
    }
    Ok(worst)
}

/// (∇ᵢ q)ⱼᵏ = Γᵏᵢₗ qⱼˡ − Γˡᵢⱼ qₗᵏ stored as `out[i][j][k]`; q is constant
/// so the partial-derivative term drops out.
pub fn nabla_q(a: &ScalarField, b: &ScalarField, p: Point, h: f64) -> Result<ThreeIndex> {
    let gamma = christoffel(a, b, p, h)?.0;
    let q = &Q_MATRIX;
    let mut out = [[[0.0; 3]; 3]; 3];
    for (i, plane) in out.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let transported: f64 = (0..3).map(|l| gamma[k][i][l] * q[j][l]).sum();
                let moved: f64 = (0..3).map(|l| gamma[l][i][j] * q[l][k]).sum();
                *v = transported - moved;
            }
        }
    }
    Ok(out)
}

/// |∇q| over a grid. Points where the metric is singular are skipped and
/// listed; every other failure aborts.
#[derive(Debug, Clone, PartialEq)]
pub struct NablaSweep {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub worst_point: Option<Point>,
    pub evaluated: usize,
    pub singular_points: Vec<Point>,
}

impl NablaSweep {
    pub fn passes(&self, tol: f64) -> bool {
        self.evaluated > 0 && self.max_abs <= tol
    }
}

pub fn nabla_q_sweep(a: &ScalarField, b: &ScalarField, region: &Region, h: f64) -> Result<NablaSweep> {
    let mut max_abs_v = 0.0f64;
    let mut sum = 0.0;
    let mut worst_point = None;
    let mut evaluated = 0;
    let mut singular_points = Vec::new();
    for p in region.points() {
        match nabla_q(a, b, p, h) {
            Ok(t) => {
                let m = max_abs(&t);
                if worst_point.is_none() || m > max_abs_v {
                    max_abs_v = m;
                    worst_point = Some(p);
                }
                sum += m;
                evaluated += 1;
            }
            Err(GeometryError::SingularMetric { point, .. }) => singular_points.push(point),
            Err(e) => return Err(e),
        }
    }
    Ok(NablaSweep {
        max_abs: max_abs_v,
        mean_abs: if evaluated > 0 { sum / evaluated as f64 } else { 0.0 },
        worst_point,
        evaluated,
        singular_points,
    })
}
