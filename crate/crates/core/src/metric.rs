//! Symmetric circulant metrics on R³ and the cyclic affinor q.
//!
//! A metric is the 3×3 matrix with A on the diagonal and B everywhere else.
//! Its eigenvalues are A − B (twice) and A + 2B, which gives the exact
//! positive-definiteness test.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{GeometryError, Result};

/// The affinor q_i^j as displayed: row i, column j.
pub const Q_MATRIX: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];

/// The structure S = J − 2E (J all-ones).
pub const S_MATRIX: [[f64; 3]; 3] = [[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]];

/// S·S = 4E − J.
pub const S_SQUARED: [[f64; 3]; 3] = [[3.0, -1.0, -1.0], [-1.0, 3.0, -1.0], [-1.0, -1.0, 3.0]];

/// Relative distance from the line spanned by (1,1,1) below which a vector
/// counts as q-fixed.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A tangent vector w = (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vector3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn component_sum(self) -> f64 {
        self.x + self.y + self.z
    }

    /// The cyclic shift (x, y, z) ↦ (y, z, x).
    ///
    /// This is the plain matrix-vector product of [`Q_MATRIX`] with the
    /// column of components, so (1, 0, 0) ↦ (0, 0, 1). Three applications
    /// return the original vector bit for bit.
    pub fn q_apply(self) -> Vector3 {
        Vector3::new(self.y, self.z, self.x)
    }

    /// True when qw = w up to [`DEGENERACY_TOL`], i.e. w is (numerically) a
    /// multiple of (1, 1, 1). The zero vector counts as degenerate.
    pub fn is_q_fixed(self) -> bool {
        let norm = self.norm();
        if norm == 0.0 {
            return true;
        }
        let mean = self.component_sum() / 3.0;
        let off_line = (self - Vector3::new(mean, mean, mean)).norm();
        off_line <= DEGENERACY_TOL * norm
    }
}

impl From<[f64; 3]> for Vector3 {
    fn from(a: [f64; 3]) -> Self {
        Vector3::new(a[0], a[1], a[2])
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<Vector3> for f64 {
    type Output = Vector3;
    fn mul(self, v: Vector3) -> Vector3 {
        Vector3::new(self * v.x, self * v.y, self * v.z)
    }
}

/// A symmetric circulant metric with diagonal A and off-diagonal B.
///
/// Stored by its eigenvalues: A − B on the plane x + y + z = 0 (multiplicity
/// two) and A + 2B along (1, 1, 1). The almost-conformal map scales each of
/// them by a constant factor, so this keeps A − B resolvable long after it
/// has dropped below the rounding level of A itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculantMetric {
    lambda_plane: f64,
    lambda_axis: f64,
}

impl CirculantMetric {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            lambda_plane: a - b,
            lambda_axis: a + 2.0 * b,
        }
    }

    /// From the eigenvalues A − B and A + 2B.
    pub const fn from_eigenvalues(lambda_plane: f64, lambda_axis: f64) -> Self {
        Self {
            lambda_plane,
            lambda_axis,
        }
    }

    /// Diagonal entry A.
    pub fn a(&self) -> f64 {
        (self.lambda_axis + 2.0 * self.lambda_plane) / 3.0
    }

    /// Off-diagonal entry B.
    pub fn b(&self) -> f64 {
        (self.lambda_axis - self.lambda_plane) / 3.0
    }

    /// A − B, without cancellation.
    pub fn gap(&self) -> f64 {
        self.lambda_plane
    }

    /// (A − B, A + 2B).
    pub fn eigenvalues(&self) -> (f64, f64) {
        (self.lambda_plane, self.lambda_axis)
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        circulant_matrix(self.a(), self.b())
    }

    /// uᵀ·g·v.
    pub fn bilinear(&self, u: Vector3, v: Vector3) -> f64 {
        // A·(u·v) + B·(sum of cross terms u_i v_j, i ≠ j)
        let diag = u.dot(v);
        let cross = u.component_sum() * v.component_sum() - diag;
        self.a() * diag + self.b() * cross
    }

    /// Exact criterion: both eigenvalues A − B and A + 2B are positive.
    pub fn is_positive_definite(&self) -> bool {
        self.lambda_plane > 0.0 && self.lambda_axis > 0.0
    }

    /// The sufficient condition 0 < B < A. Implies [`Self::is_positive_definite`].
    pub fn is_strictly_ordered(&self) -> bool {
        let b = self.b();
        0.0 < b && self.lambda_plane > 0.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_eigenvalues(factor * self.lambda_plane, factor * self.lambda_axis)
    }

    pub fn determinant(&self) -> f64 {
        self.lambda_plane * self.lambda_plane * self.lambda_axis
    }

    /// Diagonal and off-diagonal entries of g⁻¹, itself circulant:
    /// ((A+B)/D, −B/D) with D = (A−B)(A+2B). `None` if g is singular.
    pub fn inverse_entries(&self) -> Option<(f64, f64)> {
        let d = self.lambda_plane * self.lambda_axis;
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(((self.a() + self.b()) / d, -self.b() / d))
    }

    /// cos φ for the g-angle between w and qw, i.e. g(w, qw) / g(w, w).
    ///
    /// With d = ½Σ(xᵢ − xⱼ)² and σ = x + y + z this is
    /// 1 − 3(A−B)d / (2(A−B)d + (A+2B)σ²), which lies in [−1/2, 1) and is
    /// −1/2 exactly when σ = 0. Rounding excursions are clamped.
    pub fn angle_cos(&self, w: Vector3) -> Result<f64> {
        if !self.is_positive_definite() {
            return Err(GeometryError::NotPositiveDefinite {
                a: self.a(),
                b: self.b(),
            });
        }
        if w.is_q_fixed() {
            return Err(GeometryError::DegenerateVector(format!(
                "w = ({}, {}, {}) satisfies qw = w",
                w.x, w.y, w.z
            )));
        }
        let d = ((w.x - w.y).powi(2) + (w.y - w.z).powi(2) + (w.z - w.x).powi(2)) / 2.0;
        let sigma = w.component_sum();
        let plane = self.lambda_plane * d;
        let c = 1.0 - 3.0 * plane / (2.0 * plane + self.lambda_axis * sigma * sigma);
        Ok(c.clamp(-0.5, 1.0))
    }

    /// |g(qu, qv) − g(u, v)|.
    pub fn q_isometry_residual(&self, u: Vector3, v: Vector3) -> f64 {
        (self.bilinear(u.q_apply(), v.q_apply()) - self.bilinear(u, v)).abs()
    }
}

pub(crate) fn circulant_matrix(diag: f64, off: f64) -> [[f64; 3]; 3] {
    let mut m = [[off; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = diag;
    }
    m
}
