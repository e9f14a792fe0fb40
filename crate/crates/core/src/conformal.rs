//! The associated metric f and the almost-conformal map g ↦ αg + βf.
//!
//! f_ij = g_ik q_j^k + g_jk q_i^k is again circulant, with diagonal 2B and
//! off-diagonal A + B. Mixing it into g keeps the metric circulant, and the
//! angle between w and qw transforms by a Möbius map on cos φ that does not
//! depend on w.

use crate::error::{GeometryError, Result};
use crate::metric::{circulant_matrix, CirculantMetric, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ConformalParams {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// 0 < β < α, the range in which positivity and convergence hold.
    pub fn is_admissible(&self) -> bool {
        0.0 < self.beta && self.beta < self.alpha
    }

    pub fn admissible(self) -> Result<Self> {
        if self.is_admissible() {
            Ok(self)
        } else {
            Err(GeometryError::InvalidParams {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }
}

/// The circulant form f built from g and q. Kept apart from
/// [`CirculantMetric`] because f is indefinite whenever 0 < B < A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociatedMetric {
    pub diag: f64,
    pub offdiag: f64,
}

impl AssociatedMetric {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        circulant_matrix(self.diag, self.offdiag)
    }
}

pub fn f_metric(g: &CirculantMetric) -> AssociatedMetric {
    AssociatedMetric {
        diag: 2.0 * g.b(),
        offdiag: g.a() + g.b(),
    }
}

/// det f = 2(A − B)²(A + 2B).
pub fn f_determinant(g: &CirculantMetric) -> f64 {
    let (plane, axis) = g.eigenvalues();
    2.0 * plane * plane * axis
}

/// g₁ = αg + βf, i.e. A₁ = αA + 2βB and B₁ = βA + (α+β)B.
///
/// In eigenvalues this reads A₁ − B₁ = (α − β)(A − B) and
/// A₁ + 2B₁ = (α + 2β)(A + 2B), which is how it is applied.
pub fn almost_conformal(g: &CirculantMetric, p: &ConformalParams) -> CirculantMetric {
    let (plane, axis) = g.eigenvalues();
    CirculantMetric::from_eigenvalues((p.alpha - p.beta) * plane, (p.alpha + 2.0 * p.beta) * axis)
}

pub fn transformed_is_positive_definite(g: &CirculantMetric, p: &ConformalParams) -> bool {
    almost_conformal(g, p).is_positive_definite()
}

/// (g₁(w, w), g₁(w, qw)) computed from the g-forms alone.
pub fn transformed_inner_products(g: &CirculantMetric, p: &ConformalParams, w: Vector3) -> (f64, f64) {
    let ww = g.bilinear(w, w);
    let wqw = g.bilinear(w, w.q_apply());
    (
        p.alpha * ww + 2.0 * p.beta * wqw,
        p.beta * ww + (p.alpha + p.beta) * wqw,
    )
}

/// cos φ₁ = (β + (α+β)·c) / (α + 2β·c) for c = cos φ.
///
/// Evaluated as 1 − (1 − c)(α − β)/(α + 2βc), which is algebraically the
/// same and keeps both fixed points c = 1 and c = −1/2 exact in floating
/// point. Accepts c ∈ [−1/2, 1].
pub fn angle_update(cos_phi: f64, p: &ConformalParams) -> Result<f64> {
    if !(-0.5..=1.0).contains(&cos_phi) {
        return Err(GeometryError::CosineOutOfRange(cos_phi));
    }
    let denom = p.alpha + 2.0 * p.beta * cos_phi;
    if denom == 0.0 {
        return Err(GeometryError::InvalidParams {
            alpha: p.alpha,
            beta: p.beta,
        });
    }
    let next = 1.0 - (1.0 - cos_phi) * ((p.alpha - p.beta) / denom);
    // the map sends [-1/2, 1] into itself whenever 0 < β < α
    Ok(if p.is_admissible() { next.clamp(-0.5, 1.0) } else { next })
}

/// The angle φ (radians) that becomes a right angle under g₁: arccos(−β/(α+β)).
pub fn right_angle_preimage(p: &ConformalParams) -> Result<f64> {
    let p = p.admissible()?;
    Ok((-p.beta / (p.alpha + p.beta)).acos())
}

/// The g₁-angle of a pair that is orthogonal under g: arccos(β/α).
pub fn right_angle_image(p: &ConformalParams) -> Result<f64> {
    let p = p.admissible()?;
    Ok((p.beta / p.alpha).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Q_MATRIX;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // f_ij = g_ik q_j^k + g_jk q_i^k, with q_j^k = Q_MATRIX[j][k]
    fn contracted_f(g: &CirculantMetric) -> [[f64; 3]; 3] {
        let gm = g.matrix();
        let mut f = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                f[i][j] = (0..3)
                    .map(|k| gm[i][k] * Q_MATRIX[j][k] + gm[j][k] * Q_MATRIX[i][k])
                    .sum();
            }
        }
        f
    }

    fn cofactor_det(m: &[[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn random_params(rng: &mut ChaCha8Rng) -> ConformalParams {
        let alpha = rng.gen_range(0.05..10.0);
        ConformalParams::new(alpha, alpha * rng.gen_range(0.01..0.99))
    }

    fn random_pd(rng: &mut ChaCha8Rng) -> CirculantMetric {
        let b = rng.gen_range(0.01..5.0);
        CirculantMetric::new(b + rng.gen_range(0.01..5.0), b)
    }

    #[test]
    fn f_metric_matches_contraction() {
        let g = CirculantMetric::new(2.0, 1.0);
        let f = f_metric(&g);
        assert_eq!((f.diag, f.offdiag), (2.0, 3.0));
        assert_eq!(f.matrix(), contracted_f(&g));
        let f = f_metric(&CirculantMetric::new(1.0, 0.0));
        assert_eq!((f.diag, f.offdiag), (0.0, 1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let g = CirculantMetric::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let c = contracted_f(&g);
            assert_eq!(f_metric(&g).matrix(), c);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(c[i][j], c[j][i]);
                }
            }
        }
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(cofactor_det(&[[2.0, 3.0, 3.0], [3.0, 2.0, 3.0], [3.0, 3.0, 2.0]]), 8.0);
        assert_eq!(f_determinant(&CirculantMetric::new(2.0, 1.0)), 8.0);
        assert_eq!(f_determinant(&CirculantMetric::new(1.0, 1.0)), 0.0);
        assert_eq!(f_determinant(&CirculantMetric::new(3.0, 1.0)), 40.0);
        let g = CirculantMetric::new(3.0, 1.0);
        assert_eq!(cofactor_det(&f_metric(&g).matrix()), 40.0);
    }

    #[test]
    fn almost_conformal_examples() {
        let g = CirculantMetric::new(2.0, 1.0);
        assert_eq!(
            almost_conformal(&g, &ConformalParams::new(2.0, 1.0)),
            CirculantMetric::new(6.0, 5.0)
        );
        assert_eq!(
            almost_conformal(&g, &ConformalParams::new(3.0, 0.0)),
            CirculantMetric::new(6.0, 3.0)
        );
        assert_eq!(almost_conformal(&g, &ConformalParams::new(1.0, 0.0)), g);
    }

    #[test]
    fn almost_conformal_equals_entrywise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let g = CirculantMetric::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let p = ConformalParams::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let (gm, fm) = (g.matrix(), contracted_f(&g));
            let g1 = almost_conformal(&g, &p).matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let direct = p.alpha * gm[i][j] + p.beta * fm[i][j];
                    assert!((g1[i][j] - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
                }
            }
        }
    }

    #[test]
    fn transformed_positivity() {
        let g = CirculantMetric::new(2.0, 1.0);
        let p = ConformalParams::new(2.0, 1.0);
        assert!(transformed_is_positive_definite(&g, &p));
        let g1 = almost_conformal(&g, &p);
        assert_eq!(g1.a() - g1.b(), (p.alpha - p.beta) * (g.a() - g.b()));
        assert!(!transformed_is_positive_definite(&g, &ConformalParams::new(1.0, 1.0)));
    }

    #[test]
    fn inner_products_examples() {
        let g = CirculantMetric::new(2.0, 1.0);
        let p = ConformalParams::new(2.0, 1.0);
        assert_eq!(
            transformed_inner_products(&g, &p, Vector3::new(1.0, 0.0, 0.0)),
            (6.0, 5.0)
        );
        assert_eq!(transformed_inner_products(&g, &p, Vector3::default()), (0.0, 0.0));
        let w = Vector3::new(0.3, -1.2, 2.0);
        let classical = ConformalParams::new(1.7, 0.0);
        let (ww, wqw) = transformed_inner_products(&g, &classical, w);
        assert_eq!(ww, 1.7 * g.bilinear(w, w));
        assert_eq!(wqw, 1.7 * g.bilinear(w, w.q_apply()));
    }

    #[test]
    fn inner_products_match_direct_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let g = random_pd(&mut rng);
            let p = random_params(&mut rng);
            let w = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let g1 = almost_conformal(&g, &p);
            let (ww, wqw) = transformed_inner_products(&g, &p, w);
            let dww = g1.bilinear(w, w);
            let dwqw = g1.bilinear(w, w.q_apply());
            // tolerance relative to the size of the summed terms
            let scale = 1.0 + (g1.a().abs() + 2.0 * g1.b().abs()) * w.dot(w);
            assert!((ww - dww).abs() <= 1e-12 * scale);
            assert!((wqw - dwqw).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn angle_update_examples() {
        let p = ConformalParams::new(2.0, 1.0);
        assert!((angle_update(0.0, &p).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(angle_update(1.0, &p).unwrap(), 1.0);
        assert_eq!(angle_update(-0.5, &p).unwrap(), -0.5);
        assert!(matches!(
            angle_update(-0.6, &p),
            Err(GeometryError::CosineOutOfRange(_))
        ));
        assert!(matches!(angle_update(1.1, &p), Err(GeometryError::CosineOutOfRange(_))));
        assert!(angle_update(f64::NAN, &p).is_err());
    }

    #[test]
    fn angle_update_agrees_with_literal_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let c = rng.gen_range(-0.5..1.0);
            let literal = (p.beta + (p.alpha + p.beta) * c) / (p.alpha + 2.0 * p.beta * c);
            assert!((angle_update(c, &p).unwrap() - literal).abs() < 1e-12);
        }
    }

    #[test]
    fn angle_update_matches_transformed_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let g = random_pd(&mut rng);
            let p = random_params(&mut rng);
            let w = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            if w.is_q_fixed() {
                continue;
            }
            let direct = almost_conformal(&g, &p).angle_cos(w).unwrap();
            let via_update = angle_update(g.angle_cos(w).unwrap(), &p).unwrap();
            assert!((direct - via_update).abs() < 1e-10);
        }
    }

    #[test]
    fn angle_update_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let c = rng.gen_range(-0.49..0.99);
            let next = angle_update(c, &p).unwrap();
            assert!(next > c && (-0.5..1.0).contains(&next));
        }
    }

    #[test]
    fn right_angle_corollaries() {
        let p = ConformalParams::new(2.0, 1.0);
        let phi = right_angle_preimage(&p).unwrap();
        assert!((phi - (-1.0f64 / 3.0).acos()).abs() < 1e-15);
        assert!((phi - 1.910633236249019).abs() < 1e-12);
        assert!(angle_update(phi.cos(), &p).unwrap().abs() < 1e-12);
        let p3 = ConformalParams::new(3.0, 1.0);
        assert!((right_angle_preimage(&p3).unwrap() - (-0.25f64).acos()).abs() < 1e-15);
        let tiny = ConformalParams::new(1.0, 1e-12);
        assert!((right_angle_preimage(&tiny).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
        assert!(right_angle_preimage(&ConformalParams::new(1.0, 0.0)).is_err());
        assert!(right_angle_preimage(&ConformalParams::new(1.0, 1.0)).is_err());
        assert!((right_angle_image(&p).unwrap() - 0.5f64.acos()).abs() < 1e-15);
    }
}
