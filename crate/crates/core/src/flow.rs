//! Iterating the almost-conformal map: the metric sequence
//! g₀, g₁ = αg₀ + βf₀, g₂ = αg₁ + βf₁, … and the induced cosine sequence.
//!
//! For 0 < β < α every gₙ stays circulant and positive definite, and the
//! cosine of the angle between w and qw increases strictly to 1 unless it
//! starts at one of the two fixed points 1 or −1/2.

use crate::conformal::{almost_conformal, angle_update, ConformalParams};
use crate::error::{GeometryError, Result};
use crate::metric::{CirculantMetric, Vector3};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub g0: CirculantMetric,
    pub params: ConformalParams,
    /// Tangent vector for metric-side angle traces.
    pub w: Option<Vector3>,
    pub max_steps: usize,
    /// Stop once 1 − cos φₙ < epsilon.
    pub epsilon: f64,
    /// Rescale every gₙ by 1/(Aₙ + 2Bₙ). Angles are unaffected.
    pub normalize: bool,
}

impl FlowConfig {
    pub fn new(g0: CirculantMetric, params: ConformalParams) -> Self {
        Self {
            g0,
            params,
            w: None,
            max_steps: 100,
            epsilon: 1e-9,
            normalize: false,
        }
    }

    pub fn with_w(mut self, w: Vector3) -> Self {
        self.w = Some(w);
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(GeometryError::Config("max_steps must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(GeometryError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        self.params.admissible()?;
        if !self.g0.is_positive_definite() {
            return Err(GeometryError::NotPositiveDefinite {
                a: self.g0.a(),
                b: self.g0.b(),
            });
        }
        Ok(())
    }
}

/// The cosine sequence cos φ₀, cos φ₁, … and how it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTrace {
    pub cosines: Vec<f64>,
    pub converged: bool,
    pub steps_taken: usize,
    /// 1 − (last cosine).
    pub limit_gap: f64,
    /// The start was cos φ₀ = −1/2 (w in the plane x + y + z = 0), where the
    /// sequence is stationary and never approaches 1.
    pub on_invariant_plane: bool,
}

/// g₀ … g_{max_steps}. Fails if any gₙ is not positive definite.
pub fn iterate_metrics(cfg: &FlowConfig) -> Result<Vec<CirculantMetric>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.max_steps + 1);
    let mut g = cfg.g0;
    if cfg.normalize {
        g = normalized(g);
    }
    out.push(g);
    for step in 1..=cfg.max_steps {
        g = almost_conformal(&g, &cfg.params);
        if cfg.normalize {
            g = normalized(g);
        }
        let (plane, axis) = g.eigenvalues();
        if !plane.is_finite() || !axis.is_finite() {
            return Err(GeometryError::Overflow { step });
        }
        if !g.is_positive_definite() {
            return Err(GeometryError::PositivityLost {
                step,
                a: g.a(),
                b: g.b(),
            });
        }
        out.push(g);
    }
    Ok(out)
}

fn normalized(g: CirculantMetric) -> CirculantMetric {
    g.scaled(1.0 / g.eigenvalues().1)
}

/// Exactly `steps + 1` cosines starting from `cos0`, no early stop.
pub fn angle_sequence(cos0: f64, params: &ConformalParams, steps: usize) -> Result<Vec<f64>> {
    let params = params.admissible()?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut c = cos0;
    if !(-0.5..=1.0).contains(&c) {
        return Err(GeometryError::CosineOutOfRange(c));
    }
    out.push(c);
    for _ in 0..steps {
        c = angle_update(c, &params)?;
        out.push(c);
    }
    Ok(out)
}

/// Iterates cos φₙ until 1 − cos φₙ < `epsilon` or `max_steps` updates.
pub fn iterate_angle(cos0: f64, params: &ConformalParams, max_steps: usize, epsilon: f64) -> Result<AngleTrace> {
    let params = params.admissible()?;
    if max_steps == 0 {
        return Err(GeometryError::Config("max_steps must be at least 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(GeometryError::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(-0.5..=1.0).contains(&cos0) {
        return Err(GeometryError::CosineOutOfRange(cos0));
    }

    let mut cosines = vec![cos0];
    let mut c = cos0;
    let mut converged = 1.0 - c < epsilon;
    while !converged && cosines.len() <= max_steps {
        c = angle_update(c, &params)?;
        cosines.push(c);
        converged = 1.0 - c < epsilon;
    }
    Ok(AngleTrace {
        steps_taken: cosines.len() - 1,
        limit_gap: 1.0 - c,
        on_invariant_plane: cos0 == -0.5,
        converged,
        cosines,
    })
}

/// cos φₙ − cos φₙ₋₁ in closed form: β(1 − c)(1 + 2c)/(α + 2βc).
pub fn angle_difference(cos_prev: f64, params: &ConformalParams) -> f64 {
    let c = cos_prev;
    params.beta * (1.0 - c) * (1.0 + 2.0 * c) / (params.alpha + 2.0 * params.beta * c)
}

/// Largest |angle_cos(gₙ, w) − cₙ| where cₙ comes from the scalar recursion
/// started at angle_cos(g₀, w).
pub fn trace_deviation(metrics: &[CirculantMetric], w: Vector3, params: &ConformalParams) -> Result<f64> {
    let Some(first) = metrics.first() else {
        return Ok(0.0);
    };
    let scalar = angle_sequence(first.angle_cos(w)?, params, metrics.len() - 1)?;
    let mut worst = 0.0f64;
    for (g, c) in metrics.iter().zip(scalar) {
        worst = worst.max((g.angle_cos(w)? - c).abs());
    }
    Ok(worst)
}

/// Runs the metric sequence and the scalar recursion side by side and
/// returns their largest disagreement over all steps.
pub fn dual_trace_check(cfg: &FlowConfig) -> Result<f64> {
    let w = cfg
        .w
        .ok_or_else(|| GeometryError::Config("dual trace check needs a vector w".into()))?;
    let metrics = iterate_metrics(cfg)?;
    trace_deviation(&metrics, w, &cfg.params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base() -> FlowConfig {
        FlowConfig::new(CirculantMetric::new(2.0, 1.0), ConformalParams::new(2.0, 1.0))
    }

    // exact rational iteration of (β + (α+β)c)/(α + 2βc) with α=2, β=1:
    // c = p/q ↦ (q + 3p)/(2q + 2p)
    fn rational_trace(p0: i64, q0: i64, steps: usize) -> Vec<f64> {
        let (mut p, mut q) = (p0, q0);
        let mut out = vec![p as f64 / q as f64];
        for _ in 0..steps {
            let (np, nq) = (q + 3 * p, 2 * q + 2 * p);
            let g = gcd(np, nq);
            p = np / g;
            q = nq / g;
            out.push(p as f64 / q as f64);
        }
        out
    }

    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn unnormalized_growth_overflows_and_normalized_does_not() {
        let cfg = FlowConfig::new(CirculantMetric::new(2.0, 1.0), ConformalParams::new(10.0, 9.0)).with_max_steps(300);
        assert!(matches!(iterate_metrics(&cfg), Err(GeometryError::Overflow { .. })));
        // 28²⁵⁰ exceeds the f64 range; the normalized gap 28⁻²⁰⁰ does not underflow
        let gs = iterate_metrics(&cfg.clone().with_max_steps(200).with_normalize(true)).unwrap();
        assert!(matches!(
            iterate_metrics(&cfg.clone().with_max_steps(250)),
            Err(GeometryError::Overflow { step: 200..=220 })
        ));
        assert!(gs.iter().all(|g| g.is_positive_definite() && g.a().is_finite()));
    }

    #[test]
    fn metric_sequence_example() {
        let gs = iterate_metrics(&base().with_max_steps(2)).unwrap();
        assert_eq!(
            gs,
            vec![
                CirculantMetric::new(2.0, 1.0),
                CirculantMetric::new(6.0, 5.0),
                CirculantMetric::new(22.0, 21.0)
            ]
        );
    }

    #[test]
    fn identity_params_are_rejected_by_flow_but_constant_by_hand() {
        let cfg = FlowConfig::new(CirculantMetric::new(2.0, 1.0), ConformalParams::new(1.0, 0.0));
        assert!(matches!(
            iterate_metrics(&cfg),
            Err(GeometryError::InvalidParams { .. })
        ));
        let mut g = cfg.g0;
        for _ in 0..5 {
            g = almost_conformal(&g, &cfg.params);
            assert_eq!(g, cfg.g0);
        }
    }

    #[test]
    fn gap_contracts_geometrically() {
        let cfg = FlowConfig::new(CirculantMetric::new(3.0, 0.5), ConformalParams::new(1.5, 0.4)).with_max_steps(25);
        let gs = iterate_metrics(&cfg).unwrap();
        let (g0, p) = (cfg.g0, cfg.params);
        for (n, g) in gs.iter().enumerate() {
            assert!(g.is_positive_definite());
            let expected = (p.alpha - p.beta).powi(n as i32) * (g0.a() - g0.b());
            assert!((g.gap() - expected).abs() <= 1e-10 * expected.abs());
        }
    }

    #[test]
    fn config_validation() {
        assert!(base().with_max_steps(0).validate().is_err());
        assert!(base().with_epsilon(0.0).validate().is_err());
        assert!(base().with_epsilon(f64::NAN).validate().is_err());
        let mut cfg = base();
        cfg.params = ConformalParams::new(2.0, 3.0);
        assert!(matches!(cfg.validate(), Err(GeometryError::InvalidParams { .. })));
        let mut cfg = base();
        cfg.g0 = CirculantMetric::new(1.0, 2.0);
        assert!(matches!(cfg.validate(), Err(GeometryError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn angle_trace_example() {
        let p = ConformalParams::new(2.0, 1.0);
        let trace = iterate_angle(0.0, &p, 4, 1e-12).unwrap();
        let oracle = rational_trace(0, 1, 4);
        for (c, o) in trace.cosines.iter().zip(&oracle) {
            assert!((c - o).abs() < 1e-15);
        }
        let pinned = [0.0, 0.5, 0.833333, 0.954545, 0.988372];
        for (c, pin) in trace.cosines.iter().zip(pinned) {
            assert_eq!(format!("{c:.6}"), format!("{pin:.6}"));
        }
        assert!(!trace.converged);
        assert_eq!(trace.steps_taken, 4);
    }

    #[test]
    fn fixed_point_starts() {
        let p = ConformalParams::new(2.0, 1.0);
        let t = iterate_angle(1.0, &p, 10, 1e-9).unwrap();
        assert_eq!(t.cosines, vec![1.0]);
        assert!(t.converged);
        assert_eq!(t.steps_taken, 0);

        let t = iterate_angle(-0.5, &p, 10, 1e-9).unwrap();
        assert!(t.cosines.iter().all(|&c| c == -0.5));
        assert_eq!(t.cosines.len(), 11);
        assert!(!t.converged && t.on_invariant_plane);
        assert_eq!(t.limit_gap, 1.5);

        assert!(matches!(
            iterate_angle(-0.7, &p, 10, 1e-9),
            Err(GeometryError::CosineOutOfRange(_))
        ));
        assert!(matches!(
            iterate_angle(1.5, &p, 10, 1e-9),
            Err(GeometryError::CosineOutOfRange(_))
        ));
    }

    #[test]
    fn converges_within_pinned_step_counts() {
        let p = ConformalParams::new(2.0, 1.0);
        // observed counts for ε = 1e-9
        for (cos0, steps) in [(-0.49, 19), (0.0, 16), (0.5, 15), (0.9, 14)] {
            let t = iterate_angle(cos0, &p, 200, 1e-9).unwrap();
            assert!(t.converged);
            assert_eq!(t.steps_taken, steps, "cos0 = {cos0}");
            assert!(t.cosines.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn difference_examples() {
        let p = ConformalParams::new(2.0, 1.0);
        assert_eq!(angle_difference(0.0, &p), 0.5);
        assert_eq!(angle_difference(1.0, &p), 0.0);
        assert_eq!(angle_difference(-0.5, &p), 0.0);
    }

    #[test]
    fn difference_matches_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let alpha = rng.gen_range(0.1..10.0);
            let p = ConformalParams::new(alpha, alpha * rng.gen_range(0.01..0.99));
            let c = rng.gen_range(-0.5..=1.0);
            let lhs = angle_update(c, &p).unwrap() - c;
            assert!((lhs - angle_difference(c, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_trace_examples() {
        let cfg = base().with_w(Vector3::new(1.0, 0.0, 0.0)).with_max_steps(10);
        assert!(dual_trace_check(&cfg).unwrap() <= 1e-8);
        let plane = base().with_w(Vector3::new(1.0, -1.0, 0.0)).with_max_steps(10);
        assert!(dual_trace_check(&plane).unwrap() <= 1e-15);
        let single = [CirculantMetric::new(2.0, 1.0)];
        let p = ConformalParams::new(2.0, 1.0);
        assert_eq!(trace_deviation(&single, Vector3::new(1.0, 0.0, 0.0), &p).unwrap(), 0.0);
        assert!(matches!(dual_trace_check(&base()), Err(GeometryError::Config(_))));
        let fixed = base().with_w(Vector3::new(2.0, 2.0, 2.0));
        assert!(matches!(
            dual_trace_check(&fixed),
            Err(GeometryError::DegenerateVector(_))
        ));
    }

    #[test]
    fn normalization_preserves_angles() {
        let w = Vector3::new(0.7, -0.2, 1.3);
        let cfg = base().with_w(w).with_max_steps(60);
        let raw = iterate_metrics(&cfg).unwrap();
        let norm = iterate_metrics(&cfg.clone().with_normalize(true)).unwrap();
        for (a, b) in raw.iter().zip(&norm) {
            assert!((b.eigenvalues().1 - 1.0).abs() < 1e-12);
            assert!((a.angle_cos(w).unwrap() - b.angle_cos(w).unwrap()).abs() < 1e-12);
        }
        assert!(dual_trace_check(&cfg.with_normalize(true)).unwrap() <= 1e-8);
    }

    #[test]
    fn angle_trace_is_scale_invariant() {
        let w = Vector3::new(0.4, 1.1, -0.9);
        let p = ConformalParams::new(2.5, 0.7);
        let g0 = CirculantMetric::new(1.8, 0.6);
        let reference = angle_sequence(g0.angle_cos(w).unwrap(), &p, 30).unwrap();
        for lambda in [1e-3, 0.5, 7.0, 1e4] {
            let scaled = angle_sequence(g0.scaled(lambda).angle_cos(w).unwrap(), &p, 30).unwrap();
            for (a, b) in reference.iter().zip(&scaled) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
