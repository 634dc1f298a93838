use serde::{Deserialize, Serialize};

use crate::designs::{build_sampler, points_for_order, DesignSampler, SamplerDescription};
use crate::error::{param, Result};

/// Largest number of blended designs `plan` produces without an explicit cap.
pub const MAX_ELL: u64 = 1 << 32;

/// Parameters a caller supplies; everything else in [`GeneratorConfig`] is derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_cap: Option<usize>,
    /// Replaces `10 d (3k + 3)`; such configurations are marked non-normative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_order: Option<usize>,
}

impl PlanRequest {
    pub fn plan(&self) -> Result<GeneratorConfig> {
        plan_with(self)
    }
}

/// Fully derived generator parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub epsilon: f64,
    /// `epsilon^{1/3}`, the blend parameter.
    pub delta: f64,
    /// Number of blended designs actually used.
    pub ell: usize,
    /// `ceil(delta^-2 ln(epsilon^{-k(2d+1)}))` before any cap.
    pub ell_formula: u64,
    pub ell_cap: Option<usize>,
    /// Set when the cap cut `ell` below the formula value.
    pub truncated: bool,
    /// Moments matched by each design.
    pub design_order: usize,
    /// False when `design_order` was overridden.
    pub normative: bool,
    pub quadrature_points: usize,
    /// Independence order `K` of the field family, equal to `design_order`.
    pub independence: usize,
    /// Per-coordinate statistical-distance budget `epsilon^k / (n l)`.
    pub tv_budget: f64,
    /// Shared by all `ell` designs.
    pub sampler: SamplerDescription,
    /// Bit offset of each design's seed inside one master bitstream.
    pub seed_offsets: Vec<u64>,
}

impl GeneratorConfig {
    pub fn sampler(&self) -> Result<DesignSampler<f64>> {
        self.sampler.to_sampler()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `10 d (3k + 3)`.
pub fn theorem_design_order(d: u32, k: u32) -> usize {
    10 * d as usize * (3 * k as usize + 3)
}

/// `ceil(delta^-2 ln(epsilon^{-k(2d+1)}))` with `delta = epsilon^{1/3}`.
pub fn ell_formula(eps: f64, d: u32, k: u32) -> f64 {
    let delta = eps.cbrt();
    let log_term = (k as f64) * (2.0 * d as f64 + 1.0) * (1.0 / eps).ln();
    (log_term / (delta * delta)).ceil()
}

pub fn plan(
    n: usize,
    d: u32,
    k: u32,
    epsilon: f64,
    ell_cap: Option<usize>,
) -> Result<GeneratorConfig> {
    plan_with(&PlanRequest {
        n,
        d,
        k,
        epsilon,
        ell_cap,
        design_order: None,
    })
}

fn plan_with(req: &PlanRequest) -> Result<GeneratorConfig> {
    let PlanRequest {
        n,
        d,
        k,
        epsilon,
        ell_cap,
        design_order,
    } = *req;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(param(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if n == 0 || d == 0 || k == 0 {
        return Err(param("n, d and k must all be positive"));
    }
    if ell_cap == Some(0) {
        return Err(param("ell cap must be positive"));
    }
    let delta = epsilon.cbrt();
    let formula = ell_formula(epsilon, d, k).max(1.0);
    if !formula.is_finite() || (formula > MAX_ELL as f64 && ell_cap.is_none()) {
        return Err(param(format!("ell = {formula} overflows; set an ell cap")));
    }
    let ell_formula = formula.min(u64::MAX as f64) as u64;
    let ell = match ell_cap {
        Some(cap) => (cap as u64).min(ell_formula) as usize,
        None => ell_formula as usize,
    };
    let truncated = (ell as u64) < ell_formula;

    let normative = design_order.is_none();
    let design_order = design_order.unwrap_or_else(|| theorem_design_order(d, k));
    if design_order == 0 {
        return Err(param("design order must be positive"));
    }
    let quadrature_points = points_for_order(design_order);
    let independence = design_order;
    let tv_budget = epsilon.powi(k as i32) / (n as f64 * ell as f64);
    let sampler = build_sampler::<f64>(quadrature_points, independence, n, tv_budget)?;
    let stride = sampler.stream_bits();
    let seed_offsets = (0..ell as u64).map(|i| i * stride).collect();

    Ok(GeneratorConfig {
        n,
        d,
        k,
        epsilon,
        delta,
        ell,
        ell_formula,
        ell_cap,
        truncated,
        design_order,
        normative,
        quadrature_points,
        independence,
        tv_budget,
        sampler: sampler.description(),
        seed_offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_from_formula() {
        assert_eq!(ell_formula(0.001, 1, 2), 4145.0);
        let c = plan(4, 1, 2, 0.001, None).unwrap();
        assert_eq!(c.ell, 4145);
        assert!((c.delta - 0.1).abs() < 1e-15);
    }

    #[test]
    fn design_order_arithmetic() {
        assert_eq!(theorem_design_order(1, 2), 90);
        assert_eq!(theorem_design_order(2, 1), 120);
    }

    #[test]
    fn derived_fields() {
        let c = plan(8, 1, 2, 0.25, Some(200)).unwrap();
        assert!((c.delta.powi(3) - c.epsilon).abs() < 1e-12);
        assert_eq!(c.design_order, 90);
        assert_eq!(c.quadrature_points, 46);
        assert_eq!(c.independence, 90);
        assert_eq!(c.ell as f64, ell_formula(0.25, 1, 2));
        assert!(!c.truncated);
        assert!(c.normative);
        assert_eq!(c.seed_offsets.len(), c.ell);
        let tv = c.sampler().unwrap().tv_bound();
        assert!(tv <= c.tv_budget);
    }

    #[test]
    fn cap_semantics() {
        let c = plan(4, 1, 1, 0.01, Some(10)).unwrap();
        assert_eq!(c.ell, 10);
        assert!(c.truncated);
        assert!(c.ell_formula > 10);
    }

    #[test]
    fn overflow_without_cap() {
        assert!(plan(4, 1, 1, 1e-12, None).is_err());
        assert!(plan(4, 1, 1, 1e-12, Some(3)).is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(plan(4, 1, 1, 0.0, None).is_err());
        assert!(plan(4, 1, 1, 1.0, None).is_err());
        assert!(plan(0, 1, 1, 0.5, None).is_err());
        assert!(plan(4, 0, 1, 0.5, None).is_err());
        assert!(plan(4, 1, 1, 0.5, Some(0)).is_err());
        // 10 * 2 * 9 = 180 moments needs more than 64 quadrature points
        assert!(plan(4, 2, 2, 0.5, Some(2)).is_err());
    }

    #[test]
    fn order_override_is_flagged() {
        let req = PlanRequest {
            n: 3,
            d: 2,
            k: 2,
            epsilon: 0.5,
            ell_cap: None,
            design_order: Some(8),
        };
        let c = req.plan().unwrap();
        assert!(!c.normative);
        assert_eq!(c.quadrature_points, 5);
        assert_eq!(c.independence, 8);
    }

    #[test]
    fn config_json_round_trip() {
        let c = plan(3, 1, 1, 0.5, None).unwrap();
        let back: GeneratorConfig = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
