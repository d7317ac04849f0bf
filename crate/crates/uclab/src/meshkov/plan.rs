//! Chaining plan: the sequence of annuli [ρ_j, ρ_j + 7ρ_j^{3/7}] with the
//! degree bookkeeping n_j = ⌊ρ_j^{8/7}⌋, k_j = n_{j+1} - n_j, and the
//! cumulative log-amplitude offsets that keep |u| continuous across
//! interfaces.
//!
//! The degree law n_j = ⌊ρ_j^{8/7}⌋ is the only reading under which the
//! step increment k_j tracks 8ρ_j^{4/7} (the recurrence gives
//! ρ_{j+1}^{8/7} - ρ_j^{8/7} = 8ρ_j^{4/7} + 4 + O(ρ^{-4/7})), which the
//! plan invariant |k_j - 8ρ_j^{4/7}| ≤ 6 encodes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("initial radius must be at least 200, got {0}")]
    RadiusTooSmall(f64),
    #[error("r_max = {r_max} does not exceed the initial radius {rho1}")]
    EmptyRange { rho1: f64, r_max: f64 },
    #[error("degree increment k_{j} = {k} fails the tracking bound |k - 8 rho^(4/7)| <= 6 (rho = {rho})")]
    StepBound { j: usize, k: i64, rho: f64 },
    #[error("degree increment k_{j} = {k} must be at least 1 (rho = {rho})")]
    StepTooSmall { j: usize, k: i64, rho: f64 },
}

/// One annulus of the chain.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AnnulusEntry {
    pub rho: f64,
    pub n: i64,
    pub k: i64,
    /// log of the amplitude constant carried into this annulus, so that the
    /// inner band evaluates to exp(log_a) r^{-n} e^{-inφ}.
    pub log_a: f64,
}

impl AnnulusEntry {
    pub fn width_scale(&self) -> f64 {
        self.rho.powf(3.0 / 7.0)
    }
    pub fn outer_radius(&self) -> f64 {
        self.rho + 7.0 * self.width_scale()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusPlan {
    pub rho1: f64,
    pub r_max: f64,
    pub entries: Vec<AnnulusEntry>,
}

/// Log of the outgoing amplitude factor of one annulus: the modulus-matching
/// constants of the three internal transitions combine to
/// k·(4 ln r₃ - 2 ln r₁* - ln r₄*) with r₁* = ρ+W, r₃ = ρ+3W, r₄* = ρ+5.5W.
pub fn annulus_amplitude_log(rho: f64, k: i64) -> f64 {
    let w = rho.powf(3.0 / 7.0);
    let kf = k as f64;
    -2.0 * kf * (rho + w).ln() + 4.0 * kf * (rho + 3.0 * w).ln() - kf * (rho + 5.5 * w).ln()
}

/// Builds the chain from ρ₁ out to (at least) r_max.
pub fn plan_annuli(rho1: f64, r_max: f64) -> Result<AnnulusPlan, PlanError> {
    if rho1 < 200.0 {
        return Err(PlanError::RadiusTooSmall(rho1));
    }
    if r_max <= rho1 {
        return Err(PlanError::EmptyRange { rho1, r_max });
    }
    let degree = |rho: f64| rho.powf(8.0 / 7.0).floor() as i64;
    let mut entries = Vec::new();
    let mut rho = rho1;
    let mut log_a = 0.0;
    let mut j = 0usize;
    loop {
        let n = degree(rho);
        let rho_next = rho + 7.0 * rho.powf(3.0 / 7.0);
        let k = degree(rho_next) - n;
        if k < 1 {
            return Err(PlanError::StepTooSmall { j, k, rho });
        }
        if (k as f64 - 8.0 * rho.powf(4.0 / 7.0)).abs() > 6.0 {
            return Err(PlanError::StepBound { j, k, rho });
        }
        entries.push(AnnulusEntry { rho, n, k, log_a });
        log_a += annulus_amplitude_log(rho, k);
        if rho_next >= r_max {
            break;
        }
        rho = rho_next;
        j += 1;
    }
    Ok(AnnulusPlan { rho1, r_max, entries })
}

impl AnnulusPlan {
    pub fn outer_radius(&self) -> f64 {
        self.entries.last().map(|e| e.outer_radius()).unwrap_or(self.rho1)
    }

    /// Index of the annulus containing radius r.
    pub fn locate(&self, r: f64) -> Option<usize> {
        if r < self.rho1 || r > self.outer_radius() {
            return None;
        }
        let mut idx = 0;
        for (i, e) in self.entries.iter().enumerate() {
            if r >= e.rho {
                idx = i;
            } else {
                break;
            }
        }
        Some(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recurrence_is_exact() {
        let plan = plan_annuli(200.0, 5000.0).unwrap();
        assert_relative_eq!(
            plan.entries[1].rho,
            200.0 + 7.0 * 200.0_f64.powf(3.0 / 7.0),
            max_relative = 1e-15
        );
        for pair in plan.entries.windows(2) {
            assert_eq!(pair[1].rho, pair[0].outer_radius());
        }
        assert!(plan.outer_radius() >= 5000.0);
    }

    #[test]
    fn degree_increments_track_the_width_law() {
        let plan = plan_annuli(200.0, 5000.0).unwrap();
        for e in &plan.entries {
            let dev = (e.k as f64 - 8.0 * e.rho.powf(4.0 / 7.0)).abs();
            assert!(dev <= 6.0, "rho = {}: deviation {dev}", e.rho);
            assert!(e.k >= 1);
        }
        // increments are consistent with the degree ladder by construction
        for pair in plan.entries.windows(2) {
            assert_eq!(pair[0].n + pair[0].k, pair[1].n);
        }
    }

    #[test]
    fn rejects_small_radius_and_empty_range() {
        assert!(matches!(plan_annuli(100.0, 500.0), Err(PlanError::RadiusTooSmall(_))));
        assert!(matches!(
            plan_annuli(300.0, 250.0),
            Err(PlanError::EmptyRange { .. })
        ));
    }

    #[test]
    fn locate_finds_the_right_annulus() {
        let plan = plan_annuli(200.0, 2000.0).unwrap();
        assert_eq!(plan.locate(199.0), None);
        assert_eq!(plan.locate(200.0), Some(0));
        let r1 = plan.entries[1].rho;
        assert_eq!(plan.locate(r1 + 0.1), Some(1));
        assert_eq!(plan.locate(plan.outer_radius() + 1.0), None);
    }

    #[test]
    fn amplitude_offsets_accumulate() {
        let plan = plan_annuli(200.0, 1000.0).unwrap();
        assert_eq!(plan.entries[0].log_a, 0.0);
        let mut acc = 0.0;
        for pair in plan.entries.windows(2) {
            acc += annulus_amplitude_log(pair[0].rho, pair[0].k);
            assert_relative_eq!(pair[1].log_a, acc, max_relative = 1e-14);
        }
    }
}
