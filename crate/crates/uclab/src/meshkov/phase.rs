//! The periodic phase rearrangement Φ used by the middle piece of each
//! annulus: affine with slope -4k on plateaus around φ_m = mT, T = π/(n+k),
//! and a smoothstep compensation on the gaps so that Φ is exactly T-periodic
//! (hence 2π-periodic: the full phase F = (n+2k)φ + Φ stays single-valued).

use super::bump::smoothstep_rjet;
use crate::jets::RJet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("plateau construction needs n, k >= 1, got n = {0}, k = {1}")]
    BadDegrees(i64, i64),
    #[error("derivative bound exceeded at order {order}: measured constant {measured:.3} > {budget:.3}")]
    BoundViolation { order: usize, measured: f64, budget: f64 },
}

/// Plateau fraction of each period on either side of the center.
pub const PLATEAU_HALF_FRACTION: f64 = 0.2; // half-width T/5

/// Frozen uniform bound on the scaled derivative constants
/// max|Φ^(j)| / ρ^{(8/7)j - 4/7}, j ≤ 4. Measured maxima over
/// ρ ∈ [200, 5000] are ≤ 4.9e4 (at j = 4, ρ = 200) and shrink as ρ grows.
pub const DERIVATIVE_BUDGET: f64 = 6.0e4;

#[derive(Clone, Debug)]
pub struct PhaseFunction {
    pub n: i64,
    pub k: i64,
    /// Period T = π/(n+k); there are 2(n+k) plateau centers φ_m = mT.
    pub period: f64,
    /// Value of Φ at every plateau center (T-periodicity makes them equal).
    pub center_value: f64,
}

impl PhaseFunction {
    pub fn build(n: i64, k: i64) -> Result<Self, PhaseError> {
        if n < 1 || k < 1 {
            return Err(PhaseError::BadDegrees(n, k));
        }
        let period = std::f64::consts::PI / (n + k) as f64;
        Ok(PhaseFunction {
            n,
            k,
            period,
            center_value: 0.25 * period,
        })
    }

    pub fn plateau_count(&self) -> i64 {
        2 * (self.n + self.k)
    }

    /// The affine constant b_m with Φ = -4kφ + b_m on plateau m.
    pub fn plateau_constant(&self, m: i64) -> f64 {
        self.center_value + 4.0 * self.k as f64 * m as f64 * self.period
    }

    /// Local cell coordinate: (cell index m, offset s ∈ [-T/5, 4T/5)).
    fn reduce(&self, phi: f64) -> (i64, f64) {
        let t = self.period;
        let m = (phi / t + PLATEAU_HALF_FRACTION).floor();
        (m as i64, phi - m * t)
    }

    /// Whether φ lies in the plateau |φ - φ_m| ≤ T/5 of some center.
    pub fn in_plateau(&self, phi: f64) -> bool {
        let (_, s) = self.reduce(phi);
        s <= self.period * PLATEAU_HALF_FRACTION
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.rjet(0, phi).value()
    }

    /// Order-`order` jet of Φ at φ. Exactly affine on plateaus.
    pub fn rjet(&self, order: usize, phi: f64) -> RJet {
        let t = self.period;
        let k4 = 4.0 * self.k as f64;
        let (_, s) = self.reduce(phi);
        // Φ = b₀ - 4k·s + 4kT·S((s - T/5)/(3T/5)) on the cell
        let mut c = vec![0.0; order + 1];
        c[0] = self.center_value - k4 * s;
        if order >= 1 {
            c[1] = -k4;
        }
        let plateau_hw = t * PLATEAU_HALF_FRACTION;
        if s > plateau_hw {
            let gap_w = t * (1.0 - 2.0 * PLATEAU_HALF_FRACTION); // 3T/5
            let tt = (s - plateau_hw) / gap_w;
            let step = smoothstep_rjet(order, tt);
            let scale = k4 * t; // 4kT
            let mut p = 1.0;
            for (j, ck) in c.iter_mut().enumerate() {
                *ck += scale * step.c[j] * p;
                p /= gap_w;
                let _ = j;
            }
        }
        RJet { x0: phi, c }
    }

    /// Maximum |Φ^(j)| over one period for j = 0..=4 (dense scan).
    pub fn derivative_maxima(&self, samples_per_period: usize) -> [f64; 5] {
        let mut maxes = [0.0_f64; 5];
        for i in 0..samples_per_period {
            let phi = self.period * (i as f64 + 0.5) / samples_per_period as f64;
            let j = self.rjet(4, phi);
            for (k, m) in maxes.iter_mut().enumerate() {
                *m = m.max(j.deriv(k).abs());
            }
        }
        maxes
    }

    /// Checks |Φ^(j)| ≤ budget_const · ρ^{(8/7)j - 4/7} for j ≤ 4.
    pub fn check_derivative_bounds(&self, rho: f64, budget_const: f64) -> Result<[f64; 5], PhaseError> {
        let maxes = self.derivative_maxima(4096);
        let mut consts = [0.0_f64; 5];
        for (j, m) in maxes.iter().enumerate() {
            let scale = rho.powf((8.0 / 7.0) * j as f64 - 4.0 / 7.0);
            consts[j] = m / scale;
            if consts[j] > budget_const {
                return Err(PhaseError::BoundViolation {
                    order: j,
                    measured: consts[j],
                    budget: budget_const,
                });
            }
        }
        Ok(consts)
    }
}
