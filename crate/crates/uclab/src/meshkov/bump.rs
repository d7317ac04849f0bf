//! Smooth radial cutoffs built from the standard mollifier ratio
//! s(t) = σ(t) / (σ(t) + σ(1-t)), σ(t) = e^{-1/t} for t > 0.
//!
//! s is C^∞ with s ≡ 0 for t ≤ 0 and s ≡ 1 for t ≥ 1; max s' = 2 exactly
//! (attained at t = 1/2), so max|ψ'|·width = 2 for every cutoff here.

use crate::jets::RJet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BumpError {
    #[error("degenerate cutoff window [{0}, {1}]")]
    DegenerateWindow(f64, f64),
}

/// Below this distance from the flat ends the mollifier value is under
/// exp(-1e8); returning the exact constant jet avoids inf·0 in the chain.
const EDGE_FLOOR: f64 = 1e-8;

/// Smoothstep value at t.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        smoothstep_raw(t)
    }
}

fn smoothstep_raw(t: f64) -> f64 {
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Order-`order` jet of the smoothstep at t₀ (exact constants outside (0,1)).
pub fn smoothstep_rjet(order: usize, t0: f64) -> RJet {
    if t0 <= EDGE_FLOOR {
        return RJet::constant(order, t0, 0.0);
    }
    if t0 >= 1.0 - EDGE_FLOOR {
        return RJet::constant(order, t0, 1.0);
    }
    let t = RJet::variable(order, t0);
    let sig_t = t.recip().scale(-1.0).exp();
    let one_minus = t.scale(-1.0).shift(1.0);
    let sig_1t = one_minus.recip().scale(-1.0).exp();
    let denom = sig_t.add(&sig_1t);
    sig_t.mul(&denom.recip())
}

/// Monotone C^∞ radial cutoff: 1 on one side of a transition window, 0 on
/// the other.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialCutoff {
    pub lo: f64,
    pub hi: f64,
    /// true: 0 below lo, 1 above hi; false: 1 below lo, 0 above hi.
    pub rising: bool,
}

impl RadialCutoff {
    pub fn rising(lo: f64, hi: f64) -> Result<Self, BumpError> {
        if !(hi > lo) {
            return Err(BumpError::DegenerateWindow(lo, hi));
        }
        Ok(RadialCutoff { lo, hi, rising: true })
    }

    /// ψ = 1 below `flat_below`, 0 above `zero_above`.
    pub fn falling(flat_below: f64, zero_above: f64) -> Result<Self, BumpError> {
        if !(zero_above > flat_below) {
            return Err(BumpError::DegenerateWindow(flat_below, zero_above));
        }
        Ok(RadialCutoff { lo: flat_below, hi: zero_above, rising: false })
    }

    fn t(&self, r: f64) -> f64 {
        let raw = (r - self.lo) / (self.hi - self.lo);
        if self.rising {
            raw
        } else {
            1.0 - raw
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        smoothstep(self.t(r))
    }

    /// Exactly 1 / exactly 0 regions (all derivatives vanish there too).
    pub fn is_flat_one(&self, r: f64) -> bool {
        self.t(r) >= 1.0
    }
    pub fn is_flat_zero(&self, r: f64) -> bool {
        self.t(r) <= 0.0
    }

    /// Jet in r of order `order`.
    pub fn rjet(&self, order: usize, r: f64) -> RJet {
        let width = self.hi - self.lo;
        let slope = if self.rising { 1.0 / width } else { -1.0 / width };
        let s = smoothstep_rjet(order, self.t(r));
        // chain through the affine map: ψ^(k) = s^(k) · slope^k
        let mut c = s.c.clone();
        let mut p = 1.0;
        for ck in c.iter_mut() {
            *ck *= p;
            p *= slope;
        }
        RJet { x0: r, c }
    }
}
