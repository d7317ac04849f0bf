//! Verdict engine for strong pseudoconvexity of weight functions.
//!
//! The test quantity is the Poisson bracket {Re p_τ, Im p_τ} of the shifted
//! symbol p_τ = p(x, ξ + iτ∇φ), sampled over the characteristic set p_τ = 0.
//! Three scalings of the bracket are used:
//!
//! * `raw`      — {Re p_τ, Im p_τ} itself;
//! * `reduced`  — raw / (4τ). For a second-order isotropic symbol this equals
//!   the Hessian form (ξ, Hφ ξ) + τ²(∇φ, Hφ ∇φ), the quantity with the
//!   closed-form value τ² e^{-3|x|}/|x|³ for the φ₁ weight;
//! * `normalized` — raw / (|ξ| + τ|∇φ|)^{2d-1}, scale-free in (ξ, τ) jointly
//!   (the bracket of a degree-d symbol is homogeneous of degree 2d-1).
//!
//! Verdicts are evidence from sampling, not proofs.

use crate::rng::sample_rng;
use crate::symbols::{
    char_points_factor2, char_points_minus_laplacian, PhasePoint, ShiftedSymbol, SymbolError,
    SymbolExpr,
};
use crate::weights::WeightFn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PseudoconvexError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("anisotropy parameter must satisfy b > 0, b != 1, got {0}")]
    BadAnisotropy(f64),
    #[error("sampling region must satisfy 0 < r_lo < r_hi, got [{0}, {1}]")]
    BadRegion(f64, f64),
    #[error("only isotropic powers |xi|^(2m) are supported by the bracket sampler")]
    UnsupportedSymbol,
}

/// Default tolerance below which the normalized bracket is read as
/// identically zero (the jet/symbol noise floor is below 1e-13).
pub const VANISHING_TOL: f64 = 1e-10;
/// Positivity tolerance for the scale-free normalized bracket.
pub const POSITIVE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Vanishing,
    Violated,
}

/// Sampled verdict for one (operator, weight) pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketReport {
    pub operator_id: String,
    pub weight_id: String,
    pub sample_count: usize,
    pub min_normalized_value: f64,
    pub witness: PhasePoint,
    pub verdict: Verdict,
    pub vanishing_tol: f64,
    pub positive_tol: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Region {
    pub r_lo: f64,
    pub r_hi: f64,
}

impl Region {
    pub fn new(r_lo: f64, r_hi: f64) -> Result<Self, PseudoconvexError> {
        if !(r_lo > 0.0 && r_hi > r_lo) {
            return Err(PseudoconvexError::BadRegion(r_lo, r_hi));
        }
        Ok(Region { r_lo, r_hi })
    }
}

/// (ξ, H(φ)ξ) + τ²(∇φ, H(φ)∇φ) from the weight's Hessian oracle.
pub fn hessian_quadratic_form(phi: WeightFn, x: [f64; 2], xi: [f64; 2], tau: f64) -> f64 {
    let h = phi.hessian(x);
    let g = phi.grad(x);
    let quad = |v: [f64; 2]| -> f64 {
        let hv = [h[0][0] * v[0] + h[0][1] * v[1], h[1][0] * v[0] + h[1][1] * v[1]];
        v[0] * hv[0] + v[1] * hv[1]
    };
    quad(xi) + tau * tau * quad(g)
}

/// Closed form of the reduced bracket for (-Δ, φ₁) on its characteristic
/// set: τ² e^{-3|x|} / |x|³.
pub fn phi1_bracket_closed_form(x: [f64; 2], tau: f64) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    tau * tau * (-3.0 * r).exp() / (r * r * r)
}

/// Admissibility threshold for the power weight exponent: max{1/b - 1, b - 1}.
pub fn alpha_threshold(b: f64) -> Result<f64, PseudoconvexError> {
    if b <= 0.0 || b == 1.0 {
        return Err(PseudoconvexError::BadAnisotropy(b));
    }
    Ok((1.0 / b - 1.0).max(b - 1.0))
}

/// Closed form of the anisotropic-factor bracket on its characteristic set
/// (τ = 1 normalization):
/// 2α³|x|^{-3α-4} [ (α+2)((x₁²+bx₂²)/|x|²)² − b − (x₁²+b²x₂²)/|x|² ].
///
/// The direct Poisson bracket {Re p₂τ, Im p₂τ} equals exactly twice this
/// value on the characteristic set (see the cross-check test).
pub fn factor2_bracket_closed_form(b: f64, alpha: f64, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let r = r2.sqrt();
    let u = (x[0] * x[0] + b * x[1] * x[1]) / r2;
    let v = (x[0] * x[0] + b * b * x[1] * x[1]) / r2;
    2.0 * alpha.powi(3) * r.powf(-3.0 * alpha - 4.0) * ((alpha + 2.0) * u * u - b - v)
}

/// The raw bracket {Re p_τ, Im p_τ} for p = |ξ|^{2m} at a phase point.
pub fn raw_bracket_isotropic(m: u32, phi: WeightFn, pt: &PhasePoint) -> f64 {
    let p = SymbolExpr::isotropic_power(m);
    ShiftedSymbol::new(&p, phi, pt.tau).bracket_re_im(pt.x, pt.xi)
}

/// The reduced bracket raw/(4τ); equals [`hessian_quadratic_form`] for m = 1.
pub fn reduced_bracket_isotropic(m: u32, phi: WeightFn, pt: &PhasePoint) -> f64 {
    raw_bracket_isotropic(m, phi, pt) / (4.0 * pt.tau)
}

/// The scale-free normalized bracket raw/(|ξ| + τ|∇φ|)^{2d-1}, d = 2m.
pub fn normalized_bracket_isotropic(m: u32, phi: WeightFn, pt: &PhasePoint) -> f64 {
    let raw = raw_bracket_isotropic(m, phi, pt);
    let scale = pt.xi_norm() + pt.tau * phi.grad_norm(pt.r());
    raw / scale.powi(2 * (2 * m as i32) - 1)
}

/// Detect whether a symbol is |ξ|^{2m} with constant coefficients, and
/// return m. The characteristic sampler covers exactly this family.
pub fn isotropic_power_degree(p: &SymbolExpr) -> Option<u32> {
    let deg = p.degree();
    if deg == 0 || deg % 2 != 0 {
        return None;
    }
    let m = deg / 2;
    let model = SymbolExpr::isotropic_power(m);
    let x = [0.7, -0.3];
    for k in 0..16 {
        let th = 0.4 + k as f64 * 0.39269908169872414;
        for &s in &[0.5, 1.3] {
            let xi = [s * th.cos(), s * th.sin()];
            let (a, b) = (p.eval(x, xi), model.eval(x, xi));
            if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
                return None;
            }
        }
    }
    Some(m)
}

fn draw_base_point(phi: WeightFn, region: Region, rng: &mut impl Rng) -> Option<([f64; 2], f64)> {
    for _ in 0..128 {
        let r = (rng.gen_range(region.r_lo.ln()..region.r_hi.ln())).exp();
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = [r * th.cos(), r * th.sin()];
        let gn = phi.grad_norm(r);
        // skip points where the gradient nearly vanishes (no characteristic
        // covector of meaningful size; the bracket quotient is 0/0 there)
        let curv = phi.radial_derivs(r).d[2].abs() * r;
        if gn > 1e-4 * curv.max(1e-300) {
            return Some((x, r));
        }
    }
    None
}

/// Sampled verdict for the bracket positivity condition of p = |ξ|^{2m}
/// with weight φ over an annulus. Rejects non-elliptic and non-isotropic
/// symbols.
pub fn verify_bracket_condition(
    p: &SymbolExpr,
    phi: WeightFn,
    region: Region,
    n_samples: usize,
    seed: u64,
) -> Result<BracketReport, PseudoconvexError> {
    p.ellipticity_check([1.0, 0.0])?;
    let m = isotropic_power_degree(p).ok_or(PseudoconvexError::UnsupportedSymbol)?;
    const DOMAIN: u64 = 0x31;

    let samples: Vec<(f64, PhasePoint)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rng = sample_rng(seed, DOMAIN, idx as u64);
            let (x, _r) = draw_base_point(phi, region, &mut rng)?;
            let tau = (rng.gen_range((0.1_f64).ln()..(100.0_f64).ln())).exp();
            let pts = char_points_minus_laplacian(phi, x, tau).ok()?;
            let mut best: Option<(f64, PhasePoint)> = None;
            for cp in pts {
                let v = normalized_bracket_isotropic(m, phi, &cp);
                if best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, cp));
                }
            }
            best
        })
        .collect();

    let mut min_v = f64::INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut witness = samples
        .first()
        .map(|(_, w)| *w)
        .unwrap_or(PhasePoint { x: [1.0, 0.0], xi: [0.0, 0.0], tau: 1.0 });
    for (v, w) in &samples {
        max_abs = max_abs.max(v.abs());
        if *v < min_v {
            min_v = *v;
            witness = *w;
        }
    }

    let verdict = if max_abs <= VANISHING_TOL {
        Verdict::Vanishing
    } else if min_v > POSITIVE_TOL {
        Verdict::Positive
    } else {
        Verdict::Violated
    };

    Ok(BracketReport {
        operator_id: format!("laplacian_power({m})"),
        weight_id: phi.to_string(),
        sample_count: samples.len(),
        min_normalized_value: min_v,
        witness,
        verdict,
        vanishing_tol: VANISHING_TOL,
        positive_tol: POSITIVE_TOL,
    })
}

// ---------------------------------------------------------------------------
// Product operator p = (ξ₁² + ξ₂²)(ξ₁² + bξ₂²) with the weight r^{-α}.
// ---------------------------------------------------------------------------

/// The expanded product symbol (|ξ|²)(ξ₁² + bξ₂²).
pub fn product_symbol(b: f64) -> SymbolExpr {
    use crate::symbols::{CoeffMonomial, SymbolTerm};
    SymbolExpr::new(vec![
        SymbolTerm { coeff: CoeffMonomial { c: 1.0, ax: [0, 0] }, xi_pow: [4, 0] },
        SymbolTerm { coeff: CoeffMonomial { c: 1.0 + b, ax: [0, 0] }, xi_pow: [2, 2] },
        SymbolTerm { coeff: CoeffMonomial { c: b, ax: [0, 0] }, xi_pow: [0, 4] },
    ])
}

/// Which factor of the product vanishes at a sampled characteristic point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharFamily {
    LaplacianFactor,
    AnisotropicFactor,
}

/// The product bracket at a characteristic point of one factor, via the
/// splitting identity
/// {Re p_τ, Im p_τ} = {Re p₁τ, Im p₁τ}|p₂τ|² + {Re p₂τ, Im p₂τ}|p₁τ|²
/// (only the vanishing factor's bracket survives).
pub fn product_bracket_split(b: f64, alpha: f64, family: CharFamily, pt: &PhasePoint) -> f64 {
    let phi = WeightFn::PowerAlpha(alpha);
    let p1 = SymbolExpr::isotropic_power(1);
    let p2 = SymbolExpr::anisotropic_factor(b);
    let s1 = ShiftedSymbol::new(&p1, phi, pt.tau);
    let s2 = ShiftedSymbol::new(&p2, phi, pt.tau);
    match family {
        CharFamily::LaplacianFactor => {
            s1.bracket_re_im(pt.x, pt.xi) * s2.eval(pt.x, pt.xi).norm_sqr()
        }
        CharFamily::AnisotropicFactor => {
            s2.bracket_re_im(pt.x, pt.xi) * s1.eval(pt.x, pt.xi).norm_sqr()
        }
    }
}

/// The same bracket evaluated directly on the shifted product symbol.
pub fn product_bracket_direct(b: f64, alpha: f64, pt: &PhasePoint) -> f64 {
    let p = product_symbol(b);
    ShiftedSymbol::new(&p, WeightFn::PowerAlpha(alpha), pt.tau).bracket_re_im(pt.x, pt.xi)
}

/// Normalization of the product bracket: bracket · r / (|ξ| + τ|∇φ|)^7.
pub fn product_bracket_normalized(b: f64, alpha: f64, family: CharFamily, pt: &PhasePoint) -> f64 {
    let phi = WeightFn::PowerAlpha(alpha);
    let raw = product_bracket_split(b, alpha, family, pt);
    let scale = pt.xi_norm() + pt.tau * phi.grad_norm(pt.r());
    raw * pt.r() / scale.powi(7)
}

/// Result of the product bracket lower-bound audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductBracketAudit {
    pub c_est: f64,
    pub report: BracketReport,
    pub witness_family: CharFamily,
    /// Largest relative deviation of |p₁τ|² from (b-1)²(ξ₂² + (∂₂φ)²)²
    /// over the anisotropic-factor samples.
    pub modulus_identity_max_rel_err: f64,
}

/// Samples characteristic points of both factors (τ = 1 by homogeneity),
/// evaluates the product bracket through the splitting identity, and
/// returns the infimum of bracket·r/(|ξ| + τ|∇φ|)^7 together with the
/// non-characteristic factor's modulus-identity audit.
pub fn verify_product_bracket_bound(
    b: f64,
    alpha: f64,
    region: Region,
    n_samples: usize,
    seed: u64,
) -> Result<ProductBracketAudit, PseudoconvexError> {
    if b <= 0.0 || b == 1.0 {
        return Err(PseudoconvexError::BadAnisotropy(b));
    }
    let phi = WeightFn::PowerAlpha(alpha);
    const DOMAIN: u64 = 0x33;

    // deterministic axis and diagonal directions first: the closed form is
    // extremal on the axes, and exact-axis witnesses make the closed-form
    // cross-check exact
    let mut fixed: Vec<([f64; 2], CharFamily)> = Vec::new();
    let radii = [
        region.r_lo * 1.07,
        (region.r_lo * region.r_hi).sqrt(),
        region.r_hi * 0.93,
    ];
    for &r in &radii {
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::FRAC_PI_4;
            let x = [r * th.cos(), r * th.sin()];
            fixed.push((x, CharFamily::AnisotropicFactor));
            fixed.push((x, CharFamily::LaplacianFactor));
        }
    }

    let eval_at = |x: [f64; 2], family: CharFamily| -> Option<(f64, PhasePoint, f64)> {
        let pts = match family {
            CharFamily::LaplacianFactor => char_points_minus_laplacian(phi, x, 1.0).ok()?,
            CharFamily::AnisotropicFactor => char_points_factor2(phi, b, x).ok()?,
        };
        let mut best: Option<(f64, PhasePoint)> = None;
        let mut mod_err: f64 = 0.0;
        for cp in pts {
            let v = product_bracket_normalized(b, alpha, family, &cp);
            if family == CharFamily::AnisotropicFactor {
                // modulus identity |p₁τ|² = (b-1)²(ξ₂² + (∂₂φ)²)²
                let p1 = SymbolExpr::isotropic_power(1);
                let lhs = ShiftedSymbol::new(&p1, phi, 1.0)
                    .eval(cp.x, cp.xi)
                    .norm_sqr();
                let g = phi.grad(cp.x);
                let rhs =
                    (b - 1.0) * (b - 1.0) * (cp.xi[1] * cp.xi[1] + g[1] * g[1]).powi(2);
                mod_err = mod_err.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
            }
            if best.map_or(true, |(bv, _)| v < bv) {
                best = Some((v, cp));
            }
        }
        best.map(|(v, w)| (v, w, mod_err))
    };

    let fixed_vals: Vec<(f64, PhasePoint, f64, CharFamily)> = fixed
        .iter()
        .filter_map(|&(x, fam)| eval_at(x, fam).map(|(v, w, e)| (v, w, e, fam)))
        .collect();

    let random_vals: Vec<(f64, PhasePoint, f64, CharFamily)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rng = sample_rng(seed, DOMAIN, idx as u64);
            let r = (rng.gen_range(region.r_lo.ln()..region.r_hi.ln())).exp();
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = [r * th.cos(), r * th.sin()];
            let fam = if idx % 2 == 0 {
                CharFamily::AnisotropicFactor
            } else {
                CharFamily::LaplacianFactor
            };
            eval_at(x, fam).map(|(v, w, e)| (v, w, e, fam))
        })
        .collect();

    let mut c_est = f64::INFINITY;
    let mut witness = PhasePoint { x: [1.0, 0.0], xi: [0.0, 0.0], tau: 1.0 };
    let mut witness_family = CharFamily::AnisotropicFactor;
    let mut mod_err: f64 = 0.0;
    let mut count = 0usize;
    for (v, w, e, fam) in fixed_vals.iter().chain(random_vals.iter()) {
        count += 1;
        mod_err = mod_err.max(*e);
        if *v < c_est {
            c_est = *v;
            witness = *w;
            witness_family = *fam;
        }
    }

    let verdict = if c_est > POSITIVE_TOL {
        Verdict::Positive
    } else if c_est.abs() <= VANISHING_TOL {
        Verdict::Vanishing
    } else {
        Verdict::Violated
    };

    let report = BracketReport {
        operator_id: format!("product({b})"),
        weight_id: phi.to_string(),
        sample_count: count,
        min_normalized_value: c_est,
        witness,
        verdict,
        vanishing_tol: VANISHING_TOL,
        positive_tol: POSITIVE_TOL,
    };

    Ok(ProductBracketAudit {
        c_est,
        report,
        witness_family,
        modulus_identity_max_rel_err: mod_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_form_on_characteristic_set_matches_phi1_closed_form() {
        for &(x, tau) in &[
            ([1.0, 0.0], 1.0),
            ([0.3, 0.4], 2.0),
            ([2.0, -1.5], 0.7),
            ([5.0, 1.0], 13.0),
        ] {
            let pts = char_points_minus_laplacian(WeightFn::BkPhi1, x, tau).unwrap();
            for cp in &pts {
                let qf = hessian_quadratic_form(WeightFn::BkPhi1, cp.x, cp.xi, tau);
                let cf = phi1_bracket_closed_form(x, tau);
                assert_relative_eq!(qf, cf, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn hessian_form_spec_values() {
        // x=(1,0), ξ=(0,1), τ=0: (ξ, Hξ) = -e^{-1}
        let v = hessian_quadratic_form(WeightFn::BkPhi1, [1.0, 0.0], [0.0, 1.0], 0.0);
        assert_relative_eq!(v, -(-1.0_f64).exp(), max_relative = 1e-12);
        // ξ = 0, τ = 0 gives 0
        assert_eq!(
            hessian_quadratic_form(WeightFn::BkPhi1, [1.0, 0.0], [0.0, 0.0], 0.0),
            0.0
        );
    }

    #[test]
    fn raw_bracket_is_four_tau_times_quadratic_form() {
        // identity {Re p_τ, Im p_τ} = 4τ [(ξ,Hξ) + τ²(∇φ,H∇φ)] for m = 1,
        // at arbitrary phase points (not only characteristic ones)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let weights = [
            WeightFn::BkPhi1,
            WeightFn::LogSqPhi2,
            WeightFn::LogLambdaPhi3(2.0),
            WeightFn::PowerAlpha(1.5),
        ];
        for w in weights {
            for _ in 0..25 {
                let pt = PhasePoint {
                    x: [rng.gen_range(0.3..3.0), rng.gen_range(-2.0..2.0)],
                    xi: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                    tau: rng.gen_range(0.1..10.0),
                };
                let raw = raw_bracket_isotropic(1, w, &pt);
                let qf = hessian_quadratic_form(w, pt.x, pt.xi, pt.tau);
                let expect = 4.0 * pt.tau * qf;
                assert_relative_eq!(raw, expect, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn phi1_closed_form_spec_value() {
        // |x| = 1, τ = 1: e^{-3}
        let v = phi1_bracket_closed_form([1.0, 0.0], 1.0);
        assert_relative_eq!(v, 0.049787068367863944, max_relative = 1e-14);
        // τ² homogeneity
        let v2 = phi1_bracket_closed_form([1.0, 0.0], 2.0);
        assert_relative_eq!(v2, 4.0 * v, max_relative = 1e-14);
    }

    #[test]
    fn reduced_bracket_matches_phi1_closed_form_on_char_set() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let r = rng.gen_range(0.1..9.0);
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let tau = rng.gen_range(0.5..50.0);
            let x = [r * th.cos(), r * th.sin()];
            let pts = char_points_minus_laplacian(WeightFn::BkPhi1, x, tau).unwrap();
            for cp in &pts {
                let red = reduced_bracket_isotropic(1, WeightFn::BkPhi1, cp);
                let cf = phi1_bracket_closed_form(x, tau);
                assert_relative_eq!(red, cf, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn normalized_bracket_for_phi1_is_one_half() {
        // scale-free sanity value: raw/(|ξ|+τ|∇φ|)³ = 1/2 on the whole
        // characteristic set of (-Δ, φ₁)
        for &(r, tau) in &[(0.2, 0.5), (1.0, 1.0), (4.0, 30.0)] {
            let x = [r, 0.0];
            let pts = char_points_minus_laplacian(WeightFn::BkPhi1, x, tau).unwrap();
            let v = normalized_bracket_isotropic(1, WeightFn::BkPhi1, &pts[0]);
            assert_relative_eq!(v, 0.5, max_relative = 1e-10);
        }
    }

    #[test]
    fn power_weight_reduced_bracket_closed_form() {
        // for φ = r^{-α} on the characteristic set: τ² α⁴ r^{-3α-4}
        let alpha = 1.3;
        let w = WeightFn::PowerAlpha(alpha);
        for &(r, tau) in &[(0.5, 1.0), (2.0, 4.0)] {
            let x = [r / 2.0_f64.sqrt(), r / 2.0_f64.sqrt()];
            let pts = char_points_minus_laplacian(w, x, tau).unwrap();
            let red = reduced_bracket_isotropic(1, w, &pts[0]);
            let expect = tau * tau * alpha.powi(4) * r.powf(-3.0 * alpha - 4.0);
            assert_relative_eq!(red, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn phi2_reduced_bracket_closed_form() {
        // for φ₂ = (ln r)² on the characteristic set: 8 τ² ln²r / r⁴
        let w = WeightFn::LogSqPhi2;
        for &(r, tau) in &[(0.5, 1.0), (3.0, 2.0)] {
            let x = [r, 0.0];
            let pts = char_points_minus_laplacian(w, x, tau).unwrap();
            let red = reduced_bracket_isotropic(1, w, &pts[0]);
            let expect = 8.0 * tau * tau * r.ln() * r.ln() / r.powi(4);
            assert_relative_eq!(red, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn phi3_reduced_bracket_is_negative() {
        // φ₃ = -ln(r + λr²) has (r φ₃')' < 0, so the bracket is negative on
        // the characteristic set: reduced value -λ τ² φ'(r)² / (r (1+λr)²)
        let lam = 2.0;
        let w = WeightFn::LogLambdaPhi3(lam);
        for &(r, tau) in &[(0.5, 1.0), (2.0, 3.0)] {
            let x = [0.0, r];
            let pts = char_points_minus_laplacian(w, x, tau).unwrap();
            let red = reduced_bracket_isotropic(1, w, &pts[0]);
            let fp = w.dr(r);
            let expect = -lam * tau * tau * fp * fp / (r * (1.0 + lam * r).powi(2));
            assert_relative_eq!(red, expect, max_relative = 1e-10);
            assert!(red < 0.0);
        }
    }

    #[test]
    fn verdicts_match_the_expected_table() {
        let region = Region::new(0.1, 9.0).unwrap();
        let p1 = SymbolExpr::isotropic_power(1);
        let rep = verify_bracket_condition(&p1, WeightFn::BkPhi1, region, 200, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Positive);
        assert_relative_eq!(rep.min_normalized_value, 0.5, max_relative = 1e-9);

        for m in [2u32, 3] {
            let p = SymbolExpr::isotropic_power(m);
            for w in [
                WeightFn::BkPhi1,
                WeightFn::LogSqPhi2,
                WeightFn::LogLambdaPhi3(2.0),
                WeightFn::PowerAlpha(1.0),
            ] {
                let rep = verify_bracket_condition(&p, w, region, 100, 2).unwrap();
                assert_eq!(rep.verdict, Verdict::Vanishing, "m={m} {w}");
            }
        }

        // the shifted-log weight fails the strict positivity condition
        let rep =
            verify_bracket_condition(&p1, WeightFn::LogLambdaPhi3(2.0), region, 200, 3).unwrap();
        assert_eq!(rep.verdict, Verdict::Violated);
    }

    #[test]
    fn witness_reproduces_min_value() {
        let region = Region::new(0.1, 9.0).unwrap();
        let p1 = SymbolExpr::isotropic_power(1);
        let rep = verify_bracket_condition(&p1, WeightFn::BkPhi1, region, 100, 9).unwrap();
        let again = normalized_bracket_isotropic(1, WeightFn::BkPhi1, &rep.witness);
        assert_relative_eq!(again, rep.min_normalized_value, max_relative = 1e-14);
    }

    #[test]
    fn non_elliptic_symbol_rejected() {
        use crate::symbols::{CoeffMonomial, SymbolTerm};
        let p = SymbolExpr::new(vec![SymbolTerm {
            coeff: CoeffMonomial { c: 1.0, ax: [0, 0] },
            xi_pow: [2, 0],
        }]);
        let region = Region::new(0.1, 9.0).unwrap();
        assert!(verify_bracket_condition(&p, WeightFn::BkPhi1, region, 10, 0).is_err());
    }

    #[test]
    fn alpha_threshold_values() {
        assert_eq!(alpha_threshold(2.0).unwrap(), 1.0);
        assert_eq!(alpha_threshold(0.5).unwrap(), 1.0);
        assert!(alpha_threshold(1.0).is_err());
        // b = 1 + ε/2 with ε = 0.2: threshold 0.1 < ε, so the matched power
        // weight r^{-ε} is admissible
        let t = alpha_threshold(1.1).unwrap();
        assert_relative_eq!(t, 0.1, max_relative = 1e-12);
        assert!(0.2 > t);
    }

    #[test]
    fn factor2_closed_form_values() {
        // b=2, α=1.5, x=(1,0): 2·(1.5)³·[3.5 - 2 - 1] = 3.375
        assert_relative_eq!(
            factor2_bracket_closed_form(2.0, 1.5, [1.0, 0.0]),
            3.375,
            max_relative = 1e-13
        );
        // b=2, α=0.5, x=(1,0): bracketed factor 2.5 - 3 = -0.5
        assert_relative_eq!(
            factor2_bracket_closed_form(2.0, 0.5, [1.0, 0.0]),
            -0.5 * 2.0 * 0.125,
            max_relative = 1e-13
        );
    }

    #[test]
    fn direct_factor_bracket_is_twice_the_closed_form() {
        // {Re p₂τ, Im p₂τ} on the characteristic system, τ = 1, equals
        // exactly 2 × the closed form (the closed form's displayed
        // coefficient is half the Poisson bracket's)
        let (b, alpha) = (2.0, 1.5);
        let phi = WeightFn::PowerAlpha(alpha);
        let p2 = SymbolExpr::anisotropic_factor(b);
        for &x in &[[1.0, 0.0], [0.6, 0.8], [-0.3, 1.1], [2.0, -0.5]] {
            let pts = char_points_factor2(phi, b, x).unwrap();
            for cp in &pts {
                let raw = ShiftedSymbol::new(&p2, phi, 1.0).bracket_re_im(cp.x, cp.xi);
                let cf = factor2_bracket_closed_form(b, alpha, x);
                assert_relative_eq!(raw, 2.0 * cf, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn splitting_identity_matches_direct_product_bracket() {
        let (b, alpha) = (2.0, 1.5);
        let phi = WeightFn::PowerAlpha(alpha);
        for &x in &[[1.0, 0.0], [0.5, 0.9], [-1.2, 0.4]] {
            for fam in [CharFamily::AnisotropicFactor, CharFamily::LaplacianFactor] {
                let pts = match fam {
                    CharFamily::LaplacianFactor => {
                        char_points_minus_laplacian(phi, x, 1.0).unwrap()
                    }
                    CharFamily::AnisotropicFactor => char_points_factor2(phi, b, x).unwrap(),
                };
                for cp in &pts {
                    let split = product_bracket_split(b, alpha, fam, cp);
                    let direct = product_bracket_direct(b, alpha, cp);
                    assert_relative_eq!(split, direct, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn product_bound_positive_above_threshold() {
        let region = Region::new(0.5, 1.0).unwrap();
        let audit = verify_product_bracket_bound(2.0, 1.5, region, 2000, 4).unwrap();
        assert!(audit.c_est > 0.0, "c_est = {}", audit.c_est);
        assert_eq!(audit.report.verdict, Verdict::Positive);
        assert!(audit.modulus_identity_max_rel_err <= 1e-9);
        // the minimum sits on the x₁ axis of the anisotropic family:
        // 4 f(0) (1/b)² / (1 + 1/√b)⁷ with f(0) = α + 1 - b
        let h0 = 1.0 + 1.0 / 2.0_f64.sqrt();
        let expect = 4.0 * 0.5 * 0.25 / h0.powi(7);
        assert_relative_eq!(audit.c_est, expect, max_relative = 1e-9);
    }

    #[test]
    fn product_bound_violated_below_threshold() {
        let region = Region::new(0.5, 1.0).unwrap();
        let audit = verify_product_bracket_bound(2.0, 0.5, region, 2000, 4).unwrap();
        assert_eq!(audit.report.verdict, Verdict::Violated);
        assert_eq!(audit.witness_family, CharFamily::AnisotropicFactor);
        // witness direction is along the x₁ axis
        let w = audit.report.witness;
        let t = w.x[1] * w.x[1] / (w.x[0] * w.x[0] + w.x[1] * w.x[1]);
        assert!(t <= 1e-3, "witness direction t = {t}");
        // closed form at an exact axis point reproduces -0.5 · 2α³ r^{-3α-4}
        let r = w.r();
        let axis = [r, 0.0];
        let cf = factor2_bracket_closed_form(2.0, 0.5, axis);
        let expect = -0.5 * 2.0 * 0.5_f64.powi(3) * r.powf(-3.0 * 0.5 - 4.0);
        assert_relative_eq!(cf, expect, max_relative = 1e-9);
    }

    #[test]
    fn c_est_monotone_in_alpha() {
        let region = Region::new(0.5, 1.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &alpha in &[1.2, 1.5, 2.0] {
            let audit = verify_product_bracket_bound(2.0, alpha, region, 500, 11).unwrap();
            assert!(
                audit.c_est >= prev,
                "alpha={alpha}: {} < {prev}",
                audit.c_est
            );
            prev = audit.c_est;
        }
    }

    #[test]
    fn c_est_scale_invariant() {
        // the normalized product bracket is independent of |x|
        let (b, alpha) = (2.0, 1.5);
        let phi = WeightFn::PowerAlpha(alpha);
        for &th in &[0.0_f64, 0.7, 2.1] {
            let x1 = [0.9 * th.cos(), 0.9 * th.sin()];
            let x2 = [0.45 * th.cos(), 0.45 * th.sin()];
            let a = char_points_factor2(phi, b, x1).unwrap();
            let c = char_points_factor2(phi, b, x2).unwrap();
            let va = product_bracket_normalized(b, alpha, CharFamily::AnisotropicFactor, &a[0]);
            let vc = product_bracket_normalized(b, alpha, CharFamily::AnisotropicFactor, &c[0]);
            assert_relative_eq!(va, vc, max_relative = 1e-6);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let region = Region::new(0.1, 9.0).unwrap();
        let p1 = SymbolExpr::isotropic_power(1);
        let a = verify_bracket_condition(&p1, WeightFn::BkPhi1, region, 300, 42).unwrap();
        let b = verify_bracket_condition(&p1, WeightFn::BkPhi1, region, 300, 42).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
