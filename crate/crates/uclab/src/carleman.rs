//! Numerical stress tests for the weighted a priori inequalities: the
//! polyharmonic bound
//!
//!   τ^{3m} ∫ ω^{-1-2τ}|f|² ≤ C ∫ ω^{3m-1-2τ}|Δ^m f|²
//!
//! with the radial weight ω = exp(-φ₁), and the fourth-order bound
//!
//!   τ^{-1} ‖(r|∇φ|)^{-1/2} e^{τφ} u‖²_{4,τ} ≤ C ‖e^{τφ} P u‖²
//!
//! with φ = r^{-α}, P = (∂₁² + b∂₂²)Δ, where ‖v‖²_{4,τ} sums the squared
//! L² norms of the full fourth derivative tensor and of |τ∇φ|⁴v.
//!
//! Test functions are separable, f = ψ(r)q(r)e^{iℓφ}, so the polyharmonic
//! sides reduce to radial integrals; the fourth-order sides are integrated
//! on a Gauss-Legendre × trapezoid tensor grid. Every integrand is
//! assembled in log scale and accumulated by log-sum-exp, so weights like
//! ω^{-2τ} or e^{2τφ} never overflow.

use crate::jets::{jet_variable, BasePoint, Jet4, RJet, Var};
use crate::meshkov::bump::smoothstep_rjet;
use crate::operators::PolarOperator;
use crate::rng::sample_rng;
use crate::weights::{phi1_integral, WeightFn};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CarlemanError {
    #[error("support [{0}, {1}] must satisfy 0 < r_lo < r_hi < 10")]
    BadSupport(f64, f64),
    #[error("quadrature did not converge: last value {last:.6e} over {panels} panels (dominant cell [{cell_lo:.4}, {cell_hi:.4}])")]
    QuadratureNonConverged {
        last: f64,
        panels: usize,
        cell_lo: f64,
        cell_hi: f64,
    },
    #[error("tau grid is empty")]
    EmptyGrid,
    #[error("polyharmonic order m must be 1, 2 or 3, got {0}")]
    BadOrder(u32),
}

// ---------------------------------------------------------------------------
// The Carleman weight ω.
// ---------------------------------------------------------------------------

/// ω(r) = exp(-φ₁(r)) = r·exp(∫₀^r (e^{-t}-1)/t dt): strictly increasing on
/// (0, 10) with ω(r)/r ∈ (0, 1] and ω'(r) = e^{I(r) - r} > 0.
pub fn carleman_omega(r: f64) -> f64 {
    log_carleman_omega(r).exp()
}

/// log ω(r), the form every integrand uses.
pub fn log_carleman_omega(r: f64) -> f64 {
    assert!(r > 0.0 && r < 10.0, "omega is defined on (0, 10)");
    r.ln() + phi1_integral(r)
}

// ---------------------------------------------------------------------------
// Test functions.
// ---------------------------------------------------------------------------

/// Separable test function ψ(s)·q(s)·e^{iℓφ} on the annulus r ∈ [r_lo, r_hi],
/// written in the normalized coordinate s = (2r - r_lo - r_hi)/(r_hi - r_lo),
/// so rescaling the support rescales the function rigidly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestFunction {
    pub support: (f64, f64),
    pub ell: i64,
    /// Coefficients of q in the normalized coordinate, constant term first.
    pub poly: Vec<f64>,
    pub seed: u64,
}

impl TestFunction {
    pub fn generate(
        seed: u64,
        support: (f64, f64),
        ell: i64,
        poly_degree: usize,
    ) -> Result<Self, CarlemanError> {
        if !(support.0 > 0.0 && support.1 > support.0 && support.1 < 10.0) {
            return Err(CarlemanError::BadSupport(support.0, support.1));
        }
        let mut rng = sample_rng(seed, 0x7f, 0);
        let mut poly: Vec<f64> = (0..=poly_degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // keep the profile from degenerating to near-zero
        poly[0] += 1.5_f64.copysign(poly[0]);
        Ok(TestFunction { support, ell, poly, seed })
    }

    /// Rigid rescaling x ↦ λx of the support (same normalized profile).
    pub fn rescaled(&self, lambda: f64) -> TestFunction {
        TestFunction {
            support: (self.support.0 * lambda, self.support.1 * lambda),
            ell: self.ell,
            poly: self.poly.clone(),
            seed: self.seed,
        }
    }

    /// Jet of the radial profile g(r) = ψ(s(r))·q(s(r)) at r, to `order`.
    pub fn radial_jet(&self, order: usize, r: f64) -> RJet {
        let (a, b) = self.support;
        if r <= a || r >= b {
            return RJet::constant(order, r, 0.0);
        }
        let s0 = (2.0 * r - a - b) / (b - a);
        let ds = 2.0 / (b - a);
        // bump in s: rises on [-1, -0.2], flat on [-0.2, 0.2], falls on [0.2, 1]
        let rescale = |j: &RJet, slope: f64| -> RJet {
            let mut c = j.c.clone();
            let mut p = 1.0;
            for ck in c.iter_mut() {
                *ck *= p;
                p *= slope;
            }
            RJet { x0: s0, c }
        };
        let up = smoothstep_rjet(order, (s0 + 1.0) / 0.8);
        let dn = smoothstep_rjet(order, (1.0 - s0) / 0.8);
        let psi = rescale(&up, 1.0 / 0.8).mul(&rescale(&dn, -1.0 / 0.8));
        // polynomial in s by Horner on jets
        let s = RJet::variable(order, s0);
        let mut q = RJet::constant(order, s0, *self.poly.last().unwrap());
        for c in self.poly.iter().rev().skip(1) {
            q = q.mul(&s).shift(*c);
        }
        let g = psi.mul(&q);
        // chain s → r: scaled coefficients pick up ds^k
        let mut c = g.c;
        let mut p = 1.0;
        for ck in c.iter_mut() {
            *ck *= p;
            p *= ds;
        }
        RJet { x0: r, c }
    }

    pub fn radial_value(&self, r: f64) -> f64 {
        self.radial_jet(0, r).value()
    }
}

/// Value at r of (Δ restricted to the angular mode ℓ)^m applied to the
/// radial profile: L_ℓ g = g'' + g'/r - ℓ²g/r², iterated m times.
pub fn radial_polyharmonic_value(f: &TestFunction, m: u32, r: f64) -> f64 {
    let mut jet = f.radial_jet(2 * m as usize, r);
    let ell2 = (f.ell * f.ell) as f64;
    for _ in 0..m {
        let rinv = RJet::variable(jet.order(), r).recip();
        let gpp = jet.derivative().derivative();
        let gp_r = jet.derivative().mul(&rinv);
        let g_rr = jet.mul(&rinv).mul(&rinv).scale(ell2);
        jet = gpp.add(&gp_r).sub(&g_rr);
    }
    jet.value()
}

// ---------------------------------------------------------------------------
// Log-scale quadrature.
// ---------------------------------------------------------------------------

/// 16-point Gauss-Legendre rule on [-1, 1] (positive abscissae half).
const GL_X: [f64; 8] = [
    0.09501250983763744,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_W: [f64; 8] = [
    0.189450610455068496,
    0.18260341504492358,
    0.169156519395002532,
    0.14959598881657674,
    0.12462897125553388,
    0.09515851168249279,
    0.062253523938647894,
    0.027152459411754095,
];

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadConfig {
    pub initial_panels: usize,
    pub max_refinements: usize,
    pub rel_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            initial_panels: 32,
            max_refinements: 5,
            rel_tol: 1e-6,
        }
    }
}

/// log ∫_a^b exp(log_f(r)) dr with geometrically spaced Gauss-Legendre
/// panels, refined by doubling until the log-integral moves by less than
/// rel_tol (a relative criterion on the integral itself).
pub fn log_integral_radial(
    log_f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    quad: &QuadConfig,
) -> Result<f64, CarlemanError> {
    let mut panels = quad.initial_panels;
    let mut prev: Option<f64> = None;
    let mut worst_cell = (a, b);
    for _ in 0..=quad.max_refinements {
        let ratio = (b / a).powf(1.0 / panels as f64);
        let mut terms = Vec::with_capacity(panels * 16);
        let mut best_cell = (f64::NEG_INFINITY, a, b);
        let mut lo = a;
        for _ in 0..panels {
            let hi = lo * ratio;
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut cell_terms = [f64::NEG_INFINITY; 16];
            let mut idx = 0;
            for i in 0..8 {
                for sgn in [-1.0, 1.0] {
                    let r = mid + sgn * half * GL_X[i];
                    cell_terms[idx] = log_f(r) + (GL_W[i] * half).ln();
                    idx += 1;
                }
            }
            let mass = log_sum_exp(&cell_terms);
            if mass > best_cell.0 {
                best_cell = (mass, lo, hi);
            }
            terms.extend_from_slice(&cell_terms);
            lo = hi;
        }
        let total = log_sum_exp(&terms);
        worst_cell = (best_cell.1, best_cell.2);
        if let Some(p) = prev {
            if (total - p).abs() <= quad.rel_tol {
                return Ok(total);
            }
        }
        prev = Some(total);
        panels *= 2;
    }
    Err(CarlemanError::QuadratureNonConverged {
        last: prev.unwrap_or(f64::NAN),
        panels,
        cell_lo: worst_cell.0,
        cell_hi: worst_cell.1,
    })
}

/// log of 2π ∫ ω(r)^p |h(r)|² r dr over a radial support.
pub fn log_omega_weighted_norm_sq(
    h: &dyn Fn(f64) -> f64,
    omega_exponent: f64,
    support: (f64, f64),
    quad: &QuadConfig,
) -> Result<f64, CarlemanError> {
    let log_f = move |r: f64| -> f64 {
        let hv = h(r).abs();
        if hv == 0.0 {
            return f64::NEG_INFINITY;
        }
        omega_exponent * log_carleman_omega(r) + 2.0 * hv.ln() + r.ln()
    };
    Ok(log_integral_radial(&log_f, support.0, support.1, quad)? + std::f64::consts::TAU.ln())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TwoSided {
    pub log_lhs: f64,
    pub log_rhs: f64,
}

/// Both sides of the polyharmonic inequality at one τ (constant-free forms:
/// the LHS carries the τ^{3m} factor, the RHS has no constant).
pub fn polyharmonic_two_sided(
    f: &TestFunction,
    m: u32,
    tau: f64,
    quad: &QuadConfig,
) -> Result<TwoSided, CarlemanError> {
    if !(1..=3).contains(&m) {
        return Err(CarlemanError::BadOrder(m));
    }
    let lhs_int = log_omega_weighted_norm_sq(
        &|r| f.radial_value(r),
        -1.0 - 2.0 * tau,
        f.support,
        quad,
    )?;
    let rhs = log_omega_weighted_norm_sq(
        &|r| radial_polyharmonic_value(f, m, r),
        3.0 * m as f64 - 1.0 - 2.0 * tau,
        f.support,
        quad,
    )?;
    Ok(TwoSided {
        log_lhs: 3.0 * m as f64 * tau.ln() + lhs_int,
        log_rhs: rhs,
    })
}

// ---------------------------------------------------------------------------
// Fourth-order inequality.
// ---------------------------------------------------------------------------

/// The five fourth-derivative tables ∂₁^i ∂₂^{4-i} with binomial
/// multiplicities, for the tensor norm ‖∂⁴v‖².
pub struct DerivativeTensor {
    tables: Vec<(f64, PolarOperator)>,
}

impl DerivativeTensor {
    pub fn build() -> Self {
        let d1 = PolarOperator::dx1();
        let d2 = PolarOperator::dx2();
        let mut tables = Vec::new();
        for i in 0..=4usize {
            let mut op: Option<PolarOperator> = None;
            for _ in 0..i {
                op = Some(match op {
                    None => d1.clone(),
                    Some(o) => PolarOperator::compose(&d1, &o),
                });
            }
            for _ in 0..(4 - i) {
                op = Some(match op {
                    None => d2.clone(),
                    Some(o) => PolarOperator::compose(&d2, &o),
                });
            }
            let mult = [1.0, 4.0, 6.0, 4.0, 1.0][i];
            tables.push((mult, op.unwrap()));
        }
        DerivativeTensor { tables }
    }

    /// Σ_{|β|=4} C(4, β₁) |∂^β v|² for a linear-scale jet v.
    pub fn squared_norm(&self, v: &Jet4) -> f64 {
        self.tables
            .iter()
            .map(|(mult, op)| mult * op.apply(v).norm_sqr())
            .sum()
    }
}

/// Both sides of the fourth-order inequality at one τ. The exponential
/// weight e^{τφ} is factored out of every jet analytically and re-applied
/// in log scale, so the jets stay well scaled even when τφ is in the
/// hundreds.
pub fn fourth_order_two_sided(
    f: &TestFunction,
    b: f64,
    alpha: f64,
    tau: f64,
    tensor: &DerivativeTensor,
    quad: &QuadConfig,
) -> Result<TwoSided, CarlemanError> {
    let phi = WeightFn::PowerAlpha(alpha);
    let p_op = PolarOperator::fourth_order_product(b);
    let n_phi = 64usize;
    let ell = f.ell as f64;
    let tau_ln = std::f64::consts::TAU;

    // jet of v·e^{-τφ(r)} at a node: h = α^{-1/2} r^{α/2} g(r) e^{iℓφ}
    // times exp(τφ(·) - τφ(r)).
    let v_hat = |r: f64, ang: f64| -> Jet4 {
        let base = BasePoint { r, phi: ang };
        let g = f.radial_jet(4, r).embed_radial(ang);
        let rpow = jet_variable(Var::R, base)
            .unwrap()
            .powf(alpha / 2.0)
            .unwrap()
            .scale(Complex64::new(alpha.powf(-0.5), 0.0));
        let angular = jet_variable(Var::Phi, base)
            .unwrap()
            .scale(Complex64::new(0.0, ell))
            .exp();
        let h = g.mul(&rpow).mul(&angular);
        let d = phi.radial_derivs(r);
        let mut phi_jet = RJet::constant(4, r, d.d[0]);
        let mut fact = 1.0;
        for k in 1..=4usize {
            fact *= k as f64;
            phi_jet.c[k] = d.d[k] / fact;
        }
        let e_rel = phi_jet.scale(tau).embed_radial(ang).map(|z| z).exp_reduced();
        h.mul(&e_rel)
    };

    let log_f_lhs = |r: f64| -> f64 {
        if r <= f.support.0 || r >= f.support.1 {
            return f64::NEG_INFINITY;
        }
        let gf8 = (tau * phi.grad_norm(r)).powi(8);
        let mut angular_terms = Vec::with_capacity(n_phi);
        for j in 0..n_phi {
            let ang = tau_ln * j as f64 / n_phi as f64;
            let v = v_hat(r, ang);
            let t4 = tensor.squared_norm(&v);
            let t0 = gf8 * v.value().norm_sqr();
            let total = t4 + t0;
            angular_terms.push(if total == 0.0 { f64::NEG_INFINITY } else { total.ln() });
        }
        let ang_log = log_sum_exp(&angular_terms) + (tau_ln / n_phi as f64).ln();
        2.0 * tau * phi.value(r) + ang_log + r.ln()
    };

    let log_f_rhs = |r: f64| -> f64 {
        if r <= f.support.0 || r >= f.support.1 {
            return f64::NEG_INFINITY;
        }
        let mut angular_terms = Vec::with_capacity(n_phi);
        for j in 0..n_phi {
            let ang = tau_ln * j as f64 / n_phi as f64;
            let base = BasePoint { r, phi: ang };
            let g = f.radial_jet(4, r).embed_radial(ang);
            let angular = jet_variable(Var::Phi, base)
                .unwrap()
                .scale(Complex64::new(0.0, ell))
                .exp();
            let pu = p_op.apply(&g.mul(&angular));
            let n2 = pu.norm_sqr();
            angular_terms.push(if n2 == 0.0 { f64::NEG_INFINITY } else { n2.ln() });
        }
        let ang_log = log_sum_exp(&angular_terms) + (tau_ln / n_phi as f64).ln();
        2.0 * tau * phi.value(r) + ang_log + r.ln()
    };

    let lhs = log_integral_radial(&log_f_lhs, f.support.0, f.support.1, quad)?;
    let rhs = log_integral_radial(&log_f_rhs, f.support.0, f.support.1, quad)?;
    Ok(TwoSided {
        log_lhs: -tau.ln() + lhs,
        log_rhs: rhs,
    })
}

// ---------------------------------------------------------------------------
// τ sweeps.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// log_lhs - log_rhs: the log of the constant this τ requires.
    pub log_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarlemanReport {
    pub kind: String,
    pub fn_seed: u64,
    pub support: (f64, f64),
    pub ell: i64,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of log(RHS/LHS-without-τ-factor) against log τ.
    pub scaling_slope: f64,
    /// sup over the grid of log_lhs - log_rhs.
    pub sup_log_ratio: f64,
    pub slope_floor: f64,
    pub sup_log_ratio_cap: f64,
    pub verdict: SweepVerdict,
}

/// Log-spaced τ grid.
pub fn tau_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64))
        .collect()
}

fn finish_report(
    kind: String,
    f: &TestFunction,
    rows: Vec<SweepRow>,
    lhs_tau_factor: impl Fn(&SweepRow) -> f64,
    slope_floor: f64,
    sup_cap: f64,
) -> CarlemanReport {
    let xs: Vec<f64> = rows.iter().map(|r| r.tau.ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.log_rhs - (r.log_lhs - lhs_tau_factor(r)))
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 {
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / sxx
    } else {
        f64::NAN
    };
    let sup = rows
        .iter()
        .map(|r| r.log_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let all_finite = rows
        .iter()
        .all(|r| r.log_lhs.is_finite() && r.log_rhs.is_finite());
    let verdict = if all_finite && slope >= slope_floor && sup <= sup_cap {
        SweepVerdict::Pass
    } else {
        SweepVerdict::Fail
    };
    CarlemanReport {
        kind,
        fn_seed: f.seed,
        support: f.support,
        ell: f.ell,
        rows,
        scaling_slope: slope,
        sup_log_ratio: sup,
        slope_floor,
        sup_log_ratio_cap: sup_cap,
        verdict,
    }
}

/// Sweep of the polyharmonic inequality. Pass requires the fitted scaling
/// slope to reach 3m - 0.3 with every row finite.
pub fn polyharmonic_sweep(
    f: &TestFunction,
    m: u32,
    taus: &[f64],
    quad: &QuadConfig,
) -> Result<CarlemanReport, CarlemanError> {
    if taus.is_empty() {
        return Err(CarlemanError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let ts = polyharmonic_two_sided(f, m, tau, quad)?;
        rows.push(SweepRow {
            tau,
            log_lhs: ts.log_lhs,
            log_rhs: ts.log_rhs,
            log_ratio: ts.log_lhs - ts.log_rhs,
        });
    }
    Ok(finish_report(
        format!("polyharmonic(m={m})"),
        f,
        rows,
        |row| 3.0 * m as f64 * row.tau.ln(),
        3.0 * m as f64 - 0.3,
        f64::INFINITY,
    ))
}

/// Sweep of the fourth-order inequality. Pass requires one bounded constant
/// over the grid: sup log-ratio at most `sup_cap`.
pub fn fourth_order_sweep(
    f: &TestFunction,
    b: f64,
    alpha: f64,
    taus: &[f64],
    sup_cap: f64,
    quad: &QuadConfig,
) -> Result<CarlemanReport, CarlemanError> {
    if taus.is_empty() {
        return Err(CarlemanError::EmptyGrid);
    }
    let tensor = DerivativeTensor::build();
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let ts = fourth_order_two_sided(f, b, alpha, tau, &tensor, quad)?;
        rows.push(SweepRow {
            tau,
            log_lhs: ts.log_lhs,
            log_rhs: ts.log_rhs,
            log_ratio: ts.log_lhs - ts.log_rhs,
        });
    }
    Ok(finish_report(
        format!("fourth_order(b={b},alpha={alpha})"),
        f,
        rows,
        |row| -row.tau.ln(),
        f64::NEG_INFINITY,
        sup_cap,
    ))
}
