//! Radial weight functions with closed-form derivative oracles.
//!
//! Catalogue: the exponential-integral weight φ₁ = -ln r - ∫₀^r (e^{-t}-1)/t dt,
//! the squared logarithm (ln r)², the shifted logarithm -ln(r + λr²), and the
//! negative power r^{-α}. All are radial; the oracle returns the radial
//! profile derivatives up to order 4, from which gradient and Hessian follow.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Entire-function integrand (e^{-t} - 1)/t of the φ₁ integral term.
/// Series near zero avoids the 0/0 cancellation.
pub fn expm1_over_t(t: f64) -> f64 {
    if t.abs() < 0.5 {
        // (e^{-t}-1)/t = -1 + t/2 - t^2/6 + ... = sum_{j>=0} (-1)^{j+1} t^j/(j+1)!
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 1.0;
        for j in 0..=18 {
            fact *= (j + 1) as f64;
            let term = if j % 2 == 0 { -pow / fact } else { pow / fact };
            sum += term;
            pow *= t;
        }
        sum
    } else {
        (-t).exp_m1() / t
    }
}

/// Adaptive Simpson for a smooth integrand, |error| ≤ tol.
pub fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = g(lm);
        let frm = g(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (g(a), g(b));
    let fm = g(0.5 * (a + b));
    rec(g, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40)
}

/// ∫₀^r (e^{-t} - 1)/t dt by adaptive Simpson refinement, |error| ≤ tol.
pub fn phi1_integral_adaptive(r: f64, tol: f64) -> f64 {
    adaptive_simpson(&expm1_over_t, 0.0, r, tol)
}

/// Cached values of the φ₁ integral on a uniform grid over (0, R_MAX] with
/// cubic Hermite interpolation (the derivative is the closed-form integrand).
pub struct Phi1Cache {
    h: f64,
    values: Vec<f64>,
}

pub const PHI1_CACHE_RMAX: f64 = 12.0;

impl Phi1Cache {
    fn build() -> Self {
        let h = 1.0 / 512.0;
        let n = (PHI1_CACHE_RMAX / h).round() as usize;
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 1..=n {
            let a = (i - 1) as f64 * h;
            let b = i as f64 * h;
            acc += adaptive_simpson(&expm1_over_t, a, b, 1e-14);
            values.push(acc);
        }
        Phi1Cache { h, values }
    }

    fn eval(&self, r: f64) -> f64 {
        let g = expm1_over_t;
        debug_assert!((0.0..=PHI1_CACHE_RMAX).contains(&r));
        let i = ((r / self.h) as usize).min(self.values.len() - 2);
        let a = i as f64 * self.h;
        let t = (r - a) / self.h;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (g(a) * self.h, g(a + self.h) * self.h);
        // cubic Hermite basis
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * d1
    }
}

fn phi1_cache() -> &'static Phi1Cache {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Phi1Cache> = OnceLock::new();
    CACHE.get_or_init(Phi1Cache::build)
}

/// Weight function kinds; all radial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightFn {
    /// φ₁ = -ln r - ∫₀^r (e^{-t}-1)/t dt; |∇φ₁| = e^{-r}/r.
    BkPhi1,
    /// φ₂ = (ln r)²; gradient vanishes at r = 1.
    LogSqPhi2,
    /// φ₃ = -ln(r + λ r²), λ > 1.
    LogLambdaPhi3(f64),
    /// φ = r^{-α}, α > 0; |∇φ| = α r^{-α-1}.
    PowerAlpha(f64),
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::BkPhi1 => write!(f, "bk_phi1"),
            WeightFn::LogSqPhi2 => write!(f, "log_sq_phi2"),
            WeightFn::LogLambdaPhi3(l) => write!(f, "log_lambda_phi3({l})"),
            WeightFn::PowerAlpha(a) => write!(f, "power_alpha({a})"),
        }
    }
}

/// Radial profile derivatives φ(r), φ'(r), ..., φ⁗(r).
#[derive(Clone, Copy, Debug)]
pub struct RadialDerivs {
    pub d: [f64; 5],
}

impl WeightFn {
    /// Closed-form radial derivatives to order 4. Only the value of φ₁
    /// involves the integral term (via the cached quadrature); every
    /// derivative is in closed form.
    pub fn radial_derivs(&self, r: f64) -> RadialDerivs {
        assert!(r > 0.0, "weight evaluated at r <= 0");
        let mut d = [0.0; 5];
        match *self {
            WeightFn::BkPhi1 => {
                let e = (-r).exp();
                d[0] = -r.ln() - phi1_integral(r);
                d[1] = -e / r;
                d[2] = e * (r + 1.0) / (r * r);
                d[3] = -e * (r * r + 2.0 * r + 2.0) / (r * r * r);
                d[4] = e * (r * r * r + 3.0 * r * r + 6.0 * r + 6.0) / (r * r * r * r);
            }
            WeightFn::LogSqPhi2 => {
                let l = r.ln();
                d[0] = l * l;
                d[1] = 2.0 * l / r;
                d[2] = (2.0 - 2.0 * l) / (r * r);
                d[3] = (4.0 * l - 6.0) / (r * r * r);
                d[4] = (22.0 - 12.0 * l) / (r * r * r * r);
            }
            WeightFn::LogLambdaPhi3(lam) => {
                // φ₃ = -ln r - ln(1 + λ r): derivatives (-1)^j (j-1)! [r^{-j} + λ^j (1+λr)^{-j}]
                let u = 1.0 + lam * r;
                d[0] = -(r.ln() + u.ln());
                let mut fact = 1.0;
                for (j, dj) in d.iter_mut().enumerate().skip(1) {
                    if j > 1 {
                        fact *= (j - 1) as f64;
                    }
                    let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
                    *dj = sign * fact * (r.powi(-(j as i32)) + lam.powi(j as i32) * u.powi(-(j as i32)));
                }
            }
            WeightFn::PowerAlpha(alpha) => {
                d[0] = r.powf(-alpha);
                let mut fall = 1.0;
                for (j, dj) in d.iter_mut().enumerate().skip(1) {
                    fall *= -(alpha + (j - 1) as f64);
                    *dj = fall * r.powf(-alpha - j as f64);
                }
            }
        }
        RadialDerivs { d }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.radial_derivs(r).d[0]
    }

    /// φ'(r); the Cartesian gradient is φ'(r) · x/r.
    pub fn dr(&self, r: f64) -> f64 {
        self.radial_derivs(r).d[1]
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let fp = self.dr(r);
        [fp * x[0] / r, fp * x[1] / r]
    }

    pub fn grad_norm(&self, r: f64) -> f64 {
        self.dr(r).abs()
    }

    /// Cartesian Hessian at x: φ'' P_x + (φ'/r) (Id - P_x) with P_x = x xᵗ/r².
    pub fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r = r2.sqrt();
        let d = self.radial_derivs(r);
        let (p, q) = (d.d[2], d.d[1] / r);
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let proj = x[i] * x[j] / r2;
                h[i][j] = p * proj + q * (if i == j { 1.0 } else { 0.0 } - proj);
            }
        }
        h
    }
}

/// The φ₁ integral term, cached + interpolated inside (0, 12], adaptive
/// quadrature beyond.
pub fn phi1_integral(r: f64) -> f64 {
    if r <= PHI1_CACHE_RMAX {
        phi1_cache().eval(r)
    } else {
        phi1_integral_adaptive(r, 1e-12)
    }
}
