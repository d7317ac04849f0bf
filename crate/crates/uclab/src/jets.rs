//! Truncated bivariate Taylor (jet) arithmetic in the polar variables (r, φ).
//!
//! A [`Jet4`] carries the scaled partial derivatives ∂_r^i ∂_φ^j f / (i! j!)
//! for all i + j ≤ 4 of a complex-valued function at one base point.
//! Storing scaled derivatives keeps products plain coefficient convolutions.
//!
//! Fields that decay like r^{-n} with n in the thousands cannot be
//! represented in linear scale, so solution fields are handled as jets of
//! log u (see [`LogJet`]); `exp_reduced` turns a log-jet into the jet of
//! u / u(base), which is always well scaled.

use num_complex::Complex64;
use thiserror::Error;

/// Truncation order of the bivariate jets. The fourth-order operator is the
/// highest-order object applied to a field, so nothing beyond 4 is stored.
pub const JET_ORDER: usize = 4;

const N: usize = JET_ORDER + 1;

/// Factorials 0!..4!
const FACT: [f64; N] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasePoint {
    pub r: f64,
    pub phi: f64,
}

#[derive(Debug, Error)]
pub enum JetError {
    #[error("jet base point requires r > 0, got r = {0}")]
    NonPositiveRadius(f64),
    #[error("{func} of a jet whose value {value} is outside the principal domain at (r={r}, phi={phi})")]
    Domain {
        func: &'static str,
        value: Complex64,
        r: f64,
        phi: f64,
    },
    #[error("division by a jet with zero value part at (r={r}, phi={phi})")]
    DivisorZero { r: f64, phi: f64 },
}

/// Order-4 bivariate jet with complex coefficients.
///
/// `coeff(i, j)` is ∂_r^i ∂_φ^j f / (i! j!); exactly the 15 entries with
/// i + j ≤ 4 are meaningful, the rest stay zero.
#[derive(Clone, Copy, Debug)]
pub struct Jet4 {
    pub base: BasePoint,
    c: [[Complex64; N]; N],
}

/// Which polar coordinate a seed jet represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    R,
    Phi,
}

/// Elementary function applied through jet composition.
#[derive(Clone, Copy, Debug)]
pub enum Elem {
    Exp,
    Log,
    Pow(f64),
    Sin,
    Cos,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Jet4 {
    pub fn constant(base: BasePoint, value: Complex64) -> Self {
        let mut c = [[ZERO; N]; N];
        c[0][0] = value;
        Jet4 { base, c }
    }

    pub fn constant_re(base: BasePoint, value: f64) -> Self {
        Self::constant(base, Complex64::new(value, 0.0))
    }

    /// Jet of the coordinate function `which` at `base`.
    pub fn variable(which: Var, base: BasePoint) -> Result<Self, JetError> {
        if base.r <= 0.0 {
            return Err(JetError::NonPositiveRadius(base.r));
        }
        let mut c = [[ZERO; N]; N];
        match which {
            Var::R => {
                c[0][0] = Complex64::new(base.r, 0.0);
                c[1][0] = Complex64::new(1.0, 0.0);
            }
            Var::Phi => {
                c[0][0] = Complex64::new(base.phi, 0.0);
                c[0][1] = Complex64::new(1.0, 0.0);
            }
        }
        Ok(Jet4 { base, c })
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        self.c[0][0]
    }

    /// Scaled coefficient ∂_r^i ∂_φ^j f / (i! j!).
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        self.c[i][j]
    }

    /// Unscaled derivative ∂_r^i ∂_φ^j f.
    #[inline]
    pub fn deriv(&self, i: usize, j: usize) -> Complex64 {
        self.c[i][j] * FACT[i] * FACT[j]
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: Complex64) {
        self.c[i][j] = v;
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N - i {
                out.c[i][j] = f(self.c[i][j]);
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn re_part(&self) -> Self {
        self.map(|z| Complex64::new(z.re, 0.0))
    }

    pub fn im_part(&self) -> Self {
        self.map(|z| Complex64::new(z.im, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Jet4) -> Self {
        debug_assert_eq!(self.base, other.base);
        let mut out = *self;
        for i in 0..N {
            for j in 0..N - i {
                out.c[i][j] += other.c[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Jet4) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Jet4) -> Self {
        debug_assert_eq!(self.base, other.base);
        let mut c = [[ZERO; N]; N];
        for i1 in 0..N {
            for j1 in 0..N - i1 {
                let a = self.c[i1][j1];
                if a == ZERO {
                    continue;
                }
                let budget = N - i1 - j1;
                for i2 in 0..budget {
                    for j2 in 0..budget - i2 {
                        c[i1 + i2][j1 + j2] += a * other.c[i2][j2];
                    }
                }
            }
        }
        Jet4 { base: self.base, c }
    }

    pub fn div(&self, other: &Jet4) -> Result<Self, JetError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let v = self.value();
        if v.norm() == 0.0 {
            return Err(JetError::DivisorZero {
                r: self.base.r,
                phi: self.base.phi,
            });
        }
        // 1/x around x0: coefficients (-1)^k / x0^{k+1}
        let mut series = [ZERO; N];
        let mut p = 1.0 / v;
        for (k, s) in series.iter_mut().enumerate() {
            *s = p;
            p *= -1.0 / v;
            let _ = k;
        }
        Ok(self.compose_series(&series))
    }

    /// Composition with a univariate analytic function given by the scaled
    /// Taylor coefficients a_k = f^(k)(value)/k! of f at the jet's value.
    pub fn compose_series(&self, a: &[Complex64; N]) -> Self {
        // h = self - value; result = a0 + a1 h + a2 h^2 + a3 h^3 + a4 h^4 (Horner)
        let mut h = *self;
        h.c[0][0] = ZERO;
        let mut acc = Jet4::constant(self.base, a[N - 1]);
        for k in (0..N - 1).rev() {
            acc = acc.mul(&h);
            acc.c[0][0] += a[k];
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut a = [ZERO; N];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = e / FACT[k];
        }
        self.compose_series(&a)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let v = self.value();
        if v.norm() == 0.0 {
            return Err(JetError::Domain {
                func: "log",
                value: v,
                r: self.base.r,
                phi: self.base.phi,
            });
        }
        let mut a = [ZERO; N];
        a[0] = v.ln();
        for k in 1..N {
            // f^(k)(x)/k! = (-1)^{k+1} / (k x^k)
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            a[k] = Complex64::new(sign / k as f64, 0.0) / v.powu(k as u32);
        }
        Ok(self.compose_series(&a))
    }

    /// x^p for real exponent p. Integer exponents accept any nonzero value;
    /// fractional ones require Re(value) > 0 (principal branch).
    pub fn powf(&self, p: f64) -> Result<Self, JetError> {
        let v = self.value();
        let integral = p.fract() == 0.0;
        if v.norm() == 0.0 || (!integral && v.re <= 0.0) {
            return Err(JetError::Domain {
                func: "pow",
                value: v,
                r: self.base.r,
                phi: self.base.phi,
            });
        }
        let mut a = [ZERO; N];
        let vp = v.powf(p);
        let mut falling = 1.0;
        for (k, ak) in a.iter_mut().enumerate() {
            // f^(k)(x)/k! = p(p-1)...(p-k+1)/k! * x^{p-k}
            *ak = vp * falling / FACT[k] / v.powu(k as u32);
            falling *= p - k as f64;
        }
        Ok(self.compose_series(&a))
    }

    pub fn sin(&self) -> Self {
        let v = self.value();
        let (s, c) = (v.sin(), v.cos());
        let cycle = [s, c, -s, -c];
        let mut a = [ZERO; N];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = cycle[k % 4] / FACT[k];
        }
        self.compose_series(&a)
    }

    pub fn cos(&self) -> Self {
        let v = self.value();
        let (s, c) = (v.sin(), v.cos());
        let cycle = [c, -s, -c, s];
        let mut a = [ZERO; N];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = cycle[k % 4] / FACT[k];
        }
        self.compose_series(&a)
    }

    /// Jet of exp(self - value): the ratio u / u(base) when `self` is log u.
    /// Always well scaled, no matter how large |Re value| is.
    pub fn exp_reduced(&self) -> Self {
        let mut w = *self;
        w.c[0][0] = ZERO;
        w.exp()
    }
}

/// Apply one of the supported elementary functions through composition.
pub fn jet_elementary(f: Elem, x: &Jet4) -> Result<Jet4, JetError> {
    match f {
        Elem::Exp => Ok(x.exp()),
        Elem::Log => x.ln(),
        Elem::Pow(p) => x.powf(p),
        Elem::Sin => Ok(x.sin()),
        Elem::Cos => Ok(x.cos()),
    }
}

/// Jet of the coordinate function; rejects r ≤ 0.
pub fn jet_variable(which: Var, base: BasePoint) -> Result<Jet4, JetError> {
    Jet4::variable(which, base)
}

/// Jet of log u at a point: real part log|u|, imaginary part arg u.
/// Logarithmic derivatives of u stay finite no matter how small |u| is.
pub type LogJet = Jet4;

// ---------------------------------------------------------------------------
// Univariate real jets of dynamic order (radial profiles, cutoffs, phases).
// ---------------------------------------------------------------------------

/// Univariate real Taylor jet: c[k] = f^(k)(x0)/k!, k = 0..=order.
#[derive(Clone, Debug)]
pub struct RJet {
    pub x0: f64,
    pub c: Vec<f64>,
}

impl RJet {
    pub fn constant(order: usize, x0: f64, v: f64) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        RJet { x0, c }
    }

    pub fn variable(order: usize, x0: f64) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        RJet { x0, c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn deriv(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 1..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    pub fn add(&self, o: &RJet) -> RJet {
        let n = self.c.len().min(o.c.len());
        let c = (0..n).map(|i| self.c[i] + o.c[i]).collect();
        RJet { x0: self.x0, c }
    }

    pub fn sub(&self, o: &RJet) -> RJet {
        let n = self.c.len().min(o.c.len());
        let c = (0..n).map(|i| self.c[i] - o.c[i]).collect();
        RJet { x0: self.x0, c }
    }

    /// Jet of the derivative f' (order drops by one).
    pub fn derivative(&self) -> RJet {
        let c = (1..self.c.len()).map(|i| self.c[i] * i as f64).collect();
        RJet { x0: self.x0, c }
    }

    pub fn truncated(&self, order: usize) -> RJet {
        let mut c = self.c.clone();
        c.truncate(order + 1);
        RJet { x0: self.x0, c }
    }

    pub fn scale(&self, s: f64) -> RJet {
        RJet {
            x0: self.x0,
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn shift(&self, s: f64) -> RJet {
        let mut c = self.c.clone();
        c[0] += s;
        RJet { x0: self.x0, c }
    }

    pub fn mul(&self, o: &RJet) -> RJet {
        let n = self.c.len().min(o.c.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        RJet { x0: self.x0, c }
    }

    fn compose_series(&self, a: &[f64]) -> RJet {
        let n = self.c.len();
        let mut h = self.c.clone();
        h[0] = 0.0;
        let h = RJet { x0: self.x0, c: h };
        let mut acc = RJet::constant(n - 1, self.x0, a[n - 1]);
        for k in (0..n - 1).rev() {
            acc = acc.mul(&h);
            acc.c[0] += a[k];
        }
        acc
    }

    pub fn recip(&self) -> RJet {
        let n = self.c.len();
        let v = self.c[0];
        let mut a = vec![0.0; n];
        let mut p = 1.0 / v;
        for ak in a.iter_mut() {
            *ak = p;
            p *= -1.0 / v;
        }
        self.compose_series(&a)
    }

    pub fn exp(&self) -> RJet {
        let n = self.c.len();
        let e = self.c[0].exp();
        let mut a = vec![0.0; n];
        let mut f = 1.0;
        for (k, ak) in a.iter_mut().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            *ak = e / f;
        }
        self.compose_series(&a)
    }

    pub fn ln(&self) -> RJet {
        let n = self.c.len();
        let v = self.c[0];
        let mut a = vec![0.0; n];
        a[0] = v.ln();
        for (k, ak) in a.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ak = sign / (k as f64 * v.powi(k as i32));
        }
        self.compose_series(&a)
    }

    pub fn powf(&self, p: f64) -> RJet {
        let n = self.c.len();
        let v = self.c[0];
        let vp = v.powf(p);
        let mut a = vec![0.0; n];
        let mut falling = 1.0;
        let mut fact = 1.0;
        for (k, ak) in a.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *ak = vp * falling / (fact * v.powi(k as i32));
            falling *= p - k as f64;
        }
        self.compose_series(&a)
    }

    /// Embed a radial profile jet as a bivariate jet (all φ-derivatives zero).
    pub fn embed_radial(&self, phi: f64) -> Jet4 {
        let base = BasePoint { r: self.x0, phi };
        let mut out = Jet4::constant(base, ZERO);
        for i in 0..N.min(self.c.len()) {
            out.c[i][0] = Complex64::new(self.c[i], 0.0);
        }
        out
    }

    /// Embed an angular profile jet as a bivariate jet (all r-derivatives zero).
    pub fn embed_angular(&self, r: f64) -> Jet4 {
        let base = BasePoint { r, phi: self.x0 };
        let mut out = Jet4::constant(base, ZERO);
        for j in 0..N.min(self.c.len()) {
            out.c[0][j] = Complex64::new(self.c[j], 0.0);
        }
        out
    }
}
