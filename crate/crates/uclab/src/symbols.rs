//! Phase-space symbol algebra in two dimensions: polynomial symbols p(x, ξ),
//! the complex shift p(x, ξ + iτ∇φ), Poisson brackets, and closed-form
//! characteristic points of the shifted symbols.

use crate::weights::WeightFn;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("characteristic points need a nonzero weight gradient at x = ({0}, {1})")]
    ZeroGradient(f64, f64),
    #[error("symbol is not elliptic: |p| = {value} at unit direction ({d0}, {d1})")]
    NotElliptic { value: f64, d0: f64, d1: f64 },
    #[error("anisotropic factor requires b > 0 and b != 1, got {0}")]
    BadAnisotropy(f64),
}

/// A point of phase space with the large parameter.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct PhasePoint {
    pub x: [f64; 2],
    pub xi: [f64; 2],
    pub tau: f64,
}

impl PhasePoint {
    pub fn r(&self) -> f64 {
        (self.x[0] * self.x[0] + self.x[1] * self.x[1]).sqrt()
    }
    pub fn xi_norm(&self) -> f64 {
        (self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]).sqrt()
    }
}

/// Coefficient of one symbol term: c · x₁^a x₂^b (exact derivative oracle).
#[derive(Clone, Copy, Debug)]
pub struct CoeffMonomial {
    pub c: f64,
    pub ax: [u32; 2],
}

impl CoeffMonomial {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.c * x[0].powi(self.ax[0] as i32) * x[1].powi(self.ax[1] as i32)
    }
    pub fn dx(&self, j: usize, x: [f64; 2]) -> f64 {
        let a = self.ax[j];
        if a == 0 {
            return 0.0;
        }
        let mut ax = self.ax;
        ax[j] -= 1;
        a as f64
            * CoeffMonomial { c: self.c, ax }.eval(x)
    }
}

/// One term c_α(x) ξ^α of a polynomial symbol.
#[derive(Clone, Copy, Debug)]
pub struct SymbolTerm {
    pub coeff: CoeffMonomial,
    pub xi_pow: [u32; 2],
}

/// Polynomial symbol in ξ ∈ ℝ² with x-dependent monomial coefficients.
#[derive(Clone, Debug)]
pub struct SymbolExpr {
    pub terms: Vec<SymbolTerm>,
}

impl SymbolExpr {
    pub fn new(terms: Vec<SymbolTerm>) -> Self {
        SymbolExpr { terms }
    }

    /// |ξ|^{2m}, the symbol of the m-th power of the (sign-normalized) Laplacian.
    pub fn isotropic_power(m: u32) -> Self {
        // (ξ₁² + ξ₂²)^m expanded binomially
        let mut terms = Vec::new();
        let mut binom = 1.0;
        for j in 0..=m {
            terms.push(SymbolTerm {
                coeff: CoeffMonomial { c: binom, ax: [0, 0] },
                xi_pow: [2 * (m - j), 2 * j],
            });
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        SymbolExpr::new(terms)
    }

    /// ξ₁² + b ξ₂², the anisotropic second-order factor.
    pub fn anisotropic_factor(b: f64) -> Self {
        SymbolExpr::new(vec![
            SymbolTerm { coeff: CoeffMonomial { c: 1.0, ax: [0, 0] }, xi_pow: [2, 0] },
            SymbolTerm { coeff: CoeffMonomial { c: b, ax: [0, 0] }, xi_pow: [0, 2] },
        ])
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.xi_pow[0] + t.xi_pow[1])
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff.eval(x)
                    * xi[0].powi(t.xi_pow[0] as i32)
                    * xi[1].powi(t.xi_pow[1] as i32)
            })
            .sum()
    }

    pub fn d_xi(&self, j: usize, x: [f64; 2], xi: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let a = t.xi_pow[j];
                if a == 0 {
                    return 0.0;
                }
                let mut xp = t.xi_pow;
                xp[j] -= 1;
                a as f64
                    * t.coeff.eval(x)
                    * xi[0].powi(xp[0] as i32)
                    * xi[1].powi(xp[1] as i32)
            })
            .sum()
    }

    pub fn d_x(&self, j: usize, x: [f64; 2], xi: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff.dx(j, x)
                    * xi[0].powi(t.xi_pow[0] as i32)
                    * xi[1].powi(t.xi_pow[1] as i32)
            })
            .sum()
    }

    /// Minimum of |p| over sampled unit directions; the ellipticity check.
    pub fn ellipticity_check(&self, x: [f64; 2]) -> Result<(), SymbolError> {
        let n = 64;
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let xi = [th.cos(), th.sin()];
            let v = self.eval(x, xi);
            if v.abs() <= 1e-12 {
                return Err(SymbolError::NotElliptic {
                    value: v,
                    d0: xi[0],
                    d1: xi[1],
                });
            }
        }
        Ok(())
    }
}

/// Poisson bracket {p, q} = Σ_j (∂p/∂ξ_j ∂q/∂x_j − ∂q/∂ξ_j ∂p/∂x_j) at a point.
pub fn poisson_bracket(p: &SymbolExpr, q: &SymbolExpr, pt: &PhasePoint) -> f64 {
    let (x, xi) = (pt.x, pt.xi);
    (0..2)
        .map(|j| p.d_xi(j, x, xi) * q.d_x(j, x, xi) - q.d_xi(j, x, xi) * p.d_x(j, x, xi))
        .sum()
}

// ---------------------------------------------------------------------------
// Shifted symbols q(x, ξ) = p(x, ξ + iτ∇φ(x)) for weights from the catalogue.
// ---------------------------------------------------------------------------

/// The shifted symbol of a constant-coefficient polynomial symbol.
#[derive(Clone)]
pub struct ShiftedSymbol<'a> {
    pub p: &'a SymbolExpr,
    pub weight: WeightFn,
    pub tau: f64,
}

impl<'a> ShiftedSymbol<'a> {
    pub fn new(p: &'a SymbolExpr, weight: WeightFn, tau: f64) -> Self {
        ShiftedSymbol { p, weight, tau }
    }

    fn shifted_xi(&self, x: [f64; 2], xi: [f64; 2]) -> [Complex64; 2] {
        let g = self.weight.grad(x);
        [
            Complex64::new(xi[0], self.tau * g[0]),
            Complex64::new(xi[1], self.tau * g[1]),
        ]
    }

    /// q(x, ξ) by direct complex substitution.
    pub fn eval(&self, x: [f64; 2], xi: [f64; 2]) -> Complex64 {
        let z = self.shifted_xi(x, xi);
        self.p
            .terms
            .iter()
            .map(|t| {
                Complex64::new(t.coeff.eval(x), 0.0)
                    * z[0].powu(t.xi_pow[0])
                    * z[1].powu(t.xi_pow[1])
            })
            .sum()
    }

    /// ∂q/∂ξ_j (complex).
    pub fn d_xi(&self, j: usize, x: [f64; 2], xi: [f64; 2]) -> Complex64 {
        let z = self.shifted_xi(x, xi);
        self.p
            .terms
            .iter()
            .map(|t| {
                let a = t.xi_pow[j];
                if a == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut xp = t.xi_pow;
                xp[j] -= 1;
                Complex64::new(a as f64 * t.coeff.eval(x), 0.0)
                    * z[0].powu(xp[0])
                    * z[1].powu(xp[1])
            })
            .sum()
    }

    /// ∂q/∂x_j (complex); differentiates the iτ∇φ shift through the Hessian
    /// and the coefficient functions.
    pub fn d_x(&self, j: usize, x: [f64; 2], xi: [f64; 2]) -> Complex64 {
        let z = self.shifted_xi(x, xi);
        let h = self.weight.hessian(x);
        // dz_l/dx_j = i tau H[l][j]
        let dz = [
            Complex64::new(0.0, self.tau * h[0][j]),
            Complex64::new(0.0, self.tau * h[1][j]),
        ];
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.p.terms {
            // coefficient derivative term
            acc += Complex64::new(t.coeff.dx(j, x), 0.0) * z[0].powu(t.xi_pow[0]) * z[1].powu(t.xi_pow[1]);
            // chain rule through each shifted frequency factor
            for l in 0..2 {
                let a = t.xi_pow[l];
                if a == 0 {
                    continue;
                }
                let mut xp = t.xi_pow;
                xp[l] -= 1;
                acc += Complex64::new(a as f64 * t.coeff.eval(x), 0.0)
                    * z[0].powu(xp[0])
                    * z[1].powu(xp[1])
                    * dz[l];
            }
        }
        acc
    }

    /// {Re q, Im q} evaluated exactly from the complex partials:
    /// Σ_j Im( conj(∂q/∂ξ_j) · ∂q/∂x_j ).
    pub fn bracket_re_im(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        (0..2)
            .map(|j| (self.d_xi(j, x, xi).conj() * self.d_x(j, x, xi)).im)
            .sum()
    }
}

/// Characteristic covectors of the shifted Laplacian-power symbol at x:
/// the two real solutions ξ = ±τ|∇φ(x)| n̂ with n̂ ⊥ ∇φ(x).
/// The characteristic set is the same for every power m ≥ 1.
pub fn char_points_minus_laplacian(
    phi: WeightFn,
    x: [f64; 2],
    tau: f64,
) -> Result<[PhasePoint; 2], SymbolError> {
    let g = phi.grad(x);
    let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
    if gn == 0.0 || !gn.is_finite() {
        return Err(SymbolError::ZeroGradient(x[0], x[1]));
    }
    let n_perp = [-g[1] / gn, g[0] / gn];
    let s = tau * gn;
    Ok([
        PhasePoint { x, xi: [s * n_perp[0], s * n_perp[1]], tau },
        PhasePoint { x, xi: [-s * n_perp[0], -s * n_perp[1]], tau },
    ])
}

/// Characteristic covectors of the shifted anisotropic factor ξ₁² + bξ₂²
/// with the weight r^{-α}, at τ = 1 (the system is homogeneous in (ξ, τ)).
///
/// Closed form: with g = ∇φ(x), the two solutions are
/// ξ = ±( √b g₂, −g₁/√b ). They satisfy both the line and the ellipse
/// equation of the characteristic system exactly.
pub fn char_points_factor2(
    phi: WeightFn,
    b: f64,
    x: [f64; 2],
) -> Result<[PhasePoint; 2], SymbolError> {
    if b <= 0.0 || b == 1.0 {
        return Err(SymbolError::BadAnisotropy(b));
    }
    let g = phi.grad(x);
    let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
    if gn == 0.0 || !gn.is_finite() {
        return Err(SymbolError::ZeroGradient(x[0], x[1]));
    }
    let sb = b.sqrt();
    let xi = [sb * g[1], -g[0] / sb];
    Ok([
        PhasePoint { x, xi, tau: 1.0 },
        PhasePoint { x, xi: [-xi[0], -xi[1]], tau: 1.0 },
    ])
}
