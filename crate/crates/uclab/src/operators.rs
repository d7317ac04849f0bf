//! Polar-coordinate differential operators applied to jets.
//!
//! An operator is a table mapping (∂_r count, ∂_φ count) to a closed-form
//! coefficient in (1/r, sin φ, cos φ). The Laplacian, the anisotropic factor
//! ∂₁² + b∂₂², and their composition are built here; composition is done
//! symbolically once, so applying the fourth-order product needs only a
//! 4-jet of the field.

use crate::jets::{Jet4, LogJet};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// One closed-form coefficient term c · r^p · sin^a φ · cos^b φ.
#[derive(Clone, Copy, Debug)]
pub struct CoeffTerm {
    pub c: f64,
    pub rpow: i32,
    pub sin_pow: u32,
    pub cos_pow: u32,
}

impl CoeffTerm {
    fn key(&self) -> (i32, u32, u32) {
        (self.rpow, self.sin_pow, self.cos_pow)
    }
}

/// Sum of coefficient terms; closed under ∂_r, ∂_φ and products.
#[derive(Clone, Debug, Default)]
pub struct CoeffExpr {
    pub terms: Vec<CoeffTerm>,
}

impl CoeffExpr {
    pub fn constant(c: f64) -> Self {
        CoeffExpr {
            terms: vec![CoeffTerm { c, rpow: 0, sin_pow: 0, cos_pow: 0 }],
        }
    }

    pub fn rpow(c: f64, rpow: i32) -> Self {
        CoeffExpr {
            terms: vec![CoeffTerm { c, rpow, sin_pow: 0, cos_pow: 0 }],
        }
    }

    pub fn term(c: f64, rpow: i32, sin_pow: u32, cos_pow: u32) -> Self {
        CoeffExpr {
            terms: vec![CoeffTerm { c, rpow, sin_pow, cos_pow }],
        }
    }

    pub fn eval(&self, r: f64, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        self.terms
            .iter()
            .map(|t| t.c * r.powi(t.rpow) * s.powi(t.sin_pow as i32) * c.powi(t.cos_pow as i32))
            .sum()
    }

    pub fn d_r(&self) -> CoeffExpr {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.rpow != 0)
            .map(|t| CoeffTerm {
                c: t.c * t.rpow as f64,
                rpow: t.rpow - 1,
                sin_pow: t.sin_pow,
                cos_pow: t.cos_pow,
            })
            .collect();
        CoeffExpr { terms }.normalized()
    }

    pub fn d_phi(&self) -> CoeffExpr {
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.sin_pow > 0 {
                terms.push(CoeffTerm {
                    c: t.c * t.sin_pow as f64,
                    rpow: t.rpow,
                    sin_pow: t.sin_pow - 1,
                    cos_pow: t.cos_pow + 1,
                });
            }
            if t.cos_pow > 0 {
                terms.push(CoeffTerm {
                    c: -t.c * t.cos_pow as f64,
                    rpow: t.rpow,
                    sin_pow: t.sin_pow + 1,
                    cos_pow: t.cos_pow - 1,
                });
            }
        }
        CoeffExpr { terms }.normalized()
    }

    pub fn mul(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(CoeffTerm {
                    c: a.c * b.c,
                    rpow: a.rpow + b.rpow,
                    sin_pow: a.sin_pow + b.sin_pow,
                    cos_pow: a.cos_pow + b.cos_pow,
                });
            }
        }
        CoeffExpr { terms }.normalized()
    }

    pub fn scaled(&self, s: f64) -> CoeffExpr {
        CoeffExpr {
            terms: self
                .terms
                .iter()
                .map(|t| CoeffTerm { c: t.c * s, ..*t })
                .collect(),
        }
    }

    pub fn add(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        CoeffExpr { terms }.normalized()
    }

    fn normalized(self) -> CoeffExpr {
        let mut map: BTreeMap<(i32, u32, u32), f64> = BTreeMap::new();
        for t in self.terms {
            *map.entry(t.key()).or_insert(0.0) += t.c;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.abs() > 0.0)
            .map(|((rpow, sin_pow, cos_pow), c)| CoeffTerm { c, rpow, sin_pow, cos_pow })
            .collect();
        CoeffExpr { terms }
    }

    pub fn is_angle_free(&self) -> bool {
        self.terms.iter().all(|t| t.sin_pow == 0 && t.cos_pow == 0)
    }
}

/// Differential operator in polar form: Σ coeff_{ij}(r, φ) ∂_r^i ∂_φ^j.
#[derive(Clone, Debug)]
pub struct PolarOperator {
    pub id: String,
    pub order: usize,
    pub table: BTreeMap<(usize, usize), CoeffExpr>,
}

impl fmt::Display for PolarOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

impl PolarOperator {
    /// Δ = ∂²/∂r² + (1/r)∂/∂r + (1/r²)∂²/∂φ².
    pub fn laplacian() -> Self {
        let mut table = BTreeMap::new();
        table.insert((2, 0), CoeffExpr::constant(1.0));
        table.insert((1, 0), CoeffExpr::rpow(1.0, -1));
        table.insert((0, 2), CoeffExpr::rpow(1.0, -2));
        PolarOperator { id: "laplacian".into(), order: 2, table }
    }

    /// ∂₁² + b ∂₂² in polar form:
    /// (1 + (b-1)sin²φ)∂_rr + (b-1)(sin 2φ / r)∂_rφ + ((1 + (b-1)cos²φ)/r)∂_r
    /// + ((1 + (b-1)cos²φ)/r²)∂_φφ − (b-1)(sin 2φ / r²)∂_φ.
    pub fn anisotropic_factor(b: f64) -> Self {
        let e = b - 1.0;
        let mut table = BTreeMap::new();
        table.insert(
            (2, 0),
            CoeffExpr::constant(1.0).add(&CoeffExpr::term(e, 0, 2, 0)),
        );
        table.insert((1, 1), CoeffExpr::term(2.0 * e, -1, 1, 1));
        table.insert(
            (1, 0),
            CoeffExpr::rpow(1.0, -1).add(&CoeffExpr::term(e, -1, 0, 2)),
        );
        table.insert(
            (0, 2),
            CoeffExpr::rpow(1.0, -2).add(&CoeffExpr::term(e, -2, 0, 2)),
        );
        table.insert((0, 1), CoeffExpr::term(-2.0 * e, -2, 1, 1));
        PolarOperator { id: format!("anisotropic({b})"), order: 2, table }
    }

    /// ∂/∂x₁ = cos φ ∂_r − (sin φ / r) ∂_φ.
    pub fn dx1() -> Self {
        let mut table = BTreeMap::new();
        table.insert((1, 0), CoeffExpr::term(1.0, 0, 0, 1));
        table.insert((0, 1), CoeffExpr::term(-1.0, -1, 1, 0));
        PolarOperator { id: "d/dx1".into(), order: 1, table }
    }

    /// ∂/∂x₂ = sin φ ∂_r + (cos φ / r) ∂_φ.
    pub fn dx2() -> Self {
        let mut table = BTreeMap::new();
        table.insert((1, 0), CoeffExpr::term(1.0, 0, 1, 0));
        table.insert((0, 1), CoeffExpr::term(1.0, -1, 0, 1));
        PolarOperator { id: "d/dx2".into(), order: 1, table }
    }

    /// Symbolic composition outer ∘ inner, product rule applied to the inner
    /// coefficient functions once, at build time.
    pub fn compose(outer: &PolarOperator, inner: &PolarOperator) -> Self {
        fn binom(n: usize, k: usize) -> f64 {
            let mut v = 1.0;
            for i in 0..k {
                v = v * (n - i) as f64 / (i + 1) as f64;
            }
            v
        }
        let mut table: BTreeMap<(usize, usize), CoeffExpr> = BTreeMap::new();
        for ((bi, bj), a) in &outer.table {
            for ((gi, gj), c) in &inner.table {
                for ii in 0..=*bi {
                    for jj in 0..=*bj {
                        // ∂_r^{bi}∂_φ^{bj} (c ∂^γ u) contributes
                        // C(bi,ii) C(bj,jj) (∂_r^{bi-ii}∂_φ^{bj-jj} c) ∂^{(ii+gi, jj+gj)} u
                        let mut dc = c.clone();
                        for _ in 0..(bi - ii) {
                            dc = dc.d_r();
                        }
                        for _ in 0..(bj - jj) {
                            dc = dc.d_phi();
                        }
                        if dc.terms.is_empty() {
                            continue;
                        }
                        let w = binom(*bi, ii) * binom(*bj, jj);
                        let contrib = a.mul(&dc).scaled(w);
                        let key = (ii + gi, jj + gj);
                        let entry = table.remove(&key).unwrap_or_default();
                        table.insert(key, entry.add(&contrib));
                    }
                }
            }
        }
        table.retain(|_, v| !v.terms.is_empty());
        PolarOperator {
            id: format!("{} . {}", outer.id, inner.id),
            order: outer.order + inner.order,
            table,
        }
    }

    /// P = (∂₁² + b∂₂²) Δ as a single order-4 table.
    pub fn fourth_order_product(b: f64) -> Self {
        let mut op = Self::compose(&Self::anisotropic_factor(b), &Self::laplacian());
        op.id = format!("product({b})");
        op
    }

    /// Apply the table to a 4-jet: Σ coeff(r, φ) · ∂_r^i ∂_φ^j u.
    pub fn apply(&self, u: &Jet4) -> Complex64 {
        assert!(self.order <= 4, "operator order exceeds jet order");
        let (r, phi) = (u.base.r, u.base.phi);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((i, j), coeff) in &self.table {
            acc += u.deriv(*i, *j) * coeff.eval(r, phi);
        }
        acc
    }

    pub fn is_angle_free(&self) -> bool {
        self.table.values().all(|c| c.is_angle_free())
    }
}

/// (Lu)/u evaluated from logarithmic derivatives only: with w the jet of
/// log u, the ratio equals L applied to the jet of u/u(base), which is the
/// well-scaled jet exp(w - w(base)).
pub fn log_derivative_ratio(w: &LogJet, op: &PolarOperator) -> Complex64 {
    op.apply(&w.exp_reduced())
}

/// Zeroth-order coefficient V = -(Pu)/u from the log-jet of u.
pub fn potential_from_log_jet(w: &LogJet, op: &PolarOperator) -> Complex64 {
    -log_derivative_ratio(w, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{jet_variable, BasePoint, Var};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Jet of r^{-n} e^{-i n φ} via its logarithm.
    fn log_jet_zpow(n: f64, base: BasePoint) -> Jet4 {
        let jr = jet_variable(Var::R, base).unwrap();
        let jp = jet_variable(Var::Phi, base).unwrap();
        let lw = jr.ln().unwrap().scale(c64(-n, 0.0));
        lw.add(&jp.scale(c64(0.0, -n)))
    }

    #[test]
    fn harmonic_pair_is_annihilated() {
        // Δ (r^{-n} e^{-inφ}) = 0
        let base = BasePoint { r: 1.7, phi: 0.9 };
        let lap = PolarOperator::laplacian();
        for &n in &[1.0, 3.0, 11.0] {
            let w = log_jet_zpow(n, base);
            let ratio = log_derivative_ratio(&w, &lap);
            assert!(ratio.norm() <= 1e-10 * n * n, "n={n}: {ratio}");
        }
    }

    #[test]
    fn exponential_radial_eigenfunction() {
        // u = e^r: ∂_r² u / u = 1
        let base = BasePoint { r: 0.6, phi: 0.0 };
        let jr = jet_variable(Var::R, base).unwrap();
        let w = jr; // log u = r
        let mut table = BTreeMap::new();
        table.insert((2, 0), CoeffExpr::constant(1.0));
        let op = PolarOperator { id: "d2r".into(), order: 2, table };
        let ratio = log_derivative_ratio(&w, &op);
        assert_relative_eq!(ratio.re, 1.0, max_relative = 1e-13);
        assert_relative_eq!(ratio.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn mixed_power_ratio_matches_hand_value_and_fd() {
        // u = r^{-1} e^{-3iφ}: Δu/u = (1 - 9)/r² = -8/r²
        let base = BasePoint { r: 1.3, phi: 0.4 };
        let jr = jet_variable(Var::R, base).unwrap();
        let jp = jet_variable(Var::Phi, base).unwrap();
        let w = jr.ln().unwrap().scale(c64(-1.0, 0.0)).add(&jp.scale(c64(0.0, -3.0)));
        let ratio = log_derivative_ratio(&w, &PolarOperator::laplacian());
        let expect = -8.0 / (base.r * base.r);
        assert_relative_eq!(ratio.re, expect, max_relative = 1e-12);
        assert!(ratio.im.abs() <= 1e-12);

        // cross-check with dense finite differences of the closed form
        // (Richardson-extrapolated central differences)
        let f = |r: f64, phi: f64| -> Complex64 {
            c64(1.0 / r, 0.0) * (c64(0.0, -3.0 * phi)).exp()
        };
        let lap_fd_at = |h: f64| -> Complex64 {
            let d2r = (f(base.r + h, base.phi) - 2.0 * f(base.r, base.phi)
                + f(base.r - h, base.phi))
                / c64(h * h, 0.0);
            let d1r = (f(base.r + h, base.phi) - f(base.r - h, base.phi)) / c64(2.0 * h, 0.0);
            let d2p = (f(base.r, base.phi + h) - 2.0 * f(base.r, base.phi)
                + f(base.r, base.phi - h))
                / c64(h * h, 0.0);
            d2r + d1r / c64(base.r, 0.0) + d2p / c64(base.r * base.r, 0.0)
        };
        let lap_fd = (lap_fd_at(5e-4) * 4.0 - lap_fd_at(1e-3)) / 3.0;
        let ratio_fd = lap_fd / f(base.r, base.phi);
        assert!(
            (ratio - ratio_fd).norm() <= 1e-8 * ratio_fd.norm().max(1.0),
            "{ratio} vs {ratio_fd}"
        );
    }

    #[test]
    fn ratio_agrees_with_direct_jet_division() {
        // log-route equals applying the operator to the plain jet and dividing
        let base = BasePoint { r: 1.1, phi: 0.25 };
        let jr = jet_variable(Var::R, base).unwrap();
        let jp = jet_variable(Var::Phi, base).unwrap();
        let u = jr.powf(-2.0).unwrap().mul(&jp.scale(c64(0.0, 1.0)).exp());
        let w = u.ln().unwrap();
        let lap = PolarOperator::laplacian();
        let via_log = log_derivative_ratio(&w, &lap);
        let direct = lap.apply(&u) / u.value();
        assert!((via_log - direct).norm() <= 1e-11 * direct.norm().max(1.0));
    }

    #[test]
    fn anisotropic_factor_annihilates_linear_coordinates() {
        // (∂₁² + b∂₂²) x₂ = 0; verified through the polar table
        let base = BasePoint { r: 1.4, phi: 0.7853981633974483 };
        let op = PolarOperator::anisotropic_factor(2.0);
        // jet of x₂ = r sin φ
        let jr = jet_variable(Var::R, base).unwrap();
        let jp = jet_variable(Var::Phi, base).unwrap();
        let u = jr.mul(&jp.sin());
        let v = op.apply(&u);
        assert!(v.norm() <= 1e-13, "{v}");
    }

    #[test]
    fn composed_biharmonic_is_angle_free() {
        let op = PolarOperator::fourth_order_product(1.0);
        assert!(op.is_angle_free());
        assert_eq!(op.order, 4);
    }

    #[test]
    fn product_on_quartic_monomial() {
        // (∂₁² + 2∂₂²) Δ x₁⁴ = (∂₁² + 2∂₂²)(12 x₁²) = 24
        let op = PolarOperator::fourth_order_product(2.0);
        for &(r, phi) in &[(1.0, 0.0), (2.0, 1.1), (0.7, -2.0)] {
            let base = BasePoint { r, phi };
            let jr = jet_variable(Var::R, base).unwrap();
            let jp = jet_variable(Var::Phi, base).unwrap();
            let x1 = jr.mul(&jp.cos());
            let u = x1.mul(&x1).mul(&x1).mul(&x1);
            let v = op.apply(&u);
            assert_relative_eq!(v.re, 24.0, max_relative = 1e-10);
            assert!(v.im.abs() <= 1e-10);
        }
    }

    #[test]
    fn composition_matches_sequential_application_on_radial_cubic() {
        // Δ r³ = 9r, then (∂₁² + b∂₂²)(9r) = 9(1 + (b-1)cos²φ)/r evaluated directly
        let b = 2.0;
        let op = PolarOperator::fourth_order_product(b);
        for &(r, phi) in &[(1.3, 0.2), (0.8, 2.4), (3.0, -1.0)] {
            let base = BasePoint { r, phi };
            let jr = jet_variable(Var::R, base).unwrap();
            let u = jr.mul(&jr).mul(&jr);
            let got = op.apply(&u);
            let expect = 9.0 * (1.0 + (b - 1.0) * phi.cos() * phi.cos()) / r;
            assert_relative_eq!(got.re, expect, max_relative = 1e-10);
            assert!(got.im.abs() <= 1e-12);
        }
    }

    /// Dense bivariate polynomial with exact Cartesian differentiation.
    #[derive(Clone)]
    struct Poly {
        // coeff[i][j] multiplies x₁^i x₂^j
        c: Vec<Vec<f64>>,
    }

    impl Poly {
        fn eval(&self, x: [f64; 2]) -> f64 {
            let mut acc = 0.0;
            for (i, row) in self.c.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    acc += v * x[0].powi(i as i32) * x[1].powi(j as i32);
                }
            }
            acc
        }
        fn dx(&self, axis: usize) -> Poly {
            let n = self.c.len();
            let m = self.c[0].len();
            let mut c = vec![vec![0.0; m]; n];
            for i in 0..n {
                for j in 0..m {
                    match axis {
                        0 if i + 1 < n => c[i][j] = self.c[i + 1][j] * (i + 1) as f64,
                        1 if j + 1 < m => c[i][j] = self.c[i][j + 1] * (j + 1) as f64,
                        _ => {}
                    }
                }
            }
            Poly { c }
        }
        fn jet_at(&self, base: BasePoint) -> Jet4 {
            let jr = jet_variable(Var::R, base).unwrap();
            let jp = jet_variable(Var::Phi, base).unwrap();
            let x1 = jr.mul(&jp.cos());
            let x2 = jr.mul(&jp.sin());
            let mut acc = Jet4::constant(base, c64(0.0, 0.0));
            for (i, row) in self.c.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if *v == 0.0 {
                        continue;
                    }
                    let mut term = Jet4::constant(base, c64(*v, 0.0));
                    for _ in 0..i {
                        term = term.mul(&x1);
                    }
                    for _ in 0..j {
                        term = term.mul(&x2);
                    }
                    acc = acc.add(&term);
                }
            }
            acc
        }
    }

    #[test]
    fn cartesian_cross_check_on_random_polynomials() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xabcd);
        let b = 2.0;
        let op = PolarOperator::fourth_order_product(b);
        for _ in 0..20 {
            let deg = 6usize;
            let mut c = vec![vec![0.0; deg + 1]; deg + 1];
            for (i, row) in c.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    if i + j <= deg {
                        *v = rng.gen_range(-1.0..1.0);
                    }
                }
            }
            let p = Poly { c };
            // exact Cartesian P p = (∂₁² + b ∂₂²)(∂₁² + ∂₂²) p
            let lap = {
                let a = p.dx(0).dx(0);
                let bb = p.dx(1).dx(1);
                Poly {
                    c: a
                        .c
                        .iter()
                        .zip(&bb.c)
                        .map(|(r1, r2)| r1.iter().zip(r2).map(|(u, v)| u + v).collect())
                        .collect(),
                }
            };
            let pp = {
                let a = lap.dx(0).dx(0);
                let bb = lap.dx(1).dx(1);
                Poly {
                    c: a
                        .c
                        .iter()
                        .zip(&bb.c)
                        .map(|(r1, r2)| r1.iter().zip(r2).map(|(u, v)| u + b * v).collect())
                        .collect(),
                }
            };
            let r = rng.gen_range(0.5..2.0);
            let phi = rng.gen_range(-3.0..3.0);
            let base = BasePoint { r, phi };
            let got = op.apply(&p.jet_at(base));
            let expect = pp.eval([r * phi.cos(), r * phi.sin()]);
            let scale = expect.abs().max(1.0);
            assert!(
                (got.re - expect).abs() <= 1e-9 * scale && got.im.abs() <= 1e-9 * scale,
                "got {got}, expect {expect}"
            );
        }
    }

    #[test]
    fn linearity_of_application() {
        let base = BasePoint { r: 1.2, phi: 0.5 };
        let jr = jet_variable(Var::R, base).unwrap();
        let jp = jet_variable(Var::Phi, base).unwrap();
        let u = jr.exp().mul(&jp.sin());
        let v = jr.powf(-1.0).unwrap().mul(&jp.cos());
        let op = PolarOperator::fourth_order_product(2.0);
        let (a, b) = (c64(2.0, 1.0), c64(-0.5, 3.0));
        let lhs = op.apply(&u.scale(a).add(&v.scale(b)));
        let rhs = a * op.apply(&u) + b * op.apply(&v);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn rotation_covariance_of_biharmonic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let op = PolarOperator::fourth_order_product(1.0);
        let mut c = vec![vec![0.0; 5]; 5];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i + j <= 4 {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let p = Poly { c };
        for &theta in &[0.3, 1.7, -2.2] {
            let (r, phi) = (1.4, 0.6);
            // field rotated by theta, evaluated at angle phi, equals the
            // original field at angle phi + theta; the table must commute
            let a = op.apply(&p.jet_at(BasePoint { r, phi: phi + theta }));
            let jet_rotated = p.jet_at(BasePoint { r, phi: phi + theta });
            let mut shifted = jet_rotated;
            shifted.base.phi = phi; // same coefficients, evaluated at angle phi
            let b = op.apply(&shifted);
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }
}
