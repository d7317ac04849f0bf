//! One annulus of the construction: the degree-n inner form is rearranged
//! into the degree-(n+k) outer form across four radial stages.
//!
//! Writing z^{-q} for r^{-q}e^{-iqφ} and W = ρ^{3/7}, the field is the
//! three-piece sum
//!
//!   u = ψ₁(r)·z^{-n}  +  ψ₂ψ₄(r)·M(r, φ)  +  ψ₅(r)·a₁ z^{-(n+k)},
//!
//! with the middle branch
//!
//!   M = -c₁ · r^{-(n-2k)} · exp(-i[(n+2k)φ + ψ_d(r)Φ(φ)]) · h(r),
//!
//! c₁ = (ρ+W)^{-2k}, h = ψ₃ + (1-ψ₃)g₃, g₃ = ((ρ+3W)/r)^{4k}.
//!
//! Stage windows (offsets in units of W): stage 1 hands over from the inner
//! harmonic to M across the modulus crossing at ρ+W; stage 2 removes the
//! plateau phase Φ on [15/7, 20/7]; stage 3 slides the radial power from
//! -(n-2k) to -(n+2k) via h on [22/7, 27/7]; stage 4 hands over to the
//! outer harmonic across the second crossing at ρ+5.5W.
//!
//! Both hand-overs cross where the competing pieces are exactly in the
//! kernel of the fourth-order operator on a neighborhood (the plateau
//! sectors at ρ+W, the whole annulus band at ρ+5.5W), so the zeros forced
//! by the winding change -n → -(n+2k) → -(n+k) sit where Pu ≡ 0. In the
//! gap sectors at the first crossing the middle branch is not annihilated;
//! the potential probe excludes a thin band there (see
//! [`AnnulusSolution::potential_exclusion`]).

use super::bump::RadialCutoff;
use super::phase::PhaseFunction;
use super::plan::{annulus_amplitude_log, AnnulusEntry};
use crate::jets::{jet_variable, BasePoint, Jet4, Var};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("degree budget exhausted: n - 2k = {0} must stay positive (n = {1}, k = {2})")]
    DegreeBudget(i64, i64, i64),
    #[error(transparent)]
    Phase(#[from] super::phase::PhaseError),
    #[error(transparent)]
    Bump(#[from] super::bump::BumpError),
    #[error("field vanishes at (r = {r}, phi = {phi}) on the build probe")]
    VanishingField { r: f64, phi: f64 },
    #[error("radius {0} outside the annulus [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Inner,
    HandOverIn,
    PhaseRemoval,
    PowerSlide,
    HandOverOut,
    Outer,
}

#[derive(Clone, Debug)]
pub struct AnnulusSolution {
    pub entry: AnnulusEntry,
    pub w: f64,
    pub r1_cross: f64,
    pub r4_cross: f64,
    pub r3_anchor: f64,
    pub log_c1: f64,
    pub log_c2: f64,
    pub log_a1: f64,
    pub phase: PhaseFunction,
    psi1: RadialCutoff,
    psi2: RadialCutoff,
    psi_dress: RadialCutoff,
    psi3: RadialCutoff,
    psi4: RadialCutoff,
    psi5: RadialCutoff,
}

const JET_ORDER: usize = 4;

/// One active piece at a radius: linear-scale envelope jet and the jet of
/// the logarithm of its core.
struct Piece {
    env: crate::jets::RJet,
    core: Jet4,
    log_mag: f64,
}

impl AnnulusSolution {
    pub fn build(entry: AnnulusEntry) -> Result<Self, SegmentError> {
        let (rho, n, k) = (entry.rho, entry.n, entry.k);
        if n - 2 * k <= 0 {
            return Err(SegmentError::DegreeBudget(n - 2 * k, n, k));
        }
        let w = entry.width_scale();
        let at = |a: f64| rho + a * w;
        let r1_cross = at(1.0);
        let r3_anchor = at(3.0);
        let r4_cross = at(5.5);
        let kf = k as f64;
        let log_c1 = -2.0 * kf * r1_cross.ln();
        let log_c2 = log_c1 + 4.0 * kf * r3_anchor.ln();
        let log_a1 = annulus_amplitude_log(rho, k);
        let seg = AnnulusSolution {
            entry,
            w,
            r1_cross,
            r4_cross,
            r3_anchor,
            log_c1,
            log_c2,
            log_a1,
            phase: PhaseFunction::build(n, k)?,
            psi1: RadialCutoff::falling(at(13.0 / 7.0), at(1.9))?,
            psi2: RadialCutoff::rising(at(0.1), at(1.0 / 7.0))?,
            psi_dress: RadialCutoff::falling(at(15.0 / 7.0), at(20.0 / 7.0))?,
            psi3: RadialCutoff::falling(at(22.0 / 7.0), at(27.0 / 7.0))?,
            psi4: RadialCutoff::falling(at(48.0 / 7.0), at(6.9))?,
            psi5: RadialCutoff::rising(at(4.1), at(29.0 / 7.0))?,
        };
        seg.positivity_probe(48, 96)?;
        Ok(seg)
    }

    pub fn inner_radius(&self) -> f64 {
        self.entry.rho
    }

    pub fn outer_radius(&self) -> f64 {
        self.entry.outer_radius()
    }

    pub fn stage(&self, r: f64) -> Stage {
        let a = (r - self.entry.rho) / self.w;
        if a < 0.1 {
            Stage::Inner
        } else if a < 2.0 {
            Stage::HandOverIn
        } else if a < 3.0 {
            Stage::PhaseRemoval
        } else if a < 4.0 {
            Stage::PowerSlide
        } else if a < 6.9 {
            Stage::HandOverOut
        } else {
            Stage::Outer
        }
    }

    /// Radial band around the first hand-over crossing where the gap-sector
    /// zeros of u live; the potential probe keeps out of it. The half-width
    /// makes |1 - (r/r₁*)^{2k}| ≥ 0.3 outside the band.
    pub fn potential_exclusion(&self) -> (f64, f64) {
        let half = 0.35 * self.r1_cross / (2.0 * self.entry.k as f64);
        (self.r1_cross - half, self.r1_cross + half)
    }

    fn check_range(&self, r: f64) -> Result<(), SegmentError> {
        if r < self.inner_radius() - 1e-9 || r > self.outer_radius() + 1e-9 {
            return Err(SegmentError::OutOfRange(
                r,
                self.inner_radius(),
                self.outer_radius(),
            ));
        }
        Ok(())
    }

    // -- piece assembly (jets) ---------------------------------------------

    fn inner_piece(&self, r: f64, phi: f64) -> Option<Piece> {
        if self.psi1.is_flat_zero(r) {
            return None;
        }
        let base = BasePoint { r, phi };
        let n = self.entry.n as f64;
        let lr = jet_variable(Var::R, base).expect("r > 0 inside annulus").ln().unwrap();
        let jphi = jet_variable(Var::Phi, base).unwrap();
        let core = Jet4::constant(base, Complex64::new(self.entry.log_a, 0.0))
            .add(&lr.scale(Complex64::new(-n, 0.0)))
            .add(&jphi.scale(Complex64::new(0.0, -n)));
        let env = self.psi1.rjet(JET_ORDER, r);
        let log_mag = env.value().ln() + core.value().re;
        Some(Piece { env, core, log_mag })
    }

    fn middle_piece(&self, r: f64, phi: f64) -> Option<Piece> {
        if self.psi2.is_flat_zero(r) || self.psi4.is_flat_zero(r) {
            return None;
        }
        let base = BasePoint { r, phi };
        let (n, k) = (self.entry.n as f64, self.entry.k as f64);
        let lr = jet_variable(Var::R, base).unwrap().ln().unwrap();
        let jphi = jet_variable(Var::Phi, base).unwrap();
        // log(-c₁) + log a = log a + log c₁ + iπ
        let mut core = Jet4::constant(
            base,
            Complex64::new(self.entry.log_a + self.log_c1, std::f64::consts::PI),
        );
        core = core.add(&lr.scale(Complex64::new(-(n - 2.0 * k), 0.0)));
        core = core.add(&jphi.scale(Complex64::new(0.0, -(n + 2.0 * k))));
        // plateau phase dressing -i ψ_d(r) Φ(φ)
        if !self.psi_dress.is_flat_zero(r) {
            let dress = self.psi_dress.rjet(JET_ORDER, r).embed_radial(phi);
            let phase = self.phase.rjet(JET_ORDER, phi).embed_angular(r);
            core = core.add(&dress.mul(&phase).scale(Complex64::new(0.0, -1.0)));
        }
        // radial power slide log h
        core = core.add(&self.log_h_jet(r, phi));
        let env = self
            .psi2
            .rjet(JET_ORDER, r)
            .mul(&self.psi4.rjet(JET_ORDER, r));
        let log_mag = env.value().ln() + core.value().re;
        Some(Piece { env, core, log_mag })
    }

    fn log_h_jet(&self, r: f64, phi: f64) -> Jet4 {
        let base = BasePoint { r, phi };
        let k4 = 4.0 * self.entry.k as f64;
        if self.psi3.is_flat_one(r) {
            return Jet4::constant(base, Complex64::new(0.0, 0.0));
        }
        let lr = jet_variable(Var::R, base).unwrap().ln().unwrap();
        let log_g3 = Jet4::constant(base, Complex64::new(k4 * self.r3_anchor.ln(), 0.0))
            .add(&lr.scale(Complex64::new(-k4, 0.0)));
        if self.psi3.is_flat_zero(r) {
            return log_g3;
        }
        let psi3 = self.psi3.rjet(JET_ORDER, r).embed_radial(phi);
        let one = Jet4::constant(base, Complex64::new(1.0, 0.0));
        let h = psi3.add(&one.sub(&psi3).mul(&log_g3.exp()));
        h.ln().expect("h > 0 on the slide window")
    }

    fn outer_piece(&self, r: f64, phi: f64) -> Option<Piece> {
        if self.psi5.is_flat_zero(r) {
            return None;
        }
        let base = BasePoint { r, phi };
        let nk = (self.entry.n + self.entry.k) as f64;
        let lr = jet_variable(Var::R, base).unwrap().ln().unwrap();
        let jphi = jet_variable(Var::Phi, base).unwrap();
        let core = Jet4::constant(
            base,
            Complex64::new(self.entry.log_a + self.log_a1, 0.0),
        )
        .add(&lr.scale(Complex64::new(-nk, 0.0)))
        .add(&jphi.scale(Complex64::new(0.0, -nk)));
        let env = self.psi5.rjet(JET_ORDER, r);
        let log_mag = env.value().ln() + core.value().re;
        Some(Piece { env, core, log_mag })
    }

    fn active_pieces(&self, r: f64, phi: f64) -> Vec<Piece> {
        [
            self.inner_piece(r, phi),
            self.middle_piece(r, phi),
            self.outer_piece(r, phi),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    /// Order-4 jet of log u at (r, φ).
    pub fn log_jet(&self, r: f64, phi: f64) -> Result<Jet4, SegmentError> {
        self.check_range(r)?;
        let pieces = self.active_pieces(r, phi);
        debug_assert!(!pieces.is_empty());
        let d = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.log_mag.total_cmp(&b.1.log_mag))
            .map(|(i, _)| i)
            .unwrap();
        let core_d = pieces[d].core;
        let base = core_d.base;
        let mut s = Jet4::constant(base, Complex64::new(0.0, 0.0));
        for p in &pieces {
            // env · exp(core - core_d) assembled as exp(ln env + Δ): the
            // exponent value is ≤ ln(env_d) ≤ 0, so this never overflows
            let ln_env = p.env.embed_radial(phi).ln().expect("active env > 0");
            let exponent = ln_env.add(&p.core.sub(&core_d));
            s = s.add(&exponent.exp());
        }
        if s.value().norm() == 0.0 {
            return Err(SegmentError::VanishingField { r, phi });
        }
        Ok(core_d.add(&s.ln().expect("nonzero total")))
    }

    /// Scalar value of log u (real part log|u|, imaginary part arg u).
    pub fn log_value(&self, r: f64, phi: f64) -> Result<Complex64, SegmentError> {
        self.check_range(r)?;
        let mut vals: [Option<(f64, Complex64)>; 3] = [None, None, None];
        // envelope value and core log value of each active piece
        let (n, k) = (self.entry.n as f64, self.entry.k as f64);
        if !self.psi1.is_flat_zero(r) {
            let env = self.psi1.value(r);
            let core = Complex64::new(self.entry.log_a - n * r.ln(), -n * phi);
            vals[0] = Some((env, core));
        }
        if !(self.psi2.is_flat_zero(r) || self.psi4.is_flat_zero(r)) {
            let env = self.psi2.value(r) * self.psi4.value(r);
            let dress = if self.psi_dress.is_flat_zero(r) {
                0.0
            } else {
                self.psi_dress.value(r) * self.phase.value(phi)
            };
            let log_h = if self.psi3.is_flat_one(r) {
                0.0
            } else {
                let log_g3 = 4.0 * k * (self.r3_anchor.ln() - r.ln());
                if self.psi3.is_flat_zero(r) {
                    log_g3
                } else {
                    let p3 = self.psi3.value(r);
                    (p3 + (1.0 - p3) * log_g3.exp()).ln()
                }
            };
            let core = Complex64::new(
                self.entry.log_a + self.log_c1 - (n - 2.0 * k) * r.ln() + log_h,
                std::f64::consts::PI - ((n + 2.0 * k) * phi + dress),
            );
            vals[1] = Some((env, core));
        }
        if !self.psi5.is_flat_zero(r) {
            let env = self.psi5.value(r);
            let nk = n + k;
            let core = Complex64::new(
                self.entry.log_a + self.log_a1 - nk * r.ln(),
                -nk * phi,
            );
            vals[2] = Some((env, core));
        }
        let mut log_mag_d = f64::NEG_INFINITY;
        let mut core_d = Complex64::new(0.0, 0.0);
        for v in vals.iter().flatten() {
            let lm = v.0.ln() + v.1.re;
            if lm > log_mag_d {
                log_mag_d = lm;
                core_d = v.1;
            }
        }
        let mut s = Complex64::new(0.0, 0.0);
        for v in vals.iter().flatten() {
            s += v.0 * (v.1 - core_d).exp();
        }
        if s.norm() == 0.0 {
            return Err(SegmentError::VanishingField { r, phi });
        }
        Ok(core_d + s.ln())
    }

    /// The middle branch alone (no envelope): jet of log M. In the plateau
    /// sectors of the first hand-over this is an exact harmonic pair form.
    pub fn middle_core_jet(&self, r: f64, phi: f64) -> Option<Jet4> {
        self.middle_piece(r, phi).map(|p| p.core)
    }

    /// Coarse |u| > 0 scan used at build time.
    fn positivity_probe(&self, n_r: usize, n_phi: usize) -> Result<(), SegmentError> {
        let (lo, hi) = (self.inner_radius(), self.outer_radius());
        for i in 0..n_r {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / n_r as f64;
            for j in 0..n_phi {
                let phi = std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64;
                self.log_value(r, phi)?;
            }
        }
        Ok(())
    }
}
