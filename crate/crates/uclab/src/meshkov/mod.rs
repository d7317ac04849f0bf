//! Construction of a complex field u on chained annuli with |u| decaying
//! like exp(-c r^{8/7}) and a bounded zeroth-order coefficient
//! V = -(Pu)/u for the fourth-order operator P = (∂₁² + b∂₂²)Δ.
//!
//! Everything is stored in log-amplitude/phase form; linear-scale
//! amplitudes (which underflow long before the chain ends) are never
//! materialized.

pub mod bump;
pub mod phase;
pub mod plan;
pub mod segment;

pub use bump::RadialCutoff;
pub use phase::PhaseFunction;
pub use plan::{plan_annuli, AnnulusEntry, AnnulusPlan, PlanError};
pub use segment::{AnnulusSolution, SegmentError, Stage};

use crate::jets::Jet4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshkovError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("annulus {index} (rho = {rho}): {source}")]
    Segment {
        index: usize,
        rho: f64,
        source: SegmentError,
    },
    #[error("radius {0} outside the chain [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
    #[error("manifest format {0:?} is not supported")]
    BadManifest(String),
}

/// The chained field: one solution segment per plan entry.
#[derive(Clone, Debug)]
pub struct GlobalSolution {
    pub plan: AnnulusPlan,
    pub segments: Vec<AnnulusSolution>,
}

impl GlobalSolution {
    pub fn assemble(plan: AnnulusPlan) -> Result<Self, MeshkovError> {
        let segments = plan
            .entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                AnnulusSolution::build(*e).map_err(|source| MeshkovError::Segment {
                    index,
                    rho: e.rho,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GlobalSolution { plan, segments })
    }

    pub fn inner_radius(&self) -> f64 {
        self.plan.rho1
    }

    pub fn outer_radius(&self) -> f64 {
        self.plan.outer_radius()
    }

    pub fn segment_at(&self, r: f64) -> Result<&AnnulusSolution, MeshkovError> {
        let idx = self
            .plan
            .locate(r)
            .ok_or(MeshkovError::OutOfRange(r, self.inner_radius(), self.outer_radius()))?;
        Ok(&self.segments[idx])
    }

    /// Order-4 jet of log u at (r, φ).
    pub fn log_jet(&self, r: f64, phi: f64) -> Result<Jet4, MeshkovError> {
        let idx = self
            .plan
            .locate(r)
            .ok_or(MeshkovError::OutOfRange(r, self.inner_radius(), self.outer_radius()))?;
        self.segments[idx]
            .log_jet(r, phi)
            .map_err(|source| MeshkovError::Segment { index: idx, rho: self.segments[idx].entry.rho, source })
    }

    /// Scalar log u = log|u| + i arg u.
    pub fn log_value(&self, r: f64, phi: f64) -> Result<Complex64, MeshkovError> {
        let idx = self
            .plan
            .locate(r)
            .ok_or(MeshkovError::OutOfRange(r, self.inner_radius(), self.outer_radius()))?;
        self.segments[idx]
            .log_value(r, phi)
            .map_err(|source| MeshkovError::Segment { index: idx, rho: self.segments[idx].entry.rho, source })
    }

    /// Angular degree of u on the circle of radius r: the winding number of
    /// arg u over a full turn, negated (so the pure form r^{-q}e^{-iqφ} has
    /// degree q). `n_angles` must resolve the fastest phase variation.
    pub fn angular_degree(&self, r: f64, n_angles: usize) -> Result<i64, MeshkovError> {
        let mut winding = 0.0;
        let mut prev = self.log_value(r, 0.0)?.im;
        let first = prev;
        for j in 1..=n_angles {
            let phi = std::f64::consts::TAU * j as f64 / n_angles as f64;
            let cur = if j == n_angles {
                first + (self.log_value(r, std::f64::consts::TAU)?.im - first)
            } else {
                self.log_value(r, phi)?.im
            };
            let mut d = cur - prev;
            // principal-value wrap
            d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
            winding += d;
            prev = cur;
        }
        Ok(-(winding / std::f64::consts::TAU).round() as i64)
    }
}

/// Serialized form of a solution: the plan plus the reading conventions the
/// builder committed to. Segments are rebuilt deterministically on load, so
/// a reloaded solution evaluates bit-identically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionManifest {
    pub format: String,
    pub tool_version: String,
    pub conventions: Vec<String>,
    pub plan: AnnulusPlan,
    pub stage_offsets_in_width_units: Vec<(String, f64, f64)>,
}

pub const MANIFEST_FORMAT: &str = "uclab-solution-v1";

/// Reading conventions baked into the construction; embedded in every
/// manifest and report.
pub fn convention_flags() -> Vec<String> {
    vec![
        "degree_law: n_j = floor(rho_j^(8/7))".into(),
        "step_bound: |k_j - 8 rho_j^(4/7)| <= 6".into(),
        "phase_sign: e^{-i n phi} throughout".into(),
        "endpoint_forms: inner r^{-n} e^{-i n phi}, outer a r^{-(n+k)} e^{-i(n+k) phi}, a > 0".into(),
        "stage4_handover: matched-amplitude outer harmonic, crossing at rho + 5.5 rho^(3/7)".into(),
        "amplitude_bookkeeping: log scale only".into(),
    ]
}

/// Per-annulus soundness audit: single-valuedness, interface continuity,
/// modulus positivity on the probe grid, and the plateau residual of the
/// middle branch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructionAudit {
    pub annuli: usize,
    pub grid: (usize, usize),
    /// max over sampled radii of the relative log|u| gap between φ = 0 and φ = 2π.
    pub single_valued_max_rel: f64,
    /// max over interfaces of the relative log|u| jump between neighbor segments.
    pub interface_max_rel: f64,
    /// min over the probe grid of log|u| minus the local amplitude scale
    /// (finite means |u| > 0 everywhere on the grid).
    pub modulus_margin_min: f64,
    pub modulus_all_positive: bool,
    /// max over plateau samples of |Δ(middle branch)/middle| · r²/n².
    pub plateau_residual_max: f64,
    pub pass: bool,
}

impl GlobalSolution {
    /// Runs the soundness battery on every annulus with an n_r × n_phi
    /// cell-centered probe grid per annulus.
    pub fn audit(&self, n_r: usize, n_phi: usize) -> ConstructionAudit {
        use crate::operators::{log_derivative_ratio, PolarOperator};
        use rayon::prelude::*;

        let lap = PolarOperator::laplacian();
        let mut single_valued_max_rel = 0.0_f64;
        let mut interface_max_rel = 0.0_f64;
        let mut plateau_residual_max = 0.0_f64;
        let mut modulus_margin_min = f64::INFINITY;
        let mut all_positive = true;

        for (idx, seg) in self.segments.iter().enumerate() {
            let (lo, hi) = (seg.inner_radius(), seg.outer_radius());
            // positivity over the probe grid, radius-parallel
            let margins: Vec<Option<f64>> = (0..n_r)
                .into_par_iter()
                .map(|i| {
                    let r = lo + (hi - lo) * (i as f64 + 0.5) / n_r as f64;
                    let scale = seg.entry.log_a - seg.entry.n as f64 * r.ln();
                    let mut worst = f64::INFINITY;
                    for j in 0..n_phi {
                        let phi = std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64;
                        match seg.log_value(r, phi) {
                            Ok(lv) if lv.re.is_finite() => {
                                worst = worst.min(lv.re - scale);
                            }
                            _ => return None,
                        }
                    }
                    Some(worst)
                })
                .collect();
            for m in margins {
                match m {
                    Some(v) => modulus_margin_min = modulus_margin_min.min(v),
                    None => all_positive = false,
                }
            }

            // single-valuedness on sampled radii
            for i in 0..24 {
                let r = lo + (hi - lo) * (i as f64 + 0.5) / 24.0;
                if let (Ok(a), Ok(b)) = (
                    seg.log_value(r, 0.0),
                    seg.log_value(r, std::f64::consts::TAU),
                ) {
                    single_valued_max_rel =
                        single_valued_max_rel.max((a.re - b.re).abs() / a.re.abs().max(1.0));
                }
            }

            // interface continuity against the previous segment
            if idx > 0 {
                let prev = &self.segments[idx - 1];
                let r = seg.entry.rho;
                for j in 0..8 {
                    let phi = std::f64::consts::TAU * (j as f64 + 0.3) / 8.0;
                    if let (Ok(a), Ok(b)) = (prev.log_value(r, phi), seg.log_value(r, phi)) {
                        interface_max_rel =
                            interface_max_rel.max((a.re - b.re).abs() / a.re.abs().max(1.0));
                    }
                }
            }

            // plateau residual of the middle branch in the first hand-over
            let n2 = (seg.entry.n as f64).powi(2);
            for i in 0..12 {
                let a = 0.25 + 1.5 * i as f64 / 12.0; // inside [1/7, 13/7]
                let r = seg.entry.rho + a * seg.w;
                for s in 0..16 {
                    let m = (s * (seg.phase.plateau_count() / 16).max(1)) as f64;
                    let phi = m * seg.phase.period;
                    if let Some(core) = seg.middle_core_jet(r, phi) {
                        let ratio = log_derivative_ratio(&core, &lap).norm();
                        plateau_residual_max =
                            plateau_residual_max.max(ratio * r * r / n2);
                    }
                }
            }
        }

        let pass = all_positive
            && single_valued_max_rel <= 1e-10
            && interface_max_rel <= 1e-12
            && plateau_residual_max <= 1e-8;
        ConstructionAudit {
            annuli: self.segments.len(),
            grid: (n_r, n_phi),
            single_valued_max_rel,
            interface_max_rel,
            modulus_margin_min,
            modulus_all_positive: all_positive,
            plateau_residual_max,
            pass,
        }
    }

    pub fn manifest(&self) -> SolutionManifest {
        SolutionManifest {
            format: MANIFEST_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            conventions: convention_flags(),
            plan: self.plan.clone(),
            stage_offsets_in_width_units: vec![
                ("inner_band".into(), 0.0, 0.1),
                ("handover_in".into(), 0.1, 2.0),
                ("phase_removal".into(), 2.0, 3.0),
                ("power_slide".into(), 3.0, 4.0),
                ("handover_out".into(), 4.0, 6.9),
                ("outer_band".into(), 6.9, 7.0),
            ],
        }
    }

    pub fn from_manifest(m: &SolutionManifest) -> Result<Self, MeshkovError> {
        if m.format != MANIFEST_FORMAT {
            return Err(MeshkovError::BadManifest(m.format.clone()));
        }
        Self::assemble(m.plan.clone())
    }
}
