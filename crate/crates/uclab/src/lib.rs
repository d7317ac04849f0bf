//! uclab: a numerical laboratory for weighted a priori inequalities of
//! elliptic operators in the plane.
//!
//! The crate has three legs:
//!
//! * **Pseudoconvexity verdicts** — Poisson brackets of shifted symbols
//!   p(x, ξ + iτ∇φ) sampled over characteristic sets, with closed-form
//!   cross-checks ([`symbols`], [`weights`], [`pseudoconvex`]).
//! * **A slowly decaying eigenfunction construction** — a complex field u on
//!   chained annuli with |u| ~ exp(-c r^{8/7}) and a bounded zeroth-order
//!   coefficient V = -Pu/u for the fourth-order operator
//!   P = (∂₁² + b∂₂²)Δ ([`meshkov`], [`operators`], [`analysis`]).
//! * **Weighted-inequality stress tests** — τ-sweeps of both sides of the
//!   polyharmonic and fourth-order Carleman inequalities on generated test
//!   functions ([`carleman`]).
//!
//! Everything is deterministic given a seed; the `uclab` binary exposes the
//! verification campaigns as subcommands.

pub mod analysis;
pub mod carleman;
pub mod cli;
pub mod config;
pub mod jets;
pub mod meshkov;
pub mod operators;
pub mod pseudoconvex;
pub mod report;
pub mod rng;
pub mod symbols;
pub mod weights;
