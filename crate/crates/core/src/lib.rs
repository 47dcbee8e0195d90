//! Limit laws for geometric means of free random variables.
//!
//! For `μ` the law of `|T|²` of a family of *-free identically distributed
//! operators, `B_n^{1/2n}` with `B_n = T₁*⋯T_n*T_n⋯T₁` converges to a law
//! `ν = G(μ)`. This crate evaluates the S-transform of `μ` on the real slice,
//! builds `ν` from the quantile table `F_μ(t) = S_μ(t−1)^{−1/2}`, derives the
//! images of free convolution powers and the Lyapunov exponent law, and checks
//! all of it against Monte Carlo products of Haar-rotated random matrices.
//!
//! The analytic modules are generic over [`Real`] (`f32` or `f64`); the
//! simulator in [`rmt`] runs in `f64`.

// `!(a > b)` also catches NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gmap;
pub mod io;
pub mod lyapunov;
pub mod measure;
pub mod quad;
pub mod rmt;
pub mod root;
pub mod scalar;
pub mod xform;

pub use error::{Error, Result};
pub use gmap::{
    closed_form_cdf, gmap, gmap_boxplus_power, gmap_boxtimes_power, gmap_closed_form,
    support_bounds, Image, ImageReport, Truncation,
};
pub use lyapunov::lyapunov_distribution;
pub use measure::{Atom, EvalConfig, Family, Measure, Violation, DEFAULT_FAMILY_POINTS};

pub use rmt::{
    ks_report, ks_two_sample, lyapunov_empirical, simulate, simulate_direct, simulate_qr_log,
    CdfRow, GofReport, Method, SimConfig, SpectrumSample,
};
pub use scalar::Real;
pub use xform::{chi, f_table, psi, s_at_zero, s_transform, FTable, Transform};

pub type Measure64 = Measure<f64>;
pub type Measure32 = Measure<f32>;
pub type EvalConfig64 = EvalConfig<f64>;
pub type EvalConfig32 = EvalConfig<f32>;
pub type FTable64 = FTable<f64>;
pub type FTable32 = FTable<f32>;
pub type Family64 = Family<f64>;
pub type Image64 = Image<f64>;
