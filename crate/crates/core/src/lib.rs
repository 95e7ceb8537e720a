//! Outage achievable rate regions for K-user quasi-static fading Gaussian
//! broadcast channels whose transmitter knows only the fading statistics.
//!
//! The region is parameterized by a power split `gamma` and the quantile
//! gains `g_k = G_k(epsilon_k)` of the users sorted in decreasing order:
//!
//! ```text
//! R_k < ln(1 + g_k gamma_k rho / (g_k (gamma_1 + ... + gamma_{k-1}) rho + 1))
//! ```
//!
//! Two schemes reach it: blind dirty-paper coding ([`bdpc`]) and statistical
//! superposition coding with a per-realization decoding cascade ([`ssc`]).
//! [`regions`] and [`frontier`] evaluate the region, compare it with
//! time-sharing, and sweep its Pareto boundary.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod bdpc;
pub mod error;
pub mod fading;
pub mod frontier;
pub mod regions;
pub mod rng;
pub mod scalar;
pub mod ssc;

pub use bdpc::{
    bdpc_max_rate, bdpc_user_outage, layer_threshold, optimal_alpha, DirtyPaperChannel,
    PrecoderChoice,
};
pub use error::{Error, Result};
pub use fading::{FadingKind, FadingModel};
pub use frontier::{
    containment_check, star_frontier, td_frontier, ContainmentReport, Frontier, FrontierPoint,
    Scheme,
};
pub use regions::{
    star_boundary_last, star_membership, star_membership_with_tol, star_rate, td_rate, Membership,
    PowerAllocation, RatePoint, SystemSpec, TimeSharingPolicy, User,
};
pub use scalar::Scalar;
pub use ssc::{
    analytic_outage, cascade, mc_outage, suffix_claim_check, DecodingIndicator, McReport,
    UserEstimate,
};

pub type FadingModel64 = FadingModel<f64>;
pub type SystemSpec64 = SystemSpec<f64>;
pub type PowerAllocation64 = PowerAllocation<f64>;
pub type RatePoint64 = RatePoint<f64>;
pub type TimeSharingPolicy64 = TimeSharingPolicy<f64>;
pub type Frontier64 = Frontier<f64>;
pub type DirtyPaperChannel64 = DirtyPaperChannel<f64>;

pub type FadingModel32 = FadingModel<f32>;
pub type SystemSpec32 = SystemSpec<f32>;
pub type PowerAllocation32 = PowerAllocation<f32>;
pub type RatePoint32 = RatePoint<f32>;
pub type Frontier32 = Frontier<f32>;
