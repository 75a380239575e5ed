//! Throughput analysis of an accumulate-then-forward (ATF) wireless-energy-
//! harvesting MIMO relay under co-channel interference.
//!
//! The crate evaluates the system two independent ways — a closed-form
//! battery Markov-chain pipeline ([`markov::analytic_pipeline`]) and a
//! block-level Monte Carlo protocol simulator ([`sim::simulate_atf`]) — and
//! ships a validation suite that cross-checks them.
//!
//! The scalar-generic math core (special functions, gamma moment matching,
//! hypoexponential densities, the battery chain) works for any
//! [`Scalar`]; the concrete aliases below fix `f64`, which the samplers,
//! simulator and CLI use throughout.

use num_traits::Float;

pub mod channel;
pub mod gamma;
pub mod hypoexp;
pub mod linalg;
pub mod markov;
pub mod outage;
pub mod quad;
pub mod sampling;
pub mod scenario;
pub mod sim;
pub mod special;
pub mod validate;

/// Floating-point scalar for the analytic core.
pub trait Scalar: Float + std::fmt::Debug + Send + Sync + 'static {}
impl<T: Float + std::fmt::Debug + Send + Sync + 'static> Scalar for T {}

pub type GammaParams64 = gamma::GammaParams<f64>;
pub type HypoExpParams64 = hypoexp::HypoExpParams<f64>;
pub type BatteryModel64 = markov::BatteryModel<f64>;
pub type TransitionMatrix64 = markov::TransitionMatrix<f64>;
pub type StationaryDist64 = markov::StationaryDist<f64>;

pub use channel::{SystemConfig, Topology};
pub use sampling::RngStream;
