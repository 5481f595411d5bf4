//! Dynamics on distributed production economies.
//!
//! Three regimes of adaptive behavior on the same market primitives:
//!
//! - **Proportional response** on quasi-linear Fisher markets
//!   ([`prqlin`]): a closed-form KL mirror-descent step that converges to
//!   market equilibrium, with the convex-program objective and the
//!   Bregman machinery to verify the rate.
//! - **Gradient ascent** on Cournot/Tullock competition ([`chaos`]):
//!   provably chaotic for moderate step sizes; the module produces
//!   checkable Li-Yorke certificates (invariant interval plus period-3
//!   point) and scans for the minimum chaotic step size.
//! - **Best response** in the duopoly ([`br`]): closed-form fixed point
//!   and eigenvalue stability classification.
//!
//! [`economy`] holds the shared market arithmetic and [`equilibrium`] the
//! first-order-condition certifiers that connect the regimes.
//!
//! All numeric kernels are generic over [`scalar::Scalar`] (any
//! `num-traits` float); the crate root exports `f64` aliases for the
//! common types.

pub mod br;
pub mod chaos;
pub mod economy;
pub mod equilibrium;
pub mod error;
pub mod matrix;
pub mod prqlin;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` market instance.
pub type Economy = economy::Economy<f64>;
/// `f64` spending state.
pub type SpendingState = economy::SpendingState<f64>;
/// `f64` price family.
pub type PriceFamily = economy::PriceFamily<f64>;
/// `f64` dense matrix.
pub type Mat = matrix::Mat<f64>;
/// `f64` mirror-descent configuration.
pub type MdConfig = prqlin::MdConfig<f64>;
/// `f64` proportional-response trajectory.
pub type Trajectory = prqlin::Trajectory<f64>;
/// `f64` equilibrium report.
pub type EquilibriumReport = equilibrium::EquilibriumReport<f64>;
/// `f64` chaos-map parameters.
pub type GaMapParams = chaos::GaMapParams<f64>;
/// `f64` Li-Yorke certificate.
pub type LiYorkeCertificate = chaos::LiYorkeCertificate<f64>;
/// `f64` stability report.
pub type StabilityReport = br::StabilityReport<f64>;
