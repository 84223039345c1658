//! Prompt-guided dual latent steering for rectified-flow inverse problems.
//!
//! The crate works with analytically exact rectified-flow velocity fields
//! (Gaussian mixtures and exemplar datasets) instead of a learned network,
//! so inversion, steering and restoration can be checked against closed
//! forms.
//!
//! - [`flowfield`]: marginal and endpoint-conditional velocity fields.
//! - [`control`]: LQR steering law, guidance schedules, drift blending.
//! - [`integrate`]: time grids and Euler integration.
//! - [`pdls`]: dual-path inversion and steered generation.
//! - [`degrade`]: blur, downsampling, masking and measurement noise.
//! - [`metrics`]: MSE, PSNR, SSIM and class accuracy.
//! - [`datasets`], [`bench`]: demo assets and the benchmark harness.

pub mod bench;
pub mod control;
pub mod datasets;
pub mod degrade;
pub mod error;
pub mod flowfield;
pub mod integrate;
pub mod metrics;
pub mod pdls;
pub mod rng;

pub use error::{PdlsError, Result};
pub use flowfield::{Condition, FlowField, GaussianMixture, Label};
pub use pdls::{restore, PdlsConfig};
