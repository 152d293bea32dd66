//! Aggregation of isotropic four-nearest-neighbor autoregressive fields on
//! the planar lattice, with a random AR coefficient.
//!
//! The crate covers the full pipeline:
//! - [`theta`]: the random-coefficient law `phi(x) (1/4 - x)^alpha`;
//! - [`spectral`]: the aggregated spectral density, its low-frequency
//!   asymptotics and integrability diagnostics;
//! - [`field`]: exact torus synthesis of single-coefficient fields, finite
//!   aggregates and the Gaussian limit field;
//! - [`analysis`]: periodogram, radial averaging, memory-exponent estimation
//!   and covariance summability diagnostics;
//! - [`io`]: the raw-grid/sidecar and CSV file formats shared with the CLI;
//! - [`battery`]: the self-verification checks behind `aggfield verify`.
//!
//! ```
//! use aggfield::{Frequency, PhiSpec, QuadratureConfig, SpectralModel, SupportSign, ThetaLaw};
//!
//! let quad = QuadratureConfig::default();
//! let law = ThetaLaw::new(0.5, PhiSpec::Constant, SupportSign::Positive, &quad)?;
//! let model = SpectralModel::new(law, 1.0)?;
//!
//! // near the origin the spectrum follows the power asymptote
//! let fr = Frequency::new(1e-3, 1e-3);
//! let ratio = model.f(fr, &quad)? / model.asymptote(fr, &quad)?;
//! assert!((ratio - 1.0).abs() < 1e-2);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

// negated float comparisons are deliberate: `!(x > 0.0)` rejects NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod battery;
pub mod field;
pub mod io;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod theta;

pub use quad::QuadratureConfig;
pub use spectral::{Frequency, SpectralGrid, SpectralModel};
pub use theta::{PhiSpec, SupportSign, ThetaLaw};
