//! Auditory filterbank design toolkit.
//!
//! The crate covers four pieces that build on each other:
//!
//! * [`scales`]: ERB functions (polynomial, linear, logarithmic) and the
//!   frequency-warping scales obtained by integrating `1 / ERB(f)`.
//! * [`design`]: equidistant center-frequency selection on a scale, Q-factors
//!   and the frequency-coverage metric with its closed forms.
//! * [`gammatone`]: gammatone filters matched to an ERB model, their
//!   bandwidth constant `k(n)`, spectral bandwidth measurement and filterbank
//!   application.
//! * [`signals`]: harmonic speaker synthesis for demos and tests.
//!
//! ```
//! use filterbank_core::{design, ErbModel, FrequencyHz, ScaleFunction};
//!
//! let scale = ScaleFunction::logarithmic(7.7, FrequencyHz(20.0)).unwrap();
//! let req = design::DesignRequest::new(
//!     FrequencyHz(200.0),
//!     FrequencyHz(3600.0),
//!     16,
//!     scale,
//!     design::BandwidthRule::ErbScaled { k: 0.8865, erb: ErbModel::Logarithmic { a: 7.7 } },
//! )
//! .unwrap();
//! let fb = design::FilterbankDesign::build(&req).unwrap();
//! assert!(fb.coverages.iter().all(|c| (c - 0.6).abs() < 0.01));
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
mod error;
mod fft;
pub mod gammatone;
pub mod quadrature;
pub mod scales;
pub mod signals;
mod units;
pub mod wav;

pub use design::{BandwidthRule, DesignRequest, FilterbankDesign};
pub use error::{Error, Result};
pub use gammatone::{GammatoneFilter, SampledSignal};
pub use scales::{ErbModel, ScaleFunction};
pub use signals::HarmonicSpeaker;
pub use units::FrequencyHz;
