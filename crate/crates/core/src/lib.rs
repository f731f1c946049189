//! Wearable valence pipeline core.
//!
//! Turns raw photoplethysmography (PPG) sessions and PANAS-10 self-reports into
//! heart-rate-variability features, significance-masked correlation matrices
//! and binary valence classification metrics. Everything here is pure
//! computation over `alloc` collections so it can run without `std`; file
//! formats and the command line live in the `valence-pipe` crate.
//!
//! The usual flow for one self-report:
//!
//! ```
//! use valence_core::synth::{gen_ppg, IbiSource, SynthSpec};
//! use valence_core::{hrv, preprocess};
//!
//! let spec = SynthSpec {
//!     ibi: IbiSource::Sequence(vec![850.0; 90]),
//!     noise_sd: 0.0,
//!     sample_rate_hz: 25.0,
//!     seed: 7,
//! };
//! let (session, _truth) = gen_ppg(&spec, "s1", "p1", 0).unwrap();
//! let window = preprocess::extract_window(&session, 40_000, 30.0).unwrap();
//! let filtered = preprocess::bandpass(&window, &preprocess::BandpassConfig::default()).unwrap();
//! let features = hrv::compute_features(&filtered).unwrap();
//! assert!((features.bpm - 60_000.0 / 850.0).abs() < 0.5);
//! ```
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod affect;
pub mod classify;
pub mod dataset;
pub mod filter;
pub mod hrv;
pub mod model;
pub mod preprocess;
pub mod stats;
pub mod synth;

mod num;

pub use model::{
    AffectScores, Emotion, FeatureName, HrvFeatures, Label, LabeledSample, NnSeries, PpgSample, PpgSession,
    SurveyError, SurveyResponse, Violation,
};
