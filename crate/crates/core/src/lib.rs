//! Heart-rate prediction from wrist-worn accelerometer data.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] parses accelerometer / heart-rate CSV files, generates
//!   synthetic drifting datasets and aligns both series on minute windows.
//! * [`features`] turns one-second acceleration windows into 39 statistical
//!   and spectral features and averages them per minute.
//! * [`regress`] holds the learners: CART regression trees, a bagged
//!   ensemble reporting per-learner spread, and a mean-only baseline.
//! * [`ppaw`] is the online loop that predicts each minute and only reads the
//!   (expensive) heart-rate sensor when the ensemble disagrees unusually.
//! * [`eval`] computes metrics and runs the offline / online experiments.
//! * [`link`] simulates a wearable streaming to a gateway over
//!   newline-delimited JSON and keeps an energy ledger.

pub mod eval;
pub mod features;
pub mod ingest;
pub mod link;
pub mod ppaw;
pub mod regress;

pub use features::FeatureVector;
pub use ingest::{AccelSample, HrSample, MinuteRecord};
