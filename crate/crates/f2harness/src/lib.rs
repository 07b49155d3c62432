//! Experiment runner around the `f2sketch` crate.
//!
//! Three experiments, each reproducible from a single master seed:
//!
//! * `mse` — fixes one stream, varies the hash seeds over `trials`
//!   sketches, and compares the empirical mean squared relative error to
//!   the `eps^2` bound (with a declared `3/sqrt(T)` sampling slack).
//! * `memory` — measures the prefix-free encoding of the sketch at rest
//!   against the `2P ceil(log2(n/P+2)) + 4P` counter budget and the
//!   fixed-width `64P` baseline.
//! * `edisj` — generates YES and NO gap instances and classifies them by
//!   thresholding the sketch estimate at the midpoint of the closed-form
//!   F2 values; passes at accuracy >= 2/3.
//!
//! Trial rows go to CSV (schema versioned in the header line); streams
//! and layout sidecars have documented binary/text/JSON formats in
//! [`formats`].

pub mod config;
pub mod csvout;
pub mod experiments;
pub mod formats;

pub use config::{ConfigFile, ExperimentConfig, Workload};
pub use experiments::{
    run_edisj_experiment, run_memory_experiment, run_mse_experiment, EdisjSummary, MemorySummary,
    MseSummary, TrialRow,
};
