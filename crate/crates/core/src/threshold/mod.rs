//! Sparse Gaussian threshold oracles and their privacy calibration.

mod accounting;
mod calibrate;
mod oracle;

pub use accounting::{forest_delta, two_sided_delta, two_sided_delta_parts, TwoSidedDelta};
pub use calibrate::{
    calibrate, calibrate_simple, calibrate_tight, closed_form_gate_ratio, queries_per_datapoint,
    Calibration, CalibrationMode,
};
pub use oracle::{
    check_threshold, check_threshold_one_sided, check_threshold_two_sided, CheckThreshold, Decision,
    GaussianSparseThreshold, InstrumentedOracle, ThresholdOracleConfig, Variant,
};
