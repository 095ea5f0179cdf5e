//! Potentials, the transfer operator on cylinder functions, pressure, Gibbs
//! measures and the cohomology tests built on periodic orbits.

mod cohomology;
mod gibbs;
mod potential;
mod transfer;

pub use cohomology::{
    asymptotic_variance, asymptotic_variance_with_step, distortion_constant, livsic_discrepancy,
    periodic_sums, Distortion, LivsicReport, PeriodicSums, CENTERING_TOLERANCE, MAX_PERIOD,
    VARIANCE_STEP,
};
pub use gibbs::{
    gibbs_weights, measure_integral, GibbsApproximation, GibbsLevels, MarkovGibbs,
    NORMALIZATION_TOLERANCE,
};
pub use potential::{Combination, CylinderSample, Potential};
pub use transfer::{
    effective_depth, normalize, pressure, solve_bowen, transfer_matrix, LinearFamily, PerronEigen,
    PressureResult, TransferMatrix,
};
