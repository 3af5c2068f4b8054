//! Canned experiment drivers: closed-loop stabilization towards a chosen
//! equilibrium, and periodic-input hysteresis sweeps.

mod hysteresis;
mod stabilization;

pub use hysteresis::{
    AREA_MARGIN, CLOSURE_TOL, HysteresisPoint, HysteresisRun, HysteresisSetup, LoopArea,
    area_trend_holds, free_norm_integrator, frequency_sweep, loop_area, run_hysteresis,
};
pub use stabilization::{
    DEFAULT_PERTURBATION, DEFAULT_TOL_CONV, StabilizationReport, default_initial_condition,
    run_stabilization, tangent_direction,
};
