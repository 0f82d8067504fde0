//! Nonlinear evolution by spectral Strang splitting, with run diagnostics,
//! characteristics of the computed flow and two-pulse echo experiments.

pub mod characteristics;
pub mod echo;
pub mod run;
pub mod step;

pub use characteristics::{characteristics, sample_grid, scattering_deviation, ScatteringDeviation};
pub use echo::{
    combination_modes, echo_experiment, echo_kernel, kernel_mean, kernel_peaks, kernel_sweep, predict_echo_time,
    EchoPeak, EchoResult, KernelParams, KernelValue, Pulse,
};
pub use run::{
    check_recurrence, diagnostics, highest_excited_mode, run, run_with, step_count, Diagnostics, ForceHistory, RunOptions, RunOutput,
    TrajectoryRecord, RECURRENCE_FRACTION,
};
pub use step::{apply_kick, max_stable_dt, step, StepOutput, Stepper, STEP_BOUND};
