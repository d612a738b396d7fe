//! Trial execution, the experiment matrices and result aggregation.

mod report;
mod spec;
mod trial;

pub use report::{aggregate, AggregateRow, ControllerSummary, SweepReport};
pub use spec::{
    default_matrix, enveloping_matrix, transition_matrix, ControllerKind, Friction, ObjectKind,
    SpecError, SqueezeController, TrialSpec, ENVELOPING_PRESHAPE_DEG,
};
pub use trial::{
    classify_outcome, pose_change, run_trial, run_trials, ClassifyInput, HarnessParams, Outcome,
    Trace, TracePoint, TrialResult, TrialRun,
};

/// Run the 360-trial default matrix.
pub fn run_sweep(
    params: &HarnessParams,
    repetitions: u32,
    base_seed: u64,
    jobs: Option<usize>,
) -> SweepReport {
    let specs = default_matrix(repetitions, base_seed);
    SweepReport::from_results(
        run_trials(&specs, params, jobs, false)
            .into_iter()
            .map(|r| r.result)
            .collect(),
    )
}

pub fn run_enveloping_suite(
    params: &HarnessParams,
    base_seed: u64,
    jobs: Option<usize>,
) -> SweepReport {
    let specs = enveloping_matrix(base_seed);
    SweepReport::from_results(
        run_trials(&specs, params, jobs, false)
            .into_iter()
            .map(|r| r.result)
            .collect(),
    )
}

pub fn run_transition_suite(
    params: &HarnessParams,
    base_seed: u64,
    jobs: Option<usize>,
) -> SweepReport {
    let specs = transition_matrix(base_seed);
    SweepReport::from_results(
        run_trials(&specs, params, jobs, false)
            .into_iter()
            .map(|r| r.result)
            .collect(),
    )
}
