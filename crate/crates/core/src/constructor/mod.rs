mod dichotomy;
mod ladder;
mod pipeline;
mod plan;
mod stage;
mod verify;

pub use dichotomy::{dichotomy_probe, DichotomyReport, Feasibility};
pub use ladder::{witness_ladder, Ladder, DEFAULT_LADDER_LEN, DEFAULT_PERSISTENCE_OFFSET};
pub use pipeline::{empty_base, persistence_bound, run_pipeline, CauchyEntry, PipelineOptions, PIPELINE_OFFSET, PipelineReport, ScheduleEntry};
pub use plan::{constants, plan_stage, unit_ratio_tail, Constants, Mode, StageParams, StagePlan, CELL_TARGET};
pub use stage::{build_stage, certify_stage, CellRecord, Closeness, StageCertificate};
pub use verify::{grid_error, observe, random_lambdas, stage_lambdas, verify_points, verify_stage, Observation, VerifyReport};
