//! Integer sequences, gap subsequences, coverage and partitions, and the
//! enumeration of Gaussian-rational targets.

pub mod coverage;
pub mod divergence;
pub mod partition;
pub mod spec;
pub mod subsequence;
pub mod sum;
pub mod targets;

pub use coverage::{affine_log10_n0, affine_log10_terms, coverage_n0, required_coverage};
pub use divergence::{divergence_report, Classification, DivergenceReport};
pub use partition::{locate_cell, partition_points, FinalCase, Partition, StepRule};
pub use spec::SequenceSpec;
pub use subsequence::{extract_subsequence, SubsequenceSpec};
pub use sum::NeumaierSum;
pub use targets::{enumerate_targets, TargetEnumerator};
