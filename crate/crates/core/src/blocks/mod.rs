//! Closed-form solution blocks, stability intervals, `Π` assembly and tails.

pub mod block;
pub mod pi;
pub mod tail;

pub use block::{block_image, solve_block, solve_block_exact, stability_interval, SolutionBlock, StabilityInterval};
pub use pi::{assemble_pi, gamma_threshold, gap_floor, PiFunction};
pub use tail::{
    analytic_tail, hybrid_tail, measured_tail, pi_error_bound, pointwise_error, tail_bound, HybridTail, PointwiseError,
    DEFAULT_TAIL_BLOCKS,
};
