mod rotation;
mod theta;
mod ud;

pub use rotation::{chord, rotation_witness, trinomial_root, RotationWitness};
pub use theta::parse_theta;
pub use ud::{counting, discrepancy, fractional_parts, ud_test, UdReport};
