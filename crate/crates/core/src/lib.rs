//! Rigorous lower and upper bounds on the Hausdorff measure and dimension of
//! Denjoy minimal sets built from a rotation number and a gap sequence.

pub mod bounds;
pub mod error;
pub mod gaps;
pub mod interval;
pub mod oracle;
pub mod rotation;
pub mod threegap;
pub mod verify;

pub use error::{Error, Result};
pub use gaps::GapSequence;
pub use interval::Interval;
pub use rotation::{ConvergentTable, RotationNumber};
