//! Simulated multi-rank gather-scatter and global reductions.

mod gather;
mod plan;
mod reduce;

pub use gather::gather_scatter;
pub use plan::{Contributor, GsMode, GsPlan};
pub use reduce::{global_sum, Partials, ReducePrecision};
