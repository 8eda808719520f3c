//! Piecewise-affine circle maps with exact breakpoints, represented by their lifts.

mod arc;
mod interval_map;
mod lift;
mod ops;

pub use arc::{circle_dist, dist_to_integer, Arc, CirclePoint};
pub use interval_map::{IntervalMap, Segment};
pub use lift::Lift;
pub use ops::{compose, compose_outer, preimage_arc, rotate_domain, sup_dist};
