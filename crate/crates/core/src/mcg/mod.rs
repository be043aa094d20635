//! Mapping class group action: Dehn twists, their boundary maps, and the
//! dynamics of the earthquake on the circle.

pub mod boundary_map;
pub mod earthquake;
pub mod experiment;
pub mod svg;
pub mod twist;

pub use boundary_map::{act_on_cocycle, CircleMap, FixedPointMap, MapError};
pub use earthquake::{AffectedRegion, Earthquake};
pub use twist::{TwistAutomorphism, TwistError};
