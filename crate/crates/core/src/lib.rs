//! Numerical bounded cohomology of the genus-2 surface group.

pub mod dd;
pub mod cocycle;
pub mod forms;
pub mod fuchsian;
pub mod geom;
pub mod lifts;
pub mod mcg;
pub mod qm;
pub mod quad;
pub mod triangle;
pub mod word;
