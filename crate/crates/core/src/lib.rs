//! Anisotropic Voronoi diagrams under a pointwise quadratic-form distance,
//! their straight-edge dual meshes, and structural verification.

pub mod dual;
pub mod geometry;
pub mod grid;
pub mod metric;
pub mod pipeline;
pub mod primal;
pub mod render;
pub mod report;
pub mod sites;
pub mod verify;
