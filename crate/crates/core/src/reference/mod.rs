//! Reference solutions that behavioral tests compare submissions against.

mod bug;
mod grid;

pub use bug::{bug_reference_path, ReferencePath};
pub use grid::{
    grid_shortest_path, shortest_path, Algorithm, Cell, Connectivity, GridPlan, OccupancyGrid, StepCost,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReferenceError {
    #[error("unsupported world: {0}")]
    UnsupportedWorld(String),
    #[error("no path between start and goal")]
    NoPath,
    #[error("{0} cell is blocked")]
    Blocked(&'static str),
    #[error("{0} lies outside the grid")]
    OutOfBounds(&'static str),
    #[error("grid resolution must be positive, got {0}")]
    InvalidResolution(f64),
}
