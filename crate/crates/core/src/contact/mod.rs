//! Rigid-indenter contact on a linear-elastic half-space.
//!
//! Produces per-step surface tractions and a volumetric displacement field
//! for the particle layer.

pub mod green;
mod halfspace;
mod indenter;
pub mod influence;
mod shear;
mod solver;
mod trajectory;

pub use green::SurfaceLoads;
pub use halfspace::ElasticHalfSpace;
pub use indenter::{Indenter, IndenterShape, Pose};
pub use solver::{
    solve_normal_contact, solve_normal_contact_with, ContactGrid, ContactSolution, NodalForce,
    NormalSolver, SolverSettings,
};
pub use trajectory::{
    default_indenter_set, generate_trajectory, Trajectory, TrajectoryConfig, TrajectoryKind,
    TrajectoryStep,
};

/// Hertz load for a paraboloid of radius `radius` pressed `depth` into a
/// half-space with plane-strain modulus `e_star`.
pub fn hertz_force(e_star: f64, radius: f64, depth: f64) -> f64 {
    4.0 / 3.0 * e_star * radius.sqrt() * depth.powf(1.5)
}

/// Load on a rigid flat circular punch of radius `radius` at depth `depth`.
pub fn flat_punch_force(e_star: f64, radius: f64, depth: f64) -> f64 {
    2.0 * e_star * radius * depth
}
