//! Monodromy eigendata, fiber lattices and their dual-lattice modes.

pub mod anosov;
pub mod intmat;
pub mod lattice;
pub mod modes;

pub use anosov::{anosov_eigendata, AnosovData, AnosovMatrix};
pub use intmat::IntMat;
pub use lattice::{build_cover, build_lattice, dual_lattice, invariance_matrix, BasisChoice, DualLattice, SolvLattice};
pub use modes::{
    enumerate_modes, fiber_threshold, min_norm, odd_modes_under, twisted_modes, DualMode, FiberThreshold,
    SpinLabel, SpinStructure,
};
