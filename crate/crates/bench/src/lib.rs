//! Benchmarks for solvspec-core; run with `cargo bench -p solvspec-bench`.

use solvspec_core::solvlat::{anosov_eigendata, build_lattice, AnosovMatrix, BasisChoice, SolvLattice};

/// The figure-eight lattice at the given fiber scale.
pub fn figure_eight(scale: f64) -> SolvLattice {
    build_lattice(&anosov_eigendata(&AnosovMatrix::figure_eight()), scale, BasisChoice::Canonical)
        .expect("figure-eight lattice")
}
