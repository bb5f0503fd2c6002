//! Energy-level gaps from the bipartite wave equation
//! `iħ ∂Ψ(x, y)/∂t = (H(x) − H(y)) Ψ(x, y)` on a 1D finite-difference grid.
//!
//! The eigenvalues of the gap operator `H(x) − H(y)` are exactly the level
//! differences `Eₙ − Eₘ` of the one-body Hamiltonian. This crate computes
//! them directly and by pairwise enumeration, propagates bipartite states
//! with a unitary Crank–Nicolson scheme, and provides Schmidt analysis and
//! the bipartite measurement rule, including the double-slit states.

pub mod bipartite;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod observables;
pub mod schmidt;
pub mod spectrum;
pub mod tridiag;

pub use bipartite::{BipartiteWave, ProductTerm};
pub use dynamics::{
    check_phase_cadence, cn_energy, cn_energy_inverse, cn_gap, demap_gap, extract_gap_from_phase,
    propagate_bipartite_direct, propagate_bipartite_factored, propagate_bipartite_schmidt,
    propagate_product_terms, propagate_schrodinger, CrankNicolson, FactoredPropagator,
    PropagationConfig, QuantumState, Trajectory,
};
pub use error::{Error, Result};
pub use grid::{inner_product, make_grid, Grid, PhysicalConstants, WaveFunction};
pub use hamiltonian::{apply_hamiltonian, build_hamiltonian, HamiltonianOp, Potential};
pub use observables::{
    build_double_slit, double_slit_terms, expectation, expectation_report, fringe_visibility,
    position_density, rho_of, DensityOperator, ExpectationReport, LinearObservable, SlitMode,
    SlitSpec,
};
pub use schmidt::{
    entanglement_entropy, entropy_of_coefficients, reconstruct, schmidt_coefficients,
    schmidt_coefficients_of_terms, schmidt_decompose, schmidt_rank, SchmidtDecomposition,
};
pub use spectrum::{
    eigensolve, gap_operator_apply, gap_spectrum_direct, gap_spectrum_pairwise, match_spectra,
    stationary_bipartite, DirectOptions, EigenSystem, GapCluster, GapSpectrum, Levels, MatchReport,
};

pub use num_complex::Complex64;
