//! Coherent states and large-N limits for systems of N identical particles
//! with O(N)-invariant dynamics, built on the discrete-series su(1,1)
//! representations.

pub mod charts;
pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod limits;
pub mod nbody;
pub mod ode;
pub mod quadrature;
pub mod rep;
mod special;

pub use charts::{basic_symbol, convert, poisson_bracket, Chart, ChartPoint, PhaseObservable};
pub use coherent::{
    coherent_vector, delta_exponent, identity_resolution_check, matrix_element_closed,
    overlap_closed, symbol, CoherentSpec, QuadratureParams,
};
pub use dynamics::{
    classical_evolve, correspondence_compare, free_particle_analytic, quantum_evolve,
    ClassicalState, Trajectory,
};
pub use error::{Error, Result};
pub use hamiltonian::{HamiltonianPolynomial, Invariant};
pub use limits::{
    classical_hamiltonian, commutator_correspondence, factorization_defect,
    hamiltonian_limit_check, overlap_decay_study, symbol_injectivity_check, Operand, SweepReport,
};
pub use nbody::{build_invariants, build_mode_operators, casimir_identity_check, l_spectrum_check, MultiOscRep};
pub use rep::{
    build_generator, commutator, hamiltonian_matrix, FockVector, Generator, OperatorMatrix,
    OperatorOrdering, RepParams,
};
