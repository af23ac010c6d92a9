//! Quantum states, observables and dynamics in the ambiguity-function
//! representation, with a finite-dimensional Weyl-Heisenberg counterpart
//! and matrix-mechanics oracles for cross-checking.

pub mod ambiguity;
pub mod error;
pub mod field;
pub mod gaussian;
pub(crate) mod fourier;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod discrete_weyl;
pub mod document;
pub mod dynamics;
pub mod states;
pub mod stencil;

pub use error::{Error, Result};
pub use field::{ComplexField, FieldKind};
pub use grid::{make_centered_grid, conjugate_grid, Anchor, Grid1D, PhaseGrid, PhaseLabels, PhysicalConstants};
pub use states::{density_from_wavefunction, gaussian_wavefunction, purity, superposition_state, DensityMatrix, GaussianSpec, WaveFunction};
pub use ambiguity::{ambiguity_from_density, ambiguity_to_wigner, marginal, reconstruct_density, wigner_at, wigner_from_density, wigner_to_ambiguity, MarginalAxis};
pub use gaussian::{gaussian_ambiguity_closed, AmbiguityClosedFormGaussian, GaussianForm};
pub use observables::{bopp_apply, bopp_apply_right, compile_descriptor, expectation_polynomial, trace_product, DifferentialDescriptor, Letter, OriginDerivatives, PolynomialOperator, Stencil, Term};
pub use oracle::{
    displacement_matrix_grid, evolve_density_exact, hamiltonian_matrix, hamiltonian_matrix_banded, operator_matrices, polynomial_matrix,
    trace_direct, verify_continuum_identities, wigner_seed_matrix, CheckResult, ContinuumReport, OperatorMatrix,
};
pub use dynamics::{
    evolve_const_force_closed, evolve_generator_const_force, evolve_kernel, evolve_linear_canonical, ClosedFormAmbiguity,
    ConstForceEvolvable, ConstantForceParams, Direction, LinearCanonicalMap,
};
pub use discrete_weyl::{
    discrete_ambiguity, discrete_displacement, discrete_trace_product, reconstruct_discrete, verify_discrete_identities,
    verify_discrete_identities_seeded,
    DiscreteAmbiguity, DiscreteDisplacement, DiscreteReport,
};
pub use document::{AxisSpec, DocumentData, DocumentKind, FieldDocument, SCHEMA_VERSION};
