//! Shared fixtures for the criterion benches.

use ambiq_core::{
    ambiguity_from_density, density_from_wavefunction, gaussian_wavefunction, hamiltonian_matrix_banded,
    make_centered_grid, stencil::DEFAULT_ACCURACY, ComplexField, DensityMatrix, GaussianSpec, PhysicalConstants,
};

/// Density matrix of a displaced, boosted Gaussian on an `n`-point grid.
pub fn gaussian_density(n: usize, step: f64) -> DensityMatrix {
    let grid = make_centered_grid(n, step).expect("valid grid");
    let spec = GaussianSpec::new(1.0, 2.0, 1.0).expect("valid spec");
    let psi = gaussian_wavefunction(&spec, &grid, &PhysicalConstants::default()).expect("state fits grid");
    density_from_wavefunction(&psi)
}

/// Ambiguity field of [`gaussian_density`].
pub fn gaussian_ambiguity(n: usize, step: f64) -> ComplexField {
    ambiguity_from_density(&gaussian_density(n, step)).expect("transform")
}

/// Ambiguity field of a Gaussian-well Hamiltonian on the same grid.
pub fn well_hamiltonian(n: usize, step: f64) -> ComplexField {
    let grid = make_centered_grid(n, step).expect("valid grid");
    let h = hamiltonian_matrix_banded(&grid, &PhysicalConstants::default(), 1.0, DEFAULT_ACCURACY, |q| {
        -2.0 * (-q * q / 2.0).exp()
    })
    .expect("hamiltonian");
    ambiguity_from_density(&h.to_kernel()).expect("transform")
}
