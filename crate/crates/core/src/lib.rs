//! Numerical laboratory for alloy-type random Schrödinger operators
//! `H_ω = −Δ + Σ_j π_j(ω) u_j` on finite cubes: finite-difference operators,
//! thick sets, disorder models, spectral counting, and Monte Carlo studies of
//! Wegner-type estimates.
//!
//! The operator and eigensolver layers are generic over the scalar type
//! ([`scalar::Real`], implemented for `f32` and `f64`); the disorder, set and
//! experiment layers work in `f64`.

pub mod error;
pub mod experiments;
pub mod grid_operator;
pub mod linalg;
pub mod random_model;
pub mod scalar;
pub mod spectral_engine;
pub mod thick_sets;

pub use error::{Error, Result};
pub use grid_operator::{
    add_potential, build_free_laplacian, free_dirichlet_spectrum, max_spectral_gap_below, Boundary,
};
pub use random_model::{construct_diluted_minorant, modulus_s, AlloyModel, Distribution};
pub use scalar::Real;
pub use spectral_engine::{
    compressed_indicator_min_eig, count_in_interval, eigs_below, resolvent_block_norm, EigenOptions,
    SpectralWindow,
};
pub use thick_sets::{build_fat_cantor, product_and_periodize, CantorSpec, RasterSet, WindowSpec};

pub type BoxSpec = grid_operator::BoxSpec<f64>;
pub type Hamiltonian = grid_operator::DiscreteHamiltonian<f64>;
pub type EigenResult = spectral_engine::EigenResult<f64>;
pub type Window = spectral_engine::SpectralWindow<f64>;

pub type BoxSpecF32 = grid_operator::BoxSpec<f32>;
pub type HamiltonianF32 = grid_operator::DiscreteHamiltonian<f32>;
pub type EigenResultF32 = spectral_engine::EigenResult<f32>;
