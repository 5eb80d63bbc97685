//! Numerical library for linear diffusion flows whose diffusivity
//! degenerates on an interior set of the periodic interval.
//!
//! The pieces:
//!
//! * [`grid`] — periodic lattices on `[-1,1)^n` and torus distances to the
//!   degeneration set.
//! * [`weights`] — power-law diffusivities (weakly and strongly
//!   degenerate) and the fractional edge detector.
//! * [`frac_kernel`] — the smoothing Fourier multiplier `|k|^{-eps}`, its
//!   convolution kernel, and singularity-exponent fits.
//! * [`disc_ops`] — difference operators, the weighted Dirichlet energy,
//!   and the assembled symmetric operator.
//! * [`spectral`] — eigen-decomposition, the exact semigroup, spectral gap
//!   and Poincare constant.
//! * [`flows`] — the competing evolutions (regularizing, singular, split,
//!   strongly degenerate), their closed-form limits, and minimizing
//!   movements.
//! * [`gamma_viscosity`] — mollifiers, viscosity-regularized energies, and
//!   vanishing-viscosity comparisons.
//!
//! The headline experiment: on grids with an even number of nodes per unit
//! the discrete jump mode has zero energy and the diffusion flow leaves it
//! untouched, while grids with an odd count average every datum out — one
//! scheme, two limits, decided by the lattice parity.

use thiserror::Error as ThisError;

pub mod disc_ops;
pub mod flows;
pub mod frac_kernel;
pub mod gamma_viscosity;
pub mod grid;
pub mod spectral;
pub mod weights;

pub use disc_ops::{
    assemble_operator, centered_energy, delta_minus, delta_plus, discrete_energy, energy_gradient,
    DiscreteOperator, State,
};
pub use flows::{evolve, implicit_euler_step, make_h, minimizing_movement, steady_state, FlowKind};
pub use frac_kernel::{
    apply_multiplier, apply_multiplier_2d, circle_line_delta, fit_exponent_along_axis,
    fit_power_law_with_offset, fit_ray_power_law_with_offset, fit_singularity_exponent,
    kernel_samples, kernel_samples_2d, ExponentFit, Field2D, KernelDim, MultiplierSpec,
    SingularityLocus,
};
pub use gamma_viscosity::{
    make_mollifier, mollify, recovery_sequence_report, regularized_energy, viscosity_flow_compare,
    GammaReport, Mollifier,
};
pub use grid::{GammaSet, Grid1D, Grid2D};
pub use spectral::{
    analyticity_bound, eigendecompose, poincare_constant, semigroup_apply, smoothing_norm,
    SpectralDecomposition,
};
pub use weights::{edge_diffusivity, power_weight, strong_weight, Weight, WeightClass};

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },

    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("nonpositive samples in the fit window; the smooth remainder dominates — widen the resolution")]
    NonpositiveSamples,

    #[error("operator failed the symmetry check (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("all eigenvalues lie in the kernel; no spectral gap")]
    DegenerateSpectrum,

    #[error("{kind} flow rejected: {why}")]
    IncompatibleFlow { kind: &'static str, why: String },

    #[error("linear solve failed")]
    SolveFailed,

    #[error("mollifier scale {scale} under-resolved by grid spacing {spacing}")]
    UnresolvedScale { scale: usize, spacing: f64 },
}
