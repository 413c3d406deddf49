//! Rings of `N = 4M` phase-amplitude oscillators with nearest-neighbour
//! reactive coupling, and the linear stability of their decoupled
//! antiphase-cluster state.
//!
//! Each node obeys
//!
//! ```text
//! dA_j/dt = -A_j + iω_j A_j + 2iα|A_j|²A_j + A_j/|A_j| + iβ(A_{j-1} - 2A_j + A_{j+1})
//! ```
//!
//! with `ω_j = ω ∓ Ω/2` on even/odd nodes. When next-nearest neighbours are in
//! exact antiphase the coupling reduces to `-2iβA_j` and every node runs as if
//! isolated. [`stability`] splits the linearization about that state into
//! `N/2` blocks of size 4 and evaluates them in closed form or, when `Ω ≠ 0`,
//! through Floquet exponents.

pub mod error;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod stability;
pub mod symmetry;

pub use error::{Error, Result};
pub use integrate::{
    integrate_orbit, monodromy, rk4_step, sample_orbit, OrbitSample, Rk4, DEFAULT_FLOQUET_STEPS,
};
pub use model::{
    complex_to_polar, rhs_complex, rhs_polar, wrap_phase, PolarState, RingParams, RingState,
    TangentVector, AMPLITUDE_FLOOR,
};
pub use stability::{
    block_dk, eigenvalues_closed_form, eigenvalues_numeric, floquet_block, jacobian_analytic,
    max_transverse_floquet, phase_only_check, spectrum_alternating, spectrum_uniform, BlockRates,
    BlockSpectrum, JacobianMatrix, PhaseOnlyModel, PhaseOnlyReport, PhaseOnlyVerdict,
    SpectralBlock, StabilityVerdict, BLOCK_SCALE,
};
pub use symmetry::{
    check_equivariance, coupling_residual, decoupled_polar, decoupled_state, full_basis,
    symmetry_basis, DecoupledPoint, SymmetryBasis, SymmetryOp,
};

pub use num_complex::Complex64;
