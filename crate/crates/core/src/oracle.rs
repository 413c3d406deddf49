//! Independent numerical cross-checks for the analytic results.
//!
//! Nothing here is used by the fast paths; these exist so the closed forms
//! can be tested against brute-force computations.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::integrate_orbit;
use crate::model::{rhs_polar, PolarState, RingParams, RingState, TangentVector};
use crate::stability::{drift_period, jacobian_analytic, periodic_exponents, BLOCK_SCALE};
use crate::symmetry::{coupling_residual, decoupled_polar, full_basis, DecoupledPoint, SymmetryOp};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Central finite-difference Jacobian of the polar vector field at `state`.
pub fn finite_difference_jacobian(
    params: &RingParams,
    state: &PolarState,
    h: f64,
) -> Result<DMatrix<f64>> {
    let x = state.as_slice();
    let dim = x.len();
    let mut jac = DMatrix::zeros(dim, dim);
    let mut probe = x.to_vec();
    for col in 0..dim {
        probe[col] = x[col] + h;
        let plus = rhs_polar(params, &probe)?;
        probe[col] = x[col] - h;
        let minus = rhs_polar(params, &probe)?;
        probe[col] = x[col];
        for row in 0..dim {
            jac[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Largest entry of `U† J U` outside the 4×4 diagonal blocks, where `U` is
/// the full symmetry basis.
pub fn off_block_magnitude(jacobian: &DMatrix<f64>, n: usize) -> Result<f64> {
    let u = full_basis(n)?;
    let jc = jacobian.map(|x| Complex64::new(x, 0.0));
    let m = u.adjoint() * jc * &u;
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i / 4 != j / 4 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    Ok(worst)
}

/// Diagonal 4×4 blocks of `U† J U`, in order of wavenumber.
pub fn projected_blocks(jacobian: &DMatrix<f64>, n: usize) -> Result<Vec<Matrix4<Complex64>>> {
    let u = full_basis(n)?;
    let jc = jacobian.map(|x| Complex64::new(x, 0.0));
    let m = u.adjoint() * jc * &u;
    Ok((0..n / 2)
        .map(|k| Matrix4::from_fn(|i, j| m[(4 * k + i, 4 * k + j)]))
        .collect())
}

/// Max over the cyclic group generated by `σ_π σ_rot²` of
/// `‖Dγ J - J Dγ‖∞`.
pub fn commutation_residual(jacobian: &DMatrix<f64>, n: usize) -> f64 {
    let generator = SymmetryOp::antiphase_generator();
    (0..n / 2)
        .map(|m| {
            let d = generator.power(m).tangent_matrix(n);
            (&d * jacobian - jacobian * &d).amax()
        })
        .fold(0.0, f64::max)
}

/// Floquet exponents of the full `2N×2N` linearization over one drift period,
/// in block time units (see [`BLOCK_SCALE`]). Descending.
pub fn full_monodromy_exponents(
    params: &RingParams,
    psi0: f64,
    n_steps: usize,
) -> Result<Vec<f64>> {
    let period = drift_period(params)?;
    let rate = params.detuning();
    let generator = |t: f64| {
        jacobian_analytic(params, psi0 + rate * t)
            .entries
            .map(|x| Complex64::new(BLOCK_SCALE * x, 0.0))
    };
    periodic_exponents(generator, period, n_steps)
}

/// Floquet exponents of a constant block held over `period`.
pub fn frozen_floquet(block: &Matrix4<Complex64>, period: f64, n_steps: usize) -> Result<Vec<f64>> {
    periodic_exponents(|_| *block, period, n_steps)
}

/// Outcome of following a perturbed decoupled state.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResponse {
    /// Coupling residual of the perturbed initial state.
    pub initial: f64,
    /// Residual at the end of the run.
    pub last: f64,
    /// Largest residual seen along the way.
    pub peak: f64,
    /// Time of the last sample.
    pub time: f64,
}

impl PerturbationResponse {
    pub fn growth(&self) -> f64 {
        self.peak / self.initial
    }
}

/// A phase perturbation of size `size` on node 0 and amplitude perturbation
/// of `-size` on node 1. It overlaps every wavenumber.
pub fn node_perturbation(n: usize, size: f64) -> TangentVector {
    let mut v = TangentVector::zeros(n);
    v.as_mut_slice()[1] = size;
    v.as_mut_slice()[2] = -size;
    v
}

/// Integrate from the decoupled state at `point` displaced by `delta`,
/// tracking the distance from the decoupled set. Stops early once the
/// residual exceeds `escape` times its initial value.
pub fn perturbation_response(
    params: &RingParams,
    point: DecoupledPoint,
    delta: &TangentVector,
    dt: f64,
    t_end: f64,
    escape: f64,
) -> Result<PerturbationResponse> {
    let start = decoupled_polar(params, point)?.displaced(delta)?;
    let initial = coupling_residual(params, &RingState::Polar(start.clone()))?;
    if initial.is_nan() || initial <= 0.0 {
        return Err(Error::InvalidArgument(
            "perturbation leaves the decoupled set untouched".into(),
        ));
    }
    let n_steps = (t_end / dt).round() as usize;
    let chunk = 100.min(n_steps.max(1));
    let mut response = PerturbationResponse {
        initial,
        last: initial,
        peak: initial,
        time: 0.0,
    };
    let mut state = start;
    let mut done = 0;
    while done < n_steps {
        let steps = chunk.min(n_steps - done);
        state = integrate_orbit(params, &state, dt, steps, steps, |_| {})?;
        done += steps;
        let r = coupling_residual(params, &RingState::Polar(state.clone()))?;
        response.last = r;
        response.peak = response.peak.max(r);
        response.time = done as f64 * dt;
        if r > escape * initial {
            break;
        }
    }
    Ok(response)
}
