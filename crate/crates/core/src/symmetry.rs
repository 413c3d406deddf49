//! Symmetry operators of the ring, the decoupled invariant set, and the
//! wave-pattern basis that block-diagonalizes the linearization there.
//!
//! A [`SymmetryOp`] acts on node indices by the affine map `j ↦ s·j + r`
//! (mod N) with `s = -1` for reflections, followed by a uniform phase shift:
//! `(γA)_j = e^{iθ} A_{s·j + r}`. Rotation `σ_rot` is `r = 1`, reflection
//! `σ_ref` is `s = -1, r = 0`, and the generator of the decoupled state's
//! isotropy group is `σ_π σ_rot²`, i.e. `A_j ↦ -A_{j+2}`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{check_ring_size, rhs_polar, wrap_phase, PolarState, RingParams, RingState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryOp {
    pub rotation: i64,
    pub reflect: bool,
    pub phase_shift: f64,
}

impl SymmetryOp {
    pub const IDENTITY: Self = Self {
        rotation: 0,
        reflect: false,
        phase_shift: 0.0,
    };

    pub fn rotation(r: i64) -> Self {
        Self {
            rotation: r,
            ..Self::IDENTITY
        }
    }

    pub fn reflection() -> Self {
        Self {
            reflect: true,
            ..Self::IDENTITY
        }
    }

    pub fn phase(theta: f64) -> Self {
        Self {
            phase_shift: wrap_phase(theta),
            ..Self::IDENTITY
        }
    }

    /// `σ_π σ_rot²`.
    pub fn antiphase_generator() -> Self {
        Self {
            rotation: 2,
            reflect: false,
            phase_shift: PI,
        }
    }

    /// `self ∘ first`: the op equivalent to applying `first` and then `self`.
    pub fn after(&self, first: &SymmetryOp) -> Self {
        let s1 = if first.reflect { -1 } else { 1 };
        Self {
            rotation: s1 * self.rotation + first.rotation,
            reflect: first.reflect ^ self.reflect,
            phase_shift: wrap_phase(first.phase_shift + self.phase_shift),
        }
    }

    /// `self` applied `m` times.
    pub fn power(&self, m: usize) -> Self {
        (0..m).fold(Self::IDENTITY, |acc, _| self.after(&acc))
    }

    /// Source node of target node `j`.
    pub fn source(&self, j: usize, n: usize) -> usize {
        let n = n as i64;
        let s = if self.reflect { -1 } else { 1 };
        (s * j as i64 + self.rotation).rem_euclid(n) as usize
    }

    pub fn apply_complex(&self, state: &[Complex64]) -> Vec<Complex64> {
        let n = state.len();
        let shift = Complex64::from_polar(1.0, self.phase_shift);
        (0..n)
            .map(|j| {
                let a = state[self.source(j, n)];
                if self.phase_shift == 0.0 {
                    a
                } else if self.phase_shift == PI {
                    -a
                } else {
                    shift * a
                }
            })
            .collect()
    }

    /// Phases are shifted, not wrapped.
    pub fn apply_polar(&self, state: &PolarState) -> PolarState {
        let n = state.n();
        let mut values = Vec::with_capacity(2 * n);
        for j in 0..n {
            let src = self.source(j, n);
            values.push(state.amplitude(src));
            values.push(state.phase(src) + self.phase_shift);
        }
        PolarState::from_interleaved(values).expect("even length")
    }

    pub fn apply(&self, state: &RingState) -> RingState {
        match state {
            RingState::Complex(a) => RingState::Complex(self.apply_complex(a)),
            RingState::Polar(p) => RingState::Polar(self.apply_polar(p)),
        }
    }

    /// Differential of the op on the interleaved tangent space of polar
    /// coordinates. Phase shifts act as the identity there, so this is the
    /// node permutation applied to each (δa, δφ) pair.
    pub fn tangent_matrix(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            let src = self.source(j, n);
            m[(2 * j, 2 * src)] = 1.0;
            m[(2 * j + 1, 2 * src + 1)] = 1.0;
        }
        m
    }
}

/// Max over samples of `‖f(γx) - Dγ f(x)‖∞` for the polar vector field.
pub fn check_equivariance(
    op: &SymmetryOp,
    params: &RingParams,
    samples: &[RingState],
) -> Result<f64> {
    let n = params.n();
    let mut worst: f64 = 0.0;
    for sample in samples {
        if sample.n() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: sample.n(),
            });
        }
        let x = sample.to_polar()?;
        let fx = rhs_polar(params, x.as_slice())?;
        let f_gx = rhs_polar(params, op.apply_polar(&x).as_slice())?;
        for j in 0..n {
            let src = op.source(j, n);
            for c in 0..2 {
                worst = worst.max((f_gx[2 * j + c] - fx[2 * src + c]).abs());
            }
        }
    }
    Ok(worst)
}

/// Coordinates `(θ, ψ)` on the invariant torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupledPoint {
    pub theta: f64,
    pub psi: f64,
}

impl DecoupledPoint {
    pub fn new(theta: f64, psi: f64) -> Self {
        Self { theta, psi }
    }

    /// Phase offset of node `j` relative to `θ`.
    pub fn offset(&self, j: usize) -> f64 {
        match j % 4 {
            0 => 0.0,
            1 => self.psi,
            2 => PI,
            _ => self.psi + PI,
        }
    }
}

/// Decoupled state in complex form. Nodes two apart are exact negatives of
/// each other, so `A_{j-1} + A_{j+1} = 0` holds without rounding.
pub fn decoupled_state(params: &RingParams, point: DecoupledPoint) -> Result<RingState> {
    check_ring_size(params.n())?;
    let even = Complex64::from_polar(1.0, point.theta);
    let odd = Complex64::from_polar(1.0, point.theta + point.psi);
    let state = (0..params.n())
        .map(|j| match j % 4 {
            0 => even,
            1 => odd,
            2 => -even,
            _ => -odd,
        })
        .collect();
    Ok(RingState::Complex(state))
}

/// Decoupled state in polar form: unit amplitudes and phases
/// `θ, θ+ψ, θ+π, θ+ψ+π` by `j mod 4`.
pub fn decoupled_polar(params: &RingParams, point: DecoupledPoint) -> Result<PolarState> {
    check_ring_size(params.n())?;
    let values = (0..params.n())
        .flat_map(|j| [1.0, point.theta + point.offset(j)])
        .collect();
    PolarState::from_interleaved(values)
}

/// Distance of the coupling term from its decoupled surrogate:
/// `max_j |iβ(A_{j-1} - 2A_j + A_{j+1}) + 2iβA_j| = β max_j |A_{j-1} + A_{j+1}|`.
pub fn coupling_residual(params: &RingParams, state: &RingState) -> Result<f64> {
    let a = state.to_complex();
    let n = a.len();
    if n != params.n() {
        return Err(Error::SizeMismatch {
            expected: params.n(),
            actual: n,
        });
    }
    let worst = (0..n)
        .map(|j| (a[(j + n - 1) % n] + a[(j + 1) % n]).norm())
        .fold(0.0, f64::max);
    Ok(params.beta().abs() * worst)
}

/// The 2N×4 basis `V^(k)` of one isotypic component.
///
/// Rows follow the interleaved node layout. Columns are ordered
/// `(δa_even, δa_odd, δφ_even, δφ_odd)` within each adjacent node pair, with
/// pair `p` weighted by `ζ^{kp} / √(N/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryBasis {
    pub k: usize,
    /// `ζ^k = e^{4πik/N}`, the generator's eigenvalue on this component.
    pub zeta: Complex64,
    pub columns: DMatrix<Complex64>,
}

pub(crate) fn check_wavenumber(n: usize, k: usize) -> Result<()> {
    if k >= n / 2 {
        return Err(Error::WavenumberOutOfRange { k, n });
    }
    Ok(())
}

/// `ζ^{km}` computed from the reduced exponent so large rings keep full
/// precision.
pub(crate) fn root_of_unity(n: usize, km: usize) -> Complex64 {
    let half = n / 2;
    let r = km % half;
    Complex64::from_polar(1.0, TAU * r as f64 / half as f64)
}

pub fn symmetry_basis(n: usize, k: usize) -> Result<SymmetryBasis> {
    check_ring_size(n)?;
    check_wavenumber(n, k)?;
    let pairs = n / 2;
    let scale = 1.0 / (pairs as f64).sqrt();
    let mut columns = DMatrix::zeros(2 * n, 4);
    for p in 0..pairs {
        let w = root_of_unity(n, k * p) * scale;
        for node in 0..2 {
            for comp in 0..2 {
                columns[(2 * (2 * p + node) + comp, 2 * comp + node)] = w;
            }
        }
    }
    Ok(SymmetryBasis {
        k,
        zeta: root_of_unity(n, k),
        columns,
    })
}

/// All `N/2` bases side by side: a unitary 2N×2N matrix whose 4-column
/// groups are the isotypic components in order of `k`.
pub fn full_basis(n: usize) -> Result<DMatrix<Complex64>> {
    check_ring_size(n)?;
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n / 2 {
        let b = symmetry_basis(n, k)?;
        u.view_mut((0, 4 * k), (2 * n, 4)).copy_from(&b.columns);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    fn ring(n: usize) -> RingParams {
        RingParams::uniform(n, 0.1, 1.0, 2.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotation_shifts_indices() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let b = SymmetryOp::rotation(1).apply_complex(&a);
        assert_eq!(b, vec![a[1], a[2], a[3], a[0]]);
        let r = SymmetryOp::reflection().apply_complex(&a);
        assert_eq!(r, vec![a[0], a[3], a[2], a[1]]);
    }

    #[test]
    fn half_turn_negates() {
        let a = vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0), c(7.0, -1.0)];
        let b = SymmetryOp::phase(PI).apply_complex(&a);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*y, -*x);
        }
    }

    #[test]
    fn generator_maps_to_negated_shift() {
        let a: Vec<Complex64> = (0..8).map(|j| c(j as f64, 1.0 - j as f64)).collect();
        let b = SymmetryOp::antiphase_generator().apply_complex(&a);
        for j in 0..8 {
            assert_eq!(b[j], -a[(j + 2) % 8]);
        }
    }

    #[test]
    fn composition_matches_sequential_application() {
        let a: Vec<Complex64> = (0..12)
            .map(|j| Complex64::from_polar(1.0 + j as f64, 0.3 * j as f64))
            .collect();
        let ops = [
            SymmetryOp::rotation(1),
            SymmetryOp::rotation(-5),
            SymmetryOp::reflection(),
            SymmetryOp {
                rotation: 3,
                reflect: true,
                phase_shift: 1.1,
            },
            SymmetryOp::phase(2.5),
            SymmetryOp::antiphase_generator(),
        ];
        for op1 in &ops {
            for op2 in &ops {
                let seq = op2.apply_complex(&op1.apply_complex(&a));
                let composed = op2.after(op1).apply_complex(&a);
                for (x, y) in seq.iter().zip(&composed) {
                    assert!((x - y).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn decoupled_state_is_generator_fixed() {
        let p = ring(8);
        let s = decoupled_state(&p, DecoupledPoint::new(0.4, 1.9)).unwrap();
        let moved = SymmetryOp::antiphase_generator().apply(&s);
        let (a, b) = (s.to_complex(), moved.to_complex());
        let diff = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);
    }

    #[test]
    fn decoupled_pattern() {
        let p = ring(8);
        let polar = decoupled_polar(&p, DecoupledPoint::new(0.0, FRAC_PI_2)).unwrap();
        let expected = [0.0, FRAC_PI_2, PI, 1.5 * PI];
        for j in 0..8 {
            assert_eq!(polar.amplitude(j), 1.0);
            assert!((polar.phase(j) - expected[j % 4]).abs() < 1e-15);
        }
        let s = decoupled_state(&p, DecoupledPoint::new(0.0, 0.0))
            .unwrap()
            .to_complex();
        for j in 0..8 {
            assert_eq!(s[(j + 7) % 8] + s[(j + 1) % 8], c(0.0, 0.0));
        }
    }

    #[test]
    fn decoupled_requires_multiple_of_four() {
        assert_eq!(
            RingParams::uniform(6, 0.1, 1.0, 2.0),
            Err(Error::BadRingSize(6))
        );
    }

    #[test]
    fn coupling_residual_values() {
        let p = RingParams::uniform(8, 0.1, 1.7, 2.0).unwrap();
        let s = decoupled_state(&p, DecoupledPoint::new(1.0, 2.0)).unwrap();
        assert!(coupling_residual(&p, &s).unwrap() < 1e-14);

        let sync = RingState::Complex(vec![Complex64::from_polar(1.0, 0.3); 8]);
        assert!((coupling_residual(&p, &sync).unwrap() - 2.0 * 1.7).abs() < 1e-14);

        // shifting φ_1 by δ breaks the antiphase sums at nodes 0 and 2 by |e^{iδ} - 1|
        let delta = 1e-4;
        let mut polar = decoupled_polar(&p, DecoupledPoint::new(1.0, 2.0))
            .unwrap()
            .into_vec();
        polar[3] += delta;
        let r = coupling_residual(
            &p,
            &RingState::Polar(PolarState::from_interleaved(polar).unwrap()),
        )
        .unwrap();
        let expected = 1.7 * 2.0 * (delta / 2.0).sin();
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn basis_examples() {
        let b0 = symmetry_basis(8, 0).unwrap();
        assert_eq!(b0.zeta, c(1.0, 0.0));
        let b2 = symmetry_basis(8, 2).unwrap();
        assert!((b2.zeta - c(-1.0, 0.0)).norm() < 1e-15);
        // wave pattern over pairs read off the amplitude-even column
        let pattern: Vec<Complex64> = (0..4).map(|p| b2.columns[(4 * p, 0)] * 2.0).collect();
        let expected = [1.0, -1.0, 1.0, -1.0];
        for (z, e) in pattern.iter().zip(expected) {
            assert!((z - c(e, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(
            symmetry_basis(8, 4),
            Err(Error::WavenumberOutOfRange { k: 4, n: 8 })
        ));
        assert!(matches!(symmetry_basis(10, 0), Err(Error::BadRingSize(10))));
    }

    #[test]
    fn basis_is_orthonormal_and_generator_eigenvectors() {
        let n = 8;
        let gen = SymmetryOp::antiphase_generator()
            .tangent_matrix(n)
            .map(|x| c(x, 0.0));
        for k in 0..n / 2 {
            let b = symmetry_basis(n, k).unwrap();
            let gram = b.columns.adjoint() * &b.columns;
            assert!((gram - DMatrix::identity(4, 4)).camax() < 1e-14);
            let lhs = &gen * &b.columns;
            let rhs = &b.columns * b.zeta;
            assert!((lhs - rhs).camax() < 1e-12);
        }
    }
}
