//! Ring parameters, oscillator states and the nonlinear equations of motion.
//!
//! Each node obeys
//!
//! ```text
//! dA_j/dt = -A_j + i ω_j A_j + 2iα|A_j|² A_j + A_j/|A_j| + iβ (A_{j-1} - 2A_j + A_{j+1})
//! ```
//!
//! with indices taken modulo `N`. Writing `A_j = a_j e^{iφ_j}` gives the
//! equivalent real amplitude/phase system evaluated by [`rhs_polar`].
//!
//! Real 2N-vectors (polar states, derivatives, tangent vectors) interleave
//! amplitude and phase per node: index `2j` is `a_j`, index `2j + 1` is `φ_j`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes at or below this value are rejected: `A/|A|` and `1/a` are
/// singular at zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-8;

/// Scalar parameters of an alternating-frequency ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParams {
    n: usize,
    alpha: f64,
    beta: f64,
    omega: f64,
    detuning: f64,
}

impl RingParams {
    /// `n` oscillators (a positive multiple of 4), Duffing coefficient `alpha`,
    /// reactive coupling `beta`, mean frequency `omega` and detuning `detuning`
    /// between odd and even nodes.
    pub fn new(n: usize, alpha: f64, beta: f64, omega: f64, detuning: f64) -> Result<Self> {
        check_ring_size(n)?;
        for (name, value) in [
            ("alpha", alpha),
            ("beta", beta),
            ("omega", omega),
            ("detuning", detuning),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name, value });
            }
        }
        Ok(Self {
            n,
            alpha,
            beta,
            omega,
            detuning,
        })
    }

    /// Uniform natural frequencies (zero detuning).
    pub fn uniform(n: usize, alpha: f64, beta: f64, omega: f64) -> Result<Self> {
        Self::new(n, alpha, beta, omega, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `M = N / 4`.
    pub fn quarter(&self) -> usize {
        self.n / 4
    }

    /// Number of symmetry blocks, `N / 2`.
    pub fn n_blocks(&self) -> usize {
        self.n / 2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn is_uniform(&self) -> bool {
        self.detuning == 0.0
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.n, alpha, self.beta, self.omega, self.detuning)
    }

    pub fn with_detuning(self, detuning: f64) -> Result<Self> {
        Self::new(self.n, self.alpha, self.beta, self.omega, detuning)
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(self.n, self.alpha, self.beta, omega, self.detuning)
    }

    /// Natural frequency of node `j`: `ω - Ω/2` on even nodes, `ω + Ω/2` on odd.
    pub fn natural_frequency(&self, j: usize) -> Result<f64> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: self.n,
            });
        }
        Ok(self.frequency_unchecked(j))
    }

    #[inline]
    fn frequency_unchecked(&self, j: usize) -> f64 {
        if j.is_multiple_of(2) {
            self.omega - 0.5 * self.detuning
        } else {
            self.omega + 0.5 * self.detuning
        }
    }
}

pub(crate) fn check_ring_size(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::BadRingSize(n));
    }
    Ok(())
}

/// Reduce a phase to `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Polar state stored as an interleaved `(a_0, φ_0, a_1, φ_1, ...)` vector.
/// Phases are kept unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarState(Vec<f64>);

impl PolarState {
    pub fn from_interleaved(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "interleaved polar state needs an even length, got {}",
                values.len()
            )));
        }
        Ok(Self(values))
    }

    pub fn from_parts(amplitudes: &[f64], phases: &[f64]) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::SizeMismatch {
                expected: amplitudes.len(),
                actual: phases.len(),
            });
        }
        if let Some((node, &a)) = amplitudes.iter().enumerate().find(|(_, a)| **a < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitude of node {node} is negative ({a})"
            )));
        }
        let values = amplitudes
            .iter()
            .zip(phases)
            .flat_map(|(&a, &p)| [a, p])
            .collect();
        Ok(Self(values))
    }

    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn amplitude(&self, j: usize) -> f64 {
        self.0[2 * j]
    }

    pub fn phase(&self, j: usize) -> f64 {
        self.0[2 * j + 1]
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().step_by(2).copied()
    }

    pub fn phases(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().skip(1).step_by(2).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Displace the state along a tangent vector.
    pub fn displaced(&self, delta: &TangentVector) -> Result<Self> {
        if delta.len() != self.0.len() {
            return Err(Error::SizeMismatch {
                expected: self.0.len(),
                actual: delta.len(),
            });
        }
        Ok(Self(
            self.0
                .iter()
                .zip(delta.as_slice())
                .map(|(x, d)| x + d)
                .collect(),
        ))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.0
            .chunks_exact(2)
            .map(|c| Complex64::from_polar(c[0], c[1]))
            .collect()
    }
}

/// Oscillator states in either representation. Complex amplitudes are the
/// canonical form for symmetry operations; the polar form is used for
/// integration and linearization.
#[derive(Debug, Clone, PartialEq)]
pub enum RingState {
    Complex(Vec<Complex64>),
    Polar(PolarState),
}

impl RingState {
    pub fn n(&self) -> usize {
        match self {
            RingState::Complex(a) => a.len(),
            RingState::Polar(p) => p.n(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            RingState::Complex(a) => a.clone(),
            RingState::Polar(p) => p.to_complex(),
        }
    }

    /// Convert to polar form with phases in `[0, 2π)`. Polar inputs are
    /// returned unchanged.
    pub fn to_polar(&self) -> Result<PolarState> {
        match self {
            RingState::Polar(p) => Ok(p.clone()),
            RingState::Complex(a) => complex_to_polar(a),
        }
    }
}

pub fn complex_to_polar(amplitudes: &[Complex64]) -> Result<PolarState> {
    let mut values = Vec::with_capacity(2 * amplitudes.len());
    for (node, z) in amplitudes.iter().enumerate() {
        let a = z.norm();
        if a <= AMPLITUDE_FLOOR {
            return Err(Error::AmplitudeUnderflow { node, amplitude: a });
        }
        values.push(a);
        values.push(wrap_phase(z.arg()));
    }
    Ok(PolarState(values))
}

/// A perturbation `(δa_0, δφ_0, δa_1, δφ_1, ...)` in the interleaved layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(Vec<f64>);

impl TangentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "tangent vector needs an even length, got {}",
                values.len()
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; 2 * n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitude(&self, j: usize) -> f64 {
        self.0[2 * j]
    }

    pub fn phase(&self, j: usize) -> f64 {
        self.0[2 * j + 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

fn check_len(params: &RingParams, len: usize) -> Result<()> {
    if len != params.n {
        return Err(Error::SizeMismatch {
            expected: params.n,
            actual: len,
        });
    }
    Ok(())
}

/// Right-hand side of the complex equations of motion.
pub fn rhs_complex(params: &RingParams, state: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(params, state.len())?;
    let n = params.n;
    let i = Complex64::i();
    let mut out = Vec::with_capacity(n);
    for (j, &a) in state.iter().enumerate() {
        let modulus = a.norm();
        if modulus <= AMPLITUDE_FLOOR {
            return Err(Error::AmplitudeUnderflow {
                node: j,
                amplitude: modulus,
            });
        }
        let prev = state[(j + n - 1) % n];
        let next = state[(j + 1) % n];
        let laplacian = prev - 2.0 * a + next;
        let own = -a
            + i * params.frequency_unchecked(j) * a
            + i * (2.0 * params.alpha * modulus * modulus) * a
            + a / modulus;
        out.push(own + i * params.beta * laplacian);
    }
    Ok(out)
}

/// Right-hand side of the amplitude/phase equations, interleaved.
pub fn rhs_polar(params: &RingParams, state: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; state.len()];
    rhs_polar_into(params, state, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`rhs_polar`].
pub fn rhs_polar_into(params: &RingParams, state: &[f64], out: &mut [f64]) -> Result<()> {
    check_len(params, state.len() / 2)?;
    if !state.len().is_multiple_of(2) || out.len() != state.len() {
        return Err(Error::SizeMismatch {
            expected: 2 * params.n,
            actual: out.len(),
        });
    }
    let n = params.n;
    let beta = params.beta;
    for j in 0..n {
        let a = state[2 * j];
        if a <= AMPLITUDE_FLOOR {
            return Err(Error::AmplitudeUnderflow {
                node: j,
                amplitude: a,
            });
        }
        let phi = state[2 * j + 1];
        let jm = (j + n - 1) % n;
        let jp = (j + 1) % n;
        let (am, phim) = (state[2 * jm], state[2 * jm + 1]);
        let (ap, phip) = (state[2 * jp], state[2 * jp + 1]);
        let (sm, cm) = (phim - phi).sin_cos();
        let (sp, cp) = (phip - phi).sin_cos();

        out[2 * j] = 1.0 - a - beta * am * sm - beta * ap * sp;
        out[2 * j + 1] = params.frequency_unchecked(j)
            + 2.0 * params.alpha * a * a
            + beta * (am / a) * cm
            + beta * (ap / a) * cp
            - 2.0 * beta;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    fn params(alpha: f64, beta: f64, omega: f64, detuning: f64) -> RingParams {
        RingParams::new(8, alpha, beta, omega, detuning).unwrap()
    }

    #[test]
    fn frequencies_alternate() {
        let p = RingParams::new(8, 0.1, 1.0, 2.0, 0.2).unwrap();
        assert!((p.natural_frequency(0).unwrap() - 1.9).abs() < 1e-15);
        assert!((p.natural_frequency(1).unwrap() - 2.1).abs() < 1e-15);

        let p = RingParams::uniform(4, 0.0, 0.0, 2.0).unwrap();
        for j in 0..4 {
            assert_eq!(p.natural_frequency(j).unwrap(), 2.0);
        }

        let p = RingParams::new(4, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(p.natural_frequency(3).unwrap(), 0.5);
        assert!(matches!(
            p.natural_frequency(4),
            Err(Error::IndexOutOfRange { index: 4, n: 4 })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            RingParams::uniform(6, 0.1, 1.0, 2.0),
            Err(Error::BadRingSize(6))
        );
        assert_eq!(
            RingParams::uniform(0, 0.1, 1.0, 2.0),
            Err(Error::BadRingSize(0))
        );
        assert!(matches!(
            RingParams::uniform(8, f64::NAN, 1.0, 2.0),
            Err(Error::NonFiniteParameter { name: "alpha", .. })
        ));
        assert!(matches!(
            RingParams::new(8, 0.1, 1.0, 2.0, f64::INFINITY),
            Err(Error::NonFiniteParameter {
                name: "detuning",
                ..
            })
        ));
    }

    #[test]
    fn synchrony_rotates_at_shifted_frequency() {
        let p = RingParams::uniform(4, 0.3, 1.7, 2.0).unwrap();
        let z = Complex64::from_polar(1.0, 0.4);
        let d = rhs_complex(&p, &[z; 4]).unwrap();
        let expected = Complex64::i() * (2.0 + 2.0 * 0.3) * z;
        for v in d {
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn decoupled_state_rotates_rigidly() {
        let p = params(0.1, 1.0, 2.0, 0.0);
        let base = [0.0, 0.9, PI, 0.9 + PI];
        let state: Vec<Complex64> = (0..8)
            .map(|j| Complex64::from_polar(1.0, base[j % 4]))
            .collect();
        let d = rhs_complex(&p, &state).unwrap();
        for (v, a) in d.iter().zip(&state) {
            assert!((v - Complex64::i() * 0.2 * a).norm() < 1e-14);
        }
    }

    #[test]
    fn single_node_term_by_term() {
        let omega = 1.3;
        let p = RingParams::uniform(4, 0.0, 0.0, omega).unwrap();
        let two = Complex64::new(2.0, 0.0);
        let d = rhs_complex(&p, &[two; 4]).unwrap();
        assert!((d[0] - Complex64::new(-1.0, 2.0 * omega)).norm() < 1e-14);
    }

    #[test]
    fn polar_rhs_on_the_torus() {
        let (alpha, beta, omega) = (0.1, 1.0, 2.0);
        let p = params(alpha, beta, omega, 0.0);
        let pattern = [0.0, 0.7, PI, 0.7 + PI];
        let phases: Vec<f64> = (0..8).map(|j| 0.3 + pattern[j % 4]).collect();
        let st = PolarState::from_parts(&[1.0; 8], &phases).unwrap();
        let d = rhs_polar(&p, st.as_slice()).unwrap();
        for j in 0..8 {
            assert!(d[2 * j].abs() < 1e-14);
            assert!((d[2 * j + 1] - (omega + 2.0 * alpha - 2.0 * beta)).abs() < 1e-14);
        }
    }

    #[test]
    fn polar_rhs_in_synchrony() {
        let p = params(0.25, 1.3, 2.0, 0.4);
        let st = PolarState::from_parts(&[1.0; 8], &[0.6; 8]).unwrap();
        let d = rhs_polar(&p, st.as_slice()).unwrap();
        for j in 0..8 {
            assert_eq!(d[2 * j], 0.0);
            let expected = p.natural_frequency(j).unwrap() + 0.5;
            assert!((d[2 * j + 1] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn underflow_is_reported() {
        let p = params(0.1, 1.0, 2.0, 0.0);
        let mut state = vec![Complex64::new(1.0, 0.0); 8];
        state[5] = Complex64::new(1e-9, 0.0);
        assert!(matches!(
            rhs_complex(&p, &state),
            Err(Error::AmplitudeUnderflow { node: 5, .. })
        ));
        assert!(matches!(
            complex_to_polar(&state),
            Err(Error::AmplitudeUnderflow { node: 5, .. })
        ));
        let polar =
            PolarState::from_parts(&[1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0], &[0.0; 8]).unwrap();
        assert!(matches!(
            rhs_polar(&p, polar.as_slice()),
            Err(Error::AmplitudeUnderflow { node: 2, .. })
        ));
    }

    #[test]
    fn size_mismatch() {
        let p = params(0.1, 1.0, 2.0, 0.0);
        assert!(matches!(
            rhs_complex(&p, &[Complex64::new(1.0, 0.0); 4]),
            Err(Error::SizeMismatch {
                expected: 8,
                actual: 4
            })
        ));
    }

    #[test]
    fn polar_conversion() {
        let p = complex_to_polar(&[Complex64::i(), Complex64::new(-1.0, 0.0)]).unwrap();
        assert!((p.amplitude(0) - 1.0).abs() < 1e-15);
        assert!((p.phase(0) - FRAC_PI_2).abs() < 1e-15);
        assert!((p.amplitude(1) - 1.0).abs() < 1e-15);
        assert!((p.phase(1) - PI).abs() < 1e-15);
        // -i lands at 3π/2, not -π/2
        let q = complex_to_polar(&[-Complex64::i()]).unwrap();
        assert!((q.phase(0) - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(-1e-20), 0.0);
        assert!((wrap_phase(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap_phase(7.0) - (7.0 - TAU)).abs() < 1e-15);
    }
}
