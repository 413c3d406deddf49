//! Fixed-step classical Runge-Kutta integration of nonlinear orbits and of
//! linear time-varying matrix flows.

use nalgebra::{allocator::Allocator, DefaultAllocator, Dim, Matrix4, OMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{rhs_polar_into, PolarState, RingParams};

/// Default number of RK4 steps per Floquet period.
pub const DEFAULT_FLOQUET_STEPS: usize = 1000;

/// Scratch buffers for allocation-free RK4 steps.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advance `x` in place by one step of size `dt`. `f(t, x, out)` writes
    /// the vector field at `(t, x)` into `out`.
    #[allow(clippy::needless_range_loop)]
    pub fn step<F>(&mut self, f: &mut F, x: &mut [f64], t: f64, dt: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = x.len();
        if self.k1.len() != n {
            *self = Self::new(n);
        }
        let half = 0.5 * dt;

        f(t, x, &mut self.k1)?;
        for i in 0..n {
            self.tmp[i] = x[i] + half * self.k1[i];
        }
        f(t + half, &self.tmp, &mut self.k2)?;
        for i in 0..n {
            self.tmp[i] = x[i] + half * self.k2[i];
        }
        f(t + half, &self.tmp, &mut self.k3)?;
        for i in 0..n {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4)?;

        let sixth = dt / 6.0;
        for i in 0..n {
            x[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

/// One classical RK4 step of `dx/dt = f(t, x)`.
pub fn rk4_step<F>(mut f: F, x: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    check_step(dt)?;
    let mut next = x.to_vec();
    Rk4::new(x.len()).step(&mut f, &mut next, t, dt)?;
    Ok(next)
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    Ok(())
}

/// A sampled point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    pub step: usize,
    pub time: f64,
    pub state: PolarState,
}

/// Integrate the polar equations of motion for `n_steps` steps of size `dt`.
///
/// The observer sees the initial state, every `stride`-th step, and the final
/// step. Time is computed as `step * dt` rather than accumulated. Returns the
/// final state.
pub fn integrate_orbit<O>(
    params: &RingParams,
    initial: &PolarState,
    dt: f64,
    n_steps: usize,
    stride: usize,
    mut observer: O,
) -> Result<PolarState>
where
    O: FnMut(&OrbitSample),
{
    check_step(dt)?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument(
            "sample stride must be at least 1".into(),
        ));
    }
    if initial.n() != params.n() {
        return Err(Error::SizeMismatch {
            expected: params.n(),
            actual: initial.n(),
        });
    }

    let mut x = initial.as_slice().to_vec();
    let mut rk = Rk4::new(x.len());
    let mut field = |_t: f64, s: &[f64], out: &mut [f64]| rhs_polar_into(params, s, out);

    observer(&OrbitSample {
        step: 0,
        time: 0.0,
        state: initial.clone(),
    });
    for step in 1..=n_steps {
        let t = (step - 1) as f64 * dt;
        rk.step(&mut field, &mut x, t, dt)
            .map_err(|source| Error::StepFailed {
                step,
                time: t,
                source: Box::new(source),
            })?;
        if step % stride == 0 || step == n_steps {
            observer(&OrbitSample {
                step,
                time: step as f64 * dt,
                state: PolarState::from_interleaved(x.clone())?,
            });
        }
    }
    PolarState::from_interleaved(x)
}

/// Collect the samples of [`integrate_orbit`].
pub fn sample_orbit(
    params: &RingParams,
    initial: &PolarState,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<Vec<OrbitSample>> {
    let mut samples = Vec::with_capacity(n_steps / stride.max(1) + 2);
    integrate_orbit(params, initial, dt, n_steps, stride, |s| {
        samples.push(s.clone())
    })?;
    Ok(samples)
}

/// Fundamental matrix of `dV/dt = D(t) V` from `V(t0) = I` to `t0 + duration`,
/// using `n_steps` RK4 steps. The generator is evaluated at the step ends and
/// midpoints only.
pub fn propagate<D, G>(
    mut generator: G,
    t0: f64,
    duration: f64,
    n_steps: usize,
) -> Result<OMatrix<Complex64, D, D>>
where
    D: Dim,
    G: FnMut(f64) -> OMatrix<Complex64, D, D>,
    DefaultAllocator: Allocator<D, D>,
{
    check_step(duration)?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let h = duration / n_steps as f64;
    let samples: Vec<_> = (0..=2 * n_steps)
        .map(|i| generator(t0 + i as f64 * 0.5 * h))
        .collect();
    propagate_sampled(samples.iter(), h)
}

/// RK4 fundamental matrix from generator samples at `0, h/2, h, 3h/2, …`.
/// The sample count must be odd and at least 3.
pub(crate) fn propagate_sampled<'a, D, I>(samples: I, h: f64) -> Result<OMatrix<Complex64, D, D>>
where
    D: Dim,
    I: IntoIterator<Item = &'a OMatrix<Complex64, D, D>>,
    DefaultAllocator: Allocator<D, D>,
    OMatrix<Complex64, D, D>: 'a,
{
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut samples = samples.into_iter();
    let mut d_start = samples
        .next()
        .ok_or_else(|| Error::InvalidArgument("no generator samples".into()))?;
    let (rows, cols) = d_start.shape_generic();
    if rows.value() != cols.value() {
        return Err(Error::InvalidArgument("generator must be square".into()));
    }
    let mut v = OMatrix::<Complex64, D, D>::identity_generic(rows, cols);

    let mut step = 0;
    while let (Some(d_mid), Some(d_end)) = (samples.next(), samples.next()) {
        let k1 = d_start * &v;
        let k2 = d_mid * (&v + &k1 * half);
        let k3 = d_mid * (&v + &k2 * half);
        let k4 = d_end * (&v + &k3 * full);
        v += (k1 + (k2 + k3) * two + k4) * sixth;
        step += 1;

        // non-finite entries persist, so checking every few steps suffices
        if step % 64 == 0 && v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { step });
        }
        d_start = d_end;
    }
    if step == 0 {
        return Err(Error::InvalidArgument(
            "need at least three generator samples".into(),
        ));
    }
    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite { step });
    }
    Ok(v)
}

type Flat4 = [Complex64; 16];

/// Column-major 4×4 product on flat arrays; much cheaper than the generic
/// matrix product when debug assertions are on.
#[inline(always)]
fn mul4(a: &Flat4, b: &Flat4) -> Flat4 {
    let mut out = [Complex64::new(0.0, 0.0); 16];
    for col in 0..4 {
        for k in 0..4 {
            let x = b[4 * col + k];
            for row in 0..4 {
                out[4 * col + row] += a[4 * k + row] * x;
            }
        }
    }
    out
}

#[inline(always)]
fn axpy4(x: &Flat4, a: f64, y: &Flat4) -> Flat4 {
    std::array::from_fn(|i| x[i] + y[i] * a)
}

/// [`propagate_sampled`] specialised to 4×4 blocks.
pub(crate) fn propagate_block_sampled<'a, I>(samples: I, h: f64) -> Result<Matrix4<Complex64>>
where
    I: IntoIterator<Item = &'a Matrix4<Complex64>>,
{
    let flat = |m: &Matrix4<Complex64>| -> Flat4 { std::array::from_fn(|i| m.as_slice()[i]) };
    let mut samples = samples.into_iter().map(flat);
    let mut d_start = samples
        .next()
        .ok_or_else(|| Error::InvalidArgument("no generator samples".into()))?;
    let mut v: Flat4 = flat(&Matrix4::identity());

    let mut step = 0;
    while let (Some(d_mid), Some(d_end)) = (samples.next(), samples.next()) {
        let k1 = mul4(&d_start, &v);
        let k2 = mul4(&d_mid, &axpy4(&v, 0.5 * h, &k1));
        let k3 = mul4(&d_mid, &axpy4(&v, 0.5 * h, &k2));
        let k4 = mul4(&d_end, &axpy4(&v, h, &k3));
        for i in 0..16 {
            v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        step += 1;
        if step % 64 == 0 && v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { step });
        }
        d_start = d_end;
    }
    if step == 0 {
        return Err(Error::InvalidArgument(
            "need at least three generator samples".into(),
        ));
    }
    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite { step });
    }
    Ok(Matrix4::from_column_slice(&v))
}

/// One-period monodromy of a 4×4 block flow.
pub fn monodromy<G>(block_fn: G, period: f64, n_steps: usize) -> Result<Matrix4<Complex64>>
where
    G: FnMut(f64) -> Matrix4<Complex64>,
{
    propagate(block_fn, 0.0, period, n_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = -x[0];
        Ok(())
    }

    fn integrate_decay(dt: f64, steps: usize) -> f64 {
        let mut x = [1.0];
        let mut rk = Rk4::new(1);
        let mut f = decay;
        for s in 0..steps {
            rk.step(&mut f, &mut x, s as f64 * dt, dt).unwrap();
        }
        x[0]
    }

    #[test]
    fn single_step_matches_taylor() {
        let x = rk4_step(decay, &[1.0], 0.0, 0.1).unwrap();
        // 1 - h + h²/2 - h³/6 + h⁴/24
        assert!((x[0] - 0.904_837_5).abs() < 1e-12);
        assert!((x[0] - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_field_is_identity() {
        let x0 = [0.3, -1.2, 4.0];
        let x = rk4_step(
            |_, _, out: &mut [f64]| {
                out.fill(0.0);
                Ok(())
            },
            &x0,
            0.0,
            0.5,
        )
        .unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (-1.0f64).exp();
        let coarse = (integrate_decay(0.1, 10) - exact).abs();
        let fine = (integrate_decay(0.05, 20) - exact).abs();
        let ratio = coarse / fine;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(rk4_step(decay, &[1.0], 0.0, 0.0).is_err());
        assert!(rk4_step(decay, &[1.0], 0.0, -0.1).is_err());
        let m = monodromy(|_| Matrix4::zeros(), 1.0, 0);
        assert!(m.is_err());
    }

    #[test]
    fn zero_generator_gives_identity() {
        let m = monodromy(|_| Matrix4::zeros(), 3.0, 17).unwrap();
        assert_eq!(m, Matrix4::identity());
    }

    #[test]
    fn scalar_generator_gives_exponential() {
        let c = Complex64::new(-0.3, 0.7);
        let m = monodromy(|_| Matrix4::identity() * c, 2.0, 400).unwrap();
        let expected = (c * 2.0).exp();
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j {
                    expected
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((m[(i, j)] - target).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn nonfinite_flow_is_an_error() {
        let r = monodromy(|_| Matrix4::identity() * Complex64::new(1e300, 0.0), 1.0, 4);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn orbit_rejects_zero_steps() {
        let p = RingParams::uniform(4, 0.1, 1.0, 2.0).unwrap();
        let s = PolarState::from_parts(&[1.0; 4], &[0.0; 4]).unwrap();
        assert!(integrate_orbit(&p, &s, 0.01, 0, 1, |_| {}).is_err());
        assert!(integrate_orbit(&p, &s, 0.01, 5, 0, |_| {}).is_err());
    }

    #[test]
    fn orbit_sampling_stride() {
        let p = RingParams::uniform(4, 0.1, 1.0, 2.0).unwrap();
        let s = PolarState::from_parts(&[1.0; 4], &[0.0; 4]).unwrap();
        let samples = sample_orbit(&p, &s, 0.01, 25, 10).unwrap();
        let steps: Vec<usize> = samples.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 25]);
        assert!((samples[3].time - 0.25).abs() < 1e-15);
    }

    #[test]
    fn orbit_underflow_reports_step() {
        // strong coupling drives the small amplitude through zero in one step
        let p = RingParams::uniform(4, 0.0, 5.0, 0.0).unwrap();
        let s = PolarState::from_parts(&[1e-3, 1.0, 1.0, 1.0], &[0.0, 3.0, 0.0, 3.0]).unwrap();
        let err = integrate_orbit(&p, &s, 0.5, 50, 1, |_| {}).unwrap_err();
        match err {
            Error::StepFailed { step, source, .. } => {
                assert!(step >= 1);
                assert!(matches!(*source, Error::AmplitudeUnderflow { .. }));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fixed_size_propagation_matches_generic() {
        let gen = |t: f64| {
            Matrix4::from_fn(|i, j| {
                Complex64::new((t + i as f64).sin() * 0.3, 0.1 * (j as f64 - t).cos())
            })
        };
        let h = 0.01;
        let samples: Vec<_> = (0..=400).map(|i| gen(i as f64 * 0.5 * h)).collect();
        let a = propagate_sampled(samples.iter(), h).unwrap();
        let b = propagate_block_sampled(samples.iter(), h).unwrap();
        assert!((a - b).camax() < 1e-13);
        let c: Matrix4<Complex64> = propagate(gen, 0.0, 2.0, 200).unwrap();
        assert!((b - c).camax() < 1e-13);
        assert!(propagate_block_sampled(samples[..2].iter(), h).is_err());
    }
}
