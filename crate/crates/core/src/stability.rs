//! Linear stability of the decoupled state.
//!
//! The linearization about the torus depends only on the cluster phase
//! difference `ψ`. Conjugating it into the wave-pattern bases splits it into
//! `N/2` independent 4×4 blocks `D_k`, whose eigenvalues have a closed form.
//! With detuned frequencies `ψ` drifts at rate `Ω`, the blocks become
//! `2π/|Ω|`-periodic in time, and stability is read from Floquet exponents of
//! each block's monodromy.
//!
//! # Time normalization of block spectra
//!
//! The closed-form block matrices and their eigenvalues carry an overall factor
//! `1/2` relative to the Jacobian of the equations of motion: for every `k`,
//! `D_k` is similar to `BLOCK_SCALE · V^(k)† J V^(k)`. Block spectra, Floquet
//! exponents and `max_transverse` values are all reported in that convention.
//! Signs, and therefore every stability verdict, are unaffected; growth rates
//! of the nonlinear system in its own time units are `1 / BLOCK_SCALE` times
//! larger.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::{allocator::Allocator, DMatrix, DefaultAllocator, Dim, Matrix4, OMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{propagate_block_sampled, propagate_sampled};
use crate::linalg::{eigenvalues, eigenvalues_real, max_abs, sort_spectrum};
use crate::model::RingParams;
use crate::symmetry::{check_wavenumber, root_of_unity, SymmetryBasis};

/// Ratio between block rates and Jacobian rates. See the module docs.
pub const BLOCK_SCALE: f64 = 0.5;

/// Linearization of the polar equations at the decoupled state, in the
/// interleaved `(δa_j, δφ_j)` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub entries: DMatrix<f64>,
    pub psi: f64,
}

/// Analytic Jacobian at phase difference `psi`. It does not depend on the
/// reference phase `θ` or on the natural frequencies.
///
/// Per node, with `s = β sin ψ`, `c = β cos ψ` and `σ = -1` on even nodes,
/// `+1` on odd nodes:
///
/// ```text
/// δa_j' =  s δa_{j-1} - δa_j - s δa_{j+1} - σc δφ_{j-1} + σc δφ_{j+1}
/// δφ_j' = σc δa_{j-1} + 4α δa_j - σc δa_{j+1} + s δφ_{j-1} - s δφ_{j+1}
/// ```
pub fn jacobian_analytic(params: &RingParams, psi: f64) -> JacobianMatrix {
    let n = params.n();
    let beta = params.beta();
    let (sin, cos) = psi.sin_cos();
    let s = beta * sin;
    let c = beta * cos;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        let (a, p) = (2 * j, 2 * j + 1);
        let prev = 2 * ((j + n - 1) % n);
        let next = 2 * ((j + 1) % n);

        m[(a, prev)] += s;
        m[(a, a)] += -1.0;
        m[(a, next)] += -s;
        m[(a, prev + 1)] += -sign * c;
        m[(a, next + 1)] += sign * c;

        m[(p, prev)] += sign * c;
        m[(p, a)] += 4.0 * params.alpha();
        m[(p, next)] += -sign * c;
        m[(p, prev + 1)] += s;
        m[(p, next + 1)] += -s;
    }
    JacobianMatrix { entries: m, psi }
}

impl JacobianMatrix {
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.entries.map(|x| Complex64::new(x, 0.0))
    }

    /// `V^(k)† J V^(k)`, in Jacobian time units.
    pub fn project(&self, basis: &SymmetryBasis) -> Matrix4<Complex64> {
        let v = &basis.columns;
        let jv = self.to_complex() * v;
        let m = v.adjoint() * jv;
        Matrix4::from_fn(|i, j| m[(i, j)])
    }
}

/// One 4×4 symmetry block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub k: usize,
    pub psi: f64,
    pub matrix: Matrix4<Complex64>,
}

/// Block `D_k` at phase difference `psi`, in `(δa_even, δa_odd, δφ_even,
/// δφ_odd)` coordinates.
pub fn block_dk(params: &RingParams, psi: f64, k: usize) -> Result<SpectralBlock> {
    check_wavenumber(params.n(), k)?;
    Ok(SpectralBlock {
        k,
        psi,
        matrix: block_matrix(params, psi, k),
    })
}

pub(crate) fn block_matrix(params: &RingParams, psi: f64, k: usize) -> Matrix4<Complex64> {
    let zk = root_of_unity(params.n(), k);
    let one = Complex64::new(1.0, 0.0);
    let minus = (one - zk.conj()) * params.beta();
    let plus = (one - zk) * params.beta();
    let (s, c) = psi.sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    let four_alpha = r(4.0 * params.alpha());
    let zero = r(0.0);

    #[rustfmt::skip]
    let m = Matrix4::new(
        r(-1.0),        -minus * s,   zero,        minus * c,
        plus * s,       r(-1.0),      plus * c,    zero,
        four_alpha,     -minus * c,   zero,        -minus * s,
        -plus * c,      four_alpha,   plus * s,    zero,
    );
    m * r(BLOCK_SCALE)
}

/// `1 - cos(kπ/M)`, evaluated without cancellation.
fn wave_factor(params: &RingParams, k: usize) -> f64 {
    let half_angle = 0.5 * k as f64 * PI / params.quarter() as f64;
    2.0 * half_angle.sin().powi(2)
}

/// Closed-form eigenvalues of `D_k`:
///
/// ```text
/// λ = -1/4 ± 1/4 √(1 - 8β²w ± 4β √(2 (16α² cos²ψ - sin²ψ) w)),   w = 1 - cos(kπ/M)
/// ```
///
/// with both signs enumerated independently. Sorted by [`sort_spectrum`].
pub fn eigenvalues_closed_form(params: &RingParams, psi: f64, k: usize) -> Result<[Complex64; 4]> {
    check_wavenumber(params.n(), k)?;
    let w = wave_factor(params, k);
    let (alpha, beta) = (params.alpha(), params.beta());
    let (s, c) = psi.sin_cos();
    let inner = Complex64::new(2.0 * (16.0 * alpha * alpha * c * c - s * s) * w, 0.0).sqrt();
    let base = Complex64::new(1.0 - 8.0 * beta * beta * w, 0.0);
    let mut out = [Complex64::new(0.0, 0.0); 4];
    let mut idx = 0;
    for inner_sign in [1.0, -1.0] {
        let root = (base + inner * (4.0 * beta * inner_sign)).sqrt();
        for outer_sign in [1.0, -1.0] {
            out[idx] = Complex64::new(-0.25, 0.0) + root * (0.25 * outer_sign);
            idx += 1;
        }
    }
    sort_spectrum(&mut out);
    Ok(out)
}

/// Eigenvalues of a 4×4 block by dense QR iteration, sorted by
/// [`sort_spectrum`].
pub fn eigenvalues_numeric(block: &Matrix4<Complex64>) -> Result<[Complex64; 4]> {
    let dense = DMatrix::from_fn(4, 4, |i, j| block[(i, j)]);
    let ev = eigenvalues(&dense)?;
    Ok([ev[0], ev[1], ev[2], ev[3]])
}

/// Per-block rates: eigenvalues for a static Jacobian, Floquet exponents for
/// a periodic one.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockRates {
    Eigenvalues([Complex64; 4]),
    Floquet([f64; 4]),
}

impl BlockRates {
    /// Real parts (growth rates), in descending order.
    pub fn growth_rates(&self) -> [f64; 4] {
        let mut r = match self {
            BlockRates::Eigenvalues(ev) => ev.map(|z| z.re),
            BlockRates::Floquet(f) => *f,
        };
        r.sort_by(|a, b| b.total_cmp(a));
        r
    }

    pub fn max_rate(&self) -> f64 {
        self.growth_rates()[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub k: usize,
    pub rates: BlockRates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub per_block: Vec<BlockSpectrum>,
    /// Largest growth rate over all blocks with `k ≠ 0`.
    pub max_transverse: f64,
    /// The two largest `k = 0` rates: the neutral directions along the torus.
    pub torus_pair: [f64; 2],
}

impl StabilityVerdict {
    fn from_blocks(per_block: Vec<BlockSpectrum>) -> Self {
        let max_transverse = per_block
            .iter()
            .filter(|b| b.k != 0)
            .map(|b| b.rates.max_rate())
            .fold(f64::NEG_INFINITY, f64::max);
        let torus_pair = per_block
            .iter()
            .find(|b| b.k == 0)
            .map(|b| {
                let r = b.rates.growth_rates();
                [r[0], r[1]]
            })
            .unwrap_or([f64::NAN; 2]);
        Self {
            per_block,
            max_transverse,
            torus_pair,
        }
    }

    pub fn is_transversely_stable(&self) -> bool {
        self.max_transverse < 0.0
    }
}

/// Closed-form spectra of every block for uniform frequencies.
pub fn spectrum_uniform(params: &RingParams, psi: f64) -> Result<StabilityVerdict> {
    if !params.is_uniform() {
        return Err(Error::DetunedSystem(params.detuning()));
    }
    let per_block = (0..params.n_blocks())
        .map(|k| {
            Ok(BlockSpectrum {
                k,
                rates: BlockRates::Eigenvalues(eigenvalues_closed_form(params, psi, k)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityVerdict::from_blocks(per_block))
}

/// Same as [`spectrum_uniform`] but with dense eigensolves of each block.
pub fn spectrum_uniform_numeric(params: &RingParams, psi: f64) -> Result<StabilityVerdict> {
    if !params.is_uniform() {
        return Err(Error::DetunedSystem(params.detuning()));
    }
    let per_block = (0..params.n_blocks())
        .map(|k| {
            Ok(BlockSpectrum {
                k,
                rates: BlockRates::Eigenvalues(eigenvalues_numeric(&block_matrix(params, psi, k))?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityVerdict::from_blocks(per_block))
}

/// Floquet exponents `ln|μ| / T` of a monodromy over period `period`,
/// descending.
///
/// Multipliers much smaller than `‖M‖` lose their relative accuracy here; use
/// [`periodic_exponents`] when the spread of rates times the period is large.
pub fn floquet_exponents(monodromy: &DMatrix<Complex64>, period: f64) -> Result<Vec<f64>> {
    let mut exps: Vec<f64> = eigenvalues(monodromy)?
        .iter()
        .map(|mu| mu.norm().max(f64::MIN_POSITIVE).ln() / period)
        .collect();
    exps.sort_by(|a, b| b.total_cmp(a));
    Ok(exps)
}

/// Floquet exponents of `dV/dt = D(t) V` over `[0, period]`, descending.
///
/// Integrates both the monodromy `M` and, backwards in time, its inverse.
/// Each exponent is taken from whichever of the two has the smaller relative
/// error bound `‖M‖/|μ|` or `‖M⁻¹‖·|μ|`, so strongly contracting directions
/// over long periods stay accurate.
pub fn periodic_exponents<D, G>(mut generator: G, period: f64, n_steps: usize) -> Result<Vec<f64>>
where
    D: Dim,
    G: FnMut(f64) -> OMatrix<Complex64, D, D>,
    DefaultAllocator: Allocator<D, D>,
{
    // one set of samples serves both directions: the inverse flows under
    // -D(T - s), which visits the same half-step grid in reverse
    let (h, samples) = half_step_samples(&mut generator, period, n_steps)?;
    let forward = to_dense(&propagate_sampled(samples.iter(), h)?);
    let negated: Vec<_> = samples.iter().rev().map(|d| -d).collect();
    let backward = to_dense(&propagate_sampled(negated.iter(), h)?);
    two_sided_exponents(&forward, &backward, period)
}

/// [`periodic_exponents`] for 4×4 blocks, on the fixed-size integrator.
fn block_periodic_exponents<G>(mut generator: G, period: f64, n_steps: usize) -> Result<Vec<f64>>
where
    G: FnMut(f64) -> Matrix4<Complex64>,
{
    let (h, samples) = half_step_samples(&mut generator, period, n_steps)?;
    let forward = to_dense(&propagate_block_sampled(samples.iter(), h)?);
    let negated: Vec<_> = samples.iter().rev().map(|d| -d).collect();
    let backward = to_dense(&propagate_block_sampled(negated.iter(), h)?);
    two_sided_exponents(&forward, &backward, period)
}

fn half_step_samples<T, G: FnMut(f64) -> T>(
    generator: &mut G,
    period: f64,
    n_steps: usize,
) -> Result<(f64, Vec<T>)> {
    if !(period > 0.0 && period.is_finite()) || n_steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "need a positive period and at least one step, got {period} and {n_steps}"
        )));
    }
    let h = period / n_steps as f64;
    Ok((
        h,
        (0..=2 * n_steps)
            .map(|i| generator(i as f64 * 0.5 * h))
            .collect(),
    ))
}

/// Exponents from a monodromy `forward` and its separately integrated
/// inverse `backward`.
fn two_sided_exponents(
    forward: &DMatrix<Complex64>,
    backward: &DMatrix<Complex64>,
    period: f64,
) -> Result<Vec<f64>> {
    let mut mu: Vec<f64> = eigenvalues(forward)?.iter().map(|z| z.norm()).collect();
    let mut nu: Vec<f64> = eigenvalues(backward)?.iter().map(|z| z.norm()).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    nu.sort_by(f64::total_cmp);
    let (fwd_norm, bwd_norm) = (max_abs(forward), max_abs(backward));

    Ok(mu
        .iter()
        .zip(&nu)
        .map(|(&m, &n)| {
            let m = m.max(f64::MIN_POSITIVE);
            let n = n.max(f64::MIN_POSITIVE);
            if fwd_norm / m <= bwd_norm / n {
                m.ln() / period
            } else {
                -n.ln() / period
            }
        })
        .collect())
}

fn to_dense<D: Dim>(m: &OMatrix<Complex64, D, D>) -> DMatrix<Complex64>
where
    DefaultAllocator: Allocator<D, D>,
{
    DMatrix::from_iterator(m.nrows(), m.ncols(), m.iter().copied())
}

/// Drift period `2π/|Ω|` of the phase difference.
pub fn drift_period(params: &RingParams) -> Result<f64> {
    if params.detuning() == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok(TAU / params.detuning().abs())
}

/// Floquet exponents of block `k` over one drift period, starting from phase
/// difference `psi0`, integrated with `n_steps` RK4 steps.
pub fn floquet_block(params: &RingParams, k: usize, psi0: f64, n_steps: usize) -> Result<[f64; 4]> {
    check_wavenumber(params.n(), k)?;
    let period = drift_period(params)?;
    let rate = params.detuning();
    let e = block_periodic_exponents(
        |t| block_matrix(params, psi0 + rate * t, k),
        period,
        n_steps,
    )?;
    Ok([e[0], e[1], e[2], e[3]])
}

/// Floquet exponents of every block for detuned frequencies, from `ψ0 = 0`.
pub fn spectrum_alternating(params: &RingParams, n_steps: usize) -> Result<StabilityVerdict> {
    spectrum_alternating_from(params, 0.0, n_steps)
}

pub fn spectrum_alternating_from(
    params: &RingParams,
    psi0: f64,
    n_steps: usize,
) -> Result<StabilityVerdict> {
    drift_period(params)?;
    let per_block = (0..params.n_blocks())
        .map(|k| {
            Ok(BlockSpectrum {
                k,
                rates: BlockRates::Floquet(floquet_block(params, k, psi0, n_steps)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityVerdict::from_blocks(per_block))
}

/// Largest transverse Floquet exponent, skipping the `k = 0` block entirely.
pub fn max_transverse_floquet(params: &RingParams, n_steps: usize) -> Result<f64> {
    drift_period(params)?;
    let mut worst = f64::NEG_INFINITY;
    for k in 1..params.n_blocks() {
        worst = worst.max(floquet_block(params, k, 0.0, n_steps)?[0]);
    }
    Ok(worst)
}

type CouplingFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A phase-only ring `dφ_j/dt = ω_j + β [g(φ_{j-1} - φ_j) + g(φ_{j+1} - φ_j)]`.
#[derive(Clone)]
pub struct PhaseOnlyModel {
    name: String,
    coupling: CouplingFn,
    derivative: CouplingFn,
    beta: f64,
}

impl fmt::Debug for PhaseOnlyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseOnlyModel")
            .field("name", &self.name)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

/// Grid size for the parity check.
pub const PARITY_GRID: usize = 100;
pub const PARITY_TOLERANCE: f64 = 1e-12;

impl PhaseOnlyModel {
    /// Coupling function `g` with its derivative `g'`.
    pub fn new<G, D>(name: impl Into<String>, g: G, dg: D, beta: f64) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            coupling: Arc::new(g),
            derivative: Arc::new(dg),
            beta,
        }
    }

    pub fn cosine(beta: f64) -> Self {
        Self::new("cos", f64::cos, |x: f64| -x.sin(), beta)
    }

    pub fn sine(beta: f64) -> Self {
        Self::new("sin", f64::sin, f64::cos, beta)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coupling(&self, x: f64) -> f64 {
        (self.coupling)(x)
    }

    /// `g(ψ) + g(π - ψ)`.
    pub fn parity_residual(&self, psi: f64) -> f64 {
        self.coupling(psi) + self.coupling(PI - psi)
    }

    /// Max parity residual over an evenly spaced grid on `[0, 2π)`.
    pub fn max_parity_residual(&self) -> f64 {
        (0..PARITY_GRID)
            .map(|i| {
                self.parity_residual(TAU * i as f64 / PARITY_GRID as f64)
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Phase-only Jacobian at the decoupled phase pattern with `θ = 0`.
    pub fn jacobian(&self, n: usize, psi: f64) -> DMatrix<f64> {
        let phase = |j: usize| match j % 4 {
            0 => 0.0,
            1 => psi,
            2 => PI,
            _ => psi + PI,
        };
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let prev = (j + n - 1) % n;
            let next = (j + 1) % n;
            let dp = self.beta * (self.derivative)(phase(prev) - phase(j));
            let dn = self.beta * (self.derivative)(phase(next) - phase(j));
            m[(j, prev)] += dp;
            m[(j, next)] += dn;
            m[(j, j)] -= dp + dn;
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOnlyVerdict {
    /// Zero trace with some eigenvalue off the imaginary axis: at least one
    /// direction grows.
    NotAsymptoticallyStable,
    /// Every eigenvalue on the imaginary axis.
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOnlyReport {
    pub trace: f64,
    pub max_real: f64,
    pub eigenvalues: Vec<Complex64>,
    pub verdict: PhaseOnlyVerdict,
}

/// Real parts below this are treated as zero in the phase-only verdict.
const NEUTRAL_TOLERANCE: f64 = 1e-9;

pub fn phase_only_check(model: &PhaseOnlyModel, n: usize, psi: f64) -> Result<PhaseOnlyReport> {
    crate::model::check_ring_size(n)?;
    let residual = model.max_parity_residual();
    if residual.is_nan() || residual >= PARITY_TOLERANCE {
        return Err(Error::InadmissibleCoupling { residual });
    }
    let jac = model.jacobian(n, psi);
    let trace = jac.trace();
    let eigenvalues = eigenvalues_real(&jac)?;
    let max_real = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if eigenvalues.iter().any(|z| z.re.abs() > NEUTRAL_TOLERANCE) {
        PhaseOnlyVerdict::NotAsymptoticallyStable
    } else {
        PhaseOnlyVerdict::Neutral
    };
    Ok(PhaseOnlyReport {
        trace,
        max_real,
        eigenvalues,
        verdict,
    })
}
