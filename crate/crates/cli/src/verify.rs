//! The invariant suite behind `antiphase verify`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use antiphase_core::integrate::propagate;
use antiphase_core::linalg::{eigen_residual, eigenvector, multiset_distance};
use antiphase_core::oracle::{
    commutation_residual, finite_difference_jacobian, frozen_floquet, full_monodromy_exponents,
    off_block_magnitude, projected_blocks, FD_STEP,
};
use antiphase_core::stability::drift_period;
use antiphase_core::*;
use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deliberate corruption of the block matrices, used to confirm the suite can
/// fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Negate the `(0, 1)` entry of every block before the dense eigensolve.
    BlockSignFlip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.3e} {:.0e} {}",
            self.name,
            self.residual,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# name residual tolerance status")?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

type Res = antiphase_core::Result<f64>;

fn random_uniform(r: &mut ChaCha8Rng, n: usize) -> RingParams {
    RingParams::uniform(
        n,
        r.random_range(0.0..1.0),
        r.random_range(0.0..2.0),
        r.random_range(-3.0..3.0),
    )
    .expect("valid random parameters")
}

fn random_polar(r: &mut ChaCha8Rng, n: usize) -> PolarState {
    let a: Vec<f64> = (0..n).map(|_| r.random_range(0.5..1.5)).collect();
    let p: Vec<f64> = (0..n).map(|_| r.random_range(0.0..TAU)).collect();
    PolarState::from_parts(&a, &p).expect("positive amplitudes")
}

fn mutate(block: Matrix4<Complex64>, mutation: Mutation) -> Matrix4<Complex64> {
    let mut b = block;
    if mutation == Mutation::BlockSignFlip {
        b[(0, 1)] = -b[(0, 1)];
    }
    b
}

fn chain_rule(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_uniform(r, 8).with_detuning(r.random_range(-1.0..1.0))?;
        let x = random_polar(r, 8);
        let polar = rhs_polar(&p, x.as_slice())?;
        let dz = rhs_complex(&p, &x.to_complex())?;
        for j in 0..8 {
            let rot = Complex64::from_polar(1.0, -x.phase(j)) * dz[j];
            worst = worst.max((polar[2 * j] - rot.re).abs());
            worst = worst.max((polar[2 * j + 1] - rot.im / x.amplitude(j)).abs());
        }
    }
    Ok(worst)
}

fn equivariance(r: &mut ChaCha8Rng) -> Res {
    let samples: Vec<RingState> = (0..50)
        .map(|_| RingState::Polar(random_polar(r, 8)))
        .collect();
    let uniform = RingParams::uniform(8, 0.3, 1.1, 2.0)?;
    let detuned = uniform.with_detuning(0.4)?;
    let mut worst: f64 = 0.0;
    for op in [
        SymmetryOp::rotation(1),
        SymmetryOp::reflection(),
        SymmetryOp::phase(1.3),
    ] {
        worst = worst.max(check_equivariance(&op, &uniform, &samples)?);
    }
    for op in [SymmetryOp::rotation(2), SymmetryOp::phase(2.1)] {
        worst = worst.max(check_equivariance(&op, &detuned, &samples)?);
    }
    Ok(worst)
}

fn generator_fixes_decoupled(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for n in [8, 12, 16] {
        let p = random_uniform(r, n);
        let x = decoupled_state(
            &p,
            DecoupledPoint::new(r.random_range(0.0..TAU), r.random_range(0.0..TAU)),
        )?;
        let gx = SymmetryOp::antiphase_generator().apply(&x);
        for (a, b) in x.to_complex().iter().zip(gx.to_complex()) {
            worst = worst.max((a - b).norm());
        }
        worst = worst.max(coupling_residual(&p, &x)?);
    }
    Ok(worst)
}

fn basis_orthonormal() -> Res {
    let mut worst: f64 = 0.0;
    for n in [8, 12, 16] {
        let u = full_basis(n)?;
        worst = worst.max((u.adjoint() * &u - DMatrix::identity(2 * n, 2 * n)).camax());
    }
    Ok(worst)
}

fn basis_eigenvectors() -> Res {
    let mut worst: f64 = 0.0;
    let g = SymmetryOp::antiphase_generator();
    for n in [8, 12, 16] {
        for k in 0..n / 2 {
            let b = symmetry_basis(n, k)?;
            for m in 0..n / 2 {
                let d = g.power(m).tangent_matrix(n).map(|x| Complex64::new(x, 0.0));
                worst = worst.max((d * &b.columns - &b.columns * b.zeta.powu(m as u32)).camax());
            }
        }
    }
    Ok(worst)
}

fn jacobian_structure(r: &mut ChaCha8Rng, commute: bool) -> Res {
    let mut worst: f64 = 0.0;
    for n in [8, 16] {
        for _ in 0..20 {
            let p = random_uniform(r, n);
            let j = jacobian_analytic(&p, r.random_range(0.0..TAU)).entries;
            worst = worst.max(if commute {
                commutation_residual(&j, n)
            } else {
                off_block_magnitude(&j, n)?
            });
        }
    }
    Ok(worst)
}

fn finite_differences(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for n in [8, 16] {
        for _ in 0..10 {
            let p = random_uniform(r, n).with_detuning(r.random_range(-1.0..1.0))?;
            let psi = r.random_range(0.0..TAU);
            let x = decoupled_polar(&p, DecoupledPoint::new(r.random_range(0.0..TAU), psi))?;
            let fd = finite_difference_jacobian(&p, &x, FD_STEP)?;
            worst = worst.max((fd - jacobian_analytic(&p, psi).entries).amax());
        }
    }
    Ok(worst)
}

fn closed_vs_numeric(r: &mut ChaCha8Rng, sizes: &[usize], draws: usize, mutation: Mutation) -> Res {
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let n = sizes[i % sizes.len()];
        let p = random_uniform(r, n);
        let psi = r.random_range(0.0..TAU);
        let k = r.random_range(0..n / 2);
        let block = mutate(block_dk(&p, psi, k)?.matrix, mutation);
        let numeric = eigenvalues_numeric(&block)?;
        let dense = DMatrix::from_fn(4, 4, |i, j| block[(i, j)]);
        for &lambda in &numeric {
            worst = worst.max(eigen_residual(
                &dense,
                lambda,
                &eigenvector(&dense, lambda)?,
            ));
        }
        worst = worst.max(multiset_distance(
            &eigenvalues_closed_form(&p, psi, k)?,
            &numeric,
        ));
    }
    Ok(worst)
}

fn all_blocks_at(n: usize, mutation: Mutation) -> Res {
    let p = RingParams::uniform(n, 0.5, 1.0, 2.0)?;
    let mut worst: f64 = 0.0;
    for (i, psi) in [0.0, 0.9, 2.4].into_iter().enumerate() {
        for k in (i..n / 2).step_by(3) {
            let numeric = eigenvalues_numeric(&mutate(block_dk(&p, psi, k)?.matrix, mutation))?;
            worst = worst.max(multiset_distance(
                &eigenvalues_closed_form(&p, psi, k)?,
                &numeric,
            ));
        }
    }
    Ok(worst)
}

fn reflection_symmetry(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_uniform(r, 16);
        let psi = r.random_range(0.0..TAU);
        for k in 0..8 {
            let ev = eigenvalues_closed_form(&p, psi, k)?;
            let mirrored: Vec<Complex64> =
                ev.iter().map(|z| Complex64::new(-0.5, 0.0) - z).collect();
            worst = worst.max(multiset_distance(&ev, &mirrored));
        }
    }
    Ok(worst)
}

fn psi_equivalence(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_uniform(r, 16);
        let psi = r.random_range(0.0..TAU);
        for k in 0..8 {
            let re = |x: f64| -> antiphase_core::Result<Vec<f64>> {
                let mut v: Vec<f64> = eigenvalues_closed_form(&p, x, k)?
                    .iter()
                    .map(|z| z.re)
                    .collect();
                v.sort_by(f64::total_cmp);
                Ok(v)
            };
            let base = re(psi)?;
            for other in [PI - psi, PI + psi, TAU - psi] {
                for (a, b) in base.iter().zip(re(other)?) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn k0_spectrum(r: &mut ChaCha8Rng) -> Res {
    let expected = [0.0, 0.0, -0.5, -0.5].map(|x| Complex64::new(x, 0.0));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_uniform(r, 8);
        let psi = r.random_range(0.0..TAU);
        worst = worst.max(multiset_distance(
            &eigenvalues_closed_form(&p, psi, 0)?,
            &expected,
        ));
        worst = worst.max(multiset_distance(
            &eigenvalues_numeric(&block_dk(&p, psi, 0)?.matrix)?,
            &expected,
        ));
    }
    Ok(worst)
}

fn projected_spectra(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for n in [8, 12, 16] {
        for _ in 0..5 {
            let p = random_uniform(r, n);
            let psi = r.random_range(0.0..TAU);
            let j = jacobian_analytic(&p, psi).entries;
            for (k, b) in projected_blocks(&j, n)?.iter().enumerate() {
                let scaled = DMatrix::from_fn(4, 4, |i, c| b[(i, c)] * BLOCK_SCALE);
                let projected = antiphase_core::linalg::eigenvalues(&scaled)?;
                worst = worst.max(multiset_distance(
                    &eigenvalues_closed_form(&p, psi, k)?,
                    &projected,
                ));
            }
        }
    }
    Ok(worst)
}

fn frozen_limit() -> Res {
    let p = RingParams::uniform(8, 0.5, 1.0, 2.0)?;
    let mut worst: f64 = 0.0;
    for psi in [0.0, 0.8, 2.0] {
        for k in 0..4 {
            let exps = frozen_floquet(
                &block_dk(&p, psi, k)?.matrix,
                TAU / 0.2,
                DEFAULT_FLOQUET_STEPS,
            )?;
            let mut re: Vec<f64> = eigenvalues_closed_form(&p, psi, k)?
                .iter()
                .map(|z| z.re)
                .collect();
            re.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in exps.iter().zip(&re) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

fn floquet_k0() -> Res {
    let mut worst: f64 = 0.0;
    for detuning in [0.0625, 0.2, 1.0, 2.0] {
        let p = RingParams::new(8, 0.6, 1.0, 2.0, detuning)?;
        let e = floquet_block(&p, 0, 0.0, DEFAULT_FLOQUET_STEPS)?;
        for (a, b) in e.iter().zip([0.0, 0.0, -0.5, -0.5]) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn block_vs_full() -> Res {
    let p = RingParams::new(8, 0.5, 1.0, 2.0, 0.2)?;
    let mut union: Vec<f64> = spectrum_alternating(&p, DEFAULT_FLOQUET_STEPS)?
        .per_block
        .iter()
        .flat_map(|b| b.rates.growth_rates())
        .collect();
    union.sort_by(|a, b| b.total_cmp(a));
    let full = full_monodromy_exponents(&p, 0.0, DEFAULT_FLOQUET_STEPS)?;
    Ok(union
        .iter()
        .zip(&full)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn psi0_invariance() -> Res {
    let p = RingParams::new(8, 0.5, 1.0, 2.0, 0.2)?;
    let base = floquet_block(&p, 1, 0.0, DEFAULT_FLOQUET_STEPS)?;
    let mut worst: f64 = 0.0;
    for psi0 in [1.0, 2.0] {
        for (a, b) in floquet_block(&p, 1, psi0, DEFAULT_FLOQUET_STEPS)?
            .iter()
            .zip(&base)
        {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn monodromy_composition() -> Res {
    let p = RingParams::new(8, 0.5, 1.0, 2.0, 0.2)?;
    let period = drift_period(&p)?;
    let block = |t: f64| {
        block_dk(&p, 0.3 + 0.2 * t, 1)
            .expect("valid wavenumber")
            .matrix
    };
    let whole: Matrix4<Complex64> = propagate(block, 0.0, period, 2000)?;
    let first: Matrix4<Complex64> = propagate(block, 0.0, period / 2.0, 1000)?;
    let second: Matrix4<Complex64> = propagate(block, period / 2.0, period / 2.0, 1000)?;
    Ok((second * first - whole).camax() / whole.camax())
}

fn rk4_order() -> Res {
    let decay = |_t: f64, x: &[f64], out: &mut [f64]| -> antiphase_core::Result<()> {
        out[0] = -x[0];
        Ok(())
    };
    let run = |dt: f64, steps: usize| -> antiphase_core::Result<f64> {
        let mut x = vec![1.0];
        for s in 0..steps {
            x = rk4_step(decay, &x, s as f64 * dt, dt)?;
        }
        Ok((x[0] - (-1.0f64).exp()).abs())
    };
    let ratio = run(0.1, 10)? / run(0.05, 20)?;
    // distance of the halving ratio from the [12, 20] band around 16
    Ok((ratio - 16.0).abs())
}

fn invariant_closure(r: &mut ChaCha8Rng) -> Res {
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let p = RingParams::new(
            8,
            r.random_range(0.0..0.3),
            r.random_range(0.2..1.5),
            2.0,
            r.random_range(-0.5..0.5),
        )?;
        let x0 = decoupled_polar(
            &p,
            DecoupledPoint::new(r.random_range(0.0..TAU), r.random_range(0.0..TAU)),
        )?;
        let x = integrate_orbit(&p, &x0, 0.01, 1000, 1000, |_| {})?;
        worst = worst.max(coupling_residual(&p, &RingState::Polar(x))?);
    }
    Ok(worst)
}

fn phase_only_trace() -> Res {
    let model = PhaseOnlyModel::cosine(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let report = phase_only_check(&model, 8, TAU * i as f64 / 100.0)?;
        worst = worst
            .max(report.trace.abs())
            .max((-report.max_real).max(0.0));
    }
    Ok(worst)
}

fn scalability_smoke(mutation: Mutation) -> Res {
    let p = RingParams::uniform(256, 0.5, 1.0, 2.0)?;
    let mut worst: f64 = 0.0;
    for k in 0..128 {
        let numeric = eigenvalues_numeric(&mutate(block_dk(&p, 0.7, k)?.matrix, mutation))?;
        worst = worst.max(multiset_distance(
            &eigenvalues_closed_form(&p, 0.7, k)?,
            &numeric,
        ));
    }
    Ok(worst)
}

/// Run every check. A check that errors out is reported with an infinite
/// residual.
pub fn run(mutation: Mutation) -> Report {
    let mut r = ChaCha8Rng::seed_from_u64(20_190_611);
    let mut checks = Vec::new();
    let mut add = |name: &'static str, tolerance: f64, value: Res| {
        checks.push(Check {
            name,
            residual: value.unwrap_or(f64::INFINITY),
            tolerance,
        });
    };
    add("model.chain_rule", 1e-10, chain_rule(&mut r));
    add("symmetry.equivariance", 1e-12, equivariance(&mut r));
    add(
        "symmetry.generator_fixes_decoupled",
        1e-14,
        generator_fixes_decoupled(&mut r),
    );
    add("symmetry.basis_orthonormal", 1e-12, basis_orthonormal());
    add("symmetry.basis_eigenvectors", 1e-12, basis_eigenvectors());
    add(
        "stability.commutation",
        1e-10,
        jacobian_structure(&mut r, true),
    );
    add(
        "stability.off_block",
        1e-12,
        jacobian_structure(&mut r, false),
    );
    add(
        "stability.finite_difference",
        1e-6,
        finite_differences(&mut r),
    );
    add(
        "stability.closed_form_vs_numeric",
        1e-9,
        closed_vs_numeric(&mut r, &[8, 12, 16], 500, mutation),
    );
    add(
        "stability.projected_spectra",
        1e-10,
        projected_spectra(&mut r),
    );
    add(
        "stability.reflection_symmetry",
        1e-9,
        reflection_symmetry(&mut r),
    );
    add("stability.psi_equivalence", 1e-12, psi_equivalence(&mut r));
    add("stability.k0_spectrum", 1e-12, k0_spectrum(&mut r));
    add(
        "stability.block_suite_n64",
        1e-9,
        all_blocks_at(64, mutation),
    );
    add("stability.phase_only_trace", 1e-12, phase_only_trace());
    add("integrate.rk4_order", 4.0, rk4_order());
    add(
        "integrate.monodromy_composition",
        1e-9,
        monodromy_composition(),
    );
    add(
        "integrate.invariant_closure",
        1e-8,
        invariant_closure(&mut r),
    );
    add("floquet.frozen_limit", 1e-6, frozen_limit());
    add("floquet.k0_exponents", 1e-6, floquet_k0());
    add("floquet.block_vs_full", 1e-5, block_vs_full());
    add("floquet.psi0_invariance", 1e-6, psi0_invariance());
    add("scalability.n256_blocks", 1e-9, scalability_smoke(mutation));
    Report { checks }
}
