//! Dense complex eigenvalues for the small matrices that appear here
//! (4×4 symmetry blocks, 2N×2N Jacobians and monodromies with N ≲ 16).
//!
//! Eigenvalues come from a Hessenberg reduction followed by single-shift
//! complex QR with Wilkinson shifts and deflation. Eigenvectors, when needed,
//! come from inverse iteration at the computed eigenvalue.

use nalgebra::{DMatrix, DVector, Hessenberg};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;
const STALL_SWEEPS: usize = 20;
const STALL_ULPS: f64 = 16.0;

/// Eigenvalues of a square complex matrix, sorted by [`sort_spectrum`].
pub fn eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::InvalidArgument(
            "eigenvalues need a square matrix".into(),
        ));
    }
    if matrix
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = Hessenberg::new(matrix.clone()).unpack_h();
    let mut values = qr_eigenvalues(&mut h)?;
    sort_spectrum(&mut values);
    Ok(values)
}

/// Eigenvalues of a real matrix.
pub fn eigenvalues_real(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    eigenvalues(&matrix.map(|x| Complex64::new(x, 0.0)))
}

fn qr_eigenvalues(h: &mut DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iterations = 0usize;
    let mut since_deflation = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * n.max(1);

    let norm = h.norm();

    loop {
        // locate the bottom of the active unreduced block; repeated
        // eigenvalues can leave subdiagonals stuck at a few ulps, so after a
        // stall the test falls back to the matrix norm
        let stalled = since_deflation >= STALL_SWEEPS;
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            let relaxed = if stalled {
                STALL_ULPS * f64::EPSILON * norm
            } else {
                0.0
            };
            if sub <= f64::EPSILON * scale || sub <= relaxed {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            values[hi] = h[(hi, hi)];
            since_deflation = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }

        iterations += 1;
        since_deflation += 1;
        if iterations > budget {
            return Err(Error::NoConvergence { iterations });
        }

        let shift = if since_deflation % 11 == 10 {
            // exceptional shift to break symmetric stalls
            let below = if hi >= lo + 2 {
                h[(hi - 1, hi - 2)].norm()
            } else {
                0.0
            };
            h[(hi, hi)] + Complex64::new(0.75, 0.25) * (h[(hi, hi - 1)].norm() + below)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(h, lo, hi, shift);
    }
    Ok(values)
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Rotation `[[c, s], [-s̄, c]]` that zeroes `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// One explicit shifted QR step on the unreduced Hessenberg block `lo..=hi`.
fn qr_sweep(h: &mut DMatrix<Complex64>, lo: usize, hi: usize, shift: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        for col in i..=hi {
            let x = h[(i, col)];
            let y = h[(i + 1, col)];
            h[(i, col)] = x * c + s * y;
            h[(i + 1, col)] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let i = lo + offset;
        let last_row = (i + 2).min(hi);
        for row in lo..=last_row {
            let x = h[(row, i)];
            let y = h[(row, i + 1)];
            h[(row, i)] = x * c + s.conj() * y;
            h[(row, i + 1)] = -s * x + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Sort by descending real part; entries whose real parts agree to within
/// rounding are ordered by descending imaginary part.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end - 1].re - values[end].re).abs() <= tol {
            end += 1;
        }
        values[start..end].sort_by(|a, b| b.im.total_cmp(&a.im));
        start = end;
    }
}

/// Unit eigenvector for a computed eigenvalue, by inverse iteration.
pub fn eigenvector(matrix: &DMatrix<Complex64>, lambda: Complex64) -> Result<DVector<Complex64>> {
    let n = matrix.nrows();
    let norm = matrix.norm().max(1.0);
    let mut offset = 1e-12 * norm;
    for _ in 0..6 {
        let sigma = lambda + Complex64::new(offset, offset) * std::f64::consts::FRAC_1_SQRT_2;
        let shifted = matrix - DMatrix::identity(n, n) * sigma;
        let lu = shifted.lu();
        let mut x = DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                    let ny = y.norm();
                    if ny == 0.0 {
                        ok = false;
                        break;
                    }
                    x = y / Complex64::new(ny, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(x);
        }
        offset *= 100.0;
    }
    Err(Error::NoConvergence { iterations: 6 })
}

/// `‖A v - λ v‖₂` for a unit vector `v`.
pub fn eigen_residual(
    matrix: &DMatrix<Complex64>,
    lambda: Complex64,
    v: &DVector<Complex64>,
) -> f64 {
    (matrix * v - v * lambda).norm()
}

/// Bottleneck distance between two equally sized multisets of complex
/// numbers: the smallest achievable max `|a_i - b_π(i)|` over matchings π.
///
/// Exact for up to 8 elements. Larger sets use greedy closest-pair matching,
/// which yields an upper bound.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    if a.len() <= 8 {
        let mut perm: Vec<usize> = (0..b.len()).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let d = a
                .iter()
                .zip(p)
                .map(|(x, &j)| (x - b[j]).norm())
                .fold(0.0, f64::max);
            best = best.min(d);
        });
        return best;
    }
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for _ in 0..a.len() {
        let mut pick = (0, 0, f64::INFINITY);
        for (i, x) in a.iter().enumerate().filter(|(i, _)| !used_a[*i]) {
            for (j, y) in b.iter().enumerate().filter(|(j, _)| !used_b[*j]) {
                let d = (x - y).norm();
                if d < pick.2 {
                    pick = (i, j, d);
                }
            }
        }
        used_a[pick.0] = true;
        used_b[pick.1] = true;
        worst = worst.max(pick.2);
    }
    worst
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Max entry magnitude.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
