//! General complex eigenvalues via Hessenberg reduction and a single-shift
//! QR iteration with Wilkinson and exceptional shifts.
//!
//! Written in-house because the stock Schur path is not safe on nilpotent
//! inputs (truncated shifts are first-class citizens here). The iteration
//! budget makes failure an error, never a hang.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_DIM: usize = 60;
const EXCEPTIONAL_EVERY: usize = 10;

/// Eigenvalues of a general square complex matrix, unordered.
pub(crate) fn general_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }

    // Scale to unit magnitude so the deflation thresholds are relative.
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let mut h = a.map(|z| z / scale);
    hessenberg_in_place(&mut h);

    let eps = f64::EPSILON;
    let hnorm = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut out = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut sweeps_here = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_DIM * n;

    loop {
        // Deflate negligible subdiagonals in the active window.
        let mut k = hi;
        while k > 0 {
            let sub = h[(k, k - 1)].norm();
            let local = h[(k - 1, k - 1)].norm() + h[(k, k)].norm();
            let tol = eps * if local > 0.0 { local } else { hnorm };
            if sub <= tol {
                h[(k, k - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            k -= 1;
        }
        let lo = k;

        if lo == hi {
            out.push(h[(hi, hi)]);
            if hi == 0 {
                break;
            }
            hi -= 1;
            sweeps_here = 0;
            continue;
        }
        if hi - lo == 1 {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            out.push(l1);
            out.push(l2);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            sweeps_here = 0;
            continue;
        }

        total += 1;
        sweeps_here += 1;
        if total > budget {
            return Err(Error::Convergence(format!(
                "eigenvalue iteration exceeded {budget} sweeps"
            )));
        }

        let shift = if sweeps_here % EXCEPTIONAL_EVERY == 0 {
            // Ad-hoc shift to break symmetric stagnation (e.g. nilpotent shifts).
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };

        qr_step(&mut h, lo, hi, shift);
    }

    Ok(out.into_iter().map(|z| z * scale).collect())
}

/// Reduces to upper Hessenberg form by Givens similarity rotations.
fn hessenberg_in_place(h: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    for col in 0..n.saturating_sub(2) {
        for row in (col + 2..n).rev() {
            let (c, s) = givens(h[(row - 1, col)], h[(row, col)]);
            if s.norm() == 0.0 {
                continue;
            }
            rotate_rows(h, row - 1, row, c, s, col, n);
            rotate_cols(h, row - 1, row, c, s, 0, n);
        }
    }
}

/// One explicit single-shift QR step on the active window [lo, hi].
fn qr_step(h: &mut DMatrix<Complex64>, lo: usize, hi: usize, shift: Complex64) {
    let n = h.ncols();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    // QR by Givens on the subdiagonal, then RQ.
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        rotate_rows(h, i, i + 1, c, s, i, n);
        h[(i + 1, i)] = Complex64::new(0.0, 0.0);
        rots.push((i, c, s));
    }
    for &(i, c, s) in &rots {
        rotate_cols(h, i, i + 1, c, s, lo.saturating_sub(0), (i + 2).min(n));
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Givens pair (c real, s complex) with  [c, s; -conj(s), c]^H [a; b] = [r; 0].
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let an = a.norm();
    let r = (an * an + bn * bn).sqrt();
    if an == 0.0 {
        // Pure swap with phase.
        return (0.0, (b / bn).conj());
    }
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Applies the rotation to rows (i, j) over columns [from, to).
fn rotate_rows(h: &mut DMatrix<Complex64>, i: usize, j: usize, c: f64, s: Complex64, from: usize, to: usize) {
    for col in from..to {
        let x = h[(i, col)];
        let y = h[(j, col)];
        h[(i, col)] = x * c + y * s;
        h[(j, col)] = -x * s.conj() + y * c;
    }
}

/// Applies the conjugate rotation to columns (i, j) over rows [from, to).
fn rotate_cols(h: &mut DMatrix<Complex64>, i: usize, j: usize, c: f64, s: Complex64, from: usize, to: usize) {
    for row in from..to {
        let x = h[(row, i)];
        let y = h[(row, j)];
        h[(row, i)] = x * c + y * s.conj();
        h[(row, j)] = -x * s + y * c;
    }
}

/// Eigenvalue of the trailing 2x2 closest to the corner entry.
fn wilkinson_shift(h: &DMatrix<Complex64>, hi: usize) -> Complex64 {
    let (l1, l2) = eig2(
        h[(hi - 1, hi - 1)],
        h[(hi - 1, hi)],
        h[(hi, hi - 1)],
        h[(hi, hi)],
    );
    let corner = h[(hi, hi)];
    if (l1 - corner).norm() <= (l2 - corner).norm() {
        l1
    } else {
        l2
    }
}

/// Closed-form eigenvalues of [[a, b], [c, d]].
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = (a + d) * Complex64::new(0.5, 0.0);
    let diff = (a - d) * Complex64::new(0.5, 0.0);
    let disc = (diff * diff + b * c).sqrt();
    (tr + disc, tr - disc)
}
