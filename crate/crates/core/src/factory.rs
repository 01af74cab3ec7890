//! Deterministic generators for test tuples: joint-diagonal tuples with a
//! known Taylor spectrum, their seeded unitary conjugations, tensor-leg
//! doubly commuting pairs, and truncated weighted shifts as the standard
//! negative example. Every "random" instance is a pure function of
//! (spec, seed).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tuple::OperatorTuple;

/// Joint diagonal data: `joint_values[i]` is the i-th diagonal entry across
/// the tuple, i.e. a point of C^n, so the produced tuple has Taylor
/// spectrum exactly this set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiagonalSpec {
    pub dim: usize,
    pub joint_values: Vec<Vec<Complex64>>,
}

impl JointDiagonalSpec {
    pub fn new(dim: usize, joint_values: Vec<Vec<Complex64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Spec("dimension must be positive".into()));
        }
        if joint_values.len() != dim {
            return Err(Error::Spec(format!(
                "expected {} joint values, got {}",
                dim,
                joint_values.len()
            )));
        }
        let n = joint_values.first().map(|v| v.len()).unwrap_or(0);
        if n == 0 || joint_values.iter().any(|v| v.len() != n) {
            return Err(Error::Spec(
                "joint values must be nonempty points of a common C^n".into(),
            ));
        }
        Ok(Self { dim, joint_values })
    }

    pub fn tuple_len(&self) -> usize {
        self.joint_values[0].len()
    }
}

/// `(diag of first coordinates, ..., diag of n-th coordinates)`.
pub fn diagonal_tuple(spec: &JointDiagonalSpec) -> OperatorTuple {
    let n = spec.tuple_len();
    let legs = (0..n)
        .map(|j| {
            let diag: Vec<Complex64> = spec.joint_values.iter().map(|v| v[j]).collect();
            ComplexMatrix::diagonal(&diag)
        })
        .collect();
    OperatorTuple::new_unchecked(legs).expect("diagonal legs are square")
}

/// Haar-distributed unitary from a seeded complex Gaussian via QR with the
/// R-diagonal phases folded into Q.
pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<Complex64> = (0..dim)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    let fixed = DMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j]);
    ComplexMatrix::from_na(fixed)
}

/// `Q D_j Q*` for a seeded Haar unitary `Q`: a doubly commuting normal
/// tuple with the same joint spectrum as the diagonal one.
pub fn conjugated_normal_tuple(spec: &JointDiagonalSpec, seed: u64) -> OperatorTuple {
    let q = haar_unitary(spec.dim, seed);
    let qh = q.adjoint();
    let legs = diagonal_tuple(spec)
        .legs()
        .iter()
        .map(|d| q.mul(d).unwrap().mul(&qh).unwrap())
        .collect();
    OperatorTuple::new_unchecked(legs).expect("conjugation preserves shape")
}

/// `(A (x) I, I (x) B)`: doubly commuting by construction, with structural
/// zeros in every cross commutator.
pub fn tensor_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<OperatorTuple> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Shape("tensor legs must be square".into()));
    }
    let left = a.kron(&ComplexMatrix::identity(b.rows()));
    let right = ComplexMatrix::identity(a.rows()).kron(b);
    OperatorTuple::new_unchecked(vec![left, right])
}

/// `(d+1) x (d+1)` matrix with `weights` on the first subdiagonal.
pub fn truncated_weighted_shift(weights: &[f64]) -> Result<ComplexMatrix> {
    if weights.is_empty() {
        return Err(Error::Spec("a shift needs at least one weight".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Spec("shift weights must be positive".into()));
    }
    let d = weights.len() + 1;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j + 1 {
            Complex64::new(weights[j], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Seeded joint values with unit-lattice coordinate separation.
///
/// Coordinates of the d joint values are distinct permutation slots scaled
/// by `spacing`, so distinct values differ by at least `spacing` in every
/// coordinate and the closest pair sits at exactly `spacing * sqrt(n)`.
pub fn separated_joint_spec(n: usize, dim: usize, spacing: f64, seed: u64) -> JointDiagonalSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let mut coords: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut slots: Vec<usize> = (0..dim).collect();
        // Fisher-Yates with the seeded generator.
        for i in (1..dim).rev() {
            let j = rng.random_range(0..=i);
            slots.swap(i, j);
        }
        coords.push(slots);
    }
    // Pin the first two values to adjacent slots in every coordinate so the
    // minimal gap is exactly spacing * sqrt(n).
    if dim >= 2 {
        for axis in coords.iter_mut() {
            let pos1 = axis.iter().position(|&s| s == axis[0] + 1);
            if let Some(p) = pos1 {
                axis.swap(1, p);
            } else {
                // axis[0] was the largest slot; use the one just below it.
                let p = axis.iter().position(|&s| s + 1 == axis[0]).unwrap();
                axis.swap(1, p);
            }
        }
    }
    // One phase per coordinate axis: values of a coordinate stay collinear,
    // so per-coordinate separations are exactly radial and the closest pair
    // of joint values sits at exactly spacing * sqrt(n).
    let phases: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
    let joint_values = (0..dim)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r = 1.0 + coords[j][i] as f64 * spacing;
                    Complex64::from_polar(r, phases[j])
                })
                .collect()
        })
        .collect();
    JointDiagonalSpec { dim, joint_values }
}

/// Seeded commuting tuple: a conjugated normal tuple with generic joint
/// values in the unit-scale box.
pub fn random_commuting_normal_tuple(n: usize, dim: usize, seed: u64) -> OperatorTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545f4914f6cdd1d));
    let joint_values = (0..dim)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0))
                .collect()
        })
        .collect::<Vec<_>>();
    let spec = JointDiagonalSpec::new(dim, joint_values).unwrap();
    conjugated_normal_tuple(&spec, seed)
}
