//! Commuting n-tuples of matrices and their operator-theoretic
//! classification: commutation defects, p-/log-hyponormality, normality.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigen, hermitian_function, min_singular_value, ComplexMatrix, BASE_TOL};
use crate::scalar::ScalarFunction;

/// A tuple `T = (T_1, ..., T_n)` of square matrices on a common space.
///
/// The checked constructor enforces pairwise commutation within a tolerance
/// quadratic in the operator norms; `new_unchecked` exists for negative
/// tests and for internal shifts that preserve commutation exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TupleRepr", into = "TupleRepr")]
pub struct OperatorTuple {
    n: usize,
    dim: usize,
    matrices: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct TupleRepr {
    n: usize,
    dim: usize,
    matrices: Vec<ComplexMatrix>,
}

impl From<OperatorTuple> for TupleRepr {
    fn from(t: OperatorTuple) -> Self {
        TupleRepr {
            n: t.n,
            dim: t.dim,
            matrices: t.matrices,
        }
    }
}

impl TryFrom<TupleRepr> for OperatorTuple {
    type Error = Error;

    fn try_from(r: TupleRepr) -> Result<Self> {
        if r.matrices.len() != r.n {
            return Err(Error::Spec(format!(
                "tuple declares n={} but carries {} matrices",
                r.n,
                r.matrices.len()
            )));
        }
        if r.matrices.iter().any(|m| m.rows() != r.dim || m.cols() != r.dim) {
            return Err(Error::Shape(format!(
                "every tuple entry must be a {0}x{0} matrix",
                r.dim
            )));
        }
        OperatorTuple::new(r.matrices)
    }
}

/// Default commutation tolerance for operators of max norm `s`.
pub fn commutation_tolerance(max_norm: f64) -> f64 {
    BASE_TOL * (1.0 + max_norm) * (1.0 + max_norm)
}

impl OperatorTuple {
    /// Builds a tuple, rejecting non-commuting entries.
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let t = Self::new_unchecked(matrices)?;
        let (comm, _) = t.commutation_defects();
        let tol = commutation_tolerance(t.max_operator_norm());
        if comm > tol {
            return Err(Error::Spec(format!(
                "tuple does not commute: defect {comm:.3e} exceeds tolerance {tol:.3e}"
            )));
        }
        Ok(t)
    }

    /// Builds a tuple without the commutation check.
    pub fn new_unchecked(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Spec("a tuple needs at least one operator".into()));
        }
        let dim = matrices[0].rows();
        if matrices.iter().any(|m| !m.is_square() || m.rows() != dim) {
            return Err(Error::Shape(
                "all tuple entries must be square matrices of the same dimension".into(),
            ));
        }
        Ok(Self {
            n: matrices.len(),
            dim,
            matrices,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leg(&self, j: usize) -> &ComplexMatrix {
        &self.matrices[j]
    }

    pub fn legs(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn max_operator_norm(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| m.operator_norm())
            .fold(0.0, f64::max)
    }

    /// The shifted tuple `T - z`; commutation is preserved exactly.
    pub fn shifted(&self, z: &[Complex64]) -> Result<OperatorTuple> {
        if z.len() != self.n {
            return Err(Error::Dimension(format!(
                "shift point has length {}, tuple has n={}",
                z.len(),
                self.n
            )));
        }
        let shifted = self
            .matrices
            .iter()
            .zip(z)
            .map(|(m, &w)| m.shift(w))
            .collect::<Result<Vec<_>>>()?;
        OperatorTuple::new_unchecked(shifted)
    }

    /// The adjoint tuple `(T_1*, ..., T_n*)`.
    pub fn adjoint(&self) -> OperatorTuple {
        OperatorTuple::new_unchecked(self.matrices.iter().map(|m| m.adjoint()).collect())
            .expect("adjoint preserves shape")
    }

    /// The leading (n-1)-subtuple, used by the recursive split check.
    pub fn leading_subtuple(&self) -> Result<OperatorTuple> {
        if self.n < 2 {
            return Err(Error::NotApplicable("subtuple of a single operator".into()));
        }
        OperatorTuple::new_unchecked(self.matrices[..self.n - 1].to_vec())
    }

    /// `(max ||[T_i, T_j]||, max ||T_i* T_j - T_j T_i*||)` in operator norm.
    pub fn commutation_defects(&self) -> (f64, f64) {
        let mut comm = 0.0f64;
        let mut double = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let ti = &self.matrices[i];
                let tj = &self.matrices[j];
                if i < j {
                    let c = ti.mul(tj).unwrap().sub(&tj.mul(ti).unwrap()).unwrap();
                    comm = comm.max(c.operator_norm());
                }
                let d = ti
                    .adjoint()
                    .mul(tj)
                    .unwrap()
                    .sub(&tj.mul(&ti.adjoint()).unwrap())
                    .unwrap();
                double = double.max(d.operator_norm());
            }
        }
        (comm, double)
    }

    /// True when all cross-adjoint commutators vanish within `tol`.
    pub fn is_doubly_commuting(&self, tol: f64) -> bool {
        let (comm, double) = self.commutation_defects();
        comm <= tol && double <= tol
    }
}

/// A predicate outcome carrying its quantitative margin (the least
/// eigenvalue of the defining difference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub margin: f64,
}

/// Outcome of the log-hyponormality test; singular operators fail the
/// invertibility hypothesis rather than the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LogHyponormality {
    Checked { holds: bool, margin: f64 },
    NotApplicable,
}

impl LogHyponormality {
    pub fn holds(&self) -> bool {
        matches!(self, LogHyponormality::Checked { holds: true, .. })
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, LogHyponormality::Checked { .. })
    }
}

/// Checks `(A*A)^p >= (AA*)^p` in the positive semidefinite order.
///
/// The margin is the least eigenvalue of the difference; it counts as
/// nonnegative down to `-1e-9 (1 + ||A||^{2p})` since the functional
/// calculus roundoff grows with the power.
pub fn is_p_hyponormal(a: &ComplexMatrix, p: f64) -> Result<Verdict> {
    if !a.is_square() {
        return Err(Error::Shape("p-hyponormality needs a square matrix".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Spec(format!("p must be positive, got {p}")));
    }
    let f = ScalarFunction::power(p);
    let lhs = hermitian_function(&a.adjoint().mul(a)?, &f)?;
    let rhs = hermitian_function(&a.mul(&a.adjoint())?, &f)?;
    let diff = lhs.sub(&rhs)?;
    let (vals, _) = hermitian_eigen(&diff)?;
    let margin = vals[0];
    let tol = 1e-9 * (1.0 + a.operator_norm().powf(2.0 * p));
    Ok(Verdict {
        holds: margin >= -tol,
        margin,
    })
}

/// Checks invertibility plus `log|A| >= log|A*|`.
pub fn is_log_hyponormal(a: &ComplexMatrix) -> Result<LogHyponormality> {
    if !a.is_square() {
        return Err(Error::Shape("log-hyponormality needs a square matrix".into()));
    }
    let smin = min_singular_value(a)?;
    if smin <= BASE_TOL * (1.0 + a.operator_norm()) {
        return Ok(LogHyponormality::NotApplicable);
    }
    // log|A| = (1/2) log(A*A), and likewise for A*.
    let log_abs = |h: &ComplexMatrix| -> Result<ComplexMatrix> {
        let logm = hermitian_function(h, &ScalarFunction::Log)?;
        Ok(logm.scale(Complex64::new(0.5, 0.0)))
    };
    let lhs = log_abs(&a.adjoint().mul(a)?)?;
    let rhs = log_abs(&a.mul(&a.adjoint())?)?;
    let diff = lhs.sub(&rhs)?;
    let (vals, _) = hermitian_eigen(&diff)?;
    let margin = vals[0];
    let scale = 1.0 + lhs.operator_norm().max(rhs.operator_norm());
    Ok(LogHyponormality::Checked {
        holds: margin >= -1e-9 * scale,
        margin,
    })
}

/// Condition (1) at desk scale: every approximate eigenvector of `A` is an
/// approximate eigenvector of `A*`.
///
/// In finite dimension normality is both necessary and sufficient for this
/// (hyponormal implies it, and finite-dimensional hyponormal matrices are
/// normal), so the test is a normality check.
pub fn satisfies_condition1(a: &ComplexMatrix) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::Shape("condition (1) needs a square matrix".into()));
    }
    Ok(normality_defect(a) <= BASE_TOL * (1.0 + a.operator_norm().powi(2)))
}

/// Simultaneously diagonalizes a commuting tuple of normal matrices.
///
/// Returns a unitary `Q` and the joint values `w^(i)` with
/// `Q* T_j Q = diag(w_j^(i))`. Exactly diagonal tuples are passed through
/// untouched (`Q = I`), so their joint values are read off bit-exactly;
/// otherwise eigenspaces are refined one Hermitian component at a time.
pub fn joint_diagonalize(t: &OperatorTuple) -> Result<(ComplexMatrix, Vec<Vec<Complex64>>)> {
    for (j, leg) in t.legs().iter().enumerate() {
        if !satisfies_condition1(leg)? {
            return Err(Error::Hypothesis(format!(
                "joint diagonalization needs normal legs; operator {} is not normal",
                j + 1
            )));
        }
    }
    let tol_c = commutation_tolerance(t.max_operator_norm());
    let (comm, _) = t.commutation_defects();
    if comm > tol_c {
        return Err(Error::Hypothesis(
            "joint diagonalization needs a commuting tuple".into(),
        ));
    }
    let d = t.dim();

    let exactly_diagonal = t.legs().iter().all(|m| {
        (0..d).all(|i| (0..d).all(|j| i == j || m.get(i, j) == Complex64::new(0.0, 0.0)))
    });
    let q = if exactly_diagonal {
        ComplexMatrix::identity(d)
    } else {
        let mut q = ComplexMatrix::identity(d);
        let mut blocks: Vec<(usize, usize)> = vec![(0, d)];
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, -0.5);
        let mut hermitians = Vec::with_capacity(2 * t.len());
        for leg in t.legs() {
            hermitians.push(leg.add(&leg.adjoint())?.scale(half));
            hermitians.push(leg.sub(&leg.adjoint())?.scale(half_i));
        }
        for h in &hermitians {
            let mut next_blocks = Vec::new();
            for &(start, len) in &blocks {
                if len == 1 {
                    next_blocks.push((start, len));
                    continue;
                }
                // Restrict h to the current invariant block of Q.
                let qb = ComplexMatrix::from_fn(d, len, |r, c| q.get(r, start + c));
                let restricted = qb.adjoint().mul(h)?.mul(&qb)?;
                let (vals, vecs) = hermitian_eigen(&restricted)?;
                let rotated = qb.mul(&vecs)?;
                let mut qn = q.as_na().clone();
                for r in 0..d {
                    for c in 0..len {
                        qn[(r, start + c)] = rotated.get(r, c);
                    }
                }
                q = ComplexMatrix::from_na(qn);
                // Split by eigenvalue clusters.
                let scale = 1.0 + vals.iter().cloned().fold(0.0f64, |a, v| a.max(v.abs()));
                let gap = 1e-8 * scale;
                let mut sub_start = 0usize;
                for i in 1..len {
                    if vals[i] - vals[i - 1] > gap {
                        next_blocks.push((start + sub_start, i - sub_start));
                        sub_start = i;
                    }
                }
                next_blocks.push((start + sub_start, len - sub_start));
            }
            blocks = next_blocks;
        }
        q
    };

    let qh = q.adjoint();
    let mut joint_values = vec![Vec::with_capacity(t.len()); d];
    for leg in t.legs() {
        let diag = qh.mul(leg)?.mul(&q)?;
        for (i, row) in joint_values.iter_mut().enumerate() {
            row.push(diag.get(i, i));
        }
    }
    Ok((q, joint_values))
}

/// `||A*A - AA*||` in operator norm.
pub fn normality_defect(a: &ComplexMatrix) -> f64 {
    a.adjoint()
        .mul(a)
        .unwrap()
        .sub(&a.mul(&a.adjoint()).unwrap())
        .unwrap()
        .operator_norm()
}

/// Per-operator classification record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorReport {
    pub is_normal: bool,
    pub p_hyponormal_for: Vec<PVerdict>,
    pub is_log_hyponormal: LogHyponormality,
    pub satisfies_condition1: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PVerdict {
    pub p: f64,
    pub holds: bool,
    pub margin: f64,
}

/// Aggregated classification of a tuple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub commuting_defect: f64,
    pub double_commuting_defect: f64,
    pub per_operator: Vec<OperatorReport>,
}

/// Classifies every leg of the tuple for each requested `p`.
pub fn classify(t: &OperatorTuple, ps: &[f64]) -> Result<ClassificationReport> {
    if ps.is_empty() {
        return Err(Error::Spec("classification needs at least one p".into()));
    }
    if ps.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::Spec("each p must lie in (0, 1]".into()));
    }
    let (commuting_defect, double_commuting_defect) = t.commutation_defects();
    let mut per_operator = Vec::with_capacity(t.len());
    for a in t.legs() {
        let mut p_hyponormal_for = Vec::with_capacity(ps.len());
        for &p in ps {
            let v = is_p_hyponormal(a, p)?;
            p_hyponormal_for.push(PVerdict {
                p,
                holds: v.holds,
                margin: v.margin,
            });
        }
        per_operator.push(OperatorReport {
            is_normal: normality_defect(a) <= BASE_TOL * (1.0 + a.operator_norm().powi(2)),
            p_hyponormal_for,
            is_log_hyponormal: is_log_hyponormal(a)?,
            satisfies_condition1: satisfies_condition1(a)?,
        });
    }
    Ok(ClassificationReport {
        commuting_defect,
        double_commuting_defect,
        per_operator,
    })
}
