//! Koszul complex of a tuple: exterior basis enumeration, boundary maps,
//! Laplacians, the chain property, and the recursive block split of the
//! boundary against the leading subtuple.
//!
//! Basis convention ("split order"): within the k-forms on n generators,
//! subsets not containing n come first, each half ordered by the same rule
//! recursively. Under this order the boundary of an n-tuple is literally
//! the block matrix [[F_k, (-1)^{k+1} diag(T_n)], [0, F_{k-1}]] over the
//! boundaries F of the leading (n-1)-subtuple.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tuple::OperatorTuple;

/// Default cap on dense assembly height, overridable through the
/// `KOSZULSPEC_MAX_DIM` environment variable.
pub const DEFAULT_MAX_ASSEMBLY_ROWS: usize = 4096;

/// Ordered basis of the k-forms on n generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorBasis {
    pub n: usize,
    pub k: usize,
    /// Each subset is ascending, elements in 1..=n, in split order.
    pub subsets: Vec<Vec<usize>>,
}

/// Boundary maps and Laplacians of a tuple's Koszul complex.
#[derive(Debug, Clone)]
pub struct KoszulComplex {
    pub tuple: OperatorTuple,
    /// `boundaries[k-1]` is `D_k` for k = 1..=n.
    pub boundaries: Vec<ComplexMatrix>,
    /// `laplacians[k]` is `D_k* D_k + D_{k+1} D_{k+1}*` for k = 0..=n.
    pub laplacians: Vec<ComplexMatrix>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn split_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if k > n {
        return vec![];
    }
    let mut out = split_subsets(n - 1, k);
    for mut s in split_subsets(n - 1, k - 1) {
        s.push(n);
        out.push(s);
    }
    out
}

/// Enumerates the C(n, k) basis subsets in split order.
pub fn enumerate_basis(n: usize, k: usize) -> Result<ExteriorBasis> {
    if n == 0 {
        return Err(Error::Spec("basis needs at least one generator".into()));
    }
    if k > n {
        return Err(Error::Spec(format!("k = {k} out of range for n = {n}")));
    }
    let subsets = split_subsets(n, k);
    debug_assert_eq!(subsets.len(), binomial(n, k));
    Ok(ExteriorBasis { n, k, subsets })
}

fn max_assembly_rows() -> usize {
    std::env::var("KOSZULSPEC_MAX_DIM")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(DEFAULT_MAX_ASSEMBLY_ROWS)
}

fn guard_assembly(rows: usize, cols: usize) -> Result<()> {
    let cap = max_assembly_rows();
    if rows.max(cols) > cap {
        return Err(Error::SizeGuard(format!(
            "assembly of {rows}x{cols} exceeds the cap of {cap} (KOSZULSPEC_MAX_DIM)"
        )));
    }
    Ok(())
}

/// The boundary `D_k : E_k -> E_{k-1}` of the tuple, 1 <= k <= n.
///
/// Block (S', S) equals `(-1)^{i-1} T_{j_i}` when `S' = S \ {j_i}` with
/// `j_i` the i-th smallest element of S, and zero otherwise.
pub fn boundary_map(t: &OperatorTuple, k: usize) -> Result<ComplexMatrix> {
    let n = t.len();
    if k == 0 || k > n {
        return Err(Error::Spec(format!("boundary index k = {k} out of 1..={n}")));
    }
    let d = t.dim();
    let domain = enumerate_basis(n, k)?;
    let codomain = enumerate_basis(n, k - 1)?;
    guard_assembly(codomain.subsets.len() * d, domain.subsets.len() * d)?;

    let mut row_of: std::collections::HashMap<&[usize], usize> = std::collections::HashMap::new();
    for (r, s) in codomain.subsets.iter().enumerate() {
        row_of.insert(s.as_slice(), r);
    }

    let mut placements: Vec<Vec<Option<(f64, usize)>>> =
        vec![vec![None; domain.subsets.len()]; codomain.subsets.len()];
    for (col, s) in domain.subsets.iter().enumerate() {
        for (i, &j) in s.iter().enumerate() {
            let mut reduced = s.clone();
            reduced.remove(i);
            let row = row_of[reduced.as_slice()];
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            placements[row][col] = Some((sign, j - 1));
        }
    }

    Ok(ComplexMatrix::from_block_grid(
        codomain.subsets.len(),
        domain.subsets.len(),
        d,
        |bi, bj| {
            placements[bi][bj].map(|(sign, leg)| {
                if sign > 0.0 {
                    t.leg(leg).clone()
                } else {
                    t.leg(leg).scale(Complex64::new(-1.0, 0.0))
                }
            })
        },
    ))
}

/// The Laplacian `D_k* D_k + D_{k+1} D_{k+1}*` with the conventions
/// `D_0 = 0` and `D_{n+1} = 0`; Hermitian PSD of size C(n, k) * d.
pub fn laplacian(t: &OperatorTuple, k: usize) -> Result<ComplexMatrix> {
    let n = t.len();
    if k > n {
        return Err(Error::Spec(format!("laplacian index k = {k} out of 0..={n}")));
    }
    let d = t.dim();
    let size = binomial(n, k) * d;
    guard_assembly(size, size)?;
    let mut acc = ComplexMatrix::zeros(size, size);
    if k >= 1 {
        let dk = boundary_map(t, k)?;
        acc = acc.add(&dk.adjoint().mul(&dk)?)?;
    }
    if k + 1 <= n {
        let dk1 = boundary_map(t, k + 1)?;
        acc = acc.add(&dk1.mul(&dk1.adjoint())?)?;
    }
    Ok(acc)
}

/// The stacked boundary block `[D_k ; D_{k+1}*]` whose Gram matrix is the
/// k-th Laplacian; its smallest singular value is the linear-scale
/// singularity residual used by the spectrum module.
pub fn combined_boundary(t: &OperatorTuple, k: usize) -> Result<ComplexMatrix> {
    let n = t.len();
    if k > n {
        return Err(Error::Spec(format!("index k = {k} out of 0..={n}")));
    }
    let d = t.dim();
    guard_assembly(binomial(n, k) * d, binomial(n, k) * d)?;
    let mut blocks: Vec<ComplexMatrix> = Vec::with_capacity(2);
    if k >= 1 {
        blocks.push(boundary_map(t, k)?);
    }
    if k + 1 <= n {
        blocks.push(boundary_map(t, k + 1)?.adjoint());
    }
    let refs: Vec<&ComplexMatrix> = blocks.iter().collect();
    ComplexMatrix::vstack(&refs)
}

/// `max_k ||D_k D_{k+1}||`: zero within roundoff exactly when the tuple
/// commutes.
pub fn chain_defect(t: &OperatorTuple) -> f64 {
    let n = t.len();
    let mut worst = 0.0f64;
    for k in 1..n {
        let dk = boundary_map(t, k).expect("k in range");
        let dk1 = boundary_map(t, k + 1).expect("k in range");
        worst = worst.max(dk.mul(&dk1).unwrap().operator_norm());
    }
    worst
}

/// Rebuilds `D_k` of an n-tuple as the block matrix
/// `[[F_k, (-1)^{k+1} diag(T_n)], [0, F_{k-1}]]` over the boundaries F of
/// the leading (n-1)-subtuple and returns `||D_k - assembled||`.
///
/// The identity is combinatorial, so the defect is exactly zero whenever
/// the basis convention is honored.
pub fn recursive_split_check(t: &OperatorTuple, k: usize) -> Result<f64> {
    let n = t.len();
    if n < 2 {
        return Err(Error::NotApplicable(
            "the recursive split needs at least a pair".into(),
        ));
    }
    if k == 0 || k >= n {
        return Err(Error::Spec(format!("split index k = {k} out of 1..={}", n - 1)));
    }
    let d = t.dim();
    let sub = t.leading_subtuple()?;
    let dk = boundary_map(t, k)?;

    // Sizes over the (n-1)-generator bases.
    let top_rows = binomial(n - 1, k - 1);
    let top_cols = binomial(n - 1, k);

    let f_k = if k <= n - 1 {
        Some(boundary_map(&sub, k)?)
    } else {
        None
    };
    let f_km1 = if k >= 2 {
        Some(boundary_map(&sub, k - 1)?)
    } else {
        None
    };

    let sign = if k % 2 == 0 { -1.0 } else { 1.0 }; // (-1)^{k+1}
    let tn = t.leg(n - 1);
    let tn_signed = if sign > 0.0 {
        tn.clone()
    } else {
        tn.scale(Complex64::new(-1.0, 0.0))
    };

    let rows = dk.rows() / d;
    let cols = dk.cols() / d;
    let assembled = ComplexMatrix::from_block_grid(rows, cols, d, |bi, bj| {
        let in_top_row = bi < top_rows;
        let in_top_col = bj < top_cols;
        match (in_top_row, in_top_col) {
            (true, true) => f_k.as_ref().map(|f| f.block(bi, bj, d)),
            (true, false) => {
                // (-1)^{k+1} diag(T_n) pairs E_{k-1}^{n-1} rows with the
                // "contains n" columns in matching order.
                if bi == bj - top_cols {
                    Some(tn_signed.clone())
                } else {
                    None
                }
            }
            (false, true) => None,
            (false, false) => f_km1
                .as_ref()
                .map(|f| f.block(bi - top_rows, bj - top_cols, d)),
        }
    });
    debug_assert_eq!(assembled.rows(), dk.rows());
    debug_assert_eq!(assembled.cols(), dk.cols());

    Ok(dk.sub(&assembled)?.operator_norm())
}

impl KoszulComplex {
    /// Assembles all boundaries and Laplacians of the tuple.
    pub fn new(tuple: &OperatorTuple) -> Result<Self> {
        let n = tuple.len();
        let boundaries = (1..=n)
            .map(|k| boundary_map(tuple, k))
            .collect::<Result<Vec<_>>>()?;
        let laplacians = (0..=n)
            .map(|k| laplacian(tuple, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tuple: tuple.clone(),
            boundaries,
            laplacians,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{random_commuting_normal_tuple, separated_joint_spec, conjugated_normal_tuple};
    use crate::matrix::hermitian_eigen;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn jordan() -> ComplexMatrix {
        ComplexMatrix::from_rows(2, 2, vec![re(0.), re(1.), re(0.), re(0.)]).unwrap()
    }

    #[test]
    fn basis_enumeration_examples() {
        assert_eq!(
            enumerate_basis(2, 1).unwrap().subsets,
            vec![vec![1], vec![2]]
        );
        assert_eq!(
            enumerate_basis(3, 2).unwrap().subsets,
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(enumerate_basis(4, 0).unwrap().subsets, vec![Vec::<usize>::new()]);
        assert!(enumerate_basis(3, 4).is_err());
    }

    #[test]
    fn basis_split_order_property() {
        // Subsets without n come first; both halves follow the same rule.
        for n in 1..=6 {
            for k in 0..=n {
                let b = enumerate_basis(n, k).unwrap();
                assert_eq!(b.subsets.len(), binomial(n, k));
                let without: Vec<_> = b.subsets.iter().filter(|s| !s.contains(&n)).collect();
                let cut = without.len();
                assert!(b.subsets[..cut].iter().all(|s| !s.contains(&n)));
                assert!(b.subsets[cut..].iter().all(|s| s.contains(&n)));
            }
        }
    }

    #[test]
    fn pair_boundaries_match_the_block_displays() {
        // D_1 = [T_1  T_2], D_2 = [-T_2 ; T_1].
        let t1 = ComplexMatrix::diagonal(&[re(1.), re(2.)]);
        let t2 = ComplexMatrix::diagonal(&[re(3.), re(4.)]);
        let t = OperatorTuple::new(vec![t1.clone(), t2.clone()]).unwrap();
        let d1 = boundary_map(&t, 1).unwrap();
        assert_eq!(d1.block(0, 0, 2), t1);
        assert_eq!(d1.block(0, 1, 2), t2);
        let d2 = boundary_map(&t, 2).unwrap();
        assert_eq!(d2.block(0, 0, 2), t2.scale(re(-1.)));
        assert_eq!(d2.block(1, 0, 2), t1);
    }

    #[test]
    fn single_operator_boundary_is_the_operator() {
        let a = ComplexMatrix::diagonal(&[re(5.), re(7.)]);
        let t = OperatorTuple::new(vec![a.clone()]).unwrap();
        assert_eq!(boundary_map(&t, 1).unwrap(), a);
        assert_eq!(chain_defect(&t), 0.0);
    }

    #[test]
    fn triple_top_boundary_signs() {
        // D_3 on e_1^e_2^e_3: deleting e_1, e_2, e_3 lands on rows
        // {2,3}, {1,3}, {1,2} with signs +, -, +; in split order the rows
        // are [{1,2}, {1,3}, {2,3}], so the column reads [T_3; -T_2; T_1].
        let legs: Vec<ComplexMatrix> = (1..=3)
            .map(|i| ComplexMatrix::diagonal(&[re(i as f64)]))
            .collect();
        let t = OperatorTuple::new(legs.clone()).unwrap();
        let d3 = boundary_map(&t, 3).unwrap();
        assert_eq!(d3.block(0, 0, 1), legs[2]);
        assert_eq!(d3.block(1, 0, 1), legs[1].scale(re(-1.)));
        assert_eq!(d3.block(2, 0, 1), legs[0]);
    }

    #[test]
    fn boundary_matches_brute_force_sign_expansion() {
        // Independent oracle: expand D_k(x (x) e_S) by the sign formula over
        // unit vectors and compare entry by entry.
        let t = random_commuting_normal_tuple(3, 2, 5);
        let d = t.dim();
        for k in 1..=3usize {
            let dk = boundary_map(&t, k).unwrap();
            let domain = enumerate_basis(3, k).unwrap();
            let codomain = enumerate_basis(3, k - 1).unwrap();
            let mut acc = nalgebra::DMatrix::<Complex64>::zeros(
                codomain.subsets.len() * d,
                domain.subsets.len() * d,
            );
            for (col, s) in domain.subsets.iter().enumerate() {
                for (i, &j) in s.iter().enumerate() {
                    let mut rem = s.clone();
                    rem.remove(i);
                    let row = codomain.subsets.iter().position(|c| *c == rem).unwrap();
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    for a in 0..d {
                        for b in 0..d {
                            acc[(row * d + a, col * d + b)] +=
                                t.leg(j - 1).get(a, b) * re(sign);
                        }
                    }
                }
            }
            for i in 0..acc.nrows() {
                for j in 0..acc.ncols() {
                    assert!(
                        (dk.get(i, j) - acc[(i, j)]).norm() == 0.0,
                        "entry ({i},{j}) differs at k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn laplacian_conventions_at_the_ends() {
        let t = random_commuting_normal_tuple(2, 3, 9);
        let d = t.dim();
        // k = 0: sum of T_j T_j*.
        let l0 = laplacian(&t, 0).unwrap();
        let mut expect = ComplexMatrix::zeros(d, d);
        for leg in t.legs() {
            expect = expect.add(&leg.mul(&leg.adjoint()).unwrap()).unwrap();
        }
        assert!(l0.max_abs_diff(&expect) < 1e-12);
        // k = n: sum of T_j* T_j.
        let ln = laplacian(&t, 2).unwrap();
        let mut expect = ComplexMatrix::zeros(d, d);
        for leg in t.legs() {
            expect = expect.add(&leg.adjoint().mul(leg).unwrap()).unwrap();
        }
        assert!(ln.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn doubly_commuting_pair_laplacian_is_block_diagonal() {
        let spec = separated_joint_spec(2, 3, 1.0, 3);
        let t = conjugated_normal_tuple(&spec, 3);
        let d = t.dim();
        let l1 = laplacian(&t, 1).unwrap();
        // Off-diagonal blocks vanish; diagonal blocks are the two mixed sums.
        assert!(l1.block(0, 1, d).operator_norm() < 1e-12);
        assert!(l1.block(1, 0, d).operator_norm() < 1e-12);
        let t1 = t.leg(0);
        let t2 = t.leg(1);
        let b00 = t1.adjoint().mul(t1).unwrap().add(&t2.mul(&t2.adjoint()).unwrap()).unwrap();
        let b11 = t1.mul(&t1.adjoint()).unwrap().add(&t2.adjoint().mul(t2).unwrap()).unwrap();
        assert!(l1.block(0, 0, d).max_abs_diff(&b00) < 1e-12);
        assert!(l1.block(1, 1, d).max_abs_diff(&b11) < 1e-12);
    }

    #[test]
    fn laplacians_are_hermitian_psd() {
        let t = random_commuting_normal_tuple(3, 2, 17);
        for k in 0..=3 {
            let l = laplacian(&t, k).unwrap();
            assert!(l.hermitian_defect() < 1e-10);
            let (vals, _) = hermitian_eigen(&l).unwrap();
            assert!(vals[0] > -1e-10);
        }
    }

    #[test]
    fn chain_defect_detects_noncommutation() {
        let t = random_commuting_normal_tuple(3, 4, 2);
        let norm = t.max_operator_norm();
        assert!(chain_defect(&t) <= 1e-10 * (1.0 + norm) * (1.0 + norm));

        let j = jordan();
        let bad = OperatorTuple::new_unchecked(vec![j.clone(), j.adjoint()]).unwrap();
        // D_1 D_2 = -[T_1, T_2], and ||[J, J*]|| = 1.
        assert!((chain_defect(&bad) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_characteristic_bookkeeping() {
        for n in 1..=6usize {
            let d = 3usize;
            let signed: i64 = (0..=n)
                .map(|k| {
                    let c = (binomial(n, k) * d) as i64;
                    if k % 2 == 0 { c } else { -c }
                })
                .sum();
            assert_eq!(signed, 0);
        }
    }

    #[test]
    fn recursive_split_is_exact() {
        for (n, seed) in [(2usize, 21u64), (3, 22), (4, 23)] {
            let t = random_commuting_normal_tuple(n, 2, seed);
            for k in 1..n {
                let defect = recursive_split_check(&t, k).unwrap();
                assert_eq!(defect, 0.0, "split defect at n={n}, k={k}");
            }
        }
        let single = OperatorTuple::new(vec![ComplexMatrix::identity(2)]).unwrap();
        assert!(matches!(
            recursive_split_check(&single, 1),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn split_block_scales_linearly_in_last_leg() {
        let t = random_commuting_normal_tuple(2, 2, 31);
        let d1 = boundary_map(&t, 1).unwrap();
        let scaled = OperatorTuple::new_unchecked(vec![
            t.leg(0).clone(),
            t.leg(1).scale(re(3.0)),
        ])
        .unwrap();
        let d1s = boundary_map(&scaled, 1).unwrap();
        let d = t.dim();
        assert_eq!(d1s.block(0, 0, d), d1.block(0, 0, d));
        assert!(d1s.block(0, 1, d).max_abs_diff(&d1.block(0, 1, d).scale(re(3.0))) < 1e-12);
    }

    #[test]
    fn size_guard_trips() {
        let t = random_commuting_normal_tuple(2, 2, 1);
        std::env::set_var("KOSZULSPEC_MAX_DIM", "3");
        let res = boundary_map(&t, 1);
        std::env::remove_var("KOSZULSPEC_MAX_DIM");
        assert!(matches!(res, Err(Error::SizeGuard(_))));
    }
}
