//! Taylor-spectrum membership: singularity residuals of shifted tuples,
//! pruned grid scans over polydiscs, the Vasilescu pair test, and joint
//! approximate adjoint eigenvector extraction.
//!
//! The residual at a point is `min_k sigma_min([D_k ; D_{k+1}*])` for the
//! shifted tuple, i.e. the square root of the least eigenvalue of the k-th
//! Laplacian. It is computed from the stacked boundary block directly so
//! that exactly singular points report residuals at machine scale, and it
//! is 1-Lipschitz in the shift, which is what the scan pruning relies on.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::koszul::boundary_map;
use crate::matrix::{min_singular_value, polar_decompose, vector_norm, ComplexMatrix};
use crate::scalar::ScalarFunction;
use crate::tuple::{commutation_tolerance, satisfies_condition1, OperatorTuple};

/// A probed point of C^n with its per-Laplacian residuals.
///
/// Mapped clouds carry points without measurements, hence the options.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub coords: Vec<Complex64>,
    pub residual: Option<f64>,
    pub per_k: Option<Vec<f64>>,
}

impl SpectrumPoint {
    pub fn residual_value(&self) -> f64 {
        self.residual.unwrap_or(f64::NAN)
    }
}

/// Scan region: one disc per coordinate plus a shared per-axis resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub centers: Vec<Complex64>,
    pub radii: Vec<f64>,
    pub resolution: usize,
}

impl Region {
    pub fn new(centers: Vec<Complex64>, radii: Vec<f64>, resolution: usize) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::Spec(
                "region needs one center and one radius per coordinate".into(),
            ));
        }
        if radii.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Spec("region radii must be nonnegative".into()));
        }
        if resolution < 2 {
            return Err(Error::Spec("resolution must be at least 2".into()));
        }
        Ok(Self {
            centers,
            radii,
            resolution,
        })
    }

    /// Grid pitch along the axes of coordinate `j`.
    pub fn pitch(&self, j: usize) -> f64 {
        2.0 * self.radii[j] / (self.resolution - 1) as f64
    }

    pub fn max_pitch(&self) -> f64 {
        (0..self.radii.len()).map(|j| self.pitch(j)).fold(0.0, f64::max)
    }
}

/// Finite set of probed points, together with the threshold that defined
/// membership and the scanned region when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPointCloud {
    pub n: usize,
    pub threshold: f64,
    pub points: Vec<SpectrumPoint>,
    pub region: Option<Region>,
}

/// A unit vector approximately killed by every shifted adjoint leg.
#[derive(Debug, Clone)]
pub struct AdjointWitness {
    pub point: SpectrumPoint,
    pub vector: Vec<Complex64>,
    pub residuals: Vec<f64>,
    /// Index (in split basis order) of the block the vector came from.
    pub source_block: usize,
}

/// Default membership threshold for a tuple: quadratic in the norms since
/// the Laplacians are.
pub fn default_threshold(t: &OperatorTuple) -> f64 {
    let s = 1.0 + t.max_operator_norm();
    1e-8 * s * s
}

/// Per-Laplacian residuals of `T - z` and their minimum.
pub fn singularity_residual(t: &OperatorTuple, z: &[Complex64]) -> Result<SpectrumPoint> {
    let n = t.len();
    if z.len() != n {
        return Err(Error::Dimension(format!(
            "point has {} coordinates, tuple has n={}",
            z.len(),
            n
        )));
    }
    let shifted = t.shifted(z)?;
    let boundaries: Vec<ComplexMatrix> = (1..=n)
        .map(|k| boundary_map(&shifted, k))
        .collect::<Result<Vec<_>>>()?;
    let mut per_k = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let sigma = if k == 0 {
            min_singular_value(&boundaries[0])?
        } else if k == n {
            min_singular_value(&boundaries[n - 1])?
        } else {
            let top = &boundaries[k - 1];
            let bottom = boundaries[k].adjoint();
            min_singular_value(&ComplexMatrix::vstack(&[top, &bottom])?)?
        };
        per_k.push(sigma);
    }
    let residual = per_k.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SpectrumPoint {
        coords: z.to_vec(),
        residual: Some(residual),
        per_k: Some(per_k),
    })
}

// --- grid scan -------------------------------------------------------------

struct GridAxes {
    /// Per real axis: (origin, pitch); axes are (re, im) per coordinate.
    axes: Vec<(f64, f64)>,
    resolution: usize,
}

impl GridAxes {
    fn from_region(region: &Region) -> Self {
        let mut axes = Vec::with_capacity(region.centers.len() * 2);
        for (c, r) in region.centers.iter().zip(&region.radii) {
            let pitch = 2.0 * r / (region.resolution - 1) as f64;
            axes.push((c.re - r, pitch));
            axes.push((c.im - r, pitch));
        }
        Self {
            axes,
            resolution: region.resolution,
        }
    }

    fn point(&self, idx: &[usize]) -> Vec<Complex64> {
        idx.chunks(2)
            .enumerate()
            .map(|(j, pair)| {
                let (or, pr) = self.axes[2 * j];
                let (oi, pi) = self.axes[2 * j + 1];
                Complex64::new(or + pair[0] as f64 * pr, oi + pair[1] as f64 * pi)
            })
            .collect()
    }
}

struct ScanCtx<'a> {
    tuple: &'a OperatorTuple,
    grid: &'a GridAxes,
    threshold: f64,
}

type Member = (Vec<usize>, SpectrumPoint);

/// Recursive box pruning: evaluate the box's center node; if its residual
/// exceeds threshold + (distance to the farthest node of the box), the
/// 1-Lipschitz bound rules out every node inside.
fn scan_box(ctx: &ScanCtx<'_>, lo: &[usize], hi: &[usize]) -> Result<Vec<Member>> {
    let mid: Vec<usize> = lo.iter().zip(hi).map(|(&a, &b)| (a + b) / 2).collect();
    let z = ctx.grid.point(&mid);
    let point = singularity_residual(ctx.tuple, &z)?;
    let res = point.residual_value();

    let mut max_dist_sq = 0.0f64;
    for a in 0..lo.len() {
        let pitch = ctx.grid.axes[a].1;
        let steps = (hi[a] - mid[a]).max(mid[a] - lo[a]) as f64;
        max_dist_sq += (steps * pitch) * (steps * pitch);
    }
    let max_dist = max_dist_sq.sqrt();

    if res > ctx.threshold + max_dist {
        return Ok(vec![]);
    }
    if lo == hi {
        if res <= ctx.threshold {
            return Ok(vec![(mid, point)]);
        }
        return Ok(vec![]);
    }

    // Split the physically longest axis.
    let split_axis = (0..lo.len())
        .max_by(|&a, &b| {
            let la = (hi[a] - lo[a]) as f64 * ctx.grid.axes[a].1;
            let lb = (hi[b] - lo[b]) as f64 * ctx.grid.axes[b].1;
            la.partial_cmp(&lb).unwrap().then(b.cmp(&a))
        })
        .unwrap();
    let cut = (lo[split_axis] + hi[split_axis]) / 2;

    let mut hi_left = hi.to_vec();
    hi_left[split_axis] = cut;
    let mut lo_right = lo.to_vec();
    lo_right[split_axis] = cut + 1;

    let volume: usize = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| b - a + 1)
        .product();
    if volume >= 4096 {
        let (left, right) = rayon::join(
            || scan_box(ctx, lo, &hi_left),
            || scan_box(ctx, &lo_right, hi),
        );
        let mut out = left?;
        out.extend(right?);
        Ok(out)
    } else {
        let mut out = scan_box(ctx, lo, &hi_left)?;
        out.extend(scan_box(ctx, &lo_right, hi)?);
        Ok(out)
    }
}

/// Scans the region's full product grid and returns the points whose
/// residual is at or below `threshold`, in grid-index order.
///
/// Pruning never changes the member set: a box is discarded only when the
/// Lipschitz bound proves every node in it sits strictly above threshold.
pub fn grid_scan(t: &OperatorTuple, region: &Region, threshold: f64) -> Result<SpectrumPointCloud> {
    let n = t.len();
    if region.centers.len() != n {
        return Err(Error::Dimension(format!(
            "region has {} coordinates, tuple has n={}",
            region.centers.len(),
            n
        )));
    }
    if region.resolution < 2 {
        return Err(Error::Spec("resolution must be at least 2".into()));
    }
    if n > 2 {
        return Err(Error::SizeGuard(
            "full grid scans support n <= 2; probe explicit points instead".into(),
        ));
    }
    if !(threshold >= 0.0) {
        return Err(Error::Spec("threshold must be nonnegative".into()));
    }

    let grid = GridAxes::from_region(region);
    let ctx = ScanCtx {
        tuple: t,
        grid: &grid,
        threshold,
    };
    let lo = vec![0usize; 2 * n];
    let hi = vec![grid.resolution - 1; 2 * n];
    let mut members = scan_box(&ctx, &lo, &hi)?;
    members.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(SpectrumPointCloud {
        n,
        threshold,
        points: members.into_iter().map(|(_, p)| p).collect(),
        region: Some(region.clone()),
    })
}

/// Smallest singular value of the Vasilescu pair matrix
/// `[[T_1 - z_1, T_2 - z_2], [-(T_2 - z_2)*, (T_1 - z_1)*]]`.
pub fn vasilescu_residual(t: &OperatorTuple, z: &[Complex64]) -> Result<f64> {
    if t.len() != 2 {
        return Err(Error::NotApplicable(
            "the Vasilescu test is defined for pairs only".into(),
        ));
    }
    if z.len() != 2 {
        return Err(Error::Dimension("expected a point of C^2".into()));
    }
    let a1 = t.leg(0).shift(z[0])?;
    let a2 = t.leg(1).shift(z[1])?;
    let d = t.dim();
    let neg_a2_adj = a2.adjoint().scale(Complex64::new(-1.0, 0.0));
    let a1_adj = a1.adjoint();
    let alpha = ComplexMatrix::from_block_grid(2, 2, d, |bi, bj| match (bi, bj) {
        (0, 0) => Some(a1.clone()),
        (0, 1) => Some(a2.clone()),
        (1, 0) => Some(neg_a2_adj.clone()),
        _ => Some(a1_adj.clone()),
    });
    min_singular_value(&alpha)
}

/// Recomputes `||(T_j - z_j)* y||` for each leg; the audit trail for
/// witnesses.
pub fn joint_adjoint_residual(
    t: &OperatorTuple,
    z: &[Complex64],
    y: &[Complex64],
) -> Result<Vec<f64>> {
    if z.len() != t.len() {
        return Err(Error::Dimension("point length must match the tuple".into()));
    }
    if y.len() != t.dim() {
        return Err(Error::Dimension("vector length must match the space".into()));
    }
    let norm = vector_norm(y);
    if norm < 1e-12 {
        return Err(Error::Spec("witness vector must not be zero".into()));
    }
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Spec(format!("witness vector must be unit, norm {norm}")));
    }
    let mut out = Vec::with_capacity(t.len());
    for (leg, &w) in t.legs().iter().zip(z) {
        let shifted_adj = leg.shift(w)?.adjoint();
        out.push(vector_norm(&shifted_adj.apply(y)?));
    }
    Ok(out)
}

/// Extracts a joint approximate adjoint eigenvector at a spectrum point of
/// a doubly commuting tuple whose legs all satisfy condition (1).
///
/// Picks the Laplacian with the smallest residual, takes the matching least
/// right singular vector of the stacked boundary block, and keeps the
/// max-norm block among its C(n, k) components.
pub fn extract_adjoint_witness(
    t: &OperatorTuple,
    z: &[Complex64],
    threshold: Option<f64>,
) -> Result<AdjointWitness> {
    let tol_c = commutation_tolerance(t.max_operator_norm());
    if !t.is_doubly_commuting(tol_c) {
        return Err(Error::Hypothesis(
            "tuple is not doubly commuting within tolerance".into(),
        ));
    }
    for (j, leg) in t.legs().iter().enumerate() {
        if !satisfies_condition1(leg)? {
            return Err(Error::Hypothesis(format!(
                "operator {} does not satisfy condition (1) (normality at finite dimension)",
                j + 1
            )));
        }
    }
    let point = singularity_residual(t, z)?;
    let thr = threshold.unwrap_or_else(|| default_threshold(t));
    let res = point.residual_value();
    if res > thr {
        return Err(Error::Hypothesis(format!(
            "point is not in the Taylor spectrum: residual {res:.3e} exceeds threshold {thr:.3e}"
        )));
    }

    let per_k = point.per_k.as_ref().expect("scan point");
    let best_k = per_k
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap();

    let shifted = t.shifted(z)?;
    let n = t.len();
    let d = t.dim();
    let stacked = if best_k == 0 {
        boundary_map(&shifted, 1)?.adjoint()
    } else if best_k == n {
        boundary_map(&shifted, n)?
    } else {
        let top = boundary_map(&shifted, best_k)?;
        let bottom = boundary_map(&shifted, best_k + 1)?.adjoint();
        ComplexMatrix::vstack(&[&top, &bottom])?
    };

    let svd = stacked.as_na().clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd with right vectors");
    let min_idx = (0..svd.singular_values.len())
        .min_by(|&a, &b| {
            svd.singular_values[a]
                .partial_cmp(&svd.singular_values[b])
                .unwrap()
        })
        .unwrap();
    let x: Vec<Complex64> = (0..v_t.ncols()).map(|c| v_t[(min_idx, c)].conj()).collect();

    let blocks = x.len() / d;
    let mut source_block = 0usize;
    let mut best_norm = -1.0f64;
    for s in 0..blocks {
        let nrm = vector_norm(&x[s * d..(s + 1) * d]);
        if nrm > best_norm {
            best_norm = nrm;
            source_block = s;
        }
    }
    let block = &x[source_block * d..(source_block + 1) * d];
    let scale = vector_norm(block);
    let vector: Vec<Complex64> = block.iter().map(|v| v / scale).collect();

    let residuals = joint_adjoint_residual(t, z, &vector)?;
    let witness_tol = 1e-8 * (1.0 + t.max_operator_norm());
    if residuals.iter().any(|r| *r > witness_tol) {
        return Err(Error::Integrity(format!(
            "extracted vector fails the adjoint residual bound: {residuals:?}"
        )));
    }

    Ok(AdjointWitness {
        point,
        vector,
        residuals,
        source_block,
    })
}

/// Residuals of the polar-factor limits at `z = r e^{i theta}` for a unit
/// vector `x`: how far `x` is from being pinned by `U`, `|A|` and `f(|A|)`.
pub fn polar_factor_residuals(
    a: &ComplexMatrix,
    z: Complex64,
    x: &[Complex64],
    f: &ScalarFunction,
) -> Result<(f64, f64, f64)> {
    let r = z.norm();
    if r <= 0.0 {
        return Err(Error::NotApplicable(
            "the unitary direction is undefined at r = 0".into(),
        ));
    }
    let norm = vector_norm(x);
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Spec(format!("x must be a unit vector, norm {norm}")));
    }
    let phase = z / r;
    let factors = polar_decompose(a)?;
    let fr = f.apply(r)?;
    let f_of_p = crate::matrix::hermitian_function(&factors.positive, f)?;

    let ux = factors.unitary.apply(x)?;
    let px = factors.positive.apply(x)?;
    let fx = f_of_p.apply(x)?;

    let diff = |v: &[Complex64], c: Complex64| -> f64 {
        vector_norm(
            &v.iter()
                .zip(x)
                .map(|(vi, xi)| vi - c * xi)
                .collect::<Vec<_>>(),
        )
    };
    Ok((
        diff(&ux, phase),
        diff(&px, Complex64::new(r, 0.0)),
        diff(&fx, Complex64::new(fr, 0.0)),
    ))
}

// --- serialization ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PointRepr {
    z: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_k: Option<Vec<f64>>,
}

impl Serialize for SpectrumPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr {
            z: self.coords.iter().map(|c| [c.re, c.im]).collect(),
            residual: self.residual,
            per_k: self.per_k.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectrumPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PointRepr::deserialize(deserializer)?;
        Ok(SpectrumPoint {
            coords: repr.z.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            residual: repr.residual,
            per_k: repr.per_k,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    centers: Vec<[f64; 2]>,
    radii: Vec<f64>,
    resolution: usize,
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RegionRepr {
            centers: self.centers.iter().map(|c| [c.re, c.im]).collect(),
            radii: self.radii.clone(),
            resolution: self.resolution,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RegionRepr::deserialize(deserializer)?;
        Region::new(
            repr.centers.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            repr.radii,
            repr.resolution,
        )
        .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CloudRepr {
    n: usize,
    threshold: f64,
    points: Vec<SpectrumPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region: Option<Region>,
}

impl Serialize for SpectrumPointCloud {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CloudRepr {
            n: self.n,
            threshold: self.threshold,
            points: self.points.clone(),
            region: self.region.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectrumPointCloud {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CloudRepr::deserialize(deserializer)?;
        Ok(SpectrumPointCloud {
            n: repr.n,
            threshold: repr.threshold,
            points: repr.points,
            region: repr.region,
        })
    }
}

impl SpectrumPointCloud {
    /// Flat CSV export: `z1_re, z1_im, ..., residual`, one row per point.
    /// Lossy by design: the per-Laplacian residuals stay in the JSON form.
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = Vec::new();
        for j in 1..=self.n {
            header.push(format!("z{j}_re"));
            header.push(format!("z{j}_im"));
        }
        header.push("residual".into());
        let mut out = header.join(",");
        out.push('\n');
        for p in &self.points {
            let mut row: Vec<String> = Vec::new();
            for c in &p.coords {
                row.push(format!("{}", c.re));
                row.push(format!("{}", c.im));
            }
            row.push(match p.residual {
                Some(r) => format!("{r}"),
                None => String::new(),
            });
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factory::{
        conjugated_normal_tuple, diagonal_tuple, separated_joint_spec, JointDiagonalSpec,
    };

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn diag_pair() -> OperatorTuple {
        diagonal_tuple(
            &JointDiagonalSpec::new(2, vec![vec![re(1.), re(3.)], vec![re(2.), re(4.)]]).unwrap(),
        )
    }

    #[test]
    fn joint_diagonal_oracle() {
        let t = diag_pair();
        let at = singularity_residual(&t, &[re(1.), re(3.)]).unwrap();
        assert!(at.residual_value() <= 1e-12, "joint value is singular");
        // Mismatched pairing is not in the spectrum even though each
        // coordinate is an eigenvalue of its leg.
        let off = singularity_residual(&t, &[re(1.), re(4.)]).unwrap();
        assert!(off.residual_value() >= 0.5);
    }

    #[test]
    fn scalar_residual_is_the_distance() {
        let t = OperatorTuple::new(vec![ComplexMatrix::from_rows(1, 1, vec![re(2.)]).unwrap()])
            .unwrap();
        let p = singularity_residual(&t, &[re(10.)]).unwrap();
        assert!((p.residual_value() - 8.0).abs() < 1e-12);
        assert_eq!(p.per_k.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn residual_is_min_of_per_k() {
        let t = diag_pair();
        let p = singularity_residual(&t, &[re(1.5), re(2.5)]).unwrap();
        let per_k = p.per_k.as_ref().unwrap();
        let m = per_k.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(p.residual_value(), m);
    }

    #[test]
    fn translation_covariance_is_exact_on_representable_shifts() {
        let t = diag_pair();
        let z = [re(0.5), re(1.25)];
        let w = [re(0.25), re(-0.75)];
        let shifted_t = t.shifted(&w).unwrap();
        let shifted_z: Vec<Complex64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
        let p1 = singularity_residual(&t, &z).unwrap();
        let p2 = singularity_residual(&shifted_t, &shifted_z).unwrap();
        assert_eq!(p1.residual_value(), p2.residual_value());
    }

    #[test]
    fn unitary_invariance_of_residuals() {
        let spec = separated_joint_spec(2, 3, 1.0, 7);
        let t = diagonal_tuple(&spec);
        let conj = conjugated_normal_tuple(&spec, 7);
        for z in [
            vec![re(0.3), re(0.9)],
            spec.joint_values[1].clone(),
            vec![re(-1.0), re(2.0)],
        ] {
            let a = singularity_residual(&t, &z).unwrap().residual_value();
            let b = singularity_residual(&conj, &z).unwrap().residual_value();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a));
        }
    }

    #[test]
    fn grid_scan_single_operator_finds_eigenvalues() {
        let t = OperatorTuple::new(vec![ComplexMatrix::diagonal(&[re(1.), re(2.)])]).unwrap();
        let region = Region::new(vec![re(0.)], vec![3.0], 61).unwrap();
        let pitch = region.pitch(0);
        assert!((pitch - 0.1).abs() < 1e-12);
        let cloud = grid_scan(&t, &region, 0.05).unwrap();
        assert!(!cloud.points.is_empty());
        for p in &cloud.points {
            let z = p.coords[0];
            let d = (z - re(1.)).norm().min((z - re(2.)).norm());
            assert!(d <= 0.05 + 1e-12, "member {z} strays from the spectrum");
        }
        // Each eigenvalue is captured by some member.
        for lambda in [re(1.), re(2.)] {
            assert!(cloud
                .points
                .iter()
                .any(|p| (p.coords[0] - lambda).norm() <= 0.05 + 1e-12));
        }
    }

    #[test]
    fn grid_scan_agrees_with_exhaustive_reference() {
        let t = diag_pair();
        let region = Region::new(vec![re(1.5), re(3.5)], vec![2.0, 2.0], 7).unwrap();
        let threshold = 0.45;
        let cloud = grid_scan(&t, &region, threshold).unwrap();

        // Brute force over the full product grid.
        let grid = GridAxes::from_region(&region);
        let mut expected = Vec::new();
        let r = region.resolution;
        for i0 in 0..r {
            for i1 in 0..r {
                for i2 in 0..r {
                    for i3 in 0..r {
                        let idx = vec![i0, i1, i2, i3];
                        let z = grid.point(&idx);
                        let p = singularity_residual(&t, &z).unwrap();
                        if p.residual_value() <= threshold {
                            expected.push((idx, p));
                        }
                    }
                }
            }
        }
        assert_eq!(cloud.points.len(), expected.len());
        for (got, (_, want)) in cloud.points.iter().zip(&expected) {
            assert_eq!(got.coords, want.coords);
            assert_eq!(got.residual, want.residual);
        }
    }

    #[test]
    fn grid_scan_guards() {
        let t = diag_pair();
        assert!(matches!(
            Region::new(vec![re(0.), re(0.)], vec![1.0, 1.0], 1),
            Err(Error::Spec(_))
        ));
        let three = OperatorTuple::new(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(2),
        ])
        .unwrap();
        let region = Region::new(vec![re(0.), re(0.), re(0.)], vec![1.0; 3], 5).unwrap();
        assert!(matches!(grid_scan(&three, &region, 0.1), Err(Error::SizeGuard(_))));

        // Radius-0 region collapses to the center and finds nothing away
        // from the spectrum.
        let region = Region::new(vec![re(10.), re(10.)], vec![0.0, 0.0], 2).unwrap();
        let cloud = grid_scan(&t, &region, 1e-6).unwrap();
        assert!(cloud.points.is_empty());
    }

    #[test]
    fn vasilescu_matches_the_oracle_cases() {
        let t = diag_pair();
        // Joint eigenvalue: exactly singular.
        assert!(vasilescu_residual(&t, &[re(1.), re(3.)]).unwrap() <= 1e-12);
        // Far shift dominates.
        let far = vasilescu_residual(&t, &[re(100.), re(100.)]).unwrap();
        assert!(far > 90.0);
        // One-dimensional zero pair.
        let zero = OperatorTuple::new(vec![
            ComplexMatrix::zeros(1, 1),
            ComplexMatrix::zeros(1, 1),
        ])
        .unwrap();
        assert!(vasilescu_residual(&zero, &[re(0.), re(0.)]).unwrap() <= 1e-15);
        // Not a pair.
        let single = OperatorTuple::new(vec![ComplexMatrix::identity(2)]).unwrap();
        assert!(matches!(
            vasilescu_residual(&single, &[re(0.), re(0.)]),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn witness_extraction_on_diagonal_and_conjugated_tuples() {
        let t = diag_pair();
        let w = extract_adjoint_witness(&t, &[re(1.), re(3.)], None).unwrap();
        assert!((vector_norm(&w.vector) - 1.0).abs() < 1e-12);
        assert!(w.residuals.iter().all(|r| *r <= 1e-10));
        // e_1 is the joint eigenvector.
        assert!((w.vector[0].norm() - 1.0).abs() < 1e-10);

        let spec = separated_joint_spec(2, 3, 1.2, 19);
        let conj = conjugated_normal_tuple(&spec, 19);
        for jv in &spec.joint_values {
            let w = extract_adjoint_witness(&conj, jv, None).unwrap();
            assert!(w.residuals.iter().all(|r| *r <= 1e-8));
            let audit = joint_adjoint_residual(&conj, jv, &w.vector).unwrap();
            assert_eq!(audit, w.residuals);
        }
    }

    #[test]
    fn witness_extraction_rejects_bad_hypotheses() {
        let j = ComplexMatrix::from_rows(2, 2, vec![re(0.), re(1.), re(0.), re(0.)]).unwrap();
        let bad = OperatorTuple::new_unchecked(vec![j.clone(), j.adjoint()]).unwrap();
        assert!(matches!(
            extract_adjoint_witness(&bad, &[re(0.), re(0.)], None),
            Err(Error::Hypothesis(_))
        ));
        let t = diag_pair();
        assert!(matches!(
            extract_adjoint_witness(&t, &[re(50.), re(50.)], None),
            Err(Error::Hypothesis(_))
        ));
        // A nonnormal leg fails condition (1).
        let shift = crate::factory::truncated_weighted_shift(&[1.0, 2.0]).unwrap();
        let single = OperatorTuple::new(vec![shift]).unwrap();
        assert!(matches!(
            extract_adjoint_witness(&single, &[re(0.)], Some(1.0)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn adjoint_residual_gap_for_orthogonal_vectors() {
        let t = diag_pair();
        // e_2 is orthogonal to the joint eigenvector at (1, 3).
        let y = vec![re(0.), re(1.)];
        let rs = joint_adjoint_residual(&t, &[re(1.), re(3.)], &y).unwrap();
        assert!((rs[0] - 1.0).abs() < 1e-12, "|2 - 1|");
        assert!((rs[1] - 1.0).abs() < 1e-12, "|4 - 3|");
        assert!(joint_adjoint_residual(&t, &[re(0.), re(0.)], &[re(0.), re(0.)]).is_err());
    }

    #[test]
    fn polar_factor_residual_cases() {
        // 1x1: everything is exact.
        let a = ComplexMatrix::from_rows(1, 1, vec![Complex64::from_polar(2.0, std::f64::consts::FRAC_PI_3)])
            .unwrap();
        let (u, p, f) = polar_factor_residuals(
            &a,
            Complex64::from_polar(2.0, std::f64::consts::FRAC_PI_3),
            &[re(1.)],
            &ScalarFunction::power(0.5),
        )
        .unwrap();
        assert!(u < 1e-12 && p < 1e-12 && f < 1e-12);

        // Normal diagonal with distinct moduli: an orthogonal eigenvector
        // sees the modulus gap in the positive factor.
        let a = ComplexMatrix::diagonal(&[re(2.), Complex64::from_polar(5.0, 1.0)]);
        let (_, pres, _) = polar_factor_residuals(&a, re(2.), &[re(0.), re(1.)], &ScalarFunction::Identity).unwrap();
        assert!((pres - 3.0).abs() < 1e-12, "|5 - 2| = 3");

        assert!(matches!(
            polar_factor_residuals(&a, re(0.), &[re(1.), re(0.)], &ScalarFunction::Identity),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn cloud_json_matches_schema_and_round_trips() {
        let t = diag_pair();
        let region = Region::new(vec![re(1.), re(3.)], vec![1.5, 1.5], 5).unwrap();
        let cloud = grid_scan(&t, &region, 0.8).unwrap();
        let js = serde_json::to_string(&cloud).unwrap();
        assert!(js.starts_with("{\"n\":2,\"threshold\":0.8,\"points\":[{\"z\":[["));
        let back: SpectrumPointCloud = serde_json::from_str(&js).unwrap();
        assert_eq!(back, cloud);

        let csv = cloud.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "z1_re,z1_im,z2_re,z2_im,residual");
        assert_eq!(csv.lines().count(), cloud.points.len() + 1);
    }
}
