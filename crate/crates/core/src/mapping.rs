//! The polar spectral-mapping transform `S_j = U_j f(|T_j|)`, the radial
//! point map `r e^{i theta} -> e^{i theta} f(r)`, and set-level
//! verification of the inclusion and equality mapping statements.
//!
//! Verification scans both spectra on matched grids, reduces each member
//! cluster to its best node, then sharpens that node by per-axis parabolic
//! interpolation of the squared residual (exact for normal tuples, whose
//! squared residual is locally an isotropic paraboloid). The reported
//! Hausdorff distances therefore measure the theorem statement, not the
//! grid pitch.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{
    hermitian_function, min_singular_value, polar_decompose, ComplexMatrix, BASE_TOL,
};
use crate::scalar::ScalarFunction;
use crate::spectrum::{
    grid_scan, singularity_residual, Region, SpectrumPoint, SpectrumPointCloud,
};
use crate::tuple::{
    commutation_tolerance, is_log_hyponormal, is_p_hyponormal, joint_diagonalize,
    satisfies_condition1, OperatorTuple,
};

/// Which direction(s) of the mapping statement to assert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingMode {
    Inclusion,
    Equality,
}

/// Outcome of a mapping verification.
#[derive(Debug, Clone)]
pub struct MappingReport {
    pub mode: MappingMode,
    /// Sup over mapped source points of the distance into the target cloud.
    pub forward: f64,
    /// Sup over target points of the distance into the mapped source cloud.
    pub backward: f64,
    pub passed: bool,
    pub f: ScalarFunction,
    pub tolerance: f64,
    pub source_threshold: f64,
    pub target_threshold: f64,
    pub source_pitch: f64,
    pub target_pitch: f64,
    pub source_points: usize,
    pub target_points: usize,
    pub warnings: Vec<String>,
}

impl Serialize for MappingReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MappingReport", 7)?;
        s.serialize_field(
            "mode",
            match self.mode {
                MappingMode::Inclusion => "inclusion",
                MappingMode::Equality => "equality",
            },
        )?;
        s.serialize_field("forward", &self.forward)?;
        s.serialize_field("backward", &self.backward)?;
        s.serialize_field("verdict", if self.passed { "pass" } else { "fail" })?;
        s.serialize_field("f", &self.f)?;
        let thresholds = serde_json::json!({
            "tolerance": self.tolerance,
            "source_threshold": self.source_threshold,
            "target_threshold": self.target_threshold,
            "source_pitch": self.source_pitch,
            "target_pitch": self.target_pitch,
            "source_points": self.source_points,
            "target_points": self.target_points,
        });
        s.serialize_field("thresholds", &thresholds)?;
        s.serialize_field("warnings", &self.warnings)?;
        s.end()
    }
}

/// Applies `S_j = U_j f(|T_j|)` leg by leg.
///
/// Every spectrum of `|T_j|` must sit inside the admissible domain of `f`;
/// for `log` and inverse powers the legs must additionally be invertible.
/// When the input is doubly commuting with normal legs the output is
/// checked to be doubly commuting before it is returned.
pub fn transform_tuple(t: &OperatorTuple, f: &ScalarFunction) -> Result<OperatorTuple> {
    f.validate()?;
    let mut legs = Vec::with_capacity(t.len());
    for (j, leg) in t.legs().iter().enumerate() {
        let smin = min_singular_value(leg)?;
        if f.requires_invertible() && smin <= BASE_TOL * (1.0 + leg.operator_norm()) {
            return Err(Error::Domain(format!(
                "{} needs an invertible operator, but leg {} has smallest singular value {smin:.3e}",
                f.describe(),
                j + 1
            )));
        }
        let factors = polar_decompose(leg)?;
        let (sv, _) = crate::matrix::hermitian_eigen(&factors.positive)?;
        for &s in &sv {
            let s = if s < 0.0 { 0.0 } else { s };
            if !f.admits(s) {
                return Err(Error::Domain(format!(
                    "eigenvalue {s:.6e} of |T_{}| lies outside the domain of {}",
                    j + 1,
                    f.describe()
                )));
            }
        }
        let f_abs = hermitian_function(&factors.positive, f)?;
        legs.push(factors.unitary.mul(&f_abs)?);
    }
    let out = OperatorTuple::new_unchecked(legs)?;

    let tol_in = commutation_tolerance(t.max_operator_norm());
    let normal_input = t.is_doubly_commuting(tol_in)
        && t.legs()
            .iter()
            .map(satisfies_condition1)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|b| b);
    if normal_input {
        let tol_out = commutation_tolerance(out.max_operator_norm());
        if !out.is_doubly_commuting(tol_out) {
            return Err(Error::Integrity(
                "transformed tuple lost double commutation beyond tolerance".into(),
            ));
        }
    }
    Ok(out)
}

/// Maps one point coordinatewise: `w = r e^{i theta} -> e^{i theta} f(r)`.
///
/// The phase is carried as the unit vector `w / |w|`, never recomputed from
/// an angle, so arguments are preserved bit-stably; at `r = 0` the argument
/// is taken to be 0.
pub fn map_point(coords: &[Complex64], f: &ScalarFunction) -> Result<Vec<Complex64>> {
    coords
        .iter()
        .map(|w| {
            let r = w.norm();
            let unit = if r > 0.0 { w / r } else { Complex64::new(1.0, 0.0) };
            Ok(unit * f.apply(r)?)
        })
        .collect()
}

/// Maps a cloud through `f`; residuals are dropped because the image is a
/// target set, not a measurement.
pub fn map_cloud(cloud: &SpectrumPointCloud, f: &ScalarFunction) -> Result<SpectrumPointCloud> {
    let points = cloud
        .points
        .iter()
        .map(|p| {
            Ok(SpectrumPoint {
                coords: map_point(&p.coords, f)?,
                residual: None,
                per_k: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumPointCloud {
        n: cloud.n,
        threshold: cloud.threshold,
        points,
        region: None,
    })
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// One-sided Hausdorff distances `(sup_a d(a, B), sup_b d(b, A))` between
/// two nonempty clouds of the same dimension.
pub fn hausdorff(a: &SpectrumPointCloud, b: &SpectrumPointCloud) -> Result<(f64, f64)> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::Spec("hausdorff of an empty cloud".into()));
    }
    if a.n != b.n {
        return Err(Error::Spec(format!(
            "cloud dimensions differ: {} vs {}",
            a.n, b.n
        )));
    }
    let one_sided = |from: &SpectrumPointCloud, to: &SpectrumPointCloud| -> f64 {
        from.points
            .iter()
            .map(|p| {
                to.points
                    .iter()
                    .map(|q| dist(&p.coords, &q.coords))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok((one_sided(a, b), one_sided(b, a)))
}

// --- cluster reduction and sub-grid refinement -------------------------------

/// Keeps one representative (the smallest-residual node) per cluster of
/// members closer than `radius`.
fn reduce_members(points: &[SpectrumPoint], radius: f64) -> Vec<SpectrumPoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .residual_value()
            .partial_cmp(&points[j].residual_value())
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut kept: Vec<SpectrumPoint> = Vec::new();
    for idx in order {
        let p = &points[idx];
        if kept.iter().all(|k| dist(&k.coords, &p.coords) > radius) {
            kept.push(p.clone());
        }
    }
    kept
}

/// Sharpens a member location by per-axis parabolic interpolation of the
/// squared residual. For commuting normal tuples the squared residual is
/// locally exactly `sum_axes (x - w)^2`, so one pass per axis lands on the
/// spectral point up to roundoff; steps are clamped to one pitch and the
/// refined point is kept only if it actually improves the residual.
fn refine_point(t: &OperatorTuple, start: &[Complex64], h: f64) -> Result<(Vec<Complex64>, f64)> {
    let res_sq = |z: &[Complex64]| -> Result<f64> {
        let r = singularity_residual(t, z)?.residual_value();
        Ok(r * r)
    };
    let mut z: Vec<Complex64> = start.to_vec();
    let mut best = singularity_residual(t, &z)?.residual_value();
    let mut step = h;
    for _pass in 0..2 {
        for axis in 0..2 * t.len() {
            let j = axis / 2;
            let dir = if axis % 2 == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            let mut zm = z.clone();
            zm[j] -= dir * step;
            let mut zp = z.clone();
            zp[j] += dir * step;
            let (fm, f0, fp) = (res_sq(&zm)?, res_sq(&z)?, res_sq(&zp)?);
            let denom = fm - 2.0 * f0 + fp;
            if denom <= 0.0 {
                continue;
            }
            let mut delta = 0.5 * step * (fm - fp) / denom;
            delta = delta.clamp(-step, step);
            z[j] += dir * delta;
        }
        step *= 0.25;
    }
    let refined = singularity_residual(t, &z)?.residual_value();
    if refined <= best {
        best = refined;
        Ok((z, best))
    } else {
        Ok((start.to_vec(), best))
    }
}

fn cell_half_diagonal(region: &Region) -> f64 {
    let mut acc = 0.0;
    for j in 0..region.radii.len() {
        let p = region.pitch(j);
        acc += 2.0 * (p / 2.0) * (p / 2.0);
    }
    acc.sqrt()
}

fn scan_reduce_refine(
    t: &OperatorTuple,
    region: &Region,
    label: &str,
) -> Result<(Vec<SpectrumPoint>, f64)> {
    let capture = 1.05 * cell_half_diagonal(region).max(1e-12);
    let cloud = grid_scan(t, region, capture)?;
    if cloud.points.is_empty() {
        return Err(Error::Spec(format!(
            "{label} scan found no spectrum points; enlarge the region or resolution"
        )));
    }
    let reduced = reduce_members(&cloud.points, 2.2 * capture);
    let h = region.max_pitch();
    let mut refined = Vec::with_capacity(reduced.len());
    for p in &reduced {
        let (coords, residual) = refine_point(t, &p.coords, h)?;
        refined.push(SpectrumPoint {
            coords,
            residual: Some(residual),
            per_k: None,
        });
    }
    Ok((refined, capture))
}

fn cloud_from_points(n: usize, threshold: f64, points: Vec<SpectrumPoint>) -> SpectrumPointCloud {
    SpectrumPointCloud {
        n,
        threshold,
        points,
        region: None,
    }
}

/// Checks the corollary hypotheses that justify an equality claim for this
/// `f`; returns the reason equality is not certified, if any.
fn equality_obstruction(t: &OperatorTuple, f: &ScalarFunction) -> Result<Option<String>> {
    match f {
        ScalarFunction::Identity => Ok(None),
        ScalarFunction::Power { exponent } | ScalarFunction::InversePower { exponent } => {
            if !(*exponent > 0.0 && *exponent < 2.0) {
                return Ok(Some(format!(
                    "radial power equality needs exponent 2p in (0, 2), got {exponent}"
                )));
            }
            let p = exponent / 2.0;
            for (j, leg) in t.legs().iter().enumerate() {
                if !is_p_hyponormal(leg, p)?.holds {
                    return Ok(Some(format!(
                        "operator {} is not {p}-hyponormal",
                        j + 1
                    )));
                }
            }
            Ok(None)
        }
        ScalarFunction::Log => {
            for (j, leg) in t.legs().iter().enumerate() {
                if !is_log_hyponormal(leg)?.holds() {
                    return Ok(Some(format!("operator {} is not log-hyponormal", j + 1)));
                }
                let smin = min_singular_value(leg)?;
                if smin <= 1.0 {
                    return Ok(Some(format!(
                        "log|T_j| > 0 fails for operator {}: smallest singular value {smin:.6}",
                        j + 1
                    )));
                }
            }
            Ok(None)
        }
        _ => Ok(Some(format!(
            "equality is certified only for radial powers and log, not {}",
            f.describe()
        ))),
    }
}

/// Verifies the spectral mapping statement for `S_j = U_j f(|T_j|)` over a
/// scan region, in inclusion or equality mode.
///
/// Equality is downgraded to inclusion (with a warning) when the equality
/// hypotheses cannot be certified; the one-directional statement needs only
/// double commutation, condition (1) legs and an admissible `f`.
pub fn verify_mapping(
    t: &OperatorTuple,
    f: &ScalarFunction,
    region: &Region,
    requested_mode: MappingMode,
    tolerance: Option<f64>,
) -> Result<MappingReport> {
    f.validate()?;
    let tol_c = commutation_tolerance(t.max_operator_norm());
    if !t.is_doubly_commuting(tol_c) {
        return Err(Error::Hypothesis(
            "mapping verification needs a doubly commuting tuple".into(),
        ));
    }
    for (j, leg) in t.legs().iter().enumerate() {
        if !satisfies_condition1(leg)? {
            return Err(Error::Hypothesis(format!(
                "operator {} does not satisfy condition (1)",
                j + 1
            )));
        }
    }
    if region.centers.len() != t.len() {
        return Err(Error::Dimension(
            "region dimension must match the tuple".into(),
        ));
    }

    let mut warnings = Vec::new();
    let mut mode = requested_mode;
    if mode == MappingMode::Equality {
        if let Some(reason) = equality_obstruction(t, f)? {
            warnings.push(format!("equality downgraded to inclusion: {reason}"));
            mode = MappingMode::Inclusion;
        }
    }

    let s = transform_tuple(t, f)?;

    let (source_refined, thr_src) = scan_reduce_refine(t, region, "source")?;
    let mapped: Vec<SpectrumPoint> = source_refined
        .iter()
        .map(|p| {
            Ok(SpectrumPoint {
                coords: map_point(&p.coords, f)?,
                residual: None,
                per_k: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // The target region covers every candidate spectrum point of S: each
    // coordinate of sigma_T(S) is bounded by ||S_j||, padded by a cell.
    let pad = (2.0 * region.max_pitch()).max(0.2);
    let target_region = Region::new(
        vec![Complex64::new(0.0, 0.0); s.len()],
        s.legs().iter().map(|m| m.operator_norm() + pad).collect(),
        region.resolution,
    )?;
    let (target_refined, thr_tgt) = scan_reduce_refine(&s, &target_region, "target")?;

    let n = t.len();
    let mapped_cloud = cloud_from_points(n, thr_src, mapped);
    let target_cloud = cloud_from_points(n, thr_tgt, target_refined);
    let (forward, backward) = hausdorff(&mapped_cloud, &target_cloud)?;

    let source_pitch = region.max_pitch();
    let target_pitch = target_region.max_pitch();
    let tol = tolerance.unwrap_or(1.5 * source_pitch.max(target_pitch));
    let passed = match mode {
        MappingMode::Equality => forward <= tol && backward <= tol,
        MappingMode::Inclusion => forward <= tol,
    };

    Ok(MappingReport {
        mode,
        forward,
        backward,
        passed,
        f: f.clone(),
        tolerance: tol,
        source_threshold: thr_src,
        target_threshold: thr_tgt,
        source_pitch,
        target_pitch,
        source_points: mapped_cloud.points.len(),
        target_points: target_cloud.points.len(),
        warnings,
    })
}

/// A polynomial in n variables with complex coefficients, evaluated on
/// scalars and on commuting matrix tuples with the same operation order, so
/// diagonal instances agree bit-for-bit along both routes.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialNVar {
    /// (coefficient, exponent per variable)
    pub terms: Vec<(Complex64, Vec<u32>)>,
    pub variables: usize,
}

impl PolynomialNVar {
    pub fn new(variables: usize, terms: Vec<(Complex64, Vec<u32>)>) -> Result<Self> {
        if terms.iter().any(|(_, e)| e.len() != variables) {
            return Err(Error::Spec(
                "every term must carry one exponent per variable".into(),
            ));
        }
        Ok(Self { terms, variables })
    }

    pub fn eval_scalar(&self, point: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, exps) in &self.terms {
            let mut term = *c;
            for (w, &e) in point.iter().zip(exps) {
                for _ in 0..e {
                    term *= w;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_matrix(&self, t: &OperatorTuple) -> Result<ComplexMatrix> {
        let d = t.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (c, exps) in &self.terms {
            let mut term = ComplexMatrix::identity(d).scale(*c);
            for (leg, &e) in t.legs().iter().zip(exps) {
                for _ in 0..e {
                    term = term.mul(leg)?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

/// Verifies the polynomial mapping identity on a joint-diagonalizable
/// tuple: the Taylor spectrum of `(f_1(T), ..., f_m(T))` is compared, as a
/// set, against the image of the joint values under the polynomials, and
/// each image point is additionally confirmed singular by its residual.
pub fn polynomial_map_verify(
    t: &OperatorTuple,
    polys: &[PolynomialNVar],
) -> Result<MappingReport> {
    if polys.is_empty() {
        return Err(Error::Spec("need at least one polynomial".into()));
    }
    if polys.iter().any(|p| p.variables != t.len()) {
        return Err(Error::Spec(
            "polynomial variable count must match the tuple".into(),
        ));
    }
    let tol_c = commutation_tolerance(t.max_operator_norm());
    let (comm, _) = t.commutation_defects();
    if comm > tol_c {
        return Err(Error::Hypothesis(
            "polynomial mapping needs a commuting tuple".into(),
        ));
    }

    let (_, joint_values) = joint_diagonalize(t)?;

    let image_legs = polys
        .iter()
        .map(|p| p.eval_matrix(t))
        .collect::<Result<Vec<_>>>()?;
    let image_tuple = OperatorTuple::new_unchecked(image_legs)?;
    let tol_img = commutation_tolerance(image_tuple.max_operator_norm());
    let (img_comm, _) = image_tuple.commutation_defects();
    if img_comm > tol_img {
        return Err(Error::Integrity(
            "polynomial image of a commuting tuple stopped commuting".into(),
        ));
    }

    let image_points: Vec<Vec<Complex64>> = joint_values
        .iter()
        .map(|w| polys.iter().map(|p| p.eval_scalar(w)).collect())
        .collect();
    let (_, image_joint_values) = joint_diagonalize(&image_tuple)?;

    let m = polys.len();
    let mapped_cloud = cloud_from_points(
        m,
        0.0,
        image_points
            .iter()
            .map(|c| SpectrumPoint {
                coords: c.clone(),
                residual: None,
                per_k: None,
            })
            .collect(),
    );
    let spectrum_cloud = cloud_from_points(
        m,
        0.0,
        image_joint_values
            .iter()
            .map(|c| SpectrumPoint {
                coords: c.clone(),
                residual: None,
                per_k: None,
            })
            .collect(),
    );
    let (forward, backward) = hausdorff(&mapped_cloud, &spectrum_cloud)?;

    // Independent membership route: each image point must be singular for
    // the image tuple.
    let threshold = crate::spectrum::default_threshold(&image_tuple);
    let mut worst_residual = 0.0f64;
    for p in &image_points {
        let r = singularity_residual(&image_tuple, p)?.residual_value();
        worst_residual = worst_residual.max(r);
    }

    let tol = 1e-8 * (1.0 + image_tuple.max_operator_norm());
    let passed = forward <= tol && backward <= tol && worst_residual <= threshold;
    Ok(MappingReport {
        mode: MappingMode::Equality,
        forward,
        backward,
        passed,
        f: ScalarFunction::Identity,
        tolerance: tol,
        source_threshold: threshold,
        target_threshold: threshold,
        source_pitch: 0.0,
        target_pitch: 0.0,
        source_points: mapped_cloud.points.len(),
        target_points: spectrum_cloud.points.len(),
        warnings: vec![format!("worst image-point residual {worst_residual:.3e}")],
    })
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

    fn point_cloud(n: usize, pts: &[Vec<Complex64>]) -> SpectrumPointCloud {
        cloud_from_points(
            n,
            0.0,
            pts.iter()
                .map(|c| SpectrumPoint {
                    coords: c.clone(),
                    residual: None,
                    per_k: None,
                })
                .collect(),
        )
    }

    #[test]
    fn transform_identity_and_semi_power_fix_the_tuple() {
        let spec = separated_joint_spec(2, 3, 1.0, 2);
        let t = conjugated_normal_tuple(&spec, 2);
        let s = transform_tuple(&t, &ScalarFunction::Identity).unwrap();
        for j in 0..2 {
            assert!(s.leg(j).max_abs_diff(t.leg(j)) < 1e-12);
        }
        // t^{2p} with p = 1/2 is U|T| = T.
        let s = transform_tuple(&t, &ScalarFunction::power(1.0)).unwrap();
        for j in 0..2 {
            assert!(s.leg(j).max_abs_diff(t.leg(j)) < 1e-12);
        }
    }

    #[test]
    fn transform_scalar_leg_takes_the_radial_root() {
        let t = OperatorTuple::new(vec![ComplexMatrix::diagonal(&[Complex64::from_polar(
            4.0,
            std::f64::consts::FRAC_PI_4,
        )])])
        .unwrap();
        let s = transform_tuple(&t, &ScalarFunction::power(0.5)).unwrap();
        let expect = Complex64::from_polar(2.0, std::f64::consts::FRAC_PI_4);
        assert!((s.leg(0).get(0, 0) - expect).norm() < 1e-12);
    }

    #[test]
    fn transform_rejects_log_of_singular_leg() {
        let t = OperatorTuple::new(vec![ComplexMatrix::diagonal(&[re(0.), re(2.)])]).unwrap();
        assert!(matches!(
            transform_tuple(&t, &ScalarFunction::Log),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn map_point_examples() {
        // 4i under t^{1/2} -> 2i.
        let out = map_point(&[Complex64::new(0., 4.)], &ScalarFunction::power(0.5)).unwrap();
        assert!((out[0] - Complex64::new(0., 2.)).norm() < 1e-12);
        // e^2 e^{i theta} under log -> 2 e^{i theta}.
        let theta = 0.7;
        let w = Complex64::from_polar(std::f64::consts::E * std::f64::consts::E, theta);
        let out = map_point(&[w], &ScalarFunction::Log).unwrap();
        assert!((out[0] - Complex64::from_polar(2.0, theta)).norm() < 1e-12);
        // 0 under a power -> 0.
        let out = map_point(&[re(0.)], &ScalarFunction::power(0.8)).unwrap();
        assert_eq!(out[0], re(0.));
        // 0 under log is out of domain.
        assert!(map_point(&[re(0.)], &ScalarFunction::Log).is_err());
    }

    #[test]
    fn map_preserves_arguments() {
        let f = ScalarFunction::power(1.5);
        for k in 0..16 {
            let w = Complex64::from_polar(2.3, -3.0 + 0.41 * k as f64);
            let out = map_point(&[w], &f).unwrap()[0];
            assert!((out.arg() - w.arg()).abs() < 1e-13);
        }
    }

    #[test]
    fn radial_round_trips() {
        let f = ScalarFunction::power(0.5);
        let g = f.inverse().unwrap();
        let w = Complex64::from_polar(3.7, 1.1);
        let once = map_point(&[w], &f).unwrap();
        let back = map_point(&once, &g).unwrap();
        assert!((back[0] - w).norm() < 1e-12);

        let once = map_point(&[w], &ScalarFunction::Log).unwrap();
        let back = map_point(&once, &ScalarFunction::Exp).unwrap();
        assert!((back[0] - w).norm() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        let a = point_cloud(1, &[vec![re(0.)], vec![re(1.)]]);
        let b = point_cloud(1, &[vec![re(0.)]]);
        assert_eq!(hausdorff(&a, &a.clone()).unwrap(), (0.0, 0.0));
        let c = point_cloud(1, &[vec![re(1.)]]);
        assert_eq!(hausdorff(&b, &c).unwrap(), (1.0, 1.0));
        assert_eq!(hausdorff(&a, &b).unwrap(), (1.0, 0.0));
        let empty = point_cloud(1, &[]);
        assert!(hausdorff(&a, &empty).is_err());
        let c2 = point_cloud(2, &[vec![re(0.), re(0.)]]);
        assert!(hausdorff(&a, &c2).is_err());
    }

    #[test]
    fn verify_equality_on_a_normal_pair() {
        let spec = separated_joint_spec(2, 2, 1.0, 8);
        let t = conjugated_normal_tuple(&spec, 8);
        let radius = t.max_operator_norm() + 0.4;
        let region = Region::new(vec![re(0.), re(0.)], vec![radius, radius], 21).unwrap();
        let rep = verify_mapping(&t, &ScalarFunction::power(0.5), &region, MappingMode::Equality, None)
            .unwrap();
        assert_eq!(rep.mode, MappingMode::Equality);
        assert!(rep.passed, "forward {} backward {}", rep.forward, rep.backward);
        assert!(rep.forward < 1e-6, "refined clouds should be tight, got {}", rep.forward);
        assert!(rep.backward < 1e-6);
    }

    #[test]
    fn verify_identity_is_exact() {
        let spec = separated_joint_spec(2, 2, 1.0, 12);
        let t = conjugated_normal_tuple(&spec, 12);
        let radius = t.max_operator_norm() + 0.4;
        let region = Region::new(vec![re(0.), re(0.)], vec![radius, radius], 15).unwrap();
        let rep = verify_mapping(&t, &ScalarFunction::Identity, &region, MappingMode::Equality, None)
            .unwrap();
        assert!(rep.passed);
        assert!(rep.forward < 1e-7 && rep.backward < 1e-7);
    }

    #[test]
    fn verify_downgrades_equality_without_hypotheses() {
        // Moduli below 1 break the log-positivity hypothesis.
        let spec = JointDiagonalSpec::new(
            2,
            vec![vec![re(0.5), re(2.0)], vec![re(2.5), re(3.0)]],
        )
        .unwrap();
        let t = diagonal_tuple(&spec);
        let region = Region::new(vec![re(0.), re(0.)], vec![4.0, 4.0], 15).unwrap();
        let rep = verify_mapping(&t, &ScalarFunction::Log, &region, MappingMode::Equality, None)
            .unwrap();
        assert_eq!(rep.mode, MappingMode::Inclusion);
        assert!(rep.warnings.iter().any(|w| w.contains("log|T_j| > 0")));
    }

    #[test]
    fn verify_rejects_noncommuting_input() {
        let j = ComplexMatrix::from_rows(2, 2, vec![re(0.), re(1.), re(0.), re(0.)]).unwrap();
        let bad = OperatorTuple::new_unchecked(vec![j.clone(), j.adjoint()]).unwrap();
        let region = Region::new(vec![re(0.), re(0.)], vec![2.0, 2.0], 5).unwrap();
        assert!(matches!(
            verify_mapping(&bad, &ScalarFunction::Identity, &region, MappingMode::Inclusion, None),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn polynomial_mapping_on_the_running_pair() {
        let spec = JointDiagonalSpec::new(
            2,
            vec![vec![re(1.), re(3.)], vec![re(2.), re(4.)]],
        )
        .unwrap();
        let t = diagonal_tuple(&spec);
        // f(z1, z2) = z1 + z2: spectrum {4, 6}.
        let sum = PolynomialNVar::new(
            2,
            vec![(re(1.), vec![1, 0]), (re(1.), vec![0, 1])],
        )
        .unwrap();
        let rep = polynomial_map_verify(&t, &[sum.clone()]).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.forward, 0.0);
        assert_eq!(rep.backward, 0.0);

        let img = sum.eval_matrix(&t).unwrap();
        let evs = crate::matrix::eigenvalues(&img).unwrap();
        assert!((evs[0] - re(4.)).norm() < 1e-12 && (evs[1] - re(6.)).norm() < 1e-12);

        // Coordinate projection and a constant.
        let proj = PolynomialNVar::new(2, vec![(re(1.), vec![1, 0])]).unwrap();
        let rep = polynomial_map_verify(&t, &[proj]).unwrap();
        assert!(rep.passed && rep.forward == 0.0 && rep.backward == 0.0);
        let constant = PolynomialNVar::new(2, vec![(Complex64::new(2.5, -1.0), vec![0, 0])]).unwrap();
        let rep = polynomial_map_verify(&t, &[constant]).unwrap();
        assert!(rep.passed && rep.forward == 0.0 && rep.backward == 0.0);
    }

    #[test]
    fn polynomial_mapping_rejects_noncommuting() {
        let j = ComplexMatrix::from_rows(2, 2, vec![re(0.), re(1.), re(0.), re(0.)]).unwrap();
        let bad = OperatorTuple::new_unchecked(vec![j.clone(), j.adjoint()]).unwrap();
        let p = PolynomialNVar::new(2, vec![(re(1.), vec![1, 0])]).unwrap();
        assert!(matches!(
            polynomial_map_verify(&bad, &[p]),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn report_json_shape() {
        let spec = JointDiagonalSpec::new(2, vec![vec![re(2.), re(2.)], vec![re(3.), re(3.)]]).unwrap();
        let t = diagonal_tuple(&spec);
        let region = Region::new(vec![re(0.), re(0.)], vec![4.0, 4.0], 11).unwrap();
        let rep = verify_mapping(&t, &ScalarFunction::Identity, &region, MappingMode::Equality, None)
            .unwrap();
        let js = serde_json::to_value(&rep).unwrap();
        assert_eq!(js["mode"], "equality");
        assert!(js["forward"].is_number());
        assert!(js["backward"].is_number());
        assert!(js["verdict"] == "pass" || js["verdict"] == "fail");
        assert_eq!(js["f"]["kind"], "identity");
        assert!(js["thresholds"]["tolerance"].is_number());
    }
}
