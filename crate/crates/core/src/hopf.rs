//! Hopf maps of Clifford families, the great-sphere characterization,
//! affine Hopf maps and determinant windings of unitary loops.

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::{is_positive, CliffordFamily, FamilyJson};
use crate::error::{Error, Result};
use crate::linalg::{complex_basis, max_abs, max_abs_c, to_complex_matrix, CMat, Mat};

/// Linear isometric sphere map `(t,v) ↦ t·I + Σ v_i J_i` into `SO(p)`.
#[derive(Debug, Clone)]
pub struct HopfMap {
    pub fam: CliffordFamily,
}

impl HopfMap {
    pub fn new(fam: CliffordFamily) -> Result<Self> {
        fam.validate()?;
        Ok(HopfMap { fam })
    }

    pub fn sphere_dim(&self) -> usize {
        self.fam.len()
    }

    /// Evaluate at a unit point of `R^{1+k}`.
    pub fn evaluate(&self, point: &DVector<f64>) -> Result<Mat> {
        evaluate_linear(&self.fam, point)
    }
}

fn evaluate_linear(fam: &CliffordFamily, point: &DVector<f64>) -> Result<Mat> {
    if point.len() != fam.len() + 1 {
        return Err(Error::invalid(format!(
            "hopf evaluation: point must lie in R^{}",
            fam.len() + 1
        )));
    }
    if (point.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::invalid("hopf evaluation: point must be a unit vector"));
    }
    let mut m = Mat::identity(fam.p, fam.p) * point[0];
    for (i, j) in fam.mats.iter().enumerate() {
        m += j * point[i + 1];
    }
    Ok(m)
}

/// Block sum of the identity on `L_0` with a positive Hopf map on `L_1`.
///
/// `basis_fixed` and `basis_hopf` are orthonormal column bases of the two
/// summands; `fam1` acts on `L_1` in the `basis_hopf` coordinates.
#[derive(Debug, Clone)]
pub struct AffineHopfMap {
    pub p: usize,
    pub basis_fixed: Mat,
    pub basis_hopf: Mat,
    pub fam1: CliffordFamily,
}

impl AffineHopfMap {
    pub fn new(basis_fixed: Mat, basis_hopf: Mat, fam1: CliffordFamily) -> Result<Self> {
        let p = basis_fixed.nrows();
        if basis_hopf.nrows() != p {
            return Err(Error::invalid("affine hopf: basis row mismatch"));
        }
        if basis_fixed.ncols() + basis_hopf.ncols() != p {
            return Err(Error::invalid("affine hopf: splitting does not span R^p"));
        }
        if fam1.p != basis_hopf.ncols() {
            return Err(Error::invalid("affine hopf: family dimension mismatch"));
        }
        fam1.validate()?;
        if fam1.len() % 4 == 3 && !is_positive(&fam1)? {
            return Err(Error::invalid("affine hopf: family on L_1 must be positive"));
        }
        let mut joined = Mat::zeros(p, p);
        joined
            .view_mut((0, 0), (p, basis_fixed.ncols()))
            .copy_from(&basis_fixed);
        joined
            .view_mut((0, basis_fixed.ncols()), (p, basis_hopf.ncols()))
            .copy_from(&basis_hopf);
        let res = crate::linalg::orthogonality_residual(&joined);
        if res > 1e-8 {
            return Err(Error::relation("affine hopf: splitting not orthonormal", res));
        }
        Ok(AffineHopfMap {
            p,
            basis_fixed,
            basis_hopf,
            fam1,
        })
    }

    /// Pure Hopf map (empty fixed block).
    pub fn pure(fam: CliffordFamily) -> Result<Self> {
        let p = fam.p;
        AffineHopfMap::new(Mat::zeros(p, 0), Mat::identity(p, p), fam)
    }

    pub fn sphere_dim(&self) -> usize {
        self.fam1.len()
    }

    /// Stable winding number `η = dim_C L_1 = dim_R L_1 / 2`.
    pub fn eta(&self) -> Result<i64> {
        if self.basis_hopf.ncols() % 2 != 0 {
            return Err(Error::invalid("affine hopf: odd-dimensional L_1"));
        }
        Ok((self.basis_hopf.ncols() / 2) as i64)
    }

    pub fn evaluate(&self, point: &DVector<f64>) -> Result<Mat> {
        let inner = evaluate_linear(&self.fam1, point)?;
        let fixed = &self.basis_fixed * self.basis_fixed.transpose();
        Ok(fixed + &self.basis_hopf * inner * self.basis_hopf.transpose())
    }
}

/// Stable winding of an affine Hopf map (`p/2` for a pure Hopf map).
pub fn stable_winding_of_affine_hopf(h: &AffineHopfMap) -> Result<i64> {
    h.eta()
}

/// Recover a Clifford family from sampled values of a linear sphere map on
/// an orthonormal frame `e_0, …, e_k` (with `μ(e_0) = I`).
///
/// The pairwise identity `A^T B + B^T A = 2<A,B>·I` for orthonormal-image
/// samples in `SO(p)` forces the Clifford relations; any violation above
/// `margin` signals that the input is not a great-sphere embedding.
pub fn family_from_great_sphere(samples: &[Mat], margin: f64) -> Result<CliffordFamily> {
    if samples.len() < 2 {
        return Err(Error::invalid("family_from_great_sphere: need k+1 ≥ 2 samples"));
    }
    let p = samples[0].nrows();
    let id = Mat::identity(p, p);
    if max_abs(&(&samples[0] - &id)) > margin {
        return Err(Error::relation(
            "family_from_great_sphere: μ(e_0) ≠ I",
            max_abs(&(&samples[0] - &id)),
        ));
    }
    for (i, m) in samples.iter().enumerate() {
        let res = crate::linalg::orthogonality_residual(m);
        if res > margin {
            return Err(Error::relation(
                format!("family_from_great_sphere: sample {i} not orthogonal"),
                res,
            ));
        }
    }
    // isometry of the linear extension: samples orthonormal in the trace metric
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let inner = crate::linalg::trace_inner(&samples[i], &samples[j]);
            if inner.abs() > margin {
                return Err(Error::relation(
                    format!(
                        "family_from_great_sphere: samples {i},{j} not orthogonal in trace metric"
                    ),
                    inner.abs(),
                ));
            }
        }
    }
    // Clifford relations, asserted pairwise
    let mats: Vec<Mat> = samples[1..].to_vec();
    for (i, a) in mats.iter().enumerate() {
        let skew = max_abs(&(a + &a.transpose()));
        if skew > margin {
            return Err(Error::relation(
                format!("family_from_great_sphere: μ(e_{}) not skew", i + 1),
                skew,
            ));
        }
        let sq = max_abs(&(a * a + &id));
        if sq > margin {
            return Err(Error::relation(
                format!("family_from_great_sphere: μ(e_{})² ≠ −I", i + 1),
                sq,
            ));
        }
        for (j, b) in mats.iter().enumerate().skip(i + 1) {
            let res = crate::linalg::anticommutator_residual(a, b);
            if res > margin {
                return Err(Error::relation(
                    format!(
                        "family_from_great_sphere: μ(e_{}) and μ(e_{}) do not anticommute",
                        i + 1,
                        j + 1
                    ),
                    res,
                ));
            }
        }
    }
    let mut fam = CliffordFamily::new(mats);
    fam.tol = margin;
    Ok(fam)
}

/// Winding number of a closed loop in `U_q`, sampled inclusively
/// (`loop[0] = loop[last]`), by phase unwrapping of the determinant.
pub fn winding_number_det(samples: &[CMat]) -> Result<i64> {
    if samples.len() < 3 {
        return Err(Error::invalid("winding: need at least 3 samples"));
    }
    let closure = max_abs_c(&(&samples[samples.len() - 1] - &samples[0]));
    if closure > 1e-6 {
        return Err(Error::relation("winding: loop does not close", closure));
    }
    let total = unwrapped_det_phase(samples)?;
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.1 {
        return Err(Error::invalid(format!(
            "winding: rounding residue {:.3} exceeds 0.1",
            (winding - rounded).abs()
        )));
    }
    Ok(rounded as i64)
}

/// Accumulated determinant phase along a sampled path (open or closed),
/// guarding against aliasing (no step may advance the argument by ≥ π).
pub fn unwrapped_det_phase(samples: &[CMat]) -> Result<f64> {
    let mut total = 0.0;
    let mut prev = det_arg(&samples[0])?;
    for (i, m) in samples.iter().enumerate().skip(1) {
        let cur = det_arg(m)?;
        let mut step = cur - prev;
        while step > std::f64::consts::PI {
            step -= 2.0 * std::f64::consts::PI;
        }
        while step < -std::f64::consts::PI {
            step += 2.0 * std::f64::consts::PI;
        }
        if step.abs() > std::f64::consts::PI - 1e-3 {
            return Err(Error::invalid(format!(
                "winding: aliasing at step {i} (argument advance {:.3} ≥ π)",
                step.abs()
            )));
        }
        total += step;
        prev = cur;
    }
    Ok(total)
}

fn det_arg(m: &CMat) -> Result<f64> {
    let det = m.determinant();
    if det.norm() < 1e-8 {
        return Err(Error::invalid("winding: singular matrix in loop"));
    }
    Ok(det.arg())
}

/// Winding of a pole-to-pole path `I ⇝ −I` in `U_q` relative to a
/// reference path, by the loop concatenation `reference ∗ path⁻¹`.
/// Returns `w(reference) − w(path)` as the determinant winding of the
/// doubled loop.
pub fn winding_of_doubled_path(path: &[CMat], reference: &[CMat]) -> Result<i64> {
    if path.is_empty() || reference.is_empty() {
        return Err(Error::invalid("winding: empty path"));
    }
    let mut loop_samples: Vec<CMat> = reference.to_vec();
    loop_samples.extend(path.iter().rev().cloned());
    winding_number_det(&loop_samples)
}

/// Complex matrix of `J·J_ℓ^{-1} = −J·J_ℓ` for `J ∈ P̂_ℓ`, in a basis
/// adapted to the complex structure `i = J_1⋯J_{ℓ−1}` (requires
/// `ℓ ≡ 2 mod 4`).
pub fn embed_centriole_in_unitary(j: &Mat, chain: &CliffordFamily, ell: usize) -> Result<CMat> {
    if ell % 4 != 2 {
        return Err(Error::invalid(
            "embed_centriole_in_unitary: need ℓ ≡ 2 mod 4",
        ));
    }
    if ell > chain.len() {
        return Err(Error::invalid(
            "embed_centriole_in_unitary: ℓ exceeds chain length",
        ));
    }
    if !crate::centriole::membership(j, chain, ell) {
        return Err(Error::invalid(
            "embed_centriole_in_unitary: J fails membership at level ℓ",
        ));
    }
    let jo = chain_complex_structure(chain, ell)?;
    let u_real = -(j * &chain.mats[ell - 1]);
    let res = crate::linalg::commutator_residual(&u_real, &jo);
    if res > chain.tol.max(1e-8) {
        return Err(Error::relation(
            "embed_centriole_in_unitary: J·J_ℓ does not commute with i",
            res,
        ));
    }
    let basis = complex_basis(&jo)?;
    let u = to_complex_matrix(&u_real, &jo, &basis);
    let q = u.nrows();
    let id = CMat::identity(q, q);
    let unit_res = max_abs_c(&(&u.adjoint() * &u - id));
    if unit_res > 1e-8 {
        return Err(Error::relation(
            "embed_centriole_in_unitary: not unitary",
            unit_res,
        ));
    }
    Ok(u)
}

/// The complex structure `i = J_1⋯J_{ℓ−1}` of the chain at level `ℓ`.
pub fn chain_complex_structure(chain: &CliffordFamily, ell: usize) -> Result<Mat> {
    if ell < 2 {
        return Err(Error::invalid("chain complex structure needs ℓ ≥ 2"));
    }
    let mut jo = chain.mats[0].clone();
    for m in &chain.mats[1..ell - 1] {
        jo = jo * m;
    }
    let res = crate::linalg::complex_structure_residual(&jo);
    if res > chain.tol.max(1e-9) {
        return Err(Error::relation(
            "J_1⋯J_{ℓ−1} is not a complex structure",
            res,
        ));
    }
    Ok(jo)
}

/// JSON wire form of a sampled unitary loop.
#[derive(Debug, Serialize, Deserialize)]
pub struct LoopJson {
    pub q: usize,
    pub samples: usize,
    /// Row-major `[re, im]` pairs per matrix.
    pub mats: Vec<Vec<[f64; 2]>>,
}

impl LoopJson {
    pub fn to_matrices(&self) -> Result<Vec<CMat>> {
        self.mats
            .iter()
            .map(|flat| {
                if flat.len() != self.q * self.q {
                    return Err(Error::invalid("loop json: matrix size mismatch"));
                }
                Ok(CMat::from_fn(self.q, self.q, |i, j| {
                    let [re, im] = flat[i * self.q + j];
                    Complex::new(re, im)
                }))
            })
            .collect()
    }

    pub fn from_matrices(mats: &[CMat]) -> Self {
        let q = mats.first().map_or(0, |m| m.nrows());
        LoopJson {
            q,
            samples: mats.len(),
            mats: mats
                .iter()
                .map(|m| {
                    let mut flat = Vec::with_capacity(q * q);
                    for i in 0..q {
                        for j in 0..q {
                            flat.push([m[(i, j)].re, m[(i, j)].im]);
                        }
                    }
                    flat
                })
                .collect(),
        }
    }
}

/// JSON wire form of an affine Hopf map.
#[derive(Debug, Serialize, Deserialize)]
pub struct AffineHopfJson {
    pub p: usize,
    pub eta: i64,
    /// Basis of the fixed block, one inner vec per column vector.
    pub l0_basis: Vec<Vec<f64>>,
    pub l1_basis: Vec<Vec<f64>>,
    pub fam1: FamilyJson,
}

impl AffineHopfJson {
    pub fn from_map(h: &AffineHopfMap) -> Result<Self> {
        Ok(AffineHopfJson {
            p: h.p,
            eta: h.eta()?,
            l0_basis: columns(&h.basis_fixed),
            l1_basis: columns(&h.basis_hopf),
            fam1: FamilyJson::from(&h.fam1),
        })
    }
}

fn columns(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().cloned().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_irreducible, volume_element};
    use crate::linalg::{orthogonality_residual, random_rotation, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(coords: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(coords)
    }

    #[test]
    fn hopf_base_point_is_identity() {
        let fam = build_irreducible(3).unwrap();
        let h = HopfMap::new(fam).unwrap();
        let m = h.evaluate(&unit(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(max_abs(&(m - Mat::identity(4, 4))), 0.0);
    }

    #[test]
    fn hopf_axis_points_give_generators() {
        let fam = build_irreducible(3).unwrap();
        let h = HopfMap::new(fam.clone()).unwrap();
        let m = h.evaluate(&unit(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(max_abs(&(m - &fam.mats[0])), 0.0);
    }

    #[test]
    fn hopf_diagonal_point_is_orthogonal() {
        let fam = build_irreducible(3).unwrap();
        let h = HopfMap::new(fam.clone()).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        let m = h.evaluate(&unit(&[s, s, 0.0, 0.0])).unwrap();
        let expect = (Mat::identity(4, 4) + &fam.mats[0]) * s;
        assert!(max_abs(&(&m - &expect)) < 1e-15);
        assert!(orthogonality_residual(&m) < 1e-14);
    }

    #[test]
    fn hopf_is_orthogonal_at_random_points() {
        let fam = build_irreducible(4).unwrap();
        let h = HopfMap::new(fam).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let v = random_unit_vector(&mut rng, 5);
            let m = h.evaluate(&v).unwrap();
            assert!(orthogonality_residual(&m) < 1e-8);
        }
    }

    #[test]
    fn hopf_rejects_non_unit_point() {
        let fam = build_irreducible(2).unwrap();
        let h = HopfMap::new(fam).unwrap();
        assert!(h.evaluate(&unit(&[0.5, 0.5, 0.0])).is_err());
    }

    #[test]
    fn great_sphere_roundtrip_is_exact() {
        let fam = build_irreducible(3).unwrap();
        let mut samples = vec![Mat::identity(4, 4)];
        samples.extend(fam.mats.iter().cloned());
        let back = family_from_great_sphere(&samples, 1e-6).unwrap();
        for (a, b) in back.mats.iter().zip(&fam.mats) {
            assert_eq!(max_abs(&(a - b)), 0.0);
        }
    }

    #[test]
    fn great_sphere_accepts_conjugated_and_rejects_perturbed() {
        let fam = build_irreducible(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let q = random_rotation(&mut rng, 4);
            let samples: Vec<Mat> = std::iter::once(Mat::identity(4, 4))
                .chain(fam.mats.iter().map(|j| &q * j * q.transpose()))
                .collect();
            assert!(family_from_great_sphere(&samples, 1e-6).is_ok());
        }
        // a symmetric orthogonal sample ≠ ±I violates skewness
        let mut sym = Mat::identity(4, 4);
        sym[(0, 0)] = -1.0;
        sym[(1, 1)] = -1.0;
        let samples = vec![Mat::identity(4, 4), sym];
        assert!(family_from_great_sphere(&samples, 1e-6).is_err());
    }

    fn diag_loop(q: usize, ks: &[i64], samples: usize) -> Vec<CMat> {
        // t ↦ diag(e^{2πi k_j t}), a closed loop with winding Σ k_j
        (0..=samples)
            .map(|s| {
                let t = s as f64 / samples as f64;
                CMat::from_fn(q, q, |i, j| {
                    if i == j {
                        Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * ks[i] as f64 * t)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
            })
            .collect()
    }

    #[test]
    fn winding_of_constant_loop_is_zero() {
        let id = CMat::identity(3, 3);
        let samples = vec![id.clone(), id.clone(), id.clone(), id];
        assert_eq!(winding_number_det(&samples).unwrap(), 0);
    }

    #[test]
    fn winding_of_basic_loop_is_one() {
        let samples = diag_loop(3, &[1, 0, 0], 32);
        assert_eq!(winding_number_det(&samples).unwrap(), 1);
    }

    #[test]
    fn winding_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = random_rotation(&mut rng, 3);
        let gc = CMat::from_fn(3, 3, |i, j| Complex::new(g[(i, j)], 0.0));
        let samples: Vec<CMat> = diag_loop(3, &[2, -1, 0], 64)
            .into_iter()
            .map(|m| &gc * m * gc.adjoint())
            .collect();
        assert_eq!(winding_number_det(&samples).unwrap(), 1);
    }

    #[test]
    fn winding_is_reparametrization_invariant() {
        let base = diag_loop(2, &[3, -1], 128);
        // squash the parametrization: t ↦ t²
        let reparam: Vec<CMat> = (0..=128)
            .map(|s| {
                let t = (s as f64 / 128.0).powi(2);
                let idx = (t * 128.0).round() as usize;
                base[idx].clone()
            })
            .collect();
        assert_eq!(winding_number_det(&base).unwrap(), 2);
        assert_eq!(winding_number_det(&reparam).unwrap(), 2);
    }

    #[test]
    fn winding_adds_under_concatenation() {
        let a = diag_loop(2, &[1, 0], 48);
        let b = diag_loop(2, &[0, 2], 48);
        let mut joined = a.clone();
        joined.extend(b.iter().cloned());
        assert_eq!(
            winding_number_det(&joined).unwrap(),
            winding_number_det(&a).unwrap() + winding_number_det(&b).unwrap()
        );
    }

    #[test]
    fn winding_detects_aliasing() {
        // two samples per turn advance the argument by exactly π per step
        let samples = diag_loop(1, &[1], 2);
        assert!(winding_number_det(&samples).is_err());
    }

    #[test]
    fn winding_detects_non_closing_loop() {
        let path: Vec<CMat> = (0..=32)
            .map(|s| {
                let t = s as f64 / 32.0;
                CMat::from_fn(1, 1, |_, _| {
                    Complex::from_polar(1.0, std::f64::consts::PI * t)
                })
            })
            .collect();
        assert!(winding_number_det(&path).is_err());
    }

    fn pole_path(q: usize, ks: &[i64], samples: usize) -> Vec<CMat> {
        // t ↦ diag(e^{iπ k_j t}): path I ⇝ −I for odd k_j
        (0..=samples)
            .map(|s| {
                let t = s as f64 / samples as f64;
                CMat::from_fn(q, q, |i, j| {
                    if i == j {
                        Complex::from_polar(1.0, std::f64::consts::PI * ks[i] as f64 * t)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
            })
            .collect()
    }

    #[test]
    fn doubled_path_winding_is_difference() {
        // w(γ) − w(γ̃) with w = Σk/2
        let reference = pole_path(2, &[1, 1], 64); // w = 1
        let path = pole_path(2, &[3, -1], 64); // w = 1
        assert_eq!(winding_of_doubled_path(&path, &reference).unwrap(), 0);
        let path2 = pole_path(2, &[3, 1], 64); // w = 2
        assert_eq!(winding_of_doubled_path(&path2, &reference).unwrap(), -1);
        let path3 = pole_path(2, &[-1, -1], 64); // w = -1
        assert_eq!(winding_of_doubled_path(&path3, &reference).unwrap(), 2);
    }

    #[test]
    fn geodesic_path_phase_matches_half_spectrum_sum() {
        let path = pole_path(4, &[3, 1, 1, -1], 128);
        let phase = unwrapped_det_phase(&path).unwrap();
        let w = phase / (2.0 * std::f64::consts::PI);
        assert!((w - 2.0).abs() < 1e-9, "w = (1/2)Σk_j = 2, got {w}");
    }

    #[test]
    fn affine_hopf_pure_map_eta() {
        let fam = build_irreducible(3).unwrap();
        let h = AffineHopfMap::pure(fam).unwrap();
        assert_eq!(stable_winding_of_affine_hopf(&h).unwrap(), 2); // p/2 = 2
    }

    #[test]
    fn affine_hopf_block_sum_adds_eta() {
        let fam = build_irreducible(3).unwrap();
        let p = fam.p; // 4
        let basis_fixed = Mat::identity(2 * p, 2 * p)
            .view((0, 0), (2 * p, p))
            .into_owned();
        let basis_hopf = Mat::identity(2 * p, 2 * p)
            .view((0, p), (2 * p, p))
            .into_owned();
        let h = AffineHopfMap::new(basis_fixed, basis_hopf, fam).unwrap();
        assert_eq!(h.eta().unwrap(), 2);
        let m = h.evaluate(&unit(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        // identity on L_0
        assert_eq!(m.view((0, 0), (p, p)), Mat::identity(p, p));
        assert!(orthogonality_residual(&m) < 1e-12);
    }

    #[test]
    fn embed_reference_structures() {
        // chain of length 3 on R^8: positive Cl_3 family doubled
        let fam = build_irreducible(3).unwrap().repeated(2).unwrap();
        let ell = 2;
        // J = J_ℓ ↦ identity, J = −J_ℓ ↦ −I
        let u = embed_centriole_in_unitary(&fam.mats[1], &fam, ell).unwrap();
        assert!(max_abs_c(&(&u - CMat::identity(4, 4))) < 1e-12);
        let neg = -&fam.mats[1];
        let u2 = embed_centriole_in_unitary(&neg, &fam, ell).unwrap();
        assert!(max_abs_c(&(&u2 + CMat::identity(4, 4))) < 1e-12);
        // J = J_{ℓ+1} on a positive chain: the embedded matrix is +i·I
        // (all of R^p sits in L_+; in general the trace is i(dim L_+ − dim L_−))
        let u3 = embed_centriole_in_unitary(&fam.mats[2], &fam, ell).unwrap();
        let i_id = CMat::identity(4, 4) * Complex::new(0.0, 1.0);
        assert!(max_abs_c(&(&u3 - i_id)) < 1e-12);
        let sq = &u3 * &u3 + CMat::identity(4, 4);
        assert!(max_abs_c(&sq) < 1e-10, "J_(ℓ+1)J_ℓ^(-1) squares to −I");
    }

    #[test]
    fn volume_element_roundtrip_for_embedding() {
        // sanity: i = J_1 for ℓ = 2 embeds as multiplication by i
        let fam = build_irreducible(3).unwrap().repeated(2).unwrap();
        let jo = chain_complex_structure(&fam, 2).unwrap();
        assert_eq!(max_abs(&(&jo - &fam.mats[0])), 0.0);
        let _ = volume_element(&fam).unwrap();
    }
}
