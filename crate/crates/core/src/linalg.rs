//! Dense matrix utilities for the rotation-group geometry.
//!
//! Everything is built on the trace inner product `<A,B> = tr(A^T B)/p`,
//! which normalizes the identity to unit length; rotation-angle based
//! geodesic distances, the Schur-block logarithm of a rotation and the polar
//! projection live here.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;

/// Trace inner product `tr(A^T B)/p` on `End(R^p)`; `<I,I> = 1`.
pub fn trace_inner(a: &Mat, b: &Mat) -> f64 {
    let p = a.nrows();
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..p {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s / p as f64
}

/// Norm induced by [`trace_inner`].
pub fn trace_norm(a: &Mat) -> f64 {
    trace_inner(a, a).sqrt()
}

/// Max-abs-entry norm, used for exact (signed-permutation) predicates.
pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_c(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.norm()))
}

/// `‖A^T A − I‖_max`; zero iff `A` is orthogonal.
pub fn orthogonality_residual(a: &Mat) -> f64 {
    let p = a.nrows();
    max_abs(&(a.transpose() * a - Mat::identity(p, p)))
}

/// `‖A² + I‖_max`; zero iff `A` is a complex structure.
pub fn complex_structure_residual(a: &Mat) -> f64 {
    let p = a.nrows();
    max_abs(&(a * a + Mat::identity(p, p)))
}

/// `‖AB + BA‖_max`.
pub fn anticommutator_residual(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a * b + b * a))
}

/// `‖AB − BA‖_max`.
pub fn commutator_residual(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Matrix exponential by scaling-and-squaring with a (13,13) Padé approximant.
pub fn expm(a: &Mat) -> Mat {
    let p = a.nrows();
    // 1-norm based scaling
    let norm = (0..p)
        .map(|j| (0..p).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let a_scaled = a * (0.5f64.powi(s));

    // Padé 13 coefficients (Higham)
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = Mat::identity(p, p);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9])
        + &a6 * B[7]
        + &a4 * B[5]
        + &a2 * B[3]
        + &id * B[1];
    let u = &a_scaled * u_inner;
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8])
        + &a6 * B[6]
        + &a4 * B[4]
        + &a2 * B[2]
        + &id * B[0];
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator must be invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Principal logarithm of a rotation matrix via its real Schur form.
///
/// The Schur form of an orthogonal matrix is block diagonal with 2x2
/// rotation blocks and entries ±1 on the rest of the diagonal. Rotation
/// blocks map to their angle generators; `-1` entries sit on the cut locus
/// and are rejected (the calling flows keep all angles well below π).
pub fn log_rotation(r: &Mat) -> Result<Mat> {
    log_rotation_impl(r, false)
}

/// Rotation logarithm that tolerates the cut locus: exact `−1` eigenvalue
/// pairs are turned into π-rotations in deterministically paired Schur
/// planes. The branch choice is arbitrary there, which is fine for gauge
/// corrections that only need *some* continuous square root.
pub fn log_rotation_allow_pi(r: &Mat) -> Result<Mat> {
    log_rotation_impl(r, true)
}

fn log_rotation_impl(r: &Mat, allow_pi: bool) -> Result<Mat> {
    let p = r.nrows();
    let res = orthogonality_residual(r);
    if res > 1e-8 {
        return Err(Error::relation("log_rotation: input not orthogonal", res));
    }
    let schur = r.clone().schur();
    let (q, t) = schur.unpack();
    let mut log_t = Mat::zeros(p, p);
    let mut minus_ones: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < p {
        let two_by_two = i + 1 < p && t[(i + 1, i)].abs() > 1e-10;
        if two_by_two {
            let theta = t[(i + 1, i)].atan2(t[(i, i)]);
            if theta.abs() > std::f64::consts::PI - 1e-6 && !allow_pi {
                return Err(Error::invalid(
                    "log_rotation: rotation angle at the cut locus (θ ≈ π)",
                ));
            }
            log_t[(i, i + 1)] = -theta;
            log_t[(i + 1, i)] = theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                if !allow_pi {
                    return Err(Error::invalid(
                        "log_rotation: eigenvalue -1 (antipodal point, log branch undefined)",
                    ));
                }
                minus_ones.push(i);
            }
            i += 1;
        }
    }
    if minus_ones.len() % 2 != 0 {
        return Err(Error::invalid("log_rotation: odd count of -1 eigenvalues"));
    }
    for pair in minus_ones.chunks(2) {
        log_t[(pair[0], pair[1])] = -std::f64::consts::PI;
        log_t[(pair[1], pair[0])] = std::f64::consts::PI;
    }
    let a = &q * log_t * q.transpose();
    // exact skew-symmetrization kills Schur round-off
    Ok((&a - &a.transpose()) * 0.5)
}

/// Sum of squared rotation angles of `R ∈ SO(p)`, from the eigenvalues of
/// the symmetric part (`cos θ`, with matching multiplicities).
pub fn angles_squared_sum(r: &Mat) -> f64 {
    let sym = (r + &r.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .map(|c| c.clamp(-1.0, 1.0).acos().powi(2))
        .sum()
}

/// Largest rotation angle of `R ∈ SO(p)` (operator geodesic distance to I).
pub fn max_rotation_angle(r: &Mat) -> f64 {
    let sym = (r + &r.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .map(|c| c.clamp(-1.0, 1.0).acos())
        .fold(0.0f64, f64::max)
}

/// Geodesic distance on `SO(p)` under the trace metric:
/// `d(u,v)² = Σ θ_j² / p` over all angle eigenvalues of `u^T v`.
pub fn geodesic_distance(u: &Mat, v: &Mat) -> f64 {
    let r = u.transpose() * v;
    (angles_squared_sum(&r) / u.nrows() as f64).sqrt()
}

/// Geodesic midpoint of two rotations (within the injectivity radius).
pub fn geodesic_midpoint(u: &Mat, v: &Mat) -> Result<Mat> {
    let a = log_rotation(&(u.transpose() * v))?;
    Ok(u * expm(&(a * 0.5)))
}

/// Point at parameter `t` on the geodesic from `u` to `v`.
pub fn geodesic_point(u: &Mat, v: &Mat, t: f64) -> Result<Mat> {
    let a = log_rotation(&(u.transpose() * v))?;
    Ok(u * expm(&(a * t)))
}

/// Polar factor (nearest orthogonal matrix) via SVD.
pub fn polar_factor(m: &Mat) -> Result<Mat> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::invalid("svd failed"))?;
    let vt = svd.v_t.ok_or_else(|| Error::invalid("svd failed"))?;
    let min_sv = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
    if min_sv < 1e-12 {
        return Err(Error::invalid(
            "polar projection of a (numerically) singular matrix",
        ));
    }
    Ok(u * vt)
}

/// Nearest complex structure to a skew matrix: `B (−B²)^{-1/2}`.
///
/// Keeps every (anti)commutation relation `B` already satisfies, since the
/// correction factor is a function of `B²`.
pub fn polar_complex_structure(b: &Mat) -> Result<Mat> {
    let bsq = -(b * b);
    let eig = ((&bsq + &bsq.transpose()) * 0.5).symmetric_eigen();
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min_ev < 1e-12 {
        return Err(Error::invalid(
            "polar_complex_structure: singular skew matrix",
        ));
    }
    let inv_sqrt = Mat::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(b * root)
}

/// Orthonormal basis of a subspace spanned by the columns of `m` (SVD rank
/// truncation at `tol`).
pub fn column_space_basis(m: &Mat, tol: f64) -> Vec<DVector<f64>> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u");
    let mut basis = Vec::new();
    for (j, s) in svd.singular_values.iter().enumerate() {
        if *s > tol {
            basis.push(u.column(j).into_owned());
        }
    }
    basis
}

/// Complex-adapted orthonormal basis for the complex structure `jc`:
/// returns `p/2` vectors `b_a` such that `(b_1, jc b_1, b_2, jc b_2, …)` is a
/// real orthonormal basis. Seeded greedily from the standard basis, so the
/// result is deterministic.
pub fn complex_basis(jc: &Mat) -> Result<Vec<DVector<f64>>> {
    let p = jc.nrows();
    if p % 2 != 0 {
        return Err(Error::invalid("complex_basis: odd dimension"));
    }
    let res = complex_structure_residual(jc);
    if res > 1e-8 {
        return Err(Error::relation("complex_basis: not a complex structure", res));
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p / 2);
    let mut real_basis: Vec<DVector<f64>> = Vec::with_capacity(p);
    for i in 0..p {
        if basis.len() == p / 2 {
            break;
        }
        let mut v = DVector::zeros(p);
        v[i] = 1.0;
        for b in &real_basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let n = v.norm();
        if n > 1e-8 {
            let b = v / n;
            let jb = jc * &b;
            real_basis.push(b.clone());
            real_basis.push(jb);
            basis.push(b);
        }
    }
    if basis.len() != p / 2 {
        return Err(Error::invalid("complex_basis: basis construction failed"));
    }
    Ok(basis)
}

/// Matrix of the `jc`-linear map `m` in the complex basis `basis`
/// (Hermitian product `h(u,v) = <u,v> − i <u, jc v>`).
pub fn to_complex_matrix(m: &Mat, jc: &Mat, basis: &[DVector<f64>]) -> CMat {
    let q = basis.len();
    let mut out = CMat::zeros(q, q);
    for b in 0..q {
        let mb = m * &basis[b];
        let jmb = jc * &mb;
        for a in 0..q {
            let re = basis[a].dot(&mb);
            let im = -basis[a].dot(&jmb);
            out[(a, b)] = Complex::new(re, im);
        }
    }
    out
}

/// Uniform random unit vector in `R^n` (rejection-free Gaussian normalization).
pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| standard_normal(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Standard normal sample by Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-ish random rotation: polar factor of a Gaussian matrix, det-corrected.
pub fn random_rotation<R: Rng>(rng: &mut R, p: usize) -> Mat {
    loop {
        let g = Mat::from_fn(p, p, |_, _| standard_normal(rng));
        if let Ok(mut q) = polar_factor(&g) {
            if q.determinant() < 0.0 {
                // flip one column to land in SO(p)
                for i in 0..p {
                    q[(i, 0)] = -q[(i, 0)];
                }
            }
            return q;
        }
    }
}

/// Random skew-symmetric matrix with entries of scale `eps`.
pub fn random_skew<R: Rng>(rng: &mut R, p: usize, eps: f64) -> Mat {
    let g = Mat::from_fn(p, p, |_, _| standard_normal(rng) * eps);
    (&g - &g.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rot2(theta: f64) -> Mat {
        Mat::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    #[test]
    fn expm_of_planar_generator_is_rotation() {
        let theta = 0.7;
        let a = Mat::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
        let r = expm(&a);
        assert_abs_diff_eq!(max_abs(&(r - rot2(theta))), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn log_inverts_exp_on_random_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [2usize, 4, 6, 8] {
            for _ in 0..10 {
                let r = random_rotation(&mut rng, p);
                let a = log_rotation(&r).unwrap();
                assert!(max_abs(&(&a + &a.transpose())) < 1e-12, "log must be skew");
                let back = expm(&a);
                assert!(
                    max_abs(&(back - &r)) < 1e-9,
                    "exp(log R) must reproduce R (p={p})"
                );
            }
        }
    }

    #[test]
    fn log_rejects_antipode() {
        let r = -Mat::identity(4, 4);
        assert!(log_rotation(&r).is_err());
    }

    #[test]
    fn distance_identity_to_minus_identity_is_pi() {
        // minimal rotation from I to -I has trace-metric length π
        let theta = std::f64::consts::PI * 0.999999;
        let mut r = Mat::zeros(4, 4);
        r.view_mut((0, 0), (2, 2)).copy_from(&rot2(theta));
        r.view_mut((2, 2), (2, 2)).copy_from(&rot2(theta));
        let d = geodesic_distance(&Mat::identity(4, 4), &r);
        assert_abs_diff_eq!(d, theta, epsilon = 1e-9);
    }

    #[test]
    fn midpoint_halves_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_rotation(&mut rng, 6);
        let a = random_skew(&mut rng, 6, 0.2);
        let v = &u * expm(&a);
        let m = geodesic_midpoint(&u, &v).unwrap();
        let d = geodesic_distance(&u, &v);
        assert_abs_diff_eq!(geodesic_distance(&u, &m), d / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(geodesic_distance(&m, &v), d / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn polar_complex_structure_fixes_relations() {
        // perturb the standard symplectic structure, project back
        let mut j = Mat::zeros(4, 4);
        j[(0, 1)] = -1.0;
        j[(1, 0)] = 1.0;
        j[(2, 3)] = -1.0;
        j[(3, 2)] = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = random_skew(&mut rng, 4, 1e-3);
        let b = &j + &noise;
        let jp = polar_complex_structure(&b).unwrap();
        assert!(complex_structure_residual(&jp) < 1e-12);
        assert!(orthogonality_residual(&jp) < 1e-12);
        assert!(max_abs(&(&jp - &j)) < 1e-2);
    }

    #[test]
    fn complex_matrix_of_complex_structure_is_i() {
        let mut j = Mat::zeros(4, 4);
        j[(0, 1)] = -1.0;
        j[(1, 0)] = 1.0;
        j[(2, 3)] = -1.0;
        j[(3, 2)] = 1.0;
        let basis = complex_basis(&j).unwrap();
        let jm = to_complex_matrix(&j, &j, &basis);
        for a in 0..2 {
            for b in 0..2 {
                let expect = if a == b {
                    Complex::new(0.0, 1.0)
                } else {
                    Complex::new(0.0, 0.0)
                };
                assert!((jm[(a, b)] - expect).norm() < 1e-12);
            }
        }
    }
}
