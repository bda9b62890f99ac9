//! Pole pairs, midpoint sets and iterated minimal centrioles in `SO(p)`.
//!
//! The level-`j` midpoint set is modelled by its membership predicate
//! `J² = −I`, `JJ_i = −J_iJ` for `i < j`; geodesics between a structure and
//! its negative are one-parameter subgroups `t ↦ e^{πtA}J` whose generator
//! anticommutes with the base and commutes with the lower chain.

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordFamily;
use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator_residual, commutator_residual, complex_structure_residual, expm, max_abs,
    orthogonality_residual, polar_complex_structure, random_skew, Mat,
};

/// A Clifford family regarded as a chain of iterated centrioles
/// `SO_p ⊃ P_1 ⊃ … ⊃ P_k` with witnesses `J_j ∈ P̂_j`.
#[derive(Debug, Clone)]
pub struct CentrioleChain {
    pub fam: CliffordFamily,
}

impl CentrioleChain {
    pub fn new(fam: CliffordFamily) -> Result<Self> {
        fam.validate()?;
        Ok(CentrioleChain { fam })
    }

    pub fn p(&self) -> usize {
        self.fam.p
    }

    pub fn depth(&self) -> usize {
        self.fam.len()
    }

    /// The witness `J_j` of the level-`j` centriole (1-based).
    pub fn witness(&self, j: usize) -> Result<&Mat> {
        self.fam
            .mats
            .get(j - 1)
            .ok_or_else(|| Error::invalid(format!("chain has no level {j}")))
    }

    pub fn membership(&self, j: &Mat, level: usize) -> bool {
        membership(j, &self.fam, level)
    }
}

/// Membership of `J` in the hatted midpoint set `P̂_j`: orthogonal complex
/// structure anticommuting with `J_1, …, J_{j−1}`.
pub fn membership(j: &Mat, chain: &CliffordFamily, level: usize) -> bool {
    if level == 0 || j.nrows() != chain.p || j.ncols() != chain.p {
        return false;
    }
    let tol = chain.tol.max(1e-9);
    if orthogonality_residual(j) > tol || complex_structure_residual(j) > tol {
        return false;
    }
    chain
        .mats
        .iter()
        .take(level - 1)
        .all(|ji| anticommutator_residual(j, ji) <= tol)
}

/// Tangency of the generator `A` to `P̂_j` at `J_j`: `A` skew, anticommuting
/// with `J_j` and commuting with `J_i` for `i < j` (then `e^{tA}J_j ∈ P̂_j`
/// for all `t`).
pub fn tangent_check(a: &Mat, chain: &CliffordFamily, level: usize) -> Result<bool> {
    if level == 0 || level > chain.len() {
        return Err(Error::invalid("tangent_check: level out of range"));
    }
    let tol = chain.tol.max(1e-9);
    let skew = max_abs(&(a + &a.transpose()));
    if skew > tol {
        return Err(Error::relation("tangent_check: A not skew", skew));
    }
    let jl = &chain.mats[level - 1];
    if anticommutator_residual(a, jl) > tol {
        return Ok(false);
    }
    Ok(chain
        .mats
        .iter()
        .take(level - 1)
        .all(|ji| commutator_residual(a, ji) <= tol))
}

/// Geodesic `t ↦ e^{πtA}·J` at a centriole level (`level = 0` means the
/// ambient pole pair `I ⇝ −I` with `J = I`).
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    pub a: Mat,
    pub base: Mat,
    pub level: usize,
}

impl GeodesicSpec {
    pub fn new(a: Mat, base: Mat, level: usize) -> Self {
        GeodesicSpec { a, base, level }
    }

    /// Pole-to-pole geodesic in `SO(p)` from the identity.
    pub fn from_generator(a: Mat) -> Self {
        let p = a.nrows();
        GeodesicSpec {
            a,
            base: Mat::identity(p, p),
            level: 0,
        }
    }

    pub fn p(&self) -> usize {
        self.a.nrows()
    }

    /// Point `γ(t) = e^{πtA}·J`.
    pub fn at(&self, t: f64) -> Mat {
        expm(&(&self.a * (std::f64::consts::PI * t))) * &self.base
    }

    /// Endpoint residual `‖e^{πA} + I‖`.
    pub fn endpoint_residual(&self) -> f64 {
        let p = self.p();
        max_abs(&(expm(&(&self.a * std::f64::consts::PI)) + Mat::identity(p, p)))
    }

    /// Full invariant check against the ambient chain.
    pub fn validate(&self, chain: &CliffordFamily) -> Result<()> {
        let tol = chain.tol.max(1e-8);
        let skew = max_abs(&(&self.a + &self.a.transpose()));
        if skew > tol {
            return Err(Error::relation("geodesic: A not skew", skew));
        }
        let endpoint = self.endpoint_residual();
        if endpoint > tol {
            return Err(Error::relation("geodesic: e^{πA} ≠ −I", endpoint));
        }
        if self.level == 0 {
            let res = max_abs(&(&self.base - Mat::identity(self.p(), self.p())));
            if res > tol {
                return Err(Error::relation("geodesic: level-0 base must be I", res));
            }
            return Ok(());
        }
        if !membership(&self.base, chain, self.level) {
            return Err(Error::invalid(format!(
                "geodesic: base fails membership at level {}",
                self.level
            )));
        }
        let anti = anticommutator_residual(&self.a, &self.base);
        if anti > tol {
            return Err(Error::relation("geodesic: A must anticommute with base", anti));
        }
        for (i, ji) in chain.mats.iter().take(self.level - 1).enumerate() {
            let res = commutator_residual(&self.a, ji);
            if res > tol {
                return Err(Error::relation(
                    format!("geodesic: A must commute with J_{}", i + 1),
                    res,
                ));
            }
        }
        Ok(())
    }
}

/// Midpoint `γ(1/2) = e^{πA/2}·J` of a geodesic spec.
pub fn midpoint(g: &GeodesicSpec) -> Mat {
    g.at(0.5)
}

/// Minimal geodesic from `J_a` to `J_b = −J_a` through a midpoint complex
/// structure: `A = J_mid·J_a^{-1}`, which has spectrum `±i` only.
///
/// Without an explicit midpoint hint, the chain witness `J_{level+1}` is
/// used when available.
pub fn connect_minimal(
    j_a: &Mat,
    j_b: &Mat,
    chain: &CliffordFamily,
    level: usize,
    midpoint_hint: Option<&Mat>,
) -> Result<GeodesicSpec> {
    let tol = chain.tol.max(1e-9);
    let res = max_abs(&(j_a + j_b));
    if res > tol {
        return Err(Error::relation("connect_minimal: need J_b = −J_a", res));
    }
    if level == 0 {
        let ortho = orthogonality_residual(j_a);
        if ortho > tol {
            return Err(Error::relation("connect_minimal: J_a not orthogonal", ortho));
        }
    } else if !membership(j_a, chain, level) {
        return Err(Error::invalid(
            "connect_minimal: J_a fails membership at the given level",
        ));
    }
    let j_mid = match midpoint_hint {
        Some(m) => m.clone(),
        None => {
            if chain.len() > level {
                chain.mats[level].clone()
            } else {
                return Err(Error::invalid(
                    "connect_minimal: no valid midpoint supplied and none derivable from the chain",
                ));
            }
        }
    };
    // A = J_mid·J_a^{-1} = −J_mid·J_a must be a skew complex structure:
    // then e^{πA}J_a = −J_a and γ(1/2) = A·J_a = J_mid.
    let a = -(&j_mid * j_a);
    let skew = max_abs(&(&a + &a.transpose()));
    if skew > tol {
        return Err(Error::relation(
            "connect_minimal: midpoint does not generate a skew rotation plane",
            skew,
        ));
    }
    let cs = complex_structure_residual(&a);
    if cs > tol {
        return Err(Error::relation(
            "connect_minimal: generator spectrum is not ±i (midpoint invalid)",
            cs,
        ));
    }
    let spec = GeodesicSpec::new(a, j_a.clone(), level);
    if level >= 1 && !tangent_check(&spec.a, chain, level)? {
        return Err(Error::invalid(
            "connect_minimal: generator is not tangent to the centriole",
        ));
    }
    let mid_res = max_abs(&(midpoint(&spec) - &j_mid));
    if mid_res > 1e-9 {
        return Err(Error::relation("connect_minimal: midpoint mismatch", mid_res));
    }
    Ok(spec)
}

/// Search for a complex structure anticommuting with all of `mats`
/// (feasibility of extending the family by one step).
///
/// The linear anticommutant is computed exactly by joint projection; a
/// deterministic sequence of trial elements is polar-projected onto complex
/// structures. Feasible iff some trial lands within `residual_tol` of the
/// constraint set; an invertible element of the anticommutant exists iff a
/// generic linear combination is invertible, so seeded random combinations
/// make the search reliable.
pub fn find_anticommuting_structure(
    mats: &[Mat],
    p: usize,
    residual_tol: f64,
    seed: u64,
) -> Option<Mat> {
    find_constrained_structure(mats, &[], p, residual_tol, seed)
}

/// Complex-structure search with mixed constraints: anticommuting with
/// every matrix in `anti` and commuting with every matrix in `comm`.
pub fn find_constrained_structure(
    anti: &[Mat],
    comm: &[Mat],
    p: usize,
    residual_tol: f64,
    seed: u64,
) -> Option<Mat> {
    use rand::SeedableRng;
    let mut basis: Vec<Mat> = Vec::new();
    for r in 0..p {
        for c in (r + 1)..p {
            let mut e = Mat::zeros(p, p);
            e[(r, c)] = 1.0;
            e[(c, r)] = -1.0;
            // joint projection: anticommutant X ↦ (X + J X J)/2,
            // commutant X ↦ (X − J X J)/2
            let mut x = e;
            for m in anti {
                x = (&x + m * &x * m) * 0.5;
            }
            for m in comm {
                x = (&x - m * &x * m) * 0.5;
            }
            if max_abs(&x) > 1e-12 {
                basis.push(x);
            }
        }
    }
    if basis.is_empty() {
        return None;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut trials: Vec<Mat> = basis.iter().take(8).cloned().collect();
    for _ in 0..20 {
        let mut combo = Mat::zeros(p, p);
        for b in &basis {
            combo += b * crate::linalg::standard_normal(&mut rng);
        }
        trials.push(combo);
    }
    for t in &trials {
        if let Ok(j) = polar_complex_structure(t) {
            let ok = complex_structure_residual(&j) <= residual_tol
                && orthogonality_residual(&j) <= residual_tol
                && anti
                    .iter()
                    .all(|m| anticommutator_residual(&j, m) <= residual_tol)
                && comm
                    .iter()
                    .all(|m| commutator_residual(&j, m) <= residual_tol);
            if ok {
                return Some(j);
            }
        }
    }
    None
}

/// Deterministic small perturbation of a geodesic's generator (test helper
/// for corner-cutting experiments); keeps skewness, breaks criticality.
pub fn perturbed_generator(a: &Mat, eps: f64, seed: u64) -> Mat {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    a + random_skew(&mut rng, a.nrows(), eps)
}

/// JSON wire form of a geodesic spec.
#[derive(Debug, Serialize, Deserialize)]
pub struct GeodesicSpecJson {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    pub level: usize,
    pub p: usize,
}

impl GeodesicSpecJson {
    pub fn from_spec(g: &GeodesicSpec) -> Self {
        let p = g.p();
        let flat = |m: &Mat| {
            let mut v = Vec::with_capacity(p * p);
            for i in 0..p {
                for j in 0..p {
                    v.push(m[(i, j)]);
                }
            }
            v
        };
        GeodesicSpecJson {
            a: flat(&g.a),
            j: flat(&g.base),
            level: g.level,
            p,
        }
    }

    pub fn to_spec(&self) -> Result<GeodesicSpec> {
        if self.a.len() != self.p * self.p || self.j.len() != self.p * self.p {
            return Err(Error::invalid("geodesic json: matrix size mismatch"));
        }
        Ok(GeodesicSpec::new(
            Mat::from_row_slice(self.p, self.p, &self.a),
            Mat::from_row_slice(self.p, self.p, &self.j),
            self.level,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_irreducible, build_irreducible_class};

    fn planar(p: usize, blocks: &[(usize, f64)]) -> Mat {
        // block-diagonal skew with given 2x2 angular speeds
        let mut a = Mat::zeros(p, p);
        for &(b, k) in blocks {
            a[(2 * b, 2 * b + 1)] = -k;
            a[(2 * b + 1, 2 * b)] = k;
        }
        a
    }

    #[test]
    fn chain_witnesses_pass_membership() {
        for k in [3usize, 4, 8] {
            let fam = build_irreducible(k).unwrap();
            let chain = CentrioleChain::new(fam).unwrap();
            for j in 1..=k {
                let w = chain.witness(j).unwrap().clone();
                assert!(chain.membership(&w, j), "J_{j} ∈ P̂_{j} (k={k})");
                assert!(chain.membership(&(-&w), j), "−J_{j} ∈ P̂_{j}");
            }
        }
    }

    #[test]
    fn previous_witness_fails_membership() {
        let fam = build_irreducible(4).unwrap();
        // J_{j−1} commutes with itself, so it cannot sit in P̂_j
        assert!(!membership(&fam.mats[0], &fam, 2));
    }

    #[test]
    fn tangent_check_examples() {
        let fam = build_irreducible(4).unwrap();
        // A = J_{j+1} J_j anticommutes with J_j and commutes with lower ones
        for j in 1..4 {
            let a = &fam.mats[j] * &fam.mats[j - 1];
            assert!(tangent_check(&a, &fam, j).unwrap(), "level {j}");
        }
        // A = J_j commutes with itself
        assert!(!tangent_check(&fam.mats[1], &fam, 2).unwrap());
        // A = 0 is trivially tangent
        let zero = Mat::zeros(fam.p, fam.p);
        assert!(tangent_check(&zero, &fam, 2).unwrap());
        // non-skew input violates the precondition
        let sym = Mat::identity(fam.p, fam.p);
        assert!(tangent_check(&sym, &fam, 1).is_err());
    }

    #[test]
    fn geodesic_stays_in_centriole() {
        let fam = build_irreducible(4).unwrap();
        let level = 2;
        let a = &fam.mats[2] * &fam.mats[1]; // J_3 J_2
        let spec = GeodesicSpec::new(a, fam.mats[1].clone(), level);
        spec.validate(&fam).unwrap();
        for s in 0..=64 {
            let t = s as f64 / 64.0;
            let point = spec.at(t);
            if s == 0 || s == 64 {
                continue; // endpoints ±J_2 are in P̂_2 as well, checked below
            }
            assert!(membership(&point, &fam, level), "γ({t}) ∈ P̂_{level}");
        }
        assert!(max_abs(&(spec.at(1.0) + &fam.mats[1])) < 1e-9, "γ(1) = −J_2");
    }

    #[test]
    fn minimal_midpoint_climbs_one_level() {
        let fam = build_irreducible(8).unwrap();
        for level in 1..8 {
            let spec = connect_minimal(
                &fam.mats[level - 1].clone(),
                &(-&fam.mats[level - 1]),
                &fam,
                level,
                None,
            )
            .unwrap();
            spec.validate(&fam).unwrap();
            assert!(spec.endpoint_residual() < 1e-8);
            let m = midpoint(&spec);
            assert!(membership(&m, &fam, level + 1), "midpoint at level {level}");
            assert!(max_abs(&(&m - &fam.mats[level])) < 1e-9, "midpoint = J_(level+1)");
        }
    }

    #[test]
    fn connect_minimal_with_negated_midpoint() {
        let fam = build_irreducible(4).unwrap();
        let neg_mid = -&fam.mats[1];
        let spec = connect_minimal(
            &fam.mats[0].clone(),
            &(-&fam.mats[0]),
            &fam,
            1,
            Some(&neg_mid),
        )
        .unwrap();
        let spec_pos = connect_minimal(&fam.mats[0].clone(), &(-&fam.mats[0]), &fam, 1, None).unwrap();
        assert_eq!(max_abs(&(&spec.a + &spec_pos.a)), 0.0, "A negated");
    }

    #[test]
    fn connect_minimal_in_so2() {
        // P̂_1 in SO_2 is discrete, so the geodesic J ⇝ −J lives in the
        // ambient group (level 0) with midpoint −I; its generator is the
        // quarter turn itself.
        let j = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let fam = CliffordFamily::new(vec![j.clone()]);
        let mid = -Mat::identity(2, 2);
        let spec = connect_minimal(&j, &(-&j), &fam, 0, Some(&mid)).unwrap();
        assert_eq!(max_abs(&(&spec.a - &j)), 0.0, "quarter-turn generator");
        assert!(max_abs(&(spec.at(1.0) + &j)) < 1e-12);
        // at level 1 the same data is rejected: the generator is not
        // tangent to the (discrete) centriole
        assert!(connect_minimal(&j, &(-&j), &fam, 1, Some(&mid)).is_err());
    }

    #[test]
    fn midpoint_of_zero_generator_is_base() {
        let fam = build_irreducible(2).unwrap();
        let spec = GeodesicSpec::new(Mat::zeros(4, 4), fam.mats[0].clone(), 1);
        assert_eq!(max_abs(&(midpoint(&spec) - &fam.mats[0])), 0.0);
    }

    #[test]
    fn non_minimal_midpoint_lands_in_other_component() {
        // spectrum (3,1) from I to −I in SO_4: the midpoint is still an
        // algebraic complex structure, but its Pfaffian sign differs from the
        // minimal midpoint's, so it sits in the other component of P̂_1 and
        // cannot continue the reference chain.
        let a = planar(4, &[(0, 3.0), (1, 1.0)]);
        let spec = GeodesicSpec::from_generator(a);
        assert!(spec.endpoint_residual() < 1e-9);
        let m_non = midpoint(&spec);
        let minimal = GeodesicSpec::from_generator(planar(4, &[(0, 1.0), (1, 1.0)]));
        let m_min = midpoint(&minimal);
        let fam = build_irreducible(2).unwrap(); // any Cl-family on R^4 for the predicate
        assert!(membership(&m_non, &fam, 1));
        assert!(membership(&m_min, &fam, 1));
        let pf = |m: &Mat| {
            m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)]
        };
        assert!((pf(&m_min) - 1.0).abs() < 1e-9);
        assert!((pf(&m_non) + 1.0).abs() < 1e-9, "other component");
    }

    #[test]
    fn extension_feasibility_matches_class_balance() {
        // Cl_2 ⊕ J_3-extension on R^8: the balanced splitting extends, the
        // unbalanced one does not.
        let pos = build_irreducible_class(3, false).unwrap();
        let neg = build_irreducible_class(3, true).unwrap();
        let balanced = pos.direct_sum(&neg).unwrap();
        let unbalanced = pos.direct_sum(&pos).unwrap();
        assert!(find_anticommuting_structure(&balanced.mats, 8, 1e-8, 1).is_some());
        assert!(find_anticommuting_structure(&unbalanced.mats, 8, 1e-8, 1).is_none());
    }

    #[test]
    fn geodesic_json_roundtrip() {
        let fam = build_irreducible(3).unwrap();
        let spec = connect_minimal(&fam.mats[0].clone(), &(-&fam.mats[0]), &fam, 1, None).unwrap();
        let js = GeodesicSpecJson::from_spec(&spec);
        let text = serde_json::to_string(&js).unwrap();
        let back: GeodesicSpecJson = serde_json::from_str(&text).unwrap();
        let spec2 = back.to_spec().unwrap();
        assert_eq!(max_abs(&(&spec2.a - &spec.a)), 0.0);
        assert_eq!(spec2.level, 1);
    }
}
