//! Spectral invariants and Morse-index bounds for pole-to-pole geodesics,
//! with a finite-difference Hessian oracle on broken-geodesic polygons.
//!
//! A geodesic `t ↦ e^{πtA}J` with `e^{πA} = −I` has generator eigenvalues
//! `±i k_j` for odd integers `k_j`; everything here is a function of that
//! spectrum and of the ambient context (plain `SO_p`, a unitary commutant,
//! or an iterated centriole level).

use nalgebra::Complex;
use rayon::prelude::*;

use crate::centriole::GeodesicSpec;
use crate::clifford::{irreducible_dim, CliffordFamily};
use crate::error::{Error, Result};
use crate::hopf::chain_complex_structure;
use crate::linalg::{
    commutator_residual, complex_basis, expm, geodesic_distance, max_abs, to_complex_matrix,
    trace_inner, Mat,
};

/// Ambient path space of a geodesic: the rotation group, the unitary group
/// of a commuting complex structure, or a centriole level of a chain.
#[derive(Debug, Clone)]
pub enum GeodesicContext<'a> {
    So,
    Unitary { j_c: &'a Mat },
    Centriole { chain: &'a CliffordFamily, level: usize },
}

impl<'a> GeodesicContext<'a> {
    fn name(&self) -> &'static str {
        match self {
            GeodesicContext::So => "so",
            GeodesicContext::Unitary { .. } => "unitary",
            GeodesicContext::Centriole { .. } => "centriole",
        }
    }
}

/// Multiset of odd integers `k_j` with the real dimensions of their
/// eigenplanes (`Σ dims = p`). `signed` records whether the values carry
/// orientation signs with respect to a complex structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSpectrum {
    pub entries: Vec<(i64, usize)>,
    pub p: usize,
    pub signed: bool,
}

impl KSpectrum {
    pub fn is_minimal(&self) -> bool {
        self.entries.iter().all(|(k, _)| k.abs() == 1)
    }

    pub fn max_abs_k(&self) -> i64 {
        self.entries.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }

    /// Energy `π²·Σ dims·k²/p` of the geodesic under the trace metric.
    pub fn energy(&self) -> f64 {
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = self
            .entries
            .iter()
            .map(|(k, d)| (*k * *k) as f64 * *d as f64)
            .sum();
        pi2 * s / self.p as f64
    }

    /// Σ k_j·dims_j (only meaningful for signed spectra).
    pub fn weighted_sum(&self) -> i64 {
        self.entries.iter().map(|(k, d)| k * *d as i64).sum()
    }
}

/// Generator spectrum of a pole-to-pole geodesic. Unsigned (`k_j > 0`) in
/// the `So` context; signed with respect to the context complex structure
/// otherwise.
pub fn k_spectrum(g: &GeodesicSpec, ctx: &GeodesicContext) -> Result<KSpectrum> {
    let endpoint = g.endpoint_residual();
    if endpoint > 1e-6 {
        return Err(Error::relation(
            "k_spectrum: e^{πA} ≠ −I, not a pole-to-pole geodesic",
            endpoint,
        ));
    }
    match ctx {
        GeodesicContext::So => unsigned_spectrum(g),
        GeodesicContext::Unitary { j_c } => signed_spectrum(g, j_c),
        GeodesicContext::Centriole { chain, level } => {
            if level % 4 == 2 {
                let jo = chain_complex_structure(chain, *level)?;
                signed_spectrum(g, &jo)
            } else {
                unsigned_spectrum(g)
            }
        }
    }
}

fn round_odd(k: f64) -> Result<i64> {
    let r = k.round();
    if (k - r).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "k_spectrum: eigenvalue {k:.8} is not an integer — input not a pole-to-pole geodesic"
        )));
    }
    let ki = r as i64;
    if ki.abs() % 2 != 1 {
        return Err(Error::invalid(format!(
            "k_spectrum: eigenvalue {ki} is even — input not a pole-to-pole geodesic"
        )));
    }
    Ok(ki)
}

fn unsigned_spectrum(g: &GeodesicSpec) -> Result<KSpectrum> {
    let minus_a2 = -(&g.a * &g.a);
    let sym = (&minus_a2 + &minus_a2.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut counts: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for v in eig.eigenvalues.iter() {
        let k = round_odd(v.max(0.0).sqrt())?;
        *counts.entry(k).or_insert(0) += 1;
    }
    finish_spectrum(counts, g.p(), false)
}

fn signed_spectrum(g: &GeodesicSpec, j_c: &Mat) -> Result<KSpectrum> {
    let res = commutator_residual(&g.a, j_c);
    if res > 1e-8 {
        return Err(Error::relation(
            "k_spectrum: generator does not commute with the context complex structure",
            res,
        ));
    }
    let basis = complex_basis(j_c)?;
    let a_c = to_complex_matrix(&g.a, j_c, &basis);
    // A is skew-Hermitian over C; −i·A is Hermitian with eigenvalues k_j
    let h = a_c.map(|z| z * Complex::new(0.0, -1.0));
    let h = (&h + &h.adjoint()) * Complex::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut counts: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for v in eig.eigenvalues.iter() {
        let k = round_odd(*v)?;
        *counts.entry(k).or_insert(0) += 2; // real dimension of a complex line
    }
    finish_spectrum(counts, g.p(), true)
}

fn finish_spectrum(
    counts: std::collections::BTreeMap<i64, usize>,
    p: usize,
    signed: bool,
) -> Result<KSpectrum> {
    let total: usize = counts.values().sum();
    if total != p {
        return Err(Error::invalid("k_spectrum: eigenplane dimensions do not sum to p"));
    }
    Ok(KSpectrum {
        entries: counts.into_iter().collect(),
        p,
        signed,
    })
}

/// Whether all `|k_j| = 1`; cross-checked against the energy `E = π²`.
pub fn is_minimal(g: &GeodesicSpec, ctx: &GeodesicContext) -> Result<bool> {
    let spec = k_spectrum(g, ctx)?;
    let minimal = spec.is_minimal();
    if minimal {
        let e = spec.energy();
        let pi2 = std::f64::consts::PI.powi(2);
        if (e - pi2).abs() > 1e-9 * pi2 {
            return Err(Error::relation("is_minimal: minimal spectrum but E ≠ π²", e - pi2));
        }
    }
    Ok(minimal)
}

/// Winding number of the geodesic: half the sum of the signed eigenvalues
/// counted with complex multiplicity (`¼ Σ k_j·dim_j` in real dimensions).
/// Defined in the unitary context and at centriole levels `ℓ ≡ 2 mod 4`.
pub fn winding_of_geodesic(g: &GeodesicSpec, ctx: &GeodesicContext) -> Result<i64> {
    match ctx {
        GeodesicContext::So => Err(Error::invalid(
            "winding_of_geodesic: undefined in the plain SO context",
        )),
        GeodesicContext::Centriole { level, .. } if level % 4 != 2 => Err(Error::invalid(
            "winding_of_geodesic: centriole winding needs ℓ ≡ 2 mod 4",
        )),
        _ => {
            let spec = k_spectrum(g, ctx)?;
            let s = spec.weighted_sum();
            if s % 4 != 0 {
                return Err(Error::invalid("winding_of_geodesic: non-integer winding"));
            }
            Ok(s / 4)
        }
    }
}

/// Context-appropriate lower bound for the Morse index of a non-minimal
/// geodesic (0 for minimal ones):
/// `p−2` in `SO_p`; `2Σ_{k_j>k_h}((k_j−k_h)/2 − 1)` over complex eigenvalue
/// pairs in the unitary case; the same sum without the factor 2 over module
/// pairs at levels `ℓ ≡ 2 mod 4`; and `p/s_{ℓ+1}` at the other levels.
pub fn index_lower_bound(g: &GeodesicSpec, ctx: &GeodesicContext) -> Result<i64> {
    let spec = k_spectrum(g, ctx)?;
    if spec.is_minimal() {
        return Ok(0);
    }
    match ctx {
        GeodesicContext::So => Ok(g.p() as i64 - 2),
        GeodesicContext::Unitary { .. } => Ok(2 * pair_sum(&spec, 2)),
        GeodesicContext::Centriole { chain: _, level } => {
            if level % 4 == 2 {
                let s_ell = irreducible_dim(*level);
                Ok(pair_sum(&spec, s_ell as i64))
            } else {
                // index > r−1 with r = p/s_{ℓ+1}
                let s_next = irreducible_dim(level + 1) as i64;
                Ok(g.p() as i64 / s_next)
            }
        }
    }
}

/// `Σ_{k_j > k_h} n_j n_h ((k_j − k_h)/2 − 1)` with `n = dim/unit`.
fn pair_sum(spec: &KSpectrum, unit: i64) -> i64 {
    let mut total = 0;
    for (i, (kj, dj)) in spec.entries.iter().enumerate() {
        for (kh, dh) in spec.entries.iter().take(i) {
            // entries are sorted ascending: kh < kj
            let nj = *dj as i64 / unit;
            let nh = *dh as i64 / unit;
            total += nj * nh * ((kj - kh) / 2 - 1);
        }
    }
    total
}

/// Threshold hypothesis of the index propositions: in the unitary context
/// `q − 2|w| ≥ 2d` (complex dimension `q`), at a centriole level
/// `ℓ ≡ 2 mod 4` the bound `p − 4|w| ≥ 4d·s_ℓ`. When it holds, every
/// non-minimal geodesic in the winding-`w` component has index > d.
pub fn threshold_check(g: &GeodesicSpec, ctx: &GeodesicContext, d: i64) -> Result<bool> {
    let spec = k_spectrum(g, ctx)?;
    if spec.is_minimal() {
        return Ok(true); // vacuous: the propositions only constrain non-minimal geodesics
    }
    let w = winding_of_geodesic(g, ctx)?;
    match ctx {
        GeodesicContext::Unitary { .. } => {
            let q = g.p() as i64 / 2;
            Ok(q - 2 * w.abs() >= 2 * d)
        }
        GeodesicContext::Centriole { level, .. } => {
            let s_ell = irreducible_dim(*level) as i64;
            Ok(g.p() as i64 - 4 * w.abs() >= 4 * d * s_ell)
        }
        GeodesicContext::So => Err(Error::invalid("threshold_check: no winding in SO context")),
    }
}

/// Result of the numerical Hessian oracle: negative and (near-)null
/// eigenvalue counts of the discrete energy Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCount {
    pub index: usize,
    pub nullity: usize,
}

/// Options for the Hessian assembly.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Base finite-difference step (Richardson-refined with `h/2`).
    pub step: f64,
    /// Eigenvalues below `−cutoff` count as negative; within `±cutoff` as null.
    pub cutoff: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            step: 1e-3,
            cutoff: 1e-7,
        }
    }
}

/// Morse index of a geodesic, measured numerically: the number of negative
/// eigenvalues of the energy Hessian on the broken-geodesic polygon with
/// `n_segments` segments, with vertex perturbations constrained to the
/// context tangent space. Nullity (the critical orbit directions) is
/// reported separately.
pub fn hessian_index_oracle(
    g: &GeodesicSpec,
    ctx: &GeodesicContext,
    n_segments: usize,
    opts: &OracleOptions,
) -> Result<OracleCount> {
    let p = g.p();
    let spec = k_spectrum(g, ctx)?;
    // convexity guard: trace-metric segment length < π/2 and operator angle ≤ π/2
    let total_len = std::f64::consts::PI * (spec.energy() / std::f64::consts::PI.powi(2)).sqrt();
    if total_len / n_segments as f64 >= std::f64::consts::FRAC_PI_2
        || (n_segments as i64) < 2 * spec.max_abs_k()
    {
        return Err(Error::invalid(format!(
            "hessian oracle: discretization too coarse (n_segments = {n_segments})"
        )));
    }
    let vertices: Vec<Mat> = (0..=n_segments)
        .map(|i| g.at(i as f64 / n_segments as f64))
        .collect();

    // per-vertex orthonormal tangent bases
    let bases: Vec<Vec<Mat>> = vertices[1..n_segments]
        .iter()
        .map(|v| tangent_basis(v, ctx, p))
        .collect::<Result<Vec<_>>>()?;
    let d_t = bases[0].len();
    if bases.iter().any(|b| b.len() != d_t) {
        return Err(Error::invalid("hessian oracle: tangent dimension varies along the path"));
    }
    let dim = (n_segments - 1) * d_t;
    let n_f = n_segments as f64;

    // criticality check: first differences of E vanish at the geodesic
    let h0 = opts.step;
    for (vi, basis) in bases.iter().enumerate().take(2.min(bases.len())) {
        let k = vi + 1;
        for dir in basis.iter().take(2.min(d_t)) {
            let plus = local_energy(&vertices, k, &(expm(&(dir * h0)) * &vertices[k]), n_f);
            let minus = local_energy(&vertices, k, &(expm(&(dir * -h0)) * &vertices[k]), n_f);
            let grad = (plus - minus) / (2.0 * h0);
            if grad.abs() > 1e-5 {
                return Err(Error::relation(
                    "hessian oracle: input is not a critical point of E",
                    grad.abs(),
                ));
            }
        }
    }

    let assemble = |h: f64| -> Mat {
        let mut hess = Mat::zeros(dim, dim);
        // diagonal vertex blocks
        let diag_blocks: Vec<(usize, Mat)> = (1..n_segments)
            .into_par_iter()
            .map(|k| {
                let basis = &bases[k - 1];
                let mut block = Mat::zeros(d_t, d_t);
                let e0 = local_energy(&vertices, k, &vertices[k], n_f);
                for a in 0..d_t {
                    let vp = expm(&(&basis[a] * h)) * &vertices[k];
                    let vm = expm(&(&basis[a] * -h)) * &vertices[k];
                    let ep = local_energy(&vertices, k, &vp, n_f);
                    let em = local_energy(&vertices, k, &vm, n_f);
                    block[(a, a)] = (ep - 2.0 * e0 + em) / (h * h);
                    for b in (a + 1)..d_t {
                        let dirs = [
                            (&basis[a] + &basis[b]) * h,
                            (&basis[a] - &basis[b]) * h,
                            (&basis[b] - &basis[a]) * h,
                            (&basis[a] + &basis[b]) * -h,
                        ];
                        let es: Vec<f64> = dirs
                            .iter()
                            .map(|d| local_energy(&vertices, k, &(expm(d) * &vertices[k]), n_f))
                            .collect();
                        let mixed = (es[0] - es[1] - es[2] + es[3]) / (4.0 * h * h);
                        block[(a, b)] = mixed;
                        block[(b, a)] = mixed;
                    }
                }
                (k, block)
            })
            .collect();
        for (k, block) in diag_blocks {
            let off = (k - 1) * d_t;
            hess.view_mut((off, off), (d_t, d_t)).copy_from(&block);
        }
        // adjacent vertex blocks couple through the shared segment only
        let adj_blocks: Vec<(usize, Mat)> = (1..n_segments - 1)
            .into_par_iter()
            .map(|k| {
                let ba = &bases[k - 1];
                let bb = &bases[k];
                let a_pert: Vec<(Mat, Mat)> = ba
                    .iter()
                    .map(|d| {
                        (
                            expm(&(d * h)) * &vertices[k],
                            expm(&(d * -h)) * &vertices[k],
                        )
                    })
                    .collect();
                let b_pert: Vec<(Mat, Mat)> = bb
                    .iter()
                    .map(|d| {
                        (
                            expm(&(d * h)) * &vertices[k + 1],
                            expm(&(d * -h)) * &vertices[k + 1],
                        )
                    })
                    .collect();
                let seg = |u: &Mat, w: &Mat| {
                    let d = geodesic_distance(u, w);
                    n_f * d * d
                };
                let mut block = Mat::zeros(d_t, d_t);
                for a in 0..d_t {
                    let (vap, vam) = &a_pert[a];
                    for b in 0..d_t {
                        let (vbp, vbm) = &b_pert[b];
                        let mixed = (seg(vap, vbp) - seg(vap, vbm) - seg(vam, vbp)
                            + seg(vam, vbm))
                            / (4.0 * h * h);
                        block[(a, b)] = mixed;
                    }
                }
                (k, block)
            })
            .collect();
        for (k, block) in adj_blocks {
            let ra = (k - 1) * d_t;
            let rb = k * d_t;
            hess.view_mut((ra, rb), (d_t, d_t)).copy_from(&block);
            hess.view_mut((rb, ra), (d_t, d_t)).copy_from(&block.transpose());
        }
        hess
    };

    let h_coarse = assemble(opts.step);
    let h_fine = assemble(opts.step / 2.0);
    let refined = (h_fine * 4.0 - h_coarse) / 3.0;
    let asym = max_abs(&(&refined - &refined.transpose()));
    if asym > 1e-6 {
        return Err(Error::relation("hessian oracle: assembly asymmetry", asym));
    }
    let sym = (&refined + &refined.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut index = 0;
    let mut nullity = 0;
    for v in eig.eigenvalues.iter() {
        if *v < -opts.cutoff {
            index += 1;
        } else if *v <= opts.cutoff {
            nullity += 1;
        }
    }
    Ok(OracleCount { index, nullity })
}

/// Energy of the (at most two) segments meeting vertex `k`, with the vertex
/// replaced by `v_new`.
fn local_energy(vertices: &[Mat], k: usize, v_new: &Mat, n: f64) -> f64 {
    let mut e = 0.0;
    if k >= 1 {
        let d = geodesic_distance(&vertices[k - 1], v_new);
        e += n * d * d;
    }
    if k + 1 < vertices.len() {
        let d = geodesic_distance(v_new, &vertices[k + 1]);
        e += n * d * d;
    }
    e
}

/// Orthonormal (trace metric) basis of the admissible perturbation
/// generators at a vertex: all of `so(p)`, the commutant of a complex
/// structure, or the tangent generators of a centriole level.
fn tangent_basis(v: &Mat, ctx: &GeodesicContext, p: usize) -> Result<Vec<Mat>> {
    let mut raw: Vec<Mat> = Vec::new();
    for r in 0..p {
        for c in (r + 1)..p {
            let mut e = Mat::zeros(p, p);
            e[(r, c)] = 1.0;
            e[(c, r)] = -1.0;
            let projected = match ctx {
                GeodesicContext::So => e,
                GeodesicContext::Unitary { j_c } => (&e - *j_c * &e * *j_c) * 0.5,
                GeodesicContext::Centriole { chain, level } => {
                    // skew A with A anticommuting with the vertex and
                    // commuting with J_1..J_{ℓ−1}
                    let mut x = (&e + v * &e * v) * 0.5;
                    for ji in chain.mats.iter().take(level.saturating_sub(1)) {
                        x = (&x - ji * &x * ji) * 0.5;
                    }
                    x
                }
            };
            if max_abs(&projected) > 1e-10 {
                raw.push(projected);
            }
        }
    }
    // modified Gram-Schmidt under the trace inner product
    let mut basis: Vec<Mat> = Vec::new();
    for mut x in raw {
        for b in &basis {
            let c = trace_inner(b, &x);
            x -= b * c;
        }
        let norm = trace_inner(&x, &x).sqrt();
        if norm > 1e-8 {
            basis.push(x / norm);
        }
    }
    if basis.is_empty() {
        return Err(Error::invalid("hessian oracle: empty tangent space"));
    }
    Ok(basis)
}

/// All multisets of size `blocks` over the odd values `±1, ±3, …, ±max_k`
/// (or `1..max_k` when unsigned) — the fixture enumeration for oracle runs.
pub fn enumerate_spectra(max_k: i64, blocks: usize, signed: bool) -> Vec<Vec<i64>> {
    let mut values: Vec<i64> = Vec::new();
    let mut k = 1;
    while k <= max_k {
        values.push(k);
        if signed {
            values.push(-k);
        }
        k += 2;
    }
    values.sort_unstable();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(blocks);
    fn rec(values: &[i64], start: usize, left: usize, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for i in start..values.len() {
            current.push(values[i]);
            rec(values, i, left - 1, current, out);
            current.pop();
        }
    }
    rec(&values, 0, blocks, &mut current, &mut out);
    out
}

/// Block-diagonal planar generator with the given angular speeds
/// (`p = 2·len`), commuting with the standard complex structure.
pub fn planar_generator(ks: &[i64]) -> Mat {
    let p = 2 * ks.len();
    let mut a = Mat::zeros(p, p);
    for (b, &k) in ks.iter().enumerate() {
        a[(2 * b, 2 * b + 1)] = -(k as f64);
        a[(2 * b + 1, 2 * b)] = k as f64;
    }
    a
}

/// Standard block complex structure `diag(J₂, …, J₂)` on `R^{2q}`.
pub fn standard_complex_structure(q: usize) -> Mat {
    planar_generator(&vec![1; q])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centriole::{connect_minimal, GeodesicSpec};
    use crate::clifford::build_irreducible;

    fn so_spec(ks: &[i64]) -> GeodesicSpec {
        GeodesicSpec::from_generator(planar_generator(ks))
    }

    #[test]
    fn spectrum_of_single_structure() {
        let g = so_spec(&[1, 1, 1]);
        let s = k_spectrum(&g, &GeodesicContext::So).unwrap();
        assert_eq!(s.entries, vec![(1, 6)]);
        assert!(s.is_minimal());
    }

    #[test]
    fn spectrum_three_one() {
        let g = so_spec(&[3, 1]);
        let s = k_spectrum(&g, &GeodesicContext::So).unwrap();
        assert_eq!(s.entries, vec![(1, 2), (3, 2)]);
        assert!(!s.is_minimal());
        // E = π²(9+1)/2 / ... = 5π² on p = 4
        let e = s.energy();
        assert!((e - 5.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_even_speeds() {
        let g = GeodesicSpec::from_generator(planar_generator(&[2]));
        assert!(k_spectrum(&g, &GeodesicContext::So).is_err());
    }

    #[test]
    fn signed_spectrum_in_unitary_context() {
        let jc = standard_complex_structure(2);
        let g = so_spec(&[3, -1]);
        let ctx = GeodesicContext::Unitary { j_c: &jc };
        let s = k_spectrum(&g, &ctx).unwrap();
        assert_eq!(s.entries, vec![(-1, 2), (3, 2)]);
        assert!(s.signed);
    }

    #[test]
    fn minimality_checks_energy() {
        let g = so_spec(&[1, -1]);
        assert!(is_minimal(&g, &GeodesicContext::So).unwrap());
        let g2 = so_spec(&[3, 1]);
        assert!(!is_minimal(&g2, &GeodesicContext::So).unwrap());
    }

    #[test]
    fn winding_values() {
        let jc = standard_complex_structure(4);
        let ctx = GeodesicContext::Unitary { j_c: &jc };
        // all +1 on C⁴: w = q/2·... = ¼·Σk·dim = ¼·8 = 2 = q/2
        let g = so_spec(&[1, 1, 1, 1]);
        assert_eq!(winding_of_geodesic(&g, &ctx).unwrap(), 2);
        // balanced spectrum: w = 0
        let g0 = so_spec(&[1, 1, -1, -1]);
        assert_eq!(winding_of_geodesic(&g0, &ctx).unwrap(), 0);
        assert!(winding_of_geodesic(&g0, &GeodesicContext::So).is_err());
    }

    #[test]
    fn centriole_reference_winding_is_quarter_p() {
        // γ(t) = e^{πit}J_ℓ at ℓ = 2 on the doubled positive module, p = 8
        let fam = build_irreducible(3).unwrap().repeated(2).unwrap();
        let spec = connect_minimal(&fam.mats[1].clone(), &(-&fam.mats[1]), &fam, 2, None).unwrap();
        let ctx = GeodesicContext::Centriole { chain: &fam, level: 2 };
        assert_eq!(winding_of_geodesic(&spec, &ctx).unwrap(), 2); // p/4
    }

    #[test]
    fn lower_bound_values() {
        let jc = standard_complex_structure(2);
        let g = so_spec(&[3, -1]);
        assert_eq!(
            index_lower_bound(&g, &GeodesicContext::Unitary { j_c: &jc }).unwrap(),
            2
        );
        assert_eq!(index_lower_bound(&g, &GeodesicContext::So).unwrap(), 2); // p − 2
        let minimal = so_spec(&[1, 1]);
        assert_eq!(index_lower_bound(&minimal, &GeodesicContext::So).unwrap(), 0);
    }

    #[test]
    fn centriole_b_bound_can_be_weak() {
        // spectrum {3,1,1,1} at ℓ = 2: the pair sum over modules vanishes
        let fam = build_irreducible(3).unwrap().repeated(4).unwrap(); // p = 16
        let jo = fam.mats[0].clone();
        // A = diag over the four S_3-blocks: 3·J_o on the first, 1 on the rest
        let mut a = Mat::zeros(16, 16);
        for blk in 0..4 {
            let speed = if blk == 0 { 3.0 } else { 1.0 };
            for r in 0..4 {
                for c in 0..4 {
                    a[(4 * blk + r, 4 * blk + c)] = speed * jo[(r, c)];
                }
            }
        }
        let spec = GeodesicSpec::new(a, fam.mats[1].clone(), 2);
        spec.validate(&fam).unwrap();
        let ctx = GeodesicContext::Centriole { chain: &fam, level: 2 };
        let ks = k_spectrum(&spec, &ctx).unwrap();
        assert_eq!(ks.entries, vec![(1, 12), (3, 4)]);
        assert_eq!(index_lower_bound(&spec, &ctx).unwrap(), 0);
    }

    #[test]
    fn threshold_examples() {
        // U_8 (q = 8): w = 0, d = 3: 8 − 0 ≥ 6 holds
        let jc = standard_complex_structure(8);
        let ctx = GeodesicContext::Unitary { j_c: &jc };
        let g = so_spec(&[3, 3, -1, -1, -1, -1, -1, 3]); // Σk = 4 → w = 2
        let g0 = so_spec(&[3, -3, 1, -1, 1, -1, 1, -1]); // Σk = 0 → w = 0
        assert_eq!(winding_of_geodesic(&g0, &ctx).unwrap(), 0);
        assert!(threshold_check(&g0, &ctx, 3).unwrap());
        let w = winding_of_geodesic(&g, &ctx).unwrap();
        assert_eq!(w, 2);
        // 8 − 4 = 4 ≥ 2d fails at d = 3
        assert!(!threshold_check(&g, &ctx, 3).unwrap());
        // minimal specs are vacuously fine
        let m = so_spec(&[1, 1, 1, 1, 1, 1, 1, 1]);
        assert!(threshold_check(&m, &ctx, 100).unwrap());
    }

    #[test]
    fn oracle_zero_index_for_minimal_so4() {
        let g = so_spec(&[1, 1]);
        let count = hessian_index_oracle(
            &g,
            &GeodesicContext::So,
            8,
            &OracleOptions::default(),
        )
        .unwrap();
        assert_eq!(count.index, 0, "minimum of E has no negative modes");
    }

    #[test]
    fn oracle_meets_so4_bound_for_three_one() {
        let g = so_spec(&[3, 1]);
        let count = hessian_index_oracle(
            &g,
            &GeodesicContext::So,
            12,
            &OracleOptions::default(),
        )
        .unwrap();
        assert!(
            count.index >= 2,
            "index of the (3,1) geodesic in SO_4 is at least p−2 = 2, got {}",
            count.index
        );
    }

    #[test]
    fn oracle_meets_unitary_bound() {
        let jc = standard_complex_structure(2);
        let g = so_spec(&[3, -1]);
        let ctx = GeodesicContext::Unitary { j_c: &jc };
        let count = hessian_index_oracle(&g, &ctx, 12, &OracleOptions::default()).unwrap();
        let bound = index_lower_bound(&g, &ctx).unwrap();
        assert!(bound == 2 && count.index as i64 >= bound, "oracle {count:?} vs bound {bound}");
    }

    #[test]
    fn oracle_rejects_coarse_discretization() {
        let g = so_spec(&[5, 1]);
        assert!(hessian_index_oracle(&g, &GeodesicContext::So, 4, &OracleOptions::default()).is_err());
    }

    #[test]
    fn oracle_monotone_in_segments() {
        let g = so_spec(&[3, 1]);
        let mut last = 0;
        for n in [8usize, 12, 16] {
            let count =
                hessian_index_oracle(&g, &GeodesicContext::So, n, &OracleOptions::default())
                    .unwrap();
            assert!(count.index >= last, "index non-decreasing in n_segments");
            last = count.index;
        }
    }

    #[test]
    fn enumerate_spectra_counts() {
        // multisets of size 2 over {1,3}: {1,1},{1,3},{3,3}
        assert_eq!(enumerate_spectra(3, 2, false).len(), 3);
        // signed: values {−3,−1,1,3}: C(4+2−1,2) = 10
        assert_eq!(enumerate_spectra(3, 2, true).len(), 10);
    }
}
