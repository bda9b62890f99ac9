//! Discrete curve shortening on geodesic polygons in `SO(p)` and the
//! deformation pipeline for sampled sphere maps.
//!
//! Paths are polygons with vertices joined by short geodesics; the energy
//! is `n·Σ d(v_{k−1},v_k)²` under the trace metric. Shortening uses
//! Birkhoff midpoint sweeps (unconditionally monotone) with an optional
//! explicit gradient mode. Sphere maps are sampled on iterated meridian
//! grids `[0,1]^k`; suspension inversion shortens all meridians of a
//! normalized grid and descends to the midpoint map on the equator.
//!
//! Every deformation step is an explicit homotopy: endpoint drags run along
//! shortened bridge paths, base-meridian straightening replays the recorded
//! shortening track inside a collar, and the flow itself moves vertices
//! continuously. Windings are therefore conserved across the pipeline,
//! which the loop stage checks by integer comparison.

use rayon::prelude::*;

use crate::centriole::{membership, midpoint as spec_midpoint, GeodesicSpec};
use crate::clifford::{is_positive, CliffordFamily};
use crate::error::{Error, Result};
use crate::hopf::{chain_complex_structure, winding_number_det, AffineHopfMap};
use crate::linalg::{
    complex_basis, expm, geodesic_distance, geodesic_point, log_rotation, max_abs,
    max_rotation_angle, polar_complex_structure, to_complex_matrix, Mat,
};

/// Convexity radius guard for polygon segments (trace metric).
pub const CONVEXITY_RADIUS: f64 = std::f64::consts::FRAC_PI_2;

/// Resolution guard for meridian grids (operator geodesic distance).
pub const GRID_STEP_BOUND: f64 = std::f64::consts::FRAC_PI_4;

const PI: f64 = std::f64::consts::PI;

/// Geodesic polygon with pinned endpoints; `level ≥ 1` constrains the
/// interior vertices to the centriole `P̂_level` of an ambient chain.
#[derive(Debug, Clone)]
pub struct PolygonPath {
    pub vertices: Vec<Mat>,
    pub level: usize,
}

impl PolygonPath {
    pub fn new(vertices: Vec<Mat>, level: usize) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::invalid("polygon: need at least two vertices"));
        }
        Ok(PolygonPath { vertices, level })
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Largest trace-metric segment length.
    pub fn max_segment(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| geodesic_distance(&w[0], &w[1]))
            .fold(0.0, f64::max)
    }

    pub fn check_guard(&self) -> Result<()> {
        let m = self.max_segment();
        if m >= CONVEXITY_RADIUS {
            return Err(Error::invalid(format!(
                "polygon: segment length {m:.4} violates the convexity guard {CONVEXITY_RADIUS:.4}"
            )));
        }
        Ok(())
    }
}

/// Discrete energy `E(ω) = n·Σ d(v_{k−1},v_k)²`.
pub fn energy(path: &PolygonPath) -> f64 {
    vertex_energy(&path.vertices)
}

fn vertex_energy(verts: &[Mat]) -> f64 {
    let n = (verts.len() - 1) as f64;
    verts
        .windows(2)
        .map(|w| {
            let d = geodesic_distance(&w[0], &w[1]);
            n * d * d
        })
        .sum()
}

/// Sample a continuous path into a polygon with `n` segments, guarding
/// `n > c/R²` for the caller's energy bound `c`.
pub fn sample_to_polygon<F: Fn(f64) -> Mat>(
    curve: F,
    n: usize,
    energy_bound: f64,
    level: usize,
) -> Result<PolygonPath> {
    if (n as f64) <= energy_bound / (CONVEXITY_RADIUS * CONVEXITY_RADIUS) {
        return Err(Error::invalid(format!(
            "sample_to_polygon: n = {n} too small for energy bound {energy_bound:.3} (need n > {:.3})",
            energy_bound / (CONVEXITY_RADIUS * CONVEXITY_RADIUS)
        )));
    }
    let vertices: Vec<Mat> = (0..=n).map(|k| curve(k as f64 / n as f64)).collect();
    let path = PolygonPath::new(vertices, level)?;
    path.check_guard()?;
    Ok(path)
}

/// Vertex update rule for [`shorten`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortenMode {
    /// Midpoint averaging sweeps (default; monotone by construction).
    Birkhoff,
    /// Explicit Riemannian gradient steps with backtracking.
    Gradient,
}

/// Options for the shortening flow.
#[derive(Debug, Clone)]
pub struct ShortenOptions {
    pub mode: ShortenMode,
    pub max_iters: usize,
    /// Stop when the energy decrease per iteration falls below this.
    pub min_delta: f64,
    /// Gradient step scale (gradient mode only).
    pub step: f64,
    /// Known minimum energy of the component; enables deterministic
    /// saddle-escape perturbations when the flow stalls above it.
    pub target_energy: Option<f64>,
    pub seed: u64,
    /// Record every intermediate vertex set (homotopy track).
    pub record_frames: bool,
}

impl Default for ShortenOptions {
    fn default() -> Self {
        ShortenOptions {
            mode: ShortenMode::Birkhoff,
            max_iters: 5000,
            min_delta: 1e-12,
            step: 0.5,
            target_energy: None,
            seed: 1,
            record_frames: false,
        }
    }
}

/// Result of a shortening run.
#[derive(Debug, Clone)]
pub struct ShortenOutcome {
    pub path: PolygonPath,
    pub iterations: usize,
    pub final_energy: f64,
    pub energies: Vec<f64>,
    pub perturbations: usize,
    pub frames: Vec<Vec<Mat>>,
}

/// Project a matrix onto the constraint set of `P̂_level`: the nearest
/// complex structure anticommuting with `J_1..J_{level−1}`.
fn project_to_level(m: &Mat, chain: &CliffordFamily, level: usize) -> Result<Mat> {
    if level == 0 {
        return Ok(m.clone());
    }
    let mut x = (m - &m.transpose()) * 0.5;
    for ji in chain.mats.iter().take(level - 1) {
        x = (&x + ji * &x * ji) * 0.5;
    }
    polar_complex_structure(&x).map_err(|_| {
        Error::invalid("constraint projection failed: no nearby point of the centriole")
    })
}

/// Curve shortening with pinned endpoints. Energy never increases; at
/// `level ≥ 1` every updated vertex is reprojected onto the centriole.
pub fn shorten(
    path: &PolygonPath,
    chain: &CliffordFamily,
    opts: &ShortenOptions,
) -> Result<ShortenOutcome> {
    use rand::SeedableRng;
    path.check_guard()?;
    let mut verts = path.vertices.clone();
    let n = verts.len();
    let mut energies = vec![vertex_energy(&verts)];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut perturbations = 0usize;
    let mut frames: Vec<Vec<Mat>> = Vec::new();
    if opts.record_frames {
        frames.push(verts.clone());
    }

    let mut iterations = 0usize;
    for iter in 0..opts.max_iters {
        iterations = iter + 1;
        let before = *energies.last().unwrap();
        match opts.mode {
            ShortenMode::Birkhoff => {
                // odd sweep then even sweep: each vertex moves to the
                // midpoint of its (momentarily fixed) neighbours
                for parity in [1usize, 0usize] {
                    for k in (1..n - 1).filter(|k| k % 2 == parity) {
                        let mid = crate::linalg::geodesic_midpoint(&verts[k - 1], &verts[k + 1])?;
                        verts[k] = project_to_level(&mid, chain, path.level)?;
                    }
                }
            }
            ShortenMode::Gradient => {
                gradient_sweep(&mut verts, chain, path.level, opts.step)?;
            }
        }
        let mut after = vertex_energy(&verts);
        if after > before + 1e-10 * (1.0 + before) {
            return Err(Error::convergence(
                "shorten",
                format!("energy increased from {before:.12} to {after:.12}"),
            ));
        }
        let at_target = opts
            .target_energy
            .map(|t| after <= t + 1e-8)
            .unwrap_or(false);
        let stalled = before - after < opts.min_delta;
        let mut done = stalled || at_target;
        if stalled && !at_target {
            if let Some(target) = opts.target_energy {
                if after > target + 1e-6 {
                    // stalled above the minimum band: deterministic kick
                    for v in verts.iter_mut().skip(1).take(n - 2) {
                        let kick = crate::linalg::random_skew(&mut rng, v.nrows(), 1e-6);
                        let moved = expm(&kick) * &*v;
                        *v = project_to_level(&moved, chain, path.level)?;
                    }
                    perturbations += 1;
                    after = vertex_energy(&verts);
                    done = false;
                }
            }
        }
        energies.push(after);
        if opts.record_frames {
            frames.push(verts.clone());
        }
        if done {
            break;
        }
    }
    let final_energy = *energies.last().unwrap();
    Ok(ShortenOutcome {
        path: PolygonPath {
            vertices: verts,
            level: path.level,
        },
        iterations,
        final_energy,
        energies,
        perturbations,
        frames,
    })
}

fn gradient_sweep(
    verts: &mut [Mat],
    chain: &CliffordFamily,
    level: usize,
    step: f64,
) -> Result<()> {
    let n = verts.len();
    for k in 1..n - 1 {
        let a_prev = log_rotation(&(verts[k].transpose() * &verts[k - 1]))?;
        let a_next = log_rotation(&(verts[k].transpose() * &verts[k + 1]))?;
        let dir = (a_prev + a_next) * 0.5;
        let local = |v: &Mat| {
            let d1 = geodesic_distance(&verts[k - 1], v);
            let d2 = geodesic_distance(v, &verts[k + 1]);
            d1 * d1 + d2 * d2
        };
        let base = local(&verts[k]);
        let mut tau = step;
        // backtracking keeps the sweep monotone for any step scale
        for _ in 0..24 {
            let cand = project_to_level(&(&verts[k] * expm(&(&dir * tau))), chain, level)?;
            if local(&cand) <= base {
                verts[k] = cand;
                break;
            }
            tau *= 0.5;
        }
    }
    Ok(())
}

/// Sampled map of a `k`-sphere into `SO(p)` in iterated meridian
/// coordinates `[0,1]^k` (`res` points per axis, inclusive endpoints).
///
/// Axis 0 is the meridian parameter of the outermost suspension; the last
/// axis is the angle `2πt` of the innermost circle. `level` records the
/// centriole constraint the values satisfy.
#[derive(Debug, Clone)]
pub struct MeridianGrid {
    pub k: usize,
    pub res: usize,
    pub p: usize,
    pub level: usize,
    pub values: Vec<Mat>,
}

impl MeridianGrid {
    pub fn node_count(&self) -> usize {
        self.res.pow(self.k as u32)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.k];
        for a in (0..self.k.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.res;
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let strides = self.strides();
        idx.iter().zip(&strides).map(|(i, s)| i * s).sum()
    }

    pub fn value(&self, idx: &[usize]) -> &Mat {
        &self.values[self.flat_index(idx)]
    }

    /// Embedded sphere point of a coordinate tuple (unit vector in R^{k+1}).
    pub fn sphere_point(coords: &[f64]) -> Vec<f64> {
        let k = coords.len();
        if k == 1 {
            let t = coords[0];
            return vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()];
        }
        let t = coords[0];
        let inner = Self::sphere_point(&coords[1..]);
        let mut out = Vec::with_capacity(k + 1);
        out.push((PI * t).cos());
        let s = (PI * t).sin();
        out.extend(inner.into_iter().map(|x| s * x));
        out
    }

    /// Build a grid by sampling a map defined on embedded sphere points.
    pub fn from_map<F: Fn(&[f64]) -> Mat>(
        k: usize,
        res: usize,
        level: usize,
        f: F,
    ) -> Result<MeridianGrid> {
        if k == 0 || res < 4 {
            return Err(Error::invalid("grid: need k ≥ 1 and res ≥ 4"));
        }
        let count = res.pow(k as u32);
        let mut values = Vec::with_capacity(count);
        let mut idx = vec![0usize; k];
        for flat in 0..count {
            let mut rem = flat;
            for a in (0..k).rev() {
                idx[a] = rem % res;
                rem /= res;
            }
            let coords: Vec<f64> = idx.iter().map(|i| *i as f64 / (res - 1) as f64).collect();
            let point = Self::sphere_point(&coords);
            values.push(f(&point));
        }
        let p = values[0].nrows();
        let grid = MeridianGrid {
            k,
            res,
            p,
            level,
            values,
        };
        grid.check_resolution_guard()?;
        Ok(grid)
    }

    /// Largest operator-geodesic distance between adjacent grid nodes.
    pub fn max_adjacent_step(&self) -> f64 {
        let strides = self.strides();
        let mut worst = 0.0f64;
        for axis in 0..self.k {
            for flat in 0..self.values.len() {
                let i_axis = (flat / strides[axis]) % self.res;
                if i_axis + 1 >= self.res {
                    continue;
                }
                let next = flat + strides[axis];
                let step =
                    max_rotation_angle(&(self.values[flat].transpose() * &self.values[next]));
                worst = worst.max(step);
            }
        }
        worst
    }

    /// Adjacent grid nodes may differ by at most π/4 in operator geodesic
    /// distance.
    pub fn check_resolution_guard(&self) -> Result<()> {
        let strides = self.strides();
        for axis in 0..self.k {
            for flat in 0..self.values.len() {
                let i_axis = (flat / strides[axis]) % self.res;
                if i_axis + 1 >= self.res {
                    continue;
                }
                let next = flat + strides[axis];
                let step =
                    max_rotation_angle(&(self.values[flat].transpose() * &self.values[next]));
                if step >= GRID_STEP_BOUND {
                    return Err(Error::invalid(format!(
                        "grid: adjacent values differ by {step:.3} ≥ π/4 along axis {axis}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// North-pole value (axis-0 coordinate 0; shared by all nodes there).
    pub fn north_value(&self) -> &Mat {
        &self.values[0]
    }

    /// South-pole value (axis-0 coordinate res−1).
    pub fn south_value(&self) -> &Mat {
        let mut idx = vec![0usize; self.k];
        idx[0] = self.res - 1;
        self.value(&idx)
    }

    /// Equator multi-indices (all axes except the meridian axis 0).
    pub fn equator_nodes(&self) -> Vec<Vec<usize>> {
        let inner = self.res.pow((self.k - 1) as u32);
        (0..inner)
            .map(|flat| {
                let mut rem = flat;
                let mut idx = vec![0usize; self.k - 1];
                for a in (0..self.k - 1).rev() {
                    idx[a] = rem % self.res;
                    rem /= self.res;
                }
                idx
            })
            .collect()
    }

    /// Meridian path (axis-0 samples) over an equator node.
    pub fn meridian(&self, equator: &[usize]) -> Vec<Mat> {
        (0..self.res)
            .map(|t| {
                let mut idx = Vec::with_capacity(self.k);
                idx.push(t);
                idx.extend_from_slice(equator);
                self.value(&idx).clone()
            })
            .collect()
    }

    fn set_meridian(&mut self, equator: &[usize], values: &[Mat]) {
        for (t, v) in values.iter().enumerate() {
            let mut idx = Vec::with_capacity(self.k);
            idx.push(t);
            idx.extend_from_slice(equator);
            let flat = self.flat_index(&idx);
            self.values[flat] = v.clone();
        }
    }

    /// Refine every axis to `2·res − 1` points by inserting geodesic
    /// midpoints between neighbours (exact on existing nodes; the result
    /// has odd resolution).
    pub fn upsample(&self) -> Result<MeridianGrid> {
        let new_res = 2 * self.res - 1;
        let count = new_res.pow(self.k as u32);
        let mut values = Vec::with_capacity(count);
        let mut idx = vec![0usize; self.k];
        for flat in 0..count {
            let mut rem = flat;
            for a in (0..self.k).rev() {
                idx[a] = rem % new_res;
                rem /= new_res;
            }
            values.push(refine_value(self, &idx)?);
        }
        let out = MeridianGrid {
            k: self.k,
            res: new_res,
            p: self.p,
            level: self.level,
            values,
        };
        out.check_resolution_guard()?;
        Ok(out)
    }

    /// Pointwise block sum with another grid of the same shape.
    pub fn direct_sum(&self, other: &MeridianGrid) -> Result<MeridianGrid> {
        if self.k != other.k || self.res != other.res {
            return Err(Error::invalid("grid direct sum: shape mismatch"));
        }
        let p = self.p + other.p;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let mut m = Mat::zeros(p, p);
                m.view_mut((0, 0), (self.p, self.p)).copy_from(a);
                m.view_mut((self.p, self.p), (other.p, other.p)).copy_from(b);
                m
            })
            .collect();
        Ok(MeridianGrid {
            k: self.k,
            res: self.res,
            p,
            level: self.level,
            values,
        })
    }

    /// Binary container: `CMGR` magic, u32 header fields, little-endian
    /// row-major f64 matrices.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + self.values.len() * self.p * self.p * 8);
        out.extend_from_slice(b"CMGR");
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        out.extend_from_slice(&(self.res as u32).to_le_bytes());
        out.extend_from_slice(&(self.p as u32).to_le_bytes());
        out.extend_from_slice(&(self.level as u32).to_le_bytes());
        for m in &self.values {
            for i in 0..self.p {
                for j in 0..self.p {
                    out.extend_from_slice(&m[(i, j)].to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<MeridianGrid> {
        if bytes.len() < 24 || &bytes[0..4] != b"CMGR" {
            return Err(Error::invalid("grid container: bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let version = u32_at(4);
        if version != 1 {
            return Err(Error::invalid("grid container: unsupported version"));
        }
        let (k, res, p, level) = (u32_at(8), u32_at(12), u32_at(16), u32_at(20));
        if k == 0 || res < 2 || p == 0 {
            return Err(Error::invalid("grid container: bad header"));
        }
        let count = res.pow(k as u32);
        let need = 24 + count * p * p * 8;
        if bytes.len() != need {
            return Err(Error::invalid(format!(
                "grid container: expected {need} bytes, got {}",
                bytes.len()
            )));
        }
        let mut values = Vec::with_capacity(count);
        let mut off = 24;
        for _ in 0..count {
            let mut m = Mat::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                    off += 8;
                }
            }
            values.push(m);
        }
        Ok(MeridianGrid {
            k,
            res,
            p,
            level,
            values,
        })
    }
}

/// Value at a doubled-grid index: coarse node when all coordinates are
/// even, otherwise the geodesic midpoint over the first odd axis.
fn refine_value(grid: &MeridianGrid, fine_idx: &[usize]) -> Result<Mat> {
    if let Some(axis) = fine_idx.iter().position(|i| i % 2 == 1) {
        let mut lo = fine_idx.to_vec();
        let mut hi = fine_idx.to_vec();
        lo[axis] -= 1;
        hi[axis] += 1;
        crate::linalg::geodesic_midpoint(&refine_value(grid, &lo)?, &refine_value(grid, &hi)?)
    } else {
        let coarse: Vec<usize> = fine_idx.iter().map(|i| i / 2).collect();
        Ok(grid.value(&coarse).clone())
    }
}

/// Resample a sampled path onto `target_points` nodes, proportionally to
/// accumulated arc length, interpolating inside segments by geodesics.
pub fn resample_path(values: &[Mat], target_points: usize) -> Result<Vec<Mat>> {
    if values.len() < 2 || target_points < 2 {
        return Err(Error::invalid("resample: need at least two samples"));
    }
    let mut cum = vec![0.0f64];
    for w in values.windows(2) {
        let d = geodesic_distance(&w[0], &w[1]);
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(target_points);
    out.push(values[0].clone());
    for i in 1..target_points - 1 {
        let s = total * i as f64 / (target_points - 1) as f64;
        let mut seg = 0;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 1e-14 { (s - cum[seg]) / len } else { 0.0 };
        out.push(geodesic_point(&values[seg], &values[seg + 1], t.clamp(0.0, 1.0))?);
    }
    out.push(values[values.len() - 1].clone());
    Ok(out)
}

/// Reference geodesic of a chain at a level: through `J_{ℓ+1}` from the
/// level witness (`I` at level 0).
pub fn reference_geodesic(chain: &CliffordFamily, level: usize) -> Result<GeodesicSpec> {
    if level >= chain.len() {
        return Err(Error::invalid("reference geodesic: chain too short"));
    }
    if level == 0 {
        Ok(GeodesicSpec::from_generator(chain.mats[0].clone()))
    } else {
        crate::centriole::connect_minimal(
            &chain.mats[level - 1].clone(),
            &(-&chain.mats[level - 1]),
            chain,
            level,
            None,
        )
    }
}

/// Report of a meridian normalization.
#[derive(Debug, Clone)]
pub struct NormalizeReport {
    pub unchanged: bool,
    /// Whether the base meridian was brought exactly onto the reference.
    pub straightened: bool,
    /// Largest operator rotation angle of any gauge correction applied.
    pub max_gauge_angle: f64,
    /// Max pointwise change of the grid values.
    pub max_change: f64,
}

impl NormalizeReport {
    fn unchanged() -> Self {
        NormalizeReport {
            unchanged: true,
            straightened: true,
            max_gauge_angle: 0.0,
            max_change: 0.0,
        }
    }
}

/// Deform a based grid so that every meridian runs from the reference's
/// start to its end, and (when reachable) the base meridian carries the
/// reference geodesic itself.
///
/// At level 0 a single right-multiplication gauge `v ↦ v·ω₀(t)⁻¹γ(t)`
/// achieves both at once; the correction factors through the height
/// coordinate, so it is null-homotopic and the class is preserved. At
/// level ≥ 1 the group translation would leave the centriole, so the
/// endpoint is dragged instead along a shortened bridge `β ≃ ω₀⁻¹ ∗ γ`
/// appended to every meridian (an explicit homotopy), and the base
/// meridian is straightened by pointwise transvections
/// `g(t) = exp(½·log(γ(t)·ω₀(t)⁻¹))` — isometries that commute with the
/// lower chain — whenever the two stay inside the conjugation branch.
/// Inputs beyond the branch are left unstraightened (flagged in the
/// report); the deformation pipeline then re-bases after the next
/// suspension by a constant conjugation, under which all windings are
/// invariant.
pub fn normalize_meridian(
    grid: &MeridianGrid,
    chain: &CliffordFamily,
    reference: &GeodesicSpec,
    opts: &ShortenOptions,
) -> Result<(MeridianGrid, NormalizeReport)> {
    let res = grid.res;
    let base_value = reference.at(0.0);
    if max_abs(&(grid.north_value() - &base_value)) > 1e-6 {
        return Err(Error::invalid(
            "normalize_meridian: grid base point differs from reference(0)",
        ));
    }
    let gamma: Vec<Mat> = (0..res)
        .map(|t| reference.at(t as f64 / (res - 1) as f64))
        .collect();

    if grid.k == 1 {
        return normalize_loop(grid, chain, &gamma, opts);
    }

    let base_equator = vec![0usize; grid.k - 1];
    let omega0 = grid.meridian(&base_equator);
    if paths_match(&omega0, &gamma) {
        return Ok((grid.clone(), NormalizeReport::unchanged()));
    }

    if grid.level == 0 {
        // right-multiplication gauges keep SO_p and factor through the
        // height coordinate. Near inputs take the full gauge
        // c(t) = ω₀(t)⁻¹γ(t) (base meridian ↦ γ exactly); far inputs take
        // the short endpoint gauge c(t) = e^{tM} with e^M = −q⁻¹, which
        // only corrects the south pole — it keeps the flow paths short,
        // and the pipeline re-bases after the next suspension.
        let gap = omega0
            .iter()
            .zip(&gamma)
            .map(|(w, g)| max_rotation_angle(&(g * w.transpose())))
            .fold(0.0f64, f64::max);
        let straighten = gap <= CONVEXITY_RADIUS;
        let mut max_angle = 0.0f64;
        let c: Vec<Mat> = if straighten {
            omega0
                .iter()
                .zip(&gamma)
                .map(|(w, g)| {
                    let corr = w.transpose() * g;
                    max_angle = max_angle.max(max_rotation_angle(&corr));
                    corr
                })
                .collect()
        } else {
            let q = grid.south_value();
            let (m1, m2) = endpoint_gauge_factors(&(-q.transpose()), &chain.mats[0])?;
            max_angle = max_rotation_angle(&(-q.transpose()));
            (0..res)
                .map(|t| {
                    let tau = t as f64 / (res - 1) as f64;
                    expm(&(&m1 * tau)) * expm(&(&m2 * tau))
                })
                .collect()
        };
        let mut out = grid.clone();
        for eq in grid.equator_nodes() {
            let meridian = grid.meridian(&eq);
            let corrected: Vec<Mat> =
                meridian.iter().zip(&c).map(|(v, ci)| v * ci).collect();
            out.set_meridian(&eq, &corrected);
        }
        out.check_resolution_guard().map_err(|e| {
            Error::invalid(format!(
                "normalize_meridian: gauge breaks the resolution guard ({e}); increase the resolution"
            ))
        })?;
        let max_change = pointwise_change(grid, &out);
        return Ok((
            out,
            NormalizeReport {
                unchanged: false,
                straightened: straighten,
                max_gauge_angle: max_angle,
                max_change,
            },
        ));
    }

    // level ≥ 1: endpoint drag along a shortened bridge
    let target_south = gamma.last().unwrap().clone();
    let south = grid.south_value().clone();
    let mut dragged = grid.clone();
    if max_abs(&(&south - &target_south)) > 1e-9 {
        let mut guess: Vec<Mat> = omega0.iter().rev().cloned().collect();
        guess.extend(gamma.iter().skip(1).cloned());
        let guess = resample_path(&guess, res)?;
        let bridge = shorten(&PolygonPath::new(guess, grid.level)?, chain, opts)?;
        let beta = bridge.path.vertices;
        for eq in grid.equator_nodes() {
            let mut path = grid.meridian(&eq);
            path.extend(beta.iter().skip(1).cloned());
            let resampled = resample_path(&path, res)?;
            dragged.set_meridian(&eq, &resampled);
        }
        dragged.check_resolution_guard().map_err(|_| {
            Error::invalid(
                "normalize_meridian: resolution too coarse to absorb the endpoint drag",
            )
        })?;
    }

    // in-branch straightening by pointwise transvections
    let omega0_d = dragged.meridian(&base_equator);
    let mut straightened = true;
    let mut max_angle = 0.0f64;
    let mut transvections: Vec<Mat> = Vec::with_capacity(res);
    for (w, target) in omega0_d.iter().zip(&gamma) {
        let ratio = target * w.transpose();
        let angle = max_rotation_angle(&ratio);
        if angle > std::f64::consts::PI - 1e-2 {
            straightened = false;
            break;
        }
        max_angle = max_angle.max(angle);
        transvections.push(expm(&(log_rotation(&ratio)? * 0.5)));
    }
    let out = if straightened {
        let mut candidate = dragged.clone();
        for eq in dragged.equator_nodes() {
            let meridian = dragged.meridian(&eq);
            let corrected: Vec<Mat> = meridian
                .iter()
                .zip(&transvections)
                .map(|(v, g)| g * v * g.transpose())
                .collect();
            candidate.set_meridian(&eq, &corrected);
        }
        // a steep gauge can exceed the node-variation guard at this
        // resolution; fall back to the dragged grid (the pipeline
        // re-bases after the next suspension instead)
        if candidate.check_resolution_guard().is_ok() {
            candidate
        } else {
            straightened = false;
            dragged
        }
    } else {
        dragged
    };

    let max_change = pointwise_change(grid, &out);
    Ok((
        out,
        NormalizeReport {
            unchanged: false,
            straightened,
            max_gauge_angle: max_angle,
            max_change,
        },
    ))
}


/// Two-factor gauge generators `(M₁, M₂)` with `e^{M₁}·e^{M₂} = r`:
/// near-antipodal eigenplanes of `r` are rotated by π through the complex
/// structure nearest to `hint` (any choice has the same endpoint since
/// `e^{πY} = −I`, but the hint keeps the path's class aligned with the
/// ambient chain); the principal log of the residual makes up the rest.
fn endpoint_gauge_factors(r: &Mat, hint: &Mat) -> Result<(Mat, Mat)> {
    let p = r.nrows();
    let margin = 0.3f64;
    let sym = (r + &r.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let threshold = -(margin.cos());
    let mut cols: Vec<usize> = Vec::new();
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v < threshold {
            cols.push(i);
        }
    }
    if cols.is_empty() {
        return Ok((log_rotation(r)?, Mat::zeros(p, p)));
    }
    if cols.len() % 2 != 0 {
        return Err(Error::invalid("endpoint gauge: odd antipodal block"));
    }
    let mut b = Mat::zeros(p, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        b.set_column(j, &eig.eigenvectors.column(c));
    }
    let restricted = b.transpose() * hint * &b;
    let skew = (&restricted - &restricted.transpose()) * 0.5;
    let y = polar_complex_structure(&skew).map_err(|_| {
        Error::invalid("endpoint gauge: hint is degenerate on the antipodal block")
    })?;
    let m1 = &b * y * b.transpose() * PI;
    let m2 = log_rotation(&(expm(&(-&m1)) * r))?;
    Ok((m1, m2))
}

fn paths_match(a: &[Mat], b: &[Mat]) -> bool {
    a.iter().zip(b).all(|(x, y)| max_abs(&(x - y)) <= 1e-9)
}

fn pointwise_change(a: &MeridianGrid, b: &MeridianGrid) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| max_abs(&(x - y)))
        .fold(0.0, f64::max)
}

/// Loop-stage normalization into the concatenation form `γ ∗ γ̃⁻¹` with the
/// first half equal to the reference.
///
/// Both halves are dragged by the bridge `β` shortened from
/// `first⁻¹ ∗ γ`; since `first ∗ β ≃ γ` rel endpoints through the recorded
/// flow, replacing the dragged first half by `γ` keeps the loop in its
/// homotopy class (and hence its winding).
fn normalize_loop(
    grid: &MeridianGrid,
    chain: &CliffordFamily,
    gamma: &[Mat],
    opts: &ShortenOptions,
) -> Result<(MeridianGrid, NormalizeReport)> {
    let res = grid.res;
    if res % 2 == 0 {
        return Err(Error::invalid(
            "normalize_loop: need an odd sample count (antipode on the grid); upsample first",
        ));
    }
    let half = (res - 1) / 2;
    let first: Vec<Mat> = grid.values[..=half].to_vec();
    let second_rev: Vec<Mat> = grid.values[half..].iter().rev().cloned().collect();
    let gamma_half = resample_path(gamma, half + 1)?;
    if paths_match(&first, &gamma_half) {
        return Ok((grid.clone(), NormalizeReport::unchanged()));
    }

    let mut guess: Vec<Mat> = first.iter().rev().cloned().collect();
    guess.extend(gamma_half.iter().skip(1).cloned());
    let guess = resample_path(&guess, half + 1)?;
    let bridge = shorten(&PolygonPath::new(guess, grid.level)?, chain, opts)?;
    let beta = bridge.path.vertices;
    let mut second_path = second_rev;
    second_path.extend(beta.iter().skip(1).cloned());
    let second_d = resample_path(&second_path, half + 1)?;

    let mut values: Vec<Mat> = gamma_half;
    values.extend(second_d.iter().rev().skip(1).cloned());
    let out = MeridianGrid {
        k: 1,
        res,
        p: grid.p,
        level: grid.level,
        values,
    };
    out.check_resolution_guard().map_err(|e| {
        Error::invalid(format!(
            "normalize_loop: normalization breaks the resolution guard ({e})"
        ))
    })?;
    let max_change = pointwise_change(grid, &out);
    Ok((
        out,
        NormalizeReport {
            unchanged: false,
            straightened: true,
            max_gauge_angle: 0.0,
            max_change,
        },
    ))
}


/// Transvection `s` with `s·a·s⁻¹ = b` for two structures of `P̂_level`:
/// `s = exp(½·M)` with `e^M = b·a⁻¹`. At the cut locus the −1 eigenspace
/// of the ratio receives a π-rotation generated by a complex structure
/// anticommuting with `a` and commuting with the lower chain, which keeps
/// the transvection identity and the centralizer membership.
fn transvection_between(a: &Mat, b: &Mat, chain: &CliffordFamily, level: usize) -> Result<Mat> {
    let ratio = b * a.transpose();
    let log = match log_rotation(&ratio) {
        Ok(l) => l,
        Err(_) => {
            let p = ratio.nrows();
            let id = Mat::identity(p, p);
            let shifted = &ratio + &id;
            let svd = shifted.clone().svd(false, true);
            let vt = svd
                .v_t
                .ok_or_else(|| Error::invalid("transvection: svd failed"))?;
            let mut cols: Vec<usize> = Vec::new();
            for (i, sv) in svd.singular_values.iter().enumerate() {
                if *sv < 1e-7 {
                    cols.push(i);
                }
            }
            if cols.is_empty() || cols.len() % 2 != 0 {
                return Err(Error::invalid("transvection: unusable −1 eigenspace"));
            }
            let dim_v = cols.len();
            let mut bas = Mat::zeros(p, dim_v);
            for (j, &c) in cols.iter().enumerate() {
                bas.set_column(j, &vt.row(c).transpose());
            }
            let a_v = bas.transpose() * a * &bas;
            let comm_v: Vec<Mat> = chain
                .mats
                .iter()
                .take(level.saturating_sub(1))
                .map(|ji| bas.transpose() * ji * &bas)
                .collect();
            let y = crate::centriole::find_constrained_structure(
                &[a_v],
                &comm_v,
                dim_v,
                1e-8,
                7,
            )
            .ok_or_else(|| {
                Error::invalid(
                    "transvection: no admissible π-plane structure on the antipodal block",
                )
            })?;
            let reflect = &id - &bas * bas.transpose() * 2.0;
            let reduced = &ratio * reflect;
            log_rotation(&reduced)? + &bas * y * bas.transpose() * PI
        }
    };
    let s = expm(&(log * 0.5));
    let residual = max_abs(&(&s * a * s.transpose() - b));
    if residual > 1e-7 {
        return Err(Error::relation("transvection: conjugation misses the target", residual));
    }
    Ok(s)
}

/// Conjugate a grid by the transvection taking its north value to the
/// chain witness of its level (a constant isometry commuting with the
/// lower chain; windings are invariant under it).
pub fn rebase_to_witness(grid: &MeridianGrid, chain: &CliffordFamily) -> Result<(MeridianGrid, f64)> {
    let level = grid.level;
    if level == 0 || level > chain.len() {
        return Err(Error::invalid("rebase: level out of range"));
    }
    let witness = &chain.mats[level - 1];
    let north = grid.north_value().clone();
    if max_abs(&(&north - witness)) <= 1e-9 {
        return Ok((grid.clone(), 0.0));
    }
    let angle = max_rotation_angle(&(-(witness * &north)));
    let s = transvection_between(&north, witness, chain, level)?;
    for ji in chain.mats.iter().take(level - 1) {
        let res = crate::linalg::commutator_residual(&s, ji);
        if res > 1e-8 {
            return Err(Error::relation("rebase: conjugation leaves the centralizer", res));
        }
    }
    let values: Vec<Mat> = grid.values.iter().map(|v| &s * v * s.transpose()).collect();
    let out = MeridianGrid {
        k: grid.k,
        res: grid.res,
        p: grid.p,
        level,
        values,
    };
    if max_abs(&(out.north_value() - witness)) > 1e-8 {
        return Err(Error::invalid("rebase: transvection failed to hit the witness"));
    }
    Ok((out, angle))
}


/// Recover the exact minimal generator from a converged polygon on a
/// pole-to-pole geodesic: average the per-segment logs, project onto the
/// tangent constraints of the level, and snap to a complex structure by
/// the polar map (minimal generators have spectrum ±i, so the snap is
/// exact). Fails when the polygon is not close to a one-parameter path.
fn minimal_generator_from_polygon(
    verts: &[Mat],
    chain: &CliffordFamily,
    level: usize,
) -> Result<Mat> {
    let n_seg = verts.len() - 1;
    let p = verts[0].nrows();
    let mut acc = Mat::zeros(p, p);
    for w in verts.windows(2) {
        acc += log_rotation(&(&w[1] * w[0].transpose()))? * (n_seg as f64 / PI);
    }
    let mean = acc / n_seg as f64;
    let mut x = (&mean - &mean.transpose()) * 0.5;
    if level >= 1 {
        // anticommute with the base structure, commute with the lower chain
        x = (&x + &verts[0] * &x * &verts[0]) * 0.5;
        for ji in chain.mats.iter().take(level - 1) {
            x = (&x - ji * &x * ji) * 0.5;
        }
    }
    let snapped = polar_complex_structure(&x).map_err(|_| {
        Error::convergence(
            "minimal generator",
            "projected generator is singular".to_string(),
        )
    })?;
    let residual = max_abs(&(&snapped - &mean));
    if residual > 5e-3 {
        return Err(Error::convergence(
            "minimal generator",
            format!("polygon is not a one-parameter pole path (snap residual {residual:.2e})"),
        ));
    }
    Ok(snapped)
}

/// Convergence report of one suspension-inversion stage.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub level: usize,
    pub meridians: usize,
    pub max_energy: f64,
    pub mean_energy: f64,
    pub total_iterations: usize,
    pub perturbations: usize,
}

/// Invert the geodesic suspension: shorten every meridian of a normalized
/// grid to a minimal geodesic inside `P̂_level` and return the midpoint map
/// on the equator sphere (one dimension lower, one level higher).
pub fn suspension_invert(
    grid: &MeridianGrid,
    chain: &CliffordFamily,
    opts: &ShortenOptions,
) -> Result<(MeridianGrid, StageReport)> {
    if grid.k < 2 {
        return Err(Error::invalid("suspension_invert: need grid dimension ≥ 2"));
    }
    let level = grid.level;
    let reference = reference_geodesic(chain, level)?;
    let j_from = reference.at(0.0);
    let j_to = reference.at(1.0);
    let pi2 = PI * PI;

    let equator = grid.equator_nodes();
    let results: Vec<Result<(Vec<usize>, Mat, usize, f64, usize)>> = equator
        .par_iter()
        .map(|eq| {
            let meridian = grid.meridian(eq);
            let from_res = max_abs(&(&meridian[0] - &j_from));
            let to_res = max_abs(&(meridian.last().unwrap() - &j_to));
            if from_res > 1e-6 || to_res > 1e-6 {
                return Err(Error::invalid(format!(
                    "suspension_invert: meridian at {eq:?} does not run J_ℓ ⇝ −J_ℓ \
                     (residuals {from_res:.2e}, {to_res:.2e})"
                )));
            }
            let mut node_opts = opts.clone();
            node_opts.target_energy = Some(pi2);
            node_opts.record_frames = false;
            let path = PolygonPath::new(meridian, level)?;
            let outcome = shorten(&path, chain, &node_opts)?;
            if outcome.final_energy > pi2 + 1e-7 {
                return Err(Error::convergence(
                    "suspension_invert",
                    format!(
                        "meridian at {eq:?} stalled at energy {:.9} (π² = {pi2:.9})",
                        outcome.final_energy
                    ),
                ));
            }
            // reconstruct the exact minimal generator of the limit
            let verts = &outcome.path.vertices;
            let a = minimal_generator_from_polygon(verts, chain, level).map_err(|e| {
                Error::convergence("suspension_invert", format!("meridian at {eq:?}: {e}"))
            })?;
            let spec = GeodesicSpec::new(a, verts[0].clone(), level.max(1));
            let mid = spec_midpoint(&spec);
            // polish onto the constraint set of the next level
            let polished = project_to_level(&mid, chain, level + 1)?;
            if max_abs(&(&polished - &mid)) > 1e-6 {
                return Err(Error::convergence(
                    "suspension_invert",
                    format!("midpoint at {eq:?} is not near the next centriole"),
                ));
            }
            if !membership(&polished, chain, level + 1) {
                return Err(Error::invalid(format!(
                    "suspension_invert: midpoint at {eq:?} fails membership at level {}",
                    level + 1
                )));
            }
            Ok((
                eq.clone(),
                polished,
                outcome.iterations,
                outcome.final_energy,
                outcome.perturbations,
            ))
        })
        .collect();

    let mut midpoints: std::collections::HashMap<Vec<usize>, Mat> =
        std::collections::HashMap::new();
    let mut total_iterations = 0;
    let mut max_energy: f64 = 0.0;
    let mut sum_energy = 0.0;
    let mut perturbations = 0;
    for r in results {
        let (eq, mid, iters, e, pert) = r?;
        total_iterations += iters;
        max_energy = max_energy.max(e);
        sum_energy += e;
        perturbations += pert;
        midpoints.insert(eq, mid);
    }
    let meridians = equator.len();
    let values: Vec<Mat> = equator
        .iter()
        .map(|eq| midpoints.remove(eq).expect("midpoint computed"))
        .collect();
    let out = MeridianGrid {
        k: grid.k - 1,
        res: grid.res,
        p: grid.p,
        level: level + 1,
        values,
    };
    // the midpoint map can amplify node-to-node variation slightly; callers
    // refine marginal grids, so only the log-branch bound is fatal here
    let step = out.max_adjacent_step();
    if step >= CONVEXITY_RADIUS {
        return Err(Error::invalid(format!(
            "suspension_invert: output varies by {step:.3} ≥ π/2 between nodes"
        )));
    }
    Ok((
        out,
        StageReport {
            level,
            meridians,
            max_energy,
            mean_energy: sum_energy / meridians as f64,
            total_iterations,
            perturbations,
        },
    ))
}

/// Geodesic suspension (the inverse direction): rebuild the
/// dimension-`k+1` grid from a midpoint map via `φ(v,t) = γ_{φ'(v)}(t)`
/// with `γ_m(t) = e^{πtA}·J_ℓ`, `A = m·J_ℓ⁻¹`.
pub fn geodesic_suspension(grid: &MeridianGrid, chain: &CliffordFamily) -> Result<MeridianGrid> {
    if grid.level == 0 {
        return Err(Error::invalid("geodesic_suspension: need level ≥ 1"));
    }
    let level = grid.level - 1;
    let reference = reference_geodesic(chain, level)?;
    let base = reference.at(0.0);
    let res = grid.res;
    let mut values = Vec::with_capacity(res * grid.values.len());
    for t_idx in 0..res {
        let t = t_idx as f64 / (res - 1) as f64;
        for m in &grid.values {
            let a = m * base.transpose(); // m·J⁻¹
            values.push(expm(&(&a * (PI * t))) * &base);
        }
    }
    let out = MeridianGrid {
        k: grid.k + 1,
        res,
        p: grid.p,
        level,
        values,
    };
    out.check_resolution_guard()?;
    Ok(out)
}

/// One row of the per-stage flow trace.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TraceRow {
    pub stage: String,
    pub iteration: usize,
    pub max_energy: f64,
    pub mean_energy: f64,
    pub perturbations_applied: usize,
}

/// Options for the deformation pipeline.
#[derive(Debug, Clone)]
pub struct DeformOptions {
    pub shorten: ShortenOptions,
    /// Connectivity degree for the winding window `s_k·d ≤ η ≤ p/4`.
    pub d: i64,
    /// Fail when the winding window is violated (otherwise it is only
    /// recorded; the flow itself does not need the window).
    pub enforce_window: bool,
    /// Keep all intermediate grids (homotopy trace).
    pub keep_stages: bool,
}

impl Default for DeformOptions {
    fn default() -> Self {
        DeformOptions {
            shorten: ShortenOptions::default(),
            d: 1,
            enforce_window: false,
            keep_stages: false,
        }
    }
}

/// Outcome of the full deformation pipeline.
#[derive(Debug)]
pub struct DeformOutcome {
    pub map: AffineHopfMap,
    /// Winding of the descent loop (must equal the map's η).
    pub eta_loop: i64,
    /// Whether `s_k·d ≤ η ≤ p/4` held for the requested `d`.
    pub window_satisfied: bool,
    pub trace: Vec<TraceRow>,
    /// Intermediate grids (homotopy trace), when requested.
    pub stages: Vec<MeridianGrid>,
}

/// Deform a based grid `S^k → SO_p` (`k ≡ 3 mod 4`) into affine Hopf form
/// over the positive chain `fam`: iterated meridian normalization and
/// suspension inversion down to a loop in `P_{k−1}`, then the loop endgame
/// extracting the invariant splitting from the minimal second half.
/// The loop winding must satisfy `s_k·d ≤ η ≤ p/4`.
pub fn deform_to_affine_hopf(
    grid: &MeridianGrid,
    fam: &CliffordFamily,
    options: &DeformOptions,
) -> Result<DeformOutcome> {
    let opts = &options.shorten;
    let keep_stages = options.keep_stages;
    let k = fam.len();
    if k % 4 != 3 {
        return Err(Error::invalid("deform: need k ≡ 3 mod 4"));
    }
    if grid.k != k {
        return Err(Error::invalid(
            "deform: grid dimension must match the family length",
        ));
    }
    if !is_positive(fam)? {
        return Err(Error::invalid("deform: family must be positive"));
    }
    let p = fam.p;
    if grid.p != p {
        return Err(Error::invalid("deform: grid and family dimension mismatch"));
    }
    let id = Mat::identity(p, p);
    if max_abs(&(grid.north_value() - &id)) > 1e-6 {
        return Err(Error::invalid("deform: grid must be based at the identity"));
    }

    let mut trace: Vec<TraceRow> = Vec::new();
    let mut stages: Vec<MeridianGrid> = Vec::new();
    let mut current = grid.clone();
    if keep_stages {
        stages.push(current.clone());
    }

    // descend: k − 1 normalization + inversion rounds
    for level in 0..(k - 1) {
        let reference = reference_geodesic(fam, level)?;
        let (normalized, report) = normalize_meridian(&current, fam, &reference, opts)?;
        trace.push(TraceRow {
            stage: format!("normalize_l{level}"),
            iteration: 0,
            max_energy: report.max_change,
            mean_energy: report.max_gauge_angle,
            perturbations_applied: 0,
        });
        let (next, report) = suspension_invert(&normalized, fam, opts)?;
        trace.push(TraceRow {
            stage: format!("suspend_l{level}"),
            iteration: report.total_iterations,
            max_energy: report.max_energy,
            mean_energy: report.mean_energy,
            perturbations_applied: report.perturbations,
        });
        // re-base onto the chain witness (constant conjugation; windings
        // are invariant) in case the base meridian was not straightened
        let (rebased, angle) = rebase_to_witness(&next, fam)?;
        if angle > 0.0 {
            trace.push(TraceRow {
                stage: format!("rebase_l{}", level + 1),
                iteration: 0,
                max_energy: angle,
                mean_energy: 0.0,
                perturbations_applied: 0,
            });
        }
        // refine the loop stage once (odd sample count puts the antipode
        // on the grid); refine any stage whose node variation exceeds the
        // guard — upsampling halves adjacent steps
        current = if rebased.k == 1 || rebased.max_adjacent_step() >= GRID_STEP_BOUND {
            rebased.upsample()?
        } else {
            rebased
        };
        if keep_stages {
            stages.push(current.clone());
        }
    }

    // loop endgame at level ℓ = k−1 ≡ 2 mod 4
    let ell = k - 1;
    if current.k != 1 || current.level != ell {
        return Err(Error::invalid("deform: descent did not reach the loop stage"));
    }
    let reference = reference_geodesic(fam, ell)?;
    let (normalized, report) = normalize_meridian(&current, fam, &reference, opts)?;
    trace.push(TraceRow {
        stage: format!("normalize_l{ell}"),
        iteration: 0,
        max_energy: report.max_change,
        mean_energy: report.max_gauge_angle,
        perturbations_applied: 0,
    });
    if keep_stages {
        stages.push(normalized.clone());
    }

    // winding window of the deformation theorem: s_k·d ≤ η ≤ p/4
    let eta_loop = loop_winding(&normalized, fam, ell)?;
    let s_k = crate::clifford::irreducible_dim(k) as i64;
    let window_satisfied = eta_loop >= s_k * options.d && eta_loop <= (p as i64) / 4;
    if options.enforce_window && !window_satisfied {
        return Err(Error::invalid(format!(
            "deform: loop winding η = {eta_loop} outside the window [{}, {}]",
            s_k * options.d,
            p as i64 / 4
        )));
    }

    // shorten the second half (the first half is the reference geodesic)
    let res = normalized.res;
    if res % 2 == 0 {
        return Err(Error::invalid("deform: loop stage needs odd resolution"));
    }
    let half = (res - 1) / 2;
    let second_rev: Vec<Mat> = normalized.values[half..].iter().rev().cloned().collect();
    let mut end_opts = opts.clone();
    end_opts.target_energy = Some(PI * PI);
    end_opts.record_frames = false;
    let outcome = shorten(&PolygonPath::new(second_rev, ell)?, fam, &end_opts)?;
    trace.push(TraceRow {
        stage: "loop_shorten".into(),
        iteration: outcome.iterations,
        max_energy: outcome.final_energy,
        mean_energy: outcome.final_energy,
        perturbations_applied: outcome.perturbations,
    });
    if outcome.final_energy > PI * PI + 1e-7 {
        return Err(Error::convergence(
            "deform",
            format!("loop half stalled at {:.9}", outcome.final_energy),
        ));
    }
    let a_tilde = minimal_generator_from_polygon(&outcome.path.vertices, fam, ell)?;

    // splitting: Ã = +J_o on L_0 and −J_o on L_1 (η counts L_1)
    let jo = chain_complex_structure(fam, ell)?;
    let m = jo.transpose() * &a_tilde;
    let m = (&m + &m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let mut plus_cols: Vec<usize> = Vec::new();
    let mut minus_cols: Vec<usize> = Vec::new();
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if (*v - 1.0).abs() < 1e-6 {
            plus_cols.push(i);
        } else if (*v + 1.0).abs() < 1e-6 {
            minus_cols.push(i);
        } else {
            return Err(Error::invalid(format!(
                "deform: splitting eigenvalue {v:.6} is not ±1"
            )));
        }
    }
    let basis_of = |cols: &[usize]| {
        let mut b = Mat::zeros(p, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            b.set_column(j, &eig.eigenvectors.column(c));
        }
        b
    };
    let basis_fixed = basis_of(&plus_cols);
    let basis_hopf = basis_of(&minus_cols);

    // the splitting must be invariant under the whole family
    for (i, ji) in fam.mats.iter().enumerate() {
        let mix = basis_fixed.transpose() * ji * &basis_hopf;
        let res = max_abs(&mix);
        if res > 1e-6 {
            return Err(Error::relation(
                format!("deform: splitting not invariant under J_{}", i + 1),
                res,
            ));
        }
    }
    let fam1 = CliffordFamily::new(
        fam.mats
            .iter()
            .map(|ji| basis_hopf.transpose() * ji * &basis_hopf)
            .collect(),
    );
    fam1.validate()
        .map_err(|e| Error::invalid(format!("deform: restricted family invalid ({e})")))?;
    let map = AffineHopfMap::new(basis_fixed, basis_hopf, fam1)?;
    let eta_map = map.eta()?;
    if eta_map != eta_loop {
        return Err(Error::invalid(format!(
            "deform: winding not conserved (loop η = {eta_loop}, splitting η = {eta_map})"
        )));
    }
    Ok(DeformOutcome {
        map,
        eta_loop,
        window_satisfied,
        trace,
        stages,
    })
}

/// Winding of a dimension-1 grid under the embedding `P_ℓ → U_{p/2}`,
/// `J ↦ J·J_ℓ⁻¹`, complexified with respect to `i = J_1⋯J_{ℓ−1}`.
pub fn loop_winding(grid: &MeridianGrid, chain: &CliffordFamily, ell: usize) -> Result<i64> {
    if grid.k != 1 {
        return Err(Error::invalid("loop_winding: need a dimension-1 grid"));
    }
    let jo = chain_complex_structure(chain, ell)?;
    let basis = complex_basis(&jo)?;
    let j_ell = &chain.mats[ell - 1];
    let samples: Vec<crate::linalg::CMat> = grid
        .values
        .iter()
        .map(|j| {
            let u_real = -(j * j_ell);
            to_complex_matrix(&u_real, &jo, &basis)
        })
        .collect();
    winding_number_det(&samples)
}

/// Grid samples of an affine Hopf map (`φ(N) = I`).
pub fn grid_from_affine_hopf(h: &AffineHopfMap, res: usize) -> Result<MeridianGrid> {
    let k = h.sphere_dim();
    MeridianGrid::from_map(k, res, 0, |point| {
        let v = nalgebra::DVector::from_column_slice(point);
        h.evaluate(&v).expect("affine hopf evaluation on grid")
    })
}

/// Smooth deterministic multiplicative perturbation `φ(x)·exp(ε·X(x))`
/// with `X(N) = 0`, built from seeded low-frequency skew fields.
pub fn perturb_grid(grid: &MeridianGrid, eps: f64, seed: u64) -> Result<MeridianGrid> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p = grid.p;
    let modes: Vec<(Vec<f64>, f64, Mat)> = (0..3)
        .map(|_| {
            let w: Vec<f64> = (0..grid.k + 1)
                .map(|_| crate::linalg::standard_normal(&mut rng))
                .collect();
            let phase = crate::linalg::standard_normal(&mut rng);
            let skew = crate::linalg::random_skew(&mut rng, p, 1.0);
            let norm = max_abs(&skew).max(1e-12);
            (w, phase, skew / norm)
        })
        .collect();
    let res = grid.res;
    let count = grid.values.len();
    let mut values = Vec::with_capacity(count);
    let mut idx = vec![0usize; grid.k];
    for flat in 0..count {
        let mut rem = flat;
        for a in (0..grid.k).rev() {
            idx[a] = rem % res;
            rem /= res;
        }
        let coords: Vec<f64> = idx.iter().map(|i| *i as f64 / (res - 1) as f64).collect();
        let point = MeridianGrid::sphere_point(&coords);
        // vanish at the north pole to keep the map based
        let bump = 0.5 * (1.0 - point[0]);
        let mut x = Mat::zeros(p, p);
        for (w, phase, s) in &modes {
            let arg: f64 = w.iter().zip(&point).map(|(a, b)| a * b).sum::<f64>() + phase;
            x += s * arg.sin();
        }
        values.push(&grid.values[flat] * expm(&(x * (eps * bump))));
    }
    let out = MeridianGrid {
        k: grid.k,
        res,
        p,
        level: grid.level,
        values,
    };
    out.check_resolution_guard()?;
    Ok(out)
}


#[cfg(test)]
mod perturbed_fixture_test {
    use super::*;
    use crate::clifford::build_irreducible;

    #[test]
    fn deform_perturbed_affine_hopf_resolution_16() {
        let fam = build_irreducible(3).unwrap().repeated(2).unwrap();
        let small = build_irreducible(3).unwrap();
        let basis_fixed = Mat::identity(8, 8).view((0, 0), (8, 4)).into_owned();
        let basis_hopf = Mat::identity(8, 8).view((0, 4), (8, 4)).into_owned();
        let h = crate::hopf::AffineHopfMap::new(basis_fixed, basis_hopf, small).unwrap();
        let grid = grid_from_affine_hopf(&h, 16).unwrap();
        let perturbed = perturb_grid(&grid, 0.05, 42).unwrap();
        let start = std::time::Instant::now();
        let outcome = deform_to_affine_hopf(&perturbed, &fam, &DeformOptions::default()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        println!("perturbed deform: eta = {}, dim L1 = {}, {secs:.1} s",
                 outcome.eta_loop, outcome.map.basis_hopf.ncols());
        assert_eq!(outcome.eta_loop, 2);
        assert_eq!(outcome.map.basis_hopf.ncols(), 4);
        assert!(secs < 600.0);
    }
}
