//! Clifford algebra basis arithmetic and exact matrix models of the
//! irreducible modules.
//!
//! All representation matrices built here are signed permutation matrices,
//! so the defining relations hold exactly up to float comparison. Base cases
//! up to rank 8 come from complex, quaternion and octonion translations; the
//! higher ranks use the 8-fold block recursion over the octonions, doubling
//! the module `S_{k+8} = (O ⊗ S_k)²`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator_residual, column_space_basis, commutator_residual, max_abs,
    orthogonality_residual, Mat,
};
use crate::DEFAULT_TOL;

/// Signed product of generators `e_{i1}…e_{ir}`, indices as a bitmask
/// (bit `i-1` set iff `e_i` occurs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CliffordBasisElement {
    pub indices: u64,
    pub sign: i8,
}

impl CliffordBasisElement {
    pub fn one() -> Self {
        CliffordBasisElement { indices: 0, sign: 1 }
    }

    /// Single generator `e_i` (1-based).
    pub fn generator(i: u32) -> Self {
        CliffordBasisElement {
            indices: 1u64 << (i - 1),
            sign: 1,
        }
    }

    pub fn from_indices(indices: &[u32], sign: i8) -> Self {
        let mut mask = 0u64;
        for &i in indices {
            mask |= 1u64 << (i - 1);
        }
        CliffordBasisElement { indices: mask, sign }
    }
}

/// Product of two basis elements in `Cl_n`: symmetric difference of the
/// index sets, sign from transposition count and `e_i² = −1`.
pub fn clifford_product(
    a: CliffordBasisElement,
    b: CliffordBasisElement,
    n: u32,
) -> Result<CliffordBasisElement> {
    let bound = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    if a.indices & !bound != 0 || b.indices & !bound != 0 {
        return Err(Error::invalid("clifford_product: index out of range"));
    }
    let mut crossings = 0u32;
    for t in 0..64u32 {
        if b.indices & (1u64 << t) != 0 {
            // generators of a with index strictly larger than t
            crossings += (a.indices >> (t + 1)).count_ones();
        }
    }
    let squares = (a.indices & b.indices).count_ones();
    let parity = (crossings + squares) % 2;
    let sign = a.sign * b.sign * if parity == 0 { 1 } else { -1 };
    Ok(CliffordBasisElement {
        indices: a.indices ^ b.indices,
        sign,
    })
}

/// Octonion multiplication table from Cayley-Dickson doubling of the
/// quaternions: `(a,b)(c,d) = (ac − d̄b, da + bc̄)`, basis `1,i,j,k,ℓ,iℓ,jℓ,kℓ`
/// (so `e_{i+4} = e_i·e_4` for `i = 1,2,3`).
#[derive(Debug, Clone)]
pub struct OctonionTable {
    /// `prod[a][b] = (c, s)` with `e_a e_b = s·e_c`.
    pub prod: [[(usize, i8); 8]; 8],
}

/// Quaternion table: `1,i,j,k` with `ij=k, jk=i, ki=j`.
fn quat_mul(a: usize, b: usize) -> (usize, i8) {
    const TBL: [[(usize, i8); 4]; 4] = [
        [(0, 1), (1, 1), (2, 1), (3, 1)],
        [(1, 1), (0, -1), (3, 1), (2, -1)],
        [(2, 1), (3, -1), (0, -1), (1, 1)],
        [(3, 1), (2, 1), (1, -1), (0, -1)],
    ];
    TBL[a][b]
}

fn quat_conj(a: usize) -> (usize, i8) {
    if a == 0 {
        (0, 1)
    } else {
        (a, -1)
    }
}

impl OctonionTable {
    pub fn new() -> Self {
        let mut prod = [[(0usize, 0i8); 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                // e_a = (x, y), e_b = (u, v) as quaternion pairs
                let (x, y) = if a < 4 { (Some(a), None) } else { (None, Some(a - 4)) };
                let (u, v) = if b < 4 { (Some(b), None) } else { (None, Some(b - 4)) };
                prod[a][b] = match (x, y, u, v) {
                    // (x,0)(u,0) = (xu, 0)
                    (Some(x), None, Some(u), None) => {
                        let (c, s) = quat_mul(x, u);
                        (c, s)
                    }
                    // (x,0)(0,v) = (0, v x)
                    (Some(x), None, None, Some(v)) => {
                        let (c, s) = quat_mul(v, x);
                        (c + 4, s)
                    }
                    // (0,y)(u,0) = (0, y ū)
                    (None, Some(y), Some(u), None) => {
                        let (uc, us) = quat_conj(u);
                        let (c, s) = quat_mul(y, uc);
                        (c + 4, s * us)
                    }
                    // (0,y)(0,v) = (−v̄ y, 0)
                    (None, Some(y), None, Some(v)) => {
                        let (vc, vs) = quat_conj(v);
                        let (c, s) = quat_mul(vc, y);
                        (c, -s * vs)
                    }
                    _ => unreachable!(),
                };
            }
        }
        OctonionTable { prod }
    }

    /// Left translation `L(e_a)` as an 8×8 signed permutation matrix.
    pub fn left_translation(&self, a: usize) -> Mat {
        let mut m = Mat::zeros(8, 8);
        for b in 0..8 {
            let (c, s) = self.prod[a][b];
            m[(c, b)] = s as f64;
        }
        m
    }

    /// Right translation `R(e_a): v ↦ v·e_a` as an 8×8 signed permutation.
    pub fn right_translation(&self, a: usize) -> Mat {
        let mut m = Mat::zeros(8, 8);
        for b in 0..8 {
            let (c, s) = self.prod[b][a];
            m[(c, b)] = s as f64;
        }
        m
    }

    /// Checks `e_0` is a two-sided identity, `e_i² = −e_0`, and that unit
    /// left translations are orthogonal.
    pub fn verify(&self) -> Result<()> {
        for a in 0..8 {
            if self.prod[0][a] != (a, 1) || self.prod[a][0] != (a, 1) {
                return Err(Error::invalid("octonion table: e_0 not an identity"));
            }
        }
        for a in 1..8 {
            if self.prod[a][a] != (0, -1) {
                return Err(Error::invalid("octonion table: e_i^2 != -1"));
            }
            let l = self.left_translation(a);
            let res = orthogonality_residual(&l);
            if res > 0.0 {
                return Err(Error::relation("octonion left translation not orthogonal", res));
            }
        }
        Ok(())
    }
}

impl Default for OctonionTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Ordered family `J_1..J_k` of anticommuting orthogonal complex structures
/// on `R^p`.
#[derive(Debug, Clone)]
pub struct CliffordFamily {
    pub p: usize,
    pub mats: Vec<Mat>,
    pub tol: f64,
}

impl CliffordFamily {
    pub fn new(mats: Vec<Mat>) -> Self {
        let p = mats.first().map_or(0, |m| m.nrows());
        CliffordFamily {
            p,
            mats,
            tol: DEFAULT_TOL,
        }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Largest violation of the three defining relations (orthogonality,
    /// `J_i² = −I`, pairwise anticommutation).
    pub fn relation_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let id = Mat::identity(self.p, self.p);
        for (i, j_i) in self.mats.iter().enumerate() {
            worst = worst.max(orthogonality_residual(j_i));
            worst = worst.max(max_abs(&(j_i * j_i + &id)));
            for j_j in self.mats.iter().skip(i + 1) {
                worst = worst.max(anticommutator_residual(j_i, j_j));
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.mats {
            if m.nrows() != self.p || m.ncols() != self.p {
                return Err(Error::invalid("family matrices must be square of size p"));
            }
        }
        let res = self.relation_residual();
        if res > self.tol {
            return Err(Error::relation("Clifford family relations", res));
        }
        Ok(())
    }

    /// Block sum with another family of the same length.
    pub fn direct_sum(&self, other: &CliffordFamily) -> Result<CliffordFamily> {
        if self.len() != other.len() {
            return Err(Error::invalid("direct_sum: families of different length"));
        }
        let p = self.p + other.p;
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut m = Mat::zeros(p, p);
                m.view_mut((0, 0), (self.p, self.p)).copy_from(a);
                m.view_mut((self.p, self.p), (other.p, other.p)).copy_from(b);
                m
            })
            .collect();
        Ok(CliffordFamily {
            p,
            mats,
            tol: self.tol.max(other.tol),
        })
    }

    /// `q`-fold block sum of this family with itself.
    pub fn repeated(&self, q: usize) -> Result<CliffordFamily> {
        if q == 0 {
            return Err(Error::invalid("repeated: need q >= 1"));
        }
        let mut out = self.clone();
        for _ in 1..q {
            out = out.direct_sum(self)?;
        }
        Ok(out)
    }
}

/// Dimension `s_n` of the irreducible `Cl_n`-module (8-periodic table,
/// `s_{k+8} = 16 s_k`).
pub fn irreducible_dim(n: usize) -> usize {
    const BASE: [usize; 9] = [1, 2, 4, 4, 8, 8, 8, 8, 16];
    if n <= 8 {
        BASE[n]
    } else {
        16 * irreducible_dim(n - 8)
    }
}

/// Whether `Cl_n` has two inequivalent irreducible modules.
pub fn has_two_classes(n: usize) -> bool {
    n % 4 == 3
}

/// One irreducible `Cl_n`-family (the positive class, `ρ(w) = −id`, when
/// `n ≡ 3 mod 4`); see [`build_irreducible_class`] for the other class.
pub fn build_irreducible(n: usize) -> Result<CliffordFamily> {
    build_irreducible_class(n, false)
}

/// Irreducible `Cl_n`-family with explicit class selection. `negative`
/// picks the class with `ρ(w) = +id` and is only valid for `n ≡ 3 mod 4`.
pub fn build_irreducible_class(n: usize, negative: bool) -> Result<CliffordFamily> {
    if n == 0 {
        return Err(Error::invalid("build_irreducible: need n >= 1"));
    }
    if negative && !has_two_classes(n) {
        return Err(Error::invalid(
            "build_irreducible: two module classes exist only for n ≡ 3 mod 4",
        ));
    }
    let mut fam = build_unchecked(n)?;
    if has_two_classes(n) {
        let w = volume_element(&fam)?;
        let id = Mat::identity(fam.p, fam.p);
        let want = if negative { 1.0 } else { -1.0 };
        let is_plus = max_abs(&(&w - &id)) <= fam.tol;
        let is_minus = max_abs(&(&w + &id)) <= fam.tol;
        if !is_plus && !is_minus {
            return Err(Error::invalid(
                "build_irreducible: volume element is not ±id on an irreducible module",
            ));
        }
        let have = if is_plus { 1.0 } else { -1.0 };
        if have != want {
            // e_n ↦ −e_n swaps the two classes
            let last = fam.mats.len() - 1;
            let negated = -&fam.mats[last];
            fam.mats[last] = negated;
        }
    }
    fam.validate()?;
    Ok(fam)
}

fn build_unchecked(n: usize) -> Result<CliffordFamily> {
    let oct = OctonionTable::new();
    let fam = match n {
        1 => {
            let j = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            CliffordFamily::new(vec![j])
        }
        2 | 3 => {
            // quaternion left translations on H = span(e_0..e_3) ⊂ O
            let mats = (1..=n)
                .map(|a| oct.left_translation(a).view((0, 0), (4, 4)).into_owned())
                .collect();
            CliffordFamily::new(mats)
        }
        4..=7 => {
            let mats = (1..=n).map(|a| oct.left_translation(a)).collect();
            CliffordFamily::new(mats)
        }
        8 => CliffordFamily::new(octonion_doubling_block(&oct, None)),
        _ => {
            let inner = build_unchecked(n - 8)?;
            let s = inner.p;
            let mut mats = Vec::with_capacity(n);
            let id8 = Mat::identity(8, 8);
            for j in &inner.mats {
                let block = id8.kronecker(j);
                let mut m = Mat::zeros(16 * s, 16 * s);
                m.view_mut((0, 0), (8 * s, 8 * s)).copy_from(&block);
                m.view_mut((8 * s, 8 * s), (8 * s, 8 * s)).copy_from(&(-&block));
                mats.push(m);
            }
            mats.extend(octonion_doubling_block(&oct, Some(s)));
            CliffordFamily::new(mats)
        }
    };
    Ok(fam)
}

/// The eight block generators `ξ ↦ [[0, −L(ξ)^T], [L(ξ), 0]]` on
/// `(O ⊗ S)²`, tensored with `id_S` when `s = Some(dim S)`.
fn octonion_doubling_block(oct: &OctonionTable, s: Option<usize>) -> Vec<Mat> {
    let dim_s = s.unwrap_or(1);
    let id_s = Mat::identity(dim_s, dim_s);
    let half = 8 * dim_s;
    (0..8)
        .map(|a| {
            let l = if dim_s == 1 {
                oct.left_translation(a)
            } else {
                oct.left_translation(a).kronecker(&id_s)
            };
            let mut m = Mat::zeros(2 * half, 2 * half);
            m.view_mut((0, half), (half, half)).copy_from(&(-l.transpose()));
            m.view_mut((half, 0), (half, half)).copy_from(&l);
            m
        })
        .collect()
}

/// Longest product `w = J_1⋯J_k`; checks `w² = (−1)^{k(k+1)/2} I`.
pub fn volume_element(fam: &CliffordFamily) -> Result<Mat> {
    if fam.is_empty() {
        return Err(Error::invalid("volume_element: empty family"));
    }
    let mut w = fam.mats[0].clone();
    for j in &fam.mats[1..] {
        w = w * j;
    }
    let k = fam.len();
    let sign = if (k * (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let res = max_abs(&(&w * &w - Mat::identity(fam.p, fam.p) * sign));
    if res > fam.tol {
        return Err(Error::relation("volume element square sign", res));
    }
    Ok(w)
}

/// Orthonormal bases (as column matrices) of the ±1 eigenspaces of the
/// volume element; requires `k ≡ 0 mod 4`.
pub fn split_by_volume(fam: &CliffordFamily) -> Result<(Mat, Mat)> {
    if fam.len() % 4 != 0 {
        return Err(Error::invalid("split_by_volume: need k ≡ 0 mod 4"));
    }
    let w = volume_element(fam)?;
    let id = Mat::identity(fam.p, fam.p);
    // w² = +I here, so the spectral projectors are (I ± w)/2
    let sym_res = max_abs(&(&w - &w.transpose()));
    if sym_res > fam.tol {
        return Err(Error::relation("split_by_volume: volume not symmetric", sym_res));
    }
    let p_plus = (&id + &w) * 0.5;
    let p_minus = (&id - &w) * 0.5;
    let basis_plus = basis_matrix(column_space_basis(&p_plus, 1e-8), fam.p);
    let basis_minus = basis_matrix(column_space_basis(&p_minus, 1e-8), fam.p);
    if basis_plus.ncols() != fam.p / 2 || basis_minus.ncols() != fam.p / 2 {
        return Err(Error::invalid(
            "split_by_volume: eigenspaces do not split evenly",
        ));
    }
    // each J_i must interchange the eigenspaces
    for j in &fam.mats {
        let mix = basis_plus.transpose() * j * &basis_plus;
        let res = max_abs(&mix);
        if res > fam.tol.max(1e-9) {
            return Err(Error::relation("split_by_volume: J_i preserves L^+", res));
        }
    }
    Ok((basis_plus, basis_minus))
}

fn basis_matrix(cols: Vec<DVector<f64>>, p: usize) -> Mat {
    let mut m = Mat::zeros(p, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Positive `Cl_{k}`-family on `L⁺` (`k = n−1`) induced by
/// `e_i ↦ ρ(−e_1 e_{i+1})`; requires `n ≡ 0 mod 4`.
pub fn positive_part_family(fam: &CliffordFamily) -> Result<CliffordFamily> {
    let n = fam.len();
    if n % 4 != 0 {
        return Err(Error::invalid("positive_part_family: need n ≡ 0 mod 4"));
    }
    let (basis_plus, _) = split_by_volume(fam)?;
    let mut mats = Vec::with_capacity(n - 1);
    for i in 1..n {
        let prod = -(&fam.mats[0] * &fam.mats[i]);
        mats.push(basis_plus.transpose() * prod * &basis_plus);
    }
    let out = CliffordFamily {
        p: fam.p / 2,
        mats,
        tol: fam.tol,
    };
    out.validate()?;
    if !is_positive(&out)? {
        return Err(Error::invalid(
            "positive_part_family: induced family failed the positivity check",
        ));
    }
    Ok(out)
}

/// Whether `J_k = +J_1⋯J_{k−1}` within tolerance; requires `k ≡ 3 mod 4`
/// (otherwise the product is not even a candidate complex structure).
pub fn is_positive(fam: &CliffordFamily) -> Result<bool> {
    let k = fam.len();
    if k % 4 != 3 {
        return Err(Error::invalid("is_positive: need k ≡ 3 mod 4"));
    }
    let mut prod = fam.mats[0].clone();
    for j in &fam.mats[1..k - 1] {
        prod = prod * j;
    }
    Ok(max_abs(&(&fam.mats[k - 1] - &prod)) <= fam.tol)
}

/// Element of the Grothendieck group `M_n`: multiplicities over the
/// irreducible classes (two entries iff `n ≡ 3 mod 4`, positive class
/// first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleClass {
    pub n: usize,
    pub mults: Vec<i64>,
}

impl ModuleClass {
    pub fn add(&self, other: &ModuleClass) -> Result<ModuleClass> {
        if self.n != other.n || self.mults.len() != other.mults.len() {
            return Err(Error::invalid("ModuleClass::add: mismatched groups"));
        }
        Ok(ModuleClass {
            n: self.n,
            mults: self
                .mults
                .iter()
                .zip(&other.mults)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Multiplicities of the irreducibles in a `Cl_n`-family of length `k = n`.
///
/// For `n ≡ 3 mod 4` the two multiplicities are recovered from `p/s_n` and
/// the trace of the central volume element (`ρ(w) = ∓id` on the positive /
/// negative class).
pub fn decompose_module(fam: &CliffordFamily) -> Result<ModuleClass> {
    fam.validate()?;
    let n = fam.len();
    let s = irreducible_dim(n);
    if fam.p % s != 0 {
        return Err(Error::invalid(format!(
            "decompose_module: p = {} not divisible by s_{} = {}",
            fam.p, n, s
        )));
    }
    let total = (fam.p / s) as i64;
    if !has_two_classes(n) {
        return Ok(ModuleClass {
            n,
            mults: vec![total],
        });
    }
    let w = volume_element(fam)?;
    for j in &fam.mats {
        let res = commutator_residual(&w, j);
        if res > fam.tol.max(1e-9) {
            return Err(Error::relation("decompose_module: volume not central", res));
        }
    }
    let trace = w.trace();
    let t = trace / s as f64;
    let t_round = t.round();
    if (t - t_round).abs() > 1e-6 {
        return Err(Error::invalid(
            "decompose_module: volume trace inconsistent with integer multiplicities",
        ));
    }
    let diff = t_round as i64; // m_neg − m_pos
    if (total - diff) % 2 != 0 || diff.abs() > total {
        return Err(Error::invalid(
            "decompose_module: volume trace inconsistent with integer multiplicities",
        ));
    }
    let m_pos = (total - diff) / 2;
    let m_neg = (total + diff) / 2;
    Ok(ModuleClass {
        n,
        mults: vec![m_pos, m_neg],
    })
}

/// JSON wire form of a family: `{ "p": int, "mats": [[row-major floats]] }`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub p: usize,
    pub mats: Vec<Vec<f64>>,
}

impl From<&CliffordFamily> for FamilyJson {
    fn from(fam: &CliffordFamily) -> Self {
        FamilyJson {
            p: fam.p,
            mats: fam
                .mats
                .iter()
                .map(|m| {
                    let mut row_major = Vec::with_capacity(fam.p * fam.p);
                    for i in 0..fam.p {
                        for j in 0..fam.p {
                            row_major.push(m[(i, j)]);
                        }
                    }
                    row_major
                })
                .collect(),
        }
    }
}

impl TryFrom<FamilyJson> for CliffordFamily {
    type Error = Error;

    fn try_from(js: FamilyJson) -> Result<CliffordFamily> {
        let p = js.p;
        let mats = js
            .mats
            .into_iter()
            .map(|flat| {
                if flat.len() != p * p {
                    return Err(Error::invalid("family json: matrix size mismatch"));
                }
                Ok(Mat::from_row_slice(p, p, &flat))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CliffordFamily::new(mats))
    }
}
