//! Density matrices on `C^{d_1} ⊗ ... ⊗ C^{d_N}`, generalized Gell-Mann bases
//! and the correlation-tensor ("hypermatrix") representation.
//!
//! For every nonempty party subset `S = {j_1 < ... < j_M}` the tensor `T_S` has
//! entries
//!
//! ```text
//! T_S[α_1, ..., α_M] = Tr(ρ · λ_{α_1}^{(j_1)} ⋯ λ_{α_M}^{(j_M)})
//! ```
//!
//! where `λ^{(j)}` is a basis element of party `j` padded with identities. The
//! basis is Hilbert–Schmidt orthonormal, `Tr(λ_a λ_b) = δ_ab`, so the inverse
//! map carries a factor `prod_{k∈S} d_k`:
//!
//! ```text
//! ρ = (1/D) (I_D + Σ_S (prod_{k∈S} d_k) Σ_α T_S[α] λ_α^{(S)})
//! ```
//!
//! Party indices are 1-based (`T12` is the tensor of parties 1 and 2). The
//! global basis is the Kronecker one, party 1 most significant.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LuError, LuResult};
use crate::hypermatrix::Hypermatrix;
use crate::rng;

pub type ComplexMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const REALNESS_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn validate_dims(dims: &[usize]) -> LuResult<()> {
    if dims.is_empty() {
        return Err(LuError::ShapeMismatch("a state needs at least one party".into()));
    }
    match dims.iter().find(|&&d| d < 2) {
        Some(&d) => Err(LuError::BadDimension(d)),
        None => Ok(()),
    }
}

/// `d^2 - 1`, the length of a local correlation vector.
pub fn delta(d: usize) -> usize {
    d * d - 1
}

/// Nonempty subsets of `{1, ..., n}`, by size and then lexicographically.
pub fn party_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1u32 << n))
        .map(|mask| (0..n).filter(|k| mask & (1 << k) != 0).map(|k| k + 1).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// `T` followed by the party digits, e.g. `T123`.
pub fn subset_label(parties: &[usize]) -> String {
    let sep = if parties.iter().any(|&p| p > 9) { "_" } else { "" };
    let body: Vec<String> = parties.iter().map(|p| p.to_string()).collect();
    format!("T{}", body.join(sep))
}

pub fn kron_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(a.nrows() * br, a.ncols() * bc);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// Hilbert–Schmidt orthonormal basis of the traceless Hermitian `d×d` matrices.
///
/// Order: symmetric `(E_jk + E_kj)/√2` for `j < k`, antisymmetric
/// `-i(E_jk - E_kj)/√2` for `j < k`, then diagonal
/// `(Σ_{j<l} E_jj - l E_ll)/√(l(l+1))` for `l = 1..d-1`. For `d = 2` this is
/// `(σ_x, σ_y, σ_z)/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GellMannBasis {
    d: usize,
    elems: Vec<ComplexMatrix>,
}

impl GellMannBasis {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[ComplexMatrix] {
        &self.elems
    }

    pub fn get(&self, a: usize) -> &ComplexMatrix {
        &self.elems[a]
    }
}

pub fn gell_mann_basis(d: usize) -> LuResult<GellMannBasis> {
    if d < 2 {
        return Err(LuError::BadDimension(d));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut elems = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = Complex64::new(s, 0.0);
            m[(k, j)] = Complex64::new(s, 0.0);
            elems.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = Complex64::new(0.0, -s);
            m[(k, j)] = Complex64::new(0.0, s);
            elems.push(m);
        }
    }
    for l in 1..d {
        let c = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = Complex64::new(c, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * c, 0.0);
        elems.push(m);
    }
    Ok(GellMannBasis { d, elems })
}

/// A validated density matrix together with its party dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity before accepting `mat`.
    pub fn new(dims: Vec<usize>, mat: ComplexMatrix) -> LuResult<Self> {
        validate_dims(&dims)?;
        let total: usize = dims.iter().product();
        if mat.shape() != (total, total) {
            return Err(LuError::ShapeMismatch(format!(
                "matrix is {}x{} but dims {:?} need {}x{}",
                mat.nrows(),
                mat.ncols(),
                dims,
                total,
                total
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LuError::InvalidState { what: "non-finite entry".into(), residual: f64::NAN });
        }
        let herm = hermitian_residual(&mat);
        if herm > HERMITIAN_TOL {
            return Err(LuError::InvalidState { what: "not Hermitian".into(), residual: herm });
        }
        let tr = mat.trace();
        let tr_res = (tr - ONE).norm();
        if tr_res > TRACE_TOL {
            return Err(LuError::InvalidState { what: "trace is not 1".into(), residual: tr_res });
        }
        let state = Self { dims, mat };
        let min_eig = state.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(LuError::InvalidState { what: "not positive semidefinite".into(), residual: -min_eig });
        }
        Ok(state)
    }

    pub fn maximally_mixed(dims: &[usize]) -> LuResult<Self> {
        validate_dims(dims)?;
        let total: usize = dims.iter().product();
        let mat = ComplexMatrix::identity(total, total).map(|z| z / total as f64);
        Ok(Self { dims: dims.to_vec(), mat })
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(dims: &[usize], psi: &[Complex64]) -> LuResult<Self> {
        validate_dims(dims)?;
        let total: usize = dims.iter().product();
        if psi.len() != total {
            return Err(LuError::ShapeMismatch(format!("state vector has length {} but dims need {}", psi.len(), total)));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LuError::InvalidState { what: "zero state vector".into(), residual: 0.0 });
        }
        let mat = ComplexMatrix::from_fn(total, total, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(dims.to_vec(), mat)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.mat + self.mat.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.mat.shape() != other.mat.shape() {
            return f64::INFINITY;
        }
        self.mat.iter().zip(other.mat.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Wraps a matrix produced by an operation that preserves the invariants.
    pub(crate) fn from_trusted(dims: Vec<usize>, mat: ComplexMatrix) -> Self {
        Self { dims, mat }
    }
}

/// Correlation tensors `T_S` for every nonempty party subset `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRep {
    dims: Vec<usize>,
    tensors: BTreeMap<Vec<usize>, Hypermatrix>,
}

impl TensorRep {
    pub fn new(dims: Vec<usize>, tensors: BTreeMap<Vec<usize>, Hypermatrix>) -> LuResult<Self> {
        validate_dims(&dims)?;
        let subsets = party_subsets(dims.len());
        if tensors.len() != subsets.len() {
            return Err(LuError::ShapeMismatch(format!(
                "{} tensors supplied, {} parties need {}",
                tensors.len(),
                dims.len(),
                subsets.len()
            )));
        }
        for s in &subsets {
            let t = tensors
                .get(s)
                .ok_or_else(|| LuError::ShapeMismatch(format!("missing tensor {}", subset_label(s))))?;
            let want: Vec<usize> = s.iter().map(|&p| delta(dims[p - 1])).collect();
            if t.dims() != want.as_slice() {
                return Err(LuError::ShapeMismatch(format!(
                    "{} has dims {:?}, expected {:?}",
                    subset_label(s),
                    t.dims(),
                    want
                )));
            }
        }
        Ok(Self { dims, tensors })
    }

    pub fn zeros(dims: &[usize]) -> LuResult<Self> {
        validate_dims(dims)?;
        let tensors = party_subsets(dims.len())
            .into_iter()
            .map(|s| {
                let shape: Vec<usize> = s.iter().map(|&p| delta(dims[p - 1])).collect();
                (s, Hypermatrix::zeros(&shape))
            })
            .collect();
        Ok(Self { dims: dims.to_vec(), tensors })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn get(&self, parties: &[usize]) -> Option<&Hypermatrix> {
        self.tensors.get(parties)
    }

    /// # Panics
    /// If `parties` is not a nonempty sorted subset of the parties.
    pub fn tensor(&self, parties: &[usize]) -> &Hypermatrix {
        self.tensors
            .get(parties)
            .unwrap_or_else(|| panic!("no tensor for parties {parties:?}"))
    }

    /// Tensors in subset order (by size, then lexicographic).
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Hypermatrix)> + '_ {
        party_subsets(self.dims.len()).into_iter().map(move |s| {
            let t = &self.tensors[&s];
            (s, t)
        })
    }

    /// The sub-representation of the parties other than `party`, renumbered
    /// `1..N-1`. Equals the representation of the partial trace over `party`.
    pub fn restrict_without(&self, party: usize) -> LuResult<TensorRep> {
        let n = self.dims.len();
        if party == 0 || party > n {
            return Err(LuError::PartyOutOfRange { party, parties: n });
        }
        if n < 2 {
            return Err(LuError::WrongArity { expected: 2, got: n });
        }
        let dims: Vec<usize> = self.dims.iter().enumerate().filter(|(k, _)| k + 1 != party).map(|(_, &d)| d).collect();
        let tensors = self
            .tensors
            .iter()
            .filter(|(s, _)| !s.contains(&party))
            .map(|(s, t)| (s.iter().map(|&p| if p > party { p - 1 } else { p }).collect(), t.clone()))
            .collect();
        TensorRep::new(dims, tensors)
    }

    pub fn max_abs_diff(&self, other: &TensorRep) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.tensors.iter().fold(0.0, |m, (s, t)| m.max(t.max_abs_diff(&other.tensors[s])))
    }

    pub fn map_tensors(&self, mut f: impl FnMut(&[usize], &Hypermatrix) -> Hypermatrix) -> LuResult<TensorRep> {
        let tensors = self.tensors.iter().map(|(s, t)| (s.clone(), f(s, t))).collect();
        TensorRep::new(self.dims.clone(), tensors)
    }
}

/// Mode-`k` product on a complex column-major tensor.
fn complex_mode_product(data: &[Complex64], dims: &mut [usize], k: usize, x: &ComplexMatrix) -> Vec<Complex64> {
    let nk = dims[k];
    let rows = x.nrows();
    let inner: usize = dims[..k].iter().product();
    let outer: usize = dims[k + 1..].iter().product();
    let mut out = vec![ZERO; inner * rows * outer];
    for o in 0..outer {
        for j in 0..nk {
            let src = &data[inner * (j + nk * o)..inner * (j + 1 + nk * o)];
            for r in 0..rows {
                let w = x[(r, j)];
                if w == ZERO {
                    continue;
                }
                let dst = &mut out[inner * (r + rows * o)..inner * (r + 1 + rows * o)];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    dims[k] = rows;
    out
}

/// Identity followed by the Gell-Mann elements: the extended local basis `μ_0..μ_{d²-1}`.
fn extended_basis(d: usize) -> LuResult<Vec<ComplexMatrix>> {
    let mut out = vec![ComplexMatrix::identity(d, d)];
    out.extend(gell_mann_basis(d)?.elems);
    Ok(out)
}

/// Decomposes a composite index (party 1 most significant) into local indices.
fn split_index(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

/// Full coefficient tensor `C[a_1..a_N] = Tr(ρ μ_{a_1} ⊗ ... ⊗ μ_{a_N})`.
fn coefficient_tensor(dims: &[usize], mat: &ComplexMatrix) -> LuResult<(Vec<usize>, Vec<Complex64>)> {
    let n = dims.len();
    let total = mat.nrows();
    let mut pdims: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let mut pair = vec![ZERO; pdims.iter().product()];
    let (mut ii, mut jj) = (vec![0; n], vec![0; n]);
    for col in 0..total {
        split_index(col, dims, &mut jj);
        for row in 0..total {
            split_index(row, dims, &mut ii);
            let mut off = 0;
            let mut stride = 1;
            for k in 0..n {
                off += (ii[k] + dims[k] * jj[k]) * stride;
                stride *= pdims[k];
            }
            pair[off] = mat[(row, col)];
        }
    }
    let mut data = pair;
    for (k, &d) in dims.iter().enumerate() {
        let basis = extended_basis(d)?;
        // M[a, i + d j] = μ_a[j, i]
        let m = ComplexMatrix::from_fn(d * d, d * d, |a, p| basis[a][(p / d, p % d)]);
        data = complex_mode_product(&data, &mut pdims, k, &m);
    }
    Ok((pdims, data))
}

/// Correlation tensors of `rho`.
pub fn extract(rho: &DensityMatrix) -> TensorRep {
    extract_with_residual(rho).0
}

/// Like [`extract`], also returning the largest discarded imaginary part.
pub fn extract_with_residual(rho: &DensityMatrix) -> (TensorRep, f64) {
    let dims = rho.dims();
    let (cdims, coeffs) = coefficient_tensor(dims, rho.matrix()).expect("validated dims");
    let mut residual: f64 = 0.0;
    let mut tensors = BTreeMap::new();
    for s in party_subsets(dims.len()) {
        let shape: Vec<usize> = s.iter().map(|&p| delta(dims[p - 1])).collect();
        let mut full = vec![0usize; dims.len()];
        let t = Hypermatrix::from_fn(&shape, |alpha| {
            for (&p, &a) in s.iter().zip(alpha) {
                full[p - 1] = a + 1;
            }
            let mut off = 0;
            let mut stride = 1;
            for (&a, &cd) in full.iter().zip(&cdims) {
                off += a * stride;
                stride *= cd;
            }
            let z = coeffs[off];
            residual = residual.max(z.im.abs());
            z.re
        });
        for &p in &s {
            full[p - 1] = 0;
        }
        tensors.insert(s, t);
    }
    let rep = TensorRep { dims: dims.to_vec(), tensors };
    (rep, residual)
}

/// The operator `(1/D)(I + Σ_S (Π_{k∈S} d_k) Σ_α T_S[α] λ_α^{(S)})` without
/// checking that it is a state.
pub fn reconstruct_matrix(rep: &TensorRep) -> LuResult<ComplexMatrix> {
    let dims = rep.dims();
    let n = dims.len();
    let mut cdims: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let mut coeffs = vec![ZERO; cdims.iter().product()];
    coeffs[0] = ONE;
    for (s, t) in rep.iter() {
        let weight: f64 = s.iter().map(|&p| dims[p - 1] as f64).product();
        let shape = t.dims().to_vec();
        let mut alpha = vec![0usize; shape.len()];
        for &v in t.data() {
            let mut off = 0;
            let mut stride = 1;
            let mut pos = 0;
            for (k, &cd) in cdims.iter().enumerate().take(n) {
                let a = if pos < s.len() && s[pos] == k + 1 {
                    pos += 1;
                    alpha[pos - 1] + 1
                } else {
                    0
                };
                off += a * stride;
                stride *= cd;
            }
            coeffs[off] = Complex64::new(weight * v, 0.0);
            for (i, &m) in alpha.iter_mut().zip(&shape) {
                *i += 1;
                if *i < m {
                    break;
                }
                *i = 0;
            }
        }
    }
    let mut data = coeffs;
    for (k, &d) in dims.iter().enumerate() {
        let basis = extended_basis(d)?;
        // N[i + d j, a] = μ_a[i, j]
        let m = ComplexMatrix::from_fn(d * d, d * d, |p, a| basis[a][(p % d, p / d)]);
        data = complex_mode_product(&data, &mut cdims, k, &m);
    }
    let total: usize = dims.iter().product();
    let scale = 1.0 / total as f64;
    let (mut ii, mut jj) = (vec![0; n], vec![0; n]);
    let mut out = ComplexMatrix::zeros(total, total);
    for col in 0..total {
        split_index(col, dims, &mut jj);
        for row in 0..total {
            split_index(row, dims, &mut ii);
            let mut off = 0;
            let mut stride = 1;
            for k in 0..n {
                off += (ii[k] + dims[k] * jj[k]) * stride;
                stride *= cdims[k];
            }
            out[(row, col)] = data[off] * scale;
        }
    }
    Ok(out)
}

/// Inverse of [`extract`]; fails if the tensors do not describe a state.
pub fn reconstruct(rep: &TensorRep) -> LuResult<DensityMatrix> {
    let mat = reconstruct_matrix(rep)?;
    DensityMatrix::new(rep.dims().to_vec(), mat)
}

/// Traces out `party` (1-based).
pub fn partial_trace(rho: &DensityMatrix, party: usize) -> LuResult<DensityMatrix> {
    let dims = rho.dims();
    let n = dims.len();
    if n < 2 {
        return Err(LuError::WrongArity { expected: 2, got: n });
    }
    if party == 0 || party > n {
        return Err(LuError::PartyOutOfRange { party, parties: n });
    }
    let k = party - 1;
    let dk = dims[k];
    let after: usize = dims[k + 1..].iter().product();
    let before: usize = dims[..k].iter().product();
    let reduced = before * after;
    let mat = rho.matrix();
    let mut out = ComplexMatrix::zeros(reduced, reduced);
    for c in 0..reduced {
        let (cb, ca) = (c / after, c % after);
        for r in 0..reduced {
            let (rb, ra) = (r / after, r % after);
            let mut acc = ZERO;
            for t in 0..dk {
                acc += mat[((rb * dk + t) * after + ra, (cb * dk + t) * after + ca)];
            }
            out[(r, c)] = acc;
        }
    }
    let rdims: Vec<usize> = dims.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &d)| d).collect();
    Ok(DensityMatrix::from_trusted(rdims, out))
}

/// `G G† / Tr(G G†)` for a seeded complex Gaussian `G`.
pub fn random_density(dims: &[usize], seed: u64) -> LuResult<DensityMatrix> {
    validate_dims(dims)?;
    let total: usize = dims.iter().product();
    let mut rng = rng::seeded(seed);
    let g = rng::gaussian_complex(total, total, &mut rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let h = (&m + m.adjoint()).map(|z| z * (0.5 / tr));
    Ok(DensityMatrix::from_trusted(dims.to_vec(), h))
}
