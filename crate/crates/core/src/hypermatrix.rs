//! Dense real hypermatrices.
//!
//! A [`Hypermatrix`] of order `d` stores its entries in generalized
//! column-major order: the first index varies fastest, so the entry at the
//! 0-based multi-index `(i_1, ..., i_d)` lives at flat offset
//! `sum_l i_l * prod_{m<l} n_m`. With this layout the mode-1 unfolding and
//! [`vec`] are the same flat array.
//!
//! Matrices are plain `nalgebra` dense matrices ([`RealMatrix`]), which are
//! column-major as well; an order-2 hypermatrix and a matrix of the same shape
//! share their flat data.
//!
//! Mode indices passed to [`unfold`] are 1-based so that `unfold(t, 1)` reads
//! as `T_(1)`. The column ordering of a mode-k unfolding lists the remaining
//! modes in increasing order with the lowest one fastest, i.e.
//!
//! ```text
//! j = sum_{l != k} i_l * prod_{m < l, m != k} n_m        (0-based)
//! ```
//!
//! which reproduces `T_(2) = [t_111 t_211 ... t_112 t_212 ...]` for an order-3
//! tensor and gives `((A1, A2, A3) * T)_(2) = A2 T_(2) (A3 ⊗ A1)^t`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{LuError, LuResult};

pub type RealMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypermatrix {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Hypermatrix {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> LuResult<Self> {
        if dims.is_empty() {
            return Err(LuError::ShapeMismatch("hypermatrix order must be at least 1".into()));
        }
        if let Some(pos) = dims.iter().position(|&n| n == 0) {
            return Err(LuError::ShapeMismatch(format!("dimension {} of {:?} is zero", pos + 1, dims)));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(LuError::ShapeMismatch(format!(
                "data length {} does not match dims {:?} (expected {})",
                data.len(),
                dims,
                len
            )));
        }
        Ok(Self { dims, data })
    }

    /// # Panics
    /// If `dims` is empty or contains a zero.
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self::new(dims.to_vec(), vec![0.0; len]).expect("invalid hypermatrix dims")
    }

    /// Builds a hypermatrix by evaluating `f` at every 0-based multi-index,
    /// visited in storage order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut out = Self::zeros(dims);
        let mut idx = vec![0usize; dims.len()];
        for slot in out.data.iter_mut() {
            *slot = f(&idx);
            for (i, &n) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < n {
                    break;
                }
                *i = 0;
            }
        }
        out
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self::from_slice_vector(v.as_slice())
    }

    pub fn from_slice_vector(v: &[f64]) -> Self {
        Self::new(vec![v.len()], v.to_vec()).expect("empty vector")
    }

    pub fn from_matrix(m: &RealMatrix) -> Self {
        Self::new(vec![m.nrows(), m.ncols()], m.as_slice().to_vec()).expect("empty matrix")
    }

    pub fn to_matrix(&self) -> LuResult<RealMatrix> {
        match self.dims.as_slice() {
            [r, c] => Ok(RealMatrix::from_column_slice(*r, *c, &self.data)),
            _ => Err(LuError::ShapeMismatch(format!("expected an order-2 hypermatrix, got dims {:?}", self.dims))),
        }
    }

    pub fn to_vector(&self) -> LuResult<DVector<f64>> {
        match self.dims.as_slice() {
            [_] => Ok(DVector::from_column_slice(&self.data)),
            _ => Err(LuError::ShapeMismatch(format!("expected an order-1 hypermatrix, got dims {:?}", self.dims))),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat offset of a 0-based multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            debug_assert!(i < n);
            off += i * stride;
            stride *= n;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest entrywise absolute difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Hypermatrix) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, alpha: f64) -> Hypermatrix {
        Hypermatrix { dims: self.dims.clone(), data: self.data.iter().map(|x| alpha * x).collect() }
    }

    fn zip_with(&self, other: &Hypermatrix, f: impl Fn(f64, f64) -> f64) -> Hypermatrix {
        assert_eq!(self.dims, other.dims, "hypermatrix shapes differ");
        Hypermatrix {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Add for &Hypermatrix {
    type Output = Hypermatrix;
    fn add(self, rhs: &Hypermatrix) -> Hypermatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Hypermatrix {
    type Output = Hypermatrix;
    fn sub(self, rhs: &Hypermatrix) -> Hypermatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&Hypermatrix> for f64 {
    type Output = Hypermatrix;
    fn mul(self, rhs: &Hypermatrix) -> Hypermatrix {
        rhs.scaled(self)
    }
}

/// `A ∘ B`: order `d + e`, entry `(i.., j..)` equal to `A(i..) B(j..)`.
pub fn outer_product(a: &Hypermatrix, b: &Hypermatrix) -> Hypermatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    let mut data = Vec::with_capacity(a.len() * b.len());
    for &y in &b.data {
        data.extend(a.data.iter().map(|&x| x * y));
    }
    Hypermatrix { dims, data }
}

/// Mode-`k` product (0-based `k`): contracts mode `k` of `a` with the columns of `x`.
fn mode_product(a: &Hypermatrix, k: usize, x: &RealMatrix) -> Hypermatrix {
    let nk = a.dims[k];
    let rows = x.nrows();
    let inner: usize = a.dims[..k].iter().product();
    let outer: usize = a.dims[k + 1..].iter().product();
    let mut dims = a.dims.clone();
    dims[k] = rows;
    let mut data = vec![0.0; inner * rows * outer];
    for o in 0..outer {
        for j in 0..nk {
            let src = &a.data[inner * (j + nk * o)..inner * (j + 1 + nk * o)];
            for r in 0..rows {
                let w = x[(r, j)];
                if w == 0.0 {
                    continue;
                }
                let dst = &mut data[inner * (r + rows * o)..inner * (r + 1 + rows * o)];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    Hypermatrix { dims, data }
}

/// Multilinear matrix multiplication `(X_1, ..., X_d) * A`:
///
/// ```text
/// A'_{i_1..i_d} = sum_{j_1..j_d} (X_1)_{i_1 j_1} ... (X_d)_{i_d j_d} A_{j_1..j_d}
/// ```
pub fn multilinear_mult(mats: &[RealMatrix], a: &Hypermatrix) -> LuResult<Hypermatrix> {
    if mats.len() != a.order() {
        return Err(LuError::DimensionMismatch(format!(
            "{} matrices supplied for a hypermatrix of order {}",
            mats.len(),
            a.order()
        )));
    }
    for (k, (x, &n)) in mats.iter().zip(&a.dims).enumerate() {
        if x.ncols() != n {
            return Err(LuError::DimensionMismatch(format!(
                "matrix {} has {} columns but mode {} has size {}",
                k + 1,
                x.ncols(),
                k + 1,
                n
            )));
        }
        if x.nrows() == 0 {
            return Err(LuError::DimensionMismatch(format!("matrix {} has no rows", k + 1)));
        }
    }
    let mut out = a.clone();
    for (k, x) in mats.iter().enumerate() {
        out = mode_product(&out, k, x);
    }
    Ok(out)
}

/// Mode-`mode` unfolding `A_(mode)` (1-based mode).
pub fn unfold(a: &Hypermatrix, mode: usize) -> LuResult<RealMatrix> {
    if mode == 0 || mode > a.order() {
        return Err(LuError::ModeOutOfRange { mode, order: a.order() });
    }
    let k = mode - 1;
    let nk = a.dims[k];
    let inner: usize = a.dims[..k].iter().product();
    let outer: usize = a.dims[k + 1..].iter().product();
    let mut m = RealMatrix::zeros(nk, inner * outer);
    // Column j = i_inner + inner * i_outer, which is the index map above.
    for o in 0..outer {
        for i in 0..nk {
            let src = &a.data[inner * (i + nk * o)..inner * (i + 1 + nk * o)];
            for (p, &v) in src.iter().enumerate() {
                m[(i, p + inner * o)] = v;
            }
        }
    }
    Ok(m)
}

/// Column-stacking vectorization `[m_11 m_21 ... m_m1 m_12 ... m_mn]^t`.
pub fn vec(m: &RealMatrix) -> Hypermatrix {
    Hypermatrix::from_slice_vector(m.as_slice())
}

/// Kronecker product; block `(i, j)` of the result is `a_ij * B`.
pub fn kron(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = RealMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == 0.0 {
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

/// Largest entry of `|M^t M - I|`; used for orthogonality tests throughout.
pub fn orthogonality_residual(m: &RealMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let g = m.transpose() * m;
    let n = g.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            r = r.max((g[(i, j)] - e).abs());
        }
    }
    r
}

pub fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, row_major: &[f64]) -> RealMatrix {
        RealMatrix::from_row_slice(rows, cols, row_major)
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(Hypermatrix::new(vec![], vec![]).is_err());
        assert!(Hypermatrix::new(vec![2, 0], vec![]).is_err());
        assert!(Hypermatrix::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Hypermatrix::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn offset_is_first_index_fastest() {
        let t = Hypermatrix::from_fn(&[2, 3, 4], |i| (i[0] + 10 * i[1] + 100 * i[2]) as f64);
        assert_eq!(t.data()[0], 0.0);
        assert_eq!(t.data()[1], 1.0);
        assert_eq!(t.data()[2], 10.0);
        assert_eq!(t.data()[6], 100.0);
        assert_eq!(t.offset(&[1, 2, 3]), 1 + 2 * 2 + 3 * 6);
        assert_eq!(t.get(&[1, 2, 3]), 321.0);
    }

    #[test]
    fn outer_product_with_zero_is_zero() {
        let z = Hypermatrix::zeros(&[2, 3]);
        let b = Hypermatrix::from_fn(&[4], |i| i[0] as f64 + 1.0);
        let p = outer_product(&z, &b);
        assert_eq!(p.dims(), &[2, 3, 4]);
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn outer_product_of_basis_vectors() {
        let v = Hypermatrix::from_slice_vector(&[1.0, 0.0, 0.0]);
        let p = outer_product(&v, &v).to_matrix().unwrap();
        let mut expect = RealMatrix::zeros(3, 3);
        expect[(0, 0)] = 1.0;
        assert_eq!(p, expect);
    }

    #[test]
    fn outer_product_vector_matrix_against_triple_loop() {
        let v = Hypermatrix::from_slice_vector(&[1.0, 2.0]);
        let m = Hypermatrix::from_matrix(&mat(2, 2, &[3.0, 4.0, 5.0, 6.0]));
        let p = outer_product(&v, &m);
        assert_eq!(p.dims(), &[2, 2, 2]);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(p.get(&[i, j, k]), v.get(&[i]) * m.get(&[j, k]));
                }
            }
        }
    }

    #[test]
    fn multilinear_identity_and_zero() {
        let t = Hypermatrix::from_fn(&[2, 3, 4], |i| (i[0] * 7 + i[1] * 3 + i[2]) as f64 - 5.0);
        let ids: Vec<_> = t.dims().iter().map(|&n| RealMatrix::identity(n, n)).collect();
        assert_eq!(multilinear_mult(&ids, &t).unwrap(), t);
        let zs: Vec<_> = [5, 1, 2].iter().zip(t.dims()).map(|(&r, &c)| RealMatrix::zeros(r, c)).collect();
        let z = multilinear_mult(&zs, &t).unwrap();
        assert_eq!(z.dims(), &[5, 1, 2]);
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn multilinear_rejects_mismatched_inputs() {
        let t = Hypermatrix::zeros(&[2, 3]);
        let e = multilinear_mult(&[RealMatrix::identity(2, 2)], &t).unwrap_err();
        assert!(matches!(e, LuError::DimensionMismatch(_)));
        let e = multilinear_mult(&[RealMatrix::identity(2, 2), RealMatrix::identity(2, 2)], &t).unwrap_err();
        assert!(matches!(e, LuError::DimensionMismatch(_)));
    }

    #[test]
    fn matrix_case_is_left_right_multiplication() {
        let t = mat(2, 3, &[1.0, -2.0, 0.5, 3.0, 4.0, -1.0]);
        let x1 = mat(2, 2, &[0.0, 1.0, -1.0, 2.0]);
        let x2 = mat(1, 3, &[1.0, 1.0, 2.0]);
        let got = multilinear_mult(&[x1.clone(), x2.clone()], &Hypermatrix::from_matrix(&t)).unwrap();
        assert_eq!(got.to_matrix().unwrap(), &x1 * &t * x2.transpose());
    }

    #[test]
    fn unfold_order3_rows_match_printed_layout() {
        // T_(1) row 1 reads t_111, t_121, ..., t_1δ₂1, t_112, ...
        let t = Hypermatrix::from_fn(&[2, 3, 2], |i| (100 * (i[0] + 1) + 10 * (i[1] + 1) + i[2] + 1) as f64);
        let t1 = unfold(&t, 1).unwrap();
        assert_eq!(t1.shape(), (2, 6));
        let row: Vec<f64> = t1.row(0).iter().copied().collect();
        assert_eq!(row, vec![111.0, 121.0, 131.0, 112.0, 122.0, 132.0]);
        let t2 = unfold(&t, 2).unwrap();
        assert_eq!(t2.shape(), (3, 4));
        let row: Vec<f64> = t2.row(0).iter().copied().collect();
        assert_eq!(row, vec![111.0, 211.0, 112.0, 212.0]);
        let t3 = unfold(&t, 3).unwrap();
        assert_eq!(t3.shape(), (2, 6));
        let row: Vec<f64> = t3.row(1).iter().copied().collect();
        assert_eq!(row, vec![112.0, 212.0, 122.0, 222.0, 132.0, 232.0]);
    }

    #[test]
    fn unfold_matrix_is_identity_map() {
        let m = mat(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unfold(&Hypermatrix::from_matrix(&m), 1).unwrap(), m);
    }

    #[test]
    fn unfold_mode_out_of_range() {
        let t = Hypermatrix::zeros(&[2, 2]);
        assert_eq!(unfold(&t, 0).unwrap_err(), LuError::ModeOutOfRange { mode: 0, order: 2 });
        assert_eq!(unfold(&t, 3).unwrap_err(), LuError::ModeOutOfRange { mode: 3, order: 2 });
    }

    #[test]
    fn vec_identity_and_row() {
        assert_eq!(vec(&RealMatrix::identity(2, 2)).data(), &[1.0, 0.0, 0.0, 1.0]);
        let row = mat(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&row).data(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&row).dims(), &[4]);
    }

    #[test]
    fn kron_identity_and_zero() {
        assert_eq!(kron(&RealMatrix::identity(2, 2), &RealMatrix::identity(3, 3)), RealMatrix::identity(6, 6));
        let b = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(kron(&RealMatrix::zeros(1, 1), &b), RealMatrix::zeros(2, 2));
        let a = mat(1, 2, &[2.0, -1.0]);
        assert_eq!(kron(&a, &b), mat(2, 4, &[2.0, 4.0, -1.0, -2.0, 6.0, 8.0, -3.0, -4.0]));
    }
}
