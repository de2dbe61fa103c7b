//! Local unitary action on states and the induced orthogonal action on
//! correlation tensors.
//!
//! A unitary `U` on `C^d` rotates the traceless Hermitian operators, giving a
//! real orthogonal matrix `O(U)` of size `d^2 - 1` with
//! `O[a, b] = Tr(λ_a U λ_b U†)`. Conjugating a state by `U_1 ⊗ ... ⊗ U_N` maps
//! every `T_S` to `(O(U_{j_1}), ..., O(U_{j_M})) · T_S`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LuError, LuResult};
use crate::hypermatrix::{multilinear_mult, orthogonality_residual, RealMatrix};
use crate::qudit_state::{gell_mann_basis, kron_complex, ComplexMatrix, DensityMatrix, TensorRep};
use crate::rng;

pub const UNITARY_TOL: f64 = 1e-12;
pub const ORTHOGONAL_TOL: f64 = 1e-12;

/// `max |U†U - I|`.
pub fn unitary_residual(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let n = u.nrows();
    let mut r: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            r = r.max((g[(i, j)] - Complex64::new(id, 0.0)).norm());
        }
    }
    r
}

/// One unitary per party.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitaries {
    mats: Vec<ComplexMatrix>,
}

impl LocalUnitaries {
    pub fn new(mats: Vec<ComplexMatrix>) -> LuResult<Self> {
        for u in &mats {
            let r = unitary_residual(u);
            if r > UNITARY_TOL {
                return Err(LuError::NotUnitary(r));
            }
        }
        Ok(Self { mats })
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { mats: dims.iter().map(|&d| ComplexMatrix::identity(d, d)).collect() }
    }

    /// Independent Haar-random special unitaries, one stream per party.
    pub fn random(dims: &[usize], seed: u64) -> LuResult<Self> {
        let mats = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| random_special_unitary(d, rng::derive_seed(seed, k as u64)))
            .collect::<LuResult<Vec<_>>>()?;
        Ok(Self { mats })
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    pub fn dims(&self) -> Vec<usize> {
        self.mats.iter().map(|u| u.nrows()).collect()
    }

    pub fn kron(&self) -> ComplexMatrix {
        let mut it = self.mats.iter();
        let first = it.next().cloned().unwrap_or_else(|| ComplexMatrix::identity(1, 1));
        it.fold(first, |acc, u| kron_complex(&acc, u))
    }

    pub fn induced(&self) -> LuResult<Vec<RealMatrix>> {
        self.mats.iter().map(induced_orthogonal).collect()
    }
}

/// `(U_1 ⊗ ... ⊗ U_N) ρ (U_1 ⊗ ... ⊗ U_N)†`.
pub fn conjugate_local(rho: &DensityMatrix, us: &LocalUnitaries) -> LuResult<DensityMatrix> {
    if us.dims() != rho.dims() {
        return Err(LuError::DimensionMismatch(format!(
            "unitaries act on {:?} but the state has dims {:?}",
            us.dims(),
            rho.dims()
        )));
    }
    let u = us.kron();
    let m = &u * rho.matrix() * u.adjoint();
    let h = (&m + m.adjoint()).map(|z| z * 0.5);
    Ok(DensityMatrix::from_trusted(rho.dims().to_vec(), h))
}

/// `O[a, b] = Tr(λ_a U λ_b U†)`, the rotation of the Gell-Mann basis induced by `U`.
pub fn induced_orthogonal(u: &ComplexMatrix) -> LuResult<RealMatrix> {
    let r = unitary_residual(u);
    if r > UNITARY_TOL {
        return Err(LuError::NotUnitary(r));
    }
    let basis = gell_mann_basis(u.nrows())?;
    let rotated: Vec<ComplexMatrix> = basis.elems().iter().map(|l| u * l * u.adjoint()).collect();
    let n = basis.len();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        let la = basis.get(a);
        let rb = &rotated[b];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..la.nrows() {
            for j in 0..la.ncols() {
                acc += la[(i, j)] * rb[(j, i)];
            }
        }
        acc.re
    }))
}

/// Applies `(O_{j_1}, ..., O_{j_M})` to each `T_S`.
pub fn push_forward(rep: &TensorRep, orthos: &[RealMatrix]) -> LuResult<TensorRep> {
    if orthos.len() != rep.parties() {
        return Err(LuError::WrongArity { expected: rep.parties(), got: orthos.len() });
    }
    for (k, (o, &d)) in orthos.iter().zip(rep.dims()).enumerate() {
        let n = d * d - 1;
        if o.shape() != (n, n) {
            return Err(LuError::DimensionMismatch(format!(
                "orthogonal matrix for party {} is {}x{}, expected {}x{}",
                k + 1,
                o.nrows(),
                o.ncols(),
                n,
                n
            )));
        }
    }
    let mut err = None;
    let out = rep.map_tensors(|s, t| {
        let mats: Vec<RealMatrix> = s.iter().map(|&p| orthos[p - 1].clone()).collect();
        multilinear_mult(&mats, t).unwrap_or_else(|e| {
            err = Some(e);
            t.clone()
        })
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` pushed into `Q`.
pub fn random_unitary(d: usize, seed: u64) -> LuResult<ComplexMatrix> {
    if d == 0 {
        return Err(LuError::BadDimension(d));
    }
    let mut r = rng::seeded(seed);
    let g = rng::gaussian_complex(d, d, &mut r);
    let qr = g.qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for j in 0..d {
        let z = rr[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    Ok(q)
}

/// Haar-distributed element of `SU(d)`.
pub fn random_special_unitary(d: usize, seed: u64) -> LuResult<ComplexMatrix> {
    let u = random_unitary(d, seed)?;
    let theta = u.determinant().arg();
    let fix = Complex64::from_polar(1.0, -theta / d as f64);
    Ok(u.map(|z| z * fix))
}

/// Haar-distributed element of `O(n)`, or of `SO(n)` when `special`.
pub fn random_orthogonal(n: usize, special: bool, seed: u64) -> LuResult<RealMatrix> {
    if n == 0 {
        return Err(LuError::BadDimension(n));
    }
    let mut r = rng::seeded(seed);
    let g = rng::gaussian_real(n, n, &mut r);
    let qr = g.qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for j in 0..n {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if special && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(q)
}

/// Rejects matrices that are not orthogonal to [`ORTHOGONAL_TOL`].
pub fn check_orthogonal(o: &RealMatrix) -> LuResult<()> {
    let r = orthogonality_residual(o);
    if r > ORTHOGONAL_TOL {
        return Err(LuError::NotOrthogonal(format!("residual {r:e}")));
    }
    Ok(())
}
