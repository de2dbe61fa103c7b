//! Two-party equivalence: SO witnesses and the trace-identity battery over
//! `{T_1 ∘ T_2, T_12}`.
//!
//! Quasi-LU equivalence means `T̂_1 = O_1 T_1`, `T̂_2 = O_2 T_2` and
//! `T̂_12 = O_1 T_12 O_2ᵗ` for orthogonal `O_1`, `O_2`. With nonvanishing
//! tensors this is decided by a norm condition together with the Gram-word
//! traces of the pair `(T_1 T_2ᵗ, T_12)`. For qubits every `SO(3)` rotation
//! comes from `SU(2)`, so the same battery speaks about LU equivalence once the
//! orientation of the witness is pinned down by `det T_12`.

use nalgebra::DVector;

use crate::error::{LuError, LuResult};
use crate::hypermatrix::{max_abs_diff, orthogonality_residual, Hypermatrix, RealMatrix};
use crate::lu_action::ORTHOGONAL_TOL;
use crate::qudit_state::{delta, extract, DensityMatrix, TensorRep};
use crate::report::{
    describe_identity_failure, describe_norm_failure, norm_check, scalar_check, EquivalenceReport, NormCondition,
    UpgradeOutcome, UpgradeReport,
};
use crate::specht::{jing_check_with_ceiling, CheckConfig, Ceiling};
use crate::verdict::Verdict;

/// `{T_1, T_2, T_12}` of a bipartite state.
#[derive(Debug, Clone, PartialEq)]
pub struct Rep2 {
    dims: [usize; 2],
    pub t1: DVector<f64>,
    pub t2: DVector<f64>,
    pub t12: RealMatrix,
}

impl Rep2 {
    pub fn new(dims: [usize; 2], t1: DVector<f64>, t2: DVector<f64>, t12: RealMatrix) -> LuResult<Self> {
        let (n1, n2) = (delta(dims[0]), delta(dims[1]));
        if dims.iter().any(|&d| d < 2) {
            return Err(LuError::BadDimension(dims[0].min(dims[1])));
        }
        if t1.len() != n1 || t2.len() != n2 || t12.shape() != (n1, n2) {
            return Err(LuError::ShapeMismatch(format!(
                "dims {dims:?} need T1 of length {n1}, T2 of length {n2} and T12 of {n1}x{n2}"
            )));
        }
        Ok(Self { dims, t1, t2, t12 })
    }

    pub fn from_tensor_rep(rep: &TensorRep) -> LuResult<Self> {
        if rep.parties() != 2 {
            return Err(LuError::WrongArity { expected: 2, got: rep.parties() });
        }
        let dims = [rep.dims()[0], rep.dims()[1]];
        Self::new(
            dims,
            rep.tensor(&[1]).to_vector()?,
            rep.tensor(&[2]).to_vector()?,
            rep.tensor(&[1, 2]).to_matrix()?,
        )
    }

    pub fn from_state(rho: &DensityMatrix) -> LuResult<Self> {
        Self::from_tensor_rep(&extract(rho))
    }

    pub fn to_tensor_rep(&self) -> TensorRep {
        let tensors = [
            (vec![1], Hypermatrix::from_vector(&self.t1)),
            (vec![2], Hypermatrix::from_vector(&self.t2)),
            (vec![1, 2], Hypermatrix::from_matrix(&self.t12)),
        ]
        .into_iter()
        .collect();
        TensorRep::new(self.dims.to_vec(), tensors).expect("shapes validated on construction")
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    /// `T_1 ∘ T_2 = T_1 T_2ᵗ`.
    pub fn marginal_product(&self) -> RealMatrix {
        &self.t1 * self.t2.transpose()
    }

    /// `(O_1 T_1, O_2 T_2, O_1 T_12 O_2ᵗ)`.
    pub fn push_forward(&self, o1: &RealMatrix, o2: &RealMatrix) -> LuResult<Rep2> {
        let (n1, n2) = (self.t1.len(), self.t2.len());
        if o1.shape() != (n1, n1) || o2.shape() != (n2, n2) {
            return Err(LuError::ShapeMismatch("orthogonal factors do not match the representation".into()));
        }
        Ok(Rep2 { dims: self.dims, t1: o1 * &self.t1, t2: o2 * &self.t2, t12: o1 * &self.t12 * o2.transpose() })
    }

    fn same_shape(&self, other: &Rep2) -> LuResult<()> {
        if self.dims != other.dims {
            return Err(LuError::ShapeMismatch(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }
}

pub fn rep2_from(rep: &TensorRep) -> LuResult<Rep2> {
    Rep2::from_tensor_rep(rep)
}

pub(crate) fn check_witness_matrix(o: &RealMatrix, tol: f64, special: bool) -> LuResult<()> {
    let r = orthogonality_residual(o);
    if r > tol.max(ORTHOGONAL_TOL) {
        return Err(LuError::NotOrthogonal(format!("residual {r:e}")));
    }
    if special {
        let d = o.determinant();
        if (d - 1.0).abs() > tol.max(ORTHOGONAL_TOL) {
            return Err(LuError::NotOrthogonal(format!("determinant {d} where 1 is required")));
        }
    }
    Ok(())
}

/// Verifies `T̂_12 = (O_1, O_2) * T_12` and `T̂_1 ∘ T̂_2 = (O_1, O_2) * (T_1 ∘ T_2)` for a supplied witness.
pub fn so2_witness_check(
    a: &Rep2,
    b: &Rep2,
    o1: &RealMatrix,
    o2: &RealMatrix,
    tol: f64,
    special: bool,
) -> LuResult<bool> {
    a.same_shape(b)?;
    let (n1, n2) = (a.t1.len(), a.t2.len());
    if o1.shape() != (n1, n1) || o2.shape() != (n2, n2) {
        return Err(LuError::ShapeMismatch("witness shapes do not match the representation".into()));
    }
    check_witness_matrix(o1, tol, special)?;
    check_witness_matrix(o2, tol, special)?;
    let t12 = o1 * &a.t12 * o2.transpose();
    let marg = o1 * a.marginal_product() * o2.transpose();
    Ok(max_abs_diff(&t12, &b.t12) <= tol && max_abs_diff(&marg, &b.marginal_product()) <= tol)
}

/// `16(δ_1 + δ_2)^2`; it coincides with the two-vertex quiver bound for a pair of arrows.
pub fn ceiling_2(dims: [usize; 2]) -> Ceiling {
    let (n1, n2) = (delta(dims[0]) as u64, delta(dims[1]) as u64);
    Ceiling {
        value: 16 * (n1 + n2) * (n1 + n2),
        formula: format!(
            "16(δ1 + δ2)^2 with δ1 = {n1}, δ2 = {n2}; equals ((r + 2)(δ1 + δ2))^2 for r = 2 arrows"
        ),
    }
}

/// Norm screen plus Gram-word identities for `{T_1 ∘ T_2, T_12}`.
pub fn check_quasi_lu_2(a: &Rep2, b: &Rep2, cfg: &CheckConfig) -> LuResult<EquivalenceReport> {
    a.same_shape(b)?;
    cfg.validate()?;
    let tol = cfg.tol;
    let mut rep = EquivalenceReport::new("quasi-lu-2", a.dims.to_vec(), cfg.max_len, tol);
    rep.norms = vec![
        norm_check("T1", a.t1.norm(), b.t1.norm(), tol),
        norm_check("T2", a.t2.norm(), b.t2.norm(), tol),
        norm_check("T12", a.t12.norm(), b.t12.norm(), tol),
    ];
    rep.norm_conditions = vec![NormCondition {
        either: "T1".into(),
        or: "T2".into(),
        satisfied: rep.norms[0].passed || rep.norms[1].passed,
    }];
    if !rep.norms[2].passed && rep.norm_conditions[0].satisfied {
        rep.notes.push(
            "the T1/T2 norm condition holds but the T12 norms differ; every norm is an LU invariant, so all \
             three are reported and any mismatch distinguishes"
                .into(),
        );
    }

    let la = vec![a.marginal_product(), a.t12.clone()];
    let lb = vec![b.marginal_product(), b.t12.clone()];
    let ids = jing_check_with_ceiling(&la, &lb, cfg, ceiling_2(a.dims))?;
    rep.horizon = ids.horizon;
    rep.identities.push(ids);

    let vanishes = |x: f64, y: f64| x <= tol || y <= tol;
    for n in &rep.norms {
        if vanishes(n.lhs, n.rhs) {
            rep.degenerate.push(n.label.clone());
        }
    }
    let zero_marginals = rep.degenerate == ["T1", "T2"] && rep.norms[0].passed && rep.norms[1].passed;
    if zero_marginals {
        rep.notes.push(
            "T1 and T2 vanish on both sides, so quasi-LU equivalence reduces to orthogonal equivalence of T12, \
             which the T12 Gram words decide on their own"
                .into(),
        );
    }

    let ids = &rep.identities[0];
    let (verdict, reason) = if let Some(n) = rep.failed_norms().next() {
        (Verdict::Distinguished, describe_norm_failure(n))
    } else if ids.is_distinguished() {
        (Verdict::Distinguished, describe_identity_failure(ids))
    } else if !rep.degenerate.is_empty() && !zero_marginals {
        (Verdict::Inconclusive, format!("nondegeneracy hypothesis violated: {} vanishes", rep.degenerate.join(", ")))
    } else {
        let reason = match ids.verdict {
            Verdict::Equivalent => "all norms agree and every trace identity up to the ceiling holds".into(),
            _ => format!("all norms agree and no trace identity fails up to length {}", ids.horizon),
        };
        (ids.verdict, reason)
    };
    rep.verdict = verdict;
    rep.reason = reason;
    Ok(rep)
}

/// `det T̂_12 = det T_12 ≠ 0` fixes the orientation of a qubit witness.
fn upgrade_2qubit(a: &Rep2, b: &Rep2, tol: f64) -> UpgradeReport {
    let det = scalar_check("det T12", a.t12.determinant(), b.t12.determinant(), tol);
    let (outcome, reason) = if det.comparable {
        if det.passed {
            (UpgradeOutcome::Granted, "det T12 agrees and is nonzero; the witness can be taken in SO(3) x SO(3)".to_string())
        } else {
            (UpgradeOutcome::Denied, format!("det T12 differs ({:.12e} vs {:.12e}); LU maps preserve it", det.lhs, det.rhs))
        }
    } else if det.lhs.abs() <= tol && det.rhs.abs() <= tol {
        (UpgradeOutcome::Inconclusive, "det T12 vanishes; the orientation of a witness is not determined".to_string())
    } else {
        (UpgradeOutcome::Denied, format!("det T12 vanishes on one side only ({:.12e} vs {:.12e})", det.lhs, det.rhs))
    };
    UpgradeReport { outcome, reason, determinants: vec![det], signs: Vec::new() }
}

/// [`check_quasi_lu_2`] for two qubits, with the LU upgrade evaluated.
///
/// A denied upgrade turns the verdict into `Distinguished`, since `det T_12`
/// is an LU invariant.
pub fn check_lu_2qubit(a: &Rep2, b: &Rep2, cfg: &CheckConfig) -> LuResult<EquivalenceReport> {
    for r in [a, b] {
        if r.dims != [2, 2] {
            return Err(LuError::WrongDimension(r.dims.to_vec()));
        }
    }
    let mut rep = check_quasi_lu_2(a, b, cfg)?;
    rep.check = "lu-2qubit".into();
    if rep.verdict != Verdict::Distinguished {
        let up = upgrade_2qubit(a, b, cfg.tol);
        if up.outcome == UpgradeOutcome::Denied {
            rep.verdict = Verdict::Distinguished;
            rep.reason = format!("quasi-LU battery passes but {}", up.reason);
        }
        rep.upgrade = Some(up);
    }
    Ok(rep)
}
