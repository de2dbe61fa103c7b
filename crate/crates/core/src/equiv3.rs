//! Three-party equivalence: SO witnesses, the norm screen, the two condition
//! batteries and the qubit LU upgrade.
//!
//! A battery packs the correlation tensors into six matrices sharing their
//! row space (party 1 for version 1, party 2 for version 2):
//!
//! ```text
//! v1: (T123)_(1), (T1∘T23)_(1), (T2∘T13)_(2), (T12∘T3)_(1), (T1∘T2∘T3)_(1), T1
//! v2: (T123)_(2), (T1∘T23)_(2), (T2∘T13)_(1), (T12∘T3)_(2), (T1∘T2∘T3)_(2), T2
//! ```
//!
//! Under local orthogonal maps the first five transform as `O A (O_3 ⊗ O')ᵗ`
//! and the last as `O A`, so the two-block trace identities are necessary.
//! Sufficiency additionally needs an invertible Gram matrix and quasi-LU
//! equivalence of the partial trace over the row party.
//!
//! The Gram matrices named by the sufficiency condition are Gram matrices of
//! unfoldings of outer products with a vector factor. Those unfoldings have
//! rank one, so for `δ_j δ_k > 1` the condition never holds, and a clean run
//! is reported as consistent at the horizon rather than equivalent.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::equiv2::{check_quasi_lu_2, check_witness_matrix, Rep2};
use crate::error::{LuError, LuResult};
use crate::hypermatrix::{multilinear_mult, outer_product, unfold, Hypermatrix, RealMatrix};
use crate::qudit_state::{delta, extract, DensityMatrix, TensorRep};
use crate::report::{
    describe_identity_failure, describe_norm_failure, norm_check, scalar_check, EquivalenceReport, GramCheck,
    GramCondition, NormCheck, NormCondition, ScalarCheck, UpgradeOutcome, UpgradeReport,
};
use crate::specht::{futorny_two_block_check, CheckConfig};
use crate::verdict::Verdict;

/// Relative singular-value threshold for Gram invertibility.
pub const GRAM_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    V1,
    V2,
}

impl Battery {
    /// The party whose orthogonal factor acts on the rows.
    pub fn row_party(self) -> usize {
        match self {
            Battery::V1 => 1,
            Battery::V2 => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Battery::V1 => "v1",
            Battery::V2 => "v2",
        }
    }
}

/// `{T_1, T_2, T_3, T_12, T_13, T_23, T_123}` of a tripartite state.
#[derive(Debug, Clone, PartialEq)]
pub struct Rep3 {
    dims: [usize; 3],
    pub t1: DVector<f64>,
    pub t2: DVector<f64>,
    pub t3: DVector<f64>,
    pub t12: RealMatrix,
    pub t13: RealMatrix,
    pub t23: RealMatrix,
    pub t123: Hypermatrix,
}

fn hv(v: &DVector<f64>) -> Hypermatrix {
    Hypermatrix::from_vector(v)
}

fn hm(m: &RealMatrix) -> Hypermatrix {
    Hypermatrix::from_matrix(m)
}

impl Rep3 {
    pub fn from_tensor_rep(rep: &TensorRep) -> LuResult<Self> {
        if rep.parties() != 3 {
            return Err(LuError::WrongArity { expected: 3, got: rep.parties() });
        }
        let d = rep.dims();
        Ok(Self {
            dims: [d[0], d[1], d[2]],
            t1: rep.tensor(&[1]).to_vector()?,
            t2: rep.tensor(&[2]).to_vector()?,
            t3: rep.tensor(&[3]).to_vector()?,
            t12: rep.tensor(&[1, 2]).to_matrix()?,
            t13: rep.tensor(&[1, 3]).to_matrix()?,
            t23: rep.tensor(&[2, 3]).to_matrix()?,
            t123: rep.tensor(&[1, 2, 3]).clone(),
        })
    }

    pub fn from_state(rho: &DensityMatrix) -> LuResult<Self> {
        Self::from_tensor_rep(&extract(rho))
    }

    pub fn to_tensor_rep(&self) -> TensorRep {
        let tensors = [
            (vec![1], hv(&self.t1)),
            (vec![2], hv(&self.t2)),
            (vec![3], hv(&self.t3)),
            (vec![1, 2], hm(&self.t12)),
            (vec![1, 3], hm(&self.t13)),
            (vec![2, 3], hm(&self.t23)),
            (vec![1, 2, 3], self.t123.clone()),
        ]
        .into_iter()
        .collect();
        TensorRep::new(self.dims.to_vec(), tensors).expect("shapes come from a valid representation")
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn push_forward(&self, o: [&RealMatrix; 3]) -> LuResult<Rep3> {
        for (k, m) in o.iter().enumerate() {
            let n = delta(self.dims[k]);
            if m.shape() != (n, n) {
                return Err(LuError::ShapeMismatch(format!("orthogonal factor {} must be {n}x{n}", k + 1)));
            }
        }
        let [o1, o2, o3] = o;
        Ok(Rep3 {
            dims: self.dims,
            t1: o1 * &self.t1,
            t2: o2 * &self.t2,
            t3: o3 * &self.t3,
            t12: o1 * &self.t12 * o2.transpose(),
            t13: o1 * &self.t13 * o3.transpose(),
            t23: o2 * &self.t23 * o3.transpose(),
            t123: multilinear_mult(&[o1.clone(), o2.clone(), o3.clone()], &self.t123)?,
        })
    }

    /// `T_1 ∘ T_23`, modes (1, 2, 3).
    pub fn t1_t23(&self) -> Hypermatrix {
        outer_product(&hv(&self.t1), &hm(&self.t23))
    }

    /// `T_2 ∘ T_13`, modes (2, 1, 3).
    pub fn t2_t13(&self) -> Hypermatrix {
        outer_product(&hv(&self.t2), &hm(&self.t13))
    }

    /// `T_12 ∘ T_3`, modes (1, 2, 3).
    pub fn t12_t3(&self) -> Hypermatrix {
        outer_product(&hm(&self.t12), &hv(&self.t3))
    }

    /// `T_1 ∘ T_2 ∘ T_3`.
    pub fn t1_t2_t3(&self) -> Hypermatrix {
        outer_product(&outer_product(&hv(&self.t1), &hv(&self.t2)), &hv(&self.t3))
    }

    fn same_shape(&self, other: &Rep3) -> LuResult<()> {
        if self.dims != other.dims {
            return Err(LuError::ShapeMismatch(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    fn norm_table(&self) -> [(&'static str, f64); 7] {
        [
            ("T1", self.t1.norm()),
            ("T2", self.t2.norm()),
            ("T3", self.t3.norm()),
            ("T12", self.t12.norm()),
            ("T13", self.t13.norm()),
            ("T23", self.t23.norm()),
            ("T123", self.t123.frobenius_norm()),
        ]
    }
}

pub fn rep3_from(rep: &TensorRep) -> LuResult<Rep3> {
    Rep3::from_tensor_rep(rep)
}

/// Verifies the four SO blocks for a supplied witness `(O_1, O_2, O_3)`.
pub fn so3_witness_check(
    a: &Rep3,
    b: &Rep3,
    o1: &RealMatrix,
    o2: &RealMatrix,
    o3: &RealMatrix,
    tol: f64,
) -> LuResult<bool> {
    a.same_shape(b)?;
    for (k, o) in [o1, o2, o3].into_iter().enumerate() {
        let n = delta(a.dims[k]);
        if o.shape() != (n, n) {
            return Err(LuError::ShapeMismatch(format!("witness factor {} must be {n}x{n}", k + 1)));
        }
        check_witness_matrix(o, tol, false)?;
    }
    let ooo = [o1.clone(), o2.clone(), o3.clone()];
    let swapped = [o2.clone(), o1.clone(), o3.clone()];
    let blocks = [
        (multilinear_mult(&ooo, &a.t123)?, b.t123.clone()),
        (multilinear_mult(&ooo, &a.t1_t23())?, b.t1_t23()),
        (multilinear_mult(&swapped, &a.t2_t13())?, b.t2_t13()),
        (multilinear_mult(&ooo, &a.t12_t3())?, b.t12_t3()),
    ];
    Ok(blocks.iter().all(|(lhs, rhs)| lhs.max_abs_diff(rhs) <= tol))
}

/// Compares all seven Frobenius norms; each one is an LU invariant.
pub fn necessary_screen_3(a: &Rep3, b: &Rep3, tol: f64) -> LuResult<Vec<NormCheck>> {
    a.same_shape(b)?;
    Ok(a.norm_table().iter().zip(b.norm_table()).map(|(&(l, x), (_, y))| norm_check(l, x, y, tol)).collect())
}

fn column(v: &DVector<f64>) -> RealMatrix {
    RealMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn build_battery_v1(a: &Rep3) -> LuResult<[RealMatrix; 6]> {
    Ok([
        unfold(&a.t123, 1)?,
        unfold(&a.t1_t23(), 1)?,
        unfold(&a.t2_t13(), 2)?,
        unfold(&a.t12_t3(), 1)?,
        unfold(&a.t1_t2_t3(), 1)?,
        column(&a.t1),
    ])
}

pub fn build_battery_v2(a: &Rep3) -> LuResult<[RealMatrix; 6]> {
    Ok([
        unfold(&a.t123, 2)?,
        unfold(&a.t1_t23(), 2)?,
        unfold(&a.t2_t13(), 1)?,
        unfold(&a.t12_t3(), 2)?,
        unfold(&a.t1_t2_t3(), 2)?,
        column(&a.t2),
    ])
}

pub fn build_battery(a: &Rep3, battery: Battery) -> LuResult<[RealMatrix; 6]> {
    match battery {
        Battery::V1 => build_battery_v1(a),
        Battery::V2 => build_battery_v2(a),
    }
}

fn gram_check(label: &str, x: &RealMatrix) -> GramCheck {
    let g = x.transpose() * x;
    let sv = g.clone().singular_values();
    let sigma_max = sv.max();
    let sigma_min = sv.min();
    let cut = GRAM_RANK_TOL * sigma_max;
    let rank = if sigma_max > 0.0 { sv.iter().filter(|&&s| s > cut).count() } else { 0 };
    let invertible = sigma_max > 0.0 && sigma_min > cut;
    let condition_number = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
    GramCheck { label: label.to_string(), size: g.nrows(), rank, sigma_min, sigma_max, condition_number, invertible }
}

/// The two Gram matrices whose invertibility makes a battery sufficient.
pub fn gram_condition(a: &Rep3, battery: Battery) -> LuResult<GramCondition> {
    let checks = match battery {
        Battery::V1 => vec![
            gram_check("(T1∘T23)_(1)^t (T1∘T23)_(1)", &unfold(&a.t1_t23(), 1)?),
            gram_check("(T1∘T2∘T3)_(1)^t (T1∘T2∘T3)_(1)", &unfold(&a.t1_t2_t3(), 1)?),
        ],
        Battery::V2 => vec![
            gram_check("(T2∘T13)_(1)^t (T2∘T13)_(1)", &unfold(&a.t2_t13(), 1)?),
            gram_check("(T1∘T2∘T3)_(2)^t (T1∘T2∘T3)_(2)", &unfold(&a.t1_t2_t3(), 2)?),
        ],
    };
    let admissible = checks.iter().any(|c| c.invertible);
    Ok(GramCondition { checks, admissible })
}

/// Reduced two-party representation after tracing out the row party of `battery`.
fn reduced(a: &Rep3, battery: Battery) -> LuResult<Rep2> {
    Rep2::from_tensor_rep(&a.to_tensor_rep().restrict_without(battery.row_party())?)
}

fn printed_ceiling(dims: [usize; 3], battery: Battery) -> (u64, String) {
    let d: Vec<u64> = dims.iter().map(|&x| delta(x) as u64).collect();
    let (row, cols, text) = match battery {
        Battery::V1 => (d[0], d[1] * d[2], "25(1 + δ1 + δ23)^2, δ23 read as δ2·δ3"),
        Battery::V2 => (d[1], d[0] * d[2], "25(1 + δ2 + δ13)^2, δ13 read as δ1·δ3"),
    };
    let v = 25 * (1 + row + cols) * (1 + row + cols);
    (v, format!("{text} = {v}"))
}

/// Norm screen, Gram condition, partial-trace reduction and two-block trace identities.
pub fn check_quasi_lu_3(a: &Rep3, b: &Rep3, battery: Battery, cfg: &CheckConfig) -> LuResult<EquivalenceReport> {
    a.same_shape(b)?;
    cfg.validate()?;
    let tol = cfg.tol;
    let mut rep = EquivalenceReport::new(&format!("quasi-lu-3-{}", battery.as_str()), a.dims.to_vec(), cfg.max_len, tol);

    rep.norms = necessary_screen_3(a, b, tol)?;
    let passed = |l: &str| rep.norms.iter().find(|n| n.label == l).is_some_and(|n| n.passed);
    rep.norm_conditions = [("T1", "T23"), ("T2", "T13"), ("T3", "T12")]
        .iter()
        .map(|&(x, y)| NormCondition { either: x.into(), or: y.into(), satisfied: passed(x) || passed(y) })
        .collect();
    rep.degenerate = rep
        .norms
        .iter()
        .filter(|n| n.label != "T123" && (n.lhs <= tol || n.rhs <= tol))
        .map(|n| n.label.clone())
        .collect();

    let gram = gram_condition(a, battery)?;

    let pt = check_quasi_lu_2(&reduced(a, battery)?, &reduced(b, battery)?, cfg)?;

    let [a1, a2, a3, a4, a5, a6] = build_battery(a, battery)?;
    let [b1, b2, b3, b4, b5, b6] = build_battery(b, battery)?;
    let mut ids = futorny_two_block_check(
        &[a1, a2, a3, a4, a5],
        &[a6],
        &[b1, b2, b3, b4, b5],
        &[b6],
        cfg,
    )?;
    let (printed, text) = printed_ceiling(a.dims, battery);
    if printed == ids.ceiling.value {
        ids.ceiling.formula = format!("{text}; {}", ids.ceiling.formula);
    } else {
        rep.notes.push(format!("stated ceiling {text} differs from the computed {}", ids.ceiling.value));
    }
    rep.horizon = ids.horizon;

    let (verdict, reason) = if let Some(n) = rep.failed_norms().next() {
        (Verdict::Distinguished, describe_norm_failure(n))
    } else if pt.verdict == Verdict::Distinguished {
        (
            Verdict::Distinguished,
            format!("partial trace over party {} differs: {}", battery.row_party(), pt.reason),
        )
    } else if ids.is_distinguished() {
        (Verdict::Distinguished, describe_identity_failure(&ids))
    } else if !rep.degenerate.is_empty() {
        (Verdict::Inconclusive, format!("nondegeneracy hypothesis violated: {} vanishes", rep.degenerate.join(", ")))
    } else if gram.admissible && ids.verdict == Verdict::Equivalent && pt.verdict == Verdict::Equivalent {
        (Verdict::Equivalent, "every sufficient condition holds up to its ceiling".into())
    } else {
        (
            Verdict::ConsistentAtHorizon,
            format!("norms, partial trace and two-block trace identities agree up to length {}", ids.horizon),
        )
    };
    rep.verdict = verdict;
    rep.reason = reason;
    if !gram.admissible && rep.verdict != Verdict::Distinguished {
        rep.notes.push(
            "no Gram matrix of this battery is invertible, so even a full sweep would not certify equivalence"
                .into(),
        );
    }
    rep.gram = Some(gram);
    rep.partial_trace = Some(Box::new(pt));
    rep.identities.push(ids);
    Ok(rep)
}

fn sign_check(label: &str, lhs: f64, rhs: f64, tol: f64) -> ScalarCheck {
    let comparable = lhs.abs() > tol && rhs.abs() > tol;
    ScalarCheck { label: label.to_string(), lhs, rhs, comparable, passed: comparable && lhs.signum() == rhs.signum() }
}

/// Sign and determinant conditions that turn a quasi-LU witness into an LU one for three qubits.
///
/// `T_1ᵗ T_12 T_2`, `T_2ᵗ T_23 T_3`, `T_1ᵗ T_13 T_3` and `det T_jk` are LU
/// invariants, so a mismatch in any of them denies the upgrade outright.
pub fn qubit_lu_upgrade(a: &Rep3, b: &Rep3, tol: f64) -> LuResult<UpgradeReport> {
    for r in [a, b] {
        if r.dims != [2, 2, 2] {
            return Err(LuError::WrongDimension(r.dims.to_vec()));
        }
    }
    let s = |r: &Rep3| {
        [
            r.t1.dot(&(&r.t12 * &r.t2)),
            r.t2.dot(&(&r.t23 * &r.t3)),
            r.t1.dot(&(&r.t13 * &r.t3)),
        ]
    };
    let (sa, sb) = (s(a), s(b));
    let signs: Vec<ScalarCheck> = ["T1^t T12 T2", "T2^t T23 T3", "T1^t T13 T3"]
        .iter()
        .enumerate()
        .map(|(i, l)| sign_check(l, sa[i], sb[i], tol))
        .collect();
    let determinants: Vec<ScalarCheck> = [("det T12", &a.t12, &b.t12), ("det T13", &a.t13, &b.t13), ("det T23", &a.t23, &b.t23)]
        .iter()
        .map(|(l, x, y)| scalar_check(l, x.determinant(), y.determinant(), tol))
        .collect();

    let det_mismatch = determinants.iter().find(|d| {
        (d.comparable && !d.passed) || ((d.lhs.abs() <= tol) != (d.rhs.abs() <= tol))
    });
    let det_zero = determinants.iter().find(|d| d.lhs.abs() <= tol && d.rhs.abs() <= tol);
    let sign_mismatch = signs.iter().find(|c| c.comparable && !c.passed);
    let any_sign = signs.iter().any(|c| c.comparable);

    let (outcome, reason) = if let Some(d) = det_mismatch {
        (UpgradeOutcome::Denied, format!("{} differs ({:.12e} vs {:.12e})", d.label, d.lhs, d.rhs))
    } else if let Some(c) = sign_mismatch {
        (UpgradeOutcome::Denied, format!("sign of {} differs ({:.12e} vs {:.12e})", c.label, c.lhs, c.rhs))
    } else if let Some(d) = det_zero {
        (UpgradeOutcome::Inconclusive, format!("{} vanishes on both sides", d.label))
    } else if !any_sign {
        (UpgradeOutcome::Inconclusive, "every sign scalar vanishes on some side".to_string())
    } else {
        (UpgradeOutcome::Granted, "determinants agree and are nonzero and a sign scalar agrees".to_string())
    };
    Ok(UpgradeReport { outcome, reason, determinants, signs })
}

/// [`check_quasi_lu_3`] for three qubits, with the LU upgrade evaluated.
///
/// A denied upgrade turns the verdict into `Distinguished`.
pub fn check_lu_3qubit(a: &Rep3, b: &Rep3, battery: Battery, cfg: &CheckConfig) -> LuResult<EquivalenceReport> {
    for r in [a, b] {
        if r.dims != [2, 2, 2] {
            return Err(LuError::WrongDimension(r.dims.to_vec()));
        }
    }
    let mut rep = check_quasi_lu_3(a, b, battery, cfg)?;
    rep.check = format!("lu-3qubit-{}", battery.as_str());
    if rep.verdict != Verdict::Distinguished {
        let up = qubit_lu_upgrade(a, b, cfg.tol)?;
        if up.outcome == UpgradeOutcome::Denied {
            rep.verdict = Verdict::Distinguished;
            rep.reason = format!("quasi-LU battery passes but {}", up.reason);
        }
        rep.upgrade = Some(up);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypermatrix::{kron, max_abs_diff, vec};
    use crate::lu_action::{conjugate_local, random_orthogonal, LocalUnitaries};
    use crate::qudit_state::{partial_trace, random_density};
    use num_complex::Complex64;

    fn random_rep(seed: u64) -> Rep3 {
        Rep3::from_state(&random_density(&[2, 2, 2], seed).unwrap()).unwrap()
    }

    fn so3s(seed: u64) -> [RealMatrix; 3] {
        [0, 1, 2].map(|k| random_orthogonal(3, true, seed * 10 + k).unwrap())
    }

    #[test]
    fn ghz_tensors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let mut psi = vec![z; 8];
        psi[0] = Complex64::new(s, 0.0);
        psi[7] = Complex64::new(s, 0.0);
        let r = Rep3::from_state(&DensityMatrix::pure(&[2, 2, 2], &psi).unwrap()).unwrap();
        assert!(r.t1.norm() + r.t2.norm() + r.t3.norm() < 1e-15);
        for t in [&r.t12, &r.t13, &r.t23] {
            for i in 0..3 {
                for j in 0..3 {
                    let want = if (i, j) == (2, 2) { 0.5 } else { 0.0 };
                    assert!((t[(i, j)] - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn shapes_and_zero_case() {
        let r = random_rep(1);
        assert_eq!(r.t123.dims(), &[3, 3, 3]);
        let zero = Rep3::from_state(&DensityMatrix::maximally_mixed(&[2, 2, 2]).unwrap()).unwrap();
        for m in build_battery_v1(&zero).unwrap() {
            assert_eq!(m.norm(), 0.0);
        }
        let v1 = build_battery_v1(&r).unwrap();
        for m in &v1[..5] {
            assert_eq!(m.shape(), (3, 9));
        }
        assert_eq!(v1[5].shape(), (3, 1));
        let q = Rep3::from_state(&random_density(&[2, 3, 2], 1).unwrap()).unwrap();
        let v2 = build_battery_v2(&q).unwrap();
        for m in &v2[..5] {
            assert_eq!(m.shape(), (8, 9));
        }
        assert_eq!(v2[5].shape(), (8, 1));
    }

    #[test]
    fn battery_unfoldings_match_vec_identity() {
        let r = random_rep(2);
        let v1 = build_battery_v1(&r).unwrap();
        let want = column(&r.t1) * vec(&r.t23).to_vector().unwrap().transpose();
        assert!(max_abs_diff(&v1[1], &want) < 1e-15);
        let v2 = build_battery_v2(&r).unwrap();
        let want = column(&r.t2) * vec(&r.t13).to_vector().unwrap().transpose();
        assert!(max_abs_diff(&v2[2], &want) < 1e-15);
    }

    #[test]
    fn battery_transforms_covariantly() {
        let r = random_rep(3);
        let [o1, o2, o3] = so3s(3);
        let p = r.push_forward([&o1, &o2, &o3]).unwrap();
        let (a, b) = (build_battery_v1(&r).unwrap(), build_battery_v1(&p).unwrap());
        let right = kron(&o3, &o2).transpose();
        for i in 0..5 {
            assert!(max_abs_diff(&b[i], &(&o1 * &a[i] * &right)) < 1e-10, "A{}", i + 1);
        }
        assert!(max_abs_diff(&b[5], &(&o1 * &a[5])) < 1e-12);
        let (a, b) = (build_battery_v2(&r).unwrap(), build_battery_v2(&p).unwrap());
        let right = kron(&o3, &o1).transpose();
        for i in 0..5 {
            assert!(max_abs_diff(&b[i], &(&o2 * &a[i] * &right)) < 1e-10, "A{}", i + 1);
        }
        assert!(max_abs_diff(&b[5], &(&o2 * &a[5])) < 1e-12);
    }

    #[test]
    fn witness_checks() {
        let a = random_rep(4);
        let id = RealMatrix::identity(3, 3);
        assert!(so3_witness_check(&a, &a, &id, &id, &id, 1e-12).unwrap());
        let [o1, o2, o3] = so3s(4);
        let b = a.push_forward([&o1, &o2, &o3]).unwrap();
        assert!(so3_witness_check(&a, &b, &o1, &o2, &o3, 1e-10).unwrap());
        let mut c = a.clone();
        c.t123 = c.t123.scaled(-1.0);
        assert!(!so3_witness_check(&a, &c, &id, &id, &id, 1e-10).unwrap());
    }

    #[test]
    fn norm_screen() {
        let a = random_rep(5);
        assert!(necessary_screen_3(&a, &a, 1e-12).unwrap().iter().all(|n| n.passed));
        let [o1, o2, o3] = so3s(5);
        let b = a.push_forward([&o1, &o2, &o3]).unwrap();
        assert!(necessary_screen_3(&a, &b, 1e-10).unwrap().iter().all(|n| n.passed));
        let mut c = a.clone();
        c.t23 *= 1.1;
        let out = necessary_screen_3(&a, &c, 1e-10).unwrap();
        let failed: Vec<&str> = out.iter().filter(|n| !n.passed).map(|n| n.label.as_str()).collect();
        assert_eq!(failed, vec!["T23"]);
    }

    #[test]
    fn gram_matrices_are_rank_one() {
        let a = random_rep(6);
        for battery in [Battery::V1, Battery::V2] {
            let g = gram_condition(&a, battery).unwrap();
            assert!(!g.admissible);
            assert!(g.checks.iter().all(|c| c.rank == 1 && c.size == 9));
        }
    }

    #[test]
    fn lu_pair_passes_every_subcheck() {
        let rho = random_density(&[2, 2, 2], 7).unwrap();
        let us = LocalUnitaries::random(&[2, 2, 2], 70).unwrap();
        let a = Rep3::from_state(&rho).unwrap();
        let b = Rep3::from_state(&conjugate_local(&rho, &us).unwrap()).unwrap();
        for battery in [Battery::V1, Battery::V2] {
            let rep = check_lu_3qubit(&a, &b, battery, &CheckConfig::with_horizon(4)).unwrap();
            assert_eq!(rep.verdict, Verdict::ConsistentAtHorizon, "{}", rep.reason);
            assert!(!rep.any_failure());
            assert!(rep.lu_granted());
            assert_eq!(rep.identities[0].ceiling.value, 4225);
        }
    }

    #[test]
    fn partial_trace_paths_agree() {
        let ra = random_density(&[2, 2, 2], 8).unwrap();
        let rb = random_density(&[2, 2, 2], 9).unwrap();
        let (a, b) = (Rep3::from_state(&ra).unwrap(), Rep3::from_state(&rb).unwrap());
        let rep = check_quasi_lu_3(&a, &b, Battery::V1, &CheckConfig::with_horizon(3)).unwrap();
        let direct = check_quasi_lu_2(
            &Rep2::from_state(&partial_trace(&ra, 1).unwrap()).unwrap(),
            &Rep2::from_state(&partial_trace(&rb, 1).unwrap()).unwrap(),
            &CheckConfig::with_horizon(3),
        )
        .unwrap();
        assert_eq!(rep.partial_trace.unwrap().verdict, direct.verdict);
    }

    #[test]
    fn independent_pair_is_distinguished_by_norms() {
        let rep = check_quasi_lu_3(&random_rep(10), &random_rep(11), Battery::V1, &CheckConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Distinguished);
        assert!(rep.failed_norms().next().is_some());
    }

    #[test]
    fn sign_flip_pair_fails_determinants() {
        let a = random_rep(12);
        let [o1, o2, o3] = so3s(12);
        let (m1, m2) = (-&o1, -&o2);
        let b = a.push_forward([&m1, &m2, &o3]).unwrap();
        let quasi = check_quasi_lu_3(&a, &b, Battery::V1, &CheckConfig::with_horizon(3)).unwrap();
        assert_eq!(quasi.verdict, Verdict::ConsistentAtHorizon);
        let up = qubit_lu_upgrade(&a, &b, 1e-8).unwrap();
        assert_eq!(up.outcome, UpgradeOutcome::Denied);
        assert!(up.signs.iter().all(|s| s.passed));
        let flipped: Vec<&str> =
            up.determinants.iter().filter(|d| !d.passed).map(|d| d.label.as_str()).collect();
        assert_eq!(flipped, vec!["det T13", "det T23"]);
        for d in &up.determinants[1..] {
            assert!((d.lhs + d.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn determinant_sign_rule() {
        for s in 0..20 {
            let t = crate::rng::gaussian_real(3, 3, &mut crate::rng::seeded(s));
            let o = random_orthogonal(3, true, 100 + s).unwrap();
            let p = random_orthogonal(3, true, 200 + s).unwrap();
            for sign in [1.0, -1.0] {
                let m = (&o * &t * p.transpose()).scale(sign);
                assert!((m.determinant() - sign * t.determinant()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn upgrade_requires_qubits() {
        let r = Rep3::from_state(&random_density(&[2, 3, 2], 1).unwrap()).unwrap();
        assert!(matches!(qubit_lu_upgrade(&r, &r, 1e-8), Err(LuError::WrongDimension(_))));
    }
}
