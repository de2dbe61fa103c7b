//! Seeded generators for pairs of states with a known relationship.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LuError, LuResult};
use crate::lu_action::{conjugate_local, push_forward, LocalUnitaries};
use crate::qudit_state::{extract, random_density, reconstruct_matrix, ComplexMatrix, DensityMatrix};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    /// `b` is `a` conjugated by random special local unitaries.
    Lu,
    /// `a` and `b` are drawn independently.
    Independent,
    /// Three parties: `b` is `a` pushed forward by `(α_1 O_1, α_2 O_2, α_3 O_3)`
    /// with `O_i` induced by special unitaries and exactly two `α_i = -1`.
    SignFlip,
}

impl PairMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PairMode::Lu => "lu",
            PairMode::Independent => "independent",
            PairMode::SignFlip => "sign-flip",
        }
    }
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairMode {
    type Err = LuError;

    fn from_str(s: &str) -> LuResult<Self> {
        match s {
            "lu" => Ok(PairMode::Lu),
            "independent" => Ok(PairMode::Independent),
            "sign-flip" => Ok(PairMode::SignFlip),
            other => Err(LuError::InvalidConfig(format!("unknown pair mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub a: DensityMatrix,
    pub b: DensityMatrix,
    pub mode: PairMode,
    /// Weight of the random state in `p ρ + (1 - p) I / D` (sign-flip mode only).
    pub mixing: Option<f64>,
    /// Signs `α_i` applied per party (sign-flip mode only).
    pub alphas: Option<Vec<f64>>,
}

fn mix(rho: &DensityMatrix, p: f64) -> ComplexMatrix {
    let d = rho.total_dim();
    let id = ComplexMatrix::identity(d, d).map(|z| z * ((1.0 - p) / d as f64));
    rho.matrix().map(|z| z * p) + id
}

const MAX_HALVINGS: usize = 60;

pub fn generate_pair(dims: &[usize], mode: PairMode, seed: u64) -> LuResult<StatePair> {
    let a = random_density(dims, derive_seed(seed, 0))?;
    match mode {
        PairMode::Lu => {
            let us = LocalUnitaries::random(dims, derive_seed(seed, 1))?;
            let b = conjugate_local(&a, &us)?;
            Ok(StatePair { a, b, mode, mixing: None, alphas: None })
        }
        PairMode::Independent => {
            let b = random_density(dims, derive_seed(seed, 2))?;
            Ok(StatePair { a, b, mode, mixing: None, alphas: None })
        }
        PairMode::SignFlip => {
            if dims.len() != 3 {
                return Err(LuError::WrongArity { expected: 3, got: dims.len() });
            }
            let orthos = LocalUnitaries::random(dims, derive_seed(seed, 3))?.induced()?;
            let keep = (seed % 3) as usize;
            let alphas: Vec<f64> = (0..3).map(|k| if k == keep { 1.0 } else { -1.0 }).collect();
            let signed: Vec<_> = orthos.iter().zip(&alphas).map(|(o, &s)| o.scale(s)).collect();
            let mut p = 1.0;
            for _ in 0..MAX_HALVINGS {
                let ap = DensityMatrix::new(dims.to_vec(), mix(&a, p))?;
                let flipped = reconstruct_matrix(&push_forward(&extract(&ap), &signed)?)?;
                if let Ok(b) = DensityMatrix::new(dims.to_vec(), flipped) {
                    return Ok(StatePair { a: ap, b, mode, mixing: Some(p), alphas: Some(alphas) });
                }
                p *= 0.5;
            }
            Err(LuError::InvalidState { what: "no positive sign-flipped partner found".into(), residual: p })
        }
    }
}
