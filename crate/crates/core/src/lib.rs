//! Local-unitary equivalence tests for multipartite qudit states via
//! correlation hypermatrices and trace identities.

pub mod equiv2;
pub mod equiv3;
pub mod error;
pub mod hypermatrix;
pub mod lu_action;
pub mod pairs;
pub mod qudit_state;
pub mod report;
pub mod rng;
pub mod specht;
pub mod verdict;

pub use equiv2::Rep2;
pub use equiv3::{Battery, Rep3};
pub use error::{LuError, LuResult};
pub use hypermatrix::{Hypermatrix, RealMatrix};
pub use lu_action::LocalUnitaries;
pub use pairs::{generate_pair, PairMode, StatePair};
pub use report::{EquivalenceReport, UpgradeOutcome};
pub use specht::{CheckConfig, IdentityReport};
pub use qudit_state::{ComplexMatrix, DensityMatrix, TensorRep};
pub use verdict::Verdict;
