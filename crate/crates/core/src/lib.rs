//! ASSS: an alternating splitting iteration and preconditioner for the 4x4
//! block real linear systems that arise when a time-periodic parabolic
//! optimal-control problem is discretized with Q1 finite elements, together
//! with the BAS, PRESB and block-diagonal comparison methods and the
//! machinery to verify the convergence theory at desk scale.

pub mod error;
pub mod report;
pub mod sparsela;

pub mod asss;
pub mod blocksys;
pub mod fem;
pub mod precond;

pub use error::{Error, Result};
pub use report::SolveReport;

pub use blocksys::{BOperator, BlockVector4, GOperator, ProblemParams};
pub use fem::{FemSystem, GridConfig};
pub use sparsela::{CsrMatrix, DenseMatrix, KrylovConfig, MultiVector};
