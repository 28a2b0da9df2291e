//! Self-contained sparse and small-dense linear algebra: CSR kernels, exact
//! and incomplete Cholesky, CG and block CG, restarted and flexible GMRES,
//! power iteration and dense eigensolvers for verification at small scale.

pub mod chol;
pub mod csr;
pub mod dense;
pub mod eig;
pub mod gmres;
pub mod krylov;
pub mod mtx;
pub mod multivec;
pub mod power;

pub use chol::{CholeskyFactor, IncompleteCholeskyFactor};
pub use csr::{axpy, dot, norm2, CsrMatrix};
pub use dense::{DenseMatrix, LuFactors};
pub use eig::{dense_eig_general, dense_eig_symmetric, spectral_radius};
pub use gmres::{fgmres, gmres};
pub use krylov::{cg, global_cg, KrylovConfig, LinOp, Precond};
pub use mtx::{read_matrix_market, write_matrix_market, write_spectrum_csv};
pub use multivec::MultiVector;
pub use power::{inverse_power_iteration, power_iteration, spectrum_extremes, EigEstimate};
