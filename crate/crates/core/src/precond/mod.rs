//! Preconditioner applications for the flexible GMRES drivers: the
//! splitting-induced preconditioner and the three comparison methods.

pub mod asss_pc;
pub mod bas;
pub mod bd;
pub mod presb;

pub use asss_pc::{
    dense_p_alpha, dense_preconditioned_b, dense_q_alpha, fgmres_asss, AsssPreconditioner,
};
pub use bas::{
    apply_bas_rotation, apply_bas_rotation_inverse, bas_iteration_alpha, bas_preconditioner_alpha,
    dense_bas_iteration_matrix, fgmres_bas, ibas_solve, BasConfig, BasPreconditioner,
};
pub use bd::{fgmres_bd, BdPreconditioner};
pub use presb::{dense_c, dense_k4, fgmres_presb, K4Operator, PresbPreconditioner};
