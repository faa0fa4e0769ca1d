//! Algebraic supergravity backgrounds on products of symmetric spaces:
//! assembly of the doubled algebra, the flux bilinear form, residual
//! systems, and Newton/scan drivers over parameter families.

mod assemble;
mod config;
mod equations;
mod solve;

pub use assemble::{assemble, Assembly, Block, SpinorContext};
pub use config::{
    eta_family, first_ansatz_config, lorentz_block, term_name, AbelianConfig, BlockConfig, EtaFamily, FluxAnsatz,
    SugraConfig, SugraInput, VolumeTerm, TARGET_DIM,
};
pub use equations::{
    block_residual_matrix, check_equations, first_ansatz_residuals, first_ansatz_vector, generic_residuals,
    oracle_equivalence, psi_block_real, residual_matrix, scalar_equation, second_ansatz_residuals,
    volume_product_vector, GenericResiduals, PRECONDITION_TOL,
};
pub use solve::{
    newton_solve, scan, solve, verify, AlgebraicSystem, GridAxis, NewtonOptions, NewtonSolution, ScanRow,
    SolveOutcome,
};
