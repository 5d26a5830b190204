//! Dense complex linear algebra, eigendecomposition and ODE integration.

pub mod eig;
pub mod hermitian;
pub mod matrix;
pub mod ode;

pub use eig::{biorthonormalize, condition_number, eig_general, mode_order, EigDecomposition};
pub use hermitian::{eigh, hermitian_function};
pub use matrix::{inner, norm, normalized, ComplexMatrix, C64, I, ONE, ZERO};
pub use ode::{check_grid, integrate, integrate_linear_ode, Dopri5, OdeTolerances};
