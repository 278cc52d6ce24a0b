//! Numerical verification lab for q-oscillator L-operators, Baxter Q-operators
//! and transfer matrices of the quantum affine superalgebras U_q(gl(M|N)^).

pub mod fock;
pub mod graded_linalg;
pub mod loperators;
pub mod rmatrix;
pub mod suite;
pub mod tq;
