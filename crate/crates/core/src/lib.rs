//! Contact geometry of 2-jet spaces, symplectic self-adjoint operators and
//! Monge-Ampère equations in two independent variables.

pub mod expr;
pub mod zeta;
pub(crate) mod linalg;
pub mod symplectic;
pub mod contact;
pub mod monge_ampere;
pub mod bends;
pub mod output;
pub mod rmanifold;
pub mod cli;
