//! Classification, construction and verification of local conservation
//! laws for `u_t = a Δ²u + b(u) Δu + f(u) |∇u|² + g(u)`, plus a spectral
//! simulator that monitors the conserved functionals numerically.

pub mod classify;
pub mod conslaw;
pub mod expr;
pub mod jet;
pub mod numsim;
pub mod suite;
