//! Exact differential algebra for autonomous planar polynomial vector fields.
//!
//! The crate is organized around an exact arithmetic kernel ([`algebra`]) for
//! multivariate polynomials and rational functions over ℚ with declared
//! transcendental parameters, a derivation engine for differential field
//! towers ([`diffstruct`]), and the machinery built on top of them:
//!
//! * [`darboux`] — invariant-polynomial verification and bounded-degree
//!   search with case-split certificates,
//! * [`lode`] — algebraic-solution criteria for first-order linear ODEs,
//! * [`puiseux`] — coefficient-constraint extraction from fractional-power
//!   series ansätze,
//! * [`brestovski`] — log-linear first integrals for the classical
//!   Lotka–Volterra system and dependence probes,
//! * [`numerics`] — adaptive Runge–Kutta integration, conservation
//!   monitoring, and polynomial-relation probes,
//! * [`exprio`] — the text syntax for polynomials and system files.

pub mod algebra;
pub mod darboux;
pub mod diffstruct;
pub mod exprio;
pub mod lode;
pub mod puiseux;
pub mod symbols;
