//! Exact arithmetic kernel.
//!
//! Everything here is exact: coefficients are arbitrary-precision rationals
//! and no operation rounds. The working representation is a single flat
//! polynomial ring ℚ[s₁, s₂, …] over all declared symbols; which symbols act
//! as "main variables" and which act as coefficient-field elements is chosen
//! per operation, not baked into the types.
//!
//! * [`MPoly`] — sparse multivariate polynomial over ℚ,
//! * [`RatFunc`] — reduced fraction of two `MPoly` (also used as [`Scalar`],
//!   the coefficient field ℚ(parameters)),
//! * [`UniPoly`] — univariate view with `RatFunc` coefficients, for gcds,
//!   squarefree decomposition, and partial fractions,
//! * [`PFDecomp`] / [`residue_rationality`] — partial fractions and the
//!   quotient-ring residue test,
//! * [`CaseTree`] / [`parametric_kernel`] — kernel computation for matrices
//!   whose entries depend on case parameters, with explicit case splits.

mod mpoly;
mod parametric;
mod partial_fractions;
mod qfactor;
mod ratfunc;
mod unipoly;

pub use mpoly::{cmp_grlex, Mono, MPoly};
pub use parametric::{
    parametric_kernel, plain_kernel, CaseLeaf, CaseTree, KernelError, KernelOptions,
};
pub use partial_fractions::{
    partial_fractions, residue_rationality, PFBlock, PFDecomp, PartialFractionError, Residue,
    ResidueError,
};
pub use qfactor::{factor_rational_poly, QFactor};
pub use ratfunc::{RatFunc, RatFuncError, Scalar};
pub use unipoly::UniPoly;
