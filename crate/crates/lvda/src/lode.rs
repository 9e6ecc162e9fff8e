//! Algebraic-solution criteria for first-order linear ODEs `v' = F v + c`
//! over ℚ(params)(t) with t' = 1.
//!
//! The homogeneous case is decided completely: `y' = F y` has a nonzero
//! algebraic solution iff the partial fraction decomposition of `F` is
//! `Σ eᵢ/(t - aᵢ)` with every residue a rational number — zero polynomial
//! part, simple poles, rational residue classes. The inhomogeneous case is
//! covered by two lemma families plus a bounded rational-solution search;
//! no general decision procedure (no Risch) is attempted.

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{
    partial_fractions, plain_kernel, residue_rationality, RatFunc, Residue, Scalar, UniPoly,
};
use crate::symbols::Symbol;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LodeError {
    #[error("coefficient is not a rational function of the ODE variable: {0}")]
    BadCoefficient(String),
    #[error("the inhomogeneous term must be a constant of the derivation")]
    NonConstantInhomogeneous,
}

/// Why no algebraic solution exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoAlgebraicReason {
    /// The polynomial part of the coefficient is nonzero.
    NonzeroPolynomialPart,
    /// Some pole has order greater than one.
    HigherOrderPole { multiplicity: u32 },
    /// Some residue class is not a rational constant.
    NonRationalResidue,
    /// `v' = (q/t + c1)v + c2` with `q ∉ ℚ` has no algebraic solution.
    ClassicalLemma,
    /// `v' = (1/t - 1)v + c` with `c ≠ 0` has no algebraic solution.
    TwoDLemma,
}

impl std::fmt::Display for NoAlgebraicReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NonzeroPolynomialPart => write!(f, "nonzero polynomial part"),
            Self::HigherOrderPole { multiplicity } => {
                write!(f, "pole of order {multiplicity}")
            }
            Self::NonRationalResidue => write!(f, "non-rational residue"),
            Self::ClassicalLemma => write!(f, "q/t coefficient with q not in Q"),
            Self::TwoDLemma => write!(f, "(1/t - 1) coefficient with nonzero constant term"),
        }
    }
}

/// Verdict on existence of algebraic solutions.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgSolVerdict {
    /// A witness `Π pᵢ^{eᵢ}`: the listed factors with rational exponents
    /// satisfy `Σ eᵢ pᵢ'/pᵢ = F` exactly.
    HasAlgebraic { witness: Vec<(UniPoly, BigRational)> },
    NoAlgebraic { reason: NoAlgebraicReason },
    Undecided { reason: String },
}

impl AlgSolVerdict {
    pub fn is_negative(&self) -> bool {
        matches!(self, AlgSolVerdict::NoAlgebraic { .. })
    }
}

/// A first-order linear problem `v' = F v + c` in the given variable.
#[derive(Debug, Clone)]
pub struct LinearOdeProblem {
    pub var: Symbol,
    pub coefficient: RatFunc,
    pub inhomogeneous: Scalar,
}

impl LinearOdeProblem {
    pub fn homogeneous(var: Symbol, coefficient: RatFunc) -> Self {
        LinearOdeProblem {
            var,
            coefficient,
            inhomogeneous: RatFunc::zero(),
        }
    }

    /// Decides algebraic-solution existence where the implemented criteria
    /// apply: the full homogeneous test, or the two lemma families for
    /// inhomogeneous problems.
    pub fn decide(&self) -> AlgSolVerdict {
        if self.inhomogeneous.is_zero() {
            return algebraic_solution_test(&self.coefficient, self.var);
        }
        match classical_shape(&self.coefficient, self.var) {
            Some((q, c1)) => {
                if q.is_one() && c1 == RatFunc::from_int(-1) {
                    // v' = (1/t - 1)v + c with c ≠ 0.
                    return AlgSolVerdict::NoAlgebraic {
                        reason: NoAlgebraicReason::TwoDLemma,
                    };
                }
                if c1.is_zero() {
                    // v' = (q/t)v + c always has the rational particular
                    // solution c·t/(1-q) when q ≠ 1; the lemma needs c1 ≠ 0.
                    return AlgSolVerdict::Undecided {
                        reason: "c1 = 0: a rational particular solution exists".into(),
                    };
                }
                if !q.is_rational_constant() {
                    return AlgSolVerdict::NoAlgebraic {
                        reason: NoAlgebraicReason::ClassicalLemma,
                    };
                }
                AlgSolVerdict::Undecided {
                    reason: "lemma inapplicable: q is rational".into(),
                }
            }
            None => AlgSolVerdict::Undecided {
                reason: "no implemented criterion for this inhomogeneous equation".into(),
            },
        }
    }
}

/// Full decision for the homogeneous equation `y' = F y`.
pub fn algebraic_solution_test(f: &RatFunc, var: Symbol) -> AlgSolVerdict {
    if f.is_zero() {
        // Constants solve y' = 0.
        return AlgSolVerdict::HasAlgebraic {
            witness: Vec::new(),
        };
    }
    let Ok(decomp) = partial_fractions(f, var) else {
        return AlgSolVerdict::Undecided {
            reason: "coefficient is not a rational function of the variable".into(),
        };
    };
    if !decomp.poly_part.is_zero() {
        return AlgSolVerdict::NoAlgebraic {
            reason: NoAlgebraicReason::NonzeroPolynomialPart,
        };
    }
    let mut witness = Vec::new();
    for block in &decomp.blocks {
        if block.multiplicity > 1 {
            return AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::HigherOrderPole {
                    multiplicity: block.multiplicity,
                },
            };
        }
        match residue_rationality(f, &block.factor).expect("factor of the denominator") {
            Residue::Rational(r) => {
                if !r.is_zero() {
                    witness.push((block.factor.clone(), r));
                }
            }
            Residue::NonRational => {
                if block.certified_irreducible {
                    return AlgSolVerdict::NoAlgebraic {
                        reason: NoAlgebraicReason::NonRationalResidue,
                    };
                }
                // The residue class is non-constant but the factor is not
                // certified irreducible, so distinct rational residues at its
                // components cannot be ruled out without factoring further.
                return AlgSolVerdict::Undecided {
                    reason: "denominator factor not certified irreducible over the \
                             parameter field"
                        .into(),
                };
            }
            Residue::HigherPole { .. } => unreachable!("multiplicity checked above"),
        }
    }
    debug_assert!(witness_recomposes(&witness, f), "witness identity");
    AlgSolVerdict::HasAlgebraic { witness }
}

/// Exact check that `Σ eᵢ pᵢ'/pᵢ = F`.
pub fn witness_recomposes(witness: &[(UniPoly, BigRational)], f: &RatFunc) -> bool {
    let mut acc = RatFunc::zero();
    for (p, e) in witness {
        let dp = p.derivative().to_ratfunc();
        let term = dp
            .div_ref(&p.to_ratfunc())
            .expect("factor nonzero")
            .mul_ref(&RatFunc::from_rational(e.clone()));
        acc = acc.add_ref(&term);
    }
    acc == *f
}

/// Matches `F = q/var + c1` with constant `q`, `c1`.
fn classical_shape(f: &RatFunc, var: Symbol) -> Option<(Scalar, Scalar)> {
    let decomp = partial_fractions(f, var).ok()?;
    if decomp.poly_part.degree().map_or(false, |d| d > 0) {
        return None;
    }
    let c1 = decomp.poly_part.coeff(0);
    if decomp.blocks.len() != 1 {
        return None;
    }
    let block = &decomp.blocks[0];
    let t_monic = UniPoly::identity(var);
    if block.factor != t_monic || block.multiplicity != 1 {
        return None;
    }
    let q = block.numerators[0].coeff(0);
    Some((q, c1))
}

/// Which lemma family an inhomogeneous problem belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaFamily {
    /// `v' = (q/t + c1)v + c2`, conclusive when q ∉ ℚ.
    Classical,
    /// `v' = (1/t - 1)v + c`, conclusive when c ≠ 0.
    TwoD,
}

/// Direct lemma application with explicit parameters. `q ∉ ℚ` is decided in
/// ℚ(params): an element lies in ℚ iff it is a rational constant.
pub fn lemma_family_check(
    var: Symbol,
    family: LemmaFamily,
    q: &Scalar,
    c1: &Scalar,
    c2: &Scalar,
) -> AlgSolVerdict {
    match family {
        LemmaFamily::Classical => {
            if c2.is_zero() {
                // Homogeneous specialization is fully decidable.
                let f = build_coefficient(var, q, c1);
                return algebraic_solution_test(&f, var);
            }
            if !q.is_rational_constant() {
                if c1.is_zero() {
                    // v = c2·t/(1-q) solves v' = (q/t)v + c2; the lemma's
                    // conclusion fails without c1 ≠ 0.
                    return AlgSolVerdict::Undecided {
                        reason: "c1 = 0: a rational particular solution exists".into(),
                    };
                }
                return AlgSolVerdict::NoAlgebraic {
                    reason: NoAlgebraicReason::ClassicalLemma,
                };
            }
            AlgSolVerdict::Undecided {
                reason: "lemma inapplicable: q is rational".into(),
            }
        }
        LemmaFamily::TwoD => {
            if !q.is_one() || *c1 != RatFunc::from_int(-1) {
                return AlgSolVerdict::Undecided {
                    reason: "lemma requires v' = (1/t - 1)v + c".into(),
                };
            }
            if !c2.is_zero() {
                return AlgSolVerdict::NoAlgebraic {
                    reason: NoAlgebraicReason::TwoDLemma,
                };
            }
            let f = build_coefficient(var, q, c1);
            algebraic_solution_test(&f, var)
        }
    }
}

fn build_coefficient(var: Symbol, q: &Scalar, c1: &Scalar) -> RatFunc {
    q.div_ref(&RatFunc::var(var))
        .expect("variable nonzero")
        .add_ref(c1)
}

/// Bounded search for rational solutions of `v' = F v + c`: the candidate
/// denominator is supported on the denominator factors of `F` with
/// multiplicities up to `degree_bound`, and the numerator degree is bounded
/// by `degree_bound` plus the denominator degree. Returned solutions verify
/// `v' - F v - c = 0` exactly.
pub fn rational_solution_search(
    f: &RatFunc,
    c: &Scalar,
    degree_bound: u32,
    var: Symbol,
) -> Option<RatFunc> {
    let decomp = partial_fractions(f, var).ok()?;
    let mut b = UniPoly::one(var);
    for block in &decomp.blocks {
        b = b.mul(&block.factor.pow(block.multiplicity + degree_bound));
    }
    let deg_b = b.degree().unwrap_or(0);
    let n_unknowns = degree_bound as usize + deg_b + 1;

    let fn_num = UniPoly::from_mpoly(f.numerator(), var);
    let fd_den = UniPoly::from_mpoly(f.denominator(), var);
    let bp = b.derivative();
    let c_poly = UniPoly::constant(var, c.clone());

    // For v = A/B: (A'B - AB')fd - fn A B - s c fd B^2 = 0, linear in the
    // coefficients of A and the slack s that multiplies the constant term.
    // Solutions with s ≠ 0 solve the inhomogeneous equation.
    let mut columns: Vec<UniPoly> = Vec::with_capacity(n_unknowns + 1);
    for k in 0..n_unknowns {
        let mut mono = vec![RatFunc::zero(); k + 1];
        mono[k] = RatFunc::one();
        let a_k = UniPoly::from_coeffs(var, mono);
        let term = a_k
            .derivative()
            .mul(&b)
            .sub(&a_k.mul(&bp))
            .mul(&fd_den)
            .sub(&fn_num.mul(&a_k).mul(&b));
        columns.push(term);
    }
    columns.push(c_poly.mul(&fd_den).mul(&b).mul(&b).neg());

    let max_deg = columns
        .iter()
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0);
    let mut matrix = vec![vec![RatFunc::zero(); columns.len()]; max_deg + 1];
    for (j, col) in columns.iter().enumerate() {
        for (row, entry) in matrix.iter_mut().enumerate() {
            entry[j] = col.coeff(row);
        }
    }
    let kernel = plain_kernel(&matrix);

    // For c = 0 the slack column vanishes, so look for a nonzero numerator;
    // otherwise a genuine solution has nonzero slack.
    let pick = if c.is_zero() {
        kernel
            .iter()
            .find(|v| v[..n_unknowns].iter().any(|e| !e.is_zero()))
    } else {
        kernel.iter().find(|v| !v[n_unknowns].is_zero())
    }?;
    let scale = if pick[n_unknowns].is_zero() {
        RatFunc::one()
    } else {
        pick[n_unknowns].inv().expect("nonzero slack")
    };
    let a = UniPoly::from_coeffs(
        var,
        pick[..n_unknowns]
            .iter()
            .map(|e| e.mul_ref(&scale))
            .collect(),
    );
    if a.is_zero() && !c.is_zero() {
        return None;
    }
    let v = a.to_ratfunc().div_ref(&b.to_ratfunc()).expect("B nonzero");
    // Exact verification: with var' = 1 and constant coefficients, the
    // derivation is the partial derivative in var.
    let residual = v.partial(var).sub_ref(&f.mul_ref(&v)).sub_ref(c);
    if residual.is_zero() && !(v.is_zero() && c.is_zero()) {
        Some(v)
    } else if v.is_zero() && c.is_zero() {
        None
    } else {
        debug_assert!(residual.is_zero(), "solver produced a non-solution");
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MPoly;
    use crate::symbols::{Context, SymbolRole};

    fn setup() -> (Context, Symbol) {
        let ctx = Context::new();
        let t = ctx.declare("t", SymbolRole::TowerGen);
        (ctx, t)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn three_over_two_t_has_algebraic() {
        let (_ctx, t) = setup();
        let two_t = MPoly::var(t).scale(&BigRational::from_integer(2.into()));
        let f = RatFunc::new(MPoly::from_int(3), two_t).unwrap();
        match algebraic_solution_test(&f, t) {
            AlgSolVerdict::HasAlgebraic { witness } => {
                assert_eq!(witness.len(), 1);
                assert_eq!(witness[0].0, UniPoly::identity(t));
                assert_eq!(witness[0].1, q(3, 2));
                assert!(witness_recomposes(&witness, &f));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parameter_residue_has_none() {
        let (ctx, t) = setup();
        let alpha = ctx.declare("alpha", SymbolRole::Parameter);
        let f = RatFunc::new(MPoly::var(alpha), MPoly::var(t)).unwrap();
        assert_eq!(
            algebraic_solution_test(&f, t),
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::NonRationalResidue
            }
        );
    }

    #[test]
    fn polynomial_part_blocks() {
        let (_ctx, t) = setup();
        // 1/t + 1
        let f = RatFunc::new(MPoly::one(), MPoly::var(t))
            .unwrap()
            .add_ref(&RatFunc::one());
        assert_eq!(
            algebraic_solution_test(&f, t),
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::NonzeroPolynomialPart
            }
        );
    }

    #[test]
    fn higher_pole_blocks() {
        let (_ctx, t) = setup();
        let f = RatFunc::new(MPoly::one(), MPoly::var(t).pow(2)).unwrap();
        assert_eq!(
            algebraic_solution_test(&f, t),
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::HigherOrderPole { multiplicity: 2 }
            }
        );
    }

    #[test]
    fn quotient_ring_case() {
        let (_ctx, t) = setup();
        let f = RatFunc::new(MPoly::one(), MPoly::var(t).pow(2).add_ref(&MPoly::one())).unwrap();
        assert_eq!(
            algebraic_solution_test(&f, t),
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::NonRationalResidue
            }
        );
    }

    #[test]
    fn lemma_checks() {
        let (ctx, t) = setup();
        let alpha = ctx.declare("alpha", SymbolRole::Parameter);
        let beta = ctx.declare("beta", SymbolRole::Parameter);
        // q = alpha, c1 = -1, c2 = -beta: no algebraic solutions.
        let v = lemma_family_check(
            t,
            LemmaFamily::Classical,
            &RatFunc::var(alpha),
            &RatFunc::from_int(-1),
            &RatFunc::var(beta).neg_ref(),
        );
        assert_eq!(
            v,
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::ClassicalLemma
            }
        );
        // q = 2, c1 = 0, c2 = 1: hypothesis fails.
        let v = lemma_family_check(
            t,
            LemmaFamily::Classical,
            &RatFunc::from_int(2),
            &RatFunc::zero(),
            &RatFunc::one(),
        );
        assert!(matches!(v, AlgSolVerdict::Undecided { .. }));
        // twod with c = 5.
        let v = lemma_family_check(
            t,
            LemmaFamily::TwoD,
            &RatFunc::one(),
            &RatFunc::from_int(-1),
            &RatFunc::from_int(5),
        );
        assert_eq!(
            v,
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::TwoDLemma
            }
        );
    }

    #[test]
    fn rational_search_finds_t_squared() {
        let (_ctx, t) = setup();
        // v' = (2/t) v has v = t^2.
        let f = RatFunc::new(MPoly::from_int(2), MPoly::var(t)).unwrap();
        let v = rational_solution_search(&f, &RatFunc::zero(), 3, t).unwrap();
        // Up to scalar: v / t^2 is a rational constant.
        let t2 = RatFunc::from_poly(MPoly::var(t).pow(2));
        assert!(v.div_ref(&t2).unwrap().is_rational_constant());
    }

    #[test]
    fn rational_search_inhomogeneous() {
        let (_ctx, t) = setup();
        // v' = (-1/t) v + 1 has v = t/2.
        let f = RatFunc::new(MPoly::from_int(-1), MPoly::var(t)).unwrap();
        let v = rational_solution_search(&f, &RatFunc::one(), 2, t).unwrap();
        let expect = RatFunc::from_poly(MPoly::var(t).scale(&q(1, 2)));
        assert_eq!(v, expect);
    }

    #[test]
    fn rational_search_none_for_parameter_homogeneous() {
        let (ctx, t) = setup();
        let alpha = ctx.declare("alpha", SymbolRole::Parameter);
        // v' = (alpha/t) v has no rational solution for generic alpha.
        let f = RatFunc::new(MPoly::var(alpha), MPoly::var(t)).unwrap();
        assert!(rational_solution_search(&f, &RatFunc::zero(), 4, t).is_none());
        // With c1 ≠ 0 the inhomogeneous equation has none either.
        let f_shift = f.sub_ref(&RatFunc::one());
        assert!(rational_solution_search(&f_shift, &RatFunc::one(), 4, t).is_none());
    }

    #[test]
    fn rational_search_finds_particular_with_c1_zero() {
        let (ctx, t) = setup();
        let alpha = ctx.declare("alpha", SymbolRole::Parameter);
        // v' = (alpha/t) v + 1 is solved by v = t/(1 - alpha).
        let f = RatFunc::new(MPoly::var(alpha), MPoly::var(t)).unwrap();
        let v = rational_solution_search(&f, &RatFunc::one(), 4, t).unwrap();
        let expect = RatFunc::new(
            MPoly::var(t),
            MPoly::one().sub_ref(&MPoly::var(alpha)),
        )
        .unwrap();
        assert_eq!(v, expect);
    }

    #[test]
    fn decide_dispatches() {
        let (ctx, t) = setup();
        let alpha = ctx.declare("alpha", SymbolRole::Parameter);
        // Homogeneous with F = (1 - alpha)/t - 1: nonzero polynomial part.
        let f = RatFunc::new(
            MPoly::one().sub_ref(&MPoly::var(alpha)),
            MPoly::var(t),
        )
        .unwrap()
        .sub_ref(&RatFunc::one());
        let hom = LinearOdeProblem::homogeneous(t, f.clone());
        assert!(hom.decide().is_negative());
        // Inhomogeneous with the same coefficient: classical lemma.
        let inhom = LinearOdeProblem {
            var: t,
            coefficient: f,
            inhomogeneous: RatFunc::from_int(-5),
        };
        assert_eq!(
            inhom.decide(),
            AlgSolVerdict::NoAlgebraic {
                reason: NoAlgebraicReason::ClassicalLemma
            }
        );
    }
}
