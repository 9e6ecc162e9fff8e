//! Partial fraction decomposition and the quotient-ring residue test.

use num_rational::BigRational;
use thiserror::Error;

use super::qfactor::factor_rational_poly;
use super::ratfunc::RatFunc;
use super::unipoly::UniPoly;
use crate::symbols::Symbol;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartialFractionError {
    #[error("input is the zero denominator")]
    ZeroDenominator,
    #[error("coefficient of {0}^{1} still involves the main variable")]
    NotUnivariate(String, u32),
}

/// One denominator block `factor^multiplicity` with its per-power numerators:
/// `numerators[j]` sits over `factor^(j+1)` and has degree < deg(factor).
#[derive(Debug, Clone)]
pub struct PFBlock {
    pub factor: UniPoly,
    pub multiplicity: u32,
    pub numerators: Vec<UniPoly>,
    /// Whether the factor is certified irreducible over the parameter field.
    pub certified_irreducible: bool,
}

/// Partial fraction decomposition of a rational function in one variable.
#[derive(Debug, Clone)]
pub struct PFDecomp {
    pub var: Symbol,
    pub poly_part: UniPoly,
    pub blocks: Vec<PFBlock>,
}

impl PFDecomp {
    /// Recomposes the decomposition into a single rational function.
    pub fn recompose(&self) -> RatFunc {
        let mut acc = self.poly_part.to_ratfunc();
        for block in &self.blocks {
            for (j, num) in block.numerators.iter().enumerate() {
                let den = block.factor.pow(j as u32 + 1);
                let term = num
                    .to_ratfunc()
                    .div_ref(&den.to_ratfunc())
                    .expect("factor nonzero");
                acc = acc.add_ref(&term);
            }
        }
        acc
    }

    /// All poles are simple and the polynomial part vanishes.
    pub fn is_simple_pole_form(&self) -> bool {
        self.poly_part.is_zero() && self.blocks.iter().all(|b| b.multiplicity == 1)
    }
}

/// Decomposes `f` viewed as a univariate rational function in `var` over the
/// parameter field. Denominator factors are the squarefree decomposition,
/// refined by full factorization over ℚ whenever a squarefree factor has
/// rational coefficients.
pub fn partial_fractions(f: &RatFunc, var: Symbol) -> Result<PFDecomp, PartialFractionError> {
    let num = UniPoly::from_mpoly(f.numerator(), var);
    let den = UniPoly::from_mpoly(f.denominator(), var);
    if den.is_zero() {
        return Err(PartialFractionError::ZeroDenominator);
    }

    // Polynomial part.
    let (poly_part, rem) = num.divrem(&den);
    let den_monic = den.make_monic();
    let lead_inv = den.leading().inv().expect("nonzero");
    let rem = rem.scale(&lead_inv);

    // Factor the denominator: squarefree levels, then ℚ-factorization of
    // rational levels.
    let mut factors: Vec<(UniPoly, u32, bool)> = Vec::new();
    for (sf, mult) in den_monic.squarefree_decomposition() {
        if sf.is_rational() {
            for qf in factor_rational_poly(&sf) {
                factors.push((qf.poly.make_monic(), mult, qf.certified));
            }
        } else {
            let certified = sf.degree() == Some(1);
            factors.push((sf, mult, certified));
        }
    }

    // Peel off one coprime block at a time with Bezout cofactors.
    let mut blocks = Vec::new();
    let mut current_num = rem;
    let mut current_den = den_monic;
    for (i, (p, mult, certified)) in factors.iter().enumerate() {
        let pk = p.pow(*mult);
        let rest = current_den.divrem(&pk).0;
        let block_num = if i + 1 == factors.len() {
            debug_assert!(rest.is_constant());
            current_num.scale(&rest.leading().inv().expect("nonzero")).divrem(&pk).1
        } else {
            // num/(pk*rest) = a/pk + b/rest with s*pk + t*rest = 1.
            let (g, s, t) = UniPoly::ext_gcd(&pk, &rest);
            debug_assert_eq!(g.degree(), Some(0));
            let a = current_num.mul(&t).divrem(&pk).1;
            let b = current_num.mul(&s).divrem(&rest).1;
            current_num = b;
            current_den = rest;
            a
        };
        // p-adic digits: block_num = sum digits[j] * p^j, digit degree < deg p.
        let mut digits = Vec::with_capacity(*mult as usize);
        let mut acc = block_num;
        for _ in 0..*mult {
            let (q, r) = acc.divrem(p);
            digits.push(r);
            acc = q;
        }
        // numerators[j] over p^(j+1): highest digit pairs with lowest power.
        digits.reverse();
        blocks.push(PFBlock {
            factor: p.clone(),
            multiplicity: *mult,
            numerators: digits,
            certified_irreducible: *certified,
        });
    }

    let decomp = PFDecomp {
        var,
        poly_part,
        blocks,
    };
    debug_assert_eq!(decomp.recompose(), *f, "recomposition identity");
    Ok(decomp)
}

/// Outcome of the quotient-ring residue test at a denominator factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Residue {
    /// The residue class is the rational constant carried here.
    Rational(BigRational),
    /// The residue class is not a rational constant (it is either a
    /// non-rational constant of the parameter field or a non-constant
    /// element of the quotient ring).
    NonRational,
    /// The factor divides the denominator with multiplicity > 1.
    HigherPole { multiplicity: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResidueError {
    #[error("the given polynomial does not divide the denominator")]
    NotAFactor,
}

/// Residue test at a factor `p` of the denominator of `F`, decided entirely
/// inside the quotient ring K[t]/(p): for a simple factor the residue class
/// is num·(den')⁻¹ mod p, and the test reports whether that class is a
/// constant lying in ℚ. No splitting field is ever constructed.
pub fn residue_rationality(f: &RatFunc, p: &UniPoly) -> Result<Residue, ResidueError> {
    let var = p.var;
    let num = UniPoly::from_mpoly(f.numerator(), var);
    let den = UniPoly::from_mpoly(f.denominator(), var);

    // Multiplicity of p in den.
    let mut mult = 0u32;
    let mut rest = den.clone();
    loop {
        let (q, r) = rest.divrem(p);
        if r.is_zero() {
            mult += 1;
            rest = q;
        } else {
            break;
        }
    }
    if mult == 0 {
        return Err(ResidueError::NotAFactor);
    }
    if mult > 1 {
        return Ok(Residue::HigherPole { multiplicity: mult });
    }

    // Simple factor: den' is invertible mod p.
    let den_prime = den.derivative().divrem(p).1;
    let inv = den_prime
        .inv_mod(p)
        .expect("derivative invertible modulo a simple squarefree factor");
    let class = num.divrem(p).1.mul(&inv).divrem(p).1;
    if class.is_constant() {
        let c = class.coeff(0);
        match c.as_rational() {
            Some(q) => Ok(Residue::Rational(q)),
            None => Ok(Residue::NonRational),
        }
    } else {
        Ok(Residue::NonRational)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mpoly::MPoly;
    use crate::symbols::{Context, SymbolRole};
    use num_traits::One;

    fn setup() -> (Context, Symbol) {
        let ctx = Context::new();
        let t = ctx.declare("t", SymbolRole::TowerGen);
        (ctx, t)
    }

    fn poly(var: Symbol, cs: &[i64]) -> UniPoly {
        UniPoly::from_coeffs(var, cs.iter().map(|&c| RatFunc::from_int(c)).collect())
    }

    #[test]
    fn three_t_minus_one_over_t_t_minus_one() {
        let (_ctx, t) = setup();
        // (3t-1)/(t(t-1)) = 1/t + 2/(t-1)
        let num = poly(t, &[-1, 3]);
        let den = poly(t, &[0, -1, 1]); // t^2 - t
        let f = num.to_ratfunc().div_ref(&den.to_ratfunc()).unwrap();
        let d = partial_fractions(&f, t).unwrap();
        assert!(d.poly_part.is_zero());
        assert_eq!(d.blocks.len(), 2);
        assert!(d.is_simple_pole_form());
        assert_eq!(d.recompose(), f);
        for b in &d.blocks {
            assert!(b.certified_irreducible);
            let num = &b.numerators[0];
            assert!(num.is_constant());
            let val = num.coeff(0).as_rational().unwrap();
            if b.factor == poly(t, &[0, 1]).make_monic() {
                assert!(val.is_one());
            } else {
                assert_eq!(val, BigRational::from_integer(2.into()));
            }
        }
    }

    #[test]
    fn double_pole_and_poly_part() {
        let (_ctx, t) = setup();
        // 1/t^2: single factor t with multiplicity 2.
        let f = RatFunc::new(MPoly::one(), MPoly::var(t).pow(2)).unwrap();
        let d = partial_fractions(&f, t).unwrap();
        assert!(d.poly_part.is_zero());
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.blocks[0].multiplicity, 2);
        assert_eq!(d.recompose(), f);

        // t + 1/t: polynomial part t, fractional part 1/t.
        let g = RatFunc::var(t).add_ref(&RatFunc::new(MPoly::one(), MPoly::var(t)).unwrap());
        let d = partial_fractions(&g, t).unwrap();
        assert_eq!(d.poly_part, poly(t, &[0, 1]));
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.recompose(), g);
    }

    #[test]
    fn residue_examples() {
        let (ctx, t) = setup();
        // F = 3/(2t), p = t → 3/2.
        let f = RatFunc::new(MPoly::from_int(3), MPoly::var(t).scale(&BigRational::from_integer(2.into())))
            .unwrap();
        let p = poly(t, &[0, 1]);
        assert_eq!(
            residue_rationality(&f, &p).unwrap(),
            Residue::Rational(BigRational::new(3.into(), 2.into()))
        );

        // F = alpha/t with alpha a parameter → NonRational.
        let alpha = ctx.declare("alpha", SymbolRole::Parameter);
        let f = RatFunc::new(MPoly::var(alpha), MPoly::var(t)).unwrap();
        assert_eq!(residue_rationality(&f, &p).unwrap(), Residue::NonRational);

        // F = 1/(t^2+1), p = t^2+1 → NonRational: the class is -t/2.
        let q = poly(t, &[1, 0, 1]);
        let f = RatFunc::new(MPoly::one(), MPoly::var(t).pow(2).add_ref(&MPoly::one())).unwrap();
        assert_eq!(residue_rationality(&f, &q).unwrap(), Residue::NonRational);

        // Higher pole.
        let f = RatFunc::new(MPoly::one(), MPoly::var(t).pow(2)).unwrap();
        assert_eq!(
            residue_rationality(&f, &p).unwrap(),
            Residue::HigherPole { multiplicity: 2 }
        );

        // Not a factor.
        let f = RatFunc::new(MPoly::one(), MPoly::var(t)).unwrap();
        assert_eq!(residue_rationality(&f, &q), Err(ResidueError::NotAFactor));
    }
}
