//! Reduced rational functions, and the coefficient field built from them.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::mpoly::{rational_to_f64, MPoly};
use crate::symbols::Symbol;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatFuncError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("substitution makes a denominator vanish identically")]
    DenominatorVanishes,
}

/// A reduced fraction of two polynomials: gcd(num, den) = 1 and the
/// denominator is integer-primitive with positive leading coefficient.
///
/// With parameters treated as algebraically independent transcendentals,
/// `RatFunc` restricted to parameter symbols is exactly the coefficient
/// field ℚ(a, b, c, d, …); the alias [`Scalar`] is used in that role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: MPoly,
    den: MPoly,
}

/// Element of the coefficient field ℚ(parameters).
pub type Scalar = RatFunc;

impl RatFunc {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self, RatFuncError> {
        if den.is_zero() {
            return Err(RatFuncError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return RatFunc {
                num: MPoly::zero(),
                den: MPoly::one(),
            };
        }
        let g = MPoly::gcd(&num, &den);
        let mut num = num.div_exact(&g).expect("gcd divides");
        let mut den = den.div_exact(&g).expect("gcd divides");
        let (prim, content) = den.primitive_assoc();
        den = prim;
        num = num.scale(&content.recip());
        RatFunc { num, den }
    }

    pub fn zero() -> Self {
        RatFunc {
            num: MPoly::zero(),
            den: MPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            num: MPoly::one(),
            den: MPoly::one(),
        }
    }

    pub fn from_poly(p: MPoly) -> Self {
        RatFunc {
            num: p,
            den: MPoly::one(),
        }
    }

    pub fn var(s: Symbol) -> Self {
        RatFunc::from_poly(MPoly::var(s))
    }

    pub fn from_rational(q: BigRational) -> Self {
        RatFunc::from_poly(MPoly::constant(q))
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::from_poly(MPoly::from_int(n))
    }

    pub fn numerator(&self) -> &MPoly {
        &self.num
    }

    pub fn denominator(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_constant().is_some()
    }

    /// The polynomial this fraction reduces to, if the denominator is a
    /// rational constant.
    pub fn as_poly(&self) -> Option<MPoly> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.recip()))
    }

    /// Symbol-free fractions report their exact rational value. This is the
    /// decision procedure for "is this element of ℚ(params) in ℚ": a rational
    /// function of transcendentals lies in ℚ iff it is a rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn is_rational_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn contains_any(&self, syms: &[Symbol]) -> bool {
        self.num.contains_any(syms) || self.den.contains_any(syms)
    }

    pub fn symbols(&self) -> std::collections::BTreeSet<Symbol> {
        let mut s = self.num.symbols();
        s.extend(self.den.symbols());
        s
    }

    pub fn add_ref(&self, other: &RatFunc) -> RatFunc {
        let num = self
            .num
            .mul_ref(&other.den)
            .add_ref(&other.num.mul_ref(&self.den));
        let den = self.den.mul_ref(&other.den);
        Self::reduced(num, den)
    }

    pub fn sub_ref(&self, other: &RatFunc) -> RatFunc {
        self.add_ref(&other.neg_ref())
    }

    pub fn neg_ref(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg_ref(),
            den: self.den.clone(),
        }
    }

    pub fn mul_ref(&self, other: &RatFunc) -> RatFunc {
        Self::reduced(
            self.num.mul_ref(&other.num),
            self.den.mul_ref(&other.den),
        )
    }

    pub fn inv(&self) -> Result<RatFunc, RatFuncError> {
        if self.is_zero() {
            return Err(RatFuncError::DivisionByZero);
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }

    pub fn div_ref(&self, other: &RatFunc) -> Result<RatFunc, RatFuncError> {
        Ok(self.mul_ref(&other.inv()?))
    }

    pub fn pow_i64(&self, e: i64) -> Result<RatFunc, RatFuncError> {
        if e < 0 {
            return self.inv()?.pow_i64(-e);
        }
        let mut out = RatFunc::one();
        for _ in 0..e {
            out = out.mul_ref(self);
        }
        Ok(out)
    }

    /// Simultaneous substitution of rational functions for symbols.
    pub fn subst(&self, map: &HashMap<Symbol, RatFunc>) -> Result<RatFunc, RatFuncError> {
        let num = subst_poly(&self.num, map);
        let den = subst_poly(&self.den, map);
        if den.is_zero() {
            return Err(RatFuncError::DenominatorVanishes);
        }
        num.div_ref(&den)
    }

    pub fn eval_f64(&self, assign: &HashMap<Symbol, f64>) -> f64 {
        self.num.eval_f64(assign) / self.den.eval_f64(assign)
    }

    /// Exact evaluation; `None` if the denominator vanishes at the point.
    pub fn eval_q(&self, assign: &HashMap<Symbol, BigRational>) -> Option<BigRational> {
        let d = self.den.eval_q(assign);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_q(assign) / d)
    }

    /// Partial derivative with respect to one symbol (quotient rule).
    pub fn partial(&self, s: Symbol) -> RatFunc {
        let num = self
            .num
            .partial(s)
            .mul_ref(&self.den)
            .sub_ref(&self.num.mul_ref(&self.den.partial(s)));
        let den = self.den.mul_ref(&self.den);
        Self::reduced(num, den)
    }
}

/// Substitutes into a polynomial, producing a rational function.
pub(crate) fn subst_poly(p: &MPoly, map: &HashMap<Symbol, RatFunc>) -> RatFunc {
    let mut acc = RatFunc::zero();
    for (m, c) in p.terms() {
        let mut t = RatFunc::from_rational(c.clone());
        for &(s, e) in m.pairs() {
            let base = match map.get(&s) {
                Some(r) => r.clone(),
                None => RatFunc::var(s),
            };
            for _ in 0..e {
                t = t.mul_ref(&base);
            }
        }
        acc = acc.add_ref(&t);
    }
    acc
}

pub(crate) fn f64_of_rational(c: &BigRational) -> f64 {
    rational_to_f64(c)
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        self.add_ref(rhs)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self.sub_ref(rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        self.mul_ref(rhs)
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.div_ref(rhs).expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        self.neg_ref()
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        self.add_ref(&rhs)
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::one()
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        self.mul_ref(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{Context, SymbolRole};

    #[test]
    fn reduction_and_normalization() {
        let ctx = Context::new();
        let b = ctx.declare("b", SymbolRole::Parameter);
        let d = ctx.declare("d", SymbolRole::Parameter);
        // (b^2 - d^2) / (2b + 2d) reduces to (b - d)/2.
        let num = MPoly::var(b).pow(2).sub_ref(&MPoly::var(d).pow(2));
        let den = MPoly::var(b).add_ref(&MPoly::var(d)).scale(&BigRational::from_integer(2.into()));
        let r = RatFunc::new(num, den).unwrap();
        let expect = RatFunc::from_poly(
            MPoly::var(b)
                .sub_ref(&MPoly::var(d))
                .scale(&BigRational::new(1.into(), 2.into())),
        );
        assert_eq!(r, expect);
        assert!(r.is_polynomial());
    }

    #[test]
    fn rational_constant_detection() {
        let ctx = Context::new();
        let b = ctx.declare("b", SymbolRole::Parameter);
        let half = RatFunc::from_rational(BigRational::new(1.into(), 2.into()));
        assert!(half.is_rational_constant());
        let bb = RatFunc::var(b).div_ref(&RatFunc::var(b)).unwrap();
        assert_eq!(bb.as_rational(), Some(BigRational::one()));
        let nonconst = RatFunc::var(b).add_ref(&RatFunc::one());
        assert!(!nonconst.is_rational_constant());
    }

    #[test]
    fn field_laws_smoke() {
        let ctx = Context::new();
        let b = ctx.declare("b", SymbolRole::Parameter);
        let x = RatFunc::var(b);
        let y = RatFunc::new(MPoly::one(), MPoly::var(b).add_ref(&MPoly::one())).unwrap();
        let lhs = x.add_ref(&y).mul_ref(&x);
        let rhs = x.mul_ref(&x).add_ref(&y.mul_ref(&x));
        assert_eq!(lhs, rhs);
        let q = x.div_ref(&y).unwrap();
        assert_eq!(q.mul_ref(&y), x);
    }

    #[test]
    fn partial_quotient_rule() {
        let ctx = Context::new();
        let t = ctx.declare("t", SymbolRole::TowerGen);
        let inv_t = RatFunc::new(MPoly::one(), MPoly::var(t)).unwrap();
        // d/dt (1/t) = -1/t^2
        let d = inv_t.partial(t);
        let expect = RatFunc::new(MPoly::from_int(-1), MPoly::var(t).pow(2)).unwrap();
        assert_eq!(d, expect);
    }
}
