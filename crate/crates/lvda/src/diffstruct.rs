//! Differential field towers and the derivation engine.
//!
//! A tower prescribes the derivative of every non-dynamical symbol: 0 for
//! parameters, a rational expression in earlier generators for tower
//! generators (`t' = 1`, `z' = b*z`), and the next-order symbol for formal
//! differential indeterminates (`a0' , a0'', …`). The derivation extends
//! uniquely to polynomials and rational functions by additivity, the Leibniz
//! rule, and the quotient rule.

use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{MPoly, RatFunc, Scalar};
use crate::darboux::PlanarSystem;
use crate::symbols::{Context, Symbol, SymbolRole};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeriveError {
    #[error("symbol `{0}` has no prescribed derivative in this tower")]
    UndeclaredSymbol(String),
    #[error("dynamical variable `{0}` cannot be differentiated through the tower alone")]
    DynamicalVariable(String),
}

/// An ordered differential field tower over ℚ(parameters).
///
/// Generator k's derivative may mention parameters and generators up to and
/// including generator k, so exponentials (`z' = b*z`) are representable.
#[derive(Debug, Clone)]
pub struct DiffTower {
    ctx: Arc<Context>,
    gens: Vec<(Symbol, RatFunc)>,
}

impl DiffTower {
    pub fn new(ctx: Arc<Context>) -> Self {
        DiffTower {
            ctx,
            gens: Vec::new(),
        }
    }

    pub fn from_gens(ctx: Arc<Context>, gens: Vec<(Symbol, RatFunc)>) -> Self {
        DiffTower { ctx, gens }
    }

    pub fn ctx(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn generators(&self) -> &[(Symbol, RatFunc)] {
        &self.gens
    }

    /// Declares a new generator with its prescribed derivative.
    pub fn push_generator(&mut self, name: &str, derivative: RatFunc) -> Symbol {
        let sym = self.ctx.declare(name, SymbolRole::TowerGen);
        self.gens.push((sym, derivative));
        sym
    }

    /// Declares a formal differential indeterminate.
    pub fn formal(&self, name: &str) -> Symbol {
        self.ctx.declare(name, SymbolRole::FormalIndet)
    }

    /// Derivative of a single symbol under the tower derivation.
    pub fn symbol_derivative(&self, s: Symbol) -> Result<RatFunc, DeriveError> {
        match self.ctx.role(s) {
            SymbolRole::Parameter => Ok(RatFunc::zero()),
            SymbolRole::TowerGen => self
                .gens
                .iter()
                .find(|&&(g, _)| g == s)
                .map(|(_, d)| d.clone())
                .ok_or_else(|| DeriveError::UndeclaredSymbol(self.ctx.name(s))),
            SymbolRole::FormalIndet => Ok(RatFunc::var(self.ctx.formal_derivative(s))),
            SymbolRole::DynamicalVar => Err(DeriveError::DynamicalVariable(self.ctx.name(s))),
        }
    }
}

/// Derivation of a polynomial given per-symbol derivatives: the chain rule
/// `D(p) = Σ ∂p/∂s · D(s)` over the symbols of `p`. `extra` overrides the
/// tower (used for the system derivation on dynamical variables).
fn derive_poly_with(
    p: &MPoly,
    tower: &DiffTower,
    extra: &dyn Fn(Symbol) -> Option<RatFunc>,
) -> Result<RatFunc, DeriveError> {
    let mut acc = RatFunc::zero();
    for s in p.symbols() {
        let ds = match extra(s) {
            Some(d) => d,
            None => tower.symbol_derivative(s)?,
        };
        if ds.is_zero() {
            continue;
        }
        acc = acc.add_ref(&RatFunc::from_poly(p.partial(s)).mul_ref(&ds));
    }
    Ok(acc)
}

fn derive_ratfunc_with(
    e: &RatFunc,
    tower: &DiffTower,
    extra: &dyn Fn(Symbol) -> Option<RatFunc>,
) -> Result<RatFunc, DeriveError> {
    let dn = derive_poly_with(e.numerator(), tower, extra)?;
    let dd = derive_poly_with(e.denominator(), tower, extra)?;
    let den = RatFunc::from_poly(e.denominator().clone());
    // (n/d)' = (n'd - nd')/d^2
    let num = dn
        .mul_ref(&den)
        .sub_ref(&RatFunc::from_poly(e.numerator().clone()).mul_ref(&dd));
    num.div_ref(&den.mul_ref(&den))
        .map_err(|_| unreachable!("denominator nonzero"))
}

/// Applies the tower derivation to a rational expression whose symbols are
/// all declared in the tower (parameters, generators, formal indeterminates).
pub fn derive(e: &RatFunc, tower: &DiffTower) -> Result<RatFunc, DeriveError> {
    derive_ratfunc_with(e, tower, &|_| None)
}

/// The system derivation on rational functions of the dynamical variables:
/// coefficients are differentiated through the tower, the variables through
/// X' = f, Y' = g.
pub fn derive_system(e: &RatFunc, sys: &PlanarSystem) -> Result<RatFunc, DeriveError> {
    let [x, y] = sys.vars;
    let f = RatFunc::from_poly(sys.f.clone());
    let g = RatFunc::from_poly(sys.g.clone());
    derive_ratfunc_with(e, &sys.tower, &|s| {
        if s == x {
            Some(f.clone())
        } else if s == y {
            Some(g.clone())
        } else {
            None
        }
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogLinearError {
    #[error("logarithm argument is the zero rational function")]
    ZeroLogArgument,
}

/// A log-linear expression `rational + Σ cᵢ · log Gᵢ`.
///
/// Arguments are deduplicated on construction (coefficients of equal
/// arguments add) and zero coefficients are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearExpr {
    pub rational: RatFunc,
    logs: Vec<(Scalar, RatFunc)>,
}

impl LogLinearExpr {
    pub fn new(rational: RatFunc, logs: Vec<(Scalar, RatFunc)>) -> Result<Self, LogLinearError> {
        let mut merged: Vec<(Scalar, RatFunc)> = Vec::new();
        for (c, g) in logs {
            if g.is_zero() {
                return Err(LogLinearError::ZeroLogArgument);
            }
            if c.is_zero() {
                continue;
            }
            if let Some(slot) = merged.iter_mut().find(|(_, h)| *h == g) {
                slot.0 = slot.0.add_ref(&c);
            } else {
                merged.push((c, g));
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        Ok(LogLinearExpr {
            rational,
            logs: merged,
        })
    }

    pub fn logs(&self) -> &[(Scalar, RatFunc)] {
        &self.logs
    }
}

/// Derivative of a log-linear expression along the system:
/// `D_S(rational) + Σ cᵢ · D_S(Gᵢ)/Gᵢ`, as a reduced rational function.
pub fn loglinear_derive(h: &LogLinearExpr, sys: &PlanarSystem) -> Result<RatFunc, DeriveError> {
    let mut acc = derive_system(&h.rational, sys)?;
    for (c, g) in &h.logs {
        let dg = derive_system(g, sys)?;
        let term = c.mul_ref(&dg.div_ref(g).expect("log argument nonzero"));
        acc = acc.add_ref(&term);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::PlanarSystem;
    use crate::exprio::{self, parse_poly, parse_ratfunc};

    fn t_tower() -> DiffTower {
        let ctx = Arc::new(Context::new());
        let mut tower = DiffTower::new(ctx);
        tower.push_generator("t", RatFunc::one());
        tower
    }

    #[test]
    fn derive_t_squared() {
        let tower = t_tower();
        let t = tower.ctx().lookup("t").unwrap();
        let e = RatFunc::from_poly(MPoly::var(t).pow(2));
        let d = derive(&e, &tower).unwrap();
        let two = num_rational::BigRational::from_integer(2.into());
        assert_eq!(d, RatFunc::from_poly(MPoly::var(t).scale(&two)));
    }


    #[test]
    fn derive_inverse_t() {
        let tower = t_tower();
        let t = tower.ctx().lookup("t").unwrap();
        let e = RatFunc::new(MPoly::one(), MPoly::var(t)).unwrap();
        let d = derive(&e, &tower).unwrap();
        let expect = RatFunc::new(MPoly::from_int(-1), MPoly::var(t).pow(2)).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn derive_exponential_generator() {
        let ctx = Arc::new(Context::new());
        let b = ctx.declare("b", SymbolRole::Parameter);
        let z = ctx.declare("z", SymbolRole::TowerGen);
        let dz = RatFunc::from_poly(MPoly::var(b).mul_ref(&MPoly::var(z)));
        let tower = DiffTower::from_gens(ctx, vec![(z, dz)]);
        // (z^3)' = 3b z^3
        let e = RatFunc::from_poly(MPoly::var(z).pow(3));
        let d = derive(&e, &tower).unwrap();
        let three = num_rational::BigRational::from_integer(3.into());
        let expect =
            RatFunc::from_poly(MPoly::var(b).mul_ref(&MPoly::var(z).pow(3)).scale(&three));
        assert_eq!(d, expect);
    }

    #[test]
    fn derive_kills_parameters_and_formal_shifts() {
        let tower = t_tower();
        let b = tower.ctx().declare("b", SymbolRole::Parameter);
        assert_eq!(
            derive(&RatFunc::var(b), &tower).unwrap(),
            RatFunc::zero()
        );
        let a0 = tower.formal("a0");
        let d = derive(&RatFunc::var(a0), &tower).unwrap();
        let a0p = tower.ctx().lookup("a0'").unwrap();
        assert_eq!(d, RatFunc::var(a0p));
    }

    #[test]
    fn derive_system_on_lv() {
        let sys = PlanarSystem::preset("lv-classical").unwrap();
        let ctx = sys.ctx();
        // D_S X = f
        let x = parse_ratfunc("X", ctx).unwrap();
        assert_eq!(
            derive_system(&x, &sys).unwrap(),
            RatFunc::from_poly(sys.f.clone())
        );
        // D_S (Y/X) = (Y/X)(cX + d - aY - b)
        let e = parse_ratfunc("Y/X", ctx).unwrap();
        let expect = parse_ratfunc("(Y/X)*(c*X + d - a*Y - b)", ctx).unwrap();
        assert_eq!(derive_system(&e, &sys).unwrap(), expect);
        // Parameters are constants.
        let b = parse_ratfunc("b", ctx).unwrap();
        assert_eq!(derive_system(&b, &sys).unwrap(), RatFunc::zero());
    }

    #[test]
    fn loglinear_examples() {
        // H = log(XY) on LV classical has derivative aY + cX + b + d.
        let sys = PlanarSystem::preset("lv-classical").unwrap();
        let ctx = sys.ctx();
        let xy = parse_ratfunc("X*Y", ctx).unwrap();
        let h = LogLinearExpr::new(RatFunc::zero(), vec![(RatFunc::one(), xy)]).unwrap();
        let d = loglinear_derive(&h, &sys).unwrap();
        let expect = parse_ratfunc("a*Y + c*X + b + d", ctx).unwrap();
        assert_eq!(d, expect);

        // H = log X on x' = x, y' = y gives 1.
        let doc = "vars = X, Y\nfprime.X = X\nfprime.Y = Y\n";
        let spec = exprio::parse_system(doc).unwrap();
        let sys = PlanarSystem::from_spec(&spec).unwrap();
        let x = parse_ratfunc("X", sys.ctx()).unwrap();
        let h = LogLinearExpr::new(RatFunc::zero(), vec![(RatFunc::one(), x)]).unwrap();
        assert_eq!(loglinear_derive(&h, &sys).unwrap(), RatFunc::one());
    }

    #[test]
    fn loglinear_first_integral_vanishes() {
        // H = (X - Y) + d log X - b log Y on LV_{1,b,1,d}.
        let doc = "vars = X, Y\nparams = b, d\nfprime.X = X*(Y + b)\nfprime.Y = Y*(X + d)\nnondegenerate = X, Y\n";
        let spec = exprio::parse_system(doc).unwrap();
        let sys = PlanarSystem::from_spec(&spec).unwrap();
        let ctx = sys.ctx();
        let rational = parse_ratfunc("X - Y", ctx).unwrap();
        let d = parse_ratfunc("d", ctx).unwrap();
        let b = parse_ratfunc("b", ctx).unwrap();
        let lx = parse_ratfunc("X", ctx).unwrap();
        let ly = parse_ratfunc("Y", ctx).unwrap();
        let h = LogLinearExpr::new(rational, vec![(d, lx), (b.neg_ref(), ly)]).unwrap();
        assert_eq!(loglinear_derive(&h, &sys).unwrap(), RatFunc::zero());
    }

    #[test]
    fn logarithmic_derivative_consistency() {
        // For polynomial P: loglinear_derive(log P) * P = D_S P.
        let sys = PlanarSystem::preset("lv-2d").unwrap();
        let ctx = sys.ctx();
        for text in ["X", "Y", "X*Y", "X^2 + Y", "X + 2*Y + 3"] {
            let p = parse_poly(text, ctx).unwrap();
            let h = LogLinearExpr::new(
                RatFunc::zero(),
                vec![(RatFunc::one(), RatFunc::from_poly(p.clone()))],
            )
            .unwrap();
            let lhs = loglinear_derive(&h, &sys)
                .unwrap()
                .mul_ref(&RatFunc::from_poly(p.clone()));
            let rhs = derive_system(&RatFunc::from_poly(p), &sys).unwrap();
            assert_eq!(lhs, rhs, "failed for {text}");
        }
    }
}
