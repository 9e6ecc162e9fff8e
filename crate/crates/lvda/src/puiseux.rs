//! Fractional-power series ansätze and coefficient-constraint extraction.
//!
//! The series `x = Σ aᵢ y^{r + i/e}` has a symbolic leading exponent: only
//! the sign case of `r` is known. Exponents are therefore carried as pairs
//! `m·B + o` (multiplicity of the base exponent, exact rational offset) and
//! compared under the case assumption; a coefficient is extracted only when
//! its exponent is comparable to every other exponent still present, so the
//! number of fully determined constraints is reported honestly instead of
//! guessing an order.
//!
//! Three ansatz stages are supported:
//!
//! * leading: `x = Σ aᵢ y^{r+i/e}` with formal constant-field coefficients,
//! * secondary: `a = Σ bᵢ y^{k+i/e}` with coefficients in ℚ(params)(x) and
//!   the side relation `a' = m a`,
//! * residual: `a - βx = Σ bᵢ y^{ℓ/e + i/e}` with `a' = a`, after the
//!   leading coefficient `βx` has been split off.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::{MPoly, RatFunc, Scalar};
use crate::darboux::PlanarSystem;
use crate::diffstruct::DiffTower;
use crate::lode::LinearOdeProblem;
use crate::symbols::{Context, Symbol, SymbolRole};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PuiseuxError {
    #[error("depth must be at least 1")]
    Depth,
    #[error("ramification index must be at least 1")]
    Ramification,
    #[error("constraint conversion requires a coefficient-field ansatz (secondary or residual)")]
    ModeMismatch,
    #[error("coefficient index {0} out of range")]
    CoefficientOutOfRange(usize),
    #[error("no extracted constraint mentions the selected coefficient")]
    NoConstraint,
    #[error("constraint is not first-order linear in the selected coefficient")]
    NotLinear,
    #[error("constraint has a non-constant inhomogeneous part")]
    NonConstantInhomogeneous,
    #[error("series derivation failed: {0}")]
    Derive(String),
}

// ---------------------------------------------------------------------------
// Exponent algebra
// ---------------------------------------------------------------------------

/// Exponent `m·B + o` for a symbolic base exponent B.
type Exp = (u32, BigRational);

/// What is assumed about the base exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BaseAssumption {
    Negative,
    Zero,
    Positive,
    /// 0 < B < 1.
    BetweenZeroAndOne,
    One,
}

/// Compares exponents under the assumption; `None` when the sign of the
/// difference depends on the magnitude of the base.
fn cmp_exp(a: &Exp, b: &Exp, case: BaseAssumption) -> Option<std::cmp::Ordering> {
    use std::cmp::Ordering::*;
    let dm = a.0 as i64 - b.0 as i64;
    let doff = &a.1 - &b.1;
    if dm == 0 {
        return Some(doff.cmp(&BigRational::zero()));
    }
    match case {
        BaseAssumption::Zero => Some(doff.cmp(&BigRational::zero())),
        BaseAssumption::One => {
            let total = doff + BigRational::from_integer(dm.into());
            Some(total.cmp(&BigRational::zero()))
        }
        BaseAssumption::Negative => {
            // dm·B < 0 for dm > 0.
            if dm > 0 && !doff.is_positive() {
                Some(Less)
            } else if dm < 0 && !doff.is_negative() {
                Some(Greater)
            } else {
                None
            }
        }
        BaseAssumption::Positive => {
            if dm > 0 && !doff.is_negative() {
                Some(Greater)
            } else if dm < 0 && !doff.is_positive() {
                Some(Less)
            } else {
                None
            }
        }
        BaseAssumption::BetweenZeroAndOne => {
            // dm·B ∈ (0, dm) for dm > 0.
            let total = &doff + BigRational::from_integer(dm.into());
            if dm > 0 {
                if !doff.is_negative() {
                    Some(Greater)
                } else if !total.is_positive() {
                    Some(Less)
                } else {
                    None
                }
            } else if !doff.is_positive() {
                Some(Less)
            } else if !total.is_negative() {
                Some(Greater)
            } else {
                None
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Ladder series: finite sums of coefficients at exponents m·B + o
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct Ladder {
    terms: BTreeMap<Exp, RatFunc>,
}

impl Ladder {
    fn new() -> Self {
        Ladder::default()
    }

    fn term(exp: Exp, c: RatFunc) -> Self {
        let mut l = Ladder::new();
        l.add_term(exp, c);
        l
    }

    fn add_term(&mut self, exp: Exp, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp.clone()).or_insert_with(RatFunc::zero);
        *entry = entry.add_ref(&c);
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    fn add(&self, other: &Ladder) -> Ladder {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    fn sub(&self, other: &Ladder) -> Ladder {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.neg_ref());
        }
        out
    }

    fn mul(&self, other: &Ladder) -> Ladder {
        let mut out = Ladder::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term((e1.0 + e2.0, &e1.1 + &e2.1), c1.mul_ref(c2));
            }
        }
        out
    }

    fn scale(&self, c: &RatFunc) -> Ladder {
        let mut out = Ladder::new();
        for (e, k) in &self.terms {
            out.add_term(e.clone(), k.mul_ref(c));
        }
        out
    }

    fn shift(&self, dm: u32, doff: &BigRational) -> Ladder {
        let mut out = Ladder::new();
        for (e, c) in &self.terms {
            out.add_term((e.0 + dm, &e.1 + doff), c.clone());
        }
        out
    }

    /// Shift by -1 in the offset (multiplication by y^{-1}).
    fn shift_down(&self) -> Ladder {
        let minus_one = -BigRational::one();
        self.shift(0, &minus_one)
    }

    fn pow(&self, e: u32) -> Ladder {
        let mut out = Ladder::term((0, BigRational::zero()), RatFunc::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes a concrete value for the base exponent, merging ladders.
    fn concretize(&self, base: &BigRational) -> Ladder {
        let mut out = Ladder::new();
        for ((m, o), c) in &self.terms {
            let v = o + BigRational::from_integer((*m).into()) * base;
            out.add_term((0, v), c.clone());
        }
        out
    }
}

/// Evaluates a polynomial in the dynamical variables over ladder series:
/// `x_sym` maps to `x_image`, `y_sym` to the shift y^1; every other symbol
/// stays a coefficient.
fn poly_to_ladder(p: &MPoly, x_sym: Symbol, y_sym: Symbol, x_image: &Ladder) -> Ladder {
    let mut out = Ladder::new();
    for (mono, coeff) in p.terms() {
        let px = mono.exponent(x_sym);
        let py = mono.exponent(y_sym);
        let mut rest = MPoly::monomial(mono.clone(), coeff.clone());
        rest = rest.coeff_of(x_sym, px).coeff_of(y_sym, py);
        let base = RatFunc::from_poly(rest);
        let contribution = x_image
            .pow(px)
            .shift(0, &BigRational::from_integer(py.into()))
            .scale(&base);
        out = out.add(&contribution);
    }
    out
}

// ---------------------------------------------------------------------------
// Public concrete Puiseux series
// ---------------------------------------------------------------------------

/// A truncated Puiseux series `Σ cᵢ y^{qᵢ}` with exact rational exponents.
///
/// `known_below` is the truncation frontier: coefficients at exponents
/// `< known_below` are complete, everything else is unknown. Arithmetic
/// propagates the frontier honestly.
#[derive(Debug, Clone, PartialEq)]
pub struct PuiseuxSeries {
    /// The series variable.
    pub var: Symbol,
    /// Terms by exponent; no zero coefficients.
    terms: BTreeMap<BigRational, RatFunc>,
    /// Exponents `< known_below` are fully determined.
    pub known_below: BigRational,
}

impl PuiseuxSeries {
    pub fn new(
        var: Symbol,
        terms: Vec<(BigRational, RatFunc)>,
        known_below: BigRational,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (q, c) in terms {
            if !c.is_zero() && q < known_below {
                let e = map.entry(q).or_insert_with(RatFunc::zero);
                *e = e.add_ref(&c);
            }
        }
        map.retain(|_, c: &mut RatFunc| !c.is_zero());
        PuiseuxSeries {
            var,
            terms: map,
            known_below,
        }
    }

    /// `y^q` as a series known to order `q + span`.
    pub fn monomial(var: Symbol, q: BigRational, span: BigRational) -> Self {
        let known = &q + &span;
        PuiseuxSeries::new(var, vec![(q, RatFunc::one())], known)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &RatFunc)> {
        self.terms.iter()
    }

    pub fn leading_exponent(&self) -> Option<&BigRational> {
        self.terms.keys().next()
    }

    pub fn coeff(&self, q: &BigRational) -> RatFunc {
        self.terms.get(q).cloned().unwrap_or_else(RatFunc::zero)
    }

    /// Ramification index: the lcm of exponent denominators.
    pub fn ramification(&self) -> u32 {
        let mut e = num_bigint::BigInt::one();
        for q in self.terms.keys() {
            e = num_integer::lcm(e, q.denom().clone());
        }
        u32::try_from(&e).unwrap_or(u32::MAX)
    }

    pub fn add(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        assert_eq!(self.var, other.var);
        let known = self.known_below.clone().min(other.known_below.clone());
        let mut terms: Vec<(BigRational, RatFunc)> = Vec::new();
        for (q, c) in self.terms.iter().chain(other.terms.iter()) {
            terms.push((q.clone(), c.clone()));
        }
        PuiseuxSeries::new(self.var, terms, known)
    }

    pub fn mul(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        assert_eq!(self.var, other.var);
        // Truncation: a*b is complete below min(ka + lead_b, kb + lead_a).
        let lead_a = self
            .leading_exponent()
            .cloned()
            .unwrap_or_else(|| self.known_below.clone());
        let lead_b = other
            .leading_exponent()
            .cloned()
            .unwrap_or_else(|| other.known_below.clone());
        let known = (&self.known_below + &lead_b).min(&other.known_below + &lead_a);
        let mut terms = Vec::new();
        for (q1, c1) in &self.terms {
            for (q2, c2) in &other.terms {
                terms.push((q1 + q2, c1.mul_ref(c2)));
            }
        }
        PuiseuxSeries::new(self.var, terms, known)
    }

    /// Term-by-term derivative with the substitution rules of a planar
    /// system: coefficients are differentiated with `x' ↦ f(x, y)` (the
    /// expanded variable stays a symbol in the coefficients) and the chain
    /// rule applies `y' ↦ g(x, y)`. This is a derivation on series with
    /// coefficients in the tower field extended by x, so the Leibniz rule
    /// holds exactly; substituting a series for x itself is the job of
    /// [`ansatz_constraints`].
    pub fn derive_under(
        &self,
        sys: &PlanarSystem,
        expand: usize,
    ) -> Result<PuiseuxSeries, PuiseuxError> {
        assert!(expand < 2);
        let y_sym = sys.vars[1 - expand];
        assert_eq!(self.var, y_sym, "series variable is the non-expanded one");
        let x_sym = sys.vars[expand];
        let (f, g) = if expand == 0 {
            (&sys.f, &sys.g)
        } else {
            (&sys.g, &sys.f)
        };
        let x_image = Ladder::term((0, BigRational::zero()), RatFunc::var(x_sym));
        let f_ladder = poly_to_ladder(f, x_sym, y_sym, &x_image);
        let g_ladder = poly_to_ladder(g, x_sym, y_sym, &x_image);

        // D(Σ c y^q) = Σ D(c) y^q + Σ q c y^{q-1} g(x, y), with
        // D(c) = ∂c/∂x · f(x, y) + (tower derivative on the other symbols).
        let mut out = Ladder::new();
        for (q, c) in &self.terms {
            let dc = coefficient_derivative(c, x_sym, &f_ladder, &sys.tower)?;
            out = out.add(&dc.shift(0, q));
            let weight = c.mul_ref(&RatFunc::from_rational(q.clone()));
            out = out.add(
                &Ladder::term((0, q - BigRational::one()), weight).mul(&g_ladder),
            );
        }

        // Truncation: the f and g terms can lower reliability by the gap
        // between their leading exponent shifts and zero.
        let lead = |l: &Ladder, extra: BigRational| {
            l.terms
                .keys()
                .map(|(_, o)| o + &extra)
                .min()
                .unwrap_or_else(BigRational::zero)
                .min(BigRational::zero())
        };
        let shift = lead(&f_ladder, BigRational::zero())
            .min(lead(&g_ladder, -BigRational::one()));
        let known = &self.known_below + &shift;
        let terms: Vec<(BigRational, RatFunc)> = out
            .terms
            .into_iter()
            .map(|((_, o), c)| (o, c))
            .collect();
        Ok(PuiseuxSeries::new(self.var, terms, known))
    }
}

/// Derivative of a series coefficient: the expanded variable contributes
/// `∂c/∂x · f(x,y)` (a ladder), every other symbol goes through the tower.
fn coefficient_derivative(
    c: &RatFunc,
    x_sym: Symbol,
    f_ladder: &Ladder,
    tower: &DiffTower,
) -> Result<Ladder, PuiseuxError> {
    let mut out = Ladder::new();
    for s in c.symbols() {
        let dpart = c.partial(s);
        if dpart.is_zero() {
            continue;
        }
        if s == x_sym {
            out = out.add(&f_ladder.scale(&dpart));
        } else {
            let ds = tower
                .symbol_derivative(s)
                .map_err(|e| PuiseuxError::Derive(e.to_string()))?;
            if !ds.is_zero() {
                out.add_term((0, BigRational::zero()), dpart.mul_ref(&ds));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Ansatz constraint extraction
// ---------------------------------------------------------------------------

/// Sign case for the leading exponent r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RCase {
    Negative,
    Zero,
    Positive,
}

/// Case for the secondary-stage base exponent k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KCase {
    Zero,
    NonZero,
}

/// Case for the residual-stage ratio ℓ/e against 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllCase {
    LessThanOne,
    EqualOne,
}

/// Which ansatz to expand and compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzCase {
    /// `x = Σ aᵢ y^{r+i/e}` with formal constant-field coefficients.
    Leading(RCase),
    /// `a = Σ bᵢ y^{k+i/e}`, `bᵢ ∈ ℚ(params)(x)`, side relation `a' = m a`.
    Secondary(KCase),
    /// `a − βx = Σ bᵢ y^{L+i/e}` with `a' = a` and `L = ℓ/e`.
    Residual(EllCase),
}

#[derive(Debug, Clone, Copy)]
pub struct Ansatz {
    pub case: AnsatzCase,
    /// Which of the two dynamical variables is expanded (0 or 1).
    pub expand: usize,
    /// Ramification index e.
    pub ramification: u32,
    /// How many constraints to extract (defaults to 8 in the CLI).
    pub depth: u32,
}

/// One extracted coefficient equation, normalized to a primitive polynomial
/// with positive leading coefficient, equated to zero.
#[derive(Debug, Clone)]
pub struct Constraint {
    /// Exponent as multiplicity of the base plus rational offset.
    pub base_mult: u32,
    pub offset: BigRational,
    pub exponent_display: String,
    pub equation: MPoly,
}

/// The constraint system extracted from an ansatz, with honest bookkeeping
/// of how far the exponent order was determined.
#[derive(Debug)]
pub struct ConstraintSet {
    pub ctx: Arc<Context>,
    pub constraints: Vec<Constraint>,
    /// Number of exponents whose position in the order was fully determined
    /// (equals `constraints.len() + skipped trivial exponents`).
    pub determined: usize,
    /// False when extraction stopped because the next exponent was not
    /// comparable under the case assumption.
    pub complete: bool,
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
    /// Series coefficients `(bᵢ, ∂bᵢ/∂x)`; the partial is present for the
    /// coefficient-field stages.
    pub coeff_symbols: Vec<(Symbol, Option<Symbol>)>,
    /// The coefficient-field variable x for secondary/residual stages.
    pub ode_var: Option<Symbol>,
    /// The relation symbol m for the secondary stage.
    pub relation: Option<Symbol>,
    /// The base-exponent symbol (r, k, or L) when kept symbolic.
    pub base_symbol: Option<Symbol>,
}

fn fresh(ctx: &Context, base: &str, role: SymbolRole) -> Symbol {
    let mut name = base.to_string();
    while ctx.lookup(&name).is_some() {
        name.push('_');
    }
    ctx.declare(&name, role)
}

/// Builds the series identity for the ansatz against the system equations,
/// compares coefficients exponent by exponent, and returns the normalized
/// equations together with the standing assumptions used.
pub fn ansatz_constraints(sys: &PlanarSystem, ansatz: &Ansatz) -> Result<ConstraintSet, PuiseuxError> {
    if ansatz.depth == 0 {
        return Err(PuiseuxError::Depth);
    }
    if ansatz.ramification == 0 {
        return Err(PuiseuxError::Ramification);
    }
    assert!(ansatz.expand < 2);
    let ctx = sys.ctx().clone();
    let x_sym = sys.vars[ansatz.expand];
    let y_sym = sys.vars[1 - ansatz.expand];
    let (f, g) = if ansatz.expand == 0 {
        (&sys.f, &sys.g)
    } else {
        (&sys.g, &sys.f)
    };
    let e = ansatz.ramification;
    let depth = ansatz.depth;
    // Internal overshoot keeps every extracted coefficient complete.
    let n_terms = (depth + 2 * e + 2) as usize;

    let frac = |i: usize| BigRational::new((i as i64).into(), (e as i64).into());

    let mut assumptions: Vec<String> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    let (residual, case, base_value, base_symbol, coeff_symbols, ode_var, relation) = match ansatz
        .case
    {
        AnsatzCase::Leading(rcase) => {
            let r = fresh(&ctx, "r", SymbolRole::Parameter);
            let r_rf = RatFunc::var(r);
            let mut coeffs = Vec::new();
            let mut series = Ladder::new();
            for i in 0..n_terms {
                let a_i = fresh(&ctx, &format!("a{i}"), SymbolRole::FormalIndet);
                coeffs.push((a_i, None));
                series.add_term((1, frac(i)), RatFunc::var(a_i));
            }
            // x' as a series: f(S, y). Coefficient derivatives are formal.
            let f_series = poly_to_ladder(f, x_sym, y_sym, &series);
            let g_series = poly_to_ladder(g, x_sym, y_sym, &series);
            let mut ds = Ladder::new();
            for (i, (a_i, _)) in coeffs.iter().enumerate() {
                let a_next = ctx.formal_derivative(*a_i);
                ds.add_term((1, frac(i)), RatFunc::var(a_next));
            }
            let mut weighted = Ladder::new();
            for (i, (a_i, _)) in coeffs.iter().enumerate() {
                let w = r_rf.add_ref(&RatFunc::from_rational(frac(i)));
                weighted.add_term((1, frac(i)), w.mul_ref(&RatFunc::var(*a_i)));
            }
            ds = ds.add(&weighted.shift_down().mul(&g_series));
            let residual = ds.sub(&f_series);
            let (case, base_value) = match rcase {
                RCase::Negative => {
                    assumptions.push("r < 0".into());
                    (BaseAssumption::Negative, None)
                }
                RCase::Zero => {
                    assumptions.push("r = 0".into());
                    (BaseAssumption::Zero, Some(BigRational::zero()))
                }
                RCase::Positive => {
                    assumptions.push("r > 0".into());
                    (BaseAssumption::Positive, None)
                }
            };
            assumptions.push(format!("{} != 0", ctx.name(coeffs[0].0)));
            (
                residual,
                case,
                base_value,
                Some(r),
                coeffs,
                None,
                None,
            )
        }
        AnsatzCase::Secondary(kcase) => {
            let k = fresh(&ctx, "k", SymbolRole::Parameter);
            let m = fresh(&ctx, "m", SymbolRole::Parameter);
            let (series, coeffs, ds_no_relation) =
                coefficient_field_series(&ctx, sys, x_sym, y_sym, f, g, n_terms, &frac, k)?;
            // Side relation a' = m a.
            let residual = ds_no_relation.sub(&series.scale(&RatFunc::var(m)));
            let (case, base_value) = match kcase {
                KCase::Zero => {
                    assumptions.push("k = 0".into());
                    (BaseAssumption::Zero, Some(BigRational::zero()))
                }
                KCase::NonZero => {
                    assumptions.push("k != 0".into());
                    // A single ladder: offsets alone order the exponents.
                    (BaseAssumption::Positive, None)
                }
            };
            assumptions.push(format!("{} != 0", ctx.name(coeffs[0].0)));
            warnings.push(
                "second-stage leading constraint yields coefficient residue m - k*alpha \
                 (k, not the first-stage exponent, multiplies alpha)"
                    .into(),
            );
            (
                residual,
                case,
                base_value,
                Some(k),
                coeffs,
                Some(x_sym),
                Some(m),
            )
        }
        AnsatzCase::Residual(ellcase) => {
            let ell = fresh(&ctx, "L", SymbolRole::Parameter);
            let beta = fresh(&ctx, "beta", SymbolRole::Parameter);
            let (series, coeffs, ds) =
                coefficient_field_series(&ctx, sys, x_sym, y_sym, f, g, n_terms, &frac, ell)?;
            // a = beta*x + Σ bᵢ y^{L+i/e} with a' = a:
            //   beta*x' + D(series) - beta*x - series = 0.
            let x_rf = RatFunc::var(x_sym);
            let beta_rf = RatFunc::var(beta);
            let fx = poly_to_ladder(f, x_sym, y_sym, &Ladder::term((0, BigRational::zero()), x_rf.clone()));
            let residual = fx
                .scale(&beta_rf)
                .add(&ds)
                .sub(&Ladder::term(
                    (0, BigRational::zero()),
                    beta_rf.mul_ref(&x_rf),
                ))
                .sub(&series);
            let (case, base_value) = match ellcase {
                EllCase::LessThanOne => {
                    assumptions.push("0 < L < 1 where L = l/e".into());
                    (BaseAssumption::BetweenZeroAndOne, None)
                }
                EllCase::EqualOne => {
                    assumptions.push("L = l/e = 1".into());
                    (BaseAssumption::One, Some(BigRational::one()))
                }
            };
            assumptions.push(format!("{} != 0 and beta != 0", ctx.name(coeffs[0].0)));
            (
                residual,
                case,
                base_value,
                Some(ell),
                coeffs,
                Some(x_sym),
                None,
            )
        }
    };

    // Concretize the base exponent where the case pins it.
    let (residual, base_symbol) = match (&base_value, base_symbol) {
        (Some(v), Some(bsym)) => {
            let mut map = std::collections::HashMap::new();
            map.insert(bsym, RatFunc::from_rational(v.clone()));
            let mut out = Ladder::new();
            for (exp, c) in &residual.concretize(v).terms {
                let c = c.subst(&map).expect("constant substitution");
                out.add_term(exp.clone(), c);
            }
            (out, None)
        }
        (_, bsym) => (residual, bsym),
    };

    // Extract constraints in determined exponent order.
    let mut terms: Vec<(Exp, RatFunc)> = residual
        .terms
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let mut constraints = Vec::new();
    let mut determined = 0usize;
    let mut complete = true;
    while constraints.len() < depth as usize {
        if terms.is_empty() {
            break;
        }
        // Find the unique minimum under the partial order.
        let mut min_idx = 0usize;
        let mut ok = true;
        for i in 1..terms.len() {
            match cmp_exp(&terms[i].0, &terms[min_idx].0, case) {
                Some(std::cmp::Ordering::Less) => min_idx = i,
                Some(_) => {}
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            // Verify the chosen minimum is comparable with all the rest.
            for (i, t) in terms.iter().enumerate() {
                if i == min_idx {
                    continue;
                }
                if cmp_exp(&terms[min_idx].0, &t.0, case) != Some(std::cmp::Ordering::Less) {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            complete = false;
            break;
        }
        let (exp, coeff) = terms.remove(min_idx);
        determined += 1;
        let eq = coeff.numerator().primitive_part();
        if eq.is_zero() {
            continue;
        }
        let display = exponent_display(&exp, base_symbol.map(|s| ctx.name(s)));
        constraints.push(Constraint {
            base_mult: exp.0,
            offset: exp.1,
            exponent_display: display,
            equation: eq,
        });
    }

    Ok(ConstraintSet {
        ctx,
        constraints,
        determined,
        complete,
        assumptions,
        warnings,
        coeff_symbols,
        ode_var,
        relation,
        base_symbol,
    })
}

/// Shared construction for the coefficient-field stages: the series
/// `Σ bᵢ y^{B+i/e}` with `bᵢ` functions of x, and its derivative along the
/// system using `bᵢ' = f(x,y) ∂bᵢ/∂x` and `y' = g(x, y)`.
#[allow(clippy::too_many_arguments)]
fn coefficient_field_series(
    ctx: &Arc<Context>,
    _sys: &PlanarSystem,
    x_sym: Symbol,
    y_sym: Symbol,
    f: &MPoly,
    g: &MPoly,
    n_terms: usize,
    frac: &dyn Fn(usize) -> BigRational,
    base: Symbol,
) -> Result<(Ladder, Vec<(Symbol, Option<Symbol>)>, Ladder), PuiseuxError> {
    let x_image = Ladder::term((0, BigRational::zero()), RatFunc::var(x_sym));
    let fx = poly_to_ladder(f, x_sym, y_sym, &x_image);
    let gx = poly_to_ladder(g, x_sym, y_sym, &x_image);
    let base_rf = RatFunc::var(base);

    let mut series = Ladder::new();
    let mut coeffs = Vec::new();
    for i in 0..n_terms {
        let b_i = fresh(ctx, &format!("b{i}"), SymbolRole::FormalIndet);
        let db_i = fresh(ctx, &format!("db{i}"), SymbolRole::FormalIndet);
        coeffs.push((b_i, Some(db_i)));
        series.add_term((1, frac(i)), RatFunc::var(b_i));
    }
    // D(series) = Σ (∂bᵢ/∂x · x') y^{B+i/e} + Σ (B+i/e) bᵢ y^{B+i/e-1} y'.
    let mut ds = Ladder::new();
    for (i, (_, db)) in coeffs.iter().enumerate() {
        let contribution = fx
            .scale(&RatFunc::var(db.expect("coefficient-field stage")))
            .shift(1, &frac(i));
        ds = ds.add(&contribution);
    }
    let mut weighted = Ladder::new();
    for (i, (b_i, _)) in coeffs.iter().enumerate() {
        let w = base_rf.add_ref(&RatFunc::from_rational(frac(i)));
        weighted.add_term((1, frac(i)), w.mul_ref(&RatFunc::var(*b_i)));
    }
    let ds = ds.add(&weighted.shift_down().mul(&gx));
    Ok((series, coeffs, ds))
}

fn exponent_display(exp: &Exp, base: Option<String>) -> String {
    let (m, o) = exp;
    let mut parts = Vec::new();
    if *m > 0 {
        let b = base.unwrap_or_else(|| "B".into());
        if *m == 1 {
            parts.push(b);
        } else {
            parts.push(format!("{m}*{b}"));
        }
    }
    if !o.is_zero() || parts.is_empty() {
        let s = if o.denom().is_one() {
            format!("{}", o.numer())
        } else {
            format!("{}/{}", o.numer(), o.denom())
        };
        if !parts.is_empty() && !o.is_negative() {
            parts.push(format!("+ {s}"));
        } else {
            parts.push(s);
        }
    }
    format!("y^({})", parts.join(" "))
}

/// Extracts the linear ODE `v' = F v + c` satisfied by the selected series
/// coefficient from the first constraint that mentions it, over the
/// x-derivation tower.
pub fn constraint_to_ode(
    cs: &ConstraintSet,
    coefficient: usize,
) -> Result<LinearOdeProblem, PuiseuxError> {
    let var = cs.ode_var.ok_or(PuiseuxError::ModeMismatch)?;
    let (b, db) = *cs
        .coeff_symbols
        .get(coefficient)
        .ok_or(PuiseuxError::CoefficientOutOfRange(coefficient))?;
    let db = db.ok_or(PuiseuxError::ModeMismatch)?;

    let eq = cs
        .constraints
        .iter()
        .map(|c| &c.equation)
        .find(|e| e.degree_of(b) > 0 || e.degree_of(db) > 0)
        .ok_or(PuiseuxError::NoConstraint)?;

    if eq.degree_of(b) > 1 || eq.degree_of(db) > 1 {
        return Err(PuiseuxError::NotLinear);
    }
    let a_coef = eq.coeff_of(db, 1).coeff_of(b, 0);
    let b_coef = eq.coeff_of(b, 1).coeff_of(db, 0);
    let c_coef = eq.coeff_of(b, 0).coeff_of(db, 0);
    // Mixed b·db terms or other series coefficients make it nonlinear.
    let others: Vec<Symbol> = cs
        .coeff_symbols
        .iter()
        .flat_map(|&(s, d)| std::iter::once(s).chain(d))
        .filter(|&s| s != b && s != db)
        .collect();
    if a_coef.contains_any(&others) || b_coef.contains_any(&others) || c_coef.contains_any(&others)
    {
        return Err(PuiseuxError::NotLinear);
    }
    if a_coef.is_zero() {
        return Err(PuiseuxError::NotLinear);
    }
    let a_rf = RatFunc::from_poly(a_coef);
    let coefficient_f = RatFunc::from_poly(b_coef).div_ref(&a_rf).expect("nonzero").neg_ref();
    let inhom = RatFunc::from_poly(c_coef).div_ref(&a_rf).expect("nonzero").neg_ref();
    if inhom.contains_any(&[var]) {
        return Err(PuiseuxError::NonConstantInhomogeneous);
    }
    Ok(LinearOdeProblem {
        var,
        coefficient: coefficient_f,
        inhomogeneous: inhom,
    })
}

/// Helper: the inhomogeneous constant of a problem as a Scalar.
pub fn problem_constant(p: &LinearOdeProblem) -> Scalar {
    p.inhomogeneous.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprio::{format_poly, parse_poly, parse_system};

    fn classical_normalized() -> PlanarSystem {
        let doc = "vars = x, y\nparams = alpha\nfprime.x = x*(y + 1)\nfprime.y = y*(x + alpha)\nnondegenerate = x, y\n";
        PlanarSystem::from_spec(&parse_system(doc).unwrap()).unwrap()
    }

    fn twod_normalized() -> PlanarSystem {
        let doc = "vars = x, y\nparams = gamma\nfprime.x = x*(y + 1)\nfprime.y = y*(x + gamma*y)\nnondegenerate = x, y\n";
        PlanarSystem::from_spec(&parse_system(doc).unwrap()).unwrap()
    }

    fn leading(sys: &PlanarSystem, rcase: RCase) -> ConstraintSet {
        ansatz_constraints(
            sys,
            &Ansatz {
                case: AnsatzCase::Leading(rcase),
                expand: 0,
                ramification: 1,
                depth: 1,
            },
        )
        .unwrap()
    }

    #[test]
    fn classical_r_negative_gives_leading_square() {
        let sys = classical_normalized();
        let cs = leading(&sys, RCase::Negative);
        assert!(!cs.constraints.is_empty());
        let c0 = &cs.constraints[0];
        assert_eq!(c0.base_mult, 2);
        assert!(c0.offset.is_zero());
        // r * a0^2 = 0.
        let expect = parse_poly("r*a0^2", &cs.ctx).unwrap().primitive_part();
        assert_eq!(c0.equation, expect, "{}", format_poly(&c0.equation, &cs.ctx));
    }

    #[test]
    fn classical_r_zero_gives_a0_prime() {
        let sys = classical_normalized();
        let cs = leading(&sys, RCase::Zero);
        let c0 = &cs.constraints[0];
        // a0' - a0 = 0 (up to sign normalization).
        let a0p = cs.ctx.lookup("a0'").unwrap();
        let a0 = cs.ctx.lookup("a0").unwrap();
        let expect = MPoly::var(a0p).sub_ref(&MPoly::var(a0)).primitive_part();
        assert_eq!(c0.equation, expect);
    }

    #[test]
    fn classical_r_positive_gives_relation() {
        let sys = classical_normalized();
        let cs = leading(&sys, RCase::Positive);
        let c0 = &cs.constraints[0];
        // a0' = (1 - r*alpha) a0, normalized as a0' - a0 + r*alpha*a0 = 0.
        // The formal derivative is named a0'; build the polynomial directly.
        let a0p = cs.ctx.lookup("a0'").unwrap();
        let a0 = cs.ctx.lookup("a0").unwrap();
        let r = cs.ctx.lookup("r").unwrap();
        let alpha = cs.ctx.lookup("alpha").unwrap();
        let built = MPoly::var(a0p)
            .sub_ref(&MPoly::var(a0))
            .add_ref(&MPoly::var(r).mul_ref(&MPoly::var(alpha)).mul_ref(&MPoly::var(a0)))
            .primitive_part();
        assert_eq!(c0.equation, built);
    }

    #[test]
    fn twod_r_positive_gives_a0_prime_equals_a0() {
        let sys = twod_normalized();
        let cs = leading(&sys, RCase::Positive);
        let c0 = &cs.constraints[0];
        let a0p = cs.ctx.lookup("a0'").unwrap();
        let a0 = cs.ctx.lookup("a0").unwrap();
        let expect = MPoly::var(a0p).sub_ref(&MPoly::var(a0)).primitive_part();
        assert_eq!(c0.equation, expect);
    }

    #[test]
    fn secondary_nonzero_k_constraint() {
        let sys = classical_normalized();
        let cs = ansatz_constraints(
            &sys,
            &Ansatz {
                case: AnsatzCase::Secondary(KCase::NonZero),
                expand: 0,
                ramification: 1,
                depth: 1,
            },
        )
        .unwrap();
        let c0 = &cs.constraints[0];
        // m b0 = x db0 + k(x + alpha) b0, i.e.
        // x db0 + k x b0 + k alpha b0 - m b0 = 0.
        let ctx = &cs.ctx;
        let built = parse_poly_with(ctx, &["x", "db0", "k", "b0", "alpha", "m"], |v| {
            let [x, db0, k, b0, alpha, m] = v.try_into().unwrap();
            MPoly::var(x)
                .mul_ref(&MPoly::var(db0))
                .add_ref(&MPoly::var(k).mul_ref(&MPoly::var(x)).mul_ref(&MPoly::var(b0)))
                .add_ref(&MPoly::var(k).mul_ref(&MPoly::var(alpha)).mul_ref(&MPoly::var(b0)))
                .sub_ref(&MPoly::var(m).mul_ref(&MPoly::var(b0)))
        });
        assert_eq!(c0.equation, built.primitive_part());
    }

    fn parse_poly_with(
        ctx: &Arc<Context>,
        names: &[&str],
        f: impl Fn(Vec<Symbol>) -> MPoly,
    ) -> MPoly {
        let syms: Vec<Symbol> = names.iter().map(|n| ctx.lookup(n).unwrap()).collect();
        f(syms)
    }

    #[test]
    fn secondary_k_zero_to_ode() {
        let sys = classical_normalized();
        let cs = ansatz_constraints(
            &sys,
            &Ansatz {
                case: AnsatzCase::Secondary(KCase::Zero),
                expand: 0,
                ramification: 1,
                depth: 1,
            },
        )
        .unwrap();
        let ode = constraint_to_ode(&cs, 0).unwrap();
        // F = m/x, c = 0.
        let ctx = &cs.ctx;
        let m = ctx.lookup("m").unwrap();
        let x = ctx.lookup("x").unwrap();
        let expect = RatFunc::new(MPoly::var(m), MPoly::var(x)).unwrap();
        assert_eq!(ode.coefficient, expect);
        assert!(ode.inhomogeneous.is_zero());
    }

    #[test]
    fn residual_cases_to_ode() {
        let sys = classical_normalized();
        // Case L < 1: F = (1 - alpha L)/x - L, c = 0.
        let cs = ansatz_constraints(
            &sys,
            &Ansatz {
                case: AnsatzCase::Residual(EllCase::LessThanOne),
                expand: 0,
                ramification: 2,
                depth: 3,
            },
        )
        .unwrap();
        assert!(!cs.complete, "only the leading exponent is determined");
        let ode = constraint_to_ode(&cs, 0).unwrap();
        let ctx = &cs.ctx;
        let (x, alpha, ell) = (
            ctx.lookup("x").unwrap(),
            ctx.lookup("alpha").unwrap(),
            ctx.lookup("L").unwrap(),
        );
        let num = MPoly::one().sub_ref(&MPoly::var(alpha).mul_ref(&MPoly::var(ell)));
        let expect = RatFunc::new(num, MPoly::var(x))
            .unwrap()
            .sub_ref(&RatFunc::var(ell));
        assert_eq!(ode.coefficient, expect);
        assert!(ode.inhomogeneous.is_zero());

        // Case L = 1: F = (1 - alpha)/x - 1, c = -beta.
        // Fresh system: the first extraction already declared L and beta.
        let sys = classical_normalized();
        let cs = ansatz_constraints(
            &sys,
            &Ansatz {
                case: AnsatzCase::Residual(EllCase::EqualOne),
                expand: 0,
                ramification: 1,
                depth: 1,
            },
        )
        .unwrap();
        let ode = constraint_to_ode(&cs, 0).unwrap();
        let ctx = &cs.ctx;
        let (x, alpha, beta) = (
            ctx.lookup("x").unwrap(),
            ctx.lookup("alpha").unwrap(),
            ctx.lookup("beta").unwrap(),
        );
        let num = MPoly::one().sub_ref(&MPoly::var(alpha));
        let expect = RatFunc::new(num, MPoly::var(x))
            .unwrap()
            .sub_ref(&RatFunc::one());
        assert_eq!(ode.coefficient, expect);
        assert_eq!(ode.inhomogeneous, RatFunc::var(beta).neg_ref());
    }

    #[test]
    fn series_arith_examples() {
        let ctx = Arc::new(Context::new());
        ctx.declare("x", SymbolRole::DynamicalVar);
        let y = ctx.declare("y", SymbolRole::DynamicalVar);
        let one = BigRational::one();
        let ten = BigRational::from_integer(10.into());
        // mul(y, y) = y^2.
        let s = PuiseuxSeries::monomial(y, one.clone(), ten.clone());
        let s2 = s.mul(&s);
        assert_eq!(
            s2.leading_exponent(),
            Some(&BigRational::from_integer(2.into()))
        );
        // add of e = 1 and e = 2 series merges to e = 2.
        let half = BigRational::new(1.into(), 2.into());
        let t = PuiseuxSeries::monomial(y, half, ten);
        let sum = s.add(&t);
        assert_eq!(sum.ramification(), 2);
    }

    #[test]
    fn derive_under_leibniz() {
        let sys = classical_normalized();
        let y = sys.vars[1];
        let ten = BigRational::from_integer(10.into());
        let a = PuiseuxSeries::new(
            y,
            vec![
                (BigRational::zero(), RatFunc::one()),
                (BigRational::one(), RatFunc::from_int(3)),
            ],
            ten.clone(),
        );
        let b = PuiseuxSeries::new(
            y,
            vec![(BigRational::one(), RatFunc::from_int(2))],
            ten,
        );
        let lhs = a.mul(&b).derive_under(&sys, 0).unwrap();
        let rhs = a
            .derive_under(&sys, 0)
            .unwrap()
            .mul(&b)
            .add(&a.mul(&b.derive_under(&sys, 0).unwrap()));
        // Compare on the common reliable range.
        let known = lhs.known_below.clone().min(rhs.known_below.clone());
        for (q, c) in lhs.terms() {
            if *q < known {
                assert_eq!(rhs.coeff(q), *c, "coefficient at {q}");
            }
        }
        for (q, c) in rhs.terms() {
            if *q < known {
                assert_eq!(lhs.coeff(q), *c, "coefficient at {q}");
            }
        }
    }
}
