//! Text syntax: expression parsing, canonical pretty-printing, and the
//! system specification file format.
//!
//! Grammar (no implicit multiplication; one-token lookahead):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | atom ('^' exponent)?
//! atom     := integer | identifier | '(' expr ')'
//! exponent := integer
//! identifier := [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! Rationals are written `p/q` through the division operator; in polynomial
//! context a division must cancel down to a rational constant.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::algebra::{MPoly, Mono, RatFunc};
use crate::symbols::{Context, Symbol, SymbolRole};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("undeclared symbol `{name}` at offset {offset}")]
    UndeclaredSymbol { name: String, offset: usize },
    #[error("negative exponent at offset {offset}")]
    NegativeExponent { offset: usize },
    #[error("exponent too large at offset {offset}")]
    ExponentTooLarge { offset: usize },
    #[error("division by zero in expression")]
    DivisionByZero,
    #[error("division by a non-constant divisor in polynomial context")]
    DivisionInPolynomialContext,
}

/// Expression tree produced by the parser. Exponents are kept as written;
/// evaluation enforces non-negativity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprAst {
    Number(BigInt),
    Symbol(Symbol),
    Add(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Neg(Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((Tok::Int(n), start));
            }
            'A'..='Z' | 'a'..='z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    expected: "a token".into(),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    ctx: &'a Context,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, o)| o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: self.offset(),
                expected: what.into(),
            })
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(ExprAst::Neg(Box::new(rhs))));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = ExprAst::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = ExprAst::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(ExprAst::Neg(Box::new(inner)));
        }
        let atom = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let off = self.offset();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let e = u32::try_from(&n)
                        .map_err(|_| ParseError::ExponentTooLarge { offset: off })?;
                    return Ok(ExprAst::Pow(Box::new(atom), e));
                }
                Some(Tok::Minus) => return Err(ParseError::NegativeExponent { offset: off }),
                _ => {
                    return Err(ParseError::Syntax {
                        offset: off,
                        expected: "an integer exponent".into(),
                    })
                }
            }
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(ExprAst::Number(n)),
            Some(Tok::Ident(name)) => match self.ctx.lookup(&name) {
                Some(sym) => Ok(ExprAst::Symbol(sym)),
                None => Err(ParseError::UndeclaredSymbol { name, offset: off }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(ParseError::Syntax {
                offset: off,
                expected: "a number, symbol, or `(`".into(),
            }),
        }
    }
}

/// Parses an expression against declared symbols.
pub fn parse_expr(text: &str, ctx: &Context) -> Result<ExprAst, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        ctx,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax {
            offset: p.offset(),
            expected: "end of input".into(),
        });
    }
    Ok(e)
}

fn eval_ast(e: &ExprAst) -> Result<RatFunc, ParseError> {
    match e {
        ExprAst::Number(n) => Ok(RatFunc::from_rational(BigRational::from_integer(n.clone()))),
        ExprAst::Symbol(s) => Ok(RatFunc::var(*s)),
        ExprAst::Add(a, b) => Ok(eval_ast(a)?.add_ref(&eval_ast(b)?)),
        ExprAst::Mul(a, b) => Ok(eval_ast(a)?.mul_ref(&eval_ast(b)?)),
        ExprAst::Div(a, b) => {
            let denom = eval_ast(b)?;
            eval_ast(a)?
                .div_ref(&denom)
                .map_err(|_| ParseError::DivisionByZero)
        }
        ExprAst::Neg(a) => Ok(eval_ast(a)?.neg_ref()),
        ExprAst::Pow(a, e) => {
            let base = eval_ast(a)?;
            base.pow_i64(*e as i64)
                .map_err(|_| ParseError::DivisionByZero)
        }
    }
}

/// Parses a rational-function expression.
pub fn parse_ratfunc(text: &str, ctx: &Context) -> Result<RatFunc, ParseError> {
    eval_ast(&parse_expr(text, ctx)?)
}

/// Parses a polynomial: any division must reduce to a rational constant.
pub fn parse_poly(text: &str, ctx: &Context) -> Result<MPoly, ParseError> {
    let r = parse_ratfunc(text, ctx)?;
    r.as_poly().ok_or(ParseError::DivisionInPolynomialContext)
}

// ---------------------------------------------------------------------------
// Canonical formatting
// ---------------------------------------------------------------------------

/// Canonical term order: graded lexicographic in the variables (dynamical
/// variables, tower generators, and formal indeterminates in declaration
/// order), then graded lexicographic in the parameters.
fn display_classes(ctx: &Context) -> (Vec<Symbol>, Vec<Symbol>) {
    let mut main = ctx.with_role(SymbolRole::DynamicalVar);
    main.extend(ctx.with_role(SymbolRole::TowerGen));
    main.extend(ctx.with_role(SymbolRole::FormalIndet));
    let coeff = ctx.with_role(SymbolRole::Parameter);
    (main, coeff)
}

fn cmp_display(a: &Mono, b: &Mono, main: &[Symbol], coeff: &[Symbol]) -> std::cmp::Ordering {
    let key = |m: &Mono, class: &[Symbol]| -> Vec<u32> {
        class.iter().map(|&s| m.exponent(s)).collect()
    };
    let deg = |m: &Mono| m.degree_in(main);
    // Higher variable degree first; ties broken by the coefficient monomial
    // (earlier-declared parameters first), then by the variable exponents.
    deg(b)
        .cmp(&deg(a))
        .then_with(|| key(b, coeff).cmp(&key(a, coeff)))
        .then_with(|| key(b, main).cmp(&key(a, main)))
}

fn format_mono(m: &Mono, order: &[Symbol], ctx: &Context) -> Vec<String> {
    let mut parts = Vec::new();
    for &s in order {
        let e = m.exponent(s);
        if e == 1 {
            parts.push(ctx.name(s));
        } else if e > 1 {
            parts.push(format!("{}^{}", ctx.name(s), e));
        }
    }
    parts
}

fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Deterministic canonical rendering; `parse_poly(format_poly(p)) == p`.
pub fn format_poly(p: &MPoly, ctx: &Context) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let (main, coeff) = display_classes(ctx);
    // Parameters render before variables within a term: `a*X*Y`, not `X*Y*a`.
    let mut order: Vec<Symbol> = coeff.clone();
    order.extend(main.iter().copied());
    let mut terms: Vec<(&Mono, &BigRational)> = p.terms().collect();
    terms.sort_by(|(a, _), (b, _)| cmp_display(a, b, &main, &coeff));

    let mut out = String::new();
    for (i, (m, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mut parts = Vec::new();
        if !mag.is_one() || m.is_one() {
            parts.push(format_rational(&mag));
        }
        parts.extend(format_mono(m, &order, ctx));
        out.push_str(&parts.join("*"));
    }
    out
}

/// Rendering for rational functions: `num` or `num/(den)`.
pub fn format_ratfunc(r: &RatFunc, ctx: &Context) -> String {
    let num = format_poly(r.numerator(), ctx);
    if r.denominator().is_one() {
        return num;
    }
    let den = format_poly(r.denominator(), ctx);
    let num_wrapped = if r.numerator().num_terms() > 1 {
        format!("({num})")
    } else {
        num
    };
    // The denominator needs parentheses unless it is a single bare power.
    let den_single_factor = r.denominator().num_terms() == 1 && {
        let (m, c) = r.denominator().terms().next().expect("nonzero");
        c.is_one() && m.pairs().len() == 1
    };
    if den_single_factor {
        format!("{num_wrapped}/{den}")
    } else {
        format!("{num_wrapped}/({den})")
    }
}

// ---------------------------------------------------------------------------
// System specification files
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("line {line}: expected `key = value`")]
    BadLine { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("missing derivative for {0}")]
    MissingDerivative(String),
    #[error("planar systems need exactly two variables, got {0}")]
    Arity(usize),
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("symbol `{0}` declared twice")]
    Redeclared(String),
    #[error("in `{field}`: {source}")]
    Expr { field: String, source: ParseError },
    #[error("non-degeneracy divisor `{0}` is the zero polynomial")]
    ZeroDivisor(String),
    #[error("tower generator `{gen}`: derivative may reference only parameters and generators up to `{gen}`")]
    TowerOrder { gen: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// A validated system specification: the declaration context plus the parsed
/// derivatives, non-degeneracy divisors, and tower generators.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub ctx: Arc<Context>,
    /// Exactly two dynamical variables, in declaration order.
    pub vars: [Symbol; 2],
    pub params: Vec<Symbol>,
    /// Derivative of each variable, parallel to `vars`.
    pub derivs: [MPoly; 2],
    pub nondegenerate: Vec<MPoly>,
    /// Tower generators with their prescribed derivatives, in order.
    pub tower: Vec<(Symbol, RatFunc)>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses a system specification document (UTF-8, line oriented
/// `key = value`, `#` comments). Keys: `vars`, `params`, `fprime.<var>`,
/// `nondegenerate`, `tower.<gen>`.
pub fn parse_system(doc: &str) -> Result<SystemSpec, SpecError> {
    let mut vars_raw: Option<Vec<String>> = None;
    let mut params_raw: Vec<String> = Vec::new();
    let mut have_params = false;
    let mut fprime: Vec<(String, String)> = Vec::new();
    let mut nondeg_raw: Option<Vec<String>> = None;
    let mut tower_raw: Vec<(String, String)> = Vec::new();

    for (lineno, raw) in doc.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SpecError::BadLine { line: lineno + 1 });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "vars" => {
                if vars_raw.is_some() {
                    return Err(SpecError::DuplicateKey {
                        line: lineno + 1,
                        key: key.into(),
                    });
                }
                vars_raw = Some(split_idents(value));
            }
            "params" => {
                if have_params {
                    return Err(SpecError::DuplicateKey {
                        line: lineno + 1,
                        key: key.into(),
                    });
                }
                have_params = true;
                params_raw = split_idents(value);
            }
            "nondegenerate" => {
                if nondeg_raw.is_some() {
                    return Err(SpecError::DuplicateKey {
                        line: lineno + 1,
                        key: key.into(),
                    });
                }
                nondeg_raw = Some(value.split(',').map(|s| s.trim().to_string()).collect());
            }
            _ => {
                if let Some(var) = key.strip_prefix("fprime.") {
                    if fprime.iter().any(|(v, _)| v == var) {
                        return Err(SpecError::DuplicateKey {
                            line: lineno + 1,
                            key: key.into(),
                        });
                    }
                    fprime.push((var.trim().to_string(), value.to_string()));
                } else if let Some(gen) = key.strip_prefix("tower.") {
                    if tower_raw.iter().any(|(g, _)| g == gen) {
                        return Err(SpecError::DuplicateKey {
                            line: lineno + 1,
                            key: key.into(),
                        });
                    }
                    tower_raw.push((gen.trim().to_string(), value.to_string()));
                } else {
                    return Err(SpecError::UnknownKey {
                        line: lineno + 1,
                        key: key.into(),
                    });
                }
            }
        }
    }

    let vars_raw = vars_raw.ok_or_else(|| SpecError::MissingField("vars".into()))?;
    build_spec(
        vars_raw,
        params_raw,
        fprime,
        nondeg_raw.unwrap_or_default(),
        tower_raw,
    )
}

fn split_idents(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn build_spec(
    vars_raw: Vec<String>,
    params_raw: Vec<String>,
    fprime: Vec<(String, String)>,
    nondeg_raw: Vec<String>,
    tower_raw: Vec<(String, String)>,
) -> Result<SystemSpec, SpecError> {
    if vars_raw.len() != 2 {
        return Err(SpecError::Arity(vars_raw.len()));
    }
    let ctx = Arc::new(Context::new());
    let mut declared: Vec<String> = Vec::new();
    let mut declare = |name: &str, role: SymbolRole| -> Result<Symbol, SpecError> {
        if !is_identifier(name) {
            return Err(SpecError::BadIdentifier(name.into()));
        }
        if declared.iter().any(|d| d == name) {
            return Err(SpecError::Redeclared(name.into()));
        }
        declared.push(name.to_string());
        Ok(ctx.declare(name, role))
    };

    let v0 = declare(&vars_raw[0], SymbolRole::DynamicalVar)?;
    let v1 = declare(&vars_raw[1], SymbolRole::DynamicalVar)?;
    let mut params = Vec::new();
    for p in &params_raw {
        params.push(declare(p, SymbolRole::Parameter)?);
    }
    let mut tower = Vec::new();
    for (g, _) in &tower_raw {
        tower.push(declare(g, SymbolRole::TowerGen)?);
    }
    drop(declare);

    // Tower derivatives: each may reference parameters and generators up to
    // and including itself, never dynamical variables or later generators.
    let mut tower_built: Vec<(Symbol, RatFunc)> = Vec::new();
    for (k, (gen_name, expr)) in tower_raw.iter().enumerate() {
        let d = parse_ratfunc(expr, &ctx).map_err(|source| SpecError::Expr {
            field: format!("tower.{gen_name}"),
            source,
        })?;
        let allowed: Vec<Symbol> = params
            .iter()
            .copied()
            .chain(tower.iter().copied().take(k + 1))
            .collect();
        if d.symbols().iter().any(|s| !allowed.contains(s)) {
            return Err(SpecError::TowerOrder {
                gen: gen_name.clone(),
            });
        }
        tower_built.push((tower[k], d));
    }

    // Derivatives for both variables.
    let mut derivs: [Option<MPoly>; 2] = [None, None];
    for (var, expr) in &fprime {
        let idx = if *var == vars_raw[0] {
            0
        } else if *var == vars_raw[1] {
            1
        } else {
            return Err(SpecError::UnknownKey {
                line: 0,
                key: format!("fprime.{var}"),
            });
        };
        let p = parse_poly(expr, &ctx).map_err(|source| SpecError::Expr {
            field: format!("fprime.{var}"),
            source,
        })?;
        derivs[idx] = Some(p);
    }
    let d0 = derivs[0]
        .take()
        .ok_or_else(|| SpecError::MissingDerivative(vars_raw[0].clone()))?;
    let d1 = derivs[1]
        .take()
        .ok_or_else(|| SpecError::MissingDerivative(vars_raw[1].clone()))?;

    let mut nondegenerate = Vec::new();
    for expr in &nondeg_raw {
        let p = parse_poly(expr, &ctx).map_err(|source| SpecError::Expr {
            field: "nondegenerate".into(),
            source,
        })?;
        if p.is_zero() {
            return Err(SpecError::ZeroDivisor(expr.clone()));
        }
        nondegenerate.push(p);
    }

    Ok(SystemSpec {
        ctx,
        vars: [v0, v1],
        params,
        derivs: [d0, d1],
        nondegenerate,
        tower: tower_built,
    })
}

/// The built-in presets.
///
/// * `lv-classical` — X' = X(aY + b), Y' = Y(cX + d), nondegenerate X, Y
/// * `lv-2d`        — X' = X(aY + b), Y' = Y(cX + dY), nondegenerate X, Y
pub fn preset(name: &str) -> Result<SystemSpec, SpecError> {
    match name {
        "lv-classical" => parse_system(PRESET_LV_CLASSICAL),
        "lv-2d" => parse_system(PRESET_LV_2D),
        other => Err(SpecError::UnknownPreset(other.into())),
    }
}

pub const PRESET_LV_CLASSICAL: &str = "\
# Classical Lotka-Volterra system with symbolic parameters.
vars = X, Y
params = a, b, c, d
fprime.X = X*(a*Y + b)
fprime.Y = Y*(c*X + d)
nondegenerate = X, Y
";

pub const PRESET_LV_2D: &str = "\
# 2d Lotka-Volterra system with symbolic parameters.
vars = X, Y
params = a, b, c, d
fprime.X = X*(a*Y + b)
fprime.Y = Y*(c*X + d*Y)
nondegenerate = X, Y
";

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.vars.iter().map(|&v| self.ctx.name(v)).collect();
        write!(
            f,
            "{}' = {}, {}' = {}",
            names[0],
            format_poly(&self.derivs[0], &self.ctx),
            names[1],
            format_poly(&self.derivs[1], &self.ctx),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv_ctx() -> Arc<Context> {
        let ctx = Context::new();
        ctx.declare("X", SymbolRole::DynamicalVar);
        ctx.declare("Y", SymbolRole::DynamicalVar);
        ctx.declare("a", SymbolRole::Parameter);
        ctx.declare("b", SymbolRole::Parameter);
        Arc::new(ctx)
    }

    #[test]
    fn parse_expands_products() {
        let ctx = lv_ctx();
        let p = parse_poly("X*(a*Y + b)", &ctx).unwrap();
        assert_eq!(format_poly(&p, &ctx), "a*X*Y + b*X");
    }

    #[test]
    fn parse_rational_constant() {
        let ctx = lv_ctx();
        let p = parse_poly("X^2 - 1/2", &ctx).unwrap();
        assert_eq!(format_poly(&p, &ctx), "X^2 - 1/2");
    }

    #[test]
    fn syntax_error_position() {
        let ctx = lv_ctx();
        let err = parse_poly("X +", &ctx).unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                offset: 3,
                expected: "a number, symbol, or `(`".into()
            }
        );
    }

    #[test]
    fn undeclared_symbol() {
        let ctx = lv_ctx();
        let err = parse_poly("X + w", &ctx).unwrap_err();
        assert_eq!(
            err,
            ParseError::UndeclaredSymbol {
                name: "w".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn negative_exponent_rejected() {
        let ctx = lv_ctx();
        let err = parse_poly("X^-2", &ctx).unwrap_err();
        assert_eq!(err, ParseError::NegativeExponent { offset: 2 });
    }

    #[test]
    fn division_rules() {
        let ctx = lv_ctx();
        assert!(parse_poly("X/Y", &ctx).is_err());
        // X*Y/Y cancels to a polynomial.
        assert!(parse_poly("X*Y/Y", &ctx).is_ok());
        let r = parse_ratfunc("X/Y", &ctx).unwrap();
        assert_eq!(format_ratfunc(&r, &ctx), "X/Y");
    }

    #[test]
    fn zero_formats() {
        let ctx = lv_ctx();
        let p = parse_poly("X - X", &ctx).unwrap();
        assert_eq!(format_poly(&p, &ctx), "0");
    }

    #[test]
    fn preset_lv_classical() {
        let spec = preset("lv-classical").unwrap();
        let ctx = &spec.ctx;
        assert_eq!(format_poly(&spec.derivs[0], ctx), "a*X*Y + b*X");
        assert_eq!(format_poly(&spec.derivs[1], ctx), "c*X*Y + d*Y");
        assert_eq!(spec.nondegenerate.len(), 2);
    }

    #[test]
    fn preset_lv_2d() {
        let spec = preset("lv-2d").unwrap();
        let ctx = &spec.ctx;
        assert_eq!(format_poly(&spec.derivs[1], ctx), "c*X*Y + d*Y^2");
    }

    #[test]
    fn missing_derivative() {
        let doc = "vars = X, Y\nparams = a\nfprime.X = X\n";
        let err = parse_system(doc).unwrap_err();
        assert!(matches!(err, SpecError::MissingDerivative(v) if v == "Y"));
    }

    #[test]
    fn tower_declaration() {
        let doc = "vars = X, Y\nparams = b\nfprime.X = X\nfprime.Y = Y\ntower.z = b*z\n";
        let spec = parse_system(doc).unwrap();
        assert_eq!(spec.tower.len(), 1);
        let (z, dz) = &spec.tower[0];
        assert_eq!(spec.ctx.name(*z), "z");
        assert_eq!(format_ratfunc(dz, &spec.ctx), "b*z");
    }

    #[test]
    fn tower_cannot_reference_later_generator() {
        let doc =
            "vars = X, Y\nparams = b\nfprime.X = X\nfprime.Y = Y\ntower.z = w\ntower.w = 1\n";
        assert!(matches!(
            parse_system(doc).unwrap_err(),
            SpecError::TowerOrder { .. }
        ));
    }
}
