//! Sparse multivariate polynomials over ℚ.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::symbols::Symbol;

/// A monomial: product of symbol powers, stored sorted by symbol id with all
/// exponents positive. The empty monomial is 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(Vec<(Symbol, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Mono(vec![(s, 1)])
    }

    pub fn var_pow(s: Symbol, e: u32) -> Self {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(s, e)])
        }
    }

    pub fn from_pairs(pairs: &[(Symbol, u32)]) -> Self {
        let mut map: BTreeMap<Symbol, u32> = BTreeMap::new();
        for &(s, e) in pairs {
            if e > 0 {
                *map.entry(s).or_insert(0) += e;
            }
        }
        Mono(map.into_iter().collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0
            .iter()
            .find(|&&(sym, _)| sym == s)
            .map_or(0, |&(_, e)| e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// Total degree counting only the given symbols.
    pub fn degree_in(&self, syms: &[Symbol]) -> u32 {
        self.0
            .iter()
            .filter(|&&(s, _)| syms.contains(&s))
            .map(|&(_, e)| e)
            .sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0, self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Mono(out)
    }

    /// Exact monomial division; `None` if any exponent would go negative.
    pub fn try_div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut i = 0;
        for &(s, e) in &other.0 {
            loop {
                if i >= self.0.len() {
                    return None;
                }
                let (ss, se) = self.0[i];
                if ss < s {
                    out.push((ss, se));
                    i += 1;
                } else if ss == s {
                    if se < e {
                        return None;
                    }
                    if se > e {
                        out.push((ss, se - e));
                    }
                    i += 1;
                    break;
                } else {
                    return None;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        Some(Mono(out))
    }

    /// Splits the monomial into (part over `syms`, remaining part).
    pub fn split(&self, syms: &[Symbol]) -> (Mono, Mono) {
        let mut main = Vec::new();
        let mut rest = Vec::new();
        for &(s, e) in &self.0 {
            if syms.contains(&s) {
                main.push((s, e));
            } else {
                rest.push((s, e));
            }
        }
        (Mono(main), Mono(rest))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().map(|&(s, _)| s)
    }
}

/// Graded lexicographic comparison (total degree first, then lexicographic
/// with smaller symbol id more significant and larger exponent first). This
/// is a genuine monomial order, used wherever a leading term is needed.
pub fn cmp_grlex(a: &Mono, b: &Mono) -> Ordering {
    match a.total_degree().cmp(&b.total_degree()) {
        Ordering::Equal => {}
        ord => return ord,
    }
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.0.get(i), b.0.get(j)) {
            (None, None) => return Ordering::Equal,
            // a has run out: b still has a positive exponent on some symbol;
            // the side with the positive exponent on the smaller symbol wins.
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(&(sa, ea)), Some(&(sb, eb))) => match sa.cmp(&sb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ea.cmp(&eb) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    ord => return ord,
                },
            },
        }
    }
}

/// Sparse multivariate polynomial over ℚ. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    terms: BTreeMap<Mono, BigRational>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        MPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        MPoly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        MPoly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(s: Symbol) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(s), BigRational::one());
        MPoly { terms }
    }

    pub fn monomial(m: Mono, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::one())
                .map_or(false, |c| c.is_one())
    }

    /// Constant (symbol-free) polynomials report their rational value.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            out.extend(m.symbols());
        }
        out
    }

    pub fn contains_any(&self, syms: &[Symbol]) -> bool {
        self.terms
            .keys()
            .any(|m| m.symbols().any(|s| syms.contains(&s)))
    }

    pub fn degree_of(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    /// Total degree in the given symbols (0 for the zero polynomial).
    pub fn degree_in(&self, syms: &[Symbol]) -> u32 {
        self.terms.keys().map(|m| m.degree_in(syms)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    fn insert(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_ref(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg_ref(&self) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul_ref(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.insert(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(mm, c)| (mm.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut out = MPoly::one();
        for _ in 0..e {
            out = out.mul_ref(self);
        }
        out
    }

    /// Leading term under [`cmp_grlex`] over all symbols.
    pub fn leading_term(&self) -> Option<(&Mono, &BigRational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| cmp_grlex(a, b))
    }

    /// Partial derivative with respect to one symbol.
    pub fn partial(&self, s: Symbol) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            if e > 0 {
                let reduced = m.try_div(&Mono::var(s)).expect("exponent checked");
                out.insert(reduced, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Coefficient of `s^k` as a polynomial in the remaining symbols.
    pub fn coeff_of(&self, s: Symbol, k: u32) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            if m.exponent(s) == k {
                let reduced = m.try_div(&Mono::var_pow(s, k)).expect("exponent checked");
                out.insert(reduced, c.clone());
            }
        }
        out
    }

    /// Groups terms by their monomial part over `main`: the coefficient map
    /// of the polynomial viewed as an element of (rest)[main].
    pub fn coeff_map(&self, main: &[Symbol]) -> BTreeMap<Mono, MPoly> {
        let mut out: BTreeMap<Mono, MPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (main_part, rest) = m.split(main);
            out.entry(main_part)
                .or_insert_with(MPoly::zero)
                .insert(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Substitutes a polynomial for a symbol.
    pub fn subst_poly(&self, s: Symbol, value: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        // Cache powers of the replacement.
        let deg = self.degree_of(s);
        let mut pows = Vec::with_capacity(deg as usize + 1);
        pows.push(MPoly::one());
        for i in 1..=deg {
            let prev = pows[(i - 1) as usize].clone();
            pows.push(prev.mul_ref(value));
        }
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            let rest = m.try_div(&Mono::var_pow(s, e)).expect("exponent checked");
            let term = pows[e as usize].mul_mono(&rest).scale(c);
            out = out.add_ref(&term);
        }
        out
    }

    /// Exact rational evaluation; substitutes every symbol.
    ///
    /// Panics if a symbol is missing from the assignment — callers are
    /// expected to pass a total map.
    pub fn eval_q(&self, assign: &std::collections::HashMap<Symbol, BigRational>) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(s, e) in m.pairs() {
                let v = assign
                    .get(&s)
                    .unwrap_or_else(|| panic!("eval_q: no value for symbol {s:?}"));
                for _ in 0..e {
                    t *= v;
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, assign: &std::collections::HashMap<Symbol, f64>) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for &(s, e) in m.pairs() {
                let v = *assign
                    .get(&s)
                    .unwrap_or_else(|| panic!("eval_f64: no value for symbol {s:?}"));
                t *= v.powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Splits off the rational content: returns `(primitive, content)` with
    /// `self = content * primitive`, where `primitive` has coprime integer
    /// coefficients and positive leading (grlex) coefficient. The zero
    /// polynomial returns `(0, 0)`.
    pub fn primitive_assoc(&self) -> (MPoly, BigRational) {
        if self.is_zero() {
            return (MPoly::zero(), BigRational::zero());
        }
        let mut denom_lcm = BigInt::one();
        for c in self.terms.values() {
            denom_lcm = num_integer::lcm(denom_lcm, c.denom().clone());
        }
        let mut numer_gcd = BigInt::zero();
        for c in self.terms.values() {
            let scaled = c * BigRational::from_integer(denom_lcm.clone());
            debug_assert!(scaled.denom().is_one());
            numer_gcd = num_integer::gcd(numer_gcd, scaled.numer().clone());
        }
        let mut content = BigRational::new(numer_gcd, denom_lcm);
        let lead = self.leading_term().expect("nonzero").1;
        if lead.is_negative() {
            content = -content;
        }
        let prim = self.scale(&content.recip());
        (prim, content)
    }

    /// Primitive associate with positive leading coefficient (content dropped).
    pub fn primitive_part(&self) -> MPoly {
        self.primitive_assoc().0
    }

    /// Exact division in ℚ[symbols]; `None` if `divisor` does not divide.
    pub fn div_exact(&self, divisor: &MPoly) -> Option<MPoly> {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let mut rem = self.clone();
        let mut quot = MPoly::zero();
        let (dm, dc) = divisor.leading_term()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        while !rem.is_zero() {
            let (rm, rc) = rem.leading_term().expect("nonzero");
            let q_mono = rm.try_div(&dm)?;
            let q_coef = rc / &dc;
            let t = MPoly::monomial(q_mono, q_coef);
            rem = rem.sub_ref(&t.mul_ref(divisor));
            quot = quot.add_ref(&t);
        }
        Some(quot)
    }

    /// Content with respect to one symbol: the gcd of the coefficients of
    /// the powers of `s`.
    fn content_wrt(&self, s: Symbol) -> MPoly {
        let mut acc = MPoly::zero();
        for k in 0..=self.degree_of(s) {
            let c = self.coeff_of(s, k);
            if !c.is_zero() {
                acc = MPoly::gcd(&acc, &c);
            }
        }
        acc
    }

    /// Multivariate gcd via primitive pseudo-remainder sequences. The result
    /// is primitive with positive leading coefficient; gcd(0, 0) = 0.
    pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
        if a.is_zero() {
            return b.primitive_part();
        }
        if b.is_zero() {
            return a.primitive_part();
        }
        let mut syms = a.symbols();
        syms.extend(b.symbols());
        let Some(&x) = syms.iter().next() else {
            // Both constants: any nonzero rational is a unit.
            return MPoly::one();
        };

        let cont_a = a.content_wrt(x);
        let cont_b = b.content_wrt(x);
        let cont_gcd = MPoly::gcd(&cont_a, &cont_b);
        let pp_a = a.div_exact(&cont_a).expect("content divides");
        let pp_b = b.div_exact(&cont_b).expect("content divides");

        let (mut f, mut g) = if pp_a.degree_of(x) >= pp_b.degree_of(x) {
            (pp_a, pp_b)
        } else {
            (pp_b, pp_a)
        };
        while !g.is_zero() {
            let r = pseudo_rem(&f, &g, x);
            f = g;
            g = if r.is_zero() {
                MPoly::zero()
            } else {
                let c = r.content_wrt(x);
                r.div_exact(&c).expect("content divides")
            };
        }
        let pp_gcd = {
            let c = f.content_wrt(x);
            f.div_exact(&c).expect("content divides")
        };
        cont_gcd.mul_ref(&pp_gcd).primitive_part()
    }
}

/// Pseudo-remainder of `a` by `b` in the variable `x`: repeatedly cancels
/// the leading `x`-term after multiplying through by the leading coefficient
/// of `b`. The result is an associate of the true pseudo-remainder up to
/// content, which the gcd loop strips anyway.
fn pseudo_rem(a: &MPoly, b: &MPoly, x: Symbol) -> MPoly {
    let db = b.degree_of(x);
    let lb = b.coeff_of(x, db);
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.degree_of(x);
        if dr < db {
            break;
        }
        let lr = r.coeff_of(x, dr);
        // r := lb * r - lr * x^(dr-db) * b
        let shift = MPoly::monomial(Mono::var_pow(x, dr - db), BigRational::one());
        r = r
            .mul_ref(&lb)
            .sub_ref(&lr.mul_ref(&shift).mul_ref(b));
    }
    r
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    // Good enough for the numeric probes: exact for small fractions, graceful
    // for large ones.
    let n = c.numer();
    let d = c.denom();
    match (n.to_string().parse::<f64>(), d.to_string().parse::<f64>()) {
        (Ok(nf), Ok(df)) => nf / df,
        _ => f64::NAN,
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        self.add_ref(rhs)
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self.sub_ref(rhs)
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        self.mul_ref(rhs)
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{Context, SymbolRole};

    fn xy() -> (Context, Symbol, Symbol) {
        let ctx = Context::new();
        let x = ctx.declare("X", SymbolRole::DynamicalVar);
        let y = ctx.declare("Y", SymbolRole::DynamicalVar);
        (ctx, x, y)
    }

    #[test]
    fn ring_basics() {
        let (_ctx, x, y) = xy();
        let p = MPoly::var(x).add_ref(&MPoly::var(y)); // X + Y
        let q = MPoly::var(x).sub_ref(&MPoly::var(y)); // X - Y
        let prod = p.mul_ref(&q);
        let expect = MPoly::var(x)
            .pow(2)
            .sub_ref(&MPoly::var(y).pow(2));
        assert_eq!(prod, expect);
        assert_eq!(prod.degree_of(x), 2);
        assert_eq!(prod.total_degree(), 2);
    }

    #[test]
    fn grlex_order() {
        let (_ctx, x, y) = xy();
        let m_x2 = Mono::var_pow(x, 2);
        let m_xy = Mono::var(x).mul(&Mono::var(y));
        let m_y2 = Mono::var_pow(y, 2);
        let m_x = Mono::var(x);
        assert_eq!(cmp_grlex(&m_x2, &m_xy), Ordering::Greater);
        assert_eq!(cmp_grlex(&m_xy, &m_y2), Ordering::Greater);
        assert_eq!(cmp_grlex(&m_y2, &m_x), Ordering::Greater);
    }

    #[test]
    fn div_exact_detects_divisibility() {
        let (_ctx, x, y) = xy();
        let p = MPoly::var(x).add_ref(&MPoly::var(y));
        let q = MPoly::var(x).sub_ref(&MPoly::var(y));
        let prod = p.mul_ref(&q);
        assert_eq!(prod.div_exact(&p), Some(q.clone()));
        assert_eq!(prod.div_exact(&q), Some(p.clone()));
        let not_div = prod.add_ref(&MPoly::one());
        assert_eq!(not_div.div_exact(&p), None);
    }

    #[test]
    fn gcd_bivariate() {
        let (_ctx, x, y) = xy();
        let p = MPoly::var(x).add_ref(&MPoly::var(y));
        let a = p.mul_ref(&MPoly::var(x)); // X(X+Y)
        let b = p.mul_ref(&MPoly::var(y)).scale(&BigRational::from_integer(6.into())); // 6Y(X+Y)
        assert_eq!(MPoly::gcd(&a, &b), p);
    }

    #[test]
    fn gcd_univariate_classic() {
        let ctx = Context::new();
        let t = ctx.declare("t", SymbolRole::TowerGen);
        // gcd(t^2 - 1, t - 1) = t - 1
        let t2m1 = MPoly::var(t).pow(2).sub_ref(&MPoly::one());
        let tm1 = MPoly::var(t).sub_ref(&MPoly::one());
        assert_eq!(MPoly::gcd(&t2m1, &tm1), tm1);
    }

    #[test]
    fn primitive_assoc_roundtrip() {
        let (_ctx, x, _y) = xy();
        let p = MPoly::var(x)
            .scale(&BigRational::new(BigInt::from(-4), BigInt::from(6)))
            .add_ref(&MPoly::constant(BigRational::new(
                BigInt::from(2),
                BigInt::from(3),
            )));
        let (prim, content) = p.primitive_assoc();
        assert_eq!(prim.scale(&content), p);
        let lead = prim.leading_term().unwrap().1.clone();
        assert!(lead > BigRational::zero());
    }
}
