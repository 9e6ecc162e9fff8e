//! Univariate polynomials over the coefficient field, used by the gcd,
//! squarefree, and partial-fraction machinery.

use num_rational::BigRational;

use super::mpoly::{Mono, MPoly};
use super::ratfunc::RatFunc;
use crate::symbols::Symbol;

/// Dense univariate polynomial in `var` with coefficients in ℚ(params).
/// Coefficients never mention `var`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    pub var: Symbol,
    coeffs: Vec<RatFunc>,
}

impl UniPoly {
    pub fn zero(var: Symbol) -> Self {
        UniPoly {
            var,
            coeffs: Vec::new(),
        }
    }

    pub fn one(var: Symbol) -> Self {
        UniPoly::constant(var, RatFunc::one())
    }

    pub fn constant(var: Symbol, c: RatFunc) -> Self {
        let mut p = UniPoly {
            var,
            coeffs: vec![c],
        };
        p.trim();
        p
    }

    pub fn identity(var: Symbol) -> Self {
        UniPoly {
            var,
            coeffs: vec![RatFunc::zero(), RatFunc::one()],
        }
    }

    pub fn from_coeffs(var: Symbol, coeffs: Vec<RatFunc>) -> Self {
        debug_assert!(coeffs.iter().all(|c| !c.contains_any(&[var])));
        let mut p = UniPoly { var, coeffs };
        p.trim();
        p
    }

    /// Extracts the univariate view of a multivariate polynomial. Returns
    /// `None` if a coefficient of `var^k` still involves `var` (cannot
    /// happen) or the polynomial mentions nothing it shouldn't — callers
    /// validate symbol discipline separately, so this is total in practice.
    pub fn from_mpoly(p: &MPoly, var: Symbol) -> Self {
        let deg = p.degree_of(var);
        let mut coeffs = Vec::with_capacity(deg as usize + 1);
        for k in 0..=deg {
            coeffs.push(RatFunc::from_poly(p.coeff_of(var, k)));
        }
        UniPoly::from_coeffs(var, coeffs)
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        let mut acc = RatFunc::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let mono = RatFunc::from_poly(MPoly::monomial(
                Mono::var_pow(self.var, k as u32),
                BigRational::from_integer(1.into()),
            ));
            acc = acc.add_ref(&c.mul_ref(&mono));
        }
        acc
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> RatFunc {
        self.coeffs.get(k).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn leading(&self) -> RatFunc {
        self.coeffs.last().cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        debug_assert_eq!(self.var, other.var);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k).add_ref(&other.coeff(k)));
        }
        UniPoly::from_coeffs(self.var, out)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly {
            var: self.var,
            coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect(),
        }
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        debug_assert_eq!(self.var, other.var);
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(self.var);
        }
        let mut out = vec![RatFunc::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add_ref(&a.mul_ref(b));
            }
        }
        UniPoly::from_coeffs(self.var, out)
    }

    pub fn scale(&self, c: &RatFunc) -> UniPoly {
        UniPoly::from_coeffs(
            self.var,
            self.coeffs.iter().map(|k| k.mul_ref(c)).collect(),
        )
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        let mut out = UniPoly::one(self.var);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Exact division with remainder over the coefficient field:
    /// `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        debug_assert_eq!(self.var, d.var);
        let dd = d.degree().unwrap();
        let lead_inv = d.leading().inv().expect("leading coefficient nonzero");
        let mut rem = self.clone();
        let mut quot = UniPoly::zero(self.var);
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let c = rem.leading().mul_ref(&lead_inv);
            let shift = dr - dd;
            let mut t = vec![RatFunc::zero(); shift + 1];
            t[shift] = c;
            let t = UniPoly::from_coeffs(self.var, t);
            rem = rem.sub(&t.mul(d));
            quot = quot.add(&t);
        }
        (quot, rem)
    }

    pub fn divides(&self, other: &UniPoly) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.divrem(self).1.is_zero()
    }

    pub fn make_monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().inv().expect("nonzero"))
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
        let (mut f, mut g) = (a.clone(), b.clone());
        while !g.is_zero() {
            let (_, r) = f.divrem(&g);
            f = g;
            g = r;
        }
        f.make_monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `s*a + t*b = g`, `g` monic.
    pub fn ext_gcd(a: &UniPoly, b: &UniPoly) -> (UniPoly, UniPoly, UniPoly) {
        let var = a.var;
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (UniPoly::one(var), UniPoly::zero(var));
        let (mut t0, mut t1) = (UniPoly::zero(var), UniPoly::one(var));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.leading().inv().expect("nonzero");
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    /// Inverse of `self` modulo `m`; `None` if not coprime.
    pub fn inv_mod(&self, m: &UniPoly) -> Option<UniPoly> {
        let (g, s, _) = UniPoly::ext_gcd(self, m);
        if g.degree() != Some(0) {
            return None;
        }
        Some(s.divrem(m).1)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero(self.var);
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c.mul_ref(&RatFunc::from_int(k as i64)));
        }
        UniPoly::from_coeffs(self.var, out)
    }

    pub fn eval(&self, x: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(c);
        }
        acc
    }

    /// Yun's squarefree decomposition: returns `[(p_i, i)]` with the `p_i`
    /// monic, squarefree, pairwise coprime, and `self = lc * Π p_i^i`.
    pub fn squarefree_decomposition(&self) -> Vec<(UniPoly, u32)> {
        let f = self.make_monic();
        if f.is_constant() {
            return Vec::new();
        }
        let fp = f.derivative();
        let g = UniPoly::gcd(&f, &fp);
        if g.is_constant() {
            return vec![(f, 1)];
        }
        let mut out = Vec::new();
        let mut c = f.divrem(&g).0;
        let mut d = fp.divrem(&g).0.sub(&c.derivative());
        let mut mult = 1u32;
        loop {
            let p = UniPoly::gcd(&c, &d);
            if !p.is_constant() {
                out.push((p.clone(), mult));
            }
            c = c.divrem(&p).0;
            if c.is_constant() {
                break;
            }
            d = d.divrem(&p).0.sub(&c.derivative());
            mult += 1;
        }
        out
    }

    /// True when every coefficient is a rational constant.
    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_rational_constant())
    }

    pub fn rational_coeffs(&self) -> Option<Vec<BigRational>> {
        self.coeffs.iter().map(|c| c.as_rational()).collect()
    }

    pub fn from_rational_coeffs(var: Symbol, coeffs: &[BigRational]) -> UniPoly {
        UniPoly::from_coeffs(
            var,
            coeffs
                .iter()
                .map(|c| RatFunc::from_rational(c.clone()))
                .collect(),
        )
    }
}
