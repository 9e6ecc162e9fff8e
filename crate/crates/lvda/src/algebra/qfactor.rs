//! Univariate factorization over ℚ for parameter-free polynomials.
//!
//! Rational-root extraction handles all linear factors; what remains is
//! split by Kronecker interpolation under a combination budget. Degree-2
//! remainders without rational roots are certified irreducible outright.
//! Factors that exhaust the budget are returned whole and marked
//! uncertified, never silently treated as irreducible.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ratfunc::RatFunc;
use super::unipoly::UniPoly;

/// One factor of a squarefree rational polynomial.
#[derive(Debug, Clone)]
pub struct QFactor {
    pub poly: UniPoly,
    /// Whether irreducibility over ℚ is certified.
    pub certified: bool,
}

const DIVISOR_BUDGET: usize = 4_096;
const KRONECKER_COMBO_BUDGET: usize = 200_000;

/// Factors a squarefree univariate polynomial with rational coefficients
/// into monic factors. Certified factors are irreducible over ℚ.
pub fn factor_rational_poly(f: &UniPoly) -> Vec<QFactor> {
    let coeffs = f
        .rational_coeffs()
        .expect("factor_rational_poly requires rational coefficients");
    let ints = clear_denominators(&coeffs);
    let mut out = Vec::new();
    factor_int_poly(f.var, ints, &mut out);
    out
}

fn clear_denominators(coeffs: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in coeffs {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let mut ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = num_integer::gcd(g, c.clone());
    }
    if !g.is_zero() && !g.is_one() {
        for c in &mut ints {
            *c /= &g;
        }
    }
    ints
}

fn factor_int_poly(var: crate::symbols::Symbol, mut ints: Vec<BigInt>, out: &mut Vec<QFactor>) {
    while matches!(ints.last(), Some(c) if c.is_zero()) {
        ints.pop();
    }
    let deg = ints.len().saturating_sub(1);
    if deg == 0 {
        return;
    }

    // Power of the variable itself.
    if ints[0].is_zero() {
        out.push(QFactor {
            poly: UniPoly::identity(var),
            certified: true,
        });
        factor_int_poly(var, ints[1..].to_vec(), out);
        return;
    }

    if deg == 1 {
        out.push(QFactor {
            poly: int_poly(var, &ints).make_monic(),
            certified: true,
        });
        return;
    }

    // Rational roots p/q with p | a0 and q | an.
    let p_divs = divisors(&ints[0]);
    let q_divs = divisors(&ints[deg]);
    if let (Some(ps), Some(qs)) = (p_divs, q_divs) {
        for p in &ps {
            for q in &qs {
                for sign in [1i64, -1] {
                    let root = BigRational::new(p * BigInt::from(sign), q.clone());
                    if eval_int_poly(&ints, &root).is_zero() {
                        // Divide out (q*x - sign*p).
                        let lin = UniPoly::from_coeffs(
                            var,
                            vec![
                                RatFunc::from_rational(-root.clone()),
                                RatFunc::from_int(1),
                            ],
                        );
                        out.push(QFactor {
                            poly: lin.clone(),
                            certified: true,
                        });
                        let quotient = int_poly(var, &ints).divrem(&lin).0;
                        let qc = clear_denominators(&quotient.rational_coeffs().unwrap());
                        factor_int_poly(var, qc, out);
                        return;
                    }
                }
            }
        }
    } else {
        // Divisor enumeration too expensive; give up on this block honestly.
        out.push(QFactor {
            poly: int_poly(var, &ints).make_monic(),
            certified: false,
        });
        return;
    }

    // No rational roots left. Degree 2 is then irreducible.
    if deg <= 2 {
        out.push(QFactor {
            poly: int_poly(var, &ints).make_monic(),
            certified: true,
        });
        return;
    }

    match kronecker_split(var, &ints) {
        KroneckerOutcome::Split(a, b) => {
            factor_int_poly(var, a, out);
            factor_int_poly(var, b, out);
        }
        // A completed sweep with no factor found proves irreducibility.
        KroneckerOutcome::Irreducible => out.push(QFactor {
            poly: int_poly(var, &ints).make_monic(),
            certified: true,
        }),
        KroneckerOutcome::BudgetExceeded => out.push(QFactor {
            poly: int_poly(var, &ints).make_monic(),
            certified: false,
        }),
    }
}

enum KroneckerOutcome {
    Split(Vec<BigInt>, Vec<BigInt>),
    Irreducible,
    BudgetExceeded,
}

/// Tries to split `f` (primitive, squarefree, no rational roots, deg ≥ 3)
/// into two nontrivial integer factors by Kronecker interpolation.
fn kronecker_split(var: crate::symbols::Symbol, ints: &[BigInt]) -> KroneckerOutcome {
    let deg = ints.len() - 1;
    let f = int_poly(var, ints);
    for d in 2..=deg / 2 {
        // Sample points 0, 1, -1, 2, -2, …
        let points: Vec<BigInt> = (0..=d as i64)
            .map(|k| {
                let m = (k + 1) / 2;
                BigInt::from(if k % 2 == 1 { m } else { -m })
            })
            .collect();
        let values: Vec<BigInt> = points
            .iter()
            .map(|x| {
                eval_int_poly(ints, &BigRational::from_integer(x.clone())).to_integer()
            })
            .collect();
        let mut div_lists = Vec::new();
        let mut combos = 1usize;
        for v in &values {
            let Some(ds) = divisors(v) else {
                return KroneckerOutcome::BudgetExceeded;
            };
            let mut signed = Vec::with_capacity(ds.len() * 2);
            for dd in ds {
                signed.push(dd.clone());
                signed.push(-dd);
            }
            combos = combos.saturating_mul(signed.len());
            div_lists.push(signed);
        }
        if combos > KRONECKER_COMBO_BUDGET {
            return KroneckerOutcome::BudgetExceeded;
        }
        let mut idx = vec![0usize; div_lists.len()];
        loop {
            let sample: Vec<BigRational> = idx
                .iter()
                .zip(&div_lists)
                .map(|(&i, l)| BigRational::from_integer(l[i].clone()))
                .collect();
            if let Some(cand) = interpolate(var, &points, &sample) {
                if cand.degree() == Some(d) && !cand.is_constant() {
                    let (q, r) = f.divrem(&cand);
                    if r.is_zero() {
                        let a = clear_denominators(&cand.rational_coeffs().unwrap());
                        let b = clear_denominators(&q.rational_coeffs().unwrap());
                        return KroneckerOutcome::Split(a, b);
                    }
                }
            }
            // Advance the odometer.
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < div_lists[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    KroneckerOutcome::Irreducible
}

fn interpolate(
    var: crate::symbols::Symbol,
    points: &[BigInt],
    values: &[BigRational],
) -> Option<UniPoly> {
    // Lagrange interpolation over ℚ.
    let mut acc = UniPoly::zero(var);
    for (i, xi) in points.iter().enumerate() {
        let mut basis = UniPoly::one(var);
        let mut denom = BigRational::one();
        for (j, xj) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&UniPoly::from_coeffs(
                var,
                vec![
                    RatFunc::from_rational(BigRational::from_integer(-xj.clone())),
                    RatFunc::from_int(1),
                ],
            ));
            denom *= BigRational::from_integer(xi - xj);
        }
        let w = &values[i] / denom;
        acc = acc.add(&basis.scale(&RatFunc::from_rational(w)));
    }
    // Only integer-coefficient candidates can divide a primitive integer
    // polynomial with the right content behavior; reject the rest early.
    let cs = acc.rational_coeffs()?;
    if cs.iter().all(|c| c.denom().is_one()) {
        Some(acc)
    } else {
        None
    }
}

fn int_poly(var: crate::symbols::Symbol, ints: &[BigInt]) -> UniPoly {
    UniPoly::from_coeffs(
        var,
        ints.iter()
            .map(|c| RatFunc::from_rational(BigRational::from_integer(c.clone())))
            .collect(),
    )
}

fn eval_int_poly(ints: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in ints.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

/// Positive divisors of `n`; `None` if enumeration would exceed the budget.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    if n.is_zero() {
        return None;
    }
    let mut out = Vec::new();
    let mut i = BigInt::one();
    loop {
        let i2 = &i * &i;
        if i2 > n {
            break;
        }
        if (&n % &i).is_zero() {
            out.push(i.clone());
            let j = &n / &i;
            if j != i {
                out.push(j);
            }
        }
        if out.len() > DIVISOR_BUDGET {
            return None;
        }
        i += BigInt::one();
        // Trial division cap: huge prime cofactors make the loop unbounded.
        if i > BigInt::from(2_000_000u64) {
            return None;
        }
    }
    out.sort();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{Context, SymbolRole};

    fn t_var() -> (Context, crate::symbols::Symbol) {
        let ctx = Context::new();
        let t = ctx.declare("t", SymbolRole::TowerGen);
        (ctx, t)
    }

    fn poly(var: crate::symbols::Symbol, cs: &[i64]) -> UniPoly {
        UniPoly::from_coeffs(var, cs.iter().map(|&c| RatFunc::from_int(c)).collect())
    }

    #[test]
    fn splits_linear_factors() {
        let (_ctx, t) = t_var();
        // t(t-1)(t+2)
        let f = poly(t, &[0, 1]).mul(&poly(t, &[-1, 1])).mul(&poly(t, &[2, 1]));
        let factors = factor_rational_poly(&f);
        assert_eq!(factors.len(), 3);
        assert!(factors.iter().all(|f| f.certified));
        let mut prod = UniPoly::one(t);
        for f in &factors {
            prod = prod.mul(&f.poly);
        }
        assert_eq!(prod, f.make_monic());
    }

    #[test]
    fn certifies_t2_plus_1() {
        let (_ctx, t) = t_var();
        let f = poly(t, &[1, 0, 1]);
        let factors = factor_rational_poly(&f);
        assert_eq!(factors.len(), 1);
        assert!(factors[0].certified);
        assert_eq!(factors[0].poly, f.make_monic());
    }

    #[test]
    fn kronecker_splits_quartic() {
        let (_ctx, t) = t_var();
        // (t^2+1)(t^2+t+1): no rational roots, two irreducible quadratics.
        let f = poly(t, &[1, 0, 1]).mul(&poly(t, &[1, 1, 1]));
        let factors = factor_rational_poly(&f);
        assert_eq!(factors.len(), 2);
        assert!(factors.iter().all(|f| f.certified));
        let mut prod = UniPoly::one(t);
        for f in &factors {
            prod = prod.mul(&f.poly);
        }
        assert_eq!(prod, f.make_monic());
    }

    #[test]
    fn rational_root_with_leading_coefficient() {
        let (_ctx, t) = t_var();
        // 2t - 3 has root 3/2.
        let f = poly(t, &[-3, 2]).mul(&poly(t, &[1, 0, 1]));
        let factors = factor_rational_poly(&f);
        assert_eq!(factors.len(), 2);
        assert!(factors.iter().all(|f| f.certified));
    }
}
