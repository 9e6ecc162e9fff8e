//! Kernel computation for matrices whose entries depend on case parameters,
//! with an explicit, exhaustive case split.
//!
//! Entries live in ℚ(free params)(case params). Free parameters are generic
//! transcendentals — a nonzero rational function of them never vanishes — so
//! only case parameters can make a pivot degenerate. Elimination therefore
//! proceeds normally on case-parameter-free pivots and branches on the
//! others: each branch condition is a polynomial in the case parameters,
//! with the zero side imposed by substitution and the nonzero side recorded
//! as a disequation. Sibling branches are mutually exclusive and jointly
//! exhaustive by construction.

use thiserror::Error;

use super::mpoly::MPoly;
use super::qfactor::factor_rational_poly;
use super::ratfunc::RatFunc;
use super::unipoly::UniPoly;
use crate::symbols::Symbol;

#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    /// Maximum number of branch nodes before the search reports Exhausted.
    pub node_budget: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { node_budget: 10_000 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("matrix entry ({0},{1}) is not affine in each case parameter")]
    NotAffine(usize, usize),
    #[error("matrix entry ({0},{1}) has a case parameter in its denominator")]
    CaseParamDenominator(usize, usize),
    #[error("matrix is empty")]
    Empty,
}

/// A leaf of the case tree: the conditions that select it and the kernel
/// basis of the specialized system.
#[derive(Debug, Clone)]
pub struct CaseLeaf {
    /// Case-parameter assignments imposed on this branch, in imposition order.
    pub substitutions: Vec<(Symbol, RatFunc)>,
    /// Imposed polynomial equations (display forms).
    pub equations: Vec<MPoly>,
    /// Polynomials required nonzero on this branch.
    pub disequations: Vec<MPoly>,
    /// Kernel basis vectors; entries may involve still-free case parameters.
    pub kernel: Vec<Vec<RatFunc>>,
}

/// Binary case tree produced by [`parametric_kernel`].
#[derive(Debug, Clone)]
pub enum CaseTree {
    /// Split on `condition = 0` versus `condition ≠ 0`.
    Branch {
        condition: MPoly,
        zero: Box<CaseTree>,
        nonzero: Box<CaseTree>,
    },
    Leaf(CaseLeaf),
    /// The branch conditions are contradictory; the region is empty.
    Infeasible,
    /// An imposed equation could not be reduced to substitutions (it is
    /// nonlinear in every case parameter it involves). The kernel on this
    /// region is not computed; callers must surface this honestly.
    Unresolved { equation: MPoly },
    /// The node budget ran out below this point.
    Exhausted,
}

impl CaseTree {
    pub fn leaves(&self) -> Vec<&CaseLeaf> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let CaseTree::Leaf(l) = t {
                out.push(l);
            }
        });
        out
    }

    pub fn has_exhausted(&self) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if matches!(t, CaseTree::Exhausted) {
                found = true;
            }
        });
        found
    }

    pub fn unresolved(&self) -> Vec<&MPoly> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let CaseTree::Unresolved { equation } = t {
                out.push(equation);
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a CaseTree)) {
        f(self);
        if let CaseTree::Branch { zero, nonzero, .. } = self {
            zero.walk(f);
            nonzero.walk(f);
        }
    }
}

#[derive(Clone)]
struct Elim {
    mat: Vec<Vec<RatFunc>>,
    ncols: usize,
    case_params: Vec<Symbol>,
    pivots: Vec<(usize, usize)>,
    row_used: Vec<bool>,
    col: usize,
    subs: Vec<(Symbol, RatFunc)>,
    eqs: Vec<MPoly>,
    diseqs: Vec<MPoly>,
    /// Equations still to impose before elimination resumes.
    pending: Vec<MPoly>,
}

struct Budget {
    remaining: usize,
}

impl Budget {
    fn take(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        true
    }
}

/// Exhaustive case-split Gaussian elimination. Every leaf reports the kernel
/// basis of the matrix specialized to that leaf's conditions.
pub fn parametric_kernel(
    matrix: &[Vec<RatFunc>],
    case_params: &[Symbol],
    opts: KernelOptions,
) -> Result<CaseTree, KernelError> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Err(KernelError::Empty);
    }
    let ncols = matrix[0].len();
    for (i, row) in matrix.iter().enumerate() {
        assert_eq!(row.len(), ncols, "ragged matrix");
        for (j, e) in row.iter().enumerate() {
            if e.denominator().contains_any(case_params) {
                return Err(KernelError::CaseParamDenominator(i, j));
            }
            for &q in case_params {
                if e.numerator().degree_of(q) > 1 {
                    return Err(KernelError::NotAffine(i, j));
                }
            }
        }
    }
    let st = Elim {
        mat: matrix.to_vec(),
        ncols,
        case_params: case_params.to_vec(),
        pivots: Vec::new(),
        row_used: vec![false; matrix.len()],
        col: 0,
        subs: Vec::new(),
        eqs: Vec::new(),
        diseqs: Vec::new(),
        pending: Vec::new(),
    };
    let mut budget = Budget {
        remaining: opts.node_budget,
    };
    Ok(run(st, &mut budget))
}

fn run(mut st: Elim, budget: &mut Budget) -> CaseTree {
    // Impose pending equations first.
    while let Some(eq) = st.pending.pop() {
        let eq = eq.primitive_part();
        if eq.is_zero() {
            continue;
        }
        if !eq.contains_any(&st.case_params) {
            // A nonzero element of ℚ(free params) cannot vanish.
            return CaseTree::Infeasible;
        }
        let factors = factor_condition(&eq, &st.case_params);
        if factors.len() > 1 {
            // eq = 0 is the disjunction over its factors.
            return branch_on_factor_list(st, &factors, budget);
        }
        let f = factors.into_iter().next().unwrap_or(eq);
        match impose_irreducible(&mut st, &f) {
            Imposed::Done => continue,
            Imposed::Infeasible => return CaseTree::Infeasible,
            Imposed::NeedBranch { q, pivot_coeff, rest } => {
                if !budget.take() {
                    return CaseTree::Exhausted;
                }
                // f = A*q + B: either A = 0 (and then B = 0), or A ≠ 0 and
                // q = -B/A.
                let mut zero_side = st.clone();
                zero_side.pending.push(rest.clone());
                zero_side.pending.push(pivot_coeff.clone());
                let mut nonzero_side = st;
                nonzero_side.diseqs.push(pivot_coeff.clone());
                let value = RatFunc::new(rest.neg_ref(), pivot_coeff.clone())
                    .expect("coefficient nonzero");
                let nonzero_tree =
                    match apply_substitution(&mut nonzero_side, q, value, f.clone()) {
                        Imposed::Done => run(nonzero_side, budget),
                        _ => CaseTree::Infeasible,
                    };
                return CaseTree::Branch {
                    condition: pivot_coeff,
                    zero: Box::new(run(zero_side, budget)),
                    nonzero: Box::new(nonzero_tree),
                };
            }
            Imposed::Unresolved => return CaseTree::Unresolved { equation: f },
        }
    }

    // Column scan.
    while st.col < st.ncols {
        let col = st.col;
        let candidates: Vec<usize> = (0..st.mat.len())
            .filter(|&r| !st.row_used[r] && !st.mat[r][col].is_zero())
            .collect();
        if candidates.is_empty() {
            st.col += 1;
            continue;
        }
        // Parameter-free pivots first: no branching needed.
        let free_pivot = candidates
            .iter()
            .copied()
            .find(|&r| !st.mat[r][col].contains_any(&st.case_params));
        if let Some(r) = free_pivot {
            eliminate(&mut st, r, col);
            continue;
        }
        // All candidates depend on case parameters; branch on the first.
        let r = candidates[0];
        let num = st.mat[r][col].numerator().clone();
        let factors: Vec<MPoly> = factor_condition(&num, &st.case_params)
            .into_iter()
            .filter(|f| !st.diseqs.iter().any(|d| d == f))
            .collect();
        if factors.is_empty() {
            // Every factor is already known nonzero.
            eliminate(&mut st, r, col);
            continue;
        }
        if !budget.take() {
            return CaseTree::Exhausted;
        }
        let g = factors[0].clone();
        let mut zero_side = st.clone();
        zero_side.pending.push(g.clone());
        let mut nonzero_side = st;
        nonzero_side.diseqs.push(g.clone());
        return CaseTree::Branch {
            condition: g,
            zero: Box::new(run(zero_side, budget)),
            nonzero: Box::new(run(nonzero_side, budget)),
        };
    }

    // Leaf: read the kernel off the reduced form.
    let mut kernel = Vec::new();
    let pivot_cols: Vec<usize> = st.pivots.iter().map(|&(_, c)| c).collect();
    for j in 0..st.ncols {
        if pivot_cols.contains(&j) {
            continue;
        }
        let mut v = vec![RatFunc::zero(); st.ncols];
        v[j] = RatFunc::one();
        for &(r, c) in &st.pivots {
            let val = st.mat[r][j]
                .div_ref(&st.mat[r][c])
                .expect("pivot nonzero")
                .neg_ref();
            v[c] = val;
        }
        kernel.push(v);
    }
    CaseTree::Leaf(CaseLeaf {
        substitutions: st.subs,
        equations: st.eqs,
        disequations: st.diseqs,
        kernel,
    })
}

/// Branches over a factor list: either factors[0] = 0, or factors[0] ≠ 0 and
/// the product of the rest vanishes; the remaining product goes back on the
/// queue, which re-factors it.
fn branch_on_factor_list(st: Elim, factors: &[MPoly], budget: &mut Budget) -> CaseTree {
    debug_assert!(factors.len() > 1);
    if !budget.take() {
        return CaseTree::Exhausted;
    }
    let g = factors[0].clone();
    let mut rest_product = MPoly::one();
    for f in &factors[1..] {
        rest_product = rest_product.mul_ref(f);
    }
    let mut zero_side = st.clone();
    zero_side.pending.push(g.clone());
    let mut nonzero_side = st;
    nonzero_side.diseqs.push(g.clone());
    nonzero_side.pending.push(rest_product);
    CaseTree::Branch {
        condition: g,
        zero: Box::new(run(zero_side, budget)),
        nonzero: Box::new(run(nonzero_side, budget)),
    }
}

enum Imposed {
    Done,
    Infeasible,
    /// f = A*q + B with A itself case-parameter-dependent.
    NeedBranch {
        q: Symbol,
        pivot_coeff: MPoly,
        rest: MPoly,
    },
    Unresolved,
}

/// Imposes one (already content-split) equation. Substitutes directly when
/// the equation is linear in some case parameter with a generic coefficient.
fn impose_irreducible(st: &mut Elim, f: &MPoly) -> Imposed {
    let present: Vec<Symbol> = st
        .case_params
        .iter()
        .copied()
        .filter(|&q| f.degree_of(q) > 0)
        .collect();
    if present.is_empty() {
        return if f.is_zero() { Imposed::Done } else { Imposed::Infeasible };
    }
    // Prefer a case parameter in which f is linear with a coefficient that
    // is free of the other case parameters.
    let linear: Vec<Symbol> = present
        .iter()
        .copied()
        .filter(|&q| f.degree_of(q) == 1)
        .collect();
    let direct = linear
        .iter()
        .copied()
        .find(|&q| !f.coeff_of(q, 1).contains_any(&st.case_params));
    let q = match direct {
        Some(q) => q,
        None => match linear.first() {
            Some(&q) => {
                let a = f.coeff_of(q, 1);
                let b = f.coeff_of(q, 0);
                return Imposed::NeedBranch {
                    q,
                    pivot_coeff: a,
                    rest: b,
                };
            }
            None => return Imposed::Unresolved,
        },
    };
    let a = f.coeff_of(q, 1);
    let b = f.coeff_of(q, 0);
    let value = RatFunc::new(b.neg_ref(), a).expect("coefficient nonzero");
    apply_substitution(st, q, value, f.clone())
}

fn apply_substitution(st: &mut Elim, q: Symbol, value: RatFunc, display: MPoly) -> Imposed {
    let mut map = std::collections::HashMap::new();
    map.insert(q, value.clone());
    for row in &mut st.mat {
        for e in row.iter_mut() {
            match e.subst(&map) {
                Ok(v) => *e = v,
                Err(_) => return Imposed::Infeasible,
            }
        }
    }
    // A substitution that kills a recorded disequation contradicts it.
    for d in &st.diseqs {
        let sub = super::ratfunc::subst_poly(d, &map);
        if sub.is_zero() {
            return Imposed::Infeasible;
        }
    }
    for (_, v) in st.subs.iter_mut() {
        match v.subst(&map) {
            Ok(nv) => *v = nv,
            Err(_) => return Imposed::Infeasible,
        }
    }
    let mut pending = std::mem::take(&mut st.pending);
    for p in &mut pending {
        let sub = super::ratfunc::subst_poly(p, &map);
        *p = sub.numerator().clone();
    }
    st.pending = pending;
    st.subs.push((q, value));
    st.eqs.push(display);
    Imposed::Done
}

fn eliminate(st: &mut Elim, r: usize, col: usize) {
    let pivot = st.mat[r][col].clone();
    for rr in 0..st.mat.len() {
        if rr == r || st.mat[rr][col].is_zero() {
            continue;
        }
        let factor = st.mat[rr][col].div_ref(&pivot).expect("pivot nonzero");
        for j in 0..st.ncols {
            let delta = factor.mul_ref(&st.mat[r][j]);
            st.mat[rr][j] = st.mat[rr][j].sub_ref(&delta);
        }
    }
    st.row_used[r] = true;
    st.pivots.push((r, col));
    st.col = col + 1;
}

/// Splits a condition polynomial into factors whose simultaneous
/// non-vanishing is equivalent to the polynomial's. Content/primitive-part
/// splits are applied in every case parameter; fully rational univariate
/// pieces are factored over ℚ. Multiplicities are dropped (irrelevant for
/// zero conditions).
fn factor_condition(p: &MPoly, case_params: &[Symbol]) -> Vec<MPoly> {
    let mut out: Vec<MPoly> = Vec::new();
    let mut stack = vec![p.primitive_part()];
    'outer: while let Some(f) = stack.pop() {
        if f.as_constant().is_some() || !f.contains_any(case_params) {
            // Generic in the case parameters: never zero, contributes nothing.
            continue;
        }
        // Content/primitive-part split in each case parameter present.
        for &q in case_params {
            if f.degree_of(q) == 0 {
                continue;
            }
            let mut content = MPoly::zero();
            for k in 0..=f.degree_of(q) {
                let c = f.coeff_of(q, k);
                if !c.is_zero() {
                    content = MPoly::gcd(&content, &c);
                }
            }
            if content.as_constant().is_none() {
                let pp = f.div_exact(&content).expect("content divides");
                stack.push(content);
                stack.push(pp);
                continue 'outer;
            }
        }
        // Univariate over ℚ in a single case parameter: full factorization.
        let present: Vec<Symbol> = case_params
            .iter()
            .copied()
            .filter(|&q| f.degree_of(q) > 0)
            .collect();
        if present.len() == 1 {
            let q = present[0];
            let uni = UniPoly::from_mpoly(&f, q);
            if uni.is_rational() && uni.degree().map_or(false, |d| d >= 2) {
                let mut squarefree = UniPoly::one(q);
                for (sf, _) in uni.squarefree_decomposition() {
                    squarefree = squarefree.mul(&sf);
                }
                for qf in factor_rational_poly(&squarefree) {
                    let mp = unipoly_to_mpoly(&qf.poly);
                    push_unique(&mut out, mp.primitive_part());
                }
                continue;
            }
        }
        push_unique(&mut out, f.primitive_part());
    }
    out
}

fn unipoly_to_mpoly(p: &UniPoly) -> MPoly {
    let mut acc = MPoly::zero();
    for (k, c) in p.coeffs().iter().enumerate() {
        let c_poly = c.as_poly().expect("condition coefficients are polynomial");
        acc = acc.add_ref(&c_poly.mul_ref(&MPoly::var(p.var).pow(k as u32)));
    }
    acc
}

fn push_unique(out: &mut Vec<MPoly>, f: MPoly) {
    if !out.iter().any(|g| g == &f) {
        out.push(f);
    }
}

/// Plain exact kernel over the coefficient field, no case parameters.
pub fn plain_kernel(matrix: &[Vec<RatFunc>]) -> Vec<Vec<RatFunc>> {
    if matrix.is_empty() || matrix[0].is_empty() {
        return Vec::new();
    }
    let ncols = matrix[0].len();
    let mut mat = matrix.to_vec();
    let mut row_used = vec![false; mat.len()];
    let mut pivots = Vec::new();
    for col in 0..ncols {
        let Some(r) = (0..mat.len()).find(|&r| !row_used[r] && !mat[r][col].is_zero()) else {
            continue;
        };
        let pivot = mat[r][col].clone();
        for rr in 0..mat.len() {
            if rr == r || mat[rr][col].is_zero() {
                continue;
            }
            let factor = mat[rr][col].div_ref(&pivot).expect("pivot nonzero");
            for j in 0..ncols {
                let delta = factor.mul_ref(&mat[r][j]);
                mat[rr][j] = mat[rr][j].sub_ref(&delta);
            }
        }
        row_used[r] = true;
        pivots.push((r, col));
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut kernel = Vec::new();
    for j in 0..ncols {
        if pivot_cols.contains(&j) {
            continue;
        }
        let mut v = vec![RatFunc::zero(); ncols];
        v[j] = RatFunc::one();
        for &(r, c) in &pivots {
            v[c] = mat[r][j].div_ref(&mat[r][c]).expect("pivot nonzero").neg_ref();
        }
        kernel.push(v);
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{Context, SymbolRole};

    #[test]
    fn q_matrix_three_leaves() {
        let ctx = Context::new();
        let q = ctx.declare("q", SymbolRole::Parameter);
        let qv = RatFunc::var(q);
        let one = RatFunc::one();
        let m = vec![vec![qv.clone(), one.clone()], vec![one.clone(), qv.clone()]];
        let tree = parametric_kernel(&m, &[q], KernelOptions::default()).unwrap();
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 3);

        let mut trivial = 0;
        let mut seen_values = Vec::new();
        for leaf in &leaves {
            if leaf.kernel.is_empty() {
                trivial += 1;
                continue;
            }
            assert_eq!(leaf.kernel.len(), 1);
            assert_eq!(leaf.substitutions.len(), 1);
            let (sym, val) = &leaf.substitutions[0];
            assert_eq!(*sym, q);
            let v = val.as_rational().unwrap();
            // Kernel vector must be proportional to (1, -q).
            let k = &leaf.kernel[0];
            let ratio = k[1].div_ref(&k[0]).unwrap().as_rational().unwrap();
            assert_eq!(ratio, -v.clone());
            seen_values.push(v);
        }
        assert_eq!(trivial, 1);
        seen_values.sort();
        assert_eq!(
            seen_values,
            vec![
                num_rational::BigRational::from_integer((-1).into()),
                num_rational::BigRational::from_integer(1.into())
            ]
        );
    }

    #[test]
    fn identity_single_leaf() {
        let mut m = vec![vec![RatFunc::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = RatFunc::one();
        }
        let tree = parametric_kernel(&m, &[], KernelOptions::default()).unwrap();
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 1);
        assert!(leaves[0].kernel.is_empty());
        assert!(!tree.has_exhausted());
    }

    #[test]
    fn plain_kernel_simple() {
        // x + y = 0 has kernel spanned by (1, -1) ~ (-1, 1).
        let m = vec![vec![RatFunc::one(), RatFunc::one()]];
        let k = plain_kernel(&m);
        assert_eq!(k.len(), 1);
        let ratio = k[0][0].div_ref(&k[0][1]).unwrap().as_rational().unwrap();
        assert_eq!(ratio, num_rational::BigRational::from_integer((-1).into()));
    }

    #[test]
    fn affine_check_rejects_quadratic() {
        let ctx = Context::new();
        let q = ctx.declare("q", SymbolRole::Parameter);
        let m = vec![vec![RatFunc::var(q).mul_ref(&RatFunc::var(q))]];
        let err = parametric_kernel(&m, &[q], KernelOptions::default()).unwrap_err();
        assert_eq!(err, KernelError::NotAffine(0, 0));
    }
}
