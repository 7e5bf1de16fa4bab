//! Exact linear programming over an ordered field (dense tableau simplex,
//! Bland's rule), and convex-hull membership of a point among 0/1 vertices
//! with either a convex decomposition or a separating inequality.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::ScalarQ2;

pub trait OrderedField:
    Clone
    + Debug
    + Ord
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl OrderedField for BigRational {}
impl OrderedField for ScalarQ2 {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome<F> {
    Optimal { x: Vec<F>, value: F },
    Unbounded,
}

/// Rows `[coefficients..., rhs]`; `obj` holds reduced costs and, in the last
/// slot, minus the current objective value.
struct Tableau<F> {
    rows: Vec<Vec<F>>,
    obj: Vec<F>,
    basis: Vec<usize>,
    width: usize,
}

impl<F: OrderedField> Tableau<F> {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (x, p) in self.obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes until optimal (`true`) or unbounded (`false`). Columns at
    /// or beyond `allowed` never enter.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j] > F::zero()) else {
                return true;
            };
            let rhs = self.width;
            let mut best: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > F::zero() {
                    let ratio = row[rhs].clone() / row[c].clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn solution(&self, nvars: usize) -> Vec<F> {
        let mut x = vec![F::zero(); nvars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < nvars {
                x[b] = self.rows[i][self.width].clone();
            }
        }
        x
    }
}

/// Maximize `cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, with `b ≥ 0` so the slack
/// basis is feasible.
pub fn maximize_le<F: OrderedField>(a: &[Vec<F>], b: &[F], c: &[F]) -> LpOutcome<F> {
    let m = a.len();
    let n = c.len();
    assert!(b.iter().all(|x| *x >= F::zero()), "maximize_le needs b >= 0");
    let width = n + m;
    let rows = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| {
            let mut r = row.clone();
            r.resize(width + 1, F::zero());
            r[n + i] = F::one();
            r[width] = bi.clone();
            r
        })
        .collect();
    let mut obj = c.to_vec();
    obj.resize(width + 1, F::zero());
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), width };
    if !t.run(width) {
        return LpOutcome::Unbounded;
    }
    let x = t.solution(n);
    let value = x.iter().zip(c).fold(F::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
    LpOutcome::Optimal { x, value }
}

/// Some `x ≥ 0` with `Ax = b`, or `None` when the system is infeasible.
pub fn feasible_point<F: OrderedField>(a: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    let mut obj = vec![F::zero(); width + 1];
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = *bi < F::zero();
        let mut r: Vec<F> = row.iter().map(|x| if flip { -x.clone() } else { x.clone() }).collect();
        r.resize(width + 1, F::zero());
        r[n + i] = F::one();
        r[width] = if flip { -bi.clone() } else { bi.clone() };
        // Phase-I objective max −Σ artificials, priced out against the start basis.
        for j in 0..n {
            obj[j] = obj[j].clone() + r[j].clone();
        }
        obj[width] = obj[width].clone() + r[width].clone();
        rows.push(r);
    }
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), width };
    t.run(n);
    if !t.obj[width].is_zero() {
        return None;
    }
    Some(t.solution(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separator<F> {
    /// Coefficient per coordinate.
    pub coefficients: Vec<F>,
    /// `coefficientsᵀ s ≤ bound` for every vertex `s`.
    pub bound: F,
    /// `coefficientsᵀ p`, strictly above `bound`.
    pub value: F,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullVerdict<F> {
    /// `(vertex index, coefficient)` with positive coefficients summing to 1.
    Inside(Vec<(usize, F)>),
    Outside(Separator<F>),
}

fn dot01<F: OrderedField>(c: &[F], s: &FixedBitSet) -> F {
    s.ones().fold(F::zero(), |acc, i| acc + c[i].clone())
}

/// Decides whether `p` lies in the convex hull of the 0/1 vectors `vertices`
/// (each given by its support, over `p.len()` coordinates).
///
/// Inside: a decomposition from phase-I simplex. Outside: a separating
/// inequality maximizing the violation `cᵀp − d` over coefficient boxes
/// `[0,1]` (then `[−1,1]` if the first box cannot separate), found by
/// constraint generation over the vertex list. Both are verified exactly.
pub fn hull_membership<F: OrderedField>(vertices: &[FixedBitSet], p: &[F]) -> HullVerdict<F> {
    let n = p.len();
    let nv = vertices.len();
    let mut a = vec![vec![F::zero(); nv]; n + 1];
    for (j, s) in vertices.iter().enumerate() {
        for i in s.ones() {
            a[i][j] = F::one();
        }
        a[n][j] = F::one();
    }
    let mut b = p.to_vec();
    b.push(F::one());
    if let Some(x) = feasible_point(&a, &b) {
        let terms: Vec<(usize, F)> = x.into_iter().enumerate().filter(|(_, v)| *v > F::zero()).collect();
        debug_assert!(check_decomposition(vertices, p, &terms));
        return HullVerdict::Inside(terms);
    }
    for lo in [F::zero(), -F::one()] {
        if let Some(sep) = separate(vertices, p, lo) {
            return HullVerdict::Outside(sep);
        }
    }
    unreachable!("phase I reported infeasible but no separating inequality exists")
}

/// Exact check that the terms form a convex combination equal to `p`.
pub fn check_decomposition<F: OrderedField>(vertices: &[FixedBitSet], p: &[F], terms: &[(usize, F)]) -> bool {
    let mut sum = F::zero();
    let mut acc = vec![F::zero(); p.len()];
    for (j, c) in terms {
        if *c <= F::zero() || *j >= vertices.len() {
            return false;
        }
        sum = sum + c.clone();
        for i in vertices[*j].ones() {
            acc[i] = acc[i].clone() + c.clone();
        }
    }
    sum == F::one() && acc.iter().zip(p).all(|(x, y)| x == y)
}

/// Exact check that the separator holds on every vertex and is violated by `p`.
pub fn check_separator<F: OrderedField>(vertices: &[FixedBitSet], p: &[F], sep: &Separator<F>) -> bool {
    let value = sep.coefficients.iter().zip(p).fold(F::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
    value == sep.value && value > sep.bound && vertices.iter().all(|s| dot01(&sep.coefficients, s) <= sep.bound)
}

fn separate<F: OrderedField>(vertices: &[FixedBitSet], p: &[F], lo: F) -> Option<Separator<F>> {
    let n = p.len();
    let width = F::one() - lo.clone();
    // Variables: c' = c − lo ∈ [0, 1 − lo] (n), d⁺, d⁻ with d = d⁺ − d⁻.
    let objective: Vec<F> = p.iter().cloned().chain([-F::one(), F::one()]).collect();
    let mut working: Vec<usize> = if vertices.is_empty() { vec![] } else { vec![0] };
    loop {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &j in &working {
            // c'ᵀs − d⁺ + d⁻ ≤ −lo·|s|
            let mut r = vec![F::zero(); n + 2];
            for i in vertices[j].ones() {
                r[i] = F::one();
            }
            r[n] = -F::one();
            r[n + 1] = F::one();
            rows.push(r);
            rhs.push(-(lo.clone() * F::from_count(vertices[j].count_ones(..))));
        }
        for i in 0..n {
            let mut r = vec![F::zero(); n + 2];
            r[i] = F::one();
            rows.push(r);
            rhs.push(width.clone());
        }
        let LpOutcome::Optimal { x, .. } = maximize_le(&rows, &rhs, &objective) else {
            // Only possible with no vertices at all; then any p is outside.
            let coefficients = vec![F::zero(); n];
            return Some(Separator { coefficients, bound: -F::one(), value: F::zero() });
        };
        let coefficients: Vec<F> = x[..n].iter().map(|c| c.clone() + lo.clone()).collect();
        let d = x[n].clone() - x[n + 1].clone();
        let (worst, worst_val) = vertices
            .iter()
            .enumerate()
            .map(|(j, s)| (j, dot01(&coefficients, s)))
            .fold(None::<(usize, F)>, |acc, (j, v)| match acc {
                Some((_, ref bv)) if *bv >= v => acc,
                _ => Some((j, v)),
            })
            .unwrap();
        if worst_val > d {
            debug_assert!(!working.contains(&worst));
            working.push(worst);
            continue;
        }
        let value = coefficients.iter().zip(p).fold(F::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
        if value > worst_val {
            // The bound is the true maximum over vertices, which may sit below d.
            let sep = Separator { coefficients, bound: worst_val, value };
            debug_assert!(check_separator(vertices, p, &sep));
            return Some(sep);
        }
        return None;
    }
}

trait FromCount {
    fn from_count(k: usize) -> Self;
}

impl<F: OrderedField> FromCount for F {
    fn from_count(k: usize) -> Self {
        (0..k).fold(F::zero(), |acc, _| acc + F::one())
    }
}
