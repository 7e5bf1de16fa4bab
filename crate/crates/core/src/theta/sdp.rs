//! Dense primal-dual interior-point solver for
//!
//! ```text
//!   maximize ⟨C, X⟩  s.t.  ⟨A_k, X⟩ = b_k,  X ⪰ 0
//!   minimize bᵀy     s.t.  Z = Σ y_k A_k − C ⪰ 0
//! ```
//!
//! HKM search direction with a Mehrotra predictor-corrector step, started
//! from scaled identities (infeasible start). Constraint matrices are sparse
//! symmetric; everything else is dense.

use nalgebra::{DMatrix, DVector};

use crate::error::{resource_limit, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_MAX_DIMENSION: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_dimension: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, max_dimension: DEFAULT_MAX_DIMENSION }
    }
}

/// Symmetric matrix given by its upper-triangle entries `(i, j, v)`, `i ≤ j`,
/// together with the right-hand side of `⟨A, X⟩ = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpConstraint {
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: f64,
}

impl SdpConstraint {
    pub fn unit_trace(n: usize) -> Self {
        SdpConstraint { entries: (0..n).map(|i| (i, i, 1.0)).collect(), rhs: 1.0 }
    }

    /// `X_ij = 0`.
    pub fn zero_entry(i: usize, j: usize) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let v = if i == j { 1.0 } else { 0.5 };
        SdpConstraint { entries: vec![(i, j, v)], rhs: 0.0 }
    }

    fn expanded(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    dim: usize,
    objective: DMatrix<f64>,
    constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    /// Checks symmetry of the objective, index ranges, and that one
    /// constraint is the unit trace.
    pub fn new(objective: DMatrix<f64>, constraints: Vec<SdpConstraint>) -> Result<Self> {
        let dim = objective.nrows();
        if objective.ncols() != dim {
            return Err(Error::InvalidArgument("objective must be square".into()));
        }
        let scale = objective.amax().max(1.0);
        if (&objective - objective.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("objective must be symmetric".into()));
        }
        for c in &constraints {
            if let Some(&(i, j, _)) = c.entries.iter().find(|&&(i, j, _)| i > j || j >= dim) {
                return Err(Error::InvalidArgument(format!("constraint entry ({i},{j}) invalid for dimension {dim}")));
            }
        }
        let trace = SdpConstraint::unit_trace(dim);
        if !constraints.contains(&trace) {
            return Err(Error::InvalidArgument("constraints must include the unit trace".into()));
        }
        Ok(SdpProblem { dim, objective, constraints })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &DMatrix<f64> {
        &self.objective
    }

    pub fn constraints(&self) -> &[SdpConstraint] {
        &self.constraints
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub z: DMatrix<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal − dual| / (1 + |primal| + |dual|)`.
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

struct Ops {
    expanded: Vec<Vec<(usize, usize, f64)>>,
    b: DVector<f64>,
}

impl Ops {
    /// `A(Y)_k = ⟨A_k, Y⟩`.
    fn apply(&self, y: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.expanded.len(),
            self.expanded.iter().map(|e| e.iter().map(|&(i, j, v)| v * y[(i, j)]).sum::<f64>()),
        )
    }

    /// `Aᵀ(y) = Σ y_k A_k`.
    fn adjoint(&self, y: &DVector<f64>, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for (k, e) in self.expanded.iter().enumerate() {
            for &(i, j, v) in e {
                m[(i, j)] += y[k] * v;
            }
        }
        m
    }

    /// Schur complement `M_kl = tr(A_k X A_l Z⁻¹)`.
    fn schur(&self, x: &DMatrix<f64>, zi: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.expanded.len();
        let mut out = DMatrix::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let mut s = 0.0;
                for &(p, q, u) in &self.expanded[k] {
                    for &(r, t, w) in &self.expanded[l] {
                        s += u * w * x[(q, r)] * zi[(t, p)];
                    }
                }
                out[(k, l)] = s;
                out[(l, k)] = s;
            }
        }
        out
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Largest `α` (capped at `cap`) keeping `M + α D` positive semidefinite,
/// or `None` when `M` is not positive definite.
fn max_step(m: &DMatrix<f64>, d: &DMatrix<f64>, cap: f64) -> Option<f64> {
    let l = m.clone().cholesky()?.l();
    let li = l.solve_lower_triangular(&DMatrix::identity(m.nrows(), m.nrows()))?;
    let s = sym(&(&li * d * li.transpose()));
    let lmin = s.symmetric_eigenvalues().min();
    Some(if lmin >= 0.0 { cap } else { (-1.0 / lmin).min(cap) })
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
}

/// Solves the SDP to relative gap and infeasibilities at most `opts.tol`.
///
/// Iterations continue past `tol` while they keep improving (the accepted
/// point is the best one seen), which buys slack inside membership bands.
pub fn solve_sdp(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let n = problem.dim;
    if n > opts.max_dimension {
        return Err(resource_limit("SDP dimension", n as u128, opts.max_dimension));
    }
    let ops = Ops {
        expanded: problem.constraints.iter().map(SdpConstraint::expanded).collect(),
        b: DVector::from_iterator(problem.constraints.len(), problem.constraints.iter().map(|c| c.rhs)),
    };
    let c = &problem.objective;
    let m = ops.b.len();
    let norm_b = ops.b.norm();
    let norm_c = c.norm();
    let norm_a: Vec<f64> = ops.expanded.iter().map(|e| e.iter().map(|t| t.2 * t.2).sum::<f64>().sqrt()).collect();

    let nf = n as f64;
    let mut xi = 10f64.max(nf.sqrt());
    for (k, na) in norm_a.iter().enumerate() {
        xi = xi.max(nf * (1.0 + ops.b[k].abs()) / (1.0 + na));
    }
    let eta = norm_a.iter().fold(10f64.max(nf.sqrt()).max(norm_c), |acc, &v| acc.max(v));
    let mut x = DMatrix::identity(n, n) * xi;
    let mut z = DMatrix::identity(n, n) * eta;
    let mut y = DVector::zeros(m);

    let target = opts.tol * 1e-3;
    let mut best: Option<(f64, SdpSolution)> = None;
    let mut last = (f64::NAN, f64::NAN, f64::NAN);

    for iter in 0..=opts.max_iter {
        let pobj = inner(c, &x);
        let dobj = ops.b.dot(&y);
        let rp = &ops.b - ops.apply(&x);
        let rd = c + &z - ops.adjoint(&y, n);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + norm_b);
        let dinf = rd.norm() / (1.0 + norm_c);
        last = (relgap, pinf, dinf);
        let merit = relgap.max(pinf).max(dinf);
        if merit <= opts.tol && best.as_ref().is_none_or(|(bm, _)| merit < *bm) {
            let sol = SdpSolution {
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                primal_value: pobj,
                dual_value: dobj,
                relative_gap: relgap,
                primal_residual: pinf,
                dual_residual: dinf,
                iterations: iter,
            };
            best = Some((merit, sol));
        }
        if merit <= target || iter == opts.max_iter {
            break;
        }
        if best.as_ref().is_some_and(|(bm, _)| merit > 10.0 * bm) {
            // Past the useful accuracy; further steps are degrading.
            break;
        }

        let Some(step) = newton_step(&ops, &x, &z, &rp, &rd, n) else {
            break;
        };
        let (dir, ap, ad) = step;
        x += &dir.dx * ap;
        x = sym(&x);
        y += &dir.dy * ad;
        z += &dir.dz * ad;
        z = sym(&z);
    }

    match best {
        Some((_, sol)) => Ok(sol),
        None => Err(Error::SolverFailure {
            reason: "no iterate met the tolerance".into(),
            iterations: opts.max_iter,
            gap: last.0,
            primal_residual: last.1,
            dual_residual: last.2,
        }),
    }
}

/// One predictor-corrector step; `None` on numerical breakdown.
fn newton_step(
    ops: &Ops,
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    rp: &DVector<f64>,
    rd: &DMatrix<f64>,
    n: usize,
) -> Option<(Direction, f64, f64)> {
    let zi = sym(&z.clone().cholesky()?.inverse());
    let schur = ops.schur(x, &zi);
    let fact = schur.clone().cholesky();
    let lu = if fact.is_none() { Some(schur.clone().lu()) } else { None };
    let solve = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
        match (&fact, &lu) {
            (Some(f), _) => Some(f.solve(rhs)),
            (None, Some(l)) => l.solve(rhs),
            _ => None,
        }
    };
    let x_rd_zi = ops.apply(&(x * rd * &zi));
    let xz = x * z;
    let mu = xz.trace() / n as f64;

    let direction = |rc: &DMatrix<f64>| -> Option<Direction> {
        let rhs = ops.apply(&(rc * &zi)) + &x_rd_zi - rp;
        let dy = solve(&rhs)?;
        let dz = sym(&(ops.adjoint(&dy, n) - rd));
        let dx = sym(&((rc - x * &dz) * &zi));
        if dx.iter().chain(dz.iter()).any(|v| !v.is_finite()) {
            return None;
        }
        Some(Direction { dx, dy, dz })
    };

    let pred = direction(&(-&xz))?;
    let ap = max_step(x, &pred.dx, 1.0)?;
    let ad = max_step(z, &pred.dz, 1.0)?;
    let xn = x + &pred.dx * ap;
    let zn = z + &pred.dz * ad;
    let ratio = (inner(&xn, &zn) / inner(x, z)).clamp(0.0, 1.0);
    let expon = if ap.min(ad) > 0.3_f64.sqrt() { 2.0 } else { 3.0 };
    let sigma = ratio.powf(expon).min(1.0);

    let rc = DMatrix::identity(n, n) * (sigma * mu) - &xz - &pred.dx * &pred.dz;
    let corr = direction(&rc)?;
    let gamma = 0.95;
    let ap = (gamma * max_step(x, &corr.dx, 1.0 / gamma)?).min(1.0);
    let ad = (gamma * max_step(z, &corr.dz, 1.0 / gamma)?).min(1.0);
    Some((corr, ap, ad))
}
