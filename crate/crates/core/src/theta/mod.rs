//! Weighted Lovász theta function and theta-body membership.
//!
//! `ϑ(G, w) = max ⟨C, X⟩` with `C_ij = √(w_i w_j)`, `tr X = 1`, `X_ij = 0`
//! on edges of `G`, `X ⪰ 0`. A vector `p` lies in `TH(G)` iff
//! `ϑ(Ḡ, p) ≤ 1`; floating-point results inside a band of `10·tol` around 1
//! are reported as BOUNDARY rather than forced to a side.

mod sdp;

pub use sdp::{
    solve_sdp, SdpConstraint, SdpOptions, SdpProblem, SdpSolution, DEFAULT_MAX_DIMENSION, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::assignments::{validate_unit_box, ProbabilityAssignment};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Graph};
use crate::scalar::ScalarQ2;

/// Writes `x` with 17 significant digits as a JSON number.
pub fn float17(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaResult {
    pub value: f64,
    pub dual_value: f64,
    /// `|value − dual_value|`.
    pub gap: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Optimal primal matrix on all vertices (zero rows for zero weights).
    pub x: DMatrix<f64>,
}

impl ThetaResult {
    fn zero(n: usize) -> Self {
        ThetaResult {
            value: 0.0,
            dual_value: 0.0,
            gap: 0.0,
            relative_gap: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
            x: DMatrix::zeros(n, n),
        }
    }

    pub fn report_json(&self) -> Value {
        json!({
            "value": float17(self.value),
            "dual": float17(self.dual_value),
            "gap": float17(self.gap),
            "iterations": self.iterations,
        })
    }
}

/// The theta program for `g` restricted to vertices of positive weight.
pub fn theta_problem(g: &Graph, w: &[f64]) -> Result<(SdpProblem, Vec<usize>)> {
    if w.len() != g.n() {
        return Err(Error::InvalidArgument(format!("{} weights for {} vertices", w.len(), g.n())));
    }
    if let Some(v) = w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("weight at vertex {v} must be finite and nonnegative")));
    }
    let support: Vec<usize> = (0..g.n()).filter(|&v| w[v] > 0.0).collect();
    let (sub, _) = induced_subgraph(g, &support)?;
    let k = support.len();
    let sq: Vec<f64> = support.iter().map(|&v| w[v].sqrt()).collect();
    let c = DMatrix::from_fn(k, k, |i, j| sq[i] * sq[j]);
    let mut cons = vec![SdpConstraint::unit_trace(k)];
    cons.extend(sub.edges().map(|(i, j)| SdpConstraint::zero_entry(i, j)));
    Ok((SdpProblem::new(c, cons)?, support))
}

/// `ϑ(g, w)` with the default options.
pub fn lovasz_theta(g: &Graph, w: &[f64]) -> Result<ThetaResult> {
    lovasz_theta_with(g, w, &SdpOptions::default())
}

pub fn lovasz_theta_with(g: &Graph, w: &[f64], opts: &SdpOptions) -> Result<ThetaResult> {
    let (problem, support) = theta_problem(g, w)?;
    let n = g.n();
    if support.is_empty() {
        return Ok(ThetaResult::zero(n));
    }
    let s = solve_sdp(&problem, opts)?;
    let mut x = DMatrix::zeros(n, n);
    for (a, &u) in support.iter().enumerate() {
        for (b, &v) in support.iter().enumerate() {
            x[(u, v)] = s.x[(a, b)];
        }
    }
    Ok(ThetaResult {
        value: s.primal_value,
        dual_value: s.dual_value,
        gap: (s.primal_value - s.dual_value).abs(),
        relative_gap: s.relative_gap,
        primal_residual: s.primal_residual,
        dual_residual: s.dual_residual,
        iterations: s.iterations,
        x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ThStatus {
    In,
    Out,
    Boundary,
}

impl ThStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ThStatus::In => "IN",
            ThStatus::Out => "OUT",
            ThStatus::Boundary => "BOUNDARY",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub status: ThStatus,
    pub theta_of_complement: f64,
    /// `1 − ϑ(Ḡ, p)`: positive inside, negative outside.
    pub margin: f64,
    pub band: f64,
    pub tol: f64,
    pub theta: ThetaResult,
}

impl MembershipVerdict {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "verdict": self.status.as_str(),
            "theta_of_complement": float17(self.theta_of_complement),
            "margin": float17(self.margin),
            "band": float17(self.band),
            "tolerance": float17(self.tol),
            "solver": self.theta.report_json(),
        });
        if self.status == ThStatus::Boundary {
            v["note"] = json!("value within the numerical band around 1; membership undecided at this tolerance");
        }
        v
    }
}

pub fn band_for(tol: f64) -> f64 {
    10.0 * tol
}

pub fn classify(theta: f64, band: f64) -> ThStatus {
    if theta <= 1.0 - band {
        ThStatus::In
    } else if theta >= 1.0 + band {
        ThStatus::Out
    } else {
        ThStatus::Boundary
    }
}

pub fn in_th(pa: &ProbabilityAssignment) -> Result<MembershipVerdict> {
    in_th_with(pa, &SdpOptions::default())
}

pub fn in_th_with(pa: &ProbabilityAssignment, opts: &SdpOptions) -> Result<MembershipVerdict> {
    in_th_floats(pa.graph(), &pa.to_f64(), opts)
}

/// Membership of a floating-point vector in `TH(g)`.
pub fn in_th_floats(g: &Graph, p: &[f64], opts: &SdpOptions) -> Result<MembershipVerdict> {
    let theta = lovasz_theta_with(&g.complement(), p, opts)?;
    let band = band_for(opts.tol);
    Ok(MembershipVerdict {
        status: classify(theta.value, band),
        theta_of_complement: theta.value,
        margin: 1.0 - theta.value,
        band,
        tol: opts.tol,
        theta,
    })
}

/// A point of `TH(Ḡ)` whose inner product with `p` exceeds 1, proving
/// `p ∉ TH(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub q: Vec<f64>,
    /// `Σ p_i q_i`, verified above 1.
    pub inner_product: f64,
    /// Membership of `q` in `TH(Ḡ)`, verified IN.
    pub q_membership: MembershipVerdict,
    /// Gram vectors (rows) and handle realizing `q` before rescaling.
    pub certificate: QuantumCertificate,
    pub scale: f64,
}

impl Witness {
    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q.iter().map(|&x| float17(x)).collect::<Vec<_>>(),
            "inner_product": float17(self.inner_product),
            "scale": float17(self.scale),
            "q_membership": self.q_membership.to_json(),
            "certificate": self.certificate.to_json(),
        })
    }
}

pub fn extract_witness(pa: &ProbabilityAssignment) -> Result<Witness> {
    extract_witness_with(pa, &SdpOptions::default())
}

/// Gram factorization of the optimal `X` for `ϑ(Ḡ, p)`. With `X = VᵀV`
/// (columns `v_i`) and `c = Σ √p_i v_i / ‖·‖`, the overlaps
/// `q_i = ⟨c, v_i/‖v_i‖⟩²` lie in `TH(Ḡ)` and `Σ p_i q_i ≥ ϑ(Ḡ, p)`.
/// Since such `q` sits on the boundary of `TH(Ḡ)`, it is shrunk by
/// `(1 − 2·band)/ϑ(G, q)` so its own membership test is decisive. Both
/// properties are re-checked before returning; OUT points within about
/// `2·band` of the boundary can therefore fail with an extraction error.
pub fn extract_witness_with(pa: &ProbabilityAssignment, opts: &SdpOptions) -> Result<Witness> {
    let g = pa.graph();
    let p = pa.to_f64();
    let verdict = in_th_floats(g, &p, opts)?;
    if verdict.status != ThStatus::Out {
        return Err(Error::Precondition(format!(
            "witness requested but membership is {} (theta of complement {})",
            verdict.status.as_str(),
            verdict.theta_of_complement
        )));
    }
    let band = verdict.band;
    let n = g.n();
    let x = sym(&verdict.theta.x);
    let eig = x.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.max().max(0.0);
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 1e-12 * lmax.max(1e-300)).collect();
    let d = keep.len().max(1);
    // Row i of `vecs` is v_i.
    let vecs = DMatrix::from_fn(n, d, |i, a| match keep.get(a) {
        Some(&k) => eig.eigenvalues[k].sqrt() * eig.eigenvectors[(i, k)],
        None => 0.0,
    });
    let mut handle = DVector::zeros(d);
    for i in 0..n {
        handle += vecs.row(i).transpose() * p[i].sqrt();
    }
    let hn = handle.norm();
    if hn <= 0.0 || !hn.is_finite() {
        return Err(Error::Extraction("degenerate handle vector".into()));
    }
    handle /= hn;
    let mut units = Vec::with_capacity(n);
    let mut q = vec![0.0; n];
    for i in 0..n {
        let v = vecs.row(i).transpose();
        let nv = v.norm();
        if nv > 1e-9 {
            let u = v / nv;
            q[i] = handle.dot(&u).powi(2);
            units.push(u.iter().copied().collect::<Vec<f64>>());
        } else {
            // Zero-weight vertex: q_i = 0.
            units.push(orthogonal_unit(&handle));
        }
    }
    let certificate = QuantumCertificate {
        dimension: d,
        psi: handle.iter().copied().collect(),
        vectors: units,
    };

    let gc = g.complement();
    let raw = in_th_floats(&gc, &q, opts)?;
    if !(raw.theta_of_complement > 0.0) {
        return Err(Error::Extraction("witness has zero theta".into()));
    }
    let scale = (1.0 - 2.0 * band) / raw.theta_of_complement;
    let q: Vec<f64> = q.iter().map(|v| v * scale).collect();
    let q_membership = in_th_floats(&gc, &q, opts)?;
    let inner_product: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
    if q_membership.status != ThStatus::In {
        return Err(Error::Extraction(format!(
            "witness membership is {} (theta {})",
            q_membership.status.as_str(),
            q_membership.theta_of_complement
        )));
    }
    if inner_product <= 1.0 {
        return Err(Error::Extraction(format!("witness inner product {inner_product} does not exceed 1")));
    }
    Ok(Witness { q, inner_product, q_membership, certificate, scale })
}

fn orthogonal_unit(h: &DVector<f64>) -> Vec<f64> {
    let d = h.len();
    let mut best = DVector::zeros(d);
    for k in 0..d {
        let mut e = DVector::zeros(d);
        e[k] = 1.0;
        let r = &e - h * h.dot(&e);
        if r.norm() > best.norm() {
            best = r;
        }
    }
    let nb = best.norm();
    if nb > 0.0 {
        best /= nb;
    }
    best.iter().copied().collect()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Unit handle `ψ` and unit vectors `v_i` in `ℝ^d` with `v_i ⊥ v_j` on
/// edges; realizes `p_i = ⟨v_i, ψ⟩²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCertificate {
    pub dimension: usize,
    pub psi: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl QuantumCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "dimension": self.dimension,
            "psi": self.psi.iter().map(|&x| float17(x)).collect::<Vec<_>>(),
            "vectors": self.vectors.iter().map(|v| v.iter().map(|&x| float17(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub passed: bool,
    pub violations: Vec<String>,
}

/// Checks `‖ψ‖ = 1`, `‖v_i‖ = 1`, orthogonality on edges and
/// `⟨v_i, ψ⟩² = p_i`, each to `tol`, listing every failure.
pub fn verify_quantum_certificate(g: &Graph, p: &[f64], cert: &QuantumCertificate, tol: f64) -> Result<CertificateReport> {
    let d = cert.dimension;
    if p.len() != g.n() || cert.vectors.len() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "graph has {} vertices, assignment {}, certificate {}",
            g.n(),
            p.len(),
            cert.vectors.len()
        )));
    }
    if cert.psi.len() != d || cert.vectors.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidArgument(format!("vectors must have dimension {d}")));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut bad = Vec::new();
    let np = dot(&cert.psi, &cert.psi).sqrt();
    if (np - 1.0).abs() > tol {
        bad.push(format!("|psi| = {np}"));
    }
    for (i, v) in cert.vectors.iter().enumerate() {
        let nv = dot(v, v).sqrt();
        if (nv - 1.0).abs() > tol {
            bad.push(format!("|v_{i}| = {nv}"));
        }
        let o = dot(v, &cert.psi).powi(2);
        if (o - p[i]).abs() > tol {
            bad.push(format!("<v_{i}, psi>^2 = {o}, expected {}", p[i]));
        }
    }
    for (i, j) in g.edges() {
        let o = dot(&cert.vectors[i], &cert.vectors[j]);
        if o.abs() > tol {
            bad.push(format!("<v_{i}, v_{j}> = {o} on an edge"));
        }
    }
    Ok(CertificateReport { passed: bad.is_empty(), violations: bad })
}

/// Assignment whose entries are the exact values of the given floats.
pub fn assignment_from_floats(g: &Graph, p: &[f64]) -> Result<ProbabilityAssignment> {
    let v = p.iter().map(|&x| ScalarQ2::from_f64(x)).collect::<Result<Vec<_>>>()?;
    validate_unit_box(g, v)
}
