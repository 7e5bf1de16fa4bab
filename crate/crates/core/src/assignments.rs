//! Probability assignments on exclusivity graphs and exact membership in the
//! clique-constrained set (QSTAB) and the stable-set polytope (STAB), plus
//! tensor powers and the n-copy self-inconsistency search.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{resource_limit, Error, Result, Violation};
use crate::graph::{max_weighted_clique, or_power_capped, Clique, Graph};
use crate::lp::{hull_membership, HullVerdict, Separator};
use crate::scalar::ScalarQ2;

pub const DEFAULT_STAB_CAP: usize = 1 << 20;
pub const DEFAULT_COPY_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    In,
    Out,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::In => "IN",
            Verdict::Out => "OUT",
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A vector `p` on the vertices of a graph with `0 ≤ p_i ≤ 1`, and
/// `p_i + p_j ≤ 1` on every edge when built by [`validate_assignment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityAssignment {
    graph: Graph,
    p: Vec<ScalarQ2>,
}

impl ProbabilityAssignment {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn values(&self) -> &[ScalarQ2] {
        &self.p
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.p.iter().map(ScalarQ2::to_f64).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.p).expect("scalars serialize")
    }
}

pub fn validate_assignment(g: &Graph, p: Vec<ScalarQ2>) -> Result<ProbabilityAssignment> {
    check(g, p, true)
}

/// Like [`validate_assignment`] but only enforces `0 ≤ p_i ≤ 1`. Membership
/// tests accept such vectors: an edge with `p_i + p_j > 1` is simply a
/// two-vertex clique certificate against QSTAB (and hence STAB and TH).
pub fn validate_unit_box(g: &Graph, p: Vec<ScalarQ2>) -> Result<ProbabilityAssignment> {
    check(g, p, false)
}

fn check(g: &Graph, p: Vec<ScalarQ2>, edges: bool) -> Result<ProbabilityAssignment> {
    if p.len() != g.n() {
        return Err(Error::InvalidArgument(format!("{} values for {} vertices", p.len(), g.n())));
    }
    let one = ScalarQ2::one();
    let mut bad = Vec::new();
    for (v, x) in p.iter().enumerate() {
        if x.is_negative() {
            bad.push(Violation::Negative { vertex: v });
        } else if *x > one {
            bad.push(Violation::AboveOne { vertex: v });
        }
    }
    let pa = ProbabilityAssignment { graph: g.clone(), p };
    if edges {
        bad.extend(pa.edge_violations());
    }
    if bad.is_empty() {
        Ok(pa)
    } else {
        Err(Error::Validation(bad))
    }
}

impl ProbabilityAssignment {
    /// Edges whose endpoint values sum above 1.
    pub fn edge_violations(&self) -> Vec<Violation> {
        let one = ScalarQ2::one();
        self.graph
            .edges()
            .filter(|&(u, v)| &self.p[u] + &self.p[v] > one)
            .map(|(u, v)| Violation::EdgeSum { u, v })
            .collect()
    }
}

/// Parses a JSON array of scalar encodings.
pub fn parse_assignment_json(text: &str) -> Result<Vec<ScalarQ2>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match v {
        Value::Array(xs) => xs.iter().map(ScalarQ2::from_json).collect(),
        _ => Err(Error::Parse("assignment must be a JSON array".into())),
    }
}

/// Exact maximum-weight clique for `ℚ(√2)` weights. All-rational weights
/// with a small common denominator run on machine integers.
pub fn exact_max_clique(g: &Graph, w: &[ScalarQ2]) -> Result<(Clique, ScalarQ2)> {
    if w.iter().all(ScalarQ2::is_rational) {
        let rats: Vec<BigRational> = w.iter().map(|x| x.rational_part().clone()).collect();
        if let Some((ints, scale)) = scale_to_u128(&rats) {
            let (c, total) = max_weighted_clique(g, &ints)?;
            let weight = BigRational::new(BigInt::from(total), scale);
            return Ok((c, ScalarQ2::from_rational(weight)));
        }
        let (c, total) = max_weighted_clique(g, &rats)?;
        return Ok((c, ScalarQ2::from_rational(total)));
    }
    max_weighted_clique(g, w)
}

/// Integer numerators over the common denominator, when their total fits.
fn scale_to_u128(rats: &[BigRational]) -> Option<(Vec<u128>, BigInt)> {
    let mut l = BigInt::one();
    for r in rats {
        l = l.lcm(r.denom());
    }
    let mut out = Vec::with_capacity(rats.len());
    let mut total: u128 = 0;
    for r in rats {
        let k = (r.numer() * (&l / r.denom())).to_u128()?;
        total = total.checked_add(k)?;
        out.push(k);
    }
    Some((out, l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QstabVerdict {
    pub verdict: Verdict,
    /// A maximal clique of maximum weight (the certificate when OUT).
    pub max_clique: Clique,
    pub max_weight: ScalarQ2,
}

impl QstabVerdict {
    pub fn certificate(&self) -> Option<(&Clique, &ScalarQ2)> {
        (self.verdict == Verdict::Out).then_some((&self.max_clique, &self.max_weight))
    }

    pub fn to_json(&self) -> Value {
        match self.verdict {
            Verdict::Out => json!({
                "verdict": "OUT",
                "clique": self.max_clique,
                "weight": self.max_weight,
            }),
            Verdict::In => json!({
                "verdict": "IN",
                "max_clique_weight": self.max_weight,
            }),
        }
    }
}

/// OUT exactly when some clique has total weight above 1.
pub fn in_qstab(pa: &ProbabilityAssignment) -> Result<QstabVerdict> {
    let (c, w) = exact_max_clique(&pa.graph, &pa.p)?;
    let max_clique = c.extend_to_maximal(&pa.graph);
    debug_assert_eq!(max_clique.weight(&pa.p), w);
    let verdict = if w > ScalarQ2::one() { Verdict::Out } else { Verdict::In };
    Ok(QstabVerdict { verdict, max_clique, max_weight: w })
}

/// Every independent set (including the empty one), in lexicographic order
/// of sorted vertex lists.
pub fn independent_sets(g: &Graph, cap: usize) -> Result<Vec<FixedBitSet>> {
    let n = g.n();
    let mut out = vec![FixedBitSet::with_capacity(n)];
    let mut cur = FixedBitSet::with_capacity(n);
    let mut allowed = FixedBitSet::with_capacity(n);
    allowed.insert_range(..);
    fn go(g: &Graph, cur: &mut FixedBitSet, allowed: &FixedBitSet, out: &mut Vec<FixedBitSet>, cap: usize) -> Result<()> {
        for v in allowed.ones() {
            if out.len() >= cap {
                return Err(resource_limit("independent sets", out.len() as u128 + 1, cap));
            }
            cur.insert(v);
            out.push(cur.clone());
            let mut next = allowed.clone();
            next.set_range(..v + 1, false);
            next.difference_with(g.neighbors(v));
            go(g, cur, &next, out, cap)?;
            cur.set(v, false);
        }
        Ok(())
    }
    go(g, &mut cur, &allowed, &mut out, cap)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum StabVerdict {
    /// Convex decomposition over independent sets.
    In(Vec<(Vec<usize>, ScalarQ2)>),
    /// `Σ c_i p_i ≤ bound` holds on STAB but fails at `p`.
    Out(Separator<ScalarQ2>),
}

impl StabVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            StabVerdict::In(_) => Verdict::In,
            StabVerdict::Out(_) => Verdict::Out,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            StabVerdict::In(terms) => json!({
                "verdict": "IN",
                "decomposition": terms
                    .iter()
                    .map(|(s, c)| json!({"set": s, "coefficient": c}))
                    .collect::<Vec<_>>(),
            }),
            StabVerdict::Out(sep) => json!({
                "verdict": "OUT",
                "inequality": separator_json(sep),
            }),
        }
    }
}

pub(crate) fn separator_json(sep: &Separator<ScalarQ2>) -> Value {
    json!({
        "coefficients": sep.coefficients,
        "bound": sep.bound,
        "value": sep.value,
    })
}

pub fn in_stab(pa: &ProbabilityAssignment) -> Result<StabVerdict> {
    in_stab_capped(pa, DEFAULT_STAB_CAP)
}

pub fn in_stab_capped(pa: &ProbabilityAssignment, cap: usize) -> Result<StabVerdict> {
    let sets = independent_sets(&pa.graph, cap)?;
    Ok(match hull_membership(&sets, &pa.p) {
        HullVerdict::Inside(terms) => StabVerdict::In(
            terms.into_iter().map(|(j, c)| (sets[j].ones().collect(), c)).collect(),
        ),
        HullVerdict::Outside(sep) => StabVerdict::Out(sep),
    })
}

pub fn tensor_power(pa: &ProbabilityAssignment, k: usize) -> Result<ProbabilityAssignment> {
    tensor_power_capped(pa, k, crate::graph::DEFAULT_PRODUCT_CAP)
}

/// Entry at the composite vertex `(i_1, …, i_k)` is `p_{i_1} ⋯ p_{i_k}`,
/// indexed as in [`crate::graph::or_power`].
pub fn tensor_power_capped(pa: &ProbabilityAssignment, k: usize, cap: usize) -> Result<ProbabilityAssignment> {
    let graph = or_power_capped(&pa.graph, k, cap)?;
    let mut p = pa.p.clone();
    for _ in 1..k {
        p = p.iter().flat_map(|a| pa.p.iter().map(move |b| a * b)).collect();
    }
    Ok(ProbabilityAssignment { graph, p })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyRecord {
    pub copies: usize,
    pub vertices: usize,
    pub max_clique: Clique,
    pub max_weight: ScalarQ2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyVerdict {
    /// Largest copy count actually examined.
    pub n_checked: usize,
    pub per_copy: Vec<CopyRecord>,
    /// First copy count whose power graph has a clique of weight above 1.
    pub first_violation: Option<CopyRecord>,
    /// True when the vertex budget, not `n_max`, ended the search.
    pub budget_exhausted: bool,
}

impl CopyVerdict {
    pub fn to_json(&self) -> Value {
        let rec = |r: &CopyRecord| {
            json!({
                "copies": r.copies,
                "vertices": r.vertices,
                "max_clique": r.max_clique,
                "max_weight": r.max_weight,
                "max_weight_approx": r.max_weight.to_f64(),
            })
        };
        json!({
            "n_checked": self.n_checked,
            "per_copy": self.per_copy.iter().map(rec).collect::<Vec<_>>(),
            "first_violation": self.first_violation.as_ref().map(rec),
            "budget_exhausted": self.budget_exhausted,
            "verdict": if self.first_violation.is_some() { "SELF_INCONSISTENT" } else { "CLEAN_UP_TO_N_CHECKED" },
        })
    }
}

pub fn self_inconsistency_check(pa: &ProbabilityAssignment, n_max: usize) -> Result<CopyVerdict> {
    self_inconsistency_check_budget(pa, n_max, DEFAULT_COPY_BUDGET)
}

/// Runs the clique test on `k = 1..=n_max` copies, stopping at the first
/// violation. A clean result is not a proof of self-consistency.
pub fn self_inconsistency_check_budget(pa: &ProbabilityAssignment, n_max: usize, budget: usize) -> Result<CopyVerdict> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("need at least one copy".into()));
    }
    let n = pa.graph.n() as u128;
    let mut out = CopyVerdict { n_checked: 0, per_copy: vec![], first_violation: None, budget_exhausted: false };
    for k in 1..=n_max {
        let size = n.checked_pow(k as u32).unwrap_or(u128::MAX);
        if size > budget as u128 {
            if k == 1 {
                return Err(resource_limit("copy budget vertices", size, budget));
            }
            out.budget_exhausted = true;
            break;
        }
        let tp = tensor_power_capped(pa, k, budget)?;
        let q = in_qstab(&tp)?;
        let rec = CopyRecord { copies: k, vertices: tp.graph.n(), max_clique: q.max_clique, max_weight: q.max_weight };
        out.n_checked = k;
        out.per_copy.push(rec.clone());
        if q.verdict == Verdict::Out {
            out.first_violation = Some(rec);
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, cycle_graph, power_index};
    use crate::lp::check_separator;

    fn q(a: i64, b: i64) -> ScalarQ2 {
        ScalarQ2::from_ratio(a, b)
    }

    fn qc5(y: ScalarQ2) -> Vec<ScalarQ2> {
        vec![q(1, 3), q(2, 3), y, q(2, 3), q(1, 3)]
    }

    #[test]
    fn validation() {
        let c5 = cycle_graph(5).unwrap();
        assert!(validate_assignment(&c5, vec![q(1, 2); 5]).is_ok());
        assert!(validate_assignment(&c5, qc5(q(1, 3))).is_ok());
        let k2 = complete_graph(2);
        match validate_assignment(&k2, vec![q(3, 5); 2]) {
            Err(Error::Validation(v)) => assert_eq!(v, vec![Violation::EdgeSum { u: 0, v: 1 }]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(validate_assignment(&k2, vec![q(1, 2)]), Err(Error::InvalidArgument(_))));
        match validate_assignment(&Graph::empty(2), vec![q(-1, 2), q(3, 2)]) {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn qstab_examples() {
        let c5 = cycle_graph(5).unwrap();
        let pa = validate_assignment(&c5, vec![q(1, 2); 5]).unwrap();
        assert_eq!(in_qstab(&pa).unwrap().verdict, Verdict::In);

        // y > 1/3 already breaks the edge bound on C5, where cliques are edges.
        assert!(validate_assignment(&c5, qc5(q(34, 100))).is_err());
        let pa = validate_unit_box(&c5, qc5(q(34, 100))).unwrap();
        assert_eq!(pa.edge_violations().len(), 2);
        let v = in_qstab(&pa).unwrap();
        assert_eq!(v.verdict, Verdict::Out);
        assert_eq!(v.max_weight, q(34, 100) + q(2, 3));
        // {1,2} and {2,3} tie; the lexicographically smaller one is reported.
        assert_eq!(v.max_clique.vertices(), &[1, 2]);
        assert_eq!(Clique::new(&c5, vec![2, 3]).unwrap().weight(pa.values()), v.max_weight);

        let pa = validate_assignment(&complete_graph(3), vec![q(1, 3); 3]).unwrap();
        let v = in_qstab(&pa).unwrap();
        assert_eq!((v.verdict, v.max_weight.clone()), (Verdict::In, q(1, 1)));
    }

    #[test]
    fn stab_examples() {
        let c5 = cycle_graph(5).unwrap();
        let pa = validate_assignment(&c5, vec![q(2, 5); 5]).unwrap();
        match in_stab(&pa).unwrap() {
            StabVerdict::In(terms) => {
                let mut sets: Vec<_> = terms.iter().map(|(s, _)| s.clone()).collect();
                sets.sort();
                assert_eq!(sets, vec![vec![0, 2], vec![0, 3], vec![1, 3], vec![1, 4], vec![2, 4]]);
                assert!(terms.iter().all(|(_, c)| *c == q(1, 5)));
            }
            other => panic!("{other:?}"),
        }

        let ind = vec![q(1, 1), q(0, 1), q(1, 1), q(0, 1), q(0, 1)];
        let pa = validate_assignment(&c5, ind).unwrap();
        assert_eq!(in_stab(&pa).unwrap(), StabVerdict::In(vec![(vec![0, 2], q(1, 1))]));

        let pa = validate_assignment(&c5, vec![q(41, 100); 5]).unwrap();
        match in_stab(&pa).unwrap() {
            StabVerdict::Out(sep) => {
                let sets = independent_sets(&c5, DEFAULT_STAB_CAP).unwrap();
                assert!(check_separator(&sets, pa.values(), &sep));
                assert_eq!(sep.coefficients, vec![q(1, 1); 5]);
                assert_eq!(sep.bound, q(2, 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn independent_set_listing() {
        let c5 = cycle_graph(5).unwrap();
        assert_eq!(independent_sets(&c5, 100).unwrap().len(), 11);
        assert_eq!(independent_sets(&Graph::empty(4), 100).unwrap().len(), 16);
        assert!(independent_sets(&Graph::empty(4), 15).is_err());
    }

    #[test]
    fn tensor_powers() {
        let c5 = cycle_graph(5).unwrap();
        let pa = validate_assignment(&c5, vec![q(1, 2); 5]).unwrap();
        let t = tensor_power(&pa, 2).unwrap();
        assert_eq!(t.values(), vec![q(1, 4); 25].as_slice());
        assert_eq!(tensor_power(&pa, 1).unwrap(), pa);
        let ind = vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)];
        let pa = validate_assignment(&c5, ind).unwrap();
        let t = tensor_power(&pa, 3).unwrap();
        assert!(t.values().iter().enumerate().all(|(i, x)| *x == if i == 0 { q(1, 1) } else { q(0, 1) }));
        let pa = validate_assignment(&c5, qc5(q(1, 5))).unwrap();
        let t = tensor_power(&pa, 2).unwrap();
        assert_eq!(t.values()[power_index(&[1, 2], 5)], q(2, 15));
    }

    #[test]
    fn two_copy_thresholds() {
        let c5 = cycle_graph(5).unwrap();
        let pa = validate_assignment(&c5, vec![q(46, 100); 5]).unwrap();
        let v = self_inconsistency_check(&pa, 2).unwrap();
        let f = v.first_violation.unwrap();
        assert_eq!(f.copies, 2);
        assert_eq!(f.max_clique.len(), 5);
        assert_eq!(f.max_weight, q(5 * 46 * 46, 10000));

        let pa = validate_assignment(&c5, qc5(q(23, 100))).unwrap();
        assert_eq!(self_inconsistency_check(&pa, 2).unwrap().first_violation.unwrap().copies, 2);

        let pa = validate_assignment(&c5, vec![q(1, 5); 5]).unwrap();
        let v = self_inconsistency_check(&pa, 2).unwrap();
        assert!(v.first_violation.is_none() && v.n_checked == 2 && !v.budget_exhausted);

        let v = self_inconsistency_check_budget(&pa, 3, 100).unwrap();
        assert!(v.budget_exhausted);
        assert_eq!(v.n_checked, 2);
    }

    #[test]
    fn sqrt2_weights() {
        let s = ScalarQ2::sqrt2();
        let w = vec![q(1, 2) - q(1, 4) * s.clone(), q(1, 10) * s, q(1, 3)];
        let pa = validate_assignment(&complete_graph(3), w.clone()).unwrap();
        let v = in_qstab(&pa).unwrap();
        assert_eq!(v.max_weight, w.into_iter().sum());
    }
}
