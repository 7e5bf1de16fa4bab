//! `H(G) = P4[G, Ḡ, Ḡ, G]`, a self-complementary graph containing `G`,
//! and TH membership decided through it.

use std::ops::Range;

use serde_json::{json, Value};

use crate::assignments::{validate_unit_box, ProbabilityAssignment};
use crate::error::{resource_limit, Result};
use crate::graph::io::graph_to_value;
use crate::graph::{find_isomorphism, generalized_composition, path_graph, Graph, IsomorphismWitness};
use crate::scalar::ScalarQ2;
use crate::theta::{extract_witness_with, in_th_with, MembershipVerdict, SdpOptions, ThStatus, Witness};
use num_traits::Zero;

/// Largest `H(G)` (in vertices) whose self-complementarity is proved by
/// isomorphism search by default.
pub const DEFAULT_ISO_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct HConstruction {
    pub base: Graph,
    pub h_graph: Graph,
    /// Blocks 1..4 carry `G, Ḡ, Ḡ, G`; consecutive blocks are fully joined.
    pub block_ranges: [Range<usize>; 4],
    /// Isomorphism from `h_graph` to its complement, when verified.
    pub witness: Option<IsomorphismWitness>,
    pub warning: Option<String>,
}

impl HConstruction {
    pub fn is_verified(&self) -> bool {
        self.witness.is_some()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "base": graph_to_value(&self.base),
            "h_graph": graph_to_value(&self.h_graph),
            "vertices": self.h_graph.n(),
            "edges": self.h_graph.edge_count(),
            "block_ranges": self.block_ranges.iter().map(|r| [r.start, r.end]).collect::<Vec<_>>(),
            "self_complementary": self.witness.is_some(),
            "witness": self.witness.as_ref().map(|w| w.mapping.clone()),
        });
        if let Some(w) = &self.warning {
            v["warning"] = json!(w);
        }
        v
    }
}

pub fn build_h(g: &Graph) -> Result<HConstruction> {
    build_h_with(g, DEFAULT_ISO_CAP, false)
}

/// Builds `H(g)` and proves it self-complementary by isomorphism search
/// when `4n ≤ iso_cap`. Larger inputs fail unless `skip_verification`,
/// in which case the result carries a warning and no witness.
pub fn build_h_with(g: &Graph, iso_cap: usize, skip_verification: bool) -> Result<HConstruction> {
    let n = g.n();
    let size = 4 * n;
    if size > iso_cap && !skip_verification {
        return Err(resource_limit("self-complementarity check of H(G) (vertices)", size as u128, iso_cap));
    }
    let gc = g.complement();
    let parts = [g.clone(), gc.clone(), gc, g.clone()];
    let h_graph = generalized_composition(&path_graph(4), &parts)?;
    let block_ranges = [0..n, n..2 * n, 2 * n..3 * n, 3 * n..4 * n];
    let (witness, warning) = if size <= iso_cap {
        let hc = h_graph.complement();
        match find_isomorphism(&h_graph, &hc) {
            Some(w) if w.verify(&h_graph, &hc) => (Some(w), None),
            _ => {
                return Err(crate::Error::Verification(
                    "H(G) is not isomorphic to its complement".into(),
                ))
            }
        }
    } else {
        (None, Some(format!("self-complementarity of the {size}-vertex H(G) was not verified")))
    };
    Ok(HConstruction { base: g.clone(), h_graph, block_ranges, witness, warning })
}

/// Assignment `(p, 0, 0, p)` on `H(g)`.
pub fn embed_for_th_test(h: &HConstruction, p: &ProbabilityAssignment) -> Result<ProbabilityAssignment> {
    let n = h.base.n();
    if !p.graph().same_edges(&h.base) {
        return Err(crate::Error::InvalidArgument("assignment is not on the base graph of H".into()));
    }
    let mut v = Vec::with_capacity(4 * n);
    v.extend(p.values().iter().cloned());
    v.extend(std::iter::repeat_with(ScalarQ2::zero).take(2 * n));
    v.extend(p.values().iter().cloned());
    validate_unit_box(&h.h_graph, v)
}

#[derive(Debug, Clone)]
pub struct ViaHResult {
    pub construction: HConstruction,
    pub embedded: ProbabilityAssignment,
    pub verdict: MembershipVerdict,
    pub witness: Option<Witness>,
}

impl ViaHResult {
    pub fn to_json(&self) -> Value {
        let mut v = self.verdict.to_json();
        v["via_h"] = json!({
            "vertices": self.construction.h_graph.n(),
            "block_ranges": self.construction.block_ranges.iter().map(|r| [r.start, r.end]).collect::<Vec<_>>(),
            "self_complementary": self.construction.is_verified(),
            "self_complementarity_witness": self.construction.witness.as_ref().map(|w| w.mapping.clone()),
        });
        if let Some(w) = &self.construction.warning {
            v["warning"] = json!(w);
        }
        if let Some(w) = &self.witness {
            v["witness"] = w.to_json();
        }
        v
    }
}

pub fn th_membership_via_h(p: &ProbabilityAssignment) -> Result<ViaHResult> {
    th_membership_via_h_with(p, &SdpOptions::default(), DEFAULT_ISO_CAP, false)
}

pub fn th_membership_via_h_with(
    p: &ProbabilityAssignment,
    opts: &SdpOptions,
    iso_cap: usize,
    skip_verification: bool,
) -> Result<ViaHResult> {
    let construction = build_h_with(p.graph(), iso_cap, skip_verification)?;
    let embedded = embed_for_th_test(&construction, p)?;
    let verdict = in_th_with(&embedded, opts)?;
    let witness = if verdict.status == ThStatus::Out { Some(extract_witness_with(&embedded, opts)?) } else { None };
    Ok(ViaHResult { construction, embedded, verdict, witness })
}
