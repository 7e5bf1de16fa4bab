//! Perfect-graph test via the odd hole / odd antihole characterization,
//! decided by exhaustive search for induced odd cycles of length >= 5.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::Graph;
use crate::error::{resource_limit, Result};

pub const DEFAULT_PERFECT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionKind {
    /// Induced odd cycle of length >= 5 in the graph itself.
    OddHole,
    /// Induced odd cycle of length >= 5 in the complement.
    OddAntihole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub kind: ObstructionKind,
    /// Vertices in cycle order (in the graph for holes, the complement for antiholes).
    pub cycle: Vec<usize>,
}

impl Obstruction {
    pub fn sorted_vertices(&self) -> Vec<usize> {
        let mut v = self.cycle.clone();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerfectVerdict {
    pub perfect: bool,
    pub obstruction: Option<Obstruction>,
}

pub fn is_perfect(g: &Graph) -> Result<PerfectVerdict> {
    is_perfect_capped(g, DEFAULT_PERFECT_CAP)
}

pub fn is_perfect_capped(g: &Graph, cap: usize) -> Result<PerfectVerdict> {
    if g.n() > cap {
        return Err(resource_limit("perfect-graph test vertices", g.n() as u128, cap));
    }
    let found = find_odd_hole(g)
        .map(|cycle| Obstruction { kind: ObstructionKind::OddHole, cycle })
        .or_else(|| {
            find_odd_hole(&g.complement())
                .map(|cycle| Obstruction { kind: ObstructionKind::OddAntihole, cycle })
        });
    Ok(PerfectVerdict {
        perfect: found.is_none(),
        obstruction: found,
    })
}

/// First induced odd cycle of length >= 5, with its smallest vertex first.
pub(crate) fn find_odd_hole(g: &Graph) -> Option<Vec<usize>> {
    let n = g.n();
    for start in 0..n {
        // Only vertices above `start` may join, so each cycle is found from its minimum.
        let mut allowed = FixedBitSet::with_capacity(n);
        allowed.insert_range(start + 1..n);
        let mut path = vec![start];
        // Vertices adjacent to some interior path vertex (excluding the last).
        let blocked = FixedBitSet::with_capacity(n);
        if let Some(c) = extend(g, &mut path, &allowed, blocked) {
            return Some(c);
        }
    }
    None
}

fn extend(g: &Graph, path: &mut Vec<usize>, allowed: &FixedBitSet, blocked: FixedBitSet) -> Option<Vec<usize>> {
    let start = path[0];
    let last = *path.last().unwrap();
    let mut cand = g.neighbors(last).clone();
    cand.intersect_with(allowed);
    cand.difference_with(&blocked);
    for w in cand.ones() {
        if path.contains(&w) {
            continue;
        }
        let closes = path.len() >= 2 && g.has_edge(w, start);
        if closes {
            let len = path.len() + 1;
            if len >= 5 && len % 2 == 1 {
                let mut c = path.clone();
                c.push(w);
                return Some(c);
            }
            continue;
        }
        if path.len() == 1 {
            // w is the second vertex; nothing to block yet.
            path.push(w);
            let r = extend(g, path, allowed, blocked.clone());
            path.pop();
            if r.is_some() {
                return r;
            }
            continue;
        }
        // `last` becomes interior: its other neighbours may no longer join.
        let mut nb = blocked.clone();
        nb.union_with(g.neighbors(last));
        // Neighbours of the start are never blocked: any of them reached from
        // the end of the path closes the cycle and is handled by `closes`.
        path.push(w);
        let r = extend(g, path, allowed, nb);
        path.pop();
        if r.is_some() {
            return r;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, cycle_graph, induced_subgraph, path_graph};

    #[test]
    fn pentagon_is_imperfect() {
        let v = is_perfect(&cycle_graph(5).unwrap()).unwrap();
        assert!(!v.perfect);
        let o = v.obstruction.unwrap();
        assert_eq!(o.kind, ObstructionKind::OddHole);
        assert_eq!(o.sorted_vertices(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn small_perfect_graphs() {
        assert!(is_perfect(&cycle_graph(4).unwrap()).unwrap().perfect);
        assert!(is_perfect(&path_graph(4)).unwrap().perfect);
        assert!(is_perfect(&complete_graph(6)).unwrap().perfect);
        assert!(is_perfect(&cycle_graph(6).unwrap()).unwrap().perfect);
    }

    #[test]
    fn antihole_detected() {
        let c7b = cycle_graph(7).unwrap().complement();
        let v = is_perfect(&c7b).unwrap();
        assert!(!v.perfect);
        assert_eq!(v.obstruction.unwrap().kind, ObstructionKind::OddAntihole);
    }

    #[test]
    fn witness_is_induced_cycle() {
        // C7 with a pendant path; the obstruction must be an induced odd cycle.
        let mut edges: Vec<_> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
        edges.extend([(0, 7), (7, 8), (2, 8)]);
        let g = Graph::from_edges(9, edges).unwrap();
        let o = is_perfect(&g).unwrap().obstruction.unwrap();
        let (sub, _) = induced_subgraph(&g, &o.cycle).unwrap();
        let k = o.cycle.len();
        assert!(k % 2 == 1 && k >= 5);
        assert!(sub.same_edges(&cycle_graph(k).unwrap()));
    }

    #[test]
    fn cap_enforced() {
        assert!(is_perfect(&Graph::empty(25)).is_err());
        assert!(is_perfect_capped(&Graph::empty(25), 30).unwrap().perfect);
    }
}
