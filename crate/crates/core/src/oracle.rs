//! Exact shortest paths over cached link costs.
//!
//! Both routines pick the same path among equal-cost ones: fewer hops first,
//! then the lexicographically smallest id sequence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::bbbc::Path;
use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Largest topology [`brute_force_shortest`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Candidate route ordered by `(cost, hops, sequence)`. Dense indices follow
/// id order, so comparing them compares ids.
#[derive(Clone, Debug)]
struct Label {
    cost: f64,
    nodes: Vec<usize>,
}

impl Label {
    fn order(&self, other: &Label) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.nodes.len().cmp(&other.nodes.len()))
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.order(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    // Reversed for the max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.order(self)
    }
}

fn endpoints(topology: &Topology, s: NodeId, t: NodeId) -> Result<(usize, usize)> {
    let si = topology.require_index(s)?;
    let ti = topology.require_index(t)?;
    if si == ti {
        return Err(Error::invalid(format!("source and terminal are both {s}")));
    }
    Ok((si, ti))
}

fn cost_of(topology: &Topology, link: usize) -> Result<f64> {
    let l = &topology.links()[link];
    l.cost.ok_or(Error::UncostedLink(l.u, l.v))
}

fn finish(topology: &Topology, label: Label) -> Path {
    Path { nodes: label.nodes.iter().map(|&i| topology.nodes()[i].id).collect(), cost: label.cost }
}

/// Minimum-cost path with label-setting Dijkstra.
pub fn dijkstra(topology: &Topology, s: NodeId, t: NodeId) -> Result<Path> {
    let (si, ti) = endpoints(topology, s, t)?;
    if !topology.is_costed() {
        let l = topology.links().iter().find(|l| l.cost.is_none()).expect("some link is uncosted");
        return Err(Error::UncostedLink(l.u, l.v));
    }
    let n = topology.node_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let origin = Label { cost: 0.0, nodes: vec![si] };
    best[si] = Some(origin.clone());
    heap.push(origin);

    while let Some(label) = heap.pop() {
        let u = *label.nodes.last().expect("labels are non-empty");
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == ti {
            return Ok(finish(topology, label));
        }
        for a in topology.adjacency(u) {
            if done[a.node] {
                continue;
            }
            let mut nodes = label.nodes.clone();
            nodes.push(a.node);
            let next = Label { cost: label.cost + cost_of(topology, a.link)?, nodes };
            let improves = match &best[a.node] {
                Some(current) => next.order(current) == Ordering::Less,
                None => true,
            };
            if improves {
                best[a.node] = Some(next.clone());
                heap.push(next);
            }
        }
    }
    Err(Error::Unreachable(s, t))
}

/// Enumerates every simple `s`-`t` path; only for topologies of at most
/// [`BRUTE_FORCE_LIMIT`] nodes.
pub fn brute_force_shortest(topology: &Topology, s: NodeId, t: NodeId) -> Result<Path> {
    if topology.node_count() > BRUTE_FORCE_LIMIT {
        return Err(Error::invalid(format!(
            "brute force is limited to {BRUTE_FORCE_LIMIT} nodes, topology has {}",
            topology.node_count()
        )));
    }
    let (si, ti) = endpoints(topology, s, t)?;
    let mut on_path = vec![false; topology.node_count()];
    let mut stack = vec![si];
    on_path[si] = true;
    let mut best: Option<Label> = None;
    extend(topology, ti, 0.0, &mut stack, &mut on_path, &mut best)?;
    best.map(|b| finish(topology, b)).ok_or(Error::Unreachable(s, t))
}

fn extend(
    topology: &Topology,
    t: usize,
    cost: f64,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    best: &mut Option<Label>,
) -> Result<()> {
    let u = *stack.last().expect("stack holds the source");
    if u == t {
        let candidate = Label { cost, nodes: stack.clone() };
        if best.as_ref().is_none_or(|b| candidate.order(b) == Ordering::Less) {
            *best = Some(candidate);
        }
        return Ok(());
    }
    for a in topology.adjacency(u) {
        if on_path[a.node] {
            continue;
        }
        let c = cost + cost_of(topology, a.link)?;
        on_path[a.node] = true;
        stack.push(a.node);
        extend(topology, t, c, stack, on_path, best)?;
        stack.pop();
        on_path[a.node] = false;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbbc::path_cost;
    use crate::fuzzy::FuzzyInferenceSystem;
    use crate::topology::{generate_random_topology, Area, LinkMetrics, Node, TopologyParams};
    use proptest::prelude::*;

    fn fixture(points: &[(f64, f64)], cost: impl Fn(u32, u32) -> f64) -> Topology {
        let nodes = points.iter().enumerate().map(|(i, &(x, y))| Node::new(i as u32 + 1, x, y, 1.0, 250.0)).collect();
        Topology::from_nodes(Area::new(500.0, 500.0), nodes, |_, _| LinkMetrics::new(0.5, 1.0, 1.0))
            .unwrap()
            .with_link_costs(|l, _, _| Ok(cost(l.u.0, l.v.0)))
            .unwrap()
    }

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn single_link() {
        let t = fixture(&[(0.0, 0.0), (100.0, 0.0)], |_, _| 0.3);
        for p in [dijkstra(&t, NodeId(1), NodeId(2)).unwrap(), brute_force_shortest(&t, NodeId(1), NodeId(2)).unwrap()]
        {
            assert_eq!(p.nodes, ids(&[1, 2]));
            assert_eq!(p.cost, 0.3);
        }
    }

    #[test]
    fn triangle_prefers_two_cheap_hops() {
        // s=1, m=2, t=3: (s,m)=0.1, (m,t)=0.1, (s,t)=0.3.
        let t = fixture(&[(0.0, 0.0), (100.0, 50.0), (200.0, 0.0)], |u, v| if (u, v) == (1, 3) { 0.3 } else { 0.1 });
        let p = dijkstra(&t, NodeId(1), NodeId(3)).unwrap();
        assert_eq!(p.nodes, ids(&[1, 2, 3]));
        assert!((p.cost - 0.2).abs() < 1e-15);
        assert_eq!(brute_force_shortest(&t, NodeId(1), NodeId(3)).unwrap(), p);
    }

    #[test]
    fn four_cycle_takes_the_cheaper_arc() {
        // Square of side 200, diagonals (283) out of range: 1-2-4 vs 1-3-4.
        let sq = [(0.0, 0.0), (200.0, 0.0), (0.0, 200.0), (200.0, 200.0)];
        let t = fixture(&sq, |u, v| match (u, v) {
            (1, 2) => 0.4,
            (2, 4) => 0.3,
            (1, 3) => 0.25,
            (3, 4) => 0.35,
            _ => unreachable!(),
        });
        assert_eq!(t.link_count(), 4);
        // 0.4 + 0.3 = 0.7 against 0.25 + 0.35 = 0.6.
        let p = brute_force_shortest(&t, NodeId(1), NodeId(4)).unwrap();
        assert_eq!(p.nodes, ids(&[1, 3, 4]));
        assert_eq!(dijkstra(&t, NodeId(1), NodeId(4)).unwrap(), p);
    }

    #[test]
    fn ties_break_on_hops_then_sequence() {
        let sq = [(0.0, 0.0), (200.0, 0.0), (0.0, 200.0), (200.0, 200.0)];
        let t = fixture(&sq, |_, _| 0.25);
        let p = dijkstra(&t, NodeId(1), NodeId(4)).unwrap();
        assert_eq!(p.nodes, ids(&[1, 2, 4]));
        assert_eq!(brute_force_shortest(&t, NodeId(1), NodeId(4)).unwrap(), p);
        // Direct link costing the same as a two-hop route wins on hops.
        let tri = [(0.0, 0.0), (100.0, 50.0), (200.0, 0.0)];
        let t = fixture(&tri, |u, v| if (u, v) == (1, 3) { 0.5 } else { 0.25 });
        assert_eq!(dijkstra(&t, NodeId(1), NodeId(3)).unwrap().nodes, ids(&[1, 3]));
        assert_eq!(brute_force_shortest(&t, NodeId(1), NodeId(3)).unwrap().nodes, ids(&[1, 3]));
    }

    #[test]
    fn errors() {
        let t = fixture(&[(0.0, 0.0), (100.0, 0.0), (480.0, 480.0)], |_, _| 0.1);
        assert_eq!(dijkstra(&t, NodeId(1), NodeId(3)), Err(Error::Unreachable(NodeId(1), NodeId(3))));
        assert_eq!(brute_force_shortest(&t, NodeId(1), NodeId(3)), Err(Error::Unreachable(NodeId(1), NodeId(3))));
        assert_eq!(dijkstra(&t, NodeId(1), NodeId(8)), Err(Error::UnknownNode(NodeId(8))));
        assert!(dijkstra(&t, NodeId(1), NodeId(1)).is_err());
        let big = generate_random_topology(&TopologyParams::new(13, 500.0, 500.0, 250.0), 0).unwrap();
        let big = FuzzyInferenceSystem::default().cost_links(&big).unwrap();
        assert!(matches!(brute_force_shortest(&big, NodeId(1), NodeId(13)), Err(Error::InvalidParameter(_))));
    }

    /// Unguarded enumeration over `(cost, hops, sequence)`, written against
    /// the public topology API only.
    fn enumerate_best(t: &Topology, s: NodeId, dst: NodeId) -> Option<(f64, Vec<NodeId>)> {
        fn go(t: &Topology, path: &mut Vec<NodeId>, cost: f64, dst: NodeId, best: &mut Option<(f64, Vec<NodeId>)>) {
            let last = *path.last().unwrap();
            if last == dst {
                let better = match best {
                    None => true,
                    Some((c, p)) => (cost, path.len(), &*path) < (*c, p.len(), &*p),
                };
                if better {
                    *best = Some((cost, path.clone()));
                }
                return;
            }
            for n in t.neighbors(last).unwrap() {
                if !path.contains(&n) {
                    let c = cost + t.link(last, n).unwrap().cost.unwrap();
                    path.push(n);
                    go(t, path, c, dst, best);
                    path.pop();
                }
            }
        }
        let mut best = None;
        go(t, &mut vec![s], 0.0, dst, &mut best);
        best
    }

    #[test]
    fn seeded_25_node_fixture_matches_enumeration() {
        // Sparse 1500 m square so exhaustive enumeration stays cheap.
        let fis = FuzzyInferenceSystem::default();
        let (s, dst) = (NodeId(1), NodeId(25));
        let mut compared = 0;
        for seed in 0..40 {
            let t = generate_random_topology(&TopologyParams::new(25, 1500.0, 1500.0, 250.0), seed).unwrap();
            let t = fis.cost_links(&t).unwrap();
            match (dijkstra(&t, s, dst), enumerate_best(&t, s, dst)) {
                (Ok(p), Some((cost, nodes))) => {
                    assert_eq!(p.nodes, nodes, "seed {seed}");
                    assert_eq!(p.cost, cost);
                    compared += 1;
                }
                (Err(Error::Unreachable(..)), None) => {}
                (d, e) => panic!("seed {seed}: {d:?} vs {e:?}"),
            }
        }
        assert!(compared >= 3, "only {compared} reachable fixtures");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn dijkstra_agrees_with_enumeration(seed in any::<u64>(), n in 2usize..=12) {
            let t = generate_random_topology(&TopologyParams::new(n, 500.0, 500.0, 250.0), seed).unwrap();
            let t = FuzzyInferenceSystem::default().cost_links(&t).unwrap();
            let last = NodeId(n as u32);
            let d = dijkstra(&t, NodeId(1), last);
            let b = brute_force_shortest(&t, NodeId(1), last);
            prop_assert_eq!(&d, &b);
            if let Ok(p) = d {
                prop_assert_eq!(p.cost.to_bits(), path_cost(&t, &p.nodes).unwrap().to_bits());
                prop_assert!(Path::new(&t, p.nodes.clone()).is_ok());
            }
        }
    }
}
