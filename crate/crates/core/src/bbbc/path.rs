use rand::Rng;

use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Loop-free route from `nodes[0]` to its last element with cached `C(P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub cost: f64,
}

impl Path {
    /// Validates `nodes` against `topology` and caches the cost.
    pub fn new(topology: &Topology, nodes: Vec<NodeId>) -> Result<Path> {
        if nodes.len() < 2 {
            return Err(Error::InvalidPath("a path needs at least two nodes".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = nodes.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::InvalidPath(format!("node {dup} repeats")));
        }
        let cost = path_cost(topology, &nodes)?;
        Ok(Path { nodes, cost })
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn terminal(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Ids joined with dashes, e.g. `1-6-25`.
    pub fn display_ids(&self) -> String {
        dash_joined(&self.nodes)
    }
}

pub(crate) fn dash_joined(ids: &[NodeId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join("-")
}

/// Sum of cached link costs over consecutive pairs, accumulated from the source.
pub fn path_cost(topology: &Topology, nodes: &[NodeId]) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::InvalidPath("a path needs at least two nodes".into()));
    }
    let mut cost = 0.0;
    for pair in nodes.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let link = topology.link(a, b).ok_or_else(|| {
            if topology.contains(a) && topology.contains(b) {
                Error::NotAdjacent(a, b)
            } else {
                Error::UnknownNode(if topology.contains(a) { b } else { a })
            }
        })?;
        cost += link.cost.ok_or(Error::UncostedLink(link.u, link.v))?;
    }
    Ok(cost)
}

/// Random loop-free walk from `s` to `t`.
///
/// At each step a uniformly random unvisited neighbor is taken. A node with no
/// unvisited neighbor is abandoned and stays excluded, which makes the walk a
/// randomized depth-first search: it finds a path exactly when one exists.
pub fn random_path<R: Rng + ?Sized>(topology: &Topology, s: NodeId, t: NodeId, rng: &mut R) -> Result<Path> {
    let graph = CostedGraph::new(topology)?;
    let (si, ti) = graph.endpoints(topology, s, t)?;
    let mut walker = Walker::new(graph.len());
    let nodes = walker.walk(&graph, &[si], ti, rng).ok_or(Error::Unreachable(s, t))?;
    Ok(graph.to_path(topology, &nodes))
}

/// Dense weighted adjacency used by the search loops.
pub(crate) struct CostedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl CostedGraph {
    pub(crate) fn new(topology: &Topology) -> Result<Self> {
        let links = topology.links();
        let adj = (0..topology.node_count())
            .map(|i| {
                topology
                    .adjacency(i)
                    .iter()
                    .map(|a| {
                        let l = &links[a.link];
                        l.cost.map(|c| (a.node, c)).ok_or(Error::UncostedLink(l.u, l.v))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CostedGraph { adj })
    }

    pub(crate) fn len(&self) -> usize {
        self.adj.len()
    }

    pub(crate) fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub(crate) fn endpoints(&self, topology: &Topology, s: NodeId, t: NodeId) -> Result<(usize, usize)> {
        let si = topology.require_index(s)?;
        let ti = topology.require_index(t)?;
        if si == ti {
            return Err(Error::invalid(format!("source and terminal are both {s}")));
        }
        Ok((si, ti))
    }

    fn edge_cost(&self, a: usize, b: usize) -> f64 {
        let row = &self.adj[a];
        let k = row.binary_search_by_key(&b, |e| e.0).expect("consecutive path nodes are adjacent");
        row[k].1
    }

    pub(crate) fn cost(&self, nodes: &[usize]) -> f64 {
        nodes.windows(2).fold(0.0, |acc, w| acc + self.edge_cost(w[0], w[1]))
    }

    pub(crate) fn to_path(&self, topology: &Topology, nodes: &[usize]) -> Path {
        Path { nodes: nodes.iter().map(|&i| topology.nodes()[i].id).collect(), cost: self.cost(nodes) }
    }
}

/// Reusable scratch space for random walks.
pub(crate) struct Walker {
    visited: Vec<bool>,
    candidates: Vec<usize>,
}

impl Walker {
    pub(crate) fn new(n: usize) -> Self {
        Walker { visited: vec![false; n], candidates: Vec::new() }
    }

    /// Extends `prefix` to `t` avoiding every prefix node. Backtracking never
    /// pops into the prefix; `None` means no such extension exists.
    pub(crate) fn walk<R: Rng + ?Sized>(
        &mut self,
        graph: &CostedGraph,
        prefix: &[usize],
        t: usize,
        rng: &mut R,
    ) -> Option<Vec<usize>> {
        self.visited.fill(false);
        for &p in prefix {
            self.visited[p] = true;
        }
        let mut stack = prefix.to_vec();
        loop {
            let head = *stack.last()?;
            if head == t {
                return Some(stack);
            }
            self.candidates.clear();
            self.candidates.extend(graph.neighbors(head).iter().map(|e| e.0).filter(|&v| !self.visited[v]));
            if self.candidates.is_empty() {
                if stack.len() == prefix.len() {
                    return None;
                }
                stack.pop();
                continue;
            }
            let next = self.candidates[rng.random_range(0..self.candidates.len())];
            self.visited[next] = true;
            stack.push(next);
        }
    }
}
