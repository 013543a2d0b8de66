//! Unit-disk mesh topologies.
//!
//! A [`Topology`] is an immutable snapshot `G_i`. Two nodes share a link when
//! their distance is at most the smaller of their two transmission ranges.
//! Every operation that changes the network ([`Topology::apply_churn`],
//! [`Topology::with_link_costs`], ...) returns a new snapshot.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stable 1-based node identifier. Ids are never reused after a node leaves.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn new(width: f64, height: f64) -> Self {
        Area { width, height }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0) {
            return Err(Error::invalid(format!("area must be positive, got {}x{}", self.width, self.height)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    /// Remaining battery as a fraction in `[0, 1]`.
    pub residual_energy: f64,
    /// Transmission radius in meters.
    pub range: f64,
}

impl Node {
    pub fn new(id: u32, x: f64, y: f64, residual_energy: f64, range: f64) -> Self {
        Node { id: NodeId(id), x, y, residual_energy, range }
    }

    pub fn distance_to(&self, other: &Node) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Unit-disk rule, inclusive at the boundary.
    pub fn reaches(&self, other: &Node) -> bool {
        self.distance_to(other) <= self.range.min(other.range)
    }

    fn validate(&self, area: &Area) -> Result<()> {
        if self.id.0 == 0 {
            return Err(Error::invalid("node ids are 1-based"));
        }
        if !area.contains(self.x, self.y) {
            return Err(Error::invalid(format!(
                "node {} at ({}, {}) lies outside the {}x{} area",
                self.id, self.x, self.y, area.width, area.height
            )));
        }
        if !(0.0..=1.0).contains(&self.residual_energy) {
            return Err(Error::invalid(format!(
                "node {} residual energy {} outside [0, 1]",
                self.id, self.residual_energy
            )));
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::invalid(format!("node {} range must be positive", self.id)));
        }
        Ok(())
    }
}

/// Per-link quality measurements fed to the fuzzy cost.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LinkMetrics {
    /// Normalized fraction in `[0, 1]`.
    pub throughput: f64,
    pub delay_ms: f64,
    pub jitter_ms: f64,
}

impl LinkMetrics {
    pub fn new(throughput: f64, delay_ms: f64, jitter_ms: f64) -> Self {
        LinkMetrics { throughput, delay_ms, jitter_ms }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.throughput) {
            return Err(Error::invalid(format!("throughput {} outside [0, 1]", self.throughput)));
        }
        if !(self.delay_ms.is_finite() && self.delay_ms >= 0.0) {
            return Err(Error::invalid(format!("delay {} must be >= 0", self.delay_ms)));
        }
        if !(self.jitter_ms.is_finite() && self.jitter_ms >= 0.0) {
            return Err(Error::invalid(format!("jitter {} must be >= 0", self.jitter_ms)));
        }
        Ok(())
    }
}

/// Undirected link, stored with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub u: NodeId,
    pub v: NodeId,
    pub metrics: LinkMetrics,
    /// Integrated cost `c_l`, once a fuzzy system has scored the link.
    pub cost: Option<f64>,
}

/// Adjacency entry: dense index of the neighbor and of the shared link.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Adjacent {
    pub node: usize,
    pub link: usize,
}

/// Closed interval sampled uniformly.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct UniformRange {
    pub lo: f64,
    pub hi: f64,
}

impl UniformRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        UniformRange { lo, hi }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::invalid(format!("{what} range [{}, {}] is invalid", self.lo, self.hi)));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

/// Distributions used for node energy and link metrics.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MetricDistributions {
    pub energy: UniformRange,
    pub throughput: UniformRange,
    pub delay_ms: UniformRange,
    pub jitter_ms: UniformRange,
}

impl Default for MetricDistributions {
    fn default() -> Self {
        MetricDistributions {
            energy: UniformRange::new(0.2, 1.0),
            throughput: UniformRange::new(0.0, 1.0),
            delay_ms: UniformRange::new(1.0, 100.0),
            jitter_ms: UniformRange::new(0.0, 20.0),
        }
    }
}

impl MetricDistributions {
    pub fn validate(&self) -> Result<()> {
        self.energy.validate("energy")?;
        self.throughput.validate("throughput")?;
        self.delay_ms.validate("delay")?;
        self.jitter_ms.validate("jitter")?;
        if self.energy.lo < 0.0 || self.energy.hi > 1.0 {
            return Err(Error::invalid("energy range must lie within [0, 1]"));
        }
        if self.throughput.lo < 0.0 || self.throughput.hi > 1.0 {
            return Err(Error::invalid("throughput range must lie within [0, 1]"));
        }
        if self.delay_ms.lo < 0.0 || self.jitter_ms.lo < 0.0 {
            return Err(Error::invalid("delay and jitter must be non-negative"));
        }
        Ok(())
    }

    pub fn sample_energy<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        quantize(self.energy.sample(rng))
    }

    pub fn sample_link<R: Rng + ?Sized>(&self, rng: &mut R) -> LinkMetrics {
        let throughput = quantize(self.throughput.sample(rng));
        let delay_ms = quantize(self.delay_ms.sample(rng));
        let jitter_ms = quantize(self.jitter_ms.sample(rng));
        LinkMetrics { throughput, delay_ms, jitter_ms }
    }
}

/// Rounds to 9 significant digits so generated values survive the text format.
pub(crate) fn quantize(v: f64) -> f64 {
    format!("{v:.8e}").parse().expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopologyParams {
    pub n: usize,
    pub area: Area,
    pub range: f64,
    pub metrics: MetricDistributions,
}

impl TopologyParams {
    pub fn new(n: usize, width: f64, height: f64, range: f64) -> Self {
        TopologyParams { n, area: Area::new(width, height), range, metrics: MetricDistributions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("node count must be at least 1"));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::invalid("node count too large"));
        }
        self.area.validate()?;
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::invalid(format!("range must be positive, got {}", self.range)));
        }
        self.metrics.validate()
    }

    /// Draws a node uniformly in the area with energy from the configured range.
    pub fn sample_node<R: Rng + ?Sized>(&self, id: u32, rng: &mut R) -> Node {
        let x = quantize(rng.random_range(0.0..=self.area.width));
        let y = quantize(rng.random_range(0.0..=self.area.height));
        let residual_energy = self.metrics.sample_energy(rng);
        Node { id: NodeId(id), x, y, residual_energy, range: self.range }
    }
}

/// Random unit-disk topology with `n` nodes numbered `1..=n`.
///
/// Nodes draw `(x, y, energy)` in id order, then each connected pair draws its
/// metrics in `(u, v)` order, all from one ChaCha stream seeded by `seed`.
/// A disconnected result is valid.
pub fn generate_random_topology(params: &TopologyParams, seed: u64) -> Result<Topology> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Node> = (1..=params.n as u32).map(|id| params.sample_node(id, &mut rng)).collect();
    Topology::assemble(params.area, 0, params.n as u32 + 1, nodes, |_, _| Ok(params.metrics.sample_link(&mut rng)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChurnKind {
    Join(Node),
    Leave(NodeId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChurnEvent {
    pub kind: ChurnKind,
    /// Epoch of the snapshot the event produces.
    pub at_epoch: u64,
}

impl ChurnEvent {
    pub fn join(node: Node, at_epoch: u64) -> Self {
        ChurnEvent { kind: ChurnKind::Join(node), at_epoch }
    }

    pub fn leave(id: NodeId, at_epoch: u64) -> Self {
        ChurnEvent { kind: ChurnKind::Leave(id), at_epoch }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    area: Area,
    epoch: u64,
    next_id: u32,
    /// Sorted by id, so dense index order matches id order.
    nodes: Vec<Node>,
    /// Sorted by `(u, v)`.
    links: Vec<Link>,
    adjacency: Vec<Vec<Adjacent>>,
}

impl Topology {
    /// Builds a snapshot from hand-placed nodes; `metrics` is called once per
    /// qualifying pair `(u, v)` with `u < v`.
    pub fn from_nodes<F>(area: Area, mut nodes: Vec<Node>, mut metrics: F) -> Result<Topology>
    where
        F: FnMut(NodeId, NodeId) -> LinkMetrics,
    {
        area.validate()?;
        nodes.sort_by_key(|n| n.id);
        let next_id = nodes.last().map_or(1, |n| n.id.0 + 1);
        Topology::assemble(area, 0, next_id, nodes, |u, v| Ok(metrics(u, v)))
    }

    fn assemble<F>(area: Area, epoch: u64, next_id: u32, nodes: Vec<Node>, mut metrics: F) -> Result<Topology>
    where
        F: FnMut(NodeId, NodeId) -> Result<LinkMetrics>,
    {
        for (i, node) in nodes.iter().enumerate() {
            node.validate(&area)?;
            if i > 0 && nodes[i - 1].id >= node.id {
                return Err(Error::DuplicateNode(node.id));
            }
        }
        let mut links = Vec::new();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i].reaches(&nodes[j]) {
                    let m = metrics(nodes[i].id, nodes[j].id)?;
                    m.validate()?;
                    let link = links.len();
                    links.push(Link { u: nodes[i].id, v: nodes[j].id, metrics: m, cost: None });
                    adjacency[i].push(Adjacent { node: j, link });
                    adjacency[j].push(Adjacent { node: i, link });
                }
            }
        }
        // Pushes happen in increasing j for row i but row j receives i's out of order.
        for row in &mut adjacency {
            row.sort_by_key(|a| a.node);
        }
        Ok(Topology { area, epoch, next_id, nodes, links, adjacency })
    }

    pub fn area(&self) -> Area {
        self.area
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Smallest id a joining node may take.
    pub fn next_id(&self) -> NodeId {
        NodeId(self.next_id)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub(crate) fn require_index(&self, id: NodeId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownNode(id))
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_some()
    }

    /// Highest live id; the default terminal node.
    pub fn last_id(&self) -> Option<NodeId> {
        self.nodes.last().map(|n| n.id)
    }

    /// Neighbors by dense index, sorted.
    pub fn adjacency(&self, index: usize) -> &[Adjacent] {
        &self.adjacency[index]
    }

    /// Ids adjacent to `v`, ascending.
    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        let i = self.require_index(v)?;
        Ok(self.adjacency[i].iter().map(|a| self.nodes[a.node].id).collect())
    }

    /// Link between `a` and `b` in either orientation.
    pub fn link(&self, a: NodeId, b: NodeId) -> Option<&Link> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        self.link_between(i, j).map(|l| &self.links[l])
    }

    pub(crate) fn link_between(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.adjacency[i];
        row.binary_search_by_key(&j, |a| a.node).ok().map(|k| row[k].link)
    }

    pub fn is_costed(&self) -> bool {
        self.links.iter().all(|l| l.cost.is_some())
    }

    /// Breadth-first reachability by dense index.
    pub(crate) fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for a in &self.adjacency[u] {
                if !seen[a.node] {
                    seen[a.node] = true;
                    queue.push_back(a.node);
                }
            }
        }
        seen
    }

    pub fn is_reachable(&self, s: NodeId, t: NodeId) -> Result<bool> {
        let si = self.require_index(s)?;
        let ti = self.require_index(t)?;
        Ok(self.reachable_from(si)[ti])
    }

    pub fn is_connected(&self) -> bool {
        self.nodes.is_empty() || self.reachable_from(0).into_iter().all(|r| r)
    }

    /// New snapshot with every link's cached cost set by `cost`.
    ///
    /// Costs must be finite and strictly positive.
    pub fn with_link_costs<F>(&self, mut cost: F) -> Result<Topology>
    where
        F: FnMut(&Link, &Node, &Node) -> Result<f64>,
    {
        let mut next = self.clone();
        for link in &mut next.links {
            let u = &self.nodes[self.require_index(link.u)?];
            let v = &self.nodes[self.require_index(link.v)?];
            let c = cost(link, u, v)?;
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::invalid(format!(
                    "link {}-{} cost {} must be finite and positive",
                    link.u, link.v, c
                )));
            }
            link.cost = Some(c);
        }
        Ok(next)
    }

    /// Lowers the residual energy of `ids` by `amount` (floored at 0).
    ///
    /// Cached link costs are cleared since they depend on energy.
    pub fn with_drained_energy(&self, ids: &[NodeId], amount: f64) -> Result<Topology> {
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(Error::invalid(format!("energy drain {amount} must be >= 0")));
        }
        let mut next = self.clone();
        for &id in ids {
            let i = self.require_index(id)?;
            let node = &mut next.nodes[i];
            node.residual_energy = (node.residual_energy - amount).max(0.0);
        }
        for link in &mut next.links {
            link.cost = None;
        }
        Ok(next)
    }

    /// Applies joins and leaves, producing snapshot `epoch + 1`.
    ///
    /// Surviving links keep their metrics and cached costs. Links created by a
    /// join draw metrics from `metrics` using `rng`, in `(u, v)` order.
    pub fn apply_churn<R: Rng + ?Sized>(
        &self,
        events: &[ChurnEvent],
        metrics: &MetricDistributions,
        rng: &mut R,
    ) -> Result<Topology> {
        let epoch = self.epoch + 1;
        let mut nodes: BTreeMap<NodeId, Node> = self.nodes.iter().map(|n| (n.id, n.clone())).collect();
        let mut next_id = self.next_id;
        for event in events {
            if event.at_epoch != epoch {
                return Err(Error::invalid(format!(
                    "churn event for epoch {} applied to produce epoch {}",
                    event.at_epoch, epoch
                )));
            }
            match &event.kind {
                ChurnKind::Leave(id) => {
                    nodes.remove(id).ok_or(Error::UnknownNode(*id))?;
                }
                ChurnKind::Join(node) => {
                    if node.id.0 < next_id {
                        return Err(Error::DuplicateNode(node.id));
                    }
                    node.validate(&self.area)?;
                    next_id = node.id.0 + 1;
                    nodes.insert(node.id, node.clone());
                }
            }
        }

        let old: HashMap<(NodeId, NodeId), &Link> = self.links.iter().map(|l| ((l.u, l.v), l)).collect();
        let mut next = Topology::assemble(self.area, epoch, next_id, nodes.into_values().collect(), |u, v| {
            Ok(match old.get(&(u, v)) {
                Some(link) => link.metrics,
                None => metrics.sample_link(rng),
            })
        })?;
        for link in &mut next.links {
            if let Some(prev) = old.get(&(link.u, link.v)) {
                link.cost = prev.cost;
            }
        }
        Ok(next)
    }
}

/// Text form: `wmn v1 <n> <width> <height> <epoch>`, then one `node` line per
/// node and one `edge` line per link. Floats use the shortest representation
/// that parses back to the same bits.
impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wmn v1 {} {} {} {}", self.nodes.len(), self.area.width, self.area.height, self.epoch)?;
        for n in &self.nodes {
            writeln!(f, "node {} {} {} {} {}", n.id, n.x, n.y, n.residual_energy, n.range)?;
        }
        for l in &self.links {
            let m = &l.metrics;
            writeln!(f, "edge {} {} {} {} {}", l.u, l.v, m.throughput, m.delay_ms, m.jitter_ms)?;
        }
        Ok(())
    }
}

fn field<T: FromStr>(parts: &[&str], i: usize, line: usize, what: &str) -> Result<T> {
    let raw = parts.get(i).ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    raw.parse().map_err(|_| Error::parse(line, format!("bad {what} {raw:?}")))
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(text: &str) -> Result<Topology> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty topology file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 6 || h[0] != "wmn" || h[1] != "v1" {
            return Err(Error::parse(hline, "expected header `wmn v1 <n> <width> <height> <epoch>`"));
        }
        let n: usize = field(&h, 2, hline, "node count")?;
        let area = Area::new(field(&h, 3, hline, "width")?, field(&h, 4, hline, "height")?);
        let epoch: u64 = field(&h, 5, hline, "epoch")?;
        area.validate().map_err(|e| Error::parse(hline, e.to_string()))?;

        let mut nodes = Vec::with_capacity(n);
        let mut edges: BTreeMap<(NodeId, NodeId), (usize, LinkMetrics)> = BTreeMap::new();
        for (line, text) in lines {
            let p: Vec<&str> = text.split_whitespace().collect();
            match p[0] {
                "node" if p.len() == 6 => {
                    if !edges.is_empty() {
                        return Err(Error::parse(line, "node lines must precede edge lines"));
                    }
                    nodes.push(Node {
                        id: NodeId(field(&p, 1, line, "id")?),
                        x: field(&p, 2, line, "x")?,
                        y: field(&p, 3, line, "y")?,
                        residual_energy: field(&p, 4, line, "energy")?,
                        range: field(&p, 5, line, "range")?,
                    });
                }
                "edge" if p.len() == 6 => {
                    let u = NodeId(field(&p, 1, line, "u")?);
                    let v = NodeId(field(&p, 2, line, "v")?);
                    if u >= v {
                        return Err(Error::parse(line, "edge endpoints must satisfy u < v"));
                    }
                    let m = LinkMetrics {
                        throughput: field(&p, 3, line, "throughput")?,
                        delay_ms: field(&p, 4, line, "delay")?,
                        jitter_ms: field(&p, 5, line, "jitter")?,
                    };
                    if edges.insert((u, v), (line, m)).is_some() {
                        return Err(Error::parse(line, format!("duplicate edge {u}-{v}")));
                    }
                }
                _ => return Err(Error::parse(line, format!("unrecognized line {text:?}"))),
            }
        }
        if nodes.len() != n {
            return Err(Error::parse(hline, format!("header declares {n} nodes, found {}", nodes.len())));
        }
        if nodes.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(Error::parse(hline, "node ids must be strictly increasing"));
        }
        let next_id = nodes.last().map_or(1, |n| n.id.0 + 1);
        let topo = Topology::assemble(area, epoch, next_id, nodes, |u, v| {
            edges
                .remove(&(u, v))
                .map(|(_, m)| m)
                .ok_or_else(|| Error::parse(hline, format!("nodes {u} and {v} are within range but edge is missing")))
        })?;
        if let Some(((u, v), (line, _))) = edges.into_iter().next() {
            return Err(Error::parse(line, format!("edge {u}-{v} violates the unit-disk rule")));
        }
        Ok(topo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn metrics() -> LinkMetrics {
        LinkMetrics::new(0.5, 10.0, 2.0)
    }

    fn fixture(points: &[(f64, f64)]) -> Topology {
        let nodes = points.iter().enumerate().map(|(i, &(x, y))| Node::new(i as u32 + 1, x, y, 1.0, 250.0)).collect();
        Topology::from_nodes(Area::new(500.0, 500.0), nodes, |_, _| metrics()).unwrap()
    }

    /// Independent edge oracle: squared distances against squared range.
    fn brute_force_edges(t: &Topology) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for a in t.nodes() {
            for b in t.nodes() {
                let r = a.range.min(b.range);
                let d2 = (a.x - b.x).powi(2) + (a.y - b.y).powi(2);
                if a.id < b.id && d2 <= r * r {
                    out.push((a.id, b.id));
                }
            }
        }
        out
    }

    fn edge_ids(t: &Topology) -> Vec<(NodeId, NodeId)> {
        t.links().iter().map(|l| (l.u, l.v)).collect()
    }

    #[test]
    fn paper_sized_network() {
        let t = generate_random_topology(&TopologyParams::new(25, 500.0, 500.0, 250.0), 7).unwrap();
        assert_eq!(t.node_count(), 25);
        assert_eq!(t.epoch(), 0);
        assert_eq!(t.last_id(), Some(NodeId(25)));
        for n in t.nodes() {
            assert!((0.2..=1.0).contains(&n.residual_energy));
        }
        for l in t.links() {
            assert!(l.metrics.delay_ms >= 1.0 && l.metrics.delay_ms <= 100.0);
            assert!(l.metrics.jitter_ms <= 20.0);
        }
    }

    #[test]
    fn single_node_has_no_edges() {
        let t = generate_random_topology(&TopologyParams::new(1, 500.0, 500.0, 250.0), 3).unwrap();
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.link_count(), 0);
        assert!(t.neighbors(NodeId(1)).unwrap().is_empty());
    }

    #[test]
    fn range_boundary_is_inclusive() {
        let t = fixture(&[(0.0, 0.0), (250.0, 0.0)]);
        assert_eq!(t.link_count(), 1);
        let t = fixture(&[(0.0, 0.0), (250.000001, 0.0)]);
        assert_eq!(t.link_count(), 0);
    }

    #[test]
    fn heterogeneous_ranges_use_the_minimum() {
        let nodes = vec![Node::new(1, 0.0, 0.0, 1.0, 300.0), Node::new(2, 260.0, 0.0, 1.0, 250.0)];
        let t = Topology::from_nodes(Area::new(500.0, 500.0), nodes, |_, _| metrics()).unwrap();
        assert_eq!(t.link_count(), 0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate_random_topology(&TopologyParams::new(0, 500.0, 500.0, 250.0), 0).is_err());
        assert!(generate_random_topology(&TopologyParams::new(5, 0.0, 500.0, 250.0), 0).is_err());
        assert!(generate_random_topology(&TopologyParams::new(5, 500.0, 500.0, 0.0), 0).is_err());
        let outside = vec![Node::new(1, 600.0, 0.0, 1.0, 250.0)];
        assert!(Topology::from_nodes(Area::new(500.0, 500.0), outside, |_, _| metrics()).is_err());
        let dup = vec![Node::new(1, 0.0, 0.0, 1.0, 250.0), Node::new(1, 1.0, 0.0, 1.0, 250.0)];
        assert_eq!(
            Topology::from_nodes(Area::new(500.0, 500.0), dup, |_, _| metrics()).unwrap_err(),
            Error::DuplicateNode(NodeId(1))
        );
    }

    #[test]
    fn neighbors_of_star_and_isolated_node() {
        let t = fixture(&[(200.0, 200.0), (0.0, 200.0), (400.0, 200.0), (200.0, 400.0)]);
        assert_eq!(t.neighbors(NodeId(1)).unwrap(), vec![NodeId(2), NodeId(3), NodeId(4)]);
        let t = fixture(&[(250.0, 250.0), (100.0, 250.0), (400.0, 250.0), (0.0, 100.0)]);
        assert_eq!(t.neighbors(NodeId(1)).unwrap(), vec![NodeId(2), NodeId(3)]);
        assert_eq!(t.neighbors(NodeId(4)).unwrap(), vec![NodeId(2)]);
        let t = fixture(&[(0.0, 0.0), (499.0, 499.0)]);
        assert!(t.neighbors(NodeId(1)).unwrap().is_empty());
        assert_eq!(t.neighbors(NodeId(9)).unwrap_err(), Error::UnknownNode(NodeId(9)));
    }

    #[test]
    fn neighbors_match_pairwise_scan() {
        let t = generate_random_topology(&TopologyParams::new(25, 500.0, 500.0, 250.0), 11).unwrap();
        let me = t.node(NodeId(1)).unwrap();
        let expected: Vec<NodeId> = t
            .nodes()
            .iter()
            .filter(|o| o.id != me.id && (o.x - me.x).powi(2) + (o.y - me.y).powi(2) <= 250.0 * 250.0)
            .map(|o| o.id)
            .collect();
        assert_eq!(t.neighbors(NodeId(1)).unwrap(), expected);
    }

    #[test]
    fn empty_churn_bumps_epoch_only() {
        let t = generate_random_topology(&TopologyParams::new(10, 500.0, 500.0, 250.0), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = t.apply_churn(&[], &MetricDistributions::default(), &mut rng).unwrap();
        assert_eq!(next.epoch(), 1);
        assert_eq!(next.nodes(), t.nodes());
        assert_eq!(next.links(), t.links());
    }

    #[test]
    fn leaving_cut_vertex_isolates_ends() {
        let t = fixture(&[(0.0, 0.0), (200.0, 0.0), (400.0, 0.0)]);
        assert_eq!(t.link_count(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next =
            t.apply_churn(&[ChurnEvent::leave(NodeId(2), 1)], &MetricDistributions::default(), &mut rng).unwrap();
        assert_eq!(next.node_count(), 2);
        assert_eq!(next.link_count(), 0);
        assert_eq!(t.link_count(), 2, "input snapshot untouched");
    }

    #[test]
    fn join_bridges_disconnected_pair() {
        let t = fixture(&[(0.0, 0.0), (400.0, 0.0)]);
        assert_eq!(t.link_count(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let joiner = Node::new(3, 200.0, 0.0, 1.0, 250.0);
        let next = t.apply_churn(&[ChurnEvent::join(joiner, 1)], &MetricDistributions::default(), &mut rng).unwrap();
        assert_eq!(edge_ids(&next), vec![(NodeId(1), NodeId(3)), (NodeId(2), NodeId(3))]);
        assert!(next.is_connected());
    }

    #[test]
    fn churn_errors() {
        let t = fixture(&[(0.0, 0.0), (100.0, 0.0)]);
        let d = MetricDistributions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = t.apply_churn(&[ChurnEvent::leave(NodeId(7), 1)], &d, &mut rng).unwrap_err();
        assert_eq!(err, Error::UnknownNode(NodeId(7)));
        assert!(err.to_string().contains('7'));
        let reuse = Node::new(2, 50.0, 0.0, 1.0, 250.0);
        assert!(t.apply_churn(&[ChurnEvent::join(reuse, 1)], &d, &mut rng).is_err());
        let stale = ChurnEvent::leave(NodeId(1), 5);
        assert!(t.apply_churn(&[stale], &d, &mut rng).is_err());
    }

    #[test]
    fn ids_are_not_reused_after_leave() {
        let t = fixture(&[(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]);
        let d = MetricDistributions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t1 = t.apply_churn(&[ChurnEvent::leave(NodeId(3), 1)], &d, &mut rng).unwrap();
        assert_eq!(t1.next_id(), NodeId(4));
        let again = Node::new(3, 10.0, 10.0, 1.0, 250.0);
        assert!(t1.apply_churn(&[ChurnEvent::join(again, 2)], &d, &mut rng).is_err());
    }

    #[test]
    fn text_format_layout() {
        let t = fixture(&[(0.0, 0.0), (100.5, 0.0)]);
        let text = t.to_string();
        assert_eq!(text, "wmn v1 2 500 500 0\nnode 1 0 0 1 250\nnode 2 100.5 0 1 250\nedge 1 2 0.5 10 2\n");
    }

    #[test]
    fn text_format_rejects_inconsistent_edges() {
        let missing = "wmn v1 2 500 500 0\nnode 1 0 0 1 250\nnode 2 100 0 1 250\n";
        assert!(missing.parse::<Topology>().is_err());
        let extra = "wmn v1 2 500 500 0\nnode 1 0 0 1 250\nnode 2 400 0 1 250\nedge 1 2 0.5 1 1\n";
        assert!(matches!(extra.parse::<Topology>(), Err(Error::Parse { line: 4, .. })));
        assert!("wmn v2 0 1 1 0".parse::<Topology>().is_err());
        assert!("wmn v1 1 500 500 0\nnode 1 0 0 1.5 250\n".parse::<Topology>().is_err());
    }

    fn churned(seed: u64, n: usize, joins: usize, leaves: usize) -> (Topology, Topology) {
        let params = TopologyParams::new(n, 500.0, 500.0, 250.0);
        let t = generate_random_topology(&params, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut events: Vec<ChurnEvent> =
            t.nodes().iter().take(leaves.min(n)).map(|node| ChurnEvent::leave(node.id, 1)).collect();
        for k in 0..joins {
            events.push(ChurnEvent::join(params.sample_node(n as u32 + 1 + k as u32, &mut rng), 1));
        }
        let next = t.apply_churn(&events, &params.metrics, &mut rng).unwrap();
        (t, next)
    }

    proptest! {
        #[test]
        fn generated_edges_match_pairwise_scan(seed in any::<u64>(), n in 1usize..60) {
            let t = generate_random_topology(&TopologyParams::new(n, 500.0, 500.0, 250.0), seed).unwrap();
            prop_assert_eq!(edge_ids(&t), brute_force_edges(&t));
            for (i, row) in (0..t.node_count()).map(|i| (i, t.adjacency(i))) {
                for a in row {
                    prop_assert!(a.node != i);
                    prop_assert!(t.adjacency(a.node).iter().any(|b| b.node == i && b.link == a.link));
                }
            }
        }

        #[test]
        fn churned_edges_match_pairwise_scan(seed in any::<u64>(), n in 1usize..40, joins in 0usize..5, leaves in 0usize..5) {
            let (before, after) = churned(seed, n, joins, leaves);
            let snapshot = before.to_string();
            prop_assert_eq!(edge_ids(&after), brute_force_edges(&after));
            prop_assert_eq!(after.epoch(), 1);
            // inputs are never mutated
            prop_assert_eq!(before.to_string(), snapshot);
        }

        #[test]
        fn generation_is_deterministic(seed in any::<u64>(), n in 1usize..40) {
            let p = TopologyParams::new(n, 300.0, 700.0, 180.0);
            prop_assert_eq!(generate_random_topology(&p, seed).unwrap(), generate_random_topology(&p, seed).unwrap());
        }

        #[test]
        fn text_round_trip(seed in any::<u64>(), n in 1usize..40) {
            let t = generate_random_topology(&TopologyParams::new(n, 1500.0, 1500.0, 250.0), seed).unwrap();
            let text = t.to_string();
            let back: Topology = text.parse().unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
