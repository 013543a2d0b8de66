//! Multi-epoch routing scenarios.
//!
//! Each epoch costs every link, routes each `(source, terminal)` pair with
//! BB-BC, updates the routing table, drains energy along chosen routes and
//! applies churn to produce the next snapshot.

mod config;

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bbbc::{optimize_path, BbbcConfig, Path, Termination};
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyInferenceSystem;
use crate::oracle::dijkstra;
use crate::topology::{generate_random_topology, ChurnEvent, NodeId, Topology, TopologyParams};

pub use config::parse_scenario;

/// New snapshot with every link costed by `system` (weaker endpoint's energy).
pub fn cost_all_links(topology: &Topology, system: &FuzzyInferenceSystem) -> Result<Topology> {
    system.cost_links(topology)
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialTopology {
    Generated(TopologyParams),
    Given(Topology),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChurnModel {
    None,
    /// Per epoch, `leaves` random non-endpoint nodes depart and `joins` nodes
    /// arrive at uniform positions.
    Random {
        joins: usize,
        leaves: usize,
    },
    /// Explicit events, applied when producing the snapshot with their `at_epoch`.
    Scripted(Vec<ChurnEvent>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub topology: InitialTopology,
    /// Defaults to `[(1, n)]`.
    pub pairs: Vec<(NodeId, NodeId)>,
    pub epochs: usize,
    pub churn: ChurnModel,
    /// Population, generations and budget for every run. The per-run seed is
    /// derived from `seed` below.
    pub bbbc: BbbcConfig,
    /// Energy removed from every node of each selected route per epoch.
    pub energy_drain: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Generated topology of `n` nodes routing `1 -> n`.
    pub fn generated(params: TopologyParams, epochs: usize, bbbc: BbbcConfig, seed: u64) -> Self {
        let n = params.n as u32;
        ScenarioConfig {
            topology: InitialTopology::Generated(params),
            pairs: vec![(NodeId(1), NodeId(n))],
            epochs,
            churn: ChurnModel::None,
            bbbc,
            energy_drain: 0.02,
            seed,
        }
    }

    /// Uses `topology` as-is, routing first id to last id.
    pub fn with_topology(topology: Topology, epochs: usize, bbbc: BbbcConfig, seed: u64) -> Self {
        let pairs = match (topology.nodes().first(), topology.last_id()) {
            (Some(first), Some(last)) => vec![(first.id, last)],
            _ => Vec::new(),
        };
        ScenarioConfig {
            topology: InitialTopology::Given(topology),
            pairs,
            epochs,
            churn: ChurnModel::None,
            bbbc,
            energy_drain: 0.02,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::invalid("at least one epoch is required"));
        }
        if self.pairs.is_empty() {
            return Err(Error::invalid("at least one (source, terminal) pair is required"));
        }
        self.bbbc.validate()?;
        if !(self.energy_drain.is_finite() && self.energy_drain >= 0.0) {
            return Err(Error::invalid("energy drain must be >= 0"));
        }
        let exists = |id: NodeId| match &self.topology {
            InitialTopology::Generated(p) => id.0 >= 1 && id.0 as usize <= p.n,
            InitialTopology::Given(t) => t.contains(id),
        };
        if let InitialTopology::Generated(p) = &self.topology {
            p.validate()?;
        }
        for &(s, t) in &self.pairs {
            if s == t {
                return Err(Error::invalid(format!("pair ({s}, {t}) has identical endpoints")));
            }
            for id in [s, t] {
                if !exists(id) {
                    return Err(Error::UnknownNode(id));
                }
            }
        }
        if let ChurnModel::Scripted(events) = &self.churn {
            for e in events {
                if let crate::topology::ChurnKind::Leave(id) = e.kind {
                    if self.is_endpoint(id) {
                        return Err(Error::invalid(format!("churn removes live endpoint {id}")));
                    }
                }
                if e.at_epoch == 0 || e.at_epoch >= self.epochs as u64 + self.first_epoch() {
                    return Err(Error::invalid(format!("churn event at epoch {} is outside the run", e.at_epoch)));
                }
            }
        }
        Ok(())
    }

    fn first_epoch(&self) -> u64 {
        match &self.topology {
            InitialTopology::Generated(_) => 0,
            InitialTopology::Given(t) => t.epoch(),
        }
    }

    fn is_endpoint(&self, id: NodeId) -> bool {
        self.pairs.iter().any(|&(s, t)| s == id || t == id)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RouteOutcome {
    Routed { path: Path, time_sec: f64, termination: Termination },
    Unreachable,
}

/// One row of a scenario report: one pair in one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub nodes: usize,
    pub source: NodeId,
    pub terminal: NodeId,
    pub generations: usize,
    pub outcome: RouteOutcome,
}

impl EpochRecord {
    pub fn path(&self) -> Option<&Path> {
        match &self.outcome {
            RouteOutcome::Routed { path, .. } => Some(path),
            RouteOutcome::Unreachable => None,
        }
    }

    /// Equal apart from wall-clock time.
    pub fn same_result(&self, other: &EpochRecord) -> bool {
        let strip = |r: &EpochRecord| match &r.outcome {
            RouteOutcome::Routed { path, termination, .. } => Some((path.clone(), *termination)),
            RouteOutcome::Unreachable => None,
        };
        (self.epoch, self.nodes, self.source, self.terminal, self.generations)
            == (other.epoch, other.nodes, other.source, other.terminal, other.generations)
            && strip(self) == strip(other)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteEntry {
    pub path: Path,
    pub epoch: u64,
}

/// Current best route per pair. A pair that becomes unreachable loses its entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoutingTable {
    routes: BTreeMap<(NodeId, NodeId), RouteEntry>,
}

impl RoutingTable {
    pub fn get(&self, source: NodeId, terminal: NodeId) -> Option<&RouteEntry> {
        self.routes.get(&(source, terminal))
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &RouteEntry)> {
        self.routes.iter()
    }

    fn apply(&mut self, record: &EpochRecord) {
        let key = (record.source, record.terminal);
        match record.path() {
            Some(path) => {
                self.routes.insert(key, RouteEntry { path: path.clone(), epoch: record.epoch });
            }
            None => {
                self.routes.remove(&key);
            }
        }
    }
}

/// Runs the scenario; see the module docs for the per-epoch steps.
pub fn run_scenario(
    config: &ScenarioConfig,
    system: &FuzzyInferenceSystem,
) -> Result<(Vec<EpochRecord>, RoutingTable)> {
    drive(config, system, |_, _| Ok(()))
}

/// Runs the scenario and, for every routed pair, also times Dijkstra on the
/// same costed snapshot.
pub fn compare_with_oracle(config: &ScenarioConfig, system: &FuzzyInferenceSystem) -> Result<Vec<OracleComparison>> {
    let mut rows = Vec::new();
    drive(config, system, |snapshot, record| {
        let RouteOutcome::Routed { path, time_sec, .. } = &record.outcome else {
            return Ok(());
        };
        let start = Instant::now();
        let exact = dijkstra(snapshot, record.source, record.terminal)?;
        let dijkstra_time_sec = start.elapsed().as_secs_f64();
        rows.push(OracleComparison {
            epoch: record.epoch,
            source: record.source,
            terminal: record.terminal,
            bbbc_cost: path.cost,
            dijkstra_cost: exact.cost,
            gap: path.cost - exact.cost,
            bbbc_time_sec: *time_sec,
            dijkstra_time_sec,
        });
        Ok(())
    })?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub epoch: u64,
    pub source: NodeId,
    pub terminal: NodeId,
    pub bbbc_cost: f64,
    pub dijkstra_cost: f64,
    pub gap: f64,
    pub bbbc_time_sec: f64,
    pub dijkstra_time_sec: f64,
}

fn drive<F>(
    config: &ScenarioConfig,
    system: &FuzzyInferenceSystem,
    mut on_record: F,
) -> Result<(Vec<EpochRecord>, RoutingTable)>
where
    F: FnMut(&Topology, &EpochRecord) -> Result<()>,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut topology, metrics) = match &config.topology {
        InitialTopology::Generated(p) => (generate_random_topology(p, rng.random())?, p.metrics),
        InitialTopology::Given(t) => (t.clone(), Default::default()),
    };
    let mut table = RoutingTable::default();
    let mut records = Vec::new();

    for round in 0..config.epochs {
        let snapshot = cost_all_links(&topology, system)?;
        let seeds: Vec<u64> = config.pairs.iter().map(|_| rng.random()).collect();
        let outcomes = config
            .pairs
            .par_iter()
            .zip(seeds)
            .map(|(&(s, t), seed)| route_pair(&snapshot, s, t, &BbbcConfig { seed, ..config.bbbc.clone() }))
            .collect::<Result<Vec<_>>>()?;

        let mut drained = Vec::new();
        for (&(s, t), (generations, outcome)) in config.pairs.iter().zip(outcomes) {
            let record = EpochRecord {
                epoch: snapshot.epoch(),
                nodes: snapshot.node_count(),
                source: s,
                terminal: t,
                generations,
                outcome,
            };
            if let Some(path) = record.path() {
                drained.extend_from_slice(&path.nodes);
            }
            on_record(&snapshot, &record)?;
            table.apply(&record);
            records.push(record);
        }

        if round + 1 == config.epochs {
            break;
        }
        drained.sort();
        drained.dedup();
        let next = topology.with_drained_energy(&drained, config.energy_drain)?;
        let events = churn_events(config, &next, &metrics, &mut rng);
        topology = next.apply_churn(&events, &metrics, &mut rng)?;
    }
    Ok((records, table))
}

fn route_pair(snapshot: &Topology, s: NodeId, t: NodeId, bbbc: &BbbcConfig) -> Result<(usize, RouteOutcome)> {
    if !snapshot.contains(s) || !snapshot.contains(t) || !snapshot.is_reachable(s, t)? {
        return Ok((0, RouteOutcome::Unreachable));
    }
    let start = Instant::now();
    let (path, trace) = optimize_path(snapshot, s, t, bbbc)?;
    let time_sec = start.elapsed().as_secs_f64();
    Ok((trace.generations(), RouteOutcome::Routed { path, time_sec, termination: trace.termination }))
}

fn churn_events(
    config: &ScenarioConfig,
    topology: &Topology,
    metrics: &crate::topology::MetricDistributions,
    rng: &mut ChaCha8Rng,
) -> Vec<ChurnEvent> {
    let at_epoch = topology.epoch() + 1;
    match &config.churn {
        ChurnModel::None => Vec::new(),
        ChurnModel::Scripted(events) => events.iter().filter(|e| e.at_epoch == at_epoch).cloned().collect(),
        ChurnModel::Random { joins, leaves } => {
            let candidates: Vec<NodeId> =
                topology.nodes().iter().map(|n| n.id).filter(|&id| !config.is_endpoint(id)).collect();
            let k = (*leaves).min(candidates.len());
            let mut gone: Vec<usize> = sample(rng, candidates.len(), k).into_vec();
            gone.sort_unstable();
            let mut events: Vec<ChurnEvent> =
                gone.into_iter().map(|i| ChurnEvent::leave(candidates[i], at_epoch)).collect();
            let range = topology.nodes().first().map_or(250.0, |n| n.range);
            let params = TopologyParams {
                n: 1,
                area: topology.area(),
                range: match &config.topology {
                    InitialTopology::Generated(p) => p.range,
                    InitialTopology::Given(_) => range,
                },
                metrics: *metrics,
            };
            for k in 0..*joins {
                let id = topology.next_id().0 + k as u32;
                events.push(ChurnEvent::join(params.sample_node(id, rng), at_epoch));
            }
            events
        }
    }
}

/// `epoch,nodes,generations,path_cost,time_sec,path`; unreachable rows leave
/// cost and time empty and put `unreachable` in the path column.
pub fn write_report<W: Write>(records: &[EpochRecord], mut out: W, timing: bool) -> io::Result<()> {
    writeln!(out, "epoch,nodes,generations,path_cost,time_sec,path")?;
    for r in records {
        match &r.outcome {
            RouteOutcome::Routed { path, time_sec, .. } => {
                let t = if timing { *time_sec } else { 0.0 };
                writeln!(
                    out,
                    "{},{},{},{:.4},{:.6},{}",
                    r.epoch,
                    r.nodes,
                    r.generations,
                    path.cost,
                    t,
                    path.display_ids()
                )?
            }
            RouteOutcome::Unreachable => writeln!(out, "{},{},{},,,unreachable", r.epoch, r.nodes, r.generations)?,
        }
    }
    Ok(())
}

pub fn write_comparison<W: Write>(rows: &[OracleComparison], mut out: W, timing: bool) -> io::Result<()> {
    writeln!(out, "epoch,source,terminal,bbbc_cost,dijkstra_cost,gap,bbbc_time_sec,dijkstra_time_sec")?;
    for r in rows {
        let (a, b) = if timing { (r.bbbc_time_sec, r.dijkstra_time_sec) } else { (0.0, 0.0) };
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6}",
            r.epoch, r.source, r.terminal, r.bbbc_cost, r.dijkstra_cost, r.gap, a, b
        )?;
    }
    Ok(())
}
