use std::time::Instant;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::path::{CostedGraph, Walker};
use super::{BbbcConfig, GenerationRecord, Path, Termination, Trace};
use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Shortest or near-shortest `s`-`t` path over the topology's cached link costs.
///
/// Generation 1 is `N` random loop-free walks. Every later generation keeps
/// the elite and grows `N - 1` candidates from it: the elite is cut after a
/// random position and a fresh random walk completes it to `t`. Early cut
/// points are uniform over the path; as generations advance they concentrate
/// toward the terminal end.
pub fn optimize_path(topology: &Topology, s: NodeId, t: NodeId, config: &BbbcConfig) -> Result<(Path, Trace<Path>)> {
    optimize_path_observed(topology, s, t, config, |_, _| {})
}

/// [`optimize_path`] that also hands every population to `observer` as
/// `(generation, candidates)`.
pub fn optimize_path_observed<F>(
    topology: &Topology,
    s: NodeId,
    t: NodeId,
    config: &BbbcConfig,
    mut observer: F,
) -> Result<(Path, Trace<Path>)>
where
    F: FnMut(usize, &[Path]),
{
    config.validate()?;
    let graph = CostedGraph::new(topology)?;
    let (si, ti) = graph.endpoints(topology, s, t)?;
    let start = Instant::now();
    let over_budget = || config.time_budget.is_some_and(|b| start.elapsed() >= b);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut walker = Walker::new(graph.len());
    let n = config.population_size;
    let mut termination = Termination::GenerationsExhausted;

    let mut population: Vec<(Vec<usize>, f64)> = Vec::with_capacity(n);
    while population.len() < n {
        let nodes = walker.walk(&graph, &[si], ti, &mut rng).ok_or(Error::Unreachable(s, t))?;
        let cost = graph.cost(&nodes);
        population.push((nodes, cost));
        if population.len() < n && over_budget() {
            termination = Termination::TimeBudget;
            break;
        }
    }
    observe(&mut observer, topology, 1, &population);
    let mut elite = population[best_index(&population)].clone();
    let mut records = vec![record(topology, 1, &elite, start)];
    let mut stale = 0;

    let generations = config.max_generations;
    for generation in 2..=generations {
        if termination == Termination::TimeBudget {
            break;
        }
        if over_budget() {
            termination = Termination::TimeBudget;
            break;
        }
        if config.stagnation_limit.is_some_and(|limit| stale >= limit) {
            termination = Termination::Stagnation;
            break;
        }
        // Fraction of the run spent; 0 on the first regeneration, 1 on the last.
        let progress = if generations > 2 {
            ((generation - 2) as f64 / (generations - 2) as f64).powf(config.shrink_exponent)
        } else {
            0.0
        };
        population.clear();
        population.push(elite.clone());
        while population.len() < n {
            let nodes = regrow(&graph, &mut walker, &elite.0, ti, progress, &mut rng);
            let cost = graph.cost(&nodes);
            population.push((nodes, cost));
            if population.len() < n && over_budget() {
                termination = Termination::TimeBudget;
                break;
            }
        }
        observe(&mut observer, topology, generation, &population);
        let best = best_index(&population);
        if population[best].1 < elite.1 {
            elite = population[best].clone();
            stale = 0;
        } else {
            stale += 1;
        }
        records.push(record(topology, generation, &elite, start));
    }

    let best = graph.to_path(topology, &elite.0);
    Ok((best, Trace { records, elapsed: start.elapsed(), termination }))
}

/// Cuts `elite` after a random position and completes it with a random walk.
///
/// A cut at `c` keeps `elite[..c]`. With `m = len - 1` possible cuts, the cut
/// is drawn uniformly with probability `1 - progress` and otherwise from a
/// ramp weighting cut `c` by `c`, which favors the terminal end.
fn regrow<R: Rng>(
    graph: &CostedGraph,
    walker: &mut Walker,
    elite: &[usize],
    t: usize,
    progress: f64,
    rng: &mut R,
) -> Vec<usize> {
    let m = elite.len() - 1;
    let mut cut = if rng.random_bool(progress.clamp(0.0, 1.0)) {
        let ramp = WeightedIndex::new(1..=m).expect("non-empty ramp");
        ramp.sample(rng) + 1
    } else {
        rng.random_range(1..=m)
    };
    // The prefix can wall `t` off; shorter prefixes eventually reduce to `[s]`,
    // which always succeeds because `t` is reachable.
    loop {
        if let Some(nodes) = walker.walk(graph, &elite[..cut], t, rng) {
            return nodes;
        }
        cut -= 1;
    }
}

fn best_index(population: &[(Vec<usize>, f64)]) -> usize {
    let mut best = 0;
    for (i, (_, c)) in population.iter().enumerate() {
        if *c < population[best].1 {
            best = i;
        }
    }
    best
}

fn to_path(topology: &Topology, (nodes, cost): &(Vec<usize>, f64)) -> Path {
    Path { nodes: nodes.iter().map(|&i| topology.nodes()[i].id).collect(), cost: *cost }
}

fn record(topology: &Topology, generation: usize, elite: &(Vec<usize>, f64), start: Instant) -> GenerationRecord<Path> {
    GenerationRecord { generation, best_cost: elite.1, elapsed: start.elapsed(), best: to_path(topology, elite) }
}

fn observe<F: FnMut(usize, &[Path])>(
    observer: &mut F,
    topology: &Topology,
    generation: usize,
    population: &[(Vec<usize>, f64)],
) {
    let paths: Vec<Path> = population.iter().map(|p| to_path(topology, p)).collect();
    observer(generation, &paths);
}
