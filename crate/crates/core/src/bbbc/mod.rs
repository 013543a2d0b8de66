//! Big Bang-Big Crunch optimization.
//!
//! Each generation scatters candidates around a center (Big Bang), then
//! contracts the population to a new center (Big Crunch). In continuous
//! search the center is the inverse-fitness weighted mean of the candidates.
//! In path search, where node sequences have no mean, the center is the elite
//! path and new candidates are grown from random cut points of it.
//!
//! Both forms keep the best-ever candidate, so the best cost recorded in a
//! [`Trace`] never increases.

mod continuous;
mod discrete;
mod path;

use std::fmt;
use std::io::{self, Write};
use std::time::Duration;

use crate::error::{Error, Result};

pub use continuous::{center_of_mass, optimize_continuous, ContinuousOutcome};
pub use discrete::{optimize_path, optimize_path_observed};
pub use path::{path_cost, random_path, Path};

#[derive(Clone, Debug, PartialEq)]
pub struct BbbcConfig {
    /// Candidates per generation, `N`.
    pub population_size: usize,
    pub max_generations: usize,
    /// Wall-clock limit for the whole run.
    pub time_budget: Option<Duration>,
    /// Spread at generation `k` is `(upper - lower) / k^shrink_exponent`.
    /// In path mode it sets how fast cut points drift toward the terminal.
    pub shrink_exponent: f64,
    /// Continuous mode only; path mode always uses the elite as center.
    pub elite_as_center: bool,
    /// Stop after this many generations without improvement.
    pub stagnation_limit: Option<usize>,
    pub seed: u64,
}

impl Default for BbbcConfig {
    fn default() -> Self {
        BbbcConfig {
            population_size: 50,
            max_generations: 100,
            time_budget: None,
            shrink_exponent: 1.0,
            elite_as_center: false,
            stagnation_limit: None,
            seed: 0,
        }
    }
}

impl BbbcConfig {
    pub fn new(population_size: usize, max_generations: usize, seed: u64) -> Self {
        BbbcConfig { population_size, max_generations, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population size must be at least 2"));
        }
        if self.max_generations < 1 {
            return Err(Error::invalid("at least one generation is required"));
        }
        if self.time_budget.is_some_and(|b| b.is_zero()) {
            return Err(Error::invalid("time budget must be positive"));
        }
        if !(self.shrink_exponent.is_finite() && self.shrink_exponent > 0.0) {
            return Err(Error::invalid("shrink exponent must be positive"));
        }
        if self.stagnation_limit == Some(0) {
            return Err(Error::invalid("stagnation limit must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    GenerationsExhausted,
    TimeBudget,
    Stagnation,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::GenerationsExhausted => "generations exhausted",
            Termination::TimeBudget => "time budget",
            Termination::Stagnation => "stagnation",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord<S> {
    /// 1-based; generation 1 is the initial random population.
    pub generation: usize,
    pub best_cost: f64,
    pub elapsed: Duration,
    pub best: S,
}

/// Best-so-far history of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S> {
    pub records: Vec<GenerationRecord<S>>,
    pub elapsed: Duration,
    pub termination: Termination,
}

impl<S: PartialEq> Trace<S> {
    pub fn generations(&self) -> usize {
        self.records.len()
    }

    pub fn best_costs(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.best_cost)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].best_cost <= w[0].best_cost)
    }

    /// Equal in everything except wall-clock timings.
    pub fn same_search(&self, other: &Trace<S>) -> bool {
        self.termination == other.termination
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.generation == b.generation && a.best_cost.to_bits() == b.best_cost.to_bits() && a.best == b.best
            })
    }

    /// `generation,best_cost,elapsed_ms`, one row per generation, then a
    /// `# termination: <reason>` line. With `timing` off the elapsed column is
    /// written as 0.
    pub fn write_csv<W: Write>(&self, mut out: W, timing: bool) -> io::Result<()> {
        writeln!(out, "generation,best_cost,elapsed_ms")?;
        for r in &self.records {
            let ms = if timing { r.elapsed.as_secs_f64() * 1e3 } else { 0.0 };
            writeln!(out, "{},{},{:.3}", r.generation, r.best_cost, ms)?;
        }
        writeln!(out, "# termination: {}", self.termination)
    }
}
