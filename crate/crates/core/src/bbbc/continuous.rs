use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{BbbcConfig, GenerationRecord, Termination, Trace};
use crate::error::{Error, Result};

/// Inverse-fitness weighted mean: `x_c = sum(x_i / f_i) / sum(1 / f_i)`.
///
/// Lower cost means more weight. Every fitness must be strictly positive.
pub fn center_of_mass(points: &[Vec<f64>], fitnesses: &[f64]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::invalid("center of mass of an empty population"));
    }
    if points.len() != fitnesses.len() {
        return Err(Error::invalid("one fitness per point is required"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("points differ in dimension"));
    }
    if let Some(f) = fitnesses.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::invalid(format!("fitness {f} must be finite and positive")));
    }
    let mut num = vec![0.0; dim];
    let mut den = 0.0;
    for (p, f) in points.iter().zip(fitnesses) {
        let w = 1.0 / f;
        for (acc, x) in num.iter_mut().zip(p) {
            *acc += x * w;
        }
        den += w;
    }
    Ok(num.into_iter().map(|n| n / den).collect())
}

#[derive(Clone, Debug)]
pub struct ContinuousOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub trace: Trace<Vec<f64>>,
}

/// Minimizes `objective` over the box `bounds`.
///
/// Generation 1 is uniform over the box. Generation `k >= 2` samples
/// `x_c + r * (upper - lower) / k^shrink_exponent` per dimension with `r`
/// standard normal, clamped to the box, where `x_c` is the center of mass of
/// the previous generation (or its elite when `elite_as_center`). The elite
/// replaces one sample in every generation.
pub fn optimize_continuous<F>(mut objective: F, bounds: &[(f64, f64)], config: &BbbcConfig) -> Result<ContinuousOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    if bounds.is_empty() {
        return Err(Error::invalid("at least one dimension is required"));
    }
    if let Some(b) = bounds.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::invalid(format!("bad bounds {b:?}")));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = |x: &[f64]| -> Result<f64> {
        let v = objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { point: x.to_vec(), value: v })
        }
    };

    let n = config.population_size;
    let mut points: Vec<Vec<f64>> = (0..n)
        .map(|_| bounds.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) }).collect())
        .collect();
    let mut values = points.iter().map(|p| eval(p)).collect::<Result<Vec<_>>>()?;
    let mut elite = argmin(&values);
    let (mut best_point, mut best_value) = (points[elite].clone(), values[elite]);

    let mut records = vec![GenerationRecord {
        generation: 1,
        best_cost: best_value,
        elapsed: start.elapsed(),
        best: best_point.clone(),
    }];
    let mut termination = Termination::GenerationsExhausted;
    let mut stale = 0;

    for generation in 2..=config.max_generations {
        if over_budget(config, start) {
            termination = Termination::TimeBudget;
            break;
        }
        if config.stagnation_limit.is_some_and(|limit| stale >= limit) {
            termination = Termination::Stagnation;
            break;
        }
        let center = if config.elite_as_center {
            points[elite].clone()
        } else {
            center_of_mass(&points, &positive_fitness(&values))?
        };
        let scale = (generation as f64).powf(config.shrink_exponent);
        let mut next = Vec::with_capacity(n);
        next.push(best_point.clone());
        for _ in 1..n {
            let p: Vec<f64> = bounds
                .iter()
                .zip(&center)
                .map(|(&(lo, hi), &c)| {
                    let r: f64 = rng.sample(StandardNormal);
                    (c + r * (hi - lo) / scale).clamp(lo, hi)
                })
                .collect();
            next.push(p);
        }
        let mut next_values = Vec::with_capacity(n);
        next_values.push(best_value);
        for p in &next[1..] {
            next_values.push(eval(p)?);
        }
        points = next;
        values = next_values;
        elite = argmin(&values);
        if values[elite] < best_value {
            best_value = values[elite];
            best_point = points[elite].clone();
            stale = 0;
        } else {
            stale += 1;
        }
        records.push(GenerationRecord {
            generation,
            best_cost: best_value,
            elapsed: start.elapsed(),
            best: best_point.clone(),
        });
    }

    Ok(ContinuousOutcome { best_point, best_value, trace: Trace { records, elapsed: start.elapsed(), termination } })
}

fn over_budget(config: &BbbcConfig, start: Instant) -> bool {
    config.time_budget.is_some_and(|b| start.elapsed() >= b)
}

/// First index of the minimum.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Objective values as used by the center of mass. Values are taken as-is
/// when all positive; otherwise they are shifted so the best candidate sits at
/// the population's spread (or 1 when the population is flat).
fn positive_fitness(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        return values.to_vec();
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if max > min { max - min } else { 1.0 };
    values.iter().map(|v| v - min + spread).collect()
}
