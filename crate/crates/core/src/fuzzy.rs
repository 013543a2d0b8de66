//! Mamdani inference for the integrated link cost.
//!
//! Four crisp inputs (throughput, delay, jitter, residual energy) are fuzzified
//! into Low/Medium/High degrees, combined by an 81-rule base with min
//! conjunction, clipped onto five output terms, max-aggregated and reduced to a
//! crisp cost in `(0, 1)` by a sampled centroid.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::topology::{Link, LinkMetrics, Node, Topology};

/// Default number of centroid samples over the output universe.
pub const DEFAULT_RESOLUTION: usize = 1001;

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum MembershipFunction {
    /// 1 up to `full`, falling linearly to 0 at `zero`.
    LeftShoulder {
        full: f64,
        zero: f64,
    },
    Triangle {
        left: f64,
        peak: f64,
        right: f64,
    },
    /// 0 up to `zero`, rising linearly to 1 at `full`.
    RightShoulder {
        zero: f64,
        full: f64,
    },
}

impl MembershipFunction {
    pub fn left_shoulder(full: f64, zero: f64) -> Result<Self> {
        check_increasing(&[full, zero])?;
        Ok(MembershipFunction::LeftShoulder { full, zero })
    }

    pub fn triangle(left: f64, peak: f64, right: f64) -> Result<Self> {
        check_increasing(&[left, peak, right])?;
        Ok(MembershipFunction::Triangle { left, peak, right })
    }

    pub fn right_shoulder(zero: f64, full: f64) -> Result<Self> {
        check_increasing(&[zero, full])?;
        Ok(MembershipFunction::RightShoulder { zero, full })
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            MembershipFunction::LeftShoulder { full, zero } => vec![full, zero],
            MembershipFunction::Triangle { left, peak, right } => vec![left, peak, right],
            MembershipFunction::RightShoulder { zero, full } => vec![zero, full],
        }
    }

    /// Abscissa where the degree is 1 (the first one, for shoulders).
    pub fn peak(&self) -> f64 {
        match *self {
            MembershipFunction::LeftShoulder { full, .. } => full,
            MembershipFunction::Triangle { peak, .. } => peak,
            MembershipFunction::RightShoulder { full, .. } => full,
        }
    }

    #[inline]
    pub fn degree(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::LeftShoulder { full, zero } => {
                if x <= full {
                    1.0
                } else if x >= zero {
                    0.0
                } else {
                    (zero - x) / (zero - full)
                }
            }
            MembershipFunction::Triangle { left, peak, right } => {
                if x <= left || x >= right {
                    0.0
                } else if x == peak {
                    1.0
                } else if x < peak {
                    (x - left) / (peak - left)
                } else {
                    (right - x) / (right - peak)
                }
            }
            MembershipFunction::RightShoulder { zero, full } => {
                if x >= full {
                    1.0
                } else if x <= zero {
                    0.0
                } else {
                    (x - zero) / (full - zero)
                }
            }
        }
    }
}

fn check_increasing(points: &[f64]) -> Result<()> {
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("breakpoints {points:?} must be strictly increasing")));
    }
    Ok(())
}

/// Input term, ordered by rank (0, 1, 2).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn rank(self) -> usize {
        self as usize
    }
}

/// Output term, ordered by rank (0..=4).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostTerm {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl CostTerm {
    pub const ALL: [CostTerm; 5] =
        [CostTerm::VeryLow, CostTerm::Low, CostTerm::Medium, CostTerm::High, CostTerm::VeryHigh];

    pub fn rank(self) -> usize {
        self as usize
    }
}

macro_rules! term_names {
    ($ty:ty { $($variant:ident => $name:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $name),* })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok(<$ty>::$variant),)*
                    other => Err(format!("unknown term {other:?}")),
                }
            }
        }
    };
}

term_names!(Level { Low => "Low", Medium => "Medium", High => "High" });
term_names!(CostTerm {
    VeryLow => "VeryLow",
    Low => "Low",
    Medium => "Medium",
    High => "High",
    VeryHigh => "VeryHigh",
});

/// A crisp input with three terms spread over `[min, max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyVariable {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub terms: [MembershipFunction; 3],
}

impl FuzzyVariable {
    /// Low/Medium/High peaking at 0%, 50% and 100% of the universe.
    pub fn three_term(name: &str, min: f64, max: f64) -> Result<Self> {
        let mid = min + (max - min) / 2.0;
        Ok(FuzzyVariable {
            name: name.to_string(),
            min,
            max,
            terms: [
                MembershipFunction::left_shoulder(min, mid)?,
                MembershipFunction::triangle(min, mid, max)?,
                MembershipFunction::right_shoulder(mid, max)?,
            ],
        })
    }

    /// Degrees of Low, Medium, High. Out-of-universe values clamp to the bounds.
    pub fn fuzzify(&self, value: f64) -> Result<[f64; 3]> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("{} = {value}", self.name)));
        }
        let x = value.clamp(self.min, self.max);
        Ok(self.terms.map(|t| t.degree(x)))
    }
}

/// The cost universe `[0, 1]` with five evenly spaced terms.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputVariable {
    pub terms: [MembershipFunction; 5],
}

impl Default for OutputVariable {
    fn default() -> Self {
        let tri = |a, b, c| MembershipFunction::Triangle { left: a, peak: b, right: c };
        OutputVariable {
            terms: [
                MembershipFunction::LeftShoulder { full: 0.0, zero: 0.25 },
                tri(0.0, 0.25, 0.5),
                tri(0.25, 0.5, 0.75),
                tri(0.5, 0.75, 1.0),
                MembershipFunction::RightShoulder { zero: 0.75, full: 1.0 },
            ],
        }
    }
}

/// One row of the rule base. Antecedent order is throughput, delay, jitter, energy.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: [Level; 4],
    pub consequent: CostTerm,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [t, d, j, e] = self.antecedent;
        write!(f, "if T={t} D={d} J={j} E={e} then C={}", self.consequent)
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Rule, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let [if_, t, d, j, e, then, c] = words[..] else {
            return Err(format!("expected 7 words, found {}", words.len()));
        };
        if if_ != "if" || then != "then" {
            return Err("expected `if ... then ...`".into());
        }
        let term = |word: &str, key: &str| -> std::result::Result<Level, String> {
            word.strip_prefix(key).ok_or_else(|| format!("expected {key}<term>, found {word:?}"))?.parse()
        };
        let antecedent = [term(t, "T=")?, term(d, "D=")?, term(j, "J=")?, term(e, "E=")?];
        let consequent = c.strip_prefix("C=").ok_or_else(|| format!("expected C=<term>, found {c:?}"))?.parse()?;
        Ok(Rule { antecedent, consequent })
    }
}

const RULE_COUNT: usize = 81;

fn rule_index(a: [Level; 4]) -> usize {
    a.iter().fold(0, |acc, l| acc * 3 + l.rank())
}

fn antecedent_at(index: usize) -> [Level; 4] {
    let mut a = [Level::Low; 4];
    let mut rest = index;
    for slot in a.iter_mut().rev() {
        *slot = Level::ALL[rest % 3];
        rest /= 3;
    }
    a
}

/// Complete, monotone rule base: exactly one consequent per antecedent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleBase {
    consequents: [CostTerm; RULE_COUNT],
}

impl Default for RuleBase {
    fn default() -> Self {
        RuleBase::generated()
    }
}

impl RuleBase {
    /// Rule base derived from a badness score.
    ///
    /// `b = (2 - rank T) + rank D + rank J + (2 - rank E)` lies in `0..=8`.
    /// Halves round away from the center so `term(8 - b) = 4 - term(b)`.
    pub fn generated() -> Self {
        let mut consequents = [CostTerm::Medium; RULE_COUNT];
        for (i, slot) in consequents.iter_mut().enumerate() {
            let [t, d, j, e] = antecedent_at(i);
            let badness = (2 - t.rank()) + d.rank() + j.rank() + (2 - e.rank());
            let term = if badness < 4 { badness / 2 } else { badness.div_ceil(2) };
            *slot = CostTerm::ALL[term];
        }
        RuleBase { consequents }
    }

    pub fn from_rules(rules: &[Rule]) -> Result<Self> {
        let mut slots: [Option<CostTerm>; RULE_COUNT] = [None; RULE_COUNT];
        for rule in rules {
            let slot = &mut slots[rule_index(rule.antecedent)];
            if slot.is_some() {
                return Err(Error::RuleBase(format!("duplicate antecedent in `{rule}`")));
            }
            *slot = Some(rule.consequent);
        }
        let mut consequents = [CostTerm::Medium; RULE_COUNT];
        for (i, slot) in slots.iter().enumerate() {
            consequents[i] = slot.ok_or_else(|| {
                let [t, d, j, e] = antecedent_at(i);
                Error::RuleBase(format!("no rule for T={t} D={d} J={j} E={e}"))
            })?;
        }
        let base = RuleBase { consequents };
        if let Some((worse, better)) = base.monotonicity_violation() {
            return Err(Error::RuleBase(format!(
                "not monotone: `{}` should not be worse than `{}`",
                base.rule(better),
                base.rule(worse)
            )));
        }
        Ok(base)
    }

    pub fn consequent(&self, antecedent: [Level; 4]) -> CostTerm {
        self.consequents[rule_index(antecedent)]
    }

    fn rule(&self, index: usize) -> Rule {
        Rule { antecedent: antecedent_at(index), consequent: self.consequents[index] }
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule> + '_ {
        (0..RULE_COUNT).map(|i| self.rule(i))
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violation().is_none()
    }

    /// First `(base, improved)` pair where improving one input worsens the consequent.
    fn monotonicity_violation(&self) -> Option<(usize, usize)> {
        // Throughput and energy improve upward, delay and jitter downward.
        const UP: [bool; 4] = [true, false, false, true];
        for i in 0..RULE_COUNT {
            let a = antecedent_at(i);
            for (k, &up) in UP.iter().enumerate() {
                let r = a[k].rank();
                let better = if up { r + 1 } else { r.wrapping_sub(1) };
                if better < 3 {
                    let mut b = a;
                    b[k] = Level::ALL[better];
                    let j = rule_index(b);
                    if self.consequents[j] > self.consequents[i] {
                        return Some((i, j));
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for RuleBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in self.rules() {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

impl FromStr for RuleBase {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            rules.push(line.parse::<Rule>().map_err(|m| Error::parse(i + 1, m))?);
        }
        RuleBase::from_rules(&rules)
    }
}

/// Crisp inputs to one inference.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CostInputs {
    pub throughput: f64,
    pub delay_ms: f64,
    pub jitter_ms: f64,
    pub energy: f64,
}

impl CostInputs {
    pub fn new(metrics: &LinkMetrics, energy: f64) -> Self {
        CostInputs { throughput: metrics.throughput, delay_ms: metrics.delay_ms, jitter_ms: metrics.jitter_ms, energy }
    }
}

/// Output membership curve sampled uniformly over `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    samples: Vec<f64>,
}

impl Aggregate {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("an aggregate needs at least two samples"));
        }
        if samples.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("membership samples must lie in [0, 1]"));
        }
        Ok(Aggregate { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        i as f64 / (self.samples.len() - 1) as f64
    }
}

/// Centroid of the sampled aggregate.
pub fn defuzzify(aggregate: &Aggregate) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &m) in aggregate.samples.iter().enumerate() {
        num += aggregate.abscissa(i) * m;
        den += m;
    }
    if den <= 0.0 {
        return Err(Error::EmptyAggregate);
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyInferenceSystem {
    pub throughput: FuzzyVariable,
    pub delay: FuzzyVariable,
    pub jitter: FuzzyVariable,
    pub energy: FuzzyVariable,
    pub output: OutputVariable,
    pub rules: RuleBase,
    pub resolution: usize,
}

impl Default for FuzzyInferenceSystem {
    fn default() -> Self {
        FuzzyInferenceSystem::with_rules(RuleBase::generated())
    }
}

impl FuzzyInferenceSystem {
    /// Default universes (throughput `[0,1]`, delay `[0,100]` ms, jitter
    /// `[0,20]` ms, energy `[0,1]`) with the given rules.
    pub fn with_rules(rules: RuleBase) -> Self {
        let var = |name, lo, hi| FuzzyVariable::three_term(name, lo, hi).expect("static universe");
        FuzzyInferenceSystem {
            throughput: var("throughput", 0.0, 1.0),
            delay: var("delay", 0.0, 100.0),
            jitter: var("jitter", 0.0, 20.0),
            energy: var("energy", 0.0, 1.0),
            output: OutputVariable::default(),
            rules,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    pub fn fuzzify_all(&self, inputs: &CostInputs) -> Result<[[f64; 3]; 4]> {
        Ok([
            self.throughput.fuzzify(inputs.throughput)?,
            self.delay.fuzzify(inputs.delay_ms)?,
            self.jitter.fuzzify(inputs.jitter_ms)?,
            self.energy.fuzzify(inputs.energy)?,
        ])
    }

    /// Firing strength per output term: max over rules of the min-conjunction.
    pub fn term_strengths(&self, inputs: &CostInputs) -> Result<[f64; 5]> {
        let degrees = self.fuzzify_all(inputs)?;
        let mut strength = [0.0f64; 5];
        for rule in self.rules.rules() {
            let w = rule.antecedent.iter().zip(&degrees).map(|(level, d)| d[level.rank()]).fold(1.0, f64::min);
            let k = rule.consequent.rank();
            strength[k] = strength[k].max(w);
        }
        Ok(strength)
    }

    /// Clipped consequents, max-aggregated and sampled on the output universe.
    pub fn infer(&self, inputs: &CostInputs) -> Result<Aggregate> {
        let strength = self.term_strengths(inputs)?;
        let n = self.resolution.max(2);
        let samples = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                self.output
                    .terms
                    .iter()
                    .zip(strength)
                    .filter(|(_, w)| *w > 0.0)
                    .map(|(term, w)| term.degree(x).min(w))
                    .fold(0.0, f64::max)
            })
            .collect();
        Ok(Aggregate { samples })
    }

    pub fn evaluate(&self, inputs: &CostInputs) -> Result<f64> {
        defuzzify(&self.infer(inputs)?)
    }

    /// Integrated cost of a link given the relevant endpoint energy.
    pub fn link_cost(&self, metrics: &LinkMetrics, residual_energy: f64) -> Result<f64> {
        metrics.validate()?;
        if !residual_energy.is_finite() {
            return Err(Error::NonFinite(format!("residual energy = {residual_energy}")));
        }
        self.evaluate(&CostInputs::new(metrics, residual_energy))
    }

    /// Undirected cost: uses the weaker endpoint's energy.
    pub fn undirected_link_cost(&self, link: &Link, u: &Node, v: &Node) -> Result<f64> {
        self.link_cost(&link.metrics, u.residual_energy.min(v.residual_energy))
    }

    /// Snapshot with every link's cached cost set from this system.
    pub fn cost_links(&self, topology: &Topology) -> Result<Topology> {
        topology.with_link_costs(|link, u, v| self.undirected_link_cost(link, u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(t: f64, d: f64, j: f64, e: f64) -> CostInputs {
        CostInputs { throughput: t, delay_ms: d, jitter_ms: j, energy: e }
    }

    /// Trapezoid-rule centroid over `n` samples of a closure.
    fn centroid_oracle(mu: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / (n - 1) as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let x = i as f64 * h;
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            num += w * x * mu(x);
            den += w * mu(x);
        }
        num / den
    }

    #[test]
    fn breakpoints_must_increase() {
        assert!(MembershipFunction::triangle(0.0, 0.0, 1.0).is_err());
        assert!(MembershipFunction::left_shoulder(1.0, 0.5).is_err());
        assert!(MembershipFunction::right_shoulder(0.0, f64::NAN).is_err());
    }

    #[test]
    fn fuzzify_anchor_points() {
        let v = FuzzyVariable::three_term("delay", 0.0, 100.0).unwrap();
        assert_eq!(v.fuzzify(0.0).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(v.fuzzify(50.0).unwrap(), [0.0, 1.0, 0.0]);
        assert_eq!(v.fuzzify(100.0).unwrap(), [0.0, 0.0, 1.0]);
        // Midpoint between the Low and Medium peaks: (50-25)/50 and (25-0)/50.
        assert_eq!(v.fuzzify(25.0).unwrap(), [0.5, 0.5, 0.0]);
        assert_eq!(v.fuzzify(-7.0).unwrap(), v.fuzzify(0.0).unwrap());
        assert_eq!(v.fuzzify(130.0).unwrap(), v.fuzzify(100.0).unwrap());
        assert!(matches!(v.fuzzify(f64::NAN), Err(Error::NonFinite(_))));
        assert!(v.fuzzify(f64::INFINITY).is_err());
    }

    #[test]
    fn generated_rule_base_is_complete_and_monotone() {
        let rb = RuleBase::generated();
        assert_eq!(rb.rules().count(), 81);
        assert!(rb.is_monotone());
        let all = |l| [l; 4];
        assert_eq!(rb.consequent(all(Level::Medium)), CostTerm::Medium);
        assert_eq!(rb.consequent([Level::High, Level::Low, Level::Low, Level::High]), CostTerm::VeryLow);
        assert_eq!(rb.consequent([Level::Low, Level::High, Level::High, Level::Low]), CostTerm::VeryHigh);
        // Mirror symmetry: swapping every input to its opposite mirrors the output.
        let flip = |l: Level| Level::ALL[2 - l.rank()];
        for rule in rb.rules() {
            let mirrored = rule.antecedent.map(flip);
            assert_eq!(rb.consequent(mirrored).rank(), 4 - rule.consequent.rank());
        }
    }

    #[test]
    fn rule_dump_round_trips() {
        let rb = RuleBase::generated();
        let text = rb.to_string();
        assert_eq!(text.lines().count(), 81);
        assert_eq!(text.lines().next().unwrap(), "if T=Low D=Low J=Low E=Low then C=Medium");
        assert_eq!(text.parse::<RuleBase>().unwrap(), rb);
    }

    #[test]
    fn rule_loading_rejects_bad_bases() {
        let text = RuleBase::generated().to_string();
        let missing: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(missing.parse::<RuleBase>(), Err(Error::RuleBase(_))));
        let dup = format!("{text}{}\n", text.lines().next().unwrap());
        assert!(matches!(dup.parse::<RuleBase>(), Err(Error::RuleBase(_))));
        let worse = text.replacen(
            "if T=High D=Low J=Low E=High then C=VeryLow",
            "if T=High D=Low J=Low E=High then C=VeryHigh",
            1,
        );
        assert!(matches!(worse.parse::<RuleBase>(), Err(Error::RuleBase(_))));
        assert!(matches!("if T=Hi".parse::<RuleBase>(), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn single_rule_at_full_strength_yields_its_consequent() {
        let fis = FuzzyInferenceSystem::default();
        // T=High, D=Low, J=Low, E=High only.
        let agg = fis.infer(&inputs(1.0, 0.0, 0.0, 1.0)).unwrap();
        for (i, &m) in agg.samples().iter().enumerate() {
            assert_eq!(m, fis.output.terms[0].degree(agg.abscissa(i)));
        }
    }

    #[test]
    fn straddling_inputs_max_two_clipped_consequents() {
        let fis = FuzzyInferenceSystem::default();
        // Throughput 0.25 is Low 0.5 / Medium 0.5, the rest sit at the best corner.
        // (L,L,L,H) has badness 2 -> Low, (M,L,L,H) has badness 1 -> VeryLow.
        let agg = fis.infer(&inputs(0.25, 0.0, 0.0, 1.0)).unwrap();
        let out = &fis.output.terms;
        for (i, &m) in agg.samples().iter().enumerate() {
            let x = agg.abscissa(i);
            let expected = out[0].degree(x).min(0.5).max(out[1].degree(x).min(0.5));
            assert_eq!(m, expected);
        }
        let c = defuzzify(&agg).unwrap();
        let oracle = centroid_oracle(|x| out[0].degree(x).min(0.5).max(out[1].degree(x).min(0.5)), 100_001);
        assert!((c - oracle).abs() < 1e-3, "{c} vs {oracle}");
    }

    #[test]
    fn clamped_inputs_behave_as_bounds() {
        let fis = FuzzyInferenceSystem::default();
        let a = fis.evaluate(&inputs(1.4, -3.0, -1.0, 2.0)).unwrap();
        let b = fis.evaluate(&inputs(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn defuzzify_known_shapes() {
        let sym: Vec<f64> = (0..1001).map(|i| 1.0 - (i as f64 / 1000.0 - 0.5).abs()).collect();
        let c = defuzzify(&Aggregate::from_samples(sym).unwrap()).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        assert_eq!(defuzzify(&Aggregate::from_samples(vec![0.0; 11]).unwrap()), Err(Error::EmptyAggregate));
        assert!(Aggregate::from_samples(vec![0.5]).is_err());
        assert!(Aggregate::from_samples(vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn single_clipped_term_has_its_own_centroid() {
        let out = OutputVariable::default();
        let agg: Vec<f64> = (0..1001).map(|i| out.terms[3].degree(i as f64 / 1000.0)).collect();
        let c = defuzzify(&Aggregate::from_samples(agg).unwrap()).unwrap();
        assert!((c - 0.75).abs() < 1e-12);
        let agg: Vec<f64> = (0..1001).map(|i| out.terms[0].degree(i as f64 / 1000.0)).collect();
        let c = defuzzify(&Aggregate::from_samples(agg).unwrap()).unwrap();
        // Continuous centroid of the 0..0.25 ramp is 0.25/3.
        assert!((c - 0.25 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn two_term_aggregate_matches_fine_integration() {
        let out = OutputVariable::default();
        let mu = |x: f64| out.terms[1].degree(x).min(0.3).max(out.terms[3].degree(x).min(0.8));
        let agg: Vec<f64> = (0..1001).map(|i| mu(i as f64 / 1000.0)).collect();
        let c = defuzzify(&Aggregate::from_samples(agg).unwrap()).unwrap();
        let oracle = centroid_oracle(mu, 1_000_001);
        assert!((c - oracle).abs() < 1e-4, "{c} vs {oracle}");
    }

    #[test]
    fn link_cost_extremes_and_midpoint() {
        let fis = FuzzyInferenceSystem::default();
        let out = &fis.output.terms;
        let centroid_of = |k: usize| {
            let agg: Vec<f64> = (0..1001).map(|i| out[k].degree(i as f64 / 1000.0)).collect();
            defuzzify(&Aggregate::from_samples(agg).unwrap()).unwrap()
        };
        let best = fis.link_cost(&LinkMetrics::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let worst = fis.link_cost(&LinkMetrics::new(0.0, 100.0, 20.0), 0.0).unwrap();
        assert_eq!(best, centroid_of(0));
        assert_eq!(worst, centroid_of(4));
        // Hand sum over the 1001-point grid: 10.4165 / 125.5.
        assert!((best - 0.083).abs() < 1e-12, "golden best-case cost {best}");
        assert!((best + worst - 1.0).abs() < 1e-12);
        let mid = fis.link_cost(&LinkMetrics::new(0.5, 50.0, 10.0), 0.5).unwrap();
        assert!((mid - 0.5).abs() < 1e-9, "{mid}");
        assert!(fis.link_cost(&LinkMetrics::new(2.0, 1.0, 1.0), 0.5).is_err());
        assert!(fis.link_cost(&LinkMetrics::new(0.5, 1.0, 1.0), f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn fuzzify_degrees_are_valid(v in -50.0f64..150.0) {
            let var = FuzzyVariable::three_term("delay", 0.0, 100.0).unwrap();
            let d = var.fuzzify(v).unwrap();
            prop_assert!(d.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!(d.iter().any(|&x| x > 0.0));
            // Low and High never overlap.
            prop_assert!(d[0] == 0.0 || d[2] == 0.0);
        }

        #[test]
        fn link_cost_is_bounded_and_deterministic(
            t in 0.0f64..=1.0, d in 0.0f64..=100.0, j in 0.0f64..=20.0, e in 0.0f64..=1.0
        ) {
            let fis = FuzzyInferenceSystem::default();
            let m = LinkMetrics::new(t, d, j);
            let c = fis.link_cost(&m, e).unwrap();
            prop_assert!(c > 0.08 && c < 0.92, "{}", c);
            prop_assert_eq!(c.to_bits(), fis.link_cost(&m, e).unwrap().to_bits());
        }

        #[test]
        fn centroid_agrees_with_finer_resolution(w in proptest::array::uniform5(0.0f64..=1.0)) {
            prop_assume!(w.iter().any(|&x| x > 1e-3));
            let out = OutputVariable::default();
            let mu = |x: f64| out.terms.iter().zip(w).map(|(t, w)| t.degree(x).min(w)).fold(0.0, f64::max);
            let coarse: Vec<f64> = (0..1001).map(|i| mu(i as f64 / 1000.0)).collect();
            let c = defuzzify(&Aggregate::from_samples(coarse).unwrap()).unwrap();
            let fine: Vec<f64> = (0..10_001).map(|i| mu(i as f64 / 10_000.0)).collect();
            let f = defuzzify(&Aggregate::from_samples(fine).unwrap()).unwrap();
            prop_assert!((c - f).abs() < 1e-3);
        }
    }
}
