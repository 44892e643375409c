//! Destination selection and Monte Carlo estimation of mean hop counts.
//!
//! Trial `t` draws everything (source, level, contact set, destination) from
//! its own stream `hash(seed, t)`. Trials are grouped into fixed-size blocks
//! whose integer hop totals are reduced in block order, so an estimate does
//! not depend on the number of worker threads.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{theoretical_hierarchy, HierarchyPrediction};
use crate::graph::{bfs_tree, ContactSampler, SelectionLaw, SocialGraph};
use crate::grid::{Cell, GridConfig, Point, SpatialLayout};
use crate::rng::{rng_for_item, stream, SimRng};
use crate::{Error, Result};

const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DestinationRule {
    Uniform,
    PowerLaw { beta: f64 },
}

impl DestinationRule {
    pub fn beta(&self) -> Option<f64> {
        match self {
            DestinationRule::Uniform => None,
            DestinationRule::PowerLaw { beta } => Some(*beta),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DestinationRule::PowerLaw { beta } if !(*beta >= 0.0 && beta.is_finite()) => {
                Err(Error::param("beta", format!("must be finite and ≥ 0, got {beta}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LevelPolicy {
    Direct,
    /// Level `L` is drawn with probability `r_weights[L-1]`.
    Hierarchical { r_weights: Vec<f64> },
}

impl LevelPolicy {
    /// The level mix of a hierarchy prediction, truncated to `l_max` levels
    /// and renormalised.
    pub fn from_prediction(pred: &HierarchyPrediction, l_max: usize) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::param("l_max", "need at least one level"));
        }
        let mut r: Vec<f64> = pred.r_weights.iter().take(l_max).copied().collect();
        let total: f64 = r.iter().sum();
        r.iter_mut().for_each(|w| *w /= total);
        Ok(LevelPolicy::Hierarchical { r_weights: r })
    }

    pub fn l_max(&self) -> usize {
        match self {
            LevelPolicy::Direct => 1,
            LevelPolicy::Hierarchical { r_weights } => r_weights.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficModel {
    pub rule: DestinationRule,
    pub policy: LevelPolicy,
}

impl TrafficModel {
    pub fn direct(rule: DestinationRule) -> Self {
        Self {
            rule,
            policy: LevelPolicy::Direct,
        }
    }

    fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        if let LevelPolicy::Hierarchical { r_weights } = &self.policy {
            if r_weights.is_empty() {
                return Err(Error::param("l_max", "need at least one level"));
            }
            if r_weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || r_weights.iter().sum::<f64>() <= 0.0 {
                return Err(Error::param("r_weights", "level weights must be non-negative with positive sum"));
            }
        }
        Ok(())
    }
}

/// Where a source's direct contacts come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContactMode {
    /// Neighbours in the realized graph.
    Realized,
    /// A fresh contact set per trial, drawn from the selection law the graph
    /// was generated with. Its mean is what the exact evaluators compute.
    Resampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Completed trials.
    pub trials: usize,
    /// Trials whose candidate set was empty.
    pub skipped: usize,
    /// Users never drawn as sources because they have no contacts.
    pub excluded_sources: usize,
    pub per_level_means: Option<Vec<f64>>,
}

impl HopEstimate {
    pub fn skip_fraction(&self) -> f64 {
        self.skipped as f64 / (self.trials + self.skipped) as f64
    }
}

/// A graph placed on a grid.
#[derive(Debug, Clone)]
pub struct Scenario<'a> {
    pub graph: &'a SocialGraph,
    pub law: Option<&'a SelectionLaw>,
    pub layout: &'a SpatialLayout,
    pub grid: &'a GridConfig,
    cells: Vec<Cell>,
}

impl<'a> Scenario<'a> {
    pub fn new(graph: &'a SocialGraph, layout: &'a SpatialLayout, grid: &'a GridConfig) -> Result<Self> {
        if graph.n() != layout.len() {
            return Err(Error::param(
                "layout",
                format!("{} positions for {} users", layout.len(), graph.n()),
            ));
        }
        Ok(Self {
            graph,
            law: None,
            layout,
            grid,
            cells: layout.cells(grid),
        })
    }

    /// Attaches the selection law, required by [`ContactMode::Resampled`].
    pub fn with_law(mut self, law: &'a SelectionLaw) -> Result<Self> {
        if law.degrees().len() != self.graph.n() {
            return Err(Error::param("law", "degree sequence and graph sizes differ"));
        }
        self.law = Some(law);
        Ok(self)
    }

    pub fn hops(&self, a: u32, b: u32) -> u32 {
        self.cells[a as usize].l1(&self.cells[b as usize])
    }

    /// Lower clamp of distances under the power-law rule.
    pub fn d_min(&self) -> f64 {
        self.grid.cell_side() / 10.0
    }

    fn pick(&self, rule: &DestinationRule, source: u32, candidates: &[u32], rng: &mut SimRng) -> Option<u32> {
        match rule {
            DestinationRule::Uniform => pick_destination_uniform(candidates, rng),
            DestinationRule::PowerLaw { beta } => pick_destination_powerlaw(
                candidates,
                self.layout.position(source),
                self.layout,
                *beta,
                self.d_min(),
                rng,
            ),
        }
    }
}

/// Uniform draw from `contacts`; `None` when empty.
pub fn pick_destination_uniform<R: Rng + ?Sized>(contacts: &[u32], rng: &mut R) -> Option<u32> {
    if contacts.is_empty() {
        None
    } else {
        Some(contacts[rng.random_range(0..contacts.len())])
    }
}

/// Draw with probability `∝ max(d, d_min)^-β`, `d` the Euclidean distance
/// from `source`; `None` when `contacts` is empty.
pub fn pick_destination_powerlaw<R: Rng + ?Sized>(
    contacts: &[u32],
    source: Point,
    layout: &SpatialLayout,
    beta: f64,
    d_min: f64,
    rng: &mut R,
) -> Option<u32> {
    match contacts.len() {
        0 => return None,
        1 => return Some(contacts[0]),
        _ => {}
    }
    let logs: Vec<f64> = contacts
        .iter()
        .map(|&v| -beta * source.distance(&layout.position(v)).max(d_min).ln())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (w, &v) in weights.iter().zip(contacts) {
        if u < *w {
            return Some(v);
        }
        u -= w;
    }
    contacts.last().copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub trials: usize,
    pub seed: u64,
    pub mode: ContactMode,
    /// Restricts sources to this set (still excluding users without contacts).
    pub sources: Option<Vec<u32>>,
}

impl EstimateOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            mode: ContactMode::Realized,
            sources: None,
        }
    }

    pub fn mode(mut self, mode: ContactMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn sources(mut self, sources: Vec<u32>) -> Self {
        self.sources = Some(sources);
        self
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    count: u64,
    sum: u64,
    sum_sq: u128,
}

impl Tally {
    fn add(&mut self, x: u64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += u128::from(x) * u128::from(x);
    }

    fn merge(&mut self, other: &Tally) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.mean();
        let var = ((self.sum_sq as f64) - n * mean * mean).max(0.0) / (n - 1.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
struct BlockResult {
    all: Tally,
    levels: Vec<Tally>,
    skipped: usize,
}

/// Monte Carlo `E[X]` over the realized graph's contacts.
pub fn estimate_mean_hops(scn: &Scenario<'_>, model: &TrafficModel, trials: usize, seed: u64) -> Result<HopEstimate> {
    estimate_mean_hops_with(scn, model, &EstimateOptions::new(trials, seed))
}

/// Monte Carlo `E[X]`: each trial draws a source uniformly among users with
/// contacts, a level (hierarchical policy only), then a destination among
/// that level's contacts. Hierarchical trials cost the sum of the grid hops
/// of each social edge along the BFS path.
pub fn estimate_mean_hops_with(scn: &Scenario<'_>, model: &TrafficModel, opts: &EstimateOptions) -> Result<HopEstimate> {
    model.validate()?;
    if opts.trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let hierarchical = matches!(model.policy, LevelPolicy::Hierarchical { .. });
    if opts.mode == ContactMode::Resampled && hierarchical {
        return Err(Error::param("mode", "resampled contacts are defined for direct traffic only"));
    }
    let law = match opts.mode {
        ContactMode::Resampled => Some(
            scn.law
                .ok_or_else(|| Error::param("mode", "resampled contacts need the selection law"))?,
        ),
        ContactMode::Realized => None,
    };
    let has_contacts = |v: u32| match law {
        Some(law) => law.set_size(law.degrees().get(v as usize)) > 0,
        None => scn.graph.degree(v) > 0,
    };
    let candidates: Vec<u32> = match &opts.sources {
        Some(s) => s.clone(),
        None => (0..scn.graph.n() as u32).collect(),
    };
    if let Some(&bad) = candidates.iter().find(|&&v| v as usize >= scn.graph.n()) {
        return Err(Error::param("sources", format!("{bad} out of range")));
    }
    let eligible: Vec<u32> = candidates.iter().copied().filter(|&v| has_contacts(v)).collect();
    let excluded_sources = candidates.len() - eligible.len();
    if eligible.is_empty() {
        return Err(Error::param("graph", "no eligible source has any contact"));
    }

    let samplers: HashMap<u32, ContactSampler<'_>> = match law {
        Some(law) => {
            let mut degrees: Vec<u32> = eligible.iter().map(|&v| law.degrees().get(v as usize)).collect();
            degrees.sort_unstable();
            degrees.dedup();
            degrees.into_par_iter().map(|q| (q, law.sampler(q))).collect()
        }
        None => HashMap::new(),
    };

    let (cumulative, l_max) = match &model.policy {
        LevelPolicy::Direct => (Vec::new(), 1),
        LevelPolicy::Hierarchical { r_weights } => {
            let total: f64 = r_weights.iter().sum();
            let mut acc = 0.0;
            let cum: Vec<f64> = r_weights
                .iter()
                .map(|w| {
                    acc += w / total;
                    acc
                })
                .collect();
            (cum, r_weights.len())
        }
    };

    let blocks = opts.trials.div_ceil(BLOCK);
    let results: Vec<BlockResult> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut out = BlockResult {
                levels: vec![Tally::default(); l_max],
                ..Default::default()
            };
            for t in b * BLOCK..((b + 1) * BLOCK).min(opts.trials) {
                let mut rng = rng_for_item(opts.seed, stream::TRAFFIC, t as u64);
                let s = eligible[rng.random_range(0..eligible.len())];
                let level = if l_max == 1 {
                    1
                } else {
                    let u: f64 = rng.random();
                    cumulative.partition_point(|&c| c <= u).min(l_max - 1) + 1
                };
                let cost = if level == 1 && !hierarchical {
                    let resampled;
                    let contacts: &[u32] = match law {
                        Some(law) => {
                            resampled = samplers[&law.degrees().get(s as usize)].sample(&mut rng);
                            &resampled
                        }
                        None => scn.graph.neighbors(s),
                    };
                    scn.pick(&model.rule, s, contacts, &mut rng).map(|d| u64::from(scn.hops(s, d)))
                } else {
                    hierarchical_cost(scn, &model.rule, s, level, &mut rng)
                };
                match cost {
                    Some(c) => {
                        out.all.add(c);
                        out.levels[level - 1].add(c);
                    }
                    None => out.skipped += 1,
                }
            }
            out
        })
        .collect();

    let mut all = Tally::default();
    let mut levels = vec![Tally::default(); l_max];
    let mut skipped = 0;
    for r in &results {
        all.merge(&r.all);
        for (a, b) in levels.iter_mut().zip(&r.levels) {
            a.merge(b);
        }
        skipped += r.skipped;
    }
    if all.count == 0 {
        return Err(Error::param("trials", "every trial had an empty candidate set"));
    }
    Ok(HopEstimate {
        mean: all.mean(),
        stderr: all.stderr(),
        trials: all.count as usize,
        skipped,
        excluded_sources,
        per_level_means: hierarchical.then(|| {
            levels
                .iter()
                .map(|t| if t.count == 0 { f64::NAN } else { t.mean() })
                .collect()
        }),
    })
}

/// Cost of one level-`level` delivery from `s`, or `None` when `s` has no
/// contact at that level.
fn hierarchical_cost(scn: &Scenario<'_>, rule: &DestinationRule, s: u32, level: usize, rng: &mut SimRng) -> Option<u64> {
    let tree = bfs_tree(scn.graph, s, level).ok()?;
    let set = tree.levels.get(level - 1)?;
    let dest = scn.pick(rule, s, set, rng)?;
    Some(path_cost(scn, &tree.path_to(dest)?))
}

fn path_cost(scn: &Scenario<'_>, path: &[u32]) -> u64 {
    path.windows(2).map(|w| u64::from(scn.hops(w[0], w[1]))).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStat {
    pub level: usize,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchicalEstimate {
    /// `E^(H) = Σ_L R^(L) E^(L)` over observed levels, weights renormalised.
    pub mean: f64,
    pub stderr: f64,
    pub e1: f64,
    pub levels: Vec<LevelStat>,
    /// `E^(L) / (L · E^(1))` for each observed level.
    pub ratios: Vec<f64>,
    /// Sum of the prescribed `R^(L)` over the levels that were observed.
    pub coverage: f64,
    pub prediction: HierarchyPrediction,
    pub trials: usize,
    pub excluded_sources: usize,
}

impl HierarchicalEstimate {
    pub fn inflation(&self) -> f64 {
        self.mean / self.e1
    }
}

/// `E^(H)[X]` with `R^(L)` from [`theoretical_hierarchy`].
///
/// Every trial runs one BFS from a uniform source and delivers one message
/// to each level it reaches, so all levels are estimated from the same
/// trials. Levels that no trial reaches are dropped and the remaining
/// weights renormalised; `coverage` reports the weight that was kept.
pub fn estimate_hierarchical_hops(
    scn: &Scenario<'_>,
    rule: &DestinationRule,
    gamma: f64,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<HierarchicalEstimate> {
    let prediction = theoretical_hierarchy(gamma, epsilon, scn.graph.n())?;
    estimate_hierarchy_with(scn, rule, prediction, trials, seed)
}

/// As [`estimate_hierarchical_hops`] with an explicit level mix.
pub fn estimate_hierarchy_with(
    scn: &Scenario<'_>,
    rule: &DestinationRule,
    prediction: HierarchyPrediction,
    trials: usize,
    seed: u64,
) -> Result<HierarchicalEstimate> {
    rule.validate()?;
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let eligible: Vec<u32> = (0..scn.graph.n() as u32).filter(|&v| scn.graph.degree(v) > 0).collect();
    if eligible.is_empty() {
        return Err(Error::param("graph", "no user has any contact"));
    }
    let l_max = prediction.l_max;
    let blocks = trials.div_ceil(BLOCK);
    let results: Vec<Vec<Tally>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut levels: Vec<Tally> = Vec::new();
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let mut rng = rng_for_item(seed, stream::LEVELS, t as u64);
                let s = eligible[rng.random_range(0..eligible.len())];
                let tree = bfs_tree(scn.graph, s, l_max).expect("source in range");
                if levels.len() < tree.levels.len() {
                    levels.resize(tree.levels.len(), Tally::default());
                }
                for (l, set) in tree.levels.iter().enumerate() {
                    let dest = scn.pick(rule, s, set, &mut rng).expect("levels are non-empty");
                    let path = tree.path_to(dest).expect("reached");
                    levels[l].add(path_cost(scn, &path));
                }
            }
            levels
        })
        .collect();
    let depth = results.iter().map(Vec::len).max().unwrap_or(0);
    let mut levels = vec![Tally::default(); depth];
    for r in &results {
        for (a, b) in levels.iter_mut().zip(r) {
            a.merge(b);
        }
    }
    let stats: Vec<LevelStat> = levels
        .iter()
        .enumerate()
        .map(|(l, t)| LevelStat {
            level: l + 1,
            mean: t.mean(),
            stderr: t.stderr(),
            samples: t.count as usize,
        })
        .collect();
    let e1 = stats[0].mean;
    let coverage: f64 = prediction.r_weights.iter().take(depth).sum();
    let mut mean = 0.0;
    let mut var = 0.0;
    for (s, r) in stats.iter().zip(&prediction.r_weights) {
        let w = r / coverage;
        mean += w * s.mean;
        var += (w * s.stderr).powi(2);
    }
    Ok(HierarchicalEstimate {
        mean,
        stderr: var.sqrt(),
        e1,
        ratios: stats.iter().map(|s| s.mean / (s.level as f64 * e1)).collect(),
        levels: stats,
        coverage,
        prediction,
        trials,
        excluded_sources: scn.graph.n() - eligible.len(),
    })
}
