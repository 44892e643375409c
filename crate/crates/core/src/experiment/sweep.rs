//! Sweep execution.
//!
//! Points run concurrently; a single writer emits records in config order as
//! soon as each prefix of the sweep is complete. Graphs, layouts and grids
//! are shared between points with the same `(n, γ, ε, seed)`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;

use super::config::{ExperimentConfig, PolicyKind};
use super::record::{ExperimentRecord, OutputFormat, RecordWriter, KBAR_LEVELS, SCHEMA_VERSION};
use crate::capacity::{
    capacity_from_hops, hierarchical_capacity, level_degree, theoretical_direct, ReductionRegime,
};
use crate::graph::{generate, mean_level_degrees, FractalParams, GeneratedGraph};
use crate::grid::{grid_config, place_nodes, GridConfig, SpatialLayout};
use crate::rng::{rng_for, stream};
use crate::traffic::{estimate_hierarchical_hops, estimate_mean_hops, DestinationRule, Scenario, TrafficModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub rule: DestinationRule,
    pub policy: PolicyKind,
    pub seed: u64,
}

impl SweepPoint {
    pub fn id(&self) -> String {
        let rule = match self.rule {
            DestinationRule::Uniform => "uniform".to_string(),
            DestinationRule::PowerLaw { beta } => format!("beta{beta}"),
        };
        let policy = match self.policy {
            PolicyKind::Direct => "direct",
            PolicyKind::Hierarchical => "hier",
        };
        format!("n{}-g{}-e{}-{rule}-{policy}-s{}", self.n, self.gamma, self.epsilon, self.seed)
    }

    fn world_key(&self) -> WorldKey {
        (self.n, self.gamma.to_bits(), self.epsilon.to_bits(), self.seed)
    }
}

/// Points in output order: seed, γ, ε, n, policy, then rule.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        for &gamma in &cfg.gamma {
            for &epsilon in &cfg.epsilon {
                for &n in &cfg.n {
                    for &policy in &cfg.policies {
                        for rule in cfg.rules() {
                            out.push(SweepPoint {
                                n,
                                gamma,
                                epsilon,
                                rule,
                                policy,
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

type WorldKey = (usize, u64, u64, u64);

/// Everything a sweep point needs besides its traffic model.
pub struct World {
    pub generated: GeneratedGraph,
    pub layout: SpatialLayout,
    pub grid: GridConfig,
    pub k_bar_empirical: [f64; KBAR_LEVELS],
}

impl World {
    pub fn build(n: usize, gamma: f64, epsilon: f64, seed: u64, cfg: &ExperimentConfig) -> Result<Self> {
        let params = FractalParams::new(n, gamma, epsilon, seed)?;
        let generated = generate(&params)?;
        let layout = place_nodes(n, seed)?;
        let grid = grid_config(n, cfg.c_r, cfg.c1, cfg.delta)?;
        let sources: Option<Vec<u32>> = (cfg.kbar_sources > 0 && cfg.kbar_sources < n).then(|| {
            let mut rng = rng_for(seed, stream::LEVELS);
            let mut s: Vec<u32> = index::sample(&mut rng, n, cfg.kbar_sources)
                .iter()
                .map(|i| i as u32)
                .collect();
            s.sort_unstable();
            s
        });
        let means = mean_level_degrees(&generated.graph, KBAR_LEVELS, sources.as_deref());
        let mut k_bar_empirical = [0.0; KBAR_LEVELS];
        k_bar_empirical.copy_from_slice(&means);
        Ok(Self {
            generated,
            layout,
            grid,
            k_bar_empirical,
        })
    }
}

/// Computes one record.
pub fn run_point(point: &SweepPoint, world: &World, cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let n = point.n;
    let scn = Scenario::new(&world.generated.graph, &world.layout, &world.grid)?;
    let theory = theoretical_direct(n, point.rule.beta())?;
    let mut k_bar_theory = [0.0; KBAR_LEVELS];
    for (l, k) in k_bar_theory.iter_mut().enumerate() {
        *k = level_degree(point.gamma, point.epsilon, l + 1);
    }
    let mut record = ExperimentRecord {
        schema: SCHEMA_VERSION,
        experiment_id: point.id(),
        n,
        gamma: point.gamma,
        epsilon: point.epsilon,
        beta: point.rule.beta(),
        level_policy: "direct",
        l_max: 1,
        trials: 0,
        seed: point.seed,
        r_n: world.grid.r_n(),
        cell_side: world.grid.cell_side(),
        mean_hops: 0.0,
        stderr: 0.0,
        skip_fraction: 0.0,
        capacity_estimate: None,
        theory_hop_exponent: theory.hop_exponent,
        theory_capacity: theory.capacity.eval(n),
        e1_hops: None,
        level_coverage: None,
        excluded_sources: 0,
        k_bar_empirical: world.k_bar_empirical,
        k_bar_theory,
        wall_time_ms: 0,
    };
    match point.policy {
        PolicyKind::Direct => {
            let est = estimate_mean_hops(&scn, &TrafficModel::direct(point.rule), cfg.trials, point.seed)?;
            record.trials = est.trials;
            record.mean_hops = est.mean;
            record.stderr = est.stderr;
            record.skip_fraction = est.skip_fraction();
            record.excluded_sources = est.excluded_sources;
        }
        PolicyKind::Hierarchical => {
            let h = estimate_hierarchical_hops(
                &scn,
                &point.rule,
                point.gamma,
                point.epsilon,
                cfg.hierarchical_trials,
                point.seed,
            )?;
            record.level_policy = "hierarchical";
            record.l_max = h.prediction.l_max;
            record.trials = h.trials;
            record.mean_hops = h.mean;
            record.stderr = h.stderr;
            record.e1_hops = Some(h.e1);
            record.level_coverage = Some(h.coverage);
            record.excluded_sources = h.excluded_sources;
            if h.prediction.regime == ReductionRegime::LinearN {
                record.theory_hop_exponent += 1.0;
            }
            record.theory_capacity = hierarchical_capacity(record.theory_capacity, &h.prediction, n);
        }
    }
    record.capacity_estimate = capacity_from_hops(record.mean_hops, n)?.value();
    record.wall_time_ms = start.elapsed().as_millis() as u64;
    if !record.is_finite() {
        return Err(Error::param("record", format!("non-finite value in {}", record.experiment_id)));
    }
    Ok(record)
}

/// Runs every point, streaming records to `writer` in config order.
pub fn run_sweep<W: Write + Send>(cfg: &ExperimentConfig, writer: &mut RecordWriter<W>) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    writer.begin()?;
    let points = sweep_points(cfg);

    let mut keys: Vec<WorldKey> = points.iter().map(SweepPoint::world_key).collect();
    keys.sort_unstable();
    keys.dedup();
    let worlds: HashMap<WorldKey, Arc<World>> = keys
        .par_iter()
        .map(|&(n, g, e, seed)| {
            World::build(n, f64::from_bits(g), f64::from_bits(e), seed, cfg).map(|w| ((n, g, e, seed), Arc::new(w)))
        })
        .collect::<Result<_>>()?;

    let (tx, rx) = mpsc::channel::<(usize, Result<ExperimentRecord>)>();
    std::thread::scope(|scope| {
        let writer_thread = scope.spawn(move || -> Result<Vec<ExperimentRecord>> {
            let mut pending = BTreeMap::new();
            let mut next = 0;
            let mut out = Vec::new();
            for (i, rec) in rx {
                pending.insert(i, rec?);
                while let Some(rec) = pending.remove(&next) {
                    writer.write(&rec)?;
                    out.push(rec);
                    next += 1;
                }
            }
            Ok(out)
        });
        points.par_iter().enumerate().for_each_with(tx, |tx, (i, p)| {
            let rec = run_point(p, &worlds[&p.world_key()], cfg);
            // A closed channel means the writer already failed.
            let _ = tx.send((i, rec));
        });
        writer_thread.join().expect("writer thread panicked")
    })
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads<W: Write + Send>(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
    writer: &mut RecordWriter<W>,
) -> Result<Vec<ExperimentRecord>> {
    match threads {
        None => run_sweep(cfg, writer),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?;
            pool.install(|| run_sweep(cfg, writer))
        }
    }
}

/// Opens `path` (failing before any simulation), then runs the sweep.
pub fn run_sweep_to_path(
    cfg: &ExperimentConfig,
    path: &Path,
    format: OutputFormat,
    threads: Option<usize>,
) -> Result<Vec<ExperimentRecord>> {
    let file = File::create(path)?;
    let mut writer = RecordWriter::new(BufWriter::new(file), format);
    run_sweep_with_threads(cfg, threads, &mut writer)
}
