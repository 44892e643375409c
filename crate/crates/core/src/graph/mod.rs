//! Fractal social graph generation and level-`L` contact structure.
//!
//! Generation is degree-first: every user draws a target degree from the
//! truncated power law `P(k) ∝ k^-γ`, then each user with target `q` selects
//! `q` distinct partners among users of strictly smaller target degree with
//! `P(C) ∝ Π_{v∈C} k_v^-ε`.

mod io;
mod levels;
mod selection;

pub use io::{read_edge_list, write_edge_list, EdgeListHeader};
pub use levels::{bfs_tree, level_sets, mean_level_degree, mean_level_degrees, BfsTree, LevelSets};
pub use selection::{ContactSampler, SelectionLaw};

use rand::Rng;
use rayon::prelude::*;

use crate::rng::{rng_for, rng_for_item, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalParams {
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl FractalParams {
    pub fn new(n: usize, gamma: f64, epsilon: f64, seed: u64) -> Result<Self> {
        let params = Self {
            n,
            gamma,
            epsilon,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", format!("need at least 2 users, got {}", self.n)));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::param("n", "node ids are 32-bit"));
        }
        if !(self.gamma > 2.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must exceed 2, got {}", self.gamma)));
        }
        validate_epsilon(self.epsilon)
    }

    /// `M_γ = Σ_{k=1}^{n} k^-γ`.
    pub fn m_gamma(&self) -> f64 {
        (1..=self.n).map(|k| (k as f64).powf(-self.gamma)).sum()
    }

    /// Normaliser of `P(k1, k2) ∝ k1^-(γ-1) k2^-ε` over `n ≥ k1 > k2 ≥ 1`.
    pub fn joint_normalizer(&self) -> f64 {
        let mut below = 0.0;
        let mut total = 0.0;
        for k in 1..=self.n {
            let kf = k as f64;
            total += kf.powf(1.0 - self.gamma) * below;
            below += kf.powf(-self.epsilon);
        }
        total
    }

    /// Exact mean of the sampled degree law on its support `[1, n-1]`.
    pub fn mean_degree(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 1..self.n {
            let p = (k as f64).powf(-self.gamma);
            num += k as f64 * p;
            den += p;
        }
        num / den
    }

    /// `(γ-1)/(γ-2)`, the continuum mean degree.
    pub fn continuum_mean_degree(&self) -> f64 {
        (self.gamma - 1.0) / (self.gamma - 2.0)
    }
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 2.0 && epsilon <= 3.0 {
        Ok(())
    } else {
        Err(Error::param("epsilon", format!("must lie in (2, 3], got {epsilon}")))
    }
}

/// Target degree of every user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        let n = degrees.len();
        if n < 2 {
            return Err(Error::param("degrees", "need at least 2 users"));
        }
        if let Some(&bad) = degrees.iter().find(|&&k| k == 0 || k as usize > n - 1) {
            return Err(Error::param(
                "degrees",
                format!("degree {bad} outside [1, {}]", n - 1),
            ));
        }
        Ok(Self { degrees })
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.degrees
    }

    pub fn get(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn max(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.degrees.iter().map(|&k| f64::from(k)).sum::<f64>() / self.len() as f64
    }
}

/// Draws `n` i.i.d. degrees from `P(k) ∝ k^-γ` on `[1, n-1]` by inverse CDF.
pub fn sample_degrees(params: &FractalParams) -> Result<DegreeSequence> {
    params.validate()?;
    let n = params.n;
    let mut cdf = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for k in 1..n {
        acc += (k as f64).powf(-params.gamma);
        cdf.push(acc);
    }
    let mut rng = rng_for(params.seed, stream::DEGREES);
    let degrees = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(n - 2);
            idx as u32 + 1
        })
        .collect();
    DegreeSequence::new(degrees)
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SocialGraph {
    adjacency: Vec<Vec<u32>>,
}

impl SocialGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from undirected edges. Repeated edges collapse; self
    /// loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::param("edges", format!("edge ({u}, {v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::param("edges", format!("self loop at {u}")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adjacency })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn realized_degrees(&self) -> Vec<u32> {
        self.adjacency.iter().map(|a| a.len() as u32).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v))
        })
    }
}

/// A generated graph together with the law that produced it.
#[derive(Debug, Clone)]
pub struct GeneratedGraph {
    pub graph: SocialGraph,
    pub law: SelectionLaw,
    /// Contacts each source selected (sorted); empty for degree-1 users.
    pub selections: Vec<Vec<u32>>,
    /// `max(0, target − realized)` per user.
    pub shortfall: Vec<u32>,
}

impl GeneratedGraph {
    pub fn targets(&self) -> &DegreeSequence {
        self.law.degrees()
    }

    pub fn epsilon(&self) -> f64 {
        self.law.epsilon()
    }

    pub fn summary(&self) -> DegreeDeviation {
        let realized = self.graph.realized_degrees();
        let targets = self.targets().as_slice();
        let mut s = DegreeDeviation::default();
        for (&r, &t) in realized.iter().zip(targets) {
            if r == 0 {
                s.isolated += 1;
            }
            if r < t {
                s.below_target += 1;
                s.total_shortfall += u64::from(t - r);
            } else if r > t {
                s.above_target += 1;
            }
        }
        s
    }
}

/// How realized degrees differ from targets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DegreeDeviation {
    pub below_target: usize,
    pub above_target: usize,
    pub isolated: usize,
    pub total_shortfall: u64,
}

/// Wires the overlay: each user with target `q ≥ 2` selects `min(q, N)`
/// partners from the `N` users of strictly smaller target degree.
///
/// Every selection uses its own stream derived from `(seed, source id)`, so
/// the result does not depend on thread count.
pub fn build_graph(degrees: &DegreeSequence, epsilon: f64, seed: u64) -> Result<GeneratedGraph> {
    let law = SelectionLaw::new(degrees.clone(), epsilon)?;
    let n = degrees.len();

    let mut by_degree: Vec<(u32, Vec<u32>)> = Vec::new();
    for (q, members) in law.classes().iter().rev() {
        if *q >= 2 {
            by_degree.push((*q, members.clone()));
        }
    }

    let picked: Vec<(u32, Vec<u32>)> = by_degree
        .par_iter()
        .flat_map_iter(|(q, sources)| {
            let sampler = law.sampler(*q);
            sources
                .iter()
                .map(|&s| {
                    let mut rng = rng_for_item(seed, stream::GRAPH, u64::from(s));
                    (s, sampler.sample(&mut rng))
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut selections = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (s, contacts) in picked {
        // Pools hold strictly lower degrees, so no pair can be drawn from both
        // ends; from_edges still collapses any repeat.
        edges.extend(contacts.iter().map(|&v| (s, v)));
        selections[s as usize] = contacts;
    }
    let graph = SocialGraph::from_edges(n, edges)?;
    let shortfall = graph
        .realized_degrees()
        .iter()
        .zip(degrees.as_slice())
        .map(|(&r, &t)| t.saturating_sub(r))
        .collect();
    Ok(GeneratedGraph {
        graph,
        law,
        selections,
        shortfall,
    })
}

/// Samples degrees and builds the graph in one step.
pub fn generate(params: &FractalParams) -> Result<GeneratedGraph> {
    let degrees = sample_degrees(params)?;
    build_graph(&degrees, params.epsilon, params.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_domain() {
        assert!(FractalParams::new(1, 2.5, 2.5, 0).is_err());
        assert!(FractalParams::new(10, 2.0, 2.5, 0).is_err());
        assert!(FractalParams::new(10, 2.5, 2.0, 0).is_err());
        assert!(FractalParams::new(10, 2.5, 3.1, 0).is_err());
        assert!(FractalParams::new(10, 2.5, 3.0, 0).is_ok());
    }

    #[test]
    fn normalizers_small_case() {
        let p = FractalParams::new(3, 2.5, 2.5, 0).unwrap();
        let m = 1.0 + 2f64.powf(-2.5) + 3f64.powf(-2.5);
        assert!((p.m_gamma() - m).abs() < 1e-15);
        // pairs (2,1), (3,1), (3,2)
        let j = 2f64.powf(-1.5) + 3f64.powf(-1.5) * (1.0 + 2f64.powf(-2.5));
        assert!((p.joint_normalizer() - j).abs() < 1e-15);
    }

    #[test]
    fn two_users_have_degree_one() {
        let p = FractalParams::new(2, 2.5, 2.5, 42).unwrap();
        assert_eq!(sample_degrees(&p).unwrap().as_slice(), &[1, 1]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = FractalParams::new(10_000, 2.5, 2.5, 1).unwrap();
        assert_eq!(sample_degrees(&p).unwrap(), sample_degrees(&p).unwrap());
    }

    #[test]
    fn sample_mean_matches_finite_law() {
        let p = FractalParams::new(10_000, 2.5, 2.5, 1).unwrap();
        let mean = sample_degrees(&p).unwrap().mean();
        let exact = p.mean_degree();
        assert!((mean / exact - 1.0).abs() < 0.1, "mean={mean} exact={exact}");
    }

    #[test]
    fn forced_star() {
        let d = DegreeSequence::new(vec![3, 1, 1, 1]).unwrap();
        let g = build_graph(&d, 2.5, 9).unwrap();
        assert_eq!(g.graph.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.graph.edge_count(), 3);
        assert_eq!(g.shortfall, vec![0, 0, 0, 0]);
    }

    #[test]
    fn from_edges_rejects_loops_and_collapses_repeats() {
        assert!(SocialGraph::from_edges(3, [(1, 1)]).is_err());
        assert!(SocialGraph::from_edges(3, [(0, 3)]).is_err());
        let g = SocialGraph::from_edges(3, [(0, 1), (1, 0), (2, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn shortfall_when_pool_is_small() {
        // The degree-3 user only has two lower-degree users to choose from.
        let d = DegreeSequence::new(vec![3, 3, 1, 1]).unwrap();
        let g = build_graph(&d, 2.5, 1).unwrap();
        assert_eq!(g.selections[0], vec![2, 3]);
        assert_eq!(g.selections[1], vec![2, 3]);
        assert_eq!(g.shortfall, vec![1, 1, 0, 0]);
        assert!(!g.graph.has_edge(0, 1));
    }
}
