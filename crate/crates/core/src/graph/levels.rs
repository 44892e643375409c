use rayon::prelude::*;

use super::SocialGraph;
use crate::{Error, Result};

const UNREACHED: u32 = u32::MAX;

/// Contacts of one source grouped by social distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSets {
    pub source: u32,
    /// `levels[L-1]` holds the sorted ids at distance exactly `L`.
    pub levels: Vec<Vec<u32>>,
}

impl LevelSets {
    pub fn l_max_observed(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &[u32] {
        self.levels.get(l.wrapping_sub(1)).map_or(&[], Vec::as_slice)
    }
}

/// Breadth-first tree. Each node's parent is the lowest-id node of the
/// previous level adjacent to it.
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub source: u32,
    dist: Vec<u32>,
    parent: Vec<u32>,
    pub levels: Vec<Vec<u32>>,
}

impl BfsTree {
    pub fn distance(&self, v: u32) -> Option<u32> {
        Some(self.dist[v as usize]).filter(|&d| d != UNREACHED)
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        Some(self.parent[v as usize]).filter(|&p| p != UNREACHED)
    }

    /// Nodes on the tree path from the source to `v`, both ends included.
    pub fn path_to(&self, v: u32) -> Option<Vec<u32>> {
        self.distance(v)?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    pub fn into_level_sets(self) -> LevelSets {
        LevelSets {
            source: self.source,
            levels: self.levels,
        }
    }
}

fn check_source(graph: &SocialGraph, source: u32) -> Result<()> {
    if (source as usize) < graph.n() {
        Ok(())
    } else {
        Err(Error::param("source", format!("{source} out of range for n={}", graph.n())))
    }
}

/// BFS from `source` up to distance `l_cap`.
pub fn bfs_tree(graph: &SocialGraph, source: u32, l_cap: usize) -> Result<BfsTree> {
    check_source(graph, source)?;
    let n = graph.n();
    let mut dist = vec![UNREACHED; n];
    let mut parent = vec![UNREACHED; n];
    dist[source as usize] = 0;
    let mut levels = Vec::new();
    let mut frontier = vec![source];
    while levels.len() < l_cap {
        let depth = levels.len() as u32 + 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in graph.neighbors(u) {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = depth;
                    parent[v as usize] = u;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        levels.push(next.clone());
        frontier = next;
    }
    Ok(BfsTree {
        source,
        dist,
        parent,
        levels,
    })
}

pub fn level_sets(graph: &SocialGraph, source: u32, l_cap: usize) -> Result<LevelSets> {
    Ok(bfs_tree(graph, source, l_cap)?.into_level_sets())
}

/// Mean number of level-`L` contacts over all nodes.
pub fn mean_level_degree(graph: &SocialGraph, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::param("L", "levels start at 1"));
    }
    Ok(mean_level_degrees(graph, l, None)[l - 1])
}

/// Mean level sizes `K̄^(1..=l_cap)` over `sources` (all nodes when `None`).
pub fn mean_level_degrees(graph: &SocialGraph, l_cap: usize, sources: Option<&[u32]>) -> Vec<f64> {
    let all: Vec<u32>;
    let sources = match sources {
        Some(s) => s,
        None => {
            all = (0..graph.n() as u32).collect();
            &all
        }
    };
    if sources.is_empty() || l_cap == 0 {
        return vec![0.0; l_cap];
    }
    let totals = sources
        .par_iter()
        .map_init(
            || (vec![0u32; graph.n()], 0u32),
            |(stamp, epoch), &s| count_levels(graph, s, l_cap, stamp, epoch),
        )
        .reduce(
            || vec![0u64; l_cap],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    totals
        .into_iter()
        .map(|t| t as f64 / sources.len() as f64)
        .collect()
}

fn count_levels(graph: &SocialGraph, source: u32, l_cap: usize, stamp: &mut [u32], epoch: &mut u32) -> Vec<u64> {
    *epoch = epoch.wrapping_add(1);
    if *epoch == 0 {
        stamp.fill(0);
        *epoch = 1;
    }
    let e = *epoch;
    stamp[source as usize] = e;
    let mut counts = vec![0u64; l_cap];
    let mut frontier = vec![source];
    let mut next = Vec::new();
    for count in counts.iter_mut() {
        next.clear();
        for &u in &frontier {
            for &v in graph.neighbors(u) {
                if stamp[v as usize] != e {
                    stamp[v as usize] = e;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        *count = next.len() as u64;
        std::mem::swap(&mut frontier, &mut next);
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> SocialGraph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        SocialGraph::from_edges(n as usize, edges).unwrap()
    }

    #[test]
    fn path_levels() {
        let g = SocialGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let ls = level_sets(&g, 0, 10).unwrap();
        assert_eq!(ls.levels, vec![vec![1], vec![2]]);
        assert_eq!(ls.l_max_observed(), 2);
        assert_eq!(level_sets(&g, 0, 1).unwrap().levels, vec![vec![1]]);
    }

    #[test]
    fn star_center_sees_all_leaves() {
        let g = SocialGraph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(level_sets(&g, 0, 5).unwrap().levels, vec![vec![1, 2, 3, 4]]);
        assert_eq!(level_sets(&g, 2, 5).unwrap().levels, vec![vec![0], vec![1, 3, 4]]);
    }

    #[test]
    fn isolated_source_and_bad_source() {
        let g = SocialGraph::empty(3);
        assert!(level_sets(&g, 1, 4).unwrap().levels.is_empty());
        assert!(level_sets(&g, 3, 4).is_err());
    }

    #[test]
    fn complete_graph_levels() {
        let g = complete(4);
        assert_eq!(mean_level_degree(&g, 1).unwrap(), 3.0);
        assert_eq!(mean_level_degree(&g, 2).unwrap(), 0.0);
        assert!(mean_level_degree(&g, 0).is_err());
    }

    #[test]
    fn parents_break_ties_by_lowest_id() {
        // 0 - {1, 2} - 3: node 3 is reachable through 1 and 2.
        let g = SocialGraph::from_edges(4, [(0, 2), (0, 1), (2, 3), (1, 3)]).unwrap();
        let t = bfs_tree(&g, 0, 8).unwrap();
        assert_eq!(t.parent(3), Some(1));
        assert_eq!(t.path_to(3).unwrap(), vec![0, 1, 3]);
        assert_eq!(t.path_to(0).unwrap(), vec![0]);
        assert_eq!(t.distance(3), Some(2));
    }

    #[test]
    fn hub_level_two_pairs() {
        // Hub 0 with leaves 1, 2, 3; leaf 3 knows 4 and 5, leaf 1 knows 6.
        let g = SocialGraph::from_edges(7, [(0, 1), (0, 2), (0, 3), (3, 4), (3, 5), (1, 6)]).unwrap();
        let ls = level_sets(&g, 0, 4).unwrap();
        assert_eq!(ls.level(1), &[1, 2, 3]);
        assert_eq!(ls.level(2), &[4, 5, 6]);
        assert!(ls.level(3).is_empty());
    }

    #[test]
    fn level_counts_agree_with_level_sets() {
        let g = SocialGraph::from_edges(
            8,
            [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (5, 6), (2, 7)],
        )
        .unwrap();
        let means = mean_level_degrees(&g, 5, None);
        for (l, mean) in means.iter().enumerate() {
            let direct: usize = (0..8)
                .map(|s| level_sets(&g, s, 5).unwrap().level(l + 1).len())
                .sum();
            assert_eq!(*mean, direct as f64 / 8.0);
        }
    }
}
