//! Greedy box covering, renormalisation and fractal exponent estimation.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{fit_loglog, LinearFit};
use crate::graph::SocialGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxCovering {
    pub l_b: u32,
    /// Sorted node ids of each box, in the order boxes were opened.
    pub boxes: Vec<Vec<u32>>,
    /// Highest-degree node of each box, lowest id on ties.
    pub hub_of_box: Vec<u32>,
}

impl BoxCovering {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Box index of every node.
    pub fn assignment(&self, n: usize) -> Vec<u32> {
        let mut out = vec![u32::MAX; n];
        for (b, members) in self.boxes.iter().enumerate() {
            for &v in members {
                out[v as usize] = b as u32;
            }
        }
        out
    }

    /// Writes one `box_id: node ids` line per box.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for (b, members) in self.boxes.iter().enumerate() {
            let ids: Vec<String> = members.iter().map(u32::to_string).collect();
            writeln!(w, "{b}: {}", ids.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nodes within distance `radius` of `source`, including it.
fn ball(graph: &SocialGraph, source: u32, radius: u32, dist: &mut [u32], out: &mut Vec<u32>) {
    out.clear();
    out.push(source);
    dist[source as usize] = 0;
    let mut head = 0;
    while head < out.len() {
        let u = out[head];
        head += 1;
        let d = dist[u as usize];
        if d == radius {
            continue;
        }
        for &v in graph.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = d + 1;
                out.push(v);
            }
        }
    }
    for &v in out.iter() {
        dist[v as usize] = u32::MAX;
    }
}

/// Covering with boxes of diameter at most `l_b`.
///
/// Runs the greedy pass at every size up to `l_b` and keeps the covering with
/// the fewest boxes (a covering for a smaller size is valid for a larger
/// one), so box counts never increase with `l_b`. The result is a valid
/// covering and an upper bound on the minimum box count.
pub fn box_cover(graph: &SocialGraph, l_b: u32) -> Result<BoxCovering> {
    Ok(box_covers(graph, l_b)?.pop().expect("l_b >= 1"))
}

/// [`box_cover`] for every size `1..=l_max`, in order.
pub fn box_covers(graph: &SocialGraph, l_max: u32) -> Result<Vec<BoxCovering>> {
    if l_max < 1 {
        return Err(Error::param("l_b", "box size starts at 1"));
    }
    let greedy: Vec<BoxCovering> = (1..=l_max).into_par_iter().map(|l| greedy_cover(graph, l)).collect();
    let mut out: Vec<BoxCovering> = Vec::with_capacity(greedy.len());
    for g in greedy {
        match out.last() {
            Some(prev) if prev.len() < g.len() => out.push(BoxCovering { l_b: g.l_b, ..prev.clone() }),
            _ => out.push(g),
        }
    }
    Ok(out)
}

/// One greedy pass. Seeds are taken by decreasing degree (lowest id first on
/// ties). A box grows breadth-first from its seed through uncovered
/// neighbours, admitting a node only if it lies within `l_b` of every current
/// member.
fn greedy_cover(graph: &SocialGraph, l_b: u32) -> BoxCovering {
    let n = graph.n();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));

    let mut covered = vec![false; n];
    // hits[v] = number of members of the open box within l_b of v.
    let mut hits = vec![0u32; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut dist = vec![u32::MAX; n];
    let mut near = Vec::new();
    let mut boxes = Vec::new();
    let mut hubs = Vec::new();

    for &seed in &order {
        if covered[seed as usize] {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        let mut admit = |v: u32, covered: &mut [bool], members: &mut Vec<u32>, hits: &mut [u32], touched: &mut Vec<u32>| {
            covered[v as usize] = true;
            members.push(v);
            ball(graph, v, l_b, &mut dist, &mut near);
            for &w in &near {
                if hits[w as usize] == 0 {
                    touched.push(w);
                }
                hits[w as usize] += 1;
            }
        };
        admit(seed, &mut covered, &mut members, &mut hits, &mut touched);
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            for &v in graph.neighbors(u) {
                let size = members.len() as u32;
                if !covered[v as usize] && hits[v as usize] == size {
                    admit(v, &mut covered, &mut members, &mut hits, &mut touched);
                    queue.push_back(v);
                }
            }
        }
        for &w in &touched {
            hits[w as usize] = 0;
        }
        touched.clear();
        members.sort_unstable();
        let hub = *members
            .iter()
            .max_by_key(|&&v| (graph.degree(v), std::cmp::Reverse(v)))
            .expect("box holds its seed");
        hubs.push(hub);
        boxes.push(members);
    }
    BoxCovering {
        l_b,
        boxes,
        hub_of_box: hubs,
    }
}

/// One node per box; two boxes are adjacent iff some edge joins them.
pub fn renormalize(graph: &SocialGraph, covering: &BoxCovering) -> Result<SocialGraph> {
    let owner = covering.assignment(graph.n());
    if owner.contains(&u32::MAX) {
        return Err(Error::param("covering", "does not cover every node"));
    }
    let edges = graph
        .edges()
        .map(|(u, v)| (owner[u as usize], owner[v as usize]))
        .filter(|(a, b)| a != b);
    SocialGraph::from_edges(covering.len(), edges)
}

/// Connected components, largest first (ties by smallest member).
pub fn components(graph: &SocialGraph) -> Vec<Vec<u32>> {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n as u32 {
        if seen[s as usize] {
            continue;
        }
        seen[s as usize] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &v in graph.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

/// The subgraph on `nodes`, relabelled `0..nodes.len()` in the given order.
pub fn induced_subgraph(graph: &SocialGraph, nodes: &[u32]) -> SocialGraph {
    let mut index = vec![u32::MAX; graph.n()];
    for (i, &v) in nodes.iter().enumerate() {
        index[v as usize] = i as u32;
    }
    let edges = graph
        .edges()
        .filter(|(u, v)| index[*u as usize] != u32::MAX && index[*v as usize] != u32::MAX)
        .map(|(u, v)| (index[u as usize], index[v as usize]));
    SocialGraph::from_edges(nodes.len(), edges).expect("relabelled edges are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalePoint {
    pub l_b: u32,
    pub boxes: usize,
    /// `N_B / n`.
    pub box_fraction: f64,
    /// Mean `k_B / k_hub` over boxes.
    pub degree_ratio: f64,
    /// Mean `n_h / k_B` over boxes with `k_B > 0`.
    pub hub_link_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractalityReport {
    pub giant_size: usize,
    pub components: usize,
    pub points: Vec<ScalePoint>,
    pub d_b: Option<f64>,
    pub d_g: Option<f64>,
    pub d_e: Option<f64>,
    /// `1 + d_B / d_g`.
    pub gamma_hat: Option<f64>,
    /// `2 + d_e / d_g`.
    pub epsilon_hat: Option<f64>,
    /// `R²` of the fits for `d_B`, `d_g`, `d_e`.
    pub fit_r_squared: [Option<f64>; 3],
}

/// Covers the giant component at every `l_b` and fits
/// `N_B/n ∝ l_B^-d_B`, `k_B/k_hub ∝ l_B^-d_g` and `n_h/k_B ∝ l_B^-d_e`.
///
/// A fit whose values are non-positive or constant is reported as missing.
pub fn estimate_exponents(graph: &SocialGraph, l_b_values: &[u32]) -> Result<FractalityReport> {
    if l_b_values.len() < 3 {
        return Err(Error::param("l_b_values", format!("need at least 3 box sizes, got {}", l_b_values.len())));
    }
    let comps = components(graph);
    let giant_nodes = comps.first().cloned().unwrap_or_default();
    let giant = induced_subgraph(graph, &giant_nodes);
    let n = giant.n();
    let l_max = l_b_values.iter().copied().max().unwrap_or(0);
    let covers = box_covers(&giant, l_max)?;
    let points: Vec<ScalePoint> = l_b_values
        .par_iter()
        .map(|&l_b| -> Result<ScalePoint> {
            if l_b < 1 {
                return Err(Error::param("l_b", "box size starts at 1"));
            }
            let cover = &covers[l_b as usize - 1];
            let renorm = renormalize(&giant, cover)?;
            let owner = cover.assignment(n);
            let mut degree_ratio = 0.0;
            let mut hub_links = (0.0, 0usize);
            for (b, &hub) in cover.hub_of_box.iter().enumerate() {
                let k_b = renorm.degree(b as u32);
                let k_hub = giant.degree(hub);
                if k_hub > 0 {
                    degree_ratio += k_b as f64 / k_hub as f64;
                }
                if k_b > 0 {
                    let n_h = giant.neighbors(hub).iter().filter(|&&v| owner[v as usize] != b as u32).count();
                    hub_links.0 += n_h as f64 / k_b as f64;
                    hub_links.1 += 1;
                }
            }
            Ok(ScalePoint {
                l_b,
                boxes: cover.len(),
                box_fraction: cover.len() as f64 / n as f64,
                degree_ratio: degree_ratio / cover.len() as f64,
                hub_link_ratio: if hub_links.1 == 0 { 0.0 } else { hub_links.0 / hub_links.1 as f64 },
            })
        })
        .collect::<Result<_>>()?;

    let xs: Vec<f64> = points.iter().map(|p| f64::from(p.l_b)).collect();
    let fit = |ys: Vec<f64>| -> Option<LinearFit> {
        let first = ys[0];
        if ys.iter().all(|&y| y == first) {
            return None;
        }
        fit_loglog(&xs, &ys).ok()
    };
    let f_b = fit(points.iter().map(|p| p.box_fraction).collect());
    let f_g = fit(points.iter().map(|p| p.degree_ratio).collect());
    let f_e = fit(points.iter().map(|p| p.hub_link_ratio).collect());
    let d_b = f_b.map(|f| -f.slope);
    let d_g = f_g.map(|f| -f.slope).filter(|d| *d != 0.0);
    let d_e = f_e.map(|f| -f.slope);
    Ok(FractalityReport {
        giant_size: n,
        components: comps.len(),
        points,
        d_b,
        d_g,
        d_e,
        gamma_hat: d_b.zip(d_g).map(|(b, g)| 1.0 + b / g),
        epsilon_hat: d_e.zip(d_g).map(|(e, g)| 2.0 + e / g),
        fit_r_squared: [f_b.map(|f| f.r_squared), f_g.map(|f| f.r_squared), f_e.map(|f| f.r_squared)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn path(n: u32) -> SocialGraph {
        SocialGraph::from_edges(n as usize, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn star(leaves: u32) -> SocialGraph {
        SocialGraph::from_edges(leaves as usize + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    pub(crate) fn assert_valid(graph: &SocialGraph, cover: &BoxCovering) {
        let dist = oracle::all_pairs_distances(graph);
        let mut seen = vec![0u32; graph.n()];
        for b in &cover.boxes {
            for &u in b {
                seen[u as usize] += 1;
                for &v in b {
                    assert!(dist[u as usize][v as usize] <= cover.l_b, "box {b:?} too wide");
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "not a partition");
    }

    #[test]
    fn path_of_nine() {
        let g = path(9);
        let c = box_cover(&g, 2).unwrap();
        assert_valid(&g, &c);
        assert_eq!(c.len(), oracle::min_box_cover(&g, 2));
        assert_eq!(c.boxes, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
        let r = renormalize(&g, &c).unwrap();
        assert_eq!(r, path(3));
    }

    #[test]
    fn star_and_large_boxes() {
        let c = box_cover(&star(6), 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.hub_of_box, vec![0]);
        let two = SocialGraph::from_edges(7, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)]).unwrap();
        let c = box_cover(&two, 10).unwrap();
        assert_eq!(c.len(), 2);
        assert_valid(&two, &c);
        let r = renormalize(&two, &c).unwrap();
        assert_eq!((r.n(), r.edge_count()), (2, 0));
        assert!(box_cover(&two, 0).is_err());
    }

    #[test]
    fn renormalized_triangle() {
        // Three triangles joined pairwise by single edges.
        let g = SocialGraph::from_edges(
            9,
            [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (6, 7), (7, 8), (6, 8), (2, 3), (5, 6), (8, 0)],
        )
        .unwrap();
        let cover = BoxCovering {
            l_b: 1,
            boxes: vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]],
            hub_of_box: vec![0, 3, 6],
        };
        let r = renormalize(&g, &cover).unwrap();
        assert_eq!(r.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        let single = BoxCovering {
            l_b: 9,
            boxes: vec![(0..9).collect()],
            hub_of_box: vec![0],
        };
        let r = renormalize(&g, &single).unwrap();
        assert_eq!((r.n(), r.edge_count()), (1, 0));
    }

    #[test]
    fn exponent_preconditions_and_path_fit() {
        let g = path(1024);
        assert!(estimate_exponents(&g, &[2, 4]).is_err());
        let report = estimate_exponents(&g, &[2, 4, 8, 16]).unwrap();
        let boxes: Vec<usize> = report.points.iter().map(|p| p.boxes).collect();
        assert_eq!(boxes, vec![342, 205, 114, 61]);
        let want = -crate::capacity::fit_loglog(
            &[2.0, 4.0, 8.0, 16.0],
            &[342.0 / 1024.0, 205.0 / 1024.0, 114.0 / 1024.0, 61.0 / 1024.0],
        )
        .unwrap()
        .slope;
        assert!((report.d_b.unwrap() - want).abs() < 1e-12);
        assert_eq!(report.giant_size, 1024);
    }

    #[test]
    fn covering_export() {
        let c = box_cover(&path(5), 1).unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0: 0 1\n1: 2 3\n2: 4\n");
    }
}
