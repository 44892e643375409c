use std::collections::BTreeMap;

use fractal_d2d::graph::{
    build_graph, generate, mean_level_degrees, read_edge_list, sample_degrees, write_edge_list, EdgeListHeader,
    FractalParams, GeneratedGraph,
};
use fractal_d2d::sympoly::{inclusion_probabilities, WeightVector};

fn ks(expected: &BTreeMap<u32, f64>, observed: &BTreeMap<u32, f64>) -> f64 {
    let keys: std::collections::BTreeSet<u32> = expected.keys().chain(observed.keys()).copied().collect();
    let (mut fe, mut fo, mut d) = (0.0, 0.0, 0.0f64);
    for k in keys {
        fe += expected.get(&k).copied().unwrap_or(0.0);
        fo += observed.get(&k).copied().unwrap_or(0.0);
        d = d.max((fe - fo).abs());
    }
    d
}

fn degree_law(n: usize, gamma: f64) -> BTreeMap<u32, f64> {
    let w: Vec<f64> = (1..n).map(|k| (k as f64).powf(-gamma)).collect();
    let z: f64 = w.iter().sum();
    w.iter().enumerate().map(|(i, p)| (i as u32 + 1, p / z)).collect()
}

fn histogram(values: impl IntoIterator<Item = u32>) -> BTreeMap<u32, f64> {
    let mut h = BTreeMap::new();
    let mut total = 0.0;
    for v in values {
        *h.entry(v).or_insert(0.0) += 1.0;
        total += 1.0;
    }
    h.values_mut().for_each(|c| *c /= total);
    h
}

fn assert_simple(g: &GeneratedGraph) {
    let graph = &g.graph;
    for u in 0..graph.n() as u32 {
        let nb = graph.neighbors(u);
        assert!(nb.windows(2).all(|w| w[0] < w[1]), "repeated or unsorted neighbours at {u}");
        for &v in nb {
            assert_ne!(u, v);
            assert!(graph.has_edge(v, u));
        }
    }
    let doubled: usize = (0..graph.n() as u32).map(|u| graph.degree(u)).sum();
    assert_eq!(doubled, 2 * graph.edge_count());
}

#[test]
fn generated_graph_is_simple_and_symmetric() {
    for (n, seed) in [(1000, 7), (3000, 2)] {
        assert_simple(&generate(&FractalParams::new(n, 2.5, 2.5, seed).unwrap()).unwrap());
    }
}

#[test]
fn partner_degrees_follow_the_selection_law() {
    let g = generate(&FractalParams::new(1000, 2.5, 2.5, 7).unwrap()).unwrap();
    let law = &g.law;
    let targets = g.targets().as_slice();
    let mut by_q: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (s, sel) in g.selections.iter().enumerate() {
        by_q.entry(targets[s]).or_default().extend(sel.iter().map(|&v| targets[v as usize]));
    }
    let mut tested = 0;
    let mut mixture: BTreeMap<u32, f64> = BTreeMap::new();
    let mut pooled = Vec::new();
    for (&q, partners) in &by_q {
        if q < 3 || partners.is_empty() {
            continue;
        }
        let pool = law.pool(q);
        let size = law.set_size(q);
        let logs: Vec<f64> = pool.iter().map(|&v| law.log_weight(targets[v as usize])).collect();
        let pi = inclusion_probabilities(&WeightVector::from_logs(logs).unwrap(), size).unwrap();
        let mut expected = BTreeMap::new();
        for (&v, p) in pool.iter().zip(&pi) {
            *expected.entry(targets[v as usize]).or_insert(0.0) += p / size as f64;
        }
        for (&k, p) in &expected {
            *mixture.entry(k).or_insert(0.0) += p * partners.len() as f64;
        }
        pooled.extend_from_slice(partners);
        if partners.len() >= 50 {
            let d = ks(&expected, &histogram(partners.iter().copied()));
            assert!(d < 0.1, "q={q}: KS {d:.4} over {} partners", partners.len());
            tested += 1;
        }
    }
    assert!(tested >= 1);
    let total: f64 = mixture.values().sum();
    mixture.values_mut().for_each(|p| *p /= total);
    let d = ks(&mixture, &histogram(pooled.iter().copied()));
    assert!(d < 0.1, "pooled KS {d:.4} over {} partners", pooled.len());
}

#[test]
fn target_degrees_fit_the_power_law() {
    let params = FractalParams::new(10_000, 2.5, 2.5, 1).unwrap();
    let degrees = sample_degrees(&params).unwrap();
    let d = ks(&degree_law(params.n, params.gamma), &histogram(degrees.as_slice().iter().copied()));
    assert!(d < 0.05, "KS {d:.4}");
    let mean = params.mean_degree();
    assert!((degrees.mean() / mean - 1.0).abs() < 0.1, "{} vs {mean}", degrees.mean());
}

#[test]
fn shortfall_is_reported_consistently() {
    let g = generate(&FractalParams::new(10_000, 2.5, 2.5, 1).unwrap()).unwrap();
    let s = g.summary();
    let realized = g.graph.realized_degrees();
    let total: u64 = g.shortfall.iter().map(|&x| u64::from(x)).sum();
    assert_eq!(total, s.total_shortfall);
    for ((&r, &t), &sf) in realized.iter().zip(g.targets().as_slice()).zip(&g.shortfall) {
        assert_eq!(sf, t.saturating_sub(r));
    }
}

#[test]
fn generation_is_deterministic_and_thread_independent() {
    let params = FractalParams::new(4000, 2.5, 2.7, 11).unwrap();
    let a = generate(&params).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| generate(&params).unwrap());
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.selections, b.selections);
    let other = generate(&FractalParams::new(4000, 2.5, 2.7, 12).unwrap()).unwrap();
    assert_ne!(a.graph, other.graph);
}

#[test]
fn forced_selection_builds_the_star() {
    let degrees = fractal_d2d::graph::DegreeSequence::new(vec![3, 1, 1, 1]).unwrap();
    let g = build_graph(&degrees, 2.5, 99).unwrap();
    assert_eq!(g.graph.neighbors(0), &[1, 2, 3]);
    assert_eq!(g.graph.edge_count(), 3);
}

#[test]
fn edge_list_file_round_trip() {
    let params = FractalParams::new(500, 2.5, 2.5, 3).unwrap();
    let g = generate(&params).unwrap();
    let header = EdgeListHeader {
        n: params.n,
        gamma: params.gamma,
        epsilon: params.epsilon,
        seed: params.seed,
    };
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write_edge_list(&mut file, &header, &g.graph).unwrap();
    let text = std::fs::read_to_string(file.path()).unwrap();
    assert!(text.starts_with("# n=500 gamma=2.5 epsilon=2.5 seed=3\n"));
    let (h, back) = read_edge_list(std::io::BufReader::new(std::fs::File::open(file.path()).unwrap())).unwrap();
    assert_eq!(h, header);
    assert_eq!(back, g.graph);
}

#[test]
fn level_degrees_grow_below_epsilon_three() {
    let g = generate(&FractalParams::new(5000, 2.5, 2.4, 1).unwrap()).unwrap();
    let k = mean_level_degrees(&g.graph, 4, None);
    assert!(k.windows(2).all(|w| w[1] > w[0]), "{k:?}");
}

#[test]
fn level_degrees_stay_flat_at_epsilon_three() {
    let g = generate(&FractalParams::new(5000, 3.0, 3.0, 1).unwrap()).unwrap();
    let k = mean_level_degrees(&g.graph, 3, None);
    for (l, m) in k.iter().enumerate() {
        assert!((m / 2.0 - 1.0).abs() <= 0.25, "level {}: {m:.3} (all levels {k:?})", l + 1);
    }
}
