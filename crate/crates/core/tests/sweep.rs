use fractal_d2d::capacity::fit_loglog;
use fractal_d2d::experiment::{
    run_sweep, run_sweep_to_path, run_sweep_with_threads, sweep_points, ExperimentConfig, ExperimentRecord,
    OutputFormat, RecordWriter,
};

const SMALL: &str = "\
# two sizes, both regimes of the hierarchy
n = 256
n = 512
gamma = 2.5
epsilon = 2.5
epsilon = 3.0
rule = uniform
rule = powerlaw
beta = 2.5
policy = direct
policy = hierarchical
trials = 500
hierarchical_trials = 100
seed = 1
seed = 2
kbar_sources = 100
";

fn small() -> ExperimentConfig {
    ExperimentConfig::parse(SMALL).unwrap()
}

fn csv(cfg: &ExperimentConfig, threads: Option<usize>) -> String {
    let mut w = RecordWriter::new(Vec::new(), OutputFormat::Csv);
    run_sweep_with_threads(cfg, threads, &mut w).unwrap();
    String::from_utf8(w.into_inner()).unwrap()
}

fn without_timing(text: &str) -> Vec<String> {
    text.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
}

#[test]
fn sweeps_are_byte_identical_apart_from_timing() {
    let cfg = small();
    let a = csv(&cfg, Some(1));
    let b = csv(&cfg, Some(1));
    let c = csv(&cfg, Some(3));
    assert_eq!(without_timing(&a), without_timing(&b));
    assert_eq!(without_timing(&a), without_timing(&c));
    assert_eq!(a.lines().count(), 1 + sweep_points(&cfg).len());
    assert_eq!(a.lines().next().unwrap(), ExperimentRecord::csv_header());
    assert!(a.lines().skip(1).all(|l| l.starts_with("1,")));
}

#[test]
fn records_are_finite_and_consistent() {
    let cfg = small();
    let mut w = RecordWriter::new(Vec::new(), OutputFormat::Csv);
    let recs = run_sweep(&cfg, &mut w).unwrap();
    for (r, p) in recs.iter().zip(sweep_points(&cfg)) {
        assert_eq!(r.experiment_id, p.id());
        assert!(r.is_finite(), "{r:?}");
        if r.mean_hops > 0.0 {
            let want = 1.0 / ((r.n as f64).ln() * r.mean_hops);
            assert!((r.capacity_estimate.unwrap() / want - 1.0).abs() < 1e-12);
        } else {
            assert_eq!(r.capacity_estimate, None);
        }
        assert!(r.l_max >= 1);
        assert_eq!(r.level_policy == "direct", r.l_max == 1 && r.e1_hops.is_none());
    }
}

#[test]
fn a_point_reproduces_alone() {
    let cfg = small();
    let mut w = RecordWriter::new(Vec::new(), OutputFormat::Csv);
    let all = run_sweep(&cfg, &mut w).unwrap();
    let single = ExperimentConfig::parse(
        "n = 512\nepsilon = 3.0\nrule = powerlaw\nbeta = 2.5\npolicy = hierarchical\ntrials = 500\nhierarchical_trials = 100\nseed = 2\nkbar_sources = 100\n",
    )
    .unwrap();
    let mut w = RecordWriter::new(Vec::new(), OutputFormat::Csv);
    let one = run_sweep(&single, &mut w).unwrap().remove(0);
    let twin = all.iter().find(|r| r.experiment_id == one.experiment_id).unwrap();
    assert_eq!(twin.mean_hops.to_bits(), one.mean_hops.to_bits());
    assert_eq!(twin.stderr.to_bits(), one.stderr.to_bits());
}

#[test]
fn json_lines_round_trip() {
    let mut cfg = small();
    cfg.seeds = vec![3];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    let recs = run_sweep_to_path(&cfg, &path, OutputFormat::Json, None).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), recs.len());
    for (line, r) in lines.iter().zip(&recs) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["experiment_id"], r.experiment_id.as_str());
        assert_eq!(v["schema"], 1);
        assert_eq!(v["mean_hops"].as_f64().unwrap().to_bits(), r.mean_hops.to_bits());
        assert_eq!(v["k_bar_theory"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn uniform_sweep_has_square_root_growth() {
    let cfg = ExperimentConfig::parse(
        "n = 1024\nn = 2048\nn = 4096\nn = 8192\nepsilon = 2.5\nrule = uniform\npolicy = direct\ntrials = 20000\nkbar_sources = 10\n",
    )
    .unwrap();
    let mut w = RecordWriter::new(std::io::sink(), OutputFormat::Csv);
    let recs = run_sweep(&cfg, &mut w).unwrap();
    let xs: Vec<f64> = recs.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = recs.iter().map(|r| r.mean_hops).collect();
    let slope = fit_loglog(&xs, &ys).unwrap().slope;
    assert!((slope - 0.5).abs() <= 0.1, "slope {slope:.3} from {ys:?}");
}
