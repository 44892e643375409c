use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fractal_d2d::experiment::acceptance::{AcceptanceSuite, CRITERIA};
use fractal_d2d::experiment::{run_sweep_with_threads, ExperimentConfig, OutputFormat, RecordWriter};
use fractal_d2d::fractality::{box_cover, estimate_exponents, FractalityReport};
use fractal_d2d::graph::{generate, read_edge_list, write_edge_list, EdgeListHeader, FractalParams, SocialGraph};
use fractal_d2d::grid::place_nodes;
use fractal_d2d::{Error, Result};

#[derive(Parser)]
#[command(name = "fd2d", version, about = "Fractal D2D social network capacity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed, replacing the seeds of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Newline-delimited JSON instead of CSV or text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Clone)]
struct GraphArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a social graph and write it as an edge list.
    Gen {
        #[command(flatten)]
        graph: GraphArgs,
        /// Also write node positions as `node_id,x,y` CSV.
        #[arg(long)]
        layout: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the configured sweep and emit one record per point.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Box-covering report for an edge list or a generated graph.
    Fractality {
        /// Edge list to analyse instead of generating a graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        params: GraphArgs,
        /// Box sizes, comma separated.
        #[arg(long = "lb", value_delimiter = ',', default_value = "1,2,4,8")]
        l_b: Vec<u32>,
        /// Write the covering at the largest box size to this file.
        #[arg(long)]
        covering: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run acceptance criteria and print one pass/fail line each.
    Verify {
        /// Criteria to run, comma separated (default: all).
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        only: Option<Vec<String>>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Gen { graph, layout, common } => in_pool(common.threads, || gen(&graph, layout.as_deref(), &common)),
        Command::Sweep { common } => sweep(&common),
        Command::Fractality {
            graph,
            params,
            l_b,
            covering,
            common,
        } => in_pool(common.threads, || fractality(graph.as_deref(), &params, &l_b, covering.as_deref(), &common)),
        Command::Verify { only, common } => in_pool(common.threads, || verify(only, &common)),
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| io::Error::other(e.to_string()))?
            .install(f),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn params(args: &GraphArgs, common: &Common) -> Result<FractalParams> {
    let cfg = match &common.config {
        Some(_) => Some(load_config(common)?),
        None => None,
    };
    let cfg = cfg.as_ref();
    FractalParams::new(
        args.n.or(cfg.map(|c| c.n[0])).unwrap_or(1000),
        args.gamma.or(cfg.map(|c| c.gamma[0])).unwrap_or(2.5),
        args.epsilon.or(cfg.map(|c| c.epsilon[0])).unwrap_or(2.5),
        common.seed.or(cfg.map(|c| c.seeds[0])).unwrap_or(1),
    )
}

fn gen(args: &GraphArgs, layout: Option<&Path>, common: &Common) -> Result<bool> {
    let p = params(args, common)?;
    let g = generate(&p)?;
    let header = EdgeListHeader {
        n: p.n,
        gamma: p.gamma,
        epsilon: p.epsilon,
        seed: p.seed,
    };
    write_edge_list(output(common.out.as_deref())?, &header, &g.graph)?;
    if let Some(path) = layout {
        place_nodes(p.n, p.seed)?.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let s = g.summary();
    eprintln!(
        "n={} edges={} below_target={} isolated={} shortfall={}",
        p.n,
        g.graph.edge_count(),
        s.below_target,
        s.isolated,
        s.total_shortfall
    );
    Ok(true)
}

fn sweep(common: &Common) -> Result<bool> {
    let cfg = load_config(common)?;
    let path = common.out.clone().or_else(|| cfg.output.clone());
    let format = if common.json { OutputFormat::Json } else { OutputFormat::Csv };
    let mut writer = RecordWriter::new(output(path.as_deref())?, format);
    let records = run_sweep_with_threads(&cfg, common.threads, &mut writer)?;
    writer.into_inner().flush()?;
    eprintln!("{} records", records.len());
    Ok(true)
}

fn fractality(
    graph: Option<&Path>,
    args: &GraphArgs,
    l_b: &[u32],
    covering: Option<&Path>,
    common: &Common,
) -> Result<bool> {
    let g: SocialGraph = match graph {
        Some(path) => read_edge_list(io::BufReader::new(File::open(path)?))?.1,
        None => generate(&params(args, common)?)?.graph,
    };
    let report = estimate_exponents(&g, l_b)?;
    let mut out = output(common.out.as_deref())?;
    if common.json {
        serde_json::to_writer(&mut out, &report)?;
        writeln!(out)?;
    } else {
        write_report(&mut out, &report)?;
    }
    out.flush()?;
    if let Some(path) = covering {
        let largest = l_b.iter().copied().max().unwrap_or(1);
        box_cover(&g, largest)?.write_to(BufWriter::new(File::create(path)?))?;
    }
    Ok(true)
}

fn write_report(out: &mut dyn Write, r: &FractalityReport) -> Result<()> {
    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    writeln!(out, "giant component {} nodes, {} components", r.giant_size, r.components)?;
    writeln!(out, "l_b  boxes  N_B/n     k_B/k_hub  n_h/k_B")?;
    for p in &r.points {
        writeln!(
            out,
            "{:<4} {:<6} {:<9.5} {:<10.4} {:.4}",
            p.l_b, p.boxes, p.box_fraction, p.degree_ratio, p.hub_link_ratio
        )?;
    }
    writeln!(out, "d_B {}  d_g {}  d_e {}", show(r.d_b), show(r.d_g), show(r.d_e))?;
    writeln!(out, "gamma_hat {}  epsilon_hat {}", show(r.gamma_hat), show(r.epsilon_hat))?;
    Ok(())
}

fn verify(only: Option<Vec<String>>, common: &Common) -> Result<bool> {
    let selection: Vec<String> = match only {
        Some(list) => list.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => CRITERIA.iter().map(|s| s.to_string()).collect(),
    };
    if selection.is_empty() {
        return Err(Error::NoTestsSelected);
    }
    let ids: Vec<&str> = selection.iter().map(String::as_str).collect();
    let suite = AcceptanceSuite::default();
    // Validate the whole selection before the first (possibly long) criterion.
    if let Some(bad) = ids.iter().find(|s| !CRITERIA.iter().any(|c| c.eq_ignore_ascii_case(s))) {
        return Err(Error::Parameter {
            name: "only",
            reason: format!("unknown criterion `{bad}`"),
        });
    }
    let mut out = output(common.out.as_deref())?;
    let mut all = true;
    let mut passed = 0;
    for id in CRITERIA.iter().filter(|c| ids.iter().any(|s| c.eq_ignore_ascii_case(s))) {
        let o = suite.run_one(id)?;
        writeln!(out, "{o}")?;
        out.flush()?;
        all &= o.passed;
        passed += usize::from(o.passed);
    }
    let total = CRITERIA.iter().filter(|c| ids.iter().any(|s| c.eq_ignore_ascii_case(s))).count();
    writeln!(out, "{total} criteria, {passed} passed, {} failed", total - passed)?;
    out.flush()?;
    Ok(all)
}
