use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use skg_core::classify::classify;
use skg_core::edgefile;
use skg_core::genmatrix::{derive, GeneratorMatrix};
use skg_core::graphstats::{
    component_stats, degree_vs_expected, diameter_double_sweep, diameter_exact, Adjacency,
    EXACT_DIAMETER_MAX_N,
};
use skg_core::harness::{run_experiment, ExperimentConfig};
use skg_core::sampler::sample;
use skg_core::spectral::{
    cheeger_interval, kron_power_spectrum, mixing_steps, mixing_steps_literal, rpd_delta,
    walk_spectrum,
};

/// Stochastic Kronecker graph laboratory.
#[derive(Parser)]
#[command(name = "skg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a generator matrix into its component/connectivity regimes.
    Classify {
        /// Matrix JSON file.
        #[arg(short, long)]
        matrix: PathBuf,
        /// Tolerance for knife-edge comparisons in float mode.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Emit the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Walk-matrix spectrum, mixing steps and Cheeger interval, as JSON.
    Spectrum {
        #[arg(short, long)]
        matrix: PathBuf,
        /// Also summarize the spectrum of the t-fold Kronecker power.
        #[arg(short)]
        t: Option<u32>,
        /// Target relative pointwise distance for the mixing bound.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Sample the order-t graph and write an edge file.
    Sample {
        #[arg(short, long)]
        matrix: PathBuf,
        #[arg(short)]
        t: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output path; `.bin`/`.skg` select the binary format, anything
        /// else the text format. Text to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Component statistics of a sampled edge file.
    Stats {
        /// Edge file (text or binary, auto-detected).
        #[arg(short = 'g', long)]
        graph: PathBuf,
        /// Also compute the diameter (exact up to 4096 vertices, else a
        /// 16-sweep double-BFS lower bound).
        #[arg(long)]
        diameter: bool,
        /// Compare the degrees of N random vertices against expectation
        /// (needs --matrix).
        #[arg(long)]
        vertex_sample: Option<u32>,
        /// Generator matrix, required by --vertex-sample.
        #[arg(short, long)]
        matrix: Option<PathBuf>,
        /// Emit JSON instead of a plain summary.
        #[arg(long)]
        json: bool,
    },
    /// Run a sweep described by a TOML config and write the verdict CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Override the output path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_matrix(path: &PathBuf) -> Result<GeneratorMatrix> {
    GeneratorMatrix::from_path(path).with_context(|| format!("loading matrix {}", path.display()))
}

fn cmd_classify(matrix: PathBuf, tol: f64, json: bool) -> Result<()> {
    let p = load_matrix(&matrix)?;
    let report = classify(&p, tol);
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!("cases: {:?}", report.case_ids);
    println!("component regime: {:?}", report.component_regime);
    println!("connectivity regime: {:?}", report.connectivity_regime);
    println!(
        "flags: connected={} bipartite={} prod_c {:?} 1, c_min {:?} 1, backbone min degree {}, all equal={}{}",
        report.flags.w_connected,
        report.flags.w_bipartite,
        report.flags.prod_c_vs_one,
        report.flags.c_min_vs_one,
        report.flags.backbone_min_degree,
        report.flags.c_all_equal,
        if report.flags.near_critical { " (near critical surface!)" } else { "" },
    );
    println!("prod_c = {:.12}", report.params.prod_c);
    if let Some(s) = report.params.sum_c_ln_c {
        println!("sum c_i ln c_i = {s:.12}");
    }
    if report.params.eps_max_unbounded {
        println!("eps_max = +inf (all column sums equal)");
    } else if let Some(e) = report.params.eps_max {
        println!("eps_max = {e:.6}");
    }
    if let (Some(eps), Some(d)) = (report.params.core_eps, report.params.core_growth_d) {
        println!("core: eps = {eps:.6}, growth d = {d:.6}");
    }
    if let Some(sc) = &report.params.subcritical {
        match sc.alpha {
            Some(a) => println!("subcritical: alpha = {a:.6}, delta = {:.6}", sc.delta),
            None => println!("subcritical (equal columns): delta = {:.6}", sc.delta),
        }
    }
    if let Some(gap) = report.params.gap {
        println!("spectral gap = {gap:.6}");
    }
    if let Some(s) = report.params.mixing_s {
        println!("mixing steps (at core eps) = {s}");
    }
    Ok(())
}

fn cmd_spectrum(matrix: PathBuf, t: Option<u32>, eps: f64) -> Result<()> {
    let p = load_matrix(&matrix)?;
    let d = derive(&p);
    let spectrum = walk_spectrum(&d)?;
    let mut out = serde_json::json!({
        "mu": spectrum.mu,
        "lap": spectrum.lap,
        "gap": spectrum.gap,
    });
    if spectrum.gap > 0.0 {
        let s = mixing_steps(&spectrum, &d, eps)?;
        out["eps"] = eps.into();
        out["s"] = s.into();
        out["s_literal"] = mixing_steps_literal(&spectrum, &d, eps)?.into();
        out["delta_s"] = rpd_delta(&d, s)?.into();
    }
    if spectrum.mu.len() > 1 {
        let lambda1 = 1.0 - spectrum.mu[1];
        if (0.0..=2.0).contains(&lambda1) {
            let (lo, hi) = cheeger_interval(lambda1)?;
            out["cheeger"] = serde_json::json!([lo, hi]);
        }
    }
    if let Some(t) = t {
        let eigs: Vec<_> = kron_power_spectrum(&spectrum, t)?.collect();
        let total: u128 = eigs.iter().map(|e| e.multiplicity).sum();
        let smallest_nonzero = eigs
            .iter()
            .filter(|e| e.lap > 1e-12)
            .map(|e| e.lap)
            .fold(f64::INFINITY, f64::min);
        out["kron"] = serde_json::json!({
            "t": t,
            "distinct": eigs.len(),
            "total_multiplicity": total.to_string(),
            "smallest_nonzero_lap": smallest_nonzero,
        });
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_sample(
    matrix: PathBuf,
    t: u32,
    seed: u64,
    workers: usize,
    output: Option<PathBuf>,
) -> Result<()> {
    let p = load_matrix(&matrix)?;
    let g = sample(&p, t, seed, workers)?;
    match output {
        Some(path) => {
            edgefile::write_path(&g, &path)?;
            eprintln!(
                "wrote {} edges (n = {}) to {}",
                g.edges.len(),
                g.n,
                path.display()
            );
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = std::io::BufWriter::new(stdout.lock());
            edgefile::write_text(&g, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_stats(
    graph: PathBuf,
    diameter: bool,
    vertex_sample: Option<u32>,
    matrix: Option<PathBuf>,
    json: bool,
) -> Result<()> {
    let g = edgefile::read_path(&graph)?;
    let stats = component_stats(&g)?;
    let mut out = serde_json::json!({
        "k": g.k, "t": g.t, "seed": g.seed,
        "stats": stats,
    });
    if diameter || vertex_sample.is_some() {
        let adj = Adjacency::from_edges(g.n, &g.edges)?;
        if diameter {
            if g.n <= EXACT_DIAMETER_MAX_N {
                out["diameter"] = diameter_exact(&adj)?.into();
            } else {
                out["diameter_lower_bound"] = diameter_double_sweep(&adj, 16, g.seed)?.into();
            }
        }
        if let Some(count) = vertex_sample {
            let Some(matrix) = matrix else {
                bail!("--vertex-sample needs --matrix to compute expected degrees");
            };
            let p = load_matrix(&matrix)?;
            let d = derive(&p);
            let mut rng = skg_core::rng::substream(g.seed, skg_core::rng::DOMAIN_STATS, 2);
            use rand::Rng;
            let ids: Vec<u64> = (0..count).map(|_| rng.random_range(0..g.n)).collect();
            let rows = degree_vs_expected(&g, &p, &d, &adj, &ids)?;
            out["degree_rows"] = serde_json::to_value(&rows)?;
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!(
            "n = {}, m = {}, isolated = {}, components = {}, largest = {} ({:.4} of n)",
            stats.n,
            stats.m,
            stats.isolated,
            stats.component_count,
            stats.largest,
            stats.largest_fraction
        );
        if let Some(d) = out.get("diameter") {
            println!("diameter = {d}");
        }
        if let Some(d) = out.get("diameter_lower_bound") {
            println!("diameter >= {d}");
        }
    }
    Ok(())
}

fn cmd_experiment(config: PathBuf, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&config)
        .with_context(|| format!("loading config {}", config.display()))?;
    if let Some(out) = out {
        cfg.output = out;
    }
    let rows = run_experiment(&cfg)?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "wrote {} rows to {} ({} failed)",
        rows.len(),
        cfg.output.display(),
        failures
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify { matrix, tol, json } => cmd_classify(matrix, tol, json),
        Command::Spectrum { matrix, t, eps } => cmd_spectrum(matrix, t, eps),
        Command::Sample { matrix, t, seed, workers, output } => {
            cmd_sample(matrix, t, seed, workers, output)
        }
        Command::Stats { graph, diameter, vertex_sample, matrix, json } => {
            cmd_stats(graph, diameter, vertex_sample, matrix, json)
        }
        Command::Experiment { config, out } => cmd_experiment(config, out),
    }
}
