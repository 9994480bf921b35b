//! Batch experiment driver: sweeps orders and seeds, runs the sampler and
//! the component statistics, compares observations against the classified
//! regime, and emits a CSV plus a JSON report sidecar. Deterministic given
//! the master seed.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::classify::{classify_derived, lemma_smallcomp_bound, RegimeReport};
use crate::comb::Compositions;
use crate::error::{Result, SkgError};
use crate::genmatrix::{derive, support_report, vertex_count, GeneratorMatrix, SupportReport};
use crate::graphstats::{
    component_stats, diameter_double_sweep, diameter_exact, Adjacency, ComponentAccumulator,
    ComponentStats, EXACT_DIAMETER_MAX_N,
};
use crate::rng::{derive_seed, DOMAIN_ROW_SEED};
use crate::sampler::{for_each_sampled_edge, sample};

pub const CSV_HEADER: &str =
    "t,n,seed,m,isolated,largest,second_largest,largest_fraction,component_count,cases,flags";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Components,
    Isolated,
    Diameter,
    DegreeCheck,
    NeighborCheck,
}

fn default_replicates() -> u32 {
    1
}
fn default_metrics() -> Vec<Metric> {
    vec![Metric::Components, Metric::Isolated]
}
fn default_max_n() -> u64 {
    crate::graphstats::STATS_MAX_N
}
fn default_max_groups() -> u64 {
    crate::sampler::MAX_GROUPS as u64
}
fn default_fraction_floor() -> f64 {
    0.01
}
fn default_shattered_slack() -> f64 {
    10.0
}
fn default_diameter_sweeps() -> u32 {
    16
}
fn default_vertex_sample() -> u32 {
    8
}

/// Flat key/value experiment description; the TOML file mirrors the
/// fields one to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub matrix: PathBuf,
    pub t_values: Vec<u32>,
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    pub output: PathBuf,
    #[serde(default = "default_max_n")]
    pub max_n: u64,
    #[serde(default = "default_max_groups")]
    pub max_groups: u64,
    #[serde(default = "default_fraction_floor")]
    pub giant_fraction_floor: f64,
    #[serde(default = "default_shattered_slack")]
    pub shattered_slack: f64,
    #[serde(default = "default_diameter_sweeps")]
    pub diameter_sweeps: u32,
    #[serde(default = "default_vertex_sample")]
    pub vertex_sample: u32,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() {
            return Err(SkgError::BadConfig("t_values must be nonempty".into()));
        }
        if self.replicates == 0 {
            return Err(SkgError::BadConfig("replicates must be >= 1".into()));
        }
        Ok(())
    }

    fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }
}

/// One sweep row: sampled statistics plus the verdict flags for every
/// regime case whose hypotheses hold for this generator.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub t: u32,
    pub n: u64,
    pub seed: u64,
    pub m: u64,
    pub isolated: u64,
    pub largest: u64,
    pub second_largest: u64,
    pub largest_fraction: f64,
    pub component_count: u64,
    pub cases: Vec<u8>,
    pub flags: Vec<(String, String)>,
    pub error: Option<String>,
}

impl VerdictRow {
    pub fn csv_line(&self) -> String {
        let cases = self
            .cases
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("+");
        let flags = match &self.error {
            Some(e) => format!("error={}", e.replace([',', '\n'], ";")),
            None => self
                .flags
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";"),
        };
        format!(
            "{},{},{},{},{},{},{},{:.9},{},{},{}",
            self.t,
            self.n,
            self.seed,
            self.m,
            self.isolated,
            self.largest,
            self.second_largest,
            self.largest_fraction,
            self.component_count,
            cases,
            flags
        )
    }
}

pub fn row_seed(master_seed: u64, t: u32, replicate: u32) -> u64 {
    derive_seed(
        master_seed,
        DOMAIN_ROW_SEED,
        ((t as u64) << 32) | replicate as u64,
    )
}

#[derive(Debug, Clone, Copy)]
pub struct VerdictThresholds {
    pub giant_fraction_floor: f64,
    pub shattered_slack: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds {
            giant_fraction_floor: default_fraction_floor(),
            shattered_slack: default_shattered_slack(),
        }
    }
}

/// Evaluate the empirical counterpart of every applicable regime case.
/// Flags are only produced for cases present in the report, so a row never
/// judges a claim whose hypotheses fail.
pub fn verdict(
    report: &RegimeReport,
    support: &SupportReport,
    stats: &ComponentStats,
    k: usize,
    t: u32,
    thresholds: &VerdictThresholds,
) -> Vec<(String, String)> {
    let mut flags = Vec::new();
    for &case in &report.case_ids {
        match case {
            1 => {
                let ok = lemma_smallcomp_bound(support, k, t)
                    .map(|b| (stats.largest as u128) <= b.bound + 1)
                    .unwrap_or(false);
                flags.push(("small_components_observed".into(), ok.to_string()));
            }
            2 => {
                if let Some(sc) = &report.params.subcritical {
                    let allowed = thresholds.shattered_slack * (stats.n as f64).powf(sc.delta);
                    let ok = stats.isolated as f64 >= stats.n as f64 - allowed;
                    flags.push(("shattered_observed".into(), ok.to_string()));
                }
            }
            3 | 4 => {
                let ok = stats.largest_fraction >= thresholds.giant_fraction_floor;
                flags.push(("giant_observed".into(), ok.to_string()));
            }
            5 | 6 => {
                let ok = stats.isolated >= 1;
                flags.push(("isolated_observed".into(), ok.to_string()));
            }
            7 | 8 => {
                let ok = stats.component_count == 1;
                flags.push(("connected_observed".into(), ok.to_string()));
            }
            _ => {}
        }
    }
    flags.dedup();
    flags
}

fn run_row(
    p: &GeneratorMatrix,
    report: &RegimeReport,
    support: &SupportReport,
    cfg: &ExperimentConfig,
    t: u32,
    seed: u64,
) -> Result<VerdictRow> {
    let n = vertex_count(p.k(), t)?;
    if n > cfg.max_n {
        return Err(SkgError::Guard { what: "experiment n", value: n as u128, limit: cfg.max_n as u128 });
    }
    let groups = Compositions::count(t, p.k() * p.k())?;
    if groups > cfg.max_groups as u128 {
        return Err(SkgError::Guard {
            what: "experiment groups",
            value: groups,
            limit: cfg.max_groups as u128,
        });
    }

    let needs_adjacency = cfg.wants(Metric::Diameter)
        || cfg.wants(Metric::DegreeCheck)
        || cfg.wants(Metric::NeighborCheck);

    let thresholds = VerdictThresholds {
        giant_fraction_floor: cfg.giant_fraction_floor,
        shattered_slack: cfg.shattered_slack,
    };

    let mut extra_flags: Vec<(String, String)> = Vec::new();
    let stats = if needs_adjacency {
        let g = sample(p, t, seed, 1)?;
        let stats = component_stats(&g)?;
        let adj = Adjacency::from_edges(g.n, &g.edges)?;
        if cfg.wants(Metric::Diameter) {
            let (label, value) = if g.n <= EXACT_DIAMETER_MAX_N {
                ("diameter", diameter_exact(&adj)?)
            } else {
                ("diameter_lower_bound", diameter_double_sweep(&adj, cfg.diameter_sweeps, seed)?)
            };
            extra_flags.push((label.into(), value.to_string()));
        }
        if cfg.wants(Metric::DegreeCheck) || cfg.wants(Metric::NeighborCheck) {
            let d = derive(p);
            let mut rng = crate::rng::substream(seed, crate::rng::DOMAIN_STATS, 1);
            use rand::Rng;
            let sample_ids: Vec<u64> = (0..cfg.vertex_sample)
                .map(|_| rng.random_range(0..g.n))
                .collect();
            if cfg.wants(Metric::DegreeCheck) {
                let rows = crate::graphstats::degree_vs_expected(&g, p, &d, &adj, &sample_ids)?;
                let mean_ratio = rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).sum::<f64>()
                    / rows.len().max(1) as f64;
                extra_flags.push(("degree_ratio_mean".into(), format!("{mean_ratio:.6}")));
            }
            if cfg.wants(Metric::NeighborCheck) {
                let mut worst: f64 = 0.0;
                for &v in &sample_ids {
                    if adj.degree(v) == 0 {
                        continue;
                    }
                    let s = crate::graphstats::neighbor_signature_stats(&g, &d, &adj, v)?;
                    worst = worst.max(s.max_dev);
                }
                extra_flags.push(("neighbor_max_dev".into(), format!("{worst:.6}")));
            }
        }
        stats
    } else {
        let mut acc = ComponentAccumulator::new(n)?;
        for_each_sampled_edge(p, t, seed, |u, v| acc.add_edge(u, v))?;
        acc.finish()
    };

    let mut flags = verdict(report, support, &stats, p.k(), t, &thresholds);
    flags.extend(extra_flags);
    Ok(VerdictRow {
        t,
        n: stats.n,
        seed,
        m: stats.m,
        isolated: stats.isolated,
        largest: stats.largest,
        second_largest: stats.second_largest,
        largest_fraction: stats.largest_fraction,
        component_count: stats.component_count,
        cases: report.case_ids.clone(),
        flags,
        error: None,
    })
}

/// Run the sweep described by `cfg`: rows ordered by `(t, replicate)`,
/// CSV written to `cfg.output`, and the regime report to
/// `<output>.report.json`. Per-row failures are recorded in the row and
/// the run continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<VerdictRow>> {
    cfg.validate()?;
    let p = GeneratorMatrix::from_path(&cfg.matrix)?;
    let d = derive(&p);
    let support = support_report(&d);
    let report = classify_derived(&d, &support, 1e-12);

    let mut rows = Vec::new();
    for &t in &cfg.t_values {
        for replicate in 0..cfg.replicates {
            let seed = row_seed(cfg.master_seed, t, replicate);
            let row = match run_row(&p, &report, &support, cfg, t, seed) {
                Ok(row) => row,
                Err(e) => VerdictRow {
                    t,
                    n: vertex_count(p.k(), t).unwrap_or(0),
                    seed,
                    m: 0,
                    isolated: 0,
                    largest: 0,
                    second_largest: 0,
                    largest_fraction: 0.0,
                    component_count: 0,
                    cases: report.case_ids.clone(),
                    flags: Vec::new(),
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }

    let mut csv = std::io::BufWriter::new(std::fs::File::create(&cfg.output)?);
    writeln!(csv, "{CSV_HEADER}")?;
    for row in &rows {
        writeln!(csv, "{}", row.csv_line())?;
    }
    csv.flush()?;

    let sidecar = sidecar_path(&cfg.output);
    let payload = serde_json::json!({
        "matrix": cfg.matrix,
        "master_seed": cfg.master_seed,
        "report": report,
    });
    std::fs::write(sidecar, serde_json::to_string_pretty(&payload)?)?;
    Ok(rows)
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_owned();
    os.push(".report.json");
    PathBuf::from(os)
}
