//! Command-line front end: every experiment kind as a subcommand, plus the
//! built-in catalog and `run -f spec.json` for declarative specs.
//!
//! Exit codes: 0 success, 2 invalid spec, 3 a declared expectation failed,
//! 1 any other error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ranklab::experiments::{
    self, CensusCheck, CensusParams, CokerParams, ExperimentKind, ExperimentSpec,
    HeightScanParams, PrimePowerCase, RankScalingParams, RstCase, RstParams, ScalingCase,
    SelmerAvgParams, SelmerDistParams, ShaAverageParams,
};

#[derive(Parser)]
#[command(
    name = "ranklab",
    version,
    about = "Simulation laboratory for rank, Selmer, and Tate-Shafarevich heuristics of elliptic curves"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// RNG seed; mandatory so every run is reproducible
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path prefix; writes <prefix>.csv and <prefix>.json
    #[arg(long)]
    out: Option<String>,
}

fn parse_pair(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got {s}"))?;
    Ok((
        a.parse().map_err(|e| format!("{e}"))?,
        b.parse().map_err(|e| format!("{e}"))?,
    ))
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact census of minimal curves up to the given heights
    Census {
        /// Height bounds, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        heights: Vec<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical p-Selmer dimension law vs the closed-form density
    SelmerDist {
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5])]
        primes: Vec<u64>,
        /// Half-dimension n of the hyperbolic space
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Average intersection order vs sigma(p^e)
    SelmerAvg {
        /// Prime-power cases as p:e (repeatable)
        #[arg(long = "case", value_parser = parse_pair, default_values = ["2:1", "3:1", "2:2", "5:1", "2:3", "3:2"])]
        cases: Vec<(u64, u64)>,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Corank distribution of the rank/Selmer/Sha intersection model
    Rst {
        /// Cases as p:n (repeatable)
        #[arg(long = "case", value_parser = parse_pair, required = true)]
        cases: Vec<(u64, u64)>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 8)]
        e_init: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Pseudo-Sha histogram of alternating matrices over Z_p, conditioned on pseudo-rank
    Coker {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u64,
        /// Conditioned pseudo-rank (parity must match n)
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Kernel-rank scaling in the entry bound X
    RankScaling {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        x_grid: Vec<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Expected log-log slope (defaults to -(r-1)/2 * n)
        #[arg(long)]
        slope: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        slope_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Pseudo-rank counts over a height grid
    HeightScan {
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<u64>,
        #[arg(long, default_value_t = 10_000)]
        curves: u64,
        /// Scale per-height counts like the census H^{5/6}
        #[arg(long)]
        proportional: bool,
        #[arg(long, default_value_t = 1.0)]
        eta_coeff: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Average rank-0 pseudo-Sha order at one height
    ShaAverage {
        #[arg(long)]
        h: u64,
        #[arg(long, default_value_t = 100_000)]
        curves: u64,
        #[arg(long, default_value_t = 1.0)]
        eta_coeff: f64,
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in experiments (one per verification criterion)
    Catalog,
    /// Run a spec from a JSON file or the catalog
    Run {
        /// JSON spec file
        #[arg(short = 'f', long)]
        file: Option<String>,
        /// Catalog entry name
        #[arg(long, conflicts_with = "file")]
        name: Option<String>,
        /// Override the spec's seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<String>,
    },
}

fn spec_from_cmd(cmd: &Cmd) -> Option<ExperimentSpec> {
    let (name, kind, common) = match cmd {
        Cmd::Census { heights, common } => (
            "census",
            ExperimentKind::Census(CensusParams {
                heights: heights.clone(),
                checks: vec![CensusCheck {
                    h: 100,
                    exact_count: heights.contains(&100).then_some(14),
                    normalized_within_pct: None,
                }],
            }),
            common.clone(),
        ),
        Cmd::SelmerDist {
            primes,
            n,
            samples,
            common,
        } => (
            "selmer-dist",
            ExperimentKind::SelmerDist(SelmerDistParams {
                primes: primes.clone(),
                half_dim: *n,
                samples: *samples,
                tv_max: None,
            }),
            common.clone(),
        ),
        Cmd::SelmerAvg {
            cases,
            n,
            samples,
            common,
        } => (
            "selmer-avg",
            ExperimentKind::SelmerAvg(SelmerAvgParams {
                cases: cases
                    .iter()
                    .map(|&(p, e)| PrimePowerCase { p, e: e as u32 })
                    .collect(),
                half_dim: *n,
                samples: *samples,
                rel_err_max_pct: None,
            }),
            common.clone(),
        ),
        Cmd::Rst {
            cases,
            samples,
            e_init,
            common,
        } => (
            "rst",
            ExperimentKind::Rst(RstParams {
                cases: cases
                    .iter()
                    .map(|&(p, n)| RstCase { p, n: n as usize })
                    .collect(),
                samples: *samples,
                e_init: *e_init,
                corank_window: None,
            }),
            common.clone(),
        ),
        Cmd::Coker {
            n,
            p,
            rank,
            samples,
            common,
        } => (
            "coker",
            ExperimentKind::Coker(CokerParams {
                n: *n,
                p: *p,
                pseudo_rank: *rank,
                samples: *samples,
                e_init: 8,
            }),
            common.clone(),
        ),
        Cmd::RankScaling {
            n,
            r,
            x_grid,
            samples,
            slope,
            slope_tol,
            common,
        } => (
            "rank-scaling",
            ExperimentKind::RankScaling(RankScalingParams {
                cases: vec![ScalingCase {
                    n: *n,
                    r: *r,
                    x_grid: x_grid.clone(),
                    samples: *samples,
                    slope_expect: slope
                        .unwrap_or(-((*r as f64 - 1.0) / 2.0) * *n as f64),
                    slope_tol: *slope_tol,
                    exact_at: None,
                }],
                enumeration_budget: 1 << 21,
            }),
            common.clone(),
        ),
        Cmd::HeightScan {
            grid,
            curves,
            proportional,
            eta_coeff,
            common,
        } => (
            "height-scan",
            ExperimentKind::HeightScan(HeightScanParams {
                grid: grid.clone(),
                curves_per_h: *curves,
                proportional: *proportional,
                eta_coeff: *eta_coeff,
                exponent: 1.0 / 12.0,
                slope_r2_window: None,
                require_r3_steeper: false,
            }),
            common.clone(),
        ),
        Cmd::ShaAverage {
            h,
            curves,
            eta_coeff,
            common,
        } => (
            "sha-average",
            ExperimentKind::ShaAverage(ShaAverageParams {
                h: *h,
                curves: *curves,
                eta_coeff: *eta_coeff,
                exponent: 1.0 / 12.0,
                log_ratio_window: None,
            }),
            common.clone(),
        ),
        Cmd::Catalog | Cmd::Run { .. } => return None,
    };
    Some(ExperimentSpec {
        name: name.to_string(),
        description: None,
        kind,
        seed: common.seed,
        parallelism: common.jobs,
        output: common.out,
    })
}

fn print_table(table: &experiments::ResultTable) {
    println!("# {} ({}) seed={}", table.name, table.kind, table.seed);
    println!("{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("{}", cells.join(","));
    }
    for item in &table.summary {
        match (&item.expected, item.pass) {
            (Some(exp), Some(ok)) => println!(
                "summary: {} = {} (expected {}): {}",
                item.label,
                item.value,
                exp,
                if ok { "PASS" } else { "FAIL" }
            ),
            _ => println!("summary: {} = {}", item.label, item.value),
        }
    }
}

fn execute(spec: &ExperimentSpec) -> ExitCode {
    match experiments::run(spec) {
        Ok(table) => {
            print_table(&table);
            if let Some(prefix) = &spec.output {
                eprintln!("wrote {prefix}.csv and {prefix}.json");
            }
            if table.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} declared check(s) failed", table.failures().len());
                ExitCode::from(3)
            }
        }
        Err(experiments::ExperimentError::InvalidSpec(msg)) => {
            eprintln!("invalid spec: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Catalog => {
            for spec in experiments::catalog() {
                println!(
                    "{:24} [{}] seed={} — {}",
                    spec.name,
                    spec.kind.kind_name(),
                    spec.seed,
                    spec.description.as_deref().unwrap_or("")
                );
            }
            ExitCode::SUCCESS
        }
        Cmd::Run {
            file,
            name,
            seed,
            jobs,
            out,
        } => {
            let mut spec = match (file, name) {
                (Some(path), None) => {
                    let text = match std::fs::read_to_string(path) {
                        Ok(t) => t,
                        Err(e) => {
                            eprintln!("cannot read {path}: {e}");
                            return ExitCode::from(2);
                        }
                    };
                    match serde_json::from_str::<ExperimentSpec>(&text) {
                        Ok(s) => s,
                        Err(e) => {
                            eprintln!("invalid spec: {e}");
                            return ExitCode::from(2);
                        }
                    }
                }
                (None, Some(n)) => match experiments::catalog_entry(n) {
                    Some(s) => s,
                    None => {
                        eprintln!("no catalog entry named {n}");
                        return ExitCode::from(2);
                    }
                },
                _ => {
                    eprintln!("run needs exactly one of --file or --name");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                spec.seed = *s;
            }
            if jobs.is_some() {
                spec.parallelism = *jobs;
            }
            if out.is_some() {
                spec.output = out.clone();
            }
            execute(&spec)
        }
        cmd => {
            let spec = spec_from_cmd(cmd).expect("subcommand builds a spec");
            execute(&spec)
        }
    }
}
