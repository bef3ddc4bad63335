use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use loose3::embedder::{exact_embed, pipeline, EmbedQuery, EmbedStatus, PipelineParams};
use loose3::loose_tree::{binary_loose_tree, loose_path, random_loose_tree};
use loose3::regularity::{synthetic_regular_host, DensityMap, Partition, PlantedSpec};
use loose3::rng::derive_seed;
use loose3::{verify_embedding, Hypergraph3, LooseTree, Rational};

use crate::output::SCHEMA;
use crate::Cli;

/// Largest host the exact mode accepts.
pub const EXACT_CAP: usize = 15;
/// Default node budget per exact trial.
pub const EXACT_BUDGET: u64 = 2_000_000;
pub const COLUMNS: [&str; 7] = ["schema", "n", "density", "family", "trials", "successes", "mean_runtime_ms"];
pub const WORKERS_ENV: &str = "LOOSE3_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Path,
    Binary,
    BinaryEven,
    Random,
}

impl Family {
    fn tag(self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Binary => "binary",
            Family::BinaryEven => "binary-even",
            Family::Random => "random",
        }
    }

    fn tree(self, n: usize, seed: u64) -> Result<LooseTree> {
        Ok(match self {
            Family::Path => loose_path(n)?,
            Family::Binary | Family::BinaryEven => {
                let levels = (n + 1).trailing_zeros() as usize;
                if n < 3 || (n + 1) != 1 << levels {
                    bail!("{} trees have 2^l - 1 vertices, not {n}", self.tag());
                }
                if self == Family::BinaryEven && levels % 2 == 1 {
                    bail!("binary-even needs an even number of levels; n = {n} has {levels}");
                }
                binary_loose_tree(levels)?
            }
            Family::Random => random_loose_tree(n, 3, seed)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanMode {
    /// Uniform random hosts, exact search (n up to the cap).
    Exact,
    /// Planted 7-cluster hosts, absorbing pipeline.
    Pipeline,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Comma-separated host sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Comma-separated densities in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub density: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = ScanMode::Exact)]
    pub mode: ScanMode,
}

struct Trial {
    ok: bool,
    ms: f64,
}

fn run_trial(a: &ScanArgs, n: usize, density: f64, seed: u64, budget: Option<u64>) -> Result<Trial> {
    let start = Instant::now();
    let tree = a.family.tree(n, derive_seed(seed, 0))?;
    let ok = match a.mode {
        ScanMode::Exact => {
            let spec = PlantedSpec {
                t: 3,
                m: n / 3,
                exceptional: n % 3,
                densities: DensityMap::Uniform(density),
                noise: density,
            };
            let (host, _) = synthetic_regular_host(&spec, derive_seed(seed, 1))?;
            let q = EmbedQuery { budget: Some(budget.unwrap_or(EXACT_BUDGET)), ..EmbedQuery::new(&tree, &host) };
            let r = exact_embed(&q)?;
            r.status == EmbedStatus::Found && r.embedding.is_some_and(|e| verify_embedding(&e, tree.graph(), &host))
        }
        ScanMode::Pipeline => {
            let (host, part) = planted(n, density, derive_seed(seed, 1))?;
            let mut params = PipelineParams::<Rational>::desk(n, derive_seed(seed, 2));
            if let Some(b) = budget {
                params.absorb_budget = b;
            }
            match pipeline(&tree, &host, &part, &params) {
                Ok(o) => o.result.embedding.is_some_and(|e| verify_embedding(&e, tree.graph(), &host)),
                Err(_) => false,
            }
        }
    };
    Ok(Trial { ok, ms: start.elapsed().as_secs_f64() * 1e3 })
}

/// Seven clusters with `density` on consecutive triples and half of it elsewhere.
fn planted(n: usize, density: f64, seed: u64) -> Result<(Hypergraph3, Partition)> {
    let m = n.saturating_sub(3) / 7;
    let spec = PlantedSpec {
        t: 7,
        m,
        exceptional: n - 7 * m,
        densities: DensityMap::Consecutive { dense: density, sparse: density / 2.0 },
        noise: density,
    };
    Ok(synthetic_regular_host(&spec, seed)?)
}

fn pool() -> Result<rayon::ThreadPool> {
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(s) => s.trim().parse::<usize>().with_context(|| format!("{WORKERS_ENV} must be a number, got {s:?}"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

pub fn scan(cli: &Cli, a: &ScanArgs) -> Result<Value> {
    for &d in &a.density {
        if !(0.0..=1.0).contains(&d) {
            bail!("density {d} outside [0, 1]");
        }
    }
    for &n in &a.n {
        if a.mode == ScanMode::Exact && n > EXACT_CAP {
            bail!("n = {n} is above the exact-mode cap {EXACT_CAP}; use --mode pipeline");
        }
        if a.mode == ScanMode::Pipeline && n < 7 * 3 + 3 {
            bail!("pipeline mode needs n >= 24, got {n}");
        }
        a.family.tree(n, 0)?;
    }
    let grid: Vec<(usize, f64)> = a.n.iter().flat_map(|&n| a.density.iter().map(move |&d| (n, d))).collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..a.trials).map(move |k| (g, k))).collect();
    let results: Vec<Result<Trial>> = pool()?.install(|| {
        jobs.par_iter()
            .map(|&(g, k)| {
                let (n, d) = grid[g];
                run_trial(a, n, d, derive_seed(cli.seed, (g * a.trials + k) as u64), cli.budget)
            })
            .collect()
    });
    let mut rows = Vec::new();
    for (g, &(n, d)) in grid.iter().enumerate() {
        if a.trials == 0 {
            continue;
        }
        let mut successes = 0usize;
        let mut total_ms = 0.0;
        for r in &results[g * a.trials..(g + 1) * a.trials] {
            let t = r.as_ref().map_err(|e| anyhow::anyhow!("{e:#}"))?;
            successes += usize::from(t.ok);
            total_ms += t.ms;
        }
        rows.push(json!([SCHEMA, n, d, a.family.tag(), a.trials, successes, total_ms / a.trials as f64]));
    }
    Ok(json!({
        "schema": SCHEMA,
        "command": "scan",
        "seed": cli.seed,
        "mode": format!("{:?}", a.mode).to_lowercase(),
        "table": {"columns": COLUMNS, "rows": rows},
    }))
}
