//! Command-line front end: `simulate | fit | evaluate | table1 | consensus | convergence`.
//!
//! Every command writes JSON (or CSV for datasets). Exit codes: 0 success,
//! 2 usage or parse error, 3 data or schema error, 4 scale cap exceeded.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::consensus::{gamma_dispersion, gamma_ustat, pairwise_matrix, pseudo_median, RankingSample};
use crate::crit::{CritTree, GrowConfig};
use crate::dataset::{ConstantRule, RankingDataset, RankingRule};
use crate::ensemble::{fit_bagged, BaggedForest, ForestConfig, Resample};
use crate::error::{Error, Result};
use crate::evaluation::{
    consensus_convergence, regression_convergence, risk_report, run_table1, Method, NeighborRule,
    RegressionStudy, Table1Config,
};
use crate::knn::{DistanceSpec, KnnModel};
use crate::mallows::{generate_scenario, Dispersion, Setting, SyntheticScenario};
use crate::perm::Permutation;

#[derive(Debug, Parser)]
#[command(name = "rankmedian", version, about = "Ranking median regression toolkit")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a synthetic dataset; writes the CSV and a `<stem>.truth.json` sidecar.
    Simulate(SimulateArgs),
    /// Fit a k-NN, CRIT or bagged-CRIT model and save it as JSON.
    Fit(FitArgs),
    /// Risk of a saved model on a dataset, with per-pair misorder rates.
    Evaluate(EvaluateArgs),
    /// Run the simulation grid and write JSON and CSV reports.
    Table1(Table1Args),
    /// Consensus ranking of a dataset's rankings or of a ranking list.
    Consensus(ConsensusArgs),
    /// Risk against sample size, for the consensus or the regression problem.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario JSON (setting, K, n, phi, seed, cells, centers).
    #[arg(long, conflicts_with_all = ["setting", "items", "phi"])]
    scenario: Option<PathBuf>,
    /// Preset setting 1, 2 or 3 (used without --scenario).
    #[arg(long)]
    setting: Option<usize>,
    /// Number of items of the preset.
    #[arg(long = "items", short = 'n')]
    items: Option<usize>,
    /// Mallows dispersion of the preset, or "inf" for noiseless.
    #[arg(long)]
    phi: Option<Dispersion>,
    /// Number of records to draw.
    #[arg(long = "records", short = 'N')]
    records: usize,
    /// Master seed; overrides the scenario file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FitMethod {
    Knn,
    Crit,
    Bagged,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Training CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    method: FitMethod,
    /// Neighbors for k-NN.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Distance for k-NN; defaults to mixed when any feature is categorical.
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
    /// Weakest-link pruning penalty per leaf (CRIT only).
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of bootstrap trees (bagged only).
    #[arg(long, default_value_t = 10)]
    bags: usize,
    /// Features tried per split, all when absent.
    #[arg(long)]
    max_features: Option<usize>,
    /// Seed for bootstrap and feature subsampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Model output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the tree as Graphviz DOT (CRIT only).
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Metric {
    Euclidean,
    Mixed,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Table1Args {
    /// JSON config; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these item counts (comma-separated).
    #[arg(long, value_delimiter = ',')]
    items: Option<Vec<usize>>,
    /// Attach the published values for side-by-side comparison.
    #[arg(long)]
    with_published: bool,
    /// Output directory for `table1.json` and `table1.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ConsensusArgs {
    /// Dataset CSV with a `ranking` column, or one ranking per line.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Study {
    Consensus,
    Regression,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[arg(long, value_enum, default_value = "consensus")]
    study: Study,
    #[arg(long = "items", short = 'n', default_value_t = 3)]
    items: usize,
    #[arg(long, default_value = "2")]
    phi: Dispersion,
    /// Training sizes (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "125,250,500,1000,2000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Regression study: setting 1, 2 or 3.
    #[arg(long, default_value_t = 1)]
    setting: usize,
    /// Regression study: knn or crit.
    #[arg(long, default_value = "knn")]
    method: Method,
    /// Regression study: fixed k; `⌈√N⌉` when absent.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A saved model, tagged by kind.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelFile {
    Knn(KnnModel),
    Crit(CritTree),
    Bagged(BaggedForest),
    Constant(ConstantRule),
}

impl ModelFile {
    pub fn rule(&self) -> &dyn RankingRule {
        match self {
            ModelFile::Knn(m) => m,
            ModelFile::Crit(m) => m,
            ModelFile::Bagged(m) => m,
            ModelFile::Constant(m) => m,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(io::BufReader::new(open(path)?))?)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path) -> Result<RankingDataset> {
    RankingDataset::read_csv(open(path)?)
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

/// Parses and runs; returns the process exit code.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("RANKMEDIAN_LOG", "warn")).try_init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Parse("--threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Table1(a) => table1(a),
        Command::Consensus(a) => consensus(a),
        Command::Convergence(a) => convergence(a),
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.truth.json"))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.records == 0 {
        return Err(Error::InvalidInput("--records must be positive".into()));
    }
    let scenario = match &a.scenario {
        Some(path) => {
            let s: SyntheticScenario = serde_json::from_reader(io::BufReader::new(open(path)?))?;
            match a.seed {
                Some(seed) => s.with_seed(seed),
                None => s,
            }
        }
        None => {
            let (Some(setting), Some(n), Some(phi), Some(seed)) = (a.setting, a.items, a.phi, a.seed) else {
                return Err(Error::Parse(
                    "without --scenario, --setting, --items, --phi and --seed are required".into(),
                ));
            };
            SyntheticScenario::preset(Setting::from_number(setting)?, n, phi, seed)?
        }
    };
    let data = generate_scenario(&scenario, a.records)?;
    data.write_csv(BufWriter::new(File::create(&a.out)?))?;
    write_json(&scenario, Some(&sidecar_path(&a.out)))?;
    log::info!("wrote {} records to {}", data.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct FitSummary {
    method: String,
    records: usize,
    training_risk: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    leaves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dispersion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    importance: Option<BTreeMap<String, f64>>,
}

fn fit(a: FitArgs) -> Result<()> {
    let data = read_dataset(&a.data)?;
    let names: Vec<String> = data.schema().columns.iter().map(|c| c.name.clone()).collect();
    let mut grow = GrowConfig::new(a.max_depth, a.min_leaf);
    grow.max_features = a.max_features;
    if a.max_features.is_some() || matches!(a.method, FitMethod::Bagged) {
        grow.seed = a
            .seed
            .ok_or_else(|| Error::Parse("--seed is required for bagging and feature subsampling".into()))?;
    }
    let mut summary = FitSummary {
        method: format!("{:?}", a.method).to_lowercase(),
        records: data.len(),
        training_risk: 0.0,
        leaves: None,
        dispersion: None,
        importance: None,
    };
    let model = match a.method {
        FitMethod::Knn => {
            if a.k > data.len() {
                return Err(Error::InvalidInput(format!(
                    "k = {} exceeds the {} training records",
                    a.k,
                    data.len()
                )));
            }
            let metric = match a.metric {
                Some(Metric::Euclidean) => DistanceSpec::euclidean(),
                Some(Metric::Mixed) => DistanceSpec::mixed(),
                None if data.schema().all_numeric() => DistanceSpec::euclidean(),
                None => DistanceSpec::mixed(),
            };
            ModelFile::Knn(KnnModel::fit(data.clone(), a.k, metric)?)
        }
        FitMethod::Crit => {
            let mut tree = CritTree::grow(&data, &grow)?;
            if let Some(lambda) = a.lambda {
                tree = tree.prune(lambda)?;
            }
            summary.leaves = Some(tree.leaf_count());
            summary.dispersion = Some(tree.dispersion());
            summary.importance = Some(names.iter().cloned().zip(tree.variable_importance()).collect());
            if let Some(dot) = &a.dot {
                fs::write(dot, tree.to_dot())?;
            }
            ModelFile::Crit(tree)
        }
        FitMethod::Bagged => {
            let config = ForestConfig {
                grow: grow.clone(),
                resample: Resample::WithReplacement,
            };
            let forest = fit_bagged(&data, a.bags, &config, grow.seed)?;
            let mut imp = vec![0.0; names.len()];
            for t in forest.trees() {
                for (acc, v) in imp.iter_mut().zip(t.variable_importance()) {
                    *acc += v / forest.trees().len() as f64;
                }
            }
            summary.importance = Some(names.iter().cloned().zip(imp).collect());
            ModelFile::Bagged(forest)
        }
    };
    summary.training_risk = crate::evaluation::empirical_risk(model.rule(), &data)?;
    write_json(&model, Some(&a.out))?;
    write_json(&summary, None)
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let rule = model.rule();
    let data = RankingDataset::read_csv_with_schema(open(&a.data)?, rule.schema())?;
    write_json(&risk_report(rule, &data)?, a.out.as_deref())
}

fn table1(a: Table1Args) -> Result<()> {
    let mut cfg: Table1Config = match &a.config {
        Some(p) => serde_json::from_reader(io::BufReader::new(open(p)?))?,
        None => Table1Config::default(),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(items) = a.items {
        cfg.items = items;
    }
    cfg.with_published |= a.with_published;
    let report = run_table1(&cfg)?;
    fs::create_dir_all(&a.out)?;
    write_json(&report, Some(&a.out.join("table1.json")))?;
    report.write_csv(BufWriter::new(File::create(a.out.join("table1.csv"))?))?;
    let mut out = io::stdout().lock();
    writeln!(out, "{:<10} {:>2} {:>4} {:<5} {:>8} {:>8} {:>8}", "setting", "n", "phi", "method", "risk", "std", "floor")?;
    for r in &report.records {
        writeln!(
            out,
            "{:<10} {:>2} {:>4} {:<5} {:>8.4} {:>8.4} {:>8.4}",
            r.setting.to_string(),
            r.n,
            r.phi.to_string(),
            r.method.to_string(),
            r.mean,
            r.std,
            r.oracle_risk
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ConsensusSummary {
    rankings: usize,
    median: Permutation,
    ordering: String,
    method: String,
    /// Mean Kendall distance from the median to the sample.
    cost: f64,
    /// `Σ p̂ (1 - p̂)` of the empirical pairwise matrix.
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_ustat: Option<f64>,
    sst: bool,
    noise_margin: f64,
}

fn read_rankings(path: &Path) -> Result<RankingSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.split(',').any(|h| h.trim().trim_matches('"') == crate::dataset::RANKING_COLUMN) {
        return Ok(RankingDataset::read_csv(text.as_bytes())?.ranking_sample());
    }
    let rankings = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.trim_matches('"').parse::<Permutation>())
        .collect::<Result<Vec<_>>>()?;
    RankingSample::from_rankings(rankings)
}

fn consensus(a: ConsensusArgs) -> Result<()> {
    let sample = read_rankings(&a.input)?;
    let m = pairwise_matrix(&sample)?;
    let result = pseudo_median(&sample)?;
    let summary = ConsensusSummary {
        rankings: sample.len(),
        ordering: result.median.to_ordering_string(),
        median: result.median,
        method: result.method.to_string(),
        cost: result.cost,
        gamma: gamma_dispersion(&m),
        gamma_ustat: (sample.len() >= 2).then(|| gamma_ustat(&sample)).transpose()?,
        sst: result.sst,
        noise_margin: m.noise_margin(),
    };
    write_json(&summary, a.out.as_deref())
}

fn convergence(a: ConvergenceArgs) -> Result<()> {
    let report = match a.study {
        Study::Consensus => {
            let Dispersion::Finite(phi) = a.phi else {
                return Err(Error::InvalidInput("the consensus study needs a finite --phi".into()));
            };
            consensus_convergence(a.items, phi, &a.sizes, a.trials, a.seed)?
        }
        Study::Regression => regression_convergence(&RegressionStudy {
            setting: Setting::from_number(a.setting)?,
            n: a.items,
            phi: a.phi,
            method: a.method,
            sizes: a.sizes,
            trials: a.trials,
            neighbors: a.k.map_or(NeighborRule::Sqrt, NeighborRule::Fixed),
            max_depth: a.max_depth,
            seed: a.seed,
            ..RegressionStudy::default()
        })?,
    };
    write_json(&report, a.out.as_deref())
}
