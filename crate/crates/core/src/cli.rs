//! Command-line front end. `dispatch` never panics on bad input; it maps
//! validation failures to exit code 1 and numerical failures to 2.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{AmlpError, Result};
use crate::eval::{evaluate_clustering, evaluate_probe, make_splits, mean_std, ProbeConfig, DEFAULT_MAX_ITER};
use crate::graph::{dirichlet_energy, homophily_ratio, normalize_with_self_loops, Aggregator, FeatureMatrix, LabelVector, SparseGraph};
use crate::io::{
    format_float, load_dataset, read_edge_list, read_labels, read_matrix_csv, save_checkpoint, save_dataset,
    write_json, write_matrix_csv, Dataset, FeatureEncoding, RunConfig, RunReport, FEATURES_F32,
};
use crate::model::{exp1_train, train, AmlpConfig};
use crate::reconstruct::{reconstruct, CandidatePolicy, ReconstructionConfig, ReconstructionMode};
use crate::synth::{generate, SbmSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const THREADS_ENV: &str = "AMLP_THREADS";

pub const EMBEDDINGS_FILE: &str = "embeddings.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TRAIN_REPORT_FILE: &str = "train_report.json";
pub const SOFT_WEIGHTS_FILE: &str = "soft_weights.tsv";

/// Defaults for the aggregator comparison.
pub const EXP1_HIDDEN_DIM: usize = 64;
pub const EXP1_EPOCHS: usize = 200;
pub const EXP1_LEARNING_RATE: f64 = 1e-2;
pub const EXP1_LAMBDA: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(name = "amlp", version, about = "Aggregation-aware MLP graph representation learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a raw edge list and CSV files into a dataset directory.
    Prep(PrepArgs),
    /// Refine a dataset's graph and write the result as a new dataset.
    Reconstruct(ReconstructArgs),
    /// Train AMLP (optionally over a hyperparameter grid).
    Train(TrainArgs),
    /// K-means on embeddings, scored by ACC and NMI.
    Cluster(ClusterArgs),
    /// Linear probe accuracy on embeddings.
    Classify(ClassifyArgs),
    /// Homophily ratio and Dirichlet energy.
    Diagnose(DiagnoseArgs),
    /// Compare classical aggregators with and without the aggregation loss.
    Exp1(Exp1Args),
    /// Generate a stochastic block model dataset.
    Sbm(SbmArgs),
}

#[derive(Args, Debug)]
struct PrepArgs {
    /// Edge list, one `u v` pair per line (tab, space or comma separated).
    #[arg(long)]
    edges: PathBuf,
    /// Dense features, one comma-separated row per node.
    #[arg(long)]
    features: PathBuf,
    /// Labels, one integer per line (-1 for unlabeled). All unlabeled if omitted.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "dataset")]
    name: String,
    #[arg(long)]
    out: PathBuf,
    /// Store features as little-endian f32 instead of CSV.
    #[arg(long)]
    f32: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    OriginalEdges,
    AllPairs,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = crate::reconstruct::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "original-edges")]
    policy: PolicyArg,
    /// Sigmoid-weighted edges instead of a hard cut.
    #[arg(long)]
    soft: bool,
    #[arg(long, default_value_t = 1000.0)]
    steepness: f64,
    #[arg(long, default_value_t = crate::reconstruct::DEFAULT_ALL_PAIRS_CAP)]
    all_pairs_cap: usize,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output directory; falls back to `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    emb: PathBuf,
    /// Number of clusters; defaults to num_classes of the dataset.
    #[arg(long)]
    k: Option<usize>,
    /// K-means runs with seeds 0..N, averaged.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = crate::eval::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    emb: PathBuf,
    /// train,val,test fractions; defaults to the dataset's splits.json or 0.48,0.32,0.2.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    n_splits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    emb: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AggregatorArg {
    All,
    Mean,
    Max,
    Sum,
    WeightedSum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WithAggLoss {
    Both,
    True,
    False,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Homophilic,
    Heterophilic,
}

impl Preset {
    fn spec(self, seed: u64) -> SbmSpec {
        match self {
            Preset::Homophilic => SbmSpec::homophilic(seed),
            Preset::Heterophilic => SbmSpec::heterophilic(seed),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Preset::Homophilic => "homophilic",
            Preset::Heterophilic => "heterophilic",
        }
    }
}

#[derive(Args, Debug)]
struct Exp1Args {
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    data: Option<PathBuf>,
    /// Regenerate the preset graph for every seed.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum, default_value = "all")]
    aggregator: AggregatorArg,
    #[arg(long, value_enum, default_value = "both")]
    with_agg_loss: WithAggLoss,
    #[arg(long, default_value_t = EXP1_LAMBDA)]
    lambda: f64,
    /// Seeds 0..N; Dr is averaged.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long, default_value_t = EXP1_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = EXP1_HIDDEN_DIM)]
    hidden_dim: usize,
    #[arg(long, default_value_t = EXP1_LEARNING_RATE)]
    learning_rate: f64,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SbmArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    f32: bool,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| AmlpError::Config(format!("{THREADS_ENV}='{value}' is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    {
        // A pool built earlier in the same process wins; that only happens in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Prep(a) => prep(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Train(a) => train_cmd(a),
        Command::Cluster(a) => cluster(a),
        Command::Classify(a) => classify(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Exp1(a) => exp1(a),
        Command::Sbm(a) => sbm(a),
    }
}

fn encoding(f32: bool) -> FeatureEncoding {
    if f32 {
        FeatureEncoding::F32
    } else {
        FeatureEncoding::Csv
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| AmlpError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_embeddings(path: &Path, ds: &Dataset) -> Result<FeatureMatrix> {
    let emb = read_matrix_csv(path)?;
    if emb.nrows() != ds.meta.num_nodes {
        return Err(AmlpError::Dataset {
            path: path.to_path_buf(),
            msg: format!("expected {} embedding rows, found {}", ds.meta.num_nodes, emb.nrows()),
        });
    }
    FeatureMatrix::new(emb)
}

fn prep(a: PrepArgs) -> Result<()> {
    let x = FeatureMatrix::new(read_matrix_csv(&a.features)?)?;
    let n = x.n_rows();
    let g = SparseGraph::from_edges(&read_edge_list(&a.edges, Some(n))?, n)?;
    let labels = match &a.labels {
        Some(p) => {
            let l = read_labels(p)?;
            if l.len() != n {
                return Err(AmlpError::Dataset {
                    path: p.clone(),
                    msg: format!("expected {n} labels, found {}", l.len()),
                });
            }
            LabelVector::new(l)?
        }
        None => LabelVector::new(vec![LabelVector::UNLABELED; n])?,
    };
    let meta = save_dataset(&a.out, &a.name, &g, &x, &labels, encoding(a.f32))?;
    println!(
        "wrote {} ({} nodes, {} edges, {} features, {} classes)",
        a.out.display(),
        meta.num_nodes,
        g.n_edges(),
        meta.num_features,
        meta.num_classes
    );
    Ok(())
}

fn reconstruct_cmd(a: ReconstructArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load_dataset(&a.data)?;
    let cfg = ReconstructionConfig {
        epsilon: a.epsilon,
        candidate_policy: match a.policy {
            PolicyArg::OriginalEdges => CandidatePolicy::OriginalEdges,
            PolicyArg::AllPairs => CandidatePolicy::AllPairs,
        },
        mode: if a.soft { ReconstructionMode::Soft } else { ReconstructionMode::Hard },
        steepness: a.steepness,
        all_pairs_cap: a.all_pairs_cap,
    };
    let (s, stats) = reconstruct(&ds.graph, &ds.features, &cfg)?;
    let kept = s.threshold(0.5);
    let enc = encoding(ds.meta.features_file == FEATURES_F32);
    save_dataset(&a.out, &format!("{}-reconstructed", ds.meta.name), &kept, &ds.features, &ds.labels, enc)?;
    if a.soft {
        let mut text = String::new();
        for i in 0..s.n_nodes() {
            let (cols, vals) = s.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                if i < j {
                    text.push_str(&format!("{i}\t{j}\t{}\n", format_float(w)));
                }
            }
        }
        let path = a.out.join(SOFT_WEIGHTS_FILE);
        fs::write(&path, text).map_err(|e| AmlpError::io(&path, e))?;
    }
    let report = RunReport::new("reconstruct", &cfg, 0, &stats, start.elapsed().as_secs_f64())?;
    emit(&report.to_json()?, Some(&a.out.join(REPORT_FILE)))?;
    println!(
        "kept {} of {} candidate edges -> {}",
        stats.edges_kept,
        stats.candidates_scored,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct GridRun {
    k: usize,
    lambda: f64,
    learning_rate: f64,
    seed: u64,
    acc: Option<f64>,
    nmi: Option<f64>,
    final_loss: f64,
    epochs_run: usize,
    dirichlet_energy: f64,
    wall_clock_seconds: f64,
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let start = Instant::now();
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = a.epochs {
        cfg.epochs = epochs;
    }
    cfg.validate()?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| AmlpError::Config("no output directory: pass --out or set `output`".into()))?;
    cfg.output = Some(out.clone());

    let ds = load_dataset(&a.data)?;
    let labeled = ds.meta.num_classes > 0 && !ds.labels.labeled_indices().is_empty();
    let recon = cfg.reconstruction();

    let mut runs = Vec::new();
    let mut best: Option<(usize, f64, crate::model::AmlpModel, FeatureMatrix, crate::model::TrainReport)> = None;
    for point in cfg.grid() {
        for seed in cfg.seeds() {
            let mcfg = AmlpConfig { seed, ..point.clone() };
            let (model, y_hat, report) = train(&ds.graph, &ds.features, &mcfg, &recon)?;
            let scores = if labeled {
                let m = evaluate_clustering(&y_hat, &ds.labels, ds.meta.num_classes, &[seed], cfg.kmeans_restarts, cfg.kmeans_max_iter)?;
                Some((m.acc, m.nmi))
            } else {
                None
            };
            runs.push(GridRun {
                k: mcfg.k,
                lambda: mcfg.lambda,
                learning_rate: mcfg.learning_rate,
                seed,
                acc: scores.map(|s| s.0),
                nmi: scores.map(|s| s.1),
                final_loss: report.records.last().map_or(f64::NAN, |r| r.loss),
                epochs_run: report.epochs_run,
                dirichlet_energy: report.final_dirichlet_energy,
                wall_clock_seconds: report.wall_clock_seconds,
            });
            let acc = scores.map_or(f64::NEG_INFINITY, |s| s.0);
            if best.as_ref().is_none_or(|b| acc > b.1) {
                best = Some((runs.len() - 1, acc, model, y_hat, report));
            }
        }
    }
    let (best_idx, _, model, y_hat, report) = best.expect("grid is never empty");

    fs::create_dir_all(&out).map_err(|e| AmlpError::io(&out, e))?;
    write_matrix_csv(&out.join(EMBEDDINGS_FILE), y_hat.as_array())?;
    save_checkpoint(&out, &model)?;
    write_json(&out.join(TRAIN_REPORT_FILE), &report)?;
    let best_run = &runs[best_idx];
    let metrics = json!({
        "best": best_idx,
        "best_by": if labeled { "acc" } else { "first" },
        "acc": best_run.acc,
        "nmi": best_run.nmi,
        "runs": runs,
    });
    let rr = RunReport::new("train", &cfg, model.config.seed, &metrics, start.elapsed().as_secs_f64())?;
    emit(&rr.to_json()?, Some(&out.join(REPORT_FILE)))?;
    println!("{}", serde_json::to_string(&metrics["runs"][best_idx])?);
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load_dataset(&a.data)?;
    let y = load_embeddings(&a.emb, &ds)?;
    let k = a.k.unwrap_or(ds.meta.num_classes);
    if a.seeds == 0 {
        return Err(AmlpError::Config("--seeds must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..a.seeds as u64).collect();
    let record = evaluate_clustering(&y, &ds.labels, k, &seeds, a.restarts, DEFAULT_MAX_ITER)?;
    let config = json!({
        "data": a.data,
        "emb": a.emb,
        "k": k,
        "seeds": a.seeds,
        "restarts": a.restarts,
        "max_iter": DEFAULT_MAX_ITER,
    });
    let report = RunReport::new("cluster", &config, 0, &record, start.elapsed().as_secs_f64())?;
    emit(&report.to_json()?, a.out.as_deref())
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load_dataset(&a.data)?;
    let y = load_embeddings(&a.emb, &ds)?;
    let splits = match (&a.ratios, &ds.splits) {
        (None, Some(s)) => s.clone(),
        (r, _) => {
            let r = r.as_deref().unwrap_or(&[0.48, 0.32, 0.20]);
            if r.len() != 3 {
                return Err(AmlpError::Config(format!("--ratios needs train,val,test; got {} values", r.len())));
            }
            make_splits(&ds.labels, [r[0], r[1], r[2]], a.n_splits, a.seed)?
        }
    };
    let probe = ProbeConfig::default();
    let record = evaluate_probe(&y, &ds.labels, &splits, &probe)?;
    let config = json!({
        "data": a.data,
        "emb": a.emb,
        "ratios": splits.ratios,
        "n_splits": splits.splits.len(),
        "probe": probe,
    });
    let report = RunReport::new("classify", &config, a.seed, &record, start.elapsed().as_secs_f64())?;
    emit(&report.to_json()?, a.out.as_deref())
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let start = Instant::now();
    let ds = load_dataset(&a.data)?;
    let homophily = if ds.labels.labeled_indices().is_empty() {
        None
    } else {
        homophily_ratio(&ds.graph, &ds.labels).ok()
    };
    let energy = match &a.emb {
        Some(p) => {
            let y = load_embeddings(p, &ds)?;
            Some(dirichlet_energy(&normalize_with_self_loops(&ds.graph), &y)?)
        }
        None => None,
    };
    let metrics = json!({
        "num_nodes": ds.graph.n_nodes(),
        "num_edges": ds.graph.n_edges(),
        "homophily_ratio": homophily,
        "dirichlet_energy": energy,
    });
    let config = json!({ "data": a.data, "emb": a.emb });
    let report = RunReport::new("diagnose", &config, 0, &metrics, start.elapsed().as_secs_f64())?;
    emit(&report.to_json()?, a.out.as_deref())
}

fn exp1(a: Exp1Args) -> Result<()> {
    if a.seeds == 0 {
        return Err(AmlpError::Config("--seeds must be at least 1".into()));
    }
    let kinds: Vec<Aggregator> = match a.aggregator {
        AggregatorArg::All => Aggregator::ALL.to_vec(),
        AggregatorArg::Mean => vec![Aggregator::Mean],
        AggregatorArg::Max => vec![Aggregator::Max],
        AggregatorArg::Sum => vec![Aggregator::Sum],
        AggregatorArg::WeightedSum => vec![Aggregator::WeightedSum],
    };
    let flags: Vec<bool> = match a.with_agg_loss {
        WithAggLoss::Both => vec![true, false],
        WithAggLoss::True => vec![true],
        WithAggLoss::False => vec![false],
    };
    let loaded = match &a.data {
        Some(p) => Some(load_dataset(p)?),
        None => None,
    };
    let mut energies = vec![Vec::with_capacity(a.seeds); kinds.len() * flags.len()];
    for seed in 0..a.seeds as u64 {
        let (g, x) = match (&loaded, a.preset) {
            (Some(ds), _) => (ds.graph.clone(), ds.features.clone()),
            (None, Some(p)) => {
                let (g, x, _) = generate(&p.spec(seed))?;
                (g, x)
            }
            (None, None) => unreachable!("clap enforces a source"),
        };
        let cfg = AmlpConfig {
            hidden_dim: a.hidden_dim,
            epochs: a.epochs,
            learning_rate: a.learning_rate,
            seed,
            ..Default::default()
        };
        for (ki, &kind) in kinds.iter().enumerate() {
            for (fi, &flag) in flags.iter().enumerate() {
                let (dr, _) = exp1_train(&g, &x, kind, flag, a.lambda, &cfg)?;
                energies[ki * flags.len() + fi].push(dr);
            }
        }
    }
    let mut csv = String::from("aggregator,with_agg_loss,dr_mean,dr_std,n_seeds\n");
    for (ki, kind) in kinds.iter().enumerate() {
        for (fi, flag) in flags.iter().enumerate() {
            let (mean, std) = mean_std(&energies[ki * flags.len() + fi]);
            csv.push_str(&format!(
                "{},{flag},{},{},{}\n",
                kind.name(),
                format_float(mean),
                format_float(std),
                a.seeds
            ));
        }
    }
    emit(&csv, a.out.as_deref())
}

fn sbm(a: SbmArgs) -> Result<()> {
    let spec = a.preset.spec(a.seed);
    let (g, x, labels) = generate(&spec)?;
    save_dataset(&a.out, a.preset.name(), &g, &x, &labels, encoding(a.f32))?;
    write_json(&a.out.join("sbm.json"), &spec)?;
    println!(
        "wrote {} ({} nodes, {} edges, homophily {:.3})",
        a.out.display(),
        g.n_nodes(),
        g.n_edges(),
        homophily_ratio(&g, &labels).unwrap_or(f64::NAN)
    );
    Ok(())
}
