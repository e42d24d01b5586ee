//! Command-line front end of the `wl-embed` binary.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    cwl_weight_magnitudes, evaluate, metric_name, shuffle_importance, ShuffleMode,
};
use crate::checkpoint::{
    load_model, loss_history_csv, save_embedding, save_model, EmbeddingCheckpoint,
};
use crate::embedding::EmbeddingKind;
use crate::error::{Error, Result};
use crate::experiment::{write_figure3, ExperimentConfig, MAX_LAYERS};
use crate::graph::{read_jsonl, record_to_json, DatasetRecord};
use crate::nn::{ModelSpec, Task};
use crate::smiles::{parse_smiles, AtomAlphabet};
use crate::synthetic::{generate_indexed, GeneratorSpec, SyntheticTask};
use crate::theory::{verify_theorem, TheoremRow, MAX_LATTICE_POINTS};
use crate::train::{train, TrainConfig};
use crate::wl::{wl_refine, LabelRegistry};

#[derive(Debug, Parser)]
#[command(
    name = "wl-embed",
    version,
    about = "WL node embeddings for graph neural networks"
)]
pub struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as JSONL.
    Gen(GenArgs),
    /// Parse SMILES strings into JSONL graphs.
    Parse(ParseArgs),
    /// Run WL label expansion and dump the label registry.
    Expand(ExpandArgs),
    /// Train a GCN; writes a model checkpoint and prints the loss history.
    Train(TrainArgs),
    /// Evaluate a checkpoint, optionally under label shuffling.
    Eval(EvalArgs),
    /// Print the rescaled C-WL mixing weights as a CSV matrix.
    InspectWeights(InspectArgs),
    /// Check the rank of the ReLU construction on a grid of (K, M).
    VerifyTheorem(VerifyArgs),
    /// Sweep embeddings and depths on a synthetic task.
    Figure3(Figure3Args),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub task: SyntheticTask,
    /// Which of the task's datasets to emit (0-based).
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ParseArgs {
    #[arg(long)]
    pub smiles: Option<String>,
    /// File with one SMILES string per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "atomic")]
    pub embedding: EmbeddingKind,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Inferred from the targets when omitted: all 0/1 means classification.
    #[arg(long)]
    pub task: Option<Task>,
    /// Where to write the loss history; standard output when omitted.
    #[arg(long)]
    pub loss_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub shuffle: Option<ShuffleMode>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    pub kmax: usize,
    #[arg(long, default_value_t = 3)]
    pub mmax: usize,
}

#[derive(Debug, Args)]
pub struct Figure3Args {
    #[arg(long)]
    pub task: SyntheticTask,
    #[arg(long, value_delimiter = ',', default_value = "atomic,wl,cwl,gwl")]
    pub embeddings: Vec<EmbeddingKind>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub layers: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub datasets: usize,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Reuse generated datasets from this directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn infer_task(records: &[DatasetRecord]) -> Task {
    if records.iter().all(|r| r.target == 0.0 || r.target == 1.0) {
        Task::Classification
    } else {
        Task::Regression
    }
}

/// Path of the binary embedding written next to a model checkpoint.
pub fn embedding_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_owned();
    name.push(".emb");
    PathBuf::from(name)
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen(args) => {
            let spec = GeneratorSpec::new(args.task, cli.seed);
            let dataset = generate_indexed(&spec, args.index)?;
            let mut w = open_output(out)?;
            for r in &dataset.records {
                writeln!(w, "{}", record_to_json(&r.graph, Some(r.target)))?;
            }
            w.flush()?;
        }
        Command::Parse(args) => {
            let alphabet = AtomAlphabet::default();
            let inputs: Vec<String> = match (args.smiles, args.file) {
                (Some(s), _) => vec![s],
                (None, Some(path)) => BufReader::new(File::open(path)?)
                    .lines()
                    .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
                    .collect::<io::Result<_>>()?,
                (None, None) => unreachable!("clap enforces one input"),
            };
            let mut w = open_output(out)?;
            for text in &inputs {
                let graph = parse_smiles(text.trim(), &alphabet)?;
                writeln!(w, "{}", record_to_json(&graph, None))?;
            }
            w.flush()?;
        }
        Command::Expand(args) => {
            let records = read_jsonl(&args.input, None)?;
            let mut registry = LabelRegistry::new();
            let mut seen = vec![BTreeSet::new(); args.iters + 1];
            for r in &records {
                let result = wl_refine(&r.graph, args.iters, &mut registry);
                for (t, colors) in result.colors.iter().enumerate() {
                    seen[t].extend(colors.iter().copied());
                }
            }
            let mut w = open_output(out)?;
            for (t, labels) in seen.iter().enumerate() {
                writeln!(w, "# iteration {t}: J = {}", labels.len())?;
            }
            write!(w, "{}", registry.dump())?;
            w.flush()?;
        }
        Command::Train(args) => {
            let path =
                out.ok_or_else(|| Error::InvalidConfig("train needs --out <checkpoint>".into()))?;
            if args.layers > MAX_LAYERS {
                return Err(Error::InvalidConfig(format!(
                    "layers must lie in 0..={MAX_LAYERS}"
                )));
            }
            let records = read_jsonl(&args.data, None)?;
            let task = args.task.unwrap_or_else(|| infer_task(&records));
            let spec = ModelSpec::new(args.embedding, args.layers, args.dim, task);
            let config = TrainConfig {
                alpha: args.alpha,
                epochs: args.epochs,
                batch_size: args.batch_size,
                seed: cli.seed,
            };
            let outcome = train(spec, &records, &config)?;
            save_model(path, &outcome.model)?;
            save_embedding(
                &embedding_path(path),
                &EmbeddingCheckpoint::from_model(&outcome.model),
            )?;
            let mut w = open_output(args.loss_csv.as_deref())?;
            w.write_all(loss_history_csv(&outcome.loss_history).as_bytes())?;
            w.flush()?;
        }
        Command::Eval(args) => {
            let model = load_model(&args.model)?;
            let records = read_jsonl(&args.data, None)?;
            let metric = metric_name(model.spec.task);
            let mut w = open_output(out)?;
            match args.shuffle {
                None => {
                    writeln!(w, "metric,value")?;
                    writeln!(w, "{metric},{}", evaluate(&model, &records)?)?;
                }
                Some(mode) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let report = shuffle_importance(&model, &records, mode, &mut rng)?;
                    writeln!(w, "metric,shuffle,baseline,shuffled,delta")?;
                    writeln!(
                        w,
                        "{metric},{mode},{},{},{}",
                        report.baseline,
                        report.shuffled,
                        report.delta()
                    )?;
                }
            }
            w.flush()?;
        }
        Command::InspectWeights(args) => {
            let model = load_model(&args.model)?;
            let report = cwl_weight_magnitudes(&model)?;
            let mut w = open_output(out)?;
            w.write_all(report.to_csv().as_bytes())?;
            w.flush()?;
        }
        Command::VerifyTheorem(args) => {
            let rows = verify_theorem(args.kmax, args.mmax, MAX_LATTICE_POINTS as usize)?;
            let mut w = open_output(out)?;
            writeln!(w, "{}", TheoremRow::csv_header())?;
            for row in &rows {
                writeln!(w, "{}", row.to_csv())?;
            }
            w.flush()?;
        }
        Command::Figure3(args) => {
            let config = ExperimentConfig {
                embeddings: args.embeddings,
                layers: args.layers,
                datasets: args.datasets,
                runs_per_dataset: args.runs,
                dim: args.dim,
                alpha: args.alpha,
                epochs: args.epochs,
                batch_size: args.batch_size,
                cache_dir: args.cache_dir,
                ..ExperimentConfig::new(args.task, cli.seed)
            };
            if let Some(dir) = out
                .and_then(Path::parent)
                .filter(|p| !p.as_os_str().is_empty())
            {
                fs::create_dir_all(dir)?;
            }
            write_figure3(&config, open_output(out)?)?;
        }
    }
    Ok(())
}
