use std::fmt::Write as _;
use std::path::PathBuf;

use boltzkit::datasets::{self, load_mnist_images, load_mnist_labels, Split};
use boltzkit::dbn::is_one_hot;
use boltzkit::{builtin, Dataset, Dbn, Metadata, Objective, RngState, SupervisedTrace, TrainOptions, TrainTrace};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_nodes, resolve_data_dir, ConfigFile};
use crate::demos::{run_demo, Demo, AMBIGUOUS_BAND, AMBIGUOUS_ROWS, DEMO_NAMES};
use crate::error::CliError;
use crate::report::{config_hash, fmt_g, format_matrix, metrics_csv, write_text};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "boltzkit", version, about = "Train and evaluate RBMs and Deep Belief Networks")]
pub struct Cli {
    /// Log per-epoch progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one of the worked examples and check its output.
    Demo(DemoArgs),
    /// Pretrain, map labels, and fine-tune a network.
    Train(TrainArgs),
    /// Report rmse and error rate of a saved model.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(value_parser = DEMO_NAMES)]
    pub name: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long, alias = "model")]
    pub model_out: Option<PathBuf>,
    /// Fill the CSV `seconds` column (makes the file run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in dataset name or `mnist`.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Layer sizes, e.g. `784,100,10`.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Pretraining epochs per layer.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Fine-tuning epochs; defaults to `--max-iter`.
    #[arg(long)]
    pub finetune_iter: Option<usize>,
    /// Defaults to the number of training rows.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub step_ratio: Option<f64>,
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub cd_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, alias = "model")]
    pub model_out: Option<PathBuf>,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Use only the first N training rows.
    #[arg(long)]
    pub train_limit: Option<usize>,
    /// Unit type; only `bernoulli` is supported.
    #[arg(long)]
    pub units: Option<String>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Built-in dataset name or `mnist`.
    #[arg(long, conflicts_with_all = ["images", "labels"])]
    pub dataset: Option<String>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// IDX image file, used together with `--labels`.
    #[arg(long, requires = "labels")]
    pub images: Option<PathBuf>,
    #[arg(long, requires = "images")]
    pub labels: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Demo(args) => cmd_demo(args, cli.verbose),
        Command::Train(args) => cmd_train(args, cli.verbose),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn render_metadata(pairs: &[(&str, String)]) -> Metadata {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn canonical(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        writeln!(s, "{k}={v}").unwrap();
    }
    s
}

fn join_nodes(nodes: &[usize]) -> String {
    nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

struct Outputs<'a> {
    model: Option<&'a PathBuf>,
    metrics: Option<&'a PathBuf>,
    timings: bool,
}

fn save_outputs(
    dbn: &Dbn,
    outputs: Outputs<'_>,
    command: &str,
    seed: u64,
    pairs: &[(&str, String)],
    trace: &SupervisedTrace,
) -> Result<(), CliError> {
    let hash = config_hash(&canonical(pairs));
    if let Some(path) = outputs.model {
        let mut meta = render_metadata(pairs);
        meta.insert("config_sha256".into(), hash.clone());
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        meta.insert("pretrain_epochs".into(), trace.pretrain.iter().map(|t| t.epochs().to_string()).collect::<Vec<_>>().join(","));
        meta.insert("finetune_epochs".into(), trace.finetune.epochs().to_string());
        boltzkit::save_model(dbn, path, &meta)?;
        println!("model written to {}", path.display());
    }
    if let Some(path) = outputs.metrics {
        write_text(path, &metrics_csv(command, seed, &hash, trace, outputs.timings))?;
        println!("metrics written to {}", path.display());
    }
    Ok(())
}

fn option_pairs(dataset: &str, nodes: &[usize], opts: &TrainOptions, finetune_iter: usize, seed: u64, rows: usize) -> Vec<(&'static str, String)> {
    vec![
        ("dataset", dataset.to_string()),
        ("nodes", join_nodes(nodes)),
        ("train_rows", rows.to_string()),
        ("max_iter", opts.max_iter.to_string()),
        ("finetune_iter", finetune_iter.to_string()),
        ("batch_size", opts.batch_size.to_string()),
        ("step_ratio", format!("{:e}", opts.step_ratio)),
        ("objective", opts.objective.to_string()),
        ("cd_k", opts.cd_k.to_string()),
        ("units", "bernoulli".to_string()),
        ("seed", seed.to_string()),
    ]
}

fn cmd_demo(args: DemoArgs, verbose: bool) -> Result<(), CliError> {
    let demo: Demo = args.name.parse().map_err(CliError::usage)?;
    let mut opts = demo.options();
    opts.verbose = verbose;
    let outcome = run_demo(demo, args.seed)?;

    println!("demo {demo} (seed {}), nodes [{}]", args.seed, join_nodes(&demo.nodes()));
    let what = if demo == Demo::Unsup { "reconstruction" } else { "predicted labels" };
    println!("out ({what}) =\n{}", format_matrix(&outcome.out, 4));
    println!("round(out) =\n{}", format_matrix(&outcome.out.map(f64::round), 0));

    if demo == Demo::Ambiguous {
        for &r in &AMBIGUOUS_ROWS {
            let row: Vec<String> = outcome.out.row(r).iter().map(|v| format!("{v:.5}")).collect();
            println!(
                "row {}: inputs repeat with conflicting labels, outputs [{}] -> unpredictable ({})",
                r + 1,
                row.join(" "),
                if outcome.ambiguous_in_band() {
                    format!("within [{}, {}]", AMBIGUOUS_BAND.0, AMBIGUOUS_BAND.1)
                } else {
                    "outside the expected band".to_string()
                }
            );
        }
    }
    if let Some((inputs, out)) = &outcome.real_test {
        let labels = builtin("xor-real-test")?.labels.unwrap();
        let rmse = Objective::Square.mean_loss(&labels, out)?.sqrt();
        println!("real-valued test inputs =\n{}", format_matrix(inputs, 2));
        println!("out =\n{}", format_matrix(out, 6));
        println!("rmse = {}", fmt_g(rmse));
    }

    let pairs = option_pairs(demo.dataset(), &demo.nodes(), &opts, opts.max_iter, args.seed, outcome.inputs.rows());
    let outputs = Outputs { model: args.model_out.as_ref(), metrics: args.metrics_out.as_ref(), timings: args.timings };
    save_outputs(&outcome.model, outputs, &format!("demo {demo}"), args.seed, &pairs, &outcome.traces)?;

    if outcome.golden {
        println!("result: matches expected output");
        Ok(())
    } else {
        Err(CliError::runtime(format!("demo {demo}: rounded output differs from the expected pattern")))
    }
}

fn load_dataset(name: &str, data_dir: Option<PathBuf>, split: Split, limit: Option<usize>) -> Result<Dataset, CliError> {
    if name == "mnist" {
        let dir = data_dir.ok_or_else(|| {
            CliError::usage(format!("mnist needs --data-dir or {}", crate::config::DATA_DIR_ENV))
        })?;
        return Ok(datasets::load_mnist(dir, split, limit)?);
    }
    let ds = builtin(name).map_err(|e| CliError::usage(format!("{e}, mnist")))?;
    Ok(match limit {
        Some(n) => ds.head(n),
        None => ds,
    })
}

fn default_nodes(dataset: &str, ds: &Dataset) -> Vec<usize> {
    match dataset {
        "unsup-pattern" => vec![6, 8],
        "pattern1" | "pattern2" => vec![6, 20, 2],
        "ambiguous" => vec![4, 20, 2],
        "xor" | "xor-real-test" => vec![2, 12, 1],
        _ => {
            let out = ds.labels.as_ref().map_or(100, |l| l.cols());
            vec![ds.inputs.cols(), 100, out]
        }
    }
}

fn cmd_train(args: TrainArgs, verbose: bool) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let dataset = cfg
        .pick(args.dataset.clone(), "dataset")?
        .ok_or_else(|| CliError::usage("no dataset given (use --dataset or 'dataset =' in the config)"))?;
    let units = cfg.pick(args.units.clone(), "units")?.unwrap_or_else(|| "bernoulli".into());
    if !units.eq_ignore_ascii_case("bernoulli") {
        return Err(CliError::usage(format!("unit type '{units}' is not supported (only bernoulli)")));
    }
    let nodes = cfg
        .pick(args.nodes.clone(), "nodes")?
        .map(|s| parse_nodes(&s).map_err(|e| CliError::usage(format!("--nodes: {e}"))))
        .transpose()?;
    let objective = match cfg.pick(args.objective.clone(), "objective")? {
        Some(s) => s.parse::<Objective>()?,
        None => Objective::CrossEntropy,
    };
    let max_iter = cfg.pick(args.max_iter, "max-iter")?.unwrap_or(100);
    let finetune_iter = cfg.pick(args.finetune_iter, "finetune-iter")?.unwrap_or(max_iter);
    let step_ratio = cfg.pick(args.step_ratio, "step-ratio")?.unwrap_or(2.5);
    let cd_k = cfg.pick(args.cd_k, "cd-k")?.unwrap_or(1);
    let seed = cfg.pick(args.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    let batch_size = cfg.pick(args.batch_size, "batch-size")?;
    let limit = cfg.pick(args.train_limit, "train-limit")?;
    let model_out = cfg.pick(args.model_out.clone(), "model-out")?;
    let metrics_out = cfg.pick(args.metrics_out.clone(), "metrics-out")?;
    let timings = args.timings || cfg.pick::<bool>(None, "timings")?.unwrap_or(false);

    let ds = load_dataset(&dataset, resolve_data_dir(args.data_dir.clone(), &cfg), Split::Train, limit)?;
    if ds.is_empty() {
        return Err(CliError::usage(format!("dataset '{dataset}' has no rows")));
    }
    let nodes = nodes.unwrap_or_else(|| default_nodes(&dataset, &ds));
    if nodes[0] != ds.inputs.cols() {
        return Err(CliError::usage(format!(
            "nodes start with {} inputs but '{dataset}' has {} columns",
            nodes[0],
            ds.inputs.cols()
        )));
    }
    if let Some(labels) = &ds.labels {
        if *nodes.last().unwrap() != labels.cols() {
            return Err(CliError::usage(format!(
                "nodes end with {} outputs but '{dataset}' has {} label columns",
                nodes.last().unwrap(),
                labels.cols()
            )));
        }
        if nodes.len() < 2 {
            return Err(CliError::usage("a supervised network needs at least 2 node sizes"));
        }
    }

    let opts = TrainOptions {
        max_iter,
        batch_size: batch_size.unwrap_or(ds.len()),
        step_ratio,
        objective,
        cd_k,
        layer: 0,
        verbose,
    };
    opts.validate()?;
    let finetune = TrainOptions { max_iter: finetune_iter, ..opts.clone() };

    let mut rng = RngState::new(seed);
    let dbn = Dbn::random(&nodes, &mut rng)?;
    println!("training [{}] on {} rows of '{dataset}' (seed {seed})", join_nodes(&nodes), ds.len());
    let (model, trace) = match &ds.labels {
        Some(labels) => dbn.fit_supervised(&ds.inputs, labels, &opts, &finetune, &mut rng)?,
        None => {
            let (model, pretrain) = dbn.pretrain(&ds.inputs, &opts, &mut rng)?;
            (model, SupervisedTrace { pretrain, finetune: TrainTrace::default() })
        }
    };
    if let Some(labels) = &ds.labels {
        println!("training set: {}", score_line(&model, &ds.inputs, labels)?);
    }

    let pairs = option_pairs(&dataset, &nodes, &opts, finetune_iter, seed, ds.len());
    let outputs = Outputs { model: model_out.as_ref(), metrics: metrics_out.as_ref(), timings };
    save_outputs(&model, outputs, "train", seed, &pairs, &trace)
}

/// `rmse = X; ErrorRate = Y`, or `ErrorRate = n/a` when labels are not one-hot.
pub fn score_line(model: &Dbn, inputs: &boltzkit::Matrix, labels: &boltzkit::Matrix) -> Result<String, CliError> {
    let rmse = model.calc_rmse(inputs, labels)?;
    let rate = if is_one_hot(labels) {
        fmt_g(model.calc_error_rate(inputs, labels)?)
    } else {
        "n/a (labels are not one-hot)".to_string()
    };
    Ok(format!("rmse = {}; ErrorRate = {rate}", fmt_g(rmse)))
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let (model, _) = boltzkit::load_model(&args.model)?;
    let split = match args.split {
        SplitArg::Train => Split::Train,
        SplitArg::Test => Split::Test,
    };
    let (inputs, labels, name) = match (&args.images, &args.labels, &args.dataset) {
        (Some(img), Some(lab), _) => (load_mnist_images(img)?, load_mnist_labels(lab)?, img.display().to_string()),
        (_, _, Some(name)) => {
            let cfg = ConfigFile::default();
            let ds = load_dataset(name, resolve_data_dir(args.data_dir.clone(), &cfg), split, None)?;
            let labels = ds
                .labels
                .ok_or_else(|| CliError::usage(format!("dataset '{name}' has no labels to evaluate against")))?;
            (ds.inputs, labels, name.clone())
        }
        _ => return Err(CliError::usage("eval needs --dataset or --images/--labels")),
    };
    if inputs.cols() != model.input_width() || labels.cols() != model.output_width() {
        return Err(CliError::usage(format!(
            "shape mismatch: model maps {} inputs to {} outputs, data '{name}' has {} input and {} label columns",
            model.input_width(),
            model.output_width(),
            inputs.cols(),
            labels.cols()
        )));
    }
    if inputs.rows() != labels.rows() {
        return Err(CliError::usage(format!(
            "data '{name}' has {} input rows but {} label rows",
            inputs.rows(),
            labels.rows()
        )));
    }
    println!("{}", score_line(&model, &inputs, &labels)?);
    Ok(())
}
