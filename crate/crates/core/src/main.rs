use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seizure::commands;
use seizure::config::RunConfig;
use seizure::costmodel::CostParams;
use seizure::synth::SynthConfig;

#[derive(Parser)]
#[command(name = "seizure", version, about = "EEG seizure detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic multi-patient EEG (EDF) with a labels.csv.
    Synthgen {
        #[arg(long, default_value = "synth")]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        patients: usize,
        #[arg(long, default_value_t = 600)]
        seconds: usize,
        #[arg(long, default_value_t = 23)]
        channels: usize,
        #[arg(long, default_value_t = 256)]
        rate: u32,
        #[arg(long, default_value_t = 0.1)]
        seizure_fraction: f64,
        #[arg(long, env = "SEIZURE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Recordings to a feature CSV.
    Featurize(RunArgs),
    /// Train one classifier and write a model file.
    Train(RunArgs),
    /// Score a model, or train and test every patient under a protocol.
    Evaluate(RunArgs),
    /// Memory and computation estimates relative to logistic regression.
    CostReport(CostArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recordings (.edf or .csv).
    #[arg(long, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Precomputed feature CSV.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    sample_rate: Option<u32>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// knn, cnn, svm, lr or dbn.
    #[arg(long)]
    classifier: Option<String>,
    /// single or loo.
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    patient: Option<String>,
    #[arg(long)]
    contiguous: bool,
    #[arg(long, env = "SEIZURE_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Any other setting, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    alpha_k: Option<f64>,
    #[arg(long)]
    alpha_cnn: Option<f64>,
    #[arg(long)]
    alpha_svm: Option<f64>,
    /// Trained DBN model whose exact size is added to the table.
    #[arg(long)]
    actual: Option<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn run_config(args: RunArgs) -> seizure::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    if !args.inputs.is_empty() {
        cfg.inputs = args.inputs;
    }
    let paths = [
        ("labels", args.labels),
        ("features", args.features),
        ("output", args.output),
        ("predictions", args.predictions),
        ("model", args.model),
    ];
    for (key, value) in paths {
        if let Some(p) = value {
            cfg.set(key, &p.to_string_lossy())?;
        }
    }
    let values = [
        ("sample_rate", args.sample_rate.map(|v| v.to_string())),
        ("classifier", args.classifier),
        ("protocol", args.protocol),
        ("patient", args.patient),
        ("seed", args.seed.map(|v| v.to_string())),
        ("jobs", args.jobs.map(|v| v.to_string())),
    ];
    for (key, value) in values {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if args.contiguous {
        cfg.contiguous = true;
    }
    for kv in &args.sets {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            seizure::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}"))
        })?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> seizure::Result<()> {
    let text = match cli.command {
        Command::Synthgen {
            out,
            patients,
            seconds,
            channels,
            rate,
            seizure_fraction,
            seed,
        } => {
            let cfg = SynthConfig {
                patients,
                seconds,
                channels,
                sample_rate: rate,
                seizure_fraction,
                seed,
            };
            commands::cmd_synthgen(&cfg, &out)?
        }
        Command::Featurize(args) => commands::cmd_featurize(&run_config(args)?)?,
        Command::Train(args) => commands::cmd_train(&run_config(args)?)?,
        Command::Evaluate(args) => commands::cmd_evaluate(&run_config(args)?)?,
        Command::CostReport(a) => {
            let d = CostParams::default();
            let p = CostParams {
                w: a.w.unwrap_or(d.w),
                t: a.t.unwrap_or(d.t),
                c: a.c.unwrap_or(d.c),
                m: a.m.unwrap_or(d.m),
                r: a.r.unwrap_or(d.r),
                n: a.n.unwrap_or(d.n),
                l: a.l.unwrap_or(d.l),
                alpha_k: a.alpha_k.unwrap_or(d.alpha_k),
                alpha_cnn: a.alpha_cnn.unwrap_or(d.alpha_cnn),
                alpha_svm: a.alpha_svm.unwrap_or(d.alpha_svm),
            };
            let (text, csv) = commands::cmd_cost_report(&p, a.actual.as_deref())?;
            if let Some(path) = a.csv {
                std::fs::write(&path, csv).map_err(|e| seizure::Error::Io { path, source: e })?;
            }
            text
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
