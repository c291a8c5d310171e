use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tacts_core::example::{format_trace, worked_example};
use tacts_core::harness::{
    aggregate, emit_results, run_experiment, Algorithm, Experiment, ExperimentConfig,
};
use tacts_core::network::{enumerate_commodities, parse_tntp, DEFAULT_MAX_PATH_EDGES};
use tacts_core::oracle::compute_oracle;
use tacts_core::Error;

#[derive(Parser)]
#[command(name = "tacts", version, about = "Traded-control routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write records, summary and plot data.
    Run(Box<RunArgs>),
    /// Parse a network file and report its size.
    Validate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_PATH_EDGES)]
        max_path_edges: usize,
    },
    /// Run the six-edge worked example and print its step trace.
    #[command(name = "example-4c")]
    Example4c,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file whose keys mirror these flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    network: Option<PathBuf>,
    /// low, medium or high
    #[arg(long)]
    congestion: Option<String>,
    #[arg(long)]
    fc: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated subset of tacts,doc,tasr,rcs,sc,oracle
    #[arg(long)]
    algos: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Modality count range lo:hi
    #[arg(long)]
    modalities: Option<String>,
    #[arg(long = "N")]
    history_window: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_path_edges: Option<usize>,
    #[arg(long)]
    doc_window: Option<usize>,
    #[arg(long)]
    doc_gamma: Option<usize>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Validation(_)
            | Error::Key(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn build_config(a: RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.network {
        cfg.network_path = v;
    }
    if let Some(v) = a.congestion {
        cfg.congestion_level = v.parse()?;
    }
    if let Some(v) = a.fc {
        cfg.f_c = v;
    }
    if let Some(v) = a.reps {
        cfg.repetitions = v;
    }
    if let Some(v) = a.algos {
        cfg.algorithms = Algorithm::parse_list(&v)?;
    }
    if let Some(v) = a.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = a.out {
        cfg.out_dir = Some(v);
    }
    if let Some(v) = a.modalities {
        cfg.modality_count_range = v.parse()?;
    }
    if let Some(v) = a.history_window {
        cfg.history_window = v;
    }
    if let Some(v) = a.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = a.max_path_edges {
        cfg.max_path_edges = v;
    }
    if let Some(v) = a.doc_window {
        cfg.doc_window = v;
    }
    if let Some(v) = a.doc_gamma {
        cfg.doc_gamma = v;
    }
    cfg.validate()?;
    if cfg.out_dir.is_none() {
        return Err(Error::Config("no output directory given (--out)".into()));
    }
    Ok(cfg)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = build_config(args)?;
    let out = cfg.out_dir.clone().expect("checked in build_config");
    let exp = Experiment::load(cfg)?;
    let records = run_experiment(&exp);
    let summary = aggregate(&records);
    emit_results(&records, &summary, &out)?;
    println!(
        "{:<7} {:<7} {:>7} {:>5} {:>5} {:>8} {:>8} {:>10}",
        "algo", "cong", "fc", "n", "fail", "ratio", "std", "time/tacts"
    );
    for r in &summary {
        println!(
            "{:<7} {:<7} {:>7.2} {:>5} {:>5} {:>8} {:>8} {:>10}",
            r.algorithm.as_str(),
            r.congestion.as_str(),
            r.f_c,
            r.episodes,
            r.failures,
            fmt_opt(r.mean_ratio),
            fmt_opt(r.std_ratio),
            fmt_opt(r.time_ratio_vs_tacts),
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn validate(network: PathBuf, max_path_edges: usize) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&network)
        .map_err(|e| Failure::Config(format!("{}: {e}", network.display())))?;
    let net = parse_tntp(&text)?;
    let commodities = enumerate_commodities(&net, max_path_edges);
    println!("nodes {}", net.node_count());
    println!("edges {}", net.edge_count());
    println!("commodities {}", commodities.len());
    Ok(())
}

fn example() -> Result<(), Failure> {
    let ex = worked_example()?;
    let tau_star = compute_oracle(&ex.scenario())?.tau_star;
    let result = ex.run()?.with_oracle(tau_star);
    print!("{}", format_trace(&ex, &result));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run(*a),
        Command::Validate {
            network,
            max_path_edges,
        } => validate(network, max_path_edges),
        Command::Example4c => example(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
