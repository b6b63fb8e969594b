use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pointlab::runner::{exit_code, resolve_seed, run, Experiment, ExperimentConfig, Format, ModelSource};

#[derive(Parser)]
#[command(name = "lab", version, about = "Random point-interaction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov exponent over an energy grid
    Lyapunov(Common),
    /// Localization verdict for the support of the measure
    Dichotomy(Common),
    /// Eigenvalues of a Neumann box
    Spectrum(Common),
    /// Exponential decay rates of box eigenfunctions
    Decay(Common),
    /// Second moment of a spreading wave packet
    Dynamics(Common),
    /// Band structure of a single-atom measure
    Bands(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Model file (JSON)
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    emin: f64,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    emax: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 100)]
    cells: usize,
    #[arg(long, default_value_t = pointlab::lyapunov::DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = pointlab::lyapunov::DEFAULT_REPLICAS)]
    replicas: usize,
    /// Master seed; LAB_SEED takes precedence
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Lyapunov(a) => (Experiment::Lyapunov, a),
        Command::Dichotomy(a) => (Experiment::Dichotomy, a),
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Decay(a) => (Experiment::Decay, a),
        Command::Dynamics(a) => (Experiment::Dynamics, a),
        Command::Bands(a) => (Experiment::Bands, a),
    };
    let result = resolve_seed(args.seed).and_then(|seed| {
        let mut config = ExperimentConfig::new(experiment, ModelSource::Path(args.model), args.out);
        config.emin = args.emin;
        config.emax = args.emax;
        config.points = args.points;
        config.cells = args.cells;
        config.steps = args.steps;
        config.replicas = args.replicas;
        config.seed = seed;
        config.threads = args.threads;
        config.format = args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
        run(&config)
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("lab: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
