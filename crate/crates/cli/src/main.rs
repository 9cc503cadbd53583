use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diknn::commands::{self, EstimateRequest, ModelParams, OrderChoice, Units};
use diknn::experiment::{run_experiment, ExperimentSpec};
use diknn::input::read_pair;
use diknn::{configure_threads, CliError, Result};
use diknn_core::generators::GeneratorSpec;
use diknn_core::order::{OrderMethod, OrderOptions, DEFAULT_CANDIDATES};
use diknn_core::{DiMethod, Direction, DEFAULT_K};

#[derive(Parser)]
#[command(name = "diknn", version, about = "k-nearest-neighbor directed information estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate directed information between the two columns of a CSV file.
    Estimate(EstimateArgs),
    /// Select the Markov order by nearest-neighbor prediction.
    Order(OrderArgs),
    /// Run a sweep experiment described by a JSON spec.
    Experiment(ExperimentArgs),
    /// Write a synthetic series pair as CSV.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ksg,
    Gov,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    #[value(name = "x-to-y")]
    XToY,
    #[value(name = "y-to-x")]
    YToX,
    Both,
}

impl DirectionArg {
    fn directions(self) -> Vec<Direction> {
        match self {
            DirectionArg::XToY => vec![Direction::XToY],
            DirectionArg::YToX => vec![Direction::YToX],
            DirectionArg::Both => Direction::BOTH.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Bits,
    Nats,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderMethodArg {
    Joint,
    Ragwitz,
}

impl From<OrderMethodArg> for OrderMethod {
    fn from(m: OrderMethodArg) -> Self {
        match m {
            OrderMethodArg::Joint => OrderMethod::Joint,
            OrderMethodArg::Ragwitz => OrderMethod::Ragwitz,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Linear,
    Quadratic,
    Henon,
    Sigmoid,
}

impl KindArg {
    fn name(self) -> &'static str {
        match self {
            KindArg::Linear => "linear",
            KindArg::Quadratic => "quadratic",
            KindArg::Henon => "henon",
            KindArg::Sigmoid => "sigmoid",
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV file with columns x,y (header optional).
    input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    /// Markov order, or `auto` to select it per direction.
    #[arg(long, default_value = "2")]
    m: String,
    /// Order selection rule used with `--m auto`.
    #[arg(long, value_enum, default_value = "joint")]
    order_method: OrderMethodArg,
    /// Candidate orders for `--m auto`.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CANDIDATES)]
    candidates: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, value_enum, default_value = "both")]
    direction: DirectionArg,
    #[arg(long, value_enum, default_value = "bits")]
    units: UnitsArg,
    /// Run a surrogate significance test with this many surrogates.
    #[arg(long)]
    surrogates: Option<usize>,
    #[arg(long, default_value_t = 0.05, requires = "surrogates")]
    epsilon: f64,
    /// Seed for the surrogate streams.
    #[arg(long, default_value_t = 0, requires = "surrogates")]
    seed: u64,
}

#[derive(Args)]
struct OrderArgs {
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CANDIDATES)]
    candidates: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, value_enum, default_value = "joint")]
    method: OrderMethodArg,
    /// Target is Y for x-to-y and X for y-to-x.
    #[arg(long, value_enum, default_value = "x-to-y")]
    direction: DirectionArg,
    /// Weight neighbor responses by inverse distance.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    spec: PathBuf,
    /// Overrides the spec's output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum, required_unless_present = "kind", conflicts_with = "kind")]
    model: Option<KindArg>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 3000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    println!("{text}");
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let pair = read_pair(&args.input)?;
    let order = if args.m.eq_ignore_ascii_case("auto") {
        OrderChoice::Auto { method: args.order_method.into(), candidates: args.candidates }
    } else {
        let m = args
            .m
            .parse()
            .map_err(|_| CliError::usage(format!("--m expects a positive integer or `auto`, got `{}`", args.m)))?;
        OrderChoice::Fixed(m)
    };
    let methods = match args.method {
        MethodArg::Ksg => vec![DiMethod::Ksg],
        MethodArg::Gov => vec![DiMethod::Gov],
        MethodArg::Both => vec![DiMethod::Ksg, DiMethod::Gov],
    };
    let request = EstimateRequest {
        methods,
        directions: args.direction.directions(),
        order,
        k: args.k,
        units: match args.units {
            UnitsArg::Bits => Units::Bits,
            UnitsArg::Nats => Units::Nats,
        },
        significance: args.surrogates.map(|l| (l, args.epsilon, args.seed)),
    };
    print_json(&commands::estimate(&pair, &request)?)
}

fn run_order(args: OrderArgs) -> Result<()> {
    let pair = read_pair(&args.input)?;
    let direction = match args.direction {
        DirectionArg::XToY => Direction::XToY,
        DirectionArg::YToX => Direction::YToX,
        DirectionArg::Both => return Err(CliError::usage("order selection takes a single direction")),
    };
    let options = OrderOptions { k: args.k, weighted: args.weighted, ..OrderOptions::default() };
    print_json(&commands::select_order(&pair, direction, &args.candidates, args.method.into(), options)?)
}

fn run_experiment_command(args: ExperimentArgs) -> Result<()> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(dir) = args.output_dir {
        spec.output_dir = dir;
    }
    let output = run_experiment(&spec)?;
    print_json(&serde_json::json!({
        "rows": output.rows.len(),
        "results": output.results_path,
        "summary": output.summary_path,
        "plot": output.plot_path,
    }))
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let kind = args.model.or(args.kind).expect("clap requires a model kind");
    let params = ModelParams { beta1: args.beta1, beta2: args.beta2, beta: args.beta, gamma: args.gamma };
    let spec = GeneratorSpec {
        model: commands::build_model(kind.name(), params)?,
        n: args.n,
        seed: args.seed,
        burn_in: args.burn_in,
    };
    let pair = commands::generate(&spec)?;
    match args.output {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            commands::write_pair(&pair, &mut BufWriter::new(file)).map_err(|e| CliError::io(&path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            commands::write_pair(&pair, &mut out).map_err(|e| CliError::io("<stdout>", e))?;
            out.flush().map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Estimate(args) => run_estimate(args),
        Command::Order(args) => run_order(args),
        Command::Experiment(args) => run_experiment_command(args),
        Command::Generate(args) => run_generate(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
