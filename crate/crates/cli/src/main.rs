//! `meshroute` command-line tool.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use meshroute::sim::{parse_scenario, write_comparison, write_report};
use meshroute::{
    compare_with_oracle, dijkstra, generate_random_topology, optimize_path, run_scenario, BbbcConfig, CostInputs,
    FuzzyInferenceSystem, LinkMetrics, NodeId, RuleBase, Topology, TopologyParams,
};

#[derive(Parser)]
#[command(name = "meshroute", version, about = "Fuzzy-costed BB-BC routing for wireless mesh networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random unit-disk topology file.
    Gen(GenArgs),
    /// Score a link-metrics CSV through the fuzzy system.
    Cost(CostArgs),
    /// Route between two nodes with BB-BC.
    Route(RouteArgs),
    /// Exact shortest path with Dijkstra.
    Oracle(OracleArgs),
    /// Table-style sweep over sizes, generation counts and seeds.
    Bench(BenchArgs),
    /// Run a multi-epoch scenario file.
    Sim(SimArgs),
    /// Dump or check a fuzzy rule base.
    Rules(RulesArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Random seed (falls back to MESHROUTE_SEED, then 0).
    #[arg(long, env = "MESHROUTE_SEED")]
    seed: Option<u64>,
}

impl SeedArg {
    fn get(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Args)]
struct AreaArgs {
    #[arg(long, default_value_t = 500.0)]
    width: f64,
    #[arg(long, default_value_t = 500.0)]
    height: f64,
    /// Transmission range shared by every node, in meters.
    #[arg(long, default_value_t = 250.0)]
    range: f64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Wall-clock limit per run, in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    shrink_exponent: f64,
    /// Stop after this many generations without improvement.
    #[arg(long)]
    stagnation: Option<usize>,
}

impl SearchArgs {
    fn config(&self, seed: u64) -> Result<BbbcConfig, CliError> {
        let time_budget = match self.time_budget {
            Some(s) => {
                Some(Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("invalid time budget {s}")))?)
            }
            None => None,
        };
        Ok(BbbcConfig {
            population_size: self.population,
            max_generations: self.generations,
            time_budget,
            shrink_exponent: self.shrink_exponent,
            stagnation_limit: self.stagnation,
            seed,
            ..BbbcConfig::default()
        })
    }
}

#[derive(Args)]
struct RulesFileArg {
    /// Rule base file to use instead of the built-in one.
    #[arg(long)]
    rules: Option<PathBuf>,
}

impl RulesFileArg {
    fn system(&self) -> Result<FuzzyInferenceSystem, CliError> {
        match &self.rules {
            None => Ok(FuzzyInferenceSystem::default()),
            Some(path) => {
                let rules: RuleBase = read(path)?.parse()?;
                Ok(FuzzyInferenceSystem::with_rules(rules))
            }
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    area: AreaArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// CSV with header `throughput,delay_ms,jitter_ms,energy`.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    rules: RulesFileArg,
}

#[derive(Args)]
struct RouteArgs {
    topology: PathBuf,
    #[arg(long, short)]
    source: u32,
    #[arg(long, short)]
    target: u32,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Per-generation trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write zero for every wall-clock field.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    rules: RulesFileArg,
}

#[derive(Args)]
struct OracleArgs {
    topology: PathBuf,
    #[arg(long, short)]
    source: u32,
    #[arg(long, short)]
    target: u32,
    #[command(flatten)]
    rules: RulesFileArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100")]
    sizes: Vec<usize>,
    /// Comma-separated generation counts.
    #[arg(long, value_delimiter = ',', default_value = "100,200")]
    generations: Vec<usize>,
    /// Number of seeds per cell, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[command(flatten)]
    area: AreaArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    rules: RulesFileArg,
}

#[derive(Args)]
struct SimArgs {
    /// Scenario file of `key = value` lines.
    config: PathBuf,
    /// Overrides the scenario's `seed` key.
    #[command(flatten)]
    seed: SeedArg,
    /// Report CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a BB-BC versus Dijkstra comparison CSV.
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    rules: RulesFileArg,
}

#[derive(Args)]
struct RulesArgs {
    #[command(subcommand)]
    action: RulesAction,
}

#[derive(Subcommand)]
enum RulesAction {
    /// Print the built-in rule base.
    Dump {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a rule base and check it is complete and monotone.
    Check { file: PathBuf },
}

enum CliError {
    Usage(String),
    Core(meshroute::Error),
    Io(String, io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(meshroute::Error::Unreachable(..)) => 2,
            CliError::Core(_) => 1,
            CliError::Io(..) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(what, e) => write!(f, "{what}: {e}"),
        }
    }
}

impl From<meshroute::Error> for CliError {
    fn from(e: meshroute::Error) -> Self {
        CliError::Core(e)
    }
}

fn read(path: &FsPath) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn write_file(path: &FsPath, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// Writes to `path`, or stdout when `None`.
fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, bytes),
        None => io::stdout().write_all(bytes).map_err(|e| CliError::Io("stdout".into(), e)),
    }
}

fn load_costed(path: &FsPath, rules: &RulesFileArg) -> Result<Topology, CliError> {
    let topology: Topology = read(path)?.parse()?;
    Ok(rules.system()?.cost_links(&topology)?)
}

fn gen(args: &GenArgs) -> Result<(), CliError> {
    let params = TopologyParams::new(args.n, args.area.width, args.area.height, args.area.range);
    let t = generate_random_topology(&params, args.seed.get())?;
    let text = t.to_string();
    match &args.out {
        Some(p) => {
            write_file(p, text.as_bytes())?;
            println!("nodes={} edges={}", t.node_count(), t.link_count());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cost(args: &CostArgs) -> Result<(), CliError> {
    let system = args.rules.system()?;
    let text = read(&args.input)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Usage(format!("{}: {e}", args.input.display())))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{}: missing column {name:?}", args.input.display())))
    };
    let cols = [column("throughput")?, column("delay_ms")?, column("jitter_ms")?, column("energy")?];
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("{}: {e}", args.input.display()));
    writer.write_record(["throughput", "delay_ms", "jitter_ms", "energy", "cost"]).map_err(csv_err)?;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let mut v = [0.0; 4];
        for (slot, &c) in v.iter_mut().zip(&cols) {
            let field = record.get(c).unwrap_or("");
            *slot = field.parse().map_err(|_| {
                CliError::Usage(format!("{}: row {}: bad number {field:?}", args.input.display(), i + 1))
            })?;
        }
        let c = system.evaluate(&CostInputs::new(&LinkMetrics::new(v[0], v[1], v[2]), v[3]))?;
        let fields = [v[0].to_string(), v[1].to_string(), v[2].to_string(), v[3].to_string(), c.to_string()];
        writer.write_record(&fields).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io("csv".into(), e.into_error()))?;
    emit(args.out.as_ref(), &bytes)
}

fn route(args: &RouteArgs) -> Result<(), CliError> {
    let topology = load_costed(&args.topology, &args.rules)?;
    let config = args.search.config(args.seed.get())?;
    let (s, t) = (NodeId(args.source), NodeId(args.target));
    let start = Instant::now();
    let (path, trace) = optimize_path(&topology, s, t, &config)?;
    let secs = if args.no_timing { 0.0 } else { start.elapsed().as_secs_f64() };
    if let Some(p) = &args.trace {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, !args.no_timing).map_err(|e| CliError::Io("trace".into(), e))?;
        write_file(p, &buf)?;
    }
    println!("cost={} time={:.3} path={}", path.cost, secs, path.display_ids());
    println!("generations={} termination={}", trace.generations(), trace.termination);
    Ok(())
}

fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let topology = load_costed(&args.topology, &args.rules)?;
    let path = dijkstra(&topology, NodeId(args.source), NodeId(args.target))?;
    println!("cost={} path={}", path.cost, path.display_ids());
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let system = args.rules.system()?;
    let base = args.seed.get();
    let mut out = String::from("nodes,generations,path_cost,time_sec,path,gap\n");
    for &n in &args.sizes {
        for &generations in &args.generations {
            for k in 0..args.seeds {
                let seed = base.wrapping_add(k);
                let params = TopologyParams::new(n, args.area.width, args.area.height, args.area.range);
                let topology = system.cost_links(&generate_random_topology(&params, seed)?)?;
                let (s, t) = (NodeId(1), NodeId(n as u32));
                if n < 2 || !topology.is_reachable(s, t)? {
                    out.push_str(&format!("{n},{generations},,,unreachable,\n"));
                    continue;
                }
                let config = BbbcConfig::new(args.population, generations, seed);
                let start = Instant::now();
                let (path, _) = optimize_path(&topology, s, t, &config)?;
                let secs = if args.no_timing { 0.0 } else { start.elapsed().as_secs_f64() };
                let exact = dijkstra(&topology, s, t)?;
                out.push_str(&format!(
                    "{n},{generations},{},{secs:.6},{},{}\n",
                    path.cost,
                    path.display_ids(),
                    path.cost - exact.cost
                ));
            }
        }
    }
    emit(args.out.as_ref(), out.as_bytes())
}

fn sim(args: &SimArgs) -> Result<(), CliError> {
    let mut config = parse_scenario(&read(&args.config)?)?;
    if let Some(seed) = args.seed.seed {
        config.seed = seed;
    }
    let system = args.rules.system()?;
    let timing = !args.no_timing;
    let (records, _) = run_scenario(&config, &system)?;
    let mut buf = Vec::new();
    write_report(&records, &mut buf, timing).map_err(|e| CliError::Io("report".into(), e))?;
    emit(args.out.as_ref(), &buf)?;
    if let Some(p) = &args.compare {
        let rows = compare_with_oracle(&config, &system)?;
        let mut buf = Vec::new();
        write_comparison(&rows, &mut buf, timing).map_err(|e| CliError::Io("comparison".into(), e))?;
        write_file(p, &buf)?;
    }
    Ok(())
}

fn rules(args: &RulesArgs) -> Result<(), CliError> {
    match &args.action {
        RulesAction::Dump { out } => emit(out.as_ref(), RuleBase::generated().to_string().as_bytes()),
        RulesAction::Check { file } => {
            let rules: RuleBase = read(file)?.parse()?;
            println!("{} rules ok", rules.rules().count());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Cost(a) => cost(a),
        Command::Route(a) => route(a),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench(a),
        Command::Sim(a) => sim(a),
        Command::Rules(a) => rules(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
