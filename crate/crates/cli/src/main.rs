use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use normdyn::abm::{
    self, Exploration, ExploreScope, ShockSchedule, SimConfig, Topology, DEFAULT_FERMI_S, DEFAULT_MU,
    DEFAULT_RATES,
};
use normdyn::config::GameConfig;
use normdyn::dynamics::{self, DynamicsKind, DynamicsParams};
use normdyn::equilibria::{self, EquilibriumReport};
use normdyn::game::ReducedGame;
use normdyn::harness::{self, Experiment};
use normdyn::Error;

/// Social norm dynamics: equilibrium analysis, well-mixed ODEs, network
/// simulations and batch sweeps.
#[derive(Parser)]
#[command(name = "normdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the pure and mixed equilibria of a game
    #[command(allow_negative_numbers = true)]
    Analyze(AnalyzeArgs),
    /// Integrate replicator or replicator-mutator dynamics
    #[command(allow_negative_numbers = true)]
    Ode(OdeArgs),
    /// Run the agent-based model on a network
    #[command(allow_negative_numbers = true)]
    Abm(AbmArgs),
    /// Run a figure preset or an experiment file
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GameArgs {
    /// Payoff of coordinating on A
    #[arg(long)]
    a: Option<f64>,
    /// Payoff of coordinating on B
    #[arg(long)]
    b: Option<f64>,
    /// Need for coordination, in [0, 1]
    #[arg(long)]
    c: Option<f64>,
    /// Flat key-value game file (a, b, c or a_c, b_c, a_f, b_f, c); flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl GameArgs {
    fn resolve(&self, default: Option<GameConfig>) -> Result<ReducedGame, Failure> {
        let mut cfg = default.unwrap_or_default();
        if let Some(path) = &self.config {
            cfg = cfg.overridden_by(&GameConfig::load(path).map_err(|e| fail_flag("--config", e))?);
        }
        let flags = GameConfig {
            a: self.a,
            b: self.b,
            c: self.c,
            ..Default::default()
        };
        let cfg = cfg.overridden_by(&flags);
        cfg.resolve().map_err(Failure::from)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Print the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Replicator,
    #[value(alias = "replicator-mutator", alias = "mutator")]
    ReplicatorMutator,
}

#[derive(Args)]
struct OdeArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Initial share of A
    #[arg(long, default_value_t = 0.95)]
    x0: f64,
    /// Mutation rate (replicator-mutator only)
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, value_enum, default_value = "replicator")]
    kind: KindArg,
    #[arg(long, default_value_t = dynamics::DEFAULT_DT)]
    dt: f64,
    #[arg(long, default_value_t = dynamics::DEFAULT_T_MAX)]
    tmax: f64,
    /// CSV output file; standard output when absent
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Torus,
    #[value(alias = "small-world")]
    SmallWorld,
    #[value(alias = "preferential-attachment")]
    PreferentialAttachment,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    ActionOnly,
    FullStrategy,
}

#[derive(Args)]
struct AbmArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, value_enum, default_value = "torus")]
    topology: TopologyArg,
    /// Torus width
    #[arg(long, default_value_t = 50)]
    width: usize,
    /// Torus height
    #[arg(long, default_value_t = 50)]
    height: usize,
    /// Node count for small-world and preferential-attachment networks
    #[arg(long, default_value_t = 2500)]
    n: usize,
    /// Ring neighbors per node before rewiring (small-world)
    #[arg(long, default_value_t = Topology::DEFAULT_SMALL_WORLD_K)]
    k: usize,
    /// Rewiring probability (small-world)
    #[arg(long, default_value_t = Topology::DEFAULT_SMALL_WORLD_P)]
    p_rewire: f64,
    /// Edges per new node (preferential attachment)
    #[arg(long, default_value_t = Topology::DEFAULT_ATTACHMENT_M)]
    m: usize,
    /// Fermi selection strength
    #[arg(long, default_value_t = DEFAULT_FERMI_S)]
    s: f64,
    /// Exploration rate in fixed mode
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Make the exploration rate part of the inherited strategy
    #[arg(long)]
    evolving: bool,
    /// Exploration rates available in evolving mode
    #[arg(long = "L", value_delimiter = ',', value_name = "RATES")]
    rates: Option<Vec<f64>>,
    /// What exploration re-draws in evolving mode
    #[arg(long, value_enum, default_value = "full-strategy")]
    explore_scope: ScopeArg,
    #[arg(long, default_value_t = 6000)]
    iterations: usize,
    /// Comma-separated iterations at which payoffs swap
    #[arg(long, value_delimiter = ',', value_name = "ITERS", conflicts_with = "shock_every")]
    shock_at: Option<Vec<usize>>,
    /// Swap payoffs every this many iterations
    #[arg(long, value_name = "K")]
    shock_every: Option<usize>,
    /// Share of agents forced onto the new optimal action at each shock
    #[arg(long, value_name = "SHARE")]
    inject: Option<f64>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = harness::DEFAULT_SEED)]
    seed: u64,
    /// Directory for mean.csv (and rep_<k>.csv); standard output when absent
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Also write each replicate's series
    #[arg(long, requires = "out_dir")]
    keep_replicates: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Figure preset
    #[arg(long, value_parser = ["fig3", "fig4", "fig5", "fig6", "fig7"], required_unless_present = "experiment")]
    preset: Option<String>,
    /// Experiment JSON file, e.g. a manifest.json from an earlier run
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    experiment: Option<PathBuf>,
    /// Replicates per sweep point (agent-based presets)
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output root
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write each replicate's series
    #[arg(long)]
    keep_replicates: bool,
}

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            let flag = flag_for(&e);
            Failure {
                code: 2,
                message: match flag {
                    Some(f) => format!("{f}: {e}"),
                    None => e.to_string(),
                },
            }
        } else {
            Failure {
                code: 1,
                message: e.to_string(),
            }
        }
    }
}

fn fail_flag(flag: &str, e: Error) -> Failure {
    Failure {
        code: if e.is_validation() || matches!(e, Error::Io { .. }) { 2 } else { 1 },
        message: format!("{flag}: {e}"),
    }
}

fn flag_for(e: &Error) -> Option<String> {
    match e {
        Error::NonPositivePayoff { a, .. } => Some(if *a > 0.0 { "--b" } else { "--a" }.into()),
        Error::InvalidConfig { field, .. } => Some(match field.as_str() {
            "t_max" | "tmax" => "--tmax".into(),
            "fermi_s" => "--s".into(),
            f => format!("--{}", f.replace('_', "-")),
        }),
        Error::InvalidTopology(_) => Some("--topology".into()),
        Error::ConstraintViolation(_) => Some("--config".into()),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Ode(args) => ode(args),
        Command::Abm(args) => abm(args),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let g = args.game.resolve(None)?;
    let report = equilibria::analyze(&g)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &report).map_err(Error::from)?;
        writeln!(out).map_err(|e| io_failure("<stdout>", e))?;
    } else {
        print_report(&mut out, &g, &report).map_err(|e| io_failure("<stdout>", e))?;
    }
    Ok(())
}

fn print_report(out: &mut impl Write, g: &ReducedGame, r: &EquilibriumReport) -> io::Result<()> {
    let yn = |b: bool| if b { "yes" } else { "no" };
    writeln!(out, "game: a = {}, b = {}, c = {}", g.a(), g.b(), g.c())?;
    writeln!(
        out,
        "thresholds: c*_A = {}, c*_B = {}{}",
        r.thresholds.c_star_a,
        r.thresholds.c_star_b,
        if r.thresholds.at_threshold { " (c is at the threshold)" } else { "" }
    )?;
    writeln!(out, "{:<8} {:>5} {:>5} {:>7}", "profile", "nash", "ess", "stable")?;
    for (name, s) in [("AA", &r.pure_aa), ("BB", &r.pure_bb)] {
        writeln!(
            out,
            "{:<8} {:>5} {:>5} {:>7}",
            name,
            yn(s.is_nash),
            yn(s.is_ess),
            yn(s.is_stable_fixed_point)
        )?;
    }
    match &r.mixed {
        Some(m) => writeln!(
            out,
            "{:<8} {:>5} {:>5} {:>7}   q = {}",
            "mixed",
            yn(m.is_nash),
            yn(m.is_ess),
            yn(m.is_stable_fixed_point),
            m.q.q()
        ),
        None => writeln!(out, "mixed    none"),
    }
}

fn io_failure(path: impl AsRef<Path>, e: io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("i/o error on {}: {e}", path.as_ref().display()),
    }
}

fn ode(args: OdeArgs) -> Result<(), Failure> {
    let g = args.game.resolve(None)?;
    let kind = match args.kind {
        KindArg::Replicator => DynamicsKind::Replicator,
        KindArg::ReplicatorMutator => DynamicsKind::ReplicatorMutator,
    };
    if matches!(kind, DynamicsKind::Replicator) && args.mu != 0.0 {
        return Err(Failure {
            code: 2,
            message: "--mu: only used with --kind replicator-mutator".into(),
        });
    }
    let params = DynamicsParams {
        kind,
        mu: args.mu,
        dt: args.dt,
        t_max: args.tmax,
    };
    params.validate()?;
    dynamics::PopulationState::new(args.x0)?;
    let tr = dynamics::integrate(&g, args.x0, &params)?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
            tr.write_csv(io::BufWriter::new(file))?;
        }
        None => tr.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn abm(args: AbmArgs) -> Result<(), Failure> {
    let g = args.game.resolve(Some(GameConfig {
        a: Some(1.0),
        b: Some(1.15),
        c: Some(0.5),
        ..Default::default()
    }))?;
    let topology = match args.topology {
        TopologyArg::Torus => Topology::Torus {
            width: args.width,
            height: args.height,
        },
        TopologyArg::SmallWorld => Topology::SmallWorld {
            n: args.n,
            k: args.k,
            p_rewire: args.p_rewire,
        },
        TopologyArg::PreferentialAttachment => Topology::PreferentialAttachment { n: args.n, m: args.m },
    };
    if args.rates.is_some() && !args.evolving {
        return Err(Failure {
            code: 2,
            message: "--L: only used with --evolving".into(),
        });
    }
    let mut cfg = SimConfig::new(g, topology, args.iterations);
    cfg.fermi_s = args.s;
    cfg.exploration = if args.evolving {
        Exploration::Evolving {
            rates: args.rates.unwrap_or_else(|| DEFAULT_RATES.to_vec()),
        }
    } else {
        Exploration::Fixed { mu: args.mu }
    };
    cfg.explore_scope = match args.explore_scope {
        ScopeArg::ActionOnly => ExploreScope::ActionOnly,
        ScopeArg::FullStrategy => ExploreScope::FullStrategy,
    };
    cfg.shocks = match (args.shock_at, args.shock_every) {
        (Some(list), _) => ShockSchedule::At(list),
        (None, Some(k)) => ShockSchedule::Every(k),
        (None, None) => ShockSchedule::None,
    };
    cfg.inject = args.inject;
    cfg.replicates = args.replicates;
    cfg.base_seed = args.seed;
    cfg.validate()?;

    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            let series = if args.keep_replicates {
                harness::run_replicates_keeping(&cfg, dir)?
            } else {
                harness::run_replicates(&cfg)?
            };
            let path = dir.join("mean.csv");
            let file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
            series.write_csv(io::BufWriter::new(file))?;
        }
        None if cfg.replicates == 1 => {
            let records = abm::run_replicate(&cfg, 0)?;
            abm::write_records_csv(&cfg, &records, io::stdout().lock())?;
        }
        None => harness::run_replicates(&cfg)?.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut e: Experiment = match (&args.preset, &args.experiment) {
        (Some(name), _) => harness::preset(name).expect("clap restricts preset names"),
        (None, Some(path)) => Experiment::from_manifest(path).map_err(|e| fail_flag("--experiment", e))?,
        (None, None) => unreachable!("clap requires one of --preset, --experiment"),
    };
    if let Some(r) = args.replicates {
        e = e.with_replicates(r);
    }
    if let Some(s) = args.seed {
        e = e.with_seed(s);
    }
    if let Some(out) = args.out {
        e = e.with_output_dir(out);
    }
    e.keep_replicates |= args.keep_replicates;
    let results = harness::run_experiment(&e)?;
    eprintln!(
        "wrote {} sweep points to {}",
        results.len(),
        e.dir().display()
    );
    Ok(())
}
