use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edgecolor::analysis::{AlphaConvention, ParameterSet};
use edgecolor::oracle::{exact_outcome_distribution, gadget_failure_probability};
use edgecolor_harness::config::ColorerSpec;
use edgecolor_harness::output::{read_csv, write_csv_file, write_json_file};
use edgecolor_harness::plot::{draw_failure_curve, draw_histogram, failure_curve};
use edgecolor_harness::{run_trials, sweep, verify, ExperimentConfig, Grid, HarnessError, Level, Result};

#[derive(Parser)]
#[command(name = "edgecolor", version, about = "Online edge-coloring simulator and oracle suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory; overrides the paths in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir)?;
            c.output.csv = Some(dir.join("trials.csv"));
            c.output.json = Some(dir.join("aggregate.json"));
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials of one configuration.
    Simulate(RunArgs),
    /// Run a configuration over a grid of ε or |Γ| values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated ε values.
        #[arg(long, value_delimiter = ',', conflicts_with = "gamma", required_unless_present = "gamma")]
        eps: Vec<f64>,
        /// Comma-separated palette sizes.
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<usize>,
    },
    /// Run the oracle suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        /// Write the itemized report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print exact oracle values.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Summarize a trial CSV and draw SVG charts.
    Report {
        #[arg(long)]
        csv: PathBuf,
        /// Directory for the charts.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Failure probability of the gadget's center edge.
    Gadget {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        gamma: usize,
    },
    /// Exact coloring law on a schedule such as `0-1,1-2,0-2`.
    Schedule {
        #[arg(long)]
        edges: String,
        #[arg(long)]
        gamma: usize,
        #[arg(long, value_enum, default_value_t = ColorerArg::PhasePalette)]
        colorer: ColorerArg,
        #[arg(long, default_value_t = 1)]
        phases: usize,
    },
    /// The technical parameters ζ, α, b, C, N.
    Params {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        m: f64,
        /// Use α = ζ instead of α = ζε³/5.
        #[arg(long)]
        alpha_equals_zeta: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ColorerArg {
    FirstFit,
    RandomGreedy,
    PhasePalette,
}

impl From<ColorerArg> for ColorerSpec {
    fn from(c: ColorerArg) -> Self {
        match c {
            ColorerArg::FirstFit => ColorerSpec::FirstFit,
            ColorerArg::RandomGreedy => ColorerSpec::RandomGreedy,
            ColorerArg::PhasePalette => ColorerSpec::PhasePalette,
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn simulate(args: &RunArgs) -> Result<bool> {
    let c = args.load()?;
    let report = run_trials(&c, args.threads)?;
    if let Some(p) = &c.output.csv {
        write_csv_file(&report.trials, p)?;
    }
    if let Some(p) = &c.output.json {
        write_json_file(&report.aggregate, p)?;
    }
    print_json(&report.aggregate)?;
    Ok(true)
}

fn run_sweep(args: &RunArgs, eps: Vec<f64>, gamma: Vec<usize>) -> Result<bool> {
    let c = args.load()?;
    let grid = if gamma.is_empty() { Grid::Eps(eps) } else { Grid::Gamma(gamma) };
    let points = sweep(&c, &grid, args.threads)?;
    if let Some(p) = &c.output.csv {
        let all: Vec<_> = points.iter().flat_map(|p| p.report.trials.iter().cloned()).collect();
        write_csv_file(&all, p)?;
    }
    if let Some(p) = &c.output.json {
        write_json_file(&points, p)?;
    }
    println!("{:>8} {:>6} {:>8} {:>10} {:>20}", "eps", "gamma", "trials", "fail", "95% interval");
    for p in &points {
        let a = &p.report.aggregate;
        let ci = a.failure_rate_ci95.map_or("-".into(), |(lo, hi)| format!("[{lo:.4}, {hi:.4}]"));
        let rate = a.failure_rate.map_or("-".into(), |r| format!("{r:.4}"));
        println!("{:>8.4} {:>6} {:>8} {:>10} {:>20}", p.eps, p.gamma, a.completed, rate, ci);
    }
    Ok(true)
}

fn run_verify(level: Level, out: Option<&Path>) -> Result<bool> {
    let report = verify(level);
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {} ({:.1}s): {}", c.name, c.seconds, c.detail);
    }
    if let Some(p) = out {
        write_json_file(&report, p)?;
    }
    Ok(report.passed())
}

fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|e| {
            let (u, v) = e
                .trim()
                .split_once('-')
                .ok_or_else(|| HarnessError::Config(format!("edge `{e}` is not of the form u-v")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| HarnessError::Config(format!("bad vertex `{s}`")))
            };
            Ok((parse(u)?, parse(v)?))
        })
        .collect()
}

fn oracle(which: OracleCommand) -> Result<bool> {
    match which {
        OracleCommand::Gadget { delta, gamma } => {
            let p = gadget_failure_probability(delta, gamma)?;
            println!("{p} ≈ {:.6}", num_traits::ToPrimitive::to_f64(&p).unwrap_or(f64::NAN));
        }
        OracleCommand::Schedule {
            edges,
            gamma,
            colorer,
            phases,
        } => {
            let schedule = parse_edges(&edges)?;
            let colorer = edgecolor::ColorerKind::from(ColorerSpec::from(colorer));
            let d = exact_outcome_distribution(&schedule, colorer, gamma, phases)?;
            for (coloring, p) in &d.probabilities {
                let cells: Vec<String> = coloring.iter().map(|c| c.map_or("-".into(), |c| c.to_string())).collect();
                println!("{}  {p}", cells.join(" "));
            }
            let lost: edgecolor::Exact = d
                .probabilities
                .iter()
                .filter(|(c, _)| c.iter().any(Option::is_none))
                .map(|(_, p)| p.clone())
                .sum();
            println!("P(some edge uncolored) = {lost}");
        }
        OracleCommand::Params {
            eps,
            m,
            alpha_equals_zeta,
        } => {
            let convention = if alpha_equals_zeta {
                AlphaConvention::EqualsZeta
            } else {
                AlphaConvention::default()
            };
            let p = ParameterSet::with_convention(eps, m, convention)?;
            for (name, value, ln) in [
                ("zeta", p.zeta, p.ln_zeta),
                ("alpha", p.alpha, p.ln_alpha),
                ("b", p.b, p.ln_b),
                ("C", p.c, p.ln_c),
                ("N", p.n, p.ln_n),
            ] {
                println!("{name:>5} = {value:e}  (ln = {ln:.6})");
            }
        }
    }
    Ok(true)
}

fn report(csv: &Path, out: &Path) -> Result<bool> {
    let rows = read_csv(csv)?;
    std::fs::create_dir_all(out)?;
    let curve = failure_curve(&rows);
    println!("{:>6} {:>8} {:>10} {:>20}", "gamma", "trials", "fail", "95% interval");
    for p in &curve {
        println!("{:>6} {:>8} {:>10.4} {:>20}", p.x, p.trials, p.rate, format!("[{:.4}, {:.4}]", p.ci95.0, p.ci95.1));
    }
    if !curve.is_empty() {
        draw_failure_curve(&curve, "|Γ|", &out.join("failure_rate.svg"))?;
    }
    let collisions: Vec<f64> = rows.iter().filter_map(|r| r.collisions).map(|c| c as f64).collect();
    if !collisions.is_empty() {
        draw_histogram(&collisions, 20, "collisions", &out.join("collisions.svg"))?;
    }
    let deltas: Vec<f64> = rows.iter().filter_map(|r| r.max_abs_delta).collect();
    if !deltas.is_empty() {
        draw_histogram(&deltas, 20, "max |δ|", &out.join("max_abs_delta.svg"))?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Sweep { run, eps, gamma } => run_sweep(&run, eps, gamma),
        Command::Verify { level, out } => run_verify(level, out.as_deref()),
        Command::Oracle { which } => oracle(which),
        Command::Report { csv, out } => report(&csv, &out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
