use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blurlab_cli::catalog::{manifest, EXPERIMENTS};
use blurlab_cli::config::{validate, ExperimentConfig, Params};

#[derive(Parser)]
#[command(name = "blurlab", version, about = "Numerical checks for blurring maps and Stein-type bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Base seed for every random instance.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override of the experiment's pass tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for `<experiment>.json` and `<experiment>.csv`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Hide passing records.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List experiments and the statements they cover.
    List,
    /// Validate a configuration file without running it.
    Validate { config: PathBuf },
    /// Run the experiment described by a configuration file.
    Run { config: PathBuf },
    CheckLemmas(ExpArgs),
    Hypergeometric(ExpArgs),
    Divergences(ExpArgs),
    ClassicalLemma(ExpArgs),
    ClassicalStein(ExpArgs),
    QuantumBlurring(ExpArgs),
    FockConvergence(ExpArgs),
    VacuumSupport(ExpArgs),
    Axioms(ExpArgs),
    SteinEstimate(ExpArgs),
}

fn list_usize(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

fn list_f64(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

#[derive(Args, Default)]
struct ExpArgs {
    /// Size parameter, or a comma-separated n grid for fock-convergence.
    #[arg(long = "n")]
    n: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Upper end of the delta averaging interval.
    #[arg(long = "Delta")]
    big_delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    /// Comma-separated multiplier grid.
    #[arg(long = "M")]
    m_grid: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated occupation vector.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    /// State file (FockOperator or DenseOperator JSON).
    #[arg(long)]
    state: Option<PathBuf>,
    /// FreeFamily JSON file.
    #[arg(long)]
    family: Option<PathBuf>,
}

impl ExpArgs {
    fn params(&self, experiment: &str) -> Result<Params, String> {
        let mut p = Params {
            d: self.d,
            delta: self.delta,
            big_delta: self.big_delta,
            eps: self.eps,
            eta: self.eta,
            cutoff: self.cutoff,
            instances: self.instances,
            m_grid: self.m_grid.as_deref().map(list_f64).transpose()?,
            nodes: self.nodes,
            alpha: self.alpha,
            h: self.h.as_deref().map(list_usize).transpose()?,
            k: self.k.as_deref().map(list_usize).transpose()?,
            threshold: self.threshold,
            ..Params::default()
        };
        if let Some(n) = &self.n {
            let v = list_usize(n)?;
            if experiment == "fock-convergence" {
                p.n_grid = Some(v);
            } else if v.len() == 1 {
                p.n = Some(v[0]);
            } else {
                return Err(format!("--n takes a single value for {experiment}"));
            }
        }
        Ok(p)
    }
}

fn split(cmd: Command) -> Result<(&'static str, ExpArgs), Command> {
    Ok(match cmd {
        Command::CheckLemmas(a) => ("check-lemmas", a),
        Command::Hypergeometric(a) => ("hypergeometric", a),
        Command::Divergences(a) => ("divergences", a),
        Command::ClassicalLemma(a) => ("classical-lemma", a),
        Command::ClassicalStein(a) => ("classical-stein", a),
        Command::QuantumBlurring(a) => ("quantum-blurring", a),
        Command::FockConvergence(a) => ("fock-convergence", a),
        Command::VacuumSupport(a) => ("vacuum-support", a),
        Command::Axioms(a) => ("axioms", a),
        Command::SteinEstimate(a) => ("stein-estimate", a),
        other => return Err(other),
    })
}

fn execute(cfg: &ExperimentConfig, quiet: bool) -> ExitCode {
    match blurlab_cli::run(cfg) {
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Ok(report) => {
            let text = report.summary();
            if quiet {
                print!("{}", text.lines().filter(|l| !l.starts_with("PASS")).collect::<Vec<_>>().join("\n"));
                println!();
            } else {
                print!("{text}");
            }
            if let Some(dir) = &cfg.out {
                if let Err(e) = report.write(dir) {
                    eprintln!("error: cannot write report to {}: {e}", dir.display());
                    return ExitCode::from(2);
                }
            }
            if report.failed() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cmd = match split(cli.command) {
        Ok((id, args)) => {
            let params = match args.params(id) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let mut cfg = ExperimentConfig::new(id);
            cfg.seed = cli.seed;
            cfg.tol = cli.tol;
            cfg.params = params;
            cfg.inputs.state = args.state;
            cfg.inputs.family = args.family;
            cfg.out = cli.out;
            return execute(&cfg, cli.quiet);
        }
        Err(cmd) => cmd,
    };
    match cmd {
        Command::List => {
            for e in EXPERIMENTS {
                println!("{:<18} {}", e.id, e.summary);
                println!("{:<18} covers: {}", "", e.covers.join(", "));
            }
            println!("\n{} statements in the bundled manifest", manifest().len());
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Err(diags) => report_diags(&diags),
            Ok(cfg) => {
                let diags = validate(&cfg);
                if diags.is_empty() {
                    println!("ok: {}", cfg.experiment);
                    ExitCode::SUCCESS
                } else {
                    report_diags(&diags)
                }
            }
        },
        Command::Run { config } => match ExperimentConfig::load(&config) {
            Err(diags) => report_diags(&diags),
            Ok(mut cfg) => {
                if cli.seed != 0 {
                    cfg.seed = cli.seed;
                }
                if cli.tol.is_some() {
                    cfg.tol = cli.tol;
                }
                if cli.out.is_some() {
                    cfg.out = cli.out;
                }
                execute(&cfg, cli.quiet)
            }
        },
        _ => unreachable!("experiment verbs handled above"),
    }
}

fn report_diags(diags: &[blurlab_cli::config::Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{d}");
    }
    ExitCode::from(2)
}
