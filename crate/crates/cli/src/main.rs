use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rieszwave::experiments::{exit_code, in_pool, run_with_manifest, simulate_to, Equation, OutputFormat, StudyConfig, StudyKind, MAX_SEED};
use rieszwave::wavekernel::check_exponents;
use rieszwave::Error;

#[derive(Parser)]
#[command(name = "rieszwave", version, about = "Stochastic wave equation with Riesz-correlated noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; desk defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquationArg {
    Spde,
    Regularized,
    Skeleton,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one path and write it as .npy plus a JSON sidecar.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = EquationArg::Spde)]
        equation: EquationArg,
        #[arg(long, default_value_t = 0)]
        replica: u64,
    },
    WzStudy(Common),
    IncrementStudy(Common),
    SupStudy(Common),
    RateStudy(Common),
    KernelBounds(Common),
    SobolevMoments(Common),
    SkeletonCheck(Common),
    SmoothingBounds(Common),
    /// Exponent bookkeeping for (β, p, γ).
    Params {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        gamma: f64,
    },
}

fn load(common: &Common) -> Result<StudyConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => StudyConfig::load(path)?,
        None => StudyConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(m) = common.replicas {
        cfg.replicas = m;
    }
    Ok(cfg)
}

fn study(kind: StudyKind, common: &Common) -> Result<bool, Error> {
    let cfg = load(common)?;
    let res = run_with_manifest(&cfg, kind, common.threads)?;
    let format = match common.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    for path in res.write(&common.out, format)? {
        log::info!("wrote {}", path.display());
    }
    for c in &res.checks {
        println!("{} {}: {:.6} (threshold {}) {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold, c.detail);
    }
    Ok(res.passed())
}

fn run(cli: Cli) -> Result<bool, Error> {
    let (kind, common) = match cli.command {
        Command::Params { beta, p, gamma } => {
            let r = check_exponents(beta, p, gamma);
            let verdict = if r.discrepancy() {
                "DISCREPANCY"
            } else if r.hypotheses_hold {
                "OK"
            } else {
                "HYPOTHESES FAIL"
            };
            println!("eta={:.4} eta1={:.4} {verdict}", r.eta, r.eta1);
            return Ok(true);
        }
        Command::Simulate { common, equation, replica } => {
            let cfg = load(&common)?;
            let eq = match equation {
                EquationArg::Spde => Equation::Spde,
                EquationArg::Regularized => Equation::Regularized,
                EquationArg::Skeleton => Equation::Skeleton,
            };
            let stem = common.out.join(format!("path_r{replica}"));
            let (path, _) = in_pool(common.threads, || simulate_to(&cfg, eq, replica, &stem))?;
            println!("wrote {} snapshots to {}.npy", path.len(), stem.display());
            return Ok(true);
        }
        Command::WzStudy(c) => (StudyKind::Wz, c),
        Command::IncrementStudy(c) => (StudyKind::Increments, c),
        Command::SupStudy(c) => (StudyKind::SupConvergence, c),
        Command::RateStudy(c) => (StudyKind::Rate, c),
        Command::KernelBounds(c) => (StudyKind::KernelBounds, c),
        Command::SobolevMoments(c) => (StudyKind::SobolevMoments, c),
        Command::SkeletonCheck(c) => (StudyKind::SkeletonCheck, c),
        Command::SmoothingBounds(c) => (StudyKind::SmoothingBounds, c),
    };
    study(kind, &common)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
