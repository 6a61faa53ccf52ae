use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mzquad::harness::experiment::{weight_sum_violations, write_frame_csv};
use mzquad::harness::{
    run_approx_experiment, run_frame, run_quad_experiment, run_weyl_experiment, write_layers,
    write_rules, ExperimentConfig, StoredRule,
};
use mzquad::mzfamily::assemble;
use mzquad::quadrature::dual_weights_with_floor;
use mzquad::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_UNCERTIFIED: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "mzquad", version, about = "Least-squares approximation and quadrature from MZ sampling families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify layers and report frame bounds.
    Frame(Settings),
    /// Least-squares convergence sweep.
    Approx(Settings),
    /// Quadrature convergence sweep.
    Quad {
        #[command(flatten)]
        settings: Settings,
        /// Also write the quadrature rules to this file.
        #[arg(long)]
        rules_out: Option<PathBuf>,
    },
    /// Weyl-law fit and remainder-function table.
    Weyl(Settings),
    /// Write the configured layers to a node file.
    GenNodes(Settings),
}

/// Settings shared by all subcommands; flags override the config file.
#[derive(Args)]
struct Settings {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fourier, chebyshev or legendre.
    #[arg(long)]
    basis: Option<String>,
    /// uniform, jittered, random or a node-file path.
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    oversampling: Option<String>,
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `dyadic:lo..hi`, `lo..hi[:step]` or a comma-separated list.
    #[arg(long)]
    degrees: Option<String>,
    /// `sobolev:σ[:ε]`, `power:p`, `analytic:a` or `hat`.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// Lower frame bound below which a layer is uncertified.
    #[arg(long)]
    floor: Option<String>,
    /// Absolute slack in bound comparisons.
    #[arg(long)]
    tolerance: Option<String>,
    /// Errors at or below this value are excluded from rate fits.
    #[arg(long)]
    rate_floor: Option<String>,
    /// Truncation level of the test function.
    #[arg(long)]
    lambda_max: Option<String>,
    /// Grid size for sup estimates.
    #[arg(long)]
    grid: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<String>,
    /// Exit with status 3 when a layer fails certification.
    #[arg(long)]
    strict: bool,
}

impl Settings {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
                e => e,
            })?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("basis", &self.basis),
            ("generator", &self.generator),
            ("oversampling", &self.oversampling),
            ("jitter", &self.jitter),
            ("seed", &self.seed),
            ("degrees", &self.degrees),
            ("function", &self.function),
            ("sigma", &self.sigma),
            ("floor", &self.floor),
            ("tolerance", &self.tolerance),
            ("rate_floor", &self.rate_floor),
            ("lambda_max", &self.lambda_max),
            ("grid", &self.grid),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if self.strict {
            config.strict = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn open_output(config: &ExperimentConfig) -> io::Result<Box<dyn Write>> {
    Ok(match &config.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn status(strict: bool, uncertified: usize, violations: usize) -> u8 {
    if strict && uncertified > 0 {
        EXIT_UNCERTIFIED
    } else if violations > 0 {
        EXIT_VIOLATION
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Frame(settings) => {
            let config = settings.resolve()?;
            let report = run_frame(&config)?;
            write_frame_csv(&report, open_output(&config)?)?;
            let sandwich = weight_sum_violations(&report, config.tolerance);
            eprintln!(
                "A = {:.6e}, B = {:.6e}, kappa = {:.6e}",
                report.lower, report.upper, report.kappa
            );
            for row in report.failing() {
                eprintln!("uncertified layer n = {} (A = {:.3e})", row.n, row.lower);
            }
            for n in &sandwich {
                eprintln!("violation at n = {n}: weight sum outside [A, B]");
            }
            Ok(status(config.strict, report.failing().count(), sandwich.len()))
        }
        Command::Approx(settings) => {
            let config = settings.resolve()?;
            let report = run_approx_experiment(&config)?;
            report.write_csv(open_output(&config)?)?;
            eprint!("{}", report.summary());
            Ok(status(config.strict, report.uncertified().count(), report.violation_count()))
        }
        Command::Quad {
            settings,
            rules_out,
        } => {
            let config = settings.resolve()?;
            let report = run_quad_experiment(&config)?;
            report.write_csv(open_output(&config)?)?;
            if let Some(path) = rules_out {
                let mut rules = Vec::new();
                for layer in config.layers()? {
                    let gram = assemble(&config.basis, &layer)?;
                    if gram.is_certified(config.floor) {
                        rules.push(StoredRule::from(&dual_weights_with_floor(&gram, config.floor)?));
                    }
                }
                write_rules(BufWriter::new(File::create(path)?), &rules)?;
            }
            eprint!("{}", report.summary());
            Ok(status(config.strict, report.uncertified().count(), report.violation_count()))
        }
        Command::Weyl(settings) => {
            let config = settings.resolve()?;
            let report = run_weyl_experiment(&config)?;
            report.write_csv(open_output(&config)?)?;
            eprint!("{}", report.summary());
            Ok(status(false, 0, report.violations().len()))
        }
        Command::GenNodes(settings) => {
            let config = settings.resolve()?;
            write_layers(open_output(&config)?, &config.layers()?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_)
                | Error::Parse { .. }
                | Error::Divergent { .. }
                | Error::NormDivergent { .. } => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}
