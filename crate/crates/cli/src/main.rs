mod config;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optomech::model::SystemParams;
use optomech::pipeline::evaluate_point;
use optomech::sweep::{figure_preset, run_sweep, Figure, SweepResult, SweepSpec};
use optomech::validate::{run_validation, Fault, ValidationOptions, DEFAULT_SEED};

use config::ConfigError;

const EXIT_CONFIG: u8 = 1;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "optomech", version, about = "Steady-state entanglement and coherence of a three-mode optomechanical system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set J=0.3` or `--set sweep.name=cut`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct Output {
    /// Directory receiving CSV and SVG files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write an SVG plot next to each CSV.
    #[arg(long, overrides_with = "no_svg")]
    svg: bool,
    /// Skip the SVG plots.
    #[arg(long = "no-svg", overrides_with = "svg")]
    no_svg: bool,
}

impl Output {
    fn want_svg(&self) -> bool {
        self.svg || !self.no_svg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single parameter point.
    Point {
        #[command(flatten)]
        common: Common,
    },
    /// Run the sweep described in the `[sweep]` section of the configuration.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
    },
    /// Regenerate the data behind one figure (fig2 .. fig9).
    Repro {
        figure: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
    },
    /// Run the embedded oracle suite.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Corrupt the drift matrix before solving (self-test of the suite).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<optomech::Error> for Failure {
    fn from(e: optomech::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the configuration exit code; 2 means unstable.
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Point { common } => {
            let cfg = config::load(common.config.as_deref(), &common.overrides)?;
            let params = cfg.params(SystemParams::default())?;
            let outcome = evaluate_point(&params);
            print!("{}", report::point_report(&params, &outcome, cfg.omega_m_hz));
            Ok(report::point_exit_code(outcome.status) as u8)
        }
        Command::Sweep { common, output } => {
            let cfg = config::load(common.config.as_deref(), &common.overrides)?;
            let spec = cfg.sweep_spec()?;
            execute(&[spec], &output)?;
            Ok(0)
        }
        Command::Repro { figure, common, output } => {
            let fig: Figure = figure.parse()?;
            let cfg = config::load(common.config.as_deref(), &common.overrides)?;
            if cfg.sweep.is_some() {
                return Err(Failure::Config("repro does not accept a [sweep] section".into()));
            }
            let specs = figure_preset(fig)
                .into_iter()
                .map(|mut spec| {
                    spec.base = cfg.params(spec.base)?;
                    if let Some(hz) = cfg.omega_m_hz {
                        spec = spec.with_note(format!("omega_m = {hz} Hz"));
                    }
                    spec.validate()?;
                    Ok(spec)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            execute(&specs, &output)?;
            Ok(0)
        }
        Command::Validate { seed, inject_fault } => {
            let opts = ValidationOptions {
                seed,
                fault: inject_fault.then_some(Fault::DEFAULT),
                ..ValidationOptions::default()
            };
            let report = run_validation(&opts);
            for check in &report.checks {
                println!("{check}");
            }
            if report.all_passed() {
                println!("all oracle checks passed");
                Ok(0)
            } else {
                println!("oracle checks failed");
                Ok(EXIT_VALIDATION)
            }
        }
    }
}

fn execute(specs: &[SweepSpec], output: &Output) -> Result<(), Failure> {
    std::fs::create_dir_all(&output.out).map_err(|e| Failure::Io(format!("{}: {e}", output.out.display())))?;
    for spec in specs {
        let result = run_sweep(spec, output.jobs)?;
        write_outputs(&result, &output.out, output.want_svg())?;
        print!("{}", report::sweep_summary(&result));
    }
    Ok(())
}

fn write_outputs(result: &SweepResult, dir: &Path, svg: bool) -> Result<(), Failure> {
    let io = |path: &Path, e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let csv_path = dir.join(format!("{}.csv", result.spec.name));
    let file = std::fs::File::create(&csv_path).map_err(|e| io(&csv_path, e))?;
    report::write_csv(result, std::io::BufWriter::new(file)).map_err(|e| io(&csv_path, e))?;
    println!("wrote {}", csv_path.display());
    if svg {
        let svg_path = dir.join(format!("{}.svg", result.spec.name));
        std::fs::write(&svg_path, svg::render(result)).map_err(|e| io(&svg_path, e))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}
