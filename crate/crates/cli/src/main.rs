use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kasner_core::flow::jsonl::read_jsonl;
use kasner_core::regime::DetectorConfig;
use kasner_lab::scenario::{InitialData, Scenario, Source};
use kasner_lab::{fixtures, pipeline, CliError, RunReport, OUT_ENV};

#[derive(Parser)]
#[command(
    name = "kasner-lab",
    version,
    about = "Generate, integrate and classify crushing-singularity flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in fixture.
    Run {
        /// Path to scenario JSON, or a fixture name.
        scenario: String,
    },
    /// List the built-in fixtures.
    Fixtures {
        /// Print the scenario JSON of one fixture instead.
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
    /// Integrate Wainwright-Hsu initial data toward the singularity.
    #[command(allow_negative_numbers = true)]
    SimulateWh {
        #[arg(long, visible_alias = "sigma+")]
        sigma_plus: f64,
        #[arg(long, visible_alias = "sigma-")]
        sigma_minus: f64,
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
        #[arg(long)]
        n3: f64,
        #[arg(long)]
        tau_span: f64,
        #[arg(long)]
        max_step: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "N")]
        n_max: Option<usize>,
        #[arg(long, default_value = "simulate-wh")]
        name: String,
    },
    /// Run the detectors on a trajectory in JSONL form.
    Detect {
        trajectory: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "N")]
        n_max: Option<usize>,
    },
}

fn env_out() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn detector(eps: Option<f64>, n_max: Option<usize>) -> DetectorConfig {
    let mut cfg = DetectorConfig::default();
    if let Some(e) = eps {
        cfg.eps = e;
    }
    cfg.n_max = n_max.or(cfg.n_max);
    cfg
}

fn print_summary(report: &RunReport, dir: &Path) {
    let r = &report.regime;
    println!("scenario      {}", report.scenario);
    println!("samples       {}", report.samples);
    println!(
        "regime        {:?} (volume: {:?})",
        r.classification, r.volume_hypothesis
    );
    if let Some(slope) = r.late_slope {
        println!("late slope    {slope:.6}");
    }
    println!(
        "epochs        {} non-Kasner intervals, tau_max {:.3}",
        r.epoch_set.intervals.len(),
        r.tau_max
    );
    println!("constraint    {:.3e}", report.max_constraint_residual);
    println!("sup t^2|Rm|   {:.6e}", report.sup_curvature);
    println!(
        "densities     milne nonincreasing: {}, kasner nondecreasing (R<=0): {}",
        report.densities.milne_nonincreasing,
        report.densities.kasner_nondecreasing_where_r_nonpositive
    );
    if let Some(p) = &report.limit_exponents {
        println!("limit p       ({:.6}, {:.6}, {:.6})", p.p1, p.p2, p.p3);
    }
    println!("artifacts     {}", dir.display());
}

fn run_and_write(scenario: &Scenario) -> Result<(), CliError> {
    let dir = scenario.output_dir(env_out().as_deref());
    let out = pipeline::execute(scenario)?;
    pipeline::write_artifacts(&out, &dir)?;
    print_summary(&out.report, &dir);
    Ok(())
}

fn dump_last_state(err: &CliError) {
    let CliError::Integration {
        last: Some(last), ..
    } = err
    else {
        return;
    };
    let json = serde_json::to_string_pretty(last).unwrap_or_default();
    eprintln!("last state:\n{json}");
    let dir = env_out().unwrap_or_else(|| PathBuf::from(kasner_lab::scenario::DEFAULT_OUT));
    if std::fs::create_dir_all(&dir).is_ok() {
        let path = dir.join("last_state.json");
        if std::fs::write(&path, json + "\n").is_ok() {
            eprintln!("written to {}", path.display());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario } => run_and_write(&kasner_lab::resolve(&scenario)?),
        Command::Fixtures { show: None } => {
            print!("{}", fixtures::catalog());
            Ok(())
        }
        Command::Fixtures { show: Some(name) } => {
            let f = fixtures::find(&name).ok_or(CliError::UnknownFixture(name))?;
            println!("{}", serde_json::to_string_pretty(&(f.scenario)())?);
            Ok(())
        }
        Command::SimulateWh {
            sigma_plus,
            sigma_minus,
            n1,
            n2,
            n3,
            tau_span,
            max_step,
            eps,
            n_max,
            name,
        } => {
            let scenario = Scenario {
                name,
                source: Source::Wh {
                    initial: InitialData {
                        sigma_plus,
                        sigma_minus,
                        n: [n1, n2, n3],
                        log_theta: 0.0,
                    },
                    tau_span,
                    max_step,
                    dvol0: 1.0,
                },
                detector: detector(eps, n_max),
                output_dir: None,
            };
            scenario.validate()?;
            run_and_write(&scenario)
        }
        Command::Detect {
            trajectory,
            eps,
            n_max,
        } => {
            let file =
                std::fs::File::open(&trajectory).map_err(|e| CliError::io(&trajectory, e))?;
            let traj = read_jsonl(BufReader::new(file))?;
            let stem = trajectory
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("trajectory");
            let name = format!("detect-{stem}");
            let cfg = detector(eps, n_max);
            if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
                return Err(CliError::Invalid(format!(
                    "--eps must lie in (0, 1), got {}",
                    cfg.eps
                )));
            }
            let out = pipeline::detect(&name, &traj, &cfg)?;
            let dir = env_out()
                .unwrap_or_else(|| PathBuf::from(kasner_lab::scenario::DEFAULT_OUT))
                .join(&name);
            pipeline::write_artifacts(&out, &dir)?;
            print_summary(&out.report, &dir);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            dump_last_state(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
