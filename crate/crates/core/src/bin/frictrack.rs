//! Command-line front end: single runs, two-observer comparisons, gain
//! sweeps, and the annotated default configuration.
//!
//! Exit codes: 0 success, 1 output/IO failure, 2 bad configuration, 3 a
//! requested single run diverged (its partial outputs are still written).
//! `compare` and `sweep` report divergences inside their outputs and exit 0.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frictrack::config::{default_config_toml, load_config};
use frictrack::error::{ConfigError, OutputError};
use frictrack::plots::emit_plots;
use frictrack::report::{compare_report, format_metrics, Compared};
use frictrack::runlog::write_csv;
use frictrack::scenario::{
    k1_sweep, run_scenario, IandISetup, ObserverChoice, RunResult, ScenarioConfig, SmSetup,
    SweepRow, DEFAULT_NOISE_AMPLITUDE,
};

#[derive(Parser)]
#[command(
    name = "frictrack",
    version,
    about = "Benchmark two output-feedback adaptive tracking schemes on a friction plant"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonOpts {
    /// Scenario configuration file (TOML); defaults are used without it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the noise amplitude (0 disables noise).
    #[arg(long)]
    noise: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario: CSV log, four SVG figures, metrics.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Override the observer: "iandi" or "slidingmode".
        #[arg(long)]
        observer: Option<String>,
    },
    /// Run the same scenario under both observers and compare them.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Sweep the smooth-observer gain k1 and tabulate stability.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated gain values.
        #[arg(long, value_delimiter = ',', default_value = "1,44,88,150")]
        k1: Vec<f64>,
        /// Sweep with measurement noise switched on.
        #[arg(long)]
        noisy: bool,
    },
    /// Print the annotated default configuration (TOML) to stdout.
    Defaults,
}

enum CliError {
    Config(ConfigError),
    Output(OutputError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        CliError::Output(e)
    }
}

fn apply_overrides(cfg: &mut ScenarioConfig, common: &CommonOpts) {
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(a) = common.noise {
        cfg.noise.amplitude = a;
    }
}

fn with_observer(cfg: &ScenarioConfig, name: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut out = cfg.clone();
    out.observer = match (name, &cfg.observer) {
        ("iandi", o @ ObserverChoice::IandI(_)) => *o,
        ("slidingmode", o @ ObserverChoice::SlidingMode(_)) => *o,
        // Switching kinds drops the config's observer block and takes that
        // kind's defaults.
        ("iandi", _) => ObserverChoice::IandI(IandISetup::default()),
        ("slidingmode", _) => ObserverChoice::SlidingMode(SmSetup::default()),
        (other, _) => {
            return Err(ConfigError::field(
                "observer",
                format!("unknown observer `{other}` (expected \"iandi\" or \"slidingmode\")"),
            ))
        }
    };
    Ok(out)
}

/// Write the full artifact set for one finished run.
fn write_run_outputs(res: &RunResult, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| OutputError::io(dir, e))?;
    write_csv(&res.log, &dir.join("run.csv"))?;
    emit_plots(&res.log, dir)?;
    let metrics_txt = format_metrics(&res.log.label, &res.metrics);
    let path = dir.join("metrics.txt");
    std::fs::write(&path, metrics_txt).map_err(|e| OutputError::io(path, e))?;
    Ok(())
}

fn cmd_run(common: &CommonOpts, observer: Option<&str>) -> Result<ExitCode, CliError> {
    let mut cfg = load_config(common.config.as_deref())?;
    apply_overrides(&mut cfg, common);
    if let Some(name) = observer {
        cfg = with_observer(&cfg, name)?;
    }
    let res = run_scenario(&cfg)?;
    write_run_outputs(&res, &common.out)?;
    print!("{}", format_metrics(&res.log.label, &res.metrics));
    println!("outputs written to {}", common.out.display());
    if let Some(d) = &res.metrics.diverged {
        eprintln!("run diverged at t = {:.4}: {}", d.t, d.reason);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(common: &CommonOpts) -> Result<ExitCode, CliError> {
    let mut cfg = load_config(common.config.as_deref())?;
    apply_overrides(&mut cfg, common);
    let cfg_ii = with_observer(&cfg, "iandi")?;
    let cfg_sm = with_observer(&cfg, "slidingmode")?;
    let res_ii = run_scenario(&cfg_ii)?;
    let res_sm = run_scenario(&cfg_sm)?;
    write_run_outputs(&res_ii, &common.out.join("iandi"))?;
    write_run_outputs(&res_sm, &common.out.join("slidingmode"))?;
    let report = compare_report(
        Compared { label: "iandi", metrics: &res_ii.metrics },
        Compared { label: "slidingmode", metrics: &res_sm.metrics },
    );
    let path = common.out.join("report.txt");
    std::fs::write(&path, &report).map_err(|e| OutputError::io(path, e))?;
    print!("{report}");
    println!("outputs written to {}", common.out.display());
    Ok(ExitCode::SUCCESS)
}

fn format_sweep_csv(rows: &[SweepRow]) -> String {
    use frictrack::runlog::format_value;
    let mut out = String::from(
        "k1,noisy,stable,rms_tracking_error,max_observer_error,tv_u,diverged_at\n",
    );
    for r in rows {
        let diverged_at = match &r.metrics.diverged {
            Some(d) => format_value(d.t),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k1,
            r.noisy,
            r.stable,
            format_value(r.metrics.rms_tracking_error),
            format_value(r.metrics.max_observer_error),
            format_value(r.metrics.control_total_variation),
            diverged_at
        ));
    }
    out
}

fn cmd_sweep(common: &CommonOpts, k1: &[f64], noisy: bool) -> Result<ExitCode, CliError> {
    let mut cfg = load_config(common.config.as_deref())?;
    apply_overrides(&mut cfg, common);
    // --noise sets the amplitude the noisy sweep uses; --noisy switches it on.
    let noisy = noisy || cfg.noise.amplitude > 0.0;
    let rows = k1_sweep(k1, noisy, &cfg)?;
    std::fs::create_dir_all(&common.out).map_err(|e| OutputError::io(&*common.out, e))?;
    let csv = format_sweep_csv(&rows);
    let path = common.out.join("sweep.csv");
    std::fs::write(&path, &csv).map_err(|e| OutputError::io(path, e))?;

    println!(
        "{:<10}{:>8}{:>10}{:>16}{:>16}{:>16}  {}",
        "k1", "noisy", "stable", "rms tracking", "max obs err", "tv(u)", "diverged at"
    );
    for r in rows {
        let diverged_at = match &r.metrics.diverged {
            Some(d) => format!("{:.2}", d.t),
            None => "-".into(),
        };
        println!(
            "{:<10}{:>8}{:>10}{:>16.4e}{:>16.4e}{:>16.4e}  {}",
            r.k1,
            r.noisy,
            r.stable,
            r.metrics.rms_tracking_error,
            r.metrics.max_observer_error,
            r.metrics.control_total_variation,
            diverged_at
        );
    }
    if noisy {
        println!("(noise amplitude: {})", if cfg.noise.amplitude > 0.0 {
            cfg.noise.amplitude
        } else {
            DEFAULT_NOISE_AMPLITUDE
        });
    }
    println!("sweep table written to {}", common.out.join("sweep.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { common, observer } => cmd_run(common, observer.as_deref()),
        Cmd::Compare { common } => cmd_compare(common),
        Cmd::Sweep { common, k1, noisy } => cmd_sweep(common, k1, *noisy),
        Cmd::Defaults => {
            print!("{}", default_config_toml());
            return ExitCode::SUCCESS;
        }
    };
    match result {
        Ok(code) => code,
        Err(CliError::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Output(e)) => {
            eprintln!("output error: {e}");
            ExitCode::from(1)
        }
    }
}
