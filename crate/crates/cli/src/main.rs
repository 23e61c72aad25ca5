//! `kho`: run kicked harmonic oscillator experiments from flags or a
//! `key = value` config file.

mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{overlay, read_config_file, Experiment, ExperimentConfig, RawConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "kho", version, about = "Kicked harmonic oscillator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a Gaussian and record moments per step plus the final wave function.
    Evolve(Flags),
    /// Wigner function of the evolved state (CSV and 16-bit PGM).
    Wigner(Flags),
    /// Classical stroboscopic web from a fixed ring of seeds.
    Web(Flags),
    /// Classically evolved skeleton curve; optional Liouville histogram with `--samples`.
    Manifold(Flags),
    /// Dephasing purity curves over a sweep of K and hbar values.
    Purity(Flags),
    /// Optical design numbers for a single kick-plus-rotation stage.
    Params(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kick strength; repeat or comma-separate for sweeps.
    #[arg(long = "K", value_name = "K")]
    k: Vec<String>,
    /// Rotation angle per period, e.g. `pi/3`, `2pi/3` or radians.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Kick phase offset (angle).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Effective Planck constant; repeat or comma-separate for sweeps.
    #[arg(long)]
    hbar: Vec<String>,
    /// `negative` (default) or `positive` sign of the kick exponent.
    #[arg(long)]
    kick_sign: Option<String>,
    /// Number of kicks.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    /// Squeeze ratio of the initial Gaussian (1 = coherent state).
    #[arg(long)]
    squeeze: Option<String>,
    /// Orientation of the squeeze axes (angle).
    #[arg(long, allow_hyphen_values = true)]
    tilt: Option<String>,
    /// Fixed grid size (needs `--q-max`); otherwise sized automatically.
    #[arg(long)]
    grid_points: Option<String>,
    #[arg(long)]
    q_max: Option<String>,
    /// Monte Carlo seed (default 0).
    #[arg(long)]
    seed: Option<String>,
    /// Iterations per seed for `web`.
    #[arg(long)]
    iterations: Option<String>,
    /// Largest point spacing of refined manifold curves.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    max_points: Option<String>,
    /// Half-length of the initial curve in standard deviations.
    #[arg(long)]
    axis_sigmas: Option<String>,
    /// Classical samples for the Liouville histogram (0 = skip).
    #[arg(long)]
    samples: Option<String>,
    /// Histogram bins per axis.
    #[arg(long)]
    bins: Option<String>,
    /// Linear map `a,b,c,d` applied to manifold curves before writing.
    #[arg(long, allow_hyphen_values = true)]
    post_map: Option<String>,
    /// Output formats: csv, pgm, json, text (comma-separated).
    #[arg(long)]
    format: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Laser wavelength (m).
    #[arg(long)]
    lambda: Option<String>,
    /// Lens focal length (m).
    #[arg(long)]
    f: Option<String>,
    /// Desired effective Planck constant; solves for the mask frequency.
    #[arg(long)]
    hbar_target: Option<String>,
    /// Mask spatial frequency (1/m); alternative to `--hbar-target`.
    #[arg(long)]
    nu: Option<String>,
    /// Per-pass transmission.
    #[arg(long)]
    transmission: Option<String>,
    /// Smallest acceptable output fraction.
    #[arg(long)]
    floor: Option<String>,
}

impl Flags {
    fn raw(&self) -> RawConfig {
        let mut r = RawConfig::new();
        let mut put = |k: &str, v: Vec<String>| {
            if !v.is_empty() {
                r.insert(k.to_string(), v);
            }
        };
        put("K", self.k.clone());
        put("hbar", self.hbar.clone());
        put("format", self.format.clone());
        for (k, v) in [
            ("alpha", &self.alpha),
            ("phi", &self.phi),
            ("kick_sign", &self.kick_sign),
            ("n", &self.n),
            ("q0", &self.q0),
            ("p0", &self.p0),
            ("squeeze", &self.squeeze),
            ("tilt", &self.tilt),
            ("grid_points", &self.grid_points),
            ("q_max", &self.q_max),
            ("seed", &self.seed),
            ("iterations", &self.iterations),
            ("eps", &self.eps),
            ("max_points", &self.max_points),
            ("axis_sigmas", &self.axis_sigmas),
            ("samples", &self.samples),
            ("bins", &self.bins),
            ("post_map", &self.post_map),
            ("out", &self.out),
            ("lambda", &self.lambda),
            ("f", &self.f),
            ("hbar_target", &self.hbar_target),
            ("nu", &self.nu),
            ("transmission", &self.transmission),
            ("floor", &self.floor),
        ] {
            put(k, v.iter().cloned().collect());
        }
        r
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (experiment, flags) = match cli.command {
        Command::Evolve(f) => (Experiment::Evolve, f),
        Command::Wigner(f) => (Experiment::Wigner, f),
        Command::Web(f) => (Experiment::Web, f),
        Command::Manifold(f) => (Experiment::Manifold, f),
        Command::Purity(f) => (Experiment::Purity, f),
        Command::Params(f) => (Experiment::Params, f),
    };
    let file = match &flags.config {
        Some(p) => read_config_file(p)?,
        None => RawConfig::new(),
    };
    let cfg = ExperimentConfig::resolve(experiment, &overlay(file, flags.raw()))?;
    for path in run::run(&cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kho: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
