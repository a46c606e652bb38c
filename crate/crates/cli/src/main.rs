//! `eulimit`: Riemann solutions, Godunov runs and θ-sweeps from the shell.
//!
//! Exit codes: 0 on success, 2 on a configuration error, 1 on a numerical
//! failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{BoundaryName, Density, RunConfigFile};
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Parser, Debug)]
#[command(name = "eulimit", version, about = "Isothermal-limit toolkit for 1-D barotropic Euler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one Riemann problem and report its wave pattern.
    RiemannSolve(Flags),
    /// Sample a Riemann solution on a window as `xi,rho,u,m`.
    RiemannSample(Flags),
    /// Run the Godunov scheme on Riemann data and write snapshots.
    Simulate(Flags),
    /// Entropy-gap and f_xi rates over a θ ladder.
    SweepEntropyRate(Flags),
    /// Mechanical-energy gap rate over a θ ladder.
    SweepEnergyRate(Flags),
    /// L¹ distance of θ-solutions to the isothermal one.
    SweepRiemannLimit(Flags),
    /// Decavitation threshold and middle densities.
    Decavitation(Flags),
    /// One-sided vacuum fans and their isothermal limit.
    OneSideVacuum(Flags),
    /// Dissipation estimates on fixed data across θ.
    DissipationSweep(Flags),
    /// Invariant-region audit of a Godunov run.
    Audit(Flags),
}

#[derive(clap::Args, Debug, Default)]
struct Flags {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    /// Left density, a number or `vacuum`.
    #[arg(long = "rho-l")]
    rho_l: Option<Density>,
    #[arg(long = "u-l", allow_negative_numbers = true)]
    u_l: Option<f64>,
    /// Right density, a number or `vacuum`.
    #[arg(long = "rho-r")]
    rho_r: Option<Density>,
    #[arg(long = "u-r", allow_negative_numbers = true)]
    u_r: Option<f64>,
    /// Final or sampling time.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xmax: Option<f64>,
    /// Cells or samples.
    #[arg(long)]
    n: Option<usize>,
    /// Initial discontinuity position.
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long)]
    boundary: Option<BoundaryName>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Comma-separated, strictly decreasing θ ladder.
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    w0: Option<f64>,
    /// Output directory [default: $EULIMIT_OUT or ./out].
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    /// Config file (if any) with the flags laid over it.
    fn resolve(&self) -> Result<RunConfigFile, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfigFile::load(path)?,
            None => RunConfigFile::default(),
        };
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = Some(v);
                }
            };
        }
        set!(c.theta, self.theta);
        set!(c.riemann.rho_l, self.rho_l);
        set!(c.riemann.u_l, self.u_l);
        set!(c.riemann.rho_r, self.rho_r);
        set!(c.riemann.u_r, self.u_r);
        set!(c.sim.t_end, self.t);
        set!(c.sim.cfl, self.cfl);
        set!(c.sim.snapshots, self.snapshots);
        set!(c.grid.x_min, self.xmin);
        set!(c.grid.x_max, self.xmax);
        set!(c.grid.n_cells, self.n);
        set!(c.grid.x0, self.x0);
        set!(c.grid.boundary, self.boundary);
        set!(c.sweep.thetas, self.thetas);
        set!(c.sweep.samples, self.samples);
        set!(c.sweep.seed, self.seed);
        set!(c.sweep.w0, self.w0);
        set!(c.output_dir, self.out);
        Ok(c)
    }
}

fn out_dir(cfg: &RunConfigFile) -> PathBuf {
    cfg.output_dir
        .clone()
        .or_else(|| std::env::var_os("EULIMIT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(command: &Command) -> Result<bool, CliError> {
    type Handler = fn(&RunConfigFile, &mut OutDir) -> Result<commands::Outcome, CliError>;
    let (flags, handler): (&Flags, Handler) = match command {
        Command::RiemannSolve(f) => (f, commands::riemann_solve),
        Command::RiemannSample(f) => (f, commands::riemann_sample),
        Command::Simulate(f) => (f, commands::simulate),
        Command::SweepEntropyRate(f) => (f, commands::sweep_entropy_rate),
        Command::SweepEnergyRate(f) => (f, commands::sweep_energy_rate),
        Command::SweepRiemannLimit(f) => (f, commands::sweep_riemann_limit),
        Command::Decavitation(f) => (f, commands::decavitation),
        Command::OneSideVacuum(f) => (f, commands::one_side_vacuum),
        Command::DissipationSweep(f) => (f, commands::dissipation_sweep),
        Command::Audit(f) => (f, commands::audit),
    };
    let cfg = flags.resolve()?;
    let mut out = OutDir::create(&out_dir(&cfg))?;
    let outcome = handler(&cfg, &mut out)?;
    let mut summary = json!({
        "experiment_id": outcome.experiment_id,
        "config": serde_json::to_value(&cfg).map_err(anyhow::Error::from)?,
        "pass": outcome.pass,
    });
    if let (Some(map), serde_json::Value::Object(extra)) = (summary.as_object_mut(), outcome.fields) {
        map.extend(extra);
    }
    out.write_json(&format!("{}.json", outcome.experiment_id), &summary)?;
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    println!("pass={}", outcome.pass);
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; help and version succeed.
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli.command) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
