use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use triple_junction::cli::{self, RunConfig, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "tjunction", version, about = "Stationary perturbations of the triple-junction surface")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the perturbation and write fields, report, spine and mesh.
    Solve(ConfigArgs),
    /// Re-run the oracles on stored artifacts.
    Verify {
        /// Artifact directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve at several scales of the configured boundary data.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated scales.
        #[arg(long, default_value = "0,0.005,0.01")]
        scales: String,
    },
    /// Rewrite mesh.obj from stored fields.
    ExportMesh {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        mx: usize,
        #[arg(long, default_value_t = 48)]
        my: usize,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    r_guard: Option<f64>,
    /// translate:cx,cy or rotate:beta
    #[arg(long)]
    family: Option<String>,
    /// Sheet 1 boundary modes k:cos:sin;...
    #[arg(long)]
    modes1: Option<String>,
    #[arg(long)]
    modes2: Option<String>,
    #[arg(long)]
    modes3: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn build(&self) -> triple_junction::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let overrides: [(&str, Option<String>); 11] = [
            ("nx", self.nx.map(|v| v.to_string())),
            ("ny", self.ny.map(|v| v.to_string())),
            ("delta", self.delta.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("tol", self.tol.map(|v| v.to_string())),
            ("max_iter", self.max_iter.map(|v| v.to_string())),
            ("r_guard", self.r_guard.map(|v| v.to_string())),
            ("family", self.family.clone()),
            ("modes1", self.modes1.clone()),
            ("modes2", self.modes2.clone()),
            ("modes3", self.modes3.clone()),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let outcome = match args.command {
        Command::Solve(c) => match c.build() {
            Ok(cfg) => cli::cmd_solve(&cfg),
            Err(e) => config_error(e),
        },
        Command::Verify { out } => cli::cmd_verify(&out),
        Command::Sweep { config, scales } => {
            let parsed: Result<Vec<f64>, _> = scales.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match (config.build(), parsed) {
                (Ok(cfg), Ok(scales)) => cli::cmd_sweep(&cfg, &scales),
                (Err(e), _) => config_error(e),
                (_, Err(e)) => config_error(triple_junction::Error::Config(format!("scales: {e}"))),
            }
        }
        Command::ExportMesh { out, mx, my } => cli::cmd_export_mesh(&out, (mx, my)),
    };
    if outcome.code == 0 {
        print!("{}", outcome.message);
    } else {
        eprint!("{}", outcome.message);
        if !outcome.message.ends_with('\n') {
            eprintln!();
        }
    }
    ExitCode::from(outcome.code as u8)
}

fn config_error(e: triple_junction::Error) -> cli::CommandOutcome {
    cli::CommandOutcome { code: EXIT_CONFIG, message: format!("error: {e}") }
}
