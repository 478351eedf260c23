use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

mod commands;
mod verify;

pub const TOLERANCE_ENV: &str = "ZVORTEX_TOLERANCE_SCALE";

#[derive(Debug, Parser)]
#[command(name = "zvortex", version, about = "Vortex solutions of the Schrodinger equation for psi = z^c")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON parameter file for the command.
    #[arg(long, global = true)]
    params: Option<PathBuf>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Reduced Planck constant (natural units by default).
    #[arg(long, global = true)]
    hbar: Option<f64>,

    #[arg(long, global = true)]
    mass: Option<f64>,

    /// RNG seed for the ensemble simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the analyticity and residual checks; exit 1 if any tolerance is missed.
    Verify {
        /// Multiplies every tolerance. Also read from ZVORTEX_TOLERANCE_SCALE.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// Sample a vortex trajectory in the psi plane.
    Trajectory,
    /// Follow k through an energy schedule on an eigenvalue ladder.
    Ladder,
    /// Simulate vortex production and collapse.
    Ensemble {
        /// Write the emitted bit sequence to this file.
        #[arg(long)]
        bits: Option<PathBuf>,
    },
    /// Sample the gradient-map segments, involution images and squared ray.
    Geometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; exit 2.
    Usage(String),
    /// Domain or check failure; exit 1.
    Failure(String),
}

impl From<zvortex::Error> for CliError {
    fn from(e: zvortex::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

/// Result of a command: rendered output plus whether every check passed.
pub struct Rendered {
    pub body: Vec<u8>,
    pub passed: bool,
}

impl Rendered {
    pub fn ok(body: Vec<u8>) -> Self {
        Self { body, passed: true }
    }
}

pub struct Context {
    pub params: Option<PathBuf>,
    pub format: Option<Format>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub seed: Option<u64>,
}

impl Context {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// Parameter file contents, or the type's defaults when no file is given.
    pub fn load_or_default<T: DeserializeOwned + Default>(&self) -> Result<T, CliError> {
        match &self.params {
            Some(path) => load_json(path),
            None => Ok(T::default()),
        }
    }

    pub fn load_required<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        match &self.params {
            Some(path) => load_json(path),
            None => Err(CliError::Usage("this command requires --params <path>".into())),
        }
    }

    /// Physical constants; flags override file values, which override natural units.
    pub fn physical(
        &self,
        file_hbar: Option<f64>,
        file_mass: Option<f64>,
    ) -> Result<zvortex::PhysicalParams, CliError> {
        let hbar = self.hbar.or(file_hbar).unwrap_or(1.0);
        let mass = self.mass.or(file_mass).unwrap_or(1.0);
        zvortex::PhysicalParams::new(hbar, mass).map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read params file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed params file {}: {e}", path.display())))
}

pub fn json_body(value: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    let mut body = serde_json::to_vec_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    body.push(b'\n');
    Ok(body)
}

fn run(cli: Cli) -> Result<Rendered, CliError> {
    let ctx = Context { params: cli.params, format: cli.format, hbar: cli.hbar, mass: cli.mass, seed: cli.seed };
    let rendered = match cli.command {
        Command::Verify { tolerance_scale } => verify::run(&ctx, tolerance_scale)?,
        Command::Trajectory => commands::trajectory(&ctx)?,
        Command::Ladder => commands::ladder(&ctx)?,
        Command::Ensemble { bits } => commands::ensemble(&ctx, bits.as_deref())?,
        Command::Geometry => commands::geometry(&ctx)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, &rendered.body)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&rendered.body)?;
            stdout.flush()?;
        }
    }
    Ok(rendered)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(r) if r.passed => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("zvortex: one or more checks failed");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("zvortex: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("zvortex: {msg}");
            ExitCode::from(1)
        }
    }
}
