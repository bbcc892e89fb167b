use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nosecone::transform::EventLocator;
use nosecone::Method;

#[derive(Debug, Parser)]
#[command(
    name = "nosecone",
    version,
    about = "Newton's minimal-resistance nose cone: non-iterative solver, shooting baseline, drag tables and similarity sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the free boundary problem with one auxiliary IVP and a rescaling
    Solve(SolveArgs),
    /// Solve the free boundary problem by iterative shooting
    Shoot(ShootArgs),
    /// Reduced drag coefficients of the classical nose shapes
    DragTable(Common),
    /// Tabulate f(r/h) = a/h over a grid of radii
    Sweep(SweepArgs),
    /// Run the non-iterative solver and both shooting variants side by side
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Locator {
    /// Single correction with the end target frozen at the last mesh point
    PreviousNode,
    /// Single correction onto the chord crossing
    Linearized,
    /// Iterate the last step until the end condition holds to 1e-12
    Refined,
}

impl From<Locator> for EventLocator {
    fn from(l: Locator) -> Self {
        match l {
            Locator::PreviousNode => EventLocator::PreviousNode,
            Locator::Linearized => EventLocator::Linearized,
            Locator::Refined => EventLocator::refined(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RootFinder {
    Bisection,
    Secant,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Nose radius
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    /// Nose height
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub h: f64,
    /// Tip of the auxiliary initial value problem (must be > 0)
    #[arg(long = "astar", default_value_t = 0.5, allow_negative_numbers = true)]
    pub a_star: f64,
    /// Integration step
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    pub step: f64,
    /// Runge-Kutta scheme: rk2, rk4 or rk6
    #[arg(long, default_value = "rk4")]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Locator::PreviousNode)]
    pub locator: Locator,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Default for Common {
    fn default() -> Self {
        Common {
            r: 1.0,
            h: 1.0,
            a_star: 0.5,
            step: 1e-3,
            method: Method::Rk4,
            locator: Locator::PreviousNode,
            format: Format::Text,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also write the profile (original and auxiliary variables) as CSV
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "root-finder", value_enum, default_value_t = RootFinder::Secant)]
    pub root_finder: RootFinder,
    #[command(flatten)]
    pub seeds: Seeds,
}

#[derive(Debug, Clone, Args)]
pub struct Seeds {
    /// Lower end of the bisection bracket
    #[arg(long = "a-lo", default_value_t = 0.3)]
    pub a_lo: f64,
    /// Upper end of the bisection bracket
    #[arg(long = "a-hi", default_value_t = 0.5)]
    pub a_hi: f64,
    /// First secant seed
    #[arg(long, default_value_t = 0.5)]
    pub a0: f64,
    /// Second secant seed
    #[arg(long, default_value_t = 0.3)]
    pub a1: f64,
    /// Integration step of the shooting IVP (defaults to 1e-4; `compare`
    /// uses --step for both solvers)
    #[arg(long = "shoot-step")]
    pub shoot_step: Option<f64>,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            a_lo: 0.3,
            a_hi: 0.5,
            a0: 0.5,
            a1: 0.3,
            shoot_step: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated radii (the height is --h)
    #[arg(
        long = "r-values",
        value_delimiter = ',',
        num_args = 0..,
        default_value = "0.2,0.4,0.6,0.8,1.0,1.2,1.4,1.6,1.8,2.0"
    )]
    pub r_values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub seeds: Seeds,
}

/// Everything a report needs to be reproduced from its own output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub r: f64,
    pub h: f64,
    pub a_star: f64,
    pub step: f64,
    pub method: Method,
    pub locator: Locator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_finder: Option<RootFinder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secant_seeds: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shoot_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<f64>>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &'static str, common: &Common) -> Self {
        RunConfig {
            command,
            r: common.r,
            h: common.h,
            a_star: common.a_star,
            step: common.step,
            method: common.method,
            locator: common.locator,
            root_finder: None,
            bracket: None,
            secant_seeds: None,
            shoot_step: None,
            r_values: None,
            format: common.format,
            out: common.out.clone(),
        }
    }
}
