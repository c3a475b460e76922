use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use beztopo::io::{cmd_bounds, cmd_certify, cmd_mesh, cmd_subdivide, RadiusFlags, Report};
use beztopo::pipe::{PipeOptions, DEFAULT_DENSITY, DEFAULT_SAFETY};
use beztopo::verify::{Level, DEFAULT_SAMPLES};

/// Exit status when certification ran but a check failed.
const EXIT_UNVERIFIED: u8 = 1;
/// Exit status for unreadable input or invalid arguments.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "beztopo", version, about = "Certified topology of subdivided composite Bézier curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print the report as JSON instead of a key: value tree.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print geometric constants and iteration bounds.
    Bounds {
        curve: PathBuf,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Extra angle (radians) for the N(ν) table; repeatable.
        #[arg(long = "nu")]
        nus: Vec<f64>,
    },
    /// Subdivide and write the pieces and union polygon.
    Subdivide {
        curve: PathBuf,
        #[arg(long)]
        iters: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subdivide per the bound for a level and verify the result.
    Certify {
        curve: PathBuf,
        #[arg(long, value_enum)]
        level: LevelArg,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Parameter samples for the distance and angle oracles.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Write a triangulated pipe surface around the curve.
    Mesh {
        curve: PathBuf,
        /// Pipe radius; defaults to the file's radius or the estimate.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Rings along the curve.
        #[arg(long, default_value_t = 256)]
        rings: usize,
        /// Vertices per ring.
        #[arg(long, default_value_t = 16)]
        sides: usize,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Simple,
    Homeo,
    Isotopy,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Simple => Level::SimplePieces,
            LevelArg::Homeo => Level::Homeomorphic,
            LevelArg::Isotopy => Level::Isotopic,
        }
    }
}

#[derive(Args)]
struct RadiusArgs {
    /// Use this pipe radius instead of the file's or the estimate.
    #[arg(long)]
    pipe_radius: Option<f64>,
    #[command(flatten)]
    estimator: EstimatorArgs,
}

#[derive(Args)]
struct EstimatorArgs {
    /// Radius estimator samples per segment.
    #[arg(long, default_value_t = DEFAULT_DENSITY)]
    pipe_density: usize,
    /// Radius estimator safety factor in (0, 1].
    #[arg(long, default_value_t = DEFAULT_SAFETY)]
    pipe_safety: f64,
}

impl EstimatorArgs {
    fn options(&self) -> PipeOptions {
        PipeOptions { density: self.pipe_density, safety: self.pipe_safety, max_radius: None }
    }
}

impl RadiusArgs {
    fn flags(&self) -> RadiusFlags {
        RadiusFlags { pipe_radius: self.pipe_radius, pipe: self.estimator.options() }
    }
}

fn print(report: &Report, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_tree());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Bounds { curve, radius, nus } => cmd_bounds(curve, &radius.flags(), nus),
        Command::Subdivide { curve, iters, out } => cmd_subdivide(curve, *iters, out),
        Command::Certify { curve, level, radius, samples } => {
            cmd_certify(curve, (*level).into(), &radius.flags(), *samples)
        }
        Command::Mesh { curve, radius, out, rings, sides, estimator } => {
            let flags = RadiusFlags { pipe_radius: *radius, pipe: estimator.options() };
            cmd_mesh(curve, &flags, out, *rings, *sides)
        }
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    print(&report, cli.json);
    match &report.certificate {
        Some(cert) if !cert.verified => {
            let name = cert.first_failure().map_or("unknown", |c| c.name.as_str());
            eprintln!("certification failed: check {name}");
            ExitCode::from(EXIT_UNVERIFIED)
        }
        _ => ExitCode::SUCCESS,
    }
}
