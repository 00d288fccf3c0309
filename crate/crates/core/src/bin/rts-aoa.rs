use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rts_aoa::scenario::{self, calibration_summary, format_report, Overrides, Scenario};

#[derive(Parser)]
#[command(
    name = "rts-aoa",
    version,
    about = "Radar target simulator with angle-of-arrival synthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one frame with every target and evaluate the detections.
    Simulate(Common),
    /// Run the coherency sweep on the calibration pair.
    Calibrate(Common),
    /// Measure angle error across the linearity set-points.
    Linearity(Common),
    /// Write the frame's beat cube and range spectrum as binary dumps.
    DumpSpectrum(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Noise seed, replacing the scenario's.
    #[arg(long)]
    seed: Option<u64>,
    /// Angle grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Parabolic refinement of range, Doppler and angle peaks.
    #[arg(long, overrides_with = "no_refine")]
    refine: bool,
    #[arg(long, overrides_with = "refine")]
    no_refine: bool,
    /// Round simulator delays to the sample-buffer step.
    #[arg(long)]
    quantize_delay: bool,
}

impl Common {
    fn load(&self) -> rts_aoa::Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        let refine = match (self.refine, self.no_refine) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        s.apply(&Overrides {
            seed: self.seed,
            grid: self.grid,
            refine,
            quantize_delay: self.quantize_delay,
        })?;
        Ok(s)
    }
}

fn run(cli: Cli) -> rts_aoa::Result<bool> {
    let mut ok = true;
    let files = match &cli.command {
        Command::Simulate(c) => {
            let (report, files) = scenario::run_scenario(&c.load()?, &c.out_dir)?;
            print!("{}", format_report(&report));
            ok = !report.flagged();
            files
        }
        Command::Calibrate(c) => {
            let (cal, files) = scenario::run_calibration(&c.load()?, &c.out_dir)?;
            println!("{}", calibration_summary(&cal));
            files
        }
        Command::Linearity(c) => {
            let (report, files) = scenario::run_linearity(&c.load()?, &c.out_dir)?;
            println!(
                "{} set-points, max |error| {:.6} deg",
                report.points.len(),
                report.max_error().to_degrees()
            );
            files
        }
        Command::DumpSpectrum(c) => scenario::dump_spectrum(&c.load()?, &c.out_dir)?,
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
