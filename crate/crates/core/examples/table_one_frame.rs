//! Four steered targets in one frame, each between the same two front ends.
//! Writes the range-Doppler map and detection lists to `target/table_one`.

use std::path::Path;

use rts_aoa::scenario::{calibration_summary, format_report, run_scenario, Scenario};

fn main() -> rts_aoa::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let scenario = Scenario::load(&dir.join("examples/scenarios/table_one.json"))?;
    let out = dir.join("../../target/table_one");
    let (report, files) = run_scenario(&scenario, &out)?;
    for cal in &report.calibrations {
        println!("{}", calibration_summary(cal));
    }
    print!("{}", format_report(&report));
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
