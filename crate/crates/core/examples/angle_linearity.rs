//! Steps the commanded angle across a calibrated pair and reports the
//! measured error at every set-point.

use std::path::Path;

use rts_aoa::scenario::{linearity, Scenario};

fn main() -> rts_aoa::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/table_one.json");
    let scenario = Scenario::load(&path)?;
    let report = linearity(&scenario)?;
    println!("set_deg  measured_deg  error_deg  gain1  gain2");
    for p in &report.points {
        println!(
            "{:7.2}  {:12.4}  {:9.4}  {:.3}  {:.3}",
            p.alpha_set.to_degrees(),
            p.alpha_meas.to_degrees(),
            p.error().to_degrees(),
            p.gain1,
            p.gain2
        );
    }
    println!("max |error| {:.4} deg", report.max_error().to_degrees());
    Ok(())
}
