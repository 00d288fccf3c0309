//! Detects single front ends at several angles through the full range,
//! Doppler and angle processing chain.

use rts_aoa::model::target_to_rts_params;
use rts_aoa::{AngleGrid, FrontEndChannel, Processor, RadarConfig, RtsConfig, TargetSpec};

fn main() -> rts_aoa::Result<()> {
    let radar = RadarConfig::new(77e9, 1e9, 40.96e-6, 12.5e6, 32, 2, 4)?;
    let rts = RtsConfig::with_intermediate(&radar, 500e6);
    let processor = Processor::new(radar.clone(), rts, AngleGrid::new(8192)?);

    println!("set_deg  range_m  velocity_mps  angle_deg");
    for angle_deg in [-40.0, -12.5, 0.0, 3.4, 12.2, 55.0] {
        let target = TargetSpec::new(25.0, 3.0, 1.0, f64::to_radians(angle_deg));
        let params = target_to_rts_params(&target, &radar, 1.0)?;
        let ch = FrontEndChannel::new(target.angle, 1.0).rendering(&params);
        let d = processor.estimate(&[ch])?;
        println!(
            "{angle_deg:7.1}  {:7.3}  {:12.3}  {:9.3}",
            d.range,
            d.velocity,
            d.angle.angle.to_degrees()
        );
    }
    Ok(())
}
