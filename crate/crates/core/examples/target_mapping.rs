//! Maps virtual targets onto simulator delay, Doppler shift and gain.

use rts_aoa::model::target_to_rts_params;
use rts_aoa::{RadarConfig, TargetSpec};

fn main() -> rts_aoa::Result<()> {
    let radar = RadarConfig::new(77e9, 1e9, 41.33e-6, 512.0 / 41.33e-6, 120, 2, 4)?;
    let front_end_distance = 1.0;

    println!("range_m  velocity_mps  delay_ns  doppler_hz  gain");
    for (range, velocity) in [(33.5, 0.0), (37.0, 4.0), (45.0, -2.0), (52.0, -5.0)] {
        let target = TargetSpec::new(range, velocity, 1.0, 0.0);
        let p = target_to_rts_params(&target, &radar, front_end_distance)?;
        println!(
            "{range:7.1}  {velocity:12.1}  {:8.4}  {:10.4}  {:.3e}",
            p.delay * 1e9,
            p.doppler,
            p.amplitude
        );
    }
    println!(
        "range bin {:.4} m, velocity bin {:.4} m/s",
        radar.range_bin_width(),
        radar.doppler_to_velocity(radar.doppler_bin_width())
    );
    Ok(())
}
