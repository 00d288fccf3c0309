//! Sweeps the second front end's delay, finds the coherent offset and the
//! phase period, then refines. Pass `--quantize` to restrict delays to the
//! sample-buffer step.

use std::f64::consts::PI;

use rts_aoa::calibration::{calibrate, phase_period, SweepSpec};
use rts_aoa::model::BUFFER_DELAY_STEP;
use rts_aoa::{AngleGrid, ChannelPair, FrontEndChannel, Processor, RadarConfig, RtsConfig, C0};

fn main() -> rts_aoa::Result<()> {
    let quantize = std::env::args().any(|a| a == "--quantize");
    let radar = RadarConfig::new(77e9, 1e9, 40.96e-6, 12.5e6, 8, 2, 4)?;
    let mut rts = RtsConfig::with_intermediate(&radar, 500e6);
    let mut step = 25e-12;
    if quantize {
        rts = rts.quantized(BUFFER_DELAY_STEP);
        step = BUFFER_DELAY_STEP;
    }
    let processor = Processor::new(radar.clone(), rts.clone(), AngleGrid::new(8192)?);

    // the second front end sits a little further out than the first
    let delay = 67e-9 - 2.0 / C0;
    let pair = ChannelPair::new(
        FrontEndChannel::new(3.4f64.to_radians(), 1.0).with_delay(delay),
        FrontEndChannel::new(12.2f64.to_radians(), 1.0012).with_delay(delay),
    )?;

    let iterations = if quantize { 0 } else { 2 };
    let cal = calibrate(&pair, &SweepSpec::new(-0.5e-9, 1e-9, step), iterations, 5, &processor)?;

    println!("delta_tau_ns  angle_error_deg");
    for (o, e) in cal.coarse.offsets.iter().zip(&cal.coarse.angle_errors) {
        println!("{:12.3}  {:15.4}", o * 1e9, e.to_degrees());
    }
    match cal.coarse.period_estimate {
        Some(p) => println!("period estimate {:.4} ns", p * 1e9),
        None => println!("no period estimate"),
    }
    println!("predicted period {:.4} ns", phase_period(&processor) * 1e9);
    for (i, r) in cal.refined.iter().enumerate() {
        println!(
            "pass {}: step {:.1} ps, best {:.4} ns, error {:.5} deg",
            i + 1,
            r.step * 1e12,
            r.best_offset * 1e9,
            r.best_error.to_degrees()
        );
    }
    let residual = cal.calibrated_pair().phase_difference(&radar, &rts);
    println!(
        "best offset {:.4} ns, residual phase {:.2} deg",
        cal.best_offset() * 1e9,
        residual * 180.0 / PI
    );
    Ok(())
}
