//! Steers the apparent angle between two coherent front ends by their
//! amplitude ratio and compares the two slope kernels.

use rts_aoa::aoa::superposed_spectrum;
use rts_aoa::{
    command, AngleGrid, ChannelPair, FrontEndChannel, PatternKernel, RadarConfig, RtsConfig,
};

fn main() -> rts_aoa::Result<()> {
    let radar = RadarConfig::new(77e9, 1e9, 40.96e-6, 12.5e6, 8, 2, 4)?;
    let rts = RtsConfig::with_intermediate(&radar, 500e6);
    let grid = AngleGrid::new(8192)?;

    let mut pair = ChannelPair::new(
        FrontEndChannel::new(3.4f64.to_radians(), 1.0).with_delay(60e-9),
        FrontEndChannel::new(12.2f64.to_radians(), 1.0).with_delay(60e-9),
    )?;
    pair.ch2.delay += pair.coherent_offset(&radar, &rts);

    let steer = |kernel: PatternKernel, alpha: f64| -> rts_aoa::Result<(f64, f64)> {
        let cmd = command(&pair, alpha, kernel, 0.0, &radar)?;
        let peak = superposed_spectrum(&pair, cmd.a1, cmd.a2, grid, &radar, &rts).peak(true)?;
        Ok((cmd.ratio, peak.angle.to_degrees()))
    };

    println!("set_deg  ratio_array  peak_array  ratio_sinc  peak_sinc");
    for k in 1..12 {
        let set = 3.4 + 8.8 * k as f64 / 12.0;
        let (ra, pa) = steer(PatternKernel::Array, set.to_radians())?;
        let (rs, ps) = steer(PatternKernel::Sinc { scale: 1.0 }, set.to_radians())?;
        println!("{set:7.3}  {ra:11.4}  {pa:10.4}  {rs:10.4}  {ps:9.4}");
    }
    Ok(())
}
