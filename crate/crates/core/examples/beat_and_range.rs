//! Synthesizes the beat signal of one front end and compares its range
//! spectrum with the closed-form sinc response.

use rts_aoa::spectrum::{range_dft, sinc_closed_form_range, SincConvention};
use rts_aoa::{synthesize_beat, FrontEndChannel, RadarConfig, RtsConfig, C0};

fn main() -> rts_aoa::Result<()> {
    let radar = RadarConfig::new(77e9, 1e9, 40.96e-6, 12.5e6, 2, 2, 4)?;
    let rts = RtsConfig::with_intermediate(&radar, 500e6);

    // 300.37 bins of total delay, broadside so every element agrees
    let tau_c = 2.0 / C0;
    let tau_rts = 300.37 / radar.bandwidth - tau_c;
    let ch = FrontEndChannel::new(0.0, 1.0).with_delay(tau_rts).with_gain(0.7);

    let cube = synthesize_beat(&[ch], &radar, &rts, None)?;
    let spec = range_dft(&cube, &radar, 1)?;

    println!("bin  range_m   dft_mag  closed_mag  phase_diff_deg");
    for bin in 297..=304 {
        let got = spec.values.get(bin, 0, 0);
        let want = sinc_closed_form_range(
            0.7,
            tau_c,
            tau_rts,
            bin as f64,
            &radar,
            &rts,
            SincConvention::Normalized,
        );
        println!(
            "{bin}  {:7.3}  {:8.2}  {:10.2}  {:14.4}",
            spec.range_of(bin as f64),
            got.norm(),
            want.norm(),
            (got * want.conj()).arg().to_degrees()
        );
    }
    Ok(())
}
