//! End-to-end steering and calibration through the simulated radar.

use std::f64::consts::PI;

use rts_aoa::aoa::wrap_phase;
use rts_aoa::calibration::{
    align_range_bins, calibrate, coherency_sweep, measure_pair, phase_period, SweepSpec,
};
use rts_aoa::{
    command, AngleGrid, ChannelPair, FrontEndChannel, PatternKernel, Processor, RadarConfig,
    RtsConfig, C0,
};

fn processor() -> Processor {
    let cfg = RadarConfig::new(77e9, 1e9, 40.96e-6, 12.5e6, 8, 2, 4).unwrap();
    let rts = RtsConfig::with_intermediate(&cfg, 500e6);
    Processor::new(cfg, rts, AngleGrid::new(8192).unwrap())
}

/// Range-aligned pair at 3.4° / 12.2° with coherent offset `offset`.
fn pair(p: &Processor, total: f64, offset: f64) -> ChannelPair {
    let (t1, t2) = (3.4f64.to_radians(), 12.2f64.to_radians());
    let d = total - 2.0 / C0;
    let base = ChannelPair::new(
        FrontEndChannel::new(t1, 1.0).with_delay(d),
        FrontEndChannel::new(t2, 1.0).with_delay(d),
    )
    .unwrap();
    let dphi = base.phase_difference(&p.radar, &p.rts) - 2.0 * PI * offset / phase_period(p);
    let delta = dphi.rem_euclid(2.0 * PI) / (4.0 * PI * p.rts.lo_frequency / C0);
    let ch2 = FrontEndChannel::new(t2, 1.0 + delta).with_delay(d);
    align_range_bins(&ChannelPair::new(base.ch1, ch2).unwrap()).unwrap()
}

#[test]
fn coherent_pair_steers_across_the_interval() {
    let p = processor();
    let pr = pair(&p, 67.2e-9, 0.0);
    assert!(pr.phase_difference(&p.radar, &p.rts).abs() < 1e-9);
    let (s1, s2) = (pr.ch1.theta.sin(), pr.ch2.theta.sin());
    for k in 1..=50 {
        let alpha = (s1 + (s2 - s1) * k as f64 / 51.0).asin();
        let cmd = command(&pr, alpha, PatternKernel::Array, 0.0, &p.radar).unwrap();
        let m = measure_pair(&pr, &cmd, false, &p).unwrap();
        let err = (m.detection.angle.angle - alpha).to_degrees();
        assert!(err.abs() <= 0.05, "set-point {:.3}: error {err:.4}", alpha.to_degrees());
    }
}

#[test]
fn angle_error_maxima_are_one_period_apart() {
    let p = processor();
    let period = phase_period(&p);
    let spec = SweepSpec::new(-0.5e-9, 1e-9, 25e-12);
    for offset in [0.0, 0.1e-9, 0.2e-9, 0.3e-9, 0.4e-9] {
        let pr = pair(&p, 67.0e-9, offset);
        let sweep = coherency_sweep(&pr, &spec, &p).unwrap();
        let est = sweep.period_estimate.unwrap();
        assert!((est - period).abs() <= spec.step, "offset {offset:e}: {est:e}");
    }
}

#[test]
fn calibration_finds_the_predicted_coherent_offset() {
    let p = processor();
    let period = phase_period(&p);
    let tol = 5f64.to_radians();
    for k in 0..8 {
        let offset = -0.45e-9 + k as f64 * 0.125e-9;
        let pr = pair(&p, 67.1e-9, offset);
        let cal = calibrate(&pr, &SweepSpec::new(-0.5e-9, 1e-9, 25e-12), 2, 5, &p).unwrap();
        let cp = cal.calibrated_pair();
        let dphi = cp.phase_difference(&p.radar, &p.rts);
        assert!(dphi.abs() <= tol, "offset {offset:e}: residual phase {dphi}");
        // the channels stay within half a period of each other in delay
        let sep = cp.ch2.total_delay() - cp.ch1.total_delay();
        assert!(sep.abs() <= period / 2.0 + 1e-12, "offset {offset:e}: separation {sep:e}");
        assert!(wrap_phase(2.0 * PI * (cal.best_offset() - offset) / period).abs() <= tol);

        // the calibration made at the probe holds for other set-points
        let (s1, s2) = (cp.ch1.theta.sin(), cp.ch2.theta.sin());
        for f in [0.1, 0.5, 0.9] {
            let alpha = (s1 + f * (s2 - s1)).asin();
            let cmd = command(&cp, alpha, PatternKernel::Array, 0.0, &p.radar).unwrap();
            let m = measure_pair(&cp, &cmd, true, &p).unwrap();
            let err = (m.detection.angle.angle - alpha).to_degrees();
            assert!(err.abs() <= 0.05, "offset {offset:e}, fraction {f}: {err}");
        }
    }
}

#[test]
fn quantized_delays_cannot_reach_coherency() {
    let mut p = processor();
    p.rts = p.rts.clone().quantized(0.25e-9);
    let pr = pair(&p, 67.0e-9, 0.125e-9);
    let cal = calibrate(&pr, &SweepSpec::new(-0.5e-9, 1e-9, 0.25e-9), 0, 5, &p).unwrap();
    // buffer steps are a quarter period apart; this geometry sits between two
    let dphi = cal.calibrated_pair().phase_difference(&p.radar, &p.rts);
    assert!(dphi.abs() > 5f64.to_radians(), "{dphi}");
    assert!(cal.best_error().to_degrees().abs() > 0.05);
}
