//! CSV and text artifacts.

use std::io::Write;

use crate::error::Result;
use crate::pipeline::Detection;
use crate::spectrum::RangeDopplerMap;

use super::{LinearityPoint, PairCalibration, SimulationReport, TargetReport};

pub const RD_MAP_CSV: &str = "rd_map.csv";
pub const DETECTIONS_CSV: &str = "detections.csv";
pub const PEAKS_CSV: &str = "peaks.csv";
pub const LINEARITY_CSV: &str = "linearity.csv";
pub const CALIBRATION_CSV: &str = "calibration.csv";
pub const CALIBRATION_SUMMARY: &str = "calibration_summary.txt";
pub const BEAT_CUBE_BIN: &str = "beat_cube.bin";
pub const RANGE_SPECTRUM_BIN: &str = "range_spectrum.bin";

/// Lowest value written for an empty cell, dB.
pub const DB_FLOOR: f64 = -300.0;

pub fn power_db(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Every cell, Doppler-major, with the antenna-summed power in dB.
pub fn write_rd_map<W: Write>(map: &RangeDopplerMap, mut out: W) -> Result<()> {
    writeln!(out, "range_m,velocity_mps,magnitude_db")?;
    let power = map.power();
    let nr = map.range_bins();
    for d in 0..map.doppler_bins() {
        let v = map.velocity_of(d as f64);
        for r in 0..nr {
            writeln!(
                out,
                "{:.4},{:.4},{:.3}",
                map.range_of(r as f64),
                v + 0.0,
                power_db(power[d * nr + r])
            )?;
        }
    }
    Ok(())
}

pub fn write_detections<W: Write>(targets: &[TargetReport], mut out: W) -> Result<()> {
    writeln!(
        out,
        "target_id,range_m,velocity_mps,angle_deg,range_err_m,velocity_err_mps,angle_err_deg"
    )?;
    for t in targets {
        let (r, v, a) = match &t.detection {
            Some(d) => (d.range, d.velocity, d.angle.angle.to_degrees()),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        writeln!(
            out,
            "{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            t.id,
            r,
            v + 0.0,
            a,
            t.range_error,
            t.velocity_error,
            t.angle_error.to_degrees()
        )?;
    }
    Ok(())
}

pub fn write_peaks<W: Write>(peaks: &[Detection], mut out: W) -> Result<()> {
    writeln!(out, "range_m,velocity_mps,angle_deg,magnitude_db")?;
    for p in peaks {
        writeln!(
            out,
            "{:.3},{:.3},{:.3},{:.3}",
            p.range,
            p.velocity + 0.0,
            p.angle.angle.to_degrees(),
            power_db(p.power)
        )?;
    }
    Ok(())
}

pub fn write_linearity<W: Write>(points: &[LinearityPoint], mut out: W) -> Result<()> {
    writeln!(
        out,
        "alpha_set_deg,alpha_meas_deg,alpha_err_deg,gain1,gain2"
    )?;
    for p in points {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6}",
            p.alpha_set.to_degrees(),
            p.alpha_meas.to_degrees(),
            p.error().to_degrees(),
            p.gain1,
            p.gain2
        )?;
    }
    Ok(())
}

pub fn calibration_summary(cal: &PairCalibration) -> String {
    let best = cal.best();
    let period = match cal.coarse.period_estimate {
        Some(p) => format!("{:.15}", p),
        None => "none".into(),
    };
    format!(
        "best_offset_s={:.15} best_error_deg={:.6} period_estimate_s={} delay_adjust_s={:.15}",
        best.best_offset,
        best.best_error.to_degrees(),
        period,
        cal.delay_adjust
    )
}

/// Human-readable per-target summary.
pub fn format_report(report: &SimulationReport) -> String {
    let mut s = String::new();
    for t in &report.targets {
        let status = if t.flagged { "FLAGGED" } else { "ok" };
        match &t.detection {
            Some(d) => s.push_str(&format!(
                "target {}: range {:.3} m ({:+.3}), velocity {:.3} m/s ({:+.3}), angle {:.3} deg ({:+.3}) {}\n",
                t.id,
                d.range,
                t.range_error,
                d.velocity + 0.0,
                t.velocity_error,
                d.angle.angle.to_degrees(),
                t.angle_error.to_degrees(),
                status
            )),
            None => s.push_str(&format!("target {}: not detected {}\n", t.id, status)),
        }
        if let Some(c) = &t.constraints {
            if !c.ok() {
                s.push_str(&format!(
                    "  constraints: range bins {:+.3}, Doppler bins {:+.3}, span {:.3}/{:.3} deg, phase {:+.3} deg\n",
                    c.range_offset_bins,
                    c.doppler_offset_bins,
                    c.angle_span.to_degrees(),
                    c.resolution.to_degrees(),
                    c.phase_difference.to_degrees()
                ));
            }
        }
    }
    s.push_str(&format!(
        "{} peaks in the range-angle list\n",
        report.peaks.len()
    ));
    s
}
