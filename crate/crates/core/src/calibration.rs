//! Two-step pair calibration: range-bin alignment, then a fine delay sweep
//! that minimizes the steered angle error. Also per-channel amplitude
//! equalization.

use std::io::Write;

use rayon::prelude::*;

use crate::aoa::{amplitude_ratio, delay_phase_slope, AoaCommand, ChannelPair, PatternKernel};
use crate::cube::add_noise;
use crate::error::{Error, Result};
use crate::model::{FrontEndChannel, C0};
use crate::peak::parabolic_offset;
use crate::pipeline::{Detection, Processor};
use crate::spectrum::RangeDopplerMap;

/// Default probe position as a fraction of the pair's span in `sin α`.
/// Height, relative to the largest interior maximum, an end point of a
/// sweep needs to count as a maximum of `|α_ε|`.
pub const END_PEAK_FRACTION: f64 = 0.9;

pub const DEFAULT_PROBE_FRACTION: f64 = 0.25;

/// Relative magnitude below which a channel is treated as outside the
/// detected cell and left unequalized.
pub const EQUALIZE_FLOOR: f64 = 0.05;

/// Sweep of the delay offset applied to the pair's second channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    /// s
    pub min: f64,
    pub max: f64,
    pub step: f64,
    /// Set-point held during the sweep, rad. Defaults to the point a quarter
    /// of the way from `θ_1` to `θ_2` in `sin α`.
    pub probe: Option<f64>,
    /// Fixed `(a1, a2)`. Defaults to the commanded gains at the probe.
    pub gains: Option<(f64, f64)>,
    /// Equalize the channels' magnitudes at every point.
    pub equalize: bool,
}

impl SweepSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Self {
            min,
            max,
            step,
            probe: None,
            gains: None,
            equalize: true,
        }
    }

    pub fn with_equalize(mut self, equalize: bool) -> Self {
        self.equalize = equalize;
        self
    }

    pub fn with_probe(mut self, probe: f64) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn with_gains(mut self, a1: f64, a2: f64) -> Self {
        self.gains = Some((a1, a2));
        self
    }

    /// Checks the grid and that it spans at least one phase period.
    pub fn validate(&self, period: f64) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidSweep(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.max > self.min) {
            return Err(Error::InvalidSweep(format!(
                "max {} must exceed min {}",
                self.max, self.min
            )));
        }
        if self.max - self.min < period * (1.0 - 1e-9) {
            return Err(Error::InvalidSweep(format!(
                "span {:.4} ns is shorter than one phase period {:.4} ns; widen the sweep",
                (self.max - self.min) * 1e9,
                period * 1e9
            )));
        }
        if (self.max - self.min) / self.step > 1e6 {
            return Err(Error::InvalidSweep("more than 1e6 sweep points".into()));
        }
        Ok(())
    }

    pub fn offsets(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub offsets: Vec<f64>,
    /// `α̂ - α_probe`, rad.
    pub angle_errors: Vec<f64>,
    pub best_offset: f64,
    pub best_error: f64,
    /// Spacing of the two dominant `|α_ε|` maxima, s.
    pub period_estimate: Option<f64>,
    pub step: f64,
    pub probe: f64,
    pub gains: (f64, f64),
    pub equalize: bool,
}

impl SweepResult {
    pub fn best_index(&self) -> usize {
        self.offsets
            .iter()
            .position(|&o| o == self.best_offset)
            .unwrap_or(0)
    }

    /// `delta_tau_s,angle_error_deg` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "delta_tau_s,angle_error_deg")?;
        for (o, e) in self.offsets.iter().zip(&self.angle_errors) {
            writeln!(out, "{:.15},{:.6}", o, e.to_degrees())?;
        }
        Ok(())
    }
}

/// Delay to add to `ch2` so both channels' total delays coincide.
pub fn range_alignment(pair: &ChannelPair) -> f64 {
    let total = |ch: &FrontEndChannel| 2.0 * ch.path_length / C0 + ch.delay;
    total(&pair.ch1) - total(&pair.ch2)
}

/// The pair with `ch2`'s simulator delay adjusted onto `ch1`'s range.
pub fn align_range_bins(pair: &ChannelPair) -> Result<ChannelPair> {
    let mut out = pair.clone();
    out.ch2.delay += range_alignment(pair);
    if out.ch2.delay < 0.0 {
        return Err(Error::AlignmentUnreachable(format!(
            "second front end needs a delay of {:.4} ns",
            out.ch2.delay * 1e9
        )));
    }
    Ok(out)
}

fn probe_and_gains(
    pair: &ChannelPair,
    spec: &SweepSpec,
    processor: &Processor,
) -> Result<(f64, (f64, f64))> {
    let probe = spec.probe.unwrap_or_else(|| {
        let (s1, s2) = (pair.ch1.theta.sin(), pair.ch2.theta.sin());
        (s1 + DEFAULT_PROBE_FRACTION * (s2 - s1)).asin()
    });
    let gains = match spec.gains {
        Some(g) => g,
        None => {
            let ratio = amplitude_ratio(pair, probe, PatternKernel::Array, &processor.radar)?;
            let c = AoaCommand::from_ratio(probe, ratio, 0.0);
            (c.a1, c.a2)
        }
    };
    Ok((probe, gains))
}

/// Result of driving the pair with one command through the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMeasurement {
    pub detection: Detection,
    /// Gains actually applied, after equalization if requested.
    pub gains: (f64, f64),
    /// Single-channel beamformed magnitudes in the detected cell.
    pub magnitudes: (f64, f64),
}

/// Simulates the commanded pair and detects the strongest cell.
///
/// With `equalize`, each channel's beamformed magnitude is first measured
/// on its own in the cell the pair occupies and the gains are corrected so
/// both contribute as if their magnitudes were equal. This removes the
/// range-response loss a delay offset inflicts on one channel. The
/// detection is taken in the cell the pair occupies before equalization.
pub fn measure_pair(
    pair: &ChannelPair,
    cmd: &AoaCommand,
    equalize: bool,
    processor: &Processor,
) -> Result<PairMeasurement> {
    let [c1, c2] = pair.commanded(&AoaCommand {
        a1: 1.0,
        a2: 1.0,
        ..*cmd
    });
    let quiet = processor.clone().with_noise(None);
    let (cube1, cube2) = rayon::join(|| quiet.simulate(&[c1]), || quiet.simulate(&[c2]));
    let (cube1, cube2) = (cube1?, cube2?);
    let (m1, m2) = (quiet.range_doppler(&cube1)?, quiet.range_doppler(&cube2)?);
    let combine = |a1: f64, a2: f64| RangeDopplerMap {
        values: m1.values.weighted_sum(a1, &m2.values, a2),
        ..m1.clone()
    };
    let magnitude = |m: &RangeDopplerMap, r: usize, d: usize| -> Result<f64> {
        Ok(quiet
            .angle_spectrum(m, r, d)?
            .magnitudes()
            .into_iter()
            .fold(0.0, f64::max))
    };

    let raw = quiet.strongest(&combine(cmd.a1, cmd.a2))?;
    let (r, d) = (raw.range_bin, raw.doppler_bin);
    let magnitudes = (magnitude(&m1, r, d)?, magnitude(&m2, r, d)?);
    let mut gains = (cmd.a1, cmd.a2);
    if equalize && cmd.a1 > 0.0 && cmd.a2 > 0.0 {
        let (lo, hi) = (
            magnitudes.0.min(magnitudes.1),
            magnitudes.0.max(magnitudes.1),
        );
        if hi <= 0.0 {
            return Err(Error::ZeroPower(0));
        }
        // a channel that has left the cell cannot be equalized
        if lo > EQUALIZE_FLOOR * hi {
            let (g1, g2) = (cmd.a1 / magnitudes.0, cmd.a2 / magnitudes.1);
            let top = g1.max(g2);
            gains = (g1 / top, g2 / top);
        }
    }

    let detection = match processor.noise {
        None => {
            let map = combine(gains.0, gains.1);
            quiet.detection_at(&map, &map.power(), r, d)?
        }
        Some(spec) => {
            let mut cube = cube1.weighted_sum(gains.0, &cube2, gains.1);
            add_noise(&mut cube, spec);
            let map = processor.range_doppler(&cube)?;
            processor.detection_at(&map, &map.power(), r, d)?
        }
    };
    Ok(PairMeasurement {
        detection,
        gains,
        magnitudes,
    })
}

/// Amplitude corrections `(c1, c2)` for the pair at a delay offset,
/// from each channel's magnitude in the cell the pair occupies. The
/// stronger channel gets 1.
pub fn pair_corrections(
    pair: &ChannelPair,
    delta_tau: f64,
    processor: &Processor,
) -> Result<(f64, f64)> {
    let probe = AoaCommand::from_ratio(pair.ch1.theta, 1.0, delta_tau);
    let (m1, m2) = measure_pair(pair, &probe, false, processor)?.magnitudes;
    if !(m1 > 0.0) {
        return Err(Error::ZeroPower(0));
    }
    if !(m2 > 0.0) {
        return Err(Error::ZeroPower(1));
    }
    let top = m1.max(m2);
    Ok((top / m1, top / m2))
}

/// Angle error of the full pipeline for one offset.
pub fn angle_error_at(
    pair: &ChannelPair,
    offset: f64,
    probe: f64,
    gains: (f64, f64),
    equalize: bool,
    processor: &Processor,
) -> Result<f64> {
    let cmd = AoaCommand {
        alpha_set: probe,
        ratio: gains.0 / gains.1,
        a1: gains.0,
        a2: gains.1,
        delta_tau: offset,
    };
    let m = measure_pair(pair, &cmd, equalize, processor)?;
    Ok(m.detection.angle.angle - probe)
}

/// Delay offset that turns the pair's relative phase by one cycle, s.
pub fn phase_period(processor: &Processor) -> f64 {
    2.0 * std::f64::consts::PI / delay_phase_slope(&processor.rts, &processor.radar)
}

fn sweep_offsets(
    pair: &ChannelPair,
    offsets: Vec<f64>,
    step: f64,
    probe: f64,
    gains: (f64, f64),
    equalize: bool,
    processor: &Processor,
) -> Result<SweepResult> {
    let angle_errors = offsets
        .par_iter()
        .map(|&o| angle_error_at(pair, o, probe, gains, equalize, processor))
        .collect::<Result<Vec<f64>>>()?;
    // prefer the period around zero range separation; a channel pushed
    // towards the next cell can produce spurious minima
    let half = phase_period(processor) / 2.0 * (1.0 + 1e-9);
    let base = pair.ch2.total_delay() - pair.ch1.total_delay();
    let near: Vec<usize> = (0..offsets.len())
        .filter(|&i| (base + offsets[i]).abs() <= half)
        .collect();
    let argmin = |c: &[usize]| {
        c.iter().copied().fold(c[0], |b, i| {
            if angle_errors[i].abs() < angle_errors[b].abs() {
                i
            } else {
                b
            }
        })
    };
    let all: Vec<usize> = (0..offsets.len()).collect();
    let best = match (near.first(), near.last()) {
        (Some(&lo), Some(&hi)) => {
            let b = argmin(&near);
            // a minimum on the gate edge means the coherent point lies outside it
            let clipped = (b == lo && lo > 0) || (b == hi && hi + 1 < offsets.len());
            if clipped {
                argmin(&all)
            } else {
                b
            }
        }
        _ => argmin(&all),
    };
    Ok(SweepResult {
        best_offset: offsets[best],
        best_error: angle_errors[best],
        period_estimate: period_estimate(&offsets, &angle_errors),
        offsets,
        angle_errors,
        step,
        probe,
        gains,
        equalize,
    })
}

/// Sweeps the delay of `ch2` (relative to its configured value) over the
/// spec and records the steered angle error at each point.
pub fn coherency_sweep(
    pair: &ChannelPair,
    spec: &SweepSpec,
    processor: &Processor,
) -> Result<SweepResult> {
    spec.validate(phase_period(processor))?;
    let (probe, gains) = probe_and_gains(pair, spec, processor)?;
    sweep_offsets(
        pair,
        spec.offsets(),
        spec.step,
        probe,
        gains,
        spec.equalize,
        processor,
    )
}

/// Re-sweeps `±2` previous steps around the best offset with the step
/// divided by `shrink`. The previous best offset is part of the new grid.
pub fn refine_sweep(
    prev: &SweepResult,
    shrink: u32,
    pair: &ChannelPair,
    processor: &Processor,
) -> Result<SweepResult> {
    if shrink < 2 {
        return Err(Error::InvalidSweep(format!(
            "shrink factor must be at least 2, got {shrink}"
        )));
    }
    let step = prev.step / shrink as f64;
    let floor = processor.rts.delay_step.unwrap_or(1e-15);
    if step < floor {
        return Err(Error::InvalidSweep(format!(
            "refined step {:.3e} s is below the delay resolution {:.3e} s",
            step, floor
        )));
    }
    let half = 2 * shrink as i64;
    let offsets = (-half..=half)
        .map(|k| prev.best_offset + k as f64 * step)
        .collect();
    let mut out = sweep_offsets(
        pair,
        offsets,
        step,
        prev.probe,
        prev.gains,
        prev.equalize,
        processor,
    )?;
    // a tie with the previous best keeps it
    if out.best_error.abs() >= prev.best_error.abs() {
        out.best_offset = prev.best_offset;
        out.best_error = prev.best_error;
    }
    Ok(out)
}

/// Moves the best offset by whole phase periods so the two channels land as
/// close in range as possible, then re-sweeps a few percent of a period
/// around it at the previous step. Returns `prev` unchanged when no move
/// is needed.
pub fn nearest_coherent(
    prev: &SweepResult,
    pair: &ChannelPair,
    processor: &Processor,
) -> Result<SweepResult> {
    let period = phase_period(processor);
    let separation = pair.ch2.total_delay() - pair.ch1.total_delay() + prev.best_offset;
    let k = (separation / period).round();
    if k == 0.0 {
        return Ok(prev.clone());
    }
    let centre = prev.best_offset - k * period;
    let half = ((0.02 * period / prev.step).ceil() as i64).max(2);
    let offsets = (-half..=half)
        .map(|i| centre + i as f64 * prev.step)
        .collect();
    sweep_offsets(
        pair,
        offsets,
        prev.step,
        prev.probe,
        prev.gains,
        prev.equalize,
        processor,
    )
}

/// Spacing of the two largest local maxima of `|α_ε|`, each interior one
/// refined by a parabola through its neighbours. An end point counts as a
/// maximum when it is not below its neighbour and reaches
/// [`END_PEAK_FRACTION`] of the interior maximum; a truncated slope does
/// not. Without two maxima the two deepest interior minima are used.
pub fn period_estimate(offsets: &[f64], errors: &[f64]) -> Option<f64> {
    let n = errors.len();
    if n < 3 {
        return None;
    }
    let a: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    let refined = |i: usize| {
        let step = offsets[i + 1] - offsets[i];
        offsets[i] + parabolic_offset(a[i - 1], a[i], a[i + 1]) * step
    };
    let spacing = |mut ext: Vec<(f64, f64)>| {
        ext.sort_by(|x, y| x.0.total_cmp(&y.0));
        (ext.len() >= 2).then(|| (ext[0].1 - ext[1].1).abs())
    };
    let is_peak = |l: f64, c: f64, r: f64| c >= l && c > r || c > l && c >= r;

    let mut maxima = (1..n - 1)
        .filter(|&i| is_peak(a[i - 1], a[i], a[i + 1]))
        .map(|i| (-a[i], refined(i)))
        .collect::<Vec<_>>();
    let top = maxima.iter().map(|m| -m.0).fold(0.0, f64::max);
    for (i, j) in [(0, 1), (n - 1, n - 2)] {
        if a[i] >= a[j] && a[i] >= END_PEAK_FRACTION * top {
            maxima.push((-a[i], offsets[i]));
        }
    }
    if maxima.len() >= 2 {
        return spacing(maxima);
    }
    let minima = (1..n - 1)
        .filter(|&i| is_peak(-a[i - 1], -a[i], -a[i + 1]))
        .map(|i| (a[i], refined(i)))
        .collect::<Vec<_>>();
    spacing(minima)
}

/// Coarse sweep followed by `iterations` refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub aligned: ChannelPair,
    pub coarse: SweepResult,
    pub refined: Vec<SweepResult>,
}

impl Calibration {
    pub fn best_offset(&self) -> f64 {
        self.refined.last().unwrap_or(&self.coarse).best_offset
    }

    pub fn best_error(&self) -> f64 {
        self.refined.last().unwrap_or(&self.coarse).best_error
    }

    /// The aligned pair with the calibrated offset folded into `ch2`.
    pub fn calibrated_pair(&self) -> ChannelPair {
        let mut p = self.aligned.clone();
        p.ch2.delay += self.best_offset();
        p
    }
}

/// Aligns, sweeps, refines `iterations` times and finally moves to the
/// coherent offset nearest in range, which adds one more entry to
/// `refined` when it changes the offset.
pub fn calibrate(
    pair: &ChannelPair,
    spec: &SweepSpec,
    iterations: usize,
    shrink: u32,
    processor: &Processor,
) -> Result<Calibration> {
    let aligned = align_range_bins(pair)?;
    let coarse = coherency_sweep(&aligned, spec, processor)?;
    let mut refined: Vec<SweepResult> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let next = refine_sweep(
            refined.last().unwrap_or(&coarse),
            shrink,
            &aligned,
            processor,
        )?;
        refined.push(next);
    }
    let last = refined.last().unwrap_or(&coarse);
    let nearest = nearest_coherent(last, &aligned, processor)?;
    if nearest.best_offset != last.best_offset {
        refined.push(nearest);
    }
    Ok(Calibration {
        aligned,
        coarse,
        refined,
    })
}

/// Gain corrections equalizing each channel's single-channel beamformed
/// peak magnitude to the strongest channel's.
pub fn amplitude_cal(channels: &[FrontEndChannel], processor: &Processor) -> Result<Vec<f64>> {
    let mags = channels
        .par_iter()
        .enumerate()
        .map(|(i, ch)| {
            let mut solo = *ch;
            solo.active = true;
            match processor.estimate(&[solo]) {
                Ok(d) if d.angle.peak.magnitude > 0.0 => Ok(d.angle.peak.magnitude),
                Ok(_) | Err(Error::NoPeak) => Err(Error::ZeroPower(i)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if mags.is_empty() {
        return Ok(Vec::new());
    }
    let reference = mags.iter().cloned().fold(0.0, f64::max);
    Ok(mags.iter().map(|m| reference / m).collect())
}
