//! Scenario files and the experiments run from them.

mod config;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::*;
pub use output::*;

use crate::aoa::{
    check_constraints, command, AoaCommand, ChannelPair, ConstraintReport, PatternKernel,
};
use crate::beamform::AngleGrid;
use crate::calibration::{
    align_range_bins, coherency_sweep, measure_pair, nearest_coherent, refine_sweep, SweepResult,
};
use crate::cube::{add_noise, synthesize_beat, write_dump, BeatCube};
use crate::error::{Error, Result};
use crate::model::{target_to_rts_params, FrontEndChannel, TargetSpec, BUFFER_DELAY_STEP, C0};
use crate::pipeline::{Detection, Processor};
use crate::spectrum::{range_dft, RangeDopplerMap};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub refine: Option<bool>,
    pub quantize_delay: bool,
}

impl Scenario {
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            if let Some(n) = self.noise.as_mut() {
                n.seed = seed;
            }
        }
        if let Some(grid) = o.grid {
            AngleGrid::new(grid)?;
            self.processing.grid = grid;
        }
        if let Some(refine) = o.refine {
            self.processing.refine = refine;
        }
        if o.quantize_delay {
            self.rts.delay_step = Some(BUFFER_DELAY_STEP);
        }
        Ok(())
    }

    pub fn processor(&self) -> Processor {
        let mut p = Processor::new(
            self.radar.clone(),
            self.rts.clone(),
            AngleGrid {
                len: self.processing.grid,
            },
        )
        .with_refine(self.processing.refine)
        .with_noise(self.noise);
        p.range_pad = self.processing.range_pad;
        p
    }

    /// Noise-free processor with the calibration frame length.
    pub fn calibration_processor(&self) -> Processor {
        self.processor()
            .with_noise(None)
            .with_chirps(self.calibration.chirps_per_frame)
    }

    /// The pair's channels rendering `target`, before any calibration.
    pub fn pair_for(
        &self,
        (a, b): (usize, usize),
        target: &TargetSpec,
        id: Option<usize>,
    ) -> Result<ChannelPair> {
        let render = |i: usize| -> Result<FrontEndChannel> {
            let fe = &self.front_ends[i];
            let params = target_to_rts_params(target, &self.radar, fe.distance)?;
            let mut ch = fe.channel().rendering(&params);
            ch.gain *= fe.gain;
            ch.target = id;
            Ok(ch)
        };
        ChannelPair::new(render(a)?, render(b)?)
    }
}

/// Calibration of one front-end pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCalibration {
    /// Indices into the sorted front-end list.
    pub pair: (usize, usize),
    pub coarse: SweepResult,
    pub refined: Vec<SweepResult>,
    /// Delay added to the second channel on top of its target delay:
    /// range alignment plus the best sweep offset, s.
    pub delay_adjust: f64,
}

impl PairCalibration {
    pub fn best(&self) -> &SweepResult {
        self.refined.last().unwrap_or(&self.coarse)
    }

    /// Pair with the calibrated delay adjustment applied.
    pub fn apply(&self, pair: &ChannelPair) -> ChannelPair {
        let mut p = pair.clone();
        p.ch2.delay += self.delay_adjust;
        p
    }
}

/// Aligns, sweeps and refines one pair at the calibration target range.
pub fn calibrate_pair(scenario: &Scenario, pair: (usize, usize)) -> Result<PairCalibration> {
    let processor = scenario.calibration_processor();
    let c = &scenario.calibration;
    let probe = c
        .probe_deg
        .map(f64::to_radians)
        .unwrap_or((scenario.front_ends[pair.0].angle + scenario.front_ends[pair.1].angle) / 2.0);
    let target = TargetSpec::new(c.range_m, 0.0, 1.0, probe);
    let raw = scenario.pair_for(pair, &target, None)?;
    let aligned = align_range_bins(&raw)?;
    let coarse = coherency_sweep(&aligned, &scenario.sweep_spec(), &processor)?;
    let floor = processor.rts.delay_step.unwrap_or(0.0);
    let mut refined: Vec<SweepResult> = Vec::new();
    for _ in 0..c.iterations {
        let prev = refined.last().unwrap_or(&coarse);
        // a quantized simulator cannot resolve finer steps
        if prev.step / f64::from(c.shrink) < floor {
            break;
        }
        refined.push(refine_sweep(prev, c.shrink, &aligned, &processor)?);
    }
    let last = refined.last().unwrap_or(&coarse);
    let nearest = nearest_coherent(last, &aligned, &processor)?;
    if nearest.best_offset != last.best_offset {
        refined.push(nearest);
    }
    let best = refined.last().unwrap_or(&coarse).best_offset;
    Ok(PairCalibration {
        pair,
        delay_adjust: aligned.ch2.delay - raw.ch2.delay + best,
        coarse,
        refined,
    })
}

/// Per-target outcome of a simulated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetReport {
    pub id: usize,
    pub target: TargetSpec,
    pub detection: Option<Detection>,
    pub range_error: f64,
    pub velocity_error: f64,
    pub angle_error: f64,
    pub command: Option<AoaCommand>,
    pub constraints: Option<ConstraintReport>,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub targets: Vec<TargetReport>,
    pub peaks: Vec<Detection>,
    pub calibrations: Vec<PairCalibration>,
    pub map: RangeDopplerMap,
    pub cube: BeatCube,
}

impl SimulationReport {
    pub fn flagged(&self) -> bool {
        self.targets.iter().any(|t| t.flagged)
    }
}

/// Channels of one frame and the commands used for steered targets.
#[derive(Debug, Clone)]
pub struct RenderedFrame {
    pub channels: Vec<FrontEndChannel>,
    pub commands: Vec<Option<(AoaCommand, ConstraintReport)>>,
    pub calibrations: Vec<PairCalibration>,
}

/// Calibrates the pairs in use and renders every target into channel
/// states. Steered targets get amplitude-corrected commanded gains.
pub fn render_frame(scenario: &Scenario) -> Result<RenderedFrame> {
    let calibrations = scenario
        .pairs_in_use()
        .into_iter()
        .map(|p| calibrate_pair(scenario, p))
        .collect::<Result<Vec<_>>>()?;
    let processor = scenario.processor().with_noise(None);
    let tol = scenario.tolerances.phase_deg.to_radians();
    let mut channels = Vec::new();
    let mut commands = Vec::new();
    for (id, t) in scenario.targets.iter().enumerate() {
        match t.assignment {
            Assignment::Single(i) => {
                let fe = &scenario.front_ends[i];
                let params = target_to_rts_params(&t.spec, &scenario.radar, fe.distance)?;
                let mut ch = fe.channel().rendering(&params).with_target(id);
                ch.gain *= fe.gain;
                channels.push(ch);
                commands.push(None);
            }
            Assignment::Pair(a, b) => {
                let cal = calibrations
                    .iter()
                    .find(|c| c.pair == (a, b))
                    .expect("every pair in use is calibrated");
                let pair = cal.apply(&scenario.pair_for((a, b), &t.spec, Some(id))?);
                let cmd = command(
                    &pair,
                    t.spec.angle,
                    PatternKernel::Array,
                    0.0,
                    &scenario.radar,
                )?;
                let cmd = if scenario.calibration.equalize && cmd.a1 > 0.0 && cmd.a2 > 0.0 {
                    // equalize in the cell the commanded pair will occupy
                    let (a1, a2) = measure_pair(&pair, &cmd, true, &processor)?.gains;
                    AoaCommand {
                        a1,
                        a2,
                        ratio: a1 / a2,
                        ..cmd
                    }
                } else {
                    cmd
                };
                let report = check_constraints(&pair, &scenario.radar, &scenario.rts, tol)?;
                channels.extend(pair.commanded(&cmd).into_iter().filter(|c| c.active));
                commands.push(Some((cmd, report)));
            }
        }
    }
    for e in &scenario.echoes {
        let fe = &scenario.front_ends[e.front_end];
        let params = target_to_rts_params(&e.spec, &scenario.radar, fe.distance)?;
        channels.push(fe.channel().rendering(&params));
    }
    Ok(RenderedFrame {
        channels,
        commands,
        calibrations,
    })
}

/// Beat cube of a frame; an empty frame is all zeros plus noise.
pub fn synthesize_frame(scenario: &Scenario, channels: &[FrontEndChannel]) -> Result<BeatCube> {
    if channels.iter().any(|c| c.active) {
        return synthesize_beat(channels, &scenario.radar, &scenario.rts, scenario.noise);
    }
    let r = &scenario.radar;
    let mut cube = BeatCube::zeros(
        r.samples_per_chirp,
        r.chirps_per_frame,
        r.virtual_elements(),
    );
    if let Some(n) = scenario.noise {
        add_noise(&mut cube, n);
    }
    Ok(cube)
}

/// Simulates one frame with all targets and evaluates each detection.
pub fn simulate(scenario: &Scenario) -> Result<SimulationReport> {
    let frame = render_frame(scenario)?;
    let processor = scenario.processor();
    let cube = synthesize_frame(scenario, &frame.channels)?;
    let map = processor.range_doppler(&cube)?;
    let power = map.power();
    let tol = &scenario.tolerances;
    let range_bin = scenario.radar.range_bin_width() / map.pad as f64;
    let velocity_bin = scenario.radar.doppler_to_velocity(map.doppler_per_bin);

    let mut targets = Vec::with_capacity(scenario.targets.len());
    for (id, t) in scenario.targets.iter().enumerate() {
        let expected_range = 2.0 * t.spec.range / (C0 * map.delay_per_bin);
        let doppler = 2.0 * scenario.radar.start_frequency * t.spec.velocity / C0;
        let expected_doppler = (map.doppler_bins() / 2) as f64 - doppler / map.doppler_per_bin;
        let detection = processor
            .strongest_near(
                &map,
                &power,
                expected_range,
                expected_doppler,
                scenario.processing.search_radius,
            )
            .ok();
        let (cmd, constraints) = match frame.commands[id] {
            Some((c, r)) => (Some(c), Some(r)),
            None => (None, None),
        };
        let (range_error, velocity_error, angle_error, mut flagged) = match &detection {
            Some(d) => {
                let re = d.range - t.spec.range;
                let ve = d.velocity - t.spec.velocity;
                let ae = d.angle.angle - t.spec.angle;
                let bad = re.abs() > tol.range_bins * range_bin
                    || ve.abs() > tol.doppler_bins * velocity_bin
                    || ae.to_degrees().abs() > tol.angle_deg;
                (re, ve, ae, bad)
            }
            None => (f64::NAN, f64::NAN, f64::NAN, true),
        };
        if let Some(r) = &constraints {
            flagged |= !r.ok();
        }
        targets.push(TargetReport {
            id,
            target: t.spec,
            detection,
            range_error,
            velocity_error,
            angle_error,
            command: cmd,
            constraints,
            flagged,
        });
    }
    let peaks = processor.peaks(
        &map,
        scenario.processing.threshold_db,
        scenario.processing.nms_radius,
    )?;
    Ok(SimulationReport {
        targets,
        peaks,
        calibrations: frame.calibrations,
        map,
        cube,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs `simulate` and writes its artifacts. Returns the report and the
/// files written.
pub fn run_scenario(
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<(SimulationReport, Vec<PathBuf>)> {
    std::fs::create_dir_all(out_dir)?;
    let report = simulate(scenario)?;
    let mut written = Vec::new();
    if scenario.outputs.rd_map {
        let mut w = create(out_dir, RD_MAP_CSV)?;
        write_rd_map(&report.map, &mut w)?;
        w.flush()?;
        written.push(out_dir.join(RD_MAP_CSV));
    }
    let mut w = create(out_dir, DETECTIONS_CSV)?;
    write_detections(&report.targets, &mut w)?;
    w.flush()?;
    written.push(out_dir.join(DETECTIONS_CSV));
    if scenario.outputs.peaks {
        let mut w = create(out_dir, PEAKS_CSV)?;
        write_peaks(&report.peaks, &mut w)?;
        w.flush()?;
        written.push(out_dir.join(PEAKS_CSV));
    }
    Ok((report, written))
}

/// One row of an angle linearity run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearityPoint {
    pub alpha_set: f64,
    pub alpha_meas: f64,
    /// Commanded gains before amplitude correction.
    pub gain1: f64,
    pub gain2: f64,
}

impl LinearityPoint {
    pub fn error(&self) -> f64 {
        self.alpha_meas - self.alpha_set
    }
}

#[derive(Debug, Clone)]
pub struct LinearityReport {
    pub calibration: PairCalibration,
    pub points: Vec<LinearityPoint>,
}

impl LinearityReport {
    pub fn max_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.error().abs())
            .fold(0.0, f64::max)
    }
}

/// Set-points `start, start + step, ...` up to `stop` inclusive, rad.
pub fn linearity_set_points(section: &LinearitySection) -> Vec<f64> {
    let n = ((section.stop_deg - section.start_deg) / section.step_deg + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| {
            (section.start_deg + i as f64 * section.step_deg)
                .min(section.stop_deg)
                .to_radians()
        })
        .collect()
}

/// Calibrates the configured pair, then steers it through every set-point.
pub fn linearity(scenario: &Scenario) -> Result<LinearityReport> {
    let section = scenario.linearity.as_ref().ok_or_else(|| Error::Scenario {
        path: "linearity".into(),
        message: "section missing".into(),
    })?;
    let pair_idx = (
        scenario
            .front_end_index(section.pair[0])
            .expect("validated"),
        scenario
            .front_end_index(section.pair[1])
            .expect("validated"),
    );
    let calibration = calibrate_pair(scenario, pair_idx)?;
    let processor = scenario.calibration_processor().with_noise(scenario.noise);
    let target = TargetSpec::new(scenario.calibration.range_m, 0.0, 1.0, 0.0);
    let pair = calibration.apply(&scenario.pair_for(pair_idx, &target, None)?);
    let points = linearity_set_points(section)
        .into_iter()
        .map(|alpha| {
            let cmd = command(&pair, alpha, PatternKernel::Array, 0.0, &scenario.radar)?;
            let m = measure_pair(&pair, &cmd, scenario.calibration.equalize, &processor)?;
            Ok(LinearityPoint {
                alpha_set: alpha,
                alpha_meas: m.detection.angle.angle,
                gain1: m.gains.0,
                gain2: m.gains.1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearityReport {
        calibration,
        points,
    })
}

pub fn run_linearity(
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<(LinearityReport, Vec<PathBuf>)> {
    std::fs::create_dir_all(out_dir)?;
    let report = linearity(scenario)?;
    let mut w = create(out_dir, LINEARITY_CSV)?;
    write_linearity(&report.points, &mut w)?;
    w.flush()?;
    Ok((report, vec![out_dir.join(LINEARITY_CSV)]))
}

/// Pair named in the calibration section, else the first pair in use, else
/// the first two front ends.
pub fn calibration_pair(scenario: &Scenario) -> Result<(usize, usize)> {
    if let Some([a, b]) = scenario.calibration.pair {
        return Ok((
            scenario.front_end_index(a).expect("validated"),
            scenario.front_end_index(b).expect("validated"),
        ));
    }
    if let Some(p) = scenario.pairs_in_use().first() {
        return Ok(*p);
    }
    if scenario.front_ends.len() >= 2 {
        return Ok((0, 1));
    }
    Err(Error::Scenario {
        path: "rts.front_ends".into(),
        message: "calibration needs at least two front ends".into(),
    })
}

pub fn run_calibration(
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<(PairCalibration, Vec<PathBuf>)> {
    std::fs::create_dir_all(out_dir)?;
    let cal = calibrate_pair(scenario, calibration_pair(scenario)?)?;
    let mut w = create(out_dir, CALIBRATION_CSV)?;
    cal.coarse.write_csv(&mut w)?;
    w.flush()?;
    let mut s = create(out_dir, CALIBRATION_SUMMARY)?;
    writeln!(s, "{}", calibration_summary(&cal))?;
    s.flush()?;
    Ok((
        cal,
        vec![
            out_dir.join(CALIBRATION_CSV),
            out_dir.join(CALIBRATION_SUMMARY),
        ],
    ))
}

/// Writes the simulated frame's beat cube and range spectrum.
pub fn dump_spectrum(scenario: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let frame = render_frame(scenario)?;
    let cube = synthesize_frame(scenario, &frame.channels)?;
    let spec = range_dft(&cube, &scenario.radar, scenario.processing.range_pad)?;
    let mut w = create(out_dir, BEAT_CUBE_BIN)?;
    write_dump(&cube, &mut w)?;
    w.flush()?;
    let mut w = create(out_dir, RANGE_SPECTRUM_BIN)?;
    write_dump(&spec.values, &mut w)?;
    w.flush()?;
    Ok(vec![
        out_dir.join(BEAT_CUBE_BIN),
        out_dir.join(RANGE_SPECTRUM_BIN),
    ])
}
