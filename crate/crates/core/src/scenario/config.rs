//! JSON scenario schema. Field names carry their units.

use std::path::Path;

use serde::Deserialize;

use crate::beamform::{AngleGrid, DEFAULT_GRID};
use crate::calibration::SweepSpec;
use crate::cube::NoiseSpec;
use crate::error::{Error, Result};
use crate::model::{
    ApertureConvention, FieldModel, FrontEndChannel, RadarConfig, RtsConfig, TargetSpec, C0,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub start_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub chirp_period_s: f64,
    /// Either the sample rate or the number of samples per chirp.
    pub sample_rate_hz: Option<f64>,
    pub samples_per_chirp: Option<usize>,
    pub chirps_per_frame: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub element_spacing_m: Option<f64>,
    #[serde(default)]
    pub aperture: ApertureConvention,
    #[serde(default)]
    pub field_model: FieldModel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontEndSection {
    pub id: usize,
    pub angle_deg: f64,
    pub distance_m: f64,
    #[serde(default = "one")]
    pub gain: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtsSection {
    /// Give either the down-converted frequency or the LO frequency.
    pub intermediate_frequency_hz: Option<f64>,
    pub lo_frequency_hz: Option<f64>,
    pub delay_step_s: Option<f64>,
    pub front_ends: Vec<FrontEndSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    #[serde(default = "one")]
    pub rcs_m2: f64,
    pub angle_deg: f64,
    /// One front end, or two adjacent ones. Chosen from the angle if absent.
    pub front_ends: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSection {
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    #[serde(default = "one")]
    pub rcs_m2: f64,
    pub front_end: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default = "default_sweep_min")]
    pub min_s: f64,
    #[serde(default = "default_sweep_max")]
    pub max_s: f64,
    #[serde(default = "default_sweep_step")]
    pub step_s: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_shrink")]
    pub shrink: u32,
    /// Range of the calibration target.
    #[serde(default = "default_cal_range")]
    pub range_m: f64,
    #[serde(default = "default_cal_chirps")]
    pub chirps_per_frame: usize,
    pub probe_deg: Option<f64>,
    #[serde(default = "yes")]
    pub equalize: bool,
    /// Pair used by the `calibrate` command; the first pair in use otherwise.
    pub pair: Option<[usize; 2]>,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearitySection {
    pub pair: [usize; 2],
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub power: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessingSection {
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default = "default_pad")]
    pub range_pad: usize,
    /// Peak-list threshold below the frame maximum.
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    #[serde(default = "default_nms")]
    pub nms_radius: usize,
    /// Search radius around a target's expected cell.
    #[serde(default = "default_search")]
    pub search_radius: usize,
}

impl Default for ProcessingSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "one")]
    pub range_bins: f64,
    #[serde(default = "one")]
    pub doppler_bins: f64,
    #[serde(default = "default_angle_tol")]
    pub angle_deg: f64,
    #[serde(default = "default_phase_tol")]
    pub phase_deg: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "yes")]
    pub rd_map: bool,
    #[serde(default = "yes")]
    pub peaks: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Top-level file layout.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub radar: RadarSection,
    pub rts: RtsSection,
    #[serde(default)]
    pub targets: Vec<TargetSection>,
    #[serde(default)]
    pub extra_echoes: Vec<EchoSection>,
    #[serde(default)]
    pub calibration: CalibrationSection,
    pub linearity: Option<LinearitySection>,
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub processing: ProcessingSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_sweep_min() -> f64 {
    -0.5e-9
}
fn default_sweep_max() -> f64 {
    1e-9
}
fn default_sweep_step() -> f64 {
    25e-12
}
fn default_iterations() -> usize {
    2
}
fn default_shrink() -> u32 {
    5
}
fn default_cal_range() -> f64 {
    10.0
}
fn default_cal_chirps() -> usize {
    8
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_pad() -> usize {
    1
}
fn default_threshold() -> f64 {
    30.0
}
fn default_nms() -> usize {
    2
}
fn default_search() -> usize {
    2
}
fn default_angle_tol() -> f64 {
    0.5
}
fn default_phase_tol() -> f64 {
    5.0
}

/// How a target is rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    Single(usize),
    /// Indices into the sorted front-end list, adjacent, increasing angle.
    Pair(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEnd {
    pub id: usize,
    /// rad
    pub angle: f64,
    pub distance: f64,
    pub gain: f64,
}

impl FrontEnd {
    pub fn channel(&self) -> FrontEndChannel {
        FrontEndChannel::new(self.angle, self.distance)
            .with_front_end(self.id)
            .with_gain(self.gain)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTarget {
    pub spec: TargetSpec,
    pub assignment: Assignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Echo {
    pub spec: TargetSpec,
    /// Index into the sorted front-end list.
    pub front_end: usize,
}

/// Validated scenario in internal units (rad, s, Hz).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub radar: RadarConfig,
    pub rts: RtsConfig,
    /// Sorted by angle.
    pub front_ends: Vec<FrontEnd>,
    pub targets: Vec<ScenarioTarget>,
    pub echoes: Vec<Echo>,
    pub calibration: CalibrationSection,
    pub linearity: Option<LinearitySection>,
    pub noise: Option<NoiseSpec>,
    pub processing: ProcessingSection,
    pub tolerances: ToleranceSection,
    pub outputs: OutputSection,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        message: message.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Scenario {
                path: field,
                message,
            } => Error::Scenario {
                path: format!("{}: {field}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| invalid("<file>", e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let radar = build_radar(&file.radar)?;

        let r = &file.rts;
        let f_lo = match (r.intermediate_frequency_hz, r.lo_frequency_hz) {
            (Some(f), None) => {
                positive("rts.intermediate_frequency_hz", f)?;
                radar.start_frequency - f
            }
            (None, Some(f)) => {
                positive("rts.lo_frequency_hz", f)?;
                f
            }
            _ => {
                return Err(invalid(
                    "rts",
                    "give exactly one of intermediate_frequency_hz and lo_frequency_hz",
                ))
            }
        };
        if !(f_lo > 0.0 && f_lo < radar.start_frequency) {
            return Err(invalid(
                "rts",
                "LO frequency must lie in (0, start_frequency_hz)",
            ));
        }
        if let Some(step) = r.delay_step_s {
            positive("rts.delay_step_s", step)?;
        }
        let mut front_ends = Vec::with_capacity(r.front_ends.len());
        for (i, fe) in r.front_ends.iter().enumerate() {
            let p = format!("rts.front_ends[{i}]");
            if !(fe.angle_deg.abs() < 90.0) {
                return Err(invalid(format!("{p}.angle_deg"), "must lie in (-90, 90)"));
            }
            if !(fe.distance_m >= 0.0 && fe.distance_m.is_finite()) {
                return Err(invalid(format!("{p}.distance_m"), "must be non-negative"));
            }
            if !(fe.gain >= 0.0 && fe.gain.is_finite()) {
                return Err(invalid(format!("{p}.gain"), "must be non-negative"));
            }
            if front_ends.iter().any(|f: &FrontEnd| f.id == fe.id) {
                return Err(invalid(
                    format!("{p}.id"),
                    format!("duplicate id {}", fe.id),
                ));
            }
            front_ends.push(FrontEnd {
                id: fe.id,
                angle: fe.angle_deg.to_radians(),
                distance: fe.distance_m,
                gain: fe.gain,
            });
        }
        front_ends.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        if front_ends.windows(2).any(|w| w[1].angle <= w[0].angle) {
            return Err(invalid("rts.front_ends", "angles must be distinct"));
        }
        let rts = RtsConfig {
            lo_frequency: f_lo,
            delay_step: r.delay_step_s,
            channels: front_ends.iter().map(FrontEnd::channel).collect(),
        };

        let index_of = |id: usize, path: &str| -> Result<usize> {
            front_ends
                .iter()
                .position(|f| f.id == id)
                .ok_or_else(|| invalid(path, format!("unknown front end {id}")))
        };

        let mut targets = Vec::with_capacity(file.targets.len());
        for (i, t) in file.targets.iter().enumerate() {
            let p = format!("targets[{i}]");
            positive(&format!("{p}.range_m"), t.range_m)?;
            positive(&format!("{p}.rcs_m2"), t.rcs_m2)?;
            if !t.velocity_mps.is_finite() {
                return Err(invalid(format!("{p}.velocity_mps"), "must be finite"));
            }
            let angle = t.angle_deg.to_radians();
            let assignment = match &t.front_ends {
                Some(ids) => assign_explicit(ids, angle, &front_ends, &index_of, &p)?,
                None => assign_by_angle(angle, &front_ends).ok_or_else(|| {
                    invalid(
                        format!("{p}.angle_deg"),
                        "not covered by any front end or adjacent pair",
                    )
                })?,
            };
            let nearest = match assignment {
                Assignment::Single(a) => front_ends[a].distance,
                Assignment::Pair(a, b) => front_ends[a].distance.max(front_ends[b].distance),
            };
            if !(t.range_m > nearest) {
                return Err(invalid(
                    format!("{p}.range_m"),
                    format!("must exceed the front-end distance {nearest} m"),
                ));
            }
            targets.push(ScenarioTarget {
                spec: TargetSpec::new(t.range_m, t.velocity_mps, t.rcs_m2, angle),
                assignment,
            });
        }

        let mut echoes = Vec::with_capacity(file.extra_echoes.len());
        for (i, e) in file.extra_echoes.iter().enumerate() {
            let p = format!("extra_echoes[{i}]");
            positive(&format!("{p}.rcs_m2"), e.rcs_m2)?;
            let fe = index_of(e.front_end, &format!("{p}.front_end"))?;
            if !(e.range_m > front_ends[fe].distance) {
                return Err(invalid(
                    format!("{p}.range_m"),
                    "must exceed the front-end distance",
                ));
            }
            echoes.push(Echo {
                spec: TargetSpec::new(e.range_m, e.velocity_mps, e.rcs_m2, front_ends[fe].angle),
                front_end: fe,
            });
        }

        let c = &file.calibration;
        let sweep = SweepSpec::new(c.min_s, c.max_s, c.step_s);
        let period = 1.0 / (radar.start_frequency - f_lo + radar.bandwidth / 2.0);
        sweep
            .validate(period)
            .map_err(|e| invalid("calibration", e.to_string()))?;
        if c.chirps_per_frame < 2 {
            return Err(invalid(
                "calibration.chirps_per_frame",
                "must be at least 2",
            ));
        }
        positive("calibration.range_m", c.range_m)?;
        if let Some(pair) = c.pair {
            check_pair(pair, &front_ends, &index_of, "calibration.pair")?;
        }
        if let Some(l) = &file.linearity {
            check_pair(l.pair, &front_ends, &index_of, "linearity.pair")?;
            positive("linearity.step_deg", l.step_deg)?;
            if !(l.stop_deg >= l.start_deg) {
                return Err(invalid("linearity.stop_deg", "must not be below start_deg"));
            }
        }

        let noise = match file.noise {
            Some(n) => {
                if !(n.power >= 0.0 && n.power.is_finite()) {
                    return Err(invalid("noise.power", "must be non-negative"));
                }
                Some(NoiseSpec {
                    power: n.power,
                    seed: n.seed,
                })
            }
            None => None,
        };

        let proc_ = &file.processing;
        AngleGrid::new(proc_.grid).map_err(|e| invalid("processing.grid", e.to_string()))?;
        if proc_.range_pad < 1 {
            return Err(invalid("processing.range_pad", "must be at least 1"));
        }
        positive("processing.threshold_db", proc_.threshold_db)?;
        let tol = &file.tolerances;
        positive("tolerances.range_bins", tol.range_bins)?;
        positive("tolerances.doppler_bins", tol.doppler_bins)?;
        positive("tolerances.angle_deg", tol.angle_deg)?;
        positive("tolerances.phase_deg", tol.phase_deg)?;

        Ok(Self {
            radar,
            rts,
            front_ends,
            targets,
            echoes,
            calibration: file.calibration,
            linearity: file.linearity,
            noise,
            processing: file.processing,
            tolerances: file.tolerances,
            outputs: file.outputs,
        })
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let c = &self.calibration;
        // steps finer than the delay quantizer only repeat points
        let step = c.step_s.max(self.rts.delay_step.unwrap_or(0.0));
        let mut spec = SweepSpec::new(c.min_s, c.max_s, step).with_equalize(c.equalize);
        if let Some(p) = c.probe_deg {
            spec = spec.with_probe(p.to_radians());
        }
        spec
    }

    /// Index into `front_ends` of a front-end id.
    pub fn front_end_index(&self, id: usize) -> Option<usize> {
        self.front_ends.iter().position(|f| f.id == id)
    }

    /// Pairs used by targets, in first-use order.
    pub fn pairs_in_use(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for t in &self.targets {
            if let Assignment::Pair(a, b) = t.assignment {
                if !out.contains(&(a, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// One-way range at which a target reaches a given total delay.
    pub fn range_for_delay(delay: f64) -> f64 {
        delay * C0 / 2.0
    }
}

fn build_radar(r: &RadarSection) -> Result<RadarConfig> {
    positive("radar.start_frequency_hz", r.start_frequency_hz)?;
    positive("radar.bandwidth_hz", r.bandwidth_hz)?;
    positive("radar.chirp_period_s", r.chirp_period_s)?;
    let sample_rate = match (r.sample_rate_hz, r.samples_per_chirp) {
        (Some(fs), None) => {
            positive("radar.sample_rate_hz", fs)?;
            fs
        }
        (None, Some(n)) if n > 0 => n as f64 / r.chirp_period_s,
        (None, Some(_)) => return Err(invalid("radar.samples_per_chirp", "must be positive")),
        _ => {
            return Err(invalid(
                "radar",
                "give exactly one of sample_rate_hz and samples_per_chirp",
            ))
        }
    };
    if r.tx_antennas == 0 {
        return Err(invalid("radar.tx_antennas", "must be positive"));
    }
    if r.rx_antennas == 0 {
        return Err(invalid("radar.rx_antennas", "must be positive"));
    }
    if r.chirps_per_frame < 2 {
        return Err(invalid("radar.chirps_per_frame", "must be at least 2"));
    }
    let mut radar = RadarConfig::new(
        r.start_frequency_hz,
        r.bandwidth_hz,
        r.chirp_period_s,
        sample_rate,
        r.chirps_per_frame,
        r.tx_antennas,
        r.rx_antennas,
    )
    .map_err(|e| invalid("radar", e.to_string()))?
    .with_aperture(r.aperture)
    .with_field_model(r.field_model);
    if let Some(n) = r.samples_per_chirp {
        radar.samples_per_chirp = n;
    }
    if let Some(d) = r.element_spacing_m {
        positive("radar.element_spacing_m", d)?;
        radar = radar.with_element_spacing(d);
    }
    Ok(radar)
}

fn assign_by_angle(angle: f64, front_ends: &[FrontEnd]) -> Option<Assignment> {
    let tol = 1e-9;
    if let Some(i) = front_ends
        .iter()
        .position(|f| (f.angle - angle).abs() <= tol)
    {
        return Some(Assignment::Single(i));
    }
    front_ends
        .windows(2)
        .position(|w| w[0].angle < angle && angle < w[1].angle)
        .map(|i| Assignment::Pair(i, i + 1))
}

fn assign_explicit(
    ids: &[usize],
    angle: f64,
    front_ends: &[FrontEnd],
    index_of: &dyn Fn(usize, &str) -> Result<usize>,
    p: &str,
) -> Result<Assignment> {
    match ids {
        [id] => {
            let i = index_of(*id, &format!("{p}.front_ends[0]"))?;
            if (front_ends[i].angle - angle).abs() > 1e-9 {
                return Err(invalid(
                    format!("{p}.angle_deg"),
                    format!(
                        "a single front end renders only its own angle {:.4} deg",
                        front_ends[i].angle.to_degrees()
                    ),
                ));
            }
            Ok(Assignment::Single(i))
        }
        [a, b] => {
            let (i, j) = (
                index_of(*a, &format!("{p}.front_ends[0]"))?,
                index_of(*b, &format!("{p}.front_ends[1]"))?,
            );
            let (lo, hi) = (i.min(j), i.max(j));
            if hi != lo + 1 {
                return Err(invalid(
                    format!("{p}.front_ends"),
                    "pair must be adjacent in angle",
                ));
            }
            let (s, s1, s2) = (
                angle.sin(),
                front_ends[lo].angle.sin(),
                front_ends[hi].angle.sin(),
            );
            if !(s >= s1 && s <= s2) {
                return Err(invalid(
                    format!("{p}.angle_deg"),
                    "outside the pair's interval",
                ));
            }
            Ok(Assignment::Pair(lo, hi))
        }
        _ => Err(invalid(
            format!("{p}.front_ends"),
            "list one or two front ends",
        )),
    }
}

fn check_pair(
    pair: [usize; 2],
    front_ends: &[FrontEnd],
    index_of: &dyn Fn(usize, &str) -> Result<usize>,
    path: &str,
) -> Result<(usize, usize)> {
    let i = index_of(pair[0], path)?;
    let j = index_of(pair[1], path)?;
    if !(j == i + 1) {
        return Err(invalid(
            path,
            "pair must be two adjacent front ends in increasing angle",
        ));
    }
    let _ = front_ends;
    Ok((i, j))
}
