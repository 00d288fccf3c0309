//! Shared physical parameters: the radar under test, the target simulator,
//! its front-end channels and the virtual targets they synthesize.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// How the virtual-array aperture is measured when evaluating the
/// `1.22 λ / d_A` resolution limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureConvention {
    /// `d_A = (N_A - 1) d`, the physical extent between outer elements.
    #[default]
    OuterElements,
    /// `d_A = N_A d`, each element owning one spacing cell.
    FullCells,
}

/// Geometry used for the per-element return delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    /// Plane wave: delay is affine in the element index.
    #[default]
    FarField,
    /// Exact Euclidean distance from the front end to every element.
    NearField,
}

/// FMCW waveform and MIMO array of the radar under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Lower bound of the chirp, Hz.
    pub start_frequency: f64,
    pub bandwidth: f64,
    /// Chirp period, s.
    pub chirp_period: f64,
    pub sample_rate: f64,
    pub samples_per_chirp: usize,
    pub chirps_per_frame: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    /// Virtual-array element spacing, m.
    pub element_spacing: f64,
    pub aperture: ApertureConvention,
    pub field_model: FieldModel,
}

impl RadarConfig {
    /// Builds a configuration that samples the full chirp
    /// (`N_s = round(T f_s)`) with half-wavelength element spacing at the
    /// start frequency.
    pub fn new(
        start_frequency: f64,
        bandwidth: f64,
        chirp_period: f64,
        sample_rate: f64,
        chirps_per_frame: usize,
        tx_antennas: usize,
        rx_antennas: usize,
    ) -> Result<Self> {
        let cfg = Self {
            start_frequency,
            bandwidth,
            chirp_period,
            sample_rate,
            samples_per_chirp: (chirp_period * sample_rate).round() as usize,
            chirps_per_frame,
            tx_antennas,
            rx_antennas,
            element_spacing: C0 / start_frequency / 2.0,
            aperture: ApertureConvention::default(),
            field_model: FieldModel::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_element_spacing(mut self, spacing: f64) -> Self {
        self.element_spacing = spacing;
        self
    }

    pub fn with_aperture(mut self, aperture: ApertureConvention) -> Self {
        self.aperture = aperture;
        self
    }

    pub fn with_field_model(mut self, field_model: FieldModel) -> Self {
        self.field_model = field_model;
        self
    }

    pub fn with_chirps(mut self, chirps: usize) -> Self {
        self.chirps_per_frame = chirps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("start_frequency", self.start_frequency),
            ("bandwidth", self.bandwidth),
            ("chirp_period", self.chirp_period),
            ("sample_rate", self.sample_rate),
            ("element_spacing", self.element_spacing),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let expected = (self.chirp_period * self.sample_rate).round() as usize;
        if self.samples_per_chirp != expected || expected == 0 {
            return Err(Error::InvalidConfig(format!(
                "samples_per_chirp {} must equal round(T * f_s) = {expected}",
                self.samples_per_chirp
            )));
        }
        if self.chirps_per_frame == 0 || self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::InvalidConfig(
                "chirp and antenna counts must be non-zero".into(),
            ));
        }
        Ok(())
    }

    /// Wavelength at the start frequency.
    pub fn wavelength(&self) -> f64 {
        C0 / self.start_frequency
    }

    /// Chirp slope B/T, Hz/s.
    pub fn slope(&self) -> f64 {
        self.bandwidth / self.chirp_period
    }

    /// Mid-chirp frequency `f_c + B/2`; the effective carrier of a
    /// range-compressed return.
    pub fn center_frequency(&self) -> f64 {
        self.start_frequency + self.bandwidth / 2.0
    }

    pub fn virtual_elements(&self) -> usize {
        self.tx_antennas * self.rx_antennas
    }

    /// True unless the spacing is half a wavelength at the start frequency.
    pub fn nonstandard_spacing(&self) -> bool {
        (self.element_spacing / (self.wavelength() / 2.0) - 1.0).abs() > 1e-9
    }

    /// Phase advance between adjacent virtual elements per unit `sin(θ)`
    /// for a range-compressed return: `2π d (f_c + B/2) / c0`.
    /// Equals π for half-wavelength spacing at the mid-chirp frequency.
    pub fn steering_coefficient(&self) -> f64 {
        2.0 * PI * self.element_spacing * self.center_frequency() / C0
    }

    /// Range covered by one un-padded range bin, m.
    pub fn range_bin_width(&self) -> f64 {
        // one bin = f_s / N_s in beat frequency = T f_s / (N_s B) in delay
        C0 / (2.0 * self.bandwidth) * self.chirp_period * self.sample_rate
            / self.samples_per_chirp as f64
    }

    /// Doppler resolution of one slow-time bin, Hz.
    pub fn doppler_bin_width(&self) -> f64 {
        1.0 / (self.chirps_per_frame as f64 * self.chirp_period)
    }

    pub fn doppler_to_velocity(&self, doppler: f64) -> f64 {
        doppler * C0 / (2.0 * self.start_frequency)
    }
}

/// One Rx/Tx front-end pair of the target simulator together with the
/// target state it currently applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontEndChannel {
    /// Azimuth position relative to the radar boresight, rad.
    pub theta: f64,
    /// Path length radar to front end, m.
    pub path_length: f64,
    /// Simulated delay, s.
    pub delay: f64,
    /// Simulated Doppler shift, Hz.
    pub doppler: f64,
    /// Linear amplitude factor.
    pub gain: f64,
    pub active: bool,
    /// Index of the physical front end.
    pub front_end: usize,
    /// Index of the target this channel state renders, if any.
    pub target: Option<usize>,
}

impl FrontEndChannel {
    /// An idle channel at the given position (zero delay, unit gain).
    pub fn new(theta: f64, path_length: f64) -> Self {
        Self {
            theta,
            path_length,
            delay: 0.0,
            doppler: 0.0,
            gain: 1.0,
            active: true,
            front_end: 0,
            target: None,
        }
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_doppler(mut self, doppler: f64) -> Self {
        self.doppler = doppler;
        self
    }

    pub fn with_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }

    pub fn with_front_end(mut self, id: usize) -> Self {
        self.front_end = id;
        self
    }

    pub fn with_target(mut self, id: usize) -> Self {
        self.target = Some(id);
        self
    }

    /// Applies a target's mapped parameters to this channel.
    pub fn rendering(mut self, params: &RtsParams) -> Self {
        self.delay = params.delay;
        self.doppler = params.doppler;
        self.gain = params.amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delay >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "channel delay {} < 0",
                self.delay
            )));
        }
        if !(self.gain >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "channel gain {} < 0",
                self.gain
            )));
        }
        if !(self.theta.abs() < PI / 2.0) {
            return Err(Error::InvalidConfig(format!(
                "channel angle {} rad outside (-pi/2, pi/2)",
                self.theta
            )));
        }
        if !(self.path_length >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "channel path length {} < 0",
                self.path_length
            )));
        }
        Ok(())
    }

    /// Total round-trip delay seen by the radar at the array reference.
    pub fn total_delay(&self) -> f64 {
        2.0 * self.path_length / C0 + self.delay
    }
}

/// Target simulator back end: local oscillator and front-end ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtsConfig {
    pub lo_frequency: f64,
    /// Step of the optional sample-buffer delay quantizer, s.
    pub delay_step: Option<f64>,
    pub channels: Vec<FrontEndChannel>,
}

/// Delay granularity of plain sample buffering at 4 GS/s.
pub const BUFFER_DELAY_STEP: f64 = 0.25e-9;

impl RtsConfig {
    pub fn new(lo_frequency: f64, channels: Vec<FrontEndChannel>) -> Result<Self> {
        let cfg = Self {
            lo_frequency,
            delay_step: None,
            channels,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration whose intermediate frequency is `f_rts` for the given radar.
    pub fn with_intermediate(radar: &RadarConfig, f_rts: f64) -> Self {
        Self {
            lo_frequency: radar.start_frequency - f_rts,
            delay_step: None,
            channels: Vec::new(),
        }
    }

    pub fn quantized(mut self, step: f64) -> Self {
        self.delay_step = Some(step);
        self
    }

    /// Down-converted lower bound frequency `f_c - f_lo` for the given radar.
    pub fn intermediate_frequency(&self, radar: &RadarConfig) -> f64 {
        radar.start_frequency - self.lo_frequency
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo_frequency.is_finite() && self.lo_frequency > 0.0) {
            return Err(Error::InvalidConfig("lo_frequency must be positive".into()));
        }
        if let Some(step) = self.delay_step {
            if !(step > 0.0) {
                return Err(Error::InvalidConfig("delay_step must be positive".into()));
            }
        }
        for ch in &self.channels {
            ch.validate()?;
        }
        if self.channels.windows(2).any(|w| w[1].theta <= w[0].theta) {
            return Err(Error::InvalidConfig(
                "front-end angles must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Applies the optional buffer quantizer to a requested delay.
    pub fn quantize(&self, delay: f64) -> f64 {
        match self.delay_step {
            Some(step) => (delay / step).round() * step,
            None => delay,
        }
    }
}

/// A virtual radar target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub range: f64,
    /// Radial velocity, m/s; positive values raise the echo frequency.
    pub velocity: f64,
    /// Radar cross section, m².
    pub rcs: f64,
    /// Desired angle of arrival, rad.
    pub angle: f64,
}

impl TargetSpec {
    pub fn new(range: f64, velocity: f64, rcs: f64, angle: f64) -> Self {
        Self {
            range,
            velocity,
            rcs,
            angle,
        }
    }
}

/// Channel settings realizing one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtsParams {
    pub delay: f64,
    pub doppler: f64,
    pub amplitude: f64,
}

/// Maps a target onto simulator delay, Doppler shift and amplitude.
///
/// The physical loop through the front end at `path_length` already
/// contributes `2 R_c / c0`, so only the remaining range is simulated.
pub fn target_to_rts_params(
    target: &TargetSpec,
    cfg: &RadarConfig,
    path_length: f64,
) -> Result<RtsParams> {
    if !(target.rcs > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "rcs must be positive, got {}",
            target.rcs
        )));
    }
    if !(target.range > path_length) {
        return Err(Error::TargetTooClose {
            range_m: target.range,
            path_m: path_length,
        });
    }
    Ok(RtsParams {
        delay: 2.0 * (target.range - path_length) / C0,
        doppler: 2.0 * cfg.start_frequency * target.velocity / C0,
        amplitude: target.rcs.sqrt() / (target.range * target.range),
    })
}

/// Element indices `0..N_A` of the virtual array, spaced by `d`.
pub fn virtual_array(cfg: &RadarConfig) -> Vec<usize> {
    (0..cfg.virtual_elements()).collect()
}

/// Rayleigh-type angular resolution `1.22 λ / d_A`, rad.
pub fn angular_resolution(cfg: &RadarConfig) -> Result<f64> {
    let n = cfg.virtual_elements();
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    let aperture = match cfg.aperture {
        ApertureConvention::OuterElements => (n - 1) as f64 * cfg.element_spacing,
        ApertureConvention::FullCells => n as f64 * cfg.element_spacing,
    };
    Ok(1.22 * cfg.wavelength() / aperture)
}
