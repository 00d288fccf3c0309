//! Steering a virtual target between two front ends by superposing their
//! returns with a commanded amplitude ratio.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beamform::{AngleGrid, AngleSpectrum};
use crate::error::{Error, Result};
use crate::model::{angular_resolution, FrontEndChannel, RadarConfig, RtsConfig, C0};

/// Set-points closer than this to an endpoint (in `sin α`) collapse to a
/// single-channel command.
pub const EPS_SIN: f64 = 1e-6;

/// Default coherency tolerance, rad.
pub const DEFAULT_PHASE_TOLERANCE: f64 = 5.0 * PI / 180.0;

/// Two adjacent front ends, `ch1.theta < ch2.theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub ch1: FrontEndChannel,
    pub ch2: FrontEndChannel,
}

impl ChannelPair {
    pub fn new(ch1: FrontEndChannel, ch2: FrontEndChannel) -> Result<Self> {
        ch1.validate()?;
        ch2.validate()?;
        if !(ch1.theta < ch2.theta) {
            return Err(Error::InvalidConfig(format!(
                "pair angles must be increasing, got {:.4} and {:.4} deg",
                ch1.theta.to_degrees(),
                ch2.theta.to_degrees()
            )));
        }
        Ok(Self { ch1, ch2 })
    }

    /// `(φ_A,1, φ_A,2)`.
    pub fn phases(&self, cfg: &RadarConfig, rts: &RtsConfig) -> (f64, f64) {
        (
            composite_phase(&self.ch1, cfg, rts),
            composite_phase(&self.ch2, cfg, rts),
        )
    }

    /// `φ_A,1 - φ_A,2` wrapped to `(-π, π]`.
    pub fn phase_difference(&self, cfg: &RadarConfig, rts: &RtsConfig) -> f64 {
        let (p1, p2) = self.phases(cfg, rts);
        wrap_phase(p1 - p2)
    }

    /// Delay to add to `ch2` so the predicted phase difference vanishes.
    pub fn coherent_offset(&self, cfg: &RadarConfig, rts: &RtsConfig) -> f64 {
        self.phase_difference(cfg, rts) / delay_phase_slope(rts, cfg)
    }

    /// Both channels with the command applied: gains scaled by `a1`, `a2`
    /// and the coherency offset added to `ch2`'s delay.
    pub fn commanded(&self, cmd: &AoaCommand) -> [FrontEndChannel; 2] {
        let mut c1 = self.ch1;
        let mut c2 = self.ch2;
        c1.gain *= cmd.a1;
        c2.gain *= cmd.a2;
        c2.delay += cmd.delta_tau;
        c1.active = cmd.a1 > 0.0;
        c2.active = cmd.a2 > 0.0;
        [c1, c2]
    }
}

pub fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Phase of a channel's beamformed return at its range-Doppler peak:
/// `2π[(f_c + B/2) 2R_c/c0 + (f_rts + B/2) τ_rts] + κ sin(θ) (N_A - 1)/2`.
///
/// `κ` is the per-element phase coefficient; for half-wavelength spacing it
/// is π and the array term reduces to `2π sin(θ) (N_A - 1)/4`.
pub fn composite_phase(ch: &FrontEndChannel, cfg: &RadarConfig, rts: &RtsConfig) -> f64 {
    let centre = cfg.center_frequency();
    let f_rts = rts.intermediate_frequency(cfg) + cfg.bandwidth / 2.0;
    let tau = rts.quantize(ch.delay);
    let n = cfg.virtual_elements() as f64;
    2.0 * PI * (centre * 2.0 * ch.path_length / C0 + f_rts * tau)
        + cfg.steering_coefficient() * ch.theta.sin() * (n - 1.0) / 2.0
}

/// `2π (f_rts + B/2)`, rad/s: phase change per unit simulator delay.
pub fn delay_phase_slope(rts: &RtsConfig, cfg: &RadarConfig) -> f64 {
    2.0 * PI * (rts.intermediate_frequency(cfg) + cfg.bandwidth / 2.0)
}

/// `2cos(x/2)/x - 4sin(x/2)/x²`, a scaled derivative of `sinc(x/2)`.
pub fn g_of(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 6.0 + x * x * x / 240.0
    } else {
        2.0 * (x / 2.0).cos() / x - 4.0 * (x / 2.0).sin() / (x * x)
    }
}

/// Derivative substitute evaluated at `x = sin(θ_q) - sin(α)`.
pub fn g(theta_q: f64, alpha: f64) -> f64 {
    g_of(theta_q.sin() - alpha.sin())
}

/// Centred array factor `sin(N u)/sin(u)`.
pub fn dirichlet(u: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = u.sin();
    if s.abs() < 1e-12 {
        let m = (u / PI).round() as i64;
        return if (m * (n as i64 - 1)) % 2 == 0 {
            nf
        } else {
            -nf
        };
    }
    (nf * u).sin() / s
}

/// `d/du [sin(N u)/sin(u)]`.
pub fn dirichlet_derivative(u: f64, n: usize) -> f64 {
    let nf = n as f64;
    if u.abs() < 1e-4 {
        let k = nf * (nf * nf - 1.0);
        return -k * u / 3.0 + k * (3.0 * nf * nf - 7.0) * u * u * u / 90.0;
    }
    let s = u.sin();
    (nf * (nf * u).cos() * s - (nf * u).sin() * u.cos()) / (s * s)
}

/// Pattern whose slope balance fixes the amplitude ratio.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PatternKernel {
    /// The beamformer's own Dirichlet response.
    #[default]
    Array,
    /// `g` evaluated at `scale · (sin θ_q - sin α)`; `scale = 1` is the
    /// literal form.
    Sinc { scale: f64 },
}

impl PatternKernel {
    /// Slope of the channel pattern at offset `x = sin θ_q - sin α`, up to
    /// a factor common to both channels.
    pub fn slope(&self, x: f64, cfg: &RadarConfig) -> f64 {
        match *self {
            PatternKernel::Array => {
                dirichlet_derivative(cfg.steering_coefficient() * x / 2.0, cfg.virtual_elements())
            }
            PatternKernel::Sinc { scale } => g_of(scale * x),
        }
    }
}

/// `A_1/A_2 = -P'(x_2)/P'(x_1)` for coherent channels.
///
/// Returns `f64::INFINITY` at the `θ_1` end and `0` at the `θ_2` end.
pub fn amplitude_ratio(
    pair: &ChannelPair,
    alpha_set: f64,
    kernel: PatternKernel,
    cfg: &RadarConfig,
) -> Result<f64> {
    let (s1, s2, s) = (pair.ch1.theta.sin(), pair.ch2.theta.sin(), alpha_set.sin());
    if !(s >= s1 - EPS_SIN && s <= s2 + EPS_SIN) {
        return Err(Error::SetPointOutside {
            alpha_deg: alpha_set.to_degrees(),
            lo_deg: pair.ch1.theta.to_degrees(),
            hi_deg: pair.ch2.theta.to_degrees(),
        });
    }
    if s - s1 <= EPS_SIN {
        return Ok(f64::INFINITY);
    }
    if s2 - s <= EPS_SIN {
        return Ok(0.0);
    }
    let ratio = -kernel.slope(s2 - s, cfg) / kernel.slope(s1 - s, cfg);
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::NonPositiveRatio(ratio));
    }
    Ok(ratio)
}

/// Gains and delay offset realizing one steered set-point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaCommand {
    pub alpha_set: f64,
    /// `a1 / a2`
    pub ratio: f64,
    pub a1: f64,
    pub a2: f64,
    /// Added to `ch2`'s simulator delay, s.
    pub delta_tau: f64,
}

impl AoaCommand {
    /// Gains normalized so the larger one is 1.
    pub fn from_ratio(alpha_set: f64, ratio: f64, delta_tau: f64) -> Self {
        let (a1, a2) = if ratio >= 1.0 {
            (1.0, 1.0 / ratio)
        } else {
            (ratio, 1.0)
        };
        Self {
            alpha_set,
            ratio,
            a1,
            a2,
            delta_tau,
        }
    }

    /// Gains multiplied by per-channel amplitude corrections, renormalized.
    pub fn corrected(&self, c1: f64, c2: f64) -> Self {
        let (g1, g2) = (self.a1 * c1, self.a2 * c2);
        let top = g1.max(g2);
        if !(top > 0.0) {
            return *self;
        }
        Self {
            a1: g1 / top,
            a2: g2 / top,
            ..*self
        }
    }
}

pub fn command(
    pair: &ChannelPair,
    alpha_set: f64,
    kernel: PatternKernel,
    delta_tau: f64,
    cfg: &RadarConfig,
) -> Result<AoaCommand> {
    let ratio = amplitude_ratio(pair, alpha_set, kernel, cfg)?;
    Ok(AoaCommand::from_ratio(alpha_set, ratio, delta_tau))
}

/// Analytic beamformed response of the pair, `Σ a_q N_s exp(j φ_A,q) D_q(α)`.
/// Channel gains are not applied; `a1` and `a2` are absolute.
pub fn superposed_spectrum(
    pair: &ChannelPair,
    a1: f64,
    a2: f64,
    grid: AngleGrid,
    cfg: &RadarConfig,
    rts: &RtsConfig,
) -> AngleSpectrum {
    let (p1, p2) = pair.phases(cfg, rts);
    let n = cfg.virtual_elements();
    let kappa = cfg.steering_coefficient();
    let scale = cfg.samples_per_chirp as f64;
    let (s1, s2) = (pair.ch1.theta.sin(), pair.ch2.theta.sin());
    let (e1, e2) = (
        Complex64::from_polar(a1 * scale, p1),
        Complex64::from_polar(a2 * scale, p2),
    );
    let values = grid
        .sines()
        .map(|s| {
            e1 * dirichlet(kappa * (s1 - s) / 2.0, n) + e2 * dirichlet(kappa * (s2 - s) / 2.0, n)
        })
        .collect();
    AngleSpectrum { grid, values }
}

/// Outcome of the superposition preconditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    /// Range-bin location difference, ch1 minus ch2.
    pub range_offset_bins: f64,
    pub doppler_offset_bins: f64,
    pub same_range_bin: bool,
    pub same_doppler_bin: bool,
    /// `θ_2 - θ_1`, rad.
    pub angle_span: f64,
    pub resolution: f64,
    pub within_resolution: bool,
    /// Wrapped `φ_A,1 - φ_A,2`, rad.
    pub phase_difference: f64,
    pub phase_tolerance: f64,
    pub coherent: bool,
}

impl ConstraintReport {
    pub fn ok(&self) -> bool {
        self.same_range_bin && self.same_doppler_bin && self.within_resolution && self.coherent
    }
}

pub fn check_constraints(
    pair: &ChannelPair,
    cfg: &RadarConfig,
    rts: &RtsConfig,
    phase_tolerance: f64,
) -> Result<ConstraintReport> {
    let range_loc =
        |ch: &FrontEndChannel| cfg.bandwidth * (2.0 * ch.path_length / C0 + rts.quantize(ch.delay));
    let doppler_loc =
        |ch: &FrontEndChannel| ch.doppler * cfg.chirps_per_frame as f64 * cfg.chirp_period;
    let range_offset_bins = range_loc(&pair.ch1) - range_loc(&pair.ch2);
    let doppler_offset_bins = doppler_loc(&pair.ch1) - doppler_loc(&pair.ch2);
    let angle_span = pair.ch2.theta - pair.ch1.theta;
    let resolution = angular_resolution(cfg)?;
    let phase_difference = pair.phase_difference(cfg, rts);
    Ok(ConstraintReport {
        range_offset_bins,
        doppler_offset_bins,
        same_range_bin: range_offset_bins.abs() < 1.0,
        same_doppler_bin: doppler_offset_bins.abs() < 1.0,
        angle_span,
        resolution,
        within_resolution: angle_span <= resolution,
        phase_difference,
        phase_tolerance,
        coherent: phase_difference.abs() <= phase_tolerance,
    })
}
