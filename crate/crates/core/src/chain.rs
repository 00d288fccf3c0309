//! Phase-domain model of the loop radar -> front end -> simulator -> radar.
//!
//! Every function returns an unwrapped phase in radians. The radar mixes the
//! transmitted chirp with the conjugate of the returned one, so the beat
//! phase is `φ_tx(t) - φ_return(t)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{FieldModel, RadarConfig, RtsConfig, C0};

/// Delays and modifications along one radar -> front end -> radar path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePath {
    /// Free-space delay radar to front end, s.
    pub tx_delay: f64,
    /// Delay applied inside the simulator, s.
    pub rts_delay: f64,
    /// Free-space delay front end back to one radar element, s.
    pub rx_delay: f64,
    /// Doppler shift applied by the simulator, Hz.
    pub doppler: f64,
    pub gain: f64,
}

impl PhasePath {
    pub fn new(tx_delay: f64, rts_delay: f64, rx_delay: f64) -> Self {
        Self {
            tx_delay,
            rts_delay,
            rx_delay,
            doppler: 0.0,
            gain: 1.0,
        }
    }

    pub fn with_doppler(mut self, doppler: f64) -> Self {
        self.doppler = doppler;
        self
    }

    /// Free-space part `τ_c = τ_tx + τ_rx`.
    pub fn propagation_delay(&self) -> f64 {
        self.tx_delay + self.rx_delay
    }

    /// Total delay `τ = τ_c + τ_rts`.
    pub fn total_delay(&self) -> f64 {
        self.propagation_delay() + self.rts_delay
    }
}

fn chirp_phase(t: f64, cfg: &RadarConfig) -> f64 {
    2.0 * PI * (cfg.start_frequency * t + cfg.slope() / 2.0 * t * t)
}

/// Phase of the transmitted chirp, `2π (f_c t + B t² / 2T)`, for `t ∈ [0, T]`.
pub fn tx_phase(t: f64, cfg: &RadarConfig) -> Result<f64> {
    if !(0.0..=cfg.chirp_period).contains(&t) {
        return Err(Error::OutsideChirp {
            t,
            period: cfg.chirp_period,
        });
    }
    Ok(chirp_phase(t, cfg))
}

/// Phase after the front-end receive path and down-conversion with the
/// local oscillator.
pub fn downconvert_phase(t: f64, tx_delay: f64, cfg: &RadarConfig, rts: &RtsConfig) -> f64 {
    let f_rts = rts.intermediate_frequency(cfg);
    let u = t - tx_delay;
    2.0 * PI * (-cfg.start_frequency * tx_delay + f_rts * t + cfg.slope() / 2.0 * u * u)
}

/// Phase after the simulator delay, the Doppler mixer and up-conversion
/// back to the carrier. The Doppler term here is the intra-chirp part
/// `2π f_D t`; the chirp-to-chirp rotation is [`doppler_slow_time_phase`].
pub fn rts_modify_then_upconvert(
    t: f64,
    path: &PhasePath,
    cfg: &RadarConfig,
    rts: &RtsConfig,
) -> f64 {
    downconvert_phase(t - path.rts_delay, path.tx_delay, cfg, rts)
        + 2.0 * PI * rts.lo_frequency * t
        + 2.0 * PI * path.doppler * t
}

/// Accumulated Doppler-mixer phase at the start of chirp `chirp`.
pub fn doppler_slow_time_phase(chirp: usize, doppler: f64, cfg: &RadarConfig) -> f64 {
    2.0 * PI * doppler * cfg.chirp_period * chirp as f64
}

/// Beat phase obtained by literally chaining transmit, front end, simulator
/// and the radar mixer.
pub fn beat_phase_composed(
    t: f64,
    chirp: usize,
    path: &PhasePath,
    cfg: &RadarConfig,
    rts: &RtsConfig,
) -> f64 {
    chirp_phase(t, cfg)
        - rts_modify_then_upconvert(t - path.rx_delay, path, cfg, rts)
        - doppler_slow_time_phase(chirp, path.doppler, cfg)
}

/// Closed-form beat phase
/// `2π [f_c τ_c + f_rts τ_rts + (B/2T)(2 τ t - τ²)]`
/// minus the Doppler rotation `2π f_D (t - τ_rx + n_c T)`.
pub fn beat_phase(
    t: f64,
    chirp: usize,
    path: &PhasePath,
    cfg: &RadarConfig,
    rts: &RtsConfig,
) -> f64 {
    let tau = path.total_delay();
    let f_rts = rts.intermediate_frequency(cfg);
    let static_part = cfg.start_frequency * path.propagation_delay()
        + f_rts * path.rts_delay
        + cfg.slope() / 2.0 * (2.0 * tau * t - tau * tau);
    2.0 * PI * (static_part - path.doppler * (t - path.rx_delay + chirp as f64 * cfg.chirp_period))
}

/// Delay from a front end at angle `theta` and distance `path_length` back
/// to virtual element `element`.
pub fn return_delay(theta: f64, element: usize, path_length: f64, cfg: &RadarConfig) -> f64 {
    let offset = cfg.element_spacing * element as f64;
    match cfg.field_model {
        FieldModel::FarField => (path_length + offset * theta.sin()) / C0,
        FieldModel::NearField => {
            // elements sit at x = -n d on the array axis; the front end at
            // (R sin θ, R cos θ)
            let dx = path_length * theta.sin() + offset;
            let dy = path_length * theta.cos();
            dx.hypot(dy) / C0
        }
    }
}
