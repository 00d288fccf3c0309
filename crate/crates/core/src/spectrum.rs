//! Range and Doppler transforms, plus the closed-form range response used
//! as an analysis oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::cube::BeatCube;
use crate::error::{Error, Result};
use crate::model::{RadarConfig, RtsConfig, C0};

/// Range DFT of every chirp on every antenna; `values.samples` counts range bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSpectrum {
    pub values: BeatCube,
    pub pad: usize,
    /// Round-trip delay represented by one (padded) bin, s.
    pub delay_per_bin: f64,
}

impl RangeSpectrum {
    pub fn bins(&self) -> usize {
        self.values.samples
    }

    /// Range, m, of a (possibly fractional) bin location. This is the total
    /// radar-to-target range including the physical front-end path.
    pub fn range_of(&self, bin: f64) -> f64 {
        C0 * bin * self.delay_per_bin / 2.0
    }
}

/// Doppler DFT over chirps of a range spectrum, Doppler axis fftshifted.
/// `values.chirps` counts Doppler bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pub values: BeatCube,
    pub pad: usize,
    pub delay_per_bin: f64,
    /// Echo Doppler shift represented by one bin, Hz.
    pub doppler_per_bin: f64,
    /// Carrier used to convert Doppler to velocity, Hz.
    pub carrier: f64,
}

impl RangeDopplerMap {
    pub fn range_bins(&self) -> usize {
        self.values.samples
    }

    pub fn doppler_bins(&self) -> usize {
        self.values.chirps
    }

    pub fn antennas(&self) -> usize {
        self.values.antennas
    }

    pub fn range_of(&self, bin: f64) -> f64 {
        C0 * bin * self.delay_per_bin / 2.0
    }

    /// Echo Doppler shift at a (fractional) shifted Doppler bin. The radar
    /// mixes with the conjugate echo, so an echo shifted up by `f_D` rotates
    /// the slow-time beat at `-f_D`.
    pub fn doppler_of(&self, bin: f64) -> f64 {
        let zero = (self.doppler_bins() / 2) as f64;
        -(bin - zero) * self.doppler_per_bin
    }

    pub fn velocity_of(&self, bin: f64) -> f64 {
        self.doppler_of(bin) * C0 / (2.0 * self.carrier)
    }

    /// Antenna snapshot of one range-Doppler cell.
    pub fn cell(&self, range_bin: usize, doppler_bin: usize) -> Vec<Complex64> {
        (0..self.antennas())
            .map(|a| self.values.get(range_bin, doppler_bin, a))
            .collect()
    }

    /// Non-coherent sum of `|x|²` over antennas, `[doppler][range]`.
    pub fn power(&self) -> Vec<f64> {
        let (nr, nd) = (self.range_bins(), self.doppler_bins());
        let mut out = vec![0.0; nr * nd];
        for d in 0..nd {
            for a in 0..self.antennas() {
                for (o, z) in out[d * nr..(d + 1) * nr]
                    .iter_mut()
                    .zip(self.values.row(d, a))
                {
                    *o += z.norm_sqr();
                }
            }
        }
        out
    }
}

/// Forward DFT `Σ x[n] exp(-j 2π n k / N)` along fast time, after zero
/// padding each chirp to `pad · N_s` samples.
pub fn range_dft(cube: &BeatCube, cfg: &RadarConfig, pad: usize) -> Result<RangeSpectrum> {
    if pad < 1 {
        return Err(Error::InvalidPadFactor(pad));
    }
    let n = cube.samples * pad;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut out = BeatCube::zeros(n, cube.chirps, cube.antennas);
    out.provenance = cube.provenance.clone();
    for c in 0..cube.chirps {
        for a in 0..cube.antennas {
            let start = out.index(0, c, a);
            let row = &mut out.data[start..start + n];
            row[..cube.samples].copy_from_slice(cube.row(c, a));
            fft.process(row);
        }
    }
    // bin k <-> beat frequency k f_s / n <-> delay k f_s T / (n B)
    let delay_per_bin = cfg.sample_rate * cfg.chirp_period / (n as f64 * cfg.bandwidth);
    Ok(RangeSpectrum {
        values: out,
        pad,
        delay_per_bin,
    })
}

/// Slow-time DFT per range bin and antenna with the zero-Doppler bin moved
/// to index `N_chirp / 2`.
pub fn doppler_dft(spec: &RangeSpectrum, cfg: &RadarConfig) -> Result<RangeDopplerMap> {
    let chirps = spec.values.chirps;
    if chirps < 2 {
        return Err(Error::TooFewChirps(chirps));
    }
    let bins = spec.bins();
    let antennas = spec.values.antennas;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(chirps);
    let mut out = BeatCube::zeros(bins, chirps, antennas);
    out.provenance = spec.values.provenance.clone();
    let shift = chirps / 2;
    let mut column = vec![Complex64::new(0.0, 0.0); chirps];
    for a in 0..antennas {
        for r in 0..bins {
            for (c, z) in column.iter_mut().enumerate() {
                *z = spec.values.get(r, c, a);
            }
            fft.process(&mut column);
            for (k, z) in column.iter().enumerate() {
                let d = (k + shift) % chirps;
                let idx = out.index(r, d, a);
                out.data[idx] = *z;
            }
        }
    }
    Ok(RangeDopplerMap {
        values: out,
        pad: spec.pad,
        delay_per_bin: spec.delay_per_bin,
        doppler_per_bin: 1.0 / (chirps as f64 * cfg.chirp_period),
        carrier: cfg.start_frequency,
    })
}

/// Which sinc the closed-form range response uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SincConvention {
    /// `sin(πx)/(πx)` of the bin offset `Bτ - f_R`; the continuous limit of
    /// the DFT's Dirichlet kernel.
    #[default]
    Normalized,
    /// `sin(u)/u` of `(Bτ - f_R) / N_s`, read literally.
    Unnormalized,
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Closed-form range-DFT value `A N_s sinc(·) exp(j φ_R)` of a single
/// return with free-space delay `tau_c` and simulator delay `tau_rts`.
///
/// The phase is `2π [f_c τ_c + f_rts τ_rts + (Bτ - f_R)/2] - π B τ² / T`;
/// the last (residual video phase) term is kept so the value is exact at an
/// aligned bin.
#[allow(clippy::too_many_arguments)]
pub fn sinc_closed_form_range(
    amplitude: f64,
    tau_c: f64,
    tau_rts: f64,
    bin: f64,
    cfg: &RadarConfig,
    rts: &RtsConfig,
    convention: SincConvention,
) -> Complex64 {
    let n = cfg.samples_per_chirp as f64;
    let tau = tau_c + tau_rts;
    let offset = cfg.bandwidth * tau - bin;
    let shape = match convention {
        SincConvention::Normalized => sinc(PI * offset),
        SincConvention::Unnormalized => sinc(offset / n),
    };
    Complex64::from_polar(
        amplitude * n * shape,
        range_peak_phase(tau_c, tau_rts, bin, cfg, rts),
    )
}

/// Phase of the range response at `bin` (see [`sinc_closed_form_range`]).
pub fn range_peak_phase(
    tau_c: f64,
    tau_rts: f64,
    bin: f64,
    cfg: &RadarConfig,
    rts: &RtsConfig,
) -> f64 {
    let tau = tau_c + tau_rts;
    2.0 * PI
        * (cfg.start_frequency * tau_c
            + rts.intermediate_frequency(cfg) * tau_rts
            + 0.5 * (cfg.bandwidth * tau - bin))
        - PI * cfg.slope() * tau * tau
}

/// Exact `Σ_{k<n} exp(j 2π k u / n)`, the response of an `n`-point DFT to a
/// tone `u` bins away from the evaluated bin.
pub fn dirichlet_sum(u: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let den = (PI * u / nf).sin();
    let mag = if den.abs() < 1e-12 {
        // at multiples of n the sum is n (up to sign)
        let m = (u / nf).round();
        nf * if (m as i64 * (n as i64 - 1)) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    } else {
        (PI * u).sin() / den
    };
    Complex64::from_polar(1.0, PI * (nf - 1.0) * u / nf) * mag
}
