//! Conventional (delay-and-sum) beamforming over a grid uniform in `sin(α)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::RadarConfig;
use crate::peak::{find_peak, Peak};

/// `len` points uniformly spaced in `sin(α)` over `[-1, 1]`, i.e. α over
/// `[-90°, 90°]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    pub len: usize,
}

pub const DEFAULT_GRID: usize = 8192;

impl Default for AngleGrid {
    fn default() -> Self {
        Self { len: DEFAULT_GRID }
    }
}

impl AngleGrid {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { len })
    }

    pub fn step(&self) -> f64 {
        2.0 / (self.len - 1) as f64
    }

    /// `sin(α)` at a possibly fractional grid location.
    pub fn sin_at(&self, location: f64) -> f64 {
        (-1.0 + location * self.step()).clamp(-1.0, 1.0)
    }

    pub fn angle_at(&self, location: f64) -> f64 {
        self.sin_at(location).asin()
    }

    pub fn sines(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.sin_at(i as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSpectrum {
    pub grid: AngleGrid,
    pub values: Vec<Complex64>,
}

/// A located angle peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePeak {
    pub peak: Peak,
    pub sin: f64,
    /// rad
    pub angle: f64,
}

impl AngleSpectrum {
    /// Peak in `sin(α)`; refinement interpolates in the sine domain.
    pub fn peak(&self, refine: bool) -> Result<AnglePeak> {
        let peak = find_peak(&self.values, refine)?;
        let sin = self.grid.sin_at(peak.location);
        Ok(AnglePeak {
            peak,
            sin,
            angle: sin.asin(),
        })
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }
}

/// Precomputed steering vectors for one array and grid.
///
/// Element `n` of a return from `θ` carries phase `κ sin(θ) n` with
/// `κ = 2π d (f_c + B/2) / c0` (π for half-wavelength spacing). The
/// beamformer sums with indices centred on the array middle, so a single
/// return yields `exp(j κ sin(θ) (N-1)/2) · D(sin θ - sin α)` with `D` the
/// real, centred Dirichlet kernel.
#[derive(Debug, Clone)]
pub struct Beamformer {
    pub grid: AngleGrid,
    pub elements: usize,
    pub coefficient: f64,
    steering: Vec<Complex64>,
}

impl Beamformer {
    pub fn new(elements: usize, coefficient: f64, grid: AngleGrid) -> Self {
        let centre = (elements as f64 - 1.0) / 2.0;
        let mut steering = Vec::with_capacity(grid.len * elements);
        for s in grid.sines() {
            for n in 0..elements {
                steering.push(Complex64::from_polar(
                    1.0,
                    -coefficient * s * (n as f64 - centre),
                ));
            }
        }
        Self {
            grid,
            elements,
            coefficient,
            steering,
        }
    }

    pub fn for_radar(cfg: &RadarConfig, grid: AngleGrid) -> Self {
        Self::new(cfg.virtual_elements(), cfg.steering_coefficient(), grid)
    }

    /// `x_A[α] = Σ_n x_n exp(-j κ sin(α) (n - (N-1)/2))`.
    pub fn beamform(&self, cells: &[Complex64]) -> Result<AngleSpectrum> {
        if cells.len() != self.elements {
            return Err(Error::InvalidConfig(format!(
                "beamformer expects {} elements, got {}",
                self.elements,
                cells.len()
            )));
        }
        let values = self
            .steering
            .chunks_exact(self.elements)
            .map(|w| w.iter().zip(cells).map(|(a, b)| a * b).sum())
            .collect();
        Ok(AngleSpectrum {
            grid: self.grid,
            values,
        })
    }
}
