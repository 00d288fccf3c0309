//! End-to-end radar processing: synthesis, range and Doppler transforms,
//! cell selection and beamforming.

use crate::beamform::{AngleGrid, AnglePeak, AngleSpectrum, Beamformer};
use crate::cube::{synthesize_beat, BeatCube, NoiseSpec};
use crate::error::{Error, Result};
use crate::model::{FrontEndChannel, RadarConfig, RtsConfig};
use crate::peak::parabolic_offset;
use crate::spectrum::{doppler_dft, range_dft, RangeDopplerMap};

/// A detection in one range-Doppler cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub range_bin: usize,
    pub doppler_bin: usize,
    /// Fractional (refined) locations.
    pub range_location: f64,
    pub doppler_location: f64,
    /// m
    pub range: f64,
    /// m/s
    pub velocity: f64,
    /// Non-coherent cell power summed over antennas.
    pub power: f64,
    pub angle: AnglePeak,
}

#[derive(Debug, Clone)]
pub struct Processor {
    pub radar: RadarConfig,
    pub rts: RtsConfig,
    pub beamformer: Beamformer,
    pub range_pad: usize,
    pub refine: bool,
    pub noise: Option<NoiseSpec>,
}

impl Processor {
    pub fn new(radar: RadarConfig, rts: RtsConfig, grid: AngleGrid) -> Self {
        let beamformer = Beamformer::for_radar(&radar, grid);
        Self {
            radar,
            rts,
            beamformer,
            range_pad: 1,
            refine: true,
            noise: None,
        }
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    pub fn with_noise(mut self, noise: Option<NoiseSpec>) -> Self {
        self.noise = noise;
        self
    }

    /// Same processing, different radar frame length.
    pub fn with_chirps(&self, chirps: usize) -> Self {
        Self {
            radar: self.radar.clone().with_chirps(chirps),
            ..self.clone()
        }
    }

    pub fn grid(&self) -> AngleGrid {
        self.beamformer.grid
    }

    pub fn simulate(&self, channels: &[FrontEndChannel]) -> Result<BeatCube> {
        synthesize_beat(channels, &self.radar, &self.rts, self.noise)
    }

    pub fn range_doppler(&self, cube: &BeatCube) -> Result<RangeDopplerMap> {
        doppler_dft(&range_dft(cube, &self.radar, self.range_pad)?, &self.radar)
    }

    pub fn angle_spectrum(
        &self,
        map: &RangeDopplerMap,
        range_bin: usize,
        doppler_bin: usize,
    ) -> Result<AngleSpectrum> {
        self.beamformer.beamform(&map.cell(range_bin, doppler_bin))
    }

    /// Detection at a given cell, refining range and Doppler on the
    /// non-coherent magnitude.
    pub fn detection_at(
        &self,
        map: &RangeDopplerMap,
        power: &[f64],
        range_bin: usize,
        doppler_bin: usize,
    ) -> Result<Detection> {
        let (nr, nd) = (map.range_bins(), map.doppler_bins());
        let mag = |r: usize, d: usize| power[d * nr + r].sqrt();
        let centre = mag(range_bin, doppler_bin);
        let mut range_location = range_bin as f64;
        let mut doppler_location = doppler_bin as f64;
        if self.refine {
            if range_bin > 0 && range_bin + 1 < nr {
                range_location += parabolic_offset(
                    mag(range_bin - 1, doppler_bin),
                    centre,
                    mag(range_bin + 1, doppler_bin),
                );
            }
            if nd >= 3 {
                let prev = (doppler_bin + nd - 1) % nd;
                let next = (doppler_bin + 1) % nd;
                doppler_location +=
                    parabolic_offset(mag(range_bin, prev), centre, mag(range_bin, next));
            }
        }
        let angle = self
            .angle_spectrum(map, range_bin, doppler_bin)?
            .peak(self.refine)?;
        Ok(Detection {
            range_bin,
            doppler_bin,
            range_location,
            doppler_location,
            range: map.range_of(range_location),
            velocity: map.velocity_of(doppler_location),
            power: power[doppler_bin * nr + range_bin],
            angle,
        })
    }

    /// Detection in the strongest cell of the frame.
    pub fn strongest(&self, map: &RangeDopplerMap) -> Result<Detection> {
        let power = map.power();
        let (idx, max) =
            power.iter().enumerate().fold(
                (0, 0.0f64),
                |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
            );
        if !(max > 0.0) {
            return Err(Error::NoPeak);
        }
        let nr = map.range_bins();
        self.detection_at(map, &power, idx % nr, idx / nr)
    }

    /// Strongest cell inside a window of `±radius` bins around an expected
    /// range-Doppler location.
    pub fn strongest_near(
        &self,
        map: &RangeDopplerMap,
        power: &[f64],
        range_bin: f64,
        doppler_bin: f64,
        radius: usize,
    ) -> Result<Detection> {
        let (nr, nd) = (map.range_bins(), map.doppler_bins());
        let r0 = range_bin.round() as i64;
        let d0 = doppler_bin.round() as i64;
        let rad = radius as i64;
        let mut best: Option<(usize, usize, f64)> = None;
        for d in d0 - rad..=d0 + rad {
            let d = d.rem_euclid(nd as i64) as usize;
            for r in (r0 - rad).max(0)..=(r0 + rad).min(nr as i64 - 1) {
                let p = power[d * nr + r as usize];
                if best.is_none_or(|(_, _, b)| p > b) {
                    best = Some((r as usize, d, p));
                }
            }
        }
        match best {
            Some((r, d, p)) if p > 0.0 => self.detection_at(map, power, r, d),
            _ => Err(Error::NoPeak),
        }
    }

    /// Local maxima of the non-coherent map within `threshold_db` of the
    /// frame maximum, strongest first, with non-maximum suppression over
    /// `±radius` cells.
    pub fn peaks(
        &self,
        map: &RangeDopplerMap,
        threshold_db: f64,
        radius: usize,
    ) -> Result<Vec<Detection>> {
        let power = map.power();
        let max = power.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Ok(Vec::new());
        }
        let floor = max * 10f64.powf(-threshold_db / 10.0);
        let (nr, nd) = (map.range_bins(), map.doppler_bins());
        let mut order: Vec<usize> = (0..power.len()).filter(|&i| power[i] >= floor).collect();
        order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
        let mut kept: Vec<(usize, usize)> = Vec::new();
        let rad = radius as i64;
        for i in order {
            let (r, d) = (i % nr, i / nr);
            let close = kept.iter().any(|&(kr, kd)| {
                let dr = (kr as i64 - r as i64).abs();
                let dd = (kd as i64 - d as i64).rem_euclid(nd as i64);
                let dd = dd.min(nd as i64 - dd);
                dr <= rad && dd <= rad
            });
            if !close {
                kept.push((r, d));
            }
        }
        kept.into_iter()
            .map(|(r, d)| self.detection_at(map, &power, r, d))
            .collect()
    }

    /// Simulates the channels and returns the detection in the strongest cell.
    pub fn estimate(&self, channels: &[FrontEndChannel]) -> Result<Detection> {
        let cube = self.simulate(channels)?;
        let map = self.range_doppler(&cube)?;
        self.strongest(&map)
    }
}
