//! Beat-signal synthesis and the binary spectrum dump.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::chain::{beat_phase, return_delay, PhasePath};
use crate::error::{Error, Result};
use crate::model::{FrontEndChannel, RadarConfig, RtsConfig, C0};

/// Complex white Gaussian noise added to every beat sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Total complex variance per sample.
    pub power: f64,
    pub seed: u64,
}

/// Which channel state produced a contribution to a cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub front_end: usize,
    pub target: Option<usize>,
}

/// A chirp × antenna × sample block of complex values.
///
/// Storage is row-major with the chirp index slowest and the sample (or
/// range bin) index fastest, the same order as the binary dump.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatCube {
    pub data: Vec<Complex64>,
    pub samples: usize,
    pub chirps: usize,
    pub antennas: usize,
    pub provenance: Vec<Provenance>,
}

impl BeatCube {
    pub fn zeros(samples: usize, chirps: usize, antennas: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); samples * chirps * antennas],
            samples,
            chirps,
            antennas,
            provenance: Vec::new(),
        }
    }

    #[inline]
    pub fn index(&self, sample: usize, chirp: usize, antenna: usize) -> usize {
        (chirp * self.antennas + antenna) * self.samples + sample
    }

    pub fn get(&self, sample: usize, chirp: usize, antenna: usize) -> Complex64 {
        self.data[self.index(sample, chirp, antenna)]
    }

    /// Samples of one chirp on one antenna.
    pub fn row(&self, chirp: usize, antenna: usize) -> &[Complex64] {
        let start = self.index(0, chirp, antenna);
        &self.data[start..start + self.samples]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn conj(&self) -> Self {
        Self {
            data: self.data.iter().map(|z| z.conj()).collect(),
            ..self.clone()
        }
    }

    /// Element-wise sum of two cubes of equal shape.
    pub fn superpose(&self, other: &Self) -> Self {
        assert_eq!(
            (self.samples, self.chirps, self.antennas),
            (other.samples, other.chirps, other.antennas)
        );
        let mut provenance = self.provenance.clone();
        provenance.extend_from_slice(&other.provenance);
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
            provenance,
            ..*self
        }
    }

    /// `a · self + b · other` for cubes of equal shape.
    pub fn weighted_sum(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(
            (self.samples, self.chirps, self.antennas),
            (other.samples, other.chirps, other.antennas)
        );
        let mut provenance = self.provenance.clone();
        provenance.extend_from_slice(&other.provenance);
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            provenance,
            ..*self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Synthesizes the radar's complex beat samples for all active channels.
///
/// Each channel contributes `A_q exp(j φ_b)` per sample, chirp and virtual
/// element; contributions superimpose only at the radar's elements.
pub fn synthesize_beat(
    channels: &[FrontEndChannel],
    cfg: &RadarConfig,
    rts: &RtsConfig,
    noise: Option<NoiseSpec>,
) -> Result<BeatCube> {
    let active: Vec<&FrontEndChannel> = channels.iter().filter(|c| c.active).collect();
    if active.is_empty() {
        return Err(Error::NoActiveChannels);
    }
    for ch in &active {
        ch.validate()?;
    }
    let (samples, chirps, antennas) = (
        cfg.samples_per_chirp,
        cfg.chirps_per_frame,
        cfg.virtual_elements(),
    );
    samples
        .checked_mul(chirps)
        .and_then(|n| n.checked_mul(antennas))
        .filter(|&n| n <= isize::MAX as usize / std::mem::size_of::<Complex64>())
        .ok_or_else(|| Error::DimensionOverflow(format!("{samples} x {chirps} x {antennas}")))?;

    // per channel and element: the delay split of the path
    let paths: Vec<Vec<PhasePath>> = active
        .iter()
        .map(|ch| {
            let tx_delay = ch.path_length / C0;
            let rts_delay = rts.quantize(ch.delay);
            (0..antennas)
                .map(|n| {
                    let mut p = PhasePath::new(
                        tx_delay,
                        rts_delay,
                        return_delay(ch.theta, n, ch.path_length, cfg),
                    )
                    .with_doppler(ch.doppler);
                    p.gain = ch.gain;
                    p
                })
                .collect()
        })
        .collect();

    let mut cube = BeatCube::zeros(samples, chirps, antennas);
    cube.provenance = active
        .iter()
        .map(|ch| Provenance {
            front_end: ch.front_end,
            target: ch.target,
        })
        .collect();

    cube.data
        .par_chunks_mut(antennas * samples)
        .enumerate()
        .for_each(|(chirp, block)| {
            for (antenna, row) in block.chunks_mut(samples).enumerate() {
                for (k, out) in row.iter_mut().enumerate() {
                    let t = k as f64 / cfg.sample_rate;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for per_element in &paths {
                        let path = &per_element[antenna];
                        acc +=
                            Complex64::from_polar(path.gain, beat_phase(t, chirp, path, cfg, rts));
                    }
                    *out = acc;
                }
            }
        });

    if let Some(spec) = noise {
        add_noise(&mut cube, spec);
    }
    Ok(cube)
}

/// Adds seeded complex white Gaussian noise in storage order.
pub fn add_noise(cube: &mut BeatCube, spec: NoiseSpec) {
    let sigma = (spec.power / 2.0).sqrt();
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("finite noise power");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for z in &mut cube.data {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *z += Complex64::new(re, im);
    }
}

pub const DUMP_MAGIC: &[u8; 4] = b"RTSC";
pub const DUMP_VERSION: u32 = 1;
pub const DUMP_HEADER_LEN: usize = 32;

/// Writes a cube as `RTSC` header (magic, chirps, antennas, samples,
/// version, zero padding to 32 bytes) followed by little-endian `f64`
/// (re, im) pairs in storage order.
pub fn write_dump<W: Write>(cube: &BeatCube, mut out: W) -> Result<()> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    header[..4].copy_from_slice(DUMP_MAGIC);
    let dims = [
        cube.chirps as u32,
        cube.antennas as u32,
        cube.samples as u32,
        DUMP_VERSION,
    ];
    for (i, v) in dims.iter().enumerate() {
        header[4 + 4 * i..8 + 4 * i].copy_from_slice(&v.to_le_bytes());
    }
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(cube.data.len() * 16);
    for z in &cube.data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_dump<R: Read>(mut input: R) -> Result<BeatCube> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::BadDump("truncated header".into()))?;
    if &header[..4] != DUMP_MAGIC {
        return Err(Error::BadDump("bad magic".into()));
    }
    let word =
        |i: usize| u32::from_le_bytes(header[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (chirps, antennas, samples, version) = (word(0), word(1), word(2), word(3));
    if version != DUMP_VERSION as usize {
        return Err(Error::BadDump(format!("unsupported version {version}")));
    }
    let n = chirps * antennas * samples;
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != n * 16 {
        return Err(Error::BadDump(format!(
            "expected {} payload bytes, got {}",
            n * 16,
            raw.len()
        )));
    }
    let data = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(BeatCube {
        data,
        samples,
        chirps,
        antennas,
        provenance: Vec::new(),
    })
}
