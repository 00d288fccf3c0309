//! Simulation of a radar target simulator that steers virtual targets in
//! azimuth by superposing two front-end channels, together with the FMCW
//! MIMO radar processing used to observe the result.

pub mod aoa;
pub mod beamform;
pub mod calibration;
pub mod chain;
pub mod cube;
pub mod error;
pub mod model;
pub mod peak;
pub mod pipeline;
pub mod scenario;
pub mod spectrum;

pub use aoa::{amplitude_ratio, command, AoaCommand, ChannelPair, PatternKernel};
pub use beamform::{AngleGrid, AngleSpectrum, Beamformer};
pub use cube::{synthesize_beat, BeatCube, NoiseSpec};
pub use error::{Error, Result};
pub use model::{FrontEndChannel, RadarConfig, RtsConfig, TargetSpec, C0};
pub use pipeline::{Detection, Processor};
