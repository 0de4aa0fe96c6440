//! Radar signal processing chain for a joint radar-communication receiver:
//! Golay waveform synthesis, range-azimuth imaging with a fused
//! beamform/matched filter, CLEAN detection and MUSIC Doppler estimation, in
//! floating or fixed-point arithmetic.

pub mod channel;
pub mod bench;
pub mod clean;
pub mod complexity;
pub mod error;
pub mod fxp;
pub mod music;
pub mod params;
pub mod range_azimuth;
pub mod waveform;

pub use error::{Result, RspError};
