//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Three operations: simulate a scene (range-azimuth image plus CLEAN
//! detections), read the MUSIC spectrum of a detection, and compare the point
//! spread function of a numeric mode with double precision.

pub mod demo;

use wasm_bindgen::prelude::*;

use jrc_rsp::bench::StageModes;
use jrc_rsp::fxp::NumericMode;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_mode(s: &str) -> Result<NumericMode, JsError> {
    s.parse().map_err(js_err)
}

#[wasm_bindgen]
pub struct Image {
    inner: demo::DbImage,
}

#[wasm_bindgen]
impl Image {
    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> usize {
        self.inner.rows
    }

    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> usize {
        self.inner.cols
    }

    #[wasm_bindgen(getter)]
    pub fn first_range_m(&self) -> f64 {
        self.inner.first_range_m
    }

    #[wasm_bindgen(getter)]
    pub fn range_step_m(&self) -> f64 {
        self.inner.range_step_m
    }

    pub fn azimuths_deg(&self) -> Vec<f64> {
        self.inner.azimuths_deg.clone()
    }

    /// Row-major magnitudes in dB relative to the peak.
    pub fn db(&self) -> Vec<f32> {
        self.inner.db.clone()
    }
}

#[wasm_bindgen]
pub struct Scene {
    inner: demo::Scene,
}

#[wasm_bindgen]
impl Scene {
    pub fn image(&self) -> Image {
        Image { inner: self.inner.image.clone() }
    }

    /// Flat `[range_m, azimuth_deg, velocity_mps]` triples.
    pub fn truths(&self) -> Vec<f64> {
        self.inner.truths.concat()
    }

    /// Flat `[range_m, azimuth_deg, velocity_mps]` triples in CLEAN order.
    pub fn detections(&self) -> Vec<f64> {
        self.inner.detections.concat()
    }

    pub fn artifacts(&self) -> Vec<u8> {
        self.inner.artifacts.iter().map(|&a| a as u8).collect()
    }

    /// MUSIC pseudo-spectrum of detection `index` in dB; empty if out of range.
    pub fn spectrum_db(&self, index: usize) -> Vec<f32> {
        self.inner.spectra_db.get(index).cloned().unwrap_or_default()
    }

    pub fn spectrum_velocity_mps(&self) -> Vec<f64> {
        self.inner.spectrum_velocity_mps.clone()
    }
}

/// Runs one trial of the scenario text at `snr_db` (use `Infinity` for noiseless).
#[wasm_bindgen]
pub fn simulate(config: &str, snr_db: f64, trial: usize, mf_mode: &str, music_mode: &str) -> Result<Scene, JsError> {
    let modes = StageModes { mf: parse_mode(mf_mode)?, music: parse_mode(music_mode)? };
    demo::simulate(config, snr_db, trial, modes).map(|inner| Scene { inner }).map_err(js_err)
}

#[wasm_bindgen]
pub struct Psf {
    inner: demo::PsfView,
}

#[wasm_bindgen]
impl Psf {
    pub fn image(&self) -> Image {
        Image { inner: self.inner.image.clone() }
    }

    /// RMS deviation from the double-precision PSF, dB relative to the peak.
    #[wasm_bindgen(getter)]
    pub fn error_db(&self) -> f64 {
        self.inner.error_db
    }
}

#[wasm_bindgen]
pub fn point_spread(config: &str, mode: &str, range_bin: usize, azimuth_bin: usize) -> Result<Psf, JsError> {
    demo::psf_view(config, parse_mode(mode)?, range_bin, azimuth_bin, 24)
        .map(|inner| Psf { inner })
        .map_err(js_err)
}
