//! Plain-Rust side of the browser demo, usable and testable without a browser.

use num_complex::Complex64;

use jrc_rsp::bench::{synthesize_trial, Pipeline, StageModes};
use jrc_rsp::clean::psf;
use jrc_rsp::fxp::NumericMode;
use jrc_rsp::params::{parse_scenario, Scenario};
use jrc_rsp::range_azimuth::RangeAzimuthImage;
use jrc_rsp::Result;

/// Magnitude image in dB relative to its peak, row-major over `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct DbImage {
    pub rows: usize,
    pub cols: usize,
    /// Range of the first row in metres.
    pub first_range_m: f64,
    pub range_step_m: f64,
    pub azimuths_deg: Vec<f64>,
    pub db: Vec<f32>,
}

fn db_image(img: &RangeAzimuthImage, bins: (usize, usize), range_step_m: f64, azimuths_deg: &[f64]) -> DbImage {
    let (_, cols) = img.dims();
    let peak = img.max_abs().max(f64::MIN_POSITIVE);
    let mut db = Vec::with_capacity((bins.1 - bins.0 + 1) * cols);
    for k in bins.0..=bins.1 {
        db.extend((0..cols).map(|i| (20.0 * (img.get(k, i).norm() / peak).max(1e-12).log10()) as f32));
    }
    DbImage {
        rows: bins.1 - bins.0 + 1,
        cols,
        first_range_m: bins.0 as f64 * range_step_m,
        range_step_m,
        azimuths_deg: azimuths_deg.to_vec(),
        db,
    }
}

/// `[range_m, azimuth_deg, velocity_mps]` of a target or detection.
pub type Estimate = [f64; 3];

#[derive(Debug, Clone)]
pub struct Scene {
    /// First packet's range-azimuth image over the range gate.
    pub image: DbImage,
    pub truths: Vec<Estimate>,
    pub detections: Vec<Estimate>,
    pub artifacts: Vec<bool>,
    /// MUSIC pseudo-spectrum per detection, dB relative to its peak.
    pub spectra_db: Vec<Vec<f32>>,
    pub spectrum_velocity_mps: Vec<f64>,
}

fn load(config: &str) -> Result<Scenario> {
    parse_scenario(config)
}

/// Synthesizes trial `trial` of the scenario, images it, runs CLEAN and MUSIC.
pub fn simulate(config: &str, snr_db: f64, trial: usize, modes: StageModes) -> Result<Scene> {
    let scenario = load(config)?;
    let pipeline = Pipeline::new(&scenario.params)?;
    let (truths, cube) = synthesize_trial(&scenario, &pipeline, trial, snr_db)?;
    let image = pipeline.processor(modes.mf)?.image(&cube, 0)?;
    let (detections, spectra) = pipeline.process(&cube, modes)?;
    let d = &pipeline.derived;
    let spectra_db = spectra
        .iter()
        .map(|s| s.as_ref().map_or_else(Vec::new, |o| o.spectrum.mu_db.iter().map(|&v| v as f32).collect()))
        .collect();
    Ok(Scene {
        image: db_image(&image, d.range_bins, d.delta_r_m, &d.azimuth_grid_deg),
        truths: truths.iter().map(|t| [t.range_m, t.azimuth_deg, t.velocity_mps]).collect(),
        detections: detections.iter().map(|t| [t.range_m, t.azimuth_deg, t.velocity_mps]).collect(),
        artifacts: detections.iter().map(|t| t.artifact).collect(),
        spectra_db,
        spectrum_velocity_mps: d.doppler_grid_hz.iter().map(|&f| d.doppler_to_velocity(f)).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct PsfView {
    pub image: DbImage,
    /// RMS difference from the double-precision PSF, relative to the peak, in dB.
    pub error_db: f64,
}

/// Point spread function at one cell in the given numeric mode, cropped to
/// `half_width` range bins either side.
pub fn psf_view(config: &str, mode: NumericMode, range_bin: usize, azimuth_bin: usize, half_width: usize) -> Result<PsfView> {
    let params = load(config)?.params;
    let pipeline = Pipeline::new(&params)?;
    let value = Complex64::new((params.q * params.golay_len) as f64, 0.0);
    let img = psf(&pipeline.processor(mode)?, &params, &pipeline.waveform, value, range_bin, azimuth_bin)?;
    let reference = psf(&pipeline.processor(NumericMode::F64)?, &params, &pipeline.waveform, value, range_bin, azimuth_bin)?;
    let (k, cols) = img.dims();
    let mut err = 0.0;
    for kk in 0..k {
        for i in 0..cols {
            err += (img.get(kk, i) - reference.get(kk, i)).norm_sqr();
        }
    }
    let rms = (err / (k * cols) as f64).sqrt() / value.norm();
    let bins = (range_bin.saturating_sub(half_width), (range_bin + half_width).min(k - 1));
    let d = &pipeline.derived;
    Ok(PsfView {
        image: db_image(&img, bins, d.delta_r_m, &d.azimuth_grid_deg),
        error_db: 20.0 * rms.max(1e-300).log10(),
    })
}
