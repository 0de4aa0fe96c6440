//! Peak detection and CLEAN on the first packet's range-azimuth image.

use std::io::Write;

use num_complex::Complex64;

use crate::channel::{array_phases, synthesize_packet, DataCube, TargetRealization};
use crate::error::{Result, RspError};
use crate::params::{DerivedParams, RadarParams};
use crate::range_azimuth::{RaProcessor, RangeAzimuthImage};
use crate::waveform::TxWaveform;

/// Detections weaker than this fraction of the first one are marked as
/// leftovers of earlier subtractions.
const ARTIFACT_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Complex image value at the peak before subtraction.
    pub peak: Complex64,
    /// `|peak|`.
    pub amplitude: f64,
    pub range_bin: usize,
    pub range_m: f64,
    pub azimuth_bin: usize,
    pub azimuth_deg: f64,
    /// Filled in by Doppler estimation; NaN until then.
    pub doppler_hz: f64,
    pub velocity_mps: f64,
    pub artifact: bool,
}

#[derive(Debug, Clone)]
pub struct CleanOutcome {
    pub detections: Vec<Detection>,
    pub residue: RangeAzimuthImage,
}

/// Largest `|image|` with range bin in `range_bins` (inclusive, clipped to the
/// image). Ties go to the smallest range bin, then the smallest azimuth bin.
pub fn peak_search(image: &RangeAzimuthImage, range_bins: (usize, usize)) -> Result<(f64, usize, usize)> {
    let (k, i) = image.dims();
    let lo = range_bins.0;
    let hi = range_bins.1.min(k.saturating_sub(1));
    if k == 0 || i == 0 || lo > hi {
        return Err(RspError::validation("range gate selects no image cells"));
    }
    let mut best = (-1.0, 0, 0);
    for kk in lo..=hi {
        for ii in 0..i {
            let v = image.get(kk, ii).norm();
            if v > best.0 {
                best = (v, kk, ii);
            }
        }
    }
    Ok(best)
}

/// Response of the imaging chain to a stationary point target at image cell
/// `(range_bin, azimuth_bin)`, scaled so its value at that cell is `value`.
pub fn psf(
    processor: &RaProcessor,
    params: &RadarParams,
    waveform: &TxWaveform,
    value: Complex64,
    range_bin: usize,
    azimuth_bin: usize,
) -> Result<RangeAzimuthImage> {
    let steering = processor.steering();
    if azimuth_bin >= steering.azimuths() || range_bin + waveform.golay_len() > params.k {
        return Err(RspError::dimension(format!(
            "PSF cell ({range_bin}, {azimuth_bin}) outside the imaging grid"
        )));
    }
    // Inject near the expected magnitude so a fixed-point datapath sees realistic levels.
    let gain = (params.q * waveform.golay_len()) as f64;
    let dummy = TargetRealization {
        amplitude: Complex64::new(value.norm().max(f64::MIN_POSITIVE) / gain, 0.0),
        mean_power: 0.0,
        delay_bin: range_bin,
        doppler_hz: 0.0,
        steer_phase_rad: array_phases(params, steering.azimuth_deg(azimuth_bin)),
    };
    let packet = synthesize_packet(waveform, &[dummy], 0, params.k, params.q, 0.0);
    let cube = DataCube::from_packets(params.k, params.q, vec![packet])?;
    let mut img = processor.image(&cube, 0)?;
    let at = img.get(range_bin, azimuth_bin);
    let (k, i) = img.dims();
    let scale = if at.norm() > 0.0 { value / at } else { Complex64::new(0.0, 0.0) };
    for ii in 0..i {
        for kk in 0..k {
            img.set(kk, ii, img.get(kk, ii) * scale);
        }
    }
    if at.norm() == 0.0 {
        img.set(range_bin, azimuth_bin, value);
    }
    Ok(img)
}

/// Iterative detect-and-subtract. Stops after `p_tilde` detections or once the
/// gated residue peak falls below `residue_threshold` times the first peak
/// (a threshold of zero disables that rule).
pub fn clean(
    image: &RangeAzimuthImage,
    processor: &RaProcessor,
    params: &RadarParams,
    derived: &DerivedParams,
    waveform: &TxWaveform,
    p_tilde: usize,
    residue_threshold: f64,
) -> Result<CleanOutcome> {
    if p_tilde == 0 {
        return Err(RspError::validation("CLEAN needs at least one iteration"));
    }
    let mut residue = image.clone();
    let mut detections: Vec<Detection> = Vec::with_capacity(p_tilde);
    let (k, i) = residue.dims();
    for _ in 0..p_tilde {
        let (amp, kb, ib) = peak_search(&residue, derived.range_bins)?;
        if let Some(first) = detections.first() {
            if residue_threshold > 0.0 && amp < residue_threshold * first.amplitude {
                break;
            }
        }
        let value = residue.get(kb, ib);
        let artifact = detections.first().is_some_and(|f| amp <= ARTIFACT_RATIO * f.amplitude);
        detections.push(Detection {
            peak: value,
            amplitude: amp,
            range_bin: kb,
            range_m: derived.range_of_bin(kb),
            azimuth_bin: ib,
            azimuth_deg: processor.steering().azimuth_deg(ib),
            doppler_hz: f64::NAN,
            velocity_mps: f64::NAN,
            artifact,
        });
        if kb + waveform.golay_len() > params.k {
            // No target can sit here; clear the cell so the search moves on.
            residue.set(kb, ib, Complex64::new(0.0, 0.0));
            continue;
        }
        let h = psf(processor, params, waveform, value, kb, ib)?;
        for ii in 0..i {
            for kk in 0..k {
                residue.set(kk, ii, residue.get(kk, ii) - h.get(kk, ii));
            }
        }
        // The complex scaling cancels the cell up to rounding; make it exact.
        residue.set(kb, ib, Complex64::new(0.0, 0.0));
    }
    Ok(CleanOutcome { detections, residue })
}

/// `trial,iteration,amp,range_m,azimuth_deg,velocity_mps,artifact`
pub fn write_detections_csv(
    mut w: impl Write,
    rows: &[(usize, Vec<Detection>)],
    header: bool,
) -> Result<()> {
    if header {
        writeln!(w, "trial,iteration,amp,range_m,azimuth_deg,velocity_mps,artifact")?;
    }
    for (trial, dets) in rows {
        for (it, d) in dets.iter().enumerate() {
            writeln!(
                w,
                "{trial},{},{:.9e},{:.6},{:.6},{:.6},{}",
                it + 1,
                d.amplitude,
                d.range_m,
                d.azimuth_deg,
                d.velocity_mps,
                d.artifact as u8
            )?;
        }
    }
    Ok(())
}
