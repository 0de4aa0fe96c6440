//! Received data cube synthesis for point targets in white noise.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Result, RspError};
use crate::params::{DerivedParams, RadarParams, TargetSpec};
use crate::waveform::TxWaveform;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent, reproducible RNG stream for one Monte Carlo trial.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let seed = splitmix64(master_seed ^ splitmix64(trial_index.wrapping_add(0x5851_f42d)));
    ChaCha8Rng::seed_from_u64(seed)
}

/// Received samples for one CPI.
///
/// Each packet is stored as `Q` contiguous fast-time rows of `K` samples, so
/// `packet(n)[q * K + k]` is sample `k` of antenna `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    k: usize,
    q: usize,
    packets: Vec<Vec<Complex64>>,
}

impl DataCube {
    pub fn zeros(k: usize, q: usize, n: usize) -> Self {
        DataCube { k, q, packets: vec![vec![Complex64::new(0.0, 0.0); k * q]; n] }
    }

    pub fn from_packets(k: usize, q: usize, packets: Vec<Vec<Complex64>>) -> Result<Self> {
        if packets.iter().any(|p| p.len() != k * q) {
            return Err(RspError::dimension(format!("every packet must hold {k} x {q} samples")));
        }
        Ok(DataCube { k, q, packets })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.k, self.q, self.packets.len())
    }

    pub fn packet(&self, n: usize) -> &[Complex64] {
        &self.packets[n]
    }

    pub fn antenna(&self, n: usize, q: usize) -> &[Complex64] {
        &self.packets[n][q * self.k..(q + 1) * self.k]
    }

    pub fn get(&self, k: usize, q: usize, n: usize) -> Complex64 {
        self.packets[n][q * self.k + k]
    }

    /// Little-endian dump: `K, Q, N` as u32, then interleaved re/im f64 with
    /// `k` fastest, then `q`, then `n`.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        for dim in [self.k, self.q, self.packets.len()] {
            let dim = u32::try_from(dim).map_err(|_| RspError::dimension("cube too large"))?;
            w.write_all(&dim.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.k * self.q * 16);
        for p in &self.packets {
            buf.clear();
            for z in p {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut dims = [0usize; 3];
        for d in &mut dims {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            *d = u32::from_le_bytes(b) as usize;
        }
        let [k, q, n] = dims;
        let mut packets = Vec::with_capacity(n);
        let mut buf = vec![0u8; k * q * 16];
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            let p = buf
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                    let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                    Complex64::new(re, im)
                })
                .collect();
            packets.push(p);
        }
        Ok(DataCube { k, q, packets })
    }
}

/// A target with its random quantities drawn for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRealization {
    pub amplitude: Complex64,
    /// Expected `|amplitude|^2`; sets the SNR reference.
    pub mean_power: f64,
    pub delay_bin: usize,
    pub doppler_hz: f64,
    /// Per-antenna phase `(2 pi / lambda) d q sin(phi)`.
    pub steer_phase_rad: Vec<f64>,
}

/// Swerling-1 amplitude: the cross-section is exponential with the given mean,
/// the amplitude is its square root.
pub fn sample_rcs(mean_rcs: f64, rng: &mut impl Rng) -> Result<f64> {
    if !(mean_rcs.is_finite() && mean_rcs > 0.0) {
        return Err(RspError::validation("mean RCS must be positive"));
    }
    let e: f64 = Exp1.sample(rng);
    Ok((mean_rcs * e).sqrt())
}

/// Antenna phases for a plane wave from `azimuth_deg`.
pub fn array_phases(params: &RadarParams, azimuth_deg: f64) -> Vec<f64> {
    let kc = 2.0 * PI / params.lambda();
    let s = azimuth_deg.to_radians().sin();
    (0..params.q).map(|q| kc * params.element_spacing() * q as f64 * s).collect()
}

pub fn realize_targets(
    specs: &[TargetSpec],
    params: &RadarParams,
    rng: &mut impl Rng,
) -> Result<Vec<TargetRealization>> {
    let delta_r = params.delta_r();
    specs
        .iter()
        .map(|t| {
            t.validate(params)?;
            let delay_bin = (t.range_m / delta_r).round() as usize;
            if delay_bin + params.golay_len > params.k {
                return Err(RspError::validation(format!(
                    "target at {} m lands outside the packet",
                    t.range_m
                )));
            }
            let (amplitude, mean_power) = match t.fixed_amplitude {
                Some(a) => (Complex64::new(a, 0.0), a * a),
                None => {
                    let mag = sample_rcs(t.mean_rcs_sqm, rng)?;
                    let phase = rng.random_range(0.0..2.0 * PI);
                    (Complex64::from_polar(mag, phase), t.mean_rcs_sqm)
                }
            };
            Ok(TargetRealization {
                amplitude,
                mean_power,
                delay_bin,
                doppler_hz: 2.0 * t.velocity_mps / params.lambda(),
                steer_phase_rad: array_phases(params, t.azimuth_deg),
            })
        })
        .collect()
}

/// Draw targets uniformly over the range gate, the azimuth span and the
/// velocity span, one per entry of `mean_rcs`. With `on_grid`, range and
/// azimuth are grid points (the echo delay is bin-quantized either way).
pub fn random_targets(
    params: &RadarParams,
    mean_rcs: &[f64],
    on_grid: bool,
    rng: &mut impl Rng,
) -> Vec<TargetSpec> {
    let (lo, hi) = params.range_gate_m;
    let count = params.azimuth_count();
    let dr = params.delta_r();
    let bins = ((lo / dr).ceil() as usize, (hi / dr).floor() as usize);
    mean_rcs
        .iter()
        .map(|&m| TargetSpec {
            range_m: if on_grid {
                (rng.random_range(bins.0..=bins.1) as f64 * dr).clamp(lo, hi)
            } else {
                rng.random_range(lo..=hi)
            },
            azimuth_deg: if on_grid {
                -90.0 + rng.random_range(0..count) as f64 * params.delta_phi_deg
            } else {
                rng.random_range(-90.0..=90.0)
            },
            velocity_mps: rng.random_range(-params.v_span_mps..=params.v_span_mps),
            mean_rcs_sqm: m,
            fixed_amplitude: None,
        })
        .collect()
}

/// Noiseless returns for packet `n`.
pub fn synthesize_packet(
    waveform: &TxWaveform,
    realizations: &[TargetRealization],
    n: usize,
    k: usize,
    q: usize,
    t_pri_s: f64,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); k * q];
    let row = waveform.row(n);
    let chips = &row[..waveform.golay_len()];
    for t in realizations {
        let slow = Complex64::from_polar(1.0, -2.0 * PI * t.doppler_hz * n as f64 * t_pri_s);
        let base = t.amplitude * slow;
        for (qi, &phase) in t.steer_phase_rad.iter().enumerate().take(q) {
            let coef = base * Complex64::from_polar(1.0, phase);
            let dst = &mut out[qi * k + t.delay_bin..qi * k + t.delay_bin + chips.len()];
            for (d, &c) in dst.iter_mut().zip(chips) {
                *d += coef * c;
            }
        }
    }
    out
}

/// Noise variance for an SNR referenced to the strongest target's mean power.
pub fn noise_variance(realizations: &[TargetRealization], snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    let reference = realizations
        .iter()
        .map(|t| t.mean_power)
        .fold(0.0, f64::max);
    let reference = if reference > 0.0 { reference } else { 1.0 };
    reference * 10f64.powf(-snr_db / 10.0)
}

pub fn synthesize_cube(
    waveform: &TxWaveform,
    realizations: &[TargetRealization],
    snr_db: f64,
    params: &RadarParams,
    derived: &DerivedParams,
    rng: &mut impl Rng,
) -> Result<DataCube> {
    if waveform.k() != params.k || waveform.packets() < params.n {
        return Err(RspError::dimension("waveform does not match the radar parameters"));
    }
    let sigma2 = noise_variance(realizations, snr_db);
    let sigma = (sigma2 / 2.0).sqrt();
    let mut packets = Vec::with_capacity(params.n);
    for n in 0..params.n {
        let mut p = synthesize_packet(waveform, realizations, n, params.k, params.q, derived.t_pri_s);
        if sigma > 0.0 {
            for z in p.iter_mut() {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *z += Complex64::new(sigma * re, sigma * im);
            }
        }
        packets.push(p);
    }
    DataCube::from_packets(params.k, params.q, packets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{build_waveform, golay_pair};

    fn small() -> RadarParams {
        RadarParams {
            k: 256,
            golay_len: 128,
            q: 4,
            n: 6,
            ts_s: 2.0 * 0.25 / crate::params::SPEED_OF_LIGHT,
            range_gate_m: (0.0, 30.0),
            ..Default::default()
        }
    }

    fn target(r: f64, az: f64, v: f64, amp: f64) -> TargetSpec {
        TargetSpec {
            range_m: r,
            azimuth_deg: az,
            velocity_mps: v,
            mean_rcs_sqm: 1.0,
            fixed_amplitude: Some(amp),
        }
    }

    #[test]
    fn swerling_mean_power() {
        let mut rng = trial_rng(1, 0);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_rcs(10.0, &mut rng).unwrap().powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 10.0).abs() < 0.3, "{mean}");
        assert!(sample_rcs(0.0, &mut rng).is_err());
    }

    #[test]
    fn realization_terms() {
        let p = RadarParams::default();
        let mut rng = trial_rng(0, 0);
        let r = realize_targets(&[target(8.5, 0.0, 0.0, 1.0)], &p, &mut rng).unwrap();
        assert_eq!(r[0].delay_bin, 100);
        assert_eq!(r[0].doppler_hz, 0.0);
        assert!(r[0].steer_phase_rad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn noise_only_variance() {
        let mut p = small();
        p.n = 100;
        p.q = 4;
        let d = p.derive().unwrap();
        let w = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(5, 1);
        let cube = synthesize_cube(&w, &[], 0.0, &p, &d, &mut rng).unwrap();
        let (k, q, n) = cube.dims();
        let total = (k * q * n) as f64;
        let var: f64 = (0..n).flat_map(|i| cube.packet(i).iter()).map(|z| z.norm_sqr()).sum::<f64>() / total;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn noiseless_static_target_copies_waveform() {
        let p = small();
        let d = p.derive().unwrap();
        let w = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(0, 0);
        let r = realize_targets(&[target(5.0, 0.0, 0.0, 2.0)], &p, &mut rng).unwrap();
        let kp = r[0].delay_bin;
        let cube = synthesize_cube(&w, &r, f64::INFINITY, &p, &d, &mut rng).unwrap();
        for n in 0..p.n {
            for q in 0..p.q {
                for k in 0..p.k {
                    let g = if k >= kp { w.row(n).get(k - kp).copied().unwrap_or(0.0) } else { 0.0 };
                    assert_eq!(cube.get(k, q, n), Complex64::new(2.0 * g, 0.0));
                }
            }
        }
    }

    #[test]
    fn linear_in_targets() {
        let p = small();
        let d = p.derive().unwrap();
        let w = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(0, 0);
        let a = realize_targets(&[target(5.0, 10.0, 3.0, 1.5)], &p, &mut rng).unwrap();
        let b = realize_targets(&[target(12.0, -40.0, -7.0, 0.5)], &p, &mut rng).unwrap();
        let both: Vec<_> = a.iter().chain(&b).cloned().collect();
        let ca = synthesize_cube(&w, &a, f64::INFINITY, &p, &d, &mut rng).unwrap();
        let cb = synthesize_cube(&w, &b, f64::INFINITY, &p, &d, &mut rng).unwrap();
        let cab = synthesize_cube(&w, &both, f64::INFINITY, &p, &d, &mut rng).unwrap();
        for n in 0..p.n {
            for ((x, y), z) in ca.packet(n).iter().zip(cb.packet(n)).zip(cab.packet(n)) {
                assert!((x + y - z).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn doppler_and_spatial_progressions() {
        let p = small();
        let d = p.derive().unwrap();
        let w = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(0, 0);
        let r = realize_targets(&[target(7.0, 25.0, 12.0, 1.0)], &p, &mut rng).unwrap();
        let cube = synthesize_cube(&w, &r, f64::INFINITY, &p, &d, &mut rng).unwrap();
        let fd = r[0].doppler_hz;
        let step_n = Complex64::from_polar(1.0, -2.0 * PI * fd * d.t_pri_s);
        let kc = 2.0 * PI / d.lambda_m;
        let step_q = Complex64::from_polar(1.0, kc * d.d_m * 25f64.to_radians().sin());
        let k = r[0].delay_bin + 3;
        for n in 0..p.n - 1 {
            for q in 0..p.q - 1 {
                let x = cube.get(k, q, n);
                // the PTM order flips between sequences a and b, so compare chip-normalised values
                let gn = w.row(n)[3];
                let gn1 = w.row(n + 1)[3];
                let ratio_n = (cube.get(k, q, n + 1) / gn1) / (x / gn);
                assert!((ratio_n - step_n).norm() < 1e-12);
                let ratio_q = cube.get(k, q + 1, n) / x;
                assert!((ratio_q - step_q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let p = small();
        let d = p.derive().unwrap();
        let w = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let make = || {
            let mut rng = trial_rng(42, 3);
            let spec = random_targets(&p, &[10.0, 5.0], false, &mut rng);
            let r = realize_targets(&spec, &p, &mut rng).unwrap();
            synthesize_cube(&w, &r, 0.0, &p, &d, &mut rng).unwrap()
        };
        assert_eq!(make(), make());
        assert_ne!(trial_rng(42, 3).random::<u64>(), trial_rng(42, 4).random::<u64>());
    }

    #[test]
    fn grid_placement_falls_on_grid() {
        let p = small();
        let d = p.derive().unwrap();
        let mut rng = trial_rng(5, 0);
        for _ in 0..50 {
            for t in random_targets(&p, &[1.0, 1.0], true, &mut rng) {
                assert!(d.azimuth_grid_deg.contains(&t.azimuth_deg), "{}", t.azimuth_deg);
                let bin = (t.range_m / d.delta_r_m).round();
                assert!((t.range_m - bin * d.delta_r_m).abs() < 1e-12);
                t.validate(&p).unwrap();
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let p = RadarParams { n: 3, ..small() };
        let d = p.derive().unwrap();
        let w = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(9, 0);
        let cube = synthesize_cube(&w, &[], 3.0, &p, &d, &mut rng).unwrap();
        let mut bytes = Vec::new();
        cube.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 12 + 16 * p.k * p.q * p.n);
        assert_eq!(&bytes[..4], &(p.k as u32).to_le_bytes());
        // second sample of the payload is k = 1, q = 0, n = 0
        let re = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
        assert_eq!(re, cube.get(1, 0, 0).re);
        assert_eq!(DataCube::read_from(&bytes[..]).unwrap(), cube);
    }
}
