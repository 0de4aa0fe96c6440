//! Range-azimuth imaging: per-antenna DFT, fused beamform/matched filter and
//! inverse DFT for every azimuth of the steering grid.

mod beamform;
mod dft;

use std::io::Write;

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;

pub use beamform::{
    beamform_mf_direct, beamform_mf_efficient, beamform_mf_multiply_first, FxScaling,
};
pub use dft::{dft, idft, FftBank};

use beamform::{to32, FxKernel};
use crate::channel::{array_phases, DataCube};
use crate::complexity::OpCount;
use crate::error::{Result, RspError};
use crate::fxp::NumericMode;
use crate::params::{DerivedParams, RadarParams};
use crate::waveform::TxWaveform;

/// Forward DFT of one packet, stored bin-major: `get(m, q)` is bin `m` of antenna `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSquare {
    k: usize,
    q: usize,
    data: Vec<Complex64>,
}

impl SpectrumSquare {
    /// Builds from antenna-major spectra (`q` rows of `k` bins).
    pub fn from_antenna_spectra(k: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        let q = rows.len();
        if q == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(RspError::dimension(format!("expected {q} antenna spectra of {k} bins")));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); k * q];
        for (qi, row) in rows.iter().enumerate() {
            for (m, z) in row.iter().enumerate() {
                data[m * q + qi] = *z;
            }
        }
        Ok(SpectrumSquare { k, q, data })
    }

    /// DFT of every antenna row of packet `n`. Double precision in `F64` mode,
    /// single precision otherwise.
    pub fn from_packet(cube: &DataCube, n: usize, fft: &FftBank, mode: NumericMode) -> Result<Self> {
        let (k, q, packets) = cube.dims();
        if n >= packets {
            return Err(RspError::dimension(format!("packet {n} outside 0..{packets}")));
        }
        if fft.len() != k {
            return Err(RspError::dimension(format!("FFT length {} != K = {k}", fft.len())));
        }
        let rows: Vec<Vec<Complex64>> = (0..q)
            .map(|qi| {
                let x = cube.antenna(n, qi);
                if mode == NumericMode::F64 {
                    let mut buf = x.to_vec();
                    fft.forward64(&mut buf);
                    buf
                } else {
                    let mut buf: Vec<Complex32> = x.iter().map(|z| to32(*z)).collect();
                    fft.forward32(&mut buf);
                    buf.iter().map(|z| Complex64::new(z.re as f64, z.im as f64)).collect()
                }
            })
            .collect();
        Self::from_antenna_spectra(k, &rows)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, m: usize, q: usize) -> Complex64 {
        self.data[m * self.q + q]
    }

    /// The `Q` antenna values of bin `m`.
    pub fn bin(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.q..(m + 1) * self.q]
    }
}

/// Beam weights `w_i[q] = exp(-j k_c d q sin(phi_i))`, one row per azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMatrix {
    azimuths_deg: Vec<f64>,
    rows: Vec<Vec<Complex64>>,
}

impl SteeringMatrix {
    pub fn new(params: &RadarParams, derived: &DerivedParams) -> Self {
        let rows = derived
            .azimuth_grid_deg
            .iter()
            .map(|&az| {
                array_phases(params, az)
                    .into_iter()
                    .map(|ph| Complex64::from_polar(1.0, -ph))
                    .collect()
            })
            .collect();
        SteeringMatrix { azimuths_deg: derived.azimuth_grid_deg.clone(), rows }
    }

    pub fn from_rows(azimuths_deg: Vec<f64>, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let q = rows.first().map_or(0, Vec::len);
        if rows.len() != azimuths_deg.len() || rows.iter().any(|r| r.len() != q) {
            return Err(RspError::dimension("steering rows do not match the azimuth grid"));
        }
        Ok(SteeringMatrix { azimuths_deg, rows })
    }

    pub fn azimuths(&self) -> usize {
        self.rows.len()
    }

    pub fn antennas(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.rows[i]
    }

    pub fn azimuth_deg(&self, i: usize) -> f64 {
        self.azimuths_deg[i]
    }
}

/// `K x I` complex image, stored column by column (`data[i * K + k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAzimuthImage {
    k: usize,
    i: usize,
    data: Vec<Complex64>,
    pub mode: NumericMode,
}

impl RangeAzimuthImage {
    pub fn zeros(k: usize, i: usize, mode: NumericMode) -> Self {
        RangeAzimuthImage { k, i, data: vec![Complex64::new(0.0, 0.0); k * i], mode }
    }

    pub fn from_columns(k: usize, columns: Vec<Vec<Complex64>>, mode: NumericMode) -> Result<Self> {
        if columns.iter().any(|c| c.len() != k) {
            return Err(RspError::dimension(format!("every column must hold {k} range bins")));
        }
        let i = columns.len();
        Ok(RangeAzimuthImage { k, i, data: columns.concat(), mode })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.k, self.i)
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> Complex64 {
        self.data[i * self.k + k]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, v: Complex64) {
        self.data[i * self.k + k] = v;
    }

    pub fn column(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Magnitude as CSV: one row per range bin, one column per azimuth.
    pub fn write_magnitude_csv(&self, mut w: impl Write, azimuths_deg: &[f64]) -> Result<()> {
        let header: Vec<String> = if azimuths_deg.len() == self.i {
            azimuths_deg.iter().map(|a| format!("az_{a}")).collect()
        } else {
            (0..self.i).map(|i| format!("az_bin_{i}")).collect()
        };
        writeln!(w, "range_bin,{}", header.join(","))?;
        for k in 0..self.k {
            write!(w, "{k}")?;
            for i in 0..self.i {
                write!(w, ",{:.6e}", self.get(k, i).norm())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Precomputed state for imaging packets of one CPI in one numeric mode.
#[derive(Debug, Clone)]
pub struct RaProcessor {
    k: usize,
    fft: FftBank,
    steering: SteeringMatrix,
    /// Conjugated Golay spectrum per packet.
    g_conj: Vec<Vec<Complex64>>,
    mode: NumericMode,
    scaling: FxScaling,
}

impl RaProcessor {
    pub fn new(
        params: &RadarParams,
        waveform: &TxWaveform,
        steering: SteeringMatrix,
        mode: NumericMode,
    ) -> Result<Self> {
        if waveform.k() != params.k || steering.antennas() != params.q {
            return Err(RspError::dimension("waveform or steering does not match the parameters"));
        }
        let g_conj = (0..waveform.packets())
            .map(|n| waveform.spectrum(n).iter().map(|g| g.conj()).collect())
            .collect();
        Ok(RaProcessor {
            k: params.k,
            fft: FftBank::new(params.k)?,
            steering,
            g_conj,
            mode,
            scaling: FxScaling::new(params.fx_input_shift, waveform.golay_len()),
        })
    }

    pub fn mode(&self) -> NumericMode {
        self.mode
    }

    pub fn steering(&self) -> &SteeringMatrix {
        &self.steering
    }

    pub fn scaling(&self) -> FxScaling {
        self.scaling
    }

    /// Factor mapping physical image values into the fixed-point datapath's units.
    pub fn fx_domain_scale(&self) -> f64 {
        self.scaling.input_scale() * self.scaling.golay_scale
    }

    pub fn spectrum(&self, cube: &DataCube, n: usize) -> Result<SpectrumSquare> {
        SpectrumSquare::from_packet(cube, n, &self.fft, self.mode)
    }

    /// Full image of packet `n`.
    pub fn image(&self, cube: &DataCube, n: usize) -> Result<RangeAzimuthImage> {
        let all: Vec<usize> = (0..self.steering.azimuths()).collect();
        let cols = self.columns(cube, n, &all)?;
        RangeAzimuthImage::from_columns(self.k, cols, self.mode)
    }

    /// Full image of packet `n`, adding the beamform-MF operation counts to `counter`.
    pub fn image_counted(
        &self,
        cube: &DataCube,
        n: usize,
        counter: &mut OpCount,
    ) -> Result<RangeAzimuthImage> {
        let s = self.spectrum(cube, n)?;
        let g = self.packet_golay(n)?;
        let mut cols = Vec::with_capacity(self.steering.azimuths());
        for i in 0..self.steering.azimuths() {
            let mut c = OpCount::default();
            let spec =
                beamform_mf_efficient(&s, self.steering.row(i), g, self.mode, self.scaling, Some(&mut c))?;
            counter.accumulate(&c);
            cols.push(self.inverse(spec));
        }
        RangeAzimuthImage::from_columns(self.k, cols, self.mode)
    }

    /// Image columns for the listed azimuth indices of packet `n`. Each column
    /// is bit-identical to the same column of [`RaProcessor::image`].
    pub fn columns(&self, cube: &DataCube, n: usize, azimuths: &[usize]) -> Result<Vec<Vec<Complex64>>> {
        if let Some(&bad) = azimuths.iter().find(|&&i| i >= self.steering.azimuths()) {
            return Err(RspError::dimension(format!("azimuth index {bad} out of range")));
        }
        let s = self.spectrum(cube, n)?;
        let g = self.packet_golay(n)?;
        let work = |&i: &usize| self.column_from_spectrum(&s, g, i);
        // Columns are independent, so the parallel result matches serial order bit for bit.
        let cols = if azimuths.len() > 8 {
            azimuths.par_iter().map(work).collect()
        } else {
            azimuths.iter().map(work).collect()
        };
        Ok(cols)
    }

    fn packet_golay(&self, n: usize) -> Result<&[Complex64]> {
        self.g_conj
            .get(n)
            .map(Vec::as_slice)
            .ok_or_else(|| RspError::dimension(format!("no waveform row for packet {n}")))
    }

    fn column_from_spectrum(&self, s: &SpectrumSquare, g_conj: &[Complex64], i: usize) -> Vec<Complex64> {
        let w = self.steering.row(i);
        let q = s.q();
        match self.mode {
            NumericMode::F64 => {
                let mut buf: Vec<Complex64> = (0..self.k)
                    .map(|m| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (x, wq) in s.bin(m).iter().zip(w) {
                            acc += x * wq;
                        }
                        acc * g_conj[m]
                    })
                    .collect();
                self.fft.inverse64(&mut buf);
                buf
            }
            NumericMode::F32 => {
                let w32: Vec<Complex32> = w.iter().map(|z| to32(*z)).collect();
                let mut buf: Vec<Complex32> = (0..self.k)
                    .map(|m| {
                        let mut acc = Complex32::new(0.0, 0.0);
                        for (x, wq) in s.bin(m).iter().zip(&w32) {
                            acc += to32(*x) * wq;
                        }
                        acc * to32(g_conj[m])
                    })
                    .collect();
                self.fft.inverse32(&mut buf);
                buf.iter().map(|z| Complex64::new(z.re as f64, z.im as f64)).collect()
            }
            NumericMode::Fixed(fmt) => {
                let kernel = FxKernel::new(fmt, self.scaling);
                let wq: Vec<[i64; 2]> = w.iter().map(|z| kernel.raw(*z)).collect();
                let in_scale = self.scaling.input_scale();
                let mut row = vec![[0i64; 2]; q];
                let spec: Vec<Complex64> = (0..self.k)
                    .map(|m| {
                        for (dst, x) in row.iter_mut().zip(s.bin(m)) {
                            *dst = kernel.raw(x * in_scale);
                        }
                        let g = kernel.raw(g_conj[m] * self.scaling.golay_scale);
                        kernel.output(kernel.mf_sample(&row, &wq, g))
                    })
                    .collect();
                self.inverse(spec)
            }
        }
    }

    /// Single-precision inverse DFT of a physical-unit spectrum.
    fn inverse(&self, spec: Vec<Complex64>) -> Vec<Complex64> {
        if self.mode == NumericMode::F64 {
            let mut buf = spec;
            self.fft.inverse64(&mut buf);
            return buf;
        }
        let mut buf: Vec<Complex32> = spec.iter().map(|z| to32(*z)).collect();
        self.fft.inverse32(&mut buf);
        buf.iter().map(|z| Complex64::new(z.re as f64, z.im as f64)).collect()
    }
}

/// Image of packet `n` built from scratch.
pub fn range_azimuth_image(
    cube: &DataCube,
    n: usize,
    waveform: &TxWaveform,
    steering: &SteeringMatrix,
    params: &RadarParams,
    mode: NumericMode,
) -> Result<RangeAzimuthImage> {
    RaProcessor::new(params, waveform, steering.clone(), mode)?.image(cube, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize_targets, synthesize_cube, trial_rng};
    use crate::fxp::FxFormat;
    use crate::params::TargetSpec;
    use crate::waveform::{build_waveform, golay_pair};
    use rand::{Rng, SeedableRng};

    fn small() -> RadarParams {
        RadarParams {
            k: 256,
            golay_len: 128,
            q: 8,
            n: 2,
            delta_phi_deg: 5.0,
            ts_s: 2.0 * 0.3 / crate::params::SPEED_OF_LIGHT,
            range_gate_m: (0.0, 36.0),
            ..Default::default()
        }
    }

    fn rand_c(rng: &mut impl Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn target(r: f64, az: f64, amp: f64) -> TargetSpec {
        TargetSpec {
            range_m: r,
            azimuth_deg: az,
            velocity_mps: 0.0,
            mean_rcs_sqm: 1.0,
            fixed_amplitude: Some(amp),
        }
    }

    fn noiseless_image(p: &RadarParams, targets: &[TargetSpec], mode: NumericMode) -> RangeAzimuthImage {
        let d = p.derive().unwrap();
        let wf = build_waveform(p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(5, 0);
        let real = realize_targets(targets, p, &mut rng).unwrap();
        let cube = synthesize_cube(&wf, &real, f64::INFINITY, p, &d, &mut rng).unwrap();
        range_azimuth_image(&cube, 0, &wf, &SteeringMatrix::new(p, &d), p, mode).unwrap()
    }

    fn argmax(img: &RangeAzimuthImage) -> (usize, usize) {
        let (k, i) = img.dims();
        let mut best = (0, 0, -1.0);
        for ii in 0..i {
            for kk in 0..k {
                let v = img.get(kk, ii).norm();
                if v > best.2 {
                    best = (kk, ii, v);
                }
            }
        }
        (best.0, best.1)
    }

    #[test]
    fn identity_weights_pass_spectrum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let col: Vec<Complex64> = (0..8).map(|_| rand_c(&mut rng)).collect();
        let s = SpectrumSquare::from_antenna_spectra(8, &[col.clone()]).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        let sc = FxScaling::new(20, 4);
        let out = beamform_mf_efficient(&s, &ones[..1], &ones, NumericMode::F64, sc, None).unwrap();
        assert_eq!(out, col);
    }

    #[test]
    fn efficient_matches_direct_and_multiply_first() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let rows: Vec<Vec<Complex64>> =
                (0..4).map(|_| (0..8).map(|_| rand_c(&mut rng)).collect()).collect();
            let s = SpectrumSquare::from_antenna_spectra(8, &rows).unwrap();
            let w: Vec<Complex64> = (0..4).map(|_| rand_c(&mut rng)).collect();
            let g: Vec<Complex64> = (0..8).map(|_| rand_c(&mut rng)).collect();
            let gc: Vec<Complex64> = g.iter().map(|z| z.conj()).collect();
            let sc = FxScaling::new(0, 1);
            let e = beamform_mf_efficient(&s, &w, &gc, NumericMode::F64, sc, None).unwrap();
            let d = beamform_mf_direct(&s, &w, &g, None).unwrap();
            let m = beamform_mf_multiply_first(&s, &w, &gc, None).unwrap();
            for ((a, b), c) in e.iter().zip(&d).zip(&m) {
                assert!((a - b).norm() < 1e-10);
                assert!((a - c).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_input_and_counts() {
        let s = SpectrumSquare::from_antenna_spectra(4, &vec![vec![Complex64::new(0.0, 0.0); 4]; 2]).unwrap();
        let w = vec![Complex64::new(1.0, 0.0); 2];
        let g = vec![Complex64::new(1.0, 0.0); 4];
        let mut cd = OpCount::default();
        let mut ce = OpCount::default();
        let d = beamform_mf_direct(&s, &w, &g, Some(&mut cd)).unwrap();
        assert!(d.iter().all(|z| z.norm() == 0.0));
        beamform_mf_efficient(&s, &w, &g, NumericMode::F64, FxScaling::new(0, 1), Some(&mut ce)).unwrap();
        assert_eq!(ce.cm, 12);
        assert_eq!(ce.ca_inputs, 4);
        assert_eq!(cd.cm - 8, 4 * (ce.cm - 8));
    }

    #[test]
    fn dimension_mismatch() {
        let s = SpectrumSquare::from_antenna_spectra(4, &vec![vec![Complex64::new(0.0, 0.0); 4]; 2]).unwrap();
        let w = vec![Complex64::new(1.0, 0.0); 3];
        let g = vec![Complex64::new(1.0, 0.0); 4];
        assert!(beamform_mf_direct(&s, &w, &g, None).is_err());
    }

    #[test]
    fn steering_unit_modulus() {
        let p = RadarParams::default();
        let st = SteeringMatrix::new(&p, &p.derive().unwrap());
        assert_eq!(st.azimuths(), 181);
        for i in 0..st.azimuths() {
            assert_eq!(st.row(i)[0], Complex64::new(1.0, 0.0));
            assert!(st.row(i).iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn calibration_peak() {
        let p = small();
        let img = noiseless_image(&p, &[target(9.0, 0.0, 1.0)], NumericMode::F64);
        let (k, i) = argmax(&img);
        assert_eq!((k, i), (30, 18));
        let peak = img.get(k, i).norm();
        assert!((peak - (p.q * p.golay_len) as f64).abs() < 1e-9, "{peak}");
    }

    #[test]
    fn broadside_symmetry() {
        let p = small();
        let img = noiseless_image(&p, &[target(6.0, 0.0, 1.0)], NumericMode::F64);
        let (_, i) = img.dims();
        for a in 0..i / 2 {
            let l = img.get(20, a).norm();
            let r = img.get(20, i - 1 - a).norm();
            assert!((l - r).abs() < 1e-9 * img.max_abs(), "{a}: {l} {r}");
        }
    }

    #[test]
    fn fixed_point_argmax_matches_float() {
        let p = small();
        let t = [target(12.0, 30.0, 1.0)];
        let f = noiseless_image(&p, &t, NumericMode::F32);
        let x = noiseless_image(&p, &t, NumericMode::Fixed(FxFormat::new(24, 5).unwrap()));
        assert_eq!(argmax(&f), argmax(&x));
        assert_eq!(argmax(&f), (40, 24));
    }

    #[test]
    fn columns_match_full_image() {
        let p = small();
        let d = p.derive().unwrap();
        let wf = build_waveform(&p, &golay_pair(p.golay_len).unwrap()).unwrap();
        let mut rng = trial_rng(8, 1);
        let real = realize_targets(&[target(5.0, -20.0, 1.0)], &p, &mut rng).unwrap();
        let cube = synthesize_cube(&wf, &real, 0.0, &p, &d, &mut rng).unwrap();
        for mode in [NumericMode::F64, NumericMode::F32, NumericMode::Fixed(FxFormat::new(19, 5).unwrap())] {
            let proc = RaProcessor::new(&p, &wf, SteeringMatrix::new(&p, &d), mode).unwrap();
            let img = proc.image(&cube, 1).unwrap();
            let cols = proc.columns(&cube, 1, &[3, 30]).unwrap();
            assert_eq!(cols[0], img.column(3));
            assert_eq!(cols[1], img.column(30));
        }
    }

    #[test]
    fn csv_dump_shape() {
        let img = RangeAzimuthImage::zeros(3, 2, NumericMode::F32);
        let mut out = Vec::new();
        img.write_magnitude_csv(&mut out, &[-90.0, 90.0]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("range_bin,az_-90,az_90"));
    }
}
