//! Digital beamforming fused with the frequency-domain matched filter.
//!
//! For one azimuth the output spectrum is `out[k] = (sum_q S[k][q] w[q]) * conj(g[k])`.
//! The efficient form accumulates across antennas before the single Golay
//! multiply; the direct form builds the full `K x K` outer product and keeps
//! its diagonal.

use num_complex::{Complex32, Complex64};

use super::SpectrumSquare;
use crate::complexity::OpCount;
use crate::error::{Result, RspError};
use crate::fxp::{FxFormat, NumericMode};

/// Scaling between physical units and a fixed-point datapath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FxScaling {
    /// Spectra are multiplied by `2^-input_shift` on entry.
    pub input_shift: u32,
    /// Golay spectra are multiplied by this factor so their magnitude stays below one.
    pub golay_scale: f64,
}

impl FxScaling {
    pub fn new(input_shift: u32, golay_len: usize) -> Self {
        // |A[m]|^2 + |B[m]|^2 = 2 L for a complementary pair
        FxScaling { input_shift, golay_scale: 1.0 / (2.0 * golay_len as f64).sqrt() }
    }

    pub fn input_scale(&self) -> f64 {
        (-(self.input_shift as f64)).exp2()
    }

    /// Factor that maps a datapath output back to physical units.
    pub fn output_scale(&self) -> f64 {
        1.0 / (self.input_scale() * self.golay_scale)
    }
}

fn check_dims(s: &SpectrumSquare, w: &[Complex64], g: &[Complex64]) -> Result<()> {
    if w.len() != s.q() || g.len() != s.k() {
        return Err(RspError::dimension(format!(
            "spectrum is {} x {}, weights {}, Golay spectrum {}",
            s.k(),
            s.q(),
            w.len(),
            g.len()
        )));
    }
    Ok(())
}

/// Efficient beamform-MF in the requested precision. The result is always in
/// physical units.
pub fn beamform_mf_efficient(
    s: &SpectrumSquare,
    w: &[Complex64],
    g_conj: &[Complex64],
    mode: NumericMode,
    scaling: FxScaling,
    counter: Option<&mut OpCount>,
) -> Result<Vec<Complex64>> {
    check_dims(s, w, g_conj)?;
    let (k, q) = (s.k(), s.q());
    let out = match mode {
        NumericMode::F64 => (0..k)
            .map(|m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (qi, wq) in w.iter().enumerate() {
                    acc += s.get(m, qi) * wq;
                }
                acc * g_conj[m]
            })
            .collect(),
        NumericMode::F32 => (0..k)
            .map(|m| {
                let mut acc = Complex32::new(0.0, 0.0);
                for (qi, wq) in w.iter().enumerate() {
                    acc += to32(s.get(m, qi)) * to32(*wq);
                }
                let o = acc * to32(g_conj[m]);
                Complex64::new(o.re as f64, o.im as f64)
            })
            .collect(),
        NumericMode::Fixed(fmt) => {
            let kernel = FxKernel::new(fmt, scaling);
            let wq: Vec<[i64; 2]> = w.iter().map(|z| kernel.raw(*z)).collect();
            (0..k)
                .map(|m| {
                    let row: Vec<[i64; 2]> =
                        (0..q).map(|qi| kernel.raw(s.get(m, qi) * scaling.input_scale())).collect();
                    let g = kernel.raw(g_conj[m] * scaling.golay_scale);
                    kernel.output(kernel.mf_sample(&row, &wq, g))
                })
                .collect()
        }
    };
    if let Some(c) = counter {
        c.cm += (k * q + k) as u64;
        c.ca_inputs += (k * q.saturating_sub(1)) as u64;
        c.mem_words = c.mem_words.max(k as u64);
    }
    Ok(out)
}

/// Literal diagonal of the outer product `(S w) g^H`, double precision only.
pub fn beamform_mf_direct(
    s: &SpectrumSquare,
    w: &[Complex64],
    g: &[Complex64],
    counter: Option<&mut OpCount>,
) -> Result<Vec<Complex64>> {
    check_dims(s, w, g)?;
    let (k, q) = (s.k(), s.q());
    let beam: Vec<Complex64> = (0..k)
        .map(|m| (0..q).map(|qi| s.get(m, qi) * w[qi]).sum())
        .collect();
    let mut outer = vec![Complex64::new(0.0, 0.0); k * k];
    for (r, b) in beam.iter().enumerate() {
        for (c, gc) in g.iter().enumerate() {
            outer[r * k + c] = b * gc.conj();
        }
    }
    let out = (0..k).map(|d| outer[d * k + d]).collect();
    if let Some(c) = counter {
        c.cm += (k * q + k * k) as u64;
        c.ca_inputs += (k * q.saturating_sub(1)) as u64;
        c.mem_words = c.mem_words.max((k + k * k) as u64);
    }
    Ok(out)
}

/// Matched filter applied per antenna before combining: `sum_q (S[k][q] w[q] conj(g[k]))`.
/// Same result as the efficient path with `Q` times the buffering.
pub fn beamform_mf_multiply_first(
    s: &SpectrumSquare,
    w: &[Complex64],
    g_conj: &[Complex64],
    counter: Option<&mut OpCount>,
) -> Result<Vec<Complex64>> {
    check_dims(s, w, g_conj)?;
    let (k, q) = (s.k(), s.q());
    let mut products = vec![Complex64::new(0.0, 0.0); k * q];
    for m in 0..k {
        for qi in 0..q {
            products[m * q + qi] = s.get(m, qi) * w[qi] * g_conj[m];
        }
    }
    let out = (0..k).map(|m| products[m * q..(m + 1) * q].iter().sum()).collect();
    if let Some(c) = counter {
        c.cm += (2 * k * q) as u64;
        c.ca_inputs += (k * q.saturating_sub(1)) as u64;
        c.mem_words = c.mem_words.max((k * q) as u64);
    }
    Ok(out)
}

#[inline]
pub(crate) fn to32(z: Complex64) -> Complex32 {
    Complex32::new(z.re as f32, z.im as f32)
}

/// Raw-integer kernels shared by the per-call and per-packet fixed-point paths.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FxKernel {
    pub fmt: FxFormat,
    pub scaling: FxScaling,
}

impl FxKernel {
    pub fn new(fmt: FxFormat, scaling: FxScaling) -> Self {
        FxKernel { fmt, scaling }
    }

    #[inline]
    pub fn raw(&self, z: Complex64) -> [i64; 2] {
        [self.fmt.raw_from_f64(z.re), self.fmt.raw_from_f64(z.im)]
    }

    /// One output bin: exact antenna MAC with a single requantization, then a
    /// complex multiply by the Golay bin requantized after its adds.
    #[inline]
    pub fn mf_sample(&self, row: &[[i64; 2]], w: &[[i64; 2]], g: [i64; 2]) -> [i64; 2] {
        let (mut re, mut im) = (0i128, 0i128);
        for (s, wq) in row.iter().zip(w) {
            let (sr, si, wr, wi) = (s[0] as i128, s[1] as i128, wq[0] as i128, wq[1] as i128);
            re += sr * wr - si * wi;
            im += sr * wi + si * wr;
        }
        let f = self.fmt.f();
        let br = self.fmt.requantize(re, f) as i128;
        let bi = self.fmt.requantize(im, f) as i128;
        let (gr, gi) = (g[0] as i128, g[1] as i128);
        [
            self.fmt.requantize(br * gr - bi * gi, f),
            self.fmt.requantize(br * gi + bi * gr, f),
        ]
    }

    #[inline]
    pub fn output(&self, v: [i64; 2]) -> Complex64 {
        let s = self.fmt.step() * self.scaling.output_scale();
        Complex64::new(v[0] as f64 * s, v[1] as f64 * s)
    }
}
