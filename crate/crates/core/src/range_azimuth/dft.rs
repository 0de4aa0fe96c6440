use std::sync::Arc;

use num_complex::{Complex32, Complex64};
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, RspError};

fn check_len(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(RspError::validation(format!("DFT length {len} is not a power of two")));
    }
    Ok(())
}

/// Unnormalized forward DFT, `X[m] = sum_k x[k] e^{-j 2 pi k m / K}`.
pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut out);
    Ok(out)
}

/// Inverse DFT scaled by `1/K`, so `idft(dft(x)) == x`.
pub fn idft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    FftPlanner::new().plan_fft_inverse(x.len()).process(&mut out);
    let scale = 1.0 / x.len() as f64;
    out.iter_mut().for_each(|z| *z *= scale);
    Ok(out)
}

/// Reusable forward/inverse plans of one length in both float precisions.
#[derive(Clone)]
pub struct FftBank {
    len: usize,
    fwd64: Arc<dyn Fft<f64>>,
    inv64: Arc<dyn Fft<f64>>,
    fwd32: Arc<dyn Fft<f32>>,
    inv32: Arc<dyn Fft<f32>>,
}

impl std::fmt::Debug for FftBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftBank").field("len", &self.len).finish()
    }
}

impl FftBank {
    pub fn new(len: usize) -> Result<Self> {
        check_len(len)?;
        let mut p64 = FftPlanner::<f64>::new();
        let mut p32 = FftPlanner::<f32>::new();
        Ok(FftBank {
            len,
            fwd64: p64.plan_fft_forward(len),
            inv64: p64.plan_fft_inverse(len),
            fwd32: p32.plan_fft_forward(len),
            inv32: p32.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward64(&self, buf: &mut [Complex64]) {
        self.fwd64.process(buf);
    }

    pub fn inverse64(&self, buf: &mut [Complex64]) {
        self.inv64.process(buf);
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    pub fn forward32(&self, buf: &mut [Complex32]) {
        self.fwd32.process(buf);
    }

    pub fn inverse32(&self, buf: &mut [Complex32]) {
        self.inv32.process(buf);
        let s = 1.0 / self.len as f32;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}
