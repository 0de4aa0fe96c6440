//! Golay complementary sequences and the zero-padded packet waveform.

use num_complex::Complex64;

use crate::error::{Result, RspError};
use crate::params::RadarParams;
use crate::range_azimuth::dft;

/// Two ±1 sequences whose aperiodic autocorrelations sum to a delta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolayPair {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

impl GolayPair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Build a complementary pair by recursive doubling: `a' = [a | b]`, `b' = [a | -b]`,
/// starting from `a = b = [+1]`.
pub fn golay_pair(len: usize) -> Result<GolayPair> {
    if !len.is_power_of_two() {
        return Err(RspError::validation(format!("Golay length {len} is not a power of two")));
    }
    let mut a = vec![1i8];
    let mut b = vec![1i8];
    while a.len() < len {
        let mut a2 = Vec::with_capacity(a.len() * 2);
        a2.extend_from_slice(&a);
        a2.extend_from_slice(&b);
        let mut b2 = Vec::with_capacity(b.len() * 2);
        b2.extend_from_slice(&a);
        b2.extend(b.iter().map(|&x| -x));
        a = a2;
        b = b2;
    }
    Ok(GolayPair { a, b })
}

/// Prouhet-Thue-Morse packet ordering: entry `n` is the parity of `popcount(n)`;
/// `false` selects sequence `a`, `true` selects `b`.
pub fn ptm_order(n: usize) -> Vec<bool> {
    (0..n).map(|i| i.count_ones() % 2 == 1).collect()
}

/// Transmit matrix and its precomputed spectra.
#[derive(Debug, Clone)]
pub struct TxWaveform {
    k: usize,
    golay_len: usize,
    /// Row-major `N x K` chips.
    rows: Vec<Vec<f64>>,
    spectra: Vec<Vec<Complex64>>,
}

impl TxWaveform {
    pub fn packets(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn golay_len(&self) -> usize {
        self.golay_len
    }

    /// Zero-padded chips of packet `n`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    /// Forward DFT of packet `n`.
    pub fn spectrum(&self, n: usize) -> &[Complex64] {
        &self.spectra[n]
    }
}

pub fn build_waveform(params: &RadarParams, pair: &GolayPair) -> Result<TxWaveform> {
    build_waveform_raw(params.k, params.n, pair)
}

/// Waveform for `packets` packets of `k` samples; only the dimensions are checked.
pub fn build_waveform_raw(k: usize, packets: usize, pair: &GolayPair) -> Result<TxWaveform> {
    if pair.a.len() != pair.b.len() || pair.len() > k {
        return Err(RspError::dimension(format!(
            "Golay pair of length {} does not fit a {k}-sample packet",
            pair.len()
        )));
    }
    if !k.is_power_of_two() {
        return Err(RspError::validation(format!("K = {k} is not a power of two")));
    }
    let pad = |seq: &[i8]| {
        let mut row = vec![0.0; k];
        for (dst, &c) in row.iter_mut().zip(seq) {
            *dst = c as f64;
        }
        row
    };
    let row_a = pad(&pair.a);
    let row_b = pad(&pair.b);
    let to_c = |r: &[f64]| r.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    let spec_a = dft(&to_c(&row_a))?;
    let spec_b = dft(&to_c(&row_b))?;
    let order = ptm_order(packets);
    let rows = order.iter().map(|&b| if b { row_b.clone() } else { row_a.clone() }).collect();
    let spectra = order
        .iter()
        .map(|&b| if b { spec_b.clone() } else { spec_a.clone() })
        .collect();
    Ok(TxWaveform { k, golay_len: pair.len(), rows, spectra })
}

/// Aperiodic autocorrelation at lags `0..len`.
pub fn aperiodic_autocorr(x: &[i8]) -> Vec<i64> {
    (0..x.len())
        .map(|lag| {
            x.iter()
                .zip(&x[lag..])
                .map(|(&u, &v)| u as i64 * v as i64)
                .sum()
        })
        .collect()
}
