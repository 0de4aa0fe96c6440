//! Operation counts for the beamform/matched-filter stage and a coarse
//! serial-parallel time model.
//!
//! Costs are counted in complex multiplies (`cm`), adder input operands
//! (`ca_inputs`, so a `(Q-1)`-input adder contributes `Q-1`) and peak
//! intermediate storage in complex words.

use std::io::Write;
use std::ops::{Add, Mul};

use crate::error::{Result, RspError};
use crate::fxp::NumericMode;
use crate::params::RadarParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub cm: u64,
    pub ca_inputs: u64,
    pub mem_words: u64,
}

impl OpCount {
    /// Adds work; storage is peak, not summed.
    pub fn accumulate(&mut self, other: &OpCount) {
        self.cm += other.cm;
        self.ca_inputs += other.ca_inputs;
        self.mem_words = self.mem_words.max(other.mem_words);
    }
}

impl Add for OpCount {
    type Output = OpCount;

    fn add(mut self, rhs: OpCount) -> OpCount {
        self.accumulate(&rhs);
        self
    }
}

/// Repeats the work `n` times with the same buffer.
impl Mul<u64> for OpCount {
    type Output = OpCount;

    fn mul(self, n: u64) -> OpCount {
        OpCount { cm: self.cm * n, ca_inputs: self.ca_inputs * n, mem_words: self.mem_words }
    }
}

/// Outer-product evaluation for one azimuth: `KQ` beamforming CMs plus `K^2`
/// for the full `K x K` product whose diagonal is kept.
pub fn direct_per_azimuth(k: usize, q: usize) -> OpCount {
    let (k, q) = (k as u64, q as u64);
    OpCount { cm: k * q + k * k, ca_inputs: k * (q - 1), mem_words: k + k * k }
}

/// Accumulate across antennas, then one Golay multiply per bin.
pub fn efficient_per_azimuth(k: usize, q: usize) -> OpCount {
    let (k, q) = (k as u64, q as u64);
    OpCount { cm: k * q + k, ca_inputs: k * (q - 1), mem_words: k }
}

/// Golay multiply on every antenna before combining; buffers all `K x Q` products.
pub fn multiply_first_per_azimuth(k: usize, q: usize) -> OpCount {
    let (k, q) = (k as u64, q as u64);
    OpCount { cm: 2 * k * q, ca_inputs: k * (q - 1), mem_words: k * q }
}

/// Direct count read as `K^2 Q` multiplies for the product stage, with a
/// `Q`-input add per product cell.
pub fn direct_paper_literal_per_azimuth(k: usize, q: usize) -> OpCount {
    let (k, q) = (k as u64, q as u64);
    OpCount { cm: k * q + k * k * q, ca_inputs: k * k * (q - 1), mem_words: k + k * k }
}

/// Per-packet totals over all `I` azimuths.
pub fn count_direct(params: &RadarParams) -> OpCount {
    direct_per_azimuth(params.k, params.q) * params.azimuth_count() as u64
}

pub fn count_efficient(params: &RadarParams) -> OpCount {
    efficient_per_azimuth(params.k, params.q) * params.azimuth_count() as u64
}

pub fn count_multiply_first(params: &RadarParams) -> OpCount {
    multiply_first_per_azimuth(params.k, params.q) * params.azimuth_count() as u64
}

pub fn count_direct_paper_literal(params: &RadarParams) -> OpCount {
    direct_paper_literal_per_azimuth(params.k, params.q) * params.azimuth_count() as u64
}

/// CMs after beamforming, direct over efficient. Equals `K`.
pub fn post_beamform_cm_ratio(k: usize, q: usize) -> f64 {
    let d = direct_per_azimuth(k, q).cm - (k * q) as u64;
    let e = efficient_per_azimuth(k, q).cm - (k * q) as u64;
    d as f64 / e as f64
}

/// A point in the reconfiguration space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchConfig {
    pub mf_units: usize,
    pub delta_phi_deg: f64,
    pub n: usize,
    pub d: usize,
    pub numeric_mode: NumericMode,
}

impl ArchConfig {
    pub fn from_params(params: &RadarParams) -> Self {
        ArchConfig {
            mf_units: 1,
            delta_phi_deg: params.delta_phi_deg,
            n: params.n,
            d: params.d,
            numeric_mode: NumericMode::F32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mf_units == 0 {
            return Err(RspError::validation("mf_units must be at least 1"));
        }
        if !(self.delta_phi_deg > 0.0 && self.delta_phi_deg <= 180.0) {
            return Err(RspError::validation("delta_phi_deg must be in (0, 180]"));
        }
        if self.n == 0 || self.d == 0 {
            return Err(RspError::validation("N and D must be positive"));
        }
        Ok(())
    }

    fn apply(&self, params: &RadarParams) -> RadarParams {
        RadarParams { delta_phi_deg: self.delta_phi_deg, n: self.n, d: self.d, ..params.clone() }
    }
}

/// Modeled time split by stage, in units of one complex operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTimes {
    pub dft: f64,
    pub mf: f64,
    pub music_evd: f64,
    pub music_spectrum: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.dft + self.mf + self.music_evd + self.music_spectrum
    }
}

pub fn stage_times(config: &ArchConfig, params: &RadarParams) -> Result<StageTimes> {
    config.validate()?;
    let p = config.apply(params);
    let (k, q, n, d) = (p.k as f64, p.q as f64, p.n as f64, p.d as f64);
    let i = p.azimuth_count();
    let rounds = i.div_ceil(config.mf_units) as f64;
    let per_az = efficient_per_azimuth(p.k, p.q);
    let ifft = k / 2.0 * k.log2();
    let targets = p.p_tilde as f64;
    Ok(StageTimes {
        dft: n * q * k / 2.0 * k.log2(),
        mf: rounds * (per_az.cm as f64 + ifft) * n,
        music_evd: targets * n.powi(3),
        music_spectrum: targets * n * d * (n - 1.0),
    })
}

/// `time(a) / time(b)` for the whole chain.
pub fn estimate_relative_time(a: &ArchConfig, b: &ArchConfig, params: &RadarParams) -> Result<f64> {
    Ok(stage_times(a, params)?.total() / stage_times(b, params)?.total())
}

/// `time(a) / time(b)` for the beamform-MF stage alone.
pub fn estimate_mf_stage_ratio(a: &ArchConfig, b: &ArchConfig, params: &RadarParams) -> Result<f64> {
    Ok(stage_times(a, params)?.mf / stage_times(b, params)?.mf)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub metric: String,
    pub baseline: f64,
    pub alternative: f64,
    pub ratio: f64,
}

fn row(metric: &str, baseline: f64, alternative: f64) -> TableRow {
    TableRow { metric: metric.into(), baseline, alternative, ratio: baseline / alternative }
}

/// Count and time-ratio table for one parameter set.
pub fn complexity_table(params: &RadarParams) -> Result<Vec<TableRow>> {
    params.validate()?;
    let (k, q) = (params.k, params.q);
    let d = direct_per_azimuth(k, q);
    let e = efficient_per_azimuth(k, q);
    let m = multiply_first_per_azimuth(k, q);
    let lit = direct_paper_literal_per_azimuth(k, q);
    let kq = (k * q) as f64;
    let base = ArchConfig::from_params(params);
    let with = |f: &dyn Fn(&mut ArchConfig)| {
        let mut c = base;
        f(&mut c);
        c
    };
    let dphi2 = with(&|c| c.delta_phi_deg = 2.0 * base.delta_phi_deg);
    let dphi4 = with(&|c| c.delta_phi_deg = 4.0 * base.delta_phi_deg);
    let units2 = with(&|c| c.mf_units = 2);
    let d40 = with(&|c| c.d = 40);
    let t = |c: &ArchConfig| stage_times(c, params);
    Ok(vec![
        row("cm_per_azimuth direct/efficient", d.cm as f64, e.cm as f64),
        row("cm_post_beamform direct/efficient (ratio K)", d.cm as f64 - kq, e.cm as f64 - kq),
        row("cm_post_beamform literal/efficient", lit.cm as f64 - kq, e.cm as f64 - kq),
        row("ca_inputs direct/efficient", d.ca_inputs as f64, e.ca_inputs as f64),
        row("mem_words direct/efficient", d.mem_words as f64, e.mem_words as f64),
        row("mem_words multiply_first/efficient (ratio Q)", m.mem_words as f64, e.mem_words as f64),
        row("cm_per_packet direct/efficient", count_direct(params).cm as f64, count_efficient(params).cm as f64),
        row("mf_time dphi x1 / x2", t(&base)?.mf, t(&dphi2)?.mf),
        row("mf_time dphi x1 / x4", t(&base)?.mf, t(&dphi4)?.mf),
        row("total_time dphi x1 / x2", t(&base)?.total(), t(&dphi2)?.total()),
        row("total_time dphi x1 / x4", t(&base)?.total(), t(&dphi4)?.total()),
        row("mf_time units 1 / 2", t(&base)?.mf, t(&units2)?.mf),
        row("spectrum_time D / 40", t(&base)?.music_spectrum, t(&d40)?.music_spectrum),
        row("total_time D / 40", t(&base)?.total(), t(&d40)?.total()),
    ])
}

pub fn write_table_csv(rows: &[TableRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "metric,baseline,alternative,ratio")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.metric, r.baseline, r.alternative, r.ratio)?;
    }
    Ok(())
}

pub fn write_table_markdown(rows: &[TableRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "| metric | baseline | alternative | ratio |")?;
    writeln!(w, "|---|---:|---:|---:|")?;
    for r in rows {
        writeln!(w, "| {} | {} | {} | {:.4} |", r.metric, r.baseline, r.alternative, r.ratio)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_count() {
        assert_eq!(efficient_per_azimuth(4, 2).cm, 12);
        assert_eq!(efficient_per_azimuth(4, 2).ca_inputs, 4);
        assert_eq!(direct_per_azimuth(4, 2).cm, 24);
    }

    #[test]
    fn ratio_k() {
        for k in [8, 64, 1024] {
            assert_eq!(post_beamform_cm_ratio(k, 16), k as f64);
        }
        let e = efficient_per_azimuth(1024, 16);
        let m = multiply_first_per_azimuth(1024, 16);
        assert_eq!(m.mem_words / e.mem_words, 16);
    }

    #[test]
    fn delta_phi_ratios() {
        let p = RadarParams::default();
        let base = ArchConfig::from_params(&p);
        let two = ArchConfig { delta_phi_deg: 2.0, ..base };
        let four = ArchConfig { delta_phi_deg: 4.0, ..base };
        assert!((estimate_mf_stage_ratio(&base, &two, &p).unwrap() - 181.0 / 91.0).abs() < 1e-12);
        assert!((estimate_mf_stage_ratio(&base, &four, &p).unwrap() - 181.0 / 46.0).abs() < 1e-12);
        let total = estimate_relative_time(&base, &two, &p).unwrap();
        assert!((total - 1.96).abs() / 1.96 < 0.15, "{total}");
    }

    #[test]
    fn units_and_doppler_elements() {
        let p = RadarParams::default();
        let base = ArchConfig { d: 200, ..ArchConfig::from_params(&p) };
        let two = ArchConfig { mf_units: 2, ..base };
        assert!((estimate_mf_stage_ratio(&base, &two, &p).unwrap() - 181.0 / 91.0).abs() < 1e-12);
        let d40 = ArchConfig { d: 40, ..base };
        let a = stage_times(&base, &p).unwrap().music_spectrum;
        let b = stage_times(&d40, &p).unwrap().music_spectrum;
        assert!((a / b - 5.0).abs() < 1e-12);
        assert!(stage_times(&ArchConfig { mf_units: 0, ..base }, &p).is_err());
    }

    #[test]
    fn table_has_ratio_k_row() {
        let rows = complexity_table(&RadarParams::default()).unwrap();
        let r = rows.iter().find(|r| r.metric.contains("ratio K")).unwrap();
        assert_eq!(r.ratio, 1024.0);
        let mut md = Vec::new();
        write_table_markdown(&rows, &mut md).unwrap();
        assert!(String::from_utf8(md).unwrap().contains("| metric |"));
    }

    proptest! {
        #[test]
        fn linear_in_azimuths(k_exp in 2u32..11, q in 1usize..32, dphi in prop::sample::select(vec![1.0, 2.0, 3.0, 4.0, 5.0, 10.0])) {
            let k = 1usize << k_exp;
            let p = RadarParams { k, golay_len: k / 2, q, delta_phi_deg: dphi, range_gate_m: (0.0, 1.0), ..Default::default() };
            let i = p.azimuth_count() as u64;
            prop_assert_eq!(count_efficient(&p).cm, i * efficient_per_azimuth(k, q).cm);
            prop_assert_eq!(count_direct(&p).cm, i * direct_per_azimuth(k, q).cm);
            prop_assert_eq!(post_beamform_cm_ratio(k, q), k as f64);
            prop_assert_eq!(multiply_first_per_azimuth(k, q).mem_words, q as u64 * efficient_per_azimuth(k, q).mem_words);
        }
    }
}
