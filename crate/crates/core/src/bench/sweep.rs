use std::fmt;
use std::str::FromStr;

use super::{monte_carlo, McOptions, RmseReport, StageModes};
use crate::error::{Result, RspError};
use crate::fxp::NumericMode;
use crate::params::{parse_values, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Snr,
    /// Numeric mode of the matched-filter stage.
    Wordlength,
    /// Numeric mode of the MUSIC stage.
    MusicWordlength,
    DeltaPhi,
    Packets,
    DopplerElems,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Snr => "snr",
            SweepKind::Wordlength => "wordlength",
            SweepKind::MusicWordlength => "music_wordlength",
            SweepKind::DeltaPhi => "delta_phi",
            SweepKind::Packets => "packets",
            SweepKind::DopplerElems => "doppler_elems",
        }
    }

    /// Base name of the CSV and SVG outputs.
    pub fn output_stem(self) -> String {
        format!("rmse_vs_{}", self.name())
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = RspError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snr" => SweepKind::Snr,
            "wordlength" => SweepKind::Wordlength,
            "music_wordlength" => SweepKind::MusicWordlength,
            "delta_phi" => SweepKind::DeltaPhi,
            "packets" => SweepKind::Packets,
            "doppler_elems" => SweepKind::DopplerElems,
            _ => return Err(RspError::validation(format!("unknown sweep kind '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// The swept value as written in the CSV.
    pub value: String,
    pub report: RmseReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
}

impl SweepOutput {
    pub fn rows(&self) -> Vec<(String, RmseReport)> {
        self.points.iter().map(|p| (p.value.clone(), p.report.clone())).collect()
    }
}

fn positive_integers(values: &[f64]) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && v >= 1.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(RspError::validation(format!("'{v}' is not a positive integer")))
            }
        })
        .collect()
}

/// Reruns the Monte Carlo evaluation once per value of the swept parameter.
///
/// `values` is a comma list or `start:step:stop` range; word-length sweeps take
/// a comma list of numeric modes (`f64, f32, fx24_5`). Word-length sweeps
/// process all modes on the same data cubes.
pub fn run_sweep(
    kind: SweepKind,
    scenario: &Scenario,
    values: &str,
    base: StageModes,
    opts: &McOptions,
) -> Result<SweepOutput> {
    if values.trim().is_empty() {
        return Err(RspError::validation("sweep needs at least one value"));
    }
    let mut points = Vec::new();
    match kind {
        SweepKind::Wordlength | SweepKind::MusicWordlength => {
            let modes: Vec<NumericMode> = values.split(',').map(str::parse).collect::<Result<_>>()?;
            let configs: Vec<StageModes> = modes
                .iter()
                .map(|&m| match kind {
                    SweepKind::Wordlength => StageModes { mf: m, ..base },
                    _ => StageModes { music: m, ..base },
                })
                .collect();
            for report in monte_carlo(scenario, &configs, opts)? {
                let m = if kind == SweepKind::Wordlength { report.modes.mf } else { report.modes.music };
                points.push(SweepPoint { value: m.label(), report });
            }
        }
        SweepKind::Snr => {
            let snrs = parse_values(values)?;
            let s = Scenario { snr_db: snrs, ..scenario.clone() };
            for report in monte_carlo(&s, &[base], opts)? {
                points.push(SweepPoint { value: format!("{}", report.snr_db), report });
            }
        }
        SweepKind::DeltaPhi | SweepKind::Packets | SweepKind::DopplerElems => {
            let nums = parse_values(values)?;
            for (idx, &v) in nums.iter().enumerate() {
                let mut s = scenario.clone();
                match kind {
                    SweepKind::DeltaPhi => s.params.delta_phi_deg = v,
                    SweepKind::Packets => s.params.n = positive_integers(&nums)?[idx],
                    _ => s.params.d = positive_integers(&nums)?[idx],
                }
                for report in monte_carlo(&s, &[base], opts)? {
                    points.push(SweepPoint { value: format!("{v}"), report });
                }
            }
        }
    }
    Ok(SweepOutput { kind, points })
}
