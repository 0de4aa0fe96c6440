//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! [radar]
//! K = 1024
//! golay_len = 512
//! range_gate_m = 0, 40
//!
//! [target]
//! range_m = 8.5
//! azimuth_deg = 0
//! velocity_mps = 15
//! mean_rcs_sqm = 10
//!
//! [run]
//! snr_db = -15:5:10
//! trials = 200
//! rng_seed = 7
//! ```
//!
//! A `[random_targets]` block (`mean_rcs_sqm = 10, 5, 3`) replaces the
//! `[target]` blocks with targets drawn uniformly over the field of view on
//! every trial. Its `placement` key is `grid` (default: range bins and
//! beamforming azimuths) or `continuous`. `snr_db` accepts a scalar, a comma list, a `start:step:stop`
//! range, or `inf` for a noiseless run.

use std::fmt::Write as _;
use std::path::Path;

use super::{RadarParams, Scenario, TargetSource, TargetSpec};
use crate::error::{Result, RspError};

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Radar,
    Target,
    Random,
    Run,
}

fn parse_err(line: usize, message: impl Into<String>) -> RspError {
    RspError::Parse { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    match v.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        s => s
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("{key}: '{s}' is not a number"))),
    }
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("{key}: '{}' is not a non-negative integer", v.trim())))
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(line, key, s)).collect()
}

/// Parses `a, b, c` or `start:step:stop` (as accepted for `snr_db`).
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    parse_value_list(0, "values", text).map_err(|e| match e {
        RspError::Parse { message, .. } => RspError::Validation(message),
        other => other,
    })
}

/// Parse `a:step:b` ranges (inclusive) as well as plain comma lists.
pub(crate) fn parse_value_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(parse_err(line, format!("{key}: range must be start:step:stop")));
        }
        let start = parse_f64(line, key, parts[0])?;
        let step = parse_f64(line, key, parts[1])?;
        let stop = parse_f64(line, key, parts[2])?;
        if !(step.is_finite() && step != 0.0 && start.is_finite() && stop.is_finite()) {
            return Err(parse_err(line, format!("{key}: degenerate range")));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Err(parse_err(line, format!("{key}: empty range")));
        }
        Ok((0..=count as usize).map(|i| start + i as f64 * step).collect())
    } else {
        parse_list(line, key, v)
    }
}

#[derive(Default)]
struct PartialTarget {
    line: usize,
    range_m: Option<f64>,
    azimuth_deg: Option<f64>,
    velocity_mps: Option<f64>,
    mean_rcs_sqm: Option<f64>,
    fixed_amplitude: Option<f64>,
}

impl PartialTarget {
    fn finish(self) -> Result<TargetSpec> {
        let need = |v: Option<f64>, k: &str| {
            v.ok_or_else(|| parse_err(self.line, format!("[target] is missing '{k}'")))
        };
        Ok(TargetSpec {
            range_m: need(self.range_m, "range_m")?,
            azimuth_deg: need(self.azimuth_deg, "azimuth_deg")?,
            velocity_mps: self.velocity_mps.unwrap_or(0.0),
            mean_rcs_sqm: need(self.mean_rcs_sqm, "mean_rcs_sqm")?,
            fixed_amplitude: self.fixed_amplitude,
        })
    }
}

/// Parse and validate a scenario held in memory.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut params = RadarParams::default();
    let mut section = Section::None;
    let mut targets: Vec<TargetSpec> = Vec::new();
    let mut current: Option<PartialTarget> = None;
    let mut random: Option<Vec<f64>> = None;
    let mut on_grid = true;
    let mut snr_db = vec![f64::INFINITY];
    let mut trials = 1usize;
    let mut rng_seed = 0u64;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if !content.ends_with(']') {
                return Err(parse_err(line, format!("malformed section header '{content}'")));
            }
            if let Some(t) = current.take() {
                targets.push(t.finish()?);
            }
            section = match &content[1..content.len() - 1] {
                "radar" => Section::Radar,
                "target" => {
                    current = Some(PartialTarget { line, ..Default::default() });
                    Section::Target
                }
                "random_targets" => {
                    random.get_or_insert_with(Vec::new);
                    Section::Random
                }
                "run" => Section::Run,
                other => return Err(parse_err(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_err(line, format!("expected 'key = value', found '{content}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        match section {
            Section::None => {
                return Err(parse_err(line, format!("'{key}' appears before any section")));
            }
            Section::Radar => apply_radar_key(&mut params, line, key, value)?,
            Section::Target => {
                let t = current.as_mut().expect("target section always has a partial target");
                let v = parse_f64(line, key, value)?;
                match key {
                    "range_m" => t.range_m = Some(v),
                    "azimuth_deg" => t.azimuth_deg = Some(v),
                    "velocity_mps" => t.velocity_mps = Some(v),
                    "mean_rcs_sqm" => t.mean_rcs_sqm = Some(v),
                    "fixed_amplitude" => t.fixed_amplitude = Some(v),
                    _ => return Err(parse_err(line, format!("unknown [target] key '{key}'"))),
                }
            }
            Section::Random => match key {
                "mean_rcs_sqm" => random = Some(parse_list(line, key, value)?),
                "count" => {
                    let count = parse_usize(line, key, value)?;
                    let list = random.get_or_insert_with(Vec::new);
                    if list.is_empty() {
                        *list = vec![1.0; count];
                    } else if list.len() != count {
                        return Err(parse_err(line, "count disagrees with mean_rcs_sqm length"));
                    }
                }
                "placement" => {
                    on_grid = match value {
                        "grid" => true,
                        "continuous" => false,
                        _ => return Err(parse_err(line, format!("placement: expected 'grid' or 'continuous', found '{value}'"))),
                    }
                }
                _ => return Err(parse_err(line, format!("unknown [random_targets] key '{key}'"))),
            },
            Section::Run => match key {
                "snr_db" => snr_db = parse_value_list(line, key, value)?,
                "trials" => trials = parse_usize(line, key, value)?,
                "rng_seed" => {
                    rng_seed = value
                        .parse::<u64>()
                        .map_err(|_| parse_err(line, format!("rng_seed: '{value}' is not a u64")))?
                }
                _ => return Err(parse_err(line, format!("unknown [run] key '{key}'"))),
            },
        }
    }
    if let Some(t) = current.take() {
        targets.push(t.finish()?);
    }

    let targets = match random {
        Some(_) if !targets.is_empty() => {
            return Err(RspError::validation(
                "use either [target] blocks or [random_targets], not both",
            ))
        }
        Some(mean_rcs_sqm) => TargetSource::Random { mean_rcs_sqm, on_grid },
        None => TargetSource::Fixed(targets),
    };
    let scenario = Scenario { params, targets, snr_db, trials, rng_seed };
    scenario.validate()?;
    Ok(scenario)
}

fn apply_radar_key(p: &mut RadarParams, line: usize, key: &str, value: &str) -> Result<()> {
    match key {
        "K" => p.k = parse_usize(line, key, value)?,
        "golay_len" => p.golay_len = parse_usize(line, key, value)?,
        "Q" => p.q = parse_usize(line, key, value)?,
        "N" => p.n = parse_usize(line, key, value)?,
        "D" => p.d = parse_usize(line, key, value)?,
        "P_tilde" => p.p_tilde = parse_usize(line, key, value)?,
        "delta_phi_deg" => p.delta_phi_deg = parse_f64(line, key, value)?,
        "v_span_mps" => p.v_span_mps = parse_f64(line, key, value)?,
        "fc_hz" => p.fc_hz = parse_f64(line, key, value)?,
        "Ts_s" => p.ts_s = parse_f64(line, key, value)?,
        "T_PRI_s" => p.t_pri_s = Some(parse_f64(line, key, value)?),
        "d_m" => p.d_m = Some(parse_f64(line, key, value)?),
        "residue_threshold" => p.residue_threshold = parse_f64(line, key, value)?,
        "fx_input_shift" => {
            p.fx_input_shift = value
                .parse::<u32>()
                .map_err(|_| parse_err(line, format!("fx_input_shift: '{value}' is not a u32")))?
        }
        "range_gate_m" => {
            let v = parse_list(line, key, value)?;
            if v.len() != 2 {
                return Err(parse_err(line, "range_gate_m needs two values: min, max"));
            }
            p.range_gate_m = (v[0], v[1]);
        }
        _ => return Err(parse_err(line, format!("unknown [radar] key '{key}'"))),
    }
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        // `{:?}` is the shortest representation that parses back exactly
        format!("{v:?}")
    }
}

/// Write a scenario in the file format; `parse_scenario` reads it back unchanged.
pub fn serialize_scenario(s: &Scenario) -> String {
    let p = &s.params;
    let mut out = String::new();
    let _ = writeln!(out, "[radar]");
    let _ = writeln!(out, "K = {}", p.k);
    let _ = writeln!(out, "golay_len = {}", p.golay_len);
    let _ = writeln!(out, "Q = {}", p.q);
    let _ = writeln!(out, "N = {}", p.n);
    let _ = writeln!(out, "delta_phi_deg = {}", fmt_f64(p.delta_phi_deg));
    let _ = writeln!(out, "D = {}", p.d);
    let _ = writeln!(out, "v_span_mps = {}", fmt_f64(p.v_span_mps));
    let _ = writeln!(out, "fc_hz = {}", fmt_f64(p.fc_hz));
    let _ = writeln!(out, "Ts_s = {}", fmt_f64(p.ts_s));
    if let Some(t) = p.t_pri_s {
        let _ = writeln!(out, "T_PRI_s = {}", fmt_f64(t));
    }
    if let Some(d) = p.d_m {
        let _ = writeln!(out, "d_m = {}", fmt_f64(d));
    }
    let _ = writeln!(
        out,
        "range_gate_m = {}, {}",
        fmt_f64(p.range_gate_m.0),
        fmt_f64(p.range_gate_m.1)
    );
    let _ = writeln!(out, "P_tilde = {}", p.p_tilde);
    let _ = writeln!(out, "residue_threshold = {}", fmt_f64(p.residue_threshold));
    let _ = writeln!(out, "fx_input_shift = {}", p.fx_input_shift);
    match &s.targets {
        TargetSource::Fixed(list) => {
            for t in list {
                let _ = writeln!(out, "\n[target]");
                let _ = writeln!(out, "range_m = {}", fmt_f64(t.range_m));
                let _ = writeln!(out, "azimuth_deg = {}", fmt_f64(t.azimuth_deg));
                let _ = writeln!(out, "velocity_mps = {}", fmt_f64(t.velocity_mps));
                let _ = writeln!(out, "mean_rcs_sqm = {}", fmt_f64(t.mean_rcs_sqm));
                if let Some(a) = t.fixed_amplitude {
                    let _ = writeln!(out, "fixed_amplitude = {}", fmt_f64(a));
                }
            }
        }
        TargetSource::Random { mean_rcs_sqm, on_grid } => {
            let _ = writeln!(out, "\n[random_targets]");
            let list: Vec<String> = mean_rcs_sqm.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(out, "mean_rcs_sqm = {}", list.join(", "));
            let _ = writeln!(out, "placement = {}", if *on_grid { "grid" } else { "continuous" });
        }
    }
    let _ = writeln!(out, "\n[run]");
    let snr: Vec<String> = s.snr_db.iter().map(|v| fmt_f64(*v)).collect();
    let _ = writeln!(out, "snr_db = {}", snr.join(", "));
    let _ = writeln!(out, "trials = {}", s.trials);
    let _ = writeln!(out, "rng_seed = {}", s.rng_seed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PAPER: &str = "
[radar]
K = 1024
golay_len = 512
Q = 32
N = 100
delta_phi_deg = 1

[target]
range_m = 8.5
azimuth_deg = 0
velocity_mps = 15
mean_rcs_sqm = 10

[run]
snr_db = 10
trials = 2
rng_seed = 3
";

    #[test]
    fn paper_geometry() {
        let s = parse_scenario(PAPER).unwrap();
        let d = s.derived().unwrap();
        assert_eq!(d.i, 181);
        assert_eq!(s.snr_db, vec![10.0]);
        assert_eq!(s.targets.len(), 1);
    }

    #[test]
    fn coarse_azimuth_from_file() {
        let s = parse_scenario(&PAPER.replace("delta_phi_deg = 1", "delta_phi_deg = 4")).unwrap();
        assert_eq!(s.derived().unwrap().i, 46);
    }

    #[test]
    fn golay_longer_than_packet() {
        let text = PAPER.replace("golay_len = 512", "golay_len = 2048");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("golay_len exceeds K"));
    }

    #[test]
    fn parse_error_reports_line() {
        let text = PAPER.replace("Q = 32", "Q = thirty-two");
        match parse_scenario(&text).unwrap_err() {
            RspError::Parse { line, .. } => assert_eq!(line, 5),
            e => panic!("unexpected {e}"),
        }
        match parse_scenario("[radar]\nbogus = 1\n").unwrap_err() {
            RspError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn snr_ranges() {
        assert_eq!(
            parse_value_list(1, "snr_db", "-15:5:10").unwrap(),
            vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0]
        );
        assert_eq!(parse_value_list(1, "snr_db", "inf").unwrap(), vec![f64::INFINITY]);
        assert!(parse_value_list(1, "snr_db", "1:0:3").is_err());
    }

    #[test]
    fn random_block() {
        let text = "[random_targets]\nmean_rcs_sqm = 10, 5, 3\n[run]\ntrials = 4\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.targets, TargetSource::Random { mean_rcs_sqm: vec![10.0, 5.0, 3.0], on_grid: true });
    }

    #[test]
    fn zero_trials_rejected() {
        let text = PAPER.replace("trials = 2", "trials = 0");
        assert!(parse_scenario(&text).unwrap_err().is_validation());
    }

    proptest! {
        #[test]
        fn serialize_round_trip(
            dphi in prop::sample::select(vec![0.5, 1.0, 2.0, 3.3, 45.0]),
            range in 0.0f64..40.0,
            az in -90.0f64..90.0,
            vel in -30.0f64..30.0,
            rcs in 0.01f64..100.0,
            amp in prop::option::of(0.0f64..10.0),
            snr in prop::collection::vec(-30.0f64..30.0, 1..5),
            trials in 1usize..500,
            seed in any::<u64>(),
            t_pri in prop::option::of(1e-6f64..2e-5),
        ) {
            let mut params = RadarParams { delta_phi_deg: dphi, ..Default::default() };
            params.t_pri_s = t_pri;
            let s = Scenario {
                params,
                targets: TargetSource::Fixed(vec![TargetSpec {
                    range_m: range,
                    azimuth_deg: az,
                    velocity_mps: vel,
                    mean_rcs_sqm: rcs,
                    fixed_amplitude: amp,
                }]),
                snr_db: snr,
                trials,
                rng_seed: seed,
            };
            prop_assume!(s.validate().is_ok());
            let back = parse_scenario(&serialize_scenario(&s)).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
