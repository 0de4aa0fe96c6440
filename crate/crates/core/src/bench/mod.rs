//! Monte Carlo evaluation: per-trial pipeline, detection-to-truth pairing,
//! RMSE aggregation and parameter sweeps.

mod plot;
mod sweep;

use std::collections::BTreeSet;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

pub use plot::{svg_heatmap, svg_line_plot, Series};
pub use sweep::{run_sweep, SweepKind, SweepOutput, SweepPoint};

use crate::channel::{random_targets, realize_targets, synthesize_cube, trial_rng, DataCube};
use crate::clean::{clean, Detection};
use crate::error::{Result, RspError};
use crate::fxp::NumericMode;
use crate::music::{doppler_steering, music_doppler, DopplerSteering, MusicOutput};
use crate::params::{DerivedParams, RadarParams, Scenario, TargetSource, TargetSpec};
use crate::range_azimuth::{RaProcessor, SteeringMatrix};
use crate::waveform::{build_waveform, golay_pair, TxWaveform};

/// Estimated parameters, in the order range, azimuth, velocity.
pub const PARAM_NAMES: [&str; 3] = ["range", "azimuth", "velocity"];

/// Numeric modes of the two processing stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StageModes {
    pub mf: NumericMode,
    pub music: NumericMode,
}

impl Default for StageModes {
    fn default() -> Self {
        StageModes { mf: NumericMode::F32, music: NumericMode::F32 }
    }
}

/// How detections are matched to ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Detection `i` (in CLEAN order) takes the nearest truth in normalized
    /// range/azimuth not claimed by an earlier detection.
    #[default]
    Nearest,
    /// Detection `i` is compared with the target of `i`-th largest mean RCS.
    AmplitudeRank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub snr_db: f64,
    pub modes: StageModes,
    pub truths: Vec<TargetSpec>,
    pub detections: Vec<Detection>,
    /// Truth index paired with each detection.
    pub paired: Vec<Option<usize>>,
    /// Signed errors `(estimate - truth)` per CLEAN iteration, NaN when missing.
    pub errors: Vec<[f64; 3]>,
}

/// Fixed per-scenario state shared by all trials.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub params: RadarParams,
    pub derived: DerivedParams,
    pub waveform: TxWaveform,
    pub steering: SteeringMatrix,
    pub doppler: DopplerSteering,
}

impl Pipeline {
    pub fn new(params: &RadarParams) -> Result<Self> {
        params.validate()?;
        if params.n < 2 {
            return Err(RspError::validation("Doppler estimation needs N >= 2 packets"));
        }
        let derived = params.derive()?;
        let waveform = build_waveform(params, &golay_pair(params.golay_len)?)?;
        let steering = SteeringMatrix::new(params, &derived);
        let doppler = doppler_steering(&derived, params.n);
        Ok(Pipeline { params: params.clone(), derived, waveform, steering, doppler })
    }

    pub fn processor(&self, mode: NumericMode) -> Result<RaProcessor> {
        RaProcessor::new(&self.params, &self.waveform, self.steering.clone(), mode)
    }

    /// CLEAN on packet 1 and MUSIC on every detection, for a given cube.
    pub fn process(&self, cube: &DataCube, modes: StageModes) -> Result<(Vec<Detection>, Vec<Option<MusicOutput>>)> {
        let proc = self.processor(modes.mf)?;
        let first = proc.image(cube, 0)?;
        let p = &self.params;
        let outcome = clean(&first, &proc, p, &self.derived, &self.waveform, p.p_tilde, p.residue_threshold)?;
        let mut detections = outcome.detections;
        let azimuths: Vec<usize> =
            detections.iter().map(|d| d.azimuth_bin).collect::<BTreeSet<_>>().into_iter().collect();
        let mut slow: Vec<Vec<Complex64>> = vec![Vec::with_capacity(p.n); detections.len()];
        for (d, y) in detections.iter().zip(slow.iter_mut()) {
            y.push(first.get(d.range_bin, d.azimuth_bin));
        }
        for n in 1..p.n {
            let cols = proc.columns(cube, n, &azimuths)?;
            for (d, y) in detections.iter().zip(slow.iter_mut()) {
                let c = azimuths.binary_search(&d.azimuth_bin).expect("azimuth listed");
                y.push(cols[c][d.range_bin]);
            }
        }
        let mut spectra = Vec::with_capacity(detections.len());
        for (d, y) in detections.iter_mut().zip(&slow) {
            let out = music_doppler(y, &self.derived, &self.doppler, modes.music, proc.fx_domain_scale())?;
            if out.evd.converged {
                d.doppler_hz = out.doppler_hz;
                d.velocity_mps = out.velocity_mps;
                spectra.push(Some(out));
            } else {
                spectra.push(None);
            }
        }
        Ok((detections, spectra))
    }
}

/// Targets and data cube of one trial. The trial stream depends only on the
/// seed and trial index, so every SNR point sees the same targets and the same
/// normalized noise.
pub fn synthesize_trial(
    scenario: &Scenario,
    pipeline: &Pipeline,
    trial: usize,
    snr_db: f64,
) -> Result<(Vec<TargetSpec>, DataCube)> {
    let mut rng = trial_rng(scenario.rng_seed, trial as u64);
    let truths = match &scenario.targets {
        TargetSource::Fixed(list) => list.clone(),
        TargetSource::Random { mean_rcs_sqm, on_grid } => {
            random_targets(&pipeline.params, mean_rcs_sqm, *on_grid, &mut rng)
        }
    };
    let real = realize_targets(&truths, &pipeline.params, &mut rng)?;
    let cube = synthesize_cube(&pipeline.waveform, &real, snr_db, &pipeline.params, &pipeline.derived, &mut rng)?;
    Ok((truths, cube))
}

/// One trial processed in several stage configurations over the same cube.
pub fn run_trial_modes(
    scenario: &Scenario,
    pipeline: &Pipeline,
    trial: usize,
    snr_db: f64,
    modes: &[StageModes],
    pairing: Pairing,
) -> Result<Vec<TrialResult>> {
    let (truths, cube) = synthesize_trial(scenario, pipeline, trial, snr_db)?;
    modes
        .iter()
        .map(|&m| {
            let (detections, _) = pipeline.process(&cube, m)?;
            let paired = pair_detections(&detections, &truths, &pipeline.params, pairing);
            let errors = detections
                .iter()
                .zip(&paired)
                .map(|(d, t)| match t {
                    Some(t) => signed_errors(d, &truths[*t], &pipeline.params, &pipeline.derived),
                    None => [f64::NAN; 3],
                })
                .collect();
            Ok(TrialResult { trial, snr_db, modes: m, truths: truths.clone(), detections, paired, errors })
        })
        .collect()
}

pub fn run_trial(scenario: &Scenario, trial: usize, snr_db: f64, modes: StageModes) -> Result<TrialResult> {
    let pipeline = Pipeline::new(&scenario.params)?;
    Ok(run_trial_modes(scenario, &pipeline, trial, snr_db, &[modes], Pairing::default())?.remove(0))
}

/// Match detections (in CLEAN order) to truth indices.
pub fn pair_detections(
    detections: &[Detection],
    truths: &[TargetSpec],
    params: &RadarParams,
    pairing: Pairing,
) -> Vec<Option<usize>> {
    match pairing {
        Pairing::AmplitudeRank => {
            let mut order: Vec<usize> = (0..truths.len()).collect();
            order.sort_by(|&a, &b| truths[b].mean_rcs_sqm.total_cmp(&truths[a].mean_rcs_sqm).then(a.cmp(&b)));
            (0..detections.len()).map(|i| order.get(i).copied()).collect()
        }
        Pairing::Nearest => {
            let endfire = endfire_ambiguous(params);
            let span_r = (params.range_gate_m.1 - params.range_gate_m.0).max(f64::MIN_POSITIVE);
            let mut taken = vec![false; truths.len()];
            detections
                .iter()
                .map(|d| {
                    let best = truths
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !taken[*i])
                        .map(|(i, t)| {
                            let dr = (d.range_m - t.range_m) / span_r;
                            let da = azimuth_error(d.azimuth_deg, t.azimuth_deg, endfire) / 180.0;
                            (i, dr * dr + da * da)
                        })
                        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                        .map(|(i, _)| i);
                    if let Some(i) = best {
                        taken[i] = true;
                    }
                    best
                })
                .collect()
        }
    }
}

/// Whether the array cannot distinguish azimuth `+90` from `-90`, which
/// holds when the element spacing is a whole number of half wavelengths.
pub fn endfire_ambiguous(params: &RadarParams) -> bool {
    let ratio = 2.0 * params.element_spacing() / params.lambda();
    ratio >= 0.5 && (ratio - ratio.round()).abs() < 1e-9
}

/// `estimate - truth` in degrees. With an endfire ambiguity the azimuth axis
/// closes on itself, so the error wraps into `[-90, 90]`.
pub fn azimuth_error(estimate_deg: f64, truth_deg: f64, endfire: bool) -> f64 {
    let e = estimate_deg - truth_deg;
    if endfire && e.abs() > 90.0 {
        e - 180.0 * e.signum()
    } else {
        e
    }
}

/// Velocity errors wrap into the unambiguous interval, where `+v_max` and
/// `-v_max` are the same Doppler shift. Azimuth errors wrap at endfire.
pub fn signed_errors(d: &Detection, truth: &TargetSpec, params: &RadarParams, derived: &DerivedParams) -> [f64; 3] {
    let span = derived.unambiguous_velocity_span();
    let mut dv = d.velocity_mps - truth.velocity_mps;
    if dv.is_finite() {
        dv -= span * (dv / span).round();
    }
    let da = azimuth_error(d.azimuth_deg, truth.azimuth_deg, endfire_ambiguous(params));
    [d.range_m - truth.range_m, da, dv]
}

/// Root mean square over the finite entries, and the number of NaN misses.
/// `None` when no entry is finite.
pub fn rmse(errors: &[f64]) -> (Option<f64>, usize) {
    let finite: Vec<f64> = errors.iter().copied().filter(|e| !e.is_nan()).collect();
    let misses = errors.len() - finite.len();
    if finite.is_empty() {
        return (None, misses);
    }
    let ms = finite.iter().map(|e| e * e).sum::<f64>() / finite.len() as f64;
    (Some(ms.sqrt()), misses)
}

/// Parameter spans used to express RMSE as a percentage.
pub fn parameter_spans(params: &RadarParams) -> [f64; 3] {
    [params.range_gate_m.1 - params.range_gate_m.0, 180.0, 2.0 * params.v_span_mps]
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseEntry {
    pub target: usize,
    pub param: usize,
    pub rmse: f64,
    pub rmse_pct: f64,
    pub max_abs: f64,
    pub misses: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub snr_db: f64,
    pub modes: StageModes,
    pub trials: usize,
    pub entries: Vec<RmseEntry>,
}

impl RmseReport {
    pub fn get(&self, target: usize, param: usize) -> Option<&RmseEntry> {
        self.entries.iter().find(|e| e.target == target && e.param == param)
    }

    /// `rmse` for one target and parameter, NaN if absent.
    pub fn value(&self, target: usize, param: usize) -> f64 {
        self.get(target, param).map_or(f64::NAN, |e| e.rmse)
    }

    pub fn pct(&self, target: usize, param: usize) -> f64 {
        self.get(target, param).map_or(f64::NAN, |e| e.rmse_pct)
    }
}

/// Aggregates trials (already in trial order) into per-iteration RMSE.
pub fn aggregate(results: &[TrialResult], params: &RadarParams, snr_db: f64, modes: StageModes) -> RmseReport {
    let spans = parameter_spans(params);
    let mut entries = Vec::new();
    for target in 0..params.p_tilde {
        for (param, span) in spans.iter().enumerate() {
            let errs: Vec<f64> = results
                .iter()
                .map(|r| r.errors.get(target).map_or(f64::NAN, |e| e[param]))
                .collect();
            let (value, misses) = rmse(&errs);
            let value = value.unwrap_or(f64::NAN);
            let max_abs = errs.iter().filter(|e| !e.is_nan()).fold(0.0f64, |m, e| m.max(e.abs()));
            entries.push(RmseEntry { target, param, rmse: value, rmse_pct: 100.0 * value / span, max_abs, misses });
        }
    }
    RmseReport { snr_db, modes, trials: results.len(), entries }
}

/// Execution settings for Monte Carlo runs.
#[derive(Debug, Clone, Default)]
pub struct McOptions {
    /// Worker threads; `None` uses `RSP_THREADS` or the machine default.
    pub threads: Option<usize>,
    pub pairing: Pairing,
}

pub fn thread_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var("RSP_THREADS").ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every trial at every SNR of the scenario for each stage configuration.
/// Reports come back ordered by SNR, then by configuration.
pub fn monte_carlo(scenario: &Scenario, modes: &[StageModes], opts: &McOptions) -> Result<Vec<RmseReport>> {
    scenario.validate()?;
    if modes.is_empty() {
        return Err(RspError::validation("at least one numeric mode is required"));
    }
    let pipeline = Pipeline::new(&scenario.params)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(opts.threads))
        .build()
        .map_err(|e| RspError::validation(format!("thread pool: {e}")))?;
    let mut reports = Vec::new();
    for &snr in &scenario.snr_db {
        // Collected in trial order regardless of scheduling.
        let per_trial: Vec<Vec<TrialResult>> = pool.install(|| {
            (0..scenario.trials)
                .into_par_iter()
                .map(|t| run_trial_modes(scenario, &pipeline, t, snr, modes, opts.pairing))
                .collect::<Result<Vec<_>>>()
        })?;
        for (mi, &m) in modes.iter().enumerate() {
            let results: Vec<TrialResult> = per_trial.iter().map(|r| r[mi].clone()).collect();
            reports.push(aggregate(&results, &scenario.params, snr, m));
        }
    }
    Ok(reports)
}

pub const RMSE_CSV_HEADER: &str =
    "sweep,value,mf_mode,music_mode,snr_db,target,param,rmse,rmse_pct,max_abs,misses,trials";

/// One long-format row per (report, target, parameter).
pub fn write_rmse_csv(mut w: impl Write, sweep: &str, rows: &[(String, RmseReport)], header: bool) -> Result<()> {
    if header {
        writeln!(w, "{RMSE_CSV_HEADER}")?;
    }
    for (value, r) in rows {
        for e in &r.entries {
            writeln!(
                w,
                "{sweep},{value},{},{},{},{},{},{:.9e},{:.9e},{:.9e},{},{}",
                r.modes.mf.label(),
                r.modes.music.label(),
                r.snr_db,
                e.target + 1,
                PARAM_NAMES[e.param],
                e.rmse,
                e.rmse_pct,
                e.max_abs,
                e.misses,
                r.trials
            )?;
        }
    }
    Ok(())
}
