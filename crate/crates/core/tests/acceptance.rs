//! Acceptance criteria, one PASS/FAIL line each on stdout.
//!
//! Exact criteria (1-5, 9, 10) assert. The Monte Carlo criteria (6-8) report
//! their verdict and only panic on FAIL when `RSP_ACCEPTANCE_STRICT=1`.
//! `RSP_ACCEPTANCE_CONFIG=paper` runs them on the full-size configuration.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jrc_rsp::bench::{
    monte_carlo, run_sweep, run_trial, thread_count, write_rmse_csv, McOptions, RmseReport, StageModes, SweepKind,
};
use jrc_rsp::complexity::{
    efficient_per_azimuth, estimate_mf_stage_ratio, post_beamform_cm_ratio, ArchConfig, OpCount,
};
use jrc_rsp::fxp::NumericMode;
use jrc_rsp::music::{autocov, doppler_steering, evd_qr_iteration, music_doppler, DEFAULT_MAX_ITER, DEFAULT_TOL};
use jrc_rsp::params::{load_scenario, RadarParams, Scenario, TargetSource, TargetSpec};
use jrc_rsp::range_azimuth::{beamform_mf_direct, beamform_mf_efficient, FxScaling, RaProcessor, SpectrumSquare, SteeringMatrix};
use jrc_rsp::waveform::{build_waveform, golay_pair};
use jrc_rsp::channel::DataCube;

const RANGE: usize = 0;
const AZIMUTH: usize = 1;
const VELOCITY: usize = 2;

fn report(criterion: u32, pass: bool, detail: &str) {
    let line = format!("criterion {criterion:>2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    // Bypasses the test harness capture so the verdict shows in plain `cargo test` output.
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn strict() -> bool {
    std::env::var("RSP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1")
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Scenario for the Monte Carlo criteria.
fn mc_scenario() -> Scenario {
    let name = match std::env::var("RSP_ACCEPTANCE_CONFIG").as_deref() {
        Ok("paper") => "paper3t.cfg",
        _ => "ci.cfg",
    };
    load_scenario(config_path(name)).unwrap()
}

fn crand(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn mode(s: &str) -> NumericMode {
    s.parse().unwrap()
}

#[test]
fn criterion_01_efficient_matches_direct() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let instances = 200;
    for _ in 0..instances {
        let k = rng.random_range(1..=32);
        let q = rng.random_range(1..=8);
        let azimuths = rng.random_range(1..=8);
        let rows: Vec<Vec<Complex64>> = (0..q).map(|_| (0..k).map(|_| crand(&mut rng)).collect()).collect();
        let s = SpectrumSquare::from_antenna_spectra(k, &rows).unwrap();
        let g: Vec<Complex64> = (0..k).map(|_| crand(&mut rng)).collect();
        let g_conj: Vec<Complex64> = g.iter().map(|z| z.conj()).collect();
        let mut direct = Vec::new();
        let mut efficient = Vec::new();
        for _ in 0..azimuths {
            let w: Vec<Complex64> = (0..q).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect();
            direct.extend(beamform_mf_direct(&s, &w, &g, None).unwrap());
            efficient.extend(
                beamform_mf_efficient(&s, &w, &g_conj, NumericMode::F64, FxScaling::new(0, 1), None).unwrap(),
            );
        }
        let norm = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = direct.iter().zip(&efficient).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if norm > 0.0 {
            worst = worst.max(diff / norm);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-9 && secs < 5.0;
    report(1, pass, &format!("{instances} instances, worst |diff|/max|out| = {worst:.2e} (< 1e-9), {secs:.2} s"));
    assert!(pass);
}

#[test]
fn criterion_02_single_antenna_column_is_circular_correlation() {
    let start = Instant::now();
    let params = RadarParams { k: 1024, golay_len: 512, q: 1, n: 2, ..Default::default() };
    let waveform = build_waveform(&params, &golay_pair(512).unwrap()).unwrap();
    let steering = SteeringMatrix::from_rows(vec![0.0], vec![vec![Complex64::new(1.0, 0.0)]]).unwrap();
    let proc = RaProcessor::new(&params, &waveform, steering, NumericMode::F64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = params.k;
    let packets: Vec<Vec<Complex64>> = (0..params.n).map(|_| (0..k).map(|_| crand(&mut rng)).collect()).collect();
    let cube = DataCube::from_packets(k, 1, packets).unwrap();
    let mut worst = 0.0f64;
    for n in 0..params.n {
        let column = proc.image(&cube, n).unwrap().column(0).to_vec();
        let x = cube.antenna(n, 0);
        let g = waveform.row(n);
        for (lag, out) in column.iter().enumerate() {
            let expected: Complex64 = (0..k).map(|m| x[(m + lag) % k] * g[m]).sum();
            worst = worst.max((out - expected).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-8 && secs < 5.0;
    report(2, pass, &format!("K = 1024, Q = 1, max |diff| = {worst:.2e} (< 1e-8), {secs:.2} s"));
    assert!(pass);
}

#[test]
fn criterion_03_golay_pairs_are_complementary() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut len = 2;
    while len <= 4096 {
        let pair = golay_pair(len).unwrap();
        for lag in 0..len {
            let sum: i64 = (0..len - lag)
                .map(|i| pair.a[i] as i64 * pair.a[i + lag] as i64 + pair.b[i] as i64 * pair.b[i + lag] as i64)
                .sum();
            let expected = if lag == 0 { 2 * len as i64 } else { 0 };
            if sum != expected {
                failures.push((len, lag, sum));
                break;
            }
        }
        len *= 2;
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 5.0;
    report(3, pass, &format!("lengths 2..4096, integer autocorrelation sums exact, failures {failures:?}, {secs:.2} s"));
    assert!(pass);
}

#[test]
fn criterion_04_post_beamform_multiplies_drop_by_k() {
    let mut detail = Vec::new();
    let mut pass = true;
    for k in [8usize, 64, 1024] {
        let q = 32;
        let ratio = post_beamform_cm_ratio(k, q);
        pass &= ratio == k as f64;
        detail.push(format!("K={k}: {ratio}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in [8usize, 16, 64] {
        let q = 4;
        let rows: Vec<Vec<Complex64>> = (0..q).map(|_| (0..k).map(|_| crand(&mut rng)).collect()).collect();
        let s = SpectrumSquare::from_antenna_spectra(k, &rows).unwrap();
        let w: Vec<Complex64> = (0..q).map(|_| crand(&mut rng)).collect();
        let g: Vec<Complex64> = (0..k).map(|_| crand(&mut rng)).collect();
        let (mut cd, mut ce) = (OpCount::default(), OpCount::default());
        beamform_mf_direct(&s, &w, &g, Some(&mut cd)).unwrap();
        beamform_mf_efficient(&s, &w, &g, NumericMode::F64, FxScaling::new(0, 1), Some(&mut ce)).unwrap();
        let beam = (k * q) as u64;
        let measured = (cd.cm - beam) as f64 / (ce.cm - beam) as f64;
        pass &= measured == k as f64 && ce == efficient_per_azimuth(k, q);
        detail.push(format!("instrumented K={k}: {measured}"));
    }
    report(4, pass, &format!("direct/efficient post-beamform CM ratio = K: {}", detail.join(", ")));
    assert!(pass);
}

/// Three noiseless on-grid targets with fixed amplitudes; returns a failure description.
fn noiseless_recovery(params: &RadarParams, cells: [(usize, usize, i64); 3], modes: StageModes) -> Option<String> {
    let derived = params.derive().unwrap();
    let mid = (params.d / 2) as i64;
    let targets: Vec<TargetSpec> = cells
        .iter()
        .zip([10.0f64, 5.0, 3.0])
        .map(|(&(bin, az, dv), rcs)| TargetSpec {
            range_m: derived.range_of_bin(bin),
            azimuth_deg: derived.azimuth_grid_deg[az],
            velocity_mps: derived.doppler_to_velocity(derived.doppler_grid_hz[(mid + dv) as usize]),
            mean_rcs_sqm: rcs,
            fixed_amplitude: Some(rcs.sqrt()),
        })
        .collect();
    let scenario = Scenario {
        params: params.clone(),
        targets: TargetSource::Fixed(targets.clone()),
        snr_db: vec![f64::INFINITY],
        trials: 1,
        rng_seed: 5,
    };
    let r = run_trial(&scenario, 0, f64::INFINITY, modes).unwrap();
    if r.detections.len() != 3 {
        return Some(format!("{} detections", r.detections.len()));
    }
    for (i, (d, &(bin, az, _))) in r.detections.iter().zip(&cells).enumerate() {
        let t = &targets[i];
        if d.range_bin != bin || d.azimuth_bin != az || (d.velocity_mps - t.velocity_mps).abs() > 1e-9 {
            return Some(format!(
                "target {}: cell ({}, {}) velocity {:.4}, expected ({bin}, {az}) velocity {:.4}",
                i + 1,
                d.range_bin,
                d.azimuth_bin,
                d.velocity_mps,
                t.velocity_mps
            ));
        }
    }
    None
}

#[test]
fn criterion_05_noiseless_exact_recovery() {
    let mut pass = true;
    let mut detail = Vec::new();
    let paper = RadarParams::default();
    let ci = load_scenario(config_path("ci.cfg")).unwrap().params;
    let f32_modes = StageModes::default();
    let f64_modes = StageModes { mf: NumericMode::F64, music: NumericMode::F64 };
    let cases = [
        ("paper", &paper, [(60, 60, 20), (200, 100, -35), (350, 135, 60)], 60.0),
        ("ci", &ci, [(20, 12, 5), (70, 20, -7), (110, 28, 11)], 5.0),
    ];
    for (name, params, cells, limit) in cases {
        for modes in [f64_modes, f32_modes] {
            let start = Instant::now();
            let failure = noiseless_recovery(params, cells, modes);
            let secs = start.elapsed().as_secs_f64();
            let ok = failure.is_none() && secs < limit;
            pass &= ok;
            detail.push(format!(
                "{name} {}/{}: {} ({secs:.2} s)",
                modes.mf.label(),
                modes.music.label(),
                failure.unwrap_or_else(|| "exact".into())
            ));
        }
    }
    report(5, pass, &detail.join("; "));
    assert!(pass);
}

/// Lowest SNR from which `pct` stays at or below `limit` for all higher SNRs.
fn crossing(snrs: &[f64], pct: &[f64], limit: f64) -> Option<f64> {
    let mut cross = None;
    for (s, p) in snrs.iter().zip(pct).rev() {
        if *p <= limit {
            cross = Some(*s);
        } else {
            break;
        }
    }
    cross
}

#[test]
fn criterion_06_rmse_structure() {
    let s = mc_scenario();
    let start = Instant::now();
    let reports = monte_carlo(&s, &[StageModes::default()], &McOptions::default()).unwrap();
    let snrs: Vec<f64> = reports.iter().map(|r| r.snr_db).collect();
    let pct = |t: usize| reports.iter().map(|r| r.pct(t, RANGE)).collect::<Vec<f64>>();
    let (p1, p2, p3) = (pct(0), pct(1), pct(2));
    let worst1 = p1.iter().cloned().fold(0.0, f64::max);
    let a_fail: Vec<String> = snrs
        .iter()
        .zip(&p1)
        .filter(|(_, p)| !(**p <= 0.5))
        .map(|(s, p)| format!("{p:.3}% at {s} dB"))
        .collect();
    let a = a_fail.is_empty();
    let c2 = crossing(&snrs, &p2, 0.5);
    let c3 = crossing(&snrs, &p3, 0.5);
    let b = c2.is_some_and(|c| (c + 5.0).abs() <= 5.0) && c3.is_some_and(|c| (c - 5.0).abs() <= 5.0);
    let c_fail: Vec<f64> = snrs
        .iter()
        .enumerate()
        .filter(|(i, s)| **s <= 0.0 && !(p3[*i] >= p2[*i] && p2[*i] >= p1[*i]))
        .map(|(_, s)| *s)
        .collect();
    let c = c_fail.is_empty();
    let pass = a && b && c;
    report(
        6,
        pass,
        &format!(
            "{} trials: (a) {} target-1 range <= 0.5% (max {worst1:.3}%{}); (b) {} crossings target 2 at {c2:?} dB (-5 +/- 5), target 3 at {c3:?} dB (+5 +/- 5); (c) {} ordering t3 >= t2 >= t1 at SNR <= 0{}; {:.1} s",
            s.trials,
            verdict(a),
            if a { String::new() } else { format!(", over at {}", a_fail.join(", ")) },
            verdict(b),
            verdict(c),
            if c { String::new() } else { format!(", violated at {c_fail:?} dB") },
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass || !strict());
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// Relative RMSE differences above 10% between two modes, across targets, parameters and SNRs.
/// Returns (over 10%, of which f32 was exactly zero, total points, worst finite relative difference).
fn relative_violations(base: &[&RmseReport], other: &[&RmseReport], targets: usize) -> (usize, usize, usize, f64) {
    let (mut bad, mut zero_base, mut total, mut worst) = (0, 0, 0, 0.0f64);
    for (b, o) in base.iter().zip(other) {
        for t in 0..targets {
            for p in [RANGE, AZIMUTH, VELOCITY] {
                let (x, y) = (b.value(t, p), o.value(t, p));
                let rel = if x == y { 0.0 } else { (y - x).abs() / x.abs() };
                total += 1;
                if rel.is_finite() {
                    worst = worst.max(rel);
                }
                if !(rel <= 0.10) {
                    bad += 1;
                    zero_base += usize::from(x == 0.0);
                }
            }
        }
    }
    (bad, zero_base, total, worst)
}

#[test]
fn criterion_07_word_length() {
    let s = mc_scenario();
    let start = Instant::now();
    let f32m = StageModes::default();
    let modes = [
        f32m,
        StageModes { mf: mode("fx32_5"), ..f32m },
        StageModes { mf: mode("fx24_5"), ..f32m },
        StageModes { mf: mode("fx19_5"), ..f32m },
        StageModes { music: mode("fx24_5"), ..f32m },
    ];
    let reports = monte_carlo(&s, &modes, &McOptions::default()).unwrap();
    let by_mode = |m: usize| reports.iter().skip(m).step_by(modes.len()).collect::<Vec<&RmseReport>>();
    let (base, fx32, fx24, fx19, music24) = (by_mode(0), by_mode(1), by_mode(2), by_mode(3), by_mode(4));
    let targets = s.targets.len();
    let (bad32, zero32, total, worst32) = relative_violations(&base, &fx32, targets);
    let (bad24, zero24, _, worst24) = relative_violations(&base, &fx24, targets);
    let mut ratios19 = Vec::new();
    for (b, o) in base.iter().zip(&fx19).filter(|(b, _)| b.snr_db <= 0.0) {
        ratios19.push((b.snr_db, o.value(2, RANGE) / b.value(2, RANGE)));
    }
    let ok19 = ratios19.iter().all(|(_, r)| *r >= 2.0);
    let mut music_not_worse = 0;
    for (b, o) in base.iter().zip(&music24) {
        for t in 0..targets {
            if !(o.value(t, VELOCITY) > b.value(t, VELOCITY)) {
                music_not_worse += 1;
            }
        }
    }
    let (ok32, ok24, ok_music) = (bad32 == 0, bad24 == 0, music_not_worse == 0);
    let pass = ok32 && ok24 && ok19 && ok_music;
    let r19: Vec<String> = ratios19.iter().map(|(s, r)| format!("{s} dB {r:.2}x")).collect();
    report(
        7,
        pass,
        &format!(
            "{} trials: {} fx32_5 within 10% of f32 ({bad32}/{total} over, {zero32} with zero f32 RMSE, worst finite {:.1}%); {} fx24_5 within 10% ({bad24}/{total} over, {zero24} with zero f32 RMSE, worst finite {:.1}%); {} fx19_5 target-3 range >= 2x f32 at SNR <= 0 ({}); {} fx24_5 MUSIC Doppler worse than f32 ({music_not_worse} exceptions); {:.1} s",
            s.trials,
            verdict(ok32),
            worst32 * 100.0,
            verdict(ok24),
            worst24 * 100.0,
            verdict(ok19),
            r19.join(", "),
            verdict(ok_music),
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass || !strict());
}

/// Largest `|v_est - v|` of noiseless MUSIC over random off-grid velocities.
fn max_grid_error(params: &RadarParams, samples: usize, rng: &mut impl Rng) -> (f64, f64) {
    let derived = params.derive().unwrap();
    let steering = doppler_steering(&derived, params.n);
    let t = derived.t_pri_s;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let v = rng.random_range(-params.v_span_mps..params.v_span_mps);
        let f = derived.velocity_to_doppler(v);
        let y: Vec<Complex64> = (0..params.n).map(|n| Complex64::from_polar(1.0, -2.0 * PI * f * n as f64 * t)).collect();
        let out = music_doppler(&y, &derived, &steering, NumericMode::F64, 1.0).unwrap();
        worst = worst.max((out.velocity_mps - v).abs());
    }
    (worst, derived.velocity_step() / 2.0)
}

#[test]
fn criterion_08_reconfigurability() {
    let start = Instant::now();
    let paper = RadarParams::default();
    let base = ArchConfig::from_params(&paper);
    let ratio = |dphi: f64| estimate_mf_stage_ratio(&base, &ArchConfig { delta_phi_deg: dphi, ..base }, &paper).unwrap();
    let (r2, r4) = (ratio(2.0), ratio(4.0));
    let ok_ratio = (r2 - 181.0 / 91.0).abs() < 1e-12
        && (r4 - 181.0 / 46.0).abs() < 1e-12
        && (r2 / 1.96 - 1.0).abs() <= 0.2
        && (r4 / 3.75 - 1.0).abs() <= 0.2;

    let mut s = mc_scenario();
    s.snr_db = vec![0.0, 5.0, 10.0];
    let packets = run_sweep(SweepKind::Packets, &s, "10,20,50,100", StageModes::default(), &McOptions::default()).unwrap();
    let mut increases = Vec::new();
    for snr in &s.snr_db {
        for t in 0..s.targets.len() {
            let series: Vec<(String, f64)> = packets
                .points
                .iter()
                .filter(|p| p.report.snr_db == *snr)
                .map(|p| (p.value.clone(), p.report.value(t, VELOCITY)))
                .collect();
            for w in series.windows(2) {
                if !(w[1].1 <= w[0].1) {
                    increases.push(format!("t{} {snr} dB N {}->{}: {:.4}->{:.4}", t + 1, w[0].0, w[1].0, w[0].1, w[1].1));
                }
            }
        }
    }
    let ok_packets = increases.is_empty();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let narrow = RadarParams { v_span_mps: 5.0, ..s.params.clone() };
    let (err40, half40) = max_grid_error(&RadarParams { d: 40, ..narrow.clone() }, 500, &mut rng);
    let (err200, half200) = max_grid_error(&RadarParams { d: 200, ..narrow.clone() }, 500, &mut rng);
    let ok_grid = err40 <= half40 * (1.0 + 1e-9) && err200 <= half200 * (1.0 + 1e-9);

    let ds = Scenario { params: narrow, ..s.clone() };
    let dsweep = run_sweep(SweepKind::DopplerElems, &ds, "40,200", StageModes::default(), &McOptions::default()).unwrap();
    let (coarse, fine): (Vec<_>, Vec<_>) = dsweep.points.iter().partition(|p| p.value == "40");
    let mut not_worse = Vec::new();
    for (c, f) in coarse.iter().zip(&fine) {
        for t in 0..ds.targets.len() {
            let (ec, ef) = (c.report.value(t, VELOCITY), f.report.value(t, VELOCITY));
            if !(ec > ef) {
                not_worse.push(format!("t{} {} dB {ec:.3} vs {ef:.3}", t + 1, c.report.snr_db));
            }
        }
    }
    let ok_d = not_worse.is_empty();
    let pass = ok_ratio && ok_packets && ok_grid && ok_d;
    report(
        8,
        pass,
        &format!(
            "{} MF-stage ratios {r2:.4} (181/91) and {r4:.4} (181/46) vs 1.96/3.75 +/- 20%; {} Doppler RMSE non-increasing in N over 10,20,50,100 at 0/5/10 dB{}; {} grid error max {err40:.4} <= {half40:.4} (D=40), {err200:.4} <= {half200:.4} (D=200); {} D=40 Doppler RMSE above D=200{}; {:.1} s",
            verdict(ok_ratio),
            verdict(ok_packets),
            if ok_packets { String::new() } else { format!(" (increases: {})", increases.join("; ")) },
            verdict(ok_grid),
            verdict(ok_d),
            if ok_d { String::new() } else { format!(" (exceptions: {})", not_worse.join("; ")) },
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass || !strict());
}

#[test]
fn criterion_09_rank_one_evd() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_l1, mut worst_rest, mut worst_leak) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let y: Vec<Complex64> = (0..100).map(|_| crand(&mut rng)).collect();
        let norm2: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let evd = evd_qr_iteration(&autocov(&y).unwrap(), DEFAULT_TOL, DEFAULT_MAX_ITER);
        let l1 = evd.eigvals[0];
        worst_l1 = worst_l1.max((l1 - norm2).abs() / norm2);
        worst_rest = worst_rest.max(evd.eigvals[1..].iter().map(|v| v.abs()).fold(0.0, f64::max) / l1);
        let leak: f64 = evd
            .noise_subspace()
            .iter()
            .map(|e| e.iter().zip(&y).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr())
            .sum();
        worst_leak = worst_leak.max(leak.sqrt() / norm2.sqrt());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_l1 <= 1e-6 && worst_rest <= 1e-6 && worst_leak <= 1e-6 && secs < 30.0;
    report(
        9,
        pass,
        &format!(
            "1000 draws, N = 100: |l1 - |y|^2|/|y|^2 <= {worst_l1:.1e}, max|l_j|/l1 <= {worst_rest:.1e}, |E^H y|/|y| <= {worst_leak:.1e} (all <= 1e-6), {secs:.1} s"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_thread_count_does_not_change_output() {
    let s = load_scenario(config_path("ci.cfg")).unwrap();
    let values = s.snr_db.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    let many = thread_count(None).max(4);
    let csv = |threads: usize| {
        let out = run_sweep(SweepKind::Snr, &s, &values, StageModes::default(), &McOptions { threads: Some(threads), ..Default::default() })
            .unwrap();
        let mut buf = Vec::new();
        write_rmse_csv(&mut buf, "snr", &out.rows(), true).unwrap();
        buf
    };
    let (one, all) = (csv(1), csv(many));
    let pass = one == all;
    report(10, pass, &format!("ci SNR sweep, 1 thread vs {many} threads: {} CSV bytes, identical = {pass}", one.len()));
    assert!(pass);
}
