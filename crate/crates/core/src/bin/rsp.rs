//! Command-line driver: single-scenario runs, parameter sweeps, cost tables,
//! PSF dumps and CSV plotting.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use jrc_rsp::bench::{
    run_sweep, svg_heatmap, svg_line_plot, synthesize_trial, write_rmse_csv, McOptions, Pairing, Pipeline, Series,
    StageModes, SweepKind, PARAM_NAMES,
};
use jrc_rsp::clean::{psf, write_detections_csv};
use jrc_rsp::complexity::{complexity_table, write_table_csv, write_table_markdown};
use jrc_rsp::fxp::NumericMode;
use jrc_rsp::music::write_spectrum_csv;
use jrc_rsp::params::{load_scenario, RadarParams, Scenario};
use jrc_rsp::{Result, RspError};

#[derive(Parser)]
#[command(name = "rsp", version, about = "Range, azimuth and Doppler processing for a JRC receiver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ModeArgs {
    /// Numeric mode of the range-azimuth stage: f64, f32 or fx<W>_<L>.
    #[arg(long, default_value = "f32")]
    mode: NumericMode,
    /// Numeric mode of the MUSIC stage.
    #[arg(long, default_value = "f32")]
    music_mode: NumericMode,
}

impl ModeArgs {
    fn stage_modes(&self) -> StageModes {
        StageModes { mf: self.mode, music: self.music_mode }
    }
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (defaults to RSP_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the scenario's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario's trial count.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Nearest,
    Rank,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Line,
    Heatmap,
}

#[derive(Subcommand)]
enum Command {
    /// Process trials of one scenario; writes detections.csv and MUSIC spectra.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        modes: ModeArgs,
        /// SNR in dB (default: the scenario's first SNR point).
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
    },
    /// Monte Carlo RMSE while varying one parameter; writes rmse_vs_<kind>.csv/.svg.
    Sweep {
        #[arg(value_parser = parse_kind)]
        kind: SweepKind,
        /// Comma list or start:step:stop; numeric modes for word-length sweeps.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        modes: ModeArgs,
        #[arg(long, value_enum, default_value = "nearest")]
        pairing: PairingArg,
    },
    /// Operation counts and modeled time ratios.
    Complexity {
        /// `default` or a scenario file.
        #[arg(long, default_value = "default")]
        config: String,
        /// Also write complexity.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Point spread function of the imaging chain at one cell.
    Psf {
        #[arg(long, default_value = "default")]
        config: String,
        #[arg(long, default_value_t = 100)]
        range_bin: usize,
        #[arg(long)]
        azimuth_bin: Option<usize>,
        #[arg(long, default_value = "f32")]
        mode: NumericMode,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Render an RMSE CSV (line) or magnitude CSV (heatmap) as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "line")]
        kind: PlotKind,
        /// Parameter plotted from an RMSE CSV.
        #[arg(long, default_value = "range")]
        param: String,
    },
}

fn parse_kind(s: &str) -> std::result::Result<SweepKind, String> {
    s.parse().map_err(|e: RspError| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { run, modes, snr } => simulate(&run, modes.stage_modes(), snr.as_deref()),
        Command::Sweep { kind, values, run, modes, pairing } => {
            let pairing = match pairing {
                PairingArg::Nearest => Pairing::Nearest,
                PairingArg::Rank => Pairing::AmplitudeRank,
            };
            sweep(kind, &values, &run, modes.stage_modes(), pairing)
        }
        Command::Complexity { config, out_dir } => complexity(&config, out_dir.as_deref()),
        Command::Psf { config, range_bin, azimuth_bin, mode, out_dir } => {
            dump_psf(&config, range_bin, azimuth_bin, mode, &out_dir)
        }
        Command::Plot { input, output, kind, param } => plot(&input, &output, kind, &param),
    }
}

fn load(path: &Path) -> Result<Scenario> {
    if !path.is_file() {
        return Err(RspError::Validation(format!("scenario file {} not found", path.display())));
    }
    load_scenario(path)
}

fn load_run(run: &RunArgs) -> Result<Scenario> {
    let mut s = load(&run.scenario)?;
    if let Some(seed) = run.seed {
        s.rng_seed = seed;
    }
    if let Some(t) = run.trials {
        s.trials = t;
    }
    s.validate()?;
    Ok(s)
}

fn params_from(config: &str) -> Result<RadarParams> {
    if config == "default" {
        Ok(RadarParams::default())
    } else {
        Ok(load(Path::new(config))?.params)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn simulate(run: &RunArgs, modes: StageModes, snr: Option<&str>) -> Result<()> {
    let s = load_run(run)?;
    let snr = match snr {
        Some(text) => *jrc_rsp::params::parse_values(text)?
            .first()
            .ok_or_else(|| RspError::Validation("empty --snr".into()))?,
        None => s.snr_db[0],
    };
    let pipeline = Pipeline::new(&s.params)?;
    let mut rows = Vec::with_capacity(s.trials);
    for trial in 0..s.trials {
        let (truths, cube) = synthesize_trial(&s, &pipeline, trial, snr)?;
        let (detections, spectra) = pipeline.process(&cube, modes)?;
        for (it, spec) in spectra.iter().enumerate() {
            if let Some(out) = spec {
                let mut w = create(&run.out_dir, &format!("music_t{trial}_i{}.csv", it + 1))?;
                write_spectrum_csv(&mut w, &out.spectrum, &pipeline.derived)?;
                w.flush()?;
            }
        }
        for (i, t) in truths.iter().enumerate() {
            println!(
                "trial {trial} truth {}: range {:.3} m, azimuth {:.2} deg, velocity {:.2} m/s",
                i + 1,
                t.range_m,
                t.azimuth_deg,
                t.velocity_mps
            );
        }
        for (i, d) in detections.iter().enumerate() {
            println!(
                "trial {trial} detection {}: range {:.3} m, azimuth {:.2} deg, velocity {:.2} m/s",
                i + 1,
                d.range_m,
                d.azimuth_deg,
                d.velocity_mps
            );
        }
        rows.push((trial, detections));
    }
    let mut w = create(&run.out_dir, "detections.csv")?;
    write_detections_csv(&mut w, &rows, true)?;
    w.flush()?;
    Ok(())
}

fn sweep(kind: SweepKind, values: &str, run: &RunArgs, modes: StageModes, pairing: Pairing) -> Result<()> {
    let s = load_run(run)?;
    let out = run_sweep(kind, &s, values, modes, &McOptions { threads: run.threads, pairing })?;
    let mut csv = Vec::new();
    write_rmse_csv(&mut csv, kind.name(), &out.rows(), true)?;
    let stem = kind.output_stem();
    fs::create_dir_all(&run.out_dir)?;
    fs::write(run.out_dir.join(format!("{stem}.csv")), &csv)?;
    let param = match kind {
        SweepKind::DeltaPhi => "azimuth",
        SweepKind::Packets | SweepKind::DopplerElems | SweepKind::MusicWordlength => "velocity",
        _ => "range",
    };
    let svg = rmse_svg(&String::from_utf8_lossy(&csv), param, &format!("RMSE vs {}", kind.name()))?;
    fs::write(run.out_dir.join(format!("{stem}.svg")), svg)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

fn complexity(config: &str, out_dir: Option<&Path>) -> Result<()> {
    let params = params_from(config)?;
    let rows = complexity_table(&params)?;
    write_table_markdown(&rows, io::stdout().lock())?;
    if let Some(dir) = out_dir {
        let mut w = create(dir, "complexity.csv")?;
        write_table_csv(&rows, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn dump_psf(config: &str, range_bin: usize, azimuth_bin: Option<usize>, mode: NumericMode, dir: &Path) -> Result<()> {
    let params = params_from(config)?;
    let pipeline = Pipeline::new(&params)?;
    let proc = pipeline.processor(mode)?;
    let ib = azimuth_bin.unwrap_or(pipeline.steering.azimuths() / 2);
    let value = Complex64::new((params.q * params.golay_len) as f64, 0.0);
    let img = psf(&proc, &params, &pipeline.waveform, value, range_bin, ib)?;
    let mut w = create(dir, "psf.csv")?;
    img.write_magnitude_csv(&mut w, &pipeline.derived.azimuth_grid_deg)?;
    w.flush()?;
    let (k, i) = img.dims();
    let (lo, hi) = (range_bin.saturating_sub(32), (range_bin + 33).min(k));
    let mut grid = Vec::with_capacity((hi - lo) * i);
    for kk in lo..hi {
        grid.extend((0..i).map(|ii| img.get(kk, ii).norm()));
    }
    let title = format!("PSF at range bin {range_bin}, azimuth {:.1} deg", pipeline.steering.azimuth_deg(ib));
    fs::write(dir.join("psf.svg"), svg_heatmap(&title, hi - lo, i, &grid, -60.0))?;
    Ok(())
}

fn plot(input: &Path, output: &Path, kind: PlotKind, param: &str) -> Result<()> {
    let text = fs::read_to_string(input)
        .map_err(|e| RspError::Validation(format!("cannot read {}: {e}", input.display())))?;
    let title = input.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let svg = match kind {
        PlotKind::Line => rmse_svg(&text, param, &title)?,
        PlotKind::Heatmap => magnitude_svg(&text, &title)?,
    };
    fs::write(output, svg)?;
    Ok(())
}

fn bad_csv(msg: impl Into<String>) -> RspError {
    RspError::Validation(format!("CSV: {}", msg.into()))
}

/// Span-normalized RMSE per target. The x axis is SNR when the file has
/// several SNR points, otherwise the swept value.
fn rmse_svg(text: &str, param: &str, title: &str) -> Result<String> {
    if !PARAM_NAMES.contains(&param) {
        return Err(RspError::Validation(format!("unknown parameter '{param}'")));
    }
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad_csv("empty file"))?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or_else(|| bad_csv(format!("missing column {name}")));
    let (c_value, c_snr, c_target, c_param, c_pct) =
        (col("value")?, col("snr_db")?, col("target")?, col("param")?, col("rmse_pct")?);
    let rows: Vec<Vec<&str>> = lines.filter(|l| !l.trim().is_empty()).map(|l| l.split(',').collect()).collect();
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(bad_csv("ragged row"));
    }
    let mut snrs: Vec<&str> = rows.iter().map(|r| r[c_snr]).collect();
    snrs.sort_unstable();
    snrs.dedup();
    let by_snr = snrs.len() > 1;
    let mut values: Vec<&str> = Vec::new();
    for r in &rows {
        if !values.contains(&r[c_value]) {
            values.push(r[c_value]);
        }
    }
    let numeric_values = values.iter().all(|v| v.parse::<f64>().is_ok());
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r[c_param] == param) {
        let y: f64 = r[c_pct].parse().unwrap_or(f64::NAN);
        let (name, x) = if by_snr {
            let name = if values.len() > 1 { format!("{} t{}", r[c_value], r[c_target]) } else { format!("target {}", r[c_target]) };
            (name, r[c_snr].parse().unwrap_or(f64::NAN))
        } else if numeric_values {
            (format!("target {}", r[c_target]), r[c_value].parse().unwrap_or(f64::NAN))
        } else {
            let idx = values.iter().position(|v| *v == r[c_value]).unwrap_or(0);
            (format!("target {}", r[c_target]), idx as f64)
        };
        series.entry(name).or_default().push((x, y));
    }
    let xlabel = if by_snr {
        "SNR (dB)".to_string()
    } else if numeric_values {
        "value".to_string()
    } else {
        format!("mode ({})", values.join(", "))
    };
    let series: Vec<Series> = series.into_iter().map(|(name, points)| Series { name, points }).collect();
    Ok(svg_line_plot(title, &xlabel, &format!("{param} RMSE (% of span)"), &series))
}

fn magnitude_svg(text: &str, title: &str) -> Result<String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad_csv("empty file"))?;
    let cols = header.split(',').count() - 1;
    let mut grid = Vec::new();
    let mut rows = 0;
    for l in lines.filter(|l| !l.trim().is_empty()) {
        let cells: Vec<&str> = l.split(',').skip(1).collect();
        if cells.len() != cols {
            return Err(bad_csv("ragged row"));
        }
        for c in cells {
            grid.push(c.trim().parse::<f64>().map_err(|_| bad_csv(format!("'{c}' is not a number")))?);
        }
        rows += 1;
    }
    if rows == 0 || cols == 0 {
        return Err(bad_csv("no data"));
    }
    Ok(svg_heatmap(title, rows, cols, &grid, -60.0))
}
