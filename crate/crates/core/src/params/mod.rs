//! System constants, derived grids and scenario descriptions.
//!
//! [`RadarParams`] is the single source of truth for every dimension used by
//! the processing chain. Derived quantities (wavelength, grids, resolutions)
//! live in [`DerivedParams`] and are always recomputed from the raw
//! parameters so the two can never disagree.

mod file;

pub use file::{load_scenario, parse_scenario, parse_values, serialize_scenario};

use crate::error::{Result, RspError};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RadarParams {
    /// Fast-time samples per packet.
    pub k: usize,
    /// Chips in the Golay sequence, zero padded to `k`.
    pub golay_len: usize,
    /// Antennas in the uniform linear array.
    pub q: usize,
    /// Packets per coherent processing interval.
    pub n: usize,
    /// Azimuth grid step in degrees.
    pub delta_phi_deg: f64,
    /// Doppler grid size.
    pub d: usize,
    /// Unambiguous velocity half-span (m/s).
    pub v_span_mps: f64,
    pub fc_hz: f64,
    /// Fast-time sample period (s).
    pub ts_s: f64,
    /// Pulse repetition interval; `None` selects `1 / (2 f_Dmax)`.
    pub t_pri_s: Option<f64>,
    /// Element spacing; `None` selects half a wavelength.
    pub d_m: Option<f64>,
    /// Range window searched by the peak detector (m).
    pub range_gate_m: (f64, f64),
    /// CLEAN iteration budget.
    pub p_tilde: usize,
    /// Relative residue stop criterion for CLEAN (0 disables it).
    pub residue_threshold: f64,
    /// Power-of-two attenuation applied when spectra enter a fixed-point
    /// datapath. Models the receiver gain ahead of the fixed-point IPs.
    pub fx_input_shift: u32,
}

impl Default for RadarParams {
    fn default() -> Self {
        RadarParams {
            k: 1024,
            golay_len: 512,
            q: 32,
            n: 100,
            delta_phi_deg: 1.0,
            d: 201,
            v_span_mps: 30.0,
            fc_hz: 60.0e9,
            ts_s: 2.0 * 0.085 / SPEED_OF_LIGHT,
            t_pri_s: None,
            d_m: None,
            range_gate_m: (0.0, 40.0),
            p_tilde: 3,
            residue_threshold: 0.0,
            fx_input_shift: DEFAULT_FX_INPUT_SHIFT,
        }
    }
}

/// Default fixed-point input attenuation (see [`RadarParams::fx_input_shift`]).
pub const DEFAULT_FX_INPUT_SHIFT: u32 = 22;

/// Quantities computed from [`RadarParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub lambda_m: f64,
    /// Number of azimuth bins.
    pub i: usize,
    pub delta_r_m: f64,
    pub f_d_max_hz: f64,
    pub t_pri_s: f64,
    pub d_m: f64,
    pub duty_cycle: f64,
    /// Azimuth grid in degrees, `-90 + i * delta_phi`.
    pub azimuth_grid_deg: Vec<f64>,
    /// Doppler grid in Hz, `D` points spanning `[-f_Dmax, +f_Dmax]`.
    pub doppler_grid_hz: Vec<f64>,
    /// Inclusive range-bin window of the peak detector.
    pub range_bins: (usize, usize),
}

impl DerivedParams {
    pub fn doppler_to_velocity(&self, f_d_hz: f64) -> f64 {
        f_d_hz * self.lambda_m / 2.0
    }

    pub fn velocity_to_doppler(&self, v_mps: f64) -> f64 {
        2.0 * v_mps / self.lambda_m
    }

    /// Velocity spacing of the Doppler grid.
    pub fn velocity_step(&self) -> f64 {
        if self.doppler_grid_hz.len() < 2 {
            return 0.0;
        }
        self.doppler_to_velocity(self.doppler_grid_hz[1] - self.doppler_grid_hz[0])
    }

    /// Width of the unambiguous velocity interval, `lambda / (2 T_PRI)`.
    pub fn unambiguous_velocity_span(&self) -> f64 {
        self.lambda_m / (2.0 * self.t_pri_s)
    }

    pub fn range_of_bin(&self, bin: usize) -> f64 {
        bin as f64 * self.delta_r_m
    }
}

impl RadarParams {
    pub fn lambda(&self) -> f64 {
        SPEED_OF_LIGHT / self.fc_hz
    }

    pub fn azimuth_count(&self) -> usize {
        (180.0 / self.delta_phi_deg + 1e-9).floor() as usize + 1
    }

    pub fn delta_r(&self) -> f64 {
        SPEED_OF_LIGHT * self.ts_s / 2.0
    }

    pub fn f_d_max(&self) -> f64 {
        2.0 * self.v_span_mps / self.lambda()
    }

    pub fn t_pri(&self) -> f64 {
        self.t_pri_s.unwrap_or_else(|| 1.0 / (2.0 * self.f_d_max()))
    }

    pub fn element_spacing(&self) -> f64 {
        self.d_m.unwrap_or_else(|| self.lambda() / 2.0)
    }

    /// Check every invariant; the message names the one that failed.
    pub fn validate(&self) -> Result<()> {
        if !self.k.is_power_of_two() {
            return Err(RspError::validation(format!("K = {} is not a power of two", self.k)));
        }
        if !self.golay_len.is_power_of_two() {
            return Err(RspError::validation(format!(
                "golay_len = {} is not a power of two",
                self.golay_len
            )));
        }
        if self.golay_len > self.k {
            return Err(RspError::validation("golay_len exceeds K"));
        }
        if self.q == 0 {
            return Err(RspError::validation("Q must be at least 1"));
        }
        if self.n == 0 {
            return Err(RspError::validation("N must be at least 1"));
        }
        if !(self.delta_phi_deg > 0.0 && self.delta_phi_deg <= 180.0) {
            return Err(RspError::validation("delta_phi_deg must lie in (0, 180]"));
        }
        if self.d < 2 {
            return Err(RspError::validation("D must be at least 2"));
        }
        for (name, v) in [
            ("fc_hz", self.fc_hz),
            ("Ts_s", self.ts_s),
            ("v_span_mps", self.v_span_mps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(RspError::validation(format!("{name} must be positive")));
            }
        }
        if let Some(t) = self.t_pri_s {
            if !(t.is_finite() && t > 0.0) {
                return Err(RspError::validation("T_PRI_s must be positive"));
            }
        }
        if let Some(d) = self.d_m {
            if !(d.is_finite() && d > 0.0) {
                return Err(RspError::validation("d_m must be positive"));
            }
        }
        let (lo, hi) = self.range_gate_m;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(RspError::validation("range_gate_m must satisfy 0 <= min < max"));
        }
        let max_bin = (hi / self.delta_r()).floor() as usize;
        if max_bin >= self.k - self.golay_len {
            return Err(RspError::validation(format!(
                "range gate bin {max_bin} does not fit inside the zero padding (K - golay_len = {})",
                self.k - self.golay_len
            )));
        }
        if self.f_d_max() * self.t_pri() > 0.5 + 1e-12 {
            return Err(RspError::validation(
                "velocity span aliases: f_Dmax * T_PRI exceeds 1/2",
            ));
        }
        if self.p_tilde == 0 {
            return Err(RspError::validation("P_tilde must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.residue_threshold) {
            return Err(RspError::validation("residue_threshold must lie in [0, 1)"));
        }
        if self.fx_input_shift > 40 {
            return Err(RspError::validation("fx_input_shift must be at most 40"));
        }
        Ok(())
    }

    /// Validate and compute every derived quantity.
    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let i = self.azimuth_count();
        let azimuth_grid_deg = (0..i)
            .map(|idx| -90.0 + idx as f64 * self.delta_phi_deg)
            .collect();
        let f_d_max = self.f_d_max();
        let doppler_grid_hz = (0..self.d)
            .map(|j| {
                // symmetric construction keeps f[j] == -f[D-1-j] exactly
                let t = (2 * j) as f64 - (self.d - 1) as f64;
                f_d_max * (t / (self.d - 1) as f64)
            })
            .collect();
        let delta_r = self.delta_r();
        let (lo, hi) = self.range_gate_m;
        let t_pri = self.t_pri();
        Ok(DerivedParams {
            lambda_m: self.lambda(),
            i,
            delta_r_m: delta_r,
            f_d_max_hz: f_d_max,
            t_pri_s: t_pri,
            d_m: self.element_spacing(),
            duty_cycle: self.k as f64 * self.ts_s / t_pri,
            azimuth_grid_deg,
            doppler_grid_hz,
            range_bins: ((lo / delta_r).ceil() as usize, (hi / delta_r).floor() as usize),
        })
    }
}

/// One point target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub velocity_mps: f64,
    /// Mean of the Swerling-1 cross-section draw (m^2).
    pub mean_rcs_sqm: f64,
    /// Deterministic amplitude overriding the random draw.
    pub fixed_amplitude: Option<f64>,
}

impl TargetSpec {
    pub fn validate(&self, params: &RadarParams) -> Result<()> {
        let (lo, hi) = params.range_gate_m;
        if !(self.range_m >= lo && self.range_m <= hi) {
            return Err(RspError::validation(format!(
                "target range {} m outside the range gate [{lo}, {hi}]",
                self.range_m
            )));
        }
        if !(-90.0..=90.0).contains(&self.azimuth_deg) {
            return Err(RspError::validation(format!(
                "target azimuth {} deg outside [-90, 90]",
                self.azimuth_deg
            )));
        }
        if !(self.velocity_mps.abs() <= params.v_span_mps) {
            return Err(RspError::validation(format!(
                "target velocity {} m/s outside +/-{}",
                self.velocity_mps, params.v_span_mps
            )));
        }
        if !(self.mean_rcs_sqm.is_finite() && self.mean_rcs_sqm > 0.0) {
            return Err(RspError::validation("mean_rcs_sqm must be positive"));
        }
        if let Some(a) = self.fixed_amplitude {
            if !(a.is_finite() && a >= 0.0) {
                return Err(RspError::validation("fixed_amplitude must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Where a scenario's targets come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSource {
    Fixed(Vec<TargetSpec>),
    /// `count` targets placed uniformly in the field of view each trial, one
    /// mean cross-section per target. With `on_grid` range and azimuth are
    /// drawn from the range bins and the beamforming grid.
    Random { mean_rcs_sqm: Vec<f64>, on_grid: bool },
}

impl TargetSource {
    pub fn len(&self) -> usize {
        match self {
            TargetSource::Fixed(t) => t.len(),
            TargetSource::Random { mean_rcs_sqm, .. } => mean_rcs_sqm.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: RadarParams,
    pub targets: TargetSource,
    /// SNR points in dB; `+inf` disables noise.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub rng_seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(RspError::validation("trials must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(RspError::validation("snr_db must list at least one value"));
        }
        if self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(RspError::validation("snr_db values must be finite or +inf"));
        }
        match &self.targets {
            TargetSource::Fixed(list) => {
                if list.is_empty() {
                    return Err(RspError::validation("scenario lists no targets"));
                }
                for t in list {
                    t.validate(&self.params)?;
                }
            }
            TargetSource::Random { mean_rcs_sqm, .. } => {
                if mean_rcs_sqm.is_empty() {
                    return Err(RspError::validation("random target count must be at least 1"));
                }
                if mean_rcs_sqm.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                    return Err(RspError::validation("mean_rcs_sqm must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        self.params.derive()
    }
}
