//! Doppler estimation by MUSIC on each detected cell's slow-time vector.
//!
//! The covariance is the single-snapshot outer product `y y^H`; its
//! eigen-decomposition comes from unshifted QR iteration with Householder
//! factorizations. The dominant eigenvector spans the signal subspace and
//! the remaining `N - 1` columns form the noise subspace `E`.

mod arith;

use std::io::Write;

use num_complex::Complex64;

pub use arith::{Arith, Cx, F32Arith, F64Arith, FxArith};

use crate::error::{Result, RspError};
use crate::fxp::NumericMode;
use crate::params::DerivedParams;
use crate::range_azimuth::RangeAzimuthImage;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(RspError::dimension("matrix must be square"));
        }
        Ok(CMatrix { n, data: rows.concat() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct EvdResult {
    /// Descending.
    pub eigvals: Vec<f64>,
    /// Column `j` pairs with `eigvals[j]`.
    pub eigvecs: CMatrix,
    pub iterations: usize,
    /// Off-diagonal Frobenius norm of the last iterate.
    pub residual: f64,
    pub converged: bool,
}

impl EvdResult {
    /// Dominant eigenvector.
    pub fn signal_subspace(&self) -> Vec<Complex64> {
        self.eigvecs.column(0)
    }

    /// Remaining eigenvectors as columns `1..N`.
    pub fn noise_subspace(&self) -> Vec<Vec<Complex64>> {
        (1..self.eigvecs.n()).map(|c| self.eigvecs.column(c)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MusicSpectrum {
    pub grid_hz: Vec<f64>,
    pub mu: Vec<f64>,
    /// `10 log10(mu / max(mu))`, for display.
    pub mu_db: Vec<f64>,
}

/// Doppler steering vectors, `v[j][n] = exp(-j 2 pi f_D[j] n T_PRI)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerSteering {
    pub grid_hz: Vec<f64>,
    /// One length-`N` vector per grid frequency.
    pub columns: Vec<Vec<Complex64>>,
}

impl DopplerSteering {
    pub fn packets(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

/// Cell `(range_bin, azimuth_bin)` of every packet image.
pub fn extract_slow_time(
    images: &[RangeAzimuthImage],
    range_bin: usize,
    azimuth_bin: usize,
) -> Result<Vec<Complex64>> {
    let Some(first) = images.first() else {
        return Ok(Vec::new());
    };
    let dims = first.dims();
    if images.iter().any(|im| im.dims() != dims) {
        return Err(RspError::dimension("packet images differ in size"));
    }
    if range_bin >= dims.0 || azimuth_bin >= dims.1 {
        return Err(RspError::dimension(format!(
            "cell ({range_bin}, {azimuth_bin}) outside a {} x {} image",
            dims.0, dims.1
        )));
    }
    Ok(images.iter().map(|im| im.get(range_bin, azimuth_bin)).collect())
}

/// Rank-one covariance `y y^H`.
pub fn autocov(y: &[Complex64]) -> Result<CMatrix> {
    let n = y.len();
    if n < 2 {
        return Err(RspError::validation(format!("covariance needs N >= 2 packets, got {n}")));
    }
    let mut m = CMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, y[r] * y[c].conj());
        }
    }
    Ok(m)
}

type Mat<R> = Vec<Cx<R>>;

fn to_generic<A: Arith>(ar: &A, m: &CMatrix, scale: f64) -> Mat<A::R> {
    m.data.iter().map(|z| ar.complex(z * scale)).collect()
}

fn from_generic<A: Arith>(ar: &A, n: usize, m: &Mat<A::R>, scale: f64) -> CMatrix {
    CMatrix { n, data: m.iter().map(|z| ar.to_c64(*z) * scale).collect() }
}

/// Householder QR with a real non-negative diagonal on `R`.
fn qr_generic<A: Arith>(ar: &A, n: usize, a: &Mat<A::R>) -> (Mat<A::R>, Mat<A::R>) {
    let mut r = a.clone();
    let mut q: Mat<A::R> = (0..n * n)
        .map(|i| if i % (n + 1) == 0 { ar.complex(Complex64::new(1.0, 0.0)) } else { ar.czero() })
        .collect();
    let two = ar.real(2.0);
    for j in 0..n.saturating_sub(1) {
        let x: Vec<Cx<A::R>> = (j..n).map(|i| r[i * n + j]).collect();
        let norm_x = ar.sqrt(ar.norm_sqr(&x));
        if norm_x == ar.zero() {
            continue;
        }
        let abs_x0 = ar.sqrt(ar.norm_sqr(&x[..1]));
        let phase = if abs_x0 == ar.zero() {
            ar.complex(Complex64::new(1.0, 0.0))
        } else {
            ar.cdiv_real(x[0], abs_x0)
        };
        // v = x + phase |x| e1 avoids cancellation; |v|^2 = 2 |x| (|x| + |x0|)
        let mut v = x;
        v[0] = ar.cadd(v[0], ar.cscale(phase, norm_x));
        let v_norm = ar.sqrt(ar.norm_sqr(&v));
        if v_norm == ar.zero() {
            continue;
        }
        let u: Vec<Cx<A::R>> = v.iter().map(|&z| ar.cdiv_real(z, v_norm)).collect();
        // R <- (I - 2 u u^H) R on rows j..n
        for c in 0..n {
            let pairs: Vec<_> = u.iter().enumerate().map(|(t, &ut)| (ut, r[(j + t) * n + c])).collect();
            let s = ar.cscale(ar.cdot(&pairs, true), two);
            for (t, &ut) in u.iter().enumerate() {
                let idx = (j + t) * n + c;
                r[idx] = ar.csub(r[idx], ar.cmul(ut, s));
            }
        }
        // Q <- Q (I - 2 u u^H) on columns j..n
        for row in 0..n {
            let pairs: Vec<_> = u.iter().enumerate().map(|(t, &ut)| (q[row * n + j + t], ut)).collect();
            let s = ar.cscale(ar.cdot(&pairs, false), two);
            for (t, &ut) in u.iter().enumerate() {
                let idx = row * n + j + t;
                q[idx] = ar.csub(q[idx], ar.cmul(s, ar.conj(ut)));
            }
        }
    }
    // Rotate each diagonal entry of R onto the non-negative real axis.
    for j in 0..n {
        let d = r[j * n + j];
        let mag = ar.sqrt(ar.norm_sqr(&[d]));
        if mag == ar.zero() {
            continue;
        }
        let s = ar.cdiv_real(d, mag);
        let sc = ar.conj(s);
        for c in 0..n {
            r[j * n + c] = ar.cmul(sc, r[j * n + c]);
        }
        r[j * n + j] = Cx { re: mag, im: ar.zero() };
        for row in 0..n {
            q[row * n + j] = ar.cmul(q[row * n + j], s);
        }
    }
    (q, r)
}

fn matmul_generic<A: Arith>(ar: &A, n: usize, a: &Mat<A::R>, b: &Mat<A::R>) -> Mat<A::R> {
    let mut out = Vec::with_capacity(n * n);
    let mut pairs = Vec::with_capacity(n);
    for r in 0..n {
        for c in 0..n {
            pairs.clear();
            pairs.extend((0..n).map(|k| (a[r * n + k], b[k * n + c])));
            out.push(ar.cdot(&pairs, false));
        }
    }
    out
}

fn off_diagonal_norm<A: Arith>(ar: &A, n: usize, a: &Mat<A::R>) -> f64 {
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += ar.to_c64(a[r * n + c]).norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn evd_generic<A: Arith>(ar: &A, y: &CMatrix, scale: f64, tol: f64, max_iter: usize) -> EvdResult {
    let n = y.n();
    let mut a = to_generic(ar, y, scale);
    let mut v = to_generic(ar, &CMatrix::identity(n), 1.0);
    let y_norm = from_generic(ar, n, &a, 1.0).frobenius();
    // The off-diagonal part never drops below the arithmetic's rounding floor:
    // a few relative epsilons per entry in floating point, a few steps in fixed point.
    let floor = (4 * n) as f64 * ar.epsilon() * y_norm + (n * n) as f64 * ar.resolution();
    let limit = (tol * y_norm).max(floor);
    let mut residual = off_diagonal_norm(ar, n, &a);
    let mut iterations = 0;
    while residual > limit && iterations < max_iter {
        let (q, r) = qr_generic(ar, n, &a);
        a = matmul_generic(ar, n, &r, &q);
        v = matmul_generic(ar, n, &v, &q);
        residual = off_diagonal_norm(ar, n, &a);
        iterations += 1;
    }
    let mut order: Vec<(usize, f64)> = (0..n).map(|i| (i, ar.to_f64(a[i * n + i].re))).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    // Positive semidefinite up to rounding: clamp the tiny negatives.
    let psd = order.iter().all(|&(_, l)| l >= -limit.max(1e-8 * y_norm));
    let vecs = from_generic(ar, n, &v, 1.0);
    let mut eigvecs = CMatrix::zeros(n);
    for (dst, &(src, _)) in order.iter().enumerate() {
        for row in 0..n {
            eigvecs.set(row, dst, vecs.get(row, src));
        }
    }
    let eigvals = order
        .iter()
        .map(|&(_, l)| {
            let l = l / scale;
            if psd {
                l.max(0.0)
            } else {
                l
            }
        })
        .collect();
    EvdResult {
        eigvals,
        eigvecs,
        iterations,
        residual: residual / scale,
        converged: residual <= limit,
    }
}

/// Double-precision Householder QR, `A = Q R`.
pub fn qr_decompose(a: &CMatrix) -> (CMatrix, CMatrix) {
    let ar = F64Arith;
    let n = a.n();
    let (q, r) = qr_generic(&ar, n, &to_generic(&ar, a, 1.0));
    (from_generic(&ar, n, &q, 1.0), from_generic(&ar, n, &r, 1.0))
}

/// Unshifted QR iteration in double precision. The result carries
/// `converged = false` and the achieved residual when `max_iter` runs out.
pub fn evd_qr_iteration(y: &CMatrix, tol: f64, max_iter: usize) -> EvdResult {
    evd_generic(&F64Arith, y, 1.0, tol, max_iter)
}

/// As [`evd_qr_iteration`], but returns an error when it does not converge.
pub fn evd_qr_iteration_strict(y: &CMatrix, tol: f64, max_iter: usize) -> Result<EvdResult> {
    let r = evd_qr_iteration(y, tol, max_iter);
    if !r.converged {
        return Err(RspError::NoConvergence { iterations: r.iterations, residual: r.residual });
    }
    Ok(r)
}

pub fn doppler_steering(derived: &DerivedParams, packets: usize) -> DopplerSteering {
    let columns = derived
        .doppler_grid_hz
        .iter()
        .map(|&f| {
            (0..packets)
                .map(|n| {
                    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * n as f64 * derived.t_pri_s)
                })
                .collect()
        })
        .collect();
    DopplerSteering { grid_hz: derived.doppler_grid_hz.clone(), columns }
}

fn spectrum_generic<A: Arith>(
    ar: &A,
    noise: &[Vec<Complex64>],
    steering: &DopplerSteering,
) -> Result<MusicSpectrum> {
    let n = steering.packets();
    if noise.iter().any(|e| e.len() != n) {
        return Err(RspError::dimension(format!("noise subspace rows must have length {n}")));
    }
    let e: Vec<Vec<Cx<A::R>>> = noise.iter().map(|col| col.iter().map(|z| ar.complex(*z)).collect()).collect();
    let mut proj = Vec::with_capacity(e.len());
    let mu: Vec<f64> = steering
        .columns
        .iter()
        .map(|col| {
            let v: Vec<Cx<A::R>> = col.iter().map(|z| ar.complex(*z)).collect();
            proj.clear();
            for ec in &e {
                let pairs: Vec<_> = ec.iter().zip(&v).map(|(&a, &b)| (a, b)).collect();
                proj.push(ar.cdot(&pairs, true));
            }
            let den = ar.to_f64(ar.norm_sqr(&proj));
            1.0 / den.max(DENOMINATOR_FLOOR)
        })
        .collect();
    let peak = mu.iter().cloned().fold(0.0, f64::max);
    let mu_db = mu.iter().map(|m| 10.0 * (m / peak).log10()).collect();
    Ok(MusicSpectrum { grid_hz: steering.grid_hz.clone(), mu, mu_db })
}

/// `mu[j] = 1 / ||E^H v_j||^2` with the denominator floored at `1e-300`.
pub fn music_spectrum(noise: &[Vec<Complex64>], steering: &DopplerSteering) -> Result<MusicSpectrum> {
    spectrum_generic(&F64Arith, noise, steering)
}

/// Grid peak of the spectrum (smallest index on ties) as `(f_D, v)`.
pub fn estimate_doppler(spectrum: &MusicSpectrum, derived: &DerivedParams) -> (f64, f64) {
    let mut best = 0;
    for (j, &m) in spectrum.mu.iter().enumerate() {
        if m > spectrum.mu[best] {
            best = j;
        }
    }
    let f = spectrum.grid_hz.get(best).copied().unwrap_or(f64::NAN);
    (f, derived.doppler_to_velocity(f))
}

#[derive(Debug, Clone)]
pub struct MusicOutput {
    pub spectrum: MusicSpectrum,
    pub evd: EvdResult,
    pub doppler_hz: f64,
    pub velocity_mps: f64,
}

/// Covariance, eigen-decomposition and spectrum in one numeric mode.
///
/// In fixed-point mode `y` is multiplied by `fx_input_scale` before
/// quantization; floating modes ignore it.
pub fn music_doppler(
    y: &[Complex64],
    derived: &DerivedParams,
    steering: &DopplerSteering,
    mode: NumericMode,
    fx_input_scale: f64,
) -> Result<MusicOutput> {
    if steering.packets() != y.len() {
        return Err(RspError::dimension(format!(
            "steering built for {} packets, slow-time vector has {}",
            steering.packets(),
            y.len()
        )));
    }
    fn run<A: Arith>(
        ar: &A,
        y: &[Complex64],
        scale: f64,
        steering: &DopplerSteering,
    ) -> Result<(EvdResult, MusicSpectrum)> {
        let ys: Vec<Cx<A::R>> = y.iter().map(|z| ar.complex(z * scale)).collect();
        let n = ys.len();
        if n < 2 {
            return Err(RspError::validation(format!("covariance needs N >= 2 packets, got {n}")));
        }
        let mut cov = CMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                cov.set(r, c, ar.to_c64(ar.cmul(ys[r], ar.conj(ys[c]))));
            }
        }
        // The covariance is already in the arithmetic's domain.
        let evd = evd_generic(ar, &cov, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER);
        let spectrum = spectrum_generic(ar, &evd.noise_subspace(), steering)?;
        Ok((evd, spectrum))
    }
    let (evd, spectrum) = match mode {
        NumericMode::F64 => run(&F64Arith, y, 1.0, steering)?,
        NumericMode::F32 => run(&F32Arith, y, 1.0, steering)?,
        NumericMode::Fixed(fmt) => run(&FxArith { fmt }, y, fx_input_scale, steering)?,
    };
    let (doppler_hz, velocity_mps) = estimate_doppler(&spectrum, derived);
    Ok(MusicOutput { spectrum, evd, doppler_hz, velocity_mps })
}

/// `f_d_hz,velocity_mps,mu,mu_db`
pub fn write_spectrum_csv(mut w: impl Write, spectrum: &MusicSpectrum, derived: &DerivedParams) -> Result<()> {
    writeln!(w, "f_d_hz,velocity_mps,mu,mu_db")?;
    for ((f, m), db) in spectrum.grid_hz.iter().zip(&spectrum.mu).zip(&spectrum.mu_db) {
        writeln!(w, "{f:.6},{:.6},{m:.9e},{db:.6}", derived.doppler_to_velocity(*f))?;
    }
    Ok(())
}
