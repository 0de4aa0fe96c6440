//! Two's-complement fixed-point arithmetic with a runtime `<W, L>` format.
//!
//! `W` is the total width and `L` the integer width *including* the sign
//! bit, so `<24,5>` carries 1 sign bit, 4 integer bits and 19 fractional
//! bits. Every result is rounded half away from zero and saturated to the
//! representable range. Products and accumulations are carried exactly in
//! 128-bit integers and requantized once at the end.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, RspError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxFormat {
    w: u32,
    l: u32,
}

impl FxFormat {
    pub fn new(w: u32, l: u32) -> Result<Self> {
        if !(2..=63).contains(&w) {
            return Err(RspError::validation(format!("word length W = {w} outside 2..=63")));
        }
        if !(1..=w).contains(&l) {
            return Err(RspError::validation(format!("integer bits L = {l} outside 1..=W")));
        }
        Ok(FxFormat { w, l })
    }

    pub fn w(self) -> u32 {
        self.w
    }

    pub fn l(self) -> u32 {
        self.l
    }

    /// Fractional bits.
    pub fn f(self) -> u32 {
        self.w - self.l
    }

    pub fn step(self) -> f64 {
        (-(self.f() as f64)).exp2()
    }

    pub fn max_raw(self) -> i64 {
        (1i64 << (self.w - 1)) - 1
    }

    pub fn min_raw(self) -> i64 {
        -(1i64 << (self.w - 1))
    }

    pub fn max_value(self) -> f64 {
        self.max_raw() as f64 * self.step()
    }

    pub fn min_value(self) -> f64 {
        self.min_raw() as f64 * self.step()
    }

    #[inline]
    pub(crate) fn saturate(self, v: i128) -> i64 {
        v.clamp(self.min_raw() as i128, self.max_raw() as i128) as i64
    }

    /// Round a finite real to the nearest raw mantissa (half away from zero), saturating.
    #[inline]
    pub(crate) fn raw_from_f64(self, x: f64) -> i64 {
        let scaled = (x * (self.f() as f64).exp2()).round();
        if scaled >= self.max_raw() as f64 {
            self.max_raw()
        } else if scaled <= self.min_raw() as f64 {
            self.min_raw()
        } else {
            scaled as i64
        }
    }

    /// Drop `shift` fractional bits from a wide value, rounding half away from zero,
    /// then saturate.
    #[inline]
    pub(crate) fn requantize(self, v: i128, shift: u32) -> i64 {
        if shift == 0 {
            return self.saturate(v);
        }
        let half = 1i128 << (shift - 1);
        let r = if v >= 0 {
            (v + half) >> shift
        } else {
            -((-v + half) >> shift)
        };
        self.saturate(r)
    }

    /// Requantize a wide value with `src_frac` fractional bits into this format.
    #[inline]
    pub(crate) fn from_wide(self, v: i128, src_frac: u32) -> i64 {
        match src_frac.cmp(&self.f()) {
            Ordering::Equal => self.saturate(v),
            Ordering::Greater => self.requantize(v, src_frac - self.f()),
            Ordering::Less => {
                let up = self.f() - src_frac;
                self.saturate(v.saturating_mul(1i128 << up))
            }
        }
    }
}

impl fmt::Display for FxFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fx<{},{}>", self.w, self.l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxValue {
    pub raw: i64,
    pub fmt: FxFormat,
}

impl PartialOrd for FxValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.fmt == other.fmt).then(|| self.raw.cmp(&other.raw))
    }
}

impl FxValue {
    pub fn zero(fmt: FxFormat) -> Self {
        FxValue { raw: 0, fmt }
    }

    pub fn value(self) -> f64 {
        self.raw as f64 * self.fmt.step()
    }
}

/// Nearest representable value; NaN is rejected.
pub fn quantize(x: f64, fmt: FxFormat) -> Result<FxValue> {
    if x.is_nan() {
        return Err(RspError::validation("cannot quantize NaN"));
    }
    Ok(FxValue { raw: fmt.raw_from_f64(x), fmt })
}

fn same_fmt(a: FxFormat, b: FxFormat) {
    assert_eq!(a, b, "fixed-point operands must share a format");
}

pub fn fx_add(a: FxValue, b: FxValue) -> FxValue {
    same_fmt(a.fmt, b.fmt);
    FxValue { raw: a.fmt.saturate(a.raw as i128 + b.raw as i128), fmt: a.fmt }
}

pub fn fx_sub(a: FxValue, b: FxValue) -> FxValue {
    same_fmt(a.fmt, b.fmt);
    FxValue { raw: a.fmt.saturate(a.raw as i128 - b.raw as i128), fmt: a.fmt }
}

pub fn fx_mul(a: FxValue, b: FxValue) -> FxValue {
    same_fmt(a.fmt, b.fmt);
    let p = a.raw as i128 * b.raw as i128;
    FxValue { raw: a.fmt.requantize(p, a.fmt.f()), fmt: a.fmt }
}

/// `a / b`, rounded half away from zero; division by zero saturates toward the sign of `a`.
pub fn fx_div(a: FxValue, b: FxValue) -> FxValue {
    same_fmt(a.fmt, b.fmt);
    let fmt = a.fmt;
    if b.raw == 0 {
        let raw = match a.raw.cmp(&0) {
            Ordering::Greater => fmt.max_raw(),
            Ordering::Less => fmt.min_raw(),
            Ordering::Equal => 0,
        };
        return FxValue { raw, fmt };
    }
    let num = (a.raw as i128) << fmt.f();
    let den = b.raw as i128;
    let (n, d) = (num.abs(), den.abs());
    let mut q = n / d;
    if 2 * (n % d) >= d {
        q += 1;
    }
    let q = if (num < 0) != (den < 0) { -q } else { q };
    FxValue { raw: fmt.saturate(q), fmt }
}

/// Square root of a non-negative value (negative inputs give zero).
pub fn fx_sqrt(a: FxValue) -> FxValue {
    let fmt = a.fmt;
    if a.raw <= 0 {
        return FxValue::zero(fmt);
    }
    // sqrt(raw * 2^-F) * 2^F = sqrt(raw * 2^F)
    let v = (a.raw as u128) << fmt.f();
    let mut r = isqrt(v);
    // round to nearest: compare against (r + 1/2)^2 = r^2 + r + 1/4
    if v > r * r + r {
        r += 1;
    }
    FxValue { raw: fmt.saturate(r as i128), fmt }
}

fn isqrt(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = (v as f64).sqrt() as u128;
    while x * x > v {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= v {
        x += 1;
    }
    x
}

/// Multiply-accumulate over `pairs` with a single requantization into `acc_fmt`.
pub fn fx_mac_vector(acc_fmt: FxFormat, pairs: &[(FxValue, FxValue)]) -> FxValue {
    let Some(first) = pairs.first() else {
        return FxValue::zero(acc_fmt);
    };
    let op_fmt = first.0.fmt;
    let mut acc: i128 = 0;
    for (a, b) in pairs {
        same_fmt(a.fmt, op_fmt);
        same_fmt(b.fmt, op_fmt);
        acc = acc.saturating_add(a.raw as i128 * b.raw as i128);
    }
    FxValue { raw: acc_fmt.from_wide(acc, 2 * op_fmt.f()), fmt: acc_fmt }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxComplex {
    pub re: FxValue,
    pub im: FxValue,
}

impl FxComplex {
    pub fn zero(fmt: FxFormat) -> Self {
        FxComplex { re: FxValue::zero(fmt), im: FxValue::zero(fmt) }
    }

    pub fn quantize(z: Complex64, fmt: FxFormat) -> Result<Self> {
        Ok(FxComplex { re: quantize(z.re, fmt)?, im: quantize(z.im, fmt)? })
    }

    pub fn fmt(self) -> FxFormat {
        self.re.fmt
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn conj(self) -> Self {
        let fmt = self.fmt();
        FxComplex {
            re: self.re,
            im: FxValue { raw: fmt.saturate(-(self.im.raw as i128)), fmt },
        }
    }
}

pub fn fx_cadd(a: FxComplex, b: FxComplex) -> FxComplex {
    FxComplex { re: fx_add(a.re, b.re), im: fx_add(a.im, b.im) }
}

pub fn fx_csub(a: FxComplex, b: FxComplex) -> FxComplex {
    FxComplex { re: fx_sub(a.re, b.re), im: fx_sub(a.im, b.im) }
}

/// Four real multiplies and two adds, requantized once after each add.
pub fn fx_cmul(a: FxComplex, b: FxComplex) -> FxComplex {
    let fmt = a.fmt();
    same_fmt(fmt, b.fmt());
    let (ar, ai, br, bi) = (a.re.raw as i128, a.im.raw as i128, b.re.raw as i128, b.im.raw as i128);
    let re = ar * br - ai * bi;
    let im = ar * bi + ai * br;
    FxComplex {
        re: FxValue { raw: fmt.requantize(re, fmt.f()), fmt },
        im: FxValue { raw: fmt.requantize(im, fmt.f()), fmt },
    }
}

/// Complex multiply-accumulate with a single requantization into `acc_fmt`.
pub fn fx_cmac_vector(acc_fmt: FxFormat, pairs: &[(FxComplex, FxComplex)]) -> FxComplex {
    let Some(first) = pairs.first() else {
        return FxComplex::zero(acc_fmt);
    };
    let op_fmt = first.0.fmt();
    let (mut re, mut im) = (0i128, 0i128);
    for (a, b) in pairs {
        same_fmt(a.fmt(), op_fmt);
        same_fmt(b.fmt(), op_fmt);
        let (ar, ai, br, bi) =
            (a.re.raw as i128, a.im.raw as i128, b.re.raw as i128, b.im.raw as i128);
        re = re.saturating_add(ar * br - ai * bi);
        im = im.saturating_add(ar * bi + ai * br);
    }
    let f = 2 * op_fmt.f();
    FxComplex {
        re: FxValue { raw: acc_fmt.from_wide(re, f), fmt: acc_fmt },
        im: FxValue { raw: acc_fmt.from_wide(im, f), fmt: acc_fmt },
    }
}

/// Arithmetic precision used by a pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumericMode {
    F64,
    F32,
    Fixed(FxFormat),
}

impl NumericMode {
    pub fn is_fixed(self) -> bool {
        matches!(self, NumericMode::Fixed(_))
    }

    /// Short label used in file names and CSV columns (`f64`, `f32`, `fx24_5`).
    pub fn label(self) -> String {
        match self {
            NumericMode::F64 => "f64".into(),
            NumericMode::F32 => "f32".into(),
            NumericMode::Fixed(f) => format!("fx{}_{}", f.w(), f.l()),
        }
    }
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::F64 => write!(f, "f64"),
            NumericMode::F32 => write!(f, "f32"),
            NumericMode::Fixed(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for NumericMode {
    type Err = RspError;

    /// Accepts `f64`, `f32`, `fx<W,L>` and `fxW_L`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "f64" => return Ok(NumericMode::F64),
            "f32" => return Ok(NumericMode::F32),
            _ => {}
        }
        let bad = || RspError::validation(format!("unknown numeric mode '{s}'"));
        let body = s.strip_prefix("fx").ok_or_else(bad)?;
        let body = body
            .strip_prefix('<')
            .and_then(|b| b.strip_suffix('>'))
            .unwrap_or(body);
        let (w, l) = body.split_once([',', '_']).ok_or_else(bad)?;
        let w: u32 = w.trim().parse().map_err(|_| bad())?;
        let l: u32 = l.trim().parse().map_err(|_| bad())?;
        Ok(NumericMode::Fixed(FxFormat::new(w, l)?))
    }
}
