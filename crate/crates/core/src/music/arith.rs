//! Scalar arithmetic back-ends for the eigen-decomposition and spectrum.

use num_complex::Complex64;

use crate::fxp::{fx_div, fx_sqrt, FxFormat, FxValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx<R> {
    pub re: R,
    pub im: R,
}

pub trait Arith {
    type R: Copy + PartialEq;

    fn real(&self, x: f64) -> Self::R;
    fn to_f64(&self, x: Self::R) -> f64;
    fn add(&self, a: Self::R, b: Self::R) -> Self::R;
    fn sub(&self, a: Self::R, b: Self::R) -> Self::R;
    fn mul(&self, a: Self::R, b: Self::R) -> Self::R;
    /// Division; a zero divisor yields zero for floats and saturation for fixed point.
    fn div(&self, a: Self::R, b: Self::R) -> Self::R;
    fn sqrt(&self, a: Self::R) -> Self::R;

    /// Smallest positive step the format resolves; zero for floating point.
    fn resolution(&self) -> f64 {
        0.0
    }

    /// Relative rounding error of one operation; zero for fixed point.
    fn epsilon(&self) -> f64 {
        0.0
    }

    fn zero(&self) -> Self::R {
        self.real(0.0)
    }

    fn czero(&self) -> Cx<Self::R> {
        Cx { re: self.zero(), im: self.zero() }
    }

    fn complex(&self, z: Complex64) -> Cx<Self::R> {
        Cx { re: self.real(z.re), im: self.real(z.im) }
    }

    fn to_c64(&self, z: Cx<Self::R>) -> Complex64 {
        Complex64::new(self.to_f64(z.re), self.to_f64(z.im))
    }

    fn cadd(&self, a: Cx<Self::R>, b: Cx<Self::R>) -> Cx<Self::R> {
        Cx { re: self.add(a.re, b.re), im: self.add(a.im, b.im) }
    }

    fn csub(&self, a: Cx<Self::R>, b: Cx<Self::R>) -> Cx<Self::R> {
        Cx { re: self.sub(a.re, b.re), im: self.sub(a.im, b.im) }
    }

    fn conj(&self, a: Cx<Self::R>) -> Cx<Self::R> {
        Cx { re: a.re, im: self.sub(self.zero(), a.im) }
    }

    fn cmul(&self, a: Cx<Self::R>, b: Cx<Self::R>) -> Cx<Self::R> {
        self.cdot(&[(a, b)], false)
    }

    fn cscale(&self, a: Cx<Self::R>, s: Self::R) -> Cx<Self::R> {
        Cx { re: self.mul(a.re, s), im: self.mul(a.im, s) }
    }

    fn cdiv_real(&self, a: Cx<Self::R>, s: Self::R) -> Cx<Self::R> {
        Cx { re: self.div(a.re, s), im: self.div(a.im, s) }
    }

    /// `sum_i a_i b_i`, or `sum_i conj(a_i) b_i` when `conj_a` is set.
    fn cdot(&self, pairs: &[(Cx<Self::R>, Cx<Self::R>)], conj_a: bool) -> Cx<Self::R>;

    /// `sum_i |a_i|^2`.
    fn norm_sqr(&self, a: &[Cx<Self::R>]) -> Self::R {
        let pairs: Vec<_> = a.iter().map(|&z| (z, z)).collect();
        self.cdot(&pairs, true).re
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct F64Arith;

impl Arith for F64Arith {
    type R = f64;

    fn epsilon(&self) -> f64 {
        f64::EPSILON
    }

    fn real(&self, x: f64) -> f64 {
        x
    }
    fn to_f64(&self, x: f64) -> f64 {
        x
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn div(&self, a: f64, b: f64) -> f64 {
        if b == 0.0 {
            0.0
        } else {
            a / b
        }
    }
    fn sqrt(&self, a: f64) -> f64 {
        a.max(0.0).sqrt()
    }
    fn cdot(&self, pairs: &[(Cx<f64>, Cx<f64>)], conj_a: bool) -> Cx<f64> {
        let s = if conj_a { -1.0 } else { 1.0 };
        let (mut re, mut im) = (0.0, 0.0);
        for (a, b) in pairs {
            let ai = s * a.im;
            re += a.re * b.re - ai * b.im;
            im += a.re * b.im + ai * b.re;
        }
        Cx { re, im }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct F32Arith;

impl Arith for F32Arith {
    type R = f32;

    fn epsilon(&self) -> f64 {
        f32::EPSILON as f64
    }

    fn real(&self, x: f64) -> f32 {
        x as f32
    }
    fn to_f64(&self, x: f32) -> f64 {
        x as f64
    }
    fn add(&self, a: f32, b: f32) -> f32 {
        a + b
    }
    fn sub(&self, a: f32, b: f32) -> f32 {
        a - b
    }
    fn mul(&self, a: f32, b: f32) -> f32 {
        a * b
    }
    fn div(&self, a: f32, b: f32) -> f32 {
        if b == 0.0 {
            0.0
        } else {
            a / b
        }
    }
    fn sqrt(&self, a: f32) -> f32 {
        a.max(0.0).sqrt()
    }
    fn cdot(&self, pairs: &[(Cx<f32>, Cx<f32>)], conj_a: bool) -> Cx<f32> {
        let s = if conj_a { -1.0 } else { 1.0 };
        let (mut re, mut im) = (0.0f32, 0.0f32);
        for (a, b) in pairs {
            let ai = s * a.im;
            re += a.re * b.re - ai * b.im;
            im += a.re * b.im + ai * b.re;
        }
        Cx { re, im }
    }
}

/// Fixed point on raw two's-complement integers of one format.
#[derive(Debug, Clone, Copy)]
pub struct FxArith {
    pub fmt: FxFormat,
}

impl FxArith {
    fn val(&self, raw: i64) -> FxValue {
        FxValue { raw, fmt: self.fmt }
    }
}

impl Arith for FxArith {
    type R = i64;

    fn real(&self, x: f64) -> i64 {
        self.fmt.raw_from_f64(x)
    }
    fn to_f64(&self, x: i64) -> f64 {
        x as f64 * self.fmt.step()
    }
    fn resolution(&self) -> f64 {
        self.fmt.step()
    }
    fn add(&self, a: i64, b: i64) -> i64 {
        self.fmt.saturate(a as i128 + b as i128)
    }
    fn sub(&self, a: i64, b: i64) -> i64 {
        self.fmt.saturate(a as i128 - b as i128)
    }
    fn mul(&self, a: i64, b: i64) -> i64 {
        self.fmt.requantize(a as i128 * b as i128, self.fmt.f())
    }
    fn div(&self, a: i64, b: i64) -> i64 {
        fx_div(self.val(a), self.val(b)).raw
    }
    fn sqrt(&self, a: i64) -> i64 {
        fx_sqrt(self.val(a.max(0))).raw
    }
    fn cdot(&self, pairs: &[(Cx<i64>, Cx<i64>)], conj_a: bool) -> Cx<i64> {
        let s: i128 = if conj_a { -1 } else { 1 };
        let (mut re, mut im) = (0i128, 0i128);
        for (a, b) in pairs {
            let (ar, ai, br, bi) = (a.re as i128, s * a.im as i128, b.re as i128, b.im as i128);
            re = re.saturating_add(ar * br - ai * bi);
            im = im.saturating_add(ar * bi + ai * br);
        }
        let f = self.fmt.f();
        Cx { re: self.fmt.requantize(re, f), im: self.fmt.requantize(im, f) }
    }
}
