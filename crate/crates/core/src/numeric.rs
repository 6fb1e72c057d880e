//! Small numerical kernels shared across modules: compensated summation,
//! the additive character `e(x)`, and adaptive Gauss–Kronrod quadrature.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e(x) = exp(2πix)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    Complex64::new(c, s)
}

/// `e(num/den)` with the numerator reduced into `(-den/2, den/2]` first, so the
/// angle passed to `sin_cos` stays small.
#[inline]
pub fn e_ratio(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    // exact values at the quarter points
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * r == den {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == den {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * r == 3 * den {
        return Complex64::new(0.0, -1.0);
    }
    let centered = if 2 * r > den { r as f64 - den as f64 } else { r as f64 };
    e(centered / den as f64)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Compensated sum over complex terms (real and imaginary parts separately).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl Extend<Complex64> for ComplexSum {
    fn extend<I: IntoIterator<Item = Complex64>>(&mut self, iter: I) {
        for z in iter {
            self.add(z);
        }
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut s = CompensatedSum::new();
    s.extend(iter);
    s.value()
}

pub fn complex_sum<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    let mut s = ComplexSum::new();
    s.extend(iter);
    s.value()
}

/// Largest integer `n` with `n <= base^exp`, tolerant to rounding when
/// `base^exp` is an integer up to floating error (e.g. `3^2`).
pub fn floor_pow(base: f64, exp: f64) -> f64 {
    let v = base.powf(exp);
    if !v.is_finite() {
        return v;
    }
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.max(1.0) {
        r
    } else {
        v.floor()
    }
}

/// Smallest integer `n` with `n >= base^exp`, with the same rounding tolerance.
pub fn ceil_pow(base: f64, exp: f64) -> f64 {
    let v = base.powf(exp);
    if !v.is_finite() {
        return v;
    }
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.max(1.0) {
        r
    } else {
        v.ceil()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights for the 7-point rule on the odd-indexed Kronrod nodes.
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quadrature {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS_K[7] * fc;
    let mut g = GK_WEIGHTS_G[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS_K[i] * s;
        if i % 2 == 1 {
            g += GK_WEIGHTS_G[i / 2] * s;
        }
    }
    Quadrature { value: k * h, error: ((k - g) * h).abs() }
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Bisects until the local error estimate drops under
/// `max(abs_tol, rel_tol·|I|)` scaled by the subinterval width, or the
/// bisection depth reaches 50.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    let whole = gk15(&f, a, b);
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    let tol = abs_tol.max(rel_tol * whole.value.abs());
    let mut stack = vec![(a, b, whole, 0u32)];
    let width = (b - a).abs();
    while let Some((lo, hi, q, depth)) = stack.pop() {
        let local_tol = tol * ((hi - lo).abs() / width).max(1e-300);
        if q.error <= local_tol || depth >= 50 {
            value.add(q.value);
            error += q.error;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        stack.push((lo, mid, gk15(&f, lo, mid), depth + 1));
        stack.push((mid, hi, gk15(&f, mid, hi), depth + 1));
    }
    Quadrature { value: value.value(), error }
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}
