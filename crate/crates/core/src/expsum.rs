//! Logarithmic exponential sums `Σ e(±αn)/n` around `n ≈ 1/α`: the head
//! `Σ_{n<=1/α} (1 − e(±αn))/n`, the tail `Σ_{n>1/α} e(±αn)/n`, and their
//! difference, which tends to `log 2π + γ ∓ iπ/2`.
//!
//! Tails are summed directly up to a cutoff `K` and finished with repeated
//! summation by parts. Writing `g(n) = e(βn)`, `D = e(β) − 1` and
//! `W_m(x) = 1/(x(x−1)…(x−m+1))`, the sums `T_m(a) = Σ_{n>=a} g(n) W_m(n+s)`
//! satisfy `T_m(a) = (−g(a) W_m(a+s) + m T_{m+1}(a+1)) / D`, which unrolls
//! into a series in `1/(K|D|)`.

use crate::error::{capacity, domain, Error, Result};
use crate::numeric::{e, integrate, ComplexSum, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default tail exponent `c` in the cutoff `|log α|^c / α`.
pub const DEFAULT_C: f64 = 5.0;

/// Cap on directly summed tail terms; the expansion covers the rest.
pub const MAX_DIRECT_TERMS: u64 = 1 << 24;

/// Cap on the plain-truncation path.
pub const MAX_SLOW_TERMS: u64 = 1 << 31;

const MAX_ORDER: usize = 60;

/// Start the expansion once `K|D|` reaches this.
const EXPANSION_START: f64 = 30.0;

/// Cutoff exponent for the head − tail constant: the tail is summed directly
/// only until the expansion takes over.
const CONSTANT_C: f64 = 0.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

/// A sum with a bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: Complex64,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadSum {
    pub value: Complex64,
    /// The part over `n <= 1/(α|log α|)`.
    pub short_part: Complex64,
    /// `|short_part| · |log α|`.
    pub short_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSum {
    pub alpha: f64,
    pub sign: Sign,
    pub head: Complex64,
    pub tail: Complex64,
    pub tail_bound: f64,
    pub constant_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantResidual {
    pub value: Complex64,
    pub target: Complex64,
    /// `|value − target| / (α |log α|)`
    pub normalized_residual: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

#[inline]
fn phase(beta: f64, n: u64) -> Complex64 {
    e((beta * n as f64).fract())
}

/// `⌊1/α⌋`, the last head index.
fn head_end(alpha: f64) -> u64 {
    (1.0 / alpha).floor() as u64
}

/// `Σ_{n<=1/α} (1 − e(±αn))/n`.
pub fn head_sum(alpha: f64, sign: Sign) -> Result<HeadSum> {
    check_alpha(alpha)?;
    let beta = sign.factor() * alpha;
    let short_end = (1.0 / (alpha * alpha.ln().abs())).floor() as u64;
    let one = Complex64::new(1.0, 0.0);
    let mut acc = ComplexSum::new();
    let mut short_part = Complex64::new(0.0, 0.0);
    for n in 1..=head_end(alpha) {
        acc.add((one - phase(beta, n)) / n as f64);
        if n == short_end {
            short_part = acc.value();
        }
    }
    Ok(HeadSum { value: acc.value(), short_part, short_ratio: short_part.norm() * alpha.ln().abs() })
}

/// `Σ_{n>=a} e(βn)/(n+s)` for `0 < |β| < 1`, `a >= 1`, `s >= 0`: direct
/// summation to `K >= max(a, 30/|D|)`, then the summation-by-parts series.
fn tail_from(beta: f64, a: u64, s: f64, direct_to: u64) -> Bounded {
    let d = e(beta) - 1.0;
    let dn = d.norm();
    let k = a.max(direct_to).max((EXPANSION_START / dn).ceil() as u64);
    let mut acc = ComplexSum::new();
    for n in a..k {
        acc.add(phase(beta, n) / (n as f64 + s));
    }
    let x = k as f64 + s;
    let mut t = 1.0 / (d * x);
    let mut bound = f64::INFINITY;
    for j in 1..=MAX_ORDER {
        acc.add(-t * phase(beta, k + j as u64 - 1));
        let jf = j as f64;
        let next = t * jf / (d * (x + jf));
        bound = t.norm() * (2.0 * jf / (dn * (x + jf))).min(1.0);
        if next.norm() >= t.norm() || bound < 1e-18 * acc.value().norm() {
            break;
        }
        t = next;
    }
    Bounded { value: acc.value(), bound }
}

/// Accumulated rounding in the phases, `ε` times the largest phase used, per
/// logarithmic range.
fn roundoff(alpha: f64, k0: u64, k: u64) -> f64 {
    8.0 * f64::EPSILON * (1.0 + alpha * k as f64) * (1.0 + (k as f64 / k0 as f64).ln())
}

/// `Σ_{n>1/α} e(±αn)/n`. Terms up to `|log α|^c/α` are summed directly
/// (capped at [`MAX_DIRECT_TERMS`]); the remainder comes from the expansion.
/// The bound covers the expansion remainder and phase rounding.
pub fn tail_sum(alpha: f64, sign: Sign, c: f64) -> Result<Bounded> {
    check_alpha(alpha)?;
    if !(c >= 0.0 && c.is_finite()) {
        return domain(format!("tail exponent c must be finite and >= 0, got {c}"));
    }
    let k0 = head_end(alpha) + 1;
    let cutoff = (alpha.ln().abs().powf(c) / alpha).floor().min(1e18) as u64;
    let direct_to = cutoff.min(k0 + MAX_DIRECT_TERMS);
    let t = tail_from(sign.factor() * alpha, k0, 0.0, direct_to);
    let k = direct_to.max(k0);
    Ok(Bounded { value: t.value, bound: t.bound + roundoff(alpha, k0, k.max(k0 + 1)) })
}

/// Plain truncation at `|log α|^c/α` with the partial-summation bound
/// `1/((K+1) |sin πα|)`.
pub fn tail_sum_truncated(alpha: f64, sign: Sign, c: f64) -> Result<Bounded> {
    check_alpha(alpha)?;
    let k0 = head_end(alpha) + 1;
    let cutoff = (alpha.ln().abs().powf(c) / alpha).floor();
    if cutoff - k0 as f64 > MAX_SLOW_TERMS as f64 {
        return capacity(format!("{cutoff} terms exceed the plain-summation cap"));
    }
    let cutoff = cutoff as u64;
    let beta = sign.factor() * alpha;
    let mut acc = ComplexSum::new();
    for n in k0..=cutoff {
        acc.add(phase(beta, n) / n as f64);
    }
    let bound = 1.0 / ((cutoff.max(k0) + 1) as f64 * (PI * alpha).sin());
    Ok(Bounded { value: acc.value(), bound })
}

/// `log 2π + γ ∓ iπ/2`.
pub fn main_constant(sign: Sign) -> Complex64 {
    Complex64::new((2.0 * PI).ln() + EULER_GAMMA, -sign.factor() * PI / 2.0)
}

pub fn main_constant_residual(alpha: f64, sign: Sign) -> Result<ConstantResidual> {
    if !(alpha > 0.0 && alpha <= 0.1) {
        return domain(format!("alpha must lie in (0, 0.1], got {alpha}"));
    }
    let head = head_sum(alpha, sign)?;
    let tail = tail_sum(alpha, sign, CONSTANT_C)?;
    let value = head.value - tail.value;
    let target = main_constant(sign);
    Ok(ConstantResidual { value, target, normalized_residual: (value - target).norm() / (alpha * alpha.ln().abs()) })
}

pub fn alpha_sum(alpha: f64, sign: Sign) -> Result<AlphaSum> {
    let head = head_sum(alpha, sign)?;
    let tail = tail_sum(alpha, sign, CONSTANT_C)?;
    Ok(AlphaSum {
        alpha,
        sign,
        head: head.value,
        tail: tail.value,
        tail_bound: tail.bound,
        constant_residual: (head.value - tail.value - main_constant(sign)).norm(),
    })
}

/// `∫_Y^∞ {t} e(±αt)/t dt`, as `∫_Y^{⌈Y⌉}` plus
/// `∫_0^1 s e(±αs) Σ_{n>=⌈Y⌉} e(±αn)/(n+s) ds`, the inner sum by
/// [`tail_from`] and both integrals adaptively to `tol`.
pub fn fractional_integral(alpha: f64, sign: Sign, y: f64, tol: f64) -> Result<Bounded> {
    check_alpha(alpha)?;
    if !(y >= 1.0 && y.is_finite()) {
        return domain(format!("Y must be finite and >= 1, got {y}"));
    }
    let beta = sign.factor() * alpha;
    let first = y.ceil() as u64;
    let head_re = integrate(|t| t.fract() * (2.0 * PI * beta * t).cos() / t, y, first as f64, tol, tol);
    let head_im = integrate(|t| t.fract() * (2.0 * PI * beta * t).sin() / t, y, first as f64, tol, tol);
    let inner = |s: f64| tail_from(beta, first, s, 0);
    let body = |s: f64| s * e(beta * s) * inner(s).value;
    let re = integrate(|s| body(s).re, 0.0, 1.0, tol, tol);
    let im = integrate(|s| body(s).im, 0.0, 1.0, tol, tol);
    let expansion = inner(0.0).bound.max(inner(1.0).bound);
    Ok(Bounded {
        value: Complex64::new(head_re.value + re.value, head_im.value + im.value),
        bound: head_re.error + head_im.error + re.error + im.error + expansion,
    })
}

/// The exponent `c = 5(1 − log B / log|log α|)` used with `α = y^{−B}`,
/// floored at 0.
pub fn harness_c(b: f64, alpha: f64) -> f64 {
    if b <= 0.0 {
        return DEFAULT_C;
    }
    (5.0 * (1.0 - b.ln() / alpha.ln().abs().ln())).max(0.0)
}
