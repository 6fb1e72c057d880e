//! The Dickman–de Bruijn function ρ, its derivative and tail integrals, and
//! the saddle-point root ξ(u) of `e^ξ = 1 + uξ`.
//!
//! On each interval `[k, k+1]` ρ is expanded in powers of `s = k + 1 − u`,
//! i.e. about the right endpoint. Since `(−1)^i ρ^{(i)} > 0` every coefficient
//! is positive, so evaluation never cancels. The delay equation
//! `u ρ'(u) = −ρ(u−1)` maps the series of piece `k−1` (in the same variable
//! `s`) to all non-constant coefficients of piece `k`, and the integral form
//! `(k+1) ρ(k+1) = ∫_k^{k+1} ρ` then gives the constant term as a sum of
//! positive terms. Continuity at the knots is therefore a check, not an
//! input. Every piece carries its own logarithmic scale so values far below
//! `f64::MIN_POSITIVE` stay usable through [`RhoEvaluator::ln_rho`].

use crate::error::{domain, Result};
use crate::numeric::{CompensatedSum, EULER_GAMMA};
use std::f64::consts::PI;
use std::sync::OnceLock;

const DEGREE: usize = 64;

/// Default upper end of the exactly represented range.
pub const DEFAULT_MAX_U: f64 = 400.0;
/// Default point beyond which tail integrals use the decay envelope.
pub const DEFAULT_TAIL_SWITCH: f64 = 300.0;
/// Absolute accuracy target of the piecewise representation.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Piece {
    ln_scale: f64,
    coeffs: Vec<f64>,
}

impl Piece {
    fn poly(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn poly_deriv(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
    }

    /// `∫_{x0}^{x1}` of the unscaled polynomial.
    fn poly_integral(&self, x0: f64, x1: f64) -> f64 {
        let antider = |x: f64| {
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (i, &c)| acc * x + c / (i + 1) as f64)
                * x
        };
        antider(x1) - antider(x0)
    }
}

/// Value of ρ together with its logarithm and a flag telling whether it came
/// from the asymptotic surrogate rather than the exact pieces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoValue {
    pub value: f64,
    pub ln_value: f64,
    pub approximate: bool,
}

/// `∫_B^∞ ρ` with the bound on the part not covered by exact pieces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailIntegral {
    pub value: f64,
    pub error_bound: f64,
    pub approximate: bool,
}

#[derive(Clone, Debug)]
pub struct RhoEvaluator {
    pieces: Vec<Piece>,
    max_u: f64,
    tail_switch: f64,
    tol: f64,
}

impl Default for RhoEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

impl RhoEvaluator {
    pub fn new() -> Self {
        Self::with_range(DEFAULT_MAX_U, DEFAULT_TAIL_SWITCH).expect("default range is valid")
    }

    /// Process-wide evaluator with the default range.
    pub fn shared() -> &'static RhoEvaluator {
        static SHARED: OnceLock<RhoEvaluator> = OnceLock::new();
        SHARED.get_or_init(RhoEvaluator::new)
    }

    pub fn with_range(max_u: f64, tail_switch: f64) -> Result<Self> {
        if !(max_u.is_finite() && max_u >= 2.0) {
            return domain(format!("max_u must be finite and >= 2, got {max_u}"));
        }
        if !(tail_switch > 1.0 && tail_switch <= max_u) {
            return domain(format!("tail_switch must lie in (1, max_u], got {tail_switch}"));
        }
        let count = max_u.ceil() as usize;
        let mut pieces = Vec::with_capacity(count);
        let mut first = vec![0.0; DEGREE + 1];
        first[0] = 1.0;
        pieces.push(Piece { ln_scale: 0.0, coeffs: first });
        for k in 1..count {
            let prev = &pieces[k - 1];
            let right = (k + 1) as f64;
            let mut c = vec![0.0; DEGREE + 1];
            for i in 0..DEGREE {
                c[i + 1] = (prev.coeffs[i] + i as f64 * c[i]) / (right * (i + 1) as f64);
            }
            let mut acc = CompensatedSum::new();
            for (i, &ci) in c.iter().enumerate().skip(1).rev() {
                acc.add(ci / (i + 1) as f64);
            }
            let end_value = acc.value() / k as f64;
            c[0] = end_value;
            for x in c.iter_mut() {
                *x /= end_value;
            }
            pieces.push(Piece { ln_scale: prev.ln_scale + end_value.ln(), coeffs: c });
        }
        Ok(Self { pieces, max_u, tail_switch, tol: DEFAULT_TOL })
    }

    pub fn max_u(&self) -> f64 {
        self.max_u
    }

    pub fn tail_switch(&self) -> f64 {
        self.tail_switch
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn check(u: f64) -> Result<()> {
        if !u.is_finite() || u < 0.0 {
            return domain(format!("rho requires finite u >= 0, got {u}"));
        }
        Ok(())
    }

    /// Piece covering `u` and the local variable `s = k + 1 − u ∈ [0, 1]`.
    fn locate(&self, u: f64) -> (&Piece, f64) {
        let k = (u.floor() as usize).min(self.pieces.len() - 1);
        (&self.pieces[k], (k + 1) as f64 - u)
    }

    pub fn evaluate(&self, u: f64) -> Result<RhoValue> {
        Self::check(u)?;
        if u <= 1.0 {
            return Ok(RhoValue { value: 1.0, ln_value: 0.0, approximate: false });
        }
        if u > self.max_u {
            let ln_value = ln_rho_asymptotic(u);
            return Ok(RhoValue { value: ln_value.exp(), ln_value, approximate: true });
        }
        let (piece, x) = self.locate(u);
        let p = piece.poly(x);
        let ln_value = piece.ln_scale + p.ln();
        Ok(RhoValue { value: piece.ln_scale.exp() * p, ln_value, approximate: false })
    }

    pub fn rho(&self, u: f64) -> Result<f64> {
        Ok(self.evaluate(u)?.value)
    }

    pub fn ln_rho(&self, u: f64) -> Result<f64> {
        Ok(self.evaluate(u)?.ln_value)
    }

    /// ρ′(u). Exact zero on `[0, 1)`; `u = 1` (the kink) and `u > max_u` are
    /// rejected.
    pub fn rho_deriv(&self, u: f64) -> Result<f64> {
        Self::check(u)?;
        if u < 1.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return domain("rho' is discontinuous at u = 1");
        }
        if u > self.max_u {
            return domain(format!("rho' only available up to max_u = {}", self.max_u));
        }
        let (piece, x) = self.locate(u);
        Ok(-piece.ln_scale.exp() * piece.poly_deriv(x))
    }

    /// `∫_a^b ρ` for `0 <= a <= b <= max_u`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        Self::check(a)?;
        Self::check(b)?;
        if a > b {
            return Ok(-self.integral(b, a)?);
        }
        if b > self.max_u {
            return domain(format!("integral upper end {b} beyond max_u = {}", self.max_u));
        }
        let mut acc = CompensatedSum::new();
        let mut lo = a;
        while lo < b {
            let k = (lo.floor() as usize).min(self.pieces.len() - 1);
            let hi = ((k + 1) as f64).min(b);
            let piece = &self.pieces[k];
            let right = (k + 1) as f64;
            let scale = piece.ln_scale.exp();
            if scale > 0.0 {
                acc.add(scale * piece.poly_integral(right - hi, right - lo));
            }
            lo = hi;
        }
        Ok(acc.value())
    }

    pub fn tail_integral(&self, b: f64) -> Result<TailIntegral> {
        Self::check(b)?;
        if b >= self.tail_switch {
            let env = self.decay_envelope(b)?;
            return Ok(TailIntegral { value: env, error_bound: env, approximate: true });
        }
        let value = self.integral(b, self.tail_switch)?;
        let error_bound = self.decay_envelope(self.tail_switch)?;
        Ok(TailIntegral { value, error_bound, approximate: false })
    }

    pub fn rho_tail_integral(&self, b: f64) -> Result<f64> {
        Ok(self.tail_integral(b)?.value)
    }

    /// `ρ(t)/ξ(t)`, which dominates `∫_t^∞ ρ` since `-ρ'/ρ` is increasing.
    fn decay_envelope(&self, t: f64) -> Result<f64> {
        let r = self.evaluate(t)?;
        Ok(r.value / xi(t)?)
    }

    /// `|ρ(u+v)/ρ(u) − 1| / (|v| log(u+1))` for `u >= 2`, `|v| <= 1/log u`.
    pub fn perturb_check(&self, u: f64, v: f64) -> Result<f64> {
        if !(u.is_finite() && u >= 2.0) {
            return domain(format!("perturbation check needs u >= 2, got {u}"));
        }
        if !v.is_finite() || v.abs() > 1.0 / u.ln() {
            return domain(format!("|v| must not exceed 1/log u = {}", 1.0 / u.ln()));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        let diff = self.ln_rho(u + v)? - self.ln_rho(u)?;
        Ok(diff.exp_m1().abs() / (v.abs() * (u + 1.0).ln()))
    }
}

/// de Bruijn's saddle-point asymptotic for `ln ρ(u)`; relative error `O(1/u)`.
pub fn ln_rho_asymptotic(u: f64) -> f64 {
    let x = xi(u).expect("u > 1");
    let dxi = x / (1.0 + u * x - u);
    EULER_GAMMA - u * x + ein(x) + 0.5 * (dxi / (2.0 * PI)).ln()
}

/// `∫_0^x (e^s − 1)/s ds`.
fn ein(x: f64) -> f64 {
    let mut sum = CompensatedSum::new();
    let mut pw = 1.0;
    for k in 1..400 {
        pw *= x / k as f64;
        let term = pw / k as f64;
        sum.add(term);
        if term < 1e-18 * sum.value().abs() && k as f64 > x {
            break;
        }
    }
    sum.value()
}

/// Root-finder settings for ξ(u).
#[derive(Clone, Copy, Debug)]
pub struct XiSolver {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for XiSolver {
    fn default() -> Self {
        Self { tol: 1e-14, max_iter: 200 }
    }
}

impl XiSolver {
    /// The positive root of `e^ξ = 1 + uξ`, by Newton's method safeguarded
    /// with a bisection bracket, started from `log(u log u)`.
    pub fn solve(&self, u: f64) -> Result<f64> {
        if !(u.is_finite() && u > 1.0) {
            return domain(format!("xi requires u > 1, got {u}"));
        }
        // g(ξ) = (e^ξ − 1)/ξ − u is increasing with g(0+) = 1 − u < 0.
        let g = |x: f64| x.exp_m1() / x - u;
        let dg = |x: f64| {
            if x < 1e-3 {
                0.5 + x / 3.0 + x * x / 8.0
            } else {
                (x * x.exp() - x.exp_m1()) / (x * x)
            }
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        let mut x = if u >= 3.0 { (u * u.ln()).ln() } else { 2.0 * (u - 1.0) };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..self.max_iter {
            let gx = g(x);
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let residual = x.exp_m1() - u * x;
            if residual.abs() <= self.tol * (1.0 + u * x) || hi - lo <= 4.0 * f64::EPSILON * x {
                return Ok(x);
            }
            let step = x - gx / dg(x);
            x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        }
        Ok(x)
    }
}

pub fn xi(u: f64) -> Result<f64> {
    XiSolver::default().solve(u)
}
