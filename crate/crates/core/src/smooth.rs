//! Smooth numbers: a largest-prime-factor table, exact ψ(x, y), and sums of
//! `f(n)/n` restricted to y-smooth `n`.

use crate::dickman::RhoEvaluator;
use crate::error::{capacity, domain, Result};
use crate::numeric::{floor_pow, CompensatedSum, ComplexSum};
use crate::primes::{primes_up_to, smooth_numbers};
use num_complex::Complex64;

/// Suggested table size for desk-scale experiments.
pub const DEFAULT_LIMIT: u64 = 100_000_000;

/// Table of `P(n)`, the largest prime factor, for `1 <= n <= limit`, with the
/// convention `P(1) = 1`.
#[derive(Clone, Debug)]
pub struct SmoothSieve {
    lpf: Vec<u32>,
}

impl SmoothSieve {
    pub fn new(limit: u64) -> Result<Self> {
        let mut sieve = Self { lpf: vec![0, 1] };
        sieve.extend_to(limit)?;
        Ok(sieve)
    }

    pub fn limit(&self) -> u64 {
        (self.lpf.len() - 1) as u64
    }

    /// Grows the table. Entries already present are never touched.
    pub fn extend_to(&mut self, limit: u64) -> Result<()> {
        if limit > u32::MAX as u64 {
            return capacity(format!("sieve limit {limit} exceeds 32-bit entries"));
        }
        let old = self.limit();
        if limit <= old {
            return Ok(());
        }
        let lo = old as usize + 1;
        let hi = limit as usize;
        self.lpf.resize(hi + 1, 1);
        // Visiting primes in increasing order and overwriting leaves the
        // largest one. A number in the new range is prime iff still unmarked
        // when reached; older numbers are prime iff P(p) = p.
        for p in 2..=hi {
            let is_prime = if p < lo { self.lpf[p] as usize == p } else { self.lpf[p] == 1 };
            if !is_prime {
                continue;
            }
            let first = if p >= lo { p } else { lo.div_ceil(p) * p };
            let mut m = first;
            while m <= hi {
                self.lpf[m] = p as u32;
                m += p;
            }
        }
        Ok(())
    }

    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        if n == 0 || n > self.limit() {
            return domain(format!("n = {n} outside [1, {}]", self.limit()));
        }
        Ok(self.lpf[n as usize] as u64)
    }

    /// `P(n) <= y`; `n` must lie within the table.
    #[inline]
    pub fn is_smooth(&self, n: u64, y: f64) -> bool {
        (self.lpf[n as usize] as f64) <= y
    }

    fn upto(&self, x: f64) -> Result<u64> {
        if !x.is_finite() {
            return domain(format!("non-finite bound {x}"));
        }
        if x > self.limit() as f64 {
            return capacity(format!("{x} exceeds sieve limit {}", self.limit()));
        }
        Ok(if x < 1.0 { 0 } else { x.floor() as u64 })
    }

    /// ψ(x, y) = #{n <= x : P(n) <= y}.
    pub fn psi(&self, x: f64, y: f64) -> Result<u64> {
        if !(y >= 2.0) {
            return domain(format!("psi requires y >= 2, got {y}"));
        }
        let top = self.upto(x)?;
        Ok((1..=top).filter(|&n| self.is_smooth(n, y)).count() as u64)
    }

    /// `(ψ(x,y)/x − ρ(u)) / (ρ(u) log(u+1)/log y)` with `u = log x / log y`.
    pub fn hildebrand_residual(&self, x: f64, y: f64, rho: &RhoEvaluator) -> Result<f64> {
        let count = self.psi(x, y)? as f64;
        if x < 1.0 {
            return domain(format!("hildebrand residual needs x >= 1, got {x}"));
        }
        let u = x.ln() / y.ln();
        let r = rho.rho(u)?;
        Ok((count / x - r) / (r * (u + 1.0).ln() / y.ln()))
    }

    /// Σ f(n)/n over y-smooth n in `[lo, hi]`, ascending, compensated.
    pub fn smooth_sum<F>(&self, y: f64, lo: u64, hi: u64, f: F) -> Result<Complex64>
    where
        F: Fn(u64) -> Complex64,
    {
        if hi > self.limit() {
            return capacity(format!("{hi} exceeds sieve limit {}", self.limit()));
        }
        let mut acc = ComplexSum::new();
        for n in lo.max(1)..=hi {
            if self.is_smooth(n, y) {
                let v = f(n);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return domain(format!("test function not finite at n = {n}"));
                }
                acc.add(v / n as f64);
            }
        }
        Ok(acc.value())
    }

    /// Σ 1/n over y-smooth n with `y^s < n <= y^r`.
    pub fn smooth_log_sum(&self, y: f64, s: f64, r: f64) -> Result<f64> {
        check_exponents(y, s, r)?;
        let hi = floor_pow(y, r);
        if hi > self.limit() as f64 {
            return capacity(format!("y^r = {hi} exceeds sieve limit {}", self.limit()));
        }
        let lo = floor_pow(y, s) as u64 + 1;
        let mut acc = CompensatedSum::new();
        for n in lo..=hi as u64 {
            if self.is_smooth(n, y) {
                acc.add(1.0 / n as f64);
            }
        }
        Ok(acc.value())
    }

    /// Σ 1/n over y-smooth n in `(y^{log log y}, z]`. Up to the sieve limit
    /// the sum is exact; if `z` lies beyond it (but within `limit²`) the rest
    /// is covered by a Rankin bound.
    pub fn smooth_tail_check(&self, y: f64, z: f64) -> Result<SmoothTail> {
        if !(y >= 100.0) {
            return domain(format!("smooth tail check requires y >= 100, got {y}"));
        }
        let start = floor_pow(y, y.ln().ln());
        if !(z >= start) {
            return domain(format!("z = {z} below y^(log log y) = {start}"));
        }
        let limit = self.limit() as f64;
        if z > limit * limit {
            return capacity(format!("z = {z} beyond limit^2"));
        }
        let exact_top = z.floor().min(limit) as u64;
        let mut acc = CompensatedSum::new();
        for n in start as u64 + 1..=exact_top {
            if self.is_smooth(n, y) {
                acc.add(1.0 / n as f64);
            }
        }
        let tail_bound = if z.floor() > limit { rankin_tail(y, limit) } else { 0.0 };
        let l = y.ln();
        let envelope = l.powf(-(l.ln().ln() - 1.5));
        Ok(SmoothTail { value: acc.value(), tail_bound, envelope })
    }

    /// Compares the smooth-restricted sum of `f(n)/n` over `[a, b]` with `ρ(B)`
    /// times the unrestricted one. `[a, b]` must lie inside
    /// `[y^B/log y, y^B (log y)^c]`.
    pub fn remove_smoothness<F>(&self, y: f64, b_exp: f64, c: f64, interval: (u64, u64), f: F) -> Result<SmoothnessRemoval>
    where
        F: Fn(u64) -> Complex64,
    {
        if !(y > 1.0 && b_exp >= 1.0 && c >= 0.0) {
            return domain(format!("need y > 1, B >= 1, c >= 0; got y={y}, B={b_exp}, c={c}"));
        }
        let (a, b) = interval;
        let l = y.ln();
        let yb = y.powf(b_exp);
        if a as f64 + 1e-9 < yb / l || b as f64 > yb * l.powf(c) * (1.0 + 1e-12) || a > b {
            return domain(format!("interval [{a}, {b}] outside [y^B/log y, y^B (log y)^c]"));
        }
        if b > self.limit() {
            return capacity(format!("{b} exceeds sieve limit {}", self.limit()));
        }
        let rho_b = RhoEvaluator::shared().rho(b_exp)?;
        let mut smooth = ComplexSum::new();
        let mut all = ComplexSum::new();
        for n in a.max(1)..=b {
            let v = f(n);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return domain(format!("test function not finite at n = {n}"));
            }
            let t = v / n as f64;
            all.add(t);
            if self.is_smooth(n, y) {
                smooth.add(t);
            }
        }
        let envelope = rho_b * (b_exp + 1.0).ln() * l.ln().powi(2) / l;
        Ok(SmoothnessRemoval { smooth_sum: smooth.value(), scaled_full_sum: rho_b * all.value(), envelope })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothTail {
    pub value: f64,
    /// Upper bound on the part beyond the sieve limit (0 when fully exact).
    pub tail_bound: f64,
    /// `(log y)^{−(log₃ y − 3/2)}`.
    pub envelope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessRemoval {
    pub smooth_sum: Complex64,
    pub scaled_full_sum: Complex64,
    pub envelope: f64,
}

fn check_exponents(y: f64, s: f64, r: f64) -> Result<()> {
    if !(y >= 2.0 && s >= 0.0 && r >= s && r.is_finite()) {
        return domain(format!("need y >= 2 and 0 <= s <= r, got y={y}, s={s}, r={r}"));
    }
    Ok(())
}

/// Rankin's bound `Σ_{n>Z, P(n)<=y} 1/n <= Z^{-σ} Π_{p<=y} (1 − p^{σ−1})^{-1}`,
/// minimised over a grid of σ in (0, 1).
pub fn rankin_tail(y: f64, z: f64) -> f64 {
    let primes = primes_up_to(y.floor() as u64);
    let mut best = f64::INFINITY;
    for i in 1..200 {
        let sigma = i as f64 / 200.0;
        let ln_prod: f64 = primes.iter().map(|&p| -(-(p as f64).powf(sigma - 1.0)).ln_1p()).sum();
        best = best.min((ln_prod - sigma * z.ln()).exp());
    }
    best
}

/// All y-smooth integers in `[lo, hi]`, ascending, by depth-first generation
/// over the primes up to `y`. Independent of any sieve table.
pub fn smooth_in_range(y: f64, lo: u64, hi: u64) -> Vec<u64> {
    let primes = primes_up_to(y.floor().max(1.0) as u64);
    let mut all = smooth_numbers(&primes, hi);
    all.retain(|&n| n >= lo);
    all
}
