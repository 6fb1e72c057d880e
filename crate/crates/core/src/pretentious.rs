//! Characters that pretend to be 1: `max_{p<=T} |χ(p) − 1|` small. Search,
//! certification, and the logarithmic sums such characters control.

use crate::characters::{CharacterGroup, Parity};
use crate::dickman::RhoEvaluator;
use crate::error::{capacity, domain, Result};
use crate::numeric::{ComplexSum, CompensatedSum, EULER_GAMMA};
use crate::primes::{factorize, primes_up_to};
use crate::smooth::{rankin_tail, smooth_in_range};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Largest modulus searched exhaustively.
pub const EXHAUSTIVE_CAP: u64 = 1_000_000;

/// Largest range end for the smooth-number enumerations here.
pub const SMOOTH_RANGE_CAP: f64 = 1e9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretentiousnessCertificate {
    pub q: u64,
    pub ell: u64,
    #[serde(rename = "T")]
    pub t: u64,
    pub max_dev: f64,
    pub parity: Parity,
    pub principal: bool,
}

/// `h(T) = log log T / N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HFunction {
    pub t: f64,
    pub n: f64,
}

impl HFunction {
    pub fn value(&self) -> f64 {
        self.t.ln().ln() / self.n
    }
}

/// `|χ(p) − 1| <= 2π |θ_p|`: the value threshold matching `|θ_p| <= 1/N`.
pub fn epsilon_for(n: f64) -> f64 {
    2.0 * PI / n
}

/// Exponents `ℓ·ind(p) mod (q−1)` for the primes `p <= T`, centred.
struct PrimePhases {
    order: u64,
    primes: Vec<u64>,
    ind: Vec<u64>,
}

impl PrimePhases {
    fn new(group: &CharacterGroup, t: u64) -> Result<Self> {
        if t >= group.modulus() {
            return domain(format!("T = {t} must be below q = {}", group.modulus()));
        }
        let primes = primes_up_to(t);
        let ind = primes.iter().map(|&p| group.index(p as i64).expect("p < q")).collect();
        Ok(Self { order: group.order(), primes, ind })
    }

    /// Largest centred numerator `|ℓ ind(p) mod (q−1)|`.
    fn max_abs_numerator(&self, ell: u64) -> u64 {
        let l = self.order;
        self.ind
            .iter()
            .map(|&k| {
                let r = ((ell % l) as u128 * k as u128 % l as u128) as u64;
                r.min(l - r)
            })
            .max()
            .unwrap_or(0)
    }

    /// `max_p |χ_ℓ(p) − 1| = 2 sin(π · max|θ_p|)`.
    fn max_dev(&self, ell: u64) -> f64 {
        2.0 * (PI * self.max_abs_numerator(ell) as f64 / self.order as f64).sin()
    }
}

fn certificate(group: &CharacterGroup, t: u64, ell: u64, max_dev: f64) -> PretentiousnessCertificate {
    PretentiousnessCertificate {
        q: group.modulus(),
        ell,
        t,
        max_dev,
        parity: if ell % 2 == 0 { Parity::Even } else { Parity::Odd },
        principal: ell == 0,
    }
}

/// Recomputes `max_{p<=T} |χ_ℓ(p) − 1|`.
pub fn certify(group: &CharacterGroup, ell: u64, t: u64) -> Result<PretentiousnessCertificate> {
    let phases = PrimePhases::new(group, t)?;
    Ok(certificate(group, t, ell % group.order(), phases.max_dev(ell)))
}

/// Every `ℓ` of the requested parity with `max_{p<=T} |χ_ℓ(p) − 1| <= ε`,
/// ordered by `ℓ`. Above [`EXHAUSTIVE_CAP`] the pigeonhole stream
/// [`pigeonhole_search`] is used instead, capped at `max_results`.
pub fn search_pretentious(group: &CharacterGroup, t: u64, epsilon: f64, parity: Parity, max_results: usize) -> Result<Vec<PretentiousnessCertificate>> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return domain(format!("epsilon must lie in (0, 2], got {epsilon}"));
    }
    let phases = PrimePhases::new(group, t)?;
    if group.modulus() > EXHAUSTIVE_CAP {
        return pigeonhole_search(group, t, epsilon, parity, max_results);
    }
    Ok((0..group.order())
        .into_par_iter()
        .filter(|&l| parity.admits(l))
        .filter_map(|l| {
            let dev = phases.max_dev(l);
            (dev <= epsilon).then(|| certificate(group, t, l, dev))
        })
        .collect())
}

/// Scans `ℓ = 0, 1, 2, …`, filing the argument vector `ℓV_χ` into cubes of
/// side `1/N` with `2π/N <= ε`. When two multipliers share a cube their
/// difference has every `|θ_p| <= 1/N`, hence qualifies. Differences with the
/// wrong parity are skipped. Stops after `max_results` certificates.
pub fn pigeonhole_search(group: &CharacterGroup, t: u64, epsilon: f64, parity: Parity, max_results: usize) -> Result<Vec<PretentiousnessCertificate>> {
    let phases = PrimePhases::new(group, t)?;
    let cells = (2.0 * PI / epsilon).ceil().max(1.0) as u64;
    let l = phases.order;
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut out: Vec<PretentiousnessCertificate> = Vec::new();
    let mut emitted = std::collections::HashSet::new();
    for ell in 0..l {
        if out.len() >= max_results {
            break;
        }
        let cube: Vec<u64> = phases
            .ind
            .iter()
            .map(|&k| (((ell as u128 * k as u128) % l as u128) * cells as u128 / l as u128) as u64)
            .collect();
        match seen.get(&cube) {
            Some(&first) => {
                let diff = ell - first;
                if parity.admits(diff) && emitted.insert(diff) {
                    let dev = phases.max_dev(diff);
                    if dev <= epsilon {
                        out.push(certificate(group, t, diff, dev));
                    }
                }
            }
            None => {
                seen.insert(cube, ell);
            }
        }
    }
    out.sort_by_key(|c| c.ell);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountBound {
    pub count_even: u64,
    /// `φ(q) / (2 N^{π(T)})`
    pub bound: f64,
    pub holds: bool,
}

/// Counts even `ℓ` with `max_{p<=T} |θ_p| <= 1/N`, compared in integers.
pub fn count_bound_check(group: &CharacterGroup, t: u64, n: u64) -> Result<CountBound> {
    if n == 0 || t < 3 {
        return domain(format!("need N >= 1 and T >= 3, got N={n}, T={t}"));
    }
    let phases = PrimePhases::new(group, t)?;
    let l = phases.order;
    let count_even = (0..l)
        .into_par_iter()
        .filter(|&ell| ell % 2 == 0 && phases.max_abs_numerator(ell) as u128 * n as u128 <= l as u128)
        .count() as u64;
    let k = phases.primes.len() as u32;
    let nk = (n as u128).pow(k);
    Ok(CountBound {
        count_even,
        bound: l as f64 / (2.0 * nk as f64),
        holds: 2 * count_even as u128 * nk >= l as u128,
    })
}

fn check_y(group: &CharacterGroup, y: f64) -> Result<()> {
    if !(y.is_finite() && y < group.modulus() as f64) {
        return domain(format!("y = {y} must be below q = {}", group.modulus()));
    }
    Ok(())
}

/// `Σ_{p<=y} (χ(p) − 1)/p`.
pub fn prime_log_sum(group: &CharacterGroup, ell: u64, y: f64) -> Result<Complex64> {
    check_y(group, y)?;
    let mut acc = ComplexSum::new();
    for p in primes_up_to(y.max(0.0) as u64) {
        acc.add((group.char_value(ell, p as i64) - 1.0) / p as f64);
    }
    Ok(acc.value())
}

/// `(|χ(n) − 1|, Σ_{p^k || n} k |χ(p) − 1|)`.
pub fn chi_minus_one_bound(group: &CharacterGroup, ell: u64, n: u64) -> Result<(f64, f64)> {
    if n == 0 || n % group.modulus() == 0 {
        return domain(format!("n = {n} must be coprime to q = {}", group.modulus()));
    }
    let lhs = (group.char_value(ell, n as i64) - 1.0).norm();
    let rhs = factorize(n)
        .iter()
        .map(|&(p, k)| k as f64 * (group.char_value(ell, p as i64) - 1.0).norm())
        .sum();
    Ok((lhs, rhs))
}

/// `(Σ_{p<=y, k>=1} |χ(p)−1|/p^k, 2 Σ_{p<=y} |χ(p)−1|/p)`; the inner
/// geometric series is summed in closed form as `|χ(p)−1|/(p−1)`.
pub fn prime_power_sum_check(group: &CharacterGroup, ell: u64, y: f64) -> Result<(f64, f64)> {
    check_y(group, y)?;
    let mut lhs = CompensatedSum::new();
    let mut rhs = CompensatedSum::new();
    for p in primes_up_to(y.max(0.0) as u64) {
        let d = (group.char_value(ell, p as i64) - 1.0).norm();
        lhs.add(d / (p - 1) as f64);
        rhs.add(2.0 * d / p as f64);
    }
    Ok((lhs.value(), rhs.value()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerProductCheck {
    /// `Σ_{P(n)<=y, n<=H} χ(n)/n`
    pub sum_value: Complex64,
    /// Bound on `Σ_{P(n)<=y, n>H} 1/n`.
    pub tail_bound: f64,
    /// `Π_{p<=y} (1 − χ(p)/p)^{−1}`
    pub product_value: Complex64,
    /// `e^γ log y`
    pub mertens_ref: f64,
}

fn check_height(h: f64) -> Result<u64> {
    if !(h >= 1.0) {
        return domain(format!("truncation height must be >= 1, got {h}"));
    }
    if h > SMOOTH_RANGE_CAP {
        return capacity(format!("truncation height {h} above {SMOOTH_RANGE_CAP}"));
    }
    Ok(h.floor() as u64)
}

fn smooth_char_sum(group: &CharacterGroup, ell: u64, y: f64, lo: u64, hi: u64) -> Complex64 {
    let mut acc = ComplexSum::new();
    for n in smooth_in_range(y, lo, hi) {
        acc.add(group.char_value(ell, n as i64) / n as f64);
    }
    acc.value()
}

pub fn euler_product_check(group: &CharacterGroup, ell: u64, y: f64, height: f64) -> Result<EulerProductCheck> {
    check_y(group, y)?;
    let h = check_height(height)?;
    let sum_value = smooth_char_sum(group, ell, y, 1, h);
    let mut product_value = Complex64::new(1.0, 0.0);
    for p in primes_up_to(y.max(0.0) as u64) {
        product_value /= 1.0 - group.char_value(ell, p as i64) / p as f64;
    }
    Ok(EulerProductCheck {
        sum_value,
        tail_bound: rankin_tail(y, h as f64),
        product_value,
        mertens_ref: EULER_GAMMA.exp() * y.ln(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothCharTail {
    /// `Σ_{y^B < n <= H, P(n)<=y} χ(n)/n`
    pub value: Complex64,
    /// Bound on the omitted `n > H`.
    pub tail_bound: f64,
    /// `log y ∫_B^∞ ρ`
    pub main_term: f64,
}

pub fn smooth_char_tail_sum(group: &CharacterGroup, ell: u64, y: f64, b: f64, height: f64) -> Result<SmoothCharTail> {
    check_y(group, y)?;
    if !(b >= 0.0 && y > 1.0) {
        return domain(format!("need B >= 0 and y > 1, got B={b}, y={y}"));
    }
    let h = check_height(height)?;
    let lo = crate::numeric::floor_pow(y, b);
    let value = if lo >= h as f64 {
        Complex64::new(0.0, 0.0)
    } else {
        smooth_char_sum(group, ell, y, lo as u64 + 1, h)
    };
    Ok(SmoothCharTail {
        value,
        tail_bound: rankin_tail(y, h.max(lo as u64) as f64),
        main_term: y.ln() * RhoEvaluator::shared().rho_tail_integral(b)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub char_sum: Complex64,
    pub unit_sum: Complex64,
    /// `h(T) log y ∫_w^{w'} ρ`
    pub envelope: f64,
}

/// Sums of `f(n)χ(n)/n` and `f(n)/n` over y-smooth `n ∈ [y^u, y^{u'}]`.
pub fn switch_to_one<F>(group: &CharacterGroup, ell: u64, y: f64, u: f64, u_prime: f64, h: HFunction, f: F) -> Result<SwitchReport>
where
    F: Fn(u64) -> Complex64,
{
    if !(y > 1.0 && u >= 0.0 && u_prime >= u) {
        return domain(format!("need y > 1 and 0 <= u <= u', got y={y}, u={u}, u'={u_prime}"));
    }
    let hi = crate::numeric::floor_pow(y, u_prime);
    if hi > SMOOTH_RANGE_CAP {
        return capacity(format!("y^u' = {hi} above {SMOOTH_RANGE_CAP}"));
    }
    let lo = crate::numeric::ceil_pow(y, u).max(1.0) as u64;
    let mut chars = ComplexSum::new();
    let mut units = ComplexSum::new();
    for n in smooth_in_range(y, lo, hi as u64) {
        let v = f(n);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return domain(format!("test function not finite at n = {n}"));
        }
        let t = v / n as f64;
        units.add(t);
        chars.add(t * group.char_value(ell, n as i64));
    }
    let w = (u - 1.0).max(0.0);
    let w_prime = (u_prime - u).max(u_prime - 1.0);
    let integral = if w_prime > w { RhoEvaluator::shared().integral(w, w_prime)? } else { 0.0 };
    Ok(SwitchReport { char_sum: chars.value(), unit_sum: units.value(), envelope: h.value() * y.ln() * integral })
}
