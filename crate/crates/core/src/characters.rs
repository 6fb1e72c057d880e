//! Dirichlet characters modulo a prime `q`, indexed through a primitive root:
//! `χ_ℓ(n) = e(ℓ · ind(n) / (q − 1))`.

use crate::error::{capacity, domain, Error, Result};
use crate::numeric::{e, e_ratio, ComplexSum};
use crate::primes::{factorize, first_primes, is_prime, pow_mod};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest modulus accepted by [`CharacterGroup::new`].
pub const DEFAULT_MODULUS_CAP: u64 = 20_000_000;

/// Relative slack under which two sweep maxima count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Absolute slack, covering sweeps whose true values all vanish.
pub const TIE_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Any,
    Odd,
    Even,
}

impl Parity {
    pub fn admits(self, ell: u64) -> bool {
        match self {
            Parity::Any => true,
            Parity::Odd => ell % 2 == 1,
            Parity::Even => ell % 2 == 0,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(Parity::Any),
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(Error::Parse(format!("unknown parity {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CharacterGroup {
    q: u64,
    g: u64,
    ind: Vec<u32>,
}

/// Which implementation [`CharacterGroup::sweep_max`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepPath {
    /// One length-(q−1) transform yields every partial sum at once.
    Fast,
    /// Per-character summation from a root-of-unity table.
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMax {
    pub max_abs: f64,
    pub argmax_ell: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyaCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub error: f64,
}

/// Centred arguments `θ_p ∈ (−1/2, 1/2]` of `χ(p)` for the first `k` primes,
/// held exactly as numerators over `q − 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaVector {
    pub denominator: u64,
    pub numerators: Vec<i64>,
}

impl ThetaVector {
    pub fn entries(&self) -> Vec<f64> {
        self.numerators.iter().map(|&t| t as f64 / self.denominator as f64).collect()
    }

    /// `max_p |θ_p|` as an exact fraction `(numerator, denominator)`.
    pub fn max_abs_numerator(&self) -> u64 {
        self.numerators.iter().map(|t| t.unsigned_abs()).max().unwrap_or(0)
    }
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_cap(q, DEFAULT_MODULUS_CAP)
    }

    pub fn with_cap(q: u64, cap: u64) -> Result<Self> {
        if q < 3 || !is_prime(q) {
            return Err(Error::Validation(format!("modulus {q} is not an odd prime")));
        }
        if q > cap {
            return capacity(format!("modulus {q} above cap {cap}"));
        }
        let order = q - 1;
        let factors: Vec<u64> = factorize(order).into_iter().map(|(p, _)| p).collect();
        let g = (2..q)
            .find(|&g| factors.iter().all(|&p| pow_mod(g, order / p, q) != 1))
            .expect("a prime modulus has a primitive root");
        let mut ind = vec![u32::MAX; q as usize];
        let mut x = 1u64;
        for k in 0..order {
            ind[x as usize] = k as u32;
            x = x * g % q;
        }
        Ok(Self { q, g, ind })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Order of the group, `q − 1`.
    pub fn order(&self) -> u64 {
        self.q - 1
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Discrete logarithm of `n` to base `g`; `None` when `q | n`.
    pub fn index(&self, n: i64) -> Option<u64> {
        let r = n.rem_euclid(self.q as i64) as usize;
        (r != 0).then(|| self.ind[r] as u64)
    }

    /// `ℓ · ind(n) mod (q − 1)`, the exponent of `χ_ℓ(n)`.
    fn phase(&self, ell: u64, n: i64) -> Option<u64> {
        let l = self.order();
        self.index(n).map(|k| ((ell % l) as u128 * k as u128 % l as u128) as u64)
    }

    pub fn char_value(&self, ell: u64, n: i64) -> Complex64 {
        match self.phase(ell, n) {
            Some(k) => e_ratio(k, self.order()),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `χ_ℓ(−1) = (−1)^ℓ`.
    pub fn parity_sign(&self, ell: u64) -> f64 {
        if ell % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn partial_sum(&self, ell: u64, x: f64) -> Complex64 {
        let top = if x < 1.0 { 0 } else { x.floor() as i64 };
        let mut acc = ComplexSum::new();
        for n in 1..=top {
            acc.add(self.char_value(ell, n));
        }
        acc.value()
    }

    fn check_sweep_x(&self, x: f64) -> Result<u64> {
        if !(x.is_finite() && x <= self.q as f64) {
            return domain(format!("sweep length {x} exceeds modulus {}", self.q));
        }
        Ok(if x < 1.0 { 0 } else { x.floor() as u64 })
    }

    /// `Σ_{n<=x} χ_ℓ(n)` for every `ℓ ∈ [0, q−2]`: the unnormalised inverse
    /// DFT of the indicator of `{ind(n) : n <= x}`.
    pub fn sweep_sums_fast(&self, x: f64) -> Result<Vec<Complex64>> {
        let top = self.check_sweep_x(x)?;
        let l = self.order() as usize;
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for n in 1..=top.min(self.q - 1) {
            buf[self.ind[n as usize] as usize].re += 1.0;
        }
        FftPlanner::new().plan_fft_inverse(l).process(&mut buf);
        Ok(buf)
    }

    /// The same partial sums for the listed `ℓ`, each summed directly.
    pub fn sweep_sums_naive(&self, x: f64, ells: &[u64]) -> Result<Vec<Complex64>> {
        let top = self.check_sweep_x(x)?.min(self.q - 1) as usize;
        let l = self.order();
        let roots: Vec<Complex64> = (0..l).map(|k| e_ratio(k, l)).collect();
        let ind = &self.ind[1..=top];
        Ok(ells
            .par_iter()
            .map(|&ell| {
                let ell = ell % l;
                let mut acc = ComplexSum::new();
                for &k in ind {
                    acc.add(roots[((ell * k as u64) % l) as usize]);
                }
                acc.value()
            })
            .collect())
    }

    /// Largest `|Σ_{n<=x} χ(n)|` over the selected characters, with the
    /// smallest `ℓ` among (near-)ties.
    pub fn sweep_max(&self, x: f64, parity: Parity, exclude_principal: bool, path: SweepPath) -> Result<SweepMax> {
        let ells: Vec<u64> = (0..self.order())
            .filter(|&l| parity.admits(l) && !(exclude_principal && l == 0))
            .collect();
        if ells.is_empty() {
            return domain("no character matches the requested selection");
        }
        let values = match path {
            SweepPath::Fast => {
                let all = self.sweep_sums_fast(x)?;
                ells.iter().map(|&l| all[l as usize]).collect()
            }
            SweepPath::Naive => self.sweep_sums_naive(x, &ells)?,
        };
        Ok(select_max(&ells, &values))
    }

    /// `τ(χ_ℓ) = Σ_a χ_ℓ(a) e(a/q)`.
    pub fn gauss_sum(&self, ell: u64) -> Result<Complex64> {
        if ell % self.order() == 0 {
            return domain("Gauss sum of the principal character is excluded");
        }
        let mut acc = ComplexSum::new();
        for a in 1..self.q {
            acc.add(self.char_value(ell, a as i64) * e_ratio(a, self.q));
        }
        Ok(acc.value())
    }

    /// `(τ(χ)/2πi) Σ_{1<=|n|<=z} χ̄(n)(1 − e(−αn))/n`.
    pub fn polya_rhs(&self, ell: u64, alpha: f64, z: f64) -> Result<Complex64> {
        let tau = self.gauss_sum(ell)?;
        if !(alpha > 0.0 && alpha <= 1.0 && z >= 1.0) {
            return domain(format!("need alpha in (0,1] and z >= 1, got alpha={alpha}, z={z}"));
        }
        let sign = self.parity_sign(ell);
        let mut acc = ComplexSum::new();
        for n in 1..=z.floor() as i64 {
            let cbar = self.char_value(ell, n).conj();
            let nf = n as f64;
            // n and −n together; χ̄(−n) = χ(−1) χ̄(n)
            let pos = (Complex64::new(1.0, 0.0) - e(-alpha * nf)) / nf;
            let neg = (Complex64::new(1.0, 0.0) - e(alpha * nf)) / -nf;
            acc.add(cbar * (pos + sign * neg));
        }
        Ok(tau / Complex64::new(0.0, 2.0 * PI) * acc.value())
    }

    /// Both sides of the truncated Pólya expansion at `x = αq`.
    pub fn polya_check(&self, ell: u64, alpha: f64, z: f64) -> Result<PolyaCheck> {
        let rhs = self.polya_rhs(ell, alpha, z)?;
        let lhs = self.partial_sum(ell, alpha * self.q as f64);
        Ok(PolyaCheck { lhs, rhs, error: (lhs - rhs).norm() })
    }

    /// Default truncation `round(q^{11/21})`.
    pub fn default_polya_z(&self) -> f64 {
        (self.q as f64).powf(11.0 / 21.0).round()
    }

    pub fn theta_vector(&self, ell: u64, k: usize) -> Result<ThetaVector> {
        let primes = first_primes(k);
        if let Some(&p) = primes.last() {
            if p >= self.q {
                return domain(format!("prime {p} not below modulus {}", self.q));
            }
        }
        let l = self.order();
        let numerators = primes
            .iter()
            .map(|&p| {
                let r = self.phase(ell, p as i64).expect("p < q");
                if 2 * r > l {
                    r as i64 - l as i64
                } else {
                    r as i64
                }
            })
            .collect();
        Ok(ThetaVector { denominator: l, numerators })
    }
}

/// Max of `|values[i]|` with ties (within [`TIE_TOLERANCE`] and [`TIE_FLOOR`])
/// resolved to the smallest label.
pub fn select_max(ells: &[u64], values: &[Complex64]) -> SweepMax {
    let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cut = max_abs * (1.0 - TIE_TOLERANCE) - TIE_FLOOR;
    let argmax_ell = ells
        .iter()
        .zip(values)
        .filter(|(_, v)| v.norm() >= cut)
        .map(|(&l, _)| l)
        .min()
        .expect("nonempty selection");
    SweepMax { max_abs, argmax_ell }
}
