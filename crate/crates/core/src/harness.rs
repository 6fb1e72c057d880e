//! The smooth/rough split of the truncated Pólya expansion, the `A_δ`
//! membership test, desk-scale probes of the two lower bounds and of the
//! rough-sum conjecture, and JSON-lines experiment records.
//!
//! With `y = log q`, `α = y^{−B}` and `z = round(q^{11/21})`, the smooth part
//! `Σ_{n<=z, P(n)<=y} χ(n)(1 − e(σαn))/n` is regrouped as
//! `S1 + S2^σ + S3^σ` over half-open ranges with breakpoints
//! `y^B/log y`, `y^B`, `y^B (log y)^5`, `y^{log log y}` and `z`.

use crate::characters::{CharacterGroup, Parity, SweepPath};
use crate::dickman::RhoEvaluator;
use crate::error::{capacity, domain, Error, Result};
use crate::expsum::{self, Sign};
use crate::numeric::{e, ComplexSum, EULER_GAMMA};
use crate::parse::ratio_str;
use crate::primes::primes_up_to;
use crate::smooth::SmoothSieve;
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

/// Largest enumeration range for the direct sums.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// Above this many characters the naive sweep is compared on a sample.
pub const FULL_CHECK_ORDER: u64 = 20_000;

/// Sample size for the naive comparison beyond [`FULL_CHECK_ORDER`].
pub const SAMPLED_CHECKS: usize = 256;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn sigma(sign: Sign) -> f64 {
    sign.factor()
}

fn check_nonprincipal(group: &CharacterGroup, ell: u64) -> Result<u64> {
    let ell = ell % group.order();
    if ell == 0 {
        return domain("the principal character is excluded");
    }
    Ok(ell)
}

fn harness_y(q: u64) -> Result<f64> {
    let y = (q as f64).ln();
    if y.ln() <= 0.0 {
        return domain(format!("q = {q} too small: need log log q > 0"));
    }
    Ok(y)
}

fn polya_z(q: u64) -> u64 {
    (q as f64).powf(11.0 / 21.0).round() as u64
}

/// `δ = log log y / √(log y)`.
pub fn default_delta(y: f64) -> f64 {
    y.ln().ln() / y.ln().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ADeltaTest {
    pub lhs: f64,
    pub threshold: f64,
    pub member: bool,
}

/// `|Σ_{1<=|n|<=z, P(n)>y} χ(n)(1 − e(−αn))/n|` against `e^γ δ`, with
/// `y = log q`.
pub fn a_delta_test(group: &CharacterGroup, ell: u64, delta: f64, alpha: f64, z: u64) -> Result<ADeltaTest> {
    let sieve = sieve_for(z)?;
    a_delta_with(group, &sieve, ell, delta, alpha, z)
}

fn sieve_for(z: u64) -> Result<SmoothSieve> {
    if z > ENUMERATION_CAP {
        return capacity(format!("z = {z} exceeds {ENUMERATION_CAP}"));
    }
    SmoothSieve::new(z.max(1))
}

fn a_delta_with(group: &CharacterGroup, sieve: &SmoothSieve, ell: u64, delta: f64, alpha: f64, z: u64) -> Result<ADeltaTest> {
    let ell = check_nonprincipal(group, ell)?;
    if !(delta > 0.0 && alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("need delta > 0 and alpha in (0,1], got {delta}, {alpha}"));
    }
    let y = (group.modulus() as f64).ln();
    let parity = group.parity_sign(ell);
    let mut acc = ComplexSum::new();
    for n in 1..=z {
        if sieve.is_smooth(n, y) {
            continue;
        }
        let nf = n as f64;
        // n and −n together, χ(−n) = χ(−1)χ(n)
        let pair = (ONE - e(-alpha * nf)) - parity * (ONE - e(alpha * nf));
        acc.add(group.char_value(ell, n as i64) * pair / nf);
    }
    let lhs = acc.value().norm();
    let threshold = EULER_GAMMA.exp() * delta;
    Ok(ADeltaTest { lhs, threshold, member: lhs <= threshold })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ADeltaSurvey {
    pub q: u64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub z: u64,
    pub delta: f64,
    pub threshold: f64,
    pub characters: u64,
    pub members: u64,
    pub nonmember_fraction: f64,
}

/// [`a_delta_test`] over every nonprincipal character.
pub fn a_delta_survey(group: &CharacterGroup, b: f64, delta: Option<f64>) -> Result<ADeltaSurvey> {
    let q = group.modulus();
    let y = harness_y(q)?;
    let alpha = y.powf(-b);
    let z = polya_z(q);
    let delta = delta.unwrap_or_else(|| default_delta(y));
    let sieve = sieve_for(z)?;
    let tests: Vec<ADeltaTest> = (1..group.order())
        .into_par_iter()
        .map(|ell| a_delta_with(group, &sieve, ell, delta, alpha, z))
        .collect::<Result<_>>()?;
    let members = tests.iter().filter(|t| t.member).count() as u64;
    let characters = tests.len() as u64;
    Ok(ADeltaSurvey {
        q,
        b,
        alpha,
        z,
        delta,
        threshold: EULER_GAMMA.exp() * delta,
        characters,
        members,
        nonmember_fraction: (characters - members) as f64 / characters.max(1) as f64,
    })
}

/// The pieces of the split for one sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedParts {
    pub s2: Complex64,
    pub s3: Complex64,
    /// `Σ_{n<=z, P(n)<=y} χ(n)(1 − e(σαn))/n`, summed directly.
    pub full_sum: Complex64,
    /// `Σ_{n<=z, P(n)>y} χ(n)(1 − e(σαn))/n`.
    pub rough: Complex64,
    /// `|S1 + S2 + S3 − full_sum|`
    pub partition_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub q: u64,
    pub ell: u64,
    #[serde(rename = "B")]
    pub b: f64,
    pub y: f64,
    pub alpha: f64,
    pub z: u64,
    /// Integer starts of the ranges: `y^B/log y`, `y^B`, `y^B(log y)^5`,
    /// `y^{log log y}`, each clamped to `z + 1`.
    pub breakpoints: [u64; 4],
    pub s1: Complex64,
    pub plus: SignedParts,
    pub minus: SignedParts,
    /// `Σ_{n<=αq} χ̄(n)`
    pub polya_lhs: Complex64,
    /// `(τ(χ̄)/2πi)((S1+S2⁻+S3⁻+R⁻) − χ(−1)(S1+S2⁺+S3⁺+R⁺))`
    pub polya_regrouped: Complex64,
    /// The same expansion summed over `1 <= |n| <= z` without regrouping.
    pub polya_direct: Complex64,
    pub regroup_error: f64,
    pub polya_error: f64,
    /// `q log q / z`, the size of the truncation term.
    pub truncation_scale: f64,
    /// `log y ∫_B^∞ ρ`
    pub main_term: f64,
    /// `|S1| / main_term`
    pub ratio: f64,
}

impl DecompositionReport {
    pub fn parts(&self, sign: Sign) -> &SignedParts {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    pub fn max_partition_error(&self) -> f64 {
        self.plus.partition_error.max(self.minus.partition_error)
    }
}

fn start_at(t: f64, floor: u64, z: u64) -> u64 {
    let s = if t <= 1.0 { 1 } else { t.ceil() as u64 };
    s.max(floor).min(z + 1)
}

pub fn decompose(group: &CharacterGroup, ell: u64, b: f64) -> Result<DecompositionReport> {
    let q = group.modulus();
    let ell = check_nonprincipal(group, ell)?;
    let y = harness_y(q)?;
    let z = polya_z(q);
    if !(b >= 0.0 && b.is_finite()) {
        return domain(format!("B must be finite and >= 0, got {b}"));
    }
    let yb = y.powf(b);
    if yb > z as f64 {
        return domain(format!("y^B = {yb} exceeds z = {z}"));
    }
    let alpha = 1.0 / yb;
    let ly = y.ln();
    let a1 = start_at(yb / ly, 1, z);
    let a2 = start_at(yb, a1, z);
    let a3 = start_at(yb * ly.powi(5), a2, z);
    let a4 = start_at(y.powf(ly.ln()), a3, z);

    let sieve = sieve_for(z)?;
    let chi: Vec<Complex64> = (0..=z).map(|n| group.char_value(ell, n as i64)).collect();
    let smooth = |n: u64| sieve.is_smooth(n, y);

    // Σ_{P(n)<=y} χ(n)/n as a finite Euler product
    let euler = primes_up_to(y.floor() as u64)
        .iter()
        .fold(ONE, |acc, &p| acc / (ONE - chi[(p % q) as usize] / p as f64));
    let head_below = |end: u64| {
        let mut acc = ComplexSum::new();
        for n in 1..end {
            if smooth(n) {
                acc.add(chi[n as usize] / n as f64);
            }
        }
        acc.value()
    };
    let s1 = euler - head_below(a2);
    let s3_beyond_z = -(euler - head_below(z + 1));

    let ranged = |lo: u64, hi: u64, f: &dyn Fn(u64) -> Complex64| {
        let mut acc = ComplexSum::new();
        for n in lo..hi {
            if smooth(n) {
                acc.add(chi[n as usize] * f(n) / n as f64);
            }
        }
        acc.value()
    };
    let signed = |sign: Sign| {
        let beta = sigma(sign) * alpha;
        let one_minus = |n: u64| ONE - e(beta * n as f64);
        let phase = |n: u64| e(beta * n as f64);
        let s2 = ranged(a1, a2, &one_minus) - ranged(a2, a3, &phase);
        let s3 = ranged(1, a1, &one_minus) - ranged(a3, a4, &phase) - ranged(a4, z + 1, &phase) + s3_beyond_z;
        let full_sum = ranged(1, z + 1, &one_minus);
        let mut rough = ComplexSum::new();
        for n in 1..=z {
            if !smooth(n) {
                rough.add(chi[n as usize] * one_minus(n) / n as f64);
            }
        }
        SignedParts { s2, s3, full_sum, rough: rough.value(), partition_error: (s1 + s2 + s3 - full_sum).norm() }
    };
    let plus = signed(Sign::Plus);
    let minus = signed(Sign::Minus);

    let conj_ell = group.order() - ell;
    let tau_bar = group.gauss_sum(conj_ell)?;
    let parity = group.parity_sign(ell);
    let minus_total = s1 + minus.s2 + minus.s3 + minus.rough;
    let plus_total = s1 + plus.s2 + plus.s3 + plus.rough;
    let polya_regrouped = tau_bar / Complex64::new(0.0, 2.0 * PI) * (minus_total - parity * plus_total);
    let polya_direct = group.polya_rhs(conj_ell, alpha, z as f64)?;
    let polya_lhs = group.partial_sum(ell, alpha * q as f64).conj();

    let main_term = ly * RhoEvaluator::shared().rho_tail_integral(b)?;
    Ok(DecompositionReport {
        q,
        ell,
        b,
        y,
        alpha,
        z,
        breakpoints: [a1, a2, a3, a4],
        s1,
        plus,
        minus,
        polya_lhs,
        polya_regrouped,
        polya_direct,
        regroup_error: (polya_regrouped - polya_direct).norm(),
        polya_error: (polya_lhs - polya_regrouped).norm(),
        truncation_scale: q as f64 * (q as f64).ln() / z as f64,
        main_term,
        ratio: s1.norm() / main_term,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremProbe {
    pub q: u64,
    #[serde(rename = "B")]
    pub b: f64,
    pub parity: Parity,
    pub x: f64,
    pub measured: f64,
    pub argmax_ell: u64,
    pub predicted_main: f64,
    pub ratio: f64,
    /// Characters on which the fast sweep was recomputed naively.
    pub paths_checked: usize,
    pub path_max_diff: f64,
}

/// Every admitted label when there are few, otherwise an evenly strided
/// sample plus the argmax.
fn check_labels(order: u64, parity: Parity, argmax: u64) -> Vec<u64> {
    let admitted = |l: &u64| *l != 0 && parity.admits(*l);
    if order <= FULL_CHECK_ORDER {
        return (1..order).filter(admitted).collect();
    }
    let stride = (order / SAMPLED_CHECKS as u64).max(1);
    // each stride point and its neighbour, so both parities are represented
    let mut v: Vec<u64> = (0..SAMPLED_CHECKS as u64)
        .flat_map(|i| [1 + i * stride, 2 + i * stride])
        .filter(|l| *l < order && admitted(l))
        .collect();
    v.push(argmax);
    v.sort_unstable();
    v.dedup();
    v
}

/// Largest `|Σ_{n<=q/(log q)^B} χ(n)|` over nonprincipal characters of the
/// given parity, against `(1/π)∫_B^∞ρ · √q log log q` (odd) or `ρ(B)√q/2`
/// (even).
pub fn theorem_probe(q: u64, b: f64, parity: Parity) -> Result<TheoremProbe> {
    let group = CharacterGroup::new(q)?;
    theorem_probe_in(&group, b, parity)
}

pub fn theorem_probe_in(group: &CharacterGroup, b: f64, parity: Parity) -> Result<TheoremProbe> {
    let q = group.modulus();
    if !(b >= 0.0 && b.is_finite()) {
        return domain(format!("B must be finite and >= 0, got {b}"));
    }
    let predicted_main = match parity {
        Parity::Odd => {
            RhoEvaluator::shared().rho_tail_integral(b)? / PI * (q as f64).sqrt() * (q as f64).ln().ln()
        }
        Parity::Even => {
            if b < 1.0 {
                return domain(format!("the even-character bound needs B >= 1, got {b}"));
            }
            RhoEvaluator::shared().rho(b)? / 2.0 * (q as f64).sqrt()
        }
        Parity::Any => return domain("theorem probe needs parity odd or even"),
    };
    let x = q as f64 / (q as f64).ln().powf(b);
    if x < 1.0 {
        return domain(format!("x = {x} < 1 leaves an empty sum"));
    }
    let fast = group.sweep_sums_fast(x)?;
    let best = group.sweep_max(x, parity, true, SweepPath::Fast)?;
    let labels = check_labels(group.order(), parity, best.argmax_ell);
    let naive = group.sweep_sums_naive(x, &labels)?;
    let path_max_diff = labels
        .iter()
        .zip(&naive)
        .map(|(&l, v)| (fast[l as usize] - v).norm())
        .fold(0.0, f64::max);
    Ok(TheoremProbe {
        q,
        b,
        parity,
        x,
        measured: best.max_abs,
        argmax_ell: best.argmax_ell,
        predicted_main,
        ratio: best.max_abs / predicted_main,
        paths_checked: labels.len(),
        path_max_diff,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjecturePoint {
    pub alpha: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureProbe {
    pub q: u64,
    pub ell: u64,
    pub x: u64,
    pub y: f64,
    pub max: f64,
    pub points: Vec<ConjecturePoint>,
}

/// `|Σ_{n<=x, P(n)>y} χ(n) e(αn)/n|` for each `α` in the grid.
pub fn conjecture_probe(group: &CharacterGroup, ell: u64, x: u64, y: f64, alpha_grid: &[f64]) -> Result<ConjectureProbe> {
    if x > ENUMERATION_CAP {
        return capacity(format!("x = {x} exceeds {ENUMERATION_CAP}"));
    }
    if !(y >= 1.0 && y.is_finite()) {
        return domain(format!("y must be finite and >= 1, got {y}"));
    }
    if let Some(a) = alpha_grid.iter().find(|a| !a.is_finite()) {
        return domain(format!("non-finite alpha {a}"));
    }
    let terms: Vec<(f64, Complex64)> = if (x as f64) <= y || alpha_grid.is_empty() {
        Vec::new()
    } else {
        let sieve = SmoothSieve::new(x)?;
        (1..=x)
            .filter(|&n| !sieve.is_smooth(n, y))
            .map(|n| (n as f64, group.char_value(ell, n as i64) / n as f64))
            .filter(|(_, c)| c.norm() > 0.0)
            .collect()
    };
    let points: Vec<ConjecturePoint> = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let mut acc = ComplexSum::new();
            for &(n, c) in &terms {
                acc.add(c * e((alpha * n).fract()));
            }
            ConjecturePoint { alpha, value: acc.value().norm() }
        })
        .collect();
    let max = points.iter().map(|p| p.value).fold(0.0, f64::max);
    Ok(ConjectureProbe { q: group.modulus(), ell, x, y, max, points })
}

/// `α_j = j/size` for `j = 0..size`.
pub fn uniform_grid(size: usize) -> Vec<f64> {
    (0..size).map(|j| j as f64 / size as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub q: u64,
    #[serde(with = "ratio_str")]
    pub fraction: Ratio<u64>,
    pub x: f64,
    pub parity: Parity,
    pub max_abs: f64,
    pub argmax_ell: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub alpha: f64,
    pub sign: Sign,
    pub value: Complex64,
    pub target: Complex64,
    pub normalized_residual: f64,
}

/// One probe family in a configuration; list-valued fields expand into one
/// work item per combination, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Probe {
    Decompose {
        q: Vec<u64>,
        ell: Vec<u64>,
        #[serde(rename = "B")]
        b: Vec<f64>,
    },
    Theorem {
        q: Vec<u64>,
        #[serde(rename = "B")]
        b: Vec<f64>,
        parity: Parity,
    },
    Sweep {
        q: Vec<u64>,
        #[serde(with = "ratio_str")]
        fraction: Ratio<u64>,
        parity: Parity,
    },
    ADelta {
        q: Vec<u64>,
        #[serde(rename = "B")]
        b: f64,
        #[serde(default)]
        delta: Option<f64>,
    },
    Conjecture {
        q: u64,
        ell: u64,
        x: u64,
        #[serde(default)]
        y: Option<f64>,
        grid: usize,
    },
    Constant {
        alpha: Vec<f64>,
        sign: Sign,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output: PathBuf,
    #[serde(default)]
    pub probes: Vec<Probe>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 of the canonical JSON of the probe list; the output path is
    /// not part of the hash.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.probes).expect("probes serialise");
        hex::encode(Sha256::digest(canonical))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Decompose(DecompositionReport),
    Theorem(TheoremProbe),
    Sweep(SweepReport),
    ADelta(ADeltaSurvey),
    Conjecture(ConjectureProbe),
    Constant(ConstantReport),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Decompose(_) => "decompose",
            Payload::Theorem(_) => "theorem",
            Payload::Sweep(_) => "sweep",
            Payload::ADelta(_) => "a_delta",
            Payload::Conjecture(_) => "conjecture",
            Payload::Constant(_) => "constant",
        }
    }
}

/// One line of an experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RecordLine {
    Header { config_hash: String, created_unix: u64, items: usize },
    Entry { config_hash: String, seq: usize, payload: Payload },
    End { config_hash: String, records: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub config_hash: String,
    pub created_unix: u64,
    pub entries: Vec<Payload>,
    /// The record was already complete in the output file.
    pub reused: bool,
}

enum WorkItem {
    Decompose(u64, u64, f64),
    Theorem(u64, f64, Parity),
    Sweep(u64, Ratio<u64>, Parity),
    ADelta(u64, f64, Option<f64>),
    Conjecture(u64, u64, u64, Option<f64>, usize),
    Constant(f64, Sign),
}

fn expand(probes: &[Probe]) -> Vec<WorkItem> {
    let mut items = Vec::new();
    for p in probes {
        match p {
            Probe::Decompose { q, ell, b } => {
                for &q in q {
                    for &l in ell {
                        for &b in b {
                            items.push(WorkItem::Decompose(q, l, b));
                        }
                    }
                }
            }
            Probe::Theorem { q, b, parity } => {
                for &q in q {
                    for &b in b {
                        items.push(WorkItem::Theorem(q, b, *parity));
                    }
                }
            }
            Probe::Sweep { q, fraction, parity } => items.extend(q.iter().map(|&q| WorkItem::Sweep(q, *fraction, *parity))),
            Probe::ADelta { q, b, delta } => items.extend(q.iter().map(|&q| WorkItem::ADelta(q, *b, *delta))),
            Probe::Conjecture { q, ell, x, y, grid } => items.push(WorkItem::Conjecture(*q, *ell, *x, *y, *grid)),
            Probe::Constant { alpha, sign } => items.extend(alpha.iter().map(|&a| WorkItem::Constant(a, *sign))),
        }
    }
    items
}

fn item_modulus(item: &WorkItem) -> Option<u64> {
    match *item {
        WorkItem::Decompose(q, ..)
        | WorkItem::Theorem(q, ..)
        | WorkItem::Sweep(q, ..)
        | WorkItem::ADelta(q, ..)
        | WorkItem::Conjecture(q, ..) => Some(q),
        WorkItem::Constant(..) => None,
    }
}

fn run_item(item: &WorkItem, groups: &BTreeMap<u64, CharacterGroup>) -> Result<Payload> {
    let group = |q: u64| groups.get(&q).expect("group built for every modulus");
    Ok(match *item {
        WorkItem::Decompose(q, ell, b) => Payload::Decompose(decompose(group(q), ell, b)?),
        WorkItem::Theorem(q, b, parity) => Payload::Theorem(theorem_probe_in(group(q), b, parity)?),
        WorkItem::Sweep(q, fraction, parity) => {
            let g = group(q);
            let x = q as f64 * *fraction.numer() as f64 / *fraction.denom() as f64;
            let m = g.sweep_max(x, parity, true, SweepPath::Fast)?;
            Payload::Sweep(SweepReport { q, fraction, x, parity, max_abs: m.max_abs, argmax_ell: m.argmax_ell })
        }
        WorkItem::ADelta(q, b, delta) => Payload::ADelta(a_delta_survey(group(q), b, delta)?),
        WorkItem::Conjecture(q, ell, x, y, grid) => {
            let y = y.unwrap_or_else(|| (q as f64).ln());
            Payload::Conjecture(conjecture_probe(group(q), ell, x, y, &uniform_grid(grid))?)
        }
        WorkItem::Constant(alpha, sign) => {
            let r = expsum::main_constant_residual(alpha, sign)?;
            Payload::Constant(ConstantReport {
                alpha,
                sign,
                value: r.value,
                target: r.target,
                normalized_residual: r.normalized_residual,
            })
        }
    })
}

/// Computes every probe in the configuration.
pub fn compute_payloads(config: &ExperimentConfig) -> Result<Vec<Payload>> {
    let items = expand(&config.probes);
    let mut groups = BTreeMap::new();
    for q in items.iter().filter_map(item_modulus) {
        if let std::collections::btree_map::Entry::Vacant(v) = groups.entry(q) {
            v.insert(CharacterGroup::new(q)?);
        }
    }
    items.par_iter().map(|item| run_item(item, &groups)).collect()
}

/// Reads every line of an experiment file.
pub fn read_records(path: &Path) -> Result<Vec<RecordLine>> {
    let file = File::open(path).map_err(|source| Error::Io { written: 0, source })?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| Error::Io { written: 0, source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// The last complete run with this hash, if any.
fn find_complete(lines: &[RecordLine], hash: &str) -> Option<ExperimentRecord> {
    let mut current: Option<(u64, Vec<Payload>)> = None;
    let mut found = None;
    for line in lines {
        match line {
            RecordLine::Header { config_hash, created_unix, .. } if config_hash == hash => {
                current = Some((*created_unix, Vec::new()));
            }
            RecordLine::Entry { config_hash, payload, .. } if config_hash == hash => {
                if let Some((_, entries)) = current.as_mut() {
                    entries.push(payload.clone());
                }
            }
            RecordLine::End { config_hash, records } if config_hash == hash => {
                if let Some((created_unix, entries)) = current.take() {
                    if entries.len() == *records {
                        found = Some(ExperimentRecord { config_hash: hash.to_owned(), created_unix, entries, reused: true });
                    }
                }
            }
            _ => {}
        }
    }
    found
}

/// Runs the configuration and appends a header, one entry per work item and
/// an end marker to the output file. A complete run with the same hash
/// already in the file is returned instead of recomputed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    let hash = config.hash();
    if config.output.exists() {
        if let Some(found) = find_complete(&read_records(&config.output)?, &hash) {
            return Ok(found);
        }
    }
    let entries = compute_payloads(config)?;
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut lines = Vec::with_capacity(entries.len() + 2);
    lines.push(RecordLine::Header { config_hash: hash.clone(), created_unix, items: entries.len() });
    lines.extend(entries.iter().enumerate().map(|(seq, p)| RecordLine::Entry {
        config_hash: hash.clone(),
        seq,
        payload: p.clone(),
    }));
    lines.push(RecordLine::End { config_hash: hash.clone(), records: entries.len() });
    append_lines(&config.output, &lines)?;
    Ok(ExperimentRecord { config_hash: hash, created_unix, entries, reused: false })
}

/// Appends one JSON object per line, flushing after each so that a failure
/// leaves the lines already written intact.
fn append_lines(path: &Path, lines: &[RecordLine]) -> Result<()> {
    let io = |written: usize| move |source| Error::Io { written, source };
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io(0))?;
    for (i, line) in lines.iter().enumerate() {
        let mut text = serde_json::to_string(line)?;
        text.push('\n');
        file.write_all(text.as_bytes()).map_err(io(i))?;
        file.flush().map_err(io(i))?;
    }
    Ok(())
}

fn csv_table<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct DecomposeRow {
    q: u64,
    ell: u64,
    #[serde(rename = "B")]
    b: f64,
    abs_s1: f64,
    main_term: f64,
    ratio: f64,
    partition_error: f64,
    regroup_error: f64,
    polya_error: f64,
}

#[derive(Serialize)]
struct TheoremRow {
    q: u64,
    #[serde(rename = "B")]
    b: f64,
    parity: Parity,
    x: f64,
    measured: f64,
    predicted_main: f64,
    ratio: f64,
    paths_checked: usize,
    path_max_diff: f64,
}

#[derive(Serialize)]
struct ConjectureRow {
    q: u64,
    ell: u64,
    x: u64,
    y: f64,
    grid: usize,
    max: f64,
}

#[derive(Serialize)]
struct ConstantRow {
    alpha: f64,
    sign: Sign,
    residual: f64,
}

/// One CSV table per payload kind present, keyed by kind.
pub fn report(entries: &[Payload]) -> Result<BTreeMap<&'static str, String>> {
    let mut decompose = Vec::new();
    let mut theorem = Vec::new();
    let mut sweep = Vec::new();
    let mut a_delta = Vec::new();
    let mut conjecture = Vec::new();
    let mut constant = Vec::new();
    for p in entries {
        match p {
            Payload::Decompose(d) => decompose.push(DecomposeRow {
                q: d.q,
                ell: d.ell,
                b: d.b,
                abs_s1: d.s1.norm(),
                main_term: d.main_term,
                ratio: d.ratio,
                partition_error: d.max_partition_error(),
                regroup_error: d.regroup_error,
                polya_error: d.polya_error,
            }),
            Payload::Theorem(t) => theorem.push(TheoremRow {
                q: t.q,
                b: t.b,
                parity: t.parity,
                x: t.x,
                measured: t.measured,
                predicted_main: t.predicted_main,
                ratio: t.ratio,
                paths_checked: t.paths_checked,
                path_max_diff: t.path_max_diff,
            }),
            Payload::Sweep(s) => sweep.push(s.clone()),
            Payload::ADelta(a) => a_delta.push(a.clone()),
            Payload::Conjecture(c) => conjecture.push(ConjectureRow {
                q: c.q,
                ell: c.ell,
                x: c.x,
                y: c.y,
                grid: c.points.len(),
                max: c.max,
            }),
            Payload::Constant(c) => constant.push(ConstantRow { alpha: c.alpha, sign: c.sign, residual: c.normalized_residual }),
        }
    }
    let mut out = BTreeMap::new();
    let mut put = |kind: &'static str, table: String| {
        if table.lines().count() > 1 {
            out.insert(kind, table);
        }
    };
    put("decompose", csv_table(&decompose)?);
    put("theorem", csv_table(&theorem)?);
    put("sweep", csv_table(&sweep)?);
    put("a_delta", csv_table(&a_delta)?);
    put("conjecture", csv_table(&conjecture)?);
    put("constant", csv_table(&constant)?);
    Ok(out)
}

/// The entries of the last complete run in a file.
pub fn load_last_run(path: &Path) -> Result<ExperimentRecord> {
    let lines = read_records(path)?;
    let hash = lines
        .iter()
        .rev()
        .find_map(|l| match l {
            RecordLine::End { config_hash, .. } => Some(config_hash.clone()),
            _ => None,
        })
        .ok_or_else(|| Error::Validation(format!("no complete run in {}", path.display())))?;
    find_complete(&lines, &hash).ok_or_else(|| Error::Validation(format!("run {hash} is incomplete")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_exact_small() {
        let g = CharacterGroup::new(1009).unwrap();
        for &(ell, b) in &[(1, 0.0), (3, 0.5), (10, 1.0), (501, 1.4)] {
            let d = decompose(&g, ell, b).unwrap();
            assert!(d.max_partition_error() < 1e-9, "{ell} {b}: {}", d.max_partition_error());
            assert!(d.regroup_error < 1e-9, "{}", d.regroup_error);
        }
    }

    #[test]
    fn decompose_domain() {
        let g = CharacterGroup::new(1009).unwrap();
        assert!(decompose(&g, 0, 1.0).is_err());
        assert!(decompose(&g, 1, -0.5).is_err());
        assert!(decompose(&g, 1, 5.0).is_err());
    }

    #[test]
    fn theorem_probe_domain() {
        assert!(theorem_probe(1009, 0.5, Parity::Even).is_err());
        assert!(theorem_probe(101, 20.0, Parity::Odd).is_err());
        let t = theorem_probe(1009, 0.5, Parity::Odd).unwrap();
        assert!(t.ratio.is_finite() && t.path_max_diff < 1e-8);
    }

    #[test]
    fn conjecture_trivial_cases() {
        let g = CharacterGroup::new(101).unwrap();
        assert_eq!(conjecture_probe(&g, 3, 1000, 4.6, &[]).unwrap().max, 0.0);
        assert_eq!(conjecture_probe(&g, 3, 4, 4.6, &[0.1, 0.2]).unwrap().max, 0.0);
    }

    #[test]
    fn a_delta_large_delta_member() {
        let g = CharacterGroup::new(101).unwrap();
        let z = polya_z(101);
        let t = a_delta_test(&g, 5, 1e6, 0.5, z).unwrap();
        assert!(t.member);
        assert!(a_delta_test(&g, 0, 1.0, 0.5, z).is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{"output":"x.jsonl","probes":[
            {"kind":"decompose","q":[101],"ell":[1,2],"B":[0.5]},
            {"kind":"sweep","q":[101],"fraction":"1/2","parity":"odd"},
            {"kind":"constant","alpha":[0.01],"sign":"minus"}]}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.probes.len(), 3);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c.hash(), again.hash());
        assert!(ExperimentConfig::from_json(r#"{"output":"x","probes":[{"kind":"nope"}]}"#).is_err());
    }
}
