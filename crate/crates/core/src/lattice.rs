//! Multiples of a rational torus point `u = (u_1, …, u_k)/M`: the sets
//! `C_{n±}(η)` of multipliers `ℓ` whose multiple `ℓu` is close to the origin,
//! integer relations `n (r·u) ≡ 0 (mod 1)`, and the smooth counting function
//! `S(N)`.
//!
//! Every membership and residue test runs in integer arithmetic. The only
//! floating-point quantity is `S(N)` itself.

use crate::error::{capacity, domain, Error, Result};
use crate::numeric::integrate;
use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::OnceLock;

/// Largest `M·k` for which sets are materialised.
pub const ENUMERATION_CAP: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeInstance {
    m: u64,
    numerators: Vec<u64>,
}

impl LatticeInstance {
    /// Builds `u = numerators / m`, reducing to the exact order: a common
    /// factor `d = gcd(u_1, …, u_k, m)` is divided out.
    pub fn new(m: u64, numerators: &[u64]) -> Result<Self> {
        if m == 0 {
            return domain("order must be positive");
        }
        if numerators.is_empty() {
            return domain("dimension must be at least 1");
        }
        let nums: Vec<u64> = numerators.iter().map(|&u| u % m).collect();
        let d = nums.iter().fold(m, |g, &u| g.gcd(&u));
        Ok(Self { m: m / d, numerators: nums.iter().map(|&u| u / d).collect() })
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    /// Centred numerator `c ∈ (−M/2, M/2]` of `ℓ u_j mod 1`.
    #[inline]
    fn centered(&self, ell: u64, j: usize) -> i64 {
        let r = (ell as u128 * self.numerators[j] as u128 % self.m as u128) as u64;
        if 2 * r > self.m {
            r as i64 - self.m as i64
        } else {
            r as i64
        }
    }

    /// `max_j |c_j|` for the multiple `ℓu`, i.e. `M · max_j dist(ℓ u_j)`.
    #[inline]
    fn sup_numerator(&self, ell: u64) -> u64 {
        (0..self.dim()).map(|j| self.centered(ell, j).unsigned_abs()).max().unwrap_or(0)
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.m.saturating_mul(self.dim() as u64) > ENUMERATION_CAP {
            return capacity(format!("M·k = {}·{} above enumeration cap", self.m, self.dim()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidueSign {
    /// `ℓ ≡ 0 (mod n)`
    Plus,
    /// `ℓ ≢ 0 (mod n)`
    Minus,
}

impl ResidueSign {
    #[inline]
    fn admits(self, ell: u64, n: u64) -> bool {
        (ell % n == 0) == (self == ResidueSign::Plus)
    }
}

impl std::str::FromStr for ResidueSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(ResidueSign::Plus),
            "minus" | "-" => Ok(ResidueSign::Minus),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplierSet {
    #[serde(with = "crate::parse::ratio_str")]
    pub eta: Ratio<u64>,
    pub n: u64,
    pub sign: ResidueSign,
    pub members: Vec<u64>,
}

#[inline]
fn within(sup: u64, eta: Ratio<u64>, m: u64) -> bool {
    sup as u128 * *eta.denom() as u128 <= *eta.numer() as u128 * m as u128
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return domain("residue modulus n must be positive");
    }
    Ok(())
}

/// `C_{n±}(η) = {ℓ ∈ [0, M−1] : residue condition, max_j dist(ℓ u_j) <= η}`.
/// Thresholds at or above 1/2 admit the whole residue class.
pub fn enumerate_small_multiples(inst: &LatticeInstance, n: u64, eta: Ratio<u64>, sign: ResidueSign) -> Result<MultiplierSet> {
    check_n(n)?;
    inst.check_enumerable()?;
    let members = (0..inst.m)
        .into_par_iter()
        .filter(|&l| sign.admits(l, n) && within(inst.sup_numerator(l), eta, inst.m))
        .collect();
    Ok(MultiplierSet { eta, n, sign, members })
}

/// `#C_{n±}(η)` without materialising the set; no enumeration cap.
pub fn count_small_multiples(inst: &LatticeInstance, n: u64, eta: Ratio<u64>, sign: ResidueSign) -> Result<u64> {
    check_n(n)?;
    Ok((0..inst.m)
        .into_par_iter()
        .filter(|&l| sign.admits(l, n) && within(inst.sup_numerator(l), eta, inst.m))
        .count() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeReport {
    pub count: u64,
    /// `M / (n N^k)`
    pub bound: f64,
    /// `count >= bound`, decided in integers.
    pub holds: bool,
}

/// Counts `C_{n+}(1/N)` against the pigeonhole bound `M/(n N^k)`, for
/// `n N^k <= M`.
pub fn pigeonhole_witness(inst: &LatticeInstance, n: u64, big_n: u64) -> Result<PigeonholeReport> {
    check_n(n)?;
    if big_n == 0 {
        return domain("N must be positive");
    }
    let nk = (big_n as u128).checked_pow(inst.dim() as u32).unwrap_or(u128::MAX);
    if (n as u128).saturating_mul(nk) > inst.m as u128 {
        return domain(format!("need n <= M/N^k (n={n}, N={big_n}, M={}, k={})", inst.m, inst.dim()));
    }
    let count = count_small_multiples(inst, n, Ratio::new(1, big_n), ResidueSign::Plus)?;
    Ok(PigeonholeReport {
        count,
        bound: inst.m as f64 / (n as f64 * nk as f64),
        holds: count as u128 * n as u128 * nk >= inst.m as u128,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftReport {
    /// The multiplier `r ∈ C_{n−}(ν)` used for every shift.
    pub witness: u64,
    pub plus_count: u64,
    pub minus_count: u64,
    /// Every image `r − s` landed in `C_{n−}(η+ν)` and the images are distinct.
    pub injective_into_minus: bool,
}

/// Maps `s ∈ C_{n+}(η)` to `r − s (mod M)` for the least `r ∈ C_{n−}(ν)` and
/// verifies the image lies in `C_{n−}(η+ν)`. Requires `n | M` so that residues
/// mod `n` are well defined mod `M`.
pub fn shift_construction(inst: &LatticeInstance, n: u64, eta: Ratio<u64>, nu: Ratio<u64>) -> Result<ShiftReport> {
    check_n(n)?;
    if inst.m % n != 0 {
        return domain(format!("shift needs n | M (n={n}, M={})", inst.m));
    }
    let witnesses = enumerate_small_multiples(inst, n, nu, ResidueSign::Minus)?;
    let Some(&witness) = witnesses.members.first() else {
        return Err(Error::Precondition("C_{n-}(nu) is empty".into()));
    };
    let plus = enumerate_small_multiples(inst, n, eta, ResidueSign::Plus)?;
    let minus = enumerate_small_multiples(inst, n, eta + nu, ResidueSign::Minus)?;
    let mut images: Vec<u64> = plus.members.iter().map(|&s| (witness + inst.m - s) % inst.m).collect();
    let all_in = images.iter().all(|l| minus.members.binary_search(l).is_ok());
    images.sort_unstable();
    images.dedup();
    Ok(ShiftReport {
        witness,
        plus_count: plus.members.len() as u64,
        minus_count: minus.members.len() as u64,
        injective_into_minus: all_in && images.len() == plus.members.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationVector {
    pub r: Vec<i64>,
    pub n: u64,
    /// `n (r·u) mod 1`
    #[serde(with = "crate::parse::ratio_str")]
    pub residue: Ratio<u64>,
}

impl RelationVector {
    pub fn new(inst: &LatticeInstance, r: Vec<i64>, n: u64) -> Result<Self> {
        if r.len() != inst.dim() {
            return domain("relation length differs from instance dimension");
        }
        let m = inst.m as i128;
        let dot: i128 = r.iter().zip(&inst.numerators).map(|(&a, &b)| a as i128 * b as i128).sum();
        let num = (dot * n as i128).rem_euclid(m) as u64;
        Ok(Self { r, n, residue: Ratio::new(num, inst.m) })
    }

    pub fn sup_norm(&self) -> u64 {
        self.r.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Work limits for [`relation_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Largest box scanned point by point.
    pub exhaustive: u64,
    /// Largest half-box stored in the meet-in-the-middle table.
    pub table: u64,
    /// Largest half-box scanned against the table.
    pub scan: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self { exhaustive: 100_000_000, table: 1 << 24, scan: 100_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum RelationSearch {
    Found { relation: RelationVector },
    /// Every nonzero `r` with `|r_j| <= bound` was checked.
    Absent { bound: u64 },
    /// Boxes up to `covered` were exhausted before the limits were hit.
    Unknown { covered: u64 },
}

/// Ordering among relations: smaller sup norm, then smaller `|r_k|`, then
/// `|r_{k−1}|`, and so on.
fn relation_key(r: &[i64]) -> (u64, Vec<u64>) {
    let sup = r.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
    (sup, r.iter().rev().map(|x| x.unsigned_abs()).collect())
}

fn canonical_sign(mut r: Vec<i64>) -> Vec<i64> {
    if r.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        r.iter_mut().for_each(|x| *x = -*x);
    }
    r
}

/// Odometer over `[−t, t]^d`, tracking `Σ r_j w_j mod m` incrementally.
fn for_each_in_box(weights: &[u64], t: i64, m: u64, mut visit: impl FnMut(&[i64], u64)) {
    let d = weights.len();
    let mut r = vec![-t; d];
    let neg = |w: u64, k: i64| ((m as u128 - (w as u128 * k as u128 % m as u128)) % m as u128) as u64;
    let mut res = weights.iter().fold(0u64, |acc, &w| (acc + neg(w, t)) % m);
    let span: Vec<u64> = weights.iter().map(|&w| (w as u128 * (2 * t) as u128 % m as u128) as u64).collect();
    loop {
        visit(&r, res);
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            if r[j] < t {
                r[j] += 1;
                res = (res + weights[j]) % m;
                break;
            }
            r[j] = -t;
            res = (res + m - span[j]) % m;
            j += 1;
        }
    }
}

fn box_size(t: u64, d: usize) -> u128 {
    (2 * t as u128 + 1).checked_pow(d as u32).unwrap_or(u128::MAX)
}

/// Searches for a nonzero `r` with `|r_j| <= L` and `n Σ r_j u_j ≡ 0 (mod M)`,
/// of minimal sup norm. Boxes of half-width 1, 2, 4, …, L are searched in
/// turn, exhaustively while small and by meet-in-the-middle beyond
/// `limits.exhaustive`. Absence is reported only after full coverage.
pub fn relation_search(inst: &LatticeInstance, n: u64, big_l: u64, limits: SearchLimits) -> Result<RelationSearch> {
    check_n(n)?;
    if inst.m % n != 0 {
        return domain(format!("relation search needs n | M (n={n}, M={})", inst.m));
    }
    let modulus = inst.m / n;
    let weights: Vec<u64> = inst.numerators.iter().map(|&u| u % modulus).collect();
    let mut covered = 0u64;
    let mut t = 1u64.min(big_l);
    while t >= 1 {
        let found = if box_size(t, weights.len()) <= limits.exhaustive as u128 {
            Some(search_exhaustive(&weights, t, modulus))
        } else {
            search_mitm(&weights, t, modulus, limits)
        };
        match found {
            None => return Ok(RelationSearch::Unknown { covered }),
            Some(Some(r)) => {
                let relation = RelationVector::new(inst, canonical_sign(r), n)?;
                debug_assert_eq!(*relation.residue.numer(), 0);
                return Ok(RelationSearch::Found { relation });
            }
            Some(None) => covered = t,
        }
        if t == big_l {
            break;
        }
        t = (2 * t).min(big_l);
    }
    Ok(RelationSearch::Absent { bound: big_l })
}

fn search_exhaustive(weights: &[u64], t: u64, modulus: u64) -> Option<Vec<i64>> {
    let mut best: Option<((u64, Vec<u64>), Vec<i64>)> = None;
    for_each_in_box(weights, t as i64, modulus, |r, res| {
        if res == 0 && r.iter().any(|&x| x != 0) {
            let key = relation_key(r);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, r.to_vec()));
            }
        }
    });
    best.map(|(_, r)| r)
}

/// `None` when the box exceeds the limits, otherwise the best relation found.
fn search_mitm(weights: &[u64], t: u64, modulus: u64, limits: SearchLimits) -> Option<Option<Vec<i64>>> {
    let k = weights.len();
    let h = k.div_ceil(2);
    let (wa, wb) = weights.split_at(h);
    if box_size(t, h) > limits.table as u128 || box_size(t, k - h) > limits.scan as u128 {
        return None;
    }
    // best nonzero first half for each residue
    let mut table: HashMap<u64, ((u64, Vec<u64>), Vec<i64>)> = HashMap::new();
    for_each_in_box(wa, t as i64, modulus, |a, res| {
        if a.iter().all(|&x| x == 0) {
            return;
        }
        let key = relation_key(a);
        match table.get(&res) {
            Some((k0, _)) if *k0 <= key => {}
            _ => {
                table.insert(res, (key, a.to_vec()));
            }
        }
    });
    let mut best: Option<((u64, Vec<u64>), Vec<i64>)> = None;
    let mut consider = |r: Vec<i64>| {
        let key = relation_key(&r);
        if best.as_ref().is_none_or(|(k0, _)| key < *k0) {
            best = Some((key, r));
        }
    };
    let zero_a = vec![0i64; h];
    for_each_in_box(wb, t as i64, modulus, |b, res| {
        let need = (modulus - res) % modulus;
        if let Some((_, a)) = table.get(&need) {
            consider(a.iter().chain(b).copied().collect());
        }
        if res == 0 && b.iter().any(|&x| x != 0) {
            consider(zero_a.iter().chain(b).copied().collect());
        }
    });
    Some(best.map(|(_, r)| r))
}

/// `φ(x) = c₀ exp(−1/(1 − 4x²))` on `(−1/2, 1/2)`, zero elsewhere.
pub fn bump(x: f64) -> f64 {
    let s = 1.0 - 4.0 * x * x;
    if s <= 0.0 {
        0.0
    } else {
        bump_constant() * (-1.0 / s).exp()
    }
}

/// The normalising constant `c₀` making `∫ φ = 1`.
pub fn bump_constant() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| {
        let q = integrate(|x| {
            let s = 1.0 - 4.0 * x * x;
            if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() }
        }, -0.5, 0.5, 1e-15, 1e-14);
        1.0 / q.value
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingValue {
    /// `ln S(N)`, or `−∞` when no multiple lies in the support.
    pub ln_value: f64,
    /// Number of `ℓ` with `ℓu` strictly inside the cube of half-width `1/(2N)`.
    pub support: u64,
}

impl CountingValue {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// `S(N) = Σ_{1<=ℓ<M, ℓ≢0 (n)} F_N(ℓu)`, where `F_N` periodises
/// `Π_j N φ(N x_j)`. Summed on the spatial side, in log form so a positive
/// value never underflows to zero.
pub fn counting_function_s(inst: &LatticeInstance, n: u64, big_n: f64) -> Result<CountingValue> {
    check_n(n)?;
    if !(big_n > 1.0 && big_n.is_finite()) {
        return domain(format!("N must exceed 1, got {big_n}"));
    }
    inst.check_enumerable()?;
    let m = inst.m as f64;
    let ln_c0n = (bump_constant() * big_n).ln();
    let logs: Vec<f64> = (1..inst.m)
        .into_par_iter()
        .filter(|&l| l % n != 0)
        .filter_map(|l| {
            let mut acc = 0.0;
            for j in 0..inst.dim() {
                let x = inst.centered(l, j) as f64 / m;
                let s = 1.0 - 4.0 * (big_n * x).powi(2);
                if s <= 0.0 {
                    return None;
                }
                acc += ln_c0n - 1.0 / s;
            }
            Some(acc)
        })
        .collect();
    let support = logs.len() as u64;
    if logs.is_empty() {
        return Ok(CountingValue { ln_value: f64::NEG_INFINITY, support });
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rest: f64 = logs.iter().map(|&v| (v - top).exp()).sum();
    Ok(CountingValue { ln_value: top + rest.ln(), support })
}

/// Whether some `ℓ ≢ 0 (mod n)` in `[1, M−1]` has `max_j dist(ℓ u_j) < 1/(2N)`,
/// i.e. lies in the open support of the bump; decided in integers for
/// integer `N`.
pub fn has_strict_interior_multiple(inst: &LatticeInstance, n: u64, big_n: u64) -> bool {
    (1..inst.m).any(|l| l % n != 0 && 2 * big_n as u128 * (inst.sup_numerator(l) as u128) < inst.m as u128)
}

/// Relation bound `⌊k⁴ N log² N⌋` (natural logarithm).
pub fn relation_bound(k: usize, big_n: u64) -> u64 {
    let nf = big_n as f64;
    ((k as f64).powi(4) * nf * nf.ln().powi(2)).floor() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "lowercase")]
pub enum Dichotomy {
    Relation { relation: RelationVector, bound: u64 },
    Count { count: u64, bound: f64 },
    /// No relation up to the bound and too few small multiples.
    Violation { count: u64, bound: f64 },
    /// Relation search incomplete and the count alone does not decide.
    Unknown { covered: u64, count: u64, bound: f64 },
}

/// Either a relation `r` with `|r_j| <= k⁴N log²N`, or
/// `#C_{n−}(2/N) >= M/(n N^k)`.
pub fn dichotomy_check(inst: &LatticeInstance, n: u64, big_n: u64, limits: SearchLimits) -> Result<Dichotomy> {
    if big_n == 0 {
        return domain("N must be positive");
    }
    let l = relation_bound(inst.dim(), big_n);
    let search = relation_search(inst, n, l, limits)?;
    if let RelationSearch::Found { relation } = search {
        return Ok(Dichotomy::Relation { relation, bound: l });
    }
    let nk = (big_n as u128).pow(inst.dim() as u32);
    let count = count_small_multiples(inst, n, Ratio::new(2, big_n), ResidueSign::Minus)?;
    let bound = inst.m as f64 / (n as f64 * nk as f64);
    let enough = count as u128 * n as u128 * nk >= inst.m as u128;
    Ok(match (search, enough) {
        (_, true) => Dichotomy::Count { count, bound },
        (RelationSearch::Unknown { covered }, false) => Dichotomy::Unknown { covered, count, bound },
        _ => Dichotomy::Violation { count, bound },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// No admissible `ℓ` (happens for `n = 1`).
    pub empty_domain: bool,
    /// `min_ℓ dist(r·ℓu)` as an exact fraction.
    #[serde(with = "crate::parse::ratio_str")]
    pub min_distance: Ratio<u64>,
    pub argmin_ell: u64,
    pub distance_violations: u64,
    pub euclidean_violations: u64,
}

/// For `r·u ≡ t/n (mod 1)` with `gcd(t, n) = 1`, checks over every
/// `ℓ ≢ 0 (mod n)` that `dist(r·ℓu) >= 1/n` and `|x| >= 1/(n|r|)` for the
/// centred representative `x` of `ℓu`.
pub fn obstruction_check(inst: &LatticeInstance, n: u64, r: &[i64], t: u64) -> Result<ObstructionReport> {
    check_n(n)?;
    if inst.m % n != 0 {
        return domain(format!("need n | M (n={n}, M={})", inst.m));
    }
    if t.gcd(&n) != 1 {
        return domain(format!("need gcd(t, n) = 1, got t={t}, n={n}"));
    }
    let rel = RelationVector::new(inst, r.to_vec(), 1)?;
    if rel.residue != Ratio::new(t % n, n) {
        return domain(format!("r·u = {} is not {t}/{n} mod 1", rel.residue));
    }
    inst.check_enumerable()?;
    let m = inst.m;
    if n == 1 {
        return Ok(ObstructionReport {
            empty_domain: true,
            min_distance: Ratio::new(0, 1),
            argmin_ell: 0,
            distance_violations: 0,
            euclidean_violations: 0,
        });
    }
    let dot = (*rel.residue.numer() as u128 * (m / *rel.residue.denom()) as u128) as u64;
    let r_sq: u128 = r.iter().map(|&x| (x as i128 * x as i128) as u128).sum();
    let mut best = (u64::MAX, 0u64);
    let mut dist_bad = 0;
    let mut euclid_bad = 0;
    for l in (1..m).filter(|l| l % n != 0) {
        let v = (l as u128 * dot as u128 % m as u128) as u64;
        let d = v.min(m - v);
        if d < best.0 {
            best = (d, l);
        }
        if d as u128 * (n as u128) < m as u128 {
            dist_bad += 1;
        }
        let x_sq: u128 = (0..inst.dim()).map(|j| (inst.centered(l, j) as i128).pow(2) as u128).sum();
        if x_sq * (n as u128).pow(2) * r_sq < (m as u128).pow(2) {
            euclid_bad += 1;
        }
    }
    Ok(ObstructionReport {
        empty_domain: false,
        min_distance: Ratio::new(best.0, m),
        argmin_ell: best.1,
        distance_violations: dist_bad,
        euclidean_violations: euclid_bad,
    })
}
