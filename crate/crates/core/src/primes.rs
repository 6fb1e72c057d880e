//! Prime utilities: small sieves, deterministic primality, trial-division
//! factorization and enumeration of `y`-smooth integers below a bound.

/// All primes `<= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut m = i * i;
            while m <= n {
                composite[m] = true;
                m += i;
            }
        }
    }
    out
}

/// The first `k` primes.
pub fn first_primes(k: usize) -> Vec<u64> {
    if k == 0 {
        return Vec::new();
    }
    let mut bound = 16u64;
    loop {
        let ps = primes_up_to(bound);
        if ps.len() >= k {
            return ps[..k].to_vec();
        }
        bound *= 2;
    }
}

/// Number of primes `<= x`.
pub fn prime_pi(x: f64) -> usize {
    if x < 2.0 {
        0
    } else {
        primes_up_to(x.floor() as u64).len()
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Largest prime factor by trial division; 1 for `n = 1`.
pub fn largest_prime_factor(n: u64) -> u64 {
    factorize(n).last().map_or(1, |&(p, _)| p)
}

/// All integers `1 <= n <= bound` whose prime factors lie in `primes`, sorted.
pub fn smooth_numbers(primes: &[u64], bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if bound == 0 {
        return out;
    }
    fn walk(primes: &[u64], start: usize, n: u64, bound: u64, out: &mut Vec<u64>) {
        out.push(n);
        for (i, &p) in primes.iter().enumerate().skip(start) {
            match n.checked_mul(p) {
                Some(m) if m <= bound => walk(primes, i, m, bound, out),
                _ => break,
            }
        }
    }
    walk(primes, 0, 1, bound, &mut out);
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
        assert_eq!(prime_pi(7.0), 4);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let ps = primes_up_to(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), ps.binary_search(&n).is_ok(), "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(largest_prime_factor(1), 1);
        assert_eq!(largest_prime_factor(97), 97);
    }

    #[test]
    fn three_smooth_below_ten() {
        assert_eq!(smooth_numbers(&[2, 3], 10), vec![1, 2, 3, 4, 6, 8, 9]);
    }
}
