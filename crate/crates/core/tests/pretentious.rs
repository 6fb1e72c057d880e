use charsum::characters::{CharacterGroup, Parity};
use charsum::pretentious::*;
use charsum::primes::{is_prime, primes_up_to};
use proptest::prelude::*;

fn direct_max_dev(g: &CharacterGroup, ell: u64, t: u64) -> f64 {
    primes_up_to(t)
        .iter()
        .map(|&p| (g.char_value(ell, p as i64) - 1.0).norm())
        .fold(0.0, f64::max)
}

#[test]
fn big_set_count_exhaustive() {
    for q in (11..=2000).filter(|&q| is_prime(q)) {
        let g = CharacterGroup::new(q).unwrap();
        for t in [3, 5, 7] {
            for n in [2, 3] {
                let c = count_bound_check(&g, t, n).unwrap();
                assert!(c.holds, "q={q} T={t} N={n}: {c:?}");
            }
        }
    }
}

#[test]
fn principal_has_no_deviation() {
    for q in [101, 1009] {
        let g = CharacterGroup::new(q).unwrap();
        for t in [3, 7, 50] {
            assert_eq!(certify(&g, 0, t).unwrap().max_dev, 0.0);
        }
        assert_eq!(prime_log_sum(&g, 0, 50.0).unwrap().norm(), 0.0);
        assert_eq!(prime_power_sum_check(&g, 0, 50.0).unwrap(), (0.0, 0.0));
    }
}

#[test]
fn search_matches_certificates() {
    let g = CharacterGroup::new(1009).unwrap();
    let eps = epsilon_for(5.0);
    let found = search_pretentious(&g, 7, eps, Parity::Even, usize::MAX).unwrap();
    let want: Vec<u64> = (0..g.order()).filter(|&l| l % 2 == 0 && direct_max_dev(&g, l, 7) <= eps).collect();
    assert_eq!(found.iter().map(|c| c.ell).collect::<Vec<_>>(), want);
    // pigeonhole finds a subset of the same set
    for c in pigeonhole_search(&g, 7, eps, Parity::Even, 50).unwrap() {
        assert!(want.contains(&c.ell));
    }
}

proptest! {
    #[test]
    fn certificate_sound(qi in 0usize..3, ell in 0u64..10_000, t in 2u64..60) {
        let q = [101u64, 1009, 10007][qi];
        let g = CharacterGroup::new(q).unwrap();
        prop_assume!(t < q);
        let c = certify(&g, ell, t).unwrap();
        prop_assert_eq!(c.max_dev, certify(&g, ell, t).unwrap().max_dev);
        prop_assert!((c.max_dev - direct_max_dev(&g, ell % g.order(), t)).abs() <= 1e-12);
        prop_assert_eq!(c.parity, if (ell % g.order()) % 2 == 0 { Parity::Even } else { Parity::Odd });
    }

    #[test]
    fn chi_minus_one_subadditive(ell in 0u64..1008, n in 1u64..1_000_000) {
        let g = CharacterGroup::new(1009).unwrap();
        prop_assume!(n % 1009 != 0);
        let (lhs, rhs) = chi_minus_one_bound(&g, ell, n).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn prime_power_geometric(ell in 0u64..1008, y in 2.0f64..1000.0) {
        let g = CharacterGroup::new(1009).unwrap();
        let (lhs, rhs) = prime_power_sum_check(&g, ell, y).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn h_function(t in 3.0f64..1e9, n in 1.0f64..100.0) {
        prop_assert_eq!(HFunction { t, n }.value(), t.ln().ln() / n);
    }
}
