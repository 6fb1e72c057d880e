use charsum::lattice::*;
use num_rational::Ratio;
use proptest::prelude::*;

/// `dist(ℓ u_j/M, Z) <= η` for every `j`, in integers.
fn all_close(m: u64, nums: &[u64], ell: u64, eta: Ratio<u64>) -> bool {
    nums.iter().all(|&u| {
        let r = (ell as u128 * u as u128 % m as u128) as u64;
        let d = r.min(m - r);
        d as u128 * *eta.denom() as u128 <= *eta.numer() as u128 * m as u128
    })
}

fn residue_ok(ell: u64, n: u64, sign: ResidueSign) -> bool {
    match sign {
        ResidueSign::Plus => ell % n == 0,
        ResidueSign::Minus => ell % n != 0,
    }
}

fn instance() -> impl Strategy<Value = LatticeInstance> {
    (2u64..3000, prop::collection::vec(0u64..3000, 1..=4))
        .prop_map(|(m, nums)| LatticeInstance::new(m, &nums).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn membership_is_exact(inst in instance(), n in 1u64..5, num in 0u64..6, den in 1u64..12, plus in any::<bool>()) {
        let sign = if plus { ResidueSign::Plus } else { ResidueSign::Minus };
        let eta = Ratio::new(num, den);
        let set = enumerate_small_multiples(&inst, n, eta, sign).unwrap();
        let want: Vec<u64> = (0..inst.order())
            .filter(|&l| residue_ok(l, n, sign) && all_close(inst.order(), inst.numerators(), l, eta))
            .collect();
        prop_assert_eq!(&set.members, &want);
        prop_assert_eq!(count_small_multiples(&inst, n, eta, sign).unwrap(), want.len() as u64);
    }

    #[test]
    fn order_is_exact(inst in instance()) {
        let g = inst.numerators().iter().fold(inst.order(), |g, &u| num_integer::gcd(g, u));
        prop_assert_eq!(g, 1);
    }

    #[test]
    fn even_lattice_count(inst in instance(), n in 1u64..5, big_n in 1u64..9) {
        let nk = big_n.pow(inst.dim() as u32);
        prop_assume!(n * nk <= inst.order());
        let r = pigeonhole_witness(&inst, n, big_n).unwrap();
        prop_assert!(r.holds, "{r:?}");
        prop_assert!(r.count as f64 >= r.bound);
    }

    #[test]
    fn shift_is_injective(inst in instance(), n in 1u64..5, e1 in 1u64..8, e2 in 1u64..8) {
        prop_assume!(inst.order() % n == 0);
        let (eta, nu) = (Ratio::new(1, 2 * e1), Ratio::new(1, 2 * e2));
        match shift_construction(&inst, n, eta, nu) {
            Ok(r) => {
                prop_assert!(r.injective_into_minus);
                prop_assert!(r.plus_count <= r.minus_count);
            }
            Err(charsum::Error::Precondition(_)) => {
                prop_assert!(count_small_multiples(&inst, n, nu, ResidueSign::Minus).unwrap() == 0);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn relation_residue(inst in instance(), n in 1u64..5, r in prop::collection::vec(-20i64..20, 4)) {
        let r: Vec<i64> = r[..inst.dim()].to_vec();
        let rel = RelationVector::new(&inst, r.clone(), n).unwrap();
        let m = inst.order() as i128;
        let dot: i128 = r.iter().zip(inst.numerators()).map(|(&a, &b)| a as i128 * b as i128).sum();
        prop_assert_eq!(*rel.residue.numer() == 0, (n as i128 * dot).rem_euclid(m) == 0);
    }

    #[test]
    fn counting_sign_matches_support(inst in instance(), n in 1u64..4, big_n in 2u64..8) {
        let s = counting_function_s(&inst, n, big_n as f64).unwrap();
        prop_assert_eq!(s.support > 0, has_strict_interior_multiple(&inst, n, big_n));
        prop_assert_eq!(s.value() > 0.0 || s.ln_value.is_finite(), s.support > 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn dichotomy_never_violated(m in 50u64..20_000, nums in prop::collection::vec(1u64..20_000, 1..=3), n in 2u64..5, big_n in 2u64..9) {
        let inst = LatticeInstance::new(m, &nums).unwrap();
        prop_assume!(inst.order() % n == 0);
        let d = dichotomy_check(&inst, n, big_n, SearchLimits::default()).unwrap();
        prop_assert!(!matches!(d, Dichotomy::Violation { .. }), "{d:?}");
    }

    #[test]
    fn obstruction_minimum(n in 2u64..6, t in 1u64..6, scale in 1u64..200, r in -5i64..=5, u2 in 0u64..1000) {
        prop_assume!(r != 0 && num_integer::gcd(t, n) == 1);
        // u_1 = t/(n r) mod 1 written over M = n |r| scale, and r·u_1 ≡ t/n
        let m = n * r.unsigned_abs() * scale;
        let base = t * scale;
        let u1 = if r > 0 { base } else { m - base % m };
        let inst = LatticeInstance::new(m, &[u1, u2 % m]).unwrap();
        prop_assume!(inst.order() % n == 0);
        let rep = obstruction_check(&inst, n, &[r, 0], t).unwrap();
        prop_assert!(rep.min_distance >= Ratio::new(1, n));
        prop_assert_eq!(rep.distance_violations, 0);
        prop_assert_eq!(rep.euclidean_violations, 0);
    }
}

#[test]
fn n_one_leaves_only_the_relation_branch() {
    // C_{1-} is empty, so without a relation of size <= L nothing holds
    let inst = LatticeInstance::new(85, &[1]).unwrap();
    assert_eq!(count_small_multiples(&inst, 1, Ratio::new(1, 1), ResidueSign::Minus).unwrap(), 0);
    let d = dichotomy_check(&inst, 1, 2, SearchLimits::default()).unwrap();
    assert!(matches!(d, Dichotomy::Violation { count: 0, .. }), "{d:?}");
}

#[test]
fn relation_search_is_minimal() {
    let inst = LatticeInstance::new(997, &[1, 500]).unwrap();
    if let RelationSearch::Found { relation } = relation_search(&inst, 1, 100, SearchLimits::default()).unwrap() {
        let best = relation.sup_norm() as i64;
        for a in -best + 1..best {
            for b in -best + 1..best {
                if (a, b) != (0, 0) {
                    assert_ne!((a + 500 * b).rem_euclid(997), 0, "smaller relation ({a}, {b})");
                }
            }
        }
    } else {
        panic!("relation expected");
    }
}
