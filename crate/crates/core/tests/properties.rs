use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use uniformity_lab::arith::{build_tables, lambda_tilde, restrict_to_zn, vm_gap_check, ArithTables};
use uniformity_lab::combinat::{find_3ap_shifted_prime, IntSet};
use uniformity_lab::dynamics::{
    triple_intersection, Alpha, CircleRotation, FiniteMps, IndexSet, IntervalSet, MeasurableSet, System,
};
use uniformity_lab::experiments::prime_shift_recurrence;
use uniformity_lab::par::pairwise_sum;
use uniformity_lab::znz::{gowers_norm, Strategy as NormStrategy, ZnSeq};

fn tables() -> &'static ArithTables {
    static TABLES: OnceLock<ArithTables> = OnceLock::new();
    TABLES.get_or_init(|| build_tables(200_000).unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn sequence(max_len: usize) -> impl Strategy<Value = ZnSeq> {
    prop::collection::vec(complex(), 1..=max_len).prop_map(|v| ZnSeq::new(v).unwrap())
}

fn pair(max_len: usize) -> impl Strategy<Value = (ZnSeq, ZnSeq)> {
    (1..=max_len).prop_flat_map(|n| {
        (prop::collection::vec(complex(), n), prop::collection::vec(complex(), n))
            .prop_map(|(a, b)| (ZnSeq::new(a).unwrap(), ZnSeq::new(b).unwrap()))
    })
}

fn intervals() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((0.0..1.0f64, 0.0..0.4f64), 0..5)
        .prop_map(|v| IntervalSet::new(v.into_iter().map(|(a, w)| (a, (a + w).min(1.0)))).unwrap())
}

fn norm(f: &ZnSeq, d: u32) -> f64 {
    gowers_norm(f, d, NormStrategy::Recursive).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prime_power_gap_below_bound(n in 1u64..200_000) {
        let gap = vm_gap_check(n, tables()).unwrap();
        prop_assert!(gap.gap <= gap.bound, "N={}: {} > {}", n, gap.gap, gap.bound);
    }

    #[test]
    fn w2_trick_is_identity(n in 0u64..100_000) {
        let t = tables();
        prop_assert_eq!(lambda_tilde(2, 0, n, t).unwrap(), t.lambda(n).unwrap());
    }

    #[test]
    fn restriction_support(idx in 0usize..200, k in 1u64..6, w in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let t = tables();
        let modulus = t.primes()[idx] as u64;
        let f = restrict_to_zn(w, 1, modulus, k, t).unwrap();
        let cut = (modulus / k) as usize;
        prop_assert_eq!(f.modulus(), modulus as usize);
        prop_assert!(f.values()[cut..].iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn strategies_agree(f in sequence(24), d in 2u32..=3) {
        let a = norm(&f, d);
        let b = gowers_norm(&f, d, NormStrategy::Bruteforce).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn homogeneity(f in sequence(40), c in complex(), d in 2u32..=3) {
        let lhs = norm(&f.scale(c), d);
        let rhs = c.norm() * norm(&f, d);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn triangle_inequality((f, g) in pair(40), d in 2u32..=3) {
        let sum = norm(&f.add(&g).unwrap(), d);
        prop_assert!(sum <= norm(&f, d) + norm(&g, d) + 1e-9);
    }

    #[test]
    fn shift_and_conjugation_invariance(f in sequence(50), a in -500i64..500, d in 2u32..=3) {
        let base = norm(&f, d);
        prop_assert!((norm(&f.shift(a), d) - base).abs() <= 1e-10 * base.max(1.0));
        prop_assert!((norm(&f.conj(), d) - base).abs() <= 1e-10 * base.max(1.0));
    }

    #[test]
    fn u2_below_u3(f in sequence(60)) {
        prop_assert!(norm(&f, 2) <= norm(&f, 3) + 1e-12);
    }

    #[test]
    fn inclusion_exclusion(a in intervals(), b in intervals()) {
        let lhs = a.intersect(&b).measure() + a.union(&b).measure();
        prop_assert!((lhs - a.measure() - b.measure()).abs() <= 1e-12);
    }

    #[test]
    fn translation_preserves_measure(a in intervals(), beta in -3.0..3.0f64) {
        prop_assert!((a.translate(beta).measure() - a.measure()).abs() <= 1e-12);
    }

    #[test]
    fn relabelling_invariance(
        perm_seed in prop::collection::vec(any::<u32>(), 1..30),
        members in prop::collection::vec(any::<prop::sample::Index>(), 0..10),
        n in -40i64..40,
    ) {
        let m = perm_seed.len();
        // a random bijection as the map, and a random relabelling sigma
        let mut map: Vec<usize> = (0..m).collect();
        map.sort_by_key(|&i| perm_seed[i]);
        let mut sigma: Vec<usize> = (0..m).collect();
        sigma.sort_by_key(|&i| perm_seed[i].rotate_left(13) ^ 0x5bd1_e995);
        let mut conj = vec![0usize; m];
        for x in 0..m {
            conj[sigma[x]] = sigma[map[x]];
        }
        let a: Vec<usize> = members.iter().map(|i| i.index(m)).collect();
        let sa: Vec<usize> = a.iter().map(|&x| sigma[x]).collect();
        let orig = System::Finite(FiniteMps::uniform(map).unwrap());
        let relabelled = System::Finite(FiniteMps::uniform(conj).unwrap());
        let lhs = triple_intersection(&orig, &MeasurableSet::Indices(IndexSet::new(a)), n, 1).unwrap();
        let rhs = triple_intersection(&relabelled, &MeasurableSet::Indices(IndexSet::new(sa)), n, 1).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn rational_rotation_periodic(p in 1i64..50, q in 2i64..50, n in -1000i64..1000, a in intervals()) {
        let rot = System::Rotation(CircleRotation::new(Alpha::rational(p, q).unwrap()));
        let set = MeasurableSet::Intervals(a);
        let x = triple_intersection(&rot, &set, n, 1).unwrap();
        let y = triple_intersection(&rot, &set, n + q, 1).unwrap();
        prop_assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn ap_hits_are_sound(bits in prop::collection::vec(any::<bool>(), 1..300), plus in any::<bool>()) {
        let members: Vec<u64> = (0..bits.len() as u64).filter(|&i| bits[i as usize]).collect();
        let set = IntSet::new(bits.len() as u64, members).unwrap();
        let sign = if plus { 1 } else { -1 };
        if let Some(hit) = find_3ap_shifted_prime(&set, sign, tables()).unwrap() {
            prop_assert!(set.contains(hit.a) && set.contains(hit.a + hit.d) && set.contains(hit.a + 2 * hit.d));
            prop_assert_eq!(hit.d, if plus { hit.p + 1 } else { hit.p - 1 });
            prop_assert!(tables().is_prime(hit.p).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn recurrence_matches_per_prime_recomputation(
        m in 1usize..12,
        members in prop::collection::vec(any::<prop::sample::Index>(), 1..6),
        shift in -3i64..3,
    ) {
        let t = tables();
        let system = FiniteMps::cyclic(m).unwrap();
        let a: Vec<usize> = members.iter().map(|i| i.index(m)).collect();
        let set = MeasurableSet::Indices(IndexSet::new(a.clone()));
        let report = prime_shift_recurrence(&System::Finite(system), &set, shift, 5000, t).unwrap();
        let in_a = |x: i64| a.contains(&(x.rem_euclid(m as i64) as usize));
        for row in &report.rows {
            let n = row.int("N").unwrap() as u64;
            let terms: Vec<f64> = t
                .primes_below(n)
                .iter()
                .map(|&p| {
                    let step = p as i64 + shift;
                    // sum of point masses 1/M, states in ascending order
                    (0..m as i64)
                        .filter(|&x| in_a(x) && in_a(x + step) && in_a(x + 2 * step))
                        .map(|_| 1.0 / m as f64)
                        .sum::<f64>()
                })
                .collect();
            let expected = pairwise_sum(&terms) / terms.len() as f64;
            prop_assert_eq!(row.float("avg").unwrap(), expected);
        }
    }
}
