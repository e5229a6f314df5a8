use proptest::prelude::*;

use zerosum::congruence::{binomial, corollary_pn, lucas_binomial, olson_alternating};
use zerosum::lifting::{find_2x, find_3x, find_5x};
use zerosum::search::{max_avoiding, SearchConfig};
use zerosum::selftest::brute_force_counts;
use zerosum::{Element, GroupSpec, LengthSet, PowerProjection, Sequence, ZeroSumDp};

const SMALL_GROUPS: &[&str] = &[
    "2", "3", "4", "6", "8", "9", "12", "2,2", "2,4", "3,3", "2,6", "4,4", "3,9", "2,2,2", "2,2,4", "3,3,3",
];

fn group_of(spec: &str) -> GroupSpec {
    spec.parse().unwrap()
}

fn any_group() -> impl Strategy<Value = GroupSpec> {
    prop::sample::select(SMALL_GROUPS).prop_map(group_of)
}

fn element_of(g: GroupSpec) -> impl Strategy<Value = Element> {
    (0..g.order() as usize).prop_map(move |i| g.element_at(i))
}

fn sequence_of(g: GroupSpec, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Sequence> {
    let order = g.order() as usize;
    prop::collection::vec(0..order, len)
        .prop_map(move |ix| Sequence::from_elements(&g, ix.into_iter().map(|i| g.element_at(i))).unwrap())
}

/// A sequence together with a sub-multiset of it.
fn sequence_and_part(g: GroupSpec, len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Sequence, Sequence)> {
    sequence_of(g, len).prop_flat_map(|s| {
        let items = s.expanded();
        let n = items.len();
        (Just(s), prop::collection::vec(any::<bool>(), n)).prop_map(move |(s, keep)| {
            let part = items.iter().zip(&keep).filter(|(_, k)| **k).map(|(g, _)| g.clone());
            let t = Sequence::from_elements(s.group(), part).unwrap();
            (s, t)
        })
    })
}

fn small_sequence() -> impl Strategy<Value = Sequence> {
    any_group().prop_flat_map(|g| sequence_of(g, 0..=12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn addition_is_a_group_law(
        (g, a, b, c) in any_group().prop_flat_map(|g| {
            (Just(g.clone()), element_of(g.clone()), element_of(g.clone()), element_of(g))
        })
    ) {
        prop_assert_eq!(g.add(&a, &b).unwrap(), g.add(&b, &a).unwrap());
        let left = g.add(&g.add(&a, &b).unwrap(), &c).unwrap();
        let right = g.add(&a, &g.add(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(g.scalar_mul(g.exponent() as i64, &a).unwrap().is_zero());
        prop_assert!(g.add(&a, &g.neg(&a).unwrap()).unwrap().is_zero());
        prop_assert_eq!(g.order() % g.order_of(&a).unwrap(), 0);
    }

    #[test]
    fn projection_is_a_homomorphism(
        (p, n, a, b) in (prop::sample::select(vec![2u32, 3, 5]), 2u32..=3).prop_flat_map(|(p, n)| {
            let g = GroupSpec::homocyclic(p, n, 3).unwrap();
            (Just(p), Just(n), element_of(g.clone()), element_of(g))
        })
    ) {
        let g = GroupSpec::homocyclic(p, n, 3).unwrap();
        let proj = PowerProjection::new(&g).unwrap();
        let sum = g.add(&a, &b).unwrap();
        let img = proj.image();
        prop_assert_eq!(
            proj.project(&sum).unwrap(),
            img.add(&proj.project(&a).unwrap(), &proj.project(&b).unwrap()).unwrap()
        );
        // p·a and p·b lie in the kernel
        let (ka, kb) = (g.scalar_mul(p as i64, &a).unwrap(), g.scalar_mul(p as i64, &b).unwrap());
        prop_assert!(proj.in_kernel(&ka) && proj.in_kernel(&kb));
        let ia = proj.kernel_iso(&ka).unwrap();
        prop_assert_eq!(proj.kernel_iso_inverse(&ia).unwrap(), ka.clone());
        let both = proj.kernel_iso(&g.add(&ka, &kb).unwrap()).unwrap();
        prop_assert_eq!(both, proj.kernel().add(&ia, &proj.kernel_iso(&kb).unwrap()).unwrap());
    }

    #[test]
    fn davenport_star_closed_forms(p in prop::sample::select(vec![2u32, 3, 5, 7]), r in 1usize..=4, n in 1u32..=3) {
        prop_assert_eq!(GroupSpec::elementary(p, r).unwrap().davenport_star(), (r as u64) * (p as u64 - 1) + 1);
        let q = (p as u64).pow(n);
        prop_assert_eq!(GroupSpec::homocyclic(p, n, 3).unwrap().davenport_star(), 3 * q - 2);
    }

    #[test]
    fn remove_and_sigma((s, t) in any_group().prop_flat_map(|g| sequence_and_part(g, 0..=15))) {
        let g = s.group().clone();
        let rest = s.remove(&t).unwrap();
        prop_assert_eq!(rest.concat(&t).unwrap(), s.clone());
        prop_assert_eq!(rest.sigma(), g.sub(&s.sigma(), &t.sigma()).unwrap());
        prop_assert!(t.is_subsequence_of(&s));
    }

    #[test]
    fn text_formats_read_back(s in small_sequence()) {
        prop_assert_eq!(Sequence::parse(&s.to_text()).unwrap(), s.clone());
        prop_assert_eq!(Sequence::parse_inline(s.group(), &s.to_inline()).unwrap(), s);
    }

    #[test]
    fn counts_match_subset_enumeration(s in small_sequence()) {
        let table = ZeroSumDp::default().count_table(&s).unwrap();
        let brute = brute_force_counts(&s);
        for (k, n) in brute.iter().enumerate() {
            prop_assert_eq!(table.get(k), (*n).into());
        }
    }

    #[test]
    fn residues_match_exact_counts(s in small_sequence(), p in prop::sample::select(vec![2u32, 3, 5])) {
        let dp = ZeroSumDp::default();
        prop_assert_eq!(dp.count_mod_p(&s, p).unwrap(), dp.count_table(&s).unwrap().mod_p(p));
    }

    #[test]
    fn witnesses_exist_exactly_when_counted(s in small_sequence(), k in 0u64..=12) {
        prop_assume!(k <= s.length());
        let dp = ZeroSumDp::default();
        let counted = dp.count_table(&s).unwrap().get(k as usize) > 0u32.into();
        match dp.find_zero_sum_of_length(&s, k).unwrap() {
            Some(w) => {
                prop_assert!(counted);
                prop_assert!(w.verify(&s).is_ok());
                prop_assert!(s.remove(&w.sub).is_ok());
            }
            None => prop_assert!(!counted),
        }
    }

    #[test]
    fn canonical_form_keeps_counts(s in small_sequence()) {
        let c = s.canonical_form();
        prop_assert_eq!(c.length(), s.length());
        let dp = ZeroSumDp::default();
        prop_assert_eq!(dp.count_table(&c).unwrap().counts().to_vec(), dp.count_table(&s).unwrap().counts().to_vec());
        prop_assert_eq!(c.canonical_form(), c);
    }

    #[test]
    fn lucas_matches_exact_binomials(a in 0u64..=2000, b in 0u64..=2000, p in prop::sample::select(vec![2u32, 3, 5, 7, 11, 13])) {
        let exact = binomial(a, b) % num_bigint::BigUint::from(p);
        prop_assert_eq!(exact, lucas_binomial(a, b, p).unwrap().into());
    }

    #[test]
    fn length_sets_print_and_parse(lengths in prop::collection::btree_set(1usize..40, 0..10)) {
        let l = LengthSet::Finite(lengths);
        prop_assert_eq!(l.to_string().parse::<LengthSet>().unwrap(), l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alternating_sums_vanish_above_the_threshold(
        (spec, extra, seed) in (prop::sample::select(vec!["3^1^2", "3^1^3", "5^1^3", "3^2^3", "2^2^2"]), 0usize..8, any::<u64>())
    ) {
        use rand::SeedableRng;
        let g = group_of(spec);
        let p = g.p_group_prime().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = Sequence::random(&g, g.davenport_star() as usize + extra, &mut rng);
        let r = olson_alternating(&s, p).unwrap();
        prop_assert!(r.hypothesis_met && r.holds);
        let q = g.exponent() as u64;
        let s = Sequence::random(&g, (g.davenport_star() + q) as usize - 1 + extra, &mut rng);
        let r = corollary_pn(&s, p, q).unwrap();
        prop_assert!(r.hypothesis_met && r.holds);
    }

    #[test]
    fn lifted_witnesses_verify(n in 1u32..=2, extra in 0usize..6, seed in any::<u64>()) {
        use rand::SeedableRng;
        let g = GroupSpec::homocyclic(3, n, 3).unwrap();
        let q = 3usize.pow(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = Sequence::random(&g, 7 * q - 8 + extra, &mut rng);
        let w = find_2x(&s).unwrap();
        prop_assert!(w.witness.verify(&s).is_ok());
        prop_assert_eq!(w.recursion_depth, n - 1);
        let s = Sequence::random(&g, 6 * q - 3 + extra, &mut rng);
        prop_assert!(find_3x(&s).unwrap().witness.verify(&s).is_ok());
        let s = Sequence::random(&g, 8 * q - 3 + extra, &mut rng);
        let w = find_5x(&s).unwrap();
        prop_assert_eq!(w.witness.sub.length(), 5 * q as u64);
    }
}

/// Length sets over small groups that contain a multiple of the exponent,
/// so that `s_L` is finite.
fn bounded_lengths() -> impl Strategy<Value = (GroupSpec, LengthSet, LengthSet)> {
    prop::sample::select(vec!["3,3", "2,2,2", "4", "6", "2,4"]).prop_flat_map(|spec| {
        let g = group_of(spec);
        let e = g.exponent() as usize;
        (
            Just(g),
            prop::collection::btree_set(1usize..=2 * e, 0..4),
            prop::collection::btree_set(1usize..=2 * e, 0..3),
        )
            .prop_map(move |(g, mut small, extra)| {
                small.insert(e);
                let big: std::collections::BTreeSet<usize> = small.union(&extra).copied().collect();
                (g, LengthSet::Finite(small), LengthSet::Finite(big))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_is_sound_monotone_and_deterministic((g, small, big) in bounded_lengths()) {
        let cfg = SearchConfig::default();
        let a = max_avoiding(&g, &small, &cfg).unwrap();
        let b = max_avoiding(&g, &big, &cfg).unwrap();
        prop_assert!(b.witness_length <= a.witness_length);
        for (cert, lengths) in [(&a, &small), (&b, &big)] {
            let spectrum = ZeroSumDp::default().zero_sum_length_spectrum(&cert.witness).unwrap();
            prop_assert!(spectrum.iter().all(|&k| !lengths.contains(k)));
        }
        let again = max_avoiding(&g, &small, &cfg).unwrap();
        prop_assert_eq!(again.witness, a.witness);
        prop_assert_eq!(again.nodes_explored, a.nodes_explored);
    }
}
