mod common;

use common::*;
use focusfocus::moduli::{act, canonicalize, check_constraints, equivalent, expand, from_vungoc, to_vungoc};
use focusfocus::GroupElement;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expanded_tuples_satisfy_constraints(seed in any::<u64>(), k in 1usize..=5, order in 1u32..=4) {
        let d = expand(&random_minimal(&mut rng(seed), k, order));
        prop_assert!(check_constraints(&d).is_empty());
    }

    #[test]
    fn action_preserves_constraints(seed in any::<u64>(), k in 1usize..=4, x: bool, y: bool, rot in 0i64..8) {
        let d = expand(&random_minimal(&mut rng(seed), k, 3));
        let g = GroupElement::new(k, x, rot, y);
        prop_assert!(check_constraints(&act(&g, &d)).is_empty());
    }

    #[test]
    fn action_is_a_group_action(seed in any::<u64>(), k in 1usize..=4, a in any::<(bool, i64, bool)>(), b in any::<(bool, i64, bool)>()) {
        let d = expand(&random_minimal(&mut rng(seed), k, 3));
        let g = GroupElement::new(k, a.0, a.1 % 16, a.2);
        let h = GroupElement::new(k, b.0, b.1 % 16, b.2);
        prop_assert_eq!(act(&g.compose(&h), &d), act(&g, &act(&h, &d)));
        prop_assert_eq!(act(&g.inverse(), &act(&g, &d)), d);
    }

    #[test]
    fn canonical_form_is_orbit_invariant(seed in any::<u64>(), k in 1usize..=4, x: bool, y: bool, rot in 0i64..8) {
        let d = expand(&random_minimal(&mut rng(seed), k, 3));
        let g = GroupElement::new(k, x, rot, y);
        let moved = act(&g, &d);
        let (c1, w1) = canonicalize(&d);
        prop_assert_eq!(&c1, &canonicalize(&moved).0);
        prop_assert_eq!(act(&w1, &d), c1);
        prop_assert!(equivalent(&d, &moved).unwrap());
    }

    #[test]
    fn vungoc_conversion_round_trips(seed in any::<u64>(), order in 1u32..=6) {
        let s = random_action(&mut rng(seed), order);
        prop_assert_eq!(from_vungoc(&to_vungoc(&s)), s);
    }
}
