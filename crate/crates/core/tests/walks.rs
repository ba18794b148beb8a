use cayleylab::exact::{ratio, rational};
use cayleylab::gensets::{power_multiset, power_set, product_set};
use cayleylab::spectral::{
    rho_exact_catalog, rho_lower, rho_upper_power, tree_return_oracle, walk_series, WalkSeries,
};
use cayleylab::{BoundReport, GenSet, GroupSpec, Quantity, DEFAULT_MAX_VERTICES};
use proptest::prelude::*;

fn std(spec: GroupSpec) -> GenSet {
    GenSet::standard(&spec).unwrap()
}

fn small_catalog() -> Vec<GroupSpec> {
    use GroupSpec::*;
    vec![
        Free(2),
        FreeAbelian(2),
        Cyclic(5),
        FreeProduct(vec![Cyclic(2), Cyclic(3)]),
        DirectProduct(vec![Free(1), Cyclic(3)]),
    ]
}

fn series(spec: &GroupSpec, n: u32) -> WalkSeries {
    walk_series(&std(spec.clone()), n, DEFAULT_MAX_VERTICES).unwrap()
}

#[test]
fn odd_returns_vanish_on_bipartite_graphs() {
    for spec in [
        GroupSpec::Free(2),
        GroupSpec::FreeAbelian(3),
        GroupSpec::Cyclic(6),
    ] {
        let s = series(&spec, 9);
        for j in (1..=9).step_by(2) {
            assert_eq!(s.return_count(j), 0, "{spec} step {j}");
        }
    }
    let odd_cycle = series(&GroupSpec::Cyclic(5), 5);
    assert_eq!(odd_cycle.p(5), ratio(2, 32));
}

#[test]
fn tree_oracle_agrees_with_convolution() {
    let s = series(&GroupSpec::Free(2), 12);
    let t = tree_return_oracle(4, 6).unwrap();
    for m in 0..=6u32 {
        assert_eq!(s.p(2 * m), t.even_returns[m as usize]);
    }
    let s3 = series(&GroupSpec::Free(3), 8);
    let t3 = tree_return_oracle(6, 4).unwrap();
    for m in 0..=4u32 {
        assert_eq!(s3.p(2 * m), t3.even_returns[m as usize]);
    }
}

#[test]
fn power_bound_dominates_walk_lower_bound() {
    for (spec, k, horizon) in [
        (GroupSpec::Free(2), 2, 8),
        (GroupSpec::Free(3), 2, 6),
        (GroupSpec::Free(2), 3, 4),
    ] {
        let s = std(spec);
        let rho = BoundReport::exact(Quantity::Rho, rho_exact_catalog(&s).unwrap(), "catalog");
        let x = power_set(&s, k).unwrap();
        let lower = rho_lower(&walk_series(&x, horizon, DEFAULT_MAX_VERTICES).unwrap()).unwrap();
        for size in [x.len(), product_set(&s, k).unwrap().len()] {
            let up = rho_upper_power(rho.upper.as_ref().unwrap(), s.len(), size, k).unwrap();
            assert!(
                rational(lower.certified_lower().unwrap())
                    <= rational(up.certified_upper().unwrap())
            );
        }
    }
}

#[test]
fn walk_lower_bounds_sit_below_catalog_values() {
    for spec in [
        GroupSpec::Free(2),
        GroupSpec::Free(3),
        GroupSpec::FreeAbelian(2),
    ] {
        let s = std(spec);
        let r = rho_lower(&walk_series(&s, 10, DEFAULT_MAX_VERTICES).unwrap()).unwrap();
        assert!(r.is_consistent());
        let exact = rho_exact_catalog(&s).unwrap();
        assert!(r.certified_lower().unwrap() <= exact.hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn supermultiplicativity(i in 0..small_catalog().len(), a in 1u32..4, b in 1u32..4) {
        let spec = &small_catalog()[i];
        let s = series(spec, 2 * (a + b));
        prop_assert!(s.p(2 * (a + b)) >= s.p(2 * a) * s.p(2 * b));
    }

    #[test]
    fn multiset_power_identity(i in 0..small_catalog().len(), k in 2u32..4, m in 1u32..3) {
        let s = std(small_catalog()[i].clone());
        let base = walk_series(&s, 2 * m * k, DEFAULT_MAX_VERTICES).unwrap();
        let power = walk_series(&power_multiset(&s, k).unwrap(), 2 * m, DEFAULT_MAX_VERTICES).unwrap();
        prop_assert_eq!(power.p(2 * m), base.p(2 * m * k));
    }

    #[test]
    fn probabilities_are_probabilities(i in 0..small_catalog().len(), n in 1u32..9) {
        let s = series(&small_catalog()[i], n);
        for j in 0..=n {
            let p = s.p(j);
            prop_assert!(p >= ratio(0, 1) && p <= ratio(1, 1));
        }
    }
}
