use proptest::prelude::*;
use theta_normality::polarization::enumerate_types;

/// Independent generator: every tuple with product in range, filtered by the
/// divisibility chain condition.
fn chains(g: usize, lo: u64, hi: u64) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..g {
        out = out
            .into_iter()
            .flat_map(|p| {
                let product: u64 = p.iter().product();
                (1..=hi / product).map(move |d| [p.clone(), vec![d]].concat())
            })
            .collect();
    }
    out.retain(|d| {
        let h0: u64 = d.iter().product();
        h0 >= lo && d.windows(2).all(|w| w[1] % w[0] == 0)
    });
    out.sort_by_key(|d| (d.iter().product::<u64>(), d.clone()));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_exhaustive_search(g in 1usize..=4, lo in 1u64..=200, span in 0u64..=200) {
        let hi = lo + span;
        let got: Vec<Vec<u64>> = enumerate_types(g, lo, hi).unwrap().iter().map(|d| d.divisors().to_vec()).collect();
        prop_assert_eq!(got, chains(g, lo, hi));
    }
}

#[test]
fn output_is_sorted_and_duplicate_free() {
    let types = enumerate_types(4, 31, 384).unwrap();
    for pair in types.windows(2) {
        assert!((pair[0].h0(), pair[0].divisors()) < (pair[1].h0(), pair[1].divisors()));
    }
    assert_eq!(types.len(), 699);
}
