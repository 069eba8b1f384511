use std::collections::BTreeMap;

use forge_core::mixture::{build_mixture, CorpusIndex, IndexEntry, MixtureSpec, Strategy};
use forge_core::Execution;
use proptest::prelude::*;

fn index_from(lens: &[(u8, u64)]) -> CorpusIndex {
    CorpusIndex::new(
        lens.iter()
            .enumerate()
            .map(|(i, &(d, n))| IndexEntry {
                id: format!("d{i}"),
                domain: format!("dom{}", d % 3),
                token_count: n,
            })
            .collect(),
    )
}

fn corpus() -> impl proptest::strategy::Strategy<Value = Vec<(u8, u64)>> {
    prop::collection::vec((0u8..3, prop_oneof![1u64..64, 65u64..600]), 10..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn same_seed_same_draws(lens in corpus(), seed in any::<u64>()) {
        let index = index_from(&lens);
        let mut spec = MixtureSpec::new(Strategy::PerSourceUpsample, 5_000, seed);
        spec.long_threshold = 64;
        let a = build_mixture(&index, &spec, Execution::Parallel).unwrap();
        let b = build_mixture(&index, &spec, Execution::Sequential).unwrap();
        prop_assert_eq!(a.draws, b.draws);
    }

    #[test]
    fn cut_never_exceeds_cut_len(lens in corpus(), seed in any::<u64>()) {
        let index = index_from(&lens);
        let mut spec = MixtureSpec::new(Strategy::Cut4k, 5_000, seed);
        spec.cut_len = Some(64);
        let ds = build_mixture(&index, &spec, Execution::Parallel).unwrap();
        prop_assert!(ds.draws.iter().all(|d| d.len() <= 64 && !d.is_empty()));
    }

    #[test]
    fn per_source_domain_budgets_are_met(lens in corpus(), seed in any::<u64>()) {
        let index = index_from(&lens);
        let mut spec = MixtureSpec::new(Strategy::PerSourceUpsample, 20_000, seed);
        spec.long_threshold = 64;
        let ds = build_mixture(&index, &spec, Execution::Parallel).unwrap();
        let mut by_domain: BTreeMap<&str, u64> = BTreeMap::new();
        for d in &ds.draws {
            *by_domain.entry(d.domain.as_str()).or_default() += d.len();
        }
        for s in &ds.strata {
            // every stratum with units stops within one unit of its quota
            if s.units > 0 {
                prop_assert!(s.realized >= s.budget);
                prop_assert!(s.realized < s.budget + s.max_unit_len.max(1));
            }
        }
        let total: u64 = by_domain.values().sum();
        prop_assert_eq!(total, ds.overall().tokens());
    }
}
