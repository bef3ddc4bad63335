use std::collections::HashSet;

use proptest::prelude::*;

use loose3::absorbing::{build_absorber_family, minimal_instance, validate_tuple};
use loose3::embedder::{exact_embed, has_perfect_matching, tree_perfect_matching, EmbedQuery, EmbedStatus};
use loose3::loose_tree::random_loose_tree;
use loose3::regularity::{find_tight_hamilton_cycle, reduced_graph, synthetic_regular_host, DensityMap, PlantedSpec, ReducedGraph};
use loose3::{verify_embedding, Hypergraph3, Rational};

fn host_from_bits(n: usize, bits: &[bool]) -> Hypergraph3 {
    let mut it = bits.iter().copied();
    Hypergraph3::from_predicate(n, |_, _, _| it.next().unwrap_or(false))
}

fn triples(n: usize) -> usize {
    n * (n - 1) * (n - 2) / 6
}

/// A random tree and host on the same odd vertex count, plus extra edges to add.
fn tree_and_hosts() -> impl Strategy<Value = (usize, u64, Vec<bool>, Vec<bool>)> {
    prop_oneof![Just(5usize), Just(7), Just(9)].prop_flat_map(|n| {
        let k = triples(n);
        (
            Just(n),
            any::<u64>(),
            proptest::collection::vec(proptest::bool::weighted(0.35), k),
            proptest::collection::vec(proptest::bool::weighted(0.2), k),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_search_is_monotone_and_sound((n, seed, base, extra) in tree_and_hosts()) {
        let tree = random_loose_tree(n, 3, seed).unwrap();
        let h = host_from_bits(n, &base);
        let both: Vec<bool> = base.iter().zip(&extra).map(|(a, b)| *a || *b).collect();
        let bigger = host_from_bits(n, &both);
        let r = exact_embed(&EmbedQuery::new(&tree, &h)).unwrap();
        let rb = exact_embed(&EmbedQuery::new(&tree, &bigger)).unwrap();
        prop_assert_ne!(r.status, EmbedStatus::BudgetExhausted);
        if r.status == EmbedStatus::Found {
            let e = r.embedding.as_ref().unwrap();
            prop_assert!(verify_embedding(e, tree.graph(), &h));
            prop_assert_eq!(rb.status, EmbedStatus::Found);
            // A tree matching maps onto a host matching.
            if tree_perfect_matching(&tree).is_some() {
                prop_assert!(has_perfect_matching(&h));
            }
        }
        if rb.status == EmbedStatus::Found {
            prop_assert!(verify_embedding(rb.embedding.as_ref().unwrap(), tree.graph(), &bigger));
        }
    }

    #[test]
    fn raising_alpha_only_removes_triples(seed in any::<u64>(), lo in 0u64..6, step in 0u64..5) {
        let spec = PlantedSpec {
            t: 5,
            m: 5,
            exceptional: 0,
            densities: DensityMap::Consecutive { dense: 0.7, sparse: 0.3 },
            noise: 0.5,
        };
        let (h, p) = synthetic_regular_host(&spec, seed).unwrap();
        let eps = Rational::new(1, 2);
        let a = Rational::new(lo as i64, 10);
        let b = Rational::new((lo + step) as i64, 10);
        let ra = reduced_graph(&h, &p, &eps, &a, 20, seed).unwrap();
        let rb = reduced_graph(&h, &p, &eps, &b, 20, seed).unwrap();
        let kept: HashSet<[usize; 3]> = ra.triples.iter().copied().collect();
        for t in &rb.triples {
            prop_assert!(kept.contains(t));
        }
        for d in &rb.densities {
            prop_assert!(*d >= b);
        }
    }

    #[test]
    fn found_cycles_verify(t in 3usize..8, bits in proptest::collection::vec(proptest::bool::weighted(0.6), 35)) {
        let all: Vec<[usize; 3]> = (0..t)
            .flat_map(|a| (a + 1..t).flat_map(move |b| (b + 1..t).map(move |c| [a, b, c])))
            .collect();
        let chosen = all.iter().zip(&bits).filter(|(_, k)| **k).map(|(x, _)| *x);
        let r = ReducedGraph::from_triples(t, chosen);
        if let Some(c) = find_tight_hamilton_cycle(&r).unwrap() {
            prop_assert_eq!(c.len(), t);
            prop_assert!(r.verifies_cycle(&c));
        }
        let full = ReducedGraph::from_triples(t, all.iter().copied());
        let c = find_tight_hamilton_cycle(&full).unwrap();
        prop_assert!(c.is_some_and(|c| full.verifies_cycle(&c)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn family_members_are_valid_and_disjoint(seed in any::<u64>(), d in 1usize..3) {
        let inst = minimal_instance(seed);
        let fam = build_absorber_family(&inst.host, d, 1, seed);
        let mut seen = HashSet::new();
        for tuple in &fam.tuples {
            prop_assert_eq!(validate_tuple(&inst.host, tuple), Ok(()));
            for v in tuple.vertices() {
                prop_assert!(seen.insert(v), "vertex {} in two tuples", v);
            }
        }
        prop_assert!(fam.shortfalls.iter().all(|s| s.count < fam.quota));
    }
}
