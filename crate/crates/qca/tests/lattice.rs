use proptest::prelude::*;
use qca::lattice::*;
use std::collections::BTreeSet;

#[test]
fn neighbourhood_sizes() {
    assert_eq!(von_neumann_neighborhood(1), vec![vec![0], vec![1], vec![-1]]);
    assert_eq!(von_neumann_neighborhood(2).len(), 5);
    assert_eq!(von_neumann_neighborhood(3).len(), 7);
    assert_eq!(von_neumann_neighborhood(2)[3], vec![0, 1]);
}

#[test]
fn cone_sizes_match_closed_form_and_enumeration() {
    for (s, t, n) in [(2, 1, 5), (2, 2, 13), (2, 3, 25), (3, 2, 25), (2, 0, 1), (1, 3, 7)] {
        assert_eq!(cone_size(s, t), n, "s={s} t={t}");
        let spec = LatticeSpec::cubic(s, 2 * t + 2).unwrap();
        let cone = future_cone(&vec![0; s], t, &spec).unwrap();
        assert_eq!(cone.len() as u64, n);
        assert_eq!(cone.iter().collect::<BTreeSet<_>>().len(), cone.len());
    }
}

#[test]
fn cone_is_monotone_in_t() {
    let spec = LatticeSpec::cubic(2, 8).unwrap();
    for t in 0..3 {
        let a: BTreeSet<usize> = future_cone(&[3, 5], t, &spec).unwrap().into_iter().collect();
        let b: BTreeSet<usize> = future_cone(&[3, 5], t + 1, &spec).unwrap().into_iter().collect();
        assert!(a.is_subset(&b));
    }
}

#[test]
fn wrapping_cone_is_reported() {
    let spec = LatticeSpec::cubic(2, 4).unwrap();
    assert!(future_cone(&[0, 0], 2, &spec).is_err());
    assert!(future_cone(&[0, 0], 1, &spec).is_ok());
}

#[test]
fn quadrants_in_one_and_two_dimensions() {
    let q1 = quadrants(1);
    assert_eq!(q1.len(), 2);
    let sets: Vec<BTreeSet<Coord>> = q1.iter().map(|(_, s)| s.iter().cloned().collect()).collect();
    assert!(sets.contains(&[vec![-1], vec![0]].into_iter().collect()));
    assert!(sets.contains(&[vec![1], vec![2]].into_iter().collect()));

    let q2 = quadrants(2);
    assert_eq!(q2.len(), 4);
    assert!(q2.iter().all(|(_, s)| s.len() == 4));
    assert_eq!(r_set(2, 0).len(), 2);
    assert!(r_set(2, 0).iter().all(|q| q[0] == -1));
}

#[test]
fn quadrants_are_disjoint_and_tile_the_expanded_cell() {
    for s in 1..=3 {
        let mut seen = BTreeSet::new();
        for (_, sites) in quadrants(s) {
            for x in sites {
                assert!(seen.insert(x), "quadrants overlap for s={s}");
            }
        }
        assert_eq!(seen.len(), 1 << (2 * s));
        // every coordinate lies in {-1, ..., 2}
        assert!(seen.iter().all(|x| x.iter().all(|&c| (-1..=2).contains(&c))));
    }
}

#[test]
fn margolus_partitions_cover_the_lattice() {
    let spec = LatticeSpec::new(vec![4, 4]).unwrap();
    for q in sign_vectors(2) {
        let (a, b) = margolus_partitions(&spec, &q).unwrap();
        for part in [&a, &b] {
            assert_eq!(part.len(), 4);
            assert!(part.iter().all(|blk| blk.len() == 4));
            let all: BTreeSet<usize> = part.iter().flatten().copied().collect();
            assert_eq!(all.len(), 16);
        }
    }
}

#[test]
fn one_dimensional_margolus_blocks() {
    let spec = LatticeSpec::new(vec![6]).unwrap();
    let (a, b) = margolus_partitions(&spec, &[1]).unwrap();
    let norm = |p: Vec<Vec<usize>>| -> BTreeSet<BTreeSet<usize>> {
        p.into_iter().map(|b| b.into_iter().collect()).collect()
    };
    let want_a = norm(vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
    let want_b = norm(vec![vec![1, 2], vec![3, 4], vec![5, 0]]);
    assert_eq!(norm(a), want_a);
    assert_eq!(norm(b), want_b);
}

#[test]
fn odd_extent_is_rejected_for_margolus() {
    let spec = LatticeSpec::new(vec![3, 4]).unwrap();
    assert!(margolus_partitions(&spec, &[1, 1]).is_err());
}

proptest! {
    #[test]
    fn flatten_roundtrip(ext in prop::collection::vec(1usize..6, 1..4), seed in 0usize..10_000) {
        let spec = LatticeSpec::new(ext).unwrap();
        let idx = seed % spec.site_count();
        prop_assert_eq!(spec.flatten(&spec.unflatten(idx)), idx);
    }

    #[test]
    fn wrap_is_periodic(ext in prop::collection::vec(1usize..6, 2..3), x in -20i64..20, y in -20i64..20) {
        let spec = LatticeSpec::new(ext.clone()).unwrap();
        let shifted = [x + ext[0] as i64, y - 3 * ext[1] as i64];
        prop_assert_eq!(spec.wrap(&[x, y]), spec.wrap(&shifted));
    }
}
