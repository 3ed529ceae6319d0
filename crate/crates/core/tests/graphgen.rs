use std::collections::BTreeSet;

use gecgraph::{sample_iid, GeoGraph, NeighborhoodCache, Point, SampleConfig, SampleSet, SpaceDescriptor};
use proptest::prelude::*;

fn two_points(d: f64) -> SampleSet {
    SampleSet {
        space: SpaceDescriptor::circle(5.0).unwrap(),
        points: vec![Point(vec![0.0]), Point(vec![d])],
        config: SampleConfig::new(2, 0),
    }
}

#[test]
fn far_pairs_never_join() {
    for seed in 0..500 {
        assert_eq!(GeoGraph::generate(&two_points(1.7), 0.99, seed).unwrap().edge_count(), 0);
    }
}

#[test]
fn near_pair_frequency_matches_p() {
    let sample = two_points(0.3);
    let hits = (0..10_000u64).filter(|&s| GeoGraph::generate(&sample, 0.5, s).unwrap().adjacent(0, 1)).count();
    assert!((hits as f64 / 1e4 - 0.5).abs() < 0.02, "{hits}");
}

#[test]
fn edge_coins_are_uncorrelated() {
    let sample = SampleSet {
        space: SpaceDescriptor::circle(5.0).unwrap(),
        points: vec![Point(vec![0.0]), Point(vec![0.3]), Point(vec![0.6])],
        config: SampleConfig::new(3, 0),
    };
    let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
    let n = 1000.0;
    for s in 0..1000u64 {
        let g = GeoGraph::generate(&sample, 0.5, s).unwrap();
        let (x, y) = (g.adjacent(0, 1) as u8 as f64, g.adjacent(1, 2) as u8 as f64);
        a += x;
        b += y;
        ab += x * y;
    }
    let cov = ab / n - (a / n) * (b / n);
    let corr = cov / ((a / n) * (1.0 - a / n) * (b / n) * (1.0 - b / n)).sqrt();
    assert!(corr.abs() < 0.05, "{corr}");
}

#[test]
fn singleton_graph() {
    let s = sample_iid(&SpaceDescriptor::circle(5.0).unwrap(), &SampleConfig::new(1, 1)).unwrap();
    let g = GeoGraph::generate(&s, 0.5, 1).unwrap();
    assert_eq!((g.n(), g.edge_count()), (1, 0));
}

#[test]
fn sampled_graphs_respect_threshold() {
    for (i, space) in [
        SpaceDescriptor::circle(5.3).unwrap(),
        SpaceDescriptor::sphere(1.0).unwrap(),
        SpaceDescriptor::flat_torus(3.0, 3.0).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let s = sample_iid(space, &SampleConfig::new(800, i as u64)).unwrap();
        let g = GeoGraph::generate(&s, 0.5, 3).unwrap();
        assert!(g.unit_threshold_violations().is_empty());
        for (u, v) in g.edges() {
            assert!(space.distance(&s.points[u], &s.points[v]).unwrap() < 1.0);
            assert!(g.adjacent(v, u) && u != v);
        }
    }
}

#[test]
fn neighbourhood_examples() {
    let path = GeoGraph::from_edges(3, &[(0, 1), (1, 2)], 0.5, 0).unwrap();
    assert_eq!(path.neighbors_k(0, 1).unwrap().to_vec(), vec![1]);
    let iso = GeoGraph::from_edges(3, &[(0, 1)], 0.5, 0).unwrap();
    for k in 1..4 {
        assert!(iso.neighbors_k(2, k).unwrap().is_empty());
    }
    let tri = GeoGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], 0.5, 0).unwrap();
    assert_eq!(tri.neighbors_k(0, 2).unwrap().to_vec(), vec![0, 1, 2]);
    assert!(path.neighbors_k(5, 1).is_err());
}

#[test]
fn strip_and_reattach() {
    let s = sample_iid(&SpaceDescriptor::circle(5.0).unwrap(), &SampleConfig::new(300, 2)).unwrap();
    let g = GeoGraph::generate(&s, 0.5, 2).unwrap();
    let bare = g.strip_coordinates();
    assert!(!bare.has_coordinates());
    assert_eq!(bare.edges(), g.edges());
    let again = bare.attach_coordinates(s.space.clone(), s.points.clone()).unwrap();
    assert_eq!(again.edges(), g.edges());
    assert!(bare.to_json(None).unwrap().len() < g.to_json(None).unwrap().len());
}

#[test]
fn graph_file_round_trip() {
    let s = sample_iid(&SpaceDescriptor::circle(5.3).unwrap(), &SampleConfig::new(200, 5)).unwrap();
    let g = GeoGraph::generate(&s, 0.5, 8).unwrap();
    let cfg = serde_json::json!({"n": 200});
    let (back, echoed) = GeoGraph::from_json_with_config(&g.to_json(Some(cfg.clone())).unwrap()).unwrap();
    assert_eq!(back, g);
    assert_eq!(echoed, Some(cfg));
}

/// Walks of length 1..=k with repeats, by layered reachability.
fn brute_nk(n: usize, edges: &BTreeSet<(usize, usize)>, v: usize, k: usize) -> BTreeSet<usize> {
    let adj = |a: usize, b: usize| edges.contains(&(a.min(b), a.max(b)));
    let mut out = BTreeSet::new();
    let mut frontier: BTreeSet<usize> = [v].into();
    for _ in 0..k {
        frontier = (0..n).filter(|&y| frontier.iter().any(|&x| adj(x, y))).collect();
        out.extend(&frontier);
    }
    out
}

fn small_graph() -> impl Strategy<Value = (usize, BTreeSet<(usize, usize)>)> {
    (1usize..=12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        (Just(n), proptest::collection::vec(any::<bool>(), m)).prop_map(move |(n, keep)| {
            (n, pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect())
        })
    })
}

proptest! {
    #[test]
    fn neighbors_k_matches_path_search((n, edges) in small_graph(), k in 1usize..5) {
        let list: Vec<(usize, usize)> = edges.iter().copied().collect();
        let g = GeoGraph::from_edges(n, &list, 0.5, 0).unwrap();
        let cache = NeighborhoodCache::new(&g, 4);
        for v in 0..n {
            let got: BTreeSet<usize> = g.neighbors_k(v, k).unwrap().iter().collect();
            prop_assert_eq!(&got, &brute_nk(n, &edges, v, k));
            if k <= 4 {
                let cached: BTreeSet<usize> = cache.get(v, k).iter().collect();
                prop_assert_eq!(&cached, &got);
            }
            if k > 1 {
                prop_assert!(g.neighbors_k(v, k - 1).unwrap().is_subset(&g.neighbors_k(v, k).unwrap()));
            }
        }
    }

    #[test]
    fn generation_is_deterministic(seed in 0u64..1000, n in 1usize..80) {
        let s = sample_iid(&SpaceDescriptor::circle(4.0).unwrap(), &SampleConfig::new(n, seed)).unwrap();
        let a = GeoGraph::generate(&s, 0.5, seed).unwrap();
        let b = GeoGraph::generate(&s, 0.5, seed).unwrap();
        prop_assert_eq!(a.to_json(None).unwrap(), b.to_json(None).unwrap());
        prop_assert!(a.unit_threshold_violations().is_empty());
    }
}
