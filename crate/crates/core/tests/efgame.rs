use std::io::Cursor;

use gecgraph::efgame::*;
use gecgraph::{sample_iid, Circle, Error, GeoGraph, SampleConfig, SpaceDescriptor};
use proptest::prelude::*;

fn sampled(n: usize, seed: u64) -> GeoGraph {
    let s = sample_iid(&SpaceDescriptor::circle(5.3).unwrap(), &SampleConfig::new(n, seed).with_margin(1e-6)).unwrap();
    GeoGraph::generate(&s, 0.5, seed + 100).unwrap()
}

/// Drops requested edges that would break the unit threshold.
fn ring(xs: &[f64], edges: &[(usize, usize)]) -> GeoGraph {
    let c = Circle::new(5.3).unwrap();
    let edges: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| c.residue_distance(xs[a], xs[b]) < 1.0).collect();
    GeoGraph::from_edges(xs.len(), &edges, 0.5, 0)
        .unwrap()
        .attach_coordinates(SpaceDescriptor::circle(5.3).unwrap(), xs.iter().map(|&x| c.point(x)).collect())
        .unwrap()
}

#[test]
fn identity_maps_are_elementary() {
    let g = sampled(400, 1);
    let a = CircleGraph::new(&g).unwrap();
    for n in 0..4 {
        let id = PartialMap::from_pairs((0..400).step_by(37).map(|v| (v, v)).collect()).unwrap();
        assert!(is_n_elementary(&a, &a, &id, n).unwrap());
    }
    assert!(PartialMap::from_pairs(vec![(0, 1), (1, 0)]).is_ok());
    assert!(PartialMap::from_pairs(vec![(0, 1), (0, 2)]).is_err());
    assert!(PartialMap::from_pairs(vec![(0, 1), (2, 1)]).is_err());
}

#[test]
fn same_graph_duplicator_wins() {
    let g = sampled(1500, 2);
    let a = CircleGraph::new(&g).unwrap();
    for seed in 0..10 {
        let r = play(&a, &a, 3, 1, &SpoilerPolicy::Random, seed).unwrap();
        assert!(r.won, "seed {seed}: {:?}", r.failure);
    }
}

#[test]
fn one_round_games_are_won() {
    let (g, h) = (sampled(1500, 3), sampled(1500, 4));
    let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
    for seed in 0..20 {
        for policy in [SpoilerPolicy::Random, SpoilerPolicy::Boundary] {
            let r = play(&a, &b, 1, 1, &policy, seed).unwrap();
            assert!(r.won, "seed {seed}: {:?}", r.failure);
            assert_eq!(r.map.len(), 1);
        }
    }
}

#[test]
fn level_bookkeeping() {
    let (g, h) = (sampled(1500, 5), sampled(1500, 6));
    let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
    let mut game = Game::new(&a, &b, 3, 1).unwrap();
    assert_eq!(game.level(), 4);
    for (i, (side, v)) in [(Side::Left, 10), (Side::Right, 700), (Side::Left, 1200)].into_iter().enumerate() {
        let mv = game.step(side, v).unwrap().clone();
        assert_eq!(mv.round, i + 1);
        assert_eq!(mv.level, Some(3 - i as u32));
        assert_eq!(game.level(), 3 - i as u32);
        // The side Spoiler picked on is the one holding `v`.
        let resp = mv.response.unwrap();
        match side {
            Side::Left => assert_eq!(game.map().image(v), Some(resp)),
            Side::Right => assert_eq!(game.map().preimage(v), Some(resp)),
        }
    }
    assert!(game.is_over());
    assert!(game.step(Side::Left, 0).is_err());
    let r = game.finish().unwrap();
    assert!(r.won);
    assert_eq!((r.final_level, r.completed, r.transcript.len()), (1, 3, 3));
    assert!(matches!(Game::new(&a, &b, 0, 1), Err(Error::InvalidConfig(_))));
}

#[test]
fn scripted_spoiler_stops_early() {
    let (g, h) = (sampled(1500, 7), sampled(1500, 8));
    let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
    let r = play(&a, &b, 3, 1, &SpoilerPolicy::Scripted(vec![(Side::Left, 4)]), 0).unwrap();
    assert!(!r.won);
    assert_eq!(r.completed, 1);
    assert!(r.failure.unwrap().contains("stopped after 1 of 3"));
}

#[test]
fn interactive_session() {
    let (g, h) = (sampled(1500, 9), sampled(1500, 10));
    let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
    let input = "bogus\nL 5\nL 999999\nR\nR 3\nquit\nL 7\n";
    let mut out = Vec::new();
    let r = interactive_play(&a, &b, 3, 1, Cursor::new(input), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.matches("invalid input").count(), 3, "{text}");
    assert_eq!(r.completed, 2);
    assert!(!r.won);
    assert!(text.ends_with("duplicator loses\n"));

    let mut out = Vec::new();
    let r = interactive_play(&a, &b, 2, 1, Cursor::new("left 1\nright 2\n"), &mut out).unwrap();
    assert!(r.won, "{:?}", r.failure);
    assert!(String::from_utf8(out).unwrap().ends_with("duplicator wins\n"));
    // End of input behaves like quit.
    let r = interactive_play(&a, &b, 2, 1, Cursor::new("L 1\n"), &mut Vec::new()).unwrap();
    assert_eq!((r.completed, r.won), (1, false));
}

fn small_ring() -> impl Strategy<Value = (Vec<f64>, Vec<(usize, usize)>)> {
    (3usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..5.3, n),
            prop::collection::vec((0..n, 0..n), 0..n * 2),
        )
            .prop_map(|(xs, e)| {
                let edges = e.into_iter().filter(|(a, b)| a < b).collect();
                (xs, edges)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn check_is_transpose_symmetric(
        (xs1, e1) in small_ring(),
        (xs2, e2) in small_ring(),
        picks in prop::collection::vec((0usize..6, 0usize..6), 1..4),
        level in 0u32..3,
    ) {
        let (g, h) = (ring(&xs1, &e1), ring(&xs2, &e2));
        let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
        let mut map = PartialMap::new();
        for (x, y) in picks {
            let _ = map.insert(x % xs1.len(), y % xs2.len());
        }
        let fwd = check_n_elementary(&a, &b, &map, level, 1e9).unwrap();
        let back = check_n_elementary(&b, &a, &map.transpose(), level, 1e9).unwrap();
        prop_assert_eq!(fwd.is_none(), back.is_none());
        let slow = edge_violation(&a, &b, &map).is_none()
            && order_violation_exhaustive(&a, &b, &map, level, 1e9).unwrap().is_none();
        prop_assert_eq!(fwd.is_none(), slow);
        // Higher levels only add conditions.
        if level > 0 && fwd.is_none() {
            prop_assert!(is_n_elementary(&a, &b, &map, level - 1).unwrap());
        }
    }
}
