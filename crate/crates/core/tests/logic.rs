use std::collections::HashMap;

use gecgraph::logic::{define_set, evaluate, parse, Evaluator, Formula, StructureView, Term};
use gecgraph::recovery::recover_b;
use gecgraph::{sample_iid, Circle, GeoGraph, SampleConfig, SpaceDescriptor, VertexSet};
use proptest::prelude::*;

const VARS: [&str; 4] = ["x", "y", "z", "w"];

fn var() -> impl Strategy<Value = Term> {
    prop::sample::select(&VARS[..]).prop_map(|v| Term::Var(v.to_string()))
}

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        (var(), var()).prop_map(|(a, b)| Formula::E(a, b)),
        (var(), var()).prop_map(|(a, b)| Formula::B(a, b)),
        (var(), var()).prop_map(|(a, b)| Formula::Eq(a, b)),
        ([-3i64..=3, -3i64..=3, -3i64..=3], var(), var(), var()).prop_map(|(s, a, b, c)| Formula::C(s, [a, b, c])),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(6, 64, 2, |inner| {
        let name = prop::sample::select(&VARS[..]).prop_map(str::to_string);
        prop_oneof![
            inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            (name.clone(), inner.clone()).prop_map(|(v, f)| Formula::Exists(v, Box::new(f))),
            (name, inner).prop_map(|(v, f)| Formula::Forall(v, Box::new(f))),
        ]
    })
}

fn rows(n: usize, mask: &[bool]) -> Vec<VertexSet> {
    let mut r = vec![VertexSet::new(n); n];
    let mut i = 0;
    for a in 0..n {
        for b in a + 1..n {
            if mask[i] {
                r[a].insert(b);
                r[b].insert(a);
            }
            i += 1;
        }
    }
    r
}

fn structure() -> impl Strategy<Value = (usize, Vec<VertexSet>, Vec<VertexSet>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| {
        let m = n * (n - 1) / 2;
        (
            Just(n),
            prop::collection::vec(any::<bool>(), m),
            prop::collection::vec(any::<bool>(), m),
            prop::collection::vec(0.0f64..5.3, n),
        )
            .prop_map(|(n, e, b, xs)| (n, rows(n, &e), rows(n, &b), xs))
    })
}

fn full_env(n: usize, seed: usize) -> HashMap<String, usize> {
    VARS.iter().enumerate().map(|(i, v)| (v.to_string(), (seed + 3 * i) % n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_parse_round_trip(f in formula()) {
        prop_assert_eq!(parse(&f.to_source()).unwrap(), f);
    }

    #[test]
    fn quantifier_and_de_morgan_dualities(f in formula(), g in formula(), (n, e, b, xs) in structure(), seed in 0usize..100) {
        let c = Circle::new(5.3).unwrap();
        let order = move |s: [i64; 3], x: usize, y: usize, z: usize| {
            Circle::order_residues(c.shift_residue(xs[x], s[0]), c.shift_residue(xs[y], s[1]), c.shift_residue(xs[z], s[2]))
        };
        let view = StructureView::graph(&e).with_b(&b).with_order(&order);
        let env = full_env(n, seed);
        let not = |f: Formula| Formula::Not(Box::new(f));
        let ev = |f: &Formula| evaluate(&view, f, &env).unwrap();
        let lhs = not(Formula::Exists("x".into(), Box::new(f.clone())));
        let rhs = Formula::Forall("x".into(), Box::new(not(f.clone())));
        prop_assert_eq!(ev(&lhs), ev(&rhs));
        let lhs = not(Formula::And(Box::new(f.clone()), Box::new(g.clone())));
        let rhs = Formula::Or(Box::new(not(f.clone())), Box::new(not(g.clone())));
        prop_assert_eq!(ev(&lhs), ev(&rhs));
        let imp = Formula::Implies(Box::new(f.clone()), Box::new(g.clone()));
        prop_assert_eq!(ev(&imp), !ev(&f) || ev(&g));
    }
}

/// x ∈ N_2(v) ∧ ∀z (E(x,z) → z ∈ N_2(v)) on a fixed 6-vertex graph, against
/// a truth table built from adjacency-matrix products.
#[test]
fn unit_ball_formula_truth_table() {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3), (4, 5)];
    let n = 6;
    let mut adj = [[false; 6]; 6];
    for &(a, b) in &edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let n2 = |v: usize, x: usize| adj[v][x] || (0..n).any(|w| adj[v][w] && adj[w][x]);
    let g = GeoGraph::from_edges(n, &edges, 0.5, 0).unwrap();
    let view = StructureView::graph(g.rows());
    let f = parse("def N2(v, x) := E(v, x) | exists w (E(v, w) & E(w, x)); N2(v, x) & forall z (E(x, z) -> N2(v, z))").unwrap();
    let ev = Evaluator::new(&view, &f).unwrap();
    for v in 0..n {
        for x in 0..n {
            let want = n2(v, x) && (0..n).all(|z| !adj[x][z] || n2(v, z));
            let env = HashMap::from([("v".to_string(), v), ("x".to_string(), x)]);
            assert_eq!(ev.eval(&env).unwrap(), want, "v={v} x={x}");
        }
    }
}

/// The interval formula over recovered B against coordinate arcs.
#[test]
fn interval_formula_matches_arcs() {
    let len = 6.0;
    let c = Circle::new(len).unwrap();
    let s = sample_iid(&SpaceDescriptor::circle(len).unwrap(), &SampleConfig::new(2000, 3).with_margin(1e-6)).unwrap();
    let g = GeoGraph::generate(&s, 0.5, 3).unwrap();
    let b = recover_b(&g.strip_coordinates());
    let xs: Vec<f64> = s.points.iter().map(|p| p.0[0]).collect();
    let f = parse("const a, c; forall v ((B(v, a) & B(v, c)) -> (B(x, v) | x = v))").unwrap();
    let (mut ok, mut total) = (0usize, 0usize);
    for a in (0..2000).step_by(97).take(8) {
        let Some(cc) = b.row(a).iter().find(|&v| c.residue_distance(xs[a], xs[v]) > 0.5) else {
            continue;
        };
        let view = StructureView::graph(g.rows()).with_b(b.rows());
        let set = define_set(&view, &f, &HashMap::from([("a".to_string(), a), ("c".to_string(), cc)])).unwrap();
        // The short arc from a to c, whichever way round it runs.
        let (lo, span) = if (xs[cc] - xs[a]).rem_euclid(len) < len / 2.0 {
            (xs[a], (xs[cc] - xs[a]).rem_euclid(len))
        } else {
            (xs[cc], (xs[a] - xs[cc]).rem_euclid(len))
        };
        for x in 0..2000 {
            let off = (xs[x] - lo).rem_euclid(len);
            let near_end = [xs[a], xs[cc]].iter().any(|&e| c.residue_distance(xs[x], e) < 0.05);
            if near_end {
                continue;
            }
            total += 1;
            if set.contains(x) == (off < span) {
                ok += 1;
            }
        }
    }
    assert!(total > 0 && ok as f64 >= 0.99 * total as f64, "{ok}/{total}");
}
