use std::f64::consts::PI;

use gecgraph::rng::substream;
use gecgraph::sampling::uniform_point;
use gecgraph::{Circle, Error, Point, SpaceDescriptor};
use proptest::prelude::*;
use rand::Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn p(x: f64) -> Point {
    Point(vec![x])
}

#[test]
fn circle_distance_examples() {
    let c = SpaceDescriptor::circle(5.0).unwrap();
    assert!(close(c.distance(&p(0.5), &p(4.8)).unwrap(), 0.7, 1e-12));
    assert_eq!(c.distance(&p(1.3), &p(1.3)).unwrap(), 0.0);
    assert!(matches!(c.distance(&p(1.0), &Point(vec![1.0, 2.0])), Err(Error::MismatchedSpace(_))));
}

#[test]
fn sphere_antipodes() {
    let s = SpaceDescriptor::sphere(2.0).unwrap();
    let SpaceDescriptor::Sphere(sp) = &s else { unreachable!() };
    let a = sp.point([0.0, 0.0, 1.0]).unwrap();
    let b = sp.point([0.0, 0.0, -1.0]).unwrap();
    assert!(close(s.distance(&a, &b).unwrap(), 2.0 * PI, 1e-12));
}

#[test]
fn circular_order_examples() {
    let c = Circle::new(5.0).unwrap();
    assert!(c.circular_order(&p(1.0), &p(2.0), &p(3.0)).unwrap());
    assert!(!c.circular_order(&p(2.0), &p(1.0), &p(3.0)).unwrap());
    assert!(c.circular_order(&p(4.0), &p(0.5), &p(2.0)).unwrap());
    assert_eq!(c.circular_order(&p(1.0), &p(1.0), &p(3.0)), Err(Error::DegenerateTriple));
}

#[test]
fn shift_examples() {
    let c = Circle::new(5.0).unwrap();
    assert!(close(c.shift(&p(4.0), 2.0).unwrap().0[0], 1.0, 1e-12));
    assert_eq!(c.shift(&p(1.0), 0.0).unwrap(), p(1.0));
    assert!(close(c.shift(&p(1.0), -3.0).unwrap().0[0], 3.0, 1e-12));
}

#[test]
fn lemma_offsets_examples() {
    let c = Circle::new(5.0).unwrap();
    let (d1, d2, e) = c.lemma_offsets(&p(0.0), &p(1.0), &p(3.0)).unwrap();
    assert_eq!((d1, d2), (1.0, 3.0));
    assert!(close(e.0[0], 2.0, 1e-12));
    let (d1, d2, e) = c.lemma_offsets(&p(4.0), &p(0.0), &p(1.0)).unwrap();
    assert_eq!((d1, d2), (1.0, 2.0));
    assert!(close(e.0[0], 0.0, 1e-12));
}

#[test]
fn ball_measures() {
    let c5 = SpaceDescriptor::circle(5.0).unwrap();
    assert_eq!(c5.ball_measure(1.0).unwrap(), 2.0);
    assert_eq!(SpaceDescriptor::circle(3.0).unwrap().ball_measure(2.0).unwrap(), 3.0);
    let s = SpaceDescriptor::sphere(1.0).unwrap();
    // Cap area by midpoint-rule integration of 2π sin θ.
    let steps = 100_000;
    let h = 1.0 / steps as f64;
    let integral: f64 = (0..steps).map(|i| 2.0 * PI * ((i as f64 + 0.5) * h).sin() * h).sum();
    assert!(close(s.ball_measure(1.0).unwrap(), integral, 1e-8));
    assert!(close(integral, 2.8884, 1e-4));
    let b = SpaceDescriptor::boxed(vec![1.0, 1.0]).unwrap();
    assert_eq!(b.ball_measure(1.0), Err(Error::NotUniform));
}

#[test]
fn ball_volume_ratios() {
    assert_eq!(SpaceDescriptor::circle(5.0).unwrap().ball_volume_ratio().unwrap(), 2.5);
    assert_eq!(SpaceDescriptor::circle(2.0).unwrap().ball_volume_ratio().unwrap(), 1.0);
    let s = SpaceDescriptor::sphere(1.0).unwrap();
    assert!(close(s.ball_volume_ratio().unwrap(), 2.0 / (1.0 - 1f64.cos()), 1e-12));
    // 2/(1 − cos 1) = 4.350 69..., quoted to four places as 4.3508.
    assert!(close(s.ball_volume_ratio().unwrap(), 4.3508, 2e-4));
    assert!(close(s.alpha_target().unwrap(), 0.22985, 1e-5));
    assert!(close(SpaceDescriptor::circle(5.0).unwrap().alpha_target().unwrap(), 0.4, 1e-12));
}

#[test]
fn invalid_parameters_rejected() {
    assert!(SpaceDescriptor::circle(0.0).is_err());
    assert!(SpaceDescriptor::sphere(-1.0).is_err());
    assert!(SpaceDescriptor::flat_torus(1.0, f64::NAN).is_err());
}

#[test]
fn triangle_inequality_per_kind() {
    let spaces = [
        SpaceDescriptor::circle(5.3).unwrap(),
        SpaceDescriptor::sphere(1.0).unwrap(),
        SpaceDescriptor::flat_torus(3.0, 4.5).unwrap(),
        SpaceDescriptor::boxed(vec![2.0, 3.0, 1.0]).unwrap(),
    ];
    for (i, s) in spaces.iter().enumerate() {
        let mut rng = substream(i as u64, 7);
        for _ in 0..10_000 {
            let [a, b, c] = [(); 3].map(|_| uniform_point(s, &mut rng).unwrap());
            let (ab, bc, ac) = (s.distance(&a, &b).unwrap(), s.distance(&b, &c).unwrap(), s.distance(&a, &c).unwrap());
            assert!(ac <= ab + bc + 1e-12, "{} {ab} {bc} {ac}", s.kind_name());
            assert_eq!(ab, s.distance(&b, &a).unwrap());
        }
    }
}

#[test]
fn lemma_holds_on_seeded_triples() {
    for (i, len) in [3.0, 5.0, 5.3, 7.25].into_iter().enumerate() {
        let c = Circle::new(len).unwrap();
        let mut rng = substream(i as u64, 11);
        for _ in 0..25_000 {
            let [a, b, e] = [(); 3].map(|_| p(rng.random_range(0.0..len)));
            let Ok(order) = c.circular_order(&a, &b, &e) else { continue };
            let (d1, d2, m) = c.lemma_offsets(&a, &b, &e).unwrap();
            assert_eq!(order, 0.0 < d1 && d1 < d2);
            assert_eq!(order, c.circular_order(&a, &m, &e).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn exactly_one_orientation(len in 2.5f64..10.0, x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
        let c = Circle::new(len).unwrap();
        let (a, b, e) = (p(x * len), p(y * len), p(z * len));
        if let (Ok(f), Ok(g)) = (c.circular_order(&a, &b, &e), c.circular_order(&a, &e, &b)) {
            prop_assert!(f != g);
            prop_assert_eq!(f, c.circular_order(&b, &e, &a).unwrap());
        }
    }

    #[test]
    fn shift_respects_order(len in 2.5f64..10.0, x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0, w in -20.0f64..20.0) {
        let c = Circle::new(len).unwrap();
        let pts = [p(x * len), p(y * len), p(z * len)];
        let shifted: Vec<Point> = pts.iter().map(|q| c.shift(q, w).unwrap()).collect();
        if let (Ok(before), Ok(after)) = (
            c.circular_order(&pts[0], &pts[1], &pts[2]),
            c.circular_order(&shifted[0], &shifted[1], &shifted[2]),
        ) {
            // Rounding in the shift can only matter for nearly coincident points.
            let gap = [(0, 1), (1, 2), (0, 2)].iter().map(|&(i, j)| c.residue_distance(pts[i].0[0], pts[j].0[0])).fold(f64::INFINITY, f64::min);
            if gap > 1e-9 {
                prop_assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn shift_round_trip(len in 0.5f64..10.0, x in 0.0f64..1.0, z in -50.0f64..50.0) {
        let c = Circle::new(len).unwrap();
        let a = p(x * len);
        let back = c.shift(&c.shift(&a, z).unwrap(), -z).unwrap();
        prop_assert!(c.residue_distance(back.0[0], a.0[0]) < 1e-9);
        prop_assert!((0.0..len).contains(&back.0[0]));
    }

    #[test]
    fn ball_measure_monotone_continuous(r in 0.05f64..3.0, kind in 0usize..3) {
        let s = [
            SpaceDescriptor::circle(5.0).unwrap(),
            SpaceDescriptor::sphere(1.0).unwrap(),
            SpaceDescriptor::flat_torus(3.0, 4.0).unwrap(),
        ][kind].clone();
        let m = s.ball_measure(r).unwrap();
        let mut prev_gap = f64::INFINITY;
        for k in 1..12 {
            let d = 2f64.powi(-k);
            let up = s.ball_measure(r + d).unwrap();
            prop_assert!(up >= m);
            let gap = up - m;
            prop_assert!(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        prop_assert!(prev_gap < 0.01);
    }
}
