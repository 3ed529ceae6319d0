use gecgraph::sampling::{covering_radius, integer_margin_violations};
use gecgraph::{sample_iid, Error, Point, SampleConfig, SampleSet, SpaceDescriptor};

fn circle(len: f64) -> SpaceDescriptor {
    SpaceDescriptor::circle(len).unwrap()
}

#[test]
fn small_sample_is_reproducible() {
    let cfg = SampleConfig::new(3, 1).with_margin(0.0);
    let a = sample_iid(&circle(5.0), &cfg).unwrap();
    let b = sample_iid(&circle(5.0), &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let xs: Vec<f64> = a.points.iter().map(|p| p.0[0]).collect();
    assert!(xs.iter().all(|x| (0.0..5.0).contains(x)));
    assert!(xs[0] != xs[1] && xs[1] != xs[2] && xs[0] != xs[2]);
}

#[test]
fn margin_is_enforced() {
    let s = sample_iid(&circle(5.0), &SampleConfig::new(100, 7).with_margin(1e-3)).unwrap();
    // Independent pass: every pairwise distance keeps off {0, 1, 2} by more
    // than the margin.
    for i in 0..100 {
        for j in i + 1..100 {
            let (x, y) = (s.points[i].0[0], s.points[j].0[0]);
            let d = (x - y).abs().min(5.0 - (x - y).abs());
            for k in [0.0, 1.0, 2.0] {
                assert!((d - k).abs() > 1e-3, "pair ({i},{j}) at {d}");
            }
        }
    }
    assert!(integer_margin_violations(&s.space, &s.points, 1e-3).is_empty());
}

#[test]
fn empty_and_invalid_configs() {
    let s = sample_iid(&circle(5.0), &SampleConfig::new(0, 1)).unwrap();
    assert!(s.is_empty());
    let mut cfg = SampleConfig::new(10, 1);
    cfg.integer_margin = 0.5;
    assert!(matches!(sample_iid(&circle(5.0), &cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn rejection_budget_is_reported() {
    let mut cfg = SampleConfig::new(500, 3).with_margin(0.45);
    cfg.max_rejections = 50;
    assert_eq!(sample_iid(&circle(5.0), &cfg), Err(Error::RejectionBudgetExceeded(50)));
}

#[test]
fn sample_round_trips() {
    let s = sample_iid(&SpaceDescriptor::sphere(1.0).unwrap(), &SampleConfig::new(50, 9)).unwrap();
    let back = SampleSet::from_json(&s.to_json().unwrap()).unwrap();
    assert_eq!(s, back);
}

fn fixed(points: &[f64]) -> SampleSet {
    SampleSet {
        space: circle(5.0),
        points: points.iter().map(|&x| Point(vec![x])).collect(),
        config: SampleConfig::new(points.len(), 0),
    }
}

#[test]
fn covering_radius_examples() {
    let two = covering_radius(&fixed(&[0.0, 2.5]), 20_000, 1).unwrap();
    assert!((two - 1.25).abs() < 0.01, "{two}");
    let one = covering_radius(&fixed(&[1.0]), 20_000, 1).unwrap();
    assert!((one - 2.5).abs() < 0.01, "{one}");
    let dense = sample_iid(&circle(5.0), &SampleConfig::new(2000, 4).with_margin(1e-6)).unwrap();
    assert!(covering_radius(&dense, 2000, 5).unwrap() < 0.05);
    assert_eq!(covering_radius(&fixed(&[]), 10, 1), Err(Error::EmptySample));
}

#[test]
fn density_improves_with_n() {
    let mut better = 0;
    for seed in 0..40u64 {
        let small = sample_iid(&circle(5.0), &SampleConfig::new(500, seed).with_margin(1e-6)).unwrap();
        let large = sample_iid(&circle(5.0), &SampleConfig::new(4000, seed + 1000).with_margin(1e-6)).unwrap();
        if covering_radius(&large, 500, seed).unwrap() < covering_radius(&small, 500, seed).unwrap() {
            better += 1;
        }
    }
    assert!(better >= 38, "{better}/40");
}
