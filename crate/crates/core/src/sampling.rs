//! Seeded i.i.d. vertex samples with integer-distance-free enforcement.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::spaces::{Point, SpaceDescriptor};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_INTEGER_MARGIN: f64 = 1e-3;
pub const DEFAULT_MAX_REJECTIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_margin")]
    pub integer_margin: f64,
    #[serde(default = "default_rejections")]
    pub max_rejections: usize,
}

fn default_margin() -> f64 {
    DEFAULT_INTEGER_MARGIN
}

fn default_rejections() -> usize {
    DEFAULT_MAX_REJECTIONS
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SampleConfig {
            n,
            seed,
            integer_margin: DEFAULT_INTEGER_MARGIN,
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }

    pub fn with_margin(mut self, eta: f64) -> Self {
        self.integer_margin = eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.integer_margin >= 0.0 && self.integer_margin < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "integer margin {} outside [0, 1/2)",
                self.integer_margin
            )));
        }
        if self.max_rejections == 0 {
            return Err(Error::InvalidConfig("max_rejections must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub space: SpaceDescriptor,
    pub points: Vec<Point>,
    pub config: SampleConfig,
}

/// `true` when `d` is within `eta` of an integer (exact integer when `eta = 0`).
#[inline]
pub fn near_integer(d: f64, eta: f64) -> bool {
    (d - d.round()).abs() <= eta
}

/// One draw from the canonical uniform probability measure of `space`.
pub fn uniform_point<R: Rng + ?Sized>(space: &SpaceDescriptor, rng: &mut R) -> Result<Point> {
    Ok(match space {
        SpaceDescriptor::Circle(c) => c.point(rng.random::<f64>() * c.length),
        SpaceDescriptor::Sphere(s) => loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Ok(p) = s.point(v) {
                break p;
            }
        },
        SpaceDescriptor::FlatTorus(t) => Point(vec![rng.random::<f64>() * t.l1, rng.random::<f64>() * t.l2]),
        SpaceDescriptor::Box(b) => Point(b.sides.iter().map(|s| rng.random::<f64>() * s).collect()),
        SpaceDescriptor::Finite { .. } => {
            return Err(Error::UnsupportedSpace("finite spaces carry no sampling measure".into()))
        }
    })
}

/// Draws `config.n` points; a candidate within the integer margin of any
/// accepted point is redrawn from that point's own substream.
pub fn sample_iid(space: &SpaceDescriptor, config: &SampleConfig) -> Result<SampleSet> {
    space.validate()?;
    config.validate()?;
    let eta = config.integer_margin;
    let mut points: Vec<Point> = Vec::with_capacity(config.n);
    let mut rejections = 0usize;
    for i in 0..config.n {
        let mut rng = substream(config.seed, i as u64);
        loop {
            let cand = uniform_point(space, &mut rng)?;
            let bad = points
                .iter()
                .any(|q| near_integer(space.distance_unchecked(&cand, q), eta));
            if !bad {
                points.push(cand);
                break;
            }
            rejections += 1;
            if rejections >= config.max_rejections {
                return Err(Error::RejectionBudgetExceeded(config.max_rejections));
            }
        }
    }
    Ok(SampleSet {
        space: space.clone(),
        points,
        config: config.clone(),
    })
}

/// Maximum over `probe_count` uniform probes of the distance to the nearest
/// sample point.
pub fn covering_radius(sample: &SampleSet, probe_count: usize, probe_seed: u64) -> Result<f64> {
    if sample.points.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut rng = substream(probe_seed, u64::MAX);
    let probes: Vec<Point> = (0..probe_count)
        .map(|_| uniform_point(&sample.space, &mut rng))
        .collect::<Result<_>>()?;
    let space = &sample.space;
    Ok(probes
        .par_iter()
        .map(|p| {
            sample
                .points
                .iter()
                .map(|q| space.distance_unchecked(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max))
}

/// Pairs `(i, j)` whose distance is within `eta` of an integer.
pub fn integer_margin_violations(space: &SpaceDescriptor, points: &[Point], eta: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if near_integer(space.distance_unchecked(&points[i], &points[j]), eta) {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct SampleFile {
    format_version: u32,
    config: SampleConfig,
    space: SpaceDescriptor,
    points: Vec<Point>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SampleFile {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            space: self.space.clone(),
            points: self.points.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SampleFile = serde_json::from_str(text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format_version {}", f.format_version)));
        }
        f.space.validate()?;
        for p in &f.points {
            f.space.check_point(p)?;
        }
        Ok(SampleSet {
            space: f.space,
            points: f.points,
            config: f.config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(l: f64) -> SpaceDescriptor {
        SpaceDescriptor::circle(l).unwrap()
    }

    #[test]
    fn small_sample_is_reproducible() {
        let cfg = SampleConfig::new(3, 1).with_margin(0.0);
        let a = sample_iid(&circle(5.0), &cfg).unwrap();
        let b = sample_iid(&circle(5.0), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for p in &a.points {
            assert!((0.0..5.0).contains(&p.0[0]));
        }
        assert_ne!(a.points[0], a.points[1]);
    }

    #[test]
    fn margin_enforced() {
        let s = sample_iid(&circle(5.0), &SampleConfig::new(100, 7)).unwrap();
        assert!(integer_margin_violations(&s.space, &s.points, 1e-3).is_empty());
    }

    #[test]
    fn empty_sample() {
        let s = sample_iid(&circle(5.0), &SampleConfig::new(0, 7)).unwrap();
        assert!(s.is_empty());
        assert_eq!(covering_radius(&s, 10, 0), Err(Error::EmptySample));
    }

    #[test]
    fn margin_must_be_below_half() {
        let cfg = SampleConfig::new(3, 1).with_margin(0.5);
        assert!(matches!(sample_iid(&circle(5.0), &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn budget_exhaustion_reported() {
        // Every distance on a circle of length 0.9 is below 1/2 away from 0.
        let mut cfg = SampleConfig::new(5, 1).with_margin(0.45);
        cfg.max_rejections = 50;
        assert_eq!(
            sample_iid(&circle(0.9), &cfg),
            Err(Error::RejectionBudgetExceeded(50))
        );
    }

    #[test]
    fn covering_radius_of_two_points() {
        let c = circle(5.0);
        let s = SampleSet {
            space: c.clone(),
            points: vec![Point(vec![0.0]), Point(vec![2.5])],
            config: SampleConfig::new(2, 0),
        };
        let r = covering_radius(&s, 20_000, 3).unwrap();
        assert!(r <= 1.25 && r > 1.24, "{r}");
        let one = SampleSet {
            points: vec![Point(vec![1.0])],
            ..s
        };
        let r = covering_radius(&one, 20_000, 3).unwrap();
        assert!(r <= 2.5 && r > 2.49, "{r}");
    }

    #[test]
    fn json_round_trip() {
        let s = sample_iid(&SpaceDescriptor::sphere(1.5).unwrap(), &SampleConfig::new(20, 4)).unwrap();
        let text = s.to_json().unwrap();
        assert_eq!(SampleSet::from_json(&text).unwrap(), s);
        assert_eq!(SampleSet::from_json(&text).unwrap().to_json().unwrap(), text);
    }

    #[test]
    fn finite_space_unsupported() {
        let f = SpaceDescriptor::Finite {
            space: crate::metric::RationalMetricSpace::singleton("x"),
        };
        assert!(matches!(
            sample_iid(&f, &SampleConfig::new(1, 0)),
            Err(Error::UnsupportedSpace(_))
        ));
    }
}
