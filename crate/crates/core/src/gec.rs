//! Finite probes of the g.e.c. property: for a centre `s`, disjoint `A`, `B`
//! inside the unit ball around `s` and a radius `ε`, look for a vertex
//! within `ε` of `s` adjacent to all of `A` and none of `B`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::graphgen::GeoGraph;
use crate::rng::substream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GecProbe {
    pub s: usize,
    #[serde(rename = "A")]
    pub adjacent: Vec<usize>,
    #[serde(rename = "B")]
    pub non_adjacent: Vec<usize>,
    pub epsilon: f64,
}

impl GecProbe {
    pub fn new(s: usize, adjacent: Vec<usize>, non_adjacent: Vec<usize>, epsilon: f64) -> Self {
        GecProbe {
            s,
            adjacent,
            non_adjacent,
            epsilon,
        }
    }

    fn check_shape(&self, n: usize) -> Result<()> {
        for &v in std::iter::once(&self.s).chain(&self.adjacent).chain(&self.non_adjacent) {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, len: n });
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidProbe(format!("epsilon {} must be positive", self.epsilon)));
        }
        if let Some(v) = self.adjacent.iter().find(|v| self.non_adjacent.contains(v)) {
            return Err(Error::InvalidProbe(format!("vertex {v} in both A and B")));
        }
        Ok(())
    }

    /// `true` when `v` realizes the adjacency pattern.
    pub fn matches(&self, graph: &GeoGraph, v: usize) -> bool {
        !self.adjacent.contains(&v)
            && !self.non_adjacent.contains(&v)
            && self.adjacent.iter().all(|&a| graph.adjacent(v, a))
            && self.non_adjacent.iter().all(|&b| !graph.adjacent(v, b))
    }
}

/// Searches the vertices within `ε` of `s`, nearest first.
pub fn find_witness(graph: &GeoGraph, probe: &GecProbe) -> Result<Option<usize>> {
    probe.check_shape(graph.n())?;
    let (space, coords) = graph.geometry().map_err(|_| {
        Error::NotApplicable("distance to s is unavailable without coordinates; supply candidates".into())
    })?;
    let s = &coords[probe.s];
    for &v in probe.adjacent.iter().chain(&probe.non_adjacent) {
        if space.distance_unchecked(s, &coords[v]) >= 1.0 {
            return Err(Error::InvalidProbe(format!("vertex {v} outside the unit ball around s")));
        }
    }
    let mut near: Vec<(f64, usize)> = (0..graph.n())
        .map(|v| (space.distance_unchecked(s, &coords[v]), v))
        .filter(|&(d, _)| d < probe.epsilon)
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(near.into_iter().map(|(_, v)| v).find(|&v| probe.matches(graph, v)))
}

/// Pure-adjacency variant: membership in the unit ball is read from
/// `unit_ball` rows (e.g. a recovered B relation) and the ε-locality is
/// delegated to the caller's ordered candidate list.
pub fn find_witness_among(
    graph: &GeoGraph,
    probe: &GecProbe,
    unit_ball: &[VertexSet],
    candidates: &[usize],
) -> Result<Option<usize>> {
    probe.check_shape(graph.n())?;
    let ball = &unit_ball[probe.s];
    for &v in probe.adjacent.iter().chain(&probe.non_adjacent) {
        if v != probe.s && !ball.contains(v) {
            return Err(Error::InvalidProbe(format!("vertex {v} outside the unit ball around s")));
        }
    }
    Ok(candidates.iter().copied().find(|&v| probe.matches(graph, v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternMix {
    /// Each pattern vertex goes to A or B by a fair coin.
    Mixed,
    AdjacentOnly,
    NonAdjacentOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub trials: usize,
    pub max_pattern: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub mix: PatternMix,
    /// Redraw budget per trial before the trial is dropped.
    pub max_redraws: usize,
}

impl ScoreOptions {
    pub fn new(trials: usize, max_pattern: usize, epsilon: f64, seed: u64) -> Self {
        ScoreOptions {
            trials,
            max_pattern,
            epsilon,
            seed,
            mix: PatternMix::Mixed,
            max_redraws: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub probe: GecProbe,
    pub witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GecScore {
    pub score: f64,
    pub successes: usize,
    /// Trials for which a valid probe could be formed.
    pub formed: usize,
    pub records: Vec<TrialRecord>,
}

/// Draws one probe for trial `trial`, or `None` if the redraw budget runs out.
pub fn draw_probe(graph: &GeoGraph, opts: &ScoreOptions, trial: usize) -> Result<Option<GecProbe>> {
    let (space, coords) = graph.geometry()?;
    let n = graph.n();
    if n == 0 {
        return Ok(None);
    }
    let mut rng = substream(opts.seed, trial as u64);
    for _ in 0..opts.max_redraws.max(1) {
        let s = rng.random_range(0..n);
        let ball: Vec<usize> = (0..n)
            .filter(|&v| v != s && space.distance_unchecked(&coords[s], &coords[v]) < 1.0)
            .collect();
        let k = rng.random_range(1..=opts.max_pattern.max(1));
        if ball.len() < k {
            continue;
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in sample(&mut rng, ball.len(), k) {
            let v = ball[i];
            let to_a = match opts.mix {
                PatternMix::Mixed => rng.random_bool(0.5),
                PatternMix::AdjacentOnly => true,
                PatternMix::NonAdjacentOnly => false,
            };
            if to_a {
                a.push(v);
            } else {
                b.push(v);
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        return Ok(Some(GecProbe::new(s, a, b, opts.epsilon)));
    }
    Ok(None)
}

/// Fraction of random probes with a witness.
pub fn gec_score(graph: &GeoGraph, opts: &ScoreOptions) -> Result<GecScore> {
    let mut records = Vec::with_capacity(opts.trials);
    for trial in 0..opts.trials {
        if let Some(probe) = draw_probe(graph, opts, trial)? {
            let witness = find_witness(graph, &probe)?;
            records.push(TrialRecord { trial, probe, witness });
        }
    }
    let successes = records.iter().filter(|r| r.witness.is_some()).count();
    let formed = records.len();
    Ok(GecScore {
        score: if formed == 0 { 0.0 } else { successes as f64 / formed as f64 },
        successes,
        formed,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Point, SpaceDescriptor};

    fn line_graph(xs: &[f64], edges: &[(usize, usize)]) -> GeoGraph {
        let g = GeoGraph::from_edges(xs.len(), edges, 0.5, 0).unwrap();
        g.attach_coordinates(
            SpaceDescriptor::circle(10.0).unwrap(),
            xs.iter().map(|&x| Point(vec![x])).collect(),
        )
        .unwrap()
    }

    #[test]
    fn unique_witness_found() {
        // s=0 at 1.0; A={1}, B={2}; only vertex 4 is adjacent to 1 and not 2.
        let g = line_graph(&[1.0, 1.5, 1.6, 1.05, 1.02], &[(1, 3), (2, 3), (1, 4), (0, 2)]);
        let probe = GecProbe::new(0, vec![1], vec![2], 0.1);
        assert_eq!(find_witness(&g, &probe).unwrap(), Some(4));
    }

    #[test]
    fn empty_pattern_returns_nearest() {
        let g = line_graph(&[1.0, 1.3, 1.01], &[]);
        let probe = GecProbe::new(0, vec![], vec![], 0.5);
        assert_eq!(find_witness(&g, &probe).unwrap(), Some(0));
    }

    #[test]
    fn exhausted_candidates() {
        let g = line_graph(&[1.0, 1.01, 1.02], &[]);
        let probe = GecProbe::new(0, vec![], vec![0, 1, 2], 0.5);
        assert_eq!(find_witness(&g, &probe).unwrap(), None);
    }

    #[test]
    fn invalid_probes() {
        let g = line_graph(&[1.0, 1.5, 3.0], &[]);
        assert!(matches!(
            find_witness(&g, &GecProbe::new(0, vec![1], vec![1], 0.1)),
            Err(Error::InvalidProbe(_))
        ));
        assert!(matches!(
            find_witness(&g, &GecProbe::new(0, vec![2], vec![], 0.1)),
            Err(Error::InvalidProbe(_))
        ));
        assert!(matches!(
            find_witness(&g.strip_coordinates(), &GecProbe::new(0, vec![], vec![], 0.1)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn score_extremes() {
        let xs: Vec<f64> = (0..12).map(|i| 1.0 + i as f64 * 0.01).collect();
        let mut all = Vec::new();
        for u in 0..12 {
            for v in u + 1..12 {
                all.push((u, v));
            }
        }
        let complete = line_graph(&xs, &all);
        let mut opts = ScoreOptions::new(50, 3, 1.0, 4);
        opts.mix = PatternMix::AdjacentOnly;
        assert_eq!(gec_score(&complete, &opts).unwrap().score, 1.0);
        let empty = line_graph(&xs, &[]);
        assert_eq!(gec_score(&empty, &opts).unwrap().score, 0.0);
    }
}
