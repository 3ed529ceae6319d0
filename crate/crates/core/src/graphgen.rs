//! Unit-threshold random graphs over samples, k-neighbourhoods and the JSON
//! graph file format.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::rng::pair_coin;
use crate::sampling::{SampleSet, FORMAT_VERSION};
use crate::spaces::{Point, SpaceDescriptor};

#[derive(Clone, Debug, PartialEq)]
pub struct GeoGraph {
    pub space: Option<SpaceDescriptor>,
    pub coords: Option<Vec<Point>>,
    adjacency: Vec<VertexSet>,
    pub p: f64,
    pub seed: u64,
    pub integer_margin: Option<f64>,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("edge probability {p} outside (0, 1]")))
    }
}

impl GeoGraph {
    /// Joins each pair at distance < 1 with an independent keyed coin.
    pub fn generate(sample: &SampleSet, p: f64, seed: u64) -> Result<Self> {
        check_p(p)?;
        let n = sample.points.len();
        let space = &sample.space;
        let pts = &sample.points;
        let upper: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .filter(|&j| space.distance_unchecked(&pts[i], &pts[j]) < 1.0 && pair_coin(seed, i, j, p))
                    .collect()
            })
            .collect();
        let mut adjacency = vec![VertexSet::new(n); n];
        for (i, row) in upper.iter().enumerate() {
            for &j in row {
                adjacency[i].insert(j);
                adjacency[j].insert(i);
            }
        }
        Ok(GeoGraph {
            space: Some(space.clone()),
            coords: Some(pts.clone()),
            adjacency,
            p,
            seed,
            integer_margin: Some(sample.config.integer_margin),
        })
    }

    /// Pure-adjacency graph from an edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], p: f64, seed: u64) -> Result<Self> {
        let mut adjacency = vec![VertexSet::new(n); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, len: n });
                }
            }
            if u == v {
                return Err(Error::Format(format!("self-loop at {u}")));
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        Ok(GeoGraph {
            space: None,
            coords: None,
            adjacency,
            p,
            seed,
            integer_margin: None,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(v)
    }

    /// N_1 rows.
    pub fn rows(&self) -> &[VertexSet] {
        &self.adjacency
    }

    pub fn row(&self, v: usize) -> &VertexSet {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(VertexSet::count).sum::<usize>() / 2
    }

    /// Sorted list of pairs `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, row) in self.adjacency.iter().enumerate() {
            out.extend(row.iter().filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: v, len: self.n() })
        }
    }

    pub fn has_coordinates(&self) -> bool {
        self.coords.is_some() && self.space.is_some()
    }

    /// Space and coordinates, or `MissingCoordinates`.
    pub fn geometry(&self) -> Result<(&SpaceDescriptor, &[Point])> {
        match (&self.space, &self.coords) {
            (Some(s), Some(c)) => Ok((s, c)),
            _ => Err(Error::MissingCoordinates),
        }
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<f64> {
        let (space, coords) = self.geometry()?;
        Ok(space.distance_unchecked(&coords[u], &coords[v]))
    }

    /// Vertices joined by a walk of length between 1 and `k` from `v`.
    pub fn neighbors_k(&self, v: usize, k: usize) -> Result<VertexSet> {
        self.check_vertex(v)?;
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let mut reach = self.adjacency[v].clone();
        let mut frontier = reach.clone();
        for _ in 1..k {
            if frontier.is_empty() {
                break;
            }
            let mut next = VertexSet::new(self.n());
            for u in &frontier {
                next.union_with(&self.adjacency[u]);
            }
            next.difference_with(&reach);
            reach.union_with(&next);
            frontier = next;
        }
        Ok(reach)
    }

    /// Pure-adjacency copy.
    pub fn strip_coordinates(&self) -> GeoGraph {
        GeoGraph {
            space: None,
            coords: None,
            ..self.clone()
        }
    }

    pub fn attach_coordinates(&self, space: SpaceDescriptor, coords: Vec<Point>) -> Result<GeoGraph> {
        if coords.len() != self.n() {
            return Err(Error::MismatchedSpace(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                self.n()
            )));
        }
        for p in &coords {
            space.check_point(p)?;
        }
        let g = GeoGraph {
            space: Some(space),
            coords: Some(coords),
            ..self.clone()
        };
        if let Some((u, v)) = g.unit_threshold_violations().first() {
            return Err(Error::Format(format!("edge ({u},{v}) at distance >= 1")));
        }
        Ok(g)
    }

    /// Edges whose endpoints are at distance ≥ 1; empty without coordinates.
    pub fn unit_threshold_violations(&self) -> Vec<(usize, usize)> {
        match self.geometry() {
            Ok((space, coords)) => self
                .edges()
                .into_iter()
                .filter(|&(u, v)| space.distance_unchecked(&coords[u], &coords[v]) >= 1.0)
                .collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Serializes to the graph file format; `config` is echoed verbatim.
    pub fn to_json(&self, config: Option<serde_json::Value>) -> Result<String> {
        let file = GraphFile {
            format_version: FORMAT_VERSION,
            space: self.space.clone(),
            p: self.p,
            seed: self.seed,
            n: self.n(),
            integer_margin: self.integer_margin,
            coords: self.coords.clone(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            config,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(Self::from_json_with_config(text)?.0)
    }

    pub fn from_json_with_config(text: &str) -> Result<(Self, Option<serde_json::Value>)> {
        let f: GraphFile = serde_json::from_str(text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format_version {}", f.format_version)));
        }
        let edges: Vec<(usize, usize)> = f.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = GeoGraph::from_edges(f.n, &edges, f.p, f.seed)?;
        g.integer_margin = f.integer_margin;
        match (f.space, f.coords) {
            (Some(space), Some(coords)) => {
                space.validate()?;
                g = g.attach_coordinates(space, coords)?;
            }
            (space, None) => g.space = space,
            (None, Some(_)) => return Err(Error::Format("coords without a space".into())),
        }
        Ok((g, f.config))
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space: Option<SpaceDescriptor>,
    p: f64,
    seed: u64,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    integer_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Point>>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
}

/// Lazily built N_k layers over a fixed graph. Each layer is published
/// whole, so readers never see a partial one.
pub struct NeighborhoodCache<'g> {
    graph: &'g GeoGraph,
    layers: Vec<OnceLock<Vec<VertexSet>>>,
}

impl<'g> NeighborhoodCache<'g> {
    pub fn new(graph: &'g GeoGraph, max_k: usize) -> Self {
        NeighborhoodCache {
            graph,
            layers: (0..max_k.max(1)).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn graph(&self) -> &'g GeoGraph {
        self.graph
    }

    /// All N_k rows. Panics if `k` is 0 or beyond the configured maximum.
    pub fn layer(&self, k: usize) -> &[VertexSet] {
        assert!(k >= 1 && k <= self.layers.len(), "layer {k} out of range");
        if k == 1 {
            return self.graph.rows();
        }
        self.layers[k - 1].get_or_init(|| {
            let prev = self.layer(k - 1);
            let rows = self.graph.rows();
            prev.par_iter()
                .map(|r| {
                    let mut out = r.clone();
                    for u in r {
                        out.union_with(&rows[u]);
                    }
                    out
                })
                .collect()
        })
    }

    pub fn get(&self, v: usize, k: usize) -> &VertexSet {
        &self.layer(k)[v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_iid, SampleConfig};

    fn path3() -> GeoGraph {
        GeoGraph::from_edges(3, &[(0, 1), (1, 2)], 0.5, 0).unwrap()
    }

    #[test]
    fn neighbourhood_examples() {
        let g = path3();
        assert_eq!(g.neighbors_k(0, 1).unwrap().to_vec(), vec![1]);
        assert_eq!(g.neighbors_k(0, 2).unwrap().to_vec(), vec![0, 1, 2]);
        let tri = GeoGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], 0.5, 0).unwrap();
        assert_eq!(tri.neighbors_k(0, 2).unwrap().to_vec(), vec![0, 1, 2]);
        let iso = GeoGraph::from_edges(2, &[], 0.5, 0).unwrap();
        assert!(iso.neighbors_k(0, 5).unwrap().is_empty());
        assert_eq!(
            g.neighbors_k(3, 1),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        );
    }

    #[test]
    fn far_pair_never_adjacent() {
        let c = SpaceDescriptor::circle(5.0).unwrap();
        let s = SampleSet {
            space: c,
            points: vec![Point(vec![0.0]), Point(vec![1.7])],
            config: SampleConfig::new(2, 0),
        };
        for seed in 0..200 {
            assert_eq!(GeoGraph::generate(&s, 0.99, seed).unwrap().edge_count(), 0);
        }
    }

    #[test]
    fn single_vertex() {
        let s = sample_iid(&SpaceDescriptor::circle(5.0).unwrap(), &SampleConfig::new(1, 0)).unwrap();
        let g = GeoGraph::generate(&s, 0.5, 0).unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
    }

    #[test]
    fn cache_matches_direct() {
        let s = sample_iid(&SpaceDescriptor::circle(6.0).unwrap(), &SampleConfig::new(120, 3)).unwrap();
        let g = GeoGraph::generate(&s, 0.5, 3).unwrap();
        let cache = NeighborhoodCache::new(&g, 3);
        for v in 0..g.n() {
            for k in 1..=3 {
                assert_eq!(cache.get(v, k), &g.neighbors_k(v, k).unwrap());
            }
        }
    }

    #[test]
    fn file_round_trip_and_strip() {
        let s = sample_iid(&SpaceDescriptor::circle(5.0).unwrap(), &SampleConfig::new(200, 1)).unwrap();
        let g = GeoGraph::generate(&s, 0.5, 9).unwrap();
        assert!(g.unit_threshold_violations().is_empty());
        let text = g.to_json(None).unwrap();
        let back = GeoGraph::from_json(&text).unwrap();
        assert_eq!(back, g);
        let stripped = g.strip_coordinates();
        let stext = stripped.to_json(None).unwrap();
        assert!(stext.len() < text.len());
        assert_eq!(stripped.edges(), g.edges());
        let again = stripped
            .attach_coordinates(s.space.clone(), s.points.clone())
            .unwrap();
        assert_eq!(again.edges(), g.edges());
    }

    #[test]
    fn file_rejects_threshold_violation() {
        let c = SpaceDescriptor::circle(5.0).unwrap();
        let g = GeoGraph::from_edges(2, &[(0, 1)], 0.5, 0).unwrap();
        assert!(g
            .attach_coordinates(c, vec![Point(vec![0.0]), Point(vec![2.0])])
            .is_err());
    }
}
