//! The α invariant: α(G) = inf over finite U of sup_v |N_1(v) ∩ U| / |U|.
//! Upper bounds from snapped i.i.d. witness sets, exact values on tiny
//! graphs through the sentences φ_{m,n}.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::graphgen::GeoGraph;
use crate::recovery::{recover_b, RecoveredB};
use crate::rng::substream;
use crate::sampling::uniform_point;
use crate::spaces::{Point, SpaceDescriptor};

/// Largest number of n-subsets enumerated by the sentence checks.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e6;
/// Default ε_target for the δ schedule.
pub const DEFAULT_EPS_TARGET: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSet {
    pub members: Vec<usize>,
    pub target_size: usize,
    pub delta: f64,
    pub source_points: Vec<Point>,
}

impl WitnessSet {
    pub fn as_set(&self, n: usize) -> VertexSet {
        VertexSet::from_indices(n, self.members.iter().copied())
    }
}

/// Draws `size` uniform points and snaps each to the nearest vertex not yet
/// used, which must lie within `delta`.
pub fn build_witness_set(graph: &GeoGraph, size: usize, delta: f64, seed: u64) -> Result<WitnessSet> {
    let (space, coords) = graph.geometry()?;
    let n = graph.n();
    if size > n {
        return Err(Error::InvalidConfig(format!("witness size {size} exceeds {n} vertices")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!("snap radius {delta} must be positive")));
    }
    let mut rng = substream(seed, 0x5749_544e);
    let mut used = VertexSet::new(n);
    let mut members = Vec::with_capacity(size);
    let mut sources = Vec::with_capacity(size);
    for i in 0..size {
        let p = uniform_point(space, &mut rng)?;
        let best = (0..n)
            .into_par_iter()
            .filter(|&v| !used.contains(v))
            .map(|v| (space.distance_unchecked(&p, &coords[v]), v))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match best {
            Some((d, v)) if d < delta => {
                used.insert(v);
                members.push(v);
                sources.push(p);
            }
            _ => {
                return Err(Error::SnapFailure(format!(
                    "source point {i} has no unused vertex within {delta}"
                )))
            }
        }
    }
    Ok(WitnessSet {
        members,
        target_size: size,
        delta,
        source_points: sources,
    })
}

/// max_v |N_1(v) ∩ U| / |U|.
pub fn alpha_upper(graph: &GeoGraph, u: &VertexSet) -> Result<f64> {
    alpha_upper_rows(graph.rows(), u)
}

/// Same ratio over arbitrary neighbourhood rows.
pub fn alpha_upper_rows(rows: &[VertexSet], u: &VertexSet) -> Result<f64> {
    let size = u.count();
    if size == 0 {
        return Err(Error::EmptyWitnessSet);
    }
    let best = rows
        .par_iter()
        .map(|row| row.intersection_count(u))
        .max()
        .unwrap_or(0);
    Ok(best as f64 / size as f64)
}

/// Largest δ = 2^-k with |μ(B_1) − μ(B_{1±δ})| < ε_target · μ(X).
pub fn default_delta(space: &SpaceDescriptor, eps_target: f64) -> Result<f64> {
    let total = space.total_measure()?;
    let one = space.ball_measure(1.0)?;
    let mut delta = 0.5;
    for _ in 0..40 {
        let lo = space.ball_measure(1.0 - delta)?;
        let hi = space.ball_measure(1.0 + delta)?;
        if (one - lo).abs().max((hi - one).abs()) < eps_target * total {
            return Ok(delta);
        }
        delta /= 2.0;
    }
    Err(Error::InvalidConfig(format!("no snap radius meets ε_target = {eps_target}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperRecord {
    pub size: usize,
    pub seed: u64,
    pub delta: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub estimate: f64,
    pub uppers: Vec<UpperRecord>,
    pub theoretical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_mn_results: Option<Vec<(usize, usize, bool)>>,
    pub neighborhood: Neighborhood,
    /// Witness sets that could not be built.
    #[serde(default)]
    pub skipped: Vec<String>,
}

/// Which neighbourhood the sup runs over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// N_1(v), the graph neighbourhood.
    #[default]
    Edges,
    /// The closed unit ball B(v) ∪ {v}, with B recovered from adjacency
    /// (circles with L > 4 only).
    RecoveredBall,
    /// The closed unit ball from coordinates.
    ///
    /// In a g.e.c. graph some vertex realizes N_1(v) ∩ U = B_1(x) ∩ U for
    /// every finite U, so the sups over N_1 and over balls agree. A finite
    /// sample has no such vertex once |B_1(x) ∩ U| is large, and the N_1
    /// sup then tracks p times the ball fraction. The ball modes stand in
    /// for the missing witnesses.
    CoordinateBall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaOptions {
    pub sizes: Vec<usize>,
    /// Snap radius; `None` takes [`default_delta`].
    pub delta: Option<f64>,
    pub eps_target: f64,
    /// Witness sets built per size.
    pub repeats: usize,
    pub seed: u64,
    #[serde(default)]
    pub neighborhood: Neighborhood,
}

impl AlphaOptions {
    pub fn new(sizes: Vec<usize>, seed: u64) -> Self {
        AlphaOptions {
            sizes,
            delta: None,
            eps_target: DEFAULT_EPS_TARGET,
            repeats: 1,
            seed,
            neighborhood: Neighborhood::Edges,
        }
    }
}

/// Minimum of [`alpha_upper`] over the built witness sets.
pub fn alpha_estimate(graph: &GeoGraph, opts: &AlphaOptions) -> Result<AlphaReport> {
    let (space, _) = graph.geometry()?;
    let theoretical = space.alpha_target()?;
    let delta = match opts.delta {
        Some(d) => d,
        None => default_delta(space, opts.eps_target)?,
    };
    let ball_rows: Vec<VertexSet>;
    let rows = match opts.neighborhood {
        Neighborhood::Edges => graph.rows(),
        Neighborhood::RecoveredBall | Neighborhood::CoordinateBall => {
            let b = if opts.neighborhood == Neighborhood::RecoveredBall {
                match space.as_circle() {
                    Some(c) if c.length > 4.0 => {}
                    _ => {
                        return Err(Error::NotApplicable(
                            "adjacency defines unit balls only on circles with L > 4".into(),
                        ))
                    }
                }
                recover_b(graph)
            } else {
                RecoveredB::from_coordinates(graph)?
            };
            ball_rows = (0..graph.n()).map(|v| b.closed_row(v).clone()).collect();
            &ball_rows[..]
        }
    };
    let mut uppers = Vec::new();
    let mut skipped = Vec::new();
    let mut stream = 0u64;
    for &size in &opts.sizes {
        for _ in 0..opts.repeats.max(1) {
            let seed = crate::rng::hash3(opts.seed, stream, size as u64);
            stream += 1;
            match build_witness_set(graph, size, delta, seed) {
                Ok(w) => {
                    let upper = alpha_upper_rows(rows, &w.as_set(graph.n()))?;
                    uppers.push(UpperRecord {
                        size,
                        seed,
                        delta,
                        upper,
                    });
                }
                Err(e @ Error::SnapFailure(_)) => skipped.push(format!("size {size}: {e}")),
                Err(e) => return Err(e),
            }
        }
    }
    let estimate = uppers
        .iter()
        .map(|r| r.upper)
        .min_by(f64::total_cmp)
        .ok_or_else(|| match skipped.is_empty() {
            true => Error::EmptyWitnessSet,
            false => Error::SnapFailure(format!("every witness set failed ({})", skipped.join("; "))),
        })?;
    Ok(AlphaReport {
        estimate,
        uppers,
        theoretical: Some(theoretical),
        phi_mn_results: None,
        neighborhood: opts.neighborhood,
        skipped,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_budget(n: usize, k: usize, budget: f64) -> Result<()> {
    let needed = binomial(n, k);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, limit: budget });
    }
    Ok(())
}

/// min over n-subsets U of max_v |N_1(v) ∩ U|, by enumeration.
fn min_max_cover(graph: &GeoGraph, n: usize) -> usize {
    let v = graph.n();
    let rows = graph.rows();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    loop {
        let u = VertexSet::from_indices(v, idx.iter().copied());
        let worst = rows.iter().map(|r| r.intersection_count(&u)).max().unwrap_or(0);
        best = best.min(worst);
        if best == 0 {
            return 0;
        }
        // Next combination in lexicographic order.
        let Some(i) = (0..n).rev().find(|&i| idx[i] != i + v - n) else {
            return best;
        };
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// φ_{m,n}: some U of size n has |N_1(v) ∩ U| ≤ m for every v.
pub fn phi_mn_holds(graph: &GeoGraph, m: usize, n: usize, budget: f64) -> Result<bool> {
    if n > graph.n() {
        return Ok(false);
    }
    if m >= n {
        return Ok(true);
    }
    check_budget(graph.n(), n, budget)?;
    Ok(min_max_cover(graph, n) <= m)
}

/// inf{m/n : G ⊨ φ_{m,n}, m ≤ n ≤ max_n} as an exact pair (m, n).
pub fn alpha_from_sentences_exact(graph: &GeoGraph, max_n: usize, budget: f64) -> Result<(usize, usize)> {
    let top = max_n.min(graph.n());
    if top == 0 {
        return Err(Error::EmptyWitnessSet);
    }
    for n in 1..=top {
        check_budget(graph.n(), n, budget)?;
    }
    let mut best = (1usize, 1usize);
    for n in 1..=top {
        // φ_{m,n} is monotone in m, so the least m is the min-max cover.
        let m = min_max_cover(graph, n);
        if m * best.1 < best.0 * n {
            best = (m, n);
        }
    }
    Ok(best)
}

pub fn alpha_from_sentences(graph: &GeoGraph, max_n: usize, budget: f64) -> Result<f64> {
    let (m, n) = alpha_from_sentences_exact(graph, max_n, budget)?;
    Ok(m as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> GeoGraph {
        GeoGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], 1.0, 0).unwrap()
    }

    #[test]
    fn upper_on_triangle() {
        let g = k3();
        assert_eq!(alpha_upper(&g, &VertexSet::full(3)).unwrap(), 2.0 / 3.0);
        assert_eq!(alpha_upper(&g, &VertexSet::singleton(3, 0)).unwrap(), 1.0);
        assert_eq!(alpha_upper(&g, &VertexSet::new(3)), Err(Error::EmptyWitnessSet));
        let empty = GeoGraph::from_edges(3, &[], 0.5, 0).unwrap();
        assert_eq!(alpha_upper(&empty, &VertexSet::full(3)).unwrap(), 0.0);
    }

    #[test]
    fn sentences_on_triangle() {
        let g = k3();
        assert!(!phi_mn_holds(&g, 1, 2, 1e6).unwrap());
        assert!(phi_mn_holds(&g, 2, 2, 1e6).unwrap());
        assert!(phi_mn_holds(&g, 2, 3, 1e6).unwrap());
        assert_eq!(alpha_from_sentences_exact(&g, 3, 1e6).unwrap(), (2, 3));
        let empty = GeoGraph::from_edges(4, &[], 0.5, 0).unwrap();
        assert_eq!(alpha_from_sentences(&empty, 4, 1e6).unwrap(), 0.0);
        assert!(phi_mn_holds(&empty, 0, 4, 1e6).unwrap());
    }

    #[test]
    fn budget_guard() {
        let g = GeoGraph::from_edges(40, &[], 0.5, 0).unwrap();
        assert!(matches!(phi_mn_holds(&g, 1, 20, 1e6), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn default_delta_on_circle() {
        // |μ(B_1) - μ(B_{1±δ})| = 2δ must stay below 0.01 · 5.
        let d = default_delta(&SpaceDescriptor::circle(5.0).unwrap(), 0.01).unwrap();
        assert_eq!(d, 1.0 / 64.0);
    }
}
