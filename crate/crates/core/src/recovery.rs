//! Reconstruction of the circle structure from pure adjacency: the unit-ball
//! relation B, intervals A[a,b], orienting loops, circular order, the
//! intervals F[a+n, a+n+1), translates f_z and the shifted orders C_{z,t,k}.
//!
//! All quantifiers range over the finite vertex set. Where a formula is only
//! exact on infinite dense structures, the finite reading used here is noted
//! at the routine.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::graphgen::{GeoGraph, NeighborhoodCache};
use crate::spaces::{Circle, SpaceDescriptor};

/// DSL definitions mirroring the routines of this module. `B` atoms refer
/// to the recovered relation, `C[0,0,0]` to the positional order.
pub const RECOVERY_PRELUDE: &str = "
def N2(v, x) := E(v, x) | exists w (E(v, w) & E(w, x));
def Ball(v, x) := N2(v, x) & forall z (E(x, z) -> N2(v, z));
def Bsym(v, x) := !(v = x) & Ball(v, x) & Ball(x, v);
def Int(x, y, z) := forall v ((B(v, y) & B(v, z)) -> (B(x, v) | x = v));
def Fb(a, x) := x = a | (B(x, a) & exists w (!B(w, a) & C[0,0,0](a, x, w)));
def Fn(a, x) := x = a | (B(x, a) & exists w (!B(w, a) & C[0,0,0](w, x, a)));
def F1(a, x) := !Fb(a, x) & exists z (Fb(a, z) & Fb(z, x));
def F2(a, x) := !F1(a, x) & !Fb(a, x) & exists z (F1(a, z) & Fb(z, x));
def Min1(a, y) := F1(a, y) & !exists u (F1(a, u) & !(u = y) & Fb(u, y));
";

// ---------------------------------------------------------------- B

/// Symmetric, irreflexive relation rows.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredB {
    rows: Vec<VertexSet>,
    closed: Vec<VertexSet>,
}

impl RecoveredB {
    /// Wraps rows, enforcing symmetry by conjunction and irreflexivity.
    pub fn from_rows(mut rows: Vec<VertexSet>) -> Self {
        let n = rows.len();
        for v in 0..n {
            rows[v].remove(v);
        }
        let snapshot = rows.clone();
        for (v, row) in rows.iter_mut().enumerate() {
            let keep: Vec<usize> = row.iter().filter(|&x| snapshot[x].contains(v)).collect();
            *row = VertexSet::from_indices(n, keep);
        }
        let closed = rows
            .iter()
            .enumerate()
            .map(|(v, r)| {
                let mut c = r.clone();
                c.insert(v);
                c
            })
            .collect();
        RecoveredB { rows, closed }
    }

    /// Ground-truth relation d < 1 from coordinates.
    pub fn from_coordinates(graph: &GeoGraph) -> Result<Self> {
        let (space, coords) = graph.geometry()?;
        let n = graph.n();
        let rows = (0..n)
            .into_par_iter()
            .map(|v| {
                VertexSet::from_indices(
                    n,
                    (0..n).filter(|&x| x != v && space.distance_unchecked(&coords[v], &coords[x]) < 1.0),
                )
            })
            .collect();
        Ok(Self::from_rows(rows))
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn holds(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn rows(&self) -> &[VertexSet] {
        &self.rows
    }

    pub fn row(&self, v: usize) -> &VertexSet {
        &self.rows[v]
    }

    /// `B(v) ∪ {v}`.
    pub fn closed_row(&self, v: usize) -> &VertexSet {
        &self.closed[v]
    }
}

/// B(v,x) iff x ∈ N_2(v) and every E-neighbour of x lies in N_2(v), taken in
/// both directions, irreflexive.
pub fn recover_b(graph: &GeoGraph) -> RecoveredB {
    let cache = NeighborhoodCache::new(graph, 2);
    recover_b_with(&cache)
}

pub fn recover_b_with(cache: &NeighborhoodCache<'_>) -> RecoveredB {
    let g = cache.graph();
    let n = g.n();
    let n2 = cache.layer(2);
    let rows: Vec<VertexSet> = (0..n)
        .into_par_iter()
        .map(|v| {
            let reach = &n2[v];
            VertexSet::from_indices(n, reach.iter().filter(|&x| g.row(x).is_subset(reach)))
        })
        .collect();
    RecoveredB::from_rows(rows)
}

/// A[a,b] = {x : ∀v (B(v,a) ∧ B(v,b) → B(x,v) ∨ x = v)}.
///
/// The consequent uses the reflexive closure of B so that a common
/// neighbour is not excluded from its own interval.
pub fn recover_interval(b: &RecoveredB, a: usize, c: usize) -> Result<VertexSet> {
    let n = b.n();
    for v in [a, c] {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, len: n });
        }
    }
    if !b.holds(a, c) {
        return Err(Error::NotBAdjacent(a, c));
    }
    Ok(interval_unchecked(b, a, c, 0))
}

/// A[a,b] with the ∀v read as "all but at most `slack` v", i.e.
/// ¬∃^{≥slack+1} v (B(v,a) ∧ B(v,b) ∧ ¬B(x,v) ∧ x ≠ v). `slack = 0` is the
/// plain formula.
pub fn recover_interval_with_slack(b: &RecoveredB, a: usize, c: usize, slack: usize) -> Result<VertexSet> {
    recover_interval(b, a, c)?;
    Ok(interval_unchecked(b, a, c, slack))
}

fn interval_unchecked(b: &RecoveredB, a: usize, c: usize, slack: usize) -> VertexSet {
    let common = b.row(a).intersection(b.row(c));
    if slack == 0 {
        let mut out = VertexSet::full(b.n());
        for v in &common {
            out.intersect_with(b.closed_row(v));
        }
        return out;
    }
    let rows: Vec<&VertexSet> = common.iter().map(|v| b.closed_row(v)).collect();
    VertexSet::in_all_but(b.n(), &rows, slack)
}

/// Memo for intervals at a fixed exception slack, filled concurrently with
/// idempotent writes.
#[derive(Default)]
pub struct IntervalCache {
    slack: usize,
    map: RwLock<HashMap<(u32, u32), Arc<VertexSet>>>,
}

impl IntervalCache {
    pub fn with_slack(slack: usize) -> Self {
        IntervalCache {
            slack,
            map: RwLock::default(),
        }
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    pub fn get(&self, b: &RecoveredB, a: usize, c: usize) -> Arc<VertexSet> {
        let key = (a.min(c) as u32, a.max(c) as u32);
        if let Some(s) = self.map.read().expect("interval cache poisoned").get(&key) {
            return s.clone();
        }
        let s = Arc::new(interval_unchecked(b, a, c, self.slack));
        self.map
            .write()
            .expect("interval cache poisoned")
            .entry(key)
            .or_insert(s)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("interval cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// ---------------------------------------------------------------- loops

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopMode {
    GroundTruth,
    AdjacencySearch,
}

/// How the loop intervals cover the non-loop vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub checked: usize,
    /// Vertices in no interval interior.
    pub holes: usize,
    /// Vertices in two or more interval interiors.
    pub overlaps: usize,
    pub defect_fraction: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientingLoop {
    /// a_0, …, a_{n_L - 1}; the closing a_{n_L} = a_0 is implicit.
    pub vertices: Vec<usize>,
    pub mode: LoopMode,
    pub partition: Option<PartitionReport>,
}

impl OrientingLoop {
    pub fn n_l(&self) -> usize {
        self.vertices.len()
    }

    /// a_i with indices taken mod n_L.
    pub fn at(&self, i: usize) -> usize {
        self.vertices[i % self.vertices.len()]
    }

    /// The same loop traversed the other way, starting at a_0.
    pub fn reversed(&self) -> OrientingLoop {
        let mut v = self.vertices.clone();
        v[1..].reverse();
        OrientingLoop {
            vertices: v,
            ..self.clone()
        }
    }

    /// Orientation against coordinates: `true` when C(a_0,a_1,a_2) holds.
    pub fn agrees_with(&self, graph: &GeoGraph) -> Result<bool> {
        let (space, coords) = graph.geometry()?;
        space
            .as_circle()
            .ok_or_else(|| Error::UnsupportedSpace("orientation needs a circle".into()))?;
        let r = |i: usize| coords[self.at(i)].0[0];
        Ok(Circle::order_residues(r(0), r(1), r(2)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopOptions {
    pub start: usize,
    /// Largest tolerated fraction of partition defects.
    pub slack: f64,
    /// Alternative step choices tried per position before giving up.
    pub branching: usize,
    /// Exception slack for the loop intervals.
    pub interval_slack: usize,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions {
            start: 0,
            slack: 0.02,
            branching: 4,
            interval_slack: 0,
        }
    }
}

/// Robust one-step direction test: neither endpoint of one step lies in the
/// interval of the other.
fn unidirectional(cache: &IntervalCache, b: &RecoveredB, p0: usize, p1: usize, p2: usize) -> bool {
    p0 != p2 && !cache.get(b, p1, p2).contains(p0) && !cache.get(b, p0, p1).contains(p2)
}

pub fn partition_report(
    b: &RecoveredB,
    cache: &IntervalCache,
    loop_vertices: &[usize],
    slack: f64,
) -> PartitionReport {
    let n = b.n();
    let k = loop_vertices.len();
    let on_loop = VertexSet::from_indices(n, loop_vertices.iter().copied());
    let mut count = vec![0u8; n];
    for i in 0..k {
        let (a, c) = (loop_vertices[i], loop_vertices[(i + 1) % k]);
        let mut interior = (*cache.get(b, a, c)).clone();
        interior.difference_with(&on_loop);
        for v in &interior {
            count[v] = count[v].saturating_add(1);
        }
    }
    let mut holes = 0;
    let mut overlaps = 0;
    for v in 0..n {
        if on_loop.contains(v) {
            continue;
        }
        match count[v] {
            0 => holes += 1,
            1 => {}
            _ => overlaps += 1,
        }
    }
    let checked = n - on_loop.count();
    let defect_fraction = if checked == 0 {
        0.0
    } else {
        (holes + overlaps) as f64 / checked as f64
    };
    PartitionReport {
        checked,
        holes,
        overlaps,
        defect_fraction,
        slack,
        passed: defect_fraction <= slack,
    }
}

/// Finds an orienting loop. Ground-truth mode snaps equally spaced targets
/// to vertices and verifies with coordinates; adjacency mode uses only the
/// recovered relation and verifies the interval partition.
pub fn find_orienting_loop(
    graph: &GeoGraph,
    b: Option<&RecoveredB>,
    mode: LoopMode,
    opts: &LoopOptions,
) -> Result<OrientingLoop> {
    graph.check_vertex(opts.start)?;
    match mode {
        LoopMode::GroundTruth => ground_truth_loop(graph, b, opts),
        LoopMode::AdjacencySearch => {
            let b = b.ok_or_else(|| Error::LoopNotFound("adjacency search needs a recovered B".into()))?;
            let cache = IntervalCache::with_slack(opts.interval_slack);
            adjacency_loop(b, &cache, opts)
        }
    }
}

fn ground_truth_loop(graph: &GeoGraph, b: Option<&RecoveredB>, opts: &LoopOptions) -> Result<OrientingLoop> {
    let (space, coords) = graph.geometry()?;
    let circle = match space {
        SpaceDescriptor::Circle(c) => *c,
        _ => return Err(Error::UnsupportedSpace("orienting loops live on circles".into())),
    };
    let l = circle.length;
    if l <= 3.0 {
        return Err(Error::LoopNotFound(format!("circle length {l} must exceed 3")));
    }
    let n_l = l.floor() as usize + 1;
    let x0 = coords[opts.start].0[0];
    let mut sorted: Vec<(f64, usize)> = coords.iter().enumerate().map(|(i, p)| (p.0[0], i)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nearest = |t: f64| -> usize {
        let i = sorted.partition_point(|&(x, _)| x < t);
        let cands = [i.checked_sub(1).unwrap_or(sorted.len() - 1), i % sorted.len()];
        *cands
            .iter()
            .min_by(|&&p, &&q| {
                circle
                    .residue_distance(sorted[p].0, t)
                    .total_cmp(&circle.residue_distance(sorted[q].0, t))
            })
            .map(|&i| &sorted[i].1)
            .expect("nonempty")
    };
    let mut vertices = vec![opts.start];
    for i in 1..n_l {
        let t = crate::spaces::wrap(x0 + i as f64 * l / n_l as f64, l);
        vertices.push(nearest(t));
    }
    for i in 0..n_l {
        let (p, q, r) = (
            coords[vertices[i]].0[0],
            coords[vertices[(i + 1) % n_l]].0[0],
            coords[vertices[(i + 2) % n_l]].0[0],
        );
        let d = circle.residue_distance(p, q);
        if !(d > 0.0 && d < 1.0) || !Circle::order_residues(p, q, r) {
            return Err(Error::LoopNotFound(format!("sample too sparse near loop step {i}")));
        }
    }
    let partition = b.map(|b| partition_report(b, &IntervalCache::with_slack(opts.interval_slack), &vertices, opts.slack));
    Ok(OrientingLoop {
        vertices,
        mode: LoopMode::GroundTruth,
        partition,
    })
}

/// Forward B-neighbours of `c` after the step `prev → c`, with interval sizes.
/// Loop steps are longer than 1/2, so a forward step also leaves the
/// B-ball of `prev`. Steps whose interval leaves B̄(c) ∩ B̄(x) are skipped: a true arc of
/// length below 1 never does, while near-threshold pairs with few common
/// neighbours produce near-vacuous intervals.
fn forward_steps(
    b: &RecoveredB,
    cache: &IntervalCache,
    prev: Option<usize>,
    c: usize,
) -> Vec<(usize, usize)> {
    b.row(c)
        .iter()
        .filter(|&x| match prev {
            Some(p) => !b.holds(p, x) && unidirectional(cache, b, p, c, x),
            None => true,
        })
        .filter_map(|x| {
            let a = cache.get(b, c, x);
            let sane = a.is_subset(b.closed_row(c)) && a.is_subset(b.closed_row(x));
            sane.then(|| (x, a.count()))
        })
        .collect()
}

fn adjacency_loop(b: &RecoveredB, cache: &IntervalCache, opts: &LoopOptions) -> Result<OrientingLoop> {
    let n = b.n();
    let a0 = opts.start;
    if b.row(a0).is_empty() {
        return Err(Error::LoopNotFound(format!("vertex {a0} has no B-neighbours")));
    }
    // Pass 1: greedy maximal steps count the loop length.
    let first = forward_steps(b, cache, None, a0)
        .into_iter()
        .max_by_key(|&(x, s)| (s, std::cmp::Reverse(x)))
        .map(|(x, _)| x)
        .expect("nonempty row");
    let mut path = vec![a0, first];
    let mut covered = cache.get(b, a0, first).count();
    let n_l = loop {
        let (p, c) = (path[path.len() - 2], path[path.len() - 1]);
        if b.holds(c, a0) && unidirectional(cache, b, p, c, a0) && path.len() > 2 {
            break path.len();
        }
        let next = forward_steps(b, cache, Some(p), c)
            .into_iter()
            .filter(|&(x, _)| !path.contains(&x) || x == a0)
            .max_by_key(|&(x, s)| (s, std::cmp::Reverse(x)));
        match next {
            Some((x, s)) if x != a0 => {
                covered += s;
                path.push(x);
            }
            _ => return Err(Error::LoopNotFound("greedy pass stalled".into())),
        }
        if covered > 4 * n || path.len() > n {
            return Err(Error::LoopNotFound("greedy pass did not close".into()));
        }
    };
    if n_l < 4 {
        return Err(Error::LoopNotFound(format!("loop of length {n_l}: circle too short")));
    }
    // Pass 2: n_L roughly equal steps, both orientations from a0, with a
    // bounded depth-first search over near-target choices.
    let target = n as f64 / n_l as f64;
    let mut best_err = None;
    let mut starts: Vec<(usize, usize)> = forward_steps(b, cache, None, a0);
    starts.sort_by(|p, q| {
        (p.1 as f64 - target)
            .abs()
            .total_cmp(&(q.1 as f64 - target).abs())
            .then(p.0.cmp(&q.0))
    });
    // The two orientations: the best-fitting first step, then the best one
    // on the other side of a0.
    let mut firsts: Vec<usize> = Vec::new();
    for &(x, _) in &starts {
        if firsts.len() == 2 {
            break;
        }
        if firsts.iter().all(|&f| !cache.get(b, a0, f).contains(x) && !cache.get(b, a0, x).contains(f)) {
            firsts.push(x);
        }
    }
    for f in firsts {
        let mut path = vec![a0, f];
        let mut cum = cache.get(b, a0, f).count().saturating_sub(1);
        match extend_loop(b, cache, &mut path, &mut cum, n_l, target, opts) {
            Ok(()) => {
                let report = partition_report(b, cache, &path, opts.slack);
                if report.passed {
                    return Ok(OrientingLoop {
                        vertices: path,
                        mode: LoopMode::AdjacencySearch,
                        partition: Some(report),
                    });
                }
                best_err = Some(format!(
                    "partition defect fraction {:.4} exceeds slack {}",
                    report.defect_fraction, opts.slack
                ));
            }
            Err(e) => best_err = Some(e),
        }
    }
    Err(Error::LoopNotFound(best_err.unwrap_or_else(|| "no first step".into())))
}

fn extend_loop(
    b: &RecoveredB,
    cache: &IntervalCache,
    path: &mut Vec<usize>,
    cum: &mut usize,
    n_l: usize,
    target: f64,
    opts: &LoopOptions,
) -> std::result::Result<(), String> {
    let a0 = path[0];
    let (p, c) = (path[path.len() - 2], path[path.len() - 1]);
    if path.len() == n_l {
        // Close the loop and check orientation through the seam.
        let a1 = path[1];
        return if b.holds(c, a0) && unidirectional(cache, b, p, c, a0) && unidirectional(cache, b, c, a0, a1) {
            Ok(())
        } else {
            Err(format!("loop of {n_l} steps does not close at vertex {a0}"))
        };
    }
    let want = target * path.len() as f64;
    let mut cands: Vec<(usize, usize)> = forward_steps(b, cache, Some(p), c)
        .into_iter()
        .filter(|&(x, _)| !path.contains(&x))
        .collect();
    cands.sort_by(|x, y| {
        let ex = (*cum as f64 + x.1 as f64 - 1.0 - want).abs();
        let ey = (*cum as f64 + y.1 as f64 - 1.0 - want).abs();
        ex.total_cmp(&ey).then(x.0.cmp(&y.0))
    });
    let mut last = String::from("no forward step");
    for &(x, s) in cands.iter().take(opts.branching.max(1)) {
        path.push(x);
        *cum += s - 1;
        match extend_loop(b, cache, path, cum, n_l, target, opts) {
            Ok(()) => return Ok(()),
            Err(e) => last = e,
        }
        *cum -= s - 1;
        path.pop();
    }
    Err(last)
}

// ---------------------------------------------------------------- order

/// Result of translating a vertex by an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translate {
    pub vertex: usize,
    /// `true` when no vertex met the minimum condition exactly and the
    /// best-covering candidate was returned instead.
    pub approximate: bool,
}

/// Statistics from building positions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PositionReport {
    /// Vertices covered by no loop interval (placed by fallback).
    pub unplaced: usize,
    /// Vertices covered by two or more loop intervals.
    pub ambiguous: usize,
}

/// Recovery state over a fixed relation B and orienting loop.
///
/// Every vertex gets a position: the loop interval A[a_m, a_{m+1}] that
/// contains it and its rank |A[a_m, x]| inside it. The cyclic order of
/// positions is the order used by the F-interval, J and D routines; the
/// T-formula order of [`Recovery::recover_order`] is searched with paths
/// guided by the same positions.
pub struct Recovery<'b> {
    b: &'b RecoveredB,
    loop_: OrientingLoop,
    intervals: IntervalCache,
    pos: Vec<usize>,
    segment: Vec<usize>,
    report: PositionReport,
    f_pos: Vec<OnceLock<VertexSet>>,
    f_neg: Vec<OnceLock<VertexSet>>,
    witness_support: usize,
    /// Slack (in vertices) for set inclusions in J.
    pub inclusion_slack: usize,
}

/// Counting-quantifier readings used on sampled graphs. B errors cluster at
/// the unit threshold; a plain ∀ or ∃ lets a single such error move an
/// interval end or an F-base by a full unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// Interval ∀v tolerates this many exceptions.
    pub interval_slack: usize,
    /// F-base ∃w requires this many distinct witnesses.
    pub witness_support: usize,
}

impl RecoveryOptions {
    pub fn literal() -> Self {
        RecoveryOptions {
            interval_slack: 0,
            witness_support: 1,
        }
    }

    /// Defaults for i.i.d. samples with a few hundred vertices per unit.
    pub fn sampled() -> Self {
        RecoveryOptions {
            interval_slack: 2,
            witness_support: 32,
        }
    }
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self::sampled()
    }
}

impl<'b> Recovery<'b> {
    /// Literal readings: plain ∀ in intervals, plain ∃ in F-bases.
    pub fn new(b: &'b RecoveredB, loop_: OrientingLoop) -> Result<Self> {
        Self::with_options(b, loop_, &RecoveryOptions::literal())
    }

    pub fn with_options(b: &'b RecoveredB, loop_: OrientingLoop, opts: &RecoveryOptions) -> Result<Self> {
        let n = b.n();
        let k = loop_.n_l();
        if k < 3 {
            return Err(Error::LoopNotFound(format!("loop of length {k}")));
        }
        for &v in &loop_.vertices {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, len: n });
            }
        }
        for i in 0..k {
            if !b.holds(loop_.at(i), loop_.at(i + 1)) {
                return Err(Error::NotBAdjacent(loop_.at(i), loop_.at(i + 1)));
            }
        }
        let intervals = IntervalCache::with_slack(opts.interval_slack);
        let segs: Vec<Arc<VertexSet>> = (0..k)
            .map(|i| intervals.get(b, loop_.at(i), loop_.at(i + 1)))
            .collect();
        let loop_index: HashMap<usize, usize> = loop_.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let placed: Vec<(usize, usize, bool, bool)> = (0..n)
            .into_par_iter()
            .map(|v| {
                if let Some(&m) = loop_index.get(&v) {
                    return (m, 0, false, false);
                }
                let mut cands: Vec<usize> = (0..k).filter(|&m| segs[m].contains(v)).collect();
                let unplaced = cands.is_empty();
                let ambiguous = cands.len() > 1;
                if unplaced {
                    cands = (0..k)
                        .filter(|&m| b.holds(loop_.at(m), v) && b.holds(v, loop_.at(m + 1)))
                        .collect();
                }
                if cands.is_empty() {
                    cands = (0..k).filter(|&m| b.holds(loop_.at(m), v)).collect();
                }
                let rank = |m: usize| {
                    let a = loop_.at(m);
                    if b.holds(a, v) {
                        interval_unchecked(b, a, v, opts.interval_slack).count()
                    } else {
                        segs[m].count()
                    }
                };
                let best = cands
                    .iter()
                    .map(|&m| (rank(m), m))
                    .min()
                    .unwrap_or((usize::MAX / 2, 0));
                (best.1, best.0, unplaced, ambiguous)
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (placed[v].0, placed[v].1, v));
        let mut pos = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            pos[v] = r;
        }
        let report = PositionReport {
            unplaced: placed.iter().filter(|p| p.2).count(),
            ambiguous: placed.iter().filter(|p| p.3).count(),
        };
        Ok(Recovery {
            b,
            loop_,
            intervals,
            pos,
            segment: placed.iter().map(|p| p.0).collect(),
            report,
            f_pos: (0..n).map(|_| OnceLock::new()).collect(),
            f_neg: (0..n).map(|_| OnceLock::new()).collect(),
            witness_support: opts.witness_support.max(1),
            inclusion_slack: 0,
        })
    }

    pub fn witness_support(&self) -> usize {
        self.witness_support
    }

    pub fn b(&self) -> &RecoveredB {
        self.b
    }

    pub fn orienting_loop(&self) -> &OrientingLoop {
        &self.loop_
    }

    pub fn position_report(&self) -> &PositionReport {
        &self.report
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    /// Cyclic rank of each vertex.
    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    pub fn segment_of(&self, v: usize) -> usize {
        self.segment[v]
    }

    pub fn interval(&self, a: usize, c: usize) -> Result<Arc<VertexSet>> {
        if !self.b.holds(a, c) {
            return Err(Error::NotBAdjacent(a, c));
        }
        Ok(self.intervals.get(self.b, a, c))
    }

    fn check3(&self, x: usize, y: usize, z: usize) -> Result<()> {
        let n = self.n();
        for v in [x, y, z] {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, len: n });
            }
        }
        if x == y || y == z || x == z {
            return Err(Error::DegenerateTriple);
        }
        Ok(())
    }

    /// Forward rank distance from `a` to `c`.
    #[inline]
    pub fn fd(&self, a: usize, c: usize) -> usize {
        let n = self.n();
        (self.pos[c] + n - self.pos[a]) % n
    }

    /// Circular order of positions; false when two arguments coincide.
    #[inline]
    pub fn position_order(&self, x: usize, y: usize, z: usize) -> bool {
        let (a, b) = (self.fd(x, y), self.fd(x, z));
        a > 0 && b > 0 && a < b
    }

    /// C(x,y,z) := T(x,y,z) ∨ T(y,z,x) ∨ T(z,x,y).
    pub fn recover_order(&self, x: usize, y: usize, z: usize) -> Result<bool> {
        self.check3(x, y, z)?;
        Ok(self.order_witness(x, y, z).is_some())
    }

    /// A verified uni-directional path witnessing C(x,y,z), if one is found.
    pub fn order_witness(&self, x: usize, y: usize, z: usize) -> Option<Vec<usize>> {
        if !self.position_order(x, y, z) {
            return None;
        }
        let mut rots = [(x, y, z), (y, z, x), (z, x, y)];
        rots.sort_by_key(|&(p, _, r)| self.fd(p, r));
        rots.iter().find_map(|&(p, q, r)| self.t_path(p, q, r))
    }

    /// T(x,y,z): a uni-directional path a_i, …, x, …, y, …, z, …, a_j with
    /// i ≠ j, fewer than n_L + 3 steps and every vertex inside D_ij.
    ///
    /// The one-step condition A[p_i,p_{i+1}] ∩ A[p_{i+1},p_{i+2}] = {p_{i+1}}
    /// is read as p_i ∉ A[p_{i+1},p_{i+2}] ∧ p_{i+2} ∉ A[p_i,p_{i+1}], and
    /// "⋃ A[p_t,p_{t+1}] = D_ij" as "every path vertex lies in D_ij": on a
    /// finite sample recovered intervals overshoot their ends by about one
    /// sample, which breaks the literal equalities.
    pub fn t_path(&self, x: usize, y: usize, z: usize) -> Option<Vec<usize>> {
        if !self.position_order(x, y, z) {
            return None;
        }
        let k = self.loop_.n_l();
        // Loop index at or before x, and at or after z.
        let before = (0..k).min_by_key(|&i| self.fd(self.loop_.at(i), x))?;
        let after = (0..k).min_by_key(|&i| self.fd(z, self.loop_.at(i)))?;
        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let i = (before + k - di) % k;
            let j = (after + dj) % k;
            let (ai, aj) = (self.loop_.at(i), self.loop_.at(j));
            if i == j {
                continue;
            }
            // The arc a_i → a_j must contain x, y, z in order.
            let span = self.fd(ai, aj);
            if !(self.fd(ai, x) <= self.fd(ai, y) && self.fd(ai, y) <= self.fd(ai, z) && self.fd(ai, z) <= span) {
                continue;
            }
            if let Some(path) = self.build_path(&[ai, x, y, z, aj]) {
                if self.valid_t_path(&path, i, j) {
                    return Some(path);
                }
            }
        }
        None
    }

    fn build_path(&self, waypoints: &[usize]) -> Option<Vec<usize>> {
        let limit = self.loop_.n_l() + 2;
        let mut path = vec![waypoints[0]];
        for &w in &waypoints[1..] {
            let mut c = *path.last().expect("nonempty");
            while c != w {
                let next = self.leg_step(c, w)?;
                path.push(next);
                if path.len() > limit + 1 {
                    return None;
                }
                c = next;
            }
        }
        Some(path)
    }

    /// Next vertex from `c` toward `w`: `w` itself when B-adjacent, else a
    /// forward B-neighbour that splits the remaining distance evenly.
    fn leg_step(&self, c: usize, w: usize) -> Option<usize> {
        let remaining = self.fd(c, w);
        if self.b.holds(c, w) && remaining < self.n() / 2 {
            return Some(w);
        }
        let forward: Vec<(usize, usize)> = self
            .b
            .row(c)
            .iter()
            .map(|v| (self.fd(c, v), v))
            .filter(|&(d, _)| d > 0 && d < remaining)
            .collect();
        let reach = forward.iter().map(|&(d, _)| d).max()?;
        let steps = remaining.div_ceil((reach as f64 * 0.95).max(1.0) as usize).max(2);
        let goal = remaining / steps;
        forward
            .iter()
            .min_by_key(|&&(d, v)| (d.abs_diff(goal), v))
            .map(|&(_, v)| v)
    }

    fn valid_t_path(&self, path: &[usize], i: usize, j: usize) -> bool {
        let m = path.len() - 1;
        if m == 0 || m >= self.loop_.n_l() + 3 {
            return false;
        }
        for w in path.windows(2) {
            if w[0] == w[1] || !self.b.holds(w[0], w[1]) {
                return false;
            }
        }
        for w in path.windows(3) {
            if !unidirectional(&self.intervals, self.b, w[0], w[1], w[2]) {
                return false;
            }
        }
        let d = self.d_ij(i, j);
        path.iter().all(|&v| d.contains(v))
    }

    /// D_ij: union of loop intervals from a_i forward to a_j.
    pub fn d_ij(&self, i: usize, j: usize) -> VertexSet {
        let k = self.loop_.n_l();
        let mut out = VertexSet::new(self.n());
        let mut m = i % k;
        while m != j % k {
            out.union_with(&self.intervals.get(self.b, self.loop_.at(m), self.loop_.at(m + 1)));
            m = (m + 1) % k;
        }
        out
    }

    // ------------------------------------------------------------ F

    /// F[a, a+1) = {a} ∪ {x : B(x,a) ∧ ∃w (¬B(w,a) ∧ C(a,x,w))}.
    pub fn f_base(&self, a: usize) -> &VertexSet {
        self.f_pos[a].get_or_init(|| {
            let reach = self.far_reach(a, true);
            let mut out = VertexSet::from_indices(
                self.n(),
                self.b.row(a).iter().filter(|&x| {
                    let d = self.fd(a, x);
                    d > 0 && d < reach
                }),
            );
            out.insert(a);
            out
        })
    }

    /// F(a-1, a] = {a} ∪ {x : B(x,a) ∧ ∃w (¬B(w,a) ∧ C(w,x,a))}.
    pub fn f_base_neg(&self, a: usize) -> &VertexSet {
        self.f_neg[a].get_or_init(|| {
            let reach = self.far_reach(a, false);
            let mut out = VertexSet::from_indices(
                self.n(),
                self.b.row(a).iter().filter(|&x| {
                    let d = self.fd(x, a);
                    d > 0 && d < reach
                }),
            );
            out.insert(a);
            out
        })
    }

    /// k-th largest forward (or backward) distance from `a` to a vertex
    /// outside B(a): x qualifies iff at least k witnesses lie beyond it.
    fn far_reach(&self, a: usize, forward: bool) -> usize {
        let closed = self.b.closed_row(a);
        let mut d: Vec<usize> = (0..self.n())
            .filter(|&w| !closed.contains(w))
            .map(|w| if forward { self.fd(a, w) } else { self.fd(w, a) })
            .collect();
        let k = self.witness_support;
        if d.len() < k {
            return 0;
        }
        let idx = d.len() - k;
        *d.select_nth_unstable(idx).1
    }

    /// F[a+n, a+n+1) for any integer `n`.
    ///
    /// For n ≥ 1 the inductive step is
    /// x ∉ F[a+n-1, a+n) ∧ ∃z ∈ F[a+n-1, a+n) (x ∈ F[z, z+1)),
    /// with the extra conjunct x ∉ F[a+n-2, a+n-1) for n ≥ 2. The conjunct
    /// is implied when L > 3; on a sample it stops vertices that B misses
    /// near a+1 from re-entering two steps later.
    /// For n < 0 the mirrored intervals F(a-m, a-m+1] are built the same
    /// way; on an integer-distance-free sample F[a-m, a-m+1) equals
    /// F(a-m, a-m+1] except that a itself is dropped when m = 1.
    pub fn f_interval(&self, a: usize, n: i64) -> Result<VertexSet> {
        if a >= self.n() {
            return Err(Error::IndexOutOfRange { index: a, len: self.n() });
        }
        if n >= 0 {
            self.iterate(a, n as usize, true)
        } else {
            let m = n.unsigned_abs() as usize;
            let mut s = self.iterate(a, m - 1, false)?;
            if m == 1 {
                s.remove(a);
            }
            Ok(s)
        }
    }

    /// F(a-m, a-m+1] for m ≥ 1.
    pub fn f_interval_neg(&self, a: usize, m: usize) -> Result<VertexSet> {
        self.iterate(a, m.saturating_sub(1), false)
    }

    fn iterate(&self, a: usize, steps: usize, forward: bool) -> Result<VertexSet> {
        let base = |z: usize| if forward { self.f_base(z) } else { self.f_base_neg(z) };
        let mut cur = base(a).clone();
        let mut prev = VertexSet::new(self.n());
        let floor_l = self.loop_.n_l().saturating_sub(1);
        for step in 1..=steps {
            let mut next = VertexSet::new(self.n());
            for z in &cur {
                next.union_with(base(z));
            }
            next.difference_with(&cur);
            next.difference_with(&prev);
            if next.is_empty() {
                if step < floor_l {
                    return Err(Error::ApproximationFailure(format!(
                        "F-interval {step} from vertex {a} is empty"
                    )));
                }
                return Ok(next);
            }
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(cur)
    }

    /// Elements of `f` with no predecessor in `f`:
    /// ¬∃y' ∈ F (y' ≠ y ∧ y ∈ F[y', y'+1)).
    pub fn first_candidates(&self, f: &VertexSet) -> Vec<usize> {
        f.iter()
            .filter(|&y| !f.iter().any(|u| u != y && self.f_base(u).contains(y)))
            .collect()
    }

    /// The order-first element of `f`. Several candidates (possible when B
    /// misses a pair near the threshold) are resolved by the largest
    /// forward cover |F ∩ F[y, y+1)| and flagged approximate.
    fn first_of(&self, f: &VertexSet) -> Option<Translate> {
        let cands = self.first_candidates(f);
        match cands.as_slice() {
            [] => None,
            [y] => Some(Translate {
                vertex: *y,
                approximate: false,
            }),
            _ => cands
                .iter()
                .map(|&y| (f.intersection_count(self.f_base(y)), std::cmp::Reverse(y)))
                .max()
                .map(|(_, std::cmp::Reverse(y))| Translate {
                    vertex: y,
                    approximate: true,
                }),
        }
    }

    /// f_z(x): the first vertex of F[x+z, x+z+1), the finite surrogate for
    /// the point x+z.
    ///
    /// The displayed minimum "¬∃y',y'' ∈ F C(y',y,y'')" cannot hold once F
    /// has three elements (any y is between two others read cyclically),
    /// so the first element is characterized as the one no other element
    /// of F precedes within a unit window.
    pub fn recover_translate(&self, x: usize, z: i64) -> Result<Option<Translate>> {
        if z == 0 {
            self.f_interval(x, 0)?;
            return Ok(Some(Translate {
                vertex: x,
                approximate: false,
            }));
        }
        let f = self.f_interval(x, z)?;
        Ok(self.first_of(&f))
    }

    fn included(&self, a: &VertexSet, b: &VertexSet) -> bool {
        a.difference(b).count() <= self.inclusion_slack
    }

    /// J_{z,k}(a,b): (F[a+z,a+z+1) ⊄ F[b+k,b+k+1) ∪ F[b+k+1,b+k+2)) ∨
    /// (F[a+z,a+z+1) = F[b+k+1,b+k+2)).
    pub fn j(&self, z: i64, k: i64, a: usize, b: usize) -> Result<bool> {
        let fa = self.f_interval(a, z)?;
        let fb0 = self.f_interval(b, k)?;
        let fb1 = self.f_interval(b, k + 1)?;
        let union = fb0.union(&fb1);
        Ok(!self.included(&fa, &union) || (self.included(&fa, &fb1) && self.included(&fb1, &fa)))
    }

    /// D(a+z, b+k) = {x : ∃v ∈ F[a+z,a+z+1) ∀v' ∈ F[b+k,b+k+1) C(v,x,v')}.
    pub fn d_set(&self, z: i64, k: i64, a: usize, b: usize) -> Result<VertexSet> {
        let f1 = self.f_interval(a, z)?;
        let f2 = self.f_interval(b, k)?;
        let n = self.n();
        let mut out = VertexSet::new(n);
        if f2.is_empty() {
            // Vacuous ∀: every x qualifies once F1 is nonempty.
            if !f1.is_empty() {
                out = VertexSet::full(n);
            }
            return Ok(out);
        }
        for v in &f1 {
            // C(v,x,v') for all v' ⇔ 0 < fd(v,x) < min fd(v,v').
            let bound = f2.iter().map(|w| self.fd(v, w)).min().unwrap_or(0);
            if bound <= 1 {
                continue;
            }
            for x in 0..n {
                let d = self.fd(v, x);
                if d > 0 && d < bound {
                    out.insert(x);
                }
            }
        }
        Ok(out)
    }

    /// Membership of `x` in D(a+z, b+k).
    pub fn d_contains(&self, z: i64, k: i64, a: usize, b: usize, x: usize) -> Result<bool> {
        let f1 = self.f_interval(a, z)?;
        let f2 = self.f_interval(b, k)?;
        if f2.is_empty() {
            return Ok(!f1.is_empty());
        }
        Ok(f1.iter().any(|v| {
            let d = self.fd(v, x);
            d > 0 && f2.iter().all(|w| d < self.fd(v, w))
        }))
    }

    /// C_{z,t,k}(a,c,b), i.e. C(a+z, c+t, b+k), by the three-case disjunction
    /// over J and D.
    pub fn recover_c_ztk(&self, z: i64, t: i64, k: i64, a: usize, c: usize, b: usize) -> Result<bool> {
        self.check3(a, c, b)?;
        if self.j(z, k, a, b)? && self.d_contains(z - t, k - t, a, b, c)? {
            return Ok(true);
        }
        if self.j(t, z, c, a)? && self.d_contains(t - k, z - k, c, a, b)? {
            return Ok(true);
        }
        Ok(self.j(k, t, b, c)? && self.d_contains(k - z, t - z, b, c, a)?)
    }

    /// Pairs (a, b) with f_z(a) = b and f_{-z}(b) = a for every tested
    /// shift: translate chains that keep landing on the same vertices, as
    /// a pair at integer distance would. Diagnostic only.
    pub fn integer_distance_signals(&self, vertices: &[usize], max_shift: i64) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for &a in vertices {
            for z in 1..=max_shift {
                let Ok(Some(fw)) = self.recover_translate(a, z) else {
                    continue;
                };
                if fw.approximate {
                    continue;
                }
                if let Ok(Some(back)) = self.recover_translate(fw.vertex, -z) {
                    if back.vertex == a && !back.approximate {
                        // A forward landing that is also exact backward at the
                        // next shift is the repeated pattern we flag.
                        if let Ok(Some(fw2)) = self.recover_translate(a, z + 1) {
                            if let Ok(Some(back2)) = self.recover_translate(fw2.vertex, -(z + 1)) {
                                if back2.vertex == a {
                                    out.push((a, fw.vertex, z));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize, edges: &[(usize, usize)]) -> Vec<VertexSet> {
        let mut r = vec![VertexSet::new(n); n];
        for &(u, v) in edges {
            r[u].insert(v);
            r[v].insert(u);
        }
        r
    }

    #[test]
    fn complete_graph_gives_complete_b() {
        let mut edges = Vec::new();
        for u in 0..6 {
            for v in u + 1..6 {
                edges.push((u, v));
            }
        }
        let g = GeoGraph::from_edges(6, &edges, 1.0, 0).unwrap();
        let b = recover_b(&g);
        for u in 0..6 {
            for v in 0..6 {
                assert_eq!(b.holds(u, v), u != v);
            }
        }
    }

    #[test]
    fn b_is_symmetric_irreflexive() {
        let g = GeoGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], 0.5, 0).unwrap();
        let b = recover_b(&g);
        for u in 0..5 {
            assert!(!b.holds(u, u));
            for v in 0..5 {
                assert_eq!(b.holds(u, v), b.holds(v, u));
            }
        }
    }

    #[test]
    fn vacuous_interval_is_everything() {
        let b = RecoveredB::from_rows(rows(4, &[(0, 1), (2, 3)]));
        assert_eq!(recover_interval(&b, 0, 1).unwrap().count(), 4);
        assert_eq!(recover_interval(&b, 0, 2), Err(Error::NotBAdjacent(0, 2)));
    }

    /// `n` points evenly spaced on a circle of length 7 with true B, and
    /// the loop through every `step`-th point.
    fn ring(n: usize, step: usize) -> (RecoveredB, OrientingLoop) {
        use crate::spaces::Point;
        let g = GeoGraph::from_edges(n, &[], 0.5, 0)
            .unwrap()
            .attach_coordinates(
                SpaceDescriptor::circle(7.0).unwrap(),
                (0..n).map(|i| Point(vec![0.01 + 7.0 * i as f64 / n as f64])).collect(),
            )
            .unwrap();
        let b = RecoveredB::from_coordinates(&g).unwrap();
        let lp = OrientingLoop {
            vertices: (0..n).step_by(step).collect(),
            mode: LoopMode::GroundTruth,
            partition: None,
        };
        (b, lp)
    }

    #[test]
    fn ring_order_and_degenerate() {
        let (b, lp) = ring(40, 5);
        let r = Recovery::new(&b, lp).unwrap();
        assert!(r.recover_order(0, 5, 10).unwrap());
        assert!(!r.recover_order(10, 5, 0).unwrap());
        for (x, y, z) in [(1, 17, 33), (17, 33, 1), (2, 3, 39), (12, 30, 31)] {
            assert!(r.recover_order(x, y, z).unwrap(), "{x} {y} {z}");
            assert!(!r.recover_order(x, z, y).unwrap(), "{x} {z} {y}");
        }
        assert_eq!(r.recover_order(0, 0, 4), Err(Error::DegenerateTriple));
    }

    #[test]
    fn ring_translates_are_singletons() {
        // Spacing 0.7: [x+1, x+2) holds only the point 1.4 ahead.
        let (b, lp) = ring(10, 1);
        let r = Recovery::new(&b, lp).unwrap();
        assert_eq!(r.f_interval(0, 1).unwrap().to_vec(), vec![2]);
        assert_eq!(r.recover_translate(0, 1).unwrap().unwrap().vertex, 2);
        assert_eq!(r.recover_translate(3, 0).unwrap().unwrap().vertex, 3);
        assert!(r.f_interval(5, 0).unwrap().contains(5));
    }

    #[test]
    fn d_set_matches_membership() {
        let (b, lp) = ring(40, 5);
        let r = Recovery::new(&b, lp).unwrap();
        for (z, k) in [(0, 1), (1, 0), (-1, 2)] {
            let d = r.d_set(z, k, 0, 15).unwrap();
            for x in 0..40 {
                assert_eq!(d.contains(x), r.d_contains(z, k, 0, 15, x).unwrap());
            }
        }
    }

    #[test]
    fn dense_ring_translates() {
        // Spacing 0.175: x+1 is a sample point only up to rounding, so the
        // first point of [x+1, x+2) is 6 or 7 steps ahead.
        let (b, lp) = ring(40, 5);
        let r = Recovery::new(&b, lp).unwrap();
        for x in [0, 13, 27] {
            let t = r.recover_translate(x, 1).unwrap().unwrap().vertex;
            assert!([(x + 6) % 40, (x + 7) % 40].contains(&t), "{x} -> {t}");
            let back = r.recover_translate(x, -2).unwrap().unwrap().vertex;
            // The union of windows from F(x-1, x] reaches only x-1.875.
            assert!([(x + 29) % 40, (x + 30) % 40].contains(&back), "{x} -> {back}");
        }
        // Disjoint successive intervals.
        let f: Vec<VertexSet> = (0..4).map(|n| r.f_interval(0, n).unwrap()).collect();
        for w in f.windows(2) {
            assert!(!w[0].intersects(&w[1]));
        }
    }

    #[test]
    fn loop_search_on_true_b() {
        let (b, _) = ring(140, 1);
        let cache = IntervalCache::default();
        let lp = adjacency_loop(&b, &cache, &LoopOptions::default()).unwrap();
        assert_eq!(lp.n_l(), 8);
        assert!(lp.partition.unwrap().passed);
    }

    #[test]
    fn interval_on_a_path() {
        // B on a line 0-1-2-3-4 where consecutive and distance-2 pairs relate.
        let b = RecoveredB::from_rows(rows(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3), (2, 4)]));
        // Common neighbours of 1 and 2 are {0, 3}; x must be B-close to both.
        assert_eq!(recover_interval(&b, 1, 2).unwrap().to_vec(), vec![1, 2]);
    }
}
