//! One-point extensions in rational metric spaces: Katětov functions, the
//! C_n-preserving back-and-forth for the Urysohn space, and its graph
//! variant. C_n(x, y) holds iff n−1 < d(x, y) < n. All arithmetic is exact.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{band, int, rat, strictly_in_band, Rational, RationalMetricSpace};
use crate::rng::substream;

/// Distances from a prospective new point to every point of a space.
pub type KatetovFunction = Vec<Rational>;

/// First pair (x, y) breaking |f(x)−f(y)| ≤ d(x,y) ≤ f(x)+f(y); (x, x) when
/// f(x) is not positive.
pub fn katetov_violation(space: &RationalMetricSpace, f: &[Rational]) -> Option<(usize, usize)> {
    if f.len() != space.len() {
        return Some((f.len(), space.len()));
    }
    for x in 0..f.len() {
        if !f[x].is_positive() {
            return Some((x, x));
        }
        for y in x + 1..f.len() {
            let d = space.dist(x, y);
            if (&f[x] - &f[y]).abs() > *d || *d > &f[x] + &f[y] {
                return Some((x, y));
            }
        }
    }
    None
}

/// The space with one more point at distances `f`.
pub fn katetov_extend(space: &RationalMetricSpace, f: &[Rational], label: &str) -> Result<RationalMetricSpace> {
    if let Some((x, y)) = katetov_violation(space, f) {
        return Err(Error::NotKatetov(x, y));
    }
    if space.index_of(label).is_some() {
        return Err(Error::InvalidMetric(format!("label {label} already present")));
    }
    let mut out = space.clone();
    out.push_point(label.to_string(), f);
    out.integer_distance_free = space.integer_distance_free && f.iter().all(|q| !q.is_integer());
    Ok(out)
}

/// Feasible values for f(z) given f on `assigned`: [max |f(w) − d(w,z)|,
/// min f(w) + d(w,z)]. The upper end is `None` when nothing is assigned.
fn feasible(space: &RationalMetricSpace, assigned: &[(usize, Rational)], z: usize) -> (Rational, Option<Rational>) {
    let mut lo = Rational::zero();
    let mut hi: Option<Rational> = None;
    for (w, fw) in assigned {
        let d = space.dist(*w, z);
        let l = (fw - d).abs();
        if l > lo {
            lo = l;
        }
        let h = fw + d;
        if hi.as_ref().is_none_or(|cur| h < *cur) {
            hi = Some(h);
        }
    }
    (lo, hi)
}

/// A positive non-integer value in [lo, hi], preferring the midpoint.
fn pick_non_integer(lo: &Rational, hi: &Rational) -> Option<Rational> {
    let mut tries = vec![(lo + hi) / int(2), hi.clone()];
    tries.extend((3..12).map(|k| hi - (hi - lo) / int(k)));
    tries.into_iter().find(|q| q.is_positive() && !q.is_integer() && q >= lo && q <= hi)
}

/// Extends a Katětov function given on some points to the whole space, one
/// point at a time inside the feasible interval. Values stay off the
/// integers where the interval allows; a forced value may be an integer or
/// zero, which [`realize`] repairs.
pub fn complete_katetov(space: &RationalMetricSpace, partial: &[(usize, Rational)]) -> Result<KatetovFunction> {
    let mut assigned: Vec<(usize, Rational)> = partial.to_vec();
    let mut f: Vec<Option<Rational>> = vec![None; space.len()];
    for (w, q) in partial {
        f[*w] = Some(q.clone());
    }
    for z in 0..space.len() {
        if f[z].is_some() {
            continue;
        }
        let (lo, hi) = feasible(space, &assigned, z);
        let hi = hi.unwrap_or_else(|| &lo + rat(1, 2));
        if lo > hi {
            return Err(Error::NotKatetov(z, z));
        }
        let q = pick_non_integer(&lo, &hi).unwrap_or(hi);
        f[z] = Some(q.clone());
        assigned.push((z, q));
    }
    Ok(f.into_iter().map(|q| q.expect("assigned")).collect())
}

/// Distances of a realizable point y0 for the plan: the completed Katětov
/// function, shifted by the first δ ∈ {ε/4, ε/5, ...} that moves every
/// value off the integers when some value sits on one. f + δ is again
/// Katětov and is the point at distance δ from the prescribed y, the
/// "d(y0, y) < ε/2" of the density step; bands stay exact because the
/// prescribed values lie in (n−1+ε, n−ε).
pub fn realize(ys: &RationalMetricSpace, plan: &ExtensionPlan) -> Result<KatetovFunction> {
    let f = complete_katetov(ys, &plan.distances)?;
    if f.iter().all(|q| q.is_positive() && !q.is_integer()) {
        return Ok(f);
    }
    for k in 4..64 {
        let delta = &plan.epsilon / int(k);
        let g: Vec<Rational> = f.iter().map(|q| q + &delta).collect();
        if g.iter().all(|q| !q.is_integer()) {
            return Ok(g);
        }
    }
    Err(Error::InvalidMetric("no shift moves the extension off the integers".into()))
}

/// Partial bijection between two metric spaces, by point index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnMap {
    pairs: Vec<(usize, usize)>,
}

impl CnMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut m = CnMap::new();
        for (x, y) in pairs {
            m.insert(x, y)?;
        }
        Ok(m)
    }

    pub fn insert(&mut self, x: usize, y: usize) -> Result<()> {
        if self.image(x).is_some() || self.preimage(y).is_some() {
            return Err(Error::InvalidConfig(format!("pair ({x}, {y}) breaks injectivity")));
        }
        self.pairs.push((x, y));
        Ok(())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn image(&self, x: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    pub fn preimage(&self, y: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == y).map(|p| p.0)
    }

    pub fn transpose(&self) -> CnMap {
        CnMap {
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }
}

/// First pair of domain points whose distance band is not preserved
/// (including integer distances on either side).
pub fn cn_violation(x: &RationalMetricSpace, y: &RationalMetricSpace, map: &CnMap) -> Option<(usize, usize)> {
    let p = map.pairs();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let bx = band(x.dist(p[i].0, p[j].0));
            let by = band(y.dist(p[i].1, p[j].1));
            if bx.is_none() || bx != by {
                return Some((p[i].0, p[j].0));
            }
        }
    }
    None
}

/// D_n = {f(x') : n−1 < d(x0, x') < n}, keyed by n.
pub type DSets = BTreeMap<i64, Vec<usize>>;

/// ε_{y'} = min{d(y'', y') − (n−k) + 1 : y'' ∈ D_k, k < n}; `None` is ∞.
pub fn epsilon_prime(dsets: &DSets, ys: &RationalMetricSpace, yp: usize) -> Result<Option<Rational>> {
    let n = *dsets
        .iter()
        .find(|(_, v)| v.contains(&yp))
        .ok_or_else(|| Error::InvalidConfig(format!("point {yp} lies in no D_n")))?
        .0;
    let mut best: Option<Rational> = None;
    for (&k, members) in dsets.range(..n) {
        for &ypp in members {
            let e = ys.dist(ypp, yp) - int(n - k) + Rational::one();
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        }
    }
    if let Some(e) = &best {
        if !e.is_positive() {
            return Err(Error::NonPositiveEpsilon(yp));
        }
    }
    Ok(best)
}

/// ε = (1/10) · min over ε_{y'} and over the band gaps of pairs in Y; 1/10
/// when both minima are empty.
pub fn choose_epsilon(dsets: &DSets, ys: &RationalMetricSpace) -> Result<Rational> {
    let members: Vec<usize> = dsets.values().flatten().copied().collect();
    let mut best: Option<Rational> = None;
    let mut take = |q: Rational| {
        if best.as_ref().is_none_or(|b| q < *b) {
            best = Some(q);
        }
    };
    for &yp in &members {
        if let Some(e) = epsilon_prime(dsets, ys, yp)? {
            take(e);
        }
    }
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let d = ys.dist(a, b);
            let m = band(d).ok_or(Error::IntegerDistanceInY(a, b))?;
            take(int(m) - d);
            take(d - int(m - 1));
        }
    }
    Ok(match best {
        Some(q) => q / int(10),
        None => rat(1, 10),
    })
}

/// Prescribed distances from the new point y to the range of the map.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionPlan {
    pub dsets: DSets,
    /// (y', ε_{y'}), `None` for ∞.
    pub eps_primes: Vec<(usize, Option<Rational>)>,
    pub epsilon: Rational,
    /// (y', d(y, y')) for every y' in the range.
    pub distances: Vec<(usize, Rational)>,
}

impl ExtensionPlan {
    pub fn distance_to(&self, yp: usize) -> Option<&Rational> {
        self.distances.iter().find(|p| p.0 == yp).map(|p| &p.1)
    }

    pub fn band_of(&self, yp: usize) -> Option<i64> {
        self.dsets.iter().find(|(_, v)| v.contains(&yp)).map(|(n, _)| *n)
    }

    /// JSON with rationals as "p/q" strings.
    pub fn to_json_value(&self) -> serde_json::Value {
        let q = |r: &Rational| serde_json::Value::String(r.to_string());
        serde_json::json!({
            "dsets": self.dsets,
            "epsilon": q(&self.epsilon),
            "eps_primes": self.eps_primes.iter().map(|(y, e)| serde_json::json!([y, e.as_ref().map_or(serde_json::Value::Null, q)])).collect::<Vec<_>>(),
            "distances": self.distances.iter().map(|(y, d)| serde_json::json!([y, q(d)])).collect::<Vec<_>>(),
        })
    }
}

/// d(y, y') = n−1+ε_{y'}−2ε if ε_{y'} < 1, else n−ε, for y' ∈ D_n.
pub fn extension_distances(
    xs: &RationalMetricSpace,
    ys: &RationalMetricSpace,
    map: &CnMap,
    x0: usize,
) -> Result<ExtensionPlan> {
    if x0 >= xs.len() {
        return Err(Error::IndexOutOfRange { index: x0, len: xs.len() });
    }
    if map.image(x0).is_some() {
        return Err(Error::InvalidConfig(format!("point {x0} is already mapped")));
    }
    let mut dsets = DSets::new();
    for &(xp, yp) in map.pairs() {
        let n = band(xs.dist(x0, xp))
            .ok_or_else(|| Error::InvalidMetric(format!("integer distance between {x0} and {xp}")))?;
        dsets.entry(n).or_default().push(yp);
    }
    let epsilon = choose_epsilon(&dsets, ys)?;
    let mut eps_primes = Vec::new();
    let mut distances = Vec::new();
    for (&n, members) in &dsets {
        for &yp in members {
            let e = epsilon_prime(&dsets, ys, yp)?;
            let d = match &e {
                Some(e) if *e < Rational::one() => int(n - 1) + e - &epsilon * int(2),
                _ => int(n) - &epsilon,
            };
            if !strictly_in_band(&d, n) {
                return Err(Error::NonPositiveEpsilon(yp));
            }
            eps_primes.push((yp, e));
            distances.push((yp, d));
        }
    }
    Ok(ExtensionPlan {
        dsets,
        eps_primes,
        epsilon,
        distances,
    })
}

/// First pair (y1, y2) for which the triangle y·y1·y2 fails, checked
/// against the plan's distances.
pub fn verify_extension_triangles(ys: &RationalMetricSpace, distances: &[(usize, Rational)]) -> Option<(usize, usize)> {
    for (i, (y1, d1)) in distances.iter().enumerate() {
        for (y2, d2) in &distances[i + 1..] {
            let d12 = ys.dist(*y1, *y2);
            if d12 > &(d1 + d2) || d1 > &(d12 + d2) || d2 > &(d12 + d1) {
                return Some((*y1, *y2));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMode {
    /// Realize y by a Katětov extension of Y.
    #[default]
    Exact,
    /// Use an existing point within ε/2 of every prescribed distance.
    Snap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapExtension {
    pub map: CnMap,
    /// Y, grown by one point in exact mode.
    pub target: RationalMetricSpace,
    pub image: usize,
    pub plan: ExtensionPlan,
}

/// Index of an unmapped target point within ε/2 of every prescribed
/// distance.
fn snap_point(ys: &RationalMetricSpace, map: &CnMap, plan: &ExtensionPlan) -> Option<usize> {
    let half = &plan.epsilon / int(2);
    (0..ys.len()).find(|&v| {
        map.preimage(v).is_none() && plan.distances.iter().all(|(yp, d)| (ys.dist(v, *yp) - d).abs() < half)
    })
}

/// Extends `map` to x0 ∈ X. In exact mode Y gains the realized point.
pub fn extend_map(
    xs: &RationalMetricSpace,
    ys: &RationalMetricSpace,
    map: &CnMap,
    x0: usize,
    mode: ExtensionMode,
) -> Result<MapExtension> {
    let plan = extension_distances(xs, ys, map, x0)?;
    if let Some((a, b)) = verify_extension_triangles(ys, &plan.distances) {
        return Err(Error::NotKatetov(a, b));
    }
    let (target, image) = match mode {
        ExtensionMode::Exact => {
            let f = realize(ys, &plan)?;
            let label = ys.fresh_label(&format!("{}~", xs.labels[x0]));
            (katetov_extend(ys, &f, &label)?, ys.len())
        }
        ExtensionMode::Snap => {
            let v = snap_point(ys, map, &plan)
                .ok_or_else(|| Error::SnapFailure(format!("no point within ε/2 = {} of the target", &plan.epsilon / int(2))))?;
            (ys.clone(), v)
        }
    };
    let mut m = map.clone();
    m.insert(x0, image)?;
    if let Some((a, b)) = cn_violation(xs, &target, &m) {
        return Err(Error::InvalidMetric(format!("extension broke C_n on ({a}, {b})")));
    }
    Ok(MapExtension {
        map: m,
        target,
        image,
        plan,
    })
}

/// Extends the map in the other direction: y0 ∈ Y gets a preimage in X.
pub fn extend_map_back(
    xs: &RationalMetricSpace,
    ys: &RationalMetricSpace,
    map: &CnMap,
    y0: usize,
    mode: ExtensionMode,
) -> Result<MapExtension> {
    let mut e = extend_map(ys, xs, &map.transpose(), y0, mode)?;
    e.map = e.map.transpose();
    Ok(e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forth,
    Back,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackAndForth {
    pub map: CnMap,
    pub left: RationalMetricSpace,
    pub right: RationalMetricSpace,
    /// (direction, chosen point, its partner).
    pub transcript: Vec<(Direction, usize, usize)>,
}

/// Alternates forth and back steps, choosing fresh points by seed. A side
/// with no unmapped point yields its turn; the run stops early when both
/// sides are covered.
pub fn back_and_forth(
    u1: &RationalMetricSpace,
    u2: &RationalMetricSpace,
    rounds: usize,
    mode: ExtensionMode,
    seed: u64,
) -> Result<BackAndForth> {
    let mut rng = substream(seed, 0x424e46);
    let mut left = u1.clone();
    let mut right = u2.clone();
    let mut map = CnMap::new();
    let mut transcript = Vec::new();
    for round in 0..rounds {
        let fresh = |space: &RationalMetricSpace, mapped: &dyn Fn(usize) -> bool| -> Vec<usize> {
            (0..space.len()).filter(|&v| !mapped(v)).collect()
        };
        let forth = fresh(&left, &|v| map.image(v).is_some());
        let back = fresh(&right, &|v| map.preimage(v).is_some());
        let dir = match (round % 2 == 0, forth.is_empty(), back.is_empty()) {
            (_, true, true) => break,
            (true, false, _) | (false, false, true) => Direction::Forth,
            _ => Direction::Back,
        };
        match dir {
            Direction::Forth => {
                let x0 = forth[rng.random_range(0..forth.len())];
                let e = extend_map(&left, &right, &map, x0, mode)?;
                transcript.push((dir, x0, e.image));
                right = e.target;
                map = e.map;
            }
            Direction::Back => {
                let y0 = back[rng.random_range(0..back.len())];
                let e = extend_map_back(&left, &right, &map, y0, mode)?;
                transcript.push((dir, y0, e.image));
                left = e.target;
                map = e.map;
            }
        }
    }
    if let Some((a, b)) = cn_violation(&left, &right, &map) {
        return Err(Error::InvalidMetric(format!("back-and-forth broke C_n on ({a}, {b})")));
    }
    Ok(BackAndForth {
        map,
        left,
        right,
        transcript,
    })
}

/// A graph on a rational metric space whose edges join points at distance
/// below 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricGraph {
    pub space: RationalMetricSpace,
    pub adj: Vec<Vec<bool>>,
}

impl MetricGraph {
    pub fn new(space: RationalMetricSpace, edges: &[(usize, usize)]) -> Result<Self> {
        let n = space.len();
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a == b || a >= n || b >= n || *space.dist(a, b) >= Rational::one() {
                return Err(Error::InvalidConfig(format!("edge ({a}, {b}) is not within distance 1")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Ok(MetricGraph { space, adj })
    }

    /// Joins each pair at distance below 1 with probability p.
    pub fn random(space: RationalMetricSpace, p: f64, rng: &mut ChaCha8Rng) -> Self {
        let n = space.len();
        let mut adj = vec![vec![false; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                if *space.dist(a, b) < Rational::one() && rng.random_bool(p) {
                    adj[a][b] = true;
                    adj[b][a] = true;
                }
            }
        }
        MetricGraph { space, adj }
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn unit_threshold_holds(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| !self.adj[a][b] || *self.space.dist(a, b) < Rational::one()))
    }
}

/// First pair on which the map breaks E.
pub fn edge_violation(g1: &MetricGraph, g2: &MetricGraph, map: &CnMap) -> Option<(usize, usize)> {
    let p = map.pairs();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if g1.adjacent(p[i].0, p[j].0) != g2.adjacent(p[i].1, p[j].1) {
                return Some((p[i].0, p[j].0));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadoExtension {
    pub map: CnMap,
    pub target: MetricGraph,
    pub image: usize,
    /// Images of the neighbours of x0.
    pub q: Vec<usize>,
}

/// Extends a map preserving E and every C_n to x0 ∈ G1.
pub fn rado_extend(
    g1: &MetricGraph,
    g2: &MetricGraph,
    map: &CnMap,
    x0: usize,
    mode: ExtensionMode,
    p: f64,
    seed: u64,
) -> Result<RadoExtension> {
    if let Some((a, b)) = edge_violation(g1, g2, map) {
        return Err(Error::InvalidConfig(format!("map breaks E on ({a}, {b})")));
    }
    let plan = extension_distances(&g1.space, &g2.space, map, x0)?;
    if let Some((a, b)) = verify_extension_triangles(&g2.space, &plan.distances) {
        return Err(Error::NotKatetov(a, b));
    }
    let q: Vec<usize> = map
        .pairs()
        .iter()
        .filter(|&&(xp, _)| g1.adjacent(x0, xp))
        .map(|&(_, yp)| yp)
        .collect();
    for &y in &q {
        match plan.distance_to(y) {
            Some(d) if *d < Rational::one() => {}
            _ => return Err(Error::InvalidConfig(format!("neighbour image {y} lies outside the unit ball"))),
        }
    }
    let (target, image) = match mode {
        ExtensionMode::Exact => {
            let f = realize(&g2.space, &plan)?;
            let label = g2.space.fresh_label(&format!("{}~", g1.space.labels[x0]));
            let space = katetov_extend(&g2.space, &f, &label)?;
            let n = space.len();
            let y0 = n - 1;
            let mut adj = g2.adj.clone();
            for row in adj.iter_mut() {
                row.push(false);
            }
            adj.push(vec![false; n]);
            let mut rng = substream(seed, 0x5241_444f);
            for z in 0..y0 {
                let edge = if map.preimage(z).is_some() {
                    q.contains(&z)
                } else {
                    *space.dist(y0, z) < Rational::one() && rng.random_bool(p)
                };
                adj[y0][z] = edge;
                adj[z][y0] = edge;
            }
            (MetricGraph { space, adj }, y0)
        }
        ExtensionMode::Snap => {
            let half = &plan.epsilon / int(2);
            let v = (0..g2.len())
                .find(|&v| {
                    map.preimage(v).is_none()
                        && plan.distances.iter().all(|(yp, d)| (g2.space.dist(v, *yp) - d).abs() < half)
                        && map.pairs().iter().all(|&(_, yp)| g2.adjacent(v, yp) == q.contains(&yp))
                })
                .ok_or_else(|| Error::SnapFailure("no vertex with the prescribed distances and adjacency".into()))?;
            (g2.clone(), v)
        }
    };
    let mut m = map.clone();
    m.insert(x0, image)?;
    if let Some((a, b)) = cn_violation(&g1.space, &target.space, &m) {
        return Err(Error::InvalidMetric(format!("extension broke C_n on ({a}, {b})")));
    }
    if let Some((a, b)) = edge_violation(g1, &target, &m) {
        return Err(Error::InvalidConfig(format!("extension broke E on ({a}, {b})")));
    }
    Ok(RadoExtension {
        map: m,
        target,
        image,
        q,
    })
}

/// Denominator of generated distances before the off-integer rescaling.
const GEN_DEN: i64 = 20;

/// Random integer-distance-free metric space on `size` points.
///
/// Distances k/20 ∈ (0, 4] are closed under shortest paths, then scaled by
/// 1001/1000. Scaling keeps the triangle inequality, and a/20 · 1001/1000
/// is an integer only when 20000 divides a, which never happens below 4.
pub fn random_space(size: usize, prefix: &str, rng: &mut ChaCha8Rng) -> RationalMetricSpace {
    let mut d = vec![vec![Rational::zero(); size]; size];
    for a in 0..size {
        for b in a + 1..size {
            let q = rat(rng.random_range(1..=4 * GEN_DEN), GEN_DEN);
            d[a][b] = q.clone();
            d[b][a] = q;
        }
    }
    for k in 0..size {
        for a in 0..size {
            for b in 0..size {
                let via = &d[a][k] + &d[k][b];
                if via < d[a][b] {
                    d[a][b] = via;
                }
            }
        }
    }
    let scale = rat(1001, 1000);
    for row in d.iter_mut() {
        for q in row.iter_mut() {
            *q = &*q * &scale;
        }
    }
    let labels = (0..size).map(|i| format!("{prefix}{i}")).collect();
    RationalMetricSpace::new(labels, d, true)
}

/// Adds one point at random Katětov distances, off the integers.
pub fn random_katetov_point(space: &RationalMetricSpace, label: &str, rng: &mut ChaCha8Rng) -> Result<RationalMetricSpace> {
    let mut assigned: Vec<(usize, Rational)> = Vec::new();
    for z in 0..space.len() {
        let (lo, hi) = feasible(space, &assigned, z);
        let hi = hi.unwrap_or_else(|| &lo + int(3));
        let mut value = None;
        for _ in 0..32 {
            let t = rat(rng.random_range(1..97), 97);
            let q = &lo + (&hi - &lo) * t;
            if q.is_positive() && !q.is_integer() {
                value = Some(q);
                break;
            }
        }
        let q = match value {
            Some(q) => q,
            None => pick_non_integer(&lo, &hi)
                .ok_or_else(|| Error::InvalidMetric(format!("no non-integer distance available to point {z}")))?,
        };
        assigned.push((z, q));
    }
    let f: Vec<Rational> = assigned.into_iter().map(|p| p.1).collect();
    katetov_extend(space, &f, label)
}

/// A C_n-preserving instance: X, Y and a map from part of X into Y, with at
/// least one unmapped point on each side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub x: RationalMetricSpace,
    pub y: RationalMetricSpace,
    pub map: CnMap,
}

/// Y is a band-preserving rescaling of the mapped part of X plus random
/// Katětov points, with its points shuffled.
pub fn random_instance(max_size: usize, seed: u64) -> Result<Instance> {
    let mut rng = substream(seed, 0x494e5354);
    let size = rng.random_range(2..=max_size.max(2));
    let x = random_space(size, "x", &mut rng);
    let k = rng.random_range(1..size);
    let mut dom: Vec<usize> = (0..size).collect();
    for i in (1..dom.len()).rev() {
        let j = rng.random_range(0..=i);
        dom.swap(i, j);
    }
    dom.truncate(k);

    // Largest scale 1 + s keeping every distance inside its band.
    let mut gap: Option<Rational> = None;
    let mut maxd = Rational::zero();
    for (i, &a) in dom.iter().enumerate() {
        for &b in &dom[i + 1..] {
            let d = x.dist(a, b);
            let g = int(band(d).expect("integer-distance free")) - d;
            if gap.as_ref().is_none_or(|cur| g < *cur) {
                gap = Some(g);
            }
            if *d > maxd {
                maxd = d.clone();
            }
        }
    }
    let s = match gap {
        Some(g) => Rational::one() + g / (maxd * int(2)) * rat(rng.random_range(0..10), 10),
        None => Rational::one(),
    };
    let d: Vec<Vec<Rational>> = dom
        .iter()
        .map(|&a| dom.iter().map(|&b| x.dist(a, b) * &s).collect())
        .collect();
    let labels = (0..k).map(|i| format!("y{i}")).collect();
    let mut y = RationalMetricSpace::new(labels, d, true);
    let extra = rng.random_range(1..=3);
    for i in 0..extra {
        y = random_katetov_point(&y, &format!("y{}", k + i), &mut rng)?;
    }

    // Shuffle Y so the map is not the identity on indices.
    let n = y.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut inv = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let d: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| y.dist(perm[i], perm[j]).clone()).collect())
        .collect();
    let labels = (0..n).map(|i| y.labels[perm[i]].clone()).collect();
    let free = y.integer_distance_free;
    let y = RationalMetricSpace::new(labels, d, free);
    let map = CnMap::from_pairs(dom.iter().enumerate().map(|(i, &a)| (a, inv[i])).collect())?;
    Ok(Instance { x, y, map })
}

/// Random graphs over the two sides of an instance: G1 by p-coins on pairs
/// below distance 1, G2 copying G1 on mapped pairs and flipping its own
/// coins elsewhere, so the map preserves E.
pub fn random_graph_pair(inst: &Instance, p: f64, seed: u64) -> Result<(MetricGraph, MetricGraph)> {
    let mut rng = substream(seed, 0x4721);
    let g1 = MetricGraph::random(inst.x.clone(), p, &mut rng);
    let mut edges = Vec::new();
    for a in 0..inst.y.len() {
        for b in a + 1..inst.y.len() {
            let copied = match (inst.map.preimage(a), inst.map.preimage(b)) {
                (Some(pa), Some(pb)) => Some(g1.adjacent(pa, pb)),
                _ => None,
            };
            let near = *inst.y.dist(a, b) < Rational::one();
            if copied.unwrap_or_else(|| near && rng.random_bool(p)) {
                edges.push((a, b));
            }
        }
    }
    let g2 = MetricGraph::new(inst.y.clone(), &edges)?;
    Ok((g1, g2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(d: &[&[(i64, i64)]]) -> RationalMetricSpace {
        let n = d.len();
        let m: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational::zero() } else { let (a, b) = d[i][j]; rat(a, b) }).collect())
            .collect();
        RationalMetricSpace::new((0..n).map(|i| format!("p{i}")).collect(), m, true)
    }

    #[test]
    fn epsilon_prime_example() {
        // D_1 = {0}, D_2 = {1}, d = 13/10.
        let ys = sp(&[&[(0, 1), (13, 10)], &[(13, 10), (0, 1)]]);
        let mut ds = DSets::new();
        ds.insert(1, vec![0]);
        ds.insert(2, vec![1]);
        assert_eq!(epsilon_prime(&ds, &ys, 1).unwrap(), Some(rat(13, 10)));
        assert_eq!(epsilon_prime(&ds, &ys, 0).unwrap(), None);
        // min(13/10, 3/10, 7/10) / 10
        assert_eq!(choose_epsilon(&ds, &ys).unwrap(), rat(3, 100));
    }

    #[test]
    fn epsilon_fallback() {
        let ys = RationalMetricSpace::singleton("y");
        let mut ds = DSets::new();
        ds.insert(2, vec![0]);
        assert_eq!(choose_epsilon(&ds, &ys).unwrap(), rat(1, 10));
    }

    #[test]
    fn katetov_checks() {
        let s = sp(&[&[(0, 1), (3, 2)], &[(3, 2), (0, 1)]]);
        assert!(katetov_extend(&s, &[int(1), int(1)], "c").unwrap().is_valid());
        assert_eq!(katetov_extend(&s, &[rat(1, 10), int(3)], "c"), Err(Error::NotKatetov(0, 1)));
        assert_eq!(katetov_extend(&s, &[rat(1, 10), rat(1, 10)], "c"), Err(Error::NotKatetov(0, 1)));
    }

    #[test]
    fn distances_follow_two_cases() {
        // X: x0 with d(x0,a)=0.5 (D_1), d(x0,b)=1.5 (D_2); Y mirrors a, b.
        let xs = sp(&[
            &[(0, 1), (1, 2), (3, 2)],
            &[(1, 2), (0, 1), (13, 10)],
            &[(3, 2), (13, 10), (0, 1)],
        ]);
        let ys = sp(&[&[(0, 1), (13, 10)], &[(13, 10), (0, 1)]]);
        let map = CnMap::from_pairs(vec![(1, 0), (2, 1)]).unwrap();
        let plan = extension_distances(&xs, &ys, &map, 0).unwrap();
        assert_eq!(plan.epsilon, rat(3, 100));
        assert_eq!(plan.distance_to(1), Some(&rat(197, 100)));
        assert_eq!(plan.distance_to(0), Some(&rat(97, 100)));
        let e = extend_map(&xs, &ys, &map, 0, ExtensionMode::Exact).unwrap();
        assert!(e.target.is_valid());
        assert_eq!(e.image, 2);
    }

    #[test]
    fn random_spaces_are_valid() {
        let mut rng = substream(3, 0);
        for size in 1..10 {
            let s = random_space(size, "x", &mut rng);
            assert!(s.is_valid(), "{:?}", s.validate());
            let t = random_katetov_point(&s, "new", &mut rng).unwrap();
            assert!(t.is_valid());
        }
    }
}
