//! Ehrenfeucht–Fraïssé games between two circle graphs in the language of
//! E and the shifted orders C_{z,t,k}, with C read from coordinates.
//!
//! A bijection f: A → B is n-elementary when it is a graph isomorphism and
//! C(a+z, b+t, c+k) ⇔ C(f(a)+z, f(b)+t, f(c)+k) for all a, b, c ∈ A and
//! z, t, k ∈ [−2^n, 2^n].

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphgen::GeoGraph;
use crate::rng::substream;
use crate::spaces::{wrap, Circle};

/// Default cap on the brute-force triple enumeration.
pub const DEFAULT_SHIFT_BUDGET: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Finite partial bijection V_1 → V_2, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialMap {
    pairs: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut m = PartialMap::new();
        for (a, b) in pairs {
            m.insert(a, b)?;
        }
        Ok(m)
    }

    pub fn insert(&mut self, a: usize, b: usize) -> Result<()> {
        if self.image(a).is_some() || self.preimage(b).is_some() {
            return Err(Error::InvalidConfig(format!("pair ({a}, {b}) breaks injectivity")));
        }
        self.pairs.push((a, b));
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

    pub fn image(&self, a: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == a).map(|p| p.1)
    }

    pub fn preimage(&self, b: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == b).map(|p| p.0)
    }

    pub fn transpose(&self) -> PartialMap {
        PartialMap {
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn range(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.1)
    }
}

/// A circle graph with its residues in [0, L).
#[derive(Clone, Debug)]
pub struct CircleGraph<'g> {
    graph: &'g GeoGraph,
    circle: Circle,
    residues: Vec<f64>,
}

impl<'g> CircleGraph<'g> {
    pub fn new(graph: &'g GeoGraph) -> Result<Self> {
        let (space, coords) = graph.geometry()?;
        let circle = *space
            .as_circle()
            .ok_or_else(|| Error::UnsupportedSpace(format!("EF games need a circle, got {}", space.kind_name())))?;
        let residues = coords.iter().map(|p| circle.residue(p)).collect::<Result<Vec<_>>>()?;
        Ok(CircleGraph {
            graph,
            circle,
            residues,
        })
    }

    pub fn graph(&self) -> &'g GeoGraph {
        self.graph
    }

    pub fn circle(&self) -> Circle {
        self.circle
    }

    pub fn n(&self) -> usize {
        self.residues.len()
    }

    pub fn residue(&self, v: usize) -> f64 {
        self.residues[v]
    }

    /// Residue of v + z.
    pub fn shifted(&self, v: usize, z: i64) -> f64 {
        self.circle.shift_residue(self.residues[v], z)
    }

    /// C(a+z, b+t, c+k).
    pub fn c_shift(&self, a: usize, b: usize, c: usize, z: i64, t: i64, k: i64) -> bool {
        Circle::order_residues(self.shifted(a, z), self.shifted(b, t), self.shifted(c, k))
    }
}

fn same_length(g1: &CircleGraph, g2: &CircleGraph) -> Result<()> {
    if g1.circle.length != g2.circle.length {
        return Err(Error::MismatchedSpace(format!(
            "circle lengths {} and {}",
            g1.circle.length, g2.circle.length
        )));
    }
    Ok(())
}

/// First failure of n-elementarity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Edge { pair: [usize; 2] },
    Order { triple: [usize; 3], shifts: [i64; 3] },
}

fn shift_range(n: u32) -> Result<i64> {
    if n > 40 {
        return Err(Error::InvalidConfig(format!("level {n} is too large")));
    }
    Ok(1i64 << n)
}

/// The shifted points a+z, z ∈ [−2^n, 2^n], are cyclically ordered the same
/// way on both sides. Ties answer `None`.
fn shifted_points_agree(g1: &CircleGraph, g2: &CircleGraph, map: &PartialMap, n: u32) -> Result<Option<bool>> {
    let r = shift_range(n)?;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(map.len() * (2 * r as usize + 1));
    for &(a, b) in map.pairs() {
        for z in -r..=r {
            pts.push((g1.shifted(a, z), g2.shifted(b, z)));
        }
    }
    if pts.len() < 3 {
        return Ok(Some(true));
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Ok(None);
    }
    let mut seconds: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let descents = (0..seconds.len())
        .filter(|&i| seconds[(i + 1) % seconds.len()] < seconds[i])
        .count();
    seconds.sort_by(f64::total_cmp);
    if seconds.windows(2).any(|w| w[0] == w[1]) {
        return Ok(None);
    }
    Ok(Some(descents == 1))
}

/// Graph-isomorphism half of the definition.
pub fn edge_violation(g1: &CircleGraph, g2: &CircleGraph, map: &PartialMap) -> Option<Violation> {
    let p = map.pairs();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if g1.graph.adjacent(p[i].0, p[j].0) != g2.graph.adjacent(p[i].1, p[j].1) {
                return Some(Violation::Edge { pair: [p[i].0, p[j].0] });
            }
        }
    }
    None
}

/// Enumerates every triple and every shift vector.
pub fn order_violation_exhaustive(
    g1: &CircleGraph,
    g2: &CircleGraph,
    map: &PartialMap,
    n: u32,
    budget: f64,
) -> Result<Option<Violation>> {
    let r = shift_range(n)?;
    let needed = ((2 * r + 1) as f64).powi(3) * (map.len() as f64).powi(3);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, limit: budget });
    }
    let p = map.pairs();
    for &(a, fa) in p {
        for &(b, fb) in p {
            for &(c, fc) in p {
                for z in -r..=r {
                    for t in -r..=r {
                        for k in -r..=r {
                            if g1.c_shift(a, b, c, z, t, k) != g2.c_shift(fa, fb, fc, z, t, k) {
                                return Ok(Some(Violation::Order {
                                    triple: [a, b, c],
                                    shifts: [z, t, k],
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// `None` when `map` is n-elementary, otherwise the first violation found.
pub fn check_n_elementary(
    g1: &CircleGraph,
    g2: &CircleGraph,
    map: &PartialMap,
    n: u32,
    budget: f64,
) -> Result<Option<Violation>> {
    same_length(g1, g2)?;
    if let Some(v) = edge_violation(g1, g2, map) {
        return Ok(Some(v));
    }
    // Equal cyclic sequences give equal C on every triple; anything else is
    // settled by enumeration, which also names the violation.
    if shifted_points_agree(g1, g2, map, n)? == Some(true) {
        return Ok(None);
    }
    order_violation_exhaustive(g1, g2, map, n, budget)
}

pub fn is_n_elementary(g1: &CircleGraph, g2: &CircleGraph, map: &PartialMap, n: u32) -> Result<bool> {
    Ok(check_n_elementary(g1, g2, map, n, DEFAULT_SHIFT_BUDGET)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub response: usize,
    pub map: PartialMap,
    /// Bracketing arc on the response side as (start, end) residues.
    pub arc: Option<(f64, f64)>,
    /// Candidates rejected before the response was found.
    pub rejected: usize,
}

/// Duplicator's answer to `a` on `side`, keeping the map (n−1)-elementary.
pub fn duplicator_extend(
    g1: &CircleGraph,
    g2: &CircleGraph,
    map: &PartialMap,
    n: u32,
    side: Side,
    a: usize,
) -> Result<Extension> {
    match side {
        Side::Left => extend_left(g1, g2, map, n, a),
        Side::Right => {
            let mut e = extend_left(g2, g1, &map.transpose(), n, a)?;
            e.map = e.map.transpose();
            Ok(e)
        }
    }
}

fn extend_left(g1: &CircleGraph, g2: &CircleGraph, map: &PartialMap, n: u32, a: usize) -> Result<Extension> {
    same_length(g1, g2)?;
    if a >= g1.n() {
        return Err(Error::IndexOutOfRange { index: a, len: g1.n() });
    }
    if n == 0 {
        return Err(Error::InvalidConfig("extension needs level n ≥ 1".into()));
    }
    if let Some(b) = map.image(a) {
        return Ok(Extension {
            response: b,
            map: map.clone(),
            arc: None,
            rejected: 0,
        });
    }
    if check_n_elementary(g1, g2, map, n, DEFAULT_SHIFT_BUDGET)?.is_some() {
        return Err(Error::NotElementary(n));
    }
    let len = g1.circle.length;
    let ra = g1.residue(a);

    if map.is_empty() {
        // Any single pair is elementary at every level; take the nearest residue.
        let b = (0..g2.n())
            .min_by(|&x, &y| {
                let dx = g2.circle.residue_distance(g2.residue(x), ra);
                let dy = g2.circle.residue_distance(g2.residue(y), ra);
                dx.total_cmp(&dy).then(x.cmp(&y))
            })
            .ok_or(Error::WitnessNotFound)?;
        let mut m = map.clone();
        m.insert(a, b)?;
        return Ok(Extension {
            response: b,
            map: m,
            arc: None,
            rejected: 0,
        });
    }

    // Nearest points of A_n on either side of a.
    let r = shift_range(n)?;
    let mut before: Option<(f64, usize, i64)> = None;
    let mut after: Option<(f64, usize, i64)> = None;
    for &(x, fx) in map.pairs() {
        for z in -r..=r {
            let s = g1.shifted(x, z);
            if s == ra {
                return Err(Error::NotApplicable(format!(
                    "vertex {a} coincides with {x}{z:+}: integer distance, check the sampling margin"
                )));
            }
            let back = wrap(ra - s, len);
            let fwd = wrap(s - ra, len);
            if before.is_none_or(|p| back < p.0) {
                before = Some((back, fx, z));
            }
            if after.is_none_or(|p| fwd < p.0) {
                after = Some((fwd, fx, z));
            }
        }
    }
    let (Some((_, b1, z1)), Some((_, b2, z2))) = (before, after) else {
        return Err(Error::WitnessNotFound);
    };
    let lo = g2.shifted(b1, z1);
    let hi = g2.shifted(b2, z2);
    let width = {
        let w = wrap(hi - lo, len);
        // A single point of A_n brackets a from both sides: the arc is the
        // whole circle minus that point.
        if w == 0.0 {
            len
        } else {
            w
        }
    };

    let pattern: Vec<(usize, bool)> = map
        .pairs()
        .iter()
        .map(|&(x, fx)| (fx, g1.graph.adjacent(a, x)))
        .collect();
    let mut candidates: Vec<(f64, usize)> = (0..g2.n())
        .filter(|&v| map.preimage(v).is_none())
        .filter_map(|v| {
            let o = wrap(g2.residue(v) - lo, len);
            (o > 0.0 && o < width).then(|| ((o - width / 2.0).abs(), v))
        })
        .collect();
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));

    let mut rejected = 0;
    for (_, v) in candidates {
        if pattern.iter().any(|&(fx, adj)| g2.graph.adjacent(v, fx) != adj) {
            continue;
        }
        let mut m = map.clone();
        m.insert(a, v)?;
        if check_n_elementary(g1, g2, &m, n - 1, DEFAULT_SHIFT_BUDGET)?.is_none() {
            return Ok(Extension {
                response: v,
                map: m,
                arc: Some((lo, hi)),
                rejected,
            });
        }
        rejected += 1;
    }
    Err(Error::WitnessNotFound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpoilerPolicy {
    Random,
    /// Picks a vertex next to a point of A_n, where the bracketing arc is
    /// shortest.
    Boundary,
    Scripted(Vec<(Side, usize)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub round: usize,
    pub side: Side,
    pub chosen: usize,
    pub response: Option<usize>,
    /// Level the map verified at after this round.
    pub level: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub won: bool,
    pub rounds: usize,
    pub completed: usize,
    pub failed_round: Option<usize>,
    pub failure: Option<String>,
    pub final_level: u32,
    pub map: PartialMap,
    pub transcript: Vec<Move>,
}

/// A game in progress, started at level m + rounds.
pub struct Game<'a, 'g> {
    g1: &'a CircleGraph<'g>,
    g2: &'a CircleGraph<'g>,
    rounds: usize,
    m: u32,
    map: PartialMap,
    transcript: Vec<Move>,
    failure: Option<(usize, String)>,
}

impl<'a, 'g> Game<'a, 'g> {
    pub fn new(g1: &'a CircleGraph<'g>, g2: &'a CircleGraph<'g>, rounds: usize, m: u32) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidConfig("a game needs at least one round".into()));
        }
        same_length(g1, g2)?;
        shift_range(m + rounds as u32)?;
        Ok(Game {
            g1,
            g2,
            rounds,
            m,
            map: PartialMap::new(),
            transcript: Vec::new(),
            failure: None,
        })
    }

    pub fn map(&self) -> &PartialMap {
        &self.map
    }

    pub fn round(&self) -> usize {
        self.transcript.len()
    }

    pub fn is_over(&self) -> bool {
        self.failure.is_some() || self.round() >= self.rounds
    }

    /// Current elementarity level of the map.
    pub fn level(&self) -> u32 {
        self.m + (self.rounds - self.round()) as u32
    }

    fn graph(&self, side: Side) -> &CircleGraph<'g> {
        match side {
            Side::Left => self.g1,
            Side::Right => self.g2,
        }
    }

    /// Plays one Spoiler move and Duplicator's answer.
    pub fn step(&mut self, side: Side, chosen: usize) -> Result<&Move> {
        if self.is_over() {
            return Err(Error::InvalidConfig("the game is over".into()));
        }
        let n = self.graph(side).n();
        if chosen >= n {
            return Err(Error::IndexOutOfRange { index: chosen, len: n });
        }
        let round = self.round() + 1;
        let level = self.level();
        let mv = match duplicator_extend(self.g1, self.g2, &self.map, level, side, chosen) {
            Ok(ext) => {
                self.map = ext.map;
                Move {
                    round,
                    side,
                    chosen,
                    response: Some(ext.response),
                    level: Some(level - 1),
                }
            }
            Err(e) => {
                self.failure = Some((round, e.to_string()));
                Move {
                    round,
                    side,
                    chosen,
                    response: None,
                    level: None,
                }
            }
        };
        self.transcript.push(mv);
        Ok(self.transcript.last().expect("just pushed"))
    }

    /// Verifies the final map at level m.
    pub fn finish(self) -> Result<GameResult> {
        let completed = self.transcript.iter().filter(|m| m.response.is_some()).count();
        let (failed_round, mut failure) = match self.failure {
            Some((r, e)) => (Some(r), Some(e)),
            None => (None, None),
        };
        let mut won = failure.is_none() && completed == self.rounds;
        if won {
            if let Some(v) = check_n_elementary(self.g1, self.g2, &self.map, self.m, DEFAULT_SHIFT_BUDGET)? {
                won = false;
                failure = Some(format!("final map is not {}-elementary: {v:?}", self.m));
            }
        } else if failure.is_none() {
            failure = Some(format!("stopped after {completed} of {} rounds", self.rounds));
        }
        Ok(GameResult {
            won,
            rounds: self.rounds,
            completed,
            failed_round,
            failure,
            final_level: self.m,
            map: self.map,
            transcript: self.transcript,
        })
    }

    fn boundary_pick<R: Rng>(&self, rng: &mut R) -> (Side, usize) {
        let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
        let g = self.graph(side);
        let map = match side {
            Side::Left => self.map.clone(),
            Side::Right => self.map.transpose(),
        };
        if map.is_empty() {
            return (side, rng.random_range(0..g.n()));
        }
        let r = 1i64 << self.level();
        let (x, _) = map.pairs()[rng.random_range(0..map.len())];
        let target = g.shifted(x, rng.random_range(-r..=r));
        let v = (0..g.n())
            .filter(|&v| map.image(v).is_none())
            .min_by(|&u, &v| {
                let du = g.circle.residue_distance(g.residue(u), target);
                let dv = g.circle.residue_distance(g.residue(v), target);
                du.total_cmp(&dv).then(u.cmp(&v))
            })
            .unwrap_or(0);
        (side, v)
    }
}

/// Plays one game with a machine Spoiler.
pub fn play(
    g1: &CircleGraph,
    g2: &CircleGraph,
    rounds: usize,
    m: u32,
    spoiler: &SpoilerPolicy,
    seed: u64,
) -> Result<GameResult> {
    let mut game = Game::new(g1, g2, rounds, m)?;
    let mut rng = substream(seed, 0x4546);
    let mut script = match spoiler {
        SpoilerPolicy::Scripted(s) => s.iter().copied(),
        _ => [].iter().copied(),
    };
    while !game.is_over() {
        let (side, v) = match spoiler {
            SpoilerPolicy::Random => {
                let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
                (side, rng.random_range(0..game.graph(side).n()))
            }
            SpoilerPolicy::Boundary => game.boundary_pick(&mut rng),
            SpoilerPolicy::Scripted(_) => match script.next() {
                Some(mv) => mv,
                None => break,
            },
        };
        game.step(side, v)?;
    }
    game.finish()
}

fn parse_move(line: &str) -> std::result::Result<(Side, usize), String> {
    let mut it = line.split_whitespace();
    let side = match it.next().map(str::to_ascii_lowercase).as_deref() {
        Some("l" | "left" | "1") => Side::Left,
        Some("r" | "right" | "2") => Side::Right,
        Some(other) => return Err(format!("unknown side {other:?}; use L or R")),
        None => return Err("empty input".into()),
    };
    let v = it
        .next()
        .ok_or("missing vertex index")?
        .parse::<usize>()
        .map_err(|e| format!("bad vertex index: {e}"))?;
    if it.next().is_some() {
        return Err("trailing input".into());
    }
    Ok((side, v))
}

/// Human Spoiler on `input`, machine Duplicator. Lines read "L 12" or
/// "R 7"; "quit" stops the game.
pub fn interactive_play<R: BufRead, W: Write>(
    g1: &CircleGraph,
    g2: &CircleGraph,
    rounds: usize,
    m: u32,
    mut input: R,
    mut out: W,
) -> Result<GameResult> {
    let mut game = Game::new(g1, g2, rounds, m)?;
    let io = |e: std::io::Error| Error::InvalidConfig(format!("terminal: {e}"));
    let mut line = String::new();
    while !game.is_over() {
        writeln!(out, "round {} of {}, level {}; map {:?}", game.round() + 1, rounds, game.level(), game.map().pairs())
            .map_err(io)?;
        write!(out, "spoiler> ").map_err(io)?;
        out.flush().map_err(io)?;
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            break;
        }
        let text = line.trim();
        if text.eq_ignore_ascii_case("quit") || text.eq_ignore_ascii_case("q") {
            break;
        }
        let (side, v) = match parse_move(text) {
            Ok(mv) => mv,
            Err(msg) => {
                writeln!(out, "invalid input: {msg}").map_err(io)?;
                continue;
            }
        };
        let n = game.graph(side).n();
        if v >= n {
            writeln!(out, "invalid input: vertex {v} out of range 0..{n}").map_err(io)?;
            continue;
        }
        let mv = game.step(side, v)?.clone();
        match (mv.response, mv.level) {
            (Some(b), Some(l)) => writeln!(out, "duplicator: {} {b} (map verified {l}-elementary)", side_name(side.other())),
            _ => writeln!(out, "duplicator: no response found"),
        }
        .map_err(io)?;
    }
    let result = game.finish()?;
    writeln!(out, "{}", if result.won { "duplicator wins" } else { "duplicator loses" }).map_err(io)?;
    Ok(result)
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "L",
        Side::Right => "R",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceDescriptor;

    fn ring(len: f64, xs: &[f64], edges: &[(usize, usize)]) -> GeoGraph {
        let c = Circle::new(len).unwrap();
        GeoGraph::from_edges(xs.len(), edges, 0.5, 0)
            .unwrap()
            .attach_coordinates(SpaceDescriptor::circle(len).unwrap(), xs.iter().map(|&x| c.point(x)).collect())
            .unwrap()
    }

    #[test]
    fn empty_and_single_maps() {
        let g = ring(5.3, &[0.1, 0.7, 2.2, 3.9], &[(0, 1)]);
        let h = ring(5.3, &[1.5, 4.0, 4.6], &[]);
        let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
        for n in 0..5 {
            assert!(is_n_elementary(&a, &b, &PartialMap::new(), n).unwrap());
            assert!(is_n_elementary(&a, &b, &PartialMap::from_pairs(vec![(2, 1)]).unwrap(), n).unwrap());
        }
    }

    #[test]
    fn fast_check_matches_enumeration() {
        let g = ring(5.3, &[0.1, 0.7, 2.2, 3.9, 4.35], &[(0, 1), (3, 4)]);
        let h = ring(5.3, &[0.2, 0.75, 2.4, 3.7, 4.5], &[(0, 1), (3, 4)]);
        let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
        let maps = [
            vec![(0, 0), (1, 1)],
            vec![(0, 0), (2, 2), (3, 3)],
            vec![(0, 1), (1, 0)],
            vec![(3, 3), (4, 4), (2, 2)],
        ];
        for pairs in maps {
            let m = PartialMap::from_pairs(pairs).unwrap();
            for n in 0..3 {
                let fast = check_n_elementary(&a, &b, &m, n, 1e9).unwrap().is_none();
                let slow = edge_violation(&a, &b, &m).is_none()
                    && order_violation_exhaustive(&a, &b, &m, n, 1e9).unwrap().is_none();
                assert_eq!(fast, slow, "{m:?} at level {n}");
            }
        }
    }

    #[test]
    fn mismatched_lengths() {
        let g = ring(5.3, &[0.1], &[]);
        let h = ring(5.0, &[0.1], &[]);
        let (a, b) = (CircleGraph::new(&g).unwrap(), CircleGraph::new(&h).unwrap());
        assert!(matches!(is_n_elementary(&a, &b, &PartialMap::new(), 1), Err(Error::MismatchedSpace(_))));
    }

    #[test]
    fn parse_moves() {
        assert_eq!(parse_move("L 3"), Ok((Side::Left, 3)));
        assert_eq!(parse_move("right 12"), Ok((Side::Right, 12)));
        assert!(parse_move("x 1").is_err());
        assert!(parse_move("L").is_err());
        assert!(parse_move("L 1 2").is_err());
    }
}
