//! Brute-force and coordinate oracles, written without the library's
//! fast paths.

use std::f64::consts::TAU;

use gecgraph::efgame::PartialMap;
use gecgraph::metric::{int, Rational, RationalMetricSpace};
use gecgraph::urysohn::CnMap;
use gecgraph::GeoGraph;

/// Orientation of the triangle of three circle points mapped to the unit
/// circle: positive iff a, b, c run counter-clockwise, which is C(a,b,c).
pub fn orientation_order(len: f64, a: f64, b: f64, c: f64) -> bool {
    let p = |x: f64| {
        let t = TAU * x / len;
        (t.cos(), t.sin())
    };
    let (pa, pb, pc) = (p(a), p(b), p(c));
    (pb.0 - pa.0) * (pc.1 - pa.1) - (pb.1 - pa.1) * (pc.0 - pa.0) > 0.0
}

/// min over nonempty U ⊆ V of max_v |N(v) ∩ U| / |U| as (m, n), by
/// enumerating all 2^|V| − 1 subsets with u32 masks.
pub fn exhaustive_alpha(graph: &GeoGraph) -> (usize, usize) {
    let n = graph.n();
    assert!(n <= 20, "exhaustive oracle is for tiny graphs");
    let masks: Vec<u32> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| graph.adjacent(v, u))
                .fold(0u32, |m, u| m | (1 << u))
        })
        .collect();
    let mut best = (1usize, 1usize);
    for u in 1u32..(1u32 << n) {
        let size = u.count_ones() as usize;
        let worst = masks
            .iter()
            .map(|m| (m & u).count_ones() as usize)
            .max()
            .unwrap_or(0);
        if worst * best.1 < best.0 * size {
            best = (worst, size);
        }
    }
    best
}

/// (x + z) mod L computed directly.
fn shifted(len: f64, x: f64, z: i64) -> f64 {
    (x + z as f64).rem_euclid(len)
}

/// Strict cyclic order of three residues in [0, L).
fn order(x: f64, y: f64, z: f64) -> bool {
    (x < y && y < z) || (y < z && z < x) || (z < x && x < y)
}

/// Every triple and shift vector, with residues from `coords`.
pub fn naive_n_elementary(
    len: f64,
    g1: &GeoGraph,
    x1: &[f64],
    g2: &GeoGraph,
    x2: &[f64],
    map: &PartialMap,
    level: u32,
) -> bool {
    let p = map.pairs();
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i != j && g1.adjacent(p[i].0, p[j].0) != g2.adjacent(p[i].1, p[j].1) {
                return false;
            }
        }
    }
    let r = 1i64 << level;
    for &(a, fa) in p {
        for &(b, fb) in p {
            for &(c, fc) in p {
                for z in -r..=r {
                    for t in -r..=r {
                        for k in -r..=r {
                            let lhs = order(
                                shifted(len, x1[a], z),
                                shifted(len, x1[b], t),
                                shifted(len, x1[c], k),
                            );
                            let rhs = order(
                                shifted(len, x2[fa], z),
                                shifted(len, x2[fb], t),
                                shifted(len, x2[fc], k),
                            );
                            if lhs != rhs {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Metric axioms, exact, from the matrix alone.
pub fn is_metric(s: &RationalMetricSpace) -> bool {
    let n = s.len();
    let zero = int(0);
    for a in 0..n {
        if s.d[a][a] != zero {
            return false;
        }
        for b in 0..n {
            if a != b && (s.d[a][b] != s.d[b][a] || s.d[a][b] <= zero) {
                return false;
            }
            for c in 0..n {
                if s.d[a][c] > &s.d[a][b] + &s.d[b][c] {
                    return false;
                }
            }
        }
    }
    true
}

pub fn integer_distance_free(s: &RationalMetricSpace) -> bool {
    (0..s.len()).all(|a| (0..s.len()).all(|b| a == b || !s.d[a][b].is_integer()))
}

/// ⌈d⌉ of a non-integer rational, by floor + 1.
fn band_of(q: &Rational) -> Option<Rational> {
    if q.is_integer() {
        None
    } else {
        Some(q.floor() + int(1))
    }
}

/// The map preserves every C_n: same ⌈d⌉ on both sides, no integers.
pub fn preserves_cn(x: &RationalMetricSpace, y: &RationalMetricSpace, map: &CnMap) -> bool {
    let p = map.pairs();
    p.iter().all(|&(a, fa)| {
        p.iter().all(|&(b, fb)| {
            a == b || {
                let (bx, by) = (band_of(&x.d[a][b]), band_of(&y.d[fa][fb]));
                bx.is_some() && bx == by
            }
        })
    })
}
