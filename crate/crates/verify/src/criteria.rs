//! The eleven acceptance criteria. Each runs end to end from seeds and
//! reports a pass flag with the measured numbers.

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Instant;

use gecgraph::alpha::{
    alpha_estimate, alpha_from_sentences_exact, AlphaOptions, Neighborhood,
    DEFAULT_ENUMERATION_BUDGET,
};
use gecgraph::efgame::{play, CircleGraph, SpoilerPolicy};
use gecgraph::gec::{gec_score, ScoreOptions};
use gecgraph::logic::{evaluate, StructureView};
use gecgraph::metric::band;
use gecgraph::recovery::{
    find_orienting_loop, recover_b, LoopMode, LoopOptions, Recovery, RecoveryOptions,
};
use gecgraph::rng::{hash3, substream};
use gecgraph::urysohn::{
    back_and_forth, extend_map, extension_distances, rado_extend, random_instance, ExtensionMode,
    random_graph_pair, Instance,
};
use gecgraph::{sample_iid, Circle, GeoGraph, Point, Result, SampleConfig, SpaceDescriptor};
use rand::Rng;
use serde::Serialize;

use crate::dsl::cross_check_graph;
use crate::naive::{self, NaiveStructure};
use crate::oracles;

/// Criteria whose targets are known to be out of reach; see the README.
pub const KNOWN_GAPS: &[u32] = &[3];

pub const ALL: [u32; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} ({}): {} [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "alpha on the circle L=5",
        2 => "alpha on the circle L=3",
        3 => "alpha on the unit sphere",
        4 => "alpha from phi_{m,n} vs brute force",
        5 => "B recovery at L=6",
        6 => "order and translate recovery at L=6",
        7 => "EF game on two circle samples",
        8 => "g.e.c. score grows with n",
        9 => "Urysohn extension and back-and-forth",
        10 => "formula evaluator cross-checks",
        11 => "circular-order lemma",
        _ => "unknown",
    }
}

/// Runs one criterion; errors become a failing result.
pub fn run(id: u32) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        title: title(id),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    ALL.iter().map(|&id| run(id)).collect()
}

type Outcome = Result<(bool, String)>;

fn circle_graph(len: f64, n: usize, seed: u64) -> Result<GeoGraph> {
    let space = SpaceDescriptor::circle(len)?;
    let sample = sample_iid(&space, &SampleConfig::new(n, seed).with_margin(1e-6))?;
    GeoGraph::generate(&sample, 0.5, hash3(seed, 0x4752, n as u64))
}

fn residues(g: &GeoGraph) -> Vec<f64> {
    g.coords
        .as_ref()
        .map(|c| c.iter().map(|p| p.0[0]).collect())
        .unwrap_or_default()
}

// ---------------------------------------------------------------- alpha

const ALPHA_SEEDS: u64 = 5;

#[derive(Clone, Debug)]
struct AlphaRun {
    estimate: f64,
    literal: f64,
    seconds: f64,
}

fn alpha_run(space: &SpaceDescriptor, n: usize, delta: f64, seed: u64) -> Result<AlphaRun> {
    let start = Instant::now();
    let sample = sample_iid(space, &SampleConfig::new(n, seed).with_margin(1e-6))?;
    let g = GeoGraph::generate(&sample, 0.5, seed)?;
    let mut opts = AlphaOptions::new(vec![200, 500], seed);
    opts.delta = Some(delta);
    opts.neighborhood = Neighborhood::CoordinateBall;
    let estimate = alpha_estimate(&g, &opts)?.estimate;
    let seconds = start.elapsed().as_secs_f64();
    opts.neighborhood = Neighborhood::Edges;
    let literal = alpha_estimate(&g, &opts)?.estimate;
    Ok(AlphaRun {
        estimate,
        literal,
        seconds,
    })
}

fn circle_runs(len: f64) -> Result<Vec<AlphaRun>> {
    let space = SpaceDescriptor::circle(len)?;
    (0..ALPHA_SEEDS)
        .map(|s| alpha_run(&space, 4000, 0.05, s))
        .collect()
}

fn l5_runs() -> Result<&'static Vec<AlphaRun>> {
    static CACHE: OnceLock<Vec<AlphaRun>> = OnceLock::new();
    if let Some(r) = CACHE.get() {
        return Ok(r);
    }
    let runs = circle_runs(5.0)?;
    Ok(CACHE.get_or_init(|| runs))
}

fn fmt_list(xs: impl Iterator<Item = f64>) -> String {
    xs.map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn within(runs: &[AlphaRun], target: f64, tol: f64) -> usize {
    runs.iter()
        .filter(|r| (r.estimate - target).abs() <= tol)
        .count()
}

fn c1() -> Outcome {
    let runs = l5_runs()?;
    let hits = within(runs, 0.4, 0.05);
    let fast = runs.iter().all(|r| r.seconds < 60.0);
    Ok((
        hits >= 4 && fast,
        format!(
            "{hits}/5 within 0.4±0.05 [{}]; edge-neighbourhood estimates [{}]",
            fmt_list(runs.iter().map(|r| r.estimate)),
            fmt_list(runs.iter().map(|r| r.literal))
        ),
    ))
}

fn c2() -> Outcome {
    let l5 = l5_runs()?;
    let l3 = circle_runs(3.0)?;
    let hits = within(&l3, 2.0 / 3.0, 0.05);
    let gaps: Vec<f64> = l3
        .iter()
        .zip(l5)
        .map(|(a, b)| a.estimate - b.estimate)
        .collect();
    let separated = gaps.iter().all(|&g| g > 0.15);
    Ok((
        hits >= 4 && separated,
        format!(
            "{hits}/5 within 2/3±0.05 [{}]; L3−L5 gaps [{}]",
            fmt_list(l3.iter().map(|r| r.estimate)),
            fmt_list(gaps.into_iter())
        ),
    ))
}

const SPHERE_ALPHA: f64 = 0.22985;

fn c3() -> Outcome {
    let space = SpaceDescriptor::sphere(1.0)?;
    let runs: Vec<AlphaRun> = (0..ALPHA_SEEDS)
        .map(|s| alpha_run(&space, 6000, 0.1, s))
        .collect::<Result<_>>()?;
    let hits = within(&runs, SPHERE_ALPHA, 0.03);
    Ok((
        hits >= 4,
        format!(
            "{hits}/5 within {SPHERE_ALPHA}±0.03 [{}]",
            fmt_list(runs.iter().map(|r| r.estimate))
        ),
    ))
}

fn c4() -> Outcome {
    let (mut agree, total) = (0, 200u64);
    let mut first_bad = None;
    for seed in 0..total {
        let mut rng = substream(seed, 0xa1fa);
        let n = rng.random_range(1..=12);
        let p = rng.random_range(0.1..0.9);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.random_bool(p))
            .collect();
        let g = GeoGraph::from_edges(n, &edges, p, seed)?;
        let (m1, n1) = alpha_from_sentences_exact(&g, n, DEFAULT_ENUMERATION_BUDGET)?;
        let (m2, n2) = oracles::exhaustive_alpha(&g);
        if m1 * n2 == m2 * n1 {
            agree += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("seed {seed}: {m1}/{n1} vs {m2}/{n2}"));
        }
    }
    Ok((
        agree == total,
        format!(
            "{agree}/{total} agree{}",
            first_bad.map(|b| format!("; {b}")).unwrap_or_default()
        ),
    ))
}

// ---------------------------------------------------------------- recovery

fn c5() -> Outcome {
    let c = Circle::new(6.0)?;
    let g = circle_graph(6.0, 3000, 1)?;
    let b = recover_b(&g.strip_coordinates());
    let xs = residues(&g);
    let (mut ok, mut total) = (0usize, 0usize);
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            let d = c.residue_distance(xs[u], xs[v]);
            if (d - 1.0).abs() > 0.05 {
                total += 1;
                if (d < 1.0) == b.holds(u, v) {
                    ok += 1;
                }
            }
        }
    }
    let rate = ok as f64 / total as f64;
    Ok((
        rate >= 0.99,
        format!("{:.4} agreement on {total} pairs", rate),
    ))
}

fn c6() -> Outcome {
    let c = Circle::new(6.0)?;
    let g = circle_graph(6.0, 3000, 1)?;
    let plain = g.strip_coordinates();
    let b = recover_b(&plain);
    let opts = LoopOptions {
        interval_slack: 2,
        ..LoopOptions::default()
    };
    let mut lp = find_orienting_loop(&plain, Some(&b), LoopMode::AdjacencySearch, &opts)?;
    if !lp.agrees_with(&g)? {
        lp = lp.reversed();
    }
    let rec = Recovery::with_options(&b, lp, &RecoveryOptions::sampled())?;
    let xs = residues(&g);
    let mut rng = substream(6, 0x0c6);
    let (mut ok, mut total) = (0usize, 0usize);
    while total < 10_000 {
        let (x, y, z) = (
            rng.random_range(0..g.n()),
            rng.random_range(0..g.n()),
            rng.random_range(0..g.n()),
        );
        let d = [(x, y), (y, z), (x, z)].map(|(a, b)| c.residue_distance(xs[a], xs[b]));
        if d.iter().any(|&d| d <= 0.05) {
            continue;
        }
        total += 1;
        if rec.recover_order(x, y, z)? == Circle::order_residues(xs[x], xs[y], xs[z]) {
            ok += 1;
        }
    }
    let order_rate = ok as f64 / total as f64;
    let mut close = 0usize;
    for x in 0..500 {
        if let Some(t) = rec.recover_translate(x, 1)? {
            if c.residue_distance(xs[t.vertex], xs[x] + 1.0) <= 0.05 {
                close += 1;
            }
        }
    }
    let tr_rate = close as f64 / 500.0;
    Ok((
        order_rate >= 0.98 && tr_rate >= 0.95,
        format!("order {order_rate:.4} on {total} triples; translate {tr_rate:.3} within 0.05"),
    ))
}

// ---------------------------------------------------------------- games

fn c7() -> Outcome {
    let g1 = circle_graph(5.3, 5000, 11)?;
    let g2 = circle_graph(5.3, 5000, 12)?;
    let (a, b) = (CircleGraph::new(&g1)?, CircleGraph::new(&g2)?);
    let (x1, x2) = (residues(&g1), residues(&g2));
    let (mut won, mut verified) = (0, 0);
    for seed in 0..100 {
        let r = play(&a, &b, 3, 1, &SpoilerPolicy::Random, seed)?;
        if r.won {
            won += 1;
            if oracles::naive_n_elementary(5.3, &g1, &x1, &g2, &x2, &r.map, r.final_level) {
                verified += 1;
            }
        }
    }
    Ok((
        won >= 90 && verified == won,
        format!("{won}/100 games won; {verified} final maps 1-elementary by brute force"),
    ))
}

fn c8() -> Outcome {
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..10u64 {
        let opts = ScoreOptions::new(200, 4, 0.05, seed);
        let small = gec_score(&circle_graph(5.0, 1000, seed)?, &opts)?.score;
        let large = gec_score(&circle_graph(5.0, 4000, seed)?, &opts)?.score;
        if large >= small {
            wins += 1;
        }
        pairs.push(format!("{small:.2}→{large:.2}"));
    }
    Ok((
        wins >= 9,
        format!("{wins}/10 non-decreasing [{}]", pairs.join(", ")),
    ))
}

// ---------------------------------------------------------------- Urysohn

/// Independent checks on one instance; returns a failure description.
fn check_instance(inst: &Instance, seed: u64) -> Result<Option<String>> {
    let Some(x0) = (0..inst.x.len()).find(|&v| inst.map.image(v).is_none()) else {
        return Ok(Some("instance has no unmapped point".into()));
    };
    let plan = extension_distances(&inst.x, &inst.y, &inst.map, x0)?;
    for &(xp, yp) in inst.map.pairs() {
        let want = band(inst.x.dist(x0, xp));
        let got = plan.distance_to(yp).and_then(band);
        if want.is_none() || want != got {
            return Ok(Some(format!("distance to {yp} is not in band {want:?}")));
        }
    }
    // Triangle inequalities of the planned point, checked from scratch.
    let ds = &plan.distances;
    for (i, (a, da)) in ds.iter().enumerate() {
        for (b, db) in &ds[i + 1..] {
            let dab = inst.y.dist(*a, *b);
            if dab > &(da + db) || da > &(dab + db) || db > &(dab + da) {
                return Ok(Some(format!("triangle ({a}, {b}) fails")));
            }
        }
    }
    let e = extend_map(&inst.x, &inst.y, &inst.map, x0, ExtensionMode::Exact)?;
    if !oracles::is_metric(&e.target) || !oracles::preserves_cn(&inst.x, &e.target, &e.map) {
        return Ok(Some(
            "exact extension is not a C_n-preserving metric extension".into(),
        ));
    }
    let bf = back_and_forth(&inst.x, &inst.y, 10, ExtensionMode::Exact, seed)?;
    if !oracles::is_metric(&bf.left)
        || !oracles::is_metric(&bf.right)
        || !oracles::preserves_cn(&bf.left, &bf.right, &bf.map)
    {
        return Ok(Some("back-and-forth broke the metric or C_n".into()));
    }
    let (g1, g2) = random_graph_pair(inst, 0.5, seed)?;
    let r = rado_extend(&g1, &g2, &inst.map, x0, ExtensionMode::Exact, 0.5, seed)?;
    let pairs = r.map.pairs();
    for &(a, fa) in pairs {
        for &(b, fb) in pairs {
            if a != b && g1.adjacent(a, b) != r.target.adjacent(fa, fb) {
                return Ok(Some(format!("Rado extension breaks E on ({a}, {b})")));
            }
        }
    }
    if !oracles::preserves_cn(&g1.space, &r.target.space, &r.map) {
        return Ok(Some("Rado extension breaks C_n".into()));
    }
    Ok(None)
}

fn c9() -> Outcome {
    let (mut ok, total) = (0, 1000u64);
    let mut first_bad = None;
    for seed in 0..total {
        let outcome = random_instance(10, seed).and_then(|inst| check_instance(&inst, seed));
        match outcome {
            Ok(None) => ok += 1,
            Ok(Some(msg)) => {
                first_bad.get_or_insert(format!("seed {seed}: {msg}"));
            }
            Err(e) => {
                first_bad.get_or_insert(format!("seed {seed}: {e}"));
            }
        }
    }
    Ok((
        ok == total,
        format!(
            "{ok}/{total} instances{}",
            first_bad.map(|b| format!("; {b}")).unwrap_or_default()
        ),
    ))
}

// ---------------------------------------------------------------- logic

fn c10() -> Outcome {
    let (mut checks, mut bad) = (0usize, Vec::new());
    for seed in 0..50u64 {
        let n = 100 + (seed as usize * 37) % 101;
        let r = cross_check_graph(n, seed, 10)?;
        checks += r.checks;
        bad.extend(
            r.mismatches
                .into_iter()
                .map(|m| format!("graph {seed}: {m}")),
        );
    }
    let (mut agree, total) = (0, 1000u64);
    for seed in 0..total {
        let mut rng = substream(seed, 0xf0);
        let n = rng.random_range(1..=8);
        let e = naive::random_rows(n, 0.5, &mut rng);
        let b = naive::random_rows(n, 0.5, &mut rng);
        let len = 5.3;
        let res: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..len)).collect();
        let c = Circle::new(len)?;
        let order = move |sh: [i64; 3], x: usize, y: usize, z: usize| {
            Circle::order_residues(
                c.shift_residue(res[x], sh[0]),
                c.shift_residue(res[y], sh[1]),
                c.shift_residue(res[z], sh[2]),
            )
        };
        let f = naive::random_formula(seed, 4);
        let env: HashMap<String, usize> = naive::VARS
            .iter()
            .map(|v| (v.to_string(), rng.random_range(0..n)))
            .collect();
        let view = StructureView::graph(&e).with_b(&b).with_order(&order);
        let fast = evaluate(&view, &f, &env)?;
        let mut s = NaiveStructure::from_rows(&e);
        s.b = Some(naive::matrix(&b));
        s.c = Some(&order);
        let slow = naive::eval(&s, &f, &mut env.clone());
        if slow == Some(fast) {
            agree += 1;
        } else if bad.len() < 5 {
            bad.push(format!(
                "formula {seed}: {} gives {fast} vs {slow:?}",
                f.to_source()
            ));
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} prelude checks on 50 graphs, {agree}/{total} random formulas agree{}",
            checks,
            bad.first().map(|b| format!("; {b}")).unwrap_or_default()
        ),
    ))
}

fn c11() -> Outcome {
    let (mut ok, mut total) = (0usize, 0usize);
    for (i, &len) in [3.0, 5.0, 5.3, 7.25].iter().enumerate() {
        let c = Circle::new(len)?;
        let mut rng = substream(i as u64, 0xc11);
        for _ in 0..25_000 {
            let [a, b, e] = [(); 3].map(|_| rng.random_range(0.0..len));
            let (pa, pb, pc) = (Point(vec![a]), Point(vec![b]), Point(vec![e]));
            let Ok(order) = c.circular_order(&pa, &pb, &pc) else {
                continue;
            };
            total += 1;
            let (d1, d2, pe) = c.lemma_offsets(&pa, &pb, &pc)?;
            let by_offsets = 0.0 < d1 && d1 < d2;
            let via_e = c.circular_order(&pa, &pe, &pc).unwrap_or(false);
            let geometric = oracles::orientation_order(len, a, b, e);
            if order == by_offsets && order == via_e && order == geometric {
                ok += 1;
            }
        }
    }
    Ok((ok == total, format!("{ok}/{total} triples consistent")))
}
