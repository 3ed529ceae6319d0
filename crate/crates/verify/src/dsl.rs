//! The recovery prelude evaluated by the generic formula evaluator, compared
//! with the imperative recovery code on small circle graphs.

use std::collections::HashMap;

use gecgraph::logic::{parse, Evaluator, StructureView};
use gecgraph::recovery::{
    find_orienting_loop, recover_b, recover_interval, LoopMode, LoopOptions, RecoveredB, Recovery,
    RecoveryOptions, RECOVERY_PRELUDE,
};
use gecgraph::rng::substream;
use gecgraph::{sample_iid, Error, GeoGraph, Result, SampleConfig, SpaceDescriptor, VertexSet};
use rand::Rng;

#[derive(Clone, Debug, Default)]
pub struct DslReport {
    pub checks: usize,
    pub mismatches: Vec<String>,
}

impl DslReport {
    fn compare(&mut self, what: &str, dsl: &VertexSet, imperative: &VertexSet) {
        self.checks += 1;
        if dsl != imperative {
            self.mismatches.push(format!(
                "{what}: dsl {} vs imperative {}",
                dsl.count(),
                imperative.count()
            ));
        }
    }
}

fn program(body: &str) -> Result<gecgraph::logic::Formula> {
    parse(&format!("{RECOVERY_PRELUDE}\n{body}"))
}

/// ApproximationFailure means no set was produced, which reads as empty.
fn or_empty(r: Result<VertexSet>, n: usize) -> Result<VertexSet> {
    match r {
        Err(Error::ApproximationFailure(_)) => Ok(VertexSet::new(n)),
        other => other,
    }
}

/// One graph: L = 6, `n` vertices, coordinate B, ground-truth loop,
/// literal readings.
/// `probes` vertices (and B-neighbour pairs) are checked per relation.
pub fn cross_check_graph(n: usize, seed: u64, probes: usize) -> Result<DslReport> {
    let space = SpaceDescriptor::circle(6.0)?;
    let sample = sample_iid(&space, &SampleConfig::new(n, seed).with_margin(1e-6))?;
    let graph = GeoGraph::generate(&sample, 0.5, seed ^ 0x5eed)?;
    let plain = graph.strip_coordinates();
    // B read by the generic evaluator from E alone; the structure itself
    // uses the coordinate B so the loop is valid on sparse samples.
    let b_e = recover_b(&plain);
    let b = RecoveredB::from_coordinates(&graph)?;
    // A gap in the sample can stretch a loop step past 1 for one start;
    // another start usually avoids it.
    let mut found = None;
    for start in 0..n.min(32) {
        let opts = LoopOptions {
            start,
            ..LoopOptions::default()
        };
        if let Ok(lp) = find_orienting_loop(&graph, Some(&b), LoopMode::GroundTruth, &opts) {
            found = Some(lp);
            break;
        }
    }
    let lp = found.ok_or_else(|| Error::LoopNotFound(format!("no start works for seed {seed}")))?;
    let rec = Recovery::with_options(&b, lp, &RecoveryOptions::literal())?;

    let order =
        |sh: [i64; 3], x: usize, y: usize, z: usize| sh == [0, 0, 0] && rec.position_order(x, y, z);
    let view = StructureView::graph(plain.rows())
        .with_b(b.rows())
        .with_order(&order);
    let e_only = StructureView::graph(plain.rows());

    let bsym = program("Bsym(v, x)")?;
    let int = program("Int(x, a, c)")?;
    let fb = program("Fb(a, x)")?;
    let fnf = program("Fn(a, x)")?;
    let f1 = program("F1(a, x)")?;
    let f2 = program("F2(a, x)")?;
    let min1 = program("Min1(a, x)")?;
    let ev_bsym = Evaluator::new(&e_only, &bsym)?;
    let ev_int = Evaluator::new(&view, &int)?;
    let ev_fb = Evaluator::new(&view, &fb)?;
    let ev_fn = Evaluator::new(&view, &fnf)?;
    let ev_f1 = Evaluator::new(&view, &f1)?;
    let ev_f2 = Evaluator::new(&view, &f2)?;
    let ev_min1 = Evaluator::new(&view, &min1)?;

    let mut rng = substream(seed, 0xd51);
    let mut report = DslReport::default();
    for _ in 0..probes {
        let a = rng.random_range(0..n);
        let env = HashMap::from([("v".to_string(), a), ("a".to_string(), a)]);
        report.compare(
            &format!("Bsym({a})"),
            &ev_bsym.satisfying(&env, "x")?,
            b_e.row(a),
        );
        report.compare(
            &format!("Fb({a})"),
            &ev_fb.satisfying(&env, "x")?,
            rec.f_base(a),
        );
        report.compare(
            &format!("Fn({a})"),
            &ev_fn.satisfying(&env, "x")?,
            rec.f_base_neg(a),
        );
        let one = or_empty(rec.f_interval(a, 1), n)?;
        report.compare(&format!("F1({a})"), &ev_f1.satisfying(&env, "x")?, &one);
        let two = or_empty(rec.f_interval(a, 2), n)?;
        report.compare(&format!("F2({a})"), &ev_f2.satisfying(&env, "x")?, &two);
        let firsts = VertexSet::from_indices(n, rec.first_candidates(&one));
        report.compare(
            &format!("Min1({a})"),
            &ev_min1.satisfying(&env, "x")?,
            &firsts,
        );

        let row: Vec<usize> = b.row(a).iter().collect();
        if !row.is_empty() {
            let c = row[rng.random_range(0..row.len())];
            let env = HashMap::from([("a".to_string(), a), ("c".to_string(), c)]);
            report.compare(
                &format!("Int({a},{c})"),
                &ev_int.satisfying(&env, "x")?,
                &recover_interval(&b, a, c)?,
            );
        }
    }
    Ok(report)
}
