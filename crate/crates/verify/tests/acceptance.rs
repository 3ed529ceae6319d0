//! One PASS/FAIL line per acceptance criterion. Criteria listed in
//! `KNOWN_GAPS` are reported but do not fail the run.

use std::process::ExitCode;

use gecgraph_verify::criteria::{run, ALL, KNOWN_GAPS};

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for id in ALL {
        let r = run(id);
        println!("{}", r.line());
        if !r.passed && !KNOWN_GAPS.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failing criteria: {unexpected:?}");
        ExitCode::FAILURE
    }
}
