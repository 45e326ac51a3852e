// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use support::criteria::{self, Outcome};

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let all = [
        Criterion { name: "fig5-golden", limit: secs(5), run: criteria::fig5_golden },
        Criterion { name: "table5b-golden", limit: secs(5), run: criteria::table5b_golden },
        Criterion { name: "aggregation-oracle", limit: secs(60), run: || criteria::aggregation_oracle(1000, 10, 0xa66) },
        Criterion { name: "lifting-oracle", limit: secs(120), run: || criteria::lifting_oracle(1000, 10, 0x11f7) },
        Criterion { name: "frame-soundness", limit: None, run: criteria::frame_soundness },
        Criterion { name: "printer-roundtrip", limit: None, run: || criteria::printer_roundtrip(500, 0xb0091e) },
        Criterion { name: "determinism", limit: None, run: criteria::determinism },
        Criterion { name: "error-taxonomy", limit: None, run: criteria::error_taxonomy },
    ];
    let mut failed = Vec::new();
    for c in &all {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {} ({:.2}s): {detail}", c.name, took.as_secs_f64()),
            Err(why) => {
                println!("FAIL {} ({:.2}s): {why}", c.name, took.as_secs_f64());
                failed.push(c.name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", all.len(), all.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
