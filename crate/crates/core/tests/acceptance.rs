//! Runs without the libtest harness so the per-criterion lines always print.

use std::process::ExitCode;

use gbd_kit::acceptance;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for f in acceptance::all() {
        let r = f();
        println!("{}  [{:.2?}]", r.line(), r.elapsed);
        if !r.passed {
            failed.push(r.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
