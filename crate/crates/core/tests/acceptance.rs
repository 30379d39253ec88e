//! Runs without the libtest harness so the criterion lines always reach the
//! terminal, passing or not.

use std::process::ExitCode;

use gowers::acceptance;
use gowers::par::Exec;

fn main() -> ExitCode {
    let outcomes = acceptance::run_all(false, Exec::default());
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", outcomes.len(), outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
