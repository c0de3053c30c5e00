//! Acceptance run: prints one PASS/FAIL line per criterion, followed by its
//! checks. Fails only on enforced checks; see `surfgl_cli::check`.
//!
//! `SURFGL_ACCEPTANCE_RESOLUTION` overrides the 512² sweep grid.

use std::process::ExitCode;

use surfgl_cli::check::run_acceptance;

fn main() -> ExitCode {
    let resolution = std::env::var("SURFGL_ACCEPTANCE_RESOLUTION")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(512);
    let report = run_acceptance(resolution, &mut std::io::stdout()).expect("writing to stdout");
    if report.failed().is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
