//! Acceptance criteria 1 to 10 at the default grid and precision.
//! Prints one line per criterion and fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use lpadic::harness::{cmd_verify, Env, SuiteConfig};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let cache = tempfile::tempdir().expect("temporary cache directory");
    let env = Env::new(0, Some(cache.path().to_path_buf())).expect("thread pool");
    println!(
        "acceptance: prec {} grid N<={} primes {:?}, scan N<={} p<={}",
        cfg.prec, cfg.grid_n, cfg.grid_primes, cfg.scan_n, cfg.scan_p
    );
    let start = Instant::now();
    let (report, outcomes) = match cmd_verify(&cfg, &env) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: configuration error: {e}");
            return ExitCode::FAILURE;
        }
    };
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!(
        "acceptance: {passed}/{} criteria pass, {} checks, {} failed, {:.1}s",
        outcomes.len(),
        report.summary.checks,
        report.summary.checks_failed,
        start.elapsed().as_secs_f64()
    );
    if report.passed() && passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
