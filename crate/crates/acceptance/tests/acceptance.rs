use std::process::ExitCode;

use acceptance::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let report = run_criterion(id);
        let verdict = if report.passed() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id:>2}: {} ({} checks, {:.1} s)",
            report.title,
            report.checks.len(),
            report.elapsed_secs
        );
        if let Some(err) = &report.error {
            println!("       error: {err}");
        }
        for c in report.failures() {
            println!(
                "       {}: measured {:.6e}, expected {:?} {:.6e} (tol {:e})",
                c.name, c.measured, c.relation, c.expected, c.tolerance
            );
        }
        failed += usize::from(!report.passed());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", CRITERIA.len());
        ExitCode::FAILURE
    }
}
