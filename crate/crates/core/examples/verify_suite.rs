//! Runs the built-in property suite and prints each check.

use geodefect::verify::{run_suite, VerifyOptions};

fn main() -> geodefect::Result<()> {
    let report = run_suite(&VerifyOptions::default())?;
    for c in &report.checks {
        let bounds = match (c.lower, c.upper) {
            (Some(lo), Some(hi)) => format!("in ({lo:e}, {hi:e})"),
            (Some(lo), None) => format!("> {lo:e}"),
            (None, Some(hi)) => format!("< {hi:e}"),
            (None, None) => String::new(),
        };
        println!("{:4} {:40} {:>12.4e} {bounds}", if c.pass { "ok" } else { "FAIL" }, c.name, c.measured);
    }
    println!("{}", if report.passed { "all checks passed" } else { "some checks failed" });
    Ok(())
}
