//! Runner for the acceptance criteria: each criterion yields a verdict line,
//! and the process fails if any criterion does.

use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "criterion {:<3} {status}  [{:.1}s / {}s]  {}",
            self.id,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

/// Outcome of a criterion body: pass flag and a one-line summary.
pub type Outcome = (bool, String);

/// Runs `body`, timing it against `budget_secs`. A panic counts as a failure.
pub fn run(id: &'static str, budget_secs: u64, body: impl FnOnce() -> Outcome + std::panic::UnwindSafe) -> Verdict {
    let start = Instant::now();
    let result = std::panic::catch_unwind(body);
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let (mut passed, mut detail) = match result {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    if elapsed > budget {
        passed = false;
        detail.push_str("; over time budget");
    }
    let v = Verdict { id, passed, detail, elapsed, budget };
    println!("{}", v.line());
    v
}

/// Prints the tally and exits non-zero if anything failed.
pub fn finish(verdicts: &[Verdict]) -> ! {
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        verdicts.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    std::process::exit(if failed.is_empty() { 0 } else { 1 })
}
