//! Shared plumbing for the acceptance suite: a recorder that prints one
//! verdict line per criterion and turns the tally into an exit status.

use std::process::ExitCode;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct Suite {
    outcomes: Vec<Outcome>,
    started: Instant,
}

impl Default for Suite {
    fn default() -> Self {
        Self::new()
    }
}

impl Suite {
    pub fn new() -> Self {
        Self {
            outcomes: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Records and prints one verdict line.
    pub fn record(&mut self, id: &str, title: &str, passed: bool, detail: impl Into<String>) {
        let outcome = Outcome {
            id: id.to_string(),
            title: title.to_string(),
            passed,
            detail: detail.into(),
        };
        println!(
            "{:<4} {}  {}: {}",
            outcome.id,
            if passed { "PASS" } else { "FAIL" },
            outcome.title,
            outcome.detail
        );
        self.outcomes.push(outcome);
    }

    /// Prints an indented diagnostic that carries no verdict.
    pub fn note(&self, text: impl AsRef<str>) {
        println!("       note: {}", text.as_ref());
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn finish(self) -> ExitCode {
        let failed: Vec<&str> = self
            .outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.id.as_str())
            .collect();
        println!(
            "acceptance: {} passed, {} failed in {:.1} s{}",
            self.outcomes.len() - failed.len(),
            failed.len(),
            self.started.elapsed().as_secs_f64(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(" (failed: {})", failed.join(", "))
            }
        );
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}

/// Runs `f` and returns its value with the elapsed wall-clock seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}
