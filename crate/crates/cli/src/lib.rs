//! Reports for the `procoh` command line: building, rendering as text or
//! JSON, and verifying against a scenario's expected outputs.

pub mod render;
pub mod report;

pub use report::{corner_report, jordan_table, run, stable_report, RunReport};

/// Exit status for invalid input.
pub const EXIT_INVALID: u8 = 2;
/// Exit status for a failed verification.
pub const EXIT_FAIL: u8 = 1;

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
