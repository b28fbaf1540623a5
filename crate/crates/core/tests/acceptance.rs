//! One line per acceptance criterion, written straight to stderr so it shows
//! up in the test log even for passing tests. The criteria run one at a time
//! so the reported wall-clock times are not inflated by each other.

use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use relay_sg::error::Result;
use relay_sg::validate::{self, CriterionResult, Status, ValidateOptions};

static SERIAL: Mutex<()> = Mutex::new(());

/// Wall-clock target for the coherent exactness run.
const CRITERION_1_TARGET_S: f64 = 30.0;

fn run(criterion: fn(&ValidateOptions) -> Result<CriterionResult>) -> (CriterionResult, f64) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let result = criterion(&ValidateOptions::default()).expect("criterion ran");
    let secs = start.elapsed().as_secs_f64();
    let mut line = format!("acceptance: {} [{:.1} s]\n", result.summary(), secs);
    for c in &result.checks {
        line.push_str(&format!("acceptance:     [{}] {}: {}\n", c.status, c.name, c.measured));
    }
    let _ = std::io::stderr().write_all(line.as_bytes());
    (result, secs)
}

fn assert_pass(result: &CriterionResult) {
    assert_eq!(result.status(), Status::Pass, "{}", result.summary());
}

#[test]
fn criterion_1_coherent_exactness() {
    let (result, secs) = run(validate::criterion_1);
    // the runtime target depends on the host; it is reported, not enforced
    let verdict = if secs < CRITERION_1_TARGET_S { "met" } else { "missed" };
    let _ = writeln!(
        std::io::stderr(),
        "acceptance: criterion 1 runtime {secs:.1} s against a {CRITERION_1_TARGET_S} s target: {verdict}"
    );
    assert_pass(&result);
}

#[test]
fn criterion_2_incoherent_exactness() {
    assert_pass(&run(validate::criterion_2).0);
}

#[test]
fn criterion_3_small_s_slopes() {
    assert_pass(&run(validate::criterion_3).0);
}

#[test]
fn criterion_4_taylor_constant() {
    assert_pass(&run(validate::criterion_4).0);
}

#[test]
fn criterion_5_inversion_calibration() {
    assert_pass(&run(validate::criterion_5).0);
}

#[test]
fn criterion_6_capacity_agreement() {
    assert_pass(&run(validate::criterion_6).0);
}

#[test]
fn criterion_7_qualitative_claims() {
    assert_pass(&run(validate::criterion_7).0);
}

#[test]
fn criterion_8_identities() {
    assert_pass(&run(validate::criterion_8).0);
}
