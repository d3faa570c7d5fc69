use std::process::{Command, Output};

use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use gcfx::cli::{self, BoundOutput, ConstructReport, EvalReport, IntegerizeReport, NuReport};
use gcfx::verify::SuiteReport;

fn gcfx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcfx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn parsed<T: DeserializeOwned>(out: &Output) -> T {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

/// `parse(print(r)) == r`, and printing again gives the same text.
fn round_trips<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(stdout: &[u8]) {
    let first: T = serde_json::from_slice(stdout).unwrap();
    let text = serde_json::to_string(&first).unwrap();
    let second: T = serde_json::from_str(&text).unwrap();
    assert_eq!(first, second);
    assert_eq!(text, serde_json::to_string(&second).unwrap());
}

#[test]
fn eval_exp_point_to_forty_places() {
    let out = gcfx(&[
        "eval",
        "--family",
        "exp_point",
        "--param",
        "x=1",
        "--param",
        "y=1",
        "--precision",
        "1e-40",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: EvalReport = parsed(&out);
    assert_eq!(r.value, "2.7182818284590452353602874713526624977572");
    assert!(r.n_used > 0);
    round_trips::<EvalReport>(&out.stdout);
}

#[test]
fn bounded_example_and_violation() {
    let out = gcfx(&[
        "bound", "--class", "bounded", "--a1", "1", "--a2", "2", "--b1", "2", "--b2", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: BoundOutput = parsed(&out);
    assert!(r.reports[0].mu_upper.unwrap().to_string().starts_with("5.682"));
    round_trips::<BoundOutput>(&out.stdout);

    let out = gcfx(&["bound", "--family", "ft_mixed_cf"]);
    assert_eq!(out.status.code(), Some(2));
    let r: BoundOutput = parsed(&out);
    assert!(!r.reports[0].condition_ok());
}

#[test]
fn exponential_and_polynomial_classes() {
    let out = gcfx(&[
        "bound", "--class", "poly", "--alpha", "1", "--l", "1", "--beta1", "1", "--k1", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: BoundOutput = parsed(&out);
    assert_eq!(r.reports[0].mu_upper, Some(2.5));

    let out = gcfx(&[
        "bound", "--class", "exp", "--alpha", "2", "--l", "1", "--beta1", "sqrt(8)", "--k1", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: BoundOutput = parsed(&out);
    let expected = 2.0 + 2f64.ln() / (8f64.sqrt().ln() - 2f64.ln());
    assert!((r.reports[0].mu_upper.unwrap() - expected).abs() < 1e-12);
}

#[test]
fn construct_with_audit() {
    let out = gcfx(&["construct", "--exponent", "3", "--blocks", "6", "--audit"]);
    assert_eq!(out.status.code(), Some(0));
    let r: ConstructReport = parsed(&out);
    assert_eq!(r.plan.blocks.len(), 6);
    assert!(r.audit.len() >= 2);
    assert!(r.audit.iter().all(|a| a.upper_holds));
    round_trips::<ConstructReport>(&out.stdout);
    // big integers travel as decimal strings
    let raw: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(raw["plan"]["B_simple"][3].is_string());
}

#[test]
fn nu_reports_empirical_mode() {
    let out = gcfx(&["nu", "--family", "thue_morse_cf", "--n-max", "2000", "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r: NuReport = parsed(&out);
    assert_eq!(serde_json::to_value(r.mode).unwrap(), "EMPIRICAL");
    assert!(r.samples.len() <= 5 && !r.samples.is_empty());
    round_trips::<NuReport>(&out.stdout);
}

#[test]
fn integerize_family() {
    let out = gcfx(&[
        "transform",
        "integerize",
        "--family",
        "m_of_q",
        "--param",
        "a=2",
        "--param",
        "b=3",
        "--terms",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: IntegerizeReport = parsed(&out);
    assert!(r.values_preserved);
    round_trips::<IntegerizeReport>(&out.stdout);
}

#[test]
fn verify_suites_exit_zero() {
    for suite in ["identities", "densities", "constructions"] {
        let out = gcfx(&["verify", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        let r: SuiteReport = parsed(&out);
        assert!(r.passed);
        round_trips::<SuiteReport>(&out.stdout);
    }
    assert_eq!(gcfx(&["verify", "everything"]).status.code(), Some(1));
}

#[test]
fn exit_codes_are_deterministic() {
    let cases: [(&[&str], i32); 4] = [
        (&["eval", "--a", "1", "--b", "1", "--max-terms", "3"], 3),
        (&["eval", "--a", "1", "--b", "1", "--max-terms", "0"], 1),
        (&["bound", "--family", "rational_19_7"], 2),
        (&["list"], 0),
    ];
    for (args, code) in cases {
        for _ in 0..2 {
            assert_eq!(gcfx(args).status.code(), Some(code), "{args:?}");
        }
    }
}

#[test]
fn bitlen_cap_is_a_resource_error() {
    let out = gcfx(&[
        "eval",
        "--a",
        "1",
        "--b",
        "1000",
        "--bitlen-cap",
        "64",
        "--precision",
        "1e-200",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let raw: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(raw["kind"], "resource_exhausted");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bound_reports_round_trip(a1 in 1u64..20, da in 0u64..20, b1 in 1u64..20, db in 0u64..20) {
        let args = [
            "gcfx".to_string(), "bound".into(), "--class".into(), "bounded".into(),
            "--a1".into(), a1.to_string(), "--a2".into(), (a1 + da).to_string(),
            "--b1".into(), b1.to_string(), "--b2".into(), (b1 + db).to_string(),
        ];
        let out = cli::run(args);
        prop_assert!(out.code == 0 || out.code == 2);
        round_trips::<BoundOutput>(out.stdout.as_bytes());
        let again = cli::run([
            "gcfx".to_string(), "bound".into(), "--class".into(), "bounded".into(),
            "--a1".into(), a1.to_string(), "--a2".into(), (a1 + da).to_string(),
            "--b1".into(), b1.to_string(), "--b2".into(), (b1 + db).to_string(),
        ]);
        prop_assert_eq!(out, again);
    }
}
