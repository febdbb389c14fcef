use std::process::{Command, Output};

use hqe::decomp::{Piece, PieceJson};
use hqe::logic::{NormalForm, NormalFormJson};
use hqe::{LaurentCtx, LaurentQ};

fn hqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqe")).args(args).env_remove("HQE_PREC").output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = hqe(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().trim_end().to_string()
}

fn code(args: &[&str]) -> i32 {
    hqe(args).status.code().expect("exit code")
}

#[test]
fn eval_cancels_exactly() {
    assert_eq!(stdout(&["eval", "t * t^-1"]), "1 (v=0)");
    assert_eq!(stdout(&["eval", "t^3 - t^3"]), "0 (v=inf)");
}

#[test]
fn square_classes_over_laurent_series() {
    assert_eq!(stdout(&["decide", "EX y:K. y^2 - t^2 = 0", "--field", "laurent-q"]), "TRUE");
    assert_eq!(stdout(&["decide", "EX y:K. y^2 - 2*t^2 = 0", "--field", "laurent-q"]), "FALSE");
}

#[test]
fn two_adic_squares() {
    assert_eq!(stdout(&["--field", "padic", "--p", "2", "decide", "EX y:K. y^2 = 17"]), "TRUE");
    assert_eq!(stdout(&["--field", "padic", "--p", "2", "decide", "EX y:K. y^2 = 3"]), "FALSE");
}

#[test]
fn leading_term_of_order_one() {
    assert_eq!(stdout(&["rv", "3*t^2 + t^3 + 5*t^4", "--order", "1"]), "rv[1]{v=2; unit=3,1}");
}

#[test]
fn lift_reaches_square_root_of_one_plus_t() {
    let out = stdout(&["lift", "--poly", "x^2 - 1 - t", "--from", "1", "--sep", "0", "--prec", "8"]);
    let root = out.lines().next().unwrap();
    assert_eq!(root, "root 1 + 1/2*t^1 + -1/8*t^2 + 1/16*t^3 + -5/128*t^4 + 7/256*t^5 + -21/1024*t^6 + 33/2048*t^7 + O(t^8)");
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hqe")).args(["eval", "1/(1-t)"]).env("HQE_PREC", "8").output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("O(t^8)"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["eval", "1 +"]), 1);
    assert_eq!(code(&["rv", "1/(1-t) - 1/(1-t+t^100)"]), 2);
    assert_eq!(code(&["decide", "EX w:RV[0]. w^2 = rv[0](2)"]), 3);
    assert_eq!(code(&["lift", "--poly", "x^2 - 2", "--from", "1"]), 4);
    assert_eq!(code(&["--prec", "4", "eval", "1"]), 1);
    assert_eq!(code(&["--field", "padic", "--p", "4", "eval", "1"]), 1);
}

#[test]
fn retry_doubles_precision() {
    let out = stdout(&["--retry-precision", "rv", "1/(1-t) - 1/(1-t+t^100)"]);
    assert_eq!(out, "rv[0]{v=100; unit=1}");
}

#[test]
fn output_is_deterministic() {
    let args = ["normal-form", "rv[0](x^2 - t^2) = rv[0](t^2)", "--var", "x"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn normal_form_json_round_trips() {
    let text = stdout(&["--json", "normal-form", "x^2 = t^2"]);
    let j: NormalFormJson = serde_json::from_str(&text).unwrap();
    let ctx = LaurentCtx::default();
    let nf = NormalForm::<LaurentQ>::from_json(&ctx, &j).unwrap();
    assert_eq!(nf.to_json(), j);
    assert_eq!(j.orders, vec![0, 0]);
    assert_eq!(j.formula_text, "w1 = inf | w2 = inf");
}

#[test]
fn decomposition_json_round_trips() {
    let text = stdout(&["decompose", "--poly", "x^3 - t^2*x"]);
    let js: Vec<PieceJson> = serde_json::from_str(&text).unwrap();
    assert!(!js.is_empty());
    let ctx = LaurentCtx::default();
    for j in &js {
        let p = Piece::<LaurentQ>::from_json(&ctx, j).unwrap();
        assert_eq!(&p.to_json(), j);
    }
}

#[test]
fn selftest_runs_one_suite() {
    let out = stdout(&["selftest", "--suite", "rv-equivalence", "--seed", "3"]);
    assert!(out.lines().any(|l| l.starts_with("PASS criterion 1")), "{out}");
    assert_eq!(code(&["selftest", "--suite", "nope"]), 1);
}
