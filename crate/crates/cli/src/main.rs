//! Command-line front end: field arithmetic, leading terms, lifting,
//! decomposition, elimination and the property suites.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hqe::decomp::{decompose_whole, rv_decompose};
use hqe::hensel::newton_lift;
use hqe::logic::{decide, eval_expr, expr_poly, normal_form, parse_expr, parse_formula, qe, Env, Expr};
use hqe::rv::rv;
use hqe::{Error, LaurentCtx, PAdicCtx, ValuedField};
use serde_json::{json, Value};

/// Largest precision `--retry-precision` will double up to.
const MAX_RETRY_PRECISION: u32 = 1024;

#[derive(Parser, Debug)]
#[command(name = "hqe", version, about = "Exact computations in henselian valued fields")]
struct Cli {
    /// Field backend.
    #[arg(long, value_enum, default_value_t = Backend::LaurentQ, global = true)]
    field: Backend,
    /// Prime for the p-adic backend.
    #[arg(long, default_value_t = 2, global = true)]
    p: u64,
    /// Working precision in digits; HQE_PREC overrides the default of 64.
    #[arg(long, env = "HQE_PREC", default_value_t = hqe::field::DEFAULT_PRECISION, global = true)]
    prec: u32,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// On exhausted precision, double it and try again.
    #[arg(long, global = true)]
    retry_precision: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    /// Laurent series over the rationals in `t`.
    LaurentQ,
    /// p-adic numbers.
    Padic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluates a field expression and prints it with its value.
    Eval { expr: String },
    /// Prints the leading term of order `d` of an expression.
    Rv {
        expr: String,
        #[arg(long, default_value_t = 0)]
        order: u32,
    },
    /// Lifts an approximate root of a polynomial to an exact one.
    Lift {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        from: String,
        #[arg(long, default_value_t = 0)]
        sep: u32,
    },
    /// Swiss-cheese decomposition of a polynomial, as JSON.
    Decompose {
        #[arg(long)]
        poly: String,
        /// Also split into cells on which the leading term of this order is
        /// a sum of monomial terms.
        #[arg(long)]
        rv_order: Option<u32>,
    },
    /// Eliminates field quantifiers.
    Qe { formula: String },
    /// Decides a sentence, printing TRUE or FALSE.
    Decide { formula: String },
    /// Presents a one-variable formula as a pullback of leading terms.
    NormalForm {
        formula: String,
        #[arg(long, default_value = "x")]
        var: String,
    },
    /// Runs the property suites.
    Selftest {
        /// Suite number or name; all suites when absent.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = hqe_selftest::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. } | Error::Invalid(_) => 1,
        Error::PrecisionExhausted(_) => 2,
        Error::NonEffectiveQuantifier(_) | Error::Unsupported(_) => 3,
        Error::PreconditionViolated(_) => 4,
        _ => 5,
    }
}

/// The single variable of a polynomial expression, `x` if it has none.
fn poly_var(e: &Expr) -> hqe::Result<String> {
    let mut vars = BTreeSet::new();
    e.vars(&mut vars);
    match vars.len() {
        0 => Ok("x".into()),
        1 => Ok(vars.into_iter().next().unwrap()),
        _ => Err(Error::Invalid(format!("polynomial in more than one variable: {vars:?}"))),
    }
}

fn constant<F: ValuedField>(ctx: &F::Ctx, src: &str) -> hqe::Result<F> {
    eval_expr(ctx, &parse_expr(src)?, &Env::new())
}

/// Output as text and as JSON.
struct Output {
    text: String,
    json: Value,
}

fn execute<F: ValuedField>(ctx: &F::Ctx, cmd: &Command) -> hqe::Result<Output> {
    Ok(match cmd {
        Command::Eval { expr } => {
            let x = constant::<F>(ctx, expr)?;
            let v = x.val_or_inf();
            Output { text: format!("{x} (v={v})"), json: json!({ "value": x.to_string(), "valuation": v.to_string() }) }
        }
        Command::Rv { expr, order } => {
            let x = constant::<F>(ctx, expr)?;
            let r = rv(&x, *order)?;
            Output { text: r.to_string(), json: json!({ "order": order, "class": r.to_string() }) }
        }
        Command::Lift { poly, from, sep } => {
            let e = parse_expr(poly)?;
            let p = expr_poly::<F>(ctx, &e, &poly_var(&e)?)?;
            let a = constant::<F>(ctx, from)?;
            let c = newton_lift(&p, &a, *sep)?;
            Output {
                text: format!("root {}\niterations {}\nv(a - root) >= {}", c.root, c.iterations, c.separation),
                json: json!({
                    "root": c.root.to_string(),
                    "iterations": c.iterations,
                    "separation": c.separation.to_string(),
                }),
            }
        }
        Command::Decompose { poly, rv_order } => {
            let e = parse_expr(poly)?;
            let f = expr_poly::<F>(ctx, &e, &poly_var(&e)?)?;
            let v = match rv_order {
                None => serde_json::to_value(decompose_whole(&f)?.iter().map(|p| p.to_json()).collect::<Vec<_>>()),
                Some(d) => {
                    let cells: Vec<Value> = rv_decompose(&[f], &[*d])?
                        .iter()
                        .map(|c| {
                            json!({
                                "cheese": c.cheese.to_json(),
                                "piece": c.pieces[0].to_json(),
                                "order": c.orders[0],
                                "working_order": c.working_order(0),
                            })
                        })
                        .collect();
                    Ok(Value::Array(cells))
                }
            }
            .map_err(|e| Error::Invalid(e.to_string()))?;
            Output { text: serde_json::to_string_pretty(&v).expect("serialisable"), json: v }
        }
        Command::Qe { formula } => {
            let out = qe::<F>(ctx, &parse_formula(formula)?)?;
            Output { text: out.to_string(), json: json!({ "formula": out, "text": out.to_string() }) }
        }
        Command::Decide { formula } => {
            let b = decide::<F>(ctx, &parse_formula(formula)?)?;
            Output { text: if b { "TRUE" } else { "FALSE" }.into(), json: json!({ "result": b }) }
        }
        Command::NormalForm { formula, var } => {
            let nf = normal_form::<F>(ctx, &parse_formula(formula)?, var)?;
            let j = serde_json::to_value(nf.to_json()).map_err(|e| Error::Invalid(e.to_string()))?;
            Output { text: nf.to_string(), json: j }
        }
        Command::Selftest { .. } => unreachable!("handled before field dispatch"),
    })
}

/// Runs `cmd`, doubling the precision on exhaustion when asked to.
fn run_with_retry<F: ValuedField>(mk: impl Fn(u32) -> F::Ctx, cli: &Cli) -> hqe::Result<Output> {
    let mut prec = cli.prec;
    loop {
        match execute::<F>(&mk(prec), &cli.command) {
            Err(Error::PrecisionExhausted(msg)) if cli.retry_precision && prec * 2 <= MAX_RETRY_PRECISION => {
                eprintln!("precision {prec} exhausted ({msg}); retrying at {}", prec * 2);
                prec *= 2;
            }
            r => return r,
        }
    }
}

fn selftest(suite: Option<&str>, seed: u64, as_json: bool) -> ExitCode {
    let reports = match suite {
        Some(key) => match hqe_selftest::run_suite(key, seed) {
            Some(r) => vec![r],
            None => {
                eprintln!("error: no suite named {key}");
                return ExitCode::from(1);
            }
        },
        None => hqe_selftest::run_all(seed),
    };
    if as_json {
        let v: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "id": r.id,
                    "name": r.name,
                    "cases": r.cases,
                    "failures": r.failures,
                    "passed": r.passed(),
                    "elapsed_s": r.elapsed.as_secs_f64(),
                    "budget_s": r.budget.as_secs(),
                    "notes": r.notes,
                    "samples": r.samples,
                })
            })
            .collect();
        emit(&serde_json::to_string_pretty(&v).expect("serialisable"));
    } else {
        emit(&format!("seed {seed}"));
        for r in &reports {
            emit(&r.to_string());
        }
    }
    if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.prec < 8 {
        eprintln!("error: precision must be at least 8");
        return ExitCode::from(1);
    }
    if let Command::Selftest { suite, seed } = &cli.command {
        return selftest(suite.as_deref(), *seed, cli.json);
    }
    let result = match cli.field {
        Backend::LaurentQ => run_with_retry::<hqe::LaurentQ>(|cap| LaurentCtx { cap }, &cli),
        Backend::Padic => {
            if !is_prime(cli.p) {
                eprintln!("error: {} is not prime", cli.p);
                return ExitCode::from(1);
            }
            run_with_retry::<hqe::PAdic>(|cap| PAdicCtx { p: cli.p, cap }, &cli)
        }
    };
    match result {
        Ok(out) => {
            if cli.json {
                emit(&serde_json::to_string_pretty(&out.json).expect("serialisable"));
            } else {
                emit(&out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&p| is_prime(p)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Syntax { pos: 0, msg: String::new() }), 1);
        assert_eq!(exit_code(&Error::PrecisionExhausted(String::new())), 2);
        assert_eq!(exit_code(&Error::NonEffectiveQuantifier(String::new())), 3);
        assert_eq!(exit_code(&Error::PreconditionViolated(String::new())), 4);
        assert_eq!(exit_code(&Error::DivisionByZero), 5);
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from(["hqe", "--field", "padic", "--p", "7", "rv", "14", "--order", "2"]).unwrap();
        assert_eq!(cli.field, Backend::Padic);
        assert!(matches!(cli.command, Command::Rv { order: 2, .. }));
    }
}
