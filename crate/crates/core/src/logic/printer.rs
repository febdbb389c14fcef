//! Concrete syntax output. Parsing the printed text yields the same tree
//! for every tree the parser produces.

use std::fmt::{self, Display, Formatter};

use num_traits::Signed;

use super::ast::{Atom, Expr, Formula, Rat, RvTerm, VTerm};
use crate::field::rat_to_string;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let wrap = expr_prec(e) < min;
    if wrap {
        write!(f, "(")?;
    }
    match e {
        Expr::Var(n) => write!(f, "{n}")?,
        Expr::Unif => write!(f, "t")?,
        Expr::Const(Rat(r)) => {
            // `-a/b` re-parses as one constant unless it follows an operator
            // binding tighter than `+`.
            let bare = if r.is_negative() { min <= 1 } else { r.is_integer() || min <= 2 };
            if bare {
                write!(f, "{}", rat_to_string(r))?
            } else {
                write!(f, "({})", rat_to_string(r))?
            }
        }
        Expr::BigO(k) => write!(f, "O(t^{k})")?,
        Expr::Add(a, b) => {
            write_expr(f, a, 1)?;
            write!(f, " + ")?;
            write_expr(f, b, 2)?;
        }
        Expr::Sub(a, b) => {
            write_expr(f, a, 1)?;
            write!(f, " - ")?;
            write_expr(f, b, 2)?;
        }
        Expr::Mul(a, b) => {
            write_expr(f, a, 2)?;
            write!(f, "*")?;
            write_expr(f, b, 3)?;
        }
        Expr::Div(a, b) => {
            write_expr(f, a, 2)?;
            write!(f, "/")?;
            write_expr(f, b, 3)?;
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_expr(f, a, 3)?;
        }
        Expr::Pow(a, k) => {
            write_expr(f, a, 5)?;
            write!(f, "^{k}")?;
        }
    }
    if wrap {
        write!(f, ")")?;
    }
    Ok(())
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn write_rv(f: &mut Formatter<'_>, t: &RvTerm, min: u8) -> fmt::Result {
    let prec = match t {
        RvTerm::Mul(..) => 1,
        RvTerm::Pow(..) => 2,
        _ => 3,
    };
    if prec < min {
        write!(f, "(")?;
    }
    match t {
        RvTerm::Rv(d, e) => write!(f, "rv[{d}]({e})")?,
        RvTerm::Proj(d, a) => {
            write!(f, "proj[{d}](")?;
            write_rv(f, a, 0)?;
            write!(f, ")")?;
        }
        RvTerm::Sum(d, ts) => {
            write!(f, "sum[{d}](")?;
            for (i, a) in ts.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_rv(f, a, 0)?;
            }
            write!(f, ")")?;
        }
        RvTerm::Inf => write!(f, "inf")?,
        RvTerm::Var(n) => write!(f, "{n}")?,
        RvTerm::Mul(a, b) => {
            write_rv(f, a, 1)?;
            write!(f, " * ")?;
            write_rv(f, b, 2)?;
        }
        RvTerm::Pow(a, k) => {
            write_rv(f, a, 3)?;
            write!(f, "^{k}")?;
        }
    }
    if prec < min {
        write!(f, ")")?;
    }
    Ok(())
}

impl Display for RvTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_rv(f, self, 0)
    }
}

impl Display for VTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            VTerm::Val(t) => write!(f, "v({t})"),
            VTerm::Const(q) => write!(f, "{q}"),
        }
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Atom::FieldEq(a, b) => write!(f, "{a} = {b}"),
            Atom::RvEq(a, b) => write!(f, "{a} = {b}"),
            Atom::Oplus(d, ts) => {
                write!(f, "oplus[{d}](")?;
                for (i, a) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Atom::VCmp(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
        }
    }
}

fn formula_prec(g: &Formula) -> u8 {
    match g {
        Formula::ExistsField(..) | Formula::ForallField(..) | Formula::ExistsRv(..) | Formula::ForallRv(..) => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(_) => 4,
        _ => 5,
    }
}

fn write_formula(f: &mut Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
    let wrap = formula_prec(g) < min;
    if wrap {
        write!(f, "(")?;
    }
    match g {
        Formula::True => write!(f, "true")?,
        Formula::False => write!(f, "false")?,
        Formula::Atom(a) => write!(f, "{a}")?,
        Formula::Not(a) => match a.as_ref() {
            Formula::Atom(Atom::FieldEq(l, r)) => write!(f, "{l} != {r}")?,
            Formula::Atom(Atom::RvEq(l, r)) => write!(f, "{l} != {r}")?,
            other => {
                write!(f, "!")?;
                write_formula(f, other, 5)?;
            }
        },
        Formula::And(a, b) => {
            write_formula(f, a, 3)?;
            write!(f, " & ")?;
            write_formula(f, b, 4)?;
        }
        Formula::Or(a, b) => {
            write_formula(f, a, 2)?;
            write!(f, " | ")?;
            write_formula(f, b, 3)?;
        }
        Formula::Implies(a, b) => {
            write_formula(f, a, 2)?;
            write!(f, " -> ")?;
            write_formula(f, b, 1)?;
        }
        Formula::ExistsField(x, a) => {
            write!(f, "EX {x}:K. ")?;
            write_formula(f, a, 0)?;
        }
        Formula::ForallField(x, a) => {
            write!(f, "ALL {x}:K. ")?;
            write_formula(f, a, 0)?;
        }
        Formula::ExistsRv(w, d, a) => {
            write!(f, "EX {w}:RV[{d}]. ")?;
            write_formula(f, a, 0)?;
        }
        Formula::ForallRv(w, d, a) => {
            write!(f, "ALL {w}:RV[{d}]. ")?;
            write_formula(f, a, 0)?;
        }
    }
    if wrap {
        write!(f, ")")?;
    }
    Ok(())
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}
