//! The leading-term formula language: syntax, evaluation, and elimination
//! of field quantifiers.

pub mod ast;
pub mod parser;
mod printer;

pub use ast::{Atom, CmpOp, Expr, Formula, Rat, RvTerm, VTerm};
pub use parser::{normalize, parse_expr, parse_formula, parse_formula_with_rv};
pub mod eval;
pub mod linear;
pub mod qe;

pub use eval::{eval_expr, eval_rv_term, evaluate, Env};
pub use linear::{eliminate_linear_exists, eliminate_linear_exists_traced, LinearCase, LinearConstraint};
pub mod normal_form;

pub use normal_form::{normal_form, NormalForm, NormalFormJson};
pub use qe::{decide, expr_poly, qe, qe_with_env};
