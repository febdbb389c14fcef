//! Recursive-descent parser for formulas and field expressions.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ast::{Atom, CmpOp, Expr, Formula, Rat, RvTerm, VTerm};
use crate::error::{Error, Result};
use crate::valq::ValQ;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
}

const SYMBOLS: [&str; 20] = [
    "->", "!=", "<=", ">=", "(", ")", "[", "]", ",", ".", ":", "+", "-", "*", "/", "^", "=", "<", ">", "&",
];

const KEYWORDS: [&str; 12] = ["EX", "ALL", "K", "RV", "rv", "proj", "sum", "oplus", "v", "inf", "true", "false"];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(src[start..i].parse().unwrap()), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        if c == '|' {
            out.push((Tok::Sym("|"), i));
            i += 1;
            continue;
        }
        if c == '!' && !src[i..].starts_with("!=") {
            out.push((Tok::Sym("!"), i));
            i += 1;
            continue;
        }
        for s in SYMBOLS {
            if src[i..].starts_with(s) {
                out.push((Tok::Sym(s), i));
                i += s.len();
                continue 'outer;
            }
        }
        return Err(Error::Syntax { pos: i, msg: format!("unexpected character '{c}'") });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    rv_scope: Vec<String>,
    furthest: Option<(usize, String)>,
}

enum Side {
    V(RvTerm),
    Rv(RvTerm),
    Field(Expr),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn err<T>(&mut self, msg: impl Into<String>) -> Result<T> {
        let pos = self.here();
        let msg = msg.into();
        if self.furthest.as_ref().is_none_or(|(p, _)| pos >= *p) {
            self.furthest = Some((pos, msg.clone()));
        }
        Err(Error::Syntax { pos, msg })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}'"))
        }
    }

    fn expect_ident(&mut self, s: &str) -> Result<()> {
        if self.is_ident(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{s}'"))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(n)) if !KEYWORDS.contains(&n.as_str()) && n != "t" && n != "O" => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a variable name"),
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn small_int(&mut self) -> Result<i64> {
        let neg = self.eat_sym("-");
        let n = self.int()?;
        let n: i64 = match i64::try_from(&n) {
            Ok(n) => n,
            Err(_) => return self.err("integer out of range"),
        };
        Ok(if neg { -n } else { n })
    }

    fn order(&mut self) -> Result<u32> {
        self.expect_sym("[")?;
        let n = self.int()?;
        let d = match u32::try_from(&n) {
            Ok(d) => d,
            Err(_) => return self.err("order out of range"),
        };
        self.expect_sym("]")?;
        Ok(d)
    }

    // formulas

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.eat_sym("|") {
            let g = self.conjunction()?;
            f = Formula::Or(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat_sym("&") {
            let g = self.unary()?;
            f = Formula::And(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.is_ident("EX") || self.is_ident("ALL") {
            return self.quantifier();
        }
        if self.is_ident("true") {
            self.pos += 1;
            return Ok(Formula::True);
        }
        if self.is_ident("false") {
            self.pos += 1;
            return Ok(Formula::False);
        }
        if self.is_sym("(") {
            let save = self.pos;
            if let Ok(a) = self.atom() {
                return Ok(a);
            }
            self.pos = save;
            self.expect_sym("(")?;
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.atom()
    }

    fn quantifier(&mut self) -> Result<Formula> {
        let exists = self.is_ident("EX");
        self.pos += 1;
        let var = self.name()?;
        self.expect_sym(":")?;
        if self.is_ident("K") {
            self.pos += 1;
            self.expect_sym(".")?;
            let body = Box::new(self.formula()?);
            return Ok(if exists { Formula::ExistsField(var, body) } else { Formula::ForallField(var, body) });
        }
        self.expect_ident("RV")?;
        let d = self.order()?;
        self.expect_sym(".")?;
        self.rv_scope.push(var.clone());
        let body = self.formula();
        self.rv_scope.pop();
        let body = Box::new(body?);
        Ok(if exists { Formula::ExistsRv(var, d, body) } else { Formula::ForallRv(var, d, body) })
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.is_ident("oplus") {
            self.pos += 1;
            let d = self.order()?;
            self.expect_sym("(")?;
            let mut args = vec![self.rv_term()?];
            while self.eat_sym(",") {
                args.push(self.rv_term()?);
            }
            self.expect_sym(")")?;
            if args.len() < 2 {
                return self.err("oplus needs at least two arguments");
            }
            return Ok(Formula::Atom(Atom::Oplus(d, args)));
        }
        let lhs = self.side()?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            _ => return self.err("expected a comparison"),
        };
        self.pos += 1;
        let rhs = self.side()?;
        let eq_only = |p: &mut Parser, a: Atom| -> Result<Formula> {
            match op {
                CmpOp::Eq => Ok(Formula::Atom(a)),
                CmpOp::Ne => Ok(Formula::Not(Box::new(Formula::Atom(a)))),
                _ => p.err("only '=' and '!=' compare field or RV terms"),
            }
        };
        match (lhs, rhs) {
            (Side::Field(a), Side::Field(b)) => eq_only(self, Atom::FieldEq(a, b)),
            (Side::Rv(a), Side::Rv(b)) => eq_only(self, Atom::RvEq(a, b)),
            (Side::V(a), Side::V(b)) => Ok(Formula::Atom(Atom::VCmp(VTerm::Val(a), op, VTerm::Val(b)))),
            (Side::V(a), Side::Field(e)) => {
                let c = self.value_const(&e)?;
                Ok(Formula::Atom(Atom::VCmp(VTerm::Val(a), op, VTerm::Const(c))))
            }
            (Side::Field(e), Side::V(b)) => {
                let c = self.value_const(&e)?;
                Ok(Formula::Atom(Atom::VCmp(VTerm::Const(c), op, VTerm::Val(b))))
            }
            _ => self.err("sides of the comparison have different sorts"),
        }
    }

    fn value_const(&mut self, e: &Expr) -> Result<ValQ> {
        match e {
            Expr::Const(Rat(r)) => {
                let n = i64::try_from(r.numer()).ok();
                let d = i64::try_from(r.denom()).ok();
                match (n, d) {
                    (Some(n), Some(d)) => Ok(ValQ::frac(n, d)),
                    _ => self.err("value constant out of range"),
                }
            }
            _ => self.err("expected a rational value constant"),
        }
    }

    fn starts_rv_term(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(n)) => {
                matches!(n.as_str(), "rv" | "proj" | "sum" | "inf") || self.rv_scope.iter().any(|w| w == n)
            }
            _ => false,
        }
    }

    fn side(&mut self) -> Result<Side> {
        if self.is_ident("v") && matches!(self.peek_at(1), Some(Tok::Sym("("))) {
            self.pos += 2;
            let t = if self.starts_rv_term() { self.rv_term()? } else { RvTerm::Rv(0, self.expr()?) };
            self.expect_sym(")")?;
            return Ok(Side::V(t));
        }
        if self.starts_rv_term() {
            return Ok(Side::Rv(self.rv_term()?));
        }
        Ok(Side::Field(self.expr()?))
    }

    // RV terms

    fn rv_term(&mut self) -> Result<RvTerm> {
        let mut t = self.rv_factor()?;
        while self.eat_sym("*") {
            let u = self.rv_factor()?;
            t = RvTerm::Mul(Box::new(t), Box::new(u));
        }
        Ok(t)
    }

    fn rv_factor(&mut self) -> Result<RvTerm> {
        let base = self.rv_atom()?;
        if self.eat_sym("^") {
            let k = self.small_int()?;
            return Ok(RvTerm::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn rv_atom(&mut self) -> Result<RvTerm> {
        if self.eat_sym("(") {
            let t = self.rv_term()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        let Some(Tok::Ident(n)) = self.peek().cloned() else {
            return self.err("expected an RV term");
        };
        match n.as_str() {
            "rv" => {
                self.pos += 1;
                let d = self.order()?;
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(RvTerm::Rv(d, e))
            }
            "proj" => {
                self.pos += 1;
                let d = self.order()?;
                self.expect_sym("(")?;
                let t = self.rv_term()?;
                self.expect_sym(")")?;
                Ok(RvTerm::Proj(d, Box::new(t)))
            }
            "sum" => {
                self.pos += 1;
                let d = self.order()?;
                self.expect_sym("(")?;
                let mut ts = vec![self.rv_term()?];
                while self.eat_sym(",") {
                    ts.push(self.rv_term()?);
                }
                self.expect_sym(")")?;
                Ok(RvTerm::Sum(d, ts))
            }
            "inf" => {
                self.pos += 1;
                Ok(RvTerm::Inf)
            }
            _ if self.rv_scope.contains(&n) => {
                self.pos += 1;
                Ok(RvTerm::Var(n))
            }
            _ => self.err(format!("'{n}' is not an RV term")),
        }
    }

    // field expressions

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat_sym("+") {
                let r = self.term()?;
                e = Expr::Add(Box::new(e), Box::new(r));
            } else if self.eat_sym("-") {
                let r = self.term()?;
                e = Expr::Sub(Box::new(e), Box::new(r));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            if self.eat_sym("*") {
                let r = self.factor()?;
                e = Expr::Mul(Box::new(e), Box::new(r));
            } else if self.eat_sym("/") {
                let r = self.factor()?;
                e = match (e, r) {
                    (Expr::Const(Rat(a)), Expr::Const(Rat(b))) if b != BigRational::from_integer(0.into()) => {
                        Expr::Const(Rat(a / b))
                    }
                    (a, b) => Expr::Div(Box::new(a), Box::new(b)),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(match self.factor()? {
                Expr::Const(Rat(r)) => Expr::Const(Rat(-r)),
                e => Expr::Neg(Box::new(e)),
            });
        }
        let base = self.base()?;
        if self.eat_sym("^") {
            let k = self.small_int()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Const(Rat(BigRational::from_integer(n))))
            }
            Some(Tok::Ident(n)) if n == "t" => {
                self.pos += 1;
                Ok(Expr::Unif)
            }
            Some(Tok::Ident(n)) if n == "O" && matches!(self.peek_at(1), Some(Tok::Sym("("))) => {
                self.pos += 2;
                match self.peek() {
                    Some(Tok::Ident(u)) if u == "t" => self.pos += 1,
                    Some(Tok::Int(_)) => self.pos += 1,
                    _ => return self.err("expected 't' or the prime inside O(..)"),
                }
                self.expect_sym("^")?;
                let k = self.small_int()?;
                self.expect_sym(")")?;
                Ok(Expr::BigO(k))
            }
            Some(Tok::Ident(_)) => Ok(Expr::Var(self.name()?)),
            _ => self.err("expected a field expression"),
        }
    }
}

fn run<T>(src: &str, rv_vars: &[&str], f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        rv_scope: rv_vars.iter().map(|s| s.to_string()).collect(),
        furthest: None,
    };
    let out = f(&mut p);
    match out {
        Ok(v) if p.pos == p.toks.len() => Ok(v),
        Ok(_) => {
            let pos = p.here();
            match p.furthest.take() {
                Some((fp, msg)) if fp > pos => Err(Error::Syntax { pos: fp, msg }),
                _ => Err(Error::Syntax { pos, msg: "unexpected trailing input".into() }),
            }
        }
        Err(e) => match p.furthest.take() {
            Some((pos, msg)) => Err(Error::Syntax { pos, msg }),
            None => Err(e),
        },
    }
}

/// Parses a formula. Free names are field variables.
pub fn parse_formula(src: &str) -> Result<Formula> {
    run(src, &[], |p| p.formula())
}

/// Parses a formula in which the listed names denote free RV variables.
pub fn parse_formula_with_rv(src: &str, rv_vars: &[&str]) -> Result<Formula> {
    run(src, rv_vars, |p| p.formula())
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    run(src, &[], |p| p.expr())
}

/// `print(parse(s))`.
pub fn normalize(src: &str) -> Result<String> {
    Ok(parse_formula(src)?.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantified_equation() {
        let f = parse_formula("EX x:K. rv[0](x^2 - t^2) = rv[0](0)").unwrap();
        assert_eq!(f.field_quantifier_count(), 1);
        assert!(f.free_field_vars().is_empty());
    }

    #[test]
    fn oplus_round_trip() {
        let s = "EX w:RV[0]. oplus[0](a, b, w)";
        assert!(parse_formula(s).is_err(), "a and b are field names, not RV terms");
        let f = parse_formula_with_rv(s, &["a", "b"]).unwrap();
        assert_eq!(f.to_string(), s);
        assert_eq!(parse_formula_with_rv(&f.to_string(), &["a", "b"]).unwrap(), f);
    }

    #[test]
    fn golden_corpus_normalizes() {
        let corpus = [
            ("EX y:K. y^2 - t^2 = 0", "EX y:K. y^2 - t^2 = 0"),
            ("EX y:K.y^2=2*t^2", "EX y:K. y^2 = 2*t^2"),
            ("x != 1 & (x = 2 | x = 3)", "x != 1 & (x = 2 | x = 3)"),
            ("v(x - 1) > 0", "v(rv[0](x - 1)) > 0"),
            ("!(x = 0) -> true", "x != 0 -> true"),
            ("!!(x = 0)", "!(x != 0)"),
            ("a = 0 -> b = 0 -> c = 0", "a = 0 -> b = 0 -> c = 0"),
            ("(a = 0 -> b = 0) -> c = 0", "(a = 0 -> b = 0) -> c = 0"),
            ("ALL w:RV[2]. v(w) >= -1/2 | w = inf", "ALL w:RV[2]. v(w) >= -1/2 | w = inf"),
            ("(x+1)*x = 3/4*t^-2 + O(t^5)", "(x + 1)*x = 3/4*t^-2 + O(t^5)"),
            ("EX w:RV[1]. w = proj[1](sum[3](rv[3](t), w^2 * rv[3](-1)))",
             "EX w:RV[1]. w = proj[1](sum[3](rv[3](t), w^2 * rv[3](-1)))"),
            ("x - (y - 1) = -x", "x - (y - 1) = -x"),
            ("x*(3/2) - -1 = (-2)^3", "x*(3/2) - (-1) = (-2)^3"),
        ];
        for (src, want) in corpus {
            let got = normalize(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            assert_eq!(got, want, "{src}");
            assert_eq!(normalize(&got).unwrap(), got, "idempotent on {src}");
            assert_eq!(parse_formula(&got).unwrap(), parse_formula(src).unwrap(), "{src}");
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_formula("EX x:K. x^2 = ") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 14),
            other => panic!("{other:?}"),
        }
        match parse_formula("x = 1 $") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("rv[0](x) < rv[0](1)").is_err());
        assert!(parse_formula("v(x) = 0 = 1").is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = parse_formula("EX y:K. rv[2](y - 3/2*t) = rv[2](t) & v(y) > 1").unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: Formula = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
