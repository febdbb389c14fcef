//! Syntax of the two-sorted leading-term language.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::field::{rat_to_string, ValuedField};
use crate::valq::ValQ;

/// A rational literal, serialised as `"n"` or `"n/d"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rat(pub BigRational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        crate::field::parse_rat(&s).map(Rat).map_err(serde::de::Error::custom)
    }
}

/// Field-sorted terms: rational functions in named variables and the
/// uniformizer `t`, with an optional `O(t^k)` error term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Var(String),
    Unif,
    Const(Rat),
    BigO(i64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// RV-sorted terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RvTerm {
    Rv(u32, Expr),
    Proj(u32, Box<RvTerm>),
    /// The class of the sum of canonical representatives.
    Sum(u32, Vec<RvTerm>),
    Inf,
    Var(String),
    Mul(Box<RvTerm>, Box<RvTerm>),
    Pow(Box<RvTerm>, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: &ValQ, b: &ValQ) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VTerm {
    Val(RvTerm),
    Const(ValQ),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Atom {
    FieldEq(Expr, Expr),
    RvEq(RvTerm, RvTerm),
    /// `oplus[d](r1, …, rn, w)`: `w` is a possible class of `r1 + … + rn`.
    Oplus(u32, Vec<RvTerm>),
    VCmp(VTerm, CmpOp, VTerm),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ExistsField(String, Box<Formula>),
    ForallField(String, Box<Formula>),
    ExistsRv(String, u32, Box<Formula>),
    ForallRv(String, u32, Box<Formula>),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn int(n: i64) -> Self {
        Expr::Const(Rat(BigRational::from_integer(n.into())))
    }

    /// A literal denoting the field element `x`.
    pub fn literal<F: ValuedField>(x: &F) -> Self {
        let (terms, prec) = x.literal_terms();
        let mut parts: Vec<Expr> = terms
            .into_iter()
            .map(|(c, k)| {
                let c = Expr::Const(Rat(c));
                match k {
                    0 => c,
                    1 => Expr::Mul(Box::new(c), Box::new(Expr::Unif)),
                    _ => Expr::Mul(Box::new(c), Box::new(Expr::Pow(Box::new(Expr::Unif), k))),
                }
            })
            .collect();
        if let Some(n) = prec {
            parts.push(Expr::BigO(n));
        }
        let mut it = parts.into_iter();
        match it.next() {
            None => Expr::Const(Rat(BigRational::zero())),
            Some(first) => it.fold(first, |acc, e| Expr::Add(Box::new(acc), Box::new(e))),
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        match self {
            Expr::Var(n) => n == v,
            Expr::Unif | Expr::Const(_) | Expr::BigO(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.mentions(v) || b.mentions(v),
            Expr::Neg(a) | Expr::Pow(a, _) => a.mentions(v),
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Unif | Expr::Const(_) | Expr::BigO(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.vars(out),
        }
    }

    pub fn subst(&self, v: &str, by: &Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.subst(v, by));
        match self {
            Expr::Var(n) if n == v => by.clone(),
            Expr::Var(_) | Expr::Unif | Expr::Const(_) | Expr::BigO(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Pow(a, k) => Expr::Pow(s(a), *k),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(Rat(r)) if r.is_one())
    }
}

impl RvTerm {
    pub fn var(name: &str) -> Self {
        RvTerm::Var(name.to_string())
    }

    pub fn mentions_rv(&self, v: &str) -> bool {
        match self {
            RvTerm::Var(n) => n == v,
            RvTerm::Rv(..) | RvTerm::Inf => false,
            RvTerm::Proj(_, a) | RvTerm::Pow(a, _) => a.mentions_rv(v),
            RvTerm::Sum(_, ts) => ts.iter().any(|t| t.mentions_rv(v)),
            RvTerm::Mul(a, b) => a.mentions_rv(v) || b.mentions_rv(v),
        }
    }

    pub fn mentions_field(&self, v: &str) -> bool {
        match self {
            RvTerm::Rv(_, e) => e.mentions(v),
            RvTerm::Var(_) | RvTerm::Inf => false,
            RvTerm::Proj(_, a) | RvTerm::Pow(a, _) => a.mentions_field(v),
            RvTerm::Sum(_, ts) => ts.iter().any(|t| t.mentions_field(v)),
            RvTerm::Mul(a, b) => a.mentions_field(v) || b.mentions_field(v),
        }
    }

    fn vars(&self, field: &mut BTreeSet<String>, rv: &mut BTreeSet<String>) {
        match self {
            RvTerm::Rv(_, e) => e.vars(field),
            RvTerm::Var(n) => {
                rv.insert(n.clone());
            }
            RvTerm::Inf => {}
            RvTerm::Proj(_, a) | RvTerm::Pow(a, _) => a.vars(field, rv),
            RvTerm::Sum(_, ts) => ts.iter().for_each(|t| t.vars(field, rv)),
            RvTerm::Mul(a, b) => {
                a.vars(field, rv);
                b.vars(field, rv);
            }
        }
    }

    /// Applies `f` to every field expression inside the term.
    pub fn map_exprs(&self, f: &mut impl FnMut(u32, &Expr) -> RvTerm) -> RvTerm {
        match self {
            RvTerm::Rv(d, e) => f(*d, e),
            RvTerm::Var(_) | RvTerm::Inf => self.clone(),
            RvTerm::Proj(d, a) => RvTerm::Proj(*d, Box::new(a.map_exprs(f))),
            RvTerm::Pow(a, k) => RvTerm::Pow(Box::new(a.map_exprs(f)), *k),
            RvTerm::Sum(d, ts) => RvTerm::Sum(*d, ts.iter().map(|t| t.map_exprs(f)).collect()),
            RvTerm::Mul(a, b) => RvTerm::Mul(Box::new(a.map_exprs(f)), Box::new(b.map_exprs(f))),
        }
    }

    pub fn subst_rv(&self, v: &str, by: &RvTerm) -> RvTerm {
        match self {
            RvTerm::Var(n) if n == v => by.clone(),
            RvTerm::Rv(..) | RvTerm::Var(_) | RvTerm::Inf => self.clone(),
            RvTerm::Proj(d, a) => RvTerm::Proj(*d, Box::new(a.subst_rv(v, by))),
            RvTerm::Pow(a, k) => RvTerm::Pow(Box::new(a.subst_rv(v, by)), *k),
            RvTerm::Sum(d, ts) => RvTerm::Sum(*d, ts.iter().map(|t| t.subst_rv(v, by)).collect()),
            RvTerm::Mul(a, b) => RvTerm::Mul(Box::new(a.subst_rv(v, by)), Box::new(b.subst_rv(v, by))),
        }
    }
}

impl VTerm {
    fn map_terms(&self, f: &mut impl FnMut(&RvTerm) -> RvTerm) -> VTerm {
        match self {
            VTerm::Val(t) => VTerm::Val(f(t)),
            VTerm::Const(_) => self.clone(),
        }
    }
}

impl Atom {
    /// Applies `f` to every RV term occurring directly in the atom.
    pub fn map_terms(&self, f: &mut impl FnMut(&RvTerm) -> RvTerm) -> Atom {
        match self {
            Atom::FieldEq(..) => self.clone(),
            Atom::RvEq(a, b) => Atom::RvEq(f(a), f(b)),
            Atom::Oplus(d, ts) => Atom::Oplus(*d, ts.iter().map(&mut *f).collect()),
            Atom::VCmp(a, op, b) => Atom::VCmp(a.map_terms(f), *op, b.map_terms(f)),
        }
    }

    pub fn terms(&self) -> Vec<&RvTerm> {
        match self {
            Atom::FieldEq(..) => Vec::new(),
            Atom::RvEq(a, b) => vec![a, b],
            Atom::Oplus(_, ts) => ts.iter().collect(),
            Atom::VCmp(a, _, b) => [a, b]
                .into_iter()
                .filter_map(|v| match v {
                    VTerm::Val(t) => Some(t),
                    VTerm::Const(_) => None,
                })
                .collect(),
        }
    }

    pub fn mentions_field(&self, v: &str) -> bool {
        match self {
            Atom::FieldEq(a, b) => a.mentions(v) || b.mentions(v),
            _ => self.terms().iter().any(|t| t.mentions_field(v)),
        }
    }

    pub fn mentions_rv(&self, v: &str) -> bool {
        self.terms().iter().any(|t| t.mentions_rv(v))
    }

    fn vars(&self, field: &mut BTreeSet<String>, rv: &mut BTreeSet<String>) {
        if let Atom::FieldEq(a, b) = self {
            a.vars(field);
            b.vars(field);
        }
        for t in self.terms() {
            t.vars(field, rv);
        }
    }
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, g) | (g, Formula::True) => g,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (Formula::False, g) | (g, Formula::False) => g,
            (a, b) => Formula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().fold(Formula::True, Formula::and)
    }

    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().fold(Formula::False, Formula::or)
    }

    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn has_field_quantifier(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => false,
            Formula::ExistsField(..) | Formula::ForallField(..) => true,
            Formula::Not(a) | Formula::ExistsRv(_, _, a) | Formula::ForallRv(_, _, a) => a.has_field_quantifier(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_field_quantifier() || b.has_field_quantifier()
            }
        }
    }

    /// Number of field-quantifier nodes.
    pub fn field_quantifier_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::ExistsField(_, a) | Formula::ForallField(_, a) => 1 + a.field_quantifier_count(),
            Formula::Not(a) | Formula::ExistsRv(_, _, a) | Formula::ForallRv(_, _, a) => a.field_quantifier_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.field_quantifier_count() + b.field_quantifier_count()
            }
        }
    }

    fn collect_vars(&self, field: &mut BTreeSet<String>, rv: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => a.vars(field, rv),
            Formula::Not(a) => a.collect_vars(field, rv),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_vars(field, rv);
                b.collect_vars(field, rv);
            }
            Formula::ExistsField(x, a) | Formula::ForallField(x, a) => {
                let (mut f2, mut r2) = (BTreeSet::new(), BTreeSet::new());
                a.collect_vars(&mut f2, &mut r2);
                f2.remove(x);
                field.extend(f2);
                rv.extend(r2);
            }
            Formula::ExistsRv(w, _, a) | Formula::ForallRv(w, _, a) => {
                let (mut f2, mut r2) = (BTreeSet::new(), BTreeSet::new());
                a.collect_vars(&mut f2, &mut r2);
                r2.remove(w);
                field.extend(f2);
                rv.extend(r2);
            }
        }
    }

    pub fn free_field_vars(&self) -> BTreeSet<String> {
        let (mut f, mut r) = (BTreeSet::new(), BTreeSet::new());
        self.collect_vars(&mut f, &mut r);
        f
    }

    pub fn free_rv_vars(&self) -> BTreeSet<String> {
        let (mut f, mut r) = (BTreeSet::new(), BTreeSet::new());
        self.collect_vars(&mut f, &mut r);
        r
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_names(&mut out);
        out
    }

    fn walk_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                let mut f = BTreeSet::new();
                a.vars(&mut f, out);
                out.extend(f);
            }
            Formula::Not(a) => a.walk_names(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.walk_names(out);
                b.walk_names(out);
            }
            Formula::ExistsField(x, a)
            | Formula::ForallField(x, a)
            | Formula::ExistsRv(x, _, a)
            | Formula::ForallRv(x, _, a) => {
                out.insert(x.clone());
                a.walk_names(out);
            }
        }
    }

    /// Rebuilds the formula bottom-up, rewriting atoms with `f`.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a),
            Formula::Not(a) => Formula::not(a.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => {
                let (a, b) = (a.map_atoms(f), b.map_atoms(f));
                match (&a, &b) {
                    (Formula::False, _) | (_, Formula::True) => Formula::True,
                    (Formula::True, _) => b,
                    _ => Formula::Implies(Box::new(a), Box::new(b)),
                }
            }
            Formula::ExistsField(x, a) => Formula::ExistsField(x.clone(), Box::new(a.map_atoms(f))),
            Formula::ForallField(x, a) => Formula::ForallField(x.clone(), Box::new(a.map_atoms(f))),
            Formula::ExistsRv(w, d, a) => Formula::ExistsRv(w.clone(), *d, Box::new(a.map_atoms(f))),
            Formula::ForallRv(w, d, a) => Formula::ForallRv(w.clone(), *d, Box::new(a.map_atoms(f))),
        }
    }

    /// Replaces the free field variable `v` by `by` (no capture: `by` is
    /// closed in all uses).
    pub fn subst_field(&self, v: &str, by: &Expr) -> Formula {
        match self {
            Formula::ExistsField(x, _) | Formula::ForallField(x, _) if x == v => self.clone(),
            Formula::ExistsField(x, a) => Formula::ExistsField(x.clone(), Box::new(a.subst_field(v, by))),
            Formula::ForallField(x, a) => Formula::ForallField(x.clone(), Box::new(a.subst_field(v, by))),
            Formula::ExistsRv(w, d, a) => Formula::ExistsRv(w.clone(), *d, Box::new(a.subst_field(v, by))),
            Formula::ForallRv(w, d, a) => Formula::ForallRv(w.clone(), *d, Box::new(a.subst_field(v, by))),
            Formula::Not(a) => Formula::Not(Box::new(a.subst_field(v, by))),
            Formula::And(a, b) => Formula::And(Box::new(a.subst_field(v, by)), Box::new(b.subst_field(v, by))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.subst_field(v, by)), Box::new(b.subst_field(v, by))),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.subst_field(v, by)), Box::new(b.subst_field(v, by)))
            }
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(Atom::FieldEq(a, b)) => Formula::Atom(Atom::FieldEq(a.subst(v, by), b.subst(v, by))),
            Formula::Atom(a) => Formula::Atom(a.map_terms(&mut |t| {
                t.map_exprs(&mut |d, e| RvTerm::Rv(d, e.subst(v, by)))
            })),
        }
    }

    /// Replaces the free RV variable `v` by `by`.
    pub fn subst_rv(&self, v: &str, by: &RvTerm) -> Formula {
        match self {
            Formula::ExistsRv(w, _, _) | Formula::ForallRv(w, _, _) if w == v => self.clone(),
            Formula::ExistsRv(w, d, a) => Formula::ExistsRv(w.clone(), *d, Box::new(a.subst_rv(v, by))),
            Formula::ForallRv(w, d, a) => Formula::ForallRv(w.clone(), *d, Box::new(a.subst_rv(v, by))),
            Formula::ExistsField(x, a) => Formula::ExistsField(x.clone(), Box::new(a.subst_rv(v, by))),
            Formula::ForallField(x, a) => Formula::ForallField(x.clone(), Box::new(a.subst_rv(v, by))),
            Formula::Not(a) => Formula::Not(Box::new(a.subst_rv(v, by))),
            Formula::And(a, b) => Formula::And(Box::new(a.subst_rv(v, by)), Box::new(b.subst_rv(v, by))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.subst_rv(v, by)), Box::new(b.subst_rv(v, by))),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.subst_rv(v, by)), Box::new(b.subst_rv(v, by))),
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.map_terms(&mut |t| t.subst_rv(v, by))),
        }
    }

    /// Negation normal form: negations only in front of atoms and
    /// quantified subformulas; implications removed.
    pub fn nnf(&self) -> Formula {
        match self {
            Formula::Not(a) => a.negated_nnf(),
            Formula::And(a, b) => Formula::and(a.nnf(), b.nnf()),
            Formula::Or(a, b) => Formula::or(a.nnf(), b.nnf()),
            Formula::Implies(a, b) => Formula::or(a.negated_nnf(), b.nnf()),
            _ => self.clone(),
        }
    }

    fn negated_nnf(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(a) => a.nnf(),
            Formula::And(a, b) => Formula::or(a.negated_nnf(), b.negated_nnf()),
            Formula::Or(a, b) => Formula::and(a.negated_nnf(), b.negated_nnf()),
            Formula::Implies(a, b) => Formula::and(a.nnf(), b.negated_nnf()),
            other => Formula::Not(Box::new(other.clone())),
        }
    }

    /// Disjunctive normal form as a list of conjunctions of literals.
    pub fn dnf(&self) -> Vec<Vec<Formula>> {
        fn go(f: &Formula) -> Vec<Vec<Formula>> {
            match f {
                Formula::True => vec![Vec::new()],
                Formula::False => Vec::new(),
                Formula::Or(a, b) => {
                    let mut l = go(a);
                    l.extend(go(b));
                    l
                }
                Formula::And(a, b) => {
                    let (l, r) = (go(a), go(b));
                    let mut out = Vec::with_capacity(l.len() * r.len());
                    for x in &l {
                        for y in &r {
                            let mut c = x.clone();
                            c.extend(y.iter().cloned());
                            out.push(c);
                        }
                    }
                    out
                }
                lit => vec![vec![lit.clone()]],
            }
        }
        go(&self.nnf())
    }

    pub fn mentions_field(&self, v: &str) -> bool {
        self.free_field_vars().contains(v)
    }
}

/// A name of the form `{prefix}{n}` not in `taken`.
pub fn fresh_name(prefix: &str, taken: &BTreeSet<String>) -> String {
    (1..).map(|i| format!("{prefix}{i}")).find(|n| !taken.contains(n)).unwrap()
}
