//! Balls and swiss cheeses in a field with value group ℤ.
//!
//! Since values are integers, `B_{>r}(c) = B_{≥⌊r⌋+1}(c)` and
//! `B_{≥r}(c) = B_{≥⌈r⌉}(c)` for every rational `r`, so every proper ball
//! is stored as `{x : v(x−c) ≥ k}` with `k ∈ ℤ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{parse_literal, ValuedField};
use crate::valq::ValQ;

#[derive(Clone, Debug, PartialEq)]
pub enum Ball<F: ValuedField> {
    Empty,
    Whole,
    /// `{x : v(x − center) ≥ min_val}`.
    Disc { center: F, min_val: i64 },
    Point(F),
}

impl<F: ValuedField> Ball<F> {
    /// `B_{>r}(c)`.
    pub fn open(center: F, r: &ValQ) -> Self {
        match r {
            ValQ::NegInf => Ball::Whole,
            ValQ::PosInf => Ball::Empty,
            ValQ::Fin(_) => Ball::Disc { center, min_val: r.floor().unwrap() + 1 },
        }
    }

    /// `B_{≥r}(c)`.
    pub fn closed(center: F, r: &ValQ) -> Self {
        match r {
            ValQ::NegInf => Ball::Whole,
            ValQ::PosInf => Ball::Point(center),
            ValQ::Fin(_) => Ball::Disc { center, min_val: r.ceil().unwrap() },
        }
    }

    pub fn center(&self) -> Option<&F> {
        match self {
            Ball::Disc { center, .. } | Ball::Point(center) => Some(center),
            _ => None,
        }
    }

    /// Least value of `x − c` on the ball (`−∞` for `K`, `+∞` for points).
    pub fn min_val(&self) -> ValQ {
        match self {
            Ball::Whole => ValQ::NegInf,
            Ball::Disc { min_val, .. } => ValQ::int(*min_val),
            Ball::Point(_) | Ball::Empty => ValQ::PosInf,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Ball::Empty)
    }

    pub fn contains(&self, x: &F) -> Result<bool> {
        match self {
            Ball::Empty => Ok(false),
            Ball::Whole => Ok(true),
            Ball::Disc { center, min_val } => x.sub(center).val_at_least(&ValQ::int(*min_val)),
            Ball::Point(c) => x.eq_value(c),
        }
    }

    /// Two balls meet iff one contains the other.
    pub fn meets(&self, other: &Self) -> Result<bool> {
        match (self, other) {
            (Ball::Empty, _) | (_, Ball::Empty) => Ok(false),
            (Ball::Whole, _) | (_, Ball::Whole) => Ok(true),
            (Ball::Point(p), b) | (b, Ball::Point(p)) => b.contains(p),
            (Ball::Disc { center: c1, min_val: k1 }, Ball::Disc { center: c2, min_val: k2 }) => {
                c1.sub(c2).val_at_least(&ValQ::int(*k1.min(k2)))
            }
        }
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        match (self, other) {
            (Ball::Empty, _) => Ok(true),
            (_, Ball::Empty) => Ok(false),
            (_, Ball::Whole) => Ok(true),
            (Ball::Whole, _) => Ok(false),
            (Ball::Point(p), b) => b.contains(p),
            (Ball::Disc { .. }, Ball::Point(_)) => Ok(false),
            (Ball::Disc { center, min_val }, Ball::Disc { min_val: k2, .. }) => {
                Ok(min_val >= k2 && other.contains(center)?)
            }
        }
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if !self.meets(other)? {
            return Ok(Ball::Empty);
        }
        Ok(if self.is_subset(other)? { self.clone() } else { other.clone() })
    }

    /// The `p` sub-balls of the next radius, in residue characteristic `p`.
    fn children(&self, p: u64) -> Vec<Self> {
        let Ball::Disc { center, min_val } = self else { return Vec::new() };
        let step = F::uniformizer_pow(center.ctx(), *min_val);
        (0..p as i64)
            .map(|j| Ball::Disc { center: center.add(&step.scale_int(j)), min_val: min_val + 1 })
            .collect()
    }

    pub fn to_json(&self) -> BallJson {
        match self {
            Ball::Empty => BallJson::Empty,
            Ball::Whole => BallJson::Whole,
            Ball::Disc { center, min_val } => BallJson::Closed { center: center.to_string(), radius: *min_val },
            Ball::Point(c) => BallJson::Point { center: c.to_string() },
        }
    }

    pub fn from_json(ctx: &F::Ctx, j: &BallJson) -> Result<Self> {
        Ok(match j {
            BallJson::Empty => Ball::Empty,
            BallJson::Whole => Ball::Whole,
            BallJson::Closed { center, radius } => {
                Ball::Disc { center: parse_literal(ctx, center)?, min_val: *radius }
            }
            BallJson::Point { center } => Ball::Point(parse_literal(ctx, center)?),
        })
    }
}

impl<F: ValuedField> fmt::Display for Ball<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ball::Empty => write!(f, "{{}}"),
            Ball::Whole => write!(f, "K"),
            Ball::Disc { center, min_val } => write!(f, "B[>={min_val}]({center})"),
            Ball::Point(c) => write!(f, "{{{c}}}"),
        }
    }
}

/// Serialised ball; closed balls are written with their integer radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BallJson {
    Empty,
    Whole,
    Closed { center: String, radius: i64 },
    Point { center: String },
}

/// A ball minus finitely many pairwise disjoint sub-balls.
#[derive(Clone, Debug, PartialEq)]
pub struct SwissCheese<F: ValuedField> {
    outer: Ball<F>,
    holes: Vec<Ball<F>>,
}

impl<F: ValuedField> SwissCheese<F> {
    /// Normalises: drops empty holes, holes missing the outer ball and holes
    /// inside other holes; a hole covering the outer ball empties the cheese.
    pub fn new(outer: Ball<F>, holes: Vec<Ball<F>>) -> Result<Self> {
        if outer.is_empty() {
            return Ok(SwissCheese::empty());
        }
        let mut kept: Vec<Ball<F>> = Vec::new();
        for h in holes {
            if h.is_empty() || !h.meets(&outer)? {
                continue;
            }
            if outer.is_subset(&h)? {
                return Ok(SwissCheese::empty());
            }
            let mut redundant = false;
            for k in &kept {
                if h.is_subset(k)? {
                    redundant = true;
                    break;
                }
            }
            if redundant {
                continue;
            }
            let mut next = Vec::with_capacity(kept.len() + 1);
            for k in kept {
                if !k.is_subset(&h)? {
                    next.push(k);
                }
            }
            next.push(h);
            kept = next;
        }
        let cheese = SwissCheese { outer, holes: kept };
        if cheese.covered()? {
            return Ok(SwissCheese::empty());
        }
        Ok(cheese)
    }

    pub fn empty() -> Self {
        SwissCheese { outer: Ball::Empty, holes: Vec::new() }
    }

    pub fn whole() -> Self {
        SwissCheese { outer: Ball::Whole, holes: Vec::new() }
    }

    pub fn ball(b: Ball<F>) -> Self {
        SwissCheese { outer: b, holes: Vec::new() }
    }

    pub fn outer(&self) -> &Ball<F> {
        &self.outer
    }

    pub fn holes(&self) -> &[Ball<F>] {
        &self.holes
    }

    pub fn is_empty(&self) -> bool {
        self.outer.is_empty()
    }

    pub fn contains(&self, x: &F) -> Result<bool> {
        if !self.outer.contains(x)? {
            return Ok(false);
        }
        for h in &self.holes {
            if h.contains(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn minus(&self, hole: Ball<F>) -> Result<Self> {
        let mut holes = self.holes.clone();
        holes.push(hole);
        SwissCheese::new(self.outer.clone(), holes)
    }

    /// Whether the holes cover the outer ball; possible only with a finite
    /// residue field.
    fn covered(&self) -> Result<bool> {
        let p = match self.outer.center() {
            Some(c) => F::residue_char(c.ctx()),
            None => return Ok(false),
        };
        if p == 0 || self.holes.is_empty() {
            return Ok(false);
        }
        covers(&self.outer, &self.holes, p)
    }

    pub fn to_json(&self) -> CheeseJson {
        CheeseJson {
            outer: self.outer.to_json(),
            holes: self.holes.iter().map(Ball::to_json).collect(),
        }
    }

    pub fn from_json(ctx: &F::Ctx, j: &CheeseJson) -> Result<Self> {
        let outer = Ball::from_json(ctx, &j.outer)?;
        let holes = j.holes.iter().map(|h| Ball::from_json(ctx, h)).collect::<Result<Vec<_>>>()?;
        Ok(SwissCheese { outer, holes })
    }
}

fn covers<F: ValuedField>(b: &Ball<F>, holes: &[Ball<F>], p: u64) -> Result<bool> {
    let mut inside = Vec::new();
    for h in holes {
        if b.is_subset(h)? {
            return Ok(true);
        }
        if h.meets(b)? {
            inside.push(h.clone());
        }
    }
    if inside.is_empty() || !matches!(b, Ball::Disc { .. }) {
        return Ok(false);
    }
    for child in b.children(p) {
        if !covers(&child, &inside, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl<F: ValuedField> fmt::Display for SwissCheese<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outer)?;
        for h in &self.holes {
            write!(f, " \\ {h}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheeseJson {
    pub outer: BallJson,
    pub holes: Vec<BallJson>,
}

/// Intersection of two swiss cheeses.
pub fn cheese_intersect<F: ValuedField>(a: &SwissCheese<F>, b: &SwissCheese<F>) -> Result<SwissCheese<F>> {
    let outer = a.outer.intersect(&b.outer)?;
    let holes = a.holes.iter().chain(&b.holes).cloned().collect();
    SwissCheese::new(outer, holes)
}

/// Rejects rational radii that are not attained in `ℤ` where an exact
/// annulus is required.
pub fn integer_radius(r: &ValQ) -> Result<i64> {
    r.as_int().ok_or_else(|| Error::Invalid(format!("radius {r} is not an integer")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx};

    fn t(k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&LaurentCtx::default(), k)
    }
    fn zero() -> LaurentQ {
        LaurentQ::from_i64(&LaurentCtx::default(), 0)
    }

    #[test]
    fn nested_and_disjoint_balls() {
        let a = SwissCheese::ball(Ball::closed(zero(), &ValQ::int(0)));
        let b = SwissCheese::ball(Ball::closed(zero(), &ValQ::int(1)));
        assert_eq!(cheese_intersect(&a, &b).unwrap(), b);
        let c = SwissCheese::ball(Ball::open(t(1), &ValQ::int(1)));
        let d = SwissCheese::ball(Ball::open(t(1).scale_int(2), &ValQ::int(1)));
        assert!(cheese_intersect(&c, &d).unwrap().is_empty());
    }

    #[test]
    fn complement_meets_ball() {
        let hole = Ball::open(zero(), &ValQ::int(1));
        let a = SwissCheese::new(Ball::Whole, vec![hole.clone()]).unwrap();
        let b = SwissCheese::ball(Ball::closed(zero(), &ValQ::int(0)));
        let both = cheese_intersect(&a, &b).unwrap();
        assert_eq!(both.outer(), &Ball::Disc { center: zero(), min_val: 0 });
        assert_eq!(both.holes(), &[hole]);
        assert!(!both.contains(&t(2)).unwrap());
        assert!(both.contains(&t(1)).unwrap());
        assert!(both.contains(&t(0)).unwrap());
    }

    #[test]
    fn fractional_radii() {
        let b = Ball::open(zero(), &ValQ::frac(1, 2));
        assert!(b.contains(&t(1)).unwrap());
        assert!(!b.contains(&t(0)).unwrap());
        assert_eq!(Ball::closed(zero(), &ValQ::frac(1, 2)), b);
    }

    #[test]
    fn recentring_at_a_member() {
        let b = Ball::closed(t(1), &ValQ::int(2));
        let b2 = Ball::closed(t(1).add(&t(5)), &ValQ::int(2));
        assert!(b.is_subset(&b2).unwrap() && b2.is_subset(&b).unwrap());
    }

    #[test]
    fn finite_residue_field_can_be_covered() {
        let pc = PAdicCtx::new(2);
        let n = |k| PAdic::from_i64(&pc, k);
        let outer = Ball::closed(n(0), &ValQ::int(0));
        let holes = vec![Ball::closed(n(0), &ValQ::int(1)), Ball::closed(n(1), &ValQ::int(1))];
        assert!(SwissCheese::new(outer.clone(), holes).unwrap().is_empty());
        let holes = vec![Ball::closed(n(0), &ValQ::int(1)), Ball::closed(n(1), &ValQ::int(2))];
        let c = SwissCheese::new(outer, holes).unwrap();
        assert!(!c.is_empty());
        assert!(c.contains(&n(3)).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let c = SwissCheese::new(Ball::closed(t(1), &ValQ::int(0)), vec![Ball::open(t(1), &ValQ::int(3))]).unwrap();
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back: CheeseJson = serde_json::from_str(&j).unwrap();
        assert_eq!(SwissCheese::from_json(&LaurentCtx::default(), &back).unwrap(), c);
    }
}
