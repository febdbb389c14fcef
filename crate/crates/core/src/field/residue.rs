use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rat_to_string;

/// An element of the residue field: ℚ for Laurent series, `𝔽_p` for `ℚ_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ResidueElem {
    Q(BigRational),
    Fp { value: u64, p: u64 },
}

impl ResidueElem {
    pub fn is_zero(&self) -> bool {
        match self {
            ResidueElem::Q(r) => r.is_zero(),
            ResidueElem::Fp { value, .. } => *value == 0,
        }
    }
}

impl fmt::Display for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueElem::Q(r) => write!(f, "{}", rat_to_string(r)),
            ResidueElem::Fp { value, p } => write!(f, "{value} mod {p}"),
        }
    }
}

/// An element of `R_δ = 𝒪/𝔪_δ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ResidueClass {
    /// Coefficients of `t^0, …, t^δ`.
    Coeffs(Vec<BigRational>),
    /// Integer in `[0, p^{δ+1})`.
    ModPk { value: BigInt, p: u64, k: u32 },
}

impl ResidueClass {
    pub fn is_one(&self) -> bool {
        match self {
            ResidueClass::Coeffs(c) => c[0].is_one() && c[1..].iter().all(Zero::is_zero),
            ResidueClass::ModPk { value, .. } => value.is_one(),
        }
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueClass::Coeffs(c) => {
                let parts: Vec<String> = c.iter().map(rat_to_string).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            ResidueClass::ModPk { value, p, k } => write!(f, "{value} mod {p}^{k}"),
        }
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            small.push(d.clone());
            let q = &n / &d;
            if q != d {
                large.push(q);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// All rational roots of a polynomial with rational coefficients (given
/// low to high), by the rational root theorem. Zero is included when the
/// constant term vanishes.
pub fn rational_roots(coeffs: &[BigRational]) -> Vec<BigRational> {
    let mut c: Vec<BigRational> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    let shift = c.iter().take_while(|x| x.is_zero()).count();
    if shift > 0 {
        roots.push(BigRational::zero());
        c.drain(..shift);
    }
    if c.len() <= 1 {
        return roots;
    }
    let lcm = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = c.iter().map(|x| (x * &lcm).to_integer()).collect();
    let a0 = &ints[0];
    let an = ints.last().unwrap();
    let eval = |r: &BigRational| {
        ints.iter()
            .rev()
            .fold(BigRational::zero(), |acc, a| acc * r + BigRational::from_integer(a.clone()))
    };
    for p in divisors(a0) {
        for q in divisors(an) {
            for sign in [1, -1] {
                let r = BigRational::new(BigInt::from(sign) * &p, q.clone());
                if !roots.contains(&r) && eval(&r).is_zero() {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// All roots in `𝔽_p` of a polynomial with coefficients reduced mod `p`.
pub fn fp_roots(coeffs: &[u64], p: u64) -> Vec<u64> {
    if coeffs.iter().all(|&c| c % p == 0) {
        return Vec::new();
    }
    (0..p)
        .filter(|&x| {
            let v = coeffs
                .iter()
                .rev()
                .fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % p as u128);
            v == 0
        })
        .collect()
}

pub(crate) fn big_to_u64_mod(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn rational_root_search() {
        assert_eq!(rational_roots(&[q(-1), q(0), q(1)]), vec![q(-1), q(1)]);
        assert!(rational_roots(&[q(-2), q(0), q(1)]).is_empty());
        // 2u^2 - 3u + 1 = (2u-1)(u-1)
        let r = rational_roots(&[q(1), q(-3), q(2)]);
        assert_eq!(r, vec![BigRational::new(1.into(), 2.into()), q(1)]);
        assert_eq!(rational_roots(&[q(0), q(0), q(1)]), vec![q(0)]);
    }

    #[test]
    fn finite_field_scan() {
        // u^2 - 2 over F_7: 3^2 = 9 = 2, 4^2 = 16 = 2
        assert_eq!(fp_roots(&[5, 0, 1], 7), vec![3, 4]);
        assert!(fp_roots(&[0, 0, 0], 7).is_empty());
    }
}
