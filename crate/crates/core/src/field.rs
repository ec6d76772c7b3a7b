use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Field element. Over `F_p` the value is always an integer in `[0, p)`.
pub type Coeff = BigRational;

/// Coefficient field of every ring in the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rationals,
    Prime(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1u128;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

impl Field {
    pub fn prime(p: u64) -> Result<Self> {
        if p > u32::MAX as u64 {
            return Err(Error::Precondition(format!("prime {p} too large")));
        }
        if !is_prime(p) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rationals => 0,
            Field::Prime(p) => *p,
        }
    }

    pub fn zero(&self) -> Coeff {
        Coeff::zero()
    }

    pub fn one(&self) -> Coeff {
        Coeff::one()
    }

    fn residue(p: u64, v: &BigInt) -> u64 {
        let m = BigInt::from(p);
        let r = ((v % &m) + &m) % &m;
        r.to_u64().expect("residue fits")
    }

    fn small(c: &Coeff) -> u64 {
        c.numer().to_u64().expect("prime field element is a small integer")
    }

    fn lift(v: u64) -> Coeff {
        Coeff::from_integer(BigInt::from(v))
    }

    pub fn from_i64(&self, v: i64) -> Coeff {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> Coeff {
        match self {
            Field::Rationals => Coeff::from_integer(v.clone()),
            Field::Prime(p) => Self::lift(Self::residue(*p, v)),
        }
    }

    /// Maps a rational number into the field; fails when the denominator vanishes mod p.
    pub fn from_rational(&self, r: &BigRational) -> Result<Coeff> {
        match self {
            Field::Rationals => Ok(r.clone()),
            Field::Prime(p) => {
                let den = Self::residue(*p, r.denom());
                if den == 0 {
                    return Err(Error::Precondition(format!(
                        "denominator {} vanishes in F_{p}",
                        r.denom()
                    )));
                }
                let num = Self::residue(*p, r.numer());
                let inv = mod_pow(den as u128, (*p - 2) as u128, *p as u128) as u64;
                Ok(Self::lift(((num as u128 * inv as u128) % *p as u128) as u64))
            }
        }
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match self {
            Field::Rationals => a + b,
            Field::Prime(p) => Self::lift((Self::small(a) + Self::small(b)) % p),
        }
    }

    pub fn sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match self {
            Field::Rationals => a - b,
            Field::Prime(p) => Self::lift((Self::small(a) + p - Self::small(b)) % p),
        }
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        match self {
            Field::Rationals => -a,
            Field::Prime(p) => Self::lift((p - Self::small(a)) % p),
        }
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match self {
            Field::Rationals => a * b,
            Field::Prime(p) => {
                Self::lift(((Self::small(a) as u128 * Self::small(b) as u128) % *p as u128) as u64)
            }
        }
    }

    /// Panics on zero; callers only invert leading coefficients.
    pub fn inv(&self, a: &Coeff) -> Coeff {
        assert!(!a.is_zero(), "inverse of zero");
        match self {
            Field::Rationals => a.recip(),
            Field::Prime(p) => Self::lift(mod_pow(Self::small(a) as u128, (*p - 2) as u128, *p as u128) as u64),
        }
    }

    pub fn div(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.mul(a, &self.inv(b))
    }

    pub fn pow(&self, a: &Coeff, e: u32) -> Coeff {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    /// Nonzero integer-valued sample; small range keeps coefficients readable.
    pub fn random_element<R: Rng>(&self, rng: &mut R, bound: i64) -> Coeff {
        self.from_i64(rng.gen_range(-bound..=bound))
    }

    pub fn is_negative(&self, a: &Coeff) -> bool {
        matches!(self, Field::Rationals) && a.is_negative()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rationals => write!(f, "QQ"),
            Field::Prime(p) => write!(f, "GF({p})"),
        }
    }
}

pub fn format_coeff(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::prime(5).unwrap();
        let a = f.from_i64(3);
        let b = f.from_i64(4);
        assert_eq!(f.add(&a, &b), f.from_i64(2));
        assert_eq!(f.mul(&a, &b), f.from_i64(2));
        assert_eq!(f.mul(&a, &f.inv(&a)), f.one());
        assert_eq!(f.neg(&a), f.from_i64(2));
        assert_eq!(f.from_i64(-1), f.from_i64(4));
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(f.from_rational(&half).unwrap(), f.from_i64(3));
    }

    #[test]
    fn non_prime_rejected() {
        assert!(Field::prime(6).is_err());
        assert!(Field::prime(1).is_err());
        assert!(Field::prime(7).is_ok());
    }

    #[test]
    fn denominator_divisible_by_p() {
        let f = Field::prime(3).unwrap();
        let third = BigRational::new(1.into(), 3.into());
        assert!(f.from_rational(&third).is_err());
    }
}
