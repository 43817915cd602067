use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn big_pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn int_valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    while (&y % &p).is_zero() {
        y /= &p;
        v += 1;
    }
    Some(v)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Element of Z_p known modulo p^N.
///
/// Precision only ever goes down under arithmetic: the result of a binary
/// operation carries the smaller of the two operand precisions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: u64,
    prec: u32,
    residue: BigInt,
}

impl PadicInt {
    pub fn new(p: u64, prec: u32, value: impl Into<BigInt>) -> Self {
        assert!(prec >= 1, "precision must be positive");
        let m = big_pow(p, prec);
        let residue = value.into().mod_floor(&m);
        PadicInt { p, prec, residue }
    }

    pub fn zero(p: u64, prec: u32) -> Self {
        Self::new(p, prec, 0)
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::new(p, prec, 1)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> BigInt {
        big_pow(self.p, self.prec)
    }

    /// Valuation, or `None` when the value is zero to the known precision.
    pub fn valuation(&self) -> Option<u32> {
        int_valuation(&self.residue, self.p)
    }

    pub fn is_unit(&self) -> bool {
        !(&self.residue % BigInt::from(self.p)).is_zero()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Usage(format!(
                "prime mismatch: {} vs {}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self::new(self.p, prec.min(self.prec), self.residue.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(
            self.p,
            self.prec.min(other.prec),
            &self.residue + &other.residue,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(
            self.p,
            self.prec.min(other.prec),
            &self.residue - &other.residue,
        ))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.prec, -&self.residue)
    }

    /// Product at precision `min(N_a, N_b)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(
            self.p,
            self.prec.min(other.prec),
            &self.residue * &other.residue,
        ))
    }

    pub fn pow(&self, e: u64) -> Self {
        let m = self.modulus();
        Self::new(self.p, self.prec, self.residue.modpow(&BigInt::from(e), &m))
    }

    /// Inverse of a unit.
    pub fn inv(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::Inversion(format!("{self} is not a p-adic unit")));
        }
        let m = self.modulus();
        let g = self.residue.extended_gcd(&m);
        debug_assert!(g.gcd.is_one());
        Ok(Self::new(self.p, self.prec, g.x))
    }

    /// Signed representative in `(-p^N/2, p^N/2]`.
    pub fn centered(&self) -> BigInt {
        let m = self.modulus();
        let half: BigInt = &m / 2;
        if self.residue > half {
            &self.residue - m
        } else {
            self.residue.clone()
        }
    }
}

/// Teichmüller digits `d_i` of `c` in Z_p: `c = Σ p^i ω(d_i) mod p^N`, with
/// `ω` the Teichmüller character and each `d_i ∈ [0, p)`.
pub fn teichmuller_digits(c: &BigInt, p: u64, prec: u32) -> Vec<u64> {
    let mut digits = Vec::with_capacity(prec as usize);
    let pb = BigInt::from(p);
    let mut rest = c.mod_floor(&big_pow(p, prec));
    for level in 0..prec {
        let n = prec - level;
        let m = big_pow(p, n);
        let d = rest.mod_floor(&pb);
        let omega = d.modpow(&big_pow(p, n - 1), &m);
        let diff = (&rest - omega).mod_floor(&m);
        debug_assert!((&diff % &pb).is_zero());
        rest = diff / &pb;
        digits.push(u64::try_from(d).expect("digit below p"));
    }
    digits
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.p, self.prec)
    }
}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Reduce a rational with non-negative p-adic valuation into Z/p^N.
pub fn rational_to_padic(
    numer: &BigInt,
    denom: &BigInt,
    p: u64,
    prec: u32,
) -> Result<PadicInt> {
    let d = PadicInt::new(p, prec, denom.clone());
    if !d.is_unit() {
        return Err(Error::Domain(format!(
            "{numer}/{denom} is not {p}-integral"
        )));
    }
    let n = PadicInt::new(p, prec, numer.clone());
    n.mul(&d.inv()?)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_examples() {
        let one = PadicInt::one(5, 4);
        let x = PadicInt::new(5, 4, 123);
        assert_eq!(one.mul(&x).unwrap(), x);

        let a = PadicInt::new(5, 3, 2);
        let b = PadicInt::new(5, 3, 3);
        assert_eq!(a.mul(&b).unwrap(), PadicInt::new(5, 3, 6));

        let u = PadicInt::new(5, 4, 25 * 7);
        let w = PadicInt::new(5, 4, 5 * 3);
        let prod = u.mul(&w).unwrap();
        assert!(prod.valuation().unwrap() >= 3);
    }

    #[test]
    fn prime_mismatch() {
        let a = PadicInt::new(5, 3, 2);
        let b = PadicInt::new(3, 3, 2);
        assert!(matches!(a.mul(&b), Err(Error::Usage(_))));
    }

    #[test]
    fn precision_takes_minimum() {
        let a = PadicInt::new(7, 5, 10);
        let b = PadicInt::new(7, 2, 3);
        assert_eq!(a.add(&b).unwrap().precision(), 2);
        assert_eq!(a.mul(&b).unwrap().precision(), 2);
    }

    #[test]
    fn inverse_of_unit() {
        let a = PadicInt::new(3, 6, 2);
        let inv = a.inv().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), PadicInt::one(3, 6));
        assert!(PadicInt::new(3, 6, 9).inv().is_err());
    }

    #[test]
    fn teichmuller_digits_of_minus_one() {
        // p odd: -1 is itself a Teichmüller representative.
        assert_eq!(teichmuller_digits(&BigInt::from(-1), 5, 4), vec![4, 0, 0, 0]);
        // p = 2: -1 = 1 + 2 + 4 + ...
        assert_eq!(teichmuller_digits(&BigInt::from(-1), 2, 4), vec![1, 1, 1, 1]);
    }

    #[test]
    fn teichmuller_digits_reconstruct() {
        for p in [2u64, 3, 5, 7] {
            let n = 5;
            let m = big_pow(p, n);
            for c in [0i64, 1, 2, 17, 123, -45] {
                let digits = teichmuller_digits(&BigInt::from(c), p, n);
                let mut acc = BigInt::zero();
                for (i, d) in digits.iter().enumerate() {
                    let omega = BigInt::from(*d).modpow(&big_pow(p, n - 1), &m);
                    acc += big_pow(p, i as u32) * omega;
                }
                assert_eq!(acc.mod_floor(&m), BigInt::from(c).mod_floor(&m));
            }
        }
    }
}
