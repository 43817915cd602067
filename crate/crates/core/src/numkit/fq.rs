use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkit::padic::is_prime;

/// The finite field F_{p^k} = F_p[x]/(f) for a monic irreducible `f`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FqField {
    p: u64,
    k: usize,
    /// Monic modulus, coefficients from x^0 up to x^k.
    modulus: Vec<u64>,
}

// Dense polynomials over F_p, little-endian, trimmed.
fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p is small and prime
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while a.len() > dm {
        let da = a.len() - 1;
        let c = a[da] * lead_inv % p;
        for (i, mi) in m.iter().enumerate() {
            let idx = da - dm + i;
            a[idx] = (a[idx] + p - c * mi % p) % p;
        }
        a = trim(a);
    }
    a
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(out)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_rem(&poly_mul(&result, &b, p), m, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    result
}

fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic polynomial of degree `k`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    if f.len() < 2 {
        return false;
    }
    let k = f.len() - 1;
    if k == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let q = p as u128;
    if poly_sub(&poly_powmod(&x, q.pow(k as u32), &f, p), &x, p) != Vec::<u64>::new() {
        return false;
    }
    for r in prime_factors(k as u128) {
        let e = q.pow((k as u128 / r) as u32);
        let h = poly_sub(&poly_powmod(&x, e, &f, p), &x, p);
        let g = poly_gcd(&f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

impl FqField {
    /// Field with a user-supplied monic modulus (coefficients x^0..x^k).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        let modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        let modulus = trim(modulus);
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::Domain("modulus must be monic of degree >= 1".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::Domain(format!("modulus {modulus:?} is reducible mod {p}")));
        }
        let k = modulus.len() - 1;
        Ok(Arc::new(FqField { p, k, modulus }))
    }

    /// Field whose modulus is the least monic irreducible of degree `k`,
    /// ordering candidates by `Σ c_i p^i` over the non-leading coefficients.
    pub fn new(p: u64, k: usize) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::Domain("extension degree must be >= 1".into()));
        }
        let total = (p as u128).pow(k as u32);
        for idx in 0..total {
            let mut coeffs = Vec::with_capacity(k + 1);
            let mut rest = idx;
            for _ in 0..k {
                coeffs.push((rest % p as u128) as u64);
                rest /= p as u128;
            }
            coeffs.push(1);
            if is_irreducible(&coeffs, p) {
                return Ok(Arc::new(FqField { p, k, modulus: coeffs }));
            }
        }
        Err(Error::Consistency(format!("no irreducible of degree {k} over F_{p}")))
    }

    pub fn prime_field(p: u64) -> Result<Arc<Self>> {
        Self::new(p, 1)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Number of elements p^k.
    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.k as u32)
    }

    pub fn zero(self: &Arc<Self>) -> FqElt {
        FqElt { field: self.clone(), coords: vec![0; self.k] }
    }

    pub fn one(self: &Arc<Self>) -> FqElt {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> FqElt {
        let mut coords = vec![0; self.k];
        coords[0] = n.rem_euclid(self.p as i64) as u64;
        FqElt { field: self.clone(), coords }
    }

    /// Element with the given coordinates in the power basis.
    pub fn element(self: &Arc<Self>, coords: &[u64]) -> FqElt {
        let mut c = vec![0; self.k];
        for (i, x) in coords.iter().enumerate().take(self.k) {
            c[i] = x % self.p;
        }
        FqElt { field: self.clone(), coords: c }
    }

    /// The class of x in F_p[x]/(f).
    pub fn generator(self: &Arc<Self>) -> FqElt {
        if self.k == 1 {
            // x ≡ -f(0) in degree one
            return self.from_int(-(self.modulus[0] as i64));
        }
        self.element(&[0, 1])
    }

    /// Element by integer index in base p (coordinate 0 least significant).
    pub fn element_by_index(self: &Arc<Self>, mut idx: u128) -> FqElt {
        let mut coords = vec![0u64; self.k];
        for c in coords.iter_mut() {
            *c = (idx % self.p as u128) as u64;
            idx /= self.p as u128;
        }
        FqElt { field: self.clone(), coords }
    }

    /// Least generator of the multiplicative group, in index order.
    pub fn primitive_element(self: &Arc<Self>) -> FqElt {
        let q1 = self.order() - 1;
        let factors = prime_factors(q1);
        for idx in 1..self.order() {
            let g = self.element_by_index(idx);
            if factors
                .iter()
                .all(|r| !g.pow_u128(q1 / r).is_one())
            {
                return g;
            }
        }
        unreachable!("finite field multiplicative groups are cyclic")
    }

    /// A primitive `n`-th root of unity, when `n | p^k - 1`.
    pub fn root_of_unity(self: &Arc<Self>, n: u128) -> Option<FqElt> {
        let q1 = self.order() - 1;
        if n == 0 || !q1.is_multiple_of(n) {
            return None;
        }
        Some(self.primitive_element().pow_u128(q1 / n))
    }
}

impl fmt::Debug for FqField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.p, self.k, self.modulus)
    }
}

/// Element of F_{p^k} in the power basis of its field's modulus.
#[derive(Clone)]
pub struct FqElt {
    field: Arc<FqField>,
    coords: Vec<u64>,
}

impl PartialEq for FqElt {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
            && (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field)
    }
}

impl Eq for FqElt {}

impl std::hash::Hash for FqElt {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl FqElt {
    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0] == 1 && self.coords[1..].iter().all(|c| *c == 0)
    }

    pub fn same_field(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field
    }

    fn assert_field(&self, other: &Self) {
        assert!(self.same_field(other), "F_q elements from different fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_field(other);
        let p = self.field.p;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + b) % p)
            .collect();
        FqElt { field: self.field.clone(), coords }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        let coords = self.coords.iter().map(|a| (p - a) % p).collect();
        FqElt { field: self.field.clone(), coords }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_field(other);
        let p = self.field.p;
        if self.field.k == 1 {
            let coords = vec![self.coords[0] * other.coords[0] % p];
            return FqElt { field: self.field.clone(), coords };
        }
        let prod = poly_mul(&trim(self.coords.clone()), &trim(other.coords.clone()), p);
        let rem = poly_rem(&prod, &self.field.modulus, p);
        let mut coords = vec![0; self.field.k];
        coords[..rem.len()].copy_from_slice(&rem);
        FqElt { field: self.field.clone(), coords }
    }

    fn pow_u128(&self, mut e: u128) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `x^e` by repeated squaring; negative exponents need `x ≠ 0`.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            return Ok(self.pow_u128(e as u128));
        }
        Ok(self.inv()?.pow_u128(e.unsigned_abs() as u128))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("inverse of zero in F_q".into()));
        }
        Ok(self.pow_u128(self.field.order() - 2))
    }

    /// `x ↦ x^{p^m}`; negative `m` gives the unique p^{|m|}-th root.
    pub fn frobenius(&self, m: i64) -> Self {
        let k = self.field.k as i64;
        let m = m.rem_euclid(k);
        let mut x = self.clone();
        for _ in 0..m {
            x = x.pow_u128(self.field.p as u128);
        }
        x
    }
}

impl fmt::Display for FqElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.k == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            write!(f, "{:?}", self.coords)
        }
    }
}

impl fmt::Debug for FqElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `fq_pow`: x^e in F_{p^k}.
pub fn fq_pow(x: &FqElt, e: i64) -> Result<FqElt> {
    x.pow(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_modulus_f25() {
        let f = FqField::new(5, 2).unwrap();
        assert_eq!(f.modulus(), &[2, 0, 1]);
    }

    #[test]
    fn reducible_modulus_rejected() {
        assert!(FqField::with_modulus(5, vec![1, 0, 1]).is_err());
        assert!(FqField::with_modulus(5, vec![2, 0, 1]).is_ok());
        assert!(FqField::with_modulus(6, vec![1, 1]).is_err());
    }

    #[test]
    fn pow_examples() {
        let f = FqField::new(5, 2).unwrap();
        let one = f.one();
        assert!(fq_pow(&one, 12345).unwrap().is_one());
        assert!(fq_pow(&one, -7).unwrap().is_one());
        for idx in 0..25 {
            let x = f.element_by_index(idx);
            assert_eq!(fq_pow(&x, 25).unwrap(), x);
        }
        let g = f.primitive_element();
        assert!(fq_pow(&g, 24).unwrap().is_one());
        for d in [1, 2, 3, 4, 6, 8, 12] {
            assert!(!fq_pow(&g, d).unwrap().is_one());
        }
    }

    #[test]
    fn negative_power_of_zero() {
        let f = FqField::new(3, 2).unwrap();
        assert!(matches!(fq_pow(&f.zero(), -1), Err(Error::Domain(_))));
    }

    #[test]
    fn frobenius_inverse_pair() {
        let f = FqField::new(3, 4).unwrap();
        for idx in [1u128, 5, 17, 40, 80] {
            let x = f.element_by_index(idx);
            assert_eq!(x.frobenius(1).frobenius(-1), x);
            assert_eq!(x.frobenius(4), x);
        }
    }

    #[test]
    fn roots_of_unity() {
        let f = FqField::new(3, 4).unwrap();
        let z = f.root_of_unity(10).unwrap();
        assert!(z.pow(10).unwrap().is_one());
        assert!(!z.pow(5).unwrap().is_one());
        assert!(!z.pow(2).unwrap().is_one());
        assert!(FqField::new(2, 3).unwrap().root_of_unity(10).is_none());
    }

    #[test]
    fn irreducibility_small_cases() {
        // x^2 + x + 1 over F_2
        assert!(is_irreducible(&[1, 1, 1], 2));
        // x^4 + x + 1 over F_2
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        // (x^2+x+1)^2 = x^4 + x^2 + 1
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
    }
}
