//! Truncated Laurent series in `t` over the cyclotomic integers `Z[ζ_n]`.
//!
//! The theta machinery works at level `n = 2ℓ` with `t = q^{1/2ℓ}`, so that
//! `q = t^{2ℓ}` and `q^{1/2} = t^ℓ` are plain monomials.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

fn poly_divexact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both little-endian, den monic
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = r[i + dd];
        q[i] = c;
        for (j, dj) in den.iter().enumerate() {
            r[i + j] -= c * dj;
        }
    }
    debug_assert!(r.iter().all(|x| *x == 0));
    q
}

/// The n-th cyclotomic polynomial, little-endian.
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    let mut x_n_minus_1 = vec![0i64; n as usize + 1];
    x_n_minus_1[0] = -1;
    x_n_minus_1[n as usize] = 1;
    let mut acc = x_n_minus_1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            acc = poly_divexact(&acc, &cyclotomic_poly(d));
        }
    }
    acc
}

/// The ring Z[ζ_n] = Z[x]/(Φ_n(x)).
#[derive(PartialEq, Eq)]
pub struct CycloRing {
    level: u32,
    phi: Vec<i64>,
}

impl fmt::Debug for CycloRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[zeta_{}]", self.level)
    }
}

impl CycloRing {
    pub fn new(level: u32) -> Arc<Self> {
        assert!(level >= 1);
        Arc::new(CycloRing { level, phi: cyclotomic_poly(level) })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// φ(n), the rank of Z[ζ_n] over Z.
    pub fn rank(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn zero(self: &Arc<Self>) -> CycloInt {
        CycloInt { ring: self.clone(), coords: vec![BigInt::zero(); self.rank()] }
    }

    pub fn one(self: &Arc<Self>) -> CycloInt {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> CycloInt {
        let mut c = self.zero();
        c.coords[0] = BigInt::from(n);
        c
    }

    /// ζ_n^k for any integer k.
    pub fn zeta_pow(self: &Arc<Self>, k: i64) -> CycloInt {
        let k = k.rem_euclid(self.level as i64) as usize;
        let mut raw = vec![BigInt::zero(); k + 1];
        raw[k] = BigInt::one();
        self.reduce(raw)
    }

    /// ±ζ^k, the form of the units accepted by series inversion.
    pub fn signed_zeta_pow(self: &Arc<Self>, negative: bool, k: i64) -> CycloInt {
        let z = self.zeta_pow(k);
        if negative {
            z.neg()
        } else {
            z
        }
    }

    fn reduce(self: &Arc<Self>, mut raw: Vec<BigInt>) -> CycloInt {
        let d = self.rank();
        while raw.len() > d {
            let top = raw.len() - 1;
            let c = raw.pop().unwrap();
            if c.is_zero() {
                continue;
            }
            // x^top = x^{top-d} * x^d, with x^d = -(phi_0 + ... + phi_{d-1} x^{d-1})
            for j in 0..d {
                if self.phi[j] != 0 {
                    raw[top - d + j] -= &c * self.phi[j];
                }
            }
        }
        raw.resize(d, BigInt::zero());
        CycloInt { ring: self.clone(), coords: raw }
    }

    pub fn from_coords(self: &Arc<Self>, coords: Vec<BigInt>) -> CycloInt {
        self.reduce(coords)
    }
}

/// Element of Z[ζ_n] in the power basis 1, ζ, …, ζ^{φ(n)-1}.
#[derive(Clone)]
pub struct CycloInt {
    ring: Arc<CycloRing>,
    coords: Vec<BigInt>,
}

impl PartialEq for CycloInt {
    fn eq(&self, other: &Self) -> bool {
        self.ring.level == other.ring.level && self.coords == other.coords
    }
}

impl Eq for CycloInt {}

impl CycloInt {
    pub fn ring(&self) -> &Arc<CycloRing> {
        &self.ring
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.ring.level, o.ring.level);
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect();
        CycloInt { ring: self.ring.clone(), coords }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect();
        CycloInt { ring: self.ring.clone(), coords }
    }

    pub fn neg(&self) -> Self {
        CycloInt { ring: self.ring.clone(), coords: self.coords.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.ring.level, o.ring.level);
        let d = self.ring.rank();
        let mut raw = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        self.ring.reduce(raw)
    }

    /// If `self = ±ζ^k`, returns `(negative, k)` with `0 <= k < n`.
    pub fn as_signed_root_of_unity(&self) -> Option<(bool, i64)> {
        for k in 0..self.ring.level as i64 {
            let z = self.ring.zeta_pow(k);
            if *self == z {
                return Some((false, k));
            }
            if *self == z.neg() {
                return Some((true, k));
            }
        }
        None
    }

    /// Inverse of a unit of the form ±ζ^k.
    pub fn inv_root_of_unity(&self) -> Result<Self> {
        let (neg, k) = self.as_signed_root_of_unity().ok_or_else(|| {
            Error::Inversion(format!("{self} is not of the form ±ζ^k"))
        })?;
        Ok(self.ring.signed_zeta_pow(neg, -k))
    }

    /// Exact quotient `self / d` in Z[ζ_n], failing when it is not integral.
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::Inversion("division by zero cyclotomic integer".into()));
        }
        if let Ok(inv) = d.inv_root_of_unity() {
            return Ok(self.mul(&inv));
        }
        let n = self.ring.rank();
        // Column i of the matrix is d·ζ^i.
        let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n + 1]; n];
        for i in 0..n {
            let col = d.mul(&self.ring.zeta_pow(i as i64));
            for r in 0..n {
                m[r][i] = BigRational::from_integer(col.coords[r].clone());
            }
        }
        for (r, row) in m.iter_mut().enumerate() {
            row[n] = BigRational::from_integer(self.coords[r].clone());
        }
        for c in 0..n {
            let piv = (c..n).find(|&r| !m[r][c].is_zero()).ok_or_else(|| {
                Error::Consistency("singular multiplication matrix".into())
            })?;
            m.swap(c, piv);
            let pv = m[c][c].clone();
            for x in m[c].iter_mut() {
                *x = &*x / &pv;
            }
            for r in 0..n {
                if r != c && !m[r][c].is_zero() {
                    let f = m[r][c].clone();
                    for cc in 0..=n {
                        let delta = &f * &m[c][cc];
                        m[r][cc] -= delta;
                    }
                }
            }
        }
        let mut coords = Vec::with_capacity(n);
        for row in &m {
            if !row[n].is_integer() {
                return Err(Error::Inversion(format!("{self} is not divisible by {d}")));
            }
            coords.push(row[n].to_integer());
        }
        Ok(CycloInt { ring: self.ring.clone(), coords })
    }
}

impl fmt::Display for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Truncated Laurent series `Σ c_e t^e + O(t^T)` with `c_e ∈ Z[ζ_n]`.
///
/// `order == None` marks an exact finite sum. Stored exponents are always
/// below the order and stored coefficients are never zero.
#[derive(Clone)]
pub struct CycloLaurent {
    ring: Arc<CycloRing>,
    terms: BTreeMap<i64, CycloInt>,
    order: Option<i64>,
}

impl PartialEq for CycloLaurent {
    fn eq(&self, other: &Self) -> bool {
        self.ring.level == other.ring.level
            && self.order == other.order
            && self.terms == other.terms
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl CycloLaurent {
    pub fn zero(ring: &Arc<CycloRing>, order: Option<i64>) -> Self {
        CycloLaurent { ring: ring.clone(), terms: BTreeMap::new(), order }
    }

    pub fn one(ring: &Arc<CycloRing>) -> Self {
        Self::monomial(ring.one(), 0)
    }

    /// Exact monomial `c·t^e`.
    pub fn monomial(c: CycloInt, e: i64) -> Self {
        let ring = c.ring.clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        CycloLaurent { ring, terms, order: None }
    }

    /// Series from `(exponent, coefficient)` pairs, truncated at `order`.
    pub fn from_terms(
        ring: &Arc<CycloRing>,
        terms: impl IntoIterator<Item = (i64, CycloInt)>,
        order: Option<i64>,
    ) -> Self {
        let mut s = CycloLaurent::zero(ring, order);
        for (e, c) in terms {
            s.add_term(e, &c);
        }
        s
    }

    /// Integer-coefficient series `Σ c_i t^{start + i}` up to `order`.
    pub fn from_int_coeffs(ring: &Arc<CycloRing>, start: i64, coeffs: &[i64], order: Option<i64>) -> Self {
        Self::from_terms(
            ring,
            coeffs.iter().enumerate().map(|(i, c)| (start + i as i64, ring.from_int(*c))),
            order,
        )
    }

    pub fn ring(&self) -> &Arc<CycloRing> {
        &self.ring
    }

    pub fn level(&self) -> u32 {
        self.ring.level
    }

    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<i64, CycloInt> {
        &self.terms
    }

    pub fn coeff(&self, e: i64) -> CycloInt {
        self.terms.get(&e).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// True when every coefficient below the truncation order vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Least exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub(crate) fn add_term(&mut self, e: i64, c: &CycloInt) {
        if let Some(t) = self.order {
            if e >= t {
                return;
            }
        }
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                *x = x.add(c);
                if x.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    fn check_level(&self, o: &Self) -> Result<()> {
        if self.ring.level != o.ring.level {
            return Err(Error::Usage(format!(
                "level mismatch: {} vs {}",
                self.ring.level, o.ring.level
            )));
        }
        Ok(())
    }

    /// Drop everything at or above `order`.
    pub fn truncate(&self, order: i64) -> Self {
        let order = min_opt(self.order, Some(order));
        let mut s = CycloLaurent::zero(&self.ring, order);
        for (e, c) in &self.terms {
            s.add_term(*e, c);
        }
        s
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_level(o)?;
        let mut s = CycloLaurent::zero(&self.ring, min_opt(self.order, o.order));
        for (e, c) in self.terms.iter().chain(o.terms.iter()) {
            s.add_term(*e, c);
        }
        Ok(s)
    }

    pub fn neg(&self) -> Self {
        CycloLaurent {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            order: self.order,
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Multiply by c·t^k.
    pub fn scale(&self, c: &CycloInt, k: i64) -> Self {
        let mut s = CycloLaurent::zero(&self.ring, self.order.map(|t| t + k));
        if c.is_zero() {
            // 0·(… + O(t^T)) is exactly zero
            s.order = None;
            return s;
        }
        for (e, x) in &self.terms {
            s.add_term(e + k, &x.mul(c));
        }
        s
    }

    /// Product, truncated at `min(T_a + v_b, T_b + v_a)`.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_level(o)?;
        let order = match (self.valuation(), o.valuation()) {
            (Some(va), Some(vb)) => min_opt(self.order.map(|t| t + vb), o.order.map(|t| t + va)),
            // A zero factor: the product is as imprecise as the zero factor allows.
            (None, Some(vb)) => self.order.map(|t| t + vb),
            (Some(va), None) => o.order.map(|t| t + va),
            (None, None) => match (self.order, o.order) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        };
        let mut s = CycloLaurent::zero(&self.ring, order);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea + eb;
                if let Some(t) = order {
                    if e >= t {
                        // b's exponents increase, so the rest of this row is truncated too
                        break;
                    }
                }
                s.add_term(e, &ca.mul(cb));
            }
        }
        Ok(s)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = CycloLaurent::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse; the leading coefficient must be ±ζ^k.
    pub fn invert(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::Inversion("series is zero to its precision".into()))?;
        let lead = &self.terms[&v];
        lead.inv_root_of_unity()?;
        if self.terms.len() == 1 {
            let inv = lead.inv_root_of_unity()?;
            let order = self.order.map(|t| -v + (t - v));
            let mut s = CycloLaurent::monomial(inv, -v);
            s.order = order;
            return Ok(s);
        }
        let one = CycloLaurent::one(&self.ring);
        one.divide(self)
    }

    /// Quotient `self / d` by long division with exact coefficient division
    /// in Z[ζ_n]. The divisor's leading coefficient need not be a unit, but
    /// every step must divide exactly.
    pub fn divide(&self, d: &Self) -> Result<Self> {
        self.check_level(d)?;
        let vd = d
            .valuation()
            .ok_or_else(|| Error::Inversion("division by a series that is zero to its precision".into()))?;
        let lead = d.terms[&vd].clone();
        let vn = match self.valuation() {
            Some(v) => v,
            None => {
                let order = self.order.map(|t| t - vd);
                return Ok(CycloLaurent::zero(&self.ring, order));
            }
        };
        let rel_n = self.order.map(|t| t - vn);
        let rel_d = d.order.map(|t| t - vd);
        let rel = match min_opt(rel_n, rel_d) {
            Some(r) => r,
            None => {
                if d.terms.len() == 1 {
                    let inv = lead.inv_root_of_unity().ok();
                    if let Some(inv) = inv {
                        return Ok(self.scale(&inv, -vd));
                    }
                    let mut s = CycloLaurent::zero(&self.ring, None);
                    for (e, c) in &self.terms {
                        s.add_term(e - vd, &c.div_exact(&lead)?);
                    }
                    return Ok(s);
                }
                return Err(Error::Precision(
                    "quotient of exact series needs a truncation order".into(),
                ));
            }
        };
        let vq = vn - vd;
        let order = vq + rel;
        let mut rem: BTreeMap<i64, CycloInt> = self
            .terms
            .iter()
            .filter(|(e, _)| **e < order + vd)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        let mut q = CycloLaurent::zero(&self.ring, Some(order));
        for e in vq..order {
            let Some(r) = rem.get(&(e + vd)).cloned() else { continue };
            let c = r.div_exact(&lead)?;
            for (ed, cd) in &d.terms {
                let k = e + ed;
                if k >= order + vd {
                    break;
                }
                let delta = c.mul(cd);
                let entry = rem.entry(k).or_insert_with(|| self.ring.zero());
                *entry = entry.sub(&delta);
                if entry.is_zero() {
                    rem.remove(&k);
                }
            }
            q.add_term(e, &c);
        }
        Ok(q)
    }

    /// Rescale `q ↦ q^m`, i.e. every exponent (and the order) times `m`.
    pub fn substitute_q_power(&self, m: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain(format!("substitution power must be >= 1, got {m}")));
        }
        Ok(CycloLaurent {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, c)| (e * m, c.clone())).collect(),
            order: self.order.map(|t| t * m),
        })
    }

    /// Coefficients as plain integers if every coefficient lies in Z.
    pub fn integer_coeffs(&self) -> Option<BTreeMap<i64, BigInt>> {
        self.terms
            .iter()
            .map(|(e, c)| {
                if c.coords[1..].iter().all(Zero::is_zero) {
                    Some((*e, c.coords[0].clone()))
                } else {
                    None
                }
            })
            .collect()
    }
}

impl fmt::Display for CycloLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c} * t^{e}")?;
        }
        match self.order {
            Some(t) => {
                if first {
                    write!(f, "0")?;
                }
                write!(f, " + O(t^{t})")
            }
            None => {
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for CycloLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Sum of `|coefficient|` entries; used to keep random test data bounded.
pub fn coefficient_height(s: &CycloLaurent) -> BigInt {
    s.terms
        .values()
        .flat_map(|c| c.coords.iter())
        .map(|x| x.abs())
        .fold(BigInt::zero(), |a, b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Arc<CycloRing> {
        CycloRing::new(10)
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(10), vec![1, -1, 1, -1, 1]);
        assert_eq!(cyclotomic_poly(14).len(), 7);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn zeta_has_order_n() {
        let r = ring();
        assert_eq!(r.zeta_pow(10), r.one());
        assert_eq!(r.zeta_pow(5), r.from_int(-1));
        assert_eq!(r.zeta_pow(3).mul(&r.zeta_pow(9)), r.zeta_pow(2));
        assert_eq!(r.zeta_pow(-1), r.zeta_pow(9));
    }

    #[test]
    fn mul_examples() {
        let r = ring();
        let a = CycloLaurent::from_int_coeffs(&r, 0, &[1, 1], None);
        let b = CycloLaurent::from_int_coeffs(&r, 0, &[1, -1], None);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, CycloLaurent::from_int_coeffs(&r, 0, &[1, 0, -1], None));

        let s = CycloLaurent::from_int_coeffs(&r, -2, &[3, 0, 5, 7], Some(4));
        assert_eq!(CycloLaurent::one(&r).mul(&s).unwrap(), s);

        let x = CycloLaurent::monomial(r.zeta_pow(1), -1);
        let y = CycloLaurent::monomial(r.zeta_pow(9), 1);
        assert_eq!(x.mul(&y).unwrap(), CycloLaurent::one(&r));
    }

    #[test]
    fn level_mismatch() {
        let a = CycloLaurent::one(&CycloRing::new(10));
        let b = CycloLaurent::one(&CycloRing::new(14));
        assert!(matches!(a.mul(&b), Err(Error::Usage(_))));
    }

    #[test]
    fn product_order_rule() {
        let r = ring();
        // (t^2 + O(t^5)) * (t^-1 + t + O(t^3)) -> order min(5 - 1, 3 + 2) = 4
        let a = CycloLaurent::from_int_coeffs(&r, 2, &[1], Some(5));
        let b = CycloLaurent::from_int_coeffs(&r, -1, &[1, 0, 1], Some(3));
        assert_eq!(a.mul(&b).unwrap().order(), Some(4));
    }

    #[test]
    fn invert_examples() {
        let r = ring();
        assert_eq!(CycloLaurent::one(&r).invert().unwrap(), CycloLaurent::one(&r));

        let m = CycloLaurent::monomial(r.zeta_pow(1), 3);
        assert_eq!(m.invert().unwrap(), CycloLaurent::monomial(r.zeta_pow(-1), -3));

        let s = CycloLaurent::from_int_coeffs(&r, 0, &[1, -1], Some(12));
        let inv = s.invert().unwrap();
        assert_eq!(inv, CycloLaurent::from_int_coeffs(&r, 0, &[1; 12], Some(12)));
    }

    #[test]
    fn invert_rejects_non_unit() {
        let r = ring();
        let s = CycloLaurent::from_int_coeffs(&r, 0, &[2, 1], Some(5));
        assert!(matches!(s.invert(), Err(Error::Inversion(_))));
    }

    #[test]
    fn exact_division_by_non_unit() {
        let r = ring();
        // (ζ - ζ^{-1}) divides (ζ^2 - ζ^{-2}) = (ζ - ζ^{-1})(ζ + ζ^{-1})
        let d = r.zeta_pow(1).sub(&r.zeta_pow(-1));
        let n = r.zeta_pow(2).sub(&r.zeta_pow(-2));
        let q = n.div_exact(&d).unwrap();
        assert_eq!(q, r.zeta_pow(1).add(&r.zeta_pow(-1)));
        assert!(r.one().div_exact(&r.from_int(2)).is_err());
    }

    #[test]
    fn substitute_examples() {
        let r = ring();
        let a = CycloLaurent::from_int_coeffs(&r, 0, &[1, 1], None);
        assert_eq!(
            a.substitute_q_power(2).unwrap(),
            CycloLaurent::from_int_coeffs(&r, 0, &[1, 0, 1], None)
        );
        let s = CycloLaurent::from_int_coeffs(&r, -1, &[4, 0, 2], Some(7));
        assert_eq!(s.substitute_q_power(1).unwrap(), s);
        let m = CycloLaurent::monomial(r.one(), -1);
        assert_eq!(m.substitute_q_power(3).unwrap(), CycloLaurent::monomial(r.one(), -3));
        assert!(s.substitute_q_power(0).is_err());
    }

    #[test]
    fn render() {
        let r = CycloRing::new(6);
        let s = CycloLaurent::from_terms(&r, [(-1, r.zeta_pow(1)), (2, r.from_int(3))], Some(4));
        assert_eq!(s.to_string(), "[0,1] * t^-1 + [3,0] * t^2 + O(t^4)");
        assert_eq!(CycloLaurent::zero(&r, Some(9)).to_string(), "0 + O(t^9)");
    }
}
