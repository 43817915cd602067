//! Truncated Hahn series over `F_{p^k}` with rational exponents, modelling
//! the tilt `F` of `C_p`.
//!
//! A series is `Σ c_i t^{e_i} + O(t^E)`; `E = None` marks an exact finite
//! sum. The uniformizer-like element `t` is normalized by `v_F(t) = 1`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{big_pow, FqElt, FqField, Rat};

/// Valuation of a Hahn series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Valuation {
    Finite(Rat),
    /// Zero to the known precision; the true valuation is at least the cap.
    AtLeast(Rat),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Valuation::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// A lower bound, `None` meaning `+∞`.
    pub fn lower_bound(&self) -> Option<&Rat> {
        match self {
            Valuation::Finite(r) | Valuation::AtLeast(r) => Some(r),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(r) => write!(f, "{r}"),
            Valuation::AtLeast(r) => write!(f, ">={r}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

fn scale_pm(r: &Rat, p: u64, m: i64) -> Rat {
    let f = Rat::int(big_pow(p, m.unsigned_abs() as u32));
    if m >= 0 {
        r * &f
    } else {
        r / &f
    }
}

fn min_cap(a: &Option<Rat>, b: &Option<Rat>) -> Option<Rat> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y).clone()),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

fn add_opt(a: Option<&Rat>, b: Option<&Rat>) -> Option<Rat> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

/// Element of the Hahn series model of `F`.
#[derive(Clone, PartialEq, Eq)]
pub struct HahnElt {
    field: Arc<FqField>,
    terms: Vec<(Rat, FqElt)>,
    cap: Option<Rat>,
}

impl HahnElt {
    pub fn zero(field: &Arc<FqField>) -> Self {
        HahnElt { field: field.clone(), terms: Vec::new(), cap: None }
    }

    /// `0 + O(t^cap)`.
    pub fn inexact_zero(field: &Arc<FqField>, cap: Rat) -> Self {
        HahnElt { field: field.clone(), terms: Vec::new(), cap: Some(cap) }
    }

    pub fn one(field: &Arc<FqField>) -> Self {
        Self::monomial(field.one(), Rat::zero())
    }

    pub fn monomial(c: FqElt, e: Rat) -> Self {
        let field = c.field().clone();
        let terms = if c.is_zero() { Vec::new() } else { vec![(e, c)] };
        HahnElt { field, terms, cap: None }
    }

    /// `t^e`.
    pub fn t_pow(field: &Arc<FqField>, e: Rat) -> Self {
        Self::monomial(field.one(), e)
    }

    /// The canonical element `t` with `v_F(t) = 1`.
    pub fn t(field: &Arc<FqField>) -> Self {
        Self::t_pow(field, Rat::one())
    }

    pub fn constant(c: FqElt) -> Self {
        Self::monomial(c, Rat::zero())
    }

    /// Normalizing constructor: sorts, merges equal exponents, drops zero
    /// coefficients and anything at or beyond the cap.
    pub fn from_terms(
        field: &Arc<FqField>,
        terms: impl IntoIterator<Item = (Rat, FqElt)>,
        cap: Option<Rat>,
    ) -> Self {
        let mut v: Vec<(Rat, FqElt)> = terms.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Rat, FqElt)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            if let Some(cap) = &cap {
                if e >= *cap {
                    continue;
                }
            }
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc = lc.add(&c),
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        HahnElt { field: field.clone(), terms: out, cap }
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn prime(&self) -> u64 {
        self.field.characteristic()
    }

    pub fn terms(&self) -> &[(Rat, FqElt)] {
        &self.terms
    }

    pub fn cap(&self) -> Option<&Rat> {
        self.cap.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.cap.is_none()
    }

    /// True for both the exact zero and `0 + O(t^E)`.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<(&Rat, &FqElt)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    /// `v_F`, the least exponent.
    pub fn v_f(&self) -> Valuation {
        match (self.terms.first(), &self.cap) {
            (Some((e, _)), _) => Valuation::Finite(e.clone()),
            (None, Some(c)) => Valuation::AtLeast(c.clone()),
            (None, None) => Valuation::Infinite,
        }
    }

    /// The valuation if it is a known finite number.
    pub fn valuation(&self) -> Result<Rat> {
        match self.v_f() {
            Valuation::Finite(r) => Ok(r),
            Valuation::AtLeast(c) => Err(Error::Precision(format!(
                "valuation undetermined: zero to O(t^{c})"
            ))),
            Valuation::Infinite => Err(Error::Domain("valuation of exact zero".into())),
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.field, &o.field) && *self.field != *o.field {
            return Err(Error::Usage(format!(
                "Hahn series over different fields: {:?} vs {:?}",
                self.field, o.field
            )));
        }
        Ok(())
    }

    pub fn truncate(&self, cap: &Rat) -> Self {
        let cap = min_cap(&self.cap, &Some(cap.clone()));
        Self::from_terms(&self.field, self.terms.iter().cloned(), cap)
    }

    /// Char-p addition: coefficient-wise, cap `min(E_x, E_y)`.
    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let cap = min_cap(&self.cap, &o.cap);
        Ok(Self::from_terms(
            &self.field,
            self.terms.iter().chain(o.terms.iter()).cloned(),
            cap,
        ))
    }

    pub fn neg(&self) -> Self {
        HahnElt {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
            cap: self.cap.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Product with cap `min(E_x + v_y, E_y + v_x)`.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let (lx, ly) = (self.v_f(), o.v_f());
        if lx == Valuation::Infinite || ly == Valuation::Infinite {
            return Ok(Self::zero(&self.field));
        }
        let cap = min_cap(
            &add_opt(self.cap.as_ref(), ly.lower_bound()),
            &add_opt(o.cap.as_ref(), lx.lower_bound()),
        );
        let mut prod = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea + eb;
                if let Some(c) = &cap {
                    if e >= *c {
                        break;
                    }
                }
                prod.push((e, ca.mul(cb)));
            }
        }
        Ok(Self::from_terms(&self.field, prod, cap))
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        let mut acc = Self::one(&self.field);
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

    /// Multiply by the scalar `c ∈ F_{p^k}`.
    pub fn scale(&self, c: &FqElt) -> Self {
        if c.is_zero() {
            return Self::zero(&self.field);
        }
        HahnElt {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect(),
            cap: self.cap.clone(),
        }
    }

    /// `x ↦ x^{p^m}`; exponents and cap scale by `p^m`, coefficients are
    /// raised to `p^m`. Negative `m` takes exact `p`-power roots.
    pub fn frobenius(&self, m: i64) -> Self {
        let p = self.prime();
        HahnElt {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (scale_pm(e, p, m), c.frobenius(m)))
                .collect(),
            cap: self.cap.as_ref().map(|c| scale_pm(c, p, m)),
        }
    }

    /// Apply the Frobenius of `F_{p^k}` to the coefficients only.
    pub fn coefficient_frobenius(&self, m: i64) -> Self {
        HahnElt {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.frobenius(m))).collect(),
            cap: self.cap.clone(),
        }
    }

    /// `(t^e)^r = t^{er}` for a monomial with coefficient 1.
    pub fn monomial_root(&self, r: &Rat) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::Domain(format!("root exponent must be positive, got {r}")));
        }
        match self.terms.as_slice() {
            [(e, c)] if c.is_one() => {
                let e2 = e * r;
                // keep the relative precision of the input
                let cap = self.cap.as_ref().map(|cap| &e2 + (cap - e));
                Ok(HahnElt { field: self.field.clone(), terms: vec![(e2, c.clone())], cap })
            }
            [(_, _)] => Err(Error::UnsupportedRoot(format!(
                "root of {self}: only coefficient-1 monomials are supported"
            ))),
            _ => Err(Error::UnsupportedRoot(format!("root of non-monomial {self}"))),
        }
    }
}

fn fmt_exp(e: &Rat) -> String {
    if e.is_integer() && !e.is_negative() {
        e.to_string()
    } else {
        format!("({e})")
    }
}

impl fmt::Display for HahnElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*t^{}", fmt_exp(e))?;
        }
        if let Some(cap) = &self.cap {
            write!(f, " + O(t^{})", fmt_exp(cap))?;
        }
        Ok(())
    }
}

impl fmt::Debug for HahnElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for HahnElt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Automorphism of the model: `x ↦ x^{p^frob}` followed by the coefficient
/// Frobenius `c ↦ c^{p^coeff}`. The two kinds commute, so composition adds
/// the counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TiltAut {
    pub frob: i64,
    pub coeff: i64,
}

impl TiltAut {
    pub fn identity() -> Self {
        TiltAut { frob: 0, coeff: 0 }
    }

    pub fn frobenius_power(m: i64) -> Self {
        TiltAut { frob: m, coeff: 0 }
    }

    pub fn coefficient_galois(m: i64) -> Self {
        TiltAut { frob: 0, coeff: m }
    }

    pub fn compose(&self, o: &Self) -> Self {
        TiltAut { frob: self.frob + o.frob, coeff: self.coeff + o.coeff }
    }

    pub fn inverse(&self) -> Self {
        TiltAut { frob: -self.frob, coeff: -self.coeff }
    }

    pub fn is_identity(&self, k: usize) -> bool {
        self.frob == 0 && self.coeff.rem_euclid(k as i64) == 0
    }

    /// Factor by which `v_F` is multiplied.
    pub fn valuation_scale(&self, p: u64) -> Rat {
        scale_pm(&Rat::one(), p, self.frob)
    }

    pub fn apply(&self, x: &HahnElt) -> HahnElt {
        x.frobenius(self.frob).coefficient_frobenius(self.coeff)
    }
}

impl fmt::Display for TiltAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi^{} . gal^{}", self.frob, self.coeff)
    }
}

pub fn apply_aut(sigma: &TiltAut, x: &HahnElt) -> HahnElt {
    sigma.apply(x)
}

/// Ring context: every result is truncated at the optional global cap.
#[derive(Clone, Debug)]
pub struct HahnRing {
    pub field: Arc<FqField>,
    pub cap: Option<Rat>,
}

impl HahnRing {
    pub fn new(field: Arc<FqField>, cap: Option<Rat>) -> Self {
        HahnRing { field, cap }
    }

    pub fn clip(&self, x: HahnElt) -> HahnElt {
        match &self.cap {
            Some(c) => x.truncate(c),
            None => x,
        }
    }
}

/// Random nonzero element of `F_{p^k}`.
pub fn random_unit<R: Rng>(field: &Arc<FqField>, rng: &mut R) -> FqElt {
    loop {
        let idx = rng.gen_range(1..field.order());
        let c = field.element_by_index(idx);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random positive rational `n/d` with `1 <= n <= max_num`, `1 <= d <= max_den`.
pub fn random_positive_rat<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rat {
    Rat::new(rng.gen_range(1..=max_num), rng.gen_range(1..=max_den))
}

/// Random Hahn series with `n_terms` terms of positive exponent.
pub fn random_element<R: Rng>(
    field: &Arc<FqField>,
    rng: &mut R,
    n_terms: usize,
    cap: Option<Rat>,
) -> HahnElt {
    let terms: Vec<_> = (0..n_terms)
        .map(|_| (random_positive_rat(rng, 12, 6), random_unit(field, rng)))
        .collect();
    HahnElt::from_terms(field, terms, cap)
}

pub fn cmp_valuation(a: &Valuation, b: &Valuation) -> Ordering {
    match (a.lower_bound(), b.lower_bound()) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn valuation_examples() {
        let f = FqField::prime_field(5).unwrap();
        assert_eq!(HahnElt::t(&f).v_f(), Valuation::Finite(Rat::one()));
        assert_eq!(HahnElt::zero(&f).v_f(), Valuation::Infinite);
        let x = HahnElt::t_pow(&f, r(1, 4)).add(&HahnElt::t_pow(&f, r(2, 1))).unwrap();
        assert_eq!(x.v_f(), Valuation::Finite(r(1, 4)));
    }

    #[test]
    fn arithmetic_examples() {
        let f = FqField::prime_field(3).unwrap();
        let h = HahnElt::t_pow(&f, r(1, 2));
        assert_eq!(h.mul(&h).unwrap(), HahnElt::t(&f));
        let x = HahnElt::from_terms(&f, [(r(1, 3), f.from_int(2))], Some(r(4, 1)));
        assert_eq!(x.add(&HahnElt::zero(&f)).unwrap(), x);

        let f2 = FqField::prime_field(2).unwrap();
        let one_t = HahnElt::one(&f2).add(&HahnElt::t(&f2)).unwrap();
        let s = one_t.add(&one_t).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.v_f(), Valuation::Infinite);
        let y = one_t.truncate(&r(5, 1));
        let z = y.add(&y).unwrap();
        assert_eq!(z.v_f(), Valuation::AtLeast(r(5, 1)));
        assert_eq!(z.to_string(), "0 + O(t^5)");
    }

    #[test]
    fn product_cap_rule() {
        let f = FqField::prime_field(5).unwrap();
        // (t + O(t^3)) * (t^(1/2) + O(t^2)) -> cap min(3 + 1/2, 2 + 1) = 3
        let a = HahnElt::t(&f).truncate(&r(3, 1));
        let b = HahnElt::t_pow(&f, r(1, 2)).truncate(&r(2, 1));
        assert_eq!(a.mul(&b).unwrap().cap(), Some(&r(3, 1)));
    }

    #[test]
    fn field_mismatch() {
        let a = HahnElt::t(&FqField::prime_field(5).unwrap());
        let b = HahnElt::t(&FqField::prime_field(3).unwrap());
        assert!(matches!(a.add(&b), Err(Error::Usage(_))));
    }

    #[test]
    fn frobenius_examples() {
        let f = FqField::prime_field(5).unwrap();
        let t = HahnElt::t(&f);
        assert_eq!(t.frobenius(1), HahnElt::t_pow(&f, r(5, 1)));
        assert_eq!(t.frobenius(0), t);
        let x = HahnElt::t_pow(&f, r(1, 4)).add(&HahnElt::t_pow(&f, r(2, 1))).unwrap();
        let y = HahnElt::t_pow(&f, r(1, 20)).add(&HahnElt::t_pow(&f, r(2, 5))).unwrap();
        assert_eq!(x.frobenius(-1), y);
    }

    #[test]
    fn monomial_roots() {
        let f = FqField::prime_field(3).unwrap();
        let t = HahnElt::t(&f);
        assert_eq!(t.monomial_root(&r(1, 4)).unwrap(), HahnElt::t_pow(&f, r(1, 4)));
        assert_eq!(t.monomial_root(&Rat::one()).unwrap(), t);
        assert_eq!(HahnElt::t_pow(&f, r(1, 2)).monomial_root(&r(2, 1)).unwrap(), t);
        let two_t = t.scale(&f.from_int(2));
        assert!(matches!(two_t.monomial_root(&r(1, 2)), Err(Error::UnsupportedRoot(_))));
        let sum = t.add(&HahnElt::one(&f)).unwrap();
        assert!(matches!(sum.monomial_root(&r(1, 2)), Err(Error::UnsupportedRoot(_))));
    }

    #[test]
    fn automorphisms() {
        let f = FqField::new(5, 2).unwrap();
        let t = HahnElt::t(&f);
        let id = TiltAut::identity();
        assert_eq!(id.apply(&t), t);
        assert_eq!(TiltAut::frobenius_power(1).apply(&HahnElt::t_pow(&f, r(1, 3))), HahnElt::t_pow(&f, r(5, 3)));
        let g = f.generator();
        let a = HahnElt::from_terms(&f, [(r(1, 2), g.clone()), (r(3, 2), f.one())], None);
        for sigma in [TiltAut::frobenius_power(1), TiltAut::coefficient_galois(1), TiltAut { frob: -2, coeff: 3 }] {
            let lhs = sigma.apply(&a.mul(&a).unwrap());
            let rhs = sigma.apply(&a);
            assert_eq!(lhs, rhs.mul(&rhs).unwrap());
        }
        let gal = TiltAut::coefficient_galois(1);
        assert_eq!(gal.apply(&a).v_f(), a.v_f());
        assert!(gal.compose(&gal).is_identity(2));
    }
}
