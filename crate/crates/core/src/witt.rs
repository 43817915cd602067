//! p-typical Witt vectors of finite length over a pluggable coefficient ring.
//!
//! The universal sum, product and negation polynomials are solved from the
//! ghost identities `w_m(S) = w_m(X) + w_m(Y)` etc., with
//! `w_m = Σ_{i≤m} p^i X_i^{p^{m-i}}`. Each division by `p^m` is checked to be
//! exact over the integers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numkit::{big_pow, is_prime, FqElt, FqField};
use crate::tilt::{HahnElt, HahnRing};

/// Default cap on the Witt length.
pub const DEFAULT_MAX_LEN: usize = 4;

/// Sparse integer polynomial in a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, BigInt::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c);
        }
        r
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut r = Self::zero(self.nvars);
        if k.is_zero() {
            return r;
        }
        for (e, c) in &self.terms {
            r.terms.insert(e.clone(), c * k);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::constant(self.nvars, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division by an integer; `None` if some coefficient is not divisible.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let (q, rem) = c.div_rem(d);
            if !rem.is_zero() {
                return None;
            }
            r.terms.insert(e.clone(), q);
        }
        Some(r)
    }

    pub fn eval_int(&self, vals: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (v, k) in vals.iter().zip(e) {
                if *k > 0 {
                    m *= num_traits::pow(v.clone(), *k as usize);
                }
            }
            acc += m;
        }
        acc
    }

    /// Evaluate in a coefficient ring, skipping monomials that contain a
    /// zero variable.
    pub fn eval<R: CoeffRing>(&self, ring: &R, vals: &[R::Elt]) -> Result<R::Elt> {
        let zero_var: Vec<bool> = vals.iter().map(|v| ring.is_zero(v)).collect();
        let mut max_deg = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            if e.iter().zip(&zero_var).any(|(k, z)| *k > 0 && *z) {
                continue;
            }
            for (m, k) in max_deg.iter_mut().zip(e) {
                *m = (*m).max(*k);
            }
        }
        let mut powers: Vec<Vec<R::Elt>> = Vec::with_capacity(self.nvars);
        for (i, d) in max_deg.iter().enumerate() {
            let mut pw = vec![ring.one()];
            for k in 1..=*d as usize {
                let next = ring.mul(&pw[k - 1], &vals[i])?;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = ring.zero();
        for (e, c) in &self.terms {
            if e.iter().zip(&zero_var).any(|(k, z)| *k > 0 && *z) {
                continue;
            }
            let coeff = ring.from_integer(c);
            if ring.is_zero(&coeff) {
                continue;
            }
            let mut m = coeff;
            for (i, k) in e.iter().enumerate() {
                if *k > 0 {
                    m = ring.mul(&m, &powers[i][*k as usize])?;
                }
            }
            acc = ring.add(&acc, &m)?;
        }
        Ok(acc)
    }

    /// Render with the given variable names, lowest degree first.
    pub fn render(&self, names: &[String]) -> String {
        let mut items: Vec<(&Vec<u32>, &BigInt)> = self.terms.iter().collect();
        items.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        if items.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in items.iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(v, k)| if *k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) })
                .collect();
            let mag = c.abs();
            let body = if mono.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                mono.join("*")
            } else {
                format!("{}*{}", mag, mono.join("*"))
            };
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

/// Ghost component `w_m` on the variables `offset..offset+m+1`.
fn ghost_poly(p: u64, m: usize, nvars: usize, offset: usize) -> Poly {
    let mut w = Poly::zero(nvars);
    for i in 0..=m {
        let xi = Poly::var(nvars, offset + i);
        let e = p.pow((m - i) as u32);
        w = w.add(&xi.pow(e).scale(&big_pow(p, i as u32)));
    }
    w
}

/// Solve `w_m(Q) = target_m` for `Q_0, Q_1, …` recursively.
fn solve_ghost(p: u64, targets: &[Poly]) -> Result<Vec<Poly>> {
    let mut out: Vec<Poly> = Vec::with_capacity(targets.len());
    for (m, target) in targets.iter().enumerate() {
        let mut rest = target.clone();
        for (i, q) in out.iter().enumerate() {
            let e = p.pow((m - i) as u32);
            rest = rest.sub(&q.pow(e).scale(&big_pow(p, i as u32)));
        }
        let q = rest.div_exact(&big_pow(p, m as u32)).ok_or_else(|| {
            Error::Consistency(format!("ghost recursion not integral at p={p}, m={m}"))
        })?;
        out.push(q);
    }
    Ok(out)
}

/// Universal polynomials for length-n Witt vectors.
///
/// Variables `0..n` are `X_0..X_{n-1}` and `n..2n` are `Y_0..Y_{n-1}`; the
/// negation polynomials use only the `X` block.
#[derive(Clone, Debug)]
pub struct WittPolySet {
    pub p: u64,
    pub n: usize,
    pub sum: Vec<Poly>,
    pub prod: Vec<Poly>,
    pub neg: Vec<Poly>,
}

impl WittPolySet {
    pub fn var_names(&self) -> Vec<String> {
        (0..self.n)
            .map(|i| format!("X{i}"))
            .chain((0..self.n).map(|i| format!("Y{i}")))
            .collect()
    }
}

pub fn derive_witt_polys_capped(p: u64, n: usize, max_len: usize) -> Result<WittPolySet> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if n == 0 || n > max_len {
        return Err(Error::Range(format!("Witt length must be in 1..={max_len}, got {n}")));
    }
    let nv = 2 * n;
    let wx: Vec<Poly> = (0..n).map(|m| ghost_poly(p, m, nv, 0)).collect();
    let wy: Vec<Poly> = (0..n).map(|m| ghost_poly(p, m, nv, n)).collect();
    let sum_t: Vec<Poly> = wx.iter().zip(&wy).map(|(a, b)| a.add(b)).collect();
    let prod_t: Vec<Poly> = wx.iter().zip(&wy).map(|(a, b)| a.mul(b)).collect();
    let neg_t: Vec<Poly> = wx.iter().map(|a| a.scale(&BigInt::from(-1))).collect();
    Ok(WittPolySet {
        p,
        n,
        sum: solve_ghost(p, &sum_t)?,
        prod: solve_ghost(p, &prod_t)?,
        neg: solve_ghost(p, &neg_t)?,
    })
}

pub fn derive_witt_polys(p: u64, n: usize) -> Result<WittPolySet> {
    derive_witt_polys_capped(p, n, DEFAULT_MAX_LEN)
}

type Cache = RwLock<HashMap<(u64, usize), Arc<WittPolySet>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached polynomial set for `(p, n)`; derived on first use.
pub fn witt_polys(p: u64, n: usize) -> Result<Arc<WittPolySet>> {
    if let Some(s) = cache().read().expect("witt cache poisoned").get(&(p, n)) {
        return Ok(s.clone());
    }
    let set = Arc::new(derive_witt_polys(p, n)?);
    let mut w = cache().write().expect("witt cache poisoned");
    Ok(w.entry((p, n)).or_insert(set).clone())
}

/// A commutative coefficient ring for Witt vectors.
pub trait CoeffRing {
    type Elt: Clone + PartialEq;
    fn zero(&self) -> Self::Elt;
    fn one(&self) -> Self::Elt;
    fn from_integer(&self, n: &BigInt) -> Self::Elt;
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Result<Self::Elt>;
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Result<Self::Elt>;
    fn neg(&self, a: &Self::Elt) -> Self::Elt;
    fn is_zero(&self, a: &Self::Elt) -> bool;
}

/// The integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Integers;

impl CoeffRing for Integers {
    type Elt = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_integer(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> Result<BigInt> {
        Ok(a + b)
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> Result<BigInt> {
        Ok(a * b)
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
}

/// A finite field `F_{p^k}`.
#[derive(Clone, Debug)]
pub struct FiniteField(pub Arc<FqField>);

impl CoeffRing for FiniteField {
    type Elt = FqElt;
    fn zero(&self) -> FqElt {
        self.0.zero()
    }
    fn one(&self) -> FqElt {
        self.0.one()
    }
    fn from_integer(&self, n: &BigInt) -> FqElt {
        let p = BigInt::from(self.0.characteristic());
        self.0.from_int(n.mod_floor(&p).to_i64().expect("residue fits"))
    }
    fn add(&self, a: &FqElt, b: &FqElt) -> Result<FqElt> {
        Ok(a.add(b))
    }
    fn mul(&self, a: &FqElt, b: &FqElt) -> Result<FqElt> {
        Ok(a.mul(b))
    }
    fn neg(&self, a: &FqElt) -> FqElt {
        a.neg()
    }
    fn is_zero(&self, a: &FqElt) -> bool {
        a.is_zero()
    }
}

impl CoeffRing for HahnRing {
    type Elt = HahnElt;
    fn zero(&self) -> HahnElt {
        HahnElt::zero(&self.field)
    }
    fn one(&self) -> HahnElt {
        HahnElt::one(&self.field)
    }
    fn from_integer(&self, n: &BigInt) -> HahnElt {
        HahnElt::constant(FiniteField(self.field.clone()).from_integer(n))
    }
    fn add(&self, a: &HahnElt, b: &HahnElt) -> Result<HahnElt> {
        Ok(self.clip(a.add(b)?))
    }
    fn mul(&self, a: &HahnElt, b: &HahnElt) -> Result<HahnElt> {
        Ok(self.clip(a.mul(b)?))
    }
    fn neg(&self, a: &HahnElt) -> HahnElt {
        a.neg()
    }
    fn is_zero(&self, a: &HahnElt) -> bool {
        // an inexact zero is not known to vanish, so it must still be carried
        a.is_zero() && a.is_exact()
    }
}

/// Length-n Witt vector with components in some coefficient ring.
#[derive(Clone, PartialEq, Eq)]
pub struct WittVec<E> {
    pub p: u64,
    pub comps: Vec<E>,
}

impl<E: fmt::Display> fmt::Display for WittVec<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<E: fmt::Display> fmt::Debug for WittVec<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<E: Clone> WittVec<E> {
    pub fn new(p: u64, comps: Vec<E>) -> Self {
        WittVec { p, comps }
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

pub fn witt_zero<R: CoeffRing>(ring: &R, p: u64, n: usize) -> WittVec<R::Elt> {
    WittVec::new(p, vec![ring.zero(); n])
}

/// `[x] = (x, 0, …, 0)`.
pub fn teichmuller<R: CoeffRing>(ring: &R, p: u64, x: &R::Elt, n: usize) -> WittVec<R::Elt> {
    let mut comps = vec![ring.zero(); n];
    if n > 0 {
        comps[0] = x.clone();
    }
    WittVec::new(p, comps)
}

fn check_shape<E>(a: &WittVec<E>, b: &WittVec<E>) -> Result<()> {
    if a.p != b.p || a.comps.len() != b.comps.len() {
        return Err(Error::Usage(format!(
            "Witt shape mismatch: (p={}, n={}) vs (p={}, n={})",
            a.p,
            a.comps.len(),
            b.p,
            b.comps.len()
        )));
    }
    Ok(())
}

fn apply_binary<R: CoeffRing>(
    ring: &R,
    polys: &[Poly],
    a: &WittVec<R::Elt>,
    b: &WittVec<R::Elt>,
) -> Result<WittVec<R::Elt>> {
    let vals: Vec<R::Elt> = a.comps.iter().chain(b.comps.iter()).cloned().collect();
    let comps = polys.iter().map(|q| q.eval(ring, &vals)).collect::<Result<Vec<_>>>()?;
    Ok(WittVec::new(a.p, comps))
}

pub fn witt_add<R: CoeffRing>(ring: &R, a: &WittVec<R::Elt>, b: &WittVec<R::Elt>) -> Result<WittVec<R::Elt>> {
    check_shape(a, b)?;
    let set = witt_polys(a.p, a.len())?;
    apply_binary(ring, &set.sum, a, b)
}

pub fn witt_mul<R: CoeffRing>(ring: &R, a: &WittVec<R::Elt>, b: &WittVec<R::Elt>) -> Result<WittVec<R::Elt>> {
    check_shape(a, b)?;
    let set = witt_polys(a.p, a.len())?;
    apply_binary(ring, &set.prod, a, b)
}

pub fn witt_neg<R: CoeffRing>(ring: &R, a: &WittVec<R::Elt>) -> Result<WittVec<R::Elt>> {
    let set = witt_polys(a.p, a.len())?;
    let mut vals = a.comps.clone();
    vals.extend(std::iter::repeat_n(ring.zero(), a.len()));
    let comps = set.neg.iter().map(|q| q.eval(ring, &vals)).collect::<Result<Vec<_>>>()?;
    Ok(WittVec::new(a.p, comps))
}

pub fn witt_sub<R: CoeffRing>(ring: &R, a: &WittVec<R::Elt>, b: &WittVec<R::Elt>) -> Result<WittVec<R::Elt>> {
    witt_add(ring, a, &witt_neg(ring, b)?)
}

/// Ghost vector of an integer Witt vector.
pub fn ghost(a: &WittVec<BigInt>) -> Vec<BigInt> {
    let n = a.len();
    (0..n)
        .map(|m| {
            (0..=m)
                .map(|i| big_pow(a.p, i as u32) * num_traits::pow(a.comps[i].clone(), a.p.pow((m - i) as u32) as usize))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|x| BigInt::from(*x)).collect()
    }

    #[test]
    fn sum_polys_low_degree() {
        let set = derive_witt_polys(2, 2).unwrap();
        let names = set.var_names();
        assert_eq!(set.sum[0].render(&names), "X0 + Y0");
        assert_eq!(set.sum[1].render(&names), "X1 + Y1 - X0*Y0");

        for p in [3u64, 5] {
            let set = derive_witt_polys(p, 2).unwrap();
            let nv = 4;
            let x0 = Poly::var(nv, 0);
            let y0 = Poly::var(nv, 2);
            let corr = x0.pow(p).add(&y0.pow(p)).sub(&x0.add(&y0).pow(p));
            let expected = Poly::var(nv, 1)
                .add(&Poly::var(nv, 3))
                .add(&corr.div_exact(&BigInt::from(p)).unwrap());
            assert_eq!(set.sum[1], expected);
        }
    }

    #[test]
    fn length_cap() {
        assert!(matches!(derive_witt_polys(2, 5), Err(Error::Range(_))));
        assert!(matches!(derive_witt_polys(4, 2), Err(Error::Domain(_))));
        assert!(derive_witt_polys_capped(2, 5, 5).is_ok());
    }

    #[test]
    fn ghost_examples() {
        let a = WittVec::new(3, ints(&[2, 0, 0]));
        assert_eq!(ghost(&a), ints(&[2, 8, 512]));
        assert_eq!(ghost(&WittVec::new(3, ints(&[0, 0, 0]))), ints(&[0, 0, 0]));
    }

    #[test]
    fn ghost_oracle_over_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [2u64, 3, 5] {
            for n in 1..=3 {
                for _ in 0..20 {
                    let a = WittVec::new(p, (0..n).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect());
                    let b = WittVec::new(p, (0..n).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect());
                    let (ga, gb) = (ghost(&a), ghost(&b));
                    let s = witt_add(&Integers, &a, &b).unwrap();
                    let m = witt_mul(&Integers, &a, &b).unwrap();
                    let ng = witt_neg(&Integers, &a).unwrap();
                    for i in 0..n {
                        assert_eq!(ghost(&s)[i], &ga[i] + &gb[i]);
                        assert_eq!(ghost(&m)[i], &ga[i] * &gb[i]);
                        assert_eq!(ghost(&ng)[i], -&ga[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn teichmuller_laws() {
        let f = FiniteField(FqField::new(3, 2).unwrap());
        let g = f.0.generator();
        let zero = teichmuller(&f, 3, &f.zero(), 3);
        assert_eq!(zero, witt_zero(&f, 3, 3));
        let one = teichmuller(&f, 3, &f.one(), 3);
        let a = WittVec::new(3, vec![g.clone(), f.one(), g.mul(&g)]);
        assert_eq!(witt_mul(&f, &one, &a).unwrap(), a);
        assert_eq!(witt_add(&f, &a, &zero).unwrap(), a);
        let x = teichmuller(&f, 3, &g, 3);
        let y = teichmuller(&f, 3, &g.pow(5).unwrap(), 3);
        let xy = teichmuller(&f, 3, &g.pow(6).unwrap(), 3);
        assert_eq!(witt_mul(&f, &x, &y).unwrap(), xy);
    }

    #[test]
    fn x_plus_minus_x_has_zero_ghost() {
        for p in [2u64, 3, 5] {
            let x = teichmuller(&Integers, p, &BigInt::from(7), 3);
            let mx = teichmuller(&Integers, p, &BigInt::from(-7), 3);
            // at p = 2 the vector (-x, 0, ...) is not the additive inverse of [x]
            let mx = if p == 2 { witt_neg(&Integers, &x).unwrap() } else { mx };
            let s = witt_add(&Integers, &x, &mx).unwrap();
            assert!(ghost(&s).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn minus_one_at_two() {
        let f = FiniteField(FqField::prime_field(2).unwrap());
        let one = teichmuller(&f, 2, &f.one(), 3);
        let neg = witt_neg(&f, &one).unwrap();
        assert_eq!(neg.comps, vec![f.one(), f.one(), f.one()]);
    }

    #[test]
    fn shape_mismatch() {
        let a = WittVec::new(3, ints(&[1, 2]));
        let b = WittVec::new(3, ints(&[1, 2, 3]));
        assert!(matches!(witt_add(&Integers, &a, &b), Err(Error::Usage(_))));
    }
}
