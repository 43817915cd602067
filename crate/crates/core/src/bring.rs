//! Finite Teichmüller sums `Σ p^m [x_m]` in the Fargues-Fontaine ring `B`,
//! with exact ρ-norm exponents and sound tail bounds.
//!
//! Norms are carried as exponents `s = -log_p |z|_ρ` with `ρ = p^{-r}`. For a
//! Teichmüller expansion with distinct `m`, `s_r(z) = min_m (m·r + v_F(x_m))`.
//! Whatever is not represented explicitly is bounded by a tail: a list of
//! affine pieces `(a, b)` guaranteeing `s_r(rest) ≥ min (a·r + b)` for every
//! `r` in `[0, R]`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::padic::rational_to_padic;
use crate::numkit::{big_pow, int_valuation, teichmuller_digits, FqField, Rat};
use crate::tilt::{HahnElt, HahnRing, Valuation};
use crate::witt::{teichmuller, witt_add, witt_neg, CoeffRing};

/// Affine lower bound `s ≥ slope·r + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TailPiece {
    pub slope: Rat,
    pub intercept: Rat,
}

impl TailPiece {
    pub fn new(slope: impl Into<Rat>, intercept: Rat) -> Self {
        TailPiece { slope: slope.into(), intercept }
    }

    pub fn at(&self, r: &Rat) -> Rat {
        &self.slope * r + &self.intercept
    }
}

/// Norm exponent `s = -log_p |z|_ρ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "s", rename_all = "snake_case")]
pub enum NormExp {
    Exact(Rat),
    /// The norm exponent is at least this value.
    AtLeast(Rat),
    Infinite,
}

impl NormExp {
    pub fn exact(&self) -> Option<&Rat> {
        match self {
            NormExp::Exact(s) => Some(s),
            _ => None,
        }
    }

    pub fn lower_bound(&self) -> Option<&Rat> {
        match self {
            NormExp::Exact(s) | NormExp::AtLeast(s) => Some(s),
            NormExp::Infinite => None,
        }
    }

    /// `self ≥ x`, as far as the bound can tell.
    pub fn at_least(&self, x: &Rat) -> bool {
        self.lower_bound().is_none_or(|s| s >= x)
    }
}

impl fmt::Display for NormExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExp::Exact(s) => write!(f, "{s}"),
            NormExp::AtLeast(s) => write!(f, ">={s}"),
            NormExp::Infinite => write!(f, "inf"),
        }
    }
}

/// `ρ = p^{-r}` with `r ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rho {
    r: Rat,
}

impl Rho {
    pub fn new(r: Rat) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain(format!("rho exponent must be >= 0, got {r}")));
        }
        Ok(Rho { r })
    }

    pub fn r(&self) -> &Rat {
        &self.r
    }
}

/// `Σ p^m [x_m]` plus a tail bound valid for `r ∈ [0, range]`.
#[derive(Clone, PartialEq, Eq)]
pub struct BElt {
    p: u64,
    field: Arc<FqField>,
    terms: Vec<(i64, HahnElt)>,
    tail: Vec<TailPiece>,
    range: Option<Rat>,
}

impl BElt {
    pub fn zero(field: &Arc<FqField>) -> Self {
        BElt {
            p: field.characteristic(),
            field: field.clone(),
            terms: Vec::new(),
            tail: Vec::new(),
            range: None,
        }
    }

    /// `p^m [x]`, exact. The Hahn element must be exact.
    pub fn teich_term(m: i64, x: &HahnElt) -> Result<Self> {
        if !x.is_exact() {
            return Err(Error::Precision(format!("Teichmüller lift of inexact {x}")));
        }
        let mut z = Self::zero(x.field());
        if !x.is_zero() {
            z.terms.push((m, x.clone()));
        }
        Ok(z)
    }

    /// `[x]`.
    pub fn teich(x: &HahnElt) -> Result<Self> {
        Self::teich_term(0, x)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn terms(&self) -> &[(i64, HahnElt)] {
        &self.terms
    }

    pub fn tail(&self) -> &[TailPiece] {
        &self.tail
    }

    pub fn range(&self) -> Option<&Rat> {
        self.range.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.tail.is_empty()
    }

    /// Exactly zero: no terms and no tail.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.tail.is_empty()
    }

    /// Minimum of the explicit terms at `r`.
    pub fn explicit_at(&self, r: &Rat) -> Option<Rat> {
        self.terms
            .iter()
            .map(|(m, x)| r * *m + x.valuation().expect("terms are nonzero and exact"))
            .min()
    }

    /// Tail lower bound at `r`.
    pub fn tail_at(&self, r: &Rat) -> Result<Option<Rat>> {
        if self.tail.is_empty() {
            return Ok(None);
        }
        if let Some(range) = &self.range {
            if r > range {
                return Err(Error::Range(format!(
                    "tail bound valid for r in [0, {range}], queried r = {r}"
                )));
            }
        }
        Ok(self.tail.iter().map(|t| t.at(r)).min())
    }

    /// Lower envelope of the whole element: explicit terms and tail.
    fn envelope(&self) -> Vec<TailPiece> {
        let mut v: Vec<TailPiece> = self
            .terms
            .iter()
            .map(|(m, x)| TailPiece::new(*m, x.valuation().expect("nonzero term")))
            .collect();
        v.extend(self.tail.iter().cloned());
        v
    }

    /// Multiply by `p^k` (shift every p-exponent).
    pub fn shift(&self, k: i64) -> Self {
        let mut z = self.clone();
        for (m, _) in z.terms.iter_mut() {
            *m += k;
        }
        for t in z.tail.iter_mut() {
            t.slope = &t.slope + k;
        }
        z
    }

    /// `p·z`.
    pub fn times_p(&self) -> Self {
        self.shift(1)
    }
}

/// `s_r(z)`: exact when the explicit minimum lies strictly below the tail.
pub fn norm_exp(z: &BElt, rho: &Rho) -> Result<NormExp> {
    let r = rho.r();
    let explicit = z.explicit_at(r);
    let tail = z.tail_at(r)?;
    Ok(match (explicit, tail) {
        (None, None) => NormExp::Infinite,
        (Some(e), None) => NormExp::Exact(e),
        (None, Some(t)) => NormExp::AtLeast(t),
        (Some(e), Some(t)) => {
            if e < t {
                NormExp::Exact(e)
            } else {
                NormExp::AtLeast(t)
            }
        }
    })
}

/// `φ`: `[x] ↦ [x^p]` termwise; a tail piece `(a, b)` becomes `(a, p·b)`.
pub fn phi(z: &BElt) -> BElt {
    let p = Rat::int(z.p as i64);
    BElt {
        p: z.p,
        field: z.field.clone(),
        terms: z.terms.iter().map(|(m, x)| (*m, x.frobenius(1))).collect(),
        tail: z
            .tail
            .iter()
            .map(|t| TailPiece { slope: t.slope.clone(), intercept: &t.intercept * &p })
            .collect(),
        range: z.range.clone(),
    }
}

/// `v_{K_j}` of the image of `z` at the point `[a^{j²}] - p`:
/// `min (m·j²·v_F(a) + v_F(x_m))`.
pub fn eta_valuation(v_a: &Rat, j: i64, z: &BElt) -> Result<NormExp> {
    if !v_a.is_positive() {
        return Err(Error::Domain(format!("v_F(a) must be positive, got {v_a}")));
    }
    norm_exp(z, &Rho::new(v_a * (j * j))?)
}

/// Arithmetic context for B-elements.
#[derive(Clone, Debug)]
pub struct BRing {
    pub p: u64,
    pub field: Arc<FqField>,
    /// Witt length used for carries.
    pub witt_len: usize,
    /// Exponent cap `E` on Hahn coefficients at `m ≤ 0`; at `m > 0` the cap
    /// is `E/p^m`. Dropped parts go to the tail.
    pub hahn_cap: Option<Rat>,
    /// Terms with larger p-exponent are moved into the tail.
    pub m_hi: i64,
    /// Tail bounds are valid for `r ∈ [0, r_max]`.
    pub r_max: Rat,
    /// Number of explicit tail pieces emitted for a truncated coefficient.
    pub teich_depth: usize,
    /// Teichmüller digits kept when multiplying by a p-adic scalar.
    pub digits: u32,
}

const MAX_PIECES: usize = 24;

impl BRing {
    pub fn new(field: Arc<FqField>, witt_len: usize) -> Self {
        let p = field.characteristic();
        BRing {
            p,
            field,
            witt_len,
            hahn_cap: Some(Rat::int(6)),
            m_hi: witt_len as i64 + 2,
            r_max: Rat::int(2),
            teich_depth: witt_len + 1,
            digits: witt_len as u32,
        }
    }

    pub fn with_hahn_cap(mut self, cap: Option<Rat>) -> Self {
        self.hahn_cap = cap;
        self
    }

    pub fn with_range(mut self, r_max: Rat) -> Self {
        self.r_max = r_max;
        self
    }

    fn cap_at(&self, m: i64) -> Option<Rat> {
        let e = self.hahn_cap.as_ref()?;
        Some(e / Rat::int(big_pow(self.p, m.max(0) as u32)))
    }

    // Working ring for carries out of level m: component i is rooted by p^i
    // and lands at level m+i, where the cap is smaller by the same factor.
    fn hahn_at(&self, m: i64) -> HahnRing {
        HahnRing::new(self.field.clone(), self.cap_at(m))
    }

    fn check(&self, z: &BElt) -> Result<()> {
        if z.p != self.p || *z.field != *self.field {
            return Err(Error::Usage(format!(
                "B-element over F_{}^{} used in ring over F_{}^{}",
                z.p,
                z.field.degree(),
                self.p,
                self.field.degree()
            )));
        }
        Ok(())
    }

    /// Split a possibly truncated coefficient of `p^m` into its exact known
    /// part and tail pieces for the dropped part.
    ///
    /// With `x = a + b`, `v(a) ≥ -N`, `v(b) ≥ c`, the difference `[x] - [a]`
    /// has Teichmüller coordinates of valuation `≥ (c+N)/p^i - N`.
    fn absorb(&self, m: i64, x: HahnElt, tail: &mut Vec<TailPiece>) -> Option<HahnElt> {
        let x = match self.cap_at(m) {
            Some(c) => {
                let inside = x.terms().last().is_none_or(|(e, _)| *e < c);
                if x.is_exact() && inside {
                    x
                } else {
                    x.truncate(&c)
                }
            }
            None => x,
        };
        let Some(c) = x.cap().cloned() else {
            return if x.is_zero() { None } else { Some(x) };
        };
        let known = HahnElt::from_terms(x.field(), x.terms().iter().cloned(), None);
        let lowest = match known.v_f() {
            Valuation::Finite(v) => v.min(c.clone()),
            _ => c.clone(),
        };
        let n = if lowest.is_negative() { Rat::int(-lowest.floor()) } else { Rat::zero() };
        let p = Rat::int(self.p as i64);
        let mut scale = Rat::one();
        for i in 0..self.teich_depth {
            tail.push(TailPiece::new(m + i as i64, (&c + &n) / &scale - &n));
            scale = &scale * &p;
        }
        tail.push(TailPiece::new(m + self.teich_depth as i64, -n));
        if known.is_zero() {
            None
        } else {
            Some(known)
        }
    }

    fn finish(&self, terms: Vec<(i64, HahnElt)>, mut tail: Vec<TailPiece>) -> BElt {
        prune(&mut tail, &self.r_max);
        let range = if tail.is_empty() { None } else { Some(self.r_max.clone()) };
        BElt { p: self.p, field: self.field.clone(), terms, tail, range }
    }

    /// Normalize a multiset of `(m, x)` terms into a Teichmüller expansion,
    /// routing equal `m` through Witt addition of Teichmüller lifts.
    fn normalize(&self, raw: Vec<(i64, HahnElt)>, mut tail: Vec<TailPiece>) -> Result<BElt> {
        let mut buckets: BTreeMap<i64, Vec<HahnElt>> = BTreeMap::new();
        for (m, x) in raw {
            if let Some(x) = self.absorb(m, x, &mut tail) {
                buckets.entry(m).or_default().push(x);
            }
        }
        let mut out = Vec::new();
        while let Some((m, mut xs)) = buckets.pop_first() {
            let hahn = self.hahn_at(m);
            if m > self.m_hi {
                for x in xs {
                    tail.push(TailPiece::new(m, x.valuation()?));
                }
                continue;
            }
            while xs.len() >= 2 {
                let x = xs.pop().unwrap();
                let y = xs.pop().unwrap();
                let len = (self.witt_len as i64).min(self.m_hi - m + 1).max(1) as usize;
                let mu = x.valuation()?.min(y.valuation()?);
                let s = witt_add(
                    &hahn,
                    &teichmuller(&hahn, self.p, &x, len),
                    &teichmuller(&hahn, self.p, &y, len),
                )?;
                for (i, si) in s.comps.into_iter().enumerate() {
                    if hahn.is_zero(&si) {
                        continue;
                    }
                    let root = si.frobenius(-(i as i64));
                    let mi = m + i as i64;
                    if let Some(r) = self.absorb(mi, root, &mut tail) {
                        if i == 0 {
                            xs.push(r);
                        } else {
                            buckets.entry(mi).or_default().push(r);
                        }
                    }
                }
                tail.push(TailPiece::new(m + len as i64, mu));
            }
            if let Some(x) = xs.pop() {
                out.push((m, x));
            }
        }
        Ok(self.finish(out, tail))
    }

    pub fn add(&self, z: &BElt, w: &BElt) -> Result<BElt> {
        self.check(z)?;
        self.check(w)?;
        let raw: Vec<_> = z.terms.iter().chain(w.terms.iter()).cloned().collect();
        let tail: Vec<_> = z.tail.iter().chain(w.tail.iter()).cloned().collect();
        self.normalize(raw, tail)
    }

    pub fn mul(&self, z: &BElt, w: &BElt) -> Result<BElt> {
        self.check(z)?;
        self.check(w)?;
        let mut raw = Vec::with_capacity(z.terms.len() * w.terms.len());
        for (m, x) in &z.terms {
            for (k, y) in &w.terms {
                raw.push((m + k, x.mul(y)?));
            }
        }
        let mut tail = Vec::new();
        let (ez, ew) = (z.envelope(), w.envelope());
        for a in &z.tail {
            for b in &ew {
                tail.push(TailPiece { slope: &a.slope + &b.slope, intercept: &a.intercept + &b.intercept });
            }
        }
        for b in &w.tail {
            for a in &ez {
                tail.push(TailPiece { slope: &a.slope + &b.slope, intercept: &a.intercept + &b.intercept });
            }
        }
        self.normalize(raw, tail)
    }

    /// Multiply by the rational `num/den` viewed in `Q_p ⊂ B`: shift by its
    /// p-adic valuation and multiply by the Teichmüller digits of the unit
    /// part, bounding the omitted digits by the tail.
    pub fn scale_rational(&self, z: &BElt, num: i64, den: i64) -> Result<BElt> {
        self.check(z)?;
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        if num == 0 {
            return Ok(BElt::zero(&self.field));
        }
        let p = self.p;
        let (nb, db) = (BigInt::from(num), BigInt::from(den));
        let vn = int_valuation(&nb, p).unwrap() as i64;
        let vd = int_valuation(&db, p).unwrap() as i64;
        let un = &nb / big_pow(p, vn as u32);
        let ud = &db / big_pow(p, vd as u32);
        let nd = self.digits;
        let residue = rational_to_padic(&un, &ud, p, nd)?;
        let digits = teichmuller_digits(residue.residue(), p, nd);
        let exact = digit_sum_exact(&digits, p, &un, &ud);
        let mut raw = Vec::new();
        for (i, d) in digits.iter().enumerate() {
            if *d == 0 {
                continue;
            }
            let c = self.field.from_int(*d as i64);
            for (m, x) in &z.terms {
                raw.push((m + i as i64, x.scale(&c)));
            }
        }
        let mut tail: Vec<TailPiece> = Vec::new();
        for (i, d) in digits.iter().enumerate() {
            if *d != 0 {
                for t in &z.tail {
                    tail.push(TailPiece { slope: &t.slope + i as i64, intercept: t.intercept.clone() });
                }
            }
        }
        if !exact {
            for t in z.envelope() {
                tail.push(TailPiece { slope: &t.slope + nd as i64, intercept: t.intercept });
            }
        }
        Ok(self.normalize(raw, tail)?.shift(vn - vd))
    }

    pub fn neg(&self, z: &BElt) -> Result<BElt> {
        self.scale_rational(z, -1, 1)
    }

    pub fn sub(&self, z: &BElt, w: &BElt) -> Result<BElt> {
        self.add(z, &self.neg(w)?)
    }

    pub fn pow(&self, z: &BElt, e: u32) -> Result<BElt> {
        let mut acc = BElt::teich(&HahnElt::one(&self.field))?;
        for _ in 0..e {
            acc = self.mul(&acc, z)?;
        }
        Ok(acc)
    }

    /// `[ε] - 1`, from the Witt difference `(ε, 0, …) - (1, 0, …)`.
    ///
    /// Every coordinate of the difference lies in the ideal `(ε - 1)`, so
    /// the coordinates beyond the Witt length are bounded by the tail.
    pub fn teich_minus_one(&self, eps: &HahnElt) -> Result<BElt> {
        let one = HahnElt::one(&self.field);
        if !eps.is_exact() {
            return Err(Error::Precision(format!("1-unit {eps} must be exact")));
        }
        if *eps == one {
            return Ok(BElt::zero(&self.field));
        }
        let delta = match eps.sub(&one)?.v_f() {
            Valuation::Finite(d) if d.is_positive() => d,
            _ => return Err(Error::Domain(format!("{eps} is not a 1-unit"))),
        };
        let hahn = self.hahn_at(0);
        let n = self.witt_len;
        let minus_one = witt_neg(&hahn, &teichmuller(&hahn, self.p, &one, n))?;
        let diff = witt_add(&hahn, &teichmuller(&hahn, self.p, eps, n), &minus_one)?;
        let mut tail = Vec::new();
        let mut terms = Vec::new();
        for (i, ci) in diff.comps.into_iter().enumerate() {
            if hahn.is_zero(&ci) {
                continue;
            }
            if let Some(x) = self.absorb(i as i64, ci.frobenius(-(i as i64)), &mut tail) {
                terms.push((i as i64, x));
            }
        }
        let pn = Rat::int(big_pow(self.p, n as u32));
        tail.push(TailPiece::new(n as i64, &delta / &pn));
        tail.push(TailPiece::new(n as i64 + 1, Rat::zero()));
        Ok(self.finish(terms, tail))
    }

    /// `log[ε] = Σ_{k≥1} (-1)^{k+1} ([ε] - 1)^k / k`, explicit through `k = K`
    /// with a tail bound for the rest.
    pub fn log_teich(&self, eps: &HahnElt, k_terms: u32) -> Result<BElt> {
        if k_terms == 0 {
            return Err(Error::Domain("log needs at least one term".into()));
        }
        let x = self.teich_minus_one(eps)?;
        if x.is_zero() {
            return Ok(x);
        }
        let tail = log_tail(&x.envelope(), k_terms, self.p, &self.r_max)?;
        let mut acc = BElt::zero(&self.field);
        let mut power = x.clone();
        for k in 1..=k_terms {
            if k > 1 {
                power = self.mul(&power, &x)?;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let term = self.scale_rational(&power, sign, k as i64)?;
            acc = self.add(&acc, &term)?;
        }
        let mut pieces = acc.tail.clone();
        pieces.extend(tail);
        Ok(self.finish(acc.terms, pieces))
    }
}

// True when Σ p^i ω(d_i) equals un/ud exactly. That needs every ω(d_i) to be
// rational, i.e. a digit in {0, 1, p-1}.
fn digit_sum_exact(digits: &[u64], p: u64, un: &BigInt, ud: &BigInt) -> bool {
    let mut s = BigInt::zero();
    for (i, d) in digits.iter().enumerate() {
        let w = if *d == 0 {
            BigInt::zero()
        } else if *d == 1 {
            BigInt::one()
        } else if *d == p - 1 {
            BigInt::from(-1)
        } else {
            return false;
        };
        s += w * big_pow(p, i as u32);
    }
    s * ud == *un
}

fn floor_log(p: u64, k: u64) -> i64 {
    let mut e = 0;
    let mut q = p;
    while q <= k {
        e += 1;
        q *= p;
    }
    e
}

/// Lower envelope of `s(X^k/k)` over all `k > K` given the envelope of `X`.
///
/// `s(X^k/k) ≥ (k·a - v_p(k))·r + k·b` for each piece `(a, b)`, and
/// `v_p(k) ≤ floor(log_p k)`.
pub fn log_tail(env: &[TailPiece], k_terms: u32, p: u64, r_max: &Rat) -> Result<Vec<TailPiece>> {
    let k1 = k_terms as u64 + 1;
    let e1 = floor_log(p, k1);
    let mut out = Vec::new();
    for piece in env {
        let (a, b) = (&piece.slope, &piece.intercept);
        if !a.is_integer() || a.is_negative() || b.is_negative() {
            return Err(Error::Range(format!(
                "log series: cannot bound the tail from piece ({a}, {b})"
            )));
        }
        if a >= &Rat::one() {
            out.push(TailPiece {
                slope: a * (k1 as i64) - e1,
                intercept: b * (k1 as i64),
            });
            continue;
        }
        // a = 0: the series only converges thanks to b > 0
        if !b.is_positive() {
            return Err(Error::Range("log series diverges: [eps]-1 has a unit coordinate".into()));
        }
        let pm1 = Rat::int(p as i64 - 1);
        let mut e = e1;
        loop {
            let pe = Rat::int(big_pow(p, e as u32));
            let kk = pe.clone().max(Rat::int(k1 as i64));
            out.push(TailPiece { slope: Rat::int(-e), intercept: &kk * b });
            // once p^e(p-1)b ≥ R the piece for e bounds every larger e on [0, R]
            if pe >= Rat::int(k1 as i64) && &(&pe * &pm1) * b >= *r_max {
                break;
            }
            e += 1;
        }
    }
    Ok(out)
}

// Drop pieces that dominate another piece on the whole range, then merge
// if the list is still long.
fn prune(tail: &mut Vec<TailPiece>, r_max: &Rat) {
    tail.sort_by(|a, b| a.intercept.cmp(&b.intercept).then(a.slope.cmp(&b.slope)));
    tail.dedup();
    let mut keep: Vec<TailPiece> = Vec::new();
    for t in tail.drain(..) {
        let dominated = keep
            .iter()
            .any(|k| k.intercept <= t.intercept && k.at(r_max) <= t.at(r_max));
        if !dominated {
            keep.retain(|k| !(t.intercept <= k.intercept && t.at(r_max) <= k.at(r_max)));
            keep.push(t);
        }
    }
    while keep.len() > MAX_PIECES {
        let b = keep.pop().unwrap();
        let a = keep.pop().unwrap();
        keep.push(TailPiece {
            slope: a.slope.clone().min(b.slope.clone()),
            intercept: a.intercept.clone().min(b.intercept.clone()),
        });
    }
    *tail = keep;
}

/// Result of comparing `φ(log[ε])` with `p·log[ε]` at one `r`.
#[derive(Clone, Debug, Serialize)]
pub struct EigenCheck {
    pub r: Rat,
    /// Norm of `log[ε]` itself; the check only has teeth where this is exact
    /// and below the tail bound.
    pub log_norm: NormExp,
    pub difference: NormExp,
    pub tail_bound: Option<Rat>,
    pub holds: bool,
}

/// `φ(log[ε]) - p·log[ε]` has nothing explicit below its tail bound.
pub fn phi_eigen_check(ring: &BRing, eps: &HahnElt, k_terms: u32, rs: &[Rat]) -> Result<Vec<EigenCheck>> {
    let l = ring.log_teich(eps, k_terms)?;
    let d = ring.sub(&phi(&l), &l.times_p())?;
    let mut out = Vec::new();
    for r in rs {
        let difference = norm_exp(&d, &Rho::new(r.clone())?)?;
        let tail_bound = d.tail_at(r)?;
        let holds = !matches!(difference, NormExp::Exact(_));
        let log_norm = norm_exp(&l, &Rho::new(r.clone())?)?;
        out.push(EigenCheck { r: r.clone(), log_norm, difference, tail_bound, holds });
    }
    Ok(out)
}

impl fmt::Display for BElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (m, x)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "p^{m}*[{x}]")?;
        }
        if !self.tail.is_empty() {
            write!(f, " + T(")?;
            for (i, t) in self.tail.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}r+{}", t.slope, t.intercept)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize)]
struct TermJson<'a> {
    m: i64,
    x: &'a HahnElt,
}

impl Serialize for BElt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BElt", 4)?;
        st.serialize_field("p", &self.p)?;
        let terms: Vec<TermJson> = self.terms.iter().map(|(m, x)| TermJson { m: *m, x }).collect();
        st.serialize_field("terms", &terms)?;
        st.serialize_field("tail", &self.tail)?;
        st.serialize_field("range", &self.range)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn rho(n: i64, d: i64) -> Rho {
        Rho::new(r(n, d)).unwrap()
    }

    #[test]
    fn norm_examples() {
        let f = FqField::prime_field(3).unwrap();
        let ring = BRing::new(f.clone(), 3);
        let x = HahnElt::t_pow(&f, r(2, 3));
        let tx = BElt::teich(&x).unwrap();
        for q in [r(0, 1), r(1, 3), r(5, 2)] {
            assert_eq!(norm_exp(&tx, &Rho::new(q).unwrap()).unwrap(), NormExp::Exact(r(2, 3)));
        }
        let p1 = BElt::teich_term(1, &HahnElt::one(&f)).unwrap();
        assert_eq!(norm_exp(&p1, &rho(3, 7)).unwrap(), NormExp::Exact(r(3, 7)));
        let z = ring
            .add(
                &BElt::teich(&HahnElt::t_pow(&f, r(1, 2))).unwrap(),
                &BElt::teich_term(1, &HahnElt::t_pow(&f, r(1, 8))).unwrap(),
            )
            .unwrap();
        assert_eq!(norm_exp(&z, &rho(1, 2)).unwrap(), NormExp::Exact(r(1, 2)));
        assert_eq!(norm_exp(&BElt::zero(&f), &rho(1, 2)).unwrap(), NormExp::Infinite);
        assert!(Rho::new(r(-1, 2)).is_err());
    }

    #[test]
    fn teichmuller_multiplicative() {
        let f = FqField::prime_field(5).unwrap();
        let ring = BRing::new(f.clone(), 3);
        let x = HahnElt::t_pow(&f, r(1, 3)).scale(&f.from_int(2));
        let y = HahnElt::t_pow(&f, r(3, 4)).add(&HahnElt::t_pow(&f, r(2, 1))).unwrap();
        let prod = ring.mul(&BElt::teich(&x).unwrap(), &BElt::teich(&y).unwrap()).unwrap();
        assert_eq!(prod, BElt::teich(&x.mul(&y).unwrap()).unwrap());
        let s = norm_exp(&prod, &rho(1, 1)).unwrap();
        assert_eq!(s, NormExp::Exact(r(1, 3) + r(3, 4)));
    }

    #[test]
    fn phi_examples() {
        let f = FqField::prime_field(3).unwrap();
        let t = HahnElt::t(&f);
        let pt = phi(&BElt::teich(&t).unwrap());
        assert_eq!(pt, BElt::teich(&HahnElt::t_pow(&f, r(3, 1))).unwrap());
        assert_eq!(norm_exp(&pt, &rho(0, 1)).unwrap(), NormExp::Exact(r(3, 1)));
        let z = BElt::teich(&HahnElt::t_pow(&f, r(1, 2))).unwrap();
        assert_eq!(phi(&z.times_p()), phi(&z).times_p());
    }

    #[test]
    fn colliding_terms_carry() {
        // [1] + [1] = 2 in W(F_p); for p = 3, 2 = [2] + 3·(…)
        let f = FqField::prime_field(3).unwrap();
        let ring = BRing::new(f.clone(), 3);
        let one = BElt::teich(&HahnElt::one(&f)).unwrap();
        let two = ring.add(&one, &one).unwrap();
        assert_eq!(two.terms()[0], (0, HahnElt::constant(f.from_int(2))));
        let direct = ring.scale_rational(&one, 2, 1).unwrap();
        assert_eq!(direct.terms(), two.terms());
    }

    #[test]
    fn negation_cancels() {
        let f = FqField::prime_field(3).unwrap();
        let ring = BRing::new(f.clone(), 3);
        let x = HahnElt::t_pow(&f, r(1, 2)).add(&HahnElt::t_pow(&f, r(3, 2))).unwrap();
        let z = BElt::teich(&x).unwrap();
        let d = ring.sub(&z, &z).unwrap();
        assert!(d.terms().is_empty(), "{d}");
    }

    #[test]
    fn teich_minus_one_components() {
        let f = FqField::prime_field(2).unwrap();
        let ring = BRing::new(f.clone(), 2).with_hahn_cap(None);
        assert!(ring.teich_minus_one(&HahnElt::one(&f)).unwrap().is_zero());
        let eps = HahnElt::one(&f).add(&HahnElt::t_pow(&f, r(1, 2))).unwrap();
        let x = ring.teich_minus_one(&eps).unwrap();
        assert_eq!(x.terms()[0], (0, eps.sub(&HahnElt::one(&f)).unwrap()));
        // at p = 2, -(1, 0) = (1, 1) and S_1 = X1 + Y1 - X0*Y0 gives 1 - eps
        let c1 = HahnElt::one(&f).sub(&eps).unwrap();
        assert_eq!(x.terms()[1], (1, c1.frobenius(-1)));
        assert!(ring.teich_minus_one(&HahnElt::t(&f)).is_err());
    }

    #[test]
    fn log_leading_term() {
        let f = FqField::prime_field(3).unwrap();
        let ring = BRing::new(f.clone(), 3);
        let eps = HahnElt::one(&f).add(&HahnElt::t_pow(&f, r(1, 3))).unwrap();
        let l = ring.log_teich(&eps, 6).unwrap();
        assert_eq!(norm_exp(&l, &rho(1, 2)).unwrap(), NormExp::Exact(r(1, 3)));
        assert!(ring.log_teich(&HahnElt::one(&f), 6).unwrap().is_zero());
    }

    #[test]
    fn phi_equals_p_on_log() {
        for p in [2u64, 3] {
            let f = FqField::prime_field(p).unwrap();
            let ring = BRing::new(f.clone(), 3);
            let eps = HahnElt::one(&f)
                .add(&HahnElt::t_pow(&f, r(1, 4)))
                .unwrap()
                .add(&HahnElt::t_pow(&f, r(2, 3)))
                .unwrap();
            let checks = phi_eigen_check(&ring, &eps, 8, &[r(1, 4), r(1, 2), r(1, 1), r(2, 1)]).unwrap();
            for c in &checks {
                assert!(c.holds, "p={p}: {c:?}");
            }
        }
    }

    #[test]
    fn eta_examples() {
        let f = FqField::prime_field(5).unwrap();
        let x = HahnElt::t_pow(&f, r(2, 7));
        let z = BElt::teich(&x).unwrap();
        for j in 1..=3 {
            assert_eq!(eta_valuation(&r(1, 4), j, &z).unwrap(), NormExp::Exact(r(2, 7)));
        }
        let p1 = BElt::teich_term(1, &HahnElt::one(&f)).unwrap();
        assert_eq!(eta_valuation(&r(1, 4), 2, &p1).unwrap(), NormExp::Exact(Rat::one()));
        assert_eq!(eta_valuation(&r(1, 4), 2, &BElt::zero(&f)).unwrap(), NormExp::Infinite);
        assert!(eta_valuation(&Rat::zero(), 1, &z).is_err());
    }

    #[test]
    fn range_is_enforced() {
        let f = FqField::prime_field(3).unwrap();
        let ring = BRing::new(f.clone(), 3);
        let eps = HahnElt::one(&f).add(&HahnElt::t_pow(&f, r(1, 2))).unwrap();
        let l = ring.log_teich(&eps, 4).unwrap();
        assert!(matches!(norm_exp(&l, &rho(3, 1)), Err(Error::Range(_))));
    }
}
