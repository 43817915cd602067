//! Truncated power series over `Q` with p-integrality tracking: the
//! Lubin-Tate logarithm `Σ T^{p^n}/p^n`, its inverse, the Artin-Hasse
//! exponential, the formal group law, the p-adic logarithm on 1-units and
//! the log-link checks built on them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::ansatz::{scalar_valuation, SigmaPoint};
use crate::bring::{eta_valuation, BRing, NormExp};
use crate::error::{Error, Result};
use crate::numkit::padic::rational_to_padic;
use crate::numkit::{big_pow, int_valuation, PadicInt, Rat};
use crate::tilt::HahnElt;

/// `v_p` of a nonzero rational.
pub fn rat_valuation(x: &Rat, p: u64) -> Option<i64> {
    let n = int_valuation(x.numer(), p)? as i64;
    let d = int_valuation(x.denom(), p)? as i64;
    Some(n - d)
}

/// `Σ_{i ≤ D} c_i T^i + O(T^{D+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicSeries {
    p: u64,
    coeffs: Vec<Rat>,
}

impl PadicSeries {
    pub fn new(p: u64, degree: usize, coeffs: impl IntoIterator<Item = Rat>) -> Self {
        let mut c: Vec<Rat> = coeffs.into_iter().take(degree + 1).collect();
        c.resize(degree + 1, Rat::zero());
        PadicSeries { p, coeffs: c }
    }

    pub fn zero(p: u64, degree: usize) -> Self {
        Self::new(p, degree, [])
    }

    /// The series `T`.
    pub fn identity(p: u64, degree: usize) -> Self {
        Self::new(p, degree, [Rat::zero(), Rat::one()])
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    /// Degrees whose coefficient has negative p-adic valuation.
    pub fn non_integral_degrees(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&i| rat_valuation(&self.coeffs[i], self.p).is_some_and(|v| v < 0))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.non_integral_degrees().is_empty()
    }

    fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.degree() != o.degree() {
            return Err(Error::Domain(format!(
                "series mismatch: (p={}, D={}) vs (p={}, D={})",
                self.p,
                self.degree(),
                o.p,
                o.degree()
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let c = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b);
        Ok(Self::new(self.p, self.degree(), c))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let c = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b);
        Ok(Self::new(self.p, self.degree(), c))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let d = self.degree();
        let mut c = vec![Rat::zero(); d + 1];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in o.coeffs[..=d - i].iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += &(a * b);
                }
            }
        }
        Ok(Self::new(self.p, d, c))
    }

    /// `self(g(T))`; `g` must have zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.check_compatible(g)?;
        if !g.coeff(0).is_zero() {
            return Err(Error::Domain("inner series must have zero constant term".into()));
        }
        let d = self.degree();
        let mut acc = Self::zero(self.p, d);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g)?;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// `exp(self)` for `self(0) = 0`, from `n a_n = Σ_k k f_k a_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(Error::Domain("exp needs zero constant term".into()));
        }
        let d = self.degree();
        let mut a = vec![Rat::zero(); d + 1];
        a[0] = Rat::one();
        for n in 1..=d {
            let mut s = Rat::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    s += &(&self.coeffs[k] * &a[n - k] * Rat::int(k as i64));
                }
            }
            a[n] = s / Rat::int(n as i64);
        }
        Ok(Self::new(self.p, d, a))
    }

    /// `log(self)` for `self(0) = 1`, from `L' = A'/A`.
    pub fn log(&self) -> Result<Self> {
        if self.coeff(0) != Rat::one() {
            return Err(Error::Domain("log needs constant term 1".into()));
        }
        let d = self.degree();
        let a = &self.coeffs;
        let mut l = vec![Rat::zero(); d + 1];
        for n in 1..=d {
            let mut s = &a[n] * Rat::int(n as i64);
            for k in 1..n {
                if !l[k].is_zero() {
                    s -= &(&l[k] * &a[n - k] * Rat::int(k as i64));
                }
            }
            l[n] = s / Rat::int(n as i64);
        }
        Ok(Self::new(self.p, d, l))
    }
}

/// `Σ_{p^n ≤ D} T^{p^n}/p^n`.
pub fn lubin_tate_log(p: u64, degree: usize) -> Result<PadicSeries> {
    if degree < 1 {
        return Err(Error::Domain("truncation degree must be at least 1".into()));
    }
    let mut c = vec![Rat::zero(); degree + 1];
    let mut n = 0u32;
    loop {
        let pn = big_pow(p, n);
        let Some(i) = usize::try_from(&pn).ok().filter(|&i| i <= degree) else { break };
        c[i] = Rat::new(1, pn);
        n += 1;
    }
    Ok(PadicSeries::new(p, degree, c))
}

/// The `g` with `f(g(T)) = T + O(T^{D+1})`, solved degree by degree.
pub fn series_compositional_inverse(f: &PadicSeries) -> Result<PadicSeries> {
    if !f.coeff(0).is_zero() || f.coeff(1) != Rat::one() {
        return Err(Error::Domain("compositional inverse needs f = T + higher order".into()));
    }
    let d = f.degree();
    let mut g = PadicSeries::identity(f.p, d);
    for n in 2..=d {
        let r = f.compose(&g)?.coeff(n);
        g.coeffs[n] = -r;
    }
    Ok(g)
}

/// `exp(Σ T^{p^n}/p^n)`; every coefficient must be p-integral.
pub fn artin_hasse(p: u64, degree: usize) -> Result<PadicSeries> {
    let ah = lubin_tate_log(p, degree)?.exp()?;
    if let Some(i) = ah.non_integral_degrees().first() {
        return Err(Error::Consistency(format!(
            "Artin-Hasse coefficient at degree {i} is not {p}-integral: {}",
            ah.coeff(*i)
        )));
    }
    Ok(ah)
}

/// Bivariate series truncated in total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    p: u64,
    degree: usize,
    coeffs: BTreeMap<(usize, usize), Rat>,
}

impl BiSeries {
    pub fn zero(p: u64, degree: usize) -> Self {
        BiSeries { p, degree, coeffs: BTreeMap::new() }
    }

    /// `f(X)` (`in_y = false`) or `f(Y)`.
    pub fn from_univariate(f: &PadicSeries, in_y: bool) -> Self {
        let mut s = Self::zero(f.p, f.degree());
        for (i, c) in f.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let key = if in_y { (0, i) } else { (i, 0) };
            s.coeffs.insert(key, c.clone());
        }
        s
    }

    pub fn coeff(&self, i: usize, j: usize) -> Rat {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| rat_valuation(c, self.p).is_none_or(|v| v >= 0))
    }

    fn insert_add(&mut self, key: (usize, usize), c: Rat) {
        if key.0 + key.1 > self.degree || c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(key).or_insert_with(Rat::zero);
        *e += &c;
        if e.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (k, c) in &o.coeffs {
            s.insert_add(*k, c.clone());
        }
        s
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (k, c) in &o.coeffs {
            s.insert_add(*k, -c.clone());
        }
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut s = Self::zero(self.p, self.degree);
        for ((i, j), a) in &self.coeffs {
            for ((k, l), b) in &o.coeffs {
                s.insert_add((i + k, j + l), a * b);
            }
        }
        s
    }

    /// `f(self)` for `self` without constant term.
    pub fn substitute_into(&self, f: &PadicSeries) -> Result<Self> {
        if self.coeffs.contains_key(&(0, 0)) {
            return Err(Error::Domain("inner series must have zero constant term".into()));
        }
        let mut acc = Self::zero(self.p, self.degree);
        for c in f.coeffs.iter().rev() {
            acc = acc.mul(self);
            acc.insert_add((0, 0), c.clone());
        }
        Ok(acc)
    }
}

/// `F(X, Y) = exp_G(log_G X + log_G Y)`.
pub fn formal_group_law(p: u64, degree: usize) -> Result<BiSeries> {
    let lg = lubin_tate_log(p, degree)?;
    let eg = series_compositional_inverse(&lg)?;
    let sum = BiSeries::from_univariate(&lg, false).add(&BiSeries::from_univariate(&lg, true));
    sum.substitute_into(&eg)
}

fn floor_log(k: u64, p: u64) -> i64 {
    let (mut e, mut q) = (0, p);
    while q <= k {
        e += 1;
        q *= p;
    }
    e
}

/// `log(u) = Σ (-1)^{k+1} (u-1)^k / k` to precision `min(N, prec(u))`.
pub fn padic_log_unit(u: &PadicInt, n: u32) -> Result<PadicInt> {
    let p = u.prime();
    let prec = n.min(u.precision());
    let x = u.residue() - BigInt::one();
    let need = if p == 2 { 2 } else { 1 };
    let vx = int_valuation(&x, p).map_or(u.precision(), |v| v.min(u.precision()));
    if vx < need {
        return Err(Error::Domain(format!(
            "log needs v_p(u - 1) >= {need}, got {vx} for p={p}"
        )));
    }
    if x.is_zero() {
        return Ok(PadicInt::zero(p, prec));
    }
    let vx = vx as i64;
    let mut sum = Rat::zero();
    let mut xk = Rat::one();
    let mut k: i64 = 1;
    loop {
        // v((u-1)^k/k) ≥ k·v(x) - floor(log_p k), nondecreasing in k
        if k * vx - floor_log(k as u64, p) >= prec as i64 {
            break;
        }
        xk = xk * Rat::int(x.clone());
        let term = &xk / Rat::int(k);
        if k % 2 == 1 {
            sum += &term;
        } else {
            sum -= &term;
        }
        k += 1;
    }
    rational_to_padic(sum.numer(), sum.denom(), p, prec)
}

/// Valuation-level log-link between entries `j1` and `j2` of an ansatz
/// point.
#[derive(Clone, Debug, Serialize)]
pub struct LinkCheck {
    pub j1: i64,
    pub j2: i64,
    /// `v_p(log u)` for the scalar 1-unit `u`.
    pub scalar_log_valuation: Rat,
    pub scalar_in_j1: Rat,
    pub scalar_in_j2: Rat,
    /// `(j2/j1)²`.
    pub expected_ratio: Rat,
    pub ratio_holds: bool,
    /// `v_F(ε - 1)`, the same for every entry.
    pub tilt_valuation: Rat,
    pub eta_j1: NormExp,
    pub eta_j2: NormExp,
}

/// For `u = 1 + p·w` the valuation of `log u` read in `K_j` is
/// `v_p(log u)·j²·v_F(a)`; on the tilt side the element `ε` is shared and
/// `log[ε]` is evaluated at both entries.
pub fn valuation_link_check(
    ring: &BRing,
    point: &SigmaPoint,
    u: &PadicInt,
    eps: &HahnElt,
    j1: i64,
    j2: i64,
    log_terms: u32,
) -> Result<LinkCheck> {
    let lu = padic_log_unit(u, u.precision())?;
    let vlog = lu
        .valuation()
        .ok_or_else(|| Error::Precision(format!("log u vanishes to precision {}", u.precision())))?;
    let base = Rat::int(vlog as i64) * point.base_valuation();
    let s1 = scalar_valuation(point, &base, j1)?;
    let s2 = scalar_valuation(point, &base, j2)?;
    let expected_ratio = Rat::new(j2 * j2, j1 * j1);
    let ratio_holds = s2 == (&s1 * &expected_ratio);
    let one = HahnElt::one(&ring.field);
    let tilt_valuation = eps.sub(&one)?.valuation()?;
    let l = ring.log_teich(eps, log_terms)?;
    let va = point.base_valuation();
    Ok(LinkCheck {
        j1,
        j2,
        scalar_log_valuation: Rat::int(vlog as i64),
        scalar_in_j1: s1,
        scalar_in_j2: s2,
        expected_ratio,
        ratio_holds,
        tilt_valuation,
        eta_j1: eta_valuation(&va, j1, &l)?,
        eta_j2: eta_valuation(&va, j2, &l)?,
    })
}

/// Series-level identities of the log-link diagram.
#[derive(Clone, Debug, Serialize)]
pub struct DiagramReport {
    pub p: u64,
    pub degree: usize,
    /// `log(AH(T)) = log_G(T)`.
    pub ah_log_residual_zero: bool,
    /// Largest degree through which all Artin-Hasse coefficients are
    /// p-integral.
    pub ah_integral_degree: usize,
    /// `log_G(exp_G T) = T` and `exp_G(log_G T) = T`.
    pub inverse_identities: bool,
    /// `log_G(F(X, Y)) = log_G X + log_G Y`.
    pub additivity_residual_zero: bool,
    pub group_law_integral: bool,
    /// First coefficients of `F(X, Y)` rendered as `(i,j): c`.
    pub group_law_low_terms: Vec<String>,
}

pub fn diagram_check(p: u64, degree: usize) -> Result<DiagramReport> {
    let lg = lubin_tate_log(p, degree)?;
    let ah = lg.exp()?;
    let ah_integral_degree = ah.non_integral_degrees().first().map_or(degree, |i| i - 1);
    let ah_log_residual_zero = ah.log()?.sub(&lg)?.is_zero();
    let eg = series_compositional_inverse(&lg)?;
    let id = PadicSeries::identity(p, degree);
    let inverse_identities = lg.compose(&eg)? == id && eg.compose(&lg)? == id;
    let law = formal_group_law(p, degree)?;
    let lx = BiSeries::from_univariate(&lg, false);
    let ly = BiSeries::from_univariate(&lg, true);
    let additivity_residual_zero = law.substitute_into(&lg)?.sub(&lx.add(&ly)).is_zero();
    let group_law_low_terms = law
        .terms()
        .filter(|((i, j), _)| i + j <= 3)
        .map(|((i, j), c)| format!("({i},{j}): {c}"))
        .collect();
    Ok(DiagramReport {
        p,
        degree,
        ah_log_residual_zero,
        ah_integral_degree,
        inverse_identities,
        additivity_residual_zero,
        group_law_integral: law.is_integral(),
        group_law_low_terms,
    })
}

impl DiagramReport {
    pub fn all_hold(&self) -> bool {
        self.ah_log_residual_zero
            && self.ah_integral_degree == self.degree
            && self.inverse_identities
            && self.additivity_residual_zero
            && self.group_law_integral
    }
}
