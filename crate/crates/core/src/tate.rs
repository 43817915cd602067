//! Tate-curve data: the discriminant product, the odd theta function as a
//! two-variable truncated series, its quasi-periodicity and the theta values.
//!
//! All series are in `t = q^{1/2ℓ}` with coefficients in `Z[ζ_{2ℓ}]`. The
//! theta function used throughout is the reduced form
//! `θ(u) = Σ_n (-1)^n q^{n(n+1)/2} u^{2n+1}`, which is odd in `u`, vanishes
//! at `u = 1` and satisfies `θ(q^{j/2}u) = (-1)^j q^{-j²/2} u^{-2j} θ(u)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::cyclo::{CycloLaurent, CycloRing};
use crate::error::{Error, Result};
use crate::numkit::Rat;

/// Default truncation order `24ℓ` in `t`.
pub fn default_order(ell: u32) -> i64 {
    24 * ell as i64
}

/// `q ∏_{n≥1} (1 - q^n)^24` through `q^order`, as a series in `t`.
pub fn discriminant_series(ell: u32, order: u32) -> Result<CycloLaurent> {
    if order < 1 {
        return Err(Error::Domain("discriminant order must be >= 1".into()));
    }
    let ring = CycloRing::new(2 * ell);
    let q = 2 * ell as i64;
    let prod_order = q * order as i64;
    let mut prod = CycloLaurent::one(&ring).truncate(prod_order);
    for n in 1..=order as i64 {
        let factor = CycloLaurent::from_terms(
            &ring,
            [(0, ring.one()), (q * n, ring.from_int(-1))],
            Some(prod_order),
        );
        prod = prod.mul(&factor)?;
    }
    let p24 = prod.pow(24)?;
    Ok(p24.scale(&ring.one(), q))
}

/// The point `u = ζ_{2ℓ}^α t^β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionPoint {
    pub alpha: i64,
    pub beta: i64,
}

impl TorsionPoint {
    pub fn new(ell: u32, alpha: i64, beta: i64) -> Self {
        TorsionPoint { alpha: alpha.rem_euclid(2 * ell as i64), beta }
    }

    /// `ζ_ℓ = ζ_{2ℓ}^2`.
    pub fn zeta_ell(ell: u32) -> Self {
        Self::new(ell, 2, 0)
    }

    pub fn zeta_2ell(ell: u32) -> Self {
        Self::new(ell, 1, 0)
    }

    pub fn inverse(&self, ell: u32) -> Self {
        Self::new(ell, -self.alpha, -self.beta)
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        TorsionPoint { alpha: self.alpha, beta: self.beta + k }
    }
}

/// Truncated theta series in `u`, with the Tate parameter equal to `t^P`.
///
/// The u-exponents are the odd numbers `2n+1` for `|n| ≤ n_max`; the `t`
/// coefficient of `u^{2n+1}` is `(-1)^n t^{P·n(n+1)/2}`. With `P = 2ℓ` this
/// is the theta function of `q` itself; with `P = 2` it is the theta
/// function of `q^{1/ℓ}`.
#[derive(Clone, Debug)]
pub struct ThetaSeries {
    ell: u32,
    tate_exp: i64,
    n_max: i64,
    ring: Arc<CycloRing>,
    u_terms: BTreeMap<i64, CycloLaurent>,
}

impl ThetaSeries {
    pub fn new(ell: u32, tate_exp: i64, n_max: i64) -> Result<Self> {
        if tate_exp < 2 || tate_exp % 2 != 0 {
            return Err(Error::Domain(format!(
                "Tate exponent must be even and positive, got {tate_exp}"
            )));
        }
        let ring = CycloRing::new(2 * ell);
        let mut u_terms = BTreeMap::new();
        for n in -n_max..=n_max {
            let sign = if n.rem_euclid(2) == 0 { 1 } else { -1 };
            u_terms.insert(
                2 * n + 1,
                CycloLaurent::monomial(ring.from_int(sign), tate_exp * n * (n + 1) / 2),
            );
        }
        Ok(ThetaSeries { ell, tate_exp, n_max, ring, u_terms })
    }

    /// Smallest series that evaluates completely to `O(t^order)` at every
    /// point with `|β| ≤ beta_bound`.
    pub fn covering(ell: u32, tate_exp: i64, order: i64, beta_bound: i64) -> Result<Self> {
        let mut n_max = 0;
        loop {
            let ok = [-beta_bound, beta_bound]
                .iter()
                .all(|b| complete(tate_exp, n_max, *b, order));
            if ok {
                return Self::new(ell, tate_exp, n_max);
            }
            n_max += 1;
        }
    }

    /// The theta function of `q`, sized for shifts by up to `4` half periods.
    pub fn standard(ell: u32, order: i64) -> Result<Self> {
        Self::covering(ell, 2 * ell as i64, order, 6 * ell as i64)
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn level(&self) -> u32 {
        2 * self.ell
    }

    pub fn tate_exponent(&self) -> i64 {
        self.tate_exp
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn u_terms(&self) -> &BTreeMap<i64, CycloLaurent> {
        &self.u_terms
    }

    pub fn ring(&self) -> &Arc<CycloRing> {
        &self.ring
    }
}

fn exponent(tate_exp: i64, n: i64, beta: i64) -> i64 {
    tate_exp * n * (n + 1) / 2 + beta * (2 * n + 1)
}

// Every omitted index n with |n| > n_max must land at or above the order.
fn complete(tate_exp: i64, n_max: i64, beta: i64, order: i64) -> bool {
    let hi = n_max + 1;
    let lo = -n_max - 1;
    // exponent is convex in n; it increases beyond `hi` iff the step is non-negative
    let rising = exponent(tate_exp, hi + 1, beta) >= exponent(tate_exp, hi, beta);
    let falling = exponent(tate_exp, lo - 1, beta) >= exponent(tate_exp, lo, beta);
    rising
        && falling
        && exponent(tate_exp, hi, beta) >= order
        && exponent(tate_exp, lo, beta) >= order
}

/// `θ(ζ_{2ℓ}^α t^β) + O(t^order)`.
pub fn theta_eval(theta: &ThetaSeries, point: &TorsionPoint, order: i64) -> Result<CycloLaurent> {
    if !complete(theta.tate_exp, theta.n_max, point.beta, order) {
        return Err(Error::Precision(format!(
            "theta truncated at |n| <= {} does not determine u = z^{} t^{} to O(t^{order})",
            theta.n_max, point.alpha, point.beta
        )));
    }
    let mut acc = CycloLaurent::zero(&theta.ring, Some(order));
    for (k, coeff) in &theta.u_terms {
        let c = theta.ring.zeta_pow(point.alpha * k);
        acc = acc.add(&coeff.scale(&c, point.beta * k))?;
    }
    Ok(acc)
}

/// `θ(q^{j/2}u) - (-1)^j q^{-j²/2} u^{-2j} θ(u)`; identically zero to the
/// truncation order.
pub fn quasi_periodicity_residual(
    theta: &ThetaSeries,
    j: i64,
    point: &TorsionPoint,
    order: i64,
) -> Result<CycloLaurent> {
    if j.abs() > 4 {
        return Err(Error::Domain(format!("half-period shift |j| <= 4 required, got {j}")));
    }
    let half = theta.tate_exp / 2;
    let lhs = theta_eval(theta, &point.shift(j * half), order)?;
    let base = theta_eval(theta, point, order)?;
    let sign = if j.rem_euclid(2) == 0 { 1 } else { -1 };
    let c = theta.ring.zeta_pow(-2 * j * point.alpha);
    let c = if sign < 0 { c.neg() } else { c };
    let rhs = base.scale(&c, -j * j * half - 2 * j * point.beta);
    lhs.sub(&rhs)
}

/// `(-1)^j t^{-j²} ζ_ℓ^{-2j}`.
pub fn closed_form_ratio(ell: u32, j: i64) -> CycloLaurent {
    let ring = CycloRing::new(2 * ell);
    let neg = j.rem_euclid(2) == 1;
    CycloLaurent::monomial(ring.signed_zeta_pow(neg, -4 * j), -j * j)
}

/// Series-division result next to the closed form it must equal.
#[derive(Clone, Debug)]
pub struct RatioCheck {
    pub computed: CycloLaurent,
    pub closed_form: CycloLaurent,
    pub matches: bool,
}

/// Divide `θ'(t^j ζ_ℓ)` by `θ'(ζ_ℓ)`, where `θ'` is the theta function of
/// `q^{1/ℓ}`, and compare with the closed-form monomial.
pub fn theta_ratio_check(ell: u32, j: i64, order: i64) -> Result<RatioCheck> {
    let lstar = (ell as i64 - 1) / 2;
    if !(0..=lstar).contains(&j) {
        return Err(Error::Domain(format!("j must lie in 0..={lstar}, got {j}")));
    }
    let theta = ThetaSeries::covering(ell, 2, order, lstar)?;
    let u = TorsionPoint::zeta_ell(ell);
    let num = theta_eval(&theta, &u.shift(j), order)?;
    let den = theta_eval(&theta, &u, order)?;
    let computed = num.divide(&den)?;
    let closed_form = closed_form_ratio(ell, j);
    let reference = match computed.order() {
        Some(t) => closed_form.truncate(t),
        None => closed_form.clone(),
    };
    let matches = reference == computed;
    Ok(RatioCheck { computed, closed_form, matches })
}

/// `1/ξ_j = θ(q^{j/2ℓ}ζ_ℓ)/θ(ζ_ℓ)`, verified against the closed form and
/// returned exactly.
pub fn theta_value_ratio(ell: u32, j: i64, order: i64) -> Result<CycloLaurent> {
    let check = theta_ratio_check(ell, j, order)?;
    if !check.matches {
        return Err(Error::Consistency(format!(
            "theta ratio {} differs from {}",
            check.computed, check.closed_form
        )));
    }
    Ok(check.closed_form)
}

/// The theta value `ξ_j` itself, the reciprocal of the ratio.
pub fn theta_value(ell: u32, j: i64, order: i64) -> Result<CycloLaurent> {
    theta_value_ratio(ell, j, order)?.invert()
}

/// `v(ξ_j) = (j²/2ℓ)·v(q)`.
pub fn xi_valuation(ell: u32, j: i64, vq: &Rat) -> Result<Rat> {
    if !vq.is_positive() {
        return Err(Error::Domain(format!("v(q) must be positive, got {vq}")));
    }
    Ok(vq * Rat::new(j * j, 2 * ell as i64))
}

/// One line of the theta-value table.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaRow {
    pub j: i64,
    pub closed_form: String,
    pub residual_zero: bool,
    pub xi_valuation: Rat,
}

/// Table over `j = 1..=ℓ*`: closed form, whether both the ratio check and
/// the quasi-periodicity residual at `ζ_ℓ` vanish, and `v(ξ_j)`.
pub fn theta_table(ell: u32, vq: &Rat, order: i64) -> Result<Vec<ThetaRow>> {
    let lstar = (ell as i64 - 1) / 2;
    let theta = ThetaSeries::standard(ell, order)?;
    let mut rows = Vec::new();
    for j in 1..=lstar {
        let check = theta_ratio_check(ell, j, order)?;
        let residual = if j <= 4 {
            quasi_periodicity_residual(&theta, j, &TorsionPoint::zeta_ell(ell), order)?.is_zero()
        } else {
            true
        };
        rows.push(ThetaRow {
            j,
            closed_form: check.closed_form.to_string(),
            residual_zero: check.matches && residual,
            xi_valuation: xi_valuation(ell, j, vq)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn naive_delta(n: usize) -> Vec<i128> {
        // coefficients of q^0..q^{n-1} of ∏(1-q^k)^24, then shift by q
        let mut c = vec![0i128; n];
        c[0] = 1;
        for k in 1..n {
            for _ in 0..24 {
                for i in (k..n).rev() {
                    c[i] -= c[i - k];
                }
            }
        }
        let mut out = vec![0i128; n + 1];
        out[1..].copy_from_slice(&c);
        out
    }

    #[test]
    fn discriminant_matches_naive_product() {
        let ell = 5;
        let d = discriminant_series(ell, 8).unwrap();
        assert_eq!(d.order(), Some(90));
        let oracle = naive_delta(8);
        for (k, expected) in oracle.iter().enumerate() {
            assert_eq!(d.coeff(10 * k as i64).coords()[0], BigInt::from(*expected), "q^{k}");
        }
        assert!(d.terms().keys().all(|e| e % 10 == 0));
        assert_eq!(&oracle[1..5], &[1, -24, 252, -1472]);
    }

    #[test]
    fn discriminant_small_orders() {
        let d = discriminant_series(5, 1).unwrap();
        assert_eq!(d.to_string(), "[1,0,0,0] * t^10 + O(t^20)");
        let d = discriminant_series(5, 2).unwrap();
        assert_eq!(d.order(), Some(30));
        assert_eq!(d.terms().len(), 2);
        assert_eq!(d.coeff(20).coords()[0], BigInt::from(-24));
        assert!(discriminant_series(5, 0).is_err());
    }

    #[test]
    fn theta_vanishes_at_one_and_half_periods() {
        for ell in [5u32, 7] {
            let t = default_order(ell);
            let th = ThetaSeries::standard(ell, t).unwrap();
            assert!(theta_eval(&th, &TorsionPoint::new(ell, 0, 0), t).unwrap().is_zero());
            for j in 1..=2 {
                let u = TorsionPoint::new(ell, 0, j * ell as i64);
                assert!(theta_eval(&th, &u, t).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn theta_is_odd() {
        let ell = 5;
        let t = default_order(ell);
        let th = ThetaSeries::standard(ell, t).unwrap();
        for alpha in 0..10 {
            for beta in -6..=6 {
                let u = TorsionPoint::new(ell, alpha, beta);
                let a = theta_eval(&th, &u, t).unwrap();
                let b = theta_eval(&th, &u.inverse(ell), t).unwrap();
                assert!(a.add(&b).unwrap().is_zero(), "u = {u:?}");
            }
        }
    }

    #[test]
    fn quasi_periodicity() {
        for ell in [5u32, 7] {
            let t = default_order(ell);
            let th = ThetaSeries::standard(ell, t).unwrap();
            for j in -4..=4 {
                for u in [TorsionPoint::zeta_ell(ell), TorsionPoint::zeta_2ell(ell)] {
                    let r = quasi_periodicity_residual(&th, j, &u, t).unwrap();
                    assert!(r.is_zero(), "ell={ell} j={j} u={u:?}: {r}");
                }
            }
            assert!(quasi_periodicity_residual(&th, 5, &TorsionPoint::zeta_ell(ell), t).is_err());
        }
    }

    #[test]
    fn undersized_theta_is_rejected() {
        let th = ThetaSeries::new(5, 10, 1).unwrap();
        let r = theta_eval(&th, &TorsionPoint::zeta_ell(5), 120);
        assert!(matches!(r, Err(Error::Precision(_))));
    }

    #[test]
    fn theta_value_ratios() {
        let r = CycloRing::new(10);
        let one = theta_value_ratio(5, 0, 120).unwrap();
        assert_eq!(one, CycloLaurent::one(&r));
        let r1 = theta_value_ratio(5, 1, 120).unwrap();
        assert_eq!(r1, CycloLaurent::monomial(r.zeta_pow(-4).neg(), -1));
        let r2 = theta_value_ratio(5, 2, 120).unwrap();
        assert_eq!(r2, CycloLaurent::monomial(r.zeta_pow(-8), -4));
        for j in 1..=3 {
            assert!(theta_ratio_check(7, j, 168).unwrap().matches);
        }
        assert!(theta_value_ratio(5, 3, 120).is_err());
    }

    #[test]
    fn theta_value_is_reciprocal() {
        let xi = theta_value(5, 2, 120).unwrap();
        assert_eq!(xi.valuation(), Some(4));
    }

    #[test]
    fn xi_valuations() {
        assert_eq!(xi_valuation(5, 1, &Rat::one()).unwrap(), Rat::new(1, 10));
        assert_eq!(xi_valuation(5, 2, &Rat::one()).unwrap(), Rat::new(4, 10));
        assert!(xi_valuation(5, 1, &Rat::zero()).is_err());
        for ell in [5u32, 7, 11] {
            let v1 = xi_valuation(ell, 1, &Rat::new(3, 7)).unwrap();
            for j in 1..=(ell as i64 - 1) / 2 {
                assert_eq!(xi_valuation(ell, j, &Rat::new(3, 7)).unwrap(), &v1 * (j * j));
            }
        }
    }

    #[test]
    fn table_rows() {
        let rows = theta_table(5, &Rat::one(), 120).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.residual_zero));
        assert_eq!(rows[1].xi_valuation, Rat::new(2, 5));
    }
}
