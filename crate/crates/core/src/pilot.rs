//! Pilot sums of Teichmüller lifts of theta values over an ansatz point,
//! the lower bound they give for `|Θ̃|_B`, and the trivial bound at `ρ = 1`.
//!
//! Everything is in exponent form: `s = -log_p |z|_ρ`, so a larger absolute
//! value is a smaller exponent and a supremum of norms is a minimum of
//! exponents.

use rand::Rng;
use serde::Serialize;

use crate::ansatz::{check_ell, ell_star, scalar_valuation, sum_of_squares, SigmaPoint};
use crate::bring::{norm_exp, BElt, BRing, NormExp, Rho};
use crate::error::{Error, Result};
use crate::numkit::Rat;
use crate::tate::xi_valuation;
use crate::tilt::{random_positive_rat, random_unit, HahnElt, TiltAut};

/// `v_F(x_j) = j²·v_F(a)·v(q)/2ℓ`, the valuation of `ξ_1` read in `K_j`.
pub fn lift_valuation(point: &SigmaPoint, j: i64, vq: &Rat) -> Result<Rat> {
    let xi1 = xi_valuation(point.ell(), 1, vq)?;
    scalar_valuation(point, &(xi1 * point.base_valuation()), j)
}

/// Teichmüller lift `[x_j]` of the theta value at entry `j`. The coefficient
/// is a primitive `2ℓ`-th root of unity when the residue field has one.
pub fn lift_theta_value(ring: &BRing, point: &SigmaPoint, j: i64, vq: &Rat) -> Result<BElt> {
    let v = lift_valuation(point, j, vq)?;
    let c = ring
        .field
        .root_of_unity(2 * point.ell() as u128)
        .unwrap_or_else(|| ring.field.one());
    BElt::teich(&HahnElt::monomial(c, v))
}

fn exact_norm(z: &BElt, rho: &Rho) -> Result<Rat> {
    match norm_exp(z, rho)? {
        NormExp::Exact(s) => Ok(s),
        other => Err(Error::Precision(format!("norm of lift is not exact: {other}"))),
    }
}

/// `Σ_j s_r([x_j])`.
pub fn pilot_sum(ring: &BRing, point: &SigmaPoint, vq: &Rat, rho: &Rho) -> Result<Rat> {
    let mut total = Rat::zero();
    for j in 1..=point.ell_star() {
        total += exact_norm(&lift_theta_value(ring, point, j, vq)?, rho)?;
    }
    Ok(total)
}

/// Result of the τ-perturbed supremum. `witnessed` is the minimum over
/// sums whose norms are known exactly; `floor` also folds in lower bounds
/// from inexact sums, so the true value lies in `[floor, witnessed]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupValue {
    pub r: Rat,
    pub witnessed: Rat,
    pub floor: Rat,
}

/// `min over τ of Σ_j s_r([x_j] + τ_j)`. The sum separates over `j`, so the
/// minimum is taken per entry. Each `taus[j-1]` must contain zero.
pub fn sup_with_tau(
    ring: &BRing,
    point: &SigmaPoint,
    vq: &Rat,
    rho: &Rho,
    taus: &[Vec<BElt>],
) -> Result<SupValue> {
    let sums = perturbed_lifts(ring, point, vq, taus)?;
    sup_from_sums(&sums, rho)
}

/// [`sup_with_tau`] at several radii, sharing the sums `[x_j] + τ`.
pub fn sup_over_grid(
    ring: &BRing,
    point: &SigmaPoint,
    vq: &Rat,
    rhos: &[Rho],
    taus: &[Vec<BElt>],
) -> Result<Vec<SupValue>> {
    let sums = perturbed_lifts(ring, point, vq, taus)?;
    rhos.iter().map(|rho| sup_from_sums(&sums, rho)).collect()
}

fn perturbed_lifts(
    ring: &BRing,
    point: &SigmaPoint,
    vq: &Rat,
    taus: &[Vec<BElt>],
) -> Result<Vec<Vec<BElt>>> {
    let ls = point.ell_star();
    if taus.len() != ls as usize {
        return Err(Error::Domain(format!("need {ls} τ sample lists, got {}", taus.len())));
    }
    let mut out = Vec::new();
    for (j, list) in (1..=ls).zip(taus) {
        if !list.iter().any(BElt::is_zero) {
            return Err(Error::Domain(format!("τ samples for j={j} must contain 0")));
        }
        let x = lift_theta_value(ring, point, j, vq)?;
        out.push(list.iter().map(|tau| ring.add(&x, tau)).collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}

fn sup_from_sums(sums: &[Vec<BElt>], rho: &Rho) -> Result<SupValue> {
    let mut witnessed = Rat::zero();
    let mut floor = Rat::zero();
    for list in sums {
        let mut best: Option<Rat> = None;
        let mut low: Option<Rat> = None;
        for z in list {
            let s = norm_exp(z, rho)?;
            if let NormExp::Exact(v) = &s {
                best = Some(best.map_or(v.clone(), |b| b.min(v.clone())));
            }
            if let Some(v) = s.lower_bound() {
                low = Some(low.map_or(v.clone(), |b| b.min(v.clone())));
            }
        }
        witnessed += best.expect("the zero sample gives an exact norm");
        floor += low.expect("the zero sample gives a finite norm");
    }
    Ok(SupValue { r: rho.r().clone(), witnessed, floor })
}

/// Generators of the implemented automorphism group used to close samples.
pub fn generators() -> Vec<TiltAut> {
    vec![TiltAut::frobenius_power(1), TiltAut::frobenius_power(-1), TiltAut::coefficient_galois(1)]
}

/// One ansatz point with its lifts and τ samples.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub point: SigmaPoint,
    pub lifts: Vec<BElt>,
    pub taus: Vec<Vec<BElt>>,
}

/// Finite sub-sample of `Θ̃`: a few ansatz points and their images under
/// the generators, each with τ perturbations `log[ε]` from [`tau_pool`].
#[derive(Clone, Debug)]
pub struct ThetaTildeSample {
    pub ell: u32,
    pub p: u64,
    pub vq: Rat,
    pub points: Vec<SamplePoint>,
}

impl ThetaTildeSample {
    /// Every element `[x_j]` and `[x_j] + τ`.
    pub fn elements(&self, ring: &BRing) -> Result<Vec<BElt>> {
        let mut out = Vec::new();
        for sp in &self.points {
            for (x, taus) in sp.lifts.iter().zip(&sp.taus) {
                for tau in taus {
                    out.push(ring.add(x, tau)?);
                }
            }
        }
        Ok(out)
    }
}

/// Number of explicit terms kept in `log[ε]` for τ samples.
pub const TAU_LOG_TERMS: u32 = 6;

/// 1-units `ε` of the tilt whose logarithms seed the τ samples.
pub fn tau_units(ring: &BRing) -> Result<Vec<HahnElt>> {
    let f = &ring.field;
    let one = HahnElt::one(f);
    let seeds = [
        HahnElt::t_pow(f, Rat::new(3, 4)),
        HahnElt::t(f),
        HahnElt::monomial(f.generator(), Rat::new(1, 2)),
    ];
    let mut out = Vec::new();
    for y in &seeds {
        out.push(one.add(y)?);
        for g in generators() {
            out.push(one.add(&g.apply(y))?);
        }
    }
    Ok(out)
}

/// τ samples in `B^{φ=p}`: zero and `log[ε]` for the 1-units above.
pub fn tau_pool(ring: &BRing) -> Result<Vec<BElt>> {
    let mut out = vec![BElt::zero(&ring.field)];
    for eps in tau_units(ring)? {
        out.push(ring.log_teich(&eps, TAU_LOG_TERMS)?);
    }
    Ok(out)
}

fn sample_point(ring: &BRing, point: SigmaPoint, vq: &Rat, pool: &[BElt]) -> Result<SamplePoint> {
    let mut lifts = Vec::new();
    let mut taus = Vec::new();
    for j in 1..=point.ell_star() {
        lifts.push(lift_theta_value(ring, &point, j, vq)?);
        taus.push(pool.to_vec());
    }
    Ok(SamplePoint { point, lifts, taus })
}

/// Canonical and special points, `n_random` seeded bases `c·t^e`, and the
/// images of all of them under the generators.
pub fn build_sample<R: Rng>(
    ring: &BRing,
    ell: u32,
    vq: &Rat,
    rng: &mut R,
    n_random: usize,
) -> Result<ThetaTildeSample> {
    let f = &ring.field;
    let mut bases = vec![SigmaPoint::canonical(f, ell)?, SigmaPoint::special(f, ell)?];
    for _ in 0..n_random {
        let a = HahnElt::monomial(random_unit(f, rng), random_positive_rat(rng, 6, 6));
        bases.push(SigmaPoint::new(&a, ell)?);
    }
    let mut all = Vec::new();
    for b in &bases {
        all.push(b.clone());
        for g in generators() {
            all.push(b.act(&g)?);
        }
    }
    let pool = tau_pool(ring)?;
    let points = all.into_iter().map(|pt| sample_point(ring, pt, vq, &pool)).collect::<Result<_>>()?;
    Ok(ThetaTildeSample { ell, p: ring.p, vq: vq.clone(), points })
}

/// Comparison of the special-point pilot sum with `ℓ*·v(q^{1/2ℓ})`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub ell: u32,
    pub ell_star: i64,
    pub vq: Rat,
    pub rho_grid: Vec<Rat>,
    /// Pilot sum at the special point; identical at every grid value.
    pub pilot_sum: Rat,
    pub rho_independent: bool,
    /// `(1/12)(1 + 1/ℓ*)·v(q)`.
    pub closed_form: Rat,
    /// `ℓ*·v(q)/2ℓ`.
    pub rhs: Rat,
    /// `rhs - pilot_sum`.
    pub margin: Rat,
    pub verdict: bool,
    /// `(2ℓ - 1)(ℓ - 3) > 0`.
    pub sign_test: bool,
    /// Exponents after taking the `ℓ*`-th root.
    pub normalized_lhs: Rat,
    pub normalized_rhs: Rat,
    pub sup: Vec<SupValue>,
}

pub fn closed_form_lhs(ell: u32, vq: &Rat) -> Rat {
    let ls = ell_star(ell);
    vq * Rat::new(ls + 1, 12 * ls)
}

pub fn bound_rhs(ell: u32, vq: &Rat) -> Rat {
    vq * Rat::new(ell_star(ell), 2 * ell as i64)
}

pub fn lower_bound_check(ring: &BRing, ell: u32, vq: &Rat, rho_grid: &[Rat]) -> Result<BoundReport> {
    lower_bound_check_with(ring, ell, vq, rho_grid, &tau_pool(ring)?)
}

/// [`lower_bound_check`] with a precomputed τ pool.
pub fn lower_bound_check_with(
    ring: &BRing,
    ell: u32,
    vq: &Rat,
    rho_grid: &[Rat],
    pool: &[BElt],
) -> Result<BoundReport> {
    check_ell(ell)?;
    if rho_grid.is_empty() {
        return Err(Error::Domain("empty rho grid".into()));
    }
    let point = SigmaPoint::special(&ring.field, ell)?;
    let sp = sample_point(ring, point.clone(), vq, pool)?;
    let rhos = rho_grid.iter().map(|r| Rho::new(r.clone())).collect::<Result<Vec<_>>>()?;
    let sums = rhos.iter().map(|rho| pilot_sum(ring, &point, vq, rho)).collect::<Result<Vec<_>>>()?;
    let sup = sup_over_grid(ring, &point, vq, &rhos, &sp.taus)?;
    let pilot = sums[0].clone();
    let rho_independent = sums.iter().all(|s| *s == pilot);
    let rhs = bound_rhs(ell, vq);
    let margin = &rhs - &pilot;
    let ls = ell_star(ell);
    let l = ell as i64;
    Ok(BoundReport {
        ell,
        ell_star: ls,
        vq: vq.clone(),
        rho_grid: rho_grid.to_vec(),
        closed_form: closed_form_lhs(ell, vq),
        verdict: margin.is_positive(),
        sign_test: (2 * l - 1) * (l - 3) > 0,
        normalized_lhs: &pilot / Rat::int(ls),
        normalized_rhs: &rhs / Rat::int(ls),
        pilot_sum: pilot,
        rho_independent,
        rhs,
        margin,
        sup,
    })
}

/// Smallest `log_p c` compatible with `|Θ̃|_B ≤ c·|q^{1/2ℓ}|^{ℓ*}` given
/// the computed lower bound; `c ≥ 1` holds when it is `≥ 0`.
#[derive(Clone, Debug, Serialize)]
pub struct CBound {
    pub ell: u32,
    pub log_c_min: Rat,
    pub c_at_least_one: bool,
}

pub fn corollary_c_check(ring: &BRing, ell: u32, vq: &Rat) -> Result<CBound> {
    check_ell(ell)?;
    let point = SigmaPoint::special(&ring.field, ell)?;
    let margin = bound_rhs(ell, vq) - pilot_sum(ring, &point, vq, &Rho::new(Rat::zero())?)?;
    Ok(CBound { ell, c_at_least_one: !margin.is_negative(), log_c_min: margin })
}

/// Norm exponents at `r = 0` of every sample element, which must be `≥ 0`.
#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundReport {
    pub checked: usize,
    pub min_exponent: Option<Rat>,
    pub violations: Vec<String>,
    pub holds: bool,
}

pub fn trivial_upper_bound_check(ring: &BRing, sample: &ThetaTildeSample) -> Result<UpperBoundReport> {
    let rho = Rho::new(Rat::zero())?;
    let mut checked = 0;
    let mut min_exponent: Option<Rat> = None;
    let mut violations = Vec::new();
    for z in sample.elements(ring)? {
        checked += 1;
        let s = norm_exp(&z, &rho)?;
        if let Some(v) = s.lower_bound() {
            min_exponent = Some(min_exponent.map_or(v.clone(), |m| m.min(v.clone())));
        }
        if !s.at_least(&Rat::zero()) {
            violations.push(format!("{z}: s = {s}"));
        }
    }
    Ok(UpperBoundReport { checked, min_exponent, holds: violations.is_empty(), violations })
}

/// `Σ_j v(ξ_j)` at the canonical point equals `Σ j²·v(ξ_1)`.
pub fn canonical_sum_closed_form(ell: u32, vq: &Rat) -> Result<Rat> {
    Ok(xi_valuation(ell, 1, vq)? * Rat::int(sum_of_squares(ell_star(ell))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::FqField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring() -> BRing {
        BRing::new(FqField::new(3, 2).unwrap(), 2)
    }

    fn r0() -> Rho {
        Rho::new(Rat::zero()).unwrap()
    }

    #[test]
    fn lifts() {
        let ring = ring();
        let c = SigmaPoint::canonical(&ring.field, 5).unwrap();
        let vq = Rat::one();
        assert_eq!(lift_valuation(&c, 1, &vq).unwrap(), Rat::new(1, 10));
        assert_eq!(lift_valuation(&c, 2, &vq).unwrap(), Rat::new(4, 10));
        let s = SigmaPoint::special(&ring.field, 5).unwrap();
        assert_eq!(lift_valuation(&s, 1, &vq).unwrap(), Rat::new(1, 40));
        let x = lift_theta_value(&ring, &c, 2, &vq).unwrap();
        assert!(x.is_exact());
        assert_eq!(exact_norm(&x, &Rho::new(Rat::int(2)).unwrap()).unwrap(), Rat::new(2, 5));
    }

    #[test]
    fn sums() {
        let ring = ring();
        let vq = Rat::one();
        let c = SigmaPoint::canonical(&ring.field, 5).unwrap();
        assert_eq!(pilot_sum(&ring, &c, &vq, &r0()).unwrap(), Rat::new(1, 2));
        assert_eq!(canonical_sum_closed_form(5, &vq).unwrap(), Rat::new(1, 2));
        let s = SigmaPoint::special(&ring.field, 5).unwrap();
        assert_eq!(pilot_sum(&ring, &s, &vq, &r0()).unwrap(), Rat::new(1, 8));
        let s3 = SigmaPoint::special(&ring.field, 3).unwrap();
        assert_eq!(pilot_sum(&ring, &s3, &vq, &r0()).unwrap(), Rat::new(1, 6));
    }

    #[test]
    fn tau_supremum() {
        let ring = ring();
        let vq = Rat::one();
        let c = SigmaPoint::canonical(&ring.field, 5).unwrap();
        let rho = Rho::new(Rat::new(1, 2)).unwrap();
        let zeros = vec![vec![BElt::zero(&ring.field)]; 2];
        let only_zero = sup_with_tau(&ring, &c, &vq, &rho, &zeros).unwrap();
        assert_eq!(only_zero.witnessed, Rat::new(1, 2));
        let mut taus = zeros.clone();
        taus[0].push(BElt::teich(&HahnElt::t_pow(&ring.field, Rat::new(1, 20))).unwrap());
        let v = sup_with_tau(&ring, &c, &vq, &rho, &taus).unwrap();
        assert_eq!(v.witnessed, Rat::new(1, 20) + Rat::new(4, 10));
        assert!(v.floor <= v.witnessed);
        assert!(sup_with_tau(&ring, &c, &vq, &rho, &[vec![], vec![]]).is_err());
    }

    #[test]
    fn bound_table() {
        let ring = ring();
        let vq = Rat::one();
        let grid = [Rat::int(2), Rat::one(), Rat::new(1, 2), Rat::new(1, 4)];
        let pool = tau_pool(&ring).unwrap();
        let r5 = lower_bound_check_with(&ring, 5, &vq, &grid, &pool).unwrap();
        assert_eq!((r5.pilot_sum.clone(), r5.rhs.clone()), (Rat::new(1, 8), Rat::new(1, 5)));
        assert!(r5.verdict && r5.rho_independent);
        let r3 = lower_bound_check_with(&ring, 3, &vq, &grid, &pool).unwrap();
        assert_eq!((r3.pilot_sum.clone(), r3.rhs.clone()), (Rat::new(1, 6), Rat::new(1, 6)));
        assert!(!r3.verdict);
        let r7 = lower_bound_check_with(&ring, 7, &vq, &grid, &pool).unwrap();
        assert_eq!((r7.pilot_sum.clone(), r7.rhs.clone()), (Rat::new(1, 9), Rat::new(3, 14)));
        for ell in [3u32, 5, 7, 11, 13] {
            let r = lower_bound_check_with(&ring, ell, &vq, &grid, &pool).unwrap();
            assert_eq!(r.verdict, r.sign_test);
            assert_eq!(r.pilot_sum, r.closed_form);
            assert!(r.sup.iter().all(|s| s.witnessed <= r.pilot_sum));
            assert!(corollary_c_check(&ring, ell, &vq).unwrap().c_at_least_one);
        }
    }

    #[test]
    fn tau_pool_is_phi_stable() {
        let ring = ring();
        let rs = [Rat::new(1, 4), Rat::new(1, 2), Rat::one()];
        for eps in tau_units(&ring).unwrap() {
            let checks = crate::bring::phi_eigen_check(&ring, &eps, TAU_LOG_TERMS, &rs).unwrap();
            assert!(checks.iter().all(|c| c.holds), "{eps}");
        }
    }

    #[test]
    fn trivial_bound() {
        let ring = ring();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample = build_sample(&ring, 5, &Rat::one(), &mut rng, 3).unwrap();
        let rep = trivial_upper_bound_check(&ring, &sample).unwrap();
        assert!(rep.checked >= 100, "{}", rep.checked);
        assert!(rep.holds, "{:?}", rep.violations);
    }
}
