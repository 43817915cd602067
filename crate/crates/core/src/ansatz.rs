//! Ansatz points: tuples `([a] - p, [a^4] - p, ..., [a^{ℓ*²}] - p)` built
//! from a single `a` in the maximal ideal of the tilt.
//!
//! The untilts `K_j` cut out by the entries are never materialized. Each is
//! described by its valuation `v_{K_j}(p) = v_F(a^{j²})` in the common value
//! group.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{is_prime, FqField, Rat};
use crate::tilt::{HahnElt, TiltAut};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointLabel {
    Canonical,
    Special,
    Generic,
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointLabel::Canonical => "canonical",
            PointLabel::Special => "special",
            PointLabel::Generic => "generic",
        })
    }
}

/// One point of the ansatz set. Entry `j` (1-based) is the prime
/// `[a^{j²}] - p`, stored through its tilt element `a^{j²}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaPoint {
    ell: u32,
    base: HahnElt,
    primitives: Vec<(i64, HahnElt)>,
    label: PointLabel,
}

/// `(ℓ - 1) / 2`.
pub fn ell_star(ell: u32) -> i64 {
    (ell as i64 - 1) / 2
}

/// `Σ_{j=1}^{n} j² = n(n+1)(2n+1)/6`.
pub fn sum_of_squares(n: i64) -> i64 {
    n * (n + 1) * (2 * n + 1) / 6
}

pub(crate) fn check_ell(ell: u32) -> Result<()> {
    if ell < 3 || !is_prime(ell as u64) {
        return Err(Error::Domain(format!("ℓ must be an odd prime, got {ell}")));
    }
    Ok(())
}

impl SigmaPoint {
    pub fn new(a: &HahnElt, ell: u32) -> Result<Self> {
        Self::with_label(a, ell, PointLabel::Generic)
    }

    pub fn with_label(a: &HahnElt, ell: u32, label: PointLabel) -> Result<Self> {
        check_ell(ell)?;
        if a.is_zero() {
            return Err(Error::Domain("ansatz base must be nonzero".into()));
        }
        let v = a.valuation()?;
        if !v.is_positive() {
            return Err(Error::Domain(format!("ansatz base needs v_F(a) > 0, got {v}")));
        }
        let mut primitives = Vec::new();
        for j in 1..=ell_star(ell) {
            primitives.push((j, a.pow((j * j) as u64)?));
        }
        Ok(SigmaPoint { ell, base: a.clone(), primitives, label })
    }

    /// `a = t`, whose first entry is the canonical untilt.
    pub fn canonical(field: &Arc<FqField>, ell: u32) -> Result<Self> {
        Self::with_label(&HahnElt::t(field), ell, PointLabel::Canonical)
    }

    /// `a = t^{1/ℓ*²}`, making the last entry `K_{ℓ*}` canonical.
    pub fn special(field: &Arc<FqField>, ell: u32) -> Result<Self> {
        check_ell(ell)?;
        let ls = ell_star(ell);
        let a = HahnElt::t_pow(field, Rat::new(1, ls * ls));
        Self::with_label(&a, ell, PointLabel::Special)
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn ell_star(&self) -> i64 {
        ell_star(self.ell)
    }

    pub fn base(&self) -> &HahnElt {
        &self.base
    }

    pub fn label(&self) -> PointLabel {
        self.label
    }

    pub fn primitives(&self) -> &[(i64, HahnElt)] {
        &self.primitives
    }

    /// Tilt element `a^{j²}` of entry `j`.
    pub fn primitive(&self, j: i64) -> Result<&HahnElt> {
        self.primitives
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, x)| x)
            .ok_or_else(|| Error::Domain(format!("index j={j} outside 1..={}", self.ell_star())))
    }

    pub fn base_valuation(&self) -> Rat {
        self.base.valuation().expect("base valuation checked at construction")
    }

    /// `[v_{K_j}(p)]_j`.
    pub fn valuation_profile(&self) -> Vec<Rat> {
        self.primitives
            .iter()
            .map(|(_, x)| x.valuation().expect("powers of a nonzero base are nonzero"))
            .collect()
    }

    /// The index whose untilt is `C_p` itself (profile entry 1), if any.
    pub fn anchor_index(&self) -> Option<i64> {
        let prof = self.valuation_profile();
        prof.iter().position(|v| *v == Rat::one()).map(|i| i as i64 + 1)
    }

    /// Image under an automorphism of the tilt: the base is transported and
    /// the primitives recomputed; they agree with the transported primitives.
    pub fn act(&self, sigma: &TiltAut) -> Result<Self> {
        let base = sigma.apply(&self.base);
        let label = if sigma.frob == 0 { self.label } else { PointLabel::Generic };
        let out = Self::with_label(&base, self.ell, label)?;
        for ((j, x), (_, y)) in self.primitives.iter().zip(&out.primitives) {
            if sigma.apply(x) != *y {
                return Err(Error::Consistency(format!(
                    "σ(a^{{{}}}) differs from σ(a)^{{{}}}",
                    j * j,
                    j * j
                )));
            }
        }
        Ok(out)
    }

    /// Valuation of the product of all entries' tilt elements,
    /// `a^{Σ j²}`.
    pub fn product_valuation(&self) -> Result<Rat> {
        let n = sum_of_squares(self.ell_star());
        self.base.pow(n as u64)?.valuation()
    }
}

/// `|z|_{K_j} = |z|_{K_1}^{j²}` in exponent form.
pub fn scalar_valuation(point: &SigmaPoint, z_val: &Rat, j: i64) -> Result<Rat> {
    if j < 1 || j > point.ell_star() {
        return Err(Error::Domain(format!("index j={j} outside 1..={}", point.ell_star())));
    }
    Ok(z_val * Rat::int(j * j))
}

/// Parse a base description: `t`, `t^e` / `t^{e}` with rational `e`,
/// `canonical` or `special`.
pub fn parse_base(s: &str, field: &Arc<FqField>, ell: u32) -> Result<SigmaPoint> {
    let s = s.trim();
    match s {
        "canonical" => return SigmaPoint::canonical(field, ell),
        "special" => return SigmaPoint::special(field, ell),
        "t" => return SigmaPoint::new(&HahnElt::t(field), ell),
        _ => {}
    }
    let exp = s
        .strip_prefix("t^")
        .map(|e| e.trim_start_matches('{').trim_end_matches('}'))
        .ok_or_else(|| Error::Usage(format!("unrecognized base {s:?}")))?;
    let e: Rat = exp.parse().map_err(|_| Error::Usage(format!("bad exponent in base {s:?}")))?;
    SigmaPoint::new(&HahnElt::t_pow(field, e), ell)
}

#[derive(Clone, Debug, Serialize)]
pub struct AnsatzReport {
    pub base: String,
    pub label: PointLabel,
    pub profile: Vec<Rat>,
    pub anchor_index: Option<i64>,
}

impl From<&SigmaPoint> for AnsatzReport {
    fn from(pt: &SigmaPoint) -> Self {
        AnsatzReport {
            base: pt.base.to_string(),
            label: pt.label,
            profile: pt.valuation_profile(),
            anchor_index: pt.anchor_index(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<FqField> {
        FqField::new(3, 2).unwrap()
    }

    fn rats(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter().map(|&(n, d)| Rat::new(n, d)).collect()
    }

    #[test]
    fn canonical_profile() {
        let pt = SigmaPoint::canonical(&f3(), 5).unwrap();
        assert_eq!(pt.valuation_profile(), rats(&[(1, 1), (4, 1)]));
        assert_eq!(pt.primitive(2).unwrap(), &HahnElt::t_pow(&f3(), Rat::int(4)));
        assert_eq!(pt.anchor_index(), Some(1));
    }

    #[test]
    fn t_squared_base() {
        let a = HahnElt::t_pow(&f3(), Rat::int(2));
        let pt = SigmaPoint::new(&a, 5).unwrap();
        assert_eq!(pt.primitive(2).unwrap(), &HahnElt::t_pow(&f3(), Rat::int(8)));
    }

    #[test]
    fn rejects_bad_base() {
        let f = f3();
        assert!(matches!(SigmaPoint::new(&HahnElt::zero(&f), 5), Err(Error::Domain(_))));
        assert!(matches!(SigmaPoint::new(&HahnElt::one(&f), 5), Err(Error::Domain(_))));
        assert!(matches!(SigmaPoint::new(&HahnElt::t(&f), 9), Err(Error::Domain(_))));
    }

    #[test]
    fn special_points() {
        let f = f3();
        assert_eq!(SigmaPoint::special(&f, 5).unwrap().valuation_profile(), rats(&[(1, 4), (1, 1)]));
        assert_eq!(
            SigmaPoint::special(&f, 7).unwrap().valuation_profile(),
            rats(&[(1, 9), (4, 9), (1, 1)])
        );
        for ell in (3..=101u32).filter(|&l| is_prime(l as u64)) {
            let pt = SigmaPoint::special(&f, ell).unwrap();
            assert_eq!(pt.valuation_profile().last(), Some(&Rat::one()));
            assert_eq!(pt.anchor_index(), Some(ell_star(ell)));
        }
    }

    #[test]
    fn action() {
        let f = f3();
        let pt = SigmaPoint::canonical(&f, 5).unwrap();
        assert_eq!(pt.act(&TiltAut::identity()).unwrap(), pt);
        let fr = pt.act(&TiltAut::frobenius_power(1)).unwrap();
        assert_eq!(fr.base(), &HahnElt::t_pow(&f, Rat::int(3)));
        assert_eq!(fr.valuation_profile(), rats(&[(3, 1), (12, 1)]));
        let c = f.generator();
        let a = HahnElt::monomial(c, Rat::new(1, 3));
        let pt = SigmaPoint::new(&a, 7).unwrap();
        let g = pt.act(&TiltAut::coefficient_galois(1)).unwrap();
        assert_eq!(g.valuation_profile(), pt.valuation_profile());
        assert_ne!(g.base(), pt.base());
    }

    #[test]
    fn scalar_scaling() {
        let pt = SigmaPoint::canonical(&f3(), 5).unwrap();
        assert_eq!(scalar_valuation(&pt, &Rat::new(1, 10), 2).unwrap(), Rat::new(4, 10));
        assert_eq!(scalar_valuation(&pt, &Rat::zero(), 2).unwrap(), Rat::zero());
        assert_eq!(scalar_valuation(&pt, &Rat::new(3, 7), 1).unwrap(), Rat::new(3, 7));
        assert!(scalar_valuation(&pt, &Rat::one(), 3).is_err());
    }

    #[test]
    fn product_of_entries() {
        let f = f3();
        for ell in [3u32, 5, 7, 11, 13] {
            let pt = SigmaPoint::special(&f, ell).unwrap();
            let n = sum_of_squares(ell_star(ell));
            assert_eq!(pt.product_valuation().unwrap(), pt.base_valuation() * Rat::int(n));
        }
    }

    #[test]
    fn parse() {
        let f = f3();
        let pt = parse_base("t^{1/4}", &f, 5).unwrap();
        assert_eq!(pt.valuation_profile(), rats(&[(1, 4), (1, 1)]));
        assert_eq!(parse_base("special", &f, 5).unwrap().label(), PointLabel::Special);
        assert!(matches!(parse_base("x", &f, 5), Err(Error::Usage(_))));
    }
}
