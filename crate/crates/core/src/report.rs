//! Verification suites, run configuration and report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ansatz::{ell_star, parse_base, AnsatzReport, SigmaPoint};
use crate::bring::{phi_eigen_check, BRing, Rho};
use crate::error::{Error, Result};
use crate::loglink::{diagram_check, padic_log_unit, valuation_link_check};
use crate::numkit::{big_pow, is_prime, FqField, PadicInt, Rat};
use crate::pilot::{
    build_sample, canonical_sum_closed_form, corollary_c_check, lower_bound_check, pilot_sum,
    trivial_upper_bound_check, BoundReport,
};
use crate::tate::{
    default_order, quasi_periodicity_residual, theta_eval, theta_ratio_check, theta_table,
    ThetaSeries, TorsionPoint,
};
use crate::tilt::{random_positive_rat, random_unit, HahnElt, TiltAut};
use crate::witt::{derive_witt_polys, ghost, teichmuller, witt_add, witt_mul, FiniteField, Integers, WittVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Usage(format!("unknown format {s:?} (json, text, csv)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ThetaCheck,
    Ansatz,
    PilotBound,
    WittSelftest,
    LoglinkCheck,
    All,
}

impl Suite {
    pub const MEMBERS: [Suite; 5] =
        [Suite::ThetaCheck, Suite::Ansatz, Suite::PilotBound, Suite::WittSelftest, Suite::LoglinkCheck];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::ThetaCheck => "theta-check",
            Suite::Ansatz => "ansatz",
            Suite::PilotBound => "pilot-bound",
            Suite::WittSelftest => "witt-selftest",
            Suite::LoglinkCheck => "loglink-check",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::MEMBERS
            .iter()
            .chain([Suite::All].iter())
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| Error::Usage(format!("unknown suite {s:?}")))
    }
}

pub const MAX_WITT_LEN: usize = 3;
pub const MAX_DEGREE: usize = 64;
pub const MAX_FIELD_DEGREE: usize = 4;

/// Every knob of a run. Serialized verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub ell: u32,
    pub vq: Rat,
    /// Theta truncation order `T` in powers of `q^{1/2ℓ}`.
    pub order: i64,
    /// Hahn exponent cap `E` in the ring `B`.
    pub hahn_cap: Rat,
    /// Power series truncation degree `D`.
    pub degree: usize,
    pub witt_len: usize,
    /// Residue field is `F_{p^k}`.
    pub field_degree: usize,
    pub rho_grid: Vec<Rat>,
    pub seed: u64,
    pub base: String,
    pub table: bool,
    pub format: Format,
    pub canonical: bool,
}

impl RunConfig {
    pub fn default_for(p: u64, ell: u32) -> Self {
        RunConfig {
            p,
            ell,
            vq: Rat::one(),
            order: default_order(ell),
            hahn_cap: Rat::int(6),
            degree: default_degree(p),
            witt_len: 2,
            field_degree: 2,
            rho_grid: default_rho_grid(),
            seed: 1,
            base: "special".into(),
            table: false,
            format: Format::Json,
            canonical: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Usage(m));
        if !is_prime(self.p) {
            return usage(format!("p = {} is not prime", self.p));
        }
        if self.ell < 3 || !is_prime(self.ell as u64) {
            return usage(format!("ℓ = {} is not an odd prime", self.ell));
        }
        if self.ell as u64 == self.p {
            return usage(format!("ℓ must differ from p (both {})", self.p));
        }
        if !self.vq.is_positive() {
            return usage(format!("vq must be positive, got {}", self.vq));
        }
        let max_order = 48 * self.ell as i64;
        if self.order < 1 || self.order > max_order {
            return usage(format!("order must lie in 1..={max_order}, got {}", self.order));
        }
        if !self.hahn_cap.is_positive() || self.hahn_cap > Rat::int(24) {
            return usage(format!("Hahn cap must lie in (0, 24], got {}", self.hahn_cap));
        }
        if self.degree < 1 || self.degree > MAX_DEGREE {
            return usage(format!("degree must lie in 1..={MAX_DEGREE}, got {}", self.degree));
        }
        if self.witt_len < 1 || self.witt_len > MAX_WITT_LEN {
            return usage(format!("Witt length must lie in 1..={MAX_WITT_LEN}, got {}", self.witt_len));
        }
        if self.field_degree < 1 || self.field_degree > MAX_FIELD_DEGREE {
            return usage(format!(
                "field degree must lie in 1..={MAX_FIELD_DEGREE}, got {}",
                self.field_degree
            ));
        }
        if self.rho_grid.is_empty() {
            return usage("rho grid must not be empty".into());
        }
        if let Some(r) = self.rho_grid.iter().find(|r| r.is_negative() || **r > Rat::int(2)) {
            return usage(format!("rho grid exponents must lie in [0, 2], got {r}"));
        }
        Ok(())
    }

    fn field(&self) -> Result<std::sync::Arc<FqField>> {
        FqField::new(self.p, self.field_degree)
    }

    fn ring(&self) -> Result<BRing> {
        Ok(BRing::new(self.field()?, self.witt_len).with_hahn_cap(Some(self.hahn_cap.clone())))
    }

    /// Grid with `r = 0` added, sorted and deduplicated.
    fn grid_with_zero(&self) -> Vec<Rat> {
        let mut g = self.rho_grid.clone();
        g.push(Rat::zero());
        g.sort();
        g.dedup();
        g
    }

    fn positive_grid(&self) -> Vec<Rat> {
        self.grid_with_zero().into_iter().filter(Rat::is_positive).collect()
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::default_for(2, 5)
    }
}

/// `D = min(p³, 27)`.
pub fn default_degree(p: u64) -> usize {
    (p.saturating_pow(3)).min(27) as usize
}

/// `r ∈ {2, 1, 1/2, 1/4}`.
pub fn default_rho_grid() -> Vec<Rat> {
    vec![Rat::int(2), Rat::one(), Rat::new(1, 2), Rat::new(1, 4)]
}

/// Comma-separated rationals.
pub fn parse_rho_grid(s: &str) -> Result<Vec<Rat>> {
    s.split(',')
        .map(|x| x.trim().parse::<Rat>().map_err(|_| Error::Usage(format!("bad rho exponent {x:?}"))))
        .collect()
}

/// `key = value` lines; `#` starts a comment. Keys match the long flags.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_val<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Usage(format!("bad value {v:?} for {key}")))
}

impl RunConfig {
    /// Apply `key = value` settings on top of `self`.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in settings {
            match k.as_str() {
                "p" => self.p = parse_val(k, v)?,
                "ell" => self.ell = parse_val(k, v)?,
                "vq" => self.vq = parse_val(k, v)?,
                "order" => self.order = parse_val(k, v)?,
                "hahn-cap" => self.hahn_cap = parse_val(k, v)?,
                "degree" => self.degree = parse_val(k, v)?,
                "witt-len" => self.witt_len = parse_val(k, v)?,
                "field-degree" => self.field_degree = parse_val(k, v)?,
                "rho-grid" => self.rho_grid = parse_rho_grid(v)?,
                "seed" => self.seed = parse_val(k, v)?,
                "base" => self.base = v.clone(),
                "table" => self.table = parse_val(k, v)?,
                "format" => self.format = v.parse()?,
                "canonical" => self.canonical = parse_val(k, v)?,
                _ => return Err(Error::Usage(format!("unknown config key {k:?}"))),
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    /// The routine the check exercises.
    #[serde(rename = "ref")]
    pub reference: String,
    pub status: Status,
    pub witness: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub config: Value,
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    /// 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

struct Checks(Vec<Check>);

impl Checks {
    /// Record a check; an error inside it becomes a failure with the error
    /// as witness.
    fn run(&mut self, id: &str, reference: &str, f: impl FnOnce() -> Result<(bool, Value)>) {
        let (ok, witness) = match f() {
            Ok(v) => v,
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        self.0.push(Check {
            id: id.into(),
            reference: reference.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            witness,
        });
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report data serializes")
}

fn theta_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let ell = cfg.ell;
    let t = cfg.order;
    let theta = ThetaSeries::standard(ell, t)?;
    checks.run("theta.quasi_periodicity", "tate::quasi_periodicity_residual", || {
        let mut bad = Vec::new();
        for j in 0..=2 {
            for (name, u) in [("zeta_ell", TorsionPoint::zeta_ell(ell)), ("zeta_2ell", TorsionPoint::zeta_2ell(ell))] {
                let r = quasi_periodicity_residual(&theta, j, &u, t)?;
                if !r.is_zero() {
                    bad.push(format!("j={j} u={name}: {r}"));
                }
            }
        }
        Ok((bad.is_empty(), json!({ "order": t, "nonzero": bad })))
    });
    checks.run("theta.zeros", "tate::theta_eval", || {
        let mut bad = Vec::new();
        for j in 0..=2 {
            let v = theta_eval(&theta, &TorsionPoint::new(ell, 0, j * ell as i64), t)?;
            if !v.is_zero() {
                bad.push(format!("theta(q^({j}/2)) = {v}"));
            }
        }
        Ok((bad.is_empty(), json!({ "points": ["1", "q^(1/2)", "q"], "nonzero": bad })))
    });
    checks.run("theta.value_ratio", "tate::theta_ratio_check", || {
        let mut rows = Vec::new();
        let mut ok = true;
        for j in 0..=ell_star(ell) {
            let c = theta_ratio_check(ell, j, t)?;
            ok &= c.matches;
            rows.push(json!({ "j": j, "closed_form": c.closed_form.to_string(), "matches": c.matches }));
        }
        Ok((ok, Value::Array(rows)))
    });
    Ok(json!({ "theta_table": to_value(&theta_table(ell, &cfg.vq, t)?) }))
}

fn ansatz_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let field = cfg.field()?;
    let point = parse_base(&cfg.base, &field, cfg.ell)?;
    checks.run("ansatz.profile_scaling", "ansatz::SigmaPoint::valuation_profile", || {
        let prof = point.valuation_profile();
        let ok = prof.iter().enumerate().all(|(i, v)| *v == &prof[0] * Rat::int(((i + 1) * (i + 1)) as i64));
        Ok((ok, to_value(&prof)))
    });
    checks.run("ansatz.special_anchor", "ansatz::SigmaPoint::special", || {
        let sp = SigmaPoint::special(&field, cfg.ell)?;
        let ok = sp.valuation_profile().last() == Some(&Rat::one());
        Ok((ok, json!({ "profile": to_value(&sp.valuation_profile()), "anchor_index": sp.anchor_index() })))
    });
    checks.run("ansatz.action_closure", "ansatz::SigmaPoint::act", || {
        let mut rows = Vec::new();
        for g in [TiltAut::identity(), TiltAut::frobenius_power(1), TiltAut::frobenius_power(-1), TiltAut::coefficient_galois(1)] {
            let img = point.act(&g)?;
            let scale = g.valuation_scale(cfg.p);
            let expected: Vec<Rat> = point.valuation_profile().iter().map(|v| v * &scale).collect();
            if img.valuation_profile() != expected {
                return Ok((false, json!({ "aut": g.to_string(), "profile": to_value(&img.valuation_profile()) })));
            }
            rows.push(json!({ "aut": g.to_string(), "base": img.base().to_string() }));
        }
        Ok((true, Value::Array(rows)))
    });
    checks.run("ansatz.product_valuation", "ansatz::SigmaPoint::product_valuation", || {
        let n = crate::ansatz::sum_of_squares(point.ell_star());
        let v = point.product_valuation()?;
        Ok((v == point.base_valuation() * Rat::int(n), json!({ "sum_j2": n, "valuation": v.to_string() })))
    });
    Ok(to_value(&AnsatzReport::from(&point)))
}

/// Columns of the pilot-bound CSV table.
pub const TABLE_COLUMNS: [&str; 10] = [
    "ell",
    "ell_star",
    "vq",
    "pilot_sum",
    "rhs",
    "margin",
    "verdict",
    "sign_test",
    "normalized_lhs",
    "normalized_rhs",
];

pub const TABLE_ELLS: [u32; 5] = [3, 5, 7, 11, 13];

fn table_row(r: &BoundReport) -> Vec<String> {
    vec![
        r.ell.to_string(),
        r.ell_star.to_string(),
        r.vq.to_string(),
        r.pilot_sum.to_string(),
        r.rhs.to_string(),
        r.margin.to_string(),
        r.verdict.to_string(),
        r.sign_test.to_string(),
        r.normalized_lhs.to_string(),
        r.normalized_rhs.to_string(),
    ]
}

/// Table of bound reports, one per `ℓ`. The bound does not involve the
/// theta series, so `ℓ = p` is allowed here.
pub fn bound_table(cfg: &RunConfig, ells: &[u32]) -> Result<Vec<BoundReport>> {
    let ring = cfg.ring()?;
    let grid = cfg.grid_with_zero();
    ells.iter()
        .map(|&l| lower_bound_check(&ring, l, &cfg.vq, &grid))
        .collect()
}

fn pilot_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let ring = cfg.ring()?;
    let ell = cfg.ell;
    let grid = cfg.grid_with_zero();
    let report = lower_bound_check(&ring, ell, &cfg.vq, &grid)?;
    checks.run("pilot.lower_bound", "pilot::lower_bound_check", || {
        // ℓ = 3 is the equality case where the verdict must be false
        let expected = ell > 3;
        let ok = report.verdict == expected
            && report.verdict == report.sign_test
            && report.pilot_sum == report.closed_form
            && report.rho_independent;
        Ok((ok, json!({
            "lhs": report.pilot_sum.to_string(),
            "rhs": report.rhs.to_string(),
            "verdict": report.verdict,
            "expected_verdict": expected,
        })))
    });
    checks.run("pilot.sup_witness", "pilot::sup_with_tau", || {
        let ok = report.sup.iter().all(|s| s.witnessed <= report.pilot_sum && s.floor <= s.witnessed);
        Ok((ok, to_value(&report.sup)))
    });
    checks.run("pilot.canonical_sum", "pilot::pilot_sum", || {
        let pt = SigmaPoint::canonical(&ring.field, ell)?;
        let s = pilot_sum(&ring, &pt, &cfg.vq, &Rho::new(Rat::zero())?)?;
        let expected = canonical_sum_closed_form(ell, &cfg.vq)?;
        Ok((s == expected, json!({ "sum": s.to_string(), "expected": expected.to_string() })))
    });
    checks.run("pilot.trivial_upper_bound", "pilot::trivial_upper_bound_check", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let sample = build_sample(&ring, ell, &cfg.vq, &mut rng, 2)?;
        let rep = trivial_upper_bound_check(&ring, &sample)?;
        Ok((rep.holds && rep.checked >= 100, to_value(&rep)))
    });
    checks.run("pilot.corollary_c", "pilot::corollary_c_check", || {
        let c = corollary_c_check(&ring, ell, &cfg.vq)?;
        Ok((c.c_at_least_one, to_value(&c)))
    });
    let mut data = json!({ "bound": to_value(&report) });
    if cfg.table {
        data["table"] = to_value(&bound_table(cfg, &TABLE_ELLS)?);
    }
    Ok(data)
}

fn random_ints<R: Rng>(rng: &mut R, p: u64, n: usize) -> WittVec<BigInt> {
    WittVec::new(p, (0..n).map(|_| BigInt::from(rng.gen_range(-50i64..=50))).collect())
}

fn witt_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for (id, use_mul) in [("witt.ghost_add", false), ("witt.ghost_mul", true)] {
        let mut cases = Vec::new();
        for p in [2u64, 3, 5] {
            for n in 1..=MAX_WITT_LEN {
                for _ in 0..200 {
                    cases.push((random_ints(&mut rng, p, n), random_ints(&mut rng, p, n)));
                }
            }
        }
        let reference = if use_mul { "witt::witt_mul" } else { "witt::witt_add" };
        checks.run(id, reference, || {
            for (a, b) in &cases {
                let c = if use_mul { witt_mul(&Integers, a, b)? } else { witt_add(&Integers, a, b)? };
                let (ga, gb, gc) = (ghost(a), ghost(b), ghost(&c));
                for i in 0..a.len() {
                    let expect = if use_mul { &ga[i] * &gb[i] } else { &ga[i] + &gb[i] };
                    if gc[i] != expect {
                        return Ok((false, json!({ "a": a.to_string(), "b": b.to_string(), "component": i })));
                    }
                }
            }
            Ok((true, json!({ "cases": cases.len() })))
        });
    }
    checks.run("witt.s1_at_two", "witt::derive_witt_polys", || {
        let set = derive_witt_polys(2, 2)?;
        let s = set.sum[1].render(&set.var_names());
        Ok((s == "X1 + Y1 - X0*Y0", json!(s)))
    });
    checks.run("witt.teichmuller_multiplicative", "witt::teichmuller", || {
        let f = FiniteField(cfg.field()?);
        let n = cfg.witt_len;
        for _ in 0..50 {
            let x = random_unit(&f.0, &mut rng);
            let y = random_unit(&f.0, &mut rng);
            let lhs = witt_mul(&f, &teichmuller(&f, cfg.p, &x, n), &teichmuller(&f, cfg.p, &y, n))?;
            let rhs = teichmuller(&f, cfg.p, &x.mul(&y), n);
            if lhs != rhs {
                return Ok((false, json!({ "x": x.to_string(), "y": y.to_string() })));
            }
        }
        Ok((true, json!({ "pairs": 50, "p": cfg.p, "n": n })))
    });
    Ok(json!({ "primes": [2, 3, 5], "max_len": MAX_WITT_LEN }))
}

/// Random 1-unit `1 + c·t^s` or `1 + c·t^s + c'·t^{s'}`.
pub fn random_one_unit<R: Rng>(field: &std::sync::Arc<FqField>, rng: &mut R) -> Result<HahnElt> {
    let one = HahnElt::one(field);
    let mut e = one.add(&HahnElt::monomial(random_unit(field, rng), random_positive_rat(rng, 4, 2)))?;
    if rng.gen_bool(0.5) {
        e = e.add(&HahnElt::monomial(random_unit(field, rng), random_positive_rat(rng, 6, 2)))?;
    }
    Ok(e)
}

fn loglink_suite(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let p = cfg.p;
    let diagram = diagram_check(p, cfg.degree)?;
    let d = &diagram;
    checks.run("loglink.artin_hasse_log", "loglink::artin_hasse", || {
        Ok((d.ah_log_residual_zero, json!({ "degree": d.degree })))
    });
    checks.run("loglink.artin_hasse_integral", "loglink::artin_hasse", || {
        Ok((d.ah_integral_degree == d.degree, json!({ "integral_through": d.ah_integral_degree })))
    });
    checks.run("loglink.inverse", "loglink::series_compositional_inverse", || {
        Ok((d.inverse_identities, json!({ "degree": d.degree })))
    });
    checks.run("loglink.additivity", "loglink::formal_group_law", || {
        Ok((d.additivity_residual_zero && d.group_law_integral, json!({ "low_terms": d.group_law_low_terms })))
    });
    let ring = cfg.ring()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    checks.run("loglink.phi_eigen", "bring::phi_eigen_check", || {
        let rs = cfg.positive_grid();
        let mut discriminating = 0;
        for _ in 0..20 {
            let eps = random_one_unit(&ring.field, &mut rng)?;
            for c in phi_eigen_check(&ring, &eps, 6, &rs)? {
                if !c.holds {
                    return Ok((false, json!({ "eps": eps.to_string(), "r": c.r.to_string(), "difference": c.difference.to_string() })));
                }
                if let (Some(l), Some(t)) = (c.log_norm.exact(), c.tail_bound.as_ref()) {
                    discriminating += usize::from(l < t);
                }
            }
        }
        Ok((true, json!({ "units": 20, "radii": to_value(&rs), "discriminating": discriminating })))
    });
    checks.run("loglink.padic_log", "loglink::padic_log_unit", || {
        let n = 12;
        let m = big_pow(p, n);
        let step = if p == 2 { 4 } else { p as i64 };
        for _ in 0..50 {
            let a = 1 + step * rng.gen_range(0..100_000i64);
            let b = 1 + step * rng.gen_range(0..100_000i64);
            let ab = (BigInt::from(a) * b) % &m;
            let lhs = padic_log_unit(&PadicInt::new(p, n, ab), n)?;
            let rhs = padic_log_unit(&PadicInt::new(p, n, a), n)?.add(&padic_log_unit(&PadicInt::new(p, n, b), n)?)?;
            if lhs != rhs {
                return Ok((false, json!({ "a": a, "b": b })));
            }
        }
        Ok((true, json!({ "pairs": 50, "precision": n })))
    });
    checks.run("loglink.valuation_link", "loglink::valuation_link_check", || {
        let point = SigmaPoint::special(&ring.field, cfg.ell)?;
        let j2 = point.ell_star().min(2);
        let u = PadicInt::new(p, 10, if p == 2 { 5 } else { 1 + p as i64 });
        let eps = HahnElt::one(&ring.field).add(&HahnElt::t(&ring.field))?;
        let c = valuation_link_check(&ring, &point, &u, &eps, 1, j2, 6)?;
        Ok((c.ratio_holds, to_value(&c)))
    });
    Ok(json!({ "diagram": to_value(&diagram) }))
}

fn run_member(suite: Suite, cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    match suite {
        Suite::ThetaCheck => theta_suite(cfg, checks),
        Suite::Ansatz => ansatz_suite(cfg, checks),
        Suite::PilotBound => pilot_suite(cfg, checks),
        Suite::WittSelftest => witt_suite(cfg, checks),
        Suite::LoglinkCheck => loglink_suite(cfg, checks),
        Suite::All => unreachable!("aggregate suite has no body"),
    }
}

/// Run a suite. Configuration problems are `Usage` errors; a failure inside a
/// suite's setup is recorded as a failing check named after the suite.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    if suite == Suite::Ansatz || suite == Suite::All {
        parse_base(&cfg.base, &cfg.field()?, cfg.ell)
            .map_err(|e| if let Error::Usage(_) = e { e } else { Error::Usage(e.to_string()) })?;
    }
    let start = std::time::Instant::now();
    let members: Vec<Suite> = if suite == Suite::All { Suite::MEMBERS.to_vec() } else { vec![suite] };
    let mut checks = Checks(Vec::new());
    let mut data = serde_json::Map::new();
    for m in members {
        match run_member(m, cfg, &mut checks) {
            Ok(v) => {
                data.insert(m.name().into(), v);
            }
            Err(e) => checks.run(&format!("{}.setup", m.name()), m.name(), || Err(e)),
        }
    }
    let data = if suite == Suite::All {
        Value::Object(data)
    } else {
        data.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null)
    };
    Ok(Report {
        suite: suite.name().into(),
        checks: checks.0,
        config: to_value(cfg),
        data,
        version: (!cfg.canonical).then(|| env!("CARGO_PKG_VERSION").to_string()),
        elapsed_ms: (!cfg.canonical).then(|| start.elapsed().as_millis()),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render a report. CSV emits the pilot table when present, otherwise one
/// line per check.
pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!("suite: {}\n", report.suite);
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                };
                let _ = writeln!(s, "{tag} {} [{}] {}", c.id, c.reference, c.witness);
            }
            let passed = report.checks.iter().filter(|c| c.status == Status::Pass).count();
            let _ = writeln!(s, "{passed}/{} checks passed", report.checks.len());
            s
        }
        Format::Csv => {
            let table = report.data.get("table").or_else(|| {
                report.data.get("pilot-bound").and_then(|d| d.get("table"))
            });
            let mut s = String::new();
            match table.and_then(|t| serde_json::from_value::<Vec<Value>>(t.clone()).ok()) {
                Some(rows) => {
                    s.push_str(&TABLE_COLUMNS.join(","));
                    s.push('\n');
                    for row in rows {
                        let cells: Vec<String> = TABLE_COLUMNS
                            .iter()
                            .map(|k| match &row[*k] {
                                Value::String(x) => csv_field(x),
                                other => other.to_string(),
                            })
                            .collect();
                        s.push_str(&cells.join(","));
                        s.push('\n');
                    }
                }
                None => {
                    s.push_str("id,ref,status\n");
                    for c in &report.checks {
                        let st = if c.status == Status::Pass { "pass" } else { "fail" };
                        let _ = writeln!(s, "{},{},{st}", csv_field(&c.id), csv_field(&c.reference));
                    }
                }
            }
            s
        }
    }
}

/// Table rows exactly as the CSV prints them.
pub fn table_csv(reports: &[BoundReport]) -> String {
    let mut s = TABLE_COLUMNS.join(",");
    s.push('\n');
    for r in reports {
        s.push_str(&table_row(r).join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_validation() {
        let m = parse_config_file("p = 5\n# comment\nell=7\nrho-grid = 1, 1/2\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply(&m).unwrap();
        assert_eq!((cfg.p, cfg.ell), (5, 7));
        assert_eq!(cfg.rho_grid, vec![Rat::one(), Rat::new(1, 2)]);
        assert!(cfg.validate().is_ok());
        cfg.ell = 5;
        assert!(matches!(cfg.validate(), Err(Error::Usage(_))));
        assert!(parse_config_file("nonsense").is_err());
        assert!(cfg.apply(&parse_config_file("bogus=1").unwrap()).is_err());
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = Report {
            suite: "x".into(),
            checks: vec![],
            config: Value::Null,
            data: Value::Null,
            version: None,
            elapsed_ms: None,
        };
        let v: Value = serde_json::from_str(&emit(&r, Format::Json)).unwrap();
        assert_eq!(v["checks"], json!([]));
    }

    #[test]
    fn pilot_table_csv() {
        let cfg = RunConfig::default();
        let rows = bound_table(&cfg, &[3, 5, 7]).unwrap();
        let csv = table_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "3,1,1,1/6,1/6,0,false,false,1/6,1/6");
        assert_eq!(lines[2], "5,2,1,1/8,1/5,3/40,true,true,1/16,1/10");
    }
}
