//! Tri-state evaluation of the sufficient conditions for non-uniqueness and
//! the scans over power sets and lifts.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{BoundReport, Interval, Provenance, Quantity};
use crate::cayley::Ball;
use crate::error::{Error, Result};
use crate::gensets::{lift_generating_set, power_multiset, power_set, product_set, GenSet};
use crate::groups::{Element, GroupSpec};
use crate::isoperimetry::{iso_scan_on_ball, iso_upper_via_boxes, mohar_propagate};
use crate::spectral::{
    rho_exact_catalog, rho_lower, rho_ratio_estimate, rho_upper_power, walk_series,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    #[serde(rename = "BS3")]
    Bs3,
    #[serde(rename = "GROWTH4")]
    Growth4,
    #[serde(rename = "RADIUS_HALF")]
    RadiusHalf,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Bs3 => "BS3",
            Condition::Growth4 => "GROWTH4",
            Condition::RadiusHalf => "RADIUS_HALF",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedTrue,
    CertifiedFalse,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CertifiedTrue => "certified-true",
            Verdict::CertifiedFalse => "certified-false",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputBound {
    pub quantity: Quantity,
    /// `"lower"` or `"upper"`.
    pub endpoint: &'static str,
    pub value: f64,
    pub provenance: Provenance,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub verdict: Verdict,
    /// Certified enclosure of the decisive expression; `None` where no
    /// certified endpoint was available on that side.
    pub expression_interval: [Option<f64>; 2],
    pub threshold: f64,
    pub inputs: Vec<InputBound>,
    pub notes: Vec<String>,
}

/// Certified-true iff `upper < threshold`, certified-false iff
/// `lower >= threshold`.
pub fn verdict(lower: Option<f64>, upper: Option<f64>, threshold: f64) -> Verdict {
    if upper.is_some_and(|u| u < threshold) {
        Verdict::CertifiedTrue
    } else if lower.is_some_and(|l| l >= threshold) {
        Verdict::CertifiedFalse
    } else {
        Verdict::Inconclusive
    }
}

struct Inputs(Vec<InputBound>);

impl Inputs {
    fn lower(&mut self, r: &BoundReport) -> Option<f64> {
        self.take(r, "lower")
    }

    fn upper(&mut self, r: &BoundReport) -> Option<f64> {
        self.take(r, "upper")
    }

    fn take(&mut self, r: &BoundReport, side: &'static str) -> Option<f64> {
        let e = if side == "lower" { &r.lower } else { &r.upper };
        let e = e.as_ref().filter(|e| e.provenance.is_certified())?;
        self.0.push(InputBound {
            quantity: r.quantity,
            endpoint: side,
            value: e.value,
            provenance: e.provenance,
            source: e.source.clone(),
        });
        Some(e.value)
    }
}

fn expect(r: &BoundReport, q: Quantity) -> Result<()> {
    if r.quantity != q {
        return Err(Error::InvalidArgument(format!(
            "expected a {q} report, got {}",
            r.quantity
        )));
    }
    Ok(())
}

fn report(
    condition: Condition,
    lo: Option<f64>,
    hi: Option<f64>,
    threshold: f64,
    inputs: Inputs,
) -> ConditionReport {
    let mut notes = Vec::new();
    if lo.is_none() && hi.is_none() {
        notes.push("no certified endpoints available; only heuristic inputs".to_string());
    }
    ConditionReport {
        condition,
        verdict: verdict(lo, hi, threshold),
        expression_interval: [lo, hi],
        threshold,
        inputs: inputs.0,
        notes,
    }
}

/// `ρ p_c |S| < 1`.
pub fn check_bs3(rho: &BoundReport, pc: &BoundReport, size_s: usize) -> Result<ConditionReport> {
    expect(rho, Quantity::Rho)?;
    expect(pc, Quantity::Pc)?;
    let mut inp = Inputs(Vec::new());
    let n = Interval::point(size_s as f64);
    let lo = match (inp.lower(rho), inp.lower(pc)) {
        (Some(r), Some(p)) => Some(Interval::point(r).mul(Interval::point(p)).mul(n).lo),
        _ => None,
    };
    let hi = match (inp.upper(rho), inp.upper(pc)) {
        (Some(r), Some(p)) => Some(Interval::point(r).mul(Interval::point(p)).mul(n).hi),
        _ => None,
    };
    Ok(report(Condition::Bs3, lo, hi, 1.0, inp))
}

/// `ρ |S| / gr < 1`. A certified-true verdict implies `ρ(S^k) → 0`.
pub fn check_growth4(
    rho: &BoundReport,
    size_s: usize,
    gr: &BoundReport,
) -> Result<ConditionReport> {
    expect(rho, Quantity::Rho)?;
    expect(gr, Quantity::Gr)?;
    if let Some(g) = gr.certified_lower() {
        if g <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "growth rate lower endpoint {g} must be positive"
            )));
        }
    }
    let mut inp = Inputs(Vec::new());
    let n = Interval::point(size_s as f64);
    let lo = match (inp.lower(rho), inp.upper(gr)) {
        (Some(r), Some(g)) => Some(Interval::point(r).mul(n).div(Interval::point(g)).lo),
        _ => None,
    };
    let hi = match (inp.upper(rho), inp.lower(gr)) {
        (Some(r), Some(g)) => Some(Interval::point(r).mul(n).div(Interval::point(g)).hi),
        _ => None,
    };
    let mut out = report(Condition::Growth4, lo, hi, 1.0, inp);
    if out.verdict == Verdict::CertifiedTrue {
        out.notes
            .push("rho(S^k) -> 0 as k -> infinity: the group has infinitesimally small spectral radius along S^k".into());
    }
    Ok(out)
}

/// `ρ < 1/2`.
pub fn check_radius_half(rho: &BoundReport) -> Result<ConditionReport> {
    expect(rho, Quantity::Rho)?;
    let mut inp = Inputs(Vec::new());
    let lo = inp.lower(rho);
    let hi = inp.upper(rho);
    Ok(report(Condition::RadiusHalf, lo, hi, 0.5, inp))
}

/// Work budget (vertices × degree) for the balls built per scan cell.
pub const DEFAULT_WORK_BUDGET: usize = 40_000_000;

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub max_vertices: usize,
    pub work_budget: usize,
    /// Largest ball radius tried per cell.
    pub max_radius: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            max_vertices: crate::cayley::DEFAULT_MAX_VERTICES,
            work_budget: DEFAULT_WORK_BUDGET,
            max_radius: 8,
        }
    }
}

/// Largest ball (radius ≤ `max_radius`) whose adjacency fits the budget.
fn budget_ball(s: &GenSet, opts: &ScanOptions) -> Result<Ball> {
    let cap = (opts.work_budget / s.len().max(1))
        .min(opts.max_vertices)
        .max(2);
    let mut best = Ball::build(s, 1, cap.max(s.len() + 1))?;
    for r in 2..=opts.max_radius {
        match Ball::build(s, r, cap) {
            Ok(b) => best = b,
            Err(Error::SizeLimit { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConductanceRow {
    pub k: u32,
    /// `|S·…·S|` with the identity counted when it occurs.
    pub product_size: usize,
    /// `|S^k \ {e}|`, the degree of the simple Cayley graph.
    pub power_size: usize,
    /// Power bound with the identity-counted product set.
    pub rho_upper_product: Option<f64>,
    /// Power bound for the simple generating set.
    pub rho_upper: Option<f64>,
    /// False when no certified ρ(S) is known or the bound is at least 1.
    pub rho_upper_certified: bool,
    pub rho_lower: Option<f64>,
    pub walk_horizon: u32,
    pub h_lower: Option<f64>,
    pub h_upper: Option<f64>,
    pub family: &'static str,
    pub family_max: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConductanceScan {
    pub spec: String,
    pub rows: Vec<ConductanceRow>,
    /// First `k` that exceeded the resource cap, if any.
    pub truncated_at: Option<u32>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ConductanceScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,product_size,power_size,rho_upper_product,rho_upper,rho_upper_certified,rho_lower,walk_horizon,h_lower,h_upper,family,family_max\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.k,
                r.product_size,
                r.power_size,
                opt(r.rho_upper_product),
                opt(r.rho_upper),
                r.rho_upper_certified,
                opt(r.rho_lower),
                r.walk_horizon,
                opt(r.h_lower),
                opt(r.h_upper),
                r.family,
                r.family_max
            ));
        }
        if let Some(k) = self.truncated_at {
            out.push_str(&format!("# truncated at k={k}: resource cap exceeded\n"));
        }
        out
    }
}

fn conductance_cell(s: &GenSet, k: u32, opts: &ScanOptions) -> Result<ConductanceRow> {
    let product = product_set(s, k)?;
    if product.len() > opts.max_vertices {
        return Err(Error::SizeLimit {
            radius: k,
            cap: opts.max_vertices,
            hint: Some("power set exceeds the vertex cap".into()),
        });
    }
    let x = power_set(s, k)?;
    let rho_s = rho_exact_catalog(s)
        .map(|r| BoundReport::exact(Quantity::Rho, r, "catalog"))
        .and_then(|r| r.upper);

    let mut rho_upper_product = None;
    let mut rho_upper_report = None;
    if let Some(e) = &rho_s {
        rho_upper_product = rho_upper_power(e, s.len(), product.len(), k)?.certified_upper();
        let r = rho_upper_power(e, s.len(), x.len(), k)?;
        rho_upper_report = Some(r);
    }
    let rho_upper = rho_upper_report.as_ref().and_then(|r| r.certified_upper());
    let certified = rho_upper.is_some_and(|u| u < 1.0);
    let h_lower = match (&rho_upper_report, certified) {
        (Some(r), true) => mohar_propagate(r, x.len())?.certified_lower(),
        _ => None,
    };

    let (h_upper, family, family_max, ball) = if matches!(s.spec(), GroupSpec::FreeAbelian(_)) {
        let sides = [8, 16, 32, 64];
        let scan = iso_upper_via_boxes(&x, &sides)?;
        (scan.h.certified_upper(), "box", 64, None)
    } else {
        let ball = budget_ball(&x, opts)?;
        let radii: Vec<u32> = (1..=ball.radius()).collect();
        let scan = iso_scan_on_ball(&x, &ball, &radii, None)?;
        (scan.h.certified_upper(), "ball", ball.radius(), Some(ball))
    };

    let radius = match &ball {
        Some(b) => b.radius(),
        None => budget_ball(&x, opts)?.radius(),
    };
    let horizon = 2 * radius;
    let series = walk_series(&x, horizon, opts.max_vertices)?;
    let rho_lower = rho_lower(&series)?.certified_lower();

    Ok(ConductanceRow {
        k,
        product_size: product.len(),
        power_size: x.len(),
        rho_upper_product,
        rho_upper,
        rho_upper_certified: certified,
        rho_lower,
        walk_horizon: horizon,
        h_lower,
        h_upper,
        family,
        family_max,
    })
}

/// Bounds on `h(S^k)` for `k = 1..=kmax`.
pub fn uniform_conductance_scan(
    s: &GenSet,
    kmax: u32,
    opts: &ScanOptions,
) -> Result<ConductanceScan> {
    if kmax == 0 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    let cells: Vec<Result<ConductanceRow>> = (1..=kmax)
        .into_par_iter()
        .map(|k| conductance_cell(s, k, opts))
        .collect();
    let mut rows = Vec::new();
    let mut truncated_at = None;
    for (k, cell) in (1..=kmax).zip(cells) {
        match cell {
            Ok(row) => rows.push(row),
            Err(e) if e.is_resource_limit() => {
                truncated_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(Error::SizeLimit {
            radius: 1,
            cap: opts.max_vertices,
            hint: Some("no scan cell fits the resource cap".into()),
        });
    }
    Ok(ConductanceScan {
        spec: s.spec().to_string(),
        rows,
        truncated_at,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftRow {
    pub n: u32,
    /// `|S_q|^n`, the lift before symmetric closure.
    pub raw_size: usize,
    pub genset_size: usize,
    pub horizon: u32,
    pub rho_lower: f64,
    pub ratio_estimate: Option<f64>,
    /// Ratio estimate of `S_q` on the quotient at the same horizon.
    pub quotient_estimate: Option<f64>,
    /// `P^(n)_{2m} = P_{2mn}` checked exactly for the listed `m`.
    pub identity_checked: Vec<u32>,
    pub identity_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftScan {
    pub ambient: String,
    pub rows: Vec<LiftRow>,
    /// Ratio estimates strictly decrease along `n`.
    pub decreasing: bool,
    pub truncated_at: Option<u32>,
}

impl LiftScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,raw_size,genset_size,horizon,rho_lower,ratio_estimate,quotient_estimate,identity_holds\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.n,
                r.raw_size,
                r.genset_size,
                r.horizon,
                r.rho_lower,
                opt(r.ratio_estimate),
                opt(r.quotient_estimate),
                r.identity_holds
            ));
        }
        out.push_str(&format!(
            "# ratio estimates strictly decreasing in n: {}\n",
            self.decreasing
        ));
        if let Some(n) = self.truncated_at {
            out.push_str(&format!("# truncated at n={n}: resource cap exceeded\n"));
        }
        out
    }
}

/// Checks `P^(n)_{2m} = P_{2mn}` for `m = 1..=mmax`.
pub fn multiset_identity(s: &GenSet, n: u32, mmax: u32, max_vertices: usize) -> Result<bool> {
    let base = walk_series(s, 2 * mmax * n, max_vertices)?;
    let power = walk_series(&power_multiset(s, n)?, 2 * mmax, max_vertices)?;
    Ok((1..=mmax).all(|m| power.p(2 * m) == base.p(2 * m * n)))
}

fn lift_cell(
    ambient: &GroupSpec,
    s_q: &GenSet,
    n: u32,
    horizon: u32,
    quotient: Option<f64>,
    max_vertices: usize,
) -> Result<LiftRow> {
    let lift = lift_generating_set(ambient, s_q, n)?;
    let series = walk_series(&lift.genset, horizon, max_vertices)?;
    let lower = rho_lower(&series)?;
    let mmax = if n == 1 { 0 } else { 2 };
    let identity_holds = mmax == 0 || multiset_identity(s_q, n, mmax, max_vertices)?;
    Ok(LiftRow {
        n,
        raw_size: lift.raw.len(),
        genset_size: lift.genset.len(),
        horizon,
        rho_lower: lower.certified_lower().unwrap_or(0.0),
        ratio_estimate: rho_ratio_estimate(&series).ok(),
        quotient_estimate: quotient,
        identity_checked: (1..=mmax).collect(),
        identity_holds,
    })
}

/// ρ estimates for the lifts `S̄_n` of `S_q^(n)` into `ambient = Q × N`.
pub fn lift_rho_scan(
    ambient: &GroupSpec,
    s_q: &GenSet,
    nmax: u32,
    horizon: u32,
    max_vertices: usize,
) -> Result<LiftScan> {
    if nmax == 0 || horizon < 2 {
        return Err(Error::InvalidArgument(
            "lift scan needs nmax >= 1 and horizon >= 2".into(),
        ));
    }
    let quotient = walk_series(s_q, horizon, max_vertices)
        .ok()
        .and_then(|q| rho_ratio_estimate(&q).ok());
    let cells: Vec<Result<LiftRow>> = (1..=nmax)
        .into_par_iter()
        .map(|n| lift_cell(ambient, s_q, n, horizon, quotient, max_vertices))
        .collect();
    let mut rows = Vec::new();
    let mut truncated_at = None;
    for (n, cell) in (1..=nmax).zip(cells) {
        match cell {
            Ok(row) => rows.push(row),
            Err(e) if e.is_resource_limit() => {
                truncated_at = Some(n);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let decreasing = rows
        .windows(2)
        .all(|w| match (w[0].ratio_estimate, w[1].ratio_estimate) {
            (Some(a), Some(b)) => b < a,
            _ => false,
        });
    Ok(LiftScan {
        ambient: ambient.to_string(),
        rows,
        decreasing,
        truncated_at,
    })
}

/// Projection of a lift element onto its quotient coordinate.
pub fn project(g: &Element) -> Option<&Element> {
    match g {
        Element::Tuple(parts) => parts.first(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{growth_estimate, DEFAULT_MAX_VERTICES};
    use crate::percolation::{pc_certified, phi_from_catalog};

    fn std(spec: GroupSpec) -> GenSet {
        GenSet::standard(&spec).unwrap()
    }

    fn catalog_rho(s: &GenSet) -> BoundReport {
        BoundReport::exact(Quantity::Rho, rho_exact_catalog(s).unwrap(), "catalog")
    }

    fn catalog_gr(s: &GenSet) -> BoundReport {
        growth_estimate(s, 4, DEFAULT_MAX_VERTICES).unwrap()
    }

    #[test]
    fn growth4_examples() {
        let f2 = std(GroupSpec::Free(2));
        let r = check_growth4(&catalog_rho(&f2), 4, &catalog_gr(&f2)).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedFalse);
        let want = 2.0 / 3f64.sqrt();
        let [lo, hi] = r.expression_interval;
        assert!(lo.unwrap() <= want && want <= hi.unwrap());

        let f3 = std(GroupSpec::Free(3));
        let r = check_growth4(&catalog_rho(&f3), 6, &catalog_gr(&f3)).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedTrue);
        assert!((r.expression_interval[1].unwrap() - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(!r.notes.is_empty());

        let z2 = std(GroupSpec::FreeAbelian(2));
        let r = check_growth4(&catalog_rho(&z2), 4, &catalog_gr(&z2)).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedFalse);
        assert_eq!(r.expression_interval, [Some(4.0), Some(4.0)]);

        let bad = BoundReport::empty(Quantity::Gr).with_lower(0.0, Provenance::CertifiedBound, "x");
        assert!(check_growth4(&catalog_rho(&f2), 4, &bad).is_err());
    }

    #[test]
    fn radius_half_examples() {
        let f13 = std(GroupSpec::Free(13));
        assert_eq!(
            check_radius_half(&catalog_rho(&f13)).unwrap().verdict,
            Verdict::CertifiedTrue
        );
        let lower = BoundReport::empty(Quantity::Rho).with_lower(
            0.5749,
            Provenance::CertifiedBound,
            "walk",
        );
        assert_eq!(
            check_radius_half(&lower).unwrap().verdict,
            Verdict::CertifiedFalse
        );
        let straddle = BoundReport::empty(Quantity::Rho)
            .with_lower(0.45, Provenance::CertifiedBound, "a")
            .with_upper(0.55, Provenance::CertifiedBound, "b");
        assert_eq!(
            check_radius_half(&straddle).unwrap().verdict,
            Verdict::Inconclusive
        );
    }

    #[test]
    fn bs3_examples() {
        let f2 = std(GroupSpec::Free(2));
        let pc = pc_certified(4, phi_from_catalog(&f2).as_ref());
        let r = check_bs3(&catalog_rho(&f2), &pc, 4).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedFalse);
        assert!((r.expression_interval[0].unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-12);

        let f13 = std(GroupSpec::Free(13));
        let pc = pc_certified(26, phi_from_catalog(&f13).as_ref());
        let r = check_bs3(&catalog_rho(&f13), &pc, 26).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedTrue);
        // h >= 26(1-5/13)/25 = 16/25, phi >= 16.64, p_c <= 1/17.64
        let want = 5.0 / 13.0 * 26.0 / 17.64;
        assert!((r.expression_interval[1].unwrap() - want).abs() < 1e-12);

        let heur = BoundReport::empty(Quantity::Rho).with_estimate(0.1, "guess");
        let r = check_bs3(
            &heur,
            &BoundReport::empty(Quantity::Pc).with_estimate(0.1, "guess"),
            4,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.inputs.is_empty());
    }

    #[test]
    fn json_schema() {
        let f13 = std(GroupSpec::Free(13));
        let r = check_radius_half(&catalog_rho(&f13)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["condition"], "RADIUS_HALF");
        assert_eq!(v["verdict"], "certified-true");
        assert_eq!(v["expression_interval"].as_array().unwrap().len(), 2);
        assert_eq!(v["inputs"][0]["quantity"], "rho");
        assert_eq!(v["inputs"][0]["endpoint"], "lower");
        assert_eq!(v["inputs"][0]["provenance"], "certified-exact");
    }

    #[test]
    fn free_abelian_scan_uses_boxes() {
        let z2 = std(GroupSpec::FreeAbelian(2));
        let scan = uniform_conductance_scan(&z2, 2, &ScanOptions::default()).unwrap();
        assert!(scan
            .rows
            .iter()
            .all(|r| r.family == "box" && r.h_upper.unwrap() < 0.1));
        assert!(scan
            .rows
            .iter()
            .all(|r| !r.rho_upper_certified && r.h_lower.is_none()));
    }

    #[test]
    fn lift_scan_small() {
        let amb = GroupSpec::DirectProduct(vec![GroupSpec::Free(2), GroupSpec::FreeAbelian(1)]);
        let scan =
            lift_rho_scan(&amb, &std(GroupSpec::Free(2)), 2, 4, DEFAULT_MAX_VERTICES).unwrap();
        assert_eq!(scan.rows[1].raw_size, 16);
        assert!(scan.rows.iter().all(|r| r.identity_holds));
    }
}
