//! Edge and vertex boundaries of finite sets, Følner deficiencies, the
//! conductance/spectral-radius inequalities, and ball-family upper bounds
//! on the isoperimetric constant.
//!
//! Explicit finite sets only ever certify *upper* bounds on φ and h. Lower
//! bounds come from a certified upper bound on ρ through
//! `|S|(1-ρ)/(|S|-1) <= h <= sqrt(1-ρ²)`.

use indexmap::IndexSet;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bounds::{BoundReport, Interval, Provenance, Quantity};
use crate::cayley::{Ball, EXTERIOR};
use crate::error::{Error, Result};
use crate::gensets::GenSet;
use crate::groups::{Element, GroupSpec};
use crate::spectral::rho_exact_catalog;

#[derive(Clone, Debug)]
pub struct FiniteSet {
    spec: GroupSpec,
    members: IndexSet<Element>,
}

impl FiniteSet {
    pub fn new(spec: &GroupSpec, members: impl IntoIterator<Item = Element>) -> Result<FiniteSet> {
        let members: IndexSet<Element> = members.into_iter().collect();
        if members.is_empty() {
            return Err(Error::InvalidArgument("finite set is empty".into()));
        }
        for g in &members {
            spec.validate_element(g)?;
        }
        Ok(FiniteSet {
            spec: spec.clone(),
            members,
        })
    }

    /// Vertices of `ball` at distance at most `r`.
    pub fn from_ball(ball: &Ball, r: u32) -> FiniteSet {
        FiniteSet {
            spec: ball.spec().clone(),
            members: (0..ball.ball_size(r))
                .map(|v| ball.vertex(v).clone())
                .collect(),
        }
    }

    /// `{0..side-1}^d` in `Z^d`.
    pub fn free_abelian_box(spec: &GroupSpec, side: u32) -> Result<FiniteSet> {
        let d = match spec {
            GroupSpec::FreeAbelian(d) => *d as usize,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "boxes need a free abelian group, got {spec}"
                )))
            }
        };
        if side == 0 {
            return Err(Error::InvalidArgument("box side must be positive".into()));
        }
        let mut members = IndexSet::new();
        let mut coord = vec![0i64; d];
        loop {
            members.insert(Element::Exponents(coord.clone()));
            let mut i = 0;
            while i < d {
                coord[i] += 1;
                if coord[i] < side as i64 {
                    break;
                }
                coord[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        Ok(FiniteSet {
            spec: spec.clone(),
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.members.contains(g)
    }

    pub fn members(&self) -> impl Iterator<Item = &Element> {
        self.members.iter()
    }

    /// `|sF \ F|` for one generator.
    fn shift_escape(&self, s: &Element) -> u64 {
        self.members
            .iter()
            .filter(|f| !self.members.contains(&self.spec.mul_unchecked(s, f)))
            .count() as u64
    }
}

fn check_context(s: &GenSet, f: &FiniteSet) -> Result<()> {
    if s.spec() != &f.spec {
        return Err(Error::InvalidArgument(format!(
            "set lives in {}, generators in {}",
            f.spec,
            s.spec()
        )));
    }
    Ok(())
}

/// `Σ_{s∈S} |sF \ F|`, the number of edges leaving `F`.
pub fn edge_boundary(s: &GenSet, f: &FiniteSet) -> Result<u64> {
    check_context(s, f)?;
    Ok(s.elements().iter().map(|g| f.shift_escape(g)).sum())
}

/// Number of vertices outside `F` adjacent to `F`.
pub fn vertex_boundary(s: &GenSet, f: &FiniteSet) -> Result<u64> {
    check_context(s, f)?;
    let mut outside: IndexSet<Element> = IndexSet::new();
    for x in f.members() {
        for g in s.elements() {
            let y = f.spec.mul_unchecked(g, x);
            if !f.contains(&y) {
                outside.insert(y);
            }
        }
    }
    Ok(outside.len() as u64)
}

/// `max_s |sF Δ F| / |F|`.
pub fn folner_deficiency(s: &GenSet, f: &FiniteSet) -> Result<Ratio<u64>> {
    check_context(s, f)?;
    let worst = s
        .elements()
        .iter()
        .map(|g| f.shift_escape(g))
        .max()
        .unwrap_or(0);
    Ok(Ratio::new(2 * worst, f.len() as u64))
}

/// `Σ_s |sF Δ F| / (|F| |S|)`.
pub fn average_folner_deficiency(s: &GenSet, f: &FiniteSet) -> Result<Ratio<u64>> {
    let total = edge_boundary(s, f)?;
    Ok(Ratio::new(2 * total, (f.len() * s.len()) as u64))
}

pub fn ratio_f64(r: Ratio<u64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn endpoint_value(report: &BoundReport, upper: bool) -> Result<Option<f64>> {
    let v = if upper {
        report.certified_upper()
    } else {
        report.certified_lower()
    };
    match v {
        Some(x) if !(0.0..=1.0).contains(&x) => Err(Error::InvalidArgument(format!(
            "{} endpoint {x} outside [0, 1]",
            report.quantity
        ))),
        v => Ok(v),
    }
}

/// Converts a ρ report into an h report or back, using
/// `|S|(1-ρ)/(|S|-1) <= h <= sqrt(1-ρ²)` and
/// `1 - h(|S|-1)/|S| <= ρ <= sqrt(1-h²)`.
pub fn mohar_propagate(input: &BoundReport, size_s: usize) -> Result<BoundReport> {
    if size_s < 2 {
        return Err(Error::InvalidArgument(
            "conductance bounds need |S| >= 2".into(),
        ));
    }
    let lo = endpoint_value(input, false)?;
    let hi = endpoint_value(input, true)?;
    if lo.is_none() && hi.is_none() {
        return Err(Error::NotCertified(format!(
            "{} report has no certified endpoint",
            input.quantity
        )));
    }
    let n = size_s as f64;
    let one = Interval::point(1.0);
    let frac = Interval::point(n).div(Interval::point(n - 1.0));
    let (target, lower, upper) = match input.quantity {
        Quantity::Rho => {
            let h_lo = hi.map(|r| frac.mul(one.sub(Interval::point(r))).lo);
            let h_hi = lo.map(|r| one.sub(Interval::point(r).powi(2)).sqrt().hi);
            (Quantity::H, h_lo, h_hi)
        }
        Quantity::H => {
            let r_lo = hi.map(|h| one.sub(Interval::point(h).div(frac)).lo);
            let r_hi = lo.map(|h| one.sub(Interval::point(h).powi(2)).sqrt().hi);
            (Quantity::Rho, r_lo, r_hi)
        }
        q => {
            return Err(Error::InvalidArgument(format!(
                "conductance inequalities relate rho and h, not {q}"
            )))
        }
    };
    let mut out = BoundReport::empty(target);
    let src = format!(
        "conductance inequality from {} (|S|={size_s})",
        input.quantity
    );
    if let Some(v) = lower {
        out = out.with_lower(v.clamp(0.0, 1.0), Provenance::CertifiedBound, &src);
    }
    if let Some(v) = upper {
        out = out.with_upper(v.clamp(0.0, 1.0), Provenance::CertifiedBound, &src);
    }
    Ok(out)
}

/// One member of an explicit set family.
#[derive(Clone, Debug, Serialize)]
pub struct IsoRow {
    /// Radius (balls) or side (boxes).
    pub k: u32,
    pub set_size: usize,
    pub edge_boundary: u64,
    pub phi_upper: f64,
    pub h_upper: f64,
    pub h_lower_mohar: Option<f64>,
    pub folner_max: f64,
    pub folner_avg: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoScan {
    pub rows: Vec<IsoRow>,
    pub phi: BoundReport,
    pub h: BoundReport,
}

impl IsoScan {
    /// `k, setsize, edge_boundary, phi_upper, h_upper, h_lower_mohar, folner_max, folner_avg`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,setsize,edge_boundary,phi_upper,h_upper,h_lower_mohar,folner_max,folner_avg\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.k,
                r.set_size,
                r.edge_boundary,
                r.phi_upper,
                r.h_upper,
                r.h_lower_mohar.map(|x| x.to_string()).unwrap_or_default(),
                r.folner_max,
                r.folner_avg
            ));
        }
        out
    }
}

/// Per-generator `|s B_j \ B_j|` for the sub-ball of radius `j`.
fn ball_escapes(ball: &Ball, j: u32) -> Vec<u64> {
    let mut esc = vec![0u64; ball.degree()];
    for v in 0..ball.ball_size(j) {
        for (i, &w) in ball.row(v).iter().enumerate() {
            if w == EXTERIOR || ball.dist(w as usize) > j {
                esc[i] += 1;
            }
        }
    }
    esc
}

fn upper_ratio(num: u64, den: u64) -> f64 {
    Interval::point(num as f64)
        .div(Interval::point(den as f64))
        .hi
}

/// Certified lower bound on h from a certified upper bound on ρ(S), when
/// the catalog knows ρ(S) or the caller supplies it.
pub fn h_lower_from_rho(rho: &BoundReport, size_s: usize) -> Option<f64> {
    mohar_propagate(rho, size_s)
        .ok()
        .and_then(|h| h.certified_lower())
}

fn family_reports(
    s: &GenSet,
    rows: &[IsoRow],
    rho: Option<&BoundReport>,
    family: &str,
) -> (BoundReport, BoundReport) {
    let n = s.len() as f64;
    let best = rows
        .iter()
        .min_by(|a, b| a.phi_upper.total_cmp(&b.phi_upper))
        .expect("non-empty family");
    let mut phi = BoundReport::empty(Quantity::Phi).with_upper(
        best.phi_upper,
        Provenance::CertifiedBound,
        &format!("{family} k={}", best.k),
    );
    let mut h = BoundReport::empty(Quantity::H).with_upper(
        best.h_upper,
        Provenance::CertifiedBound,
        &format!("{family} k={}", best.k),
    );
    if let Some(lo) = rho.and_then(|r| h_lower_from_rho(r, s.len())) {
        h = h.with_lower(lo, Provenance::CertifiedBound, "conductance inequality");
        phi = phi.with_lower(
            Interval::point(lo).scale(n).lo,
            Provenance::CertifiedBound,
            "|S| * h lower",
        );
    }
    (phi, h)
}

fn catalog_rho_report(s: &GenSet) -> Option<BoundReport> {
    rho_exact_catalog(s).map(|r| BoundReport::exact(Quantity::Rho, r, "catalog"))
}

/// Upper bounds on φ and h from the balls `B_r`, `r` in `radii`, computed
/// from a single ball of the largest radius. Lower bounds come from the
/// catalog ρ when known.
pub fn iso_upper_via_family(s: &GenSet, radii: &[u32], max_vertices: usize) -> Result<IsoScan> {
    let rmax = *radii
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidArgument("empty radius family".into()))?;
    let ball = Ball::build(s, rmax, max_vertices)?;
    iso_scan_on_ball(s, &ball, radii, catalog_rho_report(s).as_ref())
}

/// As [`iso_upper_via_family`] on a prebuilt ball with an explicit ρ report.
pub fn iso_scan_on_ball(
    s: &GenSet,
    ball: &Ball,
    radii: &[u32],
    rho: Option<&BoundReport>,
) -> Result<IsoScan> {
    if radii.is_empty() || radii.iter().any(|&r| r > ball.radius()) {
        return Err(Error::InvalidArgument(
            "radius family must be non-empty and within the ball".into(),
        ));
    }
    let n = s.len();
    let h_lower = rho.and_then(|r| h_lower_from_rho(r, n));
    let rows: Vec<IsoRow> = radii
        .iter()
        .map(|&r| {
            let esc = ball_escapes(ball, r);
            let size = ball.ball_size(r) as u64;
            let eb: u64 = esc.iter().sum();
            let worst = esc.iter().copied().max().unwrap_or(0);
            IsoRow {
                k: r,
                set_size: size as usize,
                edge_boundary: eb,
                phi_upper: upper_ratio(eb, size),
                h_upper: upper_ratio(eb, size * n as u64),
                h_lower_mohar: h_lower,
                folner_max: ratio_f64(Ratio::new(2 * worst, size)),
                folner_avg: ratio_f64(Ratio::new(2 * eb, size * n as u64)),
            }
        })
        .collect();
    let (phi, h) = family_reports(s, &rows, rho, "ball");
    Ok(IsoScan { rows, phi, h })
}

/// Box family `{0..side-1}^d` in `Z^d`.
pub fn iso_upper_via_boxes(s: &GenSet, sides: &[u32]) -> Result<IsoScan> {
    if sides.is_empty() {
        return Err(Error::InvalidArgument("empty side family".into()));
    }
    let n = s.len();
    let rho = catalog_rho_report(s);
    let h_lower = rho.as_ref().and_then(|r| h_lower_from_rho(r, n));
    let rows = sides
        .iter()
        .map(|&side| {
            let f = FiniteSet::free_abelian_box(s.spec(), side)?;
            let eb = edge_boundary(s, &f)?;
            let size = f.len() as u64;
            Ok(IsoRow {
                k: side,
                set_size: size as usize,
                edge_boundary: eb,
                phi_upper: upper_ratio(eb, size),
                h_upper: upper_ratio(eb, size * n as u64),
                h_lower_mohar: h_lower,
                folner_max: ratio_f64(folner_deficiency(s, &f)?),
                folner_avg: ratio_f64(average_folner_deficiency(s, &f)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (phi, h) = family_reports(s, &rows, rho.as_ref(), "box");
    Ok(IsoScan { rows, phi, h })
}
