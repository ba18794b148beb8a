//! Return probabilities of the S-random walk and spectral-radius bounds.
//!
//! Word counts `c_j(g)` are exact integers computed by convolution on a
//! ball. Return probabilities use `P_{a+b} = Σ_g c_a(g) c_b(g⁻¹) / W^{a+b}`,
//! so a horizon of `n` steps only needs counts up to level `⌈n/2⌉`. For a
//! symmetric (multi)set every `P_{2m}^{1/2m}` is a lower bound on ρ.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bounds::{BoundReport, Endpoint, Interval, Provenance, Quantity};
use crate::cayley::{Ball, EXTERIOR};
use crate::error::{Error, Result};
use crate::exact::{root_lower, to_f64};
use crate::gensets::{GenSet, MultiGenSet};
use crate::groups::{Element, GroupSpec};

/// Rank-2 free groups reach a ball of about 10⁶ vertices at this horizon.
pub const DEFAULT_HORIZON: u32 = 24;

/// Step generators of a walk with their (positive integer) weights.
#[derive(Clone, Debug)]
pub struct WalkGenerators {
    spec: GroupSpec,
    elements: Vec<Element>,
    weights: Vec<u128>,
    catalog_rho: Option<Interval>,
    standard_free: bool,
}

impl From<&GenSet> for WalkGenerators {
    fn from(s: &GenSet) -> Self {
        WalkGenerators {
            spec: s.spec().clone(),
            elements: s.elements().to_vec(),
            weights: vec![1; s.len()],
            catalog_rho: rho_exact_catalog(s),
            standard_free: matches!(s.spec(), GroupSpec::Free(_)) && s.is_standard(),
        }
    }
}

impl From<&MultiGenSet> for WalkGenerators {
    fn from(m: &MultiGenSet) -> Self {
        WalkGenerators {
            spec: m.spec().clone(),
            elements: m.entries().keys().cloned().collect(),
            weights: m.entries().values().copied().collect(),
            catalog_rho: None,
            standard_free: false,
        }
    }
}

impl WalkGenerators {
    pub fn total_weight(&self) -> u128 {
        self.weights.iter().sum()
    }

    fn check_symmetric(&self, ball: &Ball) -> Result<()> {
        for i in 0..self.weights.len() {
            if self.weights[ball.inverse_index(i)] != self.weights[i] {
                return Err(Error::NotSymmetric);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct WalkSeries {
    spec: GroupSpec,
    horizon: u32,
    total_weight: u128,
    /// `c_j(e)` for `j = 0..=horizon`.
    returns: Vec<u128>,
    /// `Σ_g c_j(g)` for every computed level.
    level_totals: Vec<u128>,
    /// Counts at the deepest computed level, indexed like the ball.
    top_counts: Vec<u128>,
    ball_len: usize,
    catalog_rho: Option<Interval>,
}

impl WalkSeries {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn total_weight(&self) -> u128 {
        self.total_weight
    }

    pub fn ball_len(&self) -> usize {
        self.ball_len
    }

    pub fn return_count(&self, j: u32) -> u128 {
        self.returns[j as usize]
    }

    pub fn level_totals(&self) -> &[u128] {
        &self.level_totals
    }

    pub fn top_counts(&self) -> &[u128] {
        &self.top_counts
    }

    pub fn catalog_rho(&self) -> Option<Interval> {
        self.catalog_rho
    }

    /// `P_j` as an exact rational.
    pub fn p(&self, j: u32) -> BigRational {
        BigRational::new(
            BigInt::from(self.returns[j as usize]),
            BigInt::from(BigUint::from(self.total_weight).pow(j)),
        )
    }

    pub fn p_f64(&self, j: u32) -> f64 {
        to_f64(&self.p(j))
    }

    /// `P_{2m}` for `m = 0..=horizon/2`.
    pub fn even_returns(&self) -> Vec<BigRational> {
        (0..=self.horizon / 2).map(|m| self.p(2 * m)).collect()
    }
}

/// Word counts per level on a ball, `levels[j][v] = c_j(v)`.
pub fn count_table(
    gens: &WalkGenerators,
    levels: u32,
    max_vertices: usize,
) -> Result<(Ball, Vec<Vec<u128>>)> {
    let ball = Ball::from_generators(&gens.spec, gens.elements.clone(), levels, max_vertices)?;
    gens.check_symmetric(&ball)?;
    check_overflow(gens.total_weight(), levels)?;
    let mut table = vec![delta(ball.len())];
    for j in 0..levels {
        let next = step(&ball, &gens.weights, &table[j as usize], j + 1)?;
        table.push(next);
    }
    Ok((ball, table))
}

fn delta(n: usize) -> Vec<u128> {
    let mut v = vec![0u128; n];
    v[0] = 1;
    v
}

fn check_overflow(w: u128, j: u32) -> Result<()> {
    (0..j)
        .try_fold(1u128, |acc, _| acc.checked_mul(w))
        .map(|_| ())
        .ok_or(Error::Overflow(j))
}

/// `c_{j+1}(g) = Σ_i w(s_i⁻¹) c_j(s_i g)`.
fn step(ball: &Ball, weights: &[u128], cur: &[u128], level: u32) -> Result<Vec<u128>> {
    (0..ball.len())
        .into_par_iter()
        .map(|g| {
            let mut acc = 0u128;
            for (i, &t) in ball.row(g).iter().enumerate() {
                if t != EXTERIOR {
                    let c = cur[t as usize];
                    if c != 0 {
                        acc = weights[ball.inverse_index(i)]
                            .checked_mul(c)
                            .and_then(|x| acc.checked_add(x))
                            .ok_or(Error::Overflow(level))?;
                    }
                }
            }
            Ok(acc)
        })
        .collect()
}

fn pair_sum(a: &[u128], b: &[u128], level: u32) -> Result<u128> {
    a.par_iter()
        .zip(b.par_iter())
        .map(|(&x, &y)| x.checked_mul(y).ok_or(Error::Overflow(level)))
        .try_reduce(
            || 0u128,
            |x, y| x.checked_add(y).ok_or(Error::Overflow(level)),
        )
}

/// Exact return probabilities `P_0..=P_n` of the walk driven by `gens`.
pub fn walk_series(
    gens: impl Into<WalkGenerators>,
    n: u32,
    max_vertices: usize,
) -> Result<WalkSeries> {
    let gens: WalkGenerators = gens.into();
    let half = n.div_ceil(2);
    let ball = Ball::from_generators(&gens.spec, gens.elements.clone(), half, max_vertices)
        .map_err(|e| match e {
            Error::SizeLimit { radius, cap, .. } if gens.standard_free => Error::SizeLimit {
                radius,
                cap,
                hint: Some("use tree_return_oracle for free groups on standard generators".into()),
            },
            e => e,
        })?;
    gens.check_symmetric(&ball)?;
    let w = gens.total_weight();
    check_overflow(w, n)?;

    let mut returns = vec![0u128; n as usize + 1];
    returns[0] = 1;
    let mut level_totals = vec![1u128];
    let mut prev = delta(ball.len());
    for j in 1..=half {
        let cur = step(&ball, &gens.weights, &prev, j)?;
        let total = cur
            .iter()
            .try_fold(0u128, |a, &x| a.checked_add(x))
            .ok_or(Error::Overflow(j))?;
        level_totals.push(total);
        if 2 * j - 1 <= n {
            returns[(2 * j - 1) as usize] = pair_sum(&cur, &prev, 2 * j - 1)?;
        }
        if 2 * j <= n {
            returns[(2 * j) as usize] = pair_sum(&cur, &cur, 2 * j)?;
        }
        prev = cur;
    }
    Ok(WalkSeries {
        spec: gens.spec,
        horizon: n,
        total_weight: w,
        returns,
        level_totals,
        top_counts: prev,
        ball_len: ball.len(),
        catalog_rho: gens.catalog_rho,
    })
}

/// `max_m P_{2m}^{1/2m}` over the horizon, certified by exact comparison.
/// The catalog value, when known, is attached as the upper endpoint.
pub fn rho_lower(series: &WalkSeries) -> Result<BoundReport> {
    if series.horizon < 2 {
        return Err(Error::InvalidArgument(
            "rho_lower needs a horizon of at least 2".into(),
        ));
    }
    let (m, lower) = (1..=series.horizon / 2)
        .map(|m| (m, root_lower(&series.p(2 * m), 2 * m)))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    let mut report = BoundReport::empty(Quantity::Rho).with_lower(
        lower,
        Provenance::CertifiedBound,
        &format!("P_{}^(1/{}) at horizon {}", 2 * m, 2 * m, series.horizon),
    );
    if let Some(exact) = series.catalog_rho {
        report.upper = Some(Endpoint::new(
            exact.hi,
            Provenance::CertifiedExact,
            "catalog",
        ));
        report = report.with_estimate(exact.mid(), "catalog");
    } else if let Ok(r) = rho_ratio_estimate(series) {
        report = report.with_estimate(r, "ratio estimate");
    }
    Ok(report)
}

/// `sqrt(P_{2m} / P_{2m-2})` at the top even step; heuristic.
pub fn rho_ratio_estimate(series: &WalkSeries) -> Result<f64> {
    let m = series.horizon / 2;
    if m == 0 {
        return Err(Error::InvalidArgument(
            "ratio estimate needs a horizon of at least 2".into(),
        ));
    }
    ratio_at(&series.p(2 * m), &series.p(2 * m - 2))
}

fn ratio_at(top: &BigRational, below: &BigRational) -> Result<f64> {
    if below.is_zero() {
        return Err(Error::InvalidArgument(
            "zero return probability in ratio estimate".into(),
        ));
    }
    Ok(to_f64(&(top / below)).sqrt())
}

/// Known spectral radii: `sqrt(2k-1)/k` for the free group of rank `k` on
/// its standard generators, `1` for amenable entries under any generating
/// set.
pub fn rho_exact_catalog(s: &GenSet) -> Option<Interval> {
    let spec = s.spec();
    if spec.is_amenable() {
        return Some(Interval::point(1.0));
    }
    match spec {
        GroupSpec::Free(k) if s.is_standard() => {
            Some(Interval::sqrt_of((2 * k - 1) as f64).div(Interval::point(*k as f64)))
        }
        _ => None,
    }
}

/// Even return probabilities of simple random walk on the `d`-regular tree,
/// via the birth–death chain on the distance to the root.
#[derive(Clone, Debug)]
pub struct TreeSeries {
    pub degree: u32,
    /// `P_{2m}` for `m = 0..=n`.
    pub even_returns: Vec<BigRational>,
}

impl TreeSeries {
    pub fn ratio_estimate(&self) -> Result<f64> {
        let m = self.even_returns.len() - 1;
        if m == 0 {
            return Err(Error::InvalidArgument("ratio estimate needs n >= 1".into()));
        }
        ratio_at(&self.even_returns[m], &self.even_returns[m - 1])
    }
}

pub fn tree_return_oracle(d: u32, n: u32) -> Result<TreeSeries> {
    if d < 3 {
        return Err(Error::InvalidArgument(
            "tree degree must be at least 3".into(),
        ));
    }
    let steps = 2 * n as usize;
    // walks[k]: number of step sequences at distance k, weighted by branching
    let mut walks: Vec<BigUint> = vec![BigUint::zero(); n as usize + 2];
    walks[0] = BigUint::one();
    let mut even_returns = vec![BigRational::one()];
    let mut denom = BigUint::one();
    for j in 1..=steps {
        let reach = (steps - j).min(n as usize) + 1;
        let mut next = vec![BigUint::zero(); n as usize + 2];
        for k in 0..reach {
            let mut v = BigUint::zero();
            if k > 0 {
                let up = if k == 1 { d } else { d - 1 };
                v += &walks[k - 1] * up;
            }
            v += &walks[k + 1];
            next[k] = v;
        }
        walks = next;
        denom *= d;
        if j % 2 == 0 {
            even_returns.push(BigRational::new(
                BigInt::from(walks[0].clone()),
                BigInt::from(denom.clone()),
            ));
        }
    }
    Ok(TreeSeries {
        degree: d,
        even_returns,
    })
}

/// Upper bound `|S|^k ρ(S)^k / |X|` on `ρ(X)` for a set `X ⊆ S^k`; the
/// multiset `S^(k)` dominates `X` coefficientwise.
pub fn rho_upper_power(
    rho_upper_s: &Endpoint,
    size_s: usize,
    size_sk: usize,
    k: u32,
) -> Result<BoundReport> {
    if !rho_upper_s.provenance.is_certified() {
        return Err(Error::NotCertified(format!(
            "rho(S) upper endpoint from {} is heuristic",
            rho_upper_s.source
        )));
    }
    if size_sk == 0 || k == 0 {
        return Err(Error::InvalidArgument(
            "power bound needs k >= 1 and |S^k| >= 1".into(),
        ));
    }
    let bound = Interval::point(rho_upper_s.value)
        .scale(size_s as f64)
        .powi(k)
        .div(Interval::point(size_sk as f64));
    Ok(BoundReport::empty(Quantity::Rho)
        .with_upper(
            bound.hi,
            Provenance::CertifiedBound,
            &format!("power bound k={k}, |S|={size_s}, |S^k|={size_sk}"),
        )
        .with_note(format!(
            "rho(S) upper {} ({})",
            rho_upper_s.value, rho_upper_s.source
        )))
}

/// CSV rows `m, P_2m_num, P_2m_den, P_2m_float, root_estimate, ratio_estimate`.
pub fn series_csv(series: &WalkSeries) -> String {
    let mut out = String::from("m,P_2m_num,P_2m_den,P_2m_float,root_estimate,ratio_estimate\n");
    let evens = series.even_returns();
    for (m, p) in evens.iter().enumerate() {
        let root = if m == 0 {
            String::new()
        } else {
            format!("{}", root_lower(p, 2 * m as u32))
        };
        let ratio = if m == 0 {
            String::new()
        } else {
            ratio_at(p, &evens[m - 1])
                .map(|r| r.to_string())
                .unwrap_or_default()
        };
        writeln!(
            out,
            "{m},{},{},{},{root},{ratio}",
            p.numer(),
            p.denom(),
            p.to_f64().unwrap_or(f64::NAN)
        )
        .unwrap();
    }
    out
}
