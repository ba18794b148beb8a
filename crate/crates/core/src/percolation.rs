//! Bernoulli bond percolation on balls, the regular-tree oracle and
//! critical-probability estimation.
//!
//! Every undirected interior edge gets a uniform drawn from a keyed hash of
//! `(seed, trial, edge id)`; the edge is open iff its uniform is below `p`.
//! Because the uniform does not depend on `p` or on the radius, estimates are
//! coupled across both: on a fixed seed, `θ̂_r(p)` is non-decreasing in `p`
//! and non-increasing in `r` trial by trial.

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{BoundReport, Interval, Provenance, Quantity};
use crate::cayley::{Ball, EXTERIOR};
use crate::error::{Error, Result};
use crate::gensets::GenSet;
use crate::isoperimetry::h_lower_from_rho;
use crate::spectral::rho_exact_catalog;

pub const DEFAULT_TAU: f64 = 0.05;
const Z95: f64 = 1.96;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in `[0, 1)` for one edge of one trial.
pub fn edge_uniform(seed: u64, trial: u64, edge: u64) -> f64 {
    let k = mix(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let k = mix(k ^ trial.wrapping_mul(0xd1b5_4a32_d192_ed03));
    let x = mix(k ^ edge.wrapping_mul(0x8cb9_2ba7_2f3d_8dd7));
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Id of the edge `{v, s_i v}`, shared by both of its endpoints.
#[inline]
fn edge_id(ball: &Ball, v: usize, i: usize, w: usize) -> u64 {
    let (u, j) = if v <= w {
        (v, i)
    } else {
        (w, ball.inverse_index(i))
    };
    (u * ball.degree() + j) as u64
}

#[inline]
fn is_open(ball: &Ball, seed: u64, trial: u64, v: usize, i: usize, w: usize, p: f64) -> bool {
    edge_uniform(seed, trial, edge_id(ball, v, i, w)) < p
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "probability {p} outside [0, 1]"
        )))
    }
}

/// Cluster labels of one trial: each vertex is labelled by the smallest
/// vertex index in its open cluster.
pub fn percolate_once(ball: &Ball, p: f64, seed: u64, trial: u64) -> Vec<u32> {
    let n = ball.len();
    let mut uf = UnionFind::<u32>::new(n);
    for v in 0..n {
        for (i, &w) in ball.row(v).iter().enumerate() {
            if w == EXTERIOR || (w as usize) <= v {
                continue;
            }
            if is_open(ball, seed, trial, v, i, w as usize, p) {
                uf.union(v as u32, w);
            }
        }
    }
    let mut least = vec![u32::MAX; n];
    let roots: Vec<u32> = (0..n as u32).map(|v| uf.find(v)).collect();
    for (v, &r) in roots.iter().enumerate() {
        least[r as usize] = least[r as usize].min(v as u32);
    }
    roots.iter().map(|&r| least[r as usize]).collect()
}

/// Cluster sizes keyed by label, in label order.
pub fn cluster_sizes(labels: &[u32]) -> Vec<(u32, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}

/// `size, count` histogram of cluster sizes.
pub fn cluster_histogram_csv(labels: &[u32]) -> String {
    let mut hist = std::collections::BTreeMap::new();
    for (_, size) in cluster_sizes(labels) {
        *hist.entry(size).or_insert(0usize) += 1;
    }
    let mut out = String::from("size,count\n");
    for (s, c) in hist {
        out.push_str(&format!("{s},{c}\n"));
    }
    out
}

/// Wilson score interval at 95%.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (ph + z2 / (2.0 * n)) / denom;
    let half = Z95 * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        (center - half).clamp(0.0, 1.0).min(ph),
        (center + half).clamp(0.0, 1.0).max(ph),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PercEstimate {
    pub p: f64,
    pub radius: u32,
    pub trials: u64,
    pub successes: u64,
    pub seed: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl PercEstimate {
    fn new(p: f64, radius: u32, trials: u64, successes: u64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(successes, trials);
        PercEstimate {
            p,
            radius,
            trials,
            successes,
            seed,
            estimate: successes as f64 / trials as f64,
            ci_lo,
            ci_hi,
        }
    }

    /// Half-width of the Wilson interval divided by the normal quantile.
    pub fn sigma(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / (2.0 * Z95)
    }
}

pub fn theta_csv(rows: &[PercEstimate]) -> String {
    let mut out = String::from("p,r,trials,theta_hat,ci_lo,ci_hi,seed\n");
    for e in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.p, e.radius, e.trials, e.estimate, e.ci_lo, e.ci_hi, e.seed
        ));
    }
    out
}

struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            stamp: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        }
    }
}

/// Does the open cluster of the origin inside `B_r` reach distance `r`?
fn reaches_sphere(ball: &Ball, r: u32, p: f64, seed: u64, trial: u64, sc: &mut Scratch) -> bool {
    if r == 0 {
        return true;
    }
    sc.epoch = sc.epoch.wrapping_add(1);
    if sc.epoch == 0 {
        sc.stamp.fill(0);
        sc.epoch = 1;
    }
    sc.stack.clear();
    sc.stack.push(0);
    sc.stamp[0] = sc.epoch;
    while let Some(v) = sc.stack.pop() {
        let v = v as usize;
        for (i, &w) in ball.row(v).iter().enumerate() {
            if w == EXTERIOR || sc.stamp[w as usize] == sc.epoch {
                continue;
            }
            let wd = ball.dist(w as usize);
            if wd > r || !is_open(ball, seed, trial, v, i, w as usize, p) {
                continue;
            }
            if wd == r {
                return true;
            }
            sc.stamp[w as usize] = sc.epoch;
            sc.stack.push(w);
        }
    }
    false
}

fn count_successes(ball: &Ball, r: u32, p: f64, trials: u64, seed: u64) -> u64 {
    let n = ball.ball_size(r);
    (0..trials)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |sc, t| reaches_sphere(ball, r, p, seed, t, sc) as u64,
        )
        .sum()
}

/// Fraction of trials in which the origin's open cluster inside the ball
/// reaches the sphere of radius `ball.radius()`.
pub fn theta_r(ball: &Ball, p: f64, trials: u64, seed: u64) -> Result<PercEstimate> {
    theta_sub(ball, ball.radius(), p, trials, seed)
}

/// As [`theta_r`] on the sub-ball of radius `r`, using the same edge
/// uniforms, so results are coupled across radii.
pub fn theta_sub(ball: &Ball, r: u32, p: f64, trials: u64, seed: u64) -> Result<PercEstimate> {
    check_p(p)?;
    if r == 0 || r > ball.radius() {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must lie in 1..={}",
            ball.radius()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let k = count_successes(ball, r, p, trials, seed);
    Ok(PercEstimate::new(p, r, trials, k, seed))
}

/// Probability that the root of the depth-`r` truncation of the
/// `d`-regular tree is joined to depth `r`.
pub fn tree_theta_oracle(d: u32, r: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    if d < 3 || r < 1 {
        return Err(Error::InvalidArgument(format!(
            "tree oracle needs d >= 3 and r >= 1, got d={d} r={r}"
        )));
    }
    let mut u = 1.0f64;
    for _ in 0..r - 1 {
        u = 1.0 - (1.0 - p * u).powi(d as i32 - 1);
    }
    Ok(1.0 - (1.0 - p * u).powi(d as i32))
}

#[derive(Clone, Debug, Serialize)]
pub struct PcEstimate {
    pub report: BoundReport,
    pub tau: f64,
    pub radius: u32,
    pub trials: u64,
    pub seed: u64,
    /// Every `(p, θ̂)` evaluated, sorted by `p`.
    pub curve: Vec<PercEstimate>,
}

struct Curve<'a> {
    ball: &'a Ball,
    trials: u64,
    seed: u64,
    seen: Vec<PercEstimate>,
}

impl Curve<'_> {
    fn at(&mut self, p: f64) -> PercEstimate {
        if let Some(e) = self.seen.iter().find(|e| e.p == p) {
            return e.clone();
        }
        let k = count_successes(self.ball, self.ball.radius(), p, self.trials, self.seed);
        let e = PercEstimate::new(p, self.ball.radius(), self.trials, k, self.seed);
        self.seen.push(e.clone());
        e
    }

    /// Smallest `p` (to bisection precision) with `f(θ̂(p)) >= tau`; `f` must
    /// be non-decreasing in the success count.
    fn crossing(&mut self, tau: f64, f: impl Fn(&PercEstimate) -> f64, iters: u32) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..iters {
            let mid = 0.5 * (lo + hi);
            if f(&self.at(mid)) >= tau {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub struct PcOptions {
    pub tau: f64,
    pub iters: u32,
}

impl Default for PcOptions {
    fn default() -> Self {
        PcOptions {
            tau: DEFAULT_TAU,
            iters: 14,
        }
    }
}

/// Certified lower bound `1/(|S|-1)` from comparison with the regular tree.
pub fn pc_tree_lower(size_s: usize) -> Option<f64> {
    (size_s >= 2).then(|| Interval::ratio(1, size_s as u128 - 1).lo)
}

/// Certified upper bound `1/(φ_lower + 1)`.
pub fn pc_upper_from_phi(phi_lower: f64) -> f64 {
    Interval::point(1.0)
        .div(Interval::point(phi_lower).add(Interval::point(1.0)))
        .hi
}

/// Certified `p_c` endpoints: the tree comparison below and, when `φ` has a
/// positive certified lower endpoint, the isoperimetric bound above.
pub fn pc_certified(size_s: usize, phi: Option<&BoundReport>) -> BoundReport {
    let mut report = BoundReport::empty(Quantity::Pc);
    if let Some(lo) = pc_tree_lower(size_s) {
        report = report.with_lower(
            lo,
            Provenance::CertifiedBound,
            "1/(|S|-1), external regular-tree comparison",
        );
    }
    if let Some(phi_lo) = phi.and_then(|r| r.certified_lower()).filter(|&x| x > 0.0) {
        report = report.with_upper(
            pc_upper_from_phi(phi_lo),
            Provenance::CertifiedBound,
            "1/(phi_lower+1)",
        );
    }
    report
}

/// `φ` lower endpoint `|S| h_lower` derived from the catalog spectral radius.
pub fn phi_from_catalog(s: &GenSet) -> Option<BoundReport> {
    let rho = rho_exact_catalog(s).map(|r| BoundReport::exact(Quantity::Rho, r, "catalog"))?;
    let h = h_lower_from_rho(&rho, s.len())?;
    Some(BoundReport::empty(Quantity::Phi).with_lower(
        Interval::point(h).scale(s.len() as f64).lo,
        Provenance::CertifiedBound,
        "|S| * h lower from catalog rho",
    ))
}

/// Heuristic `p_c` from the crossing `θ̂_r(p) = τ`, with the Wilson band
/// crossings as its interval, plus certified endpoints.
pub fn pc_estimate(
    s: &GenSet,
    ball: &Ball,
    trials: u64,
    seed: u64,
    phi: Option<&BoundReport>,
    opts: &PcOptions,
) -> Result<PcEstimate> {
    if !(opts.tau > 0.0 && opts.tau < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "crossing threshold {} must lie in (0, 1)",
            opts.tau
        )));
    }
    if ball.radius() == 0 {
        return Err(Error::InvalidArgument(
            "p_c estimation needs radius >= 1".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let mut curve = Curve {
        ball,
        trials,
        seed,
        seen: Vec::new(),
    };
    if curve.at(1.0).estimate < opts.tau {
        return Err(Error::Unreachable(format!(
            "theta_r(1) stays below tau={}",
            opts.tau
        )));
    }
    if curve.at(1e-3).estimate > opts.tau {
        return Err(Error::Unreachable(format!(
            "theta_r already exceeds tau={} at p=0.001; radius {} is too small",
            opts.tau,
            ball.radius()
        )));
    }
    let point = curve.crossing(opts.tau, |e| e.estimate, opts.iters);
    let lo = curve.crossing(opts.tau, |e| e.ci_hi, opts.iters);
    let hi = curve.crossing(opts.tau, |e| e.ci_lo, opts.iters);

    let mut report = pc_certified(s.len(), phi).with_estimate(
        point,
        &format!(
            "theta_r crossing tau={} r={} trials={trials} seed={seed}",
            opts.tau,
            ball.radius()
        ),
    );
    report = report.with_note(format!(
        "crossing interval [{lo}, {hi}] from Wilson 95% band"
    ));
    report = report.with_note(format!(
        "finite-radius crossing; estimates rise toward p_c as r grows (r={})",
        ball.radius()
    ));
    let mut seen = curve.seen;
    seen.sort_by(|a, b| a.p.total_cmp(&b.p));
    Ok(PcEstimate {
        report,
        tau: opts.tau,
        radius: ball.radius(),
        trials,
        seed,
        curve: seen,
    })
}
