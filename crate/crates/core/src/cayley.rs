//! Balls in Cayley graphs, sphere decomposition and growth estimation.
//!
//! Edges are `{g, s·g}` for `s` in the generating set. A [`Ball`] of radius
//! `r` is enumerated breadth first with generator-index tie-breaking, so
//! every layer is contiguous and the ball of radius `r' < r` is an index
//! prefix of the ball of radius `r`.

use std::fmt::Write as _;

use indexmap::{IndexMap, IndexSet};
use num_bigint::BigInt;

use crate::bounds::{BoundReport, Interval, Provenance, Quantity};
use crate::error::{Error, Result};
use crate::exact::{ratio, root_upper};
use crate::gensets::GenSet;
use crate::groups::{Element, GroupSpec};

pub const DEFAULT_MAX_VERTICES: usize = 10_000_000;

/// Adjacency entry for an edge leaving the ball; its target sits at
/// distance `radius + 1`.
pub const EXTERIOR: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Ball {
    spec: GroupSpec,
    generators: Vec<Element>,
    inverse: Vec<usize>,
    radius: u32,
    vertices: IndexSet<Element>,
    dist: Vec<u32>,
    adj: Vec<u32>,
    /// `layer_start[j]` is the first vertex index at distance `j`.
    layer_start: Vec<usize>,
}

impl Ball {
    /// Ball of radius `r` for a simple generating set.
    pub fn build(s: &GenSet, r: u32, max_vertices: usize) -> Result<Ball> {
        Ball::from_generators(s.spec(), s.elements().to_vec(), r, max_vertices)
    }

    /// Ball for an arbitrary inverse-closed generator list. The identity is
    /// allowed here (it acts as a loop) so that multiset supports can be
    /// walked on.
    pub fn from_generators(
        spec: &GroupSpec,
        generators: Vec<Element>,
        r: u32,
        max_vertices: usize,
    ) -> Result<Ball> {
        let index: IndexMap<&Element, usize> =
            generators.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let inverse = generators
            .iter()
            .map(|g| index.get(&spec.inv_unchecked(g)).copied())
            .collect::<Option<Vec<usize>>>()
            .ok_or(Error::NotSymmetric)?;
        let n = generators.len();

        let mut vertices: IndexSet<Element> = IndexSet::new();
        vertices.insert(spec.identity());
        let mut dist = vec![0u32];
        let mut adj: Vec<u32> = Vec::new();
        let mut layer_start = vec![0usize, 1];

        for d in 0..=r {
            let (start, end) = (layer_start[d as usize], layer_start[d as usize + 1]);
            for v in start..end {
                for g in &generators {
                    let w = spec.mul_unchecked(g, &vertices[v]);
                    let target = match vertices.get_index_of(&w) {
                        Some(i) => i as u32,
                        None if d < r => {
                            if vertices.len() >= max_vertices {
                                return Err(Error::SizeLimit {
                                    radius: d + 1,
                                    cap: max_vertices,
                                    hint: None,
                                });
                            }
                            let (i, _) = vertices.insert_full(w);
                            dist.push(d + 1);
                            i as u32
                        }
                        None => EXTERIOR,
                    };
                    adj.push(target);
                }
            }
            if d < r {
                layer_start.push(vertices.len());
            }
        }
        debug_assert_eq!(adj.len(), vertices.len() * n);

        Ok(Ball {
            spec: spec.clone(),
            generators,
            inverse,
            radius: r,
            vertices,
            dist,
            adj,
            layer_start,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, v: usize) -> &Element {
        &self.vertices[v]
    }

    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.vertices.get_index_of(g)
    }

    pub fn dist(&self, v: usize) -> u32 {
        self.dist[v]
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    /// Raw adjacency row of `v`; entries are vertex indices or [`EXTERIOR`].
    pub fn row(&self, v: usize) -> &[u32] {
        let n = self.degree();
        &self.adj[v * n..(v + 1) * n]
    }

    /// Index of `s_i · v`, or `None` when it lies outside the ball.
    pub fn neighbor(&self, v: usize, i: usize) -> Option<usize> {
        match self.adj[v * self.degree() + i] {
            EXTERIOR => None,
            w => Some(w as usize),
        }
    }

    /// Number of vertices at distance at most `j`.
    pub fn ball_size(&self, j: u32) -> usize {
        self.layer_start[(j.min(self.radius) + 1) as usize]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.layer_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn ball_sizes(&self) -> Vec<usize> {
        self.layer_start[1..].to_vec()
    }

    /// `Σ_v #{i : s_i v ∉ B_j}` over `v ∈ B_j`.
    pub fn edge_boundary_of_subball(&self, j: u32) -> u64 {
        let end = self.ball_size(j);
        (0..end)
            .map(|v| {
                self.row(v)
                    .iter()
                    .filter(|&&w| w == EXTERIOR || self.dist[w as usize] > j)
                    .count() as u64
            })
            .sum()
    }

    /// Edge list: header, then `u v label` per unordered edge with `u < v`.
    /// Loops (identity generators) are skipped.
    pub fn edge_list(&self, labels: &[u32], header: &str) -> String {
        let mut out = String::new();
        writeln!(out, "{header}").unwrap();
        for u in 0..self.len() {
            for (i, &w) in self.row(u).iter().enumerate() {
                if w != EXTERIOR && (u as u32) < w {
                    writeln!(out, "{u} {w} {}", labels[i]).unwrap();
                }
            }
        }
        out
    }
}

/// `build_ball` with the default cap.
pub fn build_ball(s: &GenSet, r: u32) -> Result<Ball> {
    Ball::build(s, r, DEFAULT_MAX_VERTICES)
}

pub fn sphere_sizes(ball: &Ball) -> Vec<usize> {
    ball.sphere_sizes()
}

/// Edge-list export in the `# group=<spec> |S|=<n> r=<r>` format.
pub fn export_edge_list(s: &GenSet, ball: &Ball) -> String {
    let header = format!("# group={} |S|={} r={}", s.spec(), s.len(), ball.radius());
    ball.edge_list(&s.pair_labels(), &header)
}

/// Closed-form growth rate for catalog entries: `2k − 1` for the free group
/// of rank `k` on its standard generators, `1` for the (virtually abelian)
/// amenable entries under any generating set.
pub fn catalog_growth(s: &GenSet) -> Option<Interval> {
    let spec = s.spec();
    if spec.is_amenable() {
        return Some(Interval::point(1.0));
    }
    match spec {
        GroupSpec::Free(k) if s.is_standard() => Some(Interval::point((2 * k - 1) as f64)),
        _ => None,
    }
}

/// Bound report for `gr(Γ,S)` from ball sizes up to `kmax`.
pub fn growth_estimate(s: &GenSet, kmax: u32, max_vertices: usize) -> Result<BoundReport> {
    if kmax < 2 {
        return Err(Error::InvalidArgument(
            "growth estimate needs kmax >= 2".into(),
        ));
    }
    let ball = Ball::build(s, kmax, max_vertices)?;
    Ok(growth_from_ball(s, &ball, kmax))
}

/// Certified upper bound `min_{2<=k<=kmax} |B_k|^{1/k}` on the growth rate,
/// with the minimizing `k`.
pub fn ball_growth_upper(ball: &Ball, kmax: u32) -> Option<(u32, f64)> {
    let sizes = ball.ball_sizes();
    // |B_k|^{1/k} >= gr for every k by submultiplicativity
    (2..=kmax.min(ball.radius()))
        .map(|k| (k, root_upper(&ratio(BigInt::from(sizes[k as usize]), 1), k)))
        .fold(None, |acc: Option<(u32, f64)>, x| match acc {
            Some(a) if a.1 <= x.1 => Some(a),
            _ => Some(x),
        })
}

/// As [`growth_estimate`] on an already built ball of radius `>= kmax`.
pub fn growth_from_ball(s: &GenSet, ball: &Ball, kmax: u32) -> BoundReport {
    let kmax = kmax.min(ball.radius());
    let mut report = BoundReport::empty(Quantity::Gr);
    if let Some((k, up)) = ball_growth_upper(ball, kmax) {
        report = report
            .with_upper(up, Provenance::CertifiedBound, &format!("|B_{k}|^(1/{k})"))
            .with_note(format!("ball bound |B_{k}|^(1/{k}) = {up}"));
    }
    if let Some(exact) = catalog_growth(s) {
        report = report
            .tighten(&BoundReport::exact(Quantity::Gr, exact, "catalog"))
            .with_estimate(exact.mid(), "catalog");
    } else if kmax >= 1 {
        let sizes = ball.ball_sizes();
        let k = kmax as usize;
        let last = sizes[k] as f64 / sizes[k - 1] as f64;
        report = report
            .with_lower(
                last,
                Provenance::Heuristic,
                &format!("|B_{k}|/|B_{}|", k - 1),
            )
            .with_estimate(last, "last ball ratio");
    }
    report
}
