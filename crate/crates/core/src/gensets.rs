//! Generating sets, set powers `S^k`, multiset powers `S^(k)` and lifts of
//! multiset powers along a direct-product projection.

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};
use crate::groups::{Element, GroupSpec};

/// Simple symmetric generating set: no identity, no duplicates, closed
/// under inversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSet {
    spec: GroupSpec,
    elements: Vec<Element>,
    inverse: Vec<usize>,
}

impl GenSet {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of the inverse of generator `i`.
    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elements.contains(g)
    }

    /// The symmetric closure of the standard generators.
    pub fn standard(spec: &GroupSpec) -> Result<GenSet> {
        symmetric_closure(spec, &spec.standard_generators())
    }

    /// True when this set is the symmetric closure of the standard generators.
    pub fn is_standard(&self) -> bool {
        match GenSet::standard(&self.spec) {
            Ok(std) => {
                let mine: IndexSet<&Element> = self.elements.iter().collect();
                std.len() == self.len() && std.elements.iter().all(|g| mine.contains(g))
            }
            Err(_) => false,
        }
    }

    /// Positive edge labels: one label per inverse pair `{s, s^-1}`, numbered
    /// from 1 in order of first appearance.
    pub fn pair_labels(&self) -> Vec<u32> {
        let mut labels = vec![0u32; self.len()];
        let mut next = 1;
        for i in 0..self.len() {
            if labels[i] == 0 {
                labels[i] = next;
                labels[self.inverse[i]] = next;
                next += 1;
            }
        }
        labels
    }

    /// Normal-form strings in sorted order.
    pub fn sorted_strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.elements.iter().map(|g| g.to_string()).collect();
        v.sort();
        v
    }

    fn from_symmetric(spec: &GroupSpec, elements: Vec<Element>) -> GenSet {
        let index: IndexMap<&Element, usize> =
            elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let inverse = elements
            .iter()
            .map(|g| index[&spec.inv_unchecked(g)])
            .collect();
        GenSet {
            spec: spec.clone(),
            elements,
            inverse,
        }
    }
}

/// Generating multiset: element → multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGenSet {
    spec: GroupSpec,
    entries: IndexMap<Element, u128>,
}

impl MultiGenSet {
    pub fn new(spec: &GroupSpec, entries: IndexMap<Element, u128>) -> Result<MultiGenSet> {
        for (g, &m) in &entries {
            spec.validate_element(g)?;
            if m == 0 {
                return Err(Error::InvalidArgument(
                    "multiplicities must be positive".into(),
                ));
            }
        }
        Ok(MultiGenSet {
            spec: spec.clone(),
            entries,
        })
    }

    /// Every generator with multiplicity one.
    pub fn from_genset(s: &GenSet) -> MultiGenSet {
        MultiGenSet {
            spec: s.spec.clone(),
            entries: s.elements.iter().map(|g| (g.clone(), 1)).collect(),
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn entries(&self) -> &IndexMap<Element, u128> {
        &self.entries
    }

    pub fn multiplicity(&self, g: &Element) -> u128 {
        self.entries.get(g).copied().unwrap_or(0)
    }

    /// Σ α(g).
    pub fn total(&self) -> u128 {
        self.entries.values().sum()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries
            .iter()
            .all(|(g, m)| self.multiplicity(&self.spec.inv_unchecked(g)) == *m)
    }
}

/// `raw ∪ raw⁻¹`, deduplicated; each element is followed by its inverse
/// the first time it appears.
pub fn symmetric_closure(spec: &GroupSpec, raw: &[Element]) -> Result<GenSet> {
    if raw.is_empty() {
        return Err(Error::InvalidArgument("generating set is empty".into()));
    }
    let mut out: IndexSet<Element> = IndexSet::with_capacity(2 * raw.len());
    for g in raw {
        spec.validate_element(g)?;
        if spec.is_identity_unchecked(g) {
            return Err(Error::InvalidArgument(
                "identity is not allowed in a simple generating set".into(),
            ));
        }
        let inv = spec.inv_unchecked(g);
        out.insert(g.clone());
        out.insert(inv);
    }
    Ok(GenSet::from_symmetric(spec, out.into_iter().collect()))
}

fn check_power(s: &GenSet, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    if s.is_empty() {
        return Err(Error::InvalidArgument("generating set is empty".into()));
    }
    Ok(())
}

/// The product set `S·S···S` (k factors) including the identity when it
/// occurs, in discovery order.
pub fn product_set(s: &GenSet, k: u32) -> Result<IndexSet<Element>> {
    check_power(s, k)?;
    let spec = &s.spec;
    let mut level: IndexSet<Element> = s.elements.iter().cloned().collect();
    for _ in 1..k {
        let mut next = IndexSet::with_capacity(level.len() * 2);
        for x in &level {
            for g in &s.elements {
                next.insert(spec.mul_unchecked(x, g));
            }
        }
        level = next;
    }
    Ok(level)
}

/// `S^k` as a simple generating set (identity stripped).
pub fn power_set(s: &GenSet, k: u32) -> Result<GenSet> {
    let spec = &s.spec;
    let elems: Vec<Element> = product_set(s, k)?
        .into_iter()
        .filter(|g| !spec.is_identity_unchecked(g))
        .collect();
    if elems.is_empty() {
        return Err(Error::InvalidArgument(format!("S^{k} is trivial")));
    }
    Ok(GenSet::from_symmetric(spec, elems))
}

/// `S^(k)`: α(g) counts the length-k words over `S` evaluating to `g`, so
/// that Σα = |S|^k. The identity is kept with its multiplicity.
pub fn power_multiset(s: &GenSet, k: u32) -> Result<MultiGenSet> {
    check_power(s, k)?;
    let spec = &s.spec;
    let mut level: IndexMap<Element, u128> = s.elements.iter().map(|g| (g.clone(), 1)).collect();
    for _ in 1..k {
        let mut next: IndexMap<Element, u128> = IndexMap::with_capacity(level.len() * 2);
        for (x, &c) in &level {
            for g in &s.elements {
                *next.entry(spec.mul_unchecked(x, g)).or_insert(0) += c;
            }
        }
        level = next;
    }
    Ok(MultiGenSet {
        spec: spec.clone(),
        entries: level,
    })
}

/// Result of lifting `S_q^(n)` to a simple set in `Q × N`.
#[derive(Clone, Debug)]
pub struct Lift {
    /// The `|S_q|^n` elements `(g, h_{g,i})` before symmetric closure.
    pub raw: Vec<Element>,
    pub genset: GenSet,
}

/// Deterministic enumeration of the first `count` non-identity elements of
/// an infinite factor. `Z^d` walks `1,-1,2,-2,…` along the first axis; free
/// groups go by length, then lexicographically over the alphabet
/// `1,-1,2,-2,…`, reduced words only.
pub fn enumerate_nontrivial(spec: &GroupSpec, count: usize) -> Result<Vec<Element>> {
    match spec {
        GroupSpec::FreeAbelian(d) => Ok((0..count)
            .map(|i| {
                let m = (i / 2 + 1) as i64;
                let mut v = vec![0i64; *d as usize];
                v[0] = if i % 2 == 0 { m } else { -m };
                Element::Exponents(v)
            })
            .collect()),
        GroupSpec::Free(k) => {
            let alphabet: Vec<i32> = (1..=*k as i32).flat_map(|i| [i, -i]).collect();
            let mut out = Vec::with_capacity(count);
            let mut layer: Vec<Vec<i32>> = vec![Vec::new()];
            while out.len() < count {
                let mut next = Vec::new();
                for w in &layer {
                    for &x in &alphabet {
                        if w.last() == Some(&-x) {
                            continue;
                        }
                        let mut v = w.clone();
                        v.push(x);
                        next.push(v);
                    }
                }
                for w in &next {
                    if out.len() == count {
                        break;
                    }
                    out.push(Element::Word(w.clone()));
                }
                layer = next;
            }
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!(
            "lift fibre {spec} must be a free or free abelian group"
        ))),
    }
}

/// Lifts the multiset power `S_q^(n)` of a generating set of `Q` to a
/// simple symmetric generating set of `Q × N`: every `g` with multiplicity
/// α(g) becomes `(g, h_{g,1}), …, (g, h_{g,α(g)})` with distinct `h` drawn
/// from [`enumerate_nontrivial`].
pub fn lift_generating_set(ambient: &GroupSpec, s_q: &GenSet, n: u32) -> Result<Lift> {
    let (q, fibre) = match ambient {
        GroupSpec::DirectProduct(fs) if fs.len() == 2 => (&fs[0], &fs[1]),
        _ => {
            return Err(Error::InvalidArgument(
                "lift needs an ambient direct product Q x N".into(),
            ))
        }
    };
    if fibre.is_finite() || !matches!(fibre, GroupSpec::Free(_) | GroupSpec::FreeAbelian(_)) {
        return Err(Error::InvalidArgument(format!(
            "lift fibre {fibre} must be an infinite free or free abelian group"
        )));
    }
    if s_q.spec() != q {
        return Err(Error::InvalidArgument(format!(
            "generating set lives in {}, expected {q}",
            s_q.spec()
        )));
    }
    let multiset = power_multiset(s_q, n)?;
    let max_alpha = multiset.entries.values().copied().max().unwrap_or(0) as usize;
    let hs = enumerate_nontrivial(fibre, max_alpha)?;
    let mut raw = Vec::with_capacity(multiset.total() as usize);
    for (g, &alpha) in &multiset.entries {
        for h in &hs[..alpha as usize] {
            raw.push(Element::Tuple(vec![g.clone(), h.clone()]));
        }
    }
    let genset = symmetric_closure(ambient, &raw)?;
    Ok(Lift { raw, genset })
}
