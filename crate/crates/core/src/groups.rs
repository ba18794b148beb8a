//! Normal forms and group arithmetic for the supported presentation catalog.
//!
//! Every catalog entry has a closed-form canonical normal form, so equality
//! of group elements is structural equality of [`Element`] values:
//!
//! * free groups: freely reduced words over signed generator indices,
//! * free abelian groups: exponent vectors,
//! * cyclic groups: residues in `[0, order)`,
//! * free products: alternating syllable sequences with no trivial syllable,
//! * direct products: tuples of factor elements.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on product nesting depth.
pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupSpec {
    Free(u32),
    FreeAbelian(u32),
    Cyclic(u64),
    FreeProduct(Vec<GroupSpec>),
    DirectProduct(Vec<GroupSpec>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Reduced word; `i` is generator `i`, `-i` its inverse.
    Word(Vec<i32>),
    Exponents(Vec<i64>),
    Residue(u64),
    /// `(factor index, nontrivial factor element)`, adjacent factors differ.
    Syllables(Vec<(u32, Element)>),
    Tuple(Vec<Element>),
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

impl GroupSpec {
    /// Checks rank/order/arity invariants and the nesting bound.
    pub fn validate(&self, max_depth: usize) -> Result<()> {
        if self.depth() > max_depth {
            return Err(Error::InvalidSpec(format!(
                "nesting depth {} exceeds limit {max_depth}",
                self.depth()
            )));
        }
        self.validate_shape()
    }

    fn validate_shape(&self) -> Result<()> {
        match self {
            GroupSpec::Free(0) | GroupSpec::FreeAbelian(0) => {
                Err(Error::InvalidSpec("rank must be at least 1".into()))
            }
            GroupSpec::Cyclic(m) if *m < 2 => {
                Err(Error::InvalidSpec("cyclic order must be at least 2".into()))
            }
            GroupSpec::FreeProduct(fs) | GroupSpec::DirectProduct(fs) => {
                if fs.len() < 2 {
                    return Err(Error::InvalidSpec(
                        "products need at least two factors".into(),
                    ));
                }
                fs.iter().try_for_each(GroupSpec::validate_shape)
            }
            _ => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            GroupSpec::FreeProduct(fs) | GroupSpec::DirectProduct(fs) => {
                1 + fs.iter().map(GroupSpec::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupSpec::Free(_) => Element::Word(Vec::new()),
            GroupSpec::FreeAbelian(d) => Element::Exponents(vec![0; *d as usize]),
            GroupSpec::Cyclic(_) => Element::Residue(0),
            GroupSpec::FreeProduct(_) => Element::Syllables(Vec::new()),
            GroupSpec::DirectProduct(fs) => {
                Element::Tuple(fs.iter().map(GroupSpec::identity).collect())
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            GroupSpec::Cyclic(_) => true,
            GroupSpec::DirectProduct(fs) => fs.iter().all(GroupSpec::is_finite),
            _ => false,
        }
    }

    /// Amenability of catalog entries: abelian and finite pieces are
    /// amenable, `Z/2*Z/2` is virtually cyclic, every other free product
    /// and every free group of rank at least two contains a free subgroup.
    pub fn is_amenable(&self) -> bool {
        match self {
            GroupSpec::Free(k) => *k == 1,
            GroupSpec::FreeAbelian(_) | GroupSpec::Cyclic(_) => true,
            GroupSpec::DirectProduct(fs) => fs.iter().all(GroupSpec::is_amenable),
            GroupSpec::FreeProduct(fs) => {
                fs.len() == 2 && fs.iter().all(|f| *f == GroupSpec::Cyclic(2))
            }
        }
    }

    /// Strict check that `a` is a canonical normal form for this spec.
    pub fn validate_element(&self, a: &Element) -> Result<()> {
        match (self, a) {
            (GroupSpec::Free(k), Element::Word(w)) => {
                for &x in w {
                    if x == 0 || x.unsigned_abs() > *k {
                        return Err(malformed(format!("letter {x} out of range for F{k}")));
                    }
                }
                if w.windows(2).any(|p| p[0] == -p[1]) {
                    return Err(malformed("word is not freely reduced"));
                }
                Ok(())
            }
            (GroupSpec::FreeAbelian(d), Element::Exponents(v)) => {
                if v.len() != *d as usize {
                    return Err(malformed(format!(
                        "exponent vector has arity {}, expected {d}",
                        v.len()
                    )));
                }
                Ok(())
            }
            (GroupSpec::Cyclic(m), Element::Residue(r)) => {
                if r >= m {
                    return Err(malformed(format!("residue {r} out of range for Z/{m}")));
                }
                Ok(())
            }
            (GroupSpec::FreeProduct(fs), Element::Syllables(syl)) => {
                for (f, x) in syl {
                    let factor = fs
                        .get(*f as usize)
                        .ok_or_else(|| malformed(format!("factor index {f} out of range")))?;
                    factor.validate_element(x)?;
                    if factor.is_identity_unchecked(x) {
                        return Err(malformed("free product syllable is trivial"));
                    }
                }
                if syl.windows(2).any(|p| p[0].0 == p[1].0) {
                    return Err(malformed("free product syllables do not alternate"));
                }
                Ok(())
            }
            (GroupSpec::DirectProduct(fs), Element::Tuple(xs)) => {
                if xs.len() != fs.len() {
                    return Err(malformed(format!(
                        "tuple has arity {}, expected {}",
                        xs.len(),
                        fs.len()
                    )));
                }
                fs.iter()
                    .zip(xs)
                    .try_for_each(|(f, x)| f.validate_element(x))
            }
            _ => Err(malformed(format!(
                "element {a} does not match group {self}"
            ))),
        }
    }

    /// Lenient canonicalization: reduces words, merges syllables, reduces
    /// residues. Arity and kind mismatches are still errors.
    pub fn normalize(&self, a: &Element) -> Result<Element> {
        match (self, a) {
            (GroupSpec::Free(k), Element::Word(w)) => {
                let mut out: Vec<i32> = Vec::with_capacity(w.len());
                for &x in w {
                    if x == 0 || x.unsigned_abs() > *k {
                        return Err(malformed(format!("letter {x} out of range for F{k}")));
                    }
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                Ok(Element::Word(out))
            }
            (GroupSpec::Cyclic(m), Element::Residue(r)) => Ok(Element::Residue(r % m)),
            (GroupSpec::FreeProduct(fs), Element::Syllables(syl)) => {
                let mut acc: Vec<(u32, Element)> = Vec::new();
                for (f, x) in syl {
                    let factor = fs
                        .get(*f as usize)
                        .ok_or_else(|| malformed(format!("factor index {f} out of range")))?;
                    let x = factor.normalize(x)?;
                    if factor.is_identity_unchecked(&x) {
                        continue;
                    }
                    acc = free_product_mul(fs, &acc, &[(*f, x)]);
                }
                Ok(Element::Syllables(acc))
            }
            (GroupSpec::DirectProduct(fs), Element::Tuple(xs)) if xs.len() == fs.len() => {
                Ok(Element::Tuple(
                    fs.iter()
                        .zip(xs)
                        .map(|(f, x)| f.normalize(x))
                        .collect::<Result<_>>()?,
                ))
            }
            _ => {
                self.validate_element(a)?;
                Ok(a.clone())
            }
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.validate_element(a)?;
        self.validate_element(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn invert(&self, a: &Element) -> Result<Element> {
        self.validate_element(a)?;
        Ok(self.inv_unchecked(a))
    }

    pub fn is_identity(&self, a: &Element) -> Result<bool> {
        self.validate_element(a)?;
        Ok(self.is_identity_unchecked(a))
    }

    /// Product of two elements already known to be valid normal forms.
    pub fn mul_unchecked(&self, a: &Element, b: &Element) -> Element {
        match (self, a, b) {
            (GroupSpec::Free(_), Element::Word(x), Element::Word(y)) => {
                let mut k = 0;
                while k < x.len() && k < y.len() && x[x.len() - 1 - k] == -y[k] {
                    k += 1;
                }
                let mut w = Vec::with_capacity(x.len() + y.len() - 2 * k);
                w.extend_from_slice(&x[..x.len() - k]);
                w.extend_from_slice(&y[k..]);
                Element::Word(w)
            }
            (GroupSpec::FreeAbelian(_), Element::Exponents(x), Element::Exponents(y)) => {
                Element::Exponents(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (GroupSpec::Cyclic(m), Element::Residue(x), Element::Residue(y)) => {
                Element::Residue(((*x as u128 + *y as u128) % *m as u128) as u64)
            }
            (GroupSpec::FreeProduct(fs), Element::Syllables(x), Element::Syllables(y)) => {
                Element::Syllables(free_product_mul(fs, x, y))
            }
            (GroupSpec::DirectProduct(fs), Element::Tuple(x), Element::Tuple(y)) => Element::Tuple(
                fs.iter()
                    .zip(x.iter().zip(y))
                    .map(|(f, (p, q))| f.mul_unchecked(p, q))
                    .collect(),
            ),
            _ => panic!("mul_unchecked on mismatched element kinds"),
        }
    }

    pub fn inv_unchecked(&self, a: &Element) -> Element {
        match (self, a) {
            (GroupSpec::Free(_), Element::Word(w)) => {
                Element::Word(w.iter().rev().map(|x| -x).collect())
            }
            (GroupSpec::FreeAbelian(_), Element::Exponents(v)) => {
                Element::Exponents(v.iter().map(|x| -x).collect())
            }
            (GroupSpec::Cyclic(m), Element::Residue(r)) => Element::Residue((m - r) % m),
            (GroupSpec::FreeProduct(fs), Element::Syllables(syl)) => Element::Syllables(
                syl.iter()
                    .rev()
                    .map(|(f, x)| (*f, fs[*f as usize].inv_unchecked(x)))
                    .collect(),
            ),
            (GroupSpec::DirectProduct(fs), Element::Tuple(xs)) => {
                Element::Tuple(fs.iter().zip(xs).map(|(f, x)| f.inv_unchecked(x)).collect())
            }
            _ => panic!("inv_unchecked on mismatched element kind"),
        }
    }

    pub fn is_identity_unchecked(&self, a: &Element) -> bool {
        match a {
            Element::Word(w) => w.is_empty(),
            Element::Exponents(v) => v.iter().all(|&x| x == 0),
            Element::Residue(r) => *r == 0,
            Element::Syllables(s) => s.is_empty(),
            Element::Tuple(xs) => match self {
                GroupSpec::DirectProduct(fs) => {
                    fs.iter().zip(xs).all(|(f, x)| f.is_identity_unchecked(x))
                }
                _ => false,
            },
        }
    }

    /// Standard generators, enumerated depth-first over factors. Generator
    /// `i` (1-based) is `standard_generators()[i - 1]`.
    pub fn standard_generators(&self) -> Vec<Element> {
        match self {
            GroupSpec::Free(k) => (1..=*k as i32).map(|i| Element::Word(vec![i])).collect(),
            GroupSpec::FreeAbelian(d) => (0..*d as usize)
                .map(|i| {
                    let mut v = vec![0; *d as usize];
                    v[i] = 1;
                    Element::Exponents(v)
                })
                .collect(),
            GroupSpec::Cyclic(_) => vec![Element::Residue(1)],
            GroupSpec::FreeProduct(fs) => fs
                .iter()
                .enumerate()
                .flat_map(|(i, f)| {
                    f.standard_generators()
                        .into_iter()
                        .map(move |g| Element::Syllables(vec![(i as u32, g)]))
                })
                .collect(),
            GroupSpec::DirectProduct(fs) => {
                let mut out = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    for g in f.standard_generators() {
                        let mut t: Vec<Element> = fs.iter().map(GroupSpec::identity).collect();
                        t[i] = g;
                        out.push(Element::Tuple(t));
                    }
                }
                out
            }
        }
    }

    /// Generator by signed index: `i > 0` is generator `i`, `-i` its inverse.
    pub fn generator(&self, signed: i32) -> Result<Element> {
        let gens = self.standard_generators();
        let idx = signed.unsigned_abs() as usize;
        if signed == 0 || idx > gens.len() {
            return Err(Error::InvalidArgument(format!(
                "generator index {signed} out of range (have {})",
                gens.len()
            )));
        }
        let g = gens[idx - 1].clone();
        Ok(if signed > 0 {
            g
        } else {
            self.inv_unchecked(&g)
        })
    }

    /// Product of a uniformly random number (at most `max_len`) of random
    /// signed standard generators.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, max_len: usize) -> Element {
        let gens = self.standard_generators();
        let len = rng.random_range(0..=max_len);
        let mut acc = self.identity();
        for _ in 0..len {
            let g = &gens[rng.random_range(0..gens.len())];
            let g = if rng.random_bool(0.5) {
                g.clone()
            } else {
                self.inv_unchecked(g)
            };
            acc = self.mul_unchecked(&acc, &g);
        }
        acc
    }
}

fn free_product_mul(
    fs: &[GroupSpec],
    a: &[(u32, Element)],
    b: &[(u32, Element)],
) -> Vec<(u32, Element)> {
    let mut left = a.to_vec();
    let mut i = 0;
    while i < b.len() {
        let (f, y) = &b[i];
        match left.last() {
            Some((g, x)) if g == f => {
                let factor = &fs[*f as usize];
                let z = factor.mul_unchecked(x, y);
                left.pop();
                i += 1;
                if !factor.is_identity_unchecked(&z) {
                    left.push((*f, z));
                    break;
                }
            }
            _ => break,
        }
    }
    left.extend_from_slice(&b[i..]);
    left
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Display>(xs: &[T], sep: &str) -> String {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(sep)
        }
        match self {
            Element::Word(w) => write!(f, "[{}]", join(w, ",")),
            Element::Exponents(v) => write!(f, "({})", join(v, ",")),
            Element::Residue(r) => write!(f, "{r}"),
            Element::Syllables(s) => {
                let parts: Vec<String> = s.iter().map(|(i, x)| format!("{i}:{x}")).collect();
                write!(f, "<{}>", parts.join(" "))
            }
            Element::Tuple(xs) => write!(f, "{{{}}}", join(xs, ";")),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Free(k) => write!(f, "F{k}"),
            GroupSpec::FreeAbelian(d) => write!(f, "Z^{d}"),
            GroupSpec::Cyclic(m) => write!(f, "Z/{m}"),
            GroupSpec::FreeProduct(fs) => {
                let parts: Vec<String> = fs
                    .iter()
                    .map(|g| match g {
                        GroupSpec::FreeProduct(_) | GroupSpec::DirectProduct(_) => format!("({g})"),
                        _ => g.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            GroupSpec::DirectProduct(fs) => {
                let parts: Vec<String> = fs
                    .iter()
                    .map(|g| match g {
                        GroupSpec::DirectProduct(_) => format!("({g})"),
                        _ => g.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join("x"))
            }
        }
    }
}
