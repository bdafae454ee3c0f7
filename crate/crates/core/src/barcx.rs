//! The Moore complex `ZBG` of the simplicial classifying space of a finite abelian group.
//!
//! A generator in degree `n` is a tuple `[g1, ..., gn]`; degree 0 has the single base
//! point `[ ]`. The face maps are
//!
//! ```text
//! d_0 [g1,...,gn] = [g2,...,gn]
//! d_i [g1,...,gn] = [g1,...,g_i g_{i+1},...,gn]      0 < i < n
//! d_n [g1,...,gn] = [g1,...,g_{n-1}]
//! ```
//!
//! and the boundary is their alternating sum. Coefficients are arbitrary precision.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingroup::{FiniteAbelianGroup, GroupElement, GroupError};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("generator of degree {got} in a chain of degree {expected}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("homogeneous simplex needs at least one label")]
    EmptySimplex,
}

/// `[g1, ..., gn]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BarGenerator {
    entries: Vec<GroupElement>,
}

impl BarGenerator {
    pub fn new(entries: Vec<GroupElement>) -> Self {
        Self { entries }
    }

    /// The degree-0 base point `[ ]`.
    pub fn base_point() -> Self {
        Self { entries: Vec::new() }
    }

    /// `[e, ..., e]` in degree `n`.
    pub fn identity_tuple(group: &FiniteAbelianGroup, n: usize) -> Self {
        Self { entries: vec![group.identity(); n] }
    }

    pub fn degree(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[GroupElement] {
        &self.entries
    }

    pub fn validate(&self, group: &FiniteAbelianGroup) -> Result<(), GroupError> {
        self.entries.iter().try_for_each(|g| group.validate(g))
    }

    /// Some entry is the identity.
    pub fn is_degenerate(&self) -> bool {
        self.entries.iter().any(GroupElement::is_identity)
    }

    /// The `i`-th simplicial face, `0 <= i <= n`. Undefined for the base point.
    pub fn face(&self, group: &FiniteAbelianGroup, i: usize) -> BarGenerator {
        let n = self.entries.len();
        assert!(n >= 1 && i <= n, "face index {i} out of range for degree {n}");
        let entries = if i == 0 {
            self.entries[1..].to_vec()
        } else if i == n {
            self.entries[..n - 1].to_vec()
        } else {
            let mut out = Vec::with_capacity(n - 1);
            out.extend_from_slice(&self.entries[..i - 1]);
            out.push(group.mul(&self.entries[i - 1], &self.entries[i]));
            out.extend_from_slice(&self.entries[i + 1..]);
            out
        };
        BarGenerator { entries }
    }

    /// Vertex labels `(h, h g1, h g1 g2, ...)` of the homogeneous simplex with base `h`.
    pub fn vertex_labels(&self, group: &FiniteAbelianGroup, base: &GroupElement) -> Vec<GroupElement> {
        let mut labels = Vec::with_capacity(self.entries.len() + 1);
        labels.push(base.clone());
        for g in &self.entries {
            let next = group.mul(labels.last().unwrap(), g);
            labels.push(next);
        }
        labels
    }
}

impl fmt::Display for BarGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|g| g.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Serialize for BarGenerator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for e in &self.entries {
            seq.serialize_element(e.residues())?;
        }
        seq.end()
    }
}

/// Deserializes residue vectors without a group; callers validate against one.
impl<'de> Deserialize<'de> for BarGenerator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<Vec<u64>> = Vec::deserialize(d)?;
        Ok(BarGenerator { entries: raw.into_iter().map(GroupElement::from_residues).collect() })
    }
}

/// Orientation of a single simplex in a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn from_parity(i: usize) -> Self {
        if i.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// One signed simplex of a decomposition. Unlike a [`BarChain`], a list of these keeps
/// cancelling pairs apart, which is what the polytope assembly works on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedSimplex {
    pub gen: BarGenerator,
    pub sign: Sign,
}

impl SignedSimplex {
    pub fn new(gen: BarGenerator, sign: Sign) -> Self {
        Self { gen, sign }
    }
}

/// A finite integer combination of bar generators of one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarChain {
    degree: usize,
    terms: BTreeMap<BarGenerator, BigInt>,
}

impl BarChain {
    pub fn zero(degree: usize) -> Self {
        Self { degree, terms: BTreeMap::new() }
    }

    pub fn from_generator(gen: BarGenerator) -> Self {
        let mut c = Self::zero(gen.degree());
        c.terms.insert(gen, BigInt::one());
        c
    }

    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (BarGenerator, BigInt)>,
    {
        let mut c = Self::zero(degree);
        for (gen, coef) in terms {
            c.add_term(gen, coef)?;
        }
        Ok(c)
    }

    /// Collapses a decomposition into a chain.
    pub fn from_signed(degree: usize, cells: &[SignedSimplex]) -> Result<Self, ChainError> {
        Self::from_terms(degree, cells.iter().map(|s| (s.gen.clone(), BigInt::from(s.sign.value()))))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&BarGenerator, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, gen: &BarGenerator) -> BigInt {
        self.terms.get(gen).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, gen: BarGenerator, coef: BigInt) -> Result<(), ChainError> {
        if gen.degree() != self.degree {
            return Err(ChainError::DegreeMismatch { expected: self.degree, got: gen.degree() });
        }
        self.accumulate(gen, coef);
        Ok(())
    }

    pub(crate) fn accumulate(&mut self, gen: BarGenerator, coef: BigInt) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(gen) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn accumulate_i64(&mut self, gen: BarGenerator, coef: i64) {
        self.accumulate(gen, BigInt::from(coef));
    }

    pub fn add_chain(&mut self, other: &BarChain) -> Result<(), ChainError> {
        self.add_scaled(other, &BigInt::one())
    }

    pub fn add_scaled(&mut self, other: &BarChain, factor: &BigInt) -> Result<(), ChainError> {
        if other.degree != self.degree && !other.is_zero() {
            return Err(ChainError::DegreeMismatch { expected: self.degree, got: other.degree });
        }
        for (gen, coef) in &other.terms {
            self.accumulate(gen.clone(), coef * factor);
        }
        Ok(())
    }

    pub fn scaled(&self, factor: &BigInt) -> BarChain {
        let mut out = BarChain::zero(self.degree);
        if factor.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(g, c)| (g.clone(), c * factor)).collect();
        out
    }

    pub fn negated(&self) -> BarChain {
        self.scaled(&BigInt::from(-1))
    }

    /// `self - other`; panics on mismatched nonzero degrees.
    pub fn minus(&self, other: &BarChain) -> BarChain {
        let mut out = self.clone();
        out.add_scaled(other, &BigInt::from(-1)).expect("degree mismatch in chain subtraction");
        out
    }

    /// Sum of absolute values of the coefficients.
    pub fn complexity(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Sum of the coefficients; the multiplicity of `[e,...,e]` in the degenerate shadow.
    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Alternating sum of faces. Degree 0 and degree 1 both map to zero (one-vertex `BG`).
    pub fn boundary(&self, group: &FiniteAbelianGroup) -> BarChain {
        if self.degree == 0 {
            return BarChain::zero(0);
        }
        let mut out = BarChain::zero(self.degree - 1);
        for (gen, coef) in &self.terms {
            for i in 0..=self.degree {
                let c = if i % 2 == 0 { coef.clone() } else { -coef };
                out.accumulate(gen.face(group, i), c);
            }
        }
        out
    }

    /// Drops every degenerate generator (the projection onto the normalized complex).
    pub fn normalize(&self) -> BarChain {
        BarChain {
            degree: self.degree,
            terms: self.terms.iter().filter(|(g, _)| !g.is_degenerate()).map(|(g, c)| (g.clone(), c.clone())).collect(),
        }
    }

    /// Expands each term `k [g]` into `|k|` signed copies of `[g]`, in canonical order.
    pub fn decompose(&self) -> Vec<SignedSimplex> {
        let mut out = Vec::new();
        for (gen, coef) in &self.terms {
            let sign = if coef.is_negative() { Sign::Minus } else { Sign::Plus };
            let mut k = coef.abs();
            while !k.is_zero() {
                out.push(SignedSimplex::new(gen.clone(), sign));
                k -= 1;
            }
        }
        out
    }

    pub fn validate(&self, group: &FiniteAbelianGroup) -> Result<(), ChainError> {
        for gen in self.terms.keys() {
            gen.validate(group)?;
        }
        Ok(())
    }
}

impl fmt::Display for BarChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (gen, coef) in &self.terms {
            let (sign, mag) = if coef.is_negative() { ("-", -coef) } else { ("+", coef.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if mag.is_one() {
                write!(f, "{gen}")?;
            } else {
                write!(f, "{mag}{gen}")?;
            }
        }
        Ok(())
    }
}

/// `(h_0, ..., h_n)`: an ordered simplex of the universal cover `EG`, by vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomogeneousSimplex {
    labels: Vec<GroupElement>,
}

impl HomogeneousSimplex {
    pub fn new(labels: Vec<GroupElement>) -> Result<Self, ChainError> {
        if labels.is_empty() {
            return Err(ChainError::EmptySimplex);
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[GroupElement] {
        &self.labels
    }

    pub fn dimension(&self) -> usize {
        self.labels.len() - 1
    }

    /// `(h_0, [h_0^{-1} h_1, ..., h_{n-1}^{-1} h_n])`.
    pub fn to_bar(&self, group: &FiniteAbelianGroup) -> (GroupElement, BarGenerator) {
        hom_to_bar(group, &self.labels)
    }
}

/// Base label and bar generator of the homogeneous simplex with the given labels.
pub fn hom_to_bar(group: &FiniteAbelianGroup, labels: &[GroupElement]) -> (GroupElement, BarGenerator) {
    let entries = labels.windows(2).map(|w| group.ldiv(&w[0], &w[1])).collect();
    (labels[0].clone(), BarGenerator::new(entries))
}

// ---- JSON ----------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawTerm {
    gen: Vec<Vec<u64>>,
    #[serde(with = "crate::jsonint")]
    coef: BigInt,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    degree: usize,
    terms: Vec<RawTerm>,
}

impl BarChain {
    /// `{"degree":n,"terms":[{"gen":[[r...],...],"coef":k},...]}` in canonical order.
    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = RawChain {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(g, c)| RawTerm {
                    gen: g.entries.iter().map(|e| e.residues().to_vec()).collect(),
                    coef: c.clone(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("chain serialization")
    }
}

/// A chain file read without collapsing repeated generators: each listed term stays a
/// separate group of signed simplices, in file order.
#[derive(Debug, Clone)]
pub struct ChainFile {
    pub degree: usize,
    pub cells: Vec<SignedSimplex>,
}

impl ChainFile {
    pub fn parse(group: &FiniteAbelianGroup, text: &str) -> Result<Self, ChainFileError> {
        let raw: RawChain = serde_json::from_str(text)?;
        let mut cells = Vec::new();
        for term in raw.terms {
            if term.gen.len() != raw.degree {
                return Err(ChainError::DegreeMismatch { expected: raw.degree, got: term.gen.len() }.into());
            }
            let entries = term
                .gen
                .into_iter()
                .map(|r| group.element_reduced(r))
                .collect::<Result<Vec<_>, _>>()
                .map_err(ChainError::from)?;
            let gen = BarGenerator::new(entries);
            let sign = if term.coef.is_negative() { Sign::Minus } else { Sign::Plus };
            let mut k = term.coef.abs();
            while !k.is_zero() {
                cells.push(SignedSimplex::new(gen.clone(), sign));
                k -= 1;
            }
        }
        Ok(Self { degree: raw.degree, cells })
    }

    pub fn chain(&self) -> BarChain {
        BarChain::from_signed(self.degree, &self.cells).expect("degrees checked on parse")
    }
}

#[derive(Debug, Error)]
pub enum ChainFileError {
    #[error("malformed chain JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(m).unwrap()
    }

    fn el(g: &FiniteAbelianGroup, r: &[i64]) -> GroupElement {
        g.element(r).unwrap()
    }

    fn gen(g: &FiniteAbelianGroup, rs: &[i64]) -> BarGenerator {
        BarGenerator::new(rs.iter().map(|&r| el(g, &[r])).collect())
    }

    #[test]
    fn two_simplex_boundary() {
        let g = z(7);
        let c = BarChain::from_generator(gen(&g, &[2, 3]));
        let expected = BarChain::from_terms(
            1,
            [(gen(&g, &[3]), BigInt::from(1)), (gen(&g, &[5]), BigInt::from(-1)), (gen(&g, &[2]), BigInt::from(1))],
        )
        .unwrap();
        assert_eq!(c.boundary(&g), expected);
    }

    #[test]
    fn degree_one_and_zero_boundaries_vanish() {
        let g = z(3);
        assert!(BarChain::from_generator(gen(&g, &[1])).boundary(&g).is_zero());
        let mut pt = BarChain::zero(0);
        pt.add_term(BarGenerator::base_point(), BigInt::from(4)).unwrap();
        assert!(pt.boundary(&g).is_zero());
    }

    #[test]
    fn degeneracy_and_normalize() {
        let g = z(5);
        assert!(gen(&g, &[1, 0, 2]).is_degenerate());
        assert!(!gen(&g, &[1, 4]).is_degenerate());
        let c = BarChain::from_terms(2, [(gen(&g, &[1, 2]), BigInt::from(1)), (gen(&g, &[0, 3]), BigInt::from(3))])
            .unwrap();
        assert_eq!(c.normalize(), BarChain::from_generator(gen(&g, &[1, 2])));
    }

    #[test]
    fn hom_to_bar_examples() {
        let g = FiniteAbelianGroup::new(vec![4, 4]).unwrap();
        let a = el(&g, &[1, 0]);
        let b = el(&g, &[0, 1]);
        let ab = g.mul(&a, &b);
        let s = HomogeneousSimplex::new(vec![g.identity(), a.clone(), ab]).unwrap();
        let (base, bar) = s.to_bar(&g);
        assert!(base.is_identity());
        assert_eq!(bar, BarGenerator::new(vec![a, b.clone()]));
        let (base, bar) = hom_to_bar(&g, &[b.clone(), b.clone(), b.clone()]);
        assert_eq!(base, b);
        assert_eq!(bar, BarGenerator::identity_tuple(&g, 2));
        assert!(HomogeneousSimplex::new(vec![]).is_err());
    }

    #[test]
    fn complexity_examples() {
        let g = z(5);
        assert_eq!(BarChain::zero(1).complexity(), BigInt::zero());
        let c = BarChain::from_terms(1, [(gen(&g, &[1]), BigInt::from(2)), (gen(&g, &[2]), BigInt::from(-3))]).unwrap();
        assert_eq!(c.complexity(), BigInt::from(5));
        assert_eq!(c.to_string(), "2[(1)] - 3[(2)]");
    }

    #[test]
    fn degree_mismatch_rejected() {
        let g = z(5);
        let mut c = BarChain::zero(2);
        assert!(c.add_term(gen(&g, &[1]), BigInt::one()).is_err());
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let g = z(5);
        let c = BarChain::from_terms(2, [(gen(&g, &[3, 1]), BigInt::from(-1)), (gen(&g, &[1, 2]), BigInt::from(2))])
            .unwrap();
        let v = c.to_json_value();
        assert_eq!(v.to_string(), r#"{"degree":2,"terms":[{"gen":[[1],[2]],"coef":2},{"gen":[[3],[1]],"coef":-1}]}"#);
        let back = ChainFile::parse(&g, &v.to_string()).unwrap();
        assert_eq!(back.cells.len(), 3);
        assert_eq!(back.chain(), c);
    }

    #[test]
    fn chain_file_keeps_cancelling_terms() {
        let g = z(5);
        let text = r#"{"degree":1,"terms":[{"gen":[[1]],"coef":1},{"gen":[[1]],"coef":-1}]}"#;
        let f = ChainFile::parse(&g, text).unwrap();
        assert_eq!(f.cells.len(), 2);
        assert!(f.chain().is_zero());
        let bad = r#"{"degree":2,"terms":[{"gen":[[1]],"coef":1}]}"#;
        assert!(ChainFile::parse(&g, bad).is_err());
        let unreduced = r#"{"degree":1,"terms":[{"gen":[[9]],"coef":1}]}"#;
        assert!(ChainFile::parse(&g, unreduced).is_err());
    }
}
