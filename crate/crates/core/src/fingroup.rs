//! Finite abelian groups presented as products of cyclic groups `Z_{m1} x ... x Z_{mk}`.
//!
//! Elements are residue vectors, always kept reduced, so equality is structural.
//! The group is written multiplicatively in the rest of the crate (`g * h`,
//! identity `e`), even though the underlying arithmetic is component-wise addition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("modulus must be >= 1, got {0}")]
    ZeroModulus(u64),
    #[error("group order overflows u64")]
    OrderOverflow,
    #[error("element has {got} residues but the group has {expected} cyclic factors")]
    Mismatch { expected: usize, got: usize },
    #[error("residue {residue} at position {index} is not reduced modulo {modulus}")]
    Unreduced { index: usize, residue: u64, modulus: u64 },
}

/// `Z_{m1} x ... x Z_{mk}`. The empty product is the trivial group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroup")]
pub struct FiniteAbelianGroup {
    moduli: Vec<u64>,
    #[serde(skip)]
    order: u64,
}

#[derive(Deserialize)]
struct RawGroup {
    moduli: Vec<u64>,
}

impl TryFrom<RawGroup> for FiniteAbelianGroup {
    type Error = GroupError;
    fn try_from(raw: RawGroup) -> Result<Self, Self::Error> {
        FiniteAbelianGroup::new(raw.moduli)
    }
}

/// A residue vector. Only meaningful together with the group it was built for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    residues: Vec<u64>,
}

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// Unvalidated; check with [`FiniteAbelianGroup::validate`] before use.
    pub fn from_residues(residues: Vec<u64>) -> Self {
        Self { residues }
    }

    pub fn is_identity(&self) -> bool {
        self.residues.iter().all(|&r| r == 0)
    }
}

impl FiniteAbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Result<Self, GroupError> {
        let mut order: u64 = 1;
        for &m in &moduli {
            if m == 0 {
                return Err(GroupError::ZeroModulus(m));
            }
            order = order.checked_mul(m).ok_or(GroupError::OrderOverflow)?;
        }
        Ok(Self { moduli, order })
    }

    /// `Z_m`.
    pub fn cyclic(m: u64) -> Result<Self, GroupError> {
        Self::new(vec![m])
    }

    pub fn trivial() -> Self {
        Self { moduli: Vec::new(), order: 1 }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { residues: vec![0; self.moduli.len()] }
    }

    /// Builds an element, reducing each residue modulo its factor.
    pub fn element(&self, residues: &[i64]) -> Result<GroupElement, GroupError> {
        self.check_len(residues.len())?;
        let residues = residues.iter().zip(&self.moduli).map(|(&r, &m)| r.rem_euclid(m as i64) as u64).collect();
        Ok(GroupElement { residues })
    }

    /// Accepts an already-reduced residue vector; rejects anything else.
    pub fn element_reduced(&self, residues: Vec<u64>) -> Result<GroupElement, GroupError> {
        let g = GroupElement { residues };
        self.validate(&g)?;
        Ok(g)
    }

    /// The `i`-th standard generator (1 in factor `i`, 0 elsewhere).
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut residues = vec![0; self.moduli.len()];
        residues[i] = 1 % self.moduli[i];
        GroupElement { residues }
    }

    pub fn validate(&self, g: &GroupElement) -> Result<(), GroupError> {
        self.check_len(g.residues.len())?;
        for (index, (&residue, &modulus)) in g.residues.iter().zip(&self.moduli).enumerate() {
            if residue >= modulus {
                return Err(GroupError::Unreduced { index, residue, modulus });
            }
        }
        Ok(())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.validate(g).is_ok()
    }

    fn check_len(&self, got: usize) -> Result<(), GroupError> {
        if got != self.moduli.len() {
            return Err(GroupError::Mismatch { expected: self.moduli.len(), got });
        }
        Ok(())
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(g)?;
        self.validate(h)?;
        Ok(self.mul(g, h))
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(g)?;
        Ok(self.inv(g))
    }

    /// Smallest `k >= 1` with `g^k = e`.
    pub fn element_order(&self, g: &GroupElement) -> Result<u64, GroupError> {
        self.validate(g)?;
        Ok(self.order_of(g))
    }

    /// `g^k` for any integer `k`.
    pub fn pow(&self, g: &GroupElement, k: i64) -> GroupElement {
        let residues = g
            .residues
            .iter()
            .zip(&self.moduli)
            .map(|(&r, &m)| {
                let m = m as i128;
                ((r as i128 * k as i128).rem_euclid(m)) as u64
            })
            .collect();
        GroupElement { residues }
    }

    /// All elements, in lexicographic order of residue vectors.
    pub fn enumerate(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |mut idx| {
            let mut residues = vec![0; self.moduli.len()];
            for (slot, &m) in residues.iter_mut().zip(&self.moduli).rev() {
                *slot = idx % m;
                idx /= m;
            }
            GroupElement { residues }
        })
    }

    // Unchecked arithmetic for callers that have already validated their inputs.

    pub(crate) fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let residues = g
            .residues
            .iter()
            .zip(&h.residues)
            .zip(&self.moduli)
            .map(|((&a, &b), &m)| ((a as u128 + b as u128) % m as u128) as u64)
            .collect();
        GroupElement { residues }
    }

    pub(crate) fn inv(&self, g: &GroupElement) -> GroupElement {
        let residues = g.residues.iter().zip(&self.moduli).map(|(&a, &m)| (m - a) % m).collect();
        GroupElement { residues }
    }

    /// `g^{-1} h`.
    pub(crate) fn ldiv(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.mul(&self.inv(g), h)
    }

    pub(crate) fn order_of(&self, g: &GroupElement) -> u64 {
        g.residues.iter().zip(&self.moduli).map(|(&r, &m)| m / num_integer::gcd(r, m)).fold(1, num_integer::lcm)
    }
}

impl std::fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z_{m}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.residues.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_arithmetic() {
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        let a = z5.element(&[2]).unwrap();
        let b = z5.element(&[4]).unwrap();
        assert_eq!(z5.multiply(&a, &b).unwrap(), z5.element(&[1]).unwrap());
        assert_eq!(z5.multiply(&a, &z5.identity()).unwrap(), a);
    }

    #[test]
    fn product_group_squares() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        let x = g.element(&[1, 2]).unwrap();
        assert_eq!(g.multiply(&x, &x).unwrap(), g.element(&[0, 1]).unwrap());
    }

    #[test]
    fn inverse_and_order_in_z6() {
        let z6 = FiniteAbelianGroup::cyclic(6).unwrap();
        let two = z6.element(&[2]).unwrap();
        assert_eq!(z6.inverse(&two).unwrap(), z6.element(&[4]).unwrap());
        assert_eq!(z6.element_order(&two).unwrap(), 3);
        assert_eq!(z6.element_order(&z6.identity()).unwrap(), 1);
    }

    #[test]
    fn enumerate_klein_four() {
        let v = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let all: Vec<_> = v.enumerate().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all.iter().filter(|g| g.is_identity()).count(), 1);
        let mut dedup = all.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 4);
    }

    #[test]
    fn mismatched_groups_are_rejected() {
        let z6 = FiniteAbelianGroup::cyclic(6).unwrap();
        let v = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let x = v.generator(0);
        assert!(matches!(z6.multiply(&x, &z6.identity()), Err(GroupError::Mismatch { .. })));
        let bad = GroupElement { residues: vec![7] };
        assert!(matches!(z6.inverse(&bad), Err(GroupError::Unreduced { .. })));
    }

    #[test]
    fn zero_modulus_rejected() {
        assert!(FiniteAbelianGroup::new(vec![3, 0]).is_err());
        assert_eq!(FiniteAbelianGroup::trivial().order(), 1);
    }

    #[test]
    fn json_shapes() {
        let g: FiniteAbelianGroup = serde_json::from_str(r#"{"moduli":[2,3]}"#).unwrap();
        assert_eq!(g.order(), 6);
        assert!(serde_json::from_str::<FiniteAbelianGroup>(r#"{"moduli":[0]}"#).is_err());
        let e: GroupElement = serde_json::from_str(r#"{"residues":[1,2]}"#).unwrap();
        assert!(g.contains(&e));
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"moduli":[2,3]}"#);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn group_and_pair() -> impl Strategy<Value = (FiniteAbelianGroup, GroupElement, GroupElement)> {
            prop::collection::vec(1u64..8, 1..4)
                .prop_flat_map(|moduli| {
                    let g = FiniteAbelianGroup::new(moduli.clone()).unwrap();
                    let elem = moduli.iter().map(|&m| (0..m).boxed()).collect::<Vec<_>>();
                    (Just(g), elem.clone(), elem)
                })
                .prop_map(|(g, a, b)| {
                    let a = g.element_reduced(a).unwrap();
                    let b = g.element_reduced(b).unwrap();
                    (g, a, b)
                })
        }

        proptest! {
            #[test]
            fn commutative((g, a, b) in group_and_pair()) {
                prop_assert_eq!(g.multiply(&a, &b).unwrap(), g.multiply(&b, &a).unwrap());
            }

            #[test]
            fn order_divides_group_order((g, a, _b) in group_and_pair()) {
                let k = g.element_order(&a).unwrap();
                prop_assert_eq!(g.order() % k, 0);
                // brute force: k is the first power hitting the identity
                let mut acc = g.identity();
                for step in 1..=k {
                    acc = g.multiply(&acc, &a).unwrap();
                    prop_assert_eq!(acc.is_identity(), step == k);
                }
            }

            #[test]
            fn inverse_cancels((g, a, _b) in group_and_pair()) {
                let inv = g.inverse(&a).unwrap();
                prop_assert!(g.multiply(&a, &inv).unwrap().is_identity());
            }
        }
    }
}
