//! Complexes over a simplex, the Williams fiber product, and hyperbolized simplices.
//!
//! A complex over `Δ^n` assigns to every cell the face of `Δ^n` that contains its image
//! in its interior, stored as a bitmask of target vertices. The faces of a cell map into
//! faces of that carrier, so face masks are subsets of the cell's mask. A cell is
//! nondegenerate when it maps homeomorphically onto its carrier: its vertices then carry
//! distinct single colours and the mask has exactly `dim + 1` bits.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::simplicia::{ComplexError, DeltaComplex, PrismPiece};
use crate::towers::binomial;

#[derive(Debug, Error)]
pub enum HyperbError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("{dim}-cell {cell} has mask {mask:#b}, outside the target simplex of dimension {target}")]
    MaskRange { dim: usize, cell: usize, mask: u64, target: usize },
    #[error("face {face} of {dim}-cell {cell} is not carried by a face of the cell's carrier")]
    MaskNesting { dim: usize, cell: usize, face: usize },
    #[error("mask table does not match the complex's cell counts")]
    MaskShape,
    #[error("{dim}-cell {cell} does not map homeomorphically onto its carrier")]
    Degenerate { dim: usize, cell: usize },
    #[error("target simplices differ: {left} versus {right}")]
    TargetMismatch { left: usize, right: usize },
    #[error("complex of dimension {got} cannot be subdivided over a target of dimension {expected}")]
    DimensionMismatch { expected: usize, got: isize },
    #[error("hyperbolized simplices are built for dimensions 1 to 3, not {0}")]
    OutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexOverSimplex {
    pub complex: DeltaComplex,
    pub target_dim: usize,
    /// Carrier of each cell, `masks[q][cell]`.
    masks: Vec<Vec<u64>>,
}

fn full_mask(n: usize) -> u64 {
    (1u64 << (n + 1)) - 1
}

impl ComplexOverSimplex {
    pub fn new(complex: DeltaComplex, target_dim: usize, masks: Vec<Vec<u64>>) -> Result<Self, HyperbError> {
        assert!(target_dim < 63, "target dimension must be below 63");
        let f = complex.f_vector();
        if masks.len() != f.len() || masks.iter().zip(&f).any(|(m, &n)| m.len() != n) {
            return Err(HyperbError::MaskShape);
        }
        let full = full_mask(target_dim);
        for (q, row) in masks.iter().enumerate() {
            for (c, &m) in row.iter().enumerate() {
                if m == 0 || m & !full != 0 {
                    return Err(HyperbError::MaskRange { dim: q, cell: c, mask: m, target: target_dim });
                }
                if q > 0 {
                    for (i, &fc) in complex.faces(q, c).iter().enumerate() {
                        if masks[q - 1][fc] & !m != 0 {
                            return Err(HyperbError::MaskNesting { dim: q, cell: c, face: i });
                        }
                    }
                }
            }
        }
        Ok(Self { complex, target_dim, masks })
    }

    /// `Δ^n` mapped to itself by the identity.
    pub fn identity(n: usize) -> Self {
        let complex = DeltaComplex::simplex(n);
        let masks = (0..=n)
            .map(|q| (0..complex.count(q)).map(|c| complex.vertices(q, c).iter().fold(0, |m, &v| m | 1 << v)).collect())
            .collect();
        Self::new(complex, n, masks).expect("identity over a simplex")
    }

    pub fn mask(&self, q: usize, cell: usize) -> u64 {
        self.masks[q][cell]
    }

    /// The complex in the usual JSON form plus `carriers[q][cell]` as vertex bitmasks of
    /// the target simplex.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "target_dim": self.target_dim,
            "complex": self.complex.to_json(),
            "carriers": self.masks,
        })
    }

    /// Target colour of every vertex of a nondegenerate cell, in vertex order.
    pub fn colours(&self, q: usize, cell: usize) -> Option<Vec<usize>> {
        if self.masks[q][cell].count_ones() as usize != q + 1 {
            return None;
        }
        let cs: Vec<usize> = self
            .complex
            .vertices(q, cell)
            .iter()
            .map(|&v| {
                let m = self.masks[0][v];
                if m.count_ones() == 1 {
                    m.trailing_zeros() as usize
                } else {
                    usize::MAX
                }
            })
            .collect();
        let mut sorted = cs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != q + 1 || sorted.contains(&usize::MAX) {
            return None;
        }
        Some(cs)
    }

    pub fn check_nondegenerate(&self) -> Result<(), HyperbError> {
        for q in 0..self.masks.len() {
            for c in 0..self.masks[q].len() {
                if self.colours(q, c).is_none() {
                    return Err(HyperbError::Degenerate { dim: q, cell: c });
                }
            }
        }
        Ok(())
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.check_nondegenerate().is_ok()
    }

    /// Top cells whose carrier is all of `Δ^n`.
    pub fn cells_onto_target(&self) -> usize {
        let full = full_mask(self.target_dim);
        self.masks.get(self.target_dim).map_or(0, |row| row.iter().filter(|&&m| m == full).count())
    }

    /// The face of a nondegenerate cell spanned by the vertices whose colours lie in `mask`.
    fn restrict(&self, q: usize, cell: usize, mask: u64) -> (usize, usize) {
        let colours = self.colours(q, cell).expect("nondegenerate cell");
        let positions =
            colours.iter().enumerate().filter(|(_, &c)| mask >> c & 1 == 1).fold(0u64, |m, (i, _)| m | 1 << i);
        self.complex.subface(q, cell, positions)
    }
}

/// Barycentric subdivision mapped to `Δ^n` by sending each barycenter to the dimension
/// of the simplex it subdivides.
pub fn degree_structure(k: &DeltaComplex) -> ComplexOverSimplex {
    degree_structure_with_carriers(k).0
}

/// As [`degree_structure`], also returning the carrier cell `(dim, id)` in `k` of every
/// cell of the subdivision.
pub fn degree_structure_with_carriers(k: &DeltaComplex) -> (ComplexOverSimplex, Vec<Vec<(usize, usize)>>) {
    let sd = k.barycentric();
    let n = k.dim().max(0) as usize;
    let masks = sd
        .cells
        .iter()
        .map(|row| row.iter().map(|c| (0..c.flag.len()).fold(0u64, |m, i| m | 1 << c.vertex_rank(i))).collect())
        .collect();
    let carriers = sd.cells.iter().map(|row| row.iter().map(|c| (c.carrier_dim, c.carrier)).collect()).collect();
    let over = ComplexOverSimplex::new(sd.complex, n, masks).expect("degree map");
    (over, carriers)
}

/// Fiber product over the common target, with the pair of cells each cell comes from.
#[derive(Debug, Clone)]
pub struct FiberProduct {
    pub over: ComplexOverSimplex,
    /// `(cell of the first factor, cell of the second factor)` by dimension and id.
    pub pairs: Vec<Vec<(usize, usize)>>,
}

/// Cells are pairs `(c, r)` with `c` a cell of `x` and `r` a cell of `l` on the same
/// carrier. Since `r` maps homeomorphically onto the carrier, `(c, r)` is a copy of `c`,
/// and its `i`-th face is `c`'s `i`-th face paired with the face of `r` over that face's
/// carrier.
pub fn fiber_product(x: &ComplexOverSimplex, l: &ComplexOverSimplex) -> Result<FiberProduct, HyperbError> {
    if x.target_dim != l.target_dim {
        return Err(HyperbError::TargetMismatch { left: x.target_dim, right: l.target_dim });
    }
    l.check_nondegenerate()?;
    let mut by_mask: HashMap<u64, Vec<usize>> = HashMap::new();
    for (q, row) in l.masks.iter().enumerate() {
        for (r, &m) in row.iter().enumerate() {
            debug_assert_eq!(m.count_ones() as usize, q + 1);
            by_mask.entry(m).or_default().push(r);
        }
    }
    let top = x.masks.len();
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); top];
    let mut index: Vec<HashMap<(usize, usize), usize>> = vec![HashMap::new(); top];
    let mut masks: Vec<Vec<u64>> = vec![Vec::new(); top];
    for q in 0..top {
        for c in 0..x.masks[q].len() {
            let m = x.masks[q][c];
            for &r in by_mask.get(&m).map(|v| v.as_slice()).unwrap_or(&[]) {
                index[q].insert((c, r), pairs[q].len());
                pairs[q].push((c, r));
                masks[q].push(m);
            }
        }
    }
    // trailing dimensions with no cells
    while pairs.last().is_some_and(|p| p.is_empty()) {
        pairs.pop();
        masks.pop();
    }
    let mut faces = Vec::new();
    for q in 1..pairs.len() {
        let fq = pairs[q]
            .iter()
            .map(|&(c, r)| {
                let rq = x.masks[q][c].count_ones() as usize - 1;
                (0..=q)
                    .map(|i| {
                        let fc = x.complex.face(q, c, i);
                        let (_, fr) = l.restrict(rq, r, x.masks[q - 1][fc]);
                        index[q - 1][&(fc, fr)]
                    })
                    .collect()
            })
            .collect();
        faces.push(fq);
    }
    let vertices = pairs.first().map_or(0, |p| p.len());
    let complex = DeltaComplex::new(vertices, faces)?;
    let over = ComplexOverSimplex::new(complex, x.target_dim, masks)?;
    Ok(FiberProduct { over, pairs })
}

/// `x` fibered with the degree structure of `k`; `k` must have the target's dimension.
pub fn williams(x: &ComplexOverSimplex, k: &DeltaComplex) -> Result<ComplexOverSimplex, HyperbError> {
    if k.dim() != x.target_dim as isize {
        return Err(HyperbError::DimensionMismatch { expected: x.target_dim, got: k.dim() });
    }
    Ok(fiber_product(x, &degree_structure(k))?.over)
}

/// The hyperbolized sphere `Y^n = X^n` fibered with the subdivided boundary of
/// `Δ^(n+1)`, carried over `Δ^(n+1)` through the boundary: each cell is assigned the face
/// of `∂Δ^(n+1)` its subdivision cell lies in.
fn sphere_over_boundary(x: &ComplexOverSimplex) -> Result<(ComplexOverSimplex, Vec<u64>), HyperbError> {
    let n = x.target_dim;
    let boundary = DeltaComplex::simplex_boundary(n + 1);
    let (l, carriers) = degree_structure_with_carriers(&boundary);
    let fp = fiber_product(x, &l)?;
    let mut masks = Vec::new();
    for (q, row) in fp.pairs.iter().enumerate() {
        for &(c, r) in row {
            let rq = x.mask(q, c).count_ones() as usize - 1;
            let (bd, bc) = carriers[rq][r];
            masks.push(boundary.vertices(bd, bc).iter().fold(0u64, |m, &v| m | 1 << v));
        }
    }
    Ok((fp.over, masks))
}

/// One stage of the hyperbolization: `Y^n` and `X^(n+1) = Y^n x [0, 1]`.
#[derive(Debug, Clone)]
pub struct HyperbolizedStage {
    pub sphere: ComplexOverSimplex,
    pub next: ComplexOverSimplex,
}

/// Builds `Y^n` from `X^n` and the prism `X^(n+1)` over `Δ^(n+1)`: the two ends of the
/// prism are carried through the boundary of `Δ^(n+1)`, everything else onto all of it.
pub fn hyperbolize_step(x: &ComplexOverSimplex) -> Result<HyperbolizedStage, HyperbError> {
    let (sphere, sphere_masks) = sphere_over_boundary(x)?;
    // per-dimension offsets into the flat mask list
    let f = sphere.complex.f_vector();
    let mut offsets = vec![0usize; f.len()];
    for q in 1..f.len() {
        offsets[q] = offsets[q - 1] + f[q - 1];
    }
    let prism = sphere.complex.prism();
    let full = full_mask(x.target_dim + 1);
    let masks = prism
        .cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| match c.piece {
                    PrismPiece::Bottom | PrismPiece::Top => sphere_masks[offsets[c.base_dim] + c.base],
                    _ => full,
                })
                .collect()
        })
        .collect();
    let next = ComplexOverSimplex::new(prism.complex, x.target_dim + 1, masks)?;
    Ok(HyperbolizedStage { sphere, next })
}

/// `X^1 .. X^n` and `Y^1 .. Y^(n-1)` for `n` in `1..=3`.
#[derive(Debug, Clone)]
pub struct Hyperbolization {
    pub simplices: Vec<ComplexOverSimplex>,
    pub spheres: Vec<ComplexOverSimplex>,
}

pub fn hyperbolized_simplex(n: usize) -> Result<Hyperbolization, HyperbError> {
    if !(1..=3).contains(&n) {
        return Err(HyperbError::OutOfRange(n));
    }
    let mut simplices = vec![ComplexOverSimplex::identity(1)];
    let mut spheres = Vec::new();
    while simplices.len() < n {
        let stage = hyperbolize_step(simplices.last().unwrap())?;
        spheres.push(stage.sphere);
        simplices.push(stage.next);
    }
    Ok(Hyperbolization { simplices, spheres })
}

/// The sphere `Y^n` for `n` in `1..=2`.
pub fn hyperbolized_sphere(n: usize) -> Result<ComplexOverSimplex, HyperbError> {
    if !(1..=2).contains(&n) {
        return Err(HyperbError::OutOfRange(n));
    }
    let h = hyperbolized_simplex(n + 1)?;
    Ok(h.spheres[n - 1].clone())
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `n! (n-1)!^2 ... 3!^2 2!` for `n >= 4`; the pattern is ambiguous below that.
pub fn z_formula(n: u64) -> Option<BigInt> {
    if n < 4 {
        return None;
    }
    let mut z = factorial(n) * factorial(2);
    for k in 3..n {
        let f = factorial(k);
        z *= &f * &f;
    }
    Some(z)
}

/// Top simplex count of `X^n` by the construction: `X^1` is one edge,
/// `Y^n` has `(n+2)!` times as many top cells as `X^n`, and `X^(n+1)` has `n+1` times as
/// many as `Y^n`.
pub fn construction_count(n: u64) -> BigInt {
    let mut x = BigInt::one();
    for k in 1..n {
        x = x * factorial(k + 2) * BigInt::from(k + 1);
    }
    x
}

/// `2 z(4k) (4k+1)! m`: top simplices of the relative hyperbolization of a complex with
/// `m` top simplices in dimension `4k`.
pub fn relative_hyperbolization_count(k: u64, simplices: u64) -> BigInt {
    assert!(k >= 1, "k must be at least 1");
    BigInt::from(2) * z_formula(4 * k).unwrap() * factorial(4 * k + 1) * BigInt::from(simplices)
}

/// `2/(2k+1) binom(4k+1, 2k+1) 2 z(4k) (4k+1)!`, computed exactly.
pub fn hyperbolization_constant(k: u64) -> BigInt {
    assert!(k >= 1, "k must be at least 1");
    let num = BigInt::from(2)
        * binomial(4 * k + 1, 2 * k + 1)
        * BigInt::from(2)
        * z_formula(4 * k).unwrap()
        * factorial(4 * k + 1);
    let (q, r) = num.div_rem(&BigInt::from(2 * k + 1));
    assert!(r.is_zero(), "constant is not an integer for k = {k}");
    q
}

/// One row of the comparison between the closed formula and the construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub n: u64,
    pub construction: BigInt,
    /// Whether the construction count was obtained by building the complex.
    pub built: bool,
    pub formula: Option<BigInt>,
}

impl CountRow {
    /// `construction / formula`, when the formula applies.
    pub fn ratio(&self) -> Option<f64> {
        let f = self.formula.as_ref()?;
        let (q, r) = self.construction.div_rem(f);
        let q: f64 = q.to_string().parse().ok()?;
        let r: f64 = r.to_string().parse().ok()?;
        let f: f64 = f.to_string().parse().ok()?;
        Some(q + r / f)
    }
}

/// Rows for `n = 1..=4`; `X^1..X^3` are built, `X^4` is extrapolated.
pub fn count_table() -> Result<Vec<CountRow>, HyperbError> {
    let h = hyperbolized_simplex(3)?;
    let mut rows: Vec<CountRow> = h
        .simplices
        .iter()
        .enumerate()
        .map(|(i, x)| CountRow {
            n: i as u64 + 1,
            construction: BigInt::from(x.complex.top_cells()),
            built: true,
            formula: z_formula(i as u64 + 1),
        })
        .collect();
    rows.push(CountRow { n: 4, construction: construction_count(4), built: false, formula: z_formula(4) });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_structures() {
        let d1 = degree_structure(&DeltaComplex::simplex(1));
        assert_eq!(d1.complex.top_cells(), 2);
        assert!(d1.is_nondegenerate());
        assert_eq!(d1.cells_onto_target(), 2);
        let hex = degree_structure(&DeltaComplex::simplex_boundary(2));
        assert_eq!(hex.complex.f_vector(), vec![6, 6]);
        assert_eq!(hex.cells_onto_target(), 6);
        let s2 = degree_structure(&DeltaComplex::simplex_boundary(3));
        assert_eq!(s2.complex.top_cells(), 24);
        assert!(s2.is_nondegenerate());
    }

    #[test]
    fn unit_law() {
        for k in [DeltaComplex::simplex_boundary(3), DeltaComplex::simplex(2)] {
            let l = degree_structure(&k);
            let fp = fiber_product(&ComplexOverSimplex::identity(2), &l).unwrap();
            assert_eq!(fp.over.complex.f_vector(), l.complex.f_vector());
            // each cell of l appears once, with faces in the same places
            for q in 1..fp.pairs.len() {
                for (id, &(_, r)) in fp.pairs[q].iter().enumerate() {
                    let mapped: Vec<usize> =
                        fp.over.complex.faces(q, id).iter().map(|&f| fp.pairs[q - 1][f].1).collect();
                    assert_eq!(mapped, l.complex.faces(q, r));
                }
            }
        }
    }

    #[test]
    fn y1_is_a_hexagon() {
        let y1 = williams(&ComplexOverSimplex::identity(1), &DeltaComplex::simplex_boundary(2)).unwrap();
        assert_eq!(y1.complex.f_vector(), vec![6, 6]);
        let h = y1.complex.homology();
        assert!(h.h(0).is(1, &[]) && h.h(1).is(1, &[]));
    }

    #[test]
    fn fiber_product_counts_multiply() {
        let x = ComplexOverSimplex::identity(2);
        let l = degree_structure(&DeltaComplex::simplex_boundary(3));
        let fp = fiber_product(&x, &l).unwrap();
        assert_eq!(fp.over.complex.top_cells(), x.cells_onto_target() * l.cells_onto_target());
    }

    #[test]
    fn mismatches_rejected() {
        let x = ComplexOverSimplex::identity(1);
        assert!(matches!(fiber_product(&x, &ComplexOverSimplex::identity(2)), Err(HyperbError::TargetMismatch { .. })));
        assert!(matches!(williams(&x, &DeltaComplex::simplex_boundary(3)), Err(HyperbError::DimensionMismatch { .. })));
        assert!(matches!(hyperbolized_simplex(4), Err(HyperbError::OutOfRange(4))));
        // a mask not nested in its cell's mask
        let r = ComplexOverSimplex::new(DeltaComplex::simplex(1), 1, vec![vec![1, 2], vec![1]]);
        assert!(matches!(r, Err(HyperbError::MaskNesting { .. })));
    }

    #[test]
    fn x2_is_an_annulus() {
        let h = hyperbolized_simplex(2).unwrap();
        let x2 = &h.simplices[1];
        assert_eq!(x2.complex.top_cells(), 12);
        assert_eq!(x2.complex.euler(), 0);
        assert!(x2.complex.homology().h(1).is(1, &[]));
        let b = x2.complex.boundary();
        assert_eq!(b.f_vector(), vec![12, 12]);
        assert!(b.homology().h(0).is(2, &[]));
    }

    #[test]
    fn y2_is_a_closed_orientable_surface() {
        let y2 = hyperbolized_sphere(2).unwrap();
        assert_eq!(y2.complex.top_cells(), 288);
        assert!(y2.complex.boundary().f_vector().is_empty());
        let h = y2.complex.homology();
        assert!(h.h(0).is(1, &[]) && h.h(2).is(1, &[]) && h.is_torsion_free());
        let chi = y2.complex.euler();
        assert_eq!(h.h(1).rank as i64, 2 - chi);
    }

    #[test]
    fn x3_counts() {
        let h = hyperbolized_simplex(3).unwrap();
        assert_eq!(h.simplices[2].complex.top_cells(), 864);
        assert_eq!(h.simplices[2].complex.euler(), h.spheres[1].complex.euler());
    }

    #[test]
    fn constants() {
        assert_eq!(z_formula(4), Some(BigInt::from(1728)));
        assert_eq!(z_formula(3), None);
        assert_eq!(hyperbolization_constant(1), BigInt::from(2_764_800));
        assert_eq!(relative_hyperbolization_count(1, 10), BigInt::from(4_147_200));
        let t = count_table().unwrap();
        let counts: Vec<BigInt> = t.iter().map(|r| r.construction.clone()).collect();
        assert_eq!(counts, [1, 12, 864, 414_720].map(BigInt::from).to_vec());
        assert_eq!(t[3].ratio(), Some(240.0));
        for (n, want) in [(1, 1), (2, 12), (3, 864), (4, 414_720)] {
            assert_eq!(construction_count(n), BigInt::from(want));
        }
    }
}
