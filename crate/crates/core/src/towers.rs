//! Coverings, towers of coverings, simplicial cylinders, and the bounding chain.
//!
//! For a cycle `C` of degree `n` the bounding chain is built as follows: the signed
//! simplices of `C` are assembled into colored polytopes; each polytope is replaced by a
//! tower of coverings over all of its boundary pairs so that paired boundary faces carry
//! equal vertex labels; each tower is then coned off to its degenerate shadow by the
//! prism (cylinder) construction. Boundary faces cancel in pairs, leaving
//! `d(u) = N * (C - E)` with `E = sum sign * [e, ..., e]`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::barcx::{hom_to_bar, BarChain, BarGenerator, ChainError, Sign, SignedSimplex};
use crate::fingroup::{FiniteAbelianGroup, GroupElement};
use crate::gcp::{
    assemble_polytopes, BoundaryPair, ColoredCell, ColoredPolytope, FaceRef, PolytopeError, VertexLabeling,
};

/// Largest tower (in cells) built unless the caller raises the cap.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

/// Rebuilds allowed when dangling labels disagree before giving up.
const MAX_EXTENSION_ROUNDS: usize = 8;

#[derive(Debug, Error)]
pub enum TowerError {
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("tower would need {needed} cells, above the cap of {cap}")]
    CellCap { needed: u128, cap: usize },
    #[error("{0:?} is not a boundary pair of the polytope")]
    NotAPair(BoundaryPair),
    #[error("face {0:?} is used by more than one pair")]
    RepeatedFace(FaceRef),
    #[error("dangling pair {pair} still has mismatched labels after extension; the coloring is broken")]
    LabelMismatch { pair: usize },
    #[error("labels on cell {cell} do not reproduce its generator")]
    InconsistentLabels { cell: usize },
}

/// A pair whose chain of copies had to be lengthened to close up its labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HolonomyExtension {
    pub pair: usize,
    pub residual: GroupElement,
    pub old_height: u64,
    pub new_height: u64,
}

#[derive(Debug, Clone)]
pub struct Tower {
    pub base: ColoredPolytope,
    /// Boundary pairs of the base, in the order they were covered.
    pub pairs: Vec<BoundaryPair>,
    /// Number of copies stacked along each pair.
    pub heights: Vec<u64>,
    pub copies: u64,
    pub result: ColoredPolytope,
    /// The boundary pairs of the result, one per (pair, copy with that digit at zero).
    pub dangling: Vec<BoundaryPair>,
    pub extensions: Vec<HolonomyExtension>,
}

impl Tower {
    pub fn cell_count(&self) -> usize {
        self.result.cells().len()
    }
}

fn check_pairs(group: &FiniteAbelianGroup, base: &ColoredPolytope, pairs: &[BoundaryPair]) -> Result<(), TowerError> {
    let free: std::collections::HashSet<FaceRef> = base.unglued_faces().into_iter().collect();
    let mut seen = std::collections::HashSet::new();
    for p in pairs {
        if !free.contains(&p.plus)
            || !free.contains(&p.minus)
            || base.face_gen(group, p.plus) != base.face_gen(group, p.minus)
            || base.induced_sign(p.plus) != Sign::Plus
            || base.induced_sign(p.minus) != Sign::Minus
        {
            return Err(TowerError::NotAPair(*p));
        }
        for f in [p.plus, p.minus] {
            if !seen.insert(f) {
                return Err(TowerError::RepeatedFace(f));
            }
        }
    }
    Ok(())
}

/// Stacks copies of `base` in a mixed-radix grid: copy `c` has digit `c_k` along pair
/// `k`, and the minus face of pair `k` in copy `c` is glued to its plus face in the copy
/// one step further along `k`.
fn stack(base: &ColoredPolytope, pairs: &[BoundaryPair], heights: &[u64]) -> (ColoredPolytope, Vec<BoundaryPair>, u64) {
    let m = base.cells().len();
    let copies: u64 = heights.iter().product();
    let mut strides = Vec::with_capacity(heights.len());
    let mut s = 1u64;
    for &h in heights {
        strides.push(s);
        s *= h;
    }
    let digit = |c: u64, k: usize| (c / strides[k]) % heights[k];
    let at = |c: u64, f: FaceRef| FaceRef::new(c as usize * m + f.cell, f.face);

    let mut cells = Vec::with_capacity(copies as usize * m);
    let mut gluings = Vec::new();
    let mut dangling = Vec::new();
    for c in 0..copies {
        for cell in base.cells() {
            cells.push(ColoredCell { id: c as usize * m + cell.id, gen: cell.gen.clone(), sign: cell.sign });
        }
        for &(f, g) in base.gluings() {
            gluings.push((at(c, f), at(c, g)));
        }
    }
    for (k, p) in pairs.iter().enumerate() {
        for c in 0..copies {
            let d = digit(c, k);
            if d + 1 < heights[k] {
                gluings.push((at(c, p.minus), at(c + strides[k], p.plus)));
            }
            if d == 0 {
                dangling
                    .push(BoundaryPair { plus: at(c, p.plus), minus: at(c + (heights[k] - 1) * strides[k], p.minus) });
            }
        }
    }
    (ColoredPolytope::from_parts_unchecked(base.degree(), cells, gluings), dangling, copies)
}

fn ensure_cap(base_cells: usize, heights: &[u64], cap: usize) -> Result<(), TowerError> {
    let needed = heights.iter().fold(base_cells as u128, |acc, &h| acc.saturating_mul(h as u128));
    if needed > cap as u128 {
        return Err(TowerError::CellCap { needed, cap });
    }
    Ok(())
}

/// Tower of coverings of `base` over `pairs`, taken in the given order.
///
/// Every pair starts with `|G|` copies. After stacking, the dangling pairs are checked
/// under the identity endowment; a pair whose faces disagree by a residual `r` has its
/// height multiplied by the order of `r` and the tower is rebuilt.
pub fn tower(
    group: &FiniteAbelianGroup,
    base: &ColoredPolytope,
    pairs: &[BoundaryPair],
    cell_cap: usize,
) -> Result<Tower, TowerError> {
    check_pairs(group, base, pairs)?;
    base.endow_identity(group)?;
    let mut heights = vec![group.order(); pairs.len()];
    let mut extensions = Vec::new();
    for _ in 0..MAX_EXTENSION_ROUNDS {
        ensure_cap(base.cells().len(), &heights, cell_cap)?;
        let (result, dangling, copies) = stack(base, pairs, &heights);
        let labeling = result.endow_identity(group)?;
        let mut extended = false;
        let mut rest = dangling.as_slice();
        #[allow(clippy::needless_range_loop)] // heights[k] is updated inside
        for k in 0..pairs.len() {
            let (chunk, tail) = rest.split_at((copies / heights[k]) as usize);
            rest = tail;
            let Some(bad) = chunk.iter().find(|bp| labeling.face_labels(bp.plus) != labeling.face_labels(bp.minus))
            else {
                continue;
            };
            let plus = labeling.face_labels(bad.plus);
            let minus = labeling.face_labels(bad.minus);
            let residual = group.ldiv(&plus[0], &minus[0]);
            let ord = group.order_of(&residual);
            if ord == 1 {
                return Err(TowerError::LabelMismatch { pair: k });
            }
            extensions.push(HolonomyExtension {
                pair: k,
                residual,
                old_height: heights[k],
                new_height: heights[k] * ord,
            });
            heights[k] *= ord;
            extended = true;
        }
        if !extended {
            return Ok(Tower {
                base: base.clone(),
                pairs: pairs.to_vec(),
                heights,
                copies,
                result,
                dangling,
                extensions,
            });
        }
    }
    Err(TowerError::LabelMismatch { pair: 0 })
}

/// Tower over every boundary pair of `base`, in generator order.
pub fn full_tower(group: &FiniteAbelianGroup, base: &ColoredPolytope, cell_cap: usize) -> Result<Tower, TowerError> {
    let pairs = base.boundary_pairs(group)?;
    tower(group, base, &pairs, cell_cap)
}

/// `|G|` copies of `base` chained along one boundary pair.
pub fn covering(
    group: &FiniteAbelianGroup,
    base: &ColoredPolytope,
    pair: BoundaryPair,
    cell_cap: usize,
) -> Result<Tower, TowerError> {
    tower(group, base, &[pair], cell_cap)
}

// ---- cylinders -----------------------------------------------------------------------

/// Prism chain between the labeled simplex `labels` and its shadow labeled `e`
/// throughout: `sum_i (-1)^i (v_0 .. v_i, w_i .. w_n)` with bottom vertices `v` and top
/// vertices `w`, read in the bar complex.
pub fn cylinder_simplex(group: &FiniteAbelianGroup, labels: &[GroupElement], sign: Sign, out: &mut BarChain) {
    let n = labels.len() - 1;
    let e = group.identity();
    let mut prism = Vec::with_capacity(n + 2);
    for i in 0..=n {
        prism.clear();
        prism.extend(std::iter::repeat_n(e.clone(), i + 1));
        prism.extend_from_slice(&labels[i..]);
        let (_, gen) = hom_to_bar(group, &prism);
        out.accumulate_i64(gen, (sign * Sign::from_parity(i)).value());
    }
}

/// Cylinder of a labeled chain together with its two ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderResult {
    pub chain: BarChain,
    pub top: BarChain,
    pub bottom: BarChain,
}

/// A signed simplex with explicit vertex labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCell {
    pub sign: Sign,
    pub labels: Vec<GroupElement>,
}

impl LabeledCell {
    pub fn dimension(&self) -> usize {
        self.labels.len() - 1
    }

    /// The `i`-th face with inherited labels and sign `sign * (-1)^i`.
    pub fn face(&self, i: usize) -> LabeledCell {
        let mut labels = self.labels.clone();
        labels.remove(i);
        LabeledCell { sign: self.sign * Sign::from_parity(i), labels }
    }
}

/// Cylinder of a list of labeled cells, all of the same dimension `n`.
pub fn cylinder(group: &FiniteAbelianGroup, cells: &[LabeledCell], n: usize) -> CylinderResult {
    let mut chain = BarChain::zero(n + 1);
    let mut top = BarChain::zero(n);
    let mut bottom = BarChain::zero(n);
    let degenerate = BarGenerator::identity_tuple(group, n);
    for c in cells {
        debug_assert_eq!(c.dimension(), n);
        cylinder_simplex(group, &c.labels, c.sign, &mut chain);
        top.accumulate_i64(hom_to_bar(group, &c.labels).1, c.sign.value());
        bottom.accumulate_i64(degenerate.clone(), c.sign.value());
    }
    CylinderResult { chain, top, bottom }
}

/// Cylinder of every face of every cell, faces carrying inherited labels.
pub fn cylinder_of_faces(group: &FiniteAbelianGroup, cells: &[LabeledCell], n: usize) -> BarChain {
    let faces: Vec<LabeledCell> = cells.iter().flat_map(|c| (0..=n).map(move |i| c.face(i))).collect();
    if n == 0 {
        return BarChain::zero(0);
    }
    cylinder(group, &faces, n - 1).chain
}

/// Checks `d Cyl = top - bottom - Cyl(faces)` exactly.
pub fn cylinder_identity_holds(group: &FiniteAbelianGroup, cells: &[LabeledCell], n: usize) -> bool {
    let cyl = cylinder(group, cells, n);
    let lhs = cyl.chain.boundary(group);
    let rhs = cyl.top.minus(&cyl.bottom).minus(&cylinder_of_faces(group, cells, n));
    lhs == rhs
}

/// Labeled cells of a polytope under `labeling`, checked against the cell generators.
pub fn labeled_cells(
    group: &FiniteAbelianGroup,
    polytope: &ColoredPolytope,
    labeling: &VertexLabeling,
) -> Result<Vec<LabeledCell>, TowerError> {
    polytope
        .cells()
        .iter()
        .map(|c| {
            let labels = labeling.cell_labels(c.id);
            if hom_to_bar(group, &labels).1 != c.gen {
                return Err(TowerError::InconsistentLabels { cell: c.id });
            }
            Ok(LabeledCell { sign: c.sign, labels })
        })
        .collect()
}

pub fn polytope_cylinder(
    group: &FiniteAbelianGroup,
    polytope: &ColoredPolytope,
    labeling: &VertexLabeling,
) -> Result<CylinderResult, TowerError> {
    let cells = labeled_cells(group, polytope, labeling)?;
    Ok(cylinder(group, &cells, polytope.degree()))
}

/// Cylinder over the unglued faces, each with its induced sign and inherited labels.
/// Interior faces cancel in pairs, so this is what remains of `Cyl(faces)`.
pub fn boundary_cylinder(
    group: &FiniteAbelianGroup,
    polytope: &ColoredPolytope,
    labeling: &VertexLabeling,
) -> BarChain {
    let faces: Vec<LabeledCell> = polytope
        .unglued_faces()
        .into_iter()
        .map(|f| LabeledCell { sign: polytope.induced_sign(f), labels: labeling.face_labels(f) })
        .collect();
    cylinder(group, &faces, polytope.degree() - 1).chain
}

// ---- bounding chain ------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct BoundingOptions {
    pub cell_cap: usize,
    /// Accept cycles with generators containing the identity.
    pub allow_degenerate: bool,
}

impl Default for BoundingOptions {
    fn default() -> Self {
        Self { cell_cap: DEFAULT_CELL_CAP, allow_degenerate: true }
    }
}

#[derive(Debug, Clone)]
pub struct PolytopeSummary {
    pub cells: usize,
    pub pairs: usize,
    pub heights: Vec<u64>,
    pub copies: u64,
    pub tower_cells: usize,
}

#[derive(Debug, Clone)]
pub struct BoundingChain {
    pub degree: usize,
    /// The cycle as a chain (the sum of the polytopes' chains).
    pub cycle: BarChain,
    /// Number of signed simplices in the decomposition.
    pub cell_count: usize,
    pub u: BarChain,
    /// Common multiplicity: the least common multiple of the tower sizes.
    pub multiplicity: BigInt,
    pub shadow: BarChain,
    pub polytopes: Vec<PolytopeSummary>,
    pub extensions: Vec<HolonomyExtension>,
    /// `d(u) == multiplicity * (cycle - shadow)`.
    pub identity_holds: bool,
    /// Every tower's boundary cylinder vanished.
    pub boundary_cancels: bool,
}

impl BoundingChain {
    pub fn complexity(&self) -> BigInt {
        self.u.complexity()
    }

    pub fn complexity_bound(&self, group: &FiniteAbelianGroup) -> BigInt {
        complexity_bound(self.degree, group.order(), self.cell_count)
    }

    /// Multiplicity obtained by towering over every face pair of the whole cycle at once.
    pub fn global_multiplicity(&self, group: &FiniteAbelianGroup) -> BigInt {
        global_multiplicity(self.degree, group.order(), self.cell_count)
    }
}

/// Bounding chain of a reduced cycle; each coefficient `k` contributes `|k|` cells.
pub fn bounding_chain(
    group: &FiniteAbelianGroup,
    cycle: &BarChain,
    opts: BoundingOptions,
) -> Result<BoundingChain, TowerError> {
    bounding_chain_from_cells(group, cycle.degree(), &cycle.decompose(), opts)
}

/// Bounding chain of a decomposed cycle, cancelling terms kept apart.
pub fn bounding_chain_from_cells(
    group: &FiniteAbelianGroup,
    degree: usize,
    cells: &[SignedSimplex],
    opts: BoundingOptions,
) -> Result<BoundingChain, TowerError> {
    let polytopes = assemble_polytopes(group, degree, cells, opts.allow_degenerate)?;
    bounding_chain_from_polytopes(group, degree, &polytopes, opts)
}

/// Bounding chain of a cycle given directly as glued polytopes.
pub fn bounding_chain_from_polytopes(
    group: &FiniteAbelianGroup,
    degree: usize,
    polytopes: &[ColoredPolytope],
    opts: BoundingOptions,
) -> Result<BoundingChain, TowerError> {
    if degree == 0 {
        return Err(PolytopeError::DegreeZero.into());
    }
    let mut cycle = BarChain::zero(degree);
    let mut shadow = BarChain::zero(degree);
    let degenerate = BarGenerator::identity_tuple(group, degree);
    let mut pieces = Vec::with_capacity(polytopes.len());
    let mut summaries = Vec::with_capacity(polytopes.len());
    let mut extensions = Vec::new();
    let mut boundary_cancels = true;
    let mut cell_count = 0;
    for p in polytopes {
        if p.degree() != degree {
            return Err(PolytopeError::CellDegree { cell: 0, expected: degree, got: p.degree() }.into());
        }
        if !opts.allow_degenerate {
            if let Some(c) = p.cells().iter().find(|c| c.gen.is_degenerate()) {
                return Err(PolytopeError::Degenerate(c.id).into());
            }
        }
        cell_count += p.cells().len();
        cycle.add_chain(&p.chain_of())?;
        for c in p.cells() {
            shadow.accumulate_i64(degenerate.clone(), c.sign.value());
        }
        let t = full_tower(group, p, opts.cell_cap)?;
        let labeling = t.result.endow_identity(group)?;
        let cyl = polytope_cylinder(group, &t.result, &labeling)?;
        if !boundary_cylinder(group, &t.result, &labeling).is_zero() {
            boundary_cancels = false;
        }
        extensions.extend(t.extensions.iter().cloned());
        summaries.push(PolytopeSummary {
            cells: p.cells().len(),
            pairs: t.pairs.len(),
            heights: t.heights.clone(),
            copies: t.copies,
            tower_cells: t.cell_count(),
        });
        pieces.push((BigInt::from(t.copies), cyl.chain));
    }
    if !cycle.boundary(group).is_zero() {
        return Err(PolytopeError::NotACycle.into());
    }
    let multiplicity = pieces.iter().fold(BigInt::one(), |acc, (m, _)| acc.lcm(m));
    let mut u = BarChain::zero(degree + 1);
    for (m, chain) in &pieces {
        u.add_scaled(chain, &(&multiplicity / m))?;
    }
    let identity_holds = u.boundary(group) == cycle.minus(&shadow).scaled(&multiplicity);
    Ok(BoundingChain {
        degree,
        cycle,
        cell_count,
        u,
        multiplicity,
        shadow,
        polytopes: summaries,
        extensions,
        identity_holds,
        boundary_cancels,
    })
}

fn half_up(x: usize) -> u32 {
    x.div_ceil(2) as u32
}

/// `(n+1) * |G|^((n+1)|C|/2) * |C|`, the exponent rounded up when odd.
pub fn complexity_bound(degree: usize, group_order: u64, cells: usize) -> BigInt {
    let n1 = degree + 1;
    BigInt::from(n1) * BigInt::from(group_order).pow(half_up(n1 * cells)) * BigInt::from(cells)
}

/// `(n+1) * |G|^((n+1)|C|/2)`, the multiplicity of a single tower over every possible
/// face pair, exponent rounded up when odd.
pub fn global_multiplicity(degree: usize, group_order: u64, cells: usize) -> BigInt {
    let n1 = degree + 1;
    BigInt::from(n1) * BigInt::from(group_order).pow(half_up(n1 * cells))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `binom(2k, k) / (k + 1)`.
pub fn catalan_factor(k: u64) -> BigInt {
    binomial(2 * k, k) / BigInt::from(k + 1)
}

/// The bordism-size constant `catalan(k) * |G| * c`, where `c` is a per-dimension
/// constant with no known closed form and must be supplied by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BordismConstant {
    pub k: u64,
    pub catalan: BigInt,
    pub group_order: u64,
}

impl BordismConstant {
    /// Everything except the unknown per-dimension factor.
    pub fn known_part(&self) -> BigInt {
        &self.catalan * BigInt::from(self.group_order)
    }

    pub fn evaluate(&self, dimension_factor: &BigInt) -> BigInt {
        self.known_part() * dimension_factor
    }
}

pub fn bordism_constant(k: u64, group_order: u64) -> BordismConstant {
    assert!(k >= 1, "k must be at least 1");
    BordismConstant { k, catalan: catalan_factor(k), group_order }
}
