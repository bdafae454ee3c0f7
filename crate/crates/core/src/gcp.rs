//! G-colored polytopes: signed bar simplices glued along algebraically paired faces.
//!
//! A polytope stores only incidence. Its vertices are the classes of `(cell, position)`
//! under the identifications forced by the gluings, and the edge `v_i -> v_{i+1}` of a
//! cell `[g_1, ..., g_n]` carries `g_{i+1}`. The polytope is G-colored when every edge
//! loop multiplies out to the identity, which for an abelian group is the same as the
//! existence of a consistent vertex labeling on each connected component.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barcx::{hom_to_bar, BarChain, BarGenerator, ChainError, Sign, SignedSimplex};
use crate::fingroup::{FiniteAbelianGroup, GroupElement, GroupError};

pub type CellId = usize;

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("polytope degree must be >= 1")]
    DegreeZero,
    #[error("cell {cell} has degree {got}, polytope has degree {expected}")]
    CellDegree { cell: CellId, expected: usize, got: usize },
    #[error("cell at position {position} carries id {id}; ids must equal positions")]
    CellId { position: usize, id: CellId },
    #[error("cell {0} is degenerate and degenerate cells were not permitted")]
    Degenerate(CellId),
    #[error("face reference {0:?} is out of range")]
    BadFace(FaceRef),
    #[error("face {0:?} appears in more than one gluing")]
    DoubleGluing(FaceRef),
    #[error("gluing {0:?} ~ {1:?} joins faces with different generators or equal induced signs")]
    IncompatibleGluing(FaceRef, FaceRef),
    #[error("the chain is not a cycle")]
    NotACycle,
    #[error("vertex labels contradict along an edge of cell {cell}: the coloring condition fails")]
    ColoringViolation { cell: CellId },
    #[error("expected {expected} base labels (one per component), got {got}")]
    BaseCount { expected: usize, got: usize },
    #[error("unglued face {0:?} has no algebraic partner")]
    UnpairedFace(FaceRef),
    #[error("malformed polytope JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredCell {
    pub id: CellId,
    pub gen: BarGenerator,
    pub sign: Sign,
}

/// The `face`-th simplicial face of `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceRef {
    pub cell: CellId,
    pub face: usize,
}

impl FaceRef {
    pub fn new(cell: CellId, face: usize) -> Self {
        Self { cell, face }
    }
}

/// An unglued `+B` face and an unglued `-B` face with the same generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPair {
    pub plus: FaceRef,
    pub minus: FaceRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredPolytope {
    degree: usize,
    cells: Vec<ColoredCell>,
    gluings: Vec<(FaceRef, FaceRef)>,
}

/// Vertex classes of a polytope and their connected components.
#[derive(Debug, Clone)]
pub struct VertexClasses {
    /// `of[cell][position]` is the class of that vertex.
    pub of: Vec<Vec<usize>>,
    pub count: usize,
    /// Component of each class; components are numbered by their smallest class.
    pub component: Vec<usize>,
    pub components: usize,
}

/// Group elements on the vertex classes, consistent with every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexLabeling {
    labels: Vec<GroupElement>,
    of: Vec<Vec<usize>>,
}

impl VertexLabeling {
    pub fn label(&self, class: usize) -> &GroupElement {
        &self.labels[class]
    }

    pub fn labels(&self) -> &[GroupElement] {
        &self.labels
    }

    pub fn class_of(&self, cell: CellId, position: usize) -> usize {
        self.of[cell][position]
    }

    pub fn cell_labels(&self, cell: CellId) -> Vec<GroupElement> {
        self.of[cell].iter().map(|&v| self.labels[v].clone()).collect()
    }

    /// Labels on the vertices of a face, in face order.
    pub fn face_labels(&self, face: FaceRef) -> Vec<GroupElement> {
        self.of[face.cell]
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != face.face)
            .map(|(_, &v)| self.labels[v].clone())
            .collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller root so class numbering follows first appearance
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Positions of the vertices of face `i` of an `n`-simplex, in order.
fn face_positions(n: usize, i: usize) -> impl Iterator<Item = usize> {
    (0..=n).filter(move |&p| p != i)
}

impl ColoredPolytope {
    /// Validates the structural invariants (ids, degrees, gluing compatibility).
    /// The coloring condition is checked separately by [`Self::check_coloring`].
    pub fn new(
        group: &FiniteAbelianGroup,
        degree: usize,
        cells: Vec<ColoredCell>,
        gluings: Vec<(FaceRef, FaceRef)>,
        allow_degenerate: bool,
    ) -> Result<Self, PolytopeError> {
        if degree == 0 {
            return Err(PolytopeError::DegreeZero);
        }
        for (position, c) in cells.iter().enumerate() {
            if c.id != position {
                return Err(PolytopeError::CellId { position, id: c.id });
            }
            if c.gen.degree() != degree {
                return Err(PolytopeError::CellDegree { cell: c.id, expected: degree, got: c.gen.degree() });
            }
            c.gen.validate(group)?;
            if !allow_degenerate && c.gen.is_degenerate() {
                return Err(PolytopeError::Degenerate(c.id));
            }
        }
        let p = Self { degree, cells, gluings };
        let mut used = std::collections::HashSet::new();
        for &(f, g) in &p.gluings {
            for r in [f, g] {
                if r.cell >= p.cells.len() || r.face > degree {
                    return Err(PolytopeError::BadFace(r));
                }
                if !used.insert(r) {
                    return Err(PolytopeError::DoubleGluing(r));
                }
            }
            if p.face_gen(group, f) != p.face_gen(group, g) || p.induced_sign(f) == p.induced_sign(g) {
                return Err(PolytopeError::IncompatibleGluing(f, g));
            }
        }
        Ok(p)
    }

    pub(crate) fn from_parts_unchecked(
        degree: usize,
        cells: Vec<ColoredCell>,
        gluings: Vec<(FaceRef, FaceRef)>,
    ) -> Self {
        Self { degree, cells, gluings }
    }

    pub fn empty(degree: usize) -> Self {
        Self { degree, cells: Vec::new(), gluings: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cells(&self) -> &[ColoredCell] {
        &self.cells
    }

    pub fn gluings(&self) -> &[(FaceRef, FaceRef)] {
        &self.gluings
    }

    pub fn face_gen(&self, group: &FiniteAbelianGroup, f: FaceRef) -> BarGenerator {
        self.cells[f.cell].gen.face(group, f.face)
    }

    /// Sign of the face in the chain boundary of its (signed) cell.
    pub fn induced_sign(&self, f: FaceRef) -> Sign {
        self.cells[f.cell].sign * Sign::from_parity(f.face)
    }

    /// `sum sign * gen` over cells.
    pub fn chain_of(&self) -> BarChain {
        let mut c = BarChain::zero(self.degree);
        for cell in &self.cells {
            c.accumulate_i64(cell.gen.clone(), cell.sign.value());
        }
        c
    }

    pub fn signed_simplices(&self) -> Vec<SignedSimplex> {
        self.cells.iter().map(|c| SignedSimplex::new(c.gen.clone(), c.sign)).collect()
    }

    pub fn vertex_classes(&self) -> VertexClasses {
        let width = self.degree + 1;
        let mut vf = UnionFind::new(self.cells.len() * width);
        for &(f, g) in &self.gluings {
            for (pf, pg) in face_positions(self.degree, f.face).zip(face_positions(self.degree, g.face)) {
                vf.union(f.cell * width + pf, g.cell * width + pg);
            }
        }
        let mut class_id = HashMap::new();
        let mut of = vec![vec![0; width]; self.cells.len()];
        for (cell, row) in of.iter_mut().enumerate() {
            for (p, slot) in row.iter_mut().enumerate() {
                let root = vf.find(cell * width + p);
                let next = class_id.len();
                *slot = *class_id.entry(root).or_insert(next);
            }
        }
        let count = class_id.len();
        // components: classes joined by sharing a cell
        let mut cf = UnionFind::new(count);
        for row in &of {
            for w in row.windows(2) {
                cf.union(w[0], w[1]);
            }
        }
        let mut comp_id = HashMap::new();
        let mut component = vec![0; count];
        for (v, slot) in component.iter_mut().enumerate() {
            let root = cf.find(v);
            let next = comp_id.len();
            *slot = *comp_id.entry(root).or_insert(next);
        }
        VertexClasses { of, count, component, components: comp_id.len() }
    }

    /// Propagates labels from the given per-component bases. Fails on the first edge
    /// whose endpoints receive contradictory labels.
    fn propagate(
        &self,
        group: &FiniteAbelianGroup,
        classes: &VertexClasses,
        bases: &[GroupElement],
    ) -> Result<Vec<GroupElement>, PolytopeError> {
        // adjacency: (neighbour, element, cell); moving forward multiplies by element
        let mut adj: Vec<Vec<(usize, GroupElement, bool, CellId)>> = vec![Vec::new(); classes.count];
        for (cell, c) in self.cells.iter().enumerate() {
            for (i, g) in c.gen.entries().iter().enumerate() {
                let (u, v) = (classes.of[cell][i], classes.of[cell][i + 1]);
                adj[u].push((v, g.clone(), true, cell));
                adj[v].push((u, g.clone(), false, cell));
            }
        }
        let mut labels: Vec<Option<GroupElement>> = vec![None; classes.count];
        let mut seen_component = vec![false; classes.components];
        for root in 0..classes.count {
            let comp = classes.component[root];
            if seen_component[comp] {
                continue;
            }
            seen_component[comp] = true;
            labels[root] = Some(bases[comp].clone());
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let lu = labels[u].clone().unwrap();
                for (v, g, forward, cell) in &adj[u] {
                    let want = if *forward { group.mul(&lu, g) } else { group.mul(&lu, &group.inv(g)) };
                    match &labels[*v] {
                        Some(have) if *have != want => return Err(PolytopeError::ColoringViolation { cell: *cell }),
                        Some(_) => {}
                        None => {
                            labels[*v] = Some(want);
                            queue.push_back(*v);
                        }
                    }
                }
            }
        }
        Ok(labels.into_iter().map(|l| l.unwrap()).collect())
    }

    /// True iff a consistent vertex labeling exists on every component.
    pub fn check_coloring(&self, group: &FiniteAbelianGroup) -> bool {
        let classes = self.vertex_classes();
        let bases = vec![group.identity(); classes.components];
        self.propagate(group, &classes, &bases).is_ok()
    }

    pub fn component_count(&self) -> usize {
        self.vertex_classes().components
    }

    /// Endows the polytope with a vertex set, one base label per component; the base
    /// sits on the lowest-numbered vertex of the component.
    pub fn endow_labels(
        &self,
        group: &FiniteAbelianGroup,
        bases: &[GroupElement],
    ) -> Result<VertexLabeling, PolytopeError> {
        let classes = self.vertex_classes();
        if bases.len() != classes.components {
            return Err(PolytopeError::BaseCount { expected: classes.components, got: bases.len() });
        }
        for b in bases {
            group.validate(b)?;
        }
        let labels = self.propagate(group, &classes, bases)?;
        Ok(VertexLabeling { labels, of: classes.of })
    }

    /// Endowment with the identity on every component.
    pub fn endow_identity(&self, group: &FiniteAbelianGroup) -> Result<VertexLabeling, PolytopeError> {
        let n = self.component_count();
        self.endow_labels(group, &vec![group.identity(); n])
    }

    /// Faces that take part in no gluing, ordered by (cell, face).
    pub fn unglued_faces(&self) -> Vec<FaceRef> {
        let glued: std::collections::HashSet<FaceRef> = self.gluings.iter().flat_map(|&(a, b)| [a, b]).collect();
        (0..self.cells.len())
            .flat_map(|c| (0..=self.degree).map(move |f| FaceRef::new(c, f)))
            .filter(|f| !glued.contains(f))
            .collect()
    }

    /// Pairs every unglued face with an unglued face carrying the same generator and the
    /// opposite induced sign. Pairs come out ordered by generator, then by face order.
    pub fn boundary_pairs(&self, group: &FiniteAbelianGroup) -> Result<Vec<BoundaryPair>, PolytopeError> {
        let mut by_gen: std::collections::BTreeMap<BarGenerator, (Vec<FaceRef>, Vec<FaceRef>)> = Default::default();
        for f in self.unglued_faces() {
            let slot = by_gen.entry(self.face_gen(group, f)).or_default();
            match self.induced_sign(f) {
                Sign::Plus => slot.0.push(f),
                Sign::Minus => slot.1.push(f),
            }
        }
        let mut pairs = Vec::new();
        for (_, (plus, minus)) in by_gen {
            if plus.len() != minus.len() {
                let extra = if plus.len() > minus.len() { plus[minus.len()] } else { minus[plus.len()] };
                return Err(PolytopeError::UnpairedFace(extra));
            }
            pairs.extend(plus.into_iter().zip(minus).map(|(plus, minus)| BoundaryPair { plus, minus }));
        }
        Ok(pairs)
    }

    /// Every cell's labels read back, through `hom_to_bar`, as that cell's generator.
    pub fn labeling_consistent(&self, group: &FiniteAbelianGroup, labeling: &VertexLabeling) -> bool {
        self.cells.iter().all(|c| hom_to_bar(group, &labeling.cell_labels(c.id)).1 == c.gen)
    }
}

/// Builds G-colored polytopes from a decomposed cycle by gluing simplices along
/// algebraically paired faces.
///
/// Cells are taken in generator order, ties in input order. A polytope is seeded with
/// the first unused cell and the unused cells are scanned again; a cell joins the polytope along its first face that pairs with a free face of
/// the polytope (the oldest such free face wins). Its remaining faces become free faces,
/// even when they pair with faces already in the polytope: those self-pairings stay
/// apart as boundary. Scanning repeats until a full pass adds nothing.
pub fn assemble_polytopes(
    group: &FiniteAbelianGroup,
    degree: usize,
    cells: &[SignedSimplex],
    allow_degenerate: bool,
) -> Result<Vec<ColoredPolytope>, PolytopeError> {
    if degree == 0 {
        return Err(PolytopeError::DegreeZero);
    }
    for (i, s) in cells.iter().enumerate() {
        if s.gen.degree() != degree {
            return Err(PolytopeError::CellDegree { cell: i, expected: degree, got: s.gen.degree() });
        }
        s.gen.validate(group)?;
        if !allow_degenerate && s.gen.is_degenerate() {
            return Err(PolytopeError::Degenerate(i));
        }
    }
    if !BarChain::from_signed(degree, cells)?.boundary(group).is_zero() {
        return Err(PolytopeError::NotACycle);
    }

    let faces: Vec<Vec<(BarGenerator, Sign)>> = cells
        .iter()
        .map(|s| (0..=degree).map(|i| (s.gen.face(group, i), s.sign * Sign::from_parity(i))).collect())
        .collect();

    // canonical chain order; repeated generators keep their input order
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&x, &y| cells[x].gen.cmp(&cells[y].gen));

    let mut used = vec![false; cells.len()];
    let mut out = Vec::new();
    for &seed in &order {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        // local index of each member, in order of joining
        let mut members = vec![seed];
        let mut gluings = Vec::new();
        // free faces keyed by (generator, induced sign), oldest first
        let mut free: HashMap<(BarGenerator, Sign), VecDeque<FaceRef>> = HashMap::new();
        let push_free = |free: &mut HashMap<(BarGenerator, Sign), VecDeque<FaceRef>>,
                         local: usize,
                         src: usize,
                         skip: Option<usize>| {
            for (i, (g, s)) in faces[src].iter().enumerate() {
                if Some(i) != skip {
                    free.entry((g.clone(), *s)).or_default().push_back(FaceRef::new(local, i));
                }
            }
        };
        push_free(&mut free, 0, seed, None);
        loop {
            let mut grew = false;
            for &cand in &order {
                if used[cand] {
                    continue;
                }
                let hit = faces[cand].iter().enumerate().find_map(|(i, (g, s))| {
                    let key = (g.clone(), s.flip());
                    free.get(&key).and_then(|q| q.front().copied()).map(|target| (i, key, target))
                });
                if let Some((i, key, target)) = hit {
                    free.get_mut(&key).unwrap().pop_front();
                    used[cand] = true;
                    let local = members.len();
                    members.push(cand);
                    gluings.push((target, FaceRef::new(local, i)));
                    push_free(&mut free, local, cand, Some(i));
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let poly_cells = members
            .iter()
            .enumerate()
            .map(|(local, &src)| ColoredCell { id: local, gen: cells[src].gen.clone(), sign: cells[src].sign })
            .collect();
        out.push(ColoredPolytope::from_parts_unchecked(degree, poly_cells, gluings));
    }
    Ok(out)
}

/// The worked octagon: six signed triangles fanned from the vertex `A`,
///
/// `[a,b] + [ab,c] - [ab,c] - [b,a] - [bd^-1,d] + [d,bd^-1]`,
///
/// with its five interior edges glued. Vertex `A` is class 0; going around the octagon
/// the vertices are `A, B, C, D, E, F, G, H`.
pub fn octagon(
    group: &FiniteAbelianGroup,
    a: &GroupElement,
    b: &GroupElement,
    c: &GroupElement,
    d: &GroupElement,
) -> Result<ColoredPolytope, PolytopeError> {
    for x in [a, b, c, d] {
        group.validate(x)?;
    }
    let ab = group.mul(a, b);
    let bd = group.mul(b, &group.inv(d));
    let gen = |x: &GroupElement, y: &GroupElement| BarGenerator::new(vec![x.clone(), y.clone()]);
    let cells = vec![
        (gen(a, b), Sign::Plus),    // (A, B, C)
        (gen(&ab, c), Sign::Plus),  // (A, C, D)
        (gen(&ab, c), Sign::Minus), // (A, E, D)
        (gen(b, a), Sign::Minus),   // (A, F, E)
        (gen(&bd, d), Sign::Minus), // (A, G, F)
        (gen(d, &bd), Sign::Plus),  // (H, A, G)
    ]
    .into_iter()
    .enumerate()
    .map(|(id, (gen, sign))| ColoredCell { id, gen, sign })
    .collect();
    let f = FaceRef::new;
    let gluings = vec![
        (f(0, 1), f(1, 2)), // AC
        (f(1, 1), f(2, 1)), // AD
        (f(2, 2), f(3, 1)), // AE
        (f(3, 2), f(4, 1)), // AF
        (f(4, 2), f(5, 0)), // AG
    ];
    ColoredPolytope::new(group, 2, cells, gluings, true)
}

/// The octagon's cells as a decomposition, without gluings.
pub fn octagon_cells(
    group: &FiniteAbelianGroup,
    a: &GroupElement,
    b: &GroupElement,
    c: &GroupElement,
    d: &GroupElement,
) -> Result<Vec<SignedSimplex>, PolytopeError> {
    Ok(octagon(group, a, b, c, d)?.signed_simplices())
}

// ---- JSON ----------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawPolytope {
    degree: usize,
    cells: Vec<ColoredCell>,
    gluings: Vec<[FaceRef; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary_pairs: Option<Vec<BoundaryPair>>,
}

impl ColoredPolytope {
    /// Cells, gluings and (when the polytope is a cycle) boundary pairs.
    pub fn to_json_value(&self, group: &FiniteAbelianGroup) -> serde_json::Value {
        let raw = RawPolytope {
            degree: self.degree,
            cells: self.cells.clone(),
            gluings: self.gluings.iter().map(|&(a, b)| [a, b]).collect(),
            boundary_pairs: self.boundary_pairs(group).ok(),
        };
        serde_json::to_value(raw).expect("polytope serialization")
    }

    /// Reads the dump format; any `boundary_pairs` field is ignored and recomputed.
    pub fn from_json_str(
        group: &FiniteAbelianGroup,
        text: &str,
        allow_degenerate: bool,
    ) -> Result<Self, PolytopeError> {
        let raw: RawPolytope = serde_json::from_str(text)?;
        Self::new(
            group,
            raw.degree,
            raw.cells,
            raw.gluings.into_iter().map(|[a, b]| (a, b)).collect(),
            allow_degenerate,
        )
    }
}
