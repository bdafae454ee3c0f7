//! Δ-complexes: ordered simplices glued by face maps.
//!
//! A q-cell stores the ids of its `q + 1` faces, face `i` omitting vertex `i`. Repeated
//! faces are allowed, so quotients by free actions stay in the category.

mod snf;

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingroup::FiniteAbelianGroup;
pub use snf::{invariant_factors, SparseMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("{dim}-cell {cell} has {got} faces, expected {expected}")]
    FaceCount { dim: usize, cell: usize, expected: usize, got: usize },
    #[error("{dim}-cell {cell} refers to missing {}-cell {face}", dim - 1)]
    FaceRange { dim: usize, cell: usize, face: usize },
    #[error("simplicial identity d_{i} d_{j} = d_{} d_{i} fails on {dim}-cell {cell}", j - 1)]
    Identity { dim: usize, cell: usize, i: usize, j: usize },
    #[error("action generator {generator} is not a permutation in dimension {dim}")]
    NotPermutation { generator: usize, dim: usize },
    #[error("action generator {generator} does not commute with faces on {dim}-cell {cell}")]
    NotSimplicial { generator: usize, dim: usize, cell: usize },
    #[error("action is not free: {dim}-cell {cell} has an orbit of size {orbit}, group order is {order}")]
    NotFree { dim: usize, cell: usize, orbit: usize, order: u64 },
    #[error("action has {got} generators, group has {expected} cyclic factors")]
    GeneratorCount { expected: usize, got: usize },
    #[error("a permutation is needed for each of the {expected} dimensions, got {got}")]
    DimensionCount { expected: usize, got: usize },
}

/// Cells of each dimension, with face ids for every cell of positive dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaComplex {
    counts: Vec<usize>,
    /// `faces[q][c]` for `q >= 1`; `faces[0]` is empty.
    faces: Vec<Vec<Vec<usize>>>,
}

impl DeltaComplex {
    /// Validates face counts, ranges and the simplicial identities.
    pub fn new(vertices: usize, faces_by_dim: Vec<Vec<Vec<usize>>>) -> Result<Self, ComplexError> {
        let mut counts = vec![vertices];
        counts.extend(faces_by_dim.iter().map(|f| f.len()));
        let mut faces = vec![Vec::new()];
        faces.extend(faces_by_dim);
        // trailing empty dimensions carry no information
        while counts.len() > 1 && *counts.last().unwrap() == 0 {
            counts.pop();
            faces.pop();
        }
        if counts == [0] {
            counts.clear();
            faces.clear();
        }
        let k = Self { counts, faces };
        k.validate()?;
        Ok(k)
    }

    fn validate(&self) -> Result<(), ComplexError> {
        for q in 1..self.counts.len() {
            for (c, fs) in self.faces[q].iter().enumerate() {
                if fs.len() != q + 1 {
                    return Err(ComplexError::FaceCount { dim: q, cell: c, expected: q + 1, got: fs.len() });
                }
                if let Some(&face) = fs.iter().find(|&&f| f >= self.counts[q - 1]) {
                    return Err(ComplexError::FaceRange { dim: q, cell: c, face });
                }
            }
        }
        for q in 2..self.counts.len() {
            for c in 0..self.counts[q] {
                for j in 1..=q {
                    for i in 0..j {
                        if self.face(q - 1, self.face(q, c, j), i) != self.face(q - 1, self.face(q, c, i), j - 1) {
                            return Err(ComplexError::Identity { dim: q, cell: c, i, j });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn empty() -> Self {
        Self { counts: Vec::new(), faces: Vec::new() }
    }

    pub fn point() -> Self {
        Self { counts: vec![1], faces: vec![Vec::new()] }
    }

    /// Closure of a list of simplices given by vertex sets.
    pub fn from_facets(facets: &[Vec<usize>]) -> Result<Self, ComplexError> {
        let mut by_dim: Vec<std::collections::BTreeSet<Vec<usize>>> = Vec::new();
        for f in facets {
            let mut f = f.clone();
            f.sort_unstable();
            f.dedup();
            if f.is_empty() {
                continue;
            }
            // every nonempty subset
            let n = f.len();
            for mask in 1u64..(1u64 << n) {
                let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                let d = s.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize(d + 1, Default::default());
                }
                by_dim[d].insert(s);
            }
        }
        if by_dim.is_empty() {
            return Ok(Self::empty());
        }
        let index: Vec<HashMap<&Vec<usize>, usize>> =
            by_dim.iter().map(|set| set.iter().enumerate().map(|(i, s)| (s, i)).collect()).collect();
        let mut faces = Vec::new();
        for q in 1..by_dim.len() {
            faces.push(
                by_dim[q]
                    .iter()
                    .map(|s| {
                        (0..=q)
                            .map(|i| {
                                let mut t = s.clone();
                                t.remove(i);
                                index[q - 1][&t]
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        Self::new(by_dim[0].len(), faces)
    }

    /// The standard `n`-simplex with all of its faces.
    pub fn simplex(n: usize) -> Self {
        Self::from_facets(&[(0..=n).collect()]).expect("simplex")
    }

    /// Boundary of the standard `n`-simplex, `n >= 1`.
    pub fn simplex_boundary(n: usize) -> Self {
        let facets: Vec<Vec<usize>> = (0..=n).map(|i| (0..=n).filter(|&v| v != i).collect()).collect();
        Self::from_facets(&facets).expect("simplex boundary")
    }

    /// Circle with `n` vertices and `n` edges; edge `i` runs from vertex `i` to `i + 1`.
    /// `n = 1` and `n = 2` give the one- and two-edge Δ-circles.
    pub fn polygon(n: usize) -> Self {
        assert!(n >= 1, "a polygon needs at least one edge");
        let edges = (0..n).map(|i| vec![(i + 1) % n, i]).collect();
        Self::new(n, vec![edges]).expect("polygon")
    }

    /// Dimension; `-1` for the empty complex.
    pub fn dim(&self) -> isize {
        self.counts.len() as isize - 1
    }

    pub fn count(&self, q: usize) -> usize {
        self.counts.get(q).copied().unwrap_or(0)
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.counts.clone()
    }

    pub fn total_cells(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn top_cells(&self) -> usize {
        self.counts.last().copied().unwrap_or(0)
    }

    pub fn face(&self, q: usize, cell: usize, i: usize) -> usize {
        self.faces[q][cell][i]
    }

    pub fn faces(&self, q: usize, cell: usize) -> &[usize] {
        &self.faces[q][cell]
    }

    pub fn euler(&self) -> i64 {
        self.counts.iter().enumerate().map(|(q, &n)| if q % 2 == 0 { n as i64 } else { -(n as i64) }).sum()
    }

    /// Vertex ids of a cell, in order (vertex `k` is what survives deleting all others).
    pub fn vertices(&self, q: usize, cell: usize) -> Vec<usize> {
        (0..=q)
            .map(|k| {
                let (mut d, mut c) = (q, cell);
                // delete everything above k, then everything below it
                while d > k {
                    c = self.face(d, c, d);
                    d -= 1;
                }
                while d > 0 {
                    c = self.face(d, c, 0);
                    d -= 1;
                }
                c
            })
            .collect()
    }

    /// The face of a `q`-cell spanned by the vertex positions set in `mask`.
    pub fn subface(&self, q: usize, cell: usize, mask: u64) -> (usize, usize) {
        let (mut d, mut c) = (q, cell);
        for j in (0..=q).rev() {
            if mask >> j & 1 == 0 {
                c = self.face(d, c, j);
                d -= 1;
            }
        }
        (d, c)
    }

    /// Boundary map from `q`-cells to `(q-1)`-cells, `q >= 1`.
    pub fn boundary_sparse(&self, q: usize) -> SparseMatrix {
        let mut m = SparseMatrix::new(self.count(q - 1), self.count(q));
        if q < self.counts.len() {
            for (c, fs) in self.faces[q].iter().enumerate() {
                for (i, &f) in fs.iter().enumerate() {
                    m.add(f, c, if i % 2 == 0 { 1 } else { -1 });
                }
            }
        }
        m
    }

    pub fn boundary_dense(&self, q: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.count(q - 1), self.count(q));
        if q < self.counts.len() {
            for (c, fs) in self.faces[q].iter().enumerate() {
                for (i, &f) in fs.iter().enumerate() {
                    m[(f, c)] += if i % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
        }
        m
    }

    /// Renames cells: cell `c` of dimension `q` becomes `perms[q][c]`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> Result<Self, ComplexError> {
        if perms.len() != self.counts.len() {
            return Err(ComplexError::DimensionCount { expected: self.counts.len(), got: perms.len() });
        }
        let mut faces: Vec<Vec<Vec<usize>>> = Vec::new();
        for q in 1..self.counts.len() {
            let mut fq = vec![Vec::new(); self.counts[q]];
            for c in 0..self.counts[q] {
                fq[perms[q][c]] = self.faces[q][c].iter().map(|&f| perms[q - 1][f]).collect();
            }
            faces.push(fq);
        }
        Self::new(self.count(0), faces)
    }

    /// Cells `(s, t)` with `s` a cell of `self` or empty, `t` a cell of `other` or empty,
    /// not both empty. Vertices of `self` come first in each joined cell.
    pub fn join(&self, other: &Self) -> Self {
        self.join_indexed(other).0
    }

    /// Join together with its cell index.
    pub fn join_indexed(&self, other: &Self) -> (Self, JoinIndex) {
        let idx = JoinIndex::new(self, other);
        let mut faces = Vec::new();
        for q in 1..idx.dims() {
            let mut fq = Vec::with_capacity(idx.count(q));
            for (p, s, t) in idx.cells(q) {
                let tq = q as isize - 1 - p;
                let fs: Vec<usize> = (0..=q)
                    .map(|i| {
                        if p >= 0 && i as isize <= p {
                            let s2 = if p == 0 { 0 } else { self.face(p as usize, s, i) };
                            idx.id(q - 1, p - 1, s2, t)
                        } else {
                            let j = (i as isize - p - 1) as usize;
                            let t2 = if tq == 0 { 0 } else { other.face(tq as usize, t, j) };
                            idx.id(q - 1, p, s, t2)
                        }
                    })
                    .collect();
                fq.push(fs);
            }
            faces.push(fq);
        }
        let k = Self::new(idx.count(0), faces).expect("join");
        (k, idx)
    }

    pub fn cone(&self) -> Self {
        self.join(&Self::point())
    }

    /// Integral homology by diagonalizing the boundary maps.
    pub fn homology(&self) -> HomologySummary {
        let top = self.counts.len();
        let mut ranks = vec![0usize; top + 1];
        let mut torsion = vec![Vec::new(); top + 1];
        for q in 1..top {
            let d = self.boundary_sparse(q).diagonalize();
            ranks[q] = d.len();
            torsion[q - 1] = invariant_factors(&d);
        }
        let groups = (0..top)
            .map(|q| HomologyGroup {
                rank: self.counts[q] - ranks[q] - ranks[q + 1],
                torsion: std::mem::take(&mut torsion[q]),
            })
            .collect();
        HomologySummary { groups }
    }

    /// Combinatorial Laplacian torsion `exp(sum_q (-1)^(q+1) q log det' L_q)` with
    /// `L_q = d_{q+1} d_{q+1}^T + d_q^T d_q` and `det'` the product of nonzero eigenvalues.
    pub fn laplacian_torsion(&self) -> LaplacianTorsion {
        let top = self.counts.len();
        let mut log_dets = Vec::with_capacity(top);
        for q in 0..top {
            let n = self.counts[q];
            let mut lap = DMatrix::<f64>::zeros(n, n);
            if q + 1 < top {
                let up = self.boundary_dense(q + 1);
                lap += &up * up.transpose();
            }
            if q >= 1 {
                let down = self.boundary_dense(q);
                lap += down.transpose() * &down;
            }
            log_dets.push(log_pseudo_det(lap));
        }
        let log_torsion = log_dets
            .iter()
            .enumerate()
            .map(|(q, l)| if q % 2 == 1 { q as f64 * l } else { -(q as f64) * l })
            .sum::<f64>();
        LaplacianTorsion { log_dets, log_torsion }
    }

    /// Orbit complex of a free action.
    pub fn quotient(&self, action: &FreeAction) -> Result<Self, ComplexError> {
        let orbit = action.orbits(self)?;
        let mut faces = Vec::new();
        for q in 1..self.counts.len() {
            let n = self.counts[q] / action.group.order() as usize;
            let mut fq = vec![Vec::new(); n];
            for c in 0..self.counts[q] {
                let o = orbit[q][c];
                if fq[o].is_empty() {
                    fq[o] = self.faces[q][c].iter().map(|&f| orbit[q - 1][f]).collect();
                }
            }
            faces.push(fq);
        }
        Self::new(self.count(0) / action.group.order() as usize, faces)
    }

    /// Product with an interval, each simplex cut into the staircase prisms
    /// `(v_0 .. v_i, w_i .. w_q)`. Vertices `v` are at the bottom, `w` at the top.
    pub fn prism(&self) -> Prism {
        Prism::build(self)
    }

    /// Barycentric subdivision; a cell is a flag of faces of one simplex ending at the
    /// whole simplex.
    pub fn barycentric(&self) -> Subdivision {
        Subdivision::build(self)
    }

    /// Subcomplex spanned by the given cells of each dimension and all of their faces,
    /// cells renumbered in increasing order of their old ids.
    pub fn subcomplex(&self, keep: &[Vec<usize>]) -> Self {
        let top = self.counts.len();
        let mut mark: Vec<Vec<bool>> = self.counts.iter().map(|&n| vec![false; n]).collect();
        for (q, cells) in keep.iter().enumerate().take(top) {
            for &c in cells {
                mark[q][c] = true;
            }
        }
        for q in (1..top).rev() {
            for c in 0..self.counts[q] {
                if mark[q][c] {
                    for &f in &self.faces[q][c] {
                        mark[q - 1][f] = true;
                    }
                }
            }
        }
        let renum: Vec<Vec<usize>> = mark
            .iter()
            .map(|m| {
                let mut next = 0;
                m.iter()
                    .map(|&b| {
                        let id = next;
                        next += b as usize;
                        id
                    })
                    .collect()
            })
            .collect();
        let mut faces = Vec::new();
        for q in 1..top {
            faces.push(
                (0..self.counts[q])
                    .filter(|&c| mark[q][c])
                    .map(|c| self.faces[q][c].iter().map(|&f| renum[q - 1][f]).collect())
                    .collect(),
            );
        }
        let vertices = mark.first().map_or(0, |m| m.iter().filter(|&&b| b).count());
        Self::new(vertices, faces).expect("subcomplex of a valid complex")
    }

    /// Codimension-one cells lying on exactly one top cell, with their faces.
    pub fn boundary(&self) -> Self {
        let top = self.counts.len();
        if top < 2 {
            return Self::empty();
        }
        let q = top - 1;
        let mut incidence = vec![0usize; self.counts[q - 1]];
        for fs in &self.faces[q] {
            for &f in fs {
                incidence[f] += 1;
            }
        }
        let mut keep = vec![Vec::new(); q];
        keep[q - 1] = (0..self.counts[q - 1]).filter(|&f| incidence[f] == 1).collect();
        self.subcomplex(&keep)
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson { vertices: self.count(0), faces: self.faces.iter().skip(1).cloned().collect() }
    }

    pub fn from_json(j: ComplexJson) -> Result<Self, ComplexError> {
        Self::new(j.vertices, j.faces)
    }
}

/// Serialized form: the vertex count, then face id lists for each dimension from 1 up.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: usize,
    pub faces: Vec<Vec<Vec<usize>>>,
}

fn log_pseudo_det(lap: DMatrix<f64>) -> f64 {
    if lap.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(lap).eigenvalues;
    let radius = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if radius == 0.0 {
        return 0.0;
    }
    let tol = 1e-9 * radius;
    eig.iter().filter(|x| x.abs() > tol).map(|x| x.ln()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianTorsion {
    /// `log det' L_q` for each dimension.
    pub log_dets: Vec<f64>,
    pub log_torsion: f64,
}

impl LaplacianTorsion {
    pub fn value(&self) -> f64 {
        self.log_torsion.exp()
    }

    pub fn det(&self, q: usize) -> f64 {
        self.log_dets[q].exp()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub rank: usize,
    #[serde(serialize_with = "ser_torsion")]
    pub torsion: Vec<BigInt>,
}

fn ser_torsion<S: serde::Serializer>(t: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(t.len()))?;
    for x in t {
        seq.serialize_element(&crate::jsonint::to_value(x))?;
    }
    seq.end()
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Equal to `Z^rank` plus the given cyclic summands.
    pub fn is(&self, rank: usize, torsion: &[u64]) -> bool {
        self.rank == rank && self.torsion.iter().cloned().eq(torsion.iter().map(|&t| BigInt::from(t)))
    }
}

impl std::fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologySummary {
    pub groups: Vec<HomologyGroup>,
}

impl HomologySummary {
    /// `H_q`; trivial above the dimension.
    pub fn h(&self, q: usize) -> HomologyGroup {
        self.groups.get(q).cloned().unwrap_or(HomologyGroup { rank: 0, torsion: Vec::new() })
    }

    pub fn euler(&self) -> i64 {
        self.groups.iter().enumerate().map(|(q, g)| if q % 2 == 0 { g.rank as i64 } else { -(g.rank as i64) }).sum()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.groups.iter().all(|g| g.torsion.is_empty())
    }
}

impl std::fmt::Display for HomologySummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (q, g) in self.groups.iter().enumerate() {
            if q > 0 {
                write!(f, ", ")?;
            }
            write!(f, "H{q} = {g}")?;
        }
        Ok(())
    }
}

/// Cell numbering of a join. Cells of dimension `q` are grouped by the dimension `p` of
/// their first part (`-1` for empty), `p` running upward.
#[derive(Debug, Clone)]
pub struct JoinIndex {
    left: Vec<usize>,
    right: Vec<usize>,
    /// offset[q][p + 1]
    offsets: Vec<Vec<usize>>,
    totals: Vec<usize>,
}

impl JoinIndex {
    fn new(k: &DeltaComplex, l: &DeltaComplex) -> Self {
        let left = k.f_vector();
        let right = l.f_vector();
        let dims = left.len() + right.len();
        let size = |f: &[usize], p: isize| -> usize {
            if p == -1 {
                1
            } else {
                f.get(p as usize).copied().unwrap_or(0)
            }
        };
        let mut offsets = Vec::with_capacity(dims);
        let mut totals = Vec::with_capacity(dims);
        for q in 0..dims as isize {
            let mut off = Vec::with_capacity(q as usize + 2);
            let mut acc = 0;
            for p in -1..=q {
                off.push(acc);
                let t = q - 1 - p;
                acc += size(&left, p) * size(&right, t);
            }
            offsets.push(off);
            totals.push(acc);
        }
        while totals.last() == Some(&0) {
            totals.pop();
            offsets.pop();
        }
        Self { left, right, offsets, totals }
    }

    fn dims(&self) -> usize {
        self.totals.len()
    }

    fn count(&self, q: usize) -> usize {
        self.totals.get(q).copied().unwrap_or(0)
    }

    fn right_size(&self, t: isize) -> usize {
        if t == -1 {
            1
        } else {
            self.right.get(t as usize).copied().unwrap_or(0)
        }
    }

    fn left_size(&self, p: isize) -> usize {
        if p == -1 {
            1
        } else {
            self.left.get(p as usize).copied().unwrap_or(0)
        }
    }

    /// Id of the `q`-cell whose first part is the `p`-cell `s` (`p = -1` for empty) and
    /// whose second part is `t`.
    pub fn id(&self, q: usize, p: isize, s: usize, t: usize) -> usize {
        let tq = q as isize - 1 - p;
        self.offsets[q][(p + 1) as usize] + s * self.right_size(tq) + t
    }

    /// `(p, s, t)` for each `q`-cell, in id order.
    pub fn cells(&self, q: usize) -> Vec<(isize, usize, usize)> {
        let mut out = Vec::with_capacity(self.count(q));
        for p in -1..=q as isize {
            let t = q as isize - 1 - p;
            for s in 0..self.left_size(p) {
                for tt in 0..self.right_size(t) {
                    out.push((p, s, tt));
                }
            }
        }
        out
    }
}

impl JoinIndex {
    /// Cellwise product of two cell maps, `fk` on the first factor and `fl` on the second.
    pub fn map(&self, fk: &[Vec<usize>], fl: &[Vec<usize>]) -> Vec<Vec<usize>> {
        (0..self.dims())
            .map(|q| {
                self.cells(q)
                    .into_iter()
                    .map(|(p, s, t)| {
                        let tq = q as isize - 1 - p;
                        let s2 = if p < 0 { s } else { fk[p as usize][s] };
                        let t2 = if tq < 0 { t } else { fl[tq as usize][t] };
                        self.id(q, p, s2, t2)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Rotation `i -> i + step` of [`DeltaComplex::polygon`], on vertices and edges.
pub fn polygon_rotation(n: usize, step: usize) -> Vec<Vec<usize>> {
    let rot: Vec<usize> = (0..n).map(|i| (i + step) % n).collect();
    vec![rot.clone(), rot]
}

/// A finite abelian group acting on a complex: for each cyclic factor, a cell
/// permutation in every dimension.
#[derive(Debug, Clone)]
pub struct FreeAction {
    pub group: FiniteAbelianGroup,
    generators: Vec<Vec<Vec<usize>>>,
}

impl FreeAction {
    pub fn new(group: FiniteAbelianGroup, generators: Vec<Vec<Vec<usize>>>) -> Result<Self, ComplexError> {
        if generators.len() != group.rank() {
            return Err(ComplexError::GeneratorCount { expected: group.rank(), got: generators.len() });
        }
        Ok(Self { group, generators })
    }

    pub fn cyclic(n: u64, generator: Vec<Vec<usize>>) -> Result<Self, ComplexError> {
        Self::new(FiniteAbelianGroup::cyclic(n).expect("nonzero order"), vec![generator])
    }

    /// Validates the action on `k` and numbers its orbits by first appearance.
    pub fn orbits(&self, k: &DeltaComplex) -> Result<Vec<Vec<usize>>, ComplexError> {
        let dims = k.f_vector().len();
        for (gi, g) in self.generators.iter().enumerate() {
            if g.len() != dims {
                return Err(ComplexError::DimensionCount { expected: dims, got: g.len() });
            }
            for (q, perm) in g.iter().enumerate() {
                let mut seen = vec![false; k.count(q)];
                if perm.len() != k.count(q) {
                    return Err(ComplexError::NotPermutation { generator: gi, dim: q });
                }
                for &x in perm {
                    if x >= seen.len() || std::mem::replace(&mut seen[x], true) {
                        return Err(ComplexError::NotPermutation { generator: gi, dim: q });
                    }
                }
                // the generator's order must divide its cyclic factor
                let m = self.group.moduli()[gi] as usize;
                for c in 0..k.count(q) {
                    let mut x = c;
                    for _ in 0..m {
                        x = perm[x];
                    }
                    if x != c {
                        return Err(ComplexError::NotPermutation { generator: gi, dim: q });
                    }
                }
                if q >= 1 {
                    for (c, &image) in perm.iter().enumerate() {
                        let moved: Vec<usize> = k.faces(q, c).iter().map(|&f| g[q - 1][f]).collect();
                        if moved != k.faces(q, image) {
                            return Err(ComplexError::NotSimplicial { generator: gi, dim: q, cell: c });
                        }
                    }
                }
            }
        }
        let order = self.group.order();
        let mut out = Vec::with_capacity(dims);
        for q in 0..dims {
            let mut id = vec![usize::MAX; k.count(q)];
            let mut next = 0;
            for c in 0..k.count(q) {
                if id[c] != usize::MAX {
                    continue;
                }
                let mut stack = vec![c];
                id[c] = next;
                let mut size = 0;
                while let Some(x) = stack.pop() {
                    size += 1;
                    for g in &self.generators {
                        let y = g[q][x];
                        if id[y] == usize::MAX {
                            id[y] = next;
                            stack.push(y);
                        }
                    }
                }
                if size as u64 != order {
                    return Err(ComplexError::NotFree { dim: q, cell: c, orbit: size, order });
                }
                next += 1;
            }
            out.push(id);
        }
        Ok(out)
    }
}

/// The part of `simplex x [0, 1]` a prism cell comes from. For a base `q`-simplex with
/// bottom vertices `v` and top vertices `w`:
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrismPiece {
    /// `(v_0 .. v_q)`
    Bottom,
    /// `(w_0 .. w_q)`
    Top,
    /// `(v_0 .. v_a, w_a .. w_q)`, of dimension `q + 1`
    Vertical(usize),
    /// `(v_0 .. v_b, w_(b+1) .. w_q)`, of dimension `q`
    Diagonal(usize),
}

impl PrismPiece {
    fn path(self, q: usize) -> Vec<(usize, bool)> {
        match self {
            PrismPiece::Bottom => (0..=q).map(|i| (i, false)).collect(),
            PrismPiece::Top => (0..=q).map(|i| (i, true)).collect(),
            PrismPiece::Vertical(a) => (0..=a).map(|i| (i, false)).chain((a..=q).map(|i| (i, true))).collect(),
            PrismPiece::Diagonal(b) => (0..=b).map(|i| (i, false)).chain((b + 1..=q).map(|i| (i, true))).collect(),
        }
    }

    fn from_path(path: &[(usize, bool)]) -> Self {
        let lows: Vec<usize> = path.iter().filter(|p| !p.1).map(|p| p.0).collect();
        let highs: Vec<usize> = path.iter().filter(|p| p.1).map(|p| p.0).collect();
        match (lows.last(), highs.first()) {
            (_, None) => PrismPiece::Bottom,
            (None, _) => PrismPiece::Top,
            (Some(&a), Some(&b)) if a == b => PrismPiece::Vertical(a),
            (Some(&a), Some(_)) => PrismPiece::Diagonal(a),
        }
    }

    fn pieces(q: usize) -> impl Iterator<Item = PrismPiece> {
        [PrismPiece::Bottom, PrismPiece::Top]
            .into_iter()
            .chain((0..=q).map(PrismPiece::Vertical))
            .chain((0..q).map(PrismPiece::Diagonal))
    }

    fn dim(self, q: usize) -> usize {
        match self {
            PrismPiece::Vertical(_) => q + 1,
            _ => q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrismCell {
    pub base_dim: usize,
    pub base: usize,
    pub piece: PrismPiece,
}

#[derive(Debug, Clone)]
pub struct Prism {
    pub complex: DeltaComplex,
    /// Origin of every cell, by dimension and id.
    pub cells: Vec<Vec<PrismCell>>,
}

impl Prism {
    fn build(k: &DeltaComplex) -> Self {
        let top = k.f_vector().len();
        let mut cells: Vec<Vec<PrismCell>> = vec![Vec::new(); top + 1];
        let mut index: HashMap<(usize, usize, PrismPiece), usize> = HashMap::new();
        for q in 0..top {
            for s in 0..k.count(q) {
                for piece in PrismPiece::pieces(q) {
                    let d = piece.dim(q);
                    index.insert((q, s, piece), cells[d].len());
                    cells[d].push(PrismCell { base_dim: q, base: s, piece });
                }
            }
        }
        if top == 0 {
            cells.clear();
        } else if cells[top].is_empty() {
            cells.pop();
        }
        let mut faces = Vec::new();
        for (d, row) in cells.iter().enumerate().skip(1) {
            let fd = row
                .iter()
                .map(|cell| {
                    let path = cell.piece.path(cell.base_dim);
                    (0..=d)
                        .map(|i| {
                            let mut sub = path.clone();
                            sub.remove(i);
                            let q = cell.base_dim;
                            let missing = (0..=q).find(|j| !sub.iter().any(|p| p.0 == *j));
                            let key = match missing {
                                None => (q, cell.base, PrismPiece::from_path(&sub)),
                                Some(j) => {
                                    for p in sub.iter_mut() {
                                        if p.0 > j {
                                            p.0 -= 1;
                                        }
                                    }
                                    (q - 1, k.face(q, cell.base, j), PrismPiece::from_path(&sub))
                                }
                            };
                            index[&key]
                        })
                        .collect()
                })
                .collect();
            faces.push(fd);
        }
        let complex = DeltaComplex::new(cells.first().map_or(0, |c| c.len()), faces).expect("prism");
        Prism { complex, cells }
    }
}

/// A cell of a barycentric subdivision: a strictly increasing flag of vertex subsets of
/// its carrier simplex, the last subset being all of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdCell {
    pub carrier_dim: usize,
    pub carrier: usize,
    pub flag: Vec<u64>,
}

impl SdCell {
    /// Dimension of the face whose barycenter is vertex `i`.
    pub fn vertex_rank(&self, i: usize) -> usize {
        self.flag[i].count_ones() as usize - 1
    }
}

#[derive(Debug, Clone)]
pub struct Subdivision {
    pub complex: DeltaComplex,
    pub cells: Vec<Vec<SdCell>>,
}

fn flags_ending_at(full: u64, out: &mut Vec<Vec<u64>>) {
    fn extend(chain: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        out.push(chain.iter().rev().copied().collect());
        let first = *chain.last().unwrap();
        // proper nonempty subsets of `first`, in increasing order
        let mut sub = (first - 1) & first;
        let mut subs = Vec::new();
        while sub != 0 {
            subs.push(sub);
            sub = (sub - 1) & first;
        }
        subs.sort_unstable();
        for s in subs {
            chain.push(s);
            extend(chain, out);
            chain.pop();
        }
    }
    extend(&mut vec![full], out);
}

/// Renumbers the bits of `s` by their position among the bits of `within`.
fn compress(s: u64, within: u64) -> u64 {
    let mut out = 0;
    let mut k = 0;
    for b in 0..64 {
        if within >> b & 1 == 1 {
            if s >> b & 1 == 1 {
                out |= 1 << k;
            }
            k += 1;
        }
    }
    out
}

impl Subdivision {
    fn build(k: &DeltaComplex) -> Self {
        let top = k.f_vector().len();
        assert!(top <= 63, "barycentric subdivision supports dimension < 63");
        let mut cells: Vec<Vec<SdCell>> = vec![Vec::new(); top];
        let mut index: HashMap<(usize, usize, Vec<u64>), usize> = HashMap::new();
        for n in 0..top {
            let full = (1u64 << (n + 1)) - 1;
            let mut flags = Vec::new();
            flags_ending_at(full, &mut flags);
            flags.sort_by_key(|f| f.len());
            for s in 0..k.count(n) {
                for f in &flags {
                    let d = f.len() - 1;
                    index.insert((n, s, f.clone()), cells[d].len());
                    cells[d].push(SdCell { carrier_dim: n, carrier: s, flag: f.clone() });
                }
            }
        }
        let mut faces = Vec::new();
        for (d, row) in cells.iter().enumerate().skip(1) {
            let fd = row
                .iter()
                .map(|c| {
                    (0..=d)
                        .map(|i| {
                            let mut flag = c.flag.clone();
                            flag.remove(i);
                            let key = if i < d {
                                (c.carrier_dim, c.carrier, flag)
                            } else {
                                let t = *flag.last().unwrap();
                                let (fd, fc) = k.subface(c.carrier_dim, c.carrier, t);
                                (fd, fc, flag.iter().map(|&s| compress(s, t)).collect())
                            };
                            index[&key]
                        })
                        .collect()
                })
                .collect();
            faces.push(fd);
        }
        let complex = DeltaComplex::new(cells.first().map_or(0, |c| c.len()), faces).expect("subdivision");
        Subdivision { complex, cells }
    }
}
