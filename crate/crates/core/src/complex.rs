//! Finite abstract simplicial complexes stored by their facets.
//!
//! A complex lives over a sorted label universe shared with the complexes it
//! was derived from (links, deletions, collapses), so derived complexes can
//! be compared and manipulated as plain bitmasks. The void complex (no
//! faces at all) is not a `SimplicialComplex`; operations that can produce
//! it return `None` instead.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, bit, bits, count, is_subset, Mask, MAX_ELEMENTS};
use crate::label::Label;
use crate::poset::Poset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("a complex needs at least one nonempty facet")]
    Void,
    #[error("facet {0} is empty")]
    EmptyFacet(usize),
    #[error("{0} vertices given, at most {MAX_ELEMENTS} are supported")]
    TooManyVertices(usize),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("cannot delete `{0}`: it is the only vertex")]
    LastVertex(Label),
    #[error("vertex `{0}` occurs in both join factors")]
    SharedVertex(Label),
    #[error("the order complex of an empty poset is void")]
    EmptyPoset,
}

#[derive(Clone)]
pub struct SimplicialComplex {
    universe: Arc<[Label]>,
    vertices: Mask,
    /// Maximal faces, sorted ascending by mask value.
    facets: Vec<Mask>,
}

/// Keeps only inclusion-maximal sets, sorted ascending.
pub(crate) fn maximal(mut sets: Vec<Mask>) -> Vec<Mask> {
    sets.sort_unstable_by(|a, b| count(*b).cmp(&count(*a)).then(a.cmp(b)));
    sets.dedup();
    let mut keep: Vec<Mask> = Vec::with_capacity(sets.len());
    for s in sets {
        if !keep.iter().any(|&k| is_subset(s, k)) {
            keep.push(s);
        }
    }
    keep.sort_unstable();
    keep
}

impl SimplicialComplex {
    /// Builds a complex from facets given over arbitrary labels. Non-maximal
    /// faces in the input are dropped; the vertex set is the union.
    pub fn from_facets<I, F, L>(facets: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = F>,
        F: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        let raw: Vec<Vec<Label>> = facets
            .into_iter()
            .map(|f| f.into_iter().map(Into::into).collect())
            .collect();
        if let Some(i) = raw.iter().position(Vec::is_empty) {
            return Err(ComplexError::EmptyFacet(i));
        }
        let labels: BTreeSet<Label> = raw.iter().flatten().cloned().collect();
        if labels.len() > MAX_ELEMENTS {
            return Err(ComplexError::TooManyVertices(labels.len()));
        }
        let universe: Arc<[Label]> = labels.into_iter().collect::<Vec<_>>().into();
        let masks = raw
            .iter()
            .map(|f| {
                f.iter().fold(0, |m, l| {
                    m | bit(universe.binary_search(l).expect("label collected above"))
                })
            })
            .collect();
        Self::from_masks(universe, masks).ok_or(ComplexError::Void)
    }

    /// The full simplex on the given vertices.
    pub fn simplex<I, L>(vertices: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        Self::from_facets([vertices])
    }

    pub fn point<L: Into<Label>>(v: L) -> Self {
        Self::from_facets([[v]]).expect("a point is a valid complex")
    }

    pub(crate) fn from_masks(universe: Arc<[Label]>, facets: Vec<Mask>) -> Option<Self> {
        let facets = maximal(facets.into_iter().filter(|&f| f != 0).collect());
        if facets.is_empty() {
            return None;
        }
        let vertices = facets.iter().fold(0, |m, f| m | f);
        Some(SimplicialComplex {
            universe,
            vertices,
            facets,
        })
    }

    /// Facets must already be maximal, nonempty and sorted.
    pub(crate) fn from_parts(universe: Arc<[Label]>, facets: Vec<Mask>) -> Self {
        debug_assert!(!facets.is_empty());
        let vertices = facets.iter().fold(0, |m, f| m | f);
        SimplicialComplex {
            universe,
            vertices,
            facets,
        }
    }

    /// Complex whose simplices are the chains of `poset`.
    pub fn order_complex(poset: &Poset) -> Result<Self, ComplexError> {
        if poset.is_empty() {
            return Err(ComplexError::EmptyPoset);
        }
        let universe: Arc<[Label]> = poset.labels().to_vec().into();
        Ok(Self::order_complex_on(poset, &universe, poset.all())
            .expect("nonempty poset has chains"))
    }

    /// Order complex of the induced subposet on `mask`, over `universe`
    /// (which must be the label list of `poset`).
    pub(crate) fn order_complex_on(
        poset: &Poset,
        universe: &Arc<[Label]>,
        mask: Mask,
    ) -> Option<Self> {
        if mask == 0 {
            return None;
        }
        let mut chains = poset.maximal_chains(mask);
        chains.sort_unstable();
        Some(Self::from_parts(universe.clone(), chains))
    }

    pub fn universe(&self) -> &Arc<[Label]> {
        &self.universe
    }

    pub(crate) fn vertex_mask(&self) -> Mask {
        self.vertices
    }

    pub(crate) fn facet_masks(&self) -> &[Mask] {
        &self.facets
    }

    pub fn vertex_count(&self) -> usize {
        count(self.vertices)
    }

    pub fn vertices(&self) -> Vec<Label> {
        bits(self.vertices)
            .map(|i| self.universe[i].clone())
            .collect()
    }

    pub(crate) fn labels_of(&self, m: Mask) -> Vec<Label> {
        bits(m).map(|i| self.universe[i].clone()).collect()
    }

    /// Facets as sorted label lists, in lexicographic order.
    pub fn facets(&self) -> Vec<Vec<Label>> {
        let mut out: Vec<Vec<Label>> = self.facets.iter().map(|&f| self.labels_of(f)).collect();
        out.sort();
        out
    }

    pub fn dimension(&self) -> usize {
        self.facets.iter().map(|&f| count(f)).max().unwrap_or(1) - 1
    }

    pub fn is_point(&self) -> bool {
        count(self.vertices) == 1
    }

    pub(crate) fn index_of(&self, v: &str) -> Option<usize> {
        let i = self
            .universe
            .binary_search_by(|l| {
                l.as_str()
                    .len()
                    .cmp(&v.len())
                    .then_with(|| l.as_str().as_bytes().cmp(v.as_bytes()))
            })
            .ok()?;
        bits::has(self.vertices, i).then_some(i)
    }

    fn require(&self, v: &str) -> Result<usize, ComplexError> {
        self.index_of(v)
            .ok_or_else(|| ComplexError::UnknownVertex(v.to_string()))
    }

    /// Translates a label set into this complex's universe.
    pub(crate) fn mask_of<L: AsRef<str>>(&self, labels: &[L]) -> Option<Mask> {
        labels
            .iter()
            .try_fold(0, |m, l| self.index_of(l.as_ref()).map(|i| m | bit(i)))
    }

    pub(crate) fn contains_face_mask(&self, face: Mask) -> bool {
        face != 0 && self.facets.iter().any(|&f| is_subset(face, f))
    }

    pub fn contains_face<L: AsRef<str>>(&self, face: &[L]) -> bool {
        self.mask_of(face)
            .is_some_and(|m| self.contains_face_mask(m))
    }

    /// Link of vertex `i`; `None` when it is void.
    pub(crate) fn link_idx(&self, i: usize) -> Option<Self> {
        let b = bit(i);
        let faces: Vec<Mask> = self
            .facets
            .iter()
            .filter(|&&f| f & b != 0)
            .map(|&f| f & !b)
            .collect();
        // Facets containing `i` stay pairwise incomparable once `i` is dropped.
        let mut faces: Vec<Mask> = faces.into_iter().filter(|&f| f != 0).collect();
        if faces.is_empty() {
            return None;
        }
        faces.sort_unstable();
        Some(Self::from_parts(self.universe.clone(), faces))
    }

    /// `lk_X v`: the faces `σ` with `v ∉ σ` and `σ ∪ {v} ∈ X`. `Ok(None)`
    /// is the void link of an isolated vertex.
    pub fn link(&self, v: &str) -> Result<Option<Self>, ComplexError> {
        Ok(self.link_idx(self.require(v)?))
    }

    /// Induced subcomplex on `vertices ∖ {i}`; `None` if nothing remains.
    pub(crate) fn delete_idx(&self, i: usize) -> Option<Self> {
        self.induced_mask(self.vertices & !bit(i))
    }

    pub(crate) fn induced_mask(&self, keep: Mask) -> Option<Self> {
        let keep = keep & self.vertices;
        if keep == 0 {
            return None;
        }
        if self.facets.iter().all(|&f| is_subset(f, keep) || f & keep == 0) {
            let facets: Vec<Mask> = self
                .facets
                .iter()
                .copied()
                .filter(|&f| is_subset(f, keep))
                .collect();
            return Some(Self::from_parts(self.universe.clone(), facets));
        }
        Self::from_masks(
            self.universe.clone(),
            self.facets.iter().map(|&f| f & keep).collect(),
        )
    }

    /// `X ∖ {v}`, the induced complex on the remaining vertices.
    pub fn delete_vertex(&self, v: &str) -> Result<Self, ComplexError> {
        let i = self.require(v)?;
        self.delete_idx(i)
            .ok_or_else(|| ComplexError::LastVertex(self.universe[i].clone()))
    }

    /// Induced subcomplex on the given vertices (labels outside `X` ignored).
    pub fn induced<L: AsRef<str>>(&self, vertices: &[L]) -> Option<Self> {
        let keep = vertices
            .iter()
            .filter_map(|l| self.index_of(l.as_ref()))
            .fold(0, |m, i| m | bit(i));
        self.induced_mask(keep)
    }

    /// Simplicial join `X * Y`; vertex labels must be disjoint.
    pub fn join(&self, other: &Self) -> Result<Self, ComplexError> {
        let mine = self.vertices();
        let theirs = other.vertices();
        let mut all: Vec<Label> = mine.iter().chain(theirs.iter()).cloned().collect();
        all.sort();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::SharedVertex(w[0].clone()));
        }
        if all.len() > MAX_ELEMENTS {
            return Err(ComplexError::TooManyVertices(all.len()));
        }
        let universe: Arc<[Label]> = all.into();
        let a = self.reindex_facets(&universe);
        let b = other.reindex_facets(&universe);
        let mut facets: Vec<Mask> = a
            .iter()
            .flat_map(|&x| b.iter().map(move |&y| x | y))
            .collect();
        facets.sort_unstable();
        Ok(Self::from_parts(universe, facets))
    }

    fn reindex_facets(&self, universe: &Arc<[Label]>) -> Vec<Mask> {
        let map: Vec<Option<usize>> = self
            .universe
            .iter()
            .map(|l| universe.binary_search(l).ok())
            .collect();
        self.facets
            .iter()
            .map(|&f| bits(f).fold(0, |m, i| m | bit(map[i].expect("label in target universe"))))
            .collect()
    }

    /// The same complex expressed over another universe, if every vertex is
    /// present there.
    pub(crate) fn reindexed(&self, universe: &Arc<[Label]>) -> Option<Self> {
        if Arc::ptr_eq(&self.universe, universe) {
            return Some(self.clone());
        }
        if bits(self.vertices).any(|i| universe.binary_search(&self.universe[i]).is_err()) {
            return None;
        }
        let mut facets = self.reindex_facets(universe);
        facets.sort_unstable();
        Some(Self::from_parts(universe.clone(), facets))
    }

    pub(crate) fn apex_idx(&self) -> Option<usize> {
        let common = self.facets.iter().fold(self.vertices, |m, f| m & f);
        bits::lowest(common)
    }

    /// A vertex lying in every facet (the smallest label if several).
    pub fn is_cone(&self) -> Option<Label> {
        self.apex_idx().map(|i| self.universe[i].clone())
    }

    /// Every nonempty face, sorted by size and then lexicographically.
    pub(crate) fn face_masks(&self) -> Vec<Mask> {
        let mut seen: HashSet<Mask> = HashSet::new();
        for &f in &self.facets {
            let verts: Vec<usize> = bits(f).collect();
            let k = verts.len();
            for s in 1u64..(1u64 << k) {
                let m = (0..k)
                    .filter(|j| s >> j & 1 == 1)
                    .fold(0, |m, j| m | bit(verts[j]));
                seen.insert(m);
            }
        }
        let mut out: Vec<Mask> = seen.into_iter().collect();
        out.sort_unstable_by(|a, b| count(*a).cmp(&count(*b)).then(bits::lex_cmp(*a, *b)));
        out
    }

    /// All nonempty faces as label lists.
    pub fn faces(&self) -> Vec<Vec<Label>> {
        self.face_masks().into_iter().map(|m| self.labels_of(m)).collect()
    }

    pub fn face_count(&self) -> usize {
        self.face_masks().len()
    }

    /// `f[k]` = number of `k`-dimensional faces.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dimension() + 1];
        for m in self.face_masks() {
            f[count(m) - 1] += 1;
        }
        f
    }

    /// `Σ_k (-1)^k f_k − 1`.
    pub fn reduced_euler(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum::<i64>()
            - 1
    }

    /// Betti numbers over the two-element field, `b_0 ..= b_dim`.
    pub fn z2_betti(&self) -> Vec<usize> {
        let faces = self.face_masks();
        let dim = self.dimension();
        let mut by_dim: Vec<Vec<Mask>> = vec![Vec::new(); dim + 1];
        for f in faces {
            by_dim[count(f) - 1].push(f);
        }
        // rank[k] = rank of the boundary map from k-faces to (k-1)-faces.
        let mut rank = vec![0usize; dim + 2];
        for k in 1..=dim {
            let rows: HashMap<Mask, usize> = by_dim[k - 1]
                .iter()
                .enumerate()
                .map(|(i, &m)| (m, i))
                .collect();
            let columns = by_dim[k].iter().map(|&s| {
                let mut col = Gf2Vec::zeros(rows.len());
                for v in bits(s) {
                    col.flip(rows[&(s & !bit(v))]);
                }
                col
            });
            rank[k] = gf2_rank(columns);
        }
        (0..=dim)
            .map(|k| by_dim[k].len() - rank[k] - rank[k + 1])
            .collect()
    }

    pub fn homology(&self) -> Homology {
        Homology {
            betti: self.z2_betti(),
            reduced_euler: self.reduced_euler(),
        }
    }

    pub(crate) fn same_universe(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.universe, &other.universe) || self.universe == other.universe
    }

    /// `self ⊆ other` as complexes.
    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        match self.reindexed(&other.universe) {
            Some(me) => me.facets.iter().all(|&f| other.contains_face_mask(f)),
            None => false,
        }
    }
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        if self.same_universe(other) {
            return self.vertices == other.vertices && self.facets == other.facets;
        }
        self.vertices() == other.vertices() && self.facets() == other.facets()
    }
}

impl Eq for SimplicialComplex {}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.facets()).finish()
    }
}

/// GF(2) Betti numbers and reduced Euler characteristic of a complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homology {
    pub betti: Vec<usize>,
    pub reduced_euler: i64,
}

#[derive(Clone)]
struct Gf2Vec(Vec<u64>);

impl Gf2Vec {
    fn zeros(n: usize) -> Self {
        Gf2Vec(vec![0; n.div_ceil(64)])
    }

    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn lowest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn xor(&mut self, other: &Gf2Vec) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Column rank by elimination on lowest set bits.
fn gf2_rank(columns: impl Iterator<Item = Gf2Vec>) -> usize {
    let mut pivots: HashMap<usize, Gf2Vec> = HashMap::new();
    for mut col in columns {
        while let Some(r) = col.lowest() {
            match pivots.get(&r) {
                Some(p) => col.xor(p),
                None => {
                    pivots.insert(r, col);
                    break;
                }
            }
        }
    }
    pivots.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(facets: &[&[&str]]) -> SimplicialComplex {
        SimplicialComplex::from_facets(facets.iter().map(|f| f.iter().copied())).unwrap()
    }

    fn boundary_triangle() -> SimplicialComplex {
        cx(&[&["a", "b"], &["b", "c"], &["a", "c"]])
    }

    #[test]
    fn facets_are_maximalized() {
        let x = cx(&[&["a", "b", "c"], &["a", "b"], &["d"]]);
        assert_eq!(x.facets().len(), 2);
        assert_eq!(x.vertex_count(), 4);
        assert!(matches!(
            SimplicialComplex::from_facets(Vec::<Vec<&str>>::new()),
            Err(ComplexError::Void)
        ));
        assert!(matches!(
            SimplicialComplex::from_facets(vec![Vec::<&str>::new()]),
            Err(ComplexError::EmptyFacet(0))
        ));
    }

    #[test]
    fn order_complexes() {
        let chain = Poset::chain(&["a", "b", "c"]).unwrap();
        assert_eq!(
            SimplicialComplex::order_complex(&chain).unwrap(),
            cx(&[&["a", "b", "c"]])
        );
        let anti = Poset::new(["a", "b"], Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(
            SimplicialComplex::order_complex(&anti).unwrap(),
            cx(&[&["a"], &["b"]])
        );
        let b3 = Poset::boolean_lattice(3).unwrap().proper_part().unwrap();
        let hex = SimplicialComplex::order_complex(&b3).unwrap();
        assert_eq!(hex.f_vector(), vec![6, 6]);
        assert_eq!(hex.reduced_euler(), -1);
        let empty = Poset::new(Vec::<&str>::new(), Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(
            SimplicialComplex::order_complex(&empty),
            Err(ComplexError::EmptyPoset)
        );
    }

    #[test]
    fn links() {
        let x = boundary_triangle();
        assert_eq!(x.link("a").unwrap().unwrap(), cx(&[&["b"], &["c"]]));
        let s = cx(&[&["a", "b", "c"]]);
        assert_eq!(s.link("a").unwrap().unwrap(), cx(&[&["b", "c"]]));
        let two = cx(&[&["a"], &["b"]]);
        assert_eq!(two.link("a").unwrap(), None);
        assert!(matches!(x.link("z"), Err(ComplexError::UnknownVertex(_))));
        // lk of the bottom of B2 is the order complex of the elements above it.
        let b2 = Poset::boolean_lattice(2).unwrap();
        let d = SimplicialComplex::order_complex(&b2).unwrap();
        let above = b2.open_interval("{}", crate::poset::Side::Above).unwrap();
        assert_eq!(
            d.link("{}").unwrap().unwrap(),
            SimplicialComplex::order_complex(&above).unwrap()
        );
        assert_eq!(
            d.link("{}").unwrap().unwrap(),
            cx(&[&["{1}", "{1,2}"], &["{2}", "{1,2}"]])
        );
    }

    #[test]
    fn deletions() {
        let s = cx(&[&["a", "b", "c"]]);
        assert_eq!(s.delete_vertex("a").unwrap(), cx(&[&["b", "c"]]));
        assert_eq!(
            boundary_triangle().delete_vertex("a").unwrap(),
            cx(&[&["b", "c"]])
        );
        let two = cx(&[&["a"], &["b"]]);
        assert_eq!(two.delete_vertex("a").unwrap(), SimplicialComplex::point("b"));
        let p = SimplicialComplex::point("a");
        assert!(matches!(p.delete_vertex("a"), Err(ComplexError::LastVertex(_))));
    }

    #[test]
    fn joins_and_cones() {
        let p = SimplicialComplex::point("a");
        let q = SimplicialComplex::point("b");
        assert_eq!(p.join(&q).unwrap(), cx(&[&["a", "b"]]));
        let two = cx(&[&["a"], &["b"]]);
        let other = cx(&[&["c"], &["d"]]);
        let square = two.join(&other).unwrap();
        assert_eq!(
            square,
            cx(&[&["a", "c"], &["a", "d"], &["b", "c"], &["b", "d"]])
        );
        assert_eq!(square.reduced_euler(), -1);
        assert!(matches!(two.join(&two), Err(ComplexError::SharedVertex(_))));
        let cone = SimplicialComplex::point("p").join(&boundary_triangle()).unwrap();
        assert_eq!(cone.is_cone().unwrap().as_str(), "p");
        assert_eq!(cx(&[&["a", "b", "c"]]).is_cone().unwrap().as_str(), "a");
        assert_eq!(boundary_triangle().is_cone(), None);
        let chain = Poset::new(["x", "y", "m"], [("x", "m"), ("y", "m")]).unwrap();
        let d = SimplicialComplex::order_complex(&chain).unwrap();
        assert_eq!(d.is_cone().unwrap().as_str(), "m");
    }

    #[test]
    fn euler_and_betti() {
        assert_eq!(SimplicialComplex::point("a").reduced_euler(), 0);
        assert_eq!(SimplicialComplex::point("a").z2_betti(), vec![1]);
        let c = boundary_triangle();
        assert_eq!(c.f_vector(), vec![3, 3]);
        assert_eq!(c.reduced_euler(), -1);
        assert_eq!(c.z2_betti(), vec![1, 1]);
        assert_eq!(cx(&[&["a", "b", "c"]]).z2_betti(), vec![1, 0, 0]);
        let two = cx(&[&["a"], &["b"]]);
        assert_eq!(two.z2_betti(), vec![2]);
        // Boundary of a tetrahedron: a 2-sphere.
        let s2 = cx(&[&["a", "b", "c"], &["a", "b", "d"], &["a", "c", "d"], &["b", "c", "d"]]);
        assert_eq!(s2.z2_betti(), vec![1, 0, 1]);
        assert_eq!(s2.reduced_euler(), 1);
    }

    #[test]
    fn equality_across_universes() {
        let x = cx(&[&["a", "b"], &["b", "c"]]);
        let y = cx(&[&["a", "b", "c"], &["d"]]).delete_vertex("d").unwrap();
        assert_ne!(x, y);
        let z = cx(&[&["b", "c"], &["a", "b"], &["z"]]).delete_vertex("z").unwrap();
        assert_eq!(x, z);
        assert!(x.is_subcomplex_of(&cx(&[&["a", "b", "c"]])));
        assert!(!cx(&[&["a", "d"]]).is_subcomplex_of(&x));
    }
}
