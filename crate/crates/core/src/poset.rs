//! Finite posets and self-maps of them.
//!
//! Elements are stored in label order, so element `i` of a poset is the
//! `i`-th smallest label. The strict order is kept transitively closed as a
//! pair of bitmask tables (`up[i]` = elements strictly above `i`, `down[i]` =
//! elements strictly below).

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{self, bit, bits, has, Mask, MAX_ELEMENTS};
use crate::label::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("duplicate element `{0}`")]
    DuplicateElement(Label),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("relation `{0}` < `{0}` is reflexive")]
    Reflexive(Label),
    #[error("relation has a cycle through `{0}`")]
    Cycle(Label),
    #[error("{0} elements given, at most {MAX_ELEMENTS} are supported")]
    TooLarge(usize),
    #[error("map has no value for `{0}`")]
    NotTotal(Label),
    #[error("map assigns `{0}` twice")]
    DuplicateAssignment(Label),
    #[error("map is not order-preserving: `{0}` < `{1}` but images are not ordered")]
    NotOrderPreserving(Label, Label),
    #[error("map is not monotone: `{0}` is incomparable to its image")]
    NotMonotone(Label),
    #[error("maps are defined on different posets")]
    DomainMismatch,
    #[error("monotone decomposition failed its own check")]
    DecompositionCheck,
}

/// Which open interval of an element to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// A finite strict partial order over labeled elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<Label>,
    up: Vec<Mask>,
    down: Vec<Mask>,
}

impl Poset {
    /// Builds a poset from its elements and any generating set of strict
    /// relations `(a, b)` meaning `a < b` (typically the cover relations).
    /// The relation is closed transitively; reflexive pairs and cycles are
    /// rejected.
    pub fn new<E, L, R>(elements: E, relations: R) -> Result<Self, PosetError>
    where
        E: IntoIterator<Item = L>,
        L: Into<Label>,
        R: IntoIterator<Item = (L, L)>,
    {
        let mut labels: Vec<Label> = elements.into_iter().map(Into::into).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(PosetError::DuplicateElement(w[0].clone()));
        }
        if labels.len() > MAX_ELEMENTS {
            return Err(PosetError::TooLarge(labels.len()));
        }
        let n = labels.len();
        let mut up = vec![0 as Mask; n];
        for (a, b) in relations {
            let (a, b): (Label, Label) = (a.into(), b.into());
            let i = find(&labels, &a)?;
            let j = find(&labels, &b)?;
            if i == j {
                return Err(PosetError::Reflexive(a));
            }
            up[i] |= bit(j);
        }
        // Warshall closure over bit rows.
        for k in 0..n {
            let row = up[k];
            for r in up.iter_mut() {
                if has(*r, k) {
                    *r |= row;
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| has(up[i], i)) {
            return Err(PosetError::Cycle(labels[i].clone()));
        }
        Ok(Self::from_up(labels, up))
    }

    /// `up` must already be transitively closed and irreflexive.
    pub(crate) fn from_up(labels: Vec<Label>, up: Vec<Mask>) -> Self {
        let n = labels.len();
        let mut down = vec![0 as Mask; n];
        for (i, &row) in up.iter().enumerate() {
            for j in bits(row) {
                down[j] |= bit(i);
            }
        }
        Poset { labels, up, down }
    }

    /// The chain `l0 < l1 < ...`.
    pub fn chain<L: Into<Label> + Clone>(labels: &[L]) -> Result<Self, PosetError> {
        let rel: Vec<(L, L)> = labels
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect();
        Poset::new(labels.iter().cloned(), rel)
    }

    /// Subsets of `{1..n}` ordered by inclusion, labeled `{}`, `{1}`, `{1,2}`, ...
    pub fn boolean_lattice(n: usize) -> Result<Self, PosetError> {
        if (1usize << n.min(63)) > MAX_ELEMENTS {
            return Err(PosetError::TooLarge(1 << n.min(63)));
        }
        let name = |s: usize| {
            let parts: Vec<String> = (0..n)
                .filter(|k| s >> k & 1 == 1)
                .map(|k| (k + 1).to_string())
                .collect();
            format!("{{{}}}", parts.join(","))
        };
        let subsets = 1usize << n;
        let elements: Vec<String> = (0..subsets).map(name).collect();
        let mut rel = Vec::new();
        for s in 0..subsets {
            for k in 0..n {
                if s >> k & 1 == 0 {
                    rel.push((name(s), name(s | 1 << k)));
                }
            }
        }
        Poset::new(elements, rel)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels
            .binary_search_by(|l| {
                l.as_str()
                    .len()
                    .cmp(&label.len())
                    .then_with(|| l.as_str().as_bytes().cmp(label.as_bytes()))
            })
            .ok()
    }

    pub(crate) fn require(&self, label: &str) -> Result<usize, PosetError> {
        self.index_of(label)
            .ok_or_else(|| PosetError::UnknownElement(label.to_string()))
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        has(self.up[i], j)
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        i == j || has(self.up[i], j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.le(i, j) || self.le(j, i)
    }

    /// `a < b` by label.
    pub fn less(&self, a: &str, b: &str) -> Result<bool, PosetError> {
        Ok(self.lt(self.require(a)?, self.require(b)?))
    }

    pub(crate) fn up(&self, i: usize) -> Mask {
        self.up[i]
    }

    pub(crate) fn down(&self, i: usize) -> Mask {
        self.down[i]
    }

    pub(crate) fn up_table(&self) -> &[Mask] {
        &self.up
    }

    pub(crate) fn down_table(&self) -> &[Mask] {
        &self.down
    }

    pub(crate) fn all(&self) -> Mask {
        bits::full(self.len())
    }

    /// The cover relation (transitive reduction), in label order.
    pub fn covers(&self) -> Vec<(Label, Label)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in bits(self.up[i]) {
                if self.up[i] & self.down[j] == 0 {
                    out.push((self.labels[i].clone(), self.labels[j].clone()));
                }
            }
        }
        out
    }

    /// The same elements with the order reversed.
    pub fn dual(&self) -> Poset {
        Poset {
            labels: self.labels.clone(),
            up: self.down.clone(),
            down: self.up.clone(),
        }
    }

    pub(crate) fn mask_of<I, L>(&self, labels: I) -> Result<Mask, PosetError>
    where
        I: IntoIterator<Item = L>,
        L: AsRef<str>,
    {
        let mut m = 0;
        for l in labels {
            m |= bit(self.require(l.as_ref())?);
        }
        Ok(m)
    }

    pub(crate) fn labels_of(&self, mask: Mask) -> BTreeSet<Label> {
        bits(mask).map(|i| self.labels[i].clone()).collect()
    }

    /// Induced subposet on the given elements.
    pub fn induced<I, L>(&self, labels: I) -> Result<Poset, PosetError>
    where
        I: IntoIterator<Item = L>,
        L: AsRef<str>,
    {
        Ok(self.induced_mask(self.mask_of(labels)?))
    }

    pub(crate) fn induced_mask(&self, mask: Mask) -> Poset {
        let keep: Vec<usize> = bits(mask).collect();
        let mut pos = vec![usize::MAX; self.len()];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let up = keep
            .iter()
            .map(|&i| bits(self.up[i] & mask).fold(0, |m, j| m | bit(pos[j])))
            .collect();
        Poset::from_up(labels, up)
    }

    /// `P_{<x}` or `P_{>x}` as an induced subposet (possibly empty).
    pub fn open_interval(&self, x: &str, side: Side) -> Result<Poset, PosetError> {
        let i = self.require(x)?;
        Ok(self.induced_mask(match side {
            Side::Below => self.down[i],
            Side::Above => self.up[i],
        }))
    }

    /// Index of the unique minimum, if there is one.
    pub fn bottom(&self) -> Option<usize> {
        let all = self.all();
        (0..self.len()).find(|&i| self.up[i] | bit(i) == all)
    }

    /// Index of the unique maximum, if there is one.
    pub fn top(&self) -> Option<usize> {
        let all = self.all();
        (0..self.len()).find(|&i| self.down[i] | bit(i) == all)
    }

    /// Both bounds, when `P` has a minimum and a maximum and at least two
    /// elements.
    pub fn bounds(&self) -> Option<(usize, usize)> {
        match (self.bottom(), self.top()) {
            (Some(b), Some(t)) if b != t => Some((b, t)),
            _ => None,
        }
    }

    /// `P` with its minimum and maximum removed.
    pub fn proper_part(&self) -> Option<Poset> {
        let (b, t) = self.bounds()?;
        Some(self.induced_mask(self.all() & !bit(b) & !bit(t)))
    }

    /// Maximal chains of the elements in `mask`, each as a bitmask of
    /// original indices.
    pub(crate) fn maximal_chains(&self, mask: Mask) -> Vec<Mask> {
        let mut out = Vec::new();
        let minimal = bits(mask).filter(|&i| self.down[i] & mask == 0);
        for m in minimal {
            self.extend_chain(mask, m, bit(m), &mut out);
        }
        out
    }

    fn extend_chain(&self, mask: Mask, last: usize, chain: Mask, out: &mut Vec<Mask>) {
        let above = self.up[last] & mask;
        if above == 0 {
            out.push(chain);
            return;
        }
        // Covers of `last` inside `mask`.
        for j in bits(above) {
            if above & self.down[j] == 0 {
                self.extend_chain(mask, j, chain | bit(j), out);
            }
        }
    }
}

fn find(labels: &[Label], l: &Label) -> Result<usize, PosetError> {
    labels
        .binary_search(l)
        .map_err(|_| PosetError::UnknownElement(l.to_string()))
}

/// The four classification flags of a self-map, with the first offending
/// element when a flag fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapClass {
    pub order_preserving: bool,
    pub monotone: bool,
    pub increasing: bool,
    pub decreasing: bool,
    /// First pair `x < y` (label order) whose images are not `f(x) <= f(y)`.
    pub order_violation: Option<(Label, Label)>,
    /// First element incomparable to its image.
    pub incomparable: Option<Label>,
}

fn classify_table(p: &Poset, table: &[usize]) -> MapClass {
    let mut order_violation = None;
    'outer: for x in 0..p.len() {
        for y in bits(p.up(x)) {
            if !p.le(table[x], table[y]) {
                order_violation = Some((p.label(x).clone(), p.label(y).clone()));
                break 'outer;
            }
        }
    }
    let incomparable = (0..p.len())
        .find(|&x| !p.comparable(x, table[x]))
        .map(|x| p.label(x).clone());
    let op = order_violation.is_none();
    MapClass {
        order_preserving: op,
        monotone: op && incomparable.is_none(),
        increasing: op && (0..p.len()).all(|x| p.le(x, table[x])),
        decreasing: op && (0..p.len()).all(|x| p.le(table[x], x)),
        order_violation,
        incomparable,
    }
}

/// Classifies a label-level table on `poset` (order-preserving, monotone,
/// increasing, decreasing).
pub fn classify_map<I, K, V>(poset: &Arc<Poset>, table: I) -> Result<MapClass, PosetError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    Ok(PosetMap::from_labels(poset.clone(), table)?.class().clone())
}

/// A total self-map of a poset together with its classification.
#[derive(Debug, Clone)]
pub struct PosetMap {
    poset: Arc<Poset>,
    table: Vec<usize>,
    class: MapClass,
}

impl PartialEq for PosetMap {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table
            && (Arc::ptr_eq(&self.poset, &other.poset) || self.poset == other.poset)
    }
}

impl Eq for PosetMap {}

impl PosetMap {
    /// Map given by element indices (`table[i]` is the image of element `i`).
    pub fn from_indices(poset: Arc<Poset>, table: Vec<usize>) -> Result<Self, PosetError> {
        if table.len() != poset.len() {
            let missing = poset.labels().get(table.len()).cloned();
            return Err(match missing {
                Some(l) => PosetError::NotTotal(l),
                None => PosetError::UnknownElement(format!("#{}", poset.len())),
            });
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= poset.len()) {
            return Err(PosetError::UnknownElement(format!("#{bad}")));
        }
        Ok(Self::from_valid(poset, table))
    }

    pub(crate) fn from_valid(poset: Arc<Poset>, table: Vec<usize>) -> Self {
        let class = classify_table(&poset, &table);
        PosetMap { poset, table, class }
    }

    /// Map given as `(element, image)` label pairs; must be total.
    pub fn from_labels<I, K, V>(poset: Arc<Poset>, pairs: I) -> Result<Self, PosetError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut table = vec![usize::MAX; poset.len()];
        for (k, v) in pairs {
            let i = poset.require(k.as_ref())?;
            let j = poset.require(v.as_ref())?;
            if table[i] != usize::MAX {
                return Err(PosetError::DuplicateAssignment(poset.label(i).clone()));
            }
            table[i] = j;
        }
        if let Some(i) = table.iter().position(|&t| t == usize::MAX) {
            return Err(PosetError::NotTotal(poset.label(i).clone()));
        }
        Ok(Self::from_valid(poset, table))
    }

    /// Map computed label by label.
    pub fn from_fn<F>(poset: Arc<Poset>, f: F) -> Result<Self, PosetError>
    where
        F: Fn(&str) -> String,
    {
        let pairs: Vec<(String, String)> = poset
            .labels()
            .iter()
            .map(|l| (l.to_string(), f(l.as_str())))
            .collect();
        Self::from_labels(poset, pairs)
    }

    pub fn identity(poset: Arc<Poset>) -> Self {
        let table = (0..poset.len()).collect();
        Self::from_valid(poset, table)
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn class(&self) -> &MapClass {
        &self.class
    }

    pub fn is_monotone(&self) -> bool {
        self.class.monotone
    }

    pub fn apply(&self, x: &str) -> Result<&Label, PosetError> {
        let i = self.poset.require(x)?;
        Ok(self.poset.label(self.table[i]))
    }

    /// `(element, image)` pairs in label order.
    pub fn pairs(&self) -> Vec<(Label, Label)> {
        self.table
            .iter()
            .enumerate()
            .map(|(i, &j)| (self.poset.label(i).clone(), self.poset.label(j).clone()))
            .collect()
    }

    fn same_domain(&self, other: &PosetMap) -> Result<(), PosetError> {
        if Arc::ptr_eq(&self.poset, &other.poset) || self.poset == other.poset {
            Ok(())
        } else {
            Err(PosetError::DomainMismatch)
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &PosetMap) -> Result<PosetMap, PosetError> {
        self.same_domain(inner)?;
        let table = inner.table.iter().map(|&j| self.table[j]).collect();
        Ok(Self::from_valid(self.poset.clone(), table))
    }

    /// `self^n`, with `self^0` the identity.
    pub fn power(&self, n: usize) -> PosetMap {
        let mut table: Vec<usize> = (0..self.table.len()).collect();
        for _ in 0..n {
            let next: Vec<usize> = table.iter().map(|&j| self.table[j]).collect();
            if next == table {
                break;
            }
            table = next;
        }
        Self::from_valid(self.poset.clone(), table)
    }

    /// `self^{|P|}`. The iteration stops early once the table stops
    /// changing, which gives the same table.
    pub fn stabilize(&self) -> PosetMap {
        let out = self.power(self.poset.len());
        debug_assert!(!self.class.monotone || out.class.monotone);
        out
    }

    pub(crate) fn fixed_mask(&self) -> Mask {
        self.table
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i == j)
            .fold(0, |m, (i, _)| m | bit(i))
    }

    pub(crate) fn image_mask(&self) -> Mask {
        self.table.iter().fold(0, |m, &j| m | bit(j))
    }

    pub fn fixed_points(&self) -> BTreeSet<Label> {
        self.poset.labels_of(self.fixed_mask())
    }

    pub fn image(&self) -> BTreeSet<Label> {
        self.poset.labels_of(self.image_mask())
    }

    pub(crate) fn stable_preimage_mask(&self, z: usize) -> Mask {
        let stable = self.stabilize();
        stable
            .table
            .iter()
            .enumerate()
            .filter(|&(_, &j)| j == z)
            .fold(0, |m, (i, _)| m | bit(i))
    }

    /// Elements eventually sent to `z`: `{x : self^{|P|}(x) = z}`.
    pub fn stable_preimage(&self, z: &str) -> Result<BTreeSet<Label>, PosetError> {
        let zi = self.poset.require(z)?;
        Ok(self.poset.labels_of(self.stable_preimage_mask(zi)))
    }

    /// Splits a monotone map as `increasing ∘ decreasing`, where every
    /// element is fixed by one of the two factors.
    pub fn decompose_monotone(&self) -> Result<(PosetMap, PosetMap), PosetError> {
        if let Some((a, b)) = &self.class.order_violation {
            return Err(PosetError::NotOrderPreserving(a.clone(), b.clone()));
        }
        if let Some(x) = &self.class.incomparable {
            return Err(PosetError::NotMonotone(x.clone()));
        }
        let p = &self.poset;
        let up_part = (0..p.len())
            .map(|x| if p.lt(x, self.table[x]) { self.table[x] } else { x })
            .collect();
        let down_part = (0..p.len())
            .map(|x| if p.lt(self.table[x], x) { self.table[x] } else { x })
            .collect();
        let alpha = Self::from_valid(p.clone(), up_part);
        let beta = Self::from_valid(p.clone(), down_part);
        let composed = alpha.compose(&beta)?;
        let covered = alpha.fixed_mask() | beta.fixed_mask();
        if !alpha.class.increasing
            || !beta.class.decreasing
            || composed.table != self.table
            || covered != p.all()
        {
            return Err(PosetError::DecompositionCheck);
        }
        Ok((alpha, beta))
    }
}
