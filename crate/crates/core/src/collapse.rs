//! Elementary collapses, their verification and search, and the compiler
//! from NE-certificates to explicit collapse sequences.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, bit, bits, count, is_subset, Mask};
use crate::complex::SimplicialComplex;
use crate::evasiveness::{NeCertificate, SearchBudget, Witness};
use crate::label::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CollapseError {
    #[error("({free:?}, {coface:?}) is not a free pair")]
    NotFree { free: Vec<String>, coface: Vec<String> },
    #[error("witness does not match the link it is applied to")]
    WitnessMismatch,
    #[error("certificate does not replay")]
    InvalidCertificate,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
}

/// One elementary collapse: remove the free face and its unique coface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseStep {
    pub free: Vec<Label>,
    pub coface: Vec<Label>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseSequence {
    pub steps: Vec<CollapseStep>,
}

impl CollapseSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn from_masks(x: &SimplicialComplex, steps: &[(Mask, Mask)]) -> Self {
        CollapseSequence {
            steps: steps
                .iter()
                .map(|&(t, s)| CollapseStep {
                    free: x.labels_of(t),
                    coface: x.labels_of(s),
                })
                .collect(),
        }
    }
}

pub(crate) fn is_free(x: &SimplicialComplex, tau: Mask, sigma: Mask) -> bool {
    tau != 0
        && is_subset(tau, sigma)
        && count(sigma) == count(tau) + 1
        && x.facet_masks().binary_search(&sigma).is_ok()
        && x
            .facet_masks()
            .iter()
            .all(|&f| f == sigma || !is_subset(tau, f))
}

/// Free pairs in lexicographic `(τ, σ)` order.
pub(crate) fn free_pair_masks(x: &SimplicialComplex) -> Vec<(Mask, Mask)> {
    let facets = x.facet_masks();
    let mut out = Vec::new();
    for &sigma in facets {
        if count(sigma) < 2 {
            continue;
        }
        for u in bits(sigma) {
            let tau = sigma & !bit(u);
            if facets.iter().all(|&f| f == sigma || !is_subset(tau, f)) {
                out.push((tau, sigma));
            }
        }
    }
    out.sort_unstable_by(|a, b| bits::lex_cmp(a.0, b.0).then(bits::lex_cmp(a.1, b.1)));
    out
}

/// Removes a free pair. The other boundary faces of `σ` become facets
/// unless they lie in another facet.
pub(crate) fn collapse_unchecked(x: &SimplicialComplex, tau: Mask, sigma: Mask) -> SimplicialComplex {
    let rest: Vec<Mask> = x.facet_masks().iter().copied().filter(|&f| f != sigma).collect();
    let mut facets = rest.clone();
    for w in bits(tau) {
        let face = sigma & !bit(w);
        if !rest.iter().any(|&f| is_subset(face, f)) {
            facets.push(face);
        }
    }
    facets.sort_unstable();
    SimplicialComplex::from_parts(x.universe().clone(), facets)
}

/// All pairs `(τ, σ)` where `σ` is the only face properly containing `τ`.
pub fn free_pairs(x: &SimplicialComplex) -> Vec<(Vec<Label>, Vec<Label>)> {
    free_pair_masks(x)
        .into_iter()
        .map(|(t, s)| (x.labels_of(t), x.labels_of(s)))
        .collect()
}

/// Performs the elementary collapse `(τ, σ)`.
pub fn apply_collapse<L: AsRef<str>>(
    x: &SimplicialComplex,
    free: &[L],
    coface: &[L],
) -> Result<SimplicialComplex, CollapseError> {
    let not_free = || CollapseError::NotFree {
        free: free.iter().map(|l| l.as_ref().to_string()).collect(),
        coface: coface.iter().map(|l| l.as_ref().to_string()).collect(),
    };
    let tau = x.mask_of(free).ok_or_else(not_free)?;
    let sigma = x.mask_of(coface).ok_or_else(not_free)?;
    if !is_free(x, tau, sigma) {
        return Err(not_free());
    }
    Ok(collapse_unchecked(x, tau, sigma))
}

/// Replays `seq` from `x`; true iff every step is a free pair and the end
/// state is exactly `y`.
pub fn verify_collapse(x: &SimplicialComplex, y: &SimplicialComplex, seq: &CollapseSequence) -> bool {
    let mut cur = x.clone();
    for step in &seq.steps {
        let (Some(tau), Some(sigma)) = (cur.mask_of(&step.free), cur.mask_of(&step.coface)) else {
            return false;
        };
        if !is_free(&cur, tau, sigma) {
            return false;
        }
        cur = collapse_unchecked(&cur, tau, sigma);
    }
    cur == *y
}

/// Collapses the nonevasive complex `l` to a single vertex following `w`,
/// emitting each step with `lift` added to both faces. Returns the final
/// vertex.
fn collapse_to_point(
    l: &SimplicialComplex,
    w: &Witness,
    lift: Mask,
    out: &mut Vec<(Mask, Mask)>,
) -> Result<usize, CollapseError> {
    match w {
        Witness::Point(p) => {
            let i = l.index_of(p.as_str()).ok_or(CollapseError::WitnessMismatch)?;
            if !l.is_point() {
                return Err(CollapseError::WitnessMismatch);
            }
            Ok(i)
        }
        Witness::Split { v, link, deletion } => {
            let i = l.index_of(v.as_str()).ok_or(CollapseError::WitnessMismatch)?;
            collapse_vertex(l, i, link, lift, out)?;
            let rest = l.delete_idx(i).ok_or(CollapseError::WitnessMismatch)?;
            collapse_to_point(&rest, deletion, lift, out)
        }
    }
}

/// Collapses away the open star of vertex `v` of `x`: the link collapses to
/// a point `p` (each step lifted by `v`), then `({v}, {v, p})` goes.
fn collapse_vertex(
    x: &SimplicialComplex,
    v: usize,
    w: &Witness,
    lift: Mask,
    out: &mut Vec<(Mask, Mask)>,
) -> Result<(), CollapseError> {
    let lk = x.link_idx(v).ok_or(CollapseError::WitnessMismatch)?;
    let cone = lift | bit(v);
    let p = collapse_to_point(&lk, w, cone, out)?;
    out.push((cone, cone | bit(p)));
    Ok(())
}

/// Collapse sequence realizing `x ↘ x ∖ {v}` from a witness for `lk_x v`.
pub fn witness_to_vertex_collapse(
    x: &SimplicialComplex,
    v: &str,
    w: &Witness,
) -> Result<CollapseSequence, CollapseError> {
    let i = x
        .index_of(v)
        .ok_or_else(|| CollapseError::UnknownVertex(v.to_string()))?;
    if x.vertex_count() < 2 {
        return Err(CollapseError::WitnessMismatch);
    }
    let mut steps = Vec::new();
    collapse_vertex(x, i, w, 0, &mut steps)?;
    Ok(CollapseSequence::from_masks(x, &steps))
}

/// Concatenates the vertex collapses of every removal in `cert`.
pub fn certificate_to_collapse(
    x: &SimplicialComplex,
    cert: &NeCertificate,
) -> Result<CollapseSequence, CollapseError> {
    if cert.removed.len() != cert.witnesses.len() {
        return Err(CollapseError::InvalidCertificate);
    }
    let mut steps = Vec::new();
    let mut cur = x.clone();
    for (v, w) in cert.removed.iter().zip(&cert.witnesses) {
        let i = cur
            .index_of(v.as_str())
            .ok_or(CollapseError::InvalidCertificate)?;
        if cur.vertex_count() < 2 {
            return Err(CollapseError::InvalidCertificate);
        }
        collapse_vertex(&cur, i, w, 0, &mut steps).map_err(|_| CollapseError::InvalidCertificate)?;
        cur = cur.delete_idx(i).expect("at least two vertices");
    }
    Ok(CollapseSequence::from_masks(x, &steps))
}

/// What a collapse search should end at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CollapseTarget {
    Complex(SimplicialComplex),
    /// Any single vertex.
    AnyPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CollapseSearch {
    Found(CollapseSequence),
    NotFound,
    BudgetExceeded,
}

struct CollapseDfs<'a> {
    target: Option<&'a SimplicialComplex>,
    max_nodes: u64,
    nodes: u64,
    failed: HashSet<Vec<Mask>>,
    path: Vec<(Mask, Mask)>,
}

impl CollapseDfs<'_> {
    fn done(&self, cur: &SimplicialComplex) -> bool {
        match self.target {
            Some(y) => cur.facet_masks() == y.facet_masks(),
            None => cur.is_point(),
        }
    }

    fn run(&mut self, cur: &SimplicialComplex) -> Option<bool> {
        if self.done(cur) {
            return Some(true);
        }
        if self.failed.contains(cur.facet_masks()) {
            return Some(false);
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return None;
        }
        for (tau, sigma) in free_pair_masks(cur) {
            if self.target.is_some_and(|y| y.contains_face_mask(tau)) {
                continue;
            }
            let next = collapse_unchecked(cur, tau, sigma);
            self.path.push((tau, sigma));
            if self.run(&next)? {
                return Some(true);
            }
            self.path.pop();
        }
        self.failed.insert(cur.facet_masks().to_vec());
        Some(false)
    }
}

/// Depth-first search over free pairs (lexicographic order), skipping
/// states already known to fail. Faces of the target are never removed.
pub fn search_collapse(
    x: &SimplicialComplex,
    target: &CollapseTarget,
    budget: SearchBudget,
) -> CollapseSearch {
    if x.vertex_count() > budget.max_vertices {
        return CollapseSearch::BudgetExceeded;
    }
    let y = match target {
        CollapseTarget::Complex(y) => match y.reindexed(x.universe()) {
            Some(y) if y.is_subcomplex_of(x) => Some(y),
            _ => return CollapseSearch::NotFound,
        },
        CollapseTarget::AnyPoint => None,
    };
    let mut dfs = CollapseDfs {
        target: y.as_ref(),
        max_nodes: budget.max_nodes,
        nodes: 0,
        failed: HashSet::new(),
        path: Vec::new(),
    };
    match dfs.run(x) {
        Some(true) => CollapseSearch::Found(CollapseSequence::from_masks(x, &dfs.path)),
        Some(false) => CollapseSearch::NotFound,
        None => CollapseSearch::BudgetExceeded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evasiveness::{cone_witness, is_nonevasive, Nonevasiveness};

    fn cx(facets: &[&[&str]]) -> SimplicialComplex {
        SimplicialComplex::from_facets(facets.iter().map(|f| f.iter().copied())).unwrap()
    }

    fn labels(v: &[&str]) -> Vec<Label> {
        v.iter().map(|&s| Label::from(s)).collect()
    }

    fn boundary_triangle() -> SimplicialComplex {
        cx(&[&["a", "b"], &["b", "c"], &["a", "c"]])
    }

    #[test]
    fn free_pairs_examples() {
        let edge = cx(&[&["a", "b"]]);
        assert_eq!(
            free_pairs(&edge),
            vec![
                (labels(&["a"]), labels(&["a", "b"])),
                (labels(&["b"]), labels(&["a", "b"]))
            ]
        );
        assert!(free_pairs(&boundary_triangle()).is_empty());
        let s = cx(&[&["a", "b", "c"]]);
        let pairs = free_pairs(&s);
        assert_eq!(pairs.len(), 3);
        assert!(pairs.contains(&(labels(&["a", "b"]), labels(&["a", "b", "c"]))));
        assert!(free_pairs(&SimplicialComplex::point("a")).is_empty());
    }

    #[test]
    fn apply_examples() {
        let edge = cx(&[&["a", "b"]]);
        assert_eq!(
            apply_collapse(&edge, &["b"], &["a", "b"]).unwrap(),
            SimplicialComplex::point("a")
        );
        let s = cx(&[&["a", "b", "c"]]);
        assert_eq!(
            apply_collapse(&s, &["b", "c"], &["a", "b", "c"]).unwrap(),
            cx(&[&["a", "b"], &["a", "c"]])
        );
        assert!(matches!(
            apply_collapse(&boundary_triangle(), &["a"], &["a", "b"]),
            Err(CollapseError::NotFree { .. })
        ));
        // A collapse inside a larger complex keeps faces shared with other facets.
        let two = cx(&[&["a", "b", "c"], &["b", "c", "d"]]);
        assert_eq!(
            apply_collapse(&two, &["a", "b"], &["a", "b", "c"]).unwrap(),
            cx(&[&["a", "c"], &["b", "c", "d"]])
        );
    }

    #[test]
    fn verify_examples() {
        let s = cx(&[&["a", "b", "c"]]);
        assert!(verify_collapse(&s, &s, &CollapseSequence::default()));
        let edge = cx(&[&["a", "b"]]);
        let one = CollapseSequence {
            steps: vec![CollapseStep {
                free: labels(&["b"]),
                coface: labels(&["a", "b"]),
            }],
        };
        assert!(verify_collapse(&edge, &SimplicialComplex::point("a"), &one));
        assert!(!verify_collapse(&edge, &SimplicialComplex::point("b"), &one));
        let bt = boundary_triangle();
        let attempt = CollapseSequence {
            steps: vec![CollapseStep {
                free: labels(&["a"]),
                coface: labels(&["a", "b"]),
            }],
        };
        assert!(!verify_collapse(&bt, &SimplicialComplex::point("c"), &attempt));
    }

    #[test]
    fn vertex_collapse_examples() {
        let s = cx(&[&["a", "b", "c"]]);
        let link = s.link("a").unwrap().unwrap();
        let w = cone_witness(&link).unwrap();
        let seq = witness_to_vertex_collapse(&s, "a", &w).unwrap();
        assert_eq!(seq.len(), 2);
        assert!(verify_collapse(&s, &cx(&[&["b", "c"]]), &seq));

        let edge = cx(&[&["a", "b"]]);
        let seq = witness_to_vertex_collapse(&edge, "a", &Witness::Point("b".into())).unwrap();
        assert_eq!(
            seq.steps,
            vec![CollapseStep {
                free: labels(&["a"]),
                coface: labels(&["a", "b"])
            }]
        );

        let square = cx(&[&["a", "b"], &["b", "c"], &["c", "d"], &["d", "a"]]);
        let cone = SimplicialComplex::point("p").join(&square).unwrap();
        let link = cone.link("a").unwrap().unwrap();
        let Nonevasiveness::Nonevasive(w) = is_nonevasive(&link, SearchBudget::default()) else {
            panic!("link of a cone vertex is a cone")
        };
        let seq = witness_to_vertex_collapse(&cone, "a", &w).unwrap();
        assert!(verify_collapse(&cone, &cone.delete_vertex("a").unwrap(), &seq));

        assert_eq!(
            witness_to_vertex_collapse(&edge, "a", &Witness::Point("a".into())),
            Err(CollapseError::WitnessMismatch)
        );
    }

    #[test]
    fn certificate_compilation_counts_faces() {
        let s = cx(&[&["a", "b", "c"]]);
        let point = SimplicialComplex::point("c");
        let cert = NeCertificate {
            removed: labels(&["a", "b"]),
            witnesses: vec![
                cone_witness(&cx(&[&["b", "c"]])).unwrap(),
                Witness::Point("c".into()),
            ],
        };
        let seq = certificate_to_collapse(&s, &cert).unwrap();
        assert_eq!(seq.len(), 3);
        assert!(verify_collapse(&s, &point, &seq));
        assert!(certificate_to_collapse(&s, &NeCertificate::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn search_examples() {
        let s = cx(&[&["a", "b", "c"]]);
        let CollapseSearch::Found(seq) = search_collapse(&s, &CollapseTarget::AnyPoint, SearchBudget::default())
        else {
            panic!()
        };
        assert_eq!(seq.len(), 3);
        assert_eq!(
            search_collapse(&boundary_triangle(), &CollapseTarget::AnyPoint, SearchBudget::default()),
            CollapseSearch::NotFound
        );
        let target = CollapseTarget::Complex(SimplicialComplex::point("b"));
        let CollapseSearch::Found(seq) = search_collapse(&s, &target, SearchBudget::default()) else {
            panic!()
        };
        assert!(verify_collapse(&s, &SimplicialComplex::point("b"), &seq));
    }
}
