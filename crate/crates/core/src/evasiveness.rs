//! Nonevasiveness witnesses and NE-reduction certificates.
//!
//! A complex is nonevasive when it is a point, or some vertex has both a
//! nonevasive link and a nonevasive deletion. A [`Witness`] records the
//! chosen vertices recursively; an [`NeCertificate`] removes vertices one at
//! a time, carrying a witness for the link of each removed vertex.
//! Evasiveness itself has no certificate: [`Nonevasiveness::Evasive`] is the
//! outcome of an exhaustive search.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, bit, bits, Mask};
use crate::complex::{ComplexError, Homology, SimplicialComplex};
use crate::label::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvasivenessError {
    #[error("budget limits must be positive")]
    InvalidBudget,
    #[error("target is not a subcomplex of the source")]
    NotSubcomplex,
    #[error("witness does not verify against its complex")]
    InvalidWitness,
    #[error("certificate does not verify")]
    InvalidCertificate,
    #[error("vertex `{0}` is shared between complexes that must be disjoint")]
    SharedVertex(Label),
    #[error("expansion produced a certificate that failed replay")]
    ExpansionCheck,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Recursive proof that a complex is nonevasive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    /// The complex is this single vertex.
    Point(Label),
    /// `v` has a nonevasive link and a nonevasive deletion.
    Split {
        v: Label,
        link: Box<Witness>,
        deletion: Box<Witness>,
    },
}

impl Witness {
    pub fn split(v: Label, link: Witness, deletion: Witness) -> Self {
        Witness::Split {
            v,
            link: Box::new(link),
            deletion: Box::new(deletion),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Witness::Point(_) => 1,
            Witness::Split { link, deletion, .. } => 1 + link.size() + deletion.size(),
        }
    }
}

/// Vertex removals `X = A_1 ⊃ A_2 ⊃ ... ⊃ A_t = Y`, each with a witness for
/// the link of the removed vertex at that step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeCertificate {
    pub removed: Vec<Label>,
    pub witnesses: Vec<Witness>,
}

impl NeCertificate {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: NeCertificate) -> NeCertificate {
        self.removed.extend(next.removed);
        self.witnesses.extend(next.witnesses);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Inputs with more vertices are not searched.
    pub max_vertices: usize,
    /// Recursion nodes expanded before giving up.
    pub max_nodes: u64,
}

impl SearchBudget {
    pub fn new(max_vertices: usize, max_nodes: u64) -> Result<Self, EvasivenessError> {
        if max_vertices == 0 || max_nodes == 0 {
            return Err(EvasivenessError::InvalidBudget);
        }
        Ok(SearchBudget {
            max_vertices,
            max_nodes,
        })
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_vertices: 16,
            max_nodes: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nonevasiveness {
    Nonevasive(Witness),
    Evasive,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionSearch {
    Found(NeCertificate),
    NotFound,
    BudgetExceeded,
}

struct Exceeded;

/// Memoized nonevasiveness search over complexes sharing one universe.
pub(crate) struct Searcher {
    max_nodes: u64,
    nodes: u64,
    memo: HashMap<Vec<Mask>, Option<Witness>>,
}

impl Searcher {
    pub(crate) fn new(budget: SearchBudget) -> Self {
        Searcher {
            max_nodes: budget.max_nodes,
            nodes: 0,
            memo: HashMap::new(),
        }
    }

    fn tick(&mut self) -> Result<(), Exceeded> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            Err(Exceeded)
        } else {
            Ok(())
        }
    }

    fn decide(&mut self, x: &SimplicialComplex) -> Result<Option<Witness>, Exceeded> {
        if x.is_point() {
            return Ok(Some(Witness::Point(x.vertices().remove(0))));
        }
        if let Some(hit) = self.memo.get(x.facet_masks()) {
            return Ok(hit.clone());
        }
        self.tick()?;
        let found = match x.apex_idx() {
            Some(apex) => Some(cone_witness_at(x, apex)),
            None => self.split_search(x)?,
        };
        self.memo.insert(x.facet_masks().to_vec(), found.clone());
        Ok(found)
    }

    fn split_search(&mut self, x: &SimplicialComplex) -> Result<Option<Witness>, Exceeded> {
        for v in bits(x.vertex_mask()) {
            let Some(lk) = x.link_idx(v) else { continue };
            let Some(wl) = self.decide(&lk)? else { continue };
            let del = x.delete_idx(v).expect("at least two vertices");
            if let Some(wd) = self.decide(&del)? {
                return Ok(Some(Witness::split(x.universe()[v].clone(), wl, wd)));
            }
        }
        Ok(None)
    }
}

/// Decides whether `x` is nonevasive, returning a witness when it is.
/// Vertices are tried in label order; cones short-circuit to
/// [`cone_witness`].
pub fn is_nonevasive(x: &SimplicialComplex, budget: SearchBudget) -> Nonevasiveness {
    if x.vertex_count() > budget.max_vertices {
        return Nonevasiveness::BudgetExceeded;
    }
    match Searcher::new(budget).decide(x) {
        Ok(Some(w)) => Nonevasiveness::Nonevasive(w),
        Ok(None) => Nonevasiveness::Evasive,
        Err(Exceeded) => Nonevasiveness::BudgetExceeded,
    }
}

fn cone_witness_at(x: &SimplicialComplex, apex: usize) -> Witness {
    let rest = x.vertex_mask() & !bit(apex);
    match bits::lowest(rest) {
        None => Witness::Point(x.universe()[apex].clone()),
        Some(v) => {
            let lk = x.link_idx(v).expect("shares a facet with the apex");
            let del = x.delete_idx(v).expect("apex remains");
            Witness::split(
                x.universe()[v].clone(),
                cone_witness_at(&lk, apex),
                cone_witness_at(&del, apex),
            )
        }
    }
}

/// Witness for a cone: removes the non-apex vertices in label order.
pub fn cone_witness(x: &SimplicialComplex) -> Option<Witness> {
    x.apex_idx().map(|apex| cone_witness_at(x, apex))
}

/// Witness for the cone `apex * y` (just the point when `y` is void),
/// built from `y` alone.
pub(crate) fn cone_over(y: Option<&SimplicialComplex>, apex: &Label) -> Witness {
    let Some(y) = y else {
        return Witness::Point(apex.clone());
    };
    let v = bits::lowest(y.vertex_mask()).expect("complex has a vertex");
    Witness::split(
        y.universe()[v].clone(),
        cone_over(y.link_idx(v).as_ref(), apex),
        cone_over(y.delete_idx(v).as_ref(), apex),
    )
}

/// Replays `w` against `x`, recomputing every link and deletion.
pub fn verify_witness(x: &SimplicialComplex, w: &Witness) -> bool {
    match w {
        Witness::Point(p) => x.is_point() && x.index_of(p.as_str()).is_some(),
        Witness::Split { v, link, deletion } => {
            if x.vertex_count() < 2 {
                return false;
            }
            let Some(i) = x.index_of(v.as_str()) else {
                return false;
            };
            let Some(lk) = x.link_idx(i) else {
                return false;
            };
            let del = x.delete_idx(i).expect("at least two vertices");
            verify_witness(&lk, link) && verify_witness(&del, deletion)
        }
    }
}

/// Replays the removals of `cert` from `x` and checks that each step's link
/// witness verifies and that the end state is exactly `y`.
pub fn verify_ne_certificate(x: &SimplicialComplex, y: &SimplicialComplex, cert: &NeCertificate) -> bool {
    if cert.removed.len() != cert.witnesses.len() {
        return false;
    }
    let mut cur = x.clone();
    for (v, w) in cert.removed.iter().zip(&cert.witnesses) {
        let Some(i) = cur.index_of(v.as_str()) else {
            return false;
        };
        if cur.vertex_count() < 2 {
            return false;
        }
        let Some(lk) = cur.link_idx(i) else {
            return false;
        };
        if !verify_witness(&lk, w) {
            return false;
        }
        cur = cur.delete_idx(i).expect("at least two vertices");
    }
    cur == *y
}

/// Depth-first search for `x ↘NE y` over removal orders of `V(x) ∖ V(y)`.
/// Reductions only ever reach induced subcomplexes, so any other
/// subcomplex of `x` is reported as `NotFound` without searching.
pub fn search_ne_reduction(
    x: &SimplicialComplex,
    y: &SimplicialComplex,
    budget: SearchBudget,
) -> Result<ReductionSearch, EvasivenessError> {
    if !y.is_subcomplex_of(x) {
        return Err(EvasivenessError::NotSubcomplex);
    }
    let target = x.mask_of(&y.vertices()).expect("vertices of a subcomplex");
    if x.induced_mask(target).as_ref() != Some(y) {
        return Ok(ReductionSearch::NotFound);
    }
    if x.vertex_count() > budget.max_vertices {
        return Ok(ReductionSearch::BudgetExceeded);
    }
    let mut search = ReductionDfs {
        searcher: Searcher::new(budget),
        target,
        failed: HashSet::new(),
        removed: Vec::new(),
        witnesses: Vec::new(),
    };
    Ok(match search.run(x) {
        Ok(true) => ReductionSearch::Found(NeCertificate {
            removed: search.removed,
            witnesses: search.witnesses,
        }),
        Ok(false) => ReductionSearch::NotFound,
        Err(Exceeded) => ReductionSearch::BudgetExceeded,
    })
}

struct ReductionDfs {
    searcher: Searcher,
    target: Mask,
    failed: HashSet<Mask>,
    removed: Vec<Label>,
    witnesses: Vec<Witness>,
}

impl ReductionDfs {
    fn run(&mut self, cur: &SimplicialComplex) -> Result<bool, Exceeded> {
        if cur.vertex_mask() == self.target {
            return Ok(true);
        }
        if self.failed.contains(&cur.vertex_mask()) {
            return Ok(false);
        }
        self.searcher.tick()?;
        for v in bits(cur.vertex_mask() & !self.target) {
            let Some(lk) = cur.link_idx(v) else { continue };
            let Some(w) = self.searcher.decide(&lk)? else {
                continue;
            };
            let next = cur.delete_idx(v).expect("target vertices remain");
            self.removed.push(cur.universe()[v].clone());
            self.witnesses.push(w);
            if self.run(&next)? {
                return Ok(true);
            }
            self.removed.pop();
            self.witnesses.pop();
        }
        self.failed.insert(cur.vertex_mask());
        Ok(false)
    }
}

pub(crate) fn join_witness_unchecked(w: &Witness, y: &SimplicialComplex) -> Witness {
    match w {
        Witness::Point(p) => cone_over(Some(y), p),
        Witness::Split { v, link, deletion } => Witness::split(
            v.clone(),
            join_witness_unchecked(link, y),
            join_witness_unchecked(deletion, y),
        ),
    }
}

fn check_disjoint(x: &SimplicialComplex, y: &SimplicialComplex) -> Result<(), EvasivenessError> {
    match y.vertices().into_iter().find(|l| x.index_of(l.as_str()).is_some()) {
        Some(shared) => Err(EvasivenessError::SharedVertex(shared)),
        None => Ok(()),
    }
}

/// Turns a witness for `x` into one for `x * y`: splits stay splits
/// (`lk_{X*Y} v = (lk_X v) * Y`), and each point leaf becomes a cone
/// witness over `y`.
pub fn join_witness(
    x: &SimplicialComplex,
    w: &Witness,
    y: &SimplicialComplex,
) -> Result<Witness, EvasivenessError> {
    check_disjoint(x, y)?;
    if !verify_witness(x, w) {
        return Err(EvasivenessError::InvalidWitness);
    }
    Ok(join_witness_unchecked(w, y))
}

/// Lifts `x1 ↘NE x2` to `x1 * y ↘NE x2 * y` with the same removal order.
pub fn lift_certificate_over_join(
    x1: &SimplicialComplex,
    x2: &SimplicialComplex,
    cert: &NeCertificate,
    y: &SimplicialComplex,
) -> Result<NeCertificate, EvasivenessError> {
    check_disjoint(x1, y)?;
    if !verify_ne_certificate(x1, x2, cert) {
        return Err(EvasivenessError::InvalidCertificate);
    }
    let lifted = NeCertificate {
        removed: cert.removed.clone(),
        witnesses: cert
            .witnesses
            .iter()
            .map(|w| join_witness_unchecked(w, y))
            .collect(),
    };
    if !verify_ne_certificate(&x1.join(y)?, &x2.join(y)?, &lifted) {
        return Err(EvasivenessError::InvalidCertificate);
    }
    Ok(lifted)
}

/// A complex `D` with `A ↗NE D ↘NE C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonExpansion {
    pub complex: SimplicialComplex,
    /// `D ↘NE A`, removing `V(C) ∖ V(B)`.
    pub to_a: NeCertificate,
    /// `D ↘NE C`, removing `V(A) ∖ V(B)`.
    pub to_c: NeCertificate,
}

/// Merges the zigzag `A ↘NE B ↗NE C` into `A ↗NE D ↘NE C` by attaching the
/// vertices of `C ∖ B` to `A` exactly as they attach to `B`. The links of
/// the vertices on either side are unchanged in `D`, so both input
/// certificates are reused verbatim.
pub fn common_expansion(
    a: &SimplicialComplex,
    b: &SimplicialComplex,
    c: &SimplicialComplex,
    cert_ab: &NeCertificate,
    cert_cb: &NeCertificate,
) -> Result<CommonExpansion, EvasivenessError> {
    if !verify_ne_certificate(a, b, cert_ab) || !verify_ne_certificate(c, b, cert_cb) {
        return Err(EvasivenessError::InvalidCertificate);
    }
    let in_b = |l: &Label| b.index_of(l.as_str()).is_some();
    for s in a.vertices().into_iter().filter(|l| !in_b(l)) {
        if c.index_of(s.as_str()).is_some() {
            return Err(EvasivenessError::SharedVertex(s));
        }
    }
    let complex = SimplicialComplex::from_facets(a.facets().into_iter().chain(c.facets()))?;
    let expansion = CommonExpansion {
        complex,
        to_a: cert_cb.clone(),
        to_c: cert_ab.clone(),
    };
    if !verify_ne_certificate(&expansion.complex, a, &expansion.to_a)
        || !verify_ne_certificate(&expansion.complex, c, &expansion.to_c)
    {
        return Err(EvasivenessError::ExpansionCheck);
    }
    Ok(expansion)
}

/// How two family members were shown NE-equivalent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "via")]
pub enum Evidence {
    /// `from ↘NE to`.
    Reduction { from: usize, to: usize, certificate: NeCertificate },
    /// Both reduce to the common induced subcomplex on their shared
    /// vertices; the zigzag is merged into a common expansion.
    CommonExpansion {
        facets: Vec<Vec<Label>>,
        to_first: NeCertificate,
        to_second: NeCertificate,
    },
    /// Both are nonevasive, hence each NE-reduces to a point, and any two
    /// points span an edge that NE-reduces to either end.
    BothNonevasive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum PairStatus {
    Equivalent(Evidence),
    /// GF(2) homology differs, so no zigzag can exist.
    HomologyObstructed,
    /// Every search finished without finding a connection.
    NotShown,
    /// Some search ran out of budget.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairResult {
    pub first: usize,
    pub second: usize,
    #[serde(flatten)]
    pub status: PairStatus,
}

/// Connected components of the "shown equivalent" graph over a family.
/// Separate classes are not claimed to be inequivalent unless a pair is
/// marked [`PairStatus::HomologyObstructed`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeClassification {
    pub classes: Vec<Vec<usize>>,
    pub pairs: Vec<PairResult>,
}

fn try_reduce(
    x: &SimplicialComplex,
    y: &SimplicialComplex,
    budget: SearchBudget,
    undecided: &mut bool,
) -> Option<NeCertificate> {
    if !y.vertices().iter().all(|l| x.index_of(l.as_str()).is_some()) {
        return None;
    }
    match search_ne_reduction(x, y, budget) {
        Ok(ReductionSearch::Found(c)) => Some(c),
        Ok(ReductionSearch::BudgetExceeded) => {
            *undecided = true;
            None
        }
        _ => None,
    }
}

fn compare_pair(
    family: &[SimplicialComplex],
    i: usize,
    j: usize,
    nonevasive: &[Nonevasiveness],
    homology: &[Homology],
    budget: SearchBudget,
) -> PairStatus {
    let (x, y) = (&family[i], &family[j]);
    let mut undecided = false;
    if let Some(certificate) = try_reduce(x, y, budget, &mut undecided) {
        return PairStatus::Equivalent(Evidence::Reduction { from: i, to: j, certificate });
    }
    if let Some(certificate) = try_reduce(y, x, budget, &mut undecided) {
        return PairStatus::Equivalent(Evidence::Reduction { from: j, to: i, certificate });
    }
    let shared: Vec<Label> = x
        .vertices()
        .into_iter()
        .filter(|l| y.index_of(l.as_str()).is_some())
        .collect();
    if let (Some(bx), Some(by)) = (x.induced(&shared), y.induced(&shared)) {
        if bx == by {
            let to_x = try_reduce(x, &bx, budget, &mut undecided);
            let to_y = try_reduce(y, &by, budget, &mut undecided);
            if let (Some(cx), Some(cy)) = (to_x, to_y) {
                if let Ok(d) = common_expansion(x, &bx, y, &cx, &cy) {
                    return PairStatus::Equivalent(Evidence::CommonExpansion {
                        facets: d.complex.facets(),
                        to_first: d.to_a,
                        to_second: d.to_c,
                    });
                }
            }
        }
    }
    if matches!(nonevasive[i], Nonevasiveness::Nonevasive(_))
        && matches!(nonevasive[j], Nonevasiveness::Nonevasive(_))
    {
        return PairStatus::Equivalent(Evidence::BothNonevasive);
    }
    if homology[i].betti != homology[j].betti {
        return PairStatus::HomologyObstructed;
    }
    if undecided
        || nonevasive[i] == Nonevasiveness::BudgetExceeded
        || nonevasive[j] == Nonevasiveness::BudgetExceeded
    {
        PairStatus::Undecided
    } else {
        PairStatus::NotShown
    }
}

/// Groups a small family into classes that were shown NE-equivalent by
/// direct reduction, a merged common reduct, or joint nonevasiveness.
pub fn classify_ne_equivalence(family: &[SimplicialComplex], budget: SearchBudget) -> NeClassification {
    let nonevasive: Vec<Nonevasiveness> = family.iter().map(|x| is_nonevasive(x, budget)).collect();
    let homology: Vec<Homology> = family.iter().map(SimplicialComplex::homology).collect();
    let mut parent: Vec<usize> = (0..family.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut pairs = Vec::new();
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let status = compare_pair(family, i, j, &nonevasive, &homology, budget);
            if matches!(status, PairStatus::Equivalent(_)) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
            pairs.push(PairResult {
                first: i,
                second: j,
                status,
            });
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..family.len() {
        let r = root(&mut parent, i);
        let k = *slot.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[k].push(i);
    }
    NeClassification { classes, pairs }
}
