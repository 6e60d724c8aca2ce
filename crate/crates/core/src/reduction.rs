//! NE-reductions of order complexes along monotone maps.
//!
//! For a monotone `φ` and `x` with `φ(x) < x`, the complex `Δ(P_{<x})` is
//! nonevasive: the elements of `P_{<x} ∖ P_{≤φ(x)}` are stripped top-down
//! (each has a nonevasive lower interval by the same argument), leaving the
//! cone `Δ(P_{≤φ(x)})`. The case `φ(x) > x` is the same argument in the
//! dual order. Since `lk_{Δ(P)} x = Δ(P_{<x}) * Δ(P_{>x})`, every element
//! moved by `φ` can be removed from `Δ(P)` with a nonevasive link, which is
//! how [`theorem_reduce`] walks `Δ(P)` down to `Δ(Q)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{self, bit, bits, has, is_subset, Mask};
use crate::collapse::{certificate_to_collapse, verify_collapse, CollapseError, CollapseSequence};
use crate::complex::SimplicialComplex;
use crate::evasiveness::{cone_over, join_witness_unchecked, verify_ne_certificate, NeCertificate, Witness};
use crate::label::Label;
use crate::poset::{Poset, PosetError, PosetMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("`{0}` is a fixed point of the map")]
    FixedElement(Label),
    #[error("fixed point `{0}` is missing from the target subset")]
    FixedPointOutside(Label),
    #[error("produced certificate failed verification")]
    CertificateRejected,
    #[error("compiled collapse failed verification")]
    CollapseRejected,
    #[error(transparent)]
    Collapse(#[from] CollapseError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Also compile the certificate into an explicit collapse sequence.
    pub emit_collapse: bool,
}

/// Outcome of reducing `Δ(P)` to `Δ(Q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    /// The stabilized map whose restrictions drive every step.
    pub gamma: PosetMap,
    /// `Q`, in label order.
    pub target: Vec<Label>,
    /// Elements of `P ∖ Q` in removal order.
    pub removal_order: Vec<Label>,
    pub certificate: NeCertificate,
    pub collapse: Option<CollapseSequence>,
}

/// The strict order of a poset, possibly read upside down.
#[derive(Clone, Copy)]
struct OrderView<'a> {
    up: &'a [Mask],
    down: &'a [Mask],
}

impl<'a> OrderView<'a> {
    fn of(p: &'a Poset) -> Self {
        OrderView {
            up: p.up_table(),
            down: p.down_table(),
        }
    }

    fn dual(self) -> Self {
        OrderView {
            up: self.down,
            down: self.up,
        }
    }
}

struct Ctx<'a> {
    poset: &'a Poset,
    universe: &'a Arc<[Label]>,
    map: &'a [usize],
}

impl Ctx<'_> {
    fn order_complex(&self, mask: Mask) -> Option<SimplicialComplex> {
        SimplicialComplex::order_complex_on(self.poset, self.universe, mask)
    }

    fn label(&self, i: usize) -> Label {
        self.poset.label(i).clone()
    }

    /// Witness for `Δ(P_{<x} ∩ active)` when `map(x) < x` in `view`. Only
    /// elements below `x` are consulted.
    fn below_witness(&self, view: OrderView<'_>, active: Mask, x: usize) -> Witness {
        let fx = self.map[x];
        debug_assert!(has(view.down[x], fx));
        let lower = view.down[x] & active;
        let cone = (view.down[fx] | bit(fx)) & active;
        // Decreasing linear extension of lower ∖ cone: maximal first, least
        // label among ties.
        let mut rest = lower & !cone;
        let mut order = Vec::with_capacity(bits::count(rest));
        while rest != 0 {
            let top = bits(rest)
                .find(|&i| view.up[i] & rest == 0)
                .expect("finite poset has a maximal element");
            order.push(top);
            rest &= !bit(top);
        }
        let base = self.order_complex(view.down[fx] & active);
        let mut w = cone_over(base.as_ref(), &self.label(fx));
        for &a in order.iter().rev() {
            let link = self.below_witness(view, active, a);
            w = Witness::split(self.label(a), link, w);
        }
        w
    }

    /// Witness for `lk x = Δ(P_{<x}) * Δ(P_{>x})` inside `Δ(active)`.
    fn interval_witness(&self, active: Mask, x: usize) -> Witness {
        let view = OrderView::of(self.poset);
        let (near, far) = if has(view.down[x], self.map[x]) {
            (view, view.up[x] & active)
        } else {
            (view.dual(), view.down[x] & active)
        };
        let w = self.below_witness(near, active, x);
        match self.order_complex(far) {
            None => w,
            Some(other) => join_witness_unchecked(&w, &other),
        }
    }
}

fn check_monotone(phi: &PosetMap) -> Result<(), ReductionError> {
    let class = phi.class();
    if let Some((a, b)) = &class.order_violation {
        return Err(PosetError::NotOrderPreserving(a.clone(), b.clone()).into());
    }
    if let Some(x) = &class.incomparable {
        return Err(PosetError::NotMonotone(x.clone()).into());
    }
    Ok(())
}

/// Nonevasiveness witness for `lk_{Δ(P)} x = Δ(P_{<x}) * Δ(P_{>x})`, for a
/// monotone `φ` moving `x`. Returns the link together with the witness.
pub fn interval_witness(
    phi: &PosetMap,
    x: &str,
) -> Result<(SimplicialComplex, Witness), ReductionError> {
    check_monotone(phi)?;
    let p = phi.poset();
    let xi = p.require(x)?;
    if phi.table()[xi] == xi {
        return Err(ReductionError::FixedElement(p.label(xi).clone()));
    }
    let universe: Arc<[Label]> = p.labels().to_vec().into();
    let ctx = Ctx {
        poset: p,
        universe: &universe,
        map: phi.table(),
    };
    let w = ctx.interval_witness(p.all(), xi);
    let below = ctx.order_complex(p.down(xi));
    let above = ctx.order_complex(p.up(xi));
    let link = match (below, above) {
        (Some(b), Some(a)) => b.join(&a).expect("disjoint intervals"),
        (Some(b), None) => b,
        (None, Some(a)) => a,
        (None, None) => unreachable!("x is comparable to its image"),
    };
    Ok((link, w))
}

/// Certificate for `Δ(P) ↘NE Δ(Q)` where `φ` is monotone and
/// `Fix φ ⊆ Q ⊆ P`. Elements of `P ∖ Q` are removed in label order; each
/// step uses the stabilized map restricted to what is left, which stays a
/// monotone self-map because its image is `Fix φ ⊆ Q`.
pub fn theorem_reduce<I, L>(
    phi: &PosetMap,
    subset: I,
    options: ReduceOptions,
) -> Result<ReductionReport, ReductionError>
where
    I: IntoIterator<Item = L>,
    L: AsRef<str>,
{
    check_monotone(phi)?;
    let p = phi.poset();
    let q = p.mask_of(subset)?;
    reduce_mask(phi, q, options)
}

/// `theorem_reduce` with `Q = φ(P)`.
pub fn reduce_to_image(phi: &PosetMap, options: ReduceOptions) -> Result<ReductionReport, ReductionError> {
    check_monotone(phi)?;
    reduce_mask(phi, phi.image_mask(), options)
}

pub(crate) fn reduce_mask(phi: &PosetMap, q: Mask, options: ReduceOptions) -> Result<ReductionReport, ReductionError> {
    let p = phi.poset();
    if let Some(missing) = bits::lowest(phi.fixed_mask() & !q) {
        return Err(ReductionError::FixedPointOutside(p.label(missing).clone()));
    }
    let gamma = phi.stabilize();
    // Every value of the stabilized map is a fixed point, hence in Q, so no
    // removed element is ever an image.
    debug_assert!(is_subset(gamma.image_mask(), q));
    let universe: Arc<[Label]> = p.labels().to_vec().into();
    let ctx = Ctx {
        poset: p,
        universe: &universe,
        map: gamma.table(),
    };
    let mut active = p.all();
    let mut certificate = NeCertificate::default();
    for x in bits(p.all() & !q) {
        certificate.removed.push(ctx.label(x));
        certificate.witnesses.push(ctx.interval_witness(active, x));
        active &= !bit(x);
    }
    let source = ctx.order_complex(p.all()).expect("nonempty poset");
    let target = ctx.order_complex(q).expect("Q contains the fixed points");
    if !verify_ne_certificate(&source, &target, &certificate) {
        return Err(ReductionError::CertificateRejected);
    }
    let collapse = if options.emit_collapse {
        let seq = certificate_to_collapse(&source, &certificate)?;
        if !verify_collapse(&source, &target, &seq) {
            return Err(ReductionError::CollapseRejected);
        }
        Some(seq)
    } else {
        None
    };
    let target = bits(q).map(|i| ctx.label(i)).collect();
    Ok(ReductionReport {
        gamma,
        target,
        removal_order: certificate.removed.clone(),
        certificate,
        collapse,
    })
}

impl ReductionReport {
    pub fn target_set(&self) -> BTreeSet<Label> {
        self.target.iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evasiveness::{search_ne_reduction, verify_witness, ReductionSearch, SearchBudget};

    fn b2() -> Arc<Poset> {
        Arc::new(Poset::boolean_lattice(2).unwrap())
    }

    fn closure(p: &Arc<Poset>) -> PosetMap {
        PosetMap::from_fn(p.clone(), |s| match s {
            "{}" | "{2}" => "{2}".into(),
            _ => "{1,2}".into(),
        })
        .unwrap()
    }

    fn strs(v: &[Label]) -> Vec<&str> {
        v.iter().map(Label::as_str).collect()
    }

    #[test]
    fn interval_witness_on_b2_bottom() {
        let p = b2();
        let (link, w) = interval_witness(&closure(&p), "{}").unwrap();
        assert_eq!(link.is_cone().unwrap().as_str(), "{1,2}");
        assert!(verify_witness(&link, &w));
    }

    #[test]
    fn interval_witness_on_chain() {
        let p = Arc::new(Poset::chain(&["a", "b", "c"]).unwrap());
        let phi = PosetMap::from_labels(p, [("a", "a"), ("b", "a"), ("c", "c")]).unwrap();
        let (link, w) = interval_witness(&phi, "b").unwrap();
        assert_eq!(link, SimplicialComplex::simplex(["a", "c"]).unwrap());
        assert!(verify_witness(&link, &w));
        assert_eq!(
            interval_witness(&phi, "a"),
            Err(ReductionError::FixedElement("a".into()))
        );
    }

    #[test]
    fn interval_witness_with_recursive_strip() {
        // b < x, y < x, m < b, y; φ(x) = m requires stripping b and y
        // (each with φ below it) before reaching the cone on {m}.
        let p = Arc::new(
            Poset::new(
                ["m", "b", "y", "x", "t"],
                [("m", "b"), ("m", "y"), ("b", "x"), ("y", "x"), ("x", "t")],
            )
            .unwrap(),
        );
        let phi = PosetMap::from_labels(
            p,
            [("m", "m"), ("b", "m"), ("y", "m"), ("x", "m"), ("t", "t")],
        )
        .unwrap();
        assert!(phi.is_monotone());
        let (link, w) = interval_witness(&phi, "x").unwrap();
        assert!(verify_witness(&link, &w));
        // The lower part strips b and y first.
        let Witness::Split { v, .. } = &w else { panic!() };
        assert_eq!(v.as_str(), "b");
    }

    #[test]
    fn lower_part_ignores_upper_interval() {
        let small = Arc::new(Poset::chain(&["a", "b", "c"]).unwrap());
        let big = Arc::new(
            Poset::new(
                ["a", "b", "c", "u", "v"],
                [("a", "b"), ("b", "c"), ("c", "u"), ("c", "v")],
            )
            .unwrap(),
        );
        let phi_small = PosetMap::from_labels(small.clone(), [("a", "a"), ("b", "a"), ("c", "a")]).unwrap();
        let phi_big = PosetMap::from_labels(
            big.clone(),
            [("a", "a"), ("b", "a"), ("c", "a"), ("u", "u"), ("v", "v")],
        )
        .unwrap();
        let lower = |phi: &PosetMap| {
            let p = phi.poset();
            let universe: Arc<[Label]> = p.labels().to_vec().into();
            let ctx = Ctx {
                poset: p,
                universe: &universe,
                map: phi.table(),
            };
            let x = p.index_of("c").unwrap();
            ctx.below_witness(OrderView::of(p), p.all(), x)
        };
        assert_eq!(lower(&phi_small), lower(&phi_big));
    }

    #[test]
    fn reduce_b2_closure_to_fixed_points() {
        let p = b2();
        let phi = closure(&p);
        let fix: Vec<Label> = phi.fixed_points().into_iter().collect();
        let report = theorem_reduce(&phi, &fix, ReduceOptions { emit_collapse: true }).unwrap();
        assert_eq!(strs(&report.removal_order), ["{}", "{1}"]);
        let dp = SimplicialComplex::order_complex(&p).unwrap();
        let dq = SimplicialComplex::simplex(["{2}", "{1,2}"]).unwrap();
        assert!(verify_ne_certificate(&dp, &dq, &report.certificate));
        assert!(verify_collapse(&dp, &dq, report.collapse.as_ref().unwrap()));

        let image = reduce_to_image(&phi, ReduceOptions::default()).unwrap();
        assert_eq!(image.removal_order, report.removal_order);
    }

    #[test]
    fn reduce_with_q_equal_p_is_empty() {
        let p = b2();
        let phi = closure(&p);
        let report = theorem_reduce(&phi, p.labels(), ReduceOptions::default()).unwrap();
        assert!(report.certificate.is_empty());
        let id = reduce_to_image(&PosetMap::identity(p), ReduceOptions::default()).unwrap();
        assert!(id.certificate.is_empty());
    }

    #[test]
    fn reduce_chain_to_constant() {
        let p = Arc::new(Poset::chain(&["a", "b", "c"]).unwrap());
        let phi = PosetMap::from_fn(p.clone(), |_| "b".into()).unwrap();
        let report = theorem_reduce(&phi, ["b"], ReduceOptions::default()).unwrap();
        let dp = SimplicialComplex::order_complex(&p).unwrap();
        let pt = SimplicialComplex::point("b");
        assert!(verify_ne_certificate(&dp, &pt, &report.certificate));
        assert!(matches!(
            search_ne_reduction(&dp, &pt, SearchBudget::default()),
            Ok(ReductionSearch::Found(_))
        ));
    }

    #[test]
    fn reduce_decreasing_map_to_image() {
        let p = b2();
        let phi = PosetMap::from_fn(p.clone(), |s| match s {
            "{}" | "{1}" => "{}".into(),
            _ => "{2}".into(),
        })
        .unwrap();
        let report = reduce_to_image(&phi, ReduceOptions::default()).unwrap();
        assert_eq!(strs(&report.target), ["{}", "{2}"]);
        let dp = SimplicialComplex::order_complex(&p).unwrap();
        let dq = SimplicialComplex::simplex(["{}", "{2}"]).unwrap();
        assert!(verify_ne_certificate(&dp, &dq, &report.certificate));
    }

    #[test]
    fn target_strictly_between_fix_and_p() {
        // a ↦ b ↦ c ↦ c with Q = {a, c}: φ^{|P∖Q|} = φ sends a to b ∉ Q, so
        // the stabilized map is what keeps the restrictions inside P ∖ {x}.
        let p = Arc::new(Poset::chain(&["a", "b", "c"]).unwrap());
        let phi = PosetMap::from_labels(p.clone(), [("a", "b"), ("b", "c"), ("c", "c")]).unwrap();
        let report = theorem_reduce(&phi, ["a", "c"], ReduceOptions { emit_collapse: true }).unwrap();
        assert_eq!(strs(&report.removal_order), ["b"]);
        assert_eq!(report.gamma.image(), ["c"].into_iter().map(Label::from).collect());
    }

    #[test]
    fn precondition_errors() {
        let p = b2();
        let phi = closure(&p);
        assert_eq!(
            theorem_reduce(&phi, ["{2}"], ReduceOptions::default()),
            Err(ReductionError::FixedPointOutside("{1,2}".into()))
        );
        let gamma = PosetMap::from_fn(p.clone(), |_| "{2}".into()).unwrap();
        assert!(matches!(
            theorem_reduce(&gamma, ["{2}"], ReduceOptions::default()),
            Err(ReductionError::Poset(PosetError::NotMonotone(_)))
        ));
    }
}
