//! Constructive collapsing of order complexes along monotone poset maps.
//!
//! The crate decides nonevasiveness with explicit witnesses, builds and
//! checks NE-reduction certificates `Δ(P) ↘NE Δ(Q)` for monotone maps,
//! compiles them into elementary collapses, and checks the Möbius function
//! identities that follow from them.
//!
//! ```
//! use std::sync::Arc;
//! use poset_collapse::{Poset, PosetMap, ReduceOptions, theorem_reduce};
//!
//! let b2 = Arc::new(Poset::boolean_lattice(2).unwrap());
//! let phi = PosetMap::from_fn(b2.clone(), |s| match s {
//!     "{}" | "{2}" => "{2}".into(),
//!     _ => "{1,2}".into(),
//! })
//! .unwrap();
//! let report = theorem_reduce(&phi, ["{2}", "{1,2}"], ReduceOptions::default()).unwrap();
//! assert_eq!(report.removal_order, ["{}", "{1}"]);
//! ```

mod bits;
pub mod collapse;
pub mod complex;
pub mod enumerate;
pub mod evasiveness;
pub mod format;
mod label;
pub mod mobius;
pub mod poset;
pub mod reduction;

pub use bits::MAX_ELEMENTS;
pub use collapse::{
    apply_collapse, certificate_to_collapse, free_pairs, search_collapse, verify_collapse,
    witness_to_vertex_collapse, CollapseError, CollapseSearch, CollapseSequence, CollapseStep,
    CollapseTarget,
};
pub use complex::{ComplexError, Homology, SimplicialComplex};
pub use evasiveness::{
    classify_ne_equivalence, common_expansion, cone_witness, is_nonevasive, join_witness,
    lift_certificate_over_join, search_ne_reduction, verify_ne_certificate, verify_witness,
    CommonExpansion, EvasivenessError, NeCertificate, NeClassification, Nonevasiveness,
    ReductionSearch, SearchBudget, Witness,
};
pub use label::Label;
pub use mobius::{
    crapo_check, crapo_route, hall_check, mobius_table, CrapoCase, CrapoReport, CrapoRoute,
    HallReport, MobiusError, MobiusTable,
};
pub use poset::{classify_map, MapClass, Poset, PosetError, PosetMap, Side};
pub use reduction::{
    interval_witness, reduce_to_image, theorem_reduce, ReduceOptions, ReductionError,
    ReductionReport,
};
