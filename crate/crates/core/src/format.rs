//! On-disk JSON shapes for posets, maps, complexes, subsets and reports.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::collapse::CollapseSequence;
use crate::complex::{ComplexError, SimplicialComplex};
use crate::evasiveness::NeCertificate;
use crate::label::Label;
use crate::poset::{Poset, PosetError, PosetMap};
use crate::reduction::ReductionReport;

/// `{"elements": [...], "covers": [[a, b], ...]}`. Any generating set of
/// relations is accepted; output always lists the cover relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetFile {
    pub elements: Vec<Label>,
    #[serde(default)]
    pub covers: Vec<(Label, Label)>,
}

impl PosetFile {
    pub fn to_poset(&self) -> Result<Poset, PosetError> {
        Poset::new(self.elements.iter(), self.covers.iter().map(|(a, b)| (a, b)))
    }
}

impl From<&Poset> for PosetFile {
    fn from(p: &Poset) -> Self {
        PosetFile {
            elements: p.labels().to_vec(),
            covers: p.covers(),
        }
    }
}

/// `{"map": {"a": "b", ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub map: BTreeMap<Label, Label>,
}

impl MapFile {
    pub fn to_map(&self, poset: Arc<Poset>) -> Result<PosetMap, PosetError> {
        PosetMap::from_labels(poset, self.map.iter())
    }
}

impl From<&PosetMap> for MapFile {
    fn from(m: &PosetMap) -> Self {
        MapFile {
            map: m.pairs().into_iter().collect(),
        }
    }
}

/// `{"facets": [["a", "b"], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub facets: Vec<Vec<Label>>,
}

impl ComplexFile {
    pub fn to_complex(&self) -> Result<SimplicialComplex, ComplexError> {
        SimplicialComplex::from_facets(self.facets.iter().map(|f| f.iter()))
    }
}

impl From<&SimplicialComplex> for ComplexFile {
    fn from(x: &SimplicialComplex) -> Self {
        ComplexFile { facets: x.facets() }
    }
}

/// `{"elements": [...]}`, a subset of a poset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetFile {
    pub elements: Vec<Label>,
}

/// Serialized [`ReductionReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub gamma: BTreeMap<Label, Label>,
    pub target: Vec<Label>,
    pub removal_order: Vec<Label>,
    pub certificate: NeCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse: Option<CollapseSequence>,
}

impl From<&ReductionReport> for ReportFile {
    fn from(r: &ReductionReport) -> Self {
        ReportFile {
            gamma: r.gamma.pairs().into_iter().collect(),
            target: r.target.clone(),
            removal_order: r.removal_order.clone(),
            certificate: r.certificate.clone(),
            collapse: r.collapse.clone(),
        }
    }
}
