//! Möbius functions of finite posets, the Hall identity and the closure
//! identity for increasing maps.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::{self, bit, bits, Mask};
use crate::complex::SimplicialComplex;
use crate::label::Label;
use crate::poset::{Poset, PosetError, PosetMap};
use crate::reduction::{reduce_mask, ReduceOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MobiusError {
    #[error("poset has no distinct minimum and maximum")]
    Unbounded,
    #[error("map is not increasing")]
    NotIncreasing,
    #[error("fixed point `{0}` is not in the subset")]
    FixNotInSubset(Label),
    #[error("subset meets the stable preimage of the top in `{0}`")]
    SubsetMeetsPreimage(Label),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// `μ(x, y)` for all `x ≤ y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusTable {
    poset: Arc<Poset>,
    rows: Vec<Vec<Option<BigInt>>>,
}

/// Row `μ(x, ·)` over the elements of `mask` (which must contain `x` and be
/// convex enough that intervals from `x` stay inside it, e.g. any induced
/// subposet read through its own order).
fn mobius_row(p: &Poset, x: usize, mask: Mask) -> Vec<Option<BigInt>> {
    let mut row: Vec<Option<BigInt>> = vec![None; p.len()];
    row[x] = Some(BigInt::one());
    let mut above: Vec<usize> = bits(p.up(x) & mask).collect();
    // Sorting by the size of the down-set gives a linear extension.
    above.sort_by_key(|&y| bits::count(p.down(y) & mask));
    for y in above {
        let mut sum = BigInt::one();
        for z in bits(p.up(x) & p.down(y) & mask) {
            sum += row[z].as_ref().expect("earlier in the extension");
        }
        row[y] = Some(-sum);
    }
    row
}

pub fn mobius_table(p: &Arc<Poset>) -> MobiusTable {
    let rows = (0..p.len()).map(|x| mobius_row(p, x, p.all())).collect();
    MobiusTable {
        poset: p.clone(),
        rows,
    }
}

impl MobiusTable {
    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    /// `μ(x, y)`, or `None` when `x ≰ y`.
    pub fn get(&self, x: &str, y: &str) -> Result<Option<&BigInt>, PosetError> {
        let i = self.poset.require(x)?;
        let j = self.poset.require(y)?;
        Ok(self.rows[i][j].as_ref())
    }

    /// All defined entries in label order.
    pub fn entries(&self) -> Vec<(Label, Label, BigInt)> {
        let p = &self.poset;
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    out.push((p.label(i).clone(), p.label(j).clone(), v.clone()));
                }
            }
        }
        out
    }
}

/// Serializes as `{"entries": [{"x": .., "y": .., "mu": ..}, ...]}`.
impl Serialize for MobiusTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            x: &'a Label,
            y: &'a Label,
            #[serde(serialize_with = "serialize_int")]
            mu: &'a BigInt,
        }
        #[derive(Serialize)]
        struct Table<'a> {
            entries: Vec<Entry<'a>>,
        }
        let p = &self.poset;
        let entries = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().filter_map(move |(j, v)| {
                    v.as_ref().map(|mu| Entry {
                        x: p.label(i),
                        y: p.label(j),
                        mu,
                    })
                })
            })
            .collect();
        Table { entries }.serialize(s)
    }
}

/// Writes integers as JSON numbers when they fit in 64 bits and as decimal
/// strings otherwise.
pub(crate) fn serialize_int<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match i64::try_from(v) {
        Ok(n) => s.serialize_i64(n),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

fn reduced_euler_of_proper_part(p: &Poset, mask: Mask) -> BigInt {
    if mask == 0 {
        // Void complex.
        return BigInt::from(-1);
    }
    let proper = p.induced_mask(mask);
    BigInt::from(
        SimplicialComplex::order_complex(&proper)
            .expect("nonempty")
            .reduced_euler(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HallReport {
    #[serde(serialize_with = "serialize_int")]
    pub mobius: BigInt,
    #[serde(serialize_with = "serialize_int")]
    pub reduced_euler: BigInt,
    pub holds: bool,
}

/// Compares `μ(0̂, 1̂)` with the reduced Euler characteristic of the order
/// complex of the proper part (void proper part counts as −1).
pub fn hall_check(p: &Poset) -> Result<HallReport, MobiusError> {
    let (bottom, top) = p.bounds().ok_or(MobiusError::Unbounded)?;
    let mobius = mobius_row(p, bottom, p.all())[top].clone().expect("bottom ≤ top");
    let reduced_euler = reduced_euler_of_proper_part(p, p.all() & !bit(bottom) & !bit(top));
    Ok(HallReport {
        holds: mobius == reduced_euler,
        mobius,
        reduced_euler,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrapoCase {
    FixedZero,
    ZeroNotFixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrapoReport {
    #[serde(serialize_with = "serialize_int")]
    pub lhs: BigInt,
    #[serde(serialize_with = "serialize_int")]
    pub rhs: BigInt,
    pub equal: bool,
    pub case: CrapoCase,
}

struct CrapoInput {
    bottom: usize,
    top: usize,
    preimage: Mask,
    q: Mask,
}

fn crapo_preconditions(phi: &PosetMap, q: Mask) -> Result<CrapoInput, MobiusError> {
    let p = phi.poset();
    let (bottom, top) = p.bounds().ok_or(MobiusError::Unbounded)?;
    if !phi.class().increasing {
        return Err(MobiusError::NotIncreasing);
    }
    if let Some(x) = bits::lowest(phi.fixed_mask() & !q) {
        return Err(MobiusError::FixNotInSubset(p.label(x).clone()));
    }
    let preimage = phi.stable_preimage_mask(top);
    if let Some(x) = bits::lowest(q & preimage & !bit(top)) {
        return Err(MobiusError::SubsetMeetsPreimage(p.label(x).clone()));
    }
    Ok(CrapoInput {
        bottom,
        top,
        preimage,
        q,
    })
}

/// `μ_S(0̂, 1̂)` for the induced order on `s ∋ 0̂, 1̂`.
fn mobius_on(p: &Poset, s: Mask, bottom: usize, top: usize) -> BigInt {
    mobius_row(p, bottom, s)[top].clone().expect("bottom ≤ top")
}

fn crapo_sides(phi: &PosetMap, c: &CrapoInput) -> CrapoReport {
    let p = phi.poset();
    let row = mobius_row(p, c.bottom, p.all());
    let lhs: BigInt = bits(c.preimage)
        .map(|z| row[z].clone().expect("bottom is below everything"))
        .sum();
    let (case, rhs) = if phi.table()[c.bottom] == c.bottom {
        (CrapoCase::FixedZero, mobius_on(p, c.q, c.bottom, c.top))
    } else {
        (CrapoCase::ZeroNotFixed, BigInt::zero())
    };
    CrapoReport {
        equal: lhs == rhs,
        lhs,
        rhs,
        case,
    }
}

/// Checks `Σ_{φ^∞(z) = 1̂} μ_P(0̂, z) = μ_Q(0̂, 1̂)` (or `0` when `0̂` is not
/// fixed) for an increasing `φ` and `Fix φ ⊆ Q ⊆ P` with
/// `Q ∩ φ^{-∞}(1̂) = {1̂}`.
pub fn crapo_check<I, L>(phi: &PosetMap, subset: I) -> Result<CrapoReport, MobiusError>
where
    I: IntoIterator<Item = L>,
    L: AsRef<str>,
{
    let q = phi.poset().mask_of(subset)?;
    let c = crapo_preconditions(phi, q)?;
    Ok(crapo_sides(phi, &c))
}

/// Intermediate quantities of the argument behind [`crapo_check`], each
/// computed on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "route")]
pub enum CrapoRoute {
    /// `0̂` fixed. `R = (P ∖ φ^{-∞}(1̂)) ∪ {0̂, 1̂}`.
    FixedZero {
        /// `Δ(R̄) ↘NE Δ(Q̄)` was certified along the restricted map.
        reduction_certified: bool,
        #[serde(serialize_with = "serialize_int")]
        mu_r: BigInt,
        #[serde(serialize_with = "serialize_int")]
        mu_q: BigInt,
        /// `Σ_{z ∈ φ^{-∞}(1̂)} μ(0̂,z) = −Σ_{z ∉ φ^{-∞}(1̂)} μ(0̂,z)`.
        complement_identity: bool,
        #[serde(serialize_with = "serialize_int")]
        reduced_euler_r: BigInt,
        #[serde(serialize_with = "serialize_int")]
        reduced_euler_q: BigInt,
    },
    /// `φ^∞(0̂) = 1̂`: every element is in the preimage and the sum is the
    /// full row sum.
    AllToTop {
        #[serde(serialize_with = "serialize_int")]
        row_sum: BigInt,
    },
    /// `0̂` moved but not to `1̂`: fix `0̂` to get `ψ`, and use the subset
    /// `Q' = (P_{≥φ(0̂)} ∖ φ^{-∞}(1̂)) ∪ {0̂, 1̂}`, which has the single atom
    /// `φ(0̂)`.
    PinnedZero {
        same_preimage: bool,
        single_atom: bool,
        /// The fixed-zero route applied to `(ψ, Q')`.
        inner: Box<CrapoRoute>,
        #[serde(serialize_with = "serialize_int")]
        mu_q_prime: BigInt,
    },
}

impl CrapoRoute {
    /// Every step of the route checks out and ends at the claimed value.
    pub fn consistent(&self, report: &CrapoReport) -> bool {
        match self {
            CrapoRoute::FixedZero {
                reduction_certified,
                mu_r,
                mu_q,
                complement_identity,
                reduced_euler_r,
                reduced_euler_q,
            } => {
                *reduction_certified
                    && *complement_identity
                    && reduced_euler_r == reduced_euler_q
                    && reduced_euler_r == mu_r
                    && reduced_euler_q == mu_q
                    && *mu_q == report.rhs
                    && *mu_r == report.lhs
            }
            CrapoRoute::AllToTop { row_sum } => row_sum.is_zero() && report.lhs.is_zero(),
            CrapoRoute::PinnedZero {
                same_preimage,
                single_atom,
                inner,
                mu_q_prime,
            } => {
                let inner_report = CrapoReport {
                    lhs: report.lhs.clone(),
                    rhs: mu_q_prime.clone(),
                    equal: report.lhs == *mu_q_prime,
                    case: CrapoCase::FixedZero,
                };
                *same_preimage
                    && *single_atom
                    && mu_q_prime.is_zero()
                    && inner.consistent(&inner_report)
            }
        }
    }
}

fn fixed_zero_route(phi: &PosetMap, c: &CrapoInput) -> CrapoRoute {
    let p = phi.poset();
    let ends = bit(c.bottom) | bit(c.top);
    let r = (p.all() & !c.preimage) | ends;
    let row = mobius_row(p, c.bottom, p.all());
    let in_pre: BigInt = bits(c.preimage).map(|z| row[z].clone().unwrap()).sum();
    let outside: BigInt = bits(p.all() & !c.preimage).map(|z| row[z].clone().unwrap()).sum();
    let r_bar = r & !ends;
    let q_bar = c.q & !ends;
    let reduction_certified = if r_bar == 0 {
        q_bar == 0
    } else {
        // ψ = φ restricted to R̄, which it maps into itself.
        let sub = Arc::new(p.induced_mask(r_bar));
        let table = bits(r_bar)
            .map(|x| {
                let image = p.label(phi.table()[x]);
                sub.index_of(image.as_str())
            })
            .collect::<Option<Vec<usize>>>();
        match table.map(|t| PosetMap::from_indices(sub.clone(), t)) {
            Some(Ok(psi)) if psi.is_monotone() => {
                let target = bits(q_bar).map(|x| p.label(x).clone());
                let target_mask = sub.mask_of(target.map(|l| l.to_string()));
                match target_mask {
                    Ok(m) if m != 0 => reduce_mask(&psi, m, ReduceOptions::default()).is_ok(),
                    _ => false,
                }
            }
            _ => false,
        }
    };
    CrapoRoute::FixedZero {
        reduction_certified,
        mu_r: mobius_on(p, r, c.bottom, c.top),
        mu_q: mobius_on(p, c.q, c.bottom, c.top),
        complement_identity: in_pre == -outside,
        reduced_euler_r: reduced_euler_of_proper_part(p, r_bar),
        reduced_euler_q: reduced_euler_of_proper_part(p, q_bar),
    }
}

/// Recomputes the argument behind [`crapo_check`] step by step.
pub fn crapo_route<I, L>(phi: &PosetMap, subset: I) -> Result<CrapoRoute, MobiusError>
where
    I: IntoIterator<Item = L>,
    L: AsRef<str>,
{
    let p = phi.poset();
    let q = p.mask_of(subset)?;
    let c = crapo_preconditions(phi, q)?;
    if phi.table()[c.bottom] == c.bottom {
        return Ok(fixed_zero_route(phi, &c));
    }
    if bits::has(c.preimage, c.bottom) {
        let row = mobius_row(p, c.bottom, p.all());
        let row_sum = row.into_iter().flatten().sum();
        return Ok(CrapoRoute::AllToTop { row_sum });
    }
    let mut table = phi.table().to_vec();
    table[c.bottom] = c.bottom;
    let psi = PosetMap::from_indices(p.clone(), table)?;
    let psi_pre = psi.stable_preimage_mask(c.top);
    let atom = phi.table()[c.bottom];
    let q_prime = ((p.up(atom) | bit(atom)) & !c.preimage) | bit(c.bottom) | bit(c.top);
    let atoms = bits(q_prime & !bit(c.bottom))
        .filter(|&y| p.down(y) & q_prime == bit(c.bottom))
        .count();
    let inner_input = crapo_preconditions(&psi, q_prime)?;
    Ok(CrapoRoute::PinnedZero {
        same_preimage: psi_pre == c.preimage,
        single_atom: atoms == 1,
        inner: Box::new(fixed_zero_route(&psi, &inner_input)),
        mu_q_prime: mobius_on(p, q_prime, c.bottom, c.top),
    })
}
