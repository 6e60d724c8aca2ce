//! Exhaustive and seeded generators for small posets, maps and complexes.

use std::sync::Arc;

use rand::Rng;

use crate::bits::{bit, bits, full, has, Mask};
use crate::complex::SimplicialComplex;
use crate::label::Label;
use crate::poset::{Poset, PosetMap};

/// Labels `a, b, c, …` (then `z26, z27, …`), already in label order.
pub fn default_labels(n: usize) -> Vec<Label> {
    (0..n)
        .map(|i| {
            if i < 26 {
                Label::from(((b'a' + i as u8) as char).to_string())
            } else {
                Label::from(format!("z{i}"))
            }
        })
        .collect()
}

/// Every partial order on `n` labeled elements, each exactly once, as
/// strict up-set tables.
fn up_tables(n: usize) -> Vec<Vec<Mask>> {
    let mut level: Vec<Vec<Mask>> = vec![Vec::new()];
    for k in 0..n {
        let mut next = Vec::new();
        for up in &level {
            extend_with_new_element(up, k, &mut next);
        }
        level = next;
    }
    level
}

/// Adds element `k` in every consistent way: a down-closed set `d` below it
/// and an up-closed set `u` above it, with everything in `d` already below
/// everything in `u`.
fn extend_with_new_element(up: &[Mask], k: usize, out: &mut Vec<Vec<Mask>>) {
    let all = full(k);
    let mut down = vec![0 as Mask; k];
    for (i, &m) in up.iter().enumerate() {
        for j in bits(m) {
            down[j] |= bit(i);
        }
    }
    let down_closed = |s: Mask| bits(s).all(|i| down[i] & !s == 0);
    let up_closed = |s: Mask| bits(s).all(|i| up[i] & !s == 0);
    for d in 0..=all {
        if !down_closed(d) {
            continue;
        }
        let rest = all & !d;
        // Iterate over subsets u of rest.
        let mut u = rest;
        loop {
            if up_closed(u) && bits(d).all(|i| u & !up[i] == 0) {
                let mut table: Vec<Mask> = up.to_vec();
                for i in bits(d) {
                    table[i] |= bit(k);
                }
                table.push(u);
                out.push(table);
            }
            if u == 0 {
                break;
            }
            u = (u - 1) & rest;
        }
    }
}

/// All labeled posets on the elements of [`default_labels`]`(n)`.
pub fn labeled_posets(n: usize) -> Vec<Arc<Poset>> {
    let labels = default_labels(n);
    up_tables(n)
        .into_iter()
        .map(|up| Arc::new(Poset::from_up(labels.clone(), up)))
        .collect()
}

/// Labeled posets with a unique minimum and maximum.
pub fn bounded_labeled_posets(n: usize) -> Vec<Arc<Poset>> {
    labeled_posets(n)
        .into_iter()
        .filter(|p| p.bounds().is_some())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Monotone,
    Increasing,
}

/// Calls `f` on the table of every monotone (or increasing) self-map of `p`.
pub fn for_each_map_table<F: FnMut(&[usize])>(p: &Poset, kind: MapKind, mut f: F) {
    let n = p.len();
    let mut table = vec![0usize; n];
    fill(p, kind, 0, &mut table, &mut f);
}

fn fill<F: FnMut(&[usize])>(p: &Poset, kind: MapKind, i: usize, table: &mut Vec<usize>, f: &mut F) {
    if i == table.len() {
        f(table);
        return;
    }
    let candidates = match kind {
        MapKind::Monotone => (p.up(i) | p.down(i)) | bit(i),
        MapKind::Increasing => p.up(i) | bit(i),
    };
    'next: for y in bits(candidates) {
        for j in 0..i {
            let tj = table[j];
            if (p.lt(j, i) && !p.le(tj, y)) || (p.lt(i, j) && !p.le(y, tj)) {
                continue 'next;
            }
        }
        table[i] = y;
        fill(p, kind, i + 1, table, f);
    }
}

/// All monotone (or increasing) self-maps of `p`.
pub fn maps(p: &Arc<Poset>, kind: MapKind) -> Vec<PosetMap> {
    let mut out = Vec::new();
    for_each_map_table(p, kind, |t| out.push(PosetMap::from_valid(p.clone(), t.to_vec())));
    out
}

/// Every complex whose vertices lie in the first `n` labels, given by an
/// antichain of nonempty facets (the void complex is skipped).
pub fn complexes_on(n: usize) -> Vec<SimplicialComplex> {
    let universe: Arc<[Label]> = default_labels(n).into();
    let subsets: Vec<Mask> = (1..=full(n)).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    antichains(&subsets, 0, &mut chosen, &mut |facets| {
        if !facets.is_empty() {
            let mut facets = facets.to_vec();
            facets.sort_unstable();
            out.push(SimplicialComplex::from_parts(universe.clone(), facets));
        }
    });
    out
}

fn antichains<F: FnMut(&[Mask])>(sets: &[Mask], from: usize, chosen: &mut Vec<Mask>, f: &mut F) {
    f(chosen);
    for k in from..sets.len() {
        let s = sets[k];
        if chosen.iter().all(|&c| c & s != c && c & s != s) {
            chosen.push(s);
            antichains(sets, k + 1, chosen, f);
            chosen.pop();
        }
    }
}

/// A random complex on exactly the given vertices: `facets` random nonempty
/// subsets, plus a singleton for any vertex left uncovered.
pub fn random_complex<R: Rng + ?Sized>(
    rng: &mut R,
    labels: &[Label],
    facets: usize,
    density: f64,
) -> SimplicialComplex {
    let n = labels.len();
    assert!(n > 0, "need at least one vertex");
    let universe: Arc<[Label]> = labels.to_vec().into();
    let mut sets = Vec::new();
    for _ in 0..facets {
        let mut s: Mask = 0;
        for i in 0..n {
            if rng.gen_bool(density) {
                s |= bit(i);
            }
        }
        if s == 0 {
            s = bit(rng.gen_range(0..n));
        }
        sets.push(s);
    }
    let covered = sets.iter().fold(0, |m, &s| m | s);
    for i in 0..n {
        if !has(covered, i) {
            sets.push(bit(i));
        }
    }
    SimplicialComplex::from_masks(universe, sets).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_poset_counts() {
        let counts: Vec<usize> = (0..=5).map(|n| labeled_posets(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 19, 219, 4231]);
    }

    #[test]
    fn every_generated_table_is_a_distinct_partial_order() {
        let posets = labeled_posets(4);
        let mut seen = std::collections::HashSet::new();
        for p in &posets {
            for i in 0..p.len() {
                assert!(!p.lt(i, i));
                for j in 0..p.len() {
                    for k in 0..p.len() {
                        if p.lt(i, j) && p.lt(j, k) {
                            assert!(p.lt(i, k));
                        }
                    }
                }
            }
            assert!(seen.insert(p.up_table().to_vec()));
        }
    }

    #[test]
    fn map_counts_on_small_posets() {
        let chain = Arc::new(Poset::chain(&["a", "b", "c"]).unwrap());
        // Monotone self-maps of a 3-chain are all order-preserving maps.
        assert_eq!(maps(&chain, MapKind::Monotone).len(), 10);
        assert_eq!(maps(&chain, MapKind::Increasing).len(), 5);
        let anti = Arc::new(Poset::new(["a", "b"], Vec::<(&str, &str)>::new()).unwrap());
        assert_eq!(maps(&anti, MapKind::Monotone).len(), 1);
        for m in maps(&chain, MapKind::Monotone) {
            let fresh = PosetMap::from_indices(chain.clone(), m.table().to_vec()).unwrap();
            assert!(fresh.is_monotone());
        }
    }

    #[test]
    fn complex_counts() {
        // Antichains of nonempty subsets of an n-set.
        let counts: Vec<usize> = (1..=4).map(|n| complexes_on(n).len()).collect();
        assert_eq!(counts, vec![1, 4, 18, 166]);
    }

    #[test]
    fn random_complex_covers_vertices() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let labels = default_labels(6);
        for _ in 0..50 {
            let x = random_complex(&mut rng, &labels, 3, 0.4);
            assert_eq!(x.vertex_count(), 6);
        }
    }
}
