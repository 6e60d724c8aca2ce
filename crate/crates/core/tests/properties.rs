use std::collections::BTreeSet;
use std::sync::Arc;

use poset_collapse::enumerate::{complexes_on, default_labels, maps, random_complex, MapKind};
use poset_collapse::{
    apply_collapse, certificate_to_collapse, hall_check, is_nonevasive, lift_certificate_over_join,
    mobius_table, search_collapse, search_ne_reduction, theorem_reduce, verify_collapse,
    verify_ne_certificate, verify_witness, CollapseSearch, CollapseTarget, Label, NeCertificate,
    Nonevasiveness, Poset, PosetMap, ReduceOptions, ReductionSearch, SearchBudget,
    SimplicialComplex, Witness,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn budget() -> SearchBudget {
    SearchBudget::default()
}

/// A poset on `a, b, ...` generated by the chosen pairs `i < j`.
fn poset_from(n: usize, rel: &[bool]) -> Arc<Poset> {
    let labels = default_labels(n);
    let mut pairs = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if rel[k] {
                pairs.push((labels[i].clone(), labels[j].clone()));
            }
            k += 1;
        }
    }
    Arc::new(Poset::new(labels, pairs).unwrap())
}

fn arb_poset(max: usize) -> impl Strategy<Value = Arc<Poset>> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.4), n * (n - 1) / 2)
            .prop_map(move |rel| poset_from(n, &rel))
    })
}

fn arb_map(max: usize, kind: MapKind) -> impl Strategy<Value = PosetMap> {
    (arb_poset(max), any::<prop::sample::Index>()).prop_map(move |(p, idx)| {
        let all = maps(&p, kind);
        all[idx.index(all.len())].clone()
    })
}

fn arb_complex(labels: &'static [&'static str]) -> impl Strategy<Value = SimplicialComplex> {
    (any::<u64>(), 1..5usize).prop_map(move |(seed, facets)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<Label> = labels.iter().map(|s| Label::new(s)).collect();
        random_complex(&mut rng, &labels, facets, 0.5)
    })
}

fn trimmed(mut betti: Vec<usize>) -> Vec<usize> {
    while betti.len() > 1 && betti.last() == Some(&0) {
        betti.pop();
    }
    betti
}

fn faces_containing(x: &SimplicialComplex, v: &str) -> usize {
    x.faces().iter().filter(|f| f.iter().any(|l| l == v)).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_and_compositions_stay_in_class(phi in arb_map(5, MapKind::Monotone), k in 0..6usize) {
        prop_assert!(phi.power(k).is_monotone());
        let fix = phi.fixed_points();
        prop_assert_eq!(phi.stabilize().image(), fix.clone());
        prop_assert!(fix.is_subset(&phi.image()));
    }

    #[test]
    fn increasing_maps_compose(
        (f, g) in arb_poset(5).prop_flat_map(|p| {
            let all = maps(&p, MapKind::Increasing);
            let n = all.len();
            (0..n, 0..n).prop_map(move |(i, j)| (all[i].clone(), all[j].clone()))
        })
    ) {
        let fg = f.compose(&g).unwrap();
        prop_assert!(fg.class().increasing);
        prop_assert!(fg.is_monotone());
    }

    #[test]
    fn stable_preimages_partition_the_poset(phi in arb_map(6, MapKind::Monotone)) {
        let mut seen = BTreeSet::new();
        for z in phi.fixed_points() {
            let pre = phi.stable_preimage(z.as_str()).unwrap();
            prop_assert!(pre.contains(&z));
            for x in pre {
                prop_assert!(seen.insert(x));
            }
        }
        prop_assert_eq!(seen.len(), phi.poset().len());
    }

    #[test]
    fn decomposition_factors_are_valid(phi in arb_map(6, MapKind::Monotone)) {
        let (alpha, beta) = phi.decompose_monotone().unwrap();
        prop_assert!(alpha.class().increasing && beta.class().decreasing);
        let composed = alpha.compose(&beta).unwrap();
        prop_assert_eq!(composed.table(), phi.table());
        let fix = phi.fixed_points();
        prop_assert!(fix.is_subset(&alpha.fixed_points()) && fix.is_subset(&beta.fixed_points()));
        let covered: BTreeSet<Label> = alpha.fixed_points().union(&beta.fixed_points()).cloned().collect();
        prop_assert_eq!(covered.len(), phi.poset().len());
    }

    #[test]
    fn link_and_deletion_account_for_every_face(x in arb_complex(&["a", "b", "c", "d", "e"])) {
        for v in x.vertices() {
            let with_v = faces_containing(&x, v.as_str());
            let lk = x.link(v.as_str()).unwrap().map_or(0, |l| l.face_count());
            prop_assert_eq!(with_v, lk + 1);
            if x.vertex_count() > 1 {
                let del = x.delete_vertex(v.as_str()).unwrap();
                prop_assert_eq!(x.face_count(), del.face_count() + with_v);
            }
        }
    }

    #[test]
    fn join_commutes_with_link_and_deletion(
        x in arb_complex(&["a", "b", "c"]),
        y in arb_complex(&["p", "q", "r"]),
    ) {
        let xy = x.join(&y).unwrap();
        prop_assert_eq!(xy.reduced_euler(), -x.reduced_euler() * y.reduced_euler());
        for v in x.vertices() {
            let lk = xy.link(v.as_str()).unwrap().unwrap();
            let expected = match x.link(v.as_str()).unwrap() {
                Some(l) => l.join(&y).unwrap(),
                None => y.clone(),
            };
            prop_assert_eq!(lk, expected);
            if x.vertex_count() > 1 {
                let lhs = xy.delete_vertex(v.as_str()).unwrap();
                let rhs = x.delete_vertex(v.as_str()).unwrap().join(&y).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn betti_numbers_match_euler(x in arb_complex(&["a", "b", "c", "d", "e", "f"])) {
        let betti = x.z2_betti();
        let alt: i64 = betti
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        prop_assert_eq!(alt - 1, x.reduced_euler());
    }

    #[test]
    fn witnesses_and_certificates_round_trip_through_json(x in arb_complex(&["a", "b", "c", "d", "e"])) {
        if let Nonevasiveness::Nonevasive(w) = is_nonevasive(&x, budget()) {
            let back: Witness = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
            prop_assert!(verify_witness(&x, &back));
        }
        let first = x.vertices().remove(0);
        let y = SimplicialComplex::point(first);
        if let Ok(ReductionSearch::Found(cert)) = search_ne_reduction(&x, &y, budget()) {
            let back: NeCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
            prop_assert!(verify_ne_certificate(&x, &y, &back));
            let seq = certificate_to_collapse(&x, &back).unwrap();
            prop_assert!(verify_collapse(&x, &y, &seq));
            prop_assert_eq!(seq.len(), (x.face_count() - 1) / 2);
        }
    }

    #[test]
    fn random_reductions_certify_and_preserve_homology(
        (phi, extra) in arb_map(6, MapKind::Monotone)
            .prop_flat_map(|phi| {
                let n = phi.poset().len();
                (Just(phi), prop::collection::vec(any::<bool>(), n))
            })
    ) {
        let p = phi.poset().clone();
        let fix = phi.fixed_points();
        let q: Vec<Label> = p
            .labels()
            .iter()
            .zip(&extra)
            .filter(|(l, &e)| e || fix.contains(*l))
            .map(|(l, _)| l.clone())
            .collect();
        let report = theorem_reduce(&phi, &q, ReduceOptions { emit_collapse: true }).unwrap();
        let dp = SimplicialComplex::order_complex(&p).unwrap();
        let dq = SimplicialComplex::order_complex(&p.induced(&q).unwrap()).unwrap();
        prop_assert!(verify_ne_certificate(&dp, &dq, &report.certificate));
        prop_assert!(verify_collapse(&dp, &dq, report.collapse.as_ref().unwrap()));
        prop_assert_eq!(report.removal_order.len(), p.len() - q.len());
        prop_assert_eq!(trimmed(dp.z2_betti()), trimmed(dq.z2_betti()));
        prop_assert_eq!(dp.reduced_euler(), dq.reduced_euler());
    }

    #[test]
    fn mobius_rows_sum_to_zero(p in arb_poset(6)) {
        let table = mobius_table(&p);
        for x in p.labels() {
            for y in p.labels() {
                if x == y || !p.less(x.as_str(), y.as_str()).unwrap() {
                    continue;
                }
                let sum: num_bigint::BigInt = p
                    .labels()
                    .iter()
                    .filter(|z| {
                        p.less(x.as_str(), z.as_str()).unwrap() || *z == x
                    })
                    .filter(|z| p.less(z.as_str(), y.as_str()).unwrap() || *z == y)
                    .map(|z| table.get(x.as_str(), z.as_str()).unwrap().unwrap().clone())
                    .sum();
                prop_assert_eq!(sum, num_bigint::BigInt::from(0));
            }
        }
    }

    #[test]
    fn hall_holds_after_adding_bounds(p in arb_poset(5)) {
        let mut labels: Vec<Label> = p.labels().to_vec();
        let mut covers: Vec<(Label, Label)> = p.covers();
        for l in p.labels() {
            covers.push((Label::new("lo"), l.clone()));
            covers.push((l.clone(), Label::new("zz")));
        }
        covers.push((Label::new("lo"), Label::new("zz")));
        labels.extend([Label::new("lo"), Label::new("zz")]);
        let bounded = Poset::new(labels, covers).unwrap();
        let report = hall_check(&bounded).unwrap();
        prop_assert!(report.holds);
    }
}

/// Every complex on at most four vertices: nonevasive complexes are
/// contractible and collapse to a point, and homology is constant along
/// every compiled collapse.
#[test]
fn nonevasive_complexes_are_collapsible() {
    for n in 1..=4 {
        for x in complexes_on(n) {
            let Nonevasiveness::Nonevasive(w) = is_nonevasive(&x, budget()) else {
                continue;
            };
            assert!(verify_witness(&x, &w));
            assert_eq!(x.reduced_euler(), 0, "{x:?}");
            assert_eq!(trimmed(x.z2_betti()), vec![1], "{x:?}");
            let CollapseSearch::Found(seq) = search_collapse(&x, &CollapseTarget::AnyPoint, budget()) else {
                panic!("no collapse for nonevasive {x:?}");
            };
            let mut cur = x.clone();
            for step in &seq.steps {
                cur = apply_collapse(&cur, &step.free, &step.coface).unwrap();
                assert_eq!(cur.reduced_euler(), 0);
                assert_eq!(trimmed(cur.z2_betti()), vec![1]);
            }
            assert!(cur.is_point());
        }
    }
}

/// Lifting works for every reduction of a small complex to a vertex.
#[test]
fn lifted_certificates_verify() {
    let ys = [
        SimplicialComplex::point("y"),
        SimplicialComplex::from_facets([["y", "z"], ["z", "w"]]).unwrap(),
        SimplicialComplex::from_facets([["w", "y"], ["w", "z"], ["y", "z"]]).unwrap(),
    ];
    for x in complexes_on(3) {
        let y2 = SimplicialComplex::point(x.vertices().remove(0));
        let Ok(ReductionSearch::Found(cert)) = search_ne_reduction(&x, &y2, budget()) else {
            continue;
        };
        for y in &ys {
            let lifted = lift_certificate_over_join(&x, &y2, &cert, y).unwrap();
            let (a, b) = (x.join(y).unwrap(), y2.join(y).unwrap());
            assert!(verify_ne_certificate(&a, &b, &lifted));
            assert_eq!(lifted.removed, cert.removed);
        }
    }
}
