use std::collections::BTreeMap;

use compeval_core::integrators::compat_extended_poset;
use compeval_core::multiset::Metric;
use compeval_core::system::{
    enumerate_compositions, evaluate, rank, validate_model, Da, DaEstimate, EstimateKind, Evaluation, Method, Reduction,
};
use compeval_core::{
    CompatTable, EstimateValue, IntegrationTable, MultisetScale, OrdinalScale, QualityVector, QuantScale, Scale,
    ScaleSet, SystemModel, SystemNode, TableInput,
};
use proptest::prelude::*;

/// Flat model: leaves `C0..`, DAs `C0a, C0b, ..` with quantitative and
/// ordinal estimates.
fn flat_model(das_per_leaf: &[usize], quant: &[f64], levels: &[u32]) -> SystemModel {
    let mut scales = ScaleSet::new();
    scales.insert("q", Scale::Quantitative(QuantScale::new(3.0, 1.0).unwrap()));
    scales.insert("o3", Scale::Ordinal(OrdinalScale::new(3).unwrap()));
    let mut das = BTreeMap::new();
    let mut leaves = vec![];
    let mut k = 0;
    for (i, &n) in das_per_leaf.iter().enumerate() {
        let mut ids = vec![];
        for j in 0..n {
            let id = format!("C{i}{}", (b'a' + j as u8) as char);
            let mut estimates = BTreeMap::new();
            estimates.insert(
                EstimateKind::Quantitative,
                DaEstimate {
                    scale: "q".into(),
                    value: EstimateValue::Real(quant[k % quant.len()]),
                },
            );
            estimates.insert(
                EstimateKind::Ordinal,
                DaEstimate {
                    scale: "o3".into(),
                    value: EstimateValue::Level(levels[k % levels.len()]),
                },
            );
            das.insert(
                id.clone(),
                Da {
                    id: id.clone(),
                    estimates,
                },
            );
            ids.push(id);
            k += 1;
        }
        leaves.push(SystemNode::leaf(format!("C{i}"), ids));
    }
    SystemModel {
        name: "random".into(),
        notes: vec![],
        scales,
        das,
        root: SystemNode::internal("S", leaves),
        compat: None,
        tables: BTreeMap::new(),
        methods: BTreeMap::new(),
        thresholds: BTreeMap::new(),
        ordinal_maps: BTreeMap::new(),
        topsis: BTreeMap::new(),
        compositions: vec![],
        metric: Metric::CumulativeL1,
    }
}

fn shape() -> impl Strategy<Value = (Vec<usize>, Vec<f64>, Vec<u32>)> {
    (
        prop::collection::vec(1usize..4, 1..5),
        prop::collection::vec(1.0f64..3.0, 1..12),
        prop::collection::vec(1u32..4, 1..12),
    )
}

proptest! {
    #[test]
    fn enumerated_compositions_are_well_formed((per_leaf, q, l) in shape(), limit in 1usize..100) {
        let m = flat_model(&per_leaf, &q, &l);
        prop_assert!(validate_model(&m).is_ok());
        let total: usize = per_leaf.iter().product();
        let e = enumerate_compositions(&m, limit);
        prop_assert_eq!(e.compositions.len(), total.min(limit));
        prop_assert_eq!(e.truncated, total > limit);
        let leaves = m.root.leaves();
        for c in &e.compositions {
            prop_assert_eq!(c.len(), leaves.len());
            for leaf in &leaves {
                let da = c.da_for(&leaf.id).unwrap();
                prop_assert!(leaf.das().iter().any(|d| d == da));
            }
        }
        let mut dedup = e.compositions.clone();
        dedup.sort_by_key(|c| c.label());
        dedup.dedup();
        prop_assert_eq!(dedup.len(), e.compositions.len());
    }

    #[test]
    fn additive_rank_matches_sorting((per_leaf, q, l) in shape()) {
        let m = flat_model(&per_leaf, &q, &l);
        let comps: Vec<_> = enumerate_compositions(&m, 200)
            .compositions
            .into_iter()
            .enumerate()
            .map(|(i, c)| (format!("c{i}"), c))
            .collect();
        let r = rank(&m, &comps, Method::Additive, Reduction::Layers, None).unwrap();
        let sums: Vec<f64> = comps
            .iter()
            .map(|(_, c)| {
                c.das()
                    .map(|d| match m.das[d].estimates[&EstimateKind::Quantitative].value {
                        EstimateValue::Real(x) => x,
                        _ => unreachable!(),
                    })
                    .sum()
            })
            .collect();
        // lower is better on this scale; equal sums share a layer
        let mut distinct = sums.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        for (i, e) in r.entries.iter().enumerate() {
            let want = distinct.iter().position(|&x| x == sums[i]).unwrap() + 1;
            prop_assert_eq!(e.priority, want);
        }
        for w in r.order.windows(2) {
            prop_assert!(sums[w[0]] <= sums[w[1]]);
            if sums[w[0]] == sums[w[1]] {
                prop_assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn evaluation_is_repeatable((per_leaf, q, l) in shape()) {
        let m = flat_model(&per_leaf, &q, &l);
        for c in enumerate_compositions(&m, 20).compositions {
            for method in [Method::Additive, Method::CountProfile] {
                let a = serde_json::to_string(&evaluate(&m, &c, method).unwrap()).unwrap();
                let b = serde_json::to_string(&evaluate(&m, &c, method).unwrap()).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn identity_tables_pass_leaf_levels_through(levels in prop::collection::vec(1u32..4, 1..4)) {
        let n = levels.len();
        let mut m = flat_model(&vec![1; n], &[1.0], &levels);
        // wrap each leaf in its own node carrying an identity table
        let SystemNode { kind: compeval_core::system::NodeKind::Internal { children }, .. } = m.root.clone() else {
            unreachable!()
        };
        let o3 = OrdinalScale::new(3).unwrap();
        let wrapped = children
            .into_iter()
            .map(|leaf| {
                let id = format!("W{}", leaf.id);
                m.tables.insert(id.clone(), IntegrationTable::new(vec![TableInput::full(o3)], o3, (1..=3).map(|l| (vec![l], l))).unwrap());
                m.methods.insert(id.clone(), Method::Tables);
                SystemNode::internal(id, vec![leaf])
            })
            .collect();
        m.root = SystemNode::internal("S", wrapped);
        m.methods.insert("S".into(), Method::CountProfile);
        let comp = enumerate_compositions(&m, 1).compositions.remove(0);
        let Evaluation::Counts { eta } = evaluate(&m, &comp, None).unwrap() else { panic!() };
        let mut want = vec![0u32; 3];
        for l in &levels {
            want[*l as usize - 1] += 1;
        }
        prop_assert_eq!(eta, want);
    }
}

#[test]
fn all_best_quality_vector_is_the_top_of_the_extended_poset() {
    for n in 1..=4usize {
        for nu in 1..=3 {
            let mut m = flat_model(&vec![2; n], &[1.0], &[1, 2]);
            let mut compat = CompatTable::new(nu, false);
            let ids: Vec<String> = m.das.keys().cloned().collect();
            for a in &ids {
                for b in &ids {
                    if a[..2] != b[..2] {
                        compat.insert(a, b, if a.ends_with('a') && b.ends_with('a') { nu } else { 1 });
                    }
                }
            }
            m.compat = Some(compat);
            let comp = enumerate_compositions(&m, 1).compositions.remove(0);
            let Evaluation::Quality { w, eta } = evaluate(&m, &comp, Method::QualityVector).unwrap() else {
                panic!()
            };
            let top = compat_extended_poset(&MultisetScale::new(3, n as u32).unwrap(), nu).elements()[0].clone();
            assert_eq!(QualityVector::new(w, eta), top, "n={n} nu={nu}");
        }
    }
}

#[test]
fn validator_reports_paths() {
    let mut m = flat_model(&[2, 2], &[1.0], &[1]);
    m.das
        .get_mut("C0a")
        .unwrap()
        .estimates
        .get_mut(&EstimateKind::Ordinal)
        .unwrap()
        .value = EstimateValue::Level(5);
    m.root = SystemNode::internal("S", vec![m.root.children()[0].clone(), SystemNode::leaf("E", vec![])]);
    let r = validate_model(&m);
    let msgs: Vec<String> = r.violations.iter().map(|v| v.to_string()).collect();
    assert!(msgs.iter().any(|s| s.starts_with("das/C0a/ordinal:")), "{msgs:?}");
    assert!(msgs.iter().any(|s| s == "S/E: leaf has no DAs"), "{msgs:?}");
}
