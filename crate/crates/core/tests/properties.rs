use proptest::prelude::*;

use airy_ensemble::bridge::{sample_brownian_bridge, sample_nonintersecting_bridges, RejectionOptions};
use airy_ensemble::bridge_rep::{sample_bridge_representation, BoundarySamples, BridgeRepConfig};
use airy_ensemble::io::{ensemble_to_csv, read_ensemble_csv};
use airy_ensemble::jam::{build_jam_graph, count_jammed, count_jammed_window, greedy_partial_matching, JamGraph};
use airy_ensemble::{BridgeSpec, GridSpec, LineEnsemble, Path, RngStream};

/// Sorted points on the lattice `Z / 8`, so that translations and
/// power-of-two scalings are exact.
fn lattice_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-400i32..400, 0..40).prop_map(|mut v| {
        v.sort_unstable();
        v.into_iter().map(|i| i as f64 / 8.0).collect()
    })
}

fn random_sorted() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 0..60).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #[test]
    fn jam_count_invariances(pts in lattice_points(), d in 0i32..8, shift in -64i32..64, p in 0i32..4) {
        let delta = d as f64 / 8.0;
        let l = count_jammed(&pts, delta).jammed;
        let rev: Vec<f64> = pts.iter().rev().copied().collect();
        prop_assert_eq!(count_jammed(&rev, delta).jammed, l);
        let moved: Vec<f64> = pts.iter().map(|x| x + shift as f64 / 8.0).collect();
        prop_assert_eq!(count_jammed(&moved, delta).jammed, l);
        let c = 2f64.powi(p - 1);
        let scaled: Vec<f64> = pts.iter().map(|x| c * x).collect();
        prop_assert_eq!(count_jammed(&scaled, c * delta).jammed, l);
        prop_assert!(l <= pts.len());
    }

    #[test]
    fn greedy_matching_bound(pts in random_sorted(), delta in 0.0f64..1.0) {
        let pairs = greedy_partial_matching(&pts, delta);
        let l = count_jammed(&pts, delta).jammed;
        prop_assert!(pairs.len() >= l / 3);
        let mut used = vec![false; pts.len()];
        for (i, j) in pairs {
            prop_assert!(!used[i] && !used[j]);
            prop_assert!((pts[j] - pts[i]).abs() <= delta);
            used[i] = true;
            used[j] = true;
        }
    }

    #[test]
    fn nested_windows(pts in random_sorted(), delta in 0.0f64..1.0, a in 0.0f64..10.0, ell in 0.0f64..10.0, grow in 0.0f64..5.0, extra in 0.0f64..5.0) {
        let inner = count_jammed_window(&pts, a, ell, delta).jammed;
        let outer = count_jammed_window(&pts, a + grow, ell + grow + extra, delta).jammed;
        prop_assert!(inner <= outer + 2);
    }

    #[test]
    fn bridge_endpoints_pinned(start in -5.0f64..5.0, end in -5.0f64..5.0, steps in 1usize..50, var in 0.1f64..4.0, seed in any::<u64>()) {
        let g = GridSpec::new(0.0, 1.5, steps).unwrap();
        let spec = BridgeSpec::new(start, end, g, var).unwrap();
        let p = sample_brownian_bridge(&spec, &mut RngStream::new(seed, 0).rng()).unwrap();
        prop_assert_eq!(p.values[0], start);
        prop_assert_eq!(*p.values.last().unwrap(), end);
    }

    #[test]
    fn conditioned_bridges_ordered(gaps in prop::collection::vec((0.3f64..2.0, 0.3f64..2.0), 1..4), seed in any::<u64>()) {
        let g = GridSpec::new(0.0, 1.0, 8).unwrap();
        let (mut a, mut b) = (0.0, 0.0);
        let mut specs = vec![BridgeSpec::new(a, b, g, 1.0).unwrap()];
        for (da, db) in gaps {
            a -= da;
            b -= db;
            specs.push(BridgeSpec::new(a, b, g, 1.0).unwrap());
        }
        let floor = Path::constant(g, a.min(b) - 0.5);
        let paths = sample_nonintersecting_bridges(&specs, Some(&floor), &RejectionOptions::default(), &mut RngStream::new(seed, 1).rng()).unwrap();
        for j in 0..g.len() {
            for w in paths.windows(2) {
                prop_assert!(w[0].values[j] > w[1].values[j]);
            }
            prop_assert!(paths.last().unwrap().values[j] > floor.values[j]);
        }
    }

    #[test]
    fn csv_and_graph_round_trip(values in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 5), 1..5), delta in 0.0f64..50.0) {
        let g = GridSpec::new(-0.5, 1.25, 4).unwrap();
        let lines: Vec<Path> = values.iter().map(|v| Path::new(g, v.clone(), 2.0, 0.0).unwrap()).collect();
        let e = LineEnsemble::new(g, lines, false).unwrap();
        let csv = ensemble_to_csv(&e);
        let back = read_ensemble_csv(csv.as_bytes(), 2.0).unwrap();
        prop_assert_eq!(&back.lines, &e.lines);
        prop_assert_eq!(ensemble_to_csv(&back), csv);
        let k = e.num_lines();
        let graph = build_jam_graph(&e, k, &g, delta).unwrap();
        prop_assert_eq!(&build_jam_graph(&back, k, &back.grid, delta).unwrap(), &graph);
        prop_assert_eq!(&JamGraph::from_json(&graph.to_json()).unwrap(), &graph);
        prop_assert!(graph.max_component_size() >= 1);
        prop_assert_eq!(graph.components().iter().map(Vec::len).sum::<usize>(), k * 4);
    }

    #[test]
    fn bridge_rep_interpolates_boundary(gaps in prop::collection::vec(prop::collection::vec(0.05f64..1.5, 4), 4), top in prop::collection::vec(-1.0f64..1.0, 4), delta in 0.0f64..0.6, seed in any::<u64>()) {
        let g = GridSpec::new(0.0, 1.0, 3).unwrap();
        let mut values = vec![top.clone()];
        for gap in &gaps[..3] {
            let prev = values.last().unwrap().clone();
            values.push(prev.iter().zip(gap).map(|(p, d)| p - d).collect());
        }
        let boundary = BoundarySamples::new(g, values.clone()).unwrap();
        let config = BridgeRepConfig { ell: 3, t: 1.0, delta, gamma: None, ..BridgeRepConfig::with_defaults(2, 1.0, 1.0).unwrap() };
        let s = sample_bridge_representation(&boundary, &config, RngStream::new(seed, 2)).unwrap();
        for (i, row) in values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert_eq!(s.ensemble.value(i, j * config.substeps), *v);
            }
        }
        // lines sharing a component never cross inside that slab
        for j in 1..=3 {
            for comp in s.graph.slab_components(j) {
                for w in comp.windows(2) {
                    for idx in (j - 1) * config.substeps..=j * config.substeps {
                        prop_assert!(s.ensemble.value(w[0] - 1, idx) > s.ensemble.value(w[1] - 1, idx));
                    }
                }
            }
        }
    }
}
