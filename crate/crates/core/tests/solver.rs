use std::collections::HashSet;

use convpart::bounds::{degree_lower_bounds, euler_bound};
use convpart::faces::enumerate_faces;
use convpart::geometry::Instance;
use convpart::pipeline::{solve_instance, PipelineOptions};
use convpart::preprocess::{find_mandatory, prune_dominated};
use convpart::solver::{enumerate_partitions, exact_cover_oracle, greedy_partition, IpStatus, Limits};
use convpart::verify::{count_faces_from_edges, verify_partition, Partition};
use proptest::prelude::*;

fn instance(raw: Vec<(i64, i64)>) -> Option<Instance> {
    let mut seen = HashSet::new();
    let coords: Vec<_> = raw.into_iter().filter(|c| seen.insert(*c)).collect();
    Instance::new("p", &coords).ok()
}

fn points(grid: i64, max: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((0..=grid, 0..=grid), 3..=max)
}

fn check_solver(inst: &Instance) -> Result<(), TestCaseError> {
    let full = enumerate_faces(inst).unwrap();
    let oracle = exact_cover_oracle(inst, &full, &Limits::default()).unwrap();
    prop_assert_eq!(oracle.status, IpStatus::Optimal);
    for preprocess in [true, false] {
        let opts = PipelineOptions {
            preprocess,
            ..PipelineOptions::default()
        };
        let r = solve_instance(inst, &opts).unwrap();
        prop_assert_eq!(r.status, IpStatus::Optimal);
        prop_assert_eq!(r.objective, oracle.objective);
        let z = r.objective.unwrap();
        prop_assert!(r.euler <= r.lp_ceil && r.lp_ceil <= z && z <= r.greedy as i64);
        let p = r.partition.as_ref().unwrap();
        prop_assert!(verify_partition(inst, p).valid(), "{}", verify_partition(inst, p));
        prop_assert_eq!(count_faces_from_edges(inst, &p.edges(inst)).unwrap(), z);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn solver_matches_oracle(raw in points(1000, 10)) {
        if let Some(inst) = instance(raw) {
            check_solver(&inst)?;
        }
    }

    // Small grids force collinear points, flat vertices and collinear hull runs.
    #[test]
    fn solver_matches_oracle_with_collinear_points(raw in points(4, 10)) {
        if let Some(inst) = instance(raw) {
            check_solver(&inst)?;
        }
    }

    #[test]
    fn greedy_partition_is_valid(raw in points(5, 25)) {
        if let Some(inst) = instance(raw) {
            let cat = enumerate_faces(&inst).unwrap();
            let p = greedy_partition(&inst, &cat);
            prop_assert!(verify_partition(&inst, &p).valid(), "{}", verify_partition(&inst, &p));
        }
    }

    #[test]
    fn pruning_keeps_an_optimum_and_mandatory_faces(raw in points(8, 9)) {
        let Some(inst) = instance(raw) else { return Ok(()) };
        let full = enumerate_faces(&inst).unwrap();
        let pruned = prune_dominated(&full, &inst);
        let all = full.canonical_set();
        prop_assert!(pruned.canonical_set().is_subset(&all));
        let tilings = enumerate_partitions(&inst, &full, usize::MAX).unwrap();
        let best = tilings.iter().map(Vec::len).min().unwrap();
        let optimal: Vec<_> = tilings.iter().filter(|t| t.len() == best).collect();
        let survives = |t: &&&Vec<usize>| t.iter().all(|&f| pruned.find(full.face(f).ring()).is_some());
        prop_assert!(optimal.iter().any(|t| survives(&t)));
        for m in find_mandatory(&pruned, &inst).unwrap() {
            let ring = pruned.face(m).ring();
            prop_assert!(optimal.iter().all(|t| t.iter().any(|&f| full.face(f).ring() == ring)));
        }
        // Bounds hold for every optimal tiling.
        let db = degree_lower_bounds(&inst);
        prop_assert!(euler_bound(&inst, &db) <= best as i64);
        for t in &optimal {
            let p = Partition::new(t.iter().map(|&f| full.face(f).clone()).collect(), "t");
            let edges = p.edges(&inst);
            for q in 0..inst.len() {
                let degree = edges.iter().filter(|a| a.i == q || a.j == q).count() as u32;
                prop_assert!(degree >= db.get(q), "point {} degree {} < {}", q, degree, db.get(q));
            }
        }
    }
}

#[test]
fn solves_are_deterministic() {
    let inst = convpart::io::generate_uniform(25, 11, convpart::io::DEFAULT_GRID).unwrap();
    let a = solve_instance(&inst, &PipelineOptions::default()).unwrap();
    let b = solve_instance(&inst, &PipelineOptions::default()).unwrap();
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.partition, b.partition);
}

#[test]
fn hexagon_with_two_interior_points() {
    let inst = Instance::new(
        "hex",
        &[(0, 4), (3, 0), (9, 0), (12, 4), (9, 8), (3, 8), (5, 3), (7, 5)],
    )
    .unwrap();
    let full = enumerate_faces(&inst).unwrap();
    let oracle = exact_cover_oracle(&inst, &full, &Limits::default()).unwrap();
    let r = solve_instance(&inst, &PipelineOptions::default()).unwrap();
    assert_eq!(oracle.objective, Some(4));
    assert_eq!(r.objective, Some(4));
    // Aligned interior points let a single chord split the hexagon in two.
    let aligned = Instance::new(
        "hex",
        &[(0, 4), (3, 0), (9, 0), (12, 4), (9, 8), (3, 8), (5, 4), (7, 4)],
    )
    .unwrap();
    assert_eq!(
        solve_instance(&aligned, &PipelineOptions::default())
            .unwrap()
            .objective,
        Some(2)
    );
}
