use std::collections::HashSet;

use convpart::faces::enumerate_faces;
use convpart::geometry::Instance;
use convpart::io::{parse_instance, parse_solution, write_instance, write_solution};
use convpart::solver::greedy_partition;
use convpart::verify::{verify_partition, Partition, ViolationCode};
use proptest::prelude::*;

fn instance(raw: Vec<(i64, i64)>) -> Option<Instance> {
    let mut seen = HashSet::new();
    let coords: Vec<_> = raw.into_iter().filter(|c| seen.insert(*c)).collect();
    Instance::new("p", &coords).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mutated_partitions_are_rejected(
        raw in prop::collection::vec((0i64..50, 0i64..50), 4..16),
        pick in any::<prop::sample::Index>(),
    ) {
        let Some(inst) = instance(raw) else { return Ok(()) };
        let cat = enumerate_faces(&inst).unwrap();
        let p = greedy_partition(&inst, &cat);
        prop_assert!(verify_partition(&inst, &p).valid());
        let k = pick.index(p.len());

        let mut faces = p.faces.clone();
        faces.remove(k);
        prop_assert!(!verify_partition(&inst, &Partition::new(faces, "m")).valid());

        let mut faces = p.faces.clone();
        faces.push(p.faces[k].clone());
        prop_assert!(!verify_partition(&inst, &Partition::new(faces, "m")).valid());

        if let Some(other) = cat.faces().iter().find(|f| !p.faces.contains(f)) {
            let mut faces = p.faces.clone();
            faces[k] = other.clone();
            prop_assert!(!verify_partition(&inst, &Partition::new(faces, "m")).valid());
        }
    }

    #[test]
    fn files_round_trip(raw in prop::collection::vec((-1000i64..1000, -1000i64..1000), 3..30)) {
        let Some(inst) = instance(raw) else { return Ok(()) };
        let back = parse_instance(&write_instance(&inst), "x").unwrap();
        prop_assert_eq!(back.points(), inst.points());
        let p = greedy_partition(&inst, &enumerate_faces(&inst).unwrap());
        let q = parse_solution(&write_solution(&inst, &p), &inst).unwrap();
        prop_assert_eq!(q.faces, p.faces);
    }
}

#[test]
fn area_and_coverage_violations_are_named() {
    let inst = Instance::new("sq", &[(0, 0), (4, 0), (4, 4), (0, 4)]).unwrap();
    let cat = enumerate_faces(&inst).unwrap();
    let tri = cat.faces().iter().find(|f| f.len() == 3).unwrap().clone();
    let verdict = verify_partition(&inst, &Partition::new(vec![tri], "half"));
    assert!(verdict.has(ViolationCode::AreaMismatch));
    assert!(!verify_partition(&inst, &Partition::new(vec![], "empty")).valid());
}

#[test]
fn plain_text_instances_parse() {
    let inst = parse_instance("3\n0 0\n5 0\n0 5\n", "tri").unwrap();
    assert_eq!(inst.len(), 3);
    assert_eq!(inst.name(), "tri");
    assert!(parse_instance("3\n0 0\n0 0\n1 1\n", "dup").is_err());
    assert!(parse_instance("3\n0 0\n1 1\n2 2\n", "line").is_err());
}
