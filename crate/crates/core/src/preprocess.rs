//! Removal of dominated faces and detection of mandatory faces.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::faces::{Face, FaceCatalog, FaceId};
use crate::geometry::{polygon_is_weakly_convex, ArcKey, Instance};

#[derive(Clone, Copy, Debug)]
pub struct PruneConfig {
    /// Edge pass only inspects edges with `min(|R|, |L|)` at most this value.
    pub edge_side_limit: usize,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig { edge_side_limit: 3 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PruneStats {
    pub dominated_edges: usize,
    pub removed_by_edges: usize,
    pub removed_by_faces: usize,
    pub removed_by_chords: usize,
}

/// Whether `f1 ∪ f2`, glued along `shared`, is weakly convex.
pub fn union_is_convex(inst: &Instance, f1: &Face, f2: &Face, shared: ArcKey) -> Result<bool> {
    let key = |(a, b): (usize, usize)| (a.min(b), a.max(b));
    let e1: BTreeSet<_> = f1.edges().map(key).collect();
    let common = f2.edges().map(key).filter(|e| e1.contains(e)).count();
    let want = (shared.i.min(shared.j), shared.i.max(shared.j));
    if common != 1 || !e1.contains(&want) || !f2.edges().map(key).any(|e| e == want) {
        return Err(Error::NotAdjacent);
    }
    // f1 traverses the shared edge as a -> b; f2 must traverse it as b -> a.
    let (a, b) = f1.edges().find(|&e| key(e) == want).expect("shared edge present");
    if !f2.edges().any(|e| e == (b, a)) {
        return Err(Error::NotAdjacent);
    }
    let r1 = f1.ring();
    let r2 = f2.ring();
    let start1 = r1.iter().position(|&v| v == b).expect("vertex of f1");
    let start2 = r2.iter().position(|&v| v == a).expect("vertex of f2");
    let mut merged = Vec::with_capacity(r1.len() + r2.len() - 2);
    // b .. a along f1, then the interior of a .. b along f2.
    merged.extend((0..r1.len()).map(|k| r1[(start1 + k) % r1.len()]));
    merged.extend((1..r2.len() - 1).map(|k| r2[(start2 + k) % r2.len()]));
    Ok(polygon_is_weakly_convex(&inst.ring_points(&merged)))
}

fn convex_across(inst: &Instance, cat: &FaceCatalog, f: FaceId, g: FaceId, arc: ArcKey) -> bool {
    union_is_convex(inst, cat.face(f), cat.face(g), arc).unwrap_or(false)
}

/// Shrinks the catalog with three passes run once each, in order: dominated
/// edges, dominated faces, and chords between non-consecutive hull vertices.
/// Side lists are rebuilt between passes.
pub fn prune_dominated(cat: &FaceCatalog, inst: &Instance) -> FaceCatalog {
    prune_dominated_with(cat, inst, PruneConfig::default()).0
}

pub fn prune_dominated_with(
    cat: &FaceCatalog,
    inst: &Instance,
    config: PruneConfig,
) -> (FaceCatalog, PruneStats) {
    let mut stats = PruneStats::default();

    // (a) an edge is dominated when every right/left pair glues convexly.
    let mut keep = vec![true; cat.len()];
    for (&arc, sides) in cat.arcs() {
        if inst.is_hull_edge(arc.i, arc.j) {
            continue;
        }
        if sides.right.len().min(sides.left.len()) > config.edge_side_limit {
            continue;
        }
        let dominated = sides
            .right
            .iter()
            .all(|&r| sides.left.iter().all(|&l| convex_across(inst, cat, r, l, arc)));
        if dominated {
            stats.dominated_edges += 1;
            for &f in sides.right.iter().chain(&sides.left) {
                if keep[f] {
                    keep[f] = false;
                    stats.removed_by_edges += 1;
                }
            }
        }
    }
    let cat = cat.retain(inst, &keep);

    // (b) a face is dominated when, across one of its interior edges, it glues
    // convexly with every face on the other side. With no face on the other
    // side the edge can never be matched, so the face goes as well.
    let keep: Vec<bool> = cat
        .faces()
        .iter()
        .enumerate()
        .map(|(fid, face)| {
            let dominated = face.arcs(inst).any(|arc| {
                if inst.is_hull_edge(arc.i, arc.j) {
                    return false;
                }
                let sides = cat.sides(arc).expect("indexed arc");
                let other = sides.get(face.side_of(inst, arc).opposite());
                other.iter().all(|&g| convex_across(inst, &cat, fid, g, arc))
            });
            !dominated
        })
        .collect();
    stats.removed_by_faces = keep.iter().filter(|&&k| !k).count();
    let cat = cat.retain(inst, &keep);

    // (c) chords of the hull.
    let keep: Vec<bool> = cat
        .faces()
        .iter()
        .map(|face| {
            !face
                .edges()
                .any(|(a, b)| inst.on_hull(a) && inst.on_hull(b) && !inst.is_hull_edge(a, b))
        })
        .collect();
    stats.removed_by_chords = keep.iter().filter(|&&k| !k).count();
    (cat.retain(inst, &keep), stats)
}

/// Faces that are the only candidate on the interior side of some hull edge.
pub fn find_mandatory(cat: &FaceCatalog, inst: &Instance) -> Result<BTreeSet<FaceId>> {
    let mut out = BTreeSet::new();
    for arc in inst.hull_arcs() {
        let side = inst.interior_side_of_hull_arc(arc);
        let inner = cat.sides(arc).map(|s| s.get(side)).unwrap_or(&[]);
        match inner {
            [] => return Err(Error::Infeasible(arc)),
            [only] => {
                out.insert(*only);
            }
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::enumerate_faces;

    fn inst(coords: &[(i64, i64)]) -> Instance {
        Instance::new("t", coords).unwrap()
    }

    fn face(cat: &FaceCatalog, ring: &[usize]) -> Face {
        cat.face(cat.find(ring).expect("face in catalog")).clone()
    }

    #[test]
    fn union_examples() {
        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let cat = enumerate_faces(&q).unwrap();
        let (a, b) = (face(&cat, &[0, 1, 2]), face(&cat, &[0, 2, 3]));
        assert!(union_is_convex(&q, &a, &b, ArcKey::new(&q, 0, 2)).unwrap());

        let s = inst(&[(0, 0), (3, 0), (0, 3), (1, 1)]);
        let cat = enumerate_faces(&s).unwrap();
        let (a, b) = (face(&cat, &[0, 1, 3]), face(&cat, &[0, 3, 2]));
        assert!(!union_is_convex(&s, &a, &b, ArcKey::new(&s, 0, 3)).unwrap());

        // (1,0) becomes a straight vertex of the merged triangle.
        let t = inst(&[(0, 0), (1, 0), (2, 0), (0, 2)]);
        let cat = enumerate_faces(&t).unwrap();
        let (a, b) = (face(&cat, &[0, 1, 3]), face(&cat, &[1, 2, 3]));
        assert!(union_is_convex(&t, &a, &b, ArcKey::new(&t, 1, 3)).unwrap());
    }

    #[test]
    fn union_requires_single_shared_edge() {
        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let cat = enumerate_faces(&q).unwrap();
        let (a, b) = (face(&cat, &[0, 1, 2]), face(&cat, &[0, 1, 3]));
        // same side of the shared edge
        assert!(matches!(
            union_is_convex(&q, &a, &b, ArcKey::new(&q, 0, 1)),
            Err(Error::NotAdjacent)
        ));
        let c = face(&cat, &[0, 2, 3]);
        assert!(matches!(
            union_is_convex(&q, &a, &c, ArcKey::new(&q, 0, 1)),
            Err(Error::NotAdjacent)
        ));
    }

    #[test]
    fn prune_examples() {
        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let pp = prune_dominated(&enumerate_faces(&q).unwrap(), &q);
        assert_eq!(
            pp.canonical_set().into_iter().collect::<Vec<_>>(),
            vec![vec![0, 1, 2, 3]]
        );

        let s = inst(&[(0, 0), (3, 0), (0, 3), (1, 1)]);
        assert_eq!(prune_dominated(&enumerate_faces(&s).unwrap(), &s).len(), 3);

        let t = inst(&[(0, 0), (2, 0), (0, 2)]);
        assert_eq!(prune_dominated(&enumerate_faces(&t).unwrap(), &t).len(), 1);
    }

    #[test]
    fn mandatory_examples() {
        let t = inst(&[(0, 0), (2, 0), (0, 2)]);
        let cat = enumerate_faces(&t).unwrap();
        assert_eq!(find_mandatory(&cat, &t).unwrap().len(), 1);

        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let pp = prune_dominated(&enumerate_faces(&q).unwrap(), &q);
        let m = find_mandatory(&pp, &q).unwrap();
        assert_eq!(m.iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn mandatory_triangle_against_hull_edge() {
        // Every other point lies beyond both lines jk and ik, so the
        // triangle (i, j, k) is the only face touching the hull edge ij.
        let p = inst(&[(0, 0), (6, 0), (3, 1), (0, 5), (6, 5), (3, 4), (1, 3)]);
        let cat = enumerate_faces(&p).unwrap();
        let arc = ArcKey::new(&p, 0, 1);
        let side = p.interior_side_of_hull_arc(arc);
        let inner = cat.sides(arc).unwrap().get(side);
        assert_eq!(inner.len(), 1);
        assert_eq!(cat.face(inner[0]).ring(), &[0, 1, 2]);
        let m = find_mandatory(&cat, &p).unwrap();
        assert!(m.contains(&inner[0]));
    }

    #[test]
    fn missing_hull_face_is_infeasible() {
        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let empty = FaceCatalog::from_faces(&q, Vec::new());
        assert!(matches!(find_mandatory(&empty, &q), Err(Error::Infeasible(_))));
    }
}
