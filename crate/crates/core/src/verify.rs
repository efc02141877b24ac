//! Independent check that a set of faces is a convex partition.
//!
//! Everything here is combinatorial or integer-exact: edge conservation plus
//! the doubled-area identity. There are no tolerances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::faces::Face;
use crate::geometry::{locate_in_convex, polygon_is_weakly_convex, ArcKey, Instance, Location, Side};

/// A face set claimed to tile the hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub faces: Vec<Face>,
    pub source: String,
}

impl Partition {
    pub fn new(faces: Vec<Face>, source: impl Into<String>) -> Partition {
        Partition {
            faces,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Distinct undirected edges used by the faces.
    pub fn edges(&self, inst: &Instance) -> BTreeSet<ArcKey> {
        self.faces.iter().flat_map(|f| f.arcs(inst)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    NonConvexFace,
    NonEmptyFace,
    ForeignVertex,
    EdgeMismatch,
    AreaMismatch,
    UncoveredPoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, detail: String) {
        self.violations.push(Violation { code, detail });
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid() {
            return write!(f, "valid");
        }
        write!(f, "invalid:")?;
        for v in &self.violations {
            write!(f, " [{:?}] {};", v.code, v.detail)?;
        }
        Ok(())
    }
}

pub fn verify_partition(inst: &Instance, p: &Partition) -> Verdict {
    let mut verdict = Verdict::default();
    let n = inst.len();

    // (1) each face on its own
    let mut sound = vec![true; p.faces.len()];
    for (k, face) in p.faces.iter().enumerate() {
        let ring = face.ring();
        let distinct: BTreeSet<_> = ring.iter().collect();
        if ring.iter().any(|&v| v >= n) || distinct.len() != ring.len() {
            verdict.push(ViolationCode::ForeignVertex, format!("face {k}: {ring:?}"));
            sound[k] = false;
            continue;
        }
        let pts = inst.ring_points(ring);
        if !polygon_is_weakly_convex(&pts) {
            verdict.push(ViolationCode::NonConvexFace, format!("face {k}: {ring:?}"));
            sound[k] = false;
            continue;
        }
        if let Some(q) = inst
            .points()
            .iter()
            .find(|q| !distinct.contains(&q.id) && locate_in_convex(&pts, **q) != Location::Outside)
        {
            verdict.push(
                ViolationCode::NonEmptyFace,
                format!("face {k}: point {} not a vertex but covered", q.id),
            );
            sound[k] = false;
        }
    }

    // (2) edge conservation
    let mut uses: BTreeMap<ArcKey, (usize, usize)> = BTreeMap::new();
    for (face, _) in p.faces.iter().zip(&sound).filter(|(_, &ok)| ok) {
        for arc in face.arcs(inst) {
            let e = uses.entry(arc).or_default();
            match face.side_of(inst, arc) {
                Side::Right => e.0 += 1,
                Side::Left => e.1 += 1,
            }
        }
    }
    for arc in inst.hull_arcs() {
        uses.entry(arc).or_default();
    }
    for (arc, &(r, l)) in &uses {
        let ok = if inst.is_hull_edge(arc.i, arc.j) {
            match inst.interior_side_of_hull_arc(*arc) {
                Side::Right => (r, l) == (1, 0),
                Side::Left => (r, l) == (0, 1),
            }
        } else {
            (r, l) == (1, 1)
        };
        if !ok {
            verdict.push(
                ViolationCode::EdgeMismatch,
                format!("edge ({}, {}): right {r}, left {l}", arc.i, arc.j),
            );
        }
    }

    // (3) area identity
    let total: i128 = p
        .faces
        .iter()
        .zip(&sound)
        .filter(|(_, &ok)| ok)
        .map(|(f, _)| f.area2(inst))
        .sum();
    let hull = inst.hull_area2();
    if total != hull || sound.iter().any(|ok| !ok) {
        verdict.push(
            ViolationCode::AreaMismatch,
            format!("doubled face area {total} vs hull {hull}"),
        );
    }

    // (4) every point used
    let mut covered = vec![false; n];
    for face in &p.faces {
        for &v in face.ring() {
            if v < n {
                covered[v] = true;
            }
        }
    }
    for (id, _) in covered.iter().enumerate().filter(|(_, &c)| !c) {
        verdict.push(ViolationCode::UncoveredPoint, format!("point {id}"));
    }
    verdict
}

/// Euler count `|E| - n + 1` of the subdivision induced by an edge set.
pub fn count_faces_from_edges(inst: &Instance, edges: &BTreeSet<ArcKey>) -> Result<i64> {
    if let Some(missing) = inst.hull_arcs().into_iter().find(|a| !edges.contains(a)) {
        return Err(Error::MissingHullEdge(missing));
    }
    Ok(edges.len() as i64 - inst.len() as i64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(coords: &[(i64, i64)]) -> Instance {
        Instance::new("t", coords).unwrap()
    }

    fn part(rings: &[&[usize]]) -> Partition {
        Partition::new(
            rings.iter().map(|r| Face::from_ccw_ring(r.to_vec())).collect(),
            "test",
        )
    }

    #[test]
    fn triangle_is_valid() {
        let t = inst(&[(0, 0), (2, 0), (0, 2)]);
        assert!(verify_partition(&t, &part(&[&[0, 1, 2]])).valid());
    }

    #[test]
    fn pivot_triangles() {
        let s = inst(&[(0, 0), (3, 0), (0, 3), (1, 1)]);
        let full = part(&[&[0, 1, 3], &[1, 2, 3], &[0, 3, 2]]);
        assert!(verify_partition(&s, &full).valid());
        let missing = part(&[&[0, 1, 3], &[1, 2, 3]]);
        let v = verify_partition(&s, &missing);
        assert!(v.has(ViolationCode::EdgeMismatch));
        assert!(v.has(ViolationCode::AreaMismatch));
    }

    #[test]
    fn both_triangulations_together() {
        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let v = verify_partition(&q, &part(&[&[0, 1, 2], &[0, 2, 3], &[0, 1, 3], &[1, 2, 3]]));
        assert!(v.has(ViolationCode::EdgeMismatch));
        assert!(v.has(ViolationCode::AreaMismatch));
    }

    #[test]
    fn per_face_defects() {
        let s = inst(&[(0, 0), (3, 0), (0, 3), (1, 1)]);
        let v = verify_partition(&s, &part(&[&[0, 1, 2]]));
        assert!(v.has(ViolationCode::NonEmptyFace));
        assert!(v.has(ViolationCode::UncoveredPoint));
        let v = verify_partition(&s, &part(&[&[0, 2, 1]]));
        assert!(v.has(ViolationCode::NonConvexFace));
        let v = verify_partition(&s, &part(&[&[0, 1, 7]]));
        assert!(v.has(ViolationCode::ForeignVertex));
    }

    #[test]
    fn euler_counts() {
        let t = inst(&[(0, 0), (2, 0), (0, 2)]);
        let e: BTreeSet<ArcKey> = t.hull_arcs().into_iter().collect();
        assert_eq!(count_faces_from_edges(&t, &e).unwrap(), 1);

        let q = inst(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let mut e: BTreeSet<ArcKey> = q.hull_arcs().into_iter().collect();
        e.insert(ArcKey::new(&q, 0, 2));
        assert_eq!(count_faces_from_edges(&q, &e).unwrap(), 2);

        let s = inst(&[(0, 0), (3, 0), (0, 3), (1, 1)]);
        let p = part(&[&[0, 1, 3], &[1, 2, 3], &[0, 3, 2]]);
        assert_eq!(count_faces_from_edges(&s, &p.edges(&s)).unwrap(), 3);

        let mut partial: BTreeSet<ArcKey> = q.hull_arcs().into_iter().collect();
        partial.remove(&ArcKey::new(&q, 0, 1));
        assert!(matches!(
            count_faces_from_edges(&q, &partial),
            Err(Error::MissingHullEdge(_))
        ));
    }
}
