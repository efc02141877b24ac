//! Enumeration of empty weakly convex polygons and their per-arc side index.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    convex_hull, locate_in_convex, orient, polygon_area2, ArcKey, Instance, Location, Point, PointId, Side,
};

pub type FaceId = usize;

pub const DEFAULT_FACE_CAP: usize = 10_000_000;
pub const BRUTE_FORCE_CAP: usize = 16;

/// An empty weakly convex polygon, stored as a counterclockwise ring that
/// starts at its smallest point id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    ring: Vec<PointId>,
}

impl Face {
    /// Rotates a counterclockwise ring into canonical form.
    pub fn from_ccw_ring(mut ring: Vec<PointId>) -> Face {
        let start = ring
            .iter()
            .enumerate()
            .min_by_key(|&(_, &id)| id)
            .map(|(k, _)| k)
            .unwrap_or(0);
        ring.rotate_left(start);
        Face { ring }
    }

    pub fn ring(&self) -> &[PointId] {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn contains_vertex(&self, id: PointId) -> bool {
        self.ring.contains(&id)
    }

    /// Boundary edges as directed counterclockwise pairs.
    pub fn edges(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        let n = self.ring.len();
        (0..n).map(move |k| (self.ring[k], self.ring[(k + 1) % n]))
    }

    pub fn arcs<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = ArcKey> + 'a {
        self.edges().map(move |(a, b)| ArcKey::new(inst, a, b))
    }

    pub fn points(&self, inst: &Instance) -> Vec<Point> {
        inst.ring_points(&self.ring)
    }

    pub fn area2(&self, inst: &Instance) -> i128 {
        polygon_area2(&self.points(inst))
    }

    /// Side of `arc` occupied by this face. The arc must be one of its edges.
    pub fn side_of(&self, inst: &Instance, arc: ArcKey) -> Side {
        let (pi, pj) = (inst.point(arc.i), inst.point(arc.j));
        let s = self
            .ring
            .iter()
            .map(|&k| orient(pi, pj, inst.point(k)))
            .find(|&s| s != 0)
            .expect("face with positive area");
        Side::from_sign(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SideLists {
    pub right: Vec<FaceId>,
    pub left: Vec<FaceId>,
}

impl SideLists {
    pub fn get(&self, side: Side) -> &[FaceId] {
        match side {
            Side::Right => &self.right,
            Side::Left => &self.left,
        }
    }

    fn get_mut(&mut self, side: Side) -> &mut Vec<FaceId> {
        match side {
            Side::Right => &mut self.right,
            Side::Left => &mut self.left,
        }
    }
}

/// Candidate faces plus the `R(i, j)` / `L(i, j)` index for every arc used
/// by at least one face.
#[derive(Clone, Debug)]
pub struct FaceCatalog {
    n_points: usize,
    faces: Vec<Face>,
    sides: BTreeMap<ArcKey, SideLists>,
}

impl FaceCatalog {
    /// Builds the side index; face ids are positions in `faces`.
    pub fn from_faces(inst: &Instance, faces: Vec<Face>) -> FaceCatalog {
        let mut sides: BTreeMap<ArcKey, SideLists> = BTreeMap::new();
        for (fid, face) in faces.iter().enumerate() {
            for arc in face.arcs(inst) {
                let side = face.side_of(inst, arc);
                sides.entry(arc).or_default().get_mut(side).push(fid);
            }
        }
        FaceCatalog {
            n_points: inst.len(),
            faces,
            sides,
        }
    }

    /// Catalog restricted to the faces with `keep[id]`, renumbered in order.
    pub fn retain(&self, inst: &Instance, keep: &[bool]) -> FaceCatalog {
        let faces = self
            .faces
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f.clone())
            .collect();
        FaceCatalog::from_faces(inst, faces)
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id]
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Arcs carrying at least one face, in key order.
    pub fn arcs(&self) -> impl Iterator<Item = (&ArcKey, &SideLists)> {
        self.sides.iter()
    }

    pub fn sides(&self, arc: ArcKey) -> Option<&SideLists> {
        self.sides.get(&arc)
    }

    /// `(R(i, j), L(i, j))` for an arc; empty lists if no face uses it.
    pub fn side_lists(&self, arc: ArcKey) -> Result<(&[FaceId], &[FaceId])> {
        if arc.i >= self.n_points || arc.j >= self.n_points || arc.i == arc.j {
            return Err(Error::UnknownArc(arc));
        }
        Ok(match self.sides.get(&arc) {
            Some(s) => (&s.right, &s.left),
            None => (&[], &[]),
        })
    }

    /// All faces using the edge, right side first.
    pub fn uses_edge(&self, arc: ArcKey) -> Vec<FaceId> {
        self.sides
            .get(&arc)
            .map(|s| s.right.iter().chain(&s.left).copied().collect())
            .unwrap_or_default()
    }

    /// Face ids indexed by the canonical ring, for set comparisons.
    pub fn canonical_set(&self) -> std::collections::BTreeSet<Vec<PointId>> {
        self.faces.iter().map(|f| f.ring.clone()).collect()
    }

    pub fn find(&self, ring: &[PointId]) -> Option<FaceId> {
        self.faces.iter().position(|f| f.ring == ring)
    }
}

/// Enumerates every empty weakly convex polygon over the instance points.
///
/// Each face is generated once from its lexicographically smallest vertex
/// (the pivot). Points lying after the pivot are sorted by angle around it and
/// grouped into rays; a face is the pivot followed by a convex chain through
/// these rays whose fan triangles are empty. Points of the first and last ray
/// strictly between the pivot and the chain end become straight vertices.
pub fn enumerate_faces(inst: &Instance) -> Result<FaceCatalog> {
    enumerate_faces_capped(inst, DEFAULT_FACE_CAP)
}

pub fn enumerate_faces_capped(inst: &Instance, cap: usize) -> Result<FaceCatalog> {
    let counter = AtomicUsize::new(0);
    let per_pivot: Vec<Option<Vec<Vec<PointId>>>> = (0..inst.len())
        .into_par_iter()
        .map(|p| PivotEnumerator::new(inst, p).run(&counter, cap))
        .collect();
    let mut faces = Vec::with_capacity(counter.load(AtomicOrdering::Relaxed));
    for rings in per_pivot {
        let rings = rings.ok_or(Error::CatalogOverflow { cap })?;
        faces.extend(rings.into_iter().map(Face::from_ccw_ring));
    }
    if faces.len() > cap {
        return Err(Error::CatalogOverflow { cap });
    }
    Ok(FaceCatalog::from_faces(inst, faces))
}

struct PivotEnumerator {
    pivot: Point,
    /// Candidates sorted by angle, then by distance from the pivot.
    cand: Vec<Point>,
    ray: Vec<usize>,
    /// Rank of each candidate along its ray, 0 for the nearest.
    depth: Vec<usize>,
    ray_start: Vec<usize>,
    /// `empty[a * k + b]`: the closed fan triangle (pivot, a, b) holds no point
    /// whose direction lies strictly between the rays of `a` and `b`.
    empty: Vec<bool>,
}

impl PivotEnumerator {
    fn new(inst: &Instance, p: PointId) -> Self {
        let pivot = inst.point(p);
        let mut cand: Vec<Point> = inst
            .points()
            .iter()
            .copied()
            .filter(|q| pivot.lex_cmp(q) == Ordering::Less)
            .collect();
        cand.sort_by(|a, b| match orient(pivot, *a, *b) {
            1 => Ordering::Less,
            -1 => Ordering::Greater,
            _ => dist2(pivot, *a).cmp(&dist2(pivot, *b)),
        });
        let k = cand.len();
        let mut ray = vec![0; k];
        let mut depth = vec![0; k];
        let mut ray_start = Vec::new();
        for t in 0..k {
            if t > 0 && orient(pivot, cand[t - 1], cand[t]) == 0 {
                ray[t] = ray[t - 1];
                depth[t] = depth[t - 1] + 1;
            } else {
                ray[t] = ray_start.len();
                ray_start.push(t);
            }
        }
        let mut empty = vec![false; k * k];
        for a in 0..k {
            for b in a + 1..k {
                if ray[b] == ray[a] {
                    continue;
                }
                let lo = ray_start.get(ray[a] + 1).copied().unwrap_or(k);
                let hi = ray_start[ray[b]];
                empty[a * k + b] = (lo..hi).all(|q| orient(cand[a], cand[b], cand[q]) < 0);
            }
        }
        PivotEnumerator {
            pivot,
            cand,
            ray,
            depth,
            ray_start,
            empty,
        }
    }

    fn run(&self, counter: &AtomicUsize, cap: usize) -> Option<Vec<Vec<PointId>>> {
        let k = self.cand.len();
        let mut out = Vec::new();
        let mut chain: Vec<usize> = Vec::new();
        for u in 0..k {
            // First ray: every point between the pivot and `u` is a straight vertex.
            chain.clear();
            chain.extend(self.ray_start[self.ray[u]]..=u);
            for v in u + 1..k {
                if self.ray[v] != self.ray[u]
                    && self.empty[u * k + v]
                    && !self.extend(&mut chain, v, &mut out, counter, cap)
                {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Appends `v` to the chain, emits the face closed at `v`, and recurses.
    /// Returns false when the cap is exceeded.
    fn extend(
        &self,
        chain: &mut Vec<usize>,
        v: usize,
        out: &mut Vec<Vec<PointId>>,
        counter: &AtomicUsize,
        cap: usize,
    ) -> bool {
        let k = self.cand.len();
        let cur = *chain.last().expect("non-empty chain");
        let prev = if chain.len() >= 2 {
            self.cand[chain[chain.len() - 2]]
        } else {
            self.pivot
        };
        if orient(prev, self.cand[cur], self.cand[v]) < 0 {
            return true;
        }
        if counter.fetch_add(1, AtomicOrdering::Relaxed) >= cap {
            return false;
        }
        let mut ring = Vec::with_capacity(chain.len() + 2 + self.depth[v]);
        ring.push(self.pivot.id);
        ring.extend(chain.iter().map(|&c| self.cand[c].id));
        // Last ray, walked back towards the pivot.
        ring.extend((self.ray_start[self.ray[v]]..=v).rev().map(|c| self.cand[c].id));
        out.push(ring);

        if self.depth[v] == 0 {
            chain.push(v);
            for w in v + 1..k {
                if self.ray[w] != self.ray[v]
                    && self.empty[v * k + w]
                    && !self.extend(chain, w, out, counter, cap)
                {
                    chain.pop();
                    return false;
                }
            }
            chain.pop();
        }
        true
    }
}

fn dist2(a: Point, b: Point) -> i128 {
    let dx = (a.x - b.x) as i128;
    let dy = (a.y - b.y) as i128;
    dx * dx + dy * dy
}

/// Reference enumeration over all vertex subsets; for small instances only.
pub fn brute_force_faces(inst: &Instance) -> Result<FaceCatalog> {
    let n = inst.len();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut faces = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() < 3 {
            continue;
        }
        let chosen: Vec<Point> = (0..n)
            .filter(|&k| mask & (1 << k) != 0)
            .map(|k| inst.point(k))
            .collect();
        let Ok((ring, inner)) = convex_hull(&chosen) else {
            continue;
        };
        if !inner.is_empty() {
            continue;
        }
        let ring_pts = inst.ring_points(&ring);
        let blocked = (0..n)
            .filter(|k| mask & (1 << k) == 0)
            .any(|k| locate_in_convex(&ring_pts, inst.point(k)) != Location::Outside);
        if !blocked {
            faces.push(Face::from_ccw_ring(ring));
        }
    }
    faces.sort();
    Ok(FaceCatalog::from_faces(inst, faces))
}
