//! Exact integer geometric kernel.
//!
//! Coordinates are 32-bit signed integers stored as `i64`; every cross product
//! is evaluated in `i128`, so no predicate in this module ever rounds.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type PointId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub id: PointId,
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub fn new(id: PointId, x: i64, y: i64) -> Self {
        Point { id, x, y }
    }

    /// Lexicographic (x, then y) comparison used to orient arcs.
    #[inline]
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        (self.x, self.y).cmp(&(other.x, other.y))
    }
}

/// Doubled signed area of the triangle `pqr`.
#[inline]
pub fn cross(p: Point, q: Point, r: Point) -> i128 {
    let (ax, ay) = ((q.x - p.x) as i128, (q.y - p.y) as i128);
    let (bx, by) = ((r.x - p.x) as i128, (r.y - p.y) as i128);
    ax * by - ay * bx
}

/// Sign of `(q - p) x (r - p)`: `+1` counterclockwise, `0` collinear, `-1` clockwise.
#[inline]
pub fn orient(p: Point, q: Point, r: Point) -> i32 {
    match cross(p, q, r).cmp(&0) {
        Ordering::Greater => 1,
        Ordering::Equal => 0,
        Ordering::Less => -1,
    }
}

#[inline]
fn dot(p: Point, q: Point, r: Point) -> i128 {
    ((q.x - p.x) as i128) * ((r.x - p.x) as i128) + ((q.y - p.y) as i128) * ((r.y - p.y) as i128)
}

/// `q` lies on the open segment `ab`.
#[inline]
pub fn strictly_between(a: Point, q: Point, b: Point) -> bool {
    orient(a, b, q) == 0 && dot(q, a, b) < 0
}

/// Side of a point relative to an arc. `Right` is the `cross >= 0` branch,
/// so collinear points are classified as `Right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        }
    }

    /// Side for a point strictly off the arc's line.
    #[inline]
    pub fn from_sign(sign: i32) -> Side {
        if sign >= 0 {
            Side::Right
        } else {
            Side::Left
        }
    }
}

/// An edge `{i, j}` oriented so that `i` is lexicographically smaller than `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcKey {
    pub i: PointId,
    pub j: PointId,
}

impl ArcKey {
    pub fn new(inst: &Instance, a: PointId, b: PointId) -> ArcKey {
        let (pa, pb) = (inst.point(a), inst.point(b));
        if pa.lex_cmp(&pb) == Ordering::Less {
            ArcKey { i: a, j: b }
        } else {
            ArcKey { i: b, j: a }
        }
    }
}

/// An immutable point set together with its hull boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    name: String,
    points: Vec<Point>,
    hull_ring: Vec<PointId>,
    hull_pos: Vec<Option<usize>>,
    interior: Vec<PointId>,
}

pub const COORD_MIN: i64 = i32::MIN as i64;
pub const COORD_MAX: i64 = i32::MAX as i64;

impl Instance {
    /// Builds an instance; ids are assigned in input order.
    pub fn new(name: impl Into<String>, coords: &[(i64, i64)]) -> Result<Instance, Error> {
        for (id, &(x, y)) in coords.iter().enumerate() {
            if !(COORD_MIN..=COORD_MAX).contains(&x) || !(COORD_MIN..=COORD_MAX).contains(&y) {
                return Err(Error::CoordinateOverflow { id, x, y });
            }
        }
        let mut seen: HashMap<(i64, i64), PointId> = HashMap::with_capacity(coords.len());
        for (id, &c) in coords.iter().enumerate() {
            if let Some(&first) = seen.get(&c) {
                return Err(Error::DuplicatePoint { first, second: id });
            }
            seen.insert(c, id);
        }
        let points: Vec<Point> = coords
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Point::new(id, x, y))
            .collect();
        let (hull_ring, interior) = convex_hull(&points)?;
        let mut hull_pos = vec![None; points.len()];
        for (k, &id) in hull_ring.iter().enumerate() {
            hull_pos[id] = Some(k);
        }
        Ok(Instance {
            name: name.into(),
            points,
            hull_ring,
            hull_pos,
            interior,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn point(&self, id: PointId) -> Point {
        self.points[id]
    }

    /// Counterclockwise boundary ring, collinear boundary points included.
    pub fn hull_ring(&self) -> &[PointId] {
        &self.hull_ring
    }

    pub fn interior_ids(&self) -> &[PointId] {
        &self.interior
    }

    pub fn on_hull(&self, id: PointId) -> bool {
        self.hull_pos[id].is_some()
    }

    /// Position of `id` on the hull ring.
    pub fn hull_position(&self, id: PointId) -> Option<usize> {
        self.hull_pos[id]
    }

    /// `{a, b}` is a boundary edge, i.e. consecutive on the hull ring.
    pub fn is_hull_edge(&self, a: PointId, b: PointId) -> bool {
        match (self.hull_pos[a], self.hull_pos[b]) {
            (Some(pa), Some(pb)) => {
                let h = self.hull_ring.len();
                (pa + 1) % h == pb || (pb + 1) % h == pa
            }
            _ => false,
        }
    }

    /// Hull edges as arcs, in ring order.
    pub fn hull_arcs(&self) -> Vec<ArcKey> {
        let h = self.hull_ring.len();
        (0..h)
            .map(|k| ArcKey::new(self, self.hull_ring[k], self.hull_ring[(k + 1) % h]))
            .collect()
    }

    /// Side of the arc on which the hull interior lies.
    pub fn interior_side_of_hull_arc(&self, arc: ArcKey) -> Side {
        // Some hull vertex is off the arc's line since the instance is not collinear.
        let (pi, pj) = (self.point(arc.i), self.point(arc.j));
        let s = self
            .hull_ring
            .iter()
            .map(|&k| orient(pi, pj, self.point(k)))
            .find(|&s| s != 0)
            .expect("non-degenerate hull");
        Side::from_sign(s)
    }

    /// Doubled area of the hull polygon.
    pub fn hull_area2(&self) -> i128 {
        let ring: Vec<Point> = self.hull_ring.iter().map(|&k| self.point(k)).collect();
        polygon_area2(&ring)
    }

    pub fn ring_points(&self, ids: &[PointId]) -> Vec<Point> {
        ids.iter().map(|&k| self.point(k)).collect()
    }
}

/// Side of `k` relative to `arc`, using the `cross >= 0 => Right` convention.
pub fn side_of_arc(inst: &Instance, arc: ArcKey, k: PointId) -> Result<Side, Error> {
    if k == arc.i || k == arc.j {
        return Err(Error::EndpointOfArc { arc, point: k });
    }
    if k >= inst.len() || arc.i >= inst.len() || arc.j >= inst.len() {
        return Err(Error::UnknownPoint(k.max(arc.i).max(arc.j)));
    }
    let s = orient(inst.point(arc.i), inst.point(arc.j), inst.point(k));
    Ok(Side::from_sign(s))
}

/// Monotone-chain hull keeping collinear boundary points.
///
/// Returns the counterclockwise boundary ring (ids) and the remaining ids.
pub fn convex_hull(points: &[Point]) -> Result<(Vec<PointId>, Vec<PointId>), Error> {
    if points.len() < 3 {
        return Err(Error::DegenerateInstance(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort_by(|a, b| a.lex_cmp(b));
    let first = sorted[0];
    let last = sorted[sorted.len() - 1];
    if sorted.iter().all(|&p| orient(first, last, p) == 0) {
        return Err(Error::DegenerateInstance("all points are collinear".to_string()));
    }

    let chain = |iter: &mut dyn Iterator<Item = Point>| -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for p in iter {
            while out.len() >= 2 && orient(out[out.len() - 2], out[out.len() - 1], p) < 0 {
                out.pop();
            }
            out.push(p);
        }
        out
    };
    let mut lower = chain(&mut sorted.iter().copied());
    let mut upper = chain(&mut sorted.iter().rev().copied());
    lower.pop();
    upper.pop();
    let ring: Vec<PointId> = lower.iter().chain(upper.iter()).map(|p| p.id).collect();

    let on_ring: HashSet<PointId> = ring.iter().copied().collect();
    let interior = points
        .iter()
        .filter(|p| !on_ring.contains(&p.id))
        .map(|p| p.id)
        .collect();
    Ok((ring, interior))
}

/// Open segments `ab` and `cd` share at least one point.
pub fn segments_properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 == 0 && o2 == 0 {
        // Collinear: open intervals along the dominant axis must overlap.
        let key = |p: Point| {
            if a.x != b.x {
                p.x
            } else {
                p.y
            }
        };
        let (lo1, hi1) = (key(a).min(key(b)), key(a).max(key(b)));
        let (lo2, hi2) = (key(c).min(key(d)), key(c).max(key(d)));
        return lo1.max(lo2) < hi1.min(hi2);
    }
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Doubled signed area of a polygon.
pub fn polygon_area2(ring: &[Point]) -> i128 {
    let n = ring.len();
    (0..n)
        .map(|k| {
            let (p, q) = (ring[k], ring[(k + 1) % n]);
            (p.x as i128) * (q.y as i128) - (q.x as i128) * (p.y as i128)
        })
        .sum()
}

/// Simple, counterclockwise, every interior angle at most 180 degrees.
pub fn polygon_is_weakly_convex(ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for a in 0..n {
        for b in a + 1..n {
            if ring[a].x == ring[b].x && ring[a].y == ring[b].y {
                return false;
            }
        }
    }
    if polygon_area2(ring) <= 0 {
        return false;
    }
    for k in 0..n {
        let (p, q, r) = (ring[k], ring[(k + 1) % n], ring[(k + 2) % n]);
        let o = orient(p, q, r);
        if o < 0 || (o == 0 && dot(q, p, r) >= 0) {
            // reflex, or a straight vertex that doubles back
            return false;
        }
    }
    // Every vertex weakly left of every edge rules out multiply-wound rings.
    for k in 0..n {
        let (p, q) = (ring[k], ring[(k + 1) % n]);
        if ring.iter().any(|&v| orient(p, q, v) < 0) {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Location of `q` relative to a counterclockwise weakly convex polygon.
pub fn locate_in_convex(ring: &[Point], q: Point) -> Location {
    let n = ring.len();
    let mut on_line = false;
    for k in 0..n {
        let (p, r) = (ring[k], ring[(k + 1) % n]);
        match orient(p, r, q) {
            -1 => return Location::Outside,
            0 => on_line = true,
            _ => {}
        }
    }
    if on_line {
        Location::Boundary
    } else {
        Location::Inside
    }
}

/// Open interiors of two counterclockwise convex polygons intersect.
///
/// Two convex polygons have disjoint interiors exactly when some edge line of
/// one of them weakly separates the two vertex sets.
pub fn convex_interiors_intersect(a: &[Point], b: &[Point]) -> bool {
    fn separated_by_edge_of(a: &[Point], b: &[Point]) -> bool {
        let n = a.len();
        (0..n).any(|k| {
            let (p, q) = (a[k], a[(k + 1) % n]);
            b.iter().all(|&v| orient(p, q, v) <= 0)
        })
    }
    !(separated_by_edge_of(a, b) || separated_by_edge_of(b, a))
}
