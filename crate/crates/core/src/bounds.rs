//! Lower bounds: per-point degree bounds, the Euler bound, and edge-count
//! bounds across convex regions and separating lines.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, locate_in_convex, orient, Instance, Location, Point, PointId};

/// Lower bound on the number of partition edges incident to each point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeBounds {
    pub d: Vec<u32>,
}

impl DegreeBounds {
    pub fn get(&self, id: PointId) -> u32 {
        self.d[id]
    }

    pub fn sum(&self) -> u64 {
        self.d.iter().map(|&v| v as u64).sum()
    }
}

/// Visible hull vertices of an inner point set, by type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CutClassification {
    /// Some outside point sits in the opposite wedge; one crossing edge suffices.
    pub n1: usize,
    /// Interior point with an empty opposite wedge; needs two crossing edges.
    pub n2: usize,
    /// Point of the instance hull; served by the mandatory hull edge.
    pub n3: usize,
}

impl CutClassification {
    pub fn bound(&self) -> u32 {
        (self.n1 + 2 * self.n2 + self.n3) as u32
    }
}

/// Classifies the visible vertices of `H(inside)` as seen from `outside`.
pub fn classify_cut(inst: &Instance, inside: &[PointId], outside: &[PointId]) -> CutClassification {
    let mut class = CutClassification::default();
    if inside.is_empty() || outside.is_empty() {
        return class;
    }
    let pts: Vec<Point> = inside.iter().map(|&k| inst.point(k)).collect();
    let outs: Vec<Point> = outside.iter().map(|&k| inst.point(k)).collect();

    let ring = match convex_hull(&pts) {
        Ok((ring, _)) => ring,
        Err(_) => {
            // A single point or a segment: only the extreme points can see out.
            if pts.len() == 1 {
                if inst.on_hull(pts[0].id) {
                    class.n3 += 1;
                } else {
                    class.n2 += 1;
                }
                return class;
            }
            let lo = pts.iter().min_by(|a, b| a.lex_cmp(b)).copied().unwrap();
            let hi = pts.iter().max_by(|a, b| a.lex_cmp(b)).copied().unwrap();
            for end in [lo, hi] {
                if inst.on_hull(end.id) {
                    class.n3 += 1;
                } else {
                    class.n1 += 1;
                }
            }
            return class;
        }
    };
    // Drop straight vertices of the inner hull.
    let h = ring.len();
    let corners: Vec<Point> = (0..h)
        .filter(|&k| {
            let (u, v, w) = (ring[(k + h - 1) % h], ring[k], ring[(k + 1) % h]);
            orient(inst.point(u), inst.point(v), inst.point(w)) != 0
        })
        .map(|k| inst.point(ring[k]))
        .collect();
    let c = corners.len();
    for k in 0..c {
        let (u, v, w) = (corners[(k + c - 1) % c], corners[k], corners[(k + 1) % c]);
        // Segment v-q leaves the hull only at v iff q is outside the closed
        // tangent cone spanned by v->w and v->u.
        let visible = outs
            .iter()
            .any(|&q| !(orient(v, w, q) >= 0 && orient(v, u, q) <= 0));
        if !visible {
            continue;
        }
        if inst.on_hull(v.id) {
            class.n3 += 1;
        } else if outs.iter().any(|&q| orient(u, v, q) <= 0 && orient(v, w, q) <= 0) {
            class.n1 += 1;
        } else {
            class.n2 += 1;
        }
    }
    class
}

/// Edge-count lower bound across the boundary of a convex region
/// (counterclockwise ring of region corners; need not be instance points).
pub fn cut_bound(inst: &Instance, region: &[Point]) -> Result<u32> {
    let (inside, outside): (Vec<PointId>, Vec<PointId>) = inst
        .points()
        .iter()
        .map(|p| p.id)
        .partition(|&k| locate_in_convex(region, inst.point(k)) != Location::Outside);
    if inside.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(classify_cut(inst, &inside, &outside).bound())
}

/// Bound on the number of edges crossing the line through `a` and `b`.
pub fn line_cut_bound(inst: &Instance, a: Point, b: Point) -> Result<u32> {
    if a.x == b.x && a.y == b.y {
        return Err(Error::DegenerateLine("zero direction".into()));
    }
    let mut sides: [Vec<PointId>; 2] = [Vec::new(), Vec::new()];
    for p in inst.points() {
        match orient(a, b, *p) {
            0 => return Err(Error::DegenerateLine(format!("point {} lies on the line", p.id))),
            1 => sides[0].push(p.id),
            _ => sides[1].push(p.id),
        }
    }
    if sides[0].is_empty() || sides[1].is_empty() {
        return Err(Error::DegenerateLine("one side is empty".into()));
    }
    let one = classify_cut(inst, &sides[0], &sides[1]).bound();
    let two = classify_cut(inst, &sides[1], &sides[0]).bound();
    Ok(one.max(two))
}

/// Degree bound of a hull point from the edges it must send into the rest.
pub fn hull_point_degree(inst: &Instance, p: PointId) -> u32 {
    let rest: Vec<PointId> = (0..inst.len()).filter(|&k| k != p).collect();
    classify_cut(inst, &rest, &[p]).bound().max(2)
}

/// `true` when `p` lies strictly between two other instance points.
fn splits_straight(inst: &Instance, p: PointId) -> bool {
    let c = inst.point(p);
    let mut dirs: HashSet<(i64, i64)> = HashSet::new();
    for q in inst.points() {
        if q.id == p {
            continue;
        }
        let (dx, dy) = (q.x - c.x, q.y - c.y);
        let g = gcd(dx.unsigned_abs(), dy.unsigned_abs()) as i64;
        dirs.insert((dx / g, dy / g));
    }
    dirs.iter().any(|&(dx, dy)| dirs.contains(&(-dx, -dy)))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn degree_lower_bounds(inst: &Instance) -> DegreeBounds {
    let d = (0..inst.len())
        .map(|p| {
            if inst.on_hull(p) {
                hull_point_degree(inst, p)
            } else if splits_straight(inst, p) {
                2
            } else {
                3
            }
        })
        .collect();
    DegreeBounds { d }
}

/// `ceil(sum(d) / 2 - n + 1)`.
pub fn euler_bound(inst: &Instance, db: &DegreeBounds) -> i64 {
    let half = db.sum().div_ceil(2) as i64;
    half - inst.len() as i64 + 1
}
