use std::collections::{BTreeMap, BTreeSet};

use crate::faces::{Face, FaceCatalog};
use crate::geometry::{orient, polygon_is_weakly_convex, ArcKey, Instance, PointId};
use crate::verify::Partition;

/// Sweep triangulation followed by convex merges of adjacent faces.
///
/// The catalog is not consulted: every produced face is an empty convex
/// polygon, hence already in the full catalog.
pub fn greedy_partition(inst: &Instance, _cat: &FaceCatalog) -> Partition {
    let tris = sweep_triangulation(inst);
    Partition::new(merge_convex(inst, tris), "greedy")
}

/// Triangulates by inserting points in lexicographic order and fanning each
/// new point to the hull edges it sees.
pub fn sweep_triangulation(inst: &Instance) -> Vec<Vec<PointId>> {
    let mut order: Vec<PointId> = (0..inst.len()).collect();
    order.sort_by(|&a, &b| inst.point(a).lex_cmp(&inst.point(b)));
    let p = |k: PointId| inst.point(k);

    // Leading collinear run and the first point off its line.
    let first_off = (2..order.len())
        .find(|&k| orient(p(order[0]), p(order[1]), p(order[k])) != 0)
        .expect("instance is not collinear");
    let chain = &order[..first_off];
    let q = order[first_off];
    let left = orient(p(chain[0]), p(chain[chain.len() - 1]), p(q)) > 0;
    let mut tris = Vec::new();
    for w in chain.windows(2) {
        tris.push(if left {
            vec![w[0], w[1], q]
        } else {
            vec![w[1], w[0], q]
        });
    }
    let mut ring: Vec<PointId> = chain.to_vec();
    ring.push(q);
    if !left {
        ring.reverse();
    }

    for &v in &order[first_off + 1..] {
        let h = ring.len();
        let visible: Vec<bool> = (0..h)
            .map(|k| orient(p(ring[k]), p(ring[(k + 1) % h]), p(v)) < 0)
            .collect();
        let start = (0..h)
            .find(|&k| visible[k] && !visible[(k + h - 1) % h])
            .expect("a later point lies outside the current hull");
        let run = (0..h).take_while(|&t| visible[(start + t) % h]).count();
        for t in 0..run {
            let a = ring[(start + t) % h];
            let b = ring[(start + t + 1) % h];
            tris.push(vec![b, a, v]);
        }
        // Keep w .. u (the part not seen), then v.
        let u = (start) % h;
        let w = (start + run) % h;
        let mut next = Vec::with_capacity(h + 1);
        let mut k = w;
        loop {
            next.push(ring[k]);
            if k == u {
                break;
            }
            k = (k + 1) % h;
        }
        next.push(v);
        ring = next;
    }
    tris
}

/// Ring of `f ∪ g` glued along their shared edge, if they share exactly one.
fn glue(f: &[PointId], g: &[PointId], a: PointId, b: PointId) -> Vec<PointId> {
    // f runs a -> b, g runs b -> a.
    let sf = f.iter().position(|&v| v == b).expect("vertex of f");
    let sg = g.iter().position(|&v| v == a).expect("vertex of g");
    let mut out = Vec::with_capacity(f.len() + g.len() - 2);
    out.extend((0..f.len()).map(|k| f[(sf + k) % f.len()]));
    out.extend((1..g.len() - 1).map(|k| g[(sg + k) % g.len()]));
    out
}

fn directed_edges(ring: &[PointId]) -> impl Iterator<Item = (PointId, PointId)> + '_ {
    let n = ring.len();
    (0..n).map(move |k| (ring[k], ring[(k + 1) % n]))
}

/// Merges adjacent faces whose union is convex, scanning interior edges in
/// key order, until a full pass merges nothing.
pub fn merge_convex(inst: &Instance, rings: Vec<Vec<PointId>>) -> Vec<Face> {
    let mut faces: Vec<Option<Vec<PointId>>> = rings.into_iter().map(Some).collect();
    loop {
        // Directed edge -> face owning it.
        let mut owner: BTreeMap<(PointId, PointId), usize> = BTreeMap::new();
        for (id, ring) in faces.iter().enumerate() {
            if let Some(ring) = ring {
                for e in directed_edges(ring) {
                    owner.insert(e, id);
                }
            }
        }
        let mut arcs: BTreeSet<ArcKey> = BTreeSet::new();
        for &(a, b) in owner.keys() {
            if owner.contains_key(&(b, a)) {
                arcs.insert(ArcKey::new(inst, a, b));
            }
        }
        let mut dirty = vec![false; faces.len()];
        let mut merged_any = false;
        for arc in arcs {
            let (fa, fb) = (owner[&(arc.i, arc.j)], owner[&(arc.j, arc.i)]);
            if dirty[fa] || dirty[fb] || fa == fb {
                continue;
            }
            let f = faces[fa].as_ref().expect("live face");
            let g = faces[fb].as_ref().expect("live face");
            let fs: BTreeSet<PointId> = f.iter().copied().collect();
            if g.iter().filter(|v| fs.contains(v)).count() != 2 {
                continue;
            }
            let ring = glue(f, g, arc.i, arc.j);
            if !polygon_is_weakly_convex(&inst.ring_points(&ring)) {
                continue;
            }
            faces[fa] = Some(ring);
            faces[fb] = None;
            dirty[fa] = true;
            dirty[fb] = true;
            merged_any = true;
        }
        if !merged_any {
            break;
        }
    }
    let mut out: Vec<Face> = faces.into_iter().flatten().map(Face::from_ccw_ring).collect();
    out.sort();
    out
}
