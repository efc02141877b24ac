//! Exhaustive exact-cover search over a face catalog, independent of the LP.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use super::bnb::{IpStatus, Limits, SolveResult};
use crate::bounds::{degree_lower_bounds, euler_bound};
use crate::error::{Error, Result};
use crate::faces::{FaceCatalog, FaceId};
use crate::geometry::{ArcKey, Instance, Side};

pub const ORACLE_CAP: usize = 14;

type Slot = (ArcKey, Side);

#[derive(Clone, Copy)]
enum Known {
    /// Fewest faces for the region, and the first face of such a tiling.
    Exact(u32, FaceId),
    /// No tiling with fewer faces exists.
    AtLeast(u32),
}

type Memo = HashMap<Vec<Slot>, Known>;

enum Trail {
    Filled(Slot),
    Opened(Slot),
    Closed(Slot),
}

struct Cover<'a> {
    cat: &'a FaceCatalog,
    /// Per face: its (arc, side) slots and whether each arc is a hull edge.
    slots: Vec<Vec<(Slot, bool)>>,
    area: Vec<i128>,
    hull_area: i128,
    filled: HashSet<Slot>,
    open: BTreeSet<Slot>,
    used: Vec<bool>,
    chosen: Vec<FaceId>,
    used_area: i128,
    /// Placed faces per arc, with the point degrees and edge count they
    /// imply; together with `need` they give an Euler bound on what is left.
    arc_uses: HashMap<ArcKey, u8>,
    degree: Vec<u32>,
    min_degree: Vec<u32>,
    edges: i64,
    need: i64,
    trail: Vec<Trail>,
    nodes: u64,
    limits: Limits,
    started: Instant,
    stopped: Option<IpStatus>,
}

impl<'a> Cover<'a> {
    fn new(inst: &Instance, cat: &'a FaceCatalog, limits: &Limits) -> Cover<'a> {
        let slots = cat
            .faces()
            .iter()
            .map(|f| {
                f.arcs(inst)
                    .map(|a| ((a, f.side_of(inst, a)), inst.is_hull_edge(a.i, a.j)))
                    .collect()
            })
            .collect();
        let open = inst
            .hull_arcs()
            .into_iter()
            .map(|a| (a, inst.interior_side_of_hull_arc(a)))
            .collect();
        let db = degree_lower_bounds(inst);
        Cover {
            cat,
            slots,
            area: cat.faces().iter().map(|f| f.area2(inst)).collect(),
            hull_area: inst.hull_area2(),
            filled: HashSet::new(),
            open,
            used: vec![false; cat.len()],
            chosen: Vec::new(),
            used_area: 0,
            arc_uses: HashMap::new(),
            degree: vec![0; inst.len()],
            need: db.sum() as i64,
            min_degree: (0..inst.len()).map(|p| db.get(p)).collect(),
            edges: 0,
            trail: Vec::new(),
            nodes: 0,
            limits: *limits,
            started: Instant::now(),
            stopped: None,
        }
    }

    fn fits(&self, f: FaceId) -> bool {
        !self.used[f]
            && self.used_area + self.area[f] <= self.hull_area
            && self.slots[f].iter().all(|(s, _)| !self.filled.contains(s))
    }

    fn place(&mut self, f: FaceId) -> usize {
        let mark = self.trail.len();
        self.used[f] = true;
        self.used_area += self.area[f];
        self.chosen.push(f);
        for k in 0..self.slots[f].len() {
            let ((arc, side), hull) = self.slots[f][k];
            let slot = (arc, side);
            self.use_arc(arc);
            self.filled.insert(slot);
            self.trail.push(Trail::Filled(slot));
            if self.open.remove(&slot) {
                self.trail.push(Trail::Closed(slot));
            }
            let other = (arc, side.opposite());
            if !hull && !self.filled.contains(&other) && self.open.insert(other) {
                self.trail.push(Trail::Opened(other));
            }
        }
        mark
    }

    fn use_arc(&mut self, arc: ArcKey) {
        let uses = self.arc_uses.entry(arc).or_insert(0);
        *uses += 1;
        if *uses == 1 {
            self.edges += 1;
            for p in [arc.i, arc.j] {
                if self.degree[p] < self.min_degree[p] {
                    self.need -= 1;
                }
                self.degree[p] += 1;
            }
        }
    }

    fn release_arc(&mut self, arc: ArcKey) {
        let uses = self.arc_uses.get_mut(&arc).expect("placed arc");
        *uses -= 1;
        if *uses == 0 {
            self.arc_uses.remove(&arc);
            self.edges -= 1;
            for p in [arc.i, arc.j] {
                self.degree[p] -= 1;
                if self.degree[p] < self.min_degree[p] {
                    self.need += 1;
                }
            }
        }
    }

    /// Faces still required: a full tiling has `E - n + 1` faces, and it
    /// keeps every placed edge plus at least half the missing degree.
    fn remaining_lower_bound(&self) -> u32 {
        let total = self.edges + (self.need + 1) / 2 - self.degree.len() as i64 + 1;
        (total - self.chosen.len() as i64).max(1) as u32
    }

    fn unplace(&mut self, f: FaceId, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail entry") {
                Trail::Filled(s) => {
                    self.filled.remove(&s);
                }
                Trail::Opened(s) => {
                    self.open.remove(&s);
                }
                Trail::Closed(s) => {
                    self.open.insert(s);
                }
            }
        }
        for k in 0..self.slots[f].len() {
            self.release_arc(self.slots[f][k].0 .0);
        }
        self.used[f] = false;
        self.used_area -= self.area[f];
        self.chosen.pop();
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.limits.node_limit {
            self.stopped = Some(IpStatus::NodeLimit);
        } else if self.nodes % 1024 == 0 && self.started.elapsed() >= self.limits.time_limit {
            self.stopped = Some(IpStatus::TimeLimit);
        }
        self.stopped.is_none()
    }

    fn candidates(&self) -> Vec<FaceId> {
        let &(arc, side) = self.open.first().expect("open slot");
        self.cat
            .sides(arc)
            .map(|s| s.get(side).to_vec())
            .unwrap_or_default()
    }

    /// Complete tilings: conservation closed every slot and the areas add up.
    fn complete(&self) -> bool {
        self.open.is_empty() && self.used_area == self.hull_area
    }

    /// Fewest faces (at most `budget`) tiling the uncovered region. The
    /// region is determined by the open slots, so results are memoized on
    /// them, exactly or as lower bounds.
    fn minimize(&mut self, memo: &mut Memo, budget: u32) -> Option<u32> {
        if self.open.is_empty() {
            return self.complete().then_some(0);
        }
        if budget < self.remaining_lower_bound() {
            return None;
        }
        let key: Vec<Slot> = self.open.iter().copied().collect();
        match memo.get(&key) {
            Some(&Known::Exact(v, _)) => return (v <= budget).then_some(v),
            Some(&Known::AtLeast(lb)) if lb > budget => return None,
            _ => {}
        }
        if !self.tick() {
            return None;
        }
        let mut best: Option<(u32, FaceId)> = None;
        let mut limit = budget;
        for f in self.candidates() {
            if limit == 0 {
                break;
            }
            if self.fits(f) {
                let mark = self.place(f);
                let sub = self.minimize(memo, limit - 1);
                self.unplace(f, mark);
                if self.stopped.is_some() {
                    return None;
                }
                if let Some(k) = sub {
                    best = Some((k + 1, f));
                    limit = k;
                }
            }
        }
        let entry = match best {
            Some((v, f)) => Known::Exact(v, f),
            None => Known::AtLeast(budget + 1),
        };
        memo.insert(key, entry);
        best.map(|b| b.0)
    }

    /// Replays memoized first choices from the current state.
    fn reconstruct(&mut self, memo: &Memo) -> Vec<FaceId> {
        let mut out = Vec::new();
        while !self.open.is_empty() {
            let key: Vec<Slot> = self.open.iter().copied().collect();
            let Some(&Known::Exact(_, f)) = memo.get(&key) else {
                unreachable!("optimal choice recorded")
            };
            self.place(f);
            out.push(f);
        }
        out
    }

    fn collect(&mut self, out: &mut Vec<Vec<FaceId>>, max: usize) {
        if !self.tick() {
            return;
        }
        if self.open.is_empty() {
            if self.complete() {
                let mut p = self.chosen.clone();
                p.sort_unstable();
                out.push(p);
                if out.len() >= max {
                    self.stopped = Some(IpStatus::NodeLimit);
                }
            }
            return;
        }
        for f in self.candidates() {
            if self.fits(f) {
                let mark = self.place(f);
                self.collect(out, max);
                self.unplace(f, mark);
                if self.stopped.is_some() {
                    return;
                }
            }
        }
    }
}

fn check_size(inst: &Instance, cap: usize) -> Result<()> {
    if inst.len() > cap {
        return Err(Error::TooLarge { n: inst.len(), cap });
    }
    Ok(())
}

/// Minimum number of catalog faces tiling the hull, by exhaustive search.
pub fn exact_cover_oracle(inst: &Instance, cat: &FaceCatalog, limits: &Limits) -> Result<SolveResult> {
    exact_cover_oracle_capped(inst, cat, limits, ORACLE_CAP)
}

pub fn exact_cover_oracle_capped(
    inst: &Instance,
    cat: &FaceCatalog,
    limits: &Limits,
    cap: usize,
) -> Result<SolveResult> {
    check_size(inst, cap)?;
    let mut cover = Cover::new(inst, cat, limits);
    let mut memo = Memo::new();
    // Deepen the face budget from the Euler bound to a known tiling's size;
    // lower bounds proven in one round carry over to the next.
    let lower = euler_bound(inst, &degree_lower_bounds(inst)).max(1) as u32;
    let upper = super::greedy::sweep_triangulation(inst).len() as u32;
    let mut value = None;
    for budget in lower.min(upper)..=upper {
        value = cover.minimize(&mut memo, budget);
        if value.is_some() || cover.stopped.is_some() {
            break;
        }
    }
    let best = match (cover.stopped, value) {
        (None, Some(_)) => Some(cover.reconstruct(&memo)),
        _ => None,
    };
    let status = match (cover.stopped, &best) {
        (Some(s), _) => s,
        (None, Some(_)) => IpStatus::Optimal,
        (None, None) => IpStatus::Infeasible,
    };
    let mut chosen = best.unwrap_or_default();
    chosen.sort_unstable();
    let objective = (!chosen.is_empty()).then_some(chosen.len() as i64);
    Ok(SolveResult {
        status,
        objective,
        bound: if status == IpStatus::Optimal {
            chosen.len() as i64
        } else {
            1
        },
        chosen,
        lp_root_value: f64::NAN,
        nodes_explored: cover.nodes,
        cuts_added: 0,
        wall_time: cover.started.elapsed(),
    })
}

/// Every tiling of the hull by catalog faces (as sorted face ids), up to
/// `max` of them.
pub fn enumerate_partitions(inst: &Instance, cat: &FaceCatalog, max: usize) -> Result<Vec<Vec<FaceId>>> {
    check_size(inst, ORACLE_CAP)?;
    let limits = Limits {
        node_limit: u64::MAX,
        ..Limits::default()
    };
    let mut cover = Cover::new(inst, cat, &limits);
    let mut out = Vec::new();
    cover.collect(&mut out, max);
    out.sort();
    Ok(out)
}
