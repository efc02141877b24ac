//! Depth-first branch-and-bound over the LP relaxation.

use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::lp::{Basis, LpOptions, LpSolver, LpStatus};
use crate::error::Result;
use crate::model::{FractionalSolution, Model, Row};

/// Margin used when rounding an LP value up to an integer bound.
pub const BOUND_EPS: f64 = 1e-6;
/// A value this close to an integer counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Rounds of root separation when cuts are enabled.
const CUT_ROUNDS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IpStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub node_limit: u64,
    pub time_limit: Duration,
    /// Separate cuts at the root.
    pub cuts: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            node_limit: 1_000_000,
            time_limit: Duration::from_secs(600),
            cuts: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub status: IpStatus,
    /// Best objective found; `None` when no solution is known.
    pub objective: Option<i64>,
    /// Variables at one in the best solution.
    pub chosen: Vec<usize>,
    pub lp_root_value: f64,
    /// Proven lower bound on the optimum.
    pub bound: i64,
    /// Nodes processed after the root.
    pub nodes_explored: u64,
    pub cuts_added: usize,
    #[serde(serialize_with = "secs")]
    pub wall_time: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Optional extras for [`solve_ip_with`].
#[derive(Default)]
pub struct IpHooks<'a> {
    /// Known feasible objective; its solution may lie outside the model.
    pub upper_bound: Option<i64>,
    /// A feasible solution of the model, as the variables at one.
    pub start: Option<Vec<usize>>,
    /// Root cut separator, used when `Limits::cuts` is set.
    pub separator: Option<&'a dyn Fn(&FractionalSolution) -> Vec<Row>>,
}

pub fn solve_ip(m: &Model, limits: &Limits) -> Result<SolveResult> {
    solve_ip_with(m, limits, IpHooks::default())
}

struct Node {
    fixings: Vec<(usize, u8)>,
    basis: Rc<Basis>,
    parent_bound: i64,
}

struct Search<'m> {
    model: &'m Model,
    lp: LpSolver,
    root_lb: Vec<f64>,
    root_ub: Vec<f64>,
    known: i64,
    /// Objective that a new solution must beat.
    cutoff: i64,
    best: Option<(i64, Vec<usize>)>,
}

impl Search<'_> {
    fn node_bound(&self, lp: f64) -> i64 {
        ((lp - BOUND_EPS).ceil() as i64).max(self.known)
    }

    fn apply(&mut self, fixings: &[(usize, u8)]) {
        for j in 0..self.model.num_vars() {
            self.lp.set_bounds(j, self.root_lb[j], self.root_ub[j]);
        }
        for &(j, v) in fixings {
            self.lp.set_bounds(j, v as f64, v as f64);
        }
    }

    /// Records an integral LP solution when it satisfies the rows exactly.
    fn try_incumbent(&mut self, values: &[f64]) -> bool {
        let rounded: Vec<f64> = values.iter().map(|v| v.round()).collect();
        if self.model.max_violation(&rounded) > 1e-9 {
            return false;
        }
        let obj = self.model.objective_value(&rounded).round() as i64;
        let improves = match &self.best {
            Some((b, _)) => obj < *b,
            None => obj <= self.cutoff,
        };
        if improves {
            let chosen = (0..rounded.len()).filter(|&j| rounded[j] == 1.0).collect();
            self.best = Some((obj, chosen));
            self.cutoff = obj - 1;
        }
        improves
    }

    fn prunes(&self, bound: i64) -> bool {
        bound > self.cutoff
    }

    /// Most fractional unfixed variable, ties by smallest index.
    fn branching_var(&self, values: &[f64]) -> Option<usize> {
        let mut pick: Option<(usize, f64)> = None;
        for (j, &v) in values.iter().enumerate() {
            if self.root_lb[j] == self.root_ub[j] {
                continue;
            }
            let frac = (v - v.round()).abs();
            if frac <= INTEGRALITY_TOL {
                continue;
            }
            let dist = (v - 0.5).abs();
            if pick.map_or(true, |(_, d)| dist < d) {
                pick = Some((j, dist));
            }
        }
        pick.map(|(j, _)| j)
    }

    /// Dives from the current LP by fixing its largest fractional variable to
    /// one (or to zero if that fails), hunting for an incumbent.
    fn dive(&mut self, values: &[f64], deadline: Instant) -> Result<()> {
        let snap = self.lp.save_basis();
        let mut values = values.to_vec();
        let mut fixings: Vec<(usize, u8)> = Vec::new();
        let steps = self.model.num_vars();
        for _ in 0..steps {
            if Instant::now() >= deadline {
                break;
            }
            let pick = values
                .iter()
                .enumerate()
                .filter(|&(j, &v)| {
                    self.root_lb[j] != self.root_ub[j]
                        && !fixings.iter().any(|&(k, _)| k == j)
                        && (v - v.round()).abs() > INTEGRALITY_TOL
                })
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(j, _)| j);
            let Some(j) = pick else { break };
            let mut next = None;
            for v in [1u8, 0u8] {
                fixings.push((j, v));
                self.lp.set_bounds(j, v as f64, v as f64);
                let r = self.lp.solve()?;
                if r.status == LpStatus::Optimal && !self.prunes(self.node_bound(r.value)) {
                    next = Some(r.solution.values);
                    break;
                }
                fixings.pop();
                self.lp.set_bounds(j, self.root_lb[j], self.root_ub[j]);
            }
            let Some(v) = next else { break };
            if self.branching_var(&v).is_none() {
                self.try_incumbent(&v);
                break;
            }
            values = v;
        }
        self.apply(&[]);
        self.lp.restore_basis(&snap);
        Ok(())
    }
}

/// Exact optimum by depth-first branch-and-bound: node bound
/// `max(ceil(lp - 1e-6), known lower bound)`, branching on the most
/// fractional variable with the down branch first.
pub fn solve_ip_with(m: &Model, limits: &Limits, hooks: IpHooks<'_>) -> Result<SolveResult> {
    let started = Instant::now();
    let deadline = started + limits.time_limit;
    let (root_lb, root_ub) = super::lp::default_bounds(m);
    let mut s = Search {
        model: m,
        lp: LpSolver::new(m, LpOptions::default()),
        root_lb,
        root_ub,
        known: m.known_lower_bound.unwrap_or(i64::MIN),
        cutoff: hooks.upper_bound.unwrap_or(i64::MAX),
        best: None,
    };
    if let Some(start) = &hooks.start {
        let mut x = vec![0.0; m.num_vars()];
        for &j in start {
            x[j] = 1.0;
        }
        s.try_incumbent(&x);
    }
    let finish = |s: Search, status: IpStatus, lp_root: f64, bound: i64, nodes: u64, cuts: usize| {
        let (objective, chosen) = match s.best {
            Some((o, c)) => (Some(o), c),
            None => (None, Vec::new()),
        };
        let bound = match (status, objective) {
            (IpStatus::Optimal, Some(o)) => o,
            _ => bound,
        };
        SolveResult {
            status,
            objective,
            chosen,
            lp_root_value: lp_root,
            bound,
            nodes_explored: nodes,
            cuts_added: cuts,
            wall_time: started.elapsed(),
        }
    };

    let mut root = s.lp.solve()?;
    if root.status != LpStatus::Optimal {
        let status = if s.best.is_some() {
            IpStatus::Optimal
        } else {
            IpStatus::Infeasible
        };
        return Ok(finish(s, status, f64::INFINITY, i64::MAX, 0, 0));
    }
    let mut cuts_added = 0;
    if let (true, Some(sep)) = (limits.cuts, hooks.separator) {
        for _ in 0..CUT_ROUNDS {
            if Instant::now() >= deadline {
                break;
            }
            let cuts = sep(&root.solution);
            if cuts.is_empty() {
                break;
            }
            cuts_added += cuts.len();
            s.lp.add_rows(&cuts);
            let r = s.lp.solve()?;
            if r.status != LpStatus::Optimal {
                break;
            }
            root = r;
        }
    }
    let lp_root = root.value;
    let root_bound = s.node_bound(lp_root);
    if s.branching_var(&root.solution.values).is_none() {
        s.try_incumbent(&root.solution.values);
    }
    if !s.prunes(root_bound) {
        s.dive(&root.solution.values, deadline)?;
    }
    if s.prunes(root_bound) {
        let status = if s.best.is_some() {
            IpStatus::Optimal
        } else {
            IpStatus::Infeasible
        };
        return Ok(finish(s, status, lp_root, root_bound, 0, cuts_added));
    }

    let mut stack: Vec<Node> = Vec::new();
    let push_children =
        |stack: &mut Vec<Node>, fixings: &[(usize, u8)], j: usize, basis: Basis, bound: i64| {
            let basis = Rc::new(basis);
            for v in [1u8, 0u8] {
                let mut f = fixings.to_vec();
                f.push((j, v));
                stack.push(Node {
                    fixings: f,
                    basis: Rc::clone(&basis),
                    parent_bound: bound,
                });
            }
        };
    let j = s.branching_var(&root.solution.values).expect("fractional root");
    push_children(&mut stack, &[], j, s.lp.save_basis(), root_bound);
    let mut nodes = 0u64;
    while let Some(node) = stack.pop() {
        if s.prunes(node.parent_bound) {
            continue;
        }
        let limit = if nodes >= limits.node_limit {
            Some(IpStatus::NodeLimit)
        } else if Instant::now() >= deadline {
            Some(IpStatus::TimeLimit)
        } else {
            None
        };
        if let Some(status) = limit {
            stack.push(node);
            let open = stack
                .iter()
                .filter(|n| !s.prunes(n.parent_bound))
                .map(|n| n.parent_bound)
                .min();
            let best = s.best.as_ref().map(|b| b.0).unwrap_or(i64::MAX);
            let bound = open.map_or(best, |b| b.min(best)).max(root_bound);
            return Ok(finish(s, status, lp_root, bound, nodes, cuts_added));
        }
        nodes += 1;
        s.apply(&node.fixings);
        s.lp.restore_basis(&node.basis);
        let r = s.lp.solve()?;
        if r.status != LpStatus::Optimal {
            continue;
        }
        let bound = s.node_bound(r.value);
        if s.prunes(bound) {
            continue;
        }
        match s.branching_var(&r.solution.values) {
            None => {
                s.try_incumbent(&r.solution.values);
            }
            Some(j) => push_children(&mut stack, &node.fixings, j, s.lp.save_basis(), bound),
        }
    }
    let status = if s.best.is_some() {
        IpStatus::Optimal
    } else {
        IpStatus::Infeasible
    };
    Ok(finish(s, status, lp_root, root_bound, nodes, cuts_added))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Sense, VarMeta};
    use std::collections::BTreeMap;

    fn model(obj: Vec<f64>, rows: Vec<(Vec<(usize, f64)>, Sense, f64)>) -> Model {
        let n = obj.len();
        Model {
            objective: obj,
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(k, (coeffs, sense, rhs))| Row {
                    name: format!("r{k}"),
                    coeffs,
                    sense,
                    rhs,
                })
                .collect(),
            integer: vec![true; n],
            fixed: BTreeMap::new(),
            var_meta: (0..n).map(VarMeta::Face).collect(),
            known_lower_bound: None,
        }
    }

    /// Vertex cover of an odd cycle: LP k/2, integer ceil(k/2).
    fn odd_cycle_cover(k: usize) -> Model {
        let rows = (0..k)
            .map(|i| (vec![(i, 1.0), ((i + 1) % k, 1.0)], Sense::Ge, 1.0))
            .collect();
        model(vec![1.0; k], rows)
    }

    #[test]
    fn odd_cycle_needs_rounding_only() {
        let r = solve_ip(&odd_cycle_cover(7), &Limits::default()).unwrap();
        assert_eq!(r.status, IpStatus::Optimal);
        assert_eq!(r.objective, Some(4));
        assert!((r.lp_root_value - 3.5).abs() < 1e-9);
    }

    #[test]
    fn branching_finds_exact_optimum() {
        // Exact cover where the LP optimum is fractional and the bound is weak.
        // Sets over {0..5}: the optimum needs 3 sets.
        let sets: Vec<Vec<usize>> = vec![
            vec![0, 1],
            vec![1, 2],
            vec![2, 0],
            vec![3, 4],
            vec![4, 5],
            vec![5, 3],
            vec![0, 3],
            vec![1, 4],
            vec![2, 5],
        ];
        let rows = (0..6)
            .map(|e| {
                let c = sets
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.contains(&e))
                    .map(|(j, _)| (j, 1.0))
                    .collect();
                (c, Sense::Eq, 1.0)
            })
            .collect();
        let m = model(vec![1.0; sets.len()], rows);
        let r = solve_ip(&m, &Limits::default()).unwrap();
        assert_eq!(r.status, IpStatus::Optimal);
        assert_eq!(r.objective, Some(3));
        assert!(m.is_feasible(
            &(0..9)
                .map(|j| if r.chosen.contains(&j) { 1.0 } else { 0.0 })
                .collect::<Vec<_>>(),
            0.0
        ));
    }

    #[test]
    fn infeasible_and_limits() {
        let m = model(vec![1.0, 1.0], vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0)]);
        assert_eq!(
            solve_ip(&m, &Limits::default()).unwrap().status,
            IpStatus::Infeasible
        );
        let lim = Limits {
            node_limit: 0,
            ..Limits::default()
        };
        // Parity rows: x0 + x1 + x2 = 2 with x0 + x1 = 1 etc. leave a
        // fractional root, so a zero node budget stops at the root.
        let m = model(
            vec![1.0, 1.0, 1.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0),
                (vec![(1, 1.0), (2, 1.0)], Sense::Eq, 1.0),
                (vec![(0, 1.0), (2, 1.0)], Sense::Eq, 1.0),
            ],
        );
        let r = solve_ip(&m, &lim).unwrap();
        assert_eq!(r.status, IpStatus::NodeLimit);
        assert_eq!(r.objective, None);
        let r = solve_ip(&m, &Limits::default()).unwrap();
        assert_eq!(r.status, IpStatus::Infeasible);
        assert!(r.nodes_explored > 0);
    }

    #[test]
    fn external_upper_bound_still_yields_solution() {
        let m = odd_cycle_cover(5);
        let r = solve_ip_with(
            &m,
            &Limits::default(),
            IpHooks {
                upper_bound: Some(3),
                ..IpHooks::default()
            },
        )
        .unwrap();
        assert_eq!(r.objective, Some(3));
        assert_eq!(r.chosen.len(), 3);
    }
}
