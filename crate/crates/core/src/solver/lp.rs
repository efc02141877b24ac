//! Bounded-variable revised simplex over a sparse LU basis factor.
//!
//! Every structural variable is boxed, so the all-logical basis is dual
//! feasible and the dual simplex runs without a phase one. Costs carry a
//! small random perturbation against dual degeneracy; once it is removed, a
//! primal simplex pass (Dantzig pricing, Harris ratio test, Bland's rule after
//! a run of degenerate pivots) restores optimality for the true costs.
//! The solver keeps its basis between calls, so bound changes and appended
//! rows are re-solved from the previous optimum.

use rand::{Rng, SeedableRng};

use super::factor::Factor;
use crate::error::{Error, Result};
use crate::model::{FractionalSolution, Model, Row, Sense};

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
    pub max_iterations: usize,
    /// Relative size of the random cost shifts; zero disables them.
    pub cost_perturbation: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feasibility_tol: 1e-6,
            optimality_tol: 1e-7,
            pivot_tol: 1e-9,
            bland_after: 1000,
            refactor_every: 100,
            max_iterations: 10_000_000,
            cost_perturbation: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: f64,
    pub solution: FractionalSolution,
    pub iterations: usize,
}

/// Residual beyond which a solution is rejected.
const RESIDUAL_LIMIT: f64 = 1e-4;
const NONBASIC: usize = usize::MAX;

/// LP relaxation of `m`: integrality dropped, variables in `[0, 1]`, fixed
/// variables pinned.
pub fn solve_lp(m: &Model) -> Result<LpResult> {
    LpSolver::new(m, LpOptions::default()).solve()
}

pub fn default_bounds(m: &Model) -> (Vec<f64>, Vec<f64>) {
    let mut lb = vec![0.0; m.num_vars()];
    let mut ub = vec![1.0; m.num_vars()];
    for (&j, &v) in &m.fixed {
        lb[j] = v as f64;
        ub[j] = v as f64;
    }
    (lb, ub)
}

/// LP over the model rows plus `extra` rows with explicit variable bounds.
pub fn solve_lp_with(m: &Model, lb: &[f64], ub: &[f64], extra: &[Row], opts: &LpOptions) -> Result<LpResult> {
    let mut s = LpSolver::new(m, *opts);
    s.add_rows(extra);
    for j in 0..m.num_vars() {
        s.set_bounds(j, lb[j], ub[j]);
    }
    s.solve()
}

/// A basis snapshot for restoring a solver between related solves.
#[derive(Clone, Debug)]
pub struct Basis {
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    weights: Vec<f64>,
}

pub struct LpSolver {
    n: usize,
    m: usize,
    rows: Vec<Row>,
    /// Structural columns, compressed by column.
    col_ptr: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    /// The same matrix compressed by row.
    row_ptr: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    obj: Vec<f64>,
    perturbed: Vec<f64>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    /// Dual steepest-edge weights per basis position.
    weights: Vec<f64>,
    factor: Option<Factor>,
    opts: LpOptions,
    iterations: usize,
    rng: rand_chacha::ChaCha8Rng,
}

impl LpSolver {
    pub fn new(model: &Model, opts: LpOptions) -> LpSolver {
        let n = model.num_vars();
        let (lb, ub) = default_bounds(model);
        let mut s = LpSolver {
            n,
            m: 0,
            rows: Vec::new(),
            col_ptr: Vec::new(),
            col_row: Vec::new(),
            col_val: Vec::new(),
            row_ptr: vec![0],
            row_col: Vec::new(),
            row_val: Vec::new(),
            obj: model.objective.clone(),
            perturbed: Vec::new(),
            cost: Vec::new(),
            lb,
            ub,
            b: Vec::new(),
            x: Vec::new(),
            d: Vec::new(),
            at_upper: vec![false; n],
            basis: Vec::new(),
            pos: vec![NONBASIC; n],
            weights: Vec::new(),
            factor: None,
            opts,
            iterations: 0,
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed),
        };
        s.x = s.lb.clone();
        for (j, &c) in s.obj.iter().enumerate() {
            // Start on the bound that makes the reduced cost dual feasible.
            if c < 0.0 {
                s.at_upper[j] = true;
                s.x[j] = s.ub[j];
            }
        }
        s.add_rows(&model.rows);
        s
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lb[j], self.ub[j])
    }

    /// Changes the bounds of structural `j`; a nonbasic variable moves with
    /// its bound.
    pub fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        assert!(j < self.n && lb.is_finite() && ub.is_finite());
        self.lb[j] = lb;
        self.ub[j] = ub;
        if self.pos[j] == NONBASIC {
            self.x[j] = if self.at_upper[j] { ub } else { lb };
        }
    }

    /// Appends rows; their logicals join the basis.
    pub fn add_rows(&mut self, rows: &[Row]) {
        if rows.is_empty() {
            return;
        }
        for r in rows {
            let i = self.m;
            self.m += 1;
            self.rows.push(r.clone());
            self.b.push(r.rhs);
            let (l, u) = match r.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            self.lb.push(l);
            self.ub.push(u);
            self.x.push(0.0);
            self.at_upper.push(false);
            self.pos.push(self.basis.len());
            self.basis.push(self.n + i);
            self.weights.push(1.0);
        }
        self.rebuild_matrix();
        self.factor = None;
    }

    fn rebuild_matrix(&mut self) {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        self.row_ptr = vec![0];
        self.row_col.clear();
        self.row_val.clear();
        for r in &self.rows {
            for &(j, a) in &r.coeffs {
                if a != 0.0 {
                    counts[j + 1] += 1;
                    self.row_col.push(j);
                    self.row_val.push(a);
                }
            }
            self.row_ptr.push(self.row_col.len());
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let mut fill = counts.clone();
        self.col_row = vec![0; counts[n]];
        self.col_val = vec![0.0; counts[n]];
        self.col_ptr = counts;
        for i in 0..self.m {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.row_col[k];
                self.col_row[fill[j]] = i;
                self.col_val[fill[j]] = self.row_val[k];
                fill[j] += 1;
            }
        }
    }

    pub fn save_basis(&self) -> Basis {
        Basis {
            basis: self.basis.clone(),
            at_upper: self.at_upper.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Restores a snapshot taken with the same number of rows.
    pub fn restore_basis(&mut self, snap: &Basis) {
        assert_eq!(snap.basis.len(), self.m);
        self.basis.clone_from(&snap.basis);
        self.at_upper.clone_from(&snap.at_upper);
        self.weights.clone_from(&snap.weights);
        self.pos.iter_mut().for_each(|p| *p = NONBASIC);
        for (p, &j) in self.basis.iter().enumerate() {
            self.pos[j] = p;
        }
        for j in 0..self.total() {
            if self.pos[j] == NONBASIC {
                self.x[j] = if self.at_upper[j] { self.ub[j] } else { self.lb[j] };
            }
        }
        self.factor = None;
    }

    fn total(&self) -> usize {
        self.n + self.m
    }

    #[inline]
    fn for_each_in_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else {
            f(j - self.n, 1.0);
        }
    }

    #[inline]
    fn frozen(&self, j: usize) -> bool {
        self.lb[j] == self.ub[j]
    }

    pub fn solve(&mut self) -> Result<LpResult> {
        if (0..self.n).any(|j| self.lb[j] > self.ub[j]) {
            return Ok(self.result(LpStatus::Infeasible));
        }
        // Perturbed costs for the dual pass, drawn once so that re-solves
        // start dual feasible.
        if self.perturbed.is_empty() {
            let scale = self.opts.cost_perturbation;
            self.perturbed = (0..self.n)
                .map(|j| {
                    let c = self.obj[j];
                    let shift = scale * (1.0 + c.abs()) * self.rng.gen_range(1.0..2.0);
                    if c < 0.0 {
                        c - shift
                    } else {
                        c + shift
                    }
                })
                .collect();
        }
        self.cost = vec![0.0; self.total()];
        self.cost[..self.n].copy_from_slice(&self.perturbed);
        self.refactor()?;
        self.align_nonbasic();
        self.refactor()?;
        let status = self.dual_phase()?;
        if status == LpStatus::Infeasible {
            return Ok(self.result(status));
        }
        self.cost[..self.n].copy_from_slice(&self.obj);
        self.cost[self.n..].iter_mut().for_each(|c| *c = 0.0);
        self.refactor()?;
        let status = self.primal_phase()?;
        let res = self.result(status);
        let resid = self.residual(&res.solution.values);
        if status == LpStatus::Optimal && resid > RESIDUAL_LIMIT {
            return Err(Error::NumericalFailure(resid));
        }
        Ok(res)
    }

    /// Puts each nonbasic variable on the bound its reduced cost prefers.
    fn align_nonbasic(&mut self) {
        for j in 0..self.total() {
            if self.pos[j] != NONBASIC || self.frozen(j) {
                continue;
            }
            let dj = self.d[j];
            if dj > 0.0 && self.lb[j].is_finite() {
                self.at_upper[j] = false;
            } else if dj < 0.0 && self.ub[j].is_finite() {
                self.at_upper[j] = true;
            }
            self.x[j] = if self.at_upper[j] { self.ub[j] } else { self.lb[j] };
        }
    }

    fn result(&self, status: LpStatus) -> LpResult {
        let n = self.n;
        if status == LpStatus::Infeasible {
            return LpResult {
                status,
                value: f64::INFINITY,
                solution: FractionalSolution {
                    values: self.x[..n].to_vec(),
                    objective_value: f64::INFINITY,
                },
                iterations: self.iterations,
            };
        }
        let values: Vec<f64> = (0..n)
            .map(|j| {
                let v = self.x[j].clamp(self.lb[j], self.ub[j]);
                if (v - v.round()).abs() <= 1e-9 {
                    v.round()
                } else {
                    v
                }
            })
            .collect();
        let value = self.obj.iter().zip(&values).map(|(c, v)| c * v).sum();
        LpResult {
            status,
            value,
            solution: FractionalSolution {
                values,
                objective_value: value,
            },
            iterations: self.iterations,
        }
    }

    /// Largest violation of the rows by `values`.
    pub fn residual(&self, values: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(values)).fold(0.0, f64::max)
    }

    fn tick(&mut self) -> Result<()> {
        self.iterations += 1;
        if self.iterations > self.opts.max_iterations {
            return Err(Error::NumericalFailure(f64::NAN));
        }
        Ok(())
    }

    /// Dual simplex until primal feasible (or proven infeasible).
    fn dual_phase(&mut self) -> Result<LpStatus> {
        let ftol = self.opts.feasibility_tol;
        let dtol = self.opts.optimality_tol;
        let ptol = self.opts.pivot_tol;
        let mut degenerate_run = 0usize;
        let mut row_alpha = vec![0.0; self.total()];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; self.total()];
        let mut rho = vec![0.0; self.m];
        let mut retried = false;
        loop {
            let bland = degenerate_run >= self.opts.bland_after;
            // Leaving row: steepest-edge scaled violation (Bland: lowest
            // variable).
            let mut leave: Option<(usize, f64)> = None;
            for p in 0..self.m {
                let j = self.basis[p];
                let v = (self.lb[j] - self.x[j]).max(self.x[j] - self.ub[j]);
                if v <= ftol {
                    continue;
                }
                let v = v * v / self.weights[p];
                let better = match leave {
                    None => true,
                    Some((bp, bv)) => {
                        if bland {
                            j < self.basis[bp]
                        } else {
                            v > bv
                        }
                    }
                };
                if better {
                    leave = Some((p, v));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(LpStatus::Optimal);
            };
            self.tick()?;
            let l = self.basis[r];
            let below = self.x[l] < self.lb[l];
            // Pivot row over the nonbasic columns.
            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.factor.as_ref().expect("factored").btran(&mut rho);
            for &j in &touched {
                row_alpha[j] = 0.0;
                mark[j] = false;
            }
            touched.clear();
            for (i, &ri) in rho.iter().enumerate() {
                if ri.abs() < 1e-12 {
                    continue;
                }
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    let j = self.row_col[k];
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    row_alpha[j] += ri * self.row_val[k];
                }
                let lj = self.n + i;
                if !mark[lj] {
                    mark[lj] = true;
                    touched.push(lj);
                }
                row_alpha[lj] += ri;
            }
            // Moving an eligible column off its bound pushes x_l toward the
            // violated bound.
            let eligible = |s: &Self, j: usize, a: f64| -> bool {
                if s.pos[j] != NONBASIC || s.frozen(j) || a.abs() <= ptol {
                    return false;
                }
                let up = !s.at_upper[j];
                (a < 0.0) == (up == below)
            };
            let slack = |s: &Self, j: usize| -> f64 {
                let dj = if s.at_upper[j] { -s.d[j] } else { s.d[j] };
                dj.max(0.0)
            };
            // Harris two-pass ratio test.
            let mut bound = f64::INFINITY;
            for &j in &touched {
                let a = row_alpha[j];
                if eligible(self, j, a) {
                    bound = bound.min((slack(self, j) + dtol) / a.abs());
                }
            }
            if bound == f64::INFINITY {
                return Ok(LpStatus::Infeasible);
            }
            let mut enter: Option<(usize, f64)> = None;
            for &j in &touched {
                let a = row_alpha[j];
                if !eligible(self, j, a) || slack(self, j) / a.abs() > bound {
                    continue;
                }
                let better = match enter {
                    None => true,
                    Some((q, qa)) => {
                        if bland {
                            j < q
                        } else {
                            a.abs() > qa.abs()
                        }
                    }
                };
                if better {
                    enter = Some((j, a));
                }
            }
            let (q, arq) = enter.expect("bound came from an eligible column");
            let alpha_q = self.ftran_column(q);
            if (alpha_q[r] - arq).abs() > 1e-6 * (1.0 + arq.abs()) {
                if retried {
                    return Err(Error::NumericalFailure((alpha_q[r] - arq).abs()));
                }
                retried = true;
                self.refactor()?;
                continue;
            }
            retried = false;
            // Steepest-edge weights from tau = B^-1 rho.
            let wr = rho.iter().map(|v| v * v).sum::<f64>();
            let mut tau = rho.clone();
            self.factor.as_ref().expect("factored").ftran(&mut tau);
            for p in 0..self.m {
                let a = alpha_q[p];
                if p != r && a != 0.0 {
                    let k = a / arq;
                    let w = self.weights[p] + k * (k * wr - 2.0 * tau[p]);
                    self.weights[p] = w.max(1e-8);
                }
            }
            self.weights[r] = (wr / (arq * arq)).max(1e-8);
            let theta_d = self.d[q] / arq;
            if theta_d.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for &j in &touched {
                if self.pos[j] == NONBASIC {
                    self.d[j] -= theta_d * row_alpha[j];
                }
            }
            self.d[q] = 0.0;
            self.d[l] = -theta_d;
            let target = if below { self.lb[l] } else { self.ub[l] };
            let theta_p = (self.x[l] - target) / alpha_q[r];
            for p in 0..self.m {
                let a = alpha_q[p];
                if a != 0.0 {
                    let j = self.basis[p];
                    self.x[j] -= theta_p * a;
                }
            }
            self.x[q] += theta_p;
            self.x[l] = target;
            self.at_upper[l] = !below;
            self.replace(r, q, &alpha_q)?;
        }
    }

    /// Primal simplex from a primal feasible basis.
    fn primal_phase(&mut self) -> Result<LpStatus> {
        let dtol = self.opts.optimality_tol;
        let mut degenerate_run = 0usize;
        let mut verified = false;
        loop {
            let bland = degenerate_run >= self.opts.bland_after;
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.total() {
                if self.pos[j] != NONBASIC || self.frozen(j) {
                    continue;
                }
                let dj = self.d[j];
                let ok = if self.at_upper[j] { dj > dtol } else { dj < -dtol };
                if !ok {
                    continue;
                }
                if bland {
                    best = Some((j, dj));
                    break;
                }
                if best.map_or(true, |(_, bd)| dj.abs() > bd.abs()) {
                    best = Some((j, dj));
                }
            }
            let Some((q, dq)) = best else {
                if verified {
                    return Ok(LpStatus::Optimal);
                }
                // Confirm on a fresh factorization.
                self.refactor()?;
                verified = true;
                continue;
            };
            verified = false;
            self.tick()?;
            let alpha = self.ftran_column(q);
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let (t, leave) = match self.primal_ratio(q, dir, &alpha, bland) {
                Step::Unbounded => return Ok(LpStatus::Unbounded),
                Step::Flip(t) => (t, None),
                Step::Pivot(t, r) => (t, Some(r)),
            };
            if t <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.x[q] += dir * t;
            for p in 0..self.m {
                let a = alpha[p];
                if a != 0.0 {
                    let j = self.basis[p];
                    self.x[j] -= dir * a * t;
                }
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                    self.x[q] = if self.at_upper[q] { self.ub[q] } else { self.lb[q] };
                }
                Some(r) => {
                    let l = self.basis[r];
                    let decreasing = -dir * alpha[r] < 0.0;
                    self.at_upper[l] = !decreasing;
                    self.x[l] = if decreasing { self.lb[l] } else { self.ub[l] };
                    self.replace(r, q, &alpha)?;
                    if self.factor.as_ref().expect("factored").num_updates() > 0 {
                        self.recompute_duals();
                    }
                }
            }
        }
    }

    fn primal_ratio(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let ftol = self.opts.feasibility_tol;
        let ptol = self.opts.pivot_tol;
        let range = self.ub[q] - self.lb[q];
        let mut relaxed = f64::INFINITY;
        for p in 0..self.m {
            let a = alpha[p];
            if a.abs() <= ptol {
                continue;
            }
            let v = self.basis[p];
            let delta = -dir * a;
            let lim = if delta < 0.0 {
                (self.x[v] - self.lb[v] + ftol) / -delta
            } else {
                (self.ub[v] - self.x[v] + ftol) / delta
            };
            relaxed = relaxed.min(lim);
        }
        if relaxed == f64::INFINITY {
            return if range.is_finite() {
                Step::Flip(range)
            } else {
                Step::Unbounded
            };
        }
        let mut chosen: Option<(usize, f64)> = None;
        for p in 0..self.m {
            let a = alpha[p];
            if a.abs() <= ptol {
                continue;
            }
            let v = self.basis[p];
            let delta = -dir * a;
            let exact = if delta < 0.0 {
                (self.x[v] - self.lb[v]) / -delta
            } else {
                (self.ub[v] - self.x[v]) / delta
            };
            if !exact.is_finite() || exact > relaxed {
                continue;
            }
            let better = match chosen {
                None => true,
                Some((c, _)) if bland => v < self.basis[c],
                Some((c, _)) => a.abs() > alpha[c].abs(),
            };
            if better {
                chosen = Some((p, exact.max(0.0)));
            }
        }
        match chosen {
            Some((_, t)) if range <= t => Step::Flip(range),
            Some((r, t)) => Step::Pivot(t, r),
            None if range.is_finite() => Step::Flip(range),
            None => Step::Unbounded,
        }
    }

    fn ftran_column(&self, q: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        self.for_each_in_column(q, |i, v| a[i] = v);
        self.factor.as_ref().expect("factored").ftran(&mut a);
        for v in a.iter_mut() {
            if v.abs() < 1e-12 {
                *v = 0.0;
            }
        }
        a
    }

    fn replace(&mut self, r: usize, q: usize, alpha: &[f64]) -> Result<()> {
        self.factor.as_mut().expect("factored").update(r, alpha);
        let l = self.basis[r];
        self.pos[l] = NONBASIC;
        self.basis[r] = q;
        self.pos[q] = r;
        let f = self.factor.as_ref().expect("factored");
        if f.num_updates() >= self.opts.refactor_every || f.bloated() {
            self.refactor()?;
        }
        Ok(())
    }

    fn recompute_duals(&mut self) {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.factor.as_ref().expect("factored").btran(&mut y);
        self.d.clear();
        self.d.resize(self.total(), 0.0);
        for j in 0..self.total() {
            if self.pos[j] != NONBASIC {
                continue;
            }
            let mut dj = self.cost[j];
            self.for_each_in_column(j, |i, a| dj -= y[i] * a);
            self.d[j] = dj;
        }
    }

    fn basis_columns(&self) -> Vec<Vec<(usize, f64)>> {
        self.basis
            .iter()
            .map(|&j| {
                let mut col = Vec::new();
                self.for_each_in_column(j, |i, v| col.push((i, v)));
                col
            })
            .collect()
    }

    /// Refactors the basis, swapping in logicals for numerically dependent
    /// columns, then recomputes basic values and reduced costs.
    fn refactor(&mut self) -> Result<()> {
        let mut attempts = 0;
        let factor = loop {
            match Factor::new(self.m, self.basis_columns()) {
                Ok(f) => break f,
                Err(sing) => {
                    attempts += 1;
                    if attempts > 3 || sing.positions.len() != sing.rows.len() {
                        return Err(Error::NumericalFailure(0.0));
                    }
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let logical = self.n + r;
                        if self.pos[logical] != NONBASIC {
                            return Err(Error::NumericalFailure(0.0));
                        }
                        let out = self.basis[p];
                        let (l, u) = (self.lb[out], self.ub[out]);
                        let to_upper = u.is_finite() && (!l.is_finite() || u - self.x[out] < self.x[out] - l);
                        self.at_upper[out] = to_upper;
                        self.x[out] = if to_upper { u } else { l };
                        self.pos[out] = NONBASIC;
                        self.basis[p] = logical;
                        self.pos[logical] = p;
                    }
                }
            }
        };
        self.factor = Some(factor);
        let mut rhs = self.b.clone();
        for j in 0..self.total() {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_each_in_column(j, |r, v| rhs[r] -= v * xj);
            }
        }
        self.factor.as_ref().expect("factored").ftran(&mut rhs);
        for p in 0..self.m {
            self.x[self.basis[p]] = rhs[p];
        }
        self.recompute_duals();
        Ok(())
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot(f64, usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarMeta;
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
            integer: vec![false; n],
            fixed: BTreeMap::new(),
            var_meta: (0..n).map(VarMeta::Face).collect(),
            known_lower_bound: None,
        }
    }

    fn triangle_cover() -> Model {
        // min x0 + x1 + x2, pairwise sums >= 1 -> 1.5 at (0.5, 0.5, 0.5)
        model(
            vec![1.0, 1.0, 1.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Ge, 1.0),
                (vec![(1, 1.0), (2, 1.0)], Sense::Ge, 1.0),
                (vec![(0, 1.0), (2, 1.0)], Sense::Ge, 1.0),
            ],
        )
    }

    #[test]
    fn small_covering_lp() {
        let r = solve_lp(&triangle_cover()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn equality_and_upper_bounds() {
        // min -x0 - 2 x1, x0 + x1 = 1.5, both in [0, 1]
        let m = model(vec![-1.0, -2.0], vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.5)]);
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value + 2.5).abs() < 1e-9);
        assert_eq!(r.solution.values, vec![0.5, 1.0]);
    }

    #[test]
    fn infeasible_rows() {
        let m = model(vec![1.0, 1.0], vec![(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 3.0)]);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
        let m = model(
            vec![1.0],
            vec![
                (vec![(0, 1.0)], Sense::Le, 0.25),
                (vec![(0, 1.0)], Sense::Ge, 0.5),
            ],
        );
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn fixed_variables_are_pinned() {
        let mut m = model(vec![1.0, 1.0], vec![(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 1.0)]);
        m.fixed.insert(1, 1);
        let r = solve_lp(&m).unwrap();
        assert_eq!(r.solution.values[1], 1.0);
        assert!((r.value - 1.0).abs() < 1e-9);
        m.fixed.insert(0, 1);
        assert_eq!(solve_lp(&m).unwrap().solution.values, vec![1.0, 1.0]);
    }

    #[test]
    fn negative_rhs_equalities() {
        // x0 - x1 = -1 forces x1 = 1, x0 = 0
        let m = model(vec![1.0, 1.0], vec![(vec![(0, 1.0), (1, -1.0)], Sense::Eq, -1.0)]);
        assert_eq!(solve_lp(&m).unwrap().solution.values, vec![0.0, 1.0]);
    }

    #[test]
    fn refactoring_bland_and_primal_cleanup() {
        let k = 60;
        let rows = (0..k)
            .map(|i| (vec![(i, 1.0), ((i + 1) % k, 1.0)], Sense::Ge, 1.0))
            .collect();
        let mut m = model(vec![1.0; k], rows);
        m.objective[0] = 1.5;
        assert!((solve_lp(&m).unwrap().value - 30.0).abs() < 1e-9);
        // Heavy cost noise leaves the dual pass at a vertex the primal pass
        // must repair.
        for opts in [
            LpOptions {
                refactor_every: 7,
                ..LpOptions::default()
            },
            LpOptions {
                cost_perturbation: 0.4,
                ..LpOptions::default()
            },
            LpOptions {
                cost_perturbation: 0.0,
                bland_after: 0,
                ..LpOptions::default()
            },
        ] {
            let (lb, ub) = default_bounds(&m);
            let r = solve_lp_with(&m, &lb, &ub, &[], &opts).unwrap();
            assert!((r.value - 30.0).abs() < 1e-9, "{opts:?}: {}", r.value);
        }
    }

    #[test]
    fn warm_start_after_bound_change_and_new_rows() {
        let m = triangle_cover();
        let mut s = LpSolver::new(&m, LpOptions::default());
        assert!((s.solve().unwrap().value - 1.5).abs() < 1e-9);
        let snap = s.save_basis();
        s.set_bounds(0, 1.0, 1.0);
        assert!((s.solve().unwrap().value - 2.0).abs() < 1e-9);
        s.set_bounds(0, 0.0, 1.0);
        s.restore_basis(&snap);
        assert!((s.solve().unwrap().value - 1.5).abs() < 1e-9);
        s.add_rows(&[Row {
            name: "cut".into(),
            coeffs: vec![(0, 1.0), (1, 1.0), (2, 1.0)],
            sense: Sense::Ge,
            rhs: 2.0,
        }]);
        let r = s.solve().unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!(s.residual(&r.solution.values) < 1e-9);
    }
}
