//! End-to-end runs: enumerate → preprocess → bounds → model → solve.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::bounds::{degree_lower_bounds, euler_bound};
use crate::error::{Error, Result};
use crate::faces::{enumerate_faces_capped, FaceCatalog, DEFAULT_FACE_CAP};
use crate::geometry::Instance;
use crate::model::{build_face_model, separate_clique, separate_odd_cycle, Model, VarMeta};
use crate::preprocess::{find_mandatory, prune_dominated_with, PruneConfig, PruneStats};
use crate::solver::{
    greedy_partition, solve_ip_with, solve_lp, IpHooks, IpStatus, Limits, LpStatus, SolveResult,
};
use crate::verify::Partition;

#[derive(Clone, Copy, Debug)]
pub struct PipelineOptions {
    pub preprocess: bool,
    pub limits: Limits,
    pub face_cap: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            preprocess: true,
            limits: Limits::default(),
            face_cap: DEFAULT_FACE_CAP,
        }
    }
}

/// Catalog, bounds and model for one instance.
pub struct Prepared {
    pub full_faces: usize,
    pub catalog: FaceCatalog,
    pub prune: PruneStats,
    pub mandatory: BTreeSet<usize>,
    pub euler: i64,
    pub model: Model,
    pub enumerate_time: Duration,
    pub preprocess_time: Duration,
}

pub fn prepare(inst: &Instance, opts: &PipelineOptions) -> Result<Prepared> {
    let t = Instant::now();
    let full = enumerate_faces_capped(inst, opts.face_cap)?;
    let enumerate_time = t.elapsed();
    let t = Instant::now();
    let full_faces = full.len();
    let (catalog, prune) = if opts.preprocess {
        prune_dominated_with(&full, inst, PruneConfig::default())
    } else {
        (full, PruneStats::default())
    };
    let mandatory = find_mandatory(&catalog, inst)?;
    let preprocess_time = t.elapsed();
    let db = degree_lower_bounds(inst);
    let euler = euler_bound(inst, &db);
    let model = build_face_model(&catalog, inst, &db, &mandatory)?;
    Ok(Prepared {
        full_faces,
        catalog,
        prune,
        mandatory,
        euler,
        model,
        enumerate_time,
        preprocess_time,
    })
}

/// Edges used by at least one catalog face.
pub fn catalog_edges(cat: &FaceCatalog) -> usize {
    cat.arcs().count()
}

/// Percentage gap `100 (z - ceil(lp)) / z` between an objective and a bound.
pub fn gap_percent(objective: i64, bound: i64) -> f64 {
    if objective <= 0 {
        return 0.0;
    }
    100.0 * (objective - bound) as f64 / objective as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub instance: String,
    pub n: usize,
    pub faces: usize,
    pub faces_pp: usize,
    pub mandatory: usize,
    pub euler: i64,
    pub lp_root: f64,
    pub lp_ceil: i64,
    pub greedy: usize,
    pub status: IpStatus,
    pub objective: Option<i64>,
    pub gap: Option<f64>,
    pub nodes: u64,
    pub cuts: usize,
    pub preprocess_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
    #[serde(skip)]
    pub partition: Option<Partition>,
}

/// Variables for the faces of a partition, if every face is in the model.
fn partition_vars(cat: &FaceCatalog, p: &Partition) -> Option<Vec<usize>> {
    p.faces.iter().map(|f| cat.find(f.ring())).collect()
}

/// Solves the face model of `inst` to optimality (or a limit).
pub fn solve_instance(inst: &Instance, opts: &PipelineOptions) -> Result<SolveReport> {
    let started = Instant::now();
    let prep = prepare(inst, opts)?;
    let t = Instant::now();
    let greedy = greedy_partition(inst, &prep.catalog);
    let sep = |frac: &crate::model::FractionalSolution| {
        let mut cuts = separate_clique(inst, &prep.catalog, frac);
        cuts.extend(separate_odd_cycle(inst, &prep.catalog, frac));
        cuts
    };
    let start = partition_vars(&prep.catalog, &greedy);
    let hooks = IpHooks {
        upper_bound: Some(greedy.len() as i64),
        start,
        separator: Some(&sep),
    };
    let result = solve_ip_with(&prep.model, &opts.limits, hooks)?;
    let solve_time = t.elapsed();
    Ok(report(
        inst,
        &prep,
        &greedy,
        &result,
        solve_time,
        started.elapsed(),
    ))
}

fn report(
    inst: &Instance,
    prep: &Prepared,
    greedy: &Partition,
    r: &SolveResult,
    solve_time: Duration,
    total: Duration,
) -> SolveReport {
    let lp_ceil = (r.lp_root_value - crate::solver::bnb::BOUND_EPS).ceil() as i64;
    let partition = r.objective.map(|_| {
        let faces = r
            .chosen
            .iter()
            .map(|&j| match prep.model.var_meta[j] {
                VarMeta::Face(f) => prep.catalog.face(f).clone(),
                VarMeta::Edge(_) => unreachable!("face model"),
            })
            .collect();
        Partition::new(faces, "solve")
    });
    SolveReport {
        instance: inst.name().to_string(),
        n: inst.len(),
        faces: prep.full_faces,
        faces_pp: prep.catalog.len(),
        mandatory: prep.mandatory.len(),
        euler: prep.euler,
        lp_root: r.lp_root_value,
        lp_ceil,
        greedy: greedy.len(),
        status: r.status,
        objective: r.objective,
        gap: (r.status == IpStatus::Optimal)
            .then(|| r.objective.map(|z| gap_percent(z, lp_ceil)))
            .flatten(),
        nodes: r.nodes_explored,
        cuts: r.cuts_added,
        preprocess_s: (prep.enumerate_time + prep.preprocess_time).as_secs_f64(),
        solve_s: solve_time.as_secs_f64(),
        total_s: total.as_secs_f64(),
        partition,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub instance: String,
    pub n: usize,
    pub upper_bound: usize,
    pub faces: usize,
    pub faces_pp: usize,
    /// `100 (1 - |F^PP| / |F|)`.
    pub reduction_faces: f64,
    /// `100 (1 - |E^PP| / (n (n - 1) / 2))`.
    pub reduction_edges: f64,
    pub euler: i64,
    pub lp_root: f64,
    pub lp_ceil: i64,
    pub gap: f64,
    pub preprocess_s: f64,
    pub lp_s: f64,
    pub total_s: f64,
}

/// LP relaxation and Euler bound only; the greedy partition supplies the
/// upper bound for the gap column.
pub fn bound_instance(inst: &Instance, opts: &PipelineOptions) -> Result<BoundReport> {
    let started = Instant::now();
    let prep = prepare(inst, opts)?;
    let t = Instant::now();
    let lp = solve_lp(&prep.model)?;
    if lp.status != LpStatus::Optimal {
        return Err(Error::InfeasibleRelaxation);
    }
    let lp_time = t.elapsed();
    let greedy = greedy_partition(inst, &prep.catalog);
    let n = inst.len();
    let lp_ceil = (lp.value - crate::solver::bnb::BOUND_EPS).ceil() as i64;
    Ok(BoundReport {
        instance: inst.name().to_string(),
        n,
        upper_bound: greedy.len(),
        faces: prep.full_faces,
        faces_pp: prep.catalog.len(),
        reduction_faces: 100.0 * (1.0 - prep.catalog.len() as f64 / prep.full_faces.max(1) as f64),
        reduction_edges: 100.0 * (1.0 - catalog_edges(&prep.catalog) as f64 / (n * (n - 1) / 2) as f64),
        euler: prep.euler,
        lp_root: lp.value,
        lp_ceil,
        gap: gap_percent(greedy.len() as i64, lp_ceil),
        preprocess_s: (prep.enumerate_time + prep.preprocess_time).as_secs_f64(),
        lp_s: lp_time.as_secs_f64(),
        total_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify_partition;

    #[test]
    fn triangle_and_interior_point() {
        let inst = Instance::new("t", &[(0, 0), (6, 0), (0, 6), (1, 1)]).unwrap();
        let r = solve_instance(&inst, &PipelineOptions::default()).unwrap();
        assert_eq!(r.objective, Some(3));
        assert_eq!(r.nodes, 0);
        assert!(verify_partition(&inst, r.partition.as_ref().unwrap()).valid());
        let b = bound_instance(&inst, &PipelineOptions::default()).unwrap();
        assert_eq!(b.lp_ceil, 3);
        assert!(b.euler <= b.lp_ceil);
    }

    #[test]
    fn gap_formula() {
        assert_eq!(gap_percent(32, 31), 100.0 / 32.0);
        assert_eq!(gap_percent(10, 10), 0.0);
    }
}
