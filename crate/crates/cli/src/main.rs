use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use convpart::error::Error;
use convpart::faces::enumerate_faces;
use convpart::geometry::Instance;
use convpart::io;
use convpart::model::build_edge_model;
use convpart::pipeline::{self, BoundReport, PipelineOptions, SolveReport};
use convpart::preprocess::{find_mandatory, prune_dominated_with, PruneConfig};
use convpart::solver::{exact_cover_oracle, IpStatus, Limits};
use convpart::verify::{verify_partition, ViolationCode};

/// Minimum convex partition of planar point sets.
#[derive(Parser)]
#[command(name = "convpart", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for multi-instance commands (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Clone)]
struct SolveFlags {
    /// Keep every enumerated face.
    #[arg(long)]
    no_preprocess: bool,
    /// Add clique and odd-cycle cuts at the root.
    #[arg(long)]
    cuts: bool,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: u64,
    /// Seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
}

impl SolveFlags {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            preprocess: !self.no_preprocess,
            limits: self.limits(),
            ..PipelineOptions::default()
        }
    }

    fn limits(&self) -> Limits {
        Limits {
            node_limit: self.node_limit,
            time_limit: Duration::from_secs_f64(self.time_limit),
            cuts: self.cuts,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve instances to optimality.
    Solve {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[command(flatten)]
        flags: SolveFlags,
        /// Render the partition (a directory when several instances are given).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the solution file (a directory when several instances are given).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LP relaxation and Euler bound.
    Bound {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Face counts before and after preprocessing.
    Enumerate {
        instance: PathBuf,
        #[arg(long)]
        no_preprocess: bool,
        /// Render the faces of the catalog.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Exhaustive exact-cover search (small instances only).
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Generate a uniform random instance.
    Gen {
        n: usize,
        seed: u64,
        #[arg(long, default_value_t = io::DEFAULT_GRID)]
        grid: i64,
        /// Output path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the model in LP file format.
    ExportLp {
        instance: PathBuf,
        out: PathBuf,
        #[arg(long)]
        no_preprocess: bool,
        /// Export the edge-based model instead of the face model.
        #[arg(long)]
        edge_model: bool,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Parse { .. }
            | Error::DuplicatePoint { .. }
            | Error::CoordinateOverflow { .. }
            | Error::DegenerateInstance(_)
            | Error::InstanceMismatch(_) => (2, "parse"),
            Error::Io(_) => (2, "io"),
            Error::Infeasible(_) | Error::InfeasibleRelaxation => (1, "infeasible"),
            Error::TooLarge { .. } | Error::CatalogOverflow { .. } => (3, "limit"),
            Error::CollinearInput(..) => (1, "invalid"),
            _ => (1, "error"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .expect("thread pool configured once");
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({"error": f.kind, "message": f.message}));
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    let fmt = cli.format;
    match &cli.command {
        Command::Solve {
            instances,
            flags,
            svg,
            out,
        } => solve(instances, flags, svg.as_deref(), out.as_deref(), fmt),
        Command::Bound { instances, flags } => bound(instances, flags, fmt),
        Command::Enumerate {
            instance,
            no_preprocess,
            svg,
        } => enumerate(instance, *no_preprocess, svg.as_deref(), fmt),
        Command::Verify { instance, solution } => verify(instance, solution, fmt),
        Command::Oracle { instance, flags, svg } => oracle(instance, flags, svg.as_deref(), fmt),
        Command::Gen { n, seed, grid, out } => {
            let inst = io::generate_uniform(*n, *seed, *grid)?;
            match out {
                Some(p) => io::save_instance(p, &inst)?,
                None => print!("{}", io::write_instance(&inst)),
            }
            Ok(0)
        }
        Command::ExportLp {
            instance,
            out,
            no_preprocess,
            edge_model,
        } => {
            let inst = io::load_instance(instance)?;
            let model = if *edge_model {
                build_edge_model(&inst)?
            } else {
                let opts = PipelineOptions {
                    preprocess: !no_preprocess,
                    ..PipelineOptions::default()
                };
                pipeline::prepare(&inst, &opts)?.model
            };
            let file = std::fs::File::create(out).map_err(Error::from)?;
            model
                .write_lp(std::io::BufWriter::new(file))
                .map_err(Error::from)?;
            if fmt == Format::Json {
                println!(
                    "{}",
                    json!({"instance": inst.name(), "vars": model.num_vars(), "rows": model.rows.len()})
                );
            } else {
                println!(
                    "wrote {} ({} vars, {} rows)",
                    out.display(),
                    model.num_vars(),
                    model.rows.len()
                );
            }
            Ok(0)
        }
    }
}

/// Output path for one of several instances.
fn per_instance(base: &Path, name: &str, ext: &str, many: bool) -> PathBuf {
    if many {
        base.join(format!("{name}.{ext}"))
    } else {
        base.to_path_buf()
    }
}

fn status_code(status: IpStatus) -> u8 {
    match status {
        IpStatus::Optimal => 0,
        IpStatus::Infeasible => 1,
        IpStatus::NodeLimit | IpStatus::TimeLimit => 3,
    }
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn solve(
    paths: &[PathBuf],
    flags: &SolveFlags,
    svg: Option<&Path>,
    out: Option<&Path>,
    fmt: Format,
) -> CliResult {
    let opts = flags.options();
    let many = paths.len() > 1;
    for dir in [out, svg].into_iter().flatten().filter(|_| many) {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
    }
    let runs: Vec<Result<(Instance, SolveReport), Failure>> = paths
        .par_iter()
        .map(|p| {
            let inst = io::load_instance(p)?;
            let r = pipeline::solve_instance(&inst, &opts)?;
            Ok((inst, r))
        })
        .collect();
    if fmt == Format::Text {
        println!(
            "{:<24} {:>5} {:>9} {:>9} {:>8} {:>6} {:>7} {:>6} {:>7} {:>9} {:>8}  status",
            "name", "n", "|F|", "|F^PP|", "Pp(s)", "Euler", "ceil_LP", "z*", "%Gap", "Cpu(s)", "#nodes"
        );
    }
    let mut code = 0u8;
    for run in runs {
        let (inst, r) = run?;
        if let Some(part) = &r.partition {
            if let Some(base) = svg {
                io::save_svg(per_instance(base, inst.name(), "svg", many), &inst, &part.faces)?;
            }
            if let Some(base) = out {
                io::save_solution(per_instance(base, inst.name(), "json", many), &inst, part)?;
            }
        }
        code = code.max(status_code(r.status));
        match fmt {
            Format::Json => println!("{}", serde_json::to_string(&r).expect("serializable report")),
            Format::Text => println!(
                "{:<24} {:>5} {:>9} {:>9} {:>8.2} {:>6} {:>7} {:>6} {:>7} {:>9.2} {:>8}  {:?}",
                r.instance,
                r.n,
                r.faces,
                r.faces_pp,
                r.preprocess_s,
                r.euler,
                r.lp_ceil,
                fmt_opt(r.objective),
                fmt_opt(r.gap.map(|g| format!("{g:.2}"))),
                r.total_s,
                r.nodes,
                r.status
            ),
        }
    }
    Ok(code)
}

fn bound(paths: &[PathBuf], flags: &SolveFlags, fmt: Format) -> CliResult {
    let opts = flags.options();
    let runs: Vec<Result<BoundReport, Failure>> = paths
        .par_iter()
        .map(|p| Ok(pipeline::bound_instance(&io::load_instance(p)?, &opts)?))
        .collect();
    if fmt == Format::Text {
        println!(
            "{:<24} {:>5} {:>5} {:>9} {:>6} {:>6} {:>8} {:>6} {:>7} {:>7} {:>8} {:>8}",
            "name",
            "n",
            "UB",
            "|F^PP|",
            "%RF",
            "%RE",
            "Pp(s)",
            "Euler",
            "ceil_LP",
            "%Gap",
            "Slv(s)",
            "Tot(s)"
        );
    }
    for run in runs {
        let b = run?;
        match fmt {
            Format::Json => println!("{}", serde_json::to_string(&b).expect("serializable report")),
            Format::Text => println!(
                "{:<24} {:>5} {:>5} {:>9} {:>6.1} {:>6.1} {:>8.2} {:>6} {:>7} {:>7.2} {:>8.2} {:>8.2}",
                b.instance,
                b.n,
                b.upper_bound,
                b.faces_pp,
                b.reduction_faces,
                b.reduction_edges,
                b.preprocess_s,
                b.euler,
                b.lp_ceil,
                b.gap,
                b.lp_s,
                b.total_s
            ),
        }
    }
    Ok(0)
}

fn enumerate(path: &Path, no_preprocess: bool, svg: Option<&Path>, fmt: Format) -> CliResult {
    let inst = io::load_instance(path)?;
    let full = enumerate_faces(&inst)?;
    let (cat, stats) = if no_preprocess {
        (full.clone(), Default::default())
    } else {
        prune_dominated_with(&full, &inst, PruneConfig::default())
    };
    let mandatory = find_mandatory(&cat, &inst)?;
    if let Some(p) = svg {
        io::save_svg(p, &inst, cat.faces())?;
    }
    let v = json!({
        "instance": inst.name(),
        "n": inst.len(),
        "faces": full.len(),
        "faces_pp": cat.len(),
        "dominated_edges": stats.dominated_edges,
        "removed_by_edges": stats.removed_by_edges,
        "removed_by_faces": stats.removed_by_faces,
        "removed_by_chords": stats.removed_by_chords,
        "mandatory": mandatory.len(),
    });
    match fmt {
        Format::Json => println!("{v}"),
        Format::Text => {
            println!("instance   {}", inst.name());
            println!("n          {}", inst.len());
            println!("|F|        {}", full.len());
            println!("|F^PP|     {}", cat.len());
            println!(
                "removed    {} by edges ({} dominated edges), {} by faces, {} by chords",
                stats.removed_by_edges,
                stats.dominated_edges,
                stats.removed_by_faces,
                stats.removed_by_chords
            );
            println!("mandatory  {}", mandatory.len());
        }
    }
    Ok(0)
}

fn verify(instance: &Path, solution: &Path, fmt: Format) -> CliResult {
    let inst = io::load_instance(instance)?;
    let part = io::load_solution(solution, &inst)?;
    let verdict = verify_partition(&inst, &part);
    match fmt {
        Format::Json => println!(
            "{}",
            json!({
                "instance": inst.name(),
                "faces": part.len(),
                "valid": verdict.valid(),
                "violations": verdict.violations.iter().map(|v| json!({"code": code_name(v.code), "detail": v.detail})).collect::<Vec<_>>(),
            })
        ),
        Format::Text => {
            println!(
                "{} ({} faces)",
                if verdict.valid() { "VALID" } else { "INVALID" },
                part.len()
            );
            for v in &verdict.violations {
                println!("  {}: {}", code_name(v.code), v.detail);
            }
        }
    }
    Ok(if verdict.valid() { 0 } else { 1 })
}

fn code_name(c: ViolationCode) -> String {
    format!("{c:?}")
}

fn oracle(path: &Path, flags: &SolveFlags, svg: Option<&Path>, fmt: Format) -> CliResult {
    let inst = io::load_instance(path)?;
    let cat = enumerate_faces(&inst)?;
    let r = exact_cover_oracle(&inst, &cat, &flags.limits())?;
    if let (Some(p), Some(_)) = (svg, r.objective) {
        let faces: Vec<_> = r.chosen.iter().map(|&f| cat.face(f).clone()).collect();
        io::save_svg(p, &inst, &faces)?;
    }
    match fmt {
        Format::Json => println!(
            "{}",
            json!({
                "instance": inst.name(),
                "status": format!("{:?}", r.status),
                "objective": r.objective,
                "faces": r.chosen.iter().map(|&f| cat.face(f).ring().to_vec()).collect::<Vec<_>>(),
                "nodes": r.nodes_explored,
                "time_s": r.wall_time.as_secs_f64(),
            })
        ),
        Format::Text => println!(
            "{}  objective {}  nodes {}  {:.2}s  {:?}",
            inst.name(),
            fmt_opt(r.objective),
            r.nodes_explored,
            r.wall_time.as_secs_f64(),
            r.status
        ),
    }
    Ok(status_code(r.status))
}
