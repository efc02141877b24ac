//! Instance and solution files, random instances, and SVG rendering.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::Face;
use crate::geometry::{Instance, COORD_MAX};
use crate::verify::Partition;

#[derive(Serialize, Deserialize)]
struct PointRecord {
    i: i64,
    x: i64,
    y: i64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    points: Vec<PointRecord>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct SolutionFile {
    instance: String,
    objective: usize,
    faces: Vec<Vec<usize>>,
    edges: Vec<[usize; 2]>,
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    parse_instance(&text, &stem)
}

/// Parses either the JSON object format or the plain `n` / `x y` format.
pub fn parse_instance(text: &str, default_name: &str) -> Result<Instance> {
    let trimmed = text.trim_start();
    let (name, coords) = if trimmed.starts_with('{') {
        parse_json(text)?
    } else {
        (default_name.to_string(), parse_plain(text)?)
    };
    build(&name, &coords)
}

fn parse_json(text: &str) -> Result<(String, Vec<(i64, i64)>)> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let n = file.points.len();
    let mut coords = vec![None; n];
    for (k, p) in file.points.iter().enumerate() {
        let slot = usize::try_from(p.i).ok().filter(|&i| i < n).ok_or_else(|| {
            Error::parse(
                format!("points[{k}].i"),
                format!("id {} out of range 0..{n}", p.i),
            )
        })?;
        if coords[slot].is_some() {
            return Err(Error::parse(
                format!("points[{k}].i"),
                format!("id {} repeated", p.i),
            ));
        }
        coords[slot] = Some((p.x, p.y));
    }
    Ok((file.name, coords.into_iter().map(|c| c.unwrap()).collect()))
}

fn parse_plain(text: &str) -> Result<Vec<(i64, i64)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first, header) = lines.next().ok_or_else(|| Error::parse("line 1", "empty file"))?;
    let n: usize = header.parse().map_err(|_| {
        Error::parse(
            format!("line {first}"),
            format!("expected point count, got {header:?}"),
        )
    })?;
    let mut coords = Vec::with_capacity(n);
    for (line, body) in lines {
        if coords.len() == n {
            return Err(Error::parse(format!("line {line}"), "more points than declared"));
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [xs, ys] = fields[..] else {
            return Err(Error::parse(
                format!("line {line}"),
                format!("expected \"x y\", got {body:?}"),
            ));
        };
        let num = |s: &str, field: &str| {
            s.parse::<i64>().map_err(|_| {
                Error::parse(
                    format!("line {line}, field {field}"),
                    format!("not an integer: {s:?}"),
                )
            })
        };
        coords.push((num(xs, "x")?, num(ys, "y")?));
    }
    if coords.len() != n {
        return Err(Error::parse(
            "end of file",
            format!("declared {n} points, found {}", coords.len()),
        ));
    }
    Ok(coords)
}

fn build(name: &str, coords: &[(i64, i64)]) -> Result<Instance> {
    Instance::new(name, coords).map_err(|e| match e {
        Error::DuplicatePoint { first, second } => {
            Error::parse(format!("point {second}"), format!("duplicate of point {first}"))
        }
        other => other,
    })
}

pub fn write_instance(inst: &Instance) -> String {
    let file = InstanceFile {
        name: inst.name().to_string(),
        points: inst
            .points()
            .iter()
            .map(|p| PointRecord {
                i: p.id as i64,
                x: p.x,
                y: p.y,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn save_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    fs::write(path, write_instance(inst) + "\n")?;
    Ok(())
}

pub const DEFAULT_GRID: i64 = 1_000_000;

/// `n` distinct points uniform on `[0, grid]^2`, deterministic in `seed`.
pub fn generate_uniform(n: usize, seed: u64, grid: i64) -> Result<Instance> {
    if n < 3 {
        return Err(Error::DegenerateInstance(format!(
            "need at least 3 points, got {n}"
        )));
    }
    if grid < 1 || grid > COORD_MAX || ((grid + 1) as u128).pow(2) < n as u128 {
        return Err(Error::DegenerateInstance(format!(
            "grid {grid} cannot hold {n} points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut coords = Vec::with_capacity(n);
    // Resample collisions; retry whole draws that collapse onto a line.
    loop {
        while coords.len() < n {
            let p = (rng.gen_range(0..=grid), rng.gen_range(0..=grid));
            if seen.insert(p) {
                coords.push(p);
            }
        }
        match Instance::new(format!("uniform-{n}-{seed}"), &coords) {
            Err(Error::DegenerateInstance(_)) => {
                coords.clear();
                seen.clear();
            }
            other => return other,
        }
    }
}

pub fn write_solution(inst: &Instance, p: &Partition) -> String {
    let file = SolutionFile {
        instance: inst.name().to_string(),
        objective: p.len(),
        faces: p.faces.iter().map(|f| f.ring().to_vec()).collect(),
        edges: p.edges(inst).into_iter().map(|a| [a.i, a.j]).collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn save_solution(path: impl AsRef<Path>, inst: &Instance, p: &Partition) -> Result<()> {
    fs::write(path, write_solution(inst, p) + "\n")?;
    Ok(())
}

pub fn load_solution(path: impl AsRef<Path>, inst: &Instance) -> Result<Partition> {
    parse_solution(&fs::read_to_string(path)?, inst)
}

pub fn parse_solution(text: &str, inst: &Instance) -> Result<Partition> {
    let file: SolutionFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    if file.objective != file.faces.len() {
        return Err(Error::parse(
            "objective",
            format!("{} does not match {} faces", file.objective, file.faces.len()),
        ));
    }
    let n = inst.len();
    let bad = file
        .faces
        .iter()
        .flatten()
        .chain(file.edges.iter().flatten())
        .find(|&&v| v >= n);
    if let Some(v) = bad {
        return Err(Error::InstanceMismatch(format!(
            "point id {v} but instance {:?} has {n} points",
            inst.name()
        )));
    }
    for (k, ring) in file.faces.iter().enumerate() {
        if ring.len() < 3 {
            return Err(Error::parse(
                format!("faces[{k}]"),
                "a face needs at least 3 vertices",
            ));
        }
    }
    Ok(Partition::new(
        file.faces.into_iter().map(Face::from_ccw_ring).collect(),
        file.instance,
    ))
}

const PALETTE: [&str; 8] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
];

/// Deterministic SVG of the points, the dashed hull and the given faces.
pub fn render_svg(inst: &Instance, faces: &[Face]) -> String {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 20.0;
    let pts = inst.points();
    let (min_x, max_x) = pts
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (min_y, max_y) = pts
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let span = ((max_x - min_x).max(max_y - min_y)).max(1) as f64;
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |id: usize| {
        let p = inst.point(id);
        (
            MARGIN + (p.x - min_x) as f64 * scale,
            SIZE - MARGIN - (p.y - min_y) as f64 * scale,
        )
    };
    let ring_attr = |ring: &[usize]| {
        ring.iter()
            .map(|&v| {
                let (x, y) = map(v);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    for (k, face) in faces.iter().enumerate() {
        let _ = writeln!(
            s,
            "<polygon points=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"1\"/>",
            ring_attr(face.ring()),
            PALETTE[k % PALETTE.len()]
        );
    }
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"gray\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>",
        ring_attr(&[inst.hull_ring(), &inst.hull_ring()[..1]].concat())
    );
    for p in pts {
        let (x, y) = map(p.id);
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"black\"/>");
    }
    s.push_str("</svg>\n");
    s
}

pub fn save_svg(path: impl AsRef<Path>, inst: &Instance, faces: &[Face]) -> Result<()> {
    fs::write(path, render_svg(inst, faces))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_triangle() {
        let t = parse_instance("3\n0 0\n2 0\n0 2\n", "tri").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.name(), "tri");
    }

    #[test]
    fn json_square() {
        let text = r#"{"name": "sq", "points": [
            {"i": 0, "x": 0, "y": 0}, {"i": 1, "x": 4, "y": 0},
            {"i": 3, "x": 0, "y": 4}, {"i": 2, "x": 4, "y": 4}]}"#;
        let q = parse_instance(text, "ignored").unwrap();
        assert_eq!(q.name(), "sq");
        assert_eq!(q.hull_ring().len(), 4);
        assert_eq!((q.point(3).x, q.point(3).y), (0, 4));
    }

    #[test]
    fn parse_errors() {
        let dup = parse_instance("3\n0 0\n1 0\n0 0\n", "d").unwrap_err();
        match dup {
            Error::Parse { location, message } => {
                assert!(
                    location.contains('2') && message.contains('0'),
                    "{location} {message}"
                )
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_instance("3\n0 0\n1 x\n0 2\n", "b"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("4\n0 0\n1 0\n0 2\n", "b"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("{\"name\": 1}", "b"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("3\n0 0\n1 1\n2 2\n", "c"),
            Err(Error::DegenerateInstance(_))
        ));
        assert!(matches!(
            parse_instance("3\n0 0\n4294967296 0\n0 2\n", "o"),
            Err(Error::CoordinateOverflow { .. })
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_uniform(50, 7, DEFAULT_GRID).unwrap();
        let b = generate_uniform(50, 7, DEFAULT_GRID).unwrap();
        assert_eq!(a.points(), b.points());
        let c = generate_uniform(50, 8, DEFAULT_GRID).unwrap();
        assert_ne!(a.points(), c.points());
        let t = generate_uniform(3, 1, DEFAULT_GRID).unwrap();
        assert_eq!(t.len(), 3);
        assert!(generate_uniform(2, 1, DEFAULT_GRID).is_err());
    }

    #[test]
    fn solution_round_trip() {
        let t = parse_instance("3\n0 0\n2 0\n0 2\n", "tri").unwrap();
        let p = Partition::new(vec![Face::from_ccw_ring(vec![0, 1, 2])], "test");
        let text = write_solution(&t, &p);
        let back = parse_solution(&text, &t).unwrap();
        assert_eq!(back.faces, p.faces);
        let foreign = r#"{"instance": "tri", "objective": 1, "faces": [[0, 1, 5]], "edges": []}"#;
        assert!(matches!(
            parse_solution(foreign, &t),
            Err(Error::InstanceMismatch(_))
        ));
        let miscount = r#"{"instance": "tri", "objective": 2, "faces": [[0, 1, 2]], "edges": []}"#;
        assert!(matches!(parse_solution(miscount, &t), Err(Error::Parse { .. })));
    }

    #[test]
    fn svg_is_deterministic() {
        let t = parse_instance("3\n0 0\n2 0\n0 2\n", "tri").unwrap();
        let faces = vec![Face::from_ccw_ring(vec![0, 1, 2])];
        let a = render_svg(&t, &faces);
        assert_eq!(a, render_svg(&t, &faces));
        assert_eq!(a.matches("<polygon").count(), 1);
        let empty = render_svg(&t, &[]);
        assert_eq!(empty.matches("<polygon").count(), 0);
        assert!(empty.contains("stroke-dasharray"));
        assert_eq!(empty.matches("<circle").count(), 3);
    }
}
