use thiserror::Error;

use crate::geometry::ArcKey;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),
    #[error("duplicate point: ids {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("coordinate of point {id} ({x}, {y}) is outside the 32-bit range")]
    CoordinateOverflow { id: usize, x: i64, y: i64 },
    #[error("point {point} is an endpoint of arc ({}, {})", arc.i, arc.j)]
    EndpointOfArc { arc: ArcKey, point: usize },
    #[error("unknown point id {0}")]
    UnknownPoint(usize),
    #[error("unknown arc ({}, {})", .0.i, .0.j)]
    UnknownArc(ArcKey),

    #[error("face catalog exceeds the cap of {cap} faces")]
    CatalogOverflow { cap: usize },
    #[error("instance of size {n} exceeds the cap of {cap} for this routine")]
    TooLarge { n: usize, cap: usize },

    #[error("faces are not adjacent along exactly one edge")]
    NotAdjacent,
    #[error("infeasible: hull edge ({}, {}) has no face on its interior side", .0.i, .0.j)]
    Infeasible(ArcKey),

    #[error("no instance point inside the region")]
    EmptyRegion,
    #[error("degenerate cut line: {0}")]
    DegenerateLine(String),

    #[error("the LP relaxation is infeasible")]
    InfeasibleRelaxation,

    #[error("points {0}, {1}, {2} are collinear; the edge model needs general position")]
    CollinearInput(usize, usize, usize),

    #[error("LP residual {0:e} exceeds tolerance after refactorization")]
    NumericalFailure(f64),

    #[error("hull edge ({}, {}) missing from edge set", .0.i, .0.j)]
    MissingHullEdge(ArcKey),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("solution does not match instance: {0}")]
    InstanceMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
