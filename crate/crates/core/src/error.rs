use thiserror::Error;

use crate::basis::Family;

/// Errors produced by the sampling, approximation and quadrature routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} lies outside the domain of the {family} basis")]
    Domain { family: Family, x: f64 },

    #[error("mode index must be at least 1")]
    ZeroIndex,

    #[error("sigma = {sigma} does not exceed the critical exponent {critical}")]
    Divergent { sigma: f64, critical: f64 },

    #[error("series diverges for sigma = {sigma}; admissible range is sigma < {supremum}")]
    NormDivergent { sigma: f64, supremum: f64 },

    #[error("truncation at lambda = {lambda_max} leaves relative tail {relative:.3e} above {tolerance:.3e}")]
    Truncation {
        lambda_max: usize,
        relative: f64,
        tolerance: f64,
    },

    #[error("spectral function is constant over the degree range; growth exponent undefined")]
    DegenerateFit,

    #[error("rate fit needs at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("layer n = {n} has {nodes} nodes but P_n has dimension {dim}")]
    Underdetermined { n: usize, nodes: usize, dim: usize },

    #[error("invalid layer: {0}")]
    InvalidLayer(String),

    #[error("non-finite basis evaluation at node {index}")]
    NonFinite { index: usize },

    #[error("layer n = {n} has lower frame bound {lower:.3e} at or below floor {floor:.3e}")]
    IllConditioned { n: usize, lower: f64, floor: f64 },

    #[error("expected {expected} samples, got {found}")]
    Shape { expected: usize, found: usize },

    #[error("normal-equation residual {residual:.3e} exceeds {limit:.3e}")]
    Residual { residual: f64, limit: f64 },

    #[error("layer {index} failed: {source}")]
    Layer {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
