use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice size {size} for {geometry}: {reason}")]
    InvalidSize {
        geometry: &'static str,
        size: usize,
        reason: &'static str,
    },
    #[error("probability {name} = {value} outside {range}")]
    InvalidProbability {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported geometry {0} for this operation")]
    UnsupportedGeometry(&'static str),
    #[error("graph has no active nodes")]
    EmptyGraph,
    #[error("input does not percolate: {0}")]
    NonPercolating(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn check_probability(name: &'static str, value: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        (0.0..=1.0).contains(&value)
    } else {
        value > 0.0 && value <= 1.0
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidProbability {
            name,
            value,
            range: if allow_zero { "[0, 1]" } else { "(0, 1]" },
        })
    }
}
