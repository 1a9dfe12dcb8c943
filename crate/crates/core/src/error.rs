use std::fmt;

use thiserror::Error;

/// Location-aware parse failure for any of the text grammars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    pub(crate) fn new(pos: usize, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("elements belong to different fields")]
    CtxMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted; retry with a larger working precision")]
    PrecisionLoss,
    #[error("element has negative valuation")]
    NegativeValuation,
    #[error("element is not a square")]
    NoSquareRoot,
    #[error("residue field F_2^{current} too small; degree {required} needed")]
    ResidueFieldTooSmall { current: u32, required: u32 },
    #[error("unsupported residue degree {0}")]
    UnsupportedDegree(u32),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("the polynomial splits over the base field")]
    ReducibleExtension,
    #[error("invalid extension: {0}")]
    InvalidExtension(String),
    #[error("no quadratic extension with break {s} exists over this field")]
    InvalidBreak { s: u32 },
    #[error("not a non-square unit")]
    NotANonSquareUnit,
    #[error("operation not available in this characteristic regime")]
    RegimeMismatch,
    #[error("operation unsupported in equal characteristic 2")]
    RegimeUnsupported,
    #[error("x0 is not the abscissa of a 2-torsion point")]
    NotTwoTorsion,
    #[error("invalid exponent u={0} for this field")]
    InvalidU(u32),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("singular Weierstrass equation")]
    SingularCurve,
    #[error("expression too large")]
    TooLarge,
    #[error("unknown catalog label {0}")]
    UnknownLabel(String),
    #[error("unsupported number field: {0}")]
    UnsupportedNumberField(String),
    #[error("retry budget exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: Box<Error> },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
