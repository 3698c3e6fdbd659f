use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0}")]
    Parse(String),
}

/// A single failed admissibility condition of an instantiated series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BaseZero,
    BaseOnUnitCircle,
    DenominatorZero { index: usize },
    /// Denominator entry `index` equals `q^{-k}` with `k < n`.
    DenominatorInOmega { index: usize, k: u32 },
    /// Very-well-poised head `a` equals `q^{-2k}`, so `±√a` lies in `Ω_q^n`.
    HeadDegenerate { k: u32 },
    HeadZero,
    /// A factor that must be nonzero for the formula to be defined vanishes.
    Pole(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BaseZero => f.write_str("base q is zero"),
            Violation::BaseOnUnitCircle => f.write_str("base q lies on the unit circle"),
            Violation::DenominatorZero { index } => write!(f, "denominator entry {index} is zero"),
            Violation::DenominatorInOmega { index, k } => {
                write!(f, "denominator entry {index} equals q^-{k}")
            }
            Violation::HeadDegenerate { k } => write!(f, "head parameter equals q^-{}", 2 * k),
            Violation::HeadZero => f.write_str("head parameter is zero"),
            Violation::Pole(what) => write!(f, "{what} vanishes"),
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("guard violated: {}", join(.0))]
    GuardViolated(Vec<Violation>),
    #[error("denominator factor vanishes: {0}")]
    PrefactorPole(String),
    #[error("series does not terminate")]
    NotTerminating,
    #[error("|q| >= 1 where |q| < 1 is required")]
    BaseNotInUnitDisk,
    #[error("infinite product argument lies in Omega_q")]
    PoleAtOmegaPoint,
    #[error("series diverges or fails to converge")]
    Divergent,
    #[error("{0} cannot be evaluated exactly")]
    UnsupportedExact(String),
    #[error("parameter `{0}` is not bound")]
    UnboundParam(String),
    #[error("negative Pochhammer length {0}")]
    NegativeLength(i64),
    #[error("value height {bits} bits exceeds cap {cap}")]
    HeightOverflow { bits: u64, cap: u64 },
}

impl EvalError {
    /// True for errors that mean "this sample point is outside the domain"
    /// rather than an evaluator or corpus defect.
    pub fn is_inadmissible(&self) -> bool {
        matches!(
            self,
            EvalError::Scalar(ScalarError::DivisionByZero)
                | EvalError::GuardViolated(_)
                | EvalError::PrefactorPole(_)
                | EvalError::PoleAtOmegaPoint
                | EvalError::BaseNotInUnitDisk
        )
    }
}

/// A DSL syntax error with 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(e: &[String]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!(" (expected {}; see docs/dsl.md)", e.join(" or "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("zero parameter at position {0}; express zeros through the p count")]
    ZeroParameter(usize),
    #[error("series is not balanced")]
    NotBalanced,
    #[error("transformation does not apply to this series shape: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{file}:{line}: {message}")]
pub struct CorpusError {
    pub file: String,
    pub line: usize,
    pub message: String,
}
