use thiserror::Error;

/// Failure modes shared by every module. Each variant names the violated
/// invariant so diagnostics can be traced back to a module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpwError {
    #[error("twist violation: {0}")]
    TwistViolation(String),
    #[error("loop is not unimodular: {0}")]
    NonUnimodular(String),
    #[error("Laurent tail too fat: {0}")]
    TailTooFat(String),
    #[error("not factorizable: {0}")]
    NotFactorizable(String),
    #[error("middle term is not real: {0}")]
    ComplexTheta(String),
    #[error("sector violation: {0}")]
    SectorViolation(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("truncation error: {0}")]
    TruncationError(String),
    #[error("rotation crosses the branch cut: {0}")]
    CutCrossing(String),
    #[error("singular collocation system: {0}")]
    SingularSystem(String),
    #[error("inconsistent sign: {0}")]
    InconsistentSign(String),
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl DpwError {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            DpwError::Config(_) => 1,
            _ => 2,
        }
    }

    /// Module that owns the invariant behind this error.
    pub fn module(&self) -> &'static str {
        match self {
            DpwError::TwistViolation(_)
            | DpwError::NonUnimodular(_)
            | DpwError::TailTooFat(_)
            | DpwError::NotFactorizable(_)
            | DpwError::ComplexTheta(_) => "loopcore",
            DpwError::SectorViolation(_) | DpwError::DomainError(_) => "bessel",
            DpwError::TruncationError(_) | DpwError::CutCrossing(_) => "smythframe",
            DpwError::SingularSystem(_) | DpwError::InconsistentSign(_) => "rhfactor",
            DpwError::DegenerateFrame(_) => "geometry",
            DpwError::Config(_) | DpwError::Io(_) => "cli",
        }
    }
}

impl From<std::io::Error> for DpwError {
    fn from(e: std::io::Error) -> Self {
        DpwError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DpwError>;
