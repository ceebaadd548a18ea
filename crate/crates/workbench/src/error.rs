use std::fmt;

use serde::Serialize;
use tropcount_core::curve::ProblemError;
use tropcount_core::enumerate::EnumerateError;
use tropcount_core::lift::LiftError;
use tropcount_core::theta::RealMultiplicityError;

/// Failure classes, each with its own process exit code.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ErrorCode {
    Io,
    /// A computation failed to converge or ran out of precision.
    Runtime,
    Parse,
    Invariant,
    Dimension,
    Generality,
    FieldExtension,
}

impl ErrorCode {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Io | ErrorCode::Runtime => 1,
            ErrorCode::Parse => 2,
            ErrorCode::Invariant => 3,
            ErrorCode::Dimension => 4,
            ErrorCode::Generality => 5,
            ErrorCode::FieldExtension => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Io => "io",
            ErrorCode::Runtime => "runtime",
            ErrorCode::Parse => "parse",
            ErrorCode::Invariant => "invariant",
            ErrorCode::Dimension => "dimension",
            ErrorCode::Generality => "generality",
            ErrorCode::FieldExtension => "field-extension",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub code: ErrorCode,
    pub message: String,
}

impl Failure {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Failure::new(ErrorCode::Parse, message)
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Failure::new(ErrorCode::Invariant, message)
    }

    /// One-line JSON record for stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            code: &'a str,
            exit: i32,
            message: &'a str,
        }
        serde_json::to_string(&Line { code: self.code.as_str(), exit: self.code.exit_code(), message: &self.message })
            .expect("plain strings serialize")
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

impl std::error::Error for Failure {}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        let code = match e {
            ProblemError::Dimension { .. } => ErrorCode::Dimension,
            _ => ErrorCode::Invariant,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<EnumerateError> for Failure {
    fn from(e: EnumerateError) -> Self {
        match e {
            EnumerateError::Problem(p) => p.into(),
            other => Failure::invariant(other.to_string()),
        }
    }
}

impl From<LiftError> for Failure {
    fn from(e: LiftError) -> Self {
        let code = match e {
            LiftError::FieldExtensionRequired { .. } => ErrorCode::FieldExtension,
            LiftError::NotRegular { .. }
            | LiftError::MissingEssentialBeta { .. }
            | LiftError::CoincidentBeta { .. }
            | LiftError::NonUnit { .. }
            | LiftError::Inconsistent { .. } => ErrorCode::Invariant,
            LiftError::Stalled { .. } | LiftError::LinearStep { .. } | LiftError::Series(_) => ErrorCode::Runtime,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<RealMultiplicityError> for Failure {
    fn from(e: RealMultiplicityError) -> Self {
        Failure::invariant(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(ErrorCode::Io, e.to_string())
    }
}
