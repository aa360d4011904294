use std::fmt;

use symlen_core::builders::BuildError;
use symlen_core::decompose::DecomposeError;
use symlen_core::f2space::F2Error;
use symlen_core::milnor::MilnorError;
use symlen_core::scheme::SchemeError;

pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CAP: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }

    pub fn cap(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CAP, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn scheme_code(e: &SchemeError) -> i32 {
    match e {
        SchemeError::EnumerationTooLarge { .. } | SchemeError::TooLarge(_) => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}

fn milnor_code(e: &MilnorError) -> i32 {
    match e {
        MilnorError::TooLarge { .. } => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}

fn f2_code(e: &F2Error) -> i32 {
    match e {
        F2Error::EnumerationTooLarge { .. } | F2Error::AmbientTooLarge(_) => EXIT_CAP,
        _ => EXIT_INVALID,
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        CliError { code: scheme_code(&e), message: e.to_string() }
    }
}

impl From<MilnorError> for CliError {
    fn from(e: MilnorError) -> Self {
        CliError { code: milnor_code(&e), message: e.to_string() }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        let code = match &e {
            BuildError::DimensionCapExceeded(_) => EXIT_CAP,
            BuildError::Scheme(s) => scheme_code(s),
            BuildError::Parse { .. } => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        let code = match &e {
            DecomposeError::Scheme(s) => scheme_code(s),
            DecomposeError::Milnor(m) => milnor_code(m),
            DecomposeError::F2(f) => f2_code(f),
            _ => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}
