use std::fmt;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: i32, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: error.into() }
    }

    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure::new(EXIT_INPUT, error)
    }

    /// Maps a library error onto the exit-code contract.
    pub fn from_lib(error: protodesign::Error) -> Self {
        let code = match &error {
            protodesign::Error::Infeasible(_) | protodesign::Error::RelaxationGap { .. } => EXIT_INFEASIBLE,
            protodesign::Error::Numeric(_) => EXIT_NUMERIC,
            protodesign::Error::Domain(_) | protodesign::Error::Config(_) => EXIT_INPUT,
        };
        Failure::new(code, error)
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        Failure { code: self.code, error: self.error.context(msg) }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<protodesign::Error> for Failure {
    fn from(e: protodesign::Error) -> Self {
        Failure::from_lib(e)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
