use std::fmt;

/// Command failure, split by exit code: validation problems exit 1, runtime
/// failures exit 2.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "validation error: {e:#}"),
            Failure::Runtime(e) => write!(f, "runtime error: {e:#}"),
        }
    }
}

pub type CmdResult<T> = Result<T, Failure>;

pub trait Classify<T> {
    fn validation(self) -> CmdResult<T>;
    fn runtime(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn validation(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Validation(e.into()))
    }

    fn runtime(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

pub fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(anyhow::anyhow!(msg.into()))
}
