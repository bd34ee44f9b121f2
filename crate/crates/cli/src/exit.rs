use std::fmt;

/// Failure classes with documented exit codes. Attached to errors as
/// `anyhow` context and recovered in `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Config,
    Ingest,
    JudgeExhausted,
    Interrupted,
}

impl Failure {
    pub fn code(self) -> u8 {
        match self {
            Failure::Config => 2,
            Failure::Ingest => 3,
            Failure::JudgeExhausted => 4,
            Failure::Interrupted => 130,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Failure::Config => "configuration error",
            Failure::Ingest => "cannot read input",
            Failure::JudgeExhausted => "judge transport exhausted",
            Failure::Interrupted => "interrupted",
        })
    }
}

/// Exit code for an error chain; 1 when no class was attached.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<Failure>().map_or(1, |f| f.code())
}
