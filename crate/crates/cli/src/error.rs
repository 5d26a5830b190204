use purify::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("grid of {0} points exceeds the limit of {max}", max = crate::config::MAX_GRID_POINTS)]
    GridTooLarge(usize),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::GridTooLarge(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                CoreError::InvalidSpec(_)
                | CoreError::InvalidState(_)
                | CoreError::InvalidGrid(_)
                | CoreError::DimensionTooLarge(_) => 2,
                _ => 3,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::GridTooLarge(1).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::InvalidGrid("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::NonConvergence { iterations: 1 }).exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::DefectiveMatrix { condition: 1e12 }).exit_code(), 3);
    }
}
