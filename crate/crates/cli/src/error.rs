use std::fmt;
use std::path::PathBuf;

pub const EXIT_IO: u8 = 1;
pub const EXIT_SCHEMA: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;

pub const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  1  file could not be read or written
  2  bad command-line usage
  3  scenario schema error (syntax, unknown key, out-of-range value)
  4  infeasible scenario (M < 2K, rank-deficient window, decoy in window or in span(V))
  5  numerical failure during a run";

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Schema(String),
    Infeasible(ris_decoy::Error),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors raised while turning a scenario into library types.
    pub fn from_config(e: ris_decoy::Error) -> Self {
        if e.is_infeasible() {
            CliError::Infeasible(e)
        } else {
            CliError::Schema(e.to_string())
        }
    }
}

/// Errors raised once computation has started.
impl From<ris_decoy::Error> for CliError {
    fn from(e: ris_decoy::Error) -> Self {
        if e.is_infeasible() {
            CliError::Infeasible(e)
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Infeasible(e) => write!(f, "{e}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let io = CliError::io("x", std::io::Error::other("gone"));
        let schema = CliError::Schema("bad".into());
        let infeasible = CliError::from(ris_decoy::Error::TooFewElements { m: 4, k: 3 });
        let numerical = CliError::from(ris_decoy::Error::Numerical("nan".into()));
        let codes = [
            io.exit_code(),
            schema.exit_code(),
            infeasible.exit_code(),
            numerical.exit_code(),
        ];
        assert_eq!(codes, [EXIT_IO, EXIT_SCHEMA, EXIT_INFEASIBLE, EXIT_NUMERICAL]);
        assert!(!codes.contains(&0) && !codes.contains(&2));
    }

    #[test]
    fn config_errors_split_by_kind() {
        let e = CliError::from_config(ris_decoy::Error::DecoyInWindow { theta_fake_deg: 20.0 });
        assert_eq!(e.exit_code(), EXIT_INFEASIBLE);
        assert!(e.to_string().contains("w ∉ span(V)"));
        let e = CliError::from_config(ris_decoy::Error::InvalidArgument("gamma".into()));
        assert_eq!(e.exit_code(), EXIT_SCHEMA);
    }
}
