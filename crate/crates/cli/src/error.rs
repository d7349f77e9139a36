use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] persuade_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use persuade_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::Validation(_) | E::Precondition(_) | E::IndexOutOfRange { .. } | E::SizeCap { .. } | E::Dimension(_) => {
                    EXIT_INPUT
                }
                E::Lp(_) | E::Infeasible(_) | E::InfeasibleDual { .. } | E::Internal(_) => EXIT_SOLVER,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
