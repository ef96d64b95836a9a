use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error:\n{}", bullet(.0))]
    Config(Vec<String>),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invariant violated in outputs:\n{}", bullet(.0))]
    Invariant(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn bullet(items: &[String]) -> String {
    items.iter().map(|s| format!("  - {s}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Invariant(_) => 4,
            // Output paths that cannot be written are a configuration problem.
            CliError::Io(_) => 2,
        }
    }
}

impl From<prethermal_core::Error> for CliError {
    fn from(e: prethermal_core::Error) -> Self {
        use prethermal_core::Error as E;
        match e {
            E::Numerics(_) => CliError::Numeric(e.to_string()),
            E::InvalidParameter { .. } | E::XiOutOfRange { .. } | E::Dimension(_) => {
                CliError::Config(vec![e.to_string()])
            }
            other => CliError::Invariant(vec![other.to_string()]),
        }
    }
}
