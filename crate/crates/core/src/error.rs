use alloc::string::String;
use core::fmt;

/// Errors surfaced by the simulation and training layers.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument violated an operation's contract (dimension mismatch,
    /// missing goal, wrong task kind, ...).
    Contract(String),
    /// A configuration value is invalid or inconsistent.
    Config(String),
    /// A non-finite value appeared in the simulation state. Carries the
    /// offending environment index when known.
    SimFault { env: Option<usize>, detail: String },
    /// Non-finite loss or gradient during training.
    TrainFault(String),
    /// An unknown robot or task name was requested. Carries the available
    /// registry entries.
    Registry { name: String, available: String },
    /// The requested robot-task pair is disabled by the compatibility matrix.
    Incompatible { robot: String, task: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::SimFault { env: Some(i), detail } => {
                write!(f, "simulation fault in env {i}: {detail}")
            }
            Error::SimFault { env: None, detail } => write!(f, "simulation fault: {detail}"),
            Error::TrainFault(msg) => write!(f, "training fault: {msg}"),
            Error::Registry { name, available } => {
                write!(f, "unknown name {name:?}; available: {available}")
            }
            Error::Incompatible { robot, task } => {
                write!(f, "robot {robot:?} cannot run task {task:?} (compatibility matrix)")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
