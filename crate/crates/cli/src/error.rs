use solmap_core::bvp::BvpError;
use solmap_core::harness::HarnessError;
use solmap_core::holo::HoloError;
use solmap_core::implicit_ode::IvpError;
use solmap_core::sensitivity::SensitivityError;
use solmap_core::transport::TransportError;
use solmap_core::{EvalError, GridError, ParseError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("regularity failure: {0}")]
    Regularity(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Regularity(_) => 2,
            CliError::NoConvergence(_) => 3,
            CliError::Domain(_) => 4,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Eval { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        if e.is_domain() {
            return CliError::Domain(e.to_string());
        }
        match e {
            TransportError::NoConvergence { .. } | TransportError::StepStagnation { .. } => {
                CliError::NoConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<IvpError> for CliError {
    fn from(e: IvpError) -> Self {
        if e.is_domain() {
            CliError::Domain(e.to_string())
        } else if e.is_singular() {
            CliError::Regularity(e.to_string())
        } else if matches!(e, IvpError::NoRoot { .. } | IvpError::Trajectory { .. }) {
            CliError::NoConvergence(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<BvpError> for CliError {
    fn from(e: BvpError) -> Self {
        match e {
            BvpError::Eval(_) => CliError::Domain(e.to_string()),
            BvpError::Singular { .. } => CliError::Regularity(e.to_string()),
            BvpError::NoConvergence { .. } => CliError::NoConvergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<HoloError> for CliError {
    fn from(e: HoloError) -> Self {
        match e {
            HoloError::Overflow { .. } | HoloError::TooFewCoefficients { .. } => {
                CliError::NoConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SensitivityError> for CliError {
    fn from(e: SensitivityError) -> Self {
        match e {
            SensitivityError::Transport(e) => e.into(),
            SensitivityError::Ivp(e) => e.into(),
            SensitivityError::Bvp(e) => e.into(),
            SensitivityError::Grid(e) => e.into(),
            SensitivityError::Parse(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Transport(e) => e.into(),
            HarnessError::Grid(e) => e.into(),
            HarnessError::Ladder(m) => CliError::Usage(m),
        }
    }
}
