use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable {0} has no path to a prior")]
    NotConnected(String),
    #[error("normal equations are singular at maximum damping")]
    SingularSystem,
    #[error("pose block of the information matrix is not positive definite")]
    SingularPoseBlock,
    #[error("matrix is not positive definite: {0}")]
    NonPositiveDefinite(String),
    #[error("cannot compress pose span: {0}")]
    IllegalCompress(String),
    #[error("unknown landmark {0}")]
    UnknownLandmark(u64),
    #[error("unknown pose {0}")]
    UnknownPose(u64),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("no reachable candidate among the samples")]
    NoReachableCandidate,
    #[error("free-space sampling exhausted after {attempts} attempts ({accepted} accepted)")]
    SamplingExhausted { attempts: usize, accepted: usize },
    #[error("goal node {0} is unreachable on the roadmap")]
    Unreachable(usize),
    #[error("no scored candidate admits a feasible path")]
    NoFeasibleGoal,
    #[error("true robot motion from ({x0:.3}, {y0:.3}) to ({x1:.3}, {y1:.3}) hits a wall")]
    CollisionWithTruth { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("scenario parse error: {0}")]
    ScenarioParse(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("run failed for seed {seed}: {cause}")]
    RunFailed { seed: u64, cause: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
