use powerfree_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// 2 usage, 3 capacity, 4 violated hypothesis, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) => 2,
            LabError::Core(e) => match e {
                CoreError::Capacity(_) | CoreError::Overflow(_) => 3,
                CoreError::FixedPowerDivisor { .. } | CoreError::RepeatedFactor => 4,
                CoreError::Invalid(_) | CoreError::OutOfRange { .. } | CoreError::NotPrime(_) => 2,
                CoreError::Factorization(_) | CoreError::Certification(_) => 1,
            },
            _ => 1,
        }
    }

    /// Message naming the violated hypothesis where there is one.
    pub fn explain(&self) -> String {
        match self {
            LabError::Core(CoreError::FixedPowerDivisor { prime, k }) => {
                format!("hypothesis violated: f has no fixed k-th power divisor ({prime}^{k} divides every value)")
            }
            LabError::Core(CoreError::RepeatedFactor) => {
                "hypothesis violated: f has no repeated irreducible factor (Res(f, f') = 0)".into()
            }
            LabError::Core(CoreError::Capacity(m)) => format!("capacity exceeded: {m}"),
            other => other.to_string(),
        }
    }
}
