use thiserror::Error;


fn at_k(k: &Option<usize>) -> String {
    k.map(|k| format!(" (tail sum fails at k = {k})")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchmidtError {
    #[error("dimension {0} is too small, need at least 2 coefficients")]
    DimensionTooSmall(usize),
    #[error("coefficient {index} is negative or not finite ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("coefficients are not sorted non-increasing at index {index}")]
    NotSorted { index: usize },
    #[error("squared coefficients sum to {sum}, drift exceeds tolerance")]
    NotNormalized { sum: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("source coefficient {index} is zero, source states must be strictly positive")]
    SourceNotPositive { index: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("expected a {expected}-dimensional block, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("source is not majorized by target{}", at_k(failing_k))]
    NotMajorized { failing_k: Option<usize> },
    #[error("source coefficient {index} is zero and appears in an operator denominator")]
    SourceHasZero { index: usize },
    #[error("parameter ordering {0} violated after case selection")]
    OrderingViolated(&'static str),
    #[error("negative branch probability {prob} for outcome {branch}")]
    NegativeProbability { branch: usize, prob: f64 },
    #[error(transparent)]
    Schmidt(#[from] SchmidtError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LadderError {
    #[error("block of size {m} does not fit dimension {n}")]
    BlockTooLarge { m: usize, n: usize },
    #[error("block covering indices {start}..{end} has zero norm")]
    ZeroBlockNorm { start: usize, end: usize },
    #[error("omega head coefficient {head} is smaller than the next coefficient {next}")]
    OmegaNotSorted { head: f64, next: f64 },
    #[error("omega does not majorize the block source{}", at_k(failing_k))]
    OmegaNotMajorizing { failing_k: Option<usize> },
    #[error("omega head normalization underflows ({residual})")]
    NormalizationUnderflow { residual: f64 },
    #[error("source is not majorized by target{}", at_k(failing_k))]
    NotMajorized { failing_k: Option<usize> },
    #[error("chain link {link} violates an invariant: {reason}")]
    ChainInvariantViolated { link: usize, reason: String },
    #[error("index range {start}..{end} is invalid for dimension {n}")]
    IndexRangeInvalid { start: usize, end: usize, n: usize },
    #[error("block size m = {0} must be at least 2")]
    BlockTooSmall(usize),
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Schmidt(#[from] SchmidtError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("operator dimension {op} does not match state dimension {state}")]
    DimensionMismatch { state: usize, op: usize },
    #[error("dimension {n} exceeds the oracle limit of {max}")]
    DimensionTooLarge { n: usize, max: usize },
}
