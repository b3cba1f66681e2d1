use thiserror::Error;

/// Errors surfaced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix logarithm branch cut: eigenphase {0} within {1} of ±π")]
    BranchCut(f64, f64),
    #[error("degenerate spectrum: min phase gap {0} below {1}")]
    DegenerateSpectrum(f64, f64),
    #[error("near-degenerate torus element: min circular gap {0} below {1}")]
    NearDegenerate(f64, f64),
    #[error("argument {0} outside the principal branch |t| < 2π")]
    OutOfBranch(f64),
    #[error("evaluation too close to a pole: {0}")]
    PoleProximity(String),
    #[error("potential pole: q_j - q_k + γ within {0} of 0 mod 2π")]
    PotentialPole(f64),
    #[error("ball invariant violated: x|v|^2 = {0} not inside (-2π, 2π)")]
    BallInvariant(f64),
    #[error("commutator solver did not converge: best residual {0}")]
    NotConverged(f64),
    #[error("no admissible |v_1|^2 satisfies the determinant constraint")]
    InfeasibleRescale,
    #[error("spin reconstruction failed: residual {0} exceeds {1} (point is off-leaf)")]
    ReconstructionFailed(f64, f64),
    #[error("regularity lost at t = {0}: min gap {1}")]
    RegularityLost(f64, f64),
    #[error("integration step rejected at t = {0}: {1}")]
    StepRejected(f64, String),
    #[error("leaf constraint drift {0} exceeds {1}")]
    ConstraintDrift(f64, f64),
    #[error("trajectory left the quasi-Poisson ball: x|v|^2 = {0}")]
    BallExit(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
