use thiserror::Error;

/// Everything that can go wrong in the core computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    /// `w + γ = 0`, so the population factor `(w−γ)/(w+γ)` is undefined.
    #[error("degenerate rates: pump + spontaneous emission is zero")]
    DegenerateRates,

    /// Negative discriminant of the cooperativity quadratic.
    #[error("cooperativity branches are complex (discriminant {discriminant:e})")]
    ComplexBranches { discriminant: f64 },

    #[error("adaptive step underflow at t = {t:e} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("spin polarization left the physical range: |jz| = {jz:e} > N/2 = {half_n:e}")]
    BoundViolation { jz: f64, half_n: f64 },

    #[error("state is not stationary (residual {residual:e} > {tolerance:e})")]
    NotStationary { residual: f64, tolerance: f64 },

    #[error("operation requires C < 1, got C = {cooperativity}")]
    AboveThreshold { cooperativity: f64 },

    #[error("operation requires a lasing state (C+ > 1)")]
    BelowThreshold,

    #[error("n-sum truncation {required} exceeds cap {cap}")]
    TruncationFailure { required: usize, cap: usize },

    #[error("Q-function value {value:e} is negative beyond rounding")]
    NegativeQ { value: f64 },

    #[error("invalid angular-momentum quantum numbers: N = {n_spins}, 2J = {two_j}")]
    DomainError { n_spins: u64, two_j: i64 },

    #[error("steady state is not unique (relative gap {gap:e})")]
    DegenerateNullSpace { gap: f64 },

    #[error("sparse factorization failed")]
    Factorization,

    #[error("photon cutoff ladder exhausted at n_cut = {n_cut}")]
    CutoffExceeded { n_cut: usize },

    #[error("dense oracle dimension {dim} exceeds limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
