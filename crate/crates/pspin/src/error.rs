use thiserror::Error;

/// Errors produced by model construction, integration, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The adaptive integrator drove the step size below the resolvable limit.
    #[error("step size underflow at t = {t}: h = {h:.3e} (stiffness or tolerance misconfiguration)")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// Wave-function norm drifted beyond the integration-failure threshold.
    #[error("norm drift {drift:.3e} exceeds 1e-4: integration failure")]
    NormDrift { drift: f64 },

    /// Master-equation probability left the conservation tolerance.
    #[error("probability sum deviates by {deviation:.3e} (> 1e-6)")]
    ProbabilityLoss { deviation: f64 },

    /// Eigenvector parity could not be classified for the dynamical gap.
    #[error("parity classification failure: state {index} has mixed parity (asymmetry {asymmetry:.3e})")]
    MixedParity { index: usize, asymmetry: f64 },

    /// A gap scan found its minimum on the edge of the scanned range.
    #[error("no interior minimum: gap minimum sits on the range endpoint {at}")]
    NoInteriorMinimum { at: f64 },

    /// No window of the residual-energy curve satisfies the Landau-Zener
    /// linearity requirement.
    #[error("no LZ window: no interval of >= {min_points} points reaches R^2 >= {r2}")]
    NoLzWindow { min_points: usize, r2: f64 },

    /// A fit had fewer usable points than the model requires.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Input data violates a monotonicity precondition.
    #[error("non-monotone data: {0}")]
    NonMonotoneData(String),

    /// The free energy has no barrier between minima at this temperature.
    #[error("no barrier: f(m, T={t}) has a single minimum")]
    NoBarrier { t: f64 },

    /// Full-configuration-space oracle size cap exceeded.
    #[error("oracle size cap exceeded: N = {n} > {cap}")]
    OracleSizeCap { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
