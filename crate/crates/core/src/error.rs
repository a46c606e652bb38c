use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `ln ρ` at vacuum for the isothermal branch.
    #[error("scaled density is -inf at vacuum for theta = 0")]
    NegativeInfinity,

    /// Riemann invariants (or eigenvalues for θ = 0) requested at vacuum.
    #[error("Riemann invariants are undefined at vacuum")]
    VacuumInvariant,

    #[error("operation unsupported for the isothermal branch: {0}")]
    Unsupported(&'static str),

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    /// Middle-state root finder failed; carries the last bracket.
    #[error(
        "root finder failed after {iterations} iterations on ln(rho) bracket [{lo}, {hi}] \
         (phi = {phi_lo:e}, {phi_hi:e})"
    )]
    Solver {
        iterations: usize,
        lo: f64,
        hi: f64,
        phi_lo: f64,
        phi_hi: f64,
    },

    /// A state violates the invariant-region budget required by the estimate.
    #[error("state violates the invariant-region budget w0 = {w0}: {detail}")]
    Precondition { w0: f64, detail: String },

    /// The finite-volume update produced a negative density.
    #[error("scheme failure at cell {cell}: rho = {rho:e}")]
    Scheme { cell: usize, rho: f64 },

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
