use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("unsupported operator dimension {0} (expected 2 or 4)")]
    BadDimension(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("click rates violated for {}", format_violations(.0))]
    ClickRateViolation(Vec<ClickViolation>),

    #[error("appendix ensemble parameters negative at eta={eta}: {detail}")]
    NegativeBranch { eta: f64, detail: String },

    #[error("no critical point in bracket [{lo}, {hi}]: g(lo)={g_lo:.3e}, g(hi)={g_hi:.3e}")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("gap function decreases between eta={eta_lo} (g={g_lo:.3e}) and eta={eta_hi} (g={g_hi:.3e})")]
    NonMonotone { eta_lo: f64, eta_hi: f64, g_lo: f64, g_hi: f64 },

    #[error("solver did not reach an optimal point at eta={eta}: {status}")]
    SolveFailed { eta: f64, status: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One click-rate equality that an ensemble fails to meet.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickViolation {
    /// Human-readable name of the constraint, e.g. `A1`, `B3`, `A2B1`, `total`.
    pub constraint: String,
    pub expected: f64,
    pub actual: f64,
}

fn format_violations(v: &[ClickViolation]) -> String {
    v.iter()
        .map(|c| format!("{} (expected {}, got {:.6e})", c.constraint, c.expected, c.actual))
        .collect::<Vec<_>>()
        .join(", ")
}
