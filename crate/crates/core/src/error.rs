use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero divisor")]
    ZeroDivisor,

    #[error("enclosure precision exhausted after {digits} digits of pi")]
    PrecisionExhausted { digits: usize },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid lift: {0}")]
    InvalidLift(String),

    #[error("flat piece in preimage")]
    FlatPiece,

    #[error("outer map not a homeomorphism")]
    NotHomeomorphism,

    #[error("critical value")]
    CriticalValue,

    #[error("not onto")]
    NotOnto,

    #[error("degenerate interval")]
    DegenerateInterval,

    #[error("domain mismatch")]
    DomainMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precision budget too small")]
    PrecisionBudget,

    #[error("snap iteration bound exceeded with {remaining} offending points")]
    SnapBound { remaining: usize },

    #[error("map not in C_{{λ,0}} normal form: {0}")]
    NotNormalForm(String),

    #[error("increase laps: arc {arc} needs at least {min_laps} laps")]
    IncreaseLaps { arc: usize, min_laps: usize },

    #[error("condition {condition} fails on arc {arc}: {detail}")]
    ConditionFailed { condition: &'static str, arc: usize, detail: String },

    #[error("shrink ε_i, d_i or grow e_i")]
    NoEta,

    #[error("covering failure at step {step}: {detail}")]
    Covering { step: usize, detail: String },

    #[error("scale gap too small: {0}")]
    ScaleGap(&'static str),

    #[error("orbit never enters fine regime")]
    NeverFine,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
