use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters outside the legal domain of the data model.
    #[error("invalid parameters: {0}")]
    Validation(String),

    /// A mathematical function was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported ji4 signature (n={n}; 1,1,{l3},{l4})")]
    UnsupportedSignature { n: u8, l3: i32, l4: i32 },

    /// Quadrature did not reach the requested tolerance; the best estimate
    /// and its error bound are attached.
    #[error("quadrature did not converge: estimate {estimate:e} +/- {abs_error:e}")]
    Quadrature { estimate: f64, abs_error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
