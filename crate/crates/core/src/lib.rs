//! Bohr–Rosenfeld geometric factors for pairs of spherical space-time regions.
//!
//! Three analytic routes compute the same quantities:
//!
//! * [`closed_form`]: exact sums over four-spherical-Bessel integrals,
//! * [`fourier_bessel::factor_series`]: a Fourier–Bessel series on the
//!   simple nodes `q_n = nπ/r_ex`,
//! * [`fourier_bessel::factor_series_general`]: a series on the roots of
//!   `j_l` for each multipole.
//!
//! [`oracle`] holds independent numerical quadratures used to check them.
//! Units have `c = 1`; lengths and times share one arbitrary unit.

pub mod closed_form;
pub mod error;
pub mod fourier_bessel;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod sampling;
pub mod special;
pub mod summation;
pub mod table1;
pub mod time_avg;

pub use closed_form::{coincident_axx, commutator_difference, factor_closed, factor_closed_with_bound, ji4};
pub use error::{Error, Result};
pub use fourier_bessel::{factor_series, factor_series_general};
pub use model::{
    normalize, reverse, FactorKind, FactorResult, Ji4Args, Method, RegionPair, Schedule,
    SeriesConfig,
};
pub use oracle::{factor_fourier_numeric, ji4_numeric, QuadConfig};

/// Evaluate `kind` for `params` by the chosen route.
///
/// `series` configures both series routes; `quad` the Fourier-integral
/// oracle. The closed form ignores both.
pub fn evaluate(
    kind: FactorKind,
    params: &RegionPair,
    method: Method,
    series: &SeriesConfig,
    quad: &QuadConfig,
) -> Result<FactorResult> {
    match method {
        Method::ClosedForm => factor_closed(kind, params),
        Method::SeriesSimple => factor_series(kind, params, series),
        Method::SeriesGeneral => factor_series_general(kind, params, series),
        Method::FourierNumeric => factor_fourier_numeric(kind, params, quad),
    }
}
