//! Domain types shared by every computation route.
//!
//! Units: the speed of light is 1 and all lengths and times share one
//! unspecified unit. A factor therefore carries units of length⁻⁴.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two spherical space-time regions.
///
/// Region I is a ball of radius `r1` centred at the origin, active during
/// `(0, dt1)`. Region II is a ball of radius `r2` whose centre sits at
/// spherical coordinates `(r, theta, phi)` relative to region I, active during
/// `(t_offset, t_offset + dt2)`.
///
/// When `r == 0` the angles carry no meaning and every route ignores them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPair {
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub dt1: f64,
    pub dt2: f64,
    pub t_offset: f64,
}

impl RegionPair {
    /// Coinciding centres, no angles.
    pub fn concentric(r1: f64, r2: f64, dt1: f64, dt2: f64, t_offset: f64) -> Self {
        RegionPair { r1, r2, r: 0.0, theta: 0.0, phi: 0.0, dt1, dt2, t_offset }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule { dt1: self.dt1, dt2: self.dt2, t_offset: self.t_offset }
    }

    /// Multiply every length and time by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        RegionPair {
            r1: self.r1 * lambda,
            r2: self.r2 * lambda,
            r: self.r * lambda,
            dt1: self.dt1 * lambda,
            dt2: self.dt2 * lambda,
            t_offset: self.t_offset * lambda,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("r", self.r),
            ("theta", self.theta),
            ("phi", self.phi),
            ("dt1", self.dt1),
            ("dt2", self.dt2),
            ("t_offset", self.t_offset),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
        }
        for (name, v) in [("r1", self.r1), ("r2", self.r2), ("dt1", self.dt1), ("dt2", self.dt2)] {
            if v <= 0.0 {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if self.r < 0.0 {
            return Err(Error::Validation(format!("r must be non-negative, got {}", self.r)));
        }
        Ok(())
    }
}

fn wrap_two_pi(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    // rem_euclid may round up to exactly 2π
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Validate and fold the angles into `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
///
/// A polar angle outside `[0, π]` is reflected through the pole, which moves
/// the azimuth by π. Canonical input is returned unchanged.
pub fn normalize(params: RegionPair) -> Result<RegionPair> {
    params.validate()?;
    let mut out = params;
    if !(0.0..=PI).contains(&out.theta) {
        let t = wrap_two_pi(out.theta);
        if t > PI {
            out.theta = 2.0 * PI - t;
            out.phi += PI;
        } else {
            out.theta = t;
        }
    }
    if !(0.0..2.0 * PI).contains(&out.phi) {
        out.phi = wrap_two_pi(out.phi);
    }
    Ok(out)
}

/// Parameters of the reverse factor C^(II,I) given those of C^(I,II).
///
/// Radii and durations are exchanged, the displacement is inverted
/// (`theta → π − theta`, `phi → phi + π`) and the time offset changes sign.
pub fn reverse(params: RegionPair) -> Result<RegionPair> {
    let p = normalize(params)?;
    let phi = if p.phi < PI { p.phi + PI } else { p.phi - PI };
    Ok(RegionPair {
        r1: p.r2,
        r2: p.r1,
        r: p.r,
        theta: PI - p.theta,
        phi,
        dt1: p.dt2,
        dt2: p.dt1,
        t_offset: -p.t_offset,
    })
}

/// The two activity intervals `(0, dt1)` and `(t_offset, t_offset + dt2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub dt1: f64,
    pub dt2: f64,
    pub t_offset: f64,
}

impl Schedule {
    pub fn new(dt1: f64, dt2: f64, t_offset: f64) -> Self {
        Schedule { dt1, dt2, t_offset }
    }

    /// The characteristic offsets `[0, T+Δt₂−Δt₁, T+Δt₂, T, T−Δt₁]` at which
    /// the time-averaged kernels change form.
    pub fn taus(&self) -> [f64; 5] {
        let t = self.t_offset;
        [0.0, t + self.dt2 - self.dt1, t + self.dt2, t, t - self.dt1]
    }

    /// Product of the durations, the normalization of every double average.
    pub fn area(&self) -> f64 {
        self.dt1 * self.dt2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt1.is_finite() && self.dt2.is_finite() && self.t_offset.is_finite()) {
            return Err(Error::Validation("schedule has non-finite fields".into()));
        }
        if self.dt1 <= 0.0 || self.dt2 <= 0.0 {
            return Err(Error::Validation("durations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Axx,
    Axy,
    Bxy,
}

impl FactorKind {
    pub const ALL: [FactorKind; 3] = [FactorKind::Axx, FactorKind::Axy, FactorKind::Bxy];

    pub fn as_str(&self) -> &'static str {
        match self {
            FactorKind::Axx => "axx",
            FactorKind::Axy => "axy",
            FactorKind::Bxy => "bxy",
        }
    }

    /// Multipole orders that contribute to this factor.
    pub fn multipoles(&self) -> &'static [u32] {
        match self {
            FactorKind::Axx => &[0, 2],
            FactorKind::Axy => &[2],
            FactorKind::Bxy => &[1],
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FactorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "axx" => Ok(FactorKind::Axx),
            "axy" => Ok(FactorKind::Axy),
            "bxy" => Ok(FactorKind::Bxy),
            other => Err(Error::Validation(format!("unknown factor kind '{other}'"))),
        }
    }
}

/// Which route produced a [`FactorResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    SeriesSimple,
    SeriesGeneral,
    FourierNumeric,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SeriesSimple => "series_simple",
            Method::SeriesGeneral => "series_general",
            Method::FourierNumeric => "fourier_numeric",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Truncation policy for the Fourier–Bessel series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Added to the smallest legal expansion radius.
    pub rex_slack: f64,
    pub n_max: usize,
    pub tail_tol: f64,
    /// Number of trailing terms inspected by the stopping test.
    pub tail_window: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { rex_slack: 0.0, n_max: 2000, tail_tol: 1e-6, tail_window: 20 }
    }
}

impl SeriesConfig {
    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tail_window < 1 || self.n_max < self.tail_window {
            return Err(Error::Validation(format!(
                "need n_max >= tail_window >= 1, got n_max={} tail_window={}",
                self.n_max, self.tail_window
            )));
        }
        if self.tail_tol.is_nan() || self.tail_tol <= 0.0 {
            return Err(Error::Validation("tail_tol must be positive".into()));
        }
        if !self.rex_slack.is_finite() || self.rex_slack < 0.0 {
            return Err(Error::Validation("rex_slack must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// A factor value with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorResult {
    pub value: f64,
    pub terms_used: usize,
    pub tail_estimate: f64,
    pub method: Method,
    pub converged: bool,
    /// Set by the closed form when a sign-permutation sum cancelled to below
    /// 1e-8 of its largest term; the value is still returned.
    #[serde(default)]
    pub cancellation_limited: bool,
}

/// Arguments of `ji4(n; l1,l2,l3,l4; α,β,γ,δ) = ∫₀^∞ j_l1(αx) j_l2(βx) j_l3(γx) j_l4(δx) x⁻ⁿ dx`.
///
/// `l1 = l2 = 1` always, so only `l3` and `l4` are stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ji4Args {
    pub n: u8,
    pub l3: i32,
    pub l4: i32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Ji4Args {
    pub fn new(n: u8, l3: i32, l4: i32, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Ji4Args { n, l3, l4, alpha, beta, gamma, delta }
    }

    /// One of the four signatures the closed forms cover.
    pub fn is_supported_signature(&self) -> bool {
        matches!((self.n, self.l3, self.l4), (0, 0, 0) | (0, 0, 2) | (0, -1, 1) | (1, 0, 1))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_supported_signature() {
            return Err(Error::UnsupportedSignature { n: self.n, l3: self.l3, l4: self.l4 });
        }
        for v in [self.alpha, self.beta, self.gamma, self.delta] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("ji4 parameters must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}
