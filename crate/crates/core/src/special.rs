//! Spherical Bessel functions of order −1..=2, their positive roots,
//! Fourier–Bessel weights, and the real angular combinations of spherical
//! harmonics used by the three factors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::FactorKind;

/// Below this argument the power series is used for `j_0..j_2`. The
/// trigonometric form of `j_2` loses roughly `45·ε/x⁴` relative accuracy,
/// so the switch has to sit near 1 rather than at the origin.
const SERIES_CUTOFF: f64 = 1.0;

fn series(l: u32, x: f64) -> f64 {
    // j_l(x) = x^l Σ_k (−x²/2)^k / (k! (2l+2k+1)!!)
    let mut double_fact = 1.0;
    let mut k = 1.0;
    while k <= (2 * l + 1) as f64 {
        double_fact *= k;
        k += 2.0;
    }
    let mut term = x.powi(l as i32) / double_fact;
    let mut sum = term;
    let h = -0.5 * x * x;
    for k in 0..30u32 {
        term *= h / (((k + 1) * (2 * l + 2 * k + 3)) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[inline]
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_CUTOFF {
        series(0, ax)
    } else {
        ax.sin() / ax
    }
}

#[inline]
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_CUTOFF {
        series(1, ax)
    } else {
        let (s, c) = ax.sin_cos();
        (s / ax - c) / ax
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

#[inline]
pub fn j2(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_CUTOFF {
        series(2, ax)
    } else {
        let (s, c) = ax.sin_cos();
        (3.0 / (ax * ax) - 1.0) * s / ax - 3.0 * c / (ax * ax)
    }
}

/// `j_{-1}(x) = cos x / x`.
#[inline]
pub fn jm1(x: f64) -> f64 {
    x.cos() / x
}

/// Spherical Bessel function `j_l(x)` for `l ∈ {−1, 0, 1, 2}`.
///
/// `j_l(0) = δ_{0l}` for `l ≥ 0`; `j_{−1}` is singular at the origin.
pub fn sph_bessel(l: i32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("j_{l} of non-finite argument")));
    }
    match l {
        -1 if x == 0.0 => Err(Error::Domain("j_-1 is singular at x = 0".into())),
        -1 => Ok(jm1(x)),
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        2 => Ok(j2(x)),
        _ => Err(Error::Domain(format!("spherical Bessel order {l} is not supported"))),
    }
}

/// Unchecked `j_l` for `l ∈ {0, 1, 2}`, for hot loops.
#[inline]
pub(crate) fn jl(l: u32, x: f64) -> f64 {
    match l {
        0 => j0(x),
        1 => j1(x),
        _ => j2(x),
    }
}

/// Derivative `j_l'(x)` for `l ∈ {0, 1, 2}`.
pub fn sph_bessel_deriv(l: u32, x: f64) -> f64 {
    match l {
        0 => -j1(x),
        _ if x == 0.0 => {
            if l == 1 {
                1.0 / 3.0
            } else {
                0.0
            }
        }
        1 => j0(x) - 2.0 * j1(x) / x,
        _ => j1(x) - 3.0 * j2(x) / x,
    }
}

/// The first `count` positive roots of `j_l`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRootTable {
    pub l: u32,
    pub roots: Vec<f64>,
}

impl BesselRootTable {
    pub fn count(&self) -> usize {
        self.roots.len()
    }
}

fn refine_root(l: u32, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
    let f_lo = jl(l, lo);
    let mut x = guess.clamp(lo, hi);
    for _ in 0..100 {
        let f = jl(l, x);
        if f == 0.0 {
            return x;
        }
        if (f > 0.0) == (f_lo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let d = sph_bessel_deriv(l, x);
        let mut next = x - f / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x {
            return next;
        }
        x = next;
    }
    x
}

/// Positive roots of `j_l` for `l ∈ {0, 1, 2}`.
///
/// Roots of `j_0` are `kπ`. The `k`-th root of `j_l` lies strictly between
/// the `k`-th and `(k+1)`-th roots of `j_{l−1}`; that bracket seeds a
/// safeguarded Newton iteration started from McMahon's asymptotic estimate.
pub fn bessel_roots(l: u32, count: usize) -> Result<BesselRootTable> {
    if l > 2 {
        return Err(Error::Domain(format!("roots of j_{l} are not supported")));
    }
    if count == 0 {
        return Err(Error::Domain("root count must be at least 1".into()));
    }
    let roots = roots_inner(l, count);
    Ok(BesselRootTable { l, roots })
}

fn roots_inner(l: u32, count: usize) -> Vec<f64> {
    if l == 0 {
        return (1..=count).map(|k| k as f64 * PI).collect();
    }
    let lower = roots_inner(l - 1, count + 1);
    let nu = l as f64 + 0.5;
    lower
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let beta = (k as f64 + 1.0 + 0.5 * l as f64) * PI;
            let guess = beta - (4.0 * nu * nu - 1.0) / (8.0 * beta);
            refine_root(l, w[0], w[1], guess)
        })
        .collect()
}

/// Fourier–Bessel normalization `w = (r_ex/2)·[r_ex·j_l'(root)]²`, where
/// `root = q·r_ex` is a positive root of `j_l`.
pub fn fb_weight(l: u32, root: f64, r_ex: f64) -> f64 {
    let d = r_ex * sph_bessel_deriv(l, root);
    0.5 * r_ex * d * d
}

/// Per-multipole real angular coefficients.
///
/// For each order `l` this is `Σ_m (a_lm / a_ref) Y_lm(R̂)` with the
/// reference constant `a_ref` given by [`multipole_constant`], so that
/// `multipole_constant(kind, l) * weights.get(l)` is the full angular sum of
/// the factor's kernel multipole. Condon–Shortley phases are assumed
/// throughout; the `m = ±2` pairs are reduced to `cos 2φ` (A_xx) and
/// `sin 2φ` (A_xy).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngularWeights {
    pub by_order: [f64; 3],
}

impl AngularWeights {
    pub fn get(&self, l: u32) -> f64 {
        self.by_order.get(l as usize).copied().unwrap_or(0.0)
    }
}

pub fn angular_weight(kind: FactorKind, theta: f64, phi: f64) -> AngularWeights {
    let (st, ct) = theta.sin_cos();
    let mut w = [0.0; 3];
    match kind {
        FactorKind::Axx => {
            w[0] = 0.5 / PI.sqrt();
            let y22_pair = 0.5 * (15.0 / (2.0 * PI)).sqrt() * st * st * (2.0 * phi).cos();
            let y20 = 0.25 * (5.0 / PI).sqrt() * (3.0 * ct * ct - 1.0);
            w[2] = y22_pair - (2.0f64 / 3.0).sqrt() * y20;
        }
        FactorKind::Axy => {
            w[2] = 0.5 * (15.0 / (2.0 * PI)).sqrt() * st * st * (2.0 * phi).sin();
        }
        FactorKind::Bxy => {
            w[1] = (3.0 / (4.0 * PI)).sqrt() * ct;
        }
    }
    AngularWeights { by_order: w }
}

/// Reference constant `a_ref` for multipole `l` of `kind`: `a_00` and
/// `a_2±2` for A_xx, `|a_2±2|` for A_xy, `b_10` for B_xy. Zero for orders the
/// factor does not contain.
pub fn multipole_constant(kind: FactorKind, l: u32) -> f64 {
    let four_pi = 4.0 * PI;
    match (kind, l) {
        (FactorKind::Axx, 0) => four_pi.powf(1.5) * 2.0 / 3.0,
        (FactorKind::Axx, 2) | (FactorKind::Axy, 2) => four_pi * (2.0 * PI / 15.0).sqrt(),
        (FactorKind::Bxy, 1) => -four_pi * (four_pi / 3.0).sqrt(),
        _ => 0.0,
    }
}
