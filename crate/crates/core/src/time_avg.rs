//! Double time averages over `(0, Δt₁) × (T, T+Δt₂)` of functions of
//! `t = t₂ − t₁`, in closed form, plus a 2-D quadrature oracle.
//!
//! Notation: `⟨f⟩ = (1/Δt₁Δt₂) ∫₀^Δt₁ dt₁ ∫_T^{T+Δt₂} dt₂ f(t₂ − t₁)`.

use crate::error::{Error, Result};
use crate::model::Schedule;
use crate::quadrature::{integrate, Tolerance};

/// Relative width of the band treated as an exact zero.
pub const ZERO_BAND: f64 = 1e-12;

/// Step function with `Θ(0) = ½`; `|x| ≤ 1e-12·scale` counts as zero.
#[inline]
pub fn heaviside(x: f64, scale: f64) -> f64 {
    let tol = ZERO_BAND * scale;
    if x > tol {
        1.0
    } else if x < -tol {
        0.0
    } else {
        0.5
    }
}

/// Scale of the zero band for a schedule, optionally with an expansion radius.
pub fn theta_scale(s: &Schedule, r_ex: f64) -> f64 {
    s.dt1.max(s.dt2).max(s.t_offset.abs()).max(r_ex).max(1.0)
}

/// The distinct time averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AvgKind {
    /// `⟨sin(qt) Θ(t) Θ(r_ex − t)⟩`
    SinFinite,
    /// `⟨cos(qt) Θ(t) Θ(r_ex − t)⟩`
    CosFinite,
    /// `⟨δ(t − r_ex)⟩`
    DeltaAt,
    /// `⟨δ'(t − r_ex)⟩` as the bracket that multiplies it in the averages.
    DeltaPrimeAt,
    /// The `ε → 0` remainder of the regularized kernel.
    EpsTerm,
    /// `⟨sin(qt) Θ(t)⟩`
    SinInf,
    /// `⟨cos(qt) Θ(t)⟩`
    CosInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Trig {
    Sin,
    Cos,
}

/// Signs attached to `τ₁..τ₄` in every boundary sum.
pub(crate) const TAU_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// `Σ ± f(qτ_i) Θ(τ_i) [Θ(r_ex − τ_i)]` over `τ₁..τ₄`; the upper gate is
/// dropped when `r_ex` is `None`.
pub(crate) fn boundary_sum(f: Trig, q: f64, r_ex: Option<f64>, s: &Schedule, scale: f64) -> f64 {
    let taus = s.taus();
    let mut acc = 0.0;
    for (i, sign) in TAU_SIGNS.iter().enumerate() {
        let tau = taus[i + 1];
        let mut gate = heaviside(tau, scale);
        if let Some(r) = r_ex {
            gate *= heaviside(r - tau, scale);
        }
        if gate == 0.0 {
            continue;
        }
        let v = match f {
            Trig::Sin => (q * tau).sin(),
            Trig::Cos => (q * tau).cos(),
        };
        acc += sign * gate * v;
    }
    acc
}

/// Length of the diagonal segment `t₂ − t₁ = r` inside the averaging
/// rectangle, `Θ(Δt₁−T+r) Θ(T+Δt₂−r) [min(Δt₁, T+Δt₂−r) − max(T−r, 0)]`.
pub(crate) fn overlap(s: &Schedule, r: f64, scale: f64) -> f64 {
    let (d1, d2, t) = (s.dt1, s.dt2, s.t_offset);
    let gate = heaviside(d1 - t + r, scale) * heaviside(t + d2 - r, scale);
    if gate == 0.0 {
        return 0.0;
    }
    gate * (d1.min(t + d2 - r) - (t - r).max(0.0))
}

/// `Θ(T+Δt₂−r) Θ(Δt₁−T−Δt₂+r) − Θ(T−r) Θ(Δt₁−T+r)`.
pub(crate) fn delta_prime_bracket(s: &Schedule, r: f64, scale: f64) -> f64 {
    let (d1, d2, t) = (s.dt1, s.dt2, s.t_offset);
    heaviside(t + d2 - r, scale) * heaviside(d1 - t - d2 + r, scale)
        - heaviside(t - r, scale) * heaviside(d1 - t + r, scale)
}

/// `Θ(T+Δt₂) Θ(Δt₁−Δt₂−T) − Θ(T) Θ(Δt₁−T)`, the jump of the cosine average.
pub(crate) fn cos_step(s: &Schedule, scale: f64) -> f64 {
    delta_prime_bracket(s, 0.0, scale)
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must be positive and finite, got {q}")))
    }
}

/// Closed-form finite-radius time averages.
pub fn finite_avg(kind: AvgKind, q: f64, r_ex: f64, s: &Schedule) -> Result<f64> {
    s.validate()?;
    if !(r_ex >= 0.0 && r_ex.is_finite()) {
        return Err(Error::Domain(format!("r_ex must be finite and >= 0, got {r_ex}")));
    }
    let area = s.area();
    let scale = theta_scale(s, r_ex);
    match kind {
        AvgKind::SinFinite | AvgKind::CosFinite => {
            check_q(q)?;
            if r_ex == 0.0 {
                return Err(Error::Domain("finite averages need r_ex > 0".into()));
            }
            let dp = delta_prime_bracket(s, r_ex, scale);
            let dr = overlap(s, r_ex, scale);
            let (sr, cr) = (q * r_ex).sin_cos();
            let v = if kind == AvgKind::SinFinite {
                let b = boundary_sum(Trig::Sin, q, Some(r_ex), s, scale);
                let d0 = overlap(s, 0.0, scale);
                (b - sr * dp) / q - cr * dr + d0
            } else {
                let b = boundary_sum(Trig::Cos, q, Some(r_ex), s, scale);
                (b - cr * dp + cos_step(s, scale)) / q + sr * dr
            };
            Ok(v / (area * q))
        }
        AvgKind::DeltaAt => Ok(overlap(s, r_ex, scale) / area),
        AvgKind::DeltaPrimeAt => Ok(delta_prime_bracket(s, r_ex, scale) / area),
        AvgKind::EpsTerm => Ok(0.5 * overlap(s, 0.0, theta_scale(s, 0.0)) / area),
        AvgKind::SinInf | AvgKind::CosInf => Err(Error::Domain(format!(
            "{kind:?} is an infinite-radius average; use infinite_avg"
        ))),
    }
}

/// Closed-form `r_ex → ∞` averages.
pub fn infinite_avg(kind: AvgKind, q: f64, s: &Schedule) -> Result<f64> {
    s.validate()?;
    let scale = theta_scale(s, 0.0);
    match kind {
        AvgKind::SinInf => {
            check_q(q)?;
            let b = boundary_sum(Trig::Sin, q, None, s, scale);
            Ok((b / q + overlap(s, 0.0, scale)) / (s.area() * q))
        }
        AvgKind::CosInf => {
            check_q(q)?;
            let b = boundary_sum(Trig::Cos, q, None, s, scale);
            Ok(((b + cos_step(s, scale)) / q) / (s.area() * q))
        }
        AvgKind::DeltaAt => finite_avg(AvgKind::DeltaAt, q, 0.0, s),
        other => Err(Error::Domain(format!("{other:?} has no infinite-radius form"))),
    }
}

/// `⟨t^k Θ(t)⟩`, exact.
///
/// Used for the small-`q` expansions
/// `q⟨sin qt Θ⟩ = q²m₁ − q⁴m₃/6 + …` and `q⟨cos qt Θ⟩ = q m₀ − q³m₂/2 + …`.
pub fn positive_moment(k: u32, s: &Schedule) -> f64 {
    let scale = theta_scale(s, 0.0);
    let taus = s.taus();
    let denom = ((k + 1) * (k + 2)) as f64;
    let mut acc = 0.0;
    for (i, sign) in TAU_SIGNS.iter().enumerate() {
        let tau = taus[i + 1];
        let gate = heaviside(tau, scale);
        if gate != 0.0 {
            acc += sign * gate * tau.powi(k as i32 + 2);
        }
    }
    -acc / (denom * s.area())
}

/// Adaptive 2-D quadrature of `⟨f(t₂ − t₁)⟩`.
///
/// `breaks` lists values of `t₂ − t₁` where `f` jumps or kinks; the
/// integration domain is split along those lines before refinement. The
/// result is accurate to about `tol` absolute.
pub fn numeric_time_average<F>(f: F, s: &Schedule, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    s.validate()?;
    let (d1, d2, t) = (s.dt1, s.dt2, s.t_offset);
    let area = s.area();
    let inner_tol = Tolerance { abs: 0.1 * tol * d2, rel: 1e-14, max_intervals: 400 };
    let outer_tol = Tolerance { abs: 0.5 * tol * area, rel: 1e-14, max_intervals: 400 };
    let mut outer_breaks = Vec::with_capacity(2 * breaks.len());
    for &b in breaks {
        outer_breaks.push(t - b);
        outer_breaks.push(t + d2 - b);
    }
    let failed = std::cell::Cell::new(false);
    let inner = |t1: f64| {
        let cuts: Vec<f64> = breaks.iter().map(|b| t1 + b).collect();
        let out = integrate(|t2: f64| f(t2 - t1), t, t + d2, &cuts, &inner_tol);
        if !out.converged {
            failed.set(true);
        }
        out.value
    };
    let out = integrate(inner, 0.0, d1, &outer_breaks, &outer_tol);
    let estimate = out.value / area;
    if !out.converged || failed.get() {
        return Err(Error::Quadrature { estimate, abs_error: out.abs_error / area });
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched(d1: f64, d2: f64, t: f64) -> Schedule {
        Schedule::new(d1, d2, t)
    }

    fn step(x: f64) -> f64 {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            0.0
        } else {
            0.5
        }
    }

    #[test]
    fn heaviside_band() {
        assert_eq!(heaviside(1.0, 1.0), 1.0);
        assert_eq!(heaviside(0.0, 1.0), 0.5);
        assert_eq!(heaviside(-1e-15, 1.0), 0.5);
        assert_eq!(heaviside(-1e-9, 1.0), 0.0);
    }

    #[test]
    fn delta_full_overlap() {
        assert_eq!(finite_avg(AvgKind::DeltaAt, 1.0, 0.0, &sched(1.0, 1.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn no_positive_support() {
        let s = sched(1.0, 1.0, -3.0);
        for q in [0.5, 2.0, 7.0] {
            assert_eq!(finite_avg(AvgKind::SinFinite, q, 10.0, &s).unwrap(), 0.0);
            assert_eq!(infinite_avg(AvgKind::SinInf, q, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn symmetric_square_cosine() {
        let d = 1.3;
        let s = sched(d, d, 0.0);
        for q in [0.2, 1.0, 4.5] {
            let expect = (1.0 - (q * d).cos()) / (q * d).powi(2);
            let got = infinite_avg(AvgKind::CosInf, q, &s).unwrap();
            assert!((got - expect).abs() < 1e-14, "q={q}: {got} vs {expect}");
        }
    }

    #[test]
    fn rejects_bad_q() {
        let s = sched(1.0, 1.0, 0.0);
        assert!(finite_avg(AvgKind::SinFinite, 0.0, 1.0, &s).is_err());
        assert!(infinite_avg(AvgKind::CosInf, f64::NAN, &s).is_err());
        assert!(finite_avg(AvgKind::SinInf, 1.0, 1.0, &s).is_err());
    }

    #[test]
    fn numeric_normalization() {
        let s = sched(1.0, 2.0, 0.5);
        let v = numeric_time_average(|_| 1.0, &s, &[], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        let h = numeric_time_average(step, &sched(1.0, 1.0, 0.0), &[0.0], 1e-12).unwrap();
        assert!((h - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sin_average_matches_numeric() {
        let s = sched(1.0, 1.0, 0.5);
        let f = |t: f64| t.sin() * step(t) * step(10.0 - t);
        let num = numeric_time_average(f, &s, &[0.0, 10.0], 1e-12).unwrap();
        let fin = finite_avg(AvgKind::SinFinite, 1.0, 10.0, &s).unwrap();
        let inf = infinite_avg(AvgKind::SinInf, 1.0, &s).unwrap();
        assert!((fin - num).abs() < 1e-9);
        assert_eq!(fin, inf);
        let s = sched(1.0, 2.0, 0.5);
        let num = numeric_time_average(|t| t.sin() * step(t), &s, &[0.0], 1e-12).unwrap();
        assert!((infinite_avg(AvgKind::SinInf, 1.0, &s).unwrap() - num).abs() < 1e-9);
    }

    #[test]
    fn eps_term_is_half_the_flat_delta() {
        for s in [sched(1.0, 1.0, 0.0), sched(1.0, 2.0, 0.5), sched(2.0, 0.5, -0.7)] {
            let e = finite_avg(AvgKind::EpsTerm, 1.0, 3.0, &s).unwrap();
            let d = finite_avg(AvgKind::DeltaAt, 1.0, 0.0, &s).unwrap();
            assert_eq!(e, 0.5 * d);
        }
    }

    #[test]
    fn moments_match_numeric() {
        let s = sched(1.5, 0.7, -0.4);
        for k in 0..4u32 {
            let num = numeric_time_average(|t| t.powi(k as i32) * step(t), &s, &[0.0], 1e-13).unwrap();
            assert!((positive_moment(k, &s) - num).abs() < 1e-12, "k={k}");
        }
    }
}
