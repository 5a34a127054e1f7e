//! Fourier–Bessel series for the geometric factors.
//!
//! The simple-node route expands one density on `q_n = nπ/r_ex` and uses the
//! infinite-radius time averages; the general route expands each kernel
//! multipole on the roots of `j_l` with finite-radius time averages.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{normalize, FactorKind, FactorResult, Method, RegionPair, Schedule, SeriesConfig};
use crate::special::{angular_weight, bessel_roots, fb_weight, j1, jl, multipole_constant};
use crate::summation::NeumaierSum;
use crate::time_avg::{
    boundary_sum, cos_step, delta_prime_bracket, finite_avg, infinite_avg, overlap, theta_scale,
    AvgKind, Trig, ZERO_BAND,
};

/// One term of a series evaluation, for convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTermLog {
    pub n: usize,
    /// Node of the first contributing multipole.
    pub q_n: f64,
    pub term_value: f64,
    pub partial_sum: f64,
}

const SUM_FLOOR: f64 = 1e-300;

fn check_channel(kind: FactorKind, l: u32) -> Result<()> {
    if kind.multipoles().contains(&l) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{kind} has no multipole of order {l}")))
    }
}

fn radial(kind: FactorKind, l: u32, q: f64, s: &Schedule) -> Result<f64> {
    check_channel(kind, l)?;
    Ok(match (kind, l) {
        (FactorKind::Bxy, _) => q * infinite_avg(AvgKind::CosInf, q, s)?,
        (FactorKind::Axx, 0) => {
            q * infinite_avg(AvgKind::SinInf, q, s)? - 1.5 * infinite_avg(AvgKind::DeltaAt, q, s)?
        }
        _ => q * infinite_avg(AvgKind::SinInf, q, s)?,
    })
}

/// Multipole `l` of the time-averaged kernel at wavenumber `q`, with the
/// angular dependence factored out into [`angular_weight`].
pub fn utilde(kind: FactorKind, l: u32, q: f64, s: &Schedule) -> Result<f64> {
    Ok(multipole_constant(kind, l) * radial(kind, l, q, s)?)
}

/// Trailing-window stopping rule.
struct TailWindow {
    recent: VecDeque<f64>,
    size: usize,
}

impl TailWindow {
    fn new(size: usize) -> Self {
        TailWindow { recent: VecDeque::with_capacity(size + 1), size }
    }

    /// Record `term`; returns the window maximum once the window is full.
    fn push(&mut self, term: f64) -> Option<f64> {
        self.recent.push_back(term.abs());
        if self.recent.len() > self.size {
            self.recent.pop_front();
        }
        (self.recent.len() == self.size).then(|| self.recent.iter().copied().fold(0.0, f64::max))
    }
}

struct Accumulator<'a> {
    sum: NeumaierSum,
    window: TailWindow,
    tail_tol: f64,
    offset: f64,
    log: Option<&'a mut Vec<SeriesTermLog>>,
    tail: f64,
}

impl<'a> Accumulator<'a> {
    fn new(cfg: &SeriesConfig, offset: f64, log: Option<&'a mut Vec<SeriesTermLog>>) -> Self {
        Accumulator {
            sum: NeumaierSum::new(),
            window: TailWindow::new(cfg.tail_window),
            tail_tol: cfg.tail_tol,
            offset,
            log,
            tail: f64::INFINITY,
        }
    }

    /// Add a term; true once the stopping rule is met.
    fn add(&mut self, n: usize, q: f64, term: f64) -> bool {
        self.sum.add(term);
        let value = self.sum.value() + self.offset;
        if let Some(log) = self.log.as_deref_mut() {
            log.push(SeriesTermLog { n, q_n: q, term_value: term, partial_sum: value });
        }
        match self.window.push(term) {
            Some(max) => {
                self.tail = max;
                max <= self.tail_tol * value.abs().max(SUM_FLOOR)
            }
            None => false,
        }
    }

    fn finish(self, terms_used: usize, converged: bool, method: Method) -> FactorResult {
        FactorResult {
            value: self.sum.value() + self.offset,
            terms_used,
            tail_estimate: self.tail,
            method,
            converged,
            cancellation_limited: false,
        }
    }
}

/// Analytic sum of the flat-in-`q` monopole part for coinciding centres:
/// `(π/r_ex) Σ_n j₁(nπa/r_ex) j₁(nπb/r_ex) → (π/6) r_< / r_>²`.
fn flat_monopole(weight0: f64, flat: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    9.0 / (2.0 * PI * PI * a * b) * weight0 * flat * (PI / 6.0) * lo / (hi * hi)
}

fn coinciding(p: &RegionPair) -> bool {
    p.r <= ZERO_BAND * p.r1.max(p.r2).max(1.0)
}

/// Simple-node series with the expansion radius
/// `r_ex = R + R₂ + max(T+Δt₂, 0) + slack`.
pub fn factor_series(kind: FactorKind, p: &RegionPair, cfg: &SeriesConfig) -> Result<FactorResult> {
    factor_series_impl(kind, p, cfg, None)
}

/// As [`factor_series`], also returning every term.
pub fn factor_series_logged(
    kind: FactorKind,
    p: &RegionPair,
    cfg: &SeriesConfig,
) -> Result<(FactorResult, Vec<SeriesTermLog>)> {
    let mut log = Vec::new();
    let res = factor_series_impl(kind, p, cfg, Some(&mut log))?;
    Ok((res, log))
}

fn factor_series_impl(
    kind: FactorKind,
    p: &RegionPair,
    cfg: &SeriesConfig,
    log: Option<&mut Vec<SeriesTermLog>>,
) -> Result<FactorResult> {
    cfg.validate()?;
    let p = normalize(*p)?;
    let s = p.schedule();
    let r_ex = p.r + p.r2 + (p.t_offset + p.dt2).max(0.0) + cfg.rex_slack;
    let r1 = p.r1.min(r_ex);
    let ang = angular_weight(kind, p.theta, p.phi);
    let weights: Vec<(u32, f64)> = kind
        .multipoles()
        .iter()
        .map(|&l| (l, multipole_constant(kind, l) * ang.get(l)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let accelerate = kind == FactorKind::Axx && coinciding(&p);
    let d_flat = infinite_avg(AvgKind::DeltaAt, 1.0, &s)?;
    // flat part of the monopole radial: D from q⟨sin⟩ less 3D/2
    let flat = -0.5 * d_flat;
    // a truncated first sphere keeps the density of the full one
    let truncation = (r1 / p.r1).powi(3);
    let offset = if accelerate { truncation * flat_monopole(weights[0].1, flat, r1, p.r2) } else { 0.0 };
    let prefactor = truncation * 9.0 / (2.0 * PI * r_ex * r1 * p.r2);

    let mut acc = Accumulator::new(cfg, offset, log);
    for n in 1..=cfg.n_max {
        let q = n as f64 * PI / r_ex;
        let base = j1(q * r1) * j1(q * p.r2);
        let mut term = 0.0;
        for &(l, w) in &weights {
            let mut u = radial(kind, l, q, &s)?;
            if accelerate && l == 0 {
                u -= flat;
            }
            term += w * u * jl(l, q * p.r);
        }
        if acc.add(n, q, prefactor * base * term) {
            return Ok(acc.finish(n, true, Method::SeriesSimple));
        }
    }
    Ok(acc.finish(cfg.n_max, false, Method::SeriesSimple))
}

fn general_brace(l: u32, q: f64, r_ex: f64, s: &Schedule) -> f64 {
    let scale = theta_scale(s, r_ex);
    let d0 = overlap(s, 0.0, scale);
    match l {
        0 => boundary_sum(Trig::Sin, q, Some(r_ex), s, scale) - 0.5 * q * d0,
        1 => {
            boundary_sum(Trig::Cos, q, Some(r_ex), s, scale)
                - (q * r_ex).cos() * delta_prime_bracket(s, r_ex, scale)
                + cos_step(s, scale)
        }
        _ => {
            let dp = delta_prime_bracket(s, r_ex, scale);
            let dr = overlap(s, r_ex, scale);
            boundary_sum(Trig::Sin, q, Some(r_ex), s, scale) - (q * r_ex).sin() * (dp + dr / r_ex) + q * d0
        }
    }
}

fn general_radial(l: u32, q: f64, r_ex: f64, s: &Schedule) -> f64 {
    general_brace(l, q, r_ex, s) / (s.area() * q)
}

/// Coefficient of the kernel multipole `l` at wavenumber `q` on a ball of
/// radius `r_ex`, angular dependence factored out.
pub fn coeff_general_at(kind: FactorKind, l: u32, q: f64, r_ex: f64, s: &Schedule) -> Result<f64> {
    check_channel(kind, l)?;
    s.validate()?;
    if !(q > 0.0 && q.is_finite() && r_ex > 0.0 && r_ex.is_finite()) {
        return Err(Error::Domain(format!("need q > 0 and r_ex > 0, got {q}, {r_ex}")));
    }
    Ok(multipole_constant(kind, l) * general_radial(l, q, r_ex, s))
}

/// Coefficient at the `n`-th root (1-based) of `j_l`.
pub fn coeff_general(kind: FactorKind, l: u32, n: usize, r_ex: f64, s: &Schedule) -> Result<f64> {
    check_channel(kind, l)?;
    if n == 0 {
        return Err(Error::Domain("root index is 1-based".into()));
    }
    let root = bessel_roots(l, n)?.roots[n - 1];
    coeff_general_at(kind, l, root / r_ex, r_ex, s)
}

/// General-roots series with `r_ex = R + R₁ + R₂ + slack`. All multipoles
/// advance together: term `n` sums the `n`-th root of every channel.
pub fn factor_series_general(kind: FactorKind, p: &RegionPair, cfg: &SeriesConfig) -> Result<FactorResult> {
    factor_series_general_impl(kind, p, cfg, None)
}

pub fn factor_series_general_logged(
    kind: FactorKind,
    p: &RegionPair,
    cfg: &SeriesConfig,
) -> Result<(FactorResult, Vec<SeriesTermLog>)> {
    let mut log = Vec::new();
    let res = factor_series_general_impl(kind, p, cfg, Some(&mut log))?;
    Ok((res, log))
}

fn factor_series_general_impl(
    kind: FactorKind,
    p: &RegionPair,
    cfg: &SeriesConfig,
    log: Option<&mut Vec<SeriesTermLog>>,
) -> Result<FactorResult> {
    cfg.validate()?;
    let p = normalize(*p)?;
    let s = p.schedule();
    let r_ex = p.r + p.r1 + p.r2 + cfg.rex_slack;
    let ang = angular_weight(kind, p.theta, p.phi);
    let coinciding = coinciding(&p);
    let accelerate = kind == FactorKind::Axx && coinciding;
    let mut channels = Vec::new();
    for &l in kind.multipoles() {
        let w = multipole_constant(kind, l) * ang.get(l);
        // j_l(0) = 0 for l ≥ 1 removes the whole channel
        if w == 0.0 || (coinciding && l > 0) {
            continue;
        }
        channels.push((l, w, bessel_roots(l, cfg.n_max)?.roots));
    }
    let d_flat = infinite_avg(AvgKind::DeltaAt, 1.0, &s)?;
    let flat = -0.5 * d_flat;
    let offset = if accelerate { flat_monopole(channels[0].1, flat, p.r1, p.r2) } else { 0.0 };
    let prefactor = 9.0 / (p.r1 * p.r2);

    let mut acc = Accumulator::new(cfg, offset, log);
    for n in 0..cfg.n_max {
        let mut term = 0.0;
        let mut q_first = 0.0;
        for (k, (l, w, roots)) in channels.iter().enumerate() {
            let root = roots[n];
            let q = root / r_ex;
            if k == 0 {
                q_first = q;
            }
            let mut g = general_radial(*l, q, r_ex, &s);
            if accelerate && *l == 0 {
                g -= flat;
            }
            let weight = fb_weight(*l, root, r_ex);
            term += w * g * j1(q * p.r1) * j1(q * p.r2) * jl(*l, q * p.r) / (4.0 * PI * weight * q * q);
        }
        if acc.add(n + 1, q_first, prefactor * term) {
            return Ok(acc.finish(n + 1, true, Method::SeriesGeneral));
        }
    }
    Ok(acc.finish(cfg.n_max, false, Method::SeriesGeneral))
}

/// Partial sum `(π/r_ex) Σ_{n≤N} j₁(nπa/r_ex) j₁(nπb/r_ex)`, whose limit for
/// `a, b ≤ r_ex` is `(π/6) min(a,b)/max(a,b)²`.
pub fn node_product_sum(a: f64, b: f64, r_ex: f64, terms: usize) -> f64 {
    let mut sum = NeumaierSum::new();
    for n in 1..=terms {
        let q = n as f64 * PI / r_ex;
        sum.add(j1(q * a) * j1(q * b));
    }
    PI / r_ex * sum.value()
}

/// The same coefficient assembled from the public finite-radius averages:
/// used to cross-check [`coeff_general_at`].
pub fn coeff_general_from_averages(kind: FactorKind, l: u32, q: f64, r_ex: f64, s: &Schedule) -> Result<f64> {
    check_channel(kind, l)?;
    let area = s.area();
    let dr = area * finite_avg(AvgKind::DeltaAt, q, r_ex, s)?;
    let dp = area * finite_avg(AvgKind::DeltaPrimeAt, q, r_ex, s)?;
    let d0 = area * finite_avg(AvgKind::DeltaAt, q, 0.0, s)?;
    let (sr, cr) = (q * r_ex).sin_cos();
    let brace = match l {
        1 => area * q * q * finite_avg(AvgKind::CosFinite, q, r_ex, s)? - q * sr * dr,
        2 => area * q * q * finite_avg(AvgKind::SinFinite, q, r_ex, s)? + q * cr * dr - sr * dr / r_ex,
        _ => area * q * q * finite_avg(AvgKind::SinFinite, q, r_ex, s)? + q * cr * dr + sr * dp - 1.5 * q * d0,
    };
    Ok(multipole_constant(kind, l) * brace / (area * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::factor_closed;

    fn row5() -> RegionPair {
        RegionPair { r1: 1.0, r2: 1.0, r: 1.0, theta: PI / 6.0, phi: PI / 3.0, dt1: 1.0, dt2: 1.0, t_offset: 0.5 }
    }

    #[test]
    fn utilde_vanishes_without_positive_support() {
        let s = Schedule::new(1.0, 1.0, -3.0);
        for q in [0.3, 1.0, 9.0] {
            assert_eq!(utilde(FactorKind::Axx, 0, q, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadrupole_channels_share_radial_content() {
        let s = Schedule::new(1.0, 2.0, 0.5);
        let a = utilde(FactorKind::Axx, 2, 1.7, &s).unwrap();
        let b = utilde(FactorKind::Axy, 2, 1.7, &s).unwrap();
        assert_eq!(a, b);
        assert!(utilde(FactorKind::Axy, 0, 1.0, &s).is_err());
    }

    #[test]
    fn general_coefficients_saturate_to_utilde() {
        let s = Schedule::new(1.0, 1.3, 0.4);
        let r_ex = 50.0;
        for (kind, l) in [(FactorKind::Axx, 0), (FactorKind::Axx, 2), (FactorKind::Bxy, 1)] {
            for q in [0.4, 1.9, 6.0] {
                let c = coeff_general_at(kind, l, q, r_ex, &s).unwrap();
                let u = utilde(kind, l, q, &s).unwrap();
                assert!((c - u).abs() < 1e-12 * u.abs().max(1.0), "{kind} l={l} q={q}");
            }
        }
    }

    #[test]
    fn general_coefficients_from_averages() {
        let s = Schedule::new(1.0, 1.0, 0.5);
        for (kind, l) in [(FactorKind::Bxy, 1), (FactorKind::Axx, 2)] {
            for r_ex in [0.7, 1.2, 3.5] {
                let c = coeff_general(kind, l, 1, r_ex, &s).unwrap();
                let q = bessel_roots(l, 1).unwrap().roots[0] / r_ex;
                let d = coeff_general_from_averages(kind, l, q, r_ex, &s).unwrap();
                assert!((c - d).abs() < 1e-12 * c.abs().max(1.0), "{kind} r_ex={r_ex}: {c} vs {d}");
            }
        }
        // monopole at a root of j₀, where sin(q r_ex) = 0
        let r_ex = 1.2;
        let q = PI / r_ex;
        let c = coeff_general(FactorKind::Axx, 0, 1, r_ex, &s).unwrap();
        let d = coeff_general_from_averages(FactorKind::Axx, 0, q, r_ex, &s).unwrap();
        assert!((c - d).abs() < 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn general_coefficient_dead_schedule() {
        let s = Schedule::new(1.0, 1.0, -3.0);
        assert_eq!(coeff_general(FactorKind::Axx, 0, 1, 2.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn vanishing_at_coinciding_centres() {
        let p = RegionPair::concentric(1.0, 1.0, 1.0, 2.0, 0.5);
        let cfg = SeriesConfig::default();
        assert_eq!(factor_series(FactorKind::Axy, &p, &cfg).unwrap().value, 0.0);
        assert_eq!(factor_series_general(FactorKind::Bxy, &p, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn first_sphere_larger_than_expansion_radius() {
        // r_ex = 0.4 + 0.75 + 0.1 < R₁
        let p = RegionPair { r1: 1.7, r2: 0.75, r: 0.4, theta: 2.4, phi: 2.3, dt1: 0.5, dt2: 0.45, t_offset: -0.35 };
        let cfg = SeriesConfig::default();
        for kind in FactorKind::ALL {
            let c = factor_closed(kind, &p).unwrap().value;
            let v = factor_series(kind, &p, &cfg).unwrap().value;
            assert!((v - c).abs() < 5e-5 * c.abs().max(1e-6), "{kind}: {v} vs {c}");
        }
    }

    #[test]
    fn simple_series_matches_closed_form() {
        let cfg = SeriesConfig::default();
        for kind in FactorKind::ALL {
            let c = factor_closed(kind, &row5()).unwrap().value;
            let r = factor_series(kind, &row5(), &cfg).unwrap();
            assert!(r.converged);
            assert!((r.value - c).abs() < 5e-5 * c.abs(), "{kind}: {} vs {c}", r.value);
        }
    }

    #[test]
    fn general_series_matches_closed_form() {
        let cfg = SeriesConfig::default();
        let p = RegionPair::concentric(1.0, 1.0, 1.0, 1.0, 0.0);
        let r = factor_series_general(FactorKind::Axx, &p, &cfg).unwrap();
        assert!((r.value + 1.625).abs() < 5e-5 * 1.625, "{}", r.value);
        let c = factor_closed(FactorKind::Bxy, &row5()).unwrap().value;
        let r = factor_series_general(FactorKind::Bxy, &row5(), &cfg).unwrap();
        assert!((r.value - c).abs() < 5e-5 * c.abs(), "{} vs {c}", r.value);
    }

    #[test]
    fn log_records_every_term() {
        let cfg = SeriesConfig::default().with_n_max(50);
        let (res, log) = factor_series_logged(FactorKind::Bxy, &row5(), &cfg).unwrap();
        assert_eq!(log.len(), res.terms_used);
        assert_eq!(log.last().unwrap().partial_sum, res.value);
        assert!(log.windows(2).all(|w| w[1].n == w[0].n + 1));
    }

    #[test]
    fn node_sum_identity() {
        let v = node_product_sum(1.0, 2.0, 3.0, 20_000);
        assert!((v - PI / 24.0).abs() < 1e-5);
    }
}
