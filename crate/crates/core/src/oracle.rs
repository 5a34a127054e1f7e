//! Numerical quadrature of the Fourier-integral form of the factors and of
//! the `ji4` integrals, used only to check the analytic routes.
//!
//! Each integral `∫₀^∞ F(q) dq` is split at a point `Q`. The finite part is
//! integrated on the real axis. Beyond `Q` every oscillating factor is
//! written as a sum of pieces `e^{iωq}·g(q)` with `g` rational (spherical
//! Hankel halves of `j_l`, exponential halves of `sin`/`cos`). Products of
//! pieces with total frequency `Ω ≥ 0` are integrated along `q = Q + is`,
//! the rest along `q = Q − is`, where they decay exponentially.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{normalize, FactorKind, FactorResult, Ji4Args, Method, RegionPair, Schedule};
use crate::quadrature::{integrate, Tolerance};
use crate::special::{angular_weight, j0, j1, j2, jl, jm1, multipole_constant};
use crate::time_avg::{heaviside, overlap, positive_moment, theta_scale};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Interval budget of each adaptive integration.
    pub max_subdivisions: usize,
    /// Minimum number of periods of the fastest oscillation before the
    /// contour split.
    pub tail_periods: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-13, rel_tol: 1e-10, max_subdivisions: 20_000, tail_periods: 4 }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::Validation("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol, max_intervals: self.max_subdivisions }
    }
}

/// A quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
enum Envelope {
    /// Half of `j_l(a q)` without its exponential.
    Hankel { l: i32, a: f64, outgoing: bool },
    /// `coef · q^power`.
    Power { coef: Complex64, power: i32 },
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    omega: f64,
    env: Envelope,
}

impl Piece {
    fn envelope(&self, x: Complex64) -> Complex64 {
        match self.env {
            Envelope::Power { coef, power } => coef * x.powi(power),
            Envelope::Hankel { l, a, outgoing } => {
                let z = x * a;
                let zi = z.inv();
                let s = if outgoing { 1.0 } else { -1.0 };
                match l {
                    -1 => 0.5 * zi,
                    0 => -s * 0.5 * I * zi,
                    1 => -0.5 * (z + s * I) * zi * zi,
                    _ => s * 0.5 * I * (z * z + s * 3.0 * I * z - 3.0) * zi * zi * zi,
                }
            }
        }
    }
}

fn bessel_pieces(l: i32, a: f64) -> Vec<Piece> {
    vec![
        Piece { omega: a, env: Envelope::Hankel { l, a, outgoing: true } },
        Piece { omega: -a, env: Envelope::Hankel { l, a, outgoing: false } },
    ]
}

struct Combo {
    omega: f64,
    pieces: Vec<Piece>,
}

fn expand(factors: &[Vec<Piece>]) -> Vec<Combo> {
    let mut combos = vec![Combo { omega: 0.0, pieces: Vec::new() }];
    for factor in factors {
        let mut next = Vec::with_capacity(combos.len() * factor.len());
        for c in &combos {
            for p in factor {
                let mut pieces = c.pieces.clone();
                pieces.push(*p);
                next.push(Combo { omega: c.omega + p.omega, pieces });
            }
        }
        combos = next;
    }
    combos
}

/// An integral `∫₀^∞ F(q) dq` ready for the split evaluation.
struct Oscillatory<'a> {
    real: &'a dyn Fn(f64) -> f64,
    factors: Vec<Vec<Piece>>,
    /// `(l, a)` of every Bessel factor, to keep `Q·a` out of the region
    /// where the Hankel halves cancel.
    bessel: Vec<(i32, f64)>,
    /// Largest frequency of any factor.
    fastest: f64,
}

fn split_point(problem: &Oscillatory, cfg: &QuadConfig) -> f64 {
    let mut q = 0.0f64;
    for &(l, a) in &problem.bessel {
        let need = match l {
            -1 => 0.0,
            0 => 1.0,
            _ => 6.0,
        };
        q = q.max(need / a);
    }
    let period = 2.0 * PI / problem.fastest.max(1e-300);
    let periods = (q / period).ceil().max(cfg.tail_periods as f64);
    periods * period
}

fn ray_integral(combos: &[&Combo], split: f64, upward: bool, tol: &Tolerance) -> (Complex64, f64, usize, bool) {
    if combos.is_empty() {
        return (Complex64::new(0.0, 0.0), 0.0, 0, true);
    }
    let sigma = if upward { 1.0 } else { -1.0 };
    let length = split;
    let f = |u: f64| {
        let one_minus = 1.0 - u;
        let s = length * u / one_minus;
        let x = Complex64::new(split, sigma * s);
        let jac = I * sigma * length / (one_minus * one_minus);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in combos {
            let phase = (I * c.omega * x).exp();
            if phase.norm() == 0.0 {
                continue;
            }
            let mut v = phase;
            for p in &c.pieces {
                v *= p.envelope(x);
            }
            acc += v;
        }
        acc * jac
    };
    let out = integrate(f, 0.0, 1.0, &[], tol);
    (out.value, out.abs_error, out.evals, out.converged)
}

fn solve(problem: &Oscillatory, cfg: &QuadConfig) -> Result<OracleValue> {
    cfg.validate()?;
    let tol = cfg.tolerance();
    let split = split_point(problem, cfg);
    let head = integrate(|q: f64| (problem.real)(q), 0.0, split, &[], &tol);
    let combos = expand(&problem.factors);
    let up: Vec<&Combo> = combos.iter().filter(|c| c.omega >= 0.0).collect();
    let down: Vec<&Combo> = combos.iter().filter(|c| c.omega < 0.0).collect();
    let tail_tol = Tolerance { abs: 0.5 * cfg.abs_tol, ..tol };
    let (vu, eu, nu, cu) = ray_integral(&up, split, true, &tail_tol);
    let (vd, ed, nd, cd) = ray_integral(&down, split, false, &tail_tol);
    let value = head.value + (vu + vd).re;
    let abs_error = head.abs_error + eu + ed;
    if !(head.converged && cu && cd) || !value.is_finite() {
        return Err(Error::Quadrature { estimate: value, abs_error });
    }
    Ok(OracleValue { value, abs_error, evals: head.evals + nu + nd })
}

fn real_bessel(l: i32, x: f64) -> f64 {
    match l {
        -1 => jm1(x),
        0 => j0(x),
        1 => j1(x),
        _ => j2(x),
    }
}

/// `ji4` by quadrature.
pub fn ji4_numeric(args: &Ji4Args, cfg: &QuadConfig) -> Result<OracleValue> {
    args.validate()?;
    let Ji4Args { n, l3, l4, alpha, beta, gamma, delta } = *args;
    let zero = OracleValue { value: 0.0, abs_error: 0.0, evals: 0 };
    if alpha == 0.0 || beta == 0.0 || (delta == 0.0 && l4 > 0) {
        return Ok(zero);
    }
    if gamma == 0.0 && l3 < 0 {
        return Err(Error::Domain("integral diverges: j_-1 at zero argument".into()));
    }
    let mut bessel = vec![(1, alpha), (1, beta)];
    if gamma != 0.0 {
        bessel.push((l3, gamma));
    }
    if delta != 0.0 {
        bessel.push((l4, delta));
    }
    let mut factors: Vec<Vec<Piece>> = bessel.iter().map(|&(l, a)| bessel_pieces(l, a)).collect();
    if n > 0 {
        factors.push(vec![Piece {
            omega: 0.0,
            env: Envelope::Power { coef: Complex64::new(1.0, 0.0), power: -(n as i32) },
        }]);
    }
    let real = |x: f64| {
        let mut v = x.powi(-(n as i32));
        for &(l, a) in &bessel {
            v *= real_bessel(l, a * x);
        }
        v
    };
    let problem = Oscillatory {
        real: &real,
        factors,
        fastest: alpha.max(beta).max(gamma).max(delta),
        bessel: bessel.clone(),
    };
    solve(&problem, cfg)
}

/// Radial part of one kernel multipole, `q⟨sin qt Θ(t)⟩ + flat` or
/// `q⟨cos qt Θ(t)⟩`, with its exponential pieces.
struct RadialPart {
    cosine: bool,
    /// `(τ, c)` with `c = ±Θ(τ)/Δt₁Δt₂`.
    terms: Vec<(f64, f64)>,
    /// Constant term of the sine form, including any flat monopole shift.
    constant: f64,
    /// Numerator constant of the cosine form.
    cos_constant: f64,
    moments: [f64; 6],
    extent: f64,
    flat: f64,
}

impl RadialPart {
    fn new(s: &Schedule, cosine: bool, flat: f64) -> Self {
        let scale = theta_scale(s, 0.0);
        let area = s.area();
        let taus = s.taus();
        let signs = [1.0, -1.0, 1.0, -1.0];
        let mut terms = Vec::new();
        for i in 0..4 {
            let tau = taus[i + 1];
            let gate = heaviside(tau, scale);
            if gate != 0.0 {
                let tau = if tau.abs() <= 1e-12 * scale { 0.0 } else { tau };
                terms.push((tau, signs[i] * gate / area));
            }
        }
        let d0 = overlap(s, 0.0, scale) / area;
        let h = |x: f64| heaviside(x, scale);
        let (d1, d2, t) = (s.dt1, s.dt2, s.t_offset);
        let cos_constant = (h(t + d2) * h(d1 - d2 - t) - h(t) * h(d1 - t)) / area;
        let mut moments = [0.0; 6];
        for (k, m) in moments.iter_mut().enumerate() {
            *m = positive_moment(k as u32, s);
        }
        let extent = terms.iter().map(|t| t.0.abs()).fold(0.0, f64::max);
        RadialPart { cosine, terms, constant: d0 + flat, cos_constant, moments, extent, flat }
    }

    fn eval(&self, q: f64) -> f64 {
        if q * self.extent < 0.05 {
            self.eval_series(q)
        } else {
            self.eval_direct(q)
        }
    }

    fn eval_series(&self, q: f64) -> f64 {
        let m = &self.moments;
        let q2 = q * q;
        if self.cosine {
            q * (m[0] - q2 * m[2] / 2.0 + q2 * q2 * m[4] / 24.0)
        } else {
            q2 * (m[1] - q2 * m[3] / 6.0 + q2 * q2 * m[5] / 120.0) + self.flat
        }
    }

    fn eval_direct(&self, q: f64) -> f64 {
        if self.cosine {
            let sum: f64 = self.terms.iter().map(|&(tau, c)| c * (q * tau).cos()).sum();
            (sum + self.cos_constant) / q
        } else {
            let sum: f64 = self.terms.iter().map(|&(tau, c)| c * (q * tau).sin()).sum();
            sum / q + self.constant
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::new();
        let power = |coef: Complex64, omega: f64, power: i32| Piece { omega, env: Envelope::Power { coef, power } };
        for &(tau, c) in &self.terms {
            if self.cosine {
                out.push(power(Complex64::new(0.5 * c, 0.0), tau, -1));
                out.push(power(Complex64::new(0.5 * c, 0.0), -tau, -1));
            } else if tau != 0.0 {
                // sin(τq)/q = (e^{iτq} − e^{−iτq}) / (2iq)
                out.push(power(-0.5 * I * c, tau, -1));
                out.push(power(0.5 * I * c, -tau, -1));
            }
        }
        if self.cosine {
            if self.cos_constant != 0.0 {
                out.push(power(Complex64::new(self.cos_constant, 0.0), 0.0, -1));
            }
        } else if self.constant != 0.0 {
            out.push(power(Complex64::new(self.constant, 0.0), 0.0, 0));
        }
        out
    }
}

/// Geometric factor by quadrature of its Fourier-integral form.
pub fn factor_fourier_numeric(kind: FactorKind, p: &RegionPair, cfg: &QuadConfig) -> Result<FactorResult> {
    let p = normalize(*p)?;
    let s = p.schedule();
    let ang = angular_weight(kind, p.theta, p.phi);
    let coinciding = p.r <= 1e-12 * p.r1.max(p.r2).max(1.0);
    let prefactor = 9.0 / (2.0 * PI * PI * p.r1 * p.r2);
    let d0 = overlap(&s, 0.0, theta_scale(&s, 0.0)) / s.area();
    let mut value = 0.0;
    let mut abs_error = 0.0;
    let mut evals = 0;
    for &l in kind.multipoles() {
        let w = multipole_constant(kind, l) * ang.get(l);
        if w == 0.0 || (coinciding && l > 0) {
            continue;
        }
        let flat = if kind == FactorKind::Axx && l == 0 { -1.5 * d0 } else { 0.0 };
        let radial = RadialPart::new(&s, kind == FactorKind::Bxy, flat);
        let mut bessel = vec![(1, p.r1), (1, p.r2)];
        if !coinciding {
            bessel.push((l as i32, p.r));
        }
        let mut factors: Vec<Vec<Piece>> = bessel.iter().map(|&(l, a)| bessel_pieces(l, a)).collect();
        factors.push(radial.pieces());
        let real = |q: f64| {
            let mut v = j1(q * p.r1) * j1(q * p.r2) * radial.eval(q);
            if !coinciding {
                v *= jl(l, q * p.r);
            }
            v
        };
        let fastest = p.r1.max(p.r2).max(p.r).max(radial.extent);
        let problem = Oscillatory { real: &real, factors, bessel, fastest };
        let part = solve(&problem, cfg).map_err(|e| match e {
            Error::Quadrature { estimate, abs_error } => Error::Quadrature {
                estimate: prefactor * w * estimate + value,
                abs_error: (prefactor * w).abs() * abs_error,
            },
            other => other,
        })?;
        value += prefactor * w * part.value;
        abs_error += (prefactor * w).abs() * part.abs_error;
        evals += part.evals;
    }
    Ok(FactorResult {
        value,
        terms_used: evals,
        tail_estimate: abs_error,
        method: Method::FourierNumeric,
        converged: true,
        cancellation_limited: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{factor_closed, ji4};

    #[test]
    fn envelopes_reassemble_bessel_functions() {
        for l in -1..=2 {
            for &x in &[0.7, 3.0, 12.5] {
                let xc = Complex64::new(x, 0.0);
                let v: Complex64 = bessel_pieces(l, 1.3)
                    .iter()
                    .map(|p| (I * p.omega * xc).exp() * p.envelope(xc))
                    .sum();
                let direct = real_bessel(l, 1.3 * x);
                assert!((v.re - direct).abs() < 1e-14 && v.im.abs() < 1e-14, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn radial_pieces_reassemble() {
        for cosine in [false, true] {
            let s = Schedule::new(1.0, 2.0, 0.5);
            let r = RadialPart::new(&s, cosine, -0.3);
            for &q in &[0.9, 4.0] {
                let xc = Complex64::new(q, 0.0);
                let v: Complex64 = r.pieces().iter().map(|p| (I * p.omega * xc).exp() * p.envelope(xc)).sum();
                assert!((v.re - r.eval(q)).abs() < 1e-14, "cos={cosine} q={q}");
            }
        }
    }

    #[test]
    fn small_q_expansion_is_continuous() {
        let s = Schedule::new(1.0, 1.0, 0.5);
        for cosine in [false, true] {
            let r = RadialPart::new(&s, cosine, 0.0);
            let edge = 0.05 / r.extent;
            let a = r.eval_series(edge);
            let b = r.eval_direct(edge);
            assert!((a - b).abs() < 1e-11 * b.abs(), "cos={cosine} {a} {b}");
        }
    }

    #[test]
    fn two_parameter_integral() {
        let v = ji4_numeric(&Ji4Args::new(0, 0, 0, 1.0, 2.0, 0.0, 0.0), &QuadConfig::default()).unwrap();
        assert!((v.value - PI / 24.0).abs() < 1e-7);
    }

    #[test]
    fn quadrupole_without_delta_vanishes() {
        let v = ji4_numeric(&Ji4Args::new(0, 0, 2, 1.0, 1.0, 0.3, 0.0), &QuadConfig::default()).unwrap();
        assert!(v.value.abs() < 1e-9);
    }

    #[test]
    fn agrees_with_closed_forms() {
        let cases = [
            Ji4Args::new(0, 0, 0, 1.0, 1.0, 0.5, 1.0),
            Ji4Args::new(0, 0, 2, 1.0, 1.7, 0.5, 1.2),
            Ji4Args::new(0, -1, 1, 1.0, 1.0, 0.5, 1.0),
            Ji4Args::new(1, 0, 1, 1.2, 0.8, 0.0, 1.1),
        ];
        for a in cases {
            let num = ji4_numeric(&a, &QuadConfig::default()).unwrap().value;
            let exact = ji4(&a).unwrap();
            assert!((num - exact).abs() <= 1e-8 * exact.abs(), "{a:?}: {num} vs {exact}");
        }
    }

    #[test]
    fn tighter_tolerance_moves_less_than_error_estimate() {
        let a = Ji4Args::new(0, 0, 0, 1.0, 1.3, 0.4, 0.9);
        let loose = QuadConfig { abs_tol: 1e-9, rel_tol: 1e-7, ..Default::default() };
        let tight = QuadConfig { abs_tol: 5e-10, rel_tol: 5e-8, ..Default::default() };
        let x = ji4_numeric(&a, &loose).unwrap();
        let y = ji4_numeric(&a, &tight).unwrap();
        assert!((x.value - y.value).abs() <= x.abs_error);
    }

    #[test]
    fn factor_row1_and_row9() {
        let cfg = QuadConfig::default();
        let row1 = RegionPair::concentric(1.0, 1.0, 1.0, 1.0, 0.0);
        let v = factor_fourier_numeric(FactorKind::Axx, &row1, &cfg).unwrap().value;
        assert!((v + 1.625).abs() < 1e-4, "{v}");
        let row9 = RegionPair { r1: 1.0, r2: 1.0, r: 1.0, theta: PI / 6.0, phi: PI / 3.0, dt1: 1.0, dt2: 1.0, t_offset: 0.5 };
        let v = factor_fourier_numeric(FactorKind::Bxy, &row9, &cfg).unwrap().value;
        let c = factor_closed(FactorKind::Bxy, &row9).unwrap().value;
        assert!((v - c).abs() < 1e-8 * c.abs(), "{v} vs {c}");
        let v = factor_fourier_numeric(FactorKind::Axy, &row1, &cfg).unwrap().value;
        assert_eq!(v, 0.0);
    }
}
