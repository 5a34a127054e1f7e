//! Closed-form four-spherical-Bessel integrals and the factors built from
//! them.
//!
//! `ji4(n; 1,1,l3,l4; α,β,γ,δ) = ∫₀^∞ j₁(αx) j₁(βx) j_l3(γx) j_l4(δx) x⁻ⁿ dx`
//! reduces to finite sums over sign permutations of the parameters, with
//! separate shorter sums when `γ` or `δ` vanish.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{normalize, reverse, FactorKind, FactorResult, Ji4Args, Method, RegionPair, Schedule};
use crate::special::{angular_weight, multipole_constant};
use crate::summation::NeumaierSum;
use crate::time_avg::{heaviside, overlap, theta_scale, ZERO_BAND};

/// Sums cancelling below this fraction of their largest term are flagged.
pub const CANCELLATION_RATIO: f64 = 1e-8;

/// Multiple of machine epsilon in the rounding bound of the closed form.
const ROUNDING_ULPS: f64 = 64.0;

/// Indicator of zero: 1 when `|x| ≤ 1e-12·scale`, else 0.
#[inline]
pub fn zr(x: f64, scale: f64) -> f64 {
    if x.abs() <= ZERO_BAND * scale {
        1.0
    } else {
        0.0
    }
}

/// Signed parameters of the `n`-th permutation term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTuple {
    pub n: u8,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub gamma_n: f64,
    pub delta_n: f64,
    pub delta_prime_n: f64,
}

impl SignTuple {
    pub fn new(n: u8, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        let flip = |bit: bool, v: f64| if bit { -v } else { v };
        SignTuple {
            n,
            alpha_n: alpha,
            beta_n: flip(n & 1 == 1, beta),
            gamma_n: flip((n >> 1) & 1 == 1, gamma),
            delta_n: flip((n >> 2) & 1 == 1, delta),
            delta_prime_n: flip((n >> 1) & 1 == 1, delta),
        }
    }
}

/// A `ji4` value with its cancellation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ji4Eval {
    pub value: f64,
    pub cancellation_limited: bool,
    /// Largest single term of the sign sum, with the prefactor applied.
    pub magnitude: f64,
}

impl Ji4Eval {
    fn exact_zero() -> Self {
        Ji4Eval { value: 0.0, cancellation_limited: false, magnitude: 0.0 }
    }
}

fn permutation_sum<F>(count: u8, a: f64, b: f64, g: f64, d: f64, term: F) -> NeumaierSum
where
    F: Fn(&SignTuple) -> f64,
{
    (0..count).map(|n| term(&SignTuple::new(n, a, b, g, d))).collect()
}

fn finish(prefactor: f64, sum: NeumaierSum) -> Ji4Eval {
    Ji4Eval {
        value: prefactor * sum.value(),
        cancellation_limited: sum.cancelled_below(CANCELLATION_RATIO),
        magnitude: (prefactor * sum.largest_term()).abs(),
    }
}

fn ji_0000(a: f64, b: f64, g: f64, d: f64) -> Ji4Eval {
    let sum = permutation_sum(8, a, b, g, d, |t| {
        let (an, bn, gn, dn) = (t.alpha_n, t.beta_n, t.gamma_n, t.delta_n);
        let s = an + bn + gn + dn;
        s.abs().powi(3) / (an * bn * gn * dn)
            * (4.0 * an * an + (4.0 * bn - gn - dn) * (-3.0 * an + bn + gn + dn))
    });
    finish(PI / (1920.0 * a * b), sum)
}

fn ji_0002(a: f64, b: f64, g: f64, d: f64) -> Ji4Eval {
    let sum = permutation_sum(8, a, b, g, d, |t| {
        let (an, bn, gn, dn) = (t.alpha_n, t.beta_n, t.gamma_n, t.delta_n);
        let s = an + bn + gn + dn;
        let abg = an + bn + gn;
        let poly = abg * (abg - 3.0 * dn) * (6.0 * an * an + (6.0 * bn - gn) * (-5.0 * an + bn + gn))
            + (8.0 * (an * an - 12.0 * an * bn + bn * bn) + 9.0 * (an + bn) * gn + gn * gn) * dn * dn
            + (24.0 * (an + bn) - 11.0 * gn) * dn.powi(3)
            - 8.0 * dn.powi(4);
        s.abs().powi(3) / (an * bn * gn * dn) * poly
    });
    finish(-PI / (26880.0 * a * b * d * d), sum)
}

fn ji_0m11(a: f64, b: f64, g: f64, d: f64) -> Ji4Eval {
    let sum = permutation_sum(8, a, b, g, d, |t| {
        let (an, bn, gn, dn) = (t.alpha_n, t.beta_n, t.gamma_n, t.delta_n);
        let s = an + bn + gn + dn;
        let poly = 5.0 * an.powi(3) - 3.0 * an * an * (5.0 * bn - 3.0 * gn + 5.0 * dn)
            + (-3.0 * an + bn + gn + dn) * (5.0 * bn * bn + (gn - 5.0 * dn) * (4.0 * bn - gn - dn));
        s.abs().powi(3) / (an * bn * dn) * poly
    });
    finish(-PI / (11520.0 * a * b * g * d), sum)
}

/// `γ = δ = 0`, signature (0; 1,1,0,0).
fn ji_two(a: f64, b: f64) -> Ji4Eval {
    let sum = permutation_sum(2, a, b, 0.0, 0.0, |t| {
        let (an, bn) = (t.alpha_n, t.beta_n);
        (an + bn).abs() / (an * bn) * (an * an - an * bn + bn * bn)
    });
    finish(PI / (12.0 * a * b), sum)
}

/// One of `γ, δ` zero, signature (0; 1,1,0,0); `c` is the nonzero one.
fn ji_three(a: f64, b: f64, c: f64) -> Ji4Eval {
    let sum = permutation_sum(4, a, b, c, 0.0, |t| {
        let (an, bn, cn) = (t.alpha_n, t.beta_n, t.gamma_n);
        let s = an + bn + cn;
        s * s.abs() / (an * bn * cn) * (3.0 * (an - bn).powi(2) + 2.0 * (an + bn) * cn - cn * cn)
    });
    finish(PI / (192.0 * a * b), sum)
}

/// `γ = 0`, signature (0; 1,1,0,2).
fn ji_three_quad(a: f64, b: f64, d: f64) -> Ji4Eval {
    let sum = permutation_sum(4, a, b, 0.0, d, |t| {
        let (an, bn, dn) = (t.alpha_n, t.beta_n, t.delta_prime_n);
        let s = an + bn + dn;
        s * s.abs() / (an * bn * dn)
            * (an + bn - dn).powi(2)
            * (an * an - 4.0 * an * bn + bn * bn - dn * dn)
    });
    finish(-PI / (384.0 * a * b * d * d), sum)
}

/// `γ = 0`, signature (1; 1,1,0,1).
fn ji_three_dipole(a: f64, b: f64, d: f64) -> Ji4Eval {
    let sum = permutation_sum(4, a, b, 0.0, d, |t| {
        let (an, bn, dn) = (t.alpha_n, t.beta_n, t.delta_prime_n);
        let s = an + bn + dn;
        let poly = an.powi(3) - 3.0 * an * (bn * bn - 4.0 * bn * dn + dn * dn)
            + (bn + dn) * (-3.0 * an * an + bn * bn - 4.0 * bn * dn + dn * dn);
        s.abs().powi(3) / (an * bn * dn) * poly
    });
    finish(-PI / (1152.0 * a * b * d), sum)
}

/// Closed-form `ji4` with diagnostics.
///
/// Parameters within `1e-12·max(α,β,γ,δ,1)` of zero count as zero. Zero
/// `α` or `β` gives 0 (`j₁(0) = 0`); so does zero `δ` with `l4 > 0`.
pub fn ji4_eval(args: &Ji4Args) -> Result<Ji4Eval> {
    args.validate()?;
    let Ji4Args { n, l3, l4, alpha, beta, gamma, delta } = *args;
    let scale = alpha.max(beta).max(gamma).max(delta).max(1.0);
    if zr(alpha, scale) == 1.0 || zr(beta, scale) == 1.0 {
        return Ok(Ji4Eval::exact_zero());
    }
    let gz = zr(gamma, scale) == 1.0;
    let dz = zr(delta, scale) == 1.0;
    match (n, l3, l4) {
        (0, 0, 0) => Ok(match (gz, dz) {
            (true, true) => ji_two(alpha, beta),
            (true, false) => ji_three(alpha, beta, delta),
            (false, true) => ji_three(alpha, beta, gamma),
            (false, false) => ji_0000(alpha, beta, gamma, delta),
        }),
        (0, 0, 2) => Ok(match (gz, dz) {
            (_, true) => Ji4Eval::exact_zero(),
            (true, false) => ji_three_quad(alpha, beta, delta),
            (false, false) => ji_0002(alpha, beta, gamma, delta),
        }),
        (0, -1, 1) => match (gz, dz) {
            (true, _) => Err(Error::Domain("ji4(0;1,1,-1,1) diverges for gamma = 0".into())),
            (false, true) => Ok(Ji4Eval::exact_zero()),
            (false, false) => Ok(ji_0m11(alpha, beta, gamma, delta)),
        },
        (1, 0, 1) => match (gz, dz) {
            (_, true) => Ok(Ji4Eval::exact_zero()),
            (true, false) => Ok(ji_three_dipole(alpha, beta, delta)),
            (false, false) => Err(Error::Domain(
                "ji4(1;1,1,0,1) has a closed form only for gamma = 0".into(),
            )),
        },
        _ => Err(Error::UnsupportedSignature { n, l3, l4 }),
    }
}

/// Closed-form `ji4` value.
pub fn ji4(args: &Ji4Args) -> Result<f64> {
    ji4_eval(args).map(|e| e.value)
}

/// The offsets `τ_i` and weights `g_i^(l)` of the closed-form factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    /// `τ₀..τ₄`, with values inside the zero band snapped to 0.
    pub tau: [f64; 5],
    /// `g[l][i]`.
    pub g: [[f64; 5]; 3],
    pub scale: f64,
}

impl CoefficientSet {
    pub fn new(s: &Schedule) -> Self {
        let scale = theta_scale(s, 0.0);
        let mut tau = s.taus();
        for t in tau.iter_mut() {
            if zr(*t, scale) == 1.0 {
                *t = 0.0;
            }
        }
        let area = s.area();
        let h = |x: f64| heaviside(x, scale);
        let d0 = overlap(s, 0.0, scale);
        let mut g = [[0.0; 5]; 3];
        g[0][0] = -d0 / (2.0 * area);
        g[1][0] = (h(tau[2]) * h(-tau[1]) - h(tau[3]) * h(-tau[4])) / area;
        g[2][0] = d0 / area;
        for (l, row) in g.iter_mut().enumerate() {
            for i in 1..5 {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                let extra = if l == 1 { zr(tau[i], scale) } else { 0.0 };
                row[i] = sign * h(tau[i]) * (tau[i] + extra) / area;
            }
        }
        CoefficientSet { tau, g, scale }
    }
}

fn ji4_args_for(l: u32, tau: f64, p: &RegionPair, scale: f64) -> Ji4Args {
    match l {
        0 => Ji4Args::new(0, 0, 0, p.r1, p.r2, tau, p.r),
        2 => Ji4Args::new(0, 0, 2, p.r1, p.r2, tau, p.r),
        _ if zr(tau, scale) == 1.0 => Ji4Args::new(1, 0, 1, p.r1, p.r2, tau, p.r),
        _ => Ji4Args::new(0, -1, 1, p.r1, p.r2, tau, p.r),
    }
}

/// Closed-form geometric factor.
pub fn factor_closed(kind: FactorKind, p: &RegionPair) -> Result<FactorResult> {
    factor_closed_with_bound(kind, p).map(|(r, _)| r)
}

/// As [`factor_closed`], also returning an estimate of the absolute rounding
/// error: a few ulps of the summed magnitudes of every term that entered.
pub fn factor_closed_with_bound(kind: FactorKind, p: &RegionPair) -> Result<(FactorResult, f64)> {
    let p = normalize(*p)?;
    let coeffs = CoefficientSet::new(&p.schedule());
    let ang = angular_weight(kind, p.theta, p.phi);
    let mut total = NeumaierSum::new();
    let mut evaluated = 0;
    let mut limited = false;
    let mut magnitude = 0.0;
    for &l in kind.multipoles() {
        let w = multipole_constant(kind, l) * ang.get(l);
        if w == 0.0 {
            continue;
        }
        let mut channel = NeumaierSum::new();
        for i in 0..5 {
            let g = coeffs.g[l as usize][i];
            if g == 0.0 {
                continue;
            }
            let tau = coeffs.tau[i];
            let scale = p.r1.max(p.r2).max(p.r).max(tau.abs()).max(1.0);
            let e = ji4_eval(&ji4_args_for(l, tau, &p, scale))?;
            evaluated += 1;
            limited |= e.cancellation_limited;
            magnitude += (w * g).abs() * e.magnitude;
            channel.add(g * e.value);
        }
        total.add(w * channel.value());
    }
    let prefactor = 9.0 / (2.0 * PI * PI * p.r1 * p.r2);
    let result = FactorResult {
        value: prefactor * total.value(),
        terms_used: evaluated,
        tail_estimate: 0.0,
        method: Method::ClosedForm,
        converged: true,
        cancellation_limited: limited,
    };
    Ok((result, ROUNDING_ULPS * f64::EPSILON * prefactor * magnitude))
}

/// `A_xx` for two identical, fully coinciding regions of radius `r0` and
/// duration `dt0`, as a function of `κ = dt0/r0`.
pub fn coincident_axx(r0: f64, dt0: f64) -> Result<f64> {
    if !(r0 > 0.0 && r0.is_finite() && dt0 > 0.0 && dt0.is_finite()) {
        return Err(Error::Validation(format!("need r0 > 0 and dt0 > 0, got {r0}, {dt0}")));
    }
    let kappa = dt0 / r0;
    let r4k = r0.powi(4) * kappa;
    let gate = heaviside(2.0 - kappa, kappa.max(2.0));
    let near = if gate == 0.0 { 0.0 } else { (4.0 + kappa) * (2.0 - kappa).powi(2) * gate / (8.0 * r4k) };
    Ok(-near - 1.0 / r4k)
}

/// `C^(I,II) − C^(II,I)`, the combination that multiplies `iħ` in the field
/// commutators. Only the geometric bracket is returned.
pub fn commutator_difference(kind: FactorKind, p: &RegionPair) -> Result<f64> {
    let forward = factor_closed(kind, p)?.value;
    let backward = factor_closed(kind, &reverse(*p)?)?.value;
    Ok(forward - backward)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_indicator() {
        assert_eq!(zr(0.0, 1.0), 1.0);
        assert_eq!(zr(0.5, 1.0), 0.0);
        assert_eq!(zr(1e-14, 1.0), 1.0);
    }

    #[test]
    fn sign_tuples() {
        let t = SignTuple::new(5, 1.0, 2.0, 3.0, 4.0);
        assert_eq!((t.alpha_n, t.beta_n, t.gamma_n, t.delta_n, t.delta_prime_n), (1.0, -2.0, 3.0, -4.0, 4.0));
        let t = SignTuple::new(2, 1.0, 2.0, 3.0, 4.0);
        assert_eq!((t.beta_n, t.gamma_n, t.delta_n, t.delta_prime_n), (2.0, -3.0, 4.0, -4.0));
    }

    #[test]
    fn two_parameter_value() {
        let v = ji4(&Ji4Args::new(0, 0, 0, 1.0, 2.0, 0.0, 0.0)).unwrap();
        assert!((v - PI / 24.0).abs() < 1e-15);
    }

    #[test]
    fn quadrupole_vanishes_without_delta() {
        assert_eq!(ji4(&Ji4Args::new(0, 0, 2, 1.0, 1.3, 0.7, 0.0)).unwrap(), 0.0);
        assert_eq!(ji4(&Ji4Args::new(1, 0, 1, 1.0, 1.3, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            ji4(&Ji4Args::new(0, 1, 1, 1.0, 1.0, 1.0, 1.0)),
            Err(Error::UnsupportedSignature { n: 0, l3: 1, l4: 1 })
        ));
        assert!(matches!(ji4(&Ji4Args::new(0, 0, 0, 1.0, -1.0, 1.0, 1.0)), Err(Error::Domain(_))));
        assert!(ji4(&Ji4Args::new(0, -1, 1, 1.0, 1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn zero_parameter_forms_are_limits_of_full_sums() {
        let eps = 1e-4;
        let pairs = [
            (Ji4Args::new(0, 0, 0, 1.0, 1.4, eps, 0.8), Ji4Args::new(0, 0, 0, 1.0, 1.4, 0.0, 0.8)),
            (Ji4Args::new(0, 0, 2, 1.0, 1.4, eps, 0.8), Ji4Args::new(0, 0, 2, 1.0, 1.4, 0.0, 0.8)),
        ];
        for (near, at) in pairs {
            let a = ji4(&near).unwrap();
            let b = ji4(&at).unwrap();
            assert!((a - b).abs() < 1e-6 * b.abs().max(1e-3), "{a} vs {b}");
        }
        // γ·ji4(0;1,1,−1,1) → ji4(1;1,1,0,1) as γ → 0, since j₋₁(γx) ≈ 1/(γx)
        let a = eps * ji4(&Ji4Args::new(0, -1, 1, 1.0, 1.4, eps, 0.8)).unwrap();
        let b = ji4(&Ji4Args::new(1, 0, 1, 1.0, 1.4, 0.0, 0.8)).unwrap();
        assert!((a - b).abs() < 1e-6 * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn table_rows_closed() {
        let row1 = RegionPair::concentric(1.0, 1.0, 1.0, 1.0, 0.0);
        let v = factor_closed(FactorKind::Axx, &row1).unwrap().value;
        assert!((v + 1.625).abs() < 1e-12);
        let row9 = RegionPair { r1: 1.0, r2: 1.0, r: 1.0, theta: PI / 6.0, phi: PI / 3.0, dt1: 1.0, dt2: 1.0, t_offset: 0.5 };
        let v = factor_closed(FactorKind::Bxy, &row9).unwrap().value;
        assert!((v + 0.2730).abs() < 5e-5);
        let v = factor_closed(FactorKind::Axy, &RegionPair::concentric(1.0, 2.0, 1.0, 1.5, 0.2)).unwrap().value;
        assert_eq!(v, 0.0);
    }

    #[test]
    fn coincident_formula() {
        assert!((coincident_axx(1.0, 1.0).unwrap() + 1.625).abs() < 1e-15);
        assert_eq!(coincident_axx(1.0, 3.0).unwrap(), -1.0 / 3.0);
        let v = coincident_axx(10.0, 1.0).unwrap();
        assert!((v + 2.850e-3).abs() < 5e-7);
        assert!(coincident_axx(0.0, 1.0).is_err());
    }

    #[test]
    fn coincident_increases_towards_zero() {
        let mut prev = coincident_axx(1.0, 0.01).unwrap();
        for k in 2..400 {
            let v = coincident_axx(1.0, 0.01 * k as f64).unwrap();
            assert!(v > prev && v < 0.0);
            prev = v;
        }
    }

    #[test]
    fn coincident_matches_general_closed_form() {
        for (r0, dt0) in [(1.0, 1.0), (10.0, 1.0), (1.0, 3.0), (0.7, 0.4)] {
            let p = RegionPair::concentric(r0, r0, dt0, dt0, 0.0);
            let general = factor_closed(FactorKind::Axx, &p).unwrap().value;
            let direct = coincident_axx(r0, dt0).unwrap();
            assert!((general - direct).abs() <= 1e-12 * direct.abs(), "{general} vs {direct}");
        }
    }

    #[test]
    fn commutator_of_self_reverse_is_zero() {
        let p = RegionPair::concentric(1.3, 1.3, 0.8, 0.8, 0.0);
        for kind in FactorKind::ALL {
            assert_eq!(commutator_difference(kind, &p).unwrap(), 0.0);
        }
    }
}
