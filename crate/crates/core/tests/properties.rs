use std::f64::consts::PI;

use brfactor::closed_form::{coincident_axx, factor_closed, factor_closed_with_bound, ji4};
use brfactor::model::{normalize, reverse, FactorKind, Ji4Args, RegionPair, Schedule};
use brfactor::special::{angular_weight, bessel_roots, sph_bessel};
use brfactor::time_avg::{finite_avg, infinite_avg, AvgKind};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

// values that vanish analytically come out as rounding residue of order
// 1e-13 / length
fn sym_close(u: f64, v: f64, length: f64) -> bool {
    (u - v).abs() <= 1e-12 * u.abs().max(v.abs()) + 1e-12 / length
}

fn length() -> impl Strategy<Value = f64> {
    0.2f64..3.0
}

fn region_pair() -> impl Strategy<Value = RegionPair> {
    (length(), length(), 0.0f64..3.0, 0.0f64..PI, 0.0f64..2.0 * PI, length(), length(), -4.0f64..4.0).prop_map(
        |(r1, r2, r, theta, phi, dt1, dt2, t_offset)| RegionPair { r1, r2, r, theta, phi, dt1, dt2, t_offset },
    )
}

fn schedule() -> impl Strategy<Value = Schedule> {
    (length(), length(), -4.0f64..4.0).prop_map(|(a, b, t)| Schedule::new(a, b, t))
}

proptest! {
    #[test]
    fn ji4_symmetric_in_first_pair(a in length(), b in length(), g in length(), d in length(), sig in 0usize..4) {
        let make = |x, y| match sig {
            0 => Ji4Args::new(0, 0, 0, x, y, g, d),
            1 => Ji4Args::new(0, 0, 2, x, y, g, d),
            2 => Ji4Args::new(0, -1, 1, x, y, g, d),
            _ => Ji4Args::new(1, 0, 1, x, y, 0.0, d),
        };
        let (u, v) = (ji4(&make(a, b)).unwrap(), ji4(&make(b, a)).unwrap());
        prop_assert!(sym_close(u, v, a.min(b)), "{u} vs {v}");
    }

    #[test]
    fn ji4_symmetric_in_second_pair(a in length(), b in length(), g in 0.0f64..3.0, d in 0.0f64..3.0) {
        let u = ji4(&Ji4Args::new(0, 0, 0, a, b, g, d)).unwrap();
        let v = ji4(&Ji4Args::new(0, 0, 0, a, b, d, g)).unwrap();
        prop_assert!(sym_close(u, v, a.min(b)), "{u} vs {v}");
    }

    #[test]
    fn ji4_rejects_negative(a in length(), g in length()) {
        prop_assert!(ji4(&Ji4Args::new(0, 0, 0, -a, 1.0, g, 1.0)).is_err());
    }

    #[test]
    fn angular_structure(theta in 0.0f64..PI, phi in 0.0f64..2.0 * PI) {
        let axy = angular_weight(FactorKind::Axy, theta, phi);
        let axy_ref = angular_weight(FactorKind::Axy, theta, PI / 4.0);
        prop_assert!((axy.get(2) - axy_ref.get(2) * (2.0 * phi).sin()).abs() < 1e-14);
        prop_assert_eq!(angular_weight(FactorKind::Bxy, theta, phi), angular_weight(FactorKind::Bxy, theta, 0.0));
        let a = angular_weight(FactorKind::Axx, theta, phi);
        let b = angular_weight(FactorKind::Axx, theta, phi + PI / 2.0);
        let c = angular_weight(FactorKind::Axx, theta, 0.0);
        let d = angular_weight(FactorKind::Axx, theta, PI / 2.0);
        for l in 0..3 {
            prop_assert!((a.get(l) + b.get(l) - c.get(l) - d.get(l)).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_scales_as_inverse_fourth_power(p in region_pair(), lambda in 0.1f64..10.0) {
        for kind in FactorKind::ALL {
            let (base, base_err) = factor_closed_with_bound(kind, &p).unwrap();
            let (scaled, scaled_err) = factor_closed_with_bound(kind, &p.scaled(lambda)).unwrap();
            let l4 = lambda.powi(4);
            let expect = base.value / l4;
            let allowed = 1e-10 * expect.abs() + base_err / l4 + scaled_err;
            prop_assert!((scaled.value - expect).abs() <= allowed, "{kind}: {} vs {expect} (allowed {allowed:e})", scaled.value);
        }
    }

    #[test]
    fn coinciding_spheres_match_closed_form(r0 in length(), kappa in 0.05f64..4.0) {
        let p = RegionPair::concentric(r0, r0, kappa * r0, kappa * r0, 0.0);
        let c = factor_closed(FactorKind::Axx, &p).unwrap().value;
        let d = coincident_axx(r0, kappa * r0).unwrap();
        prop_assert!(close(c, d, 1e-12), "{c} vs {d}");
    }

    #[test]
    fn reverse_is_an_involution(p in region_pair()) {
        let p = normalize(p).unwrap();
        let back = reverse(reverse(p).unwrap()).unwrap();
        for (a, b) in [(back.r1, p.r1), (back.r2, p.r2), (back.r, p.r), (back.dt1, p.dt1), (back.dt2, p.dt2),
                       (back.t_offset, p.t_offset), (back.theta, p.theta)] {
            prop_assert!((a - b).abs() < 1e-14 * b.abs().max(1.0));
        }
        let dphi = (back.phi - p.phi).abs();
        prop_assert!(dphi < 1e-13 || (dphi - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn finite_averages_saturate(s in schedule(), q in 0.1f64..8.0, extra in 0.01f64..5.0) {
        let r_ex = (s.t_offset + s.dt2).max((s.t_offset - s.dt1).abs()) + extra;
        prop_assert_eq!(finite_avg(AvgKind::SinFinite, q, r_ex, &s).unwrap(), infinite_avg(AvgKind::SinInf, q, &s).unwrap());
        prop_assert_eq!(finite_avg(AvgKind::CosFinite, q, r_ex, &s).unwrap(), infinite_avg(AvgKind::CosInf, q, &s).unwrap());
    }

    #[test]
    fn eps_term_is_half_the_zero_radius_delta(s in schedule(), r_ex in 0.1f64..5.0) {
        let e = finite_avg(AvgKind::EpsTerm, 1.0, r_ex, &s).unwrap();
        let d = finite_avg(AvgKind::DeltaAt, 1.0, 0.0, &s).unwrap();
        prop_assert!((e - 0.5 * d).abs() <= 1e-15 * d.abs().max(1e-300));
    }

    #[test]
    fn averages_are_bounded(s in schedule(), q in 0.1f64..8.0, r_ex in 0.1f64..5.0) {
        for kind in [AvgKind::SinFinite, AvgKind::CosFinite] {
            let v = finite_avg(kind, q, r_ex, &s).unwrap();
            prop_assert!(v.abs() <= 1.0 + 1e-12, "{kind:?}: {v}");
        }
    }
}

#[test]
fn roots_are_zeros_and_interlace() {
    let tables: Vec<_> = (0..=2).map(|l| bessel_roots(l, 200).unwrap()).collect();
    for t in &tables {
        for &x in &t.roots {
            assert!(sph_bessel(t.l as i32, x).unwrap().abs() < 1e-12, "l={} x={x}", t.l);
        }
        assert!(t.roots.windows(2).all(|w| w[0] < w[1]));
    }
    for l in 0..2 {
        let (a, b) = (&tables[l].roots, &tables[l + 1].roots);
        for n in 0..199 {
            assert!(a[n] < b[n] && b[n] < a[n + 1], "l={l} n={n}");
        }
    }
}
