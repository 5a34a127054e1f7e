//! Seeded cross-route comparison report.

use std::fmt::Write as _;

use brfactor::closed_form::factor_closed;
use brfactor::fourier_bessel::{factor_series, factor_series_general};
use brfactor::oracle::{factor_fourier_numeric, ji4_numeric};
use brfactor::sampling;
use brfactor::time_avg::{finite_avg, infinite_avg, numeric_time_average, AvgKind};
use brfactor::{ji4, FactorKind, RegionPair};
use clap::Args;
use rayon::prelude::*;

use crate::{QuadOpts, SeriesOpts};

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random draws per suite.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[command(flatten)]
    series: SeriesOpts,
    #[command(flatten)]
    quad: QuadOpts,
}

/// Worst deviation of one pairing over all cases.
struct Pairing {
    name: &'static str,
    bound: f64,
    cases: usize,
    over: usize,
    /// Over-bound cases whose reference lies below the relative floor.
    over_near_zero: usize,
    worst: f64,
    worst_at: String,
    errors: Vec<String>,
}

impl Pairing {
    fn new(name: &'static str, bound: f64) -> Self {
        Pairing { name, bound, cases: 0, over: 0, over_near_zero: 0, worst: 0.0, worst_at: String::new(), errors: Vec::new() }
    }

    fn record(&mut self, dev: f64, reference: f64, at: impl FnOnce() -> String) {
        self.cases += 1;
        if dev.is_nan() || dev > self.bound {
            self.over += 1;
            if reference.abs() < FLOOR {
                self.over_near_zero += 1;
            }
        }
        if dev.is_nan() || dev > self.worst {
            self.worst = dev;
            self.worst_at = at();
        }
    }

    fn pass(&self) -> bool {
        self.over == 0 && self.errors.is_empty()
    }
}

const FLOOR: f64 = 1e-6;

fn rel_dev(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(FLOOR)
}

type Values = brfactor::Result<[f64; 5]>;

/// closed, simple, general, numeric, and the reference for the series.
fn pair_values(kind: FactorKind, p: &RegionPair, a: &ValidateArgs) -> Values {
    let cfg = a.series.config();
    let closed = factor_closed(kind, p)?;
    let numeric = factor_fourier_numeric(kind, p, &a.quad.config())?.value;
    let simple = factor_series(kind, p, &cfg)?.value;
    let general = factor_series_general(kind, p, &cfg)?.value;
    let reference = if closed.cancellation_limited { numeric } else { closed.value };
    Ok([closed.value, simple, general, numeric, reference])
}

pub fn run(a: ValidateArgs) -> anyhow::Result<u8> {
    a.series.config().validate()?;
    a.quad.config().validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "validation seed={} samples={}", a.seed, a.samples);

    let mut pairings = [
        Pairing::new("closed vs series_simple", 5e-5),
        Pairing::new("closed vs series_general", 5e-5),
        Pairing::new("series_simple vs series_general", 5e-5),
        Pairing::new("closed vs fourier_numeric", 1e-3),
        Pairing::new("ji4 vs quadrature", 1e-7),
        Pairing::new("time averages vs quadrature", 1e-8),
    ];

    let pairs = sampling::region_pairs(a.seed, a.samples);
    let jobs: Vec<(usize, FactorKind)> =
        (0..pairs.len()).flat_map(|i| FactorKind::ALL.into_iter().map(move |k| (i, k))).collect();
    let values: Vec<Values> = jobs.par_iter().map(|&(i, k)| pair_values(k, &pairs[i], &a)).collect();
    let mut substituted = 0;
    for (&(i, kind), v) in jobs.iter().zip(values) {
        let at = || format!("sample {i} {kind} {}", serde_json::to_string(&pairs[i]).unwrap_or_default());
        match v {
            Ok([closed, simple, general, numeric, reference]) => {
                if reference != closed {
                    substituted += 1;
                }
                pairings[0].record(rel_dev(simple, reference), reference, at);
                pairings[1].record(rel_dev(general, reference), reference, at);
                pairings[2].record((simple - general).abs() / reference.abs().max(FLOOR), reference, at);
                pairings[3].record(rel_dev(numeric, closed), closed, at);
            }
            Err(e) => pairings[0].errors.push(format!("{}: {e}", at())),
        }
    }

    let cases = sampling::ji4_cases(a.seed.wrapping_add(1), a.samples);
    let quad = a.quad.config();
    let devs: Vec<brfactor::Result<(f64, f64)>> = cases
        .par_iter()
        .map(|c| {
            let exact = ji4(c)?;
            let num = ji4_numeric(c, &quad)?.value;
            Ok((rel_dev(num, exact), exact))
        })
        .collect();
    for (c, d) in cases.iter().zip(devs) {
        let at = || serde_json::to_string(c).unwrap_or_default();
        match d {
            Ok((d, exact)) => pairings[4].record(d, exact, at),
            Err(e) => pairings[4].errors.push(format!("{}: {e}", at())),
        }
    }

    let draws = sampling::average_cases(a.seed.wrapping_add(2), a.samples);
    let devs: Vec<brfactor::Result<f64>> = draws.par_iter().map(|(q, r_ex, s)| average_deviation(*q, *r_ex, s)).collect();
    for ((q, r_ex, s), d) in draws.iter().zip(devs) {
        let at = || format!("q={q:e} r_ex={r_ex:e} {}", serde_json::to_string(s).unwrap_or_default());
        match d {
            Ok(d) => pairings[5].record(d, 1.0, at),
            Err(e) => pairings[5].errors.push(format!("{}: {e}", at())),
        }
    }

    let _ = writeln!(
        out,
        "{:<34} {:>6} {:>10} {:>8} {:>5} {:>9}  result",
        "pairing", "cases", "max_dev", "bound", "over", "near_zero"
    );
    for p in &pairings {
        let _ = writeln!(
            out,
            "{:<34} {:>6} {:>10.3e} {:>8.1e} {:>5} {:>9}  {}",
            p.name,
            p.cases,
            p.worst,
            p.bound,
            p.over,
            p.over_near_zero,
            if p.pass() { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(out, "deviations are relative to max(|reference|, {FLOOR:e}); near_zero counts violations with |reference| below that floor");
    let _ = writeln!(out, "closed forms flagged as cancellation-limited, series checked against quadrature: {substituted}");
    for p in pairings.iter().filter(|p| !p.pass()) {
        if p.over > 0 {
            let _ = writeln!(out, "worst {}: {}", p.name, p.worst_at);
        }
        for e in &p.errors {
            let _ = writeln!(out, "error {}: {e}", p.name);
        }
    }
    let all = pairings.iter().all(Pairing::pass);
    let _ = writeln!(out, "result: {}", if all { "pass" } else { "FAIL" });
    print!("{out}");
    Ok(if all { 0 } else { crate::EXIT_FAIL })
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

fn average_deviation(q: f64, r_ex: f64, s: &brfactor::Schedule) -> brfactor::Result<f64> {
    let tol = 1e-11;
    let gate = |t: f64| step(t) * step(r_ex - t);
    let pairs = [
        (finite_avg(AvgKind::SinFinite, q, r_ex, s)?, numeric_time_average(|t| (q * t).sin() * gate(t), s, &[0.0, r_ex], tol)?),
        (finite_avg(AvgKind::CosFinite, q, r_ex, s)?, numeric_time_average(|t| (q * t).cos() * gate(t), s, &[0.0, r_ex], tol)?),
        (infinite_avg(AvgKind::SinInf, q, s)?, numeric_time_average(|t| (q * t).sin() * step(t), s, &[0.0], tol)?),
        (infinite_avg(AvgKind::CosInf, q, s)?, numeric_time_average(|t| (q * t).cos() * step(t), s, &[0.0], tol)?),
    ];
    Ok(pairs.iter().map(|(a, n)| (a - n).abs()).fold(0.0, f64::max))
}
