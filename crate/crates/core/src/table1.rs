//! The sixteen reference values and the four-significant-digit comparison.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::Result;
use crate::model::{reverse, FactorKind, Method, RegionPair, SeriesConfig};
use crate::oracle::QuadConfig;

/// One reference row. `mantissa` and `exponent` are the printed fields,
/// e.g. `"-6.407"` and `-2` for −6.407×10⁻².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub kind: FactorKind,
    pub params: RegionPair,
    pub mantissa: &'static str,
    pub exponent: i32,
    pub is_reverse_of_previous: bool,
}

impl Table1Row {
    pub fn expected(&self) -> f64 {
        format!("{}e{}", self.mantissa, self.exponent).parse().expect("embedded mantissa parses")
    }
}

struct Printed {
    kind: FactorKind,
    mantissa: &'static str,
    exponent: i32,
}

const fn printed(kind: FactorKind, mantissa: &'static str, exponent: i32) -> Printed {
    Printed { kind, mantissa, exponent }
}

/// Forward rows carry their own parameters; `None` marks a reverse row.
fn layout() -> Vec<(Printed, Option<RegionPair>)> {
    use FactorKind::*;
    let c = |r1, r2, dt1, dt2, t| Some(RegionPair::concentric(r1, r2, dt1, dt2, t));
    let off = |r1, r2, dt1, dt2| {
        Some(RegionPair { r1, r2, r: 1.0, theta: PI / 6.0, phi: PI / 3.0, dt1, dt2, t_offset: 0.5 })
    };
    vec![
        (printed(Axx, "-1.625", 0), c(1.0, 1.0, 1.0, 1.0, 0.0)),
        (printed(Axx, "-2.850", -3), c(10.0, 10.0, 1.0, 1.0, 0.0)),
        (printed(Axx, "1.953", -1), c(1.0, 1.0, 1.0, 2.0, 0.5)),
        (printed(Axx, "-5.664", -1), None),
        (printed(Axx, "-6.407", -2), off(1.0, 1.0, 1.0, 1.0)),
        (printed(Axx, "-4.530", -1), None),
        (printed(Axy, "6.636", -2), off(1.0, 1.0, 1.0, 1.0)),
        (printed(Axy, "5.901", -3), None),
        (printed(Bxy, "-2.730", -1), off(1.0, 1.0, 1.0, 1.0)),
        (printed(Bxy, "1.675", -1), None),
        (printed(Axx, "7.454", -2), off(1.0, 2.0, 1.0, 2.0)),
        (printed(Axx, "-8.914", -2), None),
        (printed(Axy, "3.493", -3), off(1.0, 2.0, 1.0, 2.0)),
        (printed(Axy, "-3.884", -4), None),
        (printed(Bxy, "-2.560", -2), off(1.0, 2.0, 1.0, 2.0)),
        (printed(Bxy, "4.126", -3), None),
    ]
}

/// All sixteen rows; reverse rows are derived from the preceding row.
pub fn rows() -> Vec<Table1Row> {
    let mut out: Vec<Table1Row> = Vec::with_capacity(16);
    for (p, params) in layout() {
        let (params, is_reverse) = match params {
            Some(params) => (params, false),
            None => {
                let prev = out.last().expect("a reverse row follows a forward row").params;
                (reverse(prev).expect("embedded rows are valid"), true)
            }
        };
        out.push(Table1Row {
            kind: p.kind,
            params,
            mantissa: p.mantissa,
            exponent: p.exponent,
            is_reverse_of_previous: is_reverse,
        });
    }
    out
}

/// Round to four significant digits, ties to even, on the exact binary
/// value. Returns the mantissa text (`"-6.407"`) and the decimal exponent.
pub fn round_sig4(x: f64) -> (String, i32) {
    if x == 0.0 || !x.is_finite() {
        return (if x.is_finite() { "0.000".into() } else { format!("{x}") }, 0);
    }
    // 60 digits is exact enough to decide every tie that can occur at the
    // fourth digit of a double
    let text = format!("{:.60e}", x.abs());
    let (digits, exp) = text.split_once('e').expect("scientific format");
    let mut exponent: i32 = exp.parse().expect("exponent");
    let digits: Vec<u8> = digits.bytes().filter(|b| b.is_ascii_digit()).map(|b| b - b'0').collect();
    let mut kept: u32 = digits[..4].iter().fold(0, |acc, &d| acc * 10 + d as u32);
    let rest = &digits[4..];
    let round_up = match rest[0].cmp(&5) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => rest[1..].iter().any(|&d| d != 0) || kept % 2 == 1,
    };
    if round_up {
        kept += 1;
        if kept == 10_000 {
            kept = 1000;
            exponent += 1;
        }
    }
    let sign = if x < 0.0 { "-" } else { "" };
    (format!("{sign}{}.{:03}", kept / 1000, kept % 1000), exponent)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub index: usize,
    pub kind: FactorKind,
    pub params: RegionPair,
    pub expected: f64,
    pub printed: String,
    pub value: f64,
    pub rounded: String,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub terms_used: usize,
    pub converged: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub method: Method,
    pub rows: Vec<RowReport>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    /// Aligned plain-text table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method: {}", self.method);
        let _ = writeln!(
            out,
            "{:>3}  {:<4} {:>5} {:>5} {:>4} {:>6} {:>6} {:>5} {:>5} {:>5}  {:>12}  {:>12}  {:>24}  {:>9}  {:>6}  result",
            "row", "kind", "R1", "R2", "R", "theta", "phi", "dt1", "dt2", "T", "paper", "computed", "value", "rel_dev", "terms"
        );
        for r in &self.rows {
            let p = &r.params;
            let _ = writeln!(
                out,
                "{:>3}  {:<4} {:>5} {:>5} {:>4} {:>6} {:>6} {:>5} {:>5} {:>5}  {:>12}  {:>12}  {:>24.16e}  {:>9.2e}  {:>6}  {}",
                r.index,
                r.kind,
                p.r1,
                p.r2,
                p.r,
                pi_fraction(p.theta, p.r),
                pi_fraction(p.phi, p.r),
                p.dt1,
                p.dt2,
                p.t_offset,
                r.printed,
                r.rounded,
                r.value,
                r.rel_dev,
                r.terms_used,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "{}/{} rows pass", self.passed(), self.rows.len());
        out
    }
}

fn pi_fraction(angle: f64, r: f64) -> String {
    if r == 0.0 {
        return "-".into();
    }
    for den in 1..=12u32 {
        let num = angle / PI * den as f64;
        if (num - num.round()).abs() < 1e-9 {
            let n = num.round() as i64;
            return match (n, den) {
                (0, _) => "0".into(),
                (1, 1) => "pi".into(),
                (1, d) => format!("pi/{d}"),
                (n, 1) => format!("{n}pi"),
                (n, d) => format!("{n}pi/{d}"),
            };
        }
    }
    format!("{angle:.4}")
}

fn format_printed(mantissa: &str, exponent: i32) -> String {
    format!("{mantissa}e{exponent:+}")
}

/// Evaluate every row with `method` and compare at four digits.
pub fn run(method: Method, series: &SeriesConfig, quad: &QuadConfig) -> Result<RunReport> {
    let mut reports = Vec::with_capacity(16);
    for (i, row) in rows().into_iter().enumerate() {
        let res = crate::evaluate(row.kind, &row.params, method, series, quad)?;
        let expected = row.expected();
        let (m, e) = round_sig4(res.value);
        let pass = m == row.mantissa && e == row.exponent;
        reports.push(RowReport {
            index: i + 1,
            kind: row.kind,
            params: row.params,
            expected,
            printed: format_printed(row.mantissa, row.exponent),
            value: res.value,
            rounded: format_printed(&m, e),
            abs_dev: (res.value - expected).abs(),
            rel_dev: ((res.value - expected) / expected).abs(),
            terms_used: res.terms_used,
            converged: res.converged,
            pass,
        });
    }
    Ok(RunReport { method, rows: reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig4(-0.064074925), ("-6.407".into(), -2));
        assert_eq!(round_sig4(1.0), ("1.000".into(), 0));
        assert_eq!(round_sig4(9.99951), ("1.000".into(), 1));
        // exact binary ties
        assert_eq!(round_sig4(1.0625), ("1.062".into(), 0));
        assert_eq!(round_sig4(0.0), ("0.000".into(), 0));
    }

    #[test]
    fn ties_to_even() {
        assert_eq!(round_sig4(1.1875), ("1.188".into(), 0));
        assert_eq!(round_sig4(-1.0625), ("-1.062".into(), 0));
        assert_eq!(round_sig4(1.03125), ("1.031".into(), 0));
        assert_eq!(round_sig4(1.09375), ("1.094".into(), 0));
    }

    #[test]
    fn reverse_rows_follow_forward_rows() {
        let rows = rows();
        assert_eq!(rows.len(), 16);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.is_reverse_of_previous, i % 2 == 1 && i >= 3, "row {}", i + 1);
        }
        let r4 = rows[3].params;
        assert_eq!((r4.dt1, r4.dt2, r4.t_offset), (2.0, 1.0, -0.5));
        assert!((rows[5].params.theta - 5.0 * PI / 6.0).abs() < 1e-15);
        assert!((rows[5].params.phi - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_run_passes() {
        let report = run(Method::ClosedForm, &SeriesConfig::default(), &QuadConfig::default()).unwrap();
        assert!(report.all_pass(), "{}", report.render());
    }
}
