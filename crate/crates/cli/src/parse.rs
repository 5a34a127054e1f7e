//! Angle and grid syntax shared by the subcommands.

use std::f64::consts::PI;

/// A number, or a rational multiple of π: `0.5`, `pi`, `2pi`, `1/6pi`,
/// `pi/6`, `-1/3pi`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || format!("cannot read angle '{text}'");
    if let Some(den) = t.strip_prefix("pi/") {
        return parse_rational(den).map(|d| PI / d).ok_or_else(bad);
    }
    if let Some(den) = t.strip_prefix("-pi/") {
        return parse_rational(den).map(|d| -PI / d).ok_or_else(bad);
    }
    if let Some(coef) = t.strip_suffix("pi").or_else(|| t.strip_suffix("π")) {
        let coef = coef.trim().trim_end_matches('*');
        let c = match coef {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            c => parse_rational(c),
        };
        return c.map(|c| c * PI).ok_or_else(bad);
    }
    parse_rational(&t).ok_or_else(bad)
}

fn parse_rational(t: &str) -> Option<f64> {
    let v = match t.split_once('/') {
        Some((n, d)) => n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?,
        None => t.trim().parse().ok()?,
    };
    v.is_finite().then_some(v)
}

/// Plain number; angles use [`parse_angle`].
pub fn parse_number(text: &str) -> Result<f64, String> {
    parse_rational(text).ok_or_else(|| format!("cannot read number '{text}'"))
}

/// One swept axis: a single value or `start:stop:count`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

impl Axis {
    pub fn parse(text: &str, angle: bool) -> Result<Axis, String> {
        let value = |s: &str| if angle { parse_angle(s) } else { parse_number(s) };
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Axis(vec![value(v)?])),
            [a, b, n] => {
                let (a, b) = (value(a)?, value(b)?);
                let n: usize = n.trim().parse().map_err(|_| format!("bad point count in '{text}'"))?;
                match n {
                    0 => Err(format!("grid '{text}' has no points")),
                    1 => Ok(Axis(vec![a])),
                    n => Ok(Axis((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())),
                }
            }
            _ => Err(format!("expected VALUE or START:STOP:COUNT, got '{text}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("1/6pi").unwrap(), PI / 6.0);
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-1/3pi").unwrap(), -PI / 3.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("1/0pi").is_err());
    }

    #[test]
    fn axes() {
        assert_eq!(Axis::parse("2", false).unwrap(), Axis(vec![2.0]));
        assert_eq!(Axis::parse("0:1:3", false).unwrap(), Axis(vec![0.0, 0.5, 1.0]));
        assert_eq!(Axis::parse("0:pi:2", true).unwrap(), Axis(vec![0.0, PI]));
        assert!(Axis::parse("0:1:0", false).is_err());
        assert!(Axis::parse("0:1", false).is_err());
    }
}
