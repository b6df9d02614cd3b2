//! `START:STOP:STEP` time grids with optional `pi` multiples, e.g.
//! `0:10pi:pi/20`.

use std::f64::consts::PI;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { start: 0.0, stop: 10.0 * PI, step: PI / 20.0 }
    }
}

/// Parses `a`, `pi`, `a*pi`, `a pi`, `api`, optionally followed by `/b`.
pub fn parse_value(text: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim().to_string(), d.trim().parse::<f64>().ok()?),
        None => (t, 1.0),
    };
    let coef = match num.strip_suffix("pi").or_else(|| num.strip_suffix('π')) {
        Some(c) => {
            let c = c.trim().trim_end_matches('*').trim();
            match c {
                "" => PI,
                "-" => -PI,
                _ => c.parse::<f64>().ok()? * PI,
            }
        }
        None => num.parse::<f64>().ok()?,
    };
    let v = coef / den;
    v.is_finite().then_some(v)
}

pub fn parse_grid(text: &str) -> Result<GridSpec, CliError> {
    let bad = || CliError::Input(format!("bad grid {text:?}, expected START:STOP:STEP"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, c] = parts[..] else { return Err(bad()) };
    Ok(GridSpec {
        start: parse_value(a).ok_or_else(bad)?,
        stop: parse_value(b).ok_or_else(bad)?,
        step: parse_value(c).ok_or_else(bad)?,
    })
}
