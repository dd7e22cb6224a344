//! Angle helpers: principal-range reduction and parsing of `5pi/21`-style
//! literals.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let r = wrap_two_pi(angle);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Parses an angle in radians.
///
/// Accepts plain floats (`0.4773`, `-1e-3`) and rational multiples of π:
/// `pi`, `-pi/2`, `5pi/21`, `5*pi/21`, `0.25pi`, `pi/4.0`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Validation(format!("cannot parse angle `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        let v: f64 = lower.parse().map_err(|_| bad())?;
        return finite(v).ok_or_else(bad);
    };

    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match tail {
        "" => 1.0,
        t => {
            let d = t.strip_prefix('/').ok_or_else(bad)?;
            d.parse::<f64>().map_err(|_| bad())?
        }
    };
    if denom == 0.0 {
        return Err(bad());
    }
    finite(coef * PI / denom).ok_or_else(bad)
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}
