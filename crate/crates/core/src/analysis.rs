//! Fringe-pattern features: mirror-symmetry axes, diagonal symmetry, the
//! half-level contour of the central lobe and the axial ratio `R`, plus the
//! inversion `R ↦ K`.

use std::f64::consts::SQRT_2;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Method, SourcePhasorMatrix};
use crate::error::{Error, Result};
use crate::interference::{
    intensity_at_point, Diagonal, IntensityMap, Normalization, ScreenGeometry, HALF_LEVEL,
};

/// Mirror axis orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Horizontal axis `y = offset`; mirrors `y`.
    Horizontal,
    /// Vertical axis `x = offset`; mirrors `x`.
    Vertical,
    Diag45,
    Diag135,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Horizontal,
        Orientation::Vertical,
        Orientation::Diag45,
        Orientation::Diag135,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub orientation: Orientation,
    /// Axis displacement from the window centre in metres; 0 for diagonals.
    pub offset: f64,
    /// Mean absolute mirror mismatch divided by the map peak.
    pub residual: f64,
}

/// Default half-width of the axis search: half of the map's half-extent
/// along the mirrored coordinate.
pub fn default_search_halfwidth(map: &IntensityMap, orientation: Orientation) -> f64 {
    match orientation {
        Orientation::Vertical => 0.25 * (map.window.x_max - map.window.x_min),
        _ => 0.25 * (map.window.y_max - map.window.y_min),
    }
}

/// Row-major lines to mirror: rows of the map for a horizontal axis, columns
/// (as rows of a transposed copy) for a vertical one.
struct Lines<'a> {
    data: std::borrow::Cow<'a, [f64]>,
    len: usize,
    count: usize,
}

impl Lines<'_> {
    fn line(&self, i: usize) -> &[f64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    /// Mean `|line(r) − line(2p − r)|` over the `band` integer lines just
    /// below `p`, interpolating the mirrored line linearly.
    fn residual(&self, p: f64, band: usize) -> f64 {
        let first = (p - band as f64).ceil() as usize;
        let mut total = 0.0;
        for r in first..first + band {
            let m = 2.0 * p - r as f64;
            let m0 = (m.floor() as usize).min(self.count - 1);
            let frac = m - m0 as f64;
            let a = self.line(r);
            if frac == 0.0 {
                total += a
                    .iter()
                    .zip(self.line(m0))
                    .map(|(u, v)| (u - v).abs())
                    .sum::<f64>();
            } else {
                let (lo, hi) = (self.line(m0), self.line(m0 + 1));
                total += a
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(u, (l, h))| (u - (l + frac * (h - l))).abs())
                    .sum::<f64>();
            }
        }
        total / (band * self.len) as f64
    }
}

/// Mirror lines, pitch, centre index and comparison band for a search of
/// half-width `search_halfwidth`.
fn search_setup(
    map: &IntensityMap,
    orientation: Orientation,
    search_halfwidth: f64,
) -> Result<(Lines<'_>, f64, f64, i64, usize)> {
    let (lines, pitch) = match orientation {
        Orientation::Horizontal => (
            Lines {
                data: std::borrow::Cow::Borrowed(&map.data),
                len: map.nx,
                count: map.ny,
            },
            map.pitch_y(),
        ),
        Orientation::Vertical => {
            let mut t = vec![0.0; map.data.len()];
            for r in 0..map.ny {
                for q in 0..map.nx {
                    t[q * map.ny + r] = map.get(r, q);
                }
            }
            (
                Lines {
                    data: std::borrow::Cow::Owned(t),
                    len: map.ny,
                    count: map.nx,
                },
                map.pitch_x(),
            )
        }
        Orientation::Diag45 | Orientation::Diag135 => {
            return Err(Error::Validation(
                "axis search supports horizontal and vertical orientations".into(),
            ))
        }
    };

    let centre = 0.5 * (lines.count - 1) as f64;
    if !(search_halfwidth >= 0.0) || search_halfwidth / pitch >= centre {
        return Err(Error::Range(format!(
            "search half-width {search_halfwidth} m reaches the map edge (half-extent {} m)",
            centre * pitch
        )));
    }
    let steps = (2.0 * search_halfwidth / pitch).floor() as i64;
    let band = (centre - 0.5 * steps as f64).floor() as usize;
    if band == 0 {
        return Err(Error::Range("no lines left to compare".into()));
    }

    Ok((lines, pitch, centre, steps, band))
}

/// Finds the horizontal or vertical mirror axis that best explains the map.
///
/// Candidate axes sit on half-pixel positions within `±search_halfwidth` of
/// the centre. Each candidate is scored on the same number of line pairs, so
/// off-centre candidates do not benefit from a shrinking overlap. A coarse
/// pass over every fourth candidate is followed by a dense pass around the
/// best basins and a golden-section search on the interpolated residual.
/// Ties go to the smallest `|offset|`.
pub fn symmetry_axis_offset(
    map: &IntensityMap,
    orientation: Orientation,
    search_halfwidth: f64,
) -> Result<SymmetryReport> {
    let (lines, pitch, centre, steps, band) = search_setup(map, orientation, search_halfwidth)?;
    let peak = map.max();
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let score = |m: i64| lines.residual(centre + 0.5 * m as f64, band) * scale;
    // strict improvement, ties to the smaller |m|
    let better = |a: (i64, f64), b: (i64, f64)| a.1 < b.1 || (a.1 == b.1 && a.0.abs() < b.0.abs());

    const STRIDE: i64 = 4;
    let coarse: Vec<i64> = (-steps / STRIDE..=steps / STRIDE)
        .map(|n| n * STRIDE)
        .collect();
    let coarse_scores: Vec<(i64, f64)> = coarse.par_iter().map(|&m| (m, score(m))).collect();

    let basins: Vec<i64> = (0..coarse_scores.len())
        .filter(|&i| {
            let v = coarse_scores[i].1;
            (i == 0 || coarse_scores[i - 1].1 >= v)
                && (i + 1 == coarse_scores.len() || coarse_scores[i + 1].1 >= v)
        })
        .map(|i| coarse_scores[i].0)
        .collect();

    // the residual is V-shaped and narrower than the coarse stride, so every
    // coarse basin gets a dense look before any is discarded
    let pick = |cands: &mut dyn Iterator<Item = (i64, f64)>| {
        cands
            .fold(None, |acc: Option<(i64, f64)>, c| match acc {
                Some(a) if !better(c, a) => Some(a),
                _ => Some(c),
            })
            .expect("at least one candidate")
    };
    let mut refined: Vec<(i64, f64)> = basins
        .par_iter()
        .map(|&m| {
            let mut around = (m - STRIDE + 1..m + STRIDE)
                .filter(|c| c.abs() <= steps)
                .map(|c| (c, score(c)));
            pick(&mut around)
        })
        .collect();
    refined.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.abs().cmp(&b.0.abs())));
    refined.dedup_by_key(|c| c.0);
    let floor = refined[0].1;
    refined.retain(|c| c.1 <= 10.0 * floor);
    refined.truncate(8);

    let lo_limit = centre - 0.5 * steps as f64;
    let hi_limit = centre + 0.5 * steps as f64;
    let polished: Vec<(f64, f64)> = refined
        .par_iter()
        .map(|&(m, r)| {
            let p = centre + 0.5 * m as f64;
            if r == 0.0 {
                return (p, r);
            }
            let (lo, hi) = ((p - 0.5).max(lo_limit), (p + 0.5).min(hi_limit));
            let (pg, rg) = golden_section(|x| lines.residual(x, band) * scale, lo, hi, 1e-4);
            if rg < r {
                (pg, rg)
            } else {
                (p, r)
            }
        })
        .collect();
    let (p, residual) = polished
        .into_iter()
        .fold(None, |acc: Option<(f64, f64)>, c| match acc {
            Some(a)
                if !(c.1 < a.1 || (c.1 == a.1 && (c.0 - centre).abs() < (a.0 - centre).abs())) =>
            {
                Some(a)
            }
            _ => Some(c),
        })
        .expect("at least one basin");

    let offset = match orientation {
        Orientation::Horizontal => map.window.center().1 + (centre - p) * pitch,
        _ => map.window.center().0 + (p - centre) * pitch,
    };
    Ok(SymmetryReport {
        orientation,
        offset,
        residual,
    })
}

/// Minimises `f` on `[lo, hi]` to within `tol`; returns the best point seen.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Residual of the mirror axis at `offset`, scored on the same band a search
/// of half-width `search_halfwidth` would use.
pub fn mirror_residual(
    map: &IntensityMap,
    orientation: Orientation,
    offset: f64,
    search_halfwidth: f64,
) -> Result<f64> {
    let (lines, pitch, centre, steps, band) = search_setup(map, orientation, search_halfwidth)?;
    let shift = match orientation {
        Orientation::Horizontal => (map.window.center().1 - offset) / pitch,
        _ => (offset - map.window.center().0) / pitch,
    };
    if shift.abs() > 0.5 * steps as f64 {
        return Err(Error::Range(format!(
            "offset {offset} m lies outside the search range"
        )));
    }
    let peak = map.max();
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    Ok(lines.residual(centre + shift, band) * scale)
}

/// Mean `|I − I_mirror|` over the whole map divided by its peak, mirroring
/// across a diagonal through the origin.
pub fn diagonal_symmetry_error(map: &IntensityMap, diagonal: Diagonal) -> Result<f64> {
    let n = map.nx;
    let w = map.window;
    let half = 0.5 * (w.x_max - w.x_min);
    let tol = 1e-9 * half;
    if map.ny != n
        || ((w.y_max - w.y_min) - (w.x_max - w.x_min)).abs() > tol
        || w.center().0.abs() > tol
        || w.center().1.abs() > tol
    {
        return Err(Error::Shape(
            "diagonal symmetry needs a square grid on a square window centred at the origin".into(),
        ));
    }
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|r| {
            (0..n)
                .map(|q| {
                    let mirror = match diagonal {
                        Diagonal::Diag45 => map.get(n - 1 - q, n - 1 - r),
                        Diagonal::Diag135 => map.get(q, r),
                    };
                    (map.get(r, q) - mirror).abs()
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let peak = map.max();
    let mean = total / (n * n) as f64;
    Ok(if peak > 0.0 { mean / peak } else { mean })
}

/// Symmetry reports for all four orientations, searching the default
/// half-width for the horizontal and vertical axes.
pub fn symmetry_reports(map: &IntensityMap) -> Result<Vec<SymmetryReport>> {
    Orientation::ALL
        .iter()
        .map(|&o| match o {
            Orientation::Horizontal | Orientation::Vertical => {
                symmetry_axis_offset(map, o, default_search_halfwidth(map, o))
            }
            Orientation::Diag45 => Ok(SymmetryReport {
                orientation: o,
                offset: 0.0,
                residual: diagonal_symmetry_error(map, Diagonal::Diag45)?,
            }),
            Orientation::Diag135 => Ok(SymmetryReport {
                orientation: o,
                offset: 0.0,
                residual: diagonal_symmetry_error(map, Diagonal::Diag135)?,
            }),
        })
        .collect()
}

/// Sampling of the diagonal rays used to locate contour crossings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalScan {
    /// Distance between samples along the ray, metres.
    pub step: f64,
    /// Largest distance from the centre to scan, metres.
    pub z_max: f64,
}

impl DiagonalScan {
    /// Quarter-pixel steps of the 1501² analysis grid over ±0.03 m, out to
    /// the window corner.
    pub fn analysis() -> Self {
        Self {
            step: 0.06 / 1501.0 / 4.0,
            z_max: 0.03 * SQRT_2,
        }
    }
}

impl Default for DiagonalScan {
    fn default() -> Self {
        Self::analysis()
    }
}

/// Contour half-lengths along each diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalLengths {
    pub diag45: f64,
    pub diag135: f64,
}

impl DiagonalLengths {
    pub fn major(&self) -> f64 {
        self.diag45.max(self.diag135)
    }

    pub fn minor(&self) -> f64 {
        self.diag45.min(self.diag135)
    }

    pub fn major_diagonal(&self) -> Diagonal {
        if self.diag135 > self.diag45 {
            Diagonal::Diag135
        } else {
            Diagonal::Diag45
        }
    }
}

/// First downward crossing of `level` by `f` sampled at `step` out to
/// `z_max`, linearly interpolated.
fn first_crossing(f: impl Fn(f64) -> f64, level: f64, step: f64, z_max: f64) -> Option<f64> {
    let mut prev = f(0.0);
    let n = (z_max / step).floor() as usize;
    for i in 1..=n {
        let z = i as f64 * step;
        let v = f(z);
        if v <= level {
            let frac = if prev > v {
                (prev - level) / (prev - v)
            } else {
                1.0
            };
            return Some(z - step + frac * step);
        }
        prev = v;
    }
    None
}

/// Half-lengths of the `level` contour along both diagonals, from the exact
/// field. Each diagonal is scanned in both directions and the two crossings
/// averaged.
pub fn diagonal_half_lengths(
    s: &SourcePhasorMatrix,
    g: &ScreenGeometry,
    level: f64,
    scan: &DiagonalScan,
) -> Result<DiagonalLengths> {
    if !(scan.step > 0.0 && scan.z_max > scan.step) {
        return Err(Error::Validation(format!("invalid diagonal scan {scan:?}")));
    }
    let intensity = |x: f64, y: f64| intensity_at_point(s, g, x, y, Normalization::UnitBound);
    let center = intensity(0.0, 0.0);
    if !(center > level) {
        return Err(Error::DegenerateContour { center, level });
    }
    let measure = |d: Diagonal| -> Result<f64> {
        let (dx, dy) = d.direction();
        let mut sum = 0.0;
        for sign in [1.0, -1.0] {
            let z = first_crossing(
                |z| intensity(sign * z * dx, sign * z * dy),
                level,
                scan.step,
                scan.z_max,
            )
            .ok_or(Error::WindowTooSmall {
                diagonal: d.name(),
                z_max: scan.z_max,
            })?;
            sum += z;
        }
        Ok(0.5 * sum)
    };
    Ok(DiagonalLengths {
        diag45: measure(Diagonal::Diag45)?,
        diag135: measure(Diagonal::Diag135)?,
    })
}

/// `(z_major, z_minor)` of the `level` contour along the diagonals.
pub fn diagonal_axis_lengths(
    s: &SourcePhasorMatrix,
    g: &ScreenGeometry,
    level: f64,
    scan: &DiagonalScan,
) -> Result<(f64, f64)> {
    let l = diagonal_half_lengths(s, g, level, scan)?;
    Ok((l.major(), l.minor()))
}

/// Contour half-lengths measured on a rendered map by bilinear sampling
/// along the diagonals at quarter-pixel steps.
pub fn map_diagonal_half_lengths(map: &IntensityMap, level: f64) -> Result<DiagonalLengths> {
    let (cx, cy) = map.window.center();
    let center = map
        .sample(cx, cy)
        .ok_or_else(|| Error::Shape("map centre is not sampled".into()))?;
    if !(center > level) {
        return Err(Error::DegenerateContour { center, level });
    }
    let step = 0.25 * map.pitch_x().min(map.pitch_y());
    let z_max = 0.5
        * (map.window.x_max - map.window.x_min).max(map.window.y_max - map.window.y_min)
        * SQRT_2;
    let measure = |d: Diagonal| -> Result<f64> {
        let (dx, dy) = d.direction();
        let mut sum = 0.0;
        for sign in [1.0, -1.0] {
            let f = |z: f64| {
                map.sample(cx + sign * z * dx, cy + sign * z * dy)
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let z = first_crossing(f, level, step, z_max)
                .filter(|z| map.sample(cx + sign * z * dx, cy + sign * z * dy).is_some())
                .ok_or(Error::WindowTooSmall {
                    diagonal: d.name(),
                    z_max,
                })?;
            sum += z;
        }
        Ok(0.5 * sum)
    };
    Ok(DiagonalLengths {
        diag45: measure(Diagonal::Diag45)?,
        diag135: measure(Diagonal::Diag135)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxialRatioResult {
    pub z_major: f64,
    pub z_minor: f64,
    pub r: f64,
    pub k_estimate: f64,
    pub level: f64,
    /// Ratio beyond the invertible range; `k_estimate` is the cap.
    pub saturated: bool,
    pub major_diagonal: Diagonal,
}

/// Measures the axial ratio of the half-level contour of θ = π/4
/// amplitude-method sources and inverts it to a Schmidt number.
pub fn axial_ratio_numeric(s: &SourcePhasorMatrix, g: &ScreenGeometry) -> Result<AxialRatioResult> {
    axial_ratio_numeric_with(s, g, HALF_LEVEL, &DiagonalScan::analysis())
}

pub fn axial_ratio_numeric_with(
    s: &SourcePhasorMatrix,
    g: &ScreenGeometry,
    level: f64,
    scan: &DiagonalScan,
) -> Result<AxialRatioResult> {
    if s.method != Method::Amplitude {
        return Err(Error::MethodMismatch {
            expected: Method::Amplitude.as_str(),
            found: s.method.as_str(),
        });
    }
    let [n1, n2] = s.row_norms();
    if (n1 - n2).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "axial ratio needs θ = π/4 sources, row norms are {n1} and {n2}"
        )));
    }
    let lengths = diagonal_half_lengths(s, g, level, scan)?;
    let r = lengths.major() / lengths.minor();
    let inv = invert_ratio_to_k(r)?;
    Ok(AxialRatioResult {
        z_major: lengths.major(),
        z_minor: lengths.minor(),
        r,
        k_estimate: inv.k,
        level,
        saturated: inv.saturated,
        major_diagonal: lengths.major_diagonal(),
    })
}

/// Closed-form axial ratio of the half-level contour as a function of the
/// Schmidt number,
///
/// ```text
/// R = arccos((√2 − √(1+K′)) / √(1−K′)) / arccos((√2 − √(1−K′)) / √(1+K′)),
/// K′ = √(2 − 2/K),
/// ```
///
/// evaluated in a rearranged form that stays accurate as `K → 2`.
///
/// ```
/// use fringelab::analysis::axial_ratio_analytic;
/// assert_eq!(axial_ratio_analytic(1.0).unwrap(), 1.0);
/// assert!((axial_ratio_analytic(1.2).unwrap() - 1.445).abs() < 1e-3);
/// assert!(axial_ratio_analytic(2.0).is_err());
/// ```
pub fn axial_ratio_analytic(k: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&k) {
        return Err(Error::Domain(format!(
            "axial ratio is defined for K in [1, 2), got {k}"
        )));
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    let kp = (2.0 - 2.0 / k).sqrt();
    let one_minus = (2.0 - k) / k / (1.0 + kp);
    let w = one_minus.sqrt();
    let v = (1.0 + kp).sqrt();
    let numerator = (w / (SQRT_2 + v)).acos();
    // arccos(x) = 2 arcsin(√((1 − x)/2)) with 1 − x expanded to avoid cancellation
    let one_minus_x = w * (1.0 - w / (v + SQRT_2)) / v;
    let denominator = 2.0 * (0.5 * one_minus_x).sqrt().asin();
    Ok(numerator / denominator)
}

/// Upper end of the inversion bracket.
pub const K_CAP: f64 = 2.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    pub k: f64,
    pub saturated: bool,
}

fn check_monotone() -> Result<()> {
    static CHECK: OnceLock<Option<f64>> = OnceLock::new();
    let failure = CHECK.get_or_init(|| {
        const N: usize = 4000;
        let mut prev = 1.0;
        for i in 1..=N {
            let k = 1.0 + (K_CAP - 1.0) * i as f64 / N as f64;
            let r = axial_ratio_analytic(k).ok()?;
            if !(r > prev) {
                return Some(k);
            }
            prev = r;
        }
        None
    });
    match failure {
        Some(k) => Err(Error::NotMonotone(*k)),
        None => Ok(()),
    }
}

/// Schmidt number whose analytic axial ratio equals `r`, by bisection.
///
/// Ratios within 1e−6 of 1 map to `K = 1`; ratios beyond `R(K_CAP)` return
/// `K_CAP` flagged as saturated.
pub fn invert_ratio_to_k(r: f64) -> Result<Inversion> {
    if !(r >= 1.0) {
        return Err(Error::Domain(format!(
            "axial ratio must be at least 1, got {r}"
        )));
    }
    check_monotone()?;
    if r <= 1.0 + 1e-6 {
        return Ok(Inversion {
            k: 1.0,
            saturated: false,
        });
    }
    if r >= axial_ratio_analytic(K_CAP)? {
        return Ok(Inversion {
            k: K_CAP,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (1.0, K_CAP);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if axial_ratio_analytic(mid)? < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Inversion {
        k: 0.5 * (lo + hi),
        saturated: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub k: f64,
    pub r_analytic: f64,
    pub r_numeric: Option<f64>,
}

/// Analytic and (optionally) measured axial ratio for canonical states.
pub fn r_curve(k_values: &[f64], g: &ScreenGeometry, numeric: bool) -> Result<Vec<CurveRow>> {
    k_values
        .iter()
        .map(|&k| {
            if !(k > 1.0 && k < 2.0) {
                return Err(Error::Domain(format!(
                    "curve K values must lie in (1, 2), got {k}"
                )));
            }
            let r_analytic = axial_ratio_analytic(k)?;
            let r_numeric = if numeric {
                let st = crate::beam::canonical_state_for_k(k)?;
                let s = crate::decomposition::amplitude_method_sources(&st);
                Some(axial_ratio_numeric(&s, g)?.r)
            } else {
                None
            };
            Ok(CurveRow {
                k,
                r_analytic,
                r_numeric,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::canonical_state_for_k;
    use crate::decomposition::amplitude_method_sources;
    use crate::interference::{render_map, Window};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// The formula exactly as printed, as an oracle away from K = 2.
    fn literal_ratio(k: f64) -> f64 {
        let kp = (2.0 - 2.0 / k).sqrt();
        ((SQRT_2 - (1.0 + kp).sqrt()) / (1.0 - kp).sqrt()).acos()
            / ((SQRT_2 - (1.0 - kp).sqrt()) / (1.0 + kp).sqrt()).acos()
    }

    fn map_from(f: impl Fn(f64, f64) -> f64, half: f64, n: usize) -> IntensityMap {
        let mut m = IntensityMap::from_data(
            Window::centered(half),
            n,
            n,
            vec![0.0; n * n],
            Normalization::UnitBound,
        )
        .unwrap();
        for r in 0..n {
            for q in 0..n {
                m.data[r * n + q] = f(m.x(q), m.y(r));
            }
        }
        m
    }

    #[test]
    fn analytic_ratio_oracles() {
        // 30-digit references
        for (k, r) in [
            (1.2, 1.445_141_111_761_54),
            (1.8, 2.615_885_118_946_14),
            (1.5, 1.885_910_920),
            (1.9, 3.202_408_095),
        ] {
            assert!(close(axial_ratio_analytic(k).unwrap(), r, 1e-9), "{k}");
        }
        assert_eq!(axial_ratio_analytic(1.0).unwrap(), 1.0);
        assert!(close(
            axial_ratio_analytic(1.0001).unwrap(),
            1.007_989_94,
            1e-8
        ));
        for bad in [2.0, 2.5, 0.9, f64::NAN] {
            assert!(matches!(axial_ratio_analytic(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(invert_ratio_to_k(1.0).unwrap().k, 1.0);
        assert!(close(invert_ratio_to_k(1.445).unwrap().k, 1.2, 1e-3));
        assert!(close(invert_ratio_to_k(2.609).unwrap().k, 1.8, 1e-2));
        assert!(close(
            invert_ratio_to_k(2.615_885_118_946_14).unwrap().k,
            1.8,
            1e-9
        ));
        let capped = invert_ratio_to_k(1e6).unwrap();
        assert!(capped.saturated);
        assert_eq!(capped.k, K_CAP);
        assert!(matches!(invert_ratio_to_k(0.99), Err(Error::Domain(_))));
        assert!(invert_ratio_to_k(f64::NAN).is_err());
    }

    #[test]
    fn inversion_round_trip_grid() {
        for i in 0..50 {
            let k = 1.0 + 0.99 * i as f64 / 49.0;
            let back = invert_ratio_to_k(axial_ratio_analytic(k).unwrap())
                .unwrap()
                .k;
            assert!(close(back, k, 1e-5), "{k} → {back}");
        }
    }

    #[test]
    fn exact_scan_matches_central_model_at_k12() {
        let g = ScreenGeometry::default();
        let s = amplitude_method_sources(&canonical_state_for_k(1.2).unwrap());
        let l = diagonal_half_lengths(&s, &g, 2.0, &DiagonalScan::analysis()).unwrap();
        assert_eq!(l.major_diagonal(), Diagonal::Diag135);
        assert!(close(l.major(), 0.005_368_380_071_958_764, 2e-5));
        assert!(close(l.major() / l.minor(), 1.445, 0.05 * 1.445));
    }

    #[test]
    fn separable_contour_is_round() {
        let g = ScreenGeometry::default();
        let s = amplitude_method_sources(&canonical_state_for_k(1.0).unwrap());
        let res = axial_ratio_numeric(&s, &g).unwrap();
        assert!(close(res.r, 1.0, 0.01));
        assert!(close(res.k_estimate, 1.0, 0.01));
    }

    #[test]
    fn degenerate_and_window_errors() {
        let g = ScreenGeometry::default();
        let s = amplitude_method_sources(&canonical_state_for_k(2.0).unwrap());
        assert!(matches!(
            axial_ratio_numeric(&s, &g),
            Err(Error::DegenerateContour { .. })
        ));
        let s = amplitude_method_sources(&canonical_state_for_k(1.4).unwrap());
        let tiny = DiagonalScan {
            step: 1e-5,
            z_max: 1e-3,
        };
        assert!(matches!(
            diagonal_axis_lengths(&s, &g, 2.0, &tiny),
            Err(Error::WindowTooSmall { .. })
        ));
        let phase =
            crate::decomposition::phase_method_sources(&canonical_state_for_k(1.4).unwrap());
        assert!(matches!(
            axial_ratio_numeric(&phase, &g),
            Err(Error::MethodMismatch { .. })
        ));
    }

    #[test]
    fn map_based_lengths_agree_with_exact_scan() {
        let g = ScreenGeometry::default();
        let s = amplitude_method_sources(&canonical_state_for_k(1.4).unwrap());
        let map = render_map(
            &s,
            &g,
            Window::centered(0.015),
            401,
            401,
            Normalization::UnitBound,
        )
        .unwrap();
        let from_map = map_diagonal_half_lengths(&map, 2.0).unwrap();
        let exact = diagonal_half_lengths(&s, &g, 2.0, &DiagonalScan::analysis()).unwrap();
        assert!(close(from_map.diag45, exact.diag45, 2.0 * map.pitch_x()));
        assert!(close(from_map.diag135, exact.diag135, 2.0 * map.pitch_x()));
    }

    #[test]
    fn uniform_map_ties_to_zero_offset() {
        let m = map_from(|_, _| 3.0, 1.0, 41);
        for o in [Orientation::Horizontal, Orientation::Vertical] {
            let rep = symmetry_axis_offset(&m, o, 0.5).unwrap();
            assert_eq!(rep.offset, 0.0);
            assert_eq!(rep.residual, 0.0);
        }
    }

    #[test]
    fn finds_shifted_axes() {
        let n = 201;
        let half = 1.0;
        let pitch = 2.0 * half / n as f64;
        // symmetric about y = 7.5 pixels and x = −3.25 pixels
        let y0 = 7.5 * pitch;
        let x0 = -3.25 * pitch;
        let m = map_from(
            |x, y| 1.0 + (-(y - y0).powi(2) * 8.0).exp() * (1.0 + 0.3 * (x - x0).powi(2)),
            half,
            n,
        );
        let h = symmetry_axis_offset(&m, Orientation::Horizontal, 0.5).unwrap();
        assert!(close(h.offset, y0, 1e-3 * pitch), "{} vs {}", h.offset, y0);
        assert!(h.residual < 1e-12);
        let v = symmetry_axis_offset(&m, Orientation::Vertical, 0.5).unwrap();
        assert!(close(v.offset, x0, 0.05 * pitch), "{} vs {}", v.offset, x0);
        assert!(v.residual < 1e-5);
    }

    #[test]
    fn search_range_errors() {
        let m = map_from(|x, _| x * x, 1.0, 21);
        assert!(matches!(
            symmetry_axis_offset(&m, Orientation::Horizontal, 1.0),
            Err(Error::Range(_))
        ));
        assert!(symmetry_axis_offset(&m, Orientation::Diag45, 0.1).is_err());
    }

    #[test]
    fn diagonal_symmetry_checks() {
        let m = map_from(|x, y| 1.0 + (x - y).powi(2) + 0.1 * x * y, 1.0, 31);
        assert!(diagonal_symmetry_error(&m, Diagonal::Diag45).unwrap() < 1e-15);
        assert!(diagonal_symmetry_error(&m, Diagonal::Diag135).unwrap() < 1e-15);
        let m = map_from(|x, y| 2.0 + x + 0.5 * y, 1.0, 31);
        assert!(diagonal_symmetry_error(&m, Diagonal::Diag45).unwrap() > 1e-3);
        let m = map_from(|x, y| 2.0 - x - y, 1.0, 31);
        assert!(diagonal_symmetry_error(&m, Diagonal::Diag45).unwrap() < 1e-15);
        assert!(diagonal_symmetry_error(&m, Diagonal::Diag135).unwrap() > 1e-3);

        let rect = IntensityMap::from_data(
            Window {
                x_min: -1.0,
                x_max: 1.0,
                y_min: -0.5,
                y_max: 0.5,
            },
            10,
            10,
            vec![1.0; 100],
            Normalization::RawE0,
        )
        .unwrap();
        assert!(matches!(
            diagonal_symmetry_error(&rect, Diagonal::Diag45),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn curve_rows() {
        let g = ScreenGeometry::default();
        assert!(r_curve(&[], &g, true).unwrap().is_empty());
        let rows = r_curve(&[1.0001], &g, true).unwrap();
        assert!(close(rows[0].r_numeric.unwrap(), 1.0, 0.02));
        assert!(r_curve(&[2.0], &g, false).is_err());
        assert_eq!(r_curve(&[1.3], &g, false).unwrap()[0].r_numeric, None);
    }

    proptest! {
        #[test]
        fn stable_form_matches_literal(k in 1.0001..1.999f64) {
            let a = axial_ratio_analytic(k).unwrap();
            let b = literal_ratio(k);
            prop_assert!((a - b).abs() <= 1e-7 * b);
        }

        #[test]
        fn ratio_strictly_increasing(k in 1.0..1.999f64, dk in 1e-6..1e-3f64) {
            prop_assert!(axial_ratio_analytic(k + dk).unwrap() > axial_ratio_analytic(k).unwrap());
        }

        #[test]
        fn inversion_round_trip(k in 1.0..1.9999f64) {
            let back = invert_ratio_to_k(axial_ratio_analytic(k).unwrap()).unwrap();
            prop_assert!((back.k - k).abs() < 1e-5);
        }
    }
}
