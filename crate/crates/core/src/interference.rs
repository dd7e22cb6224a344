//! Four point sources behind a barrier and the intensity they paint on a
//! screen at distance `b`.
//!
//! Source `(i, j)` (1-based) sits at `(−(−1)^j a, −(−1)^i a)`: rows index the
//! vertical position (row 1 at `y = +a`), columns the horizontal one
//! (column 1 at `x = +a`). The exact field is
//!
//! ```text
//! E(x, y) = E0 Σ S_ij exp(i k r_ij) / r_ij,
//! r_ij = √((x + (−1)^j a)² + (y + (−1)^i a)² + b²)
//! ```
//!
//! Near the centre of the screen and along the two diagonals the intensity
//! of the θ = π/4 amplitude-method family reduces to a closed form in
//! `t(z) = √2 a k z / √(z² + b² + 2a²)`, implemented by
//! [`central_diagonal_intensity`].

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::SourcePhasorMatrix;
use crate::error::{Error, Result};

/// Peak of the central-pattern intensity in [`Normalization::UnitBound`]
/// units.
pub const UNIT_BOUND_PEAK: f64 = 4.0;

/// Contour level used for axial-ratio measurements: half of the bound.
pub const HALF_LEVEL: f64 = 2.0;

/// Largest grid [`render_map`] will allocate.
pub const DEFAULT_PIXEL_BUDGET: usize = 64 * 1024 * 1024;

/// Barrier and screen geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScreenGeometry {
    wavelength: f64,
    a: f64,
    b: f64,
    e0: f64,
    k: f64,
}

impl Default for ScreenGeometry {
    /// 600 nm light, holes 10 µm apart (a = 5 µm), screen at 0.3 m.
    fn default() -> Self {
        Self::new(600e-9, 5e-6, 0.3, 1.0).expect("default geometry is valid")
    }
}

impl ScreenGeometry {
    /// `a` is half the inter-hole distance, `b` the barrier–screen distance,
    /// all in metres.
    pub fn new(wavelength: f64, a: f64, b: f64, e0: f64) -> Result<Self> {
        for (name, v) in [("wavelength", wavelength), ("a", a), ("b", b), ("e0", e0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!(
                    "geometry {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            wavelength,
            a,
            b,
            e0,
            k: TAU / wavelength,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Wave number `2π / λ`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Fringe period `λ b / (2a)` of a hole pair.
    pub fn fringe_period(&self) -> f64 {
        self.wavelength * self.b / (2.0 * self.a)
    }

    /// Screen position of source `(i, j)` (0-based).
    pub fn hole_position(&self, i: usize, j: usize) -> (f64, f64) {
        let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        (sign(j) * self.a, sign(i) * self.a)
    }
}

/// Rectangular screen region in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    /// Square window `[−h, h] × [−h, h]`.
    pub fn centered(half_extent: f64) -> Self {
        Self {
            x_min: -half_extent,
            x_max: half_extent,
            y_min: -half_extent,
            y_max: half_extent,
        }
    }

    pub fn is_well_ordered(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `|E|²` including the field scale `E0`.
    RawE0,
    /// `|E|² b² / E0²`: the central-pattern bound is 4 and the half level 2.
    UnitBound,
}

/// Intensities on a pixel grid, row-major with row 0 at `y_max`.
///
/// Pixels are cells of equal size tiling the window; values are sampled at
/// cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
    pub normalization: Normalization,
}

impl IntensityMap {
    /// Wraps existing samples, checking the shape.
    pub fn from_data(
        window: Window,
        nx: usize,
        ny: usize,
        data: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Shape(format!(
                "grid must be at least 2×2, got {nx}×{ny}"
            )));
        }
        if !window.is_well_ordered() {
            return Err(Error::Validation(format!(
                "window is not well ordered: {window:?}"
            )));
        }
        if data.len() != nx * ny {
            return Err(Error::Shape(format!(
                "expected {} samples for {nx}×{ny}, got {}",
                nx * ny,
                data.len()
            )));
        }
        Ok(Self {
            window,
            nx,
            ny,
            data,
            normalization,
        })
    }

    pub fn pitch_x(&self) -> f64 {
        (self.window.x_max - self.window.x_min) / self.nx as f64
    }

    pub fn pitch_y(&self) -> f64 {
        (self.window.y_max - self.window.y_min) / self.ny as f64
    }

    /// x coordinate of column `q`.
    pub fn x(&self, q: usize) -> f64 {
        grid_coordinate(self.window.x_min, self.window.x_max, self.nx, q as f64)
    }

    /// y coordinate of row `r` (row 0 is the top).
    pub fn y(&self, r: usize) -> f64 {
        grid_coordinate(
            self.window.y_min,
            self.window.y_max,
            self.ny,
            (self.ny - 1 - r) as f64,
        )
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.nx + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.nx..(row + 1) * self.nx]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }

    /// Sub-grid of the pixels within `half_extent` of the window centre,
    /// chosen symmetrically so mirror pairs survive. Returns a copy of the
    /// whole map when it already fits.
    pub fn crop_centered(&self, half_extent: f64) -> IntensityMap {
        let axis = |n: usize, pitch: f64| {
            let c = 0.5 * (n - 1) as f64;
            let reach = (half_extent / pitch - 0.5).floor().max(0.0);
            let lo = (c - reach).ceil().max(0.0) as usize;
            let hi = ((c + reach).floor() as usize).min(n - 1);
            (lo, hi)
        };
        let (q0, q1) = axis(self.nx, self.pitch_x());
        let (r0, r1) = axis(self.ny, self.pitch_y());
        if q1 <= q0 || r1 <= r0 || (q0 == 0 && r0 == 0 && q1 == self.nx - 1 && r1 == self.ny - 1) {
            return self.clone();
        }
        let (nx, ny) = (q1 - q0 + 1, r1 - r0 + 1);
        let (px, py) = (self.pitch_x(), self.pitch_y());
        let window = Window {
            x_min: self.x(q0) - 0.5 * px,
            x_max: self.x(q1) + 0.5 * px,
            y_min: self.y(r1) - 0.5 * py,
            y_max: self.y(r0) + 0.5 * py,
        };
        let data = (r0..=r1)
            .flat_map(|r| self.row(r)[q0..=q1].iter().copied())
            .collect();
        IntensityMap {
            window,
            nx,
            ny,
            data,
            normalization: self.normalization,
        }
    }

    /// Bilinear sample at screen position `(x, y)`; `None` outside the
    /// sampled area.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let (cx, cy) = self.window.center();
        let fq = (x - cx) / self.pitch_x() + 0.5 * (self.nx - 1) as f64;
        let fr = (cy - y) / self.pitch_y() + 0.5 * (self.ny - 1) as f64;
        let max_q = (self.nx - 1) as f64;
        let max_r = (self.ny - 1) as f64;
        if !(0.0..=max_q).contains(&fq) || !(0.0..=max_r).contains(&fr) {
            return None;
        }
        let q0 = (fq.floor() as usize).min(self.nx - 2);
        let r0 = (fr.floor() as usize).min(self.ny - 2);
        let (u, v) = (fq - q0 as f64, fr - r0 as f64);
        let top = self.get(r0, q0) * (1.0 - u) + self.get(r0, q0 + 1) * u;
        let bottom = self.get(r0 + 1, q0) * (1.0 - u) + self.get(r0 + 1, q0 + 1) * u;
        Some(top * (1.0 - v) + bottom * v)
    }
}

/// Cell-centre coordinate of fractional index `idx` on an `n`-cell axis,
/// computed from the centre outward so that mirrored cells are exact
/// negatives on a window centred at zero.
fn grid_coordinate(lo: f64, hi: f64, n: usize, idx: f64) -> f64 {
    let pitch = (hi - lo) / n as f64;
    0.5 * (lo + hi) + (idx - 0.5 * (n - 1) as f64) * pitch
}

/// Field contribution `exp(i k (r − b)) / r` of a unit source whose squared
/// lateral offset from the observation point is `d2`.
///
/// The constant phase `exp(i k b)` common to all sources is dropped; writing
/// `r − b = d² / (r + b)` keeps the phase accurate to ~1e−12 rad where `k r`
/// itself would round at the 1e−10 level.
#[inline]
fn unit_wave(d2: f64, b: f64, k: f64) -> Complex64 {
    let r = (d2 + b * b).sqrt();
    let (s, c) = (k * d2 / (r + b)).sin_cos();
    Complex64::new(c / r, s / r)
}

/// Complex field `E0 Σ S_ij exp(i k r_ij) / r_ij` at screen point `(x, y)`,
/// up to the global phase `exp(i k b)`.
pub fn field_at_point(s: &SourcePhasorMatrix, g: &ScreenGeometry, x: f64, y: f64) -> Complex64 {
    let p = s.phasors();
    let mut e = Complex64::new(0.0, 0.0);
    for (i, row) in p.iter().enumerate() {
        for (j, phasor) in row.iter().enumerate() {
            let (hx, hy) = g.hole_position(i, j);
            let d2 = (x - hx).powi(2) + (y - hy).powi(2);
            e += phasor * unit_wave(d2, g.b, g.k);
        }
    }
    e * g.e0
}

fn intensity_scale(g: &ScreenGeometry, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::RawE0 => 1.0,
        Normalization::UnitBound => g.b * g.b / (g.e0 * g.e0),
    }
}

/// `|E|²` at a point in the requested normalization.
pub fn intensity_at_point(
    s: &SourcePhasorMatrix,
    g: &ScreenGeometry,
    x: f64,
    y: f64,
    normalization: Normalization,
) -> f64 {
    field_at_point(s, g, x, y).norm_sqr() * intensity_scale(g, normalization)
}

/// Renders `|E|²` on an `nx × ny` grid with the default pixel budget.
pub fn render_map(
    s: &SourcePhasorMatrix,
    g: &ScreenGeometry,
    window: Window,
    nx: usize,
    ny: usize,
    normalization: Normalization,
) -> Result<IntensityMap> {
    render_map_with_budget(s, g, window, nx, ny, normalization, DEFAULT_PIXEL_BUDGET)
}

/// Renders `|E|²` on an `nx × ny` grid, refusing grids above `budget` pixels.
///
/// Rows are computed in parallel; every pixel is a pure function of its
/// coordinates, so the output does not depend on scheduling.
pub fn render_map_with_budget(
    s: &SourcePhasorMatrix,
    g: &ScreenGeometry,
    window: Window,
    nx: usize,
    ny: usize,
    normalization: Normalization,
    budget: usize,
) -> Result<IntensityMap> {
    if nx < 2 || ny < 2 {
        return Err(Error::Shape(format!(
            "grid must be at least 2×2, got {nx}×{ny}"
        )));
    }
    if !window.is_well_ordered() {
        return Err(Error::Validation(format!(
            "window is not well ordered: {window:?}"
        )));
    }
    let requested = nx.saturating_mul(ny);
    if requested > budget {
        return Err(Error::Resource { requested, budget });
    }

    let mut map = IntensityMap {
        window,
        nx,
        ny,
        data: Vec::new(),
        normalization,
    };
    let xs: Vec<f64> = (0..nx).map(|q| map.x(q)).collect();
    let ys: Vec<f64> = (0..ny).map(|r| map.y(r)).collect();

    let phasors = s.phasors();
    let holes: Vec<(f64, f64, Complex64)> = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (hx, hy) = g.hole_position(i, j);
            (hx, hy, phasors[i][j])
        })
        .collect();
    let scale = g.e0 * g.e0 * intensity_scale(g, normalization);
    let (b, k) = (g.b, g.k);

    let mut data = vec![0.0; requested];
    data.par_chunks_mut(nx)
        .zip(ys.par_iter())
        .for_each(|(row, &y)| {
            for (out, &x) in row.iter_mut().zip(&xs) {
                let mut e = Complex64::new(0.0, 0.0);
                for &(hx, hy, p) in &holes {
                    let d2 = (x - hx) * (x - hx) + (y - hy) * (y - hy);
                    e += p * unit_wave(d2, b, k);
                }
                *out = e.norm_sqr() * scale;
            }
        });
    map.data = data;
    Ok(map)
}

/// Phase argument `t(z) = √2 a k z / √(z² + b² + 2a²)` along a diagonal.
pub fn t_of_z(z: f64, g: &ScreenGeometry) -> f64 {
    SQRT_2 * g.a * g.k * z / (z * z + g.b * g.b + 2.0 * g.a * g.a).sqrt()
}

/// Inverse of [`t_of_z`] for `0 ≤ t < √2 a k`.
pub fn z_of_t(t: f64, g: &ScreenGeometry) -> Result<f64> {
    let limit = SQRT_2 * g.a * g.k;
    if !(t.abs() < limit) {
        return Err(Error::Domain(format!(
            "|t| must be below √2·a·k = {limit}, got {t}"
        )));
    }
    Ok(t * ((g.b * g.b + 2.0 * g.a * g.a) / (limit * limit - t * t)).sqrt())
}

/// One of the two screen diagonals through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagonal {
    /// The line `x − y = 0`.
    Diag45,
    /// The line `x + y = 0`.
    Diag135,
}

impl Diagonal {
    /// Unit vector along the diagonal.
    pub fn direction(&self) -> (f64, f64) {
        match self {
            Diagonal::Diag45 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            Diagonal::Diag135 => (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Diagonal::Diag45 => "45°",
            Diagonal::Diag135 => "135°",
        }
    }
}

/// Sign choice in the central-pattern formula: `Plus` is
/// `1 + sinΔφ + 2cosΔφ cos t + (1 − sinΔφ) cos²t`, `Minus` the mirrored pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// Branch that describes the 135° diagonal. Pinned against the exact
/// renderer by `branch_mapping_calibration` in this module's tests.
pub const DIAG135_BRANCH: Branch = Branch::Plus;

impl Branch {
    pub fn diagonal(&self) -> Diagonal {
        if *self == DIAG135_BRANCH {
            Diagonal::Diag135
        } else {
            Diagonal::Diag45
        }
    }

    pub fn for_diagonal(d: Diagonal) -> Branch {
        match (d, DIAG135_BRANCH) {
            (Diagonal::Diag135, b) => b,
            (Diagonal::Diag45, Branch::Plus) => Branch::Minus,
            (Diagonal::Diag45, Branch::Minus) => Branch::Plus,
        }
    }

    /// `±1` for the leading `sinΔφ` term.
    fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Approximate intensity (in UnitBound units) at distance `z` from the
/// centre along one diagonal.
///
/// Valid for θ = π/4 sources with `φx + φy = π/2` (the canonical family),
/// where the exact field on the diagonal collapses to a real quadratic in
/// `cos t(z)`. The value lies in `[0, 4]`.
pub fn central_diagonal_intensity(
    delta_phi: f64,
    z: f64,
    branch: Branch,
    g: &ScreenGeometry,
) -> f64 {
    let (s, c) = delta_phi.sin_cos();
    let u = t_of_z(z, g).cos();
    let sign = branch.sign();
    1.0 + sign * s + 2.0 * c * u + (1.0 - sign * s) * u * u
}

/// `cos t` at which [`central_diagonal_intensity`] equals the half level 2,
/// taking the root with the positive square root.
pub fn half_level_root(delta_phi: f64, branch: Branch) -> Result<f64> {
    const EPS: f64 = 1e-9;
    let (s, c) = delta_phi.sin_cos();
    let denom = 1.0 - branch.sign() * s;
    if denom <= EPS {
        return Err(Error::SingularBranch(format!(
            "1 ∓ sinΔφ = {denom:.3e}; the contour degenerates as K → 2"
        )));
    }
    let root = (-c + (2.0 * denom).sqrt()) / denom;
    if root.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "half-level root cos t = {root} lies outside [−1, 1] for Δφ = {delta_phi}"
        )));
    }
    Ok(root.clamp(-1.0, 1.0))
}
