//! Named presets for the published figure set, plus ad-hoc scenarios.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::beam::{canonical_state_for_k, BeamState};
use crate::decomposition::{
    amplitude_method_sources, phase_method_sources, Method, SourcePhasorMatrix,
};
use crate::error::{Error, Result};
use crate::interference::{ScreenGeometry, Window};

/// Full-screen figure window: ±0.1 m.
pub const FULL_SCREEN_HALF_EXTENT: f64 = 0.1;
pub const FULL_SCREEN_RES: usize = 1001;
/// Central analysis window: ±0.03 m.
pub const ANALYSIS_HALF_EXTENT: f64 = 0.03;
pub const ANALYSIS_RES: usize = 1501;

/// Qualitative symmetry a preset is expected to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetryClass {
    /// Mirror symmetric about the X axis.
    XAxis,
    /// Horizontal axis displaced from the X axis; vertical axis kept.
    ShiftedHorizontal,
    /// Mirror symmetric about the X and/or Y axis.
    XOrY,
    /// Mirror symmetric about a diagonal.
    Diagonal,
    /// Symmetry axes rotated part-way toward the diagonals.
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expected {
    pub k: f64,
    pub symmetry: SymmetryClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub method: Method,
    pub state: BeamState,
    /// Literal `(cosφx, sinφx, cosφy, sinφy)` when a preset quotes rounded
    /// coefficients instead of angles.
    pub coefficients: Option<[f64; 4]>,
    pub geometry: ScreenGeometry,
    pub window: Window,
    pub resolution: usize,
    pub expected: Option<Expected>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, method: Method, state: BeamState) -> Self {
        Self {
            name: name.into(),
            method,
            state,
            coefficients: None,
            geometry: ScreenGeometry::default(),
            window: Window::centered(FULL_SCREEN_HALF_EXTENT),
            resolution: FULL_SCREEN_RES,
            expected: None,
        }
    }

    /// Amplitude-method canonical state with Schmidt number `k`.
    pub fn canonical(k: f64) -> Result<Self> {
        let mut s = Self::new(
            format!("canonical-k{k}"),
            Method::Amplitude,
            canonical_state_for_k(k)?,
        );
        s.expected = Some(Expected {
            k,
            symmetry: if k == 1.0 {
                SymmetryClass::XOrY
            } else {
                SymmetryClass::Rotated
            },
        });
        Ok(s)
    }

    /// Same scenario on the central analysis grid.
    pub fn with_analysis_grid(mut self) -> Self {
        self.window = Window::centered(ANALYSIS_HALF_EXTENT);
        self.resolution = ANALYSIS_RES;
        self
    }

    pub fn with_grid(mut self, half_extent: f64, resolution: usize) -> Self {
        self.window = Window::centered(half_extent);
        self.resolution = resolution;
        self
    }

    /// Source matrix, built from the literal coefficients when present.
    pub fn sources(&self) -> SourcePhasorMatrix {
        match (self.method, self.coefficients) {
            (Method::Amplitude, Some([cx, sx, cy, sy])) => {
                let (c, s) = self.state.theta_cos_sin();
                SourcePhasorMatrix::from_signed_amplitudes([[cx * c, sx * c], [cy * s, sy * s]])
            }
            (Method::Amplitude, None) => amplitude_method_sources(&self.state),
            (Method::Phase, _) => phase_method_sources(&self.state),
        }
    }
}

pub const PRESET_NAMES: [&str; 18] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig5a", "fig5b",
    "fig5c", "fig5d", "fig6a", "fig6b", "fig7a", "fig7b", "fig7c", "fig7d",
];

fn state(theta: f64, phi_x: f64, phi_y: f64) -> BeamState {
    BeamState::new(theta, phi_x, phi_y).expect("preset angles are finite")
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<Scenario> {
    use Method::{Amplitude, Phase};
    use SymmetryClass::*;

    let pi4 = FRAC_PI_4;
    let (method, st, k, symmetry) = match name {
        "fig2a" => (Phase, state(pi4, 0.0, 0.0), 1.0, XAxis),
        "fig2b" => (Phase, state(PI / 7.0, 0.0, 0.0), 1.0, XAxis),
        "fig2c" => (Phase, state(PI / 10.0, 0.0, 0.0), 1.0, XAxis),
        "fig2d" => (Phase, state(FRAC_PI_2, 0.0, FRAC_PI_2), 1.0, XAxis),
        "fig3a" => (Phase, state(pi4, 0.0, FRAC_PI_2), 2.0, ShiftedHorizontal),
        "fig3b" => (Phase, state(pi4, 0.0, -FRAC_PI_2), 2.0, ShiftedHorizontal),
        "fig3c" => (Phase, state(pi4, 0.0, PI / 3.0), 1.6, ShiftedHorizontal),
        "fig3d" => (
            Phase,
            state(pi4, 0.0, 5.0 * PI / 21.0),
            1.3,
            ShiftedHorizontal,
        ),
        "fig5a" => (Amplitude, state(pi4, 0.0, 0.0), 1.0, XOrY),
        "fig5b" => (Amplitude, state(FRAC_PI_2, pi4, pi4), 1.0, XOrY),
        "fig5c" => (Amplitude, state(pi4, pi4, pi4), 1.0, XOrY),
        "fig5d" => (Amplitude, state(FRAC_PI_2, 0.0, 0.0), 1.0, XOrY),
        "fig6a" => (Amplitude, state(pi4, 0.0, FRAC_PI_2), 2.0, Diagonal),
        "fig6b" => (Amplitude, state(pi4, FRAC_PI_2, 0.0), 2.0, Diagonal),
        "fig7a" | "fig7b" | "fig7c" | "fig7d" => {
            let (k, major, minor): (f64, f64, f64) = match name {
                "fig7a" => (1.2, 0.888, 0.459),
                "fig7b" => (1.4, 0.936, 0.349),
                "fig7c" => (1.6, 0.965, 0.258),
                _ => (1.8, 0.985, 0.169),
            };
            let st = state(pi4, minor.atan2(major), major.atan2(minor));
            let mut sc = Scenario::new(name, Amplitude, st);
            sc.coefficients = Some([major, minor, minor, major]);
            sc.expected = Some(Expected {
                k,
                symmetry: Rotated,
            });
            return Ok(sc);
        }
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    let mut sc = Scenario::new(name, method, st);
    sc.expected = Some(Expected { k, symmetry });
    Ok(sc)
}

pub fn all_presets() -> Vec<Scenario> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("known preset"))
        .collect()
}
