//! The classically entangled beam and its Schmidt analysis.
//!
//! A normalized beam is `cos θ Φx êx + sin θ Φy êy` with `Φx = cos(kz − φx)`
//! and `Φy = cos(kz − φy)`. Expanding the two carriers in the orthogonal
//! function basis `Φk = cos kz`, `Φj = sin kz` gives a 2×2 real coefficient
//! matrix whose rows are the lab-frame polarizations `êx`, `êy` and whose
//! columns are `Φk`, `Φj`. Entanglement between polarization direction and
//! polarization amplitude is then measured by the Schmidt number
//! `K = 1 / Σ λ²` of the reduced density matrix.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::angle::{wrap_pi, wrap_two_pi};
use crate::error::{Error, Result};

/// Default tolerance for [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;

/// `(cos, sin)` that is exact at multiples of π/2 on `[0, 2π)`.
pub(crate) fn cos_sin(angle: f64) -> (f64, f64) {
    if angle == 0.0 {
        (1.0, 0.0)
    } else if angle == FRAC_PI_2 {
        (0.0, 1.0)
    } else if angle == PI {
        (-1.0, 0.0)
    } else if angle == 3.0 * FRAC_PI_2 {
        (0.0, -1.0)
    } else {
        let (s, c) = angle.sin_cos();
        (c, s)
    }
}

/// Entanglement parameters of a beam.
///
/// Constructed through [`BeamState::new`], which normalizes θ to `[0, π/2]`
/// and both phases to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamState {
    theta: f64,
    phi_x: f64,
    phi_y: f64,
    delta_phi: f64,
}

impl BeamState {
    /// Builds a normalized state.
    ///
    /// A θ outside `[0, π/2]` is folded back into range by moving the sign of
    /// `cos θ` into `φx` and the sign of `sin θ` into `φy` (a shift by π), which
    /// leaves the field unchanged.
    pub fn new(theta: f64, phi_x: f64, phi_y: f64) -> Result<Self> {
        if !(theta.is_finite() && phi_x.is_finite() && phi_y.is_finite()) {
            return Err(Error::Validation(format!(
                "beam angles must be finite (theta={theta}, phi_x={phi_x}, phi_y={phi_y})"
            )));
        }
        let (mut phi_x, mut phi_y) = (phi_x, phi_y);
        let theta = if (0.0..=FRAC_PI_2).contains(&theta) {
            theta
        } else {
            let (c, s) = cos_sin(wrap_two_pi(theta));
            if c < 0.0 {
                phi_x += PI;
            }
            if s < 0.0 {
                phi_y += PI;
            }
            s.abs().atan2(c.abs())
        };
        let phi_x = wrap_two_pi(phi_x);
        let phi_y = wrap_two_pi(phi_y);
        Ok(Self {
            theta,
            phi_x,
            phi_y,
            delta_phi: wrap_pi(phi_y - phi_x),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi_x(&self) -> f64 {
        self.phi_x
    }

    pub fn phi_y(&self) -> f64 {
        self.phi_y
    }

    /// `φy − φx` reduced to `(−π, π]`.
    pub fn delta_phi(&self) -> f64 {
        self.delta_phi
    }

    /// `(cos θ, sin θ)`, exact at the separable endpoints.
    pub(crate) fn theta_cos_sin(&self) -> (f64, f64) {
        cos_sin(self.theta)
    }

    pub(crate) fn phi_x_cos_sin(&self) -> (f64, f64) {
        cos_sin(self.phi_x)
    }

    pub(crate) fn phi_y_cos_sin(&self) -> (f64, f64) {
        cos_sin(self.phi_y)
    }
}

/// Coefficients of the beam in the (lab frame) × (function frame) product
/// basis. Rows are `êx`, `êy`; columns are `Φk = cos kz`, `Φj = sin kz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientMatrix(pub [[f64; 2]; 2]);

impl CoefficientMatrix {
    pub fn determinant(&self) -> f64 {
        let c = &self.0;
        c[0][0] * c[1][1] - c[0][1] * c[1][0]
    }

    /// Sum of squares of all entries; 1 for a normalized field.
    pub fn norm_squared(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }
}

pub fn coefficient_matrix(state: &BeamState) -> CoefficientMatrix {
    let (ct, st) = state.theta_cos_sin();
    let (cx, sx) = state.phi_x_cos_sin();
    let (cy, sy) = state.phi_y_cos_sin();
    CoefficientMatrix([[cx * ct, sx * ct], [cy * st, sy * st]])
}

/// Lab-frame reduced density matrix, obtained by tracing out the function
/// frame.
pub fn reduced_density_lab(state: &BeamState) -> [[f64; 2]; 2] {
    let (c, s) = state.theta_cos_sin();
    let off = state.delta_phi.cos() * c * s;
    [[c * c, off], [off, s * s]]
}

/// Eigenvalues of a real symmetric 2×2 matrix, largest first.
pub fn symmetric_eigenvalues(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let radius = half_diff.hypot(m[0][1]);
    [mean + radius, mean - radius]
}

/// Schmidt number evaluated by the three equivalent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmidtRoutes {
    /// `1 / (λ1² + λ2²)`.
    pub eigen: f64,
    /// `1 / (1 − ½ sin²Δφ sin²2θ)`.
    pub trig: f64,
    /// `1 / (1 − 2 det(C)²)`.
    pub determinant: f64,
}

impl SchmidtRoutes {
    pub fn max_disagreement(&self) -> f64 {
        let v = [self.eigen, self.trig, self.determinant];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmidtResult {
    /// Schmidt number, in `[1, 2]`.
    pub k: f64,
    /// Reduced-density eigenvalues, largest first.
    pub eigenvalues: [f64; 2],
    /// `K′ = √(2 − 2/K)`, in `[0, 1]`.
    pub k_prime: f64,
    pub routes: SchmidtRoutes,
}

pub fn schmidt_number(state: &BeamState) -> SchmidtResult {
    let rho = reduced_density_lab(state);
    let [l1, l2] = symmetric_eigenvalues(&rho);
    // λ2 can land a few ulps below zero for pure states
    let eigenvalues = [l1.clamp(0.0, 1.0), l2.clamp(0.0, 1.0)];
    let eigen = 1.0 / (eigenvalues[0].powi(2) + eigenvalues[1].powi(2));

    let sin_dphi = state.delta_phi.sin();
    let sin_2theta = (2.0 * state.theta).sin();
    let trig = 1.0 / (1.0 - 0.5 * sin_dphi.powi(2) * sin_2theta.powi(2));

    let det = coefficient_matrix(state).determinant();
    let determinant = 1.0 / (1.0 - 2.0 * det * det);

    let k = eigen.clamp(1.0, 2.0);
    SchmidtResult {
        k,
        eigenvalues,
        k_prime: k_prime(k),
        routes: SchmidtRoutes {
            eigen,
            trig,
            determinant,
        },
    }
}

/// `K′ = √(2 − 2/K)`; equals `|sin Δφ|` on the θ = π/4 family.
pub fn k_prime(k: f64) -> f64 {
    (2.0 - 2.0 / k).max(0.0).sqrt().min(1.0)
}

/// The θ = π/4, φx + φy = π/2 state whose Schmidt number is `k`.
///
/// This one-parameter family reproduces the coefficient sets used for the
/// intermediate-entanglement amplitude-method figures, e.g. K = 1.2 gives
/// `cos φx = sin φy ≈ 0.888`.
pub fn canonical_state_for_k(k: f64) -> Result<BeamState> {
    if !(1.0..=2.0).contains(&k) {
        return Err(Error::Domain(format!(
            "Schmidt number must lie in [1, 2], got {k}"
        )));
    }
    let delta_phi = k_prime(k).asin();
    let phi_x = 0.5 * (FRAC_PI_2 - delta_phi);
    BeamState::new(PI / 4.0, phi_x, phi_x + delta_phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateClass {
    Separable,
    Intermediate,
    MaximallyEntangled,
}

pub fn classify(result: &SchmidtResult, tol: f64) -> StateClass {
    if result.k <= 1.0 + tol {
        StateClass::Separable
    } else if result.k >= 2.0 - tol {
        StateClass::MaximallyEntangled
    } else {
        StateClass::Intermediate
    }
}
