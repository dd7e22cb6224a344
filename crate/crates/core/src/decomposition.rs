//! Splitting a beam into the four interference sources.
//!
//! Both methods produce a 2×2 [`SourcePhasorMatrix`]. Row `i` and column `j`
//! identify the hole the source feeds (see [`crate::interference`]).
//!
//! Phasor convention: a real carrier `A cos(kz − φ)` is stored as magnitude
//! `A` and phase `−φ`, and `sin(kz − φ) = cos(kz − φ − π/2)` adds a further
//! `−π/2`. The time-averaged intensity is `|Σ phasors|² / 2`; the factor ½ is
//! folded into the field scale.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beam::{coefficient_matrix, BeamState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Beam phases carried in the temporal phase of each source.
    Phase,
    /// Beam phases carried in real source amplitudes on a common carrier.
    Amplitude,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Phase => "phase",
            Method::Amplitude => "amplitude",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phase" => Ok(Method::Phase),
            "amplitude" => Ok(Method::Amplitude),
            other => Err(Error::Validation(format!("unknown method `{other}`"))),
        }
    }
}

/// Complex amplitudes of the four sources, as magnitude and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourcePhasorMatrix {
    pub amp: [[f64; 2]; 2],
    pub phase: [[f64; 2]; 2],
    pub method: Method,
}

impl SourcePhasorMatrix {
    /// Amplitude-method sources from signed real coefficients on a common
    /// carrier. Negative entries become magnitude `|c|` with phase π.
    pub fn from_signed_amplitudes(coeffs: [[f64; 2]; 2]) -> Self {
        let mut amp = [[0.0; 2]; 2];
        let mut phase = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                amp[i][j] = coeffs[i][j].abs();
                phase[i][j] = if coeffs[i][j] < 0.0 { PI } else { 0.0 };
            }
        }
        Self {
            amp,
            phase,
            method: Method::Amplitude,
        }
    }

    pub fn phasor(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.amp[i][j], self.phase[i][j])
    }

    pub fn phasors(&self) -> [[Complex64; 2]; 2] {
        [
            [self.phasor(0, 0), self.phasor(0, 1)],
            [self.phasor(1, 0), self.phasor(1, 1)],
        ]
    }

    /// Determinant of the complex phasor matrix.
    ///
    /// For phase-method sources both rows are proportional to `(1, −i)`, so
    /// this vanishes; the beam's determinant lives in
    /// [`instantaneous_determinant`](Self::instantaneous_determinant).
    pub fn phasor_determinant(&self) -> Complex64 {
        let p = self.phasors();
        p[0][0] * p[1][1] - p[0][1] * p[1][0]
    }

    /// The real source amplitudes at carrier phase `kz`:
    /// `amp · cos(kz + phase)`.
    pub fn instantaneous(&self, kz: f64) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.amp[i][j] * (kz + self.phase[i][j]).cos();
            }
        }
        out
    }

    /// Determinant of [`instantaneous`](Self::instantaneous). For phase-method
    /// sources it does not depend on `kz` and equals `−det C` of the beam.
    pub fn instantaneous_determinant(&self, kz: f64) -> f64 {
        let m = self.instantaneous(kz);
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Signed real coefficients `amp · cos(phase)`; meaningful for
    /// amplitude-method sources whose phases are 0 or π.
    pub fn signed_amplitudes(&self) -> [[f64; 2]; 2] {
        self.instantaneous(0.0)
    }

    /// Σ |S_ij|².
    pub fn total_power(&self) -> f64 {
        self.amp.iter().flatten().map(|a| a * a).sum()
    }

    /// Euclidean norms of the two rows of magnitudes.
    pub fn row_norms(&self) -> [f64; 2] {
        [
            self.amp[0][0].hypot(self.amp[0][1]),
            self.amp[1][0].hypot(self.amp[1][1]),
        ]
    }

    pub fn transpose(&self) -> Self {
        let t = |m: [[f64; 2]; 2]| [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
        Self {
            amp: t(self.amp),
            phase: t(self.phase),
            method: self.method,
        }
    }

    fn require(&self, method: Method) -> Result<()> {
        if self.method == method {
            Ok(())
        } else {
            Err(Error::MethodMismatch {
                expected: method.as_str(),
                found: self.method.as_str(),
            })
        }
    }
}

/// Four sources carrying the beam phases in their temporal phases:
/// `[[cos θ Φx, cos θ Φx′], [sin θ Φy, sin θ Φy′]]` with `Φ′ = sin(kz − φ)`.
pub fn phase_method_sources(state: &BeamState) -> SourcePhasorMatrix {
    let (c, s) = state.theta_cos_sin();
    let (px, py) = (state.phi_x(), state.phi_y());
    SourcePhasorMatrix {
        amp: [[c, c], [s, s]],
        phase: [[-px, -px - FRAC_PI_2], [-py, -py - FRAC_PI_2]],
        method: Method::Phase,
    }
}

/// Four sources whose real amplitudes equal the beam's coefficient matrix,
/// all on the common carrier `Φx`.
pub fn amplitude_method_sources(state: &BeamState) -> SourcePhasorMatrix {
    SourcePhasorMatrix::from_signed_amplitudes(coefficient_matrix(state).0)
}

/// Recovers `sin Δφ = sin φy cos φx − sin φx cos φy` from amplitude-method
/// sources.
///
/// `theta` supplies the polarization angle; when `None` it is recovered from
/// the row norms (`cos θ = ‖row 1‖`, `sin θ = ‖row 2‖`).
pub fn sin_delta_phi_from_matrix(s: &SourcePhasorMatrix, theta: Option<f64>) -> Result<f64> {
    s.require(Method::Amplitude)?;
    let m = s.signed_amplitudes();
    let scale = match theta {
        Some(t) => t.cos() * t.sin(),
        None => {
            let [r1, r2] = s.row_norms();
            r1 * r2
        }
    };
    if !(scale.abs() > 1e-12) {
        return Err(Error::UndefinedPhase(
            "a source row vanishes (θ at 0 or π/2), so Δφ cannot be read from amplitudes".into(),
        ));
    }
    Ok(((m[1][1] * m[0][0] - m[0][1] * m[1][0]) / scale).clamp(-1.0, 1.0))
}

/// Rotation angle `θn` that realizes coefficient `c` through
/// `sin θn cos θn = c`. `None` when `|c| > ½`, which no rotation reaches.
pub fn polarizer_angle(c: f64) -> Option<f64> {
    let two_c = 2.0 * c;
    (two_c.abs() <= 1.0).then(|| 0.5 * two_c.asin())
}

/// Rotatable-polarizer settings for the four amplitude coefficients, in the
/// order `cos φx, sin φx, cos φy, sin φy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizerAngles {
    /// Coefficients the polarizers must reproduce.
    pub targets: [f64; 4],
    /// Rotation angles in radians; NaN where infeasible.
    pub angles: [f64; 4],
    pub feasible: [bool; 4],
}

impl PolarizerAngles {
    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|f| *f)
    }
}

pub fn polarizer_angles(s: &SourcePhasorMatrix) -> Result<PolarizerAngles> {
    s.require(Method::Amplitude)?;
    let m = s.signed_amplitudes();
    let norms = s.row_norms();
    let mut targets = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            // a dark row needs no light through either polarizer
            targets[2 * i + j] = if norms[i] > 0.0 {
                m[i][j] / norms[i]
            } else {
                0.0
            };
        }
    }
    let mut angles = [f64::NAN; 4];
    let mut feasible = [false; 4];
    for (n, c) in targets.iter().enumerate() {
        if let Some(a) = polarizer_angle(*c) {
            angles[n] = a;
            feasible[n] = true;
        }
    }
    Ok(PolarizerAngles {
        targets,
        angles,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{schmidt_number, BeamState};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn state(theta: f64, px: f64, py: f64) -> BeamState {
        BeamState::new(theta, px, py).unwrap()
    }

    #[test]
    fn phase_method_examples() {
        let s = phase_method_sources(&state(FRAC_PI_2, 0.3, 0.0));
        assert_eq!(s.amp[0], [0.0, 0.0]);
        assert_eq!(s.amp[1], [1.0, 1.0]);

        let s = phase_method_sources(&state(FRAC_PI_4, 0.0, 0.0));
        for a in s.amp.iter().flatten() {
            assert!(close(*a, FRAC_1_SQRT_2, 1e-15));
        }
        assert_eq!(s.phase[0][1], -FRAC_PI_2);
        assert_eq!(s.phase[1][1], -FRAC_PI_2);
        assert!(close(s.total_power(), 2.0, 1e-15));
    }

    #[test]
    fn phase_method_determinant() {
        let s = phase_method_sources(&state(FRAC_PI_4, 0.0, FRAC_PI_2));
        for kz in [0.0, 0.4, 2.0, -5.0] {
            assert!(close(s.instantaneous_determinant(kz).abs(), 0.5, 1e-15));
        }
        // rows are parallel as phasors
        assert!(s.phasor_determinant().norm() < 1e-15);
    }

    #[test]
    fn amplitude_method_examples() {
        let s = amplitude_method_sources(&state(FRAC_PI_4, 0.0, FRAC_PI_2));
        assert!(close(s.amp[0][0], FRAC_1_SQRT_2, 1e-15));
        assert!(close(s.amp[1][1], FRAC_1_SQRT_2, 1e-15));
        assert_eq!(s.amp[0][1], 0.0);
        assert_eq!(s.amp[1][0], 0.0);
        assert!(s.phase.iter().flatten().all(|p| *p == 0.0));

        let s = amplitude_method_sources(&state(FRAC_PI_2, 0.0, 0.0));
        assert_eq!(s.amp, [[0.0, 0.0], [1.0, 0.0]]);

        let s = amplitude_method_sources(&state(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4));
        for a in s.amp.iter().flatten() {
            assert!(close(*a, 0.5, 1e-15));
        }
        assert!(close(s.total_power(), 1.0, 1e-15));
    }

    #[test]
    fn negative_coefficients_carry_phase_pi() {
        let st = state(FRAC_PI_4, 2.5, 4.0);
        let s = amplitude_method_sources(&st);
        let c = coefficient_matrix(&st).0;
        let signed = s.signed_amplitudes();
        for (i, row) in c.iter().enumerate() {
            for (j, &cij) in row.iter().enumerate() {
                assert!(s.amp[i][j] >= 0.0);
                assert_eq!(s.phase[i][j], if cij < 0.0 { PI } else { 0.0 });
                assert!(close(signed[i][j], cij, 1e-15));
            }
        }
    }

    #[test]
    fn sin_delta_phi_examples() {
        // three-digit coefficient set for K = 1.2
        let h = FRAC_1_SQRT_2;
        let s = SourcePhasorMatrix::from_signed_amplitudes([
            [0.888 * h, 0.459 * h],
            [0.459 * h, 0.888 * h],
        ]);
        let v = sin_delta_phi_from_matrix(&s, Some(FRAC_PI_4)).unwrap();
        assert!(close(v, 0.888 * 0.888 - 0.459 * 0.459, 1e-12));
        assert!(close(v, 0.577_863, 1e-9));

        let s = SourcePhasorMatrix::from_signed_amplitudes([[h, 0.0], [0.0, h]]);
        assert!(close(
            sin_delta_phi_from_matrix(&s, None).unwrap(),
            1.0,
            1e-15
        ));

        let s = SourcePhasorMatrix::from_signed_amplitudes([[0.5; 2]; 2]);
        assert!(sin_delta_phi_from_matrix(&s, None).unwrap().abs() < 1e-15);
    }

    #[test]
    fn sin_delta_phi_errors() {
        let s = amplitude_method_sources(&state(FRAC_PI_2, 0.0, 0.3));
        assert!(matches!(
            sin_delta_phi_from_matrix(&s, None),
            Err(Error::UndefinedPhase(_))
        ));
        let p = phase_method_sources(&state(FRAC_PI_4, 0.0, 0.3));
        assert!(matches!(
            sin_delta_phi_from_matrix(&p, None),
            Err(Error::MethodMismatch { .. })
        ));
    }

    #[test]
    fn polarizer_angle_examples() {
        assert!(close(polarizer_angle(0.5).unwrap(), FRAC_PI_4, 1e-15));
        // ½ arcsin(0.918)
        let a = polarizer_angle(0.459).unwrap();
        assert!(close(a, 0.581_503_782_362_669_3, 1e-12));
        assert!(close(a.sin() * a.cos(), 0.459, 1e-12));
        assert_eq!(polarizer_angle(0.888), None);
        assert_eq!(polarizer_angle(-0.51), None);
    }

    #[test]
    fn polarizer_angles_flags_large_coefficients() {
        let st = state(FRAC_PI_4, 0.888f64.acos(), 0.459f64.acos());
        let p = polarizer_angles(&amplitude_method_sources(&st)).unwrap();
        assert_eq!(p.feasible, [false, true, true, false]);
        assert!(close(p.targets[0], 0.888, 1e-12));
        assert!(p.angles[0].is_nan());
        for n in [1, 2] {
            assert!(close(
                p.angles[n].sin() * p.angles[n].cos(),
                p.targets[n],
                1e-12
            ));
        }
        assert!(!p.all_feasible());
        assert!(polarizer_angles(&phase_method_sources(&st)).is_err());
    }

    proptest! {
        #[test]
        fn phase_method_determinant_matches_beam(
            theta in 0.0..FRAC_PI_2, px in 0.0..2.0 * PI, py in 0.0..2.0 * PI, kz in -50.0..50.0f64
        ) {
            let st = state(theta, px, py);
            let s = phase_method_sources(&st);
            let det_c = coefficient_matrix(&st).determinant();
            prop_assert!((s.instantaneous_determinant(kz) + det_c).abs() < 1e-12);
            prop_assert!(s.total_power() <= 2.0 + 1e-12);
            for i in 0..2 {
                prop_assert!((s.phase[i][1] - (s.phase[i][0] - FRAC_PI_2)).abs() < 1e-15);
            }
        }

        #[test]
        fn amplitude_method_matches_coefficients(
            theta in 0.0..FRAC_PI_2, px in 0.0..2.0 * PI, py in 0.0..2.0 * PI
        ) {
            let st = state(theta, px, py);
            let s = amplitude_method_sources(&st);
            let c = coefficient_matrix(&st).0;
            let m = s.signed_amplitudes();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((m[i][j] - c[i][j]).abs() < 1e-12);
                }
            }
            prop_assert!((s.total_power() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn sin_delta_phi_round_trip(theta in 0.01..FRAC_PI_2 - 0.01, px in 0.0..2.0 * PI, py in 0.0..2.0 * PI) {
            let st = state(theta, px, py);
            let s = amplitude_method_sources(&st);
            let v = sin_delta_phi_from_matrix(&s, None).unwrap();
            prop_assert!((v - st.delta_phi().sin()).abs() < 1e-12);
            // and through the Schmidt number
            let k = 1.0 / (1.0 - 0.5 * v * v * (2.0 * theta).sin().powi(2));
            prop_assert!((k - schmidt_number(&st).k).abs() < 1e-10);
        }

        #[test]
        fn polarizer_round_trip(c in -0.5..=0.5f64) {
            let a = polarizer_angle(c).unwrap();
            prop_assert!((a.sin() * a.cos() - c).abs() < 1e-12);
        }
    }
}
