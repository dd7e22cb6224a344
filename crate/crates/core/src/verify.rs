//! Self-verification suite: ten end-to-end checks of the model against the
//! published figures and closed forms.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    axial_ratio_analytic, axial_ratio_numeric, diagonal_half_lengths, diagonal_symmetry_error,
    symmetry_axis_offset, DiagonalScan, Orientation,
};
use crate::beam::{canonical_state_for_k, schmidt_number, BeamState};
use crate::decomposition::{
    amplitude_method_sources, polarizer_angles, sin_delta_phi_from_matrix, Method,
};
use crate::error::Result;
use crate::interference::{
    central_diagonal_intensity, intensity_at_point, Branch, Diagonal, IntensityMap, Normalization,
    HALF_LEVEL,
};
use crate::pipeline::{analyze, simulate};
use crate::scenario::{preset, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Multiplies observed intensities in the bound check. Anything above 1
    /// by more than the tolerance must make that check fail.
    pub intensity_gain: f64,
    /// Seed for the random-state agreement check.
    pub seed: u64,
    /// Number of random states in the agreement check.
    pub random_states: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            intensity_gain: 1.0,
            seed: 0x5eed_f00d,
            random_states: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    pub measured: String,
    pub expected: String,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {}; expected {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub passed: bool,
    pub seconds: f64,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let n = self.checks.iter().filter(|c| c.passed).count();
        write!(
            f,
            "{n}/{} checks passed in {:.1} s",
            self.checks.len(),
            self.seconds
        )
    }
}

/// Runs checks, caching rendered analysis-grid maps by preset name.
pub struct Verifier {
    opts: VerifyOptions,
    maps: Mutex<HashMap<String, Arc<IntensityMap>>>,
}

fn check(id: u8, name: &str, measured: String, expected: &str, passed: bool) -> Check {
    Check {
        id,
        name: name.to_string(),
        measured,
        expected: expected.to_string(),
        passed,
    }
}

fn failed(id: u8, name: &str, expected: &str, err: crate::Error) -> Check {
    check(id, name, format!("error: {err}"), expected, false)
}

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Self {
        Self {
            opts,
            maps: Mutex::new(HashMap::new()),
        }
    }

    fn map(&self, scenario: &Scenario) -> Result<Arc<IntensityMap>> {
        if let Some(m) = self.maps.lock().expect("cache lock").get(&scenario.name) {
            return Ok(Arc::clone(m));
        }
        let sim = simulate(&scenario.clone().with_analysis_grid())?;
        let m = Arc::new(sim.map);
        self.maps
            .lock()
            .expect("cache lock")
            .insert(scenario.name.clone(), Arc::clone(&m));
        Ok(m)
    }

    fn preset_map(&self, name: &str) -> Result<Arc<IntensityMap>> {
        self.map(&preset(name)?)
    }

    /// Runs every check in order.
    pub fn run_all(&self) -> Report {
        self.run_selected(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
    }

    /// Runs the listed checks in the given order.
    pub fn run_selected(&self, ids: &[u8]) -> Report {
        let start = Instant::now();
        let checks = ids.iter().map(|&id| self.run(id)).collect::<Vec<_>>();
        Report {
            passed: checks.iter().all(|c| c.passed),
            checks,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    /// Runs check `id` (1–10).
    pub fn run(&self, id: u8) -> Check {
        match id {
            1 => self.preset_schmidt_numbers(),
            2 => self.triple_formula_agreement(),
            3 => self.separable_symmetry(),
            4 => self.entangled_axis_shift(),
            5 => self.amplitude_symmetry_classes(),
            6 => self.intensity_bound(),
            7 => self.approximation_fidelity(),
            8 => self.axial_ratio_curve(),
            9 => self.round_trip_estimation(),
            10 => self.polarizer_feasibility(),
            _ => check(id, "unknown check", "-".into(), "id in 1..=10", false),
        }
    }

    fn preset_schmidt_numbers(&self) -> Check {
        const NAME: &str = "Schmidt numbers of presets";
        const EXPECTED: &str =
            "K(π/3)=1.600, K(5π/21)=1.301±0.005, coefficient sets 1.2/1.4/1.6/1.8 ±0.01";
        let k =
            |dphi: f64| schmidt_number(&BeamState::new(FRAC_PI_4, 0.0, dphi).expect("finite")).k;
        let k3 = k(PI / 3.0);
        let k21 = k(5.0 * PI / 21.0);
        let mut ok = (k3 - 1.6).abs() < 5e-4 && (k21 - 1.301).abs() <= 5e-3;
        let mut from_sets = Vec::new();
        for (name, target) in [
            ("fig7a", 1.2),
            ("fig7b", 1.4),
            ("fig7c", 1.6),
            ("fig7d", 1.8),
        ] {
            let sc = preset(name).expect("preset");
            match sin_delta_phi_from_matrix(&sc.sources(), Some(FRAC_PI_4)) {
                Ok(s) => {
                    let kk = 1.0 / (1.0 - 0.5 * s * s);
                    ok &= (kk - target).abs() <= 0.01;
                    from_sets.push(format!("{kk:.4}"));
                }
                Err(e) => return failed(1, NAME, EXPECTED, e),
            }
        }
        check(
            1,
            NAME,
            format!(
                "K(π/3)={k3:.6}, K(5π/21)={k21:.6}, sets [{}]",
                from_sets.join(", ")
            ),
            EXPECTED,
            ok,
        )
    }

    fn triple_formula_agreement(&self) -> Check {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let mut worst = 0.0f64;
        for _ in 0..self.opts.random_states {
            let st = BeamState::new(
                rng.random_range(0.0..FRAC_PI_2),
                rng.random_range(0.0..TAU),
                rng.random_range(0.0..TAU),
            )
            .expect("finite");
            worst = worst.max(schmidt_number(&st).routes.max_disagreement());
        }
        check(
            2,
            "Triple-formula agreement",
            format!(
                "max spread {worst:.2e} over {} states",
                self.opts.random_states
            ),
            "< 1e-10",
            worst < 1e-10,
        )
    }

    fn separable_symmetry(&self) -> Check {
        const NAME: &str = "Separable-state X-axis symmetry (phase method)";
        const EXPECTED: &str =
            "fig2a-c residual < 1e-6 at |offset| ≤ 1 px; fig2d Δφ-invariant within 1e-12";
        let mut parts = Vec::new();
        let mut ok = true;
        for name in ["fig2a", "fig2b", "fig2c"] {
            let rep = self.preset_map(name).and_then(|m| {
                symmetry_axis_offset(&m, Orientation::Horizontal, 0.015).map(|r| (r, m.pitch_y()))
            });
            match rep {
                Ok((r, pitch)) => {
                    ok &= r.residual < 1e-6 && r.offset.abs() <= pitch;
                    parts.push(format!(
                        "{name} {:.2e}@{:+.2}px",
                        r.residual,
                        r.offset / pitch
                    ));
                }
                Err(e) => return failed(3, NAME, EXPECTED, e),
            }
        }
        let base = match preset("fig2d") {
            Ok(s) => s.with_analysis_grid(),
            Err(e) => return failed(3, NAME, EXPECTED, e),
        };
        let mut maps = Vec::new();
        for dphi in [0.0, PI / 3.0, FRAC_PI_2] {
            let mut sc = base.clone();
            sc.state = BeamState::new(FRAC_PI_2, 0.0, dphi).expect("finite");
            sc.name = format!("fig2d-dphi{dphi}");
            match self.map(&sc) {
                Ok(m) => maps.push(m),
                Err(e) => return failed(3, NAME, EXPECTED, e),
            }
        }
        let spread = maps[1..]
            .iter()
            .flat_map(|m| m.data.iter().zip(&maps[0].data).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        ok &= spread <= 1e-12;
        parts.push(format!("fig2d spread {spread:.1e}"));
        check(3, NAME, parts.join(", "), EXPECTED, ok)
    }

    fn entangled_axis_shift(&self) -> Check {
        const NAME: &str = "Entangled-state axis shift (phase method)";
        const EXPECTED: &str = "h(π/2)=-h(-π/2) within 1 px; |h| rising over K=1.3,1.6,2; vertical constant within 1 px";
        let mut h = HashMap::new();
        let mut v = Vec::new();
        let mut pitch = 0.0;
        for name in ["fig3a", "fig3b", "fig3c", "fig3d"] {
            let res = self.preset_map(name).and_then(|m| {
                pitch = m.pitch_y();
                Ok((
                    symmetry_axis_offset(&m, Orientation::Horizontal, 0.015)?.offset,
                    symmetry_axis_offset(&m, Orientation::Vertical, 0.015)?.offset,
                ))
            });
            match res {
                Ok((ho, vo)) => {
                    h.insert(name, ho);
                    v.push(vo);
                }
                Err(e) => return failed(4, NAME, EXPECTED, e),
            }
        }
        let antisym = (h["fig3a"] + h["fig3b"]).abs();
        let rising = 0.0 < h["fig3d"].abs()
            && h["fig3d"].abs() < h["fig3c"].abs()
            && h["fig3c"].abs() < h["fig3a"].abs();
        let v_spread =
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        let ok = antisym <= pitch && rising && v_spread <= pitch;
        let mm = |x: f64| format!("{:+.4}", x * 1e3);
        check(
            4,
            NAME,
            format!(
                "h[mm] a {} b {} c {} d {}; |a+b| {:.2} px; vertical spread {:.2} px",
                mm(h["fig3a"]),
                mm(h["fig3b"]),
                mm(h["fig3c"]),
                mm(h["fig3d"]),
                antisym / pitch,
                v_spread / pitch
            ),
            EXPECTED,
            ok,
        )
    }

    fn amplitude_symmetry_classes(&self) -> Check {
        const NAME: &str = "Amplitude-method symmetry classes";
        const EXPECTED: &str =
            "fig5: X or Y residual < 1e-6; fig6: diagonal < 1e-9 and X, Y > 10× diagonal";
        let mut parts = Vec::new();
        let mut ok = true;
        for name in ["fig5a", "fig5b", "fig5c", "fig5d"] {
            let res = self.preset_map(name).and_then(|m| {
                let axis = |o| -> Result<f64> {
                    let r = symmetry_axis_offset(&m, o, 0.015)?;
                    let pitch = if o == Orientation::Horizontal {
                        m.pitch_y()
                    } else {
                        m.pitch_x()
                    };
                    Ok(if r.offset.abs() <= pitch {
                        r.residual
                    } else {
                        f64::INFINITY
                    })
                };
                Ok((axis(Orientation::Horizontal)?, axis(Orientation::Vertical)?))
            });
            match res {
                Ok((x, y)) => {
                    ok &= x.min(y) < 1e-6;
                    parts.push(format!("{name} X {x:.1e} Y {y:.1e}"));
                }
                Err(e) => return failed(5, NAME, EXPECTED, e),
            }
        }
        for (name, diag) in [("fig6a", Diagonal::Diag45), ("fig6b", Diagonal::Diag135)] {
            let res = self.preset_map(name).and_then(|m| {
                Ok((
                    diagonal_symmetry_error(&m, diag)?,
                    symmetry_axis_offset(&m, Orientation::Horizontal, 0.015)?.residual,
                    symmetry_axis_offset(&m, Orientation::Vertical, 0.015)?.residual,
                ))
            });
            match res {
                Ok((d, x, y)) => {
                    ok &= d < 1e-9 && x > 10.0 * d && y > 10.0 * d && x.min(y) > 0.0;
                    parts.push(format!(
                        "{name} {} {d:.1e} X {x:.2e} Y {y:.2e}",
                        diag.name()
                    ));
                }
                Err(e) => return failed(5, NAME, EXPECTED, e),
            }
        }
        check(5, NAME, parts.join("; "), EXPECTED, ok)
    }

    fn intensity_bound(&self) -> Check {
        const NAME: &str = "Intensity bound";
        const EXPECTED: &str = "central-window max ≤ 4.004 (UnitBound) for θ=π/4 amplitude presets";
        let mut worst = (0.0f64, String::new());
        for name in [
            "fig5a", "fig5c", "fig6a", "fig6b", "fig7a", "fig7b", "fig7c", "fig7d",
        ] {
            let sc = preset(name).expect("preset");
            debug_assert!(sc.method == Method::Amplitude && sc.state.theta() == FRAC_PI_4);
            match self.map(&sc) {
                Ok(m) => {
                    let peak = m.max() * self.opts.intensity_gain;
                    if peak > worst.0 {
                        worst = (peak, name.to_string());
                    }
                }
                Err(e) => return failed(6, NAME, EXPECTED, e),
            }
        }
        check(
            6,
            NAME,
            format!("max {:.6} ({})", worst.0, worst.1),
            EXPECTED,
            worst.0 <= 4.004,
        )
    }

    fn approximation_fidelity(&self) -> Check {
        const NAME: &str = "Central-pattern approximation fidelity";
        const EXPECTED: &str = "≤ 1% relative on |z| ≤ 1.5× half-level crossing, K=1.2-1.8";
        let g = crate::interference::ScreenGeometry::default();
        let mut worst = 0.0f64;
        for k in [1.2, 1.4, 1.6, 1.8] {
            let st = canonical_state_for_k(k).expect("k in range");
            let s = amplitude_method_sources(&st);
            let lengths = match diagonal_half_lengths(&s, &g, HALF_LEVEL, &DiagonalScan::analysis())
            {
                Ok(l) => l,
                Err(e) => return failed(7, NAME, EXPECTED, e),
            };
            for (diag, zc) in [
                (Diagonal::Diag45, lengths.diag45),
                (Diagonal::Diag135, lengths.diag135),
            ] {
                let (dx, dy) = diag.direction();
                let branch = Branch::for_diagonal(diag);
                const N: i32 = 300;
                for i in -N..=N {
                    let z = 1.5 * zc * i as f64 / N as f64;
                    let exact =
                        intensity_at_point(&s, &g, z * dx, z * dy, Normalization::UnitBound);
                    let approx = central_diagonal_intensity(st.delta_phi(), z, branch, &g);
                    worst = worst.max((exact - approx).abs() / approx);
                }
            }
        }
        check(
            7,
            NAME,
            format!("max relative deviation {:.3}%", 100.0 * worst),
            EXPECTED,
            worst <= 0.01,
        )
    }

    fn axial_ratio_curve(&self) -> Check {
        const NAME: &str = "Axial ratio vs Schmidt number";
        const EXPECTED: &str = "|R_num-R_ana|/R_ana ≤ 5% for K=1.1..1.9; R(1.2), R(1.8) within 1e-3 of direct evaluation";
        let g = crate::interference::ScreenGeometry::default();
        let mut worst = 0.0f64;
        for i in 1..=9 {
            let k = 1.0 + 0.1 * i as f64;
            let s = amplitude_method_sources(&canonical_state_for_k(k).expect("k in range"));
            let res = axial_ratio_numeric(&s, &g).and_then(|n| Ok((n.r, axial_ratio_analytic(k)?)));
            match res {
                Ok((num, ana)) => worst = worst.max((num - ana).abs() / ana),
                Err(e) => return failed(8, NAME, EXPECTED, e),
            }
        }
        let direct = |k: f64| {
            let kp = (2.0 - 2.0 / k).sqrt();
            ((SQRT_2 - (1.0 + kp).sqrt()) / (1.0 - kp).sqrt()).acos()
                / ((SQRT_2 - (1.0 - kp).sqrt()) / (1.0 + kp).sqrt()).acos()
        };
        let r12 = axial_ratio_analytic(1.2).expect("in domain");
        let r18 = axial_ratio_analytic(1.8).expect("in domain");
        let ok =
            worst <= 0.05 && (r12 - direct(1.2)).abs() <= 1e-3 && (r18 - direct(1.8)).abs() <= 1e-3;
        check(
            8,
            NAME,
            format!(
                "max deviation {:.2}%, R(1.2)={r12:.6}, R(1.8)={r18:.6}",
                100.0 * worst
            ),
            EXPECTED,
            ok,
        )
    }

    fn round_trip_estimation(&self) -> Check {
        const NAME: &str = "Simulate→analyze round trip";
        const EXPECTED: &str = "|k̂ − k| ≤ 0.05 for K=1.1..1.9";
        let mut worst = (0.0f64, 0.0f64);
        for i in 1..=9 {
            let k = 1.0 + 0.1 * i as f64;
            let res = Scenario::canonical(k)
                .and_then(|sc| simulate(&sc.with_analysis_grid()))
                .and_then(|sim| analyze(&sim.map, &sim.metadata));
            match res {
                Ok(rep) => {
                    let err = rep.k_estimate.map_or(f64::INFINITY, |kh| (kh - k).abs());
                    if err >= worst.0 {
                        worst = (err, k);
                    }
                }
                Err(e) => return failed(9, NAME, EXPECTED, e),
            }
        }
        check(
            9,
            NAME,
            format!("max |k̂ − k| {:.4} (K={:.1})", worst.0, worst.1),
            EXPECTED,
            worst.0 <= 0.05,
        )
    }

    fn polarizer_feasibility(&self) -> Check {
        const NAME: &str = "Polarizer-angle feasibility audit";
        const EXPECTED: &str =
            "coefficients > 0.5 flagged infeasible; feasible ones round-trip within 1e-12";
        let mut infeasible = 0;
        let mut feasible = 0;
        let mut worst = 0.0f64;
        let mut ok = true;
        for name in ["fig7a", "fig7b", "fig7c", "fig7d"] {
            let angles = match polarizer_angles(&preset(name).expect("preset").sources()) {
                Ok(a) => a,
                Err(e) => return failed(10, NAME, EXPECTED, e),
            };
            for n in 0..4 {
                let c = angles.targets[n];
                if c.abs() > 0.5 {
                    ok &= !angles.feasible[n];
                    infeasible += 1;
                } else {
                    ok &= angles.feasible[n];
                    let (s, co) = angles.angles[n].sin_cos();
                    worst = worst.max((s * co - c).abs());
                    feasible += 1;
                }
            }
        }
        ok &= worst <= 1e-12;
        check(
            10,
            NAME,
            format!("{infeasible} infeasible, {feasible} feasible, worst round trip {worst:.1e}"),
            EXPECTED,
            ok,
        )
    }
}

/// Runs the whole suite.
pub fn run_verify(opts: VerifyOptions) -> Report {
    Verifier::new(opts).run_all()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        let v = Verifier::new(VerifyOptions {
            random_states: 500,
            ..Default::default()
        });
        for id in [1, 2, 7, 10] {
            let c = v.run(id);
            assert!(c.passed, "{c}");
        }
        assert!(!v.run(11).passed);
    }

    #[test]
    fn check_line_format() {
        let c = check(3, "name", "m".into(), "e", false);
        assert_eq!(c.to_string(), "[FAIL]  3 name: measured m; expected e");
    }
}
