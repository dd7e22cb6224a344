//! Simulate → analyze, in memory or through run files.

use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    axial_ratio_numeric, map_diagonal_half_lengths, symmetry_reports, AxialRatioResult,
    DiagonalLengths, SymmetryReport,
};
use crate::beam::StateClass;
use crate::decomposition::Method;
use crate::error::Result;
use crate::interference::{render_map, IntensityMap, Normalization, Window, HALF_LEVEL};
use crate::io::{read_run, write_run, Metadata, RunPaths, SchmidtMeta};
use crate::scenario::{Scenario, ANALYSIS_HALF_EXTENT};

/// A rendered map with its sidecar.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub map: IntensityMap,
    pub metadata: Metadata,
}

/// Renders a scenario in UnitBound units.
pub fn simulate(scenario: &Scenario) -> Result<Simulation> {
    let s = scenario.sources();
    let map = render_map(
        &s,
        &scenario.geometry,
        scenario.window,
        scenario.resolution,
        scenario.resolution,
        Normalization::UnitBound,
    )?;
    let metadata = Metadata::describe(
        &scenario.state,
        &s,
        &scenario.geometry,
        &map,
        Some(&scenario.name),
    );
    Ok(Simulation { map, metadata })
}

pub fn simulate_to_files(scenario: &Scenario, prefix: &Path) -> Result<RunPaths> {
    let sim = simulate(scenario)?;
    write_run(prefix, &sim.map, &sim.metadata)
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub scenario: Option<String>,
    /// Region the symmetry search ran on.
    pub analysis_window: Window,
    pub symmetry: Vec<SymmetryReport>,
    /// Exact-field contour measurement; present for θ = π/4 amplitude sources.
    pub axial_ratio: Option<AxialRatioResult>,
    /// Why the axial ratio is missing, when it was applicable but failed.
    pub axial_ratio_error: Option<String>,
    /// Contour half-lengths read off the rendered grid.
    pub map_diagonals: Option<DiagonalLengths>,
    pub k_estimate: Option<f64>,
    pub schmidt: SchmidtMeta,
    pub classification: StateClass,
}

impl AnalysisReport {
    pub fn symmetry_for(&self, o: crate::analysis::Orientation) -> Option<&SymmetryReport> {
        self.symmetry.iter().find(|r| r.orientation == o)
    }
}

/// Analyzes a map using only what its metadata records.
///
/// Symmetry axes are searched on the central ±0.03 m of the map. Contour
/// failures (such as a degenerate contour near K = 2) are reported in
/// `axial_ratio_error` rather than returned as errors.
pub fn analyze(map: &IntensityMap, meta: &Metadata) -> Result<AnalysisReport> {
    let central = map.crop_centered(ANALYSIS_HALF_EXTENT);
    let symmetry = symmetry_reports(&central)?;

    let g = meta.screen_geometry()?;
    let [n1, n2] = meta.sources.row_norms();
    let applicable = meta.method == Method::Amplitude && (n1 - n2).abs() <= 1e-9 && n1 > 0.0;
    let (axial_ratio, axial_ratio_error, map_diagonals) = if applicable {
        let (ar, err) = match axial_ratio_numeric(&meta.sources, &g) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let md = if map.normalization == Normalization::UnitBound {
            map_diagonal_half_lengths(&central, HALF_LEVEL).ok()
        } else {
            None
        };
        (ar, err, md)
    } else {
        (None, None, None)
    };

    Ok(AnalysisReport {
        scenario: meta.scenario.clone(),
        analysis_window: central.window,
        symmetry,
        k_estimate: axial_ratio.map(|r| r.k_estimate),
        axial_ratio,
        axial_ratio_error,
        map_diagonals,
        schmidt: meta.schmidt,
        classification: meta.schmidt.class,
    })
}

pub fn analyze_files(prefix: &Path) -> Result<AnalysisReport> {
    let (map, meta) = read_run(prefix)?;
    analyze(&map, &meta)
}

/// Renders a scenario on the analysis grid and analyzes it.
pub fn analyze_scenario(scenario: &Scenario) -> Result<AnalysisReport> {
    let sim = simulate(&scenario.clone().with_analysis_grid())?;
    analyze(&sim.map, &sim.metadata)
}
