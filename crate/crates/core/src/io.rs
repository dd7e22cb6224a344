//! On-disk formats: 16-bit PGM previews, raw float grids, JSON sidecars and
//! the axial-ratio CSV.
//!
//! A run written under prefix `runs/fig6a` consists of `runs/fig6a.pgm`,
//! `runs/fig6a.f64` and `runs/fig6a.json`. The float grid is the analysis
//! source of truth; the PGM is for viewing only.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::CurveRow;
use crate::beam::{classify, schmidt_number, BeamState, StateClass, DEFAULT_CLASSIFY_TOL};
use crate::decomposition::{Method, SourcePhasorMatrix};
use crate::error::{Error, Result};
use crate::interference::{IntensityMap, Normalization, ScreenGeometry, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    pub theta: f64,
    pub phi_x: f64,
    pub phi_y: f64,
    pub delta_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmidtMeta {
    pub k: f64,
    pub eigenvalues: [f64; 2],
    pub k_prime: f64,
    pub class: StateClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryMeta {
    pub wavelength: f64,
    pub a: f64,
    pub b: f64,
    pub e0: f64,
    pub k: f64,
}

/// JSON sidecar describing a rendered map. Field order is the on-disk key
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub state: StateMeta,
    pub schmidt: SchmidtMeta,
    pub geometry: GeometryMeta,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub normalization: Normalization,
    pub peak: f64,
    pub method: Method,
    pub sources: SourcePhasorMatrix,
    pub scenario: Option<String>,
}

impl Metadata {
    pub fn describe(
        state: &BeamState,
        sources: &SourcePhasorMatrix,
        g: &ScreenGeometry,
        map: &IntensityMap,
        scenario: Option<&str>,
    ) -> Self {
        let sr = schmidt_number(state);
        Self {
            state: StateMeta {
                theta: state.theta(),
                phi_x: state.phi_x(),
                phi_y: state.phi_y(),
                delta_phi: state.delta_phi(),
            },
            schmidt: SchmidtMeta {
                k: sr.k,
                eigenvalues: sr.eigenvalues,
                k_prime: sr.k_prime,
                class: classify(&sr, DEFAULT_CLASSIFY_TOL),
            },
            geometry: GeometryMeta {
                wavelength: g.wavelength(),
                a: g.a(),
                b: g.b(),
                e0: g.e0(),
                k: g.k(),
            },
            window: map.window,
            nx: map.nx,
            ny: map.ny,
            normalization: map.normalization,
            peak: map.max(),
            method: sources.method,
            sources: *sources,
            scenario: scenario.map(str::to_string),
        }
    }

    pub fn beam_state(&self) -> Result<BeamState> {
        BeamState::new(self.state.theta, self.state.phi_x, self.state.phi_y)
            .map_err(|e| Error::Metadata(format!("state: {e}")))
    }

    pub fn screen_geometry(&self) -> Result<ScreenGeometry> {
        let g = &self.geometry;
        ScreenGeometry::new(g.wavelength, g.a, g.b, g.e0)
            .map_err(|e| Error::Metadata(format!("geometry: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Metadata(e.to_string()))
    }
}

/// Binary PGM (P5) with 16-bit big-endian samples, linearly scaled so that
/// `peak` maps to 65535. Row 0 is the top of the screen.
pub fn encode_pgm(map: &IntensityMap, peak: f64) -> Vec<u8> {
    let header = format!("P5\n{} {}\n65535\n", map.nx, map.ny);
    let mut out = Vec::with_capacity(header.len() + 2 * map.data.len());
    out.extend_from_slice(header.as_bytes());
    let scale = if peak > 0.0 { 65535.0 / peak } else { 0.0 };
    for v in &map.data {
        let q = (v * scale).round().clamp(0.0, 65535.0) as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Row-major little-endian `f64` samples.
pub fn encode_grid(map: &IntensityMap) -> Vec<u8> {
    map.data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_grid(bytes: &[u8], nx: usize, ny: usize) -> Result<Vec<f64>> {
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Metadata(format!("grid size {nx}×{ny} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Metadata(format!(
            "grid file holds {} bytes, metadata promises {nx}×{ny} samples ({expected} bytes)",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Validation(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunPaths {
    pub pgm: PathBuf,
    pub grid: PathBuf,
    pub metadata: PathBuf,
}

impl RunPaths {
    pub fn for_prefix(prefix: &Path) -> Self {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        Self {
            pgm: with(".pgm"),
            grid: with(".f64"),
            metadata: with(".json"),
        }
    }
}

/// Writes the three files of a run. Everything is encoded before the first
/// write.
pub fn write_run(prefix: &Path, map: &IntensityMap, meta: &Metadata) -> Result<RunPaths> {
    let paths = RunPaths::for_prefix(prefix);
    let pgm = encode_pgm(map, meta.peak);
    let grid = encode_grid(map);
    let json = meta.to_json()?;
    write_atomic(&paths.grid, &grid)?;
    write_atomic(&paths.pgm, &pgm)?;
    write_atomic(&paths.metadata, json.as_bytes())?;
    Ok(paths)
}

/// Reads a run back from its float grid and metadata.
pub fn read_run(prefix: &Path) -> Result<(IntensityMap, Metadata)> {
    let paths = RunPaths::for_prefix(prefix);
    let text = fs::read_to_string(&paths.metadata)?;
    let meta = Metadata::from_json(&text)?;
    let bytes = fs::read(&paths.grid)?;
    let data = decode_grid(&bytes, meta.nx, meta.ny)?;
    let map = IntensityMap::from_data(meta.window, meta.nx, meta.ny, data, meta.normalization)
        .map_err(|e| Error::Metadata(e.to_string()))?;
    Ok((map, meta))
}

/// `v` rounded to 9 significant digits, printed in shortest form.
pub fn sig9(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn curve_csv(rows: &[CurveRow], analytic_only: bool) -> String {
    let mut out = String::from(if analytic_only {
        "K,R_analytic\n"
    } else {
        "K,R_analytic,R_numeric\n"
    });
    for row in rows {
        out.push_str(&sig9(row.k));
        out.push(',');
        out.push_str(&sig9(row.r_analytic));
        if !analytic_only {
            out.push(',');
            if let Some(r) = row.r_numeric {
                out.push_str(&sig9(r));
            }
        }
        out.push('\n');
    }
    out
}
