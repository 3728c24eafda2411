//! Scenario presets, JSON configuration, and run artifacts (manifest,
//! per-step contour CSV and mask PGM exports).

use crate::distance::{signed_distance, DistanceCap};
use crate::error::{Error, Result};
use crate::grid::{Grid2, RegionMask};
use crate::scheme::{run, FlowConfig, FlowTrajectory, FlowVariant};
use crate::tv::ProxParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Physical width of the domain; spacing = extent / nx.
    pub extent: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid2> {
        let spacing = self.extent / self.nx as f64;
        Grid2::new(self.nx, self.ny, spacing, (0.5 * spacing, 0.5 * spacing))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Disk { center: [f64; 2], radius: f64 },
    Strip { y0: f64, y1: f64 },
    TwoDisks { centers: [[f64; 2]; 2], radii: [f64; 2] },
    Dumbbell { center: [f64; 2], radius: f64, separation: f64, neck_width: f64 },
    FromPgm { path: PathBuf },
}

impl InitialSpec {
    pub fn build(&self, grid: Grid2) -> Result<RegionMask> {
        match self {
            InitialSpec::Disk { center, radius } => {
                let (cx, cy, r) = (center[0], center[1], *radius);
                Ok(RegionMask::from_fn(grid, |x, y| (x - cx).hypot(y - cy) < r))
            }
            InitialSpec::Strip { y0, y1 } => {
                let (a, b) = (*y0, *y1);
                Ok(RegionMask::from_fn(grid, |_, y| y > a && y < b))
            }
            InitialSpec::TwoDisks { centers, radii } => {
                let c = *centers;
                let r = *radii;
                Ok(RegionMask::from_fn(grid, |x, y| {
                    (x - c[0][0]).hypot(y - c[0][1]) < r[0]
                        || (x - c[1][0]).hypot(y - c[1][1]) < r[1]
                }))
            }
            InitialSpec::Dumbbell { center, radius, separation, neck_width } => {
                Ok(dumbbell_mask(grid, *center, *radius, *separation, *neck_width))
            }
            InitialSpec::FromPgm { path } => {
                let mask = crate::io::read_mask_pgm(path, grid.spacing, grid.origin)?;
                if !mask.grid.same_as(&grid) {
                    return Err(Error::Validation(format!(
                        "PGM size {}x{} does not match grid {}x{}",
                        mask.grid.nx, mask.grid.ny, grid.nx, grid.ny
                    )));
                }
                Ok(mask)
            }
        }
    }
}

/// Two disks joined by a horizontal neck; the canonical nonconvex test set.
pub fn dumbbell_mask(
    grid: Grid2,
    center: [f64; 2],
    radius: f64,
    separation: f64,
    neck_width: f64,
) -> RegionMask {
    let (cx, cy) = (center[0], center[1]);
    let half_sep = 0.5 * separation;
    let half_neck = 0.5 * neck_width;
    RegionMask::from_fn(grid, |x, y| {
        let left = (x - (cx - half_sep)).hypot(y - cy) < radius;
        let right = (x - (cx + half_sep)).hypot(y - cy) < radius;
        let neck = (x - cx).abs() < half_sep && (y - cy).abs() < half_neck;
        left || right || neck
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObstacleSpecConfig {
    None,
    Box { min: [f64; 2], max: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
    DilateInitial { rho: f64 },
    EqualsInitial,
    FromPgm { path: PathBuf },
}

impl ObstacleSpecConfig {
    pub fn build(&self, grid: Grid2, initial: &RegionMask) -> Result<Option<RegionMask>> {
        match self {
            ObstacleSpecConfig::None => Ok(None),
            ObstacleSpecConfig::Box { min, max } => {
                let (x0, y0, x1, y1) = (min[0], min[1], max[0], max[1]);
                Ok(Some(RegionMask::from_fn(grid, |x, y| {
                    x > x0 && x < x1 && y > y0 && y < y1
                })))
            }
            ObstacleSpecConfig::Disk { center, radius } => {
                let (cx, cy, r) = (center[0], center[1], *radius);
                Ok(Some(RegionMask::from_fn(grid, |x, y| (x - cx).hypot(y - cy) < r)))
            }
            ObstacleSpecConfig::DilateInitial { rho } => {
                let d = signed_distance(initial, DistanceCap::uncapped(&grid));
                let rho = *rho;
                Ok(Some(RegionMask::new(
                    grid,
                    d.values.iter().map(|&v| v < rho).collect(),
                )?))
            }
            ObstacleSpecConfig::EqualsInitial => Ok(Some(initial.clone())),
            ObstacleSpecConfig::FromPgm { path } => {
                let mask = crate::io::read_mask_pgm(path, grid.spacing, grid.origin)?;
                Ok(Some(mask))
            }
        }
    }
}

/// A full scenario: geometry, constraint, variant, and numerics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    #[serde(default = "default_obstacle")]
    pub obstacle: ObstacleSpecConfig,
    pub variant: FlowVariant,
    pub h: f64,
    pub t_final: f64,
    #[serde(default)]
    pub prox: Option<ProxParams>,
    #[serde(default)]
    pub cap: Option<f64>,
    #[serde(default)]
    pub forcing_c: Option<f64>,
}

fn default_obstacle() -> ObstacleSpecConfig {
    ObstacleSpecConfig::None
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("config parse: {e}")))
    }

    pub fn flow_config(&self) -> FlowConfig {
        let mut prox = self.prox.unwrap_or_else(|| ProxParams::new(self.h));
        prox.h = self.h;
        FlowConfig {
            h: self.h,
            t_final: self.t_final,
            prox,
            cap: self.cap,
            forcing_c: self.forcing_c,
            variant: self.variant,
        }
    }

    /// Build the geometry and run the configured flow.
    pub fn execute(&self) -> Result<(FlowTrajectory, RegionMask, Option<RegionMask>)> {
        let grid = self.grid.build()?;
        let initial = self.initial.build(grid)?;
        if initial.is_empty_set() {
            return Err(Error::Validation("initial set is empty".into()));
        }
        let obstacle = self.obstacle.build(grid, &initial)?;
        let cfg = self.flow_config();
        let traj = match self.variant {
            FlowVariant::PcfFrozen | FlowVariant::PcfRefresh => {
                crate::scheme::pcf_run(&initial, &cfg)?
            }
            _ => run(&initial, obstacle.as_ref(), &cfg)?,
        };
        Ok((traj, initial, obstacle))
    }
}

/// Manifest entry for one emitted file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

/// Per-step scalar diagnostics as serialized into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestStep {
    pub step: usize,
    pub time: f64,
    #[serde(flatten)]
    pub diagnostics: crate::analysis::StepDiagnostics,
    pub contour_file: String,
    pub mask_file: String,
}

/// Self-describing run record: config echo with all defaults materialized,
/// per-step diagnostics, extinction info, and content hashes of every
/// artifact.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub scenario: Scenario,
    pub config: FlowConfig,
    pub grid: Grid2,
    pub steps: Vec<ManifestStep>,
    pub extinction_step: Option<usize>,
    pub warnings: Vec<String>,
    pub files: Vec<ManifestFile>,
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

/// Write per-step artifacts and the manifest for a finished run.
pub fn write_run_artifacts(
    out_dir: &Path,
    scenario: &Scenario,
    traj: &FlowTrajectory,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let mut steps = Vec::new();
    let mut files = Vec::new();
    for (n, state) in traj.states.iter().enumerate() {
        let time = traj.times[n];
        let contour_name = format!("step_{n}_t_{time:.6}.csv");
        let mask_name = format!("step_{n}_t_{time:.6}.pgm");
        let contour = crate::contour::extract_contour(&state.dist, 0.0).unwrap_or_default();
        crate::io::write_contour_csv(&out_dir.join(&contour_name), &contour)?;
        crate::io::write_mask_pgm(&out_dir.join(&mask_name), &state.mask)?;
        for name in [&contour_name, &mask_name] {
            files.push(ManifestFile {
                path: name.clone(),
                sha256: sha256_hex(&out_dir.join(name))?,
            });
        }
        steps.push(ManifestStep {
            step: n,
            time,
            diagnostics: state.diagnostics.clone(),
            contour_file: contour_name,
            mask_file: mask_name,
        });
    }
    let manifest = Manifest {
        scenario: scenario.clone(),
        config: scenario.flow_config(),
        grid: scenario.grid.build()?,
        steps,
        extinction_step: traj.extinction_step,
        warnings: traj.warnings.clone(),
        files,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Format(format!("manifest serialize: {e}")))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Minimal manifest view used by `compare`.
#[derive(Debug, Deserialize)]
pub struct ManifestView {
    pub grid: Grid2,
    pub steps: Vec<ManifestStepView>,
}

#[derive(Debug, Deserialize)]
pub struct ManifestStepView {
    pub step: usize,
    pub time: f64,
    pub mask_file: String,
}

pub fn read_manifest(path: &Path) -> Result<ManifestView> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("manifest parse: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_scenario_round_trips_through_json() {
        let text = r#"{
            "name": "disk",
            "grid": {"nx": 64, "ny": 64, "extent": 1.0},
            "initial": {"kind": "disk", "center": [0.5, 0.5], "radius": 0.3},
            "obstacle": {"kind": "none"},
            "variant": "unconstrained",
            "h": 1e-3,
            "t_final": 2e-3
        }"#;
        let sc = Scenario::from_json(text).unwrap();
        assert_eq!(sc.name, "disk");
        let (traj, initial, obstacle) = sc.execute().unwrap();
        assert!(obstacle.is_none());
        assert_eq!(traj.states.len(), 3);
        assert!(initial.count() > 0);
    }

    #[test]
    fn dumbbell_mask_has_neck() {
        let g = Grid2::square(128, 1.0).unwrap();
        let m = dumbbell_mask(g, [0.5, 0.5], 0.12, 0.3, 0.04);
        // Center of the neck is inside, just above it is outside.
        assert!(m.at(64, 64));
        let j_above = ((0.5 + 0.05 - g.origin.1) / g.spacing).round() as usize;
        assert!(!m.at(64, j_above));
    }

    #[test]
    fn initial_outside_obstacle_is_rejected_at_run() {
        let text = r#"{
            "name": "bad",
            "grid": {"nx": 64, "ny": 64, "extent": 1.0},
            "initial": {"kind": "disk", "center": [0.5, 0.5], "radius": 0.3},
            "obstacle": {"kind": "disk", "center": [0.6, 0.5], "radius": 0.2},
            "variant": "obstacle",
            "h": 1e-3,
            "t_final": 2e-3
        }"#;
        let sc = Scenario::from_json(text).unwrap();
        let err = sc.execute().unwrap_err();
        assert!(err.to_string().contains("initial set not contained in obstacle"));
    }

    #[test]
    fn artifacts_and_manifest_are_written() {
        let dir = std::env::temp_dir().join("mcfobs_scenario_test");
        let _ = std::fs::remove_dir_all(&dir);
        let sc = Scenario {
            name: "strip".into(),
            grid: GridSpec { nx: 48, ny: 48, extent: 1.0 },
            initial: InitialSpec::Strip { y0: 0.3, y1: 0.7 },
            obstacle: ObstacleSpecConfig::None,
            variant: FlowVariant::Unconstrained,
            h: 1e-3,
            t_final: 2e-3,
            prox: None,
            cap: None,
            forcing_c: None,
        };
        let (traj, _, _) = sc.execute().unwrap();
        let manifest_path = write_run_artifacts(&dir, &sc, &traj).unwrap();
        let view = read_manifest(&manifest_path).unwrap();
        assert_eq!(view.steps.len(), traj.states.len());
        for step in &view.steps {
            assert!(dir.join(&step.mask_file).exists());
        }
    }
}
