//! The implicit time-stepping scheme and its variants.
//!
//! One step from a set with signed distance `d_E` solves the obstacle TV-L2
//! problem with input `d_E` and takes the strict sublevel `{u < 0}` (the
//! minimal solution), then rebuilds the signed distance of the new set. The
//! variants differ only in how the obstacle is supplied:
//!
//! * `Obstacle` - a fixed constraint set, `v = d_Omega`;
//! * `Unconstrained` - no constraint (plain mean curvature flow);
//! * `Forcing` - no constraint, but the input is raised by `C*h` outside
//!   `Omega`, which reproduces the constrained step for `C` large enough;
//! * `PcfFrozen` - obstacle frozen at the initial set, `v = d_{E_0}`;
//! * `PcfRefresh` - obstacle refreshed to the previous set each step.
//!
//! The two PCF iterations realize positive curvature flow `v = max(kappa, 0)`
//! and produce identical evolutions up to cells where the minimizer vanishes
//! to machine precision; those cells are logged as ambiguous rather than
//! silently resolved.

use crate::analysis::{delta_ball_estimate, StepDiagnostics};
use crate::contour::{curvature_on_contour, extract_contour, hausdorff, perimeter_tv, area_sublevel};
use crate::distance::{redistance, signed_distance, DistanceCap};
use crate::error::{Error, Result};
use crate::grid::{Point, RegionMask, ScalarField};
use crate::tv::{forcing_input, tv_prox_full, ObstacleSpec, ProxParams, ProxResult, WarmStart};
use serde::{Deserialize, Serialize};

/// Threshold under which `|u|` marks a cell as ambiguous between the minimal
/// (`{u < 0}`) and maximal (`{u <= 0}`) solutions.
pub const AMBIGUOUS_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowVariant {
    Obstacle,
    Unconstrained,
    Forcing,
    PcfFrozen,
    PcfRefresh,
}

/// Configuration of a flow run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Time step of the scheme.
    pub h: f64,
    /// Final time; the run takes `floor(T/h)` steps.
    pub t_final: f64,
    pub prox: ProxParams,
    /// Distance cap; `None` means the grid diameter (no effective cap).
    pub cap: Option<f64>,
    /// Forcing constant for the `Forcing` variant; `None` picks the default
    /// `2 n / R_est` with `n = 2` from the obstacle's ball-radius estimate.
    pub forcing_c: Option<f64>,
    pub variant: FlowVariant,
}

impl FlowConfig {
    pub fn new(variant: FlowVariant, h: f64, t_final: f64) -> Self {
        FlowConfig { h, t_final, prox: ProxParams::new(h), cap: None, forcing_c: None, variant }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= self.t_final) {
            return Err(Error::Validation(format!(
                "need 0 < h <= T, got h = {}, T = {}",
                self.h, self.t_final
            )));
        }
        if self.variant == FlowVariant::Forcing {
            match self.forcing_c {
                Some(c) if c > 0.0 => {}
                Some(c) => {
                    return Err(Error::Validation(format!("forcing constant must be > 0, got {c}")))
                }
                None => {}
            }
        }
        Ok(())
    }

    fn cap_for(&self, grid: &crate::grid::Grid2) -> DistanceCap {
        match self.cap {
            Some(c) => DistanceCap::new(c).unwrap_or_else(|_| DistanceCap::uncapped(grid)),
            None => DistanceCap::uncapped(grid),
        }
    }

    fn prox_params(&self) -> ProxParams {
        let mut p = self.prox;
        p.h = self.h;
        p
    }
}

/// Output of a single scheme step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub mask: RegionMask,
    /// Redistanced signed distance of the new set; the constant `+cap` field
    /// after extinction.
    pub dist: ScalarField,
    pub prox: ProxResult,
    /// Cells where `|u| < 1e-9 * scale`: minimal and maximal solutions may
    /// disagree there.
    pub ambiguous: Vec<usize>,
    pub extinct: bool,
}

fn threshold_and_redistance(
    prox: ProxResult,
    input_scale: f64,
    cap: DistanceCap,
) -> Result<StepOutcome> {
    if !prox.converged {
        return Err(Error::NotConverged { partial: Box::new(prox) });
    }
    let grid = prox.u.grid;
    let tol = AMBIGUOUS_REL * input_scale;
    let mask = prox.u.sublevel_mask(0.0);
    let ambiguous: Vec<usize> = prox
        .u
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() < tol)
        .map(|(k, _)| k)
        .collect();
    if mask.is_empty_set() {
        let dist = ScalarField::constant(grid, cap.value());
        return Ok(StepOutcome { mask, dist, prox, ambiguous, extinct: true });
    }
    let dist = redistance(&prox.u, cap)?;
    // Extinction also triggers when the set is thinner than one cell.
    let s = grid.spacing;
    let depth = dist
        .values
        .iter()
        .zip(mask.inside.iter())
        .filter(|(_, &ins)| ins)
        .fold(0.0f64, |m, (&d, _)| m.max(-d));
    let extinct = depth < s;
    Ok(StepOutcome { mask, dist, prox, ambiguous, extinct })
}

/// One constrained (or unconstrained) step of the scheme: solve the prox with
/// input `d_E`, threshold strictly at zero, redistance.
pub fn step(d_e: &ScalarField, obstacle: &ObstacleSpec, cfg: &FlowConfig) -> Result<StepOutcome> {
    step_warm(d_e, obstacle, cfg, None)
}

/// As [`step`] but reusing the dual variable of the previous step's solve;
/// the minimizer is unchanged, only the iteration count drops.
pub fn step_warm(
    d_e: &ScalarField,
    obstacle: &ObstacleSpec,
    cfg: &FlowConfig,
    warm: Option<&WarmStart>,
) -> Result<StepOutcome> {
    let prox = tv_prox_full(d_e, obstacle, &cfg.prox_params(), warm, None)?;
    threshold_and_redistance(prox, crate::tv::tolerance_scale(d_e), cfg.cap_for(&d_e.grid))
}

/// Forcing-term step: unconstrained prox on `d_E + C h` outside `omega`. For
/// `C` at or above the obstacle's exterior-ball bound this coincides with the
/// constrained step.
pub fn step_forcing(
    d_e: &ScalarField,
    omega: &RegionMask,
    cfg: &FlowConfig,
) -> Result<StepOutcome> {
    step_forcing_warm(d_e, omega, cfg, None)
}

pub fn step_forcing_warm(
    d_e: &ScalarField,
    omega: &RegionMask,
    cfg: &FlowConfig,
    warm: Option<&WarmStart>,
) -> Result<StepOutcome> {
    let c = cfg
        .forcing_c
        .ok_or_else(|| Error::Validation("forcing step needs a forcing constant".into()))?;
    let f = forcing_input(d_e, omega, c, cfg.h)?;
    let prox = tv_prox_full(&f, &ObstacleSpec::Unconstrained, &cfg.prox_params(), warm, None)?;
    threshold_and_redistance(prox, crate::tv::tolerance_scale(&f), cfg.cap_for(&d_e.grid))
}

/// One state of a trajectory.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub mask: RegionMask,
    pub dist: ScalarField,
    pub diagnostics: StepDiagnostics,
}

/// Time-indexed evolution produced by iterating the scheme.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    pub extinction_step: Option<usize>,
    pub warnings: Vec<String>,
}

impl FlowTrajectory {
    pub fn final_state(&self) -> &FlowState {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// Default forcing constant `2 n / R_est` (n = 2) from the obstacle's ball
/// radius estimate.
pub fn default_forcing_constant(d_omega: &ScalarField) -> Result<f64> {
    let r_est = delta_ball_estimate(d_omega)?;
    Ok(4.0 / r_est)
}

/// Run the configured flow from `e0`. `omega` is required for the Obstacle
/// and Forcing variants and ignored by the others (the PCF variants build
/// their own obstacle from `e0`).
pub fn run(e0: &RegionMask, omega: Option<&RegionMask>, cfg: &FlowConfig) -> Result<FlowTrajectory> {
    cfg.validate()?;
    let grid = e0.grid;
    let s = grid.spacing;
    let cap = cfg.cap_for(&grid);
    let mut warnings = Vec::new();

    let omega = match cfg.variant {
        FlowVariant::Obstacle | FlowVariant::Forcing => Some(
            omega.ok_or_else(|| Error::Validation("this variant needs an obstacle set".into()))?,
        ),
        _ => None,
    };
    if let Some(om) = omega {
        if !om.grid.same_as(&grid) {
            return Err(Error::GridMismatch("obstacle grid differs from initial set".into()));
        }
        if !e0.subset_of(om, &[]) {
            return Err(Error::Validation("initial set not contained in obstacle".into()));
        }
    }

    // Grid/time-step coupling guard: discrete TV pins fronts whose per-step
    // motion falls below cell resolution.
    if (2.0 * cfg.h).sqrt() < 3.0 * s {
        warnings.push("pinning regime: sqrt(2h) < 3 spacing".to_string());
    }

    let d_e0 = signed_distance(e0, cap);
    let padding = 10.0 * cfg.h.sqrt();
    if front_boundary_distance(&d_e0) < padding {
        warnings.push(format!(
            "padding band below 10*sqrt(h) = {padding:.4} between front and grid boundary"
        ));
    }

    // Obstacle distance: computed once here for the fixed-obstacle variants,
    // refreshed inside the loop for PcfRefresh.
    let d_omega_fixed: Option<ScalarField> = match cfg.variant {
        FlowVariant::Obstacle => Some(signed_distance(omega.unwrap(), cap)),
        FlowVariant::PcfFrozen | FlowVariant::PcfRefresh => Some(d_e0.clone()),
        _ => None,
    };
    let forcing_c = if cfg.variant == FlowVariant::Forcing {
        let d_om = signed_distance(omega.unwrap(), cap);
        Some(match cfg.forcing_c {
            Some(c) => c,
            None => default_forcing_constant(&d_om)?,
        })
    } else {
        None
    };
    let mut cfg_run = cfg.clone();
    cfg_run.forcing_c = forcing_c;

    let n_steps = (cfg.t_final / cfg.h + 1e-9).floor() as usize;
    let mut times = vec![0.0];
    let mut states = vec![FlowState {
        mask: e0.clone(),
        dist: d_e0.clone(),
        diagnostics: diagnostics_for(None, &d_e0, e0, d_omega_fixed.as_ref(), 0.0, 0, cfg.h),
    }];
    let mut extinction_step = None;

    let mut d_e = d_e0;
    let mut warm: Option<WarmStart> = None;
    for n in 1..=n_steps {
        let d_obstacle: Option<&ScalarField> = match cfg.variant {
            FlowVariant::Obstacle | FlowVariant::PcfFrozen => d_omega_fixed.as_ref(),
            FlowVariant::PcfRefresh => Some(&d_e),
            _ => None,
        };
        let outcome = match cfg.variant {
            FlowVariant::Forcing => {
                step_forcing_warm(&d_e, omega.unwrap(), &cfg_run, warm.as_ref())
            }
            FlowVariant::Unconstrained => {
                step_warm(&d_e, &ObstacleSpec::Unconstrained, &cfg_run, warm.as_ref())
            }
            _ => {
                let v = ObstacleSpec::Constrained(d_obstacle.unwrap().clone());
                step_warm(&d_e, &v, &cfg_run, warm.as_ref())
            }
        }
        .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;

        let diagnostics = diagnostics_for(
            Some(&d_e),
            &outcome.dist,
            &outcome.mask,
            d_obstacle,
            outcome.prox.gap,
            outcome.ambiguous.len(),
            cfg.h,
        );
        times.push(n as f64 * cfg.h);
        let extinct = outcome.extinct;
        warm = Some(WarmStart {
            u: outcome.prox.u.values.clone(),
            px: outcome.prox.z.px.clone(),
            py: outcome.prox.z.py.clone(),
        });
        d_e = outcome.dist.clone();
        states.push(FlowState { mask: outcome.mask, dist: outcome.dist, diagnostics });
        if extinct {
            extinction_step = Some(n);
            break;
        }
    }

    Ok(FlowTrajectory { times, states, extinction_step, warnings })
}

/// Run one of the two positive-curvature-flow iterations.
pub fn pcf_run(e0: &RegionMask, cfg: &FlowConfig) -> Result<FlowTrajectory> {
    match cfg.variant {
        FlowVariant::PcfFrozen | FlowVariant::PcfRefresh => run(e0, None, cfg),
        _ => Err(Error::Validation("pcf_run needs a PCF variant".into())),
    }
}

/// Minimum distance between the zero level set and the grid boundary,
/// measured at the hull cells of the distance field.
fn front_boundary_distance(d: &ScalarField) -> f64 {
    let g = &d.grid;
    let mut best = f64::INFINITY;
    for i in 0..g.nx {
        best = best.min(d.at(i, 0).abs()).min(d.at(i, g.ny - 1).abs());
    }
    for j in 0..g.ny {
        best = best.min(d.at(0, j).abs()).min(d.at(g.nx - 1, j).abs());
    }
    best
}

fn diagnostics_for(
    prev_dist: Option<&ScalarField>,
    dist: &ScalarField,
    mask: &RegionMask,
    d_omega: Option<&ScalarField>,
    prox_gap: f64,
    ambiguous_cells: usize,
    h: f64,
) -> StepDiagnostics {
    let s = dist.grid.spacing;
    let contour = extract_contour(dist, 0.0).unwrap_or_default();
    let area = area_sublevel(dist, 0.0);
    let perimeter = contour.total_length();
    let tv_perim = perimeter_tv(mask);

    let mut hausdorff_motion = 0.0;
    if let Some(prev) = prev_dist {
        if let Ok(prev_contour) = extract_contour(prev, 0.0) {
            if !prev_contour.is_empty() && !contour.is_empty() {
                if let Ok(d) = hausdorff(&prev_contour, &contour) {
                    hausdorff_motion = d;
                }
            }
        }
    }

    // Residual of the curvature identity kappa = -d_E/h on the new front,
    // excluding samples near the obstacle contact set.
    let (mut median, mut p95) = (0.0, 0.0);
    if let Some(prev) = prev_dist {
        let ks = curvature_on_contour(dist, &contour);
        let mut residuals: Vec<f64> = ks
            .samples
            .iter()
            .filter(|(p, _)| match d_omega {
                Some(dom) => dom.interp(*p).abs() > 3.0 * s,
                None => true,
            })
            .map(|(p, k): &(Point, f64)| (k + prev.interp(*p) / h).abs())
            .collect();
        if !residuals.is_empty() {
            residuals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            median = residuals[residuals.len() / 2];
            p95 = residuals[((residuals.len() as f64 * 0.95) as usize).min(residuals.len() - 1)];
        }
    }

    let delta_ball = if contour.is_empty() {
        0.0
    } else {
        delta_ball_estimate(dist).unwrap_or(0.0)
    };

    StepDiagnostics {
        area,
        perimeter,
        perimeter_tv: tv_perim,
        hausdorff_motion,
        curvature_residual_median: median,
        curvature_residual_p95: p95,
        delta_ball,
        prox_gap,
        ambiguous_cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2;

    fn disk_mask(n: usize, cx: f64, cy: f64, r: f64) -> RegionMask {
        let g = Grid2::square(n, 1.0).unwrap();
        RegionMask::from_fn(g, |x, y| (x - cx).hypot(y - cy) < r)
    }

    fn mean_front_radius(dist: &ScalarField, cx: f64, cy: f64) -> f64 {
        let c = extract_contour(dist, 0.0).unwrap();
        let mut acc = 0.0;
        let mut n = 0usize;
        for p in c.vertices() {
            acc += (p.x - cx).hypot(p.y - cy);
            n += 1;
        }
        acc / n as f64
    }

    #[test]
    fn one_step_disk_radius_follows_curvature_identity() {
        let n = 256;
        let e0 = disk_mask(n, 0.5, 0.5, 0.3);
        let h = 1e-3;
        let cfg = FlowConfig::new(FlowVariant::Unconstrained, h, h);
        let g = e0.grid;
        let d0 = signed_distance(&e0, DistanceCap::uncapped(&g));
        let out = step(&d0, &ObstacleSpec::Unconstrained, &cfg).unwrap();
        assert!(!out.extinct);
        let measured = mean_front_radius(&out.dist, 0.5, 0.5);
        let expect = 0.5 * (0.3 + (0.09f64 - 4.0 * h).sqrt());
        let tol = (0.01 * expect).max(2.0 * g.spacing);
        assert!(
            (measured - expect).abs() < tol,
            "one-step radius {measured} vs {expect}"
        );
    }

    #[test]
    fn flat_strip_is_stationary() {
        let n = 128;
        let g = Grid2::square(n, 1.0).unwrap();
        let e0 = RegionMask::from_fn(g, |_, y| (y - 0.5).abs() < 0.2);
        let h = 5e-4;
        let cfg = FlowConfig::new(FlowVariant::Unconstrained, h, h);
        let d0 = signed_distance(&e0, DistanceCap::uncapped(&g));
        let out = step(&d0, &ObstacleSpec::Unconstrained, &cfg).unwrap();
        let diff = crate::grid::symmetric_difference_area(&e0, &out.mask).unwrap();
        // Unchanged within one cell along the two front lines.
        assert!(diff <= 2.0 * 1.0 * g.spacing, "strip moved, symdiff {diff}");
    }

    #[test]
    fn nested_inputs_give_nested_steps() {
        let n = 96;
        let g = Grid2::square(n, 1.0).unwrap();
        let inner = RegionMask::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) < 0.18);
        let outer = RegionMask::from_fn(g, |x, y| {
            (x - 0.5).hypot(y - 0.5) < 0.26 || (x - 0.62).hypot(y - 0.58) < 0.2
        });
        let cfg = FlowConfig::new(FlowVariant::Unconstrained, 2e-4, 2e-4);
        let cap = DistanceCap::uncapped(&g);
        let d_in = signed_distance(&inner, cap);
        let d_out = signed_distance(&outer, cap);
        let s_in = step(&d_in, &ObstacleSpec::Unconstrained, &cfg).unwrap();
        let s_out = step(&d_out, &ObstacleSpec::Unconstrained, &cfg).unwrap();
        let mut ambiguous = s_in.ambiguous.clone();
        ambiguous.extend_from_slice(&s_out.ambiguous);
        assert!(s_in.mask.subset_of(&s_out.mask, &ambiguous));
    }

    #[test]
    fn constrained_step_stays_inside_obstacle() {
        let n = 96;
        let g = Grid2::square(n, 1.0).unwrap();
        let e0 = RegionMask::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) < 0.22);
        let omega = RegionMask::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) < 0.25);
        let cap = DistanceCap::uncapped(&g);
        let cfg = FlowConfig::new(FlowVariant::Obstacle, 2e-4, 2e-4);
        let d_e = signed_distance(&e0, cap);
        let d_om = signed_distance(&omega, cap);
        let out = step(&d_e, &ObstacleSpec::Constrained(d_om), &cfg).unwrap();
        assert!(out.mask.subset_of(&omega, &[]), "step left the obstacle");
    }

    #[test]
    fn run_shrinking_disk_tracks_analytic_area() {
        let n = 128;
        let e0 = disk_mask(n, 0.5, 0.5, 0.3);
        let h = 4e-4;
        let t = 0.01;
        let cfg = FlowConfig::new(FlowVariant::Unconstrained, h, t);
        let traj = run(&e0, None, &cfg).unwrap();
        assert_eq!(traj.states.len(), (t / h) as usize + 1);
        let area = traj.final_state().diagnostics.area;
        let expect = std::f64::consts::PI * (0.09 - 2.0 * t);
        assert!(
            (area - expect).abs() / expect < 0.03,
            "area {area} vs analytic {expect}"
        );
        assert!(traj.extinction_step.is_none());
    }

    #[test]
    fn run_rejects_initial_set_outside_obstacle() {
        let n = 64;
        let e0 = disk_mask(n, 0.5, 0.5, 0.2);
        let omega = disk_mask(n, 0.6, 0.5, 0.15);
        let cfg = FlowConfig::new(FlowVariant::Obstacle, 1e-4, 1e-3);
        let err = run(&e0, Some(&omega), &cfg).unwrap_err();
        assert!(err.to_string().contains("initial set not contained in obstacle"));
    }

    #[test]
    fn tiny_disk_goes_extinct() {
        let n = 128;
        let e0 = disk_mask(n, 0.5, 0.5, 0.06);
        // T past the extinction time r^2/2 = 1.8e-3.
        let cfg = FlowConfig::new(FlowVariant::Unconstrained, 2e-4, 4e-3);
        let traj = run(&e0, None, &cfg).unwrap();
        assert!(traj.extinction_step.is_some(), "disk should vanish");
        assert!(traj.states.len() < (4e-3 / 2e-4) as usize + 1);
    }

    #[test]
    fn pinning_warning_fires() {
        let n = 64;
        let e0 = disk_mask(n, 0.5, 0.5, 0.25);
        let cfg = FlowConfig::new(FlowVariant::Unconstrained, 1e-6, 2e-6);
        let traj = run(&e0, None, &cfg).unwrap();
        assert!(traj.warnings.iter().any(|w| w.contains("pinning")));
    }

    #[test]
    fn pcf_single_step_equals_step_with_initial_obstacle() {
        let n = 96;
        let g = Grid2::square(n, 1.0).unwrap();
        let e0 = RegionMask::from_fn(g, |x, y| {
            (x - 0.42).hypot(y - 0.5) < 0.16 || (x - 0.6).hypot(y - 0.55) < 0.14
        });
        let h = 2e-4;
        let frozen = pcf_run(&e0, &FlowConfig::new(FlowVariant::PcfFrozen, h, h)).unwrap();
        let refresh = pcf_run(&e0, &FlowConfig::new(FlowVariant::PcfRefresh, h, h)).unwrap();
        let cap = DistanceCap::uncapped(&g);
        let d0 = signed_distance(&e0, cap);
        let direct = step(
            &d0,
            &ObstacleSpec::Constrained(d0.clone()),
            &FlowConfig::new(FlowVariant::Obstacle, h, h),
        )
        .unwrap();
        assert_eq!(frozen.states[1].mask.inside, direct.mask.inside);
        assert_eq!(refresh.states[1].mask.inside, direct.mask.inside);
    }
}
