//! Obstacle-constrained TV-L2 proximal solver.
//!
//! Solves the discrete problem
//!
//! ```text
//!     min_{u >= v}  sum |(Du)_ij| * s  +  1/(2h) * sum (u - f)^2 * s^2
//! ```
//!
//! with forward differences and Neumann (zero-flux) boundary. The solver is
//! an accelerated first-order primal-dual iteration; the fidelity term is
//! strongly convex, so the step sizes follow the accelerated schedule. The
//! obstacle is handled inside the primal step by a pointwise max with `v`
//! (exact projection: the constraint is separable), so every iterate is
//! feasible. Convergence is certified by the duality gap, the only computable
//! optimality criterion for this nonsmooth problem.
//!
//! Internally the energy is scaled by `1/s`, so the fidelity weight is
//! `mu = s/h` and the gradient operator uses raw neighbor differences with
//! norm bound `||D||^2 <= 8`.

use crate::error::{Error, Result};
use crate::grid::{Grid2, RegionMask, ScalarField};
use serde::{Deserialize, Serialize};

/// The lower-bound constraint: a field (the obstacle's signed distance in the
/// flow scheme) or no constraint at all. The unconstrained case is the
/// absence of the projection, not a large negative field.
#[derive(Debug, Clone)]
pub enum ObstacleSpec {
    Unconstrained,
    Constrained(ScalarField),
}

impl ObstacleSpec {
    pub fn field(&self) -> Option<&ScalarField> {
        match self {
            ObstacleSpec::Unconstrained => None,
            ObstacleSpec::Constrained(v) => Some(v),
        }
    }
}

/// Staggered dual variable: one vector per cell pairing the forward x- and
/// y-differences. The Euclidean norm of each pair stays within 1.
#[derive(Debug, Clone)]
pub struct DualField {
    pub grid: Grid2,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
}

impl DualField {
    pub fn zeros(grid: Grid2) -> Self {
        DualField { grid, px: vec![0.0; grid.len()], py: vec![0.0; grid.len()] }
    }

    pub fn max_norm(&self) -> f64 {
        self.px
            .iter()
            .zip(self.py.iter())
            .fold(0.0f64, |m, (&x, &y)| m.max(x.hypot(y)))
    }
}

/// Solver output: minimizer, dual certificate, duality gap (physical energy
/// units), and the iteration count.
#[derive(Debug, Clone)]
pub struct ProxResult {
    pub u: ScalarField,
    pub z: DualField,
    pub gap: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Time step and stopping parameters for one solve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProxParams {
    /// Time step of the implicit scheme (the fidelity weight is 1/(2h)).
    pub h: f64,
    /// Relative duality-gap tolerance: stop when gap <= tol * initial gap.
    pub tol: f64,
    pub max_iter: u32,
    /// Ratio between primal and dual steps; the product stays on the norm
    /// bound of the discrete gradient.
    pub step_ratio: f64,
}

impl ProxParams {
    pub fn new(h: f64) -> Self {
        ProxParams { h, tol: 1e-6, max_iter: 20_000, step_ratio: 1.0 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: u32) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Validation(format!("time step must be > 0, got {}", self.h)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::Validation("max_iter must be >= 1".into()));
        }
        if !(self.step_ratio > 0.0) {
            return Err(Error::Validation("step_ratio must be > 0".into()));
        }
        Ok(())
    }
}

/// Initial iterates carried over from a previous, nearby solve.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub u: Vec<f64>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
}

/// One row of the optional per-solve convergence trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub iteration: u32,
    pub primal_energy: f64,
    pub dual_energy: f64,
    pub gap: f64,
}

/// Tolerance scale for a solve: relative criteria are taken against
/// `max(||f||_inf, 1)`.
pub fn tolerance_scale(f: &ScalarField) -> f64 {
    f.max_abs().max(1.0)
}

fn check_inputs(f: &ScalarField, obstacle: &ObstacleSpec) -> Result<()> {
    if let Some(k) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("f at cell {k}")));
    }
    if let Some(v) = obstacle.field() {
        if !v.grid.same_as(&f.grid) {
            return Err(Error::GridMismatch("obstacle grid differs from f".into()));
        }
        if let Some(k) = v.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("v at cell {k}")));
        }
    }
    Ok(())
}

/// Raw-difference total variation of a value vector.
fn tv_raw(values: &[f64], nx: usize, ny: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx {
            let k = row + i;
            let gx = if i + 1 < nx { values[k + 1] - values[k] } else { 0.0 };
            let gy = if j + 1 < ny { values[k + nx] - values[k] } else { 0.0 };
            acc += gx.hypot(gy);
        }
    }
    acc
}

/// Scaled primal energy: TV(u) + mu/2 ||u - f||^2.
fn primal_energy(u: &[f64], f: &[f64], mu: f64, nx: usize, ny: usize) -> f64 {
    let mut fid = 0.0;
    for (a, b) in u.iter().zip(f.iter()) {
        let d = a - b;
        fid += d * d;
    }
    tv_raw(u, nx, ny) + 0.5 * mu * fid
}

/// Scaled dual energy for a feasible dual point (|p| <= 1): the obstacle is
/// absorbed by minimizing each cell's Lagrangian in closed form, which
/// activates the positive-part multiplier where the unconstrained minimizer
/// would dip below `v`.
fn dual_energy(
    px: &[f64],
    py: &[f64],
    f: &[f64],
    v: Option<&[f64]>,
    mu: f64,
    nx: usize,
    ny: usize,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx {
            let k = row + i;
            // g = (D* p)_k = -(div p)_k with the Neumann convention.
            let divp = px[k] - if i > 0 { px[k - 1] } else { 0.0 } + py[k]
                - if j > 0 { py[k - nx] } else { 0.0 };
            let g = -divp;
            let fk = f[k];
            match v {
                None => acc += g * fk - g * g / (2.0 * mu),
                Some(vv) => {
                    let vk = vv[k];
                    let ustar = fk - g / mu;
                    if ustar >= vk {
                        acc += g * fk - g * g / (2.0 * mu);
                    } else {
                        let d = vk - fk;
                        acc += g * vk + 0.5 * mu * d * d;
                    }
                }
            }
        }
    }
    acc
}

/// Solve the obstacle TV-L2 problem. See the module docs for the
/// discretization. Returns a non-converged result (not an error) when
/// `max_iter` is exhausted before the gap tolerance.
pub fn tv_prox(f: &ScalarField, obstacle: &ObstacleSpec, params: &ProxParams) -> Result<ProxResult> {
    tv_prox_full(f, obstacle, params, None, None)
}

/// As [`tv_prox`], starting from iterates of a previous nearby solve.
pub fn tv_prox_warm(
    f: &ScalarField,
    obstacle: &ObstacleSpec,
    params: &ProxParams,
    warm: &WarmStart,
) -> Result<ProxResult> {
    tv_prox_full(f, obstacle, params, Some(warm), None)
}

/// Full-control entry point: optional warm start and optional convergence
/// trace (one row per gap check).
pub fn tv_prox_full(
    f: &ScalarField,
    obstacle: &ObstacleSpec,
    params: &ProxParams,
    warm: Option<&WarmStart>,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<ProxResult> {
    params.validate()?;
    check_inputs(f, obstacle)?;
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let n = g.len();
    let s = g.spacing;
    let mu = s / params.h;
    let vf = obstacle.field().map(|v| v.values.as_slice());
    let fv = f.values.as_slice();

    // Feasible start: the input (projected onto the constraint), dual at rest
    // unless warm-started.
    let project = |vals: &mut [f64]| {
        if let Some(vv) = vf {
            for (u, &lo) in vals.iter_mut().zip(vv.iter()) {
                if *u < lo {
                    *u = lo;
                }
            }
        }
    };
    let mut u: Vec<f64>;
    let mut px: Vec<f64>;
    let mut py: Vec<f64>;
    match warm {
        Some(w) if w.u.len() == n && w.px.len() == n && w.py.len() == n => {
            u = w.u.clone();
            project(&mut u);
            px = w.px.clone();
            py = w.py.clone();
            // Re-establish the dual feasibility invariants: unit ball and
            // structural zeros on the hull columns/rows.
            for k in 0..n {
                let norm = px[k].hypot(py[k]);
                if norm > 1.0 {
                    px[k] /= norm;
                    py[k] /= norm;
                }
            }
            for j in 0..ny {
                px[j * nx + nx - 1] = 0.0;
            }
            for i in 0..nx {
                py[(ny - 1) * nx + i] = 0.0;
            }
        }
        _ => {
            u = fv.to_vec();
            project(&mut u);
            px = vec![0.0; n];
            py = vec![0.0; n];
        }
    }
    let mut ubar = u.clone();

    // Reference gap of the cold start: the dual at rest cancels the fidelity
    // of the projected input exactly, leaving its TV term.
    let gap0 = {
        let mut cold = fv.to_vec();
        project(&mut cold);
        tv_raw(&cold, nx, ny)
    };

    let l2 = 8.0f64;
    let mut tau = params.step_ratio / l2.sqrt();
    let mut sigma = 1.0 / (params.step_ratio * l2.sqrt());
    let gamma = mu;

    let check_every = 16u32;
    let mut iterations = 0u32;
    let mut gap = gap0;
    let mut converged = gap0 <= 0.0;
    if converged {
        gap = 0.0;
    }

    while !converged && iterations < params.max_iter {
        // Dual ascent on the extrapolated point, then projection onto the
        // unit ball.
        for j in 0..ny {
            let row = j * nx;
            for i in 0..nx {
                let k = row + i;
                let gx = if i + 1 < nx { ubar[k + 1] - ubar[k] } else { 0.0 };
                let gy = if j + 1 < ny { ubar[k + nx] - ubar[k] } else { 0.0 };
                let nx_new = px[k] + sigma * gx;
                let ny_new = py[k] + sigma * gy;
                let norm2 = nx_new * nx_new + ny_new * ny_new;
                if norm2 > 1.0 {
                    let inv = 1.0 / norm2.sqrt();
                    px[k] = nx_new * inv;
                    py[k] = ny_new * inv;
                } else {
                    px[k] = nx_new;
                    py[k] = ny_new;
                }
            }
        }
        // Primal descent: fidelity prox and obstacle projection commute into
        // one pointwise formula; extrapolate with the accelerated theta.
        let theta = 1.0 / (1.0 + 2.0 * gamma * tau).sqrt();
        let denom = 1.0 / (1.0 + tau * mu);
        match vf {
            Some(vv) => {
                for j in 0..ny {
                    let row = j * nx;
                    for i in 0..nx {
                        let k = row + i;
                        let divp = px[k] - if i > 0 { px[k - 1] } else { 0.0 } + py[k]
                            - if j > 0 { py[k - nx] } else { 0.0 };
                        let old = u[k];
                        let mut unew = (old + tau * divp + tau * mu * fv[k]) * denom;
                        if unew < vv[k] {
                            unew = vv[k];
                        }
                        u[k] = unew;
                        ubar[k] = unew + theta * (unew - old);
                    }
                }
            }
            None => {
                for j in 0..ny {
                    let row = j * nx;
                    for i in 0..nx {
                        let k = row + i;
                        let divp = px[k] - if i > 0 { px[k - 1] } else { 0.0 } + py[k]
                            - if j > 0 { py[k - nx] } else { 0.0 };
                        let old = u[k];
                        let unew = (old + tau * divp + tau * mu * fv[k]) * denom;
                        u[k] = unew;
                        ubar[k] = unew + theta * (unew - old);
                    }
                }
            }
        }
        tau *= theta;
        sigma /= theta;
        iterations += 1;

        if iterations % check_every == 0 || iterations == params.max_iter {
            let p_en = primal_energy(&u, fv, mu, nx, ny);
            let d_en = dual_energy(&px, &py, fv, vf, mu, nx, ny);
            gap = p_en - d_en;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceRow {
                    iteration: iterations,
                    primal_energy: p_en * s,
                    dual_energy: d_en * s,
                    gap: gap * s,
                });
            }
            if gap <= params.tol * gap0 {
                converged = true;
            }
        }
    }

    let z = DualField { grid: g, px, py };
    Ok(ProxResult {
        u: ScalarField { grid: g, values: u },
        z,
        gap: gap.max(0.0) * s,
        iterations,
        converged,
    })
}

/// Duality gap of an arbitrary primal-dual pair, in physical energy units
/// (`TV * spacing` plus `spacing^2`-weighted fidelity). Zero exactly at the
/// optimum. Errors when `u` is infeasible or `|z| > 1`.
pub fn dual_gap(
    u: &ScalarField,
    z: &DualField,
    f: &ScalarField,
    obstacle: &ObstacleSpec,
    h: f64,
) -> Result<f64> {
    if !u.grid.same_as(&f.grid) || !z.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch("dual_gap".into()));
    }
    let scale = tolerance_scale(f);
    if let Some(v) = obstacle.field() {
        let worst = u
            .values
            .iter()
            .zip(v.values.iter())
            .fold(0.0f64, |m, (&a, &b)| m.max(b - a));
        if worst > 1e-9 * scale {
            return Err(Error::Infeasible(worst));
        }
    }
    if z.max_norm() > 1.0 + 1e-9 {
        return Err(Error::Validation(format!("|z| exceeds 1: {}", z.max_norm())));
    }
    let g = f.grid;
    let s = g.spacing;
    let mu = s / h;
    let p_en = primal_energy(&u.values, &f.values, mu, g.nx, g.ny);
    let d_en = dual_energy(
        &z.px,
        &z.py,
        &f.values,
        obstacle.field().map(|v| v.values.as_slice()),
        mu,
        g.nx,
        g.ny,
    );
    Ok((p_en - d_en) * s)
}

/// Pointwise residual of the Euler-Lagrange equation `-div z + (u - f)/h = 0`
/// in physical units; meaningful away from the contact set.
pub fn euler_lagrange_residual(u: &ScalarField, z: &DualField, f: &ScalarField, h: f64) -> ScalarField {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let s = g.spacing;
    let mut r = vec![0.0; g.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let divp = z.px[k] - if i > 0 { z.px[k - 1] } else { 0.0 } + z.py[k]
                - if j > 0 { z.py[k - nx] } else { 0.0 };
            r[k] = -divp / s + (u.values[k] - f.values[k]) / h;
        }
    }
    ScalarField { grid: g, values: r }
}

/// Forcing-term input for the unconstrained formulation of the obstacle
/// scheme: `f + C*h` outside `omega`, `f` inside. Exact arithmetic.
pub fn forcing_input(f: &ScalarField, omega: &RegionMask, c: f64, h: f64) -> Result<ScalarField> {
    if !f.grid.same_as(&omega.grid) {
        return Err(Error::GridMismatch("forcing_input".into()));
    }
    if c < 0.0 {
        return Err(Error::Validation(format!("forcing constant must be >= 0, got {c}")));
    }
    let bump = c * h;
    let values = f
        .values
        .iter()
        .zip(omega.inside.iter())
        .map(|(&v, &ins)| if ins { v } else { v + bump })
        .collect();
    Ok(ScalarField { grid: f.grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2;

    #[test]
    fn constant_input_is_immediate_minimizer() {
        let g = Grid2::square(16, 1.0).unwrap();
        let f = ScalarField::constant(g, 0.7);
        let r = tv_prox(&f, &ObstacleSpec::Unconstrained, &ProxParams::new(0.01)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert!(r.gap <= 1e-15);
        assert!(r.u.values.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn active_constant_obstacle_wins() {
        let g = Grid2::square(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| -0.5 - 0.3 * (x + y));
        let v = ScalarField::constant(g, 0.0);
        let r = tv_prox(&f, &ObstacleSpec::Constrained(v), &ProxParams::new(0.01)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        for &u in &r.u.values {
            assert!(u.abs() <= 1e-12);
        }
    }

    #[test]
    fn rof_disk_plateau_matches_closed_form() {
        // f = indicator of a disk of radius R; the exact minimizer keeps the
        // disk and lowers the plateau to 1 - 2h/R.
        let g = Grid2::square(64, 1.0).unwrap();
        let (r0, h) = (0.25, 0.01);
        let f = ScalarField::from_fn(g, |x, y| {
            if (x - 0.5).hypot(y - 0.5) < r0 {
                1.0
            } else {
                0.0
            }
        });
        let params = ProxParams::new(h).with_tol(1e-8).with_max_iter(200_000);
        let res = tv_prox(&f, &ObstacleSpec::Unconstrained, &params).unwrap();
        assert!(res.converged);
        let expect = 1.0 - 2.0 * h / r0;
        let s = g.spacing;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let p = g.center(i, j);
                let rad = (p.x - 0.5).hypot(p.y - 0.5);
                if rad < r0 - 2.5 * s {
                    let u = res.u.at(i, j);
                    assert!((u - expect).abs() < 0.02, "plateau {u} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn gap_of_returned_pair_matches_certificate() {
        let g = Grid2::square(32, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (6.0 * x).sin() * (4.0 * y).cos());
        let params = ProxParams::new(0.02);
        let res = tv_prox(&f, &ObstacleSpec::Unconstrained, &params).unwrap();
        assert!(res.converged);
        let gap = dual_gap(&res.u, &res.z, &f, &ObstacleSpec::Unconstrained, 0.02).unwrap();
        assert!((gap - res.gap).abs() <= 1e-12 + 1e-9 * res.gap.abs());
        assert!(res.z.max_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_dual_gap_equals_tv_of_input() {
        let g = Grid2::square(24, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x * 0.5 + (3.0 * y).sin() * 0.2);
        let z = DualField::zeros(g);
        let gap = dual_gap(&f, &z, &f, &ObstacleSpec::Unconstrained, 0.05).unwrap();
        let tv = tv_raw(&f.values, g.nx, g.ny) * g.spacing;
        assert!((gap - tv).abs() <= 1e-12 * (1.0 + tv));
    }

    #[test]
    fn perturbing_optimal_point_raises_gap_quadratically() {
        let g = Grid2::square(24, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| 0.3 * (5.0 * x).sin() + 0.2 * y);
        let h = 0.02;
        let params = ProxParams::new(h).with_tol(1e-9).with_max_iter(100_000);
        let res = tv_prox(&f, &ObstacleSpec::Unconstrained, &params).unwrap();
        let base = dual_gap(&res.u, &res.z, &f, &ObstacleSpec::Unconstrained, h).unwrap();
        let mut u2 = res.u.clone();
        let eps = 0.05;
        let k = g.idx(11, 13);
        u2.values[k] += eps;
        let bumped = dual_gap(&u2, &res.z, &f, &ObstacleSpec::Unconstrained, h).unwrap();
        let s = g.spacing;
        let quad = eps * eps * s * s / (2.0 * h);
        // Fidelity contributes the quadratic term; TV can add at most
        // O(eps * s) from the four touched differences.
        assert!(bumped - base >= quad - 4.0 * eps * s, "gap rise {}", bumped - base);
    }

    #[test]
    fn infeasible_u_is_rejected() {
        let g = Grid2::square(16, 1.0).unwrap();
        let f = ScalarField::constant(g, 0.0);
        let v = ScalarField::constant(g, 0.5);
        let mut u = ScalarField::constant(g, 0.5);
        u.values[10] = 0.2;
        let z = DualField::zeros(g);
        assert!(matches!(
            dual_gap(&u, &z, &f, &ObstacleSpec::Constrained(v), 0.01),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn nan_input_is_an_error() {
        let g = Grid2::square(8, 1.0).unwrap();
        let mut f = ScalarField::constant(g, 0.0);
        f.values[3] = f64::NAN;
        assert!(tv_prox(&f, &ObstacleSpec::Unconstrained, &ProxParams::new(0.01)).is_err());
    }

    #[test]
    fn max_iter_exhaustion_reports_unconverged() {
        let g = Grid2::square(32, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (9.0 * x).sin() * (7.0 * y).cos());
        let params = ProxParams::new(0.05).with_tol(1e-12).with_max_iter(8);
        let res = tv_prox(&f, &ObstacleSpec::Unconstrained, &params).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 8);
        assert!(res.gap > 0.0);
    }

    #[test]
    fn forcing_input_cases() {
        let g = Grid2::square(8, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x + y);
        let omega_full = RegionMask::full(g);
        let out = forcing_input(&f, &omega_full, 3.0, 0.1).unwrap();
        assert_eq!(out.values, f.values);

        let zero_c = forcing_input(&f, &RegionMask::empty(g), 0.0, 0.1).unwrap();
        assert_eq!(zero_c.values, f.values);

        let mut omega = RegionMask::full(g);
        let k = g.idx(3, 4);
        omega.inside[k] = false;
        let out = forcing_input(&f, &omega, 2.0, 0.1).unwrap();
        for idx in 0..g.len() {
            let expect = f.values[idx] + if idx == k { 0.2 } else { 0.0 };
            assert_eq!(out.values[idx], expect);
        }

        let g2 = Grid2::square(16, 1.0).unwrap();
        assert!(forcing_input(&f, &RegionMask::full(g2), 1.0, 0.1).is_err());
    }

    #[test]
    fn deep_obstacle_equals_unconstrained() {
        let g = Grid2::square(32, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y| 0.4 * (5.0 * x).sin() + 0.3 * (3.0 * y).cos());
        let params = ProxParams::new(0.01);
        let free = tv_prox(&f, &ObstacleSpec::Unconstrained, &params).unwrap();
        let deep = ScalarField::constant(g, -f.max_abs() - 1.0);
        let held = tv_prox(&f, &ObstacleSpec::Constrained(deep), &params).unwrap();
        let scale = tolerance_scale(&f);
        for (a, b) in free.u.values.iter().zip(held.u.values.iter()) {
            assert!((a - b).abs() <= 2.0 * params.tol * scale);
        }
    }
}
