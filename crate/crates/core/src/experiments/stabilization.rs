use std::f64::consts::PI;

use crate::dynamics::{Control, EquilibriumPoint, SimParams};
use crate::error::{Error, Result};
use crate::grid_field::{GridSpec, MagnetizationField, Vec3, cross, renormalize};
use crate::integrator::{IntegratorConfig, SimState, simulate};
use crate::lyapunov::{
    LyapunovSample, attach_difference_quotients, decay_holds, within_stability_ball,
};

pub const DEFAULT_TOL_CONV: f64 = 1e-3;
pub const DEFAULT_PERTURBATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationReport {
    pub samples: Vec<LyapunovSample>,
    pub converged: bool,
    pub t_converge: Option<f64>,
    /// Consecutive sample pairs whose slope exceeds the decay bound plus
    /// the discretization allowance.
    pub violations: usize,
    pub max_norm_deviation: f64,
    pub steps: usize,
    pub dt: f64,
}

impl StabilizationReport {
    pub fn first(&self) -> &LyapunovSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &LyapunovSample {
        self.samples.last().expect("at least the initial sample")
    }
}

/// A unit vector orthogonal to `r`, built from the basis axis least aligned with it.
pub fn tangent_direction(r: Vec3) -> Vec3 {
    let axis = [Vec3::E1, Vec3::E2, Vec3::E3]
        .into_iter()
        .min_by(|a, b| a.dot(r).abs().total_cmp(&b.dot(r).abs()))
        .expect("three axes");
    let t = cross(r, axis);
    t / t.norm()
}

/// `normalize(r + amplitude · cos(πx/L) · t)` with `t` tangent to `r`.
///
/// The cosine bump has zero slope at both ends and zero mean, so it seeds no
/// uniform tangential mode.
pub fn default_initial_condition(
    grid: GridSpec,
    r: EquilibriumPoint,
    amplitude: f64,
) -> Result<MagnetizationField> {
    let t = tangent_direction(r.vector());
    let length = grid.length();
    let raw = MagnetizationField::from_fn(grid, |x| {
        r.vector() + t * (amplitude * (PI * x / length).cos())
    })?;
    renormalize(&raw)
}

/// Simulates the closed loop `u = k (r − m)` and checks the decay certificate
/// between every pair of consecutive samples.
pub fn run_stabilization(
    params: &SimParams,
    r: EquilibriumPoint,
    m0: MagnetizationField,
    t_end: f64,
    tol_conv: f64,
    cfg: &IntegratorConfig,
    stride: usize,
) -> Result<StabilizationReport> {
    if !m0.on_sphere() {
        return Err(Error::Inadmissible(
            "initial magnetization must be unit at every node".into(),
        ));
    }
    if !within_stability_ball(&m0, r) {
        return Err(Error::Inadmissible(
            "initial magnetization lies outside the L2 ball of radius 2 about r".into(),
        ));
    }
    let (nu, k, f) = (params.nu, params.k, params.f_of_k);
    let control = Control::Proportional { r, k };
    let traj = simulate(
        SimState::new(m0),
        params,
        control,
        None,
        cfg,
        t_end,
        stride,
        |s| {
            (
                LyapunovSample::measure(s.t, &s.m, r, nu, k, f),
                s.m.max_norm_deviation(),
            )
        },
    )?;

    let max_norm_deviation = traj.samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut samples: Vec<LyapunovSample> = traj.samples.into_iter().map(|s| s.0).collect();
    attach_difference_quotients(&mut samples)?;

    let dx = params.grid.dx();
    let mut violations = 0;
    for pair in samples.windows(2) {
        if !decay_holds(&pair[0], &pair[1], traj.dt, dx)? {
            violations += 1;
        }
    }
    let t_converge = samples.iter().find(|s| s.err_norm < tol_conv).map(|s| s.t);
    let converged = samples.last().is_some_and(|s| s.err_norm < tol_conv);
    Ok(StabilizationReport {
        samples,
        converged,
        t_converge,
        violations,
        max_norm_deviation,
        steps: traj.steps,
        dt: traj.dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(nu: f64) -> (SimParams, EquilibriumPoint) {
        let grid = GridSpec::new(32, 1.0).unwrap();
        (
            SimParams::with_f_equals_k(nu, 0.25, grid).unwrap(),
            EquilibriumPoint::new(Vec3::new(0.6, 0.0, 0.8)).unwrap(),
        )
    }

    #[test]
    fn tangent_is_orthogonal_unit() {
        for r in [Vec3::E1, Vec3::E2, Vec3::E3, Vec3::new(0.6, 0.8, 0.0)] {
            let t = tangent_direction(r);
            assert!(t.dot(r).abs() < 1e-15);
            assert!((t.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn initial_condition_has_zero_end_slopes_and_sits_near_r() {
        let (p, r) = setup(0.02);
        let m0 = default_initial_condition(p.grid, r, 0.1).unwrap();
        assert!(m0.on_sphere());
        let v = m0.values();
        // cos(pi x) is symmetric about the ends, so the one-sided slopes are O(dx)
        assert!((v[1] - v[0]).norm() / p.grid.dx() < 0.1 * PI * PI * p.grid.dx());
        assert!(within_stability_ball(&m0, r));
    }

    #[test]
    fn starting_at_r_is_converged_immediately() {
        let (p, r) = setup(0.02);
        let m0 = MagnetizationField::constant(p.grid, r.vector()).unwrap();
        let rep = run_stabilization(
            &p,
            r,
            m0,
            1.0,
            DEFAULT_TOL_CONV,
            &IntegratorConfig::default(),
            100,
        )
        .unwrap();
        assert_eq!(rep.t_converge, Some(0.0));
        assert!(rep.converged);
        assert_eq!(rep.violations, 0);
        assert!(
            rep.samples
                .iter()
                .all(|s| s.err_norm <= 1e-12 && s.v <= 1e-24)
        );
    }

    #[test]
    fn short_damped_run_decays() {
        let (p, r) = setup(0.1);
        let m0 = default_initial_condition(p.grid, r, 0.1).unwrap();
        let rep = run_stabilization(
            &p,
            r,
            m0,
            2.0,
            DEFAULT_TOL_CONV,
            &IntegratorConfig::default(),
            200,
        )
        .unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.last().v < rep.first().v);
        assert!(rep.max_norm_deviation <= 1e-12);
    }

    #[test]
    fn undamped_run_still_reports() {
        let (p, r) = setup(0.0);
        let m0 = default_initial_condition(p.grid, r, 0.1).unwrap();
        let rep = run_stabilization(
            &p,
            r,
            m0,
            0.5,
            DEFAULT_TOL_CONV,
            &IntegratorConfig::default(),
            200,
        )
        .unwrap();
        assert!(!rep.converged);
        assert!(rep.samples.iter().all(|s| s.bound == 0.0));
    }

    #[test]
    fn rejects_antipodal_start() {
        let (p, r) = setup(0.02);
        let m0 = MagnetizationField::constant(p.grid, -r.vector()).unwrap();
        assert!(run_stabilization(&p, r, m0, 1.0, 1e-3, &IntegratorConfig::default(), 10).is_err());
    }
}
