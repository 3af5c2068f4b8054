//! Explicit time stepping of the semi-discrete system, method of lines on a
//! fixed grid, with nodewise projection back onto the unit sphere.

use crate::dynamics::{Control, PeriodicInput, SimParams, rhs_into};
use crate::error::{Error, Result};
use crate::grid_field::{MagnetizationField, Vec3, renormalize_in_place};

/// Extent of the classical RK4 stability region along the imaginary axis.
const RK4_IMAGINARY_EXTENT: f64 = 2.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4Projected,
    EulerProjected,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4Projected => "rk4_projected",
            Scheme::EulerProjected => "euler_projected",
        }
    }
}

/// How the unit-norm constraint is treated after each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Renormalize every node after each completed step.
    Project,
    /// Leave the norm free. Used to integrate the additive-input model as
    /// written, where `û` pushes `|m|` away from 1.
    Free,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::Project => "project",
            Constraint::Free => "free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: TimeStep,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub constraint: Constraint,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: TimeStep::Auto,
            scheme: Scheme::Rk4Projected,
            cfl_safety: 0.5,
            constraint: Constraint::Project,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(dt: f64, scheme: Scheme) -> Self {
        IntegratorConfig {
            dt: TimeStep::Fixed(dt),
            scheme,
            ..Default::default()
        }
    }

    /// Step size actually used for `params`.
    pub fn resolve_dt(&self, params: &SimParams) -> Result<f64> {
        match self.dt {
            TimeStep::Fixed(dt) if dt.is_finite() && dt > 0.0 => Ok(dt),
            TimeStep::Fixed(dt) => Err(Error::Inadmissible(format!("time step {dt} must be > 0"))),
            TimeStep::Auto => {
                if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
                    return Err(Error::Inadmissible(format!(
                        "cfl_safety {} must lie in (0, 1]",
                        self.cfl_safety
                    )));
                }
                let dx = params.grid.dx();
                let limit = stable_dt(dx, params.nu).min(dispersive_dt(
                    dx,
                    params.nu,
                    params.k,
                    self.scheme,
                )?);
                Ok(self.cfl_safety * limit)
            }
        }
    }
}

/// Parabolic step bound `dx² / (2 max(ν, 0.1))` for the damping term.
pub fn stable_dt(dx: f64, nu: f64) -> f64 {
    dx * dx / (2.0 * nu.max(0.1))
}

/// Step bound from the spectrum of the linearized operator.
///
/// Around a uniform state the Neumann Laplacian has eigenvalues in
/// `[-4/dx², 0]`; precession and damping turn each into `(ν ± i) μ`, shifted
/// by the feedback gain. RK4 needs `dt |λ| <= 2√2`; explicit Euler needs the
/// damped disc condition `dt |μ| <= 2ν / (1 + ν²)` and has no stable step
/// when `ν = 0`.
pub fn dispersive_dt(dx: f64, nu: f64, k: f64, scheme: Scheme) -> Result<f64> {
    let mu = 4.0 / (dx * dx) + k.max(0.0);
    match scheme {
        Scheme::Rk4Projected => Ok(RK4_IMAGINARY_EXTENT / (mu * (1.0 + nu * nu).sqrt())),
        Scheme::EulerProjected if nu > 0.0 => Ok(2.0 * nu / ((1.0 + nu * nu) * mu)),
        Scheme::EulerProjected => Err(Error::Inadmissible(
            "explicit Euler is unstable for undamped precession; set dt explicitly".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub m: MagnetizationField,
}

impl SimState {
    pub fn new(m: MagnetizationField) -> Self {
        SimState { t: 0.0, m }
    }
}

/// Owns the scratch buffers for repeated steps of one simulation.
pub struct Stepper {
    params: SimParams,
    control: Control,
    input: Option<PeriodicInput>,
    scheme: Scheme,
    constraint: Constraint,
    dt: f64,
    inv_dx2: f64,
    k1: Vec<Vec3>,
    k2: Vec<Vec3>,
    k3: Vec<Vec3>,
    k4: Vec<Vec3>,
    stage: Vec<Vec3>,
}

impl Stepper {
    pub fn new(
        params: SimParams,
        control: Control,
        input: Option<PeriodicInput>,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        let dt = cfg.resolve_dt(&params)?;
        let nodes = params.grid.nodes();
        let dx = params.grid.dx();
        Ok(Stepper {
            params,
            control,
            input,
            scheme: cfg.scheme,
            constraint: cfg.constraint,
            dt,
            inv_dx2: 1.0 / (dx * dx),
            k1: vec![Vec3::ZERO; nodes],
            k2: vec![Vec3::ZERO; nodes],
            k3: vec![Vec3::ZERO; nodes],
            k4: vec![Vec3::ZERO; nodes],
            stage: vec![Vec3::ZERO; nodes],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn uhat(&self, t: f64) -> Vec3 {
        self.input.map_or(Vec3::ZERO, |input| input.evaluate(t))
    }

    /// Advances `values` from `t` to `t + dt` in place.
    fn advance_values(&mut self, t: f64, dt: f64, values: &mut [Vec3]) -> Result<()> {
        let (nu, inv_dx2) = (self.params.nu, self.inv_dx2);
        match self.scheme {
            Scheme::EulerProjected => {
                rhs_into(
                    values,
                    inv_dx2,
                    nu,
                    &self.control,
                    self.uhat(t),
                    &mut self.k1,
                );
                for (v, d) in values.iter_mut().zip(&self.k1) {
                    *v += *d * dt;
                }
            }
            Scheme::Rk4Projected => {
                let half = 0.5 * dt;
                let (u0, u_mid, u1) = (self.uhat(t), self.uhat(t + half), self.uhat(t + dt));
                rhs_into(values, inv_dx2, nu, &self.control, u0, &mut self.k1);
                for ((s, v), d) in self.stage.iter_mut().zip(values.iter()).zip(&self.k1) {
                    *s = *v + *d * half;
                }
                rhs_into(&self.stage, inv_dx2, nu, &self.control, u_mid, &mut self.k2);
                for ((s, v), d) in self.stage.iter_mut().zip(values.iter()).zip(&self.k2) {
                    *s = *v + *d * half;
                }
                rhs_into(&self.stage, inv_dx2, nu, &self.control, u_mid, &mut self.k3);
                for ((s, v), d) in self.stage.iter_mut().zip(values.iter()).zip(&self.k3) {
                    *s = *v + *d * dt;
                }
                rhs_into(&self.stage, inv_dx2, nu, &self.control, u1, &mut self.k4);
                let w = dt / 6.0;
                for (j, v) in values.iter_mut().enumerate() {
                    *v += (self.k1[j] + (self.k2[j] + self.k3[j]) * 2.0 + self.k4[j]) * w;
                }
            }
        }
        match self.constraint {
            Constraint::Project => renormalize_in_place(values),
            Constraint::Free => match values.iter().position(|v| !v.is_finite()) {
                Some(index) => Err(Error::NonFinite { index }),
                None => Ok(()),
            },
        }
    }

    /// One step, with `t` computed as `t_start + (index + 1) dt` by the caller
    /// when stepping repeatedly so that time does not drift.
    pub fn step(&mut self, state: &SimState) -> Result<SimState> {
        if !state.m.grid().eq(&self.params.grid) {
            return Err(Error::GridMismatch);
        }
        let mut values = state.m.values().to_vec();
        self.advance_values(state.t, self.dt, &mut values)
            .map_err(|e| Error::StepFailed {
                t: state.t,
                source: Box::new(e),
            })?;
        let on_sphere = self.constraint == Constraint::Project;
        Ok(SimState {
            t: state.t + self.dt,
            m: MagnetizationField::from_raw(self.params.grid, values, on_sphere),
        })
    }
}

/// Single step from `state`.
pub fn step(
    state: &SimState,
    params: &SimParams,
    control: Control,
    input: Option<PeriodicInput>,
    cfg: &IntegratorConfig,
) -> Result<SimState> {
    Stepper::new(*params, control, input, cfg)?.step(state)
}

/// Recorded output of [`simulate`].
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub samples: Vec<T>,
    pub final_state: SimState,
    pub steps: usize,
    pub dt: f64,
}

/// Steps from `state0` to `t_end`, calling `observe` on the initial state,
/// every `stride` steps, and on the final state. The last step is shortened
/// so that the run ends exactly at `t_end`.
#[allow(clippy::too_many_arguments)]
pub fn simulate<T>(
    state0: SimState,
    params: &SimParams,
    control: Control,
    input: Option<PeriodicInput>,
    cfg: &IntegratorConfig,
    t_end: f64,
    stride: usize,
    mut observe: impl FnMut(&SimState) -> T,
) -> Result<Trajectory<T>> {
    let mut stepper = Stepper::new(*params, control, input, cfg)?;
    if state0.m.grid() != params.grid {
        return Err(Error::GridMismatch);
    }
    let dt = stepper.dt();
    let stride = stride.max(1);
    let t0 = state0.t;
    let steps = if t_end > t0 {
        ((t_end - t0) / dt - 1e-9).ceil() as usize
    } else {
        0
    };

    let mut samples = vec![observe(&state0)];
    let grid = state0.m.grid();
    let mut values = state0.m.into_values();
    let mut t = t0;
    for i in 0..steps {
        let done = i + 1 == steps;
        let h = if done { t_end - t } else { dt };
        stepper
            .advance_values(t, h, &mut values)
            .map_err(|e| Error::StepFailed {
                t,
                source: Box::new(e),
            })?;
        t = if done {
            t_end
        } else {
            t0 + (i + 1) as f64 * dt
        };
        if (i + 1) % stride == 0 || done {
            let on_sphere = cfg.constraint == Constraint::Project;
            let state = SimState {
                t,
                m: MagnetizationField::from_raw(grid, values.clone(), on_sphere),
            };
            samples.push(observe(&state));
        }
    }
    let final_state = SimState {
        t,
        m: if steps > 0 && cfg.constraint == Constraint::Project {
            MagnetizationField::from_raw(grid, values, true)
        } else {
            MagnetizationField::from_values(grid, values)?
        },
    };
    Ok(Trajectory {
        samples,
        final_state,
        steps,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::EquilibriumPoint;
    use crate::grid_field::{GridSpec, renormalize};
    use std::f64::consts::PI;

    fn params(n: usize, nu: f64) -> SimParams {
        SimParams::with_f_equals_k(nu, 0.25, GridSpec::new(n, 1.0).unwrap()).unwrap()
    }

    fn perturbed(p: &SimParams, amp: f64) -> MagnetizationField {
        let f = MagnetizationField::from_fn(p.grid, |x| {
            Vec3::E1
                + Vec3::E2 * (amp * (PI * x).cos())
                + Vec3::E3 * (0.5 * amp * (2.0 * PI * x).cos())
        })
        .unwrap();
        renormalize(&f).unwrap()
    }

    fn control() -> Control {
        Control::Proportional {
            r: EquilibriumPoint::new(Vec3::E1).unwrap(),
            k: 0.25,
        }
    }

    #[test]
    fn stable_dt_examples() {
        let dx = 1.0 / 64.0;
        assert!((stable_dt(dx, 0.02) - 1.220703125e-3).abs() < 1e-15);
        assert!((stable_dt(dx / 2.0, 0.02) - stable_dt(dx, 0.02) / 4.0).abs() < 1e-18);
        assert_eq!(stable_dt(dx, 0.0), stable_dt(dx, 0.1));
        assert_eq!(stable_dt(dx, 0.5), dx * dx);
    }

    #[test]
    fn auto_dt_respects_both_bounds() {
        let p = params(64, 0.02);
        let dt = IntegratorConfig::default().resolve_dt(&p).unwrap();
        assert!(dt <= 0.5 * stable_dt(p.grid.dx(), p.nu));
        assert!(dt <= 0.5 * dispersive_dt(p.grid.dx(), p.nu, p.k, Scheme::Rk4Projected).unwrap());
        let euler = IntegratorConfig {
            scheme: Scheme::EulerProjected,
            ..Default::default()
        };
        assert!(euler.resolve_dt(&params(16, 0.0)).is_err());
        assert!(
            IntegratorConfig::fixed(-1.0, Scheme::Rk4Projected)
                .resolve_dt(&p)
                .is_err()
        );
    }

    #[test]
    fn fixed_point_is_preserved() {
        let p = params(16, 0.02);
        let m = MagnetizationField::constant(p.grid, Vec3::E1).unwrap();
        let cfg = IntegratorConfig::default();
        let next = step(&SimState::new(m.clone()), &p, control(), None, &cfg).unwrap();
        assert_eq!(next.m, m);
        assert!(next.t > 0.0);

        let traj = simulate(
            SimState::new(m.clone()),
            &p,
            control(),
            None,
            &cfg,
            1000.0 * cfg.resolve_dt(&p).unwrap(),
            1,
            |s| {
                s.m.max_node_distance(&MagnetizationField::constant(p.grid, Vec3::E1).unwrap())
                    .unwrap()
            },
        )
        .unwrap();
        assert_eq!(traj.steps, 1000);
        assert!(traj.samples.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn euler_step_with_additive_input() {
        let p = params(4, 0.02);
        let a = 0.01;
        let dt = 1e-3;
        let input = PeriodicInput::new(a, 1.0, 1).unwrap();
        let m = MagnetizationField::constant(p.grid, Vec3::E3).unwrap();
        let cfg = IntegratorConfig::fixed(dt, Scheme::EulerProjected);
        let next = step(&SimState::new(m), &p, Control::None, Some(input), &cfg).unwrap();
        let pre = Vec3::new(a * dt, 0.0, 1.0);
        let expected = pre / pre.norm();
        for v in next.m.values() {
            assert!((*v - expected).max_abs() < 1e-16);
        }
        assert!(next.m.on_sphere());
    }

    #[test]
    fn empty_horizon_returns_initial_sample() {
        let p = params(8, 0.02);
        let m = perturbed(&p, 0.1);
        let traj = simulate(
            SimState::new(m.clone()),
            &p,
            control(),
            None,
            &IntegratorConfig::default(),
            0.0,
            10,
            |s| s.t,
        )
        .unwrap();
        assert_eq!(traj.samples, vec![0.0]);
        assert_eq!(traj.steps, 0);
        assert_eq!(traj.final_state.m, m);
    }

    #[test]
    fn constraint_preserved_over_many_steps() {
        let p = params(32, 0.02);
        let cfg = IntegratorConfig::default();
        let traj = simulate(
            SimState::new(perturbed(&p, 0.3)),
            &p,
            control(),
            None,
            &cfg,
            1e4 * cfg.resolve_dt(&p).unwrap(),
            500,
            |s| s.m.max_norm_deviation(),
        )
        .unwrap();
        assert_eq!(traj.steps, 10_000);
        assert!(traj.samples.iter().all(|&d| d <= 1e-12));
    }

    #[test]
    fn free_constraint_lets_norm_drift() {
        let p = params(4, 0.02);
        let input = PeriodicInput::new(0.01, 1.0, 1).unwrap();
        let cfg = IntegratorConfig {
            constraint: Constraint::Free,
            ..Default::default()
        };
        let m = MagnetizationField::constant(p.grid, Vec3::E1).unwrap();
        let traj = simulate(
            SimState::new(m),
            &p,
            control(),
            Some(input),
            &cfg,
            1.0,
            1000,
            |_| (),
        )
        .unwrap();
        // m1 = 1 + 0.01 sin(t) exactly for the collinear constant state
        let m1 = traj.final_state.m.values()[0].x1;
        assert!((m1 - (1.0 + 0.01 * traj.final_state.t.sin())).abs() < 1e-12);
    }

    #[test]
    fn rk4_error_order_at_least_two() {
        let p = params(16, 0.05);
        let m0 = perturbed(&p, 0.3);
        let base = IntegratorConfig::default().resolve_dt(&p).unwrap();
        let t_end = 256.0 * base;
        let run = |dt: f64| {
            simulate(
                SimState::new(m0.clone()),
                &p,
                control(),
                None,
                &IntegratorConfig::fixed(dt, Scheme::Rk4Projected),
                t_end,
                usize::MAX,
                |_| (),
            )
            .unwrap()
            .final_state
            .m
        };
        let reference = run(base / 64.0);
        let errors: Vec<f64> = [base, base / 2.0, base / 4.0]
            .iter()
            .map(|&dt| run(dt).max_node_distance(&reference).unwrap())
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 2.0, "errors {errors:?}");
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let p = params(16, 0.02);
        let go = || {
            simulate(
                SimState::new(perturbed(&p, 0.2)),
                &p,
                control(),
                None,
                &IntegratorConfig::default(),
                0.05,
                7,
                |s| s.m.clone(),
            )
            .unwrap()
            .samples
        };
        assert_eq!(go(), go());
    }
}
