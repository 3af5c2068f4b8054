//! Turns a [`RunConfig`] into experiment runs and result bundles.

use super::config::RunConfig;
use super::results::{ResultBundle, StabilizationSummary};
use crate::dynamics::EquilibriumPoint;
use crate::error::{Error, Result};
use crate::experiments::{HysteresisRun, HysteresisSetup, frequency_sweep, run_stabilization};
use crate::grid_field::{MagnetizationField, Vec3};

/// Closed-loop stabilization towards `control.r`.
pub fn stabilize(config: &RunConfig) -> Result<ResultBundle> {
    let params = config.sim_params();
    let r = config.target();
    let m0 = config.initial_field(r)?;
    let rep = run_stabilization(
        &params,
        r,
        m0,
        config.t_end,
        config.tol_conv,
        &config.integrator(),
        config.stride,
    )?;
    Ok(ResultBundle {
        config: config.clone(),
        stabilization: Some(StabilizationSummary {
            converged: rep.converged,
            t_converge: rep.t_converge,
            violations: rep.violations,
            max_norm_deviation: rep.max_norm_deviation,
            steps: rep.steps,
            dt: rep.dt,
        }),
        trajectory: rep.samples,
        hysteresis: Vec::new(),
    })
}

fn setup_for(
    config: &RunConfig,
    r: EquilibriumPoint,
    m0: MagnetizationField,
    component: usize,
) -> HysteresisSetup {
    HysteresisSetup {
        params: config.sim_params(),
        r,
        m0,
        amplitude: config.amplitude,
        component,
        periods: config.periods,
        xstar: config.xstar,
        samples_per_period: config.samples_per_period,
        integrator: config.integrator(),
    }
}

fn collect(runs: Vec<Result<HysteresisRun>>) -> Result<Vec<HysteresisRun>> {
    runs.into_iter().collect()
}

/// One periodic-input run per configured frequency, driving `hysteresis.component`.
pub fn hysteresis(config: &RunConfig) -> Result<ResultBundle> {
    let r = config.target();
    let setup = setup_for(config, r, config.initial_field(r)?, config.component);
    Ok(ResultBundle {
        config: config.clone(),
        stabilization: None,
        trajectory: Vec::new(),
        hysteresis: collect(frequency_sweep(&setup, &config.omegas))?,
    })
}

/// All three axis panels: for each `i`, start at `e_i`, target `e_i`, drive
/// and observe component `i`. `control.r`, the initial preset and
/// `hysteresis.component` are ignored.
pub fn sweep(config: &RunConfig) -> Result<ResultBundle> {
    let mut runs = Vec::new();
    for component in 1..=3 {
        let axis = Vec3::basis(component).expect("1..=3");
        let r = EquilibriumPoint::new(axis)?;
        let m0 = MagnetizationField::constant(config.grid(), axis)?;
        let setup = setup_for(config, r, m0, component);
        runs.extend(collect(frequency_sweep(&setup, &config.omegas))?);
    }
    Ok(ResultBundle {
        config: config.clone(),
        stabilization: None,
        trajectory: Vec::new(),
        hysteresis: runs,
    })
}

/// Whether an error means the numerics broke down rather than bad input.
pub fn is_blow_up(err: &Error) -> bool {
    matches!(
        err,
        Error::StepFailed { .. } | Error::NonFinite { .. } | Error::DegenerateNode { .. }
    )
}

#[cfg(test)]
mod tests {
    use super::super::config::parse_config;
    use super::*;

    #[test]
    fn fixed_point_trajectory_has_zero_error() {
        let c = parse_config(
            "grid.n = 8\ninitial.preset = target\nstabilize.t_end = 1\nstabilize.stride = 100",
        )
        .unwrap()
        .config;
        let b = stabilize(&c).unwrap();
        assert!(b.trajectory.len() >= 2);
        assert!(b.trajectory.iter().all(|s| s.err_norm <= 1e-12));
        assert_eq!(b.stabilization.unwrap().violations, 0);
    }

    #[test]
    fn sweep_covers_every_component_and_frequency() {
        let c = parse_config(
            "grid.n = 4\nhysteresis.omegas = 2, 1\nhysteresis.samples_per_period = 20",
        )
        .unwrap()
        .config;
        let b = sweep(&c).unwrap();
        let tags: Vec<(usize, f64)> = b
            .hysteresis
            .iter()
            .map(|r| (r.component, r.omega))
            .collect();
        assert_eq!(
            tags,
            vec![(1, 2.0), (1, 1.0), (2, 2.0), (2, 1.0), (3, 2.0), (3, 1.0)]
        );
    }

    #[test]
    fn blow_up_classification() {
        let failed = Error::StepFailed {
            t: 1.0,
            source: Box::new(Error::NonFinite { index: 3 }),
        };
        assert!(is_blow_up(&failed));
        assert!(!is_blow_up(&Error::Inadmissible("x".into())));
    }
}
