use std::thread;

use crate::dynamics::{Control, EquilibriumPoint, PeriodicInput, SimParams};
use crate::error::{Error, Result};
use crate::grid_field::{MagnetizationField, Vec3};
use crate::integrator::{Constraint, IntegratorConfig, SimState, TimeStep, simulate};

/// Relative tolerance on the gap between the first and last output of the
/// final period, as a fraction of the input amplitude.
pub const CLOSURE_TOL: f64 = 0.01;

/// Relative margin used when comparing loop areas across frequencies.
pub const AREA_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisPoint {
    pub t: f64,
    pub uhat: f64,
    pub m_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisRun {
    pub omega: f64,
    pub component: usize,
    pub xstar: f64,
    pub amplitude: f64,
    pub samples_per_period: usize,
    pub series: Vec<HysteresisPoint>,
    pub loop_area: f64,
    /// `false` when the final period did not close, i.e. the transient had
    /// not settled; the area is still reported.
    pub closed: bool,
}

impl HysteresisRun {
    /// Samples of the last full period, both endpoints included.
    pub fn final_period(&self) -> &[HysteresisPoint] {
        let start = self
            .series
            .len()
            .saturating_sub(self.samples_per_period + 1);
        &self.series[start..]
    }
}

/// Everything about a hysteresis run except the forcing frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisSetup {
    pub params: SimParams,
    pub r: EquilibriumPoint,
    pub m0: MagnetizationField,
    pub amplitude: f64,
    pub component: usize,
    pub periods: usize,
    pub xstar: f64,
    pub samples_per_period: usize,
    pub integrator: IntegratorConfig,
}

impl HysteresisSetup {
    /// Panel configuration for output component `component`: the wire starts
    /// at `e_i`, the target is `r = e_i`, and the input drives axis `i`.
    pub fn axis_panel(
        params: SimParams,
        component: usize,
        amplitude: f64,
        integrator: IntegratorConfig,
    ) -> Result<Self> {
        let axis = Vec3::basis(component).ok_or_else(|| {
            Error::Inadmissible(format!("output component {component} must be 1, 2 or 3"))
        })?;
        Ok(HysteresisSetup {
            params,
            r: EquilibriumPoint::new(axis)?,
            m0: MagnetizationField::constant(params.grid, axis)?,
            amplitude,
            component,
            periods: 3,
            xstar: params.grid.length(),
            samples_per_period: 1000,
            integrator,
        })
    }
}

/// Default integrator for hysteresis runs: the additive input is integrated
/// without renormalization.
pub fn free_norm_integrator() -> IntegratorConfig {
    IntegratorConfig {
        constraint: Constraint::Free,
        ..Default::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopArea {
    pub area: f64,
    pub closed: bool,
}

/// Absolute shoelace area of the closed `(input, output)` curve.
///
/// `closure_scale` is the input amplitude; the curve counts as closed when
/// its endpoints differ in output by at most `CLOSURE_TOL * closure_scale`.
/// A duplicated closing point is harmless.
pub fn loop_area(points: &[(f64, f64)], closure_scale: f64) -> LoopArea {
    if points.len() < 3 {
        return LoopArea {
            area: 0.0,
            closed: true,
        };
    }
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    let gap = (points[n - 1].1 - points[0].1).abs();
    LoopArea {
        area: 0.5 * twice.abs(),
        closed: gap <= CLOSURE_TOL * closure_scale.abs(),
    }
}

/// Simulates the additive-input model for `setup.periods` forcing periods
/// and measures the loop traced by `(û_i, m_i(x*))` over the last one.
pub fn run_hysteresis(setup: &HysteresisSetup, omega: f64) -> Result<HysteresisRun> {
    let input = PeriodicInput::new(setup.amplitude, omega, setup.component)?;
    let grid = setup.params.grid;
    if !(0.0..=grid.length()).contains(&setup.xstar) {
        return Err(Error::Inadmissible(format!(
            "sampling point x* = {} lies outside [0, {}]",
            setup.xstar,
            grid.length()
        )));
    }
    if setup.periods < 3 || setup.samples_per_period < 3 {
        return Err(Error::Inadmissible(
            "hysteresis runs need at least 3 periods and 3 samples per period".into(),
        ));
    }

    // an integer number of steps per sample keeps samples on exact period fractions
    let period = input.period();
    let dt_max = setup.integrator.resolve_dt(&setup.params)?;
    let per_sample = (period / setup.samples_per_period as f64 / dt_max)
        .ceil()
        .max(1.0) as usize;
    let dt = period / (per_sample * setup.samples_per_period) as f64;
    let cfg = IntegratorConfig {
        dt: TimeStep::Fixed(dt),
        ..setup.integrator
    };

    let node = grid.nearest_node(setup.xstar);
    let component = setup.component;
    let control = Control::Proportional {
        r: setup.r,
        k: setup.params.k,
    };
    let traj = simulate(
        SimState::new(setup.m0.clone()),
        &setup.params,
        control,
        Some(input),
        &cfg,
        setup.periods as f64 * period,
        per_sample,
        |s| HysteresisPoint {
            t: s.t,
            uhat: input.scalar(s.t),
            m_out: s.m.values()[node].component(component),
        },
    )?;

    let mut run = HysteresisRun {
        omega,
        component,
        xstar: setup.xstar,
        amplitude: setup.amplitude,
        samples_per_period: setup.samples_per_period,
        series: traj.samples,
        loop_area: 0.0,
        closed: true,
    };
    let cycle: Vec<(f64, f64)> = run
        .final_period()
        .iter()
        .map(|p| (p.uhat, p.m_out))
        .collect();
    let area = loop_area(&cycle, setup.amplitude);
    run.loop_area = area.area;
    run.closed = area.closed;
    Ok(run)
}

/// One independent run per frequency, executed concurrently. Errors are
/// reported per run; results keep the order of `omegas`.
pub fn frequency_sweep(setup: &HysteresisSetup, omegas: &[f64]) -> Vec<Result<HysteresisRun>> {
    thread::scope(|scope| {
        let handles: Vec<_> = omegas
            .iter()
            .map(|&omega| scope.spawn(move || run_hysteresis(setup, omega)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("hysteresis worker panicked"))
            .collect()
    })
}

/// Whether loop areas grow as the frequency drops: with runs ordered by
/// decreasing `omega`, areas never decrease (within `margin`) and the slowest
/// run exceeds the fastest by more than `margin`.
pub fn area_trend_holds(runs: &[HysteresisRun], margin: f64) -> bool {
    let mut sorted: Vec<&HysteresisRun> = runs.iter().collect();
    sorted.sort_by(|a, b| b.omega.total_cmp(&a.omega));
    let (Some(fast), Some(slow)) = (sorted.first(), sorted.last()) else {
        return false;
    };
    let monotone = sorted
        .windows(2)
        .all(|w| w[1].loop_area >= w[0].loop_area * (1.0 - margin));
    monotone && slow.loop_area > fast.loop_area * (1.0 + margin)
}
