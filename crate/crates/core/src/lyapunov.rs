//! The Lyapunov functional
//!
//! ```text
//! V(m) = f(k)/2 ‖m − r‖² + 1/2 ‖m_x‖²
//! ```
//!
//! its guaranteed decay rate `dV/dt <= −ν k f(k) ‖m × (m − r)‖²`, and grid
//! level certificates for the three supporting identities.

use crate::dynamics::EquilibriumPoint;
use crate::error::{Error, Result};
use crate::grid_field::{
    GridSpec, MagnetizationField, Vec3, cross, diff_central, diff_forward, l2_norm_sq,
    laplacian_neumann, trapezoid,
};

/// One diagnostic record along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub t: f64,
    pub v: f64,
    /// Difference quotient of `V` towards the previous sample (the next one
    /// for the first sample).
    pub dvdt_est: f64,
    pub bound: f64,
    pub err_norm: f64,
    pub cross_h_norm_sq: f64,
}

impl LyapunovSample {
    pub fn measure(
        t: f64,
        m: &MagnetizationField,
        r: EquilibriumPoint,
        nu: f64,
        k: f64,
        f_of_k: f64,
    ) -> Self {
        let cross_h_norm_sq = cross_h_norm_sq(m, r);
        LyapunovSample {
            t,
            v: lyapunov_v(m, r, f_of_k),
            dvdt_est: 0.0,
            bound: -nu * k * f_of_k * cross_h_norm_sq,
            err_norm: error_norm_sq(m, r).sqrt(),
            cross_h_norm_sq,
        }
    }
}

/// Fills `dvdt_est` from consecutive samples.
pub fn attach_difference_quotients(samples: &mut [LyapunovSample]) -> Result<()> {
    for i in 1..samples.len() {
        samples[i].dvdt_est = dvdt_estimate(&samples[i - 1], &samples[i])?;
    }
    if samples.len() >= 2 {
        samples[0].dvdt_est = samples[1].dvdt_est;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaId {
    /// `(m × m_x)_x = m × m_xx`
    L1,
    /// `∫ (m − r)·(m × m_xx) dx = 0` under Neumann ends
    L2,
    /// `|m × r| <= 1` for unit `m`, `r`
    L3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub residual: f64,
    pub grid_n: usize,
    pub observed_order: Option<f64>,
}

/// `f(k) > 0` and `|f(k) + k| <= 1`.
pub fn f_admissible(f_of_k: f64, k: f64) -> bool {
    f_of_k.is_finite() && k.is_finite() && f_of_k > 0.0 && (f_of_k + k).abs() <= 1.0
}

fn error_norm_sq(m: &MagnetizationField, r: EquilibriumPoint) -> f64 {
    let r = r.vector();
    trapezoid(m.grid(), |j| (m.values()[j] - r).norm_sq())
}

/// `‖m × (m − r)‖²` in the discrete L² norm.
pub fn cross_h_norm_sq(m: &MagnetizationField, r: EquilibriumPoint) -> f64 {
    let r = r.vector();
    trapezoid(m.grid(), |j| {
        let mj = m.values()[j];
        cross(mj, mj - r).norm_sq()
    })
}

/// `V(m) = f/2 ‖m − r‖² + 1/2 ‖D⁺m‖²` with trapezoid quadrature.
pub fn lyapunov_v(m: &MagnetizationField, r: EquilibriumPoint, f_of_k: f64) -> f64 {
    0.5 * f_of_k * error_norm_sq(m, r) + exchange_energy(m)
}

/// `1/2 ‖m_x‖²`, the `f = 0` part of [`lyapunov_v`].
pub fn exchange_energy(m: &MagnetizationField) -> f64 {
    0.5 * l2_norm_sq(&diff_forward(m))
}

/// `−ν k f(k) ‖m × (m − r)‖²`, never positive.
pub fn decay_bound(
    m: &MagnetizationField,
    r: EquilibriumPoint,
    nu: f64,
    k: f64,
    f_of_k: f64,
) -> f64 {
    -(nu * k * f_of_k) * cross_h_norm_sq(m, r)
}

pub fn dvdt_estimate(earlier: &LyapunovSample, later: &LyapunovSample) -> Result<f64> {
    let gap = later.t - earlier.t;
    if gap == 0.0 {
        return Err(Error::ZeroTimeGap);
    }
    Ok((later.v - earlier.v) / gap)
}

/// Discretization allowance `10 (dt² + dx²) (1 + |V|)` for the decay check.
pub fn numerical_allowance(dt: f64, dx: f64, v: f64) -> f64 {
    10.0 * (dt * dt + dx * dx) * (1.0 + v.abs())
}

/// Whether the difference quotient between two samples respects the decay
/// bound. The bound is compared at the less negative endpoint.
pub fn decay_holds(
    earlier: &LyapunovSample,
    later: &LyapunovSample,
    dt: f64,
    dx: f64,
) -> Result<bool> {
    let slope = dvdt_estimate(earlier, later)?;
    let bound = earlier.bound.max(later.bound);
    let eps = numerical_allowance(dt, dx, earlier.v.abs().max(later.v.abs()));
    Ok(slope <= bound + eps)
}

/// Initial data must sit in a ball of L² radius below 2 about `r`
/// (normalized by `√L`), which also keeps `−r` out.
pub fn within_stability_ball(m0: &MagnetizationField, r: EquilibriumPoint) -> bool {
    let radius = 2.0 * (1.0 - 1e-6) * m0.grid().length().sqrt();
    let far_node = m0.values().iter().any(|&v| (v + r.vector()).norm() < 1e-12);
    error_norm_sq(m0, r).sqrt() < radius && !far_node
}

/// Max discrepancy between the central difference of `g = m × m_x` and
/// `m × Δm`, over nodes whose stencils avoid ghost values (`2..=N-2`).
pub fn check_lemma1(m: &MagnetizationField) -> Result<LemmaReport> {
    let n = m.grid().cells();
    if n < 4 {
        return Err(Error::GridTooSmall(n));
    }
    let mx = diff_central(m);
    let lap = laplacian_neumann(m);
    let v = m.values();
    let g: Vec<Vec3> = v
        .iter()
        .zip(mx.values())
        .map(|(&a, &b)| cross(a, b))
        .collect();
    let half_inv_dx = 0.5 / m.dx();
    let residual = (2..=n - 2)
        .map(|j| {
            let gx = (g[j + 1] - g[j - 1]) * half_inv_dx;
            (gx - cross(v[j], lap.values()[j])).max_abs()
        })
        .fold(0.0, f64::max);
    Ok(LemmaReport {
        lemma: LemmaId::L1,
        residual,
        grid_n: n,
        observed_order: None,
    })
}

/// `| trapezoid of (m − r)·(m × Δm) |` with the Neumann Laplacian.
pub fn check_lemma2(m: &MagnetizationField, r: EquilibriumPoint) -> LemmaReport {
    let lap = laplacian_neumann(m);
    let r = r.vector();
    let integral = trapezoid(m.grid(), |j| {
        let mj = m.values()[j];
        (mj - r).dot(cross(mj, lap.values()[j]))
    });
    LemmaReport {
        lemma: LemmaId::L2,
        residual: integral.abs(),
        grid_n: m.grid().cells(),
        observed_order: None,
    }
}

/// `|m × r|` for unit `m` and `r`.
pub fn check_lemma3(m_node: Vec3, r: Vec3) -> Result<f64> {
    for (what, v) in [("m", m_node), ("r", r)] {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit { what, norm });
        }
    }
    Ok(cross(m_node, r).norm())
}

/// Least-squares slope of `log(residual)` against `log(dx)`.
///
/// `NaN` when fewer than two positive residuals are available.
pub fn fit_order(grid_n: &[usize], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = grid_n
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > 0.0 && r.is_finite())
        .map(|(&n, &r)| ((1.0 / n as f64).ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs a lemma check over a sequence of grids and annotates each report
/// after the first with the order observed against its predecessor.
pub fn refinement_study(
    grid_n: &[usize],
    length: f64,
    mut check: impl FnMut(GridSpec) -> Result<LemmaReport>,
) -> Result<Vec<LemmaReport>> {
    let mut reports: Vec<LemmaReport> = Vec::with_capacity(grid_n.len());
    for &n in grid_n {
        let mut report = check(GridSpec::new(n, length)?)?;
        if let Some(prev) = reports.last() {
            let ratio = n as f64 / prev.grid_n as f64;
            report.observed_order = Some((prev.residual / report.residual).ln() / ratio.ln());
        }
        reports.push(report);
    }
    Ok(reports)
}
