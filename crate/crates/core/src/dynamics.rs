//! Right-hand side of the controlled Landau–Lifshitz equation
//!
//! ```text
//! dm/dt = m × (m_xx + u) − ν m × (m × (m_xx + u)) [+ û(t)]
//! ```
//!
//! with homogeneous Neumann ends, the proportional feedback `u = k (r − m)`
//! and an optional spatially uniform periodic input `û(t)`.

use crate::error::{Error, Result};
use crate::grid_field::{
    GridSpec, MagnetizationField, Vec3, cross, laplacian_at, laplacian_neumann, triple_cross,
};
use crate::lyapunov::f_admissible;

/// Tolerance for membership of a constant vector in the equilibrium set.
pub const UNIT_TOL: f64 = 1e-12;

/// Physical and gain parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub nu: f64,
    pub k: f64,
    pub f_of_k: f64,
    pub grid: GridSpec,
}

impl SimParams {
    pub fn new(nu: f64, k: f64, f_of_k: f64, grid: GridSpec) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::Inadmissible(format!(
                "damping nu = {nu} must be >= 0"
            )));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::Inadmissible(format!("gain k = {k} must be > 0")));
        }
        if !f_admissible(f_of_k, k) {
            return Err(Error::Inadmissible(format!(
                "f(k) = {f_of_k} with k = {k} violates f(k) > 0 and |f(k) + k| <= 1"
            )));
        }
        Ok(SimParams {
            nu,
            k,
            f_of_k,
            grid,
        })
    }

    /// Gain schedule `f(k) = k`, admissible for `k` in `(0, 1/2]`.
    pub fn with_f_equals_k(nu: f64, k: f64, grid: GridSpec) -> Result<Self> {
        Self::new(nu, k, k, grid)
    }
}

/// A constant unit vector `r`, i.e. a member of the equilibrium set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    r: Vec3,
}

impl EquilibriumPoint {
    pub fn new(r: Vec3) -> Result<Self> {
        let norm = r.norm();
        if !r.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit {
                what: "equilibrium point r",
                norm,
            });
        }
        Ok(EquilibriumPoint { r })
    }

    pub fn vector(&self) -> Vec3 {
        self.r
    }

    /// The stability argument assumes `r1 != 0`; configurations with
    /// `r1 == 0` are still simulated but cannot use [`solve_collinear`].
    pub fn has_nonzero_first_component(&self) -> bool {
        self.r.x1 != 0.0
    }
}

/// Spatially uniform input `amplitude * cos(omega t)` along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicInput {
    pub amplitude: f64,
    pub omega: f64,
    /// 1-based axis index.
    pub component: usize,
}

impl PeriodicInput {
    pub fn new(amplitude: f64, omega: f64, component: usize) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::Inadmissible(format!(
                "amplitude {amplitude} is not finite"
            )));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Inadmissible(format!("omega = {omega} must be > 0")));
        }
        if !(1..=3).contains(&component) {
            return Err(Error::Inadmissible(format!(
                "input component {component} must be 1, 2 or 3"
            )));
        }
        Ok(PeriodicInput {
            amplitude,
            omega,
            component,
        })
    }

    pub fn scalar(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t).cos()
    }

    /// `û(t)`.
    pub fn evaluate(&self, t: f64) -> Vec3 {
        Vec3::basis(self.component).expect("component validated") * self.scalar(t)
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }
}

/// Applied field acting as the control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    None,
    /// `u = k (r − m)`.
    Proportional {
        r: EquilibriumPoint,
        k: f64,
    },
}

impl Control {
    #[inline]
    pub fn at(&self, m: Vec3) -> Vec3 {
        match *self {
            Control::None => Vec3::ZERO,
            Control::Proportional { r, k } => (r.vector() - m) * k,
        }
    }
}

/// Nodewise `u_j = k (r − m_j)`.
pub fn control_proportional(
    m: &MagnetizationField,
    r: EquilibriumPoint,
    k: f64,
) -> MagnetizationField {
    let control = Control::Proportional { r, k };
    m.map(|v| control.at(v))
}

#[inline]
fn llg_node(m: Vec3, effective: Vec3, nu: f64) -> Vec3 {
    cross(m, effective) - triple_cross(m, m, effective) * nu
}

/// `m × (Δm + u) − ν m × (m × (Δm + u))` at every node.
///
/// For unit nodes the result is tangent to the sphere.
pub fn llg_rhs(
    m: &MagnetizationField,
    u: &MagnetizationField,
    nu: f64,
) -> Result<MagnetizationField> {
    let lap = laplacian_neumann(m);
    let effective = lap.zip_map(u, |a, b| a + b)?;
    m.zip_map(&effective, |mj, hj| llg_node(mj, hj, nu))
}

/// [`llg_rhs`] plus the uniform vector `uhat` at every node. Not tangent in general.
pub fn llg_rhs_with_additive_input(
    m: &MagnetizationField,
    u: &MagnetizationField,
    nu: f64,
    uhat: Vec3,
) -> Result<MagnetizationField> {
    Ok(llg_rhs(m, u, nu)?.map(|v| v + uhat))
}

/// Allocation-free right-hand side used by the time integrator.
pub(crate) fn rhs_into(
    m: &[Vec3],
    inv_dx2: f64,
    nu: f64,
    control: &Control,
    uhat: Vec3,
    out: &mut [Vec3],
) {
    for (j, slot) in out.iter_mut().enumerate() {
        let mj = m[j];
        let effective = laplacian_at(m, j, inv_dx2) + control.at(mj);
        *slot = llg_node(mj, effective, nu) + uhat;
    }
}

/// Unit solutions of `m × r = 0`, namely `{r, −r}`.
///
/// Solved the way the collinearity system is written: with `r1 != 0`,
/// `m2 = (r2/r1) m1`, `m3 = (r3/r1) m1`, and the unit constraint fixes `m1`.
pub fn solve_collinear(r: EquilibriumPoint) -> Result<[Vec3; 2]> {
    let Vec3 { x1, x2, x3 } = r.vector();
    if x1 == 0.0 {
        return Err(Error::ZeroFirstComponent(x1, x2, x3));
    }
    let ratio2 = x2 / x1;
    let ratio3 = x3 / x1;
    let m1 = x1.abs() / (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
    let branch = |m1: f64| Vec3::new(m1, ratio2 * m1, ratio3 * m1);
    let (plus, minus) = (branch(m1), branch(-m1));
    // keep the ordering {r, −r}
    if x1 > 0.0 {
        Ok([plus, minus])
    } else {
        Ok([minus, plus])
    }
}

/// Whether a field is (to `tol`) a constant unit vector.
pub fn is_in_equilibrium_set(m: &MagnetizationField, tol: f64) -> bool {
    let mean = m.mean();
    let spread = m
        .values()
        .iter()
        .map(|&v| (v - mean).norm())
        .fold(0.0, f64::max);
    spread <= tol && (mean.norm() - 1.0).abs() <= tol
}
