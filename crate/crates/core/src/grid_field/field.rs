use super::vec3::{Vec3, cross};
use crate::error::{Error, Result};

/// Nodes whose norm falls below this are treated as blow-up.
pub const DEGENERATE_NORM: f64 = 1e-8;

/// Tolerance on `| |m_j| - 1 |` for a field flagged as lying on the sphere.
pub const SPHERE_TOL: f64 = 1e-12;

/// Vertex-centered uniform grid on `[0, L]` with `N` cells and `N + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        Ok(GridSpec { n, length })
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.n {
            self.length
        } else {
            j as f64 * self.dx()
        }
    }

    /// Index of the node closest to `x`, clamped to the domain.
    pub fn nearest_node(&self, x: f64) -> usize {
        let j = (x / self.dx()).round();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.n)
        }
    }

    /// Composite trapezoid weight of node `j`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.n {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }
}

/// Nodal samples of a 3-vector field on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationField {
    grid: GridSpec,
    values: Vec<Vec3>,
    on_sphere: bool,
}

impl MagnetizationField {
    pub fn from_values(grid: GridSpec, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::NodeCount {
                expected: grid.nodes(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let on_sphere = values.iter().all(|v| (v.norm() - 1.0).abs() <= SPHERE_TOL);
        Ok(MagnetizationField {
            grid,
            values,
            on_sphere,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Vec3) -> Result<Self> {
        let values = (0..grid.nodes()).map(|j| f(grid.x(j))).collect();
        Self::from_values(grid, values)
    }

    pub fn constant(grid: GridSpec, value: Vec3) -> Result<Self> {
        Self::from_values(grid, vec![value; grid.nodes()])
    }

    pub fn zeros(grid: GridSpec) -> Self {
        MagnetizationField {
            grid,
            values: vec![Vec3::ZERO; grid.nodes()],
            on_sphere: false,
        }
    }

    /// Wraps values produced by the crate's own kernels without rescanning them.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Vec3>, on_sphere: bool) -> Self {
        debug_assert_eq!(values.len(), grid.nodes());
        MagnetizationField {
            grid,
            values,
            on_sphere,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.values
    }

    pub fn on_sphere(&self) -> bool {
        self.on_sphere
    }

    pub fn same_grid(&self, other: &MagnetizationField) -> bool {
        self.grid == other.grid
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> MagnetizationField {
        let values = self.values.iter().map(|&v| f(v)).collect();
        MagnetizationField::from_raw(self.grid, values, false)
    }

    pub fn zip_map(
        &self,
        other: &MagnetizationField,
        f: impl Fn(Vec3, Vec3) -> Vec3,
    ) -> Result<MagnetizationField> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(MagnetizationField::from_raw(self.grid, values, false))
    }

    /// `max_j | |m_j| - 1 |`.
    pub fn max_norm_deviation(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest nodewise Euclidean distance between two fields on the same grid.
    pub fn max_node_distance(&self, other: &MagnetizationField) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Trapezoid-weighted mean vector `(1/L) * integral of m`.
    pub fn mean(&self) -> Vec3 {
        let sum = self
            .values
            .iter()
            .enumerate()
            .fold(Vec3::ZERO, |acc, (j, &v)| acc + v * self.grid.weight(j));
        sum / self.grid.length()
    }

    pub fn sample_nearest(&self, x: f64) -> Vec3 {
        self.values[self.grid.nearest_node(x)]
    }
}

/// Second difference at node `j` with mirror ghosts `f[-1] = f[1]`, `f[N+1] = f[N-1]`.
#[inline]
pub(crate) fn laplacian_at(values: &[Vec3], j: usize, inv_dx2: f64) -> Vec3 {
    let last = values.len() - 1;
    let left = if j == 0 { values[1] } else { values[j - 1] };
    let right = if j == last {
        values[last - 1]
    } else {
        values[j + 1]
    };
    (left - values[j] * 2.0 + right) * inv_dx2
}

/// Neumann Laplacian: central second differences with mirror ghost nodes,
/// which imposes `m_x = 0` at both ends to second order.
pub fn laplacian_neumann(f: &MagnetizationField) -> MagnetizationField {
    let inv_dx2 = 1.0 / (f.dx() * f.dx());
    let values = (0..f.values.len())
        .map(|j| laplacian_at(&f.values, j, inv_dx2))
        .collect();
    MagnetizationField::from_raw(f.grid, values, false)
}

/// Forward differences `(f[j+1] - f[j]) / dx` on nodes `0..N`; the slot at
/// `x = L` is zero.
pub fn diff_forward(f: &MagnetizationField) -> MagnetizationField {
    let inv_dx = 1.0 / f.dx();
    let mut values: Vec<Vec3> = f
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]) * inv_dx)
        .collect();
    values.push(Vec3::ZERO);
    MagnetizationField::from_raw(f.grid, values, false)
}

/// Central differences with mirror ghosts, so the endpoint slopes are zero.
pub fn diff_central(f: &MagnetizationField) -> MagnetizationField {
    let v = &f.values;
    let last = v.len() - 1;
    let half_inv_dx = 0.5 / f.dx();
    let values = (0..=last)
        .map(|j| {
            if j == 0 || j == last {
                Vec3::ZERO
            } else {
                (v[j + 1] - v[j - 1]) * half_inv_dx
            }
        })
        .collect();
    MagnetizationField::from_raw(f.grid, values, false)
}

/// Composite trapezoid rule for a scalar nodal function.
pub fn trapezoid(grid: GridSpec, nodal: impl Fn(usize) -> f64) -> f64 {
    let n = grid.cells();
    let ends = 0.5 * (nodal(0) + nodal(n));
    let interior: f64 = (1..n).map(nodal).sum();
    // scale once at the end so that constant integrands come out exact
    (ends + interior) * grid.length() / n as f64
}

/// Trapezoid quadrature of `integral_0^L |f(x)|^2 dx`.
pub fn l2_norm_sq(f: &MagnetizationField) -> f64 {
    trapezoid(f.grid, |j| f.values[j].norm_sq())
}

pub fn l2_norm(f: &MagnetizationField) -> f64 {
    l2_norm_sq(f).sqrt()
}

/// Nodewise cross product of two fields.
pub fn cross_field(a: &MagnetizationField, b: &MagnetizationField) -> Result<MagnetizationField> {
    a.zip_map(b, cross)
}

pub(crate) fn renormalize_in_place(values: &mut [Vec3]) -> Result<()> {
    for (index, v) in values.iter_mut().enumerate() {
        let norm = v.norm();
        if norm.is_nan() || norm < DEGENERATE_NORM {
            return Err(Error::DegenerateNode { index, norm });
        }
        *v = *v / norm;
    }
    Ok(())
}

/// Projects every node onto the unit sphere.
pub fn renormalize(f: &MagnetizationField) -> Result<MagnetizationField> {
    let mut values = f.values.clone();
    renormalize_in_place(&mut values)?;
    Ok(MagnetizationField::from_raw(f.grid, values, true))
}
