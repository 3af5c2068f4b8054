//! 3-vector algebra and discrete calculus on uniform vertex-centered grids.

mod field;
mod vec3;

pub use field::{
    DEGENERATE_NORM, GridSpec, MagnetizationField, SPHERE_TOL, cross_field, diff_central,
    diff_forward, l2_norm, l2_norm_sq, laplacian_neumann, renormalize, trapezoid,
};
pub(crate) use field::{laplacian_at, renormalize_in_place};
pub use vec3::{Vec3, cross, triple_cross};
